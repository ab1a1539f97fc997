#!/usr/bin/env python3
"""
Setup script for local development: installs the tooling and runs one smoke solve
"""

import subprocess
import sys

SMOKE_PROBLEM = "problems/cara_triangular.json"

def install_requirements():
    """Install required packages for local development"""
    print("📦 Installing required packages...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements_local.txt"])
        print("✅ Requirements installed successfully!")
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed to install requirements: {e}")
        return False

def smoke_solve():
    """Solve the bundled CARA problem and print the rates"""
    print(f"🧮 Solving {SMOKE_PROBLEM}...")
    try:
        from cli_reporting import parse_problem_file, run_solve
        record = run_solve(parse_problem_file(SMOKE_PROBLEM))[0]
    except Exception as e:
        print(f"❌ Smoke solve failed: {e}")
        return False
    print(f"✅ beta_approx = {record.beta_approx:.12g}")
    if record.beta_exact is not None:
        print(f"✅ beta_exact  = {record.beta_exact:.12g}")
    for note in record.warnings:
        print(f"⚠️  {note}")
    return True

def main():
    print("🏠 Setting up local coinsurance environment...")
    print("=" * 50)

    if not install_requirements():
        return False

    if not smoke_solve():
        return False

    print("\n🎉 Setup complete!")
    print("\n📝 Next steps:")
    print("   1. Run: python cli_reporting.py solve --input problems/cara_triangular.json")
    print("   2. Sweep: python cli_reporting.py sweep --input problems/cara_triangular.json --param lambda --from 0 --to 2 --steps 9")
    print("   3. Tests: pytest")
    print("   4. Service: API_KEY=... uvicorn app:app --reload")

    return True

if __name__ == "__main__":
    main()
