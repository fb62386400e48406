#!/usr/bin/env python
"""
GaugeForge - Dependency Installer

Installs the packages listed in requirements.txt into the current Python
environment and checks that they import.

Usage:
    python install_dependencies.py
"""

import os
import subprocess
import sys

ROOT = os.path.dirname(os.path.abspath(__file__))

# import name per requirement
TEST_IMPORTS = [
    "numpy",
    "scipy",
    "mpmath",
    "dotenv",
    "pytest",
    "hypothesis",
]


def read_requirements():
    """Requirement lines, without comments and blanks"""

    with open(os.path.join(ROOT, "requirements.txt"), "r") as f:
        return [line.strip() for line in f if line.strip() and not line.startswith("#")]


def install_packages(packages):
    """Install packages using pip"""

    print("\n" + "="*60)
    print("Installing Python Dependencies for GaugeForge")
    print("="*60 + "\n")

    print(f"Packages to install: {len(packages)}")
    print("-" * 60)

    for package in packages:
        print(f"\nInstalling {package}...")
        cmd = [sys.executable, "-m", "pip", "install", "--upgrade", package]

        try:
            subprocess.run(cmd, capture_output=True, text=True, check=True)
            print(f"✓ {package} installed successfully")

        except subprocess.CalledProcessError as e:
            print(f"✗ Error installing {package}")
            print(f"  Error: {e.stderr}")
            return False

    return True


def verify_installation():
    """Verify that packages are importable"""

    print("\n" + "="*60)
    print("Verifying Installation")
    print("="*60 + "\n")

    failed = []
    for module in TEST_IMPORTS:
        try:
            __import__(module)
            print(f"✓ {module}")
        except ImportError as e:
            print(f"✗ {module}: {e}")
            failed.append(module)

    if sys.version_info < (3, 11):
        try:
            __import__("tomli")
            print("✓ tomli")
        except ImportError as e:
            print(f"✗ tomli: {e}")
            failed.append("tomli")

    if failed:
        print(f"\n⚠ Failed imports: {', '.join(failed)}")
        return False

    print("\n✓ All packages verified successfully!")
    return True


def main():
    """Main installation process"""

    print("\n" + "="*60)
    print("GAUGEFORGE - SETUP")
    print("="*60)
    print(f"\nTarget Python: {sys.executable}")

    if not install_packages(read_requirements()):
        print("\n✗ Installation failed. Please check errors above.")
        sys.exit(1)

    if not verify_installation():
        print("\n⚠ Installation complete but verification failed.")
        sys.exit(1)

    print("\n" + "="*60)
    print("INSTALLATION COMPLETE!")
    print("="*60)
    print("\nNext steps:")
    print("1. Optionally copy .env.template to .env and adjust precision or schedule")
    print("2. Run the test suite: python -m pytest tests")
    print("3. Try a command: python gaugeforge.py check-gauge --gauge pol")
    print("\nFor detailed instructions, see Docs/QuickStart.md")
    print("="*60 + "\n")


if __name__ == "__main__":
    main()
