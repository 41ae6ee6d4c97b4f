#!/usr/bin/env python3
"""
Bootstrap script for the noisy exchange entangler: installs requirements,
prepares the working directories and smoke-tests the command line.
"""

import importlib
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).parent
REQUIRED_MODULES = ["numpy", "pandas", "pydantic", "yaml", "dotenv", "jinja2", "loguru"]

ENV_TEMPLATE = """# Noisy Exchange Entangler

# Sweep tables, reports and run manifests go here
ENTANGLER_OUTPUT_DIR=./output
"""


def python_is_supported() -> bool:
    if sys.version_info < (3, 8):
        print(f"❌ Python 3.8+ required, found {sys.version.split()[0]}")
        return False
    print(f"✅ Python {sys.version.split()[0]}")
    return True


def install_requirements() -> bool:
    requirements = ROOT / "requirements.txt"
    result = subprocess.run([sys.executable, "-m", "pip", "install", "-r", str(requirements)])
    if result.returncode != 0:
        print(f"❌ pip exited with status {result.returncode}")
        return False
    missing = []
    for name in REQUIRED_MODULES:
        try:
            importlib.import_module(name)
        except ImportError:
            missing.append(name)
    if missing:
        print(f"❌ Still not importable: {', '.join(missing)}")
        return False
    print(f"✅ {len(REQUIRED_MODULES)} runtime packages importable")
    return True


def prepare_workspace():
    for name in ("output", "logs"):
        (ROOT / name).mkdir(exist_ok=True)
        print(f"✅ {name}/ ready")
    env_file = ROOT / ".env"
    if env_file.exists():
        print("⚠️ keeping existing .env")
    else:
        env_file.write_text(ENV_TEMPLATE, encoding="utf-8")
        print("✅ wrote .env")


def smoke_test() -> bool:
    """Ask the CLI for its version; exit status 0 means the package imports cleanly"""
    result = subprocess.run([sys.executable, str(ROOT / "main.py"), "version"],
                            capture_output=True, text=True)
    if result.returncode != 0:
        print(f"❌ main.py version failed:\n{result.stderr.strip()}")
        return False
    print(f"✅ {result.stdout.splitlines()[0] if result.stdout else 'main.py version ok'}")
    return True


def main():
    skip_install = "--no-install" in sys.argv[1:]
    print("🧲 Noisy Exchange Entangler setup")
    print("=" * 40)

    if not python_is_supported():
        sys.exit(1)

    if skip_install:
        print("\n📦 Skipping requirements (--no-install)")
    else:
        print("\n📦 Installing requirements...")
        if not install_requirements():
            sys.exit(1)

    print("\n📁 Preparing workspace...")
    prepare_workspace()

    print("\n🔎 Smoke test...")
    if not smoke_test():
        sys.exit(1)

    print("\n🎉 Ready.")
    print("  python main.py verdict --scenario ising-tunable --lambda 1 --omega 0.5")
    print("  pytest -m 'not slow'")


if __name__ == "__main__":
    main()
