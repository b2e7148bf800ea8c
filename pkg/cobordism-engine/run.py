#!/usr/bin/env python3
"""
Run the cobordism engine CLI from a source checkout:

    python cobordism-engine/run.py group --manifold catalog:S2twS1
"""

import importlib
import pathlib
import sys
import types

SERVICE_SRC = pathlib.Path(__file__).resolve().parent / "src"
PACKAGE_NAME = "cobordism"

if PACKAGE_NAME not in sys.modules:
    pkg = types.ModuleType(PACKAGE_NAME)
    pkg.__path__ = [str(SERVICE_SRC)]
    sys.modules[PACKAGE_NAME] = pkg


def main():
    cli = importlib.import_module(f"{PACKAGE_NAME}.main")
    sys.exit(cli.run(sys.argv[1:]))


if __name__ == "__main__":
    main()
