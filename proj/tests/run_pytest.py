"""Runs the Python smoke tests; exits 77 (ctest skip) when the module is not installed."""

import subprocess
import sys

try:
    import horseshoe  # noqa: F401
except ImportError:
    print("horseshoe Python module not installed; pip install -e . --no-build-isolation")
    sys.exit(77)

sys.exit(subprocess.call([sys.executable, "-m", "pytest", "-q", sys.argv[1]]))
