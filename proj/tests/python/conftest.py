import os
import sys

# The extension module is built by CMake; tests run against the build tree.
_module_dir = os.environ.get("FIRMSIM_MODULE_DIR")
if _module_dir and _module_dir not in sys.path:
    sys.path.insert(0, _module_dir)

_package_dir = os.path.join(os.path.dirname(__file__), "..", "..", "python")
_package_dir = os.path.abspath(_package_dir)
if _package_dir not in sys.path:
    sys.path.insert(0, _package_dir)
