"""Load covbound submodules directly, bypassing the package __init__."""

import importlib.util
import sys
import types

SRC = "/root/pkg/src/covbound"

if "covbound" not in sys.modules:
    pkg = types.ModuleType("covbound")
    pkg.__path__ = [SRC]
    sys.modules["covbound"] = pkg


def load(name):
    full = f"covbound.{name}"
    if full in sys.modules:
        return sys.modules[full]
    spec = importlib.util.spec_from_file_location(full, f"{SRC}/{name}.py")
    mod = importlib.util.module_from_spec(spec)
    sys.modules[full] = mod
    spec.loader.exec_module(mod)
    return mod
