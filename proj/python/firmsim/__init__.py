"""Service composition control loop and data-center simulation."""

import importlib

# Installed builds ship the extension inside the package; development builds
# put it on sys.path as a top-level module.
try:
    _core = importlib.import_module("firmsim._firmsim")
except ModuleNotFoundError:
    _core = importlib.import_module("_firmsim")

__all__ = [
    "CompareRow",
    "CompositionRequest",
    "EndpointRef",
    "EngineParams",
    "InvariantViolation",
    "MetricsRecord",
    "Mode",
    "PathMetric",
    "Registry",
    "RunResult",
    "RunTotals",
    "Scenario",
    "Topology",
    "ValidationError",
    "alternative_path_bound",
    "compare_modes",
    "deviation_percent",
    "parse_registry",
    "parse_request",
    "parse_scenario",
    "run",
]

for _name in __all__:
    globals()[_name] = getattr(_core, _name)
del _name, _core, importlib
