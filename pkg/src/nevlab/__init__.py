"""nevlab: desk-scale numerics for Herglotz-class operator functions.

Submodules are imported lazily so the command line can pin BLAS thread
pools before any numerics load.
"""

from importlib import import_module

__all__ = [
    "analysis",
    "cli",
    "document",
    "examples",
    "herglotz",
    "invariance",
    "matnum",
    "pairs",
    "relations",
    "reports",
    "runner",
]

__version__ = "0.1.0"


def __getattr__(name):
    if name in __all__:
        return import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
