"""Kernel selection: compiled Ryser permanent if built, numpy fallback otherwise."""

from . import permanent_py

try:
    from . import _permanent_cy

    permanent_ryser = _permanent_cy.permanent_ryser
    PERMANENT_BACKEND = "cython"
except ImportError:  # extension not built
    permanent_ryser = permanent_py.permanent_ryser
    PERMANENT_BACKEND = "python"

__all__ = ["permanent_ryser", "permanent_py", "PERMANENT_BACKEND"]
