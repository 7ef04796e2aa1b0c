"""Lattice phase oscillators, induced weighted graphs, and decay measurements."""

try:
    from phasegraph._phasegraph import *  # noqa: F401,F403  installed layout
    from phasegraph import _phasegraph as _core
except ImportError:  # build-tree layout: the module sits next to the package
    from _phasegraph import *  # noqa: F401,F403
    import _phasegraph as _core

__version__ = "0.1.0"
__all__ = [name for name in dir(_core) if not name.startswith("_")]
