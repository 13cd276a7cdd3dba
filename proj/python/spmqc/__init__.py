"""Python bindings for the SPMQC protocol laboratory.

The compiled core lives in ``_spmqc``; an installed wheel carries it inside
this package, while a CMake build tree provides it as a top-level module.
"""

try:
    from spmqc._spmqc import *  # noqa: F401,F403
    from spmqc._spmqc import __doc__ as _core_doc
except ImportError:  # pragma: no cover - build-tree layout
    from _spmqc import *  # noqa: F401,F403
    from _spmqc import __doc__ as _core_doc

__doc__ = _core_doc or __doc__
