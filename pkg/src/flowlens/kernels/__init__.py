"""Hot-loop kernels: compiled extension when available, numpy fallback
otherwise. Both expose the same two functions with identical semantics;
IMPLEMENTATION says which one this process is running.
"""

try:
    from . import _ckernels as _impl

    IMPLEMENTATION = "cython"
except ImportError:  # no compiler at install time, or source-tree run
    from . import pykernels as _impl

    IMPLEMENTATION = "python"

leader_cluster = _impl.leader_cluster
lcs_leftmost = _impl.lcs_leftmost

__all__ = ["leader_cluster", "lcs_leftmost", "IMPLEMENTATION"]
