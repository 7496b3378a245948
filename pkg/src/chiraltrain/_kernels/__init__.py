"""Propagation kernel backend selection.

The sudden-kick kernel exp(i*P*H)*v on a sparse Hermitian H is the hot
inner loop of every sweep.  A compiled Cython core is used when the
extension was built; otherwise a pure-numpy/scipy fallback with identical
semantics is selected.  Set CHIRALTRAIN_FORCE_FALLBACK=1 to force the
fallback (used by the benchmark and backend-equivalence tests).
"""

import os

from . import fallback

if os.environ.get("CHIRALTRAIN_FORCE_FALLBACK"):
    _impl = fallback
    BACKEND = "fallback (forced)"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = fallback
        BACKEND = "fallback"

expm_apply = _impl.expm_apply
propagate_train = _impl.propagate_train

__all__ = ["expm_apply", "propagate_train", "BACKEND", "fallback"]
