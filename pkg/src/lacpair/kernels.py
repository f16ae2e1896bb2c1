"""Backend selection for the hot loops.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy implementations in ``_kernels_py`` take over.  Set ``LACPAIR_PURE=1``
to force the fallback.  Both backends return identical integer counts.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("LACPAIR_PURE"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"
else:
    _compiled = None

import numpy as np

count_pairs_direct = _impl.count_pairs_direct
count_pairs_sorted = _impl.count_pairs_sorted
smooth_sum_sorted = _impl.smooth_sum_sorted


def to_limbs(values, width):
    """Pack non-negative ints into a (len, width) uint32 little-endian limb array."""
    nbytes = 4 * width
    buf = b"".join(int(v).to_bytes(nbytes, "little") for v in values)
    return np.frombuffer(buf, dtype="<u4").reshape(len(values), width).copy()


class ExactGapTable:
    """Scaled integer gaps and the threshold kappa, in both backend layouts.

    ``nmax`` bounds the multipliers applied to the gaps and ``E`` the
    pair error bound, which fixes the limb width of every key.
    """

    def __init__(self, gaps, kappa, nmax, E=0):
        self.ints = list(gaps)
        self.kappa = int(kappa)
        self.E = int(E)
        if nmax >= 1 << 32:
            raise ValueError("multipliers must fit in 32 bits")
        self.nmax = int(nmax)
        gbits = max((g.bit_length() for g in self.ints), default=1)
        self.L = max(1, (gbits + 31) // 32)
        top = max(max(self.ints, default=0) * self.nmax, 0) + self.kappa + self.E + 1
        self.W = max(self.L + 2, (top.bit_length() + 1 + 31) // 32 + 1)
        self._limbs = None
        self._kappa_limbs = None

    @property
    def limbs(self):
        if self._limbs is None:
            self._limbs = to_limbs(self.ints, self.L)
        return self._limbs

    @property
    def kappa_limbs(self):
        if self._kappa_limbs is None:
            self._kappa_limbs = to_limbs([self.kappa], self.W)[0].copy()
        return self._kappa_limbs


def close_pairs(f, pid, nmul, core, table, err, impl=None):
    """Exact count of ordered close pairs; see ``_kernels_py.close_pairs``."""
    impl = impl or _impl
    if table.kappa < 0:
        return 0, []
    if impl is _kernels_py:
        return impl.close_pairs(f, pid, nmul, core, table.ints, table.kappa, err, table.E)
    return impl.close_pairs(
        np.ascontiguousarray(f, dtype=np.float64),
        np.ascontiguousarray(pid, dtype=np.int64),
        np.ascontiguousarray(nmul, dtype=np.int64),
        np.ascontiguousarray(core, dtype=np.uint8),
        table.limbs, table.kappa_limbs, int(err), table.E,
    )


def backends():
    """Mapping of available backend name -> kernel module."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
