"""Backend selection for the determinant kernel.

The compiled extension (qgres._detcore) and the numpy fallback
(qgres._detpy) expose the same two functions; this module picks one at
import time. Set QGRES_BACKEND=py or =c to force a choice.
"""

from __future__ import annotations

import os

import numpy as np

from . import _detpy

try:
    from . import _detcore
except ImportError:
    _detcore = None

_choice = os.environ.get("QGRES_BACKEND", "").strip().lower()
if _choice in ("", "auto"):
    _impl = _detcore if _detcore is not None else _detpy
elif _choice in ("c", "compiled", "ext"):
    if _detcore is None:
        raise ImportError("QGRES_BACKEND=c but qgres._detcore is not built")
    _impl = _detcore
elif _choice in ("py", "python", "numpy"):
    _impl = _detpy
else:
    raise ImportError(f"unknown QGRES_BACKEND value {_choice!r}")


def backend_name() -> str:
    return "compiled" if _impl is _detcore else "numpy"


class DetKernel:
    """Entry pattern of one secular system, evaluated at many lambdas.

    Each term contributes coef * exp(i lam sign ell_edge) to entry
    (row, col); edge index -1 marks a constant term. Lengths are passed per
    call so one kernel serves a whole length-perturbation family.
    """

    def __init__(self, n, rows, cols, coefs, edges, signs):
        self.n = int(n)
        self.rows = np.ascontiguousarray(rows, dtype=np.int32)
        self.cols = np.ascontiguousarray(cols, dtype=np.int32)
        self.coefs = np.ascontiguousarray(coefs, dtype=complex)
        self.edges = np.ascontiguousarray(edges, dtype=np.int32)
        self.signs = np.ascontiguousarray(signs, dtype=np.int8)

    def _signed_len(self, lengths) -> np.ndarray:
        lengths = np.asarray(lengths, dtype=float)
        out = np.zeros(self.edges.shape, dtype=float)
        m = self.edges >= 0
        out[m] = self.signs[m] * lengths[self.edges[m]]
        return out

    def matrix(self, lam, lengths) -> np.ndarray:
        sl = self._signed_len(lengths)
        mats, _ = _detpy._assemble(
            self.n, self.rows, self.cols, self.coefs, sl, [lam], False
        )
        return mats[0]

    def matrix_deriv(self, lam, lengths) -> np.ndarray:
        sl = self._signed_len(lengths)
        _, dmats = _detpy._assemble(
            self.n, self.rows, self.cols, self.coefs, sl, [lam], True
        )
        return dmats[0]

    def det_scaled_many(self, lams, lengths):
        """(mantissa, exp2) arrays with det = mantissa * 2**exp2."""
        return _impl.det_many(
            self.n, self.rows, self.cols, self.coefs, self._signed_len(lengths),
            np.asarray(lams, dtype=complex).ravel(),
        )

    def logderiv_many(self, lams, lengths) -> np.ndarray:
        return _impl.logder_many(
            self.n, self.rows, self.cols, self.coefs, self._signed_len(lengths),
            np.asarray(lams, dtype=complex).ravel(),
        )
