"""Pure numpy evaluation of secular determinants and log-derivatives.

Same interface as the compiled _detcore module. Matrices are assembled for a
whole batch of lambda values at once and pushed through batched LAPACK calls;
determinants are returned as (mantissa, base-2 exponent) pairs so huge
exponential factors never overflow.
"""

import numpy as np

_LN2 = np.log(2.0)


def _assemble(n, rows, cols, coefs, signed_len, lams, want_deriv):
    lams = np.asarray(lams, dtype=complex).ravel()
    phase = np.exp(1j * np.multiply.outer(lams, signed_len))
    vals = coefs[None, :] * phase
    flat = rows * n + cols
    mats = np.zeros((lams.size, n * n), dtype=complex)
    np.add.at(mats, (slice(None), flat), vals)
    mats = mats.reshape(lams.size, n, n)
    if not want_deriv:
        return mats, None
    dvals = vals * (1j * signed_len)[None, :]
    dmats = np.zeros((lams.size, n * n), dtype=complex)
    np.add.at(dmats, (slice(None), flat), dvals)
    return mats, dmats.reshape(lams.size, n, n)


def det_many(n, rows, cols, coefs, signed_len, lams):
    mats, _ = _assemble(n, rows, cols, coefs, signed_len, lams, False)
    sign, logabs = np.linalg.slogdet(mats)
    exp2 = np.zeros(sign.shape, dtype=np.int64)
    mant = np.zeros(sign.shape, dtype=complex)
    ok = np.isfinite(logabs) & (sign != 0)
    l2 = logabs[ok] / _LN2
    e = np.floor(l2)
    mant[ok] = sign[ok] * np.exp2(l2 - e)
    exp2[ok] = e.astype(np.int64)
    return mant, exp2


def logder_many(n, rows, cols, coefs, signed_len, lams):
    """tr(M(lam)^-1 M'(lam)) per lambda; inf where M is singular."""
    mats, dmats = _assemble(n, rows, cols, coefs, signed_len, lams, True)
    out = np.empty(mats.shape[0], dtype=complex)
    try:
        sol = np.linalg.solve(mats, dmats)
        out[:] = np.trace(sol, axis1=-2, axis2=-1)
    except np.linalg.LinAlgError:
        for i in range(mats.shape[0]):
            try:
                out[i] = np.trace(np.linalg.solve(mats[i], dmats[i]))
            except np.linalg.LinAlgError:
                out[i] = complex(np.inf, 0.0)
    return out
