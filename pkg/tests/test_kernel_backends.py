import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qgres import backend_name, build_secular
from qgres import _detpy
from qgres.fixtures import double_edge_two_leads, five_edge_two_leads

try:
    from qgres import _detcore
except ImportError:
    _detcore = None

LAMS = np.array([0.7, 2.2 - 0.8j, 3.0 - 1.5j, 5.5 - 0.1j, 9.3 - 2.7j,
                 -2.2 - 0.8j, 1.0 + 0.4j])


def _coo(g):
    sys_ = build_secular(g)
    k = sys_.kernel
    return k, k._signed_len(g.lengths)


def _recombine(mant, exp2):
    return mant * np.exp2(exp2.astype(float))


@pytest.mark.parametrize("make", [double_edge_two_leads, five_edge_two_leads])
def test_scaled_det_matches_dense_determinant(make):
    g = make()
    k, _ = _coo(g)
    mant, exp2 = k.det_scaled_many(LAMS, g.lengths)
    dense = np.array([np.linalg.det(k.matrix(l, g.lengths)) for l in LAMS])
    assert_allclose(_recombine(mant, exp2), dense, rtol=1e-10)


def test_mantissa_is_normalized():
    g = five_edge_two_leads()
    k, _ = _coo(g)
    mant, _ = k.det_scaled_many(LAMS, g.lengths)
    a = np.abs(mant)
    assert np.all((a >= 1.0 - 1e-12) & (a < 2.0 + 1e-12))


def test_logderiv_matches_finite_difference():
    g = five_edge_two_leads()
    k, _ = _coo(g)
    h = 1e-6
    ld = k.logderiv_many(LAMS, g.lengths)
    mp, ep = k.det_scaled_many(LAMS + h, g.lengths)
    mm, em = k.det_scaled_many(LAMS - h, g.lengths)
    fd = (np.log(mp.astype(complex)) - np.log(mm.astype(complex))
          + (ep - em) * np.log(2.0)) / (2 * h)
    # fd carries branch jumps of log only through the mantissa, which stays
    # well away from the cut for these sample points
    assert_allclose(ld, fd, rtol=2e-5, atol=2e-5)


def test_matrix_deriv_matches_finite_difference():
    g = double_edge_two_leads()
    k, _ = _coo(g)
    lam = 2.3 - 0.4j
    h = 1e-7
    fd = (k.matrix(lam + h, g.lengths) - k.matrix(lam - h, g.lengths)) / (2 * h)
    assert_allclose(k.matrix_deriv(lam, g.lengths), fd, rtol=1e-6, atol=1e-9)


@pytest.mark.skipif(_detcore is None, reason="compiled backend not built")
def test_backends_agree():
    for make in (double_edge_two_leads, five_edge_two_leads):
        g = make()
        k, sl = _coo(g)
        args = (k.n, k.rows, k.cols, k.coefs, sl, LAMS)
        mant_c, exp_c = _detcore.det_many(*args)
        mant_p, exp_p = _detpy.det_many(*args)
        assert_allclose(_recombine(mant_c, exp_c - exp_p), mant_p, rtol=1e-10)
        assert_allclose(_detcore.logder_many(*args), _detpy.logder_many(*args),
                        rtol=1e-9, atol=1e-9)


def _probe(env_value):
    env = dict(os.environ)
    env["QGRES_BACKEND"] = env_value
    return subprocess.run(
        [sys.executable, "-c", "import qgres; print(qgres.backend_name())"],
        capture_output=True, text=True, env=env)


def test_env_var_selects_backend():
    out = _probe("py")
    assert out.returncode == 0 and out.stdout.strip() == "numpy"
    if _detcore is not None:
        out = _probe("c")
        assert out.returncode == 0 and out.stdout.strip() == "compiled"
    bad = _probe("fortran")
    assert bad.returncode != 0 and "QGRES_BACKEND" in bad.stderr


def test_active_backend_reported():
    assert backend_name() in ("compiled", "numpy")
