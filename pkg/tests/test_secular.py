import numpy as np
import pytest
from numpy.testing import assert_allclose

from qgres import (
    EdgeWave,
    InvalidWindow,
    NotEmbedded,
    NotSimple,
    OutOfRange,
    build_secular,
    det_secular,
    eigenfunction,
    eval_wave,
    find_spectral_points,
    generalized_eigenfunction,
    generalized_eigenfunction_report,
    inner_product,
    norm,
    scattering_matrix,
    vertex_trace,
    winding_number,
)
from qgres.fixtures import fixture, half_line, ring

LN3 = np.log(3.0)

# roots of tan(x) + 2 tan(x/2) = 0 interlacing the pi Z ladder
S2_FIRST = 2 * np.arctan(np.sqrt(2.0))
S2_SECOND = 4.372552070930568


def test_det_vanishes_at_known_points(double_edge):
    for lam in (np.pi, 2 * np.pi, np.pi - 1j * LN3, 2 * np.pi - 1j * LN3):
        assert abs(det_secular(double_edge, lam)) < 1e-10
    assert abs(det_secular(double_edge, 2.0 - 0.3j)) > 1e-3


def test_two_leads_two_edges_spectrum(double_edge):
    pts = find_spectral_points(double_edge, (0.5, 10.0, -2.0, 0.0))
    expected = []
    for n in (1, 2, 3):
        expected += [n * np.pi, n * np.pi - 1j * LN3]
    got = sorted((p.lam for p in pts), key=lambda z: (z.real, -z.imag))
    assert len(got) == 6
    assert_allclose(got, sorted(expected, key=lambda z: (z.real, -z.imag)),
                    rtol=0, atol=1e-9)
    kinds = {round(p.lam.imag, 3): p.kind for p in pts}
    assert kinds[0.0] == "EmbeddedEigenvalue"
    assert kinds[round(-LN3, 3)] == "Resonance"
    assert all(p.multiplicity == 1 for p in pts)
    assert all(p.residual < 1e-8 for p in pts)


def test_glued_triangles_spectrum(five_edge):
    pts = find_spectral_points(five_edge, (1.0, 7.0, -1.0, 0.0))
    eigs = sorted(p.lam.real for p in pts if p.kind == "EmbeddedEigenvalue"
                  for _ in range(p.multiplicity))
    assert_allclose(eigs, [S2_FIRST, np.pi, S2_SECOND, 2 * np.pi, 2 * np.pi],
                    rtol=0, atol=1e-8)
    res = sorted((p.lam for p in pts if p.kind == "Resonance"),
                 key=lambda z: z.real)
    frozen = [1.5707963267948966 - 0.549306144334055j,
              2.3170321311516378 - 0.32905588895739546j,
              3.9661531760279489 - 0.32905588895739563j,
              4.7123889803846897 - 0.549306144334055j,
              6.2831853071795862 - 0.44050051075331859j]
    assert_allclose(res, frozen, rtol=0, atol=1e-8)


def test_winding_counts_match_roots(double_edge, five_edge):
    for g, window in ((double_edge, (0.5, 10.0, -2.0, 0.0)),
                      (five_edge, (1.0, 7.0, -1.0, 0.0)),
                      (five_edge, (1.5, 2.5, -0.6, 0.0))):
        pts = find_spectral_points(g, window)
        assert winding_number(g, window) == sum(p.multiplicity for p in pts)


def test_half_line_has_no_spectrum():
    assert find_spectral_points(half_line(), (0.5, 20.0, -3.0, 0.0)) == []


def test_compact_cycle_doubly_degenerate():
    pts = find_spectral_points(ring(2), (1.0, 10.0, -1.0, 0.0))
    assert [p.multiplicity for p in pts] == [2, 2, 2]
    assert_allclose([p.lam.real for p in pts],
                    [np.pi, 2 * np.pi, 3 * np.pi], rtol=0, atol=1e-8)
    assert all(p.kind == "EmbeddedEigenvalue" for p in pts)


def test_window_must_avoid_origin(double_edge):
    with pytest.raises(InvalidWindow):
        find_spectral_points(double_edge, (-0.5, 0.5, -0.5, 0.0))
    with pytest.raises(InvalidWindow):
        find_spectral_points(double_edge, (3.0, 2.0, -1.0, 0.0))


def test_boundary_zero_does_not_break_search(double_edge):
    # right window edge passes through lam = 2 pi and its resonance
    pts = find_spectral_points(double_edge, (4.0, 2 * np.pi, -2.0, 0.0))
    for p in pts:
        assert abs(det_secular(double_edge, p.lam)) < 1e-8


def test_search_is_deterministic(double_edge):
    w = (0.5, 7.0, -2.0, 0.0)
    a = find_spectral_points(double_edge, w)
    b = find_spectral_points(double_edge, w)
    assert [(p.lam, p.multiplicity, p.kind) for p in a] == \
           [(p.lam, p.multiplicity, p.kind) for p in b]
    c = find_spectral_points(double_edge, w, seed=7)
    assert_allclose([p.lam for p in c], [p.lam for p in a], rtol=0, atol=1e-9)


def test_mirror_symmetry_of_determinant(double_edge, five_edge):
    for g in (double_edge, five_edge):
        for p in find_spectral_points(g, (1.0, 7.0, -1.0, 0.0)):
            assert abs(det_secular(g, -np.conj(p.lam))) < 1e-8


def test_scattering_closed_form(double_edge):
    for lam in (0.8, 2.0, 4.4, 7.7):
        s, c = np.sin(lam), np.cos(lam)
        d = 4 * c - 5j * s
        S = scattering_matrix(double_edge, lam)
        assert_allclose(S, [[3j * s / d, 4 / d], [4 / d, 3j * s / d]],
                        rtol=1e-12, atol=1e-12)


def test_scattering_unitary_on_axis(five_edge, rng):
    for lam in rng.uniform(0.3, 12.0, size=25):
        S = scattering_matrix(five_edge, lam)
        assert np.linalg.norm(S.conj().T @ S - np.eye(2)) < 1e-11


def test_sine_eigenfunction_on_two_cycle(double_edge):
    sp = [p for p in find_spectral_points(double_edge, (3.0, 3.3, -0.1, 0.0))
          if p.kind == "EmbeddedEigenvalue"][0]
    u = eigenfunction(double_edge, sp)
    assert norm(u) == pytest.approx(1.0, abs=1e-12)
    assert u.max_lead_amplitude() < 1e-10
    x = np.linspace(0, 1, 7)
    v1 = eval_wave(u, "e1", x)
    v2 = eval_wave(u, "e2", x)
    # sin(pi x) on one edge, and its negative on the other
    assert_allclose(v1, -v2, rtol=0, atol=1e-10)
    assert_allclose(v1, v1[1] / np.sin(np.pi * x[1]) * np.sin(np.pi * x),
                    rtol=0, atol=1e-10)
    assert np.max(np.abs(v1.imag)) < 1e-10


def test_glued_triangles_eigenfunction_pattern(five_edge):
    sp = [p for p in find_spectral_points(five_edge, (1.8, 2.0, -0.1, 0.0))
          if p.kind == "EmbeddedEigenvalue"][0]
    assert_allclose(sp.lam.real, S2_FIRST, atol=1e-10)
    u = eigenfunction(five_edge, sp)
    lam = sp.lam.real
    x = np.linspace(0.1, 0.9, 5)
    base = eval_wave(u, "e3", x)
    c = (base / np.sin(lam * x)).mean()
    assert_allclose(base, c * np.sin(lam * x), rtol=0, atol=1e-10)
    assert_allclose(eval_wave(u, "e4", x), base, rtol=0, atol=1e-10)
    assert_allclose(eval_wave(u, "e5", x), -base, rtol=0, atol=1e-10)
    assert_allclose(eval_wave(u, "e6", x), -base, rtol=0, atol=1e-10)
    # middle edge, oriented v4 -> v3: cos and sin parts in closed form,
    # overall amplitude sin(lam)/sin(lam/2) = 2/sqrt(3) of the outer edges
    mid_closed = c * (-2 * np.sqrt(2.0) / 3 * np.cos(lam * x)
                      + 2.0 / 3 * np.sin(lam * x))
    assert_allclose(eval_wave(u, "e7", x), mid_closed, rtol=0, atol=1e-10)
    assert abs(vertex_trace(u, "e3", "v3")) == pytest.approx(1 / np.sqrt(3.0),
                                                             abs=1e-9)
    amp_outer = abs(c)
    amp_mid = np.hypot(*_cos_sin_coeffs(u, five_edge.edge_index("e7")))
    assert amp_mid / amp_outer == pytest.approx(2 / np.sqrt(3.0), abs=1e-9)


def _cos_sin_coeffs(u, m):
    a = (u.alpha[m] + u.beta[m]).real
    b = (1j * (u.alpha[m] - u.beta[m])).real
    return a, b


def test_eigenfunction_guards(double_edge):
    res = [p for p in find_spectral_points(double_edge, (3.0, 3.3, -1.5, 0.0))
           if p.kind == "Resonance"][0]
    with pytest.raises(NotEmbedded):
        eigenfunction(double_edge, res)
    deg = find_spectral_points(ring(2), (3.0, 3.3, -0.1, 0.0))[0]
    with pytest.raises(NotSimple):
        eigenfunction(ring(2), deg)


def test_generalized_eigenfunction_at_eigenvalue(double_edge):
    rep = generalized_eigenfunction_report(double_edge, np.pi, "l1")
    assert rep["singular"] is True
    assert rep["lead_discrepancy"] < 1e-9
    assert rep["edge_discrepancy"] < 1e-7
    x = np.linspace(0, 1, 9)
    closed = np.cos(np.pi * x) + 0.5j * np.sin(np.pi * x)
    for key in ("minimal", "extrapolated"):
        e = rep[key]
        assert_allclose(eval_wave(e, "e1", x), closed, rtol=0, atol=1e-8)
        assert_allclose(eval_wave(e, "e2", x), closed, rtol=0, atol=1e-8)
        assert_allclose(e.lead_in, [1.0, 0.0], rtol=0, atol=1e-10)
        assert_allclose(e.lead_out, [0.0, -1.0], rtol=0, atol=1e-8)


def test_generalized_eigenfunction_regular_point(double_edge):
    lam = 2.0
    rep = generalized_eigenfunction_report(double_edge, lam, "l2")
    assert rep["singular"] is False
    e = generalized_eigenfunction(double_edge, lam, "l2")
    S = scattering_matrix(double_edge, lam)
    assert_allclose(e.lead_out, S[:, 1], rtol=1e-10, atol=1e-12)
    with pytest.raises(OutOfRange):
        generalized_eigenfunction(double_edge, lam, "l2", gauge="other")


def test_secular_system_drive(double_edge):
    sys = build_secular(double_edge, incoming="l1")
    b = sys.rhs()
    assert b.shape == (sys.n,)
    assert np.count_nonzero(b) > 0
