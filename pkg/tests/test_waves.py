import numpy as np
import pytest
from numpy.testing import assert_allclose

from qgres import (
    DivergentLeadIntegral,
    EdgeWave,
    NotIncident,
    OutOfRange,
    boundary_sum,
    derivative,
    eval_wave,
    green_identity_defect,
    inner_product,
    norm,
    normal_derivative,
    validate_graph,
    vertex_trace,
)
from qgres.fixtures import half_line

ELL = 1.3


def one_edge():
    return validate_graph({
        "vertices": ["a", "b"],
        "edges": [{"id": "e", "ends": ["a", "b"], "length": ELL}],
        "leads": [],
    })


def wave(g, lam, alpha, beta, lead_in=(), lead_out=()):
    k = g.n_leads
    return EdgeWave(g, lam, [alpha], [beta],
                    list(lead_in) + [0] * (k - len(lead_in)),
                    list(lead_out) + [0] * (k - len(lead_out)))


def test_plane_wave_norm_squared_is_length():
    g = one_edge()
    w = wave(g, 2.7, 1.0, 0.0)
    assert_allclose(inner_product(w, w), ELL, rtol=1e-14)


def test_decaying_wave_closed_form():
    g = one_edge()
    lam = 2.0 + 0.35j
    w = wave(g, lam, 1.0, 0.0)
    expected = (1.0 - np.exp(-2 * 0.35 * ELL)) / (2 * 0.35)
    assert_allclose(inner_product(w, w), expected, rtol=1e-13)


def test_cos_and_sin_cross_integrals():
    g = one_edge()
    lam = 2.7
    c = wave(g, lam, 0.5, 0.5)                 # cos(lam x)
    s = wave(g, lam, -0.5j, 0.5j)              # sin(lam x)
    assert_allclose(inner_product(c, c),
                    ELL / 2 + np.sin(2 * lam * ELL) / (4 * lam), rtol=1e-13)
    assert_allclose(inner_product(c, s),
                    np.sin(lam * ELL) ** 2 / (2 * lam), rtol=1e-12, atol=1e-15)


def test_near_degenerate_exponent_is_continuous():
    # the cross integral switches to a series when the exponent underflows
    g = one_edge()
    w1 = wave(g, 3.0, 1.0, 0.0)
    w2 = wave(g, 3.0 + 1e-10, 1.0, 0.0)
    assert_allclose(inner_product(w1, w2), ELL, rtol=0, atol=1e-8)
    w3 = wave(g, 3.0 + 1e-5, 1.0, 0.0)
    z = 1j * 1e-5 * ELL  # exact value for exponent difference 1e-5
    assert_allclose(inner_product(w3, w1), (np.exp(z) - 1) / (1e-5 * 1j),
                    rtol=1e-9)


def test_lead_integral_converges_only_for_decay():
    g = half_line()
    lam = 1.5 + 0.25j
    out = EdgeWave(g, lam, [], [], [0.0], [1.0])
    full = np.ones(1)  # single lead weight
    assert_allclose(inner_product(out, out, weights=[1.0]),
                    1.0 / (2 * 0.25), rtol=1e-13)
    incoming = EdgeWave(g, lam, [], [], [1.0], [0.0])
    with pytest.raises(DivergentLeadIntegral):
        inner_product(incoming, incoming, weights=full)
    real_out = EdgeWave(g, 1.5, [], [], [0.0], [1.0])
    with pytest.raises(DivergentLeadIntegral):
        inner_product(real_out, real_out, weights=full)


def test_default_weights_ignore_leads():
    g = half_line()
    real_out = EdgeWave(g, 1.5, [], [], [0.0], [1.0])
    assert inner_product(real_out, real_out) == 0


def test_trace_and_normal_derivative_anchors():
    g = one_edge()
    lam = 2.5
    s = wave(g, lam, -0.5j, 0.5j)  # sin(lam x), x measured from vertex a
    assert_allclose(vertex_trace(s, "e", "a"), 0.0, atol=1e-15)
    assert_allclose(vertex_trace(s, "e", "b"), np.sin(lam * ELL), rtol=1e-14)
    assert_allclose(normal_derivative(s, "e", "a"), -lam, rtol=1e-14)
    assert_allclose(normal_derivative(s, "e", "b"),
                    lam * np.cos(lam * ELL), rtol=1e-13)


def test_lead_trace_and_normal_derivative():
    g = half_line()
    lam = 1.7
    w = EdgeWave(g, lam, [], [], [1.0], [0.5])
    assert_allclose(vertex_trace(w, "l1", "v1"), 1.5, rtol=1e-15)
    # -d/dx at x=0 of exp(-i lam x) + 0.5 exp(i lam x)
    assert_allclose(normal_derivative(w, "l1", "v1"), 1j * lam * (1 - 0.5),
                    rtol=1e-15)
    with pytest.raises(NotIncident):
        vertex_trace(w, "l1", "v9")


def test_eval_wave_bounds_and_derivative_consistency():
    g = one_edge()
    w = wave(g, 1.9 - 0.3j, 0.7, 0.4j)
    x = np.array([0.2, 0.9])
    h = 1e-6
    fd = (eval_wave(w, "e", x + h) - eval_wave(w, "e", x - h)) / (2 * h)
    assert_allclose(eval_wave(derivative(w), "e", x), fd, rtol=1e-8)
    with pytest.raises(OutOfRange):
        eval_wave(w, "e", ELL + 1e-6)
    with pytest.raises(OutOfRange):
        eval_wave(w, "e", -1e-6)


def test_green_identity_random_waves(five_edge, rng):
    for _ in range(10):
        lam_f = complex(*rng.uniform(0.5, 3, 2)) - 3j * rng.uniform(0, 1)
        lam_g = complex(*rng.uniform(0.5, 3, 2))
        m, k = five_edge.n_edges, five_edge.n_leads
        f = EdgeWave(five_edge, lam_f, rng.normal(size=m) + 1j * rng.normal(size=m),
                     rng.normal(size=m), np.zeros(k), np.zeros(k))
        g = EdgeWave(five_edge, lam_g, rng.normal(size=m),
                     rng.normal(size=m) + 1j * rng.normal(size=m),
                     np.zeros(k), np.zeros(k))
        scale = max(1.0, abs(lam_f) ** 2 * norm(f) * norm(g))
        assert green_identity_defect(f, g) <= 1e-10 * scale


def test_boundary_sum_groupings_agree(five_edge, rng):
    m, k = five_edge.n_edges, five_edge.n_leads
    f = EdgeWave(five_edge, 2.1 - 0.4j, rng.normal(size=m), rng.normal(size=m),
                 np.zeros(k), np.zeros(k))
    g = EdgeWave(five_edge, 1.3, rng.normal(size=m), rng.normal(size=m),
                 np.zeros(k), np.zeros(k))
    by_vertex = boundary_sum(f, g, group_by="vertex")
    by_edge = boundary_sum(f, g, group_by="edge")
    assert_allclose(by_vertex, by_edge, rtol=1e-12, atol=1e-12)
    with pytest.raises(OutOfRange):
        boundary_sum(f, g, group_by="corner")


def test_wave_algebra_guards():
    g = one_edge()
    w1 = wave(g, 2.0, 1.0, 0.0)
    w2 = wave(g, 2.5, 1.0, 0.0)
    with pytest.raises(OutOfRange):
        w1.plus(w2)
    z = EdgeWave.zero(g, 2.0)
    assert norm(w1.plus(z).plus(w1, -1.0)) == 0
    assert_allclose(norm(w1.scaled(2.0)), 2 * norm(w1), rtol=1e-14)
