"""Exponential waves on a metric graph and their exact integrals.

A wave is alpha e^{i lam x} + beta e^{-i lam x} on each finite edge and
c_in e^{-i lam x} + c_out e^{i lam x} on each lead. Everything downstream
(eigenfunctions, scattering solutions, resonant states) is one of these, so
inner products and Green-identity bookkeeping are done in closed form here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergentLeadIntegral, NotIncident, OutOfRange
from .graph import MetricGraph

# Below this, e^{i mu ell} - 1 loses digits to cancellation; switch to the
# Taylor form of the integral.
_DEGENERATE = 1e-8


@dataclass(frozen=True, eq=False)
class EdgeWave:
    graph: MetricGraph
    lam: complex
    alpha: np.ndarray
    beta: np.ndarray
    lead_in: np.ndarray
    lead_out: np.ndarray

    def __post_init__(self):
        m, k = self.graph.n_edges, self.graph.n_leads
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=complex).reshape(m))
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=complex).reshape(m))
        object.__setattr__(self, "lead_in", np.asarray(self.lead_in, dtype=complex).reshape(k))
        object.__setattr__(self, "lead_out", np.asarray(self.lead_out, dtype=complex).reshape(k))

    @classmethod
    def zero(cls, graph: MetricGraph, lam: complex) -> "EdgeWave":
        m, k = graph.n_edges, graph.n_leads
        return cls(graph, complex(lam), np.zeros(m, complex), np.zeros(m, complex),
                   np.zeros(k, complex), np.zeros(k, complex))

    def scaled(self, c: complex) -> "EdgeWave":
        return EdgeWave(self.graph, self.lam, c * self.alpha, c * self.beta,
                        c * self.lead_in, c * self.lead_out)

    def plus(self, other: "EdgeWave", c: complex = 1.0) -> "EdgeWave":
        if other.graph is not self.graph and other.graph != self.graph:
            raise NotIncident("waves live on different graphs")
        if abs(other.lam - self.lam) > 1e-12 * max(1.0, abs(self.lam)):
            raise OutOfRange("cannot combine waves at different lambda")
        return EdgeWave(self.graph, self.lam,
                        self.alpha + c * other.alpha, self.beta + c * other.beta,
                        self.lead_in + c * other.lead_in, self.lead_out + c * other.lead_out)

    def max_lead_amplitude(self) -> float:
        if self.graph.n_leads == 0:
            return 0.0
        return float(max(np.abs(self.lead_in).max(initial=0.0),
                         np.abs(self.lead_out).max(initial=0.0)))


def derivative(w: EdgeWave) -> EdgeWave:
    il = 1j * w.lam
    return EdgeWave(w.graph, w.lam, il * w.alpha, -il * w.beta,
                    -il * w.lead_in, il * w.lead_out)


def _resolve(w: EdgeWave, component_id: str):
    g = w.graph
    for i, e in enumerate(g.edges):
        if e.id == component_id:
            return "edge", i
    for k, l in enumerate(g.leads):
        if l.id == component_id:
            return "lead", k
    raise NotIncident(f"no edge or lead {component_id!r}")


def eval_wave(w: EdgeWave, component_id: str, x):
    """Wave values on one component; x in [0, length] (edges) or x >= 0 (leads)."""
    kind, i = _resolve(w, component_id)
    x = np.asarray(x, dtype=float)
    if kind == "edge":
        ell = w.graph.edges[i].length
        if np.any(x < -1e-12) or np.any(x > ell + 1e-12):
            raise OutOfRange(f"x outside [0, {ell}] on {component_id!r}")
        return w.alpha[i] * np.exp(1j * w.lam * x) + w.beta[i] * np.exp(-1j * w.lam * x)
    if np.any(x < -1e-12):
        raise OutOfRange(f"x < 0 on lead {component_id!r}")
    return w.lead_in[i] * np.exp(-1j * w.lam * x) + w.lead_out[i] * np.exp(1j * w.lam * x)


def vertex_trace(w: EdgeWave, component_id: str, vertex: str) -> complex:
    kind, i = _resolve(w, component_id)
    g = w.graph
    if kind == "edge":
        e = g.edges[i]
        if vertex == e.ends[0]:
            return complex(w.alpha[i] + w.beta[i])
        if vertex == e.ends[1]:
            ph = np.exp(1j * w.lam * e.length)
            return complex(w.alpha[i] * ph + w.beta[i] / ph)
        raise NotIncident(f"edge {component_id!r} does not meet {vertex!r}")
    if vertex != g.leads[i].vertex:
        raise NotIncident(f"lead {component_id!r} does not meet {vertex!r}")
    return complex(w.lead_in[i] + w.lead_out[i])


def normal_derivative(w: EdgeWave, component_id: str, vertex: str) -> complex:
    """Derivative into the component at the vertex: -u'(0) or u'(length)."""
    kind, i = _resolve(w, component_id)
    g = w.graph
    il = 1j * w.lam
    if kind == "edge":
        e = g.edges[i]
        if vertex == e.ends[0]:
            return complex(-il * (w.alpha[i] - w.beta[i]))
        if vertex == e.ends[1]:
            ph = np.exp(1j * w.lam * e.length)
            return complex(il * (w.alpha[i] * ph - w.beta[i] / ph))
        raise NotIncident(f"edge {component_id!r} does not meet {vertex!r}")
    if vertex != g.leads[i].vertex:
        raise NotIncident(f"lead {component_id!r} does not meet {vertex!r}")
    return complex(il * (w.lead_in[i] - w.lead_out[i]))


def _int_exp(mu: complex, ell: float) -> complex:
    """Integral of e^{i mu x} over [0, ell], stable as mu -> 0."""
    z = 1j * mu * ell
    if abs(z) < _DEGENERATE:
        return ell * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0)
    return (np.exp(z) - 1.0) / (1j * mu)


def _edge_cross(a1, b1, l1, a2, b2, l2, ell) -> complex:
    """Integral over [0, ell] of (a1 e^{i l1 x} + b1 e^{-i l1 x}) conj(...)."""
    l2c = np.conj(l2)
    a2c, b2c = np.conj(a2), np.conj(b2)
    out = 0.0 + 0.0j
    if a1 != 0:
        if a2c != 0:
            out += a1 * a2c * _int_exp(l1 - l2c, ell)
        if b2c != 0:
            out += a1 * b2c * _int_exp(l1 + l2c, ell)
    if b1 != 0:
        if a2c != 0:
            out += b1 * a2c * _int_exp(-(l1 + l2c), ell)
        if b2c != 0:
            out += b1 * b2c * _int_exp(-(l1 - l2c), ell)
    return out


def _lead_cross(in1, out1, l1, in2, out2, l2, lead_id) -> complex:
    l2c = np.conj(l2)
    terms = (
        (out1 * np.conj(out2), l1 - l2c),
        (out1 * np.conj(in2), l1 + l2c),
        (in1 * np.conj(out2), -(l1 + l2c)),
        (in1 * np.conj(in2), -(l1 - l2c)),
    )
    total = 0.0 + 0.0j
    for coef, mu in terms:
        if coef == 0:
            continue
        if mu.imag <= 0:
            raise DivergentLeadIntegral(
                f"lead {lead_id!r} integral diverges (Im mu = {mu.imag:g})"
            )
        total += coef * (1j / mu)
    return total


def inner_product(w1: EdgeWave, w2: EdgeWave, weights=None) -> complex:
    """Weighted L2 pairing, second slot conjugated, in closed form.

    weights has one real entry per finite edge, optionally followed by one
    per lead; missing lead entries mean weight 0 there. Default is the plain
    L2 product over the compact core.
    """
    g = w1.graph
    if w2.graph is not g and w2.graph != g:
        raise NotIncident("waves live on different graphs")
    m, k = g.n_edges, g.n_leads
    if weights is None:
        wts = np.ones(m + k)
        wts[m:] = 0.0
    else:
        wts = np.zeros(m + k)
        arr = np.asarray(weights, dtype=float).ravel()
        if arr.size not in (m, m + k):
            raise OutOfRange(f"weights must have {m} or {m + k} entries")
        wts[: arr.size] = arr
    total = 0.0 + 0.0j
    for i, e in enumerate(g.edges):
        if wts[i] == 0:
            continue
        total += wts[i] * _edge_cross(
            w1.alpha[i], w1.beta[i], w1.lam, w2.alpha[i], w2.beta[i], w2.lam, e.length
        )
    for j, l in enumerate(g.leads):
        if wts[m + j] == 0:
            continue
        total += wts[m + j] * _lead_cross(
            w1.lead_in[j], w1.lead_out[j], w1.lam,
            w2.lead_in[j], w2.lead_out[j], w2.lam, l.id
        )
    return complex(total)


def norm(w: EdgeWave, weights=None) -> float:
    """L2 norm over the compact core (or the weighted region)."""
    val = inner_product(w, w, weights)
    return float(np.sqrt(max(val.real, 0.0)))


def boundary_sum(f: EdgeWave, g: EdgeWave, group_by: str = "vertex") -> complex:
    """Sum of normal-derivative boundary terms of the Green identity.

    Accumulates d_nu f_m(v) * conj(g_m(v)) over every (finite edge, endpoint)
    pair, grouped either vertex-by-vertex or edge-by-edge. The two groupings
    enumerate the same terms, so they must agree exactly up to summation
    order.
    """
    gr = f.graph
    total = 0.0 + 0.0j
    if group_by == "vertex":
        for v in gr.vertices:
            for inc in gr.incidence[v]:
                if inc.kind != "edge":
                    continue
                eid = gr.edges[inc.index].id
                total += normal_derivative(f, eid, v) * np.conj(vertex_trace(g, eid, v))
    elif group_by == "edge":
        for e in gr.edges:
            for v in e.ends:
                total += normal_derivative(f, e.id, v) * np.conj(vertex_trace(g, e.id, v))
    else:
        raise OutOfRange(f"group_by must be 'vertex' or 'edge', got {group_by!r}")
    return total


def green_identity_defect(f: EdgeWave, g: EdgeWave) -> float:
    """|<-f'', g> - (<f', g'> - boundary)| over the compact core.

    Since -f'' = lam_f^2 f edgewise this is a consistency check of traces,
    normal derivatives and the closed-form integrals against one another.
    """
    lhs = f.lam * f.lam * inner_product(f, g)
    rhs = inner_product(derivative(f), derivative(g)) - boundary_sum(f, g)
    return abs(lhs - rhs)
