"""Quasimodes with controlled residual, both directions of the correspondence.

Forward: an eigenfunction of the unperturbed graph is carried onto the
perturbed graph by a shifted-cutoff surgery that keeps every vertex
condition exact; the L2 norm of -u'' - lambda0^2 u (supported in the cutoff
transition bands) is the quasimode quality epsilon, and a true resonance
must sit within epsilon^gamma of lambda0.

Converse: a resonant state with small |Im lambda| is truncated on the leads
to produce a quasimode for the selfadjoint problem, with residual controlled
by the distance |lambda - lambda0| and the outgoing lead amplitudes tied to
Im lambda through a flux identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NotIncident,
    NotOutgoing,
    NotSimple,
    OutOfRange,
    ResonanceTooDeep,
    SupportsOverlap,
)
from .graph import MetricGraph, PerturbationFamily, lengths_at
from .quadrature import gl_nodes
from .secular import KIND_EMBEDDED, SpectralPoint, find_spectral_points
from .waves import EdgeWave, _edge_cross, _int_exp


def _step(r: float):
    """C-infinity step on [0, 1] built from exp(-1/r): value, d/dr, d2/dr2.

    With w = 1/r - 1/(1-r) the step is h = 1/(1 + e^w); the derivatives are
    written through g = h (1 - h), which stays bounded, so nothing overflows
    near the endpoints.
    """
    if r <= 1e-3:
        return 0.0, 0.0, 0.0
    if r >= 1.0 - 1e-3:
        return 1.0, 0.0, 0.0
    w = 1.0 / r - 1.0 / (1.0 - r)
    if w > 700.0:
        return 0.0, 0.0, 0.0
    if w < -700.0:
        return 1.0, 0.0, 0.0
    w1 = -1.0 / r ** 2 - 1.0 / (1.0 - r) ** 2
    w2 = 2.0 / r ** 3 - 2.0 / (1.0 - r) ** 3
    h = 1.0 / (1.0 + math.exp(w))
    g = h * (1.0 - h)
    h1 = -w1 * g
    h2 = g * (w1 * w1 * (1.0 - 2.0 * h) - w2)
    return h, h1, h2


@dataclass(frozen=True)
class Cutoff:
    """Smooth plateau profile: rising or falling across [lo, hi]."""

    lo: float
    hi: float
    rising: bool

    def __call__(self, s: float):
        r = (s - self.lo) / (self.hi - self.lo)
        h, h1, h2 = _step(r)
        d = self.hi - self.lo
        if not self.rising:
            h, h1, h2 = 1.0 - h, -h1, -h2
        return h, h1 / d, h2 / (d * d)


# transition band of the edge surgery, in units of the edge length
_BAND_LO, _BAND_HI = 0.45, 0.55
_EDGE_FALL = Cutoff(_BAND_LO, _BAND_HI, rising=False)
_EDGE_RISE = Cutoff(_BAND_LO, _BAND_HI, rising=True)
# lead truncation in units of r: flat on [0, 1], gone beyond 1.9
_LEAD_FALL = Cutoff(1.0, 1.9, rising=False)


@dataclass(frozen=True)
class _Piece:
    """cut((x - shift)/scale) * (alpha e^{i lam y} + beta e^{-i lam y}),
    y = x - shift. cut None means identically one."""

    cut: Cutoff | None
    scale: float
    shift: float
    alpha: complex
    beta: complex
    lam: complex

    def _wave(self, x):
        y = x - self.shift
        w = self.alpha * np.exp(1j * self.lam * y) + self.beta * np.exp(-1j * self.lam * y)
        w1 = 1j * self.lam * (
            self.alpha * np.exp(1j * self.lam * y) - self.beta * np.exp(-1j * self.lam * y)
        )
        return w, w1

    def _cut3(self, x):
        if self.cut is None:
            one = np.ones_like(np.asarray(x, dtype=float))
            return one, 0.0 * one, 0.0 * one
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        c = np.empty(xs.shape)
        c1 = np.empty(xs.shape)
        c2 = np.empty(xs.shape)
        for i, xi in enumerate(xs):
            c[i], c1[i], c2[i] = self.cut((xi - self.shift) / self.scale)
        return c, c1 / self.scale, c2 / self.scale ** 2

    def value(self, x):
        w, _ = self._wave(x)
        c, _, _ = self._cut3(x)
        return c * w

    def deriv(self, x):
        w, w1 = self._wave(x)
        c, c1, _ = self._cut3(x)
        return c1 * w + c * w1

    def residual(self, x, lam0):
        """-(cut w)'' - lam0^2 cut w, using -w'' = lam^2 w."""
        w, w1 = self._wave(x)
        c, c1, c2 = self._cut3(x)
        return -c2 * w - 2.0 * c1 * w1 + c * (self.lam ** 2 - lam0 ** 2) * w

    def scaled(self, f: float) -> "_Piece":
        return _Piece(self.cut, self.scale, self.shift, f * self.alpha,
                      f * self.beta, self.lam)


@dataclass(frozen=True, eq=False)
class Quasimode:
    """Piecewise cutoff-times-wave function with unit L2 norm."""

    graph: MetricGraph
    lam0: float
    edge_pieces: tuple[tuple[_Piece, ...], ...]
    lead_pieces: tuple[tuple[_Piece, ...], ...]
    epsilon: float
    meta: dict = field(default_factory=dict)

    def _pieces(self, component_id: str):
        for i, e in enumerate(self.graph.edges):
            if e.id == component_id:
                return self.edge_pieces[i]
        for k, l in enumerate(self.graph.leads):
            if l.id == component_id:
                return self.lead_pieces[k]
        raise NotIncident(f"no edge or lead {component_id!r}")

    def eval(self, component_id: str, x):
        x = np.asarray(x, dtype=float)
        return sum(p.value(x) for p in self._pieces(component_id))

    def eval_deriv(self, component_id: str, x):
        x = np.asarray(x, dtype=float)
        return sum(p.deriv(x) for p in self._pieces(component_id))

    def residual_value(self, component_id: str, x):
        """-u'' - lam0^2 u at x, from the closed-form piece derivatives."""
        x = np.asarray(x, dtype=float)
        return sum(p.residual(x, self.lam0) for p in self._pieces(component_id))


def _l2_on(pieces, a, b, f, n=128):
    """Integral of |sum of piece f-values|^2 over [a, b] by Gauss-Legendre."""
    if b <= a:
        return 0.0
    x, w = gl_nodes(a, b, n)
    vals = sum(f(p, x) for p in pieces)
    return float(np.sum(w * np.abs(vals) ** 2))


def _piece_norm2_smooth(pieces, length):
    """L2 norm^2 over [0, length] by composite quadrature (panels <= 0.5)."""
    panels = max(1, int(np.ceil(length / 0.5)))
    edges = np.linspace(0.0, length, panels + 1)
    return sum(
        _l2_on(pieces, lo, hi, lambda p, x: p.value(x), n=64)
        for lo, hi in zip(edges[:-1], edges[1:])
    )


def build_shifted_quasimode(g: MetricGraph, p: PerturbationFamily, t: float,
                            pair) -> Quasimode:
    """Carry an eigenpair of g onto the perturbed graph at parameter t.

    pair is (lambda0, u0) with u0 an eigenfunction on g. On each edge the
    new function is chi0(x/ell) u0(x) + chi1((x - d)/ell) u0(x - d) with
    d the length change, so values and derivatives at both vertices are
    exactly those of u0 and all vertex conditions carry over. The residual
    lives in the transition bands; epsilon is its L2 norm after the whole
    function is renormalized.
    """
    lam0, u0 = pair
    lam0 = float(lam0)
    if u0.max_lead_amplitude() > 1e-7:
        raise NotOutgoing("u0 must vanish on the leads")
    g_t = lengths_at(p, g, t)
    ell0 = g.lengths
    delta = g_t.lengths - ell0

    edge_pieces = []
    for m in range(g.n_edges):
        if _BAND_LO * ell0[m] + min(delta[m], 0.0) <= 0.005 * ell0[m]:
            raise SupportsOverlap(
                f"length change {delta[m]:.3g} on edge {g.edges[m].id!r} "
                f"pushes the shifted band out of the edge"
            )
        p1 = _Piece(_EDGE_FALL, ell0[m], 0.0, complex(u0.alpha[m]),
                    complex(u0.beta[m]), lam0)
        p2 = _Piece(_EDGE_RISE, ell0[m], delta[m], complex(u0.alpha[m]),
                    complex(u0.beta[m]), lam0)
        edge_pieces.append((p1, p2))

    # residual bands: [lo, hi] on each edge (union of both transition bands)
    eps2 = 0.0
    for m, pieces in enumerate(edge_pieces):
        b1 = (_BAND_LO * ell0[m], _BAND_HI * ell0[m])
        b2 = (b1[0] + delta[m], b1[1] + delta[m])
        f = lambda p, x: p.residual(x, lam0)
        if b1[1] < b2[0] or b2[1] < b1[0]:
            eps2 += _l2_on(pieces, *b1, f) + _l2_on(pieces, *b2, f)
        else:
            eps2 += _l2_on(pieces, min(b1[0], b2[0]), max(b1[1], b2[1]), f)

    norm2 = sum(
        _piece_norm2_smooth(pieces, g_t.lengths[m])
        for m, pieces in enumerate(edge_pieces)
    )
    nrm = float(np.sqrt(norm2))
    edge_pieces = tuple(tuple(q.scaled(1.0 / nrm) for q in pieces)
                        for pieces in edge_pieces)
    eps = float(np.sqrt(eps2)) / nrm
    meta = {
        "t": t,
        "delta": tuple(float(d) for d in delta),
        "raw_norm": nrm,
        "c_observed": eps / abs(t) if t != 0.0 else None,
    }
    return Quasimode(g_t, lam0, edge_pieces,
                     tuple(() for _ in range(g.n_leads)), eps, meta)


def check_resonance_proximity(g: MetricGraph, lam0: float, eps: float,
                              gamma: float = 0.9, tol: float = 1e-10) -> dict:
    """Is there a spectral point within eps^gamma of lam0?

    Searches a slightly larger window below the real axis and reports the
    nearest point as witness.
    """
    if not (0.0 < gamma <= 1.0):
        raise OutOfRange(f"gamma must be in (0, 1], got {gamma}")
    if eps <= 0.0:
        raise OutOfRange("eps must be positive")
    radius = eps ** gamma
    re0 = max(0.05, lam0 - 1.2 * radius)
    re1 = lam0 + 1.2 * radius
    im0 = -1.2 * radius
    pts = find_spectral_points(g, (re0, re1, im0, 0.0), tol=tol)
    if not pts:
        return {"holds": False, "radius": radius, "distance": float("inf"),
                "witness": None}
    best = min(pts, key=lambda q: abs(q.lam - lam0))
    dist = float(abs(best.lam - lam0))
    return {"holds": dist <= radius, "radius": radius, "distance": dist,
            "witness": best}


def quasimode_from_resonance(g: MetricGraph, sp: SpectralPoint, r: float = 0.5,
                             lambda0: float | None = None,
                             delta: float = 1.0) -> Quasimode:
    """Truncate a resonant state on the leads into a quasimode.

    The resonance must be simple, outgoing and within delta/2 of lambda0
    (default: its own real part). The residual has two sources: the energy
    mismatch (lambda^2 - lambda0^2) v everywhere, and the cutoff commutator
    on the leads; meta records the observed constant
    epsilon / (|lambda - lambda0| (lambda0 + |lambda - lambda0|)) and both
    sides of the flux identity
    sum_k |a_k|^2 = 2 |Im lambda| ||v||^2_{edges}.
    """
    if r <= 0.0:
        raise OutOfRange(f"r must be positive, got {r}")
    if sp.multiplicity != 1:
        raise NotSimple(f"resonance {sp.lam} has multiplicity {sp.multiplicity}")
    if sp.lam.imag > 1e-9:
        raise NotOutgoing(f"{sp.lam} lies in the upper half plane")
    v = sp.kernel_basis[0]
    if np.abs(v.lead_in).max(initial=0.0) > 1e-10:
        raise NotOutgoing("kernel vector carries incoming lead amplitudes")
    lam = complex(sp.lam)
    lam0 = float(lambda0) if lambda0 is not None else float(lam.real)
    eps_dist = abs(lam - lam0)
    if lam0 <= delta:
        raise ResonanceTooDeep(f"lambda0 = {lam0} must exceed delta = {delta}")
    if eps_dist >= 0.5 * delta:
        raise ResonanceTooDeep(
            f"|lambda - lambda0| = {eps_dist:.3g} is not below delta/2 = {0.5 * delta:.3g}"
        )

    edge_pieces = tuple(
        (_Piece(None, 1.0, 0.0, complex(v.alpha[m]), complex(v.beta[m]), lam),)
        for m in range(g.n_edges)
    )
    lead_pieces = tuple(
        (_Piece(_LEAD_FALL, r, 0.0, complex(v.lead_out[k]), 0.0, lam),)
        for k in range(g.n_leads)
    )

    # norms: edges in closed form, leads flat part closed + band by quadrature
    edge_norm2 = 0.0
    for m, e in enumerate(g.edges):
        edge_norm2 += _edge_cross(v.alpha[m], v.beta[m], lam,
                                  v.alpha[m], v.beta[m], lam, e.length).real
    lead_norm2 = 0.0
    for k in range(g.n_leads):
        c = v.lead_out[k]
        lead_norm2 += (abs(c) ** 2 * _int_exp(lam - np.conj(lam), r)).real
        lead_norm2 += _l2_on(lead_pieces[k], r, 1.9 * r,
                             lambda p, x: p.value(x), n=64)
    norm2 = edge_norm2 + lead_norm2

    mism = abs(lam * lam - lam0 * lam0) ** 2
    res2 = mism * edge_norm2
    for k in range(g.n_leads):
        c = v.lead_out[k]
        res2 += mism * (abs(c) ** 2 * _int_exp(lam - np.conj(lam), r)).real
        res2 += _l2_on(lead_pieces[k], r, 1.9 * r,
                       lambda p, x: p.residual(x, lam0), n=128)

    nrm = float(np.sqrt(norm2))
    eps = float(np.sqrt(res2)) / nrm
    flux_lhs = float(np.sum(np.abs(v.lead_out) ** 2))
    flux_rhs = float(2.0 * abs(lam.imag) * edge_norm2)
    meta = {
        "lambda": lam,
        "eps_distance": float(eps_dist),
        "r": r,
        "delta": delta,
        "c0_observed": (eps / (eps_dist * (lam0 + eps_dist))
                        if eps_dist > 0 else None),
        "flux_lhs": flux_lhs,
        "flux_rhs": flux_rhs,
        "raw_norm": nrm,
    }
    return Quasimode(
        g, lam0,
        tuple(tuple(q.scaled(1.0 / nrm) for q in pieces) for pieces in edge_pieces),
        tuple(tuple(q.scaled(1.0 / nrm) for q in pieces) for pieces in lead_pieces),
        eps, meta,
    )
