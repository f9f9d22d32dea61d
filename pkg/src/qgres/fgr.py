"""Perturbative response of an embedded eigenvalue to edge-length changes.

First order: the eigenvalue derivative of z = lambda^2 along the family,
from the eigenfunction alone. Second order: the imaginary part of the
second derivative of lambda(t), a golden-rule sum of squared coupling
coefficients, one per lead, built from the eigenfunction and the scattering
solutions at the same energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotEmbedded, NotSimple
from .graph import MetricGraph
from .secular import build_secular, generalized_eigenfunction_report
from .waves import EdgeWave, inner_product, normal_derivative, vertex_trace

_PI = np.pi


def _boundary_pairs(g: MetricGraph):
    """(vertex, edge) incidences of all finite edges, vertex-grouped."""
    for v in g.vertices:
        for inc in g.incidence[v]:
            if inc.kind == "edge":
                yield v, g.edges[inc.index].id, inc.index


def z_dot(g: MetricGraph, u: EdgeWave, adot) -> tuple[float, float]:
    """(d/dt) lambda^2 and (d/dt) lambda at t = 0 for the rates adot.

    For a real normalized eigenfunction both are real; the imaginary residue
    of the raw expression is solver noise and is discarded here (the report
    from fgr_coefficients keeps it as a diagnostic).
    """
    adot = np.asarray(adot, dtype=float)
    lam = u.lam.real
    zd = 2.0 * lam * lam * inner_product(u, u, weights=adot)
    for v, eid, m in _boundary_pairs(g):
        if adot[m] == 0.0:
            continue
        zd += adot[m] * normal_derivative(u, eid, v) * vertex_trace(u, eid, v)
    return float(zd.real), float(zd.real / (2.0 * lam))


@dataclass(frozen=True)
class FgrReport:
    lam: float
    lead_ids: tuple[str, ...]
    coefficients: tuple[complex, ...]
    volume_terms: tuple[complex, ...]
    boundary_terms: tuple[complex, ...]
    z_dot: float
    lambda_dot: float
    im_lambda_ddot: float
    z_dot_imag_residue: float
    boundary_vanishes: bool
    gauge: str
    conjugate_boundary: bool
    lead_gauge_discrepancy: float

    def to_json_dict(self) -> dict:
        c2 = lambda z: [z.real, z.imag]
        return {
            "lambda": self.lam,
            "lead_ids": list(self.lead_ids),
            "coefficients": [c2(z) for z in self.coefficients],
            "volume_terms": [c2(z) for z in self.volume_terms],
            "boundary_terms": [c2(z) for z in self.boundary_terms],
            "z_dot": self.z_dot,
            "lambda_dot": self.lambda_dot,
            "im_lambda_ddot": self.im_lambda_ddot,
            "z_dot_imag_residue": self.z_dot_imag_residue,
            "boundary_vanishes": self.boundary_vanishes,
            "gauge": self.gauge,
            "conjugate_boundary": self.conjugate_boundary,
            "lead_gauge_discrepancy": self.lead_gauge_discrepancy,
        }


def _common_trace(w: EdgeWave, vertex: str) -> complex:
    """Vertex value as the mean over incident components (they agree up to
    solver tolerance for any admissible wave)."""
    g = w.graph
    vals = []
    for inc in g.incidence[vertex]:
        cid = g.edges[inc.index].id if inc.kind == "edge" else g.leads[inc.index].id
        vals.append(vertex_trace(w, cid, vertex))
    return complex(np.mean(vals))


def fgr_coefficients(g: MetricGraph, lam: float, u: EdgeWave, adot,
                     gauge: str = "extrapolated",
                     conjugate_boundary: bool = True) -> FgrReport:
    """Golden-rule coupling coefficients F_k and Im lambda-ddot = -sum |F_k|^2.

    Per lead k, with e the unit-incoming scattering solution on that lead:

        F_k = lam <adot u, e>
              + (1/lam) sum_v sum_{edges m at v} (1/4) adot_m
                  (3 dnu u_m(v) conj(e(v)) - u(v) conj(dnu e_m(v)))

    conjugate_boundary=False drops the conjugations on the e factors in the
    boundary sum (the alternative reading; kept for comparison).
    """
    adot = np.asarray(adot, dtype=float)
    if adot.shape != (g.n_edges,):
        raise NotEmbedded(f"adot must have {g.n_edges} entries")
    if abs(u.lam.imag) > 1e-9:
        raise NotEmbedded(f"lambda = {u.lam} is not real")
    if u.max_lead_amplitude() > 1e-7:
        raise NotEmbedded("wave has nonvanishing lead amplitudes")
    lam = float(lam)
    sys = build_secular(g)
    s = np.linalg.svd(sys.matrix(lam), compute_uv=False)
    if int(np.sum(s <= 1e-8 * s[0])) != 1:
        raise NotSimple(f"eigenvalue {lam} is not simple")

    zd, ld = z_dot(g, u, adot)
    zd_full = 2.0 * lam * lam * inner_product(u, u, weights=adot)
    for v, eid, m in _boundary_pairs(g):
        if adot[m] != 0.0:
            zd_full += adot[m] * normal_derivative(u, eid, v) * vertex_trace(u, eid, v)

    volume, boundary, coeffs = [], [], []
    lead_disc = 0.0
    for lead in g.leads:
        rep = generalized_eigenfunction_report(g, lam, lead.id)
        e = rep[gauge]
        lead_disc = max(lead_disc, rep["lead_discrepancy"])
        vol = lam * inner_product(u, e, weights=adot)
        bnd = 0.0 + 0.0j
        for v, eid, m in _boundary_pairs(g):
            if adot[m] == 0.0:
                continue
            ev = _common_trace(e, v)
            dev = normal_derivative(e, eid, v)
            if conjugate_boundary:
                ev, dev = np.conj(ev), np.conj(dev)
            bnd += 0.25 * adot[m] * (
                3.0 * normal_derivative(u, eid, v) * ev
                - vertex_trace(u, eid, v) * dev
            )
        bnd = bnd / lam
        volume.append(complex(vol))
        boundary.append(complex(bnd))
        coeffs.append(complex(vol + bnd))

    im_dd = -float(sum(abs(f) ** 2 for f in coeffs))
    ells = g.lengths
    frac = np.remainder(lam * ells, _PI)
    vanishes = bool(np.all(np.minimum(frac, _PI - frac) <= 1e-10))
    return FgrReport(
        lam=lam,
        lead_ids=tuple(l.id for l in g.leads),
        coefficients=tuple(coeffs),
        volume_terms=tuple(volume),
        boundary_terms=tuple(boundary),
        z_dot=zd,
        lambda_dot=ld,
        im_lambda_ddot=im_dd,
        z_dot_imag_residue=float(zd_full.imag),
        boundary_vanishes=vanishes,
        gauge=gauge,
        conjugate_boundary=conjugate_boundary,
        lead_gauge_discrepancy=float(lead_disc),
    )


def second_order_model(report: FgrReport, t):
    """lambda(t) to second order: lam + t lam-dot + (i/2) t^2 Im lam-ddot."""
    t = np.asarray(t, dtype=float)
    return (report.lam + t * report.lambda_dot
            + 0.5j * t * t * report.im_lambda_ddot)
