"""Pointwise continuation of spectral points along a length family.

Each sample is an independent Newton solve on the perturbed secular
determinant, seeded by polynomial extrapolation of the previous samples.
There is no fallback that fabricates data: when Newton fails, jumps further
than the step cap, or crosses into the upper half plane, the trajectory is
truncated at that sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, NotSimple, OutOfRange, SolverError
from .fgr import FgrReport, second_order_model
from .graph import MetricGraph, PerturbationFamily, lengths_at
from .secular import (
    KIND_EMBEDDED,
    SpectralPoint,
    _newton,
    build_secular,
    eigenfunction,
    find_spectral_points,
)

STATUS_CONVERGED = "Converged"
STATUS_LOST = "LostTrack"

_CSV_HEADER = "t,re_lambda,im_lambda,re_model,im_model,residual"


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    lam: np.ndarray
    model: np.ndarray
    residual: np.ndarray
    status: tuple[str, ...]
    seed: complex
    step_cap: float

    def converged(self) -> np.ndarray:
        return np.array([s == STATUS_CONVERGED for s in self.status])

    def to_csv(self) -> str:
        """Converged samples only, 17 significant digits."""
        lines = [_CSV_HEADER]
        for i in range(self.t.size):
            if self.status[i] != STATUS_CONVERGED:
                continue
            row = (self.t[i], self.lam[i].real, self.lam[i].imag,
                   self.model[i].real, self.model[i].imag, self.residual[i])
            lines.append(",".join(f"{x:.17g}" for x in row))
        return "\n".join(lines) + "\n"


def _extrapolate(ts, zs, t):
    """Lagrange extrapolation through the last few samples."""
    k = min(3, len(ts))
    ts, zs = ts[-k:], zs[-k:]
    out = 0.0 + 0.0j
    for i in range(k):
        li = 1.0
        for j in range(k):
            if j != i:
                li *= (t - ts[j]) / (ts[i] - ts[j])
        out += zs[i] * li
    return out


def default_step_cap(g: MetricGraph, seed: complex, seed_tol: float = 1e-6) -> float:
    """Half the distance from the seed to the nearest other spectral point."""
    re0 = seed.real - 2.5
    re1 = seed.real + 2.5
    if re1 > 0:
        re0 = max(re0, 0.05)
    else:
        re1 = min(re1, -0.05)
    im0, im1 = seed.imag - 2.5, max(seed.imag, 0.0)
    if im1 <= im0:
        im1 = im0 + 1.0
    pts = find_spectral_points(g, (re0, re1, im0, im1), tol=1e-9)
    dists = [abs(p.lam - seed) for p in pts if abs(p.lam - seed) > seed_tol]
    return 0.5 * min(dists) if dists else 1.25


def track(g: MetricGraph, p: PerturbationFamily, seed, t_grid,
          tol: float = 1e-12, step_cap: float | None = None,
          report: FgrReport | None = None) -> Trajectory:
    """Follow one zero of the perturbed secular determinant over a t grid.

    The grid must contain t = 0 (the seed's parameter); continuation runs
    separately towards positive and negative t and is merged ascending.
    seed may be a SpectralPoint or a complex number.
    """
    seed_lam = complex(seed.lam) if isinstance(seed, SpectralPoint) else complex(seed)
    ts = np.unique(np.asarray(t_grid, dtype=float))
    if ts.size == 0 or np.abs(ts).min() > 1e-15:
        raise GridTooCoarse("t grid must contain 0")
    if step_cap is None:
        step_cap = default_step_cap(g, seed_lam)
    sys = build_secular(g)

    z0 = _newton(sys, seed_lam, g.lengths, tol)
    if z0 is None or abs(z0 - seed_lam) > max(1e-8, 1e3 * tol):
        raise SolverError(f"seed {seed_lam} does not polish to a determinant zero")

    def residual_at(z, lengths):
        mant, exp2 = sys.det_scaled(z, lengths)
        return float(abs(mant) * 2.0 ** exp2)

    def run(direction_ts):
        """Continue from t=0 along one direction; yields (t, lam, status)."""
        done_t = [0.0]
        done_z = [z0]
        out = []
        for t in direction_ts:
            lengths = lengths_at(p, g, t).lengths
            guess = _extrapolate(done_t, done_z, t)
            z = _newton(sys, guess, lengths, tol)
            ok = (z is not None
                  and abs(z - done_z[-1]) <= step_cap
                  and z.imag <= 1e-9)
            if not ok:
                out.append((t, complex(np.nan, np.nan), STATUS_LOST, np.nan))
                break
            out.append((t, z, STATUS_CONVERGED, residual_at(z, lengths)))
            done_t.append(t)
            done_z.append(z)
        return out

    pos = run([t for t in ts if t > 0])
    neg = run([t for t in reversed(ts) if t < 0])
    rows = sorted(
        neg + [(0.0, z0, STATUS_CONVERGED, residual_at(z0, g.lengths))] + pos,
        key=lambda r: r[0],
    )
    t_arr = np.array([r[0] for r in rows])
    lam_arr = np.array([r[1] for r in rows], dtype=complex)
    res_arr = np.array([r[3] for r in rows])
    status = tuple(r[2] for r in rows)
    if report is not None:
        model = np.asarray(second_order_model(report, t_arr), dtype=complex)
    else:
        model = np.full(t_arr.shape, complex(np.nan, np.nan))
    return Trajectory(t_arr, lam_arr, model, res_arr, status,
                      seed_lam, float(step_cap))


@dataclass(frozen=True)
class ModelComparison:
    max_re_residual_over_t2: float
    max_im_residual_over_t3: float
    richardson_im_ddot: float
    h_used: float
    n_samples: int

    def to_json_dict(self) -> dict:
        return {
            "max_re_residual_over_t2": self.max_re_residual_over_t2,
            "max_im_residual_over_t3": self.max_im_residual_over_t3,
            "richardson_im_ddot": self.richardson_im_ddot,
            "h_used": self.h_used,
            "n_samples": self.n_samples,
        }


def _sample_at(traj: Trajectory, t: float):
    i = np.argmin(np.abs(traj.t - t))
    if abs(traj.t[i] - t) > 1e-12 * max(1.0, abs(t)) or traj.status[i] != STATUS_CONVERGED:
        return None
    return traj.lam[i]


def compare_to_model(traj: Trajectory) -> ModelComparison:
    """Residuals of the second-order model and a Richardson check at 0.

    The real residual is weighted by t^-2 (the model carries no real
    curvature term), the imaginary one by t^-3. The second derivative of
    Im lambda at 0 is estimated with a centered stencil at the largest h for
    which +-h and +-h/2 are all on the grid, Richardson-combined.
    """
    ok = traj.converged() & np.isfinite(traj.model.real)
    nz = ok & (np.abs(traj.t) > 1e-15)
    if np.sum(nz) < 4:
        raise GridTooCoarse("need at least 4 nonzero converged samples")
    t = traj.t[nz]
    dif = traj.lam[nz] - traj.model[nz]
    re_ratio = float(np.max(np.abs(dif.real) / t ** 2))
    im_ratio = float(np.max(np.abs(dif.imag) / np.abs(t) ** 3))

    lam0 = _sample_at(traj, 0.0)
    if lam0 is None:
        raise GridTooCoarse("t = 0 sample missing or lost")
    h_used = None
    for h in sorted({abs(x) for x in t}, reverse=True):
        need = [h, -h, h / 2, -h / 2]
        if all(_sample_at(traj, x) is not None for x in need):
            h_used = h
            break
    if h_used is None:
        raise GridTooCoarse("no symmetric +-h, +-h/2 stencil on the grid")

    def second_diff(h):
        up = _sample_at(traj, h).imag
        dn = _sample_at(traj, -h).imag
        return (up - 2.0 * lam0.imag + dn) / h ** 2

    d1 = second_diff(h_used)
    d2 = second_diff(h_used / 2)
    rich = (4.0 * d2 - d1) / 3.0
    return ModelComparison(re_ratio, im_ratio, float(rich), float(h_used),
                           int(np.sum(nz)))


def _capped(g: MetricGraph, rho: float) -> MetricGraph:
    """Replace each lead by a finite edge of length rho to a fresh vertex.

    The summed-derivative condition at the new degree-1 vertex is a Neumann
    end, so the capped graph is the standard compact comparison graph.
    """
    doc = g.to_json_dict()
    for lead in g.leads:
        doc["vertices"].append(f"cap_v_{lead.id}")
        doc["edges"].append({
            "id": f"cap_e_{lead.id}",
            "ends": [lead.vertex, f"cap_v_{lead.id}"],
            "length": rho,
        })
    doc["leads"] = []
    from .graph import validate_graph

    return validate_graph(doc)


def eigenvalue_derivative_check(g: MetricGraph, edge_id: str, p_index: int,
                                rho: float = 1.0, h: float = 1e-4) -> dict:
    """Derivative of the p-th eigenvalue under stretching one edge.

    Leads (if any) are capped at length rho first. Along a_k(t) = t on the
    chosen edge, mu_p'(0) equals mu_p * ell_k * (a^2 + b^2) where
    a sin(lam x) + b cos(lam x) is the eigenfunction on that edge; this is
    compared against a Richardson finite difference of the tracked
    eigenvalue. Both must be nonnegative.
    """
    if p_index < 1:
        raise OutOfRange(f"eigenvalue index must be >= 1, got {p_index}")
    gc = _capped(g, rho) if g.n_leads else g
    k = gc.edge_index(edge_id)

    hi = 4.0
    pts = []
    for _ in range(9):
        pts = find_spectral_points(gc, (0.05, hi, -0.05, 0.0), tol=1e-11)
        if sum(q.multiplicity for q in pts) >= p_index:
            break
        hi *= 1.6
    count = 0
    target = None
    for q in pts:
        count += q.multiplicity
        if count >= p_index:
            target = q
            break
    if target is None:
        raise SolverError(f"could not locate eigenvalue #{p_index} below {hi}")
    if target.multiplicity != 1:
        raise NotSimple(f"eigenvalue #{p_index} at {target.lam} is degenerate")

    u = eigenfunction(gc, target)
    lam = target.lam.real
    mu = lam * lam
    b_cos = (u.alpha[k] + u.beta[k]).real
    a_sin = (1j * (u.alpha[k] - u.beta[k])).real
    analytic = mu * gc.edges[k].length * (a_sin ** 2 + b_cos ** 2)

    fam = PerturbationFamily("a", {edge_id: (0.0, 1.0)})
    sys = build_secular(gc)

    def mu_at(t):
        lengths = lengths_at(fam, gc, t).lengths
        z = _newton(sys, complex(lam), lengths, 1e-12)
        if z is None:
            raise SolverError(f"eigenvalue tracking failed at t={t}")
        return (z * z).real

    def slope(step):
        return (mu_at(step) - mu_at(-step)) / (2.0 * step)

    d1 = slope(h)
    d2 = slope(h / 2)
    fd = (4.0 * d2 - d1) / 3.0
    return {
        "eigenvalue": lam,
        "mu": mu,
        "edge_id": edge_id,
        "index": p_index,
        "analytic": float(analytic),
        "finite_difference": float(fd),
        "monotone": bool(analytic >= -1e-9 and fd >= -1e-9),
    }
