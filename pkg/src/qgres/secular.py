"""Secular system, spectral search, scattering and generalized eigenfunctions.

The vertex conditions (continuity plus a zero sum of normal derivatives at
every vertex) applied to an exponential-wave ansatz give a square linear
system M(lam) c = 0 of size 2 * n_edges + n_leads, with outgoing lead
amplitudes among the unknowns. Eigenvalues and resonances are the zeros of
det M(lam); scattering columns solve the same system with a unit incoming
wave moved to the right-hand side.

Every entry of M is a constant or const * exp(i lam (+/- ell_m)), so the
matrix and its lambda-derivative share one compiled term list (DetKernel).
Kirchhoff rows are divided by lambda, which removes the spurious zero of the
raw determinant at lam = 0 but leaves a structural feature there; search
windows must exclude the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ContourThroughZero,
    InvalidWindow,
    OutOfRange,
    MaxDepthExceeded,
    NotEmbedded,
    NotSimple,
    SingularInconsistent,
)
from .graph import MetricGraph
from .kernel import DetKernel
from .quadrature import gl_nodes
from .waves import EdgeWave, inner_product, norm

KIND_EMBEDDED = "EmbeddedEigenvalue"
KIND_REAL_RESONANCE = "RealResonance"
KIND_RESONANCE = "Resonance"

# lead amplitudes below this (for a unit kernel vector) count as zero when
# deciding embedded vs not
_LEAD_AMP_TOL = 1e-8

_MAX_DEPTH = 48
_CUTS = ((0.5, 0.5), (0.55, 0.45), (0.45, 0.55), (0.6, 0.45), (0.45, 0.6), (0.52, 0.57))


def _compile(g: MetricGraph):
    m = g.n_edges
    rows, cols, coefs, edges, signs = [], [], [], [], []
    drive = [[] for _ in range(g.n_leads)]

    def trace_terms(inc):
        if inc.kind == "edge":
            i = inc.index
            if inc.end == 0:
                return [(2 * i, 1 + 0j, -1, 0), (2 * i + 1, 1 + 0j, -1, 0)]
            return [(2 * i, 1 + 0j, i, 1), (2 * i + 1, 1 + 0j, i, -1)]
        return [(2 * m + inc.index, 1 + 0j, -1, 0)]

    def dnu_terms(inc):
        # normal derivative divided by lambda, so rows stay entire at lam = 0
        if inc.kind == "edge":
            i = inc.index
            if inc.end == 0:
                return [(2 * i, -1j, -1, 0), (2 * i + 1, 1j, -1, 0)]
            return [(2 * i, 1j, i, 1), (2 * i + 1, -1j, i, -1)]
        return [(2 * m + inc.index, -1j, -1, 0)]

    def emit(row, terms, flip=False):
        for col, coef, ei, s in terms:
            rows.append(row)
            cols.append(col)
            coefs.append(-coef if flip else coef)
            edges.append(ei)
            signs.append(s)

    row = 0
    for v in g.vertices:
        incs = g.incidence[v]
        if not incs:
            continue
        for a, b in zip(incs[:-1], incs[1:]):
            emit(row, trace_terms(a))
            emit(row, trace_terms(b), flip=True)
            if a.kind == "lead":
                drive[a.index].append((row, 1 + 0j))
            if b.kind == "lead":
                drive[b.index].append((row, -1 + 0j))
            row += 1
        for inc in incs:
            emit(row, dnu_terms(inc))
            if inc.kind == "lead":
                drive[inc.index].append((row, 1j))
        row += 1
    n = 2 * m + g.n_leads
    assert row == n, "row count must equal unknown count"
    kernel = DetKernel(n, rows, cols, coefs, edges, signs)
    return kernel, tuple(tuple(d) for d in drive)


class SecularSystem:
    """Compiled vertex-condition system of one graph topology.

    Lengths default to the graph's but can be overridden per evaluation, so
    one instance serves a whole perturbation family.
    """

    def __init__(self, graph: MetricGraph, lam=None, incoming=None):
        self.graph = graph
        self.kernel, self._drive = _compile(graph)
        self.n = self.kernel.n
        self.lam = lam
        self.incoming = incoming
        self._lengths = graph.lengths

    def _len(self, lengths):
        return self._lengths if lengths is None else np.asarray(lengths, float)

    def matrix(self, lam=None, lengths=None) -> np.ndarray:
        lam = self.lam if lam is None else lam
        return self.kernel.matrix(lam, self._len(lengths))

    def matrix_deriv(self, lam=None, lengths=None) -> np.ndarray:
        lam = self.lam if lam is None else lam
        return self.kernel.matrix_deriv(lam, self._len(lengths))

    def rhs(self, lead_id=None) -> np.ndarray:
        """Right-hand side for a unit incoming wave (lambda-independent)."""
        if lead_id is None:
            lead_id = self.incoming
        k = self.graph.lead_index(lead_id)
        b = np.zeros(self.n, dtype=complex)
        for row, coef in self._drive[k]:
            b[row] -= coef
        return b

    def det_scaled(self, lam, lengths=None):
        mant, exp2 = self.kernel.det_scaled_many([lam], self._len(lengths))
        return complex(mant[0]), int(exp2[0])

    def det(self, lam, lengths=None) -> complex:
        mant, exp2 = self.det_scaled(lam, lengths)
        return mant * 2.0 ** exp2

    def logderiv(self, lam, lengths=None) -> complex:
        return complex(self.kernel.logderiv_many([lam], self._len(lengths))[0])

    def logderiv_many(self, lams, lengths=None) -> np.ndarray:
        return self.kernel.logderiv_many(lams, self._len(lengths))


def build_secular(g: MetricGraph, lam=None, incoming=None) -> SecularSystem:
    return SecularSystem(g, lam=lam, incoming=incoming)


def det_secular(g: MetricGraph, lam) -> complex:
    return build_secular(g).det(lam)


@dataclass(frozen=True, eq=False)
class SpectralPoint:
    lam: complex
    multiplicity: int
    kind: str
    residual: float
    kernel_basis: tuple[EdgeWave, ...]

    def to_json_dict(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "multiplicity": self.multiplicity,
            "kind": self.kind,
            "residual": self.residual,
        }


def _wave_from_vector(g: MetricGraph, lam, v) -> EdgeWave:
    m, k = g.n_edges, g.n_leads
    return EdgeWave(g, lam, v[0 : 2 * m : 2], v[1 : 2 * m : 2],
                    np.zeros(k, complex), v[2 * m :])


def _side_integral(sys, a, b, lengths, tol, depth=0):
    """Adaptive integral of the det log-derivative along a segment."""
    x7, w7 = gl_nodes(0.0, 1.0, 7)
    x15, w15 = gl_nodes(0.0, 1.0, 15)
    zs = a + (b - a) * np.concatenate([x7, x15])
    ld = sys.logderiv_many(zs, lengths)
    if not np.all(np.isfinite(ld)) or np.max(np.abs(ld)) > 1e14:
        raise ContourThroughZero(f"log-derivative blows up on segment {a}..{b}")
    i7 = (b - a) * np.sum(w7 * ld[:7])
    i15 = (b - a) * np.sum(w15 * ld[7:])
    if abs(i15 - i7) <= tol or abs(b - a) < 1e-13:
        return i15
    if depth >= 26:
        raise ContourThroughZero(f"contour integral not converging near {a}..{b}")
    mid = a + 0.5 * (b - a)
    return (_side_integral(sys, a, mid, lengths, 0.5 * tol, depth + 1)
            + _side_integral(sys, mid, b, lengths, 0.5 * tol, depth + 1))


def _winding(sys, box, lengths, side_tol=0.02 * 2.0 * np.pi):
    re0, re1, im0, im1 = box
    corners = [complex(re0, im0), complex(re1, im0), complex(re1, im1), complex(re0, im1)]
    total = 0.0 + 0.0j
    for i in range(4):
        total += _side_integral(sys, corners[i], corners[(i + 1) % 4], lengths, side_tol)
    w = total / (2j * np.pi)
    r = int(round(w.real))
    if abs(w - r) > 0.1 or r < 0:
        raise ContourThroughZero(f"winding {w:.3f} of box {box} is not a clean integer")
    return r


def _newton(sys, z0, lengths, tol, maxit=60):
    z = z0
    for _ in range(maxit):
        ld = sys.logderiv(z, lengths)
        if not np.isfinite(ld):
            return z  # singular matrix: sitting on the root
        if abs(ld) < 1e-300:
            return None
        dz = -1.0 / ld
        z = z + dz
        if abs(dz) <= tol:
            for _ in range(2):  # quadratic cleanup
                ld = sys.logderiv(z, lengths)
                if np.isfinite(ld) and abs(ld) > 1e-300:
                    d2 = -1.0 / ld
                    if abs(d2) <= abs(dz):
                        z = z + d2
                        dz = d2
            return z
    return None


def _inside(z, box, slack):
    re0, re1, im0, im1 = box
    return (re0 - slack <= z.real <= re1 + slack
            and im0 - slack <= z.imag <= im1 + slack)


def _search(sys, box, w, lengths, tol, depth):
    if w == 0:
        return []
    re0, re1, im0, im1 = box
    center = complex(0.5 * (re0 + re1), 0.5 * (im0 + im1))
    diam = float(np.hypot(re1 - re0, im1 - im0))
    if w == 1:
        z = _newton(sys, center, lengths, tol)
        if z is not None and _inside(z, box, 2 * tol):
            return [(z, 1)]
    if diam <= max(tol, 4e-13 * max(1.0, abs(center))):
        return [(center, w)]  # unresolved cluster: centroid with total count
    if depth >= _MAX_DEPTH:
        raise MaxDepthExceeded(f"subdivision depth {_MAX_DEPTH} hit at {box}")
    for fx, fy in _CUTS:
        xc = re0 + fx * (re1 - re0)
        yc = im0 + fy * (im1 - im0)
        children = (
            (re0, xc, im0, yc), (xc, re1, im0, yc),
            (re0, xc, yc, im1), (xc, re1, yc, im1),
        )
        try:
            ws = [_winding(sys, c, lengths) for c in children]
        except ContourThroughZero:
            continue
        if sum(ws) != w:
            continue  # a root sits on this cut; try the next fractions
        out = []
        for c, wc in zip(children, ws):
            out.extend(_search(sys, c, wc, lengths, tol, depth + 1))
        return out
    raise ContourThroughZero(f"no clean subdivision of {box}")


def _classify(sys, g, z, mult, tol):
    a = sys.matrix(z)
    _, s, vh = np.linalg.svd(a)
    small = int(np.sum(s <= max(1e-8 * s[0], 1e-300)))
    count = min(max(small, 1), max(mult, 1))
    waves = tuple(
        _wave_from_vector(g, z, vh[-(j + 1)].conj()) for j in range(count)
    )
    im_tol = max(10 * tol, 1e-9)
    if abs(z.imag) <= im_tol:
        lead_amp = max(w.max_lead_amplitude() for w in waves)
        kind = KIND_EMBEDDED if lead_amp < _LEAD_AMP_TOL else KIND_REAL_RESONANCE
    else:
        kind = KIND_RESONANCE
    return SpectralPoint(z, mult, kind, float(s[-1]), waves)


def _padded_box(window):
    re0, re1, im0, im1 = window
    top = im1 + 0.02 * max(1.0, im1 - im0) if abs(im1) <= 1e-9 else im1
    return [re0, re1, im0, top]


def _check_window(window):
    re0, re1, im0, im1 = (float(x) for x in window)
    if not (np.isfinite([re0, re1, im0, im1]).all() and re0 < re1 and im0 < im1):
        raise InvalidWindow(f"bad window {window!r}")
    if re0 <= 0.0 <= re1 and im0 <= 0.0 <= im1:
        raise InvalidWindow("window must exclude lambda = 0")
    return re0, re1, im0, im1


def winding_number(g: MetricGraph, window, seed: int = 0) -> int:
    """Zero count (with multiplicity) of the secular determinant in a window.

    Real-axis zeros on the top edge are included: the contour is lifted
    slightly above the axis when the window touches it, matching what
    find_spectral_points reports for the same window.
    """
    win = _check_window(window)
    sys = build_secular(g)
    box = _padded_box(win)
    rng = np.random.default_rng(seed)
    return _count_with_retries(sys, box, g.lengths, rng, win)


def _count_with_retries(sys, box, lengths, rng, win, search_tol=None):
    """Top-level winding (and optional search) with jittered-window retries."""
    re0, re1, im0, im1 = win
    last = None
    for attempt in range(6):
        try:
            w = _winding(sys, tuple(box), lengths)
            if search_tol is None:
                return w
            return _search(sys, tuple(box), w, lengths, search_tol, 0)
        except ContourThroughZero as exc:
            last = exc
            dw, dh = re1 - re0, im1 - im0
            jit = rng.uniform(0.5, 1.5, size=4) * 1e-3
            box = [box[0] - jit[0] * dw, box[1] + jit[1] * dw,
                   box[2] - jit[2] * dh, box[3] + jit[3] * dh]
            # never let the jitter drag the window across the origin
            if re0 > 0:
                box[0] = max(box[0], 0.5 * re0)
            if re1 < 0:
                box[1] = min(box[1], 0.5 * re1)
    raise last


def find_spectral_points(g: MetricGraph, window, tol: float = 1e-10,
                         seed: int = 0) -> list[SpectralPoint]:
    """All zeros of the secular determinant in a closed window.

    Recursive argument-principle subdivision: boxes with winding one are
    polished by Newton iteration, boxes that stop shrinking while holding
    several zeros are reported as a cluster at the centroid with the total
    multiplicity. Points are classified as EmbeddedEigenvalue /
    RealResonance / Resonance and sorted by real part.
    """
    win = _check_window(window)
    re0, re1, im0, im1 = win
    sys = build_secular(g)
    rng = np.random.default_rng(seed)
    raw = _count_with_retries(sys, _padded_box(win), g.lengths, rng, win,
                              search_tol=tol)
    slack = 1e-9
    pts = []
    for z, mult in raw:
        if (re0 - slack <= z.real <= re1 + slack
                and im0 - slack <= z.imag <= im1 + slack):
            pts.append(_classify(sys, g, z, mult, tol))
    pts.sort(key=lambda p: (p.lam.real, p.lam.imag))
    return pts


def eigenfunction(g: MetricGraph, sp: SpectralPoint) -> EdgeWave:
    """Real, L2-normalized eigenfunction of a simple embedded eigenvalue.

    The kernel vector's global phase is fixed by making the largest
    sine-coefficient (or cosine-coefficient if all sines vanish) real and
    positive, which also makes the whole wave real up to solver noise.
    """
    if sp.kind != KIND_EMBEDDED:
        raise NotEmbedded(f"{sp.lam} is {sp.kind}, not an embedded eigenvalue")
    if sp.multiplicity != 1:
        raise NotSimple(f"eigenvalue {sp.lam} has multiplicity {sp.multiplicity}")
    w = sp.kernel_basis[0]
    lam = float(sp.lam.real)
    alpha = w.alpha.copy()
    beta = w.beta.copy()
    a_cos = alpha + beta
    b_sin = 1j * (alpha - beta)
    scale = max(np.abs(a_cos).max(initial=0.0), np.abs(b_sin).max(initial=0.0))
    if scale == 0.0:
        raise NotEmbedded("kernel vector vanishes on all edges")
    pick = b_sin[np.argmax(np.abs(b_sin))]
    if abs(pick) < 1e-10 * scale:
        pick = a_cos[np.argmax(np.abs(a_cos))]
    phase = np.exp(-1j * np.angle(pick))
    a_cos = a_cos * phase
    b_sin = b_sin * phase
    if max(np.abs(a_cos.imag).max(initial=0.0),
           np.abs(b_sin.imag).max(initial=0.0)) > 1e-8 * scale:
        raise NotSimple("kernel vector is not proportional to a real wave")
    alpha = 0.5 * (a_cos.real - 1j * b_sin.real)
    beta = np.conj(alpha)
    out = EdgeWave(g, lam, alpha, beta,
                   np.zeros(g.n_leads, complex), np.zeros(g.n_leads, complex))
    return out.scaled(1.0 / norm(out))


def _solve_consistent(a, b):
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=1e-12)
    resid = np.linalg.norm(a @ x - b)
    if resid > 1e-6 * (1.0 + np.linalg.norm(b)):
        raise SingularInconsistent(f"residual {resid:.2e} solving the driven system")
    return x


def scattering_matrix(g: MetricGraph, lam) -> np.ndarray:
    """K x K matrix of outgoing amplitudes per unit incoming wave."""
    sys = build_secular(g)
    k = g.n_leads
    if k == 0:
        return np.zeros((0, 0), dtype=complex)
    a = sys.matrix(lam)
    m = g.n_edges
    s = np.empty((k, k), dtype=complex)
    for j in range(k):
        x = _solve_consistent(a, sys.rhs(g.leads[j].id))
        s[:, j] = x[2 * m :]
    return s


def _scattering_wave(g, lam, k0, x) -> EdgeWave:
    m = g.n_edges
    c_in = np.zeros(g.n_leads, dtype=complex)
    c_in[k0] = 1.0
    return EdgeWave(g, lam, x[0 : 2 * m : 2], x[1 : 2 * m : 2], c_in, x[2 * m :])


def generalized_eigenfunction_report(g: MetricGraph, lam, lead_id: str) -> dict:
    """Scattering solution for a unit incoming wave on one lead, both gauges.

    Away from embedded eigenvalues the system is invertible and the two
    gauges coincide. At an embedded eigenvalue the solution is only defined
    up to multiples of the eigenfunction; "minimal" takes the least-norm
    solution with the edge part projected off the kernel, "extrapolated"
    Richardson-extrapolates the invertible solves at lam (1 +/- eta). Lead
    amplitudes are gauge-free, so their discrepancy measures solver quality.
    """
    sys = build_secular(g)
    k0 = g.lead_index(lead_id)
    a = sys.matrix(lam)
    b = sys.rhs(lead_id)
    _, s, vh = np.linalg.svd(a)
    singular = s[-1] <= 1e-8 * s[0]
    x_min = _solve_consistent(a, b)
    w_min = _scattering_wave(g, lam, k0, x_min)
    if not singular:
        w_ext = w_min
    else:
        n_small = int(np.sum(s <= 1e-8 * s[0]))
        basis = []
        for j in range(n_small):
            u = _wave_from_vector(g, lam, vh[-(j + 1)].conj())
            for p in basis:
                u = u.plus(p, -inner_product(u, p))
            nu = norm(u)
            if nu > 1e-12:
                basis.append(u.scaled(1.0 / nu))
        for u in basis:
            w_min = w_min.plus(u, -inner_product(w_min, u))
        etas = (1e-4, 1e-5)
        sym = []
        for eta in etas:
            xp = np.linalg.solve(sys.matrix(lam * (1 + eta)), b)
            xm = np.linalg.solve(sys.matrix(lam * (1 - eta)), b)
            sym.append(0.5 * (xp + xm))
        h1, h2 = etas
        x_ext = (h1 * h1 * sym[1] - h2 * h2 * sym[0]) / (h1 * h1 - h2 * h2)
        w_ext = _scattering_wave(g, lam, k0, x_ext)
    lead_disc = float(np.abs(w_min.lead_out - w_ext.lead_out).max(initial=0.0))
    edge_disc = float(max(np.abs(w_min.alpha - w_ext.alpha).max(initial=0.0),
                          np.abs(w_min.beta - w_ext.beta).max(initial=0.0)))
    return {
        "minimal": w_min,
        "extrapolated": w_ext,
        "singular": bool(singular),
        "lead_discrepancy": lead_disc,
        "edge_discrepancy": edge_disc,
    }


def generalized_eigenfunction(g: MetricGraph, lam, lead_id: str,
                              gauge: str = "extrapolated") -> EdgeWave:
    if gauge not in ("extrapolated", "minimal"):
        raise OutOfRange(f"unknown gauge {gauge!r}")
    return generalized_eigenfunction_report(g, lam, lead_id)[gauge]
