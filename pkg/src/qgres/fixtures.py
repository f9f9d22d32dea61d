"""Built-in graphs used by the CLI and the test suite."""

from __future__ import annotations

from .errors import OutOfRange
from .graph import MetricGraph, PerturbationFamily, validate_graph


def double_edge_two_leads() -> MetricGraph:
    """Two vertices joined by two unit edges, one lead at each vertex.

    Embedded eigenvalues at pi Z (sine on one edge, minus sine on the other),
    resonances on the lines Re lam in pi Z.
    """
    return validate_graph({
        "vertices": ["v1", "v2"],
        "edges": [
            {"id": "e1", "ends": ["v1", "v2"], "length": 1.0},
            {"id": "e2", "ends": ["v1", "v2"], "length": 1.0},
        ],
        "leads": [
            {"id": "l1", "vertex": "v1"},
            {"id": "l2", "vertex": "v2"},
        ],
    })


def five_edge_two_leads() -> MetricGraph:
    """Two unit triangles glued along e7, a lead at each outer vertex."""
    return validate_graph({
        "vertices": ["v1", "v2", "v3", "v4"],
        "edges": [
            {"id": "e3", "ends": ["v1", "v3"], "length": 1.0},
            {"id": "e4", "ends": ["v2", "v3"], "length": 1.0},
            {"id": "e5", "ends": ["v2", "v4"], "length": 1.0},
            {"id": "e6", "ends": ["v1", "v4"], "length": 1.0},
            {"id": "e7", "ends": ["v4", "v3"], "length": 1.0},
        ],
        "leads": [
            {"id": "e1", "vertex": "v1"},
            {"id": "e2", "vertex": "v2"},
        ],
    })


def half_line() -> MetricGraph:
    return validate_graph({
        "vertices": ["v1"],
        "edges": [],
        "leads": [{"id": "l1", "vertex": "v1"}],
    })


def ring(k: int) -> MetricGraph:
    """Compact cycle of k unit edges (k >= 2)."""
    if k < 2:
        raise OutOfRange(f"cycle fixture needs k >= 2, got {k}")
    verts = [f"v{i + 1}" for i in range(k)]
    edges = [
        {"id": f"e{i + 1}", "ends": [verts[i], verts[(i + 1) % k]], "length": 1.0}
        for i in range(k)
    ]
    return validate_graph({"vertices": verts, "edges": edges, "leads": []})


def stretch_family(g: MetricGraph, rates: dict[str, float]) -> PerturbationFamily:
    """Linear length family ell_m(t) = (1 - rates[m] t) ell_m on named edges.

    The log-derivative of the length at t = 0 is -rates[m].  Lengths move
    linearly, which keeps tracked trajectories in closed form (two equal
    edges, both rates 1: lam(t) = pi/(1 - t)).
    """
    entries = {}
    for eid, r in rates.items():
        ell = float(g.lengths[g.edge_index(eid)])
        entries[eid] = (ell, -r * ell)
    return PerturbationFamily("length", entries)


def fixture(name: str) -> MetricGraph:
    """Resolve a CLI fixture name ("double-edge", "five-edge", "halfline", "cycle:K")."""
    plain = {
        "double-edge": double_edge_two_leads,
        "five-edge": five_edge_two_leads,
        "halfline": half_line,
    }
    if name in plain:
        return plain[name]()
    if name.startswith("cycle:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError:
            raise OutOfRange(f"bad cycle fixture {name!r}") from None
        return ring(k)
    raise OutOfRange(f"unknown fixture {name!r}")
