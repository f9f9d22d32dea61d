"""Metric graphs with leads, and one-parameter length perturbations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DanglingReference,
    DuplicateId,
    InvalidFamily,
    LoopEdge,
    NonpositiveLength,
)

MAX_FAMILY_DEGREE = 8


@dataclass(frozen=True)
class Edge:
    id: str
    ends: tuple[str, str]
    length: float


@dataclass(frozen=True)
class Lead:
    """Semi-infinite edge, parametrized by x >= 0 from its vertex."""

    id: str
    vertex: str


@dataclass(frozen=True)
class Incidence:
    """One attachment of an edge or lead to a vertex.

    kind is "edge" or "lead"; index points into graph.edges / graph.leads;
    end is 0 for the x=0 endpoint of a finite edge, 1 for x=length. Leads
    always attach at their x=0 end.
    """

    kind: str
    index: int
    end: int


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    leads: tuple[Lead, ...]
    incidence: dict[str, tuple[Incidence, ...]] = field(
        compare=False, repr=False, default_factory=dict
    )

    def __post_init__(self):
        seen: set[str] = set()
        for vid in self.vertices:
            if vid in seen:
                raise DuplicateId(f"vertex id {vid!r} repeated")
            seen.add(vid)
        vset = set(self.vertices)
        for obj in (*self.edges, *self.leads):
            if obj.id in seen:
                raise DuplicateId(f"id {obj.id!r} repeated")
            seen.add(obj.id)
        for e in self.edges:
            a, b = e.ends
            if a not in vset or b not in vset:
                raise DanglingReference(f"edge {e.id!r} ends at unknown vertex")
            if a == b:
                raise LoopEdge(f"edge {e.id!r} is a loop at {a!r}")
            if not (isinstance(e.length, (int, float)) and math.isfinite(e.length)) or e.length <= 0:
                raise NonpositiveLength(f"edge {e.id!r} has length {e.length!r}")
        for l in self.leads:
            if l.vertex not in vset:
                raise DanglingReference(f"lead {l.id!r} attached to unknown vertex")
        inc: dict[str, list[Incidence]] = {v: [] for v in self.vertices}
        for i, e in enumerate(self.edges):
            inc[e.ends[0]].append(Incidence("edge", i, 0))
            inc[e.ends[1]].append(Incidence("edge", i, 1))
        for k, l in enumerate(self.leads):
            inc[l.vertex].append(Incidence("lead", k, 0))
        object.__setattr__(self, "incidence", {v: tuple(s) for v, s in inc.items()})

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_leads(self) -> int:
        return len(self.leads)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges], dtype=float)

    def degree(self, vertex: str) -> int:
        return len(self.incidence[vertex])

    def edge_index(self, edge_id: str) -> int:
        for i, e in enumerate(self.edges):
            if e.id == edge_id:
                return i
        raise DanglingReference(f"no edge {edge_id!r}")

    def lead_index(self, lead_id: str) -> int:
        for k, l in enumerate(self.leads):
            if l.id == lead_id:
                return k
        raise DanglingReference(f"no lead {lead_id!r}")

    def with_lengths(self, lengths: Sequence[float]) -> "MetricGraph":
        if len(lengths) != self.n_edges:
            raise InvalidFamily("length vector does not match edge count")
        edges = tuple(
            Edge(e.id, e.ends, float(l)) for e, l in zip(self.edges, lengths)
        )
        return MetricGraph(self.vertices, edges, self.leads)

    def to_json_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"id": e.id, "ends": list(e.ends), "length": e.length}
                for e in self.edges
            ],
            "leads": [{"id": l.id, "vertex": l.vertex} for l in self.leads],
        }


def validate_graph(raw: Mapping) -> MetricGraph:
    """Build a MetricGraph from parsed JSON, rejecting malformed input.

    Expected shape::

        {"vertices": ["v1", ...],
         "edges": [{"id": "e1", "ends": ["v1", "v2"], "length": 1.0}, ...],
         "leads": [{"id": "l1", "vertex": "v1"}, ...]}
    """

    if not isinstance(raw, Mapping):
        raise DanglingReference("graph document must be a JSON object")
    try:
        vertices = tuple(str(v) for v in raw.get("vertices", []))
        edges = tuple(
            Edge(str(e["id"]), (str(e["ends"][0]), str(e["ends"][1])), float(e["length"]))
            for e in raw.get("edges", [])
        )
        leads = tuple(Lead(str(l["id"]), str(l["vertex"])) for l in raw.get("leads", []))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise DanglingReference(f"malformed graph document: {exc}") from exc
    return MetricGraph(vertices, edges, leads)


@dataclass(frozen=True)
class PerturbationFamily:
    """Polynomial-in-t edge length family.

    mode "a": lengths follow exp(-a_m(t)) * ell_m with a_m(0) = 0.
    mode "length": lengths follow ell_m(t) directly, ell_m(0) = ell_m.
    entries maps edge ids to polynomial coefficients, ascending degree,
    degree <= 8; omitted edges are unperturbed.
    """

    mode: str
    entries: Mapping[str, tuple[float, ...]]

    def __post_init__(self):
        if self.mode not in ("a", "length"):
            raise InvalidFamily(f"unknown mode {self.mode!r}")
        cleaned = {}
        for eid, coeffs in dict(self.entries).items():
            c = tuple(float(x) for x in coeffs)
            if len(c) == 0:
                raise InvalidFamily(f"entry {eid!r} has no coefficients")
            if len(c) - 1 > MAX_FAMILY_DEGREE:
                raise InvalidFamily(
                    f"entry {eid!r} has degree {len(c) - 1} > {MAX_FAMILY_DEGREE}"
                )
            if not all(math.isfinite(x) for x in c):
                raise InvalidFamily(f"entry {eid!r} has non-finite coefficients")
            cleaned[str(eid)] = c
        object.__setattr__(self, "entries", cleaned)

    def _check_against(self, g: MetricGraph) -> None:
        for eid, c in self.entries.items():
            i = g.edge_index(eid)  # raises DanglingReference
            if self.mode == "a":
                if abs(c[0]) > 1e-12:
                    raise InvalidFamily(f"a_{eid}(0) = {c[0]} != 0")
            else:
                if abs(c[0] - g.edges[i].length) > 1e-12 * max(1.0, g.edges[i].length):
                    raise InvalidFamily(
                        f"length_{eid}(0) = {c[0]} != {g.edges[i].length}"
                    )

    def _poly(self, g: MetricGraph) -> np.ndarray:
        """Coefficient table, shape (n_edges, MAX_FAMILY_DEGREE + 1)."""
        table = np.zeros((g.n_edges, MAX_FAMILY_DEGREE + 1))
        if self.mode == "length":
            table[:, 0] = g.lengths
        for eid, c in self.entries.items():
            i = g.edge_index(eid)
            table[i, :] = 0.0
            table[i, : len(c)] = c
        return table

    @classmethod
    def from_json_dict(cls, raw: Mapping) -> "PerturbationFamily":
        if not isinstance(raw, Mapping) or "mode" not in raw:
            raise InvalidFamily("perturbation document must be an object with a mode")
        entries = raw.get("entries", {})
        if not isinstance(entries, Mapping):
            raise InvalidFamily("entries must be an object")
        return cls(str(raw["mode"]), {k: tuple(v) for k, v in entries.items()})

    def to_json_dict(self) -> dict:
        return {"mode": self.mode, "entries": {k: list(v) for k, v in self.entries.items()}}


def lengths_at(p: PerturbationFamily, g: MetricGraph, t: float) -> MetricGraph:
    """The graph at parameter t. Raises NonpositiveLength if a length closes up."""
    p._check_against(g)
    table = p._poly(g)
    vals = np.polynomial.polynomial.polyval(t, table.T)
    if p.mode == "a":
        lengths = np.exp(-vals) * g.lengths
    else:
        lengths = vals
    if np.any(lengths <= 0) or not np.all(np.isfinite(lengths)):
        bad = g.edges[int(np.argmin(lengths))].id
        raise NonpositiveLength(f"edge {bad!r} has length {lengths.min()} at t={t}")
    return g.with_lengths(lengths)


def adot(p: PerturbationFamily, g: MetricGraph) -> np.ndarray:
    """d a_m / dt at t = 0, per finite edge, in graph edge order.

    For mode "length" this is -ell_m'(0) / ell_m(0), the equivalent
    logarithmic rate.
    """
    p._check_against(g)
    table = p._poly(g)
    if p.mode == "a":
        return table[:, 1].copy()
    return -table[:, 1] / g.lengths
