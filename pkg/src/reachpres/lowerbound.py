"""Extremal instance generators and their verifier.

Three families:

* the skewed-lattice source-restricted instance (``build_sv_lowerbound``):
  lattice points of a rotated rectangle, edges to the disc-hull vertices
  inside a narrow cone, one demand per straight "canonical" ray from the
  start zone, then sources attached along lattice lines;
* a small grid base (``build_ce_base``) of edge-disjoint straight paths
  with unique shortest paths and a common length;
* the layered construction over such a base (``build_layered_lowerbound``).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Any, Sequence

from .geometry import (
    Rectangle,
    Vec,
    cone_filter,
    convex_hull_ball,
    cross,
    dot,
    primitive,
    rational_cbrt_inv_sq,
)
from .graph import DemandSet, DirectedGraph, coreachable_set, reachable_set, topological_order
from .rng import stream


class ParameterError(ValueError):
    """A generator parameter violates a named construction constraint."""

    def __init__(self, constraint: str, detail: str) -> None:
        super().__init__(f"{constraint}: {detail}")
        self.constraint = constraint


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class LatticeParams:
    """Geometry of the skewed-lattice instance.

    ``skew`` is the integer direction (dx, dy) of the rectangle's long axis,
    so tan(psi) = dy/dx exactly.  The cone half-angle tangent is
    ``phi_scale * r**(-2/3)`` (rationalized when r is not a perfect cube).
    """

    h: Fraction
    w: Fraction
    h_z: Fraction
    r: Fraction
    skew: Vec = (1, 0)
    phi_scale: Fraction = Fraction(3, 2)
    # validation constants
    width_ratio: tuple[Fraction, Fraction] = (Fraction(1, 4), Fraction(4))
    zone_fraction: Fraction = Fraction(1)
    # when set, require h <= path_constant * r^(7/3), i.e. canonical paths of
    # at most ~path_constant * r^(4/3) steps; unset by default
    path_constant: Fraction | None = None

    def __post_init__(self) -> None:
        for name in ("h", "w", "h_z", "r", "phi_scale", "zone_fraction"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        object.__setattr__(self, "skew", (int(self.skew[0]), int(self.skew[1])))
        lo, hi = self.width_ratio
        object.__setattr__(self, "width_ratio", (Fraction(lo), Fraction(hi)))

    @property
    def phi_tan(self) -> Fraction:
        return self.phi_scale * rational_cbrt_inv_sq(self.r)

    def validate(self) -> None:
        if self.r < 1:
            raise ParameterError("radius", f"r={self.r} must be >= 1")
        if self.skew == (0, 0):
            raise ParameterError("skew", "axis direction must be nonzero")
        if self.phi_scale <= 0:
            raise ParameterError("cone", "phi_scale must be positive")
        if self.h < self.r:
            raise ParameterError("h >= r", f"h={self.h} < r={self.r}")
        unit = self.h * rational_cbrt_inv_sq(self.r)
        lo, hi = self.width_ratio
        ratio = self.w / unit
        if not lo <= ratio <= hi:
            raise ParameterError(
                "w ~ h*r^(-2/3)",
                f"w/(h*r^(-2/3)) = {float(ratio):.3f} outside [{float(lo)}, {float(hi)}]",
            )
        if self.h_z <= 0 or self.h_z > self.zone_fraction * self.r:
            raise ParameterError(
                "h_z <= zone_fraction*r",
                f"h_z={self.h_z} with r={self.r}, zone_fraction={self.zone_fraction}",
            )
        if self.h_z > self.h:
            raise ParameterError("h_z <= h", f"h_z={self.h_z} > h={self.h}")
        if self.path_constant is not None:
            # h <= c * r^(7/3)  <=>  h^3 <= c^3 * r^7
            if self.h ** 3 > self.path_constant ** 3 * self.r ** 7:
                raise ParameterError(
                    "h <= path_constant*r^(7/3)",
                    f"h={self.h}, r={self.r}, path_constant={self.path_constant}",
                )

    def to_json(self) -> dict[str, Any]:
        return {
            "h": str(self.h), "w": str(self.w), "h_z": str(self.h_z), "r": str(self.r),
            "skew": list(self.skew), "phi_scale": str(self.phi_scale),
            "phi_tan": str(self.phi_tan),
            "path_constant": None if self.path_constant is None else str(self.path_constant),
        }


def _iroot(n: int, num: int, den: int) -> int:
    """round(n ** (num/den)), exact for perfect powers."""
    guess = round(n ** (num / den))
    for cand in (guess - 1, guess, guess + 1):
        if cand > 0 and cand ** den == n ** num:
            return cand
    return guess


def cone_degree(r: Fraction, skew: Vec, phi_tan: Fraction) -> int:
    """Out-degree of a node far from the rectangle boundary."""
    return len(cone_filter(convex_hull_ball(r), skew, phi_tan))


def random_skew(rng, max_den: int) -> Vec:
    """Axis with tan(psi) a random rational, psi roughly uniform in [-45, 45) degrees."""
    psi = rng.uniform(-math.pi / 4, math.pi / 4)
    t = Fraction(math.tan(psi)).limit_denominator(max_den)
    return (t.denominator, t.numerator)


def search_skew(
    r: Fraction,
    phi_tan: Fraction,
    seed: int,
    degree_band: tuple[int, int] = (2, 4),
    max_den: int = 32,
    tries: int = 500,
) -> Vec:
    """First random skew whose cone degree lands in ``degree_band``."""
    rng = stream(seed, "lattice-skew")
    lo, hi = degree_band
    for _ in range(tries):
        skew = random_skew(rng, max_den)
        if lo <= cone_degree(r, skew, phi_tan) <= hi:
            return skew
    raise ParameterError("cone degree", f"no skew with degree in [{lo}, {hi}] after {tries} draws")


def default_params(
    n: int,
    *,
    sparsest: bool = False,
    seed: int = 0,
    phi_scale: Fraction = Fraction(3, 2),
    degree_band: tuple[int, int] = (2, 4),
) -> LatticeParams:
    """Dense regime h=n^(7/12), w=n^(5/12), h_z=r=n^(1/4); sparsest regime
    h=w=h_z=r=n^(1/2)."""
    if n < 4096:
        raise ParameterError("n >= 4096", f"n={n}")
    if sparsest:
        side = math.isqrt(n)
        h = w = h_z = r = Fraction(side)
        width_ratio = (Fraction(0), Fraction(side))
    else:
        h = Fraction(_iroot(n, 7, 12))
        w = Fraction(_iroot(n, 5, 12))
        h_z = r = Fraction(_iroot(n, 1, 4))
        width_ratio = (Fraction(1, 4), Fraction(4))
    phi_tan = phi_scale * rational_cbrt_inv_sq(r)
    skew = search_skew(r, phi_tan, seed, degree_band)
    return LatticeParams(h, w, h_z, r, skew, phi_scale, width_ratio=width_ratio)


# ---------------------------------------------------------------------------
# instances


@dataclass
class LowerBoundInstance:
    kind: str
    graph: DirectedGraph
    demands: DemandSet
    node_coords: list[Any]
    canonical_paths: list[list[int]]
    params: dict[str, Any] = field(default_factory=dict)
    extras: dict[str, Any] = field(default_factory=dict)

    def check_canonical_paths(self) -> None:
        """Every canonical path is a walk from its pair's source to its target."""
        g = self.graph
        for idx, ((s, t), path) in enumerate(zip(self.demands.pairs, self.canonical_paths)):
            at = s
            for e in path:
                if g.tails[e] != at:
                    raise AssertionError(f"pair {idx}: path breaks at edge {e}")
                at = g.heads[e]
            if at != t:
                raise AssertionError(f"pair {idx}: path ends at {at}, not {t}")

    def sidecar(self, verification: VerificationReport | None = None) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kind": self.kind,
            "params": self.params,
            "node_coords": [list(c) if isinstance(c, tuple) else c for c in self.node_coords],
            "canonical_paths": self.canonical_paths,
        }
        if self.extras:
            out["extras"] = self.extras
        if verification is not None:
            out["verification"] = verification.to_json()
        return out


def _lattice_graph(params: LatticeParams, vectors: Sequence[Vec]):
    rect = Rectangle(params.skew, params.h, params.w)
    points = sorted(rect.lattice_points(), key=lambda p: (rect.along(p), rect.across(p)))
    index = {p: i for i, p in enumerate(points)}
    edges: list[tuple[int, int]] = []
    edge_of: dict[tuple[int, int], int] = {}
    for i, p in enumerate(points):
        for v in vectors:
            j = index.get((p[0] + v[0], p[1] + v[1]))
            if j is not None:
                edge_of[(i, j)] = len(edges)
                edges.append((i, j))
    return rect, points, index, edges, edge_of


def build_sv_lowerbound(params: LatticeParams, *, validate: bool = True) -> LowerBoundInstance:
    """The skewed-lattice instance with sources attached along lattice lines.

    ``validate=False`` skips the parameter constraints (used for the
    corrupted-cone negative control).
    """
    if validate:
        params.validate()
    hull = convex_hull_ball(params.r)
    phi_tan = params.phi_tan
    vectors = cone_filter(hull, params.skew, phi_tan)
    if not vectors:
        raise ParameterError("cone degree", "no hull vector inside the cone")
    rect, points, index, edges, edge_of = _lattice_graph(params, vectors)
    zone = [i for i, p in enumerate(points) if rect.in_prefix(p, params.h_z)]
    if not zone:
        raise ParameterError("start zone", "no lattice point inside the start zone")

    rep = _representative(points, zone, rect, params, vectors, index)

    # hull neighbours give the source-line directions
    pos = {v: i for i, v in enumerate(hull)}
    directions: dict[Vec, Vec] = {}
    for v in vectors:
        i = pos[v]
        left, right = hull[(i + 1) % len(hull)], hull[(i - 1) % len(hull)]
        directions[v] = primitive((left[0] - right[0], left[1] - right[1]))

    # base pairs: maximal straight rays from every zone node
    base: list[tuple[int, int, Vec, list[int]]] = []
    for x in zone:
        p = points[x]
        for v in vectors:
            path: list[int] = []
            at, q = x, p
            while True:
                q2 = (q[0] + v[0], q[1] + v[1])
                nxt = index.get(q2)
                if nxt is None:
                    break
                path.append(edge_of[(at, nxt)])
                at, q = nxt, q2
            if path:
                base.append((x, at, v, path))

    # one source per (direction, line) through zone nodes
    n_lattice = len(points)
    line_ids: dict[tuple[Vec, int], int] = {}
    for a in dict.fromkeys(directions[v] for v in vectors):
        for x in zone:
            key = (a, cross(a, points[x]))
            if key not in line_ids:
                line_ids[key] = n_lattice + len(line_ids)
    source_edges: dict[tuple[int, int], int] = {}
    all_edges = list(edges)
    for (a, key), s in line_ids.items():
        for x in zone:
            if cross(a, points[x]) == key:
                source_edges[(s, x)] = len(all_edges)
                all_edges.append((s, x))

    pairs: list[tuple[int, int]] = []
    paths: list[list[int]] = []
    seen: set[tuple[int, int]] = set()
    for x, z, v, path in base:
        a = directions[v]
        s = line_ids[(a, cross(a, points[x]))]
        if (s, z) in seen:
            continue
        seen.add((s, z))
        pairs.append((s, z))
        paths.append([source_edges[(s, x)]] + path)

    g = DirectedGraph(n_lattice + len(line_ids), all_edges)
    sources = sorted(line_ids.values())
    demands = DemandSet(pairs, sources)
    coords: list[Any] = list(points) + [None] * len(line_ids)
    inst = LowerBoundInstance(
        kind="sv-lattice",
        graph=g,
        demands=demands,
        node_coords=coords,
        canonical_paths=paths,
        params=params.to_json(),
        extras={
            "cone_vectors": [list(v) for v in vectors],
            "line_directions": {f"{v[0]},{v[1]}": list(a) for v, a in directions.items()},
            "representative": list(points[rep]) if rep is not None else None,
            "zone_nodes": len(zone),
            "lattice_nodes": n_lattice,
            "lattice_edges": len(edges),
            "sources": len(sources),
        },
    )
    return inst


def _sign_root_minus(a: int, n: int, b: Fraction) -> int:
    """Sign of a*sqrt(n) - b, exactly."""
    if a >= 0 and b <= 0:
        return 0 if a == 0 and b == 0 else 1
    if a <= 0 and b >= 0:
        return -1
    diff = a * a * n - b * b
    sign = (diff > 0) - (diff < 0)
    return sign if a > 0 else -sign


def _representative(points, zone, rect: Rectangle, params: LatticeParams, vectors, index):
    """Zone node nearest the zone centre whose every cone edge stays in R.

    Directions are translation invariant, so the choice only documents
    which node defines them; None when the zone is too small to host one.
    """
    n2 = rect.norm2

    # |p - centre|^2 = (a^2 + c^2)/N - (a*h_z + c*w)/sqrt(N) + const
    # with a, c the along/across values and N = |axis|^2
    def parts(i: int) -> tuple[int, Fraction]:
        a, c = rect.along(points[i]), rect.across(points[i])
        return a * a + c * c, a * params.h_z + c * params.w

    def cmp(i: int, j: int) -> int:
        xi, yi = parts(i)
        xj, yj = parts(j)
        # f(i) - f(j) has the sign of (xi - xj)*sqrt(N) - N*(yi - yj)
        sign = _sign_root_minus(xi - xj, n2, n2 * (yi - yj))
        return sign or (i > j) - (i < j)

    for i in sorted(zone, key=cmp_to_key(cmp)):
        p = points[i]
        if all((p[0] + v[0], p[1] + v[1]) in index for v in vectors):
            return i
    return None


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerificationReport:
    pairs: int
    verified: int
    unverified: list[int]
    path_counts: dict[int, int]
    uniqueness_violations: list[int]
    canonical_edges: int
    canonical_fraction: float
    required_edges: int
    sampled_edges: int
    sample_mismatches: int
    exhaustive_limit: int
    max_path_edges: int = 0

    @property
    def ok(self) -> bool:
        return not self.uniqueness_violations and self.sample_mismatches == 0

    def to_json(self) -> dict[str, Any]:
        return {
            "pairs": self.pairs,
            "verified": self.verified,
            "unverified": self.unverified,
            "uniqueness_violations": self.uniqueness_violations,
            "path_count_histogram": _histogram(self.path_counts.values()),
            "canonical_edges": self.canonical_edges,
            "canonical_fraction": self.canonical_fraction,
            "required_edges": self.required_edges,
            "sampled_edges": self.sampled_edges,
            "sample_mismatches": self.sample_mismatches,
            "exhaustive_limit": self.exhaustive_limit,
            "max_path_edges": self.max_path_edges,
        }


def _histogram(values) -> dict[str, int]:
    out: dict[str, int] = {}
    for v in values:
        out[str(v)] = out.get(str(v), 0) + 1
    return dict(sorted(out.items(), key=lambda kv: int(kv[0])))


def count_paths(
    g: DirectedGraph, s: int, t: int, order: Sequence[int], region: set[int] | None = None
) -> tuple[int, dict[int, int], dict[int, int]]:
    """Number of s->t paths in a DAG, with per-node prefix/suffix counts."""
    if region is None:
        region = reachable_set(g, s) & coreachable_set(g, t)
    fwd = {v: 0 for v in region}
    bwd = {v: 0 for v in region}
    if s not in region:
        return 0, fwd, bwd
    fwd[s] = 1
    local = [v for v in order if v in region]
    for v in local:
        c = fwd[v]
        if c:
            for e in g.out_adj[v]:
                y = g.heads[e]
                if y in fwd:
                    fwd[y] += c
    bwd[t] = 1
    for v in reversed(local):
        if v == t:
            continue
        total = 0
        for e in g.out_adj[v]:
            y = g.heads[e]
            if y in bwd:
                total += bwd[y]
        bwd[v] = total
    return fwd[t], fwd, bwd


def verify_lowerbound(
    inst: LowerBoundInstance,
    exhaustive_limit: int = 5000,
    *,
    sample: int = 32,
    seed: int = 0,
) -> VerificationReport:
    """Path counts per pair, canonical-edge fraction, and required edges.

    Pairs whose s-t region exceeds ``exhaustive_limit`` nodes are listed as
    unverified.  An edge is required when every path of some verified pair
    uses it (prefix count times suffix count equals the total); a sample of
    edges is cross-checked by actually deleting them.  Grid bases are
    symmetric, so for them shortest paths are counted instead.
    """
    g = inst.graph
    if inst.kind == "ce-base":
        return _verify_shortest(inst, exhaustive_limit, sample, seed)
    order = topological_order(g)
    if order is None:
        raise ValueError("lower-bound instances are acyclic")
    canonical = set()
    for path in inst.canonical_paths:
        canonical.update(path)
    counts: dict[int, int] = {}
    unverified: list[int] = []
    violations: list[int] = []
    required: set[int] = set()
    regions: dict[int, set[int]] = {}
    for idx, (s, t) in enumerate(inst.demands.pairs):
        region = reachable_set(g, s) & coreachable_set(g, t)
        if len(region) > exhaustive_limit:
            unverified.append(idx)
            continue
        total, fwd, bwd = count_paths(g, s, t, order, region)
        counts[idx] = total
        regions[idx] = region
        if total != 1:
            violations.append(idx)
        if total == 0:
            continue
        for v in region:
            for e in g.out_adj[v]:
                y = g.heads[e]
                if y in bwd and fwd[v] * bwd[y] == total:
                    required.add(e)

    # cross-check: deleting a sampled edge breaks some verified pair iff it was marked required
    rng = stream(seed, "lowerbound-verify")
    m = g.edge_count
    probe = sorted(rng.sample(range(m), min(sample, m)))
    mismatches = 0
    by_edge_pairs = [idx for idx in counts if counts[idx] > 0]
    for e in probe:
        mask = bytearray(b"\x01") * m
        mask[e] = 0
        tail = g.tails[e]
        breaks = False
        for idx in by_edge_pairs:
            if tail not in regions[idx]:
                continue
            s, t = inst.demands.pairs[idx]
            if t not in reachable_set(g, s, mask):
                breaks = True
                break
        if breaks != (e in required):
            mismatches += 1

    return VerificationReport(
        pairs=len(inst.demands.pairs),
        verified=len(counts),
        unverified=unverified,
        path_counts=counts,
        uniqueness_violations=violations,
        canonical_edges=len(canonical),
        canonical_fraction=len(canonical) / m if m else 0.0,
        required_edges=len(required),
        sampled_edges=len(probe),
        sample_mismatches=mismatches,
        exhaustive_limit=exhaustive_limit,
        max_path_edges=max((len(p) for p in inst.canonical_paths), default=0),
    )


def _verify_shortest(inst: LowerBoundInstance, exhaustive_limit: int, sample: int, seed: int) -> VerificationReport:
    """The symmetric grid base: count shortest paths instead of all paths.

    An edge is required when deleting it lengthens some pair's distance.
    """
    g = inst.graph
    m = g.edge_count
    canonical = {e for path in inst.canonical_paths for e in path}
    counts: dict[int, int] = {}
    violations: list[int] = []
    required: set[int] = set()
    dists: dict[int, int] = {}
    for idx, ((s, t), path) in enumerate(zip(inst.demands.pairs, inst.canonical_paths)):
        dist, count = all_shortest_path_counts(g, s)
        counts[idx] = count[t]
        dists[idx] = dist[t]
        if count[t] != 1 or dist[t] != len(path):
            violations.append(idx)
        if count[t] == 1:
            required.update(path)
    rng = stream(seed, "lowerbound-verify")
    probe = sorted(rng.sample(range(m), min(sample, m)))
    mismatches = 0
    for e in probe:
        rest = DirectedGraph(g.node_count, [g.edges[f] for f in range(m) if f != e])
        longer = False
        for idx, (s, t) in enumerate(inst.demands.pairs):
            d = all_shortest_path_counts(rest, s)[0][t]
            if d == -1 or d > dists[idx]:
                longer = True
                break
        if longer != (e in required):
            mismatches += 1
    return VerificationReport(
        pairs=len(inst.demands.pairs),
        verified=len(counts),
        unverified=[],
        path_counts=counts,
        uniqueness_violations=violations,
        canonical_edges=len(canonical),
        canonical_fraction=len(canonical) / m if m else 0.0,
        required_edges=len(required),
        sampled_edges=len(probe),
        sample_mismatches=mismatches,
        exhaustive_limit=exhaustive_limit,
        max_path_edges=max((len(p) for p in inst.canonical_paths), default=0),
    )


def required_edges_by_deletion(g: DirectedGraph, demands: DemandSet) -> set[int]:
    """Edges whose individual deletion disconnects some satisfied demand."""
    m = g.edge_count
    satisfied = [(s, t) for s, t in demands.pairs if t in reachable_set(g, s)]
    out = set()
    mask = bytearray(b"\x01") * m
    for e in range(m):
        mask[e] = 0
        for s, t in satisfied:
            if t not in reachable_set(g, s, mask):
                out.add(e)
                break
        mask[e] = 1
    return out


# ---------------------------------------------------------------------------
# grid base and layering

# ±V must be in strictly convex position for straight paths to be the unique
# shortest ones; these three directions form a hexagon with ±V.
CE_DIRECTIONS: tuple[Vec, ...] = ((1, 0), (0, 1), (1, 1))


def _segments(side: int, length: int) -> list[list[Vec]]:
    """All straight segments of ``length`` steps, interleaved across directions."""
    per_dir = []
    for d in CE_DIRECTIONS:
        segs = []
        for y in range(side):
            for x in range(side):
                end = (x + length * d[0], y + length * d[1])
                if 0 <= end[0] < side and 0 <= end[1] < side:
                    segs.append([(x + k * d[0], y + k * d[1]) for k in range(length + 1)])
        per_dir.append(segs)
    out = []
    for i in range(max(len(s) for s in per_dir)):
        for segs in per_dir:
            if i < len(segs):
                out.append(segs[i])
    return out


def _disjoint_pick(side: int, length: int, p: int) -> list[list[Vec]] | None:
    used: set[frozenset[Vec]] = set()
    chosen = []
    for seg in _segments(side, length):
        steps = {frozenset((seg[k], seg[k + 1])) for k in range(length)}
        if steps & used:
            continue
        used |= steps
        chosen.append(seg)
        if len(chosen) == p:
            return chosen
    return None


def build_ce_base(side: int, p: int) -> LowerBoundInstance:
    """``p`` edge-disjoint straight lattice paths of a common length L.

    The graph is the union of the paths, stored symmetrically (both arc
    directions), on all side*side lattice nodes.  L is the largest length
    for which ``p`` disjoint segments exist.
    """
    if side < 2 or p < 1:
        raise ParameterError("ce-base", f"need side >= 2 and p >= 1, got side={side}, p={p}")
    chosen = None
    for length in range(side - 1, 0, -1):
        chosen = _disjoint_pick(side, length, p)
        if chosen is not None:
            break
    if chosen is None:
        raise ParameterError("ce-base", f"no {p} edge-disjoint straight paths fit a {side}x{side} grid")
    length = len(chosen[0]) - 1
    node = lambda q: q[1] * side + q[0]  # noqa: E731
    arcs: list[tuple[int, int]] = []
    for seg in chosen:
        for k in range(length):
            u, v = node(seg[k]), node(seg[k + 1])
            arcs.append((u, v))
            arcs.append((v, u))
    g = DirectedGraph(side * side, arcs)
    pairs = [(node(seg[0]), node(seg[-1])) for seg in chosen]
    paths = [[g.edge_id(node(seg[k]), node(seg[k + 1])) for k in range(length)] for seg in chosen]
    coords = [(i % side, i // side) for i in range(side * side)]
    return LowerBoundInstance(
        kind="ce-base",
        graph=g,
        demands=DemandSet(pairs),
        node_coords=coords,
        canonical_paths=paths,
        params={"side": side, "p": p},
        extras={"common_length": length, "undirected_edges": len(arcs) // 2},
    )


def build_layered_lowerbound(base: LowerBoundInstance, layers: int) -> LowerBoundInstance:
    """2L layered copies of an undirected base with demands spanning L layers."""
    L = base.extras.get("common_length")
    if L is None:
        raise ParameterError("layered", "base instance has no common path length")
    if layers != 2 * L:
        raise ParameterError("layers = 2L", f"layers={layers} but base common length L={L}")
    bg = base.graph
    n = bg.node_count
    undirected = sorted({(min(u, v), max(u, v)) for u, v in bg.edges})
    arcs: list[tuple[int, int]] = []
    for i in range(layers - 1):
        for u, v in undirected:
            arcs.append((i * n + u, (i + 1) * n + v))
            arcs.append((i * n + v, (i + 1) * n + u))
    g = DirectedGraph(layers * n, arcs)
    pairs: list[tuple[int, int]] = []
    paths: list[list[int]] = []
    for (s, t), bpath in zip(base.demands.pairs, base.canonical_paths):
        for j in range(L):
            pairs.append((j * n + s, (j + L) * n + t))
            lifted = []
            for k, e in enumerate(bpath):
                u, v = bg.edges[e]
                lifted.append(g.edge_id((j + k) * n + u, (j + k + 1) * n + v))
            paths.append(lifted)
    coords = [(i // n, i % n) for i in range(layers * n)]
    return LowerBoundInstance(
        kind="layered",
        graph=g,
        demands=DemandSet(pairs),
        node_coords=coords,
        canonical_paths=paths,
        params={"base": base.params, "layers": layers},
        extras={"common_length": L, "base_nodes": n},
    )


def layer_violations(inst: LowerBoundInstance) -> list[int]:
    """Edges of a layered instance that do not go from layer i to i+1."""
    n = inst.extras["base_nodes"]
    g = inst.graph
    return [e for e, (u, v) in enumerate(g.edges) if v // n != u // n + 1]


def all_shortest_path_counts(g: DirectedGraph, s: int) -> tuple[list[int], list[int]]:
    """BFS distances and shortest-path counts from ``s`` (-1 = unreachable)."""
    dist = [-1] * g.node_count
    count = [0] * g.node_count
    dist[s], count[s] = 0, 1
    queue = deque([s])
    while queue:
        x = queue.popleft()
        for e in g.out_adj[x]:
            y = g.heads[e]
            if dist[y] == -1:
                dist[y] = dist[x] + 1
                queue.append(y)
            if dist[y] == dist[x] + 1:
                count[y] += count[x]
    return dist, count
