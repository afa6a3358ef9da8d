"""Rips complexes over finite metric oracles, and the warped cylinder metric.

The cylinder over a base line carries ``ds^2 = dt^2 + 2^(-2t) dy^2`` with
``t`` the depth.  Substituting ``w = 2^t`` and ``z = y ln 2`` turns it into
the upper half plane scaled by ``1/ln 2``, which gives a closed form for
distances to compare against combinatorial horoball distances.
"""
from __future__ import annotations

import csv
import io
import math
import random
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BudgetExceeded, InputError
from .graphcore import Graph

Number = int | float | Fraction


@dataclass
class RipsComplex:
    D: Number
    n: int
    simplices: dict[int, list[tuple[int, ...]]] = field(default_factory=dict)

    def census(self) -> dict[str, int]:
        return {str(k): len(v) for k, v in sorted(self.simplices.items())}

    def contains(self, simplex: Sequence[int]) -> bool:
        s = tuple(sorted(simplex))
        return s in set(self.simplices.get(len(s) - 1, []))

    def edges(self) -> list[tuple[int, int]]:
        return list(self.simplices.get(1, []))

    def is_downward_closed(self) -> bool:
        faces = {k: set(v) for k, v in self.simplices.items()}
        for k, simplices in self.simplices.items():
            if k == 0:
                continue
            for s in simplices:
                for i in range(len(s)):
                    if s[:i] + s[i + 1:] not in faces.get(k - 1, ()):
                        return False
        return True

    def to_json(self) -> dict:
        return {"D": str(self.D), "vertices": self.n, "census": self.census(),
                "simplices": {str(k): [list(s) for s in v] for k, v in sorted(self.simplices.items())}}


def rips(
    n: int, metric: Callable[[int, int], Number], D: Number, dim_cap: int = 3, max_simplices: int = 1_000_000
) -> RipsComplex:
    """All vertex subsets of diameter at most ``D`` with at most ``dim_cap + 1`` vertices."""
    if D < 0:
        raise InputError("Rips parameter must be non-negative")
    if dim_cap < 1:
        raise InputError("dimension cap must be at least 1")
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        for v in range(u + 1, n):
            if metric(u, v) <= D:
                nbrs[u].append(v)
    out: dict[int, list[tuple[int, ...]]] = {0: [(v,) for v in range(n)]}
    count = n
    layer = out[0]
    cand = {(v,): nbrs[v] for v in range(n)}
    for k in range(1, dim_cap + 1):
        nxt, nxt_cand = [], {}
        for s in layer:
            common = cand[s]
            for v in common:
                t = s + (v,)
                nxt.append(t)
                vs = set(nbrs[v])
                nxt_cand[t] = [x for x in common if x > v and x in vs]
                count += 1
                if count > max_simplices:
                    raise BudgetExceeded(
                        f"Rips complex exceeds {max_simplices} simplices; use a smaller D or dimension cap",
                        completed=count,
                    )
        if not nxt:
            break
        out[k] = nxt
        layer, cand = nxt, nxt_cand
    return RipsComplex(D, n, out)


def rips_of_graph(g: Graph, D: int, dim_cap: int = 3, max_simplices: int = 1_000_000) -> RipsComplex:
    dist = g.distance_matrix

    def metric(u, v):
        d = int(dist[u, v])
        return d if d >= 0 else math.inf

    return rips(g.n, metric, D, dim_cap, max_simplices)


# --------------------------------------------------------------------------
# warped lengths
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WarpedPath:
    """Piecewise-linear path through points ``(y, t)``: base position and depth."""

    points: tuple[tuple[Number, Number], ...]

    def __post_init__(self):
        if len(self.points) < 1:
            raise InputError("a warped path needs at least one point")
        if any(t < 0 for _, t in self.points):
            raise InputError("depth must be non-negative")


@dataclass
class WarpedLength:
    lower: Fraction
    upper: Fraction
    level: int
    history: list[tuple[int, float, float]]

    @property
    def value(self) -> float:
        return float(self.lower + self.upper) / 2


_WIDEN = 1e-12


def _bracket_at(path: WarpedPath, level: int) -> tuple[float, float]:
    lo, hi = [], []
    parts = 2**level
    for (y0, t0), (y1, t1) in zip(path.points, path.points[1:]):
        dy = (float(y1) - float(y0)) / parts
        dt = (float(t1) - float(t0)) / parts
        for i in range(parts):
            ta = float(t0) + i * dt
            tb = ta + dt
            # the integrand on a linear piece lies between its values at the two ends
            lo.append(math.hypot(dt, 2.0 ** -max(ta, tb) * dy))
            hi.append(math.hypot(dt, 2.0 ** -min(ta, tb) * dy))
    return math.fsum(lo), math.fsum(hi)


def warped_length(path: WarpedPath, tol: float = 1e-3, max_level: int = 12) -> WarpedLength:
    """Refine by binary subdivision until the length bracket is narrower than ``tol``."""
    history = []
    for level in range(max_level + 1):
        lo, hi = _bracket_at(path, level)
        history.append((level, lo, hi))
        if hi - lo < tol:
            return WarpedLength(Fraction(lo * (1 - _WIDEN)), Fraction(hi * (1 + _WIDEN)), level, history)
    raise BudgetExceeded(f"warped length bracket wider than {tol} after {max_level} refinements", completed=max_level)


def warped_distance(p: tuple[Number, Number], q: tuple[Number, Number]) -> float:
    """Infimum of warped lengths between ``(y, t)`` points."""
    (y0, t0), (y1, t1) = p, q
    ln2 = math.log(2)
    w0, w1 = 2.0 ** float(t0), 2.0 ** float(t1)
    dz = ln2 * (float(y1) - float(y0))
    return math.acosh(1 + (dz * dz + (w1 - w0) ** 2) / (2 * w0 * w1)) / ln2


def paths_csv(rows: Sequence[tuple[str, WarpedPath, WarpedLength]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "points", "level", "lower", "upper", "measured_value"])
    for name, path, res in rows:
        pts = ";".join(f"{y}:{t}" for y, t in path.points)
        w.writerow([name, pts, res.level, f"{float(res.lower):.12g}", f"{float(res.upper):.12g}", f"{res.value:.12g}"])
    return buf.getvalue()


# --------------------------------------------------------------------------
# comparison with combinatorial horoballs
# --------------------------------------------------------------------------


@dataclass
class DistortionReport:
    pairs: int
    max_ratio_graph_over_warped: float
    max_ratio_warped_over_graph: float
    max_additive: float


def distortion_report(
    graph_dist: Callable[[int, int], int],
    coords: Sequence[tuple[Number, Number]],
    pairs: Sequence[tuple[int, int]],
) -> DistortionReport:
    """Sampled comparison of graph distances with warped distances between vertex coordinates."""
    r1 = r2 = add = 0.0
    used = 0
    for u, v in pairs:
        if u == v:
            continue
        g = graph_dist(u, v)
        if g < 0:
            continue
        w = warped_distance(coords[u], coords[v])
        used += 1
        r1 = max(r1, g / w)
        r2 = max(r2, w / g)
        add = max(add, abs(g - w))
    return DistortionReport(used, r1, r2, add)


def horoball_over_line(length: int, D: int):
    """Combinatorial horoball over a path of ``length`` vertices with ``(y, t)`` coordinates."""
    from .cusped import build_horoball

    line = Graph(length, [(i, i + 1) for i in range(length - 1)])
    hb = build_horoball(line, D, metric=lambda u, v: abs(u - v))
    coords = [(v, m) for m in range(D + 1) for v in range(length)]
    return hb, coords


def sample_distortion(length: int, D: int, samples: int = 500, seed: int = 0) -> DistortionReport:
    hb, coords = horoball_over_line(length, D)
    dist = hb.graph.distance_matrix
    rng = random.Random(seed)
    n = hb.graph.n
    pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(samples)]
    return distortion_report(lambda u, v: int(dist[u, v]), coords, pairs)


# --------------------------------------------------------------------------
# depth control
# --------------------------------------------------------------------------


@dataclass
class DepthReport:
    max_violation: int
    witness: int | None
    allowed: int

    @property
    def passes(self) -> bool:
        return self.max_violation <= self.allowed


def depth_nondecreasing_check(
    images: Mapping[int, int] | Sequence[int],
    depth_src: Sequence[int],
    depth_dst: Sequence[int],
    D: int,
) -> DepthReport:
    """Largest drop ``depth(v) - depth(image(v))``; passes when it is at most ``D``."""
    items = images.items() if isinstance(images, Mapping) else enumerate(images)
    worst, witness = 0, None
    for v, w in items:
        drop = int(depth_src[v]) - int(depth_dst[w])
        if drop > worst:
            worst, witness = drop, v
    return DepthReport(worst, witness, D)
