"""Rational 1-chains and the geodesic-average bicombing with its property suite."""
from __future__ import annotations

import csv
import io
import random
from collections.abc import Callable, Iterable, Sequence
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, InputError, PropertyViolation
from .graphcore import Graph, geodesic_flow, lex_least_geodesic


def frac_str(x: Fraction | None) -> str | None:
    if x is None:
        return None
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class Chain1:
    """Rational 1-chain keyed by canonical edges ``(u, v)`` with ``u < v``.

    The coefficient of the oriented edge ``v -> u`` is minus that of ``u -> v``.
    Zero coefficients are never stored.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[tuple[int, int], Fraction] | None = None):
        self.coeffs = {e: Fraction(c) for e, c in (coeffs or {}).items() if c != 0}
        for u, v in self.coeffs:
            if not u < v:
                raise InputError(f"chain key {(u, v)} is not canonical")

    @classmethod
    def from_oriented(cls, oriented: dict[tuple[int, int], Fraction]) -> "Chain1":
        out: dict[tuple[int, int], Fraction] = {}
        for (u, v), c in oriented.items():
            if u < v:
                out[(u, v)] = out.get((u, v), 0) + c
            else:
                out[(v, u)] = out.get((v, u), 0) - c
        return cls(out)

    def coefficient(self, u: int, v: int) -> Fraction:
        if u < v:
            return self.coeffs.get((u, v), Fraction(0))
        return -self.coeffs.get((v, u), Fraction(0))

    def oriented_support(self) -> list[tuple[tuple[int, int], Fraction]]:
        """Support edges oriented so the coefficient is positive."""
        return [((u, v), c) if c > 0 else ((v, u), -c) for (u, v), c in self.coeffs.items()]

    def __add__(self, other: "Chain1") -> "Chain1":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return Chain1(out)

    def __neg__(self) -> "Chain1":
        return Chain1({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: "Chain1") -> "Chain1":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Chain1) and self.coeffs == other.coeffs

    def __len__(self) -> int:
        return len(self.coeffs)

    def __repr__(self):
        return f"Chain1({len(self.coeffs)} edges, norm1={self.norm1()})"

    def is_zero(self) -> bool:
        return not self.coeffs

    def norm1(self) -> Fraction:
        return sum((abs(c) for c in self.coeffs.values()), Fraction(0))

    def norminf(self) -> Fraction:
        return max((abs(c) for c in self.coeffs.values()), default=Fraction(0))

    def support_vertices(self) -> set[int]:
        return {v for e in self.coeffs for v in e}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tail", "head", "numerator", "denominator"])
        for (u, v), c in sorted(self.coeffs.items()):
            w.writerow([u, v, c.numerator, c.denominator])
        return buf.getvalue()


def boundary(c: Chain1) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for (u, v), a in c.coeffs.items():
        out[v] = out.get(v, 0) + a
        out[u] = out.get(u, 0) - a
    return {v: a for v, a in out.items() if a != 0}


class BicombingTable:
    """Memoized geodesic-average bicombing ``q(x, y)`` on a finite graph."""

    provenance = "geodesic-average"

    def __init__(self, graph: Graph):
        self.graph = graph
        self.memo: dict[tuple[int, int], Chain1] = {}

    @property
    def dist(self) -> np.ndarray:
        return self.graph.distance_matrix

    def d(self, x: int, y: int) -> int:
        return int(self.dist[x, y])

    def compute(self, x: int, y: int) -> Chain1:
        """Uncached evaluation."""
        if x == y:
            self.graph.check(x)
            return Chain1()
        flow = geodesic_flow(self.graph, x, y, self.dist)
        return Chain1.from_oriented(flow.fractions())

    def q(self, x: int, y: int) -> Chain1:
        key = (x, y)
        c = self.memo.get(key)
        if c is None:
            rev = self.memo.get((y, x))
            c = -rev if rev is not None else self.compute(x, y)
            self.memo[key] = c
        return c

    def layer_sums(self, x: int, y: int) -> list[Fraction]:
        """Signed flow of ``q(x, y)`` across each distance layer ``k -> k + 1`` from ``x``."""
        dx = self.dist[x]
        n = self.d(x, y)
        sums = [Fraction(0)] * n
        for (u, v), c in self.q(x, y).coeffs.items():
            du, dv = int(dx[u]), int(dx[v])
            if dv == du + 1 and du < n:
                sums[du] += c
            elif du == dv + 1 and dv < n:
                sums[dv] -= c
        return sums

    def on_geodesic(self, x: int, y: int, z: int) -> bool:
        return self.d(x, z) + self.d(z, y) == self.d(x, y)

    def local_mass(self, x: int, y: int, z: int, rho: int) -> Fraction:
        """l1 mass of ``q(x, y)`` on support edges (oriented along the flow) whose tail is within ``rho`` of ``z``."""
        if not self.on_geodesic(x, y, z):
            raise DomainError(f"vertex {z} is not on a geodesic from {x} to {y}")
        dz = self.dist[z]
        return sum((c for (t, h), c in self.q(x, y).oriented_support() if dz[t] <= rho), Fraction(0))

    def max_local_coefficient(self, x: int, y: int, z: int, rho: int) -> Fraction:
        dz = self.dist[z]
        return max((c for (t, h), c in self.q(x, y).oriented_support() if dz[t] <= rho), default=Fraction(0))

    def geodesic_spread(self, x: int, y: int) -> int:
        """Largest distance from a support vertex of ``q(x, y)`` to the lex-least geodesic."""
        if x == y:
            return 0
        path = lex_least_geodesic(self.graph, x, y, self.dist[y])
        verts = sorted(self.q(x, y).support_vertices())
        return int(self.dist[np.ix_(verts, path)].min(axis=1).max())


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def sample_pairs(vertices: Sequence[int], count: int, seed: int) -> list[tuple[int, int]]:
    rng = random.Random(seed)
    vs = list(vertices)
    return [(rng.choice(vs), rng.choice(vs)) for _ in range(count)]


def sample_triples(vertices: Sequence[int], count: int, seed: int) -> list[tuple[int, int, int]]:
    rng = random.Random(seed)
    vs = list(vertices)
    return [(rng.choice(vs), rng.choice(vs), rng.choice(vs)) for _ in range(count)]


def on_geodesic_triples(
    table: BicombingTable,
    pairs: Iterable[tuple[int, int]],
    depth: np.ndarray | None = None,
    max_depth: int | None = None,
    per_pair: int | None = None,
    seed: int = 0,
) -> list[tuple[int, int, int]]:
    """Triples ``(x, y, z)`` with ``z`` an interior vertex of some geodesic from ``x`` to ``y``."""
    rng = random.Random(seed)
    out = []
    for x, y in pairs:
        dx, dy, d = table.dist[x], table.dist[y], table.d(x, y)
        if d < 2:
            continue
        cand = np.nonzero((dx + dy == d) & (dx > 0) & (dy > 0))[0]
        if depth is not None and max_depth is not None:
            cand = cand[depth[cand] <= max_depth]
        cand = sorted(int(z) for z in cand)
        if per_pair is not None and len(cand) > per_pair:
            cand = sorted(rng.sample(cand, per_pair))
        out.extend((x, y, z) for z in cand)
    return out


# --------------------------------------------------------------------------
# property suite
# --------------------------------------------------------------------------

@dataclass
class BicombingConstants:
    delta_supp: int = 0
    c1_ratio: Fraction = Fraction(0)
    delta_inf: Fraction = Fraction(0)
    delta_defect: Fraction = Fraction(0)
    rho: int | None = None
    lam: Fraction | None = None
    pairs_tested: int = 0
    triples_tested: int = 0
    local_triples_tested: int = 0
    translations_tested: int = 0
    provenance: str = BicombingTable.provenance
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = asdict(self)
        for k in ("c1_ratio", "delta_inf", "delta_defect", "lam"):
            out[k] = frac_str(out[k])
        return out


@dataclass
class SuiteResult:
    constants: BicombingConstants
    checks: dict[str, str]

    def to_json(self) -> dict:
        return {"constants": self.constants.to_json(), "checks": dict(self.checks)}


def check_exact_pair(table: BicombingTable, x: int, y: int) -> None:
    """B1, B4, norm and layer identities for one pair; raises on failure."""
    q = table.q(x, y)
    d = table.d(x, y)
    expected = {} if x == y else {y: Fraction(1), x: Fraction(-1)}
    if boundary(q) != expected:
        raise PropertyViolation("boundary of q(x,y) is not y - x", witness=(x, y))
    if x == y and not q.is_zero():
        raise PropertyViolation("q(x,x) is not zero", witness=(x, x))
    if table.compute(y, x) != -q:
        raise PropertyViolation("q(y,x) differs from -q(x,y)", witness=(x, y))
    if q.norm1() != d:
        raise PropertyViolation("l1 norm of q(x,y) differs from d(x,y)", witness=(x, y))
    if any(s != 1 for s in table.layer_sums(x, y)):
        raise PropertyViolation("layer-crossing sum differs from 1", witness=(x, y))


def translation_is_isometric_on(table: BicombingTable, translate: Callable[[int], int | None], x: int, radius: int) -> bool:
    """True when the translation maps the induced ball ``B_radius(x)`` onto ``B_radius(gx)``."""
    dist = table.dist
    ball = np.nonzero((dist[x] >= 0) & (dist[x] <= radius))[0]
    image = {}
    for v in ball:
        w = translate(int(v))
        if w is None:
            return False
        image[int(v)] = w
    gx = image[x]
    target = set(int(v) for v in np.nonzero((dist[gx] >= 0) & (dist[gx] <= radius))[0])
    if set(image.values()) != target:
        return False
    g = table.graph
    for v in image:
        mapped = {image[w] for w in g.neighbors(v) if w in image}
        if mapped != {w for w in g.neighbors(image[v]) if w in target}:
            return False
    return True


def check_equivariance(table: BicombingTable, translate: Callable[[int], int | None], x: int, y: int) -> bool:
    """Exact B3 check when the translation is admissible; returns whether it was tested."""
    d = table.d(x, y)
    if d < 0 or not translation_is_isometric_on(table, translate, x, d):
        return False
    gx, gy = translate(x), translate(y)
    moved = Chain1.from_oriented({(translate(u), translate(v)): c for (u, v), c in table.q(x, y).coeffs.items()})
    if moved != table.q(gx, gy):
        raise PropertyViolation("q(gx,gy) differs from g.q(x,y)", witness=(x, y, gx, gy))
    return True


def triangle_defect(table: BicombingTable, x: int, y: int, z: int) -> Chain1:
    return table.q(x, y) + table.q(y, z) + table.q(z, x)


def minimal_rho(table: BicombingTable, x: int, y: int, z: int) -> int:
    """Smallest radius with local mass at least one."""
    d = table.d(x, y)
    for rho in range(d + 1):
        if table.local_mass(x, y, z, rho) >= 1:
            return rho
    return d


def lambda_constant(table: BicombingTable, triples: Iterable[tuple[int, int, int]], rho: int) -> Fraction | None:
    """Max over admissible triples of ``1 / (largest coefficient near z)``; None when no triple is admissible."""
    lam = None
    for x, y, z in triples:
        m = table.max_local_coefficient(x, y, z, rho)
        if m == 0:
            continue
        val = 1 / m
        if lam is None or val > lam:
            lam = val
    return lam


def axiom_suite(
    table: BicombingTable,
    pairs: Sequence[tuple[int, int]],
    triples: Sequence[tuple[int, int, int]] = (),
    local_triples: Sequence[tuple[int, int, int]] = (),
    translations: Sequence[Callable[[int], int | None]] = (),
    rho: int | None = None,
) -> SuiteResult:
    """Check B1/B3/B4 exactly and measure the B2/B5 and local-mass constants.

    ``rho`` fixes the local-mass radius used for lambda; when omitted it is
    measured as the smallest radius giving local mass at least one on every
    local triple.
    """
    k = BicombingConstants()
    for x, y in pairs:
        check_exact_pair(table, x, y)
        q = table.q(x, y)
        d = table.d(x, y)
        if d > 0:
            k.c1_ratio = max(k.c1_ratio, q.norm1() / d)
            k.delta_supp = max(k.delta_supp, table.geodesic_spread(x, y))
        k.delta_inf = max(k.delta_inf, q.norminf())
        for tr in translations:
            k.translations_tested += check_equivariance(table, tr, x, y)
    k.pairs_tested = len(pairs)
    for x, y, z in triples:
        for a, b in ((x, y), (y, z), (z, x)):
            k.delta_inf = max(k.delta_inf, table.q(a, b).norminf())
        k.delta_defect = max(k.delta_defect, triangle_defect(table, x, y, z).norm1())
    k.triples_tested = len(triples)
    local_triples = list(local_triples)
    if local_triples:
        measured = max(minimal_rho(table, x, y, z) for x, y, z in local_triples)
        k.rho = measured if rho is None else rho
        k.lam = lambda_constant(table, local_triples, k.rho)
        k.metadata["measured_rho"] = measured
    k.local_triples_tested = len(local_triples)
    checks = {"B1": "pass", "B4": "pass", "norm": "pass", "layers": "pass"}
    checks["B3"] = "pass" if k.translations_tested else "untested"
    return SuiteResult(k, checks)
