"""Finitely presented group pairs, Cayley balls and finite-index subgroups.

Words are tuples of non-zero ints: generator ``i`` is ``i + 1`` and its
inverse is ``-(i + 1)``.  Text words use one letter per generator with
uppercase for inverses and optional powers, e.g. ``"abAB"`` or ``"a^2b^-1"``.
"""
from __future__ import annotations

import csv
import io
import json
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BudgetExceeded, DomainError, InputError, ModelingError, PresentationError, PropertyViolation
from .graphcore import Graph

Word = tuple[int, ...]

_TOKEN = re.compile(r"([A-Za-z])(?:\^(-?\d+))?")


def inverse(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def free_reduce(w) -> Word:
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(w: Word) -> Word:
    w = free_reduce(w)
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return w


def shortlex_key(w: Word):
    return (len(w), tuple((abs(x), x < 0) for x in w))


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise InputError("generator symbols must be distinct")
        for g in self.generators:
            if len(g) != 1 or not g.islower():
                raise InputError(f"generator {g!r} must be a single lowercase letter")
        for r in self.relators:
            if free_reduce(r) != tuple(r):
                raise InputError(f"relator {self.format(r)!r} is not freely reduced")

    @property
    def rank(self) -> int:
        return len(self.generators)

    def parse(self, text) -> Word:
        if isinstance(text, (list, tuple)) and all(isinstance(x, int) for x in text):
            return tuple(text)
        if isinstance(text, (list, tuple)):
            text = "".join(text)
        text = str(text).replace(" ", "")
        if text in ("", "1", "e"):
            return ()
        word: list[int] = []
        pos = 0
        for m in _TOKEN.finditer(text):
            if m.start() != pos:
                raise InputError(f"cannot parse word {text!r} at position {pos}")
            pos = m.end()
            letter, power = m.group(1), int(m.group(2) or 1)
            if letter.lower() not in self.generators:
                raise InputError(f"unknown generator {letter!r} in word {text!r}")
            gen = self.generators.index(letter.lower()) + 1
            if letter.isupper():
                gen = -gen
            if power < 0:
                gen, power = -gen, -power
            word.extend([gen] * power)
        if pos != len(text):
            raise InputError(f"cannot parse word {text!r} at position {pos}")
        return free_reduce(word)

    def format(self, w: Word) -> str:
        if not w:
            return "1"
        return "".join(
            self.generators[abs(x) - 1] if x > 0 else self.generators[abs(x) - 1].upper() for x in w
        )


def _is_commutator_set(pres: Presentation) -> bool:
    pairs = set()
    for r in pres.relators:
        r = cyclic_reduce(r)
        if len(r) != 4:
            return False
        a, b, c, d = r
        if not (c == -a and d == -b and abs(a) != abs(b)):
            return False
        pairs.add(frozenset((abs(a), abs(b))))
    k = pres.rank
    return pairs == {frozenset((i, j)) for i in range(1, k + 1) for j in range(i + 1, k + 1)}


class Group:
    """Exact normal forms for free, free-abelian, or rewriting-system presentations."""

    def __init__(self, pres: Presentation, rewriting=None):
        self.pres = pres
        self.rules: list[tuple[Word, Word]] = []
        if not pres.relators:
            self.kind = "free"
        elif _is_commutator_set(pres):
            self.kind = "free_abelian"
        elif rewriting:
            self.kind = "rewriting"
            self.rules = [(pres.parse(l), pres.parse(r)) for l, r in rewriting]
            for rel in pres.relators:
                if self.nf(rel) != ():
                    raise PresentationError(
                        f"rewriting system does not reduce relator {pres.format(rel)} to the identity"
                    )
        else:
            raise PresentationError(
                "presentation not desk-decidable: supply a confluent rewriting system "
                "(only free and free-abelian presentations are solved natively)"
            )

    @property
    def rank(self):
        return self.pres.rank

    def nf(self, w) -> Word:
        w = free_reduce(w)
        if self.kind == "free":
            return w
        if self.kind == "free_abelian":
            exps = [0] * self.rank
            for x in w:
                exps[abs(x) - 1] += 1 if x > 0 else -1
            out: list[int] = []
            for i, e in enumerate(exps):
                out.extend([(i + 1) if e > 0 else -(i + 1)] * abs(e))
            return tuple(out)
        changed = True
        while changed:
            changed = False
            for lhs, rhs in self.rules:
                n = len(lhs)
                for i in range(len(w) - n + 1):
                    if w[i : i + n] == lhs:
                        w = free_reduce(w[:i] + rhs + w[i + n :])
                        changed = True
                        break
                if changed:
                    break
        return w

    def mul(self, u: Word, v: Word) -> Word:
        return self.nf(tuple(u) + tuple(v))

    def inv(self, u: Word) -> Word:
        return self.nf(inverse(u))

    def exact_metric(self) -> bool:
        return self.kind in ("free", "free_abelian")

    def coset_key(self, w: Word, gens: frozenset[int]):
        """Canonical label of the left coset ``w<gens>``, or None if undecidable."""
        w = self.nf(w)
        if self.kind == "free":
            end = len(w)
            while end > 0 and abs(w[end - 1]) in gens:
                end -= 1
            return w[:end]
        if self.kind == "free_abelian":
            return tuple(x for x in w if abs(x) not in gens)
        return None


@dataclass(frozen=True)
class GroupPair:
    presentation: Presentation
    peripherals: tuple[tuple[Word, ...], ...]
    rewriting: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        for i, p in enumerate(self.peripherals):
            if not p:
                raise InputError(f"peripheral {i} has an empty generating set")

    @property
    def group(self) -> Group:
        g = self.__dict__.get("_group")
        if g is None:
            g = Group(self.presentation, self.rewriting or None)
            object.__setattr__(self, "_group", g)
        return g

    def peripheral_generators(self, i: int) -> frozenset[int]:
        """Generator indices (1-based) of peripheral ``i``; it must be a set of generators."""
        gens = set()
        for w in self.peripherals[i]:
            if len(w) != 1:
                raise ModelingError(
                    f"peripheral {i} must be generated by a subset of the generators for coset geometry"
                )
            gens.add(abs(w[0]))
        return frozenset(gens)

    def to_json(self) -> dict:
        p = self.presentation
        out = {
            "generators": list(p.generators),
            "relators": [p.format(r) for r in p.relators],
            "peripherals": [[p.format(w) for w in per] for per in self.peripherals],
        }
        if self.rewriting:
            out["rewriting"] = [list(r) for r in self.rewriting]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GroupPair":
        if not isinstance(data, dict) or "generators" not in data:
            raise InputError("presentation JSON must be an object with a 'generators' list")
        gens = tuple(data["generators"])
        pres0 = Presentation(gens)
        relators = tuple(pres0.parse(r) for r in data.get("relators", []))
        pres = Presentation(gens, relators)
        peripherals = tuple(tuple(pres.parse(w) for w in per) for per in data.get("peripherals", []))
        rewriting = tuple((str(l), str(r)) for l, r in data.get("rewriting", []))
        pair = cls(pres, peripherals, rewriting)
        pair.group  # validate word problem scope eagerly
        return pair


def load_pair(path) -> GroupPair:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return GroupPair.from_json(data)


def free_pair(rank: int = 2, peripherals=("a",)) -> GroupPair:
    names = "abcdefghijklmnopqrstuvwxyz"[:rank]
    return GroupPair.from_json({"generators": list(names), "peripherals": [[p] for p in peripherals]})


# --------------------------------------------------------------------------
# Cayley balls
# --------------------------------------------------------------------------

def letters(rank: int) -> list[int]:
    out = []
    for i in range(1, rank + 1):
        out += [i, -i]
    return out


@dataclass
class CayleyBall:
    pair: GroupPair
    radius: int
    graph: Graph
    words: list[Word]
    index: dict[Word, int]
    edge_gen: dict[tuple[int, int], int]
    origin: int = 0

    @property
    def group(self) -> Group:
        return self.pair.group

    @property
    def sphere_sizes(self) -> list[int]:
        sizes = [0] * (self.radius + 1)
        for w in self.words:
            sizes[self.length(w)] += 1
        return sizes

    def length(self, w: Word) -> int:
        return self._dist[self.index[w]]

    def __post_init__(self):
        self._dist = [int(d) for d in self.graph.bfs_array([self.origin])]

    def word_length(self, v: int) -> int:
        return self._dist[v]

    def translate(self, g: Word, v: int) -> int | None:
        return self.index.get(self.group.mul(g, self.words[v]))


def cayley_ball(pair: GroupPair, R: int) -> CayleyBall:
    if R < 0:
        raise InputError("radius must be non-negative")
    grp = pair.group
    gens = letters(grp.rank)
    words: list[Word] = [()]
    index: dict[Word, int] = {(): 0}
    depth = [0]
    queue = deque([0])
    while queue:
        u = queue.popleft()
        if depth[u] == R:
            continue
        for s in gens:
            w = grp.mul(words[u], (s,))
            if w not in index:
                index[w] = len(words)
                words.append(w)
                depth.append(depth[u] + 1)
                queue.append(index[w])
    edges = set()
    edge_gen = {}
    for u, w in enumerate(words):
        for s in range(1, grp.rank + 1):
            v = index.get(grp.mul(w, (s,)))
            if v is None or v == u:
                continue
            e = (min(u, v), max(u, v))
            if e in edges:
                continue
            edges.add(e)
            edge_gen[(u, v)] = s
    labels = [pair.presentation.format(w) for w in words]
    elabels = {(min(u, v), max(u, v)): pair.presentation.generators[s - 1] for (u, v), s in edge_gen.items()}
    g = Graph(len(words), edges, labels, elabels)
    ball = CayleyBall(pair, R, g, words, index, edge_gen)
    if any(ball.word_length(v) != depth[v] for v in range(len(words))):
        raise PresentationError("normal forms disagree with Cayley graph distances")
    return ball


@dataclass
class PeripheralCoset:
    peripheral: int
    vertices: tuple[int, ...]
    key: object
    clipped: bool
    connected: bool
    exact_metric: bool


def peripheral_cosets(ball: CayleyBall, pair: GroupPair) -> list[PeripheralCoset]:
    """Intersections of peripheral left cosets with the ball, one per coset."""
    grp = pair.group
    out: list[PeripheralCoset] = []
    for i in range(len(pair.peripherals)):
        gens = pair.peripheral_generators(i)
        groups: dict[object, list[int]] = {}
        if grp.exact_metric():
            for v, w in enumerate(ball.words):
                groups.setdefault(grp.coset_key(w, gens), []).append(v)
        else:
            # components of the peripheral-labelled subgraph
            parent = list(range(ball.graph.n))

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for (u, v), s in ball.edge_gen.items():
                if s in gens:
                    parent[find(u)] = find(v)
            for v in range(ball.graph.n):
                groups.setdefault(("component", find(v)), []).append(v)
        for key, verts in groups.items():
            verts = sorted(verts)
            vs = set(verts)
            clipped = any(
                ball.index.get(grp.mul(ball.words[v], (s,))) is None
                for v in verts
                for g in gens
                for s in (g, -g)
            )
            seen = {verts[0]}
            stack = [verts[0]]
            while stack:
                u = stack.pop()
                for w in ball.graph.neighbors(u):
                    if w in vs and w not in seen:
                        e = (u, w) if (u, w) in ball.edge_gen else (w, u)
                        if ball.edge_gen[e] in gens:
                            seen.add(w)
                            stack.append(w)
            out.append(PeripheralCoset(i, tuple(verts), key, clipped, len(seen) == len(verts), grp.exact_metric()))
    out.sort(key=lambda c: (c.peripheral, c.vertices[0]))
    return out


# --------------------------------------------------------------------------
# coset tables and subgroup enumeration
# --------------------------------------------------------------------------

@dataclass
class SubgroupRecord:
    """Finite-index subgroup as a standardized coset table (right action).

    ``table[c][i]`` is the coset ``c * x_{i+1}``; coset 0 is the subgroup.
    """

    index: int
    table: tuple[tuple[int, ...], ...]
    label: str = ""
    automaton: dict | None = field(default=None, repr=False)

    @property
    def basepoint(self) -> int:
        return 0

    def act(self, c: int, x: int) -> int:
        if x > 0:
            return self.table[c][x - 1]
        return self._inverse_table()[c][-x - 1]

    def _inverse_table(self):
        inv = self.__dict__.get("_inv")
        if inv is None:
            k = len(self.table[0]) if self.table else 0
            inv = [[0] * k for _ in range(self.index)]
            for c in range(self.index):
                for i in range(k):
                    inv[self.table[c][i]][i] = c
            self.__dict__["_inv"] = inv
        return inv

    def trace(self, c: int, w: Word) -> int:
        for x in w:
            c = self.act(c, x)
        return c

    def contains(self, w: Word) -> bool:
        return self.trace(0, w) == 0

    def coset_words(self) -> list[Word]:
        """Shortlex-least representative word of each coset."""
        k = len(self.table[0]) if self.table else 0
        reps: list[Word | None] = [None] * self.index
        reps[0] = ()
        queue = deque([0])
        while queue:
            c = queue.popleft()
            for x in letters(k):
                d = self.act(c, x)
                if reps[d] is None:
                    reps[d] = reps[c] + (x,)
                    queue.append(d)
        return reps  # type: ignore[return-value]

    def schreier_generators(self) -> list[Word]:
        reps = self.coset_words()
        k = len(self.table[0]) if self.table else 0
        tree = set()
        for d in range(1, self.index):
            w = reps[d]
            c = self.trace(0, w[:-1])
            tree.add((c, w[-1]) if w[-1] > 0 else (d, -w[-1]))
        gens = []
        for c in range(self.index):
            for i in range(1, k + 1):
                if (c, i) in tree:
                    continue
                d = self.act(c, i)
                gens.append(free_reduce(reps[c] + (i,) + inverse(reps[d])))
        return gens

    def to_csv(self, generators) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["coset"] + list(generators))
        for c, row in enumerate(self.table):
            w.writerow([c] + list(row))
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"index": self.index, "table": [list(r) for r in self.table], "label": self.label}


def _scan_relators(table, relators, cosets, inv_col):
    for c in range(cosets):
        for r in relators:
            cur = c
            ok = True
            for x in r:
                col = 2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1
                nxt = table[cur][col]
                if nxt < 0:
                    ok = False
                    break
                cur = nxt
            if ok and cur != c:
                return False
    return True


def enumerate_subgroups(pair: GroupPair, max_index: int, budget: int = 2_000_000) -> list[SubgroupRecord]:
    """All subgroups of index at most ``max_index`` (up to equality).

    Low-index search over standardized coset tables: the first undefined
    entry in (coset, column) order is always the one filled next, so each
    subgroup appears exactly once.
    """
    if max_index < 1:
        raise InputError("max_index must be at least 1")
    grp = pair.group
    k = grp.rank
    ncols = 2 * k
    relators = [cyclic_reduce(r) for r in pair.presentation.relators]
    relators = [r for r in relators if r]
    found: dict[int, list[SubgroupRecord]] = {n: [] for n in range(1, max_index + 1)}
    table = [[-1] * ncols for _ in range(max_index)]
    nodes = 0

    def inv_col(col):
        return col ^ 1

    def rec(cosets):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            done = [n for n in range(1, max_index + 1) if n < cosets]
            raise BudgetExceeded(f"low-index search exceeded {budget} nodes", completed=done)
        for c in range(cosets):
            for col in range(ncols):
                if table[c][col] < 0:
                    break
            else:
                continue
            break
        else:
            tab = tuple(tuple(table[c][2 * i] for i in range(k)) for c in range(cosets))
            found[cosets].append(SubgroupRecord(cosets, tab))
            return
        ic = inv_col(col)
        targets = list(range(cosets)) + ([cosets] if cosets < max_index else [])
        for t in targets:
            if table[t][ic] >= 0:
                continue
            if t == c and col != ic and table[c][ic] >= 0:
                continue
            table[c][col] = t
            table[t][ic] = c
            if _scan_relators(table, relators, cosets + (t == cosets), inv_col):
                rec(cosets + (1 if t == cosets else 0))
            table[c][col] = -1
            table[t][ic] = -1
            if t == cosets:
                for cc in range(ncols):
                    table[t][cc] = -1

    rec(1)
    out = []
    for n in range(1, max_index + 1):
        for j, rec_ in enumerate(found[n]):
            rec_.label = f"H{n}.{j}"
            out.append(rec_)
    if grp.kind == "free":
        for r in out:
            r.automaton = cross_check_stallings(r, k)
    return out


# --------------------------------------------------------------------------
# Stallings folding
# --------------------------------------------------------------------------

def stallings_fold(words, rank: int) -> tuple[int, dict[tuple[int, int], int]]:
    """Folded core graph of the subgroup generated by ``words`` (base vertex 0).

    Returns ``(n_vertices, transitions)`` with ``transitions[(v, i)] = w`` for
    positive generator ``i``; vertices are renumbered in BFS shortlex order.
    """
    parent: list[int] = [0]
    out_edges: list[dict[int, int]] = [{}]

    def new_vertex():
        parent.append(len(parent))
        out_edges.append({})
        return len(parent) - 1

    raw_edges: list[tuple[int, int, int]] = []
    for w in words:
        w = free_reduce(w)
        if not w:
            continue
        cur = 0
        for j, x in enumerate(w):
            nxt = 0 if j == len(w) - 1 else new_vertex()
            if x > 0:
                raw_edges.append((cur, x, nxt))
            else:
                raw_edges.append((nxt, -x, cur))
            cur = nxt

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    # fold: label-deterministic in both directions
    fwd: dict[tuple[int, int], int] = {}
    bwd: dict[tuple[int, int], int] = {}
    pending = list(raw_edges)
    while pending:
        u, i, v = pending.pop()
        u, v = find(u), find(v)
        merged = False
        if (u, i) in fwd and find(fwd[(u, i)]) != v:
            a, b = find(fwd[(u, i)]), v
            merged = True
        elif (v, i) in bwd and find(bwd[(v, i)]) != u:
            a, b = find(bwd[(v, i)]), u
            merged = True
        fwd[(u, i)] = v
        bwd[(v, i)] = u
        if merged:
            a, b = min(a, b), max(a, b)
            parent[b] = a
            # re-insert all edges touching the merged class
            old = list(fwd.items())
            fwd.clear()
            bwd.clear()
            pending.extend((uu, ii, vv) for (uu, ii), vv in old)
    fwd = {(find(u), i): find(v) for (u, i), v in fwd.items()}
    # renumber by BFS from base
    base = find(0)
    order = {base: 0}
    queue = deque([base])
    adj: dict[int, list[tuple[int, int]]] = {}
    for (u, i), v in fwd.items():
        adj.setdefault(u, []).append((i, v))
        adj.setdefault(v, []).append((-i, u))
    while queue:
        u = queue.popleft()
        for x in letters(rank):
            for lab, v in adj.get(u, []):
                if lab == x and v not in order:
                    order[v] = len(order)
                    queue.append(v)
    trans = {(order[u], i): order[v] for (u, i), v in fwd.items()}
    return len(order), trans


def cross_check_stallings(rec: SubgroupRecord, rank: int) -> dict:
    """Fold the Schreier generators and compare with the coset table."""
    gens = rec.schreier_generators()
    n, trans = stallings_fold(gens, rank)
    complete = len(trans) == n * rank
    # relabel coset table in the same BFS order
    reps = rec.coset_words()
    order = sorted(range(rec.index), key=lambda c: shortlex_key(reps[c]))
    relabel = {c: j for j, c in enumerate(order)}
    table_trans = {(relabel[c], i + 1): relabel[rec.table[c][i]] for c in range(rec.index) for i in range(rank)}
    if n != rec.index or not complete or trans != table_trans:
        raise PropertyViolation(
            f"Stallings automaton of {rec.label or 'subgroup'} disagrees with its coset table",
            witness={"index": rec.index, "folded_vertices": n},
        )
    edges = len(trans)
    stallings_rank = edges - n + 1
    if stallings_rank - 1 != rec.index * (rank - 1):
        raise PropertyViolation("Schreier index formula fails", witness=rec.to_json())
    return {"vertices": n, "edges": edges, "rank": stallings_rank, "generators": len(gens)}


def subgroup_from_generators(pair: GroupPair, words) -> SubgroupRecord:
    """Coset table of a finite-index subgroup of a free group from generating words."""
    if pair.group.kind != "free":
        raise ModelingError("generator input is only supported for free groups")
    k = pair.group.rank
    n, trans = stallings_fold([pair.presentation.parse(w) for w in words], k)
    if len(trans) != n * k:
        raise DomainError("generating set folds to a non-covering graph: subgroup has infinite index")
    table = tuple(tuple(trans[(c, i)] for i in range(1, k + 1)) for c in range(n))
    return standardize(SubgroupRecord(n, table))


def standardize(rec: SubgroupRecord) -> SubgroupRecord:
    k = len(rec.table[0])
    order = [0]
    pos = {0: 0}
    i = 0
    while i < len(order):
        c = order[i]
        for x in letters(k):
            d = rec.act(c, x)
            if d not in pos:
                pos[d] = len(order)
                order.append(d)
        i += 1
    table = tuple(tuple(pos[rec.table[c][j]] for j in range(k)) for c in order)
    return SubgroupRecord(rec.index, table, rec.label)


# --------------------------------------------------------------------------
# induced peripheral structure
# --------------------------------------------------------------------------

@dataclass
class InducedPeripheral:
    peripheral: int
    representative: Word
    representative_coset: int
    orbit: tuple[int, ...]
    generators: list[Word]


def induced_peripherals(H: SubgroupRecord, pair: GroupPair, ball_radius: int | None = None) -> list[InducedPeripheral]:
    """One record per double coset ``H g P_i``, with generators of ``H ∩ a P_i a^-1``.

    Representatives are shortlex-least coset words; generators are conjugated
    into the ambient alphabet.
    """
    grp = pair.group
    reps = H.coset_words()
    out = []
    for i, pgens in enumerate(pair.peripherals):
        pgens = [free_reduce(w) for w in pgens]
        unseen = set(range(H.index))
        while unseen:
            start = min(unseen, key=lambda c: shortlex_key(reps[c]))
            # BFS of the right P-action, tree words in the P alphabet (index, sign)
            tree: dict[int, list[tuple[int, int]]] = {start: []}
            queue = deque([start])
            while queue:
                c = queue.popleft()
                for j, w in enumerate(pgens):
                    for sign in (1, -1):
                        d = H.trace(c, w if sign > 0 else inverse(w))
                        if d not in tree:
                            tree[d] = tree[c] + [(j, sign)]
                            queue.append(d)
            orbit = tuple(sorted(tree))
            unseen -= set(orbit)

            def expand(pword):
                out_w: tuple[int, ...] = ()
                for j, sign in pword:
                    out_w += pgens[j] if sign > 0 else inverse(pgens[j])
                return out_w

            tree_edges = set()
            for d, pw in tree.items():
                if pw:
                    j, sign = pw[-1]
                    c = H.trace(start, expand(pw[:-1]))
                    tree_edges.add((c, j) if sign > 0 else (d, j))
            a = reps[start]
            if ball_radius is not None and len(a) > ball_radius:
                raise BudgetExceeded(f"double-coset representative longer than ball radius {ball_radius}")
            gens = []
            for c in orbit:
                for j, w in enumerate(pgens):
                    if (c, j) in tree_edges:
                        continue
                    d = H.trace(c, w)
                    p = expand(tree[c]) + w + inverse(expand(tree[d]))
                    conj = grp.nf(a + p + inverse(a))
                    if conj:
                        gens.append(conj)
            out.append(InducedPeripheral(i, a, start, orbit, gens))
    return out
