"""Ground-truth oracles for optimal matchings on small graphs and forests.

"Optimal" always means maximal in the lexicographic order (cardinality,
total weight).  Enumeration-based oracles are capped at desk scale
(26 edges for optima, 22 for maximum-matching structure); the forest
dynamic program and certified leaf removal scale further.
"""

from __future__ import annotations

from dataclasses import dataclass

from .randgraph import RngSeed, WeightedGraph

__all__ = [
    "EnumerationLimitError",
    "NotAMatchingError",
    "CycleError",
    "Matching",
    "Perf",
    "EdgeClass",
    "MANDATORY",
    "BLOCKING",
    "FREE",
    "brute_force_opt",
    "tree_opt_dp",
    "leaf_removal",
    "mandatory_blocking",
    "uniform_max_matching",
    "perf_of",
    "matching_to_text",
]

_OPT_EDGE_CAP = 26
_ENUM_EDGE_CAP = 22

MANDATORY = "mandatory"
BLOCKING = "blocking"
FREE = "free"


class EnumerationLimitError(ValueError):
    """Instance exceeds the enumeration edge cap."""


class NotAMatchingError(ValueError):
    """Edge set has two edges sharing a vertex."""


class CycleError(ValueError):
    """Graph expected to be a forest contains a cycle."""


@dataclass(frozen=True)
class Matching:
    """Vertex-disjoint edge set with cached size and total weight."""

    edges: frozenset
    weight: float

    @property
    def size(self) -> int:
        return len(self.edges)

    @staticmethod
    def from_edges(g: WeightedGraph, edges) -> "Matching":
        es = frozenset(tuple(sorted(e)) for e in edges)
        seen = set()
        for u, v in es:
            if u in seen or v in seen:
                raise NotAMatchingError(f"vertex reused in {sorted(es)}")
            seen.update((u, v))
        return Matching(es, sum(g.weights[e] for e in es))

    def covers(self, v: int) -> bool:
        return any(v in e for e in self.edges)


@dataclass(frozen=True)
class Perf:
    """Performance pair, compared lexicographically.

    Vertex-rooted: (matched vertices / n, 2 * matched weight / n).
    Edge-rooted:   (|M| / |E|, matched weight / |E|).
    """

    match_prob: float
    expected_weight: float

    def as_tuple(self):
        return (self.match_prob, self.expected_weight)


def _check_cap(g: WeightedGraph, cap: int) -> None:
    if g.m > cap:
        raise EnumerationLimitError(f"{g.m} edges exceeds enumeration cap {cap}")


def _edge_conflicts(edges):
    """conflicts[i] = indices j > i of edges sharing a vertex with edge i."""
    conflicts = []
    for i, (u, v) in enumerate(edges):
        conflicts.append([j for j in range(i + 1, len(edges)) if u in edges[j] or v in edges[j]])
    return conflicts


def brute_force_opt(g: WeightedGraph) -> Matching:
    """Lexicographic (size, weight) optimum by exhaustive matching enumeration.

    Work is proportional to the number of matchings.  Ties (possible only
    under atomic weights) are broken toward the lexicographically smallest
    sorted edge-index sequence, which the enumeration order delivers for
    free: earlier-index selections are explored first and strict
    improvement is required to replace the incumbent.
    """
    _check_cap(g, _OPT_EDGE_CAP)
    edges = g.edges()
    weights = [g.weights[e] for e in edges]
    m = len(edges)
    blocked = [False] * m
    conflicts = _edge_conflicts(edges)
    best = {"size": 0, "weight": 0.0, "sel": ()}
    sel: list[int] = []

    def recurse(start: int, size: int, weight: float) -> None:
        if size > best["size"] or (size == best["size"] and weight > best["weight"] + 0.0):
            best["size"], best["weight"], best["sel"] = size, weight, tuple(sel)
        for i in range(start, m):
            if blocked[i]:
                continue
            newly = [j for j in conflicts[i] if not blocked[j]]
            for j in newly:
                blocked[j] = True
            sel.append(i)
            recurse(i + 1, size + 1, weight + weights[i])
            sel.pop()
            for j in newly:
                blocked[j] = False

    recurse(0, 0, 0.0)
    return Matching.from_edges(g, [edges[i] for i in best["sel"]])


def _orient_forest(g: WeightedGraph):
    """Parent pointers and BFS order for each component; error on cycles."""
    parent = [-2] * g.n
    order = []
    root_pref = g.root_vertex() if g.n else 0
    starts = [root_pref] + [v for v in range(g.n) if v != root_pref]
    seen_edges = 0
    for s in starts:
        if parent[s] != -2:
            continue
        parent[s] = -1
        queue = [s]
        head = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            order.append(v)
            for w in g.adjacency[v]:
                if w == parent[v]:
                    continue
                if parent[w] != -2:
                    raise CycleError("graph contains a cycle")
                parent[w] = v
                seen_edges += 1
                queue.append(w)
    if seen_edges != g.m:
        raise CycleError("graph contains a cycle")
    return parent, order


def tree_opt_dp(g: WeightedGraph, objective: str = "lex"):
    """Exact optimum on forests via the with/without-root dynamic program.

    objective="lex" optimises (size, weight) pairs added componentwise and
    compared lexicographically; objective="weight" optimises total weight
    alone (matchings may then leave vertices exposed whenever every
    incident marginal gain is negative).

    Returns (matching, gains) where gains[(u, v)] is the marginal value of
    allowing v to be matched inside the component of v seen from u, i.e.
    OPT(subtree at v away from u) - OPT(same subtree with v deleted).
    """
    if objective not in ("lex", "weight"):
        raise ValueError(f"objective must be 'lex' or 'weight', got {objective!r}")
    lex = objective == "lex"
    parent, order = _orient_forest(g)

    def value(size: int, weight: float):
        return (size, weight) if lex else weight

    zero = value(0, 0.0)

    # upward pass: for v with parent p, opt_in[v] = OPT of subtree(v),
    # opt_out[v] = OPT of subtree(v) with v unmatchable
    opt_in = [zero] * g.n
    opt_out = [zero] * g.n
    choice = [None] * g.n  # child matched to v in opt_in, or None
    for v in reversed(order):
        kids = [w for w in g.adjacency[v] if parent[w] == v]
        base = zero
        for w in kids:
            base = _vadd(base, opt_in[w], lex)
        opt_out[v] = base
        best = base
        best_child = None
        for w in kids:
            cand = _vadd(
                _vadd(base, _vneg(opt_in[w], lex), lex),
                _vadd(opt_out[w], value(1, g.weight(v, w)), lex),
                lex,
            )
            if cand > best:
                best, best_child = cand, w
        opt_in[v] = best
        choice[v] = best_child

    # extract the matching top-down: a vertex matched to its parent
    # contributes opt_out (all its children revert to their opt_in)
    matched_edges = []
    mode = ["in"] * g.n
    for v in order:
        if mode[v] == "used":
            continue
        w = choice[v]
        if w is not None:
            matched_edges.append((v, w))
            mode[w] = "used"

    # marginal gains on all directed edges: gains[(u,v)] refers to the
    # subtree at v away from u; needs a rerooting (second) pass
    gains = {}
    down = [zero] * g.n  # gain of the complement component seen from v
    for v in order:
        kids = [w for w in g.adjacency[v] if parent[w] == v]
        for w in kids:
            gains[(v, w)] = _vsub(opt_in[w], opt_out[w], lex)
    for v in order:
        p = parent[v]
        candidates = []
        for w in g.adjacency[v]:
            if parent[w] == v:
                candidates.append((w, _vsub(value(1, g.weight(v, w)), gains[(v, w)], lex)))
            elif w == p:
                candidates.append((w, _vsub(value(1, g.weight(v, w)), down[v], lex)))
        # down[w] for children w: gain of matching w upward into v's side
        for w in g.adjacency[v]:
            if parent[w] != v:
                continue
            best = zero
            for x, cand in candidates:
                if x != w and cand > best:
                    best = cand
            down[w] = best
            gains[(w, v)] = best
    matching = Matching.from_edges(g, matched_edges)
    if lex:
        _assert_no_easy_improvement(g, matching)
    return matching, gains


def _vadd(a, b, lex: bool):
    return (a[0] + b[0], a[1] + b[1]) if lex else a + b


def _vneg(a, lex: bool):
    return (-a[0], -a[1]) if lex else -a


def _vsub(a, b, lex: bool):
    return (a[0] - b[0], a[1] - b[1]) if lex else a - b


def _assert_no_easy_improvement(g: WeightedGraph, matching: Matching) -> None:
    covered = {v for e in matching.edges for v in e}
    for u, v in g.edges():
        if u not in covered and v not in covered and (u, v) not in matching.edges:
            raise AssertionError("tree DP left an augmentable edge exposed")


def leaf_removal(g: WeightedGraph, seed: RngSeed):
    """Karp-Sipser leaf removal: match a leaf to its neighbour and delete both.

    When no leaves remain and edges are left, a uniformly random remaining
    edge is matched (losing the exactness certificate) and leaf removal
    resumes.  Returns (matching, exact, removed_core_size) where
    removed_core_size counts vertices deleted during random-edge steps.
    """
    rng = seed.generator()
    adj = [set(nb) for nb in g.adjacency]
    alive = [True] * g.n
    matched = []
    leaves = [v for v in range(g.n) if len(adj[v]) == 1]
    exact = True
    removed_core = 0
    edges_left = g.m

    def remove_vertex(v: int) -> None:
        alive[v] = False
        for w in list(adj[v]):
            adj[w].discard(v)
            adj[v].discard(w)
            if len(adj[w]) == 1:
                leaves.append(w)

    while edges_left > 0:
        while leaves:
            v = leaves.pop()
            if not alive[v] or len(adj[v]) != 1:
                continue
            u = next(iter(adj[v]))
            matched.append((v, u))
            # deleting u and v removes deg(u) + deg(v) - 1 edges
            edges_left -= len(adj[u]) + len(adj[v]) - 1
            remove_vertex(v)
            remove_vertex(u)
        if edges_left <= 0:
            break
        # 2-core phase: uniform random remaining edge
        exact = False
        live_edges = [
            (u, v) for u in range(g.n) if alive[u] for v in adj[u] if u < v
        ]
        if not live_edges:
            break
        u, v = live_edges[int(rng.integers(0, len(live_edges)))]
        matched.append((u, v))
        edges_left -= len(adj[u]) + len(adj[v]) - 1
        remove_vertex(u)
        remove_vertex(v)
        removed_core += 2
    return Matching.from_edges(g, matched), exact, removed_core


def _enumerate_max_matchings(g: WeightedGraph):
    """Yield statistics of all maximum-cardinality matchings.

    Returns (max_size, count, intersection, union, samples) where samples
    is the list of all maximum matchings as frozensets of edges.
    """
    _check_cap(g, _ENUM_EDGE_CAP)
    edges = g.edges()
    m = len(edges)
    conflicts = _edge_conflicts(edges)
    blocked = [False] * m
    state = {"max": 0, "all": []}
    sel: list[int] = []

    def recurse(start: int) -> None:
        if len(sel) > state["max"]:
            state["max"] = len(sel)
            state["all"] = [tuple(sel)]
        elif len(sel) == state["max"] and state["max"] > 0:
            state["all"].append(tuple(sel))
        elif state["max"] == 0 and not state["all"]:
            state["all"] = [()]
        for i in range(start, m):
            if blocked[i]:
                continue
            newly = [j for j in conflicts[i] if not blocked[j]]
            for j in newly:
                blocked[j] = True
            sel.append(i)
            recurse(i + 1)
            sel.pop()
            for j in newly:
                blocked[j] = False

    recurse(0)
    sets = [frozenset(edges[i] for i in sel_) for sel_ in state["all"]]
    inter = frozenset.intersection(*sets) if sets else frozenset()
    union = frozenset.union(*sets) if sets else frozenset()
    return state["max"], len(sets), inter, union, sets


def mandatory_blocking(g: WeightedGraph) -> dict:
    """Classify each edge against the set of maximum-cardinality matchings.

    mandatory: in all of them; blocking: in none; free: otherwise.
    """
    _, _, inter, union, _ = _enumerate_max_matchings(g)
    out = {}
    for e in g.edges():
        if e in inter:
            out[e] = MANDATORY
        elif e not in union:
            out[e] = BLOCKING
        else:
            out[e] = FREE
    return out


def uniform_max_matching(g: WeightedGraph, seed: RngSeed) -> Matching:
    """Exact uniform sample from the maximum-cardinality matchings."""
    _, count, _, _, sets = _enumerate_max_matchings(g)
    rng = seed.generator()
    pick = sets[int(rng.integers(0, count))]
    return Matching.from_edges(g, pick)


def perf_of(g: WeightedGraph, matching: Matching) -> tuple[Perf, Perf]:
    """(vertex-rooted, edge-rooted) performance of a matching.

    The identity perf_V = (2|E|/n) * perf_E holds exactly on finite graphs.
    """
    for e in matching.edges:
        if e not in g.weights:
            raise NotAMatchingError(f"edge {e} not in graph")
    Matching.from_edges(g, matching.edges)  # re-validates disjointness
    n = max(g.n, 1)
    perf_v = Perf(2.0 * matching.size / n, 2.0 * matching.weight / n)
    if g.m == 0:
        return perf_v, Perf(0.0, 0.0)
    perf_e = Perf(matching.size / g.m, matching.weight / g.m)
    return perf_v, perf_e


def matching_to_text(matching: Matching) -> str:
    lines = [f"size={matching.size} weight={matching.weight:.17g}"]
    for u, v in sorted(matching.edges):
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"
