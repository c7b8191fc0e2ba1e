"""Two-level lexicographic message passing on trees and truncated balls.

A message on the directed edge (u, v) summarises the component of v away
from u.  Messages are pairs (level, z) compared lexicographically and
satisfy, on every interior directed edge,

    msg(u, v) = maxlex( (0,0), maxlex_{u' ~ v, u' != u} (k, w(v,u')) - msg(v, u') )

where pair arithmetic is componentwise and the maximum of an empty list
is the bottom element (-1, -inf).  An edge {u, v} belongs to the matching
iff msg(u, v) + msg(v, u) < (k, w(u, v)) lexicographically; equivalently
(vertex rule) u is matched to the argmax over v ~ u of
(k, w(u,v)) - msg(u, v) whenever that maximum exceeds (0, 0).

On truncated balls the unknown exterior enters only through the messages
(parent(b), b) at boundary vertices b; pinning those to (0,0) ["the
exterior never matches b"], (k,+inf) ["b is matched outward"], or to
i.i.d. draws from the stationary message law reproduces respectively the
leaf-like, forbidden and typical environments.  The recursion reverses
the pointwise lexicographic order of boundary conditions at every
application, so the two constant extreme conditions bound every other
condition edge by edge; where the two extremal sweeps agree the message
is certified independent of everything outside the ball.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exact import BLOCKING, FREE, MANDATORY, CycleError, Matching
from .randgraph import WeightedGraph

__all__ = [
    "BOTTOM",
    "ZERO",
    "top_msg",
    "FieldInconsistencyError",
    "RegimeError",
    "MessageField",
    "SqueezeResult",
    "sweep_tree",
    "extract_matching",
    "flexibility",
    "sweep_bounded",
    "squeeze",
    "macroscopic_sweep",
    "macroscopic_squeeze",
    "classify_edges_from_levels",
    "scalar_sweep_eps",
    "field_to_text",
    "UNKNOWN",
]

BOTTOM = (-1, float("-inf"))
ZERO = (0, 0.0)
UNKNOWN = "unknown"


def top_msg(k: int):
    """Boundary value forcing the edge out of the matching."""
    return (k, float("inf"))


class FieldInconsistencyError(AssertionError):
    """Edge rule and vertex rule disagreed on a supposedly valid field."""


class RegimeError(ValueError):
    """Operation requires a different macroscopic regime."""


@dataclass
class MessageField:
    """Messages on all directed edges of a forest plus boundary bookkeeping."""

    k: int
    messages: dict
    boundary_spec: dict

    def msg(self, u: int, v: int):
        return self.messages[(u, v)]


def _orient(g: WeightedGraph, avoid=frozenset()):
    """(parent, bfs_order); raises CycleError unless g is a forest.

    Components are rooted at a vertex outside `avoid` whenever one exists,
    so that pinned boundary vertices are BFS leaves.
    """
    parent = [-2] * g.n
    order = []
    root_pref = g.root_vertex() if g.n else 0
    starts = [v for v in [root_pref] if v not in avoid]
    starts += [v for v in range(g.n) if v != root_pref and v not in avoid]
    starts += [v for v in range(g.n) if v in avoid]
    tree_edges = 0
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
                    raise CycleError("message passing requires a forest")
                parent[w] = v
                tree_edges += 1
                queue.append(w)
    if tree_edges != g.m:
        raise CycleError("message passing requires a forest")
    return parent, order


def _sub(kw, msg):
    return (kw[0] - msg[0], kw[1] - msg[1])


def _resolve_boundary(g: WeightedGraph, k: int, spec):
    """Normalise a boundary spec to {vertex: message}."""
    if spec is None:
        return {}
    if isinstance(spec, str):
        spec = {b: spec for b in g.boundary}
    out = {}
    for b, val in spec.items():
        if val == "zero":
            out[b] = ZERO
        elif val == "top":
            out[b] = top_msg(k)
        else:
            level, z = val
            out[b] = (int(level), float(z))
    return out


def _sweep(g: WeightedGraph, k: int, pinned: dict) -> MessageField:
    """Two-pass computation of all directed-edge messages.

    pinned maps a boundary vertex b to the exogenous message (parent(b), b).
    Pinned vertices must not have children inside g (true for radius
    boundaries of tree balls).
    """
    parent, order = _orient(g, avoid=frozenset(pinned))
    kw = {}
    for (u, v), w in g.weights.items():
        kw[(u, v)] = (k, w)
        kw[(v, u)] = (k, w)

    up = [ZERO] * g.n  # up[v] = msg(parent(v), v)
    for v in reversed(order):
        if v in pinned:
            up[v] = pinned[v]
            if any(parent[w] == v for w in g.adjacency[v]):
                raise FieldInconsistencyError(
                    f"pinned boundary vertex {v} has interior children"
                )
            continue
        best = ZERO
        for w in g.adjacency[v]:
            if parent[w] != v:
                continue
            cand = _sub(kw[(v, w)], up[w])
            if cand > best:
                best = cand
        up[v] = best

    down = [ZERO] * g.n  # down[v] = msg(v, parent(v))
    for v in order:
        # candidates entering v: from children (up) and from the parent (down)
        cands = []
        for w in g.adjacency[v]:
            if parent[w] == v:
                cands.append((w, _sub(kw[(v, w)], up[w])))
            elif w == parent[v]:
                cands.append((w, _sub(kw[(v, w)], down[v])))
        top1, top2 = BOTTOM, BOTTOM
        arg1 = None
        for w, cand in cands:
            if cand > top1:
                top1, top2, arg1 = cand, top1, w
            elif cand > top2:
                top2 = cand
        for w in g.adjacency[v]:
            if parent[w] != v:
                continue
            best = top2 if arg1 == w else top1
            down[w] = best if best > ZERO else ZERO

    messages = {}
    for v in order:
        p = parent[v]
        if p >= 0:
            messages[(p, v)] = up[v]
            messages[(v, p)] = down[v]
    return MessageField(k=k, messages=messages, boundary_spec=dict(pinned))


def sweep_tree(g: WeightedGraph, k: int) -> MessageField:
    """Exact messages on a finite forest (no boundary conditions).

    On finite forests the message (u, v) coincides with the componentwise
    marginal gain (delta size, delta weight) of letting v be matched
    inside its subtree, so extraction reproduces the lexicographic
    optimum for any k >= 1.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    return _sweep(g, k, {})


def sweep_bounded(g: WeightedGraph, k: int, boundary_spec) -> MessageField:
    """Messages on a truncated tree with pinned boundary conditions.

    boundary_spec is "zero", "top", or a dict {boundary vertex: "zero" |
    "top" | (level, z)}; sampled conditions come from a pluggable source
    (e.g. rde.ZetaSampler draws).
    """
    return _sweep(g, k, _resolve_boundary(g, k, boundary_spec))


def extract_matching(g: WeightedGraph, field: MessageField) -> Matching:
    """Edges where msg(u,v) + msg(v,u) < (k, w) lexicographically.

    Validates structural disjointness and cross-checks the equivalent
    vertex rule; a disagreement means the field is not a valid fixed
    point of the recursion and raises FieldInconsistencyError.  Exact
    weight ties (possible only under atomic weight laws) can break the
    strict decision rule and are reported the same way: extraction
    assumes atomless weights.
    """
    k = field.k
    chosen = []
    matched_of = {}
    for u, v in g.edges():
        a = field.messages[(u, v)]
        b = field.messages[(v, u)]
        if (a[0] + b[0], a[1] + b[1]) < (k, g.weights[(u, v)]):
            chosen.append((u, v))
            if u in matched_of or v in matched_of:
                raise FieldInconsistencyError("edge rule selected incident edges")
            matched_of[u] = v
            matched_of[v] = u

    # vertex rule: u matched to argmax of (k, w(u,v)) - msg(u, v) when > (0,0)
    for u in range(g.n):
        if u in field.boundary_spec:
            # exterior candidates are invisible here; the edge rule already
            # accounts for them through the pinned message
            continue
        best, arg = ZERO, None
        for v in g.adjacency[u]:
            cand = _sub((k, g.weights[(min(u, v), max(u, v))]), field.messages[(u, v)])
            if cand > best:
                best, arg = cand, v
        if matched_of.get(u) != arg and not (arg is None and u not in matched_of):
            raise FieldInconsistencyError(
                f"vertex rule ({u} -> {arg}) disagrees with edge rule "
                f"({u} -> {matched_of.get(u)})"
            )
    return Matching.from_edges(g, chosen)


def flexibility(g: WeightedGraph, field: MessageField) -> dict:
    """Per-vertex self-loop value maxlex over v ~ u of (k, w) - msg(u, v).

    A vertex is unmatched exactly when its flexibility is below (0, 0);
    isolated vertices get the bottom element.
    """
    out = {}
    for u in range(g.n):
        best = BOTTOM
        for v in g.adjacency[u]:
            cand = _sub((field.k, g.weights[(min(u, v), max(u, v))]), field.messages[(u, v)])
            if cand > best:
                best = cand
        out[u] = best
    return out


@dataclass
class SqueezeResult:
    """Per-directed-edge interval bounds valid for every boundary condition."""

    k: int
    lower: dict
    upper: dict
    certified: dict

    def certified_fraction(self, keys=None) -> float:
        keys = list(self.certified.keys()) if keys is None else list(keys)
        if not keys:
            return 1.0
        return sum(bool(self.certified[e]) for e in keys) / len(keys)


def squeeze(g: WeightedGraph, k: int, radius: int | None = None) -> SqueezeResult:
    """Extremal all-zero / all-top sweeps and per-edge certification.

    One application of the recursion reverses the boundary order, so for
    each directed edge the two extremal sweeps bracket the message under
    *every* boundary condition; equality certifies independence from the
    exterior.  `radius` is documentation only (the ball already carries
    its boundary set).
    """
    lo_field = sweep_bounded(g, k, "zero")
    hi_field = sweep_bounded(g, k, "top")
    lower, upper, certified = {}, {}, {}
    for key, a in lo_field.messages.items():
        b = hi_field.messages[key]
        lower[key] = min(a, b)
        upper[key] = max(a, b)
        certified[key] = a == b
    return SqueezeResult(k=k, lower=lower, upper=upper, certified=certified)


def macroscopic_sweep(g: WeightedGraph, boundary: int) -> dict:
    """Weightless level-only recursion with constant boundary level 0 or 1.

    level(u, v) = max(0, max_{u' ~ v, u' != u} (1 - level(v, u'))), the
    levels-only projection of the message recursion in the single-jump
    regime.
    """
    if boundary not in (0, 1):
        raise RegimeError("boundary level must be 0 or 1")
    parent, order = _orient(g, avoid=g.boundary)
    up = [0] * g.n
    for v in reversed(order):
        if v in g.boundary:
            up[v] = boundary
            continue
        best = 0
        for w in g.adjacency[v]:
            if parent[w] == v and 1 - up[w] > best:
                best = 1 - up[w]
        up[v] = best

    down = [0] * g.n
    for v in order:
        cands = []
        for w in g.adjacency[v]:
            if parent[w] == v:
                cands.append((w, 1 - up[w]))
            elif w == parent[v]:
                cands.append((w, 1 - down[v]))
        top1, top2, arg1 = -2, -2, None
        for w, cand in cands:
            if cand > top1:
                top1, top2, arg1 = cand, top1, w
            elif cand > top2:
                top2 = cand
        for w in g.adjacency[v]:
            if parent[w] != v:
                continue
            best = top2 if arg1 == w else top1
            down[w] = max(0, best)

    levels = {}
    for v in order:
        p = parent[v]
        if p >= 0:
            levels[(p, v)] = up[v]
            levels[(v, p)] = down[v]
    return levels


def macroscopic_squeeze(g: WeightedGraph) -> tuple[dict, dict]:
    """(levels, certified) from the two extremal level sweeps."""
    lo = macroscopic_sweep(g, 0)
    hi = macroscopic_sweep(g, 1)
    levels, certified = {}, {}
    for key, a in lo.items():
        levels[key] = a
        certified[key] = a == hi[key]
    return levels, certified


def classify_edges_from_levels(g: WeightedGraph, levels: dict, certified: dict | None = None) -> dict:
    """Classify edges from certified directed levels (single-jump regime).

    An edge is mandatory iff the two directed levels sum below 1, blocking
    iff above 1, free iff exactly 1; edges with an uncertified direction
    are reported as "unknown", never guessed.
    """
    out = {}
    for u, v in g.edges():
        ok = certified is None or (certified.get((u, v)) and certified.get((v, u)))
        if not ok or (u, v) not in levels or (v, u) not in levels:
            out[(u, v)] = UNKNOWN
            continue
        s = levels[(u, v)] + levels[(v, u)]
        out[(u, v)] = MANDATORY if s < 1 else BLOCKING if s > 1 else FREE
    return out


def scalar_sweep_eps(g: WeightedGraph, eps: float):
    """One-dimensional sweep for weights 1 + eps*w and its matching.

    Z(u, v) = max(0, max_{u' ~ v} (1 + eps*w(v,u') - Z(v, u'))) with the
    inclusion rule 1 + eps*w(u,v) > Z(u,v) + Z(v,u).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    parent, order = _orient(g)

    def weps(u, v):
        return 1.0 + eps * g.weights[(min(u, v), max(u, v))]

    up = [0.0] * g.n
    for v in reversed(order):
        best = 0.0
        for w in g.adjacency[v]:
            if parent[w] == v:
                cand = weps(v, w) - up[w]
                if cand > best:
                    best = cand
        up[v] = best
    down = [0.0] * g.n
    for v in order:
        cands = []
        for w in g.adjacency[v]:
            if parent[w] == v:
                cands.append((w, weps(v, w) - up[w]))
            elif w == parent[v]:
                cands.append((w, weps(v, w) - down[v]))
        top1, top2, arg1 = float("-inf"), float("-inf"), None
        for w, cand in cands:
            if cand > top1:
                top1, top2, arg1 = cand, top1, w
            elif cand > top2:
                top2 = cand
        for w in g.adjacency[v]:
            if parent[w] != v:
                continue
            best = top2 if arg1 == w else top1
            down[w] = max(0.0, best)

    field = {}
    for v in order:
        p = parent[v]
        if p >= 0:
            field[(p, v)] = up[v]
            field[(v, p)] = down[v]
    chosen = [
        (u, v)
        for u, v in g.edges()
        if field[(u, v)] + field[(v, u)] < weps(u, v)
    ]
    return field, Matching.from_edges(g, chosen)


def field_to_text(field: MessageField) -> str:
    """One line per directed edge: `u v level z`; bottom encoded as level=-1."""
    lines = []
    for (u, v), (level, z) in sorted(field.messages.items()):
        lines.append(f"{u} {v} {level} {z:.17g}")
    return "\n".join(lines) + "\n"
