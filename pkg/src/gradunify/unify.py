"""Graded unification.

Structure is combined exactly as in classical graph unification, except
that two atoms never clash: they are mixed by averaging their weights.
Alongside the combined structure, a strength in [0, 1] is reported:

    strength = actual compatibility / perfect compatibility

where both sums range over the atomic paths of the two inputs.  A path
present in only one input contributes its priority to both sums; a
shared path contributes the mean priority times the atoms' overlap to
the actual sum, and the mean priority alone to the perfect sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .avm import (
    DEFAULT_PRIORITY,
    EMPTY,
    Atom,
    FeatureStructure,
    Node,
    atomic_paths,
    get_path,
)


class UnificationClash(Exception):
    """An atom met a non-empty complex node at the same path."""

    def __init__(self, path=()):
        super().__init__(f"atom/complex clash at {'.'.join(path) or '<root>'}")
        self.path = tuple(path)


@dataclass(frozen=True)
class UnifyResult:
    """Outcome of :func:`unify_graded`.

    ``result`` is ``None`` when unification failed, either structurally
    (``clash`` is set and strength is 0) or because the strength fell
    below the threshold.
    """

    result: Optional[Node]
    strength: float
    clash: bool = False

    @property
    def ok(self) -> bool:
        return self.result is not None

    def __bool__(self) -> bool:
        return self.ok


def unify_atoms(a: Atom, b: Atom) -> Atom:
    """Union of disjuncts, each weighted by the mean of its two weights."""
    syms = sorted(set(a) | set(b))
    return Atom({s: (a.weight(s) + b.weight(s)) / 2.0 for s in syms})


def atom_strength(a: Atom, b: Atom) -> float:
    """Total weight shared by two atoms: sum of per-disjunct minima."""
    return sum(min(w, b[s]) for s, w in a.items() if s in b)


def _is_nonempty_complex(node) -> bool:
    return isinstance(node, FeatureStructure) and len(node) > 0


def _path_terms(a: Node, b: Node):
    """Yield ``(priority, score, atom_a, atom_b)`` per atomic path of a or b.

    Unique paths score 1 and carry ``None`` for the missing atom.
    """
    ia = {p: (atom, pri) for p, atom, pri in atomic_paths(a)}
    ib = {p: (atom, pri) for p, atom, pri in atomic_paths(b)}
    for path in sorted(ia.keys() | ib.keys()):
        if path in ia and path in ib:
            (xa, qa), (xb, qb) = ia[path], ib[path]
            yield (qa + qb) / 2.0, atom_strength(xa, xb), xa, xb
        elif path in ia:
            if _is_nonempty_complex(get_path(b, path)):
                raise UnificationClash(path)
            yield ia[path][1], 1.0, ia[path][0], None
        else:
            if _is_nonempty_complex(get_path(a, path)):
                raise UnificationClash(path)
            yield ib[path][1], 1.0, None, ib[path][0]


def actual_compatibility(a: Node, b: Node) -> float:
    """Priority-weighted agreement of ``a`` and ``b``.

    Raises :class:`UnificationClash` if some path is atomic in one input
    and a non-empty complex node in the other.
    """
    return sum(pri * score for pri, score, _, _ in _path_terms(a, b))


def perfect_compatibility(a: Node, b: Node) -> float:
    """The actual compatibility the pair would have if every atom agreed."""
    return sum(pri for pri, _, _, _ in _path_terms(a, b))


# --- working graph -------------------------------------------------------


class _Cell:
    """Mutable union-find node used while unifying."""

    __slots__ = ("fwd", "atom", "feats", "origins")

    def __init__(self):
        self.fwd = None
        self.atom = None
        self.feats = None  # dict feat -> [cell, priority-or-None]
        self.origins = ()


def _deref(cell: _Cell) -> _Cell:
    while cell.fwd is not None:
        cell = cell.fwd
    return cell


def _load(node: Node, side: str, memo: dict) -> _Cell:
    """Copy ``node`` into working cells; ``memo`` keeps sharing (by id)."""
    if id(node) in memo:
        return memo[id(node)]
    pending = [node]
    fresh = []
    while pending:
        cur = pending.pop()
        if id(cur) in memo:
            continue
        cell = _Cell()
        memo[id(cur)] = cell
        if isinstance(cur, Atom):
            cell.atom = cur
            cell.origins = ((side, id(cur)),)
        else:
            fresh.append((cell, cur))
            pending.extend(cur[f] for f in cur)
    for cell, cur in fresh:
        cell.feats = {f: [memo[id(cur[f])], cur.priority(f)] for f in cur}
    return memo[id(node)]


class _Components:
    """Tiny union-find over atom origins, linking atoms compared by path."""

    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x, y):
        self.parent[self.find(x)] = self.find(y)


class _Unifier:
    def __init__(self, components: _Components):
        self.components = components
        # Extra terms for atom merges that no path comparison accounted for;
        # they only arise through reentrancy.
        self.extra_actual = 0.0
        self.extra_perfect = 0.0

    def unify(self, x: _Cell, y: _Cell, px=None, py=None) -> None:
        # Depth-first over an explicit stack of feature iterators, in the
        # same order a recursive walk would take; atom averaging is not
        # associative, so the order matters when sharing merges atoms.
        frames = []
        self._step(x, y, px, py, frames)
        while frames:
            x, y, feats = frames[-1]
            feat = next(feats, None)
            if feat is None:
                frames.pop()
                continue
            cy, qy = y.feats[feat]
            if feat in x.feats:
                cx, qx = x.feats[feat]
                x.feats[feat] = [cx, _merge_priority(qx, qy)]
                self._step(cx, cy, qx, qy, frames)
            else:
                x.feats[feat] = [cy, qy]

    def _step(self, x: _Cell, y: _Cell, px, py, frames: list) -> None:
        x, y = _deref(x), _deref(y)
        if x is y:
            return
        if x.atom is not None and y.atom is not None:
            origins = x.origins + y.origins
            roots = {self.components.find(o) for o in origins}
            if len(roots) > 1:
                pri = _mean_priority(px, py)
                self.extra_actual += pri * atom_strength(x.atom, y.atom)
                self.extra_perfect += pri
            x.atom = unify_atoms(x.atom, y.atom)
            x.origins = origins
            y.fwd = x
        elif x.atom is not None:
            if y.feats:
                raise UnificationClash()
            y.fwd = x
        elif y.atom is not None:
            if x.feats:
                raise UnificationClash()
            x.fwd = y
        else:
            y.fwd = x
            frames.append((x, y, iter(sorted(y.feats))))


def _mean_priority(px, py) -> float:
    px = DEFAULT_PRIORITY if px is None else px
    py = DEFAULT_PRIORITY if py is None else py
    return (px + py) / 2.0


def _merge_priority(px, py):
    if px is None:
        return py
    if py is None:
        return px
    return (px + py) / 2.0


class _Cycle(Exception):
    pass


def _freeze(cell: _Cell, memo: dict) -> Node:
    """Build immutable structures bottom-up; raises :class:`_Cycle`."""
    root = _deref(cell)
    stack = [(root, False)]
    active: set = set()
    while stack:
        cur, expanded = stack.pop()
        key = id(cur)
        if key in memo:
            continue
        if cur.atom is not None:
            memo[key] = Atom(dict(cur.atom.items()))
            continue
        if not expanded:
            if key in active:
                raise _Cycle()
            active.add(key)
            stack.append((cur, True))
            for child, _ in cur.feats.values():
                child = _deref(child)
                if id(child) in active:
                    raise _Cycle()
                if id(child) not in memo:
                    stack.append((child, False))
            continue
        active.discard(key)
        values, prios = {}, {}
        for feat, (child, pri) in cur.feats.items():
            val = memo[id(_deref(child))]
            values[feat] = val
            if isinstance(val, Atom):
                prios[feat] = DEFAULT_PRIORITY if pri is None else pri
        memo[key] = FeatureStructure(values, prios)
    return memo[id(root)]


# --- public operators ------------------------------------------------------


def graded_strength(a: Node, b: Node) -> float:
    """Strength of unifying ``a`` with ``b`` by the path formula alone."""
    if isinstance(a, Atom) and isinstance(b, Atom):
        return atom_strength(a, b)
    terms = list(_path_terms(a, b))
    perfect = sum(pri for pri, _, _, _ in terms)
    if perfect == 0.0:
        return 1.0
    return _clamp(sum(pri * score for pri, score, _, _ in terms) / perfect)


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def unify_within(
    roots: Sequence[Node], index: int, other: Node, threshold: float = 0.0
) -> tuple[Optional[list[Node]], float, bool]:
    """Unify ``roots[index]`` with ``other`` in the context of ``roots``.

    ``roots`` is a group of structures that may share nodes with each
    other (a rule's mother and daughters, or an edge's mother and the
    constituents it still needs).  Bindings made while unifying the
    target propagate to every root through that sharing.

    Returns ``(new_roots, strength, clash)``; ``new_roots`` is ``None`` on
    failure.  The strength compares only the target with ``other``.
    """
    target = roots[index]
    if isinstance(target, Atom) and isinstance(other, Atom):
        terms = [(DEFAULT_PRIORITY, atom_strength(target, other), target, other)]
    else:
        try:
            terms = list(_path_terms(target, other))
        except UnificationClash:
            return None, 0.0, True

    components = _Components()
    for _, _, xa, xb in terms:
        if xa is not None and xb is not None:
            components.union(("a", id(xa)), ("b", id(xb)))

    memo_a: dict = {}
    cells = [_load(r, "a", memo_a) for r in roots]
    guest = _load(other, "b", {})
    unifier = _Unifier(components)
    try:
        unifier.unify(cells[index], guest)
        frozen: dict = {}
        out = [_freeze(c, frozen) for c in cells]
    except (UnificationClash, _Cycle):
        return None, 0.0, True

    actual = sum(pri * score for pri, score, _, _ in terms) + unifier.extra_actual
    perfect = sum(pri for pri, _, _, _ in terms) + unifier.extra_perfect
    strength = 1.0 if perfect == 0.0 else _clamp(actual / perfect)
    if strength < threshold:
        return None, strength, False
    return out, strength, False


def unify_graded(a: Node, b: Node, threshold: float = 0.0) -> UnifyResult:
    """Graded unification of two structures.

    >>> from gradunify import parse_avm, render_fs
    >>> r = unify_graded(parse_avm("[NUM:{sg}!2 PER:{3}]"), parse_avm("[NUM:{pl}!2]"), 0.3)
    >>> render_fs(r.result), round(r.strength, 4)
    ('[NUM: {pl:0.5, sg:0.5}!2.0 PER: {3}]', 0.3333)
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold!r} outside [0, 1]")
    out, strength, clash = unify_within((a,), 0, b, threshold)
    return UnifyResult(out[0] if out is not None else None, strength, clash)


__all__ = [
    "EMPTY",
    "UnificationClash",
    "UnifyResult",
    "actual_compatibility",
    "atom_strength",
    "graded_strength",
    "perfect_compatibility",
    "unify_atoms",
    "unify_graded",
    "unify_within",
]
