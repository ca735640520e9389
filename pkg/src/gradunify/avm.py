"""Prioritized feature structures with weighted disjunctive atoms.

A feature structure is either an :class:`Atom` (a leaf holding a
normalized distribution over symbols) or a :class:`FeatureStructure`
(a mapping from feature names to values).  Every atom-valued feature
carries a *priority*, a positive real that governs how much that feature
counts when the strength of a unification is measured.

Structures are immutable.  Reentrancy (structure sharing) is expressed
by object identity: two paths that reach the very same node object are
shared.  Textual ``#n`` tags are only a rendering of that identity.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping
from typing import Optional, Union

TOLERANCE = 1e-9
DEFAULT_PRIORITY = 1.0

Path = tuple[str, ...]


class AvmError(ValueError):
    """Raised for malformed atoms or feature structures."""


class Atom(Mapping[str, float]):
    """A weighted disjunction of symbols; weights sum to one.

    Build atoms with :func:`make_atom`, which normalizes.  The constructor
    expects an already-normalized distribution and only validates it.
    """

    __slots__ = ("_weights",)

    def __init__(self, weights: Mapping[str, float]):
        if not weights:
            raise AvmError("an atom needs at least one disjunct")
        total = 0.0
        for sym, w in weights.items():
            if not (0.0 <= w <= 1.0 + TOLERANCE) or math.isnan(w):
                raise AvmError(f"weight {w!r} of {sym!r} outside [0, 1]")
            total += w
        if abs(total - 1.0) > TOLERANCE:
            raise AvmError(f"atom weights sum to {total!r}, not 1")
        self._weights = dict(sorted(weights.items()))

    def __getitem__(self, sym: str) -> float:
        return self._weights[sym]

    def __iter__(self) -> Iterator[str]:
        return iter(self._weights)

    def __len__(self) -> int:
        return len(self._weights)

    def weight(self, sym: str) -> float:
        """Weight of ``sym``; zero when it is not a disjunct."""
        return self._weights.get(sym, 0.0)

    def top(self) -> str:
        """Most confident disjunct, ties broken by symbol name."""
        return min(self._weights.items(), key=lambda kv: (-kv[1], kv[0]))[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Atom):
            return NotImplemented
        return atoms_close(self, other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        body = ", ".join(f"{s}:{w:g}" for s, w in self._weights.items())
        return f"Atom({{{body}}})"


def make_atom(pairs) -> Atom:
    """Build a normalized atom from ``(symbol, weight)`` pairs or a mapping.

    Duplicate symbols are summed before normalization and zero-weight
    disjuncts are dropped.

    >>> make_atom([("sg", 3.0), ("pl", 1.0)])
    Atom({pl:0.25, sg:0.75})
    """
    if isinstance(pairs, Mapping):
        pairs = pairs.items()
    merged: dict[str, float] = {}
    for sym, w in pairs:
        w = float(w)
        if w < 0 or math.isnan(w) or math.isinf(w):
            raise AvmError(f"weight {w!r} of {sym!r} must be a finite non-negative number")
        merged[sym] = merged.get(sym, 0.0) + w
    if not merged:
        raise AvmError("an atom needs at least one disjunct")
    total = sum(merged.values())
    if total <= 0.0:
        raise AvmError("atom weights are all zero")
    return Atom({s: w / total for s, w in merged.items() if w > 0.0})


def atoms_close(a: Atom, b: Atom, tol: float = TOLERANCE) -> bool:
    """True when both atoms assign the same weight (within ``tol``) to every symbol."""
    for sym in set(a) | set(b):
        if abs(a.weight(sym) - b.weight(sym)) > tol:
            return False
    return True


Node = Union[Atom, "FeatureStructure"]


class FeatureStructure(Mapping[str, Node]):
    """An immutable attribute-value matrix.

    ``features`` maps names to values (atoms or nested structures).
    ``priorities`` may give a priority for any atom-valued feature; missing
    ones default to 1.0.  Giving a priority to a complex-valued feature is
    an error.  Equality is :func:`fs_equal`.
    """

    __slots__ = ("_values", "_priorities")

    def __init__(
        self,
        features: Optional[Mapping[str, Node]] = None,
        priorities: Optional[Mapping[str, float]] = None,
    ):
        values = dict(sorted((features or {}).items()))
        prios: dict[str, float] = {}
        for feat, val in values.items():
            if not isinstance(val, (Atom, FeatureStructure)):
                raise AvmError(f"value of {feat!r} is not an Atom or FeatureStructure")
            if isinstance(val, Atom):
                prios[feat] = DEFAULT_PRIORITY
        for feat, p in (priorities or {}).items():
            if feat not in values:
                raise AvmError(f"priority given for absent feature {feat!r}")
            if not isinstance(values[feat], Atom):
                raise AvmError(f"feature {feat!r} is complex-valued and cannot carry a priority")
            p = float(p)
            if not p > 0 or math.isinf(p):
                raise AvmError(f"priority of {feat!r} must be positive, got {p!r}")
            prios[feat] = p
        self._values = values
        self._priorities = prios

    def __getitem__(self, feat: str) -> Node:
        return self._values[feat]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def priority(self, feat: str) -> Optional[float]:
        """Priority of an atom-valued feature, ``None`` for complex ones."""
        if feat not in self._values:
            raise KeyError(feat)
        return self._priorities.get(feat)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureStructure):
            return NotImplemented
        return fs_equal(self, other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        from .grammar_io import render_fs

        return f"FeatureStructure({render_fs(self)})"


EMPTY = FeatureStructure()


def get_path(fs: Node, path) -> Optional[Node]:
    """Return the node at ``path`` or ``None`` when some step is undefined."""
    node = fs
    for feat in path:
        if not isinstance(node, FeatureStructure) or feat not in node:
            return None
        node = node[feat]
    return node


def _walk(fs: Node) -> Iterator[tuple[Path, Node, Optional[float]]]:
    # Expands sharing: a node reachable by several paths is yielded once per path.
    stack: list[tuple[Path, Node, Optional[float]]] = [((), fs, None)]
    while stack:
        path, node, prio = stack.pop()
        yield path, node, prio
        if isinstance(node, FeatureStructure):
            for feat in reversed(list(node)):
                stack.append((path + (feat,), node[feat], node.priority(feat)))


def all_paths(fs: Node) -> list[tuple[Path, Node, Optional[float]]]:
    """Every path (including the root) with its node and arc priority, sorted."""
    return sorted(_walk(fs), key=lambda t: t[0])


def atomic_paths(fs: Node) -> list[tuple[Path, Atom, float]]:
    """List ``(path, atom, priority)`` for every atomic leaf, in path order.

    A shared leaf appears once for each distinct path that reaches it.  A
    bare atom at the root yields ``((), atom, 1.0)``.
    """
    out = []
    for path, node, prio in all_paths(fs):
        if isinstance(node, Atom):
            out.append((path, node, DEFAULT_PRIORITY if prio is None else prio))
    return out


def sharing_partition(fs: Node) -> dict[Path, Path]:
    """Map each path to the smallest path that reaches the same node."""
    first: dict[int, Path] = {}
    out: dict[Path, Path] = {}
    for path, node, _ in all_paths(fs):
        out[path] = first.setdefault(id(node), path)
    return out


def fs_equal(a: Node, b: Node, tol: float = TOLERANCE) -> bool:
    """Canonical equality: same paths, atoms, priorities and sharing."""
    if a is b:
        return True
    pa, pb = all_paths(a), all_paths(b)
    if len(pa) != len(pb):
        return False
    for (path_a, na, qa), (path_b, nb, qb) in zip(pa, pb):
        if path_a != path_b:
            return False
        if isinstance(na, Atom):
            if not isinstance(nb, Atom) or not atoms_close(na, nb, tol):
                return False
            if abs((qa or DEFAULT_PRIORITY) - (qb or DEFAULT_PRIORITY)) > tol:
                return False
        elif not isinstance(nb, FeatureStructure):
            return False
    return sharing_partition(a) == sharing_partition(b)


def shape_key(fs: Node) -> tuple:
    """A hashable key that agrees for any two fs_equal structures.

    Weights and priorities are left out, so the key buckets candidates
    and :func:`fs_equal` makes the final call.
    """
    part = sharing_partition(fs)
    items = []
    for path, node, _ in all_paths(fs):
        if isinstance(node, Atom):
            items.append((path, tuple(node), part[path]))
        else:
            items.append((path, None, part[path]))
    return tuple(items)


def category(fs: Node, feature: str = "CAT") -> Optional[str]:
    """Top disjunct of the ``CAT`` atom, if there is one."""
    val = get_path(fs, (feature,))
    return val.top() if isinstance(val, Atom) else None
