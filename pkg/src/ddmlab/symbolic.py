"""Cylinder-set algebra for the two-sided full shift on a finite alphabet.

A cylinder ``_s[w]`` is the set of bi-infinite sequences over ``{1..N}``
spelling the word ``w`` at coordinates ``s .. s+len(w)-1``.  Finite disjoint
unions of cylinders are the sets this package measures and optimizes over.
The coordinate ladder is indexed so that a union belongs to the algebra
generated by coordinates ``>= m`` exactly when every constrained part starts
at or after ``m``; shifting by ``i`` moves every start up by ``i``.

Everything here is immutable.  Cylinders are stored sparse (start + word)
and only refined to an explicit coordinate window when an operation needs
one, so membership checks stay O(1) and the exponential blowup is deferred
to the point where an optimization actually requires a window.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import EmptyWord, InvalidSymbol, WindowTooSmall

# refuse refinements that would enumerate more cells than this
_MAX_REFINE_CELLS = 4_000_000


@dataclass(frozen=True, order=True)
class Cylinder:
    """One constrained coordinate block.  An empty word denotes the whole space."""

    start: int
    word: tuple[int, ...]

    @property
    def end(self) -> int:
        return self.start + len(self.word) - 1

    @property
    def is_full(self) -> bool:
        return not self.word

    def shift(self, i: int) -> "Cylinder":
        """Image under the i-fold inverse shift: constraints move right by i."""
        if self.is_full:
            return self
        return Cylinder(self.start + i, self.word)

    def letter_at(self, coord: int) -> int | None:
        if self.is_full or not (self.start <= coord <= self.end):
            return None
        return self.word[coord - self.start]

    def literal(self) -> str:
        if self.is_full:
            return "X"
        return f"{self.start}[{' '.join(str(a) for a in self.word)}]"


def make_cylinder(start: int, word, n_symbols: int) -> Cylinder:
    """Validated public constructor; rejects empty words and bad symbols."""
    word = tuple(int(a) for a in word)
    if not word:
        raise EmptyWord("cylinder word must be nonempty")
    for a in word:
        if not 1 <= a <= n_symbols:
            raise InvalidSymbol(f"symbol {a} outside 1..{n_symbols}")
    return Cylinder(int(start), word)


def cylinders_disjoint(a: Cylinder, b: Cylinder) -> bool:
    """Disjoint iff the blocks disagree on some shared coordinate.

    Blocks with non-overlapping coordinate windows always intersect: the
    constraints are independent, so a point satisfying both exists.
    """
    if a.is_full or b.is_full:
        return False
    lo, hi = max(a.start, b.start), min(a.end, b.end)
    for c in range(lo, hi + 1):
        if a.word[c - a.start] != b.word[c - b.start]:
            return True
    return False


def _merge_window(w1, w2):
    if w1 is None:
        return w2
    if w2 is None:
        return w1
    return (min(w1[0], w2[0]), max(w1[1], w2[1]))


@dataclass(frozen=True)
class CylinderUnion:
    """Finite disjoint union of cylinders over the alphabet {1..n_symbols}.

    ``parts`` are kept sorted; the empty tuple is the empty set and a single
    full part is the ambient space.  Use :func:`union_of` to build one.
    """

    n_symbols: int
    parts: tuple[Cylinder, ...]

    def __post_init__(self):
        for p in self.parts:
            for a in p.word:
                if not 1 <= a <= self.n_symbols:
                    raise InvalidSymbol(f"symbol {a} outside 1..{self.n_symbols}")
        for i in range(len(self.parts)):
            for j in range(i + 1, len(self.parts)):
                if not cylinders_disjoint(self.parts[i], self.parts[j]):
                    raise ValueError(
                        f"parts overlap: {self.parts[i].literal()} and "
                        f"{self.parts[j].literal()}"
                    )

    # -- basic structure -------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.parts

    @property
    def is_all(self) -> bool:
        return len(self.parts) == 1 and self.parts[0].is_full

    def window(self) -> tuple[int, int] | None:
        """Smallest coordinate window containing every constraint, or None."""
        w = None
        for p in self.parts:
            if not p.is_full:
                w = _merge_window(w, (p.start, p.end))
        return w

    def start_bound(self) -> int | None:
        """Least constrained coordinate; None when unconstrained (X or empty)."""
        w = self.window()
        return None if w is None else w[0]

    def in_algebra(self, m: int) -> bool:
        """Membership in the algebra generated by coordinates >= m."""
        s = self.start_bound()
        return s is None or s >= m

    def shift(self, i: int) -> "CylinderUnion":
        """Image under the i-fold inverse shift (coordinate relabeling)."""
        return CylinderUnion(self.n_symbols, tuple(sorted(p.shift(i) for p in self.parts)))

    # -- refinement -------------------------------------------------------

    def _part_words(self, part: Cylinder, window: tuple[int, int]):
        a, b = window
        if not part.is_full and (part.start < a or part.end > b):
            raise WindowTooSmall(
                f"window [{a},{b}] does not contain {part.literal()}"
            )
        choices = []
        for c in range(a, b + 1):
            letter = part.letter_at(c)
            choices.append((letter,) if letter is not None else tuple(range(1, self.n_symbols + 1)))
        return itertools.product(*choices)

    def refine(self, window: tuple[int, int]) -> "CylinderUnion":
        """Disjoint union of full-window cylinders with the same point set."""
        a, b = window
        if b < a:
            raise WindowTooSmall(f"empty window [{a},{b}]")
        if self.n_symbols ** (b - a + 1) > _MAX_REFINE_CELLS:
            raise WindowTooSmall(f"window [{a},{b}] too large to refine")
        words: set[tuple[int, ...]] = set()
        for p in self.parts:
            words.update(self._part_words(p, window))
        return CylinderUnion(
            self.n_symbols, tuple(Cylinder(a, w) for w in sorted(words))
        )

    def refined_words(self, window: tuple[int, int]) -> frozenset[tuple[int, ...]]:
        return frozenset(
            w for p in self.parts for w in self._part_words(p, window)
        )

    def project_words(self, window: tuple[int, int]) -> frozenset[tuple[int, ...]]:
        """Projection onto the window: constraints outside it are dropped.

        Unlike :meth:`refine` this never raises; coordinates of a part outside
        the window do not restrict the projection (the shift coordinates are
        independent and every cylinder is nonempty).
        """
        a, b = window
        if self.n_symbols ** (b - a + 1) > _MAX_REFINE_CELLS:
            raise WindowTooSmall(f"window [{a},{b}] too large to project")
        words: set[tuple[int, ...]] = set()
        for p in self.parts:
            choices = []
            for c in range(a, b + 1):
                letter = p.letter_at(c)
                choices.append(
                    (letter,) if letter is not None else tuple(range(1, self.n_symbols + 1))
                )
            words.update(itertools.product(*choices))
        return frozenset(words)

    def covers_point(self, window: tuple[int, int], word: tuple[int, ...]) -> bool:
        """Whether every sequence spelling ``word`` on ``window`` lies in the set.

        Meaningful when the window contains all of this union's constraints.
        """
        a, _ = window
        for p in self.parts:
            if p.is_full:
                return True
            ok = True
            for c in range(p.start, p.end + 1):
                if not (window[0] <= c <= window[1]):
                    ok = False
                    break
                if word[c - a] != p.word[c - p.start]:
                    ok = False
                    break
            if ok:
                return True
        return False

    # -- Boolean operations ------------------------------------------------

    def _binary_words(self, other: "CylinderUnion"):
        window = _merge_window(self.window(), other.window())
        if window is None:
            window = (0, 0)
        return window, self.refined_words(window), other.refined_words(window)

    def union(self, other: "CylinderUnion") -> "CylinderUnion":
        if self.is_all or other.is_all:
            return full_space(self.n_symbols)
        if self.is_empty:
            return other.canonical()
        if other.is_empty:
            return self.canonical()
        window, wa, wb = self._binary_words(other)
        return _from_words(self.n_symbols, window, wa | wb)

    def intersect(self, other: "CylinderUnion") -> "CylinderUnion":
        if self.is_empty or other.is_empty:
            return empty_set(self.n_symbols)
        if self.is_all:
            return other.canonical()
        if other.is_all:
            return self.canonical()
        window, wa, wb = self._binary_words(other)
        return _from_words(self.n_symbols, window, wa & wb)

    def difference(self, other: "CylinderUnion") -> "CylinderUnion":
        if self.is_empty or other.is_all:
            return empty_set(self.n_symbols)
        if other.is_empty:
            return self.canonical()
        window, wa, wb = self._binary_words(other)
        return _from_words(self.n_symbols, window, wa - wb)

    def same_point_set(self, other: "CylinderUnion") -> bool:
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        if self.is_all and other.is_all:
            return True
        window = _merge_window(self.window(), other.window())
        if window is None:
            return self.is_all == other.is_all
        return self.refined_words(window) == other.refined_words(window)

    def canonical(self) -> "CylinderUnion":
        """Refined to the joint window and sorted; X and the empty set as-is."""
        w = self.window()
        if w is None:
            return self
        return self.refine(w)

    # -- presentation -------------------------------------------------------

    def simplify(self) -> "CylinderUnion":
        """Merge sibling cylinders for display; the point set is unchanged."""
        parts = list(self.parts)
        changed = True
        while changed:
            changed = False
            groups: dict[tuple[int, tuple[int, ...]], list[Cylinder]] = {}
            for p in parts:
                if p.is_full:
                    continue
                groups.setdefault((p.start, p.word[:-1]), []).append(p)
            for (start, prefix), group in groups.items():
                if len(group) == self.n_symbols:
                    last = {p.word[-1] for p in group}
                    if last == set(range(1, self.n_symbols + 1)):
                        for p in group:
                            parts.remove(p)
                        if prefix:
                            parts.append(Cylinder(start, prefix))
                        else:
                            parts = [Cylinder(0, ())]
                        changed = True
                        break
        return CylinderUnion(self.n_symbols, tuple(sorted(parts)))

    def literal(self) -> str:
        if self.is_empty:
            return "EMPTY"
        if self.is_all:
            return "X"
        return " | ".join(p.literal() for p in self.parts)


def _from_words(n: int, window: tuple[int, int], words) -> CylinderUnion:
    a = window[0]
    return CylinderUnion(n, tuple(Cylinder(a, w) for w in sorted(words)))


def empty_set(n_symbols: int) -> CylinderUnion:
    return CylinderUnion(n_symbols, ())


def full_space(n_symbols: int) -> CylinderUnion:
    return CylinderUnion(n_symbols, (Cylinder(0, ()),))


def cylinder_union(n_symbols: int, *cylinders: Cylinder) -> CylinderUnion:
    """Union of possibly overlapping cylinders, refined to a disjoint form."""
    out = empty_set(n_symbols)
    for c in cylinders:
        out = out.union(CylinderUnion(n_symbols, (c,)))
    return out


def set_ops(a: CylinderUnion, b: CylinderUnion, op: str) -> CylinderUnion:
    """Exact point-set union/intersect/difference; result is canonical."""
    if op == "union":
        return a.union(b)
    if op == "intersect":
        return a.intersect(b)
    if op == "difference":
        return a.difference(b)
    raise ValueError(f"unknown op {op!r}")


def preimage_shift(q: CylinderUnion, i: int) -> CylinderUnion:
    """The i-fold inverse-shift image of ``q``: ``_m[w]`` moves to ``_{m+i}[w]``."""
    return q.shift(i)


def parse_literal(text: str, n_symbols: int) -> CylinderUnion:
    """Parse the cylinder literal syntax: ``"m[w1 w2 ... wk]"``, ``"X"``, ``"EMPTY"``.

    Unions may be written with ``|`` between cylinder literals.
    """
    text = text.strip()
    if text == "X":
        return full_space(n_symbols)
    if text == "EMPTY":
        return empty_set(n_symbols)
    pieces = [p.strip() for p in text.split("|")]
    cyls = []
    for piece in pieces:
        if "[" not in piece or not piece.endswith("]"):
            raise ValueError(f"bad cylinder literal {piece!r}")
        head, body = piece.split("[", 1)
        start = int(head)
        symbols = [int(tok) for tok in body[:-1].replace(",", " ").split()]
        cyls.append(make_cylinder(start, symbols, n_symbols))
    return cylinder_union(n_symbols, *cyls)
