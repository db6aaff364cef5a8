"""Exact Markov measures on the shift and the density between them.

Two measures share one row-stochastic matrix: the time-zero law ``phi``
starts from an arbitrary strictly positive initial vector, the invariant
law ``lam`` starts from the stationary vector.  Their density then depends
on coordinate zero only, which is the one desk-scale regime where every
integral below is a finite sum over the alphabet: restricting a set to a
fixed symbol at coordinate zero and weighting by a function of the density
value at that symbol.

Measure values are exact rationals; powers and logarithms are float64 and
are the only sources of rounding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ModelError, NotInA0, NotIrreducibleWarning
from .symbolic import Cylinder, CylinderUnion

Value = Union[Fraction, float]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise ModelError(f"expected an exact rational, got {x!r}")


def stationary_vector(transition) -> tuple[Fraction, ...]:
    """Unique stationary probability vector of a row-stochastic matrix.

    Exact Gaussian elimination on (P^T - I) with the normalization row;
    raises when the stationary law is not unique (reducible chains).
    """
    n = len(transition)
    # rows: (P^T - I) x = 0, last row replaced by sum(x) = 1
    rows = [
        [transition[j][i] - (1 if i == j else 0) for j in range(n)] + [Fraction(0)]
        for i in range(n)
    ]
    rows[-1] = [Fraction(1)] * n + [Fraction(1)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            raise ModelError("stationary law is not unique; supply pi_star explicitly")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [v * inv for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    pi = tuple(rows[i][n] for i in range(n))
    if any(p < 0 for p in pi):
        raise ModelError("stationary solve produced a negative entry")
    return pi


@dataclass(frozen=True)
class WeightSpec:
    """Pointwise weight z -> z**alpha * log(z)**log_power + offset.

    The conventions in force: 0**0 = 1, 0*log(0) = 0 (any positive power of
    the density kills the logarithm at zero), and log(1) = 0 exactly so that
    a trivial density yields exact rational zeros.
    """

    alpha: float = 0.0
    log_power: int = 0
    offset: Value = 0

    def factor(self, z: Fraction) -> Value:
        if self.log_power == 0:
            if self.alpha == 0:
                base: Value = Fraction(1)
            elif self.alpha == 1:
                base = z
            elif z == 0:
                base = Fraction(0)
            elif z == 1:
                base = Fraction(1)
            else:
                base = float(z) ** self.alpha
        else:
            if z == 0:
                if self.alpha > 0:
                    base = Fraction(0)
                else:
                    # 0**0 = 1 leaves a bare log(0) = -inf power
                    base = float("-inf") if self.log_power % 2 else float("inf")
            elif z == 1:
                base = Fraction(0)
            else:
                base = float(z) ** self.alpha * math.log(float(z)) ** self.log_power
        if self.offset == 0:
            return base
        return base + self.offset

    @property
    def exact(self) -> bool:
        """True when the factor is an exact rational for every rational z>0."""
        if self.log_power > 0:
            return False
        return self.alpha in (0, 1) and isinstance(self.offset, (int, Fraction))

    def label(self) -> str:
        if self.log_power == 0 and self.alpha == 0 and self.offset == 0:
            return "1"
        parts = []
        if self.alpha != 0 or self.log_power == 0:
            parts.append("z" if self.alpha == 1 else f"z^{self.alpha:g}")
        if self.log_power:
            parts.append("log(z)" if self.log_power == 1 else f"log(z)^{self.log_power}")
        s = "*".join(parts) if parts else "1"
        if self.offset != 0:
            s += f"+{float(self.offset):g}"
        return s


WEIGHT_ONE = WeightSpec(0, 0)
WEIGHT_DENSITY = WeightSpec(1, 0)
WEIGHT_ENTROPY = WeightSpec(1, 1)  # z log z
WEIGHT_ENTROPY_OFFSET = WeightSpec(1, 1, 1 / math.e)


@dataclass(frozen=True)
class KStarResult:
    """Log of the backward-orbit supremum of the density, integrated.

    Along almost every backward orbit the density's supremum equals the max
    density over the recurrent class the orbit lives in, so the integral is
    a finite sum of class masses times log-max values.
    """

    value: float
    exact_zero: bool
    irreducible: bool
    per_class: tuple[tuple[tuple[int, ...], Fraction, Fraction], ...]
    # (class states, invariant mass, max density on the class)

    @property
    def essential_sup_density(self) -> Fraction:
        return max((mz for _, mass, mz in self.per_class if mass > 0), default=Fraction(1))


class MarkovModel:
    """Alphabet, transition matrix, the two initial laws, and the density."""

    def __init__(self, transition, initial, stationary=None, precision="rational"):
        P = tuple(tuple(_frac(x) for x in row) for row in transition)
        n = len(P)
        if n == 0 or any(len(row) != n for row in P):
            raise ModelError("transition matrix must be square and nonempty")
        for i, row in enumerate(P):
            if any(x < 0 for x in row):
                raise ModelError(f"transition row {i} has a negative entry")
            if sum(row) != 1:
                raise ModelError(f"transition row {i} sums to {sum(row)}, expected 1")
        pi = tuple(_frac(x) for x in initial)
        if len(pi) != n:
            raise ModelError("initial law has wrong length")
        if sum(pi) != 1:
            raise ModelError(f"initial law sums to {sum(pi)}, expected 1")
        if any(p <= 0 for p in pi):
            raise ModelError("initial law must be strictly positive")
        if stationary is None:
            ps = stationary_vector(P)
        else:
            ps = tuple(_frac(x) for x in stationary)
            if len(ps) != n:
                raise ModelError("stationary law has wrong length")
            if sum(ps) != 1:
                raise ModelError(f"stationary law sums to {sum(ps)}, expected 1")
            if any(p < 0 for p in ps):
                raise ModelError("stationary law must be nonnegative")
            for j in range(n):
                if sum(ps[i] * P[i][j] for i in range(n)) != ps[j]:
                    raise ModelError("pi_star is not stationary for the transition matrix")
        if precision not in ("rational", "float64"):
            raise ModelError(f"unknown precision {precision!r}")
        self.n = n
        self.transition = P
        self.initial = pi
        self.stationary = ps
        self.precision = precision
        self._powers = {0: tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))}

    # -- structure ---------------------------------------------------------

    def density(self) -> tuple[Fraction, ...]:
        """Per-symbol density of the invariant law against the time-zero law."""
        return tuple(ps / p for ps, p in zip(self.stationary, self.initial))

    def density_trivial(self) -> bool:
        return all(z == 1 for z in self.density())

    def _power(self, k: int):
        if k not in self._powers:
            prev = self._power(k - 1)
            P = self.transition
            n = self.n
            self._powers[k] = tuple(
                tuple(sum(prev[i][l] * P[l][j] for l in range(n)) for j in range(n))
                for i in range(n)
            )
        return self._powers[k]

    def _word_chain(self, word) -> Fraction:
        out = Fraction(1)
        for a, b in zip(word, word[1:]):
            out *= self.transition[a - 1][b - 1]
        return out

    # -- the two measures ----------------------------------------------------

    def phi_cylinder(self, c: Cylinder) -> Fraction:
        if c.is_full:
            return Fraction(1)
        if c.start < 0:
            raise NotInA0(f"{c.literal()} starts before coordinate 0")
        head = self.initial
        if c.start > 0:
            Pk = self._power(c.start)
            head = tuple(
                sum(self.initial[i] * Pk[i][j] for i in range(self.n))
                for j in range(self.n)
            )
        return head[c.word[0] - 1] * self._word_chain(c.word)

    def phi(self, q: CylinderUnion) -> Fraction:
        if not q.in_algebra(0):
            raise NotInA0(f"{q.literal()} starts before coordinate 0")
        return sum((self.phi_cylinder(p) for p in q.parts), Fraction(0))

    def lam_cylinder(self, c: Cylinder) -> Fraction:
        if c.is_full:
            return Fraction(1)
        return self.stationary[c.word[0] - 1] * self._word_chain(c.word)

    def lam(self, q: CylinderUnion) -> Fraction:
        return sum((self.lam_cylinder(p) for p in q.parts), Fraction(0))

    def phi_at_symbol(self, c: Cylinder, a: int) -> Fraction:
        """Time-zero mass of ``c`` restricted to symbol ``a`` at coordinate 0."""
        if c.is_full:
            return self.initial[a - 1]
        if c.start < 0:
            raise NotInA0(f"{c.literal()} starts before coordinate 0")
        if c.start == 0:
            return self.phi_cylinder(c) if c.word[0] == a else Fraction(0)
        Pk = self._power(c.start)
        return self.initial[a - 1] * Pk[a - 1][c.word[0] - 1] * self._word_chain(c.word)

    # -- density integrals ----------------------------------------------------

    def integral(self, q: CylinderUnion, weight: WeightSpec) -> Value:
        """Integral over ``q`` of the weight applied to the density.

        The density depends on coordinate zero only, so this is a sum over
        the alphabet of weight(z(a)) times the mass of ``q`` at symbol ``a``.
        Exact when the weight is; float64 otherwise, with relative error
        within 1e-12 per term (one pow, one log, one multiply on exact
        rational inputs).
        """
        z = self.density()
        total: Value = Fraction(0)
        for a in range(1, self.n + 1):
            mass = sum((self.phi_at_symbol(p, a) for p in q.parts), Fraction(0))
            if mass == 0:
                continue
            total = total + weight.factor(z[a - 1]) * mass
        return total

    def integral_density_power(self, q: CylinderUnion, alpha) -> Value:
        return self.integral(q, WeightSpec(alpha, 0))

    def integral_entropy(self, q: CylinderUnion) -> Value:
        return self.integral(q, WEIGHT_ENTROPY)

    def kappa0(self, q: CylinderUnion) -> Value:
        """Entropy integrand shifted by 1/e, which makes it nonnegative."""
        return self.integral_entropy(q) + self.phi(q) / math.e

    def kl_divergence(self) -> Value:
        """Full-space entropy integral: sum of stationary mass times log density."""
        z = self.density()
        if all(v == 1 for v in z):
            return Fraction(0)
        return sum(
            float(m) * math.log(float(v))
            for m, v in zip(self.stationary, z)
            if m > 0
        )

    # -- chain structure -------------------------------------------------------

    def _reachable(self):
        n = self.n
        reach = [[False] * n for _ in range(n)]
        for i in range(n):
            stack = [i]
            while stack:
                u = stack.pop()
                for v in range(n):
                    if self.transition[u][v] > 0 and not reach[i][v]:
                        reach[i][v] = True
                        stack.append(v)
        return reach

    def communicating_classes(self):
        reach = self._reachable()
        n = self.n
        seen = [False] * n
        classes = []
        for i in range(n):
            if seen[i]:
                continue
            cls = [j for j in range(n) if reach[i][j] and reach[j][i]] or [i]
            if i not in cls:
                cls.append(i)
            cls = sorted(set(cls))
            for j in cls:
                seen[j] = True
            classes.append(tuple(j + 1 for j in cls))
        return classes, reach

    def is_irreducible(self) -> bool:
        reach = self._reachable()
        return all(reach[i][j] for i in range(self.n) for j in range(self.n))

    def k_star(self) -> KStarResult:
        """Integrated log of the backward supremum of the density.

        Needs irreducibility for the single-class formula; a reducible chain
        falls back to the per-recurrent-class computation with a warning.
        """
        z = self.density()
        classes, reach = self.communicating_classes()
        irreducible = len(classes) == 1 and all(
            reach[i][j] for i in range(self.n) for j in range(self.n)
        )
        if not irreducible:
            warnings.warn(
                "transition matrix is not irreducible; computing the tail "
                "supremum per recurrent class",
                NotIrreducibleWarning,
                stacklevel=2,
            )
        per_class = []
        for cls in classes:
            idx = [a - 1 for a in cls]
            closed = all(
                self.transition[i][j] == 0
                for i in idx
                for j in range(self.n)
                if j not in idx
            )
            mass = sum((self.stationary[i] for i in idx), Fraction(0))
            if not closed:
                if mass > 0:
                    raise ModelError("stationary law charges a transient class")
                continue
            per_class.append((cls, mass, max(z[i] for i in idx)))
        value = 0.0
        exact_zero = True
        for _, mass, mz in per_class:
            if mass == 0:
                continue
            if mz != 1:
                exact_zero = False
                value += float(mass) * math.log(float(mz))
        return KStarResult(
            value=value,
            exact_zero=exact_zero,
            irreducible=irreducible,
            per_class=tuple(per_class),
        )


def make_model(transition, initial, stationary=None, precision="rational") -> MarkovModel:
    return MarkovModel(transition, initial, stationary, precision)
