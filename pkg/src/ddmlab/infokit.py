"""Finite-measure-space information theory and the scalar inequality kit.

Atoms carry two nonnegative weight vectors with the dominated one's support
inside the dominating one's; every divergence and power integral is then a
finite sum under the explicit conventions

    x*log(x/y) := 0    for x = 0 and any y >= 0,
    x*log(x/y) := inf  for x > 0 and y = 0,
    0**0 := 1,  log(0) := -inf,  exp(-inf) := 0.

The convention helpers below are the single place those rules live; float
infinities only ever enter through them, never silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import (
    AbsoluteContinuityViolated,
    DomainError,
    ParameterRange,
    ZeroMass,
    ZeroMassConditioning,
)

Value = Union[Fraction, float]

INF = float("inf")
NEG_INF = float("-inf")


def xlog(x) -> float:
    """log with log(0) = -inf."""
    if x < 0:
        raise DomainError(f"log of negative value {x}")
    if x == 0:
        return NEG_INF
    return math.log(float(x))


def xexp(t: float) -> float:
    """exp with exp(-inf) = 0."""
    if t == NEG_INF:
        return 0.0
    return math.exp(t)


def xlogx(x) -> Value:
    """x*log(x) with 0*log(0) = 0; exact zero at x = 1."""
    if x == 0 or x == 1:
        return Fraction(0)
    return float(x) * math.log(float(x))


def xlogratio(x, y) -> Value:
    """x*log(x/y) under the stated conventions."""
    if x == 0:
        return Fraction(0)
    if y == 0:
        return INF
    if x == y:
        return Fraction(0)
    return float(x) * math.log(float(x) / float(y))


def xpow(x, a) -> Value:
    """x**a with 0**0 = 1."""
    if a == 0:
        return Fraction(1)
    if x == 0:
        return Fraction(0)
    if a == 1:
        return x if isinstance(x, Fraction) else float(x)
    if x == 1:
        return Fraction(1)
    return float(x) ** float(a)


@dataclass(frozen=True)
class FiniteMeasurePair:
    """Two finite measures on n atoms, the first dominated by the second."""

    lambda_w: tuple[Value, ...]
    phi_w: tuple[Value, ...]

    def __post_init__(self):
        if len(self.lambda_w) != len(self.phi_w):
            raise ValueError("weight vectors differ in length")
        for i, (l, p) in enumerate(zip(self.lambda_w, self.phi_w)):
            if l < 0 or p < 0:
                raise ValueError(f"negative weight at atom {i}")
            if l > 0 and p == 0:
                raise AbsoluteContinuityViolated(
                    f"atom {i} carries mass only under the first measure"
                )

    @property
    def n(self) -> int:
        return len(self.lambda_w)

    def atoms(self) -> range:
        return range(self.n)

    def _subset(self, A) -> list[int]:
        return sorted(set(A)) if A is not None else list(range(self.n))

    def lam(self, A=None) -> Value:
        return sum((self.lambda_w[i] for i in self._subset(A)), Fraction(0))

    def phi(self, A=None) -> Value:
        return sum((self.phi_w[i] for i in self._subset(A)), Fraction(0))

    def density(self, i: int) -> Value:
        if self.phi_w[i] == 0:
            return Fraction(0)  # irrelevant: the atom carries no mass
        if isinstance(self.lambda_w[i], Fraction) and isinstance(self.phi_w[i], Fraction):
            return self.lambda_w[i] / self.phi_w[i]
        return float(self.lambda_w[i]) / float(self.phi_w[i])

    # -- divergences -----------------------------------------------------

    def kl(self, A=None) -> Value:
        """Sum over the subset of lambda_i * log(lambda_i/phi_i)."""
        return sum((xlogratio(self.lambda_w[i], self.phi_w[i]) for i in self._subset(A)),
                   Fraction(0))

    def hellinger(self, alpha, A=None) -> Value:
        """Sum over the subset of density**alpha weighted by the second measure."""
        if alpha < 0:
            raise ParameterRange("hellinger exponent must be nonnegative")
        total: Value = Fraction(0)
        for i in self._subset(A):
            p = self.phi_w[i]
            if p == 0:
                continue
            total = total + xpow(self.density(i), alpha) * p
        return total

    def conditional(self, A) -> "FiniteMeasurePair":
        """Both measures conditioned on the subset (normalized restrictions)."""
        A = self._subset(A)
        lam_A = self.lam(A)
        phi_A = self.phi(A)
        if lam_A == 0 or phi_A == 0:
            raise ZeroMassConditioning("conditioning on a null set")
        inA = set(A)
        lw = tuple(
            (self.lambda_w[i] / lam_A) if i in inA else Fraction(0)
            for i in range(self.n)
        )
        pw = tuple(
            (self.phi_w[i] / phi_A) if i in inA else Fraction(0)
            for i in range(self.n)
        )
        return FiniteMeasurePair(lw, pw)


def conditional_identity_residuals(pair: FiniteMeasurePair, A, alphas: Sequence[float]):
    """Residuals of the conditional-decomposition identities on a subset.

    Returns a dict with the decomposition residual (conditioned divergence),
    per-alpha residuals of the conditional power-integral identity, the
    per-alpha slack of the one-sided version, and the plain mass-ratio slack.
    All residuals of identities should vanish; slacks should be >= 0.
    """
    lam_A = pair.lam(A)
    phi_A = pair.phi(A)
    klA = pair.kl(A)
    out = {"lam_A": lam_A, "phi_A": phi_A, "kl_A": klA}
    cond = pair.conditional(A)
    lhs = xlogratio(lam_A, phi_A) + lam_A * cond.kl()
    out["decomposition_residual"] = float(lhs - klA)
    ii = {}
    for a in alphas:
        left = cond.hellinger(a)
        right = pair.hellinger(a, A) / (xpow(lam_A, a) * xpow(phi_A, 1 - a))
        ii[a] = float(left - right)
    out["conditional_power_residuals"] = ii
    iii = {}
    for a in alphas:
        if a <= 0:
            continue
        bound = xlogratio(lam_A, phi_A) - lam_A * (1 / a) * xlog(cond.hellinger(1 - a))
        iii[a] = float(klA - bound)  # slack, should be >= 0
    out["one_sided_slacks"] = iii
    out["mass_ratio_slack"] = float(klA - xlogratio(lam_A, phi_A))
    return out


def divergence_power_sides(pair: FiniteMeasurePair, A, alpha) -> tuple[Value, Value]:
    """Both sides of the divergence lower bound through the power integral.

    lhs is the subset divergence; rhs = -(mass/alpha)*log(H_{1-alpha}/mass).
    lhs >= rhs for alpha in (0,1], and rhs increases to lhs as alpha -> 0.
    """
    if not 0 < alpha <= 1:
        raise ParameterRange("alpha must lie in (0,1]")
    lam_A = pair.lam(A)
    if lam_A == 0:
        raise ZeroMass("subset carries no mass under the first measure")
    lhs = pair.kl(A)
    h = pair.hellinger(1 - alpha, A)
    rhs = -(float(lam_A) / alpha) * xlog(h / lam_A)
    return lhs, rhs


# -- Lambert W ----------------------------------------------------------------


def lambert_w0(x: float) -> float:
    """Principal branch of w*exp(w) = x on [-1/e, inf).

    Log-based initial guess plus Halley refinement run to a residual-based
    stop; the defining equation is the accuracy contract (residual < 1e-13).
    """
    x = float(x)
    branch = -1.0 / math.e
    if x < branch:
        if x > branch - 1e-15:
            x = branch
        else:
            raise DomainError(f"{x} below -1/e")
    if x == 0.0:
        return 0.0
    if x == branch:
        return -1.0
    # initial guess
    if x < -0.2:
        w = -1.0 + math.sqrt(2.0 * (math.e * x + 1.0))
    elif x < 1.0:
        w = x / (1.0 + x)
    else:
        w = math.log(x)
        w -= math.log(w) if w > 1 else 0.0
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        w1 = w + 1.0
        dw = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= dw
        if abs(dw) <= 1e-16 * (2.0 + abs(w)):
            break
    return w


# -- scalar extrema and difference-quotient sandwiches ------------------------


def power_log_extrema(n: int, alpha: float):
    """Closed-form maxima of x|log x|^n on [0,1] and exp(-(1-a)x)x^n on [0,inf).

    Returns (max1, argmax1, max2, argmax2) = ((n/e)^n at e^-n,
    (n/(e(1-a)))^n at n/(1-a)).
    """
    if n < 1:
        raise ParameterRange("n must be a positive integer")
    if not 0 <= alpha < 1:
        raise ParameterRange("alpha must lie in [0,1)")
    m1 = (n / math.e) ** n
    a1 = math.exp(-n)
    m2 = (n / (math.e * (1 - alpha))) ** n
    a2 = n / (1 - alpha)
    return m1, a1, m2, a2


def difference_quotient(n: int, alpha0: float, alpha: float, z: float) -> float:
    """(z^a (log z)^n - z^a0 (log z)^n) / (a - a0); zero at z = 0 and z = 1."""
    if z == 0.0 or z == 1.0:
        return 0.0
    t = math.log(z)
    return (z ** alpha - z ** alpha0) * t ** n / (alpha - alpha0)


@dataclass(frozen=True)
class SandwichRecord:
    """Evaluated difference quotient plus every applicable two-sided bound.

    ``bounds`` holds (label, signed residual) pairs; a residual is
    bound-satisfaction margin and must be >= 0 up to rounding.
    """

    n: int
    alpha0: float
    alpha: float
    z: float
    quotient: float
    bounds: tuple[tuple[str, float], ...]

    def min_residual(self) -> float:
        return min((r for _, r in self.bounds), default=0.0)


def quotient_sandwich(n: int, alpha0: float, alpha: float, z: float, C: float | None = None) -> SandwichRecord:
    """Sandwich the difference quotient of z^a(log z)^n between its endpoint forms.

    Even n: endpoint forms bound directly.  Odd n: the quotient is
    nonnegative; with a cutoff C >= 1 such that (a-a0)log C < 1 the small-z
    endpoint form inflated by 1/(1-(a-a0)log C) bounds above; and for a < 1
    the two-sided correction with the (n+2) extremal constants applies.
    """
    if not (0 < alpha0 < alpha <= 1):
        raise ParameterRange("need 0 < alpha0 < alpha <= 1")
    if n < 0:
        raise ParameterRange("n must be >= 0")
    if z < 0:
        raise ParameterRange("z must be >= 0")
    d = difference_quotient(n, alpha0, alpha, z)
    t = NEG_INF if z == 0.0 else (0.0 if z == 1.0 else math.log(z))

    def form(a, power):
        # z^a (log z)^power with the 0-conventions
        if z == 0.0:
            return 0.0 if a > 0 else (NEG_INF if power % 2 else INF)
        if z == 1.0:
            return 0.0
        return z ** a * t ** power

    bounds = []
    if n % 2 == 0:
        bounds.append(("even_lower", d - form(alpha0, n + 1)))
        bounds.append(("even_upper", form(alpha, n + 1) - d))
    else:
        bounds.append(("odd_nonneg", d - 0.0))
        if C is not None:
            if C < 1:
                raise ParameterRange("cutoff must be >= 1")
            if (alpha - alpha0) * math.log(C) >= 1:
                raise ParameterRange("(alpha-alpha0)*log(C) must be < 1")
            if z <= C:
                ub = form(alpha0, n + 1) / (1 - (alpha - alpha0) * math.log(C))
            else:
                ub = form(alpha, n + 1)
            bounds.append(("odd_cutoff_upper", ub - d))
        if alpha < 1:
            c_lo = (alpha - alpha0) * ((n + 2) / (alpha0 * math.e)) ** (n + 2)
            c_hi = (alpha - alpha0) * ((n + 2) / ((1 - alpha) * math.e)) ** (n + 2)
            low1 = form(alpha0, n + 1) - (c_lo if z <= 1 else 0.0)
            low2 = form(alpha, n + 1) - (c_hi * z if z > 1 else 0.0)
            up1 = form(alpha, n + 1) + (c_lo if z <= 1 else 0.0)
            up2 = form(alpha0, n + 1) + (c_hi * z if z > 1 else 0.0)
            bounds.append(("odd_two_sided_lower", d - max(low1, low2)))
            bounds.append(("odd_two_sided_upper", min(up1, up2) - d))
    return SandwichRecord(n, alpha0, alpha, z, d, tuple(bounds))
