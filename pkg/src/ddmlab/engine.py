"""Finite-horizon cover optimization and the measures built on top of it.

The cover universe is truncated to slots ``m in {-D..0}``, each slot holding
a union of start-``m`` cylinders of word length ``L``.  Every infimum in
this module is therefore an exact finite minimum; restricting the family can
only raise an infimum, so every value here is a certified upper bound of its
untruncated counterpart, at the price of the near-optimality threshold being
taken against the best truncated reference rather than the true one.  Each
result records the reference it thresholded against.

Slot sets are point sets: a slot's candidates are the full length-``L``
words (shorter cylinders are unions of these with identical mass), and a
chosen cover is a weighted set cover of the query's projection onto the
candidate window.  Second-level objectives are additive over candidates
because distinct full-length words in one slot are disjoint.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import EmptyFamily, EngineError, ParameterRange
from .markov import MarkovModel, WeightSpec, WEIGHT_ENTROPY, Value
from .symbolic import Cylinder, CylinderUnion

EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class Horizon:
    """Truncation parameters: slots -depth..0, words of length ``length``."""

    depth: int
    length: int

    def __post_init__(self):
        if self.depth < 0:
            raise ParameterRange("depth must be >= 0")
        if self.length < 1:
            raise ParameterRange("length must be >= 1")

    @property
    def window(self) -> tuple[int, int]:
        return (-self.depth, self.length - 1)

    def as_dict(self):
        return {"D": self.depth, "L": self.length}


@dataclass(frozen=True)
class Candidate:
    slot: int
    word: tuple[int, ...]
    cost: Fraction
    mask: int


class CandidateSpace:
    """Candidates and coverage universe for one query at one horizon."""

    def __init__(self, model: MarkovModel, query: CylinderUnion, horizon: Horizon):
        if query.n_symbols != model.n:
            raise EngineError("query alphabet does not match the model")
        self.model = model
        self.query = query
        self.horizon = horizon
        lo, hi = horizon.window
        self.window = (lo, hi)
        if query.is_empty:
            self.universe: tuple[tuple[int, ...], ...] = ()
        else:
            self.universe = tuple(sorted(query.project_words(self.window)))
        self.full_mask = (1 << len(self.universe)) - 1
        cands = []
        n = model.n
        L = horizon.length
        for m in range(-horizon.depth, 1):
            off = m - lo
            for word in itertools.product(range(1, n + 1), repeat=L):
                mask = 0
                for i, u in enumerate(self.universe):
                    if u[off:off + L] == word:
                        mask |= 1 << i
                if mask == 0:
                    continue  # does not meet the query's window
                cands.append(Candidate(m, word, model.phi_cylinder(Cylinder(0, word)), mask))
        self.candidates: tuple[Candidate, ...] = tuple(cands)

    def representable(self, q: CylinderUnion | None = None) -> bool:
        """Whether the query's constraints all fit inside the candidate window."""
        q = self.query if q is None else q
        w = q.window()
        if w is None:
            return True
        return self.window[0] <= w[0] and w[1] <= self.window[1]

    def costs(self) -> tuple[Fraction, ...]:
        return tuple(c.cost for c in self.candidates)

    def objective(self, weight: WeightSpec) -> tuple[Value, ...]:
        """Per-candidate integral of the weighted density over the slot piece."""
        factors = [weight.factor(z) for z in self.model.density()]
        return tuple(factors[c.word[0] - 1] * c.cost for c in self.candidates)

# -- exact subset optimization -------------------------------------------------


@dataclass(frozen=True)
class BudgetConstraint:
    """Additive budget: the completed subset's total must be below the bound
    (strictly when ``strict``, else at most the bound)."""

    values: tuple[Value, ...]
    bound: Value
    strict: bool = True

    def holds(self, total) -> bool:
        return total < self.bound if self.strict else total <= self.bound


def _solve_exhaustive(masks, full_mask, objective, constraints):
    k = len(masks)
    if k > EXHAUSTIVE_LIMIT:
        raise EngineError(
            f"exhaustive mode limited to {EXHAUSTIVE_LIMIT} candidates, got {k}"
        )
    best = None
    for bits in range(1 << k):
        covered = 0
        idx = []
        b = bits
        while b:
            i = (b & -b).bit_length() - 1
            covered |= masks[i]
            idx.append(i)
            b &= b - 1
        if covered != full_mask:
            continue
        ok = True
        for con in constraints:
            tot = sum((con.values[i] for i in idx), Fraction(0))
            if not con.holds(tot):
                ok = False
                break
        if not ok:
            continue
        obj = sum((objective[i] for i in idx), Fraction(0))
        cand = (obj, len(idx), tuple(idx))
        if best is None or cand < best:
            best = cand
    return best


def _cover_lists(masks, n_elements):
    out = [[] for _ in range(n_elements)]
    for c, mask in enumerate(masks):
        b = mask
        while b:
            e = (b & -b).bit_length() - 1
            out[e].append(c)
            b &= b - 1
    return out


def _fractional_bound(uncovered, masks, weights, lists):
    """Admissible lower bound on the nonnegative weight needed to finish a
    cover: each uncovered element pays at least its cheapest per-element
    rate weight_c / |coverage of c inside the uncovered set|."""
    total = 0.0
    b = uncovered
    while b:
        e = (b & -b).bit_length() - 1
        b &= b - 1
        rate = None
        for c in lists[e]:
            r = float(weights[c]) / (masks[c] & uncovered).bit_count()
            if rate is None or r < rate:
                rate = r
        if rate is None:
            return float("inf")
        total += rate
    return total


# float prunes use a safety margin so rounding can only under-prune
_MARGIN = 1e-9


def _solve_cover_bnb(masks, full_mask, objective):
    """Element-driven exact minimum for pure covering problems.

    Branches on the uncovered element with the fewest admissible covering
    candidates; choosing candidate c for an element bans the smaller
    alternatives in the subtree, which makes every cover reachable exactly
    once through its elementwise-smallest members.  For a nonnegative
    objective the (value, size, indices)-least cover lies in this family.
    """
    n_el = full_mask.bit_count()
    lists = _cover_lists(masks, n_el)
    best: list = [None]
    chosen: list[int] = []

    def rec(covered, acc, banned):
        if covered == full_mask:
            cand = (acc, len(chosen), tuple(sorted(chosen)))
            if best[0] is None or cand < best[0]:
                best[0] = cand
            return
        uncovered = full_mask & ~covered
        if best[0] is not None:
            lb = float(acc) + _fractional_bound(uncovered, masks, objective, lists)
            top = float(best[0][0])
            if lb > top + _MARGIN * (1.0 + abs(top)):
                return
        pick = None
        b = uncovered
        while b:
            e = (b & -b).bit_length() - 1
            b &= b - 1
            options = [c for c in lists[e] if not banned >> c & 1]
            if pick is None or len(options) < len(pick[1]):
                pick = (e, options)
                if not options:
                    break
        e, options = pick
        if not options:
            return
        ban = banned
        for c in options:
            chosen.append(c)
            rec(covered | masks[c], acc + objective[c], ban)
            chosen.pop()
            ban |= 1 << c

    rec(0, Fraction(0), 0)
    return best[0]


def _solve_subset_dfs(masks, full_mask, objective, constraints):
    """Candidate-driven exact search for budgeted problems.

    Handles negative objective or constraint contributions (the minimizer
    may add mass beyond what covering needs); the nonnegative cost budget
    gets the fractional covering bound as an extra prune.
    """
    k = len(masks)
    n_el = full_mask.bit_count()
    lists = _cover_lists(masks, n_el)
    suffix_or = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix_or[i] = suffix_or[i + 1] | masks[i]

    def neg_suffix(vals):
        out: list = [Fraction(0)] * (k + 1)
        for i in range(k - 1, -1, -1):
            v = vals[i]
            out[i] = out[i + 1] + (v if v < 0 else 0)
        return out

    obj_neg = neg_suffix(objective)
    obj_nonneg = all(v >= 0 for v in objective)
    cons_neg = [neg_suffix(con.values) for con in constraints]
    cons_frac = [all(v >= 0 for v in con.values) for con in constraints]
    best: list = [None]
    chosen: list[int] = []

    def rec(i, covered, obj_acc, cons_acc):
        if covered | suffix_or[i] != full_mask:
            return
        uncovered = full_mask & ~covered
        for j, con in enumerate(constraints):
            # least achievable final total from here on
            floor = cons_acc[j] + cons_neg[j][i]
            if not con.holds(floor):
                return
            if cons_frac[j] and uncovered:
                lb = float(cons_acc[j]) + _fractional_bound(
                    uncovered, masks, con.values, lists
                )
                top = float(con.bound)
                if lb > top + _MARGIN * (1.0 + abs(top)):
                    return
        lb = obj_acc + obj_neg[i]
        if best[0] is not None and lb > best[0][0]:
            return
        if best[0] is not None and obj_nonneg and uncovered:
            flb = float(obj_acc) + _fractional_bound(uncovered, masks, objective, lists)
            top = float(best[0][0])
            if flb > top + _MARGIN * (1.0 + abs(top)):
                return
        if i == k:
            cand = (obj_acc, len(chosen), tuple(chosen))
            if best[0] is None or cand < best[0]:
                best[0] = cand
            return
        v = objective[i]
        useless = (
            (masks[i] & ~covered) == 0
            and v >= 0
            and all(con.values[i] >= 0 for con in constraints)
        )
        if not useless:
            chosen.append(i)
            rec(
                i + 1,
                covered | masks[i],
                obj_acc + v,
                [cons_acc[j] + constraints[j].values[i] for j in range(len(constraints))],
            )
            chosen.pop()
        rec(i + 1, covered, obj_acc, cons_acc)

    rec(0, 0, Fraction(0), [Fraction(0)] * len(constraints))
    return best[0]


def _solve_branch_and_bound(masks, full_mask, objective, constraints):
    if not constraints and all(v >= 0 for v in objective):
        return _solve_cover_bnb(masks, full_mask, objective)
    return _solve_subset_dfs(masks, full_mask, objective, constraints)


def minimize_over_covers(space: CandidateSpace, objective, constraints=(), mode="auto"):
    """Exact minimum of an additive objective over covering candidate subsets.

    Ties break by subset size, then by the sorted index tuple (size first,
    so dropping a redundant zero-contribution candidate always wins the
    tie); both modes therefore return the same witness.  Returns (value,
    indices).
    """
    masks = [c.mask for c in space.candidates]
    cons = tuple(constraints)
    if mode == "exact":
        best = _solve_exhaustive(masks, space.full_mask, tuple(objective), cons)
    elif mode in ("auto", "bnb"):
        best = _solve_branch_and_bound(masks, space.full_mask, tuple(objective), cons)
    else:
        raise EngineError(f"unknown mode {mode!r}")
    if best is None:
        raise EmptyFamily("no cover satisfies the constraints")
    return best[0], best[2]


# -- covers ---------------------------------------------------------------------


@dataclass(frozen=True)
class Cover:
    """A cover: one cylinder union per slot, with per-slot masses attached."""

    slots: tuple[tuple[int, CylinderUnion], ...]
    cost: Fraction
    slot_cost: tuple[Fraction, ...]
    slot_lam: tuple[Fraction, ...]
    chosen: tuple[int, ...]
    disjoint: bool

    def literal(self) -> dict[str, str]:
        return {str(m): a.simplify().literal() for m, a in self.slots}

    def lam_mass(self) -> Fraction:
        return sum(self.slot_lam, Fraction(0))

    def slot_sets(self) -> tuple[CylinderUnion, ...]:
        return tuple(a for _, a in self.slots)


def build_cover(space: CandidateSpace, indices: Sequence[int]) -> Cover:
    model = space.model
    by_slot: dict[int, list[tuple[int, ...]]] = {}
    for i in indices:
        c = space.candidates[i]
        by_slot.setdefault(c.slot, []).append(c.word)
    slots = []
    slot_cost = []
    slot_lam = []
    for m in sorted(by_slot):
        words = sorted(by_slot[m])
        union = CylinderUnion(model.n, tuple(Cylinder(m, w) for w in words))
        slots.append((m, union))
        slot_cost.append(sum((model.phi_cylinder(Cylinder(0, w)) for w in words), Fraction(0)))
        slot_lam.append(sum((model.lam_cylinder(Cylinder(m, w)) for w in words), Fraction(0)))
    sets = [a for _, a in slots]
    disjoint = all(
        sets[i].intersect(sets[j]).is_empty
        for i in range(len(sets))
        for j in range(i + 1, len(sets))
    )
    cost = sum((space.candidates[i].cost for i in indices), Fraction(0))
    return Cover(tuple(slots), cost, tuple(slot_cost), tuple(slot_lam), tuple(sorted(indices)), disjoint)


def empty_cover(n_symbols: int) -> Cover:
    return Cover((), Fraction(0), (), (), (), True)


def disjointify(cover: Cover, model: MarkovModel) -> Cover:
    """Subtract later slots from earlier ones; drops overlaps, never raises cost.

    The shallowest slot is kept; slot m loses everything covered by slots
    m+1..0.  Each difference stays inside the slot's algebra because deeper
    slots generate coarser ones.
    """
    slots = dict(cover.slots)
    ms = sorted(slots)
    out = []
    out_cost = []
    out_lam = []
    for i, m in enumerate(ms):
        a = slots[m]
        for m2 in ms[i + 1:]:
            a = a.difference(slots[m2])
        if a.is_empty:
            continue
        out.append((m, a))
        shifted = a.shift(-m)
        out_cost.append(model.phi(shifted))
        out_lam.append(model.lam(a))
    return Cover(
        tuple(out),
        sum(out_cost, Fraction(0)),
        tuple(out_cost),
        tuple(out_lam),
        (),
        True,
    )


def cover_objective(cover: Cover, model: MarkovModel, weight: WeightSpec) -> Value:
    """Sum over slots of the weighted-density integral of the slot at time zero."""
    total: Value = Fraction(0)
    for m, a in cover.slots:
        total = total + model.integral(a.shift(-m), weight)
    return total


# -- the truncated base measure ---------------------------------------------------


@dataclass(frozen=True)
class PhiResult:
    value: Fraction
    witness: Cover
    space: CandidateSpace
    mode: str

    def as_report(self):
        return {
            "construction": "phi",
            "query": self.space.query.literal(),
            "horizon": self.space.horizon.as_dict(),
            "value": self.value,
            "witness": self.witness.literal(),
        }


def phi_truncated(model: MarkovModel, query: CylinderUnion, horizon: Horizon, mode="auto") -> PhiResult:
    """Exact minimum cover cost at the horizon; certified upper bound of the
    untruncated value, monotone nonincreasing in depth and length."""
    space = CandidateSpace(model, query, horizon)
    if not space.universe:
        return PhiResult(Fraction(0), empty_cover(model.n), space, mode)
    value, idx = minimize_over_covers(space, space.costs(), (), mode)
    return PhiResult(Fraction(value), build_cover(space, idx), space, mode)


@dataclass(frozen=True)
class ShiftEntry:
    shift: int
    value: Fraction
    representable: bool
    artifact: bool


@dataclass(frozen=True)
class ShiftSequence:
    entries: tuple[ShiftEntry, ...]

    @property
    def reference(self) -> Fraction:
        return min(e.value for e in self.entries)

    def monotone(self) -> bool:
        """Nondecreasing across consecutive representable entries."""
        ok = True
        prev = None
        for e in self.entries:
            if not e.representable:
                continue
            if prev is not None and e.value < prev:
                ok = False
            prev = e.value
        return ok

    def as_report(self):
        return {
            "values": [e.value for e in self.entries],
            "representable": [e.representable for e in self.entries],
            "artifacts": [e.artifact for e in self.entries],
            "reference": self.reference,
            "monotone": self.monotone(),
        }


def phi_shift_sequence(model, query, horizon, n_max: int, mode="auto") -> ShiftSequence:
    """Truncated values along backward shifts of the query.

    The untruncated sequence is nondecreasing; a truncated decrease is
    flagged as an artifact (it can only come from the horizon).
    """
    entries = []
    prev = None
    for i in range(n_max + 1):
        q = query.shift(i)
        res = phi_truncated(model, q, horizon, mode)
        rep = res.space.representable()
        artifact = prev is not None and res.value < prev
        entries.append(ShiftEntry(i, res.value, rep, artifact))
        prev = res.value
    return ShiftSequence(tuple(entries))


def phi_reference(model, query, horizon, shifts: int = 0, mode="auto") -> Fraction:
    """Best (smallest) truncated value across the requested shifts."""
    return phi_shift_sequence(model, query, horizon, shifts, mode).reference


def default_eps_ladder(reference: Fraction, k: int = 6) -> tuple[Fraction, ...]:
    """Geometric ladder 2^-1..2^-k scaled by the reference (absolute if it is 0)."""
    scale = reference if reference > 0 else Fraction(1)
    return tuple(scale * Fraction(1, 2 ** j) for j in range(1, k + 1))


# -- near-optimal cover families ----------------------------------------------------


def cover_family(
    model: MarkovModel,
    query: CylinderUnion,
    eps: Fraction,
    horizon: Horizon,
    reference: Fraction | None = None,
    disjoint: bool = False,
    space: CandidateSpace | None = None,
) -> Iterator[Cover]:
    """Enumerate the covers at the horizon with cost strictly below ref+eps.

    The optimal witness always qualifies, so the family is nonempty.  With
    ``disjoint`` each yielded cover is pairwise-disjointified first, which
    drops overlaps and never raises the cost.
    """
    if eps <= 0:
        raise ParameterRange("eps must be > 0")
    if space is None:
        space = CandidateSpace(model, query, horizon)
    if not space.universe:
        yield empty_cover(model.n)
        return
    if reference is None:
        reference = Fraction(minimize_over_covers(space, space.costs(), (), "auto")[0])
    bound = reference + eps
    k = len(space.candidates)
    masks = [c.mask for c in space.candidates]
    costs = space.costs()
    suffix_or = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix_or[i] = suffix_or[i + 1] | masks[i]
    chosen: list[int] = []

    def rec(i, covered, cost):
        if not cost < bound:
            return
        if covered | suffix_or[i] != space.full_mask:
            return
        if i == k:
            if covered == space.full_mask:
                yield tuple(chosen)
            return
        chosen.append(i)
        yield from rec(i + 1, covered | masks[i], cost + costs[i])
        chosen.pop()
        yield from rec(i + 1, covered, cost)

    for idx in rec(0, 0, Fraction(0)):
        cover = build_cover(space, idx)
        yield disjointify(cover, model) if disjoint else cover


# -- constrained second-level infima --------------------------------------------------


@dataclass(frozen=True)
class LadderLevel:
    """One nesting level: keep covers whose ``weight`` total is < ref + eps."""

    weight: WeightSpec
    reference: Value


@dataclass(frozen=True)
class NestedConstraint:
    """Constraint ladder; level one is always the cover-cost threshold."""

    phi_reference: Fraction
    levels: tuple[LadderLevel, ...] = ()


@dataclass(frozen=True)
class ConstrainedResult:
    construction: str
    query: str
    horizon: dict
    eps: Fraction
    value: Value
    witness: Cover
    ladder: NestedConstraint

    def as_report(self):
        return {
            "construction": self.construction,
            "query": self.query,
            "horizon": self.horizon,
            "epsilon": self.eps,
            "value": self.value,
            "witness": self.witness.literal(),
            "certificate": {
                "phi_reference": self.ladder.phi_reference,
                "levels": [
                    {"weight": lv.weight.label(), "reference": lv.reference}
                    for lv in self.ladder.levels
                ],
            },
        }


def constrained_minimum(
    model: MarkovModel,
    query: CylinderUnion,
    objective: WeightSpec,
    eps: Fraction,
    horizon: Horizon,
    ladder: NestedConstraint | None = None,
    mode: str = "auto",
    space: CandidateSpace | None = None,
    label: str | None = None,
) -> ConstrainedResult:
    """Exact minimum of the objective over the constrained truncated family.

    ``eps = 0`` is accepted as the family limit: thresholds become
    non-strict at the reference (the covers optimal for every level).
    """
    if eps < 0:
        raise ParameterRange("eps must be >= 0")
    if space is None:
        space = CandidateSpace(model, query, horizon)
    if ladder is None:
        ladder = NestedConstraint(phi_reference=phi_reference(model, query, horizon))
    if not space.universe:
        return ConstrainedResult(
            label or objective.label(), query.literal(), horizon.as_dict(), eps,
            Fraction(0), empty_cover(model.n), ladder,
        )
    strict = eps != 0  # eps 0 means the closure family: totals at the reference
    constraints = [BudgetConstraint(space.costs(), ladder.phi_reference + eps, strict)]
    for lv in ladder.levels:
        constraints.append(
            BudgetConstraint(space.objective(lv.weight), lv.reference + eps, strict)
        )
    value, idx = minimize_over_covers(space, space.objective(objective), constraints, mode)
    return ConstrainedResult(
        label or objective.label(), query.literal(), horizon.as_dict(), eps,
        value, build_cover(space, idx), ladder,
    )


@dataclass(frozen=True)
class LadderResult:
    """Values of one construction along a decreasing eps ladder, fixed refs."""

    construction: str
    query: str
    horizon: dict
    eps_ladder: tuple[Fraction, ...]
    values: tuple[Value, ...]
    ladder: NestedConstraint
    witness: Cover

    @property
    def final(self) -> Value:
        return self.values[-1]

    def monotone(self) -> bool:
        """Nondecreasing as eps decreases (the family shrinks)."""
        return all(b >= a for a, b in zip(self.values, self.values[1:]))

    def as_report(self):
        return {
            "construction": self.construction,
            "query": self.query,
            "horizon": self.horizon,
            "eps_ladder": list(self.eps_ladder),
            "values": list(self.values),
            "final": self.final,
            "monotone": self.monotone(),
            "witness": self.witness.literal(),
            "certificate": {
                "phi_reference": self.ladder.phi_reference,
                "levels": [
                    {"weight": lv.weight.label(), "reference": lv.reference}
                    for lv in self.ladder.levels
                ],
            },
        }


def _ladder_run(model, query, objective, eps_ladder, horizon, ladder, mode, label) -> LadderResult:
    if not eps_ladder or any(e <= 0 for e in eps_ladder):
        raise ParameterRange("eps ladder entries must be > 0")
    if any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise ParameterRange("eps ladder must be strictly decreasing")
    space = CandidateSpace(model, query, horizon)
    values = []
    witness = None
    for eps in eps_ladder:
        res = constrained_minimum(
            model, query, objective, eps, horizon, ladder, mode, space, label
        )
        values.append(res.value)
        witness = res.witness
    return LadderResult(
        label, query.literal(), horizon.as_dict(), tuple(eps_ladder),
        tuple(values), ladder, witness,
    )


def relative_entropy(
    model, query, horizon, eps_ladder=None, mode="auto", offset=False, shifts=0
) -> LadderResult:
    """Infimum of the entropy integrand over near-optimal covers, eps ladder.

    ``offset`` switches to the nonnegative integrand (entropy + cost/e).
    """
    ref = phi_reference(model, query, horizon, shifts, mode)
    if eps_ladder is None:
        eps_ladder = default_eps_ladder(ref)
    ladder = NestedConstraint(phi_reference=ref)
    weight = WeightSpec(1, 1, 1 / math.e) if offset else WEIGHT_ENTROPY
    label = "entropy-offset" if offset else "entropy"
    return _ladder_run(model, query, weight, eps_ladder, horizon, ladder, mode, label)


def hellinger_measure(
    model, query, horizon, alpha, eps_ladder=None, mode="auto", shifts=0
) -> LadderResult:
    """Infimum of the density-power integral over near-optimal covers."""
    if not 0 <= alpha <= 1:
        raise ParameterRange("alpha must lie in [0,1]")
    ref = phi_reference(model, query, horizon, shifts, mode)
    if eps_ladder is None:
        eps_ladder = default_eps_ladder(ref)
    ladder = NestedConstraint(phi_reference=ref)
    return _ladder_run(
        model, query, WeightSpec(alpha, 0), eps_ladder, horizon, ladder, mode,
        f"hellinger[alpha={alpha:g}]",
    )


def nested_ladder(
    model, query, horizon, alpha0, n, eps, mode="auto", space=None
) -> NestedConstraint:
    """Build the depth-``n`` constraint ladder for exponent ``alpha0``.

    Level k (2 <= k <= n) thresholds the previous level's objective
    z^alpha0 * log(z)^(k-2) against its own constrained minimum at the same
    eps; level one is the cover-cost threshold.
    """
    if n < 1:
        raise ParameterRange("n must be >= 1")
    ref = phi_reference(model, query, horizon, 0, mode)
    ladder = NestedConstraint(phi_reference=ref)
    for k in range(2, n + 1):
        w = WeightSpec(alpha0, k - 2)
        res = constrained_minimum(
            model, query, w, eps, horizon, ladder, mode, space,
        )
        ladder = NestedConstraint(ref, ladder.levels + (LadderLevel(w, res.value),))
    return ladder


def log_moment(
    model, query, horizon, n, alpha, alpha0, eps, mode="auto", space=None
) -> ConstrainedResult:
    """Minimum of z^alpha*log(z)^(n-1) over the depth-``n`` nested family.

    The base exponent may be 0 only at depth two; deeper ladders require a
    strictly positive base exponent.
    """
    if n < 2:
        raise ParameterRange("n must be >= 2")
    if n == 2:
        if not 0 <= alpha0 <= 1:
            raise ParameterRange("alpha0 must lie in [0,1]")
    elif not 0 < alpha0 <= 1:
        raise ParameterRange("alpha0 must lie in (0,1] for n >= 3")
    if space is None:
        space = CandidateSpace(model, query, horizon)
    ladder = nested_ladder(model, query, horizon, alpha0, n, eps, mode, space)
    return constrained_minimum(
        model, query, WeightSpec(alpha, n - 1), eps, horizon, ladder, mode, space,
        label=f"log-moment[n={n},alpha={alpha:g},base={alpha0:g}]",
    )


def alpha_entropy(model, query, horizon, alpha, eps, mode="auto", space=None) -> ConstrainedResult:
    """Entropy infimum over the power-constrained family (depth-two ladder).

    This is the depth-two log moment at full exponent: the entropy integrand
    minimized over covers near-optimal for both cost and the alpha-power.
    """
    return log_moment(model, query, horizon, 2, 1.0, alpha, eps, mode, space)


def hellinger_cross(
    model, query, horizon, alpha, gamma, eps, mode="auto", space=None
) -> ConstrainedResult:
    """Power-``alpha`` integral minimized over the gamma-constrained family."""
    if not (0 <= alpha <= 1 and 0 <= gamma <= 1):
        raise ParameterRange("alpha and gamma must lie in [0,1]")
    if space is None:
        space = CandidateSpace(model, query, horizon)
    ladder = nested_ladder(model, query, horizon, gamma, 2, eps, mode, space)
    res = constrained_minimum(
        model, query, WeightSpec(alpha, 0), eps, horizon, ladder, mode, space,
        label=f"hellinger-cross[alpha={alpha:g},gamma={gamma:g}]",
    )
    return res


@dataclass(frozen=True)
class ConstructionShiftSequence:
    """A constrained construction evaluated along backward shifts of the query.

    The untruncated sequence is nondecreasing in the shift; each shifted
    problem thresholds against its own truncated base reference.  Decreases
    are truncation artifacts, reported, never silently accepted.
    """

    construction: str
    eps: Fraction
    entries: tuple[tuple[int, Value, bool], ...]  # (shift, value, representable)

    def values(self):
        return [v for _, v, _ in self.entries]

    def monotone(self) -> bool:
        vals = [v for _, v, rep in self.entries if rep]
        return all(b >= a for a, b in zip(vals, vals[1:]))

    def as_report(self):
        return {
            "construction": self.construction,
            "epsilon": self.eps,
            "shifts": [s for s, _, _ in self.entries],
            "values": [v for _, v, _ in self.entries],
            "representable": [r for _, _, r in self.entries],
            "monotone": self.monotone(),
        }


def construction_shift_sequence(
    model, query, horizon, objective: WeightSpec, eps, n_max: int, mode="auto",
    label: str | None = None,
) -> ConstructionShiftSequence:
    """Shifted values of a level-one constrained construction (bar version)."""
    entries = []
    for i in range(n_max + 1):
        q = query.shift(i)
        space = CandidateSpace(model, q, horizon)
        ladder = NestedConstraint(phi_reference=phi_reference(model, q, horizon, 0, mode))
        res = constrained_minimum(model, q, objective, eps, horizon, ladder, mode, space)
        entries.append((i, res.value, space.representable()))
    return ConstructionShiftSequence(
        label or objective.label(), eps, tuple(entries)
    )


# -- monotonicity diagnostics ----------------------------------------------------


def horizon_chain(model, query, horizons: Sequence[Horizon], mode="auto"):
    """Truncated base values along growing horizons; must be nonincreasing."""
    values = [phi_truncated(model, query, h, mode).value for h in horizons]
    ok = all(b <= a for a, b in zip(values, values[1:]))
    return values, ok
