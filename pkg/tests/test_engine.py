import math
import random
from fractions import Fraction as F

import pytest

from ddmlab.engine import (
    CandidateSpace,
    Horizon,
    alpha_entropy,
    constrained_minimum,
    cover_family,
    default_eps_ladder,
    disjointify,
    hellinger_cross,
    hellinger_measure,
    horizon_chain,
    log_moment,
    phi_shift_sequence,
    phi_truncated,
    relative_entropy,
)
from ddmlab.errors import EngineError, ParameterRange
from ddmlab.markov import WEIGHT_ENTROPY, WeightSpec, make_model, stationary_vector
from ddmlab.symbolic import Cylinder, CylinderUnion, empty_set, full_space, parse_literal

import oracles


def _random_stochastic(rng, n):
    rows = []
    for _ in range(n):
        nums = [rng.randint(1, 9) for _ in range(n)]
        s = sum(nums)
        rows.append([F(v, s) for v in nums])
    return rows


def _random_positive_law(rng, n):
    nums = [rng.randint(1, 9) for _ in range(n)]
    s = sum(nums)
    return [F(v, s) for v in nums]


def _random_model(rng, n):
    P = _random_stochastic(rng, n)
    return make_model(P, _random_positive_law(rng, n), stationary_vector(P))


def _random_query(rng, model, horizon):
    kind = rng.random()
    if kind < 0.3:
        return full_space(model.n)
    lo, hi = horizon.window
    start = rng.randint(lo, hi)
    max_len = hi - start + 1
    word = tuple(rng.randint(1, model.n) for _ in range(rng.randint(1, max_len)))
    return CylinderUnion(model.n, (Cylinder(start, word),))


class TestPhiTruncated:
    def test_stationary_full_space_is_one(self, stationary_model, h22):
        res = phi_truncated(stationary_model, full_space(2), h22)
        assert res.value == 1 and isinstance(res.value, F)

    def test_reference_full_space(self, reference_model, h22):
        # frozen from the independent brute-force oracle
        res = phi_truncated(reference_model, full_space(2), h22)
        assert res.value == F(3, 4)

    def test_single_cylinder_optimal(self, reference_model, h22):
        res = phi_truncated(reference_model, parse_literal("0[2]", 2), h22)
        assert res.value == F(1, 4)
        assert res.witness.literal() == {"0": "0[2]"}

    def test_empty_query(self, reference_model, h22):
        res = phi_truncated(reference_model, empty_set(2), h22)
        assert res.value == 0 and res.witness.slots == ()

    def test_matches_independent_oracle(self, reference_model, h22):
        got = phi_truncated(reference_model, full_space(2), h22).value
        assert got == oracles.brute_minimum(reference_model, full_space(2), h22)[0]

    def test_exact_mode_refuses_large_instances(self, reference_model):
        with pytest.raises(EngineError):
            phi_truncated(reference_model, full_space(2), Horizon(4, 3), mode="exact")

    def test_exact_equals_bnb_small_batch(self):
        rng = random.Random(101)
        for _ in range(20):
            n = rng.choice((2, 3))
            model = _random_model(rng, n)
            horizon = Horizon(rng.randint(0, 2), 1) if n == 3 else Horizon(
                rng.randint(0, 2), rng.randint(1, 2)
            )
            q = _random_query(rng, model, horizon)
            a = phi_truncated(model, q, horizon, mode="exact")
            b = phi_truncated(model, q, horizon, mode="bnb")
            assert a.value == b.value
            assert a.witness.chosen == b.witness.chosen


class TestShiftSequence:
    def test_full_space_constant(self, reference_model, h22):
        seq = phi_shift_sequence(reference_model, full_space(2), h22, 3)
        assert len({e.value for e in seq.entries}) == 1
        assert seq.monotone()

    def test_stationary_cylinder_constant_while_representable(self, stationary_model, h22):
        seq = phi_shift_sequence(stationary_model, parse_literal("0[2]", 2), h22, 2)
        # constant on the representable range; the last shift leaves the
        # window and degrades to the full-space value (oracle-confirmed)
        assert [e.value for e in seq.entries] == [F(1, 2), F(1, 2), F(1)]
        assert [e.representable for e in seq.entries] == [True, True, False]

    def test_reference_cylinder_frozen_oracle_values(self, reference_model, h22):
        # frozen from the independent oracle: shifting right degrades toward
        # the full-space value once the window is exhausted
        seq = phi_shift_sequence(reference_model, parse_literal("0[2]", 2), h22, 2)
        assert [e.value for e in seq.entries] == [F(1, 4), F(1, 2), F(3, 4)]
        assert [e.representable for e in seq.entries] == [True, True, False]
        assert seq.monotone()
        assert seq.reference == F(1, 4)


class TestCoverFamily:
    def test_huge_eps_yields_every_cover(self, reference_model, h22):
        fam = list(cover_family(reference_model, parse_literal("0[2]", 2), F(100), h22))
        # independent count: every covering subset of the candidate list
        lo, hi = h22.window
        univ = oracles.query_window_words(reference_model, parse_literal("0[2]", 2), lo, hi)
        cands = [
            c for c in oracles.candidates(reference_model, h22)
            if any(oracles.covers_word(c, u, lo) for u in univ)
        ]
        count = 0
        for bits in range(1 << len(cands)):
            chosen = [c for i, c in enumerate(cands) if bits >> i & 1]
            if all(any(oracles.covers_word(c, u, lo) for c in chosen) for u in univ):
                count += 1
        assert len(fam) == count

    def test_small_eps_keeps_only_optimal(self, reference_model, h22):
        fam = list(cover_family(reference_model, parse_literal("0[2]", 2), F(1, 1000), h22))
        assert {c.cost for c in fam} == {F(1, 4)}

    def test_optimal_witness_qualifies(self, reference_model, h22):
        fam = list(cover_family(reference_model, full_space(2), F(1, 64), h22))
        assert fam and min(c.cost for c in fam) == F(3, 4)

    def test_disjoint_variant_never_costs_more(self, reference_model, h22):
        plain = list(cover_family(reference_model, full_space(2), F(1, 2), h22))
        for cover in plain:
            d = disjointify(cover, reference_model)
            assert d.disjoint
            assert d.cost <= cover.cost
            # the disjointified family still covers: same union of slots
            union = empty_set(2)
            for _, a in cover.slots:
                union = union.union(a)
            dunion = empty_set(2)
            for _, a in d.slots:
                dunion = dunion.union(a)
            assert union.same_point_set(dunion)

    def test_requires_positive_eps(self, reference_model, h22):
        with pytest.raises(ParameterRange):
            list(cover_family(reference_model, full_space(2), F(0), h22))


class TestConstrainedMinimum:
    def test_trivial_weight_recovers_phi(self, reference_model, h22):
        for q in (full_space(2), parse_literal("0[2]", 2)):
            res = constrained_minimum(
                reference_model, q, WeightSpec(0, 0), F(1, 8), h22
            )
            assert res.value == phi_truncated(reference_model, q, h22).value

    def test_density_weight_meets_invariant_mass(self, stationary_model, h22):
        res = constrained_minimum(
            stationary_model, parse_literal("0[2]", 2), WeightSpec(1, 0), F(1, 8), h22
        )
        assert res.value == stationary_model.lam(parse_literal("0[2]", 2))

    def test_trivial_density_entropy_zero(self, stationary_model, h22):
        for eps in (F(1, 2), F(1, 8), F(1, 64)):
            res = constrained_minimum(
                stationary_model, full_space(2), WEIGHT_ENTROPY, eps, h22
            )
            assert res.value == 0 and isinstance(res.value, F)

    def test_empty_query_all_constructions_zero(self, reference_model, h22):
        res = constrained_minimum(
            reference_model, empty_set(2), WEIGHT_ENTROPY, F(1, 8), h22
        )
        assert res.value == 0 and res.witness.slots == ()

    def test_constrained_exact_equals_bnb(self, reference_model, h22):
        # the budgeted search handles negative contributions; it must agree
        # with plain exhaustive enumeration on value and witness
        for weight in (WEIGHT_ENTROPY, WeightSpec(0.5, 0), WeightSpec(0.5, 1)):
            for eps in (F(1, 2), F(1, 8)):
                a = constrained_minimum(
                    reference_model, full_space(2), weight, eps, h22, mode="exact"
                )
                b = constrained_minimum(
                    reference_model, full_space(2), weight, eps, h22, mode="bnb"
                )
                assert a.value == b.value
                assert a.witness.chosen == b.witness.chosen

    def test_budget_exploits_negative_contributions(self, reference_model, h22):
        # with slack in the budget the minimizer adds mass with negative
        # entropy integrand beyond what covering needs
        tight = relative_entropy(reference_model, full_space(2), h22, [F(1, 64)]).final
        loose = relative_entropy(reference_model, full_space(2), h22, [F(2)]).final
        assert float(loose) < float(tight)

    def test_constrained_values_match_independent_oracle(self, property_seed):
        # budgeted minima re-derived by the first-principles subset scan
        rng = random.Random(property_seed + 7)
        for _ in range(15):
            model = _random_model(rng, 2)
            horizon = Horizon(rng.randint(0, 1), rng.randint(1, 2))
            query = _random_query(rng, model, horizon)
            ref = phi_truncated(model, query, horizon).value
            eps = F(rng.randint(1, 4), 8)
            got = constrained_minimum(model, query, WEIGHT_ENTROPY, eps, horizon)
            cost = lambda c: oracles.phi0_word(model, c[1])
            ent = oracles.weighted_objective(model, 1, 1)
            brute = oracles.brute_minimum(
                model, query, horizon, objective=ent,
                budgets=[(cost, ref + eps, True)],
            )
            expect = brute[0] if brute else F(0)
            assert float(got.value) == float(expect)


class TestEntropyLadder:
    def test_reference_frozen_oracle_values(self, reference_model, h22):
        # frozen from the independent subset-scan oracle
        lad = relative_entropy(
            reference_model, full_space(2), h22, [F(1, 2), F(1, 4), F(1, 8)]
        )
        assert float(lad.values[0]) == pytest.approx(0.14384103622589045, abs=1e-14)
        assert float(lad.values[1]) == pytest.approx(0.4184941083929179, abs=1e-14)
        assert float(lad.values[2]) == pytest.approx(0.4184941083929179, abs=1e-14)
        assert lad.monotone()

    def test_invariant_base_collapses_to_divergence(self, identity_model, h22):
        lad = relative_entropy(identity_model, full_space(2), h22)
        k = float(identity_model.kl_divergence())
        assert all(abs(float(v) - k) < 1e-12 for v in lad.values)

    def test_rejects_nondecreasing_ladder(self, reference_model, h22):
        with pytest.raises(ParameterRange):
            relative_entropy(reference_model, full_space(2), h22, [F(1, 8), F(1, 2)])

    def test_monotone_in_eps_everywhere(self):
        rng = random.Random(31)
        for _ in range(10):
            model = _random_model(rng, 2)
            horizon = Horizon(rng.randint(0, 2), rng.randint(1, 2))
            q = _random_query(rng, model, horizon)
            lad = relative_entropy(model, q, horizon)
            assert lad.monotone()
            h = hellinger_measure(model, q, horizon, rng.random())
            assert h.monotone()


class TestHellinger:
    def test_endpoint_zero_is_phi(self, reference_model, h22):
        lad = hellinger_measure(reference_model, full_space(2), h22, 0.0)
        assert lad.final == F(3, 4)

    def test_endpoint_one_is_invariant_mass(self, reference_model, h22):
        lad = hellinger_measure(reference_model, full_space(2), h22, 1.0)
        assert lad.final == 1

    def test_trivial_density_flat(self, stationary_model, h22):
        for a in (0.1, 0.5, 0.9):
            lad = hellinger_measure(stationary_model, full_space(2), h22, a)
            assert all(v == 1 for v in lad.values)

    def test_half_power_frozen_oracle_value(self, reference_model, h22):
        lad = hellinger_measure(reference_model, full_space(2), h22, 0.5, [F(1, 8)])
        assert float(lad.final) == pytest.approx(0.8365163037378078, abs=1e-14)

    def test_cross_endpoints(self, reference_model, h22):
        c0 = hellinger_cross(reference_model, full_space(2), h22, 0.0, 0.5, F(1, 8))
        c1 = hellinger_cross(reference_model, full_space(2), h22, 1.0, 0.5, F(1, 8))
        phi = phi_truncated(reference_model, full_space(2), h22).value
        assert abs(float(c0.value) - float(phi)) <= float(F(1, 8)) + 1e-12
        assert abs(float(c1.value) - 1.0) <= float(F(1, 8)) + 1e-12
        c_plain = hellinger_cross(reference_model, full_space(2), h22, 0.5, 0.0, F(1, 8))
        h_plain = hellinger_measure(reference_model, full_space(2), h22, 0.5, [F(1, 8)])
        assert abs(float(c_plain.value) - float(h_plain.final)) <= float(F(1, 8)) + 1e-12


class TestLogMoment:
    def test_frozen_oracle_value(self, reference_model, h22):
        res = log_moment(reference_model, full_space(2), h22, 2, 0.5, 0.5, F(1, 8))
        assert float(res.value) == pytest.approx(0.24344897587977754, abs=1e-14)

    def test_depth_two_full_exponent_is_alpha_entropy(self, reference_model, h22):
        a = log_moment(reference_model, full_space(2), h22, 2, 1.0, 0.5, F(1, 8))
        b = alpha_entropy(reference_model, full_space(2), h22, 0.5, F(1, 8))
        assert a.value == b.value

    def test_trivial_density_vanishes(self, stationary_model, h22):
        res = log_moment(stationary_model, full_space(2), h22, 2, 0.5, 0.5, F(1, 8))
        assert res.value == 0

    def test_parameter_validation(self, reference_model, h22):
        with pytest.raises(ParameterRange):
            log_moment(reference_model, full_space(2), h22, 1, 0.5, 0.5, F(1, 8))
        with pytest.raises(ParameterRange):
            log_moment(reference_model, full_space(2), h22, 3, 0.5, 0.0, F(1, 8))
        # depth two allows a zero base exponent
        log_moment(reference_model, full_space(2), h22, 2, 0.5, 0.0, F(1, 8))

    def test_depth_three_runs(self, reference_model, h22):
        res = log_moment(reference_model, full_space(2), h22, 3, 0.5, 0.5, F(1, 8))
        assert math.isfinite(float(res.value))
        assert len(res.ladder.levels) == 2


class TestShiftedConstructions:
    def test_entropy_shift_sequence(self, reference_model, h22):
        from ddmlab.engine import construction_shift_sequence

        bar = construction_shift_sequence(
            reference_model, parse_literal("0[2]", 2), h22, WEIGHT_ENTROPY,
            F(1, 8), n_max=2, label="entropy",
        )
        assert len(bar.entries) == 3
        assert [rep for _, _, rep in bar.entries] == [True, True, False]
        rep = bar.as_report()
        assert rep["construction"] == "entropy"

    def test_trivial_density_shift_sequence_constant(self, stationary_model, h22):
        from ddmlab.engine import construction_shift_sequence

        bar = construction_shift_sequence(
            stationary_model, full_space(2), h22, WEIGHT_ENTROPY, F(1, 8), 3
        )
        assert all(v == 0 for v in bar.values())
        assert bar.monotone()


class TestMonotonicity:
    def test_horizon_growth_never_raises_phi(self, reference_model):
        horizons = [Horizon(0, 1), Horizon(0, 2), Horizon(1, 2), Horizon(2, 2)]
        values, ok = horizon_chain(reference_model, full_space(2), horizons)
        assert ok
        assert values[0] == 1 and values[-1] == F(3, 4)

    def test_deep_horizons_tighten_toward_certified_floor(self, reference_model):
        # the advertised caps stay usable; values squeeze toward the
        # tail-supremum floor 1/2 from above (regression: must stay fast)
        import time

        t0 = time.perf_counter()
        deep = [phi_truncated(reference_model, full_space(2), h).value
                for h in (Horizon(2, 2), Horizon(3, 3), Horizon(4, 4))]
        assert time.perf_counter() - t0 < 5.0
        assert deep == [F(3, 4), F(5, 8), F(9, 16)]
        assert all(v > F(1, 2) for v in deep)

    def test_horizon_growth_random(self):
        rng = random.Random(41)
        for _ in range(8):
            model = _random_model(rng, 2)
            q = _random_query(rng, model, Horizon(1, 1))
            values, ok = horizon_chain(
                model, q, [Horizon(0, 1), Horizon(1, 1), Horizon(1, 2), Horizon(2, 2)]
            )
            assert ok

    def test_default_ladder_scales_with_reference(self):
        lad = default_eps_ladder(F(3, 4))
        assert lad[0] == F(3, 8) and lad[-1] == F(3, 256)
        assert all(b < a for a, b in zip(lad, lad[1:]))
        assert default_eps_ladder(F(0))[0] == F(1, 2)


class TestSolverInternals:
    def test_tie_break_is_lexicographic(self, stationary_model, h22):
        # the stationary full space has several optimal covers; the witness
        # must be the canonically least index set in both modes
        a = phi_truncated(stationary_model, full_space(2), h22, mode="exact")
        b = phi_truncated(stationary_model, full_space(2), h22, mode="bnb")
        assert a.witness.chosen == b.witness.chosen

    def test_zero_cost_candidates_agree_across_modes(self, h22):
        # a periodic chain creates zero-mass words, i.e. zero-cost
        # candidates; value AND witness must still agree between modes
        model = make_model(
            [[F(0), F(1)], [F(1), F(0)]], [F(3, 4), F(1, 4)], [F(1, 2), F(1, 2)]
        )
        for lit in ("X", "0[2]", "-1[1 2]"):
            q = parse_literal(lit, 2)
            a = phi_truncated(model, q, h22, mode="exact")
            b = phi_truncated(model, q, h22, mode="bnb")
            assert a.value == b.value
            assert a.witness.chosen == b.witness.chosen

    def test_sparse_chains_agree_across_modes(self, property_seed):
        # random sparse rows maximize cost ties; modes must stay bit-exact
        rng = random.Random(property_seed + 23)
        done = 0
        while done < 30:
            n = rng.choice((2, 3))
            rows = []
            for i in range(n):
                row = [F(0)] * n
                support = rng.sample(range(n), rng.randint(1, n))
                if (i + 1) % n not in support:
                    support.append((i + 1) % n)  # keep a cycle alive
                nums = [rng.randint(1, 5) for _ in support]
                for j, v in zip(support, nums):
                    row[j] = F(v, sum(nums))
                rows.append(row)
            try:
                model = make_model(rows, _random_positive_law(rng, n),
                                   stationary_vector(rows))
            except Exception:
                continue
            horizon = Horizon(rng.randint(0, 2), 1) if n == 3 else Horizon(
                rng.randint(0, 2), rng.randint(1, 2))
            q = _random_query(rng, model, horizon)
            a = phi_truncated(model, q, horizon, mode="exact")
            b = phi_truncated(model, q, horizon, mode="bnb")
            assert a.value == b.value
            assert a.witness.chosen == b.witness.chosen
            done += 1

    def test_space_candidates_restricted_to_query(self, reference_model, h22):
        space = CandidateSpace(reference_model, parse_literal("0[2]", 2), h22)
        assert all(c.mask for c in space.candidates)
        full = CandidateSpace(reference_model, full_space(2), h22)
        assert len(space.candidates) < len(full.candidates)
