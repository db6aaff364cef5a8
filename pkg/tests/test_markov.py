import itertools
import math
import random
import warnings
from fractions import Fraction as F

import pytest

from ddmlab.errors import ModelError, NotInA0, NotIrreducibleWarning
from ddmlab.markov import make_model, stationary_vector
from ddmlab.symbolic import Cylinder, CylinderUnion, full_space

from oracles import phi0_word


def U(*cyls, n=2):
    return CylinderUnion(n, tuple(sorted(cyls)))


def brute_phi(model, cyl, depth=6):
    """Marginalize the unconstrained prefix by full path enumeration."""
    if cyl.is_full:
        return F(1)
    total = F(0)
    for prefix in itertools.product(range(1, model.n + 1), repeat=cyl.start):
        word = prefix + cyl.word
        total += phi0_word(model, word)
    return total


class TestValidation:
    def test_row_sum_checked(self):
        with pytest.raises(ModelError):
            make_model([[F(1, 2), F(1, 3)], [F(1, 2), F(1, 2)]], [F(1, 2), F(1, 2)])

    def test_initial_positive(self):
        with pytest.raises(ModelError):
            make_model([[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]], [F(1), F(0)])

    def test_stationary_checked(self):
        with pytest.raises(ModelError):
            make_model(
                [[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]],
                [F(1, 2), F(1, 2)],
                [F(3, 4), F(1, 4)],
            )

    def test_stationary_solve_exact(self):
        P = [[F(1, 3), F(2, 3)], [F(1, 4), F(3, 4)]]
        pi = stationary_vector(P)
        assert sum(pi) == 1
        assert tuple(sum(pi[i] * P[i][j] for i in range(2)) for j in range(2)) == pi

    def test_stationary_solve_rejects_reducible(self):
        with pytest.raises(ModelError):
            stationary_vector([[F(1), F(0)], [F(0), F(1)]])


class TestPhi:
    def test_word_formula(self, reference_model):
        assert reference_model.phi(U(Cylinder(0, (1, 2)))) == F(3, 8)

    def test_total_mass(self, reference_model):
        assert reference_model.phi(full_space(2)) == 1

    def test_marginalized_start(self, reference_model):
        q = U(Cylinder(1, (2,)))
        assert reference_model.phi(q) == F(1, 2)
        assert reference_model.phi(q) == brute_phi(reference_model, q.parts[0])

    def test_random_marginalization_matches_brute_force(self):
        rng = random.Random(3)
        for _ in range(25):
            n = rng.choice((2, 3))
            P = _random_stochastic(rng, n)
            pi = _random_positive_law(rng, n)
            m = make_model(P, pi, stationary_vector(P))
            start = rng.randint(0, 3)
            word = tuple(rng.randint(1, n) for _ in range(rng.randint(1, 3)))
            c = Cylinder(start, word)
            assert m.phi(CylinderUnion(n, (c,))) == brute_phi(m, c)

    def test_rejects_negative_start(self, reference_model):
        with pytest.raises(NotInA0):
            reference_model.phi(U(Cylinder(-1, (1,))))

    def test_additive_over_disjoint_parts(self, reference_model):
        whole = full_space(2).refine((0, 2))
        total = sum(
            (reference_model.phi(U(p)) for p in whole.parts), F(0)
        )
        assert total == 1


class TestLambda:
    def test_start_independent(self, reference_model):
        for s in (-5, -1, 0, 3):
            assert reference_model.lam(U(Cylinder(s, (2, 2)))) == F(1, 4)

    def test_total_mass(self, reference_model):
        assert reference_model.lam(full_space(2)) == 1

    def test_shift_invariance_on_random_cylinders(self, reference_model):
        rng = random.Random(5)
        for _ in range(50):
            word = tuple(rng.randint(1, 2) for _ in range(rng.randint(1, 4)))
            s = rng.randint(-4, 4)
            q = U(Cylinder(s, word))
            assert reference_model.lam(q) == reference_model.lam(q.shift(rng.randint(-3, 3)))

    def test_additive_over_random_partitions(self, reference_model, property_seed):
        # exact additivity of both measures over random window partitions
        rng = random.Random(property_seed + 11)
        for _ in range(30):
            window = (rng.randint(-2, 0), rng.randint(1, 2))
            whole = full_space(2).refine(window)
            cells = list(whole.parts)
            rng.shuffle(cells)
            cut = rng.randint(1, len(cells) - 1)
            a = CylinderUnion(2, tuple(sorted(cells[:cut])))
            b = CylinderUnion(2, tuple(sorted(cells[cut:])))
            assert reference_model.lam(a) + reference_model.lam(b) == 1
            shifted_a = a.shift(-window[0]) if window[0] < 0 else a
            shifted_b = b.shift(-window[0]) if window[0] < 0 else b
            assert reference_model.phi(shifted_a) + reference_model.phi(shifted_b) == 1


class TestDensityIntegrals:
    def test_density_values(self, reference_model):
        assert reference_model.density() == (F(2, 3), F(2))

    def test_normalization(self, reference_model):
        z = reference_model.density()
        assert sum(zi * pi for zi, pi in zip(z, reference_model.initial)) == 1

    def test_power_endpoints(self, reference_model):
        q = U(Cylinder(0, (1,)), Cylinder(0, (2, 1)))
        assert reference_model.integral_density_power(q, 0) == reference_model.phi(q)
        assert reference_model.integral_density_power(q, 1) == reference_model.lam(q)

    def test_half_power_closed_form(self, reference_model):
        # integral of sqrt(density) over 0[2]: sqrt(2)/4
        got = reference_model.integral_density_power(U(Cylinder(0, (2,))), 0.5)
        assert got == pytest.approx(math.sqrt(2) / 4, abs=1e-12)

    def test_entropy_zero_for_trivial_density(self, stationary_model):
        q = U(Cylinder(0, (1, 2)))
        assert stationary_model.integral_entropy(q) == 0
        assert stationary_model.kappa0(q) == pytest.approx(
            float(stationary_model.phi(q)) / math.e, abs=1e-15
        )

    def test_offset_entropy_example(self, reference_model):
        got = reference_model.kappa0(U(Cylinder(0, (1,))))
        expect = (F(2, 3) * math.log(2 / 3) + 1 / math.e) * F(3, 4)
        assert float(got) == pytest.approx(float(expect), abs=1e-12)
        assert got == pytest.approx(0.0731770268, abs=1e-9)
        assert got >= 0

    def test_full_space_entropy_is_divergence(self, reference_model):
        got = reference_model.integral_entropy(full_space(2))
        brute = sum(
            float(ps) * math.log(float(ps) / float(p))
            for ps, p in zip(reference_model.stationary, reference_model.initial)
        )
        assert float(got) == pytest.approx(brute, abs=1e-14)
        assert float(got) == pytest.approx(0.143841, abs=1e-6)

    def test_kappa_nonnegative_random(self, reference_model):
        rng = random.Random(9)
        for _ in range(60):
            word = tuple(rng.randint(1, 2) for _ in range(rng.randint(1, 3)))
            q = U(Cylinder(rng.randint(0, 2), word))
            assert reference_model.kappa0(q) >= 0

    def test_jensen_direction_random(self):
        rng = random.Random(13)
        for _ in range(40):
            n = rng.choice((2, 3))
            P = _random_stochastic(rng, n)
            m = make_model(P, _random_positive_law(rng, n), stationary_vector(P))
            word = tuple(rng.randint(1, n) for _ in range(rng.randint(1, 2)))
            q = CylinderUnion(n, (Cylinder(rng.randint(0, 1), word),))
            a = rng.random()
            lhs = float(m.phi(q)) ** (1 - a) * float(m.lam(q)) ** a
            assert float(m.integral_density_power(q, a)) <= lhs + 1e-12

    def test_entropy_mass_bound_random(self):
        # x*log(x) >= x-1 pointwise gives the mass-difference bound
        rng = random.Random(17)
        for _ in range(40):
            n = rng.choice((2, 3))
            P = _random_stochastic(rng, n)
            m = make_model(P, _random_positive_law(rng, n), stationary_vector(P))
            word = tuple(rng.randint(1, n) for _ in range(rng.randint(1, 2)))
            q = CylinderUnion(n, (Cylinder(rng.randint(0, 1), word),))
            assert float(m.integral_entropy(q)) >= float(m.lam(q) - m.phi(q)) - 1e-12


class TestTailSupremum:
    def test_trivial_density(self, stationary_model):
        ks = stationary_model.k_star()
        assert ks.exact_zero and ks.value == 0.0 and ks.irreducible

    def test_reference_value(self, reference_model):
        ks = reference_model.k_star()
        assert ks.value == pytest.approx(math.log(2), abs=1e-15)
        assert ks.essential_sup_density == 2

    def test_divergence_dominated(self):
        rng = random.Random(23)
        for _ in range(30):
            n = rng.choice((2, 3))
            P = _random_stochastic(rng, n)
            m = make_model(P, _random_positive_law(rng, n), stationary_vector(P))
            assert float(m.kl_divergence()) <= m.k_star().value + 1e-12

    def test_reducible_warns_and_matches_invariant_case(self, identity_model):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            ks = identity_model.k_star()
        assert any(issubclass(w.category, NotIrreducibleWarning) for w in caught)
        # invariant base law: the tail bound collapses to the divergence
        assert ks.value == pytest.approx(float(identity_model.kl_divergence()), abs=1e-15)

    def test_backward_visit_probability_tends_to_one(self, reference_model):
        # the recurrence behind the tail formula: the chance that symbol 2
        # never shows up in a backward window of length T vanishes
        for T, floor in ((5, 0.9), (20, 0.999)):
            miss = F(1, 2) ** T  # stationary chain, uniform marginals
            assert 1 - miss > floor


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
