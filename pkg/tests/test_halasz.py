import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest

from singbound.certify import (Certificate, gamma_cert_exponent2, gamma_cert_small_mu, pm2_cert,
                               symmetrized_cert)
from singbound.dist import DiscreteDist, SymmetricDist, bernoulli, gamma, pm2
from singbound.errors import DomainError, NegativeBase
from singbound.fieldq import PrimeField
from singbound.halasz import (
    HalaszParams, HyperplaneQ, RowModel, bohr_set, classify_exceptional, combinatorial_dimension,
    f_eval, f_j_eval, floor_on_4lambda, g_k_eval, hit_probability, hit_probability_laws,
    holder_chain, lambda_norm, lambda_norm_sq, lambda_norm_sq_upper, segment_domination_holds, loe_bound,
    loe_exact, odlyzko_bound, odlyzko_check, segment_bounds, segment_vector, spectrum,
    spectrum_sandwich, sqrt_triangle_holds, strict_margin, subspace_hit, sumset,
)

from strategies import random_model, random_plane

PRIMES = [5, 7, 11, 13, 17, 29, 31, 53, 101]


def brute_hit(laws, weights, Q):
    out = F(0)
    for combo in itertools.product(*(d.atoms for d in laws)):
        if sum(v * a for (v, _), a in zip(combo, weights)) % Q == 0:
            out += math.prod(p for _, p in combo)
    return out


def bern_model(n, **kw):
    return RowModel.iid(bernoulli(), symmetrized_cert(bernoulli()), n, **kw)


class TestTypes:
    def test_plane(self):
        V = HyperplaneQ([1, 2, 3], 7)
        assert V.contains([1, 3, 0]) and not V.contains([1, 0, 0])
        assert HyperplaneQ.from_json(V.to_json()).normal == V.normal
        with pytest.raises(DomainError):
            HyperplaneQ([0, 7], 7)

    def test_model_round_trip(self):
        m = RowModel.iid(gamma(F(1, 3)), gamma_cert_small_mu(F(1, 3)), 3)
        back = RowModel.from_json(m.to_json())
        assert back.to_json() == m.to_json()
        assert m.mu_bar == F(1, 3) - F(1, 10000)

    def test_mixed_certificates_rejected(self):
        with pytest.raises(DomainError):
            RowModel([gamma(F(1, 2))] * 2, [gamma_cert_small_mu(F(1, 2)), gamma_cert_exponent2(F(1, 2))])

    def test_auto_params(self):
        m = bern_model(3)
        p = HalaszParams.auto(m)
        assert p.eps2_condition(m)
        assert p.eps2 == 0.0  # underflows, which is why the log is stored
        assert p.eps_m1 == strict_margin(m) == 0


class TestHitProbability:
    def test_bernoulli_pair(self):
        V = HyperplaneQ([1, 1], 101)
        m = bern_model(2)
        assert hit_probability(m, V) == hit_probability(m, V, "fourier") == F(1, 2)

    @pytest.mark.parametrize("mu", [F(1, 3), F(1, 2)])
    def test_first_coordinate(self, mu):
        V = HyperplaneQ([1, 0, 0], 11)
        m = RowModel.iid(gamma(mu), gamma_cert_small_mu(mu), 3)
        assert hit_probability(m, V) == 1 - mu

    def test_lazy_pair(self):
        V = HyperplaneQ([1, 1], 101)
        m = RowModel.iid(gamma(F(1, 2)), gamma_cert_small_mu(F(1, 2)), 2)
        assert hit_probability(m, V) == F(3, 8)

    def test_routes_agree(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            n = int(rng.integers(1, 5))
            Q = int(rng.choice(PRIMES))
            m = random_model(rng, n)
            V = random_plane(rng, n, Q)
            conv = hit_probability(m, V)
            assert conv == hit_probability(m, V, "fourier") == brute_hit(m.alphas, V.normal, Q)

    def test_bad_method(self):
        with pytest.raises(DomainError):
            hit_probability_laws([bernoulli()], [1], 5, method="x")


class TestDimensionAndClassification:
    def test_bernoulli_pair(self):
        assert combinatorial_dimension(bern_model(2), HyperplaneQ([1, 1], 101), F(1, 2)) == 1

    def test_first_coordinate(self):
        m = RowModel.iid(gamma(F(1, 2)), gamma_cert_small_mu(F(1, 2)), 2)
        assert combinatorial_dimension(m, HyperplaneQ([1, 0], 101), F(1, 2)) == 1

    def test_below_floor(self):
        assert combinatorial_dimension(bern_model(2), HyperplaneQ([1, 1], 101), F(9, 10)) == 0

    def test_bracket(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            m = random_model(rng, n)
            V = random_plane(rng, n, 31)
            p = F(int(rng.integers(1, 10)), 10)
            d = combinatorial_dimension(m, V, p)
            h = hit_probability(m, V)
            if d == 0:
                assert h <= p ** n
                continue
            e = n * n - int(d * n)  # n * (n - d)
            # p^((e+1)/n) < h <= p^(e/n), compared after raising to the n-th power
            assert p ** (e + 1) < h ** n <= p ** e

    def test_segments(self):
        assert segment_bounds(4, 2, 2) == (3, 4)
        assert segment_bounds(5, 2, 1) == (1, 2)
        assert segment_bounds(5, 1, 1) == (1, 5)
        for k in (0, 3):
            with pytest.raises(IndexError):
                segment_bounds(4, 2, k)

    def test_segment_vector_zeros(self):
        m = bern_model(4)
        laws = segment_vector(m, 2)
        assert laws[0].atoms == laws[1].atoms == ((0, 1),)
        assert laws[2].prob(0) == 1 - m.mu_bar

    def test_exceptional_r1(self):
        mu = F(1, 2)
        m = RowModel.iid(gamma(mu), gamma_cert_small_mu(mu), 3)
        c = classify_exceptional(m, HyperplaneQ([1, 1, 1], 101), HalaszParams(eps1=F(1, 2)), r=1)
        assert c.exceptional and c.witness is None and c.row_max == 1

    def test_tiny_eps1(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = random_model(rng, 3)
            V = random_plane(rng, 3, 13)
            assert classify_exceptional(m, V, HalaszParams(eps1=F(1, 10 ** 9))).exceptional

    def test_unexceptional(self):
        m = bern_model(4)
        V = HyperplaneQ([1, 1, 0, 0], 101)
        c = classify_exceptional(m, V, HalaszParams(eps1=F(1)), r=2)
        assert not c.exceptional and c.witness == (1, 2)
        assert c.max_hit < c.segment_hits[(1, 2)] == 1


class TestFunctionals:
    def test_f_at_zero(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            m = random_model(rng, 3)
            assert f_eval(m, random_plane(rng, 3, 17), 0) == pytest.approx(1.0)

    def test_direct_formula(self):
        m = RowModel.iid(gamma(F(1, 2)), gamma_cert_small_mu(F(1, 2)), 1)
        assert f_eval(m, HyperplaneQ([1], 5), 1) == pytest.approx(0.5 + 0.5 * math.cos(2 * math.pi / 5))

    def test_product_of_factors(self):
        m = RowModel.iid(pm2(F(1, 2)), pm2_cert(F(1, 2)), 3)
        V = HyperplaneQ([1, 4, 9], 31)
        for xi in range(31):
            assert f_eval(m, V, xi) == pytest.approx(math.prod(f_j_eval(m, V, xi, j) for j in (1, 2, 3)))

    def test_g_matches_f_when_mu_bar_near_mu(self):
        m = RowModel.iid(gamma(F(1, 2)), gamma_cert_exponent2(F(1, 2)), 4, eps0=F(1, 10 ** 9))
        V = HyperplaneQ([1, 2, 3, 5], 29)
        for xi in range(29):
            lo, hi = segment_bounds(4, 2, 1)
            fr = math.prod(f_j_eval(m, V, xi, j) ** 2 for j in range(lo, hi + 1))
            assert g_k_eval(m, V, xi, 1) == pytest.approx(fr, abs=1e-9)

    def test_negative_base(self):
        beta = SymmetricDist(F(1, 4), [(1, F(3, 8))])
        bad = Certificate.from_beta(beta, 1)
        m = RowModel.iid(gamma(F(3, 4)), bad, 1)
        with pytest.raises(NegativeBase):
            f_eval(m, HyperplaneQ([1], 5), 2)

    def test_g_index(self):
        with pytest.raises(IndexError):
            g_k_eval(bern_model(2), HyperplaneQ([1, 1], 5), 1, 3)


class TestSpectrum:
    def test_closed_form(self):
        # symmetrized Bernoulli: f(xi) = cos^2(2 pi xi / Q) when a = (1, 1)
        params = HalaszParams(log_eps2=math.log(0.5))
        lam = spectrum(bern_model(2), HyperplaneQ([1, 1], 13), params)
        expect = [x for x in range(13) if math.cos(2 * math.pi * x / 13) ** 2 >= 0.5]
        assert lam == expect == [0, 1, 5, 6, 7, 8, 12]

    def test_contains_zero(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            m = random_model(rng, 3)
            V = random_plane(rng, 3, 29)
            assert 0 in spectrum(m, V, HalaszParams(log_eps2=0.0))

    def test_point_mass_rows(self):
        cert = Certificate.from_beta(SymmetricDist(1, []), 1, q=1)
        m = RowModel.iid(DiscreteDist([(0, 1)]), cert, 2)
        assert spectrum(m, HyperplaneQ([1, 3], 11), HalaszParams()) == list(range(11))

    def test_sumset(self):
        assert sumset([0, 1], 7, 3) == [0, 1, 2, 3]
        assert sumset([1], 5, 5) == [0]


class TestLambdaNorm:
    def test_nine_terms(self):
        lam = [0, 1, 12]
        direct = sum(F(min((a - b) % 13, (b - a) % 13) ** 2, 169) for a in lam for b in lam) / 9
        assert lambda_norm_sq(1, lam, 13) == direct == F(4, 507)

    def test_zero_and_trivial_spectrum(self):
        assert lambda_norm(0, [0, 3, 5], 13) == 0
        assert all(lambda_norm(x, [0], 13) == 0 for x in range(13))
        assert bohr_set([0], 13) == list(range(13))

    def test_triangle_and_upper(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            Q = int(rng.choice(PRIMES))
            lam = sorted(set(rng.integers(0, Q, size=int(rng.integers(1, 6))).tolist()))
            x, y = (int(v) for v in rng.integers(0, Q, size=2))
            assert sqrt_triangle_holds(lambda_norm_sq((x + y) % Q, lam, Q),
                                       lambda_norm_sq(x, lam, Q), lambda_norm_sq(y, lam, Q))
            assert lambda_norm_sq(x, lam, Q) <= lambda_norm_sq_upper(x, lam, Q)
            assert 0 <= lambda_norm_sq(x, lam, Q) <= 1

    def test_bohr_membership(self):
        lam = [0, 1, 12]
        B = bohr_set(lam, 101, F(1, 10))
        assert B == [x for x in range(101) if lambda_norm_sq(x, lam, 101) < F(1, 100)]

    def test_sqrt_triangle(self):
        assert sqrt_triangle_holds(F(4), F(1), F(1))
        assert not sqrt_triangle_holds(F(5), F(1), F(1))


class TestInequalities:
    def test_segment_domination(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            n = int(rng.integers(1, 6))
            Q = int(rng.choice(PRIMES))
            m = random_model(rng, n)
            V = random_plane(rng, n, Q)
            assert segment_domination_holds(m, V, [int(rng.integers(Q))]).all()

    def test_holder_chain(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = int(rng.integers(1, 4))
            Q = int(rng.choice([5, 7, 11, 13, 17]))
            ch = holder_chain(random_model(rng, n), random_plane(rng, n, Q))
            assert ch.holds, ch

    def test_holder_chain_exhaustive_small(self):
        for Q in (5, 7):
            m = bern_model(2)
            for a in itertools.product(range(Q), repeat=2):
                if any(a):
                    assert holder_chain(m, HyperplaneQ(list(a), Q)).holds

    @pytest.mark.parametrize("eps2", [None, 0.9, 0.5, 0.1])
    def test_spectrum_sandwich(self, eps2):
        rng = np.random.default_rng(12)
        for _ in range(60):
            n = int(rng.integers(1, 5))
            m = random_model(rng, n)
            V = random_plane(rng, n, int(rng.choice(PRIMES)))
            params = HalaszParams.auto(m)
            if eps2 is not None:
                params.log_eps2 = math.log(eps2)
            rep = spectrum_sandwich(m, V, params)
            assert all(rep.checks.values()), rep.checks

    def test_floor_on_four_lambda(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            n = int(rng.integers(1, 4))
            m = random_model(rng, n)
            V = random_plane(rng, n, int(rng.choice(PRIMES)))
            for log_eps2 in (math.log(0.5), math.log(0.9)):
                params = HalaszParams.auto(m)
                params.log_eps2 = log_eps2
                holds, size, low, floor = floor_on_4lambda(m, V, params)
                assert holds and size >= 1 and low >= floor

    def test_loe_examples(self):
        m = bern_model(9)
        assert loe_exact([1, 1, 1, 1, 0, 0, 0, 0, 0], m) == F(6, 16)
        assert loe_exact([1] * 9, m) == F(math.comb(9, 4), 2 ** 9)
        assert float(loe_exact([1] * 9, m)) <= loe_bound([1] * 9, m)
        g = RowModel.iid(gamma(F(1, 3)), gamma_cert_small_mu(F(1, 3)), 4)
        assert loe_exact([0, 0, 5, 0], g) == F(2, 3)

    def test_loe_random(self):
        rng = np.random.default_rng(14)
        for _ in range(500):
            n = int(rng.integers(1, 13))
            m = random_model(rng, n)
            w = rng.integers(-4, 5, size=n)
            if not w.any():
                w[0] = 1
            assert float(loe_exact(w.tolist(), m)) <= loe_bound(w.tolist(), m)


class TestOdlyzko:
    def test_coordinate_line(self):
        m = RowModel.iid(gamma(F(1, 2)), gamma_cert_small_mu(F(1, 2)), 2)
        prob, bound, ok = odlyzko_check(m, 1, [[1, 0]], PrimeField(11))
        assert ok and prob == bound == F(5001, 10000)

    def test_random_subspaces(self):
        rng = np.random.default_rng(15)
        fld = PrimeField(11)
        checked = 0
        while checked < 150:
            n = int(rng.integers(1, 5))
            m = random_model(rng, n)
            d = int(rng.integers(0, n + 1))
            basis = rng.integers(0, 11, size=(d, n)).tolist()
            try:
                for k in range(1, m.r + 1):
                    prob, bound, ok = odlyzko_check(m, k, basis, fld)
                    assert ok, (prob, bound)
            except DomainError:
                continue
            checked += 1

    def test_with_fixed_rows(self):
        # W spans the fixed rows plus further random vectors
        rng = np.random.default_rng(16)
        fld = PrimeField(13)
        fixed = [[1, 2, 0, 3], [0, 1, 1, 1]]
        m = RowModel.iid(gamma(F(2, 5)), gamma_cert_small_mu(F(2, 5)), 4)
        for extra in range(0, 2):
            for _ in range(10):
                basis = fixed + rng.integers(0, 13, size=(extra, 4)).tolist()
                try:
                    assert odlyzko_check(m, 1, basis, fld)[2]
                except DomainError:
                    pass

    def test_subspace_hit_trivial(self):
        laws = [bernoulli(), bernoulli()]
        assert subspace_hit(laws, [[1, 0], [0, 1]], PrimeField(5)) == 1
        assert subspace_hit(laws, [], PrimeField(5)) == 0

    def test_bound_floor(self):
        m = bern_model(3)
        assert odlyzko_bound(m, 1, 5) == 1
