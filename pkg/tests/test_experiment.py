import itertools
import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from singbound.dist import DiscreteDist, bernoulli, gamma, point_mass, uniform
from singbound.errors import DependentFixedRows, DomainError, ResourceError
from singbound.experiment import (
    ExperimentConfig, SchurReducer, _Sampler, _sample_random_rows, eigen_window,
    exhaustive_rational_eigenvalue, exhaustive_singularity, has_rational_eigenvalue,
    is_singular_exact, run_rational_eigenvalue, run_singularity, schur_reduce, wilson_interval,
)


def leibniz(a):
    n = len(a)
    total = 0
    for perm in itertools.permutations(range(n)):
        sign = (-1) ** sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        total += sign * math.prod(a[i][perm[i]] for i in range(n))
    return total


def brute_singularity(n, dist, fixed=()):
    rows = n - len(fixed)
    out = F(0)
    for combo in itertools.product(dist.atoms, repeat=rows * n):
        vals = [v for v, _ in combo]
        mat = [list(r) for r in fixed] + [vals[i * n:(i + 1) * n] for i in range(rows)]
        if leibniz(mat) == 0:
            out += math.prod(p for _, p in combo)
    return out


class TestExhaustive:
    def test_bernoulli_n2(self):
        assert exhaustive_singularity(2, bernoulli()) == F(1, 2)

    def test_lazy_coin_n2(self):
        assert exhaustive_singularity(2, gamma(F(1, 2))) == F(19, 32)

    @pytest.mark.parametrize("mu", [F(1, 3), F(1, 2), F(9, 10)])
    def test_n1_is_zero_mass(self, mu):
        assert exhaustive_singularity(1, gamma(mu)) == 1 - mu

    def test_point_mass_one(self):
        assert exhaustive_singularity(2, point_mass(1)) == 1

    @pytest.mark.parametrize("dist", [bernoulli(), gamma(F(1, 2)), gamma(F(1, 5)), uniform(1)])
    def test_n3_against_leibniz(self, dist):
        assert exhaustive_singularity(3, dist) == brute_singularity(3, dist)

    def test_budget(self):
        with pytest.raises(ResourceError):
            exhaustive_singularity(4, uniform(1))

    def test_n4_bernoulli_within_budget(self):
        # 2^16 matrices; the value is recorded by this oracle run, not asserted from elsewhere
        v = exhaustive_singularity(4, bernoulli())
        assert F(1, 2) ** 4 * 6 <= v < 1


class TestMonteCarlo:
    @pytest.mark.parametrize("dist,exact", [(bernoulli(), F(1, 2)), (gamma(F(1, 2)), F(19, 32))])
    def test_within_three_halfwidths(self, dist, exact):
        res = run_singularity(ExperimentConfig(n=2, trials=20_000, master_seed=7, dist=dist))
        lo, hi = res.wilson
        assert abs(float(res.estimate) - float(exact)) <= 3 * (hi - lo) / 2
        assert lo <= float(res.estimate) <= hi
        assert res.estimate == F(res.singular_count, res.trials)

    def test_calibration_meta_trials(self):
        cases = [(2, bernoulli()), (3, gamma(F(1, 2))), (3, bernoulli())]
        exact = {i: exhaustive_singularity(n, d) for i, (n, d) in enumerate(cases)}
        for i, (n, d) in enumerate(cases):
            hits = 0
            for seed in range(100):
                res = run_singularity(ExperimentConfig(n=n, trials=1500, master_seed=seed, dist=d))
                lo, hi = res.wilson
                hits += abs(float(res.estimate) - float(exact[i])) <= 3 * (hi - lo) / 2
            assert hits >= 99

    @pytest.mark.parametrize("mu", [F(3, 10), F(1, 2)])
    def test_sandwich_zero_row(self, mu):
        n = 10
        cfg = ExperimentConfig(n=n, trials=10_000, master_seed=3, dist=gamma(mu))
        res = run_singularity(cfg)
        zero_row = 1 - (1 - (1 - mu) ** n) ** n
        assert res.estimate >= zero_row

    def test_zero_row_event_contained_samplewise(self):
        cfg = ExperimentConfig(n=6, trials=4000, master_seed=1, dist=gamma(F(1, 2)))
        rng = np.random.default_rng(0)
        mats = _sample_random_rows(cfg, _Sampler(cfg.laws()), rng, 4000)
        from singbound.experiment import _primes, _singular_mask
        sing = _singular_mask(mats, _primes(cfg))
        zero = (mats == 0).all(axis=2).any(axis=1) | (mats == 0).all(axis=1).any(axis=1)
        assert zero.any()
        assert not (zero & ~sing).any()

    def test_sampler_frequencies(self):
        d = DiscreteDist([(0, F(1, 6)), (3, F(1, 2)), (-2, F(1, 3))])
        x = _Sampler([d]).draw(np.random.default_rng(5), 60_000)
        for v, p in d.atoms:
            assert abs((x == v).mean() - float(p)) < 0.01

    def test_column_major_fill(self):
        # the first trial's first column is drawn first
        cfg = ExperimentConfig(n=3, trials=1, dist=uniform(5))
        s = _Sampler(cfg.laws())
        m = _sample_random_rows(cfg, s, np.random.default_rng(11), 1)[0]
        flat = s.draw(np.random.default_rng(11), 9)
        assert m[:, 0].tolist() == flat[:3].tolist()

    def test_non_identical_entries(self):
        laws = [[point_mass(1), bernoulli()], [bernoulli(), point_mass(1)]]
        res = run_singularity(ExperimentConfig(n=2, trials=8000, entry_dists=laws, master_seed=2))
        # det = 1 - x y with x, y independent signs: singular iff x = y
        lo, hi = res.wilson
        assert abs(float(res.estimate) - 0.5) <= 3 * (hi - lo) / 2

    def test_explicit_prime(self):
        a = run_singularity(ExperimentConfig(n=3, trials=3000, dist=bernoulli(), prime=101))
        b = run_singularity(ExperimentConfig(n=3, trials=3000, dist=bernoulli()))
        assert a.singular_count == b.singular_count

    def test_bound_comparison_present(self):
        res = run_singularity(ExperimentConfig(n=4, trials=100, dist=gamma(F(1, 2))))
        bc = res.bound_comparison
        assert bc["lower_zero_row"]["power_n"] == pytest.approx(0.5 ** 4)
        assert bc["upper_exp2"]["base"] == pytest.approx(math.sqrt(1 - 1 + 1.5 / 4))


class TestDeterminism:
    @pytest.mark.parametrize("mode", ["singularity", "rational-eigenvalue"])
    def test_worker_counts(self, mode):
        cfg = ExperimentConfig(n=4, trials=9000, master_seed=123, dist=uniform(1), mode=mode, block_size=500)
        run = run_singularity if mode == "singularity" else run_rational_eigenvalue
        outs = {json.dumps(run(cfg, threads=t).to_json(), sort_keys=True) for t in (1, 4, 16)}
        assert len(outs) == 1

    def test_seed_matters(self):
        a = run_singularity(ExperimentConfig(n=3, trials=5000, master_seed=1, dist=bernoulli()))
        b = run_singularity(ExperimentConfig(n=3, trials=5000, master_seed=2, dist=bernoulli()))
        assert a.singular_count != b.singular_count


class TestConfig:
    def test_round_trip(self):
        cfg = ExperimentConfig(n=3, trials=10, master_seed=4, dist=gamma(F(1, 3)), fixed_rows=[[1, 0, 2]])
        back = ExperimentConfig.from_json(json.loads(json.dumps(cfg.to_json())))
        assert back.to_json() == cfg.to_json()

    def test_dependent_fixed_rows(self):
        with pytest.raises(DependentFixedRows):
            ExperimentConfig(n=3, dist=bernoulli(), fixed_rows=[[1, 2, 3], [2, 4, 6]])

    @pytest.mark.parametrize("kw", [dict(n=0), dict(n=2, mode="x"), dict(n=2, prime=4), dict(n=2, trials=-1)])
    def test_invalid(self, kw):
        with pytest.raises((DomainError, ValueError)):
            ExperimentConfig(dist=bernoulli(), **kw)

    def test_wilson(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0 and 0 < hi < 0.05
        with pytest.raises(DomainError):
            wilson_interval(0, 0)


class TestSchur:
    def test_deletes_first_coordinate(self):
        red = SchurReducer().fit([[1, 0, 0]])
        for rows in itertools.product([-1, 1], repeat=6):
            R = np.array(rows).reshape(2, 3)
            full = [[1, 0, 0]] + R.tolist()
            assert (leibniz(full) == 0) == is_singular_exact(red.transform(R))
            assert red.transform(R).tolist() == R[:, 1:].tolist()

    def test_fully_fixed(self):
        red = SchurReducer().fit([[2, 1], [1, 1]])
        out = red.transform(np.zeros((3, 0, 2), dtype=np.int64))
        assert out.shape == (3, 0, 0)
        assert not any(is_singular_exact(m) for m in out)
        assert exhaustive_singularity(2, bernoulli(), fixed_rows=[[2, 1], [1, 1]]) == 0

    def test_fixed_ones_row(self):
        red = SchurReducer().fit([[1, 1]])
        count = sum(is_singular_exact(red.transform(np.array([[c, d]]))) for c in (-1, 1) for d in (-1, 1))
        assert F(count, 4) == F(1, 2)
        assert exhaustive_singularity(2, bernoulli(), fixed_rows=[[1, 1]]) == F(1, 2)

    def test_dependent(self):
        with pytest.raises(DependentFixedRows):
            SchurReducer().fit([[1, 2], [2, 4]])

    def test_pivot_search(self):
        # first column is zero, so the minor must come from later columns
        red = SchurReducer().fit([[0, 3, 1]])
        assert red.pivots_ == [1]

    def test_random_equivalence(self):
        rng = np.random.default_rng(2024)
        done = 0
        while done < 1000:
            n = int(rng.integers(2, 6))
            f = int(rng.integers(1, min(2, n - 1) + 1))
            fixed = rng.integers(-3, 4, size=(f, n)).tolist()
            try:
                red = SchurReducer().fit(fixed)
            except DependentFixedRows:
                continue
            R = rng.integers(-2, 3, size=(n - f, n))
            full = np.vstack([np.array(fixed), R]).tolist()
            assert (leibniz(full) == 0) == is_singular_exact(red.transform(R))
            done += 1

    def test_sampler_wrapper(self):
        def random_part(rng, T):
            return rng.integers(-1, 2, size=(T, 2, 3))
        samp = schur_reduce([[1, 2, 3]], random_part)
        out = samp(np.random.default_rng(0), 5)
        assert out.shape == (5, 2, 2)


class TestEigen:
    def test_examples(self):
        assert has_rational_eigenvalue([[2, 0], [0, 3]])
        assert not has_rational_eigenvalue([[0, 1], [-1, 0]])

    def test_window(self):
        assert list(eigen_window(2, 1)) == [-2, -1, 0, 1, 2]
        assert list(eigen_window(8, 2)) == list(range(-16, 17))

    def test_exact_against_discriminant(self):
        # 2x2: integer eigenvalue iff tr^2 - 4 det is a perfect square
        total = F(0)
        for a, b, c, d in itertools.product((-1, 0, 1), repeat=4):
            disc = (a + d) ** 2 - 4 * (a * d - b * c)
            if disc >= 0 and math.isqrt(disc) ** 2 == disc:
                total += F(1, 81)
        assert exhaustive_rational_eigenvalue(2, uniform(1)) == total == F(55, 81)

    def test_monte_carlo(self):
        cfg = ExperimentConfig(n=2, trials=20_000, master_seed=9, dist=uniform(1), mode="rational-eigenvalue")
        res = run_rational_eigenvalue(cfg)
        p = 55 / 81
        sigma = math.sqrt(p * (1 - p) / cfg.trials)
        assert abs(float(res.estimate) - p) <= 3 * sigma
        assert res.extra["window"] == [-2, 2]

    def test_entries_outside_k(self):
        with pytest.raises(DomainError):
            ExperimentConfig(n=2, dist=uniform(2), mode="rational-eigenvalue", k=1)

    def test_reference_base(self):
        cfg = ExperimentConfig(n=4, trials=200, dist=uniform(1), mode="rational-eigenvalue")
        ref = run_rational_eigenvalue(cfg).bound_comparison["reference"]
        assert ref["c"] == pytest.approx(1 / 3)
        assert ref["power_n"] == pytest.approx((1 / 3) ** 2)
