import numpy as np
import pytest
from scipy.spatial.distance import pdist

from mbore.problems import (
    DTLZ_CONFIGS,
    WFG_CONFIGS,
    WFG_HD_CONFIGS,
    ProblemSpec,
    default_wfg_kl,
    evaluate,
    lhs_maximin,
    list_problems,
    parse_key,
    reference_ideal_points,
)
from mbore.problems.lhs import latin_hypercube

import wfg_reference



def _valid_wfg(pid, d, m):
    return pid not in (2, 3) or default_wfg_kl(d, m)[1] >= 2


ALL_WFG = [(pid, d, m) for pid in range(1, 10) for d, m in WFG_CONFIGS if _valid_wfg(pid, d, m)]
ALL_DTLZ = [(pid, d, m) for pid in range(1, 8) for d, m in DTLZ_CONFIGS]


class TestDtlz:
    def test_dtlz2_centre(self):
        x = np.full(5, 0.5)
        np.testing.assert_allclose(evaluate("DTLZ2_5_2", x), [np.cos(np.pi / 4), np.sin(np.pi / 4)])

    def test_dtlz2_boundary(self):
        x = np.r_[0.0, np.full(4, 0.5)]
        np.testing.assert_allclose(evaluate("DTLZ2_5_2", x), [1.0, 0.0], atol=1e-15)

    @pytest.mark.parametrize("pid", [2, 3, 4])
    @pytest.mark.parametrize("d, m", DTLZ_CONFIGS)
    def test_sphere_identity(self, pid, d, m):
        rng = np.random.default_rng(pid * 100 + d + m)
        X = rng.random((200, d))
        X[:, m - 1:] = 0.5
        F = evaluate(ProblemSpec("DTLZ", pid, d, m), X)
        np.testing.assert_allclose(np.sum(F**2, axis=1), 1.0, atol=1e-10)

    @pytest.mark.parametrize("d, m", DTLZ_CONFIGS)
    def test_dtlz1_plane(self, d, m):
        rng = np.random.default_rng(d * m)
        X = rng.random((200, d))
        X[:, m - 1:] = 0.5
        F = evaluate(ProblemSpec("DTLZ", 1, d, m), X)
        np.testing.assert_allclose(F.sum(axis=1), 0.5, atol=1e-10)

    @pytest.mark.parametrize("pid, d, m", ALL_DTLZ)
    def test_matches_pymoo(self, pid, d, m):
        problems = pytest.importorskip("pymoo.problems")
        X = np.random.default_rng(pid + 10 * d + m).random((100, d))
        expected = problems.get_problem(f"dtlz{pid}", n_var=d, n_obj=m).evaluate(X)
        np.testing.assert_allclose(evaluate(ProblemSpec("DTLZ", pid, d, m), X), expected,
                                   rtol=0, atol=1e-8)

    def test_invalid(self):
        with pytest.raises(ValueError):
            ProblemSpec("DTLZ", 8, 5, 2)
        with pytest.raises(ValueError):
            ProblemSpec("DTLZ", 2, 2, 3)


class TestWfg:
    @pytest.mark.parametrize("pid, d, m", ALL_WFG)
    def test_matches_scalar_reference(self, pid, d, m):
        spec = ProblemSpec("WFG", pid, d, m)
        X = np.random.default_rng(pid * 1000 + d * 10 + m).random((100, d))
        F = evaluate(spec, X)
        zmax = 2.0 * np.arange(1, d + 1)
        for x, f in zip(X, F):
            expected = wfg_reference.wfg(pid, list(x * zmax), m, spec.k)
            np.testing.assert_allclose(f, expected, rtol=0, atol=1e-8)

    @pytest.mark.parametrize("pid", range(1, 10))
    @pytest.mark.parametrize("d, m, k", [(6, 2, 4), (8, 2, 4), (10, 3, 4), (10, 5, 8), (8, 3, 4), (10, 3, 6)])
    def test_matches_pymoo(self, pid, d, m, k):
        problems = pytest.importorskip("pymoo.problems")
        if pid in (2, 3) and (d - k) % 2:
            pytest.skip("pymoo requires an even number of distance variables for WFG2/3")
        spec = ProblemSpec("WFG", pid, d, m, k=k)
        X = np.random.default_rng(pid + d + m + k).random((100, d))
        native = X * 2.0 * np.arange(1, d + 1)
        expected = problems.get_problem(f"wfg{pid}", n_var=d, n_obj=m, k=k).evaluate(native)
        np.testing.assert_allclose(evaluate(spec, X), expected, rtol=0, atol=1e-8)

    def test_wfg4_bounds(self):
        # f_m = x_M + 2m h_m with x_M, h_m in [0, 1]
        X = np.random.default_rng(0).random((100, 6))
        F = evaluate(ProblemSpec("WFG", 4, 6, 2, k=4), X)
        assert np.all(F >= 0)
        assert np.all(F <= np.array([3.0, 5.0]) + 1e-9)

    @pytest.mark.parametrize("pid", range(1, 10))
    @pytest.mark.parametrize("d, m", WFG_CONFIGS + WFG_HD_CONFIGS)
    def test_bounds_and_finite(self, pid, d, m):
        if not _valid_wfg(pid, d, m):
            pytest.skip("WFG2/3 need two distance variables")
        X = np.random.default_rng(pid + d + m).random((10_000, d))
        F = evaluate(ProblemSpec("WFG", pid, d, m), X)
        assert np.all(np.isfinite(F))
        assert np.all(F >= -1e-12)
        assert np.all(F <= 2.0 * np.arange(1, m + 1) + 1.0 + 1e-9)

    def test_split_rule(self):
        assert default_wfg_kl(6, 2) == (4, 2)
        assert default_wfg_kl(10, 3) == (5, 5)
        assert default_wfg_kl(10, 5) == (9, 1)
        with pytest.raises(ValueError):
            default_wfg_kl(5, 3)

    def test_wfg23_need_two_distance_variables(self):
        with pytest.raises(ValueError):
            ProblemSpec("WFG", 2, 10, 5)
        ProblemSpec("WFG", 4, 10, 5)


@pytest.mark.parametrize("pid, d, m", ALL_DTLZ)
def test_dtlz_finite(pid, d, m):
    X = np.random.default_rng(pid + d + m).random((10_000, d))
    assert np.all(np.isfinite(evaluate(ProblemSpec("DTLZ", pid, d, m), X)))


class TestKeys:
    def test_parse(self):
        spec = parse_key("WFG4_10_3")
        assert (spec.suite, spec.id, spec.d, spec.n_obj, spec.k, spec.l) == ("WFG", 4, 10, 3, 5, 5)
        assert spec.key == "WFG4_10_3"
        assert parse_key("dtlz2_5_2").key == "DTLZ2_5_2"

    def test_bad_key(self):
        with pytest.raises(ValueError):
            parse_key("ZDT1_30_2")

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            evaluate("DTLZ2_5_2", np.zeros(4))

    def test_outside_unit_cube(self):
        with pytest.raises(ValueError):
            evaluate("DTLZ2_5_2", np.full(5, 1.5))

    def test_listing(self):
        keys = list_problems()
        assert len(keys) == len(ALL_DTLZ) + len(ALL_WFG)
        for key in list_problems(high_dimensional=True):
            parse_key(key)


class TestReferencePoints:
    def test_dtlz1(self):
        ideal, ref = reference_ideal_points("DTLZ1_5_3")
        np.testing.assert_array_equal(ref, [450] * 3)
        np.testing.assert_array_equal(ideal, [0] * 3)
        _, ref = reference_ideal_points("DTLZ1_2_2")
        np.testing.assert_array_equal(ref, [120, 120])

    def test_wfg(self):
        ideal, ref = reference_ideal_points("WFG7_8_3")
        np.testing.assert_array_equal(ref, [3, 5, 7])
        np.testing.assert_array_equal(ideal, [0, 0, 0])

    def test_dtlz7(self):
        ideal, ref = reference_ideal_points("DTLZ7_5_2")
        np.testing.assert_array_equal(ref, [1.5, 60])
        np.testing.assert_array_equal(ideal, [0, 2.307])
        ideal, ref = reference_ideal_points("DTLZ7_10_10")
        assert ideal[-1] == 4.763 and ref[-1] == 110

    def test_untabulated(self):
        with pytest.raises(KeyError):
            reference_ideal_points("DTLZ2_7_2")
        with pytest.raises(KeyError):
            reference_ideal_points("WFG4_12_3")


class TestLhs:
    def test_single_point(self):
        x = lhs_maximin(1, 3, seed=0)
        assert x.shape == (1, 3)
        assert np.all((x >= 0) & (x < 1))

    @pytest.mark.parametrize("n, d", [(4, 2), (10, 5), (20, 10), (7, 1)])
    def test_stratified(self, n, d):
        X = lhs_maximin(n, d, seed=n + d)
        for col in X.T:
            counts = np.bincount(np.floor(col * n).astype(int), minlength=n)
            np.testing.assert_array_equal(counts, 1)

    def test_maximin_beats_first_candidate(self):
        X = lhs_maximin(12, 3, n_candidates=100, seed=5)
        first = latin_hypercube(12, 3, np.random.default_rng(5))
        assert pdist(X).min() >= pdist(first).min()

    def test_deterministic(self):
        np.testing.assert_array_equal(lhs_maximin(8, 3, seed=2), lhs_maximin(8, 3, seed=2))
