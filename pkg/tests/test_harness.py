import configparser
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import rankdata, wilcoxon

from mbore import acquire
from mbore.harness import (
    ExperimentConfig,
    RunRecord,
    convergence,
    holm_bonferroni,
    load_records,
    read_record,
    run_experiment,
    summarise,
    to_trace,
    wilcoxon_signed_rank_one_sided,
    write_record,
)
from mbore.harness.cli import load_experiment, main
from mbore.harness.experiment import parse_method, resolve_rule


def enumerate_p(a, b):
    """Brute force over all 2^n sign flips of the non-zero differences."""
    d = np.asarray(a, float) - np.asarray(b, float)
    d = d[d != 0]
    if len(d) == 0:
        return 1.0
    r = rankdata(np.abs(d))
    observed = r[d > 0].sum()
    hits = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        hits += np.dot(signs, r) >= observed - 1e-9
    return hits / 2 ** len(d)


class TestWilcoxon:
    def test_equal(self):
        a = np.arange(8.0)
        assert wilcoxon_signed_rank_one_sided(a, a) == 1.0

    def test_all_better(self):
        b = np.random.default_rng(0).random(6)
        assert wilcoxon_signed_rank_one_sided(b + 1, b) == pytest.approx(1 / 64, abs=1e-15)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_matches_enumeration(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            a = rng.integers(0, 4, n).astype(float)  # coarse values give ties and zeros
            b = rng.integers(0, 4, n).astype(float)
            assert wilcoxon_signed_rank_one_sided(a, b) == pytest.approx(enumerate_p(a, b), abs=1e-12)

    @pytest.mark.parametrize("n", [5, 12, 20])
    def test_matches_scipy_without_ties(self, n):
        rng = np.random.default_rng(100 + n)
        a, b = rng.normal(size=n), rng.normal(size=n)
        expected = wilcoxon(a, b, alternative="greater", method="exact").pvalue
        assert wilcoxon_signed_rank_one_sided(a, b) == pytest.approx(expected, rel=1e-12)

    def test_normal_approximation(self):
        rng = np.random.default_rng(7)
        a, b = rng.normal(size=40) + 0.3, rng.normal(size=40)
        expected = wilcoxon(a, b, alternative="greater", method="approx", correction=False).pvalue
        assert wilcoxon_signed_rank_one_sided(a, b) == pytest.approx(expected, rel=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=5, max_size=10))
    def test_swap_identity(self, pairs):
        a = np.array([p[0] for p in pairs], float)
        b = np.array([p[1] for p in pairs], float)
        d = a - b
        d = d[d != 0]
        if len(d) == 0:
            return
        r = rankdata(np.abs(d))
        w = r[d > 0].sum()
        mass = sum(np.isclose(np.dot(s, r), w) for s in itertools.product((0, 1), repeat=len(d)))
        mass /= 2 ** len(d)
        p_ab = wilcoxon_signed_rank_one_sided(a, b)
        p_ba = wilcoxon_signed_rank_one_sided(b, a)
        assert p_ba == pytest.approx(1 - p_ab + mass, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            wilcoxon_signed_rank_one_sided([1, 2, 3], [1, 2])


class TestHolm:
    @pytest.mark.parametrize("p, expected", [
        ([0.04], [True]),
        ([0.01, 0.04], [True, True]),
        ([0.03, 0.04], [False, False]),
        ([0.04, 0.01], [True, True]),
        ([0.01, 0.02, 0.2], [True, True, False]),
        ([0.01, 0.03, 0.2], [True, False, False]),
        ([0.01, 0.024, 0.04], [True, True, True]),
    ])
    def test_examples(self, p, expected):
        np.testing.assert_array_equal(holm_bonferroni(p, 0.05), expected)

    def test_stops_at_first_failure(self):
        # 0.03 > 0.05/2 stops the procedure even though 0.03 <= 0.05
        np.testing.assert_array_equal(holm_bonferroni([0.001, 0.03, 0.03], 0.05), [True, False, False])

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_bad_alpha(self, alpha):
        with pytest.raises(ValueError):
            holm_bonferroni([0.1], alpha)


def synthetic(method, problem, values):
    return [RunRecord(problem, method, r, {}, "ok",
                      [{"iteration": 0, "hv": v, "seconds": 0.0}]) for r, v in enumerate(values)]


class TestSummarise:
    def test_dominant_method(self):
        recs = (synthetic("A", "P1", np.linspace(0.8, 0.9, 10))
                + synthetic("B", "P1", np.linspace(0.1, 0.2, 10))
                + synthetic("C", "P1", np.linspace(0.2, 0.3, 10)))
        s = summarise(recs)
        assert s.rows[0].best == "A"
        assert s.best_counts() == {"A": 1, "B": 0, "C": 0}

    def test_identical_methods_both_best(self):
        v = np.linspace(0.3, 0.6, 8)
        s = summarise(synthetic("A", "P", v) + synthetic("B", "P", v))
        assert s.best_counts() == {"A": 1, "B": 1}

    def test_row_per_problem(self):
        recs = []
        for p in ("P1", "P2", "P3"):
            recs += synthetic("A", p, np.arange(6.0)) + synthetic("B", p, np.arange(6.0) + 1)
        assert len(summarise(recs).rows) == 3

    def test_insufficient_repeats_skipped(self, caplog):
        recs = synthetic("A", "P", [1, 2, 3]) + synthetic("B", "P", [1, 2, 3])
        assert summarise(recs).rows == []
        assert "skipping" in caplog.text

    def test_csv(self, tmp_path):
        recs = synthetic("A", "P", np.arange(6.0) + 5) + synthetic("B", "P", np.arange(6.0))
        path = tmp_path / "s.csv"
        summarise(recs).write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("problem,best") and lines[1].startswith("P,A")
        assert lines[-1] == "total,,,,1,0"

    def test_convergence(self):
        recs = synthetic("A", "P", [0.1, 0.2, 0.3, 0.4, 0.5])
        (point,) = convergence(recs)
        assert (point.median, point.q25, point.q75, point.n) == (0.3, 0.2, 0.4, 5)


class TestConfig:
    @pytest.mark.parametrize("rule, d, expected", [("2d", 5, 10), ("1024d", 3, 3072), ("7", 9, 7), ("d", 4, 4)])
    def test_rules(self, rule, d, expected):
        assert resolve_rule(rule, d) == expected

    def test_methods(self):
        assert parse_method("gbt-phc") == ("GBT", "PHC")
        assert parse_method("RANDOM")[0] == "RANDOM"
        with pytest.raises(ValueError):
            parse_method("SVM-PHC")

    def test_distinct_repeat_seeds(self):
        cfg = ExperimentConfig(("DTLZ2_5_2",), repeats=21)
        assert len(set(cfg.repeat_seeds())) == 21

    def test_defaults(self):
        cfg = ExperimentConfig(("WFG4_10_3",))
        rc = cfg.run_config("WFG4_10_3", "GBT-PHC", 0)
        assert (rc.S, rc.T, rc.B, cfg.repeats, len(cfg.methods)) == (20, 320, 10240, 21, 12)


def small_experiment(tmp_path, **kw):
    base = dict(problems=("DTLZ2_5_2", "WFG4_6_2"), methods=("GBT-PHC", "RANDOM"), repeats=3,
                seed=11, evaluations=3, acquisition_budget="16", out=str(tmp_path))
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def result(tmp_path_factory):
    cfg = small_experiment(tmp_path_factory.mktemp("exp"))
    return cfg, run_experiment(cfg)


class TestRunExperiment:
    def test_count_and_sharing(self, result):
        cfg, records = result
        assert len(records) == 12
        designs = {}
        for rec in records:
            X0 = np.array([it["x"] for it in rec.iterations[: rec.config["S"]]])
            designs.setdefault((rec.problem, rec.repeat), []).append(X0)
        assert len(designs) == 6
        for group in designs.values():
            np.testing.assert_array_equal(group[0], group[1])

    def test_round_trip(self, result):
        cfg, records = result
        loaded = load_records(cfg.out)
        assert [r.without_wall_clock() for r in loaded] == [r.without_wall_clock() for r in records]
        assert [r.seconds.tolist() for r in loaded] == [r.seconds.tolist() for r in records]

    def test_trace_rebuild(self, result):
        _, records = result
        trace = to_trace(records[0])
        assert len(trace) == records[0].config["T"]

    def test_deterministic(self, result, tmp_path):
        cfg, records = result
        again = run_experiment(small_experiment(tmp_path))
        for a, b in zip(records, again):
            blob_a, blob_b = a.without_wall_clock(), b.without_wall_clock()
            assert blob_a["iterations"] == blob_b["iterations"]

    def test_hv_recorded(self, result):
        _, records = result
        for rec in records:
            hv = rec.hv
            assert np.all(np.isfinite(hv)) and np.all(np.diff(hv) >= 0)

    def test_parallel_matches_serial(self, result, tmp_path):
        cfg, records = result
        par = run_experiment(small_experiment(tmp_path, problems=("DTLZ2_5_2",)), jobs=2)
        serial = [r for r in records if r.problem == "DTLZ2_5_2"]
        assert [r.without_wall_clock()["iterations"] for r in par] == \
               [r.without_wall_clock()["iterations"] for r in serial]


def test_failure_isolated(tmp_path, monkeypatch):
    real_fit = acquire.classify.fit

    def flaky(kind, *args, **kwargs):
        if kind == "MLP":
            raise RuntimeError("synthetic failure")
        return real_fit(kind, *args, **kwargs)

    monkeypatch.setattr(acquire.classify, "fit", flaky)
    cfg = small_experiment(tmp_path, problems=("DTLZ2_5_2",), methods=("GBT-PHC", "MLP-PHC", "RANDOM"))
    records = run_experiment(cfg)
    assert len(records) == 9
    failed = [r for r in records if r.status != "ok"]
    assert {r.method for r in failed} == {"MLP-PHC"}
    assert all("iteration 10" in r.error for r in failed)
    assert all(len(r.iterations) == 10 for r in failed)
    assert read_record(tmp_path / "DTLZ2_5_2" / "MLP-PHC" / "repeat_000.jsonl").status == "error"


def test_incomplete_record(tmp_path):
    rec = RunRecord("P", "A", 0, {}, "ok", [{"iteration": 0, "hv": 0.5, "seconds": 0.1}])
    path = write_record(rec, tmp_path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    assert read_record(path).status == "incomplete"


class TestCli:
    def test_config_file_and_override(self, tmp_path):
        ini = tmp_path / "exp.ini"
        parser = configparser.ConfigParser()
        parser["experiment"] = {"problems": "DTLZ2_5_2, WFG4_6_2", "repeats": "4", "seed": "3",
                                "methods": "GBT-PHC"}
        with ini.open("w") as fh:
            parser.write(fh)
        cfg = load_experiment(str(ini), {"repeats": 2, "seed": None})
        assert cfg.problems == ("DTLZ2_5_2", "WFG4_6_2")
        assert (cfg.repeats, cfg.seed, cfg.methods) == (2, 3, ("GBT-PHC",))

    def test_unknown_key(self, tmp_path):
        ini = tmp_path / "bad.ini"
        ini.write_text("[experiment]\nproblems = DTLZ2_5_2\ncolour = blue\n")
        with pytest.raises(ValueError):
            load_experiment(str(ini), {})

    def test_env_out(self, monkeypatch, tmp_path):
        monkeypatch.setenv("MBORE_OUT", str(tmp_path / "env"))
        assert load_experiment(None, {"problems": "DTLZ2_5_2"}).out == str(tmp_path / "env")

    def test_end_to_end(self, tmp_path, capsys):
        out = str(tmp_path)
        assert main(["run", "--problems", "DTLZ2_5_2", "--methods", "GBT-PHC,RANDOM", "--repeats", "5",
                     "--evaluations", "2", "--acquisition-budget", "16", "--out", out]) == 0
        assert main(["summarise", "--out", out]) == 0
        assert "DTLZ2_5_2: best" in capsys.readouterr().out
        assert main(["convergence", "--out", out]) == 0
        assert (tmp_path / "summary.csv").exists()
        assert (tmp_path / "convergence.csv").exists() and (tmp_path / "timing.csv").exists()

    def test_list_problems(self, capsys):
        assert main(["list-problems"]) == 0
        keys = capsys.readouterr().out.split()
        assert "WFG4_10_3" in keys and "DTLZ7_10_10" in keys

    def test_missing_problems(self, capsys):
        assert main(["run", "--out", "/tmp/unused"]) == 2

    def test_no_records(self, tmp_path):
        assert main(["summarise", "--out", str(tmp_path)]) == 2
