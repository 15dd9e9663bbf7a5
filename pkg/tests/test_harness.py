import csv
import math

import numpy as np
import pytest

from dvpcircle.harness import (
    ConfigError,
    ExperimentConfig,
    LossRecord,
    bootstrap_ci,
    dataset_seed_sequence,
    read_records,
    run_experiment,
    summarize,
    write_summary,
)

FAST_PD = {"iters": 400, "burn_in": 100, "thin_to": 100}


def small_config(**overrides):
    base = dict(
        families={"skewed-vm": (0.0,)},
        sample_sizes=(30,),
        reps=2,
        methods=("pd", "nbic"),
        losses=("kl", "l1"),
        master_seed=7,
        pd=FAST_PD,
        pc=FAST_PD,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def read_raw(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestConfig:
    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"reps": 2, "bogus": 1})

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            small_config(methods=("pd", "mystery"))

    def test_unknown_loss_rejected(self):
        with pytest.raises(ConfigError):
            small_config(losses=("kl", "wasserstein"))

    def test_alpha_range_validated(self):
        with pytest.raises(ValueError):
            small_config(families={"skewed-vm": (2.0,)})

    def test_from_dict_roundtrip(self):
        cfg = ExperimentConfig.from_dict(
            {"families": {"w": [0.0, 1.0]}, "reps": 3, "methods": ["nbic"], "losses": ["l1"]}
        )
        assert cfg.families == {"w": (0.0, 1.0)}
        assert cfg.reps == 3

    def test_method_blocks_validated_up_front(self):
        with pytest.raises(ConfigError):
            small_config(pd={"sweeps": 100})
        with pytest.raises(ConfigError):
            small_config(pd={"iters": 100, "burn_in": 200, "thin_to": 10})
        with pytest.raises(ConfigError):
            small_config(fdbayes={"chains": 2})
        with pytest.raises(ConfigError):
            small_config(nnts={"m_range": [0, 4, 8]})
        with pytest.raises(ConfigError):
            small_config(pc={"seed": 3, "iters": 400, "burn_in": 100, "thin_to": 100})


class TestRunExperiment:
    def test_row_counting_contract(self, tmp_path):
        cfg = small_config(methods=("pd",), reps=2)
        out = tmp_path / "records.csv"
        recs = run_experiment(cfg, out)
        assert len(recs) == 2 * len(cfg.losses)
        rows = read_raw(out)
        assert len(rows) == 1 + len(recs)

    def test_deterministic_modulo_runtime(self, tmp_path):
        cfg = small_config()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment(cfg, a)
        run_experiment(cfg, b)
        ra, rb = read_raw(a), read_raw(b)
        assert len(ra) == len(rb)
        runtime_col = ra[0].index("runtime_ms")
        for x, y in zip(ra, rb):
            x = [v for i, v in enumerate(x) if i != runtime_col]
            y = [v for i, v in enumerate(y) if i != runtime_col]
            assert x == y

    def test_resume_skips_completed(self, tmp_path):
        cfg = small_config()
        out = tmp_path / "records.csv"
        first = run_experiment(cfg, out)
        again = run_experiment(cfg, out)
        assert len(again) == 0
        assert len(read_raw(out)) == 1 + len(first)

    def test_resume_completes_missing_rows(self, tmp_path):
        cfg = small_config()
        out = tmp_path / "records.csv"
        full = run_experiment(cfg, out)
        # drop the last repetition's rows and resume
        rows = read_raw(out)
        with open(out, "w", newline="") as fh:
            csv.writer(fh).writerows(rows[:-2])
        added = run_experiment(cfg, out)
        assert len(added) == 2
        final = read_records(out)
        assert sorted(r.key() for r in final) == sorted(r.key() for r in full)

    def test_methods_do_not_change_datasets(self, tmp_path):
        cfg1 = small_config(methods=("nbic",))
        cfg2 = small_config(methods=("naic", "nbic"))
        r1 = run_experiment(cfg1, tmp_path / "r1.csv")
        r2 = run_experiment(cfg2, tmp_path / "r2.csv")
        seeds1 = {(r.family, r.alpha, r.sample_size, r.rep): r.seed for r in r1}
        seeds2 = {(r.family, r.alpha, r.sample_size, r.rep): r.seed for r in r2}
        for k, s in seeds1.items():
            assert seeds2[k] == s
        v1 = {r.key(): r.value for r in r1}
        v2 = {r.key(): r.value for r in r2}
        for k, v in v1.items():
            assert v2[k] == v

    def test_seed_sequence_is_pure_function(self):
        a = dataset_seed_sequence(3, "w", 1, 30, 5).generate_state(2)
        b = dataset_seed_sequence(3, "w", 1, 30, 5).generate_state(2)
        assert np.array_equal(a, b)

    def test_parallel_matches_serial(self, tmp_path):
        cfg = small_config(methods=("nbic",), reps=4)
        run_experiment(cfg, tmp_path / "serial.csv")
        cfg2 = small_config(methods=("nbic",), reps=4, workers=2)
        run_experiment(cfg2, tmp_path / "par.csv")
        ra, rb = read_raw(tmp_path / "serial.csv"), read_raw(tmp_path / "par.csv")
        runtime_col = ra[0].index("runtime_ms")
        for x, y in zip(ra, rb):
            assert [v for i, v in enumerate(x) if i != runtime_col] == [
                v for i, v in enumerate(y) if i != runtime_col
            ]

    @pytest.mark.slow
    def test_uniform_target_small_mean_kl(self, tmp_path):
        # both pd and nbic handle the constant target comfortably
        cfg = small_config(
            methods=("pd", "nbic"),
            reps=50,
            sample_sizes=(100,),
            losses=("kl",),
            pd={"iters": 2000, "burn_in": 500, "thin_to": 500},
            workers=2,
        )
        recs = run_experiment(cfg, tmp_path / "records.csv")
        for method in ("pd", "nbic"):
            vals = [r.value for r in recs if r.method == method]
            assert len(vals) == 50
            assert np.mean(vals) < 0.1


class TestBootstrapCi:
    def test_constant_vector(self):
        lo, hi = bootstrap_ci([3.5] * 20, rng=np.random.default_rng(0))
        assert lo == hi == 3.5

    def test_binomial_width_oracle(self):
        # mean of 500 zeros and 500 ones: SE = 0.5/sqrt(1000) ~ 0.0158
        values = np.array([0.0, 1.0] * 500)
        lo, hi = bootstrap_ci(values, rng=np.random.default_rng(1))
        assert lo < 0.5 < hi
        assert hi - lo < 0.1
        assert hi - lo == pytest.approx(2 * 1.96 * 0.0158, abs=0.02)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bootstrap_ci([])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            bootstrap_ci([1.0, math.inf])

    def test_reproducible_given_seed(self):
        vals = np.random.default_rng(5).random(40)
        a = bootstrap_ci(vals, rng=np.random.default_rng(9))
        b = bootstrap_ci(vals, rng=np.random.default_rng(9))
        assert a == b


def fake_record(method="pd", loss="kl", rep=0, value=0.5):
    return LossRecord(
        family="skewed-vm",
        alpha=0.0,
        sample_size=30,
        method=method,
        rep=rep,
        loss=loss,
        value=value,
        infinite=not math.isfinite(value),
        runtime_ms=1.0,
        seed=1,
    )


class TestSummarize:
    def test_one_row_per_key(self):
        recs = [fake_record(m, l, rep) for m in ("pd", "nbic") for l in ("kl", "l1")
                for rep in range(3)]
        rows = summarize(recs)
        assert len(rows) == 4
        assert all(r["n_finite"] == 3 for r in rows)

    def test_mean_of_known_values(self):
        recs = [fake_record(rep=i, value=v) for i, v in enumerate((0.2, 0.4, 0.9))]
        row = summarize(recs)[0]
        assert row["mean"] == pytest.approx(0.5)
        assert row["ci_lo"] <= 0.5 <= row["ci_hi"]

    def test_infinite_losses_counted_not_averaged(self):
        recs = [fake_record(rep=0, value=0.25), fake_record(rep=1, value=math.inf)]
        row = summarize(recs)[0]
        assert row["mean"] == pytest.approx(0.25)
        assert row["n_finite"] == 1 and row["n_infinite"] == 1

    def test_reproducible(self):
        recs = [fake_record(rep=i, value=float(i)) for i in range(10)]
        assert summarize(recs) == summarize(recs)

    def test_roundtrip_from_csv(self, tmp_path):
        cfg = small_config()
        out = tmp_path / "records.csv"
        recs = run_experiment(cfg, out)
        rows = summarize(read_records(out))
        # summary means equal recomputation from the raw rows
        for row in rows:
            vals = [
                r.value
                for r in recs
                if (r.family, r.alpha, r.sample_size, r.method, r.loss)
                == (row["family"], row["alpha"], row["sample_size"], row["method"], row["loss"])
                and math.isfinite(r.value)
            ]
            assert row["mean"] == pytest.approx(np.mean(vals))
        path = tmp_path / "summary.csv"
        write_summary(path, rows)
        header = read_raw(path)[0]
        assert header == list(
            ("family", "alpha", "sample_size", "method", "loss", "mean",
             "ci_lo", "ci_hi", "n_finite", "n_infinite")
        )
