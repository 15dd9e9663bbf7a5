"""Simulation-study runner: paired repetitions, keyed seeding, bootstrap CIs.

Every (family, alpha, size, rep) repetition draws one dataset from a
substream that is a pure function of the master seed and that key, so all
methods within a repetition score the identical dataset and changing the
method list never changes the data.  Rows stream to CSV incrementally and
completed keys are skipped on resume.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from dvpcircle.circle import AngularGrid
from dvpcircle.estimators import DpmConfig, fit_fdbayes, fit_pc, fit_pd
from dvpcircle.losses import LOSSES
from dvpcircle.nnts import nnts_eval, select_by_ic
from dvpcircle.targets import FAMILIES, make_target, sample_target

METHODS = ("pd", "pc", "naic", "nbic", "fdbayes")
_METHOD_IDS = {m: i + 1 for i, m in enumerate(METHODS)}
_FAMILY_IDS = {f: i for i, f in enumerate(FAMILIES)}

RECORD_COLUMNS = (
    "family",
    "alpha",
    "sample_size",
    "method",
    "rep",
    "loss",
    "value",
    "infinite",
    "runtime_ms",
    "seed",
)

SUMMARY_COLUMNS = (
    "family",
    "alpha",
    "sample_size",
    "method",
    "loss",
    "mean",
    "ci_lo",
    "ci_hi",
    "n_finite",
    "n_infinite",
)


class ConfigError(ValueError):
    """Raised when an experiment or method configuration is invalid."""


def _default_alphas(family: str) -> tuple[float, ...]:
    if family == "skewed-vm":
        return tuple(np.linspace(0.0, 1.0, 13))
    return tuple(np.linspace(0.0, 2.0 * np.pi, 13, endpoint=False))


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of a simulation run.

    `families` maps family name to its alpha grid; per-method blocks
    override sampler settings (seeds are always derived from the keyed
    substreams, never taken from the blocks).
    """

    families: dict = field(default_factory=lambda: {f: _default_alphas(f) for f in FAMILIES})
    sample_sizes: tuple = (30, 100)
    reps: int = 100
    methods: tuple = METHODS
    losses: tuple = ("kl", "l1")
    master_seed: int = 0
    grid_size: int = 2048
    workers: int = 1
    pd: dict = field(default_factory=dict)
    pc: dict = field(default_factory=dict)
    fdbayes: dict = field(default_factory=dict)
    nnts: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if not self.methods:
            raise ConfigError("methods must be nonempty")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}")
        for loss in self.losses:
            if loss not in LOSSES:
                raise ConfigError(f"unknown loss {loss!r}")
        if not self.losses:
            raise ConfigError("losses must be nonempty")
        for fam, alphas in self.families.items():
            if fam not in FAMILIES:
                raise ConfigError(f"unknown family {fam!r}")
            for a in alphas:
                make_target(fam, float(a), AngularGrid(8))  # validates range
        if any(s < 1 for s in self.sample_sizes) or not self.sample_sizes:
            raise ConfigError("sample_sizes must be positive and nonempty")
        if self.grid_size < 8:
            raise ConfigError("grid_size too small")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        for blk in ("pd", "pc", "fdbayes", "nnts"):
            if not isinstance(getattr(self, blk), dict):
                raise ConfigError(f"method block {blk!r} must be an object")
            if "seed" in getattr(self, blk):
                raise ConfigError(
                    f"method block {blk!r} must not set a seed; "
                    "seeds derive from the keyed substreams"
                )
        for blk in ("pd", "pc"):
            try:
                DpmConfig(**getattr(self, blk))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid {blk} block: {exc}") from exc
        fd = dict(self.fdbayes)
        unknown = set(fd) - {"m_max", "iters", "burn_in", "thin_to"}
        if unknown:
            raise ConfigError(f"unknown fdbayes keys: {sorted(unknown)}")
        iters = fd.get("iters", 100_000)
        burn_in = fd.get("burn_in", 20_000)
        thin_to = fd.get("thin_to", 20_000)
        if fd.get("m_max", 5) < 0 or not 0 <= burn_in < iters:
            raise ConfigError("invalid fdbayes run lengths")
        if thin_to < 1 or (iters - burn_in) % thin_to != 0:
            raise ConfigError("fdbayes thin_to must divide iters - burn_in")
        nn = dict(self.nnts)
        unknown = set(nn) - {"m_range", "restarts"}
        if unknown:
            raise ConfigError(f"unknown nnts keys: {sorted(unknown)}")
        if "m_range" in nn and len(nn["m_range"]) != 2:
            raise ConfigError("nnts m_range must be a [start, stop] pair")
        if nn.get("restarts", 2) < 1:
            raise ConfigError("nnts restarts must be at least 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {
            "families",
            "sample_sizes",
            "reps",
            "methods",
            "losses",
            "master_seed",
            "grid_size",
            "workers",
            "pd",
            "pc",
            "fdbayes",
            "nnts",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        if "families" in kwargs:
            kwargs["families"] = {
                str(f): tuple(float(a) for a in alphas)
                for f, alphas in kwargs["families"].items()
            }
        for key in ("sample_sizes", "methods", "losses"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class LossRecord:
    """One scored repetition: a single (method, loss) value."""

    family: str
    alpha: float
    sample_size: int
    method: str
    rep: int
    loss: str
    value: float
    infinite: bool
    runtime_ms: float
    seed: int

    def key(self) -> tuple:
        return (self.family, self.alpha, self.sample_size, self.method, self.rep, self.loss)

    def to_row(self) -> list:
        return [
            self.family,
            repr(self.alpha),
            self.sample_size,
            self.method,
            self.rep,
            self.loss,
            repr(self.value),
            int(self.infinite),
            repr(self.runtime_ms),
            self.seed,
        ]

    @classmethod
    def from_row(cls, row: dict) -> "LossRecord":
        return cls(
            family=row["family"],
            alpha=float(row["alpha"]),
            sample_size=int(row["sample_size"]),
            method=row["method"],
            rep=int(row["rep"]),
            loss=row["loss"],
            value=float(row["value"]),
            infinite=bool(int(row["infinite"])),
            runtime_ms=float(row["runtime_ms"]),
            seed=int(row["seed"]),
        )


def dataset_seed_sequence(master_seed: int, family: str, alpha_idx: int, size: int, rep: int):
    """Substream for one repetition's dataset; independent of the methods."""
    return np.random.SeedSequence(
        master_seed, spawn_key=(_FAMILY_IDS[family], alpha_idx, size, rep)
    )


def method_seed(master_seed: int, family: str, alpha_idx: int, size: int, rep: int,
                method: str) -> int:
    ss = np.random.SeedSequence(
        master_seed, spawn_key=(_FAMILY_IDS[family], alpha_idx, size, rep, _METHOD_IDS[method])
    )
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _fit_method(method: str, data: np.ndarray, cfg: ExperimentConfig, seed: int,
                grid: AngularGrid) -> np.ndarray:
    """Run one estimator and return its density values on the grid."""
    if method in ("pd", "pc"):
        block = cfg.pd if method == "pd" else cfg.pc
        dpm = DpmConfig(**{**block, "seed": seed})
        est = (fit_pd if method == "pd" else fit_pc)(data, dpm, grid)
        return est.values
    if method == "fdbayes":
        est = fit_fdbayes(data, seed=seed, grid=grid, **cfg.fdbayes)
        return est.values
    m_range = range(*cfg.nnts.get("m_range", (0, 8)))
    restarts = cfg.nnts.get("restarts", 2)
    criterion = "aic" if method == "naic" else "bic"
    fit = select_by_ic(data, m_range=m_range, criterion=criterion,
                       rng=np.random.default_rng(seed), restarts=restarts)
    return nnts_eval(fit.model, grid.points)


def _run_rep(cfg: ExperimentConfig, family: str, alpha_idx: int, size: int,
             rep: int, skip: frozenset) -> list[LossRecord]:
    """Score every configured method and loss on one repetition's dataset."""
    alphas = cfg.families[family]
    alpha = float(alphas[alpha_idx])
    grid = AngularGrid(cfg.grid_size)
    target = make_target(family, alpha, grid)
    ss = dataset_seed_sequence(cfg.master_seed, family, alpha_idx, size, rep)
    data_seed = int(ss.generate_state(1, dtype=np.uint64)[0])
    data = sample_target(target, size, np.random.default_rng(ss))
    out = []
    for method in cfg.methods:
        keys = [(family, alpha, size, method, rep, loss) for loss in cfg.losses]
        if all(k in skip for k in keys):
            continue
        seed = method_seed(cfg.master_seed, family, alpha_idx, size, rep, method)
        t0 = time.perf_counter()
        try:
            values = _fit_method(method, data, cfg, seed, grid)
            failed = False
        except Exception:
            values = None
            failed = True
        runtime_ms = (time.perf_counter() - t0) * 1000.0
        for loss in cfg.losses:
            if failed:
                value = math.nan
            else:
                value = LOSSES[loss](target, _GridDensity(grid, values))
            out.append(
                LossRecord(
                    family=family,
                    alpha=alpha,
                    sample_size=size,
                    method=method,
                    rep=rep,
                    loss=loss,
                    value=value,
                    infinite=not math.isfinite(value),
                    runtime_ms=runtime_ms,
                    seed=data_seed,
                )
            )
    return out


class _GridDensity:
    """Minimal density-on-grid wrapper accepted by the loss functions."""

    def __init__(self, grid: AngularGrid, values: np.ndarray):
        self.grid = grid
        self.values = values


def _rep_worker(args) -> list[LossRecord]:
    return _run_rep(*args)


def read_records(path) -> list[LossRecord]:
    with open(path, newline="") as fh:
        return [LossRecord.from_row(row) for row in csv.DictReader(fh)]


def run_experiment(cfg: ExperimentConfig, out_path, resume: bool = True) -> list[LossRecord]:
    """Execute the configured study, appending rows to out_path as they finish.

    Returns the records produced by this call.  With resume=True, keys
    already present in the output file are skipped.
    """
    skip: frozenset = frozenset()
    exists = os.path.exists(out_path)
    if exists and resume:
        skip = frozenset(r.key() for r in read_records(out_path))
    tasks = [
        (cfg, family, alpha_idx, size, rep, skip)
        for family in cfg.families
        for alpha_idx in range(len(cfg.families[family]))
        for size in cfg.sample_sizes
        for rep in range(cfg.reps)
    ]
    produced: list[LossRecord] = []
    mode = "a" if exists and resume else "w"
    with open(out_path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if mode == "w":
            writer.writerow(RECORD_COLUMNS)
            fh.flush()

        def consume(recs):
            for r in recs:
                writer.writerow(r.to_row())
                produced.append(r)
            fh.flush()

        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for recs in pool.map(_rep_worker, tasks, chunksize=1):
                    consume(recs)
        else:
            for task in tasks:
                consume(_rep_worker(task))
    return produced


def bootstrap_ci(values, level: float = 0.95, resamples: int = 2000,
                 rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of the values.

    Values must be nonempty and finite; infinite losses are reported as
    counts elsewhere and must be filtered before calling.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("values must be nonempty")
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite; filter infinities first")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if rng is None:
        rng = np.random.default_rng(0)
    idx = rng.integers(0, values.size, size=(resamples, values.size))
    means = values[idx].mean(axis=1)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [tail, 1.0 - tail])
    return float(lo), float(hi)


def summarize(records, level: float = 0.95, resamples: int = 2000,
              seed: int = 0) -> list[dict]:
    """Aggregate records per (family, alpha, size, method, loss) key.

    Means and bootstrap CIs cover the finite values only; infinite losses
    are counted, never averaged.
    """
    groups: dict[tuple, list[LossRecord]] = {}
    for r in records:
        k = (r.family, r.alpha, r.sample_size, r.method, r.loss)
        groups.setdefault(k, []).append(r)
    rows = []
    for gi, (k, recs) in enumerate(groups.items()):
        finite = np.array([r.value for r in recs if math.isfinite(r.value)])
        n_inf = sum(1 for r in recs if not math.isfinite(r.value))
        if finite.size:
            mean = float(finite.mean())
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(gi,)))
            lo, hi = bootstrap_ci(finite, level=level, resamples=resamples, rng=rng)
        else:
            mean = lo = hi = math.nan
        rows.append(
            {
                "family": k[0],
                "alpha": k[1],
                "sample_size": k[2],
                "method": k[3],
                "loss": k[4],
                "mean": mean,
                "ci_lo": lo,
                "ci_hi": hi,
                "n_finite": int(finite.size),
                "n_infinite": n_inf,
            }
        )
    return rows


def write_summary(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row["family"],
                    repr(float(row["alpha"])),
                    row["sample_size"],
                    row["method"],
                    row["loss"],
                    repr(float(row["mean"])),
                    repr(float(row["ci_lo"])),
                    repr(float(row["ci_hi"])),
                    row["n_finite"],
                    row["n_infinite"],
                ]
            )
