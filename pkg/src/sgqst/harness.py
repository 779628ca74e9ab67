"""Seeded trial ensembles, figure presets and report serialization."""

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import partial

import numpy as np

from .core import validate_density
from .learner import NOISE_AWARE, NORMALIZATION_MODES, STANDARD, LearnerConfig, learn_state
from .measurement import MeasurementDevice
from .metrics import infidelity, median, quantiles
from .randgen import ginibre_mixed_state, make_rng

CSV_COLUMNS = (
    "config_id", "d", "N", "K", "lambda", "mode", "trial",
    "checkpoint_iteration", "infidelity", "copies_used",
)
MODES = ("exact", "shots")
FIGURES = ("fig2", "fig3", "fig4")
SCALES = ("full", "desk")

# stream ids under (seed, trial, .)
_STATE_STREAM, _LEARNER_STREAM, _DEVICE_STREAM = 0, 1, 2


class TrialError(RuntimeError):
    def __init__(self, trial, cause):
        super().__init__(f"trial {trial} failed: {cause!r}")
        self.trial = trial
        self.cause = cause


@dataclass(frozen=True)
class ExperimentConfig:
    d: int
    N: int
    K: int
    trials: int = 1
    lam: float = 0.0
    mode: str = "shots"
    epsilon: float = 1e-4
    normalization: str = STANDARD
    seed: int = 0
    checkpoints: tuple = ()
    rank: int = None
    config_id: str = "run"
    notes: str = ""
    state: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "checkpoints", tuple(int(c) for c in self.checkpoints))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.normalization not in NORMALIZATION_MODES:
            raise ValueError(f"normalization must be one of {NORMALIZATION_MODES}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        cps = self.checkpoints
        if list(cps) != sorted(cps) or len(set(cps)) != len(cps):
            raise ValueError("checkpoints must be strictly ascending")
        if cps and (cps[0] < 1 or cps[-1] > self.K * self.d):
            raise ValueError(f"checkpoints must lie in 1..K*d = {self.K * self.d}")
        rank = self.d if self.rank is None else self.rank
        if not 1 <= rank <= self.d:
            raise ValueError(f"rank must be in 1..{self.d}")
        object.__setattr__(self, "rank", rank)
        # learner config validates d, N, K, epsilon
        self.learner_config()

    def learner_config(self):
        return LearnerConfig(
            d=self.d, N=self.N, K=self.K, epsilon=self.epsilon,
            normalization=self.normalization, seed=self.seed,
        )

    def to_dict(self):
        out = asdict(self)
        out["checkpoints"] = list(self.checkpoints)
        if self.state is not None:
            out["state"] = [[[z.real, z.imag] for z in row] for row in self.state]
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if data.get("state") is not None:
            data["state"] = state_from_json(data["state"])
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


@dataclass
class TrialRecord:
    trial: int
    checkpoints: list
    final_infidelity: float
    copies_used: int
    r_hat: int


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    checkpoint_summary: list
    final_summary: dict
    trials: list
    total_copies: int
    wall_time: float = 0.0

    def final_infidelities(self):
        return [t.final_infidelity for t in self.trials]

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "checkpoint_summary": self.checkpoint_summary,
            "final_summary": self.final_summary,
            "trials": [asdict(t) for t in self.trials],
            "total_copies": self.total_copies,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, data):
        trials = [
            TrialRecord(
                trial=t["trial"],
                checkpoints=[tuple(c) for c in t["checkpoints"]],
                final_infidelity=t["final_infidelity"],
                copies_used=t["copies_used"],
                r_hat=t["r_hat"],
            )
            for t in data["trials"]
        ]
        return cls(
            config=ExperimentConfig.from_dict(data["config"]),
            checkpoint_summary=data["checkpoint_summary"],
            final_summary=data["final_summary"],
            trials=trials,
            total_copies=data["total_copies"],
            wall_time=data.get("wall_time", 0.0),
        )


def state_from_json(rows):
    """Parse a d x d matrix written as rows of [re, im] pairs."""
    arr = np.array(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        raise ValueError(f"expected a d x d x 2 array of [re, im] pairs, got shape {arr.shape}")
    m = arr[..., 0] + 1j * arr[..., 1]
    return tuple(tuple(complex(z) for z in row) for row in m)


def load_state(path):
    with open(path) as fh:
        return np.array(state_from_json(json.load(fh)), dtype=complex)


def _clamp_infidelity(x):
    return min(max(float(x), 0.0), 1.0)


def run_trial(cfg, trial):
    """One seeded trial. The state depends only on (seed, trial, d, rank), so
    configs sharing a seed are evaluated on the same ensemble."""
    if cfg.state is not None:
        rho = validate_density(np.array(cfg.state, dtype=complex))
    else:
        rho = ginibre_mixed_state(cfg.d, cfg.rank, make_rng(cfg.seed, trial, _STATE_STREAM))
    dev = MeasurementDevice(
        rho, cfg.N, exact=cfg.mode == "exact", noise_lambda=cfg.lam,
        rng=make_rng(cfg.seed, trial, _DEVICE_STREAM),
    )
    result = learn_state(
        dev, cfg.learner_config(),
        rng=make_rng(cfg.seed, trial, _LEARNER_STREAM),
        checkpoints=cfg.checkpoints,
    )
    points = [(s.iteration, _clamp_infidelity(infidelity(rho, s.rho_hat))) for s in result.snapshots]
    return TrialRecord(
        trial=trial,
        checkpoints=points,
        final_infidelity=_clamp_infidelity(infidelity(rho, result.rho_hat)),
        copies_used=result.copies_used,
        r_hat=result.r_hat,
    )


def _guarded_trial(cfg, trial):
    try:
        return run_trial(cfg, trial)
    except Exception as exc:  # surfaced with the trial id by the caller
        return TrialError(trial, exc)


def default_workers():
    raw = os.environ.get("SGQST_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("SGQST_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _summary(values):
    q25, q75 = quantiles(values, [0.25, 0.75])
    return {"median": median(values), "q25": q25, "q75": q75}


def run_experiment(cfg, workers=None):
    """Run ``cfg.trials`` independent trials and aggregate them in trial order.

    Trials run in a process pool of ``workers`` (default: ``SGQST_THREADS``,
    0 meaning one per CPU). The report does not depend on the worker count.
    """
    workers = default_workers() if workers is None else int(workers)
    start = time.perf_counter()
    job = partial(_guarded_trial, cfg)
    ids = range(cfg.trials)
    if workers <= 1 or cfg.trials == 1:
        records = [job(t) for t in ids]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, cfg.trials)) as pool:
            chunk = max(1, cfg.trials // (4 * workers))
            records = list(pool.map(job, ids, chunksize=chunk))
    for rec in records:
        if isinstance(rec, TrialError):
            raise rec
    summary = []
    for j, it in enumerate(cfg.checkpoints):
        vals = [rec.checkpoints[j][1] for rec in records]
        summary.append({"iteration": it, **_summary(vals)})
    return ExperimentReport(
        config=cfg,
        checkpoint_summary=summary,
        final_summary=_summary([r.final_infidelity for r in records]),
        trials=records,
        total_copies=sum(r.copies_used for r in records),
        wall_time=time.perf_counter() - start,
    )


def _log_grid(top):
    """1, 2, 5, 10, 20, 50, ... up to and including ``top``."""
    out = []
    for exp in range(int(math.log10(top)) + 1):
        for m in (1, 2, 5):
            v = m * 10**exp
            if v < top:
                out.append(v)
    out.append(top)
    return tuple(out)


def figure_preset(name, scale="desk", seed=0):
    """Experiment grids for the three figure designs.

    ``desk`` scale keeps the grid but cuts the trial count (fig2: 50, fig3 and
    fig4: 25) and caps K; each config's ``notes`` says so.
    """
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; valid names: {', '.join(FIGURES)}")
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}; valid scales: {', '.join(SCALES)}")
    desk = scale == "desk"
    note = "desk scale: reduced trials and capped K" if desk else ""
    configs = []
    if name == "fig2":
        K, trials = (300, 50) if desk else (1000, 1000)
        for N in (10, 100, 1000, 10000):
            configs.append(ExperimentConfig(
                d=2, N=N, K=K, trials=trials, mode="shots", seed=seed,
                checkpoints=_log_grid(2 * K), config_id=f"fig2-N{N}", notes=note,
            ))
    elif name == "fig3":
        K, trials = (300, 25) if desk else (1000, 100)
        for d in range(2, 9):
            configs.append(ExperimentConfig(
                d=d, N=1000, K=K, trials=trials, mode="shots", seed=seed,
                checkpoints=_log_grid(d * K), config_id=f"fig3-d{d}", notes=note,
            ))
    else:
        # K = (N_tot - 1e4) / (N d) keeps the total copies equal across d
        n_shots, trials = 1000, (25 if desk else 100)
        spend = 480_000 if desk else 2_400_000
        for d in (2, 4, 6, 8):
            K = spend // (n_shots * d)
            for lam in (0.0, 0.2):
                configs.append(ExperimentConfig(
                    d=d, N=n_shots, K=K, trials=trials, lam=lam, mode="shots",
                    normalization=NOISE_AWARE if lam > 0 else STANDARD, seed=seed,
                    checkpoints=_log_grid(d * K),
                    config_id=f"fig4-d{d}-lam{lam:g}", notes=note,
                ))
    return configs


def _fmt(x):
    return repr(float(x))


def report_rows(report):
    cfg = report.config
    for rec in report.trials:
        for it, inf in rec.checkpoints:
            yield (
                cfg.config_id, cfg.d, cfg.N, cfg.K, _fmt(cfg.lam), cfg.mode,
                rec.trial, it, _fmt(inf), rec.copies_used,
            )


def _as_list(reports):
    return [reports] if isinstance(reports, ExperimentReport) else list(reports)


def report_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in _as_list(reports):
        writer.writerows(report_rows(rep))
    return buf.getvalue()


def report_json(reports):
    return json.dumps([r.to_dict() for r in _as_list(reports)], indent=2)


def emit_report(reports, fmt, path):
    """Write one report or a list of reports as ``csv`` or ``json``."""
    if fmt == "csv":
        text = report_csv(reports)
    elif fmt == "json":
        text = report_json(reports)
    else:
        raise ValueError(f"unknown format {fmt!r}; use csv or json")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def read_csv(path):
    """Rows of an emitted CSV, with numeric columns converted back."""
    casts = {"d": int, "N": int, "K": int, "lambda": float, "trial": int,
             "checkpoint_iteration": int, "infidelity": float, "copies_used": int}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{k: casts.get(k, str)(v) for k, v in row.items()} for row in reader]


def read_json(path):
    with open(path) as fh:
        return [ExperimentReport.from_dict(d) for d in json.load(fh)]
