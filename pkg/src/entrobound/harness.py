"""Experiment orchestration: configs, runners, envelope fits, reports.

Every experiment is a pure function of (config, seed): runners draw all
randomness from seeded generators, reports carry no timestamps, and
floats are emitted via ``repr``, so identical configs produce
byte-identical files.  ``fit_envelope`` does the log-log regressions
every scaling claim rests on and always reports its residual.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, fields
from enum import Enum
from importlib import metadata as _importlib_metadata

import numpy as np

from .discretization import (
    MeasureSpace,
    SamplePointSet,
    it1_experiment,
    m_p_direct,
    m_p_dual,
    random_subspace,
)
from .entropy import (
    EntropyProfile,
    ball_entropy_experiment,
    duality_sum_check,
    log_ratio_envelope,
    octahedron_cover_profile,
)
from .errors import ConfigValidationError
from .greedy import Octahedron, SigmaProfile, sample_octahedron, sigma_profile
from .spaces import canonical_dictionary

__all__ = [
    "EXPERIMENTS",
    "FitModel",
    "FitResult",
    "fit_envelope",
    "ExperimentConfig",
    "Report",
    "emit",
    "run",
]

EXPERIMENTS = (
    "sigma-decay",
    "ball-entropy",
    "duality-check",
    "mp-duality",
    "it1",
    "it2-octahedron",
)

try:
    _VERSION = "entrobound " + _importlib_metadata.version("entrobound")
except _importlib_metadata.PackageNotFoundError:  # running from a checkout
    _VERSION = "entrobound 0.1.0"


# ---------------------------------------------------------------------------
# envelope fitting

class FitModel(Enum):
    POWER_M = "power-m"            # value ~ C * m^r
    LOG_RATIO_K = "log-ratio-k"    # value ~ C * (log2(2n/k)/k)^r


@dataclass
class FitResult:
    """Least-squares exponent and constant with the residual on record."""

    exponent: float
    constant: float
    residual_rms: float
    points_used: int
    k_range: tuple[int, int]
    model: str

    def to_json(self) -> dict:
        return {
            "exponent": self.exponent,
            "constant": self.constant,
            "residual_rms": self.residual_rms,
            "points_used": self.points_used,
            "k_range": list(self.k_range),
            "model": self.model,
        }


def _fit_inputs(table, n):
    if isinstance(table, EntropyProfile):
        return np.asarray(table.k_list, dtype=float), np.asarray(table.upper, dtype=float)
    if isinstance(table, SigmaProfile):
        return np.asarray(table.m_list, dtype=float), np.asarray(table.values, dtype=float)
    xs, values = table
    return np.asarray(xs, dtype=float), np.asarray(values, dtype=float)


def fit_envelope(table, n: int | None = None,
                 model: FitModel = FitModel.POWER_M, *,
                 include_small_k: bool = False) -> FitResult:
    """Fit value = C * predictor^r in the log2-log2 domain.

    ``table`` is an EntropyProfile (fits the upper entries against k),
    a SigmaProfile (values against m), or an (xs, values) pair.  The
    LOG_RATIO_K model regresses against log2(2n/k)/k and by default
    drops k < log2(n), where only the trivial bound is meaningful;
    pass include_small_k=True to keep those entries.
    """
    xs, values = _fit_inputs(table, n)
    if model is FitModel.LOG_RATIO_K:
        if n is None:
            raise ValueError("the log-ratio model needs the set size n")
        if not include_small_k:
            keep = xs >= math.log2(n)
            xs, values = xs[keep], values[keep]
        predictor = np.log2(2.0 * n / xs) / xs
    else:
        predictor = xs
    bad = [int(i) for i in np.nonzero(values <= 0)[0]]
    if bad:
        raise ValueError(f"fit needs positive values; entries {bad} are not")
    if len(values) < 3:
        raise ValueError(f"fit needs at least 3 points, got {len(values)}")
    lx = np.log2(predictor)
    ly = np.log2(values)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return FitResult(
        exponent=float(slope), constant=float(2.0 ** intercept),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        points_used=int(len(values)),
        k_range=(int(xs.min()), int(xs.max())),
        model=model.value)


# ---------------------------------------------------------------------------
# configuration

_CONFIG_DEFAULTS: dict[str, dict] = {
    "sigma-decay": {"q": 2.0, "n": 256, "m_list": [4, 8, 16, 32, 64],
                    "samples": 50},
    "ball-entropy": {"p": 2.0, "n": 32, "samples": 2048},
    "duality-check": {"q": 2.0, "n": 8, "m": 6, "samples": 320},
    "mp-duality": {"p": 2.0, "subspace_dim": 4, "support_size": 64,
                   "trials": 20},
    "it1": {"p": 2.0, "subspace_dim": 8, "support_size": 256, "n": 64,
            "samples": 320},
    "it2-octahedron": {"q": 2.0, "n": 64, "samples": 400},
}


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run.

    Only ``experiment`` and ``seed`` are universally required; every
    other field has an experiment-specific default filled in by
    ``resolved()``.  ``n`` is the dictionary size, ball dimension, or
    sample-point count depending on the experiment; ``subspace_dim``
    and ``support_size`` describe subspaces for mp-duality and it1.
    """

    experiment: str
    seed: int
    q: float | None = None
    p: float | None = None
    n: int | None = None
    subspace_dim: int | None = None
    support_size: int | None = None
    k_list: list[int] | None = None
    m_list: list[int] | None = None
    m: int | None = None
    samples: int | None = None
    trials: int | None = None
    tolerance: float | None = None
    out: str | None = None
    format: str = "csv"

    def resolved(self) -> "ExperimentConfig":
        """Fill experiment-specific defaults, leaving set fields alone."""
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        for key, default in _CONFIG_DEFAULTS.get(self.experiment, {}).items():
            if values.get(key) is None:
                values[key] = default
        if values.get("k_list") is None and values.get("n") is not None:
            lo = max(1, math.ceil(math.log2(max(values["n"], 2))))
            ks = sorted({lo, 2 * lo, 4 * lo, values["n"]})
            values["k_list"] = [k for k in ks if lo <= k <= values["n"]]
        return ExperimentConfig(**values)

    def validate(self) -> None:
        """Collect every offending field into one structured error."""
        problems: list[str] = []
        if self.experiment not in EXPERIMENTS:
            problems.append(
                f"experiment: {self.experiment!r} is not one of {', '.join(EXPERIMENTS)}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            problems.append(f"seed: need a nonnegative integer, got {self.seed!r}")
        if self.format not in ("csv", "json"):
            problems.append(f"format: must be csv or json, got {self.format!r}")

        def need_q(lo=1.0, hi=float("inf")):
            if self.q is None or not lo < self.q <= hi:
                span = f"({lo}, {hi}]" if math.isfinite(hi) else f"q > {lo}"
                problems.append(f"q: needs {span}, got {self.q!r}")

        def need_p():
            if self.p is None or self.p < 2:
                problems.append(
                    f"p: the subspace and ball experiments require p >= 2, got {self.p!r}")

        def need_pos(name, minimum=1):
            value = getattr(self, name)
            if value is None or value < minimum:
                problems.append(f"{name}: need an integer >= {minimum}, got {value!r}")

        def need_k_list(cap):
            if not self.k_list:
                problems.append("k_list: must be a nonempty list")
            elif sorted(self.k_list) != list(self.k_list) or self.k_list[0] < 1:
                problems.append(f"k_list: must be increasing and >= 1, got {self.k_list!r}")
            elif cap is not None and self.k_list[-1] > cap:
                problems.append(
                    f"k_list: entries must stay <= n = {cap}, got {self.k_list[-1]}")

        if self.experiment == "sigma-decay":
            need_q()
            need_pos("n")
            need_pos("samples")
            if not self.m_list or sorted(self.m_list) != list(self.m_list) or self.m_list[0] < 1:
                problems.append(f"m_list: must be increasing positive integers, got {self.m_list!r}")
            elif self.n is not None and self.m_list[-1] > self.n:
                problems.append(f"m_list: entries must stay <= n = {self.n}")
        elif self.experiment == "ball-entropy":
            need_p()
            need_pos("n")
            need_pos("samples")
            need_k_list(self.n)
        elif self.experiment == "duality-check":
            need_q(1.0, 2.0)
            need_pos("n")
            if self.n is not None and self.n > 12:
                problems.append(f"n: the duality check is budgeted for n <= 12, got {self.n}")
            if self.m is None or self.m < 0:
                problems.append(f"m: need an integer >= 0, got {self.m!r}")
            need_pos("samples")
        elif self.experiment == "mp-duality":
            need_p()
            need_pos("subspace_dim")
            need_pos("support_size")
            if (self.subspace_dim is not None and self.support_size is not None
                    and self.subspace_dim > self.support_size):
                problems.append("subspace_dim: must not exceed support_size")
            need_pos("trials")
        elif self.experiment == "it1":
            need_p()
            need_pos("subspace_dim")
            need_pos("support_size")
            need_pos("n")
            if (self.n is not None and self.support_size is not None
                    and self.n > self.support_size):
                problems.append(
                    f"n: cannot sample {self.n} points from {self.support_size} support points")
            need_k_list(self.n)
            need_pos("samples")
        elif self.experiment == "it2-octahedron":
            need_q()
            need_pos("n")
            need_pos("samples")
            need_k_list(self.n)
        if problems:
            raise ConfigValidationError(problems)

    def to_json(self) -> dict:
        doc = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            doc[f.name] = value
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigValidationError(
                [f"{key}: unknown configuration field" for key in unknown])
        if "experiment" not in doc or "seed" not in doc:
            raise ConfigValidationError(
                [f"{key}: required" for key in ("experiment", "seed")
                 if key not in doc])
        return cls(**doc)


# ---------------------------------------------------------------------------
# reports

@dataclass
class Report:
    """Column-oriented experiment output plus metadata and a summary."""

    experiment: str
    columns: dict[str, list]
    metadata: dict
    summary: list[str]

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns.keys())
        for row in zip(*self.columns.values()):
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()

    def json_text(self) -> str:
        doc = {
            "experiment": self.experiment,
            "metadata": self.metadata,
            "columns": self.columns,
            "summary": self.summary,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def summary_text(self) -> str:
        return "\n".join(self.summary) + "\n"


def emit(report: Report, fmt: str, out: str | None = None) -> str:
    """Render the report; write it to ``out`` when a path is given."""
    if fmt == "csv":
        text = report.csv_text()
    elif fmt == "json":
        text = report.json_text()
    else:
        raise ConfigValidationError([f"format: must be csv or json, got {fmt!r}"])
    if out is not None:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def _float_list(values) -> list[float]:
    return [float(v) for v in values]


# ---------------------------------------------------------------------------
# runners

def _run_sigma_decay(cfg: ExperimentConfig) -> Report:
    dictionary = canonical_dictionary(cfg.n, cfg.q)
    drawn = sample_octahedron(dictionary, cfg.samples, cfg.seed)
    profile = sigma_profile([s["vector"] for s in drawn], dictionary, cfg.m_list)
    fit = fit_envelope(profile, model=FitModel.POWER_M)
    theory = 1.0 / cfg.q - 1.0
    return Report(
        experiment=cfg.experiment,
        columns={"m": list(cfg.m_list), "sigma": _float_list(profile.values)},
        metadata={"seed": cfg.seed, "q": cfg.q, "n": cfg.n,
                  "samples": cfg.samples, "fit": fit.to_json(),
                  "theory_exponent": theory, "version": _VERSION},
        summary=[
            f"greedy m-term decay on the {cfg.n}-atom hull, q = {cfg.q}",
            f"max residual over {cfg.samples} samples at m = {list(cfg.m_list)}",
            f"fitted exponent {fit.exponent:.4f} (theory {theory:.4f}), "
            f"constant {fit.constant:.4f}, residual rms {fit.residual_rms:.2e}",
        ])


def _run_ball_entropy(cfg: ExperimentConfig) -> Report:
    result = ball_entropy_experiment(cfg.p, cfg.n, cfg.k_list,
                                     sample_size=cfg.samples, seed=cfg.seed)
    profile = result.profile
    ks = np.asarray(profile.k_list, dtype=float)
    envelope = log_ratio_envelope(cfg.n, ks, 1.0 / cfg.p)
    ratio = profile.upper / envelope
    spread = float(ratio.max() / ratio.min())
    return Report(
        experiment=cfg.experiment,
        columns={
            "k": profile.k_list,
            "lower": _float_list(profile.lower),
            "upper": _float_list(profile.upper),
            "envelope": _float_list(envelope),
            "ratio": _float_list(ratio),
        },
        metadata={"seed": cfg.seed, "p": cfg.p, "n": cfg.n,
                  "samples": result.sample_size,
                  "upper_source": profile.upper_source,
                  "lower_source": profile.lower_source,
                  "ratio_spread": spread, "trivial_bound": 1.0,
                  "version": _VERSION},
        summary=[
            f"unit ball of l_{cfg.p} in dimension {cfg.n}, max-norm entropy",
            f"upper/envelope ratio spread {spread:.3f} over k = {profile.k_list}",
            f"max upper entry {float(np.max(profile.upper))!r} (trivial bound 1)",
        ])


def _run_duality_check(cfg: ExperimentConfig) -> Report:
    dictionary = canonical_dictionary(cfg.n, cfg.q)
    report = duality_sum_check(dictionary, cfg.m, sample_size=cfg.samples,
                               seed=cfg.seed)
    lo, hi = report.ratio_interval
    return Report(
        experiment=cfg.experiment,
        columns={
            "k": report.k_list,
            "hull_lower": _float_list(report.hull_lower),
            "hull_upper": _float_list(report.hull_upper),
            "dual_lower": _float_list(report.dual_lower),
            "dual_upper": _float_list(report.dual_upper),
        },
        metadata={"seed": cfg.seed, "q": cfg.q, "n": cfg.n, "m": cfg.m,
                  "p_exponent": report.p_exponent,
                  "ratio_interval": [lo, hi],
                  "contains_one": report.contains_one,
                  "flagged": report.flagged, "status": report.status,
                  "version": _VERSION},
        summary=[
            f"entropy sum duality on {cfg.n} canonical atoms, q = {cfg.q}, "
            f"p = q'/2 = {report.p_exponent}",
            f"ratio interval [{lo!r}, {hi!r}], contains 1: {report.contains_one}",
            f"status: {report.status}",
        ])


def _run_mp_duality(cfg: ExperimentConfig) -> Report:
    rng = np.random.default_rng(cfg.seed)
    rows = {"trial": [], "seed": [], "uniform": [], "direct": [], "dual": [],
            "gap": []}
    max_gap = 0.0
    for i in range(cfg.trials):
        sub_seed = int(rng.integers(2 ** 31))
        uniform = i % 2 == 0
        if uniform:
            measure = None
        else:
            w = rng.uniform(0.5, 1.5, cfg.support_size)
            measure = MeasureSpace(w / w.sum())
        sub = random_subspace(cfg.subspace_dim, cfg.support_size, sub_seed,
                              measure=measure)
        direct = m_p_direct(sub, cfg.p)
        dual = m_p_dual(sub, cfg.p)
        gap = abs(direct - dual)
        max_gap = max(max_gap, gap)
        rows["trial"].append(i)
        rows["seed"].append(sub_seed)
        rows["uniform"].append(int(uniform))
        rows["direct"].append(float(direct))
        rows["dual"].append(float(dual))
        rows["gap"].append(float(gap))
    return Report(
        experiment=cfg.experiment,
        columns=rows,
        metadata={"seed": cfg.seed, "p": cfg.p,
                  "subspace_dim": cfg.subspace_dim,
                  "support_size": cfg.support_size, "trials": cfg.trials,
                  "max_gap": max_gap, "version": _VERSION},
        summary=[
            f"uniform-norm constant by two routes on {cfg.trials} random "
            f"subspaces (dim {cfg.subspace_dim} of {cfg.support_size} points, "
            f"p = {cfg.p})",
            f"max |direct - dual| = {max_gap!r}",
        ])


def _run_it1(cfg: ExperimentConfig) -> Report:
    rng = np.random.default_rng(cfg.seed)
    sub = random_subspace(cfg.subspace_dim, cfg.support_size,
                          int(rng.integers(2 ** 31)))
    pts = SamplePointSet(np.sort(rng.choice(cfg.support_size, cfg.n,
                                            replace=False)))
    result = it1_experiment(sub, pts, cfg.p, cfg.k_list, seed=cfg.seed,
                            cover_sample_size=cfg.samples)
    profile = result.profile
    return Report(
        experiment=cfg.experiment,
        columns={
            "k": profile.k_list,
            "lower": _float_list(profile.lower),
            "upper": _float_list(profile.upper),
            "envelope": _float_list(result.envelope),
            "ratio": _float_list(result.upper_ratio),
        },
        metadata={"seed": cfg.seed, "p": cfg.p,
                  "subspace_dim": cfg.subspace_dim,
                  "support_size": cfg.support_size, "n": cfg.n,
                  "m_p": result.m_p, "ratio_spread": result.spread,
                  "upper_source": profile.upper_source,
                  "version": _VERSION},
        summary=[
            f"subspace ball entropy in the {cfg.n}-point seminorm "
            f"(dim {cfg.subspace_dim} of {cfg.support_size}, p = {cfg.p})",
            f"M_p = {result.m_p!r}",
            f"upper/envelope ratio spread {result.spread:.3f} over k = {profile.k_list}",
        ])


def _run_it2_octahedron(cfg: ExperimentConfig) -> Report:
    dictionary = canonical_dictionary(cfg.n, cfg.q)
    octa = Octahedron(dictionary)
    certs = octahedron_cover_profile(octa, cfg.k_list, seed=cfg.seed,
                                     sample_size=cfg.samples)
    ks = list(cfg.k_list)
    radii = np.array([certs[k].radius for k in ks])
    envelope = log_ratio_envelope(cfg.n, np.asarray(ks, dtype=float),
                                  1.0 - 1.0 / cfg.q)
    ratio = radii / envelope
    counts = [certs[k].count_bound for k in ks]
    return Report(
        experiment=cfg.experiment,
        columns={
            "k": ks,
            "radius": _float_list(radii),
            "count_bound": counts,
            "envelope": _float_list(envelope),
            "ratio": _float_list(ratio),
        },
        metadata={"seed": cfg.seed, "q": cfg.q, "n": cfg.n,
                  "samples": cfg.samples,
                  "m_used": [certs[k].extra.get("m") for k in ks],
                  "ratio_spread": float(ratio.max() / ratio.min()),
                  "version": _VERSION},
        summary=[
            f"constructive covers of the {cfg.n}-atom hull, q = {cfg.q}",
            f"radii {[float(r) for r in radii]} at k = {ks}",
            f"upper/envelope ratio spread {float(ratio.max() / ratio.min()):.3f}",
        ])


_RUNNERS = {
    "sigma-decay": _run_sigma_decay,
    "ball-entropy": _run_ball_entropy,
    "duality-check": _run_duality_check,
    "mp-duality": _run_mp_duality,
    "it1": _run_it1,
    "it2-octahedron": _run_it2_octahedron,
}


def run(config: ExperimentConfig) -> tuple[Report, str]:
    """Validate, execute, and emit one experiment.

    Returns the report and the rendered machine-readable text (also
    written to ``config.out`` when set).
    """
    cfg = config.resolved()
    cfg.validate()
    report = _RUNNERS[cfg.experiment](cfg)
    text = emit(report, cfg.format, cfg.out)
    return report, text
