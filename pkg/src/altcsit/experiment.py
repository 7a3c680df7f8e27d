"""Monte Carlo SNR sweeps, configuration handling and result files.

Channel draws depend only on ``(master_seed, slot)``, so every SNR point of a
sweep sees the same set of channels and the fitted slope is not disturbed by
draw-to-draw noise between points.
"""
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import RatePoint, fit_line, fit_sdof, leakage_batch, pair_key, rates_batch, secrecy_pairs
from .channel import Layout, make_schedule, sample_channel
from .errors import ConfigError, InsufficientPoints, OutputError, RankDeficient
from .precoding import POLICIES, precoders_batch
from .scheme import SchemeVariant, stream_powers

FORMATS = ("csv", "json")


class ReferenceTable:
    """Sum SDoF values the sweep is compared against."""

    three_user = 2.5

    @staticmethod
    def sum_sdof(K):
        return (2 * K - 1) / 2


@dataclass(frozen=True)
class ExperimentConfig:
    users: int = 3
    snr_db_start: float = 60.0
    snr_db_stop: float = 140.0
    snr_db_step: float = 10.0
    trials: int = 200
    master_seed: int = 0
    variant: str = SchemeVariant.SECURE_ALTERNATING.value
    schedule_layout: str = Layout.INTERLEAVED.value
    power_policy: str = "half_noise"
    output_format: str = "csv"
    output_path: str = None

    def snr_grid(self):
        count = int(math.floor((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9)) + 1
        return [self.snr_db_start + i * self.snr_db_step for i in range(count)]


def _as_int(value):
    if isinstance(value, bool):
        raise ValueError
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError
        return int(value)
    return int(str(value).strip(), 0)


def _as_float(value):
    if isinstance(value, bool):
        raise ValueError
    out = float(value)
    if not math.isfinite(out):
        raise ValueError
    return out


def validate_config(raw=None):
    """Build an :class:`ExperimentConfig` from loose key/value input.

    Missing keys take their defaults. Every violated field is reported in a
    single :class:`ConfigError`.
    """
    raw = dict(raw or {})
    defaults = asdict(ExperimentConfig())
    errors = []
    unknown = sorted(set(raw) - set(defaults))
    for key in unknown:
        errors.append((key, "unknown field"))
    values = dict(defaults)
    values.update({k: v for k, v in raw.items() if k in defaults and v is not None})

    def coerce(name, conv, kind):
        try:
            values[name] = conv(values[name])
            return True
        except (TypeError, ValueError):
            errors.append((name, f"must be {kind}"))
            return False

    if coerce("users", _as_int, "an integer") and values["users"] < 2:
        errors.append(("users", "users must be >= 2"))
    ok_start = coerce("snr_db_start", _as_float, "a finite number")
    ok_stop = coerce("snr_db_stop", _as_float, "a finite number")
    if ok_start and ok_stop and not values["snr_db_stop"] > values["snr_db_start"]:
        errors.append(("snr_db_stop", "snr_db_stop must be > snr_db_start"))
    if coerce("snr_db_step", _as_float, "a finite number") and not values["snr_db_step"] > 0:
        errors.append(("snr_db_step", "snr_db_step must be > 0"))
    if coerce("trials", _as_int, "an integer") and values["trials"] < 1:
        errors.append(("trials", "trials must be >= 1"))
    if coerce("master_seed", _as_int, "an integer") and not 0 <= values["master_seed"] < 2**64:
        errors.append(("master_seed", "master_seed must fit in 64 unsigned bits"))

    variant = str(values["variant"]).strip().upper()
    aliases = {"SECURE": "SECURE_ALTERNATING", "BASELINE": "NO_NOISE_BASELINE"}
    variant = aliases.get(variant, variant)
    if variant not in SchemeVariant.__members__:
        errors.append(("variant", f"must be one of {', '.join(SchemeVariant.__members__)}"))
    values["variant"] = variant

    layout = str(values["schedule_layout"]).strip().lower()
    if layout not in {m.value for m in Layout}:
        errors.append(("schedule_layout", "must be 'interleaved' or 'contiguous'"))
    values["schedule_layout"] = layout

    if values["power_policy"] not in POLICIES:
        errors.append(("power_policy", f"must be one of {', '.join(POLICIES)}"))
    fmt = str(values["output_format"]).strip().lower()
    if fmt not in FORMATS:
        errors.append(("output_format", "must be 'csv' or 'json'"))
    values["output_format"] = fmt
    if values["output_path"] is not None:
        values["output_path"] = str(values["output_path"])

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(**values)


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list
    fit: object = None  # SdofFit, or None when the grid cannot support a fit
    fit_error: str = None
    leakage_slopes: dict = field(default_factory=dict)

    @property
    def reference(self):
        return ReferenceTable.sum_sdof(self.config.users)

    @property
    def delta(self):
        return None if self.fit is None else self.fit.slope - self.reference

    def summary(self):
        fit = self.fit
        return {
            "slope": None if fit is None else fit.slope,
            "intercept": None if fit is None else fit.intercept,
            "r2": None if fit is None else fit.r_squared,
            "points_used": 0 if fit is None else fit.points_used,
            "reference": self.reference,
            "delta": self.delta,
            "leakage_slopes": dict(self.leakage_slopes),
            "fit_error": self.fit_error,
        }


def draw_gain_tables(K, trials, seed, layout=Layout.INTERLEAVED):
    """Channels, beamformers and gain tables for ``trials`` blocks.

    Returns ``(gp, gd)`` with shape ``(trials, K, K)``.
    """
    schedule = make_schedule(trials, layout)
    slots = [schedule.block_slots(i) for i in range(trials)]
    H_p = np.stack([sample_channel(K, seed, tp).H for tp, _ in slots])
    H_d = np.stack([sample_channel(K, seed, td).H for _, td in slots])
    Vp, Vd, ok = precoders_batch(H_p, H_d[:, 1:])
    if not ok.all():
        raise RankDeficient(f"{int((~ok).sum())} degenerate channel draws")
    return H_p @ Vp, H_d @ Vd


def run_sweep(config):
    """Average rates and leakage over ``config.trials`` blocks at each SNR point."""
    if not isinstance(config, ExperimentConfig):
        config = validate_config(config)
    K = config.users
    variant = SchemeVariant(config.variant)
    gp, gd = draw_gain_tables(K, config.trials, config.master_seed, Layout(config.schedule_layout))
    pairs = secrecy_pairs(K)
    points = []
    for snr_db in config.snr_grid():
        P = 10.0 ** (snr_db / 10.0)
        powers = stream_powers(K, P, variant, config.power_policy)
        per_user = rates_batch(gp, gd, powers).mean(axis=0)
        leakage = {}
        for k, observers in pairs:
            leakage[pair_key(k, observers)] = float(leakage_batch(gp, gd, powers.source_variances(), k, observers).mean())
        points.append(RatePoint(P=P, per_user_rate=per_user, sum_rate=float(per_user.sum()), leakage=leakage, trials=config.trials))

    result = SweepResult(config=config, points=points)
    try:
        result.fit = fit_sdof(points)
    except InsufficientPoints as exc:
        result.fit_error = str(exc)
    if len(points) >= 2:
        x = np.log2([p.P for p in points])
        for k, observers in pairs:
            key = pair_key(k, observers)
            result.leakage_slopes[key] = fit_line(x, [p.leakage[key] for p in points])[0]
    return result


def result_columns(K):
    pairs = [pair_key(k, obs) for k, obs in secrecy_pairs(K)]
    return (
        ["snr_db", "power_linear", "sum_rate_bits"]
        + [f"rate_user_{k}" for k in range(1, K + 1)]
        + [f"leakage_pair_{key}" for key in pairs]
        + ["trials"]
    )


def point_record(point):
    rec = {"snr_db": point.snr_db, "power_linear": point.P, "sum_rate_bits": point.sum_rate}
    for k, r in enumerate(point.per_user_rate, start=1):
        rec[f"rate_user_{k}"] = float(r)
    for key, value in point.leakage.items():
        rec[f"leakage_pair_{key}"] = value
    rec["trials"] = point.trials
    return rec


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_results(result, fmt="csv"):
    K = result.config.users
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        columns = result_columns(K)
        writer.writerow(columns)
        for point in result.points:
            rec = point_record(point)
            writer.writerow([_fmt(rec[c]) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "config": asdict(result.config),
            "points": [point_record(p) for p in result.points],
            "summary": result.summary(),
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_results(result, fmt="csv", path=None):
    """Write the sweep as CSV or JSON to ``path`` (stdout when ``path`` is None)."""
    text = render_results(result, fmt)
    if path is None:
        sys.stdout.write(text)
        return text
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text
