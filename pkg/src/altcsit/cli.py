"""Command line entry point: ``altcsit [flags]`` runs one SNR sweep.

Exit codes: 0 success, 2 configuration error, 3 I/O error. Errors go to stderr
as a JSON object ``{"errors": [{"field": ..., "message": ...}]}``.
"""
import argparse
import json
import sys

from .errors import ConfigError, OutputError
from .experiment import emit_results, run_sweep, validate_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

# flag -> config field
FLAGS = {
    "users": "users",
    "snr_start_db": "snr_db_start",
    "snr_stop_db": "snr_db_stop",
    "snr_step_db": "snr_db_step",
    "trials": "trials",
    "seed": "master_seed",
    "variant": "variant",
    "layout": "schedule_layout",
    "policy": "power_policy",
    "format": "output_format",
    "out": "output_path",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(EXIT_CONFIG, [("arguments", message)])


def build_parser():
    p = _Parser(prog="altcsit", description="Secure sum-rate sweep for the alternating-CSIT MISO broadcast channel.")
    p.add_argument("--users", help="number of receivers K (default 3)")
    p.add_argument("--snr-start-db", help="first SNR point in dB (default 60)")
    p.add_argument("--snr-stop-db", help="last SNR point in dB (default 140)")
    p.add_argument("--snr-step-db", help="SNR step in dB (default 10)")
    p.add_argument("--trials", help="channel draws per SNR point (default 200)")
    p.add_argument("--seed", help="64-bit master seed (default 0)")
    p.add_argument("--variant", help="SECURE_ALTERNATING or NO_NOISE_BASELINE")
    p.add_argument("--layout", help="interleaved or contiguous slot layout")
    p.add_argument("--policy", help="power policy: half_noise or equal")
    p.add_argument("--format", help="csv or json")
    p.add_argument("--out", help="output file (stdout if omitted)")
    p.add_argument("--config", help="flat JSON config file; flags override it")
    return p


def _fail(code, errors):
    sys.stderr.write(json.dumps({"errors": [{"field": f, "message": m} for f, m in errors]}) + "\n")
    raise SystemExit(code)


def load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _fail(EXIT_IO, [("config", f"cannot read {path}: {exc.strerror or exc}")])
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        _fail(EXIT_CONFIG, [("config", f"invalid JSON: {exc}")])
    if not isinstance(raw, dict):
        _fail(EXIT_CONFIG, [("config", "top level must be an object")])
    return raw


def main(argv=None):
    args = build_parser().parse_args(argv)
    raw = load_config_file(args.config) if args.config else {}
    for flag, key in FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            raw[key] = value
    try:
        config = validate_config(raw)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, exc.errors)
    result = run_sweep(config)
    try:
        emit_results(result, config.output_format, config.output_path)
    except OutputError as exc:
        _fail(EXIT_IO, [("output_path", str(exc))])
    if config.output_path is not None:
        summary = result.summary()
        print(json.dumps({"slope": summary["slope"], "r2": summary["r2"], "reference": summary["reference"], "delta": summary["delta"]}))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
