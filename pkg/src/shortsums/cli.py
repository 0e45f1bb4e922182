"""Command line driver: one subcommand per experiment, self-describing CSV/JSON output.

Every output starts with ``# config: <canonical JSON>`` (CSV) or carries a
``config`` object (JSON); :meth:`ExperimentConfig.from_header` parses it back.
Random streams use ``derive_seed(master_seed, subcommand)`` as their seed, with
the trial index as the stream index.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CapacityError, ContractError, SingularityError, WindowError
from .rng import MASK64, derive_seed

log = logging.getLogger("shortsums")

EXIT_USAGE, EXIT_CAPACITY, EXIT_NUMERIC = 2, 3, 4


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    master_seed: int = 0
    trials: int = 1000
    threads: int = 1
    out: str | None = None
    format: str = "csv"

    def canonical(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))

    @classmethod
    def from_header(cls, line: str) -> "ExperimentConfig":
        prefix = "# config: "
        if not line.startswith(prefix):
            raise ValueError("not a config header")
        return cls.from_json(line[len(prefix):].strip())

    @property
    def seed(self) -> int:
        """Seed of the random streams of this subcommand."""
        return derive_seed(self.master_seed, self.subcommand)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(float(v)) for v in text.split(",") if v.strip()]


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= MASK64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0, help="master seed (u64)")
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="shortsums",
                                     description="Random multiplicative functions in short intervals.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("primes", parents=[common], help="primes in (lo, hi]")
    p.add_argument("--lo", type=int, default=0)
    p.add_argument("--hi", type=int, required=True)

    p = sub.add_parser("moment-scan", parents=[common], help="E|M(x,y;f)|^2q over a theta grid")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--theta", type=_floats, default=[0.0, 0.5, 1.0, 2.0])
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--model", choices=("steinhaus", "rademacher"), default="steinhaus")

    p = sub.add_parser("euler-check", parents=[common], help="Euler product moment vs closed form")
    p.add_argument("--p-lo", type=float, required=True)
    p.add_argument("--p-hi", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--model", choices=("steinhaus", "rademacher"), default="steinhaus")
    p.add_argument("--form", choices=("euler", "two_point"), default="euler")

    p = sub.add_parser("parseval", parents=[common], help="both sides of Parseval's identity")
    p.add_argument("--n-coeffs", type=int, required=True)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--source", choices=("steinhaus", "rademacher", "ones"), default="steinhaus")

    for name, helptext in (("char-avg", "character average of |M|^2q"),
                           ("char-model-gap", "character average vs Steinhaus model")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--x", type=int, required=True)
        p.add_argument("--y", type=int, required=True)
        p.add_argument("--q", type=float, default=1.0)

    p = sub.add_parser("ballot", parents=[common], help="random walk below a + 2 log j + c")
    p.add_argument("--a", type=_floats, required=True)
    p.add_argument("--n", type=_ints, required=True)
    p.add_argument("--c", type=float, default=0.0)

    p = sub.add_parser("threshold-scan", parents=[common], help="G(x, theta, q) over a grid")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--theta", type=_floats, default=[0.0, 0.25, 0.5, 1.0, 2.0])
    p.add_argument("--q", type=_floats, default=[0.5])
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    skip = {"subcommand", "seed", "trials", "threads", "out", "format", "verbose"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return ExperimentConfig(args.subcommand, params, args.seed, args.trials, args.threads,
                            args.out, args.format)


# ---------------------------------------------------------------------------
# Subcommands: each returns (columns, rows)


def _primes(cfg):
    from .sieve import primes_between

    p = cfg.params
    return ["p"], [[int(v)] for v in primes_between(p["lo"], p["hi"])]


def _moment_scan(cfg):
    from .interval_sums import theta_scan

    p = cfg.params
    rows = theta_scan(p["x"], p["theta"], p["q"], p["model"], cfg.trials, cfg.seed, cfg.threads)
    cols = ["theta", "y", "q", "trials", "mean", "stderr", "A", "ratio", "G", "seed"]
    return cols, [[r.as_dict(cfg.seed)[c] for c in cols] for r in rows]


def _euler_check(cfg):
    from .euler import mc_expected_sq

    p = cfg.params
    est = mc_expected_sq(p["p_lo"], p["p_hi"], p["sigma"], p["t"], p["model"], cfg.trials,
                         cfg.seed, form=p["form"], threads=cfg.threads)
    cols = ["p_lo", "p_hi", "sigma", "t", "model", "trials", "mc_mean", "mc_stderr",
            "closed_form", "z_score"]
    return cols, [[p["p_lo"], p["p_hi"], p["sigma"], p["t"], p["model"], cfg.trials, est.mean,
                   est.stderr, est.normalization, est.z_score(est.normalization)]]


def _parseval(cfg):
    from .interval_sums import IntervalSpec, f_values
    from .model import PrimeValueStream
    from .parseval import parseval_check

    p = cfg.params
    n = p["n_coeffs"]
    if n < 0:
        raise ContractError("n_coeffs must be >= 0")
    if p["source"] == "ones" or n == 0:
        coeffs = np.ones(n, dtype=complex)
    else:
        coeffs = f_values(IntervalSpec(0, n), PrimeValueStream(p["source"], cfg.seed, 0))
    lhs, rhs, gap = parseval_check(coeffs, p["sigma"], p["window"])
    return ["n_coeffs", "sigma", "lhs", "rhs", "gap"], [[n, p["sigma"], lhs, rhs, gap]]


def _char_avg(cfg):
    from .characters import build_character_table, char_avg_abs_power

    p = cfg.params
    t0 = time.perf_counter()
    res = char_avg_abs_power(build_character_table(p["r"]), p["x"], p["y"], p["q"])
    ms = (time.perf_counter() - t0) * 1e3
    return (["r", "x", "y", "q", "average", "L", "bound", "runtime_ms"],
            [[res.r, res.x, res.y, res.q, res.average, res.L, res.bound, round(ms, 3)]])


def _char_model_gap(cfg):
    from .characters import build_character_table, compare_to_steinhaus

    p = cfg.params
    char, est, gap = compare_to_steinhaus(build_character_table(p["r"]), p["x"], p["y"], p["q"],
                                          cfg.trials, cfg.seed, cfg.threads)
    return (["r", "x", "y", "q", "char_avg", "model_mean", "model_stderr", "gap"],
            [[p["r"], p["x"], p["y"], p["q"], char, est.mean, est.stderr, gap]])


def _ballot(cfg):
    from .ballot import scaling_table

    p = cfg.params
    tab = scaling_table(p["a"], p["n"], cfg.trials, cfg.seed, c=p["c"], threads=cfg.threads)
    return (["a", "n", "c", "trials", "p_hat", "stderr", "normalized"],
            [[r.a, r.n, p["c"], cfg.trials, r.p_hat, r.stderr, r.normalized] for r in tab.rows])


def _threshold_scan(cfg):
    from .interval_sums import threshold_G

    p = cfg.params
    x = p["x"]
    if x <= math.e:
        raise ContractError("need x > e")
    rows = []
    for q in p["q"]:
        for theta in p["theta"]:
            y = x / math.log(x) ** theta
            rows.append([x, theta, q, y, threshold_G(x, theta, q)])
    return ["x", "theta", "q", "y", "G"], rows


COMMANDS = {
    "primes": _primes,
    "moment-scan": _moment_scan,
    "euler-check": _euler_check,
    "parseval": _parseval,
    "char-avg": _char_avg,
    "char-model-gap": _char_model_gap,
    "ballot": _ballot,
    "threshold-scan": _threshold_scan,
}


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return v


def render(cfg: ExperimentConfig, columns, rows) -> str:
    if cfg.format == "json":
        clean = [[_json_value(v) for v in row] for row in rows]
        return json.dumps({"config": json.loads(cfg.canonical()), "columns": columns,
                           "rows": clean}, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# config: {cfg.canonical()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: ExperimentConfig) -> str:
    """Execute a validated config and return the rendered output."""
    if cfg.trials < 2 and cfg.subcommand not in ("primes", "char-avg", "parseval", "threshold-scan"):
        raise ContractError("need --trials >= 2")
    if cfg.threads < 1:
        raise ContractError("need --threads >= 1")
    columns, rows = COMMANDS[cfg.subcommand](cfg)
    return render(cfg, columns, rows)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = config_from_args(args)
    try:
        text = run(cfg)
    except (ContractError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (SingularityError, WindowError, ArithmeticError) as exc:
        print(f"numerical: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
