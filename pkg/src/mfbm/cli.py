"""Command-line entry point.

    mfbm covariance     fBm increment covariance matrix and its summary
    mfbm entropy-sweep  grid relative entropy along an alpha grid
    mfbm separate       separating-set experiment and SAA verdict
    mfbm restricted     two-date restricted market checks

Exit codes: 0 on success, 2 on invalid configuration, 1 on numerical
failure.  Errors go to stderr as ``<ErrorName>: <message>``.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import export
from .errors import DomainError, NumericError, ValidationError
from .fbm import fbm_increment_covariance
from .market import entropy_sweep
from .measures import check_alpha_grid
from .numerics import SeededStream, symmetric_eigenvalues
from .params import ModelParams
from .restricted import restricted_market_report
from .separation import saa_experiment

DEFAULT_SEED = 42
SEED_ENV = "MFBM_SEED"

_DEFAULTS = {
    "covariance": dict(hurst=0.8, n=8),
    "entropy-sweep": dict(hurst=0.8, mu=0.0, sigma=1.0, n=8, alphas="1:32:geometric"),
    "separate": dict(
        hurst=0.8, mu=0.0, sigma=1.0, n=16, alphas="1:32:geometric", samples=10_000, threshold="auto"
    ),
    "restricted": dict(sigma=1.0, alphas="10,30,100", samples=1_000_000, delta=0.1),
}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    hurst: float | None = None
    mu: float | None = None
    sigma: float | None = None
    n: int | None = None
    alphas: tuple[float, ...] | None = None
    samples: int | None = None
    seed: int | None = None
    threshold: float | str | None = None
    delta: float | None = None
    format: str = "csv"
    out: str | None = None

    def echo(self) -> dict:
        """Everything that determines the output body (the output path does not)."""
        d = dataclasses.asdict(self)
        d.pop("out")
        if d["alphas"] is not None:
            d["alphas"] = list(d["alphas"])
        return d

    def to_argv(self) -> list[str]:
        argv = [self.command]
        flags = dict(hurst="--hurst", mu="--mu", sigma="--sigma", n="--n", samples="--samples",
                     seed="--seed", threshold="--threshold", delta="--delta")
        for name, flag in flags.items():
            v = getattr(self, name)
            if v is not None:
                argv += [flag, repr(v) if isinstance(v, float) else str(v)]
        if self.alphas is not None:
            argv += ["--alphas", ",".join(repr(a) for a in self.alphas)]
        argv += ["--format", self.format]
        if self.out is not None:
            argv += ["--out", self.out]
        return argv


def parse_alphas(text: str) -> tuple[float, ...]:
    """``"1,2,4"``, ``"a:b:geometric"`` (doubling from a up to b) or ``"a:b:k"`` (k log-spaced points)."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            lo, hi = float(parts[0]), float(parts[1])
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise DomainError(f"alpha range {lo}:{hi} must satisfy 0 < a <= b")
            if parts[2] == "geometric":
                out = []
                a = lo
                while a <= hi * (1 + 1e-12):
                    out.append(a)
                    a *= 2.0
                return tuple(out)
            k = int(parts[2])
            if k < 1:
                raise ValueError
            return tuple(float(a) for a in np.geomspace(lo, hi, k))
        return tuple(float(a) for a in text.split(","))
    except DomainError:
        raise
    except ValueError:
        raise DomainError(f"cannot parse alpha grid {text!r}") from None


def parse_threshold(text: str) -> float | str:
    if text in ("auto", "midpoint"):
        return text
    try:
        return float(text)
    except ValueError:
        raise DomainError(f"threshold must be a float, 'auto' or 'midpoint', got {text!r}") from None


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        seed = int(raw, 10)
    except ValueError:
        raise DomainError(f"{SEED_ENV} must be a decimal integer, got {raw!r}") from None
    if not 0 <= seed < 2**64:
        raise DomainError(f"{SEED_ENV} must fit in 64 unsigned bits")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfbm", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, defaults in _DEFAULTS.items():
        p = sub.add_parser(name)
        if "hurst" in defaults:
            p.add_argument("--hurst", type=float)
        if "mu" in defaults:
            p.add_argument("--mu", type=float)
        if "sigma" in defaults:
            p.add_argument("--sigma", type=float)
        if "n" in defaults:
            p.add_argument("--n", type=int)
        if "alphas" in defaults:
            p.add_argument("--alphas", help="comma list, a:b:geometric or a:b:count")
        if "samples" in defaults:
            p.add_argument("--samples", type=int)
        if name in ("separate", "restricted"):
            p.add_argument("--seed", type=int, help=f"default: ${SEED_ENV} or {DEFAULT_SEED}")
        if "threshold" in defaults:
            p.add_argument("--threshold", help="float, 'auto' (= 0) or 'midpoint'")
        if "delta" in defaults:
            p.add_argument("--delta", type=float)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--defaults", action="store_true", help="run with the built-in defaults")
        p.set_defaults(**{k: None for k in defaults})
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    defaults = _DEFAULTS[args.command]
    values = {}
    for key, default in defaults.items():
        v = getattr(args, key, None)
        values[key] = default if v is None else v
    if "alphas" in values:
        values["alphas"] = parse_alphas(str(values["alphas"]))
    if "threshold" in values:
        values["threshold"] = parse_threshold(str(values["threshold"]))
    seed = None
    if args.command in ("separate", "restricted"):
        seed = args.seed if args.seed is not None else default_seed()
        if not 0 <= seed < 2**64:
            raise DomainError("seed must fit in 64 unsigned bits")
    return RunConfig(command=args.command, seed=seed, format=args.format, out=args.out, **values)


def validate(cfg: RunConfig) -> None:
    """Check a configuration against the command's preconditions, before any computation."""
    if cfg.command == "covariance":
        if not 0.0 < cfg.hurst < 1.0:
            raise DomainError(f"--hurst must lie in (0, 1), got {cfg.hurst}")
        if cfg.n < 1:
            raise DomainError(f"--n must be >= 1, got {cfg.n}")
        return
    if cfg.alphas is not None:
        check_alpha_grid(cfg.alphas, min_length=3 if cfg.command == "separate" else 1)
    if cfg.command in ("entropy-sweep", "separate"):
        ModelParams(hurst=cfg.hurst, alpha=cfg.alphas[0], mu=cfg.mu, sigma=cfg.sigma)
        if cfg.n < 1:
            raise DomainError(f"--n must be >= 1, got {cfg.n}")
        if cfg.n == 1 and cfg.mu != 0.0:
            raise DomainError("--n 1 is only supported with --mu 0")
    if cfg.command == "separate" and cfg.samples < 100:
        raise DomainError(f"--samples must be >= 100, got {cfg.samples}")
    if cfg.command == "restricted":
        if not cfg.sigma > 0.0:
            raise DomainError(f"--sigma must be > 0, got {cfg.sigma}")
        if not 0.0 < cfg.delta < 1.0:
            raise DomainError(f"--delta must lie in (0, 1), got {cfg.delta}")
        if cfg.samples < 10_000:
            raise DomainError(f"--samples must be >= 10000, got {cfg.samples}")


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run(cfg: RunConfig) -> str:
    """Execute a validated configuration and return the file contents."""
    echo = cfg.echo()
    if cfg.command == "covariance":
        matrix = fbm_increment_covariance(cfg.hurst, cfg.n).matrix
        eig = symmetric_eigenvalues(matrix)
        stats = dict(trace=float(np.trace(matrix)), total=float(matrix.sum()),
                     lambda_min=float(eig[0]), lambda_max=float(eig[-1]))
        if cfg.format == "csv":
            return export.covariance_csv(matrix, stats, echo)
        return export.dumps_json(dict(config=echo, matrix=matrix, stats=stats, timestamp=_timestamp()))

    if cfg.command == "entropy-sweep":
        rows = entropy_sweep(cfg.hurst, cfg.mu, cfg.sigma, cfg.n, cfg.alphas)
        if cfg.format == "csv":
            return export.sweep_csv(rows, echo)
        return export.dumps_json(dict(config=echo, rows=rows, timestamp=_timestamp()))

    if cfg.command == "separate":
        report = saa_experiment(cfg.hurst, cfg.mu, cfg.sigma, cfg.n, cfg.alphas, cfg.samples,
                                SeededStream(cfg.seed), cfg.threshold)
        if cfg.format == "csv":
            return export.separation_csv(report, echo)
        return export.dumps_json(dict(
            config=echo,
            seed=cfg.seed,
            rows=report.rows,
            verdict=report.verdict.verdict,
            evidence=report.verdict.evidence,
            saa_conclusion=report.saa_conclusion,
            timestamp=_timestamp(),
        ))

    if cfg.command == "restricted":
        report = restricted_market_report(cfg.sigma, cfg.alphas, cfg.delta, cfg.samples, SeededStream(cfg.seed))
        if cfg.format == "csv":
            return export.restricted_csv(report, echo)
        body = export.to_jsonable(report)
        body.update(config=echo, seed=cfg.seed, timestamp=_timestamp())
        return export.dumps_json(body)

    raise DomainError(f"unknown command {cfg.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        validate(cfg)
        text = run(cfg)
    except ValidationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
