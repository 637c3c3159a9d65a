"""Command-line experiment runner.

    python -m ebits <command> [--p P] [--k K] [--trials N] [--batch-size B]
                              [--epsilon EPS] [--seed S] [--format json|csv]
                              [--out PATH] [--workers W]

Stochastic commands split their trials into fixed blocks (see
:mod:`ebits.seeding`) and merge block results in block order, so the report
is identical for any ``--workers``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import concentration as conc
from .protocols import (
    BELL_NAMES,
    PairSpec,
    QubitState,
    filter_branches,
    filter_pass_count,
    make_psi_alpha,
    otp_decrypt,
    otp_encrypt,
    otp_keygen,
    teleport,
    to_bits,
)
from .schmidt import Bipartition, binary_entropy, entanglement_of, schmidt_spectrum
from .seeding import SEED_MAX, block_rng, blocks
from .state import fidelity

log = logging.getLogger("ebits")

COMMANDS = ("entropy", "teleport", "filter", "otp", "concentrate", "yield-curve", "typical-dim")
SAMPLE_MESSAGE = "1001011101110001010100010"
# Largest k sampled through explicit state vectors by `concentrate`.
EXPLICIT_SAMPLING_MAX_K = 10


@dataclass
class RunConfig:
    command: str
    p: float = 0.75
    k: int = 4
    trials: int = 10000
    batch_size: int = 64
    epsilon: float = 0.01
    seed: int = 0
    format: str = "json"
    out: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"--p must be in (0, 1], got {self.p}")
        if self.k < 1:
            raise ValueError(f"--k must be >= 1, got {self.k}")
        if self.trials < 1:
            raise ValueError(f"--trials must be >= 1, got {self.trials}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"--epsilon must be in (0, 1), got {self.epsilon}")
        if not 0 <= self.seed <= SEED_MAX:
            raise ValueError(f"--seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"--format must be json or csv, got {self.format!r}")
        if self.command == "filter" and self.p < 0.5:
            raise ValueError(f"filter needs p >= 0.5, got {self.p}")
        if self.command == "concentrate" and (self.batch_size < self.k or self.batch_size % self.k):
            raise ValueError(f"--batch-size must be a positive multiple of --k, got {self.batch_size}")
        if self.command == "otp" and self.trials < len(SAMPLE_MESSAGE):
            raise ValueError(f"otp needs --trials >= {len(SAMPLE_MESSAGE)} to key the sample message")


@dataclass
class Metric:
    name: str
    value: float
    stderr: float | None = None
    reference: float | None = None


@dataclass
class Report:
    config: RunConfig
    results: list[Metric] = field(default_factory=list)
    references: dict[str, float] = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    def add(self, name, value, stderr=None, reference=None):
        self.results.append(Metric(name, float(value), stderr, reference))


def _binomial_stderr(successes: int, n: int) -> float:
    f = successes / n
    return math.sqrt(f * (1 - f) / n)


def _map_blocks(cfg: RunConfig, fn: Callable, workers: int) -> list:
    """Run ``fn(rng, n)`` on each trial block; results come back in block order."""
    jobs = blocks(cfg.trials)

    def one(job):
        b, n = job
        return fn(block_rng(cfg.seed, b), n)

    if workers <= 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, jobs))


# ---------------------------------------------------------------------------
# Commands


def _entropy(cfg, report, workers):
    state = make_psi_alpha(PairSpec(cfg.p))
    cut = Bipartition((0,), (1,))
    for i, w in enumerate(schmidt_spectrum(state, cut).weights):
        report.add(f"schmidt_weight_{i}", w)
    report.add("entropy_of_entanglement", entanglement_of(state, cut), reference=binary_entropy(cfg.p))


def _teleport(cfg, report, workers):
    def block(rng, n):
        counts = dict.fromkeys(BELL_NAMES, 0)
        worst = 1.0
        for _ in range(n):
            q = QubitState.random(rng)
            t = teleport(q, rng)
            counts[t.outcome] += 1
            worst = min(worst, fidelity(t.alice_final, q.as_state("Alice")))
        return counts, worst

    parts = _map_blocks(cfg, block, workers)
    for name in BELL_NAMES:
        c = sum(p[0][name] for p in parts)
        report.add(f"freq_{name}", c / cfg.trials, _binomial_stderr(c, cfg.trials), 0.25)
    report.add("min_fidelity", min(p[1] for p in parts), reference=1.0)


def _filter(cfg, report, workers):
    spec = PairSpec(cfg.p)
    br = filter_branches(spec)
    passes = sum(_map_blocks(cfg, lambda rng, n: filter_pass_count(spec, None, n, rng), workers))
    report.add("pass_rate", passes / cfg.trials, _binomial_stderr(passes, cfg.trials), 2 * (1 - cfg.p))
    report.add("pass_probability", br.pass_prob, reference=2 * (1 - cfg.p))
    report.add("passed_state_entanglement", entanglement_of(br.passed), reference=1.0)
    report.add("expected_output_entanglement", br.expected_entanglement(), reference=spec.entropy)


def _otp(cfg, report, workers):
    def block(rng, n):
        a, b = otp_keygen(n, "spin-flip", rng)
        return a, b

    parts = _map_blocks(cfg, block, workers)
    alice = np.concatenate([p[0] for p in parts])
    bob = np.concatenate([p[1] for p in parts])
    ones = int(alice.sum())
    report.add("key_agreement", float(np.mean(alice == bob)), reference=1.0)
    report.add("bit_bias", ones / cfg.trials, _binomial_stderr(ones, cfg.trials), 0.5)
    m = len(SAMPLE_MESSAGE)
    cipher = otp_encrypt(SAMPLE_MESSAGE, alice[:m])
    ok = np.array_equal(otp_decrypt(cipher, bob[:m]), to_bits(SAMPLE_MESSAGE))
    report.add("message_roundtrip", float(ok), reference=1.0)


def _concentrate(cfg, report, workers):
    spec = conc.EnsembleSpec.of(cfg.k, cfg.p)
    dist = conc.outcome_distribution(spec)
    if cfg.k <= EXPLICIT_SAMPLING_MAX_K:
        counts = sum(_map_blocks(cfg, lambda rng, n: conc.sample_collective_z(spec, n, rng), workers))
    else:
        cdf = np.cumsum(dist.probabilities)

        def block(rng, n):
            idx = np.minimum(np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right"), cfg.k)
            return np.bincount(idx, minlength=cfg.k + 1)

        counts = sum(_map_blocks(cfg, block, workers))
    for e in dist.entries:
        c = int(counts[e.j])
        report.add(f"freq_j={e.j}", c / cfg.trials, _binomial_stderr(c, cfg.trials), e.probability)
    report.add("exact_entropy_rate", conc.exact_entropy_rate(spec), reference=spec.pair.entropy)

    parts = _map_blocks(cfg, lambda rng, n: conc.simulate_yield(spec, cfg.batch_size, n, rng), workers)
    y = conc.merge_reports(parts)
    report.add("mean_rate", y.mean_rate, y.stderr, conc.batched_yield_rate(spec, cfg.batch_size))


def _yield_curve(cfg, report, workers):
    k = 2
    while k <= cfg.k:
        spec = conc.EnsembleSpec.of(k, cfg.p)
        report.add(f"exact_entropy_rate@k={k}", conc.exact_entropy_rate(spec), reference=spec.pair.entropy)
        k *= 2


def _typical_dim(cfg, report, workers):
    spec = conc.EnsembleSpec.of(cfg.k, cfg.p)
    log_dim = conc.typical_subspace_log_dim(spec, cfg.epsilon)
    report.add("epsilon", cfg.epsilon)
    report.add("log2_dim", log_dim)
    report.add("log2_dim_per_pair", log_dim / cfg.k, reference=spec.pair.entropy)


_DISPATCH = {
    "entropy": _entropy,
    "teleport": _teleport,
    "filter": _filter,
    "otp": _otp,
    "concentrate": _concentrate,
    "yield-curve": _yield_curve,
    "typical-dim": _typical_dim,
}


def run(config: RunConfig, workers: int = 1) -> Report:
    config.validate()
    start = time.perf_counter()
    report = Report(config)
    report.references["entropy_of_entanglement"] = binary_entropy(config.p)
    _DISPATCH[config.command](config, report, workers)
    report.elapsed_seconds = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Output


def _fmt(x) -> str:
    if x is None or not math.isfinite(x):
        return "null"
    s = format(float(x), ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _json(obj) -> str:
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, list):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    if isinstance(obj, float):
        return _fmt(obj)
    return json.dumps(obj)


def report_dict(report: Report, timing: bool = False) -> dict:
    """Report as an ordered dict: command, config, results, references[, elapsed_seconds]."""
    d = {
        "command": report.config.command,
        "config": asdict(report.config),
        "results": [asdict(m) for m in report.results],
        "references": dict(report.references),
    }
    if timing:
        d["elapsed_seconds"] = report.elapsed_seconds
    return d


def emit(report: Report, fmt: str = "json", out: str | Path | None = None, timing: bool = False) -> bytes:
    """Render the report; also write it to ``out`` when given."""
    if fmt == "json":
        data = (_json(report_dict(report, timing)) + "\n").encode()
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value", "stderr", "reference"])
        for m in report.results:
            w.writerow([m.name, _fmt(m.value), "" if m.stderr is None else _fmt(m.stderr),
                        "" if m.reference is None else _fmt(m.reference)])
        data = buf.getvalue().encode()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out is not None:
        Path(out).write_bytes(data)
    return data


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"ebits: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--p", type=float, default=0.75, help="weight of |up up> in the pair (alpha squared)")
    common.add_argument("--k", type=int, default=4, help="pairs per collective measurement (max k for yield-curve)")
    common.add_argument("--trials", type=int, default=10000)
    common.add_argument("--batch-size", type=int, default=64, help="pairs per trimming batch")
    common.add_argument("--epsilon", type=float, default=0.01)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None)
    common.add_argument("--workers", type=int, default=1, help="threads for trial blocks; output does not depend on it")
    common.add_argument("--timing", action="store_true", help="include elapsed wall time in json output")

    parser = _Parser(prog="ebits", description="Entanglement manipulation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(args.command, args.p, args.k, args.trials, args.batch_size, args.epsilon, args.seed, args.format, args.out)
    try:
        report = run(cfg, workers=max(1, args.workers))
    except ValueError as exc:
        print(f"ebits: error: {exc}", file=sys.stderr)
        return 2
    try:
        data = emit(report, cfg.format, cfg.out, timing=args.timing)
    except OSError as exc:
        print(f"ebits: error: cannot write report: {exc}", file=sys.stderr)
        return 1
    if cfg.out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    log.info("%s finished in %.3f s", cfg.command, report.elapsed_seconds)
    return 0
