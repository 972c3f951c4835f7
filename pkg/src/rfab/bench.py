"""Measurement suite: wall times, operation tallies, and artifact sizes
for all seven algorithms over a grid of policy/attribute sizes.

Policies are AND-chains of N distinct attributes, so fresh ciphertexts
have n1 = N rows and one reuse slot. Revocation rows run on the composed
policy (old chain AND a disjoint chain of the same length), so their N
column records the doubled row count.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

from . import codec
from .core import decrypt_or, encrypt, keygen, setup
from .groups import OpCounter, SeededRandomSource, count_ops, default_env
from .policy import compile_policy
from .revocation import decrypt_re, delegate, revoke

CSV_COLUMNS = [
    "algorithm",
    "N",
    "tau",
    "median_ns",
    "pairings",
    "exp_g1",
    "exp_g2",
    "exp_gt",
    "mul_g1",
    "mul_g2",
    "mul_gt",
    "hashes",
    "bytes_key",
    "bytes_ct",
]

PLOT_ALGORITHMS = ["keygen", "encrypt", "decrypt_or", "revoke", "decrypt_re"]


@dataclass(frozen=True)
class BenchRecord:
    algorithm: str
    n: int
    tau: int
    median_ns: int
    ops: OpCounter
    bytes_key: int
    bytes_ct: int


def _and_chain(prefix: str, n: int) -> str:
    return " AND ".join(f"{prefix}{i}" for i in range(1, n + 1))


def _measure(fn, repetitions: int):
    """One counted warm-up call, then timed repetitions on a monotonic clock."""
    with count_ops() as ops:
        result = fn()
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter_ns()
        result = fn()
        times.append(time.perf_counter_ns() - t0)
    return result, int(statistics.median(times)), ops


def run_suite(
    grid: tuple[int, ...] = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100),
    repetitions: int = 50,
    seed: int = 0,
    csv_path: str | None = None,
) -> list[BenchRecord]:
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    env = default_env()
    rng = SeededRandomSource(seed)
    records: list[BenchRecord] = []

    for n in grid:
        attrs = [f"Attr{i}" for i in range(1, n + 1)]
        rev_attrs = [f"Rev{i}" for i in range(1, n + 1)]
        policy = compile_policy(_and_chain("Attr", n))
        policy_tilde = compile_policy(_and_chain("Rev", n))

        (pp, msk), t, ops = _measure(lambda: setup(env, rng), repetitions)
        records.append(BenchRecord("setup", n, 0, t, ops, 0, 0))

        sk, t, ops = _measure(lambda: keygen(pp, msk, attrs, rng), repetitions)
        records.append(
            BenchRecord("keygen", n, 0, t, ops, len(codec.encode(sk)), 0)
        )

        msg = env.random_gt(rng)
        (ct, state), t, ops = _measure(
            lambda: encrypt(pp, policy, msg, rng), repetitions
        )
        records.append(
            BenchRecord("encrypt", n, policy.tau, t, ops, 0, len(codec.encode(ct)))
        )

        _, t, ops = _measure(lambda: decrypt_or(pp, sk, ct), repetitions)
        records.append(
            BenchRecord(
                "decrypt_or",
                n,
                policy.tau,
                t,
                ops,
                len(codec.encode(sk)),
                len(codec.encode(ct)),
            )
        )

        (dg, _), t, ops = _measure(
            lambda: delegate(pp, state, policy_tilde, rng), repetitions
        )
        records.append(BenchRecord("delegate", n, policy_tilde.tau, t, ops, 0, 0))

        ct_rev, t, ops = _measure(lambda: revoke(pp, ct, dg, rng), repetitions)
        composed = ct_rev.policy
        records.append(
            BenchRecord(
                "revoke",
                composed.n1,
                composed.tau,
                t,
                ops,
                0,
                len(codec.encode(ct_rev)),
            )
        )

        sk_wide = keygen(pp, msk, attrs + rev_attrs, rng)
        _, t, ops = _measure(
            lambda: decrypt_re(pp, sk_wide, ct.csum, ct_rev), repetitions
        )
        records.append(
            BenchRecord(
                "decrypt_re",
                composed.n1,
                composed.tau,
                t,
                ops,
                len(codec.encode(sk_wide)),
                len(codec.encode(ct_rev)),
            )
        )

    if csv_path is not None:
        write_csv(records, csv_path)
    return records


def write_csv(records: list[BenchRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            ops = rec.ops.as_dict()
            writer.writerow(
                [
                    rec.algorithm,
                    rec.n,
                    rec.tau,
                    rec.median_ns,
                    ops["pairings"],
                    ops["exp_g1"],
                    ops["exp_g2"],
                    ops["exp_gt"],
                    ops["mul_g1"],
                    ops["mul_g2"],
                    ops["mul_gt"],
                    ops["hashes"],
                    rec.bytes_key,
                    rec.bytes_ct,
                ]
            )


def emit_plots(records: list[BenchRecord], out_dir: str) -> list[str]:
    """One time-vs-size curve per user-visible algorithm."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: list[str] = []
    for algorithm in PLOT_ALGORITHMS:
        points = sorted(
            (rec.n, rec.median_ns) for rec in records if rec.algorithm == algorithm
        )
        if not points:
            continue
        xs = [p[0] for p in points]
        ys = [p[1] / 1e6 for p in points]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(xs, ys, marker="o")
        ax.set_xlabel("policy rows (N)")
        ax.set_ylabel("median time (ms)")
        ax.set_title(algorithm)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = out / f"bench_{algorithm}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(str(path))
    return paths
