"""Command-line front-end: data generation, codec benchmarks, reconciliation.

Subcommands
-----------
gen-source     draw correlated Gaussian sample files (x, y = x + noise)
sw-bench       Monte-Carlo frame success of the parity-only codec on a BER grid
cascade-bench  disclosure and completeness of the interactive protocol
reconcile      full sliced pipeline from sample files to a report

Every flag can also come from a JSON config file (--config); explicit flags
win over the file, which wins over built-in defaults.  All randomness is
driven by --seed, so identical configurations reproduce outputs bit for bit.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from .cascade import CascadeConfig, cascade_run
from .interleave import build_interleaver
from .ledger import (
    ReconcileConfig,
    StrategyThresholds,
    reconcile_all,
    write_report_csv,
    write_report_json,
)
from .puncture import RatePolicy, binary_entropy, build_pattern_from_count, rate_for_ber
from .rng import PortableRng
from .siso import DecoderConfig, turbo_decode
from .slicing import SliceConfig, build_slice_set
from .trellis import TrellisSpec, build_transition_table, encode_block

_STREAM_X = 0xA1
_STREAM_NOISE = 0xA2
_STREAM_FRAME = 0xB0


@dataclass(frozen=True)
class RunConfig:
    """Flattened knob set shared by the subcommands."""

    mode: str
    samples: int = 10000
    block_len: int = 10000
    noise_sigma: float = 0.1
    bers: tuple[float, ...] = (0.0638,)
    trials: int = 10
    seed: int = 1
    beta: float = 1.35
    min_rate: float = 0.02
    iterations: int = 18
    llr_clip: float = 25.0
    weight_punctured: float = 0.9
    weight_received: float = 1.0
    threshold_hi: float = 0.15
    threshold_lo: float = 0.008
    cascade_passes: int = 8
    cascade_factor: float = 0.73
    num_slices: int = 5
    boundaries: tuple[float, ...] | None = None  # default: equiprobable cells
    feedback_poly: int = 0o23
    feedforward_poly: int = 0o35
    rate_override: float = 0.0  # 0 disables; else fixes the total parity rate
    in_x: str = ""
    in_y: str = ""
    out_x: str = "x.csv"
    out_y: str = "y.csv"
    out_csv: str = "report.csv"
    out_json: str = "report.json"

    def __post_init__(self):
        if self.samples < 1 or self.block_len < 1:
            raise ValueError("sizes must be >= 1")
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")

    def rate_policy(self) -> RatePolicy:
        return RatePolicy(beta=self.beta, min_rate=self.min_rate)

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(
            iterations=self.iterations,
            llr_clip=self.llr_clip,
            extrinsic_weight_punctured=self.weight_punctured,
            extrinsic_weight_received=self.weight_received,
        )

    def cascade_config(self) -> CascadeConfig:
        return CascadeConfig(
            initial_block_factor=self.cascade_factor,
            passes=self.cascade_passes,
        )

    def trellis_spec(self) -> TrellisSpec:
        return TrellisSpec(feedback_poly=self.feedback_poly,
                           feedforward_poly=self.feedforward_poly)

    def slice_config(self) -> SliceConfig:
        return SliceConfig(m=self.num_slices, boundaries=self.boundaries,
                           noise_sigma=self.noise_sigma)


def write_samples(path, values: np.ndarray) -> None:
    with open(path, "w") as fh:
        for v in values:
            fh.write(f"{v:.17g}\n")


def load_samples(path) -> np.ndarray:
    """One float per line; raises ValueError on anything else."""
    values = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ValueError(f"{path}:{ln}: not a number: {line!r}") from None
    if not values:
        raise ValueError(f"{path}: no samples found")
    return np.array(values)


def gen_source(l: int, noise_sigma: float, seed: int, out_x, out_y) -> tuple[np.ndarray, np.ndarray]:
    """Write l correlated Gaussian samples to two CSV files and return them."""
    rng = PortableRng(seed)
    x = rng.derive(_STREAM_X).gaussian(l)
    y = x + noise_sigma * rng.derive(_STREAM_NOISE).gaussian(l)
    write_samples(out_x, x)
    write_samples(out_y, y)
    return x, y


def sw_frame_trial(n: int, e: float, total_rate: float, frame_rng: PortableRng,
                   table, config: DecoderConfig) -> tuple[bool, int, bool]:
    """One Monte-Carlo frame: random block through a BSC, then decode."""
    x = frame_rng.derive(1).bernoulli(n, 0.5)
    flips = frame_rng.derive(2).bernoulli(n, e)
    y = x ^ flips
    per_enc = int(np.floor(0.5 * total_rate * n + 0.5))
    pattern1 = build_pattern_from_count(n, per_enc, 0)
    pattern2 = build_pattern_from_count(n, per_enc, 0)
    perm = build_interleaver(n, pattern1, pattern2, frame_rng.derive(3).seed)
    par1, _ = encode_block(x, table.spec)
    par2, _ = encode_block(x[perm.forward], table.spec)
    x_hat, converged, iters = turbo_decode(
        y, e, par1[pattern1.mask == 1], pattern1, par2[pattern2.mask == 1], pattern2,
        perm, table, config,
    )
    return bool(np.array_equal(x_hat, x)), iters, converged


def sw_bench(cfg: RunConfig) -> list[dict]:
    """Frame-success benchmark over the BER grid; writes a headered CSV."""
    table = build_transition_table(cfg.trellis_spec())
    decoder = cfg.decoder_config()
    policy = cfg.rate_policy()
    rows = []
    for e in sorted(cfg.bers):
        rate = cfg.rate_override if cfg.rate_override > 0 else rate_for_ber(e, policy)
        ok = 0
        iters_total = 0
        conv_total = 0
        base = PortableRng(cfg.seed).derive(_STREAM_FRAME)
        for t in range(cfg.trials):
            success, iters, converged = sw_frame_trial(
                cfg.block_len, e, rate, base.derive(t), table, decoder
            )
            ok += success
            iters_total += iters
            conv_total += converged
        rows.append({
            "e": e,
            "rate": rate,
            "success_fraction": ok / cfg.trials,
            "mean_iterations": iters_total / cfg.trials,
            "converged_fraction": conv_total / cfg.trials,
        })
    _write_csv(cfg.out_csv, rows)
    return rows


def cascade_bench(cfg: RunConfig) -> list[dict]:
    """Disclosure benchmark of the interactive protocol over the BER grid."""
    ccfg = cfg.cascade_config()
    rows = []
    for e in sorted(cfg.bers):
        base = PortableRng(cfg.seed).derive(_STREAM_FRAME)
        per_party = 0
        clean = 0
        for t in range(cfg.trials):
            rng = base.derive(t)
            alice = rng.derive(1).bernoulli(cfg.samples, 0.5)
            bob = alice ^ rng.derive(2).bernoulli(cfg.samples, e)
            corrected, transcript = cascade_run(alice, bob, e, ccfg, seed=rng.derive(3).seed)
            per_party += transcript.parities_alice
            clean += int(np.array_equal(corrected, alice))
        mean_d = per_party / cfg.trials
        limit = binary_entropy(e) * cfg.samples
        rows.append({
            "e": e,
            "mean_parities_per_party": mean_d,
            "disclosure_fraction": mean_d / cfg.samples,
            "xi_measured": mean_d / limit - 1.0 if limit > 0 else float("inf"),
            "success_fraction": clean / cfg.trials,
        })
    _write_csv(cfg.out_csv, rows)
    return rows


def reconcile_cmd(cfg: RunConfig) -> int:
    """End-to-end pipeline from sample files; 0 exit iff every slice is exact."""
    x = load_samples(cfg.in_x)
    y = load_samples(cfg.in_y)
    slice_set = build_slice_set(x, y, cfg.slice_config())
    rcfg = ReconcileConfig(
        thresholds=StrategyThresholds(hi=cfg.threshold_hi, lo=cfg.threshold_lo),
        rate_policy=cfg.rate_policy(),
        decoder=cfg.decoder_config(),
        cascade=cfg.cascade_config(),
        trellis=cfg.trellis_spec(),
        seed=cfg.seed,
    )
    report = reconcile_all(slice_set, rcfg)
    write_report_json(report, cfg.out_json)
    write_report_csv(report, cfg.out_csv)
    exact = all(o.residual_errors == 0 or o.fell_back for o in report.outcomes)
    print(
        f"reconciled {report.samples} samples x {len(report.outcomes)} slices: "
        f"net {report.net_bits / report.samples:.4f} bits/sample "
        f"({report.elapsed_s:.1f}s)"
    )
    return 0 if exact else 1


def _write_csv(path, rows: list[dict]) -> None:
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(rows[0].keys())
        for row in rows:
            w.writerow(f"{v:.6g}" if isinstance(v, float) else v for v in row.values())


def _parse_bers(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slicerec", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="JSON file of defaults for any flag (keys = flag names)")
    sub = p.add_subparsers(dest="mode", required=True)

    def add(name, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        return sp

    g = add("gen-source", help="generate correlated Gaussian sample files")
    g.add_argument("--samples", type=int)
    g.add_argument("--noise-sigma", type=float)
    g.add_argument("--out-x")
    g.add_argument("--out-y")

    b = add("sw-bench", help="frame-success benchmark of the parity-only codec")
    b.add_argument("--bers", type=_parse_bers, help="comma-separated BER grid")
    b.add_argument("--block-len", type=int)
    b.add_argument("--trials", type=int, help="frames per grid point")
    b.add_argument("--beta", type=float)
    b.add_argument("--min-rate", type=float)
    b.add_argument("--iterations", type=int)
    b.add_argument("--llr-clip", type=float)
    b.add_argument("--weight-punctured", type=float)
    b.add_argument("--weight-received", type=float)
    b.add_argument("--rate-override", type=float)
    b.add_argument("--out-csv")

    c = add("cascade-bench", help="disclosure benchmark of the interactive protocol")
    c.add_argument("--bers", type=_parse_bers)
    c.add_argument("--samples", type=int)
    c.add_argument("--trials", type=int)
    c.add_argument("--cascade-passes", type=int)
    c.add_argument("--cascade-factor", type=float)
    c.add_argument("--out-csv")

    r = add("reconcile", help="full sliced reconciliation from sample files")
    r.add_argument("--in-x", help="Alice's samples, one float per line")
    r.add_argument("--in-y", help="Bob's samples")
    r.add_argument("--noise-sigma", type=float)
    r.add_argument("--num-slices", type=int)
    r.add_argument("--beta", type=float)
    r.add_argument("--min-rate", type=float)
    r.add_argument("--iterations", type=int)
    r.add_argument("--threshold-hi", type=float)
    r.add_argument("--threshold-lo", type=float)
    r.add_argument("--cascade-passes", type=int)
    r.add_argument("--cascade-factor", type=float)
    r.add_argument("--out-csv")
    r.add_argument("--out-json")
    return p


def _merge_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {"mode": args.mode}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        for k, v in loaded.items():
            key = k.replace("-", "_")
            if key == "bers" and isinstance(v, (list, tuple)):
                v = tuple(float(t) for t in v)
            merged[key] = v
    for k, v in vars(args).items():
        if k in ("mode", "config") or v is None:
            continue
        merged[k] = v
    return RunConfig(**merged)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        if cfg.mode == "gen-source":
            t0 = time.perf_counter()
            gen_source(cfg.samples, cfg.noise_sigma, cfg.seed, cfg.out_x, cfg.out_y)
            print(f"wrote {cfg.samples} samples to {cfg.out_x}, {cfg.out_y} "
                  f"({time.perf_counter() - t0:.1f}s)")
            return 0
        if cfg.mode == "sw-bench":
            rows = sw_bench(cfg)
            for row in rows:
                print(f"e={row['e']:.4g} rate={row['rate']:.4g} "
                      f"success={row['success_fraction']:.3f} "
                      f"iters={row['mean_iterations']:.1f}")
            return 0
        if cfg.mode == "cascade-bench":
            rows = cascade_bench(cfg)
            for row in rows:
                print(f"e={row['e']:.4g} d/l={row['disclosure_fraction']:.5f} "
                      f"xi={row['xi_measured']:.3f} success={row['success_fraction']:.3f}")
            return 0
        if cfg.mode == "reconcile":
            return reconcile_cmd(cfg)
        raise ValueError(f"unknown mode {cfg.mode!r}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
