"""Command-line harness for the forecaster and the spectral experiments.

Five subcommands: train (fit/evaluate, optionally both ablation arms), gibbs
(overshoot sweep with plottable partial-sum curves), compaction (truncated
reconstruction error tables), attention (heatmap export from a checkpoint),
and theorems (randomized verification suite). Every command writes a
manifest.json recording the exact invocation, config, seed, library versions
and wall time next to its outputs, so any result can be reproduced from the
output directory alone.

Exit codes: 0 success, 1 property failure, 2 usage or config error, 3
numerical divergence. The FECAM_OUT environment variable, when set, takes
precedence over --out.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .attention import export_attention, fecam_forward
from .data import (
    FILL_POLICIES,
    RawSeries,
    chronological_split,
    fit_standardizer,
    load_csv,
    make_windows,
    series_summary,
)
from .forecaster import (
    DivergenceError,
    TrainConfig,
    ablation_compare,
    build_model,
    evaluate,
    load_model,
    persistence_report,
    save_model,
    train,
)
from .spectral import (
    GIBBS_CONSTANT,
    ORTHO,
    UNNORMALIZED,
    boundary_overshoot_compare,
    dct_forward,
    dct_inverse,
    dct_matrix,
    dct_via_even_dft,
    energy_compaction_report,
    fourier_partial_sum,
    gibbs_sweep,
    low_frequency_signal,
    pulse_wave_probe,
    pulse_wave_series,
    reconstruct_truncated,
    square_wave_probe,
    square_wave_series,
)

SPLIT_PRESETS = {"7:2:2": (7.0, 2.0, 2.0), "3:1:1": (3.0, 1.0, 1.0),
                 "conventional": (0.7, 0.1, 0.2)}


def _parse_ratios(text: str):
    if text in SPLIT_PRESETS:
        return SPLIT_PRESETS[text]
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"split must be a preset {sorted(SPLIT_PRESETS)} or a:b:c, got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_int_list(text: str) -> list[int]:
    try:
        values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValueError(f"expected a comma-separated integer list, got {text!r}") from None
    if not values:
        raise ValueError("empty integer list")
    return values


def _out_dir(args) -> Path:
    env = os.environ.get("FECAM_OUT", "").strip()
    return Path(env) if env else Path(args.out)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_manifest(out_dir: Path, args, started: float) -> None:
    config = {}
    for key, value in vars(args).items():
        if key == "func":
            continue
        config[key] = str(value) if isinstance(value, Path) else value
    _write_json(out_dir / "manifest.json", {
        "command_line": sys.argv,
        "config": config,
        "seed": getattr(args, "seed", None),
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "fecam": __version__,
        },
        "wall_time_seconds": time.perf_counter() - started,
    })


def _select_channel(series: RawSeries, channel: str | None) -> RawSeries:
    if channel is None:
        return series
    if channel not in series.channel_names:
        raise ValueError(
            f"no channel named {channel!r}; file has {series.channel_names}")
    idx = series.channel_names.index(channel)
    return RawSeries(series.timestamps, series.observations[:, idx:idx + 1], [channel])


def _prepared_windows(args, lookback: int, horizon: int):
    """Shared load -> select -> split -> standardize -> window pipeline."""
    series = load_csv(args.data, date_column=args.date_column, fill_policy=args.fill_policy)
    series = _select_channel(series, args.channel)
    ratios = _parse_ratios(args.split)
    splits = chronological_split(series, ratios, min_slice_len=lookback + horizon)
    scaler = fit_standardizer(splits[0])
    windows = tuple(make_windows(scaler.apply(s), lookback, horizon) for s in splits)
    return series, splits, scaler, windows


def _write_history(path: Path, history) -> None:
    lines = ["epoch,train_loss,val_loss"]
    lines += [f"{epoch},{tr:.9g},{va:.9g}" for epoch, tr, va in history]
    path.write_text("\n".join(lines) + "\n")


def _metrics_payload(args, config: TrainConfig, report, history, seconds: float) -> dict:
    return {
        "dataset": Path(args.data).name,
        "channel": args.channel or "all",
        "lookback": config.lookback,
        "horizon": config.horizon,
        "seed": config.seed,
        "mse": report.mse,
        "mae": report.mae,
        "epochs_run": len(history),
        "seconds": seconds,
        "scale": "standardized",
        "step_mse": [float(v) for v in report.step_mse],
    }


def cmd_train(args) -> int:
    started = time.perf_counter()
    config = TrainConfig(
        lookback=args.lookback, horizon=args.horizon, reduction=args.reduction,
        lr=args.lr, batch_size=args.batch_size, epochs=args.epochs, seed=args.seed,
        early_stop_patience=args.early_stop_patience, lr_decay=args.lr_decay)
    series, splits, _, (train_ds, val_ds, test_ds) = _prepared_windows(
        args, config.lookback, config.horizon)

    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "dataset.json", series_summary(series, splits))
    baseline = persistence_report(test_ds)

    if args.ablation:
        result = ablation_compare(train_ds, val_ds, test_ds, config)
        for arm, report, history, model in (
                ("fecam", result.fecam_report, result.fecam_history, result.fecam_model),
                ("plain", result.plain_report, result.plain_history, result.plain_model)):
            payload = _metrics_payload(args, config, report, history,
                                       time.perf_counter() - started)
            payload["arm"] = arm
            payload["persistence_mse"] = baseline.mse
            _write_json(out / f"metrics_{arm}.json", payload)
            _write_history(out / f"loss_history_{arm}.csv", history)
            save_model(out / f"model_{arm}.json", model, {"dataset": Path(args.data).name})
        _write_json(out / "ablation.json", {
            "fecam_mse": result.fecam_report.mse,
            "plain_mse": result.plain_report.mse,
            "mse_reduction_pct": result.mse_reduction_pct,
        })
    else:
        model = build_model(config)
        model, history = train(model, train_ds, val_ds, config)
        report = evaluate(model, test_ds)
        payload = _metrics_payload(args, config, report, history,
                                   time.perf_counter() - started)
        payload["persistence_mse"] = baseline.mse
        payload["persistence_mae"] = baseline.mae
        _write_json(out / "metrics.json", payload)
        _write_history(out / "loss_history.csv", history)
        save_model(out / "model.json", model, {"dataset": Path(args.data).name})

    _write_manifest(out, args, started)
    return 0


def _sample_curve(model, order: int, xs: np.ndarray) -> np.ndarray:
    # Chunked evaluation keeps the (points x order) workspace small.
    values = np.empty_like(xs)
    for start in range(0, xs.size, 256):
        block = xs[start:start + 256]
        values[start:start + block.size] = fourier_partial_sum(model, order, block)
    return values


def cmd_gibbs(args) -> int:
    orders = _parse_int_list(args.orders)
    if any(n < 1 for n in orders):
        raise ValueError("orders must be >= 1")
    if args.wave == "sine":
        raise ValueError("a sine wave has no jump discontinuity, so there is "
                         "no overshoot to measure; use square or pulse")
    max_order = max(orders)
    if args.wave == "square":
        model = square_wave_series(args.amplitude, max_order=max_order)
        probe = square_wave_probe(args.amplitude)
    else:
        model = pulse_wave_series(max_order=max_order)
        probe = pulse_wave_probe()

    started = time.perf_counter()
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    rows = gibbs_sweep(model, probe, orders, path=out / "gibbs.csv")
    xs = np.linspace(0.0, model.period, args.curve_points, endpoint=False)
    for order in orders:
        curve = _sample_curve(model, order, xs)
        lines = ["x,value"] + [f"{x:.9g},{v:.9g}" for x, v in zip(xs, curve)]
        (out / f"curve_n{order}.csv").write_text("\n".join(lines) + "\n")
    _write_json(out / "gibbs.json", {
        "wave": args.wave,
        "jump": probe.jump,
        "target_overshoot": probe.jump * GIBBS_CONSTANT,
        "rows": [{"order": n, "overshoot": o, "target": t} for n, o, t in rows],
    })
    _write_manifest(out, args, started)
    return 0


def cmd_compaction(args) -> int:
    components = _parse_int_list(args.components)
    if args.signal == "fixture":
        signal = low_frequency_signal(args.length)
    else:
        signal = np.arange(args.length, dtype=np.float64)
    if any(not 1 <= n <= args.length for n in components):
        raise ValueError(f"components must lie in [1, {args.length}]")

    started = time.perf_counter()
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    energy_compaction_report(signal, components, path=out / "compaction.csv")
    for kind in ("dct", "dft"):
        for n in components:
            recon, _ = reconstruct_truncated(signal, n, kind)
            lines = ["index,original,reconstruction"]
            lines += [f"{i},{signal[i]:.9g},{recon[i]:.9g}" for i in range(args.length)]
            (out / f"recon_{kind}_n{n}.csv").write_text("\n".join(lines) + "\n")
    if args.signal == "ramp":
        lines = ["n,dct_err,dft_err"]
        for n in components:
            dct_err, dft_err = boundary_overshoot_compare(signal, n)
            lines.append(f"{n},{dct_err:.9g},{dft_err:.9g}")
        (out / "boundary.csv").write_text("\n".join(lines) + "\n")
    _write_manifest(out, args, started)
    return 0


def cmd_attention(args) -> int:
    started = time.perf_counter()
    model, _ = load_model(args.checkpoint)
    if model.fecam is None:
        raise ValueError("checkpoint has no attention layer (trained with --ablation plain arm?)")
    _, _, _, (_, _, test_ds) = _prepared_windows(args, model.lookback, model.horizon)

    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    maps = []
    for start in range(0, test_ds.n_windows, 256):
        _, att = fecam_forward(test_ds.inputs[start:start + 256], model.fecam)
        maps.append(att)
    export_attention(np.concatenate(maps, axis=0), out / "attention.csv")
    _write_manifest(out, args, started)
    return 0


def cmd_theorems(args) -> int:
    if args.trials < 1:
        raise ValueError(f"trials must be >= 1, got {args.trials}")
    if args.max_len < 4:
        raise ValueError(f"max-len must be >= 4, got {args.max_len}")
    rng = np.random.default_rng(args.seed)
    started = time.perf_counter()
    checks = []

    worst = 0.0
    for _ in range(args.trials):
        length = int(rng.integers(4, args.max_len + 1))
        x = rng.normal(size=length) * rng.uniform(0.1, 100.0)
        f0 = dct_forward(x, UNNORMALIZED).coefficients[0]
        ref = length * float(np.mean(x))
        worst = max(worst, abs(f0 - ref) / max(abs(ref), 1e-300))
    checks.append(("gap_link", worst, 1e-12))

    worst = 0.0
    for _ in range(min(args.trials, 200)):
        length = int(rng.integers(2, min(args.max_len, 128) + 1))
        x = rng.normal(size=length)
        direct = dct_forward(x, UNNORMALIZED).coefficients
        worst = max(worst, float(np.max(np.abs(direct - dct_via_even_dft(x)))))
    checks.append(("even_dft_identity", worst, 1e-9))

    worst = 0.0
    for _ in range(max(args.trials // 5, 1)):
        length = int(rng.integers(1, args.max_len + 1))
        x = rng.normal(size=length) * 10.0
        for norm in (UNNORMALIZED, ORTHO):
            back = dct_inverse(dct_forward(x, norm))
            worst = max(worst, float(np.max(np.abs(back - x))))
    checks.append(("round_trip", worst, 1e-9))

    worst = 0.0
    for length in sorted({4, 16, 64, min(256, args.max_len), args.max_len}):
        basis = dct_matrix(length, ORTHO)
        worst = max(worst, float(np.max(np.abs(basis @ basis.T - np.eye(length)))))
    checks.append(("orthogonality", worst, 1e-10))

    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    failures = []
    print(f"randomized verification: trials={args.trials} max_len={args.max_len} seed={args.seed}")
    for name, error, tolerance in checks:
        ok = error < tolerance
        if not ok:
            failures.append(name)
        print(f"  {name:18s} {'PASS' if ok else 'FAIL'}  worst {error:.3e}  (tol {tolerance:g})")
    _write_json(out / "theorems.json", {
        "trials": args.trials,
        "max_len": args.max_len,
        "seed": args.seed,
        "checks": [{"name": n, "worst_error": float(e), "tolerance": t, "passed": bool(e < t)}
                   for n, e, t in checks],
    })
    _write_manifest(out, args, started)
    if failures:
        print(f"FAILED: {', '.join(failures)}", file=sys.stderr)
        return 1
    return 0


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=Path, required=True, help="input CSV path")
    parser.add_argument("--date-column", default=0,
                        type=lambda s: int(s) if s.lstrip("-").isdigit() else s,
                        help="timestamp column, by name or index (default: first column)")
    parser.add_argument("--fill-policy", choices=FILL_POLICIES, default="reject")
    parser.add_argument("--split", default="7:2:2",
                        help="ratio preset (7:2:2, 3:1:1, conventional) or a:b:c")
    parser.add_argument("--channel", default=None,
                        help="restrict to one channel by name (univariate run)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fecam",
        description="Frequency enhanced channel attention forecasting and spectral demos")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit the forecaster and report test metrics")
    _add_data_flags(p_train)
    p_train.add_argument("--lookback", type=int, default=96)
    p_train.add_argument("--horizon", type=int, default=96)
    p_train.add_argument("--reduction", type=int, default=2)
    p_train.add_argument("--lr", type=float, default=1e-4)
    p_train.add_argument("--batch-size", type=int, default=32)
    p_train.add_argument("--epochs", type=int, default=10)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--early-stop-patience", type=int, default=3)
    p_train.add_argument("--lr-decay", type=float, default=0.5)
    p_train.add_argument("--ablation", action="store_true",
                         help="train matched arms with and without attention")
    p_train.add_argument("--out", type=Path, default=Path("fecam_out"))
    p_train.set_defaults(func=cmd_train)

    p_gibbs = sub.add_parser("gibbs", help="overshoot sweep for a jump discontinuity")
    p_gibbs.add_argument("--orders", default="10,100,1000,10000",
                         help="comma-separated partial-sum orders")
    p_gibbs.add_argument("--wave", choices=("square", "pulse", "sine"), default="square")
    p_gibbs.add_argument("--amplitude", type=float, default=1.0)
    p_gibbs.add_argument("--curve-points", type=int, default=512)
    p_gibbs.add_argument("--out", type=Path, default=Path("fecam_out"))
    p_gibbs.set_defaults(func=cmd_gibbs)

    p_comp = sub.add_parser("compaction", help="truncated reconstruction error table")
    p_comp.add_argument("--signal", choices=("fixture", "ramp"), default="fixture")
    p_comp.add_argument("--length", type=int, default=16)
    p_comp.add_argument("--components", default="5,10,15")
    p_comp.add_argument("--out", type=Path, default=Path("fecam_out"))
    p_comp.set_defaults(func=cmd_compaction)

    p_att = sub.add_parser("attention", help="export a checkpoint's attention heatmap")
    p_att.add_argument("--checkpoint", type=Path, required=True)
    _add_data_flags(p_att)
    p_att.add_argument("--out", type=Path, default=Path("fecam_out"))
    p_att.set_defaults(func=cmd_attention)

    p_thm = sub.add_parser("theorems", help="randomized verification of the transform identities")
    p_thm.add_argument("--trials", type=int, default=1000)
    p_thm.add_argument("--max-len", type=int, default=512)
    p_thm.add_argument("--seed", type=int, default=0)
    p_thm.add_argument("--out", type=Path, default=Path("fecam_out"))
    p_thm.set_defaults(func=cmd_theorems)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
