"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error,
3 a statistical check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import secrets
import sys
import time
from pathlib import Path

from . import __version__
from .core import PRESET_NAMES, describe_ops, ensure_valid, load_space, preset, sample_ops
from .errors import AugmentError, ConfigError
from .rng import derive_stream

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_DIAG_FAIL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError(f"expected non-negative integers, got {text!r}")
    return values


def _add_space_args(p, with_num_ops=True):
    group = p.add_mutually_exclusive_group()
    group.add_argument(
        "--preset", choices=PRESET_NAMES, default=None,
        help="built-in range preset; 'default' when neither --preset nor --config is given",
    )
    group.add_argument("--config", metavar="FILE", default=None, help="JSON augmentation-space file")
    if with_num_ops:
        p.add_argument(
            "--num-ops", type=_nonneg_int, default=None,
            help="ops chained per image; overrides the preset/config value (2 in presets)",
        )


def _add_seed_args(p):
    p.add_argument("--seed", type=_seed, default=0, help="64-bit master seed")
    p.add_argument(
        "--entropy", action="store_true",
        help="ignore --seed and draw a fresh random seed (printed to stderr)",
    )


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(
        prog="uniform-augment",
        description="Search-free uniform image augmentation.",
        formatter_class=fmt,
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("augment", help="augment an image directory tree", formatter_class=fmt, allow_abbrev=False)
    p.add_argument("--input", required=True, metavar="DIR", help="dataset root (subdirectory = label)")
    p.add_argument("--output", required=True, metavar="DIR", help="output root")
    _add_space_args(p)
    _add_seed_args(p)
    p.add_argument("--epochs", type=_positive_int, default=1, help="augmented epochs to write")
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1, help="worker processes")
    p.add_argument("--records", action="store_true", help="also write per-image records.jsonl")

    p = sub.add_parser("sample", help="print sampled op chains as JSON lines", formatter_class=fmt, allow_abbrev=False)
    _add_space_args(p)
    _add_seed_args(p)
    p.add_argument("--count", type=_positive_int, default=1, help="number of chains to print")

    p = sub.add_parser("stats", help="test the sampler for uniformity", formatter_class=fmt, allow_abbrev=False)
    _add_space_args(p, with_num_ops=False)
    _add_seed_args(p)
    p.add_argument("--draws", type=_positive_int, default=150_000, help="ops to draw")
    p.add_argument(
        "--report-dir", metavar="DIR", default=None,
        help="write uniformity.json and uniformity.png here",
    )

    p = sub.add_parser("sweep", help="augment once per NumOps value and report shift", formatter_class=fmt, allow_abbrev=False)
    p.add_argument("--input", required=True, metavar="DIR", help="dataset root")
    p.add_argument("--output", required=True, metavar="DIR", help="sweep output root")
    p.add_argument(
        "--num-ops-list", type=_int_list, default=[1, 2, 3, 4, 5, 6],
        help="comma-separated NumOps values",
    )
    _add_space_args(p, with_num_ops=False)
    _add_seed_args(p)
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1, help="worker processes")

    p = sub.add_parser("presets", help="print the built-in range presets", formatter_class=fmt, allow_abbrev=False)
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    return parser


def _space_from_args(args):
    if args.config is not None:
        space = load_space(args.config)
    else:
        space = preset(args.preset or "default")
    if getattr(args, "num_ops", None) is not None:
        space = space.with_num_ops(args.num_ops)
    return ensure_valid(space)


def _resolve_seed(args):
    if args.entropy:
        args.seed = secrets.randbits(64)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def cmd_augment(args) -> int:
    from .pipeline import augment_dataset, scan_dataset

    space = _space_from_args(args)
    seed = _resolve_seed(args)
    if not Path(args.input).is_dir():
        raise UsageError(f"input directory does not exist: {args.input}")
    dataset = scan_dataset(args.input)
    if len(dataset) == 0:
        raise UsageError(f"no PNG/JPEG images under {args.input}")
    start = time.perf_counter()
    manifest = augment_dataset(
        dataset, args.output, space, seed, args.epochs, args.workers, args.records
    )
    elapsed = time.perf_counter() - start
    ok = manifest.num_images - manifest.num_failed
    print(
        f"augmented {ok}/{manifest.num_images} images x {args.epochs} epoch(s) "
        f"in {elapsed:.2f}s -> {args.output}"
    )
    if manifest.num_failed:
        print(f"{manifest.num_failed} image(s) failed to decode; see manifest", file=sys.stderr)
    return EXIT_OK if ok > 0 else EXIT_RUNTIME


def cmd_sample(args) -> int:
    space = _space_from_args(args)
    seed = _resolve_seed(args)
    out = sys.stdout
    for i in range(args.count):
        ops = sample_ops(space, derive_stream(seed, 0, i))
        out.write(json.dumps({"record": i, "ops": describe_ops(ops, space)}) + "\n")
    return EXIT_OK


def cmd_stats(args) -> int:
    from .diagnostics import uniformity_test

    space = _space_from_args(args)
    seed = _resolve_seed(args)
    report = uniformity_test(space, seed, args.draws)
    print(report.format_table())
    if args.report_dir:
        from .plotting import plot_uniformity

        report_dir = Path(args.report_dir)
        report_dir.mkdir(parents=True, exist_ok=True)
        (report_dir / "uniformity.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        plot_uniformity(report, report_dir / "uniformity.png")
    return EXIT_OK if report.passed else EXIT_DIAG_FAIL


def cmd_sweep(args) -> int:
    from .diagnostics import format_shift_table, is_nondecreasing, numops_sweep
    from .pipeline import scan_dataset
    from .plotting import plot_shift

    space = _space_from_args(args)
    seed = _resolve_seed(args)
    if not Path(args.input).is_dir():
        raise UsageError(f"input directory does not exist: {args.input}")
    dataset = scan_dataset(args.input)
    if len(dataset) == 0:
        raise UsageError(f"no PNG/JPEG images under {args.input}")
    runs = numops_sweep(dataset, args.output, args.num_ops_list, seed, space, args.workers)
    hist = [r.report.mean_hist_l1 for r in runs]
    fill = [r.report.fill_fraction_delta for r in runs]
    summary = {
        "master_seed": seed,
        "num_ops_values": args.num_ops_list,
        "runs": [r.to_dict() for r in runs],
        "hist_l1_nondecreasing": is_nondecreasing(hist),
        "fill_fraction_nondecreasing": is_nondecreasing(fill),
    }
    out = Path(args.output)
    (out / "sweep.json").write_text(json.dumps(summary, indent=2) + "\n")
    plot_shift(runs, out / "sweep.png", xlabel="NumOps")
    print(format_shift_table(runs))
    print(
        f"histogram distance nondecreasing in NumOps: {summary['hist_l1_nondecreasing']}; "
        f"fill fraction nondecreasing: {summary['fill_fraction_nondecreasing']}"
    )
    return EXIT_OK if all(r.num_failed < len(dataset) for r in runs) else EXIT_RUNTIME


def format_presets() -> str:
    spaces = [preset(n) for n in PRESET_NAMES]
    lines = [f"{'transform':<14}" + "".join(f"{n.capitalize():>18}" for n in PRESET_NAMES)]
    for i, t in enumerate(spaces[0].transforms):
        cells = []
        for space in spaces:
            s = space.transforms[i]
            cells.append("N/A" if s.binary else f"[{s.lo:g}, {s.hi:g}]")
        lines.append(f"{t.name:<14}" + "".join(f"{c:>18}" for c in cells))
    lines.append(f"num_ops: {spaces[0].num_ops}")
    return "\n".join(lines)


def cmd_presets(args) -> int:
    if args.json:
        from .core import space_to_dict

        print(json.dumps({n: space_to_dict(preset(n)) for n in PRESET_NAMES}, indent=2))
    else:
        print(format_presets())
    return EXIT_OK


COMMANDS = {
    "augment": cmd_augment,
    "sample": cmd_sample,
    "stats": cmd_stats,
    "sweep": cmd_sweep,
    "presets": cmd_presets,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AugmentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
