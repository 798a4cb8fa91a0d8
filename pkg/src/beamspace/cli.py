"""Command-line entry point: ``beamspace-sim --experiment fig3|fig4|custom``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .environment import ScenarioError
from .experiments import DEFAULT_POLICIES, ExperimentSpec, run

log = logging.getLogger("beamspace")


def _eta_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) == 1:
        v = float(parts[0])
        return (v, v, 1.0)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected start:stop:step in dB, e.g. 0:20:1")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not numeric: {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need step > 0 and stop >= start")
    return (start, stop, step)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _int_list(text: str) -> tuple[int, ...]:
    values = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            if "-" in chunk:
                lo, hi = (int(x) for x in chunk.split("-"))
                values.extend(range(lo, hi + 1))
            else:
                values.append(int(chunk))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return tuple(values)


def _policy_list(text: str) -> tuple[str, ...]:
    values = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [v for v in values if v not in DEFAULT_POLICIES]
    if bad or not values:
        raise argparse.ArgumentTypeError(
            f"unknown policies {bad}; choose from {','.join(DEFAULT_POLICIES)}")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="beamspace-sim",
        description="mmWave beamspace MU-MIMO experiments (scan counts, rate vs threshold).")
    p.add_argument("--experiment", required=True, choices=["fig3", "fig4", "custom"])
    p.add_argument("--config", type=Path, help="scenario YAML (default: built-in reference)")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--eta", type=_eta_range, default=(0.0, 20.0, 1.0),
                   help="threshold sweep start:stop:step in dB (default 0:20:1)")
    p.add_argument("--z", type=_float_list, default=(0.01, 0.1), help="side-lobe gains")
    p.add_argument("--ntx", type=_int_list, default=tuple(range(1, 11)),
                   help="simultaneous transmit beams for fig3, e.g. 1-10")
    p.add_argument("--beamwidths", type=_float_list, default=(10.0, 15.0, 20.0, 30.0),
                   help="transmit beamwidths in degrees for fig3")
    p.add_argument("--policies", type=_policy_list, default=DEFAULT_POLICIES)
    p.add_argument("--distance-unit", choices=["m", "km"])
    p.add_argument("--dump-training", action="store_true")
    p.add_argument("--dump-grouping", action="store_true")
    p.add_argument("--dump-allocation", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.experiment == "custom" and args.config is None:
        parser.error("--experiment custom requires --config")
    try:
        spec = ExperimentSpec(
            kind=args.experiment, config_path=args.config, out_dir=args.out, seed=args.seed,
            eta_db=args.eta, z_values=args.z, n_tx_values=args.ntx,
            beamwidths_deg=args.beamwidths, policies=args.policies,
            distance_unit=args.distance_unit, dump_training=args.dump_training,
            dump_grouping=args.dump_grouping, dump_allocation=args.dump_allocation)
        written = run(spec)
    except ScenarioError as exc:
        print(f"beamspace-sim: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"beamspace-sim: cannot access {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"beamspace-sim: {exc}", file=sys.stderr)
        return 2
    for name, path in written.items():
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
