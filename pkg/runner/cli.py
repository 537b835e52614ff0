"""
``clockmem`` command-line entry point.

Usage:
    clockmem memory --q 6 --L 16 --T 0.71 --realizations 100 --master-seed 1 --out runs.csv
    clockmem precess --q 6 --L 64 --T 0.8 --duration 100000 --interval 100 --out traj.csv
    clockmem clusters --q 8 --T 0.5 --L-list 16,32,64 --samples 10 --out islands.csv
    clockmem fit --in runs.csv --group q,T
    clockmem oracle --q 2 --L 3 --T 4
    clockmem tp --q 5
    clockmem replay --doc runs.json --out rerun.csv
    clockmem verify --doc runs.json

Exit codes: 0 ok, 2 configuration error, 3 runtime error, 4 unreliable
(censored realizations).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from dotenv import load_dotenv
from pydantic import ValidationError

from shared import __version__
from shared.errors import ConfigError
from shared.schemas import Command, ExitCode, FillKind, OracleCadence, RunConfig, StopKind, XYBinning
from shared.settings import Settings
from runner.commands import dispatch

logger = logging.getLogger("clockmem")

LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser(settings: Settings | None = None) -> argparse.ArgumentParser:
    settings = settings or Settings()
    parser = argparse.ArgumentParser(
        prog="clockmem",
        description="Memory time of the 2D q-state clock and XY models under Metropolis dynamics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    model = common.add_argument_group("model")
    model.add_argument("--q", default="6", help="number of clock states, or 'inf'/'xy' for the XY model")
    model.add_argument("--q-bin", type=int, default=6, help="census bins for the XY model")
    model.add_argument("--xy-binning", choices=[b.value for b in XYBinning], default=XYBinning.FLOOR.value)
    model.add_argument("--L", type=int, default=16, help="linear lattice size")
    model.add_argument("--L-list", type=_int_list, default=[], help="comma-separated sizes (clusters)")
    model.add_argument("--T", type=float, default=None, help="temperature (J = k_B = 1)")

    run = common.add_argument_group("run")
    run.add_argument("--realizations", type=int, default=100)
    run.add_argument("--master-seed", type=int, default=0)
    run.add_argument("--max-steps", type=int, default=settings.max_steps, help="censoring horizon in MCS")
    run.add_argument("--stop", choices=[k.value for k in StopKind], default=StopKind.PLURALITY_LOSS.value)
    run.add_argument("--check-interval", type=int, default=1, help="MCS between stop-rule checks")
    run.add_argument("--parallelism", type=int, default=settings.parallelism)
    run.add_argument("--progress", action="store_true", help="show progress bars")
    run.add_argument("--duration", type=int, default=1000, help="precession length in MCS")
    run.add_argument("--interval", type=int, default=10, help="precession sampling interval in MCS")
    run.add_argument("--start", choices=[k.value for k in FillKind], default=FillKind.POLARIZED.value)
    run.add_argument("--samples", type=int, default=10, help="island samples per size")
    run.add_argument("--burn-in-factor", type=int, default=20, help="island burn-in in units of L^2 MCS")
    run.add_argument("--cadence", choices=[c.value for c in OracleCadence], default=OracleCadence.ATTEMPT.value)
    run.add_argument("--seconds-per-mcs", type=float, default=settings.seconds_per_mcs)

    io = common.add_argument_group("input/output")
    io.add_argument("--out", type=Path, default=None)
    io.add_argument("--summary", type=Path, default=None, help="document path (default: <out>.json)")
    io.add_argument("--in", dest="inputs", type=Path, action="append", default=[], help="records CSV (repeatable)")
    io.add_argument("--group", type=_str_list, default=["q", "T"])
    io.add_argument("--statistic", choices=["mean", "median"], default="mean")
    io.add_argument("--margin", type=float, default=0.3, help="growth classifier margin")
    io.add_argument("--doc", type=Path, default=None, help="document to replay or verify")

    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        Command.MEMORY: "run a memory-time ensemble",
        Command.PRECESS: "record a magnetization trajectory",
        Command.CLUSTERS: "scan largest same-species islands over sizes",
        Command.FIT: "fit tau = A L^z over grouped records",
        Command.ORACLE: "exact expected memory time on a tiny lattice",
        Command.TP: "percolation temperature estimate 4/q^2",
        Command.REPLAY: "re-run the command recorded in a document",
        Command.VERIFY: "check a document's digest and signature",
    }
    for command, text in helps.items():
        sub.add_parser(command.value, parents=[common], help=text)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        q=args.q,
        q_bin=args.q_bin,
        xy_binning=args.xy_binning,
        L=args.L,
        L_list=args.L_list,
        T=args.T,
        n_realizations=args.realizations,
        master_seed=args.master_seed,
        max_steps=args.max_steps,
        stop=args.stop,
        check_interval=args.check_interval,
        parallelism=args.parallelism,
        out=args.out,
        summary=args.summary,
        inputs=args.inputs,
        group=args.group,
        statistic=args.statistic,
        margin=args.margin,
        duration=args.duration,
        sampling_interval=args.interval,
        start=args.start,
        n_samples=args.samples,
        burn_in_factor=args.burn_in_factor,
        cadence=args.cadence,
        seconds_per_mcs=args.seconds_per_mcs,
        progress=args.progress,
        doc=args.doc,
    )


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    try:
        settings = Settings.from_env()
    except ConfigError as exc:
        logging.basicConfig(format=LOG_FORMAT)
        logger.error("Invalid environment: %s", exc)
        return int(ExitCode.CONFIG)
    logging.basicConfig(level=settings.log_level, format=LOG_FORMAT)

    args = build_parser(settings).parse_args(argv)
    try:
        config = config_from_args(args)
    except ValidationError as exc:
        logger.error("Invalid arguments: %s", exc)
        return int(ExitCode.CONFIG)

    result = dispatch(config, settings)
    if result.display:
        print(result.display)
    for path in result.artifacts:
        logger.info("Artifact: %s", path)
    if result.error:
        logger.error("%s: %s", result.status.value, result.error)
    return int(result.exit_code)


if __name__ == "__main__":
    sys.exit(main())
