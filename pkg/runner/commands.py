"""
Command registry and dispatcher for the ``clockmem`` CLI.

Each command handler takes a validated :class:`RunConfig` plus the
environment :class:`Settings`, runs one experiment or analysis, writes
its CSV and provenance document, and returns a :class:`DispatchResult`.

Dispatch rules:
  • The run policy is checked before any work starts
  • Bad parameters map to ``config_error`` (exit 2)
  • Any other failure maps to ``runtime_error`` (exit 3)
  • Censored realizations map to ``unreliable`` (exit 4)
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, Callable

import numpy as np
from pydantic import ValidationError

from analysis.fitting import fit_power_law, growth_classifier, scaling_points, MIN_CLASSIFIER_POINTS, MIN_FIT_POINTS
from analysis.reference import reference_exponent
from analysis.store import RecordStore
from analysis.timescales import mcs_to_seconds, size_for_timescale
from shared.errors import ConfigError
from shared.provenance import build_document, load_signing_key, read_document, verify_document, write_document
from shared.schemas import Command, DispatchResult, ExitCode, FillKind, FillSpec, RunConfig, RunStatus
from shared.settings import Settings
from shared.tables import read_records_csv, write_cluster_csv, write_records_csv, write_trajectory_csv
from simulator.clusters import peierls_percolation_temperature
from simulator.experiments.islands import largest_island_scan
from simulator.experiments.memory_time import run_ensemble
from simulator.experiments.oracle import hitting_time_from_geometry
from simulator.experiments.precession import record_precession
from simulator.observables import max_energy_excursion, visited_sectors
from runner.policy import RunPolicy

logger = logging.getLogger(__name__)

_EXIT_CODES = {
    RunStatus.OK: ExitCode.OK,
    RunStatus.CONFIG_ERROR: ExitCode.CONFIG,
    RunStatus.RUNTIME_ERROR: ExitCode.RUNTIME,
    RunStatus.UNRELIABLE: ExitCode.UNRELIABLE,
}


def _result(
    config: RunConfig,
    status: RunStatus,
    artifacts: list[Path] | None = None,
    outputs: dict[str, Any] | None = None,
    display: str = "",
    error: str | None = None,
) -> DispatchResult:
    return DispatchResult(
        command=config.command,
        status=status,
        exit_code=_EXIT_CODES[status],
        artifacts=artifacts or [],
        outputs=outputs or {},
        display=display,
        error=error,
    )


def _signing_key(settings: Settings):
    if settings.signing_key_dir is None:
        return None
    return load_signing_key(settings.signing_key_dir)


def _document_path(config: RunConfig, out: Path) -> Path:
    return config.summary or out.with_suffix(".json")


def _write(kind: str, config: RunConfig, settings: Settings, result: dict[str, Any], path: Path) -> Path:
    return write_document(path, build_document(kind, config, result, _signing_key(settings)))


# ---------------------------------------------------------------------------
# Simulation commands
# ---------------------------------------------------------------------------

def _memory(config: RunConfig, settings: Settings) -> DispatchResult:
    params = config.model_params()
    summary, records = run_ensemble(
        params,
        config.n_realizations,
        config.master_seed,
        stop=config.stop_rule,
        max_steps=config.max_steps,
        parallelism=config.parallelism,
        progress=config.progress,
    )
    out = config.out or Path(f"memory_q{params.label}_L{params.L}_T{params.T:g}.csv")
    write_records_csv(out, records)

    result = summary.model_dump(mode="json")
    result["mean_tau_seconds"] = (
        mcs_to_seconds(summary.mean_tau, config.seconds_per_mcs) if summary.mean_tau is not None else None
    )
    doc = _write("memory", config, settings, result, _document_path(config, out))

    status = RunStatus.OK if summary.reliable else RunStatus.UNRELIABLE
    display = (
        f"L={params.L} q={params.label} T={params.T:g}: mean_tau={summary.mean_tau} "
        f"stderr={summary.stderr_tau} censored={summary.n_censored}/{summary.n_realizations}"
    )
    return _result(config, status, [out, doc], {"mean_tau": summary.mean_tau, "n_censored": summary.n_censored}, display)


def _precess(config: RunConfig, settings: Settings) -> DispatchResult:
    params = config.model_params()
    if config.start == FillKind.EXPLICIT:
        raise ConfigError("explicit start states are only available through the Python API")
    start = FillSpec.uniform_random(config.master_seed, 0) if config.start == FillKind.RANDOM else None
    trajectory = record_precession(
        params, config.master_seed, config.duration, config.sampling_interval, start=start,
    )
    out = config.out or Path(f"precess_q{params.label}_L{params.L}_T{params.T:g}.csv")
    write_trajectory_csv(out, trajectory)

    sectors = visited_sectors(trajectory)
    result = {
        "n_samples": len(trajectory.samples),
        "mean_m": float(np.mean([s.m for s in trajectory.samples])),
        "sectors_visited": sectors,
        "max_energy_excursion": max_energy_excursion(trajectory),
    }
    doc = _write("precess", config, settings, result, _document_path(config, out))
    display = f"{len(trajectory.samples)} samples, mean m={result['mean_m']:.4f}, sectors visited {sectors}"
    return _result(config, RunStatus.OK, [out, doc], result, display)


def _clusters(config: RunConfig, settings: Settings) -> DispatchResult:
    sizes = config.L_list or [config.L]
    params = config.model_params(sizes[0])
    scan = largest_island_scan(
        params,
        sizes,
        config.n_samples,
        config.master_seed,
        burn_in_factor=config.burn_in_factor,
        parallelism=config.parallelism,
    )
    out = config.out or Path(f"clusters_q{params.label}_T{params.T:g}.csv")
    write_cluster_csv(out, scan.rows)

    result = scan.model_dump(mode="json", exclude={"rows"})
    result["T_p"] = None if params.is_xy else peierls_percolation_temperature(params.q)
    doc = _write("clusters", config, settings, result, _document_path(config, out))
    display = "\n".join(
        f"L={s.L}: largest_0 mean={s.mean_largest_0:.1f} largest_non0 mean={s.mean_largest_non0:.1f} "
        f"wrap_fraction_0={s.wrap_fraction_0:.2f}"
        for s in scan.stats
    )
    return _result(config, RunStatus.OK, [out, doc], {"stats": result["stats"]}, display)


def _oracle(config: RunConfig, settings: Settings) -> DispatchResult:
    value = hitting_time_from_geometry(config.q, config.L, config.T, config.stop_rule, config.cadence)
    artifacts = []
    target = config.summary or config.out
    if target is not None:
        result = {"q": config.q, "L": config.L, "T": config.T, "cadence": config.cadence.value, "expected_tau_mcs": value}
        artifacts.append(_write("oracle", config, settings, result, target))
    return _result(config, RunStatus.OK, artifacts, {"expected_tau_mcs": value}, repr(value))


def _tp(config: RunConfig, settings: Settings) -> DispatchResult:
    value = peierls_percolation_temperature(config.q)
    return _result(config, RunStatus.OK, outputs={"T_p": value}, display=f"{value:.6g}")


# ---------------------------------------------------------------------------
# Analysis commands
# ---------------------------------------------------------------------------

def _fit(config: RunConfig, settings: Settings) -> DispatchResult:
    store = RecordStore()
    for path in config.inputs:
        store.add_many(read_records_csv(path))

    entries = []
    lines = []
    for key, records in store.groups(config.group).items():
        label = " ".join(f"{k}={v}" for k, v in zip(config.group, key))
        points = scaling_points(records, config.statistic)
        if len(points) < MIN_FIT_POINTS:
            logger.warning("Skipping %s: only %d sizes with uncensored records", label, len(points))
            continue
        fit = fit_power_law(points)
        growth = growth_classifier(points, config.margin) if len(points) >= MIN_CLASSIFIER_POINTS else None
        params = records[0].params
        reference = reference_exponent(params.q, params.T)
        entries.append({
            "group": dict(zip(config.group, key)),
            "fit": fit.model_dump(mode="json"),
            "growth": growth.value if growth else None,
            "n_records": len(records),
            "n_censored": sum(1 for r in records if r.censored),
            "reference_z": None if reference is None else reference.z,
            "size_for_one_second": size_for_timescale(
                1.0, fit.z, fit.amplitude, config.seconds_per_mcs,
            ) if fit.z > 0 and math.isfinite(fit.amplitude) else None,
        })
        lines.append(
            f"{label}: z={fit.z:.4f} +/- {fit.z_err:.4f} r2={fit.r_squared:.4f} "
            f"growth={growth.value if growth else 'n/a'}"
        )
    if not entries:
        raise ConfigError(f"no group has at least {MIN_FIT_POINTS} sizes")

    result = {
        "statistic": config.statistic,
        "margin": config.margin,
        "groups": entries,
    }
    out = config.out or config.summary or Path("fit.json")
    doc = _write("fit", config, settings, result, out)
    status = RunStatus.UNRELIABLE if store.n_censored() else RunStatus.OK
    return _result(config, status, [doc], {"groups": entries}, "\n".join(lines))


# ---------------------------------------------------------------------------
# Provenance commands
# ---------------------------------------------------------------------------

_DATA_COMMANDS = {Command.MEMORY, Command.PRECESS, Command.CLUSTERS}


def _replay_sibling(path: Path, suffix: str | None = None) -> Path:
    return path.with_name(f"{path.stem}.replay{suffix or path.suffix}")


def _replay_targets(config: RunConfig, stored: RunConfig) -> dict[str, Path | None]:
    """Output paths for a rerun; never the replayed document itself."""
    if stored.command in _DATA_COMMANDS:
        out = config.out or _replay_sibling(stored.out or config.doc, ".csv")
        summary = config.summary or out.with_suffix(".json")
    elif stored.command == Command.FIT:
        out, summary = config.summary or config.out or _replay_sibling(config.doc), None
    else:
        out, summary = None, config.summary or config.out or _replay_sibling(config.doc)

    for path in (out, summary):
        if path is not None and path.resolve() == config.doc.resolve():
            raise ConfigError(f"replay would overwrite {config.doc}; pass --out or --summary elsewhere")
    return {"out": out, "summary": summary}


def _replay(config: RunConfig, settings: Settings) -> DispatchResult:
    original = read_document(config.doc)
    stored = RunConfig.model_validate(original["config"])
    if stored.command in (Command.REPLAY, Command.VERIFY):
        raise ConfigError(f"cannot replay a {stored.command.value} document")
    rerun = dispatch(stored.model_copy(update=_replay_targets(config, stored)), settings)

    docs = [p for p in rerun.artifacts if p.suffix == ".json"]
    if docs and rerun.status in (RunStatus.OK, RunStatus.UNRELIABLE):
        matches = read_document(docs[-1])["result"] == original["result"]
        rerun.outputs["result_matches"] = matches
        rerun.display = f"{rerun.display}\nresult matches original: {matches}".strip()
        if not matches:
            logger.warning("Replay of %s produced a different result", config.doc)
    return rerun


def _verify(config: RunConfig, settings: Settings) -> DispatchResult:
    ok, reason = verify_document(read_document(config.doc))
    status = RunStatus.OK if ok else RunStatus.RUNTIME_ERROR
    if not ok:
        logger.warning("Verification of %s failed: %s", config.doc, reason)
    return _result(config, status, outputs={"verified": ok, "reason": reason}, display=reason)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

CommandFn = Callable[[RunConfig, Settings], DispatchResult]

_COMMANDS: dict[Command, CommandFn] = {
    Command.MEMORY: _memory,
    Command.PRECESS: _precess,
    Command.CLUSTERS: _clusters,
    Command.FIT: _fit,
    Command.ORACLE: _oracle,
    Command.TP: _tp,
    Command.REPLAY: _replay,
    Command.VERIFY: _verify,
}


def register_command(command: Command, fn: CommandFn) -> None:
    """Register or replace a command handler."""
    _COMMANDS[command] = fn


def dispatch(
    config: RunConfig,
    settings: Settings | None = None,
    policy: RunPolicy | None = None,
) -> DispatchResult:
    """Validate ``config`` against the run policy and run its command."""
    settings = settings or Settings.from_env()
    policy = policy or RunPolicy()

    issue = policy.validate(config)
    if issue is not None:
        return _result(config, RunStatus.CONFIG_ERROR, error=f"policy: {issue.value}")

    handler = _COMMANDS.get(config.command)
    if handler is None:
        logger.error("Unknown command '%s'", config.command)
        return _result(config, RunStatus.CONFIG_ERROR, error=f"unknown command: {config.command}")

    logger.info("Running %s", config.command.value)
    try:
        result = handler(config, settings)
    except (ConfigError, ValidationError) as exc:
        logger.error("Command %s rejected: %s", config.command.value, exc)
        return _result(config, RunStatus.CONFIG_ERROR, error=str(exc))
    except Exception as exc:
        logger.exception("Command %s failed", config.command.value)
        return _result(config, RunStatus.RUNTIME_ERROR, error=str(exc))

    logger.info("Finished %s: %s", config.command.value, result.status.value)
    return result
