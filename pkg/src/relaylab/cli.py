"""Batch front-end: rate reports, Monte Carlo sweeps, self-checks, export.

Subcommands: rates, simulate, verify, export-channel.  Experiment
configs are JSON; results go to CSV or JSON with a single version
header line, config echo columns first, and units spelled out in every
metric column name.  Fixed seed plus fixed config gives byte-identical
output, independent of the worker count.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .channels import ChannelRecipe, RelayChannelSpec, make_channel, save_channel_file
from .protocol import SimParams, SizeLimitError, run_monte_carlo
from .region import CodingDistribution, RegionReport, SearchConfig, cf_rates, evaluate_bounds
from .verify import LEVELS, run_checks

SWEEP_FIELDS = {"n": int, "R": float, "R2": float, "B": int, "epsilon": float, "decoder": str}

_REGION_COLUMNS = [f.name + "[bits/use]" for f in dataclasses.fields(RegionReport)]

RATES_COLUMNS = [
    "channel_kind",
    "channel_params",
    "seed",
    "distribution_source",
    "grid_resolution",
    "yhat_max_size",
    "include_degenerate",
    *_REGION_COLUMNS,
    "cf_rate_minform[bits/use]",
    "cf_rate_constrained[bits/use]",
]

SIMULATE_COLUMNS = [
    "channel_kind",
    "channel_params",
    "seed",
    "distribution_source",
    "decoder",
    "metric",
    "n",
    "B",
    "last_block_factor",
    "R[bits/use]",
    "R2[bits/use]",
    "epsilon",
    "trials",
    "effective_rate[bits/use]",
    "effective_index_rate[bits/use]",
    "status",
    "reason",
    "message_error_rate[prob]",
    "quantization_failure_rate[prob]",
    "index_error_rate[prob]",
    "per_block_error[prob]",
]


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: channel, operating point, optional sim block.

    Exactly one of channel_recipe/channel_path is set, and exactly one
    of distribution/search-driven selection.  `search` always holds the
    grid settings used for best-compression columns (defaults when the
    config omits them).
    """

    channel_recipe: ChannelRecipe | None
    channel_path: str | None
    distribution: CodingDistribution | None
    search: SearchConfig
    distribution_source: str
    sim: SimParams | None
    trials: int
    output_path: str | None
    output_format: str

    def __post_init__(self) -> None:
        if (self.channel_recipe is None) == (self.channel_path is None):
            raise ConfigError("config needs exactly one of channel kind or channel path")
        if self.distribution_source not in ("explicit", "search"):
            raise ConfigError(f"bad distribution_source {self.distribution_source!r}")
        if (self.distribution is None) != (self.distribution_source == "search"):
            raise ConfigError("config needs exactly one of an explicit distribution or search")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output format must be csv or json, got {self.output_format!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")

    def channel(self) -> RelayChannelSpec:
        if self.channel_recipe is not None:
            return make_channel(self.channel_recipe)
        try:
            return make_channel(ChannelRecipe("custom", {"path": self.channel_path}))
        except OSError as exc:
            raise ConfigError(f"cannot read channel file {self.channel_path}: {exc}") from exc

    def channel_echo(self) -> tuple[str, str]:
        if self.channel_recipe is not None:
            params = json.dumps(self.channel_recipe.params, sort_keys=True, separators=(",", ":"))
            return self.channel_recipe.kind, params
        return "custom", json.dumps({"path": self.channel_path}, sort_keys=True)


def _parse_search(block: dict[str, Any]) -> SearchConfig:
    allowed = {"grid_resolution", "yhat_max_size", "include_degenerate"}
    bad = set(block) - allowed
    if bad:
        raise ConfigError(f"unknown search settings {sorted(bad)}; allowed {sorted(allowed)}")
    return SearchConfig(**block)


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate an experiment config file."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")

    channel = raw.get("channel")
    if not isinstance(channel, dict):
        raise ConfigError("config needs a 'channel' object")
    recipe, ch_path = None, None
    if "path" in channel and "kind" in channel:
        raise ConfigError("channel block takes 'kind' or 'path', not both")
    if "path" in channel:
        ch_path = str(channel["path"])
    elif "kind" in channel:
        recipe = ChannelRecipe(channel["kind"], channel.get("params", {}))
    else:
        raise ConfigError("channel block needs 'kind' or 'path'")

    dist_block = raw.get("distribution")
    if not isinstance(dist_block, dict):
        raise ConfigError("config needs a 'distribution' object")
    explicit_keys = {"p_x1", "p_x2", "q"}
    if "search" in dist_block and explicit_keys & set(dist_block):
        raise ConfigError("distribution block takes 'search' or explicit arrays, not both")
    if "search" in dist_block:
        dist = None
        source = "search"
        search = _parse_search(dist_block["search"])
    elif explicit_keys <= set(dist_block):
        dist = CodingDistribution(
            p_x1=np.asarray(dist_block["p_x1"], dtype=np.float64),
            p_x2=np.asarray(dist_block["p_x2"], dtype=np.float64),
            q=np.asarray(dist_block["q"], dtype=np.float64),
        )
        source = "explicit"
        search = _parse_search(raw.get("search", {}))
    else:
        raise ConfigError("distribution block needs 'search' or all of p_x1, p_x2, q")

    sim_block = raw.get("sim")
    sim = None
    trials = 100
    if sim_block is not None:
        if not isinstance(sim_block, dict):
            raise ConfigError("'sim' must be an object")
        sim_block = dict(sim_block)
        trials = int(sim_block.pop("trials", trials))
        try:
            sim = SimParams(**sim_block)
        except TypeError as exc:
            raise ConfigError(f"bad sim block: {exc}") from exc

    out = raw.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("'output' must be an object")
    return ExperimentConfig(
        channel_recipe=recipe,
        channel_path=ch_path,
        distribution=dist,
        search=search,
        distribution_source=source,
        sim=sim,
        trials=trials,
        output_path=out.get("path"),
        output_format=out.get("format", "csv"),
    )


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_format_cell(v) for v in value)
    return str(value)


def write_rows(columns: list[str], rows: list[dict[str, Any]], path: str | None, fmt: str) -> None:
    """Emit rows to path (or stdout) in csv or json with a version header."""
    if fmt == "json":
        text = json.dumps({"relaylab_version": __version__, "rows": rows}, indent=2) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# relaylab {__version__}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in columns])
        text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _resolve_point(
    cfg: ExperimentConfig, ch: RelayChannelSpec
) -> tuple[CodingDistribution, float, float]:
    """Operating point plus both best-compression rates for the config."""
    rates = cf_rates(ch, cfg.search)
    if cfg.distribution is not None:
        d = cfg.distribution
    else:
        d = rates["minform"][1]
    return d, rates["minform"][0], rates["constrained"][0]


def cmd_rates(cfg: ExperimentConfig, seed: int) -> list[dict[str, Any]]:
    """One row: every bound at the operating point plus search results."""
    ch = cfg.channel()
    kind, params = cfg.channel_echo()
    d, minform, constrained = _resolve_point(cfg, ch)
    report = evaluate_bounds(ch, d)
    row: dict[str, Any] = {
        "channel_kind": kind,
        "channel_params": params,
        "seed": seed,
        "distribution_source": cfg.distribution_source,
        "grid_resolution": cfg.search.grid_resolution,
        "yhat_max_size": cfg.search.resolve_yhat(ch),
        "include_degenerate": cfg.search.include_degenerate,
        "cf_rate_minform[bits/use]": minform,
        "cf_rate_constrained[bits/use]": constrained,
    }
    for f in dataclasses.fields(RegionReport):
        row[f.name + "[bits/use]"] = getattr(report, f.name)
    return [{c: row[c] for c in RATES_COLUMNS}]


def _parse_sweeps(specs: list[str]) -> list[tuple[str, list[Any]]]:
    sweeps = []
    for spec in specs:
        field, _, raw = spec.partition("=")
        if field not in SWEEP_FIELDS or not raw:
            raise ConfigError(
                f"bad sweep {spec!r}; use field=v1,v2 with field in {sorted(SWEEP_FIELDS)}"
            )
        cast = SWEEP_FIELDS[field]
        try:
            values = [cast(v) for v in raw.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad sweep value in {spec!r}: {exc}") from exc
        sweeps.append((field, values))
    return sweeps


def cmd_simulate(
    cfg: ExperimentConfig, seed: int | None, trials: int | None, sweep_specs: list[str]
) -> list[dict[str, Any]]:
    """One row per sweep point; oversize codebooks become skipped rows."""
    if cfg.sim is None:
        raise ConfigError("simulate needs a 'sim' block in the config")
    ch = cfg.channel()
    kind, params = cfg.channel_echo()
    if cfg.distribution is not None:
        d = cfg.distribution
    else:
        d = cf_rates(ch, cfg.search)["minform"][1]
    base = cfg.sim if seed is None else dataclasses.replace(cfg.sim, seed=seed)
    n_trials = cfg.trials if trials is None else trials
    sweeps = _parse_sweeps(sweep_specs)

    points = [base]
    for field, values in sweeps:
        points = [dataclasses.replace(p, **{field: v}) for p in points for v in values]

    rows = []
    for p in points:
        row: dict[str, Any] = {
            "channel_kind": kind,
            "channel_params": params,
            "seed": p.seed,
            "distribution_source": cfg.distribution_source,
            "decoder": p.decoder,
            "metric": p.metric,
            "n": p.n,
            "B": p.B,
            "last_block_factor": p.last_block_factor,
            "R[bits/use]": p.R,
            "R2[bits/use]": p.R2,
            "epsilon": p.epsilon,
            "trials": n_trials,
            "effective_rate[bits/use]": p.effective_rate,
            "effective_index_rate[bits/use]": p.effective_index_rate,
        }
        try:
            stats = run_monte_carlo(ch, d, p, trials=n_trials)
        except SizeLimitError as exc:
            row.update(
                status="skipped",
                reason=str(exc),
                **{
                    "message_error_rate[prob]": None,
                    "quantization_failure_rate[prob]": None,
                    "index_error_rate[prob]": None,
                    "per_block_error[prob]": None,
                },
            )
        else:
            row.update(
                status="ok",
                reason="",
                **{
                    "message_error_rate[prob]": stats.message_error_rate,
                    "quantization_failure_rate[prob]": stats.quantization_failure_rate,
                    "index_error_rate[prob]": stats.index_error_rate,
                    "per_block_error[prob]": list(stats.per_block_error),
                },
            )
        rows.append({c: row[c] for c in SIMULATE_COLUMNS})
    return rows


def cmd_verify(level: str, seed: int) -> int:
    """Run the self-check suite; nonzero exit when any check fails."""
    results = run_checks(level=level, seed=seed)
    failed = 0
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        failed += not r.passed
        print(f"[{mark}] {r.name}: {r.detail} ({r.seconds:.1f}s)")
    print(f"{len(results) - failed}/{len(results)} checks passed at level {level}")
    return 1 if failed else 0


def _parse_params(pairs: list[str]) -> dict[str, Any]:
    params: dict[str, Any] = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"bad --param {pair!r}; use name=value")
        try:
            params[key] = int(raw)
        except ValueError:
            try:
                params[key] = float(raw)
            except ValueError:
                params[key] = raw
    return params


def cmd_export_channel(kind: str, params: list[str], output: str) -> int:
    """Materialize a named channel into the documented JSON file format."""
    ch = make_channel(ChannelRecipe(kind, _parse_params(params)))
    save_channel_file(ch, output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaylab",
        description="Rate regions and Monte Carlo error rates for relay coding experiments.",
    )
    parser.add_argument("--version", action="version", version=f"relaylab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="experiment config JSON path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--output", default=None, help="override the config output path")
        p.add_argument("--format", choices=("csv", "json"), default=None)

    rates = sub.add_parser("rates", help="evaluate all rate bounds and searches")
    common(rates)

    simulate = sub.add_parser("simulate", help="Monte Carlo block error rates")
    common(simulate)
    simulate.add_argument("--trials", type=int, default=None, help="override config trials")
    simulate.add_argument("--workers", type=int, default=None, help="override sim workers")
    simulate.add_argument(
        "--sweep",
        action="append",
        default=[],
        metavar="FIELD=V1,V2",
        help=f"sweep one of {sorted(SWEEP_FIELDS)}; repeatable, cartesian product",
    )

    verify = sub.add_parser("verify", help="run the self-check suite")
    verify.add_argument("--level", choices=LEVELS, default="fast")
    verify.add_argument("--seed", type=int, default=0)

    export = sub.add_parser("export-channel", help="write a named channel to a file")
    export.add_argument("--kind", required=True)
    export.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    export.add_argument("--output", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.level, args.seed)
        if args.command == "export-channel":
            return cmd_export_channel(args.kind, args.param, args.output)
        cfg = load_config(args.config)
        out_path = args.output if args.output is not None else cfg.output_path
        out_fmt = args.format if args.format is not None else cfg.output_format
        if args.command == "rates":
            rows = cmd_rates(cfg, args.seed if args.seed is not None else 0)
            write_rows(RATES_COLUMNS, rows, out_path, out_fmt)
            return 0
        if args.command == "simulate":
            if args.workers is not None and cfg.sim is not None:
                cfg = dataclasses.replace(
                    cfg, sim=dataclasses.replace(cfg.sim, workers=args.workers)
                )
            rows = cmd_simulate(cfg, args.seed, args.trials, args.sweep)
            write_rows(SIMULATE_COLUMNS, rows, out_path, out_fmt)
            return 0
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError) as exc:
        print(f"relaylab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
