"""Batch command-line front-end.

Subcommands: simulate | calibrate | test | size | power | verify-bounds
| consistency | serve.  All randomness flows from one master seed; any
config field can be overridden by a flag.  Exit codes: 0 success,
2 config error, 3 calibration missing, 4 data error.

``simulate`` and ``test`` accept ``--server URL`` to run against a
running episcan HTTP service instead of computing in-process.
"""

from __future__ import annotations

import json
import sys
import urllib.request
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import click
import numpy as np

from . import ar1, experiments, innovations as innov, limits
from .errors import (
    CalibrationRequiredError,
    ConfigError,
    DataError,
    EpiscanError,
    ParameterError,
)
from .inference import HeavyTailMode, LightTailMode, run_test, validate_mode

_EXIT_CODES = [
    (ConfigError, 2),
    (ParameterError, 2),
    (CalibrationRequiredError, 3),
    (DataError, 4),
]


def _fail(exc: Exception) -> None:
    code = 1
    for etype, ecode in _EXIT_CODES:
        if isinstance(exc, etype):
            code = ecode
            break
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
    sys.stderr.write("\n")
    sys.exit(code)


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _override(config: dict, **kwargs) -> dict:
    out = dict(config)
    for key, value in kwargs.items():
        if value is not None:
            out[key] = value
    return out


def _require(config: dict, key: str):
    if key not in config:
        raise ConfigError(f"config field {key!r} is required")
    return config[key]


def _write_csv(path, header: Sequence[str], rows) -> None:
    lines = ["# generated_at=" + datetime.now(timezone.utc).isoformat()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_cell(row[h]) for h in header))
    Path(path).write_text("\n".join(lines) + "\n")


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return '"' + json.dumps(value).replace('"', '""') + '"'
    return str(value)


def _tables_for(
    alphas: Sequence[float],
    calib: experiments.CalibrationParams,
    master_seed: int,
    threads: int,
    tables_dir: Optional[str],
) -> dict:
    tables = {}
    for alpha in alphas:
        path = None
        if tables_dir:
            name = (
                f"table_a{alpha}_g{calib.grid_n}_r{calib.reps}_s{master_seed}.json"
            )
            path = Path(tables_dir) / name
            if path.exists():
                table = limits.load_table(path)
                if (table.grid_n, table.reps, table.master_seed) == (
                    calib.grid_n,
                    calib.reps,
                    master_seed,
                ):
                    tables[alpha] = table
                    continue
        tables[alpha] = calib.table(alpha, master_seed, threads=threads)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            limits.save_table(tables[alpha], path)
    return tables


def _post_json(server: str, endpoint: str, payload: dict) -> dict:
    req = urllib.request.Request(
        server.rstrip("/") + endpoint,
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return json.load(resp)
    except urllib.error.HTTPError as exc:  # pragma: no cover - network path
        raise DataError(f"server error {exc.code}: {exc.read().decode()}") from exc


@click.group()
def main() -> None:
    """Epidemic change detection in AR(1) innovations."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--seed", type=int)
@click.option("--n", type=int)
@click.option("--out", type=click.Path(), required=True)
@click.option("--server", type=str, default=None, help="episcan service URL")
def simulate(config_path, seed, n, out, server) -> None:
    """Simulate one series and write the (index, y, eps, tau, z) CSV."""
    try:
        cfg = _override(_load_config(config_path), seed=seed, n=n)
        model = ar1.model_from_json(_require(cfg, "model"))
        epidemic = ar1.EpidemicSpec.from_json(
            cfg.get("epidemic", ar1.EpidemicSpec.null().to_json())
        )
        spec = innov.spec_from_json(_require(cfg, "innovation"))
        n_val = int(_require(cfg, "n"))
        master_seed = int(cfg.get("seed", 0))
        replicate = int(cfg.get("replicate", 0))
        if server:
            payload = {
                "model": ar1.model_to_json(model),
                "epidemic": epidemic.to_json(),
                "innovation": innov.spec_to_json(spec),
                "n": n_val,
                "seed": master_seed,
                "replicate": replicate,
            }
            data = _post_json(server, "/simulate", payload)
            bundle = ar1.SeriesBundle(
                y=np.asarray(data["y"]),
                tau=np.asarray(data["tau"]),
                z=np.asarray(data["z"]),
                eps=np.asarray(data["eps"]),
            )
        else:
            eps = innov.sample_innovations(
                spec, n_val, innov.Stream(master_seed, replicate)
            )
            bundle = ar1.simulate(model, epidemic, eps)
        ar1.bundle_to_csv(bundle, out)
    except EpiscanError as exc:
        _fail(exc)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--alpha", type=float)
@click.option("--grid-n", "grid_n", type=int)
@click.option("--reps", type=int)
@click.option("--seed", type=int)
@click.option("--threads", type=int, default=1)
@click.option("--out", type=click.Path(), required=True)
@click.option("--sample-csv", type=click.Path(), default=None)
def calibrate(config_path, alpha, grid_n, reps, seed, threads, out, sample_csv):
    """Monte-Carlo calibration of the light-tail limit law."""
    try:
        cfg = _override(
            _load_config(config_path), alpha=alpha, grid_n=grid_n, reps=reps, seed=seed
        )
        table = limits.build_table(
            alpha=float(_require(cfg, "alpha")),
            grid_n=int(cfg.get("grid_n", 2048)),
            reps=int(cfg.get("reps", 10_000)),
            master_seed=int(cfg.get("seed", 0)),
            threads=threads,
        )
        limits.save_table(table, out)
        if sample_csv:
            _write_csv(
                sample_csv,
                ["rank", "value"],
                [
                    {"rank": i + 1, "value": float(v)}
                    for i, v in enumerate(table.sample)
                ],
            )
        click.echo(json.dumps({"digest": table.sample_digest, "quantiles": table.quantiles}))
    except EpiscanError as exc:
        _fail(exc)


def _mode_from_config(cfg: dict):
    mode_cfg = _require(cfg, "mode")
    kind = mode_cfg.get("kind")
    if kind == "light_tail":
        return LightTailMode(p=float(mode_cfg.get("p", 2.0)), sigma=mode_cfg.get("sigma"))
    if kind == "heavy_tail":
        spec = (
            innov.spec_from_json(mode_cfg["innovation"])
            if "innovation" in mode_cfg
            else None
        )
        return HeavyTailMode(
            p=float(_require(mode_cfg, "p")), b_n=mode_cfg.get("b_n"), spec=spec
        )
    raise ConfigError(f"mode.kind must be light_tail or heavy_tail, got {kind!r}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--series", "series_path", type=click.Path(exists=True), required=True)
@click.option("--table", "table_path", type=click.Path(), default=None)
@click.option("--alpha", type=float)
@click.option("--level", type=float)
@click.option("--out", type=click.Path(), default=None)
@click.option("--server", type=str, default=None, help="episcan service URL")
def test(config_path, series_path, table_path, alpha, level, out, server) -> None:
    """Run the residual scan test on a series CSV; emit a JSON report."""
    try:
        cfg = _override(_load_config(config_path), alpha=alpha, level=level)
        bundle = ar1.bundle_from_csv(series_path)
        alpha_val = float(_require(cfg, "alpha"))
        level_val = float(cfg.get("level", 0.05))
        if server:
            payload = {
                "y": bundle.y.tolist(),
                "alpha": alpha_val,
                "level": level_val,
                "mode": _require(cfg, "mode"),
            }
            report_json = json.dumps(_post_json(server, "/test", payload))
        else:
            mode = _mode_from_config(cfg)
            validate_mode(alpha_val, mode)
            table = None
            if table_path:
                table = limits.load_table(table_path)
            elif isinstance(mode, LightTailMode):
                raise CalibrationRequiredError(
                    "light-tail test needs --table (run `episcan calibrate`)"
                )
            report = run_test(
                bundle.y,
                alpha_val,
                mode,
                level=level_val,
                table=table,
                k_min=int(cfg.get("k_min", 0)),
                scale_ratio=cfg.get("scale_ratio"),
            )
            report_json = report.to_json()
        if out:
            Path(out).write_text(report_json + "\n")
        click.echo(report_json)
    except EpiscanError as exc:
        _fail(exc)


def _experiment_common(cfg: dict, threads: int):
    alphas = [float(a) for a in _require(cfg, "alpha")]
    seed = int(cfg.get("seed", 0))
    level = float(cfg.get("level", 0.05))
    calib_cfg = cfg.get("calibration", {})
    calib = experiments.CalibrationParams(
        grid_n=int(calib_cfg.get("grid_n", 2048)),
        reps=int(calib_cfg.get("reps", 10_000)),
    )
    tables = _tables_for(alphas, calib, seed, threads, cfg.get("tables_dir"))
    return alphas, seed, level, tables


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int)
@click.option("--level", type=float)
@click.option("--threads", type=int, default=1)
@click.option("--out", type=click.Path(), required=True)
def size(config_path, seed, level, threads, out) -> None:
    """Empirical size under the null across models, n and alpha."""
    try:
        cfg = _override(_load_config(config_path), seed=seed, level=level)
        alphas, seed_val, level_val, tables = _experiment_common(cfg, threads)
        models = [ar1.model_from_json(m) for m in _require(cfg, "models")]
        rows = experiments.size_experiment(
            models=models,
            spec=innov.spec_from_json(_require(cfg, "innovation")),
            n_list=[int(v) for v in _require(cfg, "n")],
            alphas=alphas,
            reps=int(cfg.get("reps", 2000)),
            level=level_val,
            tables=tables,
            master_seed=seed_val,
            threads=threads,
        )
        _write_csv(
            out,
            ["model", "n", "alpha", "level", "rejection_rate", "reps", "mc_stderr"],
            rows,
        )
    except EpiscanError as exc:
        _fail(exc)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int)
@click.option("--level", type=float)
@click.option("--threads", type=int, default=1)
@click.option("--out", type=click.Path(), required=True)
def power(config_path, seed, level, threads, out) -> None:
    """Rejection rate under epidemics of length ceil(theta * n**beta)."""
    try:
        cfg = _override(_load_config(config_path), seed=seed, level=level)
        alphas, seed_val, level_val, tables = _experiment_common(cfg, threads)
        rows = experiments.power_experiment(
            model=ar1.model_from_json(_require(cfg, "model")),
            spec=innov.spec_from_json(_require(cfg, "innovation")),
            n_list=[int(v) for v in _require(cfg, "n")],
            alphas=alphas,
            thetas=[float(t) for t in _require(cfg, "theta")],
            amplitude=float(cfg.get("a", 1.0)),
            reps=int(cfg.get("reps", 500)),
            level=level_val,
            tables=tables,
            master_seed=seed_val,
            beta=cfg.get("beta"),
            k_frac=float(cfg.get("k_frac", 0.5)),
            threads=threads,
        )
        _write_csv(
            out,
            ["n", "alpha", "beta", "theta", "a", "ell_star", "rejection_rate"],
            rows,
        )
    except EpiscanError as exc:
        _fail(exc)


@main.command(name="verify-bounds")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
def verify_bounds(config_path, out) -> None:
    """Deterministic drift-bound and closed-form-sum verification grid."""
    try:
        cfg = _load_config(config_path)
        rows = experiments.verify_bounds(cfg.get("grid"))
        failures = [
            r
            for r in rows
            if not (r["upper_bound_ok"] and r["lower_bound_ok"] and r["drift_sum_ok"])
        ]
        if out:
            _write_csv(
                out,
                [
                    "phi",
                    "alpha",
                    "ell_star",
                    "k_star",
                    "amplitude",
                    "upper_bound_ok",
                    "lower_bound_ok",
                    "drift_sum_ok",
                ],
                rows,
            )
        click.echo(
            json.dumps(
                {"configurations": len(rows), "failures": len(failures), "pass": not failures}
            )
        )
        if failures:
            sys.exit(1)
    except EpiscanError as exc:
        _fail(exc)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int)
@click.option("--level", type=float)
@click.option("--threads", type=int, default=1)
@click.option("--out", type=click.Path(), required=True)
def consistency(config_path, seed, level, threads, out) -> None:
    """Median normalized statistic across n under a fixed epidemic profile."""
    try:
        cfg = _override(_load_config(config_path), seed=seed, level=level)
        alphas, seed_val, level_val, tables = _experiment_common(cfg, threads)
        rows = experiments.consistency_experiment(
            model=ar1.model_from_json(_require(cfg, "model")),
            spec=innov.spec_from_json(_require(cfg, "innovation")),
            n_list=[int(v) for v in _require(cfg, "n")],
            alphas=alphas,
            amplitude=float(cfg.get("a", 1.0)),
            beta=float(_require(cfg, "beta")),
            reps=int(cfg.get("reps", 500)),
            level=level_val,
            tables=tables,
            master_seed=seed_val,
            k_frac=float(cfg.get("k_frac", 0.5)),
            threads=threads,
        )
        _write_csv(
            out,
            [
                "n",
                "alpha",
                "ell_star",
                "normalized_statistic_median",
                "rejection_rate",
                "perturbation_ratio",
            ],
            rows,
        )
    except EpiscanError as exc:
        _fail(exc)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--tables-dir", type=click.Path(), default=None)
def serve(host, port, tables_dir) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(tables_dir=tables_dir), host=host, port=port)


if __name__ == "__main__":
    main()
