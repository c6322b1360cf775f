"""Batch command line: ingest, describe, ols, fit, elasticity, price, synth and replay.

Settings resolve as command-line flags over a TOML config file over the
built-in defaults. Every command writes a run manifest (input hashes, the
fully resolved configuration, seed and version) next to its output; the
``replay`` command re-executes a manifest and checks the outputs match.
"""
from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
import warnings
from pathlib import Path
from typing import Callable

import numpy as np
import pandas as pd

from . import __version__
from .data import DataError, Dataset, ingest, load_archive, read_tariffs, save_archive
from .describe import GROUPINGS, settlement_pair_matrix, share_growth_table
from .design import Specification, build_design_matrix
from .elasticity import (DEFAULT_BANDS, elasticity_distribution, group_elasticity, parse_bands,
                         plot_histogram)
from .forest import (ForestConfig, attach_dataset, cv_r2, fit_forest, load_forest, save_forest, variable_family,
                     variable_importance)
from .linreg import InsufficientDataError, fit_by_fare_category, fit_ols
from .pricing import ScheduleError, TariffSchedule, read_bounds, recommend, recommendations_frame, revenue_delta, \
    summary_text
from .synth import PRESETS, SynthError, config_from_mapping, generate, write_bundle
from .tree import TreeConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

RUN_MANIFEST = "run_manifest.json"
INPUT_FILES = {"tickets": "tickets.csv", "stations": "stations.csv", "tariffs": "tariffs.csv", "cpi": "cpi.csv",
               "zones": "zones.csv"}

DEFAULTS: dict = {
    "seed": 0,
    "threads": 1,
    "ingest": {"base_period": None},
    "describe": {"grouping": "direction"},
    "ols": {"spec": "IV", "fare_category": None},
    "tree": TreeConfig().to_dict(),
    "ensemble": {"trees": 2000, "subsample": 0.75, "with_replacement": False, "fare_category": "FullSingle"},
    "elasticity": {"perturbation": 0.10, "bins": 50, "tol": 0.05, "bands": None},
    "pricing": {"year": None, "hold_band": 0.05, "lower": 0.10, "upper": 0.10, "marginal_cost": 0.0,
                "group_by": "direction"},
    "synth": {"preset": "paper"},
}


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# error code prefixes
E_INPUT = "RD001"
E_DATA = "RD002"
E_CONFIG = "RD003"
E_SCHEDULE = "RD004"
E_SYNTH = "RD005"
E_ESTIMATE = "RD006"
E_REPLAY = "RD007"
E_INTERNAL = "RD099"


# -- configuration -----------------------------------------------------------

def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "synth":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config_file(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise CliError(E_INPUT, f"config file not found: {p}")
    try:
        data = tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise CliError(E_CONFIG, f"{p}: {exc}") from None
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise CliError(E_CONFIG, f"{p}: unknown sections {sorted(unknown)}")
    return data


FLAG_TARGETS = {
    # flag dest -> config path, per command where it differs
    "seed": ("seed",),
    "threads": ("threads",),
    "spec": ("ols", "spec"),
    "trees": ("ensemble", "trees"),
    "subsample": ("ensemble", "subsample"),
    "perturbation": ("elasticity", "perturbation"),
    "bands": ("elasticity", "bands"),
    "grouping": ("describe", "grouping"),
    "base_period": ("ingest", "base_period"),
    "year": ("pricing", "year"),
    "hold_band": ("pricing", "hold_band"),
    "preset": ("synth", "preset"),
}


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if getattr(args, "config", None):
        cfg = _merge(cfg, load_config_file(args.config))
    for dest, path in FLAG_TARGETS.items():
        value = getattr(args, dest, None)
        if value is not None:
            node = cfg
            for k in path[:-1]:
                node = node[k]
            node[path[-1]] = value
    if args.command == "synth":
        # the generator's seed: --seed, else [synth] seed, else the top-level seed
        if args.seed is not None or "seed" not in cfg["synth"]:
            cfg["synth"]["seed"] = cfg["seed"]
        cfg["seed"] = cfg["synth"]["seed"]
    fc = getattr(args, "fare_category", None)
    if fc is not None:
        section = "ols" if args.command == "ols" else "ensemble"
        cfg[section]["fare_category"] = fc
    return cfg


# -- manifests ---------------------------------------------------------------

def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def hash_tree(path) -> dict[str, str]:
    """sha256 of a file, or of every file below a directory (keyed by relative path)."""
    p = Path(path)
    if p.is_file():
        return {p.name: sha256_file(p)}
    out = {}
    for f in sorted(p.rglob("*")):
        if f.is_file() and f.name != RUN_MANIFEST and not f.name.endswith(".manifest.json"):
            out[f.relative_to(p).as_posix()] = sha256_file(f)
    return out


def hash_outputs(out: Path, companions: list[Path] = ()) -> dict[str, str]:
    """Output hashes keyed independently of where the output was written, so a
    replay to another path compares equal. A file output is keyed "." and each
    companion file by its name with the output's stem removed."""
    if out.is_dir():
        return hash_tree(out)
    hashes = {".": sha256_file(out)}
    for c in companions:
        hashes[c.name.removeprefix(out.stem)] = sha256_file(c)
    return hashes


def manifest_path(out: Path) -> Path:
    return out / RUN_MANIFEST if out.is_dir() else out.with_name(out.name + ".manifest.json")


def write_manifest(command: str, inputs: dict[str, str], config: dict, out: Path,
                   companions: list[Path] = ()) -> Path:
    manifest = {
        "tool": "raildemand", "version": __version__, "command": command,
        "inputs": {k: {"path": v, "sha256": hash_tree(v)} for k, v in sorted(inputs.items())},
        "config": {k: v for k, v in config.items() if k != "threads"},
        "seed": config["seed"],
        "outputs": hash_outputs(out, companions),
    }
    path = manifest_path(out)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _out(path: str | None, is_dir: bool) -> Path:
    if not path:
        raise CliError(E_CONFIG, "--out is required")
    p = Path(path)
    if is_dir:
        p.mkdir(parents=True, exist_ok=True)
    else:
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _load(path: str) -> Dataset:
    p = Path(path)
    if not p.exists():
        raise CliError(E_INPUT, f"archive not found: {p}")
    return load_archive(p)


def _write_csv(df: pd.DataFrame, path: Path, **kw) -> None:
    df.to_csv(path, lineterminator="\n", float_format="%.17g", **kw)


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


def _select_category(dataset: Dataset, category: str | None) -> Dataset:
    if category in (None, "all"):
        return dataset
    mask = dataset.records["fare_category"].to_numpy() == category
    if not mask.any():
        raise CliError(E_DATA, f"no records with fare category {category!r}")
    return dataset.subset(mask)


# -- commands ----------------------------------------------------------------
# Each returns (inputs, output path); the caller writes the manifest.

def cmd_ingest(cfg: dict, paths: dict) -> tuple[dict, Path]:
    files = {}
    base = Path(paths["inputs"]) if paths.get("inputs") else None
    for key, name in INPUT_FILES.items():
        given = paths.get(key)
        f = Path(given) if given else (base / name if base else None)
        if f is None or not f.exists():
            raise CliError(E_INPUT, f"input file not found: {f if f else name}")
        files[key] = str(f)
    bp = cfg["ingest"]["base_period"]
    if isinstance(bp, str):
        try:
            y, m = bp.split("-")
            bp = (int(y), int(m))
        except ValueError:
            raise CliError(E_CONFIG, f"base period must be YYYY-MM, got {bp!r}") from None
    ds = ingest(files["tickets"], files["stations"], files["tariffs"], files["cpi"], files["zones"], bp)
    if len(ds) == 0:
        warnings.warn("tickets file holds no tickets; the archive has 0 records")
    out = _out(paths.get("out"), True)
    save_archive(ds, out)
    print(f"records: {len(ds)}")
    print(f"routes: {len(ds.routes)}")
    print(f"stations: {len(ds.stations)}")
    return files, out


def _growth_path(out: Path) -> Path:
    return out.with_name(out.stem + "_growth.csv")


def cmd_describe(cfg: dict, paths: dict) -> tuple[dict, Path]:
    ds = _load(paths["archive"])
    grouping = cfg["describe"]["grouping"]
    if grouping not in GROUPINGS:
        raise CliError(E_CONFIG, f"unknown grouping {grouping!r}; valid groupings: {', '.join(GROUPINGS)}")
    out = _out(paths.get("out"), False)
    table = share_growth_table(ds, grouping)
    if grouping == "settlement_pair":
        _write_csv(settlement_pair_matrix(ds), out)
        _write_csv(table, _growth_path(out), index=False)
    else:
        _write_csv(table, out, index=False)
    return {"archive": paths["archive"]}, out


def cmd_ols(cfg: dict, paths: dict) -> tuple[dict, Path]:
    ds = _load(paths["archive"])
    spec = cfg["ols"]["spec"]
    specs = [s.value for s in Specification] if spec == "all" else [spec]
    for s in specs:
        try:
            Specification(s)
        except ValueError:
            raise CliError(E_CONFIG, f"unknown specification {s!r}; valid: I, II, III, IV, all") from None
    category = cfg["ols"]["fare_category"]
    report = {}
    for s in specs:
        if category == "each":
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                fits = fit_by_fare_category(ds, s)
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
            report[s] = {c: f.to_dict() for c, f in fits.items()}
        else:
            sub = _select_category(ds, category)
            fit = fit_ols(build_design_matrix(sub, s), sub.records["log_tickets"].to_numpy())
            report[s] = fit.to_dict()
            lo, hi = fit.confint("log_real_fare")
            print(f"spec {s}: alpha = {fit['log_real_fare']:.4f} [{lo:.4f}, {hi:.4f}], r2 = {fit.r2:.4f}, "
                  f"n = {fit.n_obs}")
    out = _out(paths.get("out"), False)
    _dump_json(report, out)
    return {"archive": paths["archive"]}, out


def _forest_config(cfg: dict) -> ForestConfig:
    tree = TreeConfig.from_dict(cfg["tree"])
    e = cfg["ensemble"]
    return ForestConfig(tree, int(e["trees"]), float(e["subsample"]), int(cfg["seed"]), bool(e["with_replacement"]))


def cmd_fit(cfg: dict, paths: dict) -> tuple[dict, Path]:
    ds = _load(paths["archive"])
    category = cfg["ensemble"]["fare_category"]
    sub = _select_category(ds, category)
    fc = _forest_config(cfg)
    try:
        forest = fit_forest(sub, fc, threads=int(cfg["threads"]))
    except (ValueError, KeyError) as exc:
        raise CliError(E_ESTIMATE, str(exc)) from None
    forest.meta = {"fare_category": category}
    out = _out(paths.get("out"), True)
    save_forest(forest, out / "forest")
    r2 = cv_r2(forest)
    imp = variable_importance(forest)
    _write_csv(imp.to_frame(), out / "importance.csv", index=False)
    _write_csv(imp.grouped(variable_family).to_frame(), out / "importance_grouped.csv", index=False)
    oob = pd.DataFrame(sub.record_keys(), columns=["origin", "destination", "year", "month", "fare_category"])
    oob["log_tickets"] = forest.response
    oob["oob_prediction"] = forest.oob_predictions()
    oob["oob_trees"] = forest.oob_counts()
    _write_csv(oob, out / "oob.csv", index=False)
    try:
        pooled = fit_ols(build_design_matrix(sub, "IV"), sub.records["log_tickets"].to_numpy()).r2
    except InsufficientDataError:
        pooled = None
    report = {"cv_r2": r2, "pooled_ols_r2": pooled, "n_records": len(sub), "n_trees": len(forest),
              "total_partitions": imp.total_partitions, "fare_category": category,
              "importance": dict(imp.ranked())}
    _dump_json(report, out / "report.json")
    print(f"cv_r2: {r2:.4f}" + ("" if pooled is None else f" (pooled OLS r2: {pooled:.4f})"))
    for name, share in imp.ranked()[:10]:
        print(f"  {name:28s} {100 * share:6.2f}%")
    return {"archive": paths["archive"]}, out


def _load_forest_for(paths: dict, ds: Dataset):
    fdir = Path(paths["forest"])
    fdir = fdir / "forest" if (fdir / "forest" / "manifest.json").exists() else fdir
    if not (fdir / "manifest.json").exists():
        raise CliError(E_INPUT, f"forest not found: {paths['forest']}")
    forest = load_forest(fdir)
    sub = _select_category(ds, forest.meta.get("fare_category"))
    try:
        attach_dataset(forest, sub)
    except ValueError as exc:
        raise CliError(E_DATA, f"forest does not match archive: {exc}") from None
    return forest, sub


def cmd_elasticity(cfg: dict, paths: dict) -> tuple[dict, Path]:
    ds = _load(paths["archive"])
    forest, sub = _load_forest_for(paths, ds)
    e = cfg["elasticity"]
    try:
        bands = parse_bands(e["bands"]) if isinstance(e["bands"], str) else (e["bands"] or DEFAULT_BANDS)
    except ValueError as exc:
        raise CliError(E_CONFIG, f"bad --bands: {exc}") from None
    report = elasticity_distribution(forest, sub, bins=int(e["bins"]), tol=float(e["tol"]),
                                     perturbation=float(e["perturbation"]), threads=int(cfg["threads"]))
    try:
        table = group_elasticity(report, sub, bands)
    except ValueError as exc:
        raise CliError(E_CONFIG, str(exc)) from None
    out = _out(paths.get("out"), True)
    report.to_csv(out / "elasticities.csv")
    report.to_json(out / "distribution.json")
    table.to_csv(out / "groups.csv")
    _write_csv(table.cells, out / "group_cells.csv", index=False)
    plot_histogram(report, out / "histogram.svg")
    print(f"mean elasticity: {report.mean:.4f}")
    for k, v in report.shares.items():
        print(f"  {k:15s} {100 * v:6.2f}%")
    return {"archive": paths["archive"], "forest": paths["forest"]}, out


def cmd_price(cfg: dict, paths: dict) -> tuple[dict, Path]:
    ds = _load(paths["archive"])
    forest, sub = _load_forest_for(paths, ds)
    pc = cfg["pricing"]
    year = pc["year"] if pc["year"] is not None else int(sub.records["year"].max())
    inputs = {"archive": paths["archive"], "forest": paths["forest"]}
    try:
        tariffs = read_tariffs(paths["schedule"]) if paths.get("schedule") else sub.tariffs
        bounds = read_bounds(paths["bounds"]) if paths.get("bounds") else None
        baseline = TariffSchedule.from_tables(tariffs, bounds, year)
        proposed = baseline
        if paths.get("proposed"):
            proposed = TariffSchedule.from_tables(read_tariffs(paths["proposed"]), bounds, year)
            inputs["proposed"] = paths["proposed"]
    except ScheduleError as exc:
        raise CliError(E_SCHEDULE, str(exc)) from None
    for k in ("schedule", "bounds"):
        if paths.get(k):
            inputs[k] = paths[k]

    group_by = pc["group_by"]
    rep = elasticity_distribution(forest, sub, tol=cfg["elasticity"]["tol"],
                                  perturbation=float(cfg["elasticity"]["perturbation"]), threads=int(cfg["threads"]))
    groups = sub.records[group_by].to_numpy()
    zones = sub.records["zone"].to_numpy(dtype=int)
    elasticity, current, fb = {}, {}, {}
    for g in sorted(set(groups.tolist())):
        sel = groups == g
        elasticity[g] = float(rep.values[sel].mean())
        zs = zones[sel]
        fares = np.array([baseline.full_fare[z] for z in zs])
        current[g] = float(fares.mean())
        headroom = min(baseline.rst_upper_bound[z] / baseline.full_fare[z] for z in set(zs.tolist()))
        fb[g] = (current[g] * (1 - pc["lower"]), current[g] * min(1 + pc["upper"], headroom))
    recs = recommend(elasticity, current, fb, pc["hold_band"], pc["marginal_cost"])
    delta = revenue_delta(forest, sub, proposed, baseline, group_by)
    out = _out(paths.get("out"), True)
    _write_csv(recommendations_frame(recs), out / "recommendations.csv", index=False)
    (out / "summary.txt").write_text(summary_text(recs))
    _write_csv(delta.groups, out / "revenue_delta.csv", index=False)
    _dump_json({"baseline_total": delta.baseline_total, "proposed_total": delta.proposed_total,
                "delta": delta.delta, "delta_pct": delta.delta_pct, "year": year}, out / "revenue_delta.json")
    sys.stdout.write(summary_text(recs))
    print(f"revenue change under proposed schedule: {delta.delta_pct:+.3f}%")
    return inputs, out


def cmd_synth(cfg: dict, paths: dict) -> tuple[dict, Path]:
    try:
        config = config_from_mapping(cfg["synth"])
        ds, truth = generate(config)
    except (SynthError, TypeError, ValueError) as exc:
        raise CliError(E_SYNTH, str(exc)) from None
    out = _out(paths.get("out"), True)
    write_bundle(ds, truth, out, config)
    print(f"records: {len(ds)}")
    print(f"segments: {', '.join(sorted(set(truth.table['segment'])))}")
    return {}, out


COMMANDS: dict[str, Callable] = {
    "ingest": cmd_ingest, "describe": cmd_describe, "ols": cmd_ols, "fit": cmd_fit,
    "elasticity": cmd_elasticity, "price": cmd_price, "synth": cmd_synth,
}
PATH_KEYS = ("inputs", "tickets", "stations", "tariffs", "cpi", "zones", "archive", "forest", "schedule", "bounds",
             "proposed", "out")


def run(command: str, cfg: dict, paths: dict) -> Path:
    inputs, out = COMMANDS[command](cfg, paths)
    stored = {k: v for k, v in paths.items() if k in PATH_KEYS and v is not None}
    write_manifest(command, inputs, {**cfg, "paths": stored}, out, _companions(command, cfg, out))
    return out


def _companions(command: str, cfg: dict, out: Path) -> list[Path]:
    if command == "describe" and cfg["describe"]["grouping"] == "settlement_pair":
        return [_growth_path(out)]
    return []


def cmd_replay(manifest_file: str, threads: int | None, out: str | None) -> None:
    mpath = Path(manifest_file)
    if not mpath.exists():
        raise CliError(E_INPUT, f"manifest not found: {mpath}")
    m = json.loads(mpath.read_text())
    for name, entry in m["inputs"].items():
        p = Path(entry["path"])
        if not p.exists():
            raise CliError(E_INPUT, f"input {name} not found: {p}")
        if hash_tree(p) != entry["sha256"]:
            raise CliError(E_REPLAY, f"input {name} ({p}) changed since the manifest was written")
    cfg = copy.deepcopy(m["config"])
    paths = cfg.pop("paths")
    cfg["threads"] = threads or 1
    if out:
        paths["out"] = out
    result = run(m["command"], cfg, paths)
    got = hash_outputs(result, _companions(m["command"], cfg, result))
    if got != m["outputs"]:
        diff = sorted(k for k in set(got) | set(m["outputs"]) if got.get(k) != m["outputs"].get(k))
        raise CliError(E_REPLAY, f"replayed outputs differ from the manifest: {', '.join(diff)}")
    print(f"replay ok: {len(got)} output file(s) identical")


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="output file or directory")

    p = argparse.ArgumentParser(prog="raildemand", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"raildemand {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="validate raw CSVs into a dataset archive")
    s.add_argument("inputs", nargs="?", help="directory holding tickets/stations/tariffs/cpi/zones .csv")
    for k in INPUT_FILES:
        s.add_argument(f"--{k}", help=f"path to {INPUT_FILES[k]}")
    s.add_argument("--base-period", help="deflator base period YYYY-MM (default: first CPI month)")

    s = sub.add_parser("describe", parents=[common], help="ticket shares and growth by group")
    s.add_argument("archive")
    s.add_argument("--grouping", help=f"one of {', '.join(GROUPINGS)}")

    s = sub.add_parser("ols", parents=[common], help="log-log demand regression")
    s.add_argument("archive")
    s.add_argument("--spec", help="I, II, III, IV or all")
    s.add_argument("--fare-category", help="restrict to one category, or 'each' for one fit per category")

    s = sub.add_parser("fit", parents=[common], help="grow the bagged model-tree ensemble")
    s.add_argument("archive")
    s.add_argument("--trees", type=int)
    s.add_argument("--subsample", type=float)
    s.add_argument("--fare-category", help="category to model (default FullSingle; 'all' for every record)")

    s = sub.add_parser("elasticity", parents=[common], help="per-record and grouped price elasticities")
    s.add_argument("archive")
    s.add_argument("--forest", required=True)
    s.add_argument("--perturbation", type=float)
    s.add_argument("--bands", help="e.g. 'FromToPerm=1-4,5-8,9-17;OutOfPerm=1-3,4-6,7-17;WithinPerm=1,2'")

    s = sub.add_parser("price", parents=[common], help="tariff recommendations and revenue deltas")
    s.add_argument("archive")
    s.add_argument("--forest", required=True)
    s.add_argument("--schedule", help="baseline tariffs.csv (default: the archive's tariffs)")
    s.add_argument("--bounds", help="regulator bounds CSV (year, zone, upper_bound)")
    s.add_argument("--proposed", help="proposed tariffs.csv to evaluate against the baseline")
    s.add_argument("--year", type=int)
    s.add_argument("--hold-band", type=float)
    s.add_argument("--perturbation", type=float)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic CSV bundle with ground truth")
    s.add_argument("--preset", help=f"one of {', '.join(PRESETS)}")

    s = sub.add_parser("replay", help="re-run a command from its run manifest and verify the outputs")
    s.add_argument("manifest")
    s.add_argument("--threads", type=int)
    s.add_argument("--out")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
        try:
            if args.command == "replay":
                cmd_replay(args.manifest, args.threads, args.out)
                return 0
            cfg = resolve_config(args)
            run(args.command, cfg, {k: getattr(args, k, None) for k in PATH_KEYS})
            return 0
        except CliError as exc:
            print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        except DataError as exc:
            print(f"error[{E_DATA}]: {exc}", file=sys.stderr)
        except ScheduleError as exc:
            print(f"error[{E_SCHEDULE}]: {exc}", file=sys.stderr)
        except InsufficientDataError as exc:
            print(f"error[{E_ESTIMATE}]: {exc}", file=sys.stderr)
        except FileNotFoundError as exc:
            print(f"error[{E_INPUT}]: file not found: {exc.filename}", file=sys.stderr)
        except Exception as exc:  # noqa: BLE001
            print(f"error[{E_INTERNAL}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
