"""Command-line surface: generate, trace, ablate, schedules.

Exit codes: 0 success, 2 invalid configuration or input, 3 I/O failure.
The environment variable SCALESTYLE_SEED overrides the configured seed;
SCALESTYLE_BACKEND selects the kernel implementation (see kernels package).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .analysis import ablation_csv, ablation_grid, schedule_csv, schedule_grid, trace_csv, trace_run
from .artifacts import build_manifest, canonical_json, grid_image, run_id, save_png, write_manifest
from .engine import generate
from .types import (
    ConfigError,
    GenerationConfig,
    InterventionConfig,
    configs_from_dict,
    validate_config,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

DEFAULT_KINDS = "ours,constant,linear,concave_up,concave_down,cosine"


def _load_configs(args) -> tuple[GenerationConfig, InterventionConfig]:
    if getattr(args, "from_manifest", None):
        doc = json.loads(Path(args.from_manifest).read_text())
        g, i = configs_from_dict(
            {"generation": doc.get("generation", {}), "intervention": doc.get("intervention", {})}
        )
    elif args.config:
        doc = json.loads(Path(args.config).read_text())
        g, i = configs_from_dict(doc)
    else:
        g, i = GenerationConfig(), InterventionConfig()
    env_seed = os.environ.get("SCALESTYLE_SEED")
    if env_seed is not None:
        try:
            g = replace(g, seed=int(env_seed))
        except ValueError as err:
            raise ConfigError([f"SCALESTYLE_SEED is not an integer: {env_seed}"]) from err
    if getattr(args, "no_interventions", False):
        i = i.disabled()
    return validate_config(g, i)


def _load_prompts(args) -> list[str]:
    if getattr(args, "from_manifest", None):
        doc = json.loads(Path(args.from_manifest).read_text())
        prompts = [str(p) for p in doc.get("prompts", [])]
    elif args.prompts:
        prompts = list(args.prompts)
    elif args.prompts_file:
        lines = Path(args.prompts_file).read_text().splitlines()
        prompts = [line.strip() for line in lines if line.strip()]
    else:
        prompts = []
    if not prompts:
        raise ConfigError(["no prompts given (use --prompts or --prompts-file)"])
    return prompts


def _load_prompt_sets(path: str) -> list[list[str]]:
    """One prompt set per line, prompts separated by '|'."""
    sets = []
    for line in Path(path).read_text().splitlines():
        prompts = [p.strip() for p in line.split("|") if p.strip()]
        if prompts:
            sets.append(prompts)
    if not sets:
        raise ConfigError([f"no prompt sets in {path}"])
    return sets


def cmd_generate(args) -> int:
    g, i = _load_configs(args)
    prompts = _load_prompts(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    result = generate(prompts, g, i)
    per_image = (time.perf_counter() - t0) / len(prompts)

    outputs = []
    for idx in range(len(prompts)):
        name = f"img_{idx + 1:03d}.png"
        save_png(result.images[idx], out_dir / name)
        outputs.append(name)
    save_png(grid_image(result.images), out_dir / "grid.png")
    outputs.append("grid.png")

    manifest = build_manifest(g, i, prompts, outputs, per_image, stable=args.stable_manifest)
    write_manifest(out_dir / "manifest.json", manifest)
    print(f"run {manifest['run_id']}: {len(prompts)} images -> {out_dir}")
    print(f"per-image seconds: {per_image:.3f}")
    return EXIT_OK


def cmd_trace(args) -> int:
    g, i = _load_configs(args)
    prompts = _load_prompts(args)
    traces = trace_run(prompts, g, i)
    out = Path(args.trace_out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(trace_csv(traces))
    print(f"wrote {len(traces)} step rows -> {out}")
    return EXIT_OK


def _seed_list(g: GenerationConfig, count: int) -> list[int]:
    if count < 1:
        raise ConfigError(["--seeds must be >= 1"])
    return [g.seed + offset for offset in range(count)]


def cmd_ablate(args) -> int:
    g, i = _load_configs(args)
    prompt_sets = _load_prompt_sets(args.prompt_sets)
    seeds = _seed_list(g, args.seeds)
    rows = ablation_grid(prompt_sets, seeds, g, i)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rid = run_id(g, i, [p for ps in prompt_sets for p in ps])
    csv_path = out_dir / f"ablation_{rid}.csv"
    csv_path.write_text(ablation_csv(rows))
    summary = {
        "run_id": rid,
        "seeds": list(seeds),
        "rows": [
            {
                "config": r.config,
                "s_dual": r.s_dual,
                "s_obj": r.s_obj,
                "s_sty": r.s_sty,
                "per_image_seconds": r.per_image_seconds,
            }
            for r in rows
        ],
    }
    (out_dir / f"summary_{rid}.json").write_text(canonical_json(summary))
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_schedules(args) -> int:
    g, i = _load_configs(args)
    prompt_sets = _load_prompt_sets(args.prompt_sets)
    seeds = _seed_list(g, args.seeds)
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    rows = schedule_grid(prompt_sets, seeds, g, kinds, i)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rid = run_id(g, i, [p for ps in prompt_sets for p in ps])
    csv_path = out_dir / f"schedules_{rid}.csv"
    csv_path.write_text(schedule_csv(rows))
    print(f"wrote {csv_path}")
    return EXIT_OK


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config document (generation + intervention)")


def _add_prompt_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prompts", action="append", help="prompt text (repeatable)")
    p.add_argument("--prompts-file", help="file with one prompt per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scalestyle")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="render a batch of images")
    _add_config_args(p)
    _add_prompt_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-interventions", action="store_true",
                   help="disable all alignment edits")
    p.add_argument("--from-manifest", help="reproduce a previous run's manifest")
    p.add_argument("--stable-manifest", action="store_true",
                   help="omit wall-clock fields so reruns write identical manifests")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("trace", help="per-step measurement CSV")
    _add_config_args(p)
    _add_prompt_args(p)
    p.add_argument("--trace-out", required=True, help="CSV output path")
    p.add_argument("--no-interventions", action="store_true")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("ablate", help="cumulative edit-combination grid")
    _add_config_args(p)
    p.add_argument("--prompt-sets", required=True,
                   help="file with one prompt set per line, prompts separated by '|'")
    p.add_argument("--seeds", type=int, required=True, help="number of seeds")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("schedules", help="schedule-kind comparison grid")
    _add_config_args(p)
    p.add_argument("--prompt-sets", required=True)
    p.add_argument("--seeds", type=int, required=True)
    p.add_argument("--kinds", default=DEFAULT_KINDS, help="comma-separated schedule kinds")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_schedules)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        for line in err.errors:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, IndexError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
