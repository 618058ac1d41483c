"""Command line driver: ``spinverify run|check|list``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .checks import FLAG_KEYS, REGISTRY, error_report, run_check
from .report import emit_report

DEFAULT_SUITE = [{"check_id": cid} for cid in REGISTRY]


def _descriptor_error(desc, message: str, seed: int) -> dict:
    cid = desc.get("check_id") if isinstance(desc, dict) else None
    params = desc.get("params") if isinstance(desc, dict) else None
    return error_report(cid, params, seed, message)


def _normalize(desc, overrides: dict, seed_override: int | None):
    """(check_id, params, seed) or an error message for a malformed descriptor."""
    if not isinstance(desc, dict):
        return f"descriptor must be an object, got {type(desc).__name__}"
    extra = set(desc) - {"check_id", "params", "seed"}
    if extra:
        return f"unknown descriptor field(s) {sorted(extra)}"
    cid = desc.get("check_id")
    if cid not in REGISTRY:
        return f"unknown check id {cid!r}"
    params = desc.get("params", {}) or {}
    if not isinstance(params, dict):
        return "params must be an object"
    params = dict(params)
    accepted = REGISTRY[cid].defaults
    for key, val in overrides.items():
        if key in accepted:
            params[key] = val
    seed = desc.get("seed", 0) if seed_override is None else seed_override
    return cid, params, seed


def _run_one(job) -> dict:
    cid, params, seed, timing = job
    return run_check(cid, params, seed, timing)


def run_suite(config: list, jobs: int = 1, overrides: dict | None = None,
              seed: int | None = None, timing: bool = False) -> tuple[list[dict], int]:
    """Run every descriptor; reports come back in config order.  Exit code 0 iff all pass."""
    overrides = overrides or {}
    slots: list = []
    work = []
    for desc in config:
        norm = _normalize(desc, overrides, seed)
        if isinstance(norm, str):
            slots.append(_descriptor_error(desc, norm, seed or 0))
        else:
            slots.append(None)
            work.append((len(slots) - 1, (*norm, timing)))
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, [w for _, w in work]))
    else:
        results = [_run_one(w) for _, w in work]
    for (i, _), rep in zip(work, results):
        slots[i] = rep
    code = 0 if all(r["status"] == "pass" for r in slots) else 1
    return slots, code


def _parse_value(text: str):
    """Flag values: JSON when it parses (numbers, lists), else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _add_common(sp: argparse.ArgumentParser) -> None:
    for flag in FLAG_KEYS:
        sp.add_argument(f"--{flag}", type=_parse_value, default=None,
                        help=f"override the '{FLAG_KEYS[flag]}' parameter (JSON value)")
    sp.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    sp.add_argument("--jobs", type=int, default=None, help="parallel workers (default $SPINVERIFY_JOBS or 1)")
    sp.add_argument("--format", choices=("json", "text"), default="json")
    sp.add_argument("--timing", action="store_true", help="record runtime_ms (output is then not reproducible)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinverify", description="Run verification checks.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a JSON array of check descriptors")
    run.add_argument("config", nargs="?", default=None, help="config file; omitted means the default suite")
    _add_common(run)
    chk = sub.add_parser("check", help="run a single check")
    chk.add_argument("check_id")
    _add_common(chk)
    sub.add_parser("list", help="list registered checks")
    return ap


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("SPINVERIFY_JOBS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for cid, spec in REGISTRY.items():
            print(f"{cid}\t{spec.summary}")
        return 0
    overrides = {FLAG_KEYS[f]: getattr(args, f) for f in FLAG_KEYS if getattr(args, f) is not None}
    if args.command == "run":
        if args.config is None:
            config = DEFAULT_SUITE
        else:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    config = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                print(f"spinverify: cannot read config: {exc}", file=sys.stderr)
                return 2
            if not isinstance(config, list):
                print("spinverify: config must be a JSON array of descriptors", file=sys.stderr)
                return 2
        reports, code = run_suite(config, _jobs(args), overrides, args.seed, args.timing)
    else:
        if args.check_id not in REGISTRY:
            print(f"spinverify: unknown check id {args.check_id!r}", file=sys.stderr)
            return 2
        # in single-check mode a flag the check does not take is an error, not ignored
        rep = run_check(args.check_id, overrides, 0 if args.seed is None else args.seed, args.timing)
        reports, code = [rep], 0 if rep["status"] == "pass" else 1
    sys.stdout.write(emit_report(reports, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
