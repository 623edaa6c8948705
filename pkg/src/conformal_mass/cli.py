"""Command line: ``conformal-mass {run,convergence,dump-fields,list-profiles}``.

Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 quadrature
failure, 5 audit failure (only with ``--strict``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .blowup import FIELD_NAMES, compute_fields
from .greensolve import solve_green
from .pipeline import ScenarioConfig, StageError, convergence_table, run_scenario, to_jsonable
from .profiles import PROFILE_NAMES, ProfileError, profile_from_name

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_QUADRATURE, EXIT_AUDIT = 0, 2, 3, 4, 5
_STAGE_EXIT = {"solver": EXIT_SOLVER, "quadrature": EXIT_QUADRATURE}


class ConfigError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat TOML file of configuration keys")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("--profile", help="round-s4 | fs-cp2 | perturbed-s4:eps=<v>")
    common.add_argument("--n", type=int, help="output grid size")
    common.add_argument("--order", type=int, help="Frobenius truncation order")
    common.add_argument("--tol", type=float, help="integrator relative tolerance")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--deterministic", action="store_true", default=None,
                        help="omit wall-clock data so reports are byte-stable")
    common.add_argument("--strict", action="store_true", default=None,
                        help="exit 5 when any audit fails")

    p = argparse.ArgumentParser(prog="conformal-mass", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)
    sub.add_parser("run", parents=[common], help="full pipeline, JSON report")
    conv = sub.add_parser("convergence", parents=[common], help="refinement study, JSON table")
    conv.add_argument("--levels", help="comma separated grid sizes (at least 3)")
    sub.add_parser("dump-fields", parents=[common], help="blow-up fields as CSV")
    sub.add_parser("list-profiles", help="built-in profile names")
    return p


def build_config(args: argparse.Namespace) -> ScenarioConfig:
    """defaults < --config < --set < explicit flags."""
    data: dict = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                loaded = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        nested = [k for k, v in loaded.items() if isinstance(v, dict)]
        if nested:
            raise ConfigError(f"config must be flat; tables found: {', '.join(nested)}")
        data.update(loaded)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        data[key.strip()] = value.strip()
    for key in ("profile", "n", "order", "tol", "out", "deterministic", "strict", "levels"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    try:
        return ScenarioConfig.from_mapping(data)
    except (KeyError, ValueError, TypeError, ProfileError) as exc:
        raise ConfigError(str(exc.args[0] if exc.args else exc)) from exc


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def fields_csv(cfg: ScenarioConfig) -> str:
    profile = profile_from_name(cfg.profile)
    sol = solve_green(profile, cfg.solver_options())
    cols = compute_fields(profile, sol).columns()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELD_NAMES)
    for i in range(len(sol.r)):
        w.writerow([repr(float(cols[k][i])) for k in FIELD_NAMES])
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    if args.verb == "list-profiles":
        sys.stdout.write("\n".join(PROFILE_NAMES) + "\n")
        return EXIT_OK
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.verb == "run":
            report = run_scenario(cfg)
            _emit(dumps_report(report), cfg.out)
            if cfg.fields_out:
                _emit(fields_csv(cfg), cfg.fields_out)
            failed = [k for k, e in report["audits"].items() if e["verdict"] == "fails"]
            if failed:
                print(f"audits failing: {', '.join(failed)}", file=sys.stderr)
                if cfg.strict:
                    return EXIT_AUDIT
            return EXIT_OK
        if args.verb == "convergence":
            _emit(dumps_report(convergence_table(cfg)), cfg.out)
            return EXIT_OK
        if args.verb == "dump-fields":
            try:
                text = fields_csv(cfg)
            except Exception as exc:  # noqa: BLE001
                raise StageError("solver", str(exc), {}) from exc
            _emit(text, cfg.out)
            return EXIT_OK
    except StageError as exc:
        partial = dict(exc.partial)
        partial["error"] = {"stage": exc.stage, "message": str(exc)}
        if args.verb != "dump-fields":
            _emit(dumps_report(to_jsonable(partial)), cfg.out)
        print(f"{exc.stage} failure: {exc}", file=sys.stderr)
        return _STAGE_EXIT.get(exc.stage, EXIT_SOLVER)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    parser.error(f"unknown verb {args.verb}")
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
