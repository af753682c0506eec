"""Command-line front end.

Usage::

    mesonbell threshold --kind nonunitary --y 0
    mesonbell scan --kind unitary --x-from 0.5 --x-to 4 --x-steps 8
    mesonbell maximize --system B0 --kind unitary
    mesonbell verdict all
    mesonbell simulate --system B0 --kind renormalized --n-events 1000000 \\
        --tau 0 --tau 2.04 --tau 1.02 --tau 3.06

Global flags (--output, --format, --t-max, --grid-points, --tolerance,
--seed) are accepted before or after the subcommand. JSON documents follow
the schemas in ``mesonbell/schemas``; numbers carry 9 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .chsh import OptimizerOptions, find_threshold, maximize_chsh, scan_x, verdict, violates
from .correlation import CorrelationKind, correlation
from .errors import MesonBellError
from .model import KAON_Y, builtin_systems, get_builtin
from .montecarlo import SettingPair, estimate_chsh, estimate_correlation, sample_events

SCAN_COLUMNS = ["x", "s_max", "tau_a", "tau_a_prime", "tau_b", "tau_b_prime", "converged"]
EVENT_COLUMNS = ["setting", "left", "right"]

PUBLISHED = {
    "N_I": 2.6,
    "N_II": 2.0,
    "N_I_kaon": 2.0,
    "x_table": [
        {"system": "B0", "x": 0.77, "bound": "exact"},
        {"system": "K0", "x": 0.95, "bound": "exact"},
        {"system": "D0", "x": 0.03, "bound": "upper_bound"},
        {"system": "Bs", "x": 20.60, "bound": "lower_bound"},
    ],
}


class CliError(Exception):
    def __init__(self, message, code=1):
        super().__init__(message)
        self.code = code


def _num(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(f"{value:.9g}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _settings_dict(settings):
    keys = ("tau_a", "tau_a_prime", "tau_b", "tau_b_prime")
    return {k: _num(v) for k, v in zip(keys, settings.as_tuple())}


def _options(args) -> OptimizerOptions:
    return OptimizerOptions(t_max=args.t_max, grid_points=args.grid_points)


def _kind(value) -> CorrelationKind:
    try:
        return CorrelationKind.parse(value)
    except MesonBellError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _resolve_xy(args, parser):
    if args.system is not None and args.x is not None:
        parser.error("--system and --x are mutually exclusive")
    if args.system is not None:
        try:
            entry = get_builtin(args.system, args.kaon_y)
        except MesonBellError as exc:
            parser.error(f"argument --system: {exc}")
        y = entry.reduced.y if args.y is None else args.y
        return entry.name, entry.reduced.x, y
    if args.x is None:
        parser.error("one of --x or --system is required")
    return None, args.x, 0.0 if args.y is None else args.y


# ---------------------------------------------------------------- commands


def cmd_threshold(args, parser):
    if args.kind is CorrelationKind.RENORMALIZED:
        parser.error("argument --kind: no threshold exists for the renormalized kernel")
    res = find_threshold(args.kind, args.y, args.tolerance, _options(args))
    doc = {
        "kind": args.kind.value,
        "y": _num(args.y),
        "critical_x": _num(res.critical_x),
        "bracket": [_num(res.bracket[0]), _num(res.bracket[1])],
        "iterations": res.iterations,
        "s_at_critical": _num(res.s_at_critical),
        "tolerance": _num(args.tolerance),
    }
    if args.quote_paper:
        doc["published"] = PUBLISHED
    return doc


def cmd_scan(args, parser):
    if args.x_steps < 1:
        parser.error("argument --x-steps: must be >= 1")
    if args.x_steps == 1:
        grid = [args.x_from]
    else:
        step = (args.x_to - args.x_from) / (args.x_steps - 1)
        grid = [args.x_from + i * step for i in range(args.x_steps)]
    rows = []
    for res in scan_x(args.kind, args.y, grid, _options(args)):
        rows.append({"x": _num(res.x), "s_max": _num(res.s_max), **_settings_dict(res.settings), "converged": res.converged})
    return rows


def cmd_maximize(args, parser):
    name, x, y = _resolve_xy(args, parser)
    res = maximize_chsh(args.kind, x, y, _options(args))
    return {
        "kind": args.kind.value,
        "system": name,
        "x": _num(x),
        "y": _num(y),
        "s_max": _num(res.s_max),
        "settings": _settings_dict(res.settings),
        "evaluations": res.evaluations,
        "converged": res.converged,
        "violates": res.violates,
    }


def cmd_verdict(args, parser):
    target = args.system or args.target
    if target is None:
        parser.error("give a system name, --system NAME, or 'all'")
    if target.lower() == "all":
        entries = builtin_systems(args.kaon_y)
    else:
        try:
            entries = [get_builtin(target, args.kaon_y)]
        except MesonBellError as exc:
            parser.error(f"argument --system: {exc}")
    kinds = [args.kind] if args.kind else [CorrelationKind.NON_UNITARY, CorrelationKind.UNITARY]
    systems = []
    for entry in entries:
        result = verdict(entry, kinds, _options(args))
        systems.append(
            {
                "system": entry.name,
                "x": _num(entry.reduced.x),
                "y": _num(entry.reduced.y),
                "bound": entry.bound.value,
                "kinds": {
                    kind.value: {
                        "violates": v.violates,
                        "s_max": _num(v.s_max),
                        "settings": _settings_dict(v.settings),
                        "caveat": v.caveat,
                    }
                    for kind, v in result.items()
                },
            }
        )
    doc = {"systems": systems}
    if args.quote_paper:
        doc["published"] = PUBLISHED
    return doc


def cmd_simulate(args, parser):
    name, x, y = _resolve_xy(args, parser)
    if args.n_events < 1:
        parser.error("argument --n-events: must be >= 1")
    if args.tau is None:
        settings = maximize_chsh(args.kind, x, y, _options(args)).settings
        if args.kind is CorrelationKind.RENORMALIZED:
            # only time differences matter here, so pull the earliest time to 0
            # to keep as many surviving pairs as possible
            from .chsh import ChshSettings

            taus = settings.as_tuple()
            settings = ChshSettings.from_sequence([t - min(taus) for t in taus])
    elif len(args.tau) != 4:
        parser.error(f"argument --tau: expected exactly four values, got {len(args.tau)}")
    else:
        from .chsh import ChshSettings

        try:
            settings = ChshSettings.from_sequence(args.tau)
        except MesonBellError as exc:
            parser.error(f"argument --tau: {exc}")
    events = sample_events(x, y, settings, args.n_events, args.seed)
    if args.events_csv:
        _write_events(events, args.events_csv)

    correlations = []
    for setting, pair in zip(SettingPair, settings.pairs()):
        est = estimate_correlation(events.for_setting(setting), args.kind)
        correlations.append(
            {
                "setting": setting.label,
                "tau_l": _num(pair[0]),
                "tau_r": _num(pair[1]),
                "value": _num(est.value),
                "std_error": _num(est.std_error),
                "n_used": est.n_used,
                "n_total": est.n_total,
                "closed_form": _num(correlation(args.kind, x, y, pair)),
            }
        )
    chsh = estimate_chsh(events, args.kind)
    exact = [c["closed_form"] for c in correlations]
    return {
        "kind": args.kind.value,
        "system": name,
        "x": _num(x),
        "y": _num(y),
        "seed": args.seed,
        "n_per_setting": args.n_events,
        "settings": _settings_dict(settings),
        "correlations": correlations,
        "chsh": {
            "value": _num(chsh.value),
            "std_error": _num(chsh.std_error),
            "n_used": chsh.n_used,
            "n_total": chsh.n_total,
            "flags": list(chsh.flags),
            "closed_form": _num(abs(exact[0] - exact[1]) + abs(exact[2] + exact[3])),
            "significance": _num((chsh.value - 2.0) / chsh.std_error) if chsh.std_error > 0 else None,
        },
        "violation": bool(chsh.value - 2.0 > 3.0 * chsh.std_error),
    }


def _write_events(events, path):
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(EVENT_COLUMNS)
            labels = [s.label for s in SettingPair]
            names = ["meson", "antimeson", "decayed"]
            for s, l, r in zip(events.setting_index, events.left, events.right):
                writer.writerow([labels[s], names[l], names[r]])
    except OSError as exc:
        raise CliError(f"argument --events-csv: cannot write {path}: {exc.strerror}") from exc


# ---------------------------------------------------------------- output


def _to_csv(doc, command) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if command == "scan":
        writer.writerow(SCAN_COLUMNS)
        for row in doc:
            writer.writerow([_fmt(row[c]) for c in SCAN_COLUMNS])
    elif command == "verdict":
        writer.writerow(["system", "x", "y", "bound", "kind", "violates", "s_max", "caveat"])
        for sysdoc in doc["systems"]:
            for kind, v in sysdoc["kinds"].items():
                writer.writerow(
                    [sysdoc["system"], _fmt(sysdoc["x"]), _fmt(sysdoc["y"]), sysdoc["bound"], kind,
                     _fmt(v["violates"]), _fmt(v["s_max"]), v["caveat"] or ""]
                )
    else:
        flat = {}

        def walk(prefix, value):
            if isinstance(value, dict):
                for k, v in value.items():
                    walk(f"{prefix}{k}.", v)
            elif not isinstance(value, list):
                flat[prefix[:-1]] = value

        walk("", doc)
        writer.writerow(flat.keys())
        writer.writerow([_fmt(v) if v is not None else "" for v in flat.values()])
    return buf.getvalue()


def _render(doc, command, fmt) -> str:
    if fmt is None:
        fmt = "csv" if command == "scan" else "json"
    if fmt == "csv":
        return _to_csv(doc, command)
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------- parser


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--output", "-o", default=default(None), help="write output here instead of stdout")
    g.add_argument("--format", choices=["json", "csv"], default=default(None),
                   help="output format (default: csv for scan, json otherwise)")
    g.add_argument("--t-max", type=float, default=default(8.0), help="cap on every dimensionless time")
    g.add_argument("--grid-points", type=int, default=default(13), help="seed grid nodes per axis")
    g.add_argument("--tolerance", type=float, default=default(1e-3), help="threshold bisection width")
    g.add_argument("--seed", type=int, default=default(0), help="Monte Carlo seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mesonbell", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help):
        p = sub.add_parser(name, help=help)
        _global_flags(p, suppress=True)
        return p

    p = add("threshold", "bisect the critical x for a kind and width asymmetry")
    p.add_argument("--kind", type=_kind, required=True)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--quote-paper", action="store_true", help="include published reference values")
    p.set_defaults(func=cmd_threshold)

    p = add("scan", "maximized S on an evenly spaced x grid")
    p.add_argument("--kind", type=_kind, required=True)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--x-from", type=float, required=True)
    p.add_argument("--x-to", type=float, required=True)
    p.add_argument("--x-steps", type=int, required=True)
    p.set_defaults(func=cmd_scan)

    p = add("maximize", "maximize S for one system")
    p.add_argument("--kind", type=_kind, required=True)
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--system")
    p.add_argument("--kaon-y", type=float, default=KAON_Y)
    p.set_defaults(func=cmd_maximize)

    p = add("verdict", "violation verdicts for the built-in systems")
    p.add_argument("target", nargs="?", help="system name or 'all'")
    p.add_argument("--system")
    p.add_argument("--kind", type=_kind)
    p.add_argument("--kaon-y", type=float, default=KAON_Y)
    p.add_argument("--quote-paper", action="store_true", help="include published reference values")
    p.set_defaults(func=cmd_verdict)

    p = add("simulate", "pseudo-experiment at four measurement times")
    p.add_argument("--kind", type=_kind, required=True)
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--system")
    p.add_argument("--kaon-y", type=float, default=KAON_Y)
    p.add_argument("--n-events", type=int, required=True, help="events per setting pair")
    p.add_argument("--tau", type=float, action="append",
                   help="measurement time; give four times in the order A, A', B, B'")
    p.add_argument("--events-csv", help="also dump every event to this CSV file")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub_parser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        doc = args.func(args, sub_parser)
        text = _render(doc, args.command, args.format)
        if args.output:
            try:
                with open(args.output, "w", newline="") as fh:
                    fh.write(text)
            except OSError as exc:
                raise CliError(f"argument --output: cannot write {args.output}: {exc.strerror}") from exc
        else:
            sys.stdout.write(text)
    except CliError as exc:
        print(f"mesonbell: error: {exc}", file=sys.stderr)
        return exc.code
    except MesonBellError as exc:
        print(f"mesonbell: error: {exc}", file=sys.stderr)
        return 1
    return 0


def load_schema(command: str) -> dict:
    """JSON schema documenting the output of ``command``."""
    from importlib.resources import files

    return json.loads(files("mesonbell").joinpath("schemas", f"{command}.json").read_text())
