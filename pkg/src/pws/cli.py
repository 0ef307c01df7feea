"""``pws`` command line: check, sem, extract, sim, dot.

Exit codes: 0 success, 1 property failure or runtime error, 2 model or
usage error. A file argument of the form ``@name`` refers to a bundled
fixture (``@crossroad.pws``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from . import dot as dotmod
from .compose import DEFAULT_MAX_PRODUCT, build_holarchy, extract_interface, flatten
from .dsl import format_interface, load_model, parse_properties
from .errors import PwsError, SimulationError
from .semantics import compute_semantics
from .sim import Runtime, parse_script
from .verify import verify, verify_holarchy

EXIT_OK, EXIT_FAIL, EXIT_MODEL = 0, 1, 2


class UsageError(PwsError):
    pass


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("pws") / "fixtures" / name))


def _resolve(arg: str) -> Path:
    return fixture_path(arg[1:]) if arg.startswith("@") else Path(arg)


def _split_files(files):
    models, props, scripts = [], [], []
    for f in files:
        p = _resolve(f)
        if p.suffix == ".props":
            props.append(p)
        elif p.suffix == ".script":
            scripts.append(p)
        else:
            models.append(p)
    return models, props, scripts


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load(models):
    if not models:
        raise UsageError("no model files given")
    for p in models:
        _read(p)
    return load_model(models)


def _pick_system(model, name):
    if name:
        if not model.has_system(name):
            raise UsageError(f"unknown system {name}")
        return model.system(name)
    if len(model.systems) == 1:
        return model.systems[0]
    names = ", ".join(s.name for s in model.systems) or "none"
    raise UsageError(f"choose a system with --system (available: {names})")


def _color(text, code):
    if os.environ.get("PWS_COLOR") == "1":
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _paint(report_text):
    return report_text.replace(": holds", ": " + _color("holds", "32")).replace(": FAILS", ": " + _color("FAILS", "31"))


def _emit(text, out_path=None):
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- subcommands --------------------------------------------------------------


def cmd_check(args):
    models, prop_files, _ = _split_files(args.files)
    prop_files += [Path(p) for p in args.props or ()]
    model = _load(models)
    if args.holarchy:
        holarchy = build_holarchy(model, args.holarchy)
        root = holarchy.root
        props = []
        for pf in prop_files:
            props += parse_properties(_read(pf), str(pf), root, model.bindings_for(root))
        reports = verify_holarchy(holarchy, {".": props})
    else:
        system = _pick_system(model, args.system)
        bindings = model.bindings_for(system)
        props = []
        for pf in prop_files:
            props += parse_properties(_read(pf), str(pf), system, bindings)
        reports = {".": verify(system, bindings, props)}
    if args.format == "json":
        payload = {path: r.to_json() for path, r in reports.items()}
        _emit(json.dumps(payload if args.holarchy else payload["."], indent=2, sort_keys=True) + "\n")
    else:
        for path, r in reports.items():
            if args.holarchy:
                sys.stdout.write(f"[{path}] ")
            sys.stdout.write(_paint(r.render()))
    if not all(r.properties_hold for r in reports.values()):
        return EXIT_FAIL
    return EXIT_OK if all(r.clean for r in reports.values()) else EXIT_FAIL


def cmd_sem(args):
    models, _, _ = _split_files(args.files)
    model = _load(models)
    system = _pick_system(model, args.system)
    bindings = model.bindings_for(system)
    sem = compute_semantics(system, bindings)
    for s in sem.unreachable():
        print(f"warning: unreachable whole state {s}", file=sys.stderr)
    for d in sem.diagnostics:
        print(f"error: {d}", file=sys.stderr)
    if args.oracle:
        reference = flatten(system, bindings, cap=args.max_product)
        if reference != sem.entries:
            print("error: semantics disagree with the flattened product", file=sys.stderr)
            return EXIT_FAIL
    if args.format == "json":
        _emit(json.dumps(sem.to_json(), indent=2) + "\n")
    else:
        _emit(sem.dump())
    return EXIT_OK


def cmd_extract(args):
    models, _, _ = _split_files(args.files)
    model = _load(models)
    system = _pick_system(model, args.system)
    _emit(format_interface(extract_interface(system)), args.out)
    return EXIT_OK


def cmd_sim(args):
    models, _, scripts = _split_files(args.files)
    scripts += [Path(s) for s in args.script or ()]
    model = _load(models)
    if args.holarchy:
        holarchy = build_holarchy(model, args.holarchy)
    elif args.root:
        holarchy = build_holarchy(model, root=args.root)
    elif len(model.holarchies) == 1:
        holarchy = build_holarchy(model, model.holarchies[0])
    else:
        holarchy = build_holarchy(model, root=_pick_system(model, None).name)
    script = []
    for sp in scripts:
        script += parse_script(_read(sp))
    runtime = Runtime(holarchy, assert_sem=args.assert_sem, trace_injections=args.trace_injections)
    status = EXIT_OK
    try:
        runtime.run(script)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_FAIL
    except PwsError as exc:  # CommandNotEnabled at run time
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_FAIL
    if args.format == "json":
        _emit(runtime.trace.dumps() + "\n")
    else:
        _emit(runtime.trace.text())
    return status


def cmd_dot(args):
    models, _, _ = _split_files(args.files)
    model = _load(models)
    target = args.target
    if target is None:
        target = _pick_system(model, None).name
    if args.kind != "interface" and model.has_system(target):
        system = model.system(target)
        sem = compute_semantics(system, model.bindings_for(system)) if args.sem else None
        _emit(dotmod.system_dot(system, sem), args.out)
    elif args.kind != "system" and model.has_interface(target):
        _emit(dotmod.interface_dot(model.interface(target)), args.out)
    else:
        raise UsageError(f"unknown target {target}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pws", description="Part-Whole Statecharts toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, system=True):
        p.add_argument("files", nargs="+", help="model files (.pws), property files (.props), scripts (.script)")
        if system:
            p.add_argument("-s", "--system", help="system to analyse (default: the only one)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--max-product", type=int, default=DEFAULT_MAX_PRODUCT, help="flattening cap")
        return p

    p = common(sub.add_parser("check", help="verify INIT/NEVER/LEAVES properties"))
    p.add_argument("-p", "--props", action="append", help="property file")
    p.add_argument("--holarchy", help="verify every holon of this holarchy bottom-up")
    p.set_defaults(func=cmd_check)

    p = common(sub.add_parser("sem", help="print the state semantics of a system"))
    p.add_argument("--oracle", action="store_true", help="cross-check against the flattened product")
    p.set_defaults(func=cmd_sem)

    p = common(sub.add_parser("extract", help="print the interface of a system"))
    p.add_argument("--out", help="write to a file instead of stdout")
    p.set_defaults(func=cmd_extract)

    p = common(sub.add_parser("sim", help="run an injection script"), system=False)
    p.add_argument("--script", action="append", help="injection script")
    p.add_argument("--holarchy", help="holarchy to run")
    p.add_argument("--root", help="run this system with leaf parts only")
    p.add_argument("--assert-sem", action="store_true", help="check configurations against semantics")
    p.add_argument("--trace-injections", action="store_true", help="also record injected events")
    p.set_defaults(func=cmd_sim)

    p = common(sub.add_parser("dot", help="export a Graphviz digraph"), system=False)
    p.add_argument("-t", "--target", help="system or interface name")
    p.add_argument("--kind", choices=("any", "system", "interface"), default="any")
    p.add_argument("--sem", action="store_true", help="annotate whole states with their semantics")
    p.add_argument("--out", help="write to a file instead of stdout")
    p.set_defaults(func=cmd_dot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PwsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except KeyError as exc:
        print(f"error: unknown name {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
