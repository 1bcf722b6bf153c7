"""Command-line entry point: ``fconcavity <subcommand> [flags]``.

Exit codes: 0 pass (or report_only), 1 fail/violated, 2 usage error or
missing input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import harness
from .concavity import check_f_concave, check_quasiconcave, reverify_witness
from .domains import Domain
from .fields import Field, atomic_write_text, field_to_csv, read_field_csv
from .heatflow import first_eigenpair, fd_evolve, gaussian_screen
from .transforms import admissibility_audit, f_mean, parse_transform

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _dump(doc) -> str:
    return json.dumps(harness._clean(doc), sort_keys=True, indent=2) + "\n"


def _emit(doc, out=None):
    text = _dump(doc)
    sys.stdout.write(text)
    if out:
        atomic_write_text(out, text)


def _json_arg(value: str, flag: str):
    """Inline JSON or a path to a JSON file."""
    if os.path.exists(value):
        with open(value) as fh:
            text = fh.read()
    else:
        text = value
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        if not value.lstrip().startswith(("{", "[")):
            raise UsageError(f"{flag}: no such file {value!r}") from None
        raise UsageError(f"{flag}: invalid JSON") from None


def _transform(args):
    if not args.transform:
        raise UsageError("--transform is required")
    try:
        return parse_transform(args.transform)
    except ValueError as exc:
        raise UsageError(f"--transform: {exc}") from None


def _domain(args, required=True):
    if args.domain is None:
        if required:
            raise UsageError("--domain is required")
        return None
    doc = _json_arg(args.domain, "--domain")
    if args.h is not None:
        doc = {k: v for k, v in doc.items() if k not in ("n", "h")}
        doc["h"] = args.h
    try:
        return Domain.from_json(doc)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"--domain: {exc}") from None


def _field(args, domain=None):
    if not args.field:
        raise UsageError("--field is required")
    if not os.path.exists(args.field):
        raise UsageError(f"--field: no such file {args.field!r}")
    try:
        return read_field_csv(args.field, domain)
    except ValueError as exc:
        raise UsageError(f"--field: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands

def cmd_check(args):
    dom = _domain(args, required=False)
    f = _field(args, dom)
    if args.quasiconcave:
        rep = check_quasiconcave(f, args.tolerance)
        doc = rep.to_json()
    else:
        F = _transform(args)
        try:
            rep = check_f_concave(F, f, args.tolerance)
        except ValueError as exc:
            raise UsageError(f"--field: {exc}") from None
        doc = rep.to_json()
        if rep.violated and rep.witnesses:
            r = reverify_witness(F, f, rep.witnesses[0])
            doc["reverified_slack"] = str(r)
    _emit(doc, args.out)
    return EXIT_FAIL if rep.violated else EXIT_PASS


def cmd_mean(args):
    F = _transform(args)
    for flag in ("a", "b"):
        if getattr(args, flag) is None:
            raise UsageError(f"--{flag} is required")
    try:
        m = f_mean(F, args.a, args.b, args.mu)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit({"transform": F.spec, "a": args.a, "b": args.b, "mu": args.mu, "mean": m}, args.out)
    return EXIT_PASS


def _initial(args, dom):
    if args.field:
        return _field(args, dom)
    if args.initial is None:
        raise UsageError("evolve needs --field or --initial")
    if dom is None:
        raise UsageError("--initial needs --domain")
    spec = args.initial
    if spec == "sine":
        if dom.dim != 1:
            raise UsageError("--initial sine is 1D only")
        return Field(dom, np.sin(np.pi * (dom.x - dom.lo) / (dom.hi - dom.lo)))
    if spec.startswith("indicator:"):
        try:
            kv = dict(item.split("=") for item in spec.split(":", 1)[1].split(","))
            lo, hi = float(kv["lo"]), float(kv["hi"])
        except (ValueError, KeyError):
            raise UsageError(f"--initial: expected indicator:lo=<a>,hi=<b>, got {spec!r}") from None
        c = dom.coords()
        inside = np.all((c > lo) & (c < hi), axis=-1)
        return Field(dom, np.where(dom.mask, inside.astype(float), np.nan))
    raise UsageError(f"--initial: unknown initial datum {spec!r}")


def _sidecar_path(csv_path):
    root, _ = os.path.splitext(csv_path)
    return root + ".json"


def cmd_evolve(args):
    dom = _domain(args, required=False)
    init = _initial(args, dom)
    dom = init.domain
    if not args.t:
        raise UsageError("--t is required (repeat for several target times)")
    if args.dt is None:
        raise UsageError("--dt is required")
    try:
        states = fd_evolve(dom, init, args.t, args.dt)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    summary = []
    for i, st in enumerate(states):
        doc = {"time": st.time, **{k: v for k, v in st.diagnostics.items()}}
        if args.out:
            path = args.out
            if len(states) > 1:
                root, ext = os.path.splitext(args.out)
                path = f"{root}_{i}{ext or '.csv'}"
            atomic_write_text(path, field_to_csv(st.field))
            atomic_write_text(_sidecar_path(path), _dump(doc))
            doc["path"] = path
        summary.append(doc)
    sys.stdout.write(_dump({"domain": dom.to_json(), "states": summary}))
    return EXIT_PASS


def cmd_eigen(args):
    dom = _domain(args)
    ep = first_eigenpair(dom, args.tolerance)
    doc = ep.to_json()
    doc["domain"] = dom.to_json()
    if args.out:
        atomic_write_text(args.out, field_to_csv(ep.eigenfunction))
        atomic_write_text(_sidecar_path(args.out), _dump(doc))
    sys.stdout.write(_dump(doc))
    return EXIT_PASS


def cmd_screen(args):
    F = _transform(args)
    if not args.k:
        raise UsageError("--k is required (repeat for several values)")
    try:
        res = gaussian_screen(F, args.k, args.s_max, args.ds, args.tolerance)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = {"transform": F.spec, "s_max": args.s_max, "ds": args.ds, "results": [r.to_json() for r in res]}
    _emit(doc, args.out)
    return EXIT_FAIL if any(r.outcome == "violated" for r in res) else EXIT_PASS


def cmd_audit(args):
    F = _transform(args)
    rep = admissibility_audit(F, args.n_samples)
    _emit(rep.to_json(), args.out)
    return EXIT_PASS if rep.passed else EXIT_FAIL


# flag -> experiment config key(s), tried in order
_HARNESS_FLAGS = {
    "transform": ("transform", "transforms"),
    "t": ("t",),
    "k": ("k_list",),
    "h": ("h",),
    "dt": ("dt",),
    "tolerance": ("tolerance",),
    "value_floor": ("value_floor",),
}


def cmd_harness(args):
    if args.action == "list":
        for eid, anchor in harness.list_experiments():
            sys.stdout.write(f"{eid}\t{anchor}\n")
        return EXIT_PASS
    if not args.experiment:
        raise UsageError("harness run needs an experiment id")
    if args.experiment not in harness.REGISTRY:
        raise UsageError(str(harness.UnknownExperiment(args.experiment)))
    defaults = harness.experiment_defaults(args.experiment)
    overrides = dict(args.config_doc or {})
    for flag, keys in _HARNESS_FLAGS.items():
        val = getattr(args, flag, None)
        if val is None or val == []:
            continue
        for key in keys:
            if key in defaults:
                if key == "transforms":
                    val = [val]
                overrides[key] = val
                break
        else:
            raise UsageError(f"--{flag.replace('_', '-')} is not a parameter of {args.experiment}")
    try:
        rep = harness.run(args.experiment, overrides, seed=args.seed)
    except harness.ConfigError as exc:
        raise UsageError(str(exc)) from None
    text = rep.dumps()
    sys.stdout.write(text)
    if args.out:
        atomic_write_text(args.out, text)
    return EXIT_FAIL if rep.verdict == harness.FAIL else EXIT_PASS


# ---------------------------------------------------------------------------
# parser

_DEFAULTS = {"tolerance": 1e-9, "s_max": 3.0, "ds": 0.01, "n_samples": 10000, "mu": 0.5}


def _common(p, *names):
    if "transform" in names:
        p.add_argument("--transform", help="transform spec, e.g. logpower:alpha=0.5")
    if "field" in names:
        p.add_argument("--field", help="field CSV (x,value or x,y,value)")
    if "domain" in names:
        p.add_argument("--domain", help="domain JSON (inline or path)")
    if "h" in names:
        p.add_argument("--h", type=float, help="grid spacing (overrides the domain's)")
    if "tolerance" in names:
        p.add_argument("--tolerance", type=float)
    p.add_argument("--out", help="write the artifact here (atomic)")
    p.add_argument("--config", help="JSON defaults merged before flags")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fconcavity", description="F-concavity laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="certify F-concavity of a field")
    _common(p, "transform", "field", "domain", "h", "tolerance")
    p.add_argument("--quasiconcave", action="store_true", help="check quasiconcavity instead")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("mean", help="F-mean of two numbers")
    _common(p, "transform")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--mu", type=float)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("evolve", help="Dirichlet heat flow (Crank-Nicolson)")
    _common(p, "field", "domain", "h")
    p.add_argument("--initial", help="sine | indicator:lo=<a>,hi=<b> (instead of --field)")
    p.add_argument("--dt", type=float)
    p.add_argument("--t", type=float, action="append", default=[], help="target time (repeatable)")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("eigen", help="first Dirichlet eigenpair")
    _common(p, "domain", "h", "tolerance")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("screen", help="Gaussian screen s -> F(k exp(-s^2))")
    _common(p, "transform", "tolerance")
    p.add_argument("--k", type=float, action="append", default=[], help="amplitude (repeatable)")
    p.add_argument("--s-max", dest="s_max", type=float)
    p.add_argument("--ds", type=float)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("harness", help="named experiments")
    p.add_argument("action", choices=["run", "list"])
    p.add_argument("experiment", nargs="?")
    _common(p, "transform", "h", "tolerance")
    p.add_argument("--dt", type=float)
    p.add_argument("--t", type=float, action="append", default=[])
    p.add_argument("--k", type=float, action="append", default=[])
    p.add_argument("--value-floor", dest="value_floor", type=float)
    p.set_defaults(func=cmd_harness)

    p = sub.add_parser("audit", help="admissibility audit of a transform")
    _common(p, "transform")
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.set_defaults(func=cmd_audit)
    return ap


def _apply_config(args):
    """Merge --config values under explicitly given flags, then fill defaults."""
    args.config_doc = None
    if args.config:
        doc = _json_arg(args.config, "--config")
        if not isinstance(doc, dict):
            raise UsageError("--config must hold a JSON object")
        if args.command == "harness":
            args.config_doc = doc
        else:
            for key, val in doc.items():
                dest = key.replace("-", "_")
                if not hasattr(args, dest) or dest in ("func", "command", "config"):
                    raise UsageError(f"--config: unknown key {key!r} for {args.command}")
                cur = getattr(args, dest)
                if cur is None or cur == []:
                    setattr(args, dest, val)
    if args.command != "harness":
        for key, val in _DEFAULTS.items():
            if hasattr(args, key) and getattr(args, key) is None:
                setattr(args, key, val)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        _apply_config(args)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"fconcavity {args.command}: {exc}\n")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        sys.stderr.write(f"fconcavity {args.command}: no such file {exc.filename!r}\n")
        return EXIT_USAGE
    except ArithmeticError as exc:
        sys.stderr.write(f"fconcavity {args.command}: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
