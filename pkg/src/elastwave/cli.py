"""Command-line front end.

A thin client over the service: every command builds a request, posts it
(in-process by default, or to ``--server URL``), and formats the response.
Exit codes: 0 success, 1 usage, 2 input validation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .service.client import ServiceClient

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class _CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parse_constants(text: str) -> dict[str, float]:
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise _CliFailure(EXIT_USAGE, f"bad constant {item!r}: expected name=value")
        key, value = item.split("=", 1)
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise _CliFailure(EXIT_USAGE, f"bad constant value in {item!r}") from None
    return out


def _parse_direction(text: str) -> list[float]:
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise _CliFailure(EXIT_USAGE, f"direction must have 3 components, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise _CliFailure(EXIT_USAGE, f"non-numeric direction {text!r}") from None


def _parse_initial(text: str) -> dict:
    """Mini-spec 'kind:key=value,...'; 'csv:path=FILE' loads sample pairs."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    params = _parse_constants(rest) if kind != "csv" else {}
    if kind == "csv":
        opts = dict(item.split("=", 1) for item in rest.split(",") if item)
        path = opts.get("path")
        if not path:
            raise _CliFailure(EXIT_USAGE, "csv initial data needs path=FILE")
        try:
            rows = [(float(a), float(b))
                    for a, b in csv.reader(open(path, newline=""))
                    if a.strip() and not a.lstrip().startswith("#")]
        except (OSError, ValueError) as exc:
            raise _CliFailure(EXIT_VALIDATION, f"cannot read initial data {path}: {exc}")
        return {"kind": "samples",
                "sample_eta": [r[0] for r in rows],
                "sample_values": [r[1] for r in rows]}
    if kind not in ("sine", "gaussian", "box", "zero"):
        raise _CliFailure(EXIT_USAGE, f"unknown initial profile {kind!r}")
    return {"kind": kind, **params}


def _material_payload(args) -> dict:
    if args.material and args.builtin:
        raise _CliFailure(EXIT_USAGE, "give either --material or --builtin, not both")
    if args.material:
        try:
            with open(args.material, "r", encoding="utf-8") as fh:
                return {"document": json.load(fh)}
        except (OSError, json.JSONDecodeError) as exc:
            raise _CliFailure(EXIT_VALIDATION,
                              f"cannot parse material file {args.material}: {exc}")
    if args.builtin:
        constants = _parse_constants(args.constants or "")
        return {"builtin": {"kind": args.builtin, "constants": constants,
                            "density": args.density}}
    raise _CliFailure(EXIT_USAGE, "a material is required (--material or --builtin)")


def _tolerances_payload(args) -> dict:
    return {"degeneracy_reltol": args.degeneracy_reltol,
            "vanish_tol": args.vanish_tol, "mu_tol": args.mu_tol}


def _request(client: ServiceClient, path: str, payload: dict) -> dict:
    status, body = client.post(path, payload)
    if status == 200:
        return body
    detail = body.get("detail") if isinstance(body, dict) else None
    if isinstance(detail, dict):
        kind, message = detail.get("kind"), detail.get("message", str(detail))
    else:
        kind, message = None, json.dumps(detail or body)
    if status in (400, 422) or kind == "validation":
        raise _CliFailure(EXIT_VALIDATION, f"invalid input: {message}")
    raise _CliFailure(EXIT_NUMERICAL, f"numerical failure: {message}")


def _fmt(x) -> str:
    return repr(float(x))


def _print_profile(p: dict, out):
    head = {"longitudinal_single": "quadratic single wave",
            "shear_single_cubic": "cubic single wave",
            "degenerate_pair": "degenerate shear pair"}[p["kind"]]
    print(f"  {head} (canonical form: {p['canonical_form']}), "
          f"speed {_fmt(p['speed'])}", file=out)
    if p["gamma"] is not None:
        print(f"    gamma = {_fmt(p['gamma'])}", file=out)
    if p["g_cubic"] is not None:
        print(f"    cubic coefficient = {_fmt(p['g_cubic'])}", file=out)
    if p["kind"] == "degenerate_pair":
        g = p["gammas"]
        print(f"    coupling class {p['coupling_class']} "
              f"(pattern basis angle {_fmt(p['theta_pattern'])})", file=out)
        if p.get("basis"):
            for i, row in enumerate(p["basis"], start=1):
                print(f"    basis k{i} = [{', '.join(_fmt(x) for x in row)}]",
                      file=out)
        print(f"    gamma_s={_fmt(g['gamma_s'])} gamma_s_s2={_fmt(g['gamma_s_s2'])} "
              f"gamma_s2_s={_fmt(g['gamma_s2_s'])} gamma_s2={_fmt(g['gamma_s2'])}",
              file=out)
        gc = p["g"]
        print(f"    g111={_fmt(gc['g111'])} g112={_fmt(gc['g112'])} "
              f"g122={_fmt(gc['g122'])} g222={_fmt(gc['g222'])}", file=out)
        print(f"    mu={_fmt(p['mu'])} mu_gamma={_fmt(p['mu_gamma'])} "
              f"gamma1={_fmt(p['gamma1'])} gamma3={_fmt(p['gamma3'])}", file=out)
        verdict = "DECOUPLED" if p["decoupled"] else "COUPLED"
        theta = ("" if p["theta_star"] is None
                 else f" (decoupling angle {_fmt(p['theta_star'])})")
        print(f"    decoupling: {verdict}{theta}", file=out)
        if p["cubic_pair"]:
            print(f"    cubic coefficients of the decoupled pair: "
                  f"{_fmt(p['cubic_pair'][0])}, {_fmt(p['cubic_pair'][1])}", file=out)
    for note in p.get("notes", []):
        print(f"    note: {note}", file=out)


def cmd_analyze(args, client: ServiceClient) -> int:
    payload = {"material": _material_payload(args),
               "direction": _parse_direction(args.direction),
               "tolerances": _tolerances_payload(args)}
    body = _request(client, "/analyze", payload)
    if args.json:
        json.dump(body, sys.stdout, indent=2, sort_keys=True)
        print()
        return EXIT_OK
    out = sys.stdout
    print(f"direction: [{', '.join(_fmt(x) for x in body['direction'])}]", file=out)
    print("modes (alpha = squared speed, descending):", file=out)
    for i, mode in enumerate(body["modes"]):
        pol = ", ".join(_fmt(x) for x in mode["polarization"])
        print(f"  {i}: alpha={_fmt(mode['alpha'])} speed={_fmt(mode['speed'])} "
              f"k=[{pol}]", file=out)
    deg = body["degeneracy"]
    pair = f" modes {tuple(deg['pair'])}" if deg["pair"] else ""
    print(f"degeneracy: {deg['kind']}{pair} (relative gap {deg['gap']:.3e})",
          file=out)
    print("longitudinal system:", file=out)
    _print_profile(body["longitudinal"], out)
    for p in body["shear"]:
        print("shear system:", file=out)
        _print_profile(p, out)
    return EXIT_OK


def _write_scan_csv(body: dict, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["nx", "ny", "nz", "alpha1", "alpha2", "alpha3", "gap", "label"])
    if body["globally_degenerate"]:
        alphas = body["representative_alphas"] or [0.0, 0.0, 0.0]
        writer.writerow(["0", "0", "1", *map(_fmt, alphas), "0.0",
                         "globally_degenerate"])
        return
    for row in body["axes"]:
        writer.writerow([*(_fmt(x) for x in row["n"]),
                         *(_fmt(a) for a in row["alphas"]),
                         _fmt(row["gap"]), row["label"]])


def cmd_scan(args, client: ServiceClient) -> int:
    if args.grid < 16:
        raise _CliFailure(EXIT_USAGE, "scan grid resolution must be at least 16")
    payload = {"material": _material_payload(args), "resolution": args.grid,
               "reltol": args.reltol}
    if args.threads:
        payload["threads"] = args.threads
    body = _request(client, "/scan", payload)
    if args.output == "-":
        _write_scan_csv(body, sys.stdout)
    else:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            _write_scan_csv(body, fh)
        print(f"wrote {len(body['axes'])} axis rows to {args.output}"
              + (" (globally degenerate)" if body["globally_degenerate"] else ""))
    return EXIT_OK


def cmd_check_decoupling(args, client: ServiceClient) -> int:
    payload = {"material": _material_payload(args),
               "direction": _parse_direction(args.direction),
               "tolerances": _tolerances_payload(args)}
    body = _request(client, "/check-decoupling", payload)
    if args.json:
        json.dump(body, sys.stdout, indent=2, sort_keys=True)
        print()
        return EXIT_OK
    verdict = "DECOUPLED" if body["decoupled"] else "COUPLED"
    print(f"{verdict}  mu={_fmt(body['mu'])}  mu_gamma={_fmt(body['mu_gamma'])}  "
          f"class={body['coupling_class']}")
    if body["theta_star"] is not None:
        print(f"decoupling basis angle theta_star = {_fmt(body['theta_star'])}")
    return EXIT_OK


def cmd_evolve(args, client: ServiceClient) -> int:
    if args.cells < 16:
        raise _CliFailure(EXIT_USAGE, "grid must have at least 16 cells")
    solver = {"cells": args.cells, "length": args.length, "cfl": args.cfl,
              "tau_end": args.tau_end, "boundary": args.boundary,
              "snapshots": args.snapshots}
    payload = {"material": _material_payload(args),
               "direction": _parse_direction(args.direction),
               "wave": args.wave,
               "initial": _parse_initial(args.initial),
               "solver": solver,
               "tolerances": _tolerances_payload(args)}
    if args.initial2:
        payload["initial2"] = _parse_initial(args.initial2)
    body = _request(client, "/evolve", payload)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ncomp = body["system"]["ncomp"]
    header = ["eta", "sigma1"] + (["sigma2"] if ncomp == 2 else [])
    files = []
    for i, snap in enumerate(body["snapshots"]):
        name = f"snapshot_{i:03d}.csv"
        with open(outdir / name, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for eta, row in zip(body["eta"], snap["sigma"]):
                writer.writerow([_fmt(eta), *(_fmt(v) for v in row)])
        files.append({"file": name, "tau": snap["tau"]})
    manifest = dict(body["manifest"])
    manifest["snapshots"] = files
    manifest["diagnostics"] = body["diagnostics"]
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(files)} snapshots and manifest.json to {outdir}")
    return EXIT_OK


def cmd_serve(args, client: ServiceClient) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_material_args(p: _Parser):
    p.add_argument("--material", help="material JSON file")
    p.add_argument("--builtin", choices=["isotropic", "cubic_m3m"],
                   help="built-in material constructor")
    p.add_argument("--constants", default="",
                   help="comma-separated name=value constants for --builtin")
    p.add_argument("--density", type=float, default=1.0)


def _add_tolerance_args(p: _Parser):
    p.add_argument("--degeneracy-reltol", type=float, default=1e-8,
                   help="relative eigenvalue gap treated as coincident")
    p.add_argument("--vanish-tol", type=float, default=1e-9,
                   help="relative size below which a coefficient counts as zero")
    p.add_argument("--mu-tol", type=float, default=1e-9,
                   help="relative tolerance of the decoupling invariant")


def build_parser() -> _Parser:
    parser = _Parser(prog="elastwave",
                     description="Weakly nonlinear plane-wave analysis toolkit")
    parser.add_argument("--server", default=None,
                        help="URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="per-direction wave and coupling report")
    _add_material_args(p)
    _add_tolerance_args(p)
    p.add_argument("-n", "--direction", required=True, help="propagation direction x,y,z")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("scan", help="search the direction sphere for acoustic axes")
    _add_material_args(p)
    p.add_argument("--grid", type=int, default=64, help="hemisphere grid resolution")
    p.add_argument("--reltol", type=float, default=1e-8,
                   help="relative gap accepted as an axis")
    p.add_argument("--threads", type=int, default=0,
                   help="scan workers (0: ELASTWAVE_THREADS or auto)")
    p.add_argument("--output", default="-", help="CSV path or - for stdout")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("check-decoupling",
                       help="test whether the shear pair decouples")
    _add_material_args(p)
    _add_tolerance_args(p)
    p.add_argument("-n", "--direction", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_decoupling)

    p = sub.add_parser("evolve", help="integrate the reduced amplitude equations")
    _add_material_args(p)
    _add_tolerance_args(p)
    p.add_argument("-n", "--direction", required=True)
    p.add_argument("--wave", default="auto",
                   choices=["auto", "longitudinal", "pair", "shear1", "shear2"])
    p.add_argument("--initial", default="gaussian:center=0.5,width=0.1,amplitude=0.1",
                   help="initial data spec, e.g. sine:amplitude=0.1,cycles=1 "
                        "or csv:path=FILE")
    p.add_argument("--initial2", default=None,
                   help="initial data of the second amplitude (pair systems)")
    p.add_argument("--cells", type=int, default=256)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--cfl", type=float, default=0.45)
    p.add_argument("--tau-end", type=float, required=True)
    p.add_argument("--boundary", default="periodic", choices=["periodic", "outflow"])
    p.add_argument("--snapshots", type=int, default=5)
    p.add_argument("--outdir", default="evolve_out")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8410)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    client = ServiceClient(server=args.server)
    try:
        return args.func(args, client)
    except _CliFailure as exc:
        print(f"elastwave: {exc}", file=sys.stderr)
        return exc.code
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
