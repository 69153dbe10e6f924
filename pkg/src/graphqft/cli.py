"""Command line front end.

Every verb resolves its options into a config block that is echoed with the
output, performs no arithmetic of its own beyond dispatching into the
library, and emits machine-first JSON or CSV (floats with 17 significant
digits in CSV).  Exit codes: 0 ok, 1 verification failure, 2 usage or input
error, 3 internal numerical fault.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import acceptance, continuum, feynman, gaussian, gluing, nonpert, series
from .errors import GraphQFTError, NumericalFault
from .graphs import BoundaryMarking, GluingSpec, Graph, graph_from_obj

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _labeled_matrix(mat: np.ndarray, rows, cols) -> dict:
    return {
        "rows": list(rows),
        "cols": list(cols),
        "entries": [[float(v) for v in row] for row in np.atleast_2d(mat)],
    }


def _load_graph(path: str):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read graph file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"graph file {path} is not valid JSON: {exc}")
    try:
        return graph_from_obj(obj)
    except (GraphQFTError, KeyError, TypeError) as exc:
        raise UsageError(f"graph file {path} is malformed: {exc}")


class UsageError(Exception):
    pass


def _parse_potential(spec: str | None) -> feynman.Potential:
    if not spec:
        return feynman.Potential()
    couplings = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item or not item.startswith("p"):
            raise UsageError(f"bad potential term {item!r}; expected e.g. p3=1.5")
        name, val = item.split("=", 1)
        try:
            couplings[int(name[1:])] = float(val)
        except ValueError:
            raise UsageError(f"bad potential term {item!r}")
    try:
        return feynman.Potential(couplings)
    except GraphQFTError as exc:
        raise UsageError(str(exc))


def _emit(payload: dict, args) -> None:
    if getattr(args, "pretty", False):
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(json.dumps(payload, sort_keys=True, default=str))


def _emit_csv(rows: list[dict], header: list[str]) -> None:
    print(",".join(header))
    for row in rows:
        cells = []
        for key in header:
            v = row.get(key, "")
            cells.append(_fmt(v) if isinstance(v, float) else str(v))
        print(",".join(cells))


def _config_block(args, **extra) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func" and v is not None}
    cfg.update(extra)
    return cfg


def cmd_compute(args) -> int:
    g, boundary = _load_graph(args.graph)
    cfg = _config_block(args)
    if args.boundary:
        if boundary is None:
            raise UsageError("graph file has no boundary block")
        rel = gaussian.relative_data(g, boundary, args.m2)
        payload = {
            "config": cfg,
            "detKrel": rel.det_k_rel,
            "propagator": _labeled_matrix(rel.propagator, rel.bulk_vertices, rel.bulk_vertices),
            "dn": _labeled_matrix(rel.dn, rel.boundary_vertices, rel.boundary_vertices),
            "ext": _labeled_matrix(rel.ext, rel.bulk_vertices, rel.boundary_vertices),
        }
    else:
        gd = gaussian.gaussian_data(g, args.m2)
        payload = {
            "config": cfg,
            "detK": gd.det_k,
            "z": gd.z(),
            "propagator": _labeled_matrix(gd.propagator, g.vertices, g.vertices),
        }
    _emit(payload, args)
    return EXIT_OK


def cmd_glue_check(args) -> int:
    gl_graph, gl_boundary = _load_graph(args.left)
    gr_graph, gr_boundary = _load_graph(args.right)
    if gl_boundary is None or gr_boundary is None:
        raise UsageError("both graph files need a boundary block")
    if args.identification:
        if "=" in args.identification:
            ident = dict(item.split("=", 1) for item in args.identification.split(","))
        else:
            with open(args.identification) as fh:
                ident = json.load(fh)
    else:
        ident = {v: v for v in gl_boundary.sorted_vertices}
    spec = GluingSpec(gl_boundary, gr_boundary, ident)
    rep = gluing.glue_check(spec, args.m2)
    payload = {"config": _config_block(args), "report": rep.as_dict()}
    payload["passed"] = (
        rep.max_propagator_residual < args.tolerance and rep.det_residual < args.tolerance
    )
    _emit(payload, args)
    return EXIT_OK if payload["passed"] else EXIT_VERIFICATION


def cmd_sweep_continuum(args) -> int:
    eps = tuple(float(x) for x in args.epsilons.split(","))
    rows = continuum.sweep_continuum(args.shape, args.L, args.m, eps, args.bc)
    dicts = [r.as_dict() for r in rows]
    if args.format == "json":
        _emit({"config": _config_block(args), "rows": dicts}, args)
    else:
        _emit_csv(dicts, ["eps", "quantity", "value", "target", "rel_error", "flag"])
    return EXIT_OK


def cmd_pathsum(args) -> int:
    g, boundary = _load_graph(args.graph)
    u = args.source or g.vertices[0]
    v = args.target or (g.vertices[1] if g.n > 1 else g.vertices[0])
    res = series.series_green(g, args.m2, 1e-14)
    green = res.value[g.index(u), g.index(v)]
    rows = []
    partial = 0.0
    from .paths import laplacian_power, path_count_matrix

    for k in range(args.max_len + 1):
        if args.kind == "paths":
            count = path_count_matrix(g, k)[g.index(u)][g.index(v)]
            lam = args.m2 + np.array([g.valence(w) for w in g.vertices], dtype=float)
            b = g.adjacency().astype(float) / lam[:, None]
            term = float(
                (np.linalg.matrix_power(b, k) @ np.diag(1.0 / lam))[g.index(u), g.index(v)]
            )
        else:
            count = (-1) ** k * laplacian_power(g, k)[g.index(u)][g.index(v)]
            term = count * float(args.m2) ** -(k + 1)
        partial += term
        rows.append({"order": k, "count": count, "partial_sum": partial})
    if args.format == "json":
        _emit(
            {
                "config": _config_block(args, source=u, target=v),
                "rows": rows,
                "green_reference": green,
            },
            args,
        )
    else:
        _emit_csv(rows, ["order", "count", "partial_sum"])
    return EXIT_OK


def cmd_feynman(args) -> int:
    pot = _parse_potential(args.potential)
    if pot.is_empty():
        raise UsageError("an interaction potential is required, e.g. --potential p4=1")
    graphs = feynman.enumerate_feynman_graphs(args.order, args.mode, pot.support())
    gd = None
    rd = None
    if args.graph:
        g, boundary = _load_graph(args.graph)
        if args.mode == "relative":
            if boundary is None:
                raise UsageError("relative mode needs a graph file with a boundary block")
            rd = gaussian.relative_data(g, boundary, args.m2)
        else:
            gd = gaussian.gaussian_data(g, args.m2)
    rows = []
    for fg in graphs:
        row = {
            "graph": fg.label(),
            "aut": fg.aut,
            "order": fg.order_closed() if args.mode == "closed" else fg.order_relative(),
        }
        if gd is not None:
            row["weight"] = feynman.weight_closed(fg, gd, pot)
        if rd is not None:
            phi = np.zeros(len(rd.boundary_vertices)) if args.phi is None else np.array(
                [float(x) for x in args.phi.split(",")]
            )
            row["weight"] = feynman.weight_relative(fg, rd, pot, phi)
        rows.append(row)
    if args.format == "json":
        _emit({"config": _config_block(args), "rows": rows}, args)
    else:
        header = ["graph", "aut", "order"] + (["weight"] if (gd or rd) else [])
        _emit_csv(rows, header)
    return EXIT_OK


def cmd_nonpert(args) -> int:
    g, boundary = _load_graph(args.graph)
    pot = _parse_potential(args.potential)
    scheme = nonpert.QuadratureScheme(nodes=args.quad_nodes, seed=args.seed)
    if args.boundary:
        if boundary is None:
            raise UsageError("graph file has no boundary block")
        phi = (
            np.zeros(len(boundary.sorted_vertices))
            if args.phi is None
            else np.array([float(x) for x in args.phi.split(",")])
        )
        res = nonpert.z_rel_nonpert(g, boundary, args.m2, pot, args.hbar, phi, scheme)
    else:
        res = nonpert.z_nonpert(g, args.m2, pot, args.hbar, scheme)
    _emit(
        {
            "config": _config_block(args),
            "value": res.value,
            "error_estimate": res.error_estimate,
            "nodes_used": res.nodes_used,
            "method": res.method,
        },
        args,
    )
    return EXIT_OK


def cmd_verify_all(args) -> int:
    results = acceptance.run_all(seed=args.seed)
    payload = {
        "config": _config_block(args),
        "criteria": [
            {
                "index": r.index,
                "name": r.name,
                "passed": r.passed,
                "elapsed": r.elapsed,
                "details": r.details,
            }
            for r in results
        ],
        "passed": all(r.passed for r in results),
    }
    if args.format == "json":
        _emit(payload, args)
    return EXIT_OK if payload["passed"] else EXIT_VERIFICATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphqft", description=__doc__)
    p.add_argument("--threads", type=int, default=None, help="advisory BLAS thread count")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, m2: bool = True):
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--pretty", action="store_true")
        if m2:
            sp.add_argument("--m2", type=float, required=True, help="squared mass, > 0")

    sp = sub.add_parser("compute", help="Gaussian data of a graph (or relative data)")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--boundary", action="store_true", help="use the file's boundary block")
    common(sp)
    sp.set_defaults(func=cmd_compute)

    sp = sub.add_parser("glue-check", help="verify propagator/determinant gluing")
    sp.add_argument("--left", required=True)
    sp.add_argument("--right", required=True)
    sp.add_argument("--identification", help="a=b,c=d pairs or a JSON file")
    sp.add_argument("--tolerance", type=float, default=1e-9)
    common(sp)
    sp.set_defaults(func=cmd_glue_check)

    sp = sub.add_parser("sweep-continuum", help="lattice-to-continuum sweep")
    sp.add_argument("--shape", choices=("line", "circle"), required=True)
    sp.add_argument("--L", type=float, default=1.0)
    sp.add_argument("--m", type=float, default=1.0)
    sp.add_argument("--epsilons", default="0.1,0.05,0.025,0.0125")
    sp.add_argument("--bc", choices=("DD", "NN", "DN", "closed"), default="DD")
    common(sp, m2=False)
    sp.set_defaults(func=cmd_sweep_continuum)

    sp = sub.add_parser("pathsum", help="per-order path counts and partial sums")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--max-len", type=int, default=6, dest="max_len")
    sp.add_argument("--source")
    sp.add_argument("--target")
    sp.add_argument("--kind", choices=("paths", "hpaths"), default="paths")
    common(sp)
    sp.set_defaults(func=cmd_pathsum)

    sp = sub.add_parser("feynman", help="diagram enumeration and weights")
    sp.add_argument("--order", type=float, default=1)
    sp.add_argument("--potential", required=True, help="p3=...,p4=...")
    sp.add_argument("--mode", choices=("closed", "relative"), default="closed")
    sp.add_argument("--graph")
    sp.add_argument("--hbar", type=float, default=1.0)
    sp.add_argument("--phi", help="boundary field values, comma separated")
    sp.add_argument("--m2", type=float, default=1.0)
    sp.add_argument("--format", choices=("json", "csv"), default="csv")
    sp.add_argument("--pretty", action="store_true")
    sp.set_defaults(func=cmd_feynman)

    sp = sub.add_parser("nonpert", help="nonperturbative quadrature")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--potential")
    sp.add_argument("--hbar", type=float, default=1.0)
    sp.add_argument("--quad-nodes", type=int, default=64, dest="quad_nodes")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--boundary", action="store_true")
    sp.add_argument("--phi")
    common(sp)
    sp.set_defaults(func=cmd_nonpert)

    sp = sub.add_parser("verify-all", help="run the full verification suite")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--format", choices=("json", "none"), default="json")
    sp.add_argument("--pretty", action="store_true")
    sp.set_defaults(func=cmd_verify_all)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(json.dumps({"error": str(exc), "kind": "usage"}), file=sys.stderr)
        return EXIT_USAGE
    except NumericalFault as exc:
        print(json.dumps({"error": str(exc), "kind": "numerical"}), file=sys.stderr)
        return EXIT_NUMERICAL
    except GraphQFTError as exc:
        print(json.dumps({"error": str(exc), "kind": "input"}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
