"""Command-line front end: ``wrdpg <command> [options]``.

Exit status: 0 when every output was written and every configured
threshold passed, 1 on errors, 2 on usage errors, 3 when outputs were
written but a threshold failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import asymptotics, generator, maxent, metrics, model, spectral
from .graph import GraphFormatError, WeightedGraph, format_float, hadamard_power, load_edge_list, save_edge_list

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_THRESHOLD = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_graph(path: str) -> WeightedGraph:
    fmt = "csv" if path.endswith(".csv") else "whitespace"
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, format=fmt)


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"'{args.command}' draws random numbers and needs an explicit --seed")
    return args.seed


# ---------------------------------------------------------------------------
# commands


def cmd_embed(args) -> int:
    W = _read_graph(args.input)
    out = _out_dir(args)
    lines = ["k,index,value"]
    for k in range(1, args.K + 1):
        vals = spectral.scree(hadamard_power(W, k))
        lines += [f"{k},{i + 1},{format_float(v)}" for i, v in enumerate(vals)]
    d = args.d
    if d is None:
        d = spectral.select_dimension(spectral.scree(W.weights))
        print(f"selected d = {d}")
    for emb in spectral.embed_moments(W, d, args.K, args.negative_policy):
        _write(out / f"embed_k{emb.k}.txt", spectral.dump_embedding(emb))
    _write(out / "scree.csv", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_model(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        spec = model.load_sbm_spec(fh)
    out = _out_dir(args)
    pos = model.sbm_latent_positions(spec, args.K)
    N = args.N or spec.N or 1
    for k in range(1, args.K + 1):
        Y = pos[k]
        _write(out / f"latent_k{k}.txt", "".join(" ".join(format_float(v) for v in row) + "\n" for row in Y))
        for l in range(spec.C):
            try:
                cov = asymptotics.sbm_covariance(spec, pos, k, l)
            except asymptotics.SingularCovarianceError as exc:
                print(f"warning: k={k} community {l}: {exc}", file=sys.stderr)
                continue
            ell = asymptotics.confidence_ellipse(cov, Y[l], level=args.level, N=N)
            _write(out / f"covariance_k{k}_c{l}.txt", asymptotics.format_covariance(cov, ell))
    return EXIT_OK


def _fit_options(args) -> dict:
    opts = {"signature_digits": args.signature_digits, "inadmissible": getattr(args, "inadmissible", "error")}
    if args.p0_digits is not None:
        opts["p0_digits"] = args.p0_digits
    if args.grad_tol is not None:
        opts["grad_tol"] = args.grad_tol
    if args.values is not None:
        opts["values"] = args.values
    if args.support is not None:
        opts["support"] = tuple(args.support)
    return opts


def cmd_fit(args) -> int:
    W = _read_graph(args.input)
    out = _out_dir(args)
    fitted = generator.fit_from_graph(W, args.d, args.K, args.kind, args.negative_policy, **_fit_options(args))
    _write(out / "model.txt", fitted.to_text())
    print(f"{len(fitted.models)} edge classes over {fitted.n_pairs} pairs")
    return EXIT_OK


def cmd_generate(args) -> int:
    seed = _require_seed(args)
    out = _out_dir(args)
    if args.model:
        with open(args.model, encoding="utf-8") as fh:
            fitted = generator.FittedGraphModel.from_text(fh.read())
    elif args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            spec = model.load_sbm_spec(fh)
        N = args.N or spec.N
        if not N:
            raise UsageError("generate --spec needs N (in the spec or via --N)")
        z = model.block_assignments(spec.pi, N)
        latent = model.expand_to_nodes(model.sbm_latent_positions(spec, args.K), z)
        p0 = None
        if args.kind == "mixed":
            iu, ju = np.triu_indices(N, 1)
            p0 = 1.0 - spec.B[z[iu], z[ju]]
        fitted = generator.model_from_latent(latent, args.kind, p0=p0, **_fit_options(args))
    else:
        raise UsageError("generate needs --model or --spec")
    rng = generator.make_rng(seed)
    for r in range(args.reps):
        _write(out / f"graph_{r + 1:04d}.tsv", save_edge_list(generator.generate_graph(fitted, rng)))
    return EXIT_OK


def _reports(reference: WeightedGraph, graphs, args, out: Path) -> bool:
    ok = True
    for name in args.metrics:
        ref = metrics.summarize(reference, name, args.mode)
        ens = [metrics.summarize(g, name, args.mode) for g in graphs]
        _write(out / f"{name}_reference.csv", ref.to_csv())
        _write(out / f"{name}_ensemble.csv", _ensemble_csv(name, ens))
        report = metrics.compare_ensemble(ref, ens, z_max=args.z_max, alpha=args.alpha)
        _write(out / f"report_{name}.txt", report.to_text())
        print(f"{name}: ks {report.ks:.4f} (critical {report.ks_critical:.4f}), "
              f"max |z| {max(abs(v) for v in report.z.values()):.2f} -> {'pass' if report.passed else 'FAIL'}")
        ok &= report.passed
    return ok


def _ensemble_csv(name: str, ens) -> str:
    lines = [f"replicate,index,{name}"]
    for r, s in enumerate(ens):
        lines += [f"{r + 1},{i},{format_float(v)}" for i, v in enumerate(s.values)]
    return "\n".join(lines) + "\n"


def cmd_replicate(args) -> int:
    seed = _require_seed(args)
    W = _read_graph(args.input)
    out = _out_dir(args)
    fitted = generator.fit_from_graph(W, args.d, args.K, args.kind, args.negative_policy, **_fit_options(args))
    _write(out / "model.txt", fitted.to_text())
    rng = generator.make_rng(seed)
    graphs = []
    for r in range(args.reps):
        G = generator.generate_graph(fitted, rng)
        graphs.append(G)
        _write(out / f"replicate_{r + 1:04d}.tsv", save_edge_list(WeightedGraph(G.weights, W.labels)))
    if args.reps < 2:
        return EXIT_OK
    return EXIT_OK if _reports(W, graphs, args, out) else EXIT_THRESHOLD


def cmd_validate(args) -> int:
    W = _read_graph(args.input)
    graphs = [_read_graph(p) for p in args.replicates]
    if len(graphs) < 2:
        raise UsageError("validate needs at least 2 replicate files")
    out = _out_dir(args)
    return EXIT_OK if _reports(W, graphs, args, out) else EXIT_THRESHOLD


def cmd_maxent(args) -> int:
    with open(args.input, encoding="utf-8") as fh:
        m = maxent.load_moments(fh)
    truncated = args.support is None
    if args.support is not None:
        support = tuple(args.support)
    elif len(m) == 1:
        support = (0.0, 1.0)
        truncated = False
    else:
        support = maxent.default_support(m)
    opts = dict(max_iter=args.max_iter)
    if args.grad_tol is not None:
        opts["grad_tol"] = args.grad_tol
    g = maxent.fit_maxent(m, support, truncated=truncated, **opts)
    out = Path(args.out) if args.out else None
    record = g.to_record()
    status = EXIT_OK
    if args.restarts:
        rng = generator.make_rng(_require_seed(args))
        runs = maxent.fit_restarts(m, support, args.restarts, rng, truncated=truncated, **opts)
        good = [r for r in runs if isinstance(r, maxent.MaxEntDensity)]
        spread = max((float(np.max(np.abs(r.lambdas - g.lambdas))) for r in good), default=float("nan"))
        close = sum(float(np.max(np.abs(r.lambdas - g.lambdas))) <= args.lambda_tol for r in good)
        summary = (
            f"restarts {len(runs)} converged {len(good)} within_tol {close} "
            f"max_lambda_deviation {format_float(spread)} lambda_tol {format_float(args.lambda_tol)}"
        )
        if out is not None:
            print(summary)
        record += summary + "\n"
        if close != len(runs):
            status = EXIT_THRESHOLD
    if out is None:
        sys.stdout.write(record)
    else:
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "density.txt", record)
        if args.table:
            tab = g.density_table(args.table)
            _write(out / "density_table.csv", "x,g\n" + "".join(f"{format_float(x)},{format_float(y)}\n" for x, y in tab))
    return status


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wrdpg", description="Weighted random dot product graph toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=_seed, default=None, help="64-bit seed (required when sampling)")

    def fitting(sp):
        sp.add_argument("--d", type=_positive_int, required=True, help="embedding dimension")
        sp.add_argument("--K", type=_positive_int, required=True, help="number of moments")
        sp.add_argument("--kind", choices=generator.KINDS, required=True)
        sp.add_argument("--support", type=float, nargs=2, metavar=("A", "B"), help="density support")
        sp.add_argument("--values", type=float, nargs="+", help="discrete support (default: observed weights and 0)")
        sp.add_argument("--negative-policy", choices=("error", "clamp"), default="error")
        sp.add_argument("--grad-tol", type=float, default=None)
        sp.add_argument("--signature-digits", type=_positive_int, default=10)
        sp.add_argument("--p0-digits", type=_positive_int, default=None)
        sp.add_argument(
            "--inadmissible", choices=("error", "shrink"), default="error",
            help="what to do with per-pair moment estimates outside the admissible set",
        )

    def thresholds(sp):
        sp.add_argument("--metrics", nargs="+", choices=("degree", "geodesic", "betweenness"), default=["degree"])
        sp.add_argument("--mode", choices=metrics.MODES, default="hop", help="path-length convention")
        sp.add_argument("--z-max", type=float, default=3.0)
        sp.add_argument("--alpha", type=float, default=0.01, help="KS test level")

    sp = sub.add_parser("embed", help="spectral embedding of W^(k), k = 1..K")
    sp.add_argument("--input", required=True)
    sp.add_argument("--d", type=_positive_int, default=None, help="dimension (default: scree elbow)")
    sp.add_argument("--K", type=_positive_int, required=True)
    sp.add_argument("--negative-policy", choices=("error", "clamp"), default="error")
    common(sp)
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("model", help="analytic SBM latent positions and covariance ellipses")
    sp.add_argument("--spec", required=True, help="SBM spec (JSON)")
    sp.add_argument("--K", type=_positive_int, required=True)
    sp.add_argument("--N", type=_positive_int, default=None, help="graph size for the ellipses")
    sp.add_argument("--level", type=float, default=0.95)
    common(sp)
    sp.set_defaults(func=cmd_model)

    sp = sub.add_parser("fit", help="fit per-edge weight models to an observed graph")
    sp.add_argument("--input", required=True)
    fitting(sp)
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("generate", help="sample graphs from a fitted model or an SBM spec")
    sp.add_argument("--model", help="fitted model file from 'fit'")
    sp.add_argument("--spec", help="SBM spec (JSON); latent positions are analytic")
    sp.add_argument("--N", type=_positive_int, default=None)
    sp.add_argument("--K", type=_positive_int, default=None)
    sp.add_argument("--kind", choices=generator.KINDS, default=None)
    sp.add_argument("--support", type=float, nargs=2, metavar=("A", "B"))
    sp.add_argument("--values", type=float, nargs="+")
    sp.add_argument("--grad-tol", type=float, default=None)
    sp.add_argument("--signature-digits", type=_positive_int, default=10)
    sp.add_argument("--p0-digits", type=_positive_int, default=None)
    sp.add_argument("--reps", type=_positive_int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("replicate", help="fit, generate replicates and compare them with the input")
    sp.add_argument("--input", required=True)
    fitting(sp)
    sp.add_argument("--reps", type=_positive_int, required=True)
    thresholds(sp)
    common(sp)
    sp.set_defaults(func=cmd_replicate)

    sp = sub.add_parser("validate", help="compare replicate edge lists with a reference graph")
    sp.add_argument("--input", required=True, help="reference edge list")
    sp.add_argument("--replicates", nargs="+", required=True)
    thresholds(sp)
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("maxent", help="max-entropy density from a moments file")
    sp.add_argument("--input", required=True, help="moments, one per line, m[0] first")
    sp.add_argument("--support", type=float, nargs=2, metavar=("A", "B"))
    sp.add_argument("--restarts", type=int, default=0, help="extra fits from random starts")
    sp.add_argument("--lambda-tol", type=float, default=1e-3)
    sp.add_argument("--grad-tol", type=float, default=None)
    sp.add_argument("--max-iter", type=_positive_int, default=500)
    sp.add_argument("--table", type=_positive_int, default=None, help="points in the density table")
    sp.add_argument("--out", default=None, help="output directory (default: stdout)")
    sp.add_argument("--seed", type=_seed, default=None)
    sp.set_defaults(func=cmd_maxent)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    if args.command == "generate" and args.spec and (args.K is None or args.kind is None):
        print("wrdpg generate: --spec needs --K and --kind", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "maxent" and args.restarts < 0:
        print("wrdpg maxent: --restarts must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    threads = os.environ.get("WRDPG_THREADS")
    if threads is not None and not threads.isdigit():
        print(f"wrdpg: ignoring WRDPG_THREADS={threads!r}", file=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"wrdpg {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, GraphFormatError, ValueError, RuntimeError, np.linalg.LinAlgError, OverflowError) as exc:
        print(f"wrdpg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
