"""Command-line interface.

Subcommands: generate, detect, estimate, test, nast, eta, experiment.
Exit status 0 on success, 2 on usage errors (argparse or bad flag
values), 1 on data errors (unreadable or malformed input).  All output
is deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import sys
from typing import IO, Optional, Sequence

from .edgelist import EdgeListError, load_multilayer_edgelist, write_labels, \
    write_multilayer_edgelist
from .estimate import estimate_connectivity
from .experiments import ExperimentConfig, run_experiment
from .model import GeneratorConfig, generate_msbm
from .sequential import eta_estimate, nast, test_at_k0
from .spectral import detect_communities

__all__ = ["cli_dispatch", "main"]

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE = 2


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nast",
        description="Estimate the number of communities in multi-layer networks "
        "with a normalized-aggregation spectral test.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", required=True, help="extended edge-list file")
        p.add_argument("--n", type=_positive_int, default=None,
                       help="node count (default: max observed index)")
        p.add_argument("--L", type=_positive_int, default=None,
                       help="layer count (default: max observed layer)")

    gen = sub.add_parser("generate", help="draw a synthetic multi-layer SBM network")
    gen.add_argument("--n", type=_positive_int, required=True)
    gen.add_argument("--K", type=_positive_int, required=True)
    gen.add_argument("--L", type=_positive_int, default=5)
    gen.add_argument("--recipe", choices=("exp1", "exp2or3"), default="exp2or3")
    gen.add_argument("--rho", type=float, default=0.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="edge-list output path")
    gen.add_argument("--labels-out", default=None,
                     help="labels CSV output path (default: OUT.labels)")

    det = sub.add_parser("detect", help="community labels for a fixed K0")
    add_io_flags(det)
    det.add_argument("--k0", type=_positive_int, required=True)
    det.add_argument("--seed", type=int, default=0)
    det.add_argument("--out", default=None, help="labels CSV path (default: stdout)")

    est = sub.add_parser("estimate", help="fitted block probabilities for a fixed K0")
    add_io_flags(est)
    est.add_argument("--k0", type=_positive_int, required=True)
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--out", default=None, help="CSV path (default: stdout)")

    tst = sub.add_parser("test", help="goodness-of-fit test at one K0")
    add_io_flags(tst)
    tst.add_argument("--k0", type=_positive_int, required=True)
    tst.add_argument("--alpha", type=float, default=0.05)
    tst.add_argument("--seed", type=int, default=0)

    nst = sub.add_parser("nast", help="sequential test for the community count")
    add_io_flags(nst)
    nst.add_argument("--alpha", type=float, default=0.05)
    nst.add_argument("--k-max", type=_positive_int, default=None,
                     help="search bound (default: ceil(sqrt(n)))")
    nst.add_argument("--seed", type=int, default=0)

    eta = sub.add_parser("eta", help="largest-relative-drop estimate of the count")
    add_io_flags(eta)
    eta.add_argument("--k-max", type=_positive_int, default=None,
                     help="search bound (default: ceil(sqrt(n)))")
    eta.add_argument("--seed", type=int, default=0)

    exp = sub.add_parser("experiment", help="Monte Carlo study runner")
    exp.add_argument("--kind", required=True,
                     choices=("normality", "size_power", "accuracy", "t_profile"))
    exp.add_argument("--n", type=_positive_int, nargs="+", default=[400])
    exp.add_argument("--K", type=_positive_int, nargs="+", default=[1, 2, 3])
    exp.add_argument("--L", type=_positive_int, default=5)
    exp.add_argument("--rho", type=float, nargs="+", default=None)
    exp.add_argument("--replicates", type=_positive_int, default=100)
    exp.add_argument("--alpha", type=float, default=0.05)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--k0-max", type=_positive_int, default=None)
    exp.add_argument("--workers", type=_positive_int, default=1)
    exp.add_argument("--out", required=True, help="long-format CSV output path")
    return parser


def _check_alpha(alpha: float, parser_error) -> None:
    if not 0.0 < alpha < 1.0:
        parser_error(f"--alpha must lie strictly between 0 and 1, got {alpha}")


def _load(args):
    return load_multilayer_edgelist(args.input, n=args.n, L=args.L)


def _open_out(path: Optional[str], stdout: IO[str]):
    if path is None:
        class _NoClose:
            def __enter__(self_inner):
                return stdout

            def __exit__(self_inner, *exc):
                return False

        return _NoClose()
    return open(path, "w", encoding="utf-8", newline="\n")


def _cmd_generate(args, stdout: IO[str]) -> int:
    cfg = GeneratorConfig(n=args.n, L=args.L, K=args.K, connectivity=args.recipe,
                          rho=args.rho if args.recipe == "exp2or3" else None, seed=args.seed)
    net, labels = generate_msbm(cfg)
    write_multilayer_edgelist(net, args.out)
    labels_path = args.labels_out or (args.out + ".labels")
    write_labels(labels, labels_path)
    edges = sum(net.edge_counts())
    stdout.write(f"n={net.n} L={net.L} K={args.K} edges={edges} out={args.out} "
                 f"labels={labels_path}\n")
    return EXIT_OK


def _cmd_detect(args, stdout: IO[str]) -> int:
    net = _load(args)
    labels = detect_communities(net, args.k0, args.seed)
    with _open_out(args.out, stdout) as fh:
        write_labels(labels, fh)
    return EXIT_OK


def _cmd_estimate(args, stdout: IO[str]) -> int:
    net = _load(args)
    labels = detect_communities(net, args.k0, args.seed)
    est = estimate_connectivity(net, labels)
    with _open_out(args.out, stdout) as fh:
        fh.write("layer,row,col,value\n")
        for ell, B in enumerate(est.Bhat, start=1):
            for k in range(est.K0):
                for l in range(est.K0):
                    fh.write(f"{ell},{k + 1},{l + 1},{B[k, l]:.17g}\n")
    return EXIT_OK


def _cmd_test(args, stdout: IO[str]) -> int:
    net = _load(args)
    outcome = test_at_k0(net, args.k0, args.alpha, args.seed)
    stdout.write("K0,T,z_crit,decision\n")
    decision = "reject" if outcome.reject else "accept"
    stdout.write(f"{outcome.K0},{outcome.T:.17g},{outcome.z_crit:.17g},{decision}\n")
    return EXIT_OK


def _cmd_nast(args, stdout: IO[str]) -> int:
    net = _load(args)
    result = nast(net, alpha=args.alpha, k_max=args.k_max, seed=args.seed)
    stdout.write("K0,T,z_crit,decision\n")
    for outcome in result.trace:
        decision = "reject" if outcome.reject else "accept"
        stdout.write(f"{outcome.K0},{outcome.T:.17g},{outcome.z_crit:.17g},{decision}\n")
    if result.K_hat is not None:
        stdout.write(f"K_hat={result.K_hat}\n")
    else:
        stdout.write(f"K_hat=none terminated_by={result.terminated_by}\n")
    return EXIT_OK


def _cmd_eta(args, stdout: IO[str]) -> int:
    net = _load(args)
    result = eta_estimate(net, k_max=args.k_max, seed=args.seed)
    stdout.write("K0,absT,eta\n")
    for idx, absT in enumerate(result.T_values):
        K0 = idx + 1
        eta = "" if K0 == 1 else f"{result.etas[K0 - 2]:.17g}"
        stdout.write(f"{K0},{absT:.17g},{eta}\n")
    stdout.write(f"K_hat={result.K_hat}\n")
    return EXIT_OK


def _cmd_experiment(args, stdout: IO[str]) -> int:
    cfg = ExperimentConfig(
        experiment=args.kind, n=args.n, L=args.L, K=args.K, rho=args.rho,
        replicates=args.replicates, alpha=args.alpha, seed=args.seed,
        k0_max=args.k0_max, workers=args.workers,
    )
    report = run_experiment(cfg)
    report.to_csv(args.out)
    for entry in report.summary():
        parts = [f"cell={entry['cell_id']}", f"quantity={entry['quantity']}",
                 f"count={entry['count']}", f"mean={entry['mean']:.6g}"]
        if "variance" in entry:
            parts.append(f"variance={entry['variance']:.6g}")
            parts.append(f"ks={entry['ks_distance']:.6g}")
        stdout.write(" ".join(parts) + "\n")
    stdout.write(f"records={len(report.records)} out={args.out}\n")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "detect": _cmd_detect,
    "estimate": _cmd_estimate,
    "test": _cmd_test,
    "nast": _cmd_nast,
    "eta": _cmd_eta,
    "experiment": _cmd_experiment,
}


def cli_dispatch(argv: Sequence[str], stdout: Optional[IO[str]] = None) -> int:
    """Parse argv and run one subcommand; returns the exit status."""
    stdout = stdout if stdout is not None else sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors and --help
        return int(exc.code or 0)
    if getattr(args, "alpha", None) is not None and not 0.0 < args.alpha < 1.0:
        sys.stderr.write(f"nast {args.command}: --alpha must lie in (0, 1), got {args.alpha}\n")
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, stdout)
    except (EdgeListError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        sys.stderr.write(f"nast {args.command}: {exc}\n")
        return EXIT_DATA_ERROR
    except ValueError as exc:
        sys.stderr.write(f"nast {args.command}: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
