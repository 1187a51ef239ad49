"""Command-line front end.

Verbs::

    estimate   evaluate estimator labels on a path CSV
    simulate   write a simulated path CSV and a JSON sidecar with its oracles
    mc         run a Monte Carlo experiment from a JSON config
    sweep      run a parameter grid from a JSON config
    constants  print alpha, c(alpha), q(alpha), w(alpha)

Exit status is 0 on success, 2 for usage errors, 3 for unreadable or
malformed data and 4 for numerical or configuration errors.  Every run
writes its resolved settings as one ``resolved:`` line on stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from dataclasses import asdict, replace

from . import harness
from .numcore import filter_constants
from .pathdata import FormatError, SampledPath, load_csv, write_csv
from .simulate import JumpSpec, SimulationError, simulate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _log_resolved(settings: dict) -> None:
    print("resolved: " + json.dumps(settings, sort_keys=True), file=sys.stderr)


@contextlib.contextmanager
def _output(dest):
    if dest is None or dest == "-":
        yield sys.stdout
    else:
        with open(dest, "w", newline="") as fh:
            yield fh


# -- estimate ----------------------------------------------------------------

def _params_from_args(args) -> harness.EstimatorParams:
    return harness.EstimatorParams(
        alpha=args.alpha, alpha0=args.alpha0, kappa=args.kappa, kappa_B=args.kappa_B,
        kappa_c=args.kappa_c, B=args.B, delta1=args.delta1, qn=args.qn, cK=args.cK,
        B0=args.B0, delta0=args.delta0, truncate=not args.no_truncate)


def _labels_from_args(args) -> list:
    labels = []
    for label in args.estimator or ["grv.lgrv"]:
        # a bare trv takes its rho from --rho
        labels.append(f"trv[{args.rho:g}]" if label == "trv" else label)
    for label in labels:
        harness.parse_label(label)
    return labels


def cmd_estimate(args) -> int:
    with open(args.input, newline="") as fh:
        path = load_csv(fh, args.time_column, args.value_column)
    if args.T is not None:
        path = SampledPath(path.values, args.T)
    params = _params_from_args(args)
    labels = _labels_from_args(args)
    _log_resolved({"verb": "estimate", "input": args.input, "n": path.n, "T": path.T,
                   "kappa": params.window(path.n).kappa, "estimators": labels,
                   "params": asdict(params)})
    cache: dict = {}
    results = [harness.estimate_by_label(label, path, params, cache) for label in labels]
    with _output(args.out) as out:
        for label, e in zip(labels, results):
            method = harness.parse_label(label).method
            line = f"{label},{e.value:.6f}"
            if method in ("trv", "grv", "wgrv"):
                line += f",{e.kept_count}"
            out.write(line + "\n")
    if args.mask:
        with open(args.mask, "w", newline="") as fh:
            fh.write("# increments excluded by each filter, 1-based\n")
            fh.write("label,index\n")
            for label, e in zip(labels, results):
                for j in e.filtered_indices:
                    fh.write(f"{label},{int(j)}\n")
    return EXIT_OK


# -- simulate ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    model = harness.ModelConfig(args.model, args.theta, args.sigma, args.eta, args.x0)
    jumps = JumpSpec(kind=args.jumps, lam=args.lam, mu=args.mu, nu=args.nu,
                     lam0=args.lam0, lam_c=args.lam_c, mean_disp=args.mean_disp,
                     nu_j=args.nu_j)
    settings = {"verb": "simulate", "model": asdict(model),
                "jumps": harness._jumps_to_dict(jumps), "n": args.n, "T": args.T,
                "seed": args.seed, "substeps": args.substeps}
    _log_resolved(settings)
    sim = simulate(model.build(), jumps, args.n, args.T, seed=args.seed,
                   substeps=args.substeps, keep_fine=False)
    with _output(args.out) as out:
        write_csv(sim.observed, out, comment=f"simulated {model.family} path, seed {args.seed}")
    sidecar = args.sidecar
    if sidecar is None and args.out not in (None, "-"):
        sidecar = args.out + ".json"
    if sidecar is not None:
        doc = dict(settings, theta_true=sim.theta_true, gamma_true=sim.gamma_true,
                   jump_times=sim.jump_times.tolist(), jump_sizes=sim.jump_sizes.tolist())
        with open(sidecar, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


# -- mc / sweep --------------------------------------------------------------

def _load_config(args) -> harness.ExperimentConfig:
    with open(args.config) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise harness.ConfigError(f"{args.config}: invalid JSON ({exc})") from None
    cfg = harness.config_from_dict(doc)
    overrides = {k: v for k, v in (("trials", args.trials), ("seed", args.seed))
                 if v is not None}
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def cmd_mc(args) -> int:
    cfg = _load_config(args)
    if cfg.sweep:
        raise harness.ConfigError("config has a sweep grid; use the sweep verb")
    _log_resolved(dict(cfg.to_dict(), verb="mc", jobs=args.jobs,
                       fingerprint=cfg.fingerprint()))
    result = harness.run_experiment(cfg, jobs=args.jobs)
    if result.failures:
        print(f"warning: {len(result.failures)} trial(s) excluded after simulation blow-up",
              file=sys.stderr)
    with _output(args.out) as out:
        harness.write_summary_csv(result, out, args.kind)
    if args.records:
        with open(args.records, "w", newline="") as fh:
            harness.write_records_csv(result, fh)
    if args.qq:
        with open(args.qq, "w", newline="") as fh:
            harness.write_qq_csv(result, fh)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    if not cfg.sweep:
        raise harness.ConfigError("config has no sweep grid")
    _log_resolved(dict(cfg.to_dict(), verb="sweep", jobs=args.jobs,
                       fingerprint=cfg.fingerprint()))
    cells = harness.run_sweep(cfg, jobs=args.jobs)
    with _output(args.out) as out:
        harness.write_sweep_csv(cells, out)
    return EXIT_OK


def cmd_constants(args) -> int:
    _log_resolved({"verb": "constants", "alpha": args.alpha})
    k = filter_constants(args.alpha)
    with _output(args.out) as out:
        out.write(f"{args.alpha:g},{k.c:.6f},{k.q:.6f},{k.w:.6f}\n")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="globalrv", description="Jump-robust integrated volatility estimation.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    e = sub.add_parser("estimate", help="estimate integrated variance of a path CSV")
    e.add_argument("--input", required=True, help="CSV with time and value columns")
    e.add_argument("--time-column", default="t")
    e.add_argument("--value-column", default="x")
    e.add_argument("--estimator", action="append", metavar="LABEL",
                   help="estimator label, repeatable (default grv.lgrv)")
    e.add_argument("--alpha", type=float, default=0.2, help="cut-off ratio")
    e.add_argument("--alpha0", type=float, default=None,
                   help="cut-off ratio of the LGRV spot estimate (default: alpha)")
    e.add_argument("--rho", type=float, default=0.45, help="exponent for a bare 'trv' label")
    e.add_argument("--kappa", type=int, default=None, help="window half-width (overrides rule)")
    e.add_argument("--kappa-B", type=float, default=10.0)
    e.add_argument("--kappa-c", type=float, default=0.45)
    e.add_argument("--B", type=float, default=10.0, help="moving-threshold scale")
    e.add_argument("--delta1", type=float, default=0.45, help="moving-threshold exponent")
    e.add_argument("--qn", type=float, default=None, help="moving-threshold normaliser")
    e.add_argument("--delta0", type=float, default=0.1)
    e.add_argument("--B0", type=float, default=5.0)
    e.add_argument("--cK", type=float, default=1.0)
    e.add_argument("--no-truncate", action="store_true",
                   help="disable the small-increment truncation indicators")
    e.add_argument("--T", type=float, default=None,
                   help="observation horizon (default: span of the time column)")
    e.add_argument("--mask", default=None, help="write excluded increment indices here")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", help="simulate a jump-diffusion path")
    s.add_argument("--model", choices=["root-quadratic", "sine-squared"],
                   default="root-quadratic")
    s.add_argument("--theta", type=float, default=0.2)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--eta", type=float, default=3.0)
    s.add_argument("--x0", type=float, default=1.0)
    s.add_argument("--jumps", choices=["none", "compound-poisson", "neyman-scott"],
                   default="compound-poisson")
    s.add_argument("--lambda", dest="lam", type=float, default=5.0)
    s.add_argument("--mu", type=float, default=0.3)
    s.add_argument("--nu", type=float, default=0.2)
    s.add_argument("--lambda0", dest="lam0", type=float, default=0.0)
    s.add_argument("--lambda-c", dest="lam_c", type=float, default=0.0)
    s.add_argument("--mean-disp", type=float, default=None)
    s.add_argument("--nu-j", type=float, default=0.0)
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--substeps", type=int, default=20)
    s.add_argument("--out", default=None)
    s.add_argument("--sidecar", default=None,
                   help="JSON with theta_true, gamma_true and seed (default OUT.json)")
    s.set_defaults(func=cmd_simulate)

    for verb, func, text in (("mc", cmd_mc, "run a Monte Carlo experiment"),
                             ("sweep", cmd_sweep, "run a parameter sweep")):
        m = sub.add_parser(verb, help=text)
        m.add_argument("--config", required=True)
        m.add_argument("--jobs", type=int, default=1)
        m.add_argument("--trials", type=int, default=None, help="override config trials")
        m.add_argument("--seed", type=int, default=None, help="override config seed")
        m.add_argument("--out", default=None)
        if verb == "mc":
            m.add_argument("--kind", choices=["error", "estimate"], default="error",
                           help="summarise error ratios or raw estimates")
            m.add_argument("--records", default=None, help="per-trial CSV")
            m.add_argument("--qq", default=None, help="QQ pairs CSV")
        m.set_defaults(func=func)

    c = sub.add_parser("constants", help="print c, q and w for a cut-off ratio")
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_constants)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, OSError) as exc:
        print(f"globalrv: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (harness.ConfigError, SimulationError, ArithmeticError, ValueError) as exc:
        print(f"globalrv: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
