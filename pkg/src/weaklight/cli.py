"""Command-line front end: ``weaklight {fisher,bound,simulate,snr}``.

Exit codes: 0 success, 1 tolerance failure, 2 usage or domain error.
Every flag may also be given in a flat ``key = value`` config file
(``--config``); keys are the long flag names without dashes. Command-line
flags override the file. ``WEAKLIGHT_SEED`` supplies a default seed.
"""

import argparse
import configparser
import csv
import json
import math
import os
import sys

import numpy as np

from . import fisher as fi
from . import simulate as sim
from . import snr_strong as snr
from .errors import DomainError, FisherDivergenceError, ModelError, SingularSupportError
from .povm_catalog import HeterodyneGrid, HomodyneGrid
from .thermal_model import CoherenceParams, stream

SIG_DIGITS = 12
SEED_ENV = "WEAKLIGHT_SEED"


class UsageError(Exception):
    pass


def _num(x):
    """Round to 12 significant digits; complex becomes ``[re, im]``."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(x.real), _num(x.imag)]
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if not math.isfinite(x) else float(f"{x:.{SIG_DIGITS}g}")


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def emit(rows, fmt, out, meta=None):
    """Write rows (list of dicts with identical keys) as CSV or JSON."""
    rows = [{k: _num(v) for k, v in r.items()} for r in rows]
    if fmt == "json":
        doc = dict(meta or {})
        doc["rows"] = rows
        out.write(json.dumps(doc, indent=2) + "\n")
        return
    if not rows:
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_cell(v) for v in r.values()])


def _g_pair(text):
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) == 1:
        parts.append("0")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected g1,g2 but got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def _schemes(values):
    out = []
    for v in values:
        out.extend(s for s in v.split(",") if s)
    bad = [s for s in out if s not in fi.SCHEMES]
    if bad:
        raise UsageError(f"unknown scheme(s) {bad}; choose from {fi.SCHEMES}")
    return out


def _grid(args, scheme):
    if scheme == "heterodyne":
        return HeterodyneGrid(args.extent, args.n_radial, args.n_angle)
    if scheme == "homodyne":
        return HomodyneGrid(args.extent, args.n_homodyne)
    return None


def _params(eps, g):
    try:
        return CoherenceParams.from_complex(eps, g)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


# -- commands -----------------------------------------------------------------


def _fisher_tol(scheme, eps, f_an):
    if scheme in fi.LOCAL_SCHEMES:
        return 10.0 * eps ** 3 + 1e-12
    return max(1e-6, 0.02 * float(np.abs(f_an).max()))


def cmd_fisher(args):
    rows, ok_all = [], True
    for scheme in _schemes(args.scheme):
        for eps in args.eps:
            for g in args.g:
                _params(eps, g)
                for delta in args.delta:
                    f_num = fi.numeric_fisher(scheme, eps, g, delta, _grid(args, scheme))
                    f_an = fi.fisher_analytic(scheme, eps, g, delta)
                    resid = float(np.abs(f_num - f_an).max())
                    tol = _fisher_tol(scheme, eps, f_an)
                    ok = resid <= tol
                    ok_all &= ok
                    lam = np.linalg.eigvalsh(f_num)
                    rows.append(dict(
                        scheme=scheme, epsilon=eps, g1=g.real, g2=g.imag, delta=delta,
                        F11=f_num[0, 0], F12=f_num[0, 1], F22=f_num[1, 1],
                        eig1=lam[0], eig2=lam[1], trace_norm=fi.trace_norm(f_num),
                        analytic_trace_norm=fi.trace_norm(f_an), residual=resid,
                        tolerance=tol, ok=ok,
                    ))
    return rows, (0 if ok_all else 1)


def cmd_bound(args):
    rows, fail = [], False
    for scheme in _schemes(args.scheme):
        for eps in args.eps:
            if not 0 <= eps < 1:
                raise UsageError(f"bound needs 0 <= epsilon < 1, got {eps}")
            for g in args.g:
                _params(eps, g)
                for delta in args.delta:
                    povm = fi.scheme_povm(scheme, delta, _grid(args, scheme))
                    rep = fi.locc_bound_from_povm(povm, eps, g)
                    lead = fi.trace_norm(fi.fisher_analytic(scheme, eps, g, delta))
                    local = rep.applicable
                    fail |= local and not rep.satisfied
                    rows.append(dict(
                        scheme=scheme, epsilon=eps, g1=g.real, g2=g.imag, delta=delta,
                        fisher_trace_norm=rep.fisher_trace_norm,
                        leading_order_trace_norm=lead,
                        locc_bound=rep.locc_bound_value if local else None,
                        povm_bound=rep.povm_specific_bound if local else None,
                        applicable=local,
                        satisfied=rep.satisfied if local else None,
                        trace_norm_ge_eps=None if local else rep.fisher_trace_norm >= eps * (1 - 1e-9),
                    ))
    return rows, (1 if fail else 0)


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    raise UsageError(f"a seed is required (--seed or {SEED_ENV})")


def cmd_simulate(args):
    seed = _seed(args)
    rows, fail, replay = [], False, []
    for scheme in _schemes(args.scheme):
        for eps in args.eps:
            for g in args.g:
                params = _params(eps, g)
                if args.schedule == "alternating":
                    schedule = sim.alternating_schedule(args.M, args.delta[0])
                else:
                    schedule = float(args.delta[0])
                s = sim.run_ensemble(params, scheme, args.M, args.trials, seed, schedule)
                ratio = s.variance_ratio
                degenerate = s.is_degenerate
                ok = None if degenerate else bool(
                    np.all(np.abs(ratio - 1.0) <= args.ratio_tol)
                )
                if args.check and ok is False:
                    fail = True
                rows.append(dict(
                    scheme=scheme, epsilon=eps, g1=g.real, g2=g.imag, M=args.M,
                    trials=args.trials, seed=seed,
                    mean_g1=s.mean[0], mean_g2=s.mean[1],
                    cov11=s.empirical_cov[0, 0], cov12=s.empirical_cov[0, 1],
                    cov22=s.empirical_cov[1, 1],
                    crb11=s.crb_variances[0], crb22=s.crb_variances[1],
                    ratio1=ratio[0], ratio2=ratio[1],
                    degenerate=degenerate, converged=s.converged, ok=ok,
                ))
                replay.append(dict(scheme=scheme, epsilon=eps, g=[g.real, g.imag],
                                   trial_seeds=[[seed, t] for t in s.streams]))
                if args.record_out and len(replay) == 1:
                    rec = sim.sample_record(params, scheme, schedule, args.M, seed=seed, stream_index=0)
                    sim.write_record(rec, args.record_out)
    meta = {"replay": replay}
    return rows, (1 if fail else 0), meta


def cmd_snr(args):
    rows, fail = [], False
    seed = _seed(args) if args.verify else None
    idx = 0
    for eps in args.eps:
        if eps < 0:
            raise UsageError("epsilon must be >= 0")
        for ga in args.g_abs:
            if not 0 <= ga <= 1:
                raise UsageError("|g| must lie in [0, 1]")
            d = snr.direct_snr_avg(eps, ga).ratio
            h = snr.heterodyne_snr(eps, ga).ratio
            row = dict(epsilon=eps, g_abs=ga, direct_snr=d, heterodyne_snr=h,
                       ratio=d / h if h > 0 else None)
            if args.verify:
                ed = sim.empirical_snr("direct", eps, ga, args.shots, stream(seed, idx))
                eh = sim.empirical_snr("heterodyne", eps, ga, args.shots, stream(seed, idx + 1))
                idx += 2
                zd = abs(ed.ratio - d) / ed.ratio_se if ed.ratio_se > 0 else 0.0
                zh = abs(eh.ratio - h) / eh.ratio_se if eh.ratio_se > 0 else 0.0
                ok = zd <= 5 and zh <= 5
                fail |= not ok
                row.update(direct_mc=ed.ratio, direct_mc_se=ed.ratio_se,
                           heterodyne_mc=eh.ratio, heterodyne_mc_se=eh.ratio_se,
                           direct_z=zd, heterodyne_z=zh, ok=ok)
            rows.append(row)
    return rows, (1 if fail else 0)


PAPER_TABLE = {
    "fisher": [
        dict(scheme=["direct", "gjc"], eps=[0.1], g=[0.6 + 0j], delta=[0.0]),
        dict(scheme=["heterodyne", "homodyne"], eps=[0.01], g=[0j], delta=[0.0]),
    ],
    "bound": [
        dict(scheme=["heterodyne", "homodyne", "direct", "gjc"], eps=[0.1], g=[0j], delta=[0.0]),
    ],
    "simulate": [
        dict(scheme=["direct", "heterodyne"], eps=[0.1], g=[0.6 + 0.3j], delta=[0.0],
             M=100000, trials=200, schedule="alternating"),
    ],
    "snr": [dict(eps=[0.01, 2.0, 100.0], g_abs=[1.0])],
}

COMMANDS = {"fisher": cmd_fisher, "bound": cmd_bound, "simulate": cmd_simulate, "snr": cmd_snr}


def build_parser():
    p = argparse.ArgumentParser(prog="weaklight", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="flat key = value file mirroring the flags")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, schemes=True):
        if schemes:
            sp.add_argument("--scheme", action="extend", nargs="+", default=None,
                            help=f"one or more of {','.join(fi.SCHEMES)} (repeatable)")
            sp.add_argument("--g", type=_g_pair, nargs="+", default=[0j],
                            help="coherence values as g1,g2")
            sp.add_argument("--delta", type=float, nargs="+", default=[0.0])
            sp.add_argument("--extent", type=float, default=6.0)
            sp.add_argument("--n-radial", type=int, default=201)
            sp.add_argument("--n-angle", type=int, default=64)
            sp.add_argument("--n-homodyne", type=int, default=201)
        sp.add_argument("--eps", type=float, nargs="+", default=[0.1])
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--output", default="-")
        sp.add_argument("--paper-table", action="store_true",
                        help="run the canonical parameter sets")

    common(sub.add_parser("fisher", help="numeric vs closed-form Fisher matrices"))
    common(sub.add_parser("bound", help="LOCC bound checks"))
    sp = sub.add_parser("simulate", help="MLE ensembles vs Cramer-Rao bound")
    common(sp)
    sp.add_argument("--M", type=int, default=10000)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--schedule", choices=("alternating", "fixed"), default="alternating")
    sp.add_argument("--ratio-tol", type=float, default=0.15)
    sp.add_argument("--check", action="store_true",
                    help="exit 1 if any variance/CRB ratio is outside tolerance")
    sp.add_argument("--record-out", default=None,
                    help="write the first trial's measurement record here")
    sp = sub.add_parser("snr", help="strong-light SNR table")
    common(sp, schemes=False)
    sp.add_argument("--g-abs", type=float, nargs="+", default=[1.0])
    sp.add_argument("--verify", action="store_true", help="add Monte Carlo columns")
    sp.add_argument("--shots", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=None)
    return p


def _config_argv(path, given=()):
    """Flags from a config file, skipping any flag already in ``given``."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    with open(path, encoding="utf-8") as fh:
        cp.read_string("[weaklight]\n" + fh.read())
    argv = []
    for key, value in cp["weaklight"].items():
        flag = "--" + key.replace("_", "-")
        if flag in given:
            continue
        if value.lower() in ("true", "yes", "on"):
            argv.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            argv.extend([flag] + value.replace(";", " ").split())
    return argv


def parse(argv):
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if known.config:
        given = {a.split("=", 1)[0] for a in rest if a.startswith("--")}
        extra = _config_argv(known.config, given)
        cmd_at = next((i for i, a in enumerate(rest) if a in COMMANDS), None)
        if cmd_at is not None:
            rest = rest[:cmd_at + 1] + extra + rest[cmd_at + 1:]
    args = build_parser().parse_args(rest)
    if getattr(args, "scheme", "absent") is None:
        args.scheme = ["direct"]
    return args


def _run(args):
    fn = COMMANDS[args.command]
    if not args.paper_table:
        out = fn(args)
        return out if len(out) == 3 else (*out, {})
    rows, code, meta = [], 0, {}
    for preset in PAPER_TABLE[args.command]:
        sub = argparse.Namespace(**{**vars(args), **preset})
        out = fn(sub)
        rows += out[0]
        code = max(code, out[1])
        if len(out) == 3:
            for k, v in out[2].items():
                meta.setdefault(k, []).extend(v)
    return rows, code, meta


def main(argv=None):
    try:
        args = parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, configparser.Error) as exc:
        print(f"weaklight: error: bad config file: {exc}", file=sys.stderr)
        return 2
    try:
        rows, code, meta = _run(args)
    except (UsageError, DomainError, ModelError, FisherDivergenceError, SingularSupportError) as exc:
        print(f"weaklight: error: {exc}", file=sys.stderr)
        return 2
    meta = {"command": args.command, **meta}
    if args.output == "-":
        emit(rows, args.format, sys.stdout, meta)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            emit(rows, args.format, fh, meta)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
