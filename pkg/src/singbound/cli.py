"""``singbound`` command line: certify, bounds, simulate, eigen, spectrum, gap.

Every flag can also come from a JSON ``--config`` file or from an environment
variable ``SINGBOUND_<FLAG>`` (upper case, dashes as underscores). Precedence:
defaults < config file < environment < command line.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from fractions import Fraction
from importlib import metadata
from pathlib import Path

from . import bounds, certify, experiment, gap, halasz
from ._validation import check_dist, check_int_matrix, load_json
from .errors import SingboundError

ENV_PREFIX = "SINGBOUND_"
DIGITS = ".12g"

# flag dest -> (default, type) for values resolvable from config/env
_COMMON = {"seed": (0, int), "threads": (1, int), "out": ("-", str), "format": (None, str)}


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _num(x) -> str:
    return format(float(x), DIGITS)


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("artifact", "numpy", "scipy", "sympy", "numba", "scikit-learn"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            pass
    return out


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: {message}\n\n{self.format_help()}")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="singbound", description="Singularity-probability bounds for discrete random matrices.")
    sub = root.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, fmt_default):
        p.add_argument("--config", help="JSON file of flag values")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None, help="worker cap; never changes results")
        p.add_argument("--out", default=None, help="output path, '-' for stdout")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--manifest", default=None, help="run manifest path")
        p.set_defaults(_fmt=fmt_default)

    p = sub.add_parser("certify", help="verify or search for a certificate")
    common(p, "json")
    p.add_argument("--alpha", default=None, help="law: JSON file or name like bernoulli, gamma:1/2")
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--search", action="store_true", default=None)
    p.add_argument("--support-bound", type=int, default=None)
    p.add_argument("--certificate", default=None, help="certificate JSON to verify")
    p.add_argument("--n", type=int, default=None, help="also report the bound p^(n/r)")

    p = sub.add_parser("bounds", help="emit figure data")
    common(p, "csv")
    p.add_argument("--figure", type=int, choices=(1, 2), default=None)
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--crossings", action="store_true", default=None)

    p = sub.add_parser("simulate", help="singularity frequency")
    common(p, "json")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--dist", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--fixed-rows", default=None, help="JSON integer matrix")
    p.add_argument("--prime", default=None)
    p.add_argument("--block-size", type=int, default=None)
    p.add_argument("--exhaustive", action="store_true", default=None)

    p = sub.add_parser("eigen", help="rational-eigenvalue frequency")
    common(p, "json")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dist", default=None, help="defaults to uniform on -k..k")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--block-size", type=int, default=None)
    p.add_argument("--exhaustive", action="store_true", default=None)

    p = sub.add_parser("spectrum", help="spectrum and sandwich checks")
    common(p, "json")
    p.add_argument("--model", default=None, help="row model JSON")
    p.add_argument("--alpha", default=None, help="i.i.d. law with the symmetrized exponent-2 certificate")
    p.add_argument("--normal", default=None, help="JSON list or file with the normal vector")
    p.add_argument("--Q", type=int, default=None)
    p.add_argument("--eps1", default=None)
    p.add_argument("--eps2", default=None)
    p.add_argument("--eps0", default=None)

    p = sub.add_parser("gap", help="generalized arithmetic progression tools")
    common(p, "json")
    p.add_argument("--gap", default=None, help='JSON {"Q":..., "v0":..., "basis":[...], "dims":[...]}')
    p.add_argument("--action", choices=("enumerate", "proper", "phi", "pnorm", "kx", "sumset", "reduce"),
                   default=None)
    p.add_argument("--element", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--set", default=None, help="JSON list of elements for reduce")
    return root


_DEFAULTS = {
    "certify": {"r": 1, "search": False, "support_bound": 2},
    "bounds": {"figure": 1, "resolution": 101, "crossings": False},
    "simulate": {"trials": 10_000, "prime": "auto", "block_size": experiment.DEFAULT_BLOCK, "exhaustive": False},
    "eigen": {"k": 1, "trials": 10_000, "block_size": experiment.DEFAULT_BLOCK, "exhaustive": False},
    "spectrum": {"Q": 1009, "eps1": "1/100", "eps0": "1/100"},
    "gap": {"action": "enumerate", "k": 2, "m": 2},
}

_BOOL = {"search", "crossings", "exhaustive"}


def _coerce(dest: str, raw, like):
    if dest in _BOOL:
        if isinstance(raw, bool):
            return raw
        return str(raw).lower() in ("1", "true", "yes", "on")
    if isinstance(like, int) and not isinstance(like, bool) and raw is not None:
        return int(raw)
    return raw


def resolve(args: argparse.Namespace, environ=None) -> dict:
    """Merge defaults < config file < environment < flags into a plain dict."""
    environ = os.environ if environ is None else environ
    cmd = args.command
    defaults = {k: v for k, (v, _) in _COMMON.items()}
    defaults["format"] = args._fmt
    defaults.update(_DEFAULTS.get(cmd, {}))
    file_cfg = {}
    if args.config:
        file_cfg = load_json(args.config)
        if not isinstance(file_cfg, dict):
            raise SingboundError("config file must hold a JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
        if "master_seed" in file_cfg and "seed" not in file_cfg:
            file_cfg["seed"] = file_cfg.pop("master_seed")
    out = {}
    for dest, value in vars(args).items():
        if dest.startswith("_") or dest in ("command", "config"):
            continue
        like = defaults.get(dest)
        env_key = ENV_PREFIX + dest.upper()
        if value is not None:
            out[dest] = value
        elif env_key in environ:
            out[dest] = _coerce(dest, environ[env_key], like)
        elif dest in file_cfg:
            out[dest] = file_cfg[dest]
        else:
            out[dest] = like
    for k, v in file_cfg.items():
        out.setdefault(k, v)
    return out


# subcommands; each returns (payload, csv_columns, csv_rows, seeds)

def _cmd_certify(cfg):
    if cfg.get("alpha") is None:
        raise SingboundError("--alpha is required")
    alpha = check_dist(cfg["alpha"])
    r = int(cfg["r"])
    if cfg.get("certificate"):
        cert = certify.Certificate.from_json(load_json(cfg["certificate"]))
    elif cfg["search"]:
        cert = certify.find_certificate(alpha, r, int(cfg["support_bound"]))
    else:
        cert = certify.symmetrized_cert(alpha) if r == 2 else certify.find_certificate(alpha, r, int(cfg["support_bound"]))
    report = certify.verify(alpha, cert)
    payload = {"alpha": alpha.to_json(), "certificate": cert.to_json(), "report": report.to_json(),
               "p": _frac(cert.p)}
    if cfg.get("n"):
        b = certify.certificate_bound(cert, int(cfg["n"]))
        payload["bound"] = _frac(b) if isinstance(b, Fraction) else float(b)
    m = report.slack_min
    cols = ["p", "q", "r", "valid", "slack_min", "worst_t"]
    rows = [[_frac(cert.p), _frac(cert.q), cert.r, report.valid,
             _num(m.value if m.value is not None else m.lower), _num(report.worst_t)]]
    return payload, cols, rows, {}


def _cmd_bounds(cfg):
    fig, res = int(cfg["figure"]), int(cfg["resolution"])
    text = bounds.emit_figure(fig, res, include_crossings=bool(cfg["crossings"]))
    reader = list(csv.reader(io.StringIO(text)))
    cols, rows = reader[0], reader[1:]
    payload = {"figure": fig, "columns": cols, "rows": rows,
               "crossings": [{"pair": list(c.pair), "mu": str(c.mu), "decimal": c.decimal()}
                             for c in bounds.crossing_points(fig)]}
    return payload, cols, rows, {}


def _experiment_config(cfg, mode):
    doc = {}
    if cfg.get("fixed_rows") is not None:
        fr = cfg["fixed_rows"]
        doc["fixed_rows"] = check_int_matrix(load_json(fr) if isinstance(fr, str) else fr, "fixed rows")
    if cfg.get("entry_dists") is not None:
        doc["entry_dists"] = [[check_dist(d) for d in row] for row in cfg["entry_dists"]]
    else:
        d = cfg.get("dist")
        if d is None and mode == "rational-eigenvalue":
            d = f"uniform:{cfg['k']}"
        if d is None:
            raise SingboundError("--dist is required")
        doc["dist"] = check_dist(d)
    if cfg.get("n") is None:
        raise SingboundError("--n is required")
    prime = cfg.get("prime", "auto")
    return experiment.ExperimentConfig(
        n=int(cfg["n"]), trials=int(cfg["trials"]), master_seed=int(cfg["seed"]),
        prime=prime if prime == "auto" else int(prime), mode=mode,
        k=int(cfg["k"]) if mode == "rational-eigenvalue" else None,
        block_size=int(cfg["block_size"]), **doc)


_RESULT_COLS = ["n", "trials", "singular_count", "estimate", "wilson_low", "wilson_high"]


def _result_rows(ec, res):
    return [[ec.n, res.trials, res.singular_count, _num(res.estimate), _num(res.wilson[0]), _num(res.wilson[1])]]


def _cmd_simulate(cfg, mode="singularity"):
    ec = _experiment_config(cfg, mode)
    if cfg["exhaustive"]:
        if ec.dist is None:
            raise SingboundError("exhaustive mode needs a shared --dist")
        if mode == "singularity":
            prob = experiment.exhaustive_singularity(ec.n, ec.dist, ec.fixed_rows)
        else:
            prob = experiment.exhaustive_rational_eigenvalue(ec.n, ec.dist, ec.k)
        payload = {"config": ec.to_json(), "probability": _frac(prob), "probability_float": float(prob)}
        return payload, ["n", "probability"], [[ec.n, _frac(prob)]], {}
    res = experiment.run(ec, threads=max(1, int(cfg["threads"])))
    payload = {"config": ec.to_json(), "result": res.to_json()}
    return payload, _RESULT_COLS, _result_rows(ec, res), res.seeds


def _cmd_eigen(cfg):
    return _cmd_simulate(cfg, "rational-eigenvalue")


def _cmd_spectrum(cfg):
    if cfg.get("model"):
        model = halasz.RowModel.from_json(load_json(cfg["model"]))
    elif cfg.get("alpha") and cfg.get("normal") is not None:
        alpha = check_dist(cfg["alpha"])
        normal = load_json(cfg["normal"]) if isinstance(cfg["normal"], str) else cfg["normal"]
        model = halasz.RowModel.iid(alpha, certify.symmetrized_cert(alpha), len(normal), Fraction(cfg["eps0"]))
    else:
        raise SingboundError("--model or --alpha is required")
    if cfg.get("normal") is None:
        raise SingboundError("--normal is required")
    normal = load_json(cfg["normal"]) if isinstance(cfg["normal"], str) else cfg["normal"]
    if isinstance(normal, dict):
        normal = normal["normal"]
    V = halasz.HyperplaneQ(normal, int(cfg["Q"]))
    params = halasz.HalaszParams.auto(model, eps1=Fraction(cfg["eps1"]))
    if cfg.get("eps2") is not None:
        e2 = float(Fraction(cfg["eps2"]))
        if not 0 < e2 <= 1:
            raise SingboundError("eps2 must lie in (0, 1]")
        params.log_eps2 = math.log(e2)
    rep = halasz.spectrum_sandwich(model, V, params)
    payload = {"Q": V.Q, "normal": list(V.normal), "log_eps2": params.log_eps2, **rep.to_json()}
    f = halasz.f_values(model, V, rep.spectrum) if rep.spectrum else []
    rows = [[xi, _num(v)] for xi, v in zip(rep.spectrum, f)]
    return payload, ["xi", "f"], rows, {}


def _cmd_gap(cfg):
    if cfg.get("gap") is None:
        raise SingboundError("--gap is required")
    P = gap.Gap.from_json(load_json(cfg["gap"]))
    act = cfg["action"]
    payload = {"gap": P.to_json(), "action": act}
    cols, rows = ["key", "value"], []
    if act == "enumerate":
        elems = sorted(gap.enumerate_gap(P))
        payload.update(elements=elems, size=len(elems))
        cols, rows = ["element"], [[e] for e in elems]
    elif act == "proper":
        pr = gap.is_proper(P)
        payload.update(proper=pr.proper,
                       counterexample=None if pr.counterexample is None else
                       {"element": pr.counterexample[0], "coefficients": [list(pr.counterexample[1]),
                                                                          list(pr.counterexample[2])]})
        rows = [["proper", pr.proper]]
    elif act in ("phi", "pnorm", "kx"):
        if cfg.get("element") is None:
            raise SingboundError("--element is required")
        a = int(cfg["element"])
        if act == "phi":
            payload["coefficients"] = list(gap.phi(P, a))
            rows = [["coefficients", json.dumps(payload["coefficients"])]]
        elif act == "pnorm":
            payload["p_norm"] = gap.p_norm(P, a)
            rows = [["p_norm", _num(payload["p_norm"])]]
        else:
            kx = gap.is_kx_proper(P, a, int(cfg["k"]))
            payload.update(kx_proper=kx.proper, phi_x=list(kx.phi_x), phi_kx=list(kx.phi_kx))
            rows = [["kx_proper", kx.proper]]
    elif act == "sumset":
        m = int(cfg["m"])
        mP = gap.sumset_iterate(P, m)
        payload.update(result=mP.to_json(), size=len(gap.sumset(P, m)), base_size=len(gap.enumerate_gap(P)))
        rows = [["size", payload["size"]], ["base_size", payload["base_size"]]]
    elif act == "reduce":
        B = load_json(cfg["set"]) if isinstance(cfg.get("set"), str) else (cfg.get("set") or [])
        R = gap.reduce_rank_spanning(P, B)
        payload.update(result=R.to_json(), members=all(b in R for b in B))
        rows = [["rank", R.rank], ["members", payload["members"]]]
    return payload, cols, rows, {}


_COMMANDS = {
    "certify": _cmd_certify, "bounds": _cmd_bounds, "simulate": _cmd_simulate,
    "eigen": _cmd_eigen, "spectrum": _cmd_spectrum, "gap": _cmd_gap,
}


def _render(payload, cols, rows, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows(rows)
        return buf.getvalue()
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write(text: str, out: str):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def dispatch(argv=None, environ=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _Usage(parser.format_help())
    except _Usage as exc:
        sys.stderr.write(str(exc) + "\n")
        return 2
    start = time.perf_counter()
    try:
        cfg = resolve(args, environ)
        payload, cols, rows, seeds = _COMMANDS[args.command](cfg)
        text = _render(payload, cols, rows, cfg["format"])
        _write(text, cfg["out"])
    except (SingboundError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"singbound {args.command}: {exc}\n")
        return 1
    manifest = {
        "subcommand": args.command,
        "config": {k: v for k, v in cfg.items() if k != "manifest"},
        "seeds": seeds or {"master_seed": cfg.get("seed")},
        "versions": _versions(),
        "outputs": [cfg["out"]],
        "wall_clock_seconds": round(time.perf_counter() - start, 6),
    }
    mtext = json.dumps(manifest, sort_keys=True, default=str)
    if cfg.get("manifest"):
        Path(cfg["manifest"]).write_text(mtext + "\n")
    elif cfg["out"] not in (None, "-"):
        Path(str(cfg["out"]) + ".manifest.json").write_text(mtext + "\n")
    else:
        sys.stderr.write(mtext + "\n")
    return 0


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
