"""Batch command line: ``longrun {simulate,laws,sdf,svix,diagnose,term}``.

Exit status is 0 on success, 1 on invalid input and 2 on numerical failure.
Every artifact is written with ``repr`` floats and sorted JSON keys, so
identical inputs and seeds give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from . import laws, processes, term
from .errors import LongRunError, NumericalError, ValidationError
from .ensemble import ensemble_map
from .options import read_option_chain, svix_variance
from .params import check_keys, read_params
from .sdf.disaster import MONTHLY_RF
from .sdf import (
    DisasterParams,
    LrrParams,
    cm_key,
    disaster_conditional_moment,
    disaster_entropy,
    disaster_mean_log_sdf,
    disaster_pi,
    disaster_short_rate,
    lrr_entropy,
    lrr_mean_short_rate,
    lrr_pi,
    lrr_solve_constants,
    sim_disaster_market,
    sim_disaster_sdf,
    sim_lrr_sdf,
)
from .series import conditional_entropy, extract_shocks, read_forecast_series

S_MARGIN = 1e-6

SIM_MODELS = ("garch11", "nelson", "divergent", "rademacher", "lognormal", "ar1_log", "disaster", "lrr")

_GARCH_KEYS = ("omega", "alpha", "beta", "sigma0", "variant", "nu_schedule", "mult_low", "mult_high")
_DISASTER_KEYS = ("preset", "beta", "gamma", "mu", "sigma", "omega", "theta", "nu", "rf")
_LRR_KEYS = ("preset", "delta", "gamma", "psi", "mu", "rho", "phi_e", "sigma", "nu1", "sigma_w")
_MODEL_KEYS = {
    "garch11": _GARCH_KEYS,
    "nelson": (),
    "divergent": (),
    "rademacher": ("alpha_schedule", "alpha", "measure"),
    "lognormal": ("a", "sigma"),
    "ar1_log": ("beta", "rho"),
    "disaster": _DISASTER_KEYS,
    "lrr": _LRR_KEYS,
}


# -- parameter handling ----------------------------------------------------


def _load_params(path: str | None, model: str, extra: tuple[str, ...] = ()) -> dict:
    params = read_params(path) if path else {}
    check_keys(params, _MODEL_KEYS[model] + extra, model)
    return params


def _str(params: dict, key: str, default: str) -> str:
    v = params.get(key, default)
    if not isinstance(v, str):
        raise ValidationError(f"{key} must be a name, got {v!r}")
    return v


def _num(params: dict, key: str, default=None) -> float:
    v = params.get(key, default)
    if v is None:
        raise ValidationError(f"missing parameter {key!r}")
    if isinstance(v, (tuple, str)):
        raise ValidationError(f"{key} must be a single number, got {v!r}")
    return float(v)


def _seq(params: dict, key: str, default) -> tuple:
    v = params.get(key, default)
    seq = v if isinstance(v, tuple) else (v,)
    if any(isinstance(x, str) for x in seq):
        raise ValidationError(f"{key} must be numeric")
    return tuple(float(x) for x in seq)


def garch_params(params: dict) -> processes.Garch11Params:
    d = processes.Garch11Params()
    return processes.Garch11Params(
        omega=_num(params, "omega", d.omega),
        alpha=_num(params, "alpha", d.alpha),
        beta=_num(params, "beta", d.beta),
        sigma0=_num(params, "sigma0", d.sigma0),
        variant=_str(params, "variant", d.variant),
        nu_schedule=_seq(params, "nu_schedule", d.nu_schedule),
        mult_low=_num(params, "mult_low", d.mult_low),
        mult_high=_num(params, "mult_high", d.mult_high),
    )


def disaster_params(params: dict) -> DisasterParams:
    preset = _str(params, "preset", "figure2")
    if preset != "figure2":
        raise ValidationError(f"unknown disaster preset {preset!r}")
    base = DisasterParams.figure2()
    kw = {k: _num(params, k, getattr(base, k)) for k in ("beta", "gamma", "sigma", "omega", "theta", "nu")}
    if "mu" in params and "rf" in params:
        raise ValidationError("give either mu or rf for the disaster model, not both")
    if "mu" in params:
        return DisasterParams(mu=_num(params, "mu"), **kw)
    return DisasterParams.with_short_rate(_num(params, "rf", MONTHLY_RF), **kw)


def lrr_params(params: dict) -> LrrParams:
    preset = _str(params, "preset", "figure2")
    presets = {"figure2": LrrParams.figure2, "bansal_yaron": LrrParams.bansal_yaron}
    if preset not in presets:
        raise ValidationError(f"unknown LRR preset {preset!r}; choose from {', '.join(presets)}")
    base = presets[preset]()
    return LrrParams(**{k: _num(params, k, getattr(base, k)) for k in _LRR_KEYS[1:]})


def path_simulator(model: str, params: dict, n: int, s_grid=()):
    """Return ``sim(seed) -> SimPath`` for a model and parameter dict."""
    if model == "garch11":
        p = garch_params(params)
        return lambda seed: processes.sim_garch11(p, n, seed)
    if model == "nelson":
        return lambda seed: processes.sim_nelson(n, seed)
    if model == "divergent":
        return lambda seed: processes.sim_divergent(n, seed)
    if model == "rademacher":
        if "alpha_schedule" in params and "alpha" in params:
            raise ValidationError("give either alpha or alpha_schedule")
        sched = _seq(params, "alpha_schedule", (_num(params, "alpha", 0.5),))
        p = processes.RademacherMarketParams(sched, _str(params, "measure", "physical"))
        return lambda seed: processes.sim_rademacher(p, n, seed)
    if model == "lognormal":
        sigma = _num(params, "sigma", 0.5)
        if "a" in params:
            a = _num(params, "a")
            return lambda seed: processes.sim_lognormal_martingale(a, sigma, n, seed)
        return lambda seed: processes.sim_unit_mean_lognormal(sigma, n, seed)
    if model == "ar1_log":
        beta, rho = _num(params, "beta", 1.0), _num(params, "rho", 0.9)
        return lambda seed: processes.sim_ar1_log(beta, rho, n, seed)
    if model == "disaster":
        p = disaster_params(params)
        return lambda seed: sim_disaster_sdf(p, n, seed, s_grid)
    if model == "lrr":
        p = lrr_params(params)
        d = lrr_solve_constants(p)
        return lambda seed: sim_lrr_sdf(p, n, seed, s_grid, d)
    raise ValidationError(f"unknown model {model!r}")


# -- s grid ----------------------------------------------------------------

_RANGE = re.compile(r"^\s*([-+0-9.eE]+)\s*:\s*([-+0-9.eE]+)\s*:\s*([-+0-9.eE]+)\s*$")


def parse_s_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive of stop) or a comma list.

    Grid points are rounded to 12 decimals; any point within ``1e-6`` of 0
    or 1 is rejected.
    """
    m = _RANGE.match(text)
    try:
        if m:
            start, stop, step = (float(g) for g in m.groups())
            if step == 0 or (stop - start) / step < 0:
                raise ValidationError(f"empty or infinite s range {text!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            grid = [round(start + i * step, 12) for i in range(count)]
        else:
            grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse s grid {text!r}") from None
    if not grid:
        raise ValidationError("empty s grid")
    for s in grid:
        if abs(s) < S_MARGIN or abs(s - 1.0) < S_MARGIN:
            raise ValidationError(f"s grid point {s} is within {S_MARGIN} of 0 or 1")
    return grid


def _fix_argv(argv: list[str]) -> list[str]:
    # let "--s-grid -3:-0.1:0.1" through argparse, which would read it as a flag
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--s-grid" and i + 1 < len(argv):
            out.append(f"--s-grid={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


# -- output helpers --------------------------------------------------------


def _dump_json(obj, path: str | None) -> str:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_table(path: str, columns: dict) -> None:
    names = list(columns)
    n = len(next(iter(columns.values())))
    lines = [",".join(names)]
    for i in range(n):
        cells = []
        for name in names:
            v = columns[name][i]
            cells.append(str(int(v)) if isinstance(v, (int, np.integer)) else repr(float(v)))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _say(line: str) -> None:
    print(line)


def _need(value, flag: str):
    if value is None:
        raise ValidationError(f"{flag} is required for this command")
    return value


# -- commands --------------------------------------------------------------


def cmd_simulate(args) -> int:
    model = _need(args.model, "--model")
    if model not in SIM_MODELS:
        raise ValidationError(f"unknown model {model!r}; choose from {', '.join(SIM_MODELS)}")
    n = _need(args.n, "--n")
    seed = _need(args.seed, "--seed")
    params = _load_params(args.params, model)
    s_grid = parse_s_grid(args.s_grid) if args.s_grid else ()
    sim = path_simulator(model, params, n, s_grid)
    paths = ensemble_map(lambda i, s: sim(s), args.paths, seed, args.threads)

    truncated = [i for i, p in enumerate(paths) if p.meta.get("truncated_at") is not None]
    out = args.out
    if out:
        target = Path(out)
        if args.paths == 1 and target.suffix == ".csv":
            paths[0].to_csv(target)
        else:
            target.mkdir(parents=True, exist_ok=True)
            for i, p in enumerate(paths):
                p.to_csv(target / f"path_{i:05d}.csv")
    summary = {
        "model": model,
        "n": n,
        "paths": args.paths,
        "seed": seed,
        "mean_terminal_realized": float(np.mean([p.fs.realized[-1] for p in paths])),
        "truncated_paths": truncated,
    }
    if model == "lrr":
        summary["variance_clamps"] = int(sum(p.meta["variance_clamps"] for p in paths))
    if args.report:
        _dump_json(summary, args.report)
    _say(f"simulate: model={model} n={n} paths={args.paths} seed={seed}")
    if truncated:
        _say(f"simulate: {len(truncated)} path(s) hit the variance cap")
        return 2
    return 0


def cmd_laws(args) -> int:
    fs, _ = read_forecast_series(_need(args.in_path, "--in"))
    shocks = extract_shocks(fs)
    cols = {"n": list(range(1, len(fs) + 1))}
    report: dict = {"length": len(fs)}
    add = laws.additive_average(shocks)
    cols["additive"] = add.values
    report["additive"] = _law_summary(add)
    if args.decay is not None:
        w = laws.weighted_average(shocks, args.decay)
        cols["weighted"] = w.values
        report["weighted"] = _law_summary(w)
        report["weighted"]["decay"] = args.decay
    if np.all(fs.realized > 0) and np.all(fs.predicted > 0):
        v = laws.multiplicative_average(fs)
        cols["multiplicative"] = v.values
        report["multiplicative"] = {"terminal": v.terminal}
    if fs.predicted_log is not None:
        z = laws.entropy_running_mean(conditional_entropy(fs))
        cols["entropy"] = z.values
        report["entropy"] = {"terminal": z.terminal}
    gap = dg.sample_mean_gap(fs)
    report["sample_mean_gap"] = {"terminal": gap.terminal}
    if args.out:
        _write_table(args.out, cols)
    if args.report:
        _dump_json(report, args.report)
    for name in ("additive", "weighted", "multiplicative", "entropy"):
        if name in report:
            _say(f"laws: {name} terminal={report[name]['terminal']!r}")
    return 0


def _law_summary(path: laws.LawPath) -> dict:
    out = {"terminal": path.terminal}
    try:
        out["rate_fit"] = laws.fit_rate(path).to_dict()
    except LongRunError as exc:
        out["rate_fit"] = None
        out["rate_fit_error"] = str(exc)
    return out


def sdf_report(model: str, params: dict, s_grid: list[float]) -> dict:
    """The numbers emitted by ``longrun sdf``, computed through library calls."""
    if model == "disaster":
        p = disaster_params(params)
        values = [disaster_pi(p, s) for s in s_grid]
        return {
            "model": model,
            "params": p.__dict__,
            "s_grid": s_grid,
            "values": values,
            "entropy": disaster_entropy(p),
            "short_rate": disaster_short_rate(p),
            "mean_log_sdf": disaster_mean_log_sdf(p),
            "bond_price": disaster_conditional_moment(p, 1.0),
        }
    if model == "lrr":
        p = lrr_params(params)
        d = lrr_solve_constants(p)
        return {
            "model": model,
            "params": p.__dict__,
            "derived": d.__dict__,
            "s_grid": s_grid,
            "values": [lrr_pi(p, d, s) for s in s_grid],
            "entropy": lrr_entropy(p, d),
            "mean_short_rate": lrr_mean_short_rate(p, d),
        }
    raise ValidationError(f"sdf supports models disaster and lrr, not {model!r}")


def cmd_sdf(args) -> int:
    model = _need(args.model, "--model")
    if model not in ("disaster", "lrr"):
        raise ValidationError(f"sdf supports models disaster and lrr, not {model!r}")
    params = _load_params(args.params, model)
    s_grid = parse_s_grid(_need(args.s_grid, "--s-grid"))
    report = sdf_report(model, params, s_grid)
    text = _dump_json(report, args.report)
    if args.out:
        _write_table(args.out, {"s": s_grid, "pi": report["values"]})
    if not args.report and not args.out:
        sys.stdout.write(text)
    _say(f"sdf: model={model} points={len(s_grid)} entropy={report['entropy']!r}")
    return 0


def cmd_svix(args) -> int:
    chain = read_option_chain(_need(args.chain, "--chain"))
    res = svix_variance(chain)
    out = res.to_dict()
    if args.report:
        _dump_json(out, args.report)
    _say(f"svix: value={res.value!r} truncation_ratio={res.truncation_ratio!r} parity_flags={len(res.parity_flags)}")
    return 0


_DIAG_KEYS = ("z", "crisis_threshold", "leverage")


def _read_columns(path: str) -> dict:
    import csv

    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not header:
        raise ValidationError(f"{path}: empty file")
    cols = {h: [] for h in header}
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValidationError(f"{path} line {lineno}: expected {len(header)} fields")
        for h, c in zip(header, row):
            try:
                cols[h].append(float(c))
            except ValueError:
                raise ValidationError(f"{path} line {lineno}: cannot parse {c!r}") from None
    return {h: np.array(v) for h, v in cols.items()}


def diagnose_panel(cols: dict, params: dict) -> dict:
    allowed = {"t", "gross_return", "gross_riskfree", "svix", "survey"}
    extra = set(cols) - allowed
    if extra:
        raise ValidationError(f"unknown panel column(s): {', '.join(sorted(extra))}")
    panel = dg.ReturnPanel(cols["gross_return"], cols["gross_riskfree"])
    report = {
        "excess_gross": dg.long_term_excess(panel, "gross").terminal,
        "excess_log": dg.long_term_excess(panel, "log").terminal,
    }
    if "svix" in cols:
        report["ncc"] = dg.ncc_check(panel, cols["svix"]).to_dict()
        if "crisis_threshold" in params:
            report["crisis"] = dg.crisis_flags(cols["svix"], _num(params, "crisis_threshold")).to_dict()
    if "survey" in cols:
        report["survey"] = dg.survey_hypothesis_check(cols["survey"], panel).to_dict()
    if "z" in params:
        report["entropy_bound"] = dg.entropy_excess_bound(_num(params, "z"), panel).to_dict()
    return report


def diagnose_sdf_returns(cols: dict, params: dict, band: float) -> dict:
    moments = {}
    for h in cols:
        if h.startswith("cm_"):
            try:
                moments[float(h[3:])] = cols[h]
            except ValueError:
                raise ValidationError(f"bad moment column {h!r}") from None
        elif h not in ("t", "m", "r_gross"):
            raise ValidationError(f"unknown column {h!r}")
    path = dg.SdfReturnPath(cols["m"], cols["r_gross"], moments)
    logprod = dg.risk_adjusted_log_product(path)
    report = {
        "cesaro_terminal": dg.cesaro_risk_adjusted(path).terminal,
        "log_product_terminal": float(logprod[-1]),
        "reversals": dg.slow_decrease_scan(path, band).to_dict(),
        "liu_dual": {repr(s): dg.liu_dual_bound(path, s, path.r_gross).to_dict() for s in sorted(moments)},
    }
    if "z" in params:
        excess = float(np.mean(np.log(path.r_gross)))
        report["entropy_bound"] = dg.entropy_excess_bound_from_mean(_num(params, "z"), excess).to_dict()
    return report


def diagnose_disaster(params: dict, n: int, seed: int, band: float, s_grid) -> dict:
    """Simulated disaster market: diagnostics on the levered equity and growth-optimal returns."""
    dparams = {k: v for k, v in params.items() if k in _DISASTER_KEYS}
    p = disaster_params(dparams)
    lev = _num(params, "leverage", 3.0)
    mk = sim_disaster_market(p, n, seed, lev)
    m = mk["sdf"].fs.realized
    grid = list(s_grid) or [-1.0, 0.5]
    moments = {s: np.full(n, disaster_conditional_moment(p, s)) for s in grid}
    z = disaster_entropy(p)
    report = {"model": "disaster", "n": n, "seed": seed, "entropy": z, "returns": {}}
    for name in ("equity", "growth_optimal"):
        r = mk[name]
        path = dg.SdfReturnPath(m, r, moments)
        panel = dg.ReturnPanel(r, mk["riskfree"])
        report["returns"][name] = {
            "cesaro_terminal": dg.cesaro_risk_adjusted(path).terminal,
            "log_product_terminal": float(dg.risk_adjusted_log_product(path)[-1]),
            "excess_log": dg.long_term_excess(panel, "log").terminal,
            "entropy_bound": dg.entropy_excess_bound(z, panel).to_dict(),
            "reversals": dg.slow_decrease_scan(path, band).to_dict(),
            "liu_dual": {repr(s): dg.liu_dual_bound(path, s, r).to_dict() for s in grid},
        }
    return report


def cmd_diagnose(args) -> int:
    if args.in_path and args.model:
        raise ValidationError("give either --in or --model, not both")
    if args.model:
        if args.model != "disaster":
            raise ValidationError("diagnose --model supports only the disaster market")
        params = _load_params(args.params, "disaster", ("leverage",))
        s_grid = parse_s_grid(args.s_grid) if args.s_grid else ()
        report = diagnose_disaster(params, _need(args.n, "--n"), _need(args.seed, "--seed"), args.band, s_grid)
    else:
        cols = _read_columns(_need(args.in_path, "--in"))
        params = read_params(args.params) if args.params else {}
        check_keys(params, _DIAG_KEYS, "diagnose")
        if "gross_return" in cols:
            report = diagnose_panel(cols, params)
        elif "m" in cols and "r_gross" in cols:
            report = diagnose_sdf_returns(cols, params, args.band)
        elif {"realized", "predicted"} <= set(cols):
            fs, _ = read_forecast_series(args.in_path)
            report = {"sample_mean_gap": dg.sample_mean_gap(fs).terminal}
        else:
            raise ValidationError("unrecognized input columns for diagnose")
    _dump_json(report, args.report)
    if not args.report:
        sys.stdout.write(_dump_json(report, None))
    for key, val in report.items():
        if isinstance(val, (int, float)) and not isinstance(val, bool):
            _say(f"diagnose: {key}={val!r}")
    return 0


_TERM_KEYS = ("k_max", "z", "horizons", "rate", "sigma")


def cmd_term(args) -> int:
    params = read_params(args.params) if args.params else {}
    report: dict = {}
    if args.model:
        report["bcz"] = term_bcz(args.model, params, args.paths, args.seed, args.threads)
        _say(f"term: I(1)={report['bcz']['i_1']!r} I(inf)={report['bcz']['i_inf']!r}")
    else:
        check_keys(params, _TERM_KEYS, "term")
        curve = term.read_discount_curve(_need(args.curve, "--curve"))
        yr = term.yields(curve)
        report["yields"] = yr.to_dict()
        report["flags"] = list(curve.flags)
        ts = sorted(yr.y_inf)
        report["dir_violations"] = term.dir_monotonicity([yr.y_inf[t] for t in ts])
        if args.in_path:
            cols = _read_columns(args.in_path)
            if "m" not in cols:
                raise ValidationError("--in for term needs an 'm' column")
            k_max = int(_num(params, "k_max", 2))
            z = _num(params, "z") if "z" in params else None
            aj = term.aj_decompose(cols["m"], curve, k_max, z)
            report["aj"] = aj.to_dict()
            if args.out:
                _write_table(args.out, {"t": list(range(1, aj.perm.size + 1)), "perm": aj.perm, "temp": aj.temp})
        _say(f"term: dates={len(ts)} dir_violations={len(report['dir_violations'])}")
    _dump_json(report, args.report)
    if not args.report:
        sys.stdout.write(_dump_json(report, None))
    return 0


def term_bcz(model: str, params: dict, n_paths: int, seed, threads: int) -> dict:
    """Horizon entropy for IID SDF models via the library's ensemble path."""
    seed = _need(seed, "--seed")
    if model == "lognormal":
        check_keys(params, ("sigma", "horizons"), "term lognormal")
        sigma = _num(params, "sigma", 0.2)
        hs = [int(h) for h in _seq(params, "horizons", (1, 2, 4, 8, 16, 32, 64))]
        sim = lambda s: processes.sim_unit_mean_lognormal(sigma, max(hs), s)
        z = 0.5 * sigma * sigma
    elif model == "disaster":
        check_keys(params, _DISASTER_KEYS + ("horizons",), "term disaster")
        hs = [int(h) for h in _seq(params, "horizons", (1, 2, 4, 8, 16, 32, 64))]
        p = disaster_params({k: v for k, v in params.items() if k != "horizons"})
        sim = lambda s: sim_disaster_sdf(p, max(hs), s)
        z = disaster_entropy(p)
    else:
        raise ValidationError("term --model supports lognormal and disaster")
    paths = ensemble_map(lambda i, s: sim(s), n_paths, seed, threads)
    m = np.vstack([p.fs.realized for p in paths])
    lp = np.log(np.vstack([p.fs.predicted for p in paths]))
    bm = term.bcz_entropy(m, hs, log_predicted=lp)
    rf = float(-lp[0, 0])
    check = term.bcz_identity_check(bm, z, rf)
    return {
        "measures": bm.to_dict(),
        "z_closed_form": z,
        "i_1": bm.i_t_n[(0, hs[0])],
        "i_inf": bm.i_t_inf[0],
        "identity_residual": {str(t): r.__dict__ for t, r in check.items()},
    }


# -- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="longrun", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "laws", "sdf", "svix", "diagnose", "term"):
        sp = sub.add_parser(name)
        sp.add_argument("--model")
        sp.add_argument("--params")
        sp.add_argument("--n", type=int)
        sp.add_argument("--paths", type=int, default=1)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--s-grid", dest="s_grid")
        sp.add_argument("--in", dest="in_path")
        sp.add_argument("--chain")
        sp.add_argument("--curve")
        sp.add_argument("--out")
        sp.add_argument("--report")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--decay", type=float)
        sp.add_argument("--band", type=float, default=1.1)
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "laws": cmd_laws,
    "sdf": cmd_sdf,
    "svix": cmd_svix,
    "diagnose": cmd_diagnose,
    "term": cmd_term,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_fix_argv(argv))
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        if args.paths < 1:
            raise ValidationError("--paths must be at least 1")
        if args.threads < 1:
            raise ValidationError("--threads must be at least 1")
        if args.n is not None and args.n < 1:
            raise ValidationError("--n must be at least 1")
        if args.seed is not None and args.seed < 0:
            raise ValidationError("--seed must be nonnegative")
        return _COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
