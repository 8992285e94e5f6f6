"""benfordrec command line: gen, analyze, decompose, predict, montecarlo.

Configuration precedence, highest first: command-line flags, the JSON file
given with ``--config``, the preset's own settings, built-in defaults.
Every report embeds the resolved configuration and its SHA-256 hash; output
paths and the worker count are left out of both, so they never change the
payload.

Exit codes: 0 success, 1 verdict differs from ``--expect``, 2 usage or parse
error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import benford as bf
from . import binet
from . import coeffexpr as cx
from . import decompose as dc
from .presets import ANALYSIS_VERDICT, Preset, ProductGenerator, get_preset
from .recurrence import (
    LINEAR,
    MULTIPLICATIVE,
    RecurrenceError,
    RecurrenceSpec,
    make_sample,
    from_csv,
    iterate,
    sample_from_dict,
    sample_to_dict,
    to_csv,
)
from .scinum import SciNumDomainError, from_real, log10_frac

COMMANDS = ("gen", "analyze", "decompose", "predict", "montecarlo")
DEFAULT_HORIZON = 1000
NOT_HASHED = ("output", "diagnostics", "plot_data", "workers")


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    spec: dict | None = None
    horizon: int = DEFAULT_HORIZON
    seed: int = 0
    output: str | None = None
    format: str = "json"
    thresholds: dict = field(default_factory=lambda: bf.DEFAULT_THRESHOLDS.to_dict())
    input: str | None = None
    mode: str | None = None
    c: float | None = None
    c2: float | None = None
    trials: int = 1
    chain_length: int = 10
    mc_mode: str | None = None
    expect: str | None = None
    diagnostics: str | None = None
    plot_data: str | None = None
    workers: int = 1

    def resolved(self) -> dict:
        d = asdict(self)
        return {k: v for k, v in d.items() if k not in NOT_HASHED}

    def config_hash(self) -> str:
        return _sha256(_dumps(self.resolved()))


# --- helpers -------------------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False, default=_json_default) + "\n"


def _jsonable(obj):
    """nan and inf become null; tuples become lists."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _envelope(cfg: RunConfig, payload: dict) -> str:
    return _dumps({"config": cfg.resolved(), "config_hash": cfg.config_hash(), **payload})


def _thresholds(cfg: RunConfig) -> bf.Thresholds:
    t = dict(bf.DEFAULT_THRESHOLDS.to_dict())
    t.update(cfg.thresholds or {})
    return bf.Thresholds(float(t["max_digit_dev"]), float(t["star_discrepancy"]), float(t["weyl"]),
                         int(t["min_sample"]), int(t["weyl_m"]))


# --- spec resolution -------------------------------------------------------------

def _spec_from_dict(d: dict) -> RecurrenceSpec | ProductGenerator:
    if d.get("kind") == "product":
        if not d.get("mu"):
            raise UsageError("product spec needs 'mu'")
        return ProductGenerator.from_dict(d)
    coeffs = d.get("coeffs") or []
    initial = d.get("initial") or []
    if not coeffs:
        raise UsageError("spec needs at least one coefficient (--coeff)")
    if "depth" in d and d["depth"] is not None and int(d["depth"]) != len(coeffs):
        raise UsageError(f"--depth {d['depth']} but {len(coeffs)} coefficient(s) given")
    if len(initial) != len(coeffs):
        raise UsageError(f"{len(coeffs)} coefficient(s) need {len(coeffs)} initial value(s), got {len(initial)}")
    return RecurrenceSpec.from_dict({
        "kind": d.get("kind", LINEAR),
        "coeffs": [str(c) for c in coeffs],
        "initial": [float(v) if not isinstance(v, str) else float(v) for v in initial],
        "horizon": DEFAULT_HORIZON,
    })


@dataclass(frozen=True)
class Source:
    spec: RecurrenceSpec | ProductGenerator
    horizon: int
    preset: Preset | None = None
    clamped_from: int | None = None

    @property
    def is_product(self) -> bool:
        return isinstance(self.spec, ProductGenerator)

    def recurrence(self, seed: int) -> RecurrenceSpec:
        return self.spec.replace(horizon=self.horizon, trial_seed=seed)

    def sample(self, seed: int):
        if self.is_product:
            return self.spec.sample(self.horizon, seed)
        return iterate(self.recurrence(seed))


def resolve_source(cfg: RunConfig) -> Source:
    if cfg.horizon < 2:
        raise UsageError("horizon N must be at least 2")
    if cfg.preset is not None and cfg.spec is not None:
        raise UsageError("give exactly one spec source: a preset or an explicit spec")
    if cfg.preset is not None:
        try:
            p = get_preset(cfg.preset)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        N = p.horizon(cfg.horizon)
        return Source(p.spec, N, p, cfg.horizon if N != cfg.horizon else None)
    if cfg.spec is not None:
        return Source(_spec_from_dict(cfg.spec), cfg.horizon)
    raise UsageError("no spec source: use --preset, --config, or --coeff/--init (or --mu)")


def _meta(src: Source) -> dict:
    spec = src.spec if src.is_product else src.spec.replace(horizon=src.horizon)
    out = {"spec": spec.to_dict(), "horizon": src.horizon}
    if src.clamped_from is not None:
        out["horizon_clamped_from"] = src.clamped_from
    return out


# --- commands ----------------------------------------------------------------------

def _expect_check(cfg: RunConfig, verdict: str, preset: Preset | None) -> int:
    if cfg.expect is None:
        return 0
    want = cfg.expect
    if want == "auto":
        if preset is None or preset.expected is None:
            return 0
        want = preset.expected
    want_analysis = ANALYSIS_VERDICT.get(want, want)
    if verdict == bf.INSUFFICIENT:
        return 0
    if want_analysis == bf.CONSISTENT and verdict not in (bf.CONSISTENT, binet.BENFORD):
        print(f"expected {want}, got {verdict}", file=sys.stderr)
        return 1
    return 0


def cmd_gen(cfg: RunConfig) -> int:
    src = resolve_source(cfg)
    sample = src.sample(cfg.seed)
    if cfg.format == "csv":
        _write(cfg.output, f"# config_hash={cfg.config_hash()}\n" + to_csv(sample))
    else:
        _write(cfg.output, _envelope(cfg, {**_meta(src), "sequence": sample_to_dict(sample)}))
    return 0


def _read_sequence(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    stripped = text.lstrip()
    try:
        if stripped.startswith("{"):
            d = json.loads(text)
            return sample_from_dict(d.get("sequence", d)), _sha256(text)
        return from_csv(text), _sha256(text)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{path}: not a sequence file ({exc})") from None


def _report_csv(cfg: RunConfig, rep: bf.BenfordReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("d", "observed", "expected"))
    for d, obs, exp in rep.digit_hist.rows():
        w.writerow((d, repr(obs), repr(exp)))
    return f"# config_hash={cfg.config_hash()}\n# verdict={rep.verdict}\n" + buf.getvalue()


def _plot_data(rep: bf.BenfordReport) -> str:
    return "".join(f"{d} {obs!r}\n" for d, obs, _ in rep.digit_hist.rows())


def cmd_analyze(cfg: RunConfig) -> int:
    th = _thresholds(cfg)
    preset = None
    if cfg.input is not None:
        if cfg.preset is not None or cfg.spec is not None:
            raise UsageError("give exactly one source: --input or a spec")
        sample, digest = _read_sequence(cfg.input)
        meta = {"input_sha256": digest}
    else:
        src = resolve_source(cfg)
        preset = src.preset
        sample = src.sample(cfg.seed)
        meta = _meta(src)
    try:
        rep = bf.analyze_sample(sample, thresholds=th)
    except ValueError as exc:
        raise NumericFailure(str(exc)) from None
    if cfg.format == "csv":
        _write(cfg.output, _report_csv(cfg, rep))
    else:
        _write(cfg.output, _envelope(cfg, {**meta, "report": rep.to_dict()}))
    if cfg.plot_data:
        _write(cfg.plot_data, _plot_data(rep))
    return _expect_check(cfg, rep.verdict, preset)


def _diagnostics_csv(cfg: RunConfig, dom: dc.DominanceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "p", "q", "gf2", "rel_error"))
    for n, p, q, g, r in dom.rows():
        w.writerow((n, repr(p), repr(q), repr(g), "" if math.isnan(r) else repr(r)))
    return f"# config_hash={cfg.config_hash()}\n" + buf.getvalue()


def _decompose2(spec: RecurrenceSpec, N: int, mode: str, c: float | None, seed: int):
    f, g = spec.coeffs
    a1, a2 = (float(v) for v in spec.initial)
    return dc.build_lambda_mu(f, g, a1, a2, N, c, mode=dc.HINT if c is not None else mode, trial_seed=seed)


def _main_term_summary(dec, th, seq):
    dom = dc.dominance_check(dec, seq=seq)
    rep = bf.analyze_sample(dc.main_term_sequence(dec), thresholds=th)
    return dom, rep


def _b_sample(red: dc.Depth3Reduction, seq):
    """b_n = a_{n+1} - lambda(n) a_n straight from the iterated sequence, n = 1..N-2."""
    vals = [seq.values[n] - from_real(float(red.lam[n])) * seq.values[n - 1]
            for n in range(1, red.horizon - 1)]
    return make_sample(vals, {"source": "b_sequence"})


def cmd_decompose(cfg: RunConfig) -> int:
    src = resolve_source(cfg)
    if src.is_product or src.spec.kind != LINEAR or src.spec.depth not in (2, 3):
        raise UsageError("decompose needs a depth-2 or depth-3 linear recurrence")
    th = _thresholds(cfg)
    spec = src.recurrence(cfg.seed)
    N = src.horizon
    mode = cfg.mode or (src.preset.decompose_mode if src.preset and src.preset.decompose_mode else dc.MINIMAL)
    seq = iterate(spec.replace(horizon=N + 1))
    payload = _meta(src)
    payload["mode"] = mode

    if spec.depth == 3:
        red = dc.reduce_depth3(*spec.coeffs, [float(v) for v in spec.initial], N, mode=mode,
                               trial_seed=cfg.seed)
        upto = min(25, N - 2)
        check = max(abs(float(dc.closed_form_depth3(red, n) / seq.values[n]) - 1.0)
                    for n in range(2, upto + 1) if seq.values[n].sign != 0)
        inner_dom, inner_rep = _main_term_summary(red.inner, th, _b_sample(red, seq))
        seq_rep = bf.analyze_sample(seq, thresholds=th)
        payload.update({
            "reduction": red.to_dict(),
            "identity_residual": red.identity_residuals(),
            "closed_form_check": {"n_max": upto, "max_rel_error": check},
            "inner_dominance": inner_dom.summary,
            "inner_main_term_report": inner_rep.to_dict(),
            "sequence_report": seq_rep.to_dict(),
        })
        print(f"identity residual {red.identity_residuals():.3e}", file=sys.stderr)
        _write(cfg.output, _envelope(cfg, payload))
        return _expect_check(cfg, seq_rep.verdict, src.preset)

    dec = _decompose2(spec, N, mode, cfg.c, cfg.seed)
    dom, rep = _main_term_summary(dec, th, seq)
    # second decomposition for the c-independence comparison
    other_c = cfg.c2
    second = None
    if other_c is None:
        f, g = spec.coeffs
        try:
            second = dc.build_lambda_mu(f, g, float(spec.initial[0]), float(spec.initial[1]), N,
                                        mode=dc.SCAN, trial_seed=cfg.seed, exclude=[dec.c])
        except dc.DecompositionError as exc:
            print(f"note: no second admissible c for comparison ({exc})", file=sys.stderr)
    else:
        second = _decompose2(spec, N, dc.HINT, other_c, cfg.seed)
    comparison = None
    if second is not None:
        dom2, rep2 = _main_term_summary(second, th, seq)
        comparison = {
            "c": second.c,
            "identity_residuals": list(dc.identity_residuals(second)),
            "main_term_verdict": rep2.verdict,
            "main_term_dominates": dom2.main_term_dominates,
            "verdicts_agree": rep2.verdict == rep.verdict,
        }
        if rep2.verdict != rep.verdict:
            print(f"note: main-term verdict depends on c ({dec.c!r}: {rep.verdict}, "
                  f"{second.c!r}: {rep2.verdict})", file=sys.stderr)
    payload.update({
        "decomposition": dec.to_dict(),
        "dominance": {"main_term_dominates": dom.main_term_dominates, **dom.summary},
        "main_term_report": rep.to_dict(),
        "second_c": comparison,
    })
    _write(cfg.output, _envelope(cfg, payload))
    diag = cfg.diagnostics
    if diag is None and cfg.output not in (None, "-"):
        diag = cfg.output.rsplit(".", 1)[0] + ".diagnostics.csv"
    if diag is not None:
        _write(diag, _diagnostics_csv(cfg, dom))
    return _expect_check(cfg, rep.verdict, src.preset)


def cmd_predict(cfg: RunConfig) -> int:
    src = resolve_source(cfg)
    if src.is_product or src.spec.kind != LINEAR:
        raise UsageError("predict needs a linear recurrence")
    if not all(cx.is_constant(c) for c in src.spec.coeffs):
        raise UsageError("coefficients depend on n or are random; use 'decompose' instead")
    coeffs = [cx.eval_at(c, 1) for c in src.spec.coeffs]
    sol = binet.solve(coeffs, [float(v) for v in src.spec.initial])
    verdict = binet.predict_benford(sol)
    payload = {"spec": src.spec.to_dict(), "solution": binet.solution_to_dict(sol), "verdict": verdict.to_dict()}
    _write(cfg.output, _envelope(cfg, payload))
    return _expect_check(cfg, verdict.status, src.preset)


def _chain_trial(args) -> float:
    mu, b1, log_mu, length, seed = args
    x = dc.product_sequence(mu, length, b1, seed, log_mu).values[-1]
    return log10_frac(x) if x.sign != 0 else math.nan


def _sequence_trial(args) -> dict:
    spec_dict, product, N, seed, th = args
    if product:
        sample = ProductGenerator.from_dict(spec_dict).sample(N, seed)
    else:
        sample = iterate(RecurrenceSpec.from_dict({**spec_dict, "horizon": N, "trial_seed": seed}))
    return bf.analyze_sample(sample, thresholds=bf.Thresholds(**th)).to_dict()


def _run(fn, jobs, workers: int) -> list:
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


def cmd_montecarlo(cfg: RunConfig) -> int:
    src = resolve_source(cfg)
    if not src.spec.is_random:
        raise UsageError("montecarlo needs a spec with at least one uniform(...) node")
    if cfg.trials < 1:
        raise UsageError("trials must be at least 1")
    th = _thresholds(cfg)
    mode = cfg.mc_mode or ("chain" if src.is_product else "sequence")
    seeds = [cfg.seed + t for t in range(cfg.trials)]
    payload = {**_meta(src), "trials": cfg.trials, "mc_mode": mode, "seeds": [seeds[0], seeds[-1]]}
    if mode == "chain":
        if not src.is_product:
            raise UsageError("chain mode needs a product generator (--mu or a product preset)")
        if cfg.chain_length < 1:
            raise UsageError("chain length must be at least 1")
        g = src.spec
        jobs = [(g.mu, g.b1, g.log_mu, cfg.chain_length, s) for s in seeds]
        points = np.array(_run(_chain_trial, jobs, cfg.workers))
        zeros = int(np.sum(np.isnan(points)))
        rep = bf.analyze(points[~np.isnan(points)], thresholds=th, excluded_zeros=zeros)
        d = rep.to_dict()
        d["chi2_pvalue"] = float(stats.chi2.sf(rep.chi2, 8))
        payload.update({"chain_length": cfg.chain_length, "report": d})
        verdict = rep.verdict
    elif mode == "sequence":
        jobs = [(src.spec.to_dict(), src.is_product, src.horizon, s, th.to_dict()) for s in seeds]
        reports = _run(_sequence_trial, jobs, cfg.workers)
        counts = {}
        for r in reports:
            counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
        keys = ("max_digit_dev", "star_discrepancy", "ks_significand", "chi2")
        payload["aggregate"] = {
            "verdict_counts": dict(sorted(counts.items())),
            **{f"mean_{k}": math.fsum(r[k] for r in reports) / len(reports) for k in keys},
            "mean_max_weyl": math.fsum(max(r["weyl_sums"]) for r in reports) / len(reports),
        }
        payload["trial_reports"] = reports
        verdict = bf.CONSISTENT if counts.get(bf.CONSISTENT, 0) == len(reports) else (
            bf.INSUFFICIENT if counts.get(bf.INSUFFICIENT, 0) else bf.INCONSISTENT)
        payload["aggregate"]["verdict"] = verdict
    else:
        raise UsageError(f"unknown Monte Carlo mode {mode!r}")
    _write(cfg.output, _envelope(cfg, payload))
    return _expect_check(cfg, verdict, src.preset)


COMMAND_FNS = {
    "gen": cmd_gen,
    "analyze": cmd_analyze,
    "decompose": cmd_decompose,
    "predict": cmd_predict,
    "montecarlo": cmd_montecarlo,
}


# --- argument parsing ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_argument_group("spec source")
    src.add_argument("--preset", help="named preset, e.g. fibonacci")
    src.add_argument("--config", help="JSON run configuration (flags override its values)")
    src.add_argument("--kind", choices=(LINEAR, MULTIPLICATIVE))
    src.add_argument("--depth", type=int)
    src.add_argument("--coeff", action="append", help="coefficient expression f_i(n); repeat per slot")
    src.add_argument("--init", action="append", help="initial value; repeat per slot")
    src.add_argument("--mu", help="main-term factor mu(n) for a product generator")
    src.add_argument("--b1", type=float)
    src.add_argument("--log-mu", action="store_true", default=None, help="--mu gives ln mu(n)")
    common.add_argument("-N", "--horizon", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("-o", "--output")
    common.add_argument("--format", choices=("json", "csv"))
    th = common.add_argument_group("verdict thresholds")
    th.add_argument("--max-digit-dev", type=float)
    th.add_argument("--max-star", type=float)
    th.add_argument("--max-weyl", type=float)
    th.add_argument("--min-sample", type=int)
    th.add_argument("--weyl-m", type=int)
    common.add_argument("--expect", nargs="?", const="auto",
                        help="exit 1 unless the verdict matches (default: the preset's expected tag)")

    parser = _Parser(prog="benfordrec", description="Benford analysis of recurrence sequences")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("gen", parents=[common], help="generate a sequence")
    a = sub.add_parser("analyze", parents=[common], help="first-digit and equidistribution report")
    a.add_argument("--input", help="sequence CSV or JSON written by 'gen'")
    a.add_argument("--plot-data", help="write 'digit frequency' lines here")
    d = sub.add_parser("decompose", parents=[common], help="auxiliary-function decomposition")
    d.add_argument("--mode", choices=(dc.SCAN, dc.MINIMAL))
    d.add_argument("--c", type=float, help="use this lambda(1)")
    d.add_argument("--c2", type=float, help="second lambda(1) for the comparison run")
    d.add_argument("--diagnostics", help="per-n CSV (n, p, q, gf2, rel_error)")
    sub.add_parser("predict", parents=[common], help="characteristic-root verdict")
    m = sub.add_parser("montecarlo", parents=[common], help="independent random trials")
    m.add_argument("-T", "--trials", type=int)
    m.add_argument("--chain-length", type=int)
    m.add_argument("--mc-mode", choices=("chain", "sequence"))
    m.add_argument("--workers", type=int)
    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: {exc.msg} at byte offset {len(text[:exc.pos].encode())}") from None
    if not isinstance(d, dict):
        raise UsageError(f"config {path}: top level must be an object")
    unknown = set(d) - {f for f in RunConfig.__dataclass_fields__}
    if unknown:
        raise UsageError(f"config {path}: unknown field(s) {', '.join(sorted(unknown))}")
    return d


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base = _load_config_file(ns.config) if ns.config else {}
    cfg = RunConfig(command=ns.command)
    for k, v in base.items():
        if k != "command":
            setattr(cfg, k, v)
    inline_spec = any(getattr(ns, k) is not None for k in ("coeff", "init", "mu", "kind", "depth"))
    if ns.preset is not None and inline_spec:
        raise UsageError("give exactly one spec source: --preset or inline --coeff/--init/--mu")
    if ns.preset is not None:
        cfg.preset, cfg.spec = ns.preset, None
    elif inline_spec:
        cfg.preset = None
        if ns.mu is not None:
            if ns.coeff or ns.init:
                raise UsageError("--mu describes a product generator; drop --coeff/--init")
            cfg.spec = {"kind": "product", "mu": cx.to_text(cx.parse(ns.mu)),
                        "b1": 1.0 if ns.b1 is None else ns.b1, "log_mu": bool(ns.log_mu)}
        else:
            coeffs = [cx.to_text(cx.parse(c)) for c in (ns.coeff or [])]
            cfg.spec = {"kind": ns.kind or LINEAR, "depth": ns.depth, "coeffs": coeffs,
                        "initial": [_parse_real(v) for v in (ns.init or [])]}
    elif isinstance(cfg.spec, dict) and cfg.spec.get("coeffs"):
        cfg.spec = dict(cfg.spec, coeffs=[cx.to_text(cx.parse(str(c))) for c in cfg.spec["coeffs"]])
    overrides = {
        "horizon": ns.horizon, "seed": ns.seed, "output": ns.output, "format": ns.format, "expect": ns.expect,
    }
    for name in ("input", "plot_data", "mode", "c", "c2", "diagnostics", "trials", "chain_length",
                 "mc_mode", "workers"):
        overrides[name] = getattr(ns, name, None)
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, k, v)
    if ns.format is None and "format" not in base and str(cfg.output).lower().endswith(".csv"):
        cfg.format = "csv"
    th = dict(bf.DEFAULT_THRESHOLDS.to_dict())
    th.update(cfg.thresholds or {})
    for key, val in (("max_digit_dev", ns.max_digit_dev), ("star_discrepancy", ns.max_star),
                     ("weyl", ns.max_weyl), ("min_sample", ns.min_sample), ("weyl_m", ns.weyl_m)):
        if val is not None:
            th[key] = val
    cfg.thresholds = th
    if not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2**64:
        raise UsageError("seed must be an integer in [0, 2^64)")
    if cfg.format not in ("json", "csv"):
        raise UsageError(f"unknown format {cfg.format!r}")
    return cfg


def _parse_real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"initial value {text!r} is not a real number") from None


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        return COMMAND_FNS[cfg.command](cfg)
    except cx.ExprSyntaxError as exc:
        print(f"benfordrec: parse error: {exc}", file=sys.stderr)
        if exc.text:
            print(f"  {exc.text}\n  {' ' * len(exc.text.encode()[:exc.offset].decode(errors='ignore'))}^",
                  file=sys.stderr)
        return 2
    except (UsageError, RecurrenceError, binet.UnsupportedDegreeError) as exc:
        print(f"benfordrec: {exc}", file=sys.stderr)
        return 2
    except (NumericFailure, dc.DecompositionError, cx.ExprDomainError, binet.IllConditionedError,
            SciNumDomainError, OverflowError, ZeroDivisionError, FloatingPointError) as exc:
        print(f"benfordrec: numeric failure: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    raise SystemExit(main())
