"""Auxiliary-function decomposition of non-constant-coefficient linear recurrences.

Depth 2.  For a_{n+1} = f(n) a_n + g(n) a_{n-1} (g never zero) we look for
lambda, mu with

    f(n) = lambda(n) + mu(n),        g(n) = -lambda(n-1) mu(n),         n >= 2,

so that b_n = a_{n+1} - lambda(n) a_n obeys b_n = mu(n) b_{n-1}.  Then

    a_{n+1} = b_1 sum_{k=2}^{n} prod_{i=k+1}^{n} lambda(i) prod_{j=2}^{k} mu(j)
              + a_2 prod_{i=2}^{n} lambda(i),

with main term r(n) = b_1 prod_{i=2}^{n} mu(i) and p(n) = lambda(n)/mu(n).

Every solution u of the recurrence gives such a pair through
lambda(n) = u_{n+1}/u_n; the one-parameter family is indexed by c = lambda(1).
A generic c tracks the dominant solution, which makes lambda the large factor
(p -> infinity).  Only the recessive ("minimal") solution gives p -> 0, so the
main-term analysis uses ``mode="minimal"``, which computes lambda by backward
recursion.  ``mode="scan"`` reproduces the admissible-constant scan.

Depth L >= 3 is reduced one level at a time: b_n = a_{n+1} - lambda(n) a_n
satisfies a depth L-1 recurrence with coefficients g_1..g_{L-1}, where

    f_1(n) = lambda(n) + g_1(n-1)
    f_i(n) = g_i(n-1) - g_{i-1}(n-1) lambda(n-i+1)       2 <= i <= L-1
    f_L(n) = -g_{L-1}(n-1) lambda(n-L+1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import coeffexpr as cx
from .recurrence import SequenceSample, make_sample, realize_coefficients
from .scinum import ONE, SciNum, ZERO, add, div, from_log10, from_real, mul

IDENTITY_TOL = 1e-10
DEGENERACY_FLOOR = 1e-8
B1_FORBIDDEN_TOL = 1e-12
TAIL_FRACTION = 0.2
Q_TAIL_MAX = 1e-3
GF2_TAIL_MAX = 1e-3
N_CANDIDATES = 64
PERTURBATION = 1.0 / 64.0

SCAN = "scan"
MINIMAL = "minimal"
HINT = "hint"


class DecompositionError(ArithmeticError):
    pass


# --- coefficient handling ----------------------------------------------------

def coefficient_table(coeffs: Sequence, n_max: int, trial_seed: int = 0) -> np.ndarray:
    """Rows indexed by n (1..n_max), one column per coefficient.

    Expressions are realized with the same keyed streams the sequence engine
    uses, so a decomposition and a sequence built from the same seed see the
    same random coefficients.  1-D arrays are taken as already realized.
    """
    cols = []
    exprs = []
    for i, c in enumerate(coeffs):
        if isinstance(c, np.ndarray) or (isinstance(c, (list, tuple)) and not isinstance(c, str)):
            arr = np.asarray(c, dtype=float)
            if len(arr) < n_max + 1:
                raise DecompositionError(f"coefficient {i + 1} realized only up to n={len(arr) - 1}, need {n_max}")
            cols.append(arr[: n_max + 1])
            exprs.append(None)
        else:
            cols.append(None)
            exprs.append(cx.as_expr(c))
    if any(e is not None for e in exprs):
        full = realize_coefficients([e if e is not None else cx.Num(0.0) for e in exprs], n_max, trial_seed)
        for i, e in enumerate(exprs):
            if e is not None:
                cols[i] = full[:, i]
    return np.column_stack(cols)


# --- seeds ---------------------------------------------------------------------

@dataclass(frozen=True)
class AuxSeeds:
    """Basis solutions used for the admissibility scan (SciNum, index n-1 holds term n)."""

    alpha: tuple
    beta: tuple
    gamma: tuple = ()


def _seed_run(table: np.ndarray, start: Sequence[float], n_last: int) -> list:
    """Solution of the full-depth recurrence with the given first L terms, up to term n_last."""
    L = table.shape[1]
    vals = [from_real(x) for x in start]
    coeffs_cache = {}
    for n in range(L, n_last):
        row = coeffs_cache.get(n)
        if row is None:
            row = [from_real(float(x)) for x in table[n]]
        acc = ZERO
        for i in range(L):
            acc = add(acc, mul(row[i], vals[n - 1 - i]))
        vals.append(acc)
    return vals[:n_last]


def _degenerate(parts: Sequence[SciNum], floor: float = DEGENERACY_FLOOR) -> bool:
    total = ZERO
    big = -math.inf
    for p in parts:
        total = add(total, p)
        if p.sign != 0:
            big = max(big, p.log10_abs())
    if total.sign == 0:
        return True
    return total.log10_abs() < big + math.log10(floor)


def candidate_constants(count: int = N_CANDIDATES) -> list:
    """1, 2, 3, -1, 1/2, then further rationals of small height."""
    out = [Fraction(1), Fraction(2), Fraction(3), Fraction(-1), Fraction(1, 2)]
    h = 1
    while len(out) < count:
        h += 1
        level = []
        for q in range(1, h + 1):
            for p in range(-h, h + 1):
                if p == 0 or max(abs(p), q) != h or math.gcd(p, q) != 1:
                    continue
                level.append(Fraction(p, q))
        level.sort(key=lambda x: (abs(x), x < 0))
        out.extend(x for x in level if x not in out)
    return [float(x) for x in out[:count]]


# --- one-level reduction --------------------------------------------------------

def _forward_lambdas(table: np.ndarray, lam_start: Sequence[float], N: int):
    """lambda(1..N) and g_1..g_{L-1} from the first L-1 lambdas (inductive form)."""
    L = table.shape[1]
    lam = np.full(N + 1, np.nan)
    g = np.full((N + 1, L - 1), np.nan)
    lam[1:L] = lam_start
    for n in range(L, N + 1):
        f = table[n]
        with np.errstate(all="raise"):
            try:
                g[n - 1, L - 2] = -f[L - 1] / lam[n - L + 1]
                for i in range(L - 1, 1, -1):  # i = L-1 .. 2, computes g_{i-1}
                    g[n - 1, i - 2] = (g[n - 1, i - 1] - f[i - 1]) / lam[n - i + 1]
                lam[n] = f[0] - g[n - 1, 0]
            except FloatingPointError:
                raise DecompositionError(f"vanishing lambda or overflow at n={n}") from None
        if lam[n] == 0.0:
            raise DecompositionError(f"lambda({n}) vanished")
    return lam, g


def _backward_lambdas(table: np.ndarray, M: int, N: int):
    """Backward recursion from lambda = 0 beyond M; converges to the most recessive solution."""
    L = table.shape[1]
    lam = np.zeros(M + 1)
    g = np.full((M + 1, L - 1), np.nan)
    with np.errstate(all="raise"):
        try:
            for n in range(M, L - 1, -1):
                f = table[n]
                g[n - 1, 0] = f[0] - lam[n]
                for i in range(2, L):
                    g[n - 1, i - 1] = f[i - 1] + g[n - 1, i - 2] * lam[n - i + 1]
                lam[n - L + 1] = -f[L - 1] / g[n - 1, L - 2]
        except FloatingPointError:
            raise DecompositionError("backward recursion hit a vanishing coefficient") from None
    return lam[: N + 1], g[: N + 1]


def minimal_lambdas(table_fn, L: int, N: int, tol: float = 1e-13, max_extra: int | None = None):
    """Backward recursion with doubling look-ahead until lambda(1..N) is stable."""
    extra = 32
    cap = max_extra if max_extra is not None else max(4 * N, 4096)
    prev = None
    while extra <= cap:
        M = N + extra
        table = table_fn(M)
        lam, g = _backward_lambdas(table, M, N)
        if prev is not None:
            a, b = prev[1:N + 1], lam[1:N + 1]
            if np.all(np.isfinite(b)) and np.all(np.abs(a - b) <= tol * np.maximum(np.abs(b), 1e-300)):
                return lam, g, M
        prev = lam
        extra *= 2
    raise DecompositionError(
        "backward recursion did not settle; the recurrence has no well-separated recessive solution"
    )


# --- depth 2 ------------------------------------------------------------------------

@dataclass(frozen=True)
class AuxiliaryDecomposition:
    c: float
    lam: np.ndarray  # lam[n], n = 1..N
    mu: np.ndarray  # mu[n], n = 2..N
    b1: float
    a1: float
    a2: float
    f: np.ndarray
    g: np.ndarray
    horizon: int
    mode: str
    forbidden_hits: int = 0
    seeds: AuxSeeds | None = None
    trial_seed: int = 0

    def p(self) -> np.ndarray:
        out = np.full(self.horizon + 1, np.nan)
        out[2:] = self.lam[2:] / self.mu[2:]
        return out

    def to_dict(self, head: int = 20) -> dict:
        fres, gres = identity_residuals(self)
        return {
            "c": self.c,
            "mode": self.mode,
            "b1": self.b1,
            "horizon": self.horizon,
            "forbidden_hits": self.forbidden_hits,
            "lambda": [float(x) for x in self.lam[1:head + 1]],
            "mu": [None] + [float(x) for x in self.mu[2:head + 1]],
            "identity_residuals": {"f": fres, "g": gres},
        }


def _depth2_from_lambda(lam, gout, f, g, a1, a2, N, c, mode, hits, seeds, seed):
    # mu(n) comes out of the reduction as g_1(n-1); forming f - lambda instead
    # would cancel badly whenever lambda carries the dominant growth
    mu = np.full(N + 1, np.nan)
    mu[2:] = gout[1:N, 0]
    b1 = a2 - c * a1
    return AuxiliaryDecomposition(
        c=float(c), lam=lam, mu=mu, b1=float(b1), a1=float(a1), a2=float(a2),
        f=np.asarray(f[: N + 1], dtype=float), g=np.asarray(g[: N + 1], dtype=float),
        horizon=N, mode=mode, forbidden_hits=hits, seeds=seeds, trial_seed=seed,
    )


def identity_residuals(dec: AuxiliaryDecomposition) -> tuple[float, float]:
    """Largest relative errors of f = lambda + mu and g(n) = -lambda(n-1) mu(n), n = 2..N."""
    n = np.arange(2, dec.horizon + 1)
    lam, mu, f, g = dec.lam, dec.mu, dec.f, dec.g
    fden = np.where(f[n] != 0, np.abs(f[n]), np.abs(lam[n]) + np.abs(mu[n]))
    fres = np.abs(lam[n] + mu[n] - f[n]) / fden
    gres = np.abs(-lam[n - 1] * mu[n] - g[n]) / np.abs(g[n])
    return float(np.max(fres, initial=0.0)), float(np.max(gres, initial=0.0))


def _seed_table_depth2(table: np.ndarray, N: int) -> AuxSeeds:
    alpha = _seed_run(table, (0.0, 1.0), N + 1)
    beta = _seed_run(table, (1.0, 0.0), N + 1)
    return AuxSeeds(tuple(alpha), tuple(beta))


def admissible(c: float, seeds: AuxSeeds, a1: float, a2: float, N: int) -> bool:
    """c avoids b_1 = 0 and keeps every seed-ratio denominator alpha_k c + beta_k off zero."""
    if a1 != 0 and abs(c - a2 / a1) < B1_FORBIDDEN_TOL * max(1.0, abs(a2 / a1)):
        return False
    cs = from_real(c)
    for k in range(1, N + 1):
        if _degenerate((mul(seeds.alpha[k - 1], cs), seeds.beta[k - 1])):
            return False
    return True


def build_lambda_mu(f, g, a1: float, a2: float, N: int, c_hint: float | None = None, *,
                    mode: str | None = None, trial_seed: int = 0,
                    exclude: Sequence[float] = ()) -> AuxiliaryDecomposition:
    """Construct lambda, mu for a_{n+1} = f(n) a_n + g(n) a_{n-1} over n <= N.

    ``mode`` is "hint" when ``c_hint`` is given, else "scan" by default;
    "minimal" selects the recessive-solution decomposition (p -> 0 regime).
    The scan skips any candidate within 1e-9 of a value in ``exclude``.
    """
    if a1 == 0 and a2 == 0:
        raise DecompositionError("a_1 and a_2 are both zero")
    if N < 2:
        raise DecompositionError("horizon must be at least 2")
    if mode is None:
        mode = HINT if c_hint is not None else SCAN
    table = coefficient_table((f, g), N + 1, trial_seed)
    bad = [n for n in range(2, N + 1) if table[n, 1] == 0 or not np.isfinite(table[n, 1])]
    if bad:
        raise DecompositionError(f"g(n) vanishes at n={bad[0]}")
    fcol, gcol = table[:, 0], table[:, 1]

    if mode == MINIMAL:
        def table_fn(M):
            return coefficient_table((f, g), M, trial_seed)

        lengths = [len(x) for x in (f, g) if isinstance(x, np.ndarray)]
        cap = min(lengths) - 1 - N if lengths else None
        lam, gout, _ = minimal_lambdas(table_fn, 2, N, max_extra=cap)
        c = float(lam[1])
        if a1 != 0 and abs(c - a2 / a1) < B1_FORBIDDEN_TOL * max(1.0, abs(a2 / a1)):
            raise DecompositionError("initial values lie on the recessive solution (b_1 = 0)")
        dec = _depth2_from_lambda(lam, gout, fcol, gcol, a1, a2, N, c, MINIMAL, 0, None, trial_seed)
        _check_identities(dec)
        return dec

    seeds = _seed_table_depth2(table, N)
    if mode == HINT:
        if c_hint is None:
            raise DecompositionError("mode 'hint' needs c_hint")
        if not admissible(c_hint, seeds, a1, a2, N):
            raise DecompositionError(f"c = {c_hint!r} is forbidden (b_1 = 0 or a vanishing denominator)")
        lam, gout = _forward_lambdas(table[: N + 1], [c_hint], N)
        dec = _depth2_from_lambda(lam, gout, fcol, gcol, a1, a2, N, c_hint, HINT, 0, seeds, trial_seed)
        _check_identities(dec)
        return dec

    if mode != SCAN:
        raise ValueError(f"unknown mode {mode!r}")
    first = [a2 / a1 + 1.0] if a1 != 0 else []
    hits = 0
    rejected = []
    for base in first + candidate_constants():
        for c in (float(base), float(base) + PERTURBATION):
            if any(abs(c - x) <= 1e-9 for x in exclude):
                continue
            if not admissible(c, seeds, a1, a2, N):
                hits += 1
                rejected.append(c)
                continue
            try:
                lam, gout = _forward_lambdas(table[: N + 1], [c], N)
                dec = _depth2_from_lambda(lam, gout, fcol, gcol, a1, a2, N, c, SCAN, hits, seeds, trial_seed)
                _check_identities(dec)
            except DecompositionError:
                hits += 1
                rejected.append(c)
                continue
            return dec
    raise DecompositionError(f"no admissible c among the scanned candidates; rejected {rejected[:10]}...")


def _check_identities(dec: AuxiliaryDecomposition) -> None:
    fres, gres = identity_residuals(dec)
    if not (fres <= IDENTITY_TOL and gres <= IDENTITY_TOL):
        raise DecompositionError(f"defining identities violated: f residual {fres:.3g}, g residual {gres:.3g}")
    if np.any(dec.mu[2:] == 0):
        raise DecompositionError("mu vanished")


# --- closed form and main term -----------------------------------------------------

def _sci(x: float) -> SciNum:
    return from_real(float(x))


def closed_form_prefix(dec: AuxiliaryDecomposition, n_max: int) -> list:
    """a_{n+1} for n = 2..n_max via the lambda/mu closed form, accumulated in O(n_max)."""
    if n_max > dec.horizon:
        raise ValueError("n beyond the decomposition horizon")
    b1 = _sci(dec.b1)
    a2 = _sci(dec.a2)
    S = ZERO  # sum_{k=2}^{n} prod_{i=k+1}^{n} lambda(i) prod_{j=2}^{k} mu(j)
    Mu = ONE  # prod_{j=2}^{n} mu(j)
    P = ONE  # prod_{i=2}^{n} lambda(i)
    out = []
    for n in range(2, n_max + 1):
        lam_n = _sci(dec.lam[n])
        Mu = mul(Mu, _sci(dec.mu[n]))
        S = add(mul(lam_n, S), Mu)
        P = mul(P, lam_n)
        out.append(add(mul(b1, S), mul(a2, P)))
    return out


def closed_form_eval(dec: AuxiliaryDecomposition, a2: float, n: int) -> SciNum:
    """a_{n+1} from the closed form (n >= 2)."""
    if n < 2:
        raise ValueError("closed form needs n >= 2")
    if a2 != dec.a2:
        dec = _depth2_replace_a2(dec, a2)
    return closed_form_prefix(dec, n)[-1]


def _depth2_replace_a2(dec, a2):
    return AuxiliaryDecomposition(
        c=dec.c, lam=dec.lam, mu=dec.mu, b1=a2 - dec.c * dec.a1, a1=dec.a1, a2=a2, f=dec.f, g=dec.g,
        horizon=dec.horizon, mode=dec.mode, forbidden_hits=dec.forbidden_hits, seeds=dec.seeds,
        trial_seed=dec.trial_seed,
    )


def main_term_values(dec: AuxiliaryDecomposition, N: int | None = None) -> list:
    """r(n) = b_1 prod_{i=2}^{n} mu(i) for n = 1..N (r(1) = b_1)."""
    N = dec.horizon if N is None else N
    r = _sci(dec.b1)
    out = [r]
    for n in range(2, N + 1):
        r = mul(r, _sci(dec.mu[n]))
        out.append(r)
    return out


def main_term_sequence(dec: AuxiliaryDecomposition, N: int | None = None) -> SequenceSample:
    """The main term r(1..N) as a sequence ready for Benford analysis."""
    N = dec.horizon if N is None else N
    meta = {"source": "main_term", "c": dec.c, "mode": dec.mode, "b1": dec.b1, "seed": dec.trial_seed}
    return make_sample(main_term_values(dec, N), meta)


def product_sequence(mu, N: int, b1: float = 1.0, trial_seed: int = 0, log_mu: bool = False) -> SequenceSample:
    """r(n) = b_1 prod_{i=1}^{n} mu(i), n = 1..N.

    With ``log_mu`` the expression gives ln mu(i), for factors such as
    exp(alpha k^2) that overflow binary64 long before the product does.
    """
    e = cx.as_expr(mu)
    r = _sci(b1)
    out = []
    ln10 = math.log(10.0)
    for n in range(1, N + 1):
        v = cx.eval_at(e, n, trial_seed, 0)
        factor = from_log10(v / ln10) if log_mu else _sci(v)
        r = mul(r, factor)
        out.append(r)
    meta = {"source": "product", "mu": cx.to_text(e), "b1": b1, "log_mu": log_mu, "seed": trial_seed,
            "generator": cx.GENERATOR_ID}
    return make_sample(out, meta)


@dataclass(frozen=True)
class DominanceReport:
    p: np.ndarray  # index n = 2..N
    q: np.ndarray
    gf2: np.ndarray
    f_nondecreasing: bool
    rel_error: np.ndarray  # index n = 2..N (needs a_{N+1}): |a_{n+1} - r(n)| / |r(n)|
    main_term_benford_input: list
    main_term_dominates: bool
    tail_start: int
    gf2_tail_small: bool
    summary: dict = field(default_factory=dict)

    def rows(self):
        """Per-n diagnostics (n, p, q, gf2, rel_error)."""
        for n in range(2, len(self.p)):
            yield n, float(self.p[n]), float(self.q[n]), float(self.gf2[n]), float(self.rel_error[n])


def q_incremental(p: np.ndarray, N: int) -> np.ndarray:
    """q(n) = sum_{k=2}^{n} prod_{i=k}^{n} |p(i)| via q(n+1) = |p(n+1)| (1 + q(n))."""
    q = np.full(N + 1, np.nan)
    q[2] = abs(p[2])
    with np.errstate(over="ignore"):  # q = inf is the honest answer when p grows
        for n in range(2, N):
            q[n + 1] = abs(p[n + 1]) * (1.0 + q[n])
    return q


def _rel_error(a: SciNum, r: SciNum) -> float:
    if r.sign == 0:
        return math.inf
    ratio = div(a, r)
    if ratio.exponent > 300:
        return math.inf
    return abs(float(ratio) - 1.0)


def dominance_check(dec: AuxiliaryDecomposition, f=None, g=None, seq: SequenceSample | None = None) -> DominanceReport:
    """Tail diagnostics for the main-term split.

    ``f``/``g`` when given are re-realized and must match the decomposition's
    coefficients (same realization); ``seq`` supplies a_n for the relative error.
    """
    N = dec.horizon
    if f is not None or g is not None:
        t = coefficient_table((f if f is not None else dec.f, g if g is not None else dec.g), N, dec.trial_seed)
        if not (np.allclose(t[2:, 0], dec.f[2:N + 1], rtol=0, atol=0)
                and np.allclose(t[2:, 1], dec.g[2:N + 1], rtol=0, atol=0)):
            raise DecompositionError("coefficients differ from the decomposition's realization")
    p = dec.p()
    q = q_incremental(p, N)
    gf2 = np.full(N + 1, np.nan)
    gf2[2:] = dec.g[2:N + 1] / dec.f[2:N + 1] ** 2
    f_nondecreasing = bool(np.all(np.diff(dec.f[2:N + 1]) >= 0))
    r = main_term_values(dec, N)
    rel = np.full(N + 1, np.nan)
    if seq is not None:
        upto = min(N, len(seq.values) - 1)
        for n in range(2, upto + 1):
            rel[n] = _rel_error(seq.values[n], r[n - 1])
    tail_start = max(2, int(math.floor(N * (1 - TAIL_FRACTION))))
    q_tail = q[tail_start:]
    rel_tail = rel[tail_start:]
    rel_tail = rel_tail[np.isfinite(rel_tail)]
    q_small = bool(np.all(np.abs(q_tail) < Q_TAIL_MAX))
    rel_monotone = bool(len(rel_tail) > 1 and np.all(np.diff(rel_tail) <= 0))
    gf2_tail = np.abs(gf2[tail_start:])
    gf2_small = bool(np.all(gf2_tail < GF2_TAIL_MAX))
    frac = [float(x.log10_abs() - math.floor(x.log10_abs())) if x.sign else math.nan for x in r]
    summary = {
        "tail_start": tail_start,
        "q_tail_max": float(np.max(np.abs(q_tail))),
        "rel_error_at_end": float(rel_tail[-1]) if len(rel_tail) else None,
        "rel_error_tail_nonincreasing": rel_monotone,
        "gf2_tail_max": float(np.max(gf2_tail)),
        "f_nondecreasing": f_nondecreasing,
        "hypotheses": ("consistent with" if (f_nondecreasing and gf2_small) else "inconsistent with")
        + " f non-decreasing and g/f^2 -> 0 over the horizon",
    }
    return DominanceReport(
        p=p, q=q, gf2=gf2, f_nondecreasing=f_nondecreasing, rel_error=rel,
        main_term_benford_input=frac, main_term_dominates=q_small and rel_monotone,
        tail_start=tail_start, gf2_tail_small=gf2_small, summary=summary,
    )


# --- depth 3 and beyond --------------------------------------------------------------

@dataclass(frozen=True)
class Reduction:
    """One reduction level: lambda and the depth L-1 coefficients g_1..g_{L-1} (g[n, i] = g_{i+1}(n))."""

    lam: np.ndarray
    g: np.ndarray
    f: np.ndarray
    b_initial: tuple
    horizon: int

    def identity_residuals(self) -> float:
        return _reduction_residual(self.f, self.lam, self.g, self.horizon)


def _reduction_residual(f: np.ndarray, lam: np.ndarray, g: np.ndarray, N: int) -> float:
    L = f.shape[1]
    worst = 0.0
    for n in range(L, N + 1):
        rec = [lam[n] + g[n - 1, 0]]
        for i in range(2, L):
            rec.append(g[n - 1, i - 1] - g[n - 1, i - 2] * lam[n - i + 1])
        rec.append(-g[n - 1, L - 2] * lam[n - L + 1])
        for i in range(L):
            den = abs(f[n, i]) if f[n, i] != 0 else max(abs(rec[i]), 1e-300)
            worst = max(worst, abs(rec[i] - f[n, i]) / den)
    return worst


def _b_initial(lam, initial, L):
    return tuple(initial[k + 1] - lam[k + 1] * initial[k] for k in range(L - 1))


def reduce_once(table: np.ndarray, initial: Sequence[float], N: int, lam_start: Sequence[float]) -> Reduction:
    L = table.shape[1]
    if len(lam_start) != L - 1:
        raise ValueError(f"depth {L} needs {L - 1} starting lambdas")
    lam, g = _forward_lambdas(table[: N + 1], lam_start, N)
    return Reduction(lam, g, table[: N + 1], _b_initial(lam, initial, L), N)


@dataclass(frozen=True)
class Depth3Reduction:
    c: float
    d: float
    lam: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    inner: AuxiliaryDecomposition
    f: np.ndarray
    initial: tuple
    horizon: int
    mode: str
    forbidden_hits: int = 0
    seeds: AuxSeeds | None = None
    conditions: dict = field(default_factory=dict)

    @property
    def b1(self) -> float:
        return self.initial[1] - self.lam[1] * self.initial[0]

    @property
    def b2(self) -> float:
        return self.initial[2] - self.lam[2] * self.initial[1]

    def identity_residuals(self) -> float:
        g = np.column_stack([self.g1, self.g2])
        return _reduction_residual(self.f, self.lam, g, self.horizon)

    def to_dict(self, head: int = 20) -> dict:
        return {
            "c": self.c,
            "d": self.d,
            "mode": self.mode,
            "forbidden_hits": self.forbidden_hits,
            "lambda": [float(x) for x in self.lam[1:head + 1]],
            "g1": [None] + [float(x) for x in self.g1[2:head + 1]],
            "g2": [None] + [float(x) for x in self.g2[2:head + 1]],
            "b1": self.b1,
            "b2": self.b2,
            "identity_residual": self.identity_residuals(),
            "inner": self.inner.to_dict(head),
            "conditions": self.conditions,
        }


def _depth3_seeds(table: np.ndarray, N: int) -> AuxSeeds:
    # basis solutions with (v_1, v_2, v_3) = (0,0,1), (0,1,0), (1,0,0)
    return AuxSeeds(
        tuple(_seed_run(table, (0.0, 0.0, 1.0), N + 1)),
        tuple(_seed_run(table, (0.0, 1.0, 0.0), N + 1)),
        tuple(_seed_run(table, (1.0, 0.0, 0.0), N + 1)),
    )


def _admissible_cd(c: float, d: float, seeds: AuxSeeds, initial, N: int) -> bool:
    a1, a2 = initial[0], initial[1]
    if a1 != 0 and abs(d - a2 / a1) < B1_FORBIDDEN_TOL * max(1.0, abs(a2 / a1)):
        return False
    cs, ds = from_real(c), from_real(d)
    for k in range(1, N + 1):
        parts = (mul(seeds.alpha[k - 1], cs), mul(seeds.beta[k - 1], ds), seeds.gamma[k - 1])
        if _degenerate(parts):
            return False
    return True


def _tail_ratio(num: np.ndarray, den: np.ndarray, power: int, N: int) -> dict:
    n = np.arange(3, N + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num[n] / den[n] ** power
    start = max(3, int(math.floor(N * (1 - TAIL_FRACTION))))
    tail = np.abs(ratio[start - 3:])
    return {"tail_max": float(np.max(tail)), "at_end": float(ratio[-1]),
            "tail_nonincreasing": bool(np.all(np.diff(tail) <= 0))}


def reduce_depth3(f1, f2, f3, initial: Sequence[float], N: int, *, cd: tuple | None = None,
                  mode: str | None = None, inner_mode: str | None = None, inner_c: float | None = None,
                  trial_seed: int = 0) -> Depth3Reduction:
    """Reduce a_{n+1} = f1(n) a_n + f2(n) a_{n-1} + f3(n) a_{n-2} to a depth-2 b-recurrence.

    lambda(n) = (alpha_n c + beta_n d + gamma_n)/(alpha_{n-1} c + beta_{n-1} d + gamma_{n-1}),
    i.e. lambda(1) = d and lambda(2) = c/d; g_1, g_2 follow inductively and the
    b-recurrence b_{m+1} = g1(m) b_m + g2(m) b_{m-1} is decomposed with
    :func:`build_lambda_mu`.
    """
    initial = tuple(float(x) for x in initial)
    if len(initial) != 3:
        raise ValueError("depth 3 needs three initial values")
    if N < 4:
        raise DecompositionError("horizon must be at least 4")
    if mode is None:
        mode = HINT if cd is not None else SCAN
    # the inner minimal construction looks ahead, so the outer level runs further
    H = N + 2 * N + 256 if (mode == MINIMAL or inner_mode == MINIMAL) else N
    table = coefficient_table((f1, f2, f3), H + 1, trial_seed)
    if np.any(table[3:H + 1, 2] == 0):
        raise DecompositionError("f3 vanishes inside the horizon")

    hits = 0
    seeds = None
    if mode == MINIMAL:
        lam, _, _ = minimal_lambdas(lambda M: coefficient_table((f1, f2, f3), M, trial_seed), 3, H)
        d = float(lam[1])
        c = float(lam[2] * lam[1])
        candidates = [(c, d)]
    else:
        seeds = _depth3_seeds(table, N)
        if mode == HINT:
            candidates = [tuple(cd)]
        else:
            base = candidate_constants(16)
            candidates = sorted(((c, d) for c in base for d in base),
                                key=lambda cd_: (base.index(cd_[0]) + base.index(cd_[1]), base.index(cd_[1])))
            candidates = candidates[:N_CANDIDATES]
            candidates += [(c + PERTURBATION, d + PERTURBATION) for c, d in candidates]

    last_error = None
    for c, d in candidates:
        if mode != MINIMAL and not _admissible_cd(c, d, seeds, initial, N):
            hits += 1
            continue
        try:
            if mode == MINIMAL:
                red = Reduction(lam[: H + 1], _forward_g(table, lam, H), table[: H + 1],
                                _b_initial(lam, initial, 3), H)
            else:
                red = reduce_once(table, initial, H, [d, c / d])
            if red.identity_residuals() > IDENTITY_TOL:
                raise DecompositionError(f"identity residual {red.identity_residuals():.3g}")
            b1, b2 = red.b_initial
            g1 = np.array(red.g[:, 0])
            g2 = np.array(red.g[:, 1])
            g1[:2] = np.nan
            g2[:2] = np.nan
            im = inner_mode if inner_mode is not None else (MINIMAL if mode == MINIMAL else SCAN)
            inner = build_lambda_mu(g1[:H], g2[:H], b1, b2, N - 2, inner_c,
                                    mode=HINT if inner_c is not None else im)
        except DecompositionError as exc:
            if mode != SCAN:
                raise
            hits += 1
            last_error = exc
            continue
        conditions = {
            "f2_over_f1_sq": _tail_ratio(table[:, 1], table[:, 0], 2, N),
            "f3_over_f1_cubed": _tail_ratio(table[:, 2], table[:, 0], 3, N),
        }
        return Depth3Reduction(
            c=float(c), d=float(d), lam=red.lam[: N + 1], g1=g1[: N + 1], g2=g2[: N + 1], inner=inner,
            f=table[: N + 1],
            initial=initial, horizon=N, mode=mode, forbidden_hits=hits, seeds=seeds, conditions=conditions,
        )
    raise DecompositionError(f"no admissible (c, d) found; last failure: {last_error}")


def _forward_g(table: np.ndarray, lam: np.ndarray, N: int) -> np.ndarray:
    """g_1, g_2 from a given lambda through the first two identities."""
    g = np.full((N + 1, 2), np.nan)
    for n in range(3, N + 1):
        g[n - 1, 0] = table[n, 0] - lam[n]
        g[n - 1, 1] = table[n, 1] + g[n - 1, 0] * lam[n - 1]
    return g


def b_sequence_depth3(red: Depth3Reduction, n_max: int) -> list:
    """b_1..b_{n_max} of the reduced recurrence, b_1, b_2 direct and the rest from the inner closed form."""
    out = [_sci(red.b1), _sci(red.b2)]
    if n_max > 2:
        out.extend(closed_form_prefix(red.inner, n_max - 1))
    return out[:n_max]


def closed_form_depth3(red: Depth3Reduction, n: int) -> SciNum:
    """a_{n+1} = a_2 prod_{i=2}^{n} lambda(i) + sum_{k=2}^{n} b_k prod_{i=k+1}^{n} lambda(i)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    b = b_sequence_depth3(red, n)
    acc = _sci(red.initial[1])
    for k in range(2, n + 1):
        acc = add(mul(_sci(red.lam[k]), acc), b[k - 1])
    return acc


# Index convention for the main-term form of the depth-3 closed form: the inner
# product for the k-th summand runs over j = 2..k-1 (see tests/test_acceptance.py).
DEPTH3_MU2_UPPER_OFFSET = -1


def main_term_form_depth3(red: Depth3Reduction, n: int, upper_offset: int = DEPTH3_MU2_UPPER_OFFSET,
                          prefactor: str = "inner") -> SciNum:
    """b-sequence replaced by its main term: B sum_k prod_{i>k} lambda(i) prod_{j=2}^{k+offset} mu_2(j) + a_2 prod lambda.

    ``prefactor="inner"`` uses B = b_2 - mu_1(1) b_1 (the reduced recurrence's own b_1);
    ``"outer"`` uses b_1 = a_2 - lambda(1) a_1.
    """
    inner = red.inner
    B = _sci(inner.b1 if prefactor == "inner" else red.b1)
    S = ZERO
    for k in range(2, n + 1):
        prod_mu = ONE
        for j in range(2, k + upper_offset + 1):
            prod_mu = mul(prod_mu, _sci(inner.mu[j]))
        term = prod_mu
        for i in range(k + 1, n + 1):
            term = mul(term, _sci(red.lam[i]))
        S = add(S, term)
    P = ONE
    for i in range(2, n + 1):
        P = mul(P, _sci(red.lam[i]))
    return add(mul(B, S), mul(_sci(red.initial[1]), P))


def reduce_chain(coeffs: Sequence, initial: Sequence[float], N: int, lam_starts: Sequence[Sequence[float]],
                 c_final: float | None = None, trial_seed: int = 0):
    """Depth L > 2 reduced level by level with explicitly supplied starting lambdas.

    ``lam_starts[k]`` holds the L-k-1 free lambdas for level k.  Returns the
    list of reductions and the final depth-2 decomposition.
    """
    L = len(coeffs)
    if len(lam_starts) != L - 2:
        raise ValueError(f"depth {L} needs {L - 2} levels of starting lambdas")
    table = coefficient_table(coeffs, N + 1, trial_seed)
    vals = [float(x) for x in initial]
    levels = []
    horizon = N
    for k, starts in enumerate(lam_starts):
        red = reduce_once(table, vals, horizon, starts)
        if red.identity_residuals() > IDENTITY_TOL:
            raise DecompositionError(f"level {k}: identity residual {red.identity_residuals():.3g}")
        levels.append(red)
        depth = table.shape[1] - 1
        nxt = np.full((horizon, depth), np.nan)
        nxt[:horizon] = red.g[:horizon]
        table = nxt
        vals = list(red.b_initial)
        horizon -= 1
    f, g = table[:, 0], table[:, 1]
    last = build_lambda_mu(f, g, vals[0], vals[1], horizon - 1, c_final)
    return levels, last
