"""Constant-coefficient recurrences: characteristic roots, generalized Binet form, Benford prediction.

For a_{n+1} = c_1 a_n + ... + c_L a_{n+1-L} the characteristic polynomial is
r^L - c_1 r^{L-1} - ... - c_L, and every solution has the form

    a_n = sum_k (gamma_{k,1} n^{m_k-1} + ... + gamma_{k,m_k}) r_k^n.

The Benford prediction is a numerical reading of the classical criterion: a
unique dominant root r_1 of multiplicity one, |r_1| != 1, a nonzero
coefficient on r_1^n, and log10|r_1| irrational. Irrationality cannot be
decided in floating point; it is approximated by a continued-fraction scan
(see :func:`rationality_report`), which is a heuristic and not a proof.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .scinum import SciNum, ZERO, from_real

MAX_DEGREE = 10
CLUSTER_RADIUS = 1e-8
MODULUS_GAP = 1e-8
GAMMA_FLOOR = 1e-10
MAX_CONDITION = 1e12
# Every irrational x has convergents with |x - p/q| < 1/q^2, so the denominator
# cap must keep q^2 * tol small or generic irrationals get reported as rational.
RATIONAL_MAX_DEN = 10**4
RATIONAL_TOL = 1e-12
IMAG_RESIDUE = 1e-6

# Candidate clusters are formed at this radius, then validated at CLUSTER_RADIUS.
_CANDIDATE_RADIUS = 1e-3
_EPS = np.finfo(float).eps

BENFORD = "benford"
NOT_BENFORD = "not_benford"
INCONCLUSIVE = "inconclusive"


class UnsupportedDegreeError(ValueError):
    pass


class IllConditionedError(ArithmeticError):
    pass


class ComplexResidueWarning(UserWarning):
    """A real sequence reconstructed with a non-negligible imaginary part."""


@dataclass(frozen=True)
class CharPoly:
    coefficients: tuple  # c_1 .. c_L

    def __post_init__(self):
        cs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", cs)
        if not cs:
            raise ValueError("empty characteristic polynomial")
        if cs[-1] == 0:
            raise ValueError("c_L must be nonzero (depth is not genuine)")

    @property
    def degree(self) -> int:
        return len(self.coefficients)

    def monic(self) -> np.ndarray:
        """Coefficients highest power first: [1, -c_1, ..., -c_L]."""
        return np.array([1.0] + [-c for c in self.coefficients])


def _taylor(coeffs: np.ndarray, x: complex) -> np.ndarray:
    """Taylor coefficients p^{(j)}(x)/j!, j = 0..deg, by repeated synthetic division."""
    work = np.array(coeffs, dtype=complex)
    deg = len(work) - 1
    out = np.empty(deg + 1, dtype=complex)
    for j in range(deg + 1):
        acc = 0j
        quotient = []
        for a in work[: len(work)]:
            acc = acc * x + a
            quotient.append(acc)
        out[j] = quotient[-1]
        work = np.array(quotient[:-1], dtype=complex)
        if len(work) == 0:
            out[j + 1:] = 0
            break
    return out


def _taylor_noise(coeffs: np.ndarray, x: complex) -> np.ndarray:
    """Rounding-error scale for each Taylor coefficient evaluated at x."""
    a = np.abs(coeffs[::-1])  # a[k] multiplies x^k
    deg = len(a) - 1
    ax = abs(x)
    return np.array([
        sum(a[k] * comb(k, j) * ax ** (k - j) for k in range(j, deg + 1)) for j in range(deg + 1)
    ]) * 8 * deg * _EPS


def _newton(coeffs: np.ndarray, x: complex, order: int = 0, steps: int = 8) -> complex:
    """Newton on the ``order``-th derivative (simple root there for an (order+1)-fold root)."""
    poly = np.poly1d(coeffs)
    for _ in range(order):
        poly = poly.deriv()
    dpoly = poly.deriv()
    best, best_res = x, abs(poly(x))
    for _ in range(steps):
        d = dpoly(x)
        if d == 0:
            break
        x = x - poly(x) / d
        res = abs(poly(x))
        if res < best_res:
            best, best_res = x, res
        if res == 0:
            break
    return best


def _validate_cluster(coeffs: np.ndarray, center: complex, m: int, delta: float) -> bool:
    t = _taylor(coeffs, center)
    noise = _taylor_noise(coeffs, center)
    lead = abs(t[m])
    for j in range(m):
        if abs(t[j]) > comb(m, j) * delta ** (m - j) * lead + noise[j]:
            return False
    return True


def _clean(z: complex) -> complex:
    scale = max(1.0, abs(z))
    if abs(z.imag) <= 64 * _EPS * scale:
        return complex(z.real, 0.0)
    return z


def char_roots(p: CharPoly) -> list[tuple[complex, int]]:
    """All roots with multiplicity, largest modulus first."""
    if p.degree > MAX_DEGREE:
        raise UnsupportedDegreeError(f"degree {p.degree} exceeds the supported maximum {MAX_DEGREE}")
    coeffs = p.monic()
    raw = [complex(z) for z in np.roots(coeffs)]
    # union-find style grouping at the candidate radius
    groups: list[list[complex]] = []
    for z in raw:
        for g in groups:
            c = sum(g) / len(g)
            if abs(z - c) <= _CANDIDATE_RADIUS * max(1.0, abs(c)):
                g.append(z)
                break
        else:
            groups.append([z])

    out: list[tuple[complex, int]] = []
    for g in groups:
        m = len(g)
        if m > 1:
            center = _newton(coeffs, sum(g) / m, order=m - 1)
            if _validate_cluster(coeffs, center, m, CLUSTER_RADIUS * max(1.0, abs(center))):
                out.append((_clean(center), m))
                continue
        out.extend((_clean(_newton(coeffs, z)), 1) for z in g)
    _pair_conjugates(out)
    out.sort(key=lambda rm: (-abs(rm[0]), -rm[0].real, -rm[0].imag))
    return out


def _pair_conjugates(roots: list) -> None:
    """Make complex roots exact conjugate pairs (the polynomial is real)."""
    used = set()
    for i, (z, m) in enumerate(roots):
        if i in used or z.imag == 0:
            continue
        best, best_d = None, math.inf
        for j, (w, mw) in enumerate(roots):
            if j != i and j not in used and mw == m and w.imag != 0:
                d = abs(w - z.conjugate())
                if d < best_d:
                    best, best_d = j, d
        if best is not None and best_d <= 1e-6 * max(1.0, abs(z)):
            avg = (z + roots[best][0].conjugate()) / 2
            roots[i] = (avg, m)
            roots[best] = (avg.conjugate(), m)
            used.update((i, best))


def poly_from_roots(roots: list[tuple[complex, int]]) -> np.ndarray:
    flat = [z for z, m in roots for _ in range(m)]
    return np.real_if_close(np.poly(flat), tol=1e6)


@dataclass(frozen=True)
class BinetSolution:
    roots: tuple  # ((root, multiplicity), ...)
    gammas: tuple  # per root: (gamma_{k,1}, ..., gamma_{k,m_k}), highest power of n first
    dominant_index: int | None

    @property
    def depth(self) -> int:
        return sum(m for _, m in self.roots)


def _basis(roots, n: int) -> list[complex]:
    row = []
    for r, m in roots:
        rn = r**n
        row.extend(n ** (m - j) * rn for j in range(1, m + 1))
    return row


def _dominant_index(roots) -> int | None:
    if not roots:
        return None
    mods = [abs(r) for r, _ in roots]
    top = max(range(len(roots)), key=lambda i: mods[i])
    tol = MODULUS_GAP * max(1.0, mods[top])
    if any(i != top and mods[top] - mods[i] <= tol for i in range(len(roots))):
        return None
    if roots[top][1] != 1:
        return None
    return top


def binet_coeffs(roots, initial) -> BinetSolution:
    """Solve the (confluent) Vandermonde system matching a_1..a_L."""
    roots = tuple((complex(r), int(m)) for r, m in roots)
    a = np.array([float(v) if isinstance(v, SciNum) else float(v) for v in initial], dtype=complex)
    L = sum(m for _, m in roots)
    if len(a) != L:
        raise ValueError(f"need {L} initial values, got {len(a)}")
    if not np.all(np.isfinite(a)):
        raise ValueError("initial values must be finite reals")
    V = np.array([_basis(roots, n) for n in range(1, L + 1)], dtype=complex)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(f"Vandermonde condition estimate {cond:.3g} exceeds {MAX_CONDITION:g}")
    g = np.linalg.solve(V, a)
    gammas, k = [], 0
    for _, m in roots:
        gammas.append(tuple(complex(x) for x in g[k:k + m]))
        k += m
    return BinetSolution(roots, tuple(gammas), _dominant_index(roots))


def solve(coefficients, initial) -> BinetSolution:
    return binet_coeffs(char_roots(CharPoly(tuple(coefficients))), initial)


def reconstruct(sol: BinetSolution, n: int) -> SciNum:
    """Evaluate the closed form at n in log space, so |r|^n may exceed binary64 range."""
    if n < 1:
        raise ValueError("n must be >= 1")
    terms = []  # (log10 magnitude, phase)
    for (r, m), gs in zip(sol.roots, sol.gammas):
        real_root = r.imag == 0.0
        lr = math.log10(abs(r))
        for j, g in enumerate(gs, start=1):
            if g == 0:
                continue
            mag = math.log10(abs(g)) + (m - j) * math.log10(n) + n * lr
            if real_root:
                phase = cmath.phase(g) + (math.pi if (r.real < 0 and n % 2) else 0.0)
            else:
                phase = cmath.phase(g) + n * cmath.phase(r)
            terms.append((mag, phase))
    if not terms:
        return ZERO
    top = max(t[0] for t in terms)
    s = sum(10.0 ** (mag - top) * cmath.exp(1j * ph) for mag, ph in terms)
    if s.real == 0.0 or abs(s.imag) > IMAG_RESIDUE * abs(s.real):
        warnings.warn(
            f"imaginary residue |Im|/|Re| = {abs(s.imag) / max(abs(s.real), 1e-300):.3g} at n={n}",
            ComplexResidueWarning,
            stacklevel=2,
        )
    if s.real == 0.0:
        return ZERO
    k = math.floor(top)
    x = from_real(s.real * 10.0 ** (top - k))
    return SciNum(x.sign, x.mantissa, x.exponent + k)


# --- Benford prediction ------------------------------------------------------

def rationality_report(x: float, max_den: int = RATIONAL_MAX_DEN, tol: float = RATIONAL_TOL) -> dict:
    """Scan continued-fraction convergents of x for a p/q (q <= max_den) within tol."""
    frac = Fraction(x)
    p0, q0, p1, q1 = 0, 1, 1, 0
    rest = frac
    while True:
        a = math.floor(rest)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > max_den:
            break
        if abs(x - p1 / q1) < tol:
            return {"rational": True, "p": p1, "q": q1,
                    "detail": f"log10|r1| = {p1}/{q1} rational" if q1 != 1 else f"log10|r1| = {p1} rational"}
        if rest == a:
            break
        rest = 1 / (rest - a)
    return {"rational": False, "p": None, "q": None,
            "detail": f"no rational with denominator <= {max_den} within {tol:g}; presumed irrational"}


@dataclass(frozen=True)
class BenfordVerdict:
    status: str
    reasons: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"status": self.status, "reasons": [dict(r) for r in self.reasons]}


def predict_benford(sol: BinetSolution) -> BenfordVerdict:
    reasons = []
    mods = [abs(r) for r, _ in sol.roots]
    top = max(range(len(mods)), key=lambda i: mods[i])
    r1, m1 = sol.roots[top]
    tol = MODULUS_GAP * max(1.0, mods[top])
    second = max((mods[i] for i in range(len(mods)) if i != top), default=0.0)

    unique = sol.dominant_index is not None
    reasons.append({
        "check": "distinct_dominant",
        "passed": unique,
        "detail": (f"|r1| = {mods[top]!r}, multiplicity {m1}, next modulus {second!r}"
                   + ("" if unique else " (tie within tolerance or repeated dominant root)")),
    })
    complex_dominant = abs(r1.imag) > tol
    if complex_dominant:
        reasons.append({"check": "real_dominant", "passed": False,
                        "detail": f"dominant root {r1} is complex; criterion not extended to that case"})

    off_unit = abs(mods[top] - 1.0) > MODULUS_GAP
    reasons.append({"check": "modulus_not_one", "passed": off_unit, "detail": f"|r1| - 1 = {mods[top] - 1.0!r}"})

    gamma_ok = None
    if unique:
        g1 = abs(sol.gammas[top][0])
        scale = max(abs(g) for gs in sol.gammas for g in gs)
        gamma_ok = scale > 0 and g1 > GAMMA_FLOOR * scale
        reasons.append({"check": "gamma1_nonzero", "passed": gamma_ok,
                        "detail": f"|gamma_1| = {g1!r} (largest |gamma| = {scale!r})"})
    else:
        reasons.append({"check": "gamma1_nonzero", "passed": None, "detail": "no unique dominant root"})

    rat = rationality_report(math.log10(mods[top])) if mods[top] > 0 else None
    if rat is not None:
        reasons.append({"check": "log10_r1_irrational", "passed": not rat["rational"], "detail": rat["detail"]})

    hypotheses = unique and not complex_dominant and off_unit and gamma_ok
    if not hypotheses or rat is None:
        status = INCONCLUSIVE
    elif rat["rational"]:
        status = NOT_BENFORD
    else:
        status = BENFORD
    return BenfordVerdict(status, tuple(reasons))


def solution_to_dict(sol: BinetSolution) -> dict:
    def c(z):
        return [z.real, z.imag]

    return {
        "roots": [{"value": c(r), "multiplicity": m, "modulus": abs(r)} for r, m in sol.roots],
        "gammas": [[c(g) for g in gs] for gs in sol.gammas],
        "dominant_index": sol.dominant_index,
    }
