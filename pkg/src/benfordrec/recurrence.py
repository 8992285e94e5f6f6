"""Sequence generation for linear and multiplicative recurrences of fixed depth.

Linear:          a_{n+1} = f_1(n) a_n + f_2(n) a_{n-1} + ... + f_L(n) a_{n-L+1}
Multiplicative:  A_{n+1} = A_n^{f_1(n)} A_{n-1}^{f_2(n)} ... A_{n-L+1}^{f_L(n)}

Indices are 1-based throughout: ``values[0]`` is a_1 and the first generated
term is a_{L+1}, produced at step n = L.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import coeffexpr as cx
from .scinum import (
    SciNum,
    ZERO,
    add,
    from_log10,
    from_real,
    from_string,
    log10_frac,
    mul,
    to_string,
)

LINEAR = "linear"
MULTIPLICATIVE = "multiplicative"
KINDS = (LINEAR, MULTIPLICATIVE)

CANCELLATION_REL = 1e-12


class RecurrenceError(ValueError):
    pass


@dataclass(frozen=True)
class RecurrenceSpec:
    kind: str
    coeffs: tuple
    initial: tuple
    horizon: int
    trial_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RecurrenceError(f"unknown recurrence kind {self.kind!r}")
        object.__setattr__(self, "coeffs", tuple(cx.as_expr(c) for c in self.coeffs))
        object.__setattr__(
            self, "initial", tuple(v if isinstance(v, SciNum) else from_real(v) for v in self.initial)
        )
        if len(self.coeffs) == 0:
            raise RecurrenceError("depth must be at least 1")
        if len(self.coeffs) != len(self.initial):
            raise RecurrenceError(
                f"depth mismatch: {len(self.coeffs)} coefficients, {len(self.initial)} initial values"
            )
        if self.horizon < 1:
            raise RecurrenceError("horizon must be positive")
        if not (0 <= self.trial_seed < 2**64):
            raise RecurrenceError("trial_seed must fit in 64 unsigned bits")
        if self.kind == MULTIPLICATIVE and any(v.sign != 1 for v in self.initial):
            raise RecurrenceError("multiplicative recurrences need strictly positive initial values")

    @property
    def depth(self) -> int:
        return len(self.coeffs)

    @property
    def is_random(self) -> bool:
        return any(cx.has_random(c) for c in self.coeffs)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "depth": self.depth,
            "coeffs": [cx.to_text(c) for c in self.coeffs],
            "initial": [to_string(v) for v in self.initial],
            "horizon": self.horizon,
            "trial_seed": self.trial_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RecurrenceSpec":
        initial = [from_string(v) if isinstance(v, str) else v for v in d["initial"]]
        spec = cls(
            kind=d.get("kind", LINEAR),
            coeffs=tuple(cx.parse(c) if isinstance(c, str) else c for c in d["coeffs"]),
            initial=tuple(initial),
            horizon=int(d["horizon"]),
            trial_seed=int(d.get("trial_seed", 0)),
        )
        if "depth" in d and int(d["depth"]) != spec.depth:
            raise RecurrenceError(f"declared depth {d['depth']} but {spec.depth} coefficients given")
        return spec

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **changes) -> "RecurrenceSpec":
        d = dict(kind=self.kind, coeffs=self.coeffs, initial=self.initial,
                 horizon=self.horizon, trial_seed=self.trial_seed)
        d.update(changes)
        return RecurrenceSpec(**d)


@dataclass(frozen=True)
class SequenceSample:
    values: tuple
    log10_frac: tuple
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    def nonzero_fracs(self) -> list:
        return [y for v, y in zip(self.values, self.log10_frac) if v.sign != 0]


def realize_coefficients(coeffs: Sequence, n_max: int, trial_seed: int = 0, n_min: int = 1) -> np.ndarray:
    """Table ``t[n, i] = f_{i+1}(n)`` for ``n_min <= n <= n_max`` (rows below n_min are nan).

    Coefficient slot i draws from its own counter range, so the same
    (seed, n) always yields the same realization no matter who asks.
    """
    exprs = [cx.as_expr(c) for c in coeffs]
    table = np.full((n_max + 1, len(exprs)), np.nan)
    for i, e in enumerate(exprs):
        if cx.is_constant(e):
            table[n_min:, i] = cx.eval_at(e, 1, trial_seed, i)
            continue
        for n in range(n_min, n_max + 1):
            try:
                table[n, i] = cx.eval_at(e, n, trial_seed, i)
            except cx.ExprDomainError as exc:
                raise cx.ExprDomainError(f"coefficient f_{i + 1} at n={n}: {exc}") from None
    return table


def _metadata(spec: RecurrenceSpec, table: np.ndarray | None, **extra) -> dict:
    meta = {
        "spec_hash": spec.spec_hash(),
        "seed": spec.trial_seed,
        "generator": cx.GENERATOR_ID,
        "kind": spec.kind,
    }
    if table is not None and spec.is_random:
        meta["realized_coefficients"] = [
            [n] + [float(x) for x in table[n]] for n in range(spec.depth, spec.horizon)
        ]
    meta.update(extra)
    return meta


def make_sample(values: list, meta: dict) -> SequenceSample:
    fracs = tuple(log10_frac(v) if v.sign != 0 else math.nan for v in values)
    return SequenceSample(tuple(values), fracs, meta)


def iterate_linear(spec: RecurrenceSpec) -> SequenceSample:
    if spec.kind != LINEAR:
        raise RecurrenceError("iterate_linear needs a linear spec")
    L, N = spec.depth, spec.horizon
    values = list(spec.initial[:N])
    table = realize_coefficients(spec.coeffs, max(N - 1, L), spec.trial_seed, n_min=L) if N > L else None
    lost = 0
    zeros = [i + 1 for i, v in enumerate(values) if v.sign == 0]
    const = all(cx.is_constant(c) for c in spec.coeffs)
    sci_coeffs = [from_real(float(table[L, i])) for i in range(L)] if (const and table is not None) else None
    for n in range(L, N):
        coeffs = sci_coeffs if sci_coeffs is not None else [from_real(float(x)) for x in table[n]]
        total = ZERO
        biggest = -math.inf
        mixed = set()
        for i in range(L):
            term = mul(coeffs[i], values[n - 1 - i])
            if term.sign != 0:
                mixed.add(term.sign)
                biggest = max(biggest, term.log10_abs())
            total = add(total, term)
        if len(mixed) > 1 and (
            total.sign == 0 or total.log10_abs() - biggest < math.log10(CANCELLATION_REL)
        ):
            lost += 1
        if total.sign == 0:
            zeros.append(n + 1)
        values.append(total)
    meta = _metadata(spec, table, precision_loss_count=lost, zero_indices=zeros)
    return make_sample(values, meta)


def _log10_initial(spec: RecurrenceSpec) -> list:
    return [v.log10_abs() for v in spec.initial]


def iterate_multiplicative(spec: RecurrenceSpec) -> SequenceSample:
    """Runs in log10 space: log10 A_{n+1} = sum_i f_i(n) log10 A_{n-i+1}."""
    if spec.kind != MULTIPLICATIVE:
        raise RecurrenceError("iterate_multiplicative needs a multiplicative spec")
    L, N = spec.depth, spec.horizon
    logs = _log10_initial(spec)[:N]
    table = realize_coefficients(spec.coeffs, max(N - 1, L), spec.trial_seed, n_min=L) if N > L else None
    for n in range(L, N):
        row = table[n]
        x = math.fsum(float(row[i]) * logs[n - 1 - i] for i in range(L))
        if not math.isfinite(x):
            raise OverflowError(f"log10 A_{n + 1} overflowed at step n={n}")
        logs.append(x)
    values = []
    for k, x in enumerate(logs):
        try:
            values.append(from_log10(x))
        except OverflowError:
            raise OverflowError(f"A_{k + 1} exceeds the 64-bit decimal exponent range") from None
    meta = _metadata(spec, table, precision_loss_count=0, zero_indices=[])
    return make_sample(values, meta)


def iterate(spec: RecurrenceSpec) -> SequenceSample:
    return iterate_linear(spec) if spec.kind == LINEAR else iterate_multiplicative(spec)


def log10_sequence(spec: RecurrenceSpec) -> list:
    """log10 A_n for a multiplicative spec (no materialization, so no exponent cap)."""
    L, N = spec.depth, spec.horizon
    logs = _log10_initial(spec)[:N]
    table = realize_coefficients(spec.coeffs, max(N - 1, L), spec.trial_seed, n_min=L) if N > L else None
    for n in range(L, N):
        logs.append(math.fsum(float(table[n][i]) * logs[n - 1 - i] for i in range(L)))
    return logs


def exponent_sequences(spec: RecurrenceSpec) -> tuple[list, list]:
    """Exponents with A_n = A_2^{x_n} A_1^{y_n}; x_1=0, x_2=1, y_1=1, y_2=0."""
    if spec.kind != MULTIPLICATIVE or spec.depth != 2:
        raise RecurrenceError("exponent_sequences needs a depth-2 multiplicative spec")
    N = spec.horizon
    x, y = [0.0, 1.0], [1.0, 0.0]
    table = realize_coefficients(spec.coeffs, max(N - 1, 2), spec.trial_seed, n_min=2)
    for n in range(2, N):
        f, g = float(table[n][0]), float(table[n][1])
        xn = f * x[n - 1] + g * x[n - 2]
        yn = f * y[n - 1] + g * y[n - 2]
        if not (math.isfinite(xn) and math.isfinite(yn)):
            raise OverflowError(f"exponent sequence overflowed at step n={n}")
        x.append(xn)
        y.append(yn)
    return x[:N], y[:N]


# --- export ----------------------------------------------------------------

CSV_COLUMNS = ("n", "sign", "mantissa", "exponent", "log10_frac")


def to_csv(sample: SequenceSample) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for n, (v, y) in enumerate(zip(sample.values, sample.log10_frac), start=1):
        w.writerow([n, v.sign, repr(v.mantissa), v.exponent, "" if v.sign == 0 else repr(y)])
    return buf.getvalue()


def from_csv(text: str) -> SequenceSample:
    body = "".join(line for line in io.StringIO(text) if not line.startswith("#"))
    rows = list(csv.DictReader(io.StringIO(body)))
    if not rows or set(CSV_COLUMNS) - set(rows[0]):
        raise RecurrenceError(f"sequence CSV must have columns {', '.join(CSV_COLUMNS)}")
    values = [SciNum(int(r["sign"]), float(r["mantissa"]), int(r["exponent"])) for r in rows]
    return make_sample(values, {"source": "csv"})


def sample_to_dict(sample: SequenceSample) -> dict:
    return {
        "values": [to_string(v) for v in sample.values],
        "log10_frac": [None if math.isnan(y) else y for y in sample.log10_frac],
        "metadata": sample.metadata,
    }


def sample_from_dict(d: dict) -> SequenceSample:
    values = [from_string(s) for s in d["values"]]
    return make_sample(values, dict(d.get("metadata", {})))
