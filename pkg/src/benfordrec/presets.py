"""Named, ready-to-run configurations for the worked examples.

A preset holds either a recurrence (linear or multiplicative) or a
main-term product generator r(n) = b_1 prod_{i=1}^{n} mu(i).  Irrational
constants are binary64 literals (sqrt(2) = 1.4142135623730951); such a
constant is technically rational, but its nearest small-denominator
rationals are far too coarse to matter at desk-scale N.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from . import coeffexpr as cx
from .decompose import MINIMAL, SCAN, product_sequence
from .recurrence import LINEAR, MULTIPLICATIVE, RecurrenceSpec, SequenceSample, iterate

SQRT2 = "1.4142135623730951"

BENFORD = "benford"
NOT_BENFORD = "not_benford"

# expected-verdict tag -> empirical analysis verdict
ANALYSIS_VERDICT = {BENFORD: "consistent", NOT_BENFORD: "inconsistent"}

DEFAULT_HORIZON = 1000


@dataclass(frozen=True)
class ProductGenerator:
    """r(n) = b_1 prod_{i=1}^{n} mu(i); with ``log_mu`` the expression is ln mu(i)."""

    mu: str
    b1: float = 1.0
    log_mu: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mu", cx.to_text(cx.as_expr(self.mu)))

    @property
    def is_random(self) -> bool:
        return cx.has_random(cx.parse(self.mu))

    def sample(self, N: int, trial_seed: int = 0) -> SequenceSample:
        return product_sequence(self.mu, N, self.b1, trial_seed, self.log_mu)

    def to_dict(self) -> dict:
        return {"kind": "product", "mu": self.mu, "b1": self.b1, "log_mu": self.log_mu}

    @classmethod
    def from_dict(cls, d: dict) -> "ProductGenerator":
        return cls(d["mu"], float(d.get("b1", 1.0)), bool(d.get("log_mu", False)))


@dataclass(frozen=True)
class Preset:
    name: str
    spec: RecurrenceSpec | ProductGenerator
    expected: str | None = None
    description: str = ""
    max_horizon: int | None = None
    decompose_mode: str | None = None

    @property
    def is_product(self) -> bool:
        return isinstance(self.spec, ProductGenerator)

    @property
    def is_random(self) -> bool:
        return self.spec.is_random

    def horizon(self, N: int) -> int:
        return N if self.max_horizon is None else min(N, self.max_horizon)

    def recurrence(self, N: int, trial_seed: int = 0) -> RecurrenceSpec:
        if self.is_product:
            raise TypeError(f"preset {self.name!r} is a product generator, not a recurrence")
        return self.spec.replace(horizon=self.horizon(N), trial_seed=trial_seed)

    def sample(self, N: int, trial_seed: int = 0) -> SequenceSample:
        if self.is_product:
            return self.spec.sample(self.horizon(N), trial_seed)
        return iterate(self.recurrence(N, trial_seed))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "spec": self.spec.to_dict(),
            "expected": self.expected,
            "description": self.description,
            "max_horizon": self.max_horizon,
            "decompose_mode": self.decompose_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Preset":
        sd = d["spec"]
        spec = ProductGenerator.from_dict(sd) if sd.get("kind") == "product" else RecurrenceSpec.from_dict(sd)
        return cls(d["name"], spec, d.get("expected"), d.get("description", ""),
                   d.get("max_horizon"), d.get("decompose_mode"))

    def spec_hash(self) -> str:
        blob = json.dumps(self.spec.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _lin(coeffs, initial, horizon=DEFAULT_HORIZON):
    return RecurrenceSpec(LINEAR, tuple(coeffs), tuple(initial), horizon)


_PRESETS = (
    Preset("fibonacci", _lin(("1", "1"), (1, 1)), BENFORD,
           "a_{n+1} = a_n + a_{n-1}, a_1 = a_2 = 1", decompose_mode=SCAN),
    Preset("power100", _lin(("100",), (1,)), NOT_BENFORD,
           "a_{n+1} = 100 a_n: every term is a power of 100"),
    Preset("two_step", _lin(("2",), (1,)), BENFORD, "a_{n+1} = 2 a_n, the powers of two"),
    Preset("complex_rotation", _lin(("0", "-4"), (1, 2)), None,
           "a_{n+1} = -4 a_{n-1}: characteristic roots +-2i, so the root test is inconclusive"),
    Preset("linear_n", _lin(("n", "1"), (1, 1)), BENFORD,
           "a_{n+1} = n a_n + a_{n-1}; g/f^2 = 1/n^2 -> 0", decompose_mode=MINIMAL),
    Preset("factorial_rec", _lin(("n + 1/(n + 1)", "-1"), (1, 1)), BENFORD,
           "recessive lambda(n) = 1/(n+1) and mu(n) = n exactly, so the main term is b_1 n!/1",
           decompose_mode=MINIMAL),
    Preset("depth3_smooth", _lin(("n", "1", "1"), (1, 1, 1)), BENFORD,
           "a_{n+1} = n a_n + a_{n-1} + a_{n-2}", decompose_mode=SCAN),
    Preset("depth3_separated",
           _lin(("1/(n + 1) + n - 0.5", "-(n - 0.5)/n - (n - 1)/2", "0.5"), (1, 2, 3)), BENFORD,
           "built from lambda(n) = 1/(n+1), mu_1 = 1/2, mu_2(n) = n: well separated growth rates",
           decompose_mode=MINIMAL),
    Preset("mult_fib", RecurrenceSpec(MULTIPLICATIVE, ("1", "1"), (2, 3), 50), BENFORD,
           "A_{n+1} = A_n A_{n-1}, A_1 = 2, A_2 = 3; log10 A_n grows like phi^n, so the horizon "
           "stops where the fractional part of log10 A_n is still good to about 1e-6",
           max_horizon=51),
    Preset("factorial", ProductGenerator("n"), BENFORD, "mu(k) = a k with a = 1: r(n) = n!"),
    Preset("factorial_pow", ProductGenerator(f"pow(n, {SQRT2})"), BENFORD,
           "mu(k) = k^alpha, r(n) = (n!)^alpha with alpha = sqrt(2)"),
    Preset("exp_poly", ProductGenerator(f"{SQRT2} * n^2", log_mu=True), BENFORD,
           "mu(k) = exp(alpha h(k)), h(k) = k^2, alpha = sqrt(2); generated in log space"),
    Preset("uniform_chain", ProductGenerator("uniform(0, 1)"), BENFORD,
           "mu(n) = h(n) U_n with h = 1 and U_n uniform on [0, 1]"),
    Preset("uniform_factorial_chain", ProductGenerator("n * uniform(0, 1)"), BENFORD,
           "mu(n) = n U_n"),
)

_BY_NAME = {p.name: p for p in _PRESETS}


def list_presets() -> list:
    return list(_PRESETS)


def preset_names() -> list:
    return [p.name for p in _PRESETS]


def get_preset(name: str) -> Preset:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(_BY_NAME)}") from None
