import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from benfordrec import decompose as dc
from benfordrec.recurrence import LINEAR, RecurrenceSpec, iterate
from benfordrec.scinum import div


def _iterate(coeffs, init, N):
    return iterate(RecurrenceSpec(LINEAR, tuple(coeffs), tuple(init), N)).values


def test_candidate_order():
    assert dc.candidate_constants(8) == [1.0, 2.0, 3.0, -1.0, 0.5, -0.5, -2.0, 1 / 3]
    cs = dc.candidate_constants()
    assert len(cs) == dc.N_CANDIDATES == len(set(cs))


def test_minimal_mode_recovers_exact_factors():
    # f = n + 1/(n+1), g = -1 has lambda(n) = 1/(n+1), mu(n) = n
    dec = dc.build_lambda_mu("n + 1/(n + 1)", "-1", 1.0, 1.0, 300, mode=dc.MINIMAL)
    n = np.arange(2, 301)
    assert dec.c == pytest.approx(0.5, abs=1e-14)
    assert np.allclose(dec.lam[2:], 1 / (n + 1), rtol=1e-12, atol=0)
    assert np.allclose(dec.mu[2:], n, rtol=1e-12, atol=0)


def test_scan_picks_first_admissible_candidate():
    dec = dc.build_lambda_mu("1", "1", 1.0, 1.0, 200)
    assert dec.mode == dc.SCAN
    # the scan opens with a_2/a_1 + 1, which keeps b_1 = a_2 - c a_1 away from zero
    assert dec.c == 2.0
    assert dec.b1 == pytest.approx(-1.0)
    fres, gres = dc.identity_residuals(dec)
    assert max(fres, gres) < dc.IDENTITY_TOL
    assert dc.build_lambda_mu("1", "1", 1.0, 3.0, 50).c == 4.0


def test_scan_exclusion_and_hint():
    first = dc.build_lambda_mu("n", "1", 1.0, 1.0, 200)
    other = dc.build_lambda_mu("n", "1", 1.0, 1.0, 200, exclude=[first.c])
    assert other.c != first.c
    hint = dc.build_lambda_mu("n", "1", 1.0, 1.0, 200, 0.25)
    assert hint.mode == dc.HINT and hint.c == 0.25


def test_forbidden_hint():
    # alpha_3 c + beta_3 = -1 + 1 = 0 for Fibonacci seeds
    with pytest.raises(dc.DecompositionError, match="forbidden"):
        dc.build_lambda_mu("1", "1", 1.0, 1.0, 40, -1.0)
    with pytest.raises(dc.DecompositionError, match="forbidden"):
        dc.build_lambda_mu("1", "1", 2.0, 3.0, 40, 1.5)


def test_rejects_bad_inputs():
    with pytest.raises(dc.DecompositionError):
        dc.build_lambda_mu("n", "1", 0.0, 0.0, 50)
    with pytest.raises(dc.DecompositionError):
        dc.build_lambda_mu("n", "0", 1.0, 1.0, 50)
    with pytest.raises(dc.DecompositionError):
        dc.build_lambda_mu("n", "1", 1.0, 1.0, 1)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(0.1, 2.0), st.floats(0.1, 2.0), st.sampled_from([-1.0, 1.0]),
       st.integers(1, 9), st.integers(1, 9))
def test_closed_form_reproduces_iteration(a, b, cg, sign, a1, a2):
    f = f"{a!r} * n + {b!r}"
    g = f"{sign * cg!r}"
    N = 60
    dec = dc.build_lambda_mu(f, g, float(a1), float(a2), N)
    seq = _iterate((f, g), (a1, a2), N + 1)
    for n, v in enumerate(dc.closed_form_prefix(dec, N), start=2):
        assert abs(float(div(v, seq[n])) - 1.0) < 1e-9


def test_main_term_definition():
    dec = dc.build_lambda_mu("n + 1/(n + 1)", "-1", 1.0, 1.0, 30, mode=dc.MINIMAL)
    r = dc.main_term_values(dec, 10)
    assert float(r[0]) == pytest.approx(dec.b1)
    for n in range(2, 11):
        assert float(r[n - 1]) == pytest.approx(dec.b1 * math.factorial(n), rel=1e-12)


def test_product_sequence_log_space():
    direct = dc.product_sequence("n", 50)
    logged = dc.product_sequence("log(n)", 50, log_mu=True)
    for x, y in zip(direct.values, logged.values):
        assert x.exponent == y.exponent
        assert x.mantissa == pytest.approx(y.mantissa, rel=1e-12)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=40))
def test_q_recursion_matches_definition(ps):
    N = len(ps) + 1
    p = np.array([np.nan, np.nan] + ps)
    q = dc.q_incremental(p, N)
    for m in range(2, N + 1):
        want = math.fsum(math.prod(abs(p[i]) for i in range(k, m + 1)) for k in range(2, m + 1))
        assert q[m] == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_dominance_report_shapes_and_rows():
    N = 400
    dec = dc.build_lambda_mu("n", "1", 1.0, 1.0, N, mode=dc.MINIMAL)
    seq = iterate(RecurrenceSpec(LINEAR, ("n", "1"), (1, 1), N + 1))
    dom = dc.dominance_check(dec, "n", "1", seq)
    rows = list(dom.rows())
    assert [r[0] for r in rows] == list(range(2, N + 1))
    assert dom.tail_start == int(0.8 * N)
    assert dom.f_nondecreasing
    assert dom.main_term_dominates
    # p(n) ~ 1/n^2 for this recurrence
    assert abs(dom.p[N]) * N**2 == pytest.approx(1.0, rel=0.02)


def test_dominance_fails_when_growth_is_not_separated():
    dec = dc.build_lambda_mu("1", "1", 1.0, 1.0, 300)
    assert not dc.dominance_check(dec, "1", "1").main_term_dominates


def test_to_dict_head():
    d = dc.build_lambda_mu("n", "1", 1.0, 1.0, 100).to_dict(head=5)
    assert len(d["lambda"]) == 5 and d["mu"][0] is None and len(d["mu"]) == 5


def test_depth3_identities_and_closed_form():
    coeffs = ("n", "1", "1")
    red = dc.reduce_depth3(*coeffs, [1.0, 1.0, 1.0], 200)
    assert red.identity_residuals() < dc.IDENTITY_TOL
    seq = _iterate(coeffs, (1, 1, 1), 41)
    for n in range(2, 41):
        assert float(div(dc.closed_form_depth3(red, n), seq[n])) == pytest.approx(1.0, rel=1e-9)


def test_depth3_separated_main_term_converges():
    coeffs = ("1/(n + 1) + n - 0.5", "-(n - 0.5)/n - (n - 1)/2", "0.5")
    red = dc.reduce_depth3(*coeffs, [1.0, 2.0, 3.0], 200, mode=dc.MINIMAL)
    assert red.lam[10] == pytest.approx(1 / 11, rel=1e-8)
    seq = _iterate(coeffs, (1, 2, 3), 121)
    errs = [abs(float(div(dc.main_term_form_depth3(red, n), seq[n])) - 1) for n in (20, 60, 120)]
    assert errs[0] > errs[1] > errs[2]


def test_reduce_chain_depth4():
    coeffs = ("n", "1", "0.5", "0.25")
    init = [1.0, 1.0, 1.0, 1.0]
    levels, last = dc.reduce_chain(coeffs, init, 80, [[0.5, 0.25, 0.1], [0.3, 0.2]])
    assert len(levels) == 2
    assert all(r.identity_residuals() < dc.IDENTITY_TOL for r in levels)
    assert max(dc.identity_residuals(last)) < dc.IDENTITY_TOL
    with pytest.raises(ValueError):
        dc.reduce_chain(coeffs, init, 80, [[0.5, 0.25, 0.1]])


def test_first_step_by_hand():
    dec = dc.build_lambda_mu("n^2", "n + 3", 2.0, 5.0, 20)
    a3 = dec.b1 * dec.mu[2] + dec.a2 * dec.lam[2]
    assert a3 == pytest.approx(4 * 5.0 + 5 * 2.0, rel=1e-14)


@pytest.mark.parametrize("c", [2.0, 3.0, 0.5, 1.5])
def test_fibonacci_closed_form_any_c(c):
    dec = dc.build_lambda_mu("1", "1", 1.0, 1.0, 40, c)
    fres, gres = dc.identity_residuals(dec)
    assert max(fres, gres) < 1e-12
    fib = [1, 1]
    while len(fib) < 41:
        fib.append(fib[-1] + fib[-2])
    for n, v in enumerate(dc.closed_form_prefix(dec, 40), start=2):
        assert float(v) == pytest.approx(fib[n], rel=1e-12)


def test_rel_error_decreasing_from_golden_start():
    # frozen: first n from which rel_error decreases strictly to the horizon
    N0 = 2
    N = 300
    dec = dc.build_lambda_mu("n + 1/(n + 1)", "-1", 1.0, 1.0, N, mode=dc.MINIMAL)
    seq = iterate(RecurrenceSpec(LINEAR, ("n + 1/(n + 1)", "-1"), (1, 1), N + 1))
    rel = dc.dominance_check(dec, "n + 1/(n + 1)", "-1", seq).rel_error
    assert np.all(np.diff(rel[N0:N + 1]) < 0)
    assert N0 <= 50


def test_zero_p_gives_zero_q():
    p = np.zeros(30)
    p[:2] = np.nan
    assert np.all(dc.q_incremental(p, 29)[2:] == 0.0)


def test_product_generator_cases():
    const = dc.product_sequence("1", 20, b1=3.0)
    assert all(float(v) == 3.0 for v in const.values)
    from benfordrec import benford as bf
    expo = bf.analyze_sample(dc.product_sequence("1.4142135623730951 * n", 10**4, log_mu=True))
    assert max(expo.weyl_sums) < 0.05


def test_depth3_constant_wiring():
    # roots 1, 2, 3; initial values with every root present
    rec = dc.reduce_depth3("6", "-11", "6", [1.0, 2.0, 7.0], 60, mode=dc.MINIMAL)
    b = dc.b_sequence_depth3(rec, 40)
    assert rec.lam[30] == pytest.approx(1.0, abs=1e-12)
    assert float(div(b[39], b[38])) == pytest.approx(3.0, rel=1e-6)
    # a forward-ratio lambda tracks the dominant root and leaves the second one in b
    fwd = dc.reduce_depth3("6", "-11", "6", [1.0, 2.0, 7.0], 60)
    b = dc.b_sequence_depth3(fwd, 40)
    assert float(div(b[39], b[38])) == pytest.approx(2.0, rel=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 2.0), st.floats(0.2, 1.5))
def test_two_admissible_c_both_satisfy_identities(a, s):
    f, g = f"{a!r} * n + 1", f"{s!r}"
    d1 = dc.build_lambda_mu(f, g, 1.0, 2.0, 300)
    d2 = dc.build_lambda_mu(f, g, 1.0, 2.0, 300, exclude=[d1.c])
    assert d1.c != d2.c
    for d in (d1, d2):
        assert max(dc.identity_residuals(d)) < dc.IDENTITY_TOL


def test_inductive_construction_by_hand():
    # lambda(1) = c = 2, mu(2) = -g(2)/lambda(1) = -1/2, lambda(2) = f(2) - mu(2) = 3/2
    dec = dc.build_lambda_mu("1", "1", 1.0, 1.0, 10, 2.0)
    assert (dec.lam[1], dec.mu[2], dec.lam[2]) == (2.0, -0.5, 1.5)
    assert dec.b1 == -1.0
