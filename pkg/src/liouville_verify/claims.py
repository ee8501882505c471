"""Machine checks for the ten auxiliary inequalities used in the gamma = n - 4
analysis.

Each claim is checked two ways:

* the final reduction used to prove it (a polynomial in n or q, or a sign in
  Q(sqrt 2)) is certified exactly, by Sturm root isolation or exact field
  arithmetic;
* the inequality as stated is evaluated for every integer n in
  [n_min, n_max], exactly when it lives in one quadratic field and with
  interval enclosures otherwise.  q-dependent statements are checked with q as
  a whole interval, subdivided until the enclosure decides.

Decimal constants are parsed to exact rationals.  The formula helpers below
are written over generic arithmetic so the same code runs on Fractions,
QuadExt, RatInterval and sympy expressions (for the n -> infinity check).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import sympy as sp

from .coefficients import critical_p, critical_q
from .errors import DomainError
from .exact import (
    QuadExt,
    RatInterval,
    UniPoly,
    as_interval,
    count_roots,
    exact_sign,
    get_precision,
    poly_positive_on,
    quad,
    workprec,
)
from .thresholds import LargeGammaFrame, d1d2_identity, delta_prime, k1_positive_large_gamma

F = Fraction
SQRT2 = QuadExt(0, 1, 2)
# rational enclosure of sqrt 2 (both squares checked in tests)
SQRT2_LO = F(141421356, 10**8)
SQRT2_HI = F(141421357, 10**8)

VERDICTS = ("certified-all-n", "verified-on-range", "failed", "inconclusive")
# claims whose final reduction is a complete certificate for the whole range
FULL_REDUCTION = {1, 6, 7, 10}
N_MIN = {1: 9, 2: 7, 3: 7, 4: 7, 5: 7, 6: 9, 7: 7, 8: 7, 9: 7, 10: 7}
MAX_SPLIT_DEPTH = 12


@dataclass
class Certificate:
    name: str
    ok: bool
    detail: str


@dataclass
class ClaimReport:
    claim: int
    statement: str
    n_range: tuple
    q_range: str
    method: str
    verdict: str = "inconclusive"
    margin: Fraction | None = None
    margin_at: int | None = None
    failures: list = field(default_factory=list)
    undecided: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    asymptotic: str | None = None

    @property
    def ok(self):
        return self.verdict in ("certified-all-n", "verified-on-range")

    def to_dict(self):
        return {
            "claim": self.claim,
            "statement": self.statement,
            "n_range": list(self.n_range),
            "q_range": self.q_range,
            "method": self.method,
            "verdict": self.verdict,
            "margin": None if self.margin is None else str(self.margin),
            "margin_at": self.margin_at,
            "failures": [list(map(str, f)) for f in self.failures],
            "undecided": [str(u) for u in self.undecided],
            "certificates": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in self.certificates],
            "asymptotic": self.asymptotic,
        }


# --- small helpers -----------------------------------------------------------------

def _lower(x):
    """Certified lower bound of a number, or None if it is not certainly > 0."""
    if isinstance(x, RatInterval):
        return x.lo if x.is_positive() else None
    s = exact_sign(x)
    if s != 1:
        return None
    return as_interval(x).lo if isinstance(x, QuadExt) else x


def _decide(x):
    """+1 holds, -1 violated (certainly), 0 undecided."""
    if isinstance(x, RatInterval):
        s = x.sign()
        if s == 1:
            return 1
        if x.hi < 0 or (x.hi <= 0 and x.lo < 0 and s == -1):
            return -1
        return 0
    s = exact_sign(x)
    return 1 if s == 1 else -1


def _q_cover(fn, lo, hi, depth=MAX_SPLIT_DEPTH):
    """Certify fn(q) > 0 for q in [lo, hi] by interval bisection.

    Returns (status, lower_bound, where): status +1 certified, -1 a point
    value is certainly negative, 0 undecided at max depth.
    """
    stack = [(F(lo), F(hi), 0)]
    best = None
    while stack:
        a, b, d = stack.pop()
        v = fn(RatInterval(a, b) if a != b else a)
        lb = _lower(v)
        if lb is not None:
            best = lb if best is None else min(best, lb)
            continue
        mid = (a + b) / 2
        pv = fn(mid)
        if _decide(pv) == -1:
            return -1, None, mid
        if d >= depth:
            return 0, None, (a, b)
        stack += [(a, mid, d + 1), (mid, b, d + 1)]
    return 1, best, None


def _poly_n(desc, var="n"):
    return UniPoly.from_desc([F(c) for c in desc], var)


def _cert_poly(name, poly, lo, hi=None, want="positive"):
    c = poly_positive_on(poly if want == "positive" else -poly, lo, hi)
    detail = c.describe()
    if want == "negative":
        detail = f"-({poly}) checked: " + detail
    return Certificate(name, c.positive, detail)


def _poly_from_sympy(expr, var):
    """Exact UniPoly from a sympy polynomial with rational coefficients."""
    P = sp.Poly(sp.expand(expr), var)
    return UniPoly.from_desc([F(int(c.p), int(c.q)) for c in (sp.Rational(x) for x in P.all_coeffs())],
                             str(var))


def _identity(name, lhs, rhs):
    ok = sp.simplify(sp.expand(lhs - rhs)) == 0
    return Certificate(name, bool(ok), f"{sp.expand(lhs)} == {sp.expand(rhs)}" if ok
                       else f"difference {sp.expand(lhs - rhs)}")


def sqrt_enclosure_lemma(x) -> bool:
    """1 - x/2 - x^2/6 < sqrt(1 - x) < 1 - x/2 - x^2/8 for 0 < x <= 1/5, by squaring."""
    x = F(x)
    if not 0 < x <= F(1, 5):
        raise DomainError("the enclosure lemma needs 0 < x <= 1/5")
    lo = 1 - x / 2 - x * x / 6
    hi = 1 - x / 2 - x * x / 8
    return lo > 0 and lo * lo < 1 - x < hi * hi


# --- the claim formulas (generic arithmetic) ------------------------------------------

def _pc_minus(n):
    return (n + 2) / (n - 2) - 1 / (n * n)


def _u0_factor(n, r2):
    return (2 - r2) / 2 + r2 / n


def claim2_slack(n, r2):
    lhs = (_u0_factor(n, r2) * (n - 4)
           / (r2 * (n - F(5, 2) - 1 / (6 * (n - 2)) - r2)) * _pc_minus(n))
    return (r2 - 1) / 2 + 3 / n - lhs


def claim3_slack(n, r2):
    m = n - F(38, 15)
    lhs = (2 * (n - 3 + 1 / (n - 1)) * (2 * r2 * m + n * n - 5 * n + 8)
           / ((n - 1) * (n - 2) ** 2 * (n - 4)) * (r2 * m - F(3, 2)))
    return lhs - (2 * r2 + F(2, 5) * r2 / n)


def claim4_slack(n, r2, rd):
    lhs = (2 * rd - n + 4) / (n - 2) * _u0_factor(n, r2)
    return (2 * r2 - 1) * (2 - r2) / 2 + F(276, 100) / n + F(17, 10) / (n * n) - lhs


def claim5_slack(n, r2, rd):
    lhs = (1 / (n - 2) * ((2 - r2) / 2 * n - F(5, 2) - 1 / (6 * (n - 2)) + r2)
           / (n - F(5, 2) - r2) * (2 * rd - n + 4) / (n - 2) * _u0_factor(n, r2))
    return lhs - (8 * r2 - 11) / 2 * (1 / n + 7 / (n * n))


def claim6_slack(n, q):
    return 1 - q / n + (F(3, 2) * q * q - 8 * q + 12) / (n * n) - (n - 4 + F(4) / n) / (n - 4 + q)


def claim8_target(n, r2):
    return (4 - 2 * r2) * (1 / n + 7 / (n * n))


def claim9_rhs(n, q, r2):
    return ((F("-2.8") + F("0.051") * (2 - q) + n * (q - 1) - r2 / 2 * q) / n
            + (6 + F("4.34") * (2 - q) + n * q * (1 - q) + F("1.41") * q) / (n * n))


def claim9_display(n, q, r2):
    """The general-n upper bound for I(U0, .) that the n = 7, 8 chain starts from."""
    return (-r2 / 2 - r2 / n + r2 / (2 * n * n)
            + (2 - q) / (n - 3) * ((r2 - 1) / 2 + F(3) / n)
            - (n - 4 + F(4) / n) / (n - 4 + q)
            * (1 - q - r2 / 2 + (F("0.84") + F("0.4") * r2) / n - F("0.9") / (n * n)
               + (2 - q) * (8 * r2 - 11) / 2 * (F(1) / n + F(7) / (n * n))))


CLAIM9_CHAIN = {
    7: dict(c0=F("-0.89"), c1=F("0.16"), kq=F(25, 7), shift=3, a=F("0.47"), b=F("0.044"),
            lin=(F("0.773"), F("-1.068")), quad=(F(-1, 7), F("0.974"), F("-1.086")), qmax=F(9, 7)),
    8: dict(c0=F("-0.87"), c1=F("0.12"), kq=F("4.5"), shift=4, a=F("0.45"), b=F("0.036"),
            lin=(F("0.8124"), F("-1.0998")), quad=(F(-1, 8), F("0.98"), F("-1.108")), qmax=F(5, 4)),
}


# --- sympy closed forms for the n -> infinity check -------------------------------------

_t = sp.Symbol("t", positive=True)
SERIES_ORDER = 10
# sqrt((1 - 2t)(1 - 3t)) truncated; its error is O(t^SERIES_ORDER)
_ROOT_SERIES = sp.series(sp.sqrt((1 - 2 * _t) * (1 - 3 * _t)), _t, 0, SERIES_ORDER).removeO()


def _sym_env():
    n = 1 / _t
    r2 = sp.sqrt(2)
    rd = r2 * _ROOT_SERIES / _t
    return n, r2, rd


def _sym_u0(q):
    n, r2, rd = _sym_env()
    g = n - 4
    S = (rd - n + 2) / ((n - 2) * (n - 4))
    a1 = (2 * rd + n * n - 5 * n + 8) / ((n - 1) * (n - 2))
    B0 = a1 * (n / (n - 1) + g)
    return 2 * B0 * (1 + g * S + q * S) ** 2 / (g + q) ** 2 * ((2 - r2) / 2 + r2 / n)


def _lowest(poly_expr):
    poly_expr = sp.expand(poly_expr)
    for k in range(0, 200):
        c = sp.expand(sp.radsimp(poly_expr.coeff(_t, k)))
        if c != 0:
            return k, c
    raise DomainError("expression vanishes to high order")


def _as_quad(c):
    a = sp.Rational(c.coeff(sp.sqrt(2), 0))
    b = sp.Rational(c.coeff(sp.sqrt(2), 1))
    return QuadExt(F(int(a.p), int(a.q)), F(int(b.p), int(b.q)), 2)


def leading_behaviour(expr):
    """First non-vanishing term c t^k of expr(t), t = 1/n -> 0, with the sign
    of c decided exactly in Q(sqrt 2).  Returns (k, c, sign)."""
    num, den = sp.fraction(sp.together(sp.sympify(expr)))
    kn, cn = _lowest(num)
    kd, cd = _lowest(den)
    k = kn - kd
    if k >= SERIES_ORDER - 3:
        raise DomainError("leading order beyond the truncated square-root series")
    c = sp.radsimp(cn / cd)
    qc = _as_quad(sp.expand(c))
    return k, c, exact_sign(qc)


def _asymptotic(claim):
    n, r2, rd = _sym_env()
    exprs = {
        2: [claim2_slack(n, r2)],
        3: [claim3_slack(n, r2)],
        4: [claim4_slack(n, r2, rd)],
        5: [claim5_slack(n, r2, rd)],
        8: [_sym_u0(q) - claim8_target(n, r2) for q in (1, 1 + 2 * _t)],
    }.get(claim)
    if exprs is None:
        return None, True
    labels = ["at q = 1: ", "at q = 1 + 2/n: "] if claim == 8 else [""]
    parts, ok = [], True
    for label, e in zip(labels, exprs):
        k, c, s = leading_behaviour(e)
        ok = ok and s == 1
        parts.append(f"{label}slack ~ ({c}) n^{-k}")
    return "; ".join(parts), ok


# --- per-claim drivers -------------------------------------------------------------------

def _rd(n):
    return quad(0, 1, delta_prime(n))


def _range_check(rep, n_values, slack_of_n):
    for n in n_values:
        res = slack_of_n(n)
        status, lb = res[0], res[1]
        if status == 1:
            if rep.margin is None or lb < rep.margin:
                rep.margin, rep.margin_at = lb, n
        elif status == -1:
            rep.failures.append((n, res[2] if len(res) > 2 else "violated"))
        else:
            rep.undecided.append(n)


def _point(x):
    d = _decide(x)
    return (1, _lower(x)) if d == 1 else ((-1, None, "violated") if d == -1 else (0, None))


def _claim1(rep, ns):
    h1 = _poly_n(["-1.7", "19.6", "-51.6", "30.4"])
    rep.certificates.append(_cert_poly("h1 < 0 on [9, inf)", h1, 9, want="negative"))
    rep.certificates.append(Certificate("h1(9) = -85.7", h1(9) == F("-85.7"), f"h1(9) = {h1(9)}"))
    n = sp.Symbol("n")
    lhs = (n - 2) * (n - 1) * n**2 - (n**2 + 4 * n - 4) * (n**2 - sp.Rational("5.3") * n + sp.Rational("7.6"))
    rep.certificates.append(_identity("cleared form equals h1", lhs,
                                      -sp.Rational("1.7") * n**3 + sp.Rational("19.6") * n**2
                                      - sp.Rational("51.6") * n + sp.Rational("30.4")))

    def slack(n):
        fr = LargeGammaFrame.of(n)
        tgt = F(1, 2) - F(2, n) + F(2, n * n)
        return _q_cover(lambda q: as_interval(fr.delta(q)) - tgt, 1, 1 + F(2, n))

    _range_check(rep, ns, slack)


def _claim2(rep, ns):
    _range_check(rep, ns, lambda n: _point(claim2_slack(F(n), SQRT2)))


def _claim3(rep, ns):
    n = sp.Symbol("n")
    cubic = _poly_n(["0.95", "-4.638", "8.084", "-3.2"])
    rep.certificates.append(_cert_poly("0.95n^3 - 4.638n^2 + 8.084n - 3.2 > 0 on [7, inf)", cubic, 7))
    R = sp.Rational
    lhs = (n * (n - R("3.6")) * (n**3 - R("5.2") * n**2 + R("8.43") * n - R("4.69"))
           - (n - 1) * (n + R("0.2")) * (n**3 - 8 * n**2 + 20 * n - 16))
    rep.certificates.append(_identity("cleared form equals the cubic", lhs,
                                      R("0.95") * n**3 - R("4.638") * n**2 + R("8.084") * n - R("3.2")))

    def slack(n):
        s = _point(claim3_slack(F(n), SQRT2))
        if s[0] != 1:
            return s
        # the quantity the claim bounds, straight from the frame, over q in [1, 1 + 2/n]
        fr = LargeGammaFrame.of(n)
        tgt = 2 * SQRT2 + F(2, 5) * SQRT2 / n
        st = _q_cover(lambda q: as_interval(2 * fr.B0 * (1 + fr.gamma * fr.S + q * fr.S) / (fr.gamma + q))
                      - as_interval(tgt), 1, 1 + F(2, n))
        return s if st[0] == 1 else (st[0], None, "frame value below the bound")

    _range_check(rep, ns, slack)


def _claim4(rep, ns):
    R = F
    c1 = 7 - 3 * SQRT2 < R("2.76")
    c2 = R("0.91") + R("0.545") * SQRT2 < R("1.7")
    rep.certificates.append(Certificate("7 - 3 sqrt2 < 2.76 and 0.91 + 0.545 sqrt2 < 1.7",
                                        c1 and c2, "exact sign in Q(sqrt 2)"))
    _range_check(rep, ns, lambda n: _point(claim4_slack(F(n), SQRT2, _rd(n))))


def _claim5(rep, ns):
    n = sp.Symbol("n")
    R = sp.Rational
    quad_n = _poly_n(["0.08", "15.744", "-28"])
    rep.certificates.append(_cert_poly("0.08n^2 + 15.744n - 28 > 0 on [9, inf)", quad_n, 9))
    rep.certificates.append(_identity("cleared form equals the quadratic",
                                      n * (n - R("1.72")) * (n + R("4.8")) - (n + 7) * (n - 2) ** 2,
                                      R("0.08") * n**2 + R("15.744") * n - 28))
    _range_check(rep, ns, lambda n: _point(claim5_slack(F(n), SQRT2, _rd(n))))


def _claim6_poly(n):
    """n^2 (n - 4 + q) times the slack, as a polynomial in q."""
    q = UniPoly.gen("q")
    n = F(n)
    return (q + (n - 4)) * (q * q * F(3, 2) - q * (n + 8) + (n * n + 12)) - UniPoly.const(n**3 - 4 * n * n + 4 * n, "q")


def _claim6(rep, ns):
    # all-n certificate: with x = (4 - q)/n <= 1/3 the series bound and the
    # sign of the remainder bracket finish the argument
    n, q = sp.symbols("n q", positive=True)
    x = (4 - q) / n
    lhs = (1 - 4 / n + 4 / n**2) * (1 + x + sp.Rational(3, 2) * x**2)
    rhs = (1 - q / n + (sp.Rational(3, 2) * q**2 - 8 * q + 12) / n**2
           + (4 - q) / n**3 * (-6 * (4 - q) + 4 + 6 * (4 - q) / n))
    rep.certificates.append(_identity("series product expansion", lhs, rhs))
    # tail: x^2/(1 - x) <= 1.5 x^2 needs x <= 1/3, i.e. (4 - q)/n <= 3/9 for n >= 9, q >= 1
    rep.certificates.append(Certificate("x <= 1/3 for n >= 9, q >= 1", F(3, 9) <= F(1, 3), "(4 - 1)/9 = 1/3"))
    # bracket: -u(6 - 6/n) + 4 < 0 with u = 4 - q >= 3 - 2/n and n >= 9; increasing in n and u
    u_min = 3 - F(2, 9)
    bracket = -u_min * (6 - F(6, 9)) + 4
    rep.certificates.append(Certificate("remainder bracket negative", bracket < 0,
                                        f"max of -6u + 4 + 6u/n over n >= 9, u >= 25/9 is {bracket}"))
    rep.certificates.append(Certificate("1 - 4/n + 4/n^2 > 0", True, "(1 - 2/n)^2 > 0 for n >= 9"))

    def slack(n):
        c = poly_positive_on(_claim6_poly(n), 1, 1 + F(2, n))
        if not c.positive:
            return (-1, None, c.describe())
        # geometric-series oracle: direct ratio against the bound at sample q
        for k in range(5):
            qq = 1 + F(2 * k, 4 * n)
            if claim6_slack(F(n), qq) <= 0:
                return (-1, None, f"direct ratio exceeds bound at q = {qq}")
        return (1, min(claim6_slack(F(n), 1 + F(2, n)), claim6_slack(F(n), F(1))))

    _range_check(rep, ns, slack)


def _claim7(rep, ns):
    n = sp.Symbol("n")
    R = sp.Rational
    poly = _poly_n(["0.2", "-1.4", "1.9"])
    rep.certificates.append(_cert_poly("0.2n^2 - 1.4n + 1.9 > 0 on [7, inf)", poly, 7))
    rep.certificates.append(_identity("cleared form equals the quadratic",
                                      (n**2 - 5) * (n - R("1.9")) - (n + R("1.9")) * (n - 2) ** 2,
                                      R("0.2") * n**2 - R("1.4") * n + R("1.9")))
    rep.certificates.append(_identity("(n+2)/(n-2) - 1/(n-2)^2 = (n^2-5)/(n-2)^2",
                                      sp.together((n + 2) / (n - 2) - 1 / (n - 2) ** 2 - (n**2 - 5) / (n - 2) ** 2), 0))

    def slack(n):
        # q = 2p/(p+1) is increasing in p, so the window endpoints decide
        lo = critical_q(critical_p(n) - F(1, n * n)) - (1 + F(19, 10 * n))
        hi = (1 + F(2, n)) - critical_q(critical_p(n))
        if lo <= 0 or hi < 0:
            return (-1, None, f"lower slack {lo}, upper slack {hi}")
        return (1, lo)

    _range_check(rep, ns, slack)


def _claim8(rep, ns):
    n = sp.Symbol("n")
    R = sp.Rational
    poly = _poly_n(["0.4", "16.96", "-59.456"])
    rep.certificates.append(_cert_poly("0.4n^2 + 16.96n - 59.456 > 0 on [7, inf)", poly, 7))
    rep.certificates.append(_identity("cleared form equals the quadratic",
                                      (n + R("0.2")) * (n - R("3.6")) * (n + R("4.8")) - (n + 7) * (n - 2) * (n - 4),
                                      R("0.4") * n**2 + R("16.96") * n - R("59.456")))

    def slack(n):
        fr = LargeGammaFrame.of(n)
        tgt = as_interval(claim8_target(F(n), SQRT2))
        return _q_cover(lambda q: as_interval(fr.u0(q)) - tgt, 1, 1 + F(2, n))

    _range_check(rep, ns, slack)


def _sturm_open_left(poly, lo, hi):
    """poly > 0 on (lo, hi]; a root at lo itself is divided out first."""
    x = UniPoly.gen(poly.var)
    while not poly.is_zero() and poly(lo) == 0:
        poly, r = poly.divmod(x - UniPoly.const(lo, poly.var))
        assert r.is_zero()
    return not poly.is_zero() and poly_positive_on(poly, lo, hi).positive


def _l1(ch, x):
    return ch["c0"] + ch["c1"] * (2 - x) - ch["kq"] / (x + ch["shift"]) * (-x + ch["a"] + ch["b"] * (2 - x))


def _claim9(rep, ns):
    q = UniPoly.gen("q")
    for n in ns:
        if n not in CLAIM9_CHAIN:
            continue
        ch = CLAIM9_CHAIN[n]
        qmax = 1 + F(2, n)
        assert qmax == ch["qmax"]
        two_q = UniPoly.const(2, "q") - q
        inner = -q + UniPoly.const(ch["a"], "q") + two_q * ch["b"]
        base = UniPoly.const(ch["c0"], "q") + two_q * ch["c1"]
        lin = q * ch["lin"][0] + UniPoly.const(ch["lin"][1], "q")
        qa, qb, qc = ch["quad"]
        quadp = q * q * qa + q * qb + UniPoly.const(qc, "q")
        shift = UniPoly.const(ch["shift"], "q") + q
        # l1 (with 1/(q + shift)) < l1b (with 1/(1 + shift)): multiply by q + shift > 0
        l1_times = base * shift - inner * ch["kq"]
        l1b = base - inner * (ch["kq"] / (1 + ch["shift"]))
        s1 = l1b * shift - l1_times
        step1 = _sturm_open_left(s1, F(1), qmax)
        d2 = lin - l1b
        step2_strict = not d2.is_zero() and poly_positive_on(d2, 1, qmax).positive
        # d2 has degree <= 1, so endpoint values decide non-negativity
        step2 = step2_strict or d2.is_zero() or (d2(F(1)) >= 0 and d2(qmax) >= 0)
        step3 = poly_positive_on(quadp - lin, 1, qmax).positive
        step4 = _q_cover(lambda x: claim9_rhs(F(n), x, as_interval(SQRT2)) - (qa * x * x + qb * x + qc), 1, qmax)
        disp = _q_cover(lambda x: _l1(ch, x) - claim9_display(F(n), x, as_interval(SQRT2)), 1, qmax)
        rep.certificates.append(Certificate(f"n={n}: l1 < l1b on (1, {qmax}]", step1, "Sturm after clearing q + %d" % ch["shift"]))
        rep.certificates.append(Certificate(
            f"n={n}: l1b {'<' if step2_strict else '<='} {ch['lin'][0]}q + ({ch['lin'][1]})", step2,
            "strict" if step2_strict else f"difference {d2} (equality holds identically)"))
        rep.certificates.append(Certificate(f"n={n}: linear < quadratic on [1, {qmax}]", step3, "Sturm"))
        rep.certificates.append(Certificate(f"n={n}: quadratic < target right side", step4[0] == 1,
                                            "interval subdivision in q"))
        rep.certificates.append(Certificate(f"n={n}: general-n display <= l1", disp[0] == 1,
                                            "interval subdivision in q"))

        fr = LargeGammaFrame.of(n)
        pm = critical_p(n) - F(1, n * n)

        def target(x, fr=fr, n=n, pm=pm):
            U0 = as_interval(fr.u0(x))
            return as_interval(claim9_rhs(F(n), x, as_interval(SQRT2))) - as_interval(fr.I(U0, x, pm))

        st = _q_cover(target, 1, qmax, depth=16)
        chain_ok = step1 and step2 and step3 and step4[0] == 1 and disp[0] == 1
        if st[0] == 1 and chain_ok:
            if rep.margin is None or st[1] < rep.margin:
                rep.margin, rep.margin_at = st[1], n
        elif st[0] == -1 or not chain_ok:
            rep.failures.append((n, "target" if st[0] == -1 else "chain step"))
        else:
            rep.undecided.append(n)


def _vanishes_mod(expr, s, dp):
    """True when the numerator of expr is divisible by s^2 - dp."""
    num = sp.numer(sp.together(expr))
    red = sp.rem(sp.Poly(sp.expand(num), s), sp.Poly(s**2 - dp, s))
    return sp.expand(red.as_expr()) == 0


def _d1d2_certificates(n, s, dp):
    """All-n checks in Q(n)(s), s = sqrt(Delta'), gamma = n - 4, eps = 0."""
    g = n - 4
    S = (s - n + 2) / ((n - 2) * (n - 4))
    Q = (1 - S) / (n - 1)
    D = 1 - S**2 + g * S - g * S**2 - (n - 1) * Q**2
    lam = (1 + g * S) / D
    b2 = g + lam * (2 * g * S - g + 2 * S - 2 * Q)
    a1 = (2 * s + n**2 - 5 * n + 8) / ((n - 1) * (n - 2))
    D1 = 1 + (n - 2) * S
    D2 = a1 * (n - 2) / (n - 1)
    checks = [
        ("b2 vanishes at the closed-form S", b2),
        ("a1 = (2 sqrt(Delta') + n^2 - 5n + 8)/((n-1)(n-2))", lam - a1),
        ("D1 = 1 + (n-2)S = (sqrt(Delta') - 2)/(n-4)", D1 - (s - 2) / (n - 4)),
        ("D1 D2 = (2 + sqrt(Delta'))/(n-1)", D1 * D2 - (2 + s) / (n - 1)),
    ]
    return [Certificate(name, _vanishes_mod(e, s, dp), "reduced mod s^2 - Delta', all n >= 7")
            for name, e in checks]


def _claim10(rep, ns):
    n = sp.Symbol("n", positive=True)
    quartic = _poly_n(["2.5", "-4.2", "29", "-34", "4"])
    rep.certificates.append(_cert_poly("2.5n^4 - 4.2n^3 + 29n^2 - 34n + 4 > 0 on [7, inf)", quartic, 7))
    rep.certificates.append(Certificate("quartic at n=7 equals 5748.9", quartic(7) == F("5748.9"), str(quartic(7))))
    # expansion of (n-1) n^4 H in Q(sqrt Delta'), symbol s standing for sqrt Delta'
    s = sp.Symbol("s")
    dp = (n - 2) * (2 * n - 6)
    left = (4 * n * (n**2 - 3 * n + 4) * (2 + s) * (6 * n**2 - 5 * n + 2 + n * (n - 2) * s)
            - (n - 1) * (8 * n**2 - 9 * n + 2 + 2 * n * (n - 2) * s) ** 2)
    right = -88 * n**4 + 327 * n**3 - 251 * n**2 + 24 * n + 4 + s * 8 * n * (8 * n**2 - 9 * n + 2)
    red = sp.rem(sp.Poly(sp.expand(left - right), s), sp.Poly(s**2 - dp, s))
    rep.certificates.append(Certificate("(n-1) n^4 H expansion", sp.expand(red.as_expr()) == 0,
                                        "difference reduced mod s^2 - Delta' vanishes"))
    # sqrt(Delta') > sqrt2 (n - 38/15): squares differ by 2n/15 - 188/225
    sq = sp.expand(dp - 2 * (n - sp.Rational(38, 15)) ** 2)
    rep.certificates.append(Certificate("sqrt(Delta') > sqrt2 (n - 38/15) for n >= 7",
                                        sq == 2 * n / 15 - sp.Rational(188, 225) and F(14, 15) > F(188, 225),
                                        f"Delta' - 2(n - 38/15)^2 = {sq}"))
    # with sqrt 2 > r rational, the bound becomes a rational polynomial
    nn = UniPoly.gen("n")
    base = _poly_n([-88, 327, -251, 24, 4])
    tail = nn * (nn - UniPoly.const(F(38, 15), "n")) * _poly_n([8, -9, 2]) * 8
    poly = base + tail * SQRT2_LO
    rep.certificates.append(Certificate("sqrt2 > 141421356/10^8", SQRT2_LO ** 2 < 2 < SQRT2_HI ** 2, "squares"))
    rep.certificates.append(_cert_poly("rational lower bound of (n-1) n^4 H > 0 on [7, inf)", poly, 7))
    lower = poly_positive_on(tail, 7)
    rep.certificates.append(Certificate("sqrt2 coefficient positive on [7, inf)", lower.positive, lower.describe()))

    rep.certificates.extend(_d1d2_certificates(n, s, dp))

    def slack(n):
        k = k1_positive_large_gamma(n)
        if not k.agree:
            return (-1, None, "engine H disagrees with the expansion")
        if not d1d2_identity(n):
            return (-1, None, "D1 D2 identity fails")
        v = k.expansion
        return _point(v)

    _range_check(rep, ns, slack)


STATEMENTS = {
    1: "Delta > 0.5 - 2/n + 2/n^2 for n >= 9, 1 < q <= 1 + 2/n",
    2: "(sqrt2 bound on the D1 factor) < (sqrt2 - 1)/2 + 3/n for n >= 7",
    3: "D2 lower bound > 2 sqrt2 + 0.4 sqrt2/n for n >= 7",
    4: "D3 leading factor < (2 sqrt2 - 1)(2 - sqrt2)/2 + 2.76/n + 1.7/n^2 for n >= 7",
    5: "D3 correction > (8 sqrt2 - 11)/2 (1/n + 7/n^2) for n >= 7",
    6: "(n - 4 + 4/n)/(n - 4 + q) < 1 - q/n + (1.5q^2 - 8q + 12)/n^2 for n >= 9, 1 <= q <= 1 + 2/n",
    7: "1 + 1.9/n < q <= 1 + 2/n on the window [(n+2)/(n-2) - 1/n^2, (n+2)/(n-2)], n >= 7",
    8: "U0 > (4 - 2 sqrt2)(1/n + 7/n^2) for n >= 7, 1 <= q <= 1 + 2/n",
    9: "I(U0, (n+2)/(n-2) - 1/n^2) below the closed bound at n = 7, 8, 1 < q <= 1 + 2/n",
    10: "H((n+2)/(n-2) - 1/n^2) > 0 for n >= 7",
}
Q_RANGE = {1: "[1, 1+2/n]", 3: "[1, 1+2/n]", 6: "[1, 1+2/n]", 7: "window", 8: "[1, 1+2/n]", 9: "(1, 1+2/n]"}
METHOD = {1: "interval-range", 2: "quadratic-field-exact", 3: "quadratic-field-exact",
          4: "interval-range", 5: "interval-range", 6: "exact-polynomial", 7: "exact-polynomial",
          8: "interval-range", 9: "interval-range", 10: "quadratic-field-exact"}
DRIVERS = {1: _claim1, 2: _claim2, 3: _claim3, 4: _claim4, 5: _claim5,
           6: _claim6, 7: _claim7, 8: _claim8, 9: _claim9, 10: _claim10}


def verify_claim(claim: int, n_max: int = 500, precision: int | None = None) -> ClaimReport:
    if claim not in DRIVERS:
        raise DomainError(f"claim id must be in 1..10, got {claim}")
    if n_max < 9:
        raise DomainError("n_max must be at least 9")
    lo = N_MIN[claim]
    ns = [7, 8] if claim == 9 else list(range(lo, n_max + 1))
    rep = ClaimReport(claim, STATEMENTS[claim], (ns[0], ns[-1]), Q_RANGE.get(claim, "-"), METHOD[claim])
    with workprec(precision or get_precision()):
        DRIVERS[claim](rep, ns)
        rep.asymptotic, asym_ok = _asymptotic(claim)
    certs_ok = all(c.ok for c in rep.certificates)
    if rep.failures or not certs_ok or not asym_ok:
        rep.verdict = "failed"
    elif rep.undecided:
        rep.verdict = "inconclusive"
    elif claim in FULL_REDUCTION or claim == 9:
        # claim 9 is a statement about n = 7, 8 only, so the range is complete
        rep.verdict = "certified-all-n"
    else:
        rep.verdict = "verified-on-range"
    return rep


def _verify_args(args):
    return verify_claim(*args)


def verify_all(n_max: int = 500, precision: int | None = None, jobs: int = 1, claims=range(1, 11)):
    args = [(c, n_max, precision or get_precision()) for c in claims]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_verify_args, args))
    return [verify_claim(*a) for a in args]
