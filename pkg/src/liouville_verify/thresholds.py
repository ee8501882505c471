"""Named thresholds on M: the classical bound, M1 (small-gamma frame), the
discriminant Delta, U0 and M2 (gamma = n - 4 frame), and their comparison.

Every numeric value is carried as an exact number (Fraction / QuadExt) as long
as possible and otherwise as a RatInterval.  A verdict is only issued when an
enclosure excludes the comparison point.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .coefficients import (
    EPS_GRID,
    coefficient_values,
    critical_p,
    critical_q,
    k_values,
    large_gamma_I,
    solve_S,
)
from .errors import DomainError
from .exact import (
    MAX_PRECISION,
    QuadExt,
    RatInterval,
    UniPoly,
    as_interval,
    escalating,
    exact_sign,
    get_precision,
    interval_exp,
    interval_log,
    poly_positive_on,
    quad,
    to_rational,
    workprec,
)

INV_SQRT2 = QuadExt(0, Fraction(1, 2), 2)
J_POLICY = Fraction(1) - Fraction(1, 10**6)
WIDTH_TOL = Fraction(1, 10**6)


def _iv(x) -> RatInterval:
    return as_interval(x)


def _pow_product(factors) -> RatInterval:
    """prod base**exp for positive bases, via exp(sum exp*log(base))."""
    total = RatInterval.point(0)
    for base, e in factors:
        b = _iv(base)
        if not b.is_positive():
            raise DomainError(f"non-positive base {b!r} in power product")
        total = total + _iv(e) * interval_log(b)
    return interval_exp(total)


def _sign(x):
    return exact_sign(x) if not isinstance(x, RatInterval) else x.sign()


# --- classical bound and M1 ---------------------------------------------------

def theorem_c_bound(n, p) -> RatInterval:
    """((p-1)/(p+1))^((p-1)/(p+1)) * (n(p+1)^2/(4p))^(p/(p+1))."""
    p = to_rational(p)
    if n < 1 or p <= 1:
        raise DomainError("theorem_c_bound needs n >= 1 and p > 1")
    r = (p - 1) / (p + 1)
    return _pow_product([(r, r), (n * (p + 1) ** 2 / (4 * p), p / (p + 1))])


def m1_factors(n, p, q=None):
    """The two bracket factors of M1, exact when q is rational."""
    q = critical_q(p) if q is None else q
    return (n - 1) ** 2 * q / (4 * n) - 1, n / q - Fraction(n * (n - 1), n + 2)


def m1(n, p, q=None):
    """(p+1)[(n-1)^2 q/(4n) - 1]^(-1) [n/q - n(n-1)/(n+2)]^(q/2); +inf for n <= 6."""
    if n <= 6:
        return math.inf
    p = to_rational(p) if not isinstance(p, RatInterval) else p
    q = critical_q(p) if q is None else q
    f1, f2 = m1_factors(n, p, q)
    if _sign(f1) != 1 or _sign(f2) != 1:
        raise DomainError(f"M1 bracket not positive at n={n}, p={p}")
    return _pow_product([(p + 1, 1), (f1, -1), (f2, q / 2)])


def m1_from_k(n, p, eps0=0):
    """M1 rebuilt from K3, K5, K6 of the small-gamma frame with U = 1 + q/n.

    Returns (M1, K3, K5, K6); at eps0 = 0 this must agree with m1().
    """
    p, eps0 = to_rational(p), to_rational(eps0)
    q = critical_q(p)
    S = Fraction(1, n)
    alpha = -2 * (p - eps0) / (n + 2)
    T = 9 * eps0 / (alpha + p)
    co = coefficient_values(n, p, q, 0, S, S, alpha, 0)
    K = k_values(n, p, q, 0, S, alpha, co, eps0, T, 1 + q / n)
    negK3, K5m = -K.K3, K.K5 - 10 * eps0
    # K6 > p^p/(p+1)^(p+1) M^(p+1) (-K3)^(p+1) (K5 - 10 eps0)^(-p), solved for M;
    # the eps0^(1/2) correction to K6 vanishes in the limit and is dropped
    M = _pow_product([(K.K6, 1 / (p + 1)), (p + 1, 1), (p, -p / (p + 1)),
                      (negK3, -1), (K5m, p / (p + 1))])
    return M, K.K3, K.K5, K.K6


# --- small-n support ------------------------------------------------------------

def default_small_u(n, q):
    if n in (5, 6):
        return 1 + 2 * q / n
    return 1 + q / n


@dataclass
class SmallNReport:
    n: int
    p: Fraction
    q: Fraction
    U: Fraction
    eps0: Fraction
    rows: list            # (eps, K3 - eps0, K5 - sqrt(eps0) enclosure)
    holds: bool
    k5_leading: Fraction  # O(eps0)-free expansion of K5
    k5_leading_agrees: bool

    @property
    def margins(self):
        return {str(e): (float(a), float(b)) for e, a, b in self.rows}


def small_n_verify(n, p, eps0=Fraction(1, 10**4), U=None, eps_grid=EPS_GRID) -> SmallNReport:
    """K3 >= eps0 and K5 >= sqrt(eps0) in the gamma = 0 frame with P = eps0,
    T = 9 eps0/(alpha + p).

    Evaluated exactly at frame eps = 0 and on the eps grid; the verdict asks
    for both inequalities at eps = 0 and at the smallest grid eps (the frame eps
    is only required to be small).
    """
    p, eps0 = to_rational(p), to_rational(eps0)
    if not 1 < p <= critical_p(n):
        raise DomainError(f"p = {p} outside (1, (n+2)/(n-2)] for n = {n}")
    q = critical_q(p)
    U = default_small_u(n, q) if U is None else to_rational(U)
    S = Fraction(1, n)
    alpha = -2 * (p - eps0) / (n + 2)
    T = 9 * eps0 / (alpha + p)
    root = _iv(eps0).sqrt()
    rows = []
    for eps in (Fraction(0),) + tuple(sorted(eps_grid)):
        co = coefficient_values(n, p, q, 0, S, S, alpha, eps)
        K = k_values(n, p, q, 0, S, alpha, co, eps0, T, U)
        rows.append((eps, K.K3 - eps0, _iv(K.K5) - root))
    decisive = [rows[0], rows[1]]
    holds = all(a >= 0 and b.sign() in (0, 1) for _, a, b in decisive)
    lead = (2 - (n - 1) * q) * p / (n + 2) * U / (1 + q * S) + Fraction(n, n + 2) * p
    co0 = coefficient_values(n, p, q, 0, S, S, -2 * p / (n + 2), 0)
    k5_0 = k_values(n, p, q, 0, S, -2 * p / (n + 2), co0, 0, 0, U).K5
    return SmallNReport(n, p, q, U, eps0, rows, holds, lead,
                        (lead > 0) == (k5_0 > 0))


# --- gamma = n - 4 frame ----------------------------------------------------------

@dataclass(frozen=True)
class LargeGammaFrame:
    """gamma = n - 4, alpha = -gamma - 4/n, eps = 0, S the exact root of b2."""

    n: int
    gamma: Fraction
    alpha: Fraction
    S: object
    Q: object
    a1: object = None
    B0: object = None

    @classmethod
    @lru_cache(maxsize=None)
    def of(cls, n: int) -> "LargeGammaFrame":
        if n < 7:
            raise DomainError("the gamma = n - 4 frame needs n >= 7")
        gamma = Fraction(n - 4)
        S = solve_S(n, gamma, 0)
        base = cls(n, gamma, -gamma - Fraction(4, n), S, (1 - S) / (n - 1))
        co = base.coefficients(critical_p(n))
        # a1 and B0 do not depend on p or q
        return cls(n, base.gamma, base.alpha, S, base.Q, co.a1, co.B0)

    def coefficients(self, p, q=None):
        q = critical_q(p) if q is None else q
        return coefficient_values(self.n, p, q, self.gamma, self.S, self.Q, self.alpha, 0)

    def kappa(self, q):
        return (self.gamma + q) / (1 + self.gamma * self.S + q * self.S)

    def delta(self, q):
        """1 - q(gamma+q) / (B0 (1 + gamma S + q S)^2)."""
        d = 1 + self.gamma * self.S + q * self.S
        return 1 - q * (self.gamma + q) / (self.B0 * d * d)

    def k3(self, q, U):
        y = U * self.kappa(q)
        return -q / (self.gamma + q) + U - y * y / (4 * self.B0)

    def roots(self, q):
        """U1 < U2, the zeros of K3 in U (needs Delta > 0)."""
        dlt = self.delta(q)
        if _sign(dlt) != 1:
            raise DomainError("Delta <= 0: K3 has no two real roots")
        c = 2 * self.B0 / self.kappa(q) ** 2
        r = _iv(dlt).sqrt()
        return c * (1 - r), c * (1 + r)

    def u0(self, q):
        c = 2 * self.B0 / self.kappa(q) ** 2
        return c * (1 - INV_SQRT2 * (1 - Fraction(2, self.n)))

    def k_set(self, p, q, P, T, U):
        co = self.coefficients(p, q)
        return k_values(self.n, p, q, self.gamma, self.S, self.alpha, co, P, T, U)

    def I(self, U, q, p_minus_P):
        co = self.coefficients(critical_p(self.n), q)
        return large_gamma_I(U, p_minus_P, self.n, q, self.gamma, self.S, self.alpha, co)


def discriminant_delta(n, p) -> RatInterval:
    q = critical_q(to_rational(p))
    return _iv(LargeGammaFrame.of(n).delta(q))


@dataclass
class U0Report:
    n: int
    q: Fraction
    U0: RatInterval
    U1: RatInterval
    U2: RatInterval
    K3_U0: RatInterval
    K3_U1: RatInterval
    K3_U2: RatInterval
    ordered: bool
    k3_positive: bool

    @property
    def ok(self):
        return self.ordered and self.k3_positive


def u0(n, p) -> U0Report:
    fr = LargeGammaFrame.of(n)
    q = critical_q(to_rational(p))
    U0 = _iv(fr.u0(q))
    U1, U2 = fr.roots(q)
    k0 = _iv(fr.k3(q, U0))
    return U0Report(n, q, U0, U1, U2, k0, _iv(fr.k3(q, U1)), _iv(fr.k3(q, U2)),
                    U1.certainly_lt(U0) and U0.certainly_lt(U2), k0.is_positive())


# --- M2 ----------------------------------------------------------------------------

@dataclass
class M2Report:
    n: int
    p: Fraction
    q: Fraction
    value: RatInterval          # infimum over the eps grid
    eps: Fraction | None        # grid point attaining it
    J: RatInterval | None
    K5: RatInterval | None
    per_eps: list = field(default_factory=list)
    young_conjugate: bool = True
    checks: dict = field(default_factory=dict)

    @property
    def zero(self):
        return self.eps is None


def m2_closing_bound_n7_form(n) -> RatInterval:
    """The closing upper bound used at n = 7 (valid expression for any n >= 7)."""
    n = Fraction(n)
    r2 = QuadExt(0, 1, 2)
    inner = _iv(-(1 + 2 / n) / (n - 3) + (4 - 2 * r2) / n + (28 - 14 * r2) / n ** 2)
    return (_pow_product([(n, -1 - Fraction(19, 10) / n),
                          (Fraction(1456, 1000) * n - Fraction(8334, 1000), -(n - 2) / (2 * n)),
                          (inner, -(n + 2) / (2 * n))])
            * _iv(r2) / 2)


def m2_closing_bound_large_n(n) -> RatInterval:
    """n^-1 (0.24 - 1.43/n)^(-1/2), the bound used for n >= 8."""
    n = Fraction(n)
    return _pow_product([(n, -1), (Fraction(24, 100) - Fraction(143, 100) / n, Fraction(-1, 2))])


def m2(n, p, eps_grid=EPS_GRID) -> M2Report:
    p = to_rational(p)
    q = critical_q(p)
    pc = critical_p(n)
    lower = pc - Fraction(1, n * n)
    if p < lower:
        return M2Report(n, p, q, RatInterval.point(0), None, None, None)
    if p > pc:
        raise DomainError("p above the critical exponent")
    fr = LargeGammaFrame.of(n)
    U0 = _iv(fr.u0(q))
    co = fr.coefficients(p, q)
    base = _iv(co.c2 + U0)
    per = []
    for eps in eps_grid:
        P = p - lower + eps
        K = fr.k_set(p, q, P, 0, U0)
        K5 = _iv(K.K5)
        if not K5.is_positive():
            raise DomainError(f"K5 not positive at n={n}, p={p}, eps={eps}")
        J = J_POLICY * K5 / P
        val = _pow_product([(P, q / 2), (q / 2, q / 2),
                            (2 * J / (2 - q), -(2 - q) / 2), (base, -q / 2)])
        per.append((eps, val, J, K5))
    best = min(per, key=lambda t: t[1].hi)
    rep = M2Report(n, p, q, best[1], best[0], best[2], best[3], per,
                   q / 2 + (2 - q) / 2 == 1)
    if n == 7:
        rep.checks["below_0.8"] = best[1].certainly_lt(Fraction(8, 10))
        rep.checks["below_closing_bound"] = best[1].certainly_lt(m2_closing_bound_n7_form(n))
    else:
        rep.checks["below_large_n_bound"] = best[1].certainly_lt(m2_closing_bound_large_n(n))
    return rep


# --- K1 > 0 in the gamma = n - 4 frame -------------------------------------------

@dataclass
class K1Report:
    n: int
    H: object                 # exact element of Q(sqrt(Delta'))
    expansion: object         # (n-1) n^4 H from the closed polynomial form
    agree: bool
    positive: bool
    K1: object
    d1d2: bool


def delta_prime(n):
    return 2 * (n - 2) * (n - 3)


def k1_positive_large_gamma(n: int) -> K1Report:
    """H := 4 L^2 B0 K1 at p - P = (n+2)/(n-2) - 1/n^2, P = 0, computed by the
    engine and compared with the closed form
    (n-1) n^4 H = -88n^4 + 327n^3 - 251n^2 + 24n + 4 + sqrt(Delta') 8n(8n^2 - 9n + 2).
    """
    fr = LargeGammaFrame.of(n)
    pm = critical_p(n) - Fraction(1, n * n)
    q = critical_q(critical_p(n))   # K1 does not involve q
    co = fr.coefficients(pm, q)
    K = k_values(n, pm, q, fr.gamma, fr.S, fr.alpha, co, 0, 0, 0)
    L = co.L
    H = 4 * L * L * co.B0 * K.K1
    rd = quad(0, 1, delta_prime(n))
    expansion = (-88 * n**4 + 327 * n**3 - 251 * n**2 + 24 * n + 4
                 + rd * 8 * n * (8 * n * n - 9 * n + 2))
    agree = (n - 1) * n**4 * H == expansion
    return K1Report(n, H, expansion, agree, exact_sign(expansion) == 1 and exact_sign(H) == 1,
                    K.K1, d1d2_identity(n))


def d1d2_identity(n: int) -> bool:
    """D1 D2 = (2 + sqrt(Delta'))/(n - 1) for
    D1 = (sqrt(Delta') - 2)/(n - 4), D2 = (2 sqrt(Delta') + n^2 - 5n + 8)/(n - 1)^2,
    plus the links D1 = 1 + (n - 2)S and D2 = a1 (n - 2)/(n - 1) to the engine."""
    fr = LargeGammaFrame.of(n)
    rd = quad(0, 1, delta_prime(n))
    D1 = (rd - 2) / (n - 4)
    D2 = (2 * rd + n * n - 5 * n + 8) / Fraction((n - 1) ** 2)
    a1 = fr.coefficients(critical_p(n)).a1
    return (D1 * D2 == (2 + rd) / (n - 1)
            and D1 == 1 + (n - 2) * fr.S
            and D2 == a1 * Fraction(n - 2, n - 1))


# --- lemma M2 < M1 --------------------------------------------------------------

CLOSING_POLY = UniPoly.from_desc([Fraction(3, 5), 4, 3, -2], "n")


def closing_certificate():
    return poly_positive_on(CLOSING_POLY, 8)


def lemma_grid(n, points=20):
    pc = critical_p(n)
    lo = pc - Fraction(1, n * n)
    return [lo + (pc - lo) * Fraction(k, points - 1) for k in range(points)]


@dataclass
class LemmaRow:
    n: int
    p: Fraction
    m1: RatInterval | None
    m2: RatInterval | None
    verdict: str              # "certified", "violated", "inconclusive"
    bits: int


def _lemma_point(n, p):
    def attempt():
        a = m1(n, p)
        b = m2(n, p).value
        if b.certainly_lt(a):
            return ("certified", a, b)
        if b.certainly_ge(a):
            return ("violated", a, b)
        return None

    out, bits = escalating(attempt, stop=MAX_PRECISION)
    if out is None:
        return LemmaRow(n, p, None, None, "inconclusive", bits)
    return LemmaRow(n, p, out[1], out[2], out[0], bits)


def _lemma_n(args):
    n, points, bits = args
    with workprec(bits):
        return [_lemma_point(n, p) for p in lemma_grid(n, points)]


@dataclass
class LemmaTable:
    rows: list
    closing_polynomial: object

    @property
    def certified(self):
        return all(r.verdict == "certified" for r in self.rows) and self.closing_polynomial.positive

    @property
    def inconclusive(self):
        return [r for r in self.rows if r.verdict == "inconclusive"]


def lemma_m2_lt_m1(n_range=range(7, 101), p_points=20, jobs=1) -> LemmaTable:
    ns = [n for n in n_range if n >= 7]
    args = [(n, p_points, get_precision()) for n in ns]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_lemma_n, args))
    else:
        chunks = [_lemma_n(a) for a in args]
    rows = [r for ch in chunks for r in ch]
    return LemmaTable(rows, closing_certificate())


# --- aggregate -----------------------------------------------------------------------

K_NAMES = ("K1", "K2", "K3", "K4", "K5", "K6")


@dataclass
class ThresholdReport:
    n: int
    p: Fraction
    q: Fraction
    M_C: RatInterval
    M1: object
    U0: RatInterval | None
    Delta: RatInterval | None
    M2: RatInterval | None
    J: RatInterval | None
    m2_lt_m1: str
    k_signs: dict

    def enclosures(self):
        out = {"M_C": self.M_C, "M1": self.M1, "U0": self.U0, "Delta": self.Delta, "M2": self.M2}
        return {k: v for k, v in out.items() if isinstance(v, RatInterval)}

    def widths_ok(self):
        return all(v.width < WIDTH_TOL for v in self.enclosures().values())


def _sign_label(x):
    s = _sign(x)
    return {1: "+", -1: "-", 0: "0", None: "?"}[s]


def threshold_report(n, p) -> ThresholdReport:
    p = to_rational(p)
    q = critical_q(p)
    mc = theorem_c_bound(n, p)
    mone = m1(n, p)
    if n < 7:
        S = Fraction(1, n)
        alpha = -2 * p / (n + 2)
        co = coefficient_values(n, p, q, 0, S, S, alpha, 0)
        K = k_values(n, p, q, 0, S, alpha, co, 0, 0, default_small_u(n, q))
        signs = {k: _sign_label(getattr(K, k)) for k in K_NAMES}
        return ThresholdReport(n, p, q, mc, mone, None, None, RatInterval.point(0), None,
                               "certified", signs)
    fr = LargeGammaFrame.of(n)
    U0 = _iv(fr.u0(q))
    dl = discriminant_delta(n, p)
    rep = m2(n, p)
    verdict = "certified" if rep.value.certainly_lt(mone) else (
        "violated" if rep.value.certainly_ge(mone) else "inconclusive")
    P = p - critical_p(n) + Fraction(1, n * n) + (rep.eps or 0)
    K = fr.k_set(p, q, P, 0, U0)
    signs = {k: _sign_label(getattr(K, k)) for k in K_NAMES}
    return ThresholdReport(n, p, q, mc, mone, U0, dl, rep.value, rep.J, verdict, signs)
