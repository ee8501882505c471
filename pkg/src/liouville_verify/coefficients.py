"""Coefficients of the weighted Bernstein identity and the six condition
quantities K1..K6.

Every formula is written once over "generic" numbers, so the same code runs
on Fractions, QuadExt values (the gamma = n - 4 frame lives in Q(sqrt d)) and
RatIntervals (bracketed roots, interval-valued q).
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from fractions import Fraction

from .errors import DomainError, GatingError, NoRootNearSeed, ZeroDenominatorError
from .exact import QuadExt, RatInterval, as_interval, exact_sign, quad, to_rational, workprec

EPS_GRID = (Fraction(1, 10**3), Fraction(1, 10**4), Fraction(1, 10**6))
B2_TOL = Fraction(1, 10**12)


def critical_q(p) -> Fraction:
    """Gradient exponent making the equation scale invariant: 2p/(p+1)."""
    p = to_rational(p)
    if p <= 1:
        raise DomainError("critical_q needs p > 1")
    return 2 * p / (p + 1)


def critical_p(n: int) -> Fraction:
    """Sobolev exponent (n+2)/(n-2)."""
    if n < 3:
        raise DomainError("dimension must be at least 3")
    return Fraction(n + 2, n - 2)


def _maybe_zero(x) -> bool:
    if isinstance(x, RatInterval):
        return x.lo <= 0 <= x.hi
    return x == 0


def _nonzero(name, x):
    if _maybe_zero(x):
        raise ZeroDenominatorError(name, x)
    return x


@dataclass(frozen=True)
class ProblemParams:
    n: int
    p: Fraction
    q: Fraction | None = None
    M: Fraction = Fraction(0)
    N: Fraction = Fraction(1)

    def __post_init__(self):
        if self.n < 3:
            raise DomainError("dimension must be at least 3")
        p = to_rational(self.p)
        q = critical_q(p) if self.q is None else to_rational(self.q)
        M, N = to_rational(self.M), to_rational(self.N)
        if not 1 < p <= critical_p(self.n):
            raise DomainError(f"p = {p} outside (1, {critical_p(self.n)}]")
        if q != critical_q(p):
            raise DomainError("q must equal 2p/(p+1)")
        if M < 0:
            raise DomainError("M must be non-negative")
        if N <= 0:
            raise DomainError("N must be positive")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "N", N)

    @classmethod
    def critical(cls, n, M=0):
        return cls(n, critical_p(n), M=M)


@dataclass(frozen=True)
class FrameParams:
    gamma: Fraction
    S: object
    Q: object
    alpha: Fraction
    eps: Fraction = Fraction(0)

    def __post_init__(self):
        g = to_rational(self.gamma)
        if not (g == 0 or g >= 3):
            raise DomainError(f"gamma = {g} not admissible (need 0 or >= 3)")
        eps = to_rational(self.eps)
        if eps < 0:
            raise DomainError("eps must be non-negative")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "alpha", to_rational(self.alpha))
        object.__setattr__(self, "eps", eps)
        for name in ("S", "Q"):
            v = getattr(self, name)
            if isinstance(v, (int, str, float)):
                object.__setattr__(self, name, to_rational(v))

    @classmethod
    def adapted(cls, n, gamma, S, alpha, eps=0):
        """Frame with Q fixed by (n-1)Q + S = 1."""
        return cls(gamma, S, (1 - S) / (n - 1), alpha, eps)

    @classmethod
    def small_gamma(cls, n, p, P, eps=0):
        """gamma = 0, S = Q = 1/n, alpha = -2(p - P)/(n + 2)."""
        p, P = to_rational(p), to_rational(P)
        return cls(0, Fraction(1, n), Fraction(1, n), -2 * (p - P) / (n + 2), eps)

    @classmethod
    def large_gamma(cls, n, eps=0):
        """gamma = n - 4, S the root of b2 = 0, alpha = -gamma - 4/n."""
        gamma = Fraction(n - 4)
        S = solve_S(n, gamma, eps)
        return cls.adapted(n, gamma, S, -gamma - Fraction(4, n), eps)


@dataclass(frozen=True)
class Multipliers:
    P: object = Fraction(0)
    T: object = Fraction(0)
    U: object = Fraction(0)
    eps1: Fraction = Fraction(0)


@dataclass(frozen=True)
class CoefficientSet:
    a1: object
    a2: object
    a3: object
    b1: object
    b2: object
    c2: object
    b3: object
    b4: object
    b5: object
    tau: object
    D: object
    L: object
    B0: object
    Lam: object = field(repr=False, default=None)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class KSet:
    K1: object
    K2: object
    K3: object
    K4: object
    K5: object
    K6: object

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def tau_value(n, S, Q):
    return S * S + (n - 1) * Q * Q - Fraction(1, n)


def b2_value(n, gamma, S, Q, eps):
    D = _nonzero("D", 1 - S * S + gamma * S - gamma * S * S - (n - 1) * Q * Q)
    lam = (1 + gamma * S - eps * tau_value(n, S, Q)) / D
    return gamma + lam * (2 * gamma * S - gamma + 2 * S - 2 * Q) - 2 * eps * (S - Q)


def coefficient_values(n, p, q, gamma, S, Q, alpha, eps) -> CoefficientSet:
    """Raw formulas; arguments may be Fractions, QuadExt or RatIntervals."""
    tau = tau_value(n, S, Q)
    D = _nonzero("D = 1 - S^2 + gS - gS^2 - (n-1)Q^2",
                 1 - S * S + gamma * S - gamma * S * S - (n - 1) * Q * Q)
    L = _nonzero("L = 1 + gS + 2S", 1 + gamma * S + 2 * S)
    gq = _nonzero("gamma + q", gamma + q)
    lam = (1 + gamma * S - eps * tau) / D
    a1 = lam - eps
    a2 = lam * (1 + gamma) - eps
    a3 = -(alpha + p) * (alpha - 1) / L + lam * alpha * (alpha - 1) * (1 - S) / L
    b1 = lam * alpha * (gamma + 3) / L - (alpha + p) * (gamma + 2) / L
    b2 = gamma + lam * (2 * gamma * S - gamma + 2 * S - 2 * Q) - 2 * eps * (S - Q)
    c2 = -q / gq
    b3 = Fraction(0)
    b4 = -p - q * alpha / gq
    b5 = -q / gq
    B0 = a2 + a1 / (n - 1)
    return CoefficientSet(a1, a2, a3, b1, b2, c2, b3, b4, b5, tau, D, L, B0, lam)


def coefficients(prob: ProblemParams, frame: FrameParams) -> CoefficientSet:
    n = prob.n
    rel = (n - 1) * frame.Q + frame.S - 1
    if isinstance(rel, RatInterval):
        if not rel.contains(0):
            raise DomainError("frame violates (n-1)Q + S = 1")
    elif rel != 0:
        raise DomainError("frame violates (n-1)Q + S = 1")
    return coefficient_values(n, prob.p, prob.q, frame.gamma, frame.S, frame.Q,
                              frame.alpha, frame.eps)


def k_values(n, p, q, gamma, S, alpha, co: CoefficientSet, P, T, U) -> KSet:
    B0 = co.B0
    if exact_sign(B0) != 1:
        raise GatingError("B0 must be positive for the K quantities")
    L = co.L
    gS = _nonzero("1 + gS", 1 + gamma * S)
    gqS = _nonzero("1 + gS + qS", 1 + gamma * S + q * S)
    x = T * gamma / gS
    y = U * (gamma + q) / gqS
    bb = co.b1 + P * (gamma + 2) / L
    K1 = co.a3 + P * (alpha - 1) / L - bb * bb / (4 * B0)
    K2 = T - x * x / (4 * B0)
    K3 = co.c2 + U - y * y / (4 * B0)
    K4 = -co.b3 - T * (alpha + p) / gS - P + x * bb / (2 * B0)
    K5 = -co.b4 - P - U * alpha / gqS + bb * y / (2 * B0)
    K6 = co.b5 + T + U - x * y / (2 * B0)
    return KSet(K1, K2, K3, K4, K5, K6)


def k_set(co: CoefficientSet, mult: Multipliers, prob: ProblemParams, frame: FrameParams) -> KSet:
    return k_values(prob.n, prob.p, prob.q, frame.gamma, frame.S, frame.alpha, co,
                    mult.P, mult.T, mult.U)


def square_gap(co: CoefficientSet, mult: Multipliers, prob, frame):
    """The explicit square (x - y)^2 / (4 B0) that K6 - K2 - K3 should equal."""
    g, S, q = frame.gamma, frame.S, prob.q
    x = mult.T * g / (1 + g * S)
    y = mult.U * (g + q) / (1 + g * S + q * S)
    return (x - y) * (x - y) / (4 * co.B0)


def large_gamma_I(U, p_minus_P, n, q, gamma, S, alpha, co: CoefficientSet):
    """I(U, p - P) written out as in the gamma = n - 4 analysis.

    Uses Lam = a1 + eps for the bracket; at eps = 0 this is a1 as displayed.
    """
    L = co.L
    gqS = 1 + gamma * S + q * S
    y = U * (gamma + q) / gqS
    lam = co.a1 if co.Lam is None else co.Lam
    return ((U * (gamma + 2) * (gamma + q) / (2 * co.B0 * L * gqS) - 1) * p_minus_P
            - q * alpha / (gamma + q) + U * alpha / gqS
            - (lam * alpha * (gamma + 3) / L - alpha * (gamma + 2) / L) * y / (2 * co.B0))


@dataclass(frozen=True)
class GateReport:
    gates: dict
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.gates.values())

    def failed(self):
        return [k for k, v in self.gates.items() if not v]


def _positive(x) -> bool:
    return exact_sign(x) == 1


def gate_check(prob: ProblemParams, frame: FrameParams, co: CoefficientSet) -> GateReport:
    g = frame.gamma
    b2 = co.b2
    if isinstance(b2, RatInterval):
        b2_ok = b2.contains(0) and b2.mag() < B2_TOL
    else:
        b2_ok = b2 == 0
    gates = {
        "gamma_admissible": g == 0 or g >= 3,
        "b2_zero": bool(b2_ok),
        "lambda_positive": _positive((1 + g * frame.S) / co.D),
        "B0_positive": _positive(co.B0),
        "alpha_gamma_2_positive": _positive(frame.alpha + g + 2),
    }
    return GateReport(gates, {"b2": b2})


# ---------------------------------------------------------------------------
# the weight S


def _closed_form_S(n, gamma):
    A = (n - 1) * gamma + n
    R = A * A + ((n - 1) * gamma * gamma + n * gamma) * (gamma + 2)
    root = quad(0, 1, R)
    return (gamma + 2) / (A + root)


def solve_S(n: int, gamma, eps=0):
    """Weight S with b2(S) = 0 and Q = (1 - S)/(n - 1).

    gamma = 0 gives 1/n.  For eps = 0 the root of the quadratic is returned
    exactly (QuadExt).  For eps > 0 a bracket is found by bisection on the
    exact rational b2, seeded at the eps = 0 root, and returned as an interval.
    """
    gamma, eps = to_rational(gamma), to_rational(eps)
    if gamma == 0:
        return Fraction(1, n)
    if gamma < 0:
        raise DomainError("solve_S needs gamma >= 0")
    S0 = _closed_form_S(n, gamma)
    if eps == 0:
        return S0

    def f(S):
        return b2_value(n, gamma, S, (1 - S) / (n - 1), eps)

    with workprec(128):
        seed = as_interval(S0).mid
    seed = Fraction(round(seed * 2**64), 2**64)
    f0 = f(seed)
    if f0 == 0:
        return RatInterval.point(seed)
    lo = hi = None
    h = Fraction(1, 10**6)
    while h < seed / 2:
        for cand in (seed - h, seed + h):
            fc = f(cand)
            if fc == 0:
                return RatInterval.point(cand)
            if (fc > 0) != (f0 > 0):
                lo, hi = sorted((seed, cand))
                break
        if lo is not None:
            break
        h *= 10
    if lo is None:
        raise NoRootNearSeed(f"no sign change of b2 near S = {float(seed):.6g} (n={n}, gamma={gamma}, eps={eps})")
    flo = f(lo)
    for _ in range(160):
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return RatInterval.point(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < Fraction(1, 2**110):
            break
    if abs(f((lo + hi) / 2)) >= B2_TOL:
        raise NoRootNearSeed("bisection did not reach |b2| < 1e-12")
    return RatInterval(lo, hi)
