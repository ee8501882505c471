"""Pointwise verification of the weighted Bernstein identities.

A jet is the value, gradient, Hessian and third derivatives of a test
function at one point, written in the adapted frame where the gradient is
(g, 0, ..., 0).  Every divergence (F w)_i is expanded by the chain rule:

    (v^a g^b w)_i = a v^(a-1) g^(b+1) w_1 + b v^a g^(b-1) sum_i v_1i w_i + v^a g^b div w

using d_i g = v_1i in this frame.  Each identity is then evaluated as a pair
(lhs, rhs) and reported as |lhs - rhs| / (1 + |lhs| + |rhs|).

Three arithmetic backends share the same formulas: float64, mpmath at 40
digits, and exact Fractions (only when every exponent that occurs is an
integer).
"""

from __future__ import annotations

import time
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .coefficients import (FrameParams, Multipliers, ProblemParams, coefficient_values,
                           critical_p, k_values, solve_S)
from .errors import DomainError, GatingError
from .exact import QuadExt, RatInterval, to_rational

IDENTITIES = ("i", "ii", "iii", "iv", "v", "vi-a", "vi-b", "vi-c")
FREE_IDENTITIES = ("i", "ii", "iii")
TOL = 1e-9
TOL_EXTENDED = 1e-25
MP_DPS = 40

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One step of splitmix64: returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def trial_seeds(master: int, count: int) -> list[int]:
    """Per-trial seeds: the first `count` outputs of splitmix64(master)."""
    out, state = [], master & _MASK
    for _ in range(count):
        state, z = splitmix64(state)
        out.append(z)
    return out


# -- arithmetic backends -------------------------------------------------------

class _Backend:
    name = "float"

    def c(self, x):
        return float(x)

    def pw(self, x, e):
        return x ** float(e)

    def abs(self, x):
        return abs(x)


class _MpBackend(_Backend):
    name = "mpmath"

    def c(self, x):
        if isinstance(x, QuadExt):
            return self.c(x.a) + self.c(x.b) * mpmath.sqrt(self.c(x.d))
        if isinstance(x, RatInterval):
            return self.c(x.mid)
        if isinstance(x, (Fraction, int)):
            x = Fraction(x)
            return mpmath.mpf(x.numerator) / x.denominator
        return mpmath.mpf(x)

    def pw(self, x, e):
        return mpmath.power(x, self.c(e))


class _Irrational:
    """Placeholder for a power with non-integer exponent in the exact backend.

    Products propagate it; only multiplication by an exact zero (the M = 0
    terms) turns it back into a number, and any sum containing it fails.
    """

    def __init__(self, desc):
        self.desc = desc

    def __mul__(self, other):
        if not isinstance(other, _Irrational) and other == 0:
            return Fraction(0)
        return self

    __rmul__ = __mul__

    def _fail(self, *_):
        raise DomainError(f"{self.desc} is not rational")

    __add__ = __radd__ = __sub__ = __rsub__ = __truediv__ = __rtruediv__ = _fail
    __neg__ = __abs__ = _fail


class _ExactBackend(_Backend):
    name = "exact"

    def c(self, x):
        if isinstance(x, QuadExt):
            if x.b != 0:
                raise DomainError("irrational frame value in exact backend")
            return x.a
        if isinstance(x, RatInterval):
            if x.lo != x.hi:
                raise DomainError("interval frame value in exact backend")
            return x.lo
        if isinstance(x, float):
            raise DomainError("float in exact backend")
        return Fraction(x)

    def pw(self, x, e):
        e = Fraction(e)
        if e.denominator != 1:
            return _Irrational(f"power with exponent {e}")
        return x ** int(e)


BACKENDS = {"float": _Backend(), "mpmath": _MpBackend(), "exact": _ExactBackend()}


# -- jets ---------------------------------------------------------------------

@dataclass
class Jet3:
    n: int
    v: object
    g: object
    hessian: np.ndarray
    third: np.ndarray
    mode: str = "free"

    def __post_init__(self):
        H, T = self.hessian, self.third
        if H.shape != (self.n, self.n) or T.shape != (self.n,) * 3:
            raise ValueError("jet arrays have the wrong shape")
        if not np.array_equal(H, H.T):
            raise ValueError("hessian must be symmetric")
        for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
            if not np.array_equal(T, T.transpose(perm)):
                raise ValueError("third derivatives must be fully symmetric")

    @property
    def laplacian(self):
        return self.hessian.trace()

    def trace3(self, j):
        """sum_k v_kkj."""
        k = np.arange(self.n)
        return self.third[k, k, j].sum()

    def convert(self, backend: str) -> "Jet3":
        be = BACKENDS[backend]
        conv = np.vectorize(be.c, otypes=[object])
        return Jet3(self.n, be.c(self.v), be.c(self.g), conv(self.hessian),
                    conv(self.third), self.mode)

    def scaled(self, k, p) -> "Jet3":
        """Jet of k^beta u(k x) at the origin, beta = 2/(p - 1)."""
        beta = 2 / (float(p) - 1)
        k = float(k)
        return Jet3(self.n, float(self.v) * k**beta, float(self.g) * k**(beta + 1),
                    self.hessian.astype(float) * k**(beta + 2),
                    self.third.astype(float) * k**(beta + 3), self.mode)

    def polynomial(self):
        """Cubic Taylor polynomial with this jet at 0, returned as callables
        for value, gradient, Hessian and third derivatives at a point x."""
        v, g = float(self.v), float(self.g)
        H, T = self.hessian.astype(float), self.third.astype(float)
        e1 = np.zeros(self.n)
        e1[0] = g

        def grad(x):
            return e1 + H @ x + 0.5 * np.einsum("ijk,j,k->i", T, x, x)

        def hess(x):
            return H + np.einsum("ijk,k->ij", T, x)

        def value(x):
            return v + e1 @ x + 0.5 * x @ H @ x + np.einsum("ijk,i,j,k->", T, x, x, x) / 6

        return value, grad, hess


def _sym3(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    idx = np.sort(np.indices((n, n, n)).reshape(3, -1), axis=0)
    return A[idx[0], idx[1], idx[2]].reshape(n, n, n)


def sample_jet(seed: int, n: int, mode: str = "free", prob: ProblemParams | None = None,
               exact: bool = False) -> Jet3:
    """Random jet in the adapted frame.

    Entries are uniform on [-1, 1]; v and g are shifted to [0.5, 1.5].  In
    "pde" mode v_11 is solved from the trace constraint and v_11j from the
    differentiated equation.  With exact=True entries are multiples of 1/1000
    held as Fractions.
    """
    if n < 3:
        raise DomainError("dimension must be at least 3")
    if mode not in ("free", "pde"):
        raise ValueError(f"unknown jet mode {mode!r}")
    rng = np.random.default_rng(seed)
    if exact:
        draw = lambda size: np.vectorize(lambda k: Fraction(int(k), 1000), otypes=[object])(
            rng.integers(-1000, 1001, size=size))
        half = Fraction(1, 2)
    else:
        draw = lambda size: rng.uniform(-1.0, 1.0, size=size)
        half = 0.5
    v, g = (1 + half * x for x in draw(2))
    A = draw((n, n))
    H = np.triu(A) + np.triu(A, 1).T
    T = _sym3(draw((n, n, n)))
    if exact:
        H = np.array(H, dtype=object)
    jet = Jet3(n, v, g, H, T, mode)
    if mode == "pde":
        if prob is None:
            raise ValueError("pde mode needs problem parameters")
        _impose_pde(jet, prob, BACKENDS["exact" if exact else "float"])
    return jet


def _impose_pde(jet: Jet3, prob: ProblemParams, be) -> None:
    n, v, g, H, T = jet.n, jet.v, jet.g, jet.hessian, jet.third
    p, q, M, N = (be.c(x) for x in (prob.p, prob.q, prob.M, prob.N))
    gq1 = be.pw(g, prob.q - 1) if prob.M else 0
    gq = gq1 * g
    H[0, 0] = -N * be.pw(v, prob.p) - M * gq - sum(H[i, i] for i in range(1, n))
    for j in range(1, n):
        val = -q * M * gq1 * H[0, j] - sum(T[k, k, j] for k in range(1, n))
        for idx in ((0, 0, j), (0, j, 0), (j, 0, 0)):
            T[idx] = val
    T[0, 0, 0] = (-p * N * be.pw(v, prob.p - 1) * g - q * M * gq1 * H[0, 0]
                  - sum(T[k, k, 0] for k in range(1, n)))
    jet.mode = "pde"


def pde_residuals(jet: Jet3, prob: ProblemParams) -> list[float]:
    """Trace constraint followed by the n differentiated-equation residuals."""
    v, g, H = float(jet.v), float(jet.g), jet.hessian.astype(float)
    p, q, M, N = (float(x) for x in (prob.p, prob.q, prob.M, prob.N))
    out = [float(jet.laplacian) + N * v**p + M * g**q]
    for j in range(jet.n):
        rhs = -q * M * g ** (q - 1) * H[0, j]
        if j == 0:
            rhs -= p * N * v ** (p - 1) * g
        out.append(float(jet.trace3(j)) - rhs)
    return out


# -- divergence terms -----------------------------------------------------------

@dataclass
class DivergenceBundle:
    A: object       # (v^a g^c lap v_i)_i
    E: object       # (v^a g^c E_ij v_j)_i
    grad_low: object   # (v^(a-1) g^(c+2) v_i)_i
    grad_q: object     # (v^a g^(c+q) v_i)_i
    grad_p: object     # (v^(a+p) g^c v_i)_i
    W: object = None

    def as_dict(self):
        return {k: getattr(self, k) for k in ("A", "E", "grad_low", "grad_q", "grad_p", "W")}


def _div(be, jet, a, b, w, divw):
    """(v^a g^b w)_i at the point; w is the vector field value, divw its divergence."""
    v, g, H = jet.v, jet.g, jet.hessian
    Hw = (H[0] * w).sum()
    return (be.c(a) * be.pw(v, a - 1) * be.pw(g, b + 1) * w[0]
            + be.c(b) * be.pw(v, a) * be.pw(g, b - 1) * Hw
            + be.pw(v, a) * be.pw(g, b) * divw)


def divergences(jet: Jet3, alpha, gamma, prob: ProblemParams, backend: str = "float"):
    be = BACKENDS[backend]
    n, g, H = jet.n, jet.g, jet.hessian
    alpha, gamma = to_rational(alpha), to_rational(gamma)
    p, q = prob.p, prob.q
    if backend != "exact":
        alpha, gamma, p, q = (be.c(x) for x in (alpha, gamma, p, q))
    lap = jet.laplacian
    grad = np.zeros(n, dtype=H.dtype)
    grad[0] = g
    E = _e_tensor(jet)
    tr = jet.trace3(0)
    A = _div(be, jet, alpha, gamma, grad * lap, g * tr + lap * lap)
    divE = (1 - be.c(Fraction(1, n))) * g * tr + (E * H).sum()
    Et = _div(be, jet, alpha, gamma, E[:, 0] * g, divE)
    return DivergenceBundle(
        A, Et,
        _div(be, jet, alpha - 1, gamma + 2, grad, lap),
        _div(be, jet, alpha, gamma + q, grad, lap) if prob.M or backend != "exact" else 0,
        _div(be, jet, alpha + p, gamma, grad, lap),
    )


def _e_tensor(jet):
    E = jet.hessian.copy()
    lap = jet.laplacian
    for i in range(jet.n):
        E[i, i] = E[i, i] - lap / jet.n
    return E


def _g_tensor(jet, S, Q):
    G = jet.hessian.copy()
    lap = jet.laplacian
    G[0, 0] = G[0, 0] - S * lap
    for i in range(1, jet.n):
        G[i, i] = G[i, i] - Q * lap
    return G


def oracle_divergences(jet: Jet3, alpha, gamma, prob: ProblemParams, h: float = 1e-5):
    """Divergences by Richardson-extrapolated central differences of the
    explicit vector fields built from the jet's cubic Taylor polynomial."""
    n = jet.n
    a, c = float(alpha), float(gamma)
    p, q = float(prob.p), float(prob.q)
    value, grad, hess = jet.polynomial()

    def fields(x):
        u, du, D2 = value(x), grad(x), hess(x)
        gn = np.linalg.norm(du)
        lap = np.trace(D2)
        E = D2 - lap / n * np.eye(n)
        base = u**a * gn**c
        return {
            "A": base * lap * du,
            "E": base * (E @ du),
            "grad_low": u ** (a - 1) * gn ** (c + 2) * du,
            "grad_q": base * gn**q * du,
            "grad_p": u ** (a + p) * gn**c * du,
        }

    def central(step):
        out = dict.fromkeys(("A", "E", "grad_low", "grad_q", "grad_p"), 0.0)
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            fp, fm = fields(e), fields(-e)
            for k in out:
                out[k] += (fp[k][i] - fm[k][i]) / (2 * step)
        return out

    d1, d2 = central(h), central(h / 2)
    return {k: (4 * d2[k] - d1[k]) / 3 for k in d1}


# -- identities -------------------------------------------------------------------

@dataclass
class _Env:
    be: object
    jet: Jet3
    n: int
    v: object
    g: object
    lap: object
    alpha: Fraction
    gamma: Fraction
    p: Fraction
    q: Fraction
    M: object
    N: object
    S: object
    Q: object
    eps: object
    co: object
    div: DivergenceBundle
    G: np.ndarray
    E: np.ndarray

    def mono(self, a, b):
        return self.be.pw(self.v, a) * self.be.pw(self.g, b)


@lru_cache(maxsize=256)
def _frame_constants(backend, n, p, q, gamma, alpha, frame):
    be = BACKENDS[backend]
    S, Q, eps = be.c(frame.S), be.c(frame.Q), be.c(frame.eps)
    co = coefficient_values(n, be.c(p), be.c(q), be.c(gamma), S, Q, be.c(alpha), eps)
    return S, Q, eps, co


@lru_cache(maxsize=64)
def _exact_co(n, p, q, frame):
    return coefficient_values(n, p, q, frame.gamma, frame.S, frame.Q, frame.alpha, frame.eps)


@lru_cache(maxsize=1024)
def _exact_k(n, p, q, frame, mult):
    co = _exact_co(n, p, q, frame)
    K = k_values(n, p, q, frame.gamma, frame.S, frame.alpha, co, mult.P, mult.T, mult.U)
    return [float(k) for k in (K.K1, K.K2, K.K3, K.K4, K.K5, K.K6)]


def _env(jet, alpha, gamma, prob, frame, backend):
    if float(jet.v) <= 0:
        raise DomainError("v must be positive")
    if float(jet.g) == 0:
        raise DomainError("the gradient must not vanish")
    be = BACKENDS[backend]
    if backend != "float" or jet.hessian.dtype == object:
        jet = jet.convert(backend)
        if jet.mode == "pde" and backend == "mpmath":
            # re-solve the constrained entries at working precision
            _impose_pde(jet, prob, be)
    alpha, gamma = to_rational(alpha), to_rational(gamma)
    n = jet.n
    if backend == "mpmath":
        S, Q, eps, co = _frame_constants.__wrapped__(backend, n, prob.p, prob.q, gamma, alpha,
                                                     frame)
    else:
        S, Q, eps, co = _frame_constants(backend, n, prob.p, prob.q, gamma, alpha, frame)
    div = divergences(jet, alpha, gamma, prob, backend)
    p, q = prob.p, prob.q
    if backend != "exact":
        alpha, gamma, p, q = (be.c(x) for x in (alpha, gamma, p, q))
    return _Env(be, jet, n, jet.v, jet.g, jet.laplacian, alpha, gamma, p, q,
                be.c(prob.M), be.c(prob.N), S, Q, eps, co, div, _g_tensor(jet, S, Q),
                _e_tensor(jet))


def _sq_sum(A, rows=None, cols=None, skip_11=False):
    """Sum of squares over a block; skip_11 drops the (1,1) entry."""
    B = A if rows is None else A[list(rows)]
    B = B if cols is None else B[:, list(cols)]
    tot = (B * B).sum()
    return tot - A[0, 0] * A[0, 0] if skip_11 else tot


def _identity_i(e: _Env):
    c = e.be.c
    a, gm = e.alpha, e.gamma
    L = 1 + c(gm) * e.S + 2 * e.S
    lhs = e.mono(a - 1, gm + 2) * e.lap
    rhs = (e.div.grad_low / L - c(a - 1) / L * e.mono(a - 2, gm + 4)
           - c(gm + 2) / L * e.mono(a - 1, gm + 2) * e.G[0, 0])
    return lhs, rhs


def _ii_terms(e: _Env, g11_base):
    """Right-hand side terms of the D-identity (everything except D w lap^2)."""
    c = e.be.c
    a, gm, S, Q, n = e.alpha, e.gamma, e.S, e.Q, e.n
    L = 1 + c(gm) * S + 2 * S
    w = e.mono(a, gm)
    base = e.mono(a if g11_base == "alpha" else gm, gm)
    G = e.G
    return [
        (1 - c(Fraction(1, n))) * e.div.A - e.div.E + c(a) * (S - 1) / L * e.div.grad_low,
        w * _sq_sum(G, skip_11=True),
        c(a * (a - 1)) * (1 - S) / L * e.mono(a - 2, gm + 4),
        c(a * (gm + 3)) / L * e.mono(a - 1, gm + 2) * G[0, 0],
        (2 * c(gm) * S - c(gm) + 2 * S - 2 * Q) * w * G[0, 0] * e.lap,
        c(1 + gm) * base * G[0, 0] ** 2,
        c(gm) * w * _sq_sum(G, rows=range(1, n), cols=[0]),
    ]


def _identity_ii(e: _Env, g11_base="alpha"):
    lhs = e.co.D * e.mono(e.alpha, e.gamma) * e.lap ** 2
    return lhs, sum(_ii_terms(e, g11_base))


def _identity_iii(e: _Env):
    tau = e.co.tau
    lhs = _sq_sum(e.E)
    rhs = _sq_sum(e.G) + 2 * (e.S - e.Q) * e.G[0, 0] * e.lap + tau * e.lap ** 2
    return lhs, rhs


def _iv_terms(e: _Env):
    """Right-hand side of the eps-shifted (1 + gS) identity."""
    c = e.be.c
    a, gm, p, q = e.alpha, e.gamma, e.p, e.q
    S, M, N = e.S, e.M, e.N
    L = 1 + c(gm) * S + 2 * S
    gq = c(gm + q)
    w = e.mono(a, gm)
    G11 = e.G[0, 0]
    return [
        -e.div.A + c(a + p) / L * e.div.grad_low - c(q) * M / gq * e.div.grad_q,
        c(gm) * w * G11 * e.lap,
        -c(a + p) * c(gm + 2) / L * e.mono(a - 1, gm + 2) * G11,
        -c(a + p) * c(a - 1) / L * e.mono(a - 2, gm + 4),
        -c(q) / gq * M * M * e.mono(a, gm + 2 * q),
        (c(p) + c(q * a) / gq) * M * e.mono(a - 1, gm + q + 2),
        -c(q) / gq * M * N * e.mono(a + p, gm + q),
        e.eps * w * (_sq_sum(e.E) - _sq_sum(e.G) - 2 * (S - e.Q) * G11 * e.lap),
    ]


def _identity_iv(e: _Env):
    c = e.be.c
    lhs = -(1 + c(e.gamma) * e.S - e.eps * e.co.tau) * e.mono(e.alpha, e.gamma) * e.lap ** 2
    return lhs, sum(_iv_terms(e))


def master_terms(e: _Env, g11_base="alpha", sum_form="corrected"):
    """Named terms of the collected master identity 0 = sum(terms)."""
    c = e.be.c
    a, gm, p, q = e.alpha, e.gamma, e.p, e.q
    co, M, N, n = e.co, e.M, e.N, e.n
    lam = co.Lam
    w = e.mono(a, gm)
    G = e.G
    G11 = G[0, 0]
    base = e.mono(a if g11_base == "alpha" else gm, gm)
    if sum_form == "corrected":
        g_terms = (lam * c(1 + gm) * base - e.eps * w) * G11 ** 2 \
            + lam * c(gm) * w * _sq_sum(G, rows=[0], cols=range(1, n))
    elif sum_form == "literal":
        g_terms = (lam * c(1 + gm) * base - e.eps * w) * G11 ** 2 \
            + co.a2 * w * _sq_sum(G, rows=[0], cols=range(1, n))
    else:
        raise ValueError(f"unknown master form {sum_form!r}")
    return {
        "W": e.div.W,
        "epsE2": e.eps * w * _sq_sum(e.E),
        "a1": co.a1 * w * _sq_sum(G, skip_11=True),
        "G1i": g_terms,
        "a3": co.a3 * e.mono(a - 2, gm + 4),
        "b1": co.b1 * e.mono(a - 1, gm + 2) * G11,
        "b2": co.b2 * w * G11 * e.lap,
        "c2": co.c2 * M * M * e.mono(a, gm + 2 * q),
        "b3": -co.b3 * N * e.mono(a + p - 1, gm + 2),
        "b4": -co.b4 * M * e.mono(a - 1, gm + q + 2),
        "b5": co.b5 * M * N * e.mono(a + p, gm + q),
    }


def _aggregate_W(e: _Env):
    c = e.be.c
    a, q, S = e.alpha, e.q, e.S
    lam, L = e.co.Lam, e.co.L
    d = e.div
    d.W = ((lam * (1 - c(Fraction(1, e.n))) - 1) * d.A - lam * d.E
           + (c(a + e.p) + lam * c(a) * (S - 1)) / L * d.grad_low
           - c(q) * e.M / c(e.gamma + q) * d.grad_q)
    return d.W


def _identity_v(e: _Env, g11_base="alpha", sum_form="corrected", form="collected"):
    _aggregate_W(e)
    if form == "expanded":
        # sum of the eps-shifted (1 + gS) identity and lam times the D-identity,
        # with the lap^2 terms cancelled
        lhs = -(sum(_iv_terms(e)))
        rhs = e.co.Lam * sum(_ii_terms(e, g11_base))
        return lhs, rhs
    t = master_terms(e, g11_base, sum_form)
    W = t.pop("W")
    return W, -sum(t.values())


def _identity_vi(e: _Env, which):
    c = e.be.c
    a, gm, p, q, S, M, N = e.alpha, e.gamma, e.p, e.q, e.S, e.M, e.N
    G11 = e.G[0, 0]
    if which == "a":
        k = 1 + c(gm) * S
        lhs = N * N * e.mono(a + 2 * p, gm) + M * N * e.mono(a + p, gm + q)
        rhs = (-N / k * e.div.grad_p + c(a + p) / k * N * e.mono(a + p - 1, gm + 2)
               + c(gm) / k * N * e.mono(a + p, gm) * G11)
    elif which == "b":
        k = 1 + c(gm) * S + c(q) * S
        lhs = M * M * e.mono(a, gm + 2 * q) + M * N * e.mono(a + p, gm + q)
        rhs = (-M / k * e.div.grad_q + c(a) * M / k * e.mono(a - 1, gm + q + 2)
               + c(gm + q) * M / k * e.mono(a, gm + q) * G11)
    else:
        L = e.co.L
        lhs = -M * e.mono(a - 1, gm + q + 2)
        rhs = (e.div.grad_low / L - c(a - 1) / L * e.mono(a - 2, gm + 4)
               - c(gm + 2) / L * e.mono(a - 1, gm + 2) * G11 + N * e.mono(a + p - 1, gm + 2))
    return lhs, rhs


def identity_sides(identity_id, jet, alpha, gamma, prob, frame, backend="float",
                   g11_base="alpha", sum_form="corrected", form="collected"):
    """(lhs, rhs) of one identity in the chosen backend."""
    if identity_id not in IDENTITIES:
        raise ValueError(f"unknown identity {identity_id!r}")
    if identity_id not in FREE_IDENTITIES and jet.mode != "pde":
        # allowed, but the result is only meaningful as a negative control
        pass
    e = _env(jet, alpha, gamma, prob, frame, backend)
    if identity_id == "i":
        return _identity_i(e)
    if identity_id == "ii":
        return _identity_ii(e, g11_base)
    if identity_id == "iii":
        return _identity_iii(e)
    if identity_id == "iv":
        return _identity_iv(e)
    if identity_id == "v":
        return _identity_v(e, g11_base, sum_form, form)
    return _identity_vi(e, identity_id[-1])


def relative_residual(lhs, rhs):
    return abs(lhs - rhs) / (1 + abs(lhs) + abs(rhs))


def residual(identity_id, jet, alpha, gamma, prob, frame, backend="float", **flags):
    """|lhs - rhs| / (1 + |lhs| + |rhs|) for one identity.

    flags: g11_base ("alpha" or "gamma") selects the base of the (1 + gamma)
    G11^2 term; sum_form ("corrected" or "literal") selects the collected
    G_1i^2 coefficient; form ("collected" or "expanded") applies to (v).
    """
    if backend == "mpmath":
        with mpmath.workdps(MP_DPS):
            return relative_residual(*identity_sides(identity_id, jet, alpha, gamma, prob,
                                                     frame, backend, **flags))
    return relative_residual(*identity_sides(identity_id, jet, alpha, gamma, prob, frame,
                                             backend, **flags))


# -- inequalities and invariants -----------------------------------------------------

def cauchy_schwarz_gap(jet: Jet3, frame: FrameParams) -> float:
    """(n-1) sum_{i>1} G_ii^2 - G_11^2, which must be >= 0."""
    n = jet.n
    G = _g_tensor(jet.convert("float") if jet.hessian.dtype == object else jet,
                  float(frame.S), float(frame.Q))
    return (n - 1) * sum(G[i, i] ** 2 for i in range(1, n)) - G[0, 0] ** 2


def trace_invariants(jet: Jet3, frame: FrameParams, backend="float"):
    """(G_11 + sum_{i>1} G_ii, trace E); both vanish when (n-1)Q + S = 1."""
    be = BACKENDS[backend]
    j = jet.convert(backend) if backend != "float" or jet.hessian.dtype == object else jet
    G = _g_tensor(j, be.c(frame.S), be.c(frame.Q))
    E = _e_tensor(j)
    return sum(G[i, i] for i in range(j.n)), sum(E[i, i] for i in range(j.n))


@dataclass
class StructureCheck:
    value: float     # W_tot + eps w E^2 + sum K_i X_i, must be <= 0
    scale: float
    gap: float       # the dropped nonnegative part, value + gap == 0
    ok: bool


def structure_inequality(jet: Jet3, prob: ProblemParams, frame: FrameParams,
                         mult: Multipliers) -> StructureCheck:
    """The inequality left after the Cauchy-Schwarz step and completing the
    square in G_11:

        0 >= W_tot + eps v^a g^c E^2 + sum K_i X_i

    where W_tot adds the divergences of the three multiplied-equation
    identities (weights T, U, P) to W.  Needs a1 >= 0, lam*gamma >= 0,
    B0 > 0 and b2 = 0.
    """
    e = _env(jet, frame.alpha, frame.gamma, prob, frame, "float")
    co = e.co
    if co.a1 < 0 or co.Lam * float(frame.gamma) < 0 or co.B0 <= 0:
        raise GatingError("structure inequality needs a1 >= 0, lam*gamma >= 0, B0 > 0")
    if abs(co.b2) > 1e-12:
        raise GatingError(f"structure inequality needs b2 = 0 (b2 = {co.b2:.3g})")
    P, T, U = float(mult.P), float(mult.T), float(mult.U)
    a, gm, p, q = e.alpha, e.gamma, e.p, e.q
    S, M, N = e.S, e.M, e.N
    Ks = _exact_k(e.n, prob.p, prob.q, frame, mult)
    W = _aggregate_W(e)
    d = e.div
    W_tot = (W + N * T / (1 + float(gm) * S) * d.grad_p
             + U * M / (1 + float(gm) * S + float(q) * S) * d.grad_q - P / co.L * d.grad_low)
    X = [e.mono(a - 2, gm + 4), N * N * e.mono(a + 2 * p, gm), M * M * e.mono(a, gm + 2 * q),
         N * e.mono(a + p - 1, gm + 2), M * e.mono(a - 1, gm + q + 2),
         M * N * e.mono(a + p, gm + q)]
    w = e.mono(a, gm)
    value = W_tot + e.eps * w * _sq_sum(e.E) + sum(k * x for k, x in zip(Ks, X))
    t = master_terms(e)
    G, G11, n = e.G, e.G[0, 0], e.n
    lin = (co.b1 + P * (float(gm) + 2) / co.L) * e.mono(a - 1, gm + 2) \
        - T * float(gm) / (1 + float(gm) * S) * N * e.mono(a + p, gm) \
        - U * (float(gm) + float(q)) / (1 + float(gm) * S + float(q) * S) * M * e.mono(a, gm + q)
    quad_full = t["a1"] + t["G1i"]
    gap = (quad_full - co.B0 * w * G11 ** 2) + w * co.B0 * (G11 + lin / (2 * co.B0 * w)) ** 2
    scale = 1 + sum(abs(x) for x in t.values()) + abs(W_tot)
    ok = value <= TOL * scale and abs(value + gap) <= TOL * scale
    return StructureCheck(value, scale, gap, ok)


def scaling_coherence(jet: Jet3, prob: ProblemParams, frame: FrameParams, k,
                      q_override=None) -> dict:
    """Master-identity terms on the jet and its T_k image.

    Returns the sign agreement and the spread of log ratios term_k / term over
    the nonzero terms; for the critical q every ratio is the same power of k.
    """
    if q_override is not None:
        prob = _with_q(prob, q_override)
    e0 = _env(jet, frame.alpha, frame.gamma, prob, frame, "float")
    _aggregate_W(e0)
    t0 = master_terms(e0)
    ek = _env(jet.scaled(k, prob.p), frame.alpha, frame.gamma, prob, frame, "float")
    _aggregate_W(ek)
    tk = master_terms(ek)
    signs, logs = True, []
    for key, x in t0.items():
        y = tk[key]
        if abs(x) < 1e-14:
            continue
        signs = signs and np.sign(x) == np.sign(y)
        if y != 0:
            logs.append(np.log(abs(y / x)))
    spread = max(logs) - min(logs) if logs else 0.0
    return {"signs_agree": bool(signs), "log_ratio_spread": float(spread),
            "argmax_same": max(t0, key=lambda s: abs(t0[s])) == max(tk, key=lambda s: abs(tk[s]))}


class _LooseProblem:
    """Problem parameters with a non-critical q, used only as a control."""

    def __init__(self, prob, q):
        self.n, self.p, self.M, self.N = prob.n, prob.p, prob.M, prob.N
        self.q = to_rational(q)


def _with_q(prob, q):
    return _LooseProblem(prob, q)


# -- suite -------------------------------------------------------------------------

def suite_frame(n: int, choice: str, prob: ProblemParams) -> FrameParams:
    """Frames used by the suite.

    small-gamma: gamma = 0, S = Q = 1/n, alpha = -2(p - 10^-4)/(n + 2).
    large-gamma: gamma = max(3, n - 4), S the root of b2 = 0, alpha = -gamma - 4/n.
    """
    if choice == "small-gamma":
        return FrameParams.small_gamma(n, prob.p, Fraction(1, 10**4))
    if choice == "large-gamma":
        gamma = Fraction(max(3, n - 4))
        return FrameParams.adapted(n, gamma, solve_S(n, gamma), -gamma - Fraction(4, n))
    raise ValueError(f"unknown frame choice {choice!r}")


@dataclass
class SuiteConfig:
    n: int
    frame: str
    max_residual: dict = field(default_factory=dict)
    structure_ok: bool = True
    cauchy_schwarz_ok: bool = True
    invariants_max: float = 0.0
    negative_control_min: float = float("inf")

    @property
    def passed(self):
        return (all(r < TOL for r in self.max_residual.values()) and self.structure_ok
                and self.cauchy_schwarz_ok and self.invariants_max < TOL)


@dataclass
class SuiteSummary:
    trials: int
    seed: int
    configs: list
    toggle: dict
    negative_control: dict
    seconds: float

    @property
    def passed(self):
        return all(c.passed for c in self.configs)

    def to_dict(self):
        """Plain data without timings, so equal runs serialize identically."""
        return {
            "trials": self.trials, "seed": self.seed, "passed": bool(self.passed),
            "configs": [{"n": c.n, "frame": c.frame, "passed": bool(c.passed),
                         "max_residual": {k: float(r) for k, r in c.max_residual.items()},
                         "structure_ok": bool(c.structure_ok),
                         "cauchy_schwarz_ok": bool(c.cauchy_schwarz_ok),
                         "invariants_max": float(c.invariants_max)} for c in self.configs],
            "toggle": {k: {kk: (bool(x) if kk == "passes" else float(x)) for kk, x in d.items()}
                       for k, d in self.toggle.items()},
            "negative_control": {k: float(x) for k, x in self.negative_control.items()},
        }


def _config_run(n, choice, seeds, M):
    prob = ProblemParams(n, critical_p(n), M=M)
    frame = suite_frame(n, choice, prob)
    alpha, gamma = frame.alpha, frame.gamma
    cfg = SuiteConfig(n, choice, {k: 0.0 for k in IDENTITIES})
    neg = []
    for s in seeds:
        free = sample_jet(s, n, "free", prob)
        pde = sample_jet(s, n, "pde", prob)
        for ident in IDENTITIES:
            jet = free if ident in FREE_IDENTITIES else pde
            r = residual(ident, jet, alpha, gamma, prob, frame)
            cfg.max_residual[ident] = max(cfg.max_residual[ident], r)
        neg.append(residual("v", free, alpha, gamma, prob, frame))
        rng = np.random.default_rng(s ^ 0x5DEECE66D)
        mult = Multipliers(*(Fraction(int(x), 2) for x in rng.integers(0, 3, 3)))
        chk = structure_inequality(pde, prob, frame, mult)
        cfg.structure_ok = cfg.structure_ok and chk.ok
        cfg.cauchy_schwarz_ok = cfg.cauchy_schwarz_ok and cauchy_schwarz_gap(free, frame) >= -1e-12
        inv = trace_invariants(free, frame)
        cfg.invariants_max = max(cfg.invariants_max, *(abs(x) for x in inv))
    cfg.negative_control_min = min(neg)
    return cfg, neg


def disambiguation(trials=20, seed=0, n=7, M=1, p=Fraction(9, 5)):
    """Evaluate the D-identity and the master identity under both readings of
    the base of the (1 + gamma) G11^2 term, and under both collected forms."""
    prob = ProblemParams(n, p, M=M)
    frame = suite_frame(n, "large-gamma", prob)
    out = {}
    for base in ("alpha", "gamma"):
        worst_ii = worst_v = 0.0
        for s in trial_seeds(seed, trials):
            worst_ii = max(worst_ii, residual("ii", sample_jet(s, n, "free"), frame.alpha,
                                              frame.gamma, prob, frame, g11_base=base))
            worst_v = max(worst_v, residual("v", sample_jet(s, n, "pde", prob), frame.alpha,
                                            frame.gamma, prob, frame, g11_base=base,
                                            form="expanded"))
        out[f"g11_base={base}"] = {"ii": worst_ii, "v": worst_v,
                                   "passes": worst_ii < TOL and worst_v < TOL}
    for form in ("corrected", "literal"):
        worst = max(residual("v", sample_jet(s, n, "pde", prob), frame.alpha, frame.gamma,
                             prob, frame, sum_form=form)
                    for s in trial_seeds(seed, trials))
        out[f"sum_form={form}"] = {"v": worst, "passes": worst < TOL}
    return out


def run_suite(trials=1000, seed=0, dims=(3, 5, 7, 10), frames=("small-gamma", "large-gamma"),
              M=1, jobs=1) -> SuiteSummary:
    """Every identity on `trials` jets per (dimension, frame) configuration."""
    start = time.perf_counter()
    seeds = trial_seeds(seed, trials)
    tasks = [(n, f, seeds, M) for n in dims for f in frames]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_config_run, *zip(*tasks)))
    else:
        results = [_config_run(*t) for t in tasks]
    configs = [r[0] for r in results]
    negs = [x for r in results for x in r[1]]
    negative = {"min": min(negs), "median": float(np.median(negs)),
                "fraction_above_1e-3": sum(x > 1e-3 for x in negs) / len(negs)}
    toggle = disambiguation(min(trials, 20), seed)
    return SuiteSummary(trials, seed, configs, toggle, negative, time.perf_counter() - start)
