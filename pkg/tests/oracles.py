"""Independent high-precision reference values computed with mpmath.

Nothing here imports the package's arithmetic: roots come from mpmath's
solvers and every formula is evaluated in 50-digit floating point.
"""

import mpmath as mp

mp.mp.dps = 50


def mpf(x):
    x = mp.mpf(x.numerator) / x.denominator if hasattr(x, "numerator") else mp.mpf(x)
    return x


def crit_p(n):
    return mp.mpf(n + 2) / (n - 2)


def crit_q(p):
    return 2 * p / (p + 1)


def m1_uncollapsed(n, p):
    """M1 in the form before the algebraic simplification:
    (q/n)^(1/(p+1)) (p+1) p^(-p/(p+1)) [(n-1)^2 q^2/(4n^2) - q/n]^(-1) [p - (n-1)pq/(n+2)]^(p/(p+1))."""
    p = mpf(p)
    q = crit_q(p)
    return ((q / n) ** (1 / (p + 1)) * (p + 1) / p ** (p / (p + 1))
            / ((n - 1) ** 2 * q**2 / (4 * n**2) - q / n)
            * (p - (n - 1) * p * q / (n + 2)) ** (p / (p + 1)))


def theorem_c(n, p):
    p = mpf(p)
    r = (p - 1) / (p + 1)
    return r**r * (n * (p + 1) ** 2 / (4 * p)) ** (p / (p + 1))


def _coeffs(n, gamma, S, p, q, alpha, eps=0):
    Q = (1 - S) / (n - 1)
    tau = S**2 + (n - 1) * Q**2 - mp.mpf(1) / n
    D = 1 - S**2 + gamma * S - gamma * S**2 - (n - 1) * Q**2
    L = 1 + gamma * S + 2 * S
    lam = (1 + gamma * S - eps * tau) / D
    a1 = lam - eps
    a2 = lam * (1 + gamma) - eps
    a3 = -(alpha + p) * (alpha - 1) / L + lam * alpha * (alpha - 1) * (1 - S) / L
    b1 = lam * alpha * (gamma + 3) / L - (alpha + p) * (gamma + 2) / L
    b2 = gamma + lam * (2 * gamma * S - gamma + 2 * S - 2 * Q) - 2 * eps * (S - Q)
    c2 = -q / (gamma + q)
    b4 = -p - q * alpha / (gamma + q)
    return dict(Q=Q, tau=tau, D=D, L=L, lam=lam, a1=a1, a2=a2, a3=a3, b1=b1, b2=b2, c2=c2,
                b4=b4, b5=c2, B0=a2 + a1 / (n - 1))


def large_gamma_S(n):
    """Root of b2(S) = 0 for gamma = n - 4 found by a bracketing solver."""
    gamma = mp.mpf(n - 4)
    p = crit_p(n)
    f = lambda S: _coeffs(n, gamma, S, p, crit_q(p), -gamma - mp.mpf(4) / n)["b2"]
    # b2 changes sign between 1/n and 1/2 for the frames used here
    return mp.findroot(f, (mp.mpf(1) / n, mp.mpf(1) / 2), solver="anderson")


def large_gamma_values(n, p=None):
    """U0, Delta and M2 for gamma = n - 4 at exponent p (default critical)."""
    gamma = mp.mpf(n - 4)
    p = crit_p(n) if p is None else mpf(p)
    q = crit_q(p)
    alpha = -gamma - mp.mpf(4) / n
    S = large_gamma_S(n)
    co = _coeffs(n, gamma, S, p, q, alpha)
    B0 = co["B0"]
    kappa = (gamma + q) / (1 + gamma * S + q * S)
    Delta = 1 - q * (gamma + q) / (B0 * (1 + gamma * S + q * S) ** 2)
    U0 = 2 * B0 / kappa**2 * (1 - (1 - mp.mpf(2) / n) / mp.sqrt(2))
    K3 = lambda U: co["c2"] + U - (U * kappa) ** 2 / (4 * B0)
    best = None
    for eps in (mp.mpf(10) ** -3, mp.mpf(10) ** -4, mp.mpf(10) ** -6):
        P = p - crit_p(n) + mp.mpf(1) / n**2 + eps
        L = co["L"]
        bb = co["b1"] + P * (gamma + 2) / L
        y = U0 * kappa
        K5 = -co["b4"] - P - U0 * alpha / (1 + gamma * S + q * S) + bb * y / (2 * B0)
        J = (1 - mp.mpf(10) ** -6) * K5 / P
        m2 = (P ** (q / 2) * (q / 2) ** (q / 2) * (2 * J / (2 - q)) ** (-(2 - q) / 2)
              * (co["c2"] + U0) ** (-q / 2))
        best = m2 if best is None else min(best, m2)
    return {"S": S, "U0": U0, "Delta": Delta, "K3_U0": K3(U0), "M2": best, "B0": B0}
