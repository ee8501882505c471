"""Exponent bookkeeping for the three-factor Young inequality used in the
cutoff argument.

For a frame (n, alpha, gamma, p) we need p1, q1, sigma1 > 0 with
1/p1 + 1/q1 + 1/sigma1 = 1, where

    (alpha + 2p)/A = gamma/B = p1,   (alpha - 2)/(alpha - A) = (gamma + 4)/(gamma + 2 - B) = q1,

and the integrability window 1 - 2/n < 1/p1 + 1/q1 < 1 (equivalently
n - 2 sigma1 < 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .coefficients import critical_p
from .exact import to_rational


@dataclass(frozen=True)
class YoungExponents:
    p1: Fraction
    q1: Fraction
    sigma1: Fraction
    A: Fraction
    B: Fraction
    G: Fraction
    delta: int
    feasible: bool = field(default=True, init=False)

    def relations_hold(self, alpha, gamma, p) -> bool:
        """Re-derive p1 and q1 from A and B and check the defining ratios."""
        alpha, gamma, p = map(to_rational, (alpha, gamma, p))
        ok = (alpha + 2 * p) / self.A == self.p1
        if gamma > 0:
            ok = ok and gamma / self.B == self.p1
        ok = ok and (alpha - 2) / (alpha - self.A) == self.q1
        ok = ok and (gamma + 4) / (gamma + 2 - self.B) == self.q1
        return ok and 1 / self.p1 + 1 / self.q1 + 1 / self.sigma1 == 1


@dataclass(frozen=True)
class Infeasible:
    constraint: str
    detail: str
    values: dict = field(default_factory=dict)
    feasible: bool = field(default=False, init=False)


def g_closed_form(alpha, gamma, p):
    """((gamma+2)p + 2alpha + gamma + 2) / ((gamma+4)p + 2alpha + gamma)."""
    return ((gamma + 2) * p + 2 * alpha + gamma + 2) / ((gamma + 4) * p + 2 * alpha + gamma)


def b_closed_form(alpha, gamma, p):
    return gamma * (alpha + gamma + 2) / ((gamma + 4) * p + 2 * alpha + gamma)


def exponents(n: int, alpha, gamma, p):
    alpha, gamma, p = map(to_rational, (alpha, gamma, p))
    if gamma == 0:
        if alpha + 2 * p <= 0:
            return Infeasible("alpha+2p>0", f"alpha + 2p = {alpha + 2 * p}")
        A = (alpha + 2) / 2
        if A <= 0:
            return Infeasible("A>0", f"A = (alpha+2)/2 = {A}")
        B = Fraction(0)
        q1 = Fraction(2)
        p1 = (alpha + 2 * p) / A
    else:
        if alpha + gamma + 2 <= 0:
            return Infeasible("alpha+gamma+2>0", f"alpha + gamma + 2 = {alpha + gamma + 2}")
        den = (gamma + 4) * p + 2 * alpha + gamma
        if den == 0:
            return Infeasible("G-denominator", "(gamma+4)p + 2alpha + gamma = 0")
        B = gamma * (alpha + gamma + 2) / den
        if B <= 0:
            return Infeasible("B>0", f"B = {B}")
        p1 = gamma / B
        A = (alpha + 2 * p) / p1
        if gamma + 2 - B == 0:
            return Infeasible("q1-denominator", "gamma + 2 - B = 0")
        q1 = (gamma + 4) / (gamma + 2 - B)
    vals = {"p1": p1, "q1": q1, "A": A, "B": B}
    if p1 <= 0:
        return Infeasible("p1>0", f"p1 = {p1}", vals)
    if q1 <= 0:
        return Infeasible("q1>0", f"q1 = {q1}", vals)
    G = 1 / p1 + 1 / q1
    vals["G"] = G
    if G >= 1:
        return Infeasible("G<1", f"G = {G} >= 1", vals)
    if G <= 1 - Fraction(2, n):
        return Infeasible("G>1-2/n", f"G = {G} <= {1 - Fraction(2, n)}", vals)
    sigma1 = 1 / (1 - G)
    if n - 2 * sigma1 >= 0:
        return Infeasible("n-2sigma1<0", f"sigma1 = {sigma1}", vals)
    delta = math.ceil(2 * sigma1) + 1
    return YoungExponents(p1, q1, sigma1, A, B, G, delta)


def small_gamma_alpha(n, p, P):
    return -2 * (to_rational(p) - to_rational(P)) / (n + 2)


def large_gamma_alpha(n):
    return -Fraction(n - 4) - Fraction(4, n)


def p_grid(n: int, points: int = 20):
    """Equally spaced rationals in (1, (n+2)/(n-2)], endpoint included."""
    pc = critical_p(n)
    return [1 + (pc - 1) * Fraction(k, points) for k in range(1, points + 1)]


@dataclass
class FeasibilityScan:
    n: int
    choice: str
    rows: list
    monotone: bool | None

    @property
    def feasible(self) -> bool:
        return all(r[1].feasible for r in self.rows) and self.monotone is not False


def scan(n: int, choice: str, points: int = 20, P=Fraction(1, 10**4)) -> FeasibilityScan:
    """Feasibility across the admissible p-range for one of the two frames.

    choice "small-gamma": gamma = 0, alpha = -2(p - P)/(n + 2);
    choice "large-gamma": gamma = n - 4 (needs n >= 7), alpha = -gamma - 4/n.
    """
    rows = []
    for p in p_grid(n, points):
        if choice == "small-gamma":
            ex = exponents(n, small_gamma_alpha(n, p, P), 0, p)
        elif choice == "large-gamma":
            if n < 7:
                raise ValueError("gamma = n - 4 is admissible only for n >= 7")
            ex = exponents(n, large_gamma_alpha(n), n - 4, p)
        else:
            raise ValueError(f"unknown frame choice {choice!r}")
        rows.append((p, ex))
    monotone = None
    if choice == "large-gamma":
        gs = [r[1].G for r in rows if r[1].feasible]
        monotone = all(a > b for a, b in zip(gs, gs[1:]))
    return FeasibilityScan(n, choice, rows, monotone)
