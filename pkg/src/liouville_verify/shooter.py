"""Radial shooting for v'' + (n-1)v'/r + N v^p + M |v'|^q = 0, v(0) = a, v'(0) = 0.

A shot either crosses zero at a finite radius, decays to zero, or is left
inconclusive.  The tool corroborates nonexistence of positive entire
solutions numerically; it does not prove anything.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError
from .exact import to_rational

R0 = 1e-6
DECAY_SLOPE = 1e-8
DECAY_VALUE = 1e-6


@dataclass(frozen=True)
class ShotConfig:
    n: int
    p: float
    M: float = 0.0
    N: float = 1.0
    a: float = 1.0
    r_max: float = 50.0
    rtol: float = 1e-11
    atol: float = 1e-13
    v_min: float = DECAY_VALUE
    q_shift: float = 0.0    # nonzero only for negative controls; q = 2p/(p+1) + q_shift

    def __post_init__(self):
        for name in ("p", "M", "N", "a", "r_max", "rtol", "atol", "v_min", "q_shift"):
            val = getattr(self, name)
            if not isinstance(val, float):
                object.__setattr__(self, name, float(to_rational(val)))
        if self.n < 1:
            raise DomainError("dimension must be positive")
        if self.p <= 1:
            raise DomainError("p must exceed 1")
        if self.a <= 0:
            raise DomainError("initial height must be positive")
        if self.r_max <= R0:
            raise DomainError("r_max must exceed the starting radius")
        if self.M < 0 or self.N <= 0:
            raise DomainError("need M >= 0 and N > 0")

    @property
    def q(self) -> float:
        return 2 * self.p / (self.p + 1) + self.q_shift

    @property
    def beta(self) -> float:
        return 2 / (self.p - 1)


@dataclass
class Trajectory:
    r: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    classification: str          # crossed, decayed or inconclusive
    crossing: float | None = None
    limit: float | None = None
    monotone: bool = True
    message: str = ""
    sol: object = field(default=None, repr=False)

    def __call__(self, r):
        """Dense-output value of v at r (within the integrated range)."""
        r = np.asarray(r, dtype=float)
        out = np.where(r <= R0, self.v[0], 0.0)
        inside = r > R0
        if inside.any():
            out[inside] = self.sol(r[inside])[0]
        return out

    def summary(self) -> dict:
        return {"classification": self.classification, "crossing": self.crossing,
                "limit": self.limit, "r_end": float(self.r[-1]), "monotone": self.monotone,
                "samples": len(self.r), "message": self.message}


def _rhs(cfg: ShotConfig):
    n, p, q, M, N = cfg.n, cfg.p, cfg.q, cfg.M, cfg.N

    def f(r, y):
        v, w = y
        return [w, -(n - 1) / r * w - N * max(v, 0.0) ** p - M * abs(w) ** q]

    return f


def taylor_start(cfg: ShotConfig, r0: float = R0):
    """v ~ a - N a^p r^2 / (2n) and v' ~ -N a^p r / n near the origin."""
    c = cfg.N * cfg.a**cfg.p / cfg.n
    return [cfg.a - c * r0 * r0 / 2, -c * r0]


def shoot(cfg: ShotConfig) -> Trajectory:
    def hit_zero(r, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1

    sol = solve_ivp(_rhs(cfg), (R0, cfg.r_max), taylor_start(cfg), method="DOP853",
                    rtol=cfg.rtol, atol=cfg.atol, events=hit_zero, dense_output=True)
    r = np.concatenate([[0.0], sol.t])
    v = np.concatenate([[cfg.a], sol.y[0]])
    dv = np.concatenate([[0.0], sol.y[1]])
    pos = v > 0
    monotone = bool(np.all(dv[pos] <= 1e-12))
    if sol.status == -1:
        return Trajectory(r, v, dv, "inconclusive", monotone=monotone,
                          message=f"integrator failed: {sol.message}", sol=sol.sol)
    if sol.t_events[0].size:
        rc = float(sol.t_events[0][0])
        return Trajectory(r, v, dv, "crossed", crossing=rc, monotone=monotone, sol=sol.sol)
    vend, dvend = v[-1], dv[-1]
    if 0 < vend < cfg.v_min and abs(dvend) < DECAY_SLOPE:
        return Trajectory(r, v, dv, "decayed", limit=float(vend), monotone=monotone, sol=sol.sol)
    return Trajectory(r, v, dv, "inconclusive", monotone=monotone,
                      message=f"v(r_max) = {vend:.3e}, v'(r_max) = {dvend:.3e}", sol=sol.sol)


def refinement_change(cfg: ShotConfig) -> float | None:
    """Change in the crossing radius when both tolerances are halved."""
    a, b = shoot(cfg), shoot(replace(cfg, rtol=cfg.rtol / 2, atol=cfg.atol / 2))
    if a.crossing is None or b.crossing is None:
        return None
    return abs(a.crossing - b.crossing)


def scaling_check(cfg: ShotConfig, k: float, samples: int = 400) -> float:
    """Sup-norm relative gap between the shot from height k^beta a and the
    rescaled original r -> k^beta v(k r).

    At the critical q the two agree up to integration error; with q_shift
    set, the symmetry is broken and the gap is the expected non-invariance.
    """
    k = float(k)
    if k <= 0:
        raise DomainError("k must be positive")
    base = shoot(cfg)
    scaled = shoot(replace(cfg, a=k**cfg.beta * cfg.a, r_max=cfg.r_max / k))
    r_end = base.r[-1] / k
    if scaled.r[-1] < r_end:
        r_end = scaled.r[-1]
    r = np.linspace(0.0, r_end, samples)
    want = k**cfg.beta * base(k * r)
    got = scaled(r)
    return float(np.max(np.abs(got - want)) / np.max(np.abs(want)))


@dataclass
class SweepResult:
    n: int
    p: float
    M: float
    rows: list          # (height, r_max, trajectory summary)
    consistent: bool
    seconds: float
    radius_spread: float | None = None    # relative spread of r_c * a^((p-1)/2)

    @property
    def classes(self):
        return [row[2]["classification"] for row in self.rows]

    def to_dict(self):
        return {"n": self.n, "p": self.p, "M": self.M, "consistent": self.consistent,
                "radius_spread": self.radius_spread,
                "rows": [{"height": h, "r_max": R, **s} for h, R, s in self.rows]}


def default_heights(count: int = 10, lo: float = 0.1, hi: float = 10.0):
    return list(np.geomspace(lo, hi, count))


def sweep(n, p, M, heights=None, r_max: float = 200.0, N=1.0) -> SweepResult:
    """Shoot from each height; r_max is given for a = 1 and rescaled by
    a^(-(p-1)/2) so every shot covers the same scale-invariant range.
    `consistent` records whether the classification is height-independent,
    which the scaling symmetry requires at the critical q."""
    start = time.perf_counter()
    heights = default_heights() if heights is None else list(heights)
    if not heights or any(not (h > 0 and math.isfinite(h)) for h in heights):
        raise DomainError("heights must be finite and positive")
    pf = float(to_rational(p))
    rows = []
    for h in heights:
        R = r_max * h ** (-(pf - 1) / 2)
        traj = shoot(ShotConfig(n, pf, M=M, N=N, a=h, r_max=R))
        rows.append((float(h), float(R), traj.summary()))
    classes = {row[2]["classification"] for row in rows}
    consistent = len(classes) == 1
    spread = None
    if classes == {"crossed"}:
        norm = [row[2]["crossing"] * row[0] ** ((pf - 1) / 2) for row in rows]
        spread = (max(norm) - min(norm)) / max(norm)
    return SweepResult(n, pf, float(to_rational(M)), rows, consistent,
                       time.perf_counter() - start, spread)


def lane_emden_profile(r, n: int = 3, lam: float = 1.0):
    """The explicit critical solution (lam sqrt(n(n-2)) / (lam^2 + r^2))^((n-2)/2)."""
    r = np.asarray(r, dtype=float)
    return (lam * math.sqrt(n * (n - 2)) / (lam**2 + r**2)) ** ((n - 2) / 2)


def lane_emden_error(n: int = 3, r_max: float = 10.0, samples: int = 2001) -> float:
    """Sup-norm gap on [0, r_max] between the shot at the critical exponent
    with M = 0 and the explicit profile."""
    a = float(lane_emden_profile(0.0, n))
    traj = shoot(ShotConfig(n, (n + 2) / (n - 2), M=0.0, a=a, r_max=r_max))
    r = np.linspace(0.0, r_max, samples)
    return float(np.max(np.abs(traj(r) - lane_emden_profile(r, n))))
