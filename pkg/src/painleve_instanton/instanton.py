"""Reduced (anti-)self-duality ODE system for the invariant profile functions
(a1, a2, a3)(t) on (0, 1), its closed-form solutions, and a singular
two-point boundary-value solver.

The anti-self-dual branch is

    -K_i(t)/2 * da_i/dt = a_j a_k - a_i     (i,j,k cyclic),

with the coefficient pairing (K1, K2, K3).  The self-dual branch has +1 on
the left and pairs the second and third components with (K3, K2) instead:
orientation reversal exchanges those two axes.  Both conventions are
anchored by the closed forms, which solve their branches identically: the
self-dual Hopf profile fixes the + branch, and the globally negated
anti-self-dual closed form fixes the - branch.  Both endpoints are singular (K1 has
a pole at t=0, K2 at t=1), so the solver launches on analytic endpoint
series and shoots from both ends to a matching point.

Boundary data used by the solver: a1(0) = 1, a2(0) = a3(0) (regularity),
and (a1, a2, a3)(1) = (0, n, 0); the sign of a2(1) is conventional (pairs of
sign flips are gauge), fixed so that n = 1 yields the constant profile
(1, 1, 1) exactly.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateCoefficient, NoAnalyticBranch, NoConvergence,
                     PoleAtEndpoint)
from .stepper import barycentric, cos_nodes, fd_weights, rk45, stencil5


class DualitySign(enum.Enum):
    SELF_DUAL = 1
    ANTI_SELF_DUAL = -1

    @property
    def sigma(self):
        return float(self.value)


def coeff_K(index, t):
    """Metric coefficients K1, K2, K3 of the reduced duality system."""
    if index == 1:
        if t == 0.0:
            raise PoleAtEndpoint("K1 has a pole at t = 0")
        return (t * t - 1.0) * (t * t - 9.0) / (4.0 * t)
    if index == 2:
        if t == 1.0:
            raise PoleAtEndpoint("K2 has a pole at t = 1")
        return 4.0 * t * (t - 3.0) * (t + 1.0) / ((t + 3.0) * (t - 1.0))
    if index == 3:
        return 4.0 * t * (t + 3.0) * (t - 1.0) / ((t - 3.0) * (t + 1.0))
    raise ValueError(f"index must be 1, 2 or 3, got {index}")


def _coeff_order(sign):
    # orientation reversal exchanges the second and third axes
    return (1, 2, 3) if sign is DualitySign.ANTI_SELF_DUAL else (1, 3, 2)


def asd_rhs(sign, t, a):
    """Right-hand side (da1, da2, da3)/dt of the chosen duality branch."""
    a = np.asarray(a, dtype=float)
    order = _coeff_order(sign)
    out = np.empty(3)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        K = coeff_K(order[i], t)
        if abs(K) < 1e-14:
            raise DegenerateCoefficient(f"K{order[i]}({t}) = {K}")
        out[i] = (a[j] * a[k] - a[i]) / (sign.sigma * 0.5 * K)
    return out


# --------------------------------------------------------------------------
# profiles
# --------------------------------------------------------------------------

class ProfileKind(enum.Enum):
    TRIVIAL = "trivial"
    HOPF_SD = "hopf_sd"
    E_MINUS_3 = "e_minus_3"
    NUMERIC = "numeric"


def _closed_values(kind, t):
    d = t * t + 3.0
    if kind is ProfileKind.TRIVIAL:
        return np.array([1.0, 1.0, 1.0])
    if kind is ProfileKind.HOPF_SD:
        return np.array([(t * t - 9.0) / d,
                         -2.0 * t * (t + 3.0) / d,
                         -2.0 * t * (t - 3.0) / d])
    if kind is ProfileKind.E_MINUS_3:
        return np.array([3.0 * (1.0 - t * t) / d,
                         -6.0 * (t + 1.0) / d,
                         -6.0 * (t - 1.0) / d])
    raise ValueError(kind)


def _closed_derivative(kind, t):
    d2 = (t * t + 3.0) ** 2
    if kind is ProfileKind.TRIVIAL:
        return np.zeros(3)
    if kind is ProfileKind.HOPF_SD:
        return np.array([24.0 * t / d2,
                         6.0 * (t - 3.0) * (t + 1.0) / d2,
                         -6.0 * (t + 3.0) * (t - 1.0) / d2])
    if kind is ProfileKind.E_MINUS_3:
        return np.array([-24.0 * t / d2,
                         6.0 * (t + 3.0) * (t - 1.0) / d2,
                         6.0 * (t - 3.0) * (t + 1.0) / d2])
    raise ValueError(kind)


@dataclass(frozen=True)
class ProfileTriple:
    """Profile functions (a1, a2, a3) on (0, 1), closed-form or sampled.

    Numeric profiles live on Chebyshev-clustered nodes and evaluate anywhere
    by barycentric interpolation; `component_signs` records sign flips
    applied relative to the printed closed form (pairs of flips are gauge).
    """

    kind: ProfileKind
    n: int
    ts: np.ndarray | None = None
    values_grid: np.ndarray | None = None  # shape (3, N)
    component_signs: tuple = (1, 1, 1)
    sign_convention: str = "printed"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind is ProfileKind.NUMERIC:
            ts = self.ts
            if ts is None or self.values_grid is None:
                raise ValueError("numeric profiles need ts and values_grid")
            if not (np.all(np.diff(ts) > 0) and 0.0 < ts[0] and ts[-1] < 1.0):
                raise ValueError("grid must be strictly increasing inside (0, 1)")

    def values(self, t):
        if self.kind is not ProfileKind.NUMERIC:
            return _closed_values(self.kind, t) * np.asarray(self.component_signs)
        return barycentric(self.ts, self.values_grid, t)

    def oriented_values(self, t):
        """Components in the anti-self-dual orientation used by the twistor
        machinery: self-dual profiles couple with axes 2 and 3 exchanged."""
        a = self.values(t)
        if self.kind is ProfileKind.HOPF_SD:
            return a[[0, 2, 1]]
        return a

    def derivative(self, t):
        """da/dt: exact for closed forms, 5-point stencil on the grid."""
        if self.kind is not ProfileKind.NUMERIC:
            return _closed_derivative(self.kind, t) * np.asarray(self.component_signs)
        k = int(np.argmin(np.abs(self.ts - t)))
        win = stencil5(self.ts, k)
        w = fd_weights(self.ts[win], t, 1)
        return self.values_grid[:, win] @ w

    @property
    def a2_at_1(self):
        t = 1.0 - 1e-9 if self.kind is ProfileKind.NUMERIC else 1.0
        return float(self.values(t)[1])

    # -- serialization ------------------------------------------------------

    def sample_ts(self, t_min=0.05, t_max=0.95, samples=101):
        if self.kind is ProfileKind.NUMERIC:
            lo = max(t_min, float(self.ts[0]))
            hi = min(t_max, float(self.ts[-1]))
            return np.linspace(lo, hi, samples)
        return np.linspace(t_min, t_max, samples)

    def to_csv(self, ts):
        lines = ["t,a1,a2,a3"]
        for t in ts:
            a = self.values(t)
            lines.append(",".join(f"{v:.17g}" for v in (t, a[0], a[1], a[2])))
        return "\n".join(lines) + "\n"

    def to_json(self, ts):
        points = []
        for t in ts:
            a = self.values(t)
            points.append({"t": float(t), "a1": float(a[0]),
                           "a2": float(a[1]), "a3": float(a[2])})
        return json.dumps({"n": self.n, "kind": self.kind.value,
                           "sign_convention": self.sign_convention,
                           "points": points})


def closed_form_profile(kind):
    """The three closed-form profiles, with the printed formulas verbatim."""
    kind = ProfileKind(kind) if not isinstance(kind, ProfileKind) else kind
    if kind is ProfileKind.NUMERIC:
        raise ValueError("numeric profiles come from solve_bvp")
    n = {ProfileKind.TRIVIAL: 1, ProfileKind.HOPF_SD: 3, ProfileKind.E_MINUS_3: 3}[kind]
    return ProfileTriple(kind=kind, n=n)


def asd_closed_profile(n):
    """Anti-self-dual closed-form representative with a1(0)=1, a2(1)=+n.

    For n=3 this is the printed E-3 profile with the a2 sign flipped (an
    odd number of flips: the printed form itself solves the ASD branch only
    after global negation).
    """
    if n == 1:
        return closed_form_profile(ProfileKind.TRIVIAL)
    if n == 3:
        return ProfileTriple(kind=ProfileKind.E_MINUS_3, n=3,
                             component_signs=(1, -1, 1),
                             sign_convention="a2-flipped vs printed")
    raise ValueError(f"no closed form for n = {n}")


def duality_residual(profile, sign, t, global_negation=False):
    """Residuals r_i = sigma*K_i/2 * da_i - (a_j a_k - a_i) at t.

    Closed forms use exact derivatives; numeric grids use the 5-point
    stencil around the nearest node.  With global_negation the test is
    applied to (-a1, -a2, -a3).
    """
    a = profile.values(t)
    da = profile.derivative(t)
    if global_negation:
        a, da = -a, -da
    order = _coeff_order(sign)
    out = np.empty(3)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        K = coeff_K(order[i], t)
        if abs(K) < 1e-14:
            raise DegenerateCoefficient(f"K{order[i]}({t}) = {K}")
        out[i] = sign.sigma * 0.5 * K * da[i] - (a[j] * a[k] - a[i])
    return out


# --------------------------------------------------------------------------
# endpoint series
# --------------------------------------------------------------------------
#
# Multiplying the ASD equations by the coefficient denominators turns them
# into polynomial identities P_i(s) a_i' = Q_i(s) (a_j a_k - a_i) in the
# local variable s (s = t at the left end, s = t - 1 at the right end).

_P_T0 = (np.array([-9.0, 0, 10, 0, -1]),      # -(t^2-1)(t^2-9)
         np.array([0.0, 6, 4, -2]),           # -2t(t-3)(t+1)
         np.array([0.0, 6, -4, -2]))          # -2t(t+3)(t-1)
_Q_T0 = (np.array([0.0, 8]),                  # 8t
         np.array([-3.0, 2, 1]),              # (t+3)(t-1)
         np.array([-3.0, -2, 1]))             # (t-3)(t+1)

_P_T1 = (np.array([0.0, 16, 4, -4, -1]),      # -u(u+2)(u-2)(u+4)
         np.array([8.0, 8, -2, -2]),          # -2(1+u)(u^2-4)
         np.array([0.0, -8, -10, -2]))        # -2u(1+u)(u+4)
_Q_T1 = (np.array([8.0, 8]),                  # 8(1+u)
         np.array([0.0, 4, 1]),               # u(u+4)
         np.array([-4.0, 0, 1]))              # (u-2)(u+2)


def _pmul(a, b, n):
    out = np.zeros(n)
    for i, ai in enumerate(a[:n]):
        if ai != 0.0:
            m = min(n - i, len(b))
            out[i:i + m] += ai * b[:m]
    return out


def _pder(a):
    return np.array([k * a[k] for k in range(1, len(a))])


def _system_residual(ps, qs, coeffs):
    n = coeffs.shape[1]
    res = []
    for (p, q), (i, j, k) in zip(zip(ps, qs), ((0, 1, 2), (1, 2, 0), (2, 0, 1))):
        lhs = _pmul(p, _pder(coeffs[i]), n)
        rhs = _pmul(q, _pmul(coeffs[j], coeffs[k], n) - coeffs[i][:n], n)
        res.append(lhs - rhs)
    return res


def _solve_order(ps, qs, coeffs, rows, comps, m, kernel=None, amount=0.0):
    """Solve the affine order-m equations for two unknown coefficients.

    With `kernel` the 2x2 system is resonant: a minimum-norm particular
    solution is taken, its kernel component removed, and `amount` times the
    unit kernel vector added.  An inconsistent resonance raises
    NoAnalyticBranch.
    """
    base = _system_residual(ps, qs, coeffs)
    b = np.array([base[rows[0]][m], base[rows[1]][m]])
    L = np.zeros((2, 2))
    for u, comp in enumerate(comps):
        coeffs[comp, m] = 1.0
        pert = _system_residual(ps, qs, coeffs)
        L[0, u] = pert[rows[0]][m] - b[0]
        L[1, u] = pert[rows[1]][m] - b[1]
        coeffs[comp, m] = 0.0
    if kernel is None:
        sol = np.array([
            (-b[0] * L[1, 1] + b[1] * L[0, 1]) / (L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]),
            (-b[1] * L[0, 0] + b[0] * L[1, 0]) / (L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]),
        ])
    else:
        sol, *_ = np.linalg.lstsq(L, -b, rcond=None)
        defect = float(np.max(np.abs(L @ sol + b)))
        if defect > 1e-8 * max(1.0, float(np.max(np.abs(b)))):
            raise NoAnalyticBranch(m, defect)
        sol = sol - (sol @ kernel) * kernel + amount * kernel
    coeffs[comps[0], m], coeffs[comps[1], m] = sol
    return coeffs


def _solve_chain(ps, qs, coeffs, row, comp, m_eq, m_unknown):
    base = _system_residual(ps, qs, coeffs)
    b = base[row][m_eq]
    coeffs[comp, m_unknown] = 1.0
    col = _system_residual(ps, qs, coeffs)[row][m_eq] - b
    coeffs[comp, m_unknown] = -b / col
    return coeffs


_SQ2 = math.sqrt(2.0)


@dataclass(frozen=True)
class EndpointSeries:
    """Truncated analytic solution branch at a singular endpoint.

    side "t0": two free parameters (p, r) -- p = a2(0) = a3(0), r = the
    order-1 resonance amplitude along a2 - a3.  side "t1": one parameter q,
    the kernel amplitude at the resonant order (n-1)/2 (the boundary value
    a1(1) = a3(1) itself for n = 1).
    """

    side: str
    n: int
    order: int
    coeffs: np.ndarray  # (3, order+1) in the local variable

    def eval(self, t):
        s = t if self.side == "t0" else t - 1.0
        return np.array([np.polyval(c[::-1], s) for c in self.coeffs])

    @property
    def constant_terms(self):
        return self.coeffs[:, 0].copy()


def endpoint_series(n, side, order, params=None):
    """Analytic endpoint branch of the anti-self-dual system.

    params: (p, r) for side "t0" (defaults (1, 0)); (q,) for side "t1"
    (default derived from n=1/n=3 exact values, else 0).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if side == "t0":
        p, r = params if params is not None else (1.0, 0.0)
        coeffs = np.zeros((3, order + 1))
        coeffs[:, 0] = (1.0, p, p)
        kernel = np.array([1.0, -1.0]) / _SQ2
        for m in range(1, order + 1):
            coeffs = _solve_chain(_P_T0, _Q_T0, coeffs, 0, 0, m - 1, m)
            if m == 1:
                coeffs = _solve_order(_P_T0, _Q_T0, coeffs, (1, 2), (1, 2), m,
                                      kernel, r * _SQ2)
            else:
                coeffs = _solve_order(_P_T0, _Q_T0, coeffs, (1, 2), (1, 2), m)
        return EndpointSeries("t0", n, order, coeffs)
    if side == "t1":
        (q,) = params if params is not None else (0.0,)
        m0 = (n - 1) // 2
        coeffs = np.zeros((3, order + 1))
        coeffs[1, 0] = float(n)
        if m0 == 0:
            coeffs[0, 0] = q
            coeffs[2, 0] = q
        kernel = np.array([1.0, 1.0]) / _SQ2
        for m in range(1, order + 1):
            coeffs = _solve_chain(_P_T1, _Q_T1, coeffs, 1, 1, m - 1, m)
            if m == m0:
                coeffs = _solve_order(_P_T1, _Q_T1, coeffs, (0, 2), (0, 2), m,
                                      kernel, q * _SQ2)
            else:
                coeffs = _solve_order(_P_T1, _Q_T1, coeffs, (0, 2), (0, 2), m)
        return EndpointSeries("t1", n, order, coeffs)
    raise ValueError("side must be 't0' or 't1'")


# --------------------------------------------------------------------------
# boundary-value solver
# --------------------------------------------------------------------------

@dataclass
class BvpConfig:
    n: int
    grid_size: int = 385
    match_point: float = 0.5
    series_order: int = 10
    newton_tol: float = 1e-10
    max_iter: int = 50
    launch_offset: float = 1e-4
    rtol: float = 1e-12
    atol: float = 1e-13
    seed: tuple | None = None

    def validate(self):
        if self.n < 1 or self.n % 2 == 0:
            raise ValueError(f"n must be odd and positive (|n| label), got {self.n}")
        if self.grid_size < 64:
            raise ValueError("grid_size must be >= 64")
        if not 0.0 < self.match_point < 1.0:
            raise ValueError("match_point must lie in (0, 1)")
        if self.series_order < 3:
            raise ValueError("series_order must be >= 3")


_KNOWN_SEEDS = {1: (1.0, 0.0, 1.0), 3: (2.0, 2.0, -1.5), 5: (2.8, 4.8, 1.875)}


def _asd_flow(t, a):
    if not np.all(np.isfinite(a)) or np.max(np.abs(a)) > 1e8:
        raise OverflowError("profile trajectory blow-up")
    return asd_rhs(DualitySign.ANTI_SELF_DUAL, t, a)


def _launch_offset(series, depths, floor):
    """Deepest interior launch at which the series tail is at machine level.

    Integrating from the very endpoint amplifies noise along the resonant
    modes (factor (s/eps)^(n-1)/2 on the t1 side), so the launch goes as far
    inside as the truncated series stays accurate.
    """
    for s in depths:
        c = series.coeffs
        order = c.shape[1] - 1
        tail = sum(float(np.max(np.abs(c[:, m]))) * s**m
                   for m in range(max(order - 2, 1), order + 1))
        if tail < 1e-14 * max(1.0, float(np.max(np.abs(c[:, 0]))) + 1.0):
            return s
    return floor


_DEPTHS = (0.15, 0.1, 0.05, 0.02, 0.01, 1e-3)


def _launches(cfg, params):
    p, r, q = params
    s_left = endpoint_series(cfg.n, "t0", cfg.series_order, (p, r))
    s_right = endpoint_series(cfg.n, "t1", cfg.series_order, (q,))
    eps = cfg.launch_offset
    d0 = max(_launch_offset(s_left, _DEPTHS, eps), eps)
    d1 = max(_launch_offset(s_right, _DEPTHS, eps), eps)
    return s_left, s_right, d0, 1.0 - d1


def _defect(cfg, params):
    s_left, s_right, t_lo, t_hi = _launches(cfg, params)
    yl = rk45(_asd_flow, t_lo, s_left.eval(t_lo), cfg.match_point,
              rtol=cfg.rtol, atol=cfg.atol, h0=t_lo / 10.0)
    yr = rk45(_asd_flow, t_hi, s_right.eval(t_hi), cfg.match_point,
              rtol=cfg.rtol, atol=cfg.atol, h0=(1.0 - t_hi) / 10.0)
    return yl - yr


def _seed_scan(cfg):
    n = cfg.n
    best = (math.inf, None)
    coarse = BvpConfig(n=n, series_order=8, rtol=1e-8, atol=1e-10,
                       launch_offset=cfg.launch_offset, match_point=cfg.match_point)
    ps = np.linspace(0.5, 1.2 * n, 6)
    rs = np.linspace(0.0, 1.5 * n, 5)
    qs = np.linspace(-0.8 * n * n, 0.8 * n * n, 9)
    for p in ps:
        for r in rs:
            for q in qs:
                try:
                    nrm = float(np.linalg.norm(_defect(coarse, (p, r, q))))
                except (OverflowError, DegenerateCoefficient):
                    continue
                if not math.isfinite(nrm):
                    continue
                if nrm < best[0]:
                    best = (nrm, (p, r, q))
    if best[1] is None:
        raise NoConvergence(0, math.inf)
    return best[1]


def solve_bvp(cfg):
    """Two-sided shooting solve of the anti-self-dual boundary-value problem.

    Launches on the endpoint series at t = eps and t = 1 - eps, integrates
    both branches to the matching point and drives the three-component
    defect to zero with a damped Newton iteration in the three shooting
    parameters (p, r, q).
    """
    cfg.validate()

    def try_defect(params):
        try:
            F = _defect(cfg, params)
        except (OverflowError, DegenerateCoefficient):
            return None
        return F if np.all(np.isfinite(F)) else None

    x = np.array(cfg.seed if cfg.seed is not None
                 else _KNOWN_SEEDS.get(cfg.n) or _seed_scan(cfg), dtype=float)
    F = try_defect(x)
    if F is None:
        raise NoConvergence(0, math.inf)
    norm = float(np.linalg.norm(F))
    for it in range(cfg.max_iter):
        if norm < cfg.newton_tol:
            break
        J = np.empty((3, 3))
        for j in range(3):
            xp = x.copy()
            xp[j] += 1e-6
            Fp = try_defect(xp)
            if Fp is None:
                raise NoConvergence(it, norm)
            J[:, j] = (Fp - F) / 1e-6
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(it, norm) from exc
        lam = 1.0
        for _ in range(30):
            xn = x + lam * dx
            Fn = try_defect(xn)
            if Fn is not None and float(np.linalg.norm(Fn)) < norm:
                break
            lam *= 0.5
        else:
            raise NoConvergence(it, norm)
        x, F = xn, Fn
        norm = float(np.linalg.norm(F))
    else:
        raise NoConvergence(cfg.max_iter, norm)

    p, r, q = x
    eps = cfg.launch_offset
    ts = cos_nodes(eps, 1.0 - eps, cfg.grid_size)
    grid = np.empty((3, cfg.grid_size))
    mid = int(np.searchsorted(ts, cfg.match_point))
    # final sampling: series values wherever the series is machine-accurate,
    # near-machine-tolerance integration chains in between (the residual
    # check differentiates node values, so per-node noise must stay at the
    # defect level)
    fine_r, fine_a = 1e-13, 1e-14
    s_left, s_right, t_lo, t_hi = _launches(cfg, x)
    a = None
    for k in range(0, mid):
        if ts[k] <= t_lo or a is None and ts[k] < t_lo:
            grid[:, k] = s_left.eval(ts[k])
        else:
            prev = s_left.eval(t_lo) if a is None else a
            start = t_lo if a is None else ts[k - 1]
            a = rk45(_asd_flow, start, prev, ts[k], rtol=fine_r, atol=fine_a)
            grid[:, k] = a
    a = None
    for k in range(cfg.grid_size - 1, mid - 1, -1):
        if ts[k] >= t_hi:
            grid[:, k] = s_right.eval(ts[k])
        else:
            prev = s_right.eval(t_hi) if a is None else a
            start = t_hi if a is None else ts[k + 1]
            a = rk45(_asd_flow, start, prev, ts[k], rtol=fine_r, atol=fine_a)
            grid[:, k] = a

    return ProfileTriple(
        kind=ProfileKind.NUMERIC, n=cfg.n, ts=ts, values_grid=grid,
        sign_convention="a1(0)=1, a2(1)=+n",
        meta={"p": float(p), "r": float(r), "q": float(q),
              "match_defect": norm, "launch_offset": eps},
    )


def conserved_tr(profile, t):
    """tr(A_inf^2)(t) = -2 sum_i a_i(t)^2 alpha_{i,inf}(t)^2.

    Cross terms vanish because tr(X_i X_j) = 0 for i != j; constancy in t
    is the executable form of the deformation invariant.
    """
    from .twistor import residue_closed_form

    a = profile.oriented_values(t)
    tab = residue_closed_form(t)
    r = tab.column("inf")
    val = -2.0 * (a[0] ** 2 * r[0] ** 2 + a[1] ** 2 * r[1] ** 2 + a[2] ** 2 * r[2] ** 2)
    return float(val.real) if abs(val.imag) < 1e-9 * max(1.0, abs(val)) else val
