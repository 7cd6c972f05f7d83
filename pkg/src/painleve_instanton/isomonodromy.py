"""Deformation machinery for the Fuchsian residue family: the Schlesinger
vector field and finite-difference verification, the gauge normalisation in
which the deformation equations hold, conserved-quantity drift, extraction
of the apparent-singularity position y(x), and the parameter map to the
sixth Painleve equation.

The raw per-t residues ("line" gauge) carry the reality pairing
Ax = -A0^dagger, Ainf = -A1^dagger but are not in Schlesinger gauge: the
transverse component of the flat family connection has, in the normalised
coordinate, the form -dx/dt * Ax/(w - x) + C(t).  Conjugating by the
solution of dG/dt = -C(t) G removes the constant term; the resulting
"schlesinger" gauge has constant Ainf and satisfies the deformation
equations, which the residual check verifies by finite differences.  All
trace invariants, determinants and y(x) are conjugation-invariant and agree
between the two gauges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (BadDeformationParameter, IndeterminateY, PathTooClose,
                     ReducibleSystem)
from .liealg import commutator, det2, eigen2, trace_sq
from .painleve import PviParams
from .stepper import fd_weights, rk45, rk45_path
from .twistor import (FuchsianData, connection_form, cross_ratio,
                      cross_ratio_derivative, dlambda_dt_at_normalized,
                      fuchsian_data, lambda_of_normalized, transverse_form)


@dataclass(frozen=True)
class FuchsianFamily:
    """Fuchsian residue data sampled along the line family, ordered by t."""

    label: str
    gauge: str
    ts: np.ndarray
    samples: tuple  # of FuchsianData

    def __post_init__(self):
        xs = self.xs
        if not np.all(np.diff(xs.real) > 0):
            raise ValueError("deformation parameter x is not strictly monotone")

    @property
    def xs(self):
        return np.array([F.x for F in self.samples])

    def __len__(self):
        return len(self.samples)


def default_verification_ts(t_min=0.5, t_max=0.95, samples=201):
    """Default sampling window for the finite-difference residual suites.

    For t below ~0.4 the poles 1 and x collide (x -> 1 with dx/dt -> 0) and
    absolute finite-difference verification becomes ill-conditioned; the
    pointwise (non-differencing) checks cover the full range instead.
    """
    return np.linspace(t_min, t_max, samples)


_PROBES = (0.37 + 0.41j, -0.83 + 0.29j, 1.72 - 0.63j)


def gauge_rate(profile, t):
    """Constant term C(t) of the transverse connection in the normalised
    coordinate; computed at a probe point and independent of it."""
    x = cross_ratio(t)
    xd = cross_ratio_derivative(t)
    Ax = fuchsian_data(profile, t).Ax
    for probe in _PROBES:
        try:
            lam = lambda_of_normalized(t, probe)
            B = (transverse_form(profile, t, lam)
                 + connection_form(profile, t, lam) * dlambda_dt_at_normalized(t, probe))
            return B + xd * Ax / (probe - x)
        except Exception:
            continue
    raise RuntimeError(f"no usable probe point at t = {t}")


def make_family(profile, ts, gauge="line", label=None, rtol=1e-12):
    """Sample the residue family; gauge is "line" (raw) or "schlesinger"."""
    ts = np.asarray(ts, dtype=float)
    label = label or f"n={profile.n}:{profile.kind.value}"
    raw = [fuchsian_data(profile, t) for t in ts]
    if gauge == "line":
        return FuchsianFamily(label=label, gauge="line", ts=ts, samples=tuple(raw))
    if gauge != "schlesinger":
        raise ValueError(f"unknown gauge {gauge!r}")

    def flow(t, g):
        return (-gauge_rate(profile, t) @ g.reshape(2, 2)).ravel()

    gs = rk45_path(flow, ts, np.eye(2, dtype=complex).ravel(), rtol=rtol, atol=1e-14)
    samples = tuple(F.conjugated(g.reshape(2, 2)) for F, g in zip(raw, gs))
    return FuchsianFamily(label=label, gauge="schlesinger", ts=ts, samples=samples)


# --------------------------------------------------------------------------
# Schlesinger equations
# --------------------------------------------------------------------------

def schlesinger_rhs(F):
    """(dA0, dA1, dAx)/dx of the Schlesinger system at the sample F."""
    x = F.x
    if min(abs(x), abs(x - 1.0)) < 1e-12:
        raise BadDeformationParameter(f"x = {x} touches a fixed singular point")
    c0x = commutator(F.A0, F.Ax)
    c1x = commutator(F.A1, F.Ax)
    d0 = c0x / x
    d1 = c1x / (x - 1.0)
    return d0, d1, -d0 - d1


def schlesinger_residual(fam, k):
    """Frobenius-norm defect of the finite-difference x-derivatives of
    (A0, A1, Ax) against the Schlesinger right-hand side at sample k."""
    if not 2 <= k <= len(fam) - 3:
        raise IndexError("5-point stencil needs 2 <= k <= len-3")
    xs = fam.xs
    window = slice(k - 2, k + 3)
    w = fd_weights(xs[window].real, xs[k].real, 1)
    rhs = schlesinger_rhs(fam.samples[k])
    total = 0.0
    for p, want in zip(range(3), rhs):
        mats = [fam.samples[k - 2 + j].residues()[p] for j in range(5)]
        got = sum(wj * m for wj, m in zip(w, mats))
        total += float(np.sqrt(np.sum(np.abs(got - want) ** 2)))
    return total


def max_schlesinger_residual(fam):
    return max(schlesinger_residual(fam, k) for k in range(2, len(fam) - 2))


def isospectral_drift(fam):
    """max - min of tr(A_p^2) over the family, for each of the four poles."""
    traces = np.array([[trace_sq(m) for m in F.residues()] for F in fam.samples])
    return tuple(float(np.max(np.abs(traces[:, p] - traces[0, p])))
                 for p in range(4))


def pair_invariants(F):
    """Conjugation invariants tr(A_i A_j) for all pole pairs (4x4)."""
    mats = F.residues()
    out = np.empty((4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            out[i, j] = np.trace(mats[i] @ mats[j])
    return out


def schlesinger_integrate(F0, x_target, rtol=1e-11):
    """Propagate (A0, A1, Ax) along the Schlesinger flow to x_target.

    The straight path must keep distance > 1e-3 from the fixed singular
    points {0, 1}.  Used as an independent oracle: the result must agree
    with direct construction in all conjugation invariants.
    """
    x0 = complex(F0.x)
    x1 = complex(x_target)
    for c in (0.0, 1.0):
        seg = x1 - x0
        s = 0.0 if seg == 0 else max(0.0, min(1.0, ((c - x0) / seg).real))
        if abs(x0 + s * seg - c) <= 1e-3:
            raise PathTooClose(f"path {x0} -> {x1} passes near {c}")
    if x0 == x1:
        return F0

    def flow(x, vec):
        A0, A1, Ax = vec.reshape(3, 2, 2)
        if min(abs(x), abs(x - 1.0)) < 1e-12:
            raise BadDeformationParameter(f"x = {x}")
        c0x = commutator(A0, Ax)
        c1x = commutator(A1, Ax)
        d0 = c0x / x
        d1 = c1x / (x - 1.0)
        return np.concatenate([d0.ravel(), d1.ravel(), (-d0 - d1).ravel()])

    y0 = np.concatenate([m.ravel() for m in (F0.A0, F0.A1, F0.Ax)]).astype(complex)
    y1 = rk45(flow, x0.real, y0, x1.real, rtol=rtol, atol=1e-13)
    A0, A1, Ax = y1.reshape(3, 2, 2)
    return FuchsianData(t=float("nan"), x=x1, A0=A0, A1=A1, Ax=Ax,
                        Ainf=-(A0 + A1 + Ax), gauge=F0.gauge)


# --------------------------------------------------------------------------
# Jimbo-Miwa extraction
# --------------------------------------------------------------------------

def _branch_frame(F, branch):
    lam, v_plus, v_minus = eigen2(F.Ainf)
    if branch == "minus":
        lam, v_plus, v_minus = -lam, v_minus, v_plus
    elif branch != "plus":
        raise ValueError("branch must be 'plus' or 'minus'")
    P = np.column_stack([v_plus, v_minus])
    det = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
    Pi = np.array([[P[1, 1], -P[0, 1]], [-P[1, 0], P[0, 0]]]) / det
    return lam, P, Pi


def extract_y(F, branch="plus"):
    """Position y of the apparent singularity for the chosen eigen-branch.

    In the frame diagonalising Ainf = diag(lam, -lam), y is the zero of the
    numerator of the (2,1) entry of the residue sum A(zeta); there the
    lam-eigenvector of Ainf is a common eigenvector of A(y) and Ainf.  The
    root is checked a posteriori against the numerator polynomial.
    """
    lam, P, Pi = _branch_frame(F, branch)
    x = F.x
    b = [(Pi @ A @ P)[1, 0] for A in (F.A0, F.A1, F.Ax)]
    scale = max(abs(v) for v in b)
    if scale < 1e-12 * max(1.0, float(max(np.max(np.abs(A)) for A in F.residues()))):
        raise ReducibleSystem("all off-diagonal couplings vanish")
    c2 = b[0] + b[1] + b[2]
    c1 = -b[0] * (1.0 + x) - b[1] * x - b[2]
    c0 = b[0] * x

    def excluded(z):
        return min(abs(z), abs(z - 1.0), abs(z - x)) < 1e-10

    if abs(c2) > 1e-9 * scale:
        # inconsistent quadruple (Ainf != -(A0+A1+Ax)): genuine quadratic
        disc = np.sqrt(c1 * c1 - 4.0 * c2 * c0 + 0j)
        roots = [(-c1 + disc) / (2 * c2), (-c1 - disc) / (2 * c2)]
        good = [z for z in roots if not excluded(z)]
        if not good:
            raise IndeterminateY("both numerator roots lie in {0, 1, x, inf}")
        y = good[0]
    else:
        if abs(c1) < 1e-12 * scale:
            raise IndeterminateY("numerator polynomial is degenerate")
        y = -c0 / c1
    if abs(c2 * y * y + c1 * y + c0) > 1e-10 * scale * max(1.0, abs(y)) ** 2:
        raise IndeterminateY("root fails the a-posteriori numerator bound")
    return y


def common_eigenvector(F, branch="plus"):
    """The Ainf eigenvector shared with A(y) for this branch."""
    lam, P, _ = _branch_frame(F, branch)
    return P[:, 0]


def jimbo_miwa_params(F, branch="plus"):
    """Painleve VI parameters of the deformation, per eigen-branch of Ainf."""
    lam, _, _ = _branch_frame(F, branch)
    return PviParams(
        alpha=0.5 * (2.0 * lam - 1.0) ** 2,
        beta=2.0 * det2(F.A0),
        gamma=-2.0 * det2(F.A1),
        delta=0.5 * (1.0 + 4.0 * det2(F.Ax)),
    )
