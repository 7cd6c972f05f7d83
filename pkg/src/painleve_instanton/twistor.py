"""Per-line twistor data for the family of rational lines parametrised by
t in (0, 1): the infinitesimal-action matrix, its inverse on the line's
tangent and transverse directions, the four divisor poles, the Moebius
normalisation to {0, 1, x, infinity}, the residue table of the scalar
1-forms, and assembly of the rank-2 Fuchsian residues from a profile.

Conventions fixed here (and relied on everywhere downstream):

* the action matrix is stored in the complex basis
  {-i X1, (X2 + i X3)/2, -(X2 - i X3)/2}; columns act on that basis, rows
  are (d/dlam, d/dmu, d/dzeta) components;
* det(alpha) = -Delta(t, lam) on the line holds exactly;
* mu_plus * mu_minus = 1 is enforced by computing mu_plus = 1/mu_minus
  (the difference form suffers catastrophic cancellation as t -> 0);
* square roots of the negative reals mu_+- are taken with negative
  imaginary part, so the pole sent to infinity lies in the lower half
  plane; with this labelling the residue alpha_{2,inf} tends to +i/4 as
  t -> 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLine, OnDivisor, QuadratureFailure
from .liealg import X1, X2, X3, su2_combination, trace_sq, solve3

SQRT3 = math.sqrt(3.0)

# columns: coordinates of X1, X2, X3 in the complex basis
COMPLEX_BASIS = np.array([[1j, 0, 0], [0, 1, -1j], [0, -1, -1j]])
COMPLEX_BASIS.setflags(write=False)

POLE_LABELS = ("0", "1", "x", "inf")


def alpha_matrix(lam, mu, zeta):
    """3x3 matrix of the infinitesimal action at (lam, mu, zeta)."""
    return np.array([
        [-6.0 * lam, SQRT3 * zeta, -SQRT3 * lam * mu],
        [-2.0 * mu, SQRT3, 2.0 * zeta - SQRT3 * mu * mu],
        [-4.0 * zeta, 2.0 * mu, SQRT3 * lam - SQRT3 * mu * zeta],
    ], dtype=complex)


def delta(t, lam):
    """Quartic whose roots are the four divisor poles of the line."""
    S = t**4 + 18.0 * t * t - 27.0
    return (8.0 * t**3 * lam**4 - 2.0 * S * lam * lam + 8.0 * t**3) / 3.0


def _delta_prime(t, lam):
    S = t**4 + 18.0 * t * t - 27.0
    return (32.0 * t**3 * lam**3 - 4.0 * S * lam) / 3.0


def line_point(t, lam):
    """Affine coordinates of the line point with parameter lam."""
    return lam, t * lam / SQRT3, t / SQRT3


def line_tangent(t, lam):
    """Velocity of the line point under d/dlam."""
    return np.array([1.0, t / SQRT3, 0.0], dtype=complex)


def line_transverse(t, lam):
    """Velocity of the line point under d/dt at fixed lam."""
    return np.array([0.0, lam / SQRT3, 1.0 / SQRT3], dtype=complex)


def alpha_inv(t, lam, vec):
    """Coefficients on (X1, X2, X3) of the action-inverse of `vec`."""
    m = alpha_matrix(*line_point(t, lam)) @ COMPLEX_BASIS
    return solve3(m, vec)


def alpha_inv_tangent(t, lam):
    """Closed-form coefficients (c1, c2, c3) of alpha^{-1} on the tangent.

    Cross-validated against the 3x3 solve route in the test suite; raises
    OnDivisor when Delta vanishes (the point lies on the divisor).
    """
    d = delta(t, lam)
    if abs(d) <= 1e-13:
        raise OnDivisor(f"Delta({t}, {lam}) = {d}")
    c1 = 1j * (t * t - 1.0) * (t * t - 9.0) * lam / (3.0 * d)
    c2 = -2.0 * t * (t + 1.0) * (t - 3.0) * (lam * lam + 1.0) / (3.0 * d)
    c3 = 2j * t * (t - 1.0) * (t + 3.0) * (1.0 - lam * lam) / (3.0 * d)
    return np.array([c1, c2, c3])


# --------------------------------------------------------------------------
# line geometry
# --------------------------------------------------------------------------

def mu_pair(t):
    """(mu_plus, mu_minus): both negative real with product exactly 1."""
    if not 0.0 < t < 1.0:
        raise DegenerateLine(f"line meets the divisor in two points at t = {t}")
    S = t**4 + 18.0 * t * t - 27.0
    D = (t * t - 1.0) * (t * t - 9.0) ** 3
    mu_minus = (S - math.sqrt(D)) / (8.0 * t**3)
    return 1.0 / mu_minus, mu_minus


def mu_pair_derivative(t):
    S = t**4 + 18.0 * t * t - 27.0
    D = (t * t - 1.0) * (t * t - 9.0) ** 3
    Sd = 4.0 * t**3 + 36.0 * t
    Dd = 8.0 * t * (t * t - 9.0) ** 2 * (t * t - 3.0)
    sq = math.sqrt(D)
    _, mu_minus = mu_pair(t)
    d_minus = (Sd - Dd / (2.0 * sq)) / (8.0 * t**3) - 3.0 * mu_minus / t
    return -d_minus / mu_minus**2, d_minus


def _sqrt_neg(x):
    """Branch convention: sqrt of a negative real with Im < 0."""
    return -1j * math.sqrt(-x)


@dataclass(frozen=True)
class LineGeometry:
    t: float
    mu_plus: float
    mu_minus: float
    poles_lambda: tuple  # (z1, z2, z3, z4)
    mobius: tuple        # (a, b, c, d): T(z) = (a z + b)/(c z + d)
    x: complex


def poles(t):
    """Divisor intersection data of the line at parameter t."""
    mu_p, mu_m = mu_pair(t)
    z1 = -_sqrt_neg(mu_m)
    z2 = -_sqrt_neg(mu_p)
    z3, z4 = -z2, -z1
    mob = mobius_from_poles(z1, z2, z4)
    x = mobius_apply(mob, z3)
    return LineGeometry(t=t, mu_plus=mu_p, mu_minus=mu_m,
                        poles_lambda=(z1, z2, z3, z4), mobius=mob, x=x)


def pole_velocities(t):
    """d/dt of the four poles."""
    d_plus, d_minus = mu_pair_derivative(t)
    g = poles(t)
    z1, z2, _, _ = g.poles_lambda
    dz1 = d_minus / (2.0 * z1)
    dz2 = d_plus / (2.0 * z2)
    return dz1, dz2, -dz2, -dz1


def cross_ratio(t):
    """Cross ratio of the four poles under the normalisation z1,z2,z4 -> 0,1,inf."""
    if not 0.0 < t < 1.0:
        raise DegenerateLine(f"cross ratio undefined at t = {t}")
    return complex((t + 1.0) * (t - 3.0) ** 3 / ((t - 1.0) * (t + 3.0) ** 3))


def cross_ratio_derivative(t):
    x = cross_ratio(t)
    return x * (1.0 / (t + 1.0) + 3.0 / (t - 3.0) - 1.0 / (t - 1.0) - 3.0 / (t + 3.0))


def mobius_from_poles(z1, z2, z4):
    """Coefficients of T(z) = ((z - z1)(z2 - z4)) / ((z - z4)(z2 - z1))."""
    if min(abs(z1 - z2), abs(z1 - z4), abs(z2 - z4)) < 1e-12:
        raise DegenerateLine("coincident poles")
    return (z2 - z4, -z1 * (z2 - z4), z2 - z1, -z4 * (z2 - z1))


def mobius_normalize(geom):
    """Moebius map sending (z1, z2, z4) to (0, 1, infinity)."""
    z1, z2, _, z4 = geom.poles_lambda
    return mobius_from_poles(z1, z2, z4)


def mobius_apply(co, z):
    a, b, c, d = co
    return (a * z + b) / (c * z + d)


def mobius_inverse(co):
    a, b, c, d = co
    return (d, -b, -c, a)


def mobius_derivative(co, z):
    a, b, c, d = co
    return (a * d - b * c) / (c * z + d) ** 2


def _inverse_pack(t):
    """Inverse-map coefficients lam(w) = (A w + B)/(C w + D) and their
    t-derivatives at fixed w."""
    g = poles(t)
    z1, z2, _, z4 = g.poles_lambda
    d1, d2, _, d4 = pole_velocities(t)
    A, B = z4 * (z2 - z1), -z1 * (z2 - z4)
    C, D = z2 - z1, -(z2 - z4)
    Ad = d4 * (z2 - z1) + z4 * (d2 - d1)
    Bd = -d1 * (z2 - z4) - z1 * (d2 - d4)
    Cd = d2 - d1
    Dd = -(d2 - d4)
    return (A, B, C, D), (Ad, Bd, Cd, Dd)


def lambda_of_normalized(t, w):
    (A, B, C, D), _ = _inverse_pack(t)
    return (A * w + B) / (C * w + D)


def dlambda_dt_at_normalized(t, w):
    (A, B, C, D), (Ad, Bd, Cd, Dd) = _inverse_pack(t)
    num = (Ad * w + Bd) * (C * w + D) - (A * w + B) * (Cd * w + Dd)
    return num / (C * w + D) ** 2


def dlambda_dw(t, w):
    (A, B, C, D), _ = _inverse_pack(t)
    return (A * D - B * C) / (C * w + D) ** 2


# --------------------------------------------------------------------------
# residues of the scalar 1-forms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidueTable:
    """Residues alpha_{i,p}: rows i in {1,2,3}, poles p in (0, 1, x, inf)."""

    t: float
    entries: np.ndarray  # (3, 4) complex

    def get(self, i, p):
        return self.entries[i - 1, POLE_LABELS.index(str(p))]

    def row(self, i):
        return self.entries[i - 1].copy()

    def column(self, p):
        return self.entries[:, POLE_LABELS.index(str(p))].copy()


def residue_closed_form(t):
    """Closed-form residue table.

    Base entries at pole 0 (with mu = mu_plus - mu_minus):

        alpha_{1,0} = -i (t^2-1)(t^2-9) / (16 t^3 mu)
        alpha_{2,0} = (mu_- + 1) t (t+1)(t-3) / (8 t^3 mu z1)
        alpha_{3,0} = i (mu_+ - 1) t (t-1)(t+3) / (8 t^3 mu z2)

    extended across the poles by the sign/conjugation relations
    (row 1: 0 = inf, x = 1 = conjugate; row 2: inf = -0, 1 = 0, x = -0;
    row 3: inf = -0, 1 = -0, x = 0).
    """
    g = poles(t)
    mu = g.mu_plus - g.mu_minus
    z1, z2, _, _ = g.poles_lambda
    a10 = -1j * (t * t - 1.0) * (t * t - 9.0) / (16.0 * t**3 * mu)
    a20 = (g.mu_minus + 1.0) * t * (t + 1.0) * (t - 3.0) / (8.0 * t**3 * mu * z1)
    a30 = 1j * (g.mu_plus - 1.0) * t * (t - 1.0) * (t + 3.0) / (8.0 * t**3 * mu * z2)
    entries = np.array([
        [a10, np.conj(a10), np.conj(a10), a10],
        [a20, a20, -a20, -a20],
        [a30, -a30, a30, -a30],
    ])
    return ResidueTable(t=t, entries=entries)


def residue_table_printed(t):
    """Verbatim transcription of the published residue formulas (for the
    discrepancy diagnostics; `residue_closed_form` is the authoritative
    table, validated against contour quadrature)."""
    g = poles(t)
    mu = g.mu_plus - g.mu_minus
    z1 = g.poles_lambda[0]
    a10 = 1j * (t * t - 1.0) * (t * t - 9.0) / (16.0 * t**3 * mu)
    a20 = (g.mu_minus + 1.0) * t * (t + 1.0) * (t - 3.0) / (8.0 * t * t * mu * z1)
    a30 = 1j * (g.mu_plus - 1.0) * t * (t - 1.0) * (t + 3.0) / (8.0 * t * t * mu * z1)
    entries = np.array([
        [a10, np.conj(a10), np.conj(a10), a10],
        [a20, a20, -a20, -a20],
        [a30, -a30, a30, -a30],
    ])
    return ResidueTable(t=t, entries=entries)


def residue_numeric(t, i, pole, n_points=256):
    """Contour-quadrature residue of the scalar form alpha_i at the pole.

    The form is pulled back to the normalised coordinate (poles at 0, 1, x,
    infinity; the infinity residue is taken in the chart w = 1/zeta) and the
    coefficients are obtained by the 3x3-solve route, so this is independent
    of the closed-form table on both counts.  Two radii are compared; a
    drift above 1e-7 raises QuadratureFailure.
    """
    g = poles(t)
    x = g.x
    finite = {"0": 0.0, "1": 1.0, "x": x}
    seps = [abs(a - b) for idx, a in enumerate((0.0, 1.0, x))
            for b in ((0.0, 1.0, x))[idx + 1:]]
    base_radius = 1e-2 * min(seps)

    def contour_value(radius):
        theta = 2.0 * np.pi * (np.arange(n_points) + 0.5) / n_points
        ring = radius * np.exp(1j * theta)
        total = 0.0 + 0.0j
        if str(pole) == "inf":
            for w in ring:
                zeta = 1.0 / w
                lam = lambda_of_normalized(t, zeta)
                c = alpha_inv(t, lam, line_tangent(t, lam))[i - 1]
                f = c * dlambda_dw(t, zeta) * (-1.0 / w**2)
                total += f * w
        else:
            centre = finite[str(pole)]
            for w in centre + ring:
                lam = lambda_of_normalized(t, w)
                c = alpha_inv(t, lam, line_tangent(t, lam))[i - 1]
                total += c * dlambda_dw(t, w) * (w - centre)
        return total / n_points

    v1 = contour_value(base_radius)
    v2 = contour_value(base_radius / 2.0)
    if abs(v1 - v2) > 1e-7:
        raise QuadratureFailure(f"residue quadrature drift {abs(v1 - v2):.3e} "
                                f"at t={t}, i={i}, pole={pole}")
    return v2


# --------------------------------------------------------------------------
# connection family
# --------------------------------------------------------------------------

def connection_form(profile, t, lam):
    """Matrix of the flat connection along the line at parameter lam."""
    a = profile.oriented_values(t)
    c = alpha_inv_tangent(t, lam)
    return su2_combination(-a[0] * c[0], -a[1] * c[1], -a[2] * c[2])


def transverse_form(profile, t, lam):
    """Matrix of the flat connection on the transverse (d/dt) direction."""
    a = profile.oriented_values(t)
    c = alpha_inv(t, lam, line_transverse(t, lam))
    return su2_combination(-a[0] * c[0], -a[1] * c[1], -a[2] * c[2])


@dataclass(frozen=True)
class FuchsianData:
    """Residues of the normalised rank-2 Fuchsian system at one t."""

    t: float
    x: complex
    A0: np.ndarray
    A1: np.ndarray
    Ax: np.ndarray
    Ainf: np.ndarray
    gauge: str = "line"

    def residue(self, p):
        return {"0": self.A0, "1": self.A1, "x": self.Ax, "inf": self.Ainf}[str(p)]

    def residues(self):
        return self.A0, self.A1, self.Ax, self.Ainf

    def conjugated(self, g):
        gi = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]) / (
            g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])
        return FuchsianData(
            t=self.t, x=self.x,
            A0=gi @ self.A0 @ g, A1=gi @ self.A1 @ g,
            Ax=gi @ self.Ax @ g, Ainf=gi @ self.Ainf @ g,
            gauge="schlesinger")

    def trace_squares(self):
        return tuple(trace_sq(m) for m in self.residues())

    def to_json_dict(self):
        def mat(m):
            return [[[float(v.real), float(v.imag)] for v in row] for row in m]
        return {"t": self.t,
                "x": {"re": float(self.x.real), "im": float(self.x.imag)},
                "residues": {"p0": mat(self.A0), "p1": mat(self.A1),
                             "px": mat(self.Ax), "pinf": mat(self.Ainf)}}

    def to_json(self):
        return json.dumps(self.to_json_dict())


def fuchsian_data(profile, t):
    """Assemble the four residues A_p = -sum_i a_i alpha_{i,p} X_i."""
    a = profile.oriented_values(t)
    tab = residue_closed_form(t)

    def res(p):
        r = tab.column(p)
        return su2_combination(-a[0] * r[0], -a[1] * r[1], -a[2] * r[2])

    return FuchsianData(t=t, x=cross_ratio(t), A0=res("0"), A1=res("1"),
                        Ax=res("x"), Ainf=res("inf"), gauge="line")


def trace_csv_row(F):
    vals = (F.t, F.x.real, F.x.imag) + tuple(v.real for v in F.trace_squares())
    return ",".join(f"{v:.17g}" for v in vals)
