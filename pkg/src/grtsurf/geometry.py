"""Pointwise surface quantities from the jets of f, g and the profile.

Everything here is a pure function of 2-jets at a single parameter value
z = u1 + i*u2.  The unit normal comes from a holomorphic g through inverse
stereographic projection; the sphere metric it induces is conformal with
factor L11 = 4|g'|^2 / (1+|g|^2)^2.  The support function is h = ell(mu)
with mu = Re f, and the matrix V (inverse of the Weingarten matrix W)
encodes the shape operator, curvatures and fundamental forms.

All inner products of complex numbers use <a,b> = Re(a)Re(b) + Im(a)Im(b),
implemented once in :func:`inner`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .expr import Jet2

# A point is regular when |g'| exceeds this and |det V| exceeds
# REGULARITY_EPS * (1 + trace(V)^2); scale-aware so the filter stays
# meaningful across magnitudes.
REGULARITY_EPS = 1e-10
# Points with |psi| below this are skipped by checks that divide by psi.
PSI_EPS = 1e-6
# C = ell*ell''/ell'^2 counts as undefined beyond this: double precision
# cannot resolve the Weingarten relation once roundoff is amplified by C.
PROFILE_RATIO_MAX = 1e6


class SingularPointError(Exception):
    """g' vanishes (or det V is numerically zero) at the requested point."""


class DegenerateProfileError(Exception):
    """The profile ratio C = ell*ell''/ell'^2 is undefined: ell'(mu) = 0,
    or |C| would exceed PROFILE_RATIO_MAX."""


def inner(a, b) -> float:
    """Euclidean inner product of complex numbers viewed as plane vectors."""
    return a.real * b.real + a.imag * b.imag


@dataclass(frozen=True)
class GaussFrame:
    """Unit normal, conformal metric factor and Christoffel symbols at a point.

    ``christoffel`` holds (G^1_11, G^2_22, G^2_11, G^1_22); the remaining
    nonzero symbols are G^1_12 = G^1_21 = G^2_22 and G^2_12 = G^2_21 = G^1_11.
    """

    normal: np.ndarray
    l11: float
    t: float
    christoffel: tuple[float, float, float, float]


class FundamentalForms(NamedTuple):
    E: float
    F: float
    G: float
    e: float
    f: float
    g: float


@dataclass(frozen=True)
class ScalarFields:
    psi: float
    grad_sq: float
    lam: float
    c: float
    h_over_k: float
    mean: float
    gauss: float


@dataclass(frozen=True)
class PointFrame:
    """Every pointwise quantity derivable from the three jets, with flags.

    ``c``, ``w``, ``mean`` and ``gauss`` are None at degenerate-profile or
    irregular points; ``regular`` reflects the scale-aware det V threshold.
    """

    mu: float
    t: float
    l11: float
    normal: np.ndarray
    christoffel: tuple[float, float, float, float]
    xi: complex
    v: np.ndarray
    trace_v: float
    det_v: float
    w: Optional[np.ndarray]
    psi: float
    h1: float
    h2: float
    grad_sq: float
    lam: float
    c: Optional[float]
    h_over_k: float
    mean: Optional[float]
    gauss: Optional[float]
    forms: FundamentalForms
    regular: bool
    degenerate_profile: bool


def _profile_ratio(l: float, l1: float, l2: float) -> Optional[float]:
    """C = l*l2/l1^2, or None where it is undefined or unresolvable."""
    if l1 == 0.0 or abs(l * l2) > PROFILE_RATIO_MAX * l1 * l1:
        return None
    c = l * l2 / (l1 * l1)
    return c if math.isfinite(c) else None


def _g_prime_sq(g_jet: Jet2, eps: float) -> float:
    gp2 = inner(g_jet.d1, g_jet.d1)
    if gp2 <= eps * eps:
        raise SingularPointError(
            f"g' = {g_jet.d1!r} is below the regularity threshold {eps:g}"
        )
    return gp2


def gauss_map(g_jet: Jet2, eps: float = REGULARITY_EPS) -> GaussFrame:
    """Unit normal N = (2g, 1-|g|^2)/(1+|g|^2) with metric and symbols.

    Requires g' != 0.  The metric factor is l11 = 4|g'|^2/T^2 with
    T = 1+|g|^2; the metric is conformal (L12 = 0, L22 = L11).
    """
    g, g1, g2 = g_jet.value, g_jet.d1, g_jet.d2
    gp2 = _g_prime_sq(g_jet, eps)
    t = 1.0 + inner(g, g)
    normal = np.array([2.0 * g.real / t, 2.0 * g.imag / t, (2.0 - t) / t])
    l11 = 4.0 * gp2 / (t * t)
    c111 = (t * inner(g1, g2) - 2.0 * gp2 * inner(g, g1)) / (t * gp2)
    c222 = (t * inner(g1, 1j * g2) - 2.0 * gp2 * inner(g, 1j * g1)) / (t * gp2)
    return GaussFrame(normal=normal, l11=l11, t=t,
                      christoffel=(c111, c222, -c222, -c111))


def xi(f_jet: Jet2, g_jet: Jet2, t: float, eps: float = REGULARITY_EPS) -> complex:
    """The combination f'(g''/g' - (2/T) g' conj(g)) - f''."""
    _g_prime_sq(g_jet, eps)
    g1 = g_jet.d1
    return f_jet.d1 * (g_jet.d2 / g1 - (2.0 / t) * g1 * g_jet.value.conjugate()) - f_jet.d2


def v_matrix(ell_jet: Jet2, f_jet: Jet2, g_jet: Jet2,
             eps: float = REGULARITY_EPS) -> tuple[np.ndarray, float]:
    """Symmetric 2x2 matrix V built from the three jets, plus its trace.

    The returned trace equals the closed form ell''|f'|^2 T^2/(4|g'|^2) + 2*ell
    up to roundoff; V12 = V21 exactly by construction.
    """
    gp2 = _g_prime_sq(g_jet, eps)
    t = 1.0 + inner(g_jet.value, g_jet.value)
    k = t * t / (4.0 * gp2)
    x = xi(f_jet, g_jet, t, eps)
    f1 = f_jet.d1
    l, l1, l2 = ell_jet.value, ell_jet.d1, ell_jet.d2
    re_f1 = inner(1.0, f1)
    re_if1 = inner(1.0, 1j * f1)
    v11 = k * (l2 * re_f1 * re_f1 - l1 * inner(1.0, x)) + l
    v12 = k * (l2 * inner(1.0, 0.5j * f1 * f1) + l1 * inner(1j, x))
    v22 = k * (l2 * re_if1 * re_if1 + l1 * inner(1.0, x)) + l
    v = np.array([[v11, v12], [v12, v22]])
    return v, v11 + v22


def is_regular(det_v: float, trace_v: float, eps: float = REGULARITY_EPS) -> bool:
    return abs(det_v) > eps * (1.0 + trace_v * trace_v)


def scalar_fields(ell_jet: Jet2, f_jet: Jet2, g_jet: Jet2, v: np.ndarray,
                  eps: float = REGULARITY_EPS) -> ScalarFields:
    """Support function, squared distance, profile ratio C and curvatures.

    psi = ell(mu); lam = |grad_L h|^2 + psi^2; C = ell*ell''/ell'^2;
    H/K = -trace(V)/2; K = 1/det V and H = -trace(V)/(2 det V), signs fixed
    so that the sphere-map Laplacian relation holds as stated.
    """
    gp2 = _g_prime_sq(g_jet, eps)
    t = 1.0 + inner(g_jet.value, g_jet.value)
    l11 = 4.0 * gp2 / (t * t)
    l, l1, l2 = ell_jet.value, ell_jet.d1, ell_jet.d2
    psi = l
    h1 = l1 * inner(1.0, f_jet.d1)
    h2 = l1 * inner(1.0, 1j * f_jet.d1)
    grad_sq = (h1 * h1 + h2 * h2) / l11
    lam = grad_sq + psi * psi
    trace = v[0, 0] + v[1, 1]
    det = v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]
    c = _profile_ratio(l, l1, l2)
    if c is None:
        raise DegenerateProfileError(
            f"ell' = {l1!r}: C undefined or beyond {PROFILE_RATIO_MAX:g}")
    if not is_regular(det, trace, eps):
        raise SingularPointError(f"det V = {det:g} below regularity threshold")
    return ScalarFields(psi=psi, grad_sq=grad_sq, lam=lam, c=c,
                        h_over_k=-0.5 * trace, mean=-0.5 * trace / det,
                        gauss=1.0 / det)


def fundamental_forms(v: np.ndarray, l11: float) -> FundamentalForms:
    """First and second fundamental form coefficients from V and the metric.

    E = (V11^2+V12^2) l11, F = (V11+V22) V12 l11, G = (V22^2+V12^2) l11,
    (e, f, g) = (V11, V12, V22) l11.  Consequently EG - F^2 = (det V)^2 l11^2.
    """
    v11, v12, v22 = v[0, 0], v[0, 1], v[1, 1]
    return FundamentalForms(
        E=(v11 * v11 + v12 * v12) * l11,
        F=(v11 + v22) * v12 * l11,
        G=(v22 * v22 + v12 * v12) * l11,
        e=v11 * l11,
        f=v12 * l11,
        g=v22 * l11,
    )


def point_frame(f_jet: Jet2, g_jet: Jet2, ell_jet: Jet2,
                eps: float = REGULARITY_EPS) -> PointFrame:
    """Assemble every pointwise quantity, tolerating degenerate spots.

    Raises :class:`SingularPointError` only when g' is below ``eps`` (no
    frame exists at all); small det V and ell' = 0 are reported via flags
    and None fields instead.
    """
    frame = gauss_map(g_jet, eps)
    v, trace = v_matrix(ell_jet, f_jet, g_jet, eps)
    det = v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]
    x = xi(f_jet, g_jet, frame.t, eps)
    l, l1, l2 = ell_jet.value, ell_jet.d1, ell_jet.d2
    psi = l
    h1 = l1 * inner(1.0, f_jet.d1)
    h2 = l1 * inner(1.0, 1j * f_jet.d1)
    grad_sq = (h1 * h1 + h2 * h2) / frame.l11
    lam = grad_sq + psi * psi
    c = _profile_ratio(l, l1, l2)
    degenerate = c is None
    regular = is_regular(det, trace, eps)
    w = mean = gauss = None
    if regular:
        w = np.array([[v[1, 1], -v[0, 1]], [-v[1, 0], v[0, 0]]]) / det
        mean = -0.5 * trace / det
        gauss = 1.0 / det
    return PointFrame(
        mu=inner(1.0, f_jet.value), t=frame.t, l11=frame.l11,
        normal=frame.normal, christoffel=frame.christoffel, xi=x,
        v=v, trace_v=trace, det_v=det, w=w,
        psi=psi, h1=h1, h2=h2, grad_sq=grad_sq, lam=lam, c=c,
        h_over_k=-0.5 * trace, mean=mean, gauss=gauss,
        forms=fundamental_forms(v, frame.l11),
        regular=regular, degenerate_profile=degenerate,
    )
