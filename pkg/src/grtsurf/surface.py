"""Surface points and meshes.

Two equivalent parameterizations are provided: the closed form

    X = ell'(mu)/(2|g'|^2) * (T g' conj(f') - 2 g <g', g f'>, -2 <g', g f'>)
        + ell(mu) * (2g, 2-T)/T

and the direct sum X = sum_j (h_,j / L_jj) N_,j + h N obtained by pushing the
jets of g through the normal map.  Their pointwise agreement is one of the
verification targets.  The rotation family X_ab realizes the surfaces of
revolution obtained for f = a z + b, g = exp(z).

Meshes sample a uniform parameter grid, flag irregular vertices (g' = 0 or
det V numerically zero) and emit quad faces only over regular corners.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .expr import (Add, Const, EvalError, ExprNode, Fn, Jet2, Mul, Var,
                   eval_jet2, parse_expr, unparse)
from .geometry import PointFrame, SingularPointError, inner


class EmptyMeshError(Exception):
    """No vertex of the sampled grid was regular."""


@dataclass(frozen=True)
class SurfaceSpec:
    """Input of surface synthesis: expressions, window, resolution, method."""

    f: ExprNode
    g: ExprNode
    ell: ExprNode
    u1_range: tuple[float, float] = (-1.0, 1.0)
    u2_range: tuple[float, float] = (-1.0, 1.0)
    nu1: int = 64
    nu2: int = 64
    regularity_eps: float = geometry.REGULARITY_EPS
    method: str = "closed_form"

    def __post_init__(self):
        if self.u1_range[1] <= self.u1_range[0]:
            raise ValueError(f"degenerate u1 range {self.u1_range}")
        if self.u2_range[1] <= self.u2_range[0]:
            raise ValueError(f"degenerate u2 range {self.u2_range}")
        if self.nu1 < 2 or self.nu2 < 2:
            raise ValueError("resolution must be at least 2 in each direction")
        if self.method not in ("closed_form", "direct"):
            raise ValueError(f"unknown method {self.method!r}")

    @classmethod
    def from_strings(cls, f: str, g: str, ell: str, **kwargs) -> "SurfaceSpec":
        return cls(f=parse_expr(f, "z"), g=parse_expr(g, "z"),
                   ell=parse_expr(ell, "t", real=True), **kwargs)

    def grid_u1(self) -> np.ndarray:
        return np.linspace(self.u1_range[0], self.u1_range[1], self.nu1)

    def grid_u2(self) -> np.ndarray:
        return np.linspace(self.u2_range[0], self.u2_range[1], self.nu2)

    def summary(self) -> dict:
        return {
            "f": unparse(self.f, "z"),
            "g": unparse(self.g, "z"),
            "ell": unparse(self.ell, "t"),
            "u1": list(self.u1_range),
            "u2": list(self.u2_range),
            "nu1": self.nu1,
            "nu2": self.nu2,
            "regularity_eps": self.regularity_eps,
            "method": self.method,
        }


def jets_at(spec: SurfaceSpec, z: complex) -> tuple[Jet2, Jet2, Jet2]:
    """Jets of f and g at z and of ell at mu = Re f(z)."""
    f_jet = eval_jet2(spec.f, z)
    g_jet = eval_jet2(spec.g, z)
    ell_jet = eval_jet2(spec.ell, f_jet.value.real, variable="t")
    return f_jet, g_jet, ell_jet


def _point_closed_form(f_jet: Jet2, g_jet: Jet2, ell_jet: Jet2,
                       eps: float) -> np.ndarray:
    g, g1 = g_jet.value, g_jet.d1
    gp2 = inner(g1, g1)
    if gp2 <= eps * eps:
        raise SingularPointError(f"g' = {g1!r} below regularity threshold")
    t = 1.0 + inner(g, g)
    s = inner(g1, g * f_jet.d1)
    w = t * g1 * f_jet.d1.conjugate() - 2.0 * g * s
    l, l1 = ell_jet.value, ell_jet.d1
    a = l1 / (2.0 * gp2)
    return np.array([
        a * w.real + l * 2.0 * g.real / t,
        a * w.imag + l * 2.0 * g.imag / t,
        a * (-2.0 * s) + l * (2.0 - t) / t,
    ])


def point_closed_form(spec: SurfaceSpec, z: complex) -> np.ndarray:
    """Surface point from the closed-form parameterization."""
    f_jet, g_jet, ell_jet = jets_at(spec, z)
    return _point_closed_form(f_jet, g_jet, ell_jet, spec.regularity_eps)


def _point_direct(f_jet: Jet2, g_jet: Jet2, ell_jet: Jet2,
                  eps: float) -> np.ndarray:
    g, g1 = g_jet.value, g_jet.d1
    gp2 = inner(g1, g1)
    if gp2 <= eps * eps:
        raise SingularPointError(f"g' = {g1!r} below regularity threshold")
    t = 1.0 + inner(g, g)
    t2 = t * t
    n = np.array([2.0 * g.real / t, 2.0 * g.imag / t, (2.0 - t) / t])
    q1 = inner(g, g1)
    q2 = inner(g, 1j * g1)
    w1 = t * g1 - 2.0 * g * q1
    w2 = t * (1j * g1) - 2.0 * g * q2
    n_u1 = (2.0 / t2) * np.array([w1.real, w1.imag, -2.0 * q1])
    n_u2 = (2.0 / t2) * np.array([w2.real, w2.imag, -2.0 * q2])
    l, l1 = ell_jet.value, ell_jet.d1
    h1 = l1 * inner(1.0, f_jet.d1)
    h2 = l1 * inner(1.0, 1j * f_jet.d1)
    l11 = 4.0 * gp2 / t2
    return (h1 * n_u1 + h2 * n_u2) / l11 + l * n


def point_direct(spec: SurfaceSpec, z: complex) -> np.ndarray:
    """Surface point as gradient-plus-support combination of the normal jets."""
    f_jet, g_jet, ell_jet = jets_at(spec, z)
    return _point_direct(f_jet, g_jet, ell_jet, spec.regularity_eps)


def rotation_point(a: float, b: float, ell: ExprNode,
                   u1: float, u2: float) -> np.ndarray:
    """Point of the rotation family X_ab at (u1, u2), with mu = a*u1 + b.

    Equals the closed-form parameterization with f = a z + b, g = exp(z).
    """
    mu = a * u1 + b
    jet = eval_jet2(ell, mu, variable="t")
    e1 = math.exp(u1)
    e2 = e1 * e1
    denom = 1.0 + e2
    m = (a * jet.d1 * (math.exp(-u1) - e2 * e1) + 4.0 * jet.value * e1) / (2.0 * denom)
    nz = (jet.value * (1.0 - e2) - a * jet.d1 * denom) / denom
    return np.array([m * math.cos(u2), m * math.sin(u2), nz])


def rotation_spec(a: float, b: float, ell: ExprNode, **kwargs) -> SurfaceSpec:
    """SurfaceSpec equivalent to the rotation family: f = a*z + b, g = exp(z)."""
    f = Add(Mul(Const(complex(a)), Var()), Const(complex(b)))
    return SurfaceSpec(f=f, g=Fn("exp", Var()), ell=ell, **kwargs)


@dataclass
class MeshDiagnostics:
    """Per-vertex frame summary and closed-form identity residuals.

    Residuals are relative with denominator 1 + |reference|; entries are NaN
    where a quantity is undefined (irregular vertex, degenerate profile).
    """

    psi: np.ndarray
    lam: np.ndarray
    mean: np.ndarray
    gauss: np.ndarray
    c: np.ndarray
    det_v: np.ndarray
    support_residual: np.ndarray
    distance_residual: np.ndarray
    weingarten_residual: np.ndarray
    pde_residual: np.ndarray
    regular: np.ndarray


@dataclass
class SurfaceMesh:
    u1: np.ndarray
    u2: np.ndarray
    vertices: np.ndarray            # (nu1, nu2, 3), NaN at invalid vertices
    normals: np.ndarray             # (nu1, nu2, 3)
    valid: np.ndarray               # (nu1, nu2) bool
    vertex_index: np.ndarray        # (nu1, nu2) compact index or -1
    faces: list[tuple[int, int, int, int]] = field(default_factory=list)
    diagnostics: MeshDiagnostics | None = None

    @property
    def vertex_count(self) -> int:
        return int(self.valid.sum())

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def regular_fraction(self) -> float:
        return float(self.valid.mean())

    def min_abs_det_v(self) -> float:
        det = self.diagnostics.det_v[self.valid]
        return float(np.nanmin(np.abs(det))) if det.size else math.nan

    def compact_vertices(self) -> tuple[np.ndarray, np.ndarray]:
        """Valid vertices and normals in grid (row-major) order."""
        mask = self.valid
        return self.vertices[mask], self.normals[mask]


def _vertex_residuals(frame: PointFrame, x: np.ndarray) -> tuple[float, float, float, float]:
    support = abs(float(np.dot(x, frame.normal)) - frame.psi) / (1.0 + abs(frame.psi))
    distance = abs(float(np.dot(x, x)) - frame.lam) / (1.0 + abs(frame.lam))
    weingarten = math.nan
    pde = math.nan
    if not frame.degenerate_profile:
        lap = frame.trace_v - 2.0 * frame.psi
        pde_err = frame.psi * lap - frame.c * frame.grad_sq
        pde = abs(pde_err) / (1.0 + abs(frame.psi * lap))
        if abs(frame.psi) > geometry.PSI_EPS:
            rhs = frame.c * (-frame.lam / (2.0 * frame.psi) + frame.psi / 2.0) - frame.psi
            weingarten = abs(frame.h_over_k - rhs) / (1.0 + abs(frame.h_over_k))
    return support, distance, weingarten, pde


def sample_mesh(spec: SurfaceSpec) -> SurfaceMesh:
    """Evaluate the spec on its uniform grid and assemble a quad mesh.

    Irregular vertices (g' = 0, det V below threshold, or evaluation errors)
    are flagged invalid and excluded from faces; the mesh is deterministic
    for a given spec.
    """
    u1 = spec.grid_u1()
    u2 = spec.grid_u2()
    nu1, nu2 = spec.nu1, spec.nu2
    vertices = np.full((nu1, nu2, 3), np.nan)
    normals = np.full((nu1, nu2, 3), np.nan)
    valid = np.zeros((nu1, nu2), dtype=bool)
    diag = MeshDiagnostics(
        psi=np.full((nu1, nu2), np.nan), lam=np.full((nu1, nu2), np.nan),
        mean=np.full((nu1, nu2), np.nan), gauss=np.full((nu1, nu2), np.nan),
        c=np.full((nu1, nu2), np.nan), det_v=np.full((nu1, nu2), np.nan),
        support_residual=np.full((nu1, nu2), np.nan),
        distance_residual=np.full((nu1, nu2), np.nan),
        weingarten_residual=np.full((nu1, nu2), np.nan),
        pde_residual=np.full((nu1, nu2), np.nan),
        regular=np.zeros((nu1, nu2), dtype=bool),
    )
    point_fn = _point_closed_form if spec.method == "closed_form" else _point_direct
    for i in range(nu1):
        for j in range(nu2):
            z = complex(u1[i], u2[j])
            try:
                f_jet = eval_jet2(spec.f, z)
                g_jet = eval_jet2(spec.g, z)
                ell_jet = eval_jet2(spec.ell, f_jet.value.real, variable="t")
                frame = geometry.point_frame(f_jet, g_jet, ell_jet,
                                             spec.regularity_eps)
                x = point_fn(f_jet, g_jet, ell_jet, spec.regularity_eps)
            except (EvalError, SingularPointError):
                continue
            diag.psi[i, j] = frame.psi
            diag.lam[i, j] = frame.lam
            diag.det_v[i, j] = frame.det_v
            diag.regular[i, j] = frame.regular
            if frame.c is not None:
                diag.c[i, j] = frame.c
            if not frame.regular:
                continue
            diag.mean[i, j] = frame.mean
            diag.gauss[i, j] = frame.gauss
            res = _vertex_residuals(frame, x)
            (diag.support_residual[i, j], diag.distance_residual[i, j],
             diag.weingarten_residual[i, j], diag.pde_residual[i, j]) = res
            vertices[i, j] = x
            normals[i, j] = frame.normal
            valid[i, j] = True
    if not valid.any():
        raise EmptyMeshError("no regular vertex in the sampled window")

    vertex_index = np.full((nu1, nu2), -1, dtype=int)
    vertex_index[valid] = np.arange(int(valid.sum()))
    faces = []
    for i in range(nu1 - 1):
        for j in range(nu2 - 1):
            corners = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
            if all(valid[c] for c in corners):
                faces.append(tuple(int(vertex_index[c]) for c in corners))
    return SurfaceMesh(u1=u1, u2=u2, vertices=vertices, normals=normals,
                       valid=valid, vertex_index=vertex_index, faces=faces,
                       diagnostics=diag)


def sample_rotation_mesh(a: float, b: float, ell: ExprNode,
                         u1_range=(-1.0, 1.0), u2_range=(-math.pi, math.pi),
                         nu1: int = 128, nu2: int = 128,
                         regularity_eps: float = geometry.REGULARITY_EPS) -> SurfaceMesh:
    """Mesh of the rotation family, with diagnostics from f = a*z + b, g = e^z.

    Vertices are evaluated by the rotation formula itself; normals and frame
    data come from the equivalent holomorphic pair.
    """
    spec = rotation_spec(a, b, ell, u1_range=u1_range, u2_range=u2_range,
                         nu1=nu1, nu2=nu2, regularity_eps=regularity_eps)
    mesh = sample_mesh(spec)
    for i in range(spec.nu1):
        for j in range(spec.nu2):
            if mesh.valid[i, j]:
                mesh.vertices[i, j] = rotation_point(a, b, ell,
                                                     float(mesh.u1[i]),
                                                     float(mesh.u2[j]))
    return mesh
