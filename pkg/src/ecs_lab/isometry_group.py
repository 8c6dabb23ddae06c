"""The isometry group of a model manifold.

Elements are triples. The structural part sigma = (q, p, C) must satisfy

    C A C^{-1} = q^2 A,      C an isometry of (V, <.,.>),
    q I + p = I,             f(t) = q^2 f(q t + p) on I,

and the full group is the semidirect product of these sigma with the
Heisenberg factor R x E. An element (sigma, r, u) acts on the chart by

    Phi(t, s, v) = (q t + p,
                    -<u'(T), 2 C v + u(T)> + q^{-1} s + r,
                    C v + u(T)),            T = q t + p,

and the composition law twists the Heisenberg part by the induced action
sigma . u = C u((. - p)/q) on solutions:

    (sigma, r, u)(sigma', r', u')
        = (sigma sigma', r + q^{-1} r' - Omega(u, sigma . u'), u + sigma . u').

Omega rescales under sigma by q^{-1} and the action of sigma on E has
determinant q^{2 - n}; both show up as checks here and in tests.

The Jacobian of the action is computed analytically (the map is affine in
(s, v) and its t-derivative only needs u'' = (f + A) u), which keeps
pullback residuals at integrator accuracy instead of finite-difference
accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model_geometry import ChartPoint, ModelManifold, metric_at
from .pseudo_linear import _as_matrix
from .solution_space import (
    HeisenbergElement,
    SolutionE,
    flow,
    omega,
    zero_solution,
)


@dataclass
class SElement:
    """Structural part (q, p, C) of an isometry."""

    q: float
    p: float
    C: np.ndarray

    def __post_init__(self):
        self.q = float(self.q)
        self.p = float(self.p)
        self.C = _as_matrix(self.C)
        if self.q <= 0:
            raise ValueError("q must be positive")


@dataclass
class IsoElement:
    """Isometry (sigma, r, u); u carries Cauchy data at the model base time."""

    sigma: SElement
    r: float
    u: SolutionE

    def __post_init__(self):
        self.r = float(self.r)

    @property
    def model(self) -> ModelManifold:
        return self.u.model


def _containment_residual(model: ModelManifold, q: float, p: float) -> float:
    """Residual of q I + p = I on interval endpoints, with infinity algebra."""
    lo, hi = model.interval

    def shift(x):
        if not np.isfinite(x):
            return x if q > 0 else -x
        return q * x + p

    res = 0.0
    for end, image in ((lo, shift(lo)), (hi, shift(hi))):
        if np.isfinite(end) != np.isfinite(image):
            return float("inf")
        if np.isfinite(end):
            res = max(res, abs(image - end))
    return res


def chebyshev_nodes(window: tuple[float, float], count: int = 64) -> np.ndarray:
    lo, hi = window
    k = np.arange(count)
    x = np.cos((2 * k + 1) * np.pi / (2 * count))
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x


def s_membership(model: ModelManifold, elem: SElement,
                 window: Optional[tuple[float, float]] = None,
                 nodes: int = 64) -> dict:
    """Residuals of the three structural conditions on (q, p, C).

    f-equivariance |f(t) - q^2 f(q t + p)| is sampled on Chebyshev nodes of a
    compact window whose image stays inside I; interval equivariance is
    checked exactly on endpoints.
    """
    q, p, C = elem.q, elem.p, elem.C
    gram = model.space.gram
    conj = float(np.max(np.abs(C @ model.A @ np.linalg.inv(C) - q * q * model.A)))
    iso = float(np.max(np.abs(C.T @ gram @ C - gram)))
    interval_res = _containment_residual(model, q, p)

    if window is None:
        window = model.compact_window()
    ts = chebyshev_nodes(window, nodes)
    images = q * ts + p
    lo, hi = model.interval
    if np.any(images <= lo) or np.any(images >= hi):
        equiv = float("inf")
    else:
        fv = np.asarray(model.profile.value(ts), dtype=float)
        fi = np.asarray(model.profile.value(images), dtype=float)
        scale = max(1.0, float(np.max(np.abs(fv))))
        equiv = float(np.max(np.abs(fv - q * q * fi))) / scale
    return {
        "conjugation_residual": conj,
        "isometry_residual": iso,
        "interval_residual": interval_res,
        "equivariance_residual": equiv,
    }


def sigma_act(model: ModelManifold, elem: SElement, u: SolutionE) -> SolutionE:
    """Induced action on solutions, (sigma . u)(t) = C u((t - p)/q).

    Returns Cauchy data at the same base time. The chain rule divides the
    derivative by q.
    """
    t0 = u.base_t
    src = (t0 - elem.p) / elem.q
    val, der = u.at(src)
    return SolutionE(model, t0, elem.C @ val, (elem.C @ der) / elem.q)


def sigma_matrix(model: ModelManifold, elem: SElement,
                 base_t: Optional[float] = None) -> np.ndarray:
    """Matrix of sigma . on E in Cauchy coordinates at the base time."""
    if base_t is None:
        base_t = model.default_base_t()
    m = model.m
    src = (base_t - elem.p) / elem.q
    phi = flow(model, base_t).matrix(src)
    block = np.zeros((2 * m, 2 * m))
    block[:m, :m] = elem.C
    block[m:, m:] = elem.C / elem.q
    return block @ phi


def iso_identity(model: ModelManifold) -> IsoElement:
    m = model.m
    return IsoElement(SElement(1.0, 0.0, np.eye(m)), 0.0, zero_solution(model))


def iso_from_heisenberg(model: ModelManifold, h: HeisenbergElement) -> IsoElement:
    """Embed the Heisenberg factor as isometries with trivial sigma."""
    return IsoElement(SElement(1.0, 0.0, np.eye(model.m)), h.r, h.u)


def iso_apply(model: ModelManifold, g: IsoElement, point: ChartPoint) -> ChartPoint:
    """Apply the isometry to a chart point."""
    q, p, C = g.sigma.q, g.sigma.p, g.sigma.C
    T = q * point.t + p
    u_val, u_der = g.u.at(T)
    gram = model.space.gram
    new_v = C @ point.v + u_val
    new_s = -float(u_der @ gram @ (2.0 * (C @ point.v) + u_val)) \
        + point.s / q + g.r
    return ChartPoint(T, new_s, new_v)


def iso_jacobian(model: ModelManifold, g: IsoElement, point: ChartPoint) -> np.ndarray:
    """Analytic Jacobian of the action at the point.

    The map is affine in (s, v); the only curved direction is t, where the
    derivative of u(T) is q u'(T) and of u'(T) is q (f(T) + A) u(T).
    """
    q, p, C = g.sigma.q, g.sigma.p, g.sigma.C
    n, m = model.dim, model.m
    gram = model.space.gram
    T = q * point.t + p
    u_val, u_der = g.u.at(T)
    u_dd = model.f_plus_A(T) @ u_val

    J = np.zeros((n, n))
    J[0, 0] = q
    arg = 2.0 * (C @ point.v) + u_val
    J[1, 0] = -q * (float(u_dd @ gram @ arg) + float(u_der @ gram @ u_der))
    J[1, 1] = 1.0 / q
    J[1, 2:] = -2.0 * (C.T @ gram @ u_der)
    J[2:, 0] = q * u_der
    J[2:, 2:] = C
    return J


def pullback_residual(model: ModelManifold, g: IsoElement, point: ChartPoint) -> float:
    """max |J^T g(Phi x) J - g(x)|, the pointwise isometry defect."""
    J = iso_jacobian(model, g, point)
    image = iso_apply(model, g, point)
    G_img = metric_at(model, image)
    G_src = metric_at(model, point)
    return float(np.max(np.abs(J.T @ G_img @ J - G_src)))


def iso_compose(model: ModelManifold, a: IsoElement, b: IsoElement) -> IsoElement:
    """Group law (sigma, r, u)(sigma', r', u')."""
    sa, sb = a.sigma, b.sigma
    sigma = SElement(sa.q * sb.q, sa.q * sb.p + sa.p, sa.C @ sb.C)
    moved = sigma_act(model, sa, b.u)
    r = a.r + b.r / sa.q - omega(a.u, moved)
    return IsoElement(sigma, r, a.u + moved)


def iso_inverse(model: ModelManifold, a: IsoElement) -> IsoElement:
    """Inverse element; sigma inverts as an affine map and u pulls back."""
    sa = a.sigma
    inv_sigma = SElement(1.0 / sa.q, -sa.p / sa.q, np.linalg.inv(sa.C))
    u_star = sigma_act(model, inv_sigma, a.u).scaled(-1.0)
    return IsoElement(inv_sigma, -sa.q * a.r, u_star)


def hom_q(a: IsoElement) -> float:
    """Dilation character of the isometry."""
    return a.sigma.q


def hom_qp(a: IsoElement) -> tuple[float, float]:
    """Affine part acting on the t-line."""
    return (a.sigma.q, a.sigma.p)


def hom_C(a: IsoElement) -> np.ndarray:
    """Linear part acting on V."""
    return a.sigma.C


def classify_holonomy(elements: list[IsoElement], tol: float = 1e-12) -> str:
    """'dilational' when some element genuinely rescales t, else
    'translational'. Raises on nonpositive q, which cannot occur in the
    group as constructed."""
    for g in elements:
        if g.sigma.q <= 0:
            raise ValueError("isometry with nonpositive q is outside the group")
    if any(abs(g.sigma.q - 1.0) > tol for g in elements):
        return "dilational"
    return "translational"


def omega_scaling_residual(model: ModelManifold, elem: SElement,
                           pairs: list[tuple[SolutionE, SolutionE]]) -> float:
    """Residual of Omega(sigma.u, sigma.w) = q^{-1} Omega(u, w) over pairs."""
    worst = 0.0
    for u, w in pairs:
        lhs = omega(sigma_act(model, elem, u), sigma_act(model, elem, w))
        rhs = omega(u, w) / elem.q
        worst = max(worst, abs(lhs - rhs))
    return worst


def sigma_det_residual(model: ModelManifold, elem: SElement) -> float:
    """Residual of det(sigma|E) = q^{2-n}; |det C| = 1 and the flow between
    q-related times contributes the rest."""
    M = sigma_matrix(model, elem)
    expected = elem.q ** (2 - model.dim)
    return abs(float(np.linalg.det(M)) - expected) / abs(expected)
