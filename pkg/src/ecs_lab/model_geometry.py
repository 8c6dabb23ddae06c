"""Model manifolds and their curvature.

The underlying manifold is I x R x V with coordinates (t, s, v^1..v^m) and
metric

    g = kappa(t, v) dt^2 + dt ds + <dv, dv>,
    kappa(t, v) = f(t) <v, v> + <A v, v>,

where (V, <.,.>) is a pseudo-Euclidean space, A is a traceless self-adjoint
endomorphism and f is a nonconstant profile function on the open interval I.
The dt ds cross term carries coefficient 1/2 in the matrix of g, so that
g(2 dt-dual, ds-dual) = 1. Index order throughout: 0 = t, 1 = s, 2.. = v.

Curvature is computed from analytic metric jets (derivatives through third
order in closed form, never finite differences) pushed through a generic
coordinate pipeline, so the same pipeline can digest deliberately perturbed
metrics in tests.

Curvature conventions:
    R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
                + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb},
with R(e_c, e_d) e_b = R^a_{bcd} e_a, Ric_{bd} = R^a_{bad}, and the Weyl
tensor in its fully lowered form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .pseudo_linear import PseudoEuclideanSpace, validate_A, _as_matrix

_INF = float("inf")


# ---------------------------------------------------------------------------
# profile functions
# ---------------------------------------------------------------------------

class ProfileF:
    """Base class for the curvature profile f.

    Subclasses provide value(t) and derivative(t, order), both vectorized
    over t, plus JSON-friendly serialization. natural_interval() is the
    largest interval on which the formula is smooth ((0, inf) for the
    singular kinds, all of R for polynomials).
    """

    kind: str = "abstract"

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t, order: int = 1):
        raise NotImplementedError

    def natural_interval(self) -> tuple[float, float]:
        raise NotImplementedError

    def is_constant(self, window: tuple[float, float]) -> bool:
        """Numeric nonconstancy probe on a compact window."""
        ts = np.linspace(window[0], window[1], 17)
        vals = np.asarray([self.value(t) for t in ts], dtype=float)
        spread = float(np.max(vals) - np.min(vals))
        return spread <= 1e-14 * max(1.0, float(np.max(np.abs(vals))))

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(d: dict) -> "ProfileF":
        kind = d.get("kind")
        if kind == "homogeneous":
            c = d["c"]
            if isinstance(c, (list, tuple)):
                c = complex(c[0], c[1])
            return HomogeneousProfile(c)
        if kind == "polynomial":
            return PolynomialProfile(d["coefficients"])
        if kind == "sum_of_powers":
            return SumOfPowersProfile([tuple(term) for term in d["terms"]])
        raise ValueError(f"unknown profile kind: {kind!r}")


class HomogeneousProfile(ProfileF):
    """f(t) = (c^2 - 1/4) / t^2 on (0, inf).

    c may be real (taken >= 0) or purely imaginary, so that c^2 is real;
    these are exactly the profiles invariant under t -> q t up to the q^2
    equivariance law, which is why models built on them carry dilational
    symmetry.
    """

    kind = "homogeneous"

    def __init__(self, c):
        c = complex(c)
        if min(abs(c.real), abs(c.imag)) > 1e-12 * max(1.0, abs(c)):
            raise ValueError("c must be real or purely imaginary (c^2 real)")
        if abs(c.imag) <= 1e-12 * max(1.0, abs(c)):
            c = complex(abs(c.real), 0.0)
        else:
            c = complex(0.0, abs(c.imag))
        self.c = c
        self.h = (c ** 2).real - 0.25

    def value(self, t):
        return self.h / np.asarray(t) ** 2

    def derivative(self, t, order: int = 1):
        # d^k/dt^k t^{-2} = (-1)^k (k+1)! t^{-(k+2)}
        k = order
        sign = -1.0 if k % 2 else 1.0
        return sign * self.h * float(math.factorial(k + 1)) / np.asarray(t) ** (k + 2)

    def natural_interval(self):
        return (0.0, _INF)

    def to_dict(self):
        return {"kind": "homogeneous", "c": [self.c.real, self.c.imag]}

    def __repr__(self):
        return f"HomogeneousProfile(c={self.c})"


class PolynomialProfile(ProfileF):
    """f given by polynomial coefficients in ascending order."""

    kind = "polynomial"

    def __init__(self, coefficients: Sequence[float]):
        self.coefficients = np.asarray(coefficients, dtype=float)
        if self.coefficients.ndim != 1 or self.coefficients.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")

    def value(self, t):
        return np.polynomial.polynomial.polyval(t, self.coefficients)

    def derivative(self, t, order: int = 1):
        d = np.polynomial.polynomial.polyder(self.coefficients, m=order)
        return np.polynomial.polynomial.polyval(t, d)

    def natural_interval(self):
        return (-_INF, _INF)

    def to_dict(self):
        return {"kind": "polynomial", "coefficients": [float(x) for x in self.coefficients]}

    def __repr__(self):
        return f"PolynomialProfile({list(self.coefficients)})"


class SumOfPowersProfile(ProfileF):
    """f(t) = sum a_i t^{e_i} with real exponents, defined on (0, inf)."""

    kind = "sum_of_powers"

    def __init__(self, terms: Sequence[tuple[float, float]]):
        self.terms = [(float(a), float(e)) for a, e in terms]
        if not self.terms:
            raise ValueError("need at least one term")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return sum(a * t ** e for a, e in self.terms)

    def derivative(self, t, order: int = 1):
        t = np.asarray(t, dtype=float)
        out = 0.0
        for a, e in self.terms:
            coef = a
            for k in range(order):
                coef *= (e - k)
            out = out + coef * t ** (e - order)
        return out

    def natural_interval(self):
        return (0.0, _INF)

    def to_dict(self):
        return {"kind": "sum_of_powers", "terms": [[a, e] for a, e in self.terms]}

    def __repr__(self):
        return f"SumOfPowersProfile({self.terms})"


# ---------------------------------------------------------------------------
# points and models
# ---------------------------------------------------------------------------

@dataclass
class ChartPoint:
    """A point (t, s, v) of the model chart."""

    t: float
    s: float
    v: np.ndarray

    def __post_init__(self):
        self.t = float(self.t)
        self.s = float(self.s)
        self.v = np.asarray(self.v, dtype=float).reshape(-1)

    def coords(self) -> np.ndarray:
        return np.concatenate([[self.t, self.s], self.v])

    @staticmethod
    def from_coords(x) -> "ChartPoint":
        x = np.asarray(x, dtype=float)
        return ChartPoint(x[0], x[1], x[2:])


@dataclass
class ModelManifold:
    """The model I x R x V with the metric described in the module docstring.

    Use ecs() for validated construction and raw() to bypass validation (for
    flat or otherwise degenerate comparison metrics in tests). Instances
    cache ODE flows keyed by base time; the cache lives on the instance so
    nothing global leaks between models.
    """

    space: PseudoEuclideanSpace
    A: np.ndarray
    profile: ProfileF
    interval: tuple[float, float]
    non_ecs: bool = False
    _flows: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.A = _as_matrix(self.A)
        lo, hi = self.interval
        self.interval = (float(lo), float(hi))
        if not self.interval[0] < self.interval[1]:
            raise ValueError("interval must be nonempty and ordered")

    @classmethod
    def ecs(cls, space: PseudoEuclideanSpace, A, profile: ProfileF,
            interval: Optional[tuple[float, float]] = None) -> "ModelManifold":
        """Validated constructor. Raises on structural violations."""
        A = _as_matrix(A)
        if space.dim < 2:
            raise ValueError("model needs dim V >= 2 (total dimension >= 4)")
        val = validate_A(space, A)
        if not val.ok():
            raise ValueError(
                "A must be a nonzero traceless self-adjoint endomorphism; "
                f"residuals: self_adjoint={val.self_adjoint_residual:.3e}, "
                f"trace={val.trace_residual:.3e}, norm={val.norm:.3e}"
            )
        nat = profile.natural_interval()
        if interval is None:
            interval = nat
        if interval[0] < nat[0] or interval[1] > nat[1]:
            raise ValueError(f"interval {interval} exceeds the profile domain {nat}")
        model = cls(space=space, A=A, profile=profile, interval=tuple(interval))
        win = model.compact_window()
        if profile.is_constant(win):
            raise ValueError("profile f must be nonconstant on the interval")
        return model

    @classmethod
    def raw(cls, space: PseudoEuclideanSpace, A, profile: ProfileF,
            interval: tuple[float, float]) -> "ModelManifold":
        """Unvalidated constructor for comparison geometries in tests."""
        return cls(space=space, A=_as_matrix(A), profile=profile,
                   interval=tuple(interval), non_ecs=True)

    # -- basic geometry -----------------------------------------------------

    @property
    def m(self) -> int:
        return self.space.dim

    @property
    def dim(self) -> int:
        return self.space.dim + 2

    def contains_t(self, t: float) -> bool:
        return self.interval[0] < t < self.interval[1]

    def compact_window(self) -> tuple[float, float]:
        """A canonical compact subinterval used for sampling and checks."""
        lo, hi = self.interval
        if np.isfinite(lo) and np.isfinite(hi):
            quarter = 0.25 * (hi - lo)
            return (lo + quarter, hi - quarter)
        if lo == 0.0 and hi == _INF:
            return (0.25, 4.0)
        if np.isfinite(lo):
            return (lo + 0.5, lo + 2.5)
        if np.isfinite(hi):
            return (hi - 2.5, hi - 0.5)
        return (-2.0, 2.0)

    def default_base_t(self) -> float:
        """Canonical base time: 1 on (0, inf), otherwise the window center."""
        lo, hi = self.interval
        if lo == 0.0 and hi == _INF:
            return 1.0
        if np.isfinite(lo) and np.isfinite(hi):
            return 0.5 * (lo + hi)
        if lo == -_INF and hi == _INF:
            return 0.0
        w = self.compact_window()
        return 0.5 * (w[0] + w[1])

    def f_plus_A(self, t: float) -> np.ndarray:
        """The endomorphism f(t) Id + A that drives every ODE in sight."""
        return float(self.profile.value(t)) * np.eye(self.m) + self.A

    def require_t(self, t: float):
        if not self.contains_t(t):
            raise ValueError(f"t = {t} lies outside the interval {self.interval}")

    def kappa(self, point: ChartPoint) -> float:
        self.require_t(point.t)
        v = point.v
        return float(self.profile.value(point.t)) * self.space.norm_sq(v) \
            + self.space.inner(self.A @ v, v)

    def validation_residuals(self) -> dict:
        """Structural residuals for reporting (never raises)."""
        val = validate_A(self.space, self.A)
        win = self.compact_window()
        ts = np.linspace(win[0], win[1], 17)
        vals = np.asarray([float(self.profile.value(t)) for t in ts])
        spread = float(np.max(vals) - np.min(vals))
        return {
            "self_adjoint_residual": val.self_adjoint_residual,
            "trace_residual": val.trace_residual,
            "A_norm": val.norm,
            "f_spread": spread,
        }


# ---------------------------------------------------------------------------
# metric jets
# ---------------------------------------------------------------------------

def metric_at(model: ModelManifold, point: ChartPoint) -> np.ndarray:
    """Matrix of g at the point, index order (t, s, v)."""
    n = model.dim
    g = np.zeros((n, n))
    g[0, 0] = model.kappa(point)
    g[0, 1] = g[1, 0] = 0.5
    g[2:, 2:] = model.space.gram
    return g


def metric_jet(model: ModelManifold, point: ChartPoint):
    """(g, dg, ddg, dddg) at the point, all in closed form.

    Layouts: dg[e,a,b] = d_e g_ab, ddg[e,f,a,b], dddg[e,f,h,a,b], symmetric
    in the derivative slots. Only the kappa corner of g depends on the point
    and only through (t, v), so the nonzero entries are the t/v derivatives
    of kappa.
    """
    n = model.dim
    gram = model.space.gram
    A = model.A
    t, v = point.t, point.v
    f = model.profile
    f1 = float(f.derivative(t, 1))
    f2 = float(f.derivative(t, 2))
    f3 = float(f.derivative(t, 3))
    f0 = float(f.value(t))
    vv = model.space.norm_sq(v)
    gv = gram @ v
    fa_gram = f0 * gram + gram @ A  # symmetric since gram A is symmetric

    g = metric_at(model, point)

    dg = np.zeros((n, n, n))
    dg[0, 0, 0] = f1 * vv
    grad_v = 2.0 * (fa_gram @ v)
    dg[2:, 0, 0] = grad_v

    ddg = np.zeros((n, n, n, n))
    ddg[0, 0, 0, 0] = f2 * vv
    ddg[0, 2:, 0, 0] = 2.0 * f1 * gv
    ddg[2:, 0, 0, 0] = 2.0 * f1 * gv
    ddg[2:, 2:, 0, 0] = 2.0 * fa_gram

    dddg = np.zeros((n, n, n, n, n))
    dddg[0, 0, 0, 0, 0] = f3 * vv
    dddg[0, 0, 2:, 0, 0] = 2.0 * f2 * gv
    dddg[0, 2:, 0, 0, 0] = 2.0 * f2 * gv
    dddg[2:, 0, 0, 0, 0] = 2.0 * f2 * gv
    dddg[0, 2:, 2:, 0, 0] = 2.0 * f1 * gram
    dddg[2:, 0, 2:, 0, 0] = 2.0 * f1 * gram
    dddg[2:, 2:, 0, 0, 0] = 2.0 * f1 * gram
    return g, dg, ddg, dddg


# ---------------------------------------------------------------------------
# generic curvature pipeline
# ---------------------------------------------------------------------------

@dataclass
class CurvaturePack:
    """Curvature data at a point. All tensors are in coordinate components,
    Riemann and Weyl fully lowered, covariant derivatives with the
    derivative index first."""

    g: np.ndarray
    g_inv: np.ndarray
    christoffel: np.ndarray      # Gamma[a,b,c] = Gamma^a_{bc}
    riemann: np.ndarray          # R[a,b,c,d] lowered
    ricci: np.ndarray
    scalar: float
    weyl: np.ndarray             # W[a,b,c,d] lowered
    nabla_riemann: np.ndarray    # (nabla_e R)[a,b,c,d]
    nabla_weyl: np.ndarray       # (nabla_e W)[a,b,c,d]


def curvature_from_jet(g, dg, ddg, dddg) -> CurvaturePack:
    """Assemble curvature from metric jets by exact tensor algebra.

    Works for any metric jet, not only the model family; tests feed it
    perturbed metrics to confirm the characteristic identities fail off the
    family.
    """
    n = g.shape[0]
    ginv = np.linalg.inv(g)
    dginv = -np.einsum("ax,exy,yb->eab", ginv, dg, ginv)
    ddginv = (
        -np.einsum("fax,exy,yb->efab", dginv, dg, ginv)
        - np.einsum("ax,efxy,yb->efab", ginv, ddg, ginv)
        - np.einsum("ax,exy,fyb->efab", ginv, dg, dginv)
    )

    # S[d,b,c] = d_b g_dc + d_c g_db - d_d g_bc and its derivatives.
    S = np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg
    dS = (
        np.transpose(ddg, (0, 2, 1, 3))
        + np.transpose(ddg, (0, 2, 3, 1))
        - ddg
    )
    ddS = (
        np.transpose(dddg, (0, 1, 3, 2, 4))
        + np.transpose(dddg, (0, 1, 3, 4, 2))
        - dddg
    )

    gamma = 0.5 * np.einsum("ad,dbc->abc", ginv, S)
    dgamma = 0.5 * (
        np.einsum("ead,dbc->eabc", dginv, S)
        + np.einsum("ad,edbc->eabc", ginv, dS)
    )
    ddgamma = 0.5 * (
        np.einsum("efad,dbc->efabc", ddginv, S)
        + np.einsum("ead,fdbc->efabc", dginv, dS)
        + np.einsum("fad,edbc->efabc", dginv, dS)
        + np.einsum("ad,efdbc->efabc", ginv, ddS)
    )

    # R^a_{bcd} and its coordinate derivative.
    r_up = (
        np.transpose(dgamma, (1, 3, 0, 2))
        - np.transpose(dgamma, (1, 3, 2, 0))
        + np.einsum("ace,edb->abcd", gamma, gamma)
        - np.einsum("ade,ecb->abcd", gamma, gamma)
    )
    dr_up = (
        np.transpose(ddgamma, (0, 2, 4, 1, 3))
        - np.transpose(ddgamma, (0, 2, 4, 3, 1))
        + np.einsum("eacx,xdb->eabcd", dgamma, gamma)
        + np.einsum("acx,exdb->eabcd", gamma, dgamma)
        - np.einsum("eadx,xcb->eabcd", dgamma, gamma)
        - np.einsum("adx,excb->eabcd", gamma, dgamma)
    )

    riem = np.einsum("ax,xbcd->abcd", g, r_up)
    driem = (
        np.einsum("eax,xbcd->eabcd", dg, r_up)
        + np.einsum("ax,exbcd->eabcd", g, dr_up)
    )

    ric = np.einsum("abad->bd", r_up)
    dric = np.einsum("eabad->ebd", dr_up)
    scal = float(np.einsum("bd,bd->", ginv, ric))
    dscal = np.einsum("ebd,bd->e", dginv, ric) + np.einsum("bd,ebd->e", ginv, dric)

    def kn(P, Q):
        """Kulkarni-Nomizu style wedge of two symmetric 2-tensors."""
        return (
            np.einsum("ac,bd->abcd", P, Q)
            - np.einsum("ad,bc->abcd", P, Q)
            + np.einsum("bd,ac->abcd", P, Q)
            - np.einsum("bc,ad->abcd", P, Q)
        )

    gg = np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g)
    weyl = riem - kn(g, ric) / (n - 2) + scal * gg / ((n - 1) * (n - 2))

    def dkn(P, dP, Q, dQ):
        return (
            np.einsum("eac,bd->eabcd", dP, Q) + np.einsum("ac,ebd->eabcd", P, dQ)
            - np.einsum("ead,bc->eabcd", dP, Q) - np.einsum("ad,ebc->eabcd", P, dQ)
            + np.einsum("ebd,ac->eabcd", dP, Q) + np.einsum("bd,eac->eabcd", P, dQ)
            - np.einsum("ebc,ad->eabcd", dP, Q) - np.einsum("bc,ead->eabcd", P, dQ)
        )

    dgg = (
        np.einsum("eac,bd->eabcd", dg, g) + np.einsum("ac,ebd->eabcd", g, dg)
        - np.einsum("ead,bc->eabcd", dg, g) - np.einsum("ad,ebc->eabcd", g, dg)
    )
    dweyl = (
        driem
        - dkn(g, dg, ric, dric) / (n - 2)
        + (np.einsum("e,abcd->eabcd", dscal, gg) + scal * dgg) / ((n - 1) * (n - 2))
    )

    def nabla04(T, dT):
        """Covariant derivative of a (0,4) tensor, derivative index first."""
        return (
            dT
            - np.einsum("xea,xbcd->eabcd", gamma, T)
            - np.einsum("xeb,axcd->eabcd", gamma, T)
            - np.einsum("xec,abxd->eabcd", gamma, T)
            - np.einsum("xed,abcx->eabcd", gamma, T)
        )

    return CurvaturePack(
        g=g, g_inv=ginv, christoffel=gamma, riemann=riem, ricci=ric,
        scalar=scal, weyl=weyl,
        nabla_riemann=nabla04(riem, driem),
        nabla_weyl=nabla04(weyl, dweyl),
    )


def curvature_at(model: ModelManifold, point: ChartPoint) -> CurvaturePack:
    """Curvature of the model metric at a chart point."""
    return curvature_from_jet(*metric_jet(model, point))


# ---------------------------------------------------------------------------
# characteristic checks
# ---------------------------------------------------------------------------

def _scale(pack: CurvaturePack) -> float:
    return max(1.0, float(np.max(np.abs(pack.riemann))))


def parallel_weyl_residual(pack: CurvaturePack) -> float:
    """max |nabla W| relative to the curvature scale; 0 on the model family."""
    return float(np.max(np.abs(pack.nabla_weyl))) / _scale(pack)


def nabla_riemann_norm(pack: CurvaturePack) -> float:
    """max |nabla R| relative to the curvature scale; strictly positive off
    local symmetry, which is what separates these models from symmetric
    spaces."""
    return float(np.max(np.abs(pack.nabla_riemann))) / _scale(pack)


def ricci_profile_residual(model: ModelManifold, point: ChartPoint,
                           pack: Optional[CurvaturePack] = None) -> float:
    """Residual of Ric = (2 - n) f dt x dt at the point."""
    n = model.dim
    if pack is None:
        pack = curvature_at(model, point)
    expected = np.zeros((n, n))
    expected[0, 0] = (2.0 - n) * float(model.profile.value(point.t))
    scale = max(1.0, float(np.max(np.abs(expected))))
    return float(np.max(np.abs(pack.ricci - expected))) / scale


def scalar_curvature(pack: CurvaturePack) -> float:
    return pack.scalar


def weyl_nonzero_norm(pack: CurvaturePack) -> float:
    """max |W| relative to curvature scale; bounded away from 0 on the family
    because the Weyl V-block is the nonzero endomorphism A."""
    return float(np.max(np.abs(pack.weyl))) / _scale(pack)


def christoffel_pattern_residual(model: ModelManifold, point: ChartPoint,
                                 pack: Optional[CurvaturePack] = None) -> float:
    """max |Gamma^a_{bc}| over pairs (b, c) tangent to the leaf {t} x R x V.

    Identically zero on the family: both lower indices in every nonzero
    Christoffel symbol involve t. This is the structural fact behind the
    leaves being flat and totally geodesic with exp = coordinate addition.
    """
    if pack is None:
        pack = curvature_at(model, point)
    return float(np.max(np.abs(pack.christoffel[:, 1:, 1:])))


def weyl_tidal_operator(model: ModelManifold, point: ChartPoint,
                        pack: Optional[CurvaturePack] = None) -> np.ndarray:
    """The V-block of v -> W(u, v) u for the observer u = 2 d/dt, divided by
    dt(u)^2 so the result is independent of the observer's scale.

    On the family this recovers the endomorphism A exactly, which makes A a
    curvature observable rather than a construction input. Here dt is the
    1-form g(2 d/ds, .), i.e. dt(u) = u^t.
    """
    if pack is None:
        pack = curvature_at(model, point)
    n = model.dim
    w_up = np.einsum("ax,xbcd->abcd", pack.g_inv, pack.weyl)
    u = np.zeros(n)
    u[0] = 2.0
    M = np.einsum("abcd,b,c->ad", w_up, u, u) / u[0] ** 2
    return M[2:, 2:]


def weyl_tidal_full(model: ModelManifold, point: ChartPoint) -> np.ndarray:
    """Full n x n matrix of the normalized tidal map (t and s rows vanish)."""
    pack = curvature_at(model, point)
    n = model.dim
    w_up = np.einsum("ax,xbcd->abcd", pack.g_inv, pack.weyl)
    u = np.zeros(n)
    u[0] = 2.0
    return np.einsum("abcd,b,c->ad", w_up, u, u) / u[0] ** 2


def olszak_span_check(model: ModelManifold, point: ChartPoint) -> dict:
    """Residuals showing span(d/ds) is the distinguished null parallel line.

    null_residual: |g(d/ds, d/ds)|. parallel_residual: max |Gamma^a_{b s}|,
    zero meaning nabla_X d/ds is proportional to d/ds (here actually zero).
    dt_residual: the 1-form g(2 d/ds, .) equals dt entrywise.
    """
    g = metric_at(model, point)
    pack = curvature_at(model, point)
    n = model.dim
    dt = np.zeros(n)
    dt[0] = 1.0
    return {
        "null_residual": abs(float(g[1, 1])),
        "parallel_residual": float(np.max(np.abs(pack.christoffel[:, :, 1]))),
        "dt_residual": float(np.max(np.abs(2.0 * g[1, :] - dt))),
    }


def curvature_identity_residuals(pack: CurvaturePack) -> dict:
    """Classical identities any curvature tensor must satisfy; used as an
    internal consistency oracle for the jet pipeline."""
    R = pack.riemann
    scale = _scale(pack)
    pair_sym = float(np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1)))))
    skew_ab = float(np.max(np.abs(R + np.transpose(R, (1, 0, 2, 3)))))
    skew_cd = float(np.max(np.abs(R + np.transpose(R, (0, 1, 3, 2)))))
    first_bianchi = float(np.max(np.abs(
        R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
    )))
    nR = pack.nabla_riemann
    second_bianchi = float(np.max(np.abs(
        nR
        + np.transpose(nR, (3, 1, 2, 4, 0))
        + np.transpose(nR, (4, 1, 2, 0, 3))
    )))
    W = pack.weyl
    w_trace = float(np.max(np.abs(np.einsum("bd,abcd->ac", pack.g_inv, W))))
    return {
        "pair_symmetry": pair_sym / scale,
        "skew_first_pair": skew_ab / scale,
        "skew_second_pair": skew_cd / scale,
        "first_bianchi": first_bianchi / scale,
        "second_bianchi": second_bianchi / scale,
        "weyl_traceless": w_trace / scale,
    }


def random_chart_point(model: ModelManifold, rng: np.random.Generator,
                       window: Optional[tuple[float, float]] = None,
                       v_scale: float = 1.0) -> ChartPoint:
    """Uniform t in the sampling window, normal s and v."""
    lo, hi = window if window is not None else model.compact_window()
    t = rng.uniform(lo, hi)
    s = float(rng.standard_normal())
    v = v_scale * rng.standard_normal(model.m)
    return ChartPoint(t, s, v)
