"""The symplectic space of transverse Jacobi-type solutions.

Solutions of the V-valued linear ODE

    u''(t) = f(t) u(t) + A u(t)

form a 2m-dimensional space E, represented here by Cauchy data
(value, derivative) at a base time. The pairing

    Omega(u, w) = <u'(t), w(t)> - <u(t), w'(t)>

is independent of t (differentiate and use self-adjointness of f + A), is
nondegenerate, and makes E a symplectic vector space. The associated
Heisenberg group R x E with product

    (r, u)(r', u') = (r + r' - Omega(u, u'), u + u')

acts on the model by isometries; its group law and commutator live here,
the full isometry group in isometry_group.

Propagation uses the fundamental matrix of the first-order system,
integrated once with a high-order adaptive scheme and dense output, then
evaluated in O(1) per query. Flows are cached on the model instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .model_geometry import ChartPoint, ModelManifold

# Queries are refused closer than this to a finite interval endpoint, where
# singular profiles blow up.
ENDPOINT_BARRIER = 1e-8

_RTOL = 1e-13
_ATOL = 1e-13


def _check_t(model: ModelManifold, t: float) -> float:
    t = float(t)
    lo, hi = model.interval
    if not (lo < t < hi):
        raise ValueError(f"time {t} outside the model interval {model.interval}")
    if np.isfinite(lo) and t - lo < ENDPOINT_BARRIER:
        raise ValueError(f"time {t} within the endpoint barrier at {lo}")
    if np.isfinite(hi) and hi - t < ENDPOINT_BARRIER:
        raise ValueError(f"time {t} within the endpoint barrier at {hi}")
    return t


class CauchyFlow:
    """Fundamental solution Phi(t <- t0) of u'' = (f + A) u.

    Phi(t) is the 2m x 2m matrix sending Cauchy data (value, deriv) at t0 to
    Cauchy data at t. Integration happens lazily: the first query beyond the
    covered range triggers a fresh dense integration out to that time, and
    later queries inside the range are interpolant lookups.
    """

    def __init__(self, model: ModelManifold, base_t: float):
        self.model = model
        self.base_t = _check_t(model, base_t)
        self.m = model.m
        self._fwd = None   # dense solution on [base_t, hi_reached]
        self._bwd = None   # dense solution on [lo_reached, base_t]
        self._hi = self.base_t
        self._lo = self.base_t

    def _rhs(self, t, y):
        m = self.m
        M = y.reshape(2 * m, 2 * m)
        top = M[m:, :]
        bot = self.model.f_plus_A(t) @ M[:m, :]
        return np.vstack([top, bot]).ravel()

    def _integrate(self, t_target: float):
        m = self.m
        y0 = np.eye(2 * m).ravel()
        sol = solve_ivp(
            self._rhs, (self.base_t, t_target), y0,
            method="DOP853", rtol=_RTOL, atol=_ATOL, dense_output=True,
        )
        if not sol.success:
            raise RuntimeError(f"flow integration failed: {sol.message}")
        return sol

    def _ensure(self, t: float):
        pad = 0.05 * max(1e-6, abs(t - self.base_t))
        if t > self._hi:
            target = t + pad
            hi = self.model.interval[1]
            if np.isfinite(hi):
                target = min(target, hi - ENDPOINT_BARRIER)
            self._fwd = self._integrate(target)
            self._hi = target
        elif t < self._lo:
            target = t - pad
            lo = self.model.interval[0]
            if np.isfinite(lo):
                target = max(target, lo + ENDPOINT_BARRIER)
            self._bwd = self._integrate(target)
            self._lo = target

    def matrix(self, t: float) -> np.ndarray:
        """Phi(t <- base_t) as a (2m, 2m) array."""
        t = _check_t(self.model, t)
        if t == self.base_t:
            return np.eye(2 * self.m)
        self._ensure(t)
        sol = self._fwd if t >= self.base_t else self._bwd
        return sol.sol(t).reshape(2 * self.m, 2 * self.m)


def flow(model: ModelManifold, base_t: Optional[float] = None) -> CauchyFlow:
    """The cached fundamental flow of the model at the given base time."""
    if base_t is None:
        base_t = model.default_base_t()
    key = float(base_t)
    fl = model._flows.get(key)
    if fl is None:
        fl = CauchyFlow(model, key)
        model._flows[key] = fl
    return fl


@dataclass
class SolutionE:
    """An element of E as Cauchy data (value, deriv) at base_t."""

    model: ModelManifold
    base_t: float
    value: np.ndarray
    deriv: np.ndarray

    def __post_init__(self):
        self.base_t = float(self.base_t)
        self.value = np.asarray(self.value, dtype=float).reshape(-1)
        self.deriv = np.asarray(self.deriv, dtype=float).reshape(-1)
        if self.value.shape != (self.model.m,) or self.deriv.shape != (self.model.m,):
            raise ValueError("Cauchy data must have the dimension of V")

    def data(self) -> np.ndarray:
        return np.concatenate([self.value, self.deriv])

    @staticmethod
    def from_data(model: ModelManifold, base_t: float, data) -> "SolutionE":
        data = np.asarray(data, dtype=float).reshape(-1)
        m = model.m
        return SolutionE(model, base_t, data[:m], data[m:])

    def __add__(self, other: "SolutionE") -> "SolutionE":
        _same_base(self, other)
        return SolutionE(self.model, self.base_t,
                         self.value + other.value, self.deriv + other.deriv)

    def __sub__(self, other: "SolutionE") -> "SolutionE":
        _same_base(self, other)
        return SolutionE(self.model, self.base_t,
                         self.value - other.value, self.deriv - other.deriv)

    def __neg__(self) -> "SolutionE":
        return SolutionE(self.model, self.base_t, -self.value, -self.deriv)

    def scaled(self, a: float) -> "SolutionE":
        return SolutionE(self.model, self.base_t, a * self.value, a * self.deriv)

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """(u(t), u'(t)) by propagating the Cauchy data."""
        data = flow(self.model, self.base_t).matrix(t) @ self.data()
        m = self.model.m
        return data[:m], data[m:]


def _same_base(u: SolutionE, w: SolutionE):
    if u.model is not w.model:
        raise ValueError("solutions belong to different models")
    if u.base_t != w.base_t:
        raise ValueError("solutions carry Cauchy data at different base times")


def zero_solution(model: ModelManifold, base_t: Optional[float] = None) -> SolutionE:
    if base_t is None:
        base_t = model.default_base_t()
    m = model.m
    return SolutionE(model, base_t, np.zeros(m), np.zeros(m))


def basis_E(model: ModelManifold, base_t: Optional[float] = None) -> list[SolutionE]:
    """The 2m Cauchy-coordinate basis solutions at the base time."""
    if base_t is None:
        base_t = model.default_base_t()
    m = model.m
    eye = np.eye(2 * m)
    return [SolutionE.from_data(model, base_t, eye[:, j]) for j in range(2 * m)]


def propagate(sol: SolutionE, new_base_t: float) -> SolutionE:
    """The same solution re-anchored at a different base time."""
    data = flow(sol.model, sol.base_t).matrix(new_base_t) @ sol.data()
    return SolutionE.from_data(sol.model, new_base_t, data)


def omega(u: SolutionE, w: SolutionE) -> float:
    """Symplectic pairing <u', w> - <u, w'>, evaluated at the shared base."""
    _same_base(u, w)
    gram = u.model.space.gram
    return float(u.deriv @ gram @ w.value - u.value @ gram @ w.deriv)


def omega_matrix(model: ModelManifold) -> np.ndarray:
    """Matrix of Omega in Cauchy coordinates (value block, deriv block).

    Omega(x, y) = x^T J y with J = [[0, -gram], [gram, 0]]; in particular
    det J = det(gram)^2 != 0, so the pairing is a symplectic form.
    """
    m = model.m
    gram = model.space.gram
    J = np.zeros((2 * m, 2 * m))
    J[:m, m:] = -gram
    J[m:, :m] = gram
    return J


def omega_drift(u: SolutionE, w: SolutionE, ts: Iterable[float]) -> float:
    """max deviation of Omega evaluated from propagated data along ts.

    Constancy of Omega in t is the first nontrivial conservation law of the
    system; this is the direct numerical witness.
    """
    base = omega(u, w)
    gram = u.model.space.gram
    worst = 0.0
    for t in ts:
        uv, ud = u.at(t)
        wv, wd = w.at(t)
        val = float(ud @ gram @ wv - uv @ gram @ wd)
        worst = max(worst, abs(val - base))
    return worst


def isotropic_span_residual(sols: list[SolutionE]) -> float:
    """max |Omega(u_i, u_j)| over pairs; 0 means the span is isotropic."""
    worst = 0.0
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            worst = max(worst, abs(omega(sols[i], sols[j])))
    return worst


def random_solution(model: ModelManifold, rng: np.random.Generator,
                    base_t: Optional[float] = None, scale: float = 1.0) -> SolutionE:
    if base_t is None:
        base_t = model.default_base_t()
    m = model.m
    return SolutionE(model, base_t,
                     scale * rng.standard_normal(m),
                     scale * rng.standard_normal(m))


# ---------------------------------------------------------------------------
# Heisenberg group of the pairing
# ---------------------------------------------------------------------------

@dataclass
class HeisenbergElement:
    """Element (r, u) of the central extension R x E."""

    r: float
    u: SolutionE

    def __post_init__(self):
        self.r = float(self.r)


def heisenberg_mul(a: HeisenbergElement, b: HeisenbergElement) -> HeisenbergElement:
    return HeisenbergElement(a.r + b.r - omega(a.u, b.u), a.u + b.u)


def heisenberg_inverse(a: HeisenbergElement) -> HeisenbergElement:
    # Omega(u, -u) = 0, so the central part just flips sign.
    return HeisenbergElement(-a.r, -a.u)


def heisenberg_identity(model: ModelManifold,
                        base_t: Optional[float] = None) -> HeisenbergElement:
    return HeisenbergElement(0.0, zero_solution(model, base_t))


def heisenberg_commutator(a: HeisenbergElement, b: HeisenbergElement) -> HeisenbergElement:
    """a b a^{-1} b^{-1}; lands in the center with charge -2 Omega(u_a, u_b)."""
    ab = heisenberg_mul(a, b)
    return heisenberg_mul(ab, heisenberg_mul(heisenberg_inverse(a), heisenberg_inverse(b)))
