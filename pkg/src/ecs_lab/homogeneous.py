"""Dilational structure of the homogeneous models.

For the profile f(t) = (c^2 - 1/4)/t^2 on I = (0, inf), with A nilpotent of
full order in an adapted basis, the structural group contains the dilations
sigma_q = (q, 0, C_q), where C_q is the scaling isometry of the adapted
basis. Their action on the solution space E,

    (sigma_q . u)(t) = C_q u(t / q),

has eigenvalues q^{kappa} with exponents

    kappa_j^{-+} = m + 1/2 - 2j -+ c,   j = 1..m,

so its one-parameter generator B = d/d(log q) sigma_q has the kappa as
eigenvalues. The kernel E_0 of B is one-dimensional exactly when 2c is an
odd integer (one exponent hits zero), otherwise zero; E = E_0 + E_plus is
the induced algebraic splitting, with E_plus the range of B.

On the subgroup G_0 (elements with sigma = sigma_q) the map

    J(a, z, q, w) = (q, a (1 - q^{-1}) + Omega(z, sigma_q z + (1 + q^{-1}) w),
                     (sigma_q - 1) z + w),      z in E_plus, w in E_0,

parametrizes elements by their maximal commuting class: two elements with
q, q' != 1 commute exactly when they share (a, z). This module carries the
dilations, the generator, the splitting, J and its inverse, the commutation
test, and the conjugation spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model_geometry import HomogeneousProfile, ModelManifold
from .pseudo_linear import (
    FitBasis,
    PseudoEuclideanSpace,
    fit_basis,
    scaling_isometry,
)
from .solution_space import SolutionE, omega, omega_matrix, zero_solution
from .isometry_group import IsoElement, SElement, sigma_act, sigma_matrix

# Relative singular-value cutoff separating the kernel of the generator from
# its range. The smallest nonzero |kappa| across the supported parameter
# range stays above 0.2 while integrator noise sits near 1e-9, so the gap is
# wide; 1e-4 splits it safely.
KERNEL_RTOL = 1e-4


def standard_homogeneous_space(m: int, epsilon: float = 1.0) -> tuple[PseudoEuclideanSpace, np.ndarray]:
    """Canonical pair: anti-diagonal Gram with entries epsilon and the upper
    shift A e_j = e_{j-1}, which is self-adjoint for that Gram and nilpotent
    of full order."""
    gram = epsilon * np.fliplr(np.eye(m))
    A = np.eye(m, k=1)
    return PseudoEuclideanSpace(gram), A


@dataclass
class HomogeneousModel:
    """A model with homogeneous profile, full-order nilpotent A, I = (0, inf),
    together with the adapted basis that defines its scaling isometries.
    Cauchy data is anchored at base_t = 1."""

    model: ModelManifold
    fit: FitBasis
    c: complex

    @property
    def base_t(self) -> float:
        return 1.0

    @property
    def m(self) -> int:
        return self.model.m

    @classmethod
    def standard(cls, m: int, c, epsilon: float = 1.0) -> "HomogeneousModel":
        space, A = standard_homogeneous_space(m, epsilon)
        profile = HomogeneousProfile(c)
        model = ModelManifold.ecs(space, A, profile)
        return cls(model=model, fit=fit_basis(space, A), c=profile.c)

    @classmethod
    def from_model(cls, model: ModelManifold) -> "HomogeneousModel":
        if not isinstance(model.profile, HomogeneousProfile):
            raise ValueError("model profile is not homogeneous")
        if model.interval != (0.0, float("inf")):
            raise ValueError("homogeneous structure needs I = (0, inf)")
        return cls(model=model, fit=fit_basis(model.space, model.A),
                   c=model.profile.c)

    def c_matrix(self, q: float, delta: float = 1.0) -> np.ndarray:
        return scaling_isometry(self.model.space, self.fit, q, delta)

    def dilation(self, q: float, delta: float = 1.0) -> SElement:
        """The structural element sigma_q = (q, 0, C_q)."""
        return SElement(q, 0.0, self.c_matrix(q, delta))

    def sigma_q_matrix(self, q: float) -> np.ndarray:
        """Matrix of sigma_q on E in Cauchy coordinates at base 1."""
        return sigma_matrix(self.model, self.dilation(q), self.base_t)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

def spectral_exponents(m: int, c: complex) -> np.ndarray:
    """The 2m exponents kappa_j^{-+} = m + 1/2 - 2j -+ c, complex in general."""
    c = complex(c)
    out = []
    for j in range(1, m + 1):
        base = m + 0.5 - 2 * j
        out.extend([base - c, base + c])
    return np.asarray(out, dtype=complex)


@dataclass
class SpectrumCheck:
    predicted: np.ndarray
    computed: np.ndarray
    max_rel_error: float


def _match_multisets(predicted: np.ndarray, computed: np.ndarray) -> float:
    """Best-bijection matching error between two eigenvalue lists, measured
    relative to |predicted| above unit scale and absolutely below it (a
    predicted eigenvalue of exactly 0 is matched by absolute error)."""
    pr = np.asarray(predicted, dtype=complex)
    co = np.asarray(computed, dtype=complex)
    scale = np.maximum(np.abs(pr)[:, None], 1.0)
    cost = np.abs(pr[:, None] - co[None, :]) / scale
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def dilation_spectrum_check(hm: HomogeneousModel, q: float) -> SpectrumCheck:
    """Eigenvalues of sigma_q on E against the predicted q^kappa multiset."""
    M = hm.sigma_q_matrix(q)
    computed = np.linalg.eigvals(M)
    kappa = spectral_exponents(hm.m, hm.c)
    predicted = np.exp(np.log(q) * kappa)
    return SpectrumCheck(predicted, computed,
                         _match_multisets(predicted, computed))


def generator_matrix(hm: HomogeneousModel, h: float = 1e-3) -> np.ndarray:
    """Generator B = d/dr|_{r=0} sigma_{e^r} by Richardson-extrapolated
    central differences in q around 1. With the smooth q-dependence of the
    flow the O(h^4) truncation sits near 1e-13 for h = 1e-3."""

    def central(step: float) -> np.ndarray:
        return (hm.sigma_q_matrix(1.0 + step) - hm.sigma_q_matrix(1.0 - step)) / (2.0 * step)

    d1 = central(h)
    d2 = central(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def generator_spectrum_check(hm: HomogeneousModel,
                             B: Optional[np.ndarray] = None) -> SpectrumCheck:
    if B is None:
        B = generator_matrix(hm)
    computed = np.linalg.eigvals(B)
    predicted = spectral_exponents(hm.m, hm.c)
    return SpectrumCheck(predicted, computed,
                         _match_multisets(predicted, computed))


def exponential_consistency_residual(hm: HomogeneousModel, q: float,
                                     B: Optional[np.ndarray] = None) -> float:
    """Residual of expm(log(q) B) = sigma_q, tying generator and group."""
    from scipy.linalg import expm

    if B is None:
        B = generator_matrix(hm)
    M = hm.sigma_q_matrix(q)
    E = expm(np.log(q) * B)
    return float(np.max(np.abs(E - M))) / max(1.0, float(np.max(np.abs(M))))


# ---------------------------------------------------------------------------
# kernel/range splitting of the generator
# ---------------------------------------------------------------------------

@dataclass
class SpectralSplit:
    """Algebraic splitting E = E_0 + E_plus: e0 spans ker B, eplus spans
    range B. The splitting is direct but not Omega-orthogonal."""

    e0: np.ndarray      # (2m, k), k in {0, 1}
    eplus: np.ndarray   # (2m, 2m - k)

    @property
    def kernel_dim(self) -> int:
        return self.e0.shape[1]

    def combined(self) -> np.ndarray:
        return np.hstack([self.eplus, self.e0])

    def decompose(self, data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients (plus_part, zero_part) of data in the split basis."""
        coeff = np.linalg.solve(self.combined(), data)
        k = self.eplus.shape[1]
        return coeff[:k], coeff[k:]


def expected_kernel_dim(c: complex) -> int:
    """dim ker B is 1 exactly when 2c is an odd integer (a kappa vanishes)."""
    c = complex(c)
    if abs(c.imag) > 1e-12:
        return 0
    two_c = 2.0 * c.real
    return 1 if abs(two_c - round(two_c)) < 1e-12 and round(two_c) % 2 != 0 else 0


def spectral_split(hm: HomogeneousModel,
                   B: Optional[np.ndarray] = None) -> SpectralSplit:
    if B is None:
        B = generator_matrix(hm)
    U, sv, Vt = np.linalg.svd(B)
    small = sv <= KERNEL_RTOL * sv[0]
    k = int(np.sum(small))
    e0 = Vt[2 * hm.m - k:, :].T if k else np.zeros((2 * hm.m, 0))
    eplus = U[:, : 2 * hm.m - k]
    return SpectralSplit(e0=e0, eplus=eplus)


# ---------------------------------------------------------------------------
# the subgroup G_0 and its commuting classes
# ---------------------------------------------------------------------------

@dataclass
class G0Element:
    """Element (q, r, u) of the subgroup with sigma = sigma_q, p = 0."""

    q: float
    r: float
    u: SolutionE

    def __post_init__(self):
        self.q = float(self.q)
        self.r = float(self.r)
        if self.q <= 0:
            raise ValueError("q must be positive")


def g0_element(hm: HomogeneousModel, q: float, r: float, data) -> G0Element:
    u = SolutionE.from_data(hm.model, hm.base_t, data)
    return G0Element(q, r, u)


def g0_to_iso(hm: HomogeneousModel, g: G0Element) -> IsoElement:
    return IsoElement(hm.dilation(g.q), g.r, g.u)


def g0_compose(hm: HomogeneousModel, a: G0Element, b: G0Element) -> G0Element:
    moved = sigma_act(hm.model, hm.dilation(a.q), b.u)
    return G0Element(a.q * b.q,
                     a.r + b.r / a.q - omega(a.u, moved),
                     a.u + moved)


def g0_inverse(hm: HomogeneousModel, a: G0Element) -> G0Element:
    moved = sigma_act(hm.model, hm.dilation(1.0 / a.q), a.u)
    return G0Element(1.0 / a.q, -a.q * a.r, moved.scaled(-1.0))


def g0_identity(hm: HomogeneousModel) -> G0Element:
    return G0Element(1.0, 0.0, zero_solution(hm.model, hm.base_t))


def g0_distance(a: G0Element, b: G0Element) -> float:
    """Coordinate distance used by equality-style assertions."""
    return max(
        abs(a.q - b.q),
        abs(a.r - b.r),
        float(np.max(np.abs(a.u.data() - b.u.data()))),
    )


def commute_residual(hm: HomogeneousModel, a: G0Element, b: G0Element) -> float:
    """Coordinate distance between ab and ba; 0 means the pair commutes."""
    return g0_distance(g0_compose(hm, a, b), g0_compose(hm, b, a))


@dataclass
class CommuteTest:
    """Outcome of the two commutation routes for a pair of group elements.

    `direct` compares the coordinates of ab and ba. `criterion` evaluates
    the closed-form characterization: the solution parts must satisfy
    (sigma_q - 1) u_hat = (sigma_qhat - 1) u, and the central parts the
    matching scalar equation. The two booleans agree up to roundoff at the
    shared tolerance.
    """

    direct: bool
    criterion: bool
    direct_residual: float
    criterion_residual: float

    @property
    def agree(self) -> bool:
        return self.direct == self.criterion


def commute_test(hm: HomogeneousModel, a: G0Element, b: G0Element,
                 tol: float = 1e-8) -> CommuteTest:
    model = hm.model
    moved_b = sigma_act(model, hm.dilation(a.q), b.u)
    moved_a = sigma_act(model, hm.dilation(b.q), a.u)

    direct_residual = max(
        abs((a.r + b.r / a.q - omega(a.u, moved_b))
            - (b.r + a.r / b.q - omega(b.u, moved_a))),
        float(np.max(np.abs((a.u + moved_b).data() - (b.u + moved_a).data()))),
    )

    solution_eq = float(np.max(np.abs(
        (moved_b - b.u).data() - (moved_a - a.u).data())))
    central_eq = abs(
        a.r * (1.0 - 1.0 / b.q) - b.r * (1.0 - 1.0 / a.q)
        - omega(a.u, moved_b) + omega(b.u, moved_a))
    criterion_residual = max(solution_eq, central_eq)

    return CommuteTest(
        direct=bool(direct_residual <= tol),
        criterion=bool(criterion_residual <= tol),
        direct_residual=direct_residual,
        criterion_residual=criterion_residual,
    )


@dataclass
class TransitivityReport:
    """Sampled evidence that commutation is transitive away from the center.

    Each trial builds x, y, z in one commuting class (shared (a, z) labels
    through class_map, all dilation parts away from 1), verifies the two
    premises xy = yx and yz = zy, and then tests the conclusion xz = zx.
    A counterexample would be a trial with both premises holding and the
    conclusion failing.
    """

    triples: int
    premise_failures: int
    counterexamples: int
    worst_conclusion_residual: float


def transitive_commutation_check(hm: HomogeneousModel,
                                 split: SpectralSplit,
                                 n_triples: int,
                                 rng: np.random.Generator,
                                 tol: float = 1e-8) -> TransitivityReport:
    m2 = 2 * hm.m
    premise_failures = 0
    counterexamples = 0
    worst = 0.0
    for _ in range(n_triples):
        a_label = float(rng.standard_normal())
        z_label = split.eplus @ rng.standard_normal(split.eplus.shape[1])
        members = []
        for _ in range(3):
            q = float(np.exp(rng.uniform(-np.log(4.0), np.log(4.0))))
            if abs(q - 1.0) < 0.05:
                q *= 1.2
            w = split.e0 @ rng.standard_normal(split.kernel_dim) \
                if split.kernel_dim else np.zeros(m2)
            members.append(class_map(hm, a_label, z_label, q, w))
        x, y, z = members
        if not (commute_test(hm, x, y, tol).direct
                and commute_test(hm, y, z, tol).direct):
            premise_failures += 1
            continue
        conclusion = commute_test(hm, x, z, tol)
        worst = max(worst, conclusion.direct_residual)
        if not conclusion.direct:
            counterexamples += 1
    return TransitivityReport(n_triples, premise_failures, counterexamples, worst)


def conjugation_matrix(hm: HomogeneousModel, g: G0Element) -> np.ndarray:
    """Matrix of x -> g x g^{-1} restricted to the Heisenberg factor, in
    coordinates (r, u-data). Block triangular: the center scales by 1/q and
    the E-block is sigma_q, so the spectrum is {1/q} union spec(sigma_q)."""
    m2 = 2 * hm.m
    M = hm.sigma_q_matrix(g.q)
    J = omega_matrix(hm.model)
    out = np.zeros((1 + m2, 1 + m2))
    out[0, 0] = 1.0 / g.q
    # r-row: conjugating (0, u') picks up -2 Omega(u, sigma_q u').
    out[0, 1:] = -2.0 * (g.u.data() @ J @ M)
    out[1:, 1:] = M
    return out


def conjugation_spectrum_check(hm: HomogeneousModel, g: G0Element) -> SpectrumCheck:
    M = conjugation_matrix(hm, g)
    computed = np.linalg.eigvals(M)
    kappa = spectral_exponents(hm.m, hm.c)
    predicted = np.concatenate([
        [complex(1.0 / g.q)],
        np.exp(np.log(g.q) * kappa),
    ])
    return SpectrumCheck(predicted, computed,
                         _match_multisets(predicted, computed))


def class_map(hm: HomogeneousModel, a: float, z_data, q: float, w_data) -> G0Element:
    """J(a, z, q, w): the element of the commuting class labeled (a, z) with
    dilation q and kernel displacement w."""
    model = hm.model
    z = SolutionE.from_data(model, hm.base_t, z_data)
    w = SolutionE.from_data(model, hm.base_t, w_data)
    sq = hm.dilation(q)
    sz = sigma_act(model, sq, z)
    r = a * (1.0 - 1.0 / q) + omega(z, sz + w.scaled(1.0 + 1.0 / q))
    u = (sz - z) + w
    return G0Element(q, r, u)


def class_map_inverse(hm: HomogeneousModel, g: G0Element,
                      split: Optional[SpectralSplit] = None) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Recover (a, z, q, w) from an element with q != 1.

    u decomposes along E = E_plus + E_0; z solves (sigma_q - 1) z = u_plus on
    E_plus (invertible there for q != 1), w is the kernel part, and a is read
    off the r-equation.
    """
    if abs(g.q - 1.0) < 1e-10:
        raise ValueError("class parametrization needs q != 1")
    if split is None:
        split = spectral_split(hm)
    model = hm.model
    m2 = 2 * hm.m
    M = hm.sigma_q_matrix(g.q)
    u_plus_coeff, u_zero_coeff = split.decompose(g.u.data())
    u_plus = split.eplus @ u_plus_coeff
    w_data = split.e0 @ u_zero_coeff if split.kernel_dim else np.zeros(m2)

    # Solve (M - I) z = u_plus within E_plus.
    shifted = (M - np.eye(m2)) @ split.eplus
    coeff, *_ = np.linalg.lstsq(shifted, u_plus, rcond=None)
    z_data = split.eplus @ coeff

    z = SolutionE.from_data(model, hm.base_t, z_data)
    w = SolutionE.from_data(model, hm.base_t, w_data)
    sz = sigma_act(model, hm.dilation(g.q), z)
    off = omega(z, sz + w.scaled(1.0 + 1.0 / g.q))
    a = (g.r - off) / (1.0 - 1.0 / g.q)
    return a, z_data, g.q, w_data


def shifted_invertibility(hm: HomogeneousModel, q: float,
                          split: Optional[SpectralSplit] = None) -> dict:
    """Smallest singular value of (sigma_q - 1)|E_plus (in the split basis)
    and the norm of (sigma_q - 1) on E_0; the first must stay away from 0
    for q != 1, the second near 0 always."""
    if split is None:
        split = spectral_split(hm)
    m2 = 2 * hm.m
    M = hm.sigma_q_matrix(q)
    shifted = M - np.eye(m2)
    img = shifted @ split.eplus
    coeff = np.linalg.solve(split.combined(), img)
    k = split.eplus.shape[1]
    on_plus = coeff[:k, :]
    leak = float(np.max(np.abs(coeff[k:, :]))) if split.kernel_dim else 0.0
    sv = np.linalg.svd(on_plus, compute_uv=False)
    kernel_norm = float(np.max(np.abs(shifted @ split.e0))) if split.kernel_dim else 0.0
    return {
        "min_singular_value": float(sv[-1]),
        "range_leak_into_kernel": leak,
        "kernel_fixed_residual": kernel_norm,
    }


def normalize_to_standard(h: float, t0: float) -> tuple[float, float, complex]:
    """Bring f(t) = h (t - t0)^{-2} on (t0, inf) to the standard homogeneous
    form: the affine change (q, p) = (1, -t0) and c with c^2 = h + 1/4,
    taken real nonnegative or positive imaginary."""
    c_sq = h + 0.25
    if c_sq >= 0:
        c = complex(np.sqrt(c_sq), 0.0)
    else:
        c = complex(0.0, np.sqrt(-c_sq))
    return (1.0, -float(t0), c)
