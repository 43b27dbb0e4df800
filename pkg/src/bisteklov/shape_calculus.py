"""Shape derivatives of Steklov eigenvalues under normal boundary perturbations.

For a cluster F of eigenvalues (a full near-degenerate group) the elementary
symmetric functions of the cluster are differentiable with respect to the domain
even where individual eigenvalues are not.  Their derivative along a normal
velocity field g is a single weighted boundary integral of eigenfunction trace
data; this module evaluates it, realizes perturbed domains for finite-difference
validation, and measures how far a domain is from criticality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainValidationError, NumericalError
from .geometry import StarDomain, boundary_geometry
from .steklov_solver import (
    EigenSolution,
    TrialBasis,
    assemble,
    eigenfunction_boundary_data,
    make_trial_basis,
    solve,
)

_CLUSTER_SPREAD_TOL = 1e-4
_COEF_TRIM = 1e-13


@dataclass(frozen=True)
class PerturbationField:
    """Normal velocity g(theta) = const + sum_k (c_k cos k theta + s_k sin k theta) on the boundary."""

    const: float = 0.0
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()

    @property
    def max_mode(self) -> int:
        return max(len(self.cos_coeffs), len(self.sin_coeffs))

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        g = np.full_like(theta, self.const)
        for k, c in enumerate(self.cos_coeffs, start=1):
            if c != 0.0:
                g += c * np.cos(k * theta)
        for k, c in enumerate(self.sin_coeffs, start=1):
            if c != 0.0:
                g += c * np.sin(k * theta)
        return g


def volume_preserving_projection(
    field: PerturbationField, domain: StarDomain, n_nodes: int = 512
) -> PerturbationField:
    """Remove the constant offset that changes area at first order.

    The linearized volume change under normal velocity g is the boundary integral
    of g, so subtracting its arc-length mean makes the field volume preserving.
    """
    bq = boundary_geometry(domain, n_nodes)
    g = field.evaluate(bq.thetas)
    mean = float(np.dot(bq.weights, g) / bq.weights.sum())
    return PerturbationField(
        const=field.const - mean, cos_coeffs=field.cos_coeffs, sin_coeffs=field.sin_coeffs
    )


def is_volume_preserving(
    field: PerturbationField, domain: StarDomain, n_nodes: int = 512, tol: float = 1e-12
) -> bool:
    """Whether the boundary integral of g vanishes to the given tolerance."""
    bq = boundary_geometry(domain, n_nodes)
    g = field.evaluate(bq.thetas)
    total = float(np.dot(bq.weights, g))
    scale = max(1.0, float(np.dot(bq.weights, np.abs(g))))
    return abs(total) <= tol * scale


def symmetric_function(eigenvalues, F: tuple[int, ...], s: int) -> float:
    """Elementary symmetric function e_s of the eigenvalues selected by 1-based indexes F.

    Evaluated with the stable one-pass recurrence, never by expanding products of
    subsets.
    """
    F = tuple(F)
    if len(set(F)) != len(F) or not F:
        raise DomainValidationError(f"F must be a nonempty set of distinct indexes, got {F}")
    if not (1 <= s <= len(F)):
        raise DomainValidationError(f"s must lie in 1..{len(F)}, got {s}")
    n = len(eigenvalues)
    for j in F:
        if not (1 <= j <= n):
            raise DomainValidationError(f"index {j} outside 1..{n}")
    e = [1.0] + [0.0] * s
    for j in F:
        x = float(eigenvalues[j - 1])
        for i in range(s, 0, -1):
            e[i] += x * e[i - 1]
    return e[s]


def _check_cluster(solution: EigenSolution, F: tuple[int, ...]) -> float:
    """Validate that F is a full, well-separated near-degenerate group; return its mean."""
    F = tuple(sorted(F))
    if list(F) != list(range(F[0], F[-1] + 1)):
        raise DomainValidationError(f"F must be a contiguous index range, got {F}")
    lam = solution.eigenvalues
    if F[-1] > len(lam):
        raise DomainValidationError(f"F={F} exceeds the number of computed eigenvalues")
    vals = lam[[j - 1 for j in F]]
    lam_f = float(vals.mean())
    spread = float(vals.max() - vals.min())
    if spread > _CLUSTER_SPREAD_TOL * max(1.0, abs(lam_f)):
        raise DomainValidationError(
            f"eigenvalues of F={F} spread by {spread:.3e}; not a degenerate cluster"
        )
    lo, hi = solution.cluster_of(F[0])
    if (lo, hi) != (F[0], F[-1]):
        raise DomainValidationError(
            f"F={F} does not cover its full degenerate cluster {(lo, hi)}"
        )
    return lam_f


def _trace_integrand(
    solution: EigenSolution,
    domain: StarDomain,
    basis: TrialBasis,
    F: tuple[int, ...],
    lam_f: float,
    n_nodes: int,
):
    """Per-node boundary density whose weighted integral against g gives the derivative."""
    tr = eigenfunction_boundary_data(solution, domain, basis, tuple(F), n_nodes)
    v, dvdn, g, h = tr.values, tr.normal_derivatives, tr.gradients, tr.hessians
    grad2 = np.einsum("mnc,mnc->mn", g, g)
    hess2 = h[:, :, 0] ** 2 + 2.0 * h[:, :, 1] ** 2 + h[:, :, 2] ** 2
    per_mode = lam_f * (tr.quad.curvatures[None, :] * v**2 + 2.0 * v * dvdn)
    per_mode = per_mode - basis.tau * grad2 - hess2
    return tr.quad, per_mode.sum(axis=0)


def hadamard_derivative(
    domain: StarDomain,
    solution: EigenSolution,
    basis: TrialBasis,
    F: tuple[int, ...],
    s: int,
    field: PerturbationField,
    n_nodes: int = 512,
) -> float:
    """Derivative of e_s over the eigenvalue cluster F along the normal field g.

    Parameters
    ----------
    F : tuple of int
        1-based eigenvalue indexes forming a complete near-degenerate cluster
        (relative spread below 1e-4).
    s : int
        Order of the elementary symmetric function, 1 <= s <= |F|.
    field : PerturbationField
        Normal velocity g on the boundary.

    Notes
    -----
    With boundary-orthonormal eigenfunctions v_m of the cluster and lambda_F the
    cluster mean, the derivative equals

        - lambda_F^(s-1) C(|F|-1, s-1) *
          boundary integral of [ sum_m ( lambda_F (K v_m^2 + 2 v_m dv_m/dnu)
                                          - tau |grad v_m|^2 - |D^2 v_m|^2 ) ] g.

    The trivial cluster F = {1} (lambda = 0, constant eigenfunction) has an
    identically vanishing density and returns exactly 0.
    """
    F = tuple(sorted(F))
    if not (1 <= s <= len(F)):
        raise DomainValidationError(f"s must lie in 1..{len(F)}, got {s}")
    lam_f = _check_cluster(solution, F)
    if abs(lam_f) <= 1e-9 * max(1.0, basis.tau):
        return 0.0
    quad, density = _trace_integrand(solution, domain, basis, F, lam_f, n_nodes)
    g = field.evaluate(quad.thetas)
    integral = float(np.dot(quad.weights, density * g))
    return -(lam_f ** (s - 1)) * math.comb(len(F) - 1, s - 1) * integral


def criticality_residual(
    domain: StarDomain,
    solution: EigenSolution,
    basis: TrialBasis,
    F: tuple[int, ...],
    n_nodes: int = 512,
) -> tuple[float, float]:
    """How far the cluster F is from shape criticality under volume-preserving fields.

    The derivative vanishes for every volume-preserving field exactly when the
    trace density is constant along the boundary.  Returns (c_best, residual):
    the arc-length mean of the density and the normalized RMS deviation from it,
    residual = ||density - c_best||_rms / (|c_best| + 1).
    """
    F = tuple(sorted(F))
    lam_f = _check_cluster(solution, F)
    if abs(lam_f) <= 1e-9 * max(1.0, basis.tau):
        return 0.0, 0.0
    quad, density = _trace_integrand(solution, domain, basis, F, lam_f, n_nodes)
    L = float(quad.weights.sum())
    c_best = float(np.dot(quad.weights, density) / L)
    dev = density - c_best
    residual = math.sqrt(float(np.dot(quad.weights, dev * dev)) / L) / (abs(c_best) + 1.0)
    return c_best, residual


def realize_perturbation(domain: StarDomain, field: PerturbationField, t: float) -> StarDomain:
    """Domain whose boundary is displaced by t g(theta) along the outward normal.

    A radial change delta rho moves the boundary normally by delta rho times
    rho / sqrt(rho^2 + rho'^2), so the radius update is

        rho_t(theta) = rho(theta) + t g(theta) sqrt(rho^2 + rho'^2) / rho,

    re-expanded in a trigonometric series by FFT with small coefficients trimmed.
    """
    n = 256
    need = 8 * (domain.max_mode + field.max_mode + 4)
    while n < need:
        n *= 2
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    r, r1, _ = domain.rho_derivatives(th)
    g = field.evaluate(th)
    new_r = r + t * g * np.sqrt(r * r + r1 * r1) / r
    if not np.all(new_r > 0.0):
        raise DomainValidationError(f"perturbation with t={t} destroys star-shapedness")
    co = np.fft.rfft(new_r) / n
    a0 = float(co[0].real)
    ak = 2.0 * co[1:].real
    bk = -2.0 * co[1:].imag
    cutoff = _COEF_TRIM * max(abs(a0), float(np.abs(ak).max()), float(np.abs(bk).max()))
    keep = max(
        [0]
        + [k for k in range(1, len(ak) + 1) if abs(ak[k - 1]) > cutoff or abs(bk[k - 1]) > cutoff]
    )
    return StarDomain(
        a0=a0,
        cos_coeffs=tuple(ak[:keep]),
        sin_coeffs=tuple(bk[:keep]),
        center=domain.center,
    )


@dataclass(frozen=True)
class FDResult:
    steps: tuple[float, ...]
    estimates: tuple[float, ...]
    extrapolated: float


def fd_derivative(
    domain: StarDomain,
    tau: float,
    F: tuple[int, ...],
    s: int,
    field: PerturbationField,
    steps: tuple[float, ...] = (1e-3, 5e-4),
    k_max: int = 10,
    svd_tol: float = 1e-12,
    n_r: int = 32,
    n_theta: int = 256,
    n_boundary: int = 512,
) -> FDResult:
    """Central finite differences of e_s over the cluster F along the field, per step.

    Eigenvalues of the perturbed domains are matched to the base cluster by index;
    if any tracked eigenvalue moves by more than half the gap separating the cluster
    from its neighbors, tracking is ambiguous and an error is raised.  The two
    smallest steps are Richardson-combined into the extrapolated estimate.
    """
    steps = tuple(sorted((float(t) for t in steps), reverse=True))
    if not steps or steps[-1] <= 0.0:
        raise DomainValidationError(f"steps must be positive, got {steps}")
    F = tuple(sorted(F))

    def eigs_of(dom: StarDomain) -> np.ndarray:
        basis = make_trial_basis(k_max, tau)
        sol = solve(assemble(dom, tau, basis, n_r=n_r, n_theta=n_theta, n_boundary=n_boundary), svd_tol)
        return sol.eigenvalues

    base = eigs_of(domain)
    if F[-1] >= len(base):
        raise DomainValidationError(f"F={F} needs more eigenvalues than computed ({len(base)})")
    cluster_vals = base[[j - 1 for j in F]]
    # admissible tracking radius: half the gap to the nearest eigenvalue outside F
    outside = [base[F[0] - 2]] if F[0] >= 2 else []
    outside.append(base[F[-1]])
    gap = min(abs(cluster_vals.mean() - o) for o in outside)

    estimates = []
    for t in steps:
        vals = {}
        for sign in (+1.0, -1.0):
            dom_t = realize_perturbation(domain, field, sign * t)
            ev = eigs_of(dom_t)
            moved = np.abs(ev[[j - 1 for j in F]] - cluster_vals)
            if moved.max() > 0.45 * gap:
                raise NumericalError(
                    f"eigenvalue tracking ambiguous at step {sign * t}: cluster moved "
                    f"{moved.max():.3e} against a separating gap of {gap:.3e}"
                )
            vals[sign] = symmetric_function(ev, F, s)
        estimates.append((vals[+1.0] - vals[-1.0]) / (2.0 * t))

    if len(steps) >= 2:
        t1, t2 = steps[-2], steps[-1]
        d1, d2 = estimates[-2], estimates[-1]
        extrapolated = (t1 * t1 * d2 - t2 * t2 * d1) / (t1 * t1 - t2 * t2)
    else:
        extrapolated = estimates[-1]
    return FDResult(steps=steps, estimates=tuple(estimates), extrapolated=extrapolated)
