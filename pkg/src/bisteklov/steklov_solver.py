"""Galerkin solver for the biharmonic Steklov problem on star-shaped planar domains.

Trial functions are global smooth fields: harmonic polynomials Re/Im (x + iy)^k
about the domain center, paired with modified Bessel modes of matching angular
order.  Both families solve Delta^2 u = tau Delta u exactly, so all error comes
from truncating the angular order, which converges spectrally for analytic
boundaries.  The discrete problem is the pencil a(u, v) = lambda b(u, v) with

    a(u, v) = integral over the domain of D^2 u : D^2 v + tau grad u . grad v,
    b(u, v) = boundary integral of u v,

solved through a filtered congruence pipeline that tolerates the strong numerical
dependence of such global bases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainValidationError, NumericalError
from .geometry import BoundaryQuadrature, StarDomain, boundary_geometry, interior_quadrature

_TAU_MAX = 1.0e4
_CLUSTER_RELGAP = 1e-6


@dataclass(frozen=True)
class TrialBasis:
    """Tagged list of trial functions: (family, angular order, parity) per entry.

    family is "harmonic" (Re/Im of complex powers) or "bessel" (regularized radial
    Bessel profile times cos/sin of k theta).  The Bessel radial part is the series
    tail i_k(sqrt(tau) r) minus its leading monomial: together with r^k it spans the
    same space as the plain pair but remains numerically independent at small tau.
    """

    tau: float
    k_max: int
    tags: tuple[tuple[str, int, str], ...]

    @property
    def size(self) -> int:
        return len(self.tags)


def make_trial_basis(k_max: int, tau: float) -> TrialBasis:
    """Standard basis of size 2 (2 k_max + 1): both families, all orders up to k_max."""
    if k_max < 1:
        raise DomainValidationError(f"k_max must be >= 1, got {k_max}")
    if not (0.0 < tau <= _TAU_MAX):
        raise DomainValidationError(f"tau={tau} outside supported range (0, {_TAU_MAX}]")
    tags: list[tuple[str, int, str]] = []
    for family in ("harmonic", "bessel"):
        tags.append((family, 0, "cos"))
        for k in range(1, k_max + 1):
            tags.append((family, k, "cos"))
            tags.append((family, k, "sin"))
    return TrialBasis(tau=float(tau), k_max=k_max, tags=tuple(tags))


def _eval_all(
    basis: TrialBasis, pts: np.ndarray, center: tuple[float, float]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values, gradients and Hessians of every basis function at every point.

    Returns (val, grad, hess) with shapes (nb, np), (nb, np, 2), (nb, np, 3); the
    Hessian channels are (xx, xy, yy).
    """
    from .special_functions import ultraspherical_i_tail

    x = pts[:, 0] - center[0]
    y = pts[:, 1] - center[1]
    npts = pts.shape[0]
    nb = basis.size
    val = np.zeros((nb, npts))
    grad = np.zeros((nb, npts, 2))
    hess = np.zeros((nb, npts, 3))

    s = math.sqrt(basis.tau)
    # polar data; radius clamped away from 0 so Bessel chain-rule quotients stay
    # finite (the k = 0 tail starts at r^2, making the clamped limits exact)
    r = np.hypot(x, y)
    r = np.maximum(r, 1e-12)
    ct, st = x / r, y / r

    w = x + 1j * y
    # complex powers w^k for k = 0..k_max, shared across parities
    powers = [np.ones_like(w)]
    for _ in range(basis.k_max):
        powers.append(powers[-1] * w)

    tail_cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    for i, (family, k, parity) in enumerate(basis.tags):
        if family == "harmonic":
            pk = powers[k]
            pk1 = powers[k - 1] if k >= 1 else None
            pk2 = powers[k - 2] if k >= 2 else None
            if parity == "cos":
                val[i] = pk.real
                if k >= 1:
                    grad[i, :, 0] = k * pk1.real
                    grad[i, :, 1] = -k * pk1.imag
                if k >= 2:
                    kk = k * (k - 1)
                    hess[i, :, 0] = kk * pk2.real
                    hess[i, :, 1] = -kk * pk2.imag
                    hess[i, :, 2] = -kk * pk2.real
            else:
                val[i] = pk.imag
                if k >= 1:
                    grad[i, :, 0] = k * pk1.imag
                    grad[i, :, 1] = k * pk1.real
                if k >= 2:
                    kk = k * (k - 1)
                    hess[i, :, 0] = kk * pk2.imag
                    hess[i, :, 1] = kk * pk2.real
                    hess[i, :, 2] = -kk * pk2.imag
        else:
            if k not in tail_cache:
                tail_cache[k] = ultraspherical_i_tail(k, 2, s * r)
            tv, td1, td2 = tail_cache[k]
            f = tv
            fp = s * td1
            fpp = s * s * td2
            kt = k * np.arctan2(y, x)
            if parity == "cos":
                T, Tp = np.cos(kt), -k * np.sin(kt)
            else:
                T, Tp = np.sin(kt), k * np.cos(kt)
            Tpp = -(k * k) * T
            u_r = fp * T
            u_t = f * Tp
            u_rr = fpp * T
            u_rt = fp * Tp
            u_tt = f * Tpp
            val[i] = f * T
            grad[i, :, 0] = u_r * ct - u_t * st / r
            grad[i, :, 1] = u_r * st + u_t * ct / r
            cs = ct * st
            hess[i, :, 0] = (
                u_rr * ct**2 - 2 * u_rt * cs / r + u_tt * st**2 / r**2
                + u_r * st**2 / r + 2 * u_t * cs / r**2
            )
            hess[i, :, 2] = (
                u_rr * st**2 + 2 * u_rt * cs / r + u_tt * ct**2 / r**2
                + u_r * ct**2 / r - 2 * u_t * cs / r**2
            )
            hess[i, :, 1] = (
                u_rr * cs + u_rt * (ct**2 - st**2) / r - u_tt * cs / r**2
                - u_r * cs / r - u_t * (ct**2 - st**2) / r**2
            )
    return val, grad, hess


def eval_basis(
    basis: TrialBasis,
    index: int,
    point,
    center: tuple[float, float] = (0.0, 0.0),
) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of one trial function at one point.

    Returns (value, gradient (2,), hessian (2, 2)).  Bessel modes with k >= 1 are
    singular in polar coordinates at the expansion center and may not be evaluated
    within 1e-12 of it.
    """
    if not (0 <= index < basis.size):
        raise DomainValidationError(f"basis index {index} outside 0..{basis.size - 1}")
    pt = np.asarray(point, dtype=float).reshape(1, 2)
    family, k, _ = basis.tags[index]
    if family == "bessel" and k >= 1:
        if math.hypot(pt[0, 0] - center[0], pt[0, 1] - center[1]) < 1e-12:
            raise DomainValidationError(
                f"Bessel mode k={k} cannot be evaluated at the expansion center"
            )
    val, grad, hess = _eval_all(basis, pt, center)
    H = np.array(
        [[hess[index, 0, 0], hess[index, 0, 1]], [hess[index, 0, 1], hess[index, 0, 2]]]
    )
    return float(val[index, 0]), grad[index, 0].copy(), H


@dataclass(frozen=True)
class AssembledForms:
    """Symmetric stiffness (Hessian-Hessian plus tau gradient-gradient) and boundary mass."""

    stiffness: np.ndarray
    boundary_mass: np.ndarray


def assemble(
    domain: StarDomain,
    tau: float,
    basis: TrialBasis,
    n_r: int = 32,
    n_theta: int = 256,
    n_boundary: int = 512,
    check_resolution: bool = False,
) -> AssembledForms:
    """Assemble the energy and boundary mass matrices for the given basis.

    Parameters
    ----------
    n_r, n_theta : int
        Interior tensor quadrature resolution.
    n_boundary : int
        Boundary quadrature nodes.
    check_resolution : bool
        When True, reassemble the stiffness at doubled radial resolution and warn
        if any entry moves by more than 1e-8 relative.
    """
    if abs(tau - basis.tau) > 1e-14 * max(1.0, tau):
        raise DomainValidationError(
            f"basis was built for tau={basis.tau}, assembly requested tau={tau}"
        )

    def stiffness_at(nr: int) -> np.ndarray:
        pts, wts = interior_quadrature(domain, nr, n_theta)
        _, grad, hess = _eval_all(basis, pts, domain.center)
        # |D^2 u : D^2 v| in channels (xx, xy, yy): the mixed channel counts twice
        ch_w = np.array([1.0, 2.0, 1.0])
        A = np.einsum("ipc,p,c,jpc->ij", hess, wts, ch_w, hess, optimize=True)
        A += tau * np.einsum("ipc,p,jpc->ij", grad, wts, grad, optimize=True)
        return 0.5 * (A + A.T)

    A = stiffness_at(n_r)
    if check_resolution:
        import warnings

        A2 = stiffness_at(2 * n_r)
        scale = np.abs(A2).max()
        if np.abs(A2 - A).max() > 1e-8 * scale:
            warnings.warn(
                "interior quadrature appears underresolved: stiffness entries moved "
                "by more than 1e-8 relative under radial refinement",
                stacklevel=2,
            )
        A = A2

    bq = boundary_geometry(domain, n_boundary)
    bval, _, _ = _eval_all(basis, bq.points, domain.center)
    B = (bval * bq.weights) @ bval.T
    B = 0.5 * (B + B.T)
    return AssembledForms(stiffness=A, boundary_mass=B)


@dataclass(frozen=True)
class SolverDiagnostics:
    basis_size: int
    filtered_dimension: int
    b_null_count: int
    gram_condition: float


@dataclass(frozen=True)
class EigenSolution:
    """Eigenvalues ascending, coefficient columns b-orthonormal, 1-based cluster ranges."""

    eigenvalues: np.ndarray
    coefficients: np.ndarray  # (basis_size, n_modes)
    clusters: tuple[tuple[int, int], ...]
    diagnostics: SolverDiagnostics

    def cluster_of(self, j: int) -> tuple[int, int]:
        """Cluster range containing 1-based eigenvalue index j."""
        for lo, hi in self.clusters:
            if lo <= j <= hi:
                return (lo, hi)
        raise DomainValidationError(f"eigenvalue index {j} outside 1..{len(self.eigenvalues)}")


def _detect_clusters(lam: np.ndarray) -> tuple[tuple[int, int], ...]:
    # near-degenerate groups: split where the gap exceeds the relative threshold
    clusters = []
    lo = 0
    for i in range(len(lam) - 1):
        gap = lam[i + 1] - lam[i]
        if gap > _CLUSTER_RELGAP * max(1.0, abs(lam[i + 1])):
            clusters.append((lo + 1, i + 1))
            lo = i + 1
    clusters.append((lo + 1, len(lam)))
    return tuple(clusters)


def solve(forms: AssembledForms, svd_tol: float = 1e-12) -> EigenSolution:
    """Solve the pencil a(u, v) = lambda b(u, v) on the span of the assembled basis.

    Pipeline: symmetric diagonal scaling of both matrices, spectral filtering of the
    combined Gram matrix a + b at relative threshold svd_tol, whitening, then removal
    of boundary-trace-free directions (infinite Steklov eigenvalues; counted in the
    diagnostics) before the final dense symmetric solve.  Coefficients are returned
    in the original basis and are orthonormal in the boundary inner product.
    """
    A, B = forms.stiffness, forms.boundary_mass
    if not (0.0 < svd_tol < 1.0):
        raise DomainValidationError(f"svd_tol must lie in (0, 1), got {svd_tol}")
    d = np.sqrt(np.diag(A) + np.diag(B))
    if not np.all(d > 0.0):
        raise NumericalError("assembled forms have an identically zero basis direction")
    As = A / d[:, None] / d[None, :]
    Bs = B / d[:, None] / d[None, :]

    G = As + Bs
    try:
        sg, U = np.linalg.eigh(G)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Gram eigendecomposition failed: {exc}") from exc
    keep = sg > svd_tol * sg[-1]
    if not np.any(keep):
        raise NumericalError("all basis directions filtered; svd_tol too aggressive")
    cond = float(sg[-1] / sg[keep].min())
    P = U[:, keep] / np.sqrt(sg[keep])

    Ap = P.T @ As @ P
    Bp = P.T @ Bs @ P
    Ap = 0.5 * (Ap + Ap.T)
    Bp = 0.5 * (Bp + Bp.T)

    mb, V = np.linalg.eigh(Bp)
    keep_b = mb > 1e-12 * mb[-1]
    n_bnull = int((~keep_b).sum())
    if not np.any(keep_b):
        raise NumericalError("boundary form is numerically zero on the filtered space")
    W = V[:, keep_b] / np.sqrt(mb[keep_b])

    C = W.T @ Ap @ W
    C = 0.5 * (C + C.T)
    lam, Q = np.linalg.eigh(C)
    X = (P @ (W @ Q)) / d[:, None]

    diagnostics = SolverDiagnostics(
        basis_size=A.shape[0],
        filtered_dimension=int(keep.sum()),
        b_null_count=n_bnull,
        gram_condition=cond,
    )
    return EigenSolution(
        eigenvalues=lam,
        coefficients=X,
        clusters=_detect_clusters(lam),
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class BoundaryTraces:
    """Boundary restriction of selected eigenfunctions on a quadrature rule."""

    quad: BoundaryQuadrature
    values: np.ndarray  # (m, n_nodes)
    normal_derivatives: np.ndarray  # (m, n_nodes)
    gradients: np.ndarray  # (m, n_nodes, 2)
    hessians: np.ndarray  # (m, n_nodes, 3), channels (xx, xy, yy)


def eigenfunction_boundary_data(
    solution: EigenSolution,
    domain: StarDomain,
    basis: TrialBasis,
    which: tuple[int, ...],
    n_nodes: int = 512,
) -> BoundaryTraces:
    """Traces (v, dv/dnu, grad v, D^2 v) of the selected eigenfunctions on the boundary.

    which holds 1-based eigenvalue indexes, matching the ordering in the solution.
    """
    n_modes = solution.coefficients.shape[1]
    for j in which:
        if not (1 <= j <= n_modes):
            raise DomainValidationError(f"eigenvalue index {j} outside 1..{n_modes}")
    bq = boundary_geometry(domain, n_nodes)
    val, grad, hess = _eval_all(basis, bq.points, domain.center)
    C = solution.coefficients[:, [j - 1 for j in which]]  # (nb, m)
    v = C.T @ val
    g = np.einsum("bm,bnc->mnc", C, grad, optimize=True)
    h = np.einsum("bm,bnc->mnc", C, hess, optimize=True)
    dvdn = np.einsum("mnc,nc->mn", g, bq.normals, optimize=True)
    return BoundaryTraces(quad=bq, values=v, normal_derivatives=dvdn, gradients=g, hessians=h)
