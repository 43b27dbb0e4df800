"""Free plate vibration on the unit disk with mass concentrated near the boundary.

The density takes a small bulk value and a large value on a collar of width eps
against the boundary, keeping total mass fixed.  As eps shrinks, the Neumann
plate eigenvalues approach the Steklov eigenvalues of the same operator, with the
surviving mass acting as a boundary measure.  Rotational symmetry splits the
problem into angular modes; each mode is discretized with cubic Hermite elements
in the radius, so values and radial derivatives are both nodal unknowns and the
bending energy is represented exactly within the element space.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, eigh, solve_triangular
from scipy.optimize import brentq

from .ball_spectrum import sorted_spectrum
from .errors import DomainValidationError, NumericalError

_DEFAULT_MASS = 2.0 * math.pi  # boundary length of the unit disk
_GAUSS_PER_ELEMENT = 10


@dataclass(frozen=True)
class DensityProfile:
    """Two-level radial density: eps in the bulk, a large constant on the collar (1-eps, 1).

    The collar value is chosen so the total mass over the disk equals M exactly.
    """

    eps: float
    M: float = _DEFAULT_MASS

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise DomainValidationError(f"eps must lie in (0, 1), got {self.eps}")
        if not (self.M > 0.0):
            raise DomainValidationError(f"total mass must be positive, got {self.M}")
        if self.collar_value <= 0.0:
            raise DomainValidationError(
                f"mass M={self.M} too small for bulk density at eps={self.eps}"
            )

    @property
    def bulk_value(self) -> float:
        return self.eps

    @property
    def collar_value(self) -> float:
        r_in = 1.0 - self.eps
        bulk_mass = self.eps * math.pi * r_in * r_in
        collar_area = math.pi * (1.0 - r_in * r_in)
        return (self.M - bulk_mass) / collar_area

    def value(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.where(r < 1.0 - self.eps, self.bulk_value, self.collar_value)

    def mass(self) -> float:
        """Total mass integral, exact for the piecewise-constant profile."""
        r_in = 1.0 - self.eps
        return self.bulk_value * math.pi * r_in**2 + self.collar_value * math.pi * (1.0 - r_in**2)


@dataclass(frozen=True)
class RadialMesh:
    """Strictly increasing nodes on [0, 1]; the collar interface 1-eps is a node."""

    nodes: np.ndarray
    eps: float

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    @property
    def n_collar_elements(self) -> int:
        return int(np.sum(self.nodes > 1.0 - self.eps + 1e-15))


def make_radial_mesh(eps: float, n_bulk: int = 40, n_collar: int = 8) -> RadialMesh:
    """Mesh with a uniform collar [1-eps, 1] and a bulk graded toward the interface.

    Bulk element sizes grow geometrically away from the interface, starting at the
    collar element size; if the collar elements are already coarser than a uniform
    bulk would be, the bulk stays uniform.
    """
    if not (0.0 < eps < 1.0):
        raise DomainValidationError(f"eps must lie in (0, 1), got {eps}")
    if n_bulk < 1 or n_collar < 1:
        raise DomainValidationError("need at least one element in each region")
    h_c = eps / n_collar
    L = 1.0 - eps
    # a single bulk element, or collar elements coarser than a uniform bulk,
    # leave nothing to grade
    if n_bulk == 1 or h_c * n_bulk >= L:
        bulk = np.linspace(0.0, L, n_bulk + 1)
    else:
        # sizes h_c * g^j for j = 0..n-1 moving from the interface toward the center;
        # solve sum = L for the growth ratio g
        def total(g: float) -> float:
            return h_c * (g**n_bulk - 1.0) / (g - 1.0) - L

        g = brentq(total, 1.0 + 1e-12, 1e3)
        sizes = h_c * g ** np.arange(n_bulk)
        bulk = L - np.concatenate(([0.0], np.cumsum(sizes)))[::-1]
        bulk[0] = 0.0
        bulk[-1] = L
    collar = np.linspace(L, 1.0, n_collar + 1)
    nodes = np.concatenate([bulk, collar[1:]])
    return RadialMesh(nodes=nodes, eps=eps)


def _hermite_shapes(h: float, xi: np.ndarray):
    """Cubic Hermite shape functions on an element of length h at local points xi in [0, 1].

    Rows are the four DOFs (value left, slope left, value right, slope right);
    returns (H, H', H'') with derivatives in the physical coordinate.
    """
    one = np.ones_like(xi)
    H = np.stack(
        [
            1.0 - 3.0 * xi**2 + 2.0 * xi**3,
            h * (xi - 2.0 * xi**2 + xi**3),
            3.0 * xi**2 - 2.0 * xi**3,
            h * (-(xi**2) + xi**3),
        ]
    )
    H1 = np.stack(
        [
            (-6.0 * xi + 6.0 * xi**2) / h,
            one - 4.0 * xi + 3.0 * xi**2,
            (6.0 * xi - 6.0 * xi**2) / h,
            -2.0 * xi + 3.0 * xi**2,
        ]
    )
    H2 = np.stack(
        [
            (-6.0 + 12.0 * xi) / h**2,
            (-4.0 + 6.0 * xi) / h,
            (6.0 - 12.0 * xi) / h**2,
            (-2.0 + 6.0 * xi) / h,
        ]
    )
    return H, H1, H2


def _mode_matrices(k: int, tau: float, profile: DensityProfile, mesh: RadialMesh):
    """Stiffness and mass for angular mode k after essential constraints at the center.

    The energy density per unit radius for u = f(r) trig(k theta) is the sum of
    squares

        f''^2 + 2 k^2 ((f' - f/r)/r)^2 + (f'/r - k^2 f/r^2)^2
        + tau (f'^2 + k^2 (f/r)^2),

    integrated against r dr (angular factor normalized away; it is common to both
    matrices).  Center regularity removes f'(0) for k = 0, f(0) for k = 1, and both
    for k >= 2.
    """
    nodes = mesh.nodes
    n_nodes = len(nodes)
    ndof = 2 * n_nodes
    S = np.zeros((ndof, ndof))
    Mm = np.zeros((ndof, ndof))
    gx, gw = np.polynomial.legendre.leggauss(_GAUSS_PER_ELEMENT)
    xi = 0.5 * (gx + 1.0)
    wq = 0.5 * gw
    k2 = float(k * k)
    for e in range(mesh.n_elements):
        a, b = nodes[e], nodes[e + 1]
        h = b - a
        r = a + xi * h
        w = wq * h * r
        H, H1, H2 = _hermite_shapes(h, xi)
        t_bend = H2
        t_shear = (H1 - H / r) / r
        t_ring = H1 / r - k2 * H / r**2
        Se = np.einsum("ag,g,bg->ab", t_bend, w, t_bend)
        if k >= 1:
            Se += 2.0 * k2 * np.einsum("ag,g,bg->ab", t_shear, w, t_shear)
        Se += np.einsum("ag,g,bg->ab", t_ring, w, t_ring)
        Se += tau * np.einsum("ag,g,bg->ab", H1, w, H1)
        if k >= 1:
            Se += tau * k2 * np.einsum("ag,g,bg->ab", H / r, w, H / r)
        Me = np.einsum("ag,g,bg->ab", H, w * profile.value(r), H)
        idx = [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]
        S[np.ix_(idx, idx)] += Se
        Mm[np.ix_(idx, idx)] += Me

    if k == 0:
        drop = [1]
    elif k == 1:
        drop = [0]
    else:
        drop = [0, 1]
    keep = [i for i in range(ndof) if i not in drop]
    return S[np.ix_(keep, keep)], Mm[np.ix_(keep, keep)], keep


def _solve_pencil(S: np.ndarray, M: np.ndarray, count: int, deflate: np.ndarray | None):
    """Smallest eigenvalues of S x = lambda M x with S >= 0, M > 0.

    Works on the shifted inverse: with K = S + M and Cholesky factors K = L L^T,
    M = R R^T, the matrix C = (L^-1 R)(L^-1 R)^T has eigenvalues mu = 1/(lambda+1),
    so the smallest lambda are read off the LARGEST mu.  This keeps the small end
    of the spectrum accurate even when the stiffness scale is enormous, which dense
    solves on (S, M) do not.  An optional known eigenvector with eigenvalue 0 is
    deflated exactly through a Householder complement.
    """
    prepend_zero = False
    if deflate is not None:
        w = M @ deflate
        nw = np.linalg.norm(w)
        if nw == 0.0:
            raise NumericalError("deflation vector has zero mass norm")
        u = w / nw
        v = u.copy()
        v[0] += math.copysign(1.0, u[0] if u[0] != 0.0 else 1.0)
        v /= np.linalg.norm(v)
        Hh = np.eye(len(u)) - 2.0 * np.outer(v, v)
        Z = Hh[:, 1:]
        S = Z.T @ S @ Z
        M = Z.T @ M @ Z
        S = 0.5 * (S + S.T)
        M = 0.5 * (M + M.T)
        prepend_zero = True
        count -= 1

    try:
        L = cholesky(S + M, lower=True)
        R = cholesky(M, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"pencil factorization failed: {exc}") from exc
    Y = solve_triangular(L, R, lower=True)
    C = Y @ Y.T
    C = 0.5 * (C + C.T)
    mu = eigh(C, eigvals_only=True)
    need = min(count, len(mu)) if count > 0 else 0
    # only the largest mu carry meaningful small eigenvalues; the tiny ones are
    # roundoff images of the huge end of the pencil spectrum
    lam = 1.0 / mu[::-1][:need] - 1.0
    out = np.concatenate([[0.0], lam]) if prepend_zero else lam
    return out


def neumann_mode_eigenvalues(
    k: int,
    tau: float,
    profile: DensityProfile,
    mesh: RadialMesh,
    count: int = 6,
) -> np.ndarray:
    """Lowest eigenvalues of the free plate in angular mode k with the given density.

    For k = 0 the constant function is an exact eigenfunction with eigenvalue 0 in
    both the continuous and the discrete problem; it is deflated explicitly so the
    returned leading eigenvalue is exactly 0.
    """
    if k < 0:
        raise DomainValidationError(f"angular mode must be nonnegative, got {k}")
    if count < 1:
        raise DomainValidationError(f"count must be >= 1, got {count}")
    if abs(mesh.eps - profile.eps) > 1e-14:
        raise DomainValidationError(
            f"mesh was built for eps={mesh.eps}, profile has eps={profile.eps}"
        )
    if mesh.n_collar_elements < 4:
        warnings.warn(
            f"collar resolved by only {mesh.n_collar_elements} elements; "
            "eigenvalues may be inaccurate",
            stacklevel=2,
        )
    S, M, keep = _mode_matrices(k, tau, profile, mesh)
    deflate = None
    if k == 0:
        full = np.zeros(2 * len(mesh.nodes))
        full[0::2] = 1.0  # value DOFs of the constant profile
        deflate = full[keep]
    return _solve_pencil(S, M, count, deflate)


def merged_spectrum(
    tau: float,
    profile: DensityProfile,
    mesh: RadialMesh,
    j_max: int,
    k_cap: int = 8,
) -> np.ndarray:
    """First j_max plate eigenvalues over all angular modes, multiplicity two for k >= 1."""
    if j_max < 1:
        raise DomainValidationError(f"j_max must be >= 1, got {j_max}")
    vals: list[float] = []
    for k in range(k_cap + 1):
        ev = neumann_mode_eigenvalues(k, tau, profile, mesh, count=j_max)
        reps = 1 if k == 0 else 2
        for lam in ev:
            vals.extend([float(lam)] * reps)
    vals.sort()
    if len(vals) < j_max:
        raise NumericalError("angular mode cap too small for requested index range")
    return np.array(vals[:j_max])


@dataclass(frozen=True)
class SweepRow:
    eps: float
    j: int
    lambda_eps: float
    lambda_limit: float
    abs_error: float


def convergence_sweep(
    tau: float,
    eps_list,
    j_list,
    M: float = _DEFAULT_MASS,
    n_bulk: int = 40,
    n_collar: int = 8,
    k_cap: int = 8,
) -> list[SweepRow]:
    """Plate eigenvalues against their Steklov limits for a decreasing sequence of eps.

    Returns one row per (eps, j) pair with the concentrated-mass eigenvalue, the
    limiting ball eigenvalue, and their absolute difference.
    """
    eps_list = [float(e) for e in eps_list]
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise DomainValidationError(f"eps values must decrease strictly, got {eps_list}")
    j_list = sorted(int(j) for j in j_list)
    if j_list[0] < 1:
        raise DomainValidationError(f"eigenvalue indexes must be >= 1, got {j_list}")
    j_max = j_list[-1]
    limit = sorted_spectrum(2, tau, j_max)
    rows = []
    for eps in eps_list:
        profile = DensityProfile(eps, M)
        mesh = make_radial_mesh(eps, n_bulk=n_bulk, n_collar=n_collar)
        spec = merged_spectrum(tau, profile, mesh, j_max, k_cap=k_cap)
        for j in j_list:
            lam_eps = float(spec[j - 1])
            lam_lim = limit.eigenvalue(j)
            rows.append(SweepRow(eps, j, lam_eps, lam_lim, abs(lam_eps - lam_lim)))
    return rows
