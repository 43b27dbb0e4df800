"""Star-shaped planar domains given by trigonometric radius series.

A domain is rho(theta) = a0 + sum_k (a_k cos k theta + b_k sin k theta) around a
center point.  All boundary quantities (tangent, outward normal, curvature, arc
length weights) follow from rho and its first two derivatives, so quadrature
rules on the boundary and in the interior are spectrally accurate for smooth
radius series on uniform angular grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainValidationError

_POSITIVITY_GRID = 4096


@dataclass(frozen=True)
class StarDomain:
    """Immutable star-shaped domain; positivity of the radius is checked at construction."""

    a0: float
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "a0", float(self.a0))
        th = np.linspace(0.0, 2.0 * np.pi, _POSITIVITY_GRID, endpoint=False)
        r = self.rho(th)
        if not np.all(r > 0.0):
            raise DomainValidationError(
                f"radius series is not positive (min {r.min():.3e}); domain is invalid"
            )

    @property
    def max_mode(self) -> int:
        return max(len(self.cos_coeffs), len(self.sin_coeffs))

    def rho(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        r = np.full_like(theta, self.a0)
        for k, a in enumerate(self.cos_coeffs, start=1):
            if a != 0.0:
                r += a * np.cos(k * theta)
        for k, b in enumerate(self.sin_coeffs, start=1):
            if b != 0.0:
                r += b * np.sin(k * theta)
        return r

    def rho_derivatives(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rho, rho', rho'') at the given angles."""
        theta = np.asarray(theta, dtype=float)
        r = np.full_like(theta, self.a0)
        r1 = np.zeros_like(theta)
        r2 = np.zeros_like(theta)
        for k, a in enumerate(self.cos_coeffs, start=1):
            if a != 0.0:
                ck, sk = np.cos(k * theta), np.sin(k * theta)
                r += a * ck
                r1 -= a * k * sk
                r2 -= a * k * k * ck
        for k, b in enumerate(self.sin_coeffs, start=1):
            if b != 0.0:
                ck, sk = np.cos(k * theta), np.sin(k * theta)
                r += b * sk
                r1 += b * k * ck
                r2 -= b * k * k * sk
        return r, r1, r2


@dataclass(frozen=True)
class BoundaryQuadrature:
    """Uniform-angle boundary rule: nodes, outward unit normals, arc weights, curvature."""

    thetas: np.ndarray
    points: np.ndarray  # (n, 2)
    normals: np.ndarray  # (n, 2), unit outward
    weights: np.ndarray  # (n,), arc length measure
    curvatures: np.ndarray  # (n,), signed, +1 on the unit circle


def _check_n_nodes(domain: StarDomain, n_nodes: int) -> None:
    need = 4 * (domain.max_mode + 1)
    if n_nodes < need:
        raise DomainValidationError(
            f"n_nodes={n_nodes} too small for mode content; need at least {need}"
        )


def boundary_geometry(domain: StarDomain, n_nodes: int) -> BoundaryQuadrature:
    """Boundary quadrature on a uniform angular grid.

    Trapezoidal weights on the parameter circle are spectrally accurate here since
    every integrand built from the radius series is 2 pi periodic and smooth.
    """
    _check_n_nodes(domain, n_nodes)
    th = np.linspace(0.0, 2.0 * np.pi, n_nodes, endpoint=False)
    r, r1, r2 = domain.rho_derivatives(th)
    ct, st = np.cos(th), np.sin(th)
    jac = np.sqrt(r * r + r1 * r1)
    pts = np.stack([domain.center[0] + r * ct, domain.center[1] + r * st], axis=1)
    normals = np.stack([(r1 * st + r * ct) / jac, (-r1 * ct + r * st) / jac], axis=1)
    weights = jac * (2.0 * np.pi / n_nodes)
    curv = (r * r + 2.0 * r1 * r1 - r * r2) / jac**3
    return BoundaryQuadrature(th, pts, normals, weights, curv)


def area(domain: StarDomain) -> float:
    """Enclosed area, exact from the radius coefficients."""
    s = domain.a0**2 + 0.5 * (
        sum(a * a for a in domain.cos_coeffs) + sum(b * b for b in domain.sin_coeffs)
    )
    return np.pi * s


def rescale_to_area(domain: StarDomain, target_area: float) -> StarDomain:
    """Scale the radius series about the center so the area equals target_area."""
    if not (target_area > 0.0):
        raise DomainValidationError(f"target area must be positive, got {target_area}")
    s = np.sqrt(target_area / area(domain))
    return StarDomain(
        a0=s * domain.a0,
        cos_coeffs=tuple(s * a for a in domain.cos_coeffs),
        sin_coeffs=tuple(s * b for b in domain.sin_coeffs),
        center=domain.center,
    )


def center_boundary_centroid(domain: StarDomain, n_nodes: int = 1024) -> StarDomain:
    """Translate the domain so the arc-length centroid of its boundary sits at the origin.

    The translation subtracts the quadrature centroid exactly, so one application
    suffices at the resolution used.
    """
    bq = boundary_geometry(domain, n_nodes)
    length = bq.weights.sum()
    centroid = bq.weights @ bq.points / length
    return StarDomain(
        a0=domain.a0,
        cos_coeffs=domain.cos_coeffs,
        sin_coeffs=domain.sin_coeffs,
        center=(domain.center[0] - centroid[0], domain.center[1] - centroid[1]),
    )


def interior_quadrature(
    domain: StarDomain, n_r: int, n_theta: int
) -> tuple[np.ndarray, np.ndarray]:
    """Tensor rule for area integrals: Gauss-Legendre radially, uniform in angle.

    Parameters
    ----------
    n_r : int
        Radial Gauss-Legendre points per ray, at least 8.
    n_theta : int
        Number of rays; must resolve the radius series (>= 4 per mode).

    Returns
    -------
    (points, weights)
        points is (n_r * n_theta, 2), weights sum to the domain area.
    """
    if n_r < 8:
        raise DomainValidationError(f"n_r must be at least 8, got {n_r}")
    _check_n_nodes(domain, n_theta)
    x, w = np.polynomial.legendre.leggauss(n_r)
    x = 0.5 * (x + 1.0)  # map to (0, 1); nodes stay strictly interior
    w = 0.5 * w
    th = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    r_b = domain.rho(th)
    ct, st = np.cos(th), np.sin(th)
    # scaled radius x in (0,1): point = center + rho(theta) x e(theta),
    # weight = w x rho^2 dtheta from the area Jacobian r dr dtheta
    R = r_b[None, :] * x[:, None]
    px = domain.center[0] + R * ct[None, :]
    py = domain.center[1] + R * st[None, :]
    wts = (w * x)[:, None] * (r_b**2)[None, :] * (2.0 * np.pi / n_theta)
    pts = np.stack([px.ravel(), py.ravel()], axis=1)
    return pts, wts.ravel()
