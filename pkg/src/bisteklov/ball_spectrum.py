"""Closed-form Steklov spectrum of the biharmonic operator on the unit ball.

Separation of variables with a spherical harmonic of degree l reduces
Delta^2 u = tau Delta u on the unit ball of R^N, with the natural free-edge
boundary conditions, to a two-dimensional radial space spanned by r^l and
i_l(sqrt(tau) r).  Eliminating the two coefficients between the boundary
conditions gives each eigenvalue as a ratio of Bessel expressions; this module
evaluates that ratio, enumerates the spectrum in sorted order, and provides an
independent Rayleigh-quotient route for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainValidationError, NumericalError
from .special_functions import _leading_coefficient, ultraspherical_i, ultraspherical_i_tail

_TAU_MAX = 1.0e4  # keeps sqrt(tau) inside the validated Bessel range


def _check_tau(tau: float) -> None:
    if not (tau > 0.0):
        raise DomainValidationError(f"tau must be positive, got {tau}")
    if tau > _TAU_MAX:
        raise DomainValidationError(f"tau={tau} outside supported range (0, {_TAU_MAX}]")


def multiplicity_of_order(l: int, N: int) -> int:
    """Dimension of the space of spherical harmonics of degree l on the unit sphere in R^N."""
    if l < 0 or N < 2:
        raise DomainValidationError(f"need l >= 0 and N >= 2, got l={l}, N={N}")
    if l == 0:
        return 1
    if l == 1:
        return N
    return math.comb(N + l - 1, l) - math.comb(N + l - 3, l - 2)


def eigenvalue_of_order(l: int, N: int, tau: float) -> float:
    """Steklov eigenvalue attached to spherical harmonics of degree l on the unit ball.

    Parameters
    ----------
    l : int
        Angular order.  l = 0 gives the trivial eigenvalue 0, l = 1 gives tau.
    N : int
        Space dimension, N >= 2.
    tau : float
        Tension parameter, 0 < tau <= 1e4.

    Returns
    -------
    float
        The eigenvalue lambda_(l).

    Notes
    -----
    For l >= 1 the radial profile is R(r) = A r^l + B i_l(sqrt(tau) r).  The
    free-edge condition R''(1) = 0 fixes B/A, and the remaining natural boundary
    condition then yields

        lambda = l * num / den,
        den = (1-l) l i + tau i'',
        num = 3(l-1) l (l+N-2) i
              - (l-1) s (N - 1 + 2Nl + 2l(l-2) + tau) i'
              + tau ((l-1)(l+2N-3) + tau) i''
              + (l-1) tau s i''',

    with s = sqrt(tau) and all Bessel factors evaluated at s.
    """
    _check_tau(tau)
    if l < 0:
        raise DomainValidationError(f"angular order must be nonnegative, got {l}")
    if l == 0:
        return 0.0
    s = math.sqrt(tau)
    ie = ultraspherical_i(l, N, s)
    den_a = (1.0 - l) * l * ie.value
    den_b = tau * ie.d2
    den = den_a + den_b
    if abs(den) < 1e-12 * (abs(den_a) + abs(den_b)):
        raise NumericalError(f"degenerate eigenvalue formula for l={l}, N={N}, tau={tau}")
    num = (
        3.0 * (l - 1.0) * l * (l + N - 2.0) * ie.value
        - (l - 1.0) * s * (N - 1.0 + 2.0 * N * l + 2.0 * l * (l - 2.0) + tau) * ie.d1
        + tau * ((l - 1.0) * (l + 2.0 * N - 3.0) + tau) * ie.d2
        + (l - 1.0) * tau * s * ie.d3
    )
    return l * num / den


@dataclass(frozen=True)
class BallMode:
    """Radial profile R(r) = coeff_power * r^l + coeff_bessel * i_l(sqrt(tau) r) of a ball eigenfunction."""

    l: int
    N: int
    tau: float
    eigenvalue: float
    coeff_power: float
    coeff_bessel: float
    multiplicity: int

    def evaluate(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Profile and its first two radial derivatives at the given radii (ndarray, r > 0)."""
        r = np.asarray(r, dtype=float)
        s = math.sqrt(self.tau)
        l = self.l
        R = self.coeff_power * r**l
        R1 = self.coeff_power * (l * r ** (l - 1) if l >= 1 else np.zeros_like(r))
        R2 = self.coeff_power * (l * (l - 1) * r ** (l - 2) if l >= 2 else np.zeros_like(r))
        if self.coeff_bessel != 0.0:
            z = s * r
            nu = self.N / 2.0 - 1.0 + l
            c0 = _leading_coefficient(nu)
            tv, td1, td2 = ultraspherical_i_tail(l, self.N, z)
            iv = c0 * z**l + tv
            i1 = (c0 * l * z ** (l - 1) if l >= 1 else 0.0) + td1
            i2 = (c0 * l * (l - 1) * z ** (l - 2) if l >= 2 else 0.0) + td2
            R = R + self.coeff_bessel * iv
            R1 = R1 + self.coeff_bessel * s * i1
            R2 = R2 + self.coeff_bessel * self.tau * i2
        return R, R1, R2


def radial_profile(l: int, N: int, tau: float) -> BallMode:
    """Radial eigenprofile of order l, normalized so the r^l coefficient equals 1.

    For l in {0, 1} the pure power alone satisfies both boundary conditions and the
    Bessel coefficient vanishes.
    """
    _check_tau(tau)
    if l < 0:
        raise DomainValidationError(f"angular order must be nonnegative, got {l}")
    lam = eigenvalue_of_order(l, N, tau)
    if l <= 1:
        b = 0.0
    else:
        ie = ultraspherical_i(l, N, math.sqrt(tau))
        # R''(1) = 0 with A = 1: l(l-1) + B tau i_l''(sqrt(tau)) = 0
        b = l * (1.0 - l) / (tau * ie.d2)
    return BallMode(l, N, tau, lam, 1.0, b, multiplicity_of_order(l, N))


@dataclass(frozen=True)
class SpectrumEntry:
    eigenvalue: float
    angular_order: int
    index_range: tuple[int, int]  # 1-based, inclusive


@dataclass(frozen=True)
class SortedSpectrum:
    """Ball spectrum listed in ascending order with angular orders and index ranges."""

    N: int
    tau: float
    j_max: int
    entries: tuple[SpectrumEntry, ...]

    def eigenvalue(self, j: int) -> float:
        """The j-th smallest eigenvalue (1-based, multiplicities counted)."""
        if j < 1 or j > self.j_max:
            raise DomainValidationError(f"index {j} outside 1..{self.j_max}")
        for e in self.entries:
            if e.index_range[0] <= j <= e.index_range[1]:
                return e.eigenvalue
        raise NumericalError(f"index {j} not covered; spectrum enumeration bug")

    def flatten(self) -> list[tuple[int, float, int]]:
        """Rows (index, eigenvalue, angular_order) for indexes 1..j_max."""
        out = []
        for e in self.entries:
            for j in range(e.index_range[0], min(e.index_range[1], self.j_max) + 1):
                out.append((j, e.eigenvalue, e.angular_order))
        return out


def sorted_spectrum(N: int, tau: float, j_max: int) -> SortedSpectrum:
    """Enumerate the first j_max ball eigenvalues in ascending order.

    Walks angular orders upward and stops once the eigenvalue of the current order
    exceeds the j_max-th smallest value found so far; this is justified by the
    monotonicity of lambda_(l) in l for l >= 2.
    """
    _check_tau(tau)
    if j_max < 1:
        raise DomainValidationError(f"j_max must be >= 1, got {j_max}")
    collected: list[tuple[float, int, int]] = []  # (eigenvalue, order, multiplicity)
    cum = 0
    l = 0
    while True:
        lam = eigenvalue_of_order(l, N, tau)
        mult = multiplicity_of_order(l, N)
        collected.append((lam, l, mult))
        cum += mult
        if cum >= j_max and l >= 2:
            ordered = sorted(collected)
            c, kth = 0, math.inf
            for lam_i, _, m_i in ordered:
                c += m_i
                if c >= j_max:
                    kth = lam_i
                    break
            if lam > kth:
                break
        l += 1
        if l > 200:
            raise NumericalError("spectrum enumeration failed to terminate")
    collected.sort()
    entries = []
    start = 1
    for lam, order, mult in collected:
        if start > j_max:
            break
        entries.append(SpectrumEntry(lam, order, (start, start + mult - 1)))
        start += mult
    return SortedSpectrum(N, tau, j_max, tuple(entries))


RadialCallable = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


def rayleigh_quotient(
    radial: RadialCallable,
    l: int,
    N: int,
    tau: float,
    n_start: int = 32,
    n_max: int = 1024,
    rtol: float = 1e-8,
) -> float:
    """Rayleigh quotient of u = f(r) Y_l(theta) on the unit ball, reduced to a radial integral.

    Parameters
    ----------
    radial : callable
        Maps an ndarray of radii in (0, 1) to the triple (f, f', f'').  Must be smooth
        with f(1) != 0, and f(r) = O(r) as r -> 0 when l >= 1.
    l, N, tau :
        Angular order, dimension, tension.

    Returns
    -------
    float
        ( integral of |D^2 u|^2 + tau |grad u|^2 ) / ( boundary integral of u^2 ),
        with Y_l normalized in L^2 of the unit sphere.

    Notes
    -----
    With alpha = l(l+N-2) the Hessian density reduces to the manifestly nonnegative
    form

        f''^2 + 2 alpha ((f' - f/r)/r)^2 + (N-1) (f'/r - beta f/r^2)^2 + c (f/r^2)^2,

    beta = alpha/(N-1), c = (N-2) alpha (alpha-(N-1))/(N-1), and the gradient density
    to f'^2 + alpha (f/r)^2; both are integrated against r^(N-1) dr on (0, 1).
    Gauss-Legendre nodes are doubled from n_start until two successive values agree
    to rtol relative.
    """
    _check_tau(tau)
    if l < 0 or N < 2:
        raise DomainValidationError(f"need l >= 0 and N >= 2, got l={l}, N={N}")
    alpha = float(l * (l + N - 2))
    beta = alpha / (N - 1.0)
    c_extra = (N - 2.0) * alpha * (alpha - (N - 1.0)) / (N - 1.0)

    f1 = radial(np.array([1.0]))[0][0]
    if not (abs(f1) > 1e-14):
        raise DomainValidationError("radial profile vanishes at r = 1; quotient undefined")

    def quad(n: int) -> float:
        x, w = np.polynomial.legendre.leggauss(n)
        r = 0.5 * (x + 1.0)
        w = 0.5 * w
        f, fp, fpp = radial(r)
        hess = (
            fpp**2
            + 2.0 * alpha * ((fp - f / r) / r) ** 2
            + (N - 1.0) * (fp / r - beta * f / r**2) ** 2
            + c_extra * (f / r**2) ** 2
        )
        grad = fp**2 + alpha * (f / r) ** 2
        return float(np.sum(w * (hess + tau * grad) * r ** (N - 1))) / f1**2

    prev = quad(n_start)
    n = 2 * n_start
    while n <= n_max:
        cur = quad(n)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
        n *= 2
    raise NumericalError(f"radial quadrature did not converge to rtol={rtol} by n={n_max}")


@dataclass(frozen=True)
class MonotonicityReport:
    values: tuple[float, ...]  # lambda_(1) .. lambda_(l_max)
    passed: bool


def verify_order_monotonicity(N: int, tau: float, l_max: int) -> MonotonicityReport:
    """Check lambda_(1) < lambda_(2) and strict increase of lambda_(l) for 2 <= l <= l_max."""
    if l_max < 2:
        raise DomainValidationError(f"l_max must be >= 2, got {l_max}")
    vals = tuple(eigenvalue_of_order(l, N, tau) for l in range(1, l_max + 1))
    ok = vals[0] < vals[1] and all(vals[i] < vals[i + 1] for i in range(1, len(vals) - 1))
    return MonotonicityReport(vals, ok)
