"""Modified Bessel functions and their ultraspherical normalization.

The radial factor of a separated solution of (Delta^2 - tau Delta) u = 0 on a ball
in R^N involves i_l(z) = z^(1-N/2) I_(N/2-1+l)(z), an entire function of z with a
power series of all-positive terms.  Everything here evaluates that series directly,
which is cancellation-free and accurate over the supported range 0 < z <= 100.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainValidationError, NumericalError

# series truncation: relative term size cutoff and iteration cap
_TERM_CUTOFF = 1e-17
_MAX_TERMS = 200
_Z_MAX = 100.0


@dataclass(frozen=True)
class BesselEval:
    """Value and first three derivatives of i_l at a point, all with respect to z."""

    value: float
    d1: float
    d2: float
    d3: float


def _check_z(z: float) -> None:
    if not (z > 0.0):
        raise DomainValidationError(f"argument must be positive, got z={z}")
    if z > _Z_MAX:
        raise DomainValidationError(f"argument z={z} outside supported range (0, {_Z_MAX}]")


def modified_bessel_I(order: float, z: float) -> float:
    """Modified Bessel function of the first kind, I_order(z).

    Parameters
    ----------
    order : float
        Nonnegative order; half-integers occur for odd space dimensions.
    z : float
        Argument, 0 < z <= 100.

    Returns
    -------
    float
        I_order(z), accurate to about 1e-13 relative.
    """
    if order < 0:
        raise DomainValidationError(f"order must be nonnegative, got {order}")
    _check_z(z)
    # I_order(z) = (z/2)^order * sum_m (z^2/4)^m / (m! Gamma(m+order+1))
    t = math.exp(order * math.log(z / 2.0) - math.lgamma(order + 1.0))
    ratio_num = z * z / 4.0
    total = t
    for m in range(_MAX_TERMS):
        t *= ratio_num / ((m + 1.0) * (m + order + 1.0))
        total += t
        if t < _TERM_CUTOFF * total and m >= 3:
            return total
    raise NumericalError(f"Bessel series did not converge for order={order}, z={z}")


def _check_ultraspherical_args(l: int, N: int) -> None:
    if not isinstance(l, (int, np.integer)) or l < 0:
        raise DomainValidationError(f"angular order l must be a nonnegative integer, got {l}")
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise DomainValidationError(f"dimension N must be an integer >= 2, got {N}")


def _leading_coefficient(nu: float) -> float:
    # c_0 = 2^(-nu) / Gamma(nu + 1)
    return math.exp(-nu * math.log(2.0) - math.lgamma(nu + 1.0))


def ultraspherical_i(l: int, N: int, z: float) -> BesselEval:
    """Evaluate i_l(z) = z^(1-N/2) I_(N/2-1+l)(z) with three derivatives.

    The power series i_l(z) = sum_m c_m z^(2m+l) is differentiated termwise, so the
    four returned series share coefficients and are each free of cancellation.

    Parameters
    ----------
    l : int
        Angular order, l >= 0.
    N : int
        Space dimension, N >= 2.
    z : float
        Argument, 0 < z <= 100.

    Returns
    -------
    BesselEval
        value, d1, d2, d3 at z.
    """
    _check_ultraspherical_args(l, N)
    _check_z(z)
    nu = N / 2.0 - 1.0 + l
    # term t_m = c_m z^(2m+l) tracked multiplicatively; forming z^p on its own
    # would overflow long before the term itself stops being representable
    t = math.exp(-nu * math.log(2.0) - math.lgamma(nu + 1.0) + l * math.log(z))
    val = d1 = d2 = d3 = 0.0
    for m in range(_MAX_TERMS):
        p = 2 * m + l
        val += t
        if p >= 1:
            d1 += p * t / z
        if p >= 2:
            d2 += p * (p - 1) * t / z**2
        if p >= 3:
            d3 += p * (p - 1) * (p - 2) * t / z**3
        # all series have positive terms past their first contribution, so a uniform
        # relative cutoff on the slowest-decaying one (the value series) is safe once
        # each derivative sum is populated
        if m >= 4 and t < _TERM_CUTOFF * val and (d3 == 0.0 or p**3 * t < _TERM_CUTOFF * d3 * z**3):
            return BesselEval(val, d1, d2, d3)
        t *= z * z / (4.0 * (m + 1.0) * (m + nu + 1.0))
    raise NumericalError(f"ultraspherical series did not converge for l={l}, N={N}, z={z}")


def recurrence_derivatives(l: int, N: int, z: float) -> BesselEval:
    """Alternative route to the derivatives of i_l using order-raising recurrences.

    Uses i_l'(z) = i_(l+1)(z) + (l/z) i_l(z) and its iterates, with each i_q value
    taken from its own series.  Exists so the termwise differentiation in
    ultraspherical_i can be cross-checked against an independent formula.
    """
    _check_ultraspherical_args(l, N)
    _check_z(z)

    def ival(q: int) -> float:
        nu = N / 2.0 - 1.0 + q
        t = math.exp(-nu * math.log(2.0) - math.lgamma(nu + 1.0) + q * math.log(z))
        total = 0.0
        for m in range(_MAX_TERMS):
            total += t
            if m >= 3 and t < _TERM_CUTOFF * total:
                return total
            t *= z * z / (4.0 * (m + 1.0) * (m + nu + 1.0))
        raise NumericalError(f"series did not converge for order {q}, z={z}")

    i0, i1, i2, i3 = ival(l), ival(l + 1), ival(l + 2), ival(l + 3)
    d1 = i1 + l / z * i0
    d2 = i2 + (2 * l + 1) / z * i1 + l * (l - 1) / z**2 * i0
    d3 = i3 + 3 * (l + 1) / z * i2 + 3 * l**2 / z**2 * i1 + l * (l - 1) * (l - 2) / z**3 * i0
    return BesselEval(i0, d1, d2, d3)


def ultraspherical_i_tail(l: int, N: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Series tail i_l(z) - c_0 z^l, vectorized, with two derivatives.

    Dropping the leading term removes the part of i_l that is asymptotically parallel
    to z^l as z -> 0.  Spanned together with the pure power z^l this gives the same
    two-dimensional radial space as {z^l, i_l}, but the pair stays numerically
    independent even for small arguments, where i_l itself is dominated by its
    leading monomial.

    Parameters
    ----------
    l, N : int
        Angular order and dimension.
    z : ndarray
        Positive arguments, any shape, max value <= 100.

    Returns
    -------
    (value, d1, d2) : ndarrays shaped like z.
    """
    _check_ultraspherical_args(l, N)
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        raise DomainValidationError("empty argument array")
    if not np.all(z > 0.0):
        raise DomainValidationError("arguments must be positive")
    zmax = float(z.max())
    if zmax > _Z_MAX:
        raise DomainValidationError(f"argument {zmax} outside supported range (0, {_Z_MAX}]")

    nu = N / 2.0 - 1.0 + l
    c = _leading_coefficient(nu) / (4.0 * (nu + 1.0))  # c_1
    z2 = z * z
    p = l + 2
    t = c * z**p
    val = t.copy()
    d1 = p * t / z
    d2 = p * (p - 1) * t / z2
    ref = float(val.max())
    for m in range(1, _MAX_TERMS):
        c_ratio = 1.0 / (4.0 * (m + 1.0) * (m + 1.0 + nu))
        t = t * z2 * c_ratio
        p += 2
        val += t
        d1 += p * t / z
        d2 += p * (p - 1) * t / z2
        tmax = float(t.max())
        ref = max(ref, float(val.max()))
        if tmax < _TERM_CUTOFF * ref and m >= 3:
            return val, d1, d2
    raise NumericalError(f"tail series did not converge for l={l}, N={N}, max z={zmax}")
