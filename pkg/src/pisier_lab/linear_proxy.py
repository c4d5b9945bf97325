"""Explicit construction of a near-linear cube function with small l1 norm.

Fix an odd ell and put the trigonometric kernel

    phi(theta) = ((2 ell - 1) / ell) * sin(ell theta) / sin^2(theta)

on the 4 ell equally spaced angles of [0, 2 pi) with 0 and pi removed.
Averaging phi against powers of sin over that support gives

    E[phi sin^k] = 1 for k = 1,   0 for k in {0, 2, 3, ..., ell},

so the cube function whose Fourier coefficient at every subset S is

    c_k = 2 E[phi sin^k] / 2^k      with k = |S|

agrees with the linear function x_1 + ... + x_n on all levels up to ell,
deviates by at most 8 ell / 2^ell on the levels above, and keeps
E|P(X)| <= 8 ell.  The averages cancel through a geometric-sum identity on
the grid, so the identities hold with no asymptotics to trust.

Angles are carried as integer grid indices k (theta_k = 2 pi k / (4 ell)).
The sine table is built for the first quadrant only and mirrored, which
makes the theta -> 2 pi - theta antisymmetry of the kernel exact in floating
point; moments of even powers then cancel exactly instead of to roundoff.
"""

from __future__ import annotations

import math

import numpy as np

from .cube_fourier import CubeFunction, _check_dim, popcount
from .report import BoundViolationError, ResourceLimitError

MAX_ELL = 15  # beyond this the deviation 8 ell / 2^ell is below 1e-3 and adds nothing
MAX_PROXY_DIM = 20
_IDENTITY_TOL = 1e-10

# sin(k * pi / 2) by k mod 4, exact
_SIN_HALF_PI = (0.0, 1.0, 0.0, -1.0)


def _check_ell(ell: int) -> None:
    if not isinstance(ell, (int, np.integer)) or ell < 1 or ell % 2 == 0:
        raise ValueError(f"ell must be an odd positive integer, got {ell!r}")
    if ell > MAX_ELL:
        raise ValueError(f"ell={ell} unsupported; the odd range 1..{MAX_ELL} covers all useful deviations")


class AngleGrid:
    """The 4*ell equally spaced angles on [0, 2 pi); support excludes 0 and pi."""

    def __init__(self, ell: int):
        _check_ell(ell)
        self.ell = int(ell)
        self.size = 4 * self.ell
        self.support = tuple(k for k in range(self.size) if k not in (0, 2 * self.ell))
        self._sin = self._mirrored_sin_table(self.ell)
        self._verify_geometric_sums()

    @staticmethod
    def _mirrored_sin_table(ell: int) -> np.ndarray:
        # First quadrant computed, the rest mirrored, so sin(theta_k)
        # satisfies s[4l - k] == -s[k] bit for bit.
        base = np.sin(np.pi * np.arange(ell + 1) / (2 * ell))
        half = np.concatenate([base, base[ell - 1 :: -1]])  # k = 0 .. 2l
        table = np.concatenate([half, -half[2 * ell - 1 : 0 : -1]])  # k = 0 .. 4l-1
        table.flags.writeable = False
        return table

    def _verify_geometric_sums(self) -> None:
        # sum over the full grid of e^{i a theta} is 4l when 4l divides a, else 0.
        k = np.arange(self.size)
        for a in range(-self.size, self.size + 1):
            total = np.exp(2j * np.pi * a * k / self.size).sum()
            want = self.size if a % self.size == 0 else 0.0
            if abs(total - want) > _IDENTITY_TOL:
                raise RuntimeError(
                    f"grid geometric-sum identity failed at a={a}: |{total:.3e} - {want}| > {_IDENTITY_TOL}"
                )

    def angle(self, k: int) -> float:
        """theta_k = 2 pi k / (4 ell)."""
        if not 0 <= k < self.size:
            raise ValueError(f"grid index {k} out of range [0, {self.size})")
        return 2.0 * math.pi * k / self.size

    def sin(self, k: int) -> float:
        """sin(theta_k) from the mirrored table."""
        if not 0 <= k < self.size:
            raise ValueError(f"grid index {k} out of range [0, {self.size})")
        return float(self._sin[k])

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.size) / self.size

    @property
    def support_angles(self) -> np.ndarray:
        return 2.0 * math.pi * np.asarray(self.support) / self.size


class ProxyKernel:
    """Kernel values on the grid support, ready for moments and level coefficients."""

    def __init__(self, ell: int):
        self.ell = int(ell)
        self.grid = AngleGrid(ell)
        support = np.asarray(self.grid.support)
        sin_support = self.grid._sin[support]
        prefactor = (2 * self.ell - 1) / self.ell
        sin_ell_theta = np.asarray(_SIN_HALF_PI, dtype=np.float64)[support % 4]
        phi = prefactor * sin_ell_theta / sin_support**2
        phi.flags.writeable = False
        sin_support = sin_support.copy()
        sin_support.flags.writeable = False
        self.support = support
        self.sin_support = sin_support
        self.phi = phi

    def value(self, k: int) -> float:
        """phi at grid index k; the angles 0 and pi are poles and rejected."""
        if not 0 <= k < self.grid.size:
            raise ValueError(f"grid index {k} out of range [0, {self.grid.size})")
        if k in (0, 2 * self.ell):
            raise ValueError("kernel has a pole at theta in {0, pi}")
        idx = int(np.searchsorted(self.support, k))
        return float(self.phi[idx])


def make_grid(ell: int) -> AngleGrid:
    """Angle grid for an odd ell, with the geometric-sum identity verified."""
    return AngleGrid(ell)


def kernel_value(kernel: ProxyKernel, k: int) -> float:
    """phi(theta_k) for a support index k."""
    return kernel.value(k)


def kernel_moment(kernel: ProxyKernel, k: int) -> float:
    """E[phi(theta) sin^k(theta)] under the uniform distribution on the support."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    terms = kernel.phi * kernel.sin_support**k
    return math.fsum(terms) / terms.size


def kernel_l1(kernel: ProxyKernel) -> float:
    """E|phi(theta)|; never exceeds 4 ell."""
    value = math.fsum(np.abs(kernel.phi)) / kernel.phi.size
    bound = 4.0 * kernel.ell
    if value > bound:
        raise BoundViolationError(f"kernel l1 norm {value} exceeds 4*ell = {bound}")
    return value


def deviation_bound(ell: int) -> float:
    """8 ell / 2^ell, the per-coefficient gap between the proxy and the linear function."""
    _check_ell(ell)
    return 8.0 * ell / 2.0**ell


def proxy_level_coeffs(kernel: ProxyKernel, n: int) -> np.ndarray:
    """Level coefficients c_0..c_n with c_k = 2 E[phi sin^k] / 2^k.

    The proxy's Fourier coefficient at any subset S is c_{|S|}, so this
    array is the whole spectrum up to the level-counting map.
    """
    _check_dim(n)
    return np.array([2.0 * kernel_moment(kernel, k) / 2.0**k for k in range(n + 1)])


def proxy_eval_by_weight(kernel: ProxyKernel, n: int, a: int) -> float:
    """Proxy value at any point with exactly a coordinates equal to -1.

    The proxy is symmetric in the coordinates, so the Hamming weight
    determines the value: 2 E[phi (1 + s/2)^(n-a) (1 - s/2)^a], s = sin(theta).
    """
    _check_dim(n)
    if not 0 <= a <= n:
        raise ValueError(f"weight a={a} out of range [0, {n}]")
    plus = 1.0 + kernel.sin_support / 2.0
    minus = 1.0 - kernel.sin_support / 2.0
    # every factor sits in [1/2, 3/2]; the l1 computation depends on positivity
    assert plus.min() >= 0.5 and minus.min() >= 0.5
    terms = kernel.phi * plus ** (n - a) * minus**a
    return 2.0 * math.fsum(terms) / terms.size


def proxy_l1(kernel: ProxyKernel, n: int) -> float:
    """E|P(X)| as an exact weight-by-weight sum; never exceeds 8 ell."""
    _check_dim(n)
    total = math.fsum(
        math.comb(n, a) * abs(proxy_eval_by_weight(kernel, n, a)) for a in range(n + 1)
    )
    value = total / 2.0**n
    bound = 8.0 * kernel.ell
    if value > bound:
        raise BoundViolationError(f"proxy l1 norm {value} exceeds 8*ell = {bound}")
    return value


def proxy_as_cube_function(kernel: ProxyKernel, n: int) -> CubeFunction:
    """Materialize the proxy on the n-cube from its level coefficients."""
    _check_dim(n)
    if n > MAX_PROXY_DIM:
        raise ResourceLimitError(f"proxy tables capped at n={MAX_PROXY_DIM}, got {n}")
    coeffs = proxy_level_coeffs(kernel, n)
    levels = popcount(np.arange(1 << n, dtype=np.uint32))
    return CubeFunction.from_spectrum(n, coeffs[levels])
