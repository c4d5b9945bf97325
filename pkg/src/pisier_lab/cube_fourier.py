"""Scalar Fourier analysis on the discrete cube {+1, -1}^n.

Points and subsets share the bitmask index space [0, 2^n): bit j of a point
mask means x_j = -1, bit j of a subset mask means j belongs to the subset.
Under this encoding chi_S(x) = (-1)^popcount(S & x), the coordinate-wise
product of points is XOR of masks, and a single Walsh-Hadamard butterfly
converts between the value table and the spectrum in both directions.

Spectra are stored in expectation normalization: spectrum[S] = E[f(X) chi_S(X)],
so that values[x] = sum_S spectrum[S] chi_S(x) with no extra scaling.
"""

from __future__ import annotations

import json
import struct
from numbers import Real
from pathlib import Path

import numpy as np

from .report import ResourceLimitError

MAX_DIM = 24  # 2^24 doubles = 128 MB per value table
SPARSITY_THRESHOLD = 1e-8
_CONSISTENCY_RTOL = 1e-12

_HEADER = struct.Struct("<I")


def _check_dim(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    if n > MAX_DIM:
        raise ResourceLimitError(f"dimension {n} exceeds the value-table cap {MAX_DIM}")


def popcount(masks) -> np.ndarray:
    """Number of set bits, elementwise."""
    return np.bitwise_count(np.asarray(masks, dtype=np.uint32))


def _walsh_butterfly(a: np.ndarray) -> np.ndarray:
    # In-place radix-2 pass over a fresh copy; out[s] = sum_x a[x] (-1)^popcount(s & x)
    # along the last axis.  Works on any leading batch shape.
    *lead, size = a.shape
    a = a.astype(np.float64, copy=True)
    h = 1
    while h < size:
        a = a.reshape(*lead, -1, 2, h)
        top = a[..., 0, :] + a[..., 1, :]
        bot = a[..., 0, :] - a[..., 1, :]
        a[..., 0, :] = top
        a[..., 1, :] = bot
        h *= 2
    return a.reshape(*lead, size)


def _check_power_of_two(size: int, what: str) -> None:
    if size < 1 or size & (size - 1):
        raise ValueError(f"{what} needs a length that is a power of two, got {size}")


def fwht(values) -> np.ndarray:
    """Spectrum of a value table: out[S] = E_x[f(x) chi_S(x)]."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("fwht expects a 1-D value table")
    _check_power_of_two(v.size, "fwht")
    return _walsh_butterfly(v) / v.size


def inverse_fwht(spectrum) -> np.ndarray:
    """Value table of a spectrum: out[x] = sum_S spectrum[S] chi_S(x)."""
    s = np.asarray(spectrum, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError("inverse_fwht expects a 1-D spectrum")
    _check_power_of_two(s.size, "inverse_fwht")
    return _walsh_butterfly(s)


def inverse_fwht_rows(spectra: np.ndarray) -> np.ndarray:
    """Inverse transform applied to every row of a 2-D array of spectra."""
    s = np.asarray(spectra, dtype=np.float64)
    if s.ndim != 2:
        raise ValueError("inverse_fwht_rows expects a 2-D array")
    _check_power_of_two(s.shape[1], "inverse_fwht_rows")
    return _walsh_butterfly(s)


def character_eval(s_mask: int, x_mask: int) -> int:
    """chi_S(x), the product of x_j over j in S: +-1 by parity of popcount(S & x)."""
    return -1 if (s_mask & x_mask).bit_count() & 1 else 1


def character_values(n: int, s_mask: int) -> np.ndarray:
    """Value table of chi_S over the whole cube."""
    _check_dim(n)
    masks = np.arange(1 << n, dtype=np.uint32)
    parity = popcount(masks & np.uint32(s_mask)) & 1
    return 1.0 - 2.0 * parity.astype(np.float64)


def group_mul(x_mask: int, z_mask: int) -> int:
    """Coordinate-wise product of two cube points; XOR under the mask encoding."""
    return x_mask ^ z_mask


class CubeFunction:
    """Real function on the cube held as a 2^n value table and/or its spectrum.

    Immutable after construction; whichever representation is missing is
    computed lazily through the transform and cached (idempotent fill, safe
    under concurrent readers).
    """

    __slots__ = ("n", "_values", "_spectrum")

    def __init__(self, n: int, values=None, spectrum=None):
        _check_dim(n)
        if values is None and spectrum is None:
            raise ValueError("need a value table or a spectrum")
        size = 1 << n
        self.n = n
        self._values = self._own(values, size)
        self._spectrum = self._own(spectrum, size)
        if self._values is not None and self._spectrum is not None:
            back = _walsh_butterfly(self._spectrum)
            scale = max(1.0, float(np.abs(self._values).max()))
            if float(np.abs(back - self._values).max()) > _CONSISTENCY_RTOL * scale:
                raise ValueError("value table and spectrum disagree beyond 1e-12 relative")

    @staticmethod
    def _own(arr, size: int):
        if arr is None:
            return None
        a = np.array(arr, dtype=np.float64)
        if a.shape != (size,):
            raise ValueError(f"expected shape ({size},), got {a.shape}")
        a.flags.writeable = False
        return a

    @classmethod
    def from_values(cls, n: int, values) -> "CubeFunction":
        return cls(n, values=values)

    @classmethod
    def from_spectrum(cls, n: int, spectrum) -> "CubeFunction":
        return cls(n, spectrum=spectrum)

    @classmethod
    def constant(cls, n: int, value: float) -> "CubeFunction":
        _check_dim(n)
        spec = np.zeros(1 << n)
        spec[0] = value
        return cls(n, spectrum=spec)

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            v = _walsh_butterfly(self._spectrum)
            v.flags.writeable = False
            self._values = v
        return self._values

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            s = _walsh_butterfly(self._values) / self._values.size
            s.flags.writeable = False
            self._spectrum = s
        return self._spectrum

    def value(self, x_mask: int) -> float:
        return float(self.values[x_mask])

    def coefficient(self, s_mask: int) -> float:
        return float(self.spectrum[s_mask])

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def _binary(self, other: "CubeFunction", op) -> "CubeFunction":
        if not isinstance(other, CubeFunction):
            return NotImplemented
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        if self._spectrum is not None and other._spectrum is not None:
            return CubeFunction(self.n, spectrum=op(self._spectrum, other._spectrum))
        return CubeFunction(self.n, values=op(self.values, other.values))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if not isinstance(scalar, Real):
            return NotImplemented
        if self._spectrum is not None:
            return CubeFunction(self.n, spectrum=self._spectrum * float(scalar))
        return CubeFunction(self.n, values=self._values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"CubeFunction(n={self.n})"


def convolve(f: CubeFunction, g: CubeFunction) -> CubeFunction:
    """Convolution E_Z[g(Z) f(x . Z)], realized as the pointwise spectrum product."""
    if f.n != g.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {g.n}")
    return CubeFunction.from_spectrum(f.n, f.spectrum * g.spectrum)


def project_degree_one(f: CubeFunction) -> CubeFunction:
    """Keep exactly the |S| = 1 coefficients; the scalar Rademacher projection."""
    levels = popcount(np.arange(f.size, dtype=np.uint32))
    return CubeFunction.from_spectrum(f.n, np.where(levels == 1, f.spectrum, 0.0))


def spectrum_sparsity(f: CubeFunction, threshold: float = SPARSITY_THRESHOLD) -> int:
    """Number of subsets whose coefficient exceeds the threshold in magnitude."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return int(np.count_nonzero(np.abs(f.spectrum) > threshold))


def linear_function(n: int) -> CubeFunction:
    """L(x) = x_1 + ... + x_n, the function whose spectrum is the level-1 indicator."""
    _check_dim(n)
    spec = np.zeros(1 << n)
    spec[[1 << j for j in range(n)]] = 1.0
    return CubeFunction.from_spectrum(n, spec)


def to_bytes(f: CubeFunction) -> bytes:
    """Flat binary form: u32 little-endian n, then 2^n IEEE doubles in value order."""
    return _HEADER.pack(f.n) + f.values.astype("<f8").tobytes()


def from_bytes(blob: bytes) -> CubeFunction:
    if len(blob) < _HEADER.size:
        raise ValueError("truncated cube-function blob")
    (n,) = _HEADER.unpack_from(blob, 0)
    _check_dim(n)
    expected = _HEADER.size + 8 * (1 << n)
    if len(blob) != expected:
        raise ValueError(f"blob length {len(blob)} does not match n={n} (expected {expected})")
    values = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    return CubeFunction.from_values(n, values)


def write_binary(f: CubeFunction, path) -> None:
    Path(path).write_bytes(to_bytes(f))


def read_binary(path) -> CubeFunction:
    return from_bytes(Path(path).read_bytes())


def to_spectrum_json(f: CubeFunction, threshold: float = 0.0) -> str:
    """Sparse JSON spectrum: subset bitmask (as a decimal string key) to coefficient."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    spec = f.spectrum
    keep = np.nonzero(np.abs(spec) > threshold)[0] if threshold > 0 else np.nonzero(spec)[0]
    payload = {"n": f.n, "spectrum": {str(int(m)): float(spec[m]) for m in keep}}
    return json.dumps(payload, indent=2, sort_keys=True)


def from_spectrum_json(text: str) -> CubeFunction:
    obj = json.loads(text)
    n = int(obj["n"])
    _check_dim(n)
    spec = np.zeros(1 << n)
    for key, coeff in obj["spectrum"].items():
        mask = int(key)
        if not 0 <= mask < (1 << n):
            raise ValueError(f"subset mask {mask} out of range for n={n}")
        spec[mask] = float(coeff)
    return CubeFunction.from_spectrum(n, spec)
