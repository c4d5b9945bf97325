"""Vector-valued cube functions, the norm suite, and convolution facts.

A VectorFunction is m coordinate CubeFunctions over one cube.  Norms on the
target space come in three kinds: the lp family, the sup-functional norm
(the sup norm of the function whose spectrum is the vector, over a fixed
subset family), and caller-supplied evaluators that are spot-validated at
construction.  All cube averages are exact enumerations over the 2^n
points; sampling appears only in sandwich validation, where the inequality
ranges over all of R^m and cannot be enumerated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .cube_fourier import (
    MAX_DIM,
    CubeFunction,
    convolve,
    from_bytes,
    inverse_fwht_rows,
    project_degree_one,
    to_bytes,
)
from .report import BoundReport, BoundViolationError, ResourceLimitError

_SUPPLIED_NORM_TOL = 1e-9
# keep each embedded sup-functional block under ~32 MB
_SUP_CHUNK_DOUBLES = 1 << 22


class VectorFunction:
    """Function from the cube to R^m, held as m coordinate CubeFunctions."""

    def __init__(self, coords: Iterable[CubeFunction]):
        coords = tuple(coords)
        if not coords:
            raise ValueError("need at least one coordinate function")
        n = coords[0].n
        if any(c.n != n for c in coords):
            raise ValueError("coordinate functions must share one cube dimension")
        self.n = n
        self.m = len(coords)
        self.coords = coords

    @classmethod
    def from_values_matrix(cls, n: int, values: np.ndarray) -> "VectorFunction":
        """Columns of a (2^n, m) matrix become the coordinate value tables."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != 1 << n:
            raise ValueError(f"expected a (2^{n}, m) matrix, got {values.shape}")
        return cls(CubeFunction.from_values(n, values[:, j]) for j in range(values.shape[1]))

    @classmethod
    def from_spectrum_matrix(cls, n: int, spectra: np.ndarray) -> "VectorFunction":
        """Columns of a (2^n, m) matrix become the coordinate spectra."""
        spectra = np.asarray(spectra, dtype=np.float64)
        if spectra.ndim != 2 or spectra.shape[0] != 1 << n:
            raise ValueError(f"expected a (2^{n}, m) matrix, got {spectra.shape}")
        return cls(CubeFunction.from_spectrum(n, spectra[:, j]) for j in range(spectra.shape[1]))

    def values_matrix(self) -> np.ndarray:
        return np.column_stack([c.values for c in self.coords])

    def spectrum_matrix(self) -> np.ndarray:
        return np.column_stack([c.spectrum for c in self.coords])

    def coefficient(self, s_mask: int) -> np.ndarray:
        """The vector Fourier coefficient at one subset."""
        return np.array([c.spectrum[s_mask] for c in self.coords])

    def __repr__(self):
        return f"VectorFunction(n={self.n}, m={self.m})"


def sup_functional_norm(coeffs, family: Sequence[int], n_dual: int) -> float:
    """max over z of |sum_S v_S chi_S(z)|: one inverse transform and a max scan."""
    if n_dual > MAX_DIM:
        raise ResourceLimitError(f"dual dimension {n_dual} exceeds the cap {MAX_DIM}")
    coeffs = np.asarray(coeffs, dtype=np.float64)
    family = np.asarray(family, dtype=np.int64)
    if coeffs.shape != family.shape:
        raise ValueError("coefficient vector and subset family differ in length")
    spectrum = np.zeros(1 << n_dual)
    spectrum[family] = coeffs
    return float(np.abs(inverse_fwht_rows(spectrum[None, :])).max())


class Norm:
    """Norm on R^m: lp, sup-functional over a subset family, or supplied."""

    def __init__(self, kind: str, *, p=None, n_dual=None, family=None, evaluator=None, dim=None, name=None):
        self.kind = kind
        self.p = p
        self.n_dual = n_dual
        self.family = family
        self.evaluator = evaluator
        self.dim = dim
        self._name = name

    @classmethod
    def lp(cls, p: float) -> "Norm":
        p = float(p)
        if not (p >= 1.0 or math.isinf(p)):
            raise ValueError(f"lp norms need p >= 1, got {p}")
        if math.isinf(p):
            name = "linf"
        elif p == int(p):
            name = f"l{int(p)}"
        else:
            name = f"lp({p:g})"
        return cls("lp", p=p, name=name)

    @classmethod
    def sup_functional(cls, n_dual: int, family: Sequence[int]) -> "Norm":
        """Vectors indexed by the family, measured as the sup norm of g_v.

        The family is held in ascending bitmask order so coefficient vectors
        mean the same thing across runs.
        """
        if n_dual > MAX_DIM:
            raise ResourceLimitError(f"dual dimension {n_dual} exceeds the cap {MAX_DIM}")
        fam = np.asarray(family, dtype=np.int64)
        if fam.size == 0:
            raise ValueError("subset family is empty")
        if fam.size > 1 and not np.all(fam[1:] > fam[:-1]):
            # silent reordering would reinterpret coefficient vectors
            raise ValueError("subset family must be strictly ascending by bitmask")
        if fam.min() < 0 or fam.max() >= (1 << n_dual):
            raise ValueError(f"subset family has masks out of range for n_dual={n_dual}")
        fam.flags.writeable = False
        return cls(
            "sup_functional",
            n_dual=int(n_dual),
            family=fam,
            dim=int(fam.size),
            name=f"sup_functional(n={n_dual},|family|={fam.size})",
        )

    @classmethod
    def supplied(
        cls,
        evaluator: Callable[[np.ndarray], float],
        dim: int,
        samples: int = 32,
        seed: int = 0,
        name: str = "supplied",
    ) -> "Norm":
        """Wrap a caller-provided evaluator after spot-validating the norm axioms."""
        norm = cls("supplied", evaluator=evaluator, dim=int(dim), name=f"{name}(m={dim})")
        norm._validate_axioms(samples, seed)
        return norm

    def _validate_axioms(self, samples: int, seed: int) -> None:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            u = rng.standard_normal(self.dim)
            v = rng.standard_normal(self.dim)
            alpha = float(rng.standard_normal())
            nu, nv = self.evaluate(u), self.evaluate(v)
            if nu < 0 or nv < 0:
                raise ValueError("supplied evaluator returned a negative value")
            scaled = self.evaluate(alpha * u)
            target = abs(alpha) * nu
            if abs(scaled - target) > _SUPPLIED_NORM_TOL * max(1.0, target):
                raise ValueError(
                    f"supplied evaluator fails homogeneity: |{scaled} - {target}| > tol"
                )
            if self.evaluate(u + v) > nu + nv + _SUPPLIED_NORM_TOL:
                raise ValueError("supplied evaluator fails the triangle inequality")

    @property
    def name(self) -> str:
        return self._name or self.kind

    def evaluate(self, v) -> float:
        """Norm of a single vector."""
        return float(self.evaluate_rows(np.asarray(v, dtype=np.float64)[None, :])[0])

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        """Norms of the rows of a (k, m) matrix."""
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ValueError("evaluate_rows expects a 2-D array")
        if self.dim is not None and rows.shape[1] != self.dim:
            raise ValueError(f"norm is on R^{self.dim}, got vectors in R^{rows.shape[1]}")
        if self.kind == "lp":
            return np.linalg.norm(rows, ord=self.p, axis=1)
        if self.kind == "sup_functional":
            return self._sup_functional_rows(rows)
        return np.array([float(self.evaluator(row)) for row in rows])

    def _sup_functional_rows(self, rows: np.ndarray) -> np.ndarray:
        size = 1 << self.n_dual
        out = np.empty(rows.shape[0])
        chunk = max(1, _SUP_CHUNK_DOUBLES // size)
        for start in range(0, rows.shape[0], chunk):
            block = rows[start : start + chunk]
            embedded = np.zeros((block.shape[0], size))
            embedded[:, self.family] = block
            out[start : start + chunk] = np.abs(inverse_fwht_rows(embedded)).max(axis=1)
        return out

    def __call__(self, v) -> float:
        return self.evaluate(v)

    def __repr__(self):
        return f"Norm({self.name})"


@dataclass(frozen=True)
class SandwichTransform:
    """Invertible T with ||T x||_2 <= ||x|| <= d ||T x||_2 for the target norm."""

    matrix: np.ndarray
    distortion: float

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("transform matrix must be square")
        if not np.isfinite(np.linalg.cond(matrix)) or np.linalg.cond(matrix) > 1e12:
            raise ValueError("transform matrix must be invertible")
        if self.distortion < 1.0:
            raise ValueError("distortion must be at least 1")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "distortion", float(self.distortion))

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def for_lp(cls, p: float, m: int) -> "SandwichTransform":
        """Diagonal transform with the sharp lp-vs-l2 comparison constants."""
        p = float(p)
        if not (p >= 1.0 or math.isinf(p)):
            raise ValueError(f"lp transforms need p >= 1, got {p}")
        inv_p = 0.0 if math.isinf(p) else 1.0 / p
        if p >= 2.0 or math.isinf(p):
            scale = m ** (inv_p - 0.5)
            distortion = m ** (0.5 - inv_p)
        else:
            scale = 1.0
            distortion = m ** (inv_p - 0.5)
        return cls(matrix=scale * np.eye(m), distortion=max(1.0, distortion))


def sandwich_validate(
    transform: SandwichTransform,
    norm: Norm,
    sample_count: int = 64,
    seed: int = 0,
    tol: float = 1e-9,
) -> BoundReport:
    """Check the two-sided comparison on random unit directions plus signed basis vectors.

    A violation beyond the tolerance makes the returned report fail; it does
    not raise, so callers can surface the worst direction.
    """
    m = transform.m
    if norm.dim not in (None, m):
        raise ValueError(f"norm is on R^{norm.dim}, transform on R^{m}")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((max(0, int(sample_count)), m))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
    points = np.vstack([dirs, np.eye(m), -np.eye(m)])
    euclid = np.linalg.norm(points @ transform.matrix.T, axis=1)
    target = norm.evaluate_rows(points)
    lower_slack = target - euclid
    upper_slack = transform.distortion * euclid - target
    slack = float(min(lower_slack.min(), upper_slack.min()))
    if lower_slack.min() <= upper_slack.min():
        worst = int(np.argmin(lower_slack))
        lhs, rhs = float(euclid[worst]), float(target[worst])
        side = "lower"
    else:
        worst = int(np.argmin(upper_slack))
        lhs, rhs = float(target[worst]), float(transform.distortion * euclid[worst])
        side = "upper"
    return BoundReport(
        claim="sandwich-two-sided-comparison",
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        params={
            "m": m,
            "distortion": float(transform.distortion),
            "norm": norm.name,
            "sample_count": int(sample_count),
            "seed": int(seed),
            "tol": tol,
            "worst_side": side,
        },
    )


def mean_square_norm(f: VectorFunction, norm: Norm) -> float:
    """(E ||f(X)||^2)^(1/2), averaged exactly over all 2^n cube points."""
    if norm.dim not in (None, f.m):
        raise ValueError(f"norm is on R^{norm.dim}, function maps into R^{f.m}")
    per_point = norm.evaluate_rows(f.values_matrix())
    return float(np.sqrt(np.mean(per_point**2)))


def vector_convolve(f: VectorFunction, g: CubeFunction) -> VectorFunction:
    """Coordinate-wise convolution with a scalar function."""
    if f.n != g.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {g.n}")
    return VectorFunction(convolve(c, g) for c in f.coords)


def rademacher_projection(f: VectorFunction) -> VectorFunction:
    """Keep the level-1 part of every coordinate."""
    return VectorFunction(project_degree_one(c) for c in f.coords)


def apply_linear(matrix: np.ndarray, f: VectorFunction) -> VectorFunction:
    """Compose with a linear map on the target space (acts on spectra)."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != f.m:
        raise ValueError(f"expected a (k, {f.m}) matrix, got {matrix.shape}")
    return VectorFunction.from_spectrum_matrix(f.n, f.spectrum_matrix() @ matrix.T)


def young_bound_check(
    f: VectorFunction, g: CubeFunction, norm: Norm, tol: float = 1e-9
) -> BoundReport:
    """Convolution contraction: msn(f * g) <= E|g| * msn(f) for any norm."""
    lhs = mean_square_norm(vector_convolve(f, g), norm)
    g_l1 = float(np.mean(np.abs(g.values)))
    rhs = g_l1 * mean_square_norm(f, norm)
    report = BoundReport.of(
        "convolution-l1-contraction",
        lhs,
        rhs,
        params={"n": f.n, "m": f.m, "norm": norm.name, "g_l1": g_l1},
    )
    if not report.holds(tol):
        raise BoundViolationError(
            f"convolution contraction violated: {lhs} > {rhs} + {tol}", report
        )
    return report


def write_vector(f: VectorFunction, data_path, sidecar_path) -> None:
    """m concatenated coordinate binaries plus a {n, m} JSON sidecar."""
    blob = b"".join(to_bytes(c) for c in f.coords)
    Path(data_path).write_bytes(blob)
    Path(sidecar_path).write_text(json.dumps({"n": f.n, "m": f.m}, sort_keys=True) + "\n")


def read_vector(data_path, sidecar_path) -> VectorFunction:
    meta = json.loads(Path(sidecar_path).read_text())
    n, m = int(meta["n"]), int(meta["m"])
    blob = Path(data_path).read_bytes()
    record = 4 + 8 * (1 << n)
    if len(blob) != m * record:
        raise ValueError(f"vector blob length {len(blob)} does not match n={n}, m={m}")
    coords = [from_bytes(blob[i * record : (i + 1) * record]) for i in range(m)]
    return VectorFunction(coords)
