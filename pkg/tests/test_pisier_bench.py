"""Projection-audit pipeline checks: parameter choice, splitting, derived bounds."""

import math

import numpy as np
import pytest

from pisier_lab import (
    CubeFunction,
    Norm,
    ProxyKernel,
    SandwichTransform,
    VectorFunction,
    choose_ell,
    decomposition_audit,
    linear_function,
    mean_square_norm,
    pisier_ratio,
    proxy_as_cube_function,
    rademacher_projection,
    vector_convolve,
)
from pisier_lab.cube_fourier import popcount
from pisier_lab.lower_bound import lower_bound_instance


def random_vector(n, m, seed):
    rng = np.random.default_rng(seed)
    return VectorFunction.from_spectrum_matrix(n, rng.standard_normal((1 << n, m)))


class TestChooseEll:
    @pytest.mark.parametrize(("m", "want"), [(1, 1), (2, 1), (4, 3), (8, 3), (16, 3), (64, 5), (1024, 7)])
    def test_values(self, m, want):
        assert choose_ell(m) == want

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            choose_ell(0)

    @pytest.mark.parametrize("m", [1, 3, 10, 100, 5000])
    def test_always_odd_and_large_enough(self, m):
        ell = choose_ell(m)
        assert ell % 2 == 1
        assert ell > 0.5 * math.log2(m)
        # smallest such odd: stepping down two crosses the threshold
        assert ell - 2 <= 0.5 * math.log2(m)


class TestPisierRatio:
    def test_constant_function(self):
        f = VectorFunction([CubeFunction.constant(5, 2.0)])
        report = pisier_ratio(f, Norm.lp(2))
        assert report.params["ratio"] == 0.0

    def test_purely_linear_function(self):
        f = VectorFunction([linear_function(6)])
        report = pisier_ratio(f, Norm.lp(2))
        assert report.params["ratio"] == 1.0

    def test_zero_function(self):
        f = VectorFunction([CubeFunction.constant(4, 0.0)])
        assert pisier_ratio(f, Norm.lp(2)).params["ratio"] == 0.0

    @pytest.mark.parametrize("seed", range(6))
    def test_euclidean_never_expands(self, seed):
        f = random_vector(8, 4, seed)
        assert pisier_ratio(f, Norm.lp(2)).params["ratio"] <= 1.0 + 1e-12

    def test_witness_instance_beats_one(self):
        """At n=9 the tailored instance forces ratio sqrt(n) / ||F||_inf >= 1."""
        instance = lower_bound_instance(9, "truncated")
        report = pisier_ratio(instance.vector, instance.norm)
        assert report.lhs == pytest.approx(3.0, abs=1e-10)
        assert report.rhs == pytest.approx(instance.witness_sup, abs=1e-10)
        assert report.params["ratio"] >= 1.0

    def test_dimension_cap(self):
        f = random_vector(4, 2, 0)
        with pytest.raises(ValueError):
            pisier_ratio(
                VectorFunction.from_spectrum_matrix(
                    13, np.zeros((1 << 13, 1))
                ),
                Norm.sup_functional(13, [0]),
            )
        assert pisier_ratio(f, Norm.lp(1)).rhs > 0


class TestDecompositionAudit:
    def test_random_instance_all_bounds_hold(self):
        f = random_vector(8, 4, 7)
        transform = SandwichTransform.for_lp(math.inf, 4)
        audit = decomposition_audit(f, Norm.lp(math.inf), transform)
        assert audit.ell == 3
        assert audit.lhs <= audit.term_proxy + audit.term_remainder + 1e-9
        assert audit.lhs <= audit.derived_constant * audit.rhs_raw + 1e-9
        assert audit.term_proxy <= 8 * audit.ell * audit.rhs_raw + 1e-9

    def test_euclidean_remainder_chain(self):
        f = random_vector(8, 4, 8)
        transform = SandwichTransform.for_lp(2.0, 4)
        audit = decomposition_audit(f, Norm.lp(2), transform)
        assert transform.distortion == 1.0
        assert audit.term_remainder <= (8 * audit.ell / 2**audit.ell) * audit.rhs_raw + 1e-9

    def test_mid_levels_vanish(self):
        """With spectrum on levels 2..ell only, both lin f and f * P vanish."""
        n, ell = 8, 3
        levels = popcount(np.arange(1 << n, dtype=np.uint32))
        rng = np.random.default_rng(9)
        spectra = rng.standard_normal((1 << n, 2))
        spectra[~((levels >= 2) & (levels <= ell))] = 0.0
        f = VectorFunction.from_spectrum_matrix(n, spectra)
        transform = SandwichTransform.for_lp(math.inf, 2)
        audit = decomposition_audit(f, Norm.lp(math.inf), transform, ell=ell)
        assert audit.lhs == 0.0
        assert audit.term_proxy < 1e-10

    def test_remainder_parseval_step(self):
        """E||T(f)*(L-P)||_2^2 equals the coefficient-space sum."""
        n, m, ell = 8, 4, 3
        f = random_vector(n, m, 10)
        transform = SandwichTransform.for_lp(math.inf, m)
        tf = VectorFunction.from_spectrum_matrix(n, f.spectrum_matrix() @ transform.matrix.T)
        gap = linear_function(n) - proxy_as_cube_function(ProxyKernel(ell), n)
        lhs = mean_square_norm(vector_convolve(tf, gap), Norm.lp(2)) ** 2
        rhs = float(np.sum((tf.spectrum_matrix() ** 2) * (gap.spectrum[:, None] ** 2)))
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_rejects_invalid_transform(self):
        f = random_vector(6, 4, 11)
        bad = SandwichTransform(matrix=np.eye(4), distortion=1.0)
        with pytest.raises(ValueError, match="rejected"):
            decomposition_audit(f, Norm.lp(math.inf), bad)

    def test_rejects_mismatched_transform(self):
        f = random_vector(6, 4, 12)
        with pytest.raises(ValueError):
            decomposition_audit(f, Norm.lp(2), SandwichTransform.for_lp(2.0, 3))

    def test_forced_ell_changes_constant(self):
        f = random_vector(8, 4, 13)
        transform = SandwichTransform.for_lp(1.0, 4)
        audit5 = decomposition_audit(f, Norm.lp(1), transform, ell=5)
        assert audit5.ell == 5
        assert audit5.derived_constant == pytest.approx(40 * (1 + 2 / 32))

    @pytest.mark.parametrize("norm_name", ["linf", "l1", "l2"])
    @pytest.mark.parametrize("seed", range(5))
    def test_derived_bound_over_random_grid(self, norm_name, seed):
        p = {"linf": math.inf, "l1": 1.0, "l2": 2.0}[norm_name]
        f = random_vector(7, 5, 500 + seed)
        audit = decomposition_audit(f, Norm.lp(p), SandwichTransform.for_lp(p, 5))
        assert audit.lhs <= audit.derived_constant * audit.rhs_raw + 1e-9

    def test_audit_serializes_cleanly(self):
        import json

        f = random_vector(6, 2, 14)
        audit = decomposition_audit(f, Norm.lp(2), SandwichTransform.for_lp(2.0, 2))
        payload = json.dumps(audit.to_dict(), sort_keys=True)
        assert json.loads(payload)["ell"] == audit.ell
