import logging

import numpy as np
import pytest

from hurdlecea.core.data import (
    BETA_CLAMP_EPS,
    TrialData,
    TrialRecord,
    center_covariates,
    derive_zero_indicators,
)
from hurdlecea.exceptions import DataValidationError, DimensionMismatchError
from hurdlecea.schemas import EffectFamily


class TestZeroIndicators:
    def test_exact_zeros(self):
        np.testing.assert_array_equal(derive_zero_indicators([0, 12.5, 0]), [1, 0, 1])

    def test_empty(self):
        assert derive_zero_indicators([]).shape == (0,)

    def test_tiny_positive_is_not_zero(self):
        np.testing.assert_array_equal(derive_zero_indicators([1e-12]), [0])

    @pytest.mark.parametrize("bad", [-1.0, np.nan, np.inf])
    def test_rejects_invalid_costs(self, bad):
        with pytest.raises(DataValidationError) as info:
            derive_zero_indicators([3.0, bad])
        assert info.value.row == 1


class TestCenterCovariates:
    def test_single_arm_column(self):
        Z, means = center_covariates(np.array([[1.0], [2.0], [3.0]]), [0, 0, 0])
        np.testing.assert_allclose(Z[:, 0], [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(means[0], [2.0])

    def test_no_covariates(self):
        Z, _ = center_covariates(np.empty((4, 0)), [0, 0, 1, 1])
        assert Z.shape == (4, 0)

    def test_each_arm_uses_its_own_mean(self):
        X = np.array([[1.0], [3.0], [10.0], [20.0]])
        Z, means = center_covariates(X, [0, 0, 1, 1])
        np.testing.assert_allclose(Z[:, 0], [-1.0, 1.0, -5.0, 5.0])
        np.testing.assert_allclose(means[0], [2.0])
        np.testing.assert_allclose(means[1], [15.0])

    def test_column_means_vanish(self):
        rng = np.random.default_rng(4)
        X = rng.normal(1e3, 50.0, size=(501, 3))
        arms = rng.integers(0, 2, size=501)
        Z, _ = center_covariates(X, arms)
        for t in (0, 1):
            np.testing.assert_allclose(Z[arms == t].mean(axis=0), 0.0, atol=1e-10)

    def test_constant_column_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            center_covariates(np.array([[1.0], [1.0], [2.0], [3.0]]), [0, 0, 1, 1])
        assert "constant" in caplog.text

    def test_row_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            center_covariates(np.ones((3, 1)), [0, 1])

    @pytest.mark.parametrize("value", [np.nan, np.inf, -np.inf])
    def test_non_finite_entries(self, value):
        X = np.array([[1.0], [2.0], [value], [4.0]])
        with pytest.raises(DataValidationError) as info:
            center_covariates(X, [0, 0, 1, 1])
        assert info.value.row == 2


class TestTrialData:
    def test_partition_counts(self):
        data = TrialData.from_arrays(
            arm=[0, 0, 0, 1, 1],
            eff=[0.7, 0.8, 0.6, 0.75, 0.9],
            cost=[0.0, 100.0, 250.0, 0.0, 0.0],
        )
        a0, a1 = data.arms
        assert (a0.n, a0.n_null, a0.n_pos) == (3, 1, 2)
        assert (a1.n, a1.n_null, a1.n_pos) == (2, 2, 0)
        np.testing.assert_array_equal(a0.positive_cost, [100.0, 250.0])
        np.testing.assert_array_equal(a0.rows, [0, 1, 2])

    def test_missing_arm(self):
        with pytest.raises(DataValidationError, match="arm 1 has no records"):
            TrialData.from_arrays(arm=[0, 0], eff=[0.5, 0.5], cost=[1.0, 2.0])

    def test_beta_boundary_clamped_with_warning(self, caplog):
        with caplog.at_level(logging.WARNING):
            data = TrialData.from_arrays(arm=[0, 1], eff=[1.0, 0.0], cost=[5.0, 5.0])
        assert data.arms[0].eff[0] == 1.0 - BETA_CLAMP_EPS
        assert data.arms[1].eff[0] == BETA_CLAMP_EPS
        assert "clamped" in caplog.text

    def test_beta_outside_unit_interval(self):
        with pytest.raises(DataValidationError):
            TrialData.from_arrays(arm=[0, 1], eff=[1.2, 0.5], cost=[5.0, 5.0])

    def test_bernoulli_support(self):
        TrialData.from_arrays(arm=[0, 1], eff=[0, 1], cost=[5.0, 5.0], effect_family=EffectFamily.BERNOULLI)
        with pytest.raises(DataValidationError):
            TrialData.from_arrays(arm=[0, 1], eff=[0.5, 1], cost=[5.0, 5.0], effect_family=EffectFamily.BERNOULLI)

    def test_gamma_effects_positive(self):
        with pytest.raises(DataValidationError):
            TrialData.from_arrays(arm=[0, 1], eff=[0.0, 1.0], cost=[5.0, 5.0], effect_family=EffectFamily.GAMMA)

    def test_bad_arm_label(self):
        with pytest.raises(DataValidationError):
            TrialData.from_arrays(arm=[0, 2], eff=[0.5, 0.5], cost=[1.0, 1.0])

    def test_covariates_and_frame(self):
        data = TrialData.from_arrays(
            arm=[0, 0, 1, 1],
            eff=[0.5, 0.6, 0.7, 0.8],
            cost=[1.0, 0.0, 3.0, 4.0],
            X=[[1.0, 5.0], [3.0, 7.0], [10.0, 0.0], [20.0, 2.0]],
            covariate_names=["age", "sex"],
        )
        assert data.n_covariates == 2
        np.testing.assert_allclose(data.arms[1].Z, [[-5.0, -1.0], [5.0, 1.0]])
        frame = data.to_frame()
        assert list(frame.columns) == ["arm", "eff", "cost", "age", "sex"]
        np.testing.assert_array_equal(frame["age"], [1.0, 3.0, 10.0, 20.0])

    def test_from_records(self):
        records = [TrialRecord(arm=0, eff=0.5, cost=0.0), TrialRecord(arm=1, eff=0.6, cost=12.0)]
        data = TrialData.from_records(records)
        assert data.arms[0].n_null == 1
        assert data.arms[1].n_pos == 1
        assert data.n_covariates == 0
