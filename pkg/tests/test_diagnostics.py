import logging

import numpy as np
import pandas as pd
import pytest

from hurdlecea.diagnostics import (
    check_convergence,
    convergence_table,
    default_parameters,
    dic,
    ess,
    rhat,
    summarize,
    summary_frame,
)
from hurdlecea.exceptions import DiagnosticError
from hurdlecea.posterior import PosteriorDraws
from hurdlecea.sampler import fit
from hurdlecea.schemas import ModelSpec, NullLikelihoodMode

W_GRID = (10.0, 100.0, 1e3, 1e4, 1e5)


def _ar1(n: int, phi: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = noise[0]
    for i in range(1, n):
        x[i] = phi * x[i - 1] + noise[i]
    return x


class TestRhat:
    def test_identical_chains(self):
        assert rhat([[1, 2, 3, 4], [1, 2, 3, 4]]) == pytest.approx(np.sqrt(3 / 4))

    def test_separated_chains(self):
        value = rhat([[1, 2, 3, 4], [101, 102, 103, 104]])
        within = 5.0 / 3.0
        between = 4 * 5000.0
        assert value == pytest.approx(np.sqrt((0.75 * within + between / 4) / within))
        assert value > 1.1

    def test_same_distribution(self):
        rng = np.random.default_rng(3)
        assert 0.99 <= rhat(rng.standard_normal((2, 5000))) <= 1.05

    def test_single_chain_needs_split(self):
        with pytest.raises(DiagnosticError):
            rhat([[1.0, 2.0, 3.0, 4.0]])
        assert np.isfinite(rhat([[1.0, 3.0, 2.0, 5.0, 4.0, 6.0]], split=True))

    def test_zero_variance_chain(self):
        with pytest.raises(DiagnosticError):
            rhat([[1.0, 1.0, 1.0], [1.0, 2.0, 3.0]])


class TestEss:
    def test_white_noise(self):
        x = np.random.default_rng(5).standard_normal(10_000)
        assert 0.8 <= ess(x) / x.size <= 1.2

    def test_ar1(self):
        x = _ar1(20_000, 0.5, seed=6)
        assert ess(x) / x.size == pytest.approx(1.0 / 3.0, rel=0.2)

    def test_constant_chain(self):
        with pytest.raises(DiagnosticError):
            ess(np.full(100, 2.0))

    def test_too_short(self):
        with pytest.raises(DiagnosticError):
            ess([1.0, 2.0, 3.0])


class TestConvergenceTable:
    def test_columns_and_rows(self, trial, tiny_cfg):
        draws = fit(trial, ModelSpec(), tiny_cfg)
        table = convergence_table(draws)
        assert list(table.columns) == ["parameter", "rhat", "ess", "acceptance"]
        assert list(table["parameter"]) == draws.columns
        assert table.loc[table["parameter"] == "psi0_0", "acceptance"].notna().all()
        assert table.loc[table["parameter"] == "mu_c_0", "acceptance"].isna().all()

    def test_check_flags_and_warns(self, caplog):
        table = pd.DataFrame({"parameter": ["a", "b"], "rhat": [1.01, 1.3], "ess": [500.0, 40.0],
                              "acceptance": [0.4, 0.4]})
        with caplog.at_level(logging.WARNING):
            assert not check_convergence(table, ess_threshold=100, rhat_threshold=1.1)
        assert "R-hat" in caplog.text and "ESS" in caplog.text
        assert check_convergence(table.iloc[:1], ess_threshold=100, rhat_threshold=1.1)


class TestDic:
    def test_duplicated_draw_has_no_effective_parameters(self, trial, tiny_cfg):
        draws = fit(trial, ModelSpec(), tiny_cfg)
        one = draws.values[:1, :1, :]
        duplicated = PosteriorDraws(
            values=np.repeat(one, 2, axis=1), columns=draws.columns, spec=draws.spec, config=draws.config
        )
        result = dic(duplicated, trial)
        assert result.pD == pytest.approx(0.0, abs=1e-6)
        assert result.DIC == pytest.approx(result.Dbar, abs=1e-6)

    def test_components(self, trial, tiny_cfg):
        result = dic(fit(trial, ModelSpec(), tiny_cfg), trial)
        assert result.pD == pytest.approx(result.Dbar - result.Dhat)
        assert result.DIC == pytest.approx(result.Dbar + result.pD)

    def test_point_mass_invariant_to_W(self, zero_rich_trial, tiny_cfg):
        values = []
        for W in W_GRID:
            spec = ModelSpec(W=W)
            values.append(dic(fit(zero_rich_trial, spec, tiny_cfg), zero_rich_trial, spec).DIC)
        np.testing.assert_allclose(values, values[0], atol=1e-6, rtol=0)

    def test_degenerate_density_decreases_with_W(self, zero_rich_trial, tiny_cfg):
        values = []
        for W in W_GRID:
            spec = ModelSpec(W=W, null_likelihood_mode=NullLikelihoodMode.DEGENERATE_DENSITY)
            values.append(dic(fit(zero_rich_trial, spec, tiny_cfg), zero_rich_trial, spec).DIC)
        assert np.all(np.diff(values) < 0)


class TestSummaries:
    def test_constant_draws(self):
        draws = PosteriorDraws(values=np.full((2, 50, 1), 5.0), columns=["x"])
        (row,) = summarize(draws, ["x"])
        assert (row.mean, row.sd, row.q025, row.q975) == (5.0, 0.0, 5.0, 5.0)

    def test_interpolated_quantiles(self):
        draws = PosteriorDraws(values=np.arange(1.0, 101.0).reshape(1, 100, 1), columns=["x"])
        (row,) = summarize(draws, ["x"])
        assert row.q025 == pytest.approx(3.475)
        assert row.q975 == pytest.approx(97.525)

    def test_default_rows_follow_table_layout(self, trial, tiny_cfg):
        rows = summarize(fit(trial, ModelSpec(), tiny_cfg))
        assert [r.name for r in rows] == default_parameters()
        assert default_parameters() == ["p_0", "p_1", "psi0_0", "psi0_1", "mu_c_0", "mu_c_1", "mu_e_0", "mu_e_1"]

    def test_frame(self):
        draws = PosteriorDraws(values=np.arange(1.0, 101.0).reshape(1, 100, 1), columns=["x"])
        frame = summary_frame(summarize(draws, ["x"]), model="gamma")
        assert list(frame.columns) == ["model", "parameter", "mean", "sd", "q025", "q975"]
