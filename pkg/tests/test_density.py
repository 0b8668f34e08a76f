import numpy as np
import pytest
from scipy import stats
from scipy.special import digamma, expit, logit

from hurdlecea.core.data import TrialData
from hurdlecea.core.density import (
    arm_log_likelihood_terms,
    arm_log_prior,
    cauchy_logpdf,
    cost_log_density,
    log_likelihood,
    log_posterior,
    log_prior,
)
from hurdlecea.core.params import (
    ArmLayout,
    ArmParams,
    ParamState,
    derived_quantities,
    null_component,
    predict_zero_prob,
)
from hurdlecea.exceptions import DimensionMismatchError
from hurdlecea.schemas import CostFamily, EffectFamily, ModelSpec, NullLikelihoodMode


@pytest.fixture
def five_records() -> TrialData:
    return TrialData.from_arrays(
        arm=[0, 0, 0, 1, 1],
        eff=[0.7, 0.8, 0.65, 0.75, 0.9],
        cost=[0.0, 120.0, 260.0, 300.0, 0.0],
    )


def _state(beta0=-1.0, psi0=200.0, zeta0=80.0, xi=0.9, gamma=0.001, tau=15.0) -> ParamState:
    arm = ArmParams(beta=[beta0], psi0=psi0, zeta0=zeta0, xi=xi, gamma=gamma, tau=tau)
    return ParamState(arms=(arm, arm.copy()))


class TestElementaryDensities:
    def test_gamma_closed_form(self):
        value = cost_log_density(CostFamily.GAMMA, np.array([2.0]), 2.0, 1.0)
        assert value[0] == pytest.approx(np.log(2.0) - 2.0, rel=1e-12)

    @pytest.mark.parametrize("family", list(CostFamily))
    def test_matches_scipy(self, family):
        c = np.array([0.5, 10.0, 350.0])
        if family == CostFamily.GAMMA:
            a, b = 3.0, 0.02
            expected = stats.gamma.logpdf(c, a, scale=1.0 / b)
        elif family == CostFamily.LOGNORMAL:
            a, b = 4.0, 0.8
            expected = stats.lognorm.logpdf(c, s=b, scale=np.exp(a))
        else:
            a, b = 100.0, 60.0
            expected = stats.norm.logpdf(c, a, b)
        np.testing.assert_allclose(cost_log_density(family, c, a, b), expected, rtol=1e-10)

    def test_cauchy_at_zero(self):
        assert cauchy_logpdf(0.0, 2.5) == pytest.approx(np.log(1.0 / (np.pi * 2.5)), rel=1e-14)


class TestPrior:
    def test_outside_support(self):
        spec = ModelSpec()
        assert log_prior(_state(psi0=spec.H_psi + 1), spec) == -np.inf
        assert log_prior(_state(zeta0=0.0), spec) == -np.inf

    def test_sum_of_terms(self):
        spec = ModelSpec()
        arm = ArmParams(beta=[0.0], psi0=500.0, zeta0=150.0, xi=0.0, gamma=0.0, tau=1.0)
        expected = (
            stats.cauchy.logpdf(0.0, scale=2.5)
            + stats.uniform.logpdf(500.0, 0, 1000.0)
            + stats.uniform.logpdf(150.0, 0, 300.0)
            + 3 * stats.norm.logpdf(0.0, 0, 100.0)
        )
        assert arm_log_prior(arm, spec) == pytest.approx(expected, rel=1e-12)

    def test_normal_selection_prior_with_covariates(self):
        spec = ModelSpec()
        arm = ArmParams(beta=[0.0, 0.0], psi0=500.0, zeta0=150.0, xi=0.0, gamma=0.0, tau=1.0)
        without_selection = arm_log_prior(arm, spec) - 2 * stats.norm.logpdf(0.0, 0, 100.0)
        no_beta = arm_log_prior(ArmParams(beta=[0.0], psi0=500.0, zeta0=150.0, xi=0.0), spec)
        no_beta -= stats.cauchy.logpdf(0.0, scale=2.5)
        assert without_selection == pytest.approx(no_beta, rel=1e-12)

    def test_bernoulli_has_no_tau_term(self):
        spec = ModelSpec(effect_family=EffectFamily.BERNOULLI)
        arm = ArmParams(beta=[0.0], psi0=500.0, zeta0=150.0, xi=0.0, gamma=0.0, tau=-5.0)
        assert np.isfinite(arm_log_prior(arm, spec))


class TestLikelihood:
    def test_single_gamma_cost(self):
        data = TrialData.from_arrays(arm=[0, 1], eff=[0.5, 0.5], cost=[2.0, 2.0])
        arm = ArmParams(beta=[0.0], psi0=2.0, zeta0=np.sqrt(2.0), xi=0.0)
        terms = arm_log_likelihood_terms(arm, data.arms[0], ModelSpec())
        assert terms.cost_pos == pytest.approx(np.log(2.0) - 2.0, rel=1e-12)

    def test_saturated_selection(self):
        n = 50
        data = TrialData.from_arrays(arm=[0] * n + [1] * n, eff=[0.5] * 2 * n, cost=np.full(2 * n, 10.0))
        arm = ArmParams(beta=[-20.0], psi0=10.0, zeta0=2.0, xi=0.0)
        terms = arm_log_likelihood_terms(arm, data.arms[0], ModelSpec())
        assert terms.selection < 0
        assert abs(terms.selection) < 1e-6

    def test_total_is_sum_of_components(self, five_records):
        spec = ModelSpec()
        state = _state()
        null = null_component(spec)
        total = 0.0
        for t in (0, 1):
            a = five_records.arms[t]
            arm = state.arms[t]
            p = 1.0 / (1.0 + np.exp(-arm.beta[0]))
            selection = np.sum(np.where(a.d == 1, np.log(p), np.log1p(-p)))
            shape, rate = (arm.psi0 / arm.zeta0) ** 2, arm.psi0 / arm.zeta0 ** 2
            cost = np.sum(stats.gamma.logpdf(a.positive_cost, shape, scale=1.0 / rate))
            mu_c = (1 - p) * arm.psi0 + p * null.psi
            phi = 1.0 / (1.0 + np.exp(-(arm.xi + arm.gamma * (a.cost - mu_c))))
            effect = np.sum(stats.beta.logpdf(a.eff, phi * arm.tau, (1 - phi) * arm.tau))
            total += selection + cost + effect
        assert log_likelihood(state, five_records, spec) == pytest.approx(total, rel=1e-10)

    def test_point_mass_ignores_W(self, five_records):
        state = _state()
        values = {log_likelihood(state, five_records, ModelSpec(W=W)) for W in (10.0, 1e3, 1e5)}
        assert len(values) == 1

    def test_degenerate_density_rewards_larger_W(self, five_records):
        state = _state(gamma=0.0)
        values = [
            log_likelihood(state, five_records, ModelSpec(W=W, null_likelihood_mode=NullLikelihoodMode.DEGENERATE_DENSITY))
            for W in (10.0, 1e3, 1e5)
        ]
        assert values[0] < values[1] < values[2]

    @pytest.mark.parametrize("family", list(EffectFamily))
    def test_every_effect_family_is_finite(self, family):
        eff = {
            EffectFamily.BETA: [0.4, 0.6, 0.5, 0.7],
            EffectFamily.BERNOULLI: [0, 1, 1, 0],
            EffectFamily.GAMMA: [0.4, 1.6, 2.5, 0.7],
            EffectFamily.NORMAL: [-0.4, 1.6, 2.5, 0.7],
        }[family]
        data = TrialData.from_arrays(arm=[0, 0, 1, 1], eff=eff, cost=[0.0, 50.0, 70.0, 90.0], effect_family=family)
        spec = ModelSpec(effect_family=family)
        assert np.isfinite(log_likelihood(_state(xi=0.1, gamma=0.0, tau=2.0), data, spec))


class TestPosterior:
    def test_out_of_support(self, five_records):
        assert log_posterior(_state(psi0=-1.0), five_records, ModelSpec()) == -np.inf

    def test_prior_plus_likelihood(self, five_records):
        spec = ModelSpec()
        rng = np.random.default_rng(8)
        for _ in range(20):
            state = _state(
                beta0=rng.normal(-1, 1),
                psi0=rng.uniform(50, 900),
                zeta0=rng.uniform(10, 290),
                xi=rng.normal(1, 0.3),
                gamma=rng.normal(0, 1e-3),
                tau=rng.uniform(1, 40),
            )
            expected = log_prior(state, spec) + log_likelihood(state, five_records, spec)
            np.testing.assert_array_max_ulp(log_posterior(state, five_records, spec), expected, maxulp=2)

    def test_moving_psi0_toward_sample_mean(self, five_records):
        spec = ModelSpec()
        far = log_posterior(_state(psi0=900.0), five_records, spec)
        near = log_posterior(_state(psi0=226.0), five_records, spec)
        assert near >= far


class TestParams:
    def test_predict_zero_prob(self):
        assert predict_zero_prob([0.0], []) == 0.5
        assert predict_zero_prob([logit(0.039)], []) == pytest.approx(0.039, abs=1e-12)
        assert predict_zero_prob([0.0, 1.0], [-1.0]) == pytest.approx(0.26894, abs=1e-5)

    def test_predict_zero_prob_dimension(self):
        with pytest.raises(DimensionMismatchError):
            predict_zero_prob([0.0, 1.0], [1.0, 2.0])

    def test_null_component_modes(self):
        point = null_component(ModelSpec())
        assert point.point_mass and point.psi == 0.0
        dense = null_component(ModelSpec(null_likelihood_mode=NullLikelihoodMode.DEGENERATE_DENSITY))
        assert dense.psi == pytest.approx(1e-4)
        lognormal = null_component(ModelSpec(cost_family=CostFamily.LOGNORMAL,
                                             null_likelihood_mode=NullLikelihoodMode.DEGENERATE_DENSITY))
        assert (lognormal.eta, lognormal.lam) == (-50.0, 1.0)

    def test_derived_quantities(self, five_records):
        spec = ModelSpec()
        d0, _ = derived_quantities(_state(beta0=logit(0.039), psi0=226.958, xi=logit(0.71)), spec)
        assert d0.p == pytest.approx(0.039)
        assert d0.mu_c == pytest.approx(218.107, abs=5e-4)
        assert d0.mu_e == pytest.approx(0.71)

    def test_per_subject_quantities(self, five_records):
        d0, d1 = derived_quantities(_state(), ModelSpec(), five_records, per_subject=True)
        assert d0.pi.shape == (3,)
        assert d1.phi.shape == (2,)
        assert np.all((d0.phi > 0) & (d0.phi < 1))

    def test_layout_round_trip(self):
        spec = ModelSpec()
        layout = ArmLayout(2, spec)
        assert layout.names == ["beta0", "beta1", "beta2", "psi0", "zeta0", "xi", "gamma", "tau"]
        arm = ArmParams(beta=[0.3, -1.0, 2.0], psi0=250.0, zeta0=40.0, xi=0.8, gamma=1e-3, tau=12.0)
        back = layout.from_unconstrained(layout.to_unconstrained(arm))
        np.testing.assert_allclose(layout.pack(back), layout.pack(arm), rtol=1e-12)

    def test_bernoulli_layout_has_no_tau(self):
        layout = ArmLayout(0, ModelSpec(effect_family=EffectFamily.BERNOULLI))
        assert "tau" not in layout.names
        assert layout.size == 5


class TestInvariances:
    def test_record_order_within_arm(self, trial):
        spec = ModelSpec()
        frame = trial.to_frame()
        order = np.random.default_rng(3).permutation(len(frame))
        shuffled = TrialData.from_arrays(
            arm=frame["arm"].to_numpy()[order],
            eff=frame["eff"].to_numpy()[order],
            cost=frame["cost"].to_numpy()[order],
        )
        assert not np.array_equal(shuffled.arms[0].cost, trial.arms[0].cost)
        state = _state(beta0=-2.5, psi0=230.0, zeta0=140.0, gamma=0.002)
        assert log_likelihood(state, shuffled, spec) == pytest.approx(log_likelihood(state, trial, spec), rel=1e-12)


GRADIENT_NAMES = ("beta0", "psi0", "zeta0", "xi", "gamma", "tau")


def _shifted(arm: ArmParams, name: str, delta: float) -> ArmParams:
    arm = arm.copy()
    if name == "beta0":
        arm.beta[0] += delta
    else:
        setattr(arm, name, getattr(arm, name) + delta)
    return arm


def _closed_form_gradient(arm: ArmParams, a, spec: ModelSpec) -> np.ndarray:
    """Gradient of the arm's log prior plus log likelihood (Gamma costs, Beta effects, gamma = 0)."""
    beta0, psi, zeta, xi, tau = arm.beta[0], arm.psi0, arm.zeta0, arm.xi, arm.tau
    var = spec.effect_prior_sd ** 2

    p = expit(beta0)
    g_beta0 = (a.n_null - a.n * p) - 2.0 * beta0 / (spec.cauchy_scale ** 2 + beta0 ** 2)

    c = a.positive_cost
    shape, rate = (psi / zeta) ** 2, psi / zeta ** 2
    d_shape = c.size * np.log(rate) - c.size * digamma(shape) + np.sum(np.log(c))
    d_rate = c.size * shape / rate - np.sum(c)
    g_psi = d_shape * 2.0 * psi / zeta ** 2 + d_rate / zeta ** 2
    g_zeta = -d_shape * 2.0 * psi ** 2 / zeta ** 3 - d_rate * 2.0 * psi / zeta ** 3

    phi = expit(xi)
    alpha, beta = phi * tau, (1.0 - phi) * tau
    score = tau * (a.log_eff - a.log1m_eff - digamma(alpha) + digamma(beta))
    slope = phi * (1.0 - phi)
    mu_c = (1.0 - p) * psi
    g_xi = np.sum(score) * slope - xi / var
    g_gamma = np.sum(score * slope * (a.cost - mu_c)) - arm.gamma / var
    g_tau = np.sum(
        phi * a.log_eff + (1.0 - phi) * a.log1m_eff - phi * digamma(alpha) - (1.0 - phi) * digamma(beta) + digamma(tau)
    ) - np.log(tau) / (var * tau)
    return np.array([g_beta0, g_psi, g_zeta, g_xi, g_gamma, g_tau])


class TestGradient:
    def test_central_differences_match_closed_form(self, trial):
        spec = ModelSpec()
        rng = np.random.default_rng(14)
        other = ArmParams(beta=[-4.0], psi0=400.0, zeta0=200.0, xi=1.0, gamma=0.0, tau=20.0)

        def objective(arm):
            state = ParamState(arms=(arm, other))
            return log_prior(state, spec) + log_likelihood(state, trial, spec)

        for _ in range(10):
            arm = ArmParams(
                beta=[rng.normal(-2.5, 0.5)],
                psi0=rng.uniform(150.0, 350.0),
                zeta0=rng.uniform(80.0, 250.0),
                xi=rng.normal(0.9, 0.2),
                gamma=0.0,
                tau=rng.uniform(5.0, 30.0),
            )
            numeric = []
            for name in GRADIENT_NAMES:
                value = arm.beta[0] if name == "beta0" else getattr(arm, name)
                h = 1e-7 if name == "gamma" else 1e-5 * max(abs(value), 1.0)
                numeric.append((objective(_shifted(arm, name, h)) - objective(_shifted(arm, name, -h))) / (2 * h))
            np.testing.assert_allclose(numeric, _closed_form_gradient(arm, trial.arms[0], spec), rtol=1e-4, atol=1e-4)
