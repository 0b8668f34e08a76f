"""
Text renderings of fitted models: the posterior summary table and the model card.
"""
from typing import Dict, List, Optional

import pandas as pd

from hurdlecea.core.data import TrialData
from hurdlecea.core.params import null_component
from hurdlecea.diagnostics import DicResult, SummaryRow, summary_frame
from hurdlecea.posterior import PosteriorDraws
from hurdlecea.schemas import CostFamily, EffectFamily, NullLikelihoodMode, SelectionPrior

FAMILY_TITLES = {
    CostFamily.GAMMA.value: "Gamma",
    CostFamily.LOGNORMAL.value: "log-Normal",
    CostFamily.NORMAL.value: "Normal",
}

NULL_PARAMETERS = {
    CostFamily.GAMMA: "shape eta_t1 = w = {w:g}, rate lambda_t1 = W = {W:g}",
    CostFamily.LOGNORMAL: "log-mean eta_t1 = -W = {negW:g}, log-sd lambda_t1 = w = {w:g}",
    CostFamily.NORMAL: "mean 0, sd w/W = {ratio:g}",
}

EFFECT_DENSITIES = {
    EffectFamily.BETA: "Beta(phi * tau, (1 - phi) * tau)",
    EffectFamily.BERNOULLI: "Bernoulli(phi)",
    EffectFamily.GAMMA: "Gamma(shape tau, rate tau / phi)",
    EffectFamily.NORMAL: "Normal(mean phi, precision tau)",
}


def summary_table(summaries: Dict[str, List[SummaryRow]]) -> pd.DataFrame:
    """Long-format summary with one block of rows per model."""
    return pd.concat([summary_frame(rows, model=label) for label, rows in summaries.items()], ignore_index=True)


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def summary_markdown(summaries: Dict[str, List[SummaryRow]], dics: Optional[Dict[str, DicResult]] = None) -> str:
    """Posterior summaries with Mean, SD and 95% interval columns for each model side by side."""
    labels = list(summaries)
    header = ["Parameter"]
    for label in labels:
        title = FAMILY_TITLES.get(label, label)
        header += [f"{title} mean", f"{title} SD", f"{title} 95% interval"]
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join(["---"] + ["---:"] * (len(header) - 1)) + "|",
    ]
    names = [row.name for row in summaries[labels[0]]]
    by_model = {label: {row.name: row for row in rows} for label, rows in summaries.items()}
    for name in names:
        cells = [name]
        for label in labels:
            row = by_model[label].get(name)
            if row is None:
                cells += ["", "", ""]
            else:
                cells += [_fmt(row.mean), _fmt(row.sd), f"({_fmt(row.q025)}; {_fmt(row.q975)})"]
        lines.append("| " + " | ".join(cells) + " |")

    if dics:
        dic_cells = ["DIC"]
        for label in labels:
            result = dics.get(label)
            dic_cells += [_fmt(result.DIC) if result else "", "", ""]
        lines.append("| " + " | ".join(dic_cells) + " |")
    return "\n".join(lines) + "\n"


def model_card(draws: PosteriorDraws, data: Optional[TrialData] = None, result: Optional[DicResult] = None) -> str:
    """Human-readable restatement of a fitted model, its priors, fixed parameters and provenance."""
    spec = draws.spec
    cfg = draws.config
    J = draws.n_covariates
    null = null_component(spec)
    selection = spec.resolved_selection_prior(J)
    if selection == SelectionPrior.CAUCHY:
        selection_text = f"Cauchy(0, {spec.cauchy_scale:g})"
    else:
        selection_text = f"Normal(0, sd {spec.selection_prior_sd:g})"

    null_text = NULL_PARAMETERS[spec.cost_family].format(
        w=spec.w, W=spec.W, negW=-spec.W, ratio=spec.w / spec.W
    )
    if spec.null_likelihood_mode == NullLikelihoodMode.POINT_MASS:
        null_text += "; treated as a point mass at zero (psi_t1 = 0)"
    else:
        null_text += f"; density evaluated at max(c, 1e-8), psi_t1 = {null.psi:.6g}, zeta_t1 = {null.zeta:.6g}"

    lines = [
        "Hurdle model for cost-effectiveness data with structural zero costs",
        "=" * 68,
        "",
        "Selection model",
        f"  d_it ~ Bernoulli(pi_it), logit(pi_it) = beta_0t + sum_j beta_jt * z_ijt  (J = {J})",
        f"  beta_jt ~ {selection_text}",
        "",
        "Cost model",
        f"  c_it | d_it = 0 ~ {FAMILY_TITLES[spec.cost_family.value]} with mean psi_t0 and sd zeta_t0",
        f"  psi_t0 ~ Uniform(0, {spec.H_psi:g}), zeta_t0 ~ Uniform(0, {spec.H_zeta:g})",
        f"  c_it | d_it = 1: fixed null component, {null_text}",
        "  mu_ct = (1 - p_t) * psi_t0 + p_t * psi_t1, p_t = logit^-1(beta_0t)",
        "",
        "Effectiveness model",
        f"  e_it | c_it ~ {EFFECT_DENSITIES[spec.effect_family]}",
        f"  {spec.link.value}(phi_it) = xi_t + gamma_t * (c_it - mu_ct), mu_et = {spec.link.value}^-1(xi_t)",
        f"  xi_t, gamma_t ~ Normal(0, sd {spec.effect_prior_sd:g})",
    ]
    if spec.has_dispersion:
        lines.append(f"  log(tau_t) ~ Normal(0, sd {spec.effect_prior_sd:g})")
    lines += [
        "",
        "MCMC",
        f"  {cfg.n_chains} chains, {cfg.n_iter} iterations, burn-in {cfg.n_burnin}, thin {cfg.thin}",
        f"  adaptive single-site random-walk Metropolis, target acceptance {cfg.target_accept:g}, "
        f"window {cfg.adapt_window}",
        f"  seed {cfg.seed}",
        f"  configuration digest {draws.digest}",
    ]
    if data is not None:
        lines += ["", "Data"]
        for a in data.arms:
            lines.append(f"  arm {a.arm}: n = {a.n}, positive costs = {a.n_pos}, null costs = {a.n_null}")
        if data.covariate_names:
            lines.append(f"  covariates (centred per arm): {', '.join(data.covariate_names)}")
    if result is not None:
        lines += [
            "",
            "Model fit",
            f"  Dbar = {result.Dbar:.4f}, Dhat = {result.Dhat:.4f}, pD = {result.pD:.4f}, DIC = {result.DIC:.4f}",
        ]
    return "\n".join(lines) + "\n"
