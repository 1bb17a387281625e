//! Single-scenario runs from a config file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lapse_core::advsel::{CaseId, Portfolio, ScenarioModel, ValuationBases};
use lapse_core::moments::simulate_policy;
use lapse_core::thiele::price_level;
use lapse_core::{Basis, Contract, Grid, LapseModel, MortalityModel, PremiumForm, SurrenderRule};

use crate::config::ScenarioConfig;
use crate::format::{fixed, Cell, Column, Kind, Provenance, Table};
use crate::Result;

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub case: CaseId,
    pub premium_no_lapse_support: f64,
    pub premium_lapse_supported: f64,
    /// Premium rate at issue under the configured regime.
    pub regime_premium: f64,
    pub epv_premiums: f64,
    pub epv_loss: f64,
    pub cost_pct: f64,
    pub sd_ratio: f64,
    /// Loss standard deviation over EPV of premiums from simulated paths.
    pub simulated_sd_ratio: Option<f64>,
    pub decomposition: Table,
    pub provenance: Provenance,
}

impl ScenarioReport {
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| writeln!(out, "{k:<26} {v}").unwrap();
        line("regime", self.case.label().into());
        line("premium_no_lapse_support", fixed(self.premium_no_lapse_support, 2));
        line("premium_lapse_supported", fixed(self.premium_lapse_supported, 2));
        line("regime_premium_at_issue", fixed(self.regime_premium, 2));
        line("epv_premiums", fixed(self.epv_premiums, 2));
        line("epv_adverse_selection", fixed(self.epv_loss, 2));
        line("cost_pct", fixed(self.cost_pct, 2));
        line("sd_over_epv_premiums", fixed(self.sd_ratio, 2));
        if let Some(sim) = self.simulated_sd_ratio {
            line("simulated_sd_over_epv", fixed(sim, 2));
        }
        out
    }

    pub fn csv(&self) -> Result<String> {
        self.decomposition.to_csv(&self.provenance)
    }
}

/// Where the per-duration CSV goes: `run.output_path`, or next to the
/// config file.
pub fn output_path(config: &ScenarioConfig, config_path: &Path) -> PathBuf {
    config
        .run
        .output_path
        .clone()
        .unwrap_or_else(|| config_path.with_extension("decomposition.csv"))
}

pub fn run(config: &ScenarioConfig) -> Result<ScenarioReport> {
    config.validate()?;
    let case = config.case()?;
    let c = &config.contract;
    let rule = match config.surrender_proportion() {
        k if k > 0.0 => SurrenderRule::proportion(k)?,
        _ => SurrenderRule::Zero,
    };
    let contract = Contract::new(
        c.entry_age,
        c.end_age - c.entry_age,
        c.sum_insured,
        config.maturity(),
        rule,
        PremiumForm::Level,
    )?;
    let grid = Grid::new(contract.term, config.run.step_h)?;
    let delta = config.pricing.delta;
    let nu = config.pricing.lapse_rate;
    let mortality = MortalityModel::gm82_male();
    let no_lapse = Basis::new(delta, mortality.clone(), LapseModel::Zero)?;
    let lapsing = Basis::new(delta, mortality.clone(), LapseModel::constant(nu)?)?;
    let premium_no_lapse_support = price_level(&contract, &no_lapse, &grid)?.premium[0];
    let premium_lapse_supported = price_level(&contract, &lapsing, &grid)?.premium[0];

    let e = &config.experience;
    let bases = ValuationBases::new(delta, mortality, nu)?;
    let mut portfolio = Portfolio::two_class(e.mortality_multiplier, e.sum_multiple, e.initial_proportion, config.mode())?;
    if config.normal_lapse() != nu {
        portfolio = portfolio.with_normal_lapse(config.normal_lapse())?;
    }
    let model = ScenarioModel::new(case, &portfolio, &bases, &contract, &grid)?;
    let result = model.evaluate()?;
    let sd_ratio = model.loss_sd_ratio()?;

    let simulated_sd_ratio = match config.run.paths {
        0 => None,
        paths => {
            let thetas = [portfolio.normal.sum_multiple, portfolio.high_risk.sum_multiple];
            let weights = [1.0 - portfolio.pi0(), portfolio.pi0()];
            let (mut mean, mut second) = (0.0, 0.0);
            for j in 0..2 {
                let seed = config.run.seed.wrapping_add(j as u64);
                let s = simulate_policy(&model.contract, &model.pricing, &model.class_bases[j], paths, seed)?;
                mean += weights[j] * thetas[j] * s.mean;
                second += weights[j] * thetas[j] * thetas[j] * (s.variance + s.mean * s.mean);
            }
            Some((second - mean * mean).max(0.0).sqrt() / result.epv_premiums)
        }
    };

    let decomposition = per_duration(&model, &result.pi_path, &result.decomposition, &grid);
    Ok(ScenarioReport {
        case,
        premium_no_lapse_support,
        premium_lapse_supported,
        regime_premium: result.pricing.premium[0],
        epv_premiums: result.epv_premiums,
        epv_loss: result.epv_loss,
        cost_pct: result.cost_pct,
        sd_ratio,
        simulated_sd_ratio,
        decomposition,
        provenance: Provenance {
            step: config.run.step_h,
            seed: Some(config.run.seed),
        },
    })
}

/// Rates of adverse selection surplus per in-force policy at each whole
/// policy year, and at expiry.
fn per_duration(
    model: &ScenarioModel,
    pi: &[f64],
    rates: &[lapse_core::advsel::LossRate],
    grid: &Grid,
) -> Table {
    let mortality: Vec<f64> = rates.iter().map(|r| r.mortality).collect();
    let lapse: Vec<f64> = rates.iter().map(|r| r.lapse).collect();
    let mut times: Vec<f64> = (0..).map(f64::from).take_while(|t| *t < grid.term()).collect();
    times.push(grid.term());
    let rows = times
        .into_iter()
        .map(|t| {
            let m = grid.interpolate(&mortality, t);
            let l = grid.interpolate(&lapse, t);
            vec![
                Cell::Number(t),
                Cell::Number(grid.interpolate(pi, t)),
                Cell::Number(model.pricing.value_at(t)),
                Cell::Number(model.pricing.premium_at(t)),
                Cell::Number(m),
                Cell::Number(l),
                Cell::Number(m + l),
            ]
        })
        .collect();
    Table {
        columns: vec![
            Column::new("t", Kind::Key),
            Column::new("pi", Kind::Coefficient),
            Column::new("policy_value", Kind::Currency),
            Column::new("premium", Kind::Currency),
            Column::new("mortality_rate", Kind::Currency),
            Column::new("lapse_rate", Kind::Currency),
            Column::new("total_rate", Kind::Currency),
        ],
        rows,
    }
}
