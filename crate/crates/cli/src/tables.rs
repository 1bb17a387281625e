//! Builders for the reference tables.

use lapse_core::advsel::{
    rate_coefficients, scenario_epv, sensitivity_run, CaseId, LapsingMode, Portfolio, ScenarioModel,
    ValuationBases,
};
use lapse_core::surplus::max_profit_loss;
use lapse_core::thiele::price_level;
use lapse_core::{Basis, Contract, Grid, LapseModel, MortalityModel, SurrenderRule};
use rayon::prelude::*;

use crate::format::{Cell, Column, Kind, Table};
use crate::{CliError, Result};

pub const TABLE_IDS: [u32; 5] = [1, 3, 4, 5, 6];

pub const ENTRY_AGE: f64 = 35.0;
pub const END_AGE: f64 = 100.0;
pub const SUM_INSURED: f64 = 250_000.0;
pub const BASE_DELTA: f64 = 0.05;
pub const BASE_LAPSE: f64 = 0.06;
pub const PI0: f64 = 0.001;
pub const PHIS: [f64; 3] = [1.0, 2.0, 5.0];
pub const THETAS: [f64; 3] = [1.0, 4.0, 10.0];
pub const STRESSED_LAPSES: [f64; 3] = [0.05, 0.06, 0.07];

pub fn baseline_contract() -> Result<Contract> {
    Ok(Contract::term_to(ENTRY_AGE, END_AGE, SUM_INSURED, SurrenderRule::Zero)?)
}

pub fn baseline_bases() -> Result<ValuationBases> {
    Ok(ValuationBases::new(BASE_DELTA, MortalityModel::gm82_male(), BASE_LAPSE)?)
}

/// Case and lapsing-mode column name, e.g. `case2_diff`.
pub fn cell_name(case: CaseId, mode: LapsingMode) -> String {
    format!("{}_{}", case.label(), mode.label())
}

pub fn build(id: u32, step: f64) -> Result<Table> {
    match id {
        1 => premiums(step),
        3 => costs(step),
        4 => loss_sd(step),
        5 => sensitivity(step),
        6 => rate_decomposition(),
        other => Err(CliError::Usage(format!(
            "unknown table id {other}; expected one of {TABLE_IDS:?}"
        ))),
    }
}

/// Premiums with and without lapse support, and the profit and loss they
/// imply at the extremes of lapse experience.
pub fn premiums(step: f64) -> Result<Table> {
    let columns = vec![
        Column::new("sv_pct", Kind::Key),
        Column::new("delta", Kind::Key),
        Column::new("lapse", Kind::Key),
        Column::new("premium_no_lapse_support", Kind::Currency),
        Column::new("premium_lapse_supported", Kind::Currency),
        Column::new("max_profit_pct", Kind::Percent),
        Column::new("max_loss_pct", Kind::Percent),
    ];
    let mut cells = Vec::new();
    for sv in [50.0, 0.0] {
        for delta in [0.03, 0.06, 0.09] {
            for nu in [0.03, 0.06] {
                cells.push((sv, delta, nu));
            }
        }
    }
    let contract = baseline_contract()?;
    let grid = Grid::new(contract.term, step)?;
    let rows = cells
        .par_iter()
        .map(|&(sv, delta, nu)| -> Result<Vec<Cell>> {
            let k = sv / 100.0;
            let c = contract.with_surrender(SurrenderRule::proportion(k)?)?;
            let basis = Basis::new(delta, MortalityModel::gm82_male(), LapseModel::constant(nu)?)?;
            let plain = price_level(&c, &basis.without_lapses(), &grid)?;
            let supported = price_level(&c, &basis, &grid)?;
            let (profit, loss) = max_profit_loss(&c, &basis, k, &grid)?;
            Ok(vec![
                Cell::Number(sv),
                Cell::Number(delta),
                Cell::Number(nu),
                Cell::Number(plain.premium[0]),
                Cell::Number(supported.premium[0]),
                Cell::Number(profit),
                Cell::Number(loss),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { columns, rows })
}

fn case_columns(cases: &[CaseId], kind: Kind) -> Vec<Column> {
    cases
        .iter()
        .flat_map(|&case| LapsingMode::ALL.map(|mode| Column::new(cell_name(case, mode), kind)))
        .collect()
}

/// One value per (case, mode) for every (phi, second key) row.
fn case_grid(
    keys: (&str, &str),
    seconds: &[f64],
    cases: &[CaseId],
    kind: Kind,
    value: impl Fn(CaseId, LapsingMode, f64, f64) -> Result<f64> + Sync,
) -> Result<Table> {
    let mut columns = vec![Column::new(keys.0, Kind::Key), Column::new(keys.1, Kind::Key)];
    columns.extend(case_columns(cases, kind));
    let row_keys: Vec<(f64, f64)> = PHIS.iter().flat_map(|&p| seconds.iter().map(move |&s| (p, s))).collect();
    let rows = row_keys
        .par_iter()
        .map(|&(phi, second)| -> Result<Vec<Cell>> {
            let mut row = vec![Cell::Number(phi), Cell::Number(second)];
            for &case in cases {
                for mode in LapsingMode::ALL {
                    row.push(Cell::Number(value(case, mode, phi, second)?));
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { columns, rows })
}

/// Adverse selection cost in percent of EPV of premiums by mortality and
/// sum-insured multiples.
pub fn costs(step: f64) -> Result<Table> {
    let contract = baseline_contract()?;
    let bases = baseline_bases()?;
    let grid = Grid::new(contract.term, step)?;
    case_grid(("phi", "theta"), &THETAS, &CaseId::ALL, Kind::Percent, |case, mode, phi, theta| {
        let p = Portfolio::two_class(phi, theta, PI0, mode)?;
        Ok(scenario_epv(case, &p, &bases, &contract, &grid)?.cost_pct)
    })
}

/// Standard deviation of the loss as a proportion of EPV of premiums.
pub fn loss_sd(step: f64) -> Result<Table> {
    let contract = baseline_contract()?;
    let bases = baseline_bases()?;
    let grid = Grid::new(contract.term, step)?;
    case_grid(("phi", "theta"), &THETAS, &CaseId::ALL, Kind::Ratio, |case, mode, phi, theta| {
        let p = Portfolio::two_class(phi, theta, PI0, mode)?;
        Ok(ScenarioModel::new(case, &p, &bases, &contract, &grid)?.loss_sd_ratio()?)
    })
}

/// Adverse selection cost when the normal class lapses at a rate other
/// than the valuation rate.
pub fn sensitivity(step: f64) -> Result<Table> {
    let contract = baseline_contract()?;
    let bases = baseline_bases()?;
    let grid = Grid::new(contract.term, step)?;
    let cases = [CaseId::Case1Value, CaseId::Case2, CaseId::Case3];
    case_grid(("phi", "nu_tilde"), &STRESSED_LAPSES, &cases, Kind::Percent, |case, mode, phi, nu| {
        let p = Portfolio::two_class(phi, 1.0, PI0, mode)?;
        Ok(sensitivity_run(case, &p, &bases, &contract, &grid, nu)?.cost_pct)
    })
}

/// Normal-class experience lapse rate of the rate-decomposition table.
pub const DECOMPOSITION_LAPSE: f64 = 0.05;
pub const DECOMPOSITION_PHI: f64 = 5.0;
pub const DECOMPOSITION_THETA: f64 = 10.0;

/// Per-policy loss-rate coefficients with the high-risk share pinned at
/// its initial value.
pub fn rate_decomposition() -> Result<Table> {
    rate_decomposition_at(DECOMPOSITION_LAPSE)
}

pub fn rate_decomposition_at(experience_lapse: f64) -> Result<Table> {
    let bases = baseline_bases()?;
    let columns = vec![
        Column::new("case", Kind::Label),
        Column::new("surrender_value", Kind::Label),
        Column::new("lapsing", Kind::Label),
        Column::new("mortality_coefficient", Kind::Coefficient),
        Column::new("mortality_factor", Kind::Label),
        Column::new("lapse_coefficient", Kind::Coefficient),
        Column::new("lapse_factor", Kind::Label),
    ];
    let mut rows = Vec::new();
    for case in CaseId::ALL {
        for mode in LapsingMode::ALL {
            let p = Portfolio::two_class(DECOMPOSITION_PHI, DECOMPOSITION_THETA, PI0, mode)?
                .with_normal_lapse(experience_lapse)?;
            let c = rate_coefficients(case, &p, &bases, SurrenderRule::Zero, PI0);
            let (surrender, mortality_factor, lapse_factor) = match case {
                CaseId::Case1Zero => ("0", "mu*(S-V)", "V"),
                CaseId::Case1Value => ("V", "mu*(S-V)", "V"),
                CaseId::Case2 => ("0", "mu*(S-V*)", "V*"),
                CaseId::Case3 => ("0", "mu*S", "V"),
            };
            rows.push(vec![
                Cell::Text(case.label().into()),
                Cell::Text(surrender.into()),
                Cell::Text(mode.label().into()),
                Cell::Number(c.mortality),
                Cell::Text(mortality_factor.into()),
                Cell::Number(c.lapse),
                Cell::Text(lapse_factor.into()),
            ]);
        }
    }
    Ok(Table { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::fixed;

    #[test]
    fn unknown_ids_are_usage_errors() {
        for id in [0, 2, 7] {
            let err = build(id, 1.0 / 12.0).unwrap_err();
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn decomposition_coefficients() {
        let t = rate_decomposition().unwrap();
        assert_eq!(t.rows.len(), 8);
        let lapse: Vec<String> = (0..8).map(|r| fixed(t.number(r, "lapse_coefficient").unwrap(), 5)).collect();
        assert_eq!(
            lapse,
            ["0.05045", "0.04995", "0.00000", "0.00000", "-0.01009", "-0.01059", "0.00000", "0.00000"]
        );
        let base = rate_decomposition_at(BASE_LAPSE).unwrap();
        let lapse: Vec<String> = (0..8).map(|r| fixed(base.number(r, "lapse_coefficient").unwrap(), 5)).collect();
        assert_eq!(
            lapse,
            ["0.06054", "0.05994", "0.00000", "0.00000", "0.00000", "-0.00060", "0.00000", "0.00000"]
        );
        assert!((0..8).all(|r| fixed(t.number(r, "mortality_coefficient").unwrap(), 5) == "-0.04000"));
    }

    #[test]
    fn premium_table_shape() {
        let t = premiums(1.0 / 12.0).unwrap();
        assert_eq!((t.rows.len(), t.columns.len()), (12, 7));
    }
}
