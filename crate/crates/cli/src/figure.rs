//! Entry-age sweep of adverse selection costs in long format.

use std::ops::RangeInclusive;

use lapse_core::advsel::{age_sweep, CaseId, ExperienceReading, SweepTemplate};
use lapse_core::MortalityModel;

use crate::format::{Cell, Column, Kind, Table};
use crate::tables::{BASE_DELTA, END_AGE, PI0, SUM_INSURED};
use crate::{CliError, Result};

pub const AGE_BOUNDS: RangeInclusive<u32> = 20..=90;
pub const DEFAULT_AGES: RangeInclusive<u32> = 25..=75;
pub const DEFAULT_LAPSES: [f64; 3] = [0.03, 0.06, 0.09];
pub const SWEEP_PHI: f64 = 5.0;
pub const SWEEP_THETA: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    pub ages: RangeInclusive<u32>,
    pub lapses: Vec<f64>,
    pub reading: ExperienceReading,
    pub step: f64,
}

impl FigureOptions {
    pub fn new(step: f64) -> Self {
        Self {
            ages: DEFAULT_AGES,
            lapses: DEFAULT_LAPSES.to_vec(),
            reading: ExperienceReading::default(),
            step,
        }
    }
}

/// Parses `A:B` into an inclusive age range inside [`AGE_BOUNDS`].
pub fn parse_ages(s: &str) -> Result<RangeInclusive<u32>> {
    let bad = || CliError::Usage(format!("--ages expects A:B with integer ages, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    let range = a..=b;
    check_ages(&range)?;
    Ok(range)
}

fn check_ages(range: &RangeInclusive<u32>) -> Result<()> {
    if range.is_empty() || !AGE_BOUNDS.contains(range.start()) || !AGE_BOUNDS.contains(range.end()) {
        return Err(CliError::Usage(format!(
            "ages {}:{} must form a non-empty range within {}:{}",
            range.start(),
            range.end(),
            AGE_BOUNDS.start(),
            AGE_BOUNDS.end()
        )));
    }
    Ok(())
}

pub fn parse_lapses(s: &str) -> Result<Vec<f64>> {
    let rates = s
        .split(',')
        .map(|r| {
            r.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x >= 0.0 && x.is_finite())
                .ok_or_else(|| CliError::Usage(format!("--lapse expects non-negative rates, got {r:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rates)
}

pub fn losses(options: &FigureOptions) -> Result<Table> {
    check_ages(&options.ages)?;
    if options.lapses.is_empty() {
        return Err(CliError::Usage("at least one valuation lapse rate is needed".into()));
    }
    let template = SweepTemplate {
        delta: BASE_DELTA,
        mortality: MortalityModel::gm82_male(),
        end_age: END_AGE,
        sum_insured: SUM_INSURED,
        phi: SWEEP_PHI,
        theta: SWEEP_THETA,
        pi0: PI0,
        step: options.step,
    };
    let ages: Vec<u32> = options.ages.clone().collect();
    let rows = age_sweep(&CaseId::ALL, &template, &ages, &options.lapses, options.reading)?;
    Ok(Table {
        columns: vec![
            Column::new("age", Kind::Key),
            Column::new("case", Kind::Label),
            Column::new("lapsing_mode", Kind::Label),
            Column::new("valuation_lapse", Kind::Key),
            Column::new("cost_pct", Kind::Percent),
        ],
        rows: rows
            .into_iter()
            .map(|r| {
                vec![
                    Cell::Number(r.age as f64),
                    Cell::Text(r.case.label().into()),
                    Cell::Text(r.mode.label().into()),
                    Cell::Number(r.valuation_lapse),
                    Cell::Number(r.cost_pct),
                ]
            })
            .collect(),
    })
}
