//! Backward solution of Thiele's equation for policy values, premium
//! solving under the equivalence principle, and the Lidstone
//! interest-equivalent basis for proportional surrender values.

use std::fmt;
use std::sync::Arc;

use crate::contracts::{Contract, PremiumForm, SurrenderRule};
use crate::error::{validation, Error, Result};
use crate::grid::Grid;
use crate::hazards::{Basis, LapseModel, MortalityModel};

/// Premium rate per year as a function of duration.
#[derive(Clone)]
pub enum PremiumSchedule {
    Level(f64),
    /// `mu_{x+t} * S`: the cost of cover when the policy value is zero.
    MortalityCost {
        mortality: MortalityModel,
        entry_age: f64,
        sum_insured: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl PremiumSchedule {
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            PremiumSchedule::Level(p) => *p,
            PremiumSchedule::MortalityCost {
                mortality,
                entry_age,
                sum_insured,
            } => mortality.rate(entry_age + t) * sum_insured,
            PremiumSchedule::Custom(f) => f(t),
        }
    }

    /// The same schedule multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PremiumSchedule {
        match self {
            PremiumSchedule::Level(p) => PremiumSchedule::Level(p * factor),
            PremiumSchedule::MortalityCost {
                mortality,
                entry_age,
                sum_insured,
            } => PremiumSchedule::MortalityCost {
                mortality: mortality.clone(),
                entry_age: *entry_age,
                sum_insured: sum_insured * factor,
            },
            PremiumSchedule::Custom(f) => {
                let f = Arc::clone(f);
                PremiumSchedule::Custom(Arc::new(move |t| factor * f(t)))
            }
        }
    }
}

impl fmt::Debug for PremiumSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PremiumSchedule::Level(p) => f.debug_tuple("Level").field(p).finish(),
            PremiumSchedule::MortalityCost { sum_insured, .. } => f
                .debug_struct("MortalityCost")
                .field("sum_insured", sum_insured)
                .finish_non_exhaustive(),
            PremiumSchedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    LevelNoLapseSupport,
    LevelLapseSupported,
    CurrentCost,
}

/// Premium and policy-value paths for one contract on one basis.
#[derive(Debug, Clone)]
pub struct PolicyFunctions {
    pub grid: Grid,
    pub premium: Vec<f64>,
    pub value: Vec<f64>,
    pub regime: Regime,
    pub schedule: PremiumSchedule,
    slope: Vec<f64>,
}

impl PolicyFunctions {
    /// Policy value between grid points by cubic Hermite interpolation on
    /// the solved values and their Thiele derivatives.
    pub fn value_at(&self, t: f64) -> f64 {
        let (i, w) = self.grid.locate(t);
        let h = self.grid.step();
        let (y0, y1) = (self.value[i], self.value[i + 1]);
        let (d0, d1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let w2 = w * w;
        let w3 = w2 * w;
        (2.0 * w3 - 3.0 * w2 + 1.0) * y0
            + (w3 - 2.0 * w2 + w) * d0
            + (-2.0 * w3 + 3.0 * w2) * y1
            + (w3 - w2) * d1
    }

    pub fn premium_at(&self, t: f64) -> f64 {
        self.schedule.rate(t)
    }

    /// Value at the end of the term: the maturity payment the premiums fund.
    pub fn terminal_value(&self) -> f64 {
        *self.value.last().expect("grid has at least two points")
    }

    /// Derivative of the policy value at each grid point.
    pub fn slopes(&self) -> &[f64] {
        &self.slope
    }
}

/// Right-hand side of Thiele's equation with `C(t) = k V(t)`.
struct Thiele<'a> {
    basis: &'a Basis,
    entry_age: f64,
    sum_insured: f64,
    retained: f64,
    premium: &'a PremiumSchedule,
}

impl Thiele<'_> {
    fn derivative(&self, t: f64, v: f64) -> f64 {
        let mu = self.basis.mu(self.entry_age, t);
        let nu = self.basis.nu(t);
        // -nu (kV - V) = (1 - k) nu V
        (self.basis.delta + self.retained * nu) * v + self.premium.rate(t) - mu * (self.sum_insured - v)
    }
}

fn integrate_backward(
    eq: &Thiele<'_>,
    grid: &Grid,
    terminal: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.steps();
    let h = grid.step();
    let mut value = vec![0.0; n + 1];
    value[n] = terminal;
    for i in (1..=n).rev() {
        let t = grid.time(i);
        let v = value[i];
        let k1 = eq.derivative(t, v);
        let k2 = eq.derivative(t - 0.5 * h, v - 0.5 * h * k1);
        let k3 = eq.derivative(t - 0.5 * h, v - 0.5 * h * k2);
        let k4 = eq.derivative(t - h, v - h * k3);
        let next = v - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(Error::NumericalBlowup {
                duration: grid.time(i - 1),
            });
        }
        value[i - 1] = next;
    }
    let slope = grid
        .times()
        .zip(&value)
        .map(|(t, &v)| eq.derivative(t, v))
        .collect();
    Ok((value, slope))
}

fn regime_for(schedule: &PremiumSchedule, basis: &Basis) -> Regime {
    match schedule {
        PremiumSchedule::MortalityCost { .. } => Regime::CurrentCost,
        _ if basis.lapse.constant_rate() == Some(0.0) => Regime::LevelNoLapseSupport,
        _ => Regime::LevelLapseSupported,
    }
}

fn solve_with_terminal(
    contract: &Contract,
    basis: &Basis,
    premium: &PremiumSchedule,
    grid: &Grid,
    terminal: f64,
) -> Result<PolicyFunctions> {
    grid.check_aligned(&Grid::new(contract.term, grid.step())?)?;
    let eq = Thiele {
        basis,
        entry_age: contract.entry_age,
        sum_insured: contract.sum_insured,
        retained: 1.0 - contract.surrender.proportion_paid(),
        premium,
    };
    let (value, slope) = integrate_backward(&eq, grid, terminal)?;
    Ok(PolicyFunctions {
        grid: *grid,
        premium: grid.sample(|t| premium.rate(t)),
        value,
        regime: regime_for(premium, basis),
        schedule: premium.clone(),
        slope,
    })
}

/// Policy values for a given premium schedule, integrating backward from
/// `V(n) = M` with classical RK4 on `grid`. Lapses pay the contract's
/// surrender value, which for proportional rules enters as extra interest.
pub fn solve_policy_value(
    contract: &Contract,
    basis: &Basis,
    premium: &PremiumSchedule,
    grid: &Grid,
) -> Result<PolicyFunctions> {
    solve_with_terminal(contract, basis, premium, grid, contract.maturity)
}

/// Level premium and policy values satisfying `V(0) = 0`, `V(n) = M`.
///
/// Thiele's equation is affine in the premium, so two solves (P = 0, P = 1)
/// determine the premium exactly; a third solve confirms it.
pub fn price_level(contract: &Contract, basis: &Basis, grid: &Grid) -> Result<PolicyFunctions> {
    if contract.premium_form != PremiumForm::Level {
        return Err(validation("level premium requested for a non-level contract"));
    }
    let v0 = solve_policy_value(contract, basis, &PremiumSchedule::Level(0.0), grid)?.value[0];
    let v1 = solve_policy_value(contract, basis, &PremiumSchedule::Level(1.0), grid)?.value[0];
    let exposure = v1 - v0;
    let scale = contract.sum_insured.max(contract.maturity).max(1.0);
    if !(exposure.abs() > 1e-14 * scale) {
        return Err(Error::ZeroExposure);
    }
    let premium = -v0 / exposure;
    let solved = solve_policy_value(contract, basis, &PremiumSchedule::Level(premium), grid)?;
    if solved.value[0].abs() > 1e-6 * scale {
        return Err(validation(format!(
            "equivalence check failed: V(0) = {} with premium {premium}",
            solved.value[0]
        )));
    }
    Ok(solved)
}

pub fn solve_level_premium(contract: &Contract, basis: &Basis, grid: &Grid) -> Result<f64> {
    price_level(contract, basis, grid).map(|pf| pf.premium[0])
}

/// Premiums equal to the mortality cost `mu_{x+t} S`, with zero surrender
/// values. The policy value is then identically zero and no maturity value
/// is funded.
pub fn current_cost_premium(contract: &Contract, basis: &Basis, grid: &Grid) -> Result<PolicyFunctions> {
    if contract.surrender != SurrenderRule::Zero {
        return Err(validation(
            "mortality-cost premiums require a zero surrender value",
        ));
    }
    let schedule = PremiumSchedule::MortalityCost {
        mortality: basis.mortality.clone(),
        entry_age: contract.entry_age,
        sum_insured: contract.sum_insured,
    };
    solve_with_terminal(contract, basis, &schedule, grid, 0.0)
}

/// Zero-lapse basis whose force of interest is raised by `(1 - k) nu`,
/// equivalent to lapsing at constant `nu` with surrender value `k V(t)`.
pub fn lidstone_equivalent_basis(basis: &Basis, k: f64) -> Result<Basis> {
    SurrenderRule::proportion(k)?;
    let nu = match basis.lapse {
        LapseModel::Zero | LapseModel::Constant(_) => basis.lapse.constant_rate().unwrap_or(0.0),
        _ => {
            return Err(Error::Unsupported(
                "interest equivalence needs a constant lapse model".into(),
            ))
        }
    };
    Basis::new(basis.delta + (1.0 - k) * nu, basis.mortality.clone(), LapseModel::Zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DEFAULT_STEP;
    use approx::assert_relative_eq;

    fn bare(delta: f64) -> Basis {
        Basis::new(delta, MortalityModel::zero(), LapseModel::Zero).unwrap()
    }

    fn pure_endowment() -> Contract {
        Contract::new(35.0, 10.0, 0.0, 100.0, SurrenderRule::Zero, PremiumForm::Level).unwrap()
    }

    fn grid(c: &Contract) -> Grid {
        Grid::new(c.term, DEFAULT_STEP).unwrap()
    }

    #[test]
    fn pure_maturity_without_interest_is_flat() {
        let c = pure_endowment();
        let pf = solve_policy_value(&c, &bare(0.0), &PremiumSchedule::Level(0.0), &grid(&c)).unwrap();
        assert!(pf.value.iter().all(|&v| (v - 100.0).abs() < 1e-12));
    }

    #[test]
    fn pure_discount_closed_form() {
        let c = pure_endowment();
        let pf = solve_policy_value(&c, &bare(0.05), &PremiumSchedule::Level(0.0), &grid(&c)).unwrap();
        assert_relative_eq!(pf.value[0], 100.0 * (-0.5f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(pf.value_at(3.3), 100.0 * (-0.05f64 * 6.7).exp(), max_relative = 1e-12);
    }

    #[test]
    fn level_premium_without_discounting() {
        let c = Contract::new(35.0, 10.0, 12_345.0, 100.0, SurrenderRule::Zero, PremiumForm::Level).unwrap();
        let p = solve_level_premium(&c, &bare(0.0), &grid(&c)).unwrap();
        assert_relative_eq!(p, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn level_premium_rejects_mortality_cost_form() {
        let c = pure_endowment().with_premium_form(PremiumForm::MortalityCost).unwrap();
        assert!(matches!(
            solve_level_premium(&c, &bare(0.03), &grid(&c)),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn blowup_is_reported_with_duration() {
        let c = pure_endowment();
        let huge = Basis::new(1e306, MortalityModel::zero(), LapseModel::Zero).unwrap();
        let err = solve_policy_value(&c, &huge, &PremiumSchedule::Level(1.0), &grid(&c)).unwrap_err();
        assert!(matches!(err, Error::NumericalBlowup { .. }));
    }

    #[test]
    fn current_cost_is_trivial() {
        let c = Contract::term_to(35.0, 100.0, 250_000.0, SurrenderRule::Zero).unwrap();
        let basis = Basis::new(0.05, MortalityModel::gm82_male(), LapseModel::constant(0.06).unwrap()).unwrap();
        let g = grid(&c);
        let pf = current_cost_premium(&c, &basis, &g).unwrap();
        assert_eq!(pf.regime, Regime::CurrentCost);
        assert!(pf.value.iter().all(|&v| v == 0.0));
        let mu35 = crate::hazards::mortality_hazard(&basis.mortality, 35.0).unwrap();
        assert_relative_eq!(pf.premium[0], mu35 * 250_000.0, max_relative = 1e-14);

        let high = basis.clone();
        let high = Basis {
            mortality: MortalityModel::scaled(high.mortality, 5.0).unwrap(),
            ..high
        };
        let pf5 = current_cost_premium(&c, &high, &g).unwrap();
        for (a, b) in pf5.premium.iter().zip(&pf.premium) {
            assert_relative_eq!(*a, 5.0 * b, max_relative = 1e-14);
        }

        let half = c.with_surrender(SurrenderRule::proportion(0.5).unwrap()).unwrap();
        assert!(current_cost_premium(&half, &basis, &g).is_err());
    }

    #[test]
    fn lidstone_examples() {
        let m = MortalityModel::gm82_male();
        let b = Basis::new(0.03, m.clone(), LapseModel::constant(0.06).unwrap()).unwrap();
        let e = lidstone_equivalent_basis(&b, 0.0).unwrap();
        assert_relative_eq!(e.delta, 0.09, max_relative = 1e-15);
        assert_eq!(e.lapse, LapseModel::Zero);

        let b = Basis::new(0.03, m.clone(), LapseModel::constant(0.03).unwrap()).unwrap();
        assert_relative_eq!(lidstone_equivalent_basis(&b, 0.5).unwrap().delta, 0.045, max_relative = 1e-15);
        assert_eq!(lidstone_equivalent_basis(&b, 1.0).unwrap().delta, 0.03);

        let scaled = b.with_lapse(LapseModel::scaled(LapseModel::Constant(0.03), 2.0).unwrap());
        assert!(matches!(lidstone_equivalent_basis(&scaled, 0.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn hermite_value_matches_finer_solve() {
        let c = Contract::term_to(35.0, 100.0, 1.0, SurrenderRule::Zero).unwrap();
        let b = Basis::new(0.03, MortalityModel::gm82_male(), LapseModel::Zero).unwrap();
        let coarse = price_level(&c, &b, &Grid::new(65.0, 0.25).unwrap()).unwrap();
        let fine = solve_policy_value(&c, &b, &coarse.schedule, &Grid::new(65.0, 0.125).unwrap()).unwrap();
        for i in (1..fine.value.len()).step_by(2) {
            let t = fine.grid.time(i);
            assert!((coarse.value_at(t) - fine.value[i]).abs() < 1e-7);
        }
    }
}
