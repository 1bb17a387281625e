//! Mortality and lapse hazard models, valuation bases, and the
//! interest-and-survivorship discount factor built from them.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Highest age at which a hazard may be evaluated.
pub const MAX_AGE: f64 = 120.0;

/// Force of mortality as a function of attained age.
#[derive(Debug, Clone, PartialEq)]
pub enum MortalityModel {
    /// `alpha + beta * c^age`.
    Makeham { alpha: f64, beta: f64, c: f64 },
    /// `factor` times the hazard of `base`.
    Scaled {
        base: Box<MortalityModel>,
        factor: f64,
    },
}

impl MortalityModel {
    pub fn makeham(alpha: f64, beta: f64, c: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && c.is_finite()) || c <= 0.0 {
            return Err(Error::Validation(format!(
                "Makeham parameters must be finite with c > 0 (alpha={alpha}, beta={beta}, c={c})"
            )));
        }
        let model = MortalityModel::Makeham { alpha, beta, c };
        for age in [0.0, MAX_AGE] {
            let mu = model.rate(age);
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(Error::Validation(format!(
                    "Makeham hazard {mu} at age {age} is negative or not finite"
                )));
            }
        }
        Ok(model)
    }

    /// Danish G82 males: `5e-4 + 7.5858e-5 * 10^(0.038 x)`.
    pub fn gm82_male() -> Self {
        MortalityModel::Makeham {
            alpha: 5e-4,
            beta: 7.5858e-5,
            c: 10f64.powf(0.038),
        }
    }

    /// A mortality zero at every age.
    pub fn zero() -> Self {
        MortalityModel::Makeham {
            alpha: 0.0,
            beta: 0.0,
            c: 1.0,
        }
    }

    /// A constant force of mortality.
    pub fn constant(rate: f64) -> Result<Self> {
        Self::makeham(rate, 0.0, 1.0)
    }

    pub fn scaled(base: MortalityModel, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::Domain {
                quantity: "mortality factor",
                value: factor,
                domain: "[0, inf)",
            });
        }
        Ok(MortalityModel::Scaled {
            base: Box::new(base),
            factor,
        })
    }

    /// Hazard at `age`, unchecked.
    pub(crate) fn rate(&self, age: f64) -> f64 {
        match self {
            MortalityModel::Makeham { alpha, beta, c } => alpha + beta * c.powf(age),
            MortalityModel::Scaled { base, factor } => factor * base.rate(age),
        }
    }
}

/// Evaluates the force of mortality at `age` in `[0, 120]`.
pub fn mortality_hazard(model: &MortalityModel, age: f64) -> Result<f64> {
    if !(0.0..=MAX_AGE).contains(&age) {
        return Err(Error::Domain {
            quantity: "age",
            value: age,
            domain: "[0, 120]",
        });
    }
    Ok(model.rate(age))
}

/// Force of lapse as a function of policy duration.
#[derive(Debug, Clone, PartialEq)]
pub enum LapseModel {
    Zero,
    Constant(f64),
    Scaled { base: Box<LapseModel>, factor: f64 },
}

impl LapseModel {
    pub fn constant(rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::Domain {
                quantity: "lapse rate",
                value: rate,
                domain: "[0, inf)",
            });
        }
        Ok(LapseModel::Constant(rate))
    }

    pub fn scaled(base: LapseModel, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::Domain {
                quantity: "lapse factor",
                value: factor,
                domain: "[0, inf)",
            });
        }
        Ok(LapseModel::Scaled {
            base: Box::new(base),
            factor,
        })
    }

    pub fn rate(&self, _duration: f64) -> f64 {
        match self {
            LapseModel::Zero => 0.0,
            LapseModel::Constant(r) => *r,
            LapseModel::Scaled { base, factor } => factor * base.rate(_duration),
        }
    }

    /// The rate if the model does not vary with duration.
    pub fn constant_rate(&self) -> Option<f64> {
        match self {
            LapseModel::Zero => Some(0.0),
            LapseModel::Constant(r) => Some(*r),
            LapseModel::Scaled { base, factor } => base.constant_rate().map(|r| r * factor),
        }
    }
}

/// Interest, mortality and lapse assumptions.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub delta: f64,
    pub mortality: MortalityModel,
    pub lapse: LapseModel,
}

impl Basis {
    pub fn new(delta: f64, mortality: MortalityModel, lapse: LapseModel) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Domain {
                quantity: "force of interest",
                value: delta,
                domain: "[0, inf)",
            });
        }
        Ok(Self {
            delta,
            mortality,
            lapse,
        })
    }

    /// Same interest and mortality, different lapse model.
    pub fn with_lapse(&self, lapse: LapseModel) -> Self {
        Self {
            lapse,
            ..self.clone()
        }
    }

    pub fn without_lapses(&self) -> Self {
        self.with_lapse(LapseModel::Zero)
    }

    pub(crate) fn mu(&self, entry_age: f64, t: f64) -> f64 {
        self.mortality.rate(entry_age + t)
    }

    pub(crate) fn nu(&self, t: f64) -> f64 {
        self.lapse.rate(t)
    }

    /// `delta + mu + nu` at duration `t`.
    fn total_force(&self, entry_age: f64, t: f64) -> f64 {
        self.delta + self.mu(entry_age, t) + self.nu(t)
    }
}

fn check_ages(entry_age: f64, end: f64) -> Result<()> {
    if entry_age < 0.0 || entry_age + end > MAX_AGE {
        return Err(Error::Domain {
            quantity: "age",
            value: entry_age + end,
            domain: "[0, 120]",
        });
    }
    Ok(())
}

/// `int_0^t g(r) dr` where `g` is the piecewise-linear interpolant of `force`
/// through the nodes `k * step`. Additive across any split point.
fn integrate_on_grid(force: impl Fn(f64) -> f64, t: f64, step: f64) -> f64 {
    let full = (t / step).floor() as usize;
    let mut acc = 0.0;
    let mut prev = force(0.0);
    for k in 1..=full {
        let next = force(k as f64 * step);
        acc += 0.5 * step * (prev + next);
        prev = next;
    }
    let rem = t - full as f64 * step;
    if rem > 0.0 {
        let next = force((full + 1) as f64 * step);
        let at_t = prev + (next - prev) * rem / step;
        acc += 0.5 * rem * (prev + at_t);
    }
    acc
}

/// `exp(-int_0^t (delta + mu_{x+r} + nu_{x+r}) dr)`, integrated by the
/// trapezoid rule on a grid of width `step` anchored at duration 0.
pub fn survivorship_discount(basis: &Basis, entry_age: f64, t: f64, step: f64) -> Result<f64> {
    survivorship_between(basis, entry_age, 0.0, t, step)
}

/// Discount-and-survivorship factor from duration `s` to `t >= s`.
pub fn survivorship_between(
    basis: &Basis,
    entry_age: f64,
    s: f64,
    t: f64,
    step: f64,
) -> Result<f64> {
    if !(s >= 0.0) || !(t >= s) {
        return Err(Error::Domain {
            quantity: "duration",
            value: if s < 0.0 { s } else { t },
            domain: "0 <= s <= t",
        });
    }
    check_ages(entry_age, t)?;
    let force = |r: f64| basis.total_force(entry_age, r);
    let lambda = integrate_on_grid(force, t, step) - integrate_on_grid(force, s, step);
    Ok((-lambda).exp())
}

/// Survivorship discount at every grid point.
pub fn discount_path(basis: &Basis, entry_age: f64, grid: &Grid) -> Result<Vec<f64>> {
    check_ages(entry_age, grid.term())?;
    let force = grid.sample(|t| basis.total_force(entry_age, t));
    Ok(grid.cumulative(&force).into_iter().map(|l| (-l).exp()).collect())
}

/// Probability of still being in force (no death, no lapse) at every grid
/// point, with no interest.
pub fn in_force_path(basis: &Basis, entry_age: f64, grid: &Grid) -> Result<Vec<f64>> {
    check_ages(entry_age, grid.term())?;
    let force = grid.sample(|t| basis.mu(entry_age, t) + basis.nu(t));
    Ok(grid.cumulative(&force).into_iter().map(|l| (-l).exp()).collect())
}

/// Pure-interest discount `e^{-delta t}` at every grid point.
pub fn interest_path(delta: f64, grid: &Grid) -> Vec<f64> {
    grid.sample(|t| (-delta * t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DEFAULT_STEP;
    use approx::assert_relative_eq;

    fn flat(delta: f64, mu: f64, nu: f64) -> Basis {
        Basis::new(
            delta,
            MortalityModel::constant(mu).unwrap(),
            LapseModel::constant(nu).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn gm82_at_age_zero() {
        let m = MortalityModel::makeham(0.0005, 7.5858e-5, 10f64.powf(0.038)).unwrap();
        // alpha + beta
        assert_relative_eq!(mortality_hazard(&m, 0.0).unwrap(), 0.000_575_858, epsilon = 1e-15);
        assert_eq!(m, MortalityModel::gm82_male());
    }

    #[test]
    fn scaled_mortality() {
        let m = MortalityModel::gm82_male();
        let one = MortalityModel::scaled(m.clone(), 1.0).unwrap();
        let five = MortalityModel::scaled(m.clone(), 5.0).unwrap();
        for age in [0.0, 35.0, 72.5, 100.0] {
            let base = mortality_hazard(&m, age).unwrap();
            assert_eq!(mortality_hazard(&one, age).unwrap(), base);
            assert_relative_eq!(mortality_hazard(&five, age).unwrap(), 5.0 * base);
        }
        assert!(MortalityModel::scaled(m, -1.0).is_err());
    }

    #[test]
    fn hazard_age_domain() {
        let m = MortalityModel::gm82_male();
        assert!(mortality_hazard(&m, -0.1).is_err());
        assert!(mortality_hazard(&m, 120.1).is_err());
        assert!(mortality_hazard(&m, 120.0).is_ok());
    }

    #[test]
    fn lapse_models() {
        assert_eq!(LapseModel::Zero.rate(3.0), 0.0);
        let c = LapseModel::constant(0.06).unwrap();
        assert_eq!(c.rate(0.0), c.rate(50.0));
        let s = LapseModel::scaled(c, 0.5).unwrap();
        assert_eq!(s.constant_rate(), Some(0.03));
        assert!(LapseModel::constant(-0.01).is_err());
    }

    #[test]
    fn discount_examples() {
        let b = flat(0.05, 0.0, 0.0);
        assert_eq!(survivorship_discount(&b, 35.0, 0.0, DEFAULT_STEP).unwrap(), 1.0);
        assert_relative_eq!(
            survivorship_discount(&b, 35.0, 10.0, DEFAULT_STEP).unwrap(),
            (-0.5f64).exp(),
            max_relative = 1e-12
        );
        let b = flat(0.05, 0.01, 0.06);
        assert_relative_eq!(
            survivorship_discount(&b, 35.0, 10.0, DEFAULT_STEP).unwrap(),
            (-1.2f64).exp(),
            max_relative = 1e-12
        );
        assert!(survivorship_discount(&b, 35.0, -1.0, DEFAULT_STEP).is_err());
    }

    #[test]
    fn discount_factorises_into_interest_and_in_force() {
        let b = Basis::new(0.03, MortalityModel::gm82_male(), LapseModel::constant(0.06).unwrap()).unwrap();
        let g = Grid::new(65.0, DEFAULT_STEP).unwrap();
        let phi = discount_path(&b, 35.0, &g).unwrap();
        let p = in_force_path(&b, 35.0, &g).unwrap();
        let v = interest_path(0.03, &g);
        for i in (0..g.len()).step_by(997) {
            assert_relative_eq!(phi[i], v[i] * p[i], max_relative = 1e-12);
        }
        let direct = survivorship_discount(&b, 35.0, 40.0, DEFAULT_STEP).unwrap();
        assert_relative_eq!(direct, phi[9600], max_relative = 1e-12);
    }
}
