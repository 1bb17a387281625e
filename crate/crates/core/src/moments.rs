//! First and second moments of the present value of loss for a homogeneous
//! class, their combination over a partitioned portfolio, and a Monte Carlo
//! simulator of the in-force/dead/lapsed model used as an independent check.
//!
//! The loss is `PV(benefits paid) - PV(premiums received)`, so a positive
//! mean is a loss to the insurer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contracts::Contract;
use crate::error::{validation, Error, Result};
use crate::grid::Grid;
use crate::hazards::Basis;
use crate::thiele::PolicyFunctions;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossMoments {
    pub class_id: usize,
    pub m1: f64,
    pub m2: f64,
    pub variance: f64,
}

impl LossMoments {
    fn new(class_id: usize, m1: f64, m2: f64) -> Self {
        Self {
            class_id,
            m1,
            m2,
            variance: m2 - m1 * m1,
        }
    }

    pub fn sd(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

/// Cashflows a class member generates: the pricing basis fixes the premium
/// and the value that surrender payments are a proportion of.
struct Cashflows<'a> {
    contract: &'a Contract,
    pricing: &'a PolicyFunctions,
    class: &'a Basis,
}

impl Cashflows<'_> {
    fn premium(&self, t: f64) -> f64 {
        self.pricing.premium_at(t)
    }

    fn surrender(&self, t: f64) -> f64 {
        let k = self.contract.surrender.proportion_paid();
        if k == 0.0 {
            0.0
        } else {
            k * self.pricing.value_at(t)
        }
    }

    fn maturity(&self) -> f64 {
        self.pricing.terminal_value()
    }

    /// Derivatives of the first two conditional moments of the prospective
    /// loss of a policy in force at `t`.
    fn derivative(&self, t: f64, v: [f64; 2]) -> [f64; 2] {
        let mu = self.class.mu(self.contract.entry_age, t);
        let nu = self.class.nu(t);
        let delta = self.class.delta;
        let p = self.premium(t);
        let s = self.contract.sum_insured;
        let c = self.surrender(t);
        [
            (delta + mu + nu) * v[0] + p - mu * s - nu * c,
            (2.0 * delta + mu + nu) * v[1] + 2.0 * p * v[0] - mu * s * s - nu * c * c,
        ]
    }
}

/// Moments of the loss at issue, in currency, for a policy of `contract`
/// charged the premium of `pricing` while experiencing `class_basis`.
pub fn loss_moments(
    contract: &Contract,
    pricing: &PolicyFunctions,
    class_basis: &Basis,
    class_id: usize,
) -> Result<LossMoments> {
    let grid = pricing.grid;
    grid.check_aligned(&Grid::new(contract.term, grid.step())?)?;
    let flows = Cashflows {
        contract,
        pricing,
        class: class_basis,
    };
    let h = grid.step();
    let m = flows.maturity();
    let mut v = [m, m * m];
    let axpy = |a: [f64; 2], s: f64, b: [f64; 2]| [a[0] + s * b[0], a[1] + s * b[1]];
    for i in (1..=grid.steps()).rev() {
        let t = grid.time(i);
        let k1 = flows.derivative(t, v);
        let k2 = flows.derivative(t - 0.5 * h, axpy(v, -0.5 * h, k1));
        let k3 = flows.derivative(t - 0.5 * h, axpy(v, -0.5 * h, k2));
        let k4 = flows.derivative(t - h, axpy(v, -h, k3));
        for q in 0..2 {
            v[q] -= h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        }
        if !(v[0].is_finite() && v[1].is_finite()) {
            return Err(Error::NumericalBlowup {
                duration: grid.time(i - 1),
            });
        }
    }
    Ok(LossMoments::new(class_id, v[0], v[1]))
}

/// Loss moments per unit sum insured.
pub fn unit_loss_moments(
    contract: &Contract,
    pricing: &PolicyFunctions,
    class_basis: &Basis,
    class_id: usize,
) -> Result<LossMoments> {
    let s = contract.sum_insured;
    if !(s > 0.0) {
        return Err(validation("unit moments need a positive sum insured"));
    }
    let m = loss_moments(contract, pricing, class_basis, class_id)?;
    Ok(LossMoments::new(class_id, m.m1 / s, m.m2 / (s * s)))
}

/// One class of a partitioned portfolio.
#[derive(Debug, Clone, Copy)]
pub struct ClassShare {
    pub weight: f64,
    pub sum_insured: f64,
    pub unit: LossMoments,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureMoments {
    pub mean: f64,
    pub variance: f64,
    pub weights: Vec<f64>,
    pub sums_insured: Vec<f64>,
}

impl MixtureMoments {
    pub fn sd(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

/// Moments of the loss of a policy drawn at random from the portfolio.
pub fn mixture_variance(classes: &[ClassShare]) -> Result<MixtureMoments> {
    if classes.is_empty() {
        return Err(validation("mixture needs at least one class"));
    }
    if classes.iter().any(|c| !(c.weight >= 0.0)) {
        return Err(validation("mixture weights must be non-negative"));
    }
    let total: f64 = classes.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(validation(format!("mixture weights sum to {total}, not 1")));
    }
    let mean: f64 = classes.iter().map(|c| c.weight * c.sum_insured * c.unit.m1).sum();
    let second: f64 = classes
        .iter()
        .map(|c| c.weight * c.sum_insured * c.sum_insured * c.unit.m2)
        .sum();
    Ok(MixtureMoments {
        mean,
        variance: second - mean * mean,
        weights: classes.iter().map(|c| c.weight).collect(),
        sums_insured: classes.iter().map(|c| c.sum_insured).collect(),
    })
}

/// Streaming central moments up to order four, mergeable across blocks.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        let n1 = self.n;
        self.n += 1.0;
        let n = self.n;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term1;
    }

    fn merge(self, other: Accumulator) -> Accumulator {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let (na, nb) = (self.n, other.n);
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        let d3 = d2 * d;
        let d4 = d2 * d2;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3 + other.m3 + d3 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n;
        Accumulator {
            n,
            mean: self.mean + d * nb / n,
            m2,
            m3,
            m4,
        }
    }
}

/// Sample moments of simulated losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSummary {
    pub paths: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of `mean`.
    pub standard_error: f64,
    /// Large-sample standard error of the sample standard deviation.
    pub sd_standard_error: f64,
}

impl SimulationSummary {
    pub fn sd(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

/// Paths simulated per independently seeded block.
pub const SIMULATION_BLOCK: usize = 4096;

/// Simulates the loss of single policies. The exit time is drawn by
/// inverting the cumulative exit hazard (trapezoidal on the grid, so exact
/// within each step), and the exit is a death or a lapse in proportion to
/// the two hazards at that instant. Blocks of [`SIMULATION_BLOCK`] paths
/// run in parallel, each on its own ChaCha stream of `seed`.
pub fn simulate_policy(
    contract: &Contract,
    pricing: &PolicyFunctions,
    class_basis: &Basis,
    path_count: usize,
    seed: u64,
) -> Result<SimulationSummary> {
    if path_count == 0 {
        return Err(validation("path_count must be at least 1"));
    }
    let grid = pricing.grid;
    grid.check_aligned(&Grid::new(contract.term, grid.step())?)?;
    let flows = Cashflows {
        contract,
        pricing,
        class: class_basis,
    };
    let x = contract.entry_age;
    let delta = class_basis.delta;
    let exit_force = grid.sample(|t| class_basis.mu(x, t) + class_basis.nu(t));
    let cumulative = grid.cumulative(&exit_force);
    let discounted_premium = grid.sample(|t| (-delta * t).exp() * flows.premium(t));
    let premium_pv = grid.cumulative(&discounted_premium);
    let h = grid.step();
    let n = grid.steps();

    let simulate = |rng: &mut ChaCha8Rng| -> f64 {
        let target = -(1.0 - rng.gen::<f64>()).ln();
        if target >= cumulative[n] {
            return flows.maturity() * (-delta * grid.term()).exp() - premium_pv[n];
        }
        let i = cumulative.partition_point(|&c| c <= target) - 1;
        let (a, b) = (exit_force[i], exit_force[i + 1]);
        let r = target - cumulative[i];
        // a s + (b - a) s^2 / (2h) = r
        let slope = (b - a) / h;
        let s = (2.0 * r / (a + (a * a + 2.0 * slope * r).max(0.0).sqrt())).clamp(0.0, h);
        let t = grid.time(i) + s;
        let paid_premium = premium_pv[i] + 0.5 * s * (discounted_premium[i] + (-delta * t).exp() * flows.premium(t));
        let mu = class_basis.mu(x, t);
        let nu = class_basis.nu(t);
        let benefit = if rng.gen::<f64>() * (mu + nu) < mu {
            contract.sum_insured
        } else {
            flows.surrender(t)
        };
        benefit * (-delta * t).exp() - paid_premium
    };

    let blocks = path_count.div_ceil(SIMULATION_BLOCK);
    let partials: Vec<Accumulator> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            let count = SIMULATION_BLOCK.min(path_count - block * SIMULATION_BLOCK);
            let mut acc = Accumulator::default();
            for _ in 0..count {
                acc.push(simulate(&mut rng));
            }
            acc
        })
        .collect();
    let acc = partials.into_iter().fold(Accumulator::default(), Accumulator::merge);

    let count = acc.n;
    let pop_var = acc.m2 / count;
    let variance = if count > 1.0 { acc.m2 / (count - 1.0) } else { 0.0 };
    let kurt = acc.m4 / count;
    let sd_standard_error = if pop_var > 0.0 {
        ((kurt - pop_var * pop_var).max(0.0) / (4.0 * pop_var * count)).sqrt()
    } else {
        0.0
    };
    Ok(SimulationSummary {
        paths: path_count,
        mean: acc.mean,
        variance,
        standard_error: (variance / count).sqrt(),
        sd_standard_error,
    })
}
