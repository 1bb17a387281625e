//! Uniform duration grid shared by the ODE solver, the hazard quadrature and
//! every expected-present-value integral.

use crate::error::{validation, Error, Result};

/// Default integration step: 1/240 of a year.
pub const DEFAULT_STEP: f64 = 1.0 / 240.0;

/// Durations `0 = t_0 < t_1 < ... < t_N = term` with uniform step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    step: f64,
    steps: usize,
}

impl Grid {
    /// Builds the grid covering `[0, term]`; `term` must be an integer
    /// multiple of `step` (to within 1e-9 of a step).
    pub fn new(term: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain {
                quantity: "step",
                value: step,
                domain: "(0, inf)",
            });
        }
        if !(term > 0.0 && term.is_finite()) {
            return Err(Error::Domain {
                quantity: "term",
                value: term,
                domain: "(0, inf)",
            });
        }
        let ratio = term / step;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(validation(format!(
                "term {term} is not a whole number of steps of {step}"
            )));
        }
        Ok(Self {
            step,
            steps: steps as usize,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of steps `N`; there are `N + 1` grid points.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn term(&self) -> f64 {
        self.steps as f64 * self.step
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |i| self.time(i))
    }

    /// Evaluates `f` at every grid point.
    pub fn sample(&self, f: impl FnMut(f64) -> f64) -> Vec<f64> {
        self.times().map(f).collect()
    }

    /// Trapezoidal rule over the whole grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        self.step * (inner + 0.5 * (values[0] + values[n - 1]))
    }

    /// Running trapezoidal integral, starting at 0 at `t_0`.
    pub fn cumulative(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.len());
        let mut out = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        out.push(acc);
        for w in values.windows(2) {
            acc += 0.5 * self.step * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Locates `t` as (segment index, fraction within segment), clamped to
    /// the grid.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let x = (t / self.step).clamp(0.0, self.steps as f64);
        let i = (x.floor() as usize).min(self.steps.saturating_sub(1));
        (i, x - i as f64)
    }

    /// Piecewise-linear interpolation of grid values.
    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        let (i, w) = self.locate(t);
        values[i] + w * (values[i + 1] - values[i])
    }

    pub(crate) fn check_aligned(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Alignment(format!(
                "grid with {} steps of {} vs {} steps of {}",
                self.steps, self.step, other.steps, other.step
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_fractional_term() {
        assert!(Grid::new(10.3, 0.25).is_err());
        assert!(Grid::new(10.0, 0.0).is_err());
        assert_eq!(Grid::new(65.0, DEFAULT_STEP).unwrap().steps(), 15_600);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let g = Grid::new(2.0, 0.1).unwrap();
        let v = g.sample(|t| 3.0 * t + 1.0);
        assert!((g.integrate(&v) - 8.0).abs() < 1e-12);
        let c = g.cumulative(&v);
        assert!((c[10] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn interpolation_hits_nodes_and_end() {
        let g = Grid::new(1.0, 0.25).unwrap();
        let v = [0.0, 1.0, 4.0, 9.0, 16.0];
        assert_eq!(g.interpolate(&v, 0.5), 4.0);
        assert_eq!(g.interpolate(&v, 1.0), 16.0);
        assert!((g.interpolate(&v, 0.125) - 0.5).abs() < 1e-15);
    }
}
