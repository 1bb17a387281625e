//! Emerging surplus when experience departs from the valuation basis, the
//! identities that fund lapse-supported premium reductions, and the
//! maximum profit / maximum loss diagnostics.

use crate::contracts::{surrender_value, Contract, SurrenderRule};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hazards::{discount_path, Basis, LapseModel};
use crate::thiele::{price_level, PolicyFunctions};

/// Surplus emerging per policy in force, and its experience-basis EPV.
#[derive(Debug, Clone)]
pub struct SurplusPath {
    pub grid: Grid,
    pub rate: Vec<f64>,
    pub epv: f64,
}

fn check_len(grid: &Grid, values: &[f64], what: &str) -> Result<()> {
    if values.len() == grid.len() {
        Ok(())
    } else {
        Err(Error::Alignment(format!(
            "{what} has {} points, grid has {}",
            values.len(),
            grid.len()
        )))
    }
}

/// `int_0^n discount(t) values(t) dt` on the grid.
pub fn epv(grid: &Grid, discount: &[f64], values: &[f64]) -> f64 {
    let integrand: Vec<f64> = discount.iter().zip(values).map(|(d, v)| d * v).collect();
    grid.integrate(&integrand)
}

/// Surplus rate with explicit charged-premium and surrender-value paths:
///
/// `W = (P_charged - P_val) + (delta' - delta) V - (mu' - mu)(S - V) - (nu' - nu)(C - V)`.
pub fn surplus_rate_with(
    contract: &Contract,
    valuation: &PolicyFunctions,
    valuation_basis: &Basis,
    experience_basis: &Basis,
    charged: &[f64],
    surrender: &[f64],
) -> Result<SurplusPath> {
    let grid = valuation.grid;
    check_len(&grid, charged, "charged premium")?;
    check_len(&grid, surrender, "surrender values")?;
    grid.check_aligned(&Grid::new(contract.term, grid.step())?)?;
    let x = contract.entry_age;
    let s = contract.sum_insured;
    let d_delta = experience_basis.delta - valuation_basis.delta;
    let rate: Vec<f64> = grid
        .times()
        .enumerate()
        .map(|(i, t)| {
            let v = valuation.value[i];
            let d_mu = experience_basis.mu(x, t) - valuation_basis.mu(x, t);
            let d_nu = experience_basis.nu(t) - valuation_basis.nu(t);
            (charged[i] - valuation.premium[i]) + d_delta * v - d_mu * (s - v) - d_nu * (surrender[i] - v)
        })
        .collect();
    let discount = discount_path(experience_basis, x, &grid)?;
    let epv = epv(&grid, &discount, &rate);
    Ok(SurplusPath { grid, rate, epv })
}

/// Surplus when the valuation premium is charged and the surrender value is
/// `rule` applied to the valuation policy value.
pub fn surplus_rate(
    contract: &Contract,
    valuation: &PolicyFunctions,
    valuation_basis: &Basis,
    experience_basis: &Basis,
    surrender: SurrenderRule,
) -> Result<SurplusPath> {
    let paid: Vec<f64> = valuation
        .grid
        .times()
        .zip(&valuation.value)
        .map(|(t, &v)| surrender_value(surrender, t, v))
        .collect();
    surplus_rate_with(
        contract,
        valuation,
        valuation_basis,
        experience_basis,
        &valuation.premium,
        &paid,
    )
}

/// The terms of the premium-reduction identity
/// `EPV[P - P*] = EPV[rho (V - V*)] + EPV[nu (V* - C)]`, where the EPVs use
/// the discount function of `discount_basis` and `rho` is its force in
/// excess of the premium basis interest and mortality (the experienced
/// lapse rate when only lapses differ).
#[derive(Debug, Clone, Copy)]
pub struct PremiumReductionCheck {
    pub premium_reduction: f64,
    pub value_release: f64,
    pub lapse_cash: f64,
    pub residual: f64,
    /// `EPV[P - P*] - EPV[nu (V - C)]`, present when `rho = nu` throughout.
    pub corollary_residual: Option<f64>,
}

pub fn verify_premium_reduction_identity(
    contract: &Contract,
    no_lapse: &PolicyFunctions,
    lapse_supported: &PolicyFunctions,
    premium_basis: &Basis,
    discount_basis: &Basis,
) -> Result<PremiumReductionCheck> {
    let grid = lapse_supported.grid;
    grid.check_aligned(&no_lapse.grid)?;
    let x = contract.entry_age;
    let discount = discount_path(discount_basis, x, &grid)?;
    let rho = grid.sample(|t| {
        (discount_basis.delta - premium_basis.delta) + (discount_basis.mu(x, t) - premium_basis.mu(x, t))
            + discount_basis.nu(t)
    });
    let nu = grid.sample(|t| premium_basis.nu(t));
    let paid: Vec<f64> = grid
        .times()
        .zip(&lapse_supported.value)
        .map(|(t, &v)| surrender_value(contract.surrender, t, v))
        .collect();

    let n = grid.len();
    let reduction: Vec<f64> = (0..n).map(|i| no_lapse.premium[i] - lapse_supported.premium[i]).collect();
    let release: Vec<f64> = (0..n)
        .map(|i| rho[i] * (no_lapse.value[i] - lapse_supported.value[i]))
        .collect();
    let cash: Vec<f64> = (0..n).map(|i| nu[i] * (lapse_supported.value[i] - paid[i])).collect();

    let premium_reduction = epv(&grid, &discount, &reduction);
    let value_release = epv(&grid, &discount, &release);
    let lapse_cash = epv(&grid, &discount, &cash);

    let matched = rho.iter().zip(&nu).all(|(a, b)| (a - b).abs() <= 1e-15 * b.abs().max(1.0));
    let corollary_residual = matched.then(|| {
        let net: Vec<f64> = (0..n).map(|i| nu[i] * (no_lapse.value[i] - paid[i])).collect();
        premium_reduction - epv(&grid, &discount, &net)
    });

    Ok(PremiumReductionCheck {
        premium_reduction,
        value_release,
        lapse_cash,
        residual: premium_reduction - value_release - lapse_cash,
        corollary_residual,
    })
}

/// EPVs of the surplus emerging under the two valuation bases for a contract
/// charging the non-lapse-supported premium `P`: (i) the premium basis
/// without lapses, values `V`; (ii) a net premium valuation on the
/// lapse-supported basis, values `V*`. Surrender values are the contract
/// rule applied to `V*`, held fixed under both valuations.
pub fn verify_valuation_invariance(
    contract: &Contract,
    premium_basis: &Basis,
    experience_lapse: &LapseModel,
    grid: &Grid,
) -> Result<(f64, f64)> {
    let no_lapse_basis = premium_basis.without_lapses();
    let plain = price_level(contract, &no_lapse_basis, grid)?;
    let net = price_level(contract, premium_basis, grid)?;
    let paid: Vec<f64> = grid
        .times()
        .zip(&net.value)
        .map(|(t, &v)| surrender_value(contract.surrender, t, v))
        .collect();
    let experience = premium_basis.with_lapse(experience_lapse.clone());
    let w = surplus_rate_with(contract, &plain, &no_lapse_basis, &experience, &plain.premium, &paid)?;
    let w_star = surplus_rate_with(contract, &net, premium_basis, &experience, &plain.premium, &paid)?;
    Ok((w.epv, w_star.epv))
}

/// Maximum profit and maximum loss, in percent of the EPV of premiums.
///
/// Profit: the premium without lapse-support is charged and lapses occur at
/// the premium-basis rate. Loss: the lapse-supported premium (surrender
/// proportion `k`) is charged and nobody lapses. Both measure the lapse
/// surplus with no surrender value paid; a full surrender value (`k = 1`)
/// leaves no lapse surplus in either direction and returns `(0, 0)`.
pub fn max_profit_loss(contract: &Contract, premium_basis: &Basis, k: f64, grid: &Grid) -> Result<(f64, f64)> {
    let nu = premium_basis.lapse.constant_rate().ok_or_else(|| {
        Error::Unsupported("profit/loss diagnostics need a constant lapse rate".into())
    })?;
    if !(nu > 0.0) {
        return Err(Error::Domain {
            quantity: "premium-basis lapse rate",
            value: nu,
            domain: "(0, inf)",
        });
    }
    let rule = SurrenderRule::proportion(k)?;
    if k == 1.0 {
        return Ok((0.0, 0.0));
    }
    let zero = contract.with_surrender(SurrenderRule::Zero)?;
    let no_lapse_basis = premium_basis.without_lapses();
    let nil = vec![0.0; grid.len()];

    let plain = price_level(&zero, &no_lapse_basis, grid)?;
    let lapsing = premium_basis.clone();
    let profit = surplus_rate_with(&zero, &plain, &no_lapse_basis, &lapsing, &plain.premium, &nil)?;
    let premiums = epv(grid, &discount_path(&lapsing, contract.entry_age, grid)?, &plain.premium);

    let supported = price_level(&contract.with_surrender(rule)?, premium_basis, grid)?;
    let staying = no_lapse_basis;
    let loss = surplus_rate_with(&zero, &supported, premium_basis, &staying, &supported.premium, &nil)?;
    let supported_premiums = epv(grid, &discount_path(&staying, contract.entry_age, grid)?, &supported.premium);

    Ok((100.0 * profit.epv / premiums, 100.0 * loss.epv / supported_premiums))
}
