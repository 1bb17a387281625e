//! Two-subpopulation adverse selection: a small high-risk class is charged
//! the normal premium, may buy larger sums insured and may lapse less. This
//! module computes the attrition of the high-risk share, per-policy rates of
//! loss split into mortality and lapse parts, the EPV cost measure and the
//! standard deviation of loss, for the three ways of handling lapse surplus.

use rayon::prelude::*;

use crate::contracts::{Contract, PremiumForm, SurrenderRule};
use crate::error::{validation, Result};
use crate::grid::Grid;
use crate::hazards::{in_force_path, interest_path, survivorship_discount, Basis, LapseModel, MortalityModel};
use crate::moments::{mixture_variance, unit_loss_moments, ClassShare};
use crate::surplus::{epv, surplus_rate_with};
use crate::thiele::{current_cost_premium, price_level, PolicyFunctions, Regime};

/// How lapse surplus is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    /// Level premium without lapse support, no surrender value.
    Case1Zero,
    /// Level premium without lapse support, surrender value equal to the
    /// policy value.
    Case1Value,
    /// Level premium with lapse support.
    Case2,
    /// Premium equal to the mortality cost.
    Case3,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::Case1Zero, CaseId::Case1Value, CaseId::Case2, CaseId::Case3];

    pub fn label(self) -> &'static str {
        match self {
            CaseId::Case1Zero => "case1_C0",
            CaseId::Case1Value => "case1_CV",
            CaseId::Case2 => "case2",
            CaseId::Case3 => "case3",
        }
    }

    pub fn parse(s: &str) -> Option<CaseId> {
        CaseId::ALL.into_iter().find(|c| c.label() == s)
    }

    pub fn regime(self) -> Regime {
        match self {
            CaseId::Case1Zero | CaseId::Case1Value => Regime::LevelNoLapseSupport,
            CaseId::Case2 => Regime::LevelLapseSupported,
            CaseId::Case3 => Regime::CurrentCost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subpopulation {
    Normal = 1,
    HighRisk = 2,
}

/// Experienced lapse behaviour of a class.
///
/// For the normal class, `Uniform` means lapsing at the valuation rate; for
/// the high-risk class it means lapsing at the normal class's experienced
/// rate. `Differential` means no lapses at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LapseBehavior {
    Uniform,
    Differential,
    Stressed(f64),
}

/// Lapsing of the high-risk class relative to the normal class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LapsingMode {
    Uniform,
    Differential,
}

impl LapsingMode {
    pub const ALL: [LapsingMode; 2] = [LapsingMode::Uniform, LapsingMode::Differential];

    pub fn label(self) -> &'static str {
        match self {
            LapsingMode::Uniform => "unif",
            LapsingMode::Differential => "diff",
        }
    }

    pub fn behavior(self) -> LapseBehavior {
        match self {
            LapsingMode::Uniform => LapseBehavior::Uniform,
            LapsingMode::Differential => LapseBehavior::Differential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubpopulationSpec {
    pub id: Subpopulation,
    pub mortality_multiplier: f64,
    pub lapse_behavior: LapseBehavior,
    pub sum_multiple: f64,
    pub initial_proportion: f64,
}

/// The normal and high-risk classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Portfolio {
    pub normal: SubpopulationSpec,
    pub high_risk: SubpopulationSpec,
}

impl Portfolio {
    pub fn new(normal: SubpopulationSpec, high_risk: SubpopulationSpec) -> Result<Self> {
        for spec in [&normal, &high_risk] {
            if !(spec.mortality_multiplier >= 1.0 && spec.mortality_multiplier.is_finite()) {
                return Err(validation(format!(
                    "mortality multiplier must be >= 1, got {}",
                    spec.mortality_multiplier
                )));
            }
            if !(spec.sum_multiple >= 1.0 && spec.sum_multiple.is_finite()) {
                return Err(validation(format!("sum multiple must be >= 1, got {}", spec.sum_multiple)));
            }
            if let LapseBehavior::Stressed(r) = spec.lapse_behavior {
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(validation(format!("stressed lapse rate must be >= 0, got {r}")));
                }
            }
        }
        if !(0.0..=1.0).contains(&high_risk.initial_proportion) {
            return Err(validation(format!(
                "initial high-risk proportion must lie in [0, 1], got {}",
                high_risk.initial_proportion
            )));
        }
        if normal.id != Subpopulation::Normal || high_risk.id != Subpopulation::HighRisk {
            return Err(validation("portfolio classes are (normal, high_risk)"));
        }
        Ok(Self { normal, high_risk })
    }

    /// Normal class at standard mortality, sum insured and lapse rate; a
    /// high-risk class with mortality `phi` times normal, sum insured `theta`
    /// times normal and initial share `pi0`.
    pub fn two_class(phi: f64, theta: f64, pi0: f64, mode: LapsingMode) -> Result<Self> {
        Self::new(
            SubpopulationSpec {
                id: Subpopulation::Normal,
                mortality_multiplier: 1.0,
                lapse_behavior: LapseBehavior::Uniform,
                sum_multiple: 1.0,
                initial_proportion: 1.0 - pi0,
            },
            SubpopulationSpec {
                id: Subpopulation::HighRisk,
                mortality_multiplier: phi,
                lapse_behavior: mode.behavior(),
                sum_multiple: theta,
                initial_proportion: pi0,
            },
        )
    }

    /// The same portfolio with the normal class lapsing at `rate`.
    pub fn with_normal_lapse(&self, rate: f64) -> Result<Self> {
        let mut normal = self.normal;
        normal.lapse_behavior = LapseBehavior::Stressed(rate);
        Self::new(normal, self.high_risk)
    }

    pub fn pi0(&self) -> f64 {
        self.high_risk.initial_proportion
    }
}

/// Premium and valuation assumptions: constant force of interest, standard
/// (normal-class) mortality and the lapse rate anticipated in lapse-supported
/// premiums.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationBases {
    pub delta: f64,
    pub mortality: MortalityModel,
    pub lapse: f64,
}

impl ValuationBases {
    pub fn new(delta: f64, mortality: MortalityModel, lapse: f64) -> Result<Self> {
        Basis::new(delta, mortality.clone(), LapseModel::constant(lapse)?)?;
        Ok(Self { delta, mortality, lapse })
    }

    /// Lapse rate assumed by the valuation basis of `case`.
    pub fn valuation_lapse(&self, case: CaseId) -> f64 {
        match case {
            CaseId::Case2 => self.lapse,
            _ => 0.0,
        }
    }

    pub fn valuation_basis(&self, case: CaseId) -> Basis {
        Basis {
            delta: self.delta,
            mortality: self.mortality.clone(),
            lapse: match case {
                CaseId::Case2 => LapseModel::Constant(self.lapse),
                _ => LapseModel::Zero,
            },
        }
    }

    /// Experienced lapse rate of the normal class.
    pub fn normal_lapse(&self, portfolio: &Portfolio) -> f64 {
        match portfolio.normal.lapse_behavior {
            LapseBehavior::Uniform => self.lapse,
            LapseBehavior::Differential => 0.0,
            LapseBehavior::Stressed(r) => r,
        }
    }

    /// Experienced lapse rate of the high-risk class.
    pub fn high_risk_lapse(&self, portfolio: &Portfolio) -> f64 {
        match portfolio.high_risk.lapse_behavior {
            LapseBehavior::Uniform => self.normal_lapse(portfolio),
            LapseBehavior::Differential => 0.0,
            LapseBehavior::Stressed(r) => r,
        }
    }

    /// Experience basis of one class.
    pub fn class_basis(&self, portfolio: &Portfolio, class: Subpopulation) -> Result<Basis> {
        let (spec, nu) = match class {
            Subpopulation::Normal => (&portfolio.normal, self.normal_lapse(portfolio)),
            Subpopulation::HighRisk => (&portfolio.high_risk, self.high_risk_lapse(portfolio)),
        };
        let mortality = if spec.mortality_multiplier == 1.0 {
            self.mortality.clone()
        } else {
            MortalityModel::scaled(self.mortality.clone(), spec.mortality_multiplier)?
        };
        Basis::new(self.delta, mortality, LapseModel::constant(nu)?)
    }
}

/// Expected share of in-force policies in the high-risk class at duration `t`.
pub fn attrition(
    portfolio: &Portfolio,
    bases: &ValuationBases,
    entry_age: f64,
    t: f64,
    step: f64,
) -> Result<f64> {
    let survival = |class| -> Result<f64> {
        let b = bases.class_basis(portfolio, class)?;
        survivorship_discount(&Basis { delta: 0.0, ..b }, entry_age, t, step)
    };
    let p1 = survival(Subpopulation::Normal)?;
    let p2 = survival(Subpopulation::HighRisk)?;
    let pi0 = portfolio.pi0();
    Ok(share(pi0, p1, p2))
}

fn share(pi0: f64, p1: f64, p2: f64) -> f64 {
    let total = (1.0 - pi0) * p1 + pi0 * p2;
    if total > 0.0 {
        pi0 * p2 / total
    } else {
        pi0
    }
}

/// Rates of adverse-selection surplus per in-force policy (negative values
/// are losses), split by source.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossRate {
    pub mortality: f64,
    pub lapse: f64,
}

impl LossRate {
    pub fn total(&self) -> f64 {
        self.mortality + self.lapse
    }
}

/// State of the portfolio at one duration.
#[derive(Debug, Clone, Copy)]
struct RateInputs {
    pi: f64,
    theta_normal: f64,
    theta_high: f64,
    mu_valuation: f64,
    mu_normal: f64,
    mu_high: f64,
    nu_valuation: f64,
    nu_normal: f64,
    nu_high: f64,
    sum_at_risk: f64,
    /// `C(t) - V(t)`.
    surrender_strain: f64,
}

fn rate_components(r: &RateInputs) -> LossRate {
    let normal = 1.0 - r.pi;
    LossRate {
        mortality: -normal * r.theta_normal * (r.mu_normal - r.mu_valuation) * r.sum_at_risk
            - r.pi * r.theta_high * (r.mu_high - r.mu_valuation) * r.sum_at_risk,
        lapse: -normal * r.theta_normal * (r.nu_normal - r.nu_valuation) * r.surrender_strain
            - r.pi * r.theta_high * (r.nu_high - r.nu_valuation) * r.surrender_strain,
    }
}

/// Coefficients of the per-policy loss rate when the high-risk share is
/// pinned at `pi`: the mortality part is `mortality * mu^(1) * (S - V)` (or
/// `* S` in Case 3) and the lapse part is `lapse * V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCoefficients {
    pub mortality: f64,
    pub lapse: f64,
}

pub fn rate_coefficients(
    case: CaseId,
    portfolio: &Portfolio,
    bases: &ValuationBases,
    surrender: SurrenderRule,
    pi: f64,
) -> RateCoefficients {
    let k = surrender_proportion(case, surrender);
    let common = RateInputs {
        pi,
        theta_normal: portfolio.normal.sum_multiple,
        theta_high: portfolio.high_risk.sum_multiple,
        mu_valuation: 1.0,
        mu_normal: portfolio.normal.mortality_multiplier,
        mu_high: portfolio.high_risk.mortality_multiplier,
        nu_valuation: bases.valuation_lapse(case),
        nu_normal: bases.normal_lapse(portfolio),
        nu_high: bases.high_risk_lapse(portfolio),
        sum_at_risk: 1.0,
        surrender_strain: 0.0,
    };
    let mortality = rate_components(&common).mortality;
    let lapse = if case == CaseId::Case3 {
        0.0
    } else {
        rate_components(&RateInputs {
            sum_at_risk: 0.0,
            surrender_strain: k - 1.0,
            ..common
        })
        .lapse
    };
    RateCoefficients { mortality, lapse }
}

fn surrender_proportion(case: CaseId, contract_rule: SurrenderRule) -> f64 {
    match case {
        CaseId::Case1Zero | CaseId::Case3 => 0.0,
        CaseId::Case1Value => 1.0,
        CaseId::Case2 => contract_rule.proportion_paid(),
    }
}

/// Everything about one scenario that does not depend on the duration.
#[derive(Debug, Clone)]
pub struct ScenarioModel {
    pub case: CaseId,
    pub portfolio: Portfolio,
    pub bases: ValuationBases,
    /// The contract as written under `case` (surrender rule, premium form).
    pub contract: Contract,
    pub pricing: PolicyFunctions,
    pub valuation_basis: Basis,
    pub class_bases: [Basis; 2],
    /// Surrender value paid on lapse at each grid point.
    pub surrender: Vec<f64>,
}

impl ScenarioModel {
    pub fn new(
        case: CaseId,
        portfolio: &Portfolio,
        bases: &ValuationBases,
        contract: &Contract,
        grid: &Grid,
    ) -> Result<Self> {
        let valuation_basis = bases.valuation_basis(case);
        let (contract, pricing) = match case {
            CaseId::Case1Zero | CaseId::Case1Value => {
                let k = surrender_proportion(case, contract.surrender);
                let c = contract
                    .with_premium_form(PremiumForm::Level)?
                    .with_surrender(SurrenderRule::proportion(k)?)?;
                let pf = price_level(&c, &valuation_basis, grid)?;
                (c, pf)
            }
            CaseId::Case2 => {
                let c = contract.with_premium_form(PremiumForm::Level)?;
                let pf = price_level(&c, &valuation_basis, grid)?;
                (c, pf)
            }
            CaseId::Case3 => {
                let c = contract
                    .with_surrender(SurrenderRule::Zero)?
                    .with_premium_form(PremiumForm::MortalityCost)?;
                let pf = current_cost_premium(&c, &valuation_basis, grid)?;
                (c, pf)
            }
        };
        let k = contract.surrender.proportion_paid();
        let surrender = pricing.value.iter().map(|v| k * v).collect();
        let class_bases = [
            bases.class_basis(portfolio, Subpopulation::Normal)?,
            bases.class_basis(portfolio, Subpopulation::HighRisk)?,
        ];
        Ok(Self {
            case,
            portfolio: *portfolio,
            bases: bases.clone(),
            contract,
            pricing,
            valuation_basis,
            class_bases,
            surrender,
        })
    }

    pub fn grid(&self) -> Grid {
        self.pricing.grid
    }

    fn thetas(&self) -> [f64; 2] {
        [self.portfolio.normal.sum_multiple, self.portfolio.high_risk.sum_multiple]
    }

    fn weights(&self) -> [f64; 2] {
        let pi0 = self.portfolio.pi0();
        [1.0 - pi0, pi0]
    }

    /// In-force probabilities of each class on the grid.
    pub fn in_force(&self) -> Result<[Vec<f64>; 2]> {
        let g = self.grid();
        let x = self.contract.entry_age;
        Ok([in_force_path(&self.class_bases[0], x, &g)?, in_force_path(&self.class_bases[1], x, &g)?])
    }

    /// High-risk share of the in-force portfolio on the grid.
    pub fn pi_path(&self) -> Result<Vec<f64>> {
        let [p1, p2] = self.in_force()?;
        let pi0 = self.portfolio.pi0();
        Ok(p1.iter().zip(&p2).map(|(a, b)| share(pi0, *a, *b)).collect())
    }

    fn inputs_at(&self, i: usize, pi: f64) -> RateInputs {
        let t = self.grid().time(i);
        let x = self.contract.entry_age;
        let v = self.pricing.value[i];
        let [t1, t2] = self.thetas();
        RateInputs {
            pi,
            theta_normal: t1,
            theta_high: t2,
            mu_valuation: self.valuation_basis.mu(x, t),
            mu_normal: self.class_bases[0].mu(x, t),
            mu_high: self.class_bases[1].mu(x, t),
            nu_valuation: self.valuation_basis.nu(t),
            nu_normal: self.class_bases[0].nu(t),
            nu_high: self.class_bases[1].nu(t),
            sum_at_risk: self.contract.sum_insured - v,
            surrender_strain: self.surrender[i] - v,
        }
    }

    /// Per-policy loss-rate decomposition at every grid point.
    pub fn decomposition(&self) -> Result<Vec<LossRate>> {
        let pi = self.pi_path()?;
        Ok(pi.iter().enumerate().map(|(i, &p)| rate_components(&self.inputs_at(i, p))).collect())
    }

    /// Surplus EPV summed class by class, and premium EPV.
    pub fn evaluate(&self) -> Result<ScenarioResult> {
        let g = self.grid();
        let thetas = self.thetas();
        let weights = self.weights();
        let mut epv_loss = 0.0;
        let mut epv_premiums = 0.0;
        for j in 0..2 {
            let w = surplus_rate_with(
                &self.contract,
                &self.pricing,
                &self.valuation_basis,
                &self.class_bases[j],
                &self.pricing.premium,
                &self.surrender,
            )?;
            let discount = crate::hazards::discount_path(&self.class_bases[j], self.contract.entry_age, &g)?;
            epv_loss += weights[j] * thetas[j] * w.epv;
            epv_premiums += weights[j] * thetas[j] * epv(&g, &discount, &self.pricing.premium);
        }
        Ok(ScenarioResult {
            case: self.case,
            epv_premiums,
            epv_loss,
            cost_pct: 100.0 * epv_loss / epv_premiums,
            decomposition: self.decomposition()?,
            pi_path: self.pi_path()?,
            pricing: self.pricing.clone(),
        })
    }

    /// EPV of surplus through the per-in-force-policy rates weighted by the
    /// expected number in force; equal to [`ScenarioResult::epv_loss`].
    pub fn epv_from_rates(&self) -> Result<f64> {
        let g = self.grid();
        let [p1, p2] = self.in_force()?;
        let [w1, w2] = self.weights();
        let v = interest_path(self.bases.delta, &g);
        let rates = self.decomposition()?;
        let integrand: Vec<f64> = (0..g.len())
            .map(|i| v[i] * (w1 * p1[i] + w2 * p2[i]) * rates[i].total())
            .collect();
        Ok(g.integrate(&integrand))
    }

    /// Standard deviation of the loss of a randomly chosen policy as a
    /// proportion (not percent) of the EPV of premiums per policy.
    pub fn loss_sd_ratio(&self) -> Result<f64> {
        let thetas = self.thetas();
        let weights = self.weights();
        let s = self.contract.sum_insured;
        let mut classes = Vec::with_capacity(2);
        for j in 0..2 {
            classes.push(ClassShare {
                weight: weights[j],
                sum_insured: thetas[j] * s,
                unit: unit_loss_moments(&self.contract, &self.pricing, &self.class_bases[j], j + 1)?,
            });
        }
        let mixture = mixture_variance(&classes)?;
        let result = self.evaluate()?;
        Ok(mixture.sd() / result.epv_premiums)
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub case: CaseId,
    /// EPV of premiums per policy issued, both classes.
    pub epv_premiums: f64,
    /// EPV of adverse-selection surplus per policy issued; negative values
    /// are losses.
    pub epv_loss: f64,
    /// `100 * epv_loss / epv_premiums`.
    pub cost_pct: f64,
    pub decomposition: Vec<LossRate>,
    pub pi_path: Vec<f64>,
    pub pricing: PolicyFunctions,
}

/// Per-policy loss rates at duration `t` given the policy functions of the
/// case's pricing regime.
pub fn loss_rate(
    case: CaseId,
    portfolio: &Portfolio,
    bases: &ValuationBases,
    contract: &Contract,
    pricing: &PolicyFunctions,
    t: f64,
) -> Result<LossRate> {
    if pricing.regime != case.regime() {
        return Err(validation(format!(
            "{} needs {:?} policy functions, got {:?}",
            case.label(),
            case.regime(),
            pricing.regime
        )));
    }
    let pi = attrition(portfolio, bases, contract.entry_age, t, pricing.grid.step())?;
    let valuation = bases.valuation_basis(case);
    let normal = bases.class_basis(portfolio, Subpopulation::Normal)?;
    let high = bases.class_basis(portfolio, Subpopulation::HighRisk)?;
    let x = contract.entry_age;
    let v = pricing.value_at(t);
    let k = surrender_proportion(case, contract.surrender);
    Ok(rate_components(&RateInputs {
        pi,
        theta_normal: portfolio.normal.sum_multiple,
        theta_high: portfolio.high_risk.sum_multiple,
        mu_valuation: valuation.mu(x, t),
        mu_normal: normal.mu(x, t),
        mu_high: high.mu(x, t),
        nu_valuation: valuation.nu(t),
        nu_normal: normal.nu(t),
        nu_high: high.nu(t),
        sum_at_risk: contract.sum_insured - v,
        surrender_strain: k * v - v,
    }))
}

pub fn scenario_epv(
    case: CaseId,
    portfolio: &Portfolio,
    bases: &ValuationBases,
    contract: &Contract,
    grid: &Grid,
) -> Result<ScenarioResult> {
    ScenarioModel::new(case, portfolio, bases, contract, grid)?.evaluate()
}

/// `scenario_epv` with the normal class lapsing at `experience_lapse`
/// instead of the valuation rate.
pub fn sensitivity_run(
    case: CaseId,
    portfolio: &Portfolio,
    bases: &ValuationBases,
    contract: &Contract,
    grid: &Grid,
    experience_lapse: f64,
) -> Result<ScenarioResult> {
    scenario_epv(case, &portfolio.with_normal_lapse(experience_lapse)?, bases, contract, grid)
}

/// Which normal-class experience lapse rate an entry-age sweep uses when the
/// valuation lapse rate is varied.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ExperienceReading {
    /// Experience equals the valuation lapse rate.
    #[default]
    FollowValuation,
    /// Experience stays at a fixed rate whatever the valuation rate.
    Fixed(f64),
}

/// Inputs shared by every cell of an entry-age sweep.
#[derive(Debug, Clone)]
pub struct SweepTemplate {
    pub delta: f64,
    pub mortality: MortalityModel,
    pub end_age: f64,
    pub sum_insured: f64,
    pub phi: f64,
    pub theta: f64,
    pub pi0: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub age: u32,
    pub case: CaseId,
    pub mode: LapsingMode,
    pub valuation_lapse: f64,
    pub cost_pct: f64,
}

/// Adverse selection cost by entry age, case, lapsing mode and valuation
/// lapse rate. Cover always ends at `template.end_age`. Rows come back
/// ordered by (valuation lapse, age, case, mode) in the order given.
pub fn age_sweep(
    cases: &[CaseId],
    template: &SweepTemplate,
    ages: &[u32],
    valuation_lapses: &[f64],
    reading: ExperienceReading,
) -> Result<Vec<SweepRow>> {
    let cells: Vec<(f64, u32)> = valuation_lapses
        .iter()
        .flat_map(|&nu| ages.iter().map(move |&age| (nu, age)))
        .collect();
    let blocks: Vec<Result<Vec<SweepRow>>> = cells
        .par_iter()
        .map(|&(nu, age)| {
            let contract = Contract::term_to(age as f64, template.end_age, template.sum_insured, SurrenderRule::Zero)?;
            let grid = Grid::new(contract.term, template.step)?;
            let bases = ValuationBases::new(template.delta, template.mortality.clone(), nu)?;
            let mut rows = Vec::with_capacity(cases.len() * 2);
            for &case in cases {
                for mode in LapsingMode::ALL {
                    let mut portfolio = Portfolio::two_class(template.phi, template.theta, template.pi0, mode)?;
                    if let ExperienceReading::Fixed(rate) = reading {
                        portfolio = portfolio.with_normal_lapse(rate)?;
                    }
                    let result = scenario_epv(case, &portfolio, &bases, &contract, &grid)?;
                    rows.push(SweepRow {
                        age,
                        case,
                        mode,
                        valuation_lapse: nu,
                        cost_pct: result.cost_pct,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::with_capacity(cells.len() * cases.len() * 2);
    for block in blocks {
        out.extend(block?);
    }
    Ok(out)
}
