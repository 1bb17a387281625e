//! The insured product: endowment-style contracts with a constant sum
//! insured, a maturity value and a surrender-value rule.

use crate::error::{validation, Error, Result};

/// Cash paid on lapse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurrenderRule {
    Zero,
    /// A fixed proportion `k` of the policy value in force.
    ProportionOfValue(f64),
}

impl SurrenderRule {
    pub fn proportion(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::Domain {
                quantity: "surrender proportion k",
                value: k,
                domain: "[0, 1]",
            });
        }
        Ok(SurrenderRule::ProportionOfValue(k))
    }

    /// The proportion of policy value paid on lapse (0 for the zero rule).
    pub fn proportion_paid(&self) -> f64 {
        match self {
            SurrenderRule::Zero => 0.0,
            SurrenderRule::ProportionOfValue(k) => *k,
        }
    }
}

/// `C(t)` given the policy value in force at `t`.
pub fn surrender_value(rule: SurrenderRule, _t: f64, policy_value: f64) -> f64 {
    rule.proportion_paid() * policy_value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremiumForm {
    Level,
    /// Premium equal to the instantaneous cost of life cover.
    MortalityCost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pub entry_age: f64,
    pub term: f64,
    pub sum_insured: f64,
    pub maturity: f64,
    pub surrender: SurrenderRule,
    pub premium_form: PremiumForm,
}

impl Contract {
    pub fn new(
        entry_age: f64,
        term: f64,
        sum_insured: f64,
        maturity: f64,
        surrender: SurrenderRule,
        premium_form: PremiumForm,
    ) -> Result<Self> {
        if !(term > 0.0) {
            return Err(validation(format!("term must be positive, got {term}")));
        }
        if !(entry_age >= 0.0) || entry_age + term > crate::hazards::MAX_AGE {
            return Err(Error::Domain {
                quantity: "age at expiry",
                value: entry_age + term,
                domain: "[0, 120]",
            });
        }
        if !(sum_insured >= 0.0) || !(maturity >= 0.0) {
            return Err(validation(format!(
                "sum insured and maturity must be non-negative (S={sum_insured}, M={maturity})"
            )));
        }
        if let SurrenderRule::ProportionOfValue(k) = surrender {
            SurrenderRule::proportion(k)?;
        }
        if premium_form == PremiumForm::MortalityCost && surrender != SurrenderRule::Zero {
            return Err(validation(
                "mortality-cost premiums require a zero surrender value",
            ));
        }
        Ok(Self {
            entry_age,
            term,
            sum_insured,
            maturity,
            surrender,
            premium_form,
        })
    }

    /// 'Term to 100': endowment at `end_age` paying the sum insured on
    /// death or at maturity, level premiums.
    pub fn term_to(entry_age: f64, end_age: f64, sum_insured: f64, surrender: SurrenderRule) -> Result<Self> {
        Self::new(
            entry_age,
            end_age - entry_age,
            sum_insured,
            sum_insured,
            surrender,
            PremiumForm::Level,
        )
    }

    pub fn with_surrender(&self, surrender: SurrenderRule) -> Result<Self> {
        Self::new(
            self.entry_age,
            self.term,
            self.sum_insured,
            self.maturity,
            surrender,
            self.premium_form,
        )
    }

    pub fn with_premium_form(&self, premium_form: PremiumForm) -> Result<Self> {
        Self::new(
            self.entry_age,
            self.term,
            self.sum_insured,
            self.maturity,
            self.surrender,
            premium_form,
        )
    }
}
