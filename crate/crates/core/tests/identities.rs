use lapse_core::surplus::{verify_premium_reduction_identity, verify_valuation_invariance};
use lapse_core::thiele::price_level;
use lapse_core::*;

const S: f64 = 250_000.0;

fn basis(delta: f64, nu: f64) -> Basis {
    Basis::new(delta, MortalityModel::gm82_male(), LapseModel::constant(nu).unwrap()).unwrap()
}

fn baseline() -> (Contract, Grid) {
    let c = Contract::term_to(35.0, 100.0, S, SurrenderRule::Zero).unwrap();
    let g = Grid::new(c.term, DEFAULT_STEP).unwrap();
    (c, g)
}

#[test]
fn premium_reduction_identity_sweep() {
    let (c, g) = baseline();
    let mut cells = 0;
    for delta in [0.03, 0.06, 0.09] {
        for nu in [0.03, 0.06] {
            for k in [0.0, 0.5, 1.0] {
                let c = c.with_surrender(SurrenderRule::proportion(k).unwrap()).unwrap();
                let premium_basis = basis(delta, nu);
                let plain = price_level(&c, &premium_basis.without_lapses(), &g).unwrap();
                let supported = price_level(&c, &premium_basis, &g).unwrap();
                for nu_exp in [0.0, 0.03, 0.06, 0.09] {
                    let check = verify_premium_reduction_identity(&c, &plain, &supported, &premium_basis, &basis(delta, nu_exp))
                        .unwrap();
                    assert!(check.residual.abs() < 1e-6 * S, "delta={delta} nu={nu} k={k} nu'={nu_exp}: {check:?}");
                    if nu_exp == nu {
                        assert!(check.corollary_residual.unwrap().abs() < 1e-6 * S);
                    }
                    cells += 1;
                }
            }
        }
    }
    assert_eq!(cells, 72);
}

#[test]
fn identity_holds_under_other_discount_functions() {
    let (c, g) = baseline();
    let premium_basis = basis(0.05, 0.06);
    let plain = price_level(&c, &premium_basis.without_lapses(), &g).unwrap();
    let supported = price_level(&c, &premium_basis, &g).unwrap();
    for (delta, nu) in [(0.02, 0.0), (0.08, 0.06), (0.05, 0.12)] {
        let check = verify_premium_reduction_identity(&c, &plain, &supported, &premium_basis, &basis(delta, nu)).unwrap();
        assert!(check.residual.abs() < 1e-6 * S, "{check:?}");
        assert!(check.corollary_residual.is_none());
    }
}

#[test]
fn surplus_epv_does_not_depend_on_valuation_basis() {
    let (c, g) = baseline();
    for delta in [0.03, 0.06, 0.09] {
        for nu_exp in [0.0, 0.03, 0.05, 0.06, 0.09] {
            let (w, w_star) = verify_valuation_invariance(&c, &basis(delta, 0.06), &LapseModel::constant(nu_exp).unwrap(), &g).unwrap();
            assert!((w - w_star).abs() < 1e-6 * S, "delta={delta} nu'={nu_exp}: {w} vs {w_star}");
        }
    }
}

#[test]
fn lapse_supported_premium_equals_higher_interest_premium() {
    let (c, g) = baseline();
    let supported = price_level(&c, &basis(0.03, 0.06), &g).unwrap().premium[0];
    let plain = price_level(&c, &basis(0.09, 0.0), &g).unwrap().premium[0];
    assert!((supported / plain - 1.0).abs() < 1e-8);
}
