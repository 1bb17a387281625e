use lapse_core::advsel::*;
use lapse_core::*;
use proptest::prelude::*;

const STEP: f64 = 1.0 / 24.0;

fn setup(age: u32, term: u32, delta: f64, nu: f64) -> (ValuationBases, Contract, Grid) {
    let bases = ValuationBases::new(delta, MortalityModel::gm82_male(), nu).unwrap();
    let c = Contract::term_to(age as f64, (age + term) as f64, 100_000.0, SurrenderRule::Zero).unwrap();
    let g = Grid::new(c.term, STEP).unwrap();
    (bases, c, g)
}

fn case() -> impl Strategy<Value = CaseId> {
    prop::sample::select(CaseId::ALL.to_vec())
}

fn mode() -> impl Strategy<Value = LapsingMode> {
    prop::sample::select(LapsingMode::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    // With the normal class on the valuation basis, all surplus comes from
    // the high-risk class, whose cashflows scale with its sum insured.
    #[test]
    fn high_risk_loss_is_proportional_to_sum_multiple(
        case in case(), mode in mode(), age in 20u32..60, term in 10u32..40,
        delta in 0.01f64..0.08, nu in 0.01f64..0.08, phi in 1.0f64..6.0, theta in 1.0f64..12.0,
    ) {
        prop_assume!(case != CaseId::Case1Zero);
        let (bases, c, g) = setup(age, term, delta, nu);
        let loss = |theta: f64| {
            let p = Portfolio::two_class(phi, theta, 0.001, mode).unwrap();
            scenario_epv(case, &p, &bases, &c, &g).unwrap().epv_loss
        };
        let (one, many) = (loss(1.0), loss(theta));
        prop_assert!((many - theta * one).abs() <= 1e-9 * (theta * one).abs().max(1e-6));
    }

    #[test]
    fn full_surrender_value_has_no_lapse_component(
        mode in mode(), age in 20u32..60, term in 10u32..40, delta in 0.01f64..0.08,
        nu in 0.01f64..0.08, phi in 1.0f64..6.0, theta in 1.0f64..12.0,
    ) {
        let (bases, c, g) = setup(age, term, delta, nu);
        let p = Portfolio::two_class(phi, theta, 0.001, mode).unwrap();
        let m = ScenarioModel::new(CaseId::Case1Value, &p, &bases, &c, &g).unwrap();
        prop_assert!(m.decomposition().unwrap().iter().all(|r| r.lapse.abs() < 1e-9));
    }

    #[test]
    fn current_cost_rates_ignore_lapsing_mode(
        delta in 0.01f64..0.08, nu in 0.01f64..0.08, phi in 1.0f64..6.0,
        theta in 1.0f64..12.0, pi in 0.0f64..0.1,
    ) {
        let bases = ValuationBases::new(delta, MortalityModel::gm82_male(), nu).unwrap();
        let coefficient = |mode| {
            let p = Portfolio::two_class(phi, theta, 0.001, mode).unwrap();
            rate_coefficients(CaseId::Case3, &p, &bases, SurrenderRule::Zero, pi)
        };
        prop_assert_eq!(coefficient(LapsingMode::Uniform), coefficient(LapsingMode::Differential));
    }

    #[test]
    fn lapse_supported_cost_vanishes_without_selection(
        age in 20u32..60, term in 10u32..40, delta in 0.01f64..0.08, nu in 0.01f64..0.08,
        pi0 in 0.0f64..0.5,
    ) {
        let (bases, c, g) = setup(age, term, delta, nu);
        let p = Portfolio::two_class(1.0, 1.0, pi0, LapsingMode::Uniform).unwrap();
        let r = sensitivity_run(CaseId::Case2, &p, &bases, &c, &g, nu).unwrap();
        prop_assert!(r.cost_pct.abs() < 1e-9);
    }

    #[test]
    fn lapse_stress_moves_lapse_supported_cost_both_ways(
        age in 20u32..60, term in 10u32..40, delta in 0.01f64..0.08, nu in 0.02f64..0.08,
        stress in 0.002f64..0.02,
    ) {
        let (bases, c, g) = setup(age, term, delta, nu);
        let p = Portfolio::two_class(1.0, 1.0, 0.001, LapsingMode::Uniform).unwrap();
        let run = |rate| sensitivity_run(CaseId::Case2, &p, &bases, &c, &g, rate).unwrap().cost_pct;
        prop_assert!(run(nu - stress) < 0.0);
        prop_assert!(run(nu + stress) > 0.0);
    }

    #[test]
    fn epv_routes_agree(
        case in case(), mode in mode(), age in 20u32..60, term in 10u32..40,
        delta in 0.01f64..0.08, nu in 0.01f64..0.08, phi in 1.0f64..6.0, theta in 1.0f64..12.0,
    ) {
        let (bases, c, g) = setup(age, term, delta, nu);
        let p = Portfolio::two_class(phi, theta, 0.001, mode).unwrap();
        let m = ScenarioModel::new(case, &p, &bases, &c, &g).unwrap();
        let direct = m.evaluate().unwrap().epv_loss;
        let via_rates = m.epv_from_rates().unwrap();
        prop_assert!((direct - via_rates).abs() <= 1e-8 * direct.abs().max(1.0));
    }
}

#[test]
fn attrition_grows_under_differential_lapsing() {
    let bases = ValuationBases::new(0.05, MortalityModel::gm82_male(), 0.06).unwrap();
    let c = Contract::term_to(35.0, 100.0, 250_000.0, SurrenderRule::Zero).unwrap();
    let g = Grid::new(c.term, DEFAULT_STEP).unwrap();
    let p = Portfolio::two_class(1.0, 1.0, 0.001, LapsingMode::Differential).unwrap();
    let pi = ScenarioModel::new(CaseId::Case2, &p, &bases, &c, &g).unwrap().pi_path().unwrap();
    assert!(pi.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn sweep_is_ordered_and_deterministic() {
    let template = SweepTemplate {
        delta: 0.05,
        mortality: MortalityModel::gm82_male(),
        end_age: 100.0,
        sum_insured: 250_000.0,
        phi: 5.0,
        theta: 10.0,
        pi0: 0.001,
        step: 1.0 / 48.0,
    };
    let ages = [30, 45, 60];
    let lapses = [0.03, 0.06];
    let a = age_sweep(&CaseId::ALL, &template, &ages, &lapses, ExperienceReading::default()).unwrap();
    let b = age_sweep(&CaseId::ALL, &template, &ages, &lapses, ExperienceReading::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), ages.len() * lapses.len() * 8);
    assert_eq!((a[0].age, a[0].valuation_lapse, a[0].case, a[0].mode), (30, 0.03, CaseId::Case1Zero, LapsingMode::Uniform));
    assert_eq!(a[8].age, 45);
}
