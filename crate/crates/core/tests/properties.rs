//! Invariants of the closed-form model and the simulator, each checked over
//! at least a thousand generated cases.

use aerprov::battery::BatterySpec;
use aerprov::provisioning::{
    autonomy, capacity_bound, charged_per_intervention, min_capacity, required_min_energy,
    AutonomyOutcome, ProvisioningParams,
};
use aerprov::sim::{run, run_summary, ClosedFormCase, DispatchPolicy, ReportMode};
use aerprov::wpt::{AlignmentModel, PositioningRegime};
use proptest::prelude::*;

const CASES: u32 = 1000;

fn days(o: AutonomyOutcome) -> f64 {
    o.days().unwrap_or(f64::INFINITY)
}

fn auton(capacity: f64, rate: f64, t: f64, n: u32, daily: f64) -> f64 {
    let battery = BatterySpec::new("cell", 3.6, capacity, rate, 0.0, None).unwrap();
    days(
        autonomy(&ProvisioningParams::new(n, t, battery, daily).unwrap())
            .unwrap()
            .outcome,
    )
}

/// `a <= b` allowing for rounding in the last few ulps.
fn le(a: f64, b: f64) -> bool {
    a <= b || (a.is_finite() && b.is_finite() && a - b <= 1e-12 * a.abs().max(b.abs()))
}

fn capacity() -> impl Strategy<Value = f64> {
    10.0..50_000.0f64
}
fn rate() -> impl Strategy<Value = f64> {
    0.1..20.0f64
}
fn charge_time() -> impl Strategy<Value = f64> {
    0.0..3600.0f64
}
fn interventions() -> impl Strategy<Value = u32> {
    1u32..=365
}
fn daily() -> impl Strategy<Value = f64> {
    0.1..1000.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn autonomy_monotone_in_capacity(c in capacity(), dc in 0.0..10_000.0f64, r in rate(), t in charge_time(), n in interventions(), e in daily()) {
        prop_assert!(le(auton(c, r, t, n, e), auton(c + dc, r, t, n, e)));
    }

    #[test]
    fn autonomy_monotone_in_charge_time(c in capacity(), r in rate(), t in charge_time(), dt in 0.0..600.0f64, n in interventions(), e in daily()) {
        prop_assert!(le(auton(c, r, t, n, e), auton(c, r, t + dt, n, e)));
    }

    #[test]
    fn autonomy_monotone_in_charge_rate(c in capacity(), r in rate(), dr in 0.0..10.0f64, t in charge_time(), n in interventions(), e in daily()) {
        prop_assert!(le(auton(c, r, t, n, e), auton(c, r + dr, t, n, e)));
    }

    #[test]
    fn autonomy_monotone_in_interventions(c in capacity(), r in rate(), t in charge_time(), n in interventions(), dn in 0u32..52, e in daily()) {
        prop_assert!(le(auton(c, r, t, n, e), auton(c, r, t, n + dn, e)));
    }

    #[test]
    fn autonomy_antitone_in_daily_energy(c in capacity(), r in rate(), t in charge_time(), n in interventions(), e in daily(), de in 0.0..100.0f64) {
        prop_assert!(le(auton(c, r, t, n, e + de), auton(c, r, t, n, e)));
    }

    #[test]
    fn unlimited_iff_refill_covers_a_year(c in capacity(), r in rate(), t in charge_time(), n in interventions(), e in daily()) {
        let battery = BatterySpec::new("cell", 3.6, c, r, 0.0, None).unwrap();
        let params = ProvisioningParams::new(n, t, battery, e).unwrap();
        let yearly_refill = charged_per_intervention(&params) * f64::from(n);
        let result = autonomy(&params).unwrap();
        prop_assert_eq!(result.outcome.is_unlimited(), 365.0 * e - yearly_refill <= 0.0);
    }

    #[test]
    fn capacity_above_bound_is_unlimited(e in daily(), n in interventions(), r in rate(), t in 1.0..3600.0f64, margin in 1.0001..3.0f64) {
        let bound = min_capacity(e, n, r, t).unwrap();
        prop_assert!(auton(bound * margin, r, t, n, e).is_infinite());
    }

    #[test]
    fn min_capacity_nonincreasing_in_n(e in daily(), n in interventions(), dn in 0u32..52, r in rate(), t in 1.0..3600.0f64) {
        prop_assert!(le(min_capacity(e, n + dn, r, t).unwrap(), min_capacity(e, n, r, t).unwrap()));
    }

    #[test]
    fn min_capacity_nonincreasing_in_rate(e in daily(), n in interventions(), r in rate(), dr in 0.0..10.0f64, t in 1.0..3600.0f64) {
        prop_assert!(le(min_capacity(e, n, r + dr, t).unwrap(), min_capacity(e, n, r, t).unwrap()));
    }

    #[test]
    fn bound_dominates_both_terms(e in daily(), n in interventions(), r in rate(), t in 1.0..3600.0f64) {
        let b = capacity_bound(e, n, r, t).unwrap();
        prop_assert!(b.bound_j >= b.required_min_j);
        prop_assert!(b.bound_j >= b.charge_rate_term_j);
    }

    #[test]
    fn required_min_times_n_is_yearly_need(e in daily(), n in interventions()) {
        let req = required_min_energy(e, n).unwrap();
        prop_assert!((req * f64::from(n) - 365.0 * e).abs() <= 1e-9 * 365.0 * e);
    }
}

fn sim_case() -> impl Strategy<Value = (ClosedFormCase, f64, bool, f64, u64)> {
    (
        100.0..20_000.0f64,
        rate(),
        0.0..900.0f64,
        1u32..=52,
        1.0..300.0f64,
        0.0..20.0f64,
        any::<bool>(),
        0.05..0.9f64,
        any::<u64>(),
    )
        .prop_map(|(c, r, t, n, e, sigma, triggered, soc, seed)| {
            (
                ClosedFormCase {
                    capacity_j: c,
                    charge_rate_per_h: r,
                    charge_time_s: t,
                    interventions_per_year: n,
                    daily_energy_j: e,
                },
                sigma,
                triggered,
                soc,
                seed,
            )
        })
}

fn scenario_for(
    case: &ClosedFormCase,
    sigma: f64,
    triggered: bool,
    soc: f64,
) -> aerprov::sim::Scenario {
    let mut s = case.scenario().unwrap();
    s.uav.alignment = AlignmentModel::new(PositioningRegime::Open, sigma).unwrap();
    s.nodes[0].battery =
        aerprov::battery::BatteryState::with_soc(s.nodes[0].battery.spec.clone(), soc).unwrap();
    if triggered {
        s.policy = DispatchPolicy::SocTriggered {
            soc_trigger: 0.3,
            prediction_window_days: 7,
            interventions_cap_per_year: case.interventions_per_year,
        };
        s.nodes[0].report_mode = ReportMode::Threshold(0.5);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn soc_stays_in_unit_interval((case, sigma, triggered, soc, seed) in sim_case()) {
        let s = scenario_for(&case, sigma, triggered, soc);
        let trace = run(&s, 200, seed).unwrap();
        let cap = case.capacity_j;
        for d in &trace.days {
            prop_assert!((0.0..=1.0).contains(&d.soc), "soc {}", d.soc);
            prop_assert!(d.stored_j >= 0.0 && d.stored_j <= cap * (1.0 + 1e-12));
        }
        for i in &trace.interventions {
            prop_assert!((0.0..=1.0).contains(&i.efficiency));
            prop_assert!(i.stored_j >= 0.0);
        }
        for n in &trace.summary.nodes {
            prop_assert!((0.0..=1.0).contains(&n.min_soc) && (0.0..=1.0).contains(&n.final_soc));
        }
    }

    #[test]
    fn equal_inputs_give_identical_bytes((case, sigma, triggered, soc, seed) in sim_case()) {
        let s = scenario_for(&case, sigma, triggered, soc);
        let a = run(&s, 120, seed).unwrap();
        let b = run(&s, 120, seed).unwrap();
        prop_assert_eq!(a.days_csv().unwrap(), b.days_csv().unwrap());
        prop_assert_eq!(a.interventions_csv().unwrap(), b.interventions_csv().unwrap());
        prop_assert_eq!(a.summary_json().unwrap(), b.summary_json().unwrap());
    }

    #[test]
    fn longer_charge_window_never_hurts((case, _, _, _, seed) in sim_case(), extra in 0.0..600.0f64) {
        let short = case.scenario().unwrap();
        let mut long = short.clone();
        long.uav.max_charge_time_s += extra;
        let horizon = 730;
        let a = run_summary(&short, horizon, seed).unwrap();
        let b = run_summary(&long, horizon, seed).unwrap();
        let day = |s: &aerprov::sim::TraceSummary| s.nodes[0].depletion_day.unwrap_or(u32::MAX);
        prop_assert!(day(&a) <= day(&b));
        prop_assert!(a.nodes[0].min_soc <= b.nodes[0].min_soc + 1e-12);
    }
}
