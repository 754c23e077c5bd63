//! Cross-checks the simulator against the closed-form autonomy model.
//!
//! The simulated battery follows a sawtooth that touches the closed-form
//! average drain line only at intervention instants and dips below it in
//! between, so a simulated node can run dry up to one refill's worth of
//! net-drain days before the closed-form autonomy. The report states the
//! gap for every case instead of hiding it.

use std::fmt;

use serde::Serialize;

use super::{run_summary, DayOrdering, DispatchPolicy, FleetNode, ReportMode, Scenario, UavSpec};
use crate::battery::{BatterySpec, BatteryState, DAYS_PER_YEAR};
use crate::consumption::{LossProfile, NodeProfile};
use crate::error::{Error, Result};
use crate::provisioning::{autonomy, capacity_bound, AutonomyOutcome, ProvisioningParams};
use crate::wpt::AlignmentModel;

/// Minimum number of intervention periods simulated for sustainability checks.
const SUSTAIN_PERIODS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormCase {
    pub capacity_j: f64,
    pub charge_rate_per_h: f64,
    pub charge_time_s: f64,
    pub interventions_per_year: u32,
    pub daily_energy_j: f64,
}

impl ClosedFormCase {
    /// Single fully charged node on a fixed calendar with perfect alignment.
    pub fn scenario(&self) -> Result<Scenario> {
        let battery = BatterySpec::new(
            "lco",
            3.6,
            self.capacity_j,
            self.charge_rate_per_h,
            0.0,
            None,
        )?;
        let profile = NodeProfile::new(
            self.daily_energy_j * 1000.0 / 86_400.0,
            vec![],
            LossProfile::default(),
        )?;
        Ok(Scenario {
            nodes: vec![FleetNode {
                id: "node-0".into(),
                position_m: (10.0, 0.0),
                profile,
                battery: BatteryState::full(battery),
                report_mode: ReportMode::EveryUplink,
            }],
            uav: UavSpec {
                sortie_energy_budget_j: f64::MAX,
                max_charge_time_s: self.charge_time_s,
                alignment: AlignmentModel::perfect(),
                ..UavSpec::default()
            },
            policy: DispatchPolicy::FixedCalendar {
                interventions_per_year: self.interventions_per_year,
            },
            ordering: DayOrdering::ConsumeThenCharge,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Simulated depletion day within one day of the closed-form autonomy.
    AutonomyAgreement,
    /// Finite closed-form autonomy: the simulated node does run dry.
    EventualDepletion,
    /// Capacity above the sizing bound: no depletion over ten periods.
    BoundNonDepletion,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::AutonomyAgreement => "autonomy-agreement",
            CheckKind::EventualDepletion => "eventual-depletion",
            CheckKind::BoundNonDepletion => "bound-non-depletion",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub case: ClosedFormCase,
    pub closed_form: AutonomyOutcome,
    pub required_min_j: f64,
    pub capacity_bound_j: Option<f64>,
    pub simulated_depletion_day: Option<u32>,
    pub min_soc: f64,
    pub horizon_days: u32,
    /// Closed-form autonomy minus simulated depletion day.
    pub gap_days: Option<f64>,
    pub checks: Vec<CheckResult>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, kind: CheckKind) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub outcomes: Vec<CaseOutcome>,
}

impl VerificationReport {
    /// `(passed, applicable)` for one kind of check.
    pub fn tally(&self, kind: CheckKind) -> (usize, usize) {
        let applicable: Vec<&CheckResult> =
            self.outcomes.iter().filter_map(|o| o.check(kind)).collect();
        (
            applicable.iter().filter(|c| c.passed).count(),
            applicable.len(),
        )
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(CaseOutcome::passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, o) in self.outcomes.iter().enumerate() {
            let sim = o
                .simulated_depletion_day
                .map_or_else(|| "none".to_string(), |d| d.to_string());
            writeln!(
                f,
                "case {i:>3}: C={:.1} J CR={} T={} s n={} E={:.3} J/day  closed-form={} sim={sim}",
                o.case.capacity_j,
                o.case.charge_rate_per_h,
                o.case.charge_time_s,
                o.case.interventions_per_year,
                o.case.daily_energy_j,
                o.closed_form,
            )?;
            for c in &o.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                writeln!(f, "    {tag} {}: {}", c.kind, c.detail)?;
            }
        }
        for kind in [
            CheckKind::AutonomyAgreement,
            CheckKind::EventualDepletion,
            CheckKind::BoundNonDepletion,
        ] {
            let (ok, total) = self.tally(kind);
            writeln!(f, "{kind}: {ok}/{total}")?;
        }
        Ok(())
    }
}

fn conforming_case(scenario: &Scenario) -> Result<ClosedFormCase> {
    let reject = |why: &str| {
        Err(Error::Scenario(format!(
            "not a closed-form scenario: {why}"
        )))
    };
    let [node] = scenario.nodes.as_slice() else {
        return reject("needs exactly one node");
    };
    let DispatchPolicy::FixedCalendar {
        interventions_per_year,
    } = scenario.policy
    else {
        return reject("needs a fixed-calendar policy");
    };
    if scenario.uav.alignment.fine_residual_sigma_mm != 0.0 {
        return reject("alignment must be perfect");
    }
    if scenario.ordering != DayOrdering::ConsumeThenCharge {
        return reject("needs consume-then-charge ordering");
    }
    if node.battery.soc() != 1.0 {
        return reject("battery must start full");
    }
    Ok(ClosedFormCase {
        capacity_j: node.battery.spec.capacity_j,
        charge_rate_per_h: node.battery.spec.charge_rate_per_h,
        charge_time_s: scenario.uav.max_charge_time_s,
        interventions_per_year,
        daily_energy_j: node.drain_j_per_day()?,
    })
}

/// Runs one conforming scenario and compares it with the closed form.
pub fn verify_scenario(scenario: &Scenario) -> Result<CaseOutcome> {
    scenario.validate()?;
    let case = conforming_case(scenario)?;
    let spec = &scenario.nodes[0].battery.spec;
    let params = ProvisioningParams::new(
        case.interventions_per_year,
        case.charge_time_s,
        spec.clone(),
        case.daily_energy_j,
    )?;
    let closed = autonomy(&params)?;
    let bound = if case.charge_rate_per_h > 0.0 && case.charge_time_s > 0.0 {
        Some(
            capacity_bound(
                case.daily_energy_j,
                case.interventions_per_year,
                case.charge_rate_per_h,
                case.charge_time_s,
            )?
            .bound_j,
        )
    } else {
        None
    };
    let period = DAYS_PER_YEAR / f64::from(case.interventions_per_year);
    let sustain_horizon = (SUSTAIN_PERIODS * period).ceil() as u32 + 1;
    let horizon = match closed.outcome {
        AutonomyOutcome::Finite(t) => (t.ceil() as u32).saturating_add(period.ceil() as u32 + 2),
        AutonomyOutcome::Unlimited => sustain_horizon,
    }
    .max(sustain_horizon);

    let summary = run_summary(scenario, horizon, 0)?;
    let node = &summary.nodes[0];
    let sim_day = node.depletion_day;
    let mut checks = Vec::new();
    let mut gap_days = None;

    if let AutonomyOutcome::Finite(t) = closed.outcome {
        checks.push(CheckResult {
            kind: CheckKind::EventualDepletion,
            passed: sim_day.is_some(),
            detail: format!("closed-form {t:.2} days, simulated {sim_day:?} within {horizon} days"),
        });
        if let Some(d) = sim_day {
            gap_days = Some(t - f64::from(d));
        }
        if case.capacity_j >= closed.required_min_j {
            let passed = sim_day.is_some_and(|d| (f64::from(d) - t).abs() <= 1.0);
            checks.push(CheckResult {
                kind: CheckKind::AutonomyAgreement,
                passed,
                detail: match sim_day {
                    Some(d) => format!(
                        "closed-form {t:.2} vs simulated {d} (gap {:.2} days, tolerance 1)",
                        t - f64::from(d)
                    ),
                    None => format!("closed-form {t:.2}, no simulated depletion"),
                },
            });
        }
    }
    if let Some(b) = bound {
        if case.capacity_j > b {
            let passed = sim_day.is_none() && node.min_soc > 0.0;
            checks.push(CheckResult {
                kind: CheckKind::BoundNonDepletion,
                passed,
                detail: format!(
                    "capacity {:.2} J > bound {b:.2} J; min SoC {:.4} over {horizon} days",
                    case.capacity_j, node.min_soc
                ),
            });
        }
    }

    Ok(CaseOutcome {
        case,
        closed_form: closed.outcome,
        required_min_j: closed.required_min_j,
        capacity_bound_j: bound,
        simulated_depletion_day: sim_day,
        min_soc: node.min_soc,
        horizon_days: horizon,
        gap_days,
        checks,
    })
}

pub fn verify_against_closed_form(cases: &[ClosedFormCase]) -> Result<VerificationReport> {
    let outcomes = cases
        .iter()
        .map(|c| verify_scenario(&c.scenario()?))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport { outcomes })
}
