//! Day-resolution fleet simulator.
//!
//! Every node drains at a constant rate (consumption, losses and battery
//! self-discharge). Interventions are instantaneous: a fixed-calendar policy
//! charges at the exact instants `k * 365 / n` days, an SoC-triggered policy
//! dispatches at the end of the day from the telemetry it has received.
//! Depleted nodes stay at zero and stop reporting until a UAV charges them.

mod dispatch;
mod sortie;
mod trace;
mod verify;

use std::collections::{HashSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::battery::BatteryState;
use crate::consumption::NodeProfile;
use crate::error::{invalid, non_negative, positive, Error, Result};
use crate::wpt::{AlignmentModel, IptCoilModel};

pub use dispatch::{fit_line, predict_depletion, SocRecord};
pub use sortie::{execute_intervention, plan_sortie, PlannedStop, SortiePlan};
pub use trace::{
    parse_days_csv, DayRecord, InterventionRecord, NodeSummary, SimTrace, TraceSummary,
};
pub use verify::{
    verify_against_closed_form, verify_scenario, CaseOutcome, CheckKind, CheckResult,
    ClosedFormCase, VerificationReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportMode {
    /// SoC is included in every daily uplink.
    EveryUplink,
    /// SoC is sent only once it falls below the fraction.
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetNode {
    pub id: String,
    pub position_m: (f64, f64),
    pub profile: NodeProfile,
    pub battery: BatteryState,
    pub report_mode: ReportMode,
}

impl FleetNode {
    /// Joules per day the node loses, self-discharge included.
    pub fn drain_j_per_day(&self) -> Result<f64> {
        Ok(self.profile.daily_energy()? + self.battery.spec.self_discharge_j_per_day())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavSpec {
    pub sortie_energy_budget_j: f64,
    pub transit_speed_m_s: f64,
    pub transit_power_w: f64,
    pub hover_power_w: f64,
    /// Longest charge per node and visit.
    pub max_charge_time_s: f64,
    pub wpt: IptCoilModel,
    pub alignment: AlignmentModel,
    pub base_position_m: (f64, f64),
}

impl Default for UavSpec {
    /// A mid-size multirotor with a 100 Wh pack. Only the UAV cost columns
    /// depend on these values.
    fn default() -> Self {
        Self {
            sortie_energy_budget_j: 360_000.0,
            transit_speed_m_s: 10.0,
            transit_power_w: 200.0,
            hover_power_w: 250.0,
            max_charge_time_s: 300.0,
            wpt: IptCoilModel::default(),
            alignment: AlignmentModel::perfect(),
            base_position_m: (0.0, 0.0),
        }
    }
}

impl UavSpec {
    pub fn validate(&self) -> Result<()> {
        non_negative("sortie_energy_budget_j", self.sortie_energy_budget_j)?;
        positive("transit_speed_m_s", self.transit_speed_m_s)?;
        non_negative("transit_power_w", self.transit_power_w)?;
        non_negative("hover_power_w", self.hover_power_w)?;
        non_negative("max_charge_time_s", self.max_charge_time_s)?;
        self.wpt.validate()?;
        self.alignment.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DispatchPolicy {
    /// Every node is visited at `k * 365 / n` days.
    FixedCalendar { interventions_per_year: u32 },
    /// A node is sent a UAV when its forecast SoC `prediction_window_days`
    /// ahead (or its last reported SoC) is at or below `soc_trigger`.
    SocTriggered {
        soc_trigger: f64,
        prediction_window_days: u32,
        interventions_cap_per_year: u32,
    },
}

impl DispatchPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DispatchPolicy::FixedCalendar {
                interventions_per_year,
            } => {
                if interventions_per_year == 0 {
                    return Err(invalid("interventions_per_year", "must be >= 1"));
                }
            }
            DispatchPolicy::SocTriggered {
                soc_trigger,
                prediction_window_days,
                ..
            } => {
                if !(soc_trigger > 0.0 && soc_trigger < 1.0) {
                    return Err(invalid("soc_trigger", "must be in (0, 1)"));
                }
                if prediction_window_days < 2 {
                    return Err(invalid("prediction_window_days", "must be >= 2"));
                }
            }
        }
        Ok(())
    }
}

/// Order of drain and charge within a simulated day.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DayOrdering {
    /// Drain first; interventions happen at their instant (end of day for
    /// SoC-triggered dispatch).
    #[default]
    ConsumeThenCharge,
    /// Interventions happen at the start of their day.
    ChargeThenConsume,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub nodes: Vec<FleetNode>,
    pub uav: UavSpec,
    pub policy: DispatchPolicy,
    #[serde(default)]
    pub ordering: DayOrdering,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Scenario(e.to_string());
        if self.nodes.is_empty() {
            return Err(Error::Scenario("no nodes".into()));
        }
        let mut ids = HashSet::new();
        for node in &self.nodes {
            if !ids.insert(node.id.as_str()) {
                return Err(Error::Scenario(format!("duplicate node id `{}`", node.id)));
            }
            node.profile.validate().map_err(wrap)?;
            node.battery.spec.validate().map_err(wrap)?;
            if let ReportMode::Threshold(t) = node.report_mode {
                if !(t > 0.0 && t < 1.0) {
                    return Err(Error::Scenario(format!(
                        "node `{}`: report threshold {t} not in (0, 1)",
                        node.id
                    )));
                }
            }
        }
        self.uav.validate().map_err(wrap)?;
        self.policy.validate().map_err(wrap)
    }
}

/// Runs `scenario` for `horizon_days` days. Equal inputs give equal traces.
pub fn run(scenario: &Scenario, horizon_days: u32, seed: u64) -> Result<SimTrace> {
    let mut sim = Simulation::new(scenario, seed, true)?;
    sim.advance(horizon_days)?;
    Ok(sim.finish(horizon_days, seed))
}

/// Like [`run`] but keeps only the summary; suited to very long horizons.
pub fn run_summary(scenario: &Scenario, horizon_days: u32, seed: u64) -> Result<TraceSummary> {
    let mut sim = Simulation::new(scenario, seed, false)?;
    sim.advance(horizon_days)?;
    Ok(sim.finish(horizon_days, seed).summary)
}

struct NodeRuntime {
    node: FleetNode,
    drain_per_day: f64,
    depletion_day: Option<u32>,
    min_soc: f64,
    interventions: u32,
    failed_alignments: u32,
    /// Telemetry the planner has received since the last intervention.
    history: VecDeque<SocRecord>,
    last_reported_soc: Option<f64>,
    intervention_days: VecDeque<u32>,
}

struct Simulation {
    uav: UavSpec,
    policy: DispatchPolicy,
    ordering: DayOrdering,
    nodes: Vec<NodeRuntime>,
    rng: ChaCha8Rng,
    day: u32,
    record: bool,
    days: Vec<DayRecord>,
    interventions: Vec<InterventionRecord>,
}

impl Simulation {
    fn new(scenario: &Scenario, seed: u64, record: bool) -> Result<Self> {
        scenario.validate()?;
        let nodes = scenario
            .nodes
            .iter()
            .map(|n| {
                Ok(NodeRuntime {
                    drain_per_day: n.drain_j_per_day()?,
                    min_soc: n.battery.soc(),
                    node: n.clone(),
                    depletion_day: None,
                    interventions: 0,
                    failed_alignments: 0,
                    history: VecDeque::new(),
                    last_reported_soc: None,
                    intervention_days: VecDeque::new(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            uav: scenario.uav.clone(),
            policy: scenario.policy,
            ordering: scenario.ordering,
            nodes,
            rng: ChaCha8Rng::seed_from_u64(seed),
            day: 0,
            record,
            days: Vec::new(),
            interventions: Vec::new(),
        })
    }

    fn advance(&mut self, days: u32) -> Result<()> {
        for _ in 0..days {
            self.step_day()?;
        }
        Ok(())
    }

    /// Fractions of the current day at which fixed-calendar interventions fire.
    fn calendar_instants(&self, n: u32) -> Vec<f64> {
        let d = u64::from(self.day);
        let n = u64::from(n);
        // instants k*365/n with (d-1) < k*365/n <= d, in exact integer arithmetic
        let first = (d - 1) * n / 365 + 1;
        let last = d * n / 365;
        (first..=last)
            .map(|k| match self.ordering {
                DayOrdering::ConsumeThenCharge => (k * 365 - (d - 1) * n) as f64 / n as f64,
                DayOrdering::ChargeThenConsume => 0.0,
            })
            .collect()
    }

    fn step_day(&mut self) -> Result<()> {
        self.day += 1;
        let mut elapsed = 0.0;
        if let DispatchPolicy::FixedCalendar {
            interventions_per_year,
        } = self.policy
        {
            for instant in self.calendar_instants(interventions_per_year) {
                self.drain_all(instant - elapsed);
                elapsed = instant;
                let due: Vec<usize> = (0..self.nodes.len()).collect();
                self.sortie(&due)?;
            }
        }
        if matches!(self.policy, DispatchPolicy::SocTriggered { .. })
            && self.ordering == DayOrdering::ChargeThenConsume
        {
            let due = self.due_nodes();
            if !due.is_empty() {
                self.sortie(&due)?;
            }
        }
        self.drain_all(1.0 - elapsed);
        self.telemetry();
        if matches!(self.policy, DispatchPolicy::SocTriggered { .. })
            && self.ordering == DayOrdering::ConsumeThenCharge
        {
            let due = self.due_nodes();
            if !due.is_empty() {
                self.sortie(&due)?;
            }
        }
        for rt in &mut self.nodes {
            rt.min_soc = rt.min_soc.min(rt.node.battery.soc());
        }
        if self.record {
            for rt in &self.nodes {
                self.days.push(DayRecord {
                    day: self.day,
                    node_id: rt.node.id.clone(),
                    soc: rt.node.battery.soc(),
                    stored_j: rt.node.battery.stored_j(),
                });
            }
        }
        Ok(())
    }

    fn drain_all(&mut self, fraction_of_day: f64) {
        if fraction_of_day <= 0.0 {
            return;
        }
        let day = self.day;
        for rt in &mut self.nodes {
            let demand = rt.drain_per_day * fraction_of_day;
            if demand == 0.0 {
                continue;
            }
            let (next, _shortfall) = rt.node.battery.drain(demand);
            rt.node.battery = next;
            if rt.node.battery.is_empty() && rt.depletion_day.is_none() {
                rt.depletion_day = Some(day);
            }
            rt.min_soc = rt.min_soc.min(rt.node.battery.soc());
        }
    }

    fn telemetry(&mut self) {
        let day = self.day;
        for rt in &mut self.nodes {
            let battery = &rt.node.battery;
            if battery.is_empty() {
                continue;
            }
            let soc = battery.soc();
            let reports = match rt.node.report_mode {
                ReportMode::EveryUplink => true,
                ReportMode::Threshold(t) => soc < t,
            };
            if reports {
                rt.last_reported_soc = Some(soc);
                rt.history.push_back(SocRecord {
                    day: f64::from(day),
                    stored_j: battery.stored_j(),
                });
            }
        }
    }

    fn due_nodes(&mut self) -> Vec<usize> {
        let DispatchPolicy::SocTriggered {
            soc_trigger,
            prediction_window_days,
            interventions_cap_per_year,
        } = self.policy
        else {
            return Vec::new();
        };
        let day = self.day;
        let window = f64::from(prediction_window_days);
        let mut due = Vec::new();
        for (i, rt) in self.nodes.iter_mut().enumerate() {
            while rt
                .history
                .front()
                .is_some_and(|r| r.day < f64::from(day) - window)
            {
                rt.history.pop_front();
            }
            while rt
                .intervention_days
                .front()
                .is_some_and(|&d| d + 365 <= day)
            {
                rt.intervention_days.pop_front();
            }
            if rt.intervention_days.len() as u32 >= interventions_cap_per_year {
                continue;
            }
            let capacity = rt.node.battery.spec.capacity_j;
            let reported_low = rt.last_reported_soc.is_some_and(|s| s <= soc_trigger);
            let history: Vec<SocRecord> = rt.history.iter().copied().collect();
            let forecast_low = fit_line(&history).is_some_and(|(slope, intercept)| {
                let ahead = intercept + slope * (f64::from(day) + window);
                ahead / capacity <= soc_trigger
            });
            if reported_low || forecast_low {
                due.push(i);
            }
        }
        due
    }

    fn sortie(&mut self, due: &[usize]) -> Result<()> {
        let refs: Vec<&FleetNode> = due.iter().map(|&i| &self.nodes[i].node).collect();
        let plan = plan_sortie(&refs, &self.uav)?;
        for stop in &plan.stops {
            let idx = due
                .iter()
                .copied()
                .find(|&i| self.nodes[i].node.id == stop.node_id)
                .expect("planned stop refers to a due node");
            let (battery, mut record) = execute_intervention(
                &self.nodes[idx].node,
                &self.uav,
                stop.duration_s,
                self.day,
                &mut self.rng,
            )?;
            record.transit_j = stop.transit_j;
            record.uav_spent_j += stop.transit_j;
            let rt = &mut self.nodes[idx];
            rt.node.battery = battery;
            rt.interventions += 1;
            if record.failed_alignment {
                rt.failed_alignments += 1;
            }
            rt.intervention_days.push_back(self.day);
            rt.history.clear();
            rt.last_reported_soc = None;
            if self.record {
                self.interventions.push(record);
            }
        }
        Ok(())
    }

    fn finish(self, horizon_days: u32, seed: u64) -> SimTrace {
        let nodes = self
            .nodes
            .iter()
            .map(|rt| NodeSummary {
                node_id: rt.node.id.clone(),
                depletion_day: rt.depletion_day,
                min_soc: rt.min_soc,
                final_soc: rt.node.battery.soc(),
                interventions: rt.interventions,
                failed_alignments: rt.failed_alignments,
                equivalent_full_cycles: rt.node.battery.equivalent_full_cycles(),
            })
            .collect();
        SimTrace {
            days: self.days,
            interventions: self.interventions,
            summary: TraceSummary {
                horizon_days,
                seed,
                nodes,
            },
        }
    }
}
