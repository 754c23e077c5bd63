//! Scenario configuration: a strict TOML schema whose unit-bearing keys all
//! carry a unit suffix. Unknown keys are rejected with their key path.

use std::collections::BTreeMap;

use aerprov::battery::{wh_to_joules, BatterySpec, BatteryState, Chemistry};
use aerprov::consumption::{ActivityEvent, LossProfile, NodeProfile, QUARTER_HOURLY};
use aerprov::sim::{DayOrdering, DispatchPolicy, FleetNode, ReportMode, Scenario, UavSpec};
use aerprov::wpt::{
    AlignmentModel, FalloffShape, FeasibilityLimits, IptCoilModel, PositioningRegime, RfAnchor,
    RfLinkModel,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub profile: ProfileConfig,
    pub battery: BatteryConfig,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub chemistries: BTreeMap<String, ChemistryConfig>,
    #[serde(default)]
    pub provisioning: ProvisioningConfig,
    #[serde(default)]
    pub wpt: WptConfig,
    #[serde(default)]
    pub alignment: AlignmentConfig,
    #[serde(default)]
    pub uav: UavConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fleet: Vec<FleetNodeConfig>,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub sleep_power_mw: f64,
    #[serde(default)]
    pub events: Vec<EventConfig>,
    #[serde(default)]
    pub losses: LossConfig,
    /// Published daily total, used instead of the computed one when
    /// reproducing figures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_daily_energy_j: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    pub label: String,
    pub power_mw: f64,
    pub duration_s: f64,
    #[serde(default = "quarter_hourly")]
    pub occurrences_per_day: u32,
}

fn quarter_hourly() -> u32 {
    QUARTER_HOURLY
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    #[serde(default)]
    pub self_discharge_j_per_day: f64,
    #[serde(default)]
    pub conversion_j_per_day: f64,
    #[serde(default)]
    pub leakage_j_per_day: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub chemistry: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_wh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_voltage_v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge_rate_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_discharge_per_year: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_life: Option<u32>,
}

/// Catalog entry override, or a new chemistry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChemistryConfig {
    pub nominal_voltage_v: f64,
    pub charge_rate_c: f64,
    #[serde(default)]
    pub self_discharge_per_year: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_life: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvisioningConfig {
    pub interventions_per_year: u32,
    pub charge_time_s: f64,
}

impl Default for ProvisioningConfig {
    fn default() -> Self {
        Self {
            interventions_per_year: 12,
            charge_time_s: 300.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WptConfig {
    #[serde(default)]
    pub ipt: IptConfig,
    #[serde(default)]
    pub rf: RfConfig,
    #[serde(default)]
    pub assessment: AssessmentConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeName {
    Quadratic,
    Linear,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IptConfig {
    pub peak_efficiency: f64,
    pub reference_offset_mm: f64,
    pub efficiency_at_reference: f64,
    pub cutoff_offset_mm: f64,
    pub coil_width_mm: f64,
    pub coil_length_mm: f64,
    pub shape: ShapeName,
    /// `[offset_mm, efficiency]` points for the table shape.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<[f64; 2]>,
}

impl Default for IptConfig {
    fn default() -> Self {
        Self {
            peak_efficiency: 0.85,
            reference_offset_mm: 12.0,
            efficiency_at_reference: 0.70,
            cutoff_offset_mm: 16.0,
            coil_width_mm: 32.0,
            coil_length_mm: 42.0,
            shape: ShapeName::Quadratic,
            table: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfConfig {
    pub frequency_hz: f64,
    pub combined_gain_db: f64,
    pub path_loss_exponent: f64,
    pub anchor_distance_m: f64,
    pub anchor_tx_dbm: f64,
    pub anchor_rx_dbm: f64,
    pub receivable_ceiling_w: f64,
}

impl Default for RfConfig {
    fn default() -> Self {
        let m = RfLinkModel::default();
        Self {
            frequency_hz: m.frequency_hz,
            combined_gain_db: m.combined_gain_db,
            path_loss_exponent: m.path_loss_exponent,
            anchor_distance_m: m.anchor.distance_m,
            anchor_tx_dbm: m.anchor.tx_dbm,
            anchor_rx_dbm: m.anchor.rx_dbm,
            receivable_ceiling_w: m.receivable_ceiling_w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessmentConfig {
    pub energies_j: Vec<f64>,
    pub transfer_time_s: f64,
    pub coupled_max_power_w: f64,
}

impl Default for AssessmentConfig {
    fn default() -> Self {
        Self {
            energies_j: vec![1000.0, 10_000.0],
            transfer_time_s: 300.0,
            coupled_max_power_w: FeasibilityLimits::default().coupled_max_power_w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignmentConfig {
    pub regime: PositioningRegime,
    pub fine_residual_sigma_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_error_sigma_m: Option<f64>,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            regime: PositioningRegime::Rtk,
            fine_residual_sigma_mm: 0.0,
            coarse_error_sigma_m: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavConfig {
    pub sortie_energy_budget_j: f64,
    pub transit_speed_m_s: f64,
    pub transit_power_w: f64,
    pub hover_power_w: f64,
    /// Defaults to `provisioning.charge_time_s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_charge_time_s: Option<f64>,
    #[serde(default)]
    pub base_x_m: f64,
    #[serde(default)]
    pub base_y_m: f64,
}

impl Default for UavConfig {
    fn default() -> Self {
        let u = UavSpec::default();
        Self {
            sortie_energy_budget_j: u.sortie_energy_budget_j,
            transit_speed_m_s: u.transit_speed_m_s,
            transit_power_w: u.transit_power_w,
            hover_power_w: u.hover_power_w,
            max_charge_time_s: None,
            base_x_m: u.base_position_m.0,
            base_y_m: u.base_position_m.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    FixedCalendar,
    SocTriggered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default = "default_trigger")]
    pub soc_trigger: f64,
    #[serde(default = "default_window")]
    pub prediction_window_days: u32,
    /// Defaults to `provisioning.interventions_per_year`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interventions_cap_per_year: Option<u32>,
}

fn default_trigger() -> f64 {
    0.2
}

fn default_window() -> u32 {
    14
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            kind: PolicyKind::FixedCalendar,
            soc_trigger: default_trigger(),
            prediction_window_days: default_window(),
            interventions_cap_per_year: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportName {
    EveryUplink,
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetNodeConfig {
    pub id: String,
    pub x_m: f64,
    pub y_m: f64,
    #[serde(default = "every_uplink")]
    pub report: ReportName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_threshold_soc: Option<f64>,
    #[serde(default = "full")]
    pub initial_soc: f64,
}

fn every_uplink() -> ReportName {
    ReportName::EveryUplink
}

fn full() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub horizon_days: u32,
    pub seed: u64,
    pub ordering: DayOrdering,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            horizon_days: 3650,
            seed: 0,
            ordering: DayOrdering::ConsumeThenCharge,
        }
    }
}

/// Grids used by `reproduce`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub soc_capacities_wh: Vec<f64>,
    pub soc_horizon_days: u32,
    pub capacities_wh: Vec<f64>,
    pub charge_rates_c: Vec<f64>,
    pub charge_time_max_s: f64,
    pub charge_time_step_s: f64,
    pub interventions_max: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            soc_capacities_wh: vec![0.36, 1.80, 2.88],
            soc_horizon_days: 1825,
            capacities_wh: vec![0.36, 1.80],
            charge_rates_c: vec![1.0, 2.0, 5.0, 10.0],
            charge_time_max_s: 600.0,
            charge_time_step_s: 10.0,
            interventions_max: 52,
        }
    }
}

impl SweepConfig {
    /// `0, step, 2 step, ..` up to and including the maximum.
    pub fn charge_times_s(&self) -> Result<Vec<f64>, CliError> {
        let step_ok = self.charge_time_step_s.is_finite() && self.charge_time_step_s > 0.0;
        let max_ok = self.charge_time_max_s.is_finite() && self.charge_time_max_s >= 0.0;
        if !step_ok || !max_ok {
            return Err(CliError::Config(
                "at `sweep`: charge-time step must be > 0 and maximum >= 0".into(),
            ));
        }
        let steps = (self.charge_time_max_s / self.charge_time_step_s + 1e-9).floor() as u32;
        Ok((0..=steps)
            .map(|i| f64::from(i) * self.charge_time_step_s)
            .collect())
    }
}

impl ScenarioConfig {
    /// Parses TOML text, reporting schema violations with their key path.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.into_inner().message()))
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String, CliError> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn node_profile(&self) -> Result<NodeProfile, CliError> {
        let p = &self.profile;
        let events = p
            .events
            .iter()
            .map(|e| {
                ActivityEvent::new(
                    e.label.clone(),
                    e.power_mw,
                    e.duration_s,
                    e.occurrences_per_day,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let l = p.losses;
        let losses = LossProfile::new(
            l.self_discharge_j_per_day,
            l.conversion_j_per_day,
            l.leakage_j_per_day,
        )?;
        Ok(NodeProfile::new(p.sleep_power_mw, events, losses)?)
    }

    /// Resolves `name` against configured chemistries first, then the catalog.
    pub fn chemistry(&self, name: &str) -> Result<ChemistryConfig, CliError> {
        if let Some(c) = self.chemistries.get(name) {
            return Ok(c.clone());
        }
        let chem = Chemistry::parse(name).ok_or_else(|| {
            CliError::Config(format!(
                "at `battery.chemistry`: unknown chemistry `{name}`"
            ))
        })?;
        let d = chem.defaults();
        Ok(ChemistryConfig {
            nominal_voltage_v: d.nominal_voltage_v,
            charge_rate_c: d.charge_rate_per_h,
            self_discharge_per_year: d.self_discharge_per_year,
            cycle_life: d.cycle_life,
        })
    }

    /// Daily energy used by the closed-form commands: the configured
    /// reference total when present (unless `computed` is forced), else the
    /// value computed from the profile.
    pub fn daily_energy_j(&self, computed: bool) -> Result<f64, CliError> {
        match self.profile.reference_daily_energy_j {
            Some(r) if !computed => Ok(r),
            _ => Ok(self.node_profile()?.daily_energy()?),
        }
    }

    pub fn battery_spec(&self) -> Result<BatterySpec, CliError> {
        let b = &self.battery;
        let base = self.chemistry(&b.chemistry)?;
        let capacity_j = match (b.capacity_wh, b.capacity_j) {
            (Some(wh), None) => wh_to_joules(wh)?,
            (None, Some(j)) => j,
            _ => {
                return Err(CliError::Config(
                    "at `battery`: set exactly one of `capacity_wh` and `capacity_j`".into(),
                ))
            }
        };
        Ok(BatterySpec::new(
            b.chemistry.clone(),
            b.nominal_voltage_v.unwrap_or(base.nominal_voltage_v),
            capacity_j,
            b.charge_rate_c.unwrap_or(base.charge_rate_c),
            b.self_discharge_per_year
                .unwrap_or(base.self_discharge_per_year),
            b.cycle_life.or(base.cycle_life),
        )?)
    }

    pub fn ipt_model(&self) -> Result<IptCoilModel, CliError> {
        let c = &self.wpt.ipt;
        let mut model = match c.shape {
            ShapeName::Table => {
                let points: Vec<(f64, f64)> = c.table.iter().map(|p| (p[0], p[1])).collect();
                let model = IptCoilModel {
                    peak_efficiency: c.peak_efficiency,
                    falloff: 0.0,
                    cutoff_offset_mm: c.cutoff_offset_mm,
                    coil_dims_mm: (c.coil_width_mm, c.coil_length_mm),
                    shape: FalloffShape::Table(points),
                };
                model.validate()?;
                model
            }
            shape => IptCoilModel::calibrated(
                c.peak_efficiency,
                c.reference_offset_mm,
                c.efficiency_at_reference,
                c.cutoff_offset_mm,
                if shape == ShapeName::Linear {
                    FalloffShape::Linear
                } else {
                    FalloffShape::Quadratic
                },
            )?,
        };
        model.coil_dims_mm = (c.coil_width_mm, c.coil_length_mm);
        Ok(model)
    }

    pub fn rf_model(&self) -> Result<RfLinkModel, CliError> {
        let c = self.wpt.rf;
        Ok(RfLinkModel::calibrated(
            c.frequency_hz,
            c.combined_gain_db,
            c.path_loss_exponent,
            RfAnchor {
                distance_m: c.anchor_distance_m,
                tx_dbm: c.anchor_tx_dbm,
                rx_dbm: c.anchor_rx_dbm,
            },
            c.receivable_ceiling_w,
        )?)
    }

    pub fn feasibility_limits(&self) -> Result<FeasibilityLimits, CliError> {
        Ok(FeasibilityLimits {
            coupled_max_power_w: self.wpt.assessment.coupled_max_power_w,
            rf_ceiling_w: self.rf_model()?.receivable_ceiling_w,
        })
    }

    pub fn alignment(&self) -> Result<AlignmentModel, CliError> {
        let mut a =
            AlignmentModel::new(self.alignment.regime, self.alignment.fine_residual_sigma_mm)?;
        if let Some(s) = self.alignment.coarse_error_sigma_m {
            a.coarse_error_sigma_m = s;
        }
        a.validate()?;
        Ok(a)
    }

    pub fn uav(&self) -> Result<UavSpec, CliError> {
        let u = self.uav;
        Ok(UavSpec {
            sortie_energy_budget_j: u.sortie_energy_budget_j,
            transit_speed_m_s: u.transit_speed_m_s,
            transit_power_w: u.transit_power_w,
            hover_power_w: u.hover_power_w,
            max_charge_time_s: u
                .max_charge_time_s
                .unwrap_or(self.provisioning.charge_time_s),
            wpt: self.ipt_model()?,
            alignment: self.alignment()?,
            base_position_m: (u.base_x_m, u.base_y_m),
        })
    }

    pub fn dispatch_policy(&self) -> DispatchPolicy {
        let n = self.provisioning.interventions_per_year;
        match self.policy.kind {
            PolicyKind::FixedCalendar => DispatchPolicy::FixedCalendar {
                interventions_per_year: n,
            },
            PolicyKind::SocTriggered => DispatchPolicy::SocTriggered {
                soc_trigger: self.policy.soc_trigger,
                prediction_window_days: self.policy.prediction_window_days,
                interventions_cap_per_year: self.policy.interventions_cap_per_year.unwrap_or(n),
            },
        }
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        if self.fleet.is_empty() {
            return Err(CliError::Config("at `fleet`: no nodes configured".into()));
        }
        let profile = self.node_profile()?;
        let spec = self.battery_spec()?;
        let nodes = self
            .fleet
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let report_mode = match (n.report, n.report_threshold_soc) {
                    (ReportName::EveryUplink, None) => ReportMode::EveryUplink,
                    (ReportName::Threshold, Some(t)) => ReportMode::Threshold(t),
                    (ReportName::Threshold, None) => {
                        return Err(CliError::Config(format!(
                            "at `fleet[{i}]`: threshold reporting needs `report_threshold_soc`"
                        )))
                    }
                    (ReportName::EveryUplink, Some(_)) => {
                        return Err(CliError::Config(format!(
                            "at `fleet[{i}].report_threshold_soc`: only valid with `report = \"threshold\"`"
                        )))
                    }
                };
                Ok(FleetNode {
                    id: n.id.clone(),
                    position_m: (n.x_m, n.y_m),
                    profile: profile.clone(),
                    battery: BatteryState::with_soc(spec.clone(), n.initial_soc)?,
                    report_mode,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let scenario = Scenario {
            nodes,
            uav: self.uav()?,
            policy: self.dispatch_policy(),
            ordering: self.simulation.ordering,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
