//! Closed-form provisioning model.
//!
//! * charged per intervention: `E_bat * CR / 3600 * T`
//! * minimum bridging energy: `E_day * 365 / n`
//! * autonomy: `365 * E_bat / (365 * E_day - E_charged * n)`, unlimited when
//!   the denominator is not positive
//! * minimum capacity: `max(E_req * 3600 / (CR * T), E_req)`
//!
//! `E_day` is consumption plus losses. The parameter sweeps behind the
//! published figures live at the bottom of this module.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::battery::{BatterySpec, DAYS_PER_YEAR, SECONDS_PER_HOUR};
use crate::error::{invalid, non_negative, positive, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvisioningParams {
    pub interventions_per_year: u32,
    pub charge_time_s: f64,
    pub battery: BatterySpec,
    pub daily_energy_j: f64,
}

impl ProvisioningParams {
    pub fn new(
        interventions_per_year: u32,
        charge_time_s: f64,
        battery: BatterySpec,
        daily_energy_j: f64,
    ) -> Result<Self> {
        let params = Self {
            interventions_per_year,
            charge_time_s,
            battery,
            daily_energy_j,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.interventions_per_year == 0 {
            return Err(invalid("interventions_per_year", "must be >= 1"));
        }
        non_negative("charge_time_s", self.charge_time_s)?;
        non_negative("daily_energy_j", self.daily_energy_j)?;
        self.battery.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AutonomyOutcome {
    Finite(f64),
    Unlimited,
}

impl AutonomyOutcome {
    pub fn days(self) -> Option<f64> {
        match self {
            AutonomyOutcome::Finite(d) => Some(d),
            AutonomyOutcome::Unlimited => None,
        }
    }

    pub fn is_unlimited(self) -> bool {
        matches!(self, AutonomyOutcome::Unlimited)
    }
}

/// `inf` for unlimited, otherwise the un-rounded day count.
impl fmt::Display for AutonomyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AutonomyOutcome::Finite(d) => write!(f, "{d}"),
            AutonomyOutcome::Unlimited => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutonomyResult {
    pub outcome: AutonomyOutcome,
    pub charged_per_intervention_j: f64,
    pub required_min_j: f64,
    /// Whether the capacity alone covers one inter-intervention gap. Reported
    /// separately; it does not affect `outcome`.
    pub bridges_interval: bool,
}

/// Energy stored by one intervention, not clamped to the battery headroom.
pub fn charged_per_intervention(params: &ProvisioningParams) -> f64 {
    params.battery.charge_candidate(params.charge_time_s)
}

/// Energy needed to bridge the gap between two evenly spaced interventions.
pub fn required_min_energy(daily_energy_j: f64, interventions_per_year: u32) -> Result<f64> {
    if interventions_per_year == 0 {
        return Err(invalid("interventions_per_year", "must be >= 1"));
    }
    non_negative("daily_energy_j", daily_energy_j)?;
    Ok(daily_energy_j * DAYS_PER_YEAR / f64::from(interventions_per_year))
}

pub fn autonomy(params: &ProvisioningParams) -> Result<AutonomyResult> {
    params.validate()?;
    let n = f64::from(params.interventions_per_year);
    let charged = charged_per_intervention(params);
    let required = required_min_energy(params.daily_energy_j, params.interventions_per_year)?;
    let denominator = DAYS_PER_YEAR * params.daily_energy_j - charged * n;
    let outcome = if denominator <= 0.0 {
        AutonomyOutcome::Unlimited
    } else {
        AutonomyOutcome::Finite(DAYS_PER_YEAR * params.battery.capacity_j / denominator)
    };
    Ok(AutonomyResult {
        outcome,
        charged_per_intervention_j: charged,
        required_min_j: required,
        bridges_interval: params.battery.capacity_j > required,
    })
}

/// Autonomy with no interventions at all: the battery simply runs down.
pub fn unassisted_autonomy(capacity_j: f64, daily_energy_j: f64) -> Result<AutonomyOutcome> {
    positive("capacity_j", capacity_j)?;
    non_negative("daily_energy_j", daily_energy_j)?;
    Ok(if daily_energy_j == 0.0 {
        AutonomyOutcome::Unlimited
    } else {
        AutonomyOutcome::Finite(capacity_j / daily_energy_j)
    })
}

/// Which side of the capacity bound is the larger one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BindingTerm {
    /// `E_req * 3600 / (CR * T)`: the charge rate limits refill per visit.
    ChargeRate,
    /// `E_req`: the battery must hold a full gap's energy.
    Bridging,
}

impl fmt::Display for BindingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BindingTerm::ChargeRate => "charge-rate term binds",
            BindingTerm::Bridging => "bridging term binds",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityBound {
    pub required_min_j: f64,
    pub charge_rate_term_j: f64,
    /// Open lower bound: capacities strictly above this sustain the node.
    pub bound_j: f64,
    pub binding: BindingTerm,
}

pub fn capacity_bound(
    daily_energy_j: f64,
    interventions_per_year: u32,
    charge_rate_per_h: f64,
    charge_time_s: f64,
) -> Result<CapacityBound> {
    positive("charge_rate_per_h", charge_rate_per_h)?;
    positive("charge_time_s", charge_time_s)?;
    let required = required_min_energy(daily_energy_j, interventions_per_year)?;
    let rate_term = required * SECONDS_PER_HOUR / (charge_rate_per_h * charge_time_s);
    // Ties go to the bridging term (CR * T = 3600 reduces the bound to E_req).
    let (bound_j, binding) = if rate_term > required {
        (rate_term, BindingTerm::ChargeRate)
    } else {
        (required, BindingTerm::Bridging)
    };
    Ok(CapacityBound {
        required_min_j: required,
        charge_rate_term_j: rate_term,
        bound_j,
        binding,
    })
}

pub fn min_capacity(
    daily_energy_j: f64,
    interventions_per_year: u32,
    charge_rate_per_h: f64,
    charge_time_s: f64,
) -> Result<f64> {
    capacity_bound(
        daily_energy_j,
        interventions_per_year,
        charge_rate_per_h,
        charge_time_s,
    )
    .map(|b| b.bound_j)
}

/// One point of the autonomy-versus-charge-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AutonomyRow {
    pub capacity_wh: f64,
    pub charge_rate_c: f64,
    pub charge_time_s: f64,
    pub autonomy_days: AutonomyOutcome,
}

/// Evaluates autonomy for every `(capacity, rate, charge_time)` combination,
/// ordered capacity-major, then rate, then charge time.
pub fn sweep_autonomy_vs_charge_time(
    capacities_j: &[f64],
    charge_rates_per_h: &[f64],
    interventions_per_year: u32,
    charge_times_s: &[f64],
    daily_energy_j: f64,
) -> Result<Vec<AutonomyRow>> {
    if capacities_j.is_empty() || charge_rates_per_h.is_empty() || charge_times_s.is_empty() {
        return Err(invalid("sweep", "every input list must be nonempty"));
    }
    let mut rows =
        Vec::with_capacity(capacities_j.len() * charge_rates_per_h.len() * charge_times_s.len());
    for &capacity in capacities_j {
        for &rate in charge_rates_per_h {
            let battery = BatterySpec::new("sweep", 3.6, capacity, rate, 0.0, None)?;
            for &t in charge_times_s {
                let params = ProvisioningParams::new(
                    interventions_per_year,
                    t,
                    battery.clone(),
                    daily_energy_j,
                )?;
                rows.push(AutonomyRow {
                    capacity_wh: capacity / SECONDS_PER_HOUR,
                    charge_rate_c: rate,
                    charge_time_s: t,
                    autonomy_days: autonomy(&params)?.outcome,
                });
            }
        }
    }
    Ok(rows)
}

/// A named daily-energy profile for the capacity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepProfile {
    pub name: String,
    pub daily_energy_j: f64,
}

/// A named charge rate for the capacity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepChemistry {
    pub name: String,
    pub charge_rate_per_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityRow {
    pub profile: String,
    pub chemistry: String,
    pub charge_rate_c: f64,
    pub interventions_per_year: u32,
    pub min_capacity_j: f64,
    pub min_capacity_wh: f64,
}

/// Minimum capacity per `(profile, chemistry, n)`, ordered in that nesting.
pub fn sweep_capacity_vs_interventions(
    profiles: &[SweepProfile],
    chemistries: &[SweepChemistry],
    charge_time_s: f64,
    interventions: &[u32],
) -> Result<Vec<CapacityRow>> {
    if profiles.is_empty() || chemistries.is_empty() || interventions.is_empty() {
        return Err(invalid("sweep", "every input list must be nonempty"));
    }
    let mut rows = Vec::new();
    for profile in profiles {
        for chem in chemistries {
            for &n in interventions {
                let bound = min_capacity(
                    profile.daily_energy_j,
                    n,
                    chem.charge_rate_per_h,
                    charge_time_s,
                )?;
                rows.push(CapacityRow {
                    profile: profile.name.clone(),
                    chemistry: chem.name.clone(),
                    charge_rate_c: chem.charge_rate_per_h,
                    interventions_per_year: n,
                    min_capacity_j: bound,
                    min_capacity_wh: bound / SECONDS_PER_HOUR,
                });
            }
        }
    }
    Ok(rows)
}

/// Writes the autonomy grid as CSV; unlimited autonomy is written as `inf`.
pub fn write_autonomy_csv<W: Write>(rows: &[AutonomyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "capacity_wh",
        "charge_rate_c",
        "charge_time_s",
        "autonomy_days",
    ])?;
    for r in rows {
        w.write_record([
            r.capacity_wh.to_string(),
            r.charge_rate_c.to_string(),
            r.charge_time_s.to_string(),
            r.autonomy_days.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_capacity_csv<W: Write>(rows: &[CapacityRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record([
            "profile",
            "chemistry",
            "charge_rate_c",
            "interventions_per_year",
            "min_capacity_j",
            "min_capacity_wh",
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses an autonomy column value written by [`write_autonomy_csv`].
pub fn parse_autonomy(field: &str) -> Option<AutonomyOutcome> {
    match field {
        "inf" => Some(AutonomyOutcome::Unlimited),
        s => s.parse().ok().map(AutonomyOutcome::Finite),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TREE: f64 = 22.7;
    const GAS: f64 = 227.9;

    fn params(capacity: f64, rate: f64, t: f64, n: u32, daily: f64) -> ProvisioningParams {
        let battery = BatterySpec::new("x", 3.6, capacity, rate, 0.0, None).unwrap();
        ProvisioningParams::new(n, t, battery, daily).unwrap()
    }

    #[test]
    fn charged_examples() {
        assert_abs_diff_eq!(
            charged_per_intervention(&params(6480.0, 1.0, 300.0, 12, TREE)),
            540.0,
            epsilon = 1e-9
        );
        assert_eq!(
            charged_per_intervention(&params(6480.0, 1.0, 0.0, 12, TREE)),
            0.0
        );
        assert_abs_diff_eq!(
            charged_per_intervention(&params(10368.0, 1.0, 300.0, 12, TREE)),
            864.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn required_min_examples() {
        assert_abs_diff_eq!(
            required_min_energy(TREE, 12).unwrap(),
            690.46,
            epsilon = 0.005
        );
        assert_abs_diff_eq!(
            required_min_energy(GAS, 12).unwrap(),
            6931.958,
            epsilon = 1e-3
        );
        assert_eq!(required_min_energy(7.25, 365).unwrap(), 7.25);
        assert!(required_min_energy(1.0, 0).is_err());
    }

    #[test]
    fn autonomy_examples() {
        let r = autonomy(&params(6480.0, 1.0, 300.0, 12, TREE)).unwrap();
        // 365 * 6480 / (8285.5 - 6480)
        assert_abs_diff_eq!(
            r.outcome.days().unwrap(),
            2_365_200.0 / 1805.5,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(r.outcome.days().unwrap(), 1310.2, epsilon = 0.5);
        assert!(r.bridges_interval);

        let r = autonomy(&params(10368.0, 1.0, 300.0, 12, TREE)).unwrap();
        assert!(r.outcome.is_unlimited());

        let r = autonomy(&params(6480.0, 1.0, 0.0, 12, TREE)).unwrap();
        assert_abs_diff_eq!(r.outcome.days().unwrap(), 6480.0 / TREE, epsilon = 1e-9);
        assert_abs_diff_eq!(r.outcome.days().unwrap(), 285.5, epsilon = 0.05);
    }

    #[test]
    fn zero_drain_is_unlimited() {
        let r = autonomy(&params(100.0, 1.0, 0.0, 1, 0.0)).unwrap();
        assert!(r.outcome.is_unlimited());
        assert!(unassisted_autonomy(100.0, 0.0).unwrap().is_unlimited());
    }

    #[test]
    fn bridges_flag_is_independent_of_outcome() {
        // huge refill, tiny battery: unlimited by the denominator, still does not bridge
        let r = autonomy(&params(500.0, 100.0, 300.0, 12, TREE)).unwrap();
        assert!(r.outcome.is_unlimited());
        assert!(!r.bridges_interval);
    }

    #[test]
    fn capacity_examples() {
        let b = capacity_bound(TREE, 12, 1.0, 300.0).unwrap();
        assert_abs_diff_eq!(b.bound_j, 8285.5, epsilon = 1e-9);
        assert_abs_diff_eq!(b.bound_j / 3600.0, 2.302, epsilon = 5e-4);
        assert_eq!(b.binding, BindingTerm::ChargeRate);

        let b = capacity_bound(GAS, 12, 10.0, 300.0).unwrap();
        assert_abs_diff_eq!(b.bound_j, 8318.35, epsilon = 1e-6);
        assert!(b.bound_j > b.required_min_j);

        let b = capacity_bound(TREE, 12, 1.0, 3600.0).unwrap();
        assert_abs_diff_eq!(b.bound_j, b.required_min_j, epsilon = 1e-9);
        assert_eq!(b.binding, BindingTerm::Bridging);

        assert!(min_capacity(TREE, 12, 0.0, 300.0).is_err());
        assert!(min_capacity(TREE, 12, 1.0, 0.0).is_err());
    }

    #[test]
    fn autonomy_sweep_shape() {
        let caps = [0.36 * 3600.0, 1.80 * 3600.0];
        let rates = [1.0, 2.0, 5.0, 10.0];
        let times: Vec<f64> = (0..=60).map(|i| f64::from(i) * 10.0).collect();
        let rows = sweep_autonomy_vs_charge_time(&caps, &rates, 12, &times, TREE).unwrap();
        assert_eq!(rows.len(), 2 * 4 * times.len());
        for curve in rows.chunks(times.len()) {
            assert_eq!(curve[0].charge_time_s, 0.0);
            let zero = curve[0].autonomy_days.days().unwrap();
            assert_abs_diff_eq!(zero, curve[0].capacity_wh * 3600.0 / TREE, epsilon = 1e-9);
            let mut prev = 0.0;
            for row in curve {
                let d = row.autonomy_days.days().unwrap_or(f64::INFINITY);
                assert!(d >= prev);
                prev = d;
            }
        }
        let hit = rows
            .iter()
            .find(|r| {
                (r.capacity_wh - 1.8).abs() < 1e-12
                    && r.charge_rate_c == 1.0
                    && r.charge_time_s == 300.0
            })
            .unwrap();
        assert_abs_diff_eq!(hit.autonomy_days.days().unwrap(), 1310.2, epsilon = 0.5);
    }

    #[test]
    fn capacity_sweep_rows() {
        let profiles = [
            SweepProfile {
                name: "tree".into(),
                daily_energy_j: TREE,
            },
            SweepProfile {
                name: "gas".into(),
                daily_energy_j: GAS,
            },
        ];
        let chems = [
            SweepChemistry {
                name: "lco".into(),
                charge_rate_per_h: 1.0,
            },
            SweepChemistry {
                name: "lto".into(),
                charge_rate_per_h: 10.0,
            },
        ];
        let ns: Vec<u32> = (1..=52).collect();
        let rows = sweep_capacity_vs_interventions(&profiles, &chems, 300.0, &ns).unwrap();
        assert_eq!(rows.len(), 4 * 52);
        let pick = |p: &str, c: &str, n: u32| {
            rows.iter()
                .find(|r| r.profile == p && r.chemistry == c && r.interventions_per_year == n)
                .unwrap()
                .min_capacity_j
        };
        assert_abs_diff_eq!(pick("tree", "lco", 12), 8285.5, epsilon = 1e-6);
        assert_abs_diff_eq!(pick("gas", "lto", 12), 8318.35, epsilon = 1e-6);
        for curve in rows.chunks(52) {
            assert!(curve
                .windows(2)
                .all(|w| w[1].min_capacity_j <= w[0].min_capacity_j));
        }
        assert!(sweep_capacity_vs_interventions(&[], &chems, 300.0, &ns).is_err());
    }

    #[test]
    fn csv_round_trip_of_autonomy_column() {
        let rows =
            sweep_autonomy_vs_charge_time(&[1296.0], &[10.0], 12, &[0.0, 300.0], TREE).unwrap();
        let mut buf = Vec::new();
        write_autonomy_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "capacity_wh,charge_rate_c,charge_time_s,autonomy_days"
        );
        let parsed: Vec<_> = lines
            .map(|l| parse_autonomy(l.rsplit(',').next().unwrap()).unwrap())
            .collect();
        assert_eq!(
            parsed,
            vec![rows[0].autonomy_days, AutonomyOutcome::Unlimited]
        );
    }
}
