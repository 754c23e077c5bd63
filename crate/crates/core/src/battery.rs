//! Battery chemistry catalog and stored-energy bookkeeping.
//!
//! Charging is linear in time: a battery of capacity `E` charged at `CR`
//! (per hour) for `t` seconds takes in `E * CR / 3600 * t` joules, clamped
//! to the free headroom. Self-discharge removes a constant fraction of the
//! *full* capacity per day, independent of the current state of charge.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, non_negative, positive, Result};

pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const DAYS_PER_YEAR: f64 = 365.0;

/// Converts watt-hours to joules.
pub fn wh_to_joules(energy_wh: f64) -> Result<f64> {
    Ok(non_negative("energy_wh", energy_wh)? * SECONDS_PER_HOUR)
}

pub fn joules_to_wh(energy_j: f64) -> f64 {
    energy_j / SECONDS_PER_HOUR
}

/// Built-in chemistries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chemistry {
    /// Primary cell; cannot be recharged.
    Alkaline,
    /// Lithium cobalt oxide, 1C.
    Lco,
    /// Lithium titanate, 10C.
    Lto,
}

impl Chemistry {
    pub const ALL: [Chemistry; 3] = [Chemistry::Alkaline, Chemistry::Lco, Chemistry::Lto];

    pub fn label(self) -> &'static str {
        match self {
            Chemistry::Alkaline => "alkaline",
            Chemistry::Lco => "lco",
            Chemistry::Lto => "lto",
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(label))
    }

    /// Catalog defaults for this chemistry.
    ///
    /// The LTO nominal voltage (2.4 V) and all self-discharge rates (zero)
    /// are catalog defaults meant to be overridden from configuration.
    pub fn defaults(self) -> ChemistryDefaults {
        match self {
            Chemistry::Alkaline => ChemistryDefaults {
                nominal_voltage_v: 1.5,
                charge_rate_per_h: 0.0,
                self_discharge_per_year: 0.0,
                cycle_life: None,
            },
            Chemistry::Lco => ChemistryDefaults {
                nominal_voltage_v: 3.6,
                charge_rate_per_h: 1.0,
                self_discharge_per_year: 0.0,
                cycle_life: Some(500),
            },
            Chemistry::Lto => ChemistryDefaults {
                nominal_voltage_v: 2.4,
                charge_rate_per_h: 10.0,
                self_discharge_per_year: 0.0,
                cycle_life: Some(20_000),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChemistryDefaults {
    pub nominal_voltage_v: f64,
    /// Zero marks a non-rechargeable chemistry.
    pub charge_rate_per_h: f64,
    pub self_discharge_per_year: f64,
    pub cycle_life: Option<u32>,
}

/// Static parameters of a battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    pub chemistry: String,
    pub nominal_voltage_v: f64,
    pub capacity_j: f64,
    /// C-rate per hour; `0.0` means the cell cannot be charged.
    pub charge_rate_per_h: f64,
    /// Fraction of full capacity lost per year.
    pub self_discharge_per_year: f64,
    pub cycle_life: Option<u32>,
}

impl BatterySpec {
    pub fn new(
        chemistry: impl Into<String>,
        nominal_voltage_v: f64,
        capacity_j: f64,
        charge_rate_per_h: f64,
        self_discharge_per_year: f64,
        cycle_life: Option<u32>,
    ) -> Result<Self> {
        let spec = Self {
            chemistry: chemistry.into(),
            nominal_voltage_v,
            capacity_j,
            charge_rate_per_h,
            self_discharge_per_year,
            cycle_life,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from the catalog entry for `chemistry`.
    pub fn from_catalog(chemistry: Chemistry, capacity_j: f64) -> Result<Self> {
        let d = chemistry.defaults();
        Self::new(
            chemistry.label(),
            d.nominal_voltage_v,
            capacity_j,
            d.charge_rate_per_h,
            d.self_discharge_per_year,
            d.cycle_life,
        )
    }

    pub fn lco(capacity_j: f64) -> Result<Self> {
        Self::from_catalog(Chemistry::Lco, capacity_j)
    }

    pub fn lto(capacity_j: f64) -> Result<Self> {
        Self::from_catalog(Chemistry::Lto, capacity_j)
    }

    pub fn alkaline(capacity_j: f64) -> Result<Self> {
        Self::from_catalog(Chemistry::Alkaline, capacity_j)
    }

    pub fn with_charge_rate(mut self, charge_rate_per_h: f64) -> Result<Self> {
        self.charge_rate_per_h = charge_rate_per_h;
        self.validate()?;
        Ok(self)
    }

    pub fn with_self_discharge(mut self, per_year: f64) -> Result<Self> {
        self.self_discharge_per_year = per_year;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("capacity_j", self.capacity_j)?;
        positive("nominal_voltage_v", self.nominal_voltage_v)?;
        non_negative("charge_rate_per_h", self.charge_rate_per_h)?;
        let sd = self.self_discharge_per_year;
        if !(0.0..1.0).contains(&sd) {
            return Err(invalid(
                "self_discharge_per_year",
                format!("must be in [0, 1), got {sd}"),
            ));
        }
        Ok(())
    }

    pub fn is_rechargeable(&self) -> bool {
        self.charge_rate_per_h > 0.0
    }

    pub fn capacity_wh(&self) -> f64 {
        joules_to_wh(self.capacity_j)
    }

    /// Energy taken in by an empty battery charged for `duration_s`, without
    /// the headroom clamp.
    pub fn charge_candidate(&self, duration_s: f64) -> f64 {
        self.capacity_j * (self.charge_rate_per_h / SECONDS_PER_HOUR) * duration_s
    }

    /// Seconds needed to put `energy_j` into the battery at its C-rate.
    /// Infinite for non-rechargeable cells.
    pub fn time_to_store(&self, energy_j: f64) -> f64 {
        if energy_j <= 0.0 {
            return 0.0;
        }
        if !self.is_rechargeable() {
            return f64::INFINITY;
        }
        energy_j * SECONDS_PER_HOUR / (self.capacity_j * self.charge_rate_per_h)
    }

    /// Self-discharge expressed as joules per day.
    pub fn self_discharge_j_per_day(&self) -> f64 {
        self.capacity_j * self.self_discharge_per_year / DAYS_PER_YEAR
    }
}

/// Energy currently held by a battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryState {
    pub spec: BatterySpec,
    stored_j: f64,
    cumulative_charged_j: f64,
}

impl BatteryState {
    pub fn new(spec: BatterySpec, stored_j: f64) -> Result<Self> {
        spec.validate()?;
        non_negative("stored_j", stored_j)?;
        if stored_j > spec.capacity_j {
            return Err(invalid(
                "stored_j",
                format!("{stored_j} exceeds capacity {}", spec.capacity_j),
            ));
        }
        Ok(Self {
            spec,
            stored_j,
            cumulative_charged_j: 0.0,
        })
    }

    pub fn full(spec: BatterySpec) -> Self {
        let stored_j = spec.capacity_j;
        Self {
            spec,
            stored_j,
            cumulative_charged_j: 0.0,
        }
    }

    pub fn empty(spec: BatterySpec) -> Self {
        Self {
            spec,
            stored_j: 0.0,
            cumulative_charged_j: 0.0,
        }
    }

    pub fn with_soc(spec: BatterySpec, soc: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&soc) {
            return Err(invalid("soc", format!("must be in [0, 1], got {soc}")));
        }
        let stored = spec.capacity_j * soc;
        Self::new(spec, stored)
    }

    pub fn stored_j(&self) -> f64 {
        self.stored_j
    }

    pub fn cumulative_charged_j(&self) -> f64 {
        self.cumulative_charged_j
    }

    pub fn headroom_j(&self) -> f64 {
        self.spec.capacity_j - self.stored_j
    }

    pub fn soc(&self) -> f64 {
        (self.stored_j / self.spec.capacity_j).clamp(0.0, 1.0)
    }

    pub fn is_empty(&self) -> bool {
        self.stored_j <= 0.0
    }

    /// Charges for `duration_s` seconds and returns the new state together
    /// with the energy actually stored.
    pub fn charge(&self, duration_s: f64) -> (Self, f64) {
        let duration_s = duration_s.max(0.0);
        let amount = self
            .spec
            .charge_candidate(duration_s)
            .min(self.headroom_j())
            .max(0.0);
        let mut next = self.clone();
        next.stored_j = (self.stored_j + amount).min(self.spec.capacity_j);
        next.cumulative_charged_j += amount;
        (next, amount)
    }

    /// Applies `days` of self-discharge.
    pub fn self_discharge(&self, days: f64) -> Self {
        let loss = self.spec.self_discharge_j_per_day() * days.max(0.0);
        let mut next = self.clone();
        next.stored_j = (self.stored_j - loss).max(0.0);
        next
    }

    /// Removes `energy_j` and returns the new state and the unmet shortfall.
    pub fn drain(&self, energy_j: f64) -> (Self, f64) {
        let energy_j = energy_j.max(0.0);
        let mut next = self.clone();
        let shortfall = (energy_j - self.stored_j).max(0.0);
        next.stored_j = (self.stored_j - energy_j).max(0.0);
        (next, shortfall)
    }

    /// Charge throughput in equivalent full cycles.
    pub fn equivalent_full_cycles(&self) -> f64 {
        self.cumulative_charged_j / self.spec.capacity_j
    }

    /// True once the throughput crosses `fraction` of the rated cycle life.
    /// Cells without a rated cycle life never warn.
    pub fn cycle_warning(&self, fraction: f64) -> bool {
        match self.spec.cycle_life {
            Some(life) => self.equivalent_full_cycles() >= fraction * f64::from(life),
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lco(capacity_j: f64) -> BatterySpec {
        BatterySpec::lco(capacity_j).unwrap()
    }

    #[test]
    fn wh_conversion() {
        assert_relative_eq!(wh_to_joules(1.80).unwrap(), 6480.0, epsilon = 1e-9);
        assert_eq!(wh_to_joules(0.0).unwrap(), 0.0);
        assert_relative_eq!(wh_to_joules(2.88).unwrap(), 10368.0, epsilon = 1e-9);
        assert!(wh_to_joules(-1.0).is_err());
    }

    #[test]
    fn charge_examples() {
        let (s, stored) = BatteryState::empty(lco(6480.0)).charge(300.0);
        assert_relative_eq!(stored, 540.0, epsilon = 1e-9);
        assert_relative_eq!(s.stored_j(), 540.0, epsilon = 1e-9);
        assert_relative_eq!(s.cumulative_charged_j(), 540.0, epsilon = 1e-9);

        let start = BatteryState::new(lco(6480.0), 6000.0).unwrap();
        let (s, stored) = start.charge(300.0);
        assert_relative_eq!(stored, 480.0, epsilon = 1e-9);
        assert_eq!(s.soc(), 1.0);

        let lto = BatterySpec::lto(10368.0).unwrap();
        let (_, stored) = BatteryState::empty(lto).charge(300.0);
        assert_relative_eq!(stored, 8640.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_duration_is_noop() {
        let start = BatteryState::new(lco(6480.0), 1234.0).unwrap();
        let (s, stored) = start.charge(0.0);
        assert_eq!(stored, 0.0);
        assert_eq!(s, start);
    }

    #[test]
    fn alkaline_does_not_charge() {
        let spec = BatterySpec::alkaline(21_000.0).unwrap();
        assert!(!spec.is_rechargeable());
        let (_, stored) = BatteryState::empty(spec).charge(3600.0);
        assert_eq!(stored, 0.0);
    }

    #[test]
    fn self_discharge_examples() {
        let spec = lco(6480.0).with_self_discharge(0.03).unwrap();
        let full = BatteryState::full(spec.clone());
        let after = full.self_discharge(365.0);
        assert_relative_eq!(full.stored_j() - after.stored_j(), 194.4, epsilon = 1e-9);
        assert_eq!(full.self_discharge(0.0), full);

        // 5 J/day loss candidate on a 1 J battery floors at zero
        let spec = lco(365.0 * 5.0 / 0.5).with_self_discharge(0.5).unwrap();
        let low = BatteryState::new(spec, 1.0).unwrap();
        assert_eq!(low.self_discharge(1.0).stored_j(), 0.0);
    }

    #[test]
    fn soc_examples() {
        assert_eq!(BatteryState::new(lco(6480.0), 3240.0).unwrap().soc(), 0.5);
        assert_eq!(BatteryState::full(lco(6480.0)).soc(), 1.0);
        assert_eq!(BatteryState::empty(lco(6480.0)).soc(), 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(BatterySpec::lco(0.0).is_err());
        assert!(BatterySpec::new("x", 0.0, 1.0, 1.0, 0.0, None).is_err());
        assert!(BatterySpec::new("x", 3.6, 1.0, -1.0, 0.0, None).is_err());
        assert!(BatterySpec::new("x", 3.6, 1.0, 1.0, 1.0, None).is_err());
        assert!(BatteryState::new(lco(10.0), 11.0).is_err());
    }

    #[test]
    fn cycle_warning_tracks_throughput() {
        let spec = BatterySpec::new("lco", 3.6, 100.0, 1.0, 0.0, Some(2)).unwrap();
        let mut s = BatteryState::empty(spec);
        for _ in 0..3 {
            s = s.charge(3600.0).0.drain(100.0).0;
        }
        assert_relative_eq!(s.equivalent_full_cycles(), 3.0, epsilon = 1e-9);
        assert!(s.cycle_warning(1.0));
        assert!(!s.cycle_warning(2.0));
    }

    #[test]
    fn catalog_lookup() {
        assert_eq!(Chemistry::parse("LTO"), Some(Chemistry::Lto));
        assert_eq!(Chemistry::parse("nimh"), None);
        assert_eq!(Chemistry::Lco.defaults().nominal_voltage_v, 3.6);
        assert_eq!(Chemistry::Lto.defaults().charge_rate_per_h, 10.0);
    }

    proptest! {
        #[test]
        fn charge_stays_within_capacity(
            capacity in 1.0f64..1e6,
            soc in 0.0f64..=1.0,
            rate in 0.0f64..20.0,
            duration in 0.0f64..10_000.0,
        ) {
            let spec = BatterySpec::new("x", 3.6, capacity, rate, 0.0, None).unwrap();
            let s = BatteryState::with_soc(spec, soc).unwrap();
            let (next, stored) = s.charge(duration);
            prop_assert!(next.stored_j() <= capacity);
            prop_assert!(stored >= 0.0);
            prop_assert!(next.cumulative_charged_j() >= s.cumulative_charged_j());
        }

        #[test]
        fn split_charge_matches_single_charge(
            capacity in 1.0f64..1e5,
            soc in 0.0f64..=1.0,
            rate in 0.1f64..20.0,
            t1 in 0.0f64..2_000.0,
            t2 in 0.0f64..2_000.0,
        ) {
            let spec = BatterySpec::new("x", 3.6, capacity, rate, 0.0, None).unwrap();
            let s = BatteryState::with_soc(spec, soc).unwrap();
            let (_, whole) = s.charge(t1 + t2);
            let (mid, first) = s.charge(t1);
            let (_, second) = mid.charge(t2);
            prop_assert!((whole - (first + second)).abs() <= 1e-9 * capacity);
        }

        #[test]
        fn empty_battery_matches_linear_candidate(
            capacity in 1.0f64..1e5,
            rate in 0.1f64..20.0,
            frac in 0.0f64..=1.0,
        ) {
            let spec = BatterySpec::new("x", 3.6, capacity, rate, 0.0, None).unwrap();
            let duration = frac * SECONDS_PER_HOUR / rate;
            let (_, stored) = BatteryState::empty(spec).charge(duration);
            let expected = capacity * rate / 3600.0 * duration;
            prop_assert!((stored - expected).abs() <= 1e-9 * capacity);
        }

        #[test]
        fn soc_is_scale_invariant(capacity in 1.0f64..1e5, soc in 0.0f64..=1.0) {
            let a = BatteryState::with_soc(lco(capacity), soc).unwrap();
            let b = BatteryState::new(lco(2.0 * capacity), 2.0 * a.stored_j()).unwrap();
            prop_assert!((a.soc() - b.soc()).abs() < 1e-12);
        }

        #[test]
        fn self_discharge_never_negative(
            soc in 0.0f64..=1.0,
            rate in 0.0f64..0.99,
            days in 0.0f64..5_000.0,
        ) {
            let spec = lco(1000.0).with_self_discharge(rate).unwrap();
            let s = BatteryState::with_soc(spec, soc).unwrap().self_discharge(days);
            prop_assert!(s.stored_j() >= 0.0);
        }
    }
}
