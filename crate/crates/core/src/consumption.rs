//! Daily node energy budget: duty-cycled activity events on top of a sleep
//! floor, plus parasitic losses.

use serde::{Deserialize, Serialize};

use crate::battery::BatterySpec;
use crate::error::{invalid, non_negative, Result};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// One transmission per 15 minutes.
pub const QUARTER_HOURLY: u32 = 96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityEvent {
    pub label: String,
    pub power_mw: f64,
    pub duration_s: f64,
    pub occurrences_per_day: u32,
}

impl ActivityEvent {
    pub fn new(
        label: impl Into<String>,
        power_mw: f64,
        duration_s: f64,
        occurrences_per_day: u32,
    ) -> Result<Self> {
        let event = Self {
            label: label.into(),
            power_mw,
            duration_s,
            occurrences_per_day,
        };
        event.validate()?;
        Ok(event)
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("power_mw", self.power_mw)?;
        non_negative("duration_s", self.duration_s)?;
        Ok(())
    }

    pub fn active_seconds_per_day(&self) -> f64 {
        self.duration_s * f64::from(self.occurrences_per_day)
    }
}

/// Joules spent by a single occurrence of `event`.
pub fn event_energy(event: &ActivityEvent) -> f64 {
    event.power_mw / 1000.0 * event.duration_s
}

/// Parasitic losses in joules per day.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossProfile {
    pub self_discharge_j_per_day: f64,
    pub conversion_j_per_day: f64,
    pub leakage_j_per_day: f64,
}

impl LossProfile {
    pub fn new(self_discharge: f64, conversion: f64, leakage: f64) -> Result<Self> {
        let losses = Self {
            self_discharge_j_per_day: self_discharge,
            conversion_j_per_day: conversion,
            leakage_j_per_day: leakage,
        };
        losses.validate()?;
        Ok(losses)
    }

    /// Losses whose self-discharge term is taken from `battery`.
    pub fn from_battery(battery: &BatterySpec, conversion: f64, leakage: f64) -> Result<Self> {
        Self::new(battery.self_discharge_j_per_day(), conversion, leakage)
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("self_discharge_j_per_day", self.self_discharge_j_per_day)?;
        non_negative("conversion_j_per_day", self.conversion_j_per_day)?;
        non_negative("leakage_j_per_day", self.leakage_j_per_day)?;
        Ok(())
    }
}

pub fn daily_losses(losses: &LossProfile) -> f64 {
    losses.self_discharge_j_per_day + losses.conversion_j_per_day + losses.leakage_j_per_day
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeProfile {
    pub sleep_power_mw: f64,
    pub events: Vec<ActivityEvent>,
    #[serde(default)]
    pub losses: LossProfile,
}

impl NodeProfile {
    pub fn new(
        sleep_power_mw: f64,
        events: Vec<ActivityEvent>,
        losses: LossProfile,
    ) -> Result<Self> {
        let profile = Self {
            sleep_power_mw,
            events,
            losses,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Low-power tree monitoring node: MCU sleep, one SF12 LoRaWAN uplink
    /// and one temperature read every 15 minutes.
    pub fn tree_node() -> Self {
        Self::lorawan_node(ActivityEvent {
            label: "Sensor".into(),
            power_mw: 65.7,
            duration_s: 0.19,
            occurrences_per_day: QUARTER_HOURLY,
        })
    }

    /// Air-quality node whose gas sensor heats for 92 s per measurement.
    pub fn gas_node() -> Self {
        Self::lorawan_node(ActivityEvent {
            label: "Sensor".into(),
            power_mw: 23.4,
            duration_s: 92.0,
            occurrences_per_day: QUARTER_HOURLY,
        })
    }

    fn lorawan_node(sensor: ActivityEvent) -> Self {
        Self {
            sleep_power_mw: 0.025,
            events: vec![
                ActivityEvent {
                    label: "LoRaWAN (SF12)".into(),
                    power_mw: 111.15,
                    duration_s: 1.81,
                    occurrences_per_day: QUARTER_HOURLY,
                },
                sensor,
            ],
            losses: LossProfile::default(),
        }
    }

    pub fn active_seconds_per_day(&self) -> f64 {
        self.events
            .iter()
            .map(ActivityEvent::active_seconds_per_day)
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("sleep_power_mw", self.sleep_power_mw)?;
        for event in &self.events {
            event.validate()?;
        }
        self.losses.validate()?;
        let active = self.active_seconds_per_day();
        if active > SECONDS_PER_DAY {
            return Err(invalid(
                "events",
                format!("active time {active} s exceeds one day"),
            ));
        }
        Ok(())
    }

    /// Consumption plus losses, the per-day drain the provisioning model uses.
    pub fn daily_energy(&self) -> Result<f64> {
        Ok(daily_consumption(self)? + daily_losses(&self.losses))
    }
}

/// Daily operating energy. Sleep power is charged only for the seconds not
/// covered by an activity event.
pub fn daily_consumption(profile: &NodeProfile) -> Result<f64> {
    profile.validate()?;
    let active_j: f64 = profile
        .events
        .iter()
        .map(|e| event_energy(e) * f64::from(e.occurrences_per_day))
        .sum();
    let sleep_s = SECONDS_PER_DAY - profile.active_seconds_per_day();
    Ok(active_j + profile.sleep_power_mw / 1000.0 * sleep_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ev(power_mw: f64, duration_s: f64, n: u32) -> ActivityEvent {
        ActivityEvent::new("e", power_mw, duration_s, n).unwrap()
    }

    #[test]
    fn single_event_energies() {
        assert_abs_diff_eq!(event_energy(&ev(111.15, 1.81, 1)), 0.2012, epsilon = 5e-5);
        assert_abs_diff_eq!(event_energy(&ev(23.4, 92.0, 1)), 2.153, epsilon = 5e-4);
        assert_abs_diff_eq!(event_energy(&ev(65.7, 0.19, 1)), 0.012, epsilon = 5e-4);
    }

    #[test]
    fn preset_daily_totals() {
        let tree = daily_consumption(&NodeProfile::tree_node()).unwrap();
        let gas = daily_consumption(&NodeProfile::gas_node()).unwrap();
        assert_abs_diff_eq!(tree, 22.7, epsilon = 0.05);
        assert_abs_diff_eq!(gas, 227.9, epsilon = 0.05);
        assert_abs_diff_eq!(tree, 22.67, epsilon = 0.005);
        assert_abs_diff_eq!(gas, 227.92, epsilon = 0.005);
    }

    #[test]
    fn sleep_only_profile() {
        let p = NodeProfile::new(0.025, vec![], LossProfile::default()).unwrap();
        assert_abs_diff_eq!(daily_consumption(&p).unwrap(), 2.16, epsilon = 1e-12);
    }

    #[test]
    fn presets_share_mcu_and_radio_rows() {
        let tree = NodeProfile::tree_node();
        let gas = NodeProfile::gas_node();
        assert_eq!(tree.sleep_power_mw, gas.sleep_power_mw);
        assert_eq!(tree.events[0], gas.events[0]);
        assert_ne!(tree.events[1], gas.events[1]);
    }

    #[test]
    fn loss_sums() {
        assert_eq!(daily_losses(&LossProfile::default()), 0.0);
        let l = LossProfile::new(0.53, 1.0, 0.2).unwrap();
        assert_abs_diff_eq!(daily_losses(&l), 1.73, epsilon = 1e-12);
        let lco = BatterySpec::lco(6480.0)
            .unwrap()
            .with_self_discharge(0.03)
            .unwrap();
        let l = LossProfile::from_battery(&lco, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(l.self_discharge_j_per_day, 0.53, epsilon = 0.005);
        assert!(LossProfile::new(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn rejects_overfull_day() {
        let p = NodeProfile {
            sleep_power_mw: 0.0,
            events: vec![ev(1.0, 1000.0, 100)],
            losses: LossProfile::default(),
        };
        assert!(daily_consumption(&p).is_err());
    }

    #[test]
    fn zero_profile_consumes_nothing() {
        let p = NodeProfile::new(0.0, vec![], LossProfile::default()).unwrap();
        assert_eq!(daily_consumption(&p).unwrap(), 0.0);
    }

    fn events() -> impl Strategy<Value = Vec<ActivityEvent>> {
        prop::collection::vec(
            (0.0f64..500.0, 0.0f64..60.0, 0u32..100)
                .prop_map(|(p, d, n)| ActivityEvent::new("e", p, d, n).unwrap()),
            0..4,
        )
    }

    proptest! {
        #[test]
        fn additive_in_events(a in events(), b in events()) {
            // sleep power zero so the sleep-time interaction drops out
            let mk = |ev: Vec<ActivityEvent>| NodeProfile {
                sleep_power_mw: 0.0, events: ev, losses: LossProfile::default(),
            };
            let joined: Vec<_> = a.iter().chain(b.iter()).cloned().collect();
            let total = daily_consumption(&mk(joined)).unwrap();
            let parts = daily_consumption(&mk(a)).unwrap() + daily_consumption(&mk(b)).unwrap();
            prop_assert!((total - parts).abs() <= 1e-9 * (1.0 + total));
        }

        #[test]
        fn monotone_in_event_parameters(
            sleep in 0.0f64..1.0,
            power in 1.0f64..500.0,
            duration in 0.0f64..60.0,
            n in 0u32..96,
            bump in 0.0f64..10.0,
        ) {
            let mk = |p: f64, d: f64, k: u32| NodeProfile {
                sleep_power_mw: sleep,
                events: vec![ActivityEvent::new("e", p, d, k).unwrap()],
                losses: LossProfile::default(),
            };
            let base = daily_consumption(&mk(power, duration, n)).unwrap();
            // power above sleep power, so extra active time never saves energy
            prop_assert!(daily_consumption(&mk(power + bump, duration, n)).unwrap() >= base);
            prop_assert!(daily_consumption(&mk(power, duration + bump, n)).unwrap() >= base - 1e-9);
            prop_assert!(daily_consumption(&mk(power, duration, n + 1)).unwrap() >= base - 1e-9);
        }
    }
}
