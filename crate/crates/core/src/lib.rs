//! Energy provisioning models for battery-powered IoT nodes that a UAV
//! recharges in flight.
//!
//! * [`battery`]: chemistry catalog, linear C-rate-limited charging,
//!   self-discharge.
//! * [`consumption`]: daily energy of a duty-cycled node.
//! * [`provisioning`]: charge per visit, bridging energy, autonomy and
//!   minimum battery capacity in closed form, plus figure sweeps.
//! * [`wpt`]: inductive and RF link models, technology feasibility and
//!   alignment-error sampling.
//! * [`sim`]: deterministic fleet simulator with SoC telemetry and dispatch.
//!
//! ```
//! use aerprov::consumption::{daily_consumption, NodeProfile};
//! use aerprov::provisioning::min_capacity;
//!
//! let daily = daily_consumption(&NodeProfile::tree_node()).unwrap();
//! assert!((daily - 22.67).abs() < 0.01);
//!
//! let bound = min_capacity(daily, 12, 1.0, 300.0).unwrap();
//! assert!(bound > 1.80 * 3600.0 && bound < 2.88 * 3600.0);
//! ```

pub mod battery;
pub mod consumption;
pub mod error;
pub mod provisioning;
pub mod sim;
pub mod wpt;

pub use error::{Error, Result};
