//! Wireless power transfer link models.
//!
//! The inductive link is characterised by how its end-to-end efficiency
//! falls with lateral coil misalignment. The RF link is a parametric
//! path-loss curve pinned to one measured anchor point. A coarse feasibility
//! check compares the power a transfer needs against what each technology
//! class can deliver.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, non_negative, positive, Result};

const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

/// How efficiency decays between perfect alignment and the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FalloffShape {
    /// `eta0 - falloff * offset^2`
    Quadratic,
    /// `eta0 - falloff * offset` (falloff in 1/mm)
    Linear,
    /// Piecewise-linear over `(offset_mm, efficiency)` points sorted by offset.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IptCoilModel {
    pub peak_efficiency: f64,
    /// Per mm^2 for the quadratic shape, per mm for the linear one.
    pub falloff: f64,
    /// Efficiency is zero for offsets beyond this.
    pub cutoff_offset_mm: f64,
    pub coil_dims_mm: (f64, f64),
    pub shape: FalloffShape,
}

impl Default for IptCoilModel {
    /// P9221-class receiver with a 32 x 42 mm coil: 85 % aligned, 70 % at a
    /// 12 mm offset. The 16 mm cutoff (half the narrow coil side) is a
    /// catalog default.
    fn default() -> Self {
        Self::calibrated(0.85, 12.0, 0.70, 16.0, FalloffShape::Quadratic)
            .expect("default IPT calibration is valid")
    }
}

impl IptCoilModel {
    /// Fits the falloff so that the curve passes through
    /// `(0, peak)` and `(offset_mm, efficiency_at_offset)`.
    pub fn calibrated(
        peak_efficiency: f64,
        offset_mm: f64,
        efficiency_at_offset: f64,
        cutoff_offset_mm: f64,
        shape: FalloffShape,
    ) -> Result<Self> {
        positive("offset_mm", offset_mm)?;
        if !(0.0..=peak_efficiency).contains(&efficiency_at_offset) {
            return Err(invalid(
                "efficiency_at_offset",
                "must lie between 0 and the peak efficiency",
            ));
        }
        let drop = peak_efficiency - efficiency_at_offset;
        let (falloff, shape) = match shape {
            FalloffShape::Quadratic => (drop / (offset_mm * offset_mm), FalloffShape::Quadratic),
            FalloffShape::Linear => (drop / offset_mm, FalloffShape::Linear),
            FalloffShape::Table(_) => (
                0.0,
                FalloffShape::Table(vec![
                    (0.0, peak_efficiency),
                    (offset_mm, efficiency_at_offset),
                ]),
            ),
        };
        let model = Self {
            peak_efficiency,
            falloff,
            cutoff_offset_mm,
            coil_dims_mm: (32.0, 42.0),
            shape,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_efficiency > 0.0 && self.peak_efficiency <= 1.0) {
            return Err(invalid("peak_efficiency", "must be in (0, 1]"));
        }
        non_negative("falloff", self.falloff)?;
        positive("cutoff_offset_mm", self.cutoff_offset_mm)?;
        if let FalloffShape::Table(points) = &self.shape {
            if points.is_empty() {
                return Err(invalid("shape", "efficiency table is empty"));
            }
            if points
                .windows(2)
                .any(|w| w[1].0 <= w[0].0 || w[1].1 > w[0].1)
            {
                return Err(invalid(
                    "shape",
                    "table offsets must increase and efficiencies must not",
                ));
            }
            if points
                .iter()
                .any(|&(o, e)| o < 0.0 || !(0.0..=1.0).contains(&e))
            {
                return Err(invalid("shape", "table point out of range"));
            }
        }
        Ok(())
    }
}

/// End-to-end link efficiency at a lateral offset.
pub fn ipt_efficiency(offset_mm: f64, model: &IptCoilModel) -> f64 {
    let offset = offset_mm.abs();
    if offset > model.cutoff_offset_mm {
        return 0.0;
    }
    let eta = match &model.shape {
        FalloffShape::Quadratic => model.peak_efficiency - model.falloff * offset * offset,
        FalloffShape::Linear => model.peak_efficiency - model.falloff * offset,
        FalloffShape::Table(points) => interpolate(points, offset),
    };
    eta.clamp(0.0, 1.0)
}

/// Linear interpolation with flat extrapolation on both ends.
fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (points[0], points[points.len() - 1]);
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|p| p.0 <= x);
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfAnchor {
    pub distance_m: f64,
    pub tx_dbm: f64,
    pub rx_dbm: f64,
}

/// RF link with a generalised free-space path loss
/// `10 * k * log10(4 pi d f / c)` and a calibration offset that forces the
/// model through its anchor point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfLinkModel {
    pub frequency_hz: f64,
    pub combined_gain_db: f64,
    /// 2.0 for inverse-square spreading.
    pub path_loss_exponent: f64,
    pub calibration_offset_db: f64,
    pub anchor: RfAnchor,
    /// Largest power the regulated RF link is taken to deliver, in watts.
    pub receivable_ceiling_w: f64,
}

impl Default for RfLinkModel {
    /// 868 MHz ISM band, 27 dBm into two antennas 30 cm apart received at
    /// about 10 dBm.
    fn default() -> Self {
        Self::calibrated(
            868e6,
            0.0,
            2.0,
            RfAnchor {
                distance_m: 0.30,
                tx_dbm: 27.0,
                rx_dbm: 10.0,
            },
            dbm_to_watts(10.0),
        )
        .expect("default RF calibration is valid")
    }
}

impl RfLinkModel {
    pub fn calibrated(
        frequency_hz: f64,
        combined_gain_db: f64,
        path_loss_exponent: f64,
        anchor: RfAnchor,
        receivable_ceiling_w: f64,
    ) -> Result<Self> {
        positive("frequency_hz", frequency_hz)?;
        positive("path_loss_exponent", path_loss_exponent)?;
        positive("anchor.distance_m", anchor.distance_m)?;
        non_negative("receivable_ceiling_w", receivable_ceiling_w)?;
        let mut model = Self {
            frequency_hz,
            combined_gain_db,
            path_loss_exponent,
            calibration_offset_db: 0.0,
            anchor,
            receivable_ceiling_w,
        };
        let uncalibrated = model.tx_plus_gain_minus_loss(anchor.tx_dbm, anchor.distance_m);
        model.calibration_offset_db = anchor.rx_dbm - uncalibrated;
        Ok(model)
    }

    pub fn path_loss_db(&self, distance_m: f64) -> f64 {
        let wavelength = SPEED_OF_LIGHT_M_S / self.frequency_hz;
        10.0 * self.path_loss_exponent * (4.0 * PI * distance_m / wavelength).log10()
    }

    fn tx_plus_gain_minus_loss(&self, tx_dbm: f64, distance_m: f64) -> f64 {
        tx_dbm + self.combined_gain_db - self.path_loss_db(distance_m)
    }
}

pub fn rf_received_power(tx_dbm: f64, distance_m: f64, model: &RfLinkModel) -> Result<f64> {
    positive("distance_m", distance_m)?;
    Ok(model.tx_plus_gain_minus_loss(tx_dbm, distance_m) + model.calibration_offset_db)
}

/// Seconds needed to move `energy_j` at a constant received power.
pub fn transfer_time(energy_j: f64, received_power_w: f64) -> Result<f64> {
    non_negative("energy_j", energy_j)?;
    positive("received_power_w", received_power_w)?;
    Ok(energy_j / received_power_w)
}

pub fn required_link_power(energy_j: f64, time_s: f64) -> Result<f64> {
    non_negative("energy_j", energy_j)?;
    positive("time_s", time_s)?;
    Ok(energy_j / time_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technology {
    Ipt,
    Cpt,
    Rf,
}

impl Technology {
    pub const ALL: [Technology; 3] = [Technology::Ipt, Technology::Cpt, Technology::Rf];

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ipt" => Some(Technology::Ipt),
            "cpt" => Some(Technology::Cpt),
            "rf" => Some(Technology::Rf),
            _ => None,
        }
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technology::Ipt => "IPT",
            Technology::Cpt => "CPT",
            Technology::Rf => "RF",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechnologyRequirement {
    pub energy_j: f64,
    pub time_s: f64,
    pub technology: Technology,
}

impl TechnologyRequirement {
    pub fn new(energy_j: f64, time_s: f64, technology: Technology) -> Result<Self> {
        non_negative("energy_j", energy_j)?;
        positive("time_s", time_s)?;
        Ok(Self {
            energy_j,
            time_s,
            technology,
        })
    }
}

/// Power ceilings used by [`assess_technology`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityLimits {
    /// Deliverable power of coupled (IPT/CPT) links.
    pub coupled_max_power_w: f64,
    pub rf_ceiling_w: f64,
}

impl Default for FeasibilityLimits {
    fn default() -> Self {
        Self {
            coupled_max_power_w: 1000.0,
            rf_ceiling_w: RfLinkModel::default().receivable_ceiling_w,
        }
    }
}

impl FeasibilityLimits {
    pub fn from_rf(model: &RfLinkModel) -> Self {
        Self {
            rf_ceiling_w: model.receivable_ceiling_w,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReasonCode {
    /// Required power within the kilowatt class of coupled links.
    WithinCoupledPowerClass,
    ExceedsCoupledPowerClass,
    WithinRfCeiling,
    /// Required power above what the regulated RF link can deliver.
    ExceedsRfCeiling,
    /// Efficiency class up to 90 %.
    HighEfficiencyClass,
    LowEfficiencyClass,
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReasonCode::WithinCoupledPowerClass => "within-coupled-power-class",
            ReasonCode::ExceedsCoupledPowerClass => "exceeds-coupled-power-class",
            ReasonCode::WithinRfCeiling => "within-rf-ceiling",
            ReasonCode::ExceedsRfCeiling => "exceeds-rf-ceiling",
            ReasonCode::HighEfficiencyClass => "high-efficiency-class",
            ReasonCode::LowEfficiencyClass => "low-efficiency-class",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub requirement: TechnologyRequirement,
    pub required_power_w: f64,
    pub verdict: Verdict,
    pub reasons: Vec<ReasonCode>,
}

pub fn assess_technology(
    req: &TechnologyRequirement,
    limits: &FeasibilityLimits,
) -> Result<Assessment> {
    let power = required_link_power(req.energy_j, req.time_s)?;
    let (verdict, reasons) = match req.technology {
        Technology::Ipt | Technology::Cpt => {
            if power <= limits.coupled_max_power_w {
                (
                    Verdict::Feasible,
                    vec![
                        ReasonCode::WithinCoupledPowerClass,
                        ReasonCode::HighEfficiencyClass,
                    ],
                )
            } else {
                (
                    Verdict::Infeasible,
                    vec![
                        ReasonCode::ExceedsCoupledPowerClass,
                        ReasonCode::HighEfficiencyClass,
                    ],
                )
            }
        }
        Technology::Rf => {
            if power <= limits.rf_ceiling_w {
                (
                    Verdict::Feasible,
                    vec![ReasonCode::WithinRfCeiling, ReasonCode::LowEfficiencyClass],
                )
            } else {
                (
                    Verdict::Infeasible,
                    vec![ReasonCode::ExceedsRfCeiling, ReasonCode::LowEfficiencyClass],
                )
            }
        }
    };
    Ok(Assessment {
        requirement: *req,
        required_power_w: power,
        verdict,
        reasons,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositioningRegime {
    Open,
    Forested,
    Rtk,
}

impl PositioningRegime {
    /// GNSS position error scale for the regime, in meters.
    pub fn coarse_sigma_m(self) -> f64 {
        match self {
            PositioningRegime::Open => 2.0,
            PositioningRegime::Forested => 5.0,
            PositioningRegime::Rtk => 0.01,
        }
    }
}

/// Positioning error seen by the charging link. The coarse term describes
/// the GNSS approach; the fine residual is what remains after the precise
/// alignment step and is what the coil offset is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentModel {
    pub regime: PositioningRegime,
    pub coarse_error_sigma_m: f64,
    pub fine_residual_sigma_mm: f64,
}

impl AlignmentModel {
    pub fn new(regime: PositioningRegime, fine_residual_sigma_mm: f64) -> Result<Self> {
        non_negative("fine_residual_sigma_mm", fine_residual_sigma_mm)?;
        Ok(Self {
            regime,
            coarse_error_sigma_m: regime.coarse_sigma_m(),
            fine_residual_sigma_mm,
        })
    }

    /// RTK positioning with perfect final alignment.
    pub fn perfect() -> Self {
        Self {
            regime: PositioningRegime::Rtk,
            coarse_error_sigma_m: PositioningRegime::Rtk.coarse_sigma_m(),
            fine_residual_sigma_mm: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("coarse_error_sigma_m", self.coarse_error_sigma_m)?;
        non_negative("fine_residual_sigma_mm", self.fine_residual_sigma_mm)?;
        Ok(())
    }
}

fn half_normal<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma)
        .expect("sigma validated non-negative")
        .sample(rng)
        .abs()
}

/// Draws a radial coil offset in mm from a half-normal with scale
/// `fine_residual_sigma_mm`.
pub fn sample_alignment<R: Rng + ?Sized>(model: &AlignmentModel, rng: &mut R) -> f64 {
    half_normal(model.fine_residual_sigma_mm, rng)
}

/// Draws a coarse GNSS position error in meters.
pub fn sample_coarse_error<R: Rng + ?Sized>(model: &AlignmentModel, rng: &mut R) -> f64 {
    half_normal(model.coarse_error_sigma_m, rng)
}
