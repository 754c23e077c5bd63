//! Sortie planning and the physics of a single charging visit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FleetNode, InterventionRecord, UavSpec};
use crate::battery::BatteryState;
use crate::error::{invalid, Result};
use crate::wpt::{ipt_efficiency, sample_alignment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedStop {
    pub node_id: String,
    pub duration_s: f64,
    /// Flight energy for the leg into this stop.
    pub transit_j: f64,
    pub hover_j: f64,
    /// Transmitted energy assuming perfect alignment.
    pub transmit_estimate_j: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SortiePlan {
    pub stops: Vec<PlannedStop>,
    /// Due nodes left for a later sortie.
    pub deferred: Vec<String>,
    /// Subset of `deferred` that no sortie could serve, even alone.
    pub unreachable: Vec<String>,
    pub return_transit_j: f64,
    pub planned_energy_j: f64,
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn transit_energy(uav: &UavSpec, from: (f64, f64), to: (f64, f64)) -> f64 {
    distance(from, to) / uav.transit_speed_m_s * uav.transit_power_w
}

/// Charge duration that either uses the full time slot or exactly fills the
/// battery, whichever is shorter.
fn charge_duration(battery: &BatteryState, uav: &UavSpec) -> f64 {
    uav.max_charge_time_s
        .min(battery.spec.time_to_store(battery.headroom_j()))
}

fn on_site_cost(node: &FleetNode, uav: &UavSpec, duration_s: f64) -> (f64, f64) {
    let stored = node
        .battery
        .spec
        .charge_candidate(duration_s)
        .min(node.battery.headroom_j());
    let transmit = stored / uav.wpt.peak_efficiency;
    (uav.hover_power_w * duration_s, transmit)
}

/// Greedy nearest-neighbour tour from the UAV base.
///
/// At each step the closest remaining node (ties broken by id) that still
/// fits in the energy budget, return leg included, is visited next. The tour
/// ends when no remaining node fits.
pub fn plan_sortie(due: &[&FleetNode], uav: &UavSpec) -> Result<SortiePlan> {
    if due.is_empty() {
        return Err(invalid("due", "no nodes to visit"));
    }
    let base = uav.base_position_m;
    let budget = uav.sortie_energy_budget_j;

    struct Candidate<'a> {
        node: &'a FleetNode,
        duration_s: f64,
        hover_j: f64,
        transmit_j: f64,
    }
    let mut remaining: Vec<Candidate> = due
        .iter()
        .map(|&node| {
            let duration_s = charge_duration(&node.battery, uav);
            let (hover_j, transmit_j) = on_site_cost(node, uav, duration_s);
            Candidate {
                node,
                duration_s,
                hover_j,
                transmit_j,
            }
        })
        .collect();

    let mut plan = SortiePlan::default();
    for c in &remaining {
        let alone = 2.0 * transit_energy(uav, base, c.node.position_m) + c.hover_j + c.transmit_j;
        if alone > budget {
            plan.unreachable.push(c.node.id.clone());
        }
    }

    let mut here = base;
    let mut spent = 0.0;
    loop {
        remaining.sort_by(|a, b| {
            distance(here, a.node.position_m)
                .total_cmp(&distance(here, b.node.position_m))
                .then_with(|| a.node.id.cmp(&b.node.id))
        });
        let pick = remaining.iter().position(|c| {
            let leg = transit_energy(uav, here, c.node.position_m);
            let back = transit_energy(uav, c.node.position_m, base);
            spent + leg + c.hover_j + c.transmit_j + back <= budget
        });
        let Some(i) = pick else { break };
        let c = remaining.remove(i);
        let leg = transit_energy(uav, here, c.node.position_m);
        spent += leg + c.hover_j + c.transmit_j;
        here = c.node.position_m;
        plan.stops.push(PlannedStop {
            node_id: c.node.id.clone(),
            duration_s: c.duration_s,
            transit_j: leg,
            hover_j: c.hover_j,
            transmit_estimate_j: c.transmit_j,
        });
    }
    if !plan.stops.is_empty() {
        plan.return_transit_j = transit_energy(uav, here, base);
    }
    plan.planned_energy_j = spent + plan.return_transit_j;
    let mut deferred: Vec<String> = remaining.into_iter().map(|c| c.node.id.clone()).collect();
    deferred.sort();
    plan.deferred = deferred;
    plan.unreachable.sort();
    Ok(plan)
}

/// Aligns over `node`, charges for `duration_s` and reports what happened.
///
/// The returned record carries transmit and hover energy only; the caller
/// adds the transit share of the sortie.
pub fn execute_intervention<R: Rng + ?Sized>(
    node: &FleetNode,
    uav: &UavSpec,
    duration_s: f64,
    day: u32,
    rng: &mut R,
) -> Result<(BatteryState, InterventionRecord)> {
    if duration_s < 0.0 || duration_s > uav.max_charge_time_s {
        return Err(invalid(
            "duration_s",
            format!("{duration_s} outside [0, {}]", uav.max_charge_time_s),
        ));
    }
    let offset_mm = sample_alignment(&uav.alignment, rng);
    let efficiency = ipt_efficiency(offset_mm, &uav.wpt);
    let hover_j = uav.hover_power_w * duration_s;
    let (battery, stored_j, transmitted_j) = if efficiency > 0.0 {
        let (battery, stored) = node.battery.charge(duration_s);
        (battery, stored, stored / efficiency)
    } else {
        (node.battery.clone(), 0.0, 0.0)
    };
    let record = InterventionRecord {
        day,
        node_id: node.id.clone(),
        offset_mm,
        efficiency,
        duration_s,
        stored_j,
        transmitted_j,
        hover_j,
        transit_j: 0.0,
        uav_spent_j: transmitted_j + hover_j,
        failed_alignment: efficiency == 0.0 && duration_s > 0.0,
    };
    Ok((battery, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::BatterySpec;
    use crate::sim::tests::flat_node;
    use crate::wpt::{AlignmentModel, PositioningRegime};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn empty_lco(capacity: f64) -> BatteryState {
        BatteryState::empty(BatterySpec::lco(capacity).unwrap())
    }

    #[test]
    fn collinear_nodes_visited_near_to_far() {
        let nodes = [
            flat_node("far", 200.0, empty_lco(6480.0), 1.0),
            flat_node("near", 0.0, empty_lco(6480.0), 1.0),
            flat_node("mid", 100.0, empty_lco(6480.0), 1.0),
        ];
        let refs: Vec<&FleetNode> = nodes.iter().collect();
        let plan = plan_sortie(&refs, &UavSpec::default()).unwrap();
        let order: Vec<&str> = plan.stops.iter().map(|s| s.node_id.as_str()).collect();
        assert_eq!(order, ["near", "mid", "far"]);
        assert!(plan.deferred.is_empty());
        assert_abs_diff_eq!(plan.return_transit_j, 200.0 / 10.0 * 200.0, epsilon = 1e-9);
    }

    #[test]
    fn ties_broken_by_id() {
        let nodes = [
            flat_node("b", 50.0, empty_lco(100.0), 1.0),
            flat_node("a", -50.0, empty_lco(100.0), 1.0),
        ];
        let refs: Vec<&FleetNode> = nodes.iter().collect();
        let plan = plan_sortie(&refs, &UavSpec::default()).unwrap();
        assert_eq!(plan.stops[0].node_id, "a");
    }

    #[test]
    fn duration_uses_full_slot_when_headroom_is_large() {
        let nodes = [flat_node("a", 10.0, empty_lco(6480.0), 1.0)];
        let uav = UavSpec {
            sortie_energy_budget_j: 1e12,
            ..UavSpec::default()
        };
        let plan = plan_sortie(&[&nodes[0]], &uav).unwrap();
        assert_eq!(plan.stops[0].duration_s, uav.max_charge_time_s);
        assert_abs_diff_eq!(
            plan.stops[0].transmit_estimate_j,
            540.0 / 0.85,
            epsilon = 1e-9
        );
    }

    #[test]
    fn duration_shortened_to_fill_battery() {
        // 100 J of headroom at 1C on 6480 J takes 100 * 3600 / 6480 s
        let battery = BatteryState::new(BatterySpec::lco(6480.0).unwrap(), 6380.0).unwrap();
        let nodes = [flat_node("a", 10.0, battery, 1.0)];
        let plan = plan_sortie(&[&nodes[0]], &UavSpec::default()).unwrap();
        assert_abs_diff_eq!(
            plan.stops[0].duration_s,
            100.0 * 3600.0 / 6480.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn zero_budget_defers_everything() {
        let nodes = [
            flat_node("a", 10.0, empty_lco(6480.0), 1.0),
            flat_node("b", 20.0, empty_lco(6480.0), 1.0),
        ];
        let uav = UavSpec {
            sortie_energy_budget_j: 0.0,
            ..UavSpec::default()
        };
        let refs: Vec<&FleetNode> = nodes.iter().collect();
        let plan = plan_sortie(&refs, &uav).unwrap();
        assert!(plan.stops.is_empty());
        assert_eq!(plan.deferred, ["a", "b"]);
        assert_eq!(plan.planned_energy_j, 0.0);
    }

    #[test]
    fn budget_defers_and_flags_unreachable() {
        let nodes = [
            flat_node("near", 10.0, empty_lco(6480.0), 1.0),
            flat_node("remote", 100_000.0, empty_lco(6480.0), 1.0),
        ];
        let refs: Vec<&FleetNode> = nodes.iter().collect();
        let plan = plan_sortie(&refs, &UavSpec::default()).unwrap();
        assert_eq!(plan.stops.len(), 1);
        assert_eq!(plan.deferred, ["remote"]);
        assert_eq!(plan.unreachable, ["remote"]);
        assert!(plan.planned_energy_j <= UavSpec::default().sortie_energy_budget_j);
    }

    #[test]
    fn empty_due_list_rejected() {
        assert!(plan_sortie(&[], &UavSpec::default()).is_err());
    }

    #[test]
    fn perfect_alignment_intervention() {
        let node = flat_node("a", 10.0, empty_lco(6480.0), 1.0);
        let uav = UavSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (battery, r) = execute_intervention(&node, &uav, 300.0, 5, &mut rng).unwrap();
        assert_abs_diff_eq!(r.stored_j, 540.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.transmitted_j, 635.294, epsilon = 1e-3);
        assert_abs_diff_eq!(r.uav_spent_j, 540.0 / 0.85 + 250.0 * 300.0, epsilon = 1e-9);
        assert_abs_diff_eq!(battery.stored_j(), 540.0, epsilon = 1e-9);
        assert_eq!(r.offset_mm, 0.0);
        assert_eq!(r.efficiency, 0.85);
    }

    #[test]
    fn zero_duration_intervention() {
        let node = flat_node("a", 10.0, empty_lco(6480.0), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (battery, r) =
            execute_intervention(&node, &UavSpec::default(), 0.0, 1, &mut rng).unwrap();
        assert_eq!(r.stored_j, 0.0);
        assert_eq!(r.uav_spent_j, 0.0);
        assert_eq!(battery, node.battery);
        assert!(!r.failed_alignment);
    }

    #[test]
    fn offset_beyond_cutoff_fails_alignment() {
        let node = flat_node("a", 10.0, empty_lco(6480.0), 1.0);
        // with sigma 1 m every draw lands far outside the 16 mm cutoff
        let uav = UavSpec {
            alignment: AlignmentModel::new(PositioningRegime::Open, 1000.0).unwrap(),
            ..UavSpec::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (battery, r) = execute_intervention(&node, &uav, 300.0, 1, &mut rng).unwrap();
        assert!(r.offset_mm > uav.wpt.cutoff_offset_mm);
        assert!(r.failed_alignment);
        assert_eq!(r.stored_j, 0.0);
        assert_eq!(battery, node.battery);
    }

    #[test]
    fn duration_above_slot_rejected() {
        let node = flat_node("a", 10.0, empty_lco(6480.0), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(execute_intervention(&node, &UavSpec::default(), 301.0, 1, &mut rng).is_err());
    }

    #[test]
    fn node_gain_bounded_by_aligned_transfer() {
        let node = flat_node("a", 10.0, empty_lco(6480.0), 1.0);
        let uav = UavSpec {
            alignment: AlignmentModel::new(PositioningRegime::Rtk, 5.0).unwrap(),
            ..UavSpec::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (_, r) = execute_intervention(&node, &uav, 300.0, 1, &mut rng).unwrap();
            assert!(r.stored_j <= r.transmitted_j * uav.wpt.peak_efficiency + 1e-9);
            if r.offset_mm > 0.0 && r.stored_j > 0.0 {
                assert!(r.stored_j < r.transmitted_j * uav.wpt.peak_efficiency);
            }
        }
    }
}
