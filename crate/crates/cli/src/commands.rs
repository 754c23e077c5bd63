use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use aerprov::battery::{joules_to_wh, wh_to_joules, DAYS_PER_YEAR};
use aerprov::consumption::{daily_losses, event_energy};
use aerprov::provisioning::{
    autonomy, capacity_bound, parse_autonomy, sweep_autonomy_vs_charge_time,
    sweep_capacity_vs_interventions, unassisted_autonomy, write_autonomy_csv, write_capacity_csv,
    AutonomyOutcome, AutonomyRow, CapacityRow, ProvisioningParams, SweepChemistry, SweepProfile,
};
use aerprov::sim;
use aerprov::wpt::{
    assess_technology, dbm_to_watts, ipt_efficiency, rf_received_power, transfer_time, Technology,
    TechnologyRequirement, Verdict,
};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::presets;
use crate::svg::{self, Series};
use crate::{BatteryOverrides, Command, Figure, Schedule, Source};

const DEFAULT_PRESET: &str = "tree-node";

pub fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Consumption { source } => consumption(&load(&source)?),
        Command::Size {
            source,
            schedule,
            c_rate,
            chemistry,
            daily,
        } => {
            let mut cfg = load(&source)?;
            apply_schedule(&mut cfg, &schedule);
            if let Some(c) = chemistry {
                cfg.battery.chemistry = c;
                cfg.battery.charge_rate_c = None;
            }
            if c_rate.is_some() {
                cfg.battery.charge_rate_c = c_rate;
            }
            size(&cfg, daily.computed_daily)
        }
        Command::Autonomy {
            source,
            battery,
            n,
            charge_time_s,
            daily,
        } => {
            let mut cfg = load(&source)?;
            apply_battery(&mut cfg, &battery);
            if let Some(t) = charge_time_s {
                cfg.provisioning.charge_time_s = t;
            }
            let n = n.unwrap_or(cfg.provisioning.interventions_per_year);
            autonomy_report(&cfg, n, daily.computed_daily)
        }
        Command::Simulate {
            source,
            battery,
            schedule,
            horizon_days,
            seed,
            out,
        } => {
            let mut cfg = load(&source)?;
            apply_battery(&mut cfg, &battery);
            apply_schedule(&mut cfg, &schedule);
            if let Some(h) = horizon_days {
                cfg.simulation.horizon_days = h;
            }
            if let Some(s) = seed {
                cfg.simulation.seed = s;
            }
            simulate(&cfg, &out)
        }
        Command::Reproduce {
            figure,
            source,
            out,
            svg,
        } => reproduce(figure, &load(&source)?, &out, svg),
        Command::AssessWpt {
            source,
            energies_j,
            time_s,
            technology,
            require_feasible,
        } => {
            let mut cfg = load(&source)?;
            if !energies_j.is_empty() {
                cfg.wpt.assessment.energies_j = energies_j;
            }
            if let Some(t) = time_s {
                cfg.wpt.assessment.transfer_time_s = t;
            }
            let technologies = match technology {
                None => Technology::ALL.to_vec(),
                Some(t) => vec![Technology::parse(&t).ok_or_else(|| {
                    CliError::Config(format!("unknown technology `{t}`; expected ipt, cpt or rf"))
                })?],
            };
            assess_wpt(&cfg, &technologies, require_feasible)
        }
    }
}

pub fn load(source: &Source) -> Result<ScenarioConfig, CliError> {
    match (&source.preset, &source.config) {
        (_, Some(path)) => presets::load_file(path),
        (Some(name), None) => presets::load_preset(name),
        (None, None) => presets::load_preset(DEFAULT_PRESET),
    }
}

fn apply_schedule(cfg: &mut ScenarioConfig, schedule: &Schedule) {
    if let Some(n) = schedule.n {
        cfg.provisioning.interventions_per_year = n;
    }
    if let Some(t) = schedule.charge_time_s {
        cfg.provisioning.charge_time_s = t;
    }
}

fn apply_battery(cfg: &mut ScenarioConfig, b: &BatteryOverrides) {
    if let Some(c) = &b.chemistry {
        cfg.battery.chemistry = c.clone();
        cfg.battery.charge_rate_c = None;
        cfg.battery.nominal_voltage_v = None;
    }
    if let Some(wh) = b.capacity_wh {
        cfg.battery.capacity_wh = Some(wh);
        cfg.battery.capacity_j = None;
    }
    if let Some(j) = b.capacity_j {
        cfg.battery.capacity_j = Some(j);
        cfg.battery.capacity_wh = None;
    }
    if b.c_rate.is_some() {
        cfg.battery.charge_rate_c = b.c_rate;
    }
}

fn profile_name(cfg: &ScenarioConfig) -> &str {
    cfg.name.as_deref().unwrap_or("custom")
}

fn daily_line(cfg: &ScenarioConfig, computed: bool) -> Result<(f64, String), CliError> {
    let daily = cfg.daily_energy_j(computed)?;
    let exact = cfg.daily_energy_j(true)?;
    let note = if daily == exact {
        format!("{daily:.3} J/day")
    } else {
        format!("{daily:.3} J/day (reference total; profile gives {exact:.3})")
    };
    Ok((daily, note))
}

pub fn consumption(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let profile = cfg.node_profile()?;
    let active = profile.active_seconds_per_day();
    let sleep_j = profile.sleep_power_mw * 1e-3 * (aerprov::consumption::SECONDS_PER_DAY - active);
    let mut out = String::new();
    let _ = writeln!(out, "profile: {}", profile_name(cfg));
    let _ = writeln!(
        out,
        "{:<12} {:>10} {:>11} {:>8} {:>10} {:>10}",
        "event", "power_mw", "duration_s", "per_day", "each_j", "j_per_day"
    );
    for e in &profile.events {
        let each = event_energy(e);
        let _ = writeln!(
            out,
            "{:<12} {:>10.3} {:>11.2} {:>8} {:>10.4} {:>10.3}",
            e.label,
            e.power_mw,
            e.duration_s,
            e.occurrences_per_day,
            each,
            each * f64::from(e.occurrences_per_day)
        );
    }
    let sleep_s = aerprov::consumption::SECONDS_PER_DAY - active;
    let _ = writeln!(
        out,
        "{:<12} {:>10.3} {:>11.0} {:>8} {:>10.4} {:>10.3}",
        "sleep", profile.sleep_power_mw, sleep_s, 1, sleep_j, sleep_j
    );
    let losses = daily_losses(&profile.losses);
    let _ = writeln!(
        out,
        "{:<12} {:>10} {:>11} {:>8} {:>10} {:>10.3}",
        "losses", "", "", "", "", losses
    );
    let _ = writeln!(out, "daily: {:.2} J/day", profile.daily_energy()?);
    Ok(out)
}

pub fn size(cfg: &ScenarioConfig, computed: bool) -> Result<String, CliError> {
    let (daily, note) = daily_line(cfg, computed)?;
    let battery = cfg.battery_spec()?;
    let p = cfg.provisioning;
    let bound = capacity_bound(
        daily,
        p.interventions_per_year,
        battery.charge_rate_per_h,
        p.charge_time_s,
    )?;
    let mut out = String::new();
    let _ = writeln!(out, "profile:           {}", profile_name(cfg));
    let _ = writeln!(out, "daily energy:      {note}");
    let _ = writeln!(
        out,
        "interventions:     {} per year",
        p.interventions_per_year
    );
    let _ = writeln!(out, "charge time:       {} s", p.charge_time_s);
    let _ = writeln!(
        out,
        "charge rate:       {} C ({})",
        battery.charge_rate_per_h, battery.chemistry
    );
    let _ = writeln!(out, "required minimum:  {:.3} J", bound.required_min_j);
    let _ = writeln!(out, "charge-rate term:  {:.3} J", bound.charge_rate_term_j);
    let _ = writeln!(
        out,
        "capacity bound:    {:.3} J = {:.3} Wh",
        bound.bound_j,
        joules_to_wh(bound.bound_j)
    );
    let _ = writeln!(out, "binding:           {}", bound.binding);
    Ok(out)
}

fn format_days(outcome: AutonomyOutcome) -> String {
    match outcome {
        AutonomyOutcome::Finite(d) => format!("{d:.1} days ({:.2} years)", d / DAYS_PER_YEAR),
        AutonomyOutcome::Unlimited => "inf".to_string(),
    }
}

pub fn autonomy_report(cfg: &ScenarioConfig, n: u32, computed: bool) -> Result<String, CliError> {
    let (daily, note) = daily_line(cfg, computed)?;
    let battery = cfg.battery_spec()?;
    let mut out = String::new();
    let _ = writeln!(out, "profile:           {}", profile_name(cfg));
    let _ = writeln!(out, "daily energy:      {note}");
    let _ = writeln!(
        out,
        "battery:           {} {:.3} J = {:.3} Wh, {} C",
        battery.chemistry,
        battery.capacity_j,
        battery.capacity_wh(),
        battery.charge_rate_per_h
    );
    if n == 0 {
        let outcome = unassisted_autonomy(battery.capacity_j, daily)?;
        let _ = writeln!(out, "interventions:     none (charging disabled)");
        let _ = writeln!(out, "autonomy:          {}", format_days(outcome));
        return Ok(out);
    }
    let charge_time = cfg.provisioning.charge_time_s;
    let result = autonomy(&ProvisioningParams::new(n, charge_time, battery, daily)?)?;
    let _ = writeln!(out, "interventions:     {n} per year, {charge_time} s each");
    let _ = writeln!(
        out,
        "charged per visit: {:.3} J",
        result.charged_per_intervention_j
    );
    let _ = writeln!(out, "required minimum:  {:.3} J", result.required_min_j);
    let _ = writeln!(
        out,
        "bridges interval:  {}",
        if result.bridges_interval { "yes" } else { "no" }
    );
    let _ = writeln!(out, "autonomy:          {}", format_days(result.outcome));
    Ok(out)
}

fn config_hash_of(configs: &[&ScenarioConfig]) -> Result<String, CliError> {
    if let [one] = configs {
        return one.hash();
    }
    let mut h = Sha256::new();
    for c in configs {
        h.update(c.hash()?.as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: PathBuf, text: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, text).map_err(|e| CliError::io(path.clone(), e))?;
    Ok(path)
}

pub fn simulate(cfg: &ScenarioConfig, out_dir: &Path) -> Result<String, CliError> {
    let scenario = cfg.scenario()?;
    let horizon = cfg.simulation.horizon_days;
    let seed = cfg.simulation.seed;
    let trace = sim::run(&scenario, horizon, seed)?;

    create_dir(out_dir)?;
    let mut files = trace.write_to_dir(out_dir).map_err(|e| match e {
        aerprov::Error::Io(source) => CliError::io(out_dir, source),
        other => other.into(),
    })?;
    files.push(write_file(out_dir.join("scenario.toml"), &cfg.to_toml()?)?);
    let mut manifest = RunManifest::new("simulate", cfg.hash()?, Some(seed));
    manifest.add_files(out_dir, &files)?;
    manifest.write(out_dir)?;

    let mut out = String::new();
    let _ = writeln!(out, "horizon: {horizon} days, seed {seed}");
    let _ = writeln!(
        out,
        "{:<12} {:>10} {:>8} {:>8} {:>6}",
        "node", "depletion", "min_soc", "final", "visits"
    );
    for n in &trace.summary.nodes {
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>8.4} {:>8.4} {:>6}",
            n.node_id,
            n.depletion_day
                .map_or("null".to_string(), |d| d.to_string()),
            n.min_soc,
            n.final_soc,
            n.interventions
        );
    }
    let _ = writeln!(out, "wrote {}", out_dir.display());
    Ok(out)
}

struct Dataset {
    stem: &'static str,
    csv: String,
    chart: String,
}

fn soc_dataset(cfg: &ScenarioConfig) -> Result<Dataset, CliError> {
    let horizon = cfg.sweep.soc_horizon_days;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::from(aerprov::Error::from(e));
    w.write_record(["capacity_wh", "day", "node_id", "soc", "stored_j"])
        .map_err(csv_err)?;
    let mut series = Vec::new();
    for &wh in &cfg.sweep.soc_capacities_wh {
        let mut c = cfg.clone();
        c.battery.capacity_wh = Some(wh);
        c.battery.capacity_j = None;
        c.fleet.truncate(1);
        let trace = sim::run(&c.scenario()?, horizon, c.simulation.seed)?;
        let mut points = vec![(0.0, 1.0)];
        for r in &trace.days {
            w.write_record([
                wh.to_string(),
                r.day.to_string(),
                r.node_id.clone(),
                r.soc.to_string(),
                r.stored_j.to_string(),
            ])
            .map_err(csv_err)?;
            points.push((f64::from(r.day), r.soc));
        }
        series.push(Series {
            name: format!("{wh} Wh"),
            points,
        });
    }
    let csv = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv");
    Ok(Dataset {
        stem: "soc",
        csv,
        chart: svg::line_chart("State of charge", "day", "SoC", &series),
    })
}

fn autonomy_dataset(cfg: &ScenarioConfig) -> Result<Dataset, CliError> {
    let sweep = &cfg.sweep;
    let caps = sweep
        .capacities_wh
        .iter()
        .map(|&wh| wh_to_joules(wh))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = sweep_autonomy_vs_charge_time(
        &caps,
        &sweep.charge_rates_c,
        cfg.provisioning.interventions_per_year,
        &sweep.charge_times_s()?,
        cfg.daily_energy_j(false)?,
    )?;
    let mut buf = Vec::new();
    write_autonomy_csv(&rows, &mut buf)?;
    let csv = String::from_utf8(buf).expect("utf-8 csv");
    let series = group(&rows, |r: &AutonomyRow| {
        (
            format!("{} Wh {}C", r.capacity_wh, r.charge_rate_c),
            (
                r.charge_time_s,
                r.autonomy_days.days().unwrap_or(f64::INFINITY),
            ),
        )
    });
    Ok(Dataset {
        stem: "autonomy-vs-time",
        csv,
        chart: svg::line_chart(
            "Autonomy vs charge time",
            "charge time (s)",
            "autonomy (days)",
            &series,
        ),
    })
}

fn capacity_dataset(cfg: &ScenarioConfig) -> Result<Dataset, CliError> {
    let tree = presets::load_preset("tree-node")?;
    let gas = presets::load_preset("gas-node")?;
    let profiles = [
        SweepProfile {
            name: "tree".into(),
            daily_energy_j: tree.daily_energy_j(false)?,
        },
        SweepProfile {
            name: "gas".into(),
            daily_energy_j: gas.daily_energy_j(false)?,
        },
    ];
    let chemistries = [("lco", 1.0), ("lto", 10.0)]
        .into_iter()
        .map(|(name, rate)| SweepChemistry {
            name: name.into(),
            charge_rate_per_h: rate,
        })
        .collect::<Vec<_>>();
    let ns: Vec<u32> = (1..=cfg.sweep.interventions_max).collect();
    let rows = sweep_capacity_vs_interventions(
        &profiles,
        &chemistries,
        cfg.provisioning.charge_time_s,
        &ns,
    )?;
    let mut buf = Vec::new();
    write_capacity_csv(&rows, &mut buf)?;
    let csv = String::from_utf8(buf).expect("utf-8 csv");
    let series = group(&rows, |r: &CapacityRow| {
        (
            format!("{} {}C", r.profile, r.charge_rate_c),
            (f64::from(r.interventions_per_year), r.min_capacity_wh),
        )
    });
    Ok(Dataset {
        stem: "capacity-vs-n",
        csv,
        chart: svg::line_chart(
            "Minimum capacity vs interventions",
            "interventions per year",
            "capacity (Wh)",
            &series,
        ),
    })
}

/// Splits rows into consecutive runs sharing a series name.
fn group<T>(rows: &[T], key: impl Fn(&T) -> (String, (f64, f64))) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        let (name, point) = key(r);
        match series.last_mut() {
            Some(s) if s.name == name => s.points.push(point),
            _ => series.push(Series {
                name,
                points: vec![point],
            }),
        }
    }
    series
}

pub fn reproduce(
    figure: Figure,
    cfg: &ScenarioConfig,
    out_dir: &Path,
    svg: bool,
) -> Result<String, CliError> {
    let figures: &[Figure] = match figure {
        Figure::All => &[Figure::Soc, Figure::AutonomyVsTime, Figure::CapacityVsN],
        _ => std::slice::from_ref(&figure),
    };
    create_dir(out_dir)?;
    let mut files = Vec::new();
    let mut uses_presets = false;
    let mut seed = None;
    let mut out = String::new();
    for f in figures {
        let data = match f {
            Figure::Soc => {
                seed = Some(cfg.simulation.seed);
                soc_dataset(cfg)?
            }
            Figure::AutonomyVsTime => autonomy_dataset(cfg)?,
            Figure::CapacityVsN => {
                uses_presets = true;
                capacity_dataset(cfg)?
            }
            Figure::All => unreachable!(),
        };
        let rows = data.csv.lines().count().saturating_sub(1);
        files.push(write_file(
            out_dir.join(format!("{}.csv", data.stem)),
            &data.csv,
        )?);
        if svg {
            files.push(write_file(
                out_dir.join(format!("{}.svg", data.stem)),
                &data.chart,
            )?);
        }
        let _ = writeln!(out, "{}: {rows} rows", data.stem);
    }
    let hash = if uses_presets {
        let tree = presets::load_preset("tree-node")?;
        let gas = presets::load_preset("gas-node")?;
        config_hash_of(&[cfg, &tree, &gas])?
    } else {
        cfg.hash()?
    };
    let mut manifest = RunManifest::new("reproduce", hash, seed);
    manifest.add_files(out_dir, &files)?;
    manifest.write(out_dir)?;
    let _ = writeln!(out, "wrote {}", out_dir.display());
    Ok(out)
}

pub fn assess_wpt(
    cfg: &ScenarioConfig,
    technologies: &[Technology],
    require_feasible: bool,
) -> Result<String, CliError> {
    let rf = cfg.rf_model()?;
    let ipt = cfg.ipt_model()?;
    let limits = cfg.feasibility_limits()?;
    let a = &cfg.wpt.assessment;

    let mut out = String::new();
    let anchor = rf.anchor;
    let rx = rf_received_power(anchor.tx_dbm, anchor.distance_m, &rf)?;
    let _ = writeln!(
        out,
        "rf: {} dBm at {} m -> {:.2} dBm; 1 J takes {:.1} s",
        anchor.tx_dbm,
        anchor.distance_m,
        rx,
        transfer_time(1.0, dbm_to_watts(rx))?
    );
    let _ = writeln!(
        out,
        "ipt: {:.1} % aligned, {:.1} % at {} mm",
        100.0 * ipt_efficiency(0.0, &ipt),
        100.0 * ipt_efficiency(cfg.wpt.ipt.reference_offset_mm, &ipt),
        cfg.wpt.ipt.reference_offset_mm
    );
    let _ = writeln!(
        out,
        "{:<5} {:>10} {:>8} {:>10}  {:<10} reasons",
        "link", "energy_j", "time_s", "power_w", "verdict"
    );
    let mut any_infeasible = false;
    for &energy in &a.energies_j {
        for &tech in technologies {
            let req = TechnologyRequirement::new(energy, a.transfer_time_s, tech)?;
            let res = assess_technology(&req, &limits)?;
            let verdict = match res.verdict {
                Verdict::Feasible => "feasible",
                Verdict::Infeasible => {
                    any_infeasible = true;
                    "infeasible"
                }
            };
            let reasons: Vec<String> = res.reasons.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                out,
                "{:<5} {:>10} {:>8} {:>10.2}  {:<10} {}",
                tech.to_string(),
                energy,
                a.transfer_time_s,
                res.required_power_w,
                verdict,
                reasons.join(",")
            );
        }
    }
    if require_feasible && any_infeasible {
        return Err(CliError::Infeasible { report: out });
    }
    Ok(out)
}

/// Reads the autonomy column of an `autonomy-vs-time.csv` file.
pub fn read_autonomy_column(csv_text: &str) -> Vec<Option<AutonomyOutcome>> {
    csv_text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().and_then(parse_autonomy))
        .collect()
}
