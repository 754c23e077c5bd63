//! Simulation output and its on-disk formats.
//!
//! * `days.csv`: `day,node_id,soc,stored_j`
//! * `interventions.csv`: `day,node_id,offset_mm,efficiency,stored_j,uav_spent_j`
//! * `summary.json`: per-node depletion day, `null` when the node survived

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: u32,
    pub node_id: String,
    pub soc: f64,
    pub stored_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionRecord {
    pub day: u32,
    pub node_id: String,
    pub offset_mm: f64,
    pub efficiency: f64,
    pub duration_s: f64,
    pub stored_j: f64,
    pub transmitted_j: f64,
    pub hover_j: f64,
    pub transit_j: f64,
    /// Transmitted + hover + inbound transit leg.
    pub uav_spent_j: f64,
    pub failed_alignment: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node_id: String,
    pub depletion_day: Option<u32>,
    pub min_soc: f64,
    pub final_soc: f64,
    pub interventions: u32,
    pub failed_alignments: u32,
    pub equivalent_full_cycles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub horizon_days: u32,
    pub seed: u64,
    pub nodes: Vec<NodeSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub days: Vec<DayRecord>,
    pub interventions: Vec<InterventionRecord>,
    pub summary: TraceSummary,
}

impl SimTrace {
    pub fn write_days_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        w.write_record(["day", "node_id", "soc", "stored_j"])?;
        for r in &self.days {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_interventions_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "day",
            "node_id",
            "offset_mm",
            "efficiency",
            "stored_j",
            "uav_spent_j",
        ])?;
        for r in &self.interventions {
            w.write_record([
                r.day.to_string(),
                r.node_id.clone(),
                r.offset_mm.to_string(),
                r.efficiency.to_string(),
                r.stored_j.to_string(),
                r.uav_spent_j.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.summary)?;
        s.push('\n');
        Ok(s)
    }

    pub fn days_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_days_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn interventions_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_interventions_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Writes the three trace files into `dir` and returns their paths.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let days = dir.join("days.csv");
        let interventions = dir.join("interventions.csv");
        let summary = dir.join("summary.json");
        fs::write(&days, self.days_csv()?)?;
        fs::write(&interventions, self.interventions_csv()?)?;
        fs::write(&summary, self.summary_json()?)?;
        Ok(vec![days, interventions, summary])
    }
}

/// Reads back a `days.csv` file.
pub fn parse_days_csv(text: &str) -> Result<Vec<DayRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
