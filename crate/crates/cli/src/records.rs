//! Output records. Every record embeds the parameters needed to regenerate
//! it exactly; floats render in shortest round-trip form, so parsing an
//! emitted record and re-rendering it reproduces the bytes.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One Monte Carlo estimation run: the full configuration plus its results.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub subcommand: String,
    pub attack: String,
    pub r: usize,
    pub n: usize,
    pub t: usize,
    pub m0: usize,
    pub m1: usize,
    pub samples: usize,
    pub seed: u64,
    pub chunk_size: usize,
    pub z: f64,
    pub mean: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub const ESTIMATE_CSV_HEADER: &str = "attack,r,n,t,samples,seed,mean,stderr,ci_lo,ci_hi";

impl EstimateRecord {
    pub fn to_csv(&self) -> String {
        format!(
            "{}\n{},{},{},{},{},{},{},{},{},{}\n",
            ESTIMATE_CSV_HEADER,
            self.attack,
            self.r,
            self.n,
            self.t,
            self.samples,
            self.seed,
            self.mean,
            self.stderr,
            self.ci_lo,
            self.ci_hi
        )
    }

    pub fn to_json(&self) -> String {
        let mut line = serde_json::to_string(self).expect("record serializes");
        line.push('\n');
        line
    }
}

pub const EXACT_CSV_HEADER: &str = "formula,kind,exactness,value,rational,vacuous";

pub fn exact_records_to_csv(records: &[untelegraph_core::formulas::BoundReport]) -> String {
    let mut out = String::from(EXACT_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.formula,
            r.kind.as_str(),
            r.exactness.as_str(),
            r.value,
            r.rational.as_deref().unwrap_or(""),
            r.vacuous.map(|v| v.to_string()).unwrap_or_default()
        ));
    }
    out
}

pub fn exact_records_to_json(records: &[untelegraph_core::formulas::BoundReport]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// One row of the bit-attack bounds table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundsRow {
    pub d: usize,
    pub exact_lower: f64,
    pub upper_thm: f64,
    pub asym_lower: f64,
    pub asym_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_stderr: Option<f64>,
}

pub fn bounds_rows_to_csv(rows: &[BoundsRow], with_mc: bool) -> String {
    let mut out = String::from("d,exact_lower,upper_thm,asym_lower,asym_upper");
    if with_mc {
        out.push_str(",mc_mean,mc_stderr");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}",
            r.d, r.exact_lower, r.upper_thm, r.asym_lower, r.asym_upper
        ));
        if with_mc {
            out.push_str(&format!(
                ",{},{}",
                r.mc_mean.expect("mc column present"),
                r.mc_stderr.expect("mc column present")
            ));
        }
        out.push('\n');
    }
    out
}

pub fn bounds_rows_to_json(rows: &[BoundsRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("row serializes"));
        out.push('\n');
    }
    out
}

/// Outcome of one verification check, JSON only.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyRecord {
    pub check: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub pass: bool,
    #[serde(flatten)]
    pub detail: serde_json::Value,
}

pub fn verify_records_to_json(records: &[VerifyRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}
