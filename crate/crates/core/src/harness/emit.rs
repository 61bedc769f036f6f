use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::error::Result;

use super::episode::RunRecord;
use super::sweep::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// `.json` selects JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

/// JSON formatter writing every float with 17 significant digits.
struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    value.serialize(&mut Serializer::with_formatter(&mut out, SigDigits))?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn record_to_csv(record: &RunRecord) -> String {
    let mut out = String::from("t,p,q,s,b,payoff,cum_payoff,cum_regret\n");
    for r in &record.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.t,
            f(r.p),
            f(r.q),
            f(r.s),
            f(r.b),
            f(r.payoff),
            f(r.cum_payoff),
            f(r.cum_regret)
        ));
    }
    out
}

pub fn record_to_json(record: &RunRecord) -> Result<String> {
    to_json_string(record)
}

pub fn sweep_to_csv(result: &SweepResult) -> String {
    let mut out = String::from("T,mean_regret,stderr,n_seeds\n");
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.horizon,
            f(p.mean_regret),
            f(p.stderr),
            p.n_seeds
        ));
    }
    out
}

#[derive(Serialize)]
struct SweepMetadata {
    slope: Option<f64>,
    intercept: Option<f64>,
    regret_within_noise: bool,
}

#[derive(Serialize)]
struct SweepJson<'a> {
    rows: &'a [super::sweep::SweepPoint],
    metadata: SweepMetadata,
}

/// Rows followed by a metadata object holding the fit.
pub fn sweep_to_json(result: &SweepResult) -> Result<String> {
    to_json_string(&SweepJson {
        rows: &result.points,
        metadata: SweepMetadata {
            slope: result.fit.map(|f| f.slope),
            intercept: result.fit.map(|f| f.intercept),
            regret_within_noise: result.regret_within_noise,
        },
    })
}

pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}
