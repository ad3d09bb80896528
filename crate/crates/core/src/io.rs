//! CSV and JSON artifacts, run manifests and all-or-nothing file writes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gaussian::StateRow;
use crate::params::Config;
use crate::stability::PhaseDiagram;

pub const SWEEP_HEADER: &str = "B0_T,R_m,classification,max_offaxis,omega_L,omega_D,omega_I";
pub const STATE_HEADER: &str = "B0_T,P_bR,P_bL,P_m,P_k,P_s,entanglement,squeezing";

/// Shortest round-trip representation; `nan` for missing values.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn sweep_csv(diagram: &PhaseDiagram) -> String {
    let mut out = String::with_capacity(64 * (diagram.cells.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    let nb = diagram.b0_axis.len();
    for (k, cell) in diagram.cells.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_float(diagram.b0_axis[k % nb]),
            fmt_float(diagram.r_axis[k / nb]),
            cell.classification.code(),
            fmt_float(cell.max_offaxis),
            fmt_float(cell.omega_l),
            fmt_float(cell.omega_d),
            fmt_float(cell.omega_i),
        );
    }
    out
}

pub fn state_csv(rows: &[StateRow]) -> String {
    let mut out = String::with_capacity(96 * (rows.len() + 1));
    out.push_str(STATE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_float(row.b0));
        let values: Vec<f64> = match &row.metrics {
            Some(m) => m
                .purities
                .iter()
                .copied()
                .chain([m.entanglement, m.squeezing])
                .collect(),
            None => vec![f64::NAN; 7],
        };
        for v in values {
            out.push(',');
            out.push_str(&fmt_float(v));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct BordersFile {
    pub B_c1: f64,
    pub B_c2: f64,
    pub R_c_samples: Vec<[f64; 2]>,
}

impl BordersFile {
    pub fn from_diagram(diagram: &PhaseDiagram) -> Self {
        let b = &diagram.borders;
        Self {
            B_c1: b.b_c1,
            B_c2: b.b_c2,
            R_c_samples: diagram.b0_axis.iter().map(|&b0| [b0, b.r_c(b0)]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: serde_json::Value,
    pub params_echo: Config,
    pub tool_version: String,
    pub timestamp: String,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| crate::error::Error::Config(format!("{}: {e}", path.display())))
    }
}

/// `out.csv` -> `out.<suffix>`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

/// Writes every file to a temporary sibling first and renames only once all
/// writes succeeded, so a failure leaves no partial outputs.
pub fn write_all_atomic(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| e.error)?;
    }
    Ok(())
}
