//! Plot-ready CSV writers and the checksummed report bundle.
//!
//! Grid maps are written as matrices: one line per grid row `j` (south
//! first), one column per `i`, empty fields for cells without data. A JSON
//! sidecar with the same stem records the grid geometry.

use std::fmt::Write as _;
use std::path::{Component, Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{BeamDeltaStats, BinCoverage, EmpiricalCdf};
use crate::layout::GridSpec;
use crate::link::fixed;
use crate::propagation::PathGainModel;
use crate::switchoff::{SolverResult, SwitchOffProblem};
use crate::{Error, Result};

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.filter(|x| x.is_finite())
        .map(|x| fixed(x, decimals))
        .unwrap_or_default()
}

pub fn grid_csv(grid: &GridSpec, values: &[Option<f64>], decimals: usize) -> Result<String> {
    if values.len() != grid.n_cells() {
        return Err(Error::GridMismatch(format!(
            "{} values for a {}x{} grid",
            values.len(),
            grid.nx,
            grid.ny
        )));
    }
    let mut out = String::new();
    for j in 0..grid.ny {
        let row: Vec<String> = (0..grid.nx)
            .map(|i| opt(values[grid.flat(i, j)], decimals))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct GridSidecar<'a> {
    quantity: &'a str,
    unit: &'a str,
    origin_x_m: f64,
    origin_y_m: f64,
    cell_dx_m: f64,
    cell_dy_m: f64,
    nx: usize,
    ny: usize,
    row_order: &'static str,
}

pub fn grid_sidecar(grid: &GridSpec, quantity: &str, unit: &str) -> String {
    let s = GridSidecar {
        quantity,
        unit,
        origin_x_m: grid.origin.x,
        origin_y_m: grid.origin.y,
        cell_dx_m: grid.cell_dx,
        cell_dy_m: grid.cell_dy,
        nx: grid.nx,
        ny: grid.ny,
        row_order: "j ascending (first line is the southernmost row)",
    };
    serde_json::to_string_pretty(&s).expect("sidecar serializes") + "\n"
}

pub fn cdf_csv(cdf: &EmpiricalCdf) -> String {
    let mut out = String::from("value,probability\n");
    for (v, p) in cdf.points() {
        let _ = writeln!(out, "{},{}", fixed(v, 3), fixed(p, 6));
    }
    out
}

/// Pooled `Δi` distributions in long form.
pub fn delta_cdf_csv(stats: &BeamDeltaStats) -> String {
    let mut out = String::from("order,delta_db,probability\n");
    for i in 2..=stats.max_i {
        if let Some(c) = stats.cdf(i) {
            for (v, p) in c.points() {
                let _ = writeln!(out, "{i},{},{}", fixed(v, 3), fixed(p, 6));
            }
        }
    }
    out
}

pub fn delta_table_csv(stats: &BeamDeltaStats, probs: &[f64]) -> String {
    let mut out = String::from("percentile");
    for i in 2..=stats.max_i {
        let _ = write!(out, ",delta{i}_db");
    }
    out.push('\n');
    for (p, row) in stats.percentile_table(probs) {
        out.push_str(&fixed(100.0 * p, 1));
        for v in row {
            out.push(',');
            out.push_str(&opt(v, 3));
        }
        out.push('\n');
    }
    out
}

pub fn coverage_csv(bins: &[BinCoverage], threshold: f64) -> String {
    let mut out = String::from("d_lo_m,d_hi_m,samples,threshold_dbm,p_below\n");
    for b in bins {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fixed(b.d_lo, 3),
            fixed(b.d_hi, 3),
            b.samples,
            fixed(threshold, 2),
            opt(b.probability, 6)
        );
    }
    out
}

/// Coverage CDFs of all bins in long form.
pub fn coverage_cdf_csv(bins: &[BinCoverage]) -> String {
    let mut out = String::from("d_lo_m,d_hi_m,rsrp_dbm,probability\n");
    for b in bins {
        for (v, p) in b.cdf.points() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fixed(b.d_lo, 3),
                fixed(b.d_hi, 3),
                fixed(v, 2),
                fixed(p, 6)
            );
        }
    }
    out
}

/// One row of a solver comparison. `error` is set when the solver refused
/// to run (e.g. the exhaustive guard).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverRow {
    pub xi: usize,
    pub solver: String,
    pub seed: Option<u64>,
    pub result: Option<SolverResult>,
    pub wall_time_s: Option<f64>,
    pub error: Option<String>,
}

pub const SOLVER_HEADER: &str =
    "xi,solver,seed,mask,enabled,objective_db,evaluations,fallback,wall_time_s,error";

pub fn solver_csv(rows: &[SolverRow], problem: &SwitchOffProblem) -> String {
    let mut out = String::from(SOLVER_HEADER);
    out.push('\n');
    for r in rows {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        let wall = opt(r.wall_time_s, 6);
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        match &r.result {
            Some(res) => {
                let enabled: Vec<String> = res.mask.enabled().map(|k| problem.beams[k].to_string()).collect();
                let _ = writeln!(
                    out,
                    "{},{},{seed},{},{},{},{},{},{wall},{err}",
                    r.xi,
                    r.solver,
                    res.mask,
                    enabled.join(" "),
                    fixed(res.objective, 6),
                    res.evaluations,
                    res.fallback
                );
            }
            None => {
                let _ = writeln!(out, "{},{},{seed},,,,,,{wall},{err}", r.xi, r.solver);
            }
        }
    }
    out
}

/// Long-form per-cell, per-beam table for external solvers.
pub fn problem_csv(problem: &SwitchOffProblem) -> String {
    let mut out = String::from("cell_i,cell_j,beam,mean_rsrp_dbm,rsrp_max_dbm,bursts\n");
    for (i, j, id, mean, max, count) in problem.table() {
        let _ = writeln!(out, "{i},{j},{id},{},{},{count}", opt(mean, 3), fixed(max, 3));
    }
    out
}

/// A fitted model plus preset scores; `rows` are `(name, pg_1m, n, sigma,
/// rmse on the data, published rmse)`.
pub fn fit_csv(
    block: &str,
    fitted: &PathGainModel,
    samples: usize,
    rows: &[(String, PathGainModel, f64, Option<f64>)],
) -> String {
    let mut out = String::from("block,model,pg_1m_db,n,sigma_db,rmse_db,published_rmse_db,samples\n");
    let _ = writeln!(
        out,
        "{block},fit,{},{},{},{},,{samples}",
        fixed(fitted.pg_1m, 3),
        fixed(fitted.n, 4),
        fixed(fitted.sigma, 3),
        fixed(fitted.sigma, 3)
    );
    for (name, m, rmse, published) in rows {
        let _ = writeln!(
            out,
            "{block},{name},{},{},{},{},{},{samples}",
            fixed(m.pg_1m, 3),
            fixed(m.n, 4),
            fixed(m.sigma, 3),
            fixed(*rmse, 3),
            opt(*published, 1)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// A set of files written under one output directory plus their checksums.
/// Paths are relative to the directory and may not escape it.
#[derive(Debug)]
pub struct ReportBundle {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ReportBundle {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            entries: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn write(&mut self, name: &str, content: &[u8]) -> Result<PathBuf> {
        let rel = Path::new(name);
        if name == MANIFEST_NAME || rel.components().any(|c| !matches!(c, Component::Normal(_))) {
            return Err(Error::invalid(
                "output",
                format!("'{name}' is not a plain relative path"),
            ));
        }
        if self.entries.iter().any(|e| e.path == name) {
            return Err(Error::invalid("output", format!("'{name}' written twice")));
        }
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, content)?;
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            sha256: sha256_hex(content),
            bytes: content.len() as u64,
        });
        Ok(path)
    }

    /// Writes `manifest.json` with `info` merged in at the top level.
    pub fn finish(self, info: serde_json::Value) -> Result<PathBuf> {
        let mut doc = match info {
            serde_json::Value::Object(m) => m,
            serde_json::Value::Null => serde_json::Map::new(),
            other => {
                let mut m = serde_json::Map::new();
                m.insert("info".into(), other);
                m
            }
        };
        doc.insert("tool".into(), env!("CARGO_PKG_NAME").into());
        doc.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        doc.insert(
            "files".into(),
            serde_json::to_value(&self.entries).expect("entries serialize"),
        );
        let text = serde_json::to_string_pretty(&serde_json::Value::Object(doc))
            .expect("manifest serializes")
            + "\n";
        let path = self.root.join(MANIFEST_NAME);
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Checks every file listed in a manifest against its recorded checksum.
pub fn verify_manifest(dir: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let files = doc["files"]
        .as_array()
        .ok_or_else(|| Error::Empty("manifest lists no files".into()))?;
    for f in files {
        let name = f["path"].as_str().unwrap_or_default();
        let want = f["sha256"].as_str().unwrap_or_default();
        let got = sha256_hex(&std::fs::read(dir.join(name))?);
        if got != want {
            return Err(Error::invalid(
                "manifest",
                format!("checksum mismatch for {name}"),
            ));
        }
    }
    Ok(files.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Point2;

    #[test]
    fn grid_matrix_layout() {
        let g = GridSpec::new(Point2::new(0.0, 0.0), 1.0, 1.0, 3, 2).unwrap();
        let v = vec![Some(1.0), None, Some(-0.0001), Some(2.5), Some(3.0), None];
        assert_eq!(grid_csv(&g, &v, 2).unwrap(), "1.00,,0.00\n2.50,3.00,\n");
        assert!(grid_csv(&g, &v[..5], 2).is_err());
    }

    #[test]
    fn sha_of_empty() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn bundle_rejects_escape_and_verifies() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = ReportBundle::create(dir.path()).unwrap();
        assert!(b.write("../x.csv", b"a").is_err());
        assert!(b.write("/abs.csv", b"a").is_err());
        assert!(b.write(MANIFEST_NAME, b"a").is_err());
        b.write("maps/a.csv", b"1,2\n").unwrap();
        b.finish(serde_json::json!({"command": "test"})).unwrap();
        assert_eq!(verify_manifest(dir.path()).unwrap(), 1);
        std::fs::write(dir.path().join("maps/a.csv"), b"tampered").unwrap();
        assert!(verify_manifest(dir.path()).is_err());
    }

    #[test]
    fn cdf_rows() {
        let c = EmpiricalCdf::new(vec![2.0, 1.0]);
        assert_eq!(cdf_csv(&c), "value,probability\n1.000,0.500000\n2.000,1.000000\n");
    }
}
