//! Plot-ready series extraction: one (x, y, yerr) CSV per curve of a result
//! record, with deterministic names built from kind and seed.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::ExperimentKind;
use crate::record::ResultRecord;

/// Writes per-curve CSVs for a record; returns written paths.
pub fn emit_plot_data(record: &ResultRecord, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut series: Vec<(String, Vec<(f64, f64, f64)>)> = Vec::new();
    match record.kind {
        ExperimentKind::Convergence => {
            let table = record
                .tables
                .get("values")
                .context("convergence record lacks 'values' table")?;
            let k = table.column("k").context("missing column k")?;
            let re = table.column("re").context("missing column re")?;
            let im = table.column("im").context("missing column im")?;
            let budget = table.column("budget").context("missing column budget")?;
            let (ref_re, ref_im) = (*re.last().unwrap(), *im.last().unwrap());
            let rows = k
                .iter()
                .zip(re.iter().zip(&im))
                .zip(&budget)
                .map(|((&k, (&r, &i)), &b)| {
                    let diff = ((r - ref_re).powi(2) + (i - ref_im).powi(2)).sqrt();
                    (k, diff, b)
                })
                .collect();
            series.push(("distance-to-finest".into(), rows));
        }
        ExperimentKind::Support => {
            let table = record
                .tables
                .get("support")
                .context("support record lacks 'support' table")?;
            let s = table.column("s").context("missing column s")?;
            let k = table.column("k").context("missing column k")?;
            let mean = table.column("mean").context("missing column mean")?;
            let err = table.column("stderr").context("missing column stderr")?;
            let mut s_values: Vec<f64> = s.to_vec();
            s_values.dedup();
            for sv in s_values {
                let rows: Vec<(f64, f64, f64)> = s
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x == sv)
                    .map(|(i, _)| (k[i], mean[i], err[i]))
                    .collect();
                series.push((format!("s{sv}"), rows));
            }
        }
        ExperimentKind::Continuity => {
            let table = record
                .tables
                .get("holonomy")
                .context("continuity record lacks 'holonomy' table")?;
            let d = table.column("curve_distance").context("missing column")?;
            let m = table.column("measured").context("missing column")?;
            let e = table.column("stderr").context("missing column")?;
            let rows = d
                .iter()
                .zip(m.iter().zip(&e))
                .map(|(&x, (&y, &ye))| (x, y, ye))
                .collect();
            series.push(("difference".into(), rows));
        }
        _ => {
            // generic: first column as x, second as y, third (if any) as yerr
            for (name, table) in &record.tables {
                if table.columns.len() < 2 {
                    continue;
                }
                let rows = table
                    .rows
                    .iter()
                    .map(|r| (r[0], r[1], if r.len() > 2 { r[2] } else { 0.0 }))
                    .collect();
                series.push((name.clone(), rows));
            }
        }
    }
    let mut written = Vec::new();
    for (name, rows) in series {
        let path = out_dir.join(format!("plot-{}-{name}.csv", record.base_name()));
        let mut csv = String::from("x,y,yerr\n");
        for (x, y, e) in rows {
            csv.push_str(&format!("{x:.17e},{y:.17e},{e:.17e}\n"));
        }
        std::fs::write(&path, csv)?;
        written.push(path);
    }
    Ok(written)
}
