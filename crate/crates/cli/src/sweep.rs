//! Cartesian parameter sweeps. Points are numbered in row-major order over
//! the field names sorted alphabetically and written to `point_NNN/`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{io, CliError, CliResult};
use crate::experiments;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub values: Vec<(String, f64)>,
    pub status: Result<(), String>,
}

/// All value combinations, last field varying fastest.
pub fn grid(fields: &[(String, Vec<f64>)]) -> Vec<Vec<f64>> {
    fields.iter().fold(vec![Vec::new()], |acc, (_, vals)| {
        acc.iter()
            .flat_map(|prefix| {
                vals.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

pub fn point_dir(index: usize) -> String {
    format!("point_{index:03}")
}

pub fn run(cfg: &ExperimentConfig, base: &Path, out: &Path, jobs: usize) -> CliResult<Vec<SweepPoint>> {
    let fields: Vec<(String, Vec<f64>)> = match &cfg.sweep {
        Some(s) if !s.fields.is_empty() => s.fields.clone().into_iter().collect(),
        _ => return Err(CliError::config("sweep.fields: nothing to sweep")),
    };
    let points = grid(&fields);
    let configs: Vec<ExperimentConfig> = points
        .iter()
        .map(|vals| {
            fields.iter().zip(vals).try_fold(cfg.clone(), |c, ((name, _), &v)| c.with_field(name, v))
        })
        .collect::<CliResult<_>>()?;
    fs::create_dir_all(out).map_err(|e| io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::simulation(e.to_string()))?;
    let statuses: Vec<Result<(), String>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, c)| experiments::run(c, base, &out.join(point_dir(i))).map(|_| ()).map_err(|e| e.to_string()))
            .collect()
    });
    let results: Vec<SweepPoint> = points
        .into_iter()
        .zip(statuses)
        .enumerate()
        .map(|(index, (vals, status))| SweepPoint {
            index,
            values: fields.iter().map(|(n, _)| n.clone()).zip(vals).collect(),
            status,
        })
        .collect();
    let index_path = out.join("sweep.csv");
    fs::write(&index_path, index_csv(&fields, &results)).map_err(|e| io(&index_path, e))?;
    let failed = results.iter().filter(|p| p.status.is_err()).count();
    if failed > 0 {
        let first = results.iter().find_map(|p| p.status.clone().err()).unwrap_or_default();
        return Err(CliError::simulation(format!("{failed} sweep points failed; first: {first}")));
    }
    Ok(results)
}

fn index_csv(fields: &[(String, Vec<f64>)], points: &[SweepPoint]) -> String {
    let mut s = String::from("point");
    for (name, _) in fields {
        let _ = write!(s, ",{name}");
    }
    s.push_str(",status\n");
    for p in points {
        let _ = write!(s, "{}", point_dir(p.index));
        for (_, v) in &p.values {
            let _ = write!(s, ",{v:.11e}");
        }
        match &p.status {
            Ok(()) => s.push_str(",ok\n"),
            Err(e) => {
                let _ = writeln!(s, ",\"{}\"", e.replace('"', "'"));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_row_major() {
        let f = vec![("a".to_string(), vec![1.0, 2.0]), ("b".to_string(), vec![3.0, 4.0, 5.0])];
        let g = grid(&f);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![1.0, 3.0]);
        assert_eq!(g[1], vec![1.0, 4.0]);
        assert_eq!(g[5], vec![2.0, 5.0]);
    }
}
