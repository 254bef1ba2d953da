//! Cartesian parameter sweeps over entries of `A` and `b21`, run on a
//! bounded worker pool.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use torus_filippov::sliding::OMEGA_EPS;
use torus_filippov::{classify_tangency_set_with_grid, genericity_report, PiecewiseSystem};

use crate::document::{read_input, SystemDocument};
use crate::report::{to_json, write_file, RunReport};
use crate::{CliError, Outcome, Result};

/// Environment variable bounding the number of sweep workers.
pub const THREADS_VAR: &str = "TORUS_FILIPPOV_THREADS";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: SystemDocument,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// `"aIJ"` with `I, J ∈ {1, 2, 3}`, or `"b21"`.
    pub entry: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    A(usize, usize),
    B21,
}

fn parse_entry(name: &str) -> Result<Entry> {
    if name == "b21" {
        return Ok(Entry::B21);
    }
    let digits: Vec<usize> = name
        .strip_prefix('a')
        .map(|rest| rest.chars().filter_map(|c| c.to_digit(10)).map(|d| d as usize).collect())
        .unwrap_or_default();
    match digits.as_slice() {
        [i, j] if name.len() == 3 && (1..=3).contains(i) && (1..=3).contains(j) => {
            Ok(Entry::A(i - 1, j - 1))
        }
        _ => Err(CliError::Input(format!(
            "unknown sweep entry {name:?}: expected a11..a33 or b21"
        ))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub index: usize,
    pub parameters: BTreeMap<String, f64>,
    pub omega: f64,
    pub degenerate_omega: bool,
    pub case: Option<String>,
    pub component_count: Option<usize>,
    pub everywhere_tangent: Option<bool>,
    pub in_frak_z_relaxed: Option<bool>,
    pub in_frak_z_strict: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
struct IndexEntry<'a> {
    index: usize,
    file: String,
    parameters: &'a BTreeMap<String, f64>,
    omega: f64,
    degenerate_omega: bool,
    case: &'a Option<String>,
}

#[derive(Debug, Serialize)]
struct Index<'a> {
    count: usize,
    axes: Vec<&'a str>,
    cells: Vec<IndexEntry<'a>>,
}

/// Worker count from the environment; `None` leaves the pool default.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Input(format!("{THREADS_VAR} must be a positive integer, got {s:?}"))),
        },
    }
}

fn cells(config: &SweepConfig) -> Result<Vec<BTreeMap<String, f64>>> {
    let mut out = vec![BTreeMap::new()];
    for axis in &config.axes {
        parse_entry(&axis.entry)?;
        if axis.values.is_empty() {
            return Err(CliError::Input(format!("sweep axis {:?} has no values", axis.entry)));
        }
        let mut next = Vec::with_capacity(out.len() * axis.values.len());
        for cell in &out {
            if cell.contains_key(&axis.entry) {
                return Err(CliError::Input(format!("sweep axis {:?} given twice", axis.entry)));
            }
            for &v in &axis.values {
                let mut c: BTreeMap<String, f64> = cell.clone();
                c.insert(axis.entry.clone(), v);
                next.push(c);
            }
        }
        out = next;
    }
    Ok(out)
}

fn run_cell(base: &SystemDocument, index: usize, parameters: BTreeMap<String, f64>, grid: usize) -> CellReport {
    let mut doc = base.clone();
    for (name, &v) in &parameters {
        match parse_entry(name) {
            Ok(Entry::A(i, j)) => doc.a[i][j] = v,
            Ok(Entry::B21) => doc.b21 = Some(v),
            Err(_) => {}
        }
    }
    let mut cell = CellReport {
        index,
        parameters,
        omega: f64::NAN,
        degenerate_omega: false,
        case: None,
        component_count: None,
        everywhere_tangent: None,
        in_frak_z_relaxed: None,
        in_frak_z_strict: None,
        error: None,
    };
    let sys: PiecewiseSystem = match doc.to_system(false) {
        Ok(s) => s,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    cell.omega = sys.omega();
    cell.degenerate_omega = sys.omega().abs() <= OMEGA_EPS;
    match genericity_report(&sys) {
        Ok(g) => {
            cell.in_frak_z_relaxed = Some(g.in_frak_z_relaxed);
            cell.in_frak_z_strict = Some(g.in_frak_z_strict);
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    match classify_tangency_set_with_grid(&sys, grid) {
        Ok(c) => {
            cell.case = Some(c.case.as_str().to_string());
            cell.component_count = Some(c.component_count());
            cell.everywhere_tangent = Some(c.everywhere_tangent);
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

pub fn sweep(config_path: &Path, out_dir: &Path, grid: usize) -> Result<Outcome> {
    let bytes = read_input(config_path)?;
    let config: SweepConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: malformed sweep config: {e}", config_path.display())))?;
    if config.base.b.is_some() {
        return Err(CliError::Input("sweep base must give \"b21\" rather than \"B\"".into()));
    }
    if config.base.b21.is_none() && !config.axes.iter().any(|a| a.entry == "b21") {
        return Err(CliError::Input("sweep base needs \"b21\" unless it is a sweep axis".into()));
    }
    let grid_cells = cells(&config)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))?;
    let reports: Vec<CellReport> = pool.install(|| {
        grid_cells
            .into_par_iter()
            .enumerate()
            .map(|(k, params)| run_cell(&config.base, k, params, grid))
            .collect()
    });

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut run = RunReport::new("sweep", &[(config_path, &bytes)]);
    let mut entries = Vec::with_capacity(reports.len());
    for r in &reports {
        let file = format!("cell_{:04}.json", r.index);
        let path = out_dir.join(&file);
        write_file(&path, &to_json(r)?)?;
        run.output(&path);
        entries.push(IndexEntry {
            index: r.index,
            file,
            parameters: &r.parameters,
            omega: r.omega,
            degenerate_omega: r.degenerate_omega,
            case: &r.case,
        });
    }
    let index = Index {
        count: reports.len(),
        axes: config.axes.iter().map(|a| a.entry.as_str()).collect(),
        cells: entries,
    };
    let index_path = out_dir.join("index.json");
    write_file(&index_path, &to_json(&index)?)?;
    run.output(&index_path);

    let degenerate: Vec<usize> = reports.iter().filter(|r| r.degenerate_omega).map(|r| r.index).collect();
    let failed: Vec<usize> = reports.iter().filter(|r| r.error.is_some()).map(|r| r.index).collect();
    run.set("cells", reports.len());
    run.set("degenerate_omega_cells", &degenerate);
    run.set("failed_cells", &failed);
    Ok(Outcome {
        stdout: format!("{} cells, {} with omega = 0\n", reports.len(), degenerate.len()),
        warnings: failed
            .iter()
            .map(|k| format!("cell {k}: {}", reports[*k].error.clone().unwrap_or_default()))
            .collect(),
        report: run,
    })
}
