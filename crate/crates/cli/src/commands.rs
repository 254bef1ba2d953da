//! One function per subcommand. Each writes its output files and returns
//! the [`Outcome`] for the terminal.

use std::fmt::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use torus_filippov::equivalence::{equivalence_check_with, Criterion};
use torus_filippov::sliding::OMEGA_EPS;
use torus_filippov::tangency::match_case;
use torus_filippov::{
    classify_tangency_set_with_grid, genericity_report, orbit_closure_check, region_map,
    simulate, Mode, PiecewiseSystem, Point, Polyline, RegionKind, SegmentFlag, TangencyCase,
};

use crate::document::{require_inelastic, SystemDocument};
use crate::report::{fmt_f64, to_json, write_file, RunReport};
use crate::svg::{region_color, Chart};
use crate::{CliError, Outcome, Result};

/// Samples per analytic component in classification output.
const COMPONENT_SAMPLES: usize = 64;
/// Grid of the region shading behind SVG renderings.
const SHADING_GRID: usize = 64;

fn load(path: &Path, allow_non_inelastic: bool) -> Result<(PiecewiseSystem, Vec<u8>)> {
    let (doc, bytes) = SystemDocument::load(path)?;
    Ok((doc.to_system(allow_non_inelastic)?, bytes))
}

pub fn case_label(sys: &PiecewiseSystem) -> &'static str {
    match_case(sys.exterior.matrix())
        .unwrap_or(TangencyCase::NumericalFallback)
        .as_str()
}

fn omega_warning(omega: f64) -> Option<String> {
    (omega.abs() <= OMEGA_EPS).then(|| {
        "omega = 0: the sliding field vanishes and every torus point is an equilibrium".to_string()
    })
}

pub fn derive_b(input: &Path, output: &Path) -> Result<Outcome> {
    let (doc, bytes) = SystemDocument::load(input)?;
    let full = doc.with_derived_b()?;
    let sys = full.to_system(false)?;
    write_file(output, &to_json(&full)?)?;

    let omega = sys.omega();
    let mut report = RunReport::new("derive-b", &[(input, &bytes)]);
    report.output(output);
    report.set("omega", omega);
    report.set("degenerate_omega", omega.abs() <= OMEGA_EPS);
    Ok(Outcome {
        stdout: format!("omega = {omega}\n"),
        warnings: omega_warning(omega).into_iter().collect(),
        report,
    })
}

#[derive(Debug, Serialize)]
pub struct ComponentDoc {
    pub kind: String,
    pub parameters: Value,
    pub samples: Vec<[f64; 3]>,
}

#[derive(Debug, Serialize)]
pub struct ClassificationDoc {
    pub case: TangencyCase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub everywhere_tangent: bool,
    pub component_count: usize,
    pub components: Vec<ComponentDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polylines: Option<Vec<Polyline>>,
}

fn region_shading(chart: &mut Chart, sys: &PiecewiseSystem) -> Result<()> {
    let step = std::f64::consts::TAU / SHADING_GRID as f64;
    for s in region_map(sys, SHADING_GRID)? {
        chart.cell(s.u - step / 2.0, s.v - step / 2.0, step, step, region_color(s.region));
    }
    Ok(())
}

pub fn classify(
    input: &Path,
    output: &Path,
    grid: usize,
    svg: Option<&Path>,
    allow_non_inelastic: bool,
) -> Result<Outcome> {
    let (sys, bytes) = load(input, allow_non_inelastic)?;
    require_inelastic(&sys)?;
    let c = classify_tangency_set_with_grid(&sys, grid)?;

    let mut components: Vec<ComponentDoc> = Vec::new();
    for comp in &c.components {
        let mut parameters = serde_json::to_value(comp)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        if let Value::Object(map) = &mut parameters {
            map.remove("kind");
        }
        components.push(ComponentDoc {
            kind: comp.label().to_string(),
            parameters,
            samples: comp.sample(COMPONENT_SAMPLES).iter().map(|p| [p.x, p.y, p.z]).collect(),
        });
    }
    for line in &c.polylines {
        components.push(ComponentDoc {
            kind: "Polyline".to_string(),
            parameters: serde_json::json!({
                "length": line.length(),
                "closed": line.closed,
                "vertices": line.points.len(),
            }),
            samples: line.points.clone(),
        });
    }
    let fallback = c.case == TangencyCase::NumericalFallback;
    let doc = ClassificationDoc {
        case: c.case,
        gamma: c.gamma,
        everywhere_tangent: c.everywhere_tangent,
        component_count: c.component_count(),
        components,
        polylines: fallback.then(|| c.polylines.clone()),
    };
    write_file(output, &to_json(&doc)?)?;

    let mut report = RunReport::new("classify", &[(input, &bytes)]);
    report.output(output);
    if let Some(path) = svg {
        let mut chart = Chart::new();
        region_shading(&mut chart, &sys)?;
        for comp in &c.components {
            chart.space_curve(&sys.torus, &comp.sample(256), "black", false, true);
        }
        for line in &c.polylines {
            chart.curve(&line.uv, "black", 1.5, false, true);
        }
        write_file(path, &chart.finish(&format!("tangency set: {}", c.case.as_str())))?;
        report.output(path);
    }
    report.set("case", c.case.as_str());
    report.set("component_count", c.component_count());
    report.set("gamma", c.gamma);
    report.set("everywhere_tangent", c.everywhere_tangent);
    report.set("omega", sys.omega());
    report.set("degenerate_omega", sys.omega().abs() <= OMEGA_EPS);

    let mut warnings: Vec<String> = omega_warning(sys.omega()).into_iter().collect();
    if c.everywhere_tangent {
        warnings.push("the exterior field is tangent to the torus everywhere".into());
    }
    Ok(Outcome {
        stdout: format!("{}: {} components\n", c.case.as_str(), c.component_count()),
        warnings,
        report,
    })
}

pub fn simulate_cmd(
    input: &Path,
    x0: [f64; 3],
    t_max: f64,
    output: &Path,
    svg: Option<&Path>,
    allow_non_inelastic: bool,
) -> Result<Outcome> {
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(CliError::Input(format!("--tmax must be finite and non-negative, got {t_max}")));
    }
    if x0.iter().any(|c| !c.is_finite()) {
        return Err(CliError::Input("--x0 must be finite".into()));
    }
    let (sys, bytes) = load(input, allow_non_inelastic)?;
    require_inelastic(&sys)?;
    let start = Point::new(x0[0], x0[1], x0[2]);
    let traj = simulate(&sys, &start, t_max)?;

    let mut csv = String::from("t,x,y,z,mode,segment\n");
    for (k, seg) in traj.segments.iter().enumerate() {
        for (t, p) in &seg.samples {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{k}",
                fmt_f64(*t),
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_f64(p.z),
                seg.mode.label()
            );
        }
    }
    write_file(output, &csv)?;

    let mut report = RunReport::new("simulate", &[(input, &bytes)]);
    report.output(output);
    if let Some(path) = svg {
        let mut chart = Chart::new();
        region_shading(&mut chart, &sys)?;
        for seg in &traj.segments {
            let pts: Vec<Point> = seg.samples.iter().map(|(_, p)| *p).collect();
            let sliding = seg.mode == Mode::Sliding;
            let color = if sliding { "#d62728" } else { "#2ca02c" };
            chart.space_curve(&sys.torus, &pts, color, !sliding, false);
        }
        write_file(path, &chart.finish("trajectory (dashed: free flight, projected)"))?;
        report.output(path);
    }

    let last = traj.segments.last().map(|s| s.terminal_event);
    let mut flags: Vec<SegmentFlag> = traj.segments.iter().flat_map(|s| s.flags.clone()).collect();
    flags.dedup();
    report.set("omega", sys.omega());
    report.set("degenerate_omega", sys.omega().abs() <= OMEGA_EPS);
    report.set("case", case_label(&sys));
    report.set("segments", traj.segments.len());
    report.set(
        "modes",
        traj.segments.iter().map(|s| s.mode.label()).collect::<Vec<_>>(),
    );
    report.set("terminal_event", last);
    report.set("flags", &flags);
    report.set("t_end", traj.end_time());

    let mut warnings: Vec<String> = omega_warning(sys.omega()).into_iter().collect();
    if flags.contains(&SegmentFlag::NonDeterministicEscape) {
        warnings.push("started on an escaping point; followed the sliding extension".into());
    }
    Ok(Outcome {
        stdout: format!("{} segments, t_end = {}\n", traj.segments.len(), traj.end_time()),
        warnings,
        report,
    })
}

pub fn regions(
    input: &Path,
    grid: usize,
    output: &Path,
    svg: Option<&Path>,
    allow_non_inelastic: bool,
) -> Result<Outcome> {
    let (sys, bytes) = load(input, allow_non_inelastic)?;
    let map = region_map(&sys, grid)?;
    let mut csv = String::from("u,v,region\n");
    let mut counts = std::collections::BTreeMap::new();
    for s in &map {
        let _ = writeln!(csv, "{},{},{}", fmt_f64(s.u), fmt_f64(s.v), s.region.as_str());
        *counts.entry(s.region.as_str()).or_insert(0usize) += 1;
    }
    write_file(output, &csv)?;

    let mut report = RunReport::new("regions", &[(input, &bytes)]);
    report.output(output);
    if let Some(path) = svg {
        let step = std::f64::consts::TAU / grid as f64;
        let mut chart = Chart::new();
        for s in &map {
            chart.cell(s.u - step / 2.0, s.v - step / 2.0, step, step, region_color(s.region));
        }
        write_file(path, &chart.finish("regions: sliding (blue), escaping (orange), tangency (grey)"))?;
        report.output(path);
    }
    report.set("grid", grid);
    report.set("counts", &counts);
    report.set("omega", sys.omega());
    report.set("case", case_label(&sys));

    let mut warnings = Vec::new();
    if counts.contains_key(RegionKind::Crossing.as_str()) {
        warnings.push("crossing cells present: the system is not inelastic".into());
    }
    let summary: Vec<String> = counts.iter().map(|(k, n)| format!("{k} {n}")).collect();
    Ok(Outcome {
        stdout: format!("{}\n", summary.join(", ")),
        warnings,
        report,
    })
}

#[derive(Debug, Serialize)]
struct ClosureDoc {
    closed: bool,
    period: f64,
    gap: f64,
}

pub fn orbit_check(input: &Path, p0: [f64; 3], allow_non_inelastic: bool) -> Result<Outcome> {
    let (sys, bytes) = load(input, allow_non_inelastic)?;
    require_inelastic(&sys)?;
    let closure = orbit_closure_check(&sys, &Point::new(p0[0], p0[1], p0[2]))?;
    let doc = ClosureDoc {
        closed: closure.closed,
        period: closure.measured_period,
        gap: closure.return_gap,
    };
    let mut report = RunReport::new("orbit-check", &[(input, &bytes)]);
    report.set("omega", sys.omega());
    report.set("predicted_period", std::f64::consts::TAU / sys.omega().abs());
    report.set("closed", closure.closed);
    report.set("measured_period", closure.measured_period);
    report.set("return_gap", closure.return_gap);
    Ok(Outcome {
        stdout: to_json(&doc)?,
        warnings: Vec::new(),
        report,
    })
}

pub fn equiv(
    first: &Path,
    second: &Path,
    output: &Path,
    criterion: Criterion,
    allow_non_inelastic: bool,
) -> Result<Outcome> {
    let (s1, b1) = load(first, allow_non_inelastic)?;
    let (s2, b2) = load(second, allow_non_inelastic)?;
    let r = equivalence_check_with(&s1, &s2, criterion)?;
    write_file(output, &to_json(&r)?)?;

    let g1 = genericity_report(&s1)?;
    let g2 = genericity_report(&s2)?;
    let mut report = RunReport::new("equiv", &[(first, &b1), (second, &b2)]);
    report.output(output);
    report.set("equivalent", r.equivalent);
    report.set("criterion", criterion);
    report.set("omega", [s1.omega(), s2.omega()]);
    report.set("case", [g1.case.as_str(), g2.case.as_str()]);
    report.set("in_frak_z_relaxed", [g1.in_frak_z_relaxed, g2.in_frak_z_relaxed]);
    report.set("in_frak_z_strict", [g1.in_frak_z_strict, g2.in_frak_z_strict]);

    let verdict = match r.homeomorphism_descriptor {
        Some(h) if r.equivalent => format!("equivalent via {h:?}\n"),
        _ => "not equivalent\n".to_string(),
    };
    let warnings = [s1.omega(), s2.omega()].into_iter().filter_map(omega_warning).collect();
    Ok(Outcome {
        stdout: verdict,
        warnings,
        report,
    })
}
