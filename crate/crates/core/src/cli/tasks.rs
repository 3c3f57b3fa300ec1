use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::error::CliError;
use super::options::{Options, Task};
use super::report::CsvTable;
use crate::charts::KahlerChart;
use crate::curvature::{frame_at, Geometry};
use crate::fefferman::{self, identity_checks, identity_suite, k_tensor, FeffermanTensors};
use crate::ke_ode::{build_polys, ke_feasibility, rationality_probe, solve_radial, FeasibilityReport};
use crate::monge_ampere::{assemble_u, DiskBundlePoint};
use crate::obstruction::{self, ObstructionReport, Ray};

/// Rows of the solve-ke table: `r = k/200`, `k = 0..=200`.
pub const KE_ROWS: usize = 201;

const DEFAULT_COUNT: usize = 20;

pub fn run_task(task: Task, opts: &Options) -> Result<(), CliError> {
    match task {
        Task::CurvatureReport => curvature_report(opts),
        Task::SolveKe => solve_ke(opts),
        Task::CheckMa => check_ma(opts),
        Task::Obstruction => obstruction_task(opts),
        Task::FeffermanTensors => fefferman_tensors(opts),
        Task::Feasibility => feasibility(opts),
    }
}

fn write_csv(table: &CsvTable, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => table.write(std::fs::File::create(path)?)?,
        None => table.write(std::io::stdout().lock())?,
    }
    Ok(())
}

fn write_json(value: &impl Serialize, path: Option<&Path>, stderr: bool) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match (path, stderr) {
        (Some(p), _) => std::fs::write(p, text)?,
        (None, false) => std::io::stdout().lock().write_all(text.as_bytes())?,
        (None, true) => std::io::stderr().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Data to `--out` or stdout, summary to `--summary` or stderr.
fn emit(table: &CsvTable, summary: &impl Serialize, opts: &Options) -> Result<(), CliError> {
    write_csv(table, opts.out.as_deref())?;
    write_json(summary, opts.summary.as_deref(), true)
}

fn coordinate_columns(n: usize) -> Vec<String> {
    (1..=n).flat_map(|k| [format!("x{k}"), format!("y{k}")]).collect()
}

fn flatten(p: &[Complex64]) -> Vec<f64> {
    p.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Uniform points of the box `[-1.5, 1.5]^{2n}` lying well inside the chart
/// (the point scaled by 1.25 must still be in the domain).
fn random_points(chart: &KahlerChart, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = chart.dim();
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count && tries < 1000 * (count + 1) {
        tries += 1;
        let p: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
            .collect();
        let outer: Vec<Complex64> = p.iter().map(|z| z * 1.25).collect();
        if chart.contains(&p) && chart.contains(&outer) {
            out.push(p);
        }
    }
    out
}

/// Explicit `--point`s, else seeded random points, else the chart's grid.
fn points(chart: &KahlerChart, opts: &Options, default_count: usize) -> Result<Vec<Vec<Complex64>>, CliError> {
    if let Some(ps) = &opts.points {
        for p in ps {
            if p.0.len() != chart.dim() {
                return Err(CliError::config(format!(
                    "point has {} coordinates, chart {} needs {}",
                    p.0.len(),
                    chart.label(),
                    chart.dim()
                )));
            }
            if !chart.contains(&p.0) {
                return Err(CliError::config(format!("point {:?} is outside {}", p.0, chart.label())));
            }
        }
        return Ok(ps.iter().map(|p| p.0.clone()).collect());
    }
    let count = opts.count.unwrap_or(default_count);
    let pts = match opts.sample_seed {
        Some(seed) => random_points(chart, count, seed),
        None => chart.sample_points(count),
    };
    if pts.len() < count {
        return Err(CliError::config(format!(
            "could only place {} of {count} points inside {}",
            pts.len(),
            chart.label()
        )));
    }
    Ok(pts)
}

#[derive(Serialize)]
struct CurvatureSummary<'a> {
    task: Task,
    chart: &'a str,
    points: usize,
    order: usize,
    scalar_min: f64,
    scalar_max: f64,
    max_scalar_gradient: f64,
    /// Largest range of any sorted eigenvalue over the points.
    eigenvalue_spread: f64,
    catalog_eigenvalues: Option<Vec<f64>>,
}

fn curvature_report(opts: &Options) -> Result<(), CliError> {
    let chart = opts.require_chart()?.build()?;
    let order = opts.order.unwrap_or(6);
    if order < 5 {
        return Err(CliError::config("curvature-report needs --order of at least 5"));
    }
    let pts = points(&chart, opts, DEFAULT_COUNT)?;
    let n = chart.dim();
    let rows: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|p| {
            let geo = Geometry::from_potential(chart.potential_jet(p, order)?)?;
            let f = geo.frame()?;
            let mut row = flatten(p);
            row.extend([f.scalar, f.central]);
            row.extend(&f.eigenvalues);
            row.push(geo.scalar_gradient_norm()?);
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;

    let mut cols = coordinate_columns(n);
    cols.extend(["R".into(), "C".into()]);
    cols.extend((1..=n).map(|k| format!("eig{k}")));
    cols.push("grad_R".into());
    let mut table = CsvTable::new(&cols);
    rows.into_iter().for_each(|r| table.push(r));

    let col = |k: usize| table.rows.iter().map(move |r| r[k]);
    let range = |k: usize| {
        let (lo, hi) = col(k).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        (lo, hi)
    };
    let (scalar_min, scalar_max) = range(2 * n);
    let eigenvalue_spread = (0..n)
        .map(|k| {
            let (lo, hi) = range(2 * n + 2 + k);
            hi - lo
        })
        .fold(0.0, f64::max);
    let summary = CurvatureSummary {
        task: Task::CurvatureReport,
        chart: chart.label(),
        points: table.rows.len(),
        order,
        scalar_min,
        scalar_max,
        max_scalar_gradient: col(3 * n + 2).fold(0.0, f64::max),
        eigenvalue_spread,
        catalog_eigenvalues: chart.constant_ricci_eigenvalues(),
    };
    emit(&table, &summary, opts)
}

fn bundle_dimension(opts: &Options, eigs: &[f64]) -> Result<usize, CliError> {
    let m = opts.m.unwrap_or(eigs.len() + 1);
    if m != eigs.len() + 1 {
        return Err(CliError::config(format!(
            "--m {m} does not match {} eigenvalues (m is their count plus one)",
            eigs.len()
        )));
    }
    Ok(m)
}

fn infeasible(report: FeasibilityReport) -> Result<CliError, CliError> {
    Ok(CliError::Infeasible {
        message: format!(
            "largest eigenvalue {} is not below 1; no Kähler–Einstein solution exists",
            report.max_eigenvalue
        ),
        report: serde_json::to_value(report)?,
    })
}

fn solve_ke(opts: &Options) -> Result<(), CliError> {
    let eigs = opts.require_eigs()?;
    let m = bundle_dimension(opts, eigs)?;
    let report = ke_feasibility(eigs, m);
    if !report.feasible {
        return Err(infeasible(report)?);
    }
    let poly = build_polys(eigs, m, None)?;
    let sol = solve_radial(&poly)?;
    let mp1 = (m + 1) as f64;
    let mut table = CsvTable::new(&["r", "Z", "dZ", "phi", "dphi", "ode_residual", "phi_residual"]);
    for k in 0..KE_ROWS {
        let r = k as f64 / (KE_ROWS - 1) as f64;
        let (z, dz, phi, dphi) = (sol.z(r), sol.dz(r), sol.phi(r), sol.dphi(r));
        let ode = r * dz * poly.p_hat.eval(z) + poly.q_hat.eval(z);
        let phi_res = mp1 * r * z * dphi + (mp1 - 2.0 * z) * phi;
        table.push(vec![r, z, dz, phi, dphi, ode, phi_res]);
    }
    let summary = json!({
        "task": Task::SolveKe,
        "eigenvalues": eigs,
        "m": m,
        "z0": sol.z0,
        "z2": sol.z2,
        "residuals": sol.residuals,
        "rationality": rationality_probe(&sol),
    });
    emit(&table, &summary, opts)
}

fn feasibility(opts: &Options) -> Result<(), CliError> {
    let eigs = opts.require_eigs()?;
    let m = bundle_dimension(opts, eigs)?;
    let report = ke_feasibility(eigs, m);
    write_json(&report, opts.out.as_deref(), false)?;
    if report.feasible {
        Ok(())
    } else {
        Err(infeasible(report)?)
    }
}

fn check_ma(opts: &Options) -> Result<(), CliError> {
    let chart = opts.require_chart()?.build()?;
    let tol = opts.tolerance.unwrap_or(1e-6);
    let x_max = opts.x_max.unwrap_or(0.9);
    if !(x_max > 0.0 && x_max < 1.0) {
        return Err(CliError::config("--x-max must lie in (0, 1)"));
    }
    let base = points(&chart, opts, 5)?;
    let eigs = match chart.constant_ricci_eigenvalues() {
        Some(e) => e,
        None => frame_at(&chart, &base[0], 4)?.eigenvalues,
    };
    let m = eigs.len() + 1;
    let report = ke_feasibility(&eigs, m);
    if !report.feasible {
        return Err(infeasible(report)?);
    }
    let u = assemble_u(&chart, &solve_radial(&build_polys(&eigs, m, None)?)?)?;
    let phases = [0.0, 0.5 * std::f64::consts::PI, 2.0, 4.5];
    let mut grid = Vec::new();
    for z in &base {
        for k in 0..5 {
            for &ph in &phases {
                grid.push(DiskBundlePoint::with_radius(&chart, z.clone(), x_max * k as f64 / 4.0, ph)?);
            }
        }
    }
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|p| {
            let j = u.j_value(p)?;
            let ke = u.ke_residual_at(p)?;
            let det = if p.x > 0.0 {
                let d = u.det_identity_check(p)?;
                d.det.max(d.blocks)
            } else {
                f64::NAN
            };
            let mut row = flatten(&p.z);
            row.extend([p.xi.re, p.xi.im, p.x, j, (j - 1.0).abs(), ke, det]);
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    let mut cols = coordinate_columns(chart.dim());
    cols.extend(["xi_re", "xi_im", "X", "J", "J_err", "ke_err", "det_err"].map(String::from));
    let mut table = CsvTable::new(&cols);
    rows.into_iter().for_each(|r| table.push(r));
    let k0 = chart.dim() * 2;
    let max_of = |k: usize| table.rows.iter().map(|r| r[k]).filter(|x| !x.is_nan()).fold(0.0, f64::max);
    let (max_j, max_ke, max_det) = (max_of(k0 + 4), max_of(k0 + 5), max_of(k0 + 6));
    let summary = json!({
        "task": Task::CheckMa,
        "chart": chart.label(),
        "eigenvalues": eigs,
        "m": m,
        "points": table.rows.len(),
        "x_max": x_max,
        "tolerance": tol,
        "max_j_err": max_j,
        "max_ke_err": max_ke,
        "max_det_err": max_det,
        "pass": max_j < tol,
    });
    write_csv(&table, opts.out.as_deref())?;
    if max_j < tol {
        write_json(&summary, opts.summary.as_deref(), true)
    } else {
        // stderr is reserved for the error document, which embeds the summary.
        if opts.summary.is_some() {
            write_json(&summary, opts.summary.as_deref(), true)?;
        }
        Err(CliError::Numerical {
            message: format!("max |J(u) - 1| = {max_j:e} exceeds {tol:e}"),
            report: Some(summary),
        })
    }
}

fn obstruction_task(opts: &Options) -> Result<(), CliError> {
    let chart = opts.require_chart()?.build()?;
    let order = opts.order.unwrap_or(obstruction::DEFAULT_ORDER);
    let tol = opts.tolerance.unwrap_or(obstruction::FLAT_TOLERANCE);
    let ray = match &opts.ray {
        Some(spec) => {
            let dir = match &opts.direction {
                Some(d) => d.0.clone(),
                None => vec![Complex64::new(1.0, 0.0); chart.dim()],
            };
            Some(Ray::parse(spec, dir)?)
        }
        None => None,
    };
    let default_count = if ray.is_some() { 0 } else { 50 };
    let grid = points(&chart, opts, default_count)?;
    let report = ObstructionReport::build(&chart, &grid, ray, order, tol)?;
    let mut table = CsvTable::new(&obstruction::PointValues::COLUMNS);
    report.rows.iter().for_each(|r| table.push(r.row()));
    emit(&table, &report.summary(), opts)
}

fn fefferman_tensors(opts: &Options) -> Result<(), CliError> {
    let chart = opts.require_chart()?.build()?;
    let order = opts.order.unwrap_or(fefferman::DEFAULT_ORDER);
    let p = match &opts.points {
        Some(ps) if ps.len() == 1 => points(&chart, opts, 1)?.remove(0),
        Some(_) => return Err(CliError::config("fefferman-tensors takes exactly one --point")),
        None => chart
            .sample_points(1)
            .pop()
            .ok_or_else(|| CliError::config("chart has no sample point"))?,
    };
    let kt = k_tensor(&chart, &p, order)?;
    let mut doc: Value = json!({
        "chart": chart.label(),
        "point": p,
        "order": order,
        "tensors": FeffermanTensors::new(&kt),
        "identities": identity_checks(&kt)?,
    });
    if opts.count.is_some() || opts.sample_seed.is_some() {
        let suite_opts = Options {
            points: None,
            ..opts.clone()
        };
        let pts = points(&chart, &suite_opts, 50)?;
        doc["suite"] = json!({ "points": pts.len(), "worst": identity_suite(&chart, &pts, order)? });
    }
    write_json(&doc, opts.out.as_deref(), false)
}
