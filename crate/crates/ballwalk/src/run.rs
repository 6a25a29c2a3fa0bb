//! Executes a resolved [`RunConfig`] and writes its outputs.

use std::path::{Path, PathBuf};

use ballwalk_core::analysis::{
    averaging_residual, cone_bound_theta0, escape_probe_radius, estimate_escape_probability,
    estimate_regularity, exit_measure_stats, irregularity_witness, mean_value_residual,
    puncture_capture_bound, SIGMA_THRESHOLD,
};
use ballwalk_core::walk::run_walk_observed;
use ballwalk_core::{
    estimate_field, estimate_value, BoundaryData, Cone, Domain, HarmonicOracle, Point, RngStream,
    Shape, TestFunction, WalkConfig, WalkKind,
};

use crate::config::{Command, ConfigError, Format, Kind, RunConfig};
use crate::grammar::{self, parse_domain, parse_grid};
use crate::pool::Pool;
use crate::report::{coordinate_columns, Cell, Check, Report, Table};
use crate::svg;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] ballwalk_core::Error),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// A finished run: the report plus optional side artefacts.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub svg: Option<String>,
    /// Trajectory CSV (`step,x1..xN`) of walk 0.
    pub trace: Option<String>,
}

fn required<T: Clone>(value: &Option<T>) -> T {
    value.clone().expect("resolved config has all required keys")
}

fn point(key: &'static str, coords: &[f64]) -> Result<Point, RunError> {
    Point::new(coords).map_err(|e| {
        ConfigError::Invalid {
            key,
            message: e.to_string(),
        }
        .into()
    })
}

fn grammar_error(key: &'static str) -> impl Fn(grammar::GrammarError) -> RunError {
    move |e| {
        ConfigError::Invalid {
            key,
            message: e.to_string(),
        }
        .into()
    }
}

fn walk_config(cfg: &RunConfig, epsilon: f64) -> Result<WalkConfig, RunError> {
    let kind = match required(&cfg.kind) {
        Kind::Ball => WalkKind::BallWalk,
        Kind::Sphere => WalkKind::SphereWalk,
    };
    Ok(WalkConfig::new(
        epsilon,
        required(&cfg.stop_tolerance),
        required(&cfg.max_steps),
        kind,
    )?)
}

/// `(|diff| - bias)^+ / stderr`, with the zero-noise case made explicit.
fn deviation_in_stderr(diff: f64, stderr: f64, bias: f64) -> f64 {
    let excess = (diff.abs() - bias).max(0.0);
    if excess == 0.0 {
        0.0
    } else if stderr == 0.0 {
        f64::INFINITY
    } else {
        excess / stderr
    }
}

fn half_angle_ratio(half_angle: f64) -> Result<f64, RunError> {
    let origin = Point::zeros(1)?;
    let axis = Point::basis(1, 0)?;
    Ok(Cone::new(origin, axis, half_angle, 1.0)?.ratio())
}

fn cone_ratio(cfg: &RunConfig) -> Result<f64, RunError> {
    match (cfg.ratio, cfg.half_angle) {
        (Some(r), _) => Ok(r),
        (None, Some(a)) => half_angle_ratio(a),
        (None, None) => Err(ConfigError::Missing("ratio").into()),
    }
}

/// Runs the experiment described by a resolved config.
pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let pool = Pool::new(cfg.threads).map_err(|e| RunError::Pool(e.to_string()))?;
    let command = required(&cfg.command);
    let seed = required(&cfg.seed);
    let mut trace = None;
    let mut svg_text = None;
    let mut checks = Vec::new();

    let domain = match &cfg.domain {
        Some(d) => Some(parse_domain(d).map_err(grammar_error("domain"))?),
        None => None,
    };
    let data = match &cfg.data {
        Some(d) => Some(grammar::parse_data(d, None).map_err(grammar_error("data"))?),
        None => None,
    };
    let domain_ref = || domain.as_ref().expect("resolved config has a domain");

    let table = match command {
        Command::Solve => {
            let domain = domain_ref();
            let data = data.expect("resolved");
            let x0 = point("x0", &required(&cfg.x0))?;
            let wc = walk_config(cfg, required(&cfg.epsilon))?;
            let est = estimate_value(&pool, domain, &data, &x0, &wc, required(&cfg.n_walks), seed)?;
            let reference = match (&cfg.oracle, &data) {
                (Some(o), _) => Some(grammar::parse_oracle(o, None).map_err(grammar_error("oracle"))?),
                (None, BoundaryData::HarmonicTrace(o)) => Some(o.clone()),
                _ => None,
            };
            let reference = reference.map(|o| o.eval(&x0)).transpose()?;
            if let Some(r) = reference {
                let bias = cfg.bias_budget.unwrap_or(0.0);
                checks.push(Check::below(
                    "oracle deviation in stderr (after bias budget)",
                    deviation_in_stderr(est.mean - r, est.stderr, bias),
                    SIGMA_THRESHOLD,
                ));
            }
            if cfg.trace.is_some() {
                trace = Some(trace_csv(domain, &x0, &wc, seed)?);
            }
            let mut t = Table::new(coordinate_columns("x", x0.dim()));
            t.columns.extend(
                ["mean", "stderr", "n", "truncated", "ci95_lo", "ci95_hi", "reference"].map(String::from),
            );
            let mut row: Vec<Cell> = x0.as_slice().iter().map(|&c| c.into()).collect();
            row.extend([
                est.mean.into(),
                est.stderr.into(),
                est.n.into(),
                est.truncated_count.into(),
                est.ci95.0.into(),
                est.ci95.1.into(),
                reference.into(),
            ]);
            t.push(row);
            t
        }
        Command::Field => {
            let domain = domain_ref();
            let data = data.expect("resolved");
            let grid = parse_grid(&required(&cfg.grid)).map_err(grammar_error("grid"))?;
            if grid.counts.len() != domain.dim() {
                return Err(ConfigError::Invalid {
                    key: "grid",
                    message: format!("expected {} axes, got {}", domain.dim(), grid.counts.len()),
                }
                .into());
            }
            let points = grid.points();
            let wc = walk_config(cfg, required(&cfg.epsilon))?;
            let field = estimate_field(&pool, domain, &data, &points, &wc, required(&cfg.n_walks), seed)?;
            let mut t = Table::new(coordinate_columns("x", domain.dim()));
            t.columns.extend(["mean", "stderr", "n", "truncated"].map(String::from));
            let mut cells = vec![None; points.len()];
            for (i, x, est) in &field.entries {
                cells[*i] = Some(est.mean);
                let mut row: Vec<Cell> = x.as_slice().iter().map(|&c| c.into()).collect();
                row.extend([est.mean.into(), est.stderr.into(), est.n.into(), est.truncated_count.into()]);
                t.push(row);
            }
            if cfg.svg == Some(true) {
                if domain.dim() != 2 {
                    return Err(ConfigError::Invalid {
                        key: "svg",
                        message: "heatmaps need a 2-D field".into(),
                    }
                    .into());
                }
                let title = format!("{} on {}", cfg.data.as_deref().unwrap_or(""), cfg.domain.as_deref().unwrap_or(""));
                svg_text = Some(svg::heatmap(&cells, grid.counts[0], grid.counts[1], &title));
            }
            t
        }
        Command::Exitdist => {
            let domain = domain_ref();
            let x0 = point("x0", &required(&cfg.x0))?;
            let eps = required(&cfg.epsilon);
            let wc = walk_config(cfg, eps)?;
            let s = exit_measure_stats(&pool, domain, &x0, required(&cfg.radius), &wc, required(&cfg.n_walks), seed)?;
            let dim = s.dim();
            let mut t = Table::new(["quantity", "value", "stderr", "reference"]);
            for k in 0..dim {
                let name = format!("mean_direction_{}", k + 1);
                let (m, se) = (s.mean_direction[k], s.mean_direction_stderr[k]);
                t.push(vec![name.as_str().into(), m.into(), se.into(), 0.0.into()]);
                checks.push(Check::below(
                    format!("{name} deviation in stderr"),
                    deviation_in_stderr(m, se, 0.0),
                    SIGMA_THRESHOLD,
                ));
            }
            let expected = 1.0 / dim as f64;
            for k in 0..dim {
                let name = format!("second_moment_{}", k + 1);
                let second = s.covariance(k, k) + s.mean_direction[k] * s.mean_direction[k];
                let se = s.covariance_diag_stderr[k];
                t.push(vec![name.as_str().into(), second.into(), se.into(), expected.into()]);
                checks.push(Check::below(
                    format!("{name} deviation in stderr"),
                    deviation_in_stderr(second - expected, se, 0.0),
                    SIGMA_THRESHOLD,
                ));
            }
            let o = s.radial_overshoot;
            t.push(vec!["overshoot_mean".into(), o.mean.into(), Cell::Empty, Cell::Empty]);
            t.push(vec!["overshoot_min".into(), o.min.into(), Cell::Empty, Cell::Empty]);
            t.push(vec!["overshoot_max".into(), o.max.into(), Cell::Empty, Cell::Empty]);
            checks.push(Check::at_least("overshoot_min", o.min, 0.0));
            checks.push(Check::below("overshoot_max", o.max, eps));
            t
        }
        Command::Regularity => {
            let domain = domain_ref();
            let y0 = point("y0", &required(&cfg.y0))?;
            let wc = walk_config(cfg, required(&cfg.epsilon))?;
            let r = estimate_regularity(
                &pool,
                domain,
                &y0,
                required(&cfg.delta),
                required(&cfg.delta_hat),
                &wc,
                required(&cfg.probes) as usize,
                required(&cfg.n_walks),
                seed,
            )?;
            let mut t = Table::new(coordinate_columns("x", domain.dim()));
            t.columns.extend(["probability", "stderr", "n"].map(String::from));
            for probe in &r.probes {
                let mut row: Vec<Cell> = probe.x0.as_slice().iter().map(|&c| c.into()).collect();
                row.extend([
                    probe.probability.p.into(),
                    probe.probability.stderr.into(),
                    probe.probability.n.into(),
                ]);
                t.push(row);
            }
            checks.push(Check::at_least(
                "minimum probe probability (consistent with walk-regularity)",
                r.min_probability(),
                required(&cfg.threshold),
            ));
            t
        }
        Command::Escape => {
            let domain = domain_ref();
            let y0 = point("y0", &required(&cfg.y0))?;
            let x0 = point("x0", &required(&cfg.x0))?;
            let delta = required(&cfg.delta);
            let ratio = cone_ratio(cfg)?;
            let theta0 = cone_bound_theta0(domain.dim(), ratio)?;
            let probe_radius = escape_probe_radius(delta, ratio);
            let wc = walk_config(cfg, required(&cfg.epsilon))?;
            let p = estimate_escape_probability(&pool, domain, &y0, delta, &x0, &wc, required(&cfg.n_walks), seed)?;
            let start = x0.distance(&y0);
            let mut t = Table::new(["quantity", "value", "stderr"]);
            t.push(vec!["R".into(), ratio.into(), Cell::Empty]);
            t.push(vec!["theta0".into(), theta0.into(), Cell::Empty]);
            t.push(vec!["probe_radius".into(), probe_radius.into(), Cell::Empty]);
            t.push(vec!["start_distance".into(), start.into(), Cell::Empty]);
            t.push(vec!["escape_probability".into(), p.p.into(), p.stderr.into()]);
            checks.push(Check::below("start distance within probe radius", start, probe_radius));
            checks.push(Check::at_most(
                "escape probability minus 4 stderr",
                p.p - SIGMA_THRESHOLD * p.stderr,
                theta0,
            ));
            t
        }
        Command::Cone => {
            let ratio = cone_ratio(cfg)?;
            let theta0 = cone_bound_theta0(required(&cfg.dim), ratio)?;
            let mut t = Table::new(["quantity", "value"]);
            t.push(vec!["R".into(), ratio.into()]);
            t.push(vec!["theta0".into(), theta0.into()]);
            if let Some(delta) = cfg.delta {
                t.push(vec!["probe_radius".into(), escape_probe_radius(delta, ratio).into()]);
            }
            t
        }
        Command::CheckMvp => {
            let domain = domain_ref();
            let data = data.expect("resolved");
            let x0 = point("x0", &required(&cfg.x0))?;
            let wc = walk_config(cfg, required(&cfg.epsilon))?;
            let r = mean_value_residual(
                &pool,
                domain,
                &data,
                &x0,
                &wc,
                required(&cfg.n_outer),
                required(&cfg.n_inner),
                seed,
            )?;
            let mut t = Table::new(["quantity", "value"]);
            t.push(vec!["residual".into(), r.residual.into()]);
            t.push(vec!["stderr".into(), r.stderr.into()]);
            t.push(vec!["z".into(), r.z_score().into()]);
            checks.push(Check::below("mean-value residual in stderr", r.z_score(), SIGMA_THRESHOLD));
            t
        }
        Command::CheckAvg => {
            let x0 = point("x0", &required(&cfg.x0))?;
            let eps = required(&cfg.epsilon);
            let dim = x0.dim() as f64;
            let spec = required(&cfg.function);
            let (residual, remainder) = match spec.trim() {
                "norm2" | "x1^4" => {
                    let f = if spec.trim() == "norm2" { TestFunction::SquaredNorm } else { TestFunction::QuarticFirst };
                    let r = averaging_residual(&pool, |y: &Point| f.eval(y), f.laplacian(&x0), &x0, eps, required(&cfg.n_walks), seed)?;
                    // Quartic remainder: eps^4 E[w1^4] = 3 eps^4 / ((N + 2)(N + 4)).
                    let remainder = match f {
                        TestFunction::SquaredNorm => 0.0,
                        TestFunction::QuarticFirst => 3.0 * eps.powi(4) / ((dim + 2.0) * (dim + 4.0)),
                    };
                    (r, remainder)
                }
                other => {
                    let oracle = grammar::parse_oracle(other, None).map_err(grammar_error("function"))?;
                    check_ball_in_region(&oracle, &x0, eps)?;
                    let r = averaging_residual(
                        &pool,
                        |y: &Point| oracle.eval(y).unwrap_or(f64::NAN),
                        0.0,
                        &x0,
                        eps,
                        required(&cfg.n_walks),
                        seed,
                    )?;
                    (r, 0.0)
                }
            };
            let mut t = Table::new(["quantity", "value"]);
            t.push(vec!["residual".into(), residual.residual.into()]);
            t.push(vec!["stderr".into(), residual.stderr.into()]);
            t.push(vec!["expected_remainder".into(), remainder.into()]);
            t.push(vec!["residual_over_eps2".into(), (residual.residual / (eps * eps)).into()]);
            checks.push(Check::below(
                "averaging residual minus exact remainder, in stderr",
                deviation_in_stderr(residual.residual - remainder, residual.stderr, 0.0),
                SIGMA_THRESHOLD,
            ));
            t
        }
        Command::Irregularity => {
            let domain = domain_ref();
            let y0 = point("y0", &required(&cfg.y0))?;
            let direction = point("direction", &required(&cfg.direction))?;
            let epsilons = required(&cfg.epsilons);
            let min_eps = epsilons.iter().copied().fold(1.0, f64::min);
            let wc = walk_config(cfg, min_eps)?;
            let rows = irregularity_witness(
                &pool,
                domain,
                &y0,
                &direction,
                &epsilons,
                &required(&cfg.distances),
                &wc,
                required(&cfg.n_walks),
                seed,
            )?;
            let punctured = matches!(domain.shape(), Shape::PuncturedBall { .. });
            let mut t = Table::new(["epsilon", "distance"].map(String::from));
            t.columns.extend(coordinate_columns("x", domain.dim()));
            t.columns.extend(["mean", "stderr", "n", "truncated", "capture_bound"].map(String::from));
            let threshold = required(&cfg.threshold);
            for row in &rows {
                let e = row.estimate;
                let bound = punctured.then(|| puncture_capture_bound(row.start_distance, wc.stop_tolerance));
                let mut cells: Vec<Cell> = vec![row.epsilon.into(), row.start_distance.into()];
                cells.extend(row.x0.as_slice().iter().map(|&c| Cell::from(c)));
                cells.extend([e.mean.into(), e.stderr.into(), e.n.into(), e.truncated_count.into(), bound.into()]);
                t.push(cells);
                checks.push(Check::at_least(
                    format!(
                        "gap from F(y0) minus 4 stderr at epsilon={} distance={}",
                        row.epsilon, row.start_distance
                    ),
                    e.mean - SIGMA_THRESHOLD * e.stderr,
                    threshold,
                ));
            }
            t
        }
    };

    Ok(Outcome {
        report: Report {
            command: command.name(),
            config: cfg.for_report(),
            table,
            checks,
        },
        svg: svg_text,
        trace,
    })
}

fn check_ball_in_region(oracle: &HarmonicOracle, x0: &Point, eps: f64) -> Result<(), RunError> {
    let ok = match oracle {
        HarmonicOracle::FundamentalSolution { z0 } => x0.distance(z0) > eps,
        HarmonicOracle::PoissonDisk { .. } => x0.norm() + eps < 1.0 - 1e-6,
        _ => true,
    };
    if ok {
        oracle.eval(x0)?;
        Ok(())
    } else {
        Err(ballwalk_core::Error::OutsideOracleRegion.into())
    }
}

fn trace_csv(domain: &Domain, x0: &Point, wc: &WalkConfig, seed: u64) -> Result<String, RunError> {
    let mut out = String::from("step,");
    out.push_str(&coordinate_columns("x", x0.dim()).join(","));
    out.push('\n');
    let mut stream = RngStream::new(seed, 0, 0);
    run_walk_observed(domain, x0, wc, &mut stream, x0, |step, x| {
        let coords: Vec<String> = x.as_slice().iter().map(f64::to_string).collect();
        out.push_str(&format!("{step},{}\n", coords.join(",")));
    })?;
    Ok(out)
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| RunError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Path of the resolved-config sidecar written next to CSV reports.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

/// Writes the report (to `output` or stdout), the config sidecar for CSV
/// files, the SVG next to the output, and the trace file.
pub fn write_outputs(cfg: &RunConfig, outcome: &Outcome, stdout: &mut dyn std::io::Write) -> Result<(), RunError> {
    let body = match required(&cfg.format) {
        Format::Csv => outcome.report.to_csv(),
        Format::Json => outcome.report.to_json(),
    };
    match &cfg.output {
        Some(path) => {
            write(path, &body)?;
            if cfg.format == Some(Format::Csv) {
                let mut sidecar = outcome.report.config.to_json();
                sidecar.push('\n');
                write(&sidecar_path(path), &sidecar)?;
            }
            if let Some(svg) = &outcome.svg {
                write(&path.with_extension("svg"), svg)?;
            }
        }
        None => stdout.write_all(body.as_bytes()).map_err(|e| RunError::Io {
            path: "<stdout>".into(),
            message: e.to_string(),
        })?,
    }
    if let (Some(path), Some(trace)) = (&cfg.trace, &outcome.trace) {
        write(path, trace)?;
    }
    Ok(())
}
