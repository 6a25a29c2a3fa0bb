//! Flag parsing and the top-level driver used by the binary.

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::config::{Command, ConfigError, Format, Kind, RunConfig};
use crate::grammar::parse_vector;
use crate::run::{run, write_outputs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Comma-separated list parsed as one flag value. The alias keeps clap from
/// treating the field as a repeated argument.
type Coords = Vec<f64>;

fn vector(s: &str) -> Result<Coords, String> {
    parse_vector(s).map_err(|e| e.to_string())
}

/// Monte Carlo Dirichlet solver and experiment runner based on the ball walk.
///
/// Flags override values from `--config`; the seed falls back to
/// BALLWALK_SEED and then 0.
#[derive(Debug, Parser)]
#[command(name = "ballwalk", version)]
pub struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Flat JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    pub emit_config: bool,

    /// Domain, e.g. "ball(0,0;1)" or "diff(box(0,0;1,1),ball(0.5,0.5;0.2))".
    #[arg(long)]
    pub domain: Option<String>,
    /// Boundary data, e.g. "coordinate(1)" or "quad(1,-1)".
    #[arg(long)]
    pub data: Option<String>,
    /// Harmonic oracle for comparisons, e.g. "linear(1,0;0)".
    #[arg(long)]
    pub oracle: Option<String>,
    /// check-avg test function: norm2, x1^4, or an oracle.
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long, value_parser = vector, allow_hyphen_values = true)]
    pub x0: Option<Coords>,
    #[arg(long, value_parser = vector, allow_hyphen_values = true)]
    pub y0: Option<Coords>,
    #[arg(long, value_parser = vector, allow_hyphen_values = true)]
    pub direction: Option<Coords>,
    /// Field grid "lo;hi;counts", e.g. "0,0;1,1;21,21".
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long = "eps")]
    pub epsilon: Option<f64>,
    #[arg(long, value_parser = vector)]
    pub epsilons: Option<Coords>,
    #[arg(long, value_parser = vector)]
    pub distances: Option<Coords>,
    #[arg(long = "stop")]
    pub stop_tolerance: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long = "walks")]
    pub n_walks: Option<u64>,
    #[arg(long = "outer")]
    pub n_outer: Option<u64>,
    #[arg(long = "inner")]
    pub n_inner: Option<u64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub delta_hat: Option<f64>,
    #[arg(long)]
    pub probes: Option<u64>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Exterior cone ratio.
    #[arg(long = "R")]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub half_angle: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long = "bias")]
    pub bias_budget: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write an SVG heatmap next to the output (2-D fields).
    #[arg(long)]
    pub svg: bool,
    /// Write the trajectory of walk 0 (solve) as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

impl Cli {
    /// The flag layer of the configuration.
    pub fn to_config(&self) -> RunConfig {
        RunConfig {
            command: self.command,
            domain: self.domain.clone(),
            data: self.data.clone(),
            oracle: self.oracle.clone(),
            function: self.function.clone(),
            x0: self.x0.clone(),
            y0: self.y0.clone(),
            direction: self.direction.clone(),
            grid: self.grid.clone(),
            epsilon: self.epsilon,
            epsilons: self.epsilons.clone(),
            distances: self.distances.clone(),
            stop_tolerance: self.stop_tolerance,
            max_steps: self.max_steps,
            kind: self.kind,
            n_walks: self.n_walks,
            n_outer: self.n_outer,
            n_inner: self.n_inner,
            radius: self.radius,
            delta: self.delta,
            delta_hat: self.delta_hat,
            probes: self.probes,
            dim: self.dim,
            ratio: self.ratio,
            half_angle: self.half_angle,
            threshold: self.threshold,
            bias_budget: self.bias_budget,
            seed: self.seed,
            threads: self.threads,
            output: self.output.clone(),
            format: self.format,
            svg: self.svg.then_some(true),
            trace: self.trace.clone(),
        }
    }

    /// Flags over the config file, then defaults and range checks.
    pub fn resolve(&self, env_seed: Option<&str>) -> Result<RunConfig, ConfigError> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        self.to_config().over(base).resolve(env_seed)
    }
}

/// Runs the CLI and returns the process exit code. Reports go to `stdout`
/// unless an output path is configured; diagnostics go to `stderr`.
pub fn main_with(cli: &Cli, env_seed: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cfg = match cli.resolve(env_seed) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    if cli.emit_config {
        let _ = writeln!(stdout, "{}", cfg.to_json());
        return EXIT_OK;
    }
    let outcome = match run(&cfg).and_then(|o| write_outputs(&cfg, &o, stdout).map(|()| o)) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    for check in &outcome.report.checks {
        let _ = writeln!(stderr, "{}", check.summary());
    }
    if outcome.report.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ballwalk").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn solve_flags() {
        let cli = parse(&[
            "solve", "--domain", "ball(0,0;1)", "--data", "coordinate(1)", "--eps", "0.1", "--walks",
            "100000", "--seed", "7", "--x0", "0.3,0.4",
        ]);
        let cfg = cli.resolve(None).unwrap();
        assert_eq!(cfg.command, Some(Command::Solve));
        assert_eq!(cfg.domain.as_deref(), Some("ball(0,0;1)"));
        assert_eq!(cfg.data.as_deref(), Some("coordinate(1)"));
        assert_eq!(cfg.epsilon, Some(0.1));
        assert_eq!(cfg.n_walks, Some(100_000));
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.x0, Some(vec![0.3, 0.4]));
    }

    #[test]
    fn negative_coordinates() {
        let cli = parse(&["solve", "--x0", "-0.3,0.4"]);
        assert_eq!(cli.x0, Some(vec![-0.3, 0.4]));
    }

    #[test]
    fn missing_epsilon_is_named() {
        let cli = parse(&["solve", "--domain", "ball(0,0;1)", "--data", "coordinate(1)", "--x0", "0.3,0.4"]);
        let e = cli.resolve(None).unwrap_err();
        assert_eq!(e, ConfigError::Missing("epsilon"));
        assert!(e.to_string().contains("epsilon"));
    }

    #[test]
    fn out_of_range_epsilon() {
        let cli = parse(&[
            "solve", "--domain", "ball(0,0;1)", "--data", "coordinate(1)", "--x0", "0.3,0.4", "--eps", "1.5",
        ]);
        assert!(matches!(cli.resolve(None), Err(ConfigError::Range { key: "epsilon", .. })));
    }

    #[test]
    fn cone_prints_theta0() {
        let cli = parse(&["cone", "--dim", "3", "--R", "1"]);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(main_with(&cli, None, &mut out, &mut err), EXIT_OK);
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("theta0,0.888888888888888"), "{text}");
    }
}
