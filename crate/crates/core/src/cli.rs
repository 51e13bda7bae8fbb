//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a computation fails or a checked
//! identity does not hold, 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::ensembles::{EnsembleKind, EnsembleSpec};
use crate::experiments::{
    adjoin_ones_bijection, fourier_neighborliness, mc_face_ratio, phase_diagram, recovery_trial, trial_reports_csv,
    PinPolicy, PlantedKind,
};
use crate::geometry::DEFAULT_TOL;
use crate::probcalc::{
    curve_area, expected_face_ratio, expected_face_ratio_f64, format_rational, rho_strong, rho_weak,
    wendel_probability, Curve,
};
use crate::svg::emit_svg_heatmap;
use crate::{DimensionSpec, Error, Result, Shape};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const THREADS_ENV: &str = "POLYFACE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "polyface",
    version,
    about = "Face counts of randomly projected orthants, hypercubes and simplices"
)]
struct Cli {
    /// Worker threads (falls back to POLYFACE_THREADS); never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ShapeArg {
    Orthant,
    Hypercube,
}

impl From<ShapeArg> for Shape {
    fn from(s: ShapeArg) -> Shape {
        match s {
            ShapeArg::Orthant => Shape::Orthant,
            ShapeArg::Hypercube => Shape::Hypercube,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Weak,
    Strong,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PinArg {
    Random,
    Empty,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Sparse,
    Box,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

fn parse_ensemble(s: &str) -> std::result::Result<EnsembleKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wendel probability P_{m,M} (probcalc::wendel_probability).
    Wendel {
        /// Ambient dimension.
        #[arg(long)]
        m: usize,
        /// Number of points.
        #[arg(long = "M", id = "points")]
        points: usize,
        /// Print the exact rational p/q.
        #[arg(long)]
        exact: bool,
    },
    /// Expected fraction of surviving k-faces, 1 - P_{N-n,N-k} (probcalc::expected_face_ratio).
    Ratio {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "N", id = "big_n")]
        big_n: usize,
        #[arg(long, value_enum, default_value = "orthant")]
        shape: ShapeArg,
    },
    /// Weak or strong threshold curve (probcalc::rho_weak, probcalc::rho_strong).
    Threshold {
        #[arg(long, value_enum)]
        which: Which,
        /// Single undersampling ratio n/N.
        #[arg(long, conflicts_with = "sweep", required_unless_present = "sweep")]
        delta: Option<f64>,
        /// Tabulate the curve at this many evenly spaced points.
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Area under the weak hypercube threshold curve (probcalc::curve_area).
    Area {
        #[arg(long, default_value_t = 10_000)]
        quad_points: usize,
    },
    /// Monte Carlo face-survival frequency (experiments::mc_face_ratio).
    Mc {
        #[arg(long, value_enum, default_value = "orthant")]
        shape: ShapeArg,
        #[arg(long, value_parser = parse_ensemble, default_value = "gaussian")]
        ensemble: EnsembleKind,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "N", id = "big_n")]
        big_n: usize,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, value_parser = parse_seed, default_value = "0x5EED")]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Hypercube pinning: random 0/1 per trial, or all zero.
        #[arg(long, value_enum, default_value = "random")]
        pins: PinArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase diagram over a grid of (delta, rho) (experiments::phase_diagram).
    Phase {
        #[arg(long = "N", id = "big_n")]
        big_n: usize,
        #[arg(long, default_value_t = 10)]
        grid: usize,
        /// Monte Carlo trials per cell; 0 evaluates the formula only.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, value_enum, default_value = "orthant")]
        shape: ShapeArg,
        #[arg(long, value_parser = parse_ensemble, default_value = "gaussian")]
        ensemble: EnsembleKind,
        #[arg(long, value_parser = parse_seed, default_value = "0x5EED")]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render the table as an SVG heatmap (svg::emit_svg_heatmap).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Exhaustive orthant face counts for the partial Fourier matrix (experiments::fourier_neighborliness).
    Fourier {
        #[arg(long)]
        n: usize,
        #[arg(long = "N", id = "big_n")]
        big_n: usize,
        /// Highest face dimension to count; defaults to (n-1)/2.
        #[arg(long)]
        max_k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Orthant faces with adjoined ones versus simplex faces (experiments::adjoin_ones_bijection).
    Bijection {
        #[arg(long = "N", id = "big_n")]
        big_n: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_parser = parse_seed, default_value = "0x5EED")]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Planted sparse or box-simple recovery (experiments::recovery_trial).
    Recover {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "N", id = "big_n")]
        big_n: usize,
        #[arg(long, value_parser = parse_ensemble, default_value = "gaussian")]
        ensemble: EnsembleKind,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_parser = parse_seed, default_value = "0x5EED")]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()));
    let mut buffer = Vec::new();
    let result = match threads {
        Some(t) if t > 0 => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(cli.command, &mut buffer)),
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        },
        _ => execute(cli.command, &mut buffer),
    };
    let _ = out.write_all(&buffer);
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::InvalidDimensions(_) => 2,
                _ => 1,
            }
        }
    }
}

fn header(command: &str, lines: &[(&str, String)]) -> String {
    let mut h = format!("# polyface {command}\n");
    for (k, v) in lines {
        h.push_str(&format!("# {k} = {v}\n"));
    }
    h
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs one command; `Ok(false)` means a checked identity failed.
fn execute(command: Command, out: &mut Vec<u8>) -> Result<bool> {
    match command {
        Command::Wendel { m, points, exact } => {
            let w = wendel_probability(m, points)?;
            match (&w.exact, exact) {
                (Some(q), true) => writeln!(out, "{}", format_rational(q))?,
                (None, true) => {
                    return Err(Error::InvalidArgument(format!(
                        "exact value unavailable for M > {}; omit --exact",
                        crate::probcalc::EXACT_LIMIT
                    )))
                }
                _ => writeln!(out, "{:.10}", w.value())?,
            }
            Ok(true)
        }
        Command::Ratio { k, n, big_n, shape } => {
            let dims = DimensionSpec::new(k, n, big_n)?;
            let shape = Shape::from(shape);
            match expected_face_ratio(dims, shape) {
                Ok(q) => writeln!(out, "{}", format_rational(&q))?,
                Err(_) => writeln!(out, "{:.10}", expected_face_ratio_f64(dims, shape)?)?,
            }
            Ok(true)
        }
        Command::Threshold { which, delta, sweep } => {
            let curve = |d: f64| match which {
                Which::Weak => rho_weak(d, Shape::Orthant),
                Which::Strong => rho_strong(d),
            };
            if let Some(d) = delta {
                writeln!(out, "{:.10}", curve(d)?)?;
            } else if let Some(steps) = sweep {
                if steps == 0 {
                    return Err(Error::InvalidArgument("--sweep needs at least one step".into()));
                }
                writeln!(out, "delta,rho")?;
                let start = match which {
                    Which::Weak => 0.0,
                    Which::Strong => 0.5,
                };
                for i in 1..=steps {
                    let d = start + (1.0 - start) * i as f64 / steps as f64;
                    writeln!(out, "{d:.10},{:.10}", curve(d)?)?;
                }
            }
            Ok(true)
        }
        Command::Area { quad_points } => {
            writeln!(out, "{:.10}", curve_area(Curve::WeakHypercube, quad_points)?)?;
            Ok(true)
        }
        Command::Mc {
            shape,
            ensemble,
            k,
            n,
            big_n,
            trials,
            seed,
            tol,
            pins,
            out: path,
        } => {
            let dims = DimensionSpec::new(k, n, big_n)?;
            let spec = EnsembleSpec::new(ensemble, n, big_n, seed)?;
            let pins = match pins {
                PinArg::Random => PinPolicy::Random,
                PinArg::Empty => PinPolicy::Empty,
            };
            let report = mc_face_ratio(dims, shape.into(), &spec, trials, seed, pins, tol)?;
            let text = header(
                "mc",
                &[
                    ("seed", format!("{seed:#x}")),
                    ("trials", trials.to_string()),
                    ("tol", format!("{tol:e}")),
                    ("pins", format!("{pins:?}").to_lowercase()),
                ],
            ) + &trial_reports_csv(&[report]);
            emit(out, path.as_deref(), &text)?;
            Ok(true)
        }
        Command::Phase {
            big_n,
            grid,
            trials,
            shape,
            ensemble,
            seed,
            tol,
            out: path,
            svg,
        } => {
            let table = phase_diagram(big_n, grid, trials, shape.into(), &ensemble, seed, tol)?;
            let text = header(
                "phase",
                &[
                    ("seed", format!("{seed:#x}")),
                    ("trials", trials.to_string()),
                    ("tol", format!("{tol:e}")),
                    ("ensemble", ensemble.name()),
                    ("shape", Shape::from(shape).to_string()),
                ],
            ) + &table.to_csv();
            if let Some(svg_path) = svg {
                emit_svg_heatmap(&text, &svg_path)?;
            }
            emit(out, path.as_deref(), &text)?;
            Ok(true)
        }
        Command::Fourier { n, big_n, max_k, tol } => {
            if n % 2 == 0 {
                return Err(Error::InvalidArgument(format!("partial Fourier needs odd n, got {n}")));
            }
            let report = fourier_neighborliness(n, big_n, max_k.unwrap_or((n - 1) / 2), tol)?;
            writeln!(out, "k,total,survived,lost,indeterminate")?;
            for l in &report.levels {
                let c = &l.count;
                writeln!(out, "{},{},{},{},{}", l.k, c.total, c.survived, c.lost, c.indeterminate)?;
            }
            Ok(report.neighborly())
        }
        Command::Bijection {
            big_n,
            n,
            trials,
            seed,
            tol,
        } => {
            let report = adjoin_ones_bijection(big_n, n, trials, seed, tol)?;
            writeln!(out, "trial,k,orthant_faces,simplex_faces,indeterminate")?;
            for t in &report.trials {
                for l in &t.levels {
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        t.trial, l.k, l.orthant_faces, l.simplex_faces, l.indeterminate
                    )?;
                }
            }
            Ok(report.holds())
        }
        Command::Recover {
            kind,
            k,
            n,
            big_n,
            ensemble,
            trials,
            seed,
            tol,
            out: path,
        } => {
            let dims = DimensionSpec::new(k, n, big_n)?;
            let spec = EnsembleSpec::new(ensemble, n, big_n, seed)?;
            let kind = match kind {
                KindArg::Sparse => PlantedKind::KSparseNonneg,
                KindArg::Box => PlantedKind::KSimpleBox,
            };
            let report = recovery_trial(dims, &spec, kind, trials, seed, tol)?;
            let text = header(
                "recover",
                &[
                    ("seed", format!("{seed:#x}")),
                    ("trials", trials.to_string()),
                    ("tol", format!("{tol:e}")),
                ],
            ) + &report.to_csv();
            emit(out, path.as_deref(), &text)?;
            Ok(report.certified_but_failed == 0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("polyface").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn wendel_exact() {
        assert_eq!(
            run_capture(&["wendel", "--m", "4", "--M", "6", "--exact"]),
            (0, "13/16\n".into(), String::new())
        );
        assert_eq!(run_capture(&["wendel", "--m", "4", "--M", "6"]).1, "0.8125000000\n");
    }

    #[test]
    fn threshold_and_area() {
        assert_eq!(
            run_capture(&["threshold", "--which", "weak", "--delta", "0.75"]).1,
            "0.6666666667\n"
        );
        let (code, text, _) = run_capture(&["threshold", "--which", "strong", "--sweep", "4"]);
        assert_eq!(code, 0);
        assert_eq!(text.lines().count(), 5);
        let (code, text, _) = run_capture(&["area"]);
        assert_eq!(code, 0);
        let v: f64 = text.trim().parse().unwrap();
        assert!((v - 0.3069).abs() < 1e-4);
    }

    #[test]
    fn ratio_prints_rational() {
        assert_eq!(run_capture(&["ratio", "--k", "2", "--n", "4", "--N", "8"]).1, "3/16\n");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_capture(&["wendel", "--m", "4"]).0, 2);
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        assert_eq!(run_capture(&["ratio", "--k", "5", "--n", "4", "--N", "8"]).0, 2);
        assert_eq!(run_capture(&["threshold", "--which", "strong", "--delta", "0.2"]).0, 2);
    }

    #[test]
    fn help_names_the_wrapped_operation() {
        for (cmd, op) in [
            ("wendel", "wendel_probability"),
            ("ratio", "expected_face_ratio"),
            ("threshold", "rho_weak"),
            ("area", "curve_area"),
            ("mc", "mc_face_ratio"),
            ("phase", "phase_diagram"),
            ("fourier", "fourier_neighborliness"),
            ("bijection", "adjoin_ones_bijection"),
            ("recover", "recovery_trial"),
        ] {
            let (code, text, _) = run_capture(&[cmd, "--help"]);
            assert_eq!(code, 0);
            assert!(text.contains(op), "{cmd}: {text}");
        }
    }

    #[test]
    fn mc_output_has_comment_header() {
        let (code, text, _) = run_capture(&["mc", "--k", "1", "--n", "2", "--N", "4", "--trials", "50"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# polyface mc");
        assert!(lines.contains(&"# seed = 0x5eed"));
        assert!(lines.contains(&"# tol = 1e-8"));
        assert!(lines.iter().any(|l| l.starts_with("orthant,gaussian,1,2,4,50,")));
    }

    #[test]
    fn seeds_parse_in_hex_and_decimal() {
        assert_eq!(parse_seed("0x5EED"), Ok(0x5EED));
        assert_eq!(parse_seed("24301"), Ok(24301));
        assert!(parse_seed("seed").is_err());
    }
}
