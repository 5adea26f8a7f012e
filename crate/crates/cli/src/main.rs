//! Command-line driver: closed-form spectra, moduli reduction, λ_min
//! estimation, moduli sweeps with CSV persistence, cylinder and Mercator
//! checks, and a deterministic SVG plot of sweep results.
//!
//! Exit codes: 0 success, 1 domain errors (invalid lattice, trivial spin
//! where forbidden, malformed inputs), 2 numerical failures, 64 usage
//! errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spintorus::cylinder::{
    cylinder_j, random_bump_spinor, transplant, CutoffProfile, CylinderGrid,
};
use spintorus::lattice::{reduce_to_moduli, LatticeBasis, ModuliPoint, SpinStructure, Vec2};
use spintorus::minimize::{
    estimate_lambda_min, fast_grid_size, sweep_with_workers, Method, MinimizeConfig, SweepRow,
};
use spintorus::spectrum::dirac_spectrum;
use spintorus::{Error, Result};

#[derive(Parser)]
#[command(name = "spintorus", version, about = "Dirac spectra and lambda_min estimation on flat 2-tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct LatticeArgs {
    /// First basis vector, two components.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
    v1: Vec<f64>,
    /// Second basis vector, two components.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
    v2: Vec<f64>,
    /// Spin parities (0 or 1) on the two basis vectors.
    #[arg(long, num_args = 2, value_names = ["E1", "E2"])]
    eps: Vec<u8>,
}

impl LatticeArgs {
    fn build(&self) -> Result<(LatticeBasis, SpinStructure)> {
        let b = LatticeBasis::new(
            Vec2::new(self.v1[0], self.v1[1]),
            Vec2::new(self.v2[0], self.v2[1]),
        )?;
        for e in &self.eps {
            if *e > 1 {
                return Err(Error::Parameter("parities must be 0 or 1".into()));
            }
        }
        Ok((b, SpinStructure::new(self.eps[0] == 1, self.eps[1] == 1)))
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Mode window half-width N.
    #[arg(long, default_value_t = 32)]
    modes: usize,
    /// Quadrature grid per axis (0 = automatic fast size).
    #[arg(long, default_value_t = 0)]
    grid: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Gradient)]
    method: MethodArg,
}

#[derive(Clone, Copy, ValueEnum, serde::Serialize)]
enum MethodArg {
    Gradient,
    FixedPoint,
}

impl SolverArgs {
    fn config(&self) -> MinimizeConfig {
        MinimizeConfig {
            window: self.modes,
            grid: self.grid,
            max_iters: self.max_iters,
            restarts: self.restarts,
            seed: self.seed,
            method: match self.method {
                MethodArg::Gradient => Method::GradientProjection,
                MethodArg::FixedPoint => Method::FixedPoint,
            },
            ..MinimizeConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form Dirac spectrum up to a cutoff, as CSV on stdout.
    Spectrum {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Enumerate eigenvalues with |lambda| <= cutoff.
        #[arg(long)]
        cutoff: f64,
    },
    /// Reduce a lattice with nontrivial spin structure into the moduli
    /// domain; JSON on stdout.
    Reduce {
        #[command(flatten)]
        lattice: LatticeArgs,
    },
    /// Estimate lambda_min at one moduli point; JSON on stdout.
    Minimize {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run the estimator over a list of moduli points from a JSON file
    /// ([[x,y], ...]); writes CSV plus a JSON config sidecar.
    Sweep {
        /// JSON file with the list of points.
        #[arg(long)]
        path: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Evaluate cylinder_J on random compactly supported spinors and on
    /// a transplanted torus near-minimizer.
    CylinderCheck {
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, value_enum, default_value_t = CutoffArg::Gamma)]
        cutoff: CutoffArg,
        #[arg(long, default_value_t = 3.0)]
        axial_extent: f64,
        #[arg(long, default_value_t = 20)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the maximal Mercator conformality defect over random points.
    MercatorCheck {
        #[arg(long, default_value_t = 10_000)]
        points: usize,
    },
    /// Render a sweep CSV as a standalone SVG plot.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CutoffArg {
    Eta,
    Gamma,
}

/// 12-significant-digit formatting shared by the CSV and the plot, so
/// round-trips are exact at the printed precision.
fn sig12(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.11e}")
    }
}

fn run() -> Result<i32> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap's own exit semantics: help/version print to stdout and
            // succeed, everything else is a usage error.
            use clap::error::ErrorKind::*;
            let code = match e.kind() {
                DisplayHelp | DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return Ok(code);
        }
    };

    match cli.command {
        Command::Spectrum { lattice, cutoff } => {
            let (b, s) = lattice.build()?;
            let spec = dirac_spectrum(&b, s, cutoff)?;
            println!("lambda,multiplicity,freq_x,freq_y");
            for e in spec {
                println!(
                    "{},{},{},{}",
                    sig12(e.lambda),
                    e.multiplicity,
                    sig12(e.frequency.x),
                    sig12(e.frequency.y)
                );
            }
        }
        Command::Reduce { lattice } => {
            let (b, s) = lattice.build()?;
            let (p, audit) = reduce_to_moduli(&b, s)?;
            let out = serde_json::json!({
                "x": p.x,
                "y": p.y,
                "matrix": audit.matrix,
                "rotation": audit.rotation,
                "scale": audit.scale,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Command::Minimize { x, y, solver } => {
            let r = estimate_lambda_min(ModuliPoint::new(x, y), &solver.config())?;
            let out = serde_json::json!({
                "lambda_hat": r.lambda_hat,
                "el_residual": r.el_residual,
                "iterations": r.iterations,
                "converged": r.converged,
                "history_len": r.history.len(),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Command::Sweep {
            path,
            out,
            workers,
            solver,
        } => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            let raw: Vec<[f64; 2]> = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("bad points file: {e}")))?;
            let points: Vec<ModuliPoint> =
                raw.iter().map(|p| ModuliPoint::new(p[0], p[1])).collect();
            let cfg = solver.config();
            let result = sweep_with_workers(&points, &cfg, workers)?;
            let mut csv = String::from(
                "x,y,lambda_hat,el_residual,iters,converged,flat_bound,ceiling\n",
            );
            for r in &result.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    sig12(r.point.x),
                    sig12(r.point.y),
                    sig12(r.lambda_hat),
                    sig12(r.el_residual),
                    r.iterations,
                    r.converged,
                    sig12(r.flat_bound),
                    sig12(r.ceiling)
                );
            }
            std::fs::write(&out, csv)
                .map_err(|e| Error::Parse(format!("cannot write {}: {e}", out.display())))?;
            let sidecar = serde_json::json!({
                "points_file": path.display().to_string(),
                "workers": workers,
                "modes": cfg.window,
                "grid": cfg.resolved_grid(),
                "max_iters": cfg.max_iters,
                "restarts": cfg.restarts,
                "tol": cfg.tol,
                "seed": cfg.seed,
                "method": match cfg.method {
                    Method::GradientProjection => "gradient",
                    Method::FixedPoint => "fixed-point",
                },
                "tau_hat": result.tau_hat,
            });
            let mut side = out.clone();
            side.set_extension("csv.json");
            std::fs::write(&side, serde_json::to_string_pretty(&sidecar).unwrap())
                .map_err(|e| Error::Parse(format!("cannot write {}: {e}", side.display())))?;
            for r in &result.rows {
                if let Some(err) = &r.error {
                    eprintln!("point ({}, {}): {err}", r.point.x, r.point.y);
                }
            }
        }
        Command::CylinderCheck {
            x,
            y,
            cutoff,
            axial_extent,
            cases,
            seed,
        } => {
            let period = Vec2::new(x, y);
            let grid = CylinderGrid::new(period, axial_extent, 32, 1201)?;
            let mut min_j = f64::INFINITY;
            for case in 0..cases {
                let mut rng = rand_seed(seed, case as u64);
                let s = random_bump_spinor(&grid, &mut rng)?;
                let j = cylinder_j(&s)?;
                println!("case {case}: J = {}", sig12(j));
                min_j = min_j.min(j);
            }
            // One transplanted near-minimizer from the matching torus.
            let cfg = MinimizeConfig {
                window: 24,
                restarts: 3,
                seed,
                ..MinimizeConfig::default()
            };
            let r = estimate_lambda_min(ModuliPoint::new(x, y).canonicalized(), &cfg)?;
            let profile = match cutoff {
                CutoffArg::Eta => CutoffProfile::Eta,
                CutoffArg::Gamma => CutoffProfile::Gamma { width: y.min(1.0) },
            };
            let q = fast_grid_size(2 * (2 * cfg.window + 1) + 2).next_multiple_of(2);
            let tg = CylinderGrid::new(period, axial_extent, q, 1601)?;
            let samples = transplant(&r.minimizer, profile, &tg)?;
            let j = cylinder_j(&samples)?;
            println!("transplant: J = {}", sig12(j));
            min_j = min_j.min(j);
            println!("minimum: {}", sig12(min_j));
        }
        Command::MercatorCheck { points } => {
            let mut rng = rand_seed(0, 0x5EED);
            let mut max_defect = 0.0f64;
            let mut max_factor_err = 0.0f64;
            let h = 1e-5;
            use rand::Rng;
            for _ in 0..points {
                let p = Vec2::new(
                    8.0 * (rng.gen::<f64>() - 0.5),
                    2.0 * std::f64::consts::PI * rng.gen::<f64>(),
                );
                let col = |dx: f64, dy: f64| {
                    let a = spintorus::cylinder::mercator(Vec2::new(p.x + dx * h, p.y + dy * h));
                    let b = spintorus::cylinder::mercator(Vec2::new(p.x - dx * h, p.y - dy * h));
                    [
                        (a[0] - b[0]) / (2.0 * h),
                        (a[1] - b[1]) / (2.0 * h),
                        (a[2] - b[2]) / (2.0 * h),
                    ]
                };
                let jx = col(1.0, 0.0);
                let jy = col(0.0, 1.0);
                let dot: f64 = jx.iter().zip(&jy).map(|(a, b)| a * b).sum();
                max_defect = max_defect.max(dot.abs());
                let f = spintorus::cylinder::conformal_factor(p);
                for j in [jx, jy] {
                    let n = j.iter().map(|v| v * v).sum::<f64>().sqrt();
                    max_factor_err = max_factor_err.max((n - f).abs() / f);
                }
            }
            println!("max conformality defect: {max_defect:.3e}");
            println!("max conformal factor relative error: {max_factor_err:.3e}");
        }
        Command::Plot { csv, out } => {
            let text = std::fs::read_to_string(&csv)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", csv.display())))?;
            let rows = parse_csv(&text)?;
            if rows.is_empty() {
                return Err(Error::Parse("no rows".into()));
            }
            let svg = render_plot(&rows);
            std::fs::write(&out, svg)
                .map_err(|e| Error::Parse(format!("cannot write {}: {e}", out.display())))?;
        }
    }
    Ok(0)
}

fn rand_seed(seed: u64, salt: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    rand_chacha::ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "x,y,lambda_hat,el_residual,iters,converged,flat_bound,ceiling" {
                return Err(Error::Parse("line 1: unexpected CSV header".to_string()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 8 {
            return Err(Error::Parse(format!(
                "line {}: expected 8 columns, found {}",
                lineno + 1,
                parts.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            let s = parts[i];
            if s == "nan" {
                return Ok(f64::NAN);
            }
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad number '{s}'", lineno + 1)))
        };
        rows.push(SweepRow {
            point: ModuliPoint::new(num(0)?, num(1)?),
            lambda_hat: num(2)?,
            el_residual: num(3)?,
            iterations: parts[4]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad iteration count", lineno + 1)))?,
            converged: match parts[5] {
                "true" => true,
                "false" => false,
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: bad converged flag '{other}'",
                        lineno + 1
                    )))
                }
            },
            flat_bound: num(6)?,
            ceiling: num(7)?,
            error: None,
        });
    }
    Ok(rows)
}

/// Deterministic standalone SVG: lambda_hat against the y moduli
/// coordinate, with the computed reference lines 2√π and π/√y.  The
/// abscissa switches to a logarithmic scale when the y range spans more
/// than a factor of 20.  Every marker carries its source values to full
/// printed precision; non-converged rows render hollow.
fn render_plot(rows: &[SweepRow]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 420.0, 70.0, 20.0, 20.0, 50.0);
    let ys: Vec<f64> = rows.iter().map(|r| r.point.y).collect();
    let ymin = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_axis = ymin > 0.0 && ymax / ymin > 20.0;
    let fwd = |y: f64| if log_axis { y.ln() } else { y };
    let (amin, amax) = (fwd(ymin), fwd(ymax));
    let aspan = (amax - amin).max(1e-9);
    let two_sqrt_pi = 2.0 * std::f64::consts::PI.sqrt();
    let lmax = rows
        .iter()
        .map(|r| r.lambda_hat)
        .chain([two_sqrt_pi])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        * 1.1;
    let px = |y: f64| ml + (fwd(y) - amin) / aspan * (w - ml - mr);
    let py = |l: f64| h - mb - (l / lmax) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>",
        h - mb,
        w - mr
    );
    let _ = writeln!(
        s,
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{0}\" stroke=\"black\"/>",
        h - mb
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">y{}</text>",
        (ml + w - mr) / 2.0,
        h - 12.0,
        if log_axis { " (log scale)" } else { "" }
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">lambda_hat</text>",
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0
    );

    // Reference line 2√π (computed, never a decimal literal).
    let _ = writeln!(
        s,
        "<path id=\"ref-tau\" d=\"M {:.3} {:.3} L {:.3} {:.3}\" stroke=\"#c44\" fill=\"none\" stroke-dasharray=\"6 3\"/>",
        px(ymin),
        py(two_sqrt_pi),
        px(ymax),
        py(two_sqrt_pi)
    );
    // Reference curve π/√y sampled across the axis.
    let mut d = String::from("M");
    for k in 0..=200 {
        let a = amin + aspan * k as f64 / 200.0;
        let y = if log_axis { a.exp() } else { a };
        let l = (std::f64::consts::PI / y.sqrt()).min(lmax);
        let _ = write!(d, " {:.3} {:.3}", px(y), py(l));
        if k == 0 {
            d.push_str(" L");
        }
    }
    let _ = writeln!(
        s,
        "<path id=\"ref-flat\" d=\"{d}\" stroke=\"#48c\" fill=\"none\"/>"
    );

    for r in rows {
        if !r.lambda_hat.is_finite() {
            continue;
        }
        let fill = if r.converged { "#222" } else { "none" };
        let _ = writeln!(
            s,
            "<circle class=\"datum\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"{fill}\" stroke=\"#222\" data-x=\"{}\" data-y=\"{}\" data-lambda-hat=\"{}\" data-el-residual=\"{}\" data-flat-bound=\"{}\" data-ceiling=\"{}\"/>",
            px(r.point.y),
            py(r.lambda_hat),
            sig12(r.point.x),
            sig12(r.point.y),
            sig12(r.lambda_hat),
            sig12(r.el_residual),
            sig12(r.flat_bound),
            sig12(r.ceiling)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::OptimizationFailed(_)
                | Error::ReductionFailed(_)
                | Error::GradientMismatch { .. }
                | Error::DegeneratePairing(_)
                | Error::UnboundedRatio
                | Error::Internal(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
