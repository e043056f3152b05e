//! Command-line pipeline: generate or load fields, transform them, evaluate
//! densities and conservation laws, and write reports, plot tables and
//! ESTF files.

mod config;
mod report;

use std::cell::OnceCell;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{
    BoundaryConfig, DcConfig, GeneratorConfig, GridConfig, ModeConfig, RunConfig, ScalesConfig, Spacing, VolumeConfig,
};
pub use report::{PlotTable, Report, Row, Status, CSV_COLUMNS};

use crate::conservation::{
    active_from, ds_route_gap, integral_laws, reactive_from, residual_complex, stack_densities, ResidualField,
};
use crate::densities::{scan_stack, static_limit_bounds, DensityBundle};
use crate::error::{Error, Result};
use crate::estf::{round_trip, EstfFile};
use crate::field::{analytic_fields, maxwell_residual, AnalyticGenerator, EMFieldSample, ScaleStack};
use crate::grid::Axis;
use crate::kernel::Boundary;
use crate::stencil::derivative_3pt;

#[derive(Debug, Clone, Parser)]
#[command(name = "reactive-time", about = "Complex-time analysis of sampled electromagnetic fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Multiplies every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tolerance_scale: f64,
    /// Seed for randomized spot checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write `report.txt` without echoing it to stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample the configured generator and write `field.estf`.
    Gen,
    /// Transform to complex time and write `analytic.estf`.
    Transform,
    /// Scaled densities and pointwise identities.
    Densities,
    /// Differential and integral conservation laws.
    Conserve,
    /// Monotonicity and static limit along the scale grid.
    Scan,
    /// Every stage in sequence.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Transform => "transform",
            Command::Densities => "densities",
            Command::Conserve => "conserve",
            Command::Scan => "scan",
            Command::Report => "report",
        }
    }
}

/// Parses `args`, runs, and returns the process exit status: 0 when every
/// check passes, 1 when any fails, 2 on configuration, format or I/O errors.
pub fn main_with_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(report) => {
            if !cli.quiet {
                print!("{}", report.render());
            }
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let record = error_record(&e);
            eprintln!("{record}");
            if std::fs::create_dir_all(&cli.out).is_ok() {
                let _ = std::fs::write(cli.out.join("error.json"), format!("{record}\n"));
            }
            2
        }
    }
}

pub fn error_record(e: &Error) -> serde_json::Value {
    serde_json::json!({ "error": error_kind(e), "message": e.to_string() })
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::EstfHeader(_) => "estf_header",
        Error::EstfPayload(_) => "estf_payload",
        Error::RoundTripMismatch { .. } => "round_trip_mismatch",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
        _ => "numerics",
    }
}

/// Executes `cli.command`, writing artifacts under `cli.out`.
pub fn run(cli: &Cli) -> Result<Report> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if !(cli.tolerance_scale > 0.0) {
        return Err(Error::Config(format!("tolerance scale {} must be positive", cli.tolerance_scale)));
    }
    std::fs::create_dir_all(&cli.out)?;
    let ctx = Context {
        cfg,
        out: cli.out.clone(),
        tol_scale: cli.tolerance_scale,
        seed: cli.seed,
        sample: OnceCell::new(),
        stack: OnceCell::new(),
    };
    let mut report = Report::new(cli.command.name(), cli.seed);
    ctx.describe(&mut report);
    match cli.command {
        Command::Gen => ctx.gen(&mut report)?,
        Command::Transform => ctx.transform(&mut report)?,
        Command::Densities => ctx.densities(&mut report)?,
        Command::Conserve => ctx.conserve(&mut report)?,
        Command::Scan => ctx.scan(&mut report)?,
        Command::Report => {
            ctx.gen(&mut report)?;
            ctx.transform(&mut report)?;
            ctx.densities(&mut report)?;
            ctx.conserve(&mut report)?;
            ctx.scan(&mut report)?;
        }
    }
    report.write(&ctx.out.join("report.txt"))?;
    Ok(report)
}

struct Context {
    cfg: RunConfig,
    out: PathBuf,
    tol_scale: f64,
    seed: u64,
    sample: OnceCell<EMFieldSample<f64>>,
    stack: OnceCell<ScaleStack<f64>>,
}

impl Context {
    fn tol(&self, check: &str, default: f64) -> f64 {
        self.cfg.tolerance(check, default) * self.tol_scale
    }

    fn check(&self, r: &mut Report, check: &str, value: f64, default: f64, tag: &'static str) {
        r.check(check, value, self.tol(check, default), tag);
    }

    fn describe(&self, r: &mut Report) {
        match &self.cfg.input {
            Some(p) => r.note(format!("input: {}", p.display())),
            None => r.note(format!("generator: {}", self.cfg.generator.kind())),
        }
        let g = &self.cfg.grid;
        r.note(format!("grid counts [nx, ny, nz, nt]: {:?}", g.counts));
        let s = &self.cfg.scales;
        match &s.values {
            Some(v) => r.note(format!("scales: {} explicit values", v.len())),
            None => r.note(format!("scales: {} {:?}-spaced in [{}, {}]", s.count, s.spacing, s.min, s.max)),
        }
    }

    fn generator(&self) -> Result<Option<Box<dyn AnalyticGenerator<f64>>>> {
        if self.cfg.input.is_some() {
            return Ok(None);
        }
        self.cfg.generator.build().map(Some)
    }

    fn sample(&self) -> Result<&EMFieldSample<f64>> {
        if let Some(f) = self.sample.get() {
            return Ok(f);
        }
        let f = match &self.cfg.input {
            Some(p) => EstfFile::read(p)?.to_sample()?,
            None => self.cfg.generator.build()?.sample(&self.cfg.grid()?)?,
        };
        Ok(self.sample.get_or_init(|| f))
    }

    fn stack(&self) -> Result<&ScaleStack<f64>> {
        if let Some(s) = self.stack.get() {
            return Ok(s);
        }
        let s = analytic_fields(self.sample()?, &self.cfg.scale_grid()?, self.cfg.boundary(), &self.cfg.dc_policy())?;
        Ok(self.stack.get_or_init(|| s))
    }

    fn persist(&self, r: &mut Report, name: &str, file: &EstfFile) -> Result<()> {
        let path = self.out.join(name);
        file.write(&path)?;
        let value = match round_trip(&path) {
            Ok(()) => 0.0,
            Err(Error::RoundTripMismatch { offset }) => {
                r.note(format!("{name}: round trip differs at byte {offset}"));
                1.0
            }
            Err(e) => return Err(e),
        };
        r.check(&format!("estf round trip {name}"), value, 0.0, "plumbing");
        Ok(())
    }

    fn gen(&self, r: &mut Report) -> Result<()> {
        let f = self.sample()?;
        let m = maxwell_residual(f)?;
        let g = &f.grid;
        let reference = g
            .interior(true)
            .indices(g)
            .into_iter()
            .flat_map(|i| f.e.iter().chain(&f.h).map(move |c| g.derivative(c, Axis::T, i).abs()))
            .fold(f64::MIN_POSITIVE, f64::max);
        self.check(r, "maxwell faraday", m.faraday.max / reference, 1e-2, "maxwell");
        self.check(r, "maxwell ampere", m.ampere.max / reference, 1e-2, "maxwell");
        self.check(r, "maxwell gauss E", m.gauss_e.max / reference, 1e-2, "maxwell");
        self.check(r, "maxwell gauss H", m.gauss_h.max / reference, 1e-2, "maxwell");
        self.persist(r, "field.estf", &EstfFile::from_sample(f)?)
    }

    fn transform(&self, r: &mut Report) -> Result<()> {
        let f = self.sample()?;
        let stack = self.stack()?;
        if let Some(gen) = self.generator()? {
            let mut worst = 0.0f64;
            let mut peak = 0.0f64;
            for a in stack.fields.iter().filter(|a| a.scale.is_finite()) {
                let exact = gen.analytic(&f.grid, a.scale)?;
                worst = worst.max(a.max_abs_diff(&exact));
                peak = exact.channels().iter().flat_map(|c| c.iter()).fold(peak, |m, z| m.max(z.norm()));
            }
            let default = if self.cfg.boundary() == Boundary::Periodic { 1e-9 } else { 1e-3 };
            self.check(r, "transform vs closed form", worst / peak.max(f64::MIN_POSITIVE), default, "analytic-signal");
        }
        let finite = finite_stack(stack)?;
        if finite.len() >= 3 {
            self.check(r, "analyticity spot check", self.analyticity_probe(&finite), 1e-2, "analyticity");
        }
        self.persist(r, "analytic.estf", &EstfFile::from_stack(stack)?)
    }

    /// `max |∂_t𝐗 + i∂_s𝐗| / max |∂_t𝐗|` over randomly drawn interior nodes
    /// and scales of `𝐄` and `𝐇`.
    fn analyticity_probe(&self, stack: &ScaleStack<f64>) -> f64 {
        let g = stack.grid();
        let pts = g.interior(true).indices(g);
        if pts.is_empty() {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (mut gap, mut scale) = (0.0f64, 0.0f64);
        for _ in 0..self.cfg.probes {
            let q = rng.random_range(1..stack.len() - 1);
            let idx = pts[rng.random_range(0..pts.len())];
            let (a, b, c) = (&stack.fields[q - 1], &stack.fields[q], &stack.fields[q + 1]);
            for ch in 0..6 {
                let pick = |f: &crate::field::AnalyticEMField<f64>| f.channels()[ch][idx];
                let dt = g.derivative(b.channels()[ch], Axis::T, idx);
                let ds = derivative_3pt([a.scale, b.scale, c.scale], [pick(a), pick(b), pick(c)]);
                gap = gap.max((dt + Complex::<f64>::i() * ds).norm());
                scale = scale.max(dt.norm());
            }
        }
        gap / scale.max(f64::MIN_POSITIVE)
    }

    fn densities(&self, r: &mut Report) -> Result<()> {
        let finite = finite_stack(self.stack()?)?;
        let bundles: Vec<DensityBundle<f64>> =
            finite.fields.iter().map(crate::densities::scaled_densities).collect::<Result<_>>()?;
        let (mut gap, mut below, mut peak) = (0.0f64, 0.0f64, 0.0f64);
        for b in &bundles {
            for idx in 0..b.len() {
                let s2: f64 = b.s.iter().map(|c| c[idx] * c[idx]).sum();
                let t2: f64 = b.t.iter().map(|c| c[idx] * c[idx]).sum();
                let lhs = b.u[idx] * b.u[idx] - s2 - t2;
                let rhs = b.x[idx] * b.x[idx] + b.r[idx] * b.r[idx];
                gap = gap.max((lhs - rhs).abs());
                below = below.max(b.x[idx].abs() - b.u[idx]);
                peak = peak.max(b.u[idx]);
            }
        }
        let peak = peak.max(f64::MIN_POSITIVE);
        self.check(r, "U^2 - S^2 - T^2 = X^2 + R^2", gap / (peak * peak), 1e-12, "energy-identity");
        self.check(r, "U >= |X|", below.max(0.0) / peak, 1e-14, "energy-identity");
        let table = plot_table(&bundles, None, None);
        table.write(&self.out.join("densities.csv"))
    }

    fn conserve(&self, r: &mut Report) -> Result<()> {
        let stack = finite_stack(self.stack()?)?;
        let bundles = stack_densities(&stack)?;
        let active = active_from(&bundles)?;
        let reactive = reactive_from(&bundles)?;
        let complex = residual_complex(&stack)?;
        let (ra, rr) = (active_reference(&bundles, &active), reactive_reference(&bundles, &reactive));
        self.check(r, "active law", active.norm_max / ra, 1e-2, "active-law");
        self.check(r, "reactive law", reactive.norm_max / rr, 1e-2, "reactive-law");
        let split = complex
            .values
            .iter()
            .zip(active.values.iter().zip(&reactive.values))
            .fold(0.0f64, |m, (c, (a, q))| m.max((c - Complex::new(*a, *q)).norm()));
        self.check(r, "complex law = active + i reactive", split / ra.max(rr), 1e-12, "complex-law");
        let gap = ds_route_gap(&stack)?;
        self.check(r, "ds X finite difference vs analyticity", gap.norm_max / rr, 1e-2, "reactive-law");
        r.note("reactive law written -ds X + div T = Q; flux into a volume raises X as s decreases");
        if let Some(v) = &self.cfg.volume {
            let rep = integral_laws(&stack, &v.index_box())?;
            let reference = integral_reference(&rep);
            self.check(r, "integral active balance", rep.active_max() / reference, 1e-2, "integral-laws");
            self.check(r, "integral reactive balance", rep.reactive_max() / reference, 1e-2, "integral-laws");
            self.check(
                r,
                "volume div S vs surface flux",
                rep.divergence_gap / reference,
                1e-12,
                "integral-laws",
            );
        }
        plot_table(&bundles, Some(&active), Some(&reactive)).write(&self.out.join("conserve.csv"))
    }

    fn scan(&self, r: &mut Report) -> Result<()> {
        let f = self.sample()?;
        let stack = self.stack()?;
        let scan = scan_stack(stack, 0.0)?;
        let m = &scan.monotone;
        let peak = scan.bundles.iter().flat_map(|b| b.u.iter()).fold(f64::MIN_POSITIVE, |a, v| a.max(*v));
        r.note(format!("monotonicity: {} Wm and {} We increases over {} steps", m.wm_violations, m.we_violations, m.checked));
        self.check(r, "Wm non-increasing in s", m.worst_wm.max(0.0) / peak, 1e-12, "monotonicity");
        self.check(r, "We non-increasing in s", m.worst_we.max(0.0) / peak, 1e-12, "monotonicity");
        if let (Some(statics), Some(top)) = (&stack.fields[0].dc, scan.bundles.last()) {
            let bounds = static_limit_bounds(f, statics, top.scale)?;
            let ns = f.grid.spatial_len();
            let mut excess = 0.0f64;
            for idx in 0..top.len() {
                let p = idx % ns;
                let ee: f64 = statics.e.iter().map(|c| c[p] * c[p]).sum();
                let hh: f64 = statics.h.iter().map(|c| c[p] * c[p]).sum();
                let du = (top.u[idx] - 0.25 * (ee + hh)).abs();
                let dx = (top.x[idx] - 0.25 * (hh - ee)).abs();
                excess = excess.max(du.max(dx) - bounds[p]);
            }
            self.check(r, "static limit deviation above bound", excess.max(0.0) / peak, 1e-12, "static-limit");
        }
        plot_table(&scan.bundles, None, None).write(&self.out.join("scan.csv"))
    }
}

fn finite_stack(stack: &ScaleStack<f64>) -> Result<ScaleStack<f64>> {
    ScaleStack::new(stack.fields.iter().filter(|f| f.scale.is_finite()).cloned().collect())
}

/// `max 𝒰 / h` with `h` the finest active spacing: the size of a density
/// difference quotient, used when every term of a law vanishes.
fn density_floor(bundles: &[DensityBundle<f64>]) -> f64 {
    let g = bundles[0].grid;
    let h = [Axis::X, Axis::Y, Axis::Z, Axis::T]
        .into_iter()
        .filter(|&a| g.is_active(a))
        .map(|a| g.spacing(a))
        .fold(f64::INFINITY, f64::min);
    let peak = bundles.iter().flat_map(|b| b.u.iter()).fold(0.0f64, |a, v| a.max(*v));
    (peak / h).max(f64::MIN_POSITIVE)
}

fn active_reference(bundles: &[DensityBundle<f64>], r: &ResidualField<f64, f64>) -> f64 {
    r.points
        .iter()
        .map(|&(q, i)| {
            let b = &bundles[q];
            let g = &b.grid;
            g.derivative(&b.u, Axis::T, i).abs() + g.divergence(&b.s, i).abs() + b.p[i].abs()
        })
        .fold(density_floor(bundles) * 1e-6, f64::max)
}

fn reactive_reference(bundles: &[DensityBundle<f64>], r: &ResidualField<f64, f64>) -> f64 {
    r.points
        .iter()
        .map(|&(q, i)| {
            let (a, b, c) = (&bundles[q - 1], &bundles[q], &bundles[q + 1]);
            let dsx = derivative_3pt([a.scale, b.scale, c.scale], [a.x[i], b.x[i], c.x[i]]);
            dsx.abs() + b.grid.divergence(&b.t, i).abs() + b.q[i].abs()
        })
        .fold(density_floor(bundles) * 1e-6, f64::max)
}

fn integral_reference(rep: &crate::conservation::IntegralReport<f64>) -> f64 {
    [&rep.flux_s, &rep.flux_t, &rep.power_p, &rep.power_q]
        .iter()
        .flat_map(|m| m.iter().flatten())
        .fold(f64::MIN_POSITIVE, |a, v| a.max(v.abs()))
}

fn plot_table(
    bundles: &[DensityBundle<f64>],
    active: Option<&ResidualField<f64, f64>>,
    reactive: Option<&ResidualField<f64, f64>>,
) -> PlotTable {
    let Some(first) = bundles.first() else {
        return PlotTable::default();
    };
    let g = first.grid;
    let (ns, nt) = (g.spatial_len(), g.nt);
    let worst = |r: Option<&ResidualField<f64, f64>>| {
        r.map(|r| {
            let mut m = vec![vec![None; nt]; bundles.len()];
            for (v, &(q, idx)) in r.values.iter().zip(&r.points) {
                let it = g.unravel(idx)[3];
                let cell: &mut Option<f64> = &mut m[q][it];
                *cell = Some(cell.map_or(v.abs(), |c: f64| c.max(v.abs())));
            }
            m
        })
    };
    let (wa, wr) = (worst(active), worst(reactive));
    let mean = |v: &[f64], it: usize| v[it * ns..(it + 1) * ns].iter().sum::<f64>() / ns as f64;
    let mut rows = Vec::with_capacity(bundles.len() * nt);
    for (q, b) in bundles.iter().enumerate() {
        for it in 0..nt {
            let abs3 = |f: &[Vec<f64>; 3]| {
                (it * ns..(it + 1) * ns).map(|i| f.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt()).sum::<f64>()
                    / ns as f64
            };
            rows.push([
                Some(b.scale),
                Some(g.time(it)),
                Some(mean(&b.u, it)),
                Some(mean(&b.x, it)),
                Some(abs3(&b.s)),
                Some(abs3(&b.t)),
                Some(mean(&b.p, it)),
                Some(mean(&b.q, it)),
                wa.as_ref().and_then(|m| m[q][it]),
                wr.as_ref().and_then(|m| m[q][it]),
            ]);
        }
    }
    PlotTable { rows }
}

/// Exit status of `main_with_args` for `args` with `out` as output directory.
#[doc(hidden)]
pub fn run_in(out: &Path, args: &[&str]) -> i32 {
    let mut full: Vec<OsString> = vec!["reactive-time".into()];
    full.extend(args.iter().map(OsString::from));
    full.push("--out".into());
    full.push(out.as_os_str().to_owned());
    full.push("--quiet".into());
    main_with_args(full)
}
