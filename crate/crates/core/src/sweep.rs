//! Experiment runner: power sweeps, the distortion-vs-power plot data, and
//! the full verification report.
//!
//! # Config format
//!
//! A flat TOML file; every key is optional and defaults to the values below.
//!
//! ```toml
//! sigma_s2 = 1.0
//! sigma_n2 = 1.0
//! alphas = [0.25, 0.5, 0.75, 1.0]
//! p_grid = [0.0, 0.5, 1.0]          # default: 0, 0.5, ..., 20 (41 points)
//! mc = true                         # compute the d_mc / mc_stderr columns
//! mc_samples = 100000
//! mc_seed = 20180514
//! quad_nodes = 96
//! quad_trunc_sigmas = 10.0
//! output_dir = "out"
//! ```
//!
//! # Outputs
//!
//! * `sweep.csv`: header `alpha,p,sigma_s2,sigma_n2,k1_star,decoder_a,d_closed,d_quad,d_mc,mc_stderr,rel_err_quad`,
//!   floats with 17 significant digits, `d_mc`/`mc_stderr` empty when MC is off.
//! * `figure3.dat`: one `# alpha=<v>` block of `P D` rows per exponent,
//!   largest exponent first, blocks separated by a blank line.
//! * `verification.txt`: `PASS|FAIL <check-name> <metric> <tolerance>` per line.
//! * `metadata.txt`: seeds, sample counts, quadrature settings and RNG algorithm.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::channel::{GaussianTestChannel, LinearEncoder};
use crate::distortion::{
    distortion_closed_best_response, distortion_distorted_expectation, distortion_quadrature,
    distortion_ratio, tilted_joint_mass, AgentProfile, QuadratureSpec,
};
use crate::equilibrium::{
    gain_grid, offset_grid, stackelberg_solve, stencil, verify_decoder_optimality,
    verify_encoder_optimality, GameSpec, DEFAULT_GAIN_POINTS, ENCODER_SLACK,
};
use crate::error::{Error, Result};
use crate::gaussian::GaussianDensity;
use crate::mc::{mc_distortion, mc_distortion_importance, McConfig, RNG_ALGORITHM};
use crate::prospect::{convergence_study, Alpha, WeightFunction};

pub const CSV_HEADER: &str =
    "alpha,p,sigma_s2,sigma_n2,k1_star,decoder_a,d_closed,d_quad,d_mc,mc_stderr,rel_err_quad";

/// Quadrature must match the closed form to this relative error.
pub const QUAD_REL_TOLERANCE: f64 = 1e-5;
/// Monte Carlo must match within this many standard errors.
pub const MC_SIGMAS: f64 = 4.0;
pub const NORMALIZER_REL_TOLERANCE: f64 = 1e-6;
pub const RATIO_REL_TOLERANCE: f64 = 1e-10;
/// Final error allowed for the pure power-tail weight at the finest lattice.
pub const POWER_TAIL_CONVERGENCE_TOLERANCE: f64 = 1e-3;

pub const CONVERGENCE_LATTICE: [u32; 4] = [4, 16, 64, 256];
pub const NORMALIZER_GAINS: [f64; 3] = [0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sigma_s2: f64,
    pub sigma_n2: f64,
    pub alphas: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub mc: bool,
    pub mc_samples: usize,
    pub mc_seed: u64,
    pub quad_nodes: usize,
    pub quad_trunc_sigmas: f64,
    pub output_dir: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sigma_s2: 1.0,
            sigma_n2: 1.0,
            alphas: vec![0.25, 0.5, 0.75, 1.0],
            p_grid: (0..=40).map(|i| f64::from(i) * 0.5).collect(),
            mc: true,
            mc_samples: 100_000,
            mc_seed: 20_180_514,
            quad_nodes: 96,
            quad_trunc_sigmas: 10.0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// Checks every field and reports all offenders at once.
    pub fn validate(&self) -> Result<SweepPlan> {
        let mut problems = Vec::new();
        let channel = match GaussianTestChannel::new(self.sigma_s2, self.sigma_n2) {
            Ok(ch) => Some(ch),
            Err(_) => {
                if !(self.sigma_s2 > 0.0 && self.sigma_s2.is_finite()) {
                    problems.push(format!("sigma_s2 must be positive, got {}", self.sigma_s2));
                }
                if !(self.sigma_n2 > 0.0 && self.sigma_n2.is_finite()) {
                    problems.push(format!("sigma_n2 must be positive, got {}", self.sigma_n2));
                }
                None
            }
        };
        if self.alphas.is_empty() {
            problems.push("alphas must not be empty".into());
        }
        let alphas: Vec<Alpha> = self
            .alphas
            .iter()
            .filter_map(|&a| match Alpha::new(a) {
                Ok(a) => Some(a),
                Err(_) => {
                    problems.push(format!("alphas entry {a} is outside (0, 1]"));
                    None
                }
            })
            .collect();
        if self.p_grid.is_empty() {
            problems.push("p_grid must not be empty".into());
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            problems.push(format!("p_grid entry {p} must be a nonnegative number"));
        }
        if self.p_grid.windows(2).any(|w| w[0] > w[1]) {
            problems.push("p_grid must be sorted ascending".into());
        }
        let mc = if self.mc {
            match McConfig::new(self.mc_samples, self.mc_seed) {
                Ok(cfg) => Some(cfg),
                Err(Error::Validation(msgs)) => {
                    problems.extend(msgs);
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let quad = match QuadratureSpec::new(self.quad_nodes, self.quad_trunc_sigmas) {
            Ok(q) => Some(q),
            Err(Error::Validation(msgs)) => {
                problems.extend(msgs);
                None
            }
            Err(e) => return Err(e),
        };
        if self.output_dir.as_os_str().is_empty() {
            problems.push("output_dir must not be empty".into());
        }
        match (channel, quad) {
            (Some(channel), Some(quad)) if problems.is_empty() => Ok(SweepPlan {
                channel,
                alphas,
                p_grid: self.p_grid.clone(),
                mc,
                quad,
                output_dir: self.output_dir.clone(),
            }),
            _ => Err(Error::Validation(problems)),
        }
    }
}

/// A validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub channel: GaussianTestChannel,
    pub alphas: Vec<Alpha>,
    pub p_grid: Vec<f64>,
    pub mc: Option<McConfig>,
    pub quad: QuadratureSpec,
    pub output_dir: PathBuf,
}

impl SweepPlan {
    fn points(&self) -> Vec<(Alpha, f64)> {
        self.alphas
            .iter()
            .flat_map(|&a| self.p_grid.iter().map(move |&p| (a, p)))
            .collect()
    }

    fn game(&self, alpha: Alpha, p: f64) -> Result<GameSpec> {
        GameSpec::new(
            self.channel.sigma_s2(),
            self.channel.sigma_n2(),
            p,
            alpha.get(),
            alpha.get(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRecord {
    pub alpha: f64,
    pub p: f64,
    pub sigma_s2: f64,
    pub sigma_n2: f64,
    pub k1_star: f64,
    pub decoder_a: f64,
    pub d_closed: f64,
    pub d_quad: f64,
    pub d_mc: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub rel_err_quad: f64,
}

impl ResultRecord {
    pub fn quad_ok(&self) -> bool {
        self.rel_err_quad <= QUAD_REL_TOLERANCE
    }
}

/// `D = (1/α) σ_S²σ_N² / (P + σ_N²)`, valid down to `P = 0`.
pub fn distortion_vs_power(ch: &GaussianTestChannel, alpha: Alpha, p: f64) -> f64 {
    ch.sigma_s2() * ch.sigma_n2() / (p + ch.sigma_n2()) / alpha.get()
}

/// Solves the equilibrium at every `(α, P)` with `α_T = α_R = α`, in config
/// order (exponent-major).
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<ResultRecord>> {
    plan.points()
        .par_iter()
        .map(|&(alpha, p)| sweep_point(plan, alpha, p))
        .collect()
}

fn sweep_point(plan: &SweepPlan, alpha: Alpha, p: f64) -> Result<ResultRecord> {
    let game = plan.game(alpha, p)?;
    let (encoder, decoder) = match stackelberg_solve(&game) {
        Ok(eq) => (eq.encoder, eq.decoder),
        Err(Error::DegenerateGame(report)) => (report.encoder, report.decoder),
        Err(e) => return Err(e),
    };
    let ch = &plan.channel;
    let agent = game.tx;
    let d_closed = distortion_vs_power(ch, alpha, p);
    let d_quad = distortion_distorted_expectation(ch, &encoder, &decoder, &agent, &plan.quad)?;
    let mc = plan
        .mc
        .map(|cfg| mc_distortion(ch, &encoder, &decoder, &agent, &cfg));
    Ok(ResultRecord {
        alpha: alpha.get(),
        p,
        sigma_s2: ch.sigma_s2(),
        sigma_n2: ch.sigma_n2(),
        k1_star: encoder.k1,
        decoder_a: decoder.a,
        d_closed,
        d_quad,
        d_mc: mc.map(|m| m.value),
        mc_stderr: mc.map(|m| m.std_err),
        rel_err_quad: (d_quad - d_closed).abs() / d_closed,
    })
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt17(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

pub fn records_to_csv(records: &[ResultRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 256);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            sig17(r.alpha),
            sig17(r.p),
            sig17(r.sigma_s2),
            sig17(r.sigma_n2),
            sig17(r.k1_star),
            sig17(r.decoder_a),
            sig17(r.d_closed),
            sig17(r.d_quad),
            opt17(r.d_mc),
            opt17(r.mc_stderr),
            sig17(r.rel_err_quad),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Plot data for distortion against power, one block per exponent with the
/// unbiased curve first.
pub fn figure3_data(records: &[ResultRecord]) -> String {
    let mut alphas: Vec<f64> = records.iter().map(|r| r.alpha).collect();
    alphas.sort_by(|a, b| b.total_cmp(a));
    alphas.dedup();
    let blocks: Vec<String> = alphas
        .iter()
        .map(|&a| {
            let mut block = format!("# alpha={a}\n");
            for r in records.iter().filter(|r| r.alpha == a) {
                let _ = writeln!(block, "{} {}", r.p, r.d_closed);
            }
            block
        })
        .collect();
    blocks.join("\n")
}

pub fn metadata(plan: &SweepPlan) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sigma_s2={}", plan.channel.sigma_s2());
    let _ = writeln!(out, "sigma_n2={}", plan.channel.sigma_n2());
    let _ = writeln!(out, "quad_nodes={}", plan.quad.nodes());
    let _ = writeln!(out, "quad_trunc_sigmas={}", plan.quad.trunc_sigmas());
    match plan.mc {
        Some(cfg) => {
            let _ = writeln!(out, "mc_samples={}", cfg.samples());
            let _ = writeln!(out, "mc_seed={}", cfg.seed());
        }
        None => out.push_str("mc=off\n"),
    }
    let _ = writeln!(out, "rng={RNG_ALGORITHM}");
    let _ = writeln!(out, "quad_rel_tolerance={QUAD_REL_TOLERANCE:e}");
    let _ = writeln!(out, "mc_sigmas={MC_SIGMAS}");
    out
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub figure: PathBuf,
    pub metadata: PathBuf,
}

pub fn write_outputs(plan: &SweepPlan, records: &[ResultRecord]) -> Result<OutputPaths> {
    fs::create_dir_all(&plan.output_dir)?;
    let paths = OutputPaths {
        csv: plan.output_dir.join("sweep.csv"),
        figure: plan.output_dir.join("figure3.dat"),
        metadata: plan.output_dir.join("metadata.txt"),
    };
    fs::write(&paths.csv, records_to_csv(records))?;
    fs::write(&paths.figure, figure3_data(records))?;
    fs::write(&paths.metadata, metadata(plan))?;
    Ok(paths)
}

/// Runs the sweep and writes its files; convenience for the binary.
pub fn emit_figure3(plan: &SweepPlan) -> Result<(Vec<ResultRecord>, OutputPaths)> {
    let records = run_sweep(plan)?;
    let paths = write_outputs(plan, &records)?;
    Ok((records, paths))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub metric: f64,
    pub tolerance: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: String, metric: f64, tolerance: impl Into<String>, passed: bool) {
        self.checks.push(Check {
            name,
            metric,
            tolerance: tolerance.into(),
            passed,
        });
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# tolerances: quad_rel={QUAD_REL_TOLERANCE:e} normalizer_rel={NORMALIZER_REL_TOLERANCE:e} ratio_rel={RATIO_REL_TOLERANCE:e} encoder_slack={ENCODER_SLACK:e} mc_sigmas={MC_SIGMAS} power_tail_convergence={POWER_TAIL_CONVERGENCE_TOLERANCE:e}");
        let _ = writeln!(out, "# rng: {RNG_ALGORITHM}");
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status} {} {:e} {}", c.name, c.metric, c.tolerance);
        }
        out
    }
}

/// Test hooks that deliberately break a closed form, to exercise the
/// failure path of [`verify`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyHooks {
    pub corrupt_normalizer: bool,
}

/// Runs every oracle against every closed form for the configured exponents
/// and powers.
pub fn verify(plan: &SweepPlan, hooks: VerifyHooks) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let ch = &plan.channel;
    let prior = GaussianDensity::standard();
    let sq = |x: f64| x * x;

    for &alpha in &plan.alphas {
        let a = alpha.get();
        let pure = WeightFunction::power_tail(a, 1.0)?;
        let study = convergence_study(&prior, sq, &pure, &CONVERGENCE_LATTICE)?;
        let last = study.last().map_or(f64::NAN, |p| p.error);
        report.push(
            format!("pt_convergence_power_tail[alpha={a}]"),
            last,
            format!("{POWER_TAIL_CONVERGENCE_TOLERANCE:e}"),
            last < POWER_TAIL_CONVERGENCE_TOLERANCE,
        );

        let karmarkar = WeightFunction::karmarkar(a)?;
        let study = convergence_study(&prior, sq, &karmarkar, &CONVERGENCE_LATTICE)?;
        let decreasing = study.windows(2).all(|w| w[1].error < w[0].error);
        report.push(
            format!("pt_convergence_karmarkar[alpha={a}]"),
            study.last().map_or(f64::NAN, |p| p.error),
            "decreasing",
            decreasing,
        );

        let mut closed = ch.alpha_normalizer(alpha);
        if hooks.corrupt_normalizer {
            closed *= 1.0 + 1e-3;
        }
        for k1 in NORMALIZER_GAINS {
            let mass = tilted_joint_mass(ch, &LinearEncoder::new(0.0, k1), alpha, &plan.quad)?;
            let rel = (mass - closed).abs() / closed;
            report.push(
                format!("alpha_normalizer[alpha={a},k1={k1}]"),
                rel,
                format!("{NORMALIZER_REL_TOLERANCE:e}"),
                rel <= NORMALIZER_REL_TOLERANCE,
            );
        }

        let unbiased = AgentProfile::unbiased();
        for &p in &plan.p_grid {
            let agent = AgentProfile { alpha, ..unbiased };
            let k1 = (p / ch.sigma_s2()).sqrt();
            let biased = distortion_closed_best_response(ch, k1, &agent);
            let floor = distortion_closed_best_response(ch, k1, &unbiased);
            let gap = biased - floor;
            let ok = if a == 1.0 { gap == 0.0 } else { gap > 0.0 };
            report.push(
                format!("unbiased_lower_bound[alpha={a},P={p}]"),
                gap,
                "0",
                ok,
            );
        }
    }

    for &at in &plan.alphas {
        for &ar in &plan.alphas {
            let worst = NORMALIZER_GAINS
                .iter()
                .map(|&k1| {
                    let ratio = distortion_ratio(ch, k1, at, ar);
                    let expected = ar.get() / at.get();
                    (ratio - expected).abs() / expected
                })
                .fold(0.0, f64::max);
            report.push(
                format!("ratio_identity[alpha_t={},alpha_r={}]", at.get(), ar.get()),
                worst,
                format!("{RATIO_REL_TOLERANCE:e}"),
                worst <= RATIO_REL_TOLERANCE,
            );
        }
    }

    for &alpha in &plan.alphas {
        for &p in plan.p_grid.iter().filter(|&&p| p > 0.0) {
            let game = plan.game(alpha, p)?;
            let name = format!("alpha={},P={p}", alpha.get());
            let mut grid = gain_grid(&game, DEFAULT_GAIN_POINTS);
            grid.extend(offset_grid(&game));
            match verify_encoder_optimality(&game, &grid, &plan.quad) {
                Ok(enc) => report.push(
                    format!("encoder_optimality[{name}]"),
                    enc.worst_margin,
                    format!("{:e}", -ENCODER_SLACK),
                    enc.passed && enc.argmin_at_boundary,
                ),
                Err(Error::Verification { .. }) => report.push(
                    format!("encoder_optimality[{name}]"),
                    f64::NAN,
                    "verifier",
                    false,
                ),
                Err(e) => return Err(e),
            }
            let eq = stackelberg_solve(&game)?;
            match verify_decoder_optimality(&game, &eq.encoder, &stencil(0.1), &plan.quad) {
                Ok(dec) => report.push(
                    format!("decoder_optimality[{name}]"),
                    dec.min_excess_nonzero.unwrap_or(f64::NAN),
                    "0",
                    dec.passed,
                ),
                Err(Error::Verification { .. }) => report.push(
                    format!("decoder_optimality[{name}]"),
                    f64::NAN,
                    "verifier",
                    false,
                ),
                Err(e) => return Err(e),
            }
            let raw = distortion_quadrature(ch, &eq.encoder, &eq.decoder, &game.tx, &plan.quad)?;
            let rel = (raw - eq.d_t).abs() / eq.d_t;
            report.push(
                format!("raw_quadrature[{name}]"),
                rel,
                format!("{QUAD_REL_TOLERANCE:e}"),
                rel <= QUAD_REL_TOLERANCE,
            );
        }
    }

    let records = run_sweep(plan)?;
    for r in &records {
        let name = format!("alpha={},P={}", r.alpha, r.p);
        report.push(
            format!("sweep_quadrature[{name}]"),
            r.rel_err_quad,
            format!("{QUAD_REL_TOLERANCE:e}"),
            r.quad_ok(),
        );
        if let (Some(d_mc), Some(se)) = (r.d_mc, r.mc_stderr) {
            let z = (d_mc - r.d_closed).abs() / se;
            report.push(
                format!("mc_agreement[{name}]"),
                z,
                format!("{MC_SIGMAS}"),
                z <= MC_SIGMAS,
            );
        }
    }
    if let Some(cfg) = plan.mc {
        for &alpha in &plan.alphas {
            for &p in &plan.p_grid {
                let game = plan.game(alpha, p)?;
                let (enc, dec) = match stackelberg_solve(&game) {
                    Ok(eq) => (eq.encoder, eq.decoder),
                    Err(Error::DegenerateGame(rep)) => (rep.encoder, rep.decoder),
                    Err(e) => return Err(e),
                };
                let direct = mc_distortion(ch, &enc, &dec, &game.tx, &cfg);
                let weighted = mc_distortion_importance(ch, &enc, &dec, &game.tx, &cfg);
                let z =
                    (direct.value - weighted.value).abs() / direct.std_err.hypot(weighted.std_err);
                report.push(
                    format!("mc_estimators_agree[alpha={},P={p}]", alpha.get()),
                    z,
                    format!("{MC_SIGMAS}"),
                    z <= MC_SIGMAS,
                );
            }
        }
    }
    Ok(report)
}

/// Process exit code for an error: 1 validation, 2 verification or
/// numerical failure, 3 I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Validation(_) | Error::ConfigParse(_) | Error::Domain(_) | Error::Argument(_) => 1,
        Error::Io(_) => 3,
        Error::Verification { .. }
        | Error::Quadrature { .. }
        | Error::NumericalDegeneracy(_)
        | Error::DegenerateGame(_) => 2,
    }
}
