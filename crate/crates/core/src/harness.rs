//! Convergence studies and Monte Carlo strong-error estimation.
//!
//! Every sample owns one Wiener path on the finest time grid of the study.
//! All ladder levels and the reference consume coarsenings of that same path,
//! so the measured differences are discretization errors, not noise.
//! Per-sample results are reduced in sample_id order, which makes the output
//! independent of worker scheduling.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fem::{eval_p1, p1_l2_distance, Mesh1D, MAX_CELLS};
use crate::noise::{SigmaSpec, WienerPath};
use crate::oracle::{
    exact_deterministic, time_discrete_deterministic, ConvolutionKernel, SpectralField,
};
use crate::rng::{GENERATOR, SEED_RULE};
use crate::stepper::{run, InitialCondition, SchemeConfig, Trajectory, MAX_STEPS};

/// Upper bound on the Monte Carlo sample count accepted from configuration.
pub const MAX_SAMPLES: usize = 1 << 20;

/// Header of the results CSV.
pub const RESULTS_HEADER: &str = "level,resolution,error,stderr";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    ValidateDeterministic,
    ConvergeSpace,
    ConvergeTime,
    McStrong,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::ValidateDeterministic => "validate-deterministic",
            ExperimentKind::ConvergeSpace => "converge-space",
            ExperimentKind::ConvergeTime => "converge-time",
            ExperimentKind::McStrong => "mc-strong",
        }
    }
}

/// Which discretization parameter the ladder refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineAxis {
    /// Ladder entries are cell counts; h = 1/n.
    Space,
    /// Ladder entries are step counts; τ = T/n.
    Time,
}

/// What the ladder levels are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Reference {
    /// Exact mild solution in the sine basis (σ zero or constant).
    #[default]
    Oracle,
    /// Sine-basis solution of the time-discrete scheme at the levels' τ
    /// (σ zero, space refinement): isolates the spatial error.
    TimeDiscreteOracle,
    /// A finer discretization on the same path. Missing fields default to
    /// the scheme's own resolution.
    Overkill {
        #[serde(default)]
        n_cells: Option<usize>,
        #[serde(default)]
        k_steps: Option<usize>,
    },
}

fn one() -> usize {
    1
}

/// A complete experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub refine: Option<RefineAxis>,
    /// Cell counts or step counts, coarse to fine, each dividing the next.
    #[serde(default)]
    pub ladder: Vec<usize>,
    #[serde(default)]
    pub reference: Reference,
    #[serde(default = "one")]
    pub n_samples: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Annotation only; copied to reports.
    #[serde(default)]
    pub expected_rate: Option<f64>,
}

impl ExperimentConfig {
    /// Parse and validate. Never panics on arbitrary input.
    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_slice(bytes)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Refinement axis implied by the kind, or the configured one.
    pub fn axis(&self) -> RefineAxis {
        match self.kind {
            ExperimentKind::ConvergeSpace => RefineAxis::Space,
            ExperimentKind::ConvergeTime => RefineAxis::Time,
            _ => self.refine.unwrap_or(RefineAxis::Space),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        if self.n_samples == 0 || self.n_samples > MAX_SAMPLES {
            return Err(Error::config(format!(
                "n_samples must lie in 1..={MAX_SAMPLES}, got {}",
                self.n_samples
            )));
        }
        if let Some(r) = self.expected_rate {
            if !r.is_finite() {
                return Err(Error::config("expected_rate must be finite"));
            }
        }
        match (self.kind, self.refine) {
            (ExperimentKind::ConvergeSpace, Some(RefineAxis::Time))
            | (ExperimentKind::ConvergeTime, Some(RefineAxis::Space)) => {
                return Err(Error::config("refine axis contradicts the experiment kind"));
            }
            _ => {}
        }
        if self.kind == ExperimentKind::Solve {
            return Ok(());
        }
        if self.kind == ExperimentKind::ValidateDeterministic && !self.scheme.sigma.is_zero() {
            return Err(Error::config(
                "validate-deterministic requires sigma = zero",
            ));
        }
        self.plan_levels().map(|_| ())
    }

    /// Level configurations, the reference resolution and the fine noise grid.
    fn plan_levels(&self) -> Result<LevelPlan> {
        let axis = self.axis();
        let ladder = &self.ladder;
        if ladder.is_empty() {
            return Err(Error::config(
                "a convergence study needs a non-empty ladder",
            ));
        }
        let (lo, hi) = match axis {
            RefineAxis::Space => (2, MAX_CELLS),
            RefineAxis::Time => (1, MAX_STEPS),
        };
        for &n in ladder {
            if n < lo || n > hi {
                return Err(Error::config(format!(
                    "ladder entry {n} outside {lo}..={hi}"
                )));
            }
        }
        for pair in ladder.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::config("ladder must be strictly increasing"));
            }
            if pair[1] % pair[0] != 0 {
                return Err(Error::NotNested {
                    coarse: pair[0],
                    fine: pair[1],
                });
            }
        }
        let finest = *ladder.last().expect("ladder is non-empty");
        let levels: Vec<SchemeConfig> = ladder
            .iter()
            .map(|&n| -> Result<SchemeConfig> {
                Ok(match axis {
                    RefineAxis::Space => self.scheme.with_mesh(Mesh1D::new(n)?),
                    RefineAxis::Time => self.scheme.with_k_steps(n),
                })
            })
            .collect::<Result<_>>()?;

        let sigma = self.scheme.sigma;
        let (reference, k_fine) = match self.reference {
            Reference::Oracle => {
                if !(sigma.is_zero() || matches!(sigma, SigmaSpec::Constant { .. })) {
                    return Err(Error::config(
                        "the spectral oracle covers only zero or constant sigma; use an overkill reference",
                    ));
                }
                sine_modes(&self.scheme.u0)?;
                let k_fine = match axis {
                    RefineAxis::Space => self.scheme.k_steps,
                    RefineAxis::Time => finest,
                };
                (None, k_fine)
            }
            Reference::TimeDiscreteOracle => {
                if !sigma.is_zero() || axis != RefineAxis::Space {
                    return Err(Error::config(
                        "the time-discrete oracle needs sigma = zero and space refinement",
                    ));
                }
                sine_modes(&self.scheme.u0)?;
                (None, self.scheme.k_steps)
            }
            Reference::Overkill { n_cells, k_steps } => {
                let n_ref = n_cells.unwrap_or(self.scheme.mesh.n_cells());
                let k_ref = k_steps.unwrap_or(self.scheme.k_steps);
                let mesh_ref = Mesh1D::new(n_ref).map_err(|e| Error::config(e.to_string()))?;
                if k_ref == 0 || k_ref > MAX_STEPS {
                    return Err(Error::config(format!(
                        "reference k_steps must lie in 1..={MAX_STEPS}, got {k_ref}"
                    )));
                }
                let (coarse_max, ref_axis) = match axis {
                    RefineAxis::Space => (finest, n_ref),
                    RefineAxis::Time => (finest, k_ref),
                };
                if ref_axis <= coarse_max {
                    return Err(Error::config(
                        "the overkill reference must be strictly finer than every ladder level",
                    ));
                }
                for lvl in &levels {
                    if n_ref % lvl.mesh.n_cells() != 0 {
                        return Err(Error::NotNested {
                            coarse: lvl.mesh.n_cells(),
                            fine: n_ref,
                        });
                    }
                    if k_ref % lvl.k_steps != 0 {
                        return Err(Error::Divisibility {
                            factor: lvl.k_steps,
                            total: k_ref,
                        });
                    }
                }
                let reference = self.scheme.with_mesh(mesh_ref).with_k_steps(k_ref);
                reference.validate()?;
                (Some(reference), k_ref)
            }
        };
        Ok(LevelPlan {
            axis,
            ladder: ladder.clone(),
            levels,
            reference,
            k_fine,
        })
    }
}

fn sine_modes(u0: &InitialCondition) -> Result<Vec<(usize, f64)>> {
    match u0 {
        InitialCondition::SineModes { modes } => {
            let mut out: Vec<(usize, f64)> = Vec::with_capacity(modes.len());
            for m in modes {
                match out.iter_mut().find(|(j, _)| *j == m.j) {
                    Some(e) => e.1 += m.coef,
                    None => out.push((m.j, m.coef)),
                }
            }
            Ok(out)
        }
        _ => Err(Error::config(
            "spectral references need a sine_modes initial condition",
        )),
    }
}

#[derive(Debug, Clone)]
struct LevelPlan {
    axis: RefineAxis,
    ladder: Vec<usize>,
    levels: Vec<SchemeConfig>,
    /// `None` for spectral references
    reference: Option<SchemeConfig>,
    k_fine: usize,
}

/// One row of a [`RateReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: usize,
    /// Cell count or step count of this level.
    pub n: usize,
    /// h or τ.
    pub resolution: f64,
    /// Root-mean-square L2 error at T.
    pub error: f64,
    /// Standard error of `error` over the samples.
    pub stderr: f64,
    /// Largest nodal deviation from the reference over all samples.
    pub max_nodal_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub axis: RefineAxis,
    pub levels: Vec<LevelResult>,
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub expected_rate: Option<f64>,
    pub n_samples: usize,
    /// SHA-256 over the per-sample path digests in sample order.
    pub coupling_digest: Option<String>,
}

impl RateReport {
    pub fn errors(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.error).collect()
    }

    /// Results CSV: `level,resolution,error,stderr`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{RESULTS_HEADER}")?;
        for l in &self.levels {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e}",
                l.level, l.resolution, l.error, l.stderr
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("CSV is ASCII")
    }
}

/// Least-squares slope of log(error) against log(resolution) and its
/// standard error from the residuals.
pub fn fit_rate(levels: &[(f64, f64)]) -> Result<(f64, f64)> {
    if levels.len() < 3 {
        return Err(Error::domain(format!(
            "a rate fit needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    for &(r, e) in levels {
        if !(r > 0.0 && r.is_finite() && e > 0.0 && e.is_finite()) {
            return Err(Error::domain(format!(
                "rate fit needs positive finite data, got ({r}, {e})"
            )));
        }
    }
    for (i, a) in levels.iter().enumerate() {
        if levels[i + 1..].iter().any(|b| b.0 == a.0) {
            return Err(Error::domain(format!("repeated resolution {}", a.0)));
        }
    }
    let n = levels.len() as f64;
    let xs: Vec<f64> = levels.iter().map(|l| l.0.ln()).collect();
    let ys: Vec<f64> = levels.iter().map(|l| l.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

/// Per-sample outcome of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub sample_id: u64,
    /// Digest of the fine path, `None` without noise.
    pub path_digest: Option<String>,
    /// Digest of the path each level consumed.
    pub level_digests: Vec<Option<String>>,
    pub sq_errors: Vec<f64>,
    pub max_nodal_errors: Vec<f64>,
}

/// Reference solution of one sample.
enum RefSolution {
    Field(SpectralField),
    Discrete(Trajectory),
}

impl RefSolution {
    fn l2_error(&self, traj: &Trajectory) -> Result<f64> {
        match self {
            RefSolution::Field(f) => f.l2_error(traj.mesh(), traj.final_state()),
            RefSolution::Discrete(r) => {
                p1_l2_distance(traj.mesh(), traj.final_state(), r.mesh(), r.final_state())
            }
        }
    }

    fn max_nodal_error(&self, traj: &Trajectory) -> f64 {
        let mesh = traj.mesh();
        mesh.interior_nodes()
            .iter()
            .zip(traj.final_state())
            .map(|(&x, u)| {
                let r = match self {
                    RefSolution::Field(f) => f.eval(x),
                    RefSolution::Discrete(t) => eval_p1(t.mesh(), t.final_state(), x),
                };
                (u - r).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Prepared study: everything shared read-only by the sample workers.
struct Study<'a> {
    config: &'a ExperimentConfig,
    plan: LevelPlan,
    /// deterministic spectral part, per level for the time-discrete oracle
    spectral: Vec<SpectralField>,
    kernel: Option<ConvolutionKernel>,
    stochastic: bool,
}

impl<'a> Study<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let plan = config.plan_levels()?;
        let s = &config.scheme;
        let stochastic = !s.sigma.is_zero();
        let mut spectral = Vec::new();
        let mut kernel = None;
        match config.reference {
            Reference::Oracle => {
                let u0 = SpectralField::new(s.alpha, sine_modes(&s.u0)?)?;
                spectral.push(exact_deterministic(s.alpha, &u0, s.t_final)?);
                if stochastic {
                    let modes: Vec<usize> = (1..=s.covariance.n_modes()).collect();
                    let tau_f = s.t_final / plan.k_fine as f64;
                    kernel = Some(ConvolutionKernel::new(s.alpha, &modes, tau_f, plan.k_fine)?);
                }
            }
            Reference::TimeDiscreteOracle => {
                let u0 = SpectralField::new(s.alpha, sine_modes(&s.u0)?)?;
                for lvl in &plan.levels {
                    spectral.push(time_discrete_deterministic(
                        s.alpha,
                        &u0,
                        s.t_final,
                        lvl.k_steps,
                    )?);
                }
            }
            Reference::Overkill { .. } => {}
        }
        Ok(Self {
            config,
            plan,
            spectral,
            kernel,
            stochastic,
        })
    }

    fn n_effective_samples(&self) -> usize {
        if self.stochastic {
            self.config.n_samples
        } else {
            1
        }
    }

    fn sample(&self, sample_id: u64) -> Result<SampleResult> {
        let s = &self.config.scheme;
        let path = if self.stochastic {
            Some(WienerPath::sample(
                &s.covariance,
                self.plan.k_fine,
                s.t_final,
                self.config.master_seed,
                sample_id,
            )?)
        } else {
            None
        };
        let path_digest = path.as_ref().map(WienerPath::digest);

        let shared_ref = match (&self.plan.reference, self.config.reference) {
            (Some(rc), _) => Some(RefSolution::Discrete(run(rc, path.as_ref())?)),
            (None, Reference::Oracle) => {
                let mut field = self.spectral[0].clone();
                if let (Some(kernel), Some(p), SigmaSpec::Constant { value }) =
                    (&self.kernel, &path, s.sigma)
                {
                    let g = SpectralField::new(
                        s.alpha,
                        (1..=s.covariance.n_modes()).map(|j| (j, value)).collect(),
                    )?;
                    let conv = kernel.apply(&g, &s.covariance, p, self.plan.k_fine)?;
                    field = field.add(&conv);
                }
                Some(RefSolution::Field(field))
            }
            _ => None,
        };

        let n_levels = self.plan.levels.len();
        let mut sq_errors = Vec::with_capacity(n_levels);
        let mut max_nodal_errors = Vec::with_capacity(n_levels);
        let mut level_digests = Vec::with_capacity(n_levels);
        for (i, lvl) in self.plan.levels.iter().enumerate() {
            let traj = run(lvl, path.as_ref())?;
            level_digests.push(path.as_ref().map(WienerPath::digest));
            let per_level;
            let reference = match &shared_ref {
                Some(r) => r,
                None => {
                    per_level = RefSolution::Field(self.spectral[i].clone());
                    &per_level
                }
            };
            let e = reference.l2_error(&traj)?;
            sq_errors.push(e * e);
            max_nodal_errors.push(reference.max_nodal_error(&traj));
        }
        Ok(SampleResult {
            sample_id,
            path_digest,
            level_digests,
            sq_errors,
            max_nodal_errors,
        })
    }
}

/// Full outcome of a study.
#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub report: RateReport,
    pub samples: Vec<SampleResult>,
}

/// Run a convergence study as configured: every ladder level against the
/// configured reference, RMS over samples, slope fit when ≥ 3 levels.
pub fn run_study(config: &ExperimentConfig) -> Result<StudyOutcome> {
    let study = Study::new(config)?;
    let m = study.n_effective_samples();
    let mut samples: Vec<SampleResult> = (0..m as u64)
        .into_par_iter()
        .map(|id| study.sample(id))
        .collect::<Result<_>>()?;
    samples.sort_by_key(|s| s.sample_id);

    for s in &samples {
        if s.level_digests.iter().any(|d| *d != s.path_digest) {
            return Err(Error::Numerical(format!(
                "sample {} levels consumed different paths",
                s.sample_id
            )));
        }
    }
    let coupling_digest = if study.stochastic {
        let mut h = Sha256::new();
        for s in &samples {
            h.update(s.path_digest.as_deref().unwrap_or_default().as_bytes());
        }
        Some(hex::encode(h.finalize()))
    } else {
        None
    };

    let t_final = config.scheme.t_final;
    let levels: Vec<LevelResult> = study
        .plan
        .ladder
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let sq: Vec<f64> = samples.iter().map(|s| s.sq_errors[i]).collect();
            let (error, stderr) = rms_with_stderr(&sq, study.stochastic);
            let resolution = match study.plan.axis {
                RefineAxis::Space => 1.0 / n as f64,
                RefineAxis::Time => t_final / n as f64,
            };
            LevelResult {
                level: i,
                n,
                resolution,
                error,
                stderr,
                max_nodal_error: samples
                    .iter()
                    .map(|s| s.max_nodal_errors[i])
                    .fold(0.0, f64::max),
            }
        })
        .collect();
    let fit = if levels.len() >= 3 {
        let pts: Vec<(f64, f64)> = levels.iter().map(|l| (l.resolution, l.error)).collect();
        Some(fit_rate(&pts)?)
    } else {
        None
    };
    Ok(StudyOutcome {
        report: RateReport {
            axis: study.plan.axis,
            levels,
            fitted_slope: fit.map(|f| f.0),
            slope_stderr: fit.map(|f| f.1),
            expected_rate: config.expected_rate,
            n_samples: m,
            coupling_digest,
        },
        samples,
    })
}

/// sqrt(mean(sq)) and its delta-method standard error. The variance uses
/// values shifted by the first sample, so identical samples give exactly 0.
pub fn rms_with_stderr(sq: &[f64], stochastic: bool) -> (f64, f64) {
    let m = sq.len() as f64;
    let mean = sq.iter().sum::<f64>() / m;
    let rms = mean.sqrt();
    if !stochastic {
        return (rms, 0.0);
    }
    if sq.len() < 2 {
        return (rms, f64::NAN);
    }
    let shift = sq[0];
    let (s1, s2) = sq.iter().fold((0.0, 0.0), |(a, b), v| {
        let d = v - shift;
        (a + d, b + d * d)
    });
    let var = ((s2 - s1 * s1 / m) / (m - 1.0)).max(0.0);
    let se_mean = (var / m).sqrt();
    let se = if rms > 0.0 {
        se_mean / (2.0 * rms)
    } else {
        0.0
    };
    (rms, se)
}

/// Deterministic validation against the spectral reference.
pub fn validate_deterministic(config: &ExperimentConfig) -> Result<RateReport> {
    if !config.scheme.sigma.is_zero() {
        return Err(Error::config(
            "validate-deterministic requires sigma = zero",
        ));
    }
    run_study(config).map(|o| o.report)
}

/// Monte Carlo strong-error study with coupled paths.
pub fn mc_strong(config: &ExperimentConfig) -> Result<RateReport> {
    run_study(config).map(|o| o.report)
}

/// Single solve: sample 0 of `master_seed` on the scheme's own grid.
pub fn solve(config: &ExperimentConfig) -> Result<(Trajectory, Option<WienerPath>)> {
    config.validate()?;
    let s = &config.scheme;
    let path = if s.sigma.is_zero() {
        None
    } else {
        Some(WienerPath::sample(
            &s.covariance,
            s.k_steps,
            s.t_final,
            config.master_seed,
            0,
        )?)
    };
    let traj = run(s, path.as_ref())?;
    Ok((traj, path))
}

/// File name and SHA-256 of one output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl OutputDigest {
    pub fn of_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub generator: String,
    pub seed_rule: String,
    pub master_seed: u64,
    pub truncated_trace_fraction: Option<f64>,
    pub workers: usize,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
    pub coupling_digest: Option<String>,
}

/// Wall-clock timer that fills in a [`RunManifest`].
pub struct ManifestBuilder {
    started: Instant,
    started_unix: u64,
}

impl ManifestBuilder {
    pub fn start() -> Self {
        Self {
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn finish(
        self,
        config: &ExperimentConfig,
        workers: usize,
        outputs: Vec<OutputDigest>,
        coupling_digest: Option<String>,
    ) -> RunManifest {
        RunManifest {
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: config.kind.name().to_string(),
            config: config.clone(),
            generator: GENERATOR.to_string(),
            seed_rule: SEED_RULE.to_string(),
            master_seed: config.master_seed,
            truncated_trace_fraction: config.scheme.covariance.trace_fraction(),
            workers,
            started_unix_seconds: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs,
            coupling_digest,
        }
    }
}
