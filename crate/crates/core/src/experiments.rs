//! Monte Carlo campaigns: memory lifetime, single-shot block error rates,
//! and the analysis helpers (BDD reference curve, finite-size-scaling fit).
//!
//! Campaigns are deterministic in the seed. Trials are evaluated in fixed
//! chunks of consecutive indices, possibly in parallel, and then scanned in
//! index order; the stopping rule only looks at that ordered scan, so the
//! number of workers never changes the output.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::bp::{DecoderConfig, LlrInit, MbpDecoder};
use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::matrix::{gds_repeated, gds_with_readout, GdsCheckMatrix, GdsRow, SingleShotMatrices};
use crate::noise::{
    classify_residual, sample_bits, sample_pauli, sample_trial_at, sample_weight_at_most,
    sample_weight_exact, stream_rng, syndromes_for_decoding, NoiseModel, ResidualClass, SiteKind,
    TrialSample,
};
use crate::pauli::{MixedVector, PauliVector};

/// Trials evaluated per parallel batch.
pub const CHUNK: usize = 8;

/// Stopping rule and parallelism of a campaign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CampaignLimits {
    pub max_trials: u64,
    /// Stop right after this many failures (`None`: run all trials).
    pub failure_target: Option<u64>,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl CampaignLimits {
    pub fn trials(max_trials: u64) -> Self {
        CampaignLimits {
            max_trials,
            failure_target: None,
            workers: None,
        }
    }
}

/// Evaluate trials `0, 1, …` in chunks and return the ordered prefix that
/// ends at the `failure_target`-th failure (or at `max_trials`).
pub fn run_campaign<T, S, I, F, P>(limits: &CampaignLimits, init: I, eval: F, is_failure: P) -> Vec<T>
where
    T: Send,
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
    P: Fn(&T) -> bool + Sync,
{
    let body = || {
        let mut out = Vec::new();
        let mut failures = 0;
        let mut next = 0u64;
        while next < limits.max_trials {
            let end = (next + CHUNK as u64).min(limits.max_trials);
            let batch: Vec<T> = (next..end)
                .into_par_iter()
                .map_init(&init, |state, t| eval(state, t))
                .collect();
            next = end;
            for r in batch {
                let failed = is_failure(&r);
                out.push(r);
                if failed {
                    failures += 1;
                    if limits.failure_target == Some(failures) {
                        return out;
                    }
                }
            }
        }
        out
    };
    match limits.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .expect("thread pool")
            .install(body),
        None => body(),
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub code: String,
    pub d: Option<usize>,
    pub r: usize,
    pub epsilon: f64,
    pub epsilon_b: f64,
    pub trials: u64,
    pub failures: u64,
    pub metric: f64,
    pub mean_iters: f64,
    pub mean_alpha_star: f64,
    pub censored: u64,
    pub wall_ms: u64,
}

pub const CSV_HEADER: &str =
    "code,d,r,epsilon,epsilon_b,trials,failures,metric,mean_iters,mean_alpha_star,censored,wall_ms";

fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.9e}")
    }
}

impl ExperimentRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.code,
            self.d.map(|d| d.to_string()).unwrap_or_default(),
            self.r,
            self.epsilon,
            self.epsilon_b,
            self.trials,
            self.failures,
            fmt_float(self.metric),
            fmt_float(self.mean_iters),
            fmt_float(self.mean_alpha_star),
            self.censored,
            self.wall_ms
        )
    }

    fn from_csv_row(line: &str, lineno: usize) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(Error::parse(lineno, format!("expected 12 fields, found {}", f.len())));
        }
        let float = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(lineno, format!("invalid number {s:?}")))
        };
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::parse(lineno, format!("invalid integer {s:?}")))
        };
        Ok(ExperimentRecord {
            code: f[0].to_string(),
            d: if f[1].is_empty() {
                None
            } else {
                Some(int(f[1])? as usize)
            },
            r: int(f[2])? as usize,
            epsilon: float(f[3])?,
            epsilon_b: float(f[4])?,
            trials: int(f[5])?,
            failures: int(f[6])?,
            metric: float(f[7])?,
            mean_iters: float(f[8])?,
            mean_alpha_star: float(f[9])?,
            censored: int(f[10])?,
            wall_ms: int(f[11])?,
        })
    }
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(out, "{}", r.to_csv_row()).unwrap();
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::parse(1, "missing or unexpected CSV header")),
    }
    lines
        .map(|(k, l)| ExperimentRecord::from_csv_row(l.trim(), k + 1))
        .collect()
}

/// Running sums over decodes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DecodeStats {
    pub decodes: u64,
    pub iterations: u64,
    pub converged: u64,
    pub alpha_sum: f64,
}

impl DecodeStats {
    fn record(&mut self, out: &crate::bp::DecodeOutcome) {
        self.decodes += 1;
        self.iterations += out.total_iterations as u64;
        if out.converged {
            self.converged += 1;
            self.alpha_sum += out.alpha_star.unwrap_or(f64::NAN);
        }
    }

    fn merge(&mut self, other: &DecodeStats) {
        self.decodes += other.decodes;
        self.iterations += other.iterations;
        self.converged += other.converged;
        self.alpha_sum += other.alpha_sum;
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.decodes == 0 {
            f64::NAN
        } else {
            self.iterations as f64 / self.decodes as f64
        }
    }

    pub fn mean_alpha_star(&self) -> f64 {
        if self.converged == 0 {
            f64::NAN
        } else {
            self.alpha_sum / self.converged as f64
        }
    }
}

/// Memory-lifetime setup. D0 decodes the `r`-round matrix, D1 the matrix
/// with the extra readout round.
#[derive(Clone, Debug)]
pub struct LifetimeConfig {
    pub code: StabilizerCode,
    pub epsilon: f64,
    pub epsilon_b: f64,
    pub rounds: usize,
    pub d0: DecoderConfig,
    pub d1: DecoderConfig,
    pub max_cycles: u64,
    pub seed: u64,
}

impl LifetimeConfig {
    pub fn new(code: StabilizerCode, epsilon: f64, epsilon_b: f64, rounds: usize, decoder: DecoderConfig) -> Self {
        LifetimeConfig {
            code,
            epsilon,
            epsilon_b,
            rounds,
            d0: decoder.clone(),
            d1: decoder,
            max_cycles: 1_000_000,
            seed: 0,
        }
    }
}

/// Prebuilt matrices and priors for a lifetime campaign.
#[derive(Clone, Debug)]
pub struct LifetimeContext {
    cfg: LifetimeConfig,
    noise: NoiseModel,
    g0: GdsCheckMatrix,
    g1: GdsCheckMatrix,
    prior0: LlrInit,
    prior1: LlrInit,
}

/// Decoder buffers for one worker.
#[derive(Clone, Debug)]
pub struct LifetimeWorkspace {
    dec0: MbpDecoder,
    dec1: MbpDecoder,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SustainResult {
    /// `ROUND` at exit.
    pub rounds: u64,
    pub censored: bool,
    pub cycles: u64,
    pub stats: DecodeStats,
}

impl LifetimeContext {
    pub fn new(cfg: LifetimeConfig) -> Result<Self> {
        let noise = NoiseModel::new(cfg.epsilon, cfg.epsilon_b, cfg.rounds)?;
        cfg.d0.validate()?;
        cfg.d1.validate()?;
        let h = cfg.code.h();
        let g0 = gds_repeated(h, cfg.rounds)?;
        let g1 = gds_with_readout(h, cfg.rounds)?;
        let prior0 = cfg.d0.prior(g0.n_quaternary(), g0.m_binary(), cfg.epsilon, cfg.epsilon_b)?;
        let prior1 = cfg.d1.prior(g1.n_quaternary(), g1.m_binary(), cfg.epsilon, cfg.epsilon_b)?;
        Ok(LifetimeContext {
            cfg,
            noise,
            g0,
            g1,
            prior0,
            prior1,
        })
    }

    pub fn config(&self) -> &LifetimeConfig {
        &self.cfg
    }

    pub fn workspace(&self) -> LifetimeWorkspace {
        LifetimeWorkspace {
            dec0: MbpDecoder::new(&self.g0),
            dec1: MbpDecoder::new(&self.g1),
        }
    }

    /// Sample cycle `cycle` of `trial`, with the carried residual folded into
    /// the first round.
    pub fn sample_cycle(&self, trial: u64, cycle: u64, carried: &PauliVector) -> TrialSample {
        let r = self.cfg.rounds as u64;
        let raw = sample_trial_at(self.cfg.code.h(), &self.noise, true, self.cfg.seed, trial, cycle * (r + 1));
        if carried.is_identity() {
            return raw;
        }
        let mut data = raw.data_errors;
        data[0].mul_assign(carried).expect("same length");
        TrialSample::from_errors(self.cfg.code.h(), data, raw.syndrome_flips).expect("consistent sample")
    }

    /// The sustain-time loop for one trial.
    pub fn sustain_time(&self, ws: &mut LifetimeWorkspace, trial: u64) -> Result<SustainResult> {
        let (n, m, r) = (self.cfg.code.n(), self.cfg.code.m(), self.cfg.rounds);
        let mut round = 1u64;
        let mut carried = PauliVector::identity(n);
        let mut stats = DecodeStats::default();
        for cycle in 0..self.cfg.max_cycles {
            let sample = self.sample_cycle(trial, cycle, &carried);

            let s1 = syndromes_for_decoding(&sample, m)?;
            let out1 = ws.dec1.decode(&s1, &self.prior1, &self.cfg.d1)?;
            stats.record(&out1);
            let est1 = out1.estimate.pauli.split_blocks(n)?;
            if classify_residual(&self.cfg.code, &sample.data_errors, &est1)? == ResidualClass::LogicalFailure {
                return Ok(SustainResult {
                    rounds: round,
                    censored: false,
                    cycles: cycle + 1,
                    stats,
                });
            }

            let s0 = s1[..r * m].to_vec();
            let out0 = ws.dec0.decode(&s0, &self.prior0, &self.cfg.d0)?;
            stats.record(&out0);
            let est0 = out0.estimate.pauli.split_blocks(n)?;
            carried = crate::noise::residual(&sample.data_errors[..r], &est0)?;
            round += r as u64;
        }
        Ok(SustainResult {
            rounds: round,
            censored: true,
            cycles: self.cfg.max_cycles,
            stats,
        })
    }
}

/// Convenience wrapper building a fresh workspace.
pub fn sustain_time(cfg: &LifetimeConfig, trial: u64) -> Result<SustainResult> {
    let ctx = LifetimeContext::new(cfg.clone())?;
    let mut ws = ctx.workspace();
    ctx.sustain_time(&mut ws, trial)
}

/// Aggregate of a lifetime campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct LifetimeSummary {
    pub results: Vec<SustainResult>,
    pub record: ExperimentRecord,
}

impl LifetimeSummary {
    /// Mean of `ROUND` over trials; censored trials contribute their lower
    /// bound.
    pub fn mean_lifetime(&self) -> f64 {
        let total: u64 = self.results.iter().map(|r| r.rounds).sum();
        total as f64 / self.results.len().max(1) as f64
    }
}

/// Run lifetime trials until `failure_target` failures or `max_trials`.
/// `wall_ms` is left at 0 unless `timed` is set, so that CSVs are
/// reproducible byte for byte.
pub fn lifetime_campaign(cfg: &LifetimeConfig, limits: &CampaignLimits, timed: bool) -> Result<LifetimeSummary> {
    let start = Instant::now();
    let ctx = LifetimeContext::new(cfg.clone())?;
    let results = run_campaign(
        limits,
        || ctx.workspace(),
        |ws, t| ctx.sustain_time(ws, t),
        |r| matches!(r, Ok(s) if !s.censored) || r.is_err(),
    );
    let results: Vec<SustainResult> = results.into_iter().collect::<Result<_>>()?;
    let mut stats = DecodeStats::default();
    for r in &results {
        stats.merge(&r.stats);
    }
    let failures = results.iter().filter(|r| !r.censored).count() as u64;
    let censored = results.len() as u64 - failures;
    let mut summary = LifetimeSummary {
        results,
        record: ExperimentRecord {
            code: cfg.code.name.clone(),
            d: cfg.code.d(),
            r: cfg.rounds,
            epsilon: cfg.epsilon,
            epsilon_b: cfg.epsilon_b,
            trials: 0,
            failures,
            metric: 0.0,
            mean_iters: stats.mean_iterations(),
            mean_alpha_star: stats.mean_alpha_star(),
            censored,
            wall_ms: if timed { start.elapsed().as_millis() as u64 } else { 0 },
        },
    };
    summary.record.trials = summary.results.len() as u64;
    summary.record.metric = 1.0 / summary.mean_lifetime();
    Ok(summary)
}

/// How single-shot errors are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleMode {
    /// Independent depolarizing data errors and flips at the model rates.
    Iid,
    /// Uniform over combined (data + flip) weight exactly `w`.
    WeightExact(usize),
    /// Uniform over combined weight `1..=w`.
    WeightAtMost(usize),
}

/// Single-shot setup. With `pair = None` (or `ε_b = 0`) decoding uses the
/// plain stabilizer matrix and perfect syndromes.
#[derive(Clone, Debug)]
pub struct SingleShotConfig {
    pub code: StabilizerCode,
    pub pair: Option<SingleShotMatrices>,
    pub epsilon: f64,
    pub epsilon_b: f64,
    pub decoder: DecoderConfig,
    pub mode: SampleMode,
    pub seed: u64,
}

/// Outcome of one single-shot trial.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleShotTrial {
    pub error: MixedVector,
    pub converged: bool,
    pub class: ResidualClass,
    pub iterations: usize,
    pub alpha_star: Option<f64>,
}

/// The stabilizer matrix as a GDS matrix with no binary columns.
pub fn plain_gds(code: &StabilizerCode) -> GdsCheckMatrix {
    let rows = code
        .h()
        .rows()
        .iter()
        .map(|q| GdsRow {
            quaternary: q.clone(),
            binary: Vec::new(),
        })
        .collect();
    GdsCheckMatrix::new(code.n(), 0, rows).expect("valid rows")
}

#[derive(Clone, Debug)]
pub struct SingleShotContext {
    cfg: SingleShotConfig,
    measurement: GdsCheckMatrix,
    decoding: GdsCheckMatrix,
    row_ops: Option<crate::gf2::BinaryMatrix>,
    prior: LlrInit,
}

impl SingleShotContext {
    pub fn new(cfg: SingleShotConfig) -> Result<Self> {
        NoiseModel::new(cfg.epsilon, cfg.epsilon_b, 1)?;
        cfg.decoder.validate()?;
        let (measurement, decoding, row_ops) = match (&cfg.pair, cfg.epsilon_b > 0.0) {
            (Some(p), true) => (p.measurement.clone(), p.decoding.clone(), Some(p.row_ops.clone())),
            (None, true) => {
                return Err(Error::usage("a single-shot matrix pair is needed when epsilon_b > 0"))
            }
            (_, false) => {
                let g = plain_gds(&cfg.code);
                (g.clone(), g, None)
            }
        };
        if measurement.n_quaternary() != cfg.code.n() {
            return Err(Error::dim("single-shot matrices do not match the code length"));
        }
        let prior = cfg
            .decoder
            .prior(decoding.n_quaternary(), decoding.m_binary(), cfg.epsilon, cfg.epsilon_b)?;
        Ok(SingleShotContext {
            cfg,
            measurement,
            decoding,
            row_ops,
            prior,
        })
    }

    pub fn decoder(&self) -> MbpDecoder {
        MbpDecoder::new(&self.decoding)
    }

    pub fn decoding_matrix(&self) -> &GdsCheckMatrix {
        &self.decoding
    }

    pub fn sample_error(&self, trial: u64) -> Result<MixedVector> {
        let (n, m) = (self.measurement.n_quaternary(), self.measurement.m_binary());
        let seed = self.cfg.seed;
        Ok(match self.cfg.mode {
            SampleMode::Iid => {
                let e = sample_pauli(n, self.cfg.epsilon, &mut stream_rng(seed, trial, 0, SiteKind::Data as u64));
                let f = sample_bits(m, self.cfg.epsilon_b, &mut stream_rng(seed, trial, 0, SiteKind::Flip as u64));
                MixedVector::new(e, f)
            }
            SampleMode::WeightExact(w) => sample_weight_exact(n, m, w, &mut stream_rng(seed, trial, 0, 0))?,
            SampleMode::WeightAtMost(w) => {
                sample_weight_at_most(n, m, w, false, &mut stream_rng(seed, trial, 0, 0))?
            }
        })
    }

    pub fn run_trial(&self, dec: &mut MbpDecoder, trial: u64) -> Result<SingleShotTrial> {
        let error = self.sample_error(trial)?;
        let measured = self.measurement.syndrome(&error)?;
        let s = match &self.row_ops {
            Some(r) => r.mul_vec(&crate::gf2::BitVec::from_bools(&measured))?.to_bools(),
            None => measured,
        };
        let out = dec.decode(&s, &self.prior, &self.cfg.decoder)?;
        let class = classify_residual(
            &self.cfg.code,
            std::slice::from_ref(&error.pauli),
            std::slice::from_ref(&out.estimate.pauli),
        )?;
        Ok(SingleShotTrial {
            error,
            converged: out.converged,
            class,
            iterations: out.total_iterations,
            alpha_star: out.converged.then_some(out.alpha_star).flatten(),
        })
    }
}

/// Block logical error rate over a campaign. A trial fails when the data
/// residual is not a stabilizer.
pub fn single_shot_run(
    cfg: &SingleShotConfig,
    limits: &CampaignLimits,
    timed: bool,
) -> Result<(ExperimentRecord, Vec<SingleShotTrial>)> {
    let start = Instant::now();
    let ctx = SingleShotContext::new(cfg.clone())?;
    let trials = run_campaign(
        limits,
        || ctx.decoder(),
        |dec, t| ctx.run_trial(dec, t),
        |r| matches!(r, Ok(t) if t.class == ResidualClass::LogicalFailure) || r.is_err(),
    );
    let trials: Vec<SingleShotTrial> = trials.into_iter().collect::<Result<_>>()?;
    let failures = trials
        .iter()
        .filter(|t| t.class == ResidualClass::LogicalFailure)
        .count() as u64;
    let iters: usize = trials.iter().map(|t| t.iterations).sum();
    let alphas: Vec<f64> = trials.iter().filter_map(|t| t.alpha_star).collect();
    let n = trials.len() as u64;
    let record = ExperimentRecord {
        code: cfg.code.name.clone(),
        d: cfg.code.d(),
        r: 1,
        epsilon: cfg.epsilon,
        epsilon_b: cfg.epsilon_b,
        trials: n,
        failures,
        metric: if n == 0 { f64::NAN } else { failures as f64 / n as f64 },
        mean_iters: if n == 0 { f64::NAN } else { iters as f64 / n as f64 },
        mean_alpha_star: if alphas.is_empty() {
            f64::NAN
        } else {
            alphas.iter().sum::<f64>() / alphas.len() as f64
        },
        censored: 0,
        wall_ms: if timed { start.elapsed().as_millis() as u64 } else { 0 },
    };
    Ok((record, trials))
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    // exact for the sizes involved: sum of logs
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `1 − Σ_{j≤t} C(N,j) ε^j (1−ε)^{N−j}`, summed directly over the upper
/// tail in log space.
pub fn bdd_rate(n: usize, t: usize, epsilon: f64) -> Result<f64> {
    if t > n {
        return Err(Error::usage(format!("t = {t} exceeds N = {n}")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::usage(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if t == n || epsilon == 0.0 {
        return Ok(0.0);
    }
    if epsilon == 1.0 {
        return Ok(1.0);
    }
    let (le, lq) = (epsilon.ln(), (-epsilon).ln_1p());
    let log_term = |j: usize| ln_binomial(n, j) + j as f64 * le + (n - j) as f64 * lq;
    let tail = sum_exp_stable((t + 1..=n).map(log_term));
    if tail < 0.5 {
        return Ok(tail);
    }
    // close to one: the complement is the accurate side
    Ok(1.0 - sum_exp_stable((0..=t).map(log_term)))
}

fn sum_exp_stable(logs: impl Iterator<Item = f64>) -> f64 {
    let logs: Vec<f64> = logs.collect();
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return 0.0;
    }
    hi.exp() * logs.iter().map(|x| (x - hi).exp()).sum::<f64>()
}

/// Result of the finite-size-scaling grid search.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzFit {
    pub nu: f64,
    pub tau: f64,
    /// `c0 + c1 x + c2 x²`.
    pub coefficients: [f64; 3],
    pub mse: f64,
}

/// Grid of the search: `ν = 1.00, 1.01, …, 2.00` and
/// `τ = 0.0200, 0.0201, …, 0.0400`.
pub const NU_STEPS: usize = 100;
pub const TAU_STEPS: usize = 200;

pub fn nu_at(i: usize) -> f64 {
    (100 + i) as f64 / 100.0
}

pub fn tau_at(k: usize) -> f64 {
    (200 + k) as f64 / 10_000.0
}

/// Least-squares quadratic through `(x, y)`; `None` when the normal
/// equations are singular.
fn fit_quadratic(x: &[f64], y: &[f64]) -> Option<([f64; 3], f64)> {
    let mut a = [[0.0f64; 4]; 3];
    for (xi, yi) in x.iter().zip(y) {
        let p = [1.0, *xi, xi * xi];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += p[r] * p[c];
            }
            a[r][3] += p[r] * yi;
        }
    }
    let scale = a[0][0].max(a[2][2]).max(1e-300);
    for col in 0..3 {
        let piv = (col..3).max_by(|i, j| a[*i][col].abs().total_cmp(&a[*j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..4 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let coef = [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]];
    let mse = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let e = coef[0] + coef[1] * xi + coef[2] * xi * xi - yi;
            e * e
        })
        .sum::<f64>()
        / x.len() as f64;
    Some((coef, mse))
}

/// Grid search for `(ν, τ)` minimizing the mean squared error of a quadratic
/// fit of the rates against `d^{1/ν}(ε − τ)`. Ties go to the smallest `τ`,
/// then the smallest `ν`.
pub fn ansatz_fit(points: &[(f64, f64, f64)]) -> Result<AnsatzFit> {
    if points.iter().any(|(d, e, y)| !(d.is_finite() && e.is_finite() && y.is_finite()) || *d <= 0.0) {
        return Err(Error::usage("fit points must be finite with positive d"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    let y: Vec<f64> = pts.iter().map(|p| p.2).collect();
    let mut best: Option<AnsatzFit> = None;
    let mut x = vec![0.0; pts.len()];
    for k in 0..=TAU_STEPS {
        let tau = tau_at(k);
        for i in 0..=NU_STEPS {
            let nu = nu_at(i);
            for (xi, p) in x.iter_mut().zip(&pts) {
                *xi = p.0.powf(1.0 / nu) * (p.1 - tau);
            }
            let Some((coefficients, mse)) = fit_quadratic(&x, &y) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some(b) => mse < b.mse * (1.0 - 1e-9) - 1e-24,
            };
            if better {
                best = Some(AnsatzFit {
                    nu,
                    tau,
                    coefficients,
                    mse,
                });
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible("rescaled abscissae are degenerate for every grid point".into()))
}
