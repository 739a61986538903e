//! `gdsbp`: build check matrices, decode syndromes, run memory and
//! single-shot campaigns, and fit threshold ansätze.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gdsbp::codes::{
    gb126, load_gb_code, quasi_cyclic, random_qc_search, rotated_toric, with_identity, QcSearch, QuasiCyclicSpec,
};
use gdsbp::experiments::{
    ansatz_fit, lifetime_campaign, parse_csv, plain_gds, records_to_csv, single_shot_run, CampaignLimits,
    ExperimentRecord, LifetimeConfig, SampleMode, SingleShotConfig,
};
use gdsbp::matrix::{
    ds_matrix, gds_accumulated, gds_repeated, gds_with_readout, parse_chk, parse_gds, single_shot_matrix,
    QuaternaryCheckMatrix,
};
use gdsbp::pauli::{format_bits, parse_bits};
use gdsbp::tanner::{binary_girth, TannerGraph};
use gdsbp::{
    AlphaSchedule, BinaryMatrix, DecoderConfig, GdsCheckMatrix, MbpDecoder, ResidualClass, Schedule, StabilizerCode,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Infeasible(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Infeasible(m) => f.write_str(m),
        }
    }
}

impl From<gdsbp::Error> for CliError {
    fn from(e: gdsbp::Error) -> Self {
        use gdsbp::Error as E;
        match e {
            E::Usage(_) => CliError::Usage(e.to_string()),
            E::Infeasible(_) => CliError::Infeasible(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "gdsbp", version, about = "GDS belief-propagation decoding of stabilizer codes")]
struct Cli {
    /// Flat `key = value` file of flags; flags given on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write check matrices: `toric:L`, `gb`, `gb102`, a CHK path, `qc`, or
    /// `singleshot`.
    #[command(args_override_self = true)]
    Build(BuildArgs),
    /// Decode one syndrome against a GDS (or CHK) matrix.
    #[command(args_override_self = true)]
    Decode(DecodeArgs),
    /// Memory-lifetime campaign over repeated noisy rounds.
    #[command(args_override_self = true)]
    Memory(MemoryArgs),
    /// Single-shot campaign with a redundant measurement matrix.
    #[command(args_override_self = true)]
    Singleshot(SingleShotArgs),
    /// Fit the finite-size scaling ansatz to campaign CSVs.
    #[command(args_override_self = true)]
    Fit(FitArgs),
}

#[derive(Args, Debug, Default, Clone)]
struct QcArgs {
    /// Base matrix: rows split by `;`, entries by `,` or spaces; `-1` is a
    /// zero block.
    #[arg(long)]
    base: Option<String>,
    /// Circulant size.
    #[arg(long)]
    c: Option<usize>,
    /// Base matrix in `QC gamma rho c` text form.
    #[arg(long, value_name = "PATH")]
    qc_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildArgs {
    target: String,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write the multi-round matrix over this many rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Append the perfect readout round (with `--rounds`).
    #[arg(long)]
    readout: bool,
    /// Dense per-round-syndrome form instead of the bidiagonal one.
    #[arg(long)]
    accumulated: bool,
    /// Write the one-round data-syndrome matrix `[H | I]`.
    #[arg(long)]
    ds: bool,
    /// Print the Tanner-graph girth (`inf` for forests).
    #[arg(long)]
    girth: bool,
    /// Graphviz export of the Tanner graph.
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    #[command(flatten)]
    qc: QcArgs,
    /// Append an identity block: `[A | I]`.
    #[arg(long)]
    with_identity: bool,
    /// Search random base matrices instead of reading one.
    #[arg(long)]
    search: bool,
    #[arg(long, default_value_t = 2)]
    gamma: usize,
    #[arg(long, default_value_t = 6)]
    rho: usize,
    #[arg(long, default_value_t = 8)]
    girth_target: usize,
    #[arg(long, default_value_t = 1000)]
    attempts: usize,
    #[arg(long)]
    allow_zero_blocks: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the searched base matrix.
    #[arg(long, value_name = "PATH")]
    spec_out: Option<PathBuf>,
    /// Code for `singleshot`.
    #[arg(long, default_value = "gb102")]
    code: String,
    /// Measurement matrix of a single-shot pair.
    #[arg(long, value_name = "PATH")]
    measurement_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    /// Fixed α = 1, parallel, 50 iterations.
    Bp,
    /// 150 iterations, serial, α 1.20 → 0.30.
    Toric,
    /// 50 iterations, parallel, α 1.4 → 0.4.
    Gb,
}

#[derive(Args, Debug, Clone)]
struct DecoderArgs {
    /// Starting configuration; inferred from the code when omitted.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    tmax: Option<usize>,
    /// Fixed normalization α.
    #[arg(long, conflicts_with_all = ["alpha_start", "alpha_end"])]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha_end")]
    alpha_start: Option<f64>,
    #[arg(long, requires = "alpha_start")]
    alpha_end: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    alpha_step: f64,
    #[arg(long)]
    schedule: Option<ScheduleArg>,
    /// Initialize every prior from this rate instead of the true ones.
    #[arg(long, value_name = "EPS0")]
    fixed_init: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScheduleArg {
    Parallel,
    Serial,
}

impl DecoderArgs {
    fn resolve(&self, default: Preset) -> Result<DecoderConfig> {
        let mut cfg = match self.preset.unwrap_or(default) {
            Preset::Bp => DecoderConfig::default(),
            Preset::Toric => DecoderConfig::toric_ambp(),
            Preset::Gb => DecoderConfig::gb_ambp(),
        };
        if let Some(t) = self.tmax {
            cfg.t_max = t;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = AlphaSchedule::Fixed(a);
        }
        if let (Some(s), Some(e)) = (self.alpha_start, self.alpha_end) {
            cfg.alpha = AlphaSchedule::linear(s, e, self.alpha_step)?;
        }
        if let Some(s) = self.schedule {
            cfg.schedule = match s {
                ScheduleArg::Parallel => Schedule::Parallel,
                ScheduleArg::Serial => Schedule::Serial,
            };
        }
        cfg.fixed_init = self.fixed_init;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn describe_decoder(cfg: &DecoderConfig, out: &mut Vec<(String, String)>) {
    out.push(("tmax".into(), cfg.t_max.to_string()));
    match &cfg.alpha {
        AlphaSchedule::Fixed(a) => out.push(("alpha".into(), a.to_string())),
        AlphaSchedule::Sweep(v) => {
            out.push(("alpha-start".into(), v[0].to_string()));
            out.push(("alpha-end".into(), v[v.len() - 1].to_string()));
            let step = if v.len() > 1 { v[0] - v[1] } else { 0.01 };
            out.push(("alpha-step".into(), format!("{:.12}", step).trim_end_matches('0').to_string()));
        }
    }
    out.push(("schedule".into(), cfg.schedule.to_string()));
    if let Some(e) = cfg.fixed_init {
        out.push(("fixed-init".into(), e.to_string()));
    }
}

#[derive(Args, Debug, Clone)]
struct NoiseArgs {
    /// Depolarizing rate(s), comma separated for a sweep.
    #[arg(long, required = true, value_parser = parse_rates)]
    epsilon: Rates,
    /// Syndrome flip rate; defaults to `epsilon`.
    #[arg(long, conflicts_with = "eta")]
    epsilon_b: Option<f64>,
    /// Flip rate as a multiple of `epsilon`.
    #[arg(long)]
    eta: Option<f64>,
}

/// Comma-separated rates; one value so a later flag replaces it whole.
#[derive(Debug, Clone)]
struct Rates(Vec<f64>);

fn parse_rates(s: &str) -> std::result::Result<Rates, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad rate {t:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Rates)
}

impl NoiseArgs {
    fn pairs(&self) -> Vec<(f64, f64)> {
        self.epsilon
            .0
            .iter()
            .map(|e| {
                let eb = match (self.epsilon_b, self.eta) {
                    (Some(b), _) => b,
                    (None, Some(k)) => k * e,
                    (None, None) => *e,
                };
                (*e, eb)
            })
            .collect()
    }

    fn describe(&self, out: &mut Vec<(String, String)>) {
        let eps: Vec<String> = self.epsilon.0.iter().map(f64::to_string).collect();
        out.push(("epsilon".into(), eps.join(",")));
        match (self.epsilon_b, self.eta) {
            (Some(b), _) => out.push(("epsilon-b".into(), b.to_string())),
            (None, Some(k)) => out.push(("eta".into(), k.to_string())),
            (None, None) => out.push(("eta".into(), "1".into())),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct CampaignArgs {
    /// Trial cap per point.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Stop a point after this many failures.
    #[arg(long)]
    failure_target: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    workers: Option<usize>,
    /// CSV output; a `.config` provenance file is written beside it.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Record wall-clock time (makes the CSV run-dependent).
    #[arg(long)]
    timed: bool,
}

impl CampaignArgs {
    fn limits(&self) -> CampaignLimits {
        CampaignLimits {
            max_trials: self.trials,
            failure_target: self.failure_target,
            workers: self.workers,
        }
    }

    fn describe(&self, out: &mut Vec<(String, String)>) {
        out.push(("trials".into(), self.trials.to_string()));
        if let Some(f) = self.failure_target {
            out.push(("failure-target".into(), f.to_string()));
        }
        out.push(("seed".into(), self.seed.to_string()));
        if let Some(w) = self.workers {
            out.push(("workers".into(), w.to_string()));
        }
        if self.timed {
            out.push(("timed".into(), "true".into()));
        }
    }
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// GDS or CHK file.
    #[arg(long, value_name = "PATH")]
    matrix: PathBuf,
    /// Syndrome as a 0/1 string.
    #[arg(long)]
    syndrome: String,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Flip rate; defaults to `epsilon`.
    #[arg(long)]
    epsilon_b: Option<f64>,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Write the final LLRs, one variable per line.
    #[arg(long, value_name = "PATH")]
    llr_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MemoryArgs {
    /// `toric:L`, `gb`, `gb102` or a CHK path.
    #[arg(long)]
    code: String,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    /// Cycle cap per trial; capped trials are reported as censored.
    #[arg(long, default_value_t = 1_000_000)]
    max_cycles: u64,
    #[command(flatten)]
    campaign: CampaignArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
}

#[derive(Args, Debug)]
struct SingleShotArgs {
    /// `gb`, `gb102`, `toric:L` or a CHK path.
    #[arg(long, default_value = "gb102")]
    code: String,
    #[command(flatten)]
    qc: QcArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    /// `iid`, `weight:W` (exactly W) or `upto:W` (1..=W).
    #[arg(long, default_value = "iid")]
    mode: String,
    #[command(flatten)]
    campaign: CampaignArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Append failing errors in the debug text format.
    #[arg(long, value_name = "PATH")]
    archive: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Campaign CSVs.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn load_code(spec: &str) -> Result<StabilizerCode> {
    if let Some(l) = spec.strip_prefix("toric:") {
        let l: usize = l
            .parse()
            .map_err(|_| CliError::Usage(format!("bad toric size in {spec:?}")))?;
        return Ok(rotated_toric(l)?);
    }
    match spec {
        "gb" => Ok(gb126(false)),
        "gb102" => Ok(gb126(true)),
        path => {
            let p = Path::new(path);
            if !p.exists() {
                return Err(CliError::Usage(format!(
                    "unknown code {path:?}: expected toric:L, gb, gb102 or a CHK file"
                )));
            }
            Ok(load_gb_code(p)?)
        }
    }
}

fn default_preset(spec: &str) -> Preset {
    if spec.starts_with("toric:") {
        Preset::Toric
    } else {
        Preset::Gb
    }
}

fn parse_base(text: &str) -> Result<Vec<Vec<i64>>> {
    text.split(';')
        .filter(|r| !r.trim().is_empty())
        .map(|row| {
            row.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<i64>()
                        .map_err(|_| CliError::Usage(format!("bad base entry {t:?}")))
                })
                .collect()
        })
        .collect()
}

impl QcArgs {
    /// The requested base matrix, or `None` when nothing was given.
    fn spec(&self) -> Result<Option<QuasiCyclicSpec>> {
        match (&self.qc_file, &self.base) {
            (Some(_), Some(_)) => Err(CliError::Usage("give either --qc-file or --base".into())),
            (Some(p), None) => Ok(Some(read(p)?.parse()?)),
            (None, Some(b)) => {
                let c = self
                    .c
                    .ok_or_else(|| CliError::Usage("--base needs --c".into()))?;
                Ok(Some(QuasiCyclicSpec::new(c, parse_base(b)?)?))
            }
            (None, None) => Ok(None),
        }
    }
}

/// A binary matrix as a GDS file with no quaternary columns.
fn binary_as_gds(b: &BinaryMatrix) -> Result<GdsCheckMatrix> {
    let empty = QuaternaryCheckMatrix::new(0, vec![Vec::new(); b.nrows()])?;
    Ok(GdsCheckMatrix::from_blocks(&empty, b)?)
}

fn girth_text(g: Option<usize>) -> String {
    g.map_or_else(|| "inf".to_string(), |g| g.to_string())
}

fn emit(out: Option<&Path>, text: &str, quiet: bool) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None if !quiet => {
            print!("{text}");
            Ok(())
        }
        None => Ok(()),
    }
}

fn cmd_build(a: &BuildArgs) -> Result<()> {
    let (text, graph) = match a.target.as_str() {
        "qc" => {
            let spec = if a.search {
                let found = random_qc_search(&QcSearch {
                    gamma: a.gamma,
                    rho: a.rho,
                    c: a
                        .qc
                        .c
                        .ok_or_else(|| CliError::Usage("--search needs --c".into()))?,
                    girth_target: a.girth_target,
                    attempts: a.attempts,
                    seed: a.seed,
                    allow_zero_blocks: a.allow_zero_blocks,
                })?;
                found.ok_or_else(|| {
                    CliError::Infeasible(format!(
                        "no base matrix reached girth {} in {} attempts",
                        a.girth_target, a.attempts
                    ))
                })?
            } else {
                a.qc
                    .spec()?
                    .ok_or_else(|| CliError::Usage("qc needs --base and --c, --qc-file, or --search".into()))?
            };
            if let Some(p) = &a.spec_out {
                write(p, &spec.to_string())?;
            }
            let mut m = quasi_cyclic(&spec)?;
            if a.with_identity {
                m = with_identity(&m);
            }
            let g = binary_as_gds(&m)?;
            (g.to_gds_string(), TannerGraph::from_gds(&g))
        }
        "singleshot" => {
            let code = load_code(&a.code)?;
            let spec = a.qc.spec()?.unwrap_or_else(QuasiCyclicSpec::gb126_case1);
            let redundancy = quasi_cyclic(&spec)?;
            let pair = single_shot_matrix(code.h(), &redundancy)?;
            if let Some(p) = &a.measurement_out {
                write(p, &pair.measurement.to_gds_string())?;
            }
            eprintln!(
                "decoding matrix {}x{}, [A|I] girth {}",
                pair.decoding.m_prime(),
                pair.decoding.n_quaternary() + pair.decoding.m_binary(),
                girth_text(binary_girth(&with_identity(&redundancy)))
            );
            (pair.decoding.to_gds_string(), TannerGraph::from_gds(&pair.decoding))
        }
        spec => {
            let code = load_code(spec)?;
            eprintln!(
                "{}: n={} m={} rank={} k={}",
                code.name,
                code.n(),
                code.m(),
                code.rank(),
                code.k()
            );
            let h = code.h();
            let gds = match (a.rounds, a.ds) {
                (Some(_), true) => return Err(CliError::Usage("--ds and --rounds are exclusive".into())),
                (Some(r), false) if a.accumulated => Some(gds_accumulated(h, r)?),
                (Some(r), false) if a.readout => Some(gds_with_readout(h, r)?),
                (Some(r), false) => Some(gds_repeated(h, r)?),
                (None, true) => Some(ds_matrix(h)),
                (None, false) => None,
            };
            match gds {
                Some(g) => (g.to_gds_string(), TannerGraph::from_gds(&g)),
                None => (h.to_chk_string(), TannerGraph::from_gds(&plain_gds(&code))),
            }
        }
    };
    if let Some(p) = &a.dot {
        write(p, &graph.to_dot())?;
    }
    emit(a.out.as_deref(), &text, a.girth)?;
    if a.girth {
        println!("{}", girth_text(graph.girth()));
    }
    Ok(())
}

fn load_matrix(path: &Path) -> Result<GdsCheckMatrix> {
    let text = read(path)?;
    let header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    if header.starts_with("CHK") {
        let h = parse_chk(&text, false)?.matrix;
        let empty = BinaryMatrix::zeros(h.nrows(), 0);
        Ok(GdsCheckMatrix::from_blocks(&h, &empty)?)
    } else {
        Ok(parse_gds(&text)?)
    }
}

fn cmd_decode(a: &DecodeArgs) -> Result<()> {
    let h = load_matrix(&a.matrix)?;
    let s = parse_bits(&a.syndrome)?;
    if s.len() != h.m_prime() {
        return Err(CliError::Data(format!(
            "syndrome has {} bits, matrix has {} rows",
            s.len(),
            h.m_prime()
        )));
    }
    let mut cfg = a.decoder.resolve(Preset::Bp)?;
    cfg.keep_llrs = a.llr_out.is_some();
    let prior = cfg.prior(h.n_quaternary(), h.m_binary(), a.epsilon, a.epsilon_b.unwrap_or(a.epsilon))?;
    let out = MbpDecoder::new(&h).decode(&s, &prior, &cfg)?;
    let matches = h.syndrome(&out.estimate)? == s;
    println!("estimate: {} {}", out.estimate.pauli, format_bits(&out.estimate.bits));
    println!("converged: {}", out.converged);
    println!("syndrome_match: {matches}");
    println!("iterations: {}", out.iterations_used);
    println!("total_iterations: {}", out.total_iterations);
    println!(
        "alpha: {}",
        out.alpha_star.map_or_else(|| "none".to_string(), |a| a.to_string())
    );
    if let (Some(p), Some(llr)) = (&a.llr_out, &out.final_llrs) {
        let mut text = String::new();
        for (j, g) in llr.quaternary.iter().enumerate() {
            writeln!(text, "q{j} {:.17e} {:.17e} {:.17e}", g[0], g[1], g[2]).unwrap();
        }
        for (j, g) in llr.binary.iter().enumerate() {
            writeln!(text, "b{j} {g:.17e}").unwrap();
        }
        write(p, &text)?;
    }
    Ok(())
}

fn finish_campaign(campaign: &CampaignArgs, records: &[ExperimentRecord], provenance: &[(String, String)]) -> Result<()> {
    let csv = records_to_csv(records);
    match &campaign.out {
        Some(p) => {
            write(p, &csv)?;
            let mut side = p.clone().into_os_string();
            side.push(".config");
            write(Path::new(&side), &config::render(provenance))?;
        }
        None => {
            print!("{csv}");
            eprint!("{}", config::render(provenance));
        }
    }
    Ok(())
}

fn cmd_memory(a: &MemoryArgs) -> Result<()> {
    let code = load_code(&a.code)?;
    let decoder = a.decoder.resolve(default_preset(&a.code))?;
    let mut provenance = vec![
        ("command".into(), "memory".into()),
        ("code".into(), a.code.clone()),
        ("rounds".into(), a.rounds.to_string()),
        ("max-cycles".into(), a.max_cycles.to_string()),
    ];
    a.noise.describe(&mut provenance);
    a.campaign.describe(&mut provenance);
    describe_decoder(&decoder, &mut provenance);
    let mut records = Vec::new();
    for (eps, eps_b) in a.noise.pairs() {
        let mut cfg = LifetimeConfig::new(code.clone(), eps, eps_b, a.rounds, decoder.clone());
        cfg.seed = a.campaign.seed;
        cfg.max_cycles = a.max_cycles;
        records.push(lifetime_campaign(&cfg, &a.campaign.limits(), a.campaign.timed)?.record);
    }
    finish_campaign(&a.campaign, &records, &provenance)
}

fn parse_mode(s: &str) -> Result<SampleMode> {
    let weight = |w: &str| {
        w.parse::<usize>()
            .map_err(|_| CliError::Usage(format!("bad weight in mode {s:?}")))
    };
    if s == "iid" {
        Ok(SampleMode::Iid)
    } else if let Some(w) = s.strip_prefix("weight:") {
        Ok(SampleMode::WeightExact(weight(w)?))
    } else if let Some(w) = s.strip_prefix("upto:") {
        Ok(SampleMode::WeightAtMost(weight(w)?))
    } else {
        Err(CliError::Usage(format!("unknown mode {s:?}: expected iid, weight:W or upto:W")))
    }
}

fn cmd_singleshot(a: &SingleShotArgs) -> Result<()> {
    let code = load_code(&a.code)?;
    let decoder = a.decoder.resolve(default_preset(&a.code))?;
    let mode = parse_mode(&a.mode)?;
    let spec = match a.qc.spec()? {
        Some(s) => Some(s),
        None if a.code.starts_with("gb") => Some(QuasiCyclicSpec::gb126_case1()),
        None => None,
    };
    let pair = match &spec {
        Some(s) => Some(single_shot_matrix(code.h(), &quasi_cyclic(s)?)?),
        None => None,
    };
    let mut provenance = vec![
        ("command".into(), "singleshot".into()),
        ("code".into(), a.code.clone()),
        ("mode".into(), a.mode.clone()),
    ];
    if let Some(s) = &spec {
        let rows: Vec<String> = s
            .base
            .iter()
            .map(|r| r.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
            .collect();
        provenance.push(("base".into(), rows.join(";")));
        provenance.push(("c".into(), s.c.to_string()));
    }
    a.noise.describe(&mut provenance);
    a.campaign.describe(&mut provenance);
    describe_decoder(&decoder, &mut provenance);
    let mut records = Vec::new();
    let mut archive = String::new();
    for (eps, eps_b) in a.noise.pairs() {
        let cfg = SingleShotConfig {
            code: code.clone(),
            pair: pair.clone(),
            epsilon: eps,
            epsilon_b: eps_b,
            decoder: decoder.clone(),
            mode,
            seed: a.campaign.seed,
        };
        let (record, trials) = single_shot_run(&cfg, &a.campaign.limits(), a.campaign.timed)?;
        if a.archive.is_some() {
            for (k, t) in trials.iter().enumerate() {
                if t.class == ResidualClass::LogicalFailure {
                    writeln!(archive, "# epsilon {eps} epsilon_b {eps_b} trial {k}").unwrap();
                    writeln!(archive, "{} {}", t.error.pauli, format_bits(&t.error.bits)).unwrap();
                }
            }
        }
        records.push(record);
    }
    if let Some(p) = &a.archive {
        write(p, &archive)?;
    }
    finish_campaign(&a.campaign, &records, &provenance)
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    let mut points = Vec::new();
    for p in &a.inputs {
        for r in parse_csv(&read(p)?)? {
            if let Some(d) = r.d {
                if r.metric.is_finite() {
                    points.push((d as f64, r.epsilon, r.metric));
                }
            }
        }
    }
    if points.len() < 3 {
        return Err(CliError::Data(format!(
            "need at least 3 rows with a distance and finite metric, found {}",
            points.len()
        )));
    }
    let fit = ansatz_fit(&points)?;
    println!("nu={:.2} tau={:.4} mse={:e}", fit.nu, fit.tau, fit.mse);
    println!(
        "coefficients={:e},{:e},{:e}",
        fit.coefficients[0], fit.coefficients[1], fit.coefficients[2]
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Memory(a) => cmd_memory(a),
        Command::Singleshot(a) => cmd_singleshot(a),
        Command::Fit(a) => cmd_fit(a),
    }
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
