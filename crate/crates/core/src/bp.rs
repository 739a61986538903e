//! GDS-MBP and GDS-AMBP message passing.
//!
//! Messages are scalar LLRs on the edges of the Tanner graph. A quaternary
//! variable keeps a triple `(Γ^X, Γ^Y, Γ^Z)` and sends `λ_W` of it along an
//! edge labelled `W`; a binary variable sends its scalar LLR directly.
//!
//! `⊞` is evaluated as `2·atanh(Π tanh(a/2))`, but through the logarithms of
//! the tanh factors: the product becomes a sum of non-positive terms and the
//! final `atanh` is taken from `expm1`/`ln_1p`. This keeps relative accuracy
//! near saturation, where the direct product loses it.

use crate::error::{Error, Result};
use crate::matrix::GdsCheckMatrix;
use crate::pauli::{MixedVector, Pauli, PauliVector};

pub const DEFAULT_LLR_CLAMP: f64 = 30.0;

/// Largest tanh product magnitude admitted before `atanh`.
const PRODUCT_GUARD: f64 = 1.0 - 1e-15;

const BINARY_LABEL: u8 = 3;

/// Prior LLRs: `(Λ^X, Λ^Y, Λ^Z)` per quaternary variable and `Λ` per binary
/// variable.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrInit {
    pub quaternary: Vec<[f64; 3]>,
    pub binary: Vec<f64>,
}

impl LlrInit {
    /// Uniform priors from a depolarizing rate and a flip rate. Zero rates map
    /// to `clamp`.
    pub fn from_rates(n: usize, m: usize, epsilon: f64, epsilon_b: f64, clamp: f64) -> Result<Self> {
        if !(0.0..0.75).contains(&epsilon) {
            return Err(Error::usage(format!("epsilon {epsilon} outside [0, 3/4)")));
        }
        if !(0.0..0.5).contains(&epsilon_b) {
            return Err(Error::usage(format!("epsilon_b {epsilon_b} outside [0, 1/2)")));
        }
        let q = if epsilon == 0.0 {
            clamp
        } else {
            ((1.0 - epsilon) / (epsilon / 3.0)).ln().min(clamp)
        };
        let b = if epsilon_b == 0.0 {
            clamp
        } else {
            ((1.0 - epsilon_b) / epsilon_b).ln().min(clamp)
        };
        Ok(LlrInit {
            quaternary: vec![[q; 3]; n],
            binary: vec![b; m],
        })
    }

    pub fn n(&self) -> usize {
        self.quaternary.len()
    }

    pub fn m(&self) -> usize {
        self.binary.len()
    }
}

/// [`LlrInit::from_rates`] with the default clamp.
pub fn init_from_rates(n: usize, m: usize, epsilon: f64, epsilon_b: f64) -> Result<LlrInit> {
    LlrInit::from_rates(n, m, epsilon, epsilon_b, DEFAULT_LLR_CLAMP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    Parallel,
    /// Variables updated one at a time in ascending index.
    Serial,
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" => Ok(Schedule::Parallel),
            "serial" => Ok(Schedule::Serial),
            _ => Err(Error::usage(format!("unknown schedule {s:?}"))),
        }
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Schedule::Parallel => "parallel",
            Schedule::Serial => "serial",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlphaSchedule {
    Fixed(f64),
    /// Strictly decreasing, all positive.
    Sweep(Vec<f64>),
}

impl AlphaSchedule {
    /// `start, start − step, …` down to `end` inclusive.
    pub fn linear(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(end > 0.0) || start < end {
            return Err(Error::usage(format!(
                "invalid alpha sweep {start} -> {end} step {step}"
            )));
        }
        let count = ((start - end) / step + 1e-9).floor() as usize + 1;
        Ok(AlphaSchedule::Sweep(
            // snap to 12 decimals so 1.2 − 29·0.01 prints as 0.91
            (0..count)
                .map(|i| ((start - i as f64 * step) * 1e12).round() / 1e12)
                .collect(),
        ))
    }

    pub fn values(&self) -> &[f64] {
        match self {
            AlphaSchedule::Fixed(a) => std::slice::from_ref(a),
            AlphaSchedule::Sweep(v) => v,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = self.values();
        if v.is_empty() {
            return Err(Error::usage("empty alpha sequence"));
        }
        if v.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::usage("alpha values must be positive"));
        }
        if v.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::usage("alpha sequence must be strictly decreasing"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderConfig {
    pub t_max: usize,
    pub alpha: AlphaSchedule,
    pub schedule: Schedule,
    pub llr_clamp: f64,
    /// Substitute this rate for the physical ones when building priors.
    pub fixed_init: Option<f64>,
    /// Return the final `Γ` values in the outcome.
    pub keep_llrs: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            t_max: 50,
            alpha: AlphaSchedule::Fixed(1.0),
            schedule: Schedule::Parallel,
            llr_clamp: DEFAULT_LLR_CLAMP,
            fixed_init: None,
            keep_llrs: false,
        }
    }
}

impl DecoderConfig {
    /// Toric-code settings: serial, `T_max = 150`, α from 1.20 down to 0.30.
    pub fn toric_ambp() -> Self {
        DecoderConfig {
            t_max: 150,
            alpha: AlphaSchedule::linear(1.20, 0.30, 0.01).expect("valid sweep"),
            schedule: Schedule::Serial,
            ..Default::default()
        }
    }

    /// GB-code settings: parallel, `T_max = 50`, α from 1.4 down to 0.4.
    pub fn gb_ambp() -> Self {
        DecoderConfig {
            t_max: 50,
            alpha: AlphaSchedule::linear(1.4, 0.4, 0.01).expect("valid sweep"),
            schedule: Schedule::Parallel,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(Error::usage("t_max must be at least 1"));
        }
        if !(self.llr_clamp > 0.0) {
            return Err(Error::usage("llr_clamp must be positive"));
        }
        if let Some(e) = self.fixed_init {
            if !(e > 0.0 && e < 0.5) {
                return Err(Error::usage(format!("fixed init rate {e} outside (0, 1/2)")));
            }
        }
        self.alpha.validate()
    }

    /// Priors for a decode, honouring `fixed_init`.
    pub fn prior(&self, n: usize, m: usize, epsilon: f64, epsilon_b: f64) -> Result<LlrInit> {
        let (e, eb) = match self.fixed_init {
            Some(e0) => (e0, if m > 0 { e0 } else { 0.0 }),
            None => (epsilon, epsilon_b),
        };
        LlrInit::from_rates(n, m, e, eb, self.llr_clamp)
    }
}

/// Final `Γ_j` values.
#[derive(Clone, Debug, PartialEq)]
pub struct Posteriors {
    pub quaternary: Vec<[f64; 3]>,
    pub binary: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    pub converged: bool,
    pub estimate: MixedVector,
    /// Iterations of the last MBP run.
    pub iterations_used: usize,
    /// Iterations summed over every α tried.
    pub total_iterations: usize,
    /// The α that converged (or the last one tried).
    pub alpha_star: Option<f64>,
    pub final_llrs: Option<Posteriors>,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

/// `λ_W(γ) = ln((1 + e^{−γ^W}) / (e^{−γ^U} + e^{−γ^V}))` where `U, V` are the
/// two symbols other than `W`. Panics on `W = I`.
pub fn lambda_w(w: Pauli, g: [f64; 3]) -> f64 {
    let k = w.slot().expect("lambda_w needs a non-identity symbol");
    lambda_slot(k, &g)
}

#[inline]
fn lambda_slot(k: usize, g: &[f64; 3]) -> f64 {
    let (u, v) = match k {
        0 => (g[1], g[2]),
        1 => (g[0], g[2]),
        _ => (g[0], g[1]),
    };
    softplus(-g[k]) - log_add_exp(-u, -v)
}

/// `ln |tanh(a/2)| = ln(1 − 2x/(1+x))` with `x = e^{−|a|}`; `−∞` at zero.
#[inline]
fn log_tanh_half(a: f64) -> f64 {
    let x = (-a.abs()).exp();
    (-2.0 * x / (1.0 + x)).ln_1p()
}

/// `2·atanh(e^l) = ln(1 + 2p/(1−p))` for `l ≤ 0`, with `p = e^l` and
/// `1 − p = −expm1(l)` so neither end loses precision.
#[inline]
fn atanh2_from_log(l: f64) -> f64 {
    let l = l.min(PRODUCT_GUARD.ln());
    let q = -l.exp_m1();
    let p = if q > 0.5 { l.exp() } else { 1.0 - q };
    (2.0 * p / q).ln_1p()
}

/// `⊞` with inputs and output clamped to `±clamp`. Panics on empty input.
pub fn boxplus_clamped(values: &[f64], clamp: f64) -> f64 {
    assert!(!values.is_empty(), "boxplus of an empty set");
    let mut log_sum = 0.0;
    let mut negative = false;
    for v in values {
        let a = v.clamp(-clamp, clamp);
        negative ^= a < 0.0;
        log_sum += log_tanh_half(a);
    }
    let mag = atanh2_from_log(log_sum).min(clamp);
    if negative {
        -mag
    } else {
        mag
    }
}

/// `⊞` with the default clamp.
pub fn boxplus(values: &[f64]) -> f64 {
    boxplus_clamped(values, DEFAULT_LLR_CLAMP)
}

/// Reusable decoder for one check matrix. Holds the graph in CSR form and
/// the message buffers, so repeated decodes do not allocate.
#[derive(Clone, Debug)]
pub struct MbpDecoder {
    n: usize,
    m: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    /// Pauli slot (0..3) or [`BINARY_LABEL`].
    edge_label: Vec<u8>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
    edge_check: Vec<usize>,

    msg: Vec<f64>,
    delta: Vec<f64>,
    log_t: Vec<f64>,
    neg: Vec<bool>,
    gamma_q: Vec<[f64; 3]>,
    gamma_b: Vec<f64>,
    est_q: Vec<u8>,
    est_b: Vec<bool>,
    prefix: Vec<(f64, bool)>,
}

impl MbpDecoder {
    pub fn new(h: &GdsCheckMatrix) -> Self {
        let n = h.n_quaternary();
        let m = h.m_binary();
        let mut check_ptr = vec![0];
        let mut edge_var = Vec::with_capacity(h.num_edges());
        let mut edge_label = Vec::with_capacity(h.num_edges());
        for row in h.rows() {
            for (c, p) in &row.quaternary {
                edge_var.push(*c);
                edge_label.push(p.slot().expect("non-identity entry") as u8);
            }
            for c in &row.binary {
                edge_var.push(n + c);
                edge_label.push(BINARY_LABEL);
            }
            check_ptr.push(edge_var.len());
        }
        let nv = n + m;
        let ne = edge_var.len();
        let mut edge_check = vec![0; ne];
        for i in 0..h.m_prime() {
            for e in check_ptr[i]..check_ptr[i + 1] {
                edge_check[e] = i;
            }
        }
        let mut counts = vec![0usize; nv + 1];
        for &j in &edge_var {
            counts[j + 1] += 1;
        }
        for j in 0..nv {
            counts[j + 1] += counts[j];
        }
        let var_ptr = counts.clone();
        let mut fill = counts;
        let mut var_edges = vec![0; ne];
        // edges are visited in ascending check order
        for (e, &j) in edge_var.iter().enumerate() {
            var_edges[fill[j]] = e;
            fill[j] += 1;
        }
        let max_deg = (0..h.m_prime())
            .map(|i| check_ptr[i + 1] - check_ptr[i])
            .max()
            .unwrap_or(0);
        MbpDecoder {
            n,
            m,
            check_ptr,
            edge_var,
            edge_label,
            var_ptr,
            var_edges,
            edge_check,
            msg: vec![0.0; ne],
            delta: vec![0.0; ne],
            log_t: vec![0.0; ne],
            neg: vec![false; ne],
            gamma_q: vec![[0.0; 3]; n],
            gamma_b: vec![0.0; m],
            est_q: vec![0; n],
            est_b: vec![false; m],
            prefix: Vec::with_capacity(max_deg + 1),
        }
    }

    pub fn n_quaternary(&self) -> usize {
        self.n
    }

    pub fn m_binary(&self) -> usize {
        self.m
    }

    pub fn m_prime(&self) -> usize {
        self.check_ptr.len() - 1
    }

    fn check_inputs(&self, s: &[bool], init: &LlrInit) -> Result<()> {
        if s.len() != self.m_prime() {
            return Err(Error::LengthMismatch {
                expected: self.m_prime(),
                found: s.len(),
            });
        }
        if init.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: init.n(),
            });
        }
        if init.m() != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                found: init.m(),
            });
        }
        Ok(())
    }

    /// Decode with the configured α: a single MBP run for
    /// [`AlphaSchedule::Fixed`], the adaptive sweep otherwise.
    pub fn decode(&mut self, s: &[bool], init: &LlrInit, cfg: &DecoderConfig) -> Result<DecodeOutcome> {
        cfg.validate()?;
        self.check_inputs(s, init)?;
        let mut total = 0;
        let alphas = cfg.alpha.values();
        for (k, &alpha) in alphas.iter().enumerate() {
            let (converged, iters) = self.run(s, init, cfg, alpha, cfg.t_max, true);
            total += iters;
            if converged || k + 1 == alphas.len() {
                return Ok(self.outcome(converged, iters, total, alpha, cfg));
            }
        }
        unreachable!("alpha sequence is nonempty")
    }

    /// Run exactly `iterations` iterations at fixed α, ignoring convergence,
    /// and return the resulting `Γ_j`.
    pub fn posteriors_after(
        &mut self,
        s: &[bool],
        init: &LlrInit,
        alpha: f64,
        schedule: Schedule,
        iterations: usize,
    ) -> Result<Posteriors> {
        self.check_inputs(s, init)?;
        let cfg = DecoderConfig {
            t_max: iterations,
            alpha: AlphaSchedule::Fixed(alpha),
            schedule,
            ..Default::default()
        };
        cfg.validate()?;
        self.run(s, init, &cfg, alpha, iterations, false);
        Ok(self.posteriors())
    }

    fn posteriors(&self) -> Posteriors {
        Posteriors {
            quaternary: self.gamma_q.clone(),
            binary: self.gamma_b.clone(),
        }
    }

    fn outcome(
        &self,
        converged: bool,
        iterations_used: usize,
        total_iterations: usize,
        alpha: f64,
        cfg: &DecoderConfig,
    ) -> DecodeOutcome {
        let symbols = self
            .est_q
            .iter()
            .map(|k| match k {
                0 => Pauli::X,
                1 => Pauli::Y,
                2 => Pauli::Z,
                _ => Pauli::I,
            })
            .collect();
        DecodeOutcome {
            converged,
            estimate: MixedVector::new(PauliVector::from_symbols(symbols), self.est_b.clone()),
            iterations_used,
            total_iterations,
            alpha_star: Some(alpha),
            final_llrs: cfg.keep_llrs.then(|| self.posteriors()),
        }
    }

    /// One MBP run. Returns (converged, iterations performed).
    fn run(
        &mut self,
        s: &[bool],
        init: &LlrInit,
        cfg: &DecoderConfig,
        alpha: f64,
        t_max: usize,
        halt: bool,
    ) -> (bool, usize) {
        let clamp = cfg.llr_clamp;
        let lam_q: Vec<[f64; 3]> = init
            .quaternary
            .iter()
            .map(|t| t.map(|v| v.clamp(-clamp, clamp)))
            .collect();
        let lam_b: Vec<f64> = init.binary.iter().map(|v| v.clamp(-clamp, clamp)).collect();

        for e in 0..self.msg.len() {
            let j = self.edge_var[e];
            let label = self.edge_label[e];
            let v = if label == BINARY_LABEL {
                lam_b[j - self.n]
            } else {
                lambda_slot(label as usize, &lam_q[j])
            };
            self.set_msg(e, v.clamp(-clamp, clamp));
        }

        let inv_alpha = 1.0 / alpha;
        for t in 1..=t_max {
            match cfg.schedule {
                Schedule::Parallel => {
                    self.horizontal_all(s, clamp);
                    for j in 0..self.n + self.m {
                        self.vertical(j, &lam_q, &lam_b, inv_alpha);
                    }
                }
                Schedule::Serial => {
                    for j in 0..self.n + self.m {
                        self.horizontal_into(j, s, clamp);
                        self.vertical(j, &lam_q, &lam_b, inv_alpha);
                        self.update_messages(j, clamp);
                    }
                }
            }
            self.hard_decision();
            if halt && self.syndrome_matches(s) {
                return (true, t);
            }
            if t == t_max {
                return (false, t);
            }
            if cfg.schedule == Schedule::Parallel {
                for j in 0..self.n + self.m {
                    self.update_messages(j, clamp);
                }
            }
        }
        (false, t_max)
    }

    #[inline]
    fn set_msg(&mut self, e: usize, v: f64) {
        self.msg[e] = v;
        self.neg[e] = v < 0.0;
        self.log_t[e] = log_tanh_half(v);
    }

    /// Δ for every edge from the current messages.
    fn horizontal_all(&mut self, s: &[bool], clamp: f64) {
        for i in 0..self.m_prime() {
            let (lo, hi) = (self.check_ptr[i], self.check_ptr[i + 1]);
            // prefix[k] = combined (log, sign) of edges lo..lo+k
            self.prefix.clear();
            let mut acc = (0.0, false);
            for e in lo..hi {
                self.prefix.push(acc);
                acc = (acc.0 + self.log_t[e], acc.1 ^ self.neg[e]);
            }
            let mut suffix = (0.0, s[i]);
            for e in (lo..hi).rev() {
                let (pl, pn) = self.prefix[e - lo];
                let mag = atanh2_from_log(pl + suffix.0).min(clamp);
                self.delta[e] = if pn ^ suffix.1 { -mag } else { mag };
                suffix = (suffix.0 + self.log_t[e], suffix.1 ^ self.neg[e]);
            }
        }
    }

    /// Δ into variable `j` from each of its checks.
    fn horizontal_into(&mut self, j: usize, s: &[bool], clamp: f64) {
        for k in self.var_ptr[j]..self.var_ptr[j + 1] {
            let e = self.var_edges[k];
            let i = self.edge_check[e];
            let mut log_sum = 0.0;
            let mut negative = s[i];
            for f in self.check_ptr[i]..self.check_ptr[i + 1] {
                if f != e {
                    log_sum += self.log_t[f];
                    negative ^= self.neg[f];
                }
            }
            let mag = atanh2_from_log(log_sum).min(clamp);
            self.delta[e] = if negative { -mag } else { mag };
        }
    }

    fn vertical(&mut self, j: usize, lam_q: &[[f64; 3]], lam_b: &[f64], inv_alpha: f64) {
        let edges = &self.var_edges[self.var_ptr[j]..self.var_ptr[j + 1]];
        if j < self.n {
            // Γ^W collects Δ from edges whose label anticommutes with W,
            // i.e. every edge except those labelled W itself.
            let mut by_label = [0.0; 3];
            let mut total = 0.0;
            for &e in edges {
                let d = self.delta[e];
                by_label[self.edge_label[e] as usize] += d;
                total += d;
            }
            let lam = lam_q[j];
            self.gamma_q[j] = [0, 1, 2].map(|w| lam[w] + inv_alpha * (total - by_label[w]));
        } else {
            let sum: f64 = edges.iter().map(|&e| self.delta[e]).sum();
            self.gamma_b[j - self.n] = lam_b[j - self.n] + inv_alpha * sum;
        }
    }

    /// `Γ_{j→i} = λ_{H_ij}(Γ_j − (W*H_ij) Δ_{i→j})`, which reduces to
    /// `λ_{H_ij}(Γ_j) − Δ_{i→j}` because exactly the two symbols other than
    /// `H_ij` anticommute with it.
    fn update_messages(&mut self, j: usize, clamp: f64) {
        let (lo, hi) = (self.var_ptr[j], self.var_ptr[j + 1]);
        if j < self.n {
            let g = self.gamma_q[j];
            let mut lam: [Option<f64>; 3] = [None; 3];
            for k in lo..hi {
                let e = self.var_edges[k];
                let label = self.edge_label[e] as usize;
                let l = *lam[label].get_or_insert_with(|| lambda_slot(label, &g));
                self.set_msg(e, (l - self.delta[e]).clamp(-clamp, clamp));
            }
        } else {
            let g = self.gamma_b[j - self.n];
            for k in lo..hi {
                let e = self.var_edges[k];
                self.set_msg(e, (g - self.delta[e]).clamp(-clamp, clamp));
            }
        }
    }

    fn hard_decision(&mut self) {
        for (j, g) in self.gamma_q.iter().enumerate() {
            self.est_q[j] = if g.iter().all(|v| *v > 0.0) {
                3
            } else {
                // first minimum wins: X < Y < Z
                let mut best = 0;
                for w in 1..3 {
                    if g[w] < g[best] {
                        best = w;
                    }
                }
                best as u8
            };
        }
        for (j, g) in self.gamma_b.iter().enumerate() {
            self.est_b[j] = !(*g > 0.0);
        }
    }

    fn syndrome_matches(&self, s: &[bool]) -> bool {
        (0..self.m_prime()).all(|i| {
            let mut parity = false;
            for e in self.check_ptr[i]..self.check_ptr[i + 1] {
                let j = self.edge_var[e];
                let label = self.edge_label[e];
                parity ^= if label == BINARY_LABEL {
                    self.est_b[j - self.n]
                } else {
                    let est = self.est_q[j];
                    est != 3 && est != label
                };
            }
            parity == s[i]
        })
    }
}

/// One GDS-MBP run at `alpha` (a sweep in `cfg` is replaced by `alpha`).
pub fn decode_mbp(
    h: &GdsCheckMatrix,
    s: &[bool],
    init: &LlrInit,
    cfg: &DecoderConfig,
    alpha: f64,
) -> Result<DecodeOutcome> {
    let cfg = DecoderConfig {
        alpha: AlphaSchedule::Fixed(alpha),
        ..cfg.clone()
    };
    MbpDecoder::new(h).decode(s, init, &cfg)
}

/// GDS-AMBP over the α values of `cfg`.
pub fn decode_ambp(
    h: &GdsCheckMatrix,
    s: &[bool],
    init: &LlrInit,
    cfg: &DecoderConfig,
) -> Result<DecodeOutcome> {
    MbpDecoder::new(h).decode(s, init, cfg)
}

/// `Γ_j` after a fixed number of iterations (no early stop).
pub fn posteriors_after(
    h: &GdsCheckMatrix,
    s: &[bool],
    init: &LlrInit,
    alpha: f64,
    schedule: Schedule,
    iterations: usize,
) -> Result<Posteriors> {
    MbpDecoder::new(h).posteriors_after(s, init, alpha, schedule, iterations)
}
