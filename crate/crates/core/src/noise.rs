//! Phenomenological noise sampling, residual classification and the
//! brute-force posterior oracle.
//!
//! Random numbers come from ChaCha8 streams keyed by
//! `(seed, trial, round, kind)`: the seed picks the key, the trial picks the
//! stream, and `(round, kind)` picks a disjoint window of the keystream. A
//! trial's errors therefore do not depend on which worker ran it or in what
//! order.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bp::{init_from_rates, LlrInit};
use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::matrix::{r_transform_syndrome, GdsCheckMatrix, QuaternaryCheckMatrix};
use crate::pauli::{format_bits, parse_bits, MixedVector, Pauli, PauliVector};

/// Which part of a round a stream feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteKind {
    Data = 0,
    Flip = 1,
}

/// Keystream window per `(round, kind)`: 2⁴⁰ words.
const WINDOW_BITS: u32 = 40;

/// A ChaCha8 generator positioned at the window for `(round, kind)` of
/// stream `trial` under `seed`.
pub fn stream_rng(seed: u64, trial: u64, round: u64, kind: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.set_word_pos(((round as u128) * 2 + kind as u128) << WINDOW_BITS);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub epsilon: f64,
    pub epsilon_b: f64,
    pub rounds: usize,
}

impl NoiseModel {
    pub fn new(epsilon: f64, epsilon_b: f64, rounds: usize) -> Result<Self> {
        let model = NoiseModel {
            epsilon,
            epsilon_b,
            rounds,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.75).contains(&self.epsilon) {
            return Err(Error::usage(format!("epsilon {} outside [0, 3/4]", self.epsilon)));
        }
        if !(0.0..0.5).contains(&self.epsilon_b) {
            return Err(Error::usage(format!("epsilon_b {} outside [0, 1/2)", self.epsilon_b)));
        }
        if self.rounds == 0 {
            return Err(Error::usage("rounds must be at least 1"));
        }
        Ok(())
    }
}

/// Each symbol is `I` with probability `1 − ε`, otherwise uniform over
/// `X, Y, Z`.
pub fn sample_pauli<R: Rng>(n: usize, epsilon: f64, rng: &mut R) -> PauliVector {
    if epsilon == 0.0 {
        return PauliVector::identity(n);
    }
    let symbols = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < epsilon {
                Pauli::NON_IDENTITY[((u / epsilon * 3.0) as usize).min(2)]
            } else {
                Pauli::I
            }
        })
        .collect();
    PauliVector::from_symbols(symbols)
}

/// Each bit is set with probability `ε_b`.
pub fn sample_bits<R: Rng>(m: usize, epsilon_b: f64, rng: &mut R) -> Vec<bool> {
    if epsilon_b == 0.0 {
        return vec![false; m];
    }
    (0..m).map(|_| rng.gen::<f64>() < epsilon_b).collect()
}

/// Errors and observed syndromes of `r` noisy rounds, optionally followed by
/// a flip-free readout round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialSample {
    pub data_errors: Vec<PauliVector>,
    pub syndrome_flips: Vec<Vec<bool>>,
    pub observed_syndromes: Vec<Vec<bool>>,
}

impl TrialSample {
    /// Build from errors: `s^(ℓ) = F^(ℓ) * H + e^(ℓ)` with
    /// `F^(ℓ) = Π_{j≤ℓ} E^(j)`. Rounds past the last flip vector are
    /// flip-free.
    pub fn from_errors(
        h: &QuaternaryCheckMatrix,
        data_errors: Vec<PauliVector>,
        syndrome_flips: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if syndrome_flips.len() > data_errors.len() {
            return Err(Error::dim("more flip rounds than data rounds"));
        }
        let mut cumulative = PauliVector::identity(h.ncols());
        let mut observed = Vec::with_capacity(data_errors.len());
        for (l, e) in data_errors.iter().enumerate() {
            cumulative.mul_assign(e)?;
            let mut s = h.syndrome(&cumulative)?;
            if let Some(flips) = syndrome_flips.get(l) {
                if flips.len() != s.len() {
                    return Err(Error::LengthMismatch {
                        expected: s.len(),
                        found: flips.len(),
                    });
                }
                for (a, b) in s.iter_mut().zip(flips) {
                    *a ^= *b;
                }
            }
            observed.push(s);
        }
        Ok(TrialSample {
            data_errors,
            syndrome_flips,
            observed_syndromes: observed,
        })
    }

    pub fn rounds(&self) -> usize {
        self.data_errors.len()
    }

    /// One line per round: Pauli string, a space, flip bits (empty for a
    /// readout round).
    pub fn to_debug_string(&self) -> String {
        let mut out = String::new();
        for (l, e) in self.data_errors.iter().enumerate() {
            let bits = self.syndrome_flips.get(l).map(|b| format_bits(b)).unwrap_or_default();
            out.push_str(&format!("{e} {bits}\n"));
        }
        out
    }

    pub fn from_debug_string(h: &QuaternaryCheckMatrix, text: &str) -> Result<Self> {
        let mut data = Vec::new();
        let mut flips = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let mut parts = line.split(' ');
            let e: PauliVector = parts
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::parse(k + 1, "invalid Pauli string"))?;
            let bits = parts.next().unwrap_or("");
            data.push(e);
            if !bits.is_empty() {
                if flips.len() != data.len() - 1 {
                    return Err(Error::parse(k + 1, "flip round after a readout round"));
                }
                flips.push(parse_bits(bits).map_err(|_| Error::parse(k + 1, "invalid bits"))?);
            }
        }
        TrialSample::from_errors(h, data, flips)
    }
}

/// Sample `noise.rounds` noisy rounds (plus a readout round if requested)
/// from the streams of `(seed, trial)`, starting at global round index
/// `first_round`.
pub fn sample_trial_at(
    h: &QuaternaryCheckMatrix,
    noise: &NoiseModel,
    readout: bool,
    seed: u64,
    trial: u64,
    first_round: u64,
) -> TrialSample {
    let r = noise.rounds;
    let data_rounds = if readout { r + 1 } else { r };
    let data = (0..data_rounds)
        .map(|l| {
            let mut rng = stream_rng(seed, trial, first_round + l as u64, SiteKind::Data as u64);
            sample_pauli(h.ncols(), noise.epsilon, &mut rng)
        })
        .collect();
    let flips = (0..r)
        .map(|l| {
            let mut rng = stream_rng(seed, trial, first_round + l as u64, SiteKind::Flip as u64);
            sample_bits(h.nrows(), noise.epsilon_b, &mut rng)
        })
        .collect();
    TrialSample::from_errors(h, data, flips).expect("sizes agree by construction")
}

pub fn sample_trial(
    code: &StabilizerCode,
    noise: &NoiseModel,
    readout: bool,
    seed: u64,
    trial: u64,
) -> TrialSample {
    sample_trial_at(code.h(), noise, readout, seed, trial, 0)
}

/// Concatenated observed syndromes with pairwise block sums, the input for
/// the multi-round matrices.
pub fn syndromes_for_decoding(sample: &TrialSample, m: usize) -> Result<Vec<bool>> {
    let mut flat = Vec::with_capacity(m * sample.rounds());
    for s in &sample.observed_syndromes {
        if s.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                found: s.len(),
            });
        }
        flat.extend_from_slice(s);
    }
    r_transform_syndrome(&flat, m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualClass {
    Success,
    LogicalFailure,
}

/// `Π_ℓ E^(ℓ) Ê^(ℓ)`.
pub fn residual(true_errors: &[PauliVector], estimate: &[PauliVector]) -> Result<PauliVector> {
    if true_errors.len() != estimate.len() {
        return Err(Error::LengthMismatch {
            expected: true_errors.len(),
            found: estimate.len(),
        });
    }
    let n = true_errors.first().map_or(0, PauliVector::len);
    let mut r = PauliVector::identity(n);
    for (e, f) in true_errors.iter().zip(estimate) {
        r.mul_assign(e)?;
        r.mul_assign(f)?;
    }
    Ok(r)
}

/// Success iff the residual lies in the stabilizer group.
pub fn classify_residual(
    code: &StabilizerCode,
    true_errors: &[PauliVector],
    estimate: &[PauliVector],
) -> Result<ResidualClass> {
    let r = residual(true_errors, estimate)?;
    if r.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            found: r.len(),
        });
    }
    Ok(if code.is_stabilizer(&r) {
        ResidualClass::Success
    } else {
        ResidualClass::LogicalFailure
    })
}

/// Number of mixed vectors with exactly `a` non-identity Pauli symbols and
/// `w − a` set bits, as `f64`.
fn split_count(n: usize, m: usize, w: usize, a: usize) -> f64 {
    if a > n || w < a || w - a > m {
        return 0.0;
    }
    binomial(n, a) * 3f64.powi(a as i32) * binomial(m, w - a)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of mixed vectors of combined weight exactly `w`.
pub fn weight_count(n: usize, m: usize, w: usize) -> f64 {
    (0..=w).map(|a| split_count(n, m, w, a)).sum()
}

fn pick_weighted<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            return k;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Uniform over mixed vectors in `{I,X,Y,Z}^n × {0,1}^m` of combined weight
/// exactly `w`.
pub fn sample_weight_exact<R: Rng>(n: usize, m: usize, w: usize, rng: &mut R) -> Result<MixedVector> {
    if w > n + m {
        return Err(Error::usage(format!("weight {w} exceeds length {}", n + m)));
    }
    let splits: Vec<f64> = (0..=w).map(|a| split_count(n, m, w, a)).collect();
    let a = pick_weighted(&splits, rng);
    let mut pauli = PauliVector::identity(n);
    for j in sample_indices(rng, n, a) {
        pauli.set(j, Pauli::NON_IDENTITY[rng.gen_range(0..3)]);
    }
    let mut bits = vec![false; m];
    for j in sample_indices(rng, m, w - a) {
        bits[j] = true;
    }
    Ok(MixedVector::new(pauli, bits))
}

/// Uniform over mixed vectors of combined weight at most `w_max`.
pub fn sample_weight_at_most<R: Rng>(
    n: usize,
    m: usize,
    w_max: usize,
    include_zero: bool,
    rng: &mut R,
) -> Result<MixedVector> {
    let lo = usize::from(!include_zero);
    if w_max < lo {
        return Err(Error::usage("empty weight range"));
    }
    let counts: Vec<f64> = (lo..=w_max).map(|w| weight_count(n, m, w)).collect();
    let w = lo + pick_weighted(&counts, rng);
    sample_weight_exact(n, m, w, rng)
}

/// Exact conditional LLRs given a syndrome, plus a most probable
/// syndrome-consistent candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPosterior {
    /// `ln(Pr(E_j = I | s) / Pr(E_j = W | s))` for `W = X, Y, Z`.
    pub quaternary: Vec<[f64; 3]>,
    /// `ln(Pr(e_j = 0 | s) / Pr(e_j = 1 | s))`.
    pub binary: Vec<f64>,
    pub map_candidate: MixedVector,
    /// `ln Pr(s)`.
    pub log_evidence: f64,
}

/// Limit on `2N + M` for exhaustive enumeration.
pub const ORACLE_MAX_BITS: usize = 24;

#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Exhaustive posterior over all `4^N · 2^M` candidates under the product
/// prior described by `prior`. Candidates are visited in binary-reflected
/// Gray-code order over their `(x, z, bit)` encoding so the syndrome updates
/// by one column per step.
pub fn exact_posterior(h: &GdsCheckMatrix, s: &[bool], prior: &LlrInit) -> Result<ExactPosterior> {
    let (n, m, mp) = (h.n_quaternary(), h.m_binary(), h.m_prime());
    if prior.n() != n || prior.m() != m {
        return Err(Error::dim("prior does not match the matrix"));
    }
    if s.len() != mp {
        return Err(Error::LengthMismatch {
            expected: mp,
            found: s.len(),
        });
    }
    let bits = 2 * n + m;
    if bits > ORACLE_MAX_BITS || mp > 64 {
        return Err(Error::TooLarge(format!(
            "4^{n} * 2^{m} candidates with {mp} checks exceeds the oracle limit"
        )));
    }

    // column effect of each encoding bit on the syndrome
    let mut col_mask = vec![0u64; bits];
    for (i, row) in h.rows().iter().enumerate() {
        for (c, p) in &row.quaternary {
            if p.z_bit() {
                col_mask[2 * c] |= 1 << i;
            }
            if p.x_bit() {
                col_mask[2 * c + 1] |= 1 << i;
            }
        }
        for c in &row.binary {
            col_mask[2 * n + c] |= 1 << i;
        }
    }
    let target = s
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, b)| acc | (u64::from(*b) << i));

    // log prior per variable per symbol (I, X, Y, Z) / (0, 1)
    let logp_q: Vec<[f64; 4]> = prior
        .quaternary
        .iter()
        .map(|l| {
            let norm = (1.0 + l.iter().map(|v| (-v).exp()).sum::<f64>()).ln();
            [-norm, -l[0] - norm, -l[1] - norm, -l[2] - norm]
        })
        .collect();
    let logp_b: Vec<[f64; 2]> = prior
        .binary
        .iter()
        .map(|l| {
            let norm = (-l).exp().ln_1p();
            [-norm, -l - norm]
        })
        .collect();
    let reference: f64 = logp_q
        .iter()
        .map(|p| p.iter().cloned().fold(f64::MIN, f64::max))
        .chain(logp_b.iter().map(|p| p[0].max(p[1])))
        .sum();

    let mut q_mass = vec![[Compensated::default(); 4]; n];
    let mut b_mass = vec![[Compensated::default(); 2]; m];
    let mut total = Compensated::default();
    let mut best: Option<(f64, u64)> = None;

    let mut visit = |state: u64| {
        let mut logp = 0.0;
        for (j, p) in logp_q.iter().enumerate() {
            logp += p[symbol_index(state, j)];
        }
        for (j, p) in logp_b.iter().enumerate() {
            logp += p[((state >> (2 * n + j)) & 1) as usize];
        }
        let w = (logp - reference).exp();
        total.add(w);
        for j in 0..n {
            q_mass[j][symbol_index(state, j)].add(w);
        }
        for j in 0..m {
            b_mass[j][((state >> (2 * n + j)) & 1) as usize].add(w);
        }
        if best.map_or(true, |(b, _)| logp > b) {
            best = Some((logp, state));
        }
    };

    let mut state = 0u64;
    let mut syn = 0u64;
    if syn == target {
        visit(state);
    }
    for k in 1u64..(1u64 << bits) {
        let bit = k.trailing_zeros() as usize;
        state ^= 1 << bit;
        syn ^= col_mask[bit];
        if syn == target {
            visit(state);
        }
    }

    let (_, best_state) =
        best.ok_or_else(|| Error::Infeasible("no candidate matches the syndrome".into()))?;
    let llr = |a: f64, b: f64| a.ln() - b.ln();
    let quaternary = q_mass
        .iter()
        .map(|c| {
            let i = c[0].value();
            [llr(i, c[1].value()), llr(i, c[2].value()), llr(i, c[3].value())]
        })
        .collect();
    let binary = b_mass
        .iter()
        .map(|c| llr(c[0].value(), c[1].value()))
        .collect();
    let symbols = (0..n)
        .map(|j| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][symbol_index(best_state, j)])
        .collect();
    let flips = (0..m).map(|j| (best_state >> (2 * n + j)) & 1 == 1).collect();
    Ok(ExactPosterior {
        quaternary,
        binary,
        map_candidate: MixedVector::new(PauliVector::from_symbols(symbols), flips),
        log_evidence: total.value().ln() + reference,
    })
}

/// Index into `[I, X, Y, Z]` of variable `j` in an encoded state.
#[inline]
fn symbol_index(state: u64, j: usize) -> usize {
    let x = (state >> (2 * j)) & 1;
    let z = (state >> (2 * j + 1)) & 1;
    match (x, z) {
        (0, 0) => 0,
        (1, 0) => 1,
        (1, 1) => 2,
        _ => 3,
    }
}

/// [`exact_posterior`] with the uniform prior of a noise model.
pub fn exact_posterior_oracle(h: &GdsCheckMatrix, s: &[bool], noise: &NoiseModel) -> Result<ExactPosterior> {
    let prior = init_from_rates(h.n_quaternary(), h.m_binary(), noise.epsilon.min(0.75 - 1e-12), noise.epsilon_b)?;
    exact_posterior(h, s, &prior)
}
