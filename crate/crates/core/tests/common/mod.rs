//! Shared test helpers: high-precision oracles and random instance builders.
#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use gdsbp::matrix::{GdsCheckMatrix, GdsRow};
use gdsbp::bp::Posteriors;
use gdsbp::noise::ExactPosterior;
use gdsbp::matrix::QuaternaryCheckMatrix;
use gdsbp::{LlrInit, MixedVector, Pauli, PauliVector};
use rand::Rng;

const P: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Hp {
    cc: Consts,
}

impl Hp {
    pub fn new() -> Self {
        Hp {
            cc: Consts::new().expect("constants"),
        }
    }

    fn big(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, P)
    }

    fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(P, RM, &mut self.cc)
    }

    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(P, RM, &mut self.cc)
    }

    fn to_f64(&self, x: &BigFloat) -> f64 {
        x.to_string().parse().expect("decimal rendering")
    }

    /// `ln(Pr(E*W = 0) / Pr(E*W = 1))` for the distribution with
    /// `Pr(I) ∝ 1`, `Pr(V) ∝ e^{−g_V}`.
    pub fn lambda(&mut self, w: Pauli, g: [f64; 3]) -> f64 {
        let one = self.big(1.0);
        let weights: Vec<BigFloat> = g.iter().map(|v| self.exp(&self.big(-v))).collect();
        let z = weights
            .iter()
            .fold(one.clone(), |acc, x| acc.add(x, P, RM));
        let prob: Vec<BigFloat> = weights.iter().map(|x| x.div(&z, P, RM)).collect();
        let p_i = one.div(&z, P, RM);
        let k = w.slot().unwrap();
        let mut commute = p_i.add(&prob[k], P, RM);
        let mut anti = self.big(0.0);
        for (v, p) in prob.iter().enumerate() {
            if v != k {
                anti = anti.add(p, P, RM);
            }
        }
        commute = commute.div(&anti, P, RM);
        let r = self.ln(&commute);
        self.to_f64(&r)
    }

    /// LLR of the parity of independent bits with LLRs `a`, computed from
    /// bit probabilities.
    pub fn parity_llr(&mut self, a: &[f64]) -> f64 {
        let one = self.big(1.0);
        let mut q = self.big(0.0);
        for x in a {
            let e = self.exp(&self.big(*x));
            let p = one.div(&one.add(&e, P, RM), P, RM);
            let not_q = one.sub(&q, P, RM);
            let not_p = one.sub(&p, P, RM);
            q = q.mul(&not_p, P, RM).add(&not_q.mul(&p, P, RM), P, RM);
        }
        let ratio = one.sub(&q, P, RM).div(&q, P, RM);
        let r = self.ln(&ratio);
        self.to_f64(&r)
    }

    /// `Σ_{j>t} C(n,j) ε^j (1−ε)^{n−j}` with `ε` taken exactly from its
    /// binary value.
    pub fn binomial_tail(&mut self, n: usize, t: usize, eps: f64) -> f64 {
        let one = self.big(1.0);
        let e = self.big(eps);
        let q = one.sub(&e, P, RM);
        let mut total = self.big(0.0);
        let mut binom = self.big(1.0);
        for j in 0..=n {
            if j > 0 {
                binom = binom.mul(&self.big((n - j + 1) as f64), P, RM).div(&self.big(j as f64), P, RM);
            }
            if j > t {
                let term = binom
                    .mul(&e.powi(j, P, RM), P, RM)
                    .mul(&q.powi(n - j, P, RM), P, RM);
                total = total.add(&term, P, RM);
            }
        }
        self.to_f64(&total)
    }
}

/// `|a − b| ≤ tol · max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

pub fn random_pauli<R: Rng>(rng: &mut R) -> Pauli {
    Pauli::NON_IDENTITY[rng.gen_range(0..3)]
}

pub fn random_prior<R: Rng>(n: usize, m: usize, lo: f64, hi: f64, rng: &mut R) -> LlrInit {
    LlrInit {
        quaternary: (0..n)
            .map(|_| [rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi)])
            .collect(),
        binary: (0..m).map(|_| rng.gen_range(lo..hi)).collect(),
    }
}

/// Rows of variable indices (`< n` quaternary, `≥ n` binary) into a GDS
/// matrix with random Pauli labels.
pub fn gds_from_supports<R: Rng>(n: usize, m: usize, supports: &[Vec<usize>], rng: &mut R) -> GdsCheckMatrix {
    let rows = supports
        .iter()
        .map(|vars| {
            let mut row = GdsRow {
                quaternary: Vec::new(),
                binary: Vec::new(),
            };
            for &v in vars {
                if v < n {
                    row.quaternary.push((v, random_pauli(rng)));
                } else {
                    row.binary.push(v - n);
                }
            }
            row
        })
        .collect();
    GdsCheckMatrix::new(n, m, rows).unwrap()
}

/// A random forest: each check joins at least two variables from distinct
/// components, so every marginal stays strictly inside (0, 1).
pub fn random_tree_supports<R: Rng>(vars: usize, checks: usize, max_deg: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut comp: Vec<usize> = (0..vars).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while c[r] != r {
            r = c[r];
        }
        c[x] = r;
        r
    }
    let mut out = Vec::new();
    for _ in 0..checks {
        let deg = rng.gen_range(2..=max_deg.max(2));
        let mut chosen: Vec<usize> = Vec::new();
        let mut roots: Vec<usize> = Vec::new();
        for _ in 0..8 * deg {
            if chosen.len() == deg {
                break;
            }
            let v = rng.gen_range(0..vars);
            let r = find(&mut comp, v);
            if !roots.contains(&r) {
                roots.push(r);
                chosen.push(v);
            }
        }
        if chosen.len() < 2 {
            continue;
        }
        for r in &roots[1..] {
            comp[*r] = roots[0];
        }
        chosen.sort_unstable();
        out.push(chosen);
    }
    out
}

/// Disjoint checks of two or more variables each, plus untouched variables:
/// the forests on which every variable is within one check of all others in
/// its component.
pub fn random_depth_one_supports<R: Rng>(vars: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..vars).collect();
    for k in (1..vars).rev() {
        order.swap(k, rng.gen_range(0..=k));
    }
    let mut out = Vec::new();
    let mut next = 0;
    while vars - next >= 2 {
        let size = rng.gen_range(2..=(vars - next).min(5));
        if rng.gen_bool(0.8) {
            let mut row = order[next..next + size].to_vec();
            row.sort_unstable();
            out.push(row);
        }
        next += size;
    }
    out
}

/// A random forest instance with `N + M ≤ 12`: matrix, prior and a reachable
/// syndrome.
pub fn forest_instance<R: Rng>(depth_one: bool, rng: &mut R) -> (GdsCheckMatrix, LlrInit, Vec<bool>) {
    let n = rng.gen_range(1..=7);
    let m = rng.gen_range(0..=5);
    let supports = if depth_one {
        random_depth_one_supports(n + m, rng)
    } else {
        let checks = rng.gen_range(1..=n + m);
        random_tree_supports(n + m, checks, 4, rng)
    };
    let h = gds_from_supports(n, m, &supports, rng);
    let prior = random_prior(n, m, -1.0, 5.0, rng);
    let s = h.syndrome(&random_mixed(n, m, rng)).unwrap();
    (h, prior, s)
}

/// Largest `|a − b| / max(1, |b|)` over all posterior entries; infinite when
/// the oracle value is not finite.
pub fn posterior_gap(a: &Posteriors, b: &ExactPosterior) -> f64 {
    let pairs = a
        .quaternary
        .iter()
        .zip(&b.quaternary)
        .flat_map(|(x, y)| x.iter().zip(y.iter()))
        .chain(a.binary.iter().zip(&b.binary));
    let mut worst: f64 = 0.0;
    for (x, y) in pairs {
        if !y.is_finite() || !x.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max((x - y).abs() / y.abs().max(1.0));
    }
    worst
}

/// Random `m × n` quaternary matrix (not necessarily commuting) with density
/// about one half.
pub fn random_quaternary<R: Rng>(m: usize, n: usize, rng: &mut R) -> QuaternaryCheckMatrix {
    let rows: Vec<PauliVector> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(0.5) { Pauli::I } else { random_pauli(rng) })
                .collect::<Vec<_>>()
                .into()
        })
        .collect();
    QuaternaryCheckMatrix::from_paulis(n, &rows).unwrap()
}

pub fn random_mixed<R: Rng>(n: usize, m: usize, rng: &mut R) -> MixedVector {
    MixedVector::new(
        (0..n).map(|_| Pauli::ALL[rng.gen_range(0..4)]).collect::<Vec<_>>().into(),
        (0..m).map(|_| rng.gen_bool(0.5)).collect(),
    )
}

/// Every mixed vector of length `(n, m)`, in a fixed order.
pub fn all_mixed(n: usize, m: usize) -> Vec<MixedVector> {
    let total = 4usize.pow(n as u32) << m;
    (0..total)
        .map(|mut code| {
            let bits = (0..m)
                .map(|_| {
                    let b = code & 1 == 1;
                    code >>= 1;
                    b
                })
                .collect();
            let paulis: Vec<Pauli> = (0..n)
                .map(|_| {
                    let p = Pauli::ALL[code & 3];
                    code >>= 2;
                    p
                })
                .collect();
            MixedVector::new(paulis.into(), bits)
        })
        .collect()
}
