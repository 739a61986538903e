//! Concrete stabilizer codes and quasi-cyclic redundancy matrices.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::{symplectic_rank, BinaryMatrix, BitVec, RowSpace, SymplecticMatrix};
use crate::matrix::{parse_chk, QuaternaryCheckMatrix};
use crate::noise::stream_rng;
use crate::pauli::{Pauli, PauliVector};
use crate::tanner::binary_girth;

/// Full 126-row check matrix of the [[126,28,8]] generalized bicycle code.
pub const GB126_FULL: &str = include_str!("../data/gb126_full.chk");
/// The same code truncated to its first 102 rows (rank still 98).
pub const GB126_M102: &str = include_str!("../data/gb126_m102.chk");

/// Circulant size and polynomial exponents of the [[126,28,8]] GB code.
pub const GB126_CIRCULANT: usize = 63;
pub const GB126_A: [usize; 5] = [0, 1, 14, 16, 22];
pub const GB126_B: [usize; 5] = [0, 3, 13, 20, 42];

/// Redundancy base matrix for the GB code single-shot construction
/// (`γ = 2`, `ρ = 6`, `c = 17`).
pub const GB126_QC_BASE: [[i64; 6]; 2] = [[5, 3, 13, 10, 0, 16], [9, 1, 10, 10, 6, 0]];
pub const GB126_QC_CIRCULANT: usize = 17;

#[derive(Clone, Debug)]
pub struct StabilizerCode {
    pub name: String,
    h: QuaternaryCheckMatrix,
    k: usize,
    d: Option<usize>,
    row_space: RowSpace,
    stabilizers: SymplecticMatrix,
}

impl StabilizerCode {
    /// Validate commutation and compute `k = n − rank`.
    pub fn new(name: impl Into<String>, h: QuaternaryCheckMatrix, d: Option<usize>) -> Result<Self> {
        h.validate_commuting()?;
        let stabilizers = h.to_symplectic();
        let row_space = stabilizers.row_space();
        let k = h.ncols() - row_space.rank();
        Ok(StabilizerCode {
            name: name.into(),
            h,
            k,
            d,
            row_space,
            stabilizers,
        })
    }

    pub fn h(&self) -> &QuaternaryCheckMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    pub fn m(&self) -> usize {
        self.h.nrows()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> Option<usize> {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.n() - self.k
    }

    pub fn stabilizers(&self) -> &SymplecticMatrix {
        &self.stabilizers
    }

    /// Whether `v` is (up to phase) an element of the stabilizer group.
    pub fn is_stabilizer(&self, v: &PauliVector) -> bool {
        v.len() == self.n() && self.row_space.contains(&v.to_symplectic())
    }
}

/// The `[[L², 2, L]]` rotated toric code for even `L ≥ 2`.
///
/// Qubit `(row, col)` of the `L × L` grid has index `row·L + col`. The
/// plaquette at `(row, col)` touches qubits `(row, col)`, `(row, col+1)`,
/// `(row+1, col)` and `(row+1, col+1)` with periodic wraparound, and is
/// X-type when `row + col` is even, Z-type otherwise.
pub fn rotated_toric(l: usize) -> Result<StabilizerCode> {
    if l < 2 || l % 2 != 0 {
        return Err(Error::usage(format!(
            "rotated toric code needs an even L >= 2, got {l}"
        )));
    }
    let q = |r: usize, c: usize| (r % l) * l + (c % l);
    let mut rows = Vec::with_capacity(l * l);
    for r in 0..l {
        for c in 0..l {
            let sym = if (r + c) % 2 == 0 { Pauli::X } else { Pauli::Z };
            let mut cols = vec![q(r, c), q(r, c + 1), q(r + 1, c), q(r + 1, c + 1)];
            cols.sort_unstable();
            cols.dedup();
            // for L=2 the four corners are distinct; larger L never collides
            debug_assert_eq!(cols.len(), 4);
            rows.push(cols.into_iter().map(|j| (j, sym)).collect());
        }
    }
    let h = QuaternaryCheckMatrix::new(l * l, rows)?;
    StabilizerCode::new(format!("toric{l}"), h, Some(l))
}

/// Generalized bicycle code from two circulants `a(x)`, `b(x)` of size `ℓ`:
/// X-checks `[A | B]`, Z-checks `[Bᵀ | Aᵀ]`. Rows are interleaved
/// `X₀, Z₀, X₁, Z₁, …` so that any prefix mixes both types.
pub fn generalized_bicycle(l: usize, a: &[usize], b: &[usize]) -> Result<QuaternaryCheckMatrix> {
    let mut rows = Vec::with_capacity(2 * l);
    for i in 0..l {
        // row i of A: ones at (i + e) mod l
        let mut x: Vec<(usize, Pauli)> = a
            .iter()
            .map(|e| ((i + e) % l, Pauli::X))
            .chain(b.iter().map(|e| (l + (i + e) % l, Pauli::X)))
            .collect();
        // row i of Bᵀ: ones at (i − e) mod l
        let mut z: Vec<(usize, Pauli)> = b
            .iter()
            .map(|e| ((i + l - e % l) % l, Pauli::Z))
            .chain(a.iter().map(|e| (l + (i + l - e % l) % l, Pauli::Z)))
            .collect();
        x.sort_unstable();
        z.sort_unstable();
        rows.push(x);
        rows.push(z);
    }
    QuaternaryCheckMatrix::new(2 * l, rows)
}

/// Load a code from `CHK` text. `# k = …` and `# d = …` comments are treated
/// as declared parameters; a declared `k` that disagrees with the rank is an
/// error.
pub fn code_from_chk(name: &str, text: &str) -> Result<StabilizerCode> {
    let file = parse_chk(text, true)?;
    let declared_k = file
        .metadata("k")
        .map(|v| v.parse::<usize>())
        .transpose()
        .map_err(|_| Error::parse(0, "invalid `k` metadata"))?;
    let d = file
        .metadata("d")
        .map(|v| v.parse::<usize>())
        .transpose()
        .map_err(|_| Error::parse(0, "invalid `d` metadata"))?;
    let code = StabilizerCode::new(name, file.matrix, d)?;
    if let Some(k) = declared_k {
        if k != code.k() {
            return Err(Error::RankMismatch {
                expected: code.n().saturating_sub(k),
                found: code.rank(),
            });
        }
    }
    Ok(code)
}

/// Load a GB (or any) code from a `CHK` file.
pub fn load_gb_code(path: &Path) -> Result<StabilizerCode> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "code".into());
    code_from_chk(&name, &text)
}

/// The shipped [[126,28,8]] GB code, either all 126 rows or the first 102.
pub fn gb126(truncated: bool) -> StabilizerCode {
    let (name, text) = if truncated {
        ("gb126m102", GB126_M102)
    } else {
        ("gb126", GB126_FULL)
    };
    code_from_chk(name, text).expect("shipped fixture is valid")
}

/// Base matrix of a quasi-cyclic binary matrix. Entry `p ≥ 0` is the
/// `c × c` identity right-shifted by `p`; `−1` is the zero block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiCyclicSpec {
    pub c: usize,
    pub base: Vec<Vec<i64>>,
}

impl QuasiCyclicSpec {
    pub fn new(c: usize, base: Vec<Vec<i64>>) -> Result<Self> {
        let spec = QuasiCyclicSpec { c, base };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gamma(&self) -> usize {
        self.base.len()
    }

    pub fn rho(&self) -> usize {
        self.base.first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(Error::usage("circulant size must be positive"));
        }
        let rho = self.rho();
        for (i, row) in self.base.iter().enumerate() {
            if row.len() != rho {
                return Err(Error::dim(format!("base row {i} has {} entries, expected {rho}", row.len())));
            }
            if let Some(p) = row.iter().find(|p| **p < -1 || **p >= self.c as i64) {
                return Err(Error::usage(format!(
                    "base entry {p} outside [-1, {}]",
                    self.c - 1
                )));
            }
        }
        Ok(())
    }

    pub fn gb126_case1() -> Self {
        QuasiCyclicSpec::new(
            GB126_QC_CIRCULANT,
            GB126_QC_BASE.iter().map(|r| r.to_vec()).collect(),
        )
        .expect("valid base")
    }
}

impl fmt::Display for QuasiCyclicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QC {} {} {}", self.gamma(), self.rho(), self.c)?;
        for row in &self.base {
            let cells: Vec<String> = row.iter().map(i64::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for QuasiCyclicSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(0, "missing QC header"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "QC" {
            return Err(Error::parse(hl, "expected header `QC gamma rho c`"));
        }
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(hl, format!("invalid integer {t:?}")))
        };
        let (gamma, rho, c) = (num(parts[1])?, num(parts[2])?, num(parts[3])?);
        let mut base = Vec::with_capacity(gamma);
        for _ in 0..gamma {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(hl, "missing base rows"))?;
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<i64>()
                        .map_err(|_| Error::parse(ln, format!("invalid entry {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != rho {
                return Err(Error::parse(ln, format!("expected {rho} entries")));
            }
            base.push(row);
        }
        QuasiCyclicSpec::new(c, base)
    }
}

/// Expand a base matrix into the `cγ × cρ` binary matrix.
pub fn quasi_cyclic(spec: &QuasiCyclicSpec) -> Result<BinaryMatrix> {
    spec.validate()?;
    let c = spec.c;
    let mut m = BinaryMatrix::zeros(c * spec.gamma(), c * spec.rho());
    for (bi, row) in spec.base.iter().enumerate() {
        for (bj, p) in row.iter().enumerate() {
            if *p < 0 {
                continue;
            }
            for r in 0..c {
                m.set(bi * c + r, bj * c + (r + *p as usize) % c, true);
            }
        }
    }
    Ok(m)
}

/// `[A | I]` for a binary `A`.
pub fn with_identity(a: &BinaryMatrix) -> BinaryMatrix {
    let (rows, cols) = (a.nrows(), a.ncols());
    let out = (0..rows)
        .map(|i| {
            BitVec::from_indices(cols + rows, a.row(i).ones().chain(std::iter::once(cols + i)))
        })
        .collect();
    BinaryMatrix::from_rows(out, cols + rows).expect("consistent widths")
}

/// Parameters of a random quasi-cyclic search.
#[derive(Clone, Debug)]
pub struct QcSearch {
    pub gamma: usize,
    pub rho: usize,
    pub c: usize,
    pub girth_target: usize,
    pub attempts: usize,
    pub seed: u64,
    /// Allow `−1` (zero block) entries.
    pub allow_zero_blocks: bool,
}

/// Draw base matrices at random until `[A | I]` reaches the girth target.
/// Attempt `t` uses its own RNG stream keyed by `(seed, t)`, so the result
/// depends only on the seed and budget. `Ok(None)` means the budget ran out.
pub fn random_qc_search(search: &QcSearch) -> Result<Option<QuasiCyclicSpec>> {
    if search.attempts == 0 {
        return Err(Error::usage("attempt budget must be at least 1"));
    }
    if search.c == 0 || search.gamma == 0 || search.rho == 0 {
        return Err(Error::usage("gamma, rho and c must be positive"));
    }
    let lo = if search.allow_zero_blocks { -1 } else { 0 };
    for attempt in 0..search.attempts {
        let mut rng = stream_rng(search.seed, attempt as u64, 0, 0);
        let base: Vec<Vec<i64>> = (0..search.gamma)
            .map(|_| {
                (0..search.rho)
                    .map(|_| rng.gen_range(lo..search.c as i64))
                    .collect()
            })
            .collect();
        let spec = QuasiCyclicSpec::new(search.c, base)?;
        let a = quasi_cyclic(&spec)?;
        let girth = binary_girth(&with_identity(&a)).unwrap_or(usize::MAX);
        if girth >= search.girth_target {
            return Ok(Some(spec));
        }
    }
    Ok(None)
}

/// GF(2) rank of a code's check matrix.
pub fn check_rank(h: &QuaternaryCheckMatrix) -> usize {
    symplectic_rank(&h.to_symplectic())
}
