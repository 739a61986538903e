//! Mixed-alphabet check matrices.
//!
//! A [`GdsCheckMatrix`] has `N` quaternary columns (Pauli symbols) followed by
//! `M` binary columns (syndrome-bit flips). The constructors here build the
//! single-round DS matrix `[H | I]`, the multi-round matrices with a
//! bidiagonal identity block (with and without a perfect readout round),
//! their per-round generalization, and the single-shot measurement/decoding
//! pair.
//!
//! Text formats (column indices are 0-based):
//!
//! ```text
//! CHK m n
//! 0:X 1:Y
//! 0:Z 1:Z 2:Y
//! ```
//!
//! ```text
//! GDS N M MPRIME
//! 0:X 1:Y b0
//! 0:Z 1:Z 2:Y b1
//! ```
//!
//! Lines starting with `#` before the header are comments.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVec, RowSpace, SymplecticMatrix};
use crate::pauli::{MixedVector, Pauli, PauliVector};

pub type SparsePauliRow = Vec<(usize, Pauli)>;

/// An `m × n` check matrix over `{I, X, Y, Z}`, stored sparse by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuaternaryCheckMatrix {
    n: usize,
    rows: Vec<SparsePauliRow>,
}

impl QuaternaryCheckMatrix {
    /// Build from sparse rows. Entries are sorted; identity entries are
    /// rejected, as are duplicate or out-of-range columns.
    pub fn new(n: usize, rows: Vec<SparsePauliRow>) -> Result<Self> {
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|(c, _)| *c);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::dim(format!("row {i}: duplicate column {}", w[0].0)));
                }
            }
            for (c, p) in row.iter() {
                if *c >= n {
                    return Err(Error::dim(format!("row {i}: column {c} out of range {n}")));
                }
                if p.is_identity() {
                    return Err(Error::dim(format!("row {i}: stored identity at column {c}")));
                }
            }
        }
        Ok(QuaternaryCheckMatrix { n, rows })
    }

    pub fn from_paulis(n: usize, rows: &[PauliVector]) -> Result<Self> {
        let sparse = rows
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        found: r.len(),
                    });
                }
                Ok(sparse_of(r))
            })
            .collect::<Result<Vec<_>>>()?;
        QuaternaryCheckMatrix::new(n, sparse)
    }

    /// Parse rows written as Pauli strings, e.g. `["XYI", "ZZY"]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let paulis = rows
            .iter()
            .map(|s| s.parse::<PauliVector>())
            .collect::<Result<Vec<_>>>()?;
        let n = paulis.first().map_or(0, PauliVector::len);
        QuaternaryCheckMatrix::from_paulis(n, &paulis)
    }

    pub fn empty(n: usize) -> Self {
        QuaternaryCheckMatrix { n, rows: Vec::new() }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[SparsePauliRow] {
        &self.rows
    }

    pub fn row_pauli(&self, i: usize) -> PauliVector {
        let mut v = PauliVector::identity(self.n);
        for (c, p) in &self.rows[i] {
            v.set(*c, *p);
        }
        v
    }

    pub fn to_paulis(&self) -> Vec<PauliVector> {
        (0..self.nrows()).map(|i| self.row_pauli(i)).collect()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    /// Keep the first `m` rows.
    pub fn truncated(&self, m: usize) -> Self {
        QuaternaryCheckMatrix {
            n: self.n,
            rows: self.rows[..m.min(self.rows.len())].to_vec(),
        }
    }

    pub fn to_symplectic(&self) -> SymplecticMatrix {
        SymplecticMatrix::from_paulis(self.n, &self.to_paulis()).expect("consistent widths")
    }

    /// Check that every pair of rows commutes.
    pub fn validate_commuting(&self) -> Result<()> {
        let sym: Vec<BitVec> = self.to_paulis().iter().map(|p| p.to_symplectic()).collect();
        let n = self.n;
        // swap halves so that a plain dot product gives the symplectic form
        let swapped: Vec<BitVec> = sym
            .iter()
            .map(|v| BitVec::from_indices(2 * n, v.ones().map(|k| (k + n) % (2 * n))))
            .collect();
        for i in 0..sym.len() {
            for j in (i + 1)..sym.len() {
                if sym[i].dot(&swapped[j]) {
                    return Err(Error::NonCommuting(i, j));
                }
            }
        }
        Ok(())
    }

    /// `E * H`: one syndrome bit per row.
    pub fn syndrome(&self, e: &PauliVector) -> Result<Vec<bool>> {
        if e.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: e.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(false, |acc, (c, p)| acc ^ e.get(*c).anticommutes(*p))
            })
            .collect())
    }

    /// Phase-free product of the rows selected by `coeffs`.
    pub fn combine_rows(&self, coeffs: &BitVec) -> Result<PauliVector> {
        if coeffs.len() != self.nrows() {
            return Err(Error::LengthMismatch {
                expected: self.nrows(),
                found: coeffs.len(),
            });
        }
        let mut acc = PauliVector::identity(self.n);
        for i in coeffs.ones() {
            for (c, p) in &self.rows[i] {
                acc.set(*c, acc.get(*c).mul(*p));
            }
        }
        Ok(acc)
    }

    pub fn to_chk_string(&self) -> String {
        let mut out = format!("CHK {} {}\n", self.nrows(), self.n);
        for row in &self.rows {
            out.push_str(&format_pauli_tokens(row));
            out.push('\n');
        }
        out
    }
}

fn sparse_of(v: &PauliVector) -> SparsePauliRow {
    v.symbols()
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_identity())
        .map(|(c, p)| (c, *p))
        .collect()
}

fn format_pauli_tokens(row: &[(usize, Pauli)]) -> String {
    let mut s = String::new();
    for (k, (c, p)) in row.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        write!(s, "{c}:{p}").unwrap();
    }
    s
}

/// One row of a mixed-alphabet check matrix.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GdsRow {
    pub quaternary: SparsePauliRow,
    pub binary: Vec<usize>,
}

/// An `M′ × (N + M)` check matrix: `N` quaternary columns followed by `M`
/// binary columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GdsCheckMatrix {
    n: usize,
    m: usize,
    rows: Vec<GdsRow>,
}

impl GdsCheckMatrix {
    pub fn new(n: usize, m: usize, rows: Vec<GdsRow>) -> Result<Self> {
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            row.quaternary.sort_by_key(|(c, _)| *c);
            row.binary.sort_unstable();
            for w in row.quaternary.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::dim(format!("row {i}: duplicate column {}", w[0].0)));
                }
            }
            for w in row.binary.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::dim(format!("row {i}: duplicate binary column {}", w[0])));
                }
            }
            if let Some((c, _)) = row.quaternary.iter().find(|(c, p)| *c >= n || p.is_identity()) {
                return Err(Error::dim(format!("row {i}: invalid quaternary entry at {c}")));
            }
            if let Some(c) = row.binary.iter().find(|c| **c >= m) {
                return Err(Error::dim(format!("row {i}: binary column {c} out of range {m}")));
            }
        }
        Ok(GdsCheckMatrix { n, m, rows })
    }

    /// Assemble from a quaternary block and a binary block with equal row
    /// counts.
    pub fn from_blocks(h: &QuaternaryCheckMatrix, b: &BinaryMatrix) -> Result<Self> {
        if h.nrows() != b.nrows() {
            return Err(Error::dim(format!(
                "quaternary block has {} rows, binary block {}",
                h.nrows(),
                b.nrows()
            )));
        }
        let rows = h
            .rows()
            .iter()
            .zip(b.rows())
            .map(|(q, bits)| GdsRow {
                quaternary: q.clone(),
                binary: bits.ones().collect(),
            })
            .collect();
        GdsCheckMatrix::new(h.ncols(), b.ncols(), rows)
    }

    /// Number of quaternary columns `N`.
    pub fn n_quaternary(&self) -> usize {
        self.n
    }

    /// Number of binary columns `M`.
    pub fn m_binary(&self) -> usize {
        self.m
    }

    /// Number of rows `M′`.
    pub fn m_prime(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[GdsRow] {
        &self.rows
    }

    pub fn num_edges(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.quaternary.len() + r.binary.len())
            .sum()
    }

    pub fn quaternary_block(&self) -> QuaternaryCheckMatrix {
        QuaternaryCheckMatrix {
            n: self.n,
            rows: self.rows.iter().map(|r| r.quaternary.clone()).collect(),
        }
    }

    pub fn binary_block(&self) -> BinaryMatrix {
        let rows = self
            .rows
            .iter()
            .map(|r| BitVec::from_indices(self.m, r.binary.iter().copied()))
            .collect();
        BinaryMatrix::from_rows(rows, self.m).expect("consistent widths")
    }

    /// `(E, e) * H̃`.
    pub fn syndrome(&self, v: &MixedVector) -> Result<Vec<bool>> {
        if v.pauli.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: v.pauli.len(),
            });
        }
        if v.bits.len() != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                found: v.bits.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let q = row
                    .quaternary
                    .iter()
                    .fold(false, |acc, (c, p)| acc ^ v.pauli.get(*c).anticommutes(*p));
                row.binary.iter().fold(q, |acc, c| acc ^ v.bits[*c])
            })
            .collect())
    }

    /// Row `i` as a mixed vector.
    pub fn row_mixed(&self, i: usize) -> MixedVector {
        let mut v = MixedVector::zero(self.n, self.m);
        for (c, p) in &self.rows[i].quaternary {
            v.pauli.set(*c, *p);
        }
        for c in &self.rows[i].binary {
            v.bits[*c] = true;
        }
        v
    }

    pub fn to_gds_string(&self) -> String {
        let mut out = format!("GDS {} {} {}\n", self.n, self.m, self.m_prime());
        for row in &self.rows {
            let mut line = format_pauli_tokens(&row.quaternary);
            for c in &row.binary {
                if !line.is_empty() {
                    line.push(' ');
                }
                write!(line, "b{c}").unwrap();
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Parsed `CHK` text: the matrix plus any `#` comment lines preceding it.
#[derive(Clone, Debug)]
pub struct ChkFile {
    pub matrix: QuaternaryCheckMatrix,
    pub comments: Vec<String>,
}

impl ChkFile {
    /// Look up a `# key = value` comment.
    pub fn metadata(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }
}

/// Parse a `CHK` file; commutation of rows is checked when `validate` is set.
pub fn parse_chk(text: &str, validate: bool) -> Result<ChkFile> {
    let (comments, header_line, header, body) = split_header(text)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "CHK" {
        return Err(Error::parse(header_line, "expected header `CHK m n`"));
    }
    let m = parse_usize(parts[1], header_line)?;
    let n = parse_usize(parts[2], header_line)?;
    if body.len() < m {
        return Err(Error::parse(
            header_line,
            format!("expected {m} rows, found {}", body.len()),
        ));
    }
    let mut rows = Vec::with_capacity(m);
    for (line_no, line) in body.iter().take(m) {
        let mut row = Vec::new();
        for tok in line.split_whitespace() {
            if tok.starts_with('b') {
                return Err(Error::parse(*line_no, "binary entry in CHK file"));
            }
            row.push(parse_pauli_token(tok, *line_no)?);
        }
        rows.push(row);
    }
    if body[m..].iter().any(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::parse(header_line, "trailing rows after declared count"));
    }
    let matrix = QuaternaryCheckMatrix::new(n, rows)?;
    if validate {
        matrix.validate_commuting()?;
    }
    Ok(ChkFile { matrix, comments })
}

pub fn parse_gds(text: &str) -> Result<GdsCheckMatrix> {
    let (_, header_line, header, body) = split_header(text)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "GDS" {
        return Err(Error::parse(header_line, "expected header `GDS N M MPRIME`"));
    }
    let n = parse_usize(parts[1], header_line)?;
    let m = parse_usize(parts[2], header_line)?;
    let mp = parse_usize(parts[3], header_line)?;
    if body.len() < mp {
        return Err(Error::parse(
            header_line,
            format!("expected {mp} rows, found {}", body.len()),
        ));
    }
    let mut rows = Vec::with_capacity(mp);
    for (line_no, line) in body.iter().take(mp) {
        let mut row = GdsRow::default();
        for tok in line.split_whitespace() {
            if let Some(rest) = tok.strip_prefix('b') {
                row.binary.push(parse_usize(rest, *line_no)?);
            } else {
                if !row.binary.is_empty() {
                    return Err(Error::parse(*line_no, "quaternary entry after binary entries"));
                }
                row.quaternary.push(parse_pauli_token(tok, *line_no)?);
            }
        }
        rows.push(row);
    }
    if body[mp..].iter().any(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::parse(header_line, "trailing rows after declared count"));
    }
    GdsCheckMatrix::new(n, m, rows)
}

type Header<'a> = (Vec<String>, usize, &'a str, Vec<(usize, &'a str)>);

fn split_header(text: &str) -> Result<Header<'_>> {
    let mut comments = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    loop {
        match lines.next() {
            None => return Err(Error::parse(0, "missing header")),
            Some((_, l)) if l.trim_start().starts_with('#') => {
                comments.push(l.trim_start()[1..].trim().to_string());
            }
            Some((_, l)) if l.trim().is_empty() => {}
            Some((no, l)) => return Ok((comments, no, l, lines.collect())),
        }
    }
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid integer {s:?}")))
}

fn parse_pauli_token(tok: &str, line: usize) -> Result<(usize, Pauli)> {
    let (c, p) = tok
        .split_once(':')
        .ok_or_else(|| Error::parse(line, format!("invalid token {tok:?}")))?;
    let mut chars = p.chars();
    let sym = match (chars.next().and_then(Pauli::from_char), chars.next()) {
        (Some(s), None) if !s.is_identity() => s,
        _ => return Err(Error::parse(line, format!("invalid symbol in {tok:?}"))),
    };
    Ok((parse_usize(c, line)?, sym))
}

/// `[H | I_m]`.
pub fn ds_matrix(h: &QuaternaryCheckMatrix) -> GdsCheckMatrix {
    gds_repeated(h, 1).expect("one round is valid")
}

fn block_diag_rows(h: &QuaternaryCheckMatrix, blocks: usize) -> Vec<SparsePauliRow> {
    let n = h.ncols();
    let mut out = Vec::with_capacity(blocks * h.nrows());
    for b in 0..blocks {
        for row in h.rows() {
            out.push(row.iter().map(|(c, p)| (b * n + c, *p)).collect());
        }
    }
    out
}

/// Multi-round matrix with block-diagonal `H` beside the bidiagonal
/// `[I; I I; ⋱]` binary block. `N = rn`, `M = M′ = rm`.
pub fn gds_repeated(h: &QuaternaryCheckMatrix, r: usize) -> Result<GdsCheckMatrix> {
    if r == 0 {
        return Err(Error::usage("number of rounds must be at least 1"));
    }
    let m = h.nrows();
    let rows = block_diag_rows(h, r)
        .into_iter()
        .enumerate()
        .map(|(k, quaternary)| {
            let (l, i) = (k / m, k % m);
            let binary = if l == 0 {
                vec![i]
            } else {
                vec![(l - 1) * m + i, l * m + i]
            };
            GdsRow { quaternary, binary }
        })
        .collect();
    GdsCheckMatrix::new(r * h.ncols(), r * m, rows)
}

/// Multi-round matrix followed by one perfect readout round:
/// `N = (r+1)n`, `M = rm`, `M′ = (r+1)m`. The last block row carries only
/// the `I_m` block on the flips of round `r`.
pub fn gds_with_readout(h: &QuaternaryCheckMatrix, r: usize) -> Result<GdsCheckMatrix> {
    if r == 0 {
        return Err(Error::usage("number of rounds must be at least 1"));
    }
    let m = h.nrows();
    let rows = block_diag_rows(h, r + 1)
        .into_iter()
        .enumerate()
        .map(|(k, quaternary)| {
            let (l, i) = (k / m, k % m);
            let binary = if l == 0 {
                vec![i]
            } else if l < r {
                vec![(l - 1) * m + i, l * m + i]
            } else {
                vec![(r - 1) * m + i]
            };
            GdsRow { quaternary, binary }
        })
        .collect();
    GdsCheckMatrix::new((r + 1) * h.ncols(), r * m, rows)
}

/// The dense multi-round matrix whose syndrome is the raw per-round syndrome
/// sequence: block row `ℓ` holds `H` in block columns `1..=ℓ` and `I_m` on the
/// flips of round `ℓ`.
pub fn gds_accumulated(h: &QuaternaryCheckMatrix, r: usize) -> Result<GdsCheckMatrix> {
    if r == 0 {
        return Err(Error::usage("number of rounds must be at least 1"));
    }
    let (m, n) = (h.nrows(), h.ncols());
    let mut rows = Vec::with_capacity(r * m);
    for l in 0..r {
        for (i, row) in h.rows().iter().enumerate() {
            let quaternary = (0..=l)
                .flat_map(|b| row.iter().map(move |(c, p)| (b * n + c, *p)))
                .collect();
            rows.push(GdsRow {
                quaternary,
                binary: vec![l * m + i],
            });
        }
    }
    GdsCheckMatrix::new(r * n, r * m, rows)
}

/// Pairwise block sums: `(s¹, s¹+s², …, s^{r−1}+s^r)` for blocks of size `m`.
pub fn r_transform_syndrome(s: &[bool], m: usize) -> Result<Vec<bool>> {
    check_blocks(s.len(), m)?;
    Ok((0..s.len())
        .map(|k| if k < m { s[k] } else { s[k] ^ s[k - m] })
        .collect())
}

/// Inverse of [`r_transform_syndrome`]: block-wise prefix sums.
pub fn r_inverse_syndrome(s: &[bool], m: usize) -> Result<Vec<bool>> {
    check_blocks(s.len(), m)?;
    let mut out = s.to_vec();
    for k in m..out.len() {
        out[k] ^= out[k - m];
    }
    Ok(out)
}

fn check_blocks(len: usize, m: usize) -> Result<()> {
    if m == 0 {
        return if len == 0 {
            Ok(())
        } else {
            Err(Error::usage("block size 0 with nonempty syndrome"))
        };
    }
    if len % m != 0 {
        return Err(Error::usage(format!(
            "syndrome length {len} is not a multiple of block size {m}"
        )));
    }
    Ok(())
}

/// Multi-round matrix for per-round check matrices `H^(ℓ)`: block-diagonal
/// `H^(ℓ)` beside a binary block with `I` on the diagonal and `A^(ℓ)`
/// (`m_ℓ × m_{ℓ−1}`) on the subdiagonal. `A^(ℓ)` is used as given.
pub fn gds_per_round(
    h_seq: &[QuaternaryCheckMatrix],
    a_seq: &[BinaryMatrix],
) -> Result<GdsCheckMatrix> {
    if h_seq.is_empty() {
        return Err(Error::usage("need at least one round"));
    }
    if a_seq.len() + 1 != h_seq.len() {
        return Err(Error::dim(format!(
            "{} rounds need {} transition matrices, got {}",
            h_seq.len(),
            h_seq.len() - 1,
            a_seq.len()
        )));
    }
    let n = h_seq[0].ncols();
    if let Some(h) = h_seq.iter().find(|h| h.ncols() != n) {
        return Err(Error::dim(format!("round matrices have {} and {} columns", n, h.ncols())));
    }
    let mut offsets = Vec::with_capacity(h_seq.len());
    let mut total = 0;
    for h in h_seq {
        offsets.push(total);
        total += h.nrows();
    }
    for (k, a) in a_seq.iter().enumerate() {
        let (rows, cols) = (h_seq[k + 1].nrows(), h_seq[k].nrows());
        if a.nrows() != rows || a.ncols() != cols {
            return Err(Error::dim(format!(
                "A^({}) is {}x{}, expected {}x{}",
                k + 2,
                a.nrows(),
                a.ncols(),
                rows,
                cols
            )));
        }
    }
    let mut rows = Vec::with_capacity(total);
    for (l, h) in h_seq.iter().enumerate() {
        for (i, row) in h.rows().iter().enumerate() {
            let quaternary = row.iter().map(|(c, p)| (l * n + c, *p)).collect();
            let mut binary = Vec::new();
            if l > 0 {
                binary.extend(a_seq[l - 1].row(i).ones().map(|c| offsets[l - 1] + c));
            }
            binary.push(offsets[l] + i);
            rows.push(GdsRow { quaternary, binary });
        }
    }
    GdsCheckMatrix::new(h_seq.len() * n, total, rows)
}

/// Syndrome transform matching [`gds_per_round`]:
/// `s′^(ℓ) = s^(ℓ) + A^(ℓ) s^(ℓ−1)`.
pub fn per_round_transform_syndrome(
    blocks: &[Vec<bool>],
    a_seq: &[BinaryMatrix],
) -> Result<Vec<bool>> {
    if a_seq.len() + 1 != blocks.len() {
        return Err(Error::dim("need one transition matrix per round after the first"));
    }
    let mut out = blocks[0].clone();
    for (l, a) in a_seq.iter().enumerate() {
        let prev = BitVec::from_bools(&blocks[l]);
        let shift = a.mul_vec(&prev)?;
        if shift.len() != blocks[l + 1].len() {
            return Err(Error::LengthMismatch {
                expected: shift.len(),
                found: blocks[l + 1].len(),
            });
        }
        out.extend(blocks[l + 1].iter().enumerate().map(|(i, b)| b ^ shift.get(i)));
    }
    Ok(out)
}

/// Solve `H_next = A · H_prev` for a binary `A` by Gaussian elimination on the
/// symplectic rows of `H_prev`. Returns `None` when some row of `H_next` is
/// not in the row space of `H_prev`.
pub fn transition_matrix(
    h_prev: &QuaternaryCheckMatrix,
    h_next: &QuaternaryCheckMatrix,
) -> Result<Option<BinaryMatrix>> {
    if h_prev.ncols() != h_next.ncols() {
        return Err(Error::dim("round matrices differ in column count"));
    }
    let space = RowSpace::new(
        h_prev.to_paulis().iter().map(PauliVector::to_symplectic).collect(),
        2 * h_prev.ncols(),
    );
    let mut rows = Vec::with_capacity(h_next.nrows());
    for p in h_next.to_paulis() {
        match space.express(&p.to_symplectic()) {
            Some(c) => rows.push(c),
            None => return Ok(None),
        }
    }
    Ok(Some(BinaryMatrix::from_rows(rows, h_prev.nrows())?))
}

/// The single-shot pair built from `H` and a redundancy matrix `A`
/// (`ℓ × m`).
#[derive(Clone, Debug)]
pub struct SingleShotMatrices {
    /// `[H I_m 0; AH 0 I_ℓ]`: the stabilizers actually measured.
    pub measurement: GdsCheckMatrix,
    /// `[H I_m 0; 0 A I_ℓ]`: the matrix handed to the decoder.
    pub decoding: GdsCheckMatrix,
    /// Maps a measured syndrome to a decoding syndrome.
    pub row_ops: BinaryMatrix,
}

impl SingleShotMatrices {
    pub fn transform_syndrome(&self, measured: &[bool]) -> Result<Vec<bool>> {
        Ok(self
            .row_ops
            .mul_vec(&BitVec::from_bools(measured))?
            .to_bools())
    }
}

pub fn single_shot_matrix(
    h: &QuaternaryCheckMatrix,
    a: &BinaryMatrix,
) -> Result<SingleShotMatrices> {
    let (m, l, n) = (h.nrows(), a.nrows(), h.ncols());
    if l > 0 && a.ncols() != m {
        return Err(Error::dim(format!(
            "A has {} columns but H has {} rows",
            a.ncols(),
            m
        )));
    }
    let mut meas_rows = Vec::with_capacity(m + l);
    let mut dec_rows = Vec::with_capacity(m + l);
    for (i, row) in h.rows().iter().enumerate() {
        let r = GdsRow {
            quaternary: row.clone(),
            binary: vec![i],
        };
        meas_rows.push(r.clone());
        dec_rows.push(r);
    }
    for k in 0..l {
        let combined = h.combine_rows(a.row(k))?;
        meas_rows.push(GdsRow {
            quaternary: sparse_of(&combined),
            binary: vec![m + k],
        });
        let mut binary: Vec<usize> = a.row(k).ones().collect();
        binary.push(m + k);
        dec_rows.push(GdsRow {
            quaternary: Vec::new(),
            binary,
        });
    }
    let measurement = GdsCheckMatrix::new(n, m + l, meas_rows)?;
    let decoding = GdsCheckMatrix::new(n, m + l, dec_rows)?;

    // Row k of the redundant block minus the H rows selected by A row k
    // eliminates its quaternary part; record that elimination.
    let mut row_ops = BinaryMatrix::identity(m + l);
    for k in 0..l {
        for i in a.row(k).ones() {
            row_ops.set(m + k, i, true);
        }
    }
    debug_assert_eq!(
        apply_row_ops(&row_ops, &measurement).as_ref().ok(),
        Some(&decoding)
    );
    Ok(SingleShotMatrices {
        measurement,
        decoding,
        row_ops,
    })
}

/// `R · H̃` for a binary row-operation matrix `R`.
pub fn apply_row_ops(r: &BinaryMatrix, h: &GdsCheckMatrix) -> Result<GdsCheckMatrix> {
    if r.ncols() != h.m_prime() {
        return Err(Error::dim("row-operation width differs from row count"));
    }
    let q = h.quaternary_block();
    let b = h.binary_block();
    let mut rows = Vec::with_capacity(r.nrows());
    for i in 0..r.nrows() {
        let sel = r.row(i);
        let quaternary = sparse_of(&q.combine_rows(sel)?);
        let mut bits = BitVec::zeros(h.m_binary());
        for k in sel.ones() {
            bits.xor_assign(b.row(k));
        }
        rows.push(GdsRow {
            quaternary,
            binary: bits.ones().collect(),
        });
    }
    GdsCheckMatrix::new(h.n_quaternary(), h.m_binary(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> QuaternaryCheckMatrix {
        QuaternaryCheckMatrix::from_strs(&["XYI", "ZZY"]).unwrap()
    }

    fn gds(text: &str) -> GdsCheckMatrix {
        parse_gds(text).unwrap()
    }

    #[test]
    fn ds_matrix_of_example1() {
        let d = ds_matrix(&example1());
        assert_eq!(d, gds("GDS 3 2 2\n0:X 1:Y b0\n0:Z 1:Z 2:Y b1\n"));
        assert_eq!(d.num_edges(), 7);
    }

    #[test]
    fn ds_matrix_edge_cases() {
        let empty = ds_matrix(&QuaternaryCheckMatrix::empty(3));
        assert_eq!((empty.n_quaternary(), empty.m_binary(), empty.m_prime()), (3, 0, 0));
        let one = ds_matrix(&QuaternaryCheckMatrix::from_strs(&["X"]).unwrap());
        assert_eq!(one, gds("GDS 1 1 1\n0:X b0\n"));
    }

    #[test]
    fn repeated_blocks() {
        let h = example1();
        assert_eq!(gds_repeated(&h, 1).unwrap(), ds_matrix(&h));
        assert!(gds_repeated(&h, 0).is_err());

        let g2 = gds_repeated(&h, 2).unwrap();
        let mut expect = BinaryMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 1), (2, 0), (2, 2), (3, 1), (3, 3)] {
            expect.set(i, j, true);
        }
        assert_eq!(g2.binary_block(), expect);

        // three rounds: every e^(l) with l < 3 touches rounds l and l+1
        let g3 = gds_repeated(&h, 3).unwrap();
        assert_eq!((g3.n_quaternary(), g3.m_binary(), g3.m_prime()), (9, 6, 6));
        let cols = g3.binary_block().col_weights();
        assert_eq!(cols, vec![2, 2, 2, 2, 1, 1]);
    }

    #[test]
    fn readout_blocks() {
        let h = example1();
        let g = gds_with_readout(&h, 3).unwrap();
        assert_eq!((g.n_quaternary(), g.m_binary(), g.m_prime()), (12, 6, 8));
        // last block row: H on E^(4) and only the flips of round 3
        for row in &g.rows()[6..] {
            assert!(row.quaternary.iter().all(|(c, _)| *c >= 9));
            assert_eq!(row.binary.len(), 1);
            assert!(row.binary[0] >= 4);
        }
        // every flip column now has degree 2
        assert!(g.binary_block().col_weights().iter().all(|w| *w == 2));

        let g1 = gds_with_readout(&h, 1).unwrap();
        assert_eq!((g1.n_quaternary(), g1.m_binary(), g1.m_prime()), (6, 2, 4));
        assert!(gds_with_readout(&h, 0).is_err());
    }

    #[test]
    fn r_transform_examples() {
        assert_eq!(r_transform_syndrome(&[false; 6], 2).unwrap(), vec![false; 6]);
        assert_eq!(
            r_transform_syndrome(&[true, true, false], 1).unwrap(),
            vec![true, false, true]
        );
        assert!(r_transform_syndrome(&[true, true, false], 2).is_err());
        let s = [true, false, true, true, false, true];
        let t = r_transform_syndrome(&s, 2).unwrap();
        assert_eq!(r_inverse_syndrome(&t, 2).unwrap(), s.to_vec());
    }

    #[test]
    fn per_round_reduces_to_repeated() {
        let h = example1();
        let i2 = BinaryMatrix::identity(2);
        let g = gds_per_round(&[h.clone(), h.clone(), h.clone()], &[i2.clone(), i2]).unwrap();
        assert_eq!(g, gds_repeated(&h, 3).unwrap());
        assert_eq!(gds_per_round(std::slice::from_ref(&h), &[]).unwrap(), ds_matrix(&h));

        let z = BinaryMatrix::zeros(2, 2);
        let g = gds_per_round(&[h.clone(), h.clone()], &[z]).unwrap();
        // decoupled: each row touches only its own round's flips
        for (k, row) in g.rows().iter().enumerate() {
            assert_eq!(row.binary, vec![k]);
        }
        assert!(gds_per_round(&[h.clone(), h.clone()], &[BinaryMatrix::zeros(3, 2)]).is_err());
        assert!(gds_per_round(&[h.clone(), h], &[]).is_err());
    }

    #[test]
    fn transition_matrix_solves_for_a() {
        let h1 = example1();
        let h2 = QuaternaryCheckMatrix::from_strs(&["ZZY", "YXY"]).unwrap();
        let a = transition_matrix(&h1, &h2).unwrap().unwrap();
        for i in 0..2 {
            assert_eq!(h1.combine_rows(a.row(i)).unwrap(), h2.row_pauli(i));
        }
        let bad = QuaternaryCheckMatrix::from_strs(&["XII"]).unwrap();
        assert!(transition_matrix(&h1, &bad).unwrap().is_none());
    }

    #[test]
    fn single_shot_example1() {
        let h = example1();
        let a = BinaryMatrix::from_dense(&[vec![1, 1]]).unwrap();
        let ss = single_shot_matrix(&h, &a).unwrap();
        assert_eq!(
            ss.measurement,
            gds("GDS 3 3 3\n0:X 1:Y b0\n0:Z 1:Z 2:Y b1\n0:Y 1:X 2:Y b2\n")
        );
        assert_eq!(
            ss.decoding,
            gds("GDS 3 3 3\n0:X 1:Y b0\n0:Z 1:Z 2:Y b1\nb0 b1 b2\n")
        );
        assert_eq!(apply_row_ops(&ss.row_ops, &ss.measurement).unwrap(), ss.decoding);

        let none = single_shot_matrix(&h, &BinaryMatrix::zeros(0, 2)).unwrap();
        assert_eq!(none.measurement, ds_matrix(&h));
        assert_eq!(none.decoding, ds_matrix(&h));

        assert!(single_shot_matrix(&h, &BinaryMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn file_round_trip_and_errors() {
        let g = gds_with_readout(&example1(), 2).unwrap();
        let text = g.to_gds_string();
        assert_eq!(parse_gds(&text).unwrap(), g);
        assert_eq!(parse_gds(&text).unwrap().to_gds_string(), text);

        let h = example1();
        let chk = h.to_chk_string();
        assert_eq!(chk, "CHK 2 3\n0:X 1:Y\n0:Z 1:Z 2:Y\n");
        assert_eq!(parse_chk(&chk, true).unwrap().matrix, h);

        assert!(parse_gds("GDS 3 2\n").is_err());
        assert!(parse_gds("GDS 3 2 1\n0:Q b0\n").is_err());
        assert!(parse_gds("GDS 3 2 1\n5:X b0\n").is_err());
        assert!(parse_gds("GDS 3 2 2\n0:X b0\n").is_err());
        assert!(parse_gds("GDS 3 2 1\nb0 0:X\n").is_err());
        assert!(parse_chk("CHK 2 2\n0:X\n0:Z\n", true).is_err());
        assert!(parse_chk("CHK 2 2\n0:X\n0:Z\n", false).is_ok());
        assert!(parse_chk("CHK 1 2\n0:I\n", false).is_err());

        let with_meta = parse_chk("# source = test\n# k = 1\nCHK 1 2\n0:X 1:X\n", true).unwrap();
        assert_eq!(with_meta.metadata("k"), Some("1"));
        assert_eq!(with_meta.metadata("missing"), None);
    }
}
