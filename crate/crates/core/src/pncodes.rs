//! Signature codes: maximal-length LFSR sequences, cyclic shifts, Walsh codes
//! and their correlation properties.
//!
//! Every code handed to the rest of the crate is bipolar and energy
//! normalized, i.e. each chip is `±1/√L` so that `cᵀc = 1`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const MIN_DEGREE: u32 = 3;
pub const MAX_DEGREE: u32 = 10;

/// Tolerance used when validating normalized codes.
const NORM_TOL: f64 = 1e-12;

/// Default maximal tap sets. The feedback rule is
/// `a[k] = XOR over t in taps of a[k - t]`.
const DEFAULT_TAPS: &[(u32, &[u32])] = &[
    (3, &[3, 2]),
    (4, &[4, 3]),
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
];

/// Default tap set for `degree`, if the table has one.
pub fn default_taps(degree: u32) -> Option<&'static [u32]> {
    DEFAULT_TAPS
        .iter()
        .find(|(d, _)| *d == degree)
        .map(|(_, taps)| *taps)
}

/// One period of a binary LFSR output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarySequence {
    bits: Vec<u8>,
    degree: u32,
}

impl BinarySequence {
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// Generates one full period of a maximal-length sequence of the given degree.
///
/// The register starts from the all-ones state. Any other nonzero state only
/// changes the phase of the output. When `taps` is `None` the built-in table is
/// used. The period of the register is always measured, so a tap set that is
/// not primitive is rejected with [`Error::NonMaximalPolynomial`].
pub fn generate_msequence(degree: u32, taps: Option<&[u32]>) -> Result<BinarySequence> {
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
        return Err(Error::InvalidDegree(degree));
    }
    let taps: Vec<u32> = match taps {
        Some(t) => t.to_vec(),
        None => default_taps(degree)
            .ok_or(Error::InvalidDegree(degree))?
            .to_vec(),
    };
    if !taps.contains(&degree) || taps.iter().any(|&t| t == 0 || t > degree) {
        return Err(Error::InvalidTaps { degree, taps });
    }

    let r = degree as usize;
    let expected = (1usize << r) - 1;
    // Bit i of `state` holds a[k - 1 - i], so tap t reads bit t - 1.
    let mask: u32 = taps.iter().fold(0, |m, &t| m | (1 << (t - 1)));
    let initial: u32 = (1 << r) - 1;
    let mut state = initial;
    // Oldest sample first: a[0] is bit r - 1 of the initial state.
    let mut bits = Vec::with_capacity(expected);
    let mut period = 0usize;
    loop {
        bits.push(((state >> (r - 1)) & 1) as u8);
        let feedback = (state & mask).count_ones() & 1;
        state = ((state << 1) | feedback) & initial;
        period += 1;
        if state == initial || period > expected {
            break;
        }
    }
    if period != expected {
        return Err(Error::NonMaximalPolynomial {
            taps,
            period,
            expected,
        });
    }
    Ok(BinarySequence { bits, degree })
}

/// Bipolar, unit-energy chip vector assigned to one array element.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureCode {
    chips: Vec<f64>,
}

impl SignatureCode {
    /// Wraps chips that already satisfy `|c(l)| = 1/√L` and `cᵀc = 1`.
    pub fn new(chips: Vec<f64>) -> Result<Self> {
        if chips.is_empty() {
            return Err(Error::InvalidCode("empty chip vector".into()));
        }
        let amp = 1.0 / (chips.len() as f64).sqrt();
        if chips.iter().any(|c| (c.abs() - amp).abs() > NORM_TOL) {
            return Err(Error::InvalidCode(format!(
                "chips must all be ±1/√{}",
                chips.len()
            )));
        }
        Ok(Self { chips })
    }

    /// Builds a normalized code from a ±1 pattern.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidCode("signs must be ±1".into()));
        }
        let amp = 1.0 / (signs.len() as f64).sqrt();
        Ok(Self {
            chips: signs.iter().map(|&s| f64::from(s) * amp).collect(),
        })
    }

    pub fn chips(&self) -> &[f64] {
        &self.chips
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn dot(&self, other: &SignatureCode) -> f64 {
        self.chips
            .iter()
            .zip(&other.chips)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// The `q`-th cyclic shift `m^q`, see [`cyclic_shift`].
    pub fn shifted(&self, q: usize) -> SignatureCode {
        SignatureCode {
            chips: cyclic_shift(&self.chips, q),
        }
    }

    /// One chip per line, full precision.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.chips {
            writeln!(out, "{c:?}").unwrap();
        }
        out
    }

    /// All chips on one comma-separated row.
    pub fn to_csv_row(&self) -> String {
        self.chips
            .iter()
            .map(|c| format!("{c:?}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Maps bit 0 to `+1/√L` and bit 1 to `-1/√L`.
pub fn to_bipolar(seq: &BinarySequence) -> SignatureCode {
    let amp = 1.0 / (seq.len() as f64).sqrt();
    SignatureCode {
        chips: seq
            .bits
            .iter()
            .map(|&b| if b == 0 { amp } else { -amp })
            .collect(),
    }
}

/// Convenience: normalized bipolar m-sequence of the given degree.
pub fn msequence_code(degree: u32, taps: Option<&[u32]>) -> Result<SignatureCode> {
    generate_msequence(degree, taps).map(|s| to_bipolar(&s))
}

/// Cyclic right shift: `out[k] = input[(k - q) mod L]`.
///
/// For `q` in `0..L` this is `[x(L-q), .., x(L-1), x(0), .., x(L-q-1)]`.
pub fn cyclic_shift<T: Copy>(input: &[T], q: usize) -> Vec<T> {
    if input.is_empty() {
        return Vec::new();
    }
    let mut out = input.to_vec();
    out.rotate_right(q % input.len());
    out
}

/// L×V matrix whose columns are the signature codes of the V elements.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeMatrix {
    columns: Vec<SignatureCode>,
}

impl CodeMatrix {
    pub fn new(columns: Vec<SignatureCode>) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::Dimension("code matrix needs at least one column".into()));
        };
        let len = first.len();
        if columns.iter().any(|c| c.len() != len) {
            return Err(Error::Dimension("code columns differ in length".into()));
        }
        if columns.len() > len {
            return Err(Error::Dimension(format!(
                "{} codes of length {len}: V must not exceed L",
                columns.len()
            )));
        }
        Ok(Self { columns })
    }

    /// Code length L (rows).
    pub fn code_len(&self) -> usize {
        self.columns[0].len()
    }

    /// Element count V (columns).
    pub fn elements(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[SignatureCode] {
        &self.columns
    }

    pub fn column(&self, v: usize) -> &SignatureCode {
        &self.columns[v]
    }

    /// `CᵀC` as row-major V×V entries.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.columns
            .iter()
            .map(|a| self.columns.iter().map(|b| a.dot(b)).collect())
            .collect()
    }

    /// Comma-separated export, one code (column) per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.columns {
            out.push_str(&c.to_csv_row());
            out.push('\n');
        }
        out
    }
}

/// First `elements` columns of the order-`len` Sylvester–Hadamard matrix,
/// scaled by `1/√len`. Element v receives column v-1 in natural order.
pub fn walsh_matrix(len: usize, elements: usize) -> Result<CodeMatrix> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "Walsh length {len} is not a power of two"
        )));
    }
    if elements == 0 || elements > len {
        return Err(Error::Dimension(format!(
            "{elements} Walsh codes requested from order {len}"
        )));
    }
    let amp = 1.0 / (len as f64).sqrt();
    let columns = (0..elements)
        .map(|col| SignatureCode {
            chips: (0..len)
                .map(|row| {
                    // H[row][col] = (-1)^popcount(row & col)
                    if (row & col).count_ones() % 2 == 0 {
                        amp
                    } else {
                        -amp
                    }
                })
                .collect(),
        })
        .collect();
    Ok(CodeMatrix { columns })
}

/// `Σ_k c(k)·c((k + lag) mod L)`.
pub fn periodic_autocorrelation(code: &SignatureCode, lag: usize) -> f64 {
    let c = code.chips();
    let n = c.len();
    (0..n).map(|k| c[k] * c[(k + lag) % n]).sum()
}

/// `Σ_{k=lag}^{L-1} c(k)·c(k - lag)`, zero once the lag exceeds the code.
pub fn aperiodic_autocorrelation(code: &SignatureCode, lag: usize) -> f64 {
    let c = code.chips();
    if lag >= c.len() {
        return 0.0;
    }
    c[lag..].iter().zip(c).map(|(a, b)| a * b).sum()
}
