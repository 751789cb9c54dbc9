//! Bit-mask algebra for Pauli strings and Pauli-Z stabilizers.
//!
//! Basis labels are integers `x` in `0..2^n`, where bit `i` of `x` is the
//! computational-basis value of qubit `i`. In the text form (`"ZIZ"`,
//! `"XXI"`) the leftmost character is qubit 0, i.e. the least significant
//! bit of the label.
//!
//! A Z-string `s` with mask `m` acts on `|x⟩` as `(-1)^popcount(m & x) |x⟩`.
//! The stabilizer group of all `2^n` Z-strings averages any Pauli string to
//! itself (if diagonal) or to zero, which is what [`InteractingHamiltonian::project_effective`]
//! exploits.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest qubit count for which dense `2^n x 2^n` matrices are built.
pub const DENSE_QUBIT_LIMIT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("qubit count {n} exceeds the supported maximum of 63")]
    TooManyQubits { n: usize },
    #[error("mask {mask:#x} has bits outside the {n}-qubit range")]
    MaskOutOfRange { mask: u64, n: usize },
    #[error("invalid Pauli character '{ch}' at position {pos}")]
    InvalidPauliChar { ch: char, pos: usize },
    #[error("non-diagonal Pauli character '{ch}' at position {pos} (only I and Z allowed)")]
    NonDiagonal { ch: char, pos: usize },
    #[error("identity string is not a valid generator")]
    IdentityGenerator,
    #[error("generator qubit count {got} does not match set qubit count {expected}")]
    QubitCountMismatch { got: usize, expected: usize },
    #[error("duplicate basis column {column}")]
    DuplicateColumn { column: u64 },
    #[error("basis column {column} out of range for {n} qubits")]
    ColumnOutOfRange { column: u64, n: usize },
    #[error("dense matrix for n = {n} exceeds the limit of {limit} qubits")]
    DenseLimitExceeded { n: usize, limit: usize },
    #[error("interaction term {term} is a single-qubit Z; it belongs in the local coefficients")]
    LocalZInteraction { term: String },
    #[error("coefficient count {got} does not match qubit count {expected}")]
    CoefficientCountMismatch { got: usize, expected: usize },
}

fn check_n(n: usize) -> Result<(), PauliError> {
    if n == 0 || n > 63 {
        return Err(PauliError::TooManyQubits { n });
    }
    Ok(())
}

fn check_mask(mask: u64, n: usize) -> Result<(), PauliError> {
    check_n(n)?;
    if mask >> n != 0 {
        return Err(PauliError::MaskOutOfRange { mask, n });
    }
    Ok(())
}

/// An n-qubit string of `I`/`Z` factors, stored as the mask of qubits
/// carrying `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZString {
    mask: u64,
    n: usize,
}

impl ZString {
    pub fn new(mask: u64, n: usize) -> Result<Self, PauliError> {
        check_mask(mask, n)?;
        Ok(Self { mask, n })
    }

    pub fn identity(n: usize) -> Result<Self, PauliError> {
        Self::new(0, n)
    }

    /// The single-qubit `Z` on qubit `i` (0-based).
    pub fn single(i: usize, n: usize) -> Result<Self, PauliError> {
        if i >= n {
            return Err(PauliError::MaskOutOfRange { mask: 1 << i, n });
        }
        Self::new(1 << i, n)
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.mask == 0
    }

    /// Eigenvalue `⟨x|s|x⟩ = (-1)^popcount(mask & x)`.
    pub fn eigenvalue(&self, x: u64) -> i32 {
        debug_assert!(x >> self.n == 0, "basis label out of range");
        if (self.mask & x).count_ones() & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn dense(&self) -> Result<DMatrix<Complex64>, PauliError> {
        check_dense_limit(self.n)?;
        let dim = 1usize << self.n;
        Ok(DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                Complex64::new(f64::from(self.eigenvalue(c as u64)), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }
}

impl fmt::Display for ZString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.mask >> i & 1 == 1 { "Z" } else { "I" })?;
        }
        Ok(())
    }
}

impl FromStr for ZString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, PauliError> {
        let p: PauliString = s.parse()?;
        if let Some(pos) = (0..p.n).find(|&i| p.x_mask >> i & 1 == 1) {
            let ch = s.chars().nth(pos).unwrap_or('?');
            return Err(PauliError::NonDiagonal { ch, pos });
        }
        ZString::new(p.z_mask, p.n)
    }
}

impl Serialize for ZString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ZString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A general n-qubit Pauli string in the (X-mask, Z-mask) representation.
///
/// The Hermitian phase `i^popcount(x & z)` (one factor of `i` per `Y` site)
/// is folded into [`PauliString::dense`], so coefficients multiplying a
/// `PauliString` stay real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    x_mask: u64,
    z_mask: u64,
    n: usize,
}

impl PauliString {
    pub fn new(x_mask: u64, z_mask: u64, n: usize) -> Result<Self, PauliError> {
        check_mask(x_mask, n)?;
        check_mask(z_mask, n)?;
        Ok(Self { x_mask, z_mask, n })
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    /// Dense matrix `i^|x∧z| X^x Z^z`, Hermitian and unitary.
    ///
    /// Action on a basis state: `P|c⟩ = i^|x∧z| (-1)^popcount(z & c) |c ⊕ x⟩`.
    pub fn dense(&self) -> Result<DMatrix<Complex64>, PauliError> {
        check_dense_limit(self.n)?;
        let dim = 1usize << self.n;
        let phase = Complex64::i().powu((self.x_mask & self.z_mask).count_ones());
        let mut m = DMatrix::zeros(dim, dim);
        for c in 0..dim as u64 {
            let r = c ^ self.x_mask;
            let sign = if (self.z_mask & c).count_ones() & 1 == 0 {
                1.0
            } else {
                -1.0
            };
            m[(r as usize, c as usize)] = phase * sign;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let x = self.x_mask >> i & 1 == 1;
            let z = self.z_mask >> i & 1 == 1;
            f.write_str(match (x, z) {
                (false, false) => "I",
                (true, false) => "X",
                (true, true) => "Y",
                (false, true) => "Z",
            })?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, PauliError> {
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        let mut n = 0usize;
        for (pos, ch) in s.chars().enumerate() {
            if pos >= 63 {
                return Err(PauliError::TooManyQubits {
                    n: s.chars().count(),
                });
            }
            match ch {
                'I' => {}
                'X' => x_mask |= 1 << pos,
                'Y' => {
                    x_mask |= 1 << pos;
                    z_mask |= 1 << pos;
                }
                'Z' => z_mask |= 1 << pos,
                _ => return Err(PauliError::InvalidPauliChar { ch, pos }),
            }
            n = pos + 1;
        }
        if n == 0 {
            return Err(PauliError::TooManyQubits { n: 0 });
        }
        PauliString::new(x_mask, z_mask, n)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_dense_limit(n: usize) -> Result<(), PauliError> {
    if n > DENSE_QUBIT_LIMIT {
        return Err(PauliError::DenseLimitExceeded {
            n,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    Ok(())
}

/// An ordered set of distinct, non-identity Z-strings on `n` qubits.
///
/// Duplicates are dropped (first occurrence wins); the identity string is
/// rejected outright.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    generators: Vec<ZString>,
    n: usize,
}

impl GeneratorSet {
    pub fn new(
        n: usize,
        generators: impl IntoIterator<Item = ZString>,
    ) -> Result<Self, PauliError> {
        check_n(n)?;
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for g in generators {
            if g.qubits() != n {
                return Err(PauliError::QubitCountMismatch {
                    got: g.qubits(),
                    expected: n,
                });
            }
            if g.is_identity() {
                return Err(PauliError::IdentityGenerator);
            }
            if seen.insert(g.mask()) {
                out.push(g);
            }
        }
        Ok(Self { generators: out, n })
    }

    /// The local set `{Z_0, ..., Z_{n-1}}`.
    pub fn local(n: usize) -> Result<Self, PauliError> {
        Self::new(n, (0..n).map(|i| ZString::single(i, n).expect("i < n")))
    }

    /// All `2^n - 1` non-identity Z-strings, ordered by mask.
    pub fn full(n: usize) -> Result<Self, PauliError> {
        check_n(n)?;
        if n > DENSE_QUBIT_LIMIT {
            return Err(PauliError::DenseLimitExceeded {
                n,
                limit: DENSE_QUBIT_LIMIT,
            });
        }
        Self::new(
            n,
            (1..1u64 << n).map(|m| ZString::new(m, n).expect("mask in range")),
        )
    }

    pub fn parse(n: usize, strings: &[impl AsRef<str>]) -> Result<Self, PauliError> {
        let gens = strings
            .iter()
            .map(|s| {
                let z: ZString = s.as_ref().parse()?;
                if z.qubits() != n {
                    return Err(PauliError::QubitCountMismatch {
                        got: z.qubits(),
                        expected: n,
                    });
                }
                Ok(z)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, gens)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[ZString] {
        &self.generators
    }

    pub fn iter(&self) -> impl Iterator<Item = &ZString> {
        self.generators.iter()
    }

    /// True when no nontrivial product of generators is the identity,
    /// i.e. the masks are linearly independent over GF(2).
    pub fn independent(&self) -> bool {
        let mut basis: Vec<u64> = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let mut v = g.mask();
            for &b in &basis {
                let pivot = 63 - b.leading_zeros();
                if v >> pivot & 1 == 1 {
                    v ^= b;
                }
            }
            if v == 0 {
                return false;
            }
            basis.push(v);
            basis.sort_unstable_by_key(|b| std::cmp::Reverse(*b));
        }
        true
    }

    /// Eigenvalue matrix of the generators over the given columns (all
    /// `2^n` labels when `columns` is `None`), optionally with an all-ones
    /// row prepended.
    pub fn eigenvalue_matrix(
        &self,
        prepend_ones: bool,
        columns: Option<&[u64]>,
    ) -> Result<EigenvalueMatrix, PauliError> {
        let cols: Vec<u64> = match columns {
            Some(c) => {
                let mut seen = std::collections::HashSet::new();
                for &x in c {
                    if x >> self.n != 0 {
                        return Err(PauliError::ColumnOutOfRange {
                            column: x,
                            n: self.n,
                        });
                    }
                    if !seen.insert(x) {
                        return Err(PauliError::DuplicateColumn { column: x });
                    }
                }
                c.to_vec()
            }
            None => {
                if self.n > DENSE_QUBIT_LIMIT + 4 {
                    return Err(PauliError::DenseLimitExceeded {
                        n: self.n,
                        limit: DENSE_QUBIT_LIMIT + 4,
                    });
                }
                (0..1u64 << self.n).collect()
            }
        };
        let extra = usize::from(prepend_ones);
        let rows = self.generators.len() + extra;
        let data = DMatrix::from_fn(rows, cols.len(), |r, c| {
            if prepend_ones && r == 0 {
                1.0
            } else {
                f64::from(self.generators[r - extra].eigenvalue(cols[c]))
            }
        });
        Ok(EigenvalueMatrix {
            data,
            columns: cols,
            includes_ones_row: prepend_ones,
        })
    }
}

/// A real matrix of generator eigenvalues `h_{j,x} = ⟨x|s_j|x⟩`, with the
/// basis label of each column retained.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueMatrix {
    data: DMatrix<f64>,
    columns: Vec<u64>,
    includes_ones_row: bool,
}

impl EigenvalueMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn columns(&self) -> &[u64] {
        &self.columns
    }

    pub fn includes_ones_row(&self) -> bool {
        self.includes_ones_row
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[(row, col)]
    }
}

/// `H_0 = Σ_i θ_i Z_i + Σ_j γ_j P_j` with real coefficients and arbitrary
/// non-local Pauli interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractingHamiltonian {
    n: usize,
    theta: Vec<f64>,
    interactions: Vec<(PauliString, f64)>,
}

impl InteractingHamiltonian {
    pub fn new(
        n: usize,
        theta: Vec<f64>,
        interactions: Vec<(PauliString, f64)>,
    ) -> Result<Self, PauliError> {
        check_n(n)?;
        if theta.len() != n {
            return Err(PauliError::CoefficientCountMismatch {
                got: theta.len(),
                expected: n,
            });
        }
        for (p, _) in &interactions {
            if p.qubits() != n {
                return Err(PauliError::QubitCountMismatch {
                    got: p.qubits(),
                    expected: n,
                });
            }
            // Single-qubit Z terms live in theta, not here.
            if p.is_diagonal() && p.z_mask().count_ones() == 1 {
                return Err(PauliError::LocalZInteraction {
                    term: p.to_string(),
                });
            }
        }
        Ok(Self {
            n,
            theta,
            interactions,
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn interactions(&self) -> &[(PauliString, f64)] {
        &self.interactions
    }

    /// Keep the diagonal terms, drop everything with an X component.
    ///
    /// This is the stabilizer average `(1/2^n) Σ_s s H_0 s`: conjugating a
    /// Pauli string by every Z-string leaves diagonal strings fixed and
    /// cancels all others.
    pub fn project_effective(&self) -> DiagonalHamiltonian {
        let mut terms: Vec<(ZString, f64)> = self
            .theta
            .iter()
            .enumerate()
            .map(|(i, &c)| (ZString::single(i, self.n).expect("i < n"), c))
            .collect();
        for (p, c) in &self.interactions {
            if p.is_diagonal() {
                terms.push((ZString::new(p.z_mask(), self.n).expect("mask in range"), *c));
            }
        }
        DiagonalHamiltonian { n: self.n, terms }
    }

    pub fn dense(&self) -> Result<DMatrix<Complex64>, PauliError> {
        check_dense_limit(self.n)?;
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for x in 0..dim as u64 {
            let mut e = 0.0;
            for (i, &c) in self.theta.iter().enumerate() {
                e += c * f64::from(ZString::single(i, self.n).expect("i < n").eigenvalue(x));
            }
            m[(x as usize, x as usize)] = Complex64::new(e, 0.0);
        }
        for (p, c) in &self.interactions {
            m += p.dense()? * Complex64::new(*c, 0.0);
        }
        Ok(m)
    }

    /// Triangle-inequality bound `Σ|θ_i| + Σ|γ_j|` on the spectral norm.
    pub fn coefficient_norm_bound(&self) -> f64 {
        self.theta.iter().map(|c| c.abs()).sum::<f64>()
            + self.interactions.iter().map(|(_, c)| c.abs()).sum::<f64>()
    }
}

/// `H = Σ_j c_j s_j` over Z-strings; real diagonal in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHamiltonian {
    n: usize,
    terms: Vec<(ZString, f64)>,
}

impl DiagonalHamiltonian {
    pub fn new(n: usize, terms: Vec<(ZString, f64)>) -> Result<Self, PauliError> {
        check_n(n)?;
        for (z, _) in &terms {
            if z.qubits() != n {
                return Err(PauliError::QubitCountMismatch {
                    got: z.qubits(),
                    expected: n,
                });
            }
        }
        Ok(Self { n, terms })
    }

    /// Pair each generator of `gens` with a coefficient.
    pub fn from_generator_coefficients(
        gens: &GeneratorSet,
        coefficients: &[f64],
    ) -> Result<Self, PauliError> {
        if coefficients.len() != gens.len() {
            return Err(PauliError::CoefficientCountMismatch {
                got: coefficients.len(),
                expected: gens.len(),
            });
        }
        Self::new(
            gens.qubits(),
            gens.iter()
                .copied()
                .zip(coefficients.iter().copied())
                .collect(),
        )
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(ZString, f64)] {
        &self.terms
    }

    /// Energy `⟨x|H|x⟩` of a basis state.
    pub fn energy(&self, x: u64) -> f64 {
        self.terms
            .iter()
            .map(|(z, c)| c * f64::from(z.eigenvalue(x)))
            .sum()
    }

    /// All `2^n` diagonal entries.
    pub fn diagonal(&self) -> Result<DVector<f64>, PauliError> {
        check_dense_limit(self.n)?;
        let dim = 1usize << self.n;
        Ok(DVector::from_fn(dim, |x, _| self.energy(x as u64)))
    }

    pub fn dense(&self) -> Result<DMatrix<Complex64>, PauliError> {
        let d = self.diagonal()?;
        let dim = d.len();
        Ok(DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                Complex64::new(d[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }
}
