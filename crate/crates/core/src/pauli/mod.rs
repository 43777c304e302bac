//! Complex-weighted Pauli strings, their sums, and dense realizations.

mod exp;
mod ordering;

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I, ONE, ZERO};

pub use exp::{exponential_exact, exponential_trotter, pauli_exponential};

/// Coefficients below this magnitude are dropped after merging.
pub const MERGE_TOLERANCE: f64 = 1e-12;
/// Hermiticity tolerance applied before exponentiation.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Largest register for which dense matrices are built.
pub const MAX_DENSE_QUBITS: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// `self · other = phase · result`
    pub fn product(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (ONE, p),
            (X, X) | (Y, Y) | (Z, Z) => (ONE, I),
            (X, Y) => (crate::linalg::I, Z),
            (Y, X) => (-crate::linalg::I, Z),
            (Y, Z) => (crate::linalg::I, X),
            (Z, Y) => (-crate::linalg::I, X),
            (Z, X) => (crate::linalg::I, Y),
            (X, Z) => (-crate::linalg::I, Y),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::Domain(format!("unknown Pauli letter {other:?}"))),
        }
    }

    pub fn matrix(self) -> CMatrix {
        let m = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        CMatrix::from_row_slice(2, 2, &m)
    }
}

/// A coefficient times a tensor product of single-qubit Paulis, qubit 0 first.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub coefficient: Complex64,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(coefficient: Complex64, letters: Vec<Pauli>) -> Self {
        Self { coefficient, letters }
    }

    /// Parses a label such as `"XIZ"`.
    pub fn from_label(coefficient: Complex64, label: &str) -> Result<Self> {
        let letters = label.chars().map(Pauli::from_symbol).collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Domain("empty Pauli label".into()));
        }
        Ok(Self { coefficient, letters })
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn width(&self) -> usize {
        self.letters.len()
    }

    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.symbol()).collect()
    }

    /// Operator product, including the phase from the single-qubit products.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.width(), other.width(), "Pauli string width mismatch");
        let mut coefficient = self.coefficient * other.coefficient;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (phase, p) = a.product(b);
                coefficient *= phase;
                p
            })
            .collect();
        PauliString { coefficient, letters }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Bit masks (flip, sign) and the `i^{#Y}` phase describing the action on basis states:
    /// `P|x⟩ = phase · (−1)^{popcount(x & sign)} |x ^ flip⟩`.
    pub(crate) fn masks(&self) -> (usize, usize, Complex64) {
        let n = self.width();
        let (mut flip, mut sign, mut ys) = (0usize, 0usize, 0u32);
        for (q, p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    ys += 1;
                }
                Pauli::Z => sign |= bit,
            }
        }
        (flip, sign, I.powu(ys))
    }

    /// Dense matrix including the coefficient.
    pub fn dense(&self) -> Result<CMatrix> {
        check_dense_width(self.width())?;
        let dim = 1usize << self.width();
        let (flip, sign, phase) = self.masks();
        let mut m = CMatrix::zeros(dim, dim);
        for x in 0..dim {
            let s = if (x & sign).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(x ^ flip, x)] = self.coefficient * phase * s;
        }
        Ok(m)
    }
}

fn check_dense_width(width: usize) -> Result<()> {
    if width > MAX_DENSE_QUBITS {
        return Err(Error::Domain(format!(
            "dense matrices are limited to {MAX_DENSE_QUBITS} qubits, got {width}"
        )));
    }
    Ok(())
}

/// Sum of Pauli strings of equal width. Identical strings are merged and
/// negligible coefficients dropped; first-appearance order is preserved.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    width: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(width: usize, terms: impl IntoIterator<Item = PauliString>) -> Result<Self> {
        if width == 0 {
            return Err(Error::Domain("Pauli sums need at least one qubit".into()));
        }
        let mut merged: Vec<PauliString> = Vec::new();
        let mut index: HashMap<Vec<Pauli>, usize> = HashMap::new();
        for term in terms {
            if term.width() != width {
                return Err(Error::Dimension { expected: width, found: term.width() });
            }
            match index.get(&term.letters) {
                Some(&k) => merged[k].coefficient += term.coefficient,
                None => {
                    index.insert(term.letters.clone(), merged.len());
                    merged.push(term);
                }
            }
        }
        merged.retain(|t| t.coefficient.norm() >= MERGE_TOLERANCE);
        Ok(Self { width, terms: merged })
    }

    pub fn zero(width: usize) -> Result<Self> {
        Self::new(width, [])
    }

    pub fn identity(width: usize) -> Result<Self> {
        Self::new(width, [PauliString::new(ONE, vec![Pauli::I; width])])
    }

    /// Single-term sum from a label such as `"XX"`.
    pub fn from_label(coefficient: Complex64, label: &str) -> Result<Self> {
        let term = PauliString::from_label(coefficient, label)?;
        Self::new(term.width(), [term])
    }

    /// Sum of labeled terms, e.g. `[(0.5, "XX"), (0.5, "YY")]`.
    pub fn from_labels<'a>(terms: impl IntoIterator<Item = (Complex64, &'a str)>) -> Result<Self> {
        let strings = terms
            .into_iter()
            .map(|(c, l)| PauliString::from_label(c, l))
            .collect::<Result<Vec<_>>>()?;
        let width = strings.first().map(|t| t.width()).ok_or_else(|| Error::Domain("no terms".into()))?;
        Self::new(width, strings)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the string with the given label (zero if absent).
    pub fn coefficient(&self, label: &str) -> Complex64 {
        self.terms.iter().find(|t| t.label() == label).map_or(ZERO, |t| t.coefficient)
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_width(other)?;
        Self::new(self.width, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        let terms = self.terms.iter().map(|t| PauliString::new(t.coefficient * factor, t.letters.clone()));
        Self::new(self.width, terms).expect("width unchanged")
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_width(other)?;
        let terms = self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| a.mul(b)));
        Self::new(self.width, terms)
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &PauliSum) -> PauliSum {
        let terms = self.terms.iter().flat_map(|a| {
            other.terms.iter().map(move |b| {
                let mut letters = a.letters.clone();
                letters.extend_from_slice(&b.letters);
                PauliString::new(a.coefficient * b.coefficient, letters)
            })
        });
        Self::new(self.width + other.width, terms).expect("widths add up")
    }

    /// Hermitian adjoint; Pauli strings are self-adjoint so only coefficients conjugate.
    pub fn adjoint(&self) -> PauliSum {
        let terms = self.terms.iter().map(|t| PauliString::new(t.coefficient.conj(), t.letters.clone()));
        Self::new(self.width, terms).expect("width unchanged")
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Largest |c − c̄| over the terms; zero exactly when the sum is Hermitian.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.terms.iter().map(|t| 2.0 * t.coefficient.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.hermiticity_deviation() <= tolerance
    }

    /// Dense 2^n × 2^n matrix.
    pub fn dense(&self) -> Result<CMatrix> {
        check_dense_width(self.width)?;
        let dim = 1usize << self.width;
        let mut m = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let (flip, sign, phase) = t.masks();
            let c = t.coefficient * phase;
            for x in 0..dim {
                let s = if (x & sign).count_ones() % 2 == 0 { c } else { -c };
                m[(x ^ flip, x)] += s;
            }
        }
        Ok(m)
    }

    /// The same terms in a new order. `order` must be a permutation of `0..len()`.
    pub fn reordered(&self, order: &[usize]) -> Result<PauliSum> {
        let mut seen = vec![false; self.len()];
        if order.len() != self.len() || order.iter().any(|&k| k >= self.len() || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Domain("term order is not a permutation".into()));
        }
        Ok(PauliSum { width: self.width, terms: order.iter().map(|&k| self.terms[k].clone()).collect() })
    }

    fn check_width(&self, other: &PauliSum) -> Result<()> {
        if self.width != other.width {
            return Err(Error::Dimension { expected: self.width, found: other.width });
        }
        Ok(())
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)·{}", t.coefficient.re, t.coefficient.im, t.label())?;
        }
        Ok(())
    }
}

/// Single-qubit projectors and ladder operators in Pauli form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    /// |0⟩⟨0| = ½(I + Z)
    P0,
    /// |1⟩⟨1| = ½(I − Z)
    P1,
    /// |0⟩⟨1| = ½(X + iY)
    S0,
    /// |1⟩⟨0| = ½(X − iY)
    S1,
    /// S0† = |1⟩⟨0|
    S0Dag,
    /// S1† = |0⟩⟨1|
    S1Dag,
}

pub fn ladder(kind: Ladder) -> PauliSum {
    let h = Complex64::new(0.5, 0.0);
    let hi = Complex64::new(0.0, 0.5);
    let terms: [(Complex64, &str); 2] = match kind {
        Ladder::P0 => [(h, "I"), (h, "Z")],
        Ladder::P1 => [(h, "I"), (-h, "Z")],
        Ladder::S0 | Ladder::S1Dag => [(h, "X"), (hi, "Y")],
        Ladder::S1 | Ladder::S0Dag => [(h, "X"), (-hi, "Y")],
    };
    PauliSum::from_labels(terms).expect("valid labels")
}

pub fn tensor(a: &PauliSum, b: &PauliSum) -> PauliSum {
    a.tensor(b)
}
