use num_complex::Complex64;

use super::{check_dense_width, PauliString, PauliSum, HERMITIAN_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{cis, identity, unitarity_deviation, CMatrix};

const UNITARY_TOLERANCE: f64 = 1e-10;

fn require_hermitian(h: &PauliSum) -> Result<()> {
    let dev = h.hermiticity_deviation();
    if dev > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

fn require_unitary(u: CMatrix) -> Result<CMatrix> {
    let dev = unitarity_deviation(&u);
    if dev > UNITARY_TOLERANCE {
        return Err(Error::NotUnitary(dev));
    }
    Ok(u)
}

/// e^{iλH} for Hermitian `h`, via a dense Hermitian eigendecomposition.
pub fn exponential_exact(h: &PauliSum, lambda: f64) -> Result<CMatrix> {
    require_hermitian(h)?;
    let mut dense = h.dense()?;
    // symmetrize away sub-tolerance anti-Hermitian dust before diagonalizing
    dense = (&dense + dense.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = dense.symmetric_eigen();
    let phases = eig.eigenvalues.map(|e| cis(lambda * e));
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    require_unitary(scaled * v.adjoint())
}

/// e^{iθP} for a single Hermitian term (real coefficient folded into θ).
pub fn pauli_exponential(term: &PauliString, theta: f64) -> Result<CMatrix> {
    check_dense_width(term.width())?;
    if term.coefficient.im.abs() * 2.0 > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian(term.coefficient.im.abs() * 2.0));
    }
    let dim = 1usize << term.width();
    let mut u = identity(dim);
    apply_term_left(&mut u, term, theta);
    Ok(u)
}

/// Replaces `m` by e^{iθ c P} · m using cos(θc)·1 + i sin(θc)·P.
fn apply_term_left(m: &mut CMatrix, term: &PauliString, theta: f64) {
    let angle = theta * term.coefficient.re;
    let (cos, sin) = (angle.cos(), angle.sin());
    let (flip, sign, phase) = term.masks();
    let isin = Complex64::new(0.0, sin) * phase;
    let dim = m.nrows();
    let original = m.clone();
    for x in 0..dim {
        // row (x ^ flip) of P·m picks up phase(x) times row x of m
        let s = if (x & sign).count_ones() % 2 == 0 { isin } else { -isin };
        let target = x ^ flip;
        for col in 0..m.ncols() {
            m[(target, col)] = original[(target, col)] * cos + original[(x, col)] * s;
        }
    }
}

/// First-order product formula (∏_k e^{iλ H_k / steps})^steps in the stored term order.
///
/// The term applied first is `h.terms()[0]`. Use [`PauliSum::trotter_ordered`]
/// to pick an order with a small leading error term.
pub fn exponential_trotter(h: &PauliSum, lambda: f64, steps: usize) -> Result<CMatrix> {
    if steps == 0 {
        return Err(Error::Domain("Trotter step count must be positive".into()));
    }
    require_hermitian(h)?;
    check_dense_width(h.width())?;
    let dim = 1usize << h.width();
    let mut step = identity(dim);
    let theta = lambda / steps as f64;
    for term in h.terms() {
        apply_term_left(&mut step, term, theta);
    }
    let mut result = identity(dim);
    let mut base = step;
    let mut k = steps;
    while k > 0 {
        if k & 1 == 1 {
            result = &base * &result;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    require_unitary(result)
}
