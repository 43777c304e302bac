//! Dense complex matrix helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// e^{iφ}
pub fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Kronecker product; `a` acts on the more significant qubits.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entry of |U†U − 1|.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &identity(u.nrows()))
}

/// Largest entry of |H − H†|.
pub fn hermiticity_deviation(h: &CMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(h, &h.adjoint())
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// Smallest spectral-norm distance between `a` and `e^{iα} b` over the global phase α.
///
/// The phase is taken from the trace overlap, which is exact whenever `a` and `b`
/// agree up to a phase and a close upper bound otherwise.
pub fn distance_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap: Complex64 = b.adjoint().component_mul(&a.transpose()).sum();
    let phase = if overlap.norm() > 1e-300 { overlap / overlap.norm() } else { ONE };
    operator_norm(&(a - b * phase))
}

/// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩).
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    overlap.norm_sqr() / (na * nb)
}
