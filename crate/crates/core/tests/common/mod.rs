//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use bosim::bosonic::{decode_basis, ModeLayout};
use bosim::linalg::{CMatrix, ONE};
use num_complex::Complex64;

/// e^{iλH} by a Taylor series with scaling and squaring; shares no code with the eigen path.
pub fn taylor_expm(h: &CMatrix, lambda: f64) -> CMatrix {
    let a = h * Complex64::new(0.0, lambda);
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm.log2().ceil().max(0.0) as u32) + 4;
    let scaled = &a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let n = a.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..40 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// ⟨m'|a†_mode|m⟩ built directly from Fock-basis matrix elements over the encoded register.
pub fn fock_creation(mode: usize, layout: &ModeLayout) -> CMatrix {
    let dim = 1usize << layout.qubit_count();
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let Some(occ) = decode_basis(col, layout) else { continue };
        if occ[mode] >= layout.capacity() {
            continue;
        }
        let mut raised = occ.clone();
        raised[mode] += 1;
        for row in 0..dim {
            if decode_basis(row, layout).as_deref() == Some(&raised[..]) {
                out[(row, col)] = ONE * ((occ[mode] + 1) as f64).sqrt();
            }
        }
    }
    out
}

/// b†a + a†b from Fock-basis matrix elements, restricted to states with ≤ N photons in total.
pub fn fock_hopping(a: usize, b: usize, layout: &ModeLayout) -> CMatrix {
    let dim = 1usize << layout.qubit_count();
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let Some(occ) = decode_basis(col, layout) else { continue };
        if occ.iter().sum::<u32>() > layout.capacity() {
            continue;
        }
        for (from, to) in [(a, b), (b, a)] {
            if occ[from] == 0 {
                continue;
            }
            let mut next = occ.clone();
            next[from] -= 1;
            next[to] += 1;
            if next[to] > layout.capacity() {
                continue;
            }
            let amp = ((occ[from] as f64) * (next[to] as f64)).sqrt();
            for row in 0..dim {
                if decode_basis(row, layout).as_deref() == Some(&next[..]) {
                    out[(row, col)] += ONE * amp;
                }
            }
        }
    }
    out
}

/// Output amplitudes of a single photon through a lossless splitter: (Tα + iRβ, iRα + Tβ).
pub fn splitter_amplitudes(t: f64, r: f64, alpha: Complex64, beta: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    (alpha * t + i * r * beta, i * r * alpha + beta * t)
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!((actual - expected).abs() <= tol, "{what}: got {actual}, expected {expected} (tol {tol})");
}
