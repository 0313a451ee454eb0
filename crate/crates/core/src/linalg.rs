//! Thin wrapper over the dense eigensolver and LU solver.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{AwqError, Result};

pub type CMat = Mat<Complex64>;

/// Right eigenvectors stored as columns, paired with their eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: CMat,
}

/// faer's AVX kernels can return with the upper halves of the vector
/// registers dirty. Every later legacy-SSE instruction on the same thread
/// (libm, the Bessel routines) then pays a state-transition penalty, which
/// measured as a 10x slowdown of the coupling sums. Clear that state after
/// each call into faer.
#[inline]
fn clear_upper_vector_state() {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx") {
        // SAFETY: AVX is available, and clobber_abi("C") tells the compiler
        // that every caller-saved vector register is overwritten.
        unsafe { std::arch::asm!("vzeroupper", clobber_abi("C"), options(nomem, nostack, preserves_flags)) }
    }
}

/// Full eigendecomposition of a general complex matrix.
pub fn eig(m: &CMat) -> Result<Eigen> {
    if m.nrows() != m.ncols() {
        return Err(AwqError::Eigensolver(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        });
    }
    let evd = m.eigen();
    clear_upper_vector_state();
    let evd = evd.map_err(|e| AwqError::Eigensolver(format!("{e:?}")))?;
    let s = evd.S();
    let values: Vec<Complex64> = (0..n).map(|i| s[i]).collect();
    let vectors = evd.U().to_owned();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AwqError::Eigensolver("non-finite eigenvalue".into()));
    }
    Ok(Eigen { values, vectors })
}

/// Rescale every column so that vᵀv = 1 (no conjugation). Returns the largest
/// resulting squared 2-norm, which grows without bound near exceptional points.
pub fn normalize_transpose(vectors: &mut CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..vectors.ncols() {
        let mut s = Complex64::new(0.0, 0.0);
        let mut n2 = 0.0;
        for i in 0..vectors.nrows() {
            let v = vectors[(i, j)];
            s += v * v;
            n2 += v.norm_sqr();
        }
        if s.norm() <= 1e-300 {
            worst = f64::INFINITY;
            continue;
        }
        let scale = s.sqrt().inv();
        for i in 0..vectors.nrows() {
            vectors[(i, j)] *= scale;
        }
        worst = worst.max(n2 * scale.norm_sqr());
    }
    worst
}

/// Largest |m_ij − m_ji| over the matrix.
pub fn asymmetry(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    worst
}

/// Solve A x = b.
pub fn lu_solve(a: &CMat, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if b.len() != n {
        return Err(AwqError::BasisMismatch(format!("rhs length {} for {n}x{n} matrix", b.len())));
    }
    let rhs = CMat::from_fn(n, 1, |i, _| b[i]);
    let x = a.partial_piv_lu().solve(&rhs);
    clear_upper_vector_state();
    let out: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(AwqError::Eigensolver("singular eigenvector matrix".into()));
    }
    Ok(out)
}

/// Matrix–vector product.
pub fn matvec(a: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

/// Largest eigenvalue of Im M = (M − M†)/(2i). A passive (decaying)
/// Hamiltonian has all of them ≤ 0.
pub fn max_eig_imag_part(m: &CMat) -> Result<f64> {
    let n = m.nrows();
    let h = CMat::from_fn(n, n, |i, j| (m[(i, j)] - m[(j, i)].conj()) / Complex64::new(0.0, 2.0));
    let evd = h.self_adjoint_eigen(faer::Side::Lower);
    clear_upper_vector_state();
    let evd = evd.map_err(|e| AwqError::Eigensolver(format!("{e:?}")))?;
    let s = evd.S();
    Ok((0..n).map(|i| s[i].re).fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eig_reconstructs_matrix() {
        let m = CMat::from_fn(4, 4, |i, j| {
            c(((i + 2 * j) as f64).sin(), if i == j { -0.5 } else { 0.1 * (i as f64 - j as f64) })
        });
        let e = eig(&m).unwrap();
        for k in 0..4 {
            let v: Vec<_> = (0..4).map(|i| e.vectors[(i, k)]).collect();
            let mv = matvec(&m, &v);
            for i in 0..4 {
                assert!((mv[i] - e.values[k] * v[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn transpose_normalization_of_symmetric_matrix() {
        let m = CMat::from_fn(5, 5, |i, j| {
            let d = (i as f64 - j as f64).abs();
            if i == j {
                c(0.0, -0.5)
            } else {
                c(d.cos() / d, -0.2 / d)
            }
        });
        let mut e = eig(&m).unwrap();
        let worst = normalize_transpose(&mut e.vectors);
        assert!(worst.is_finite());
        for a in 0..5 {
            for b in 0..5 {
                let s: Complex64 = (0..5).map(|i| e.vectors[(i, a)] * e.vectors[(i, b)]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((s - expect).norm() < 1e-10, "{a} {b} {s}");
            }
        }
    }

    #[test]
    fn lu_solves() {
        let a = CMat::from_fn(3, 3, |i, j| if i == j { c(2.0, 1.0) } else { c(0.5, 0.0) });
        let x = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 2.0)];
        let b = matvec(&a, &x);
        let y = lu_solve(&a, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - y[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn dissipator_sign() {
        let m = CMat::from_fn(2, 2, |i, j| if i == j { c(0.0, -0.5) } else { c(0.1, -0.2) });
        assert!((max_eig_imag_part(&m).unwrap() + 0.3).abs() < 1e-12);
    }
}
