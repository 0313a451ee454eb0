//! ψ(t) = e^{−iHt}ψ0 by eigendecomposition, with a Dormand–Prince fallback.

use num_complex::Complex64;
use ode_solvers::{DVector, Dopri5, System};
use serde::Serialize;

use crate::error::{AwqError, Result};
use crate::hamiltonian::{BasisLabel, EffectiveHamiltonian};
use crate::linalg::{self, CMat};

/// Eigenvector condition (largest ‖v‖² under vᵀv = 1) above which the
/// spectral path is abandoned.
pub const MAX_EIGVEC_CONDITION: f64 = 1e8;
pub const RK_RTOL: f64 = 1e-10;
pub const RK_ATOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Eigen,
    Integrator,
}

#[derive(Debug, Clone)]
struct Spectral {
    values: Vec<Complex64>,
    vectors: CMat,
    coeffs: Vec<Complex64>,
}

/// Evaluates ψ(t) for one Hamiltonian and initial state.
#[derive(Debug, Clone)]
pub struct Propagator {
    matrix: CMat,
    psi0: Vec<Complex64>,
    basis: Vec<BasisLabel>,
    spectral: Option<Spectral>,
    pub method: Method,
    pub diagnostics: Vec<String>,
}

fn check_initial(h: &EffectiveHamiltonian, psi0: &[Complex64]) -> Result<()> {
    if psi0.len() != h.dim() {
        return Err(AwqError::BasisMismatch(format!(
            "initial state has {} entries, basis has {}",
            psi0.len(),
            h.dim()
        )));
    }
    let n2: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    if (n2 - 1.0).abs() > 1e-9 {
        return Err(AwqError::InvalidConfig(format!("initial state has norm² {n2}, expected 1")));
    }
    Ok(())
}

impl Propagator {
    /// Spectral path when the eigenvectors are well conditioned, integrator
    /// otherwise.
    pub fn new(h: &EffectiveHamiltonian, psi0: &[Complex64]) -> Result<Self> {
        Self::build(h, psi0, None)
    }

    pub fn with_method(h: &EffectiveHamiltonian, psi0: &[Complex64], method: Method) -> Result<Self> {
        Self::build(h, psi0, Some(method))
    }

    fn build(h: &EffectiveHamiltonian, psi0: &[Complex64], forced: Option<Method>) -> Result<Self> {
        check_initial(h, psi0)?;
        let mut out = Self {
            matrix: h.matrix.clone(),
            psi0: psi0.to_vec(),
            basis: h.basis.clone(),
            spectral: None,
            method: Method::Integrator,
            diagnostics: Vec::new(),
        };
        if forced == Some(Method::Integrator) {
            return Ok(out);
        }
        let mut e = linalg::eig(&h.matrix)?;
        let cond = linalg::normalize_transpose(&mut e.vectors);
        if cond > MAX_EIGVEC_CONDITION {
            if forced == Some(Method::Eigen) {
                return Err(AwqError::Eigensolver(format!("eigenvector condition {cond:.3e} exceeds {MAX_EIGVEC_CONDITION:.0e}")));
            }
            out.diagnostics
                .push(format!("eigenvector condition {cond:.3e} > {MAX_EIGVEC_CONDITION:.0e}; using the integrator"));
            return Ok(out);
        }
        let coeffs = spectral_coefficients(h, &e.vectors, psi0)?;
        out.spectral = Some(Spectral {
            values: e.values,
            vectors: e.vectors,
            coeffs,
        });
        out.method = Method::Eigen;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.psi0.len()
    }

    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    pub fn state(&self, t: f64) -> Result<Vec<Complex64>> {
        match &self.spectral {
            Some(s) => Ok(spectral_state(s, t)),
            None => integrate(&self.matrix, &self.psi0, &[t]).map(|mut v| v.pop().unwrap_or_default()),
        }
    }

    /// ψ at every time of `times` (non-decreasing, ≥ 0).
    pub fn states(&self, times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        check_times(times)?;
        match &self.spectral {
            Some(s) => Ok(times.iter().map(|&t| spectral_state(s, t)).collect()),
            None => integrate(&self.matrix, &self.psi0, times),
        }
    }

    /// |⟨w|ψ(t)⟩|² over `times`. O(dim) per time on the spectral path.
    pub fn overlap_populations(&self, w: &[Complex64], times: &[f64]) -> Result<Vec<f64>> {
        check_times(times)?;
        match &self.spectral {
            Some(s) => {
                let n = self.dim();
                let proj: Vec<Complex64> = (0..n)
                    .map(|j| {
                        let acc: Complex64 = w.iter().enumerate().map(|(i, wi)| wi.conj() * s.vectors[(i, j)]).sum();
                        acc * s.coeffs[j]
                    })
                    .collect();
                Ok(times
                    .iter()
                    .map(|&t| {
                        let a: Complex64 = proj
                            .iter()
                            .zip(&s.values)
                            .map(|(p, e)| p * (Complex64::new(0.0, -t) * e).exp())
                            .sum();
                        a.norm_sqr()
                    })
                    .collect())
            }
            None => Ok(self.states(times)?.iter().map(|psi| overlap(w, psi).norm_sqr()).collect()),
        }
    }

    pub fn trajectory(&self, times: &[f64]) -> Result<Trajectory> {
        Ok(Trajectory {
            times: times.to_vec(),
            basis: self.basis.clone(),
            amplitudes: self.states(times)?,
            method: self.method,
            diagnostics: self.diagnostics.clone(),
        })
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(AwqError::InvalidConfig("time grid must be finite, non-negative and sorted".into()));
    }
    Ok(())
}

/// c with V c = ψ0. For complex-symmetric H the eigenvectors are
/// biorthogonal under the transpose, so c = Vᵀψ0; degenerate eigenspaces
/// break that, which the reconstruction check catches.
fn spectral_coefficients(h: &EffectiveHamiltonian, v: &CMat, psi0: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = psi0.len();
    if h.is_symmetric(1e-12 * (1.0 + max_abs(&h.matrix))) {
        let c: Vec<Complex64> = (0..n).map(|j| (0..n).map(|i| v[(i, j)] * psi0[i]).sum()).collect();
        let back = linalg::matvec(v, &c);
        let err: f64 = back.iter().zip(psi0).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        if err < 1e-9 {
            return Ok(c);
        }
    }
    linalg::lu_solve(v, psi0)
}

fn max_abs(m: &CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

fn spectral_state(s: &Spectral, t: f64) -> Vec<Complex64> {
    let n = s.coeffs.len();
    let mut out = vec![ZERO; n];
    for j in 0..n {
        let a = s.coeffs[j] * (Complex64::new(0.0, -t) * s.values[j]).exp();
        if a == ZERO {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += s.vectors[(i, j)] * a;
        }
    }
    out
}

pub(crate) fn overlap(w: &[Complex64], psi: &[Complex64]) -> Complex64 {
    w.iter().zip(psi).map(|(a, b)| a.conj() * b).sum()
}

struct Schrodinger<'a> {
    h: &'a CMat,
}

impl System<f64, DVector<f64>> for Schrodinger<'_> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let n = self.h.nrows();
        let psi: Vec<Complex64> = (0..n).map(|i| Complex64::new(y[i], y[n + i])).collect();
        let hpsi = linalg::matvec(self.h, &psi);
        for i in 0..n {
            // −i(a + ib) = b − ia
            dy[i] = hpsi[i].im;
            dy[n + i] = -hpsi[i].re;
        }
    }
}

/// Adaptive Dormand–Prince 5(4) from t = 0 through each requested time.
fn integrate(h: &CMat, psi0: &[Complex64], times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let n = psi0.len();
    let mut y = DVector::from_iterator(2 * n, psi0.iter().map(|z| z.re).chain(psi0.iter().map(|z| z.im)));
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target > t {
            let mut solver = Dopri5::from_param(
                Schrodinger { h },
                t,
                target,
                target - t,
                y.clone(),
                RK_RTOL,
                RK_ATOL,
                0.9,
                0.04,
                0.2,
                10.0,
                target - t,
                0.0,
                u32::MAX,
                1000,
                ode_solvers::OutputType::Sparse,
            );
            solver
                .integrate()
                .map_err(|e| AwqError::Integrator(format!("at t = {t}: {e:?}")))?;
            y = solver
                .y_out()
                .last()
                .cloned()
                .ok_or_else(|| AwqError::Integrator("solver produced no output".into()))?;
            t = target;
        }
        out.push((0..n).map(|i| Complex64::new(y[i], y[n + i])).collect());
    }
    Ok(out)
}

/// ψ(t) sampled on a time grid, stored once and then read only.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub basis: Vec<BasisLabel>,
    pub amplitudes: Vec<Vec<Complex64>>,
    pub method: Method,
    pub diagnostics: Vec<String>,
}

impl Trajectory {
    pub fn norm(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    pub fn population(&self, label: BasisLabel) -> Result<Vec<f64>> {
        let i = self
            .basis
            .iter()
            .position(|b| *b == label)
            .ok_or_else(|| AwqError::BasisMismatch(format!("no basis state {label}")))?;
        Ok(self.amplitudes.iter().map(|a| a[i].norm_sqr()).collect())
    }

    /// |⟨w|ψ(t)⟩|².
    pub fn state_population(&self, w: &[Complex64]) -> Vec<f64> {
        self.amplitudes.iter().map(|a| overlap(w, a).norm_sqr()).collect()
    }

    /// Σ over chain sites or chain modes of |ψ_i|².
    pub fn chain_population(&self) -> Vec<f64> {
        let idx: Vec<usize> = (0..self.basis.len()).filter(|&i| self.basis[i].is_chain()).collect();
        self.amplitudes
            .iter()
            .map(|a| idx.iter().map(|&i| a[i].norm_sqr()).sum())
            .collect()
    }

    /// Largest increase of the norm between consecutive samples.
    pub fn max_norm_increase(&self) -> f64 {
        self.norm().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Convenience wrapper: build a propagator and sample it.
pub fn propagate(h: &EffectiveHamiltonian, psi0: &[Complex64], times: &[f64]) -> Result<Trajectory> {
    Propagator::new(h, psi0)?.trajectory(times)
}

/// `n` points from `t_first` to `t_last`, evenly spaced in log t, preceded by 0.
pub fn geometric_grid(t_first: f64, t_last: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    if n == 1 {
        out.push(t_last);
        return out;
    }
    let r = (t_last / t_first).ln();
    for i in 0..n {
        out.push(t_first * (r * i as f64 / (n - 1) as f64).exp());
    }
    out
}

/// `n + 1` evenly spaced points on [0, t_last].
pub fn uniform_grid(t_last: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t_last * i as f64 / n as f64).collect()
}
