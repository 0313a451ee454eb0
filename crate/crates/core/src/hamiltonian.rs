//! Dense single-excitation Hamiltonians with labelled bases.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{AwqError, Result};
use crate::greens::Parity;
use crate::linalg::{self, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Atom {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    E,
    G1,
}

/// One single-excitation basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BasisLabel {
    /// Excitation on chain site i (1-based).
    Site(usize),
    /// Excitation in the ansatz chain mode ν.
    Mode(usize),
    /// One impurity atom of dimer `dimer` in `level`.
    Atom { dimer: usize, atom: Atom, level: Level },
    /// Dimer state (|a⟩ + λ|b⟩)/√2 of the active impurity level.
    Dimer { dimer: usize, parity: Parity },
}

impl BasisLabel {
    pub fn is_chain(&self) -> bool {
        matches!(self, BasisLabel::Site(_) | BasisLabel::Mode(_))
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BasisLabel::Site(i) => write!(f, "site{i}"),
            BasisLabel::Mode(nu) => write!(f, "mode{nu}"),
            BasisLabel::Atom { dimer, atom, level } => {
                let a = if atom == Atom::A { "a" } else { "b" };
                let l = if level == Level::E { "e" } else { "g1" };
                write!(f, "dimer{dimer}{a}_{l}")
            }
            BasisLabel::Dimer { dimer, parity } => {
                let p = if parity == Parity::Anti { "minus" } else { "plus" };
                write!(f, "dimer{dimer}_{p}")
            }
        }
    }
}

/// Energy reference of a Hamiltonian. `Canonical` measures energies from
/// ω0 in the frame rotating with the Raman drive (identical to the lab frame
/// when undriven); `Shifted` adds Δ − ω0^imp to every diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Frame {
    Canonical,
    Shifted { offset: f64 },
}

impl Frame {
    fn offset(self) -> f64 {
        match self {
            Frame::Canonical => 0.0,
            Frame::Shifted { offset } => offset,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub matrix: CMat,
    pub basis: Vec<BasisLabel>,
    pub frame: Frame,
}

impl EffectiveHamiltonian {
    pub fn new(matrix: CMat, basis: Vec<BasisLabel>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(AwqError::BasisMismatch(format!(
                "{}x{} matrix with {} labels",
                matrix.nrows(),
                matrix.ncols(),
                basis.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for b in &basis {
            if !seen.insert(*b) {
                return Err(AwqError::BasisMismatch(format!("duplicate basis label {b}")));
            }
        }
        Ok(Self {
            matrix,
            basis,
            frame: Frame::Canonical,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, label: BasisLabel) -> Option<usize> {
        self.basis.iter().position(|b| *b == label)
    }

    /// Unit vector on one basis label.
    pub fn unit(&self, label: BasisLabel) -> Result<Vec<Complex64>> {
        let i = self
            .index_of(label)
            .ok_or_else(|| AwqError::BasisMismatch(format!("no basis state {label}")))?;
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[i] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// The dimer state of parity λ for dimer `i`, in whatever representation
    /// the basis uses: a dimer label directly, or (|a⟩ + λ|b⟩)/√2 over the
    /// |g1⟩ levels (driven) or |e⟩ levels (undriven).
    pub fn dimer_state(&self, dimer: usize, parity: Parity) -> Result<Vec<Complex64>> {
        if let Some(i) = self.index_of(BasisLabel::Dimer { dimer, parity }) {
            let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
            v[i] = Complex64::new(1.0, 0.0);
            return Ok(v);
        }
        let level = if self.index_of(BasisLabel::Atom { dimer, atom: Atom::A, level: Level::G1 }).is_some() {
            Level::G1
        } else {
            Level::E
        };
        let ia = self.index_of(BasisLabel::Atom { dimer, atom: Atom::A, level });
        let ib = self.index_of(BasisLabel::Atom { dimer, atom: Atom::B, level });
        match (ia, ib) {
            (Some(ia), Some(ib)) => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
                v[ia] = Complex64::new(r, 0.0);
                v[ib] = Complex64::new(parity.sign() * r, 0.0);
                Ok(v)
            }
            _ => Err(AwqError::BasisMismatch(format!("dimer {dimer} is not part of this basis"))),
        }
    }

    /// Indices of chain sites or chain modes.
    pub fn chain_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.basis[i].is_chain()).collect()
    }

    /// Re-express in another frame: a rigid shift of the diagonal.
    pub fn with_frame(&self, frame: Frame) -> Self {
        let shift = frame.offset() - self.frame.offset();
        let mut m = self.matrix.clone();
        for i in 0..self.dim() {
            m[(i, i)] += shift;
        }
        Self {
            matrix: m,
            basis: self.basis.clone(),
            frame,
        }
    }

    /// Largest eigenvalue of Im H; ≤ 0 for a passive Hamiltonian.
    pub fn gain_bound(&self) -> Result<f64> {
        linalg::max_eig_imag_part(&self.matrix)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        linalg::asymmetry(&self.matrix) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_unique_and_printable() {
        let basis = vec![
            BasisLabel::Site(1),
            BasisLabel::Atom { dimer: 0, atom: Atom::A, level: Level::G1 },
            BasisLabel::Atom { dimer: 0, atom: Atom::B, level: Level::G1 },
        ];
        let h = EffectiveHamiltonian::new(CMat::zeros(3, 3), basis.clone()).unwrap();
        assert_eq!(basis[1].to_string(), "dimer0a_g1");
        let v = h.dimer_state(0, Parity::Anti).unwrap();
        assert!((v[2].re + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(h.chain_indices(), vec![0]);
        let dup = vec![BasisLabel::Mode(1), BasisLabel::Mode(1)];
        assert!(EffectiveHamiltonian::new(CMat::zeros(2, 2), dup).is_err());
    }

    #[test]
    fn frame_shift_is_rigid() {
        let m = CMat::from_fn(2, 2, |i, j| if i == j { Complex64::new(i as f64, -0.5) } else { Complex64::new(0.1, 0.0) });
        let h = EffectiveHamiltonian::new(m, vec![BasisLabel::Site(1), BasisLabel::Site(2)]).unwrap();
        let s = h.with_frame(Frame::Shifted { offset: 3.0 });
        let e0 = linalg::eig(&h.matrix).unwrap().values;
        let e1 = linalg::eig(&s.matrix).unwrap().values;
        let mut a: Vec<f64> = e0.iter().map(|z| z.re + 3.0).collect();
        let mut b: Vec<f64> = e1.iter().map(|z| z.re).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        let back = s.with_frame(Frame::Canonical);
        assert!((back.matrix[(1, 1)] - h.matrix[(1, 1)]).norm() < 1e-15);
    }
}
