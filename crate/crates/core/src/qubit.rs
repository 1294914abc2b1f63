//! Two-level detector: sigma^x branches, Pauli axes and 2x2 density matrices.
//!
//! Matrices carry the basis they are written in. The computational basis is
//! `{|e>, |g>} = {|up>, |down>}` of sigma^z; the branch basis is
//! `{|+>, |->}` of sigma^x with `|+-> = (|up> +- |down>)/sqrt 2`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix2 = [[Complex64; 2]; 2];

const Z: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigenbranch of sigma^x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Branch::Plus => 0,
            Branch::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }

    pub fn flip(self) -> Self {
        Self::from_index(1 - self.index())
    }

    /// Branch holding the ground state of `Delta sigma^x`; `Minus` at
    /// `Delta = 0`, where both are ground states.
    pub fn ground_for(delta: f64) -> Self {
        if delta < 0.0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `H m H` with the Hadamard `H`; converts either way between the two bases.
pub fn hadamard_conjugate(m: &Matrix2) -> Matrix2 {
    let h = FRAC_1_SQRT_2;
    let a = m[0][0];
    let b = m[0][1];
    let c = m[1][0];
    let d = m[1][1];
    [
        [(a + b + c + d) * (h * h), (a - b + c - d) * (h * h)],
        [(a + b - c - d) * (h * h), (a - b - c + d) * (h * h)],
    ]
}

/// Pauli matrix in the computational basis.
pub fn pauli_z_basis(axis: Axis) -> Matrix2 {
    let i = Complex64::new(0.0, 1.0);
    match axis {
        Axis::X => [[Z, ONE], [ONE, Z]],
        Axis::Y => [[Z, -i], [i, Z]],
        Axis::Z => [[ONE, Z], [Z, -ONE]],
    }
}

/// Pauli matrix in the branch basis.
pub fn pauli_x_basis(axis: Axis) -> Matrix2 {
    hadamard_conjugate(&pauli_z_basis(axis))
}

/// Eigenvalues of a Hermitian 2x2 matrix, ascending.
pub fn eigenvalues(m: &Matrix2) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1];
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - r, mean + r]
}

/// Von Neumann entropy in nats.
pub fn entropy(rho: &Matrix2) -> f64 {
    eigenvalues(rho)
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Qubit density matrix, stored in the branch basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Matrix2,
}

impl QubitState {
    /// Validates Hermiticity, unit trace and positivity to 1e-10.
    pub fn from_z_basis(m: Matrix2) -> Result<Self> {
        Self::from_x_basis(hadamard_conjugate(&m))
    }

    pub fn from_x_basis(m: Matrix2) -> Result<Self> {
        let tol = 1e-10;
        if (m[0][1] - m[1][0].conj()).norm() > tol || m[0][0].im.abs() > tol || m[1][1].im.abs() > tol {
            return Err(Error::Domain("qubit density matrix is not Hermitian".into()));
        }
        if ((m[0][0] + m[1][1]).re - 1.0).abs() > tol {
            return Err(Error::Domain("qubit density matrix must have unit trace".into()));
        }
        if eigenvalues(&m)[0] < -tol {
            return Err(Error::Domain("qubit density matrix is not positive".into()));
        }
        Ok(Self { rho: m })
    }

    /// `|psi><psi|` for `psi = a|up> + b|down>`, normalised here.
    pub fn pure_z(a: Complex64, b: Complex64) -> Result<Self> {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n == 0.0 {
            return Err(Error::Domain("zero qubit vector".into()));
        }
        let (a, b) = (a / n, b / n);
        Self::from_z_basis([[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]])
    }

    /// `|g><g|`, the lower sigma^z eigenstate.
    pub fn ground() -> Self {
        Self::pure_z(Z, ONE).expect("unit vector")
    }

    pub fn excited() -> Self {
        Self::pure_z(ONE, Z).expect("unit vector")
    }

    pub fn branch(b: Branch) -> Self {
        let mut rho = [[Z; 2]; 2];
        rho[b.index()][b.index()] = ONE;
        Self { rho }
    }

    pub fn tracial() -> Self {
        Self {
            rho: [[ONE * 0.5, Z], [Z, ONE * 0.5]],
        }
    }

    pub fn x_basis(&self) -> Matrix2 {
        self.rho
    }

    pub fn z_basis(&self) -> Matrix2 {
        hadamard_conjugate(&self.rho)
    }

    /// Amplitudes `(psi_up, psi_down)` of a pure state, up to phase.
    pub fn pure_amplitudes_z(&self) -> Option<[Complex64; 2]> {
        let m = self.z_basis();
        let ev = eigenvalues(&m);
        if ev[0].abs() > 1e-12 {
            return None;
        }
        if m[0][0].re >= m[1][1].re {
            let a = m[0][0].re.sqrt();
            Some([Complex64::new(a, 0.0), m[1][0] / a])
        } else {
            let b = m[1][1].re.sqrt();
            Some([m[0][1] / b, Complex64::new(b, 0.0)])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_is_involution() {
        let m = [[ONE, Complex64::new(0.2, 0.3)], [Complex64::new(-0.4, 1.0), Z]];
        let back = hadamard_conjugate(&hadamard_conjugate(&m));
        for i in 0..2 {
            for j in 0..2 {
                assert!((back[i][j] - m[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sigma_x_is_diagonal_in_branches() {
        let x = pauli_x_basis(Axis::X);
        assert!((x[0][0] - ONE).norm() < 1e-15 && (x[1][1] + ONE).norm() < 1e-15);
        assert!(x[0][1].norm() < 1e-15);
        // sigma^y = i sigma^x sigma^z in the branch basis: (+,-) = i, (-,+) = -i.
        let y = pauli_x_basis(Axis::Y);
        assert!((y[0][1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn ground_in_branch_basis() {
        let g = QubitState::ground().x_basis();
        assert!((g[0][0].re - 0.5).abs() < 1e-15);
        assert!((g[0][1].re + 0.5).abs() < 1e-15);
        assert!(entropy(&g).abs() < 1e-12);
        assert!((entropy(&QubitState::tracial().x_basis()) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(QubitState::from_z_basis([[ONE, Z], [Z, ONE]]).is_err());
        assert!(QubitState::from_z_basis([[ONE * 1.5, Z], [Z, ONE * -0.5]]).is_err());
    }
}
