//! Brute-force reference propagation.
//!
//! Undriven networks conserve the total excitation number, so the exact
//! dynamics lives in one finite sector. The driven two-mode system breaks that
//! symmetry and is integrated on a truncated Fock box instead.

mod compare;
mod propagate;
mod sector;
mod truncated;

pub use compare::*;
pub use propagate::*;
pub use sector::{apply_hamiltonian, enumerate_sector, enumerate_sector_with_capacity, SectorBasis, SectorStateVector, DEFAULT_SECTOR_CAPACITY};
pub use truncated::*;

use crate::coupling::TwoModeSystem;
use crate::error::Result;
use crate::linalg::Matrix;
use crate::multimode::{ChainSystem, ThreeModeSystem};
use crate::scalar::Real;

/// Quadratic number-conserving boson Hamiltonian `Σ Γ_jk a†_j a_k`.
pub trait BosonicNetwork<T: Real> {
    fn mode_count(&self) -> usize;

    /// Real symmetric `Γ(t)`; the diagonal holds the mode frequencies.
    fn coefficient_matrix(&self, t: T) -> Result<Matrix<T>>;

    fn is_time_independent(&self) -> bool;

    /// Pairs `(j, k)`, `j < k`, that may couple at some time.
    fn coupled_pairs(&self) -> Vec<(usize, usize)>;

    /// Times in `(0, t)` where `Γ` is not smooth; the integrator lands on them.
    fn breakpoints(&self, t: T) -> Vec<T>;
}

impl<T: Real> BosonicNetwork<T> for TwoModeSystem<T> {
    fn mode_count(&self) -> usize {
        2
    }

    fn coefficient_matrix(&self, t: T) -> Result<Matrix<T>> {
        let g = self.schedule.eval(t)?;
        Matrix::from_rows(&[vec![self.omega0, g], vec![g, self.omega]])
    }

    fn is_time_independent(&self) -> bool {
        self.schedule.is_constant()
    }

    fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        if self.schedule.is_identically_zero() {
            vec![]
        } else {
            vec![(0, 1)]
        }
    }

    fn breakpoints(&self, t: T) -> Vec<T> {
        self.schedule.breakpoints(t)
    }
}

impl<T: Real> BosonicNetwork<T> for ThreeModeSystem<T> {
    fn mode_count(&self) -> usize {
        3
    }

    fn coefficient_matrix(&self, t: T) -> Result<Matrix<T>> {
        ThreeModeSystem::coefficient_matrix(self, t)
    }

    fn is_time_independent(&self) -> bool {
        self.g.is_constant() && self.g_prime.is_constant()
    }

    fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        let mut p = Vec::new();
        if !self.g.is_identically_zero() {
            p.push((0, 1));
        }
        if !self.g_prime.is_identically_zero() {
            p.push((0, 2));
        }
        p
    }

    fn breakpoints(&self, t: T) -> Vec<T> {
        let mut b = self.g.breakpoints(t);
        b.extend(self.g_prime.breakpoints(t));
        b
    }
}

impl<T: Real> BosonicNetwork<T> for ChainSystem<T> {
    fn mode_count(&self) -> usize {
        self.modes()
    }

    fn coefficient_matrix(&self, t: T) -> Result<Matrix<T>> {
        ChainSystem::coefficient_matrix(self, t)
    }

    fn is_time_independent(&self) -> bool {
        ChainSystem::is_time_independent(self)
    }

    fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        self.couplings
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.is_identically_zero())
            .map(|(k, _)| (k, k + 1))
            .collect()
    }

    fn breakpoints(&self, t: T) -> Vec<T> {
        self.couplings.iter().flat_map(|g| g.breakpoints(t)).collect()
    }
}

/// A fixed coefficient matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct StaticNetwork<T> {
    pub gamma: Matrix<T>,
}

impl<T: Real> BosonicNetwork<T> for StaticNetwork<T> {
    fn mode_count(&self) -> usize {
        self.gamma.rows()
    }

    fn coefficient_matrix(&self, _t: T) -> Result<Matrix<T>> {
        Ok(self.gamma.clone())
    }

    fn is_time_independent(&self) -> bool {
        true
    }

    fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        sector::nonzero_pairs(&self.gamma)
    }

    fn breakpoints(&self, _t: T) -> Vec<T> {
        Vec::new()
    }
}
