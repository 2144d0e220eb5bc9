//! Fixed-excitation product-Fock basis and the matrix-free hopping action.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::combinatorics::{binomial_u128, composition_count};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{norm_sqr, Real};

/// Default cap on sector size.
pub const DEFAULT_SECTOR_CAPACITY: usize = 2_000_000;

/// Sizes above this use a parallel gather.
const PARALLEL_THRESHOLD: usize = 4096;

/// All occupation tuples of `modes` modes holding `quanta` quanta.
///
/// States run in descending lexicographic order, `(n, 0, ..)` first. Lookup
/// is by combinatorial ranking, so no hash map is kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    modes: usize,
    quanta: usize,
    occupations: Vec<u32>,
}

impl SectorBasis {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn quanta(&self) -> usize {
        self.quanta
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.occupations[i * self.modes..(i + 1) * self.modes]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.occupations.chunks_exact(self.modes)
    }

    /// Position of `occupation`, or `None` if it is not in this sector.
    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        if occupation.len() != self.modes || occupation.iter().sum::<usize>() != self.quanta {
            return None;
        }
        Some(self.rank(occupation.iter().copied()))
    }

    fn rank(&self, occupation: impl Iterator<Item = usize>) -> usize {
        let mut remaining = self.quanta;
        let mut r: u128 = 0;
        for (j, o) in occupation.enumerate().take(self.modes - 1) {
            let after = (self.modes - j - 1) as u64;
            if o < remaining {
                r += binomial_u128((remaining - o - 1) as u64 + after, after);
            }
            remaining -= o;
        }
        r as usize
    }

    fn rank_u32(&self, occupation: &[u32]) -> usize {
        self.rank(occupation.iter().map(|&o| o as usize))
    }
}

/// Builds the sector basis with the default capacity.
pub fn enumerate_sector(modes: usize, quanta: usize) -> Result<SectorBasis> {
    enumerate_sector_with_capacity(modes, quanta, DEFAULT_SECTOR_CAPACITY)
}

pub fn enumerate_sector_with_capacity(modes: usize, quanta: usize, capacity: usize) -> Result<SectorBasis> {
    if modes == 0 {
        return Err(Error::invalid("a sector needs at least one mode"));
    }
    let size = composition_count(modes, quanta);
    if size > capacity as u128 {
        return Err(Error::Capacity { size, limit: capacity });
    }
    let size = size as usize;
    let mut occupations = Vec::with_capacity(size * modes);
    let mut cur = vec![0u32; modes];
    cur[0] = quanta as u32;
    loop {
        occupations.extend_from_slice(&cur);
        // next composition in descending order: move one quantum rightwards
        let last = modes - 1;
        let tail = cur[last];
        cur[last] = 0;
        let Some(p) = (0..last).rev().find(|&p| cur[p] > 0) else { break };
        cur[p] -= 1;
        cur[p + 1] = tail + 1;
    }
    debug_assert_eq!(occupations.len(), size * modes);
    Ok(SectorBasis { modes, quanta, occupations })
}

/// Amplitudes over a sector basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorStateVector<T> {
    pub basis: Arc<SectorBasis>,
    pub amplitudes: Vec<Complex<T>>,
}

impl<T: Real> SectorStateVector<T> {
    pub fn new(basis: Arc<SectorBasis>, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::Shape { expected: basis.len(), found: amplitudes.len() });
        }
        Ok(Self { basis, amplitudes })
    }

    /// The product Fock state `occupation`, which fixes the sector.
    pub fn fock(occupation: &[usize]) -> Result<Self> {
        let basis = Arc::new(enumerate_sector(occupation.len(), occupation.iter().sum())?);
        Self::fock_in(basis, occupation)
    }

    pub fn fock_in(basis: Arc<SectorBasis>, occupation: &[usize]) -> Result<Self> {
        let idx = basis
            .index_of(occupation)
            .ok_or_else(|| Error::invalid(format!("occupation {occupation:?} not in sector")))?;
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); basis.len()];
        amplitudes[idx] = Complex::new(T::one(), T::zero());
        Ok(Self { basis, amplitudes })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> T {
        norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn amplitude(&self, occupation: &[usize]) -> Option<Complex<T>> {
        self.basis.index_of(occupation).map(|i| self.amplitudes[i])
    }

    pub fn probability(&self, occupation: &[usize]) -> Option<T> {
        self.amplitude(occupation).map(|a| a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨n̂_mode⟩`.
    pub fn mean_occupation(&self, mode: usize) -> T {
        self.basis
            .iter()
            .zip(&self.amplitudes)
            .map(|(occ, a)| a.norm_sqr() * T::from_count(occ[mode] as usize))
            .sum()
    }

    /// CSV rows `n1,...,nm,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for k in 0..self.basis.modes() {
            out.push_str(&format!("n{},", k + 1));
        }
        out.push_str("re,im\n");
        for (occ, a) in self.basis.iter().zip(&self.amplitudes) {
            for o in occ {
                out.push_str(&format!("{o},"));
            }
            out.push_str(&format!("{:.17e},{:.17e}\n", a.re.to_f64_lossy(), a.im.to_f64_lossy()));
        }
        out
    }
}

/// Sparse structure of the hopping terms for a fixed set of coupled pairs.
///
/// Row `i` lists the source states `l` with `⟨i| a†_j a_k + a†_k a_j |l⟩ ≠ 0`,
/// the pair index and the ladder factor.
#[derive(Clone, Debug)]
pub(crate) struct HoppingTable<T> {
    pub pairs: Vec<(usize, usize)>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    pair_of: Vec<u32>,
    factor: Vec<T>,
    /// Occupations per state, used for the diagonal.
    occupations: Vec<u32>,
    modes: usize,
}

impl<T: Real> HoppingTable<T> {
    pub fn build(basis: &SectorBasis, pairs: &[(usize, usize)]) -> Self {
        let m = basis.modes();
        let rows: Vec<Vec<(u32, u32, T)>> = (0..basis.len())
            .into_par_iter()
            .map(|i| {
                let occ = basis.state(i);
                let mut scratch = occ.to_vec();
                let mut row = Vec::new();
                for (p, &(j, k)) in pairs.iter().enumerate() {
                    // a†_j a_k maps l = i - e_j + e_k onto i, and symmetrically
                    for (dst, src) in [(j, k), (k, j)] {
                        if occ[dst] == 0 {
                            continue;
                        }
                        let f = (T::from_count(occ[dst] as usize) * T::from_count(occ[src] as usize + 1)).sqrt();
                        scratch[dst] -= 1;
                        scratch[src] += 1;
                        row.push((basis.rank_u32(&scratch) as u32, p as u32, f));
                        scratch[dst] += 1;
                        scratch[src] -= 1;
                    }
                }
                row
            })
            .collect();
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let (mut cols, mut pair_of, mut factor) = (Vec::with_capacity(nnz), Vec::with_capacity(nnz), Vec::with_capacity(nnz));
        for row in rows {
            for (c, p, f) in row {
                cols.push(c);
                pair_of.push(p);
                factor.push(f);
            }
            row_ptr.push(cols.len());
        }
        Self { pairs: pairs.to_vec(), row_ptr, cols, pair_of, factor, occupations: basis.occupations.clone(), modes: m }
    }

    pub fn len(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// Diagonal energies `Σ_j Γ_jj n_j - shift`.
    pub fn diagonal(&self, gamma: &Matrix<T>, shift: T) -> Vec<T> {
        self.occupations
            .chunks_exact(self.modes)
            .map(|occ| occ.iter().enumerate().map(|(j, &n)| gamma[(j, j)] * T::from_count(n as usize)).sum::<T>() - shift)
            .collect()
    }

    pub fn couplings(&self, gamma: &Matrix<T>) -> Vec<T> {
        self.pairs.iter().map(|&(j, k)| gamma[(j, k)]).collect()
    }

    /// `out = scale · (D + hopping) · x` with hopping strengths per pair.
    pub fn apply_into(&self, diag: &[T], coupling: &[T], scale: Complex<T>, x: &[Complex<T>], out: &mut [Complex<T>]) {
        let row = |i: usize| -> Complex<T> {
            let mut acc = x[i] * diag[i];
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + x[self.cols[e] as usize] * (coupling[self.pair_of[e] as usize] * self.factor[e]);
            }
            acc * scale
        };
        if self.len() >= PARALLEL_THRESHOLD {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = row(i));
        } else {
            out.iter_mut().enumerate().for_each(|(i, o)| *o = row(i));
        }
    }

    /// Dense sector Hamiltonian, for the eigen path.
    pub fn dense(&self, diag: &[T], coupling: &[T]) -> Matrix<T> {
        let n = self.len();
        let mut h = Matrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = diag[i];
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                h[(i, self.cols[e] as usize)] = h[(i, self.cols[e] as usize)] + coupling[self.pair_of[e] as usize] * self.factor[e];
            }
        }
        h
    }
}

/// Off-diagonal pairs `(j, k)`, `j < k`, with a nonzero entry in `gamma`.
pub(crate) fn nonzero_pairs<T: Real>(gamma: &Matrix<T>) -> Vec<(usize, usize)> {
    let n = gamma.rows();
    let mut pairs = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            if gamma[(j, k)] != T::zero() || gamma[(k, j)] != T::zero() {
                pairs.push((j, k));
            }
        }
    }
    pairs
}

pub(crate) fn check_gamma<T: Real>(gamma: &Matrix<T>, modes: usize) -> Result<()> {
    if !gamma.is_square() || gamma.rows() != modes {
        return Err(Error::Shape { expected: modes, found: gamma.rows() });
    }
    let asym = gamma.max_abs_diff(&gamma.transpose());
    if asym > T::zero() {
        return Err(Error::Numeric { what: "coupling matrix symmetry".into(), residual: asym.to_f64_lossy() });
    }
    Ok(())
}

/// `H ψ` for `H = Σ Γ_jj n̂_j + Σ_{j<k} Γ_jk (a†_j a_k + a†_k a_j)`.
pub fn apply_hamiltonian<T: Real>(state: &SectorStateVector<T>, gamma: &Matrix<T>) -> Result<SectorStateVector<T>> {
    check_gamma(gamma, state.basis.modes())?;
    let table = HoppingTable::build(&state.basis, &nonzero_pairs(gamma));
    let diag = table.diagonal(gamma, T::zero());
    let coupling = table.couplings(gamma);
    let mut out = vec![Complex::new(T::zero(), T::zero()); state.len()];
    table.apply_into(&diag, &coupling, Complex::new(T::one(), T::zero()), &state.amplitudes, &mut out);
    Ok(SectorStateVector { basis: state.basis.clone(), amplitudes: out })
}
