//! Three equal-frequency modes in a star (`a` coupled to `b` and `c`) in
//! closed form, and nearest-neighbour chains of `n` modes by numeric
//! diagonalization of the tridiagonal coefficient matrix.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{compositions, multinomial};
use crate::coupling::CouplingSchedule;
use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_eigen, Matrix};
use crate::quadrature::integrate_real;
use crate::scalar::{cis, Real};

/// `ω0 (a†a + b†b + c†c) + g(t)(a†b + h.c.) + g'(t)(a†c + h.c.)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeModeSystem<T> {
    pub omega0: T,
    pub g: CouplingSchedule<T>,
    pub g_prime: CouplingSchedule<T>,
}

/// Orthogonal `T` with `Tᵗ Γ T = diag(lambdas)`; columns are normal modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition<T> {
    pub transform: Matrix<T>,
    pub lambdas: Vec<T>,
    pub t: T,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn orthogonality_residual(&self) -> T {
        self.transform.orthogonality_residual()
    }

    /// `max |Tᵗ Γ T - diag(λ)|`.
    pub fn diagonalization_residual(&self, gamma: &Matrix<T>) -> Result<T> {
        let d = self.transform.transpose().matmul(gamma)?.matmul(&self.transform)?;
        let mut lam = Matrix::zeros(self.lambdas.len(), self.lambdas.len());
        for (i, &l) in self.lambdas.iter().enumerate() {
            lam[(i, i)] = l;
        }
        Ok(d.max_abs_diff(&lam))
    }
}

/// Probabilities over occupation tuples, in descending lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupationDistribution<T> {
    pub modes: usize,
    pub entries: Vec<(Vec<usize>, T)>,
}

impl<T: Real> OccupationDistribution<T> {
    pub fn probability(&self, occupation: &[usize]) -> Option<T> {
        self.entries.iter().find(|(o, _)| o.as_slice() == occupation).map(|(_, p)| *p)
    }

    pub fn total(&self) -> T {
        self.entries.iter().map(|(_, p)| *p).sum()
    }

    /// CSV rows `i1,...,im,probability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for k in 0..self.modes {
            out.push_str(&format!("n{},", k + 1));
        }
        out.push_str("probability\n");
        for (occ, p) in &self.entries {
            for o in occ {
                out.push_str(&format!("{o},"));
            }
            out.push_str(&format!("{:.17e}\n", p.to_f64_lossy()));
        }
        out
    }
}

impl<T: Real> ThreeModeSystem<T> {
    pub fn new(omega0: T, g: CouplingSchedule<T>, g_prime: CouplingSchedule<T>) -> Result<Self> {
        let s = Self { omega0, g, g_prime };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > T::zero()) {
            return Err(Error::invalid("omega0 must be positive"));
        }
        self.g.validate()?;
        self.g_prime.validate()
    }

    /// `G3(t) = √(g² + g'²)`.
    pub fn total_coupling(&self, t: T) -> Result<T> {
        Ok(self.g.eval(t)?.hypot(self.g_prime.eval(t)?))
    }

    fn decoupled(&self) -> bool {
        self.g.is_identically_zero() && self.g_prime.is_identically_zero()
    }

    /// `η(t) = ∫₀ᵗ G3`.
    pub fn eta(&self, t: T, tol: T) -> Result<T> {
        match (&self.g, &self.g_prime) {
            (CouplingSchedule::Constant { g0: a }, CouplingSchedule::Constant { g0: b }) => Ok(a.hypot(*b) * t),
            _ => {
                let mut bps = self.g.breakpoints(t);
                bps.extend(self.g_prime.breakpoints(t));
                integrate_real(|x| self.total_coupling(x), T::zero(), t, &bps, None, tol)
            }
        }
    }

    /// Coefficient matrix `Λ(t)` of the star.
    pub fn coefficient_matrix(&self, t: T) -> Result<Matrix<T>> {
        let (g, gp) = (self.g.eval(t)?, self.g_prime.eval(t)?);
        let w = self.omega0;
        let z = T::zero();
        Matrix::from_rows(&[vec![w, g, gp], vec![g, w, z], vec![gp, z, w]])
    }

    /// True when `g/g'` stays fixed on `[t0, t1]`, which keeps `T` constant.
    pub fn has_constant_ratio(&self, t0: T, t1: T) -> Result<bool> {
        const SAMPLES: usize = 256;
        let mut reference: Option<(T, T)> = None;
        for k in 0..=SAMPLES {
            let t = t0 + (t1 - t0) * T::from_count(k) / T::from_count(SAMPLES);
            let (g, gp) = (self.g.eval(t)?, self.g_prime.eval(t)?);
            let mag = g.hypot(gp);
            if mag == T::zero() {
                continue;
            }
            let dir = (g / mag, gp / mag);
            match reference {
                None => reference = Some(dir),
                Some(r) if (r.0 - dir.0).abs() + (r.1 - dir.1).abs() > T::lit(1e-12) => return Ok(false),
                _ => {}
            }
        }
        Ok(true)
    }

    fn direction(&self, t: T) -> Result<(T, T)> {
        let gt = self.total_coupling(t)?;
        if gt == T::zero() {
            return Err(Error::DegenerateCoupling { t: t.to_f64_lossy() });
        }
        Ok((self.g.eval(t)? / gt, self.g_prime.eval(t)? / gt))
    }
}

/// Closed-form normal modes of the star: `λ = (ω0 - G3, ω0, ω0 + G3)`.
///
/// Columns of `T` (rows index `a, b, c`):
/// `A = (-1, g/G3, g'/G3)/√2`, `B = (0, -g'/G3, g/G3)`, `C = (1, g/G3, g'/G3)/√2`.
pub fn three_mode_decomposition<T: Real>(system: &ThreeModeSystem<T>, t: T) -> Result<SpectralDecomposition<T>> {
    let w = system.omega0;
    if system.decoupled() {
        return Ok(SpectralDecomposition { transform: Matrix::identity(3), lambdas: vec![w; 3], t });
    }
    let gt = system.total_coupling(t)?;
    let (x, y) = system.direction(t)?;
    let r = T::FRAC_1_SQRT_2();
    let z = T::zero();
    let transform = Matrix::from_rows(&[
        vec![-r, z, r],
        vec![x * r, -y, x * r],
        vec![y * r, x, y * r],
    ])?;
    Ok(SpectralDecomposition { transform, lambdas: vec![w - gt, w, w + gt], t })
}

/// Amplitudes on `(|100⟩, |010⟩, |001⟩)` for the initial state `|100⟩`.
pub fn single_excitation_state<T: Real>(system: &ThreeModeSystem<T>, t: T, tol: T) -> Result<[Complex<T>; 3]> {
    let phase = cis(-system.omega0 * t);
    if system.decoupled() {
        let z = Complex::new(T::zero(), T::zero());
        return Ok([phase, z, z]);
    }
    let (x, y) = system.direction(t)?;
    let eta = system.eta(t, tol)?;
    let (s, c) = eta.sin_cos();
    let mis = Complex::new(T::zero(), -s) * phase;
    Ok([phase * c, mis * x, mis * y])
}

/// Transfer weights `(cos²η, (g/G3)² sin²η, (g'/G3)² sin²η)`.
pub fn single_excitation_probabilities<T: Real>(system: &ThreeModeSystem<T>, t: T, tol: T) -> Result<[T; 3]> {
    if system.decoupled() {
        return Ok([T::one(), T::zero(), T::zero()]);
    }
    let (x, y) = system.direction(t)?;
    let eta = system.eta(t, tol)?;
    let (s, c) = eta.sin_cos();
    Ok([c * c, x * x * s * s, y * y * s * s])
}

/// `P_ijk = n!/(i!j!k!) (cos²η)^i ((g/G3)² sin²η)^j ((g'/G3)² sin²η)^k`
/// for the initial state `|n00⟩`.
pub fn multinomial_probabilities<T: Real>(n: usize, system: &ThreeModeSystem<T>, t: T, tol: T) -> Result<OccupationDistribution<T>> {
    let w = single_excitation_probabilities(system, t, tol)?;
    Ok(distribute(n, &w))
}

fn distribute<T: Real>(n: usize, weights: &[T]) -> OccupationDistribution<T> {
    let entries = compositions(weights.len(), n)
        .into_iter()
        .map(|occ| {
            let p = occ
                .iter()
                .zip(weights)
                .fold(multinomial::<T>(&occ), |acc, (&k, &w)| acc * w.powi(k as i32));
            (occ, p)
        })
        .collect();
    OccupationDistribution { modes: weights.len(), entries }
}

/// `ω0 Σ a†_k a_k + Σ g_k(t)(a_k a†_{k+1} + h.c.)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSystem<T> {
    pub omega0: T,
    pub couplings: Vec<CouplingSchedule<T>>,
}

impl<T: Real> ChainSystem<T> {
    pub fn new(omega0: T, couplings: Vec<CouplingSchedule<T>>) -> Result<Self> {
        let s = Self { omega0, couplings };
        s.validate()?;
        Ok(s)
    }

    /// `n` modes joined by the same constant coupling.
    pub fn uniform(omega0: T, g: T, modes: usize) -> Result<Self> {
        Self::new(omega0, vec![CouplingSchedule::constant(g); modes.saturating_sub(1)])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > T::zero()) {
            return Err(Error::invalid("omega0 must be positive"));
        }
        if self.couplings.is_empty() {
            return Err(Error::invalid("a chain needs at least 2 modes"));
        }
        self.couplings.iter().try_for_each(CouplingSchedule::validate)
    }

    pub fn modes(&self) -> usize {
        self.couplings.len() + 1
    }

    pub fn is_time_independent(&self) -> bool {
        self.couplings.iter().all(CouplingSchedule::is_constant)
    }

    /// Tridiagonal `Γ(t)`.
    pub fn coefficient_matrix(&self, t: T) -> Result<Matrix<T>> {
        let n = self.modes();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.omega0;
        }
        for (k, g) in self.couplings.iter().enumerate() {
            let v = g.eval(t)?;
            m[(k, k + 1)] = v;
            m[(k + 1, k)] = v;
        }
        Ok(m)
    }
}

/// Eigendecomposition of `Γ(t)` by implicit-shift QL; ascending eigenvalues.
pub fn chain_decomposition<T: Real>(system: &ChainSystem<T>, t: T, tol: T) -> Result<SpectralDecomposition<T>> {
    system.validate()?;
    let diag = vec![system.omega0; system.modes()];
    let off = system.couplings.iter().map(|g| g.eval(t)).collect::<Result<Vec<_>>>()?;
    let eig = tridiagonal_eigen(&diag, &off)?;
    let residual = eig.vectors.orthogonality_residual();
    if residual > tol {
        return Err(Error::Numeric { what: "chain eigenvector orthogonality".into(), residual: residual.to_f64_lossy() });
    }
    Ok(SpectralDecomposition { transform: eig.vectors, lambdas: eig.values, t })
}

fn require_constant_chain<T: Real>(system: &ChainSystem<T>, source: usize) -> Result<()> {
    if !system.is_time_independent() {
        return Err(Error::unsupported("chain amplitudes need constant couplings; use the oracle"));
    }
    if source >= system.modes() {
        return Err(Error::invalid(format!("source mode {source} outside chain of {}", system.modes())));
    }
    Ok(())
}

/// One quantum starting in `source`: `amp_j = Σ_k T[j][k] e^{-iλ_k t} T[source][k]`.
pub fn chain_single_excitation_amplitudes<T: Real>(system: &ChainSystem<T>, source: usize, t: T) -> Result<Vec<Complex<T>>> {
    require_constant_chain(system, source)?;
    let n = system.modes();
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0) * T::from_count(n));
    let dec = chain_decomposition(system, T::zero(), tol)?;
    let phases: Vec<Complex<T>> = dec.lambdas.iter().map(|&l| cis(-l * t)).collect();
    Ok((0..n)
        .map(|j| {
            (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                acc + phases[k] * (dec.transform[(j, k)] * dec.transform[(source, k)])
            })
        })
        .collect())
}

/// `n` quanta starting in `source`: multinomial spreading over the chain.
pub fn chain_multinomial_probabilities<T: Real>(
    n: usize,
    system: &ChainSystem<T>,
    source: usize,
    t: T,
) -> Result<OccupationDistribution<T>> {
    let amps = chain_single_excitation_amplitudes(system, source, t)?;
    let w: Vec<T> = amps.iter().map(|a| a.norm_sqr()).collect();
    Ok(distribute(n, &w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(g: f64, gp: f64) -> ThreeModeSystem<f64> {
        ThreeModeSystem::new(1.0, CouplingSchedule::constant(g), CouplingSchedule::constant(gp)).unwrap()
    }

    #[test]
    fn equal_couplings_transform_entries() {
        let dec = three_mode_decomposition(&star(0.2, 0.2), 0.0).unwrap();
        let t = &dec.transform;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((t[(0, 0)] + r).abs() < 1e-15 && (t[(0, 2)] - r).abs() < 1e-15);
        assert!((t[(1, 0)] - 0.5).abs() < 1e-15 && (t[(2, 2)] - 0.5).abs() < 1e-15);
        assert!((t[(1, 1)] + r).abs() < 1e-15 && (t[(2, 1)] - r).abs() < 1e-15);
        assert!(dec.orthogonality_residual() < 1e-15);
    }

    #[test]
    fn pythagorean_spectrum() {
        let sys = ThreeModeSystem::new(10.0, CouplingSchedule::constant(3.0), CouplingSchedule::constant(4.0)).unwrap();
        let dec = three_mode_decomposition(&sys, 1.0).unwrap();
        assert_eq!(dec.lambdas, vec![5.0, 10.0, 15.0]);
        let gamma = sys.coefficient_matrix(1.0).unwrap();
        assert!(dec.diagonalization_residual(&gamma).unwrap() < 1e-14);
    }

    #[test]
    fn degenerate_coupling_handling() {
        let off = star(0.0, 0.0);
        let dec = three_mode_decomposition(&off, 2.0).unwrap();
        assert_eq!(dec.transform, Matrix::identity(3));
        let sw = ThreeModeSystem::new(
            1.0,
            CouplingSchedule::switch(0.3, 1.0).unwrap(),
            CouplingSchedule::switch(0.4, 1.0).unwrap(),
        )
        .unwrap();
        assert!(three_mode_decomposition(&sw, 0.5).is_ok());
        assert!(matches!(three_mode_decomposition(&sw, 2.0), Err(Error::DegenerateCoupling { .. })));
        let amps = single_excitation_state(&off, 1.0, 1e-10).unwrap();
        assert!((amps[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_excitation_examples() {
        let sys = star(0.3, 0.4);
        let a0 = single_excitation_state(&sys, 0.0, 1e-10).unwrap();
        assert!((a0[0] - Complex::new(1.0, 0.0)).norm() < 1e-15 && a0[1].norm() == 0.0);
        let t = 1.7;
        let eta: f64 = 0.5 * t;
        let p = single_excitation_probabilities(&sys, t, 1e-10).unwrap();
        assert!((p[0] - eta.cos().powi(2)).abs() < 1e-15);
        assert!((p[1] - 0.36 * eta.sin().powi(2)).abs() < 1e-15);
        assert!((p[2] - 0.64 * eta.sin().powi(2)).abs() < 1e-15);

        let eq = star(0.25, 0.25);
        let t_half = std::f64::consts::FRAC_PI_2 / eq.total_coupling(0.0).unwrap();
        let a = single_excitation_state(&eq, t_half, 1e-10).unwrap();
        assert!(a[0].norm() < 1e-15);
        assert!((a[1].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((a[1] - a[2]).norm() < 1e-15);
    }

    #[test]
    fn multinomial_examples() {
        let sys = star(0.3, 0.4);
        let t = 2.2;
        let one = multinomial_probabilities(1, &sys, t, 1e-10).unwrap();
        let single = single_excitation_probabilities(&sys, t, 1e-10).unwrap();
        assert_eq!(one.probability(&[1, 0, 0]).unwrap(), single[0]);
        assert_eq!(one.probability(&[0, 0, 1]).unwrap(), single[2]);
        let two = multinomial_probabilities(2, &sys, t, 1e-10).unwrap();
        assert!((two.total() - 1.0).abs() < 1e-15);
        let eta: f64 = 0.5 * t;
        let expect = 2.0 * eta.cos().powi(2) * 0.36 * eta.sin().powi(2);
        assert!((two.probability(&[1, 1, 0]).unwrap() - expect).abs() < 1e-15);
        // |g/(√2 G3) sin 2η|²
        let direct = (0.6 / 2f64.sqrt() * (2.0 * eta).sin()).powi(2);
        assert!((two.probability(&[1, 1, 0]).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn constant_ratio_detection() {
        let same = ThreeModeSystem::new(
            1.0,
            CouplingSchedule::exp_decay(0.3, 2.0).unwrap(),
            CouplingSchedule::exp_decay(0.6, 2.0).unwrap(),
        )
        .unwrap();
        assert!(same.has_constant_ratio(0.0, 5.0).unwrap());
        let mixed = ThreeModeSystem::new(1.0, CouplingSchedule::exp_decay(0.3, 2.0).unwrap(), CouplingSchedule::constant(0.3)).unwrap();
        assert!(!mixed.has_constant_ratio(0.0, 5.0).unwrap());
        let eta = same.eta(3.0, 1e-12).unwrap();
        let expect = 0.3f64.hypot(0.6) * 2.0 * (1.0 - (-1.5f64).exp());
        assert!((eta - expect).abs() < 1e-11);
    }

    #[test]
    fn chain_examples() {
        let two = ChainSystem::new(1.0, vec![CouplingSchedule::constant(0.4)]).unwrap();
        let dec = chain_decomposition(&two, 0.0, 1e-12).unwrap();
        assert!(f64::abs(dec.lambdas[0] - 0.6) < 1e-15 && f64::abs(dec.lambdas[1] - 1.4) < 1e-15);

        let three = ChainSystem::new(1.0, vec![CouplingSchedule::constant(0.3), CouplingSchedule::constant(0.4)]).unwrap();
        let dec = chain_decomposition(&three, 0.0, 1e-12).unwrap();
        for (l, e) in dec.lambdas.iter().zip([0.5, 1.0, 1.5]) {
            assert!(f64::abs(l - e) < 1e-14);
        }
        let gamma = three.coefficient_matrix(0.0).unwrap();
        assert!(dec.diagonalization_residual(&gamma).unwrap() < 1e-14);

        let flat = ChainSystem::uniform(2.0, 0.0, 4).unwrap();
        let dec = chain_decomposition(&flat, 0.0, 1e-12).unwrap();
        assert_eq!(dec.transform, Matrix::identity(4));
        assert!(dec.lambdas.iter().all(|&l| l == 2.0));
        assert!(ChainSystem::<f64>::new(1.0, vec![]).is_err());
    }

    #[test]
    fn chain_two_mode_amplitudes() {
        let (g, t) = (0.35, 1.9);
        let two = ChainSystem::uniform(1.0, g, 2).unwrap();
        let amps = chain_single_excitation_amplitudes(&two, 0, t).unwrap();
        let ph = cis(-t);
        assert!((amps[0] - ph * f64::cos(g * t)).norm() < 1e-14);
        assert!((amps[1] - ph * Complex::new(0.0, -f64::sin(g * t))).norm() < 1e-14);
        let start = chain_single_excitation_amplitudes(&two, 1, 0.0).unwrap();
        assert!((start[1] - Complex::new(1.0, 0.0)).norm() < 1e-15 && start[0].norm() < 1e-15);
    }

    #[test]
    fn chain_unitarity_and_spectrum_symmetry() {
        let chain = ChainSystem::uniform(1.0, 0.2, 6).unwrap();
        let amps = chain_single_excitation_amplitudes(&chain, 2, 7.3).unwrap();
        let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-13);
        let dec = chain_decomposition(&chain, 0.0, 1e-12).unwrap();
        let n = dec.lambdas.len();
        for k in 0..n {
            assert!((dec.lambdas[k] - 1.0 + dec.lambdas[n - 1 - k] - 1.0).abs() < 1e-14);
        }
        let dist = chain_multinomial_probabilities(3, &chain, 2, 7.3).unwrap();
        assert!((dist.total() - 1.0).abs() < 1e-13);
        assert_eq!(dist.entries.len(), 56);
    }

    #[test]
    fn chain_refuses_time_dependence() {
        let chain = ChainSystem::new(1.0, vec![CouplingSchedule::exp_decay(0.3, 1.0).unwrap()]).unwrap();
        assert!(matches!(chain_single_excitation_amplitudes(&chain, 0, 1.0), Err(Error::Unsupported(_))));
        let ok = ChainSystem::uniform(1.0, 0.3, 3).unwrap();
        assert!(chain_single_excitation_amplitudes(&ok, 3, 1.0).is_err());
    }

    #[test]
    fn distribution_csv() {
        let d = multinomial_probabilities(1, &star(0.3, 0.4), 0.5, 1e-10).unwrap();
        let csv = d.to_csv();
        assert!(csv.starts_with("n1,n2,n3,probability\n1,0,0,"));
        assert_eq!(csv.lines().count(), 4);
    }
}
