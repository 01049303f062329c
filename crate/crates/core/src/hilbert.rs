//! Truncated Fock ⊗ qubit space and its elementary operators.
//!
//! Basis index is `fock * 2 + qubit`, with qubit 0 the lower state |−⟩ and
//! qubit 1 the upper state |+⟩. The truncation is a hard cutoff: a† maps
//! |n_max⟩ to zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{JcError, Result};
use crate::sparse::SparseComplexMatrix;

pub const QUBIT_DIM: usize = 2;
pub const LOWER: usize = 0;
pub const UPPER: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSpace {
    n_max: usize,
}

impl ModeSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(JcError::InvalidParams("n_max must be at least 1".into()));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn cavity_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn total_dim(&self) -> usize {
        QUBIT_DIM * self.cavity_dim()
    }

    pub fn index(&self, fock: usize, qubit: usize) -> usize {
        debug_assert!(fock <= self.n_max && qubit < QUBIT_DIM);
        fock * QUBIT_DIM + qubit
    }

    /// Inverse of [`ModeSpace::index`]: `(fock, qubit)`.
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / QUBIT_DIM, index % QUBIT_DIM)
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Cavity-factor annihilation operator of size `(n_max+1)²`.
pub fn cavity_annihilation(space: ModeSpace) -> SparseComplexMatrix {
    let dim = space.cavity_dim();
    SparseComplexMatrix::from_triplets(
        dim,
        dim,
        (1..dim).map(|n| (n - 1, n, real((n as f64).sqrt()))),
    )
}

fn qubit_lowering() -> SparseComplexMatrix {
    SparseComplexMatrix::from_triplets(QUBIT_DIM, QUBIT_DIM, [(LOWER, UPPER, real(1.0))])
}

/// `a ⊗ I₂`.
pub fn annihilation(space: ModeSpace) -> SparseComplexMatrix {
    cavity_annihilation(space).kron(&SparseComplexMatrix::identity(QUBIT_DIM))
}

pub fn creation(space: ModeSpace) -> SparseComplexMatrix {
    annihilation(space).adjoint()
}

/// `a†a ⊗ I₂`, built directly as a diagonal.
pub fn number(space: ModeSpace) -> SparseComplexMatrix {
    let diag: Vec<Complex64> = (0..space.total_dim())
        .map(|i| real(space.split(i).0 as f64))
        .collect();
    SparseComplexMatrix::from_diagonal(&diag)
}

/// `I ⊗ |−⟩⟨+|`.
pub fn sigma_minus(space: ModeSpace) -> SparseComplexMatrix {
    SparseComplexMatrix::identity(space.cavity_dim()).kron(&qubit_lowering())
}

pub fn sigma_plus(space: ModeSpace) -> SparseComplexMatrix {
    sigma_minus(space).adjoint()
}

pub fn identity(space: ModeSpace) -> SparseComplexMatrix {
    SparseComplexMatrix::identity(space.total_dim())
}

/// Fock amplitudes e^{−|α|²/2} αⁿ/√(n!) for n = 0..=n_max, without the
/// representability check. Inner products with states supported on the
/// truncated space are exact.
pub fn coherent_amplitudes(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(real((-0.5 * alpha.norm_sqr()).exp()));
    if alpha.norm() == 0.0 {
        out.resize(n_max + 1, real(0.0));
        return out;
    }
    // Magnitude carried in log space: e^{-|α|²/2} underflows long before
    // the Poisson peak at n ≈ |α|² does.
    let (r, theta) = alpha.to_polar();
    let ln_r = r.ln();
    let mut ln_mag = -0.5 * r * r;
    for n in 1..=n_max {
        ln_mag += ln_r - 0.5 * (n as f64).ln();
        out.push(Complex64::from_polar(ln_mag.exp(), n as f64 * theta));
    }
    out
}

/// Cavity-factor coherent state |α⟩ truncated to the space.
///
/// Fails with [`JcError::Truncation`] when |α|² > n_max / 2, where the
/// truncated vector no longer represents the state faithfully.
pub fn coherent_vector(alpha: Complex64, space: ModeSpace) -> Result<Vec<Complex64>> {
    let limit = 0.5 * space.n_max() as f64;
    if alpha.norm_sqr() > limit {
        return Err(JcError::Truncation {
            alpha_sq: alpha.norm_sqr(),
            limit,
        });
    }
    Ok(coherent_amplitudes(alpha, space.n_max()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(space: ModeSpace, n: usize, q: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); space.total_dim()];
        v[space.index(n, q)] = real(1.0);
        v
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    #[test]
    fn rejects_empty_truncation() {
        assert!(ModeSpace::new(0).is_err());
        assert_eq!(ModeSpace::new(4).unwrap().total_dim(), 10);
    }

    #[test]
    fn annihilation_smallest_space() {
        let a = annihilation(ModeSpace::new(1).unwrap());
        assert_eq!(a.nnz(), 2);
        assert!(a.values().iter().all(|&v| v == real(1.0)));
    }

    #[test]
    fn number_operator_eigenvalue() {
        let s = ModeSpace::new(5).unwrap();
        let n = &creation(s) * &annihilation(s);
        let out = n.mul_vec(&basis(s, 3, LOWER)).unwrap();
        let expect: Vec<_> = basis(s, 3, LOWER).iter().map(|v| v * 3.0).collect();
        assert!(out.iter().zip(&expect).all(|(a, b)| (a - b).norm() < 1e-14));
        let diff = &n - &number(s);
        assert!(diff.values().iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn truncation_edge() {
        let s = ModeSpace::new(6).unwrap();
        for q in [LOWER, UPPER] {
            let down = annihilation(s).mul_vec(&basis(s, 6, q)).unwrap();
            assert!((norm(&down) - 6f64.sqrt()).abs() < 1e-14);
            let up = creation(s).mul_vec(&basis(s, 6, q)).unwrap();
            assert_eq!(norm(&up), 0.0);
        }
    }

    #[test]
    fn sigma_minus_algebra() {
        let s = ModeSpace::new(4).unwrap();
        let sm = sigma_minus(s);
        assert_eq!(sm.nnz(), s.cavity_dim());
        for n in 0..=4 {
            assert_eq!(sm.mul_vec(&basis(s, n, UPPER)).unwrap(), basis(s, n, LOWER));
        }
        assert_eq!((&sm * &sm).nnz(), 0);
        let proj = &sigma_plus(s) * &sm;
        for (i, j, v) in proj.iter() {
            assert_eq!(i, j);
            assert_eq!(s.split(i).1, UPPER);
            assert_eq!(v, real(1.0));
        }
        assert_eq!(proj.nnz(), s.cavity_dim());
    }

    #[test]
    fn commutator_away_from_edge() {
        let s = ModeSpace::new(8).unwrap();
        let a = annihilation(s);
        let ad = creation(s);
        let comm = &(&a * &ad) - &(&ad * &a);
        for i in 0..s.total_dim() {
            let (n, _) = s.split(i);
            if n < s.n_max() {
                assert!((comm.get(i, i) - real(1.0)).norm() < 1e-13);
                assert_eq!(comm.row(i).count(), 1);
            }
        }
    }

    #[test]
    fn adjoints_round_trip() {
        let s = ModeSpace::new(5).unwrap();
        assert_eq!(sigma_plus(s).adjoint(), sigma_minus(s));
        assert_eq!(creation(s).adjoint(), annihilation(s));
        assert_eq!(annihilation(s), annihilation(s));
    }

    #[test]
    fn vacuum_coherent_state() {
        let v = coherent_vector(Complex64::new(0.0, 0.0), ModeSpace::new(3).unwrap()).unwrap();
        assert_eq!(v, vec![real(1.0), real(0.0), real(0.0), real(0.0)]);
    }

    #[test]
    fn coherent_norm_matches_poisson_sum() {
        // Poisson mass e^{-4} 4^n / n! summed independently in log space.
        let mut oracle = 0.0;
        let mut log_fact = 0.0;
        for n in 0..=40u32 {
            if n > 0 {
                log_fact += (n as f64).ln();
            }
            oracle += (-4.0 + n as f64 * 4f64.ln() - log_fact).exp();
        }
        let v = coherent_vector(real(2.0), ModeSpace::new(40).unwrap()).unwrap();
        let n2: f64 = v.iter().map(Complex64::norm_sqr).sum();
        assert!((n2 - oracle).abs() < 1e-12);
        assert!((n2.sqrt() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_mean_photon_number() {
        let v = coherent_vector(real(1.5), ModeSpace::new(40).unwrap()).unwrap();
        let mean: f64 = v
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum();
        assert!((mean - 2.25).abs() < 1e-8);
    }

    #[test]
    fn coherent_precondition() {
        let s = ModeSpace::new(10).unwrap();
        assert!(matches!(
            coherent_vector(Complex64::new(2.0, 1.5), s),
            Err(JcError::Truncation { .. })
        ));
        // Far past n = 170 the recurrence stays finite.
        let v = coherent_vector(real(15.0), ModeSpace::new(600).unwrap()).unwrap();
        assert!(v.iter().all(|c| c.re.is_finite()));
        assert!((norm(&v) - 1.0).abs() < 1e-10);
    }

    proptest::proptest! {
        #[test]
        fn coherent_norm_bounded(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let s = ModeSpace::new(60).unwrap();
            let v = coherent_vector(Complex64::new(re, im), s).unwrap();
            let n = norm(&v);
            proptest::prop_assert!(n <= 1.0 + 1e-14 && n >= 1.0 - 1e-8);
        }
    }
}
