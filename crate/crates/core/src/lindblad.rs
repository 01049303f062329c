//! Hamiltonian and Liouvillian of the driven, damped Jaynes-Cummings model
//! in the frame rotating at the drive frequency.
//!
//! ```text
//! H = −Δω_c a†a − Δω_q σ+σ− + ε_d (a + a†) + g (a σ+ + a† σ−)
//! ρ̇ = −i[H, ρ] + 2κ D[a]ρ + γ D[σ−]ρ,   D[c]ρ = cρc† − ½{c†c, ρ}
//! ```
//!
//! States are vectorized by stacking columns, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{JcError, Result};
use crate::hilbert::{self, ModeSpace};
use crate::sparse::SparseComplexMatrix;
use crate::steady::DensityMatrix;

/// Physical rates and detunings. All quantities share the unit of `kappa`
/// (conventionally `kappa = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Qubit-cavity coupling.
    pub g: f64,
    /// Cavity field half-width; the energy decay rate is `2 * kappa`.
    pub kappa: f64,
    /// Qubit spontaneous emission rate.
    pub gamma: f64,
    /// Drive amplitude, taken real and nonnegative.
    pub eps_d: f64,
    /// Drive-cavity detuning ω_d − ω_c.
    pub dwc: f64,
    /// Qubit-cavity detuning ω_q − ω_c.
    pub delta: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 0.0,
            kappa: 1.0,
            gamma: 0.0,
            eps_d: 0.0,
            dwc: 0.0,
            delta: 0.0,
        }
    }
}

impl SystemParams {
    pub fn new(g: f64, kappa: f64, gamma: f64, eps_d: f64, dwc: f64, delta: f64) -> Result<Self> {
        let p = Self {
            g,
            kappa,
            gamma,
            eps_d,
            dwc,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Drive-qubit detuning ω_d − ω_q = Δω_c − δ.
    pub fn dwq(&self) -> f64 {
        self.dwc - self.delta
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("eps_d", self.eps_d),
            ("dwc", self.dwc),
            ("delta", self.delta),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(JcError::InvalidParams(format!("{name} is not finite")));
        }
        if self.kappa <= 0.0 {
            return Err(JcError::InvalidParams("kappa must be positive".into()));
        }
        for (name, v) in [("gamma", self.gamma), ("g", self.g), ("eps_d", self.eps_d)] {
            if v < 0.0 {
                return Err(JcError::InvalidParams(format!(
                    "{name} must be nonnegative"
                )));
            }
        }
        Ok(())
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn hamiltonian(p: &SystemParams, space: ModeSpace) -> SparseComplexMatrix {
    let a = hilbert::annihilation(space);
    let ad = a.adjoint();
    let sm = hilbert::sigma_minus(space);
    let sp = sm.adjoint();

    let detuning = &(&hilbert::number(space) * (-p.dwc)) + &(&(&sp * &sm) * (-p.dwq()));
    let drive = &(&a + &ad) * p.eps_d;
    let coupling = &(&(&a * &sp) + &(&ad * &sm)) * p.g;
    &(&detuning + &drive) + &coupling
}

/// Vectorized dissipator D[c] = c̄ ⊗ c − ½ I ⊗ c†c − ½ (c†c)ᵀ ⊗ I.
fn dissipator(c: &SparseComplexMatrix) -> SparseComplexMatrix {
    let id = SparseComplexMatrix::identity(c.n_rows());
    let cdc = &c.adjoint() * c;
    let jump = c.conj().kron(c);
    let anti = &id.kron(&cdc) + &cdc.transpose().kron(&id);
    &jump - &(&anti * 0.5)
}

/// Generator L with ρ̇ = L ρ acting on column-stacked density matrices.
#[derive(Clone, Debug)]
pub struct Superoperator {
    space: ModeSpace,
    matrix: SparseComplexMatrix,
}

impl Superoperator {
    pub fn space(&self) -> ModeSpace {
        self.space
    }

    /// Length of a vectorized state, `total_dim²`.
    pub fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn matrix(&self) -> &SparseComplexMatrix {
        &self.matrix
    }

    /// `unvec(L · vec(ρ))`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let d = self.space.total_dim();
        if rho.dim() != d {
            return Err(JcError::DimensionMismatch {
                expected: d,
                found: rho.dim(),
            });
        }
        let out = self.matrix.mul_vec(rho.as_vec())?;
        Ok(DensityMatrix::from_vec(d, out))
    }

    /// Frobenius norm of `L · vec(ρ)`.
    pub fn residual_norm(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(self.apply(rho)?.frobenius_norm())
    }
}

pub fn liouvillian(p: &SystemParams, space: ModeSpace) -> Superoperator {
    let h = hamiltonian(p, space);
    let id = hilbert::identity(space);
    let coherent = &(&id.kron(&h) - &h.transpose().kron(&id)) * (-I);

    let mut matrix = &coherent + &(&dissipator(&hilbert::annihilation(space)) * (2.0 * p.kappa));
    if p.gamma > 0.0 {
        matrix = &matrix + &(&dissipator(&hilbert::sigma_minus(space)) * p.gamma);
    }
    Superoperator { space, matrix }
}

/// Convenience wrapper matching the free-function form `apply(L, ρ)`.
pub fn apply(l: &Superoperator, rho: &DensityMatrix) -> Result<DensityMatrix> {
    l.apply(rho)
}
