//! Steady states of the Liouvillian.
//!
//! Three independent routes to `L ρ = 0, tr ρ = 1`:
//!
//! * [`steady_state_direct`]: sparse LU of `L` with one row replaced by the
//!   trace functional, plus iterative refinement. This is the production path.
//! * [`steady_state_evolve`]: long-time explicit integration of `ρ̇ = L ρ`.
//! * [`steady_state_dense_null`]: smallest right singular vector of dense `L`.
//!
//! [`converge_truncation`] grows the Fock cutoff until the photon number and
//! the population near the cutoff have settled.

use std::ops::ControlFlow;
use std::time::Instant;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, NumericLu};
use faer::{Conj, Mat, Par, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{JcError, Result};
use crate::hilbert::ModeSpace;
use crate::lindblad::{liouvillian, Superoperator, SystemParams};
use crate::ode::Dopri5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest vectorized dimension accepted by [`steady_state_dense_null`].
pub const DENSE_NULL_LIMIT: usize = 1024;

/// Square complex matrix stored column-major, so the backing slice is
/// `vec(ρ)` under column stacking.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    /// Panics if `data.len() != dim * dim`.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "vectorized length must be dim²");
        Self { dim, data }
    }

    pub fn basis_projector(dim: usize, index: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.set(index, index, ONE);
        m
    }

    /// `|ψ⟩⟨ψ|`, not renormalized.
    pub fn from_pure(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for i in 0..dim {
                m.data[j * dim + i] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.dim + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[j * self.dim + i] = v;
    }

    pub fn as_vec(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest |ρ_ij − conj(ρ_ji)|.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim {
            for i in 0..=j {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Replaces ρ by (ρ + ρ†)/2.
    pub fn symmetrize(&mut self) {
        for j in 0..self.dim {
            for i in 0..=j {
                let v = 0.5 * (self.get(i, j) + self.get(j, i).conj());
                self.set(i, j, v);
                self.set(j, i, v.conj());
            }
        }
    }

    /// Divides by the trace. Also removes a global phase from null vectors.
    pub fn normalize_trace(&mut self) {
        let tr = self.trace();
        for v in &mut self.data {
            *v /= tr;
        }
    }

    /// `self ⊗ other` in the same index convention as the operators.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let mut out = Self::zeros(da * db);
        for ja in 0..da {
            for ia in 0..da {
                let a = self.get(ia, ja);
                for jb in 0..db {
                    for ib in 0..db {
                        out.set(ia * db + ib, ja * db + jb, a * other.get(ib, jb));
                    }
                }
            }
        }
        out
    }

    pub fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut h = self.clone();
        h.symmetrize();
        h.to_faer()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| JcError::SingularSystem(format!("eigensolver failed: {e:?}")))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Evolve,
    DenseNull,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Evolve => "evolve",
            Method::DenseNull => "dense_null",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "direct" => Ok(Method::Direct),
            "evolve" => Ok(Method::Evolve),
            "dense_null" => Ok(Method::DenseNull),
            other => Err(format!(
                "unknown method `{other}` (direct|evolve|dense_null)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    /// ‖L vec(ρ)‖ against the unmodified generator.
    pub residual_norm: f64,
    pub n_max_used: usize,
    /// Seconds.
    pub wall_time: f64,
    /// Refinement sweeps (direct), accepted steps (evolve) or truncation
    /// rounds (converge_truncation).
    pub iterations: usize,
    /// |tr ρ − 1| before renormalization; only meaningful for `evolve`.
    pub trace_drift: f64,
}

fn finish(mut rho: DensityMatrix) -> DensityMatrix {
    rho.symmetrize();
    rho.normalize_trace();
    rho.symmetrize();
    rho
}

fn check_residual(residual: f64, tol: f64) -> Result<()> {
    if residual.is_finite() && residual <= tol {
        Ok(())
    } else {
        Err(JcError::ResidualTooLarge { residual, tol })
    }
}

/// Sparse direct solve with the trace constraint in place of row 0.
pub fn steady_state_direct(l: &Superoperator, tol: f64) -> Result<(DensityMatrix, SolveReport)> {
    let start = Instant::now();
    let d = l.space().total_dim();
    let n = l.dim();
    let trace_row: Vec<(usize, Complex64)> = (0..d).map(|i| (i * d + i, ONE)).collect();
    let a = l.matrix().to_faer_with_row(Some((0, &trace_row)))?;

    let par = Par::Seq;
    let symbolic = factorize_symbolic_lu(a.symbolic(), Default::default())
        .map_err(|e| JcError::SingularSystem(format!("symbolic LU: {e:?}")))?;
    let mut numeric = NumericLu::<usize, Complex64>::new();
    let mut buf = MemBuffer::new(
        symbolic
            .factorize_numeric_lu_scratch::<Complex64>(par, Default::default())
            .or(symbolic.solve_in_place_scratch::<Complex64>(1, par)),
    );
    let lu = symbolic
        .factorize_numeric_lu(
            &mut numeric,
            a.as_ref(),
            par,
            MemStack::new(&mut buf),
            Default::default(),
        )
        .map_err(|e| JcError::SingularSystem(format!("numeric LU: {e:?}")))?;

    // A x with the trace row substituted.
    let apply_modified = |x: &[Complex64]| -> Result<Vec<Complex64>> {
        let mut y = l.matrix().mul_vec(x)?;
        y[0] = (0..d).map(|i| x[i * d + i]).sum();
        Ok(y)
    };

    let mut x = Mat::<Complex64>::zeros(n, 1);
    x[(0, 0)] = ONE;
    lu.solve_in_place_with_conj(Conj::No, x.as_mut(), par, MemStack::new(&mut buf));
    let mut sol: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    if sol.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(JcError::SingularSystem(
            "LU solve produced non-finite values".into(),
        ));
    }

    let mut iterations = 0;
    for _ in 0..3 {
        let ax = apply_modified(&sol)?;
        let mut r = Mat::<Complex64>::zeros(n, 1);
        let mut r_norm = 0.0;
        for i in 0..n {
            let b = if i == 0 { ONE } else { ZERO };
            r[(i, 0)] = b - ax[i];
            r_norm += r[(i, 0)].norm_sqr();
        }
        if r_norm.sqrt() < 1e-15 {
            break;
        }
        lu.solve_in_place_with_conj(Conj::No, r.as_mut(), par, MemStack::new(&mut buf));
        for (i, s) in sol.iter_mut().enumerate() {
            *s += r[(i, 0)];
        }
        iterations += 1;
    }

    let rho = finish(DensityMatrix::from_vec(d, sol));
    let residual = l.residual_norm(&rho)?;
    check_residual(residual, tol)?;
    Ok((
        rho,
        SolveReport {
            method: Method::Direct,
            residual_norm: residual,
            n_max_used: l.space().n_max(),
            wall_time: start.elapsed().as_secs_f64(),
            iterations,
            trace_drift: 0.0,
        },
    ))
}

/// Integrates `ρ̇ = L ρ` until `‖L ρ‖ < tol` or `t_max`.
pub fn steady_state_evolve(
    l: &Superoperator,
    rho0: &DensityMatrix,
    t_max: f64,
    tol: f64,
) -> Result<(DensityMatrix, SolveReport)> {
    let start = Instant::now();
    let d = l.space().total_dim();
    if rho0.dim() != d {
        return Err(JcError::DimensionMismatch {
            expected: d,
            found: rho0.dim(),
        });
    }
    let m = l.matrix();
    let mut scratch = vec![ZERO; l.dim()];
    let mut last_residual = f64::INFINITY;
    let solver = Dopri5::with_tolerances(1e-11, 1e-14);
    let sol = solver.integrate(
        |_, y, dy| {
            // Dimensions are fixed above; mul_vec_into cannot fail here.
            let _ = m.mul_vec_into(y, dy);
        },
        0.0,
        rho0.as_vec().to_vec(),
        t_max,
        |_, y| {
            let _ = m.mul_vec_into(y, &mut scratch);
            last_residual = scratch.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
            if last_residual < tol {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    )?;
    if !sol.stopped {
        return Err(JcError::NotConverged {
            t_max,
            residual: last_residual,
            tol,
        });
    }
    let raw = DensityMatrix::from_vec(d, sol.y);
    let trace_drift = (raw.trace() - rho0.trace()).norm();
    let rho = finish(raw);
    let residual = l.residual_norm(&rho)?;
    check_residual(residual, tol)?;
    Ok((
        rho,
        SolveReport {
            method: Method::Evolve,
            residual_norm: residual,
            n_max_used: l.space().n_max(),
            wall_time: start.elapsed().as_secs_f64(),
            iterations: sol.accepted,
            trace_drift,
        },
    ))
}

/// Singular values of dense `L`, descending. Small instances only.
pub fn dense_singular_values(l: &Superoperator) -> Result<Vec<f64>> {
    dense_generator(l)?
        .singular_values()
        .map_err(|e| JcError::SingularSystem(format!("SVD failed: {e:?}")))
}

fn dense_generator(l: &Superoperator) -> Result<Mat<Complex64>> {
    let n = l.dim();
    if n > DENSE_NULL_LIMIT {
        return Err(JcError::DimensionTooLarge {
            dim: n,
            limit: DENSE_NULL_LIMIT,
        });
    }
    let mut dense = Mat::<Complex64>::zeros(n, n);
    for (i, j, v) in l.matrix().iter() {
        dense[(i, j)] = v;
    }
    Ok(dense)
}

/// Dense SVD null vector of `L`, normalized to unit trace.
pub fn steady_state_dense_null(l: &Superoperator) -> Result<(DensityMatrix, SolveReport)> {
    let start = Instant::now();
    let n = l.dim();
    let dense = dense_generator(l)?;
    let svd = dense
        .svd()
        .map_err(|e| JcError::SingularSystem(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let smallest = s[n - 1].re;
    let next = if n > 1 { s[n - 2].re } else { f64::INFINITY };
    if next - smallest < 1e-10 {
        return Err(JcError::DegenerateNullSpace { smallest, next });
    }
    let v = svd.V();
    let d = l.space().total_dim();
    let rho = finish(DensityMatrix::from_vec(
        d,
        (0..n).map(|i| v[(i, n - 1)]).collect(),
    ));
    let residual = l.residual_norm(&rho)?;
    Ok((
        rho,
        SolveReport {
            method: Method::DenseNull,
            residual_norm: residual,
            n_max_used: l.space().n_max(),
            wall_time: start.elapsed().as_secs_f64(),
            iterations: 1,
            trace_drift: 0.0,
        },
    ))
}

/// Mean photon number of a full cavity ⊗ qubit state.
pub(crate) fn mean_photon(rho: &DensityMatrix, space: ModeSpace) -> f64 {
    rho.diagonal()
        .iter()
        .enumerate()
        .map(|(i, p)| space.split(i).0 as f64 * p)
        .sum()
}

/// Population of Fock levels strictly above `0.9 * n_max`.
pub fn tail_population(rho: &DensityMatrix, space: ModeSpace) -> f64 {
    let edge = 0.9 * space.n_max() as f64;
    rho.diagonal()
        .iter()
        .enumerate()
        .filter(|(i, _)| space.split(*i).0 as f64 > edge)
        .map(|(_, p)| p)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePolicy {
    pub n_max_start: usize,
    pub n_max_cap: usize,
    /// Relative change of ⟨n⟩ between successive truncations.
    pub rel_tol: f64,
    /// Residual tolerance handed to the direct solver.
    pub tol: f64,
    /// Largest population allowed above 0.9 n_max.
    pub tail_tol: f64,
    pub growth: f64,
}

impl Default for ConvergencePolicy {
    fn default() -> Self {
        Self {
            n_max_start: 20,
            n_max_cap: 400,
            rel_tol: 1e-4,
            tol: 1e-8,
            tail_tol: 1e-7,
            growth: 1.3,
        }
    }
}

/// Grows n_max by `growth` until ⟨n⟩ is stable to `rel_tol` and the tail
/// population is below `tail_tol`.
pub fn converge_truncation(
    p: &SystemParams,
    policy: &ConvergencePolicy,
) -> Result<(DensityMatrix, SolveReport)> {
    p.validate()?;
    if policy.n_max_start < 1 || policy.growth <= 1.0 {
        return Err(JcError::InvalidParams(
            "convergence policy needs n_max_start >= 1 and growth > 1".into(),
        ));
    }
    let start = Instant::now();
    let mut history: Vec<(usize, f64)> = Vec::new();
    let mut n_max = policy.n_max_start;
    loop {
        if n_max > policy.n_max_cap {
            return Err(JcError::TruncationCapExceeded {
                cap: policy.n_max_cap,
                history,
            });
        }
        let space = ModeSpace::new(n_max)?;
        let l = liouvillian(p, space);
        let (rho, mut report) = steady_state_direct(&l, policy.tol)?;
        let n = mean_photon(&rho, space);
        let tail = tail_population(&rho, space);
        let settled = history.last().is_some_and(|&(_, prev)| {
            let change = (n - prev).abs() / n.abs().max(f64::MIN_POSITIVE);
            change < policy.rel_tol
        });
        history.push((n_max, n));
        if settled && tail < policy.tail_tol {
            report.iterations = history.len();
            report.wall_time = start.elapsed().as_secs_f64();
            return Ok((rho, report));
        }
        n_max = (n_max as f64 * policy.growth).ceil() as usize;
    }
}
