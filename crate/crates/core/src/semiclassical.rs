//! Mean-field descriptions of the driven Jaynes-Cummings system.
//!
//! Maxwell-Bloch equations follow from factorizing ⟨a σ⟩ ≈ ⟨a⟩⟨σ⟩ in the
//! first-moment equations of the master equation:
//!
//! ```text
//! dβ/dt = −(κ − iΔω_c) β − i g s − i ε_d
//! ds/dt = −(γ/2 − iΔω_q) s + i g β w
//! dw/dt = −γ (w + 1) + 2 i g (β* s − β s*)
//! ```
//!
//! with β = ⟨a⟩, s = ⟨σ−⟩, w = ⟨σz⟩.

use std::io::Write;
use std::ops::ControlFlow;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{JcError, Result};
use crate::fmt::float;
use crate::lindblad::SystemParams;
use crate::ode::Dopri5;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub beta: Complex64,
    pub s: Complex64,
    pub w: f64,
}

impl MeanFieldState {
    /// Empty cavity, qubit in the lower state.
    pub fn ground() -> Self {
        Self {
            beta: Complex64::new(0.0, 0.0),
            s: Complex64::new(0.0, 0.0),
            w: -1.0,
        }
    }

    /// |s|² + w²/4, equal to 1/4 on the surface of the Bloch sphere.
    pub fn spin_length_sq(&self) -> f64 {
        self.s.norm_sqr() + 0.25 * self.w * self.w
    }

    pub fn norm(&self) -> f64 {
        (self.beta.norm_sqr() + self.s.norm_sqr() + self.w * self.w).sqrt()
    }

    fn to_vec(self) -> Vec<Complex64> {
        vec![self.beta, self.s, Complex64::new(self.w, 0.0)]
    }

    fn from_slice(y: &[Complex64]) -> Self {
        Self {
            beta: y[0],
            s: y[1],
            w: y[2].re,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
    Unknown,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
            Stability::Unknown => "unknown",
        }
    }
}

/// Which state equation produced a branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    MaxwellBloch,
    Neoclassical,
    Kerr,
    Resonance,
    SplitLorentzian,
    PhaseBistable,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::MaxwellBloch => "maxwell_bloch",
            Source::Neoclassical => "neoclassical",
            Source::Kerr => "kerr",
            Source::Resonance => "resonance",
            Source::SplitLorentzian => "split_lorentzian",
            Source::PhaseBistable => "phase_bistable",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalBranch {
    pub source: Source,
    pub alpha: Complex64,
    /// |alpha|².
    pub n: f64,
    pub s: Option<Complex64>,
    pub w: Option<f64>,
    pub stability: Stability,
    /// Sign selecting the square-root or ± branch of the state equation;
    /// 0 where the equation has a single form.
    pub sign: i8,
}

impl SemiclassicalBranch {
    fn field(source: Source, alpha: Complex64, sign: i8) -> Self {
        Self {
            source,
            alpha,
            n: alpha.norm_sqr(),
            s: None,
            w: None,
            stability: Stability::Unknown,
            sign,
        }
    }

    pub fn mean_field_state(&self) -> Option<MeanFieldState> {
        Some(MeanFieldState {
            beta: self.alpha,
            s: self.s?,
            w: self.w?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub n_sc: f64,
    pub n_mb: f64,
    pub n_nc_kerr: f64,
}

fn gamma_tilde(p: &SystemParams) -> Complex64 {
    Complex64::new(p.gamma, -2.0 * p.dwq())
}

fn kappa_tilde(p: &SystemParams) -> Complex64 {
    Complex64::new(p.kappa, -p.dwc)
}

pub fn scale_params(p: &SystemParams) -> ScaleParams {
    let g2 = p.g * p.g;
    ScaleParams {
        n_sc: g2 / (4.0 * p.kappa * p.kappa),
        n_mb: gamma_tilde(p).norm_sqr() / (8.0 * g2),
        n_nc_kerr: (p.delta / (2.0 * p.g)).powi(2),
    }
}

pub fn mb_rhs(x: &MeanFieldState, p: &SystemParams) -> MeanFieldState {
    let dbeta = -kappa_tilde(p) * x.beta - I * p.g * x.s - I * p.eps_d;
    let ds = -Complex64::new(0.5 * p.gamma, -p.dwq()) * x.s + I * p.g * x.beta * x.w;
    // 2ig(β* s − β s*) = −4g Im(β* s)
    let dw = -p.gamma * (x.w + 1.0) - 4.0 * p.g * (x.beta.conj() * x.s).im;
    MeanFieldState {
        beta: dbeta,
        s: ds,
        w: dw,
    }
}

/// Jacobian of [`mb_rhs`] in the real coordinates (Re β, Im β, Re s, Im s, w).
pub fn mb_jacobian(x: &MeanFieldState, p: &SystemParams) -> [[f64; 5]; 5] {
    let (k, dc, dq, g, h) = (p.kappa, p.dwc, p.dwq(), p.g, 0.5 * p.gamma);
    let (br, bi, sr, si, w) = (x.beta.re, x.beta.im, x.s.re, x.s.im, x.w);
    [
        [-k, -dc, 0.0, g, 0.0],
        [dc, -k, -g, 0.0, 0.0],
        [0.0, -g * w, -h, -dq, -g * bi],
        [g * w, 0.0, dq, -h, g * br],
        [
            -4.0 * g * si,
            4.0 * g * sr,
            4.0 * g * bi,
            -4.0 * g * br,
            -p.gamma,
        ],
    ]
}

/// Real parts within this distance of zero count as marginal.
pub const STABILITY_TOL: f64 = 1e-9;

pub fn classify(eigenvalues: &[Complex64]) -> Stability {
    let max_re = eigenvalues
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_re < -STABILITY_TOL {
        Stability::Stable
    } else if max_re.abs() <= STABILITY_TOL {
        Stability::Marginal
    } else {
        Stability::Unstable
    }
}

/// Linear stability of a branch carrying qubit moments.
pub fn mb_stability(
    branch: &SemiclassicalBranch,
    p: &SystemParams,
) -> Result<(Stability, Vec<Complex64>)> {
    let x = branch.mean_field_state().ok_or_else(|| {
        JcError::InvalidParams(
            "branch has no qubit moments; stability needs a full fixed point".into(),
        )
    })?;
    let j = mb_jacobian(&x, p);
    let m = Mat::<f64>::from_fn(5, 5, |r, c| j[r][c]);
    let mut ev: Vec<Complex64> = m
        .eigenvalues()
        .map_err(|e| JcError::SingularSystem(format!("Jacobian eigenvalues: {e:?}")))?;
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok((classify(&ev), ev))
}

#[derive(Clone, Debug)]
pub struct MbRun {
    pub state: MeanFieldState,
    pub t: f64,
    /// ‖rhs‖ dropped below the tolerance before `t_max`.
    pub converged: bool,
    pub residual: f64,
    /// Largest |Δ(|s|² + w²/4)| seen along the trajectory.
    pub spin_drift: f64,
}

/// Integrates the Maxwell-Bloch flow until ‖rhs‖ < `tol` or `t_max`.
pub fn mb_integrate(x0: &MeanFieldState, p: &SystemParams, t_max: f64, tol: f64) -> Result<MbRun> {
    p.validate()?;
    let l0 = x0.spin_length_sq();
    let mut drift: f64 = 0.0;
    let mut residual = f64::INFINITY;
    let sol = Dopri5::with_tolerances(1e-11, 1e-13).integrate(
        |_, y, dy| {
            let d = mb_rhs(&MeanFieldState::from_slice(y), p);
            dy[0] = d.beta;
            dy[1] = d.s;
            dy[2] = Complex64::new(d.w, 0.0);
        },
        0.0,
        x0.to_vec(),
        t_max,
        |_, y| {
            let x = MeanFieldState::from_slice(y);
            drift = drift.max((x.spin_length_sq() - l0).abs());
            residual = mb_rhs(&x, p).norm();
            if residual < tol {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    )?;
    Ok(MbRun {
        state: MeanFieldState::from_slice(&sol.y),
        t: sol.t,
        converged: sol.stopped,
        residual,
        spin_drift: drift,
    })
}

/// Real roots of c3 n³ + c2 n² + c1 n + c0 with |Im| ≤ 1e-10 (relative),
/// sorted ascending. Cardano in complex arithmetic, then Newton polish.
fn cubic_real_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
    let poly = |z: Complex64| ((z + a) * z + b) * z + c;
    let dpoly = |z: Complex64| (3.0 * z + 2.0 * a) * z + b;
    // n = t − a/3 gives t³ + pt + q.
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let mut u3 = Complex64::new(-q / 2.0, 0.0) + disc;
    if u3.norm() < 1e-300 {
        u3 = Complex64::new(-q / 2.0, 0.0) - disc;
    }
    let u = u3.powf(1.0 / 3.0);
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let mut roots: Vec<Complex64> = (0..3)
        .map(|k| {
            let uk = u * omega.powu(k);
            let t = if uk.norm() < 1e-300 {
                Complex64::new(0.0, 0.0)
            } else {
                uk - p / (3.0 * uk)
            };
            t - a / 3.0
        })
        .collect();
    for z in roots.iter_mut() {
        for _ in 0..4 {
            let d = dpoly(*z);
            if d.norm() == 0.0 {
                break;
            }
            let step = poly(*z) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *z -= step;
        }
    }
    let mut out: Vec<f64> = roots
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-10 * z.norm().max(1.0))
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Full fixed point on the Maxwell-Bloch branch with |β|² = n.
fn mb_branch_at(n: f64, p: &SystemParams) -> SemiclassicalBranch {
    let gt = gamma_tilde(p);
    let m = scale_params(p).n_mb;
    let u = n / m;
    let c = 2.0 * p.g * p.g / gt;
    let alpha = -I * p.eps_d * (1.0 + u) / (kappa_tilde(p) * (1.0 + u) + c);
    let w = -1.0 / (1.0 + u);
    let s = 2.0 * I * p.g * alpha * w / gt;
    SemiclassicalBranch {
        source: Source::MaxwellBloch,
        alpha,
        n: alpha.norm_sqr(),
        s: Some(s),
        w: Some(w),
        stability: Stability::Unknown,
        sign: 0,
    }
}

/// Drive strength squared that puts the Maxwell-Bloch fixed point at
/// |β|² = n: ε_d² = n |κ̃ + C/(1+u)|², C = 2g²/γ̃, u = n/n_mb.
pub fn mb_drive_sq_for(n: f64, p: &SystemParams) -> Result<f64> {
    check_mb(p)?;
    if p.g == 0.0 {
        return Ok(n * kappa_tilde(p).norm_sqr());
    }
    let u = n / scale_params(p).n_mb;
    let c = 2.0 * p.g * p.g / gamma_tilde(p);
    Ok(n * (kappa_tilde(p) + c / (1.0 + u)).norm_sqr())
}

fn check_mb(p: &SystemParams) -> Result<()> {
    p.validate()?;
    if p.g > 0.0 && gamma_tilde(p).norm() == 0.0 {
        return Err(JcError::SingularGammaTilde);
    }
    Ok(())
}

/// Steady states of the Maxwell-Bloch equations.
///
/// With A = κ̃, C = 2g²/γ̃, m = n_mb and R = Re(A C̄), the state equation
/// n |A(1+u) + C|² = ε_d² (1+u)² times m² becomes the cubic
///
/// ```text
/// |A|² n³ + [2m(|A|² + R) − ε²] n² + [m²(|A|² + 2R + |C|²) − 2mε²] n − ε² m² = 0
/// ```
///
/// Each root is returned with its qubit moments and linear stability.
pub fn mb_steady_roots(p: &SystemParams) -> Result<Vec<SemiclassicalBranch>> {
    check_mb(p)?;
    let mut out = Vec::new();
    if p.eps_d == 0.0 || p.g == 0.0 {
        let alpha = -I * p.eps_d / kappa_tilde(p);
        out.push(SemiclassicalBranch {
            s: Some(Complex64::new(0.0, 0.0)),
            w: Some(-1.0),
            ..SemiclassicalBranch::field(Source::MaxwellBloch, alpha, 0)
        });
    } else {
        let m = scale_params(p).n_mb;
        let a2 = kappa_tilde(p).norm_sqr();
        let c = 2.0 * p.g * p.g / gamma_tilde(p);
        let r = (kappa_tilde(p) * c.conj()).re;
        let e2 = p.eps_d * p.eps_d;
        let roots = cubic_real_roots(
            a2,
            2.0 * m * (a2 + r) - e2,
            m * m * (a2 + 2.0 * r + c.norm_sqr()) - 2.0 * m * e2,
            -e2 * m * m,
        );
        for n in roots.into_iter().filter(|&n| n >= 0.0) {
            out.push(mb_branch_at(n, p));
        }
    }
    for b in out.iter_mut() {
        b.stability = mb_stability(b, p)?.0;
    }
    Ok(out)
}

/// All sign changes of `f` on the grid, bisected to 1e-12 relative.
fn scan_roots(f: impl Fn(f64) -> f64, upper: f64) -> Vec<f64> {
    if upper.is_nan() || upper <= 0.0 {
        return Vec::new();
    }
    const UNIFORM: usize = 2000;
    const GEOMETRIC: usize = 1000;
    let mut grid: Vec<f64> = (1..=UNIFORM)
        .map(|k| upper * k as f64 / UNIFORM as f64)
        .collect();
    let lo = upper * 1e-14;
    grid.extend((0..GEOMETRIC).map(|k| lo * (upper / lo).powf(k as f64 / GEOMETRIC as f64)));
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut roots = Vec::new();
    let mut prev = (grid[0], f(grid[0]));
    if prev.1 == 0.0 {
        roots.push(prev.0);
    }
    for &x in &grid[1..] {
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if prev.1 != 0.0 && prev.1.signum() != fx.signum() {
            let (mut a, mut b, fa) = (prev.0, x, prev.1);
            while b - a > 1e-12 * b {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = (x, fx);
    }
    roots
}

fn scan_bound(p: &SystemParams) -> f64 {
    4.0 * (p.eps_d / p.kappa).powi(2)
}

/// Effective detuning in the neoclassical state equation,
/// Δω_c − s g²/√(Δω_c² + 4g²n).
fn neoclassical_shift(n: f64, sign: f64, p: &SystemParams) -> f64 {
    p.dwc - sign * p.g * p.g / (p.dwc * p.dwc + 4.0 * p.g * p.g * n).sqrt()
}

fn field_from_shift(shift: f64, p: &SystemParams) -> Complex64 {
    -I * p.eps_d / Complex64::new(p.kappa, -shift)
}

/// Roots of n[κ² + shift(n)²] = ε_d² for each sign in `signs`.
fn lorentzian_roots(
    p: &SystemParams,
    source: Source,
    signs: &[i8],
    shift: impl Fn(f64, f64) -> f64,
) -> Vec<SemiclassicalBranch> {
    let mut out = Vec::new();
    for &sign in signs {
        let sg = sign as f64;
        let f = |n: f64| n * (p.kappa * p.kappa + shift(n, sg).powi(2)) - p.eps_d * p.eps_d;
        for n in scan_roots(f, scan_bound(p)) {
            out.push(SemiclassicalBranch::field(
                source,
                field_from_shift(shift(n, sg), p),
                sign,
            ));
        }
    }
    out.sort_by(|a, b| a.n.total_cmp(&b.n).then(a.sign.cmp(&b.sign)));
    out
}

/// Neoclassical states, n[κ² + (Δω_c − g²/√(Δω_c² + 4g²n))²] = ε_d², over
/// both signs of the square root.
pub fn neoclassical_roots(p: &SystemParams) -> Result<Vec<SemiclassicalBranch>> {
    p.validate()?;
    if p.eps_d == 0.0 {
        return Ok(vec![SemiclassicalBranch::field(
            Source::Neoclassical,
            Complex64::new(0.0, 0.0),
            0,
        )]);
    }
    let signs: &[i8] = if p.g == 0.0 { &[1] } else { &[1, -1] };
    let mut out = lorentzian_roots(p, Source::Neoclassical, signs, |n, s| {
        neoclassical_shift(n, s, p)
    });
    // At Δω_c = 0 the equation reads κ²n + g²/4 = ε_d², rooted at n = 0 on threshold.
    if p.dwc == 0.0 && p.g > 0.0 && p.eps_d * p.eps_d - 0.25 * p.g * p.g == 0.0 {
        out.insert(
            0,
            SemiclassicalBranch::field(Source::Neoclassical, Complex64::new(0.0, 0.0), 0),
        );
    }
    Ok(out)
}

fn kerr_shift(n: f64, p: &SystemParams) -> f64 {
    let nk = (p.delta / (2.0 * p.g)).powi(2);
    p.dwc + p.g * p.g / p.delta / (1.0 + n / nk).sqrt()
}

/// Dispersive states, n[κ² + (Δω_c + (g²/δ)(1 + n/n_nc,Kerr)^{−1/2})²] = ε_d².
pub fn kerr_roots(p: &SystemParams) -> Result<Vec<SemiclassicalBranch>> {
    p.validate()?;
    if p.delta == 0.0 {
        return Err(JcError::DeltaZero);
    }
    if p.eps_d == 0.0 {
        return Ok(vec![SemiclassicalBranch::field(
            Source::Kerr,
            Complex64::new(0.0, 0.0),
            0,
        )]);
    }
    if p.g == 0.0 {
        return Ok(lorentzian_roots(p, Source::Kerr, &[0], |_, _| p.dwc));
    }
    Ok(lorentzian_roots(p, Source::Kerr, &[0], |n, _| {
        kerr_shift(n, p)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceVariant {
    Plain,
    SplitPlus,
    SplitMinus,
}

impl std::str::FromStr for ResonanceVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Self::Plain),
            "split_plus" => Ok(Self::SplitPlus),
            "split_minus" => Ok(Self::SplitMinus),
            other => Err(format!(
                "unknown variant `{other}` (plain|split_plus|split_minus)"
            )),
        }
    }
}

fn threshold_pair(p: &SystemParams, source: Source) -> Vec<SemiclassicalBranch> {
    let num = p.eps_d * p.eps_d - 0.25 * p.g * p.g;
    if num < 0.0 {
        return Vec::new();
    }
    let n = num / (p.kappa * p.kappa);
    if n == 0.0 {
        return vec![SemiclassicalBranch::field(
            source,
            Complex64::new(0.0, 0.0),
            0,
        )];
    }
    let x = p.g / (2.0 * n.sqrt());
    let signs: &[i8] = if p.g == 0.0 { &[0] } else { &[1, -1] };
    signs
        .iter()
        .map(|&s| {
            // α = −iε_d / (κ + i s g/(2|α|))
            let alpha = -I * p.eps_d / Complex64::new(p.kappa, s as f64 * x);
            SemiclassicalBranch::field(source, alpha, s)
        })
        .collect()
}

/// Resonant asymptotics: plain |α|² = ε_d²/(κ² + g²/(4|α|²)), which
/// ignores `dwc`, or the split form with [Δω_c ∓ g/(2|α|)]².
pub fn resonance_amplitude(
    p: &SystemParams,
    variant: ResonanceVariant,
) -> Result<Vec<SemiclassicalBranch>> {
    p.validate()?;
    let sign: i8 = match variant {
        ResonanceVariant::Plain => return Ok(threshold_pair(p, Source::Resonance)),
        ResonanceVariant::SplitPlus => 1,
        ResonanceVariant::SplitMinus => -1,
    };
    if p.eps_d == 0.0 {
        return Ok(vec![SemiclassicalBranch::field(
            Source::SplitLorentzian,
            Complex64::new(0.0, 0.0),
            sign,
        )]);
    }
    Ok(lorentzian_roots(
        p,
        Source::SplitLorentzian,
        &[sign],
        |n, s| p.dwc - s * p.g / (2.0 * n.sqrt()),
    ))
}

/// The two phase-bistable states at full resonance above threshold.
pub fn phase_bistable(p: &SystemParams) -> Result<Vec<SemiclassicalBranch>> {
    p.validate()?;
    Ok(threshold_pair(p, Source::PhaseBistable))
}

/// Relative residual of a branch in its own state equation: the larger of
/// |α D + iε_d| / ε_d and |n|D|² − ε_d²| / ε_d², where α = −iε_d / D.
pub fn branch_residual(b: &SemiclassicalBranch, p: &SystemParams) -> Result<f64> {
    let n = b.n;
    let sg = b.sign as f64;
    let d: Complex64 = match b.source {
        Source::MaxwellBloch => {
            check_mb(p)?;
            if p.g == 0.0 {
                kappa_tilde(p)
            } else {
                let u = n / scale_params(p).n_mb;
                kappa_tilde(p) + 2.0 * p.g * p.g / gamma_tilde(p) / (1.0 + u)
            }
        }
        Source::Neoclassical => {
            let sg = if b.sign == 0 { 1.0 } else { sg };
            Complex64::new(p.kappa, -neoclassical_shift(n, sg, p))
        }
        Source::Kerr => {
            if p.delta == 0.0 {
                return Err(JcError::DeltaZero);
            }
            Complex64::new(p.kappa, -if p.g == 0.0 { p.dwc } else { kerr_shift(n, p) })
        }
        Source::Resonance | Source::PhaseBistable => {
            if n == 0.0 {
                Complex64::new(p.kappa, 0.0)
            } else {
                Complex64::new(p.kappa, sg * p.g / (2.0 * n.sqrt()))
            }
        }
        Source::SplitLorentzian => Complex64::new(p.kappa, -(p.dwc - sg * p.g / (2.0 * n.sqrt()))),
    };
    if p.eps_d == 0.0 {
        return Ok(b.alpha.norm());
    }
    let e = p.eps_d;
    let field = (b.alpha * d + I * e).norm() / e;
    let scalar = (n * d.norm_sqr() - e * e).abs() / (e * e);
    Ok(field.max(scalar))
}

/// `source,n,re_alpha,im_alpha,stability` rows.
pub fn write_branches_csv<W: Write>(branches: &[SemiclassicalBranch], mut w: W) -> Result<()> {
    writeln!(w, "source,n,re_alpha,im_alpha,stability")?;
    for b in branches {
        writeln!(
            w,
            "{},{},{},{},{}",
            b.source.as_str(),
            float(b.n),
            float(b.alpha.re),
            float(b.alpha.im),
            b.stability.as_str()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(g: f64, gamma: f64, eps: f64, dwc: f64, delta: f64) -> SystemParams {
        SystemParams::new(g, 1.0, gamma, eps, dwc, delta).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig3(delta_over_g: f64, eps: f64) -> SystemParams {
        params(40.0, 2.0, eps, 2.0, delta_over_g * 40.0)
    }

    #[test]
    fn scale_parameter_arithmetic() {
        assert_eq!(scale_params(&params(16.0, 0.0, 0.0, 0.0, 0.0)).n_sc, 64.0);
        let p = params(16.0, 0.0, 0.0, 0.4, -20.0);
        assert!((p.dwq() - 20.4).abs() < 1e-12);
        let s = scale_params(&p);
        assert!((s.n_mb - 4.0 * 20.4 * 20.4 / (8.0 * 256.0)).abs() < 1e-12);
        assert!((s.n_mb - 0.8128125).abs() < 1e-12);
        assert_eq!(s.n_nc_kerr, 0.390625);
    }

    #[test]
    fn decay_only_fixed_point() {
        let p = params(0.0, 0.6, 0.0, 0.3, 0.0);
        let d = mb_rhs(&MeanFieldState::ground(), &p);
        assert_eq!(d.norm(), 0.0);
        let b = &mb_steady_roots(&p).unwrap()[0];
        let (st, ev) = mb_stability(b, &p).unwrap();
        assert_eq!(st, Stability::Stable);
        assert_eq!(ev.iter().filter(|l| (l.re + 1.0).abs() < 1e-12).count(), 2);
    }

    #[test]
    fn cubic_solver_matches_known_roots() {
        let r = cubic_real_roots(2.0, -12.0, 22.0, -12.0);
        assert_eq!(r.len(), 3);
        for (x, e) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        let r = cubic_real_roots(1.0, 0.0, 1.0, 2.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] + 1.0).abs() < 1e-12);
        let r = cubic_real_roots(1.0, 0.0, 0.0, 0.0);
        assert!(r.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn undriven_maxwell_bloch_root() {
        let roots = mb_steady_roots(&params(16.0, 1.0, 0.0, 0.4, -20.0)).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].alpha, c(0.0, 0.0));
    }

    #[test]
    fn singular_gamma_tilde() {
        let p = params(16.0, 0.0, 8.0, 0.0, 0.0);
        assert!(matches!(
            mb_steady_roots(&p),
            Err(JcError::SingularGammaTilde)
        ));
    }

    #[test]
    fn bright_roots_in_weak_decay_limit() {
        for (dwc, expect) in [(0.40, 60.0), (0.96, 42.0), (1.52, 28.0), (2.08, 19.0)] {
            let p = params(16.0, 1e-9, 8.0, dwc, -20.0);
            let roots = mb_steady_roots(&p).unwrap();
            let bright = roots.iter().map(|b| b.n).fold(0.0, f64::max);
            assert!((bright - expect).abs() <= 1.0, "dwc {dwc}: {bright}");
        }
    }

    #[test]
    fn every_maxwell_bloch_root_is_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = params(
                rng.gen_range(0.5..40.0),
                rng.gen_range(0.01..4.0),
                rng.gen_range(0.0..15.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-200.0..50.0),
            );
            let roots = mb_steady_roots(&p).unwrap();
            assert!(roots.len() % 2 == 1, "{p:?} -> {}", roots.len());
            for b in &roots {
                let x = b.mean_field_state().unwrap();
                let scale = 1.0 + p.eps_d + p.g * (1.0 + b.alpha.norm());
                assert!(mb_rhs(&x, &p).norm() <= 1e-9 * scale, "{p:?}");
                assert!(branch_residual(b, &p).unwrap() <= 1e-9);
                assert!((b.n - b.alpha.norm_sqr()).abs() <= 1e-12 * b.n.max(1.0));
                assert!(x.spin_length_sq() <= 0.25 + 1e-9);
            }
        }
    }

    #[test]
    fn s_curve_root_counts() {
        let count = |d: f64, eps: f64| mb_steady_roots(&fig3(d, eps)).unwrap().len();
        for d in [-5.25, -4.5, -2.5, -0.5] {
            let counts: Vec<usize> = (0..=400).map(|k| count(d, 0.1 * k as f64)).collect();
            let mut changes: Vec<usize> = counts
                .windows(2)
                .filter(|w| w[0] != w[1])
                .map(|w| w[1])
                .collect();
            changes.dedup();
            assert_eq!(counts[0], 1);
            assert_eq!(changes, vec![3, 1], "delta/g = {d}");
        }
        // The window sits below the marked drive for the far-detuned curves.
        assert_eq!(count(-5.25, 0.24 * 40.0), 1);
        assert_eq!(count(-2.5, 0.24 * 40.0), 3);
        assert_eq!(count(-0.5, 0.24 * 40.0), 3);
    }

    #[test]
    fn middle_branch_is_unstable() {
        let p = fig3(-5.25, 7.2);
        let roots = mb_steady_roots(&p).unwrap();
        assert_eq!(roots.len(), 3);
        let tags: Vec<Stability> = roots.iter().map(|b| b.stability).collect();
        assert_eq!(
            tags,
            vec![Stability::Stable, Stability::Unstable, Stability::Stable]
        );

        // A small push off the middle root runs away from it.
        let mid = roots[1].mean_field_state().unwrap();
        let kicked = MeanFieldState {
            beta: mid.beta * 1.001,
            ..mid
        };
        let run = mb_integrate(&kicked, &p, 200.0, 1e-10).unwrap();
        assert!((run.state.beta.norm_sqr() - roots[1].n).abs() > 1.0);
    }

    #[test]
    fn fold_point_is_marginal() {
        // Drive as a function of n along the branch has stationary points at
        // the folds; locate the upper one from the analytic derivative.
        let p = fig3(-5.25, 1.0);
        let m = scale_params(&p).n_mb;
        let a2 = kappa_tilde(&p).norm_sqr();
        let cc = 2.0 * p.g * p.g / gamma_tilde(&p);
        let r = (kappa_tilde(&p) * cc.conj()).re;
        let de = |n: f64| {
            let t = m + n;
            a2 + 2.0 * m * r / t + m * m * cc.norm_sqr() / (t * t)
                - n * (2.0 * m * r / (t * t) + 2.0 * m * m * cc.norm_sqr() / (t * t * t))
        };
        let ns: Vec<f64> = (1..4000).map(|k| 0.05 * k as f64).collect();
        let k = ns
            .windows(2)
            .position(|w| de(w[0]).signum() != de(w[1]).signum())
            .unwrap();
        let (mut lo, mut hi) = (ns[k], ns[k + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if de(mid).signum() == de(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let n_fold = 0.5 * (lo + hi);
        let eps = mb_drive_sq_for(n_fold, &p).unwrap().sqrt();
        let q = fig3(-5.25, eps);
        let b = mb_branch_at(n_fold, &q);
        assert!(branch_residual(&b, &q).unwrap() < 1e-12);
        let (st, ev) = mb_stability(&b, &q).unwrap();
        assert_eq!(st, Stability::Marginal, "{ev:?}");
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = params(3.0, 0.7, 1.3, 0.4, -2.0);
        let x = MeanFieldState {
            beta: c(0.3, -0.8),
            s: c(-0.2, 0.15),
            w: -0.6,
        };
        let flat = |x: &MeanFieldState| [x.beta.re, x.beta.im, x.s.re, x.s.im, x.w];
        let unflat = |v: [f64; 5]| MeanFieldState {
            beta: c(v[0], v[1]),
            s: c(v[2], v[3]),
            w: v[4],
        };
        let j = mb_jacobian(&x, &p);
        let h = 1e-6;
        for col in 0..5 {
            let (mut up, mut dn) = (flat(&x), flat(&x));
            up[col] += h;
            dn[col] -= h;
            let fu = flat(&mb_rhs(&unflat(up), &p));
            let fd = flat(&mb_rhs(&unflat(dn), &p));
            for row in 0..5 {
                let fdv = (fu[row] - fd[row]) / (2.0 * h);
                assert!((fdv - j[row][col]).abs() < 1e-7, "({row},{col})");
            }
        }
    }

    #[test]
    fn decay_only_trajectory() {
        let p = params(0.0, 0.0, 0.0, 0.0, 0.0);
        let x0 = MeanFieldState {
            beta: c(1.5, -0.5),
            ..MeanFieldState::ground()
        };
        let run = mb_integrate(&x0, &p, 2.0, 0.0).unwrap();
        assert!((run.state.beta - x0.beta * (-2f64).exp()).norm() < 1e-8);
    }

    #[test]
    fn spin_length_is_conserved_without_decay() {
        let p = params(16.0, 0.0, 8.0, 0.4, -20.0);
        let x0 = MeanFieldState {
            beta: c(0.1, 0.2),
            s: c(0.3, -0.1),
            w: -2.0 * (0.25 - 0.1f64).sqrt(),
        };
        let run = mb_integrate(&x0, &p, 20.0, 0.0).unwrap();
        assert!(run.spin_drift < 1e-8, "{}", run.spin_drift);
    }

    #[test]
    fn spin_length_contracts_with_decay() {
        // Start on the sphere in an excited superposition; decay pulls the
        // Bloch vector inside and then back out to the lower pole.
        let p = params(0.0, 1.5, 0.0, 0.0, 1.0);
        let w0: f64 = 0.6;
        let x0 = MeanFieldState {
            beta: c(0.0, 0.0),
            s: Complex64::from_polar(0.5 * (1.0 - w0 * w0).sqrt(), 0.4),
            w: w0,
        };
        assert!((x0.spin_length_sq() - 0.25).abs() < 1e-15);
        let dist = |x: &MeanFieldState| x.s.norm_sqr() + 0.25 * (x.w + 1.0).powi(2);
        let mut prev = dist(&x0);
        let mut x = x0;
        for _ in 0..40 {
            x = mb_integrate(&x, &p, 0.25, 0.0).unwrap().state;
            assert!(x.spin_length_sq() < 0.25);
            assert!(dist(&x) < prev);
            prev = dist(&x);
        }
        assert!((x.spin_length_sq() - 0.25).abs() < 1e-4);
    }

    #[test]
    fn flow_settles_on_bright_root() {
        let p = params(16.0, 0.2, 8.0, 0.4, -20.0);
        let roots = mb_steady_roots(&p).unwrap();
        let bright = roots.iter().max_by(|a, b| a.n.total_cmp(&b.n)).unwrap();
        assert!((bright.n - 60.0).abs() < 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = bright.mean_field_state().unwrap();
        let kick = |rng: &mut ChaCha8Rng| c(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05));
        let x0 = MeanFieldState {
            beta: x.beta + kick(&mut rng),
            s: x.s + kick(&mut rng) * 0.1,
            w: x.w,
        };
        let run = mb_integrate(&x0, &p, 1000.0, 1e-7).unwrap();
        assert!(run.converged);
        assert!((run.state.beta - bright.alpha).norm() < 1e-5);
    }

    #[test]
    fn phase_bistable_regime_has_no_attracting_fixed_point() {
        let p = params(16.0, 0.0, 10.0, 0.0, 0.0);
        let run = mb_integrate(&MeanFieldState::ground(), &p, 200.0, 1e-6).unwrap();
        assert!(!run.converged);
        assert!(run.residual > 1e-3);
    }

    #[test]
    fn neoclassical_above_threshold_at_resonance() {
        let p = params(16.0, 0.0, 10.0, 0.0, 0.0);
        let roots = neoclassical_roots(&p).unwrap();
        assert_eq!(roots.len(), 2);
        for b in &roots {
            assert!((b.n - 36.0).abs() < 1e-9);
            assert!((b.alpha.re.abs() - 4.8).abs() < 1e-9 && (b.alpha.im + 3.6).abs() < 1e-9);
        }
        assert!(roots[0].alpha.re * roots[1].alpha.re < 0.0);
        let below = neoclassical_roots(&params(16.0, 0.0, 7.0, 0.0, 0.0)).unwrap();
        assert!(below.iter().all(|b| b.n <= 0.0));
    }

    #[test]
    fn neoclassical_dim_state() {
        // Re(α) ≈ −ε_d Δω_c / g² needs 4g²|α|² ≪ Δω_c², i.e. a drive well
        // below g/2.
        let p = params(16.0, 0.0, 2.0, 0.8, 0.0);
        let roots = neoclassical_roots(&p).unwrap();
        let dim: Vec<_> = roots.iter().filter(|b| b.sign == 1 && b.n < 0.1).collect();
        assert_eq!(dim.len(), 1);
        let approx = -p.eps_d * p.dwc / (p.g * p.g);
        assert!(
            ((dim[0].alpha.re - approx) / approx).abs() < 0.05,
            "{}",
            dim[0].alpha.re
        );

        // At ε_d = g/2 the small-amplitude expansion no longer applies and
        // the only dim state comes from the opposite root sign.
        let p = params(16.0, 0.0, 8.0, 0.8, 0.0);
        let roots = neoclassical_roots(&p).unwrap();
        assert_eq!(roots.len(), 2);
        assert_eq!((roots[0].sign, roots[1].sign), (-1, 1));
        assert!(roots[0].n < 0.05 && roots[0].alpha.re > 0.0);
        assert!((roots[1].n - 61.0).abs() < 1.0);
    }

    #[test]
    fn neoclassical_matches_resonance_formula() {
        for eps in [8.5, 10.0, 14.0, 30.0] {
            let p = params(16.0, 0.0, eps, 0.0, 0.0);
            let nc = neoclassical_roots(&p).unwrap();
            let rs = resonance_amplitude(&p, ResonanceVariant::Plain).unwrap();
            assert_eq!(nc.len(), rs.len());
            for a in &nc {
                let b = rs.iter().find(|b| b.sign == a.sign).unwrap();
                assert!((a.n - b.n).abs() <= 1e-10 * b.n);
                assert!((a.alpha - b.alpha).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn resonance_examples() {
        let at = resonance_amplitude(&params(16.0, 0.0, 8.0, 0.0, 0.0), ResonanceVariant::Plain)
            .unwrap();
        assert_eq!(at.len(), 1);
        assert_eq!(at[0].n, 0.0);
        let above = resonance_amplitude(&params(16.0, 0.0, 8.8, 0.0, 0.0), ResonanceVariant::Plain)
            .unwrap();
        assert!(above.iter().all(|b| (b.n - 13.44).abs() < 1e-9));
        assert!(
            resonance_amplitude(&params(16.0, 0.0, 7.9, 0.0, 0.0), ResonanceVariant::Plain)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn split_lorentzian_cancellation() {
        let eps = 50.0;
        let g = 16.0;
        let p = params(g, 0.0, eps, g / (2.0 * eps), 0.0);
        let roots = resonance_amplitude(&p, ResonanceVariant::SplitPlus).unwrap();
        let top = roots.iter().map(|b| b.n).fold(0.0, f64::max);
        assert!((top - 2500.0).abs() < 0.02 * 2500.0, "{top}");
    }

    #[test]
    fn kerr_linear_dispersive_resonance() {
        let g = 16.0;
        let delta = -160.0;
        let response = |dwc: f64| {
            kerr_roots(&params(g, 0.0, 0.1, dwc, delta))
                .unwrap()
                .iter()
                .map(|b| b.n)
                .fold(0.0, f64::max)
        };
        let grid: Vec<f64> = (0..=4000).map(|k| 0.001 * k as f64).collect();
        let best = grid
            .iter()
            .copied()
            .max_by(|a, b| response(*a).total_cmp(&response(*b)))
            .unwrap();
        let expect = g * g / delta.abs();
        assert!((best - expect).abs() < 0.01 * expect, "{best}");
    }

    #[test]
    fn kerr_approaches_phase_bistability() {
        let target = 36.0;
        let mut errs = Vec::new();
        for delta in [-1.0, -1e-2, -1e-4, -1e-6] {
            let roots = kerr_roots(&params(16.0, 0.0, 10.0, 0.0, delta)).unwrap();
            let n = roots
                .iter()
                .map(|b| b.n)
                .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
                .unwrap();
            errs.push((n - target).abs());
        }
        assert!(errs.windows(2).all(|w| w[1] <= w[0]));
        assert!(errs[3] < 1e-6, "{errs:?}");
    }

    #[test]
    fn kerr_sign_flip_conjugates_i_alpha() {
        let a = kerr_roots(&params(16.0, 0.0, 10.0, 0.0, -3.0)).unwrap();
        let b = kerr_roots(&params(16.0, 0.0, 10.0, 0.0, 3.0)).unwrap();
        assert_eq!(a.len(), b.len());
        assert!(!a.is_empty());
        for (x, y) in a.iter().zip(&b) {
            assert!((x.n - y.n).abs() < 1e-10 * x.n.max(1.0));
            assert!(((I * x.alpha).conj() - I * y.alpha).norm() < 1e-10 * x.alpha.norm().max(1.0));
        }
        assert!(matches!(
            kerr_roots(&params(16.0, 0.0, 10.0, 0.0, 0.0)),
            Err(JcError::DeltaZero)
        ));
    }

    #[test]
    fn all_root_finders_satisfy_their_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let p = params(
                rng.gen_range(1.0..30.0),
                0.0,
                rng.gen_range(0.1..20.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-100.0..100.0),
            );
            let mut all = neoclassical_roots(&p).unwrap();
            all.extend(kerr_roots(&p).unwrap());
            all.extend(resonance_amplitude(&p, ResonanceVariant::Plain).unwrap());
            all.extend(resonance_amplitude(&p, ResonanceVariant::SplitPlus).unwrap());
            all.extend(resonance_amplitude(&p, ResonanceVariant::SplitMinus).unwrap());
            all.extend(phase_bistable(&p).unwrap());
            for b in &all {
                assert!(branch_residual(b, &p).unwrap() <= 1e-9, "{b:?} {p:?}");
                assert!((b.n - b.alpha.norm_sqr()).abs() <= 1e-12 * b.n.max(1.0));
            }
        }
    }

    #[test]
    fn branch_csv_layout() {
        let roots = mb_steady_roots(&params(16.0, 1.0, 0.0, 0.4, -20.0)).unwrap();
        let mut buf = Vec::new();
        write_branches_csv(&roots, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "source,n,re_alpha,im_alpha,stability\nmaxwell_bloch,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,stable\n"
        );
    }

    proptest::proptest! {
        #[test]
        fn drive_map_inverts_roots(n in 0.01f64..80.0, d in -6.0f64..-0.1) {
            let p = fig3(d, 1.0);
            let eps = mb_drive_sq_for(n, &p).unwrap().sqrt();
            let q = fig3(d, eps);
            let roots = mb_steady_roots(&q).unwrap();
            proptest::prop_assert!(roots.iter().any(|b| (b.n - n).abs() < 1e-6 * n.max(1.0)));
        }
    }

    #[test]
    fn neoclassical_threshold_state_matches_resonance() {
        let p = SystemParams::new(16.0, 1.0, 0.0, 8.0, 0.0, -3.0).unwrap();
        let nc = neoclassical_roots(&p).unwrap();
        let rs = resonance_amplitude(&p, ResonanceVariant::Plain).unwrap();
        assert_eq!(nc.len(), 1);
        assert_eq!(rs.len(), 1);
        assert_eq!((nc[0].n, rs[0].n), (0.0, 0.0));
    }
}
