//! Regenerates the data behind the four phase-portrait and sweep figures.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{JcError, Result};
use crate::fmt::float;
use crate::lindblad::SystemParams;
use crate::observables::{
    find_peaks, photon_number, q_function, qubit_moments, reduce_cavity, BlochVector, GridSpec,
    Peak, QGrid, QGridSidecar, DEFAULT_GRID_POINTS, DEFAULT_PEAK_THRESHOLD,
};
use crate::pipeline::config::{linspace, SolverConfig};
use crate::semiclassical::{
    kerr_roots, mb_steady_roots, neoclassical_roots, resonance_amplitude, write_branches_csv,
    ResonanceVariant, SemiclassicalBranch, Stability,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FigureId {
    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
        }
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "fig1" => FigureId::Fig1,
            "fig2" => FigureId::Fig2,
            "fig3" => FigureId::Fig3,
            "fig4" => FigureId::Fig4,
            other => return Err(format!("unknown figure `{other}` (fig1|fig2|fig3|fig4)")),
        })
    }
}

pub const FIG1_G: f64 = 16.0;
pub const FIG1_DELTA_OVER_G: f64 = -1.25;
pub const FIG1_DWC: [f64; 4] = [0.40, 0.96, 1.52, 2.08];

pub const FIG2_G: f64 = 16.0;
pub const FIG2_DWC: f64 = 0.8;
pub const FIG2_DELTA_OVER_G: [f64; 4] = [-10.0, -5.0, 0.0, 5.0];
/// The dim states of the near-resonant panel sit at ~0.35% of the maximum.
pub const FIG2_PEAK_THRESHOLD: f64 = 1e-3;

pub const FIG3_GAMMA: f64 = 2.0;
pub const FIG3_G_OVER_GAMMA: f64 = 20.0;
pub const FIG3_DWC: f64 = 2.0;
pub const FIG3_CURVES: [f64; 4] = [-5.25, -4.5, -2.5, -0.5];
pub const FIG3_PANELS: [f64; 3] = [-5.25, -4.5, -0.5];
pub const FIG3_EPS_OVER_G: f64 = 0.24;
pub const FIG3_EPS_OVER_GAMMA_MAX: f64 = 20.0;
pub const FIG3_EPS_POINTS: usize = 401;

pub const FIG4_G: f64 = 16.0;
/// Eight equidistant drives in (0.45, 0.55] plus the inset value.
pub const FIG4_EPS_OVER_G: [f64; 9] = [
    0.4625, 0.475, 0.4875, 0.5, 0.5125, 0.525, 0.5375, 0.55, 0.575,
];
pub const FIG4_DELTA_RANGE: (f64, f64) = (-16.0, 16.0);
pub const FIG4_DELTA_POINTS: usize = 65;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub id: FigureId,
    pub out_dir: PathBuf,
    pub solver: SolverConfig,
    pub grid_points: usize,
    /// Detuning samples of the fourth figure's sweep.
    pub delta_points: usize,
}

impl FigureSpec {
    pub fn new(id: FigureId, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            id,
            out_dir: out_dir.into(),
            solver: SolverConfig::default(),
            grid_points: DEFAULT_GRID_POINTS,
            delta_points: FIG4_DELTA_POINTS,
        }
    }
}

/// A single Q-function panel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub name: String,
    pub params: SystemParams,
    pub peak_threshold: f64,
}

fn panel(
    name: &str,
    g: f64,
    gamma: f64,
    eps_d: f64,
    dwc: f64,
    delta: f64,
    peak_threshold: f64,
) -> Panel {
    Panel {
        name: name.into(),
        params: SystemParams {
            g,
            kappa: 1.0,
            gamma,
            eps_d,
            dwc,
            delta,
        },
        peak_threshold,
    }
}

/// Q-function panels of a figure, in panel order.
pub fn panels(id: FigureId) -> Vec<Panel> {
    let letters = ["a", "b", "c", "d"];
    match id {
        FigureId::Fig1 => FIG1_DWC
            .iter()
            .zip(letters)
            .map(|(&dwc, l)| {
                let g = FIG1_G;
                panel(
                    &format!("fig1{l}"),
                    g,
                    0.0,
                    g / 2.0,
                    dwc,
                    FIG1_DELTA_OVER_G * g,
                    DEFAULT_PEAK_THRESHOLD,
                )
            })
            .collect(),
        FigureId::Fig2 => FIG2_DELTA_OVER_G
            .iter()
            .zip(letters)
            .map(|(&d, l)| {
                let g = FIG2_G;
                panel(
                    &format!("fig2{l}"),
                    g,
                    0.0,
                    g / 2.0,
                    FIG2_DWC,
                    d * g,
                    FIG2_PEAK_THRESHOLD,
                )
            })
            .collect(),
        FigureId::Fig3 => FIG3_PANELS
            .iter()
            .zip(&letters[1..])
            .map(|(&d, l)| {
                let g = FIG3_G_OVER_GAMMA * FIG3_GAMMA;
                panel(
                    &format!("fig3{l}"),
                    g,
                    FIG3_GAMMA,
                    FIG3_EPS_OVER_G * g,
                    FIG3_DWC,
                    d * g,
                    DEFAULT_PEAK_THRESHOLD,
                )
            })
            .collect(),
        FigureId::Fig4 => Vec::new(),
    }
}

/// Manifest entry for one Q panel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelRecord {
    pub name: String,
    pub params: SystemParams,
    pub n_max: usize,
    pub residual: f64,
    pub mean_photon: f64,
    pub sigma_minus: Complex64,
    pub bloch: BlochVector,
    pub window: GridSpec,
    pub peak_threshold: f64,
    pub peaks: Vec<Peak>,
    pub branches: Vec<SemiclassicalBranch>,
    pub files: Vec<String>,
}

/// Drive range over which a Maxwell-Bloch curve has three roots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BistableWindow {
    pub delta_over_g: f64,
    pub eps_over_gamma: Option<(f64, f64)>,
    pub roots_at_marked_drive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps_over_g: f64,
    pub delta: f64,
    pub n_max: usize,
    pub residual: f64,
    pub n: f64,
    pub sigma_minus: Complex64,
    pub bloch: BlochVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub figure: FigureId,
    pub solver: SolverConfig,
    pub grid_points: usize,
    pub panels: Vec<PanelRecord>,
    pub bistable_windows: Vec<BistableWindow>,
    pub sweep: Vec<SweepPoint>,
    /// Parameters of the fourth figure's sweep: drive values, detuning axis.
    pub sweep_eps_over_g: Vec<f64>,
    pub sweep_delta: Vec<f64>,
    pub sweep_base: Option<SystemParams>,
    pub files: Vec<String>,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Semiclassical states relevant to a panel. Without qubit decay the
/// neoclassical and dispersive equations apply as well.
fn panel_branches(p: &SystemParams) -> Result<Vec<SemiclassicalBranch>> {
    let mut out = match mb_steady_roots(p) {
        Ok(b) => b,
        Err(JcError::SingularGammaTilde) => Vec::new(),
        Err(e) => return Err(e),
    };
    if p.gamma == 0.0 {
        out.extend(neoclassical_roots(p)?);
        if p.delta != 0.0 {
            out.extend(kerr_roots(p)?);
        }
    }
    Ok(out)
}

/// Solves one panel and its Q grid; returns the record and the grid.
pub fn solve_panel(
    panel: &Panel,
    solver: &SolverConfig,
    grid_points: usize,
) -> Result<(PanelRecord, QGrid)> {
    let run = || -> Result<(PanelRecord, QGrid)> {
        let p = &panel.params;
        let sol = solver.solve(p)?;
        let n = photon_number(&sol.rho, sol.space)?;
        let (sm, bloch) = qubit_moments(&sol.rho, sol.space)?;
        let rc = reduce_cavity(&sol.rho, sol.space)?;
        let mut window = GridSpec::for_photon_number(n);
        window.nx = grid_points;
        window.ny = grid_points;
        let q = q_function(&rc, &window)?;
        let peaks = find_peaks(&q, panel.peak_threshold)?;
        let record = PanelRecord {
            name: panel.name.clone(),
            params: *p,
            n_max: sol.space.n_max(),
            residual: sol.report.residual_norm,
            mean_photon: n,
            sigma_minus: sm,
            bloch,
            window,
            peak_threshold: panel.peak_threshold,
            peaks,
            branches: panel_branches(p)?,
            files: Vec::new(),
        };
        Ok((record, q))
    };
    run().map_err(|e| e.in_panel(&panel.name))
}

fn write_panel(dir: &Path, rec: &mut PanelRecord, q: &QGrid) -> Result<()> {
    let q_csv = format!("{}_q.csv", rec.name);
    let side = format!("{}_q.json", rec.name);
    let br = format!("{}_branches.csv", rec.name);
    let mut w = create(dir, &q_csv)?;
    q.write_csv(&mut w)?;
    w.flush()?;
    let sidecar = QGridSidecar {
        window: rec.window,
        n_max: rec.n_max,
        mean_photon: rec.mean_photon,
        params: rec.params,
        peak_threshold: rec.peak_threshold,
        peaks: rec.peaks.clone(),
    };
    let mut w = create(dir, &side)?;
    serde_json::to_writer_pretty(&mut w, &sidecar)?;
    writeln!(w)?;
    w.flush()?;
    let mut w = create(dir, &br)?;
    write_branches_csv(&rec.branches, &mut w)?;
    w.flush()?;
    rec.files = vec![q_csv, side, br];
    Ok(())
}

/// Maxwell-Bloch photon number against ε_d/γ for each curve, every root.
fn fig3_scurves(dir: &Path) -> Result<(Vec<BistableWindow>, String)> {
    let g = FIG3_G_OVER_GAMMA * FIG3_GAMMA;
    let drives = linspace(0.0, FIG3_EPS_OVER_GAMMA_MAX, FIG3_EPS_POINTS)?;
    let name = "fig3a_scurves.csv".to_string();
    let mut w = create(dir, &name)?;
    writeln!(
        w,
        "delta_over_g,eps_d_over_gamma,n,re_alpha,im_alpha,stability"
    )?;
    let mut windows = Vec::new();
    for &d in &FIG3_CURVES {
        let params = |eps_over_gamma: f64| SystemParams {
            g,
            kappa: 1.0,
            gamma: FIG3_GAMMA,
            eps_d: eps_over_gamma * FIG3_GAMMA,
            dwc: FIG3_DWC,
            delta: d * g,
        };
        let mut window: Option<(f64, f64)> = None;
        for &x in &drives {
            let roots = mb_steady_roots(&params(x)).map_err(|e| e.in_panel("fig3a"))?;
            if roots.len() == 3 {
                window = Some(window.map_or((x, x), |(a, _)| (a, x)));
            }
            for b in &roots {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    float(d),
                    float(x),
                    float(b.n),
                    float(b.alpha.re),
                    float(b.alpha.im),
                    b.stability.as_str()
                )?;
            }
        }
        let marked = mb_steady_roots(&params(FIG3_EPS_OVER_G * g / FIG3_GAMMA))?.len();
        windows.push(BistableWindow {
            delta_over_g: d,
            eps_over_gamma: window,
            roots_at_marked_drive: marked,
        });
    }
    w.flush()?;
    Ok((windows, name))
}

fn fig4_base() -> SystemParams {
    SystemParams {
        g: FIG4_G,
        kappa: 1.0,
        gamma: 0.0,
        eps_d: 0.0,
        dwc: 0.0,
        delta: 0.0,
    }
}

/// Quantum ⟨n⟩ and ⟨σ−⟩ over the drive × detuning grid of the fourth figure.
pub fn fig4_sweep(solver: &SolverConfig, delta_points: usize) -> Result<Vec<SweepPoint>> {
    let deltas = linspace(FIG4_DELTA_RANGE.0, FIG4_DELTA_RANGE.1, delta_points)?;
    let jobs: Vec<(f64, f64)> = FIG4_EPS_OVER_G
        .iter()
        .flat_map(|&e| deltas.iter().map(move |&d| (e, d)))
        .collect();
    jobs.par_iter()
        .map(|&(e, d)| {
            let p = SystemParams {
                eps_d: e * FIG4_G,
                delta: d,
                ..fig4_base()
            };
            let run = || -> Result<SweepPoint> {
                let sol = solver.solve(&p)?;
                let (sm, bloch) = qubit_moments(&sol.rho, sol.space)?;
                Ok(SweepPoint {
                    eps_over_g: e,
                    delta: d,
                    n_max: sol.space.n_max(),
                    residual: sol.report.residual_norm,
                    n: photon_number(&sol.rho, sol.space)?,
                    sigma_minus: sm,
                    bloch,
                })
            };
            run().map_err(|err| err.in_panel(format!("fig4 eps/g={e} delta={d}")))
        })
        .collect()
}

fn write_fig4(dir: &Path, points: &[SweepPoint]) -> Result<Vec<String>> {
    let sweep = "fig4_sweep.csv".to_string();
    let mut w = create(dir, &sweep)?;
    writeln!(
        w,
        "eps_d_over_g,delta,n_max,n,abs_sigma_minus,bloch_x,bloch_y,bloch_z"
    )?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            float(p.eps_over_g),
            float(p.delta),
            p.n_max,
            float(p.n),
            float(p.sigma_minus.norm()),
            float(p.bloch.x),
            float(p.bloch.y),
            float(p.bloch.z)
        )?;
    }
    w.flush()?;

    let res = "fig4_resonance.csv".to_string();
    let mut w = create(dir, &res)?;
    writeln!(w, "eps_d_over_g,n")?;
    for &e in &FIG4_EPS_OVER_G {
        let p = SystemParams {
            eps_d: e * FIG4_G,
            ..fig4_base()
        };
        let roots = resonance_amplitude(&p, ResonanceVariant::Plain)?;
        let n = roots.first().map(|b| float(b.n)).unwrap_or_default();
        writeln!(w, "{},{}", float(e), n)?;
    }
    w.flush()?;
    Ok(vec![sweep, res])
}

/// Writes every data file of a figure plus `manifest.json` into
/// `spec.out_dir` and returns the manifest.
pub fn reproduce_figure(spec: &FigureSpec) -> Result<Manifest> {
    spec.solver.validate()?;
    if spec.grid_points < 3 || spec.delta_points < 1 {
        return Err(JcError::Validation {
            key: "grid_points".into(),
            message: "need at least 3 grid points and 1 detuning point".into(),
        });
    }
    let dir = spec.out_dir.as_path();
    fs::create_dir_all(dir)?;

    let mut manifest = Manifest {
        figure: spec.id,
        solver: spec.solver.clone(),
        grid_points: spec.grid_points,
        panels: Vec::new(),
        bistable_windows: Vec::new(),
        sweep: Vec::new(),
        sweep_eps_over_g: Vec::new(),
        sweep_delta: Vec::new(),
        sweep_base: None,
        files: Vec::new(),
    };

    let solved: Vec<(PanelRecord, QGrid)> = panels(spec.id)
        .par_iter()
        .map(|p| solve_panel(p, &spec.solver, spec.grid_points))
        .collect::<Result<_>>()?;
    for (mut rec, q) in solved {
        write_panel(dir, &mut rec, &q)?;
        manifest.files.extend(rec.files.iter().cloned());
        manifest.panels.push(rec);
    }

    match spec.id {
        FigureId::Fig3 => {
            let (windows, file) = fig3_scurves(dir)?;
            manifest.bistable_windows = windows;
            manifest.files.push(file);
        }
        FigureId::Fig4 => {
            manifest.sweep = fig4_sweep(&spec.solver, spec.delta_points)?;
            manifest.sweep_eps_over_g = FIG4_EPS_OVER_G.to_vec();
            manifest.sweep_delta =
                linspace(FIG4_DELTA_RANGE.0, FIG4_DELTA_RANGE.1, spec.delta_points)?;
            manifest.sweep_base = Some(fig4_base());
            manifest.files.extend(write_fig4(dir, &manifest.sweep)?);
        }
        _ => {}
    }

    manifest.files.push("manifest.json".into());
    let mut w = create(dir, "manifest.json")?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    w.flush()?;
    Ok(manifest)
}

/// True when a branch list contains an unstable Maxwell-Bloch root.
pub fn has_unstable(branches: &[SemiclassicalBranch]) -> bool {
    branches.iter().any(|b| b.stability == Stability::Unstable)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_figure_parameters() {
        // g/κ=16, δ/g=−1.25, γ/(2κ)=0, ε_d=g/2, Δω_c/κ = 0.40, 0.96, 1.52, 2.08
        let ps = panels(FigureId::Fig1);
        assert_eq!(ps.len(), 4);
        for (p, dwc) in ps.iter().zip([0.40, 0.96, 1.52, 2.08]) {
            let s = &p.params;
            assert_eq!(
                (s.g, s.kappa, s.gamma, s.eps_d, s.delta),
                (16.0, 1.0, 0.0, 8.0, -20.0)
            );
            assert_eq!(s.dwc, dwc);
            assert_eq!(s.delta / s.g, -1.25);
        }
        assert_eq!(ps[0].name, "fig1a");
    }

    #[test]
    fn second_figure_parameters() {
        // Δω_c/κ=0.8, g/κ=16, γ/(2κ)=0, ε_d=g/2, δ/g = −10, −5, 0, +5
        let ps = panels(FigureId::Fig2);
        let deltas: Vec<f64> = ps.iter().map(|p| p.params.delta / p.params.g).collect();
        assert_eq!(deltas, vec![-10.0, -5.0, 0.0, 5.0]);
        assert!(ps.iter().all(|p| p.params.dwc == 0.8
            && p.params.g == 16.0
            && p.params.gamma == 0.0
            && p.params.eps_d == 8.0));
    }

    #[test]
    fn third_figure_parameters() {
        // γ/(2κ)=1, g/γ=20, Δω_c/κ=2, ε_d/g=0.24, δ/g = −5.25, −4.5, −0.5
        let ps = panels(FigureId::Fig3);
        let names: Vec<&str> = ps.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, vec!["fig3b", "fig3c", "fig3d"]);
        for (p, d) in ps.iter().zip([-5.25, -4.5, -0.5]) {
            let s = &p.params;
            assert_eq!(s.gamma / (2.0 * s.kappa), 1.0);
            assert_eq!(s.g / s.gamma, 20.0);
            assert_eq!(s.dwc, 2.0);
            assert!((s.eps_d / s.g - 0.24).abs() < 1e-15);
            assert_eq!(s.delta / s.g, d);
        }
        assert_eq!(FIG3_CURVES, [-5.25, -4.5, -2.5, -0.5]);
    }

    #[test]
    fn fourth_figure_drive_set() {
        // Eight equidistant values in (0.45, 0.55] plus 0.575; Δω_c=0, γ=0, g/κ=16.
        let main = &FIG4_EPS_OVER_G[..8];
        assert!(main
            .windows(2)
            .all(|w| ((w[1] - w[0]) - 0.0125).abs() < 1e-12));
        assert!(main[0] > 0.45 && main[7] == 0.55);
        assert_eq!(FIG4_EPS_OVER_G[8], 0.575);
        let b = fig4_base();
        assert_eq!((b.g, b.dwc, b.gamma), (16.0, 0.0, 0.0));
        assert!(panels(FigureId::Fig4).is_empty());
    }

    #[test]
    fn figure_names_parse() {
        for id in [
            FigureId::Fig1,
            FigureId::Fig2,
            FigureId::Fig3,
            FigureId::Fig4,
        ] {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
        }
        assert!("fig5".parse::<FigureId>().is_err());
    }
}
