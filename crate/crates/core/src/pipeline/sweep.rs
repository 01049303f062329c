//! One-parameter sweeps of the quantum steady state.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fmt::float;
use crate::observables::{
    find_peaks, photon_number, q_function, qubit_moments, reduce_cavity, BlochVector, Peak,
};
use crate::pipeline::config::{Observable, SweepConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub n_max: Option<usize>,
    pub residual: Option<f64>,
    pub n: Option<f64>,
    pub sigma_minus: Option<Complex64>,
    pub bloch: Option<BlochVector>,
    pub peaks: Option<Vec<Peak>>,
    /// Solver failure for this row; the other rows are unaffected.
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(value: f64, message: String) -> Self {
        Self {
            value,
            n_max: None,
            residual: None,
            n: None,
            sigma_minus: None,
            bloch: None,
            peaks: None,
            error: Some(message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

fn run_row(cfg: &SweepConfig, value: f64) -> Result<SweepRow> {
    let p = cfg.axis.apply(&cfg.base, value);
    let sol = cfg.solver.solve(&p)?;
    let mut row = SweepRow {
        value,
        n_max: Some(sol.space.n_max()),
        residual: Some(sol.report.residual_norm),
        n: None,
        sigma_minus: None,
        bloch: None,
        peaks: None,
        error: None,
    };
    let want = |o: Observable| cfg.observables.contains(&o);
    let n = photon_number(&sol.rho, sol.space)?;
    if want(Observable::N) {
        row.n = Some(n);
    }
    if want(Observable::SigmaMinus) || want(Observable::Bloch) {
        let (sm, b) = qubit_moments(&sol.rho, sol.space)?;
        if want(Observable::SigmaMinus) {
            row.sigma_minus = Some(sm);
        }
        if want(Observable::Bloch) {
            row.bloch = Some(b);
        }
    }
    if want(Observable::QPeaks) {
        let rc = reduce_cavity(&sol.rho, sol.space)?;
        let q = q_function(&rc, &cfg.grid.spec(n))?;
        row.peaks = Some(find_peaks(&q, cfg.grid.peak_threshold)?);
    }
    Ok(row)
}

/// Solves every axis value independently (in parallel); rows keep the
/// order of `cfg.values`.
pub fn run_sweep(cfg: &SweepConfig) -> SweepTable {
    let rows = cfg
        .values
        .par_iter()
        .map(|&v| run_row(cfg, v).unwrap_or_else(|e| SweepRow::failed(v, e.to_string())))
        .collect();
    SweepTable {
        config: cfg.clone(),
        rows,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

impl SweepTable {
    /// Header: axis name, `n_max`, `residual`, then one group of columns
    /// per requested observable, then `error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let obs = &self.config.observables;
        let mut header = vec![
            self.config.axis.name().to_string(),
            "n_max".into(),
            "residual".into(),
        ];
        for o in obs {
            match o {
                Observable::N => header.push("n".into()),
                Observable::SigmaMinus => header.extend(
                    ["re_sigma_minus", "im_sigma_minus", "abs_sigma_minus"].map(String::from),
                ),
                Observable::Bloch => {
                    header.extend(["bloch_x", "bloch_y", "bloch_z"].map(String::from))
                }
                Observable::QPeaks => {
                    header.extend(["n_peaks", "peak_x", "peak_y", "peak_height"].map(String::from))
                }
            }
        }
        header.push("error".into());
        writeln!(w, "{}", header.join(","))?;

        for r in &self.rows {
            let mut cells = vec![
                float(r.value),
                r.n_max.map(|n| n.to_string()).unwrap_or_default(),
                opt(r.residual),
            ];
            for o in obs {
                match o {
                    Observable::N => cells.push(opt(r.n)),
                    Observable::SigmaMinus => {
                        cells.push(opt(r.sigma_minus.map(|s| s.re)));
                        cells.push(opt(r.sigma_minus.map(|s| s.im)));
                        cells.push(opt(r.sigma_minus.map(|s| s.norm())));
                    }
                    Observable::Bloch => {
                        cells.push(opt(r.bloch.map(|b| b.x)));
                        cells.push(opt(r.bloch.map(|b| b.y)));
                        cells.push(opt(r.bloch.map(|b| b.z)));
                    }
                    Observable::QPeaks => {
                        let top = r.peaks.as_ref().and_then(|p| p.first());
                        cells.push(
                            r.peaks
                                .as_ref()
                                .map(|p| p.len().to_string())
                                .unwrap_or_default(),
                        );
                        cells.push(opt(top.map(|p| p.x)));
                        cells.push(opt(top.map(|p| p.y)));
                        cells.push(opt(top.map(|p| p.height)));
                    }
                }
            }
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            cells.push(err);
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}
