//! Flat key-value run configuration.
//!
//! ```text
//! # comment
//! [system] g=16 eps_d=8
//! [solver]
//! method = direct
//! n_max = auto
//! [grid]
//! points = 201
//! [sweep]
//! axis = delta
//! values = -16, 0, 16
//! observables = n, sigma_minus
//! ```
//!
//! A section header may be followed by `key=value` tokens on the same line.
//! On its own line a single `key = value` takes the rest of the line as value.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{JcError, Result};
use crate::hilbert::ModeSpace;
use crate::lindblad::{liouvillian, SystemParams};
use crate::steady::{
    converge_truncation, steady_state_dense_null, steady_state_direct, steady_state_evolve,
    ConvergencePolicy, DensityMatrix, Method, SolveReport,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// `None` grows the truncation until ⟨n⟩ settles (direct method only).
    pub n_max: Option<usize>,
    pub tol: f64,
    /// Integration horizon for the `evolve` method.
    pub t_max: f64,
    pub n_max_start: usize,
    pub n_max_cap: usize,
    pub rel_tol: f64,
    pub tail_tol: f64,
    pub growth: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let policy = ConvergencePolicy::default();
        Self {
            method: Method::Direct,
            n_max: None,
            tol: policy.tol,
            t_max: 1e4,
            n_max_start: policy.n_max_start,
            n_max_cap: policy.n_max_cap,
            rel_tol: policy.rel_tol,
            tail_tol: policy.tail_tol,
            growth: policy.growth,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyResult {
    pub rho: DensityMatrix,
    pub space: ModeSpace,
    pub report: SolveReport,
}

impl SolverConfig {
    pub fn policy(&self) -> ConvergencePolicy {
        ConvergencePolicy {
            n_max_start: self.n_max_start,
            n_max_cap: self.n_max_cap,
            rel_tol: self.rel_tol,
            tol: self.tol,
            tail_tol: self.tail_tol,
            growth: self.growth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| {
            Err(JcError::Validation {
                key: key.into(),
                message: message.into(),
            })
        };
        if self.n_max == Some(0) {
            return bad("n_max", "must be at least 1");
        }
        if self.n_max.is_none() && self.method != Method::Direct {
            return bad("n_max", "automatic truncation needs method = direct");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", "must be positive");
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad("t_max", "must be positive");
        }
        if self.n_max_start < 1 {
            return bad("n_max_start", "must be at least 1");
        }
        if self.n_max_cap < self.n_max_start {
            return bad("n_max_cap", "must not be below n_max_start");
        }
        if !(self.rel_tol >= 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol", "must be nonnegative");
        }
        if !(self.tail_tol >= 0.0 && self.tail_tol.is_finite()) {
            return bad("tail_tol", "must be nonnegative");
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return bad("growth", "must exceed 1");
        }
        Ok(())
    }

    /// Steady state of `p` under this configuration.
    pub fn solve(&self, p: &SystemParams) -> Result<SteadyResult> {
        self.validate()?;
        p.validate()?;
        let Some(n_max) = self.n_max else {
            let (rho, report) = converge_truncation(p, &self.policy())?;
            let space = ModeSpace::new(report.n_max_used)?;
            return Ok(SteadyResult { rho, space, report });
        };
        let space = ModeSpace::new(n_max)?;
        let l = liouvillian(p, space);
        let (rho, report) = match self.method {
            Method::Direct => steady_state_direct(&l, self.tol)?,
            Method::DenseNull => steady_state_dense_null(&l)?,
            Method::Evolve => {
                let ground = DensityMatrix::basis_projector(
                    space.total_dim(),
                    space.index(0, crate::hilbert::LOWER),
                );
                steady_state_evolve(&l, &ground, self.t_max, self.tol)?
            }
        };
        Ok(SteadyResult { rho, space, report })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// `None` uses √⟨n⟩ + 5.
    pub half_width: Option<f64>,
    pub points: usize,
    pub peak_threshold: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: None,
            points: crate::observables::DEFAULT_GRID_POINTS,
            peak_threshold: crate::observables::DEFAULT_PEAK_THRESHOLD,
        }
    }
}

impl GridConfig {
    pub fn spec(&self, mean_n: f64) -> crate::observables::GridSpec {
        let hw = self
            .half_width
            .unwrap_or_else(|| mean_n.max(0.0).sqrt() + 5.0);
        crate::observables::GridSpec::square(hw, self.points)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(hw) = self.half_width {
            if !(hw > 0.0 && hw.is_finite()) {
                return Err(JcError::Validation {
                    key: "half_width".into(),
                    message: "must be positive".into(),
                });
            }
        }
        if self.points < 3 {
            return Err(JcError::Validation {
                key: "points".into(),
                message: "need at least 3 points per axis".into(),
            });
        }
        if !(self.peak_threshold > 0.0 && self.peak_threshold < 1.0) {
            return Err(JcError::Validation {
                key: "peak_threshold".into(),
                message: "must lie in (0, 1)".into(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    EpsD,
    Dwc,
    Delta,
    Gamma,
    G,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::EpsD => "eps_d",
            Axis::Dwc => "dwc",
            Axis::Delta => "delta",
            Axis::Gamma => "gamma",
            Axis::G => "g",
        }
    }

    pub fn apply(&self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = *base;
        match self {
            Axis::EpsD => p.eps_d = value,
            Axis::Dwc => p.dwc = value,
            Axis::Delta => p.delta = value,
            Axis::Gamma => p.gamma = value,
            Axis::G => p.g = value,
        }
        p
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "eps_d" => Axis::EpsD,
            "dwc" => Axis::Dwc,
            "delta" => Axis::Delta,
            "gamma" => Axis::Gamma,
            "g" => Axis::G,
            other => return Err(format!("unknown axis `{other}` (eps_d|dwc|delta|gamma|g)")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    N,
    SigmaMinus,
    Bloch,
    QPeaks,
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::N => "n",
            Observable::SigmaMinus => "sigma_minus",
            Observable::Bloch => "bloch",
            Observable::QPeaks => "q_peaks",
        }
    }
}

impl FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "n" => Observable::N,
            "sigma_minus" => Observable::SigmaMinus,
            "bloch" => Observable::Bloch,
            "q_peaks" => Observable::QPeaks,
            other => {
                return Err(format!(
                    "unknown observable `{other}` (n|sigma_minus|bloch|q_peaks)"
                ))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub observables: Vec<Observable>,
}

/// Everything a run needs; `sweep` is present only for sweep runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemParams,
    pub solver: SolverConfig,
    pub grid: GridConfig,
    pub sweep: Option<SweepSpec>,
}

/// A validated sweep: base parameters, one varied axis and the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: SystemParams,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub observables: Vec<Observable>,
    pub solver: SolverConfig,
    pub grid: GridConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        validate_system(&self.system)?;
        self.solver.validate()?;
        self.grid.validate()?;
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(JcError::Validation {
                    key: "values".into(),
                    message: "sweep needs at least one value".into(),
                });
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(JcError::Validation {
                    key: "values".into(),
                    message: "values must be finite".into(),
                });
            }
            for v in &s.values {
                validate_system(&s.axis.apply(&self.system, *v)).map_err(|e| match e {
                    JcError::Validation { message, .. } => JcError::Validation {
                        key: "values".into(),
                        message: format!("{} = {v}: {message}", s.axis.name()),
                    },
                    other => other,
                })?;
            }
        }
        Ok(())
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let s = self.sweep.as_ref().ok_or_else(|| JcError::Validation {
            key: "sweep".into(),
            message: "configuration has no [sweep] section".into(),
        })?;
        Ok(SweepConfig {
            base: self.system,
            axis: s.axis,
            values: s.values.clone(),
            observables: s.observables.clone(),
            solver: self.solver.clone(),
            grid: self.grid.clone(),
        })
    }

    /// Text form accepted by [`parse_config`].
    pub fn to_text(&self) -> String {
        let mut t = String::new();
        let p = &self.system;
        let _ = writeln!(t, "[system]");
        for (k, v) in [
            ("g", p.g),
            ("kappa", p.kappa),
            ("gamma", p.gamma),
            ("eps_d", p.eps_d),
            ("dwc", p.dwc),
            ("delta", p.delta),
        ] {
            let _ = writeln!(t, "{k} = {v:?}");
        }
        let s = &self.solver;
        let _ = writeln!(t, "\n[solver]");
        let _ = writeln!(t, "method = {}", s.method);
        match s.n_max {
            Some(n) => writeln!(t, "n_max = {n}"),
            None => writeln!(t, "n_max = auto"),
        }
        .ok();
        let _ = writeln!(t, "tol = {:?}", s.tol);
        let _ = writeln!(t, "t_max = {:?}", s.t_max);
        let _ = writeln!(t, "n_max_start = {}", s.n_max_start);
        let _ = writeln!(t, "n_max_cap = {}", s.n_max_cap);
        let _ = writeln!(t, "rel_tol = {:?}", s.rel_tol);
        let _ = writeln!(t, "tail_tol = {:?}", s.tail_tol);
        let _ = writeln!(t, "growth = {:?}", s.growth);
        let g = &self.grid;
        let _ = writeln!(t, "\n[grid]");
        match g.half_width {
            Some(h) => writeln!(t, "half_width = {h:?}"),
            None => writeln!(t, "half_width = auto"),
        }
        .ok();
        let _ = writeln!(t, "points = {}", g.points);
        let _ = writeln!(t, "peak_threshold = {:?}", g.peak_threshold);
        if let Some(sw) = &self.sweep {
            let _ = writeln!(t, "\n[sweep]");
            let _ = writeln!(t, "axis = {}", sw.axis.name());
            let vals: Vec<String> = sw.values.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(t, "values = {}", vals.join(", "));
            let obs: Vec<&str> = sw.observables.iter().map(|o| o.name()).collect();
            let _ = writeln!(t, "observables = {}", obs.join(", "));
        }
        t
    }
}

fn validate_system(p: &SystemParams) -> Result<()> {
    for (key, v) in [
        ("g", p.g),
        ("kappa", p.kappa),
        ("gamma", p.gamma),
        ("eps_d", p.eps_d),
        ("dwc", p.dwc),
        ("delta", p.delta),
    ] {
        if !v.is_finite() {
            return Err(JcError::Validation {
                key: key.into(),
                message: "must be finite".into(),
            });
        }
    }
    if p.kappa <= 0.0 {
        return Err(JcError::Validation {
            key: "kappa".into(),
            message: "must be positive".into(),
        });
    }
    for (key, v) in [("g", p.g), ("gamma", p.gamma), ("eps_d", p.eps_d)] {
        if v < 0.0 {
            return Err(JcError::Validation {
                key: key.into(),
                message: "must be nonnegative".into(),
            });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    System,
    Solver,
    Grid,
    Sweep,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| JcError::Validation {
        key: key.into(),
        message: format!("cannot parse `{v}`: {e}"),
    })
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn parse_auto<T: FromStr>(key: &str, v: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if v == "auto" {
        Ok(None)
    } else {
        parse_value(key, v).map(Some)
    }
}

/// Splits the body of a line into `(key, value)` pairs.
fn pairs(body: &str, line: usize) -> Result<Vec<(String, String)>> {
    let body = body.trim();
    if body.is_empty() {
        return Ok(Vec::new());
    }
    let parse_err = |message: String| JcError::Parse { line, message };
    let single = body.split_once('=').filter(|(_, v)| {
        // Lists may contain ", "; any other whitespace means several tokens.
        let compact: Vec<&str> = v.split(',').map(str::trim).collect();
        !v.contains('=') && !compact.join(",").contains(char::is_whitespace)
    });
    if let Some((k, v)) = single {
        let k = k.trim();
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(parse_err(format!("malformed key in `{body}`")));
        }
        return Ok(vec![(k.to_string(), v.trim().to_string())]);
    }
    let mut out = Vec::new();
    let normalized = body
        .replace(" = ", "=")
        .replace("= ", "=")
        .replace(" =", "=");
    for tok in normalized.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key=value, found `{tok}`")))?;
        if k.is_empty() || v.is_empty() {
            return Err(parse_err(format!("expected key=value, found `{tok}`")));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Parses and validates a run configuration. Unset keys take defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section: Option<Section> = None;
    let mut seen: Vec<(u8, String)> = Vec::new();
    let mut axis: Option<Axis> = None;
    let mut values: Option<Vec<f64>> = None;
    let (mut start, mut stop, mut count): (Option<f64>, Option<f64>, Option<usize>) =
        (None, None, None);
    let mut observables: Option<Vec<Observable>> = None;
    let mut sweep_seen = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let (name, tail) = rest.split_once(']').ok_or_else(|| JcError::Parse {
                line,
                message: "unterminated section header".into(),
            })?;
            section = Some(match name.trim() {
                "system" => Section::System,
                "solver" => Section::Solver,
                "grid" => Section::Grid,
                "sweep" => {
                    sweep_seen = true;
                    Section::Sweep
                }
                other => {
                    return Err(JcError::Parse {
                        line,
                        message: format!("unknown section [{other}]"),
                    })
                }
            });
            body = tail;
        }
        let kvs = pairs(body, line)?;
        if kvs.is_empty() {
            continue;
        }
        let Some(sec) = section else {
            return Err(JcError::Parse {
                line,
                message: "key outside of any section".into(),
            });
        };
        for (k, v) in kvs {
            let tag = sec as u8;
            if seen.iter().any(|(s, key)| *s == tag && *key == k) {
                return Err(JcError::Parse {
                    line,
                    message: format!("duplicate key `{k}`"),
                });
            }
            seen.push((tag, k.clone()));
            let unknown = || JcError::Parse {
                line,
                message: format!("unknown key `{k}`"),
            };
            let key = k.as_str();
            let v = v.as_str();
            match sec {
                Section::System => {
                    let slot = match key {
                        "g" => &mut cfg.system.g,
                        "kappa" => &mut cfg.system.kappa,
                        "gamma" => &mut cfg.system.gamma,
                        "eps_d" => &mut cfg.system.eps_d,
                        "dwc" => &mut cfg.system.dwc,
                        "delta" => &mut cfg.system.delta,
                        _ => return Err(unknown()),
                    };
                    *slot = parse_value(key, v)?;
                }
                Section::Solver => match key {
                    "method" => cfg.solver.method = parse_value(key, v)?,
                    "n_max" => cfg.solver.n_max = parse_auto(key, v)?,
                    "tol" => cfg.solver.tol = parse_value(key, v)?,
                    "t_max" => cfg.solver.t_max = parse_value(key, v)?,
                    "n_max_start" => cfg.solver.n_max_start = parse_value(key, v)?,
                    "n_max_cap" => cfg.solver.n_max_cap = parse_value(key, v)?,
                    "rel_tol" => cfg.solver.rel_tol = parse_value(key, v)?,
                    "tail_tol" => cfg.solver.tail_tol = parse_value(key, v)?,
                    "growth" => cfg.solver.growth = parse_value(key, v)?,
                    _ => return Err(unknown()),
                },
                Section::Grid => match key {
                    "half_width" => cfg.grid.half_width = parse_auto(key, v)?,
                    "points" => cfg.grid.points = parse_value(key, v)?,
                    "peak_threshold" => cfg.grid.peak_threshold = parse_value(key, v)?,
                    _ => return Err(unknown()),
                },
                Section::Sweep => match key {
                    "axis" => axis = Some(parse_value(key, v)?),
                    "values" => values = Some(parse_list(key, v)?),
                    "start" => start = Some(parse_value(key, v)?),
                    "stop" => stop = Some(parse_value(key, v)?),
                    "count" => count = Some(parse_value(key, v)?),
                    "observables" => observables = Some(parse_list(key, v)?),
                    _ => return Err(unknown()),
                },
            }
        }
    }

    if sweep_seen {
        let axis = axis.ok_or_else(|| JcError::Validation {
            key: "axis".into(),
            message: "[sweep] needs an axis".into(),
        })?;
        let values = match (values, start, stop, count) {
            (Some(v), None, None, None) => v,
            (None, Some(a), Some(b), Some(n)) => linspace(a, b, n)?,
            (None, ..) => {
                return Err(JcError::Validation {
                    key: "values".into(),
                    message: "give either `values` or all of `start`, `stop`, `count`".into(),
                })
            }
            (Some(_), ..) => {
                return Err(JcError::Validation {
                    key: "values".into(),
                    message: "`values` cannot be combined with `start`/`stop`/`count`".into(),
                })
            }
        };
        let mut observables = observables.unwrap_or_else(|| vec![Observable::N]);
        observables.sort();
        observables.dedup();
        cfg.sweep = Some(SweepSpec {
            axis,
            values,
            observables,
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `count` points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    match count {
        0 => Err(JcError::Validation {
            key: "count".into(),
            message: "must be at least 1".into(),
        }),
        1 => Ok(vec![start]),
        _ => Ok((0..count)
            .map(|k| {
                if k + 1 == count {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_inline_config() {
        let cfg = parse_config("[system] g=16 eps_d=8\n").unwrap();
        assert_eq!(cfg.system.g, 16.0);
        assert_eq!(cfg.system.eps_d, 8.0);
        assert_eq!(cfg.system.kappa, 1.0);
        assert_eq!(cfg.solver, SolverConfig::default());
        assert_eq!(cfg.grid, GridConfig::default());
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn negative_kappa_names_the_key() {
        match parse_config("[system]\nkappa = -1\n") {
            Err(JcError::Validation { key, .. }) => assert_eq!(key, "kappa"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        for (text, expect) in [
            ("[system]\ng = 1\nbogus = 2\n", 3),
            ("\n\n[nowhere]\n", 3),
            ("g = 1\n", 1),
            ("[system]\ng = 1\ng = 2\n", 3),
            ("[system] g=1 eps_d\n", 1),
            ("[system\n", 1),
        ] {
            match parse_config(text) {
                Err(JcError::Parse { line, .. }) => assert_eq!(line, expect, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(
            parse_config("[system]\ng = sixteen\n"),
            Err(JcError::Validation { .. })
        ));
    }

    #[test]
    fn detuned_sweep_keeps_qubit_detuning_identity() {
        let text = "
            [system]
            g = 40
            gamma = 2
            dwc = 2
            eps_d = 9.6   # ε_d/g = 0.24
            [sweep]
            axis = delta
            values = -210, -180, -20
        ";
        let cfg = parse_config(text).unwrap();
        let sw = cfg.sweep_config().unwrap();
        for v in &sw.values {
            let p = sw.axis.apply(&sw.base, *v);
            assert_eq!(p.dwq(), 2.0 - v);
        }
        assert_eq!(sw.observables, vec![Observable::N]);
    }

    #[test]
    fn range_form_and_round_trip() {
        let text = "
            [system] g=16 eps_d=8.8 delta=-20
            [solver]
            method = evolve
            n_max = 30
            tol = 1e-9
            [grid] half_width=7.5 points=121 peak_threshold=0.001
            [sweep]
            axis = dwc
            start = -2
            stop = 2
            count = 5
            observables = q_peaks, n, bloch
        ";
        let cfg = parse_config(text).unwrap();
        let sw = cfg.sweep.as_ref().unwrap();
        assert_eq!(sw.values, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(
            sw.observables,
            vec![Observable::N, Observable::Bloch, Observable::QPeaks]
        );
        assert_eq!(cfg.solver.n_max, Some(30));
        assert_eq!(cfg.grid.half_width, Some(7.5));
        let again = parse_config(&cfg.to_text()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn auto_truncation_requires_direct_method() {
        assert!(matches!(
            parse_config("[solver] method=evolve\n"),
            Err(JcError::Validation { key, .. }) if key == "n_max"
        ));
    }

    #[test]
    fn sweep_value_validation() {
        assert!(matches!(
            parse_config("[sweep]\naxis = gamma\nvalues = 1, -1\n"),
            Err(JcError::Validation { key, .. }) if key == "values"
        ));
        assert!(matches!(
            parse_config("[sweep]\naxis = gamma\nvalues = 1\nstart = 0\n"),
            Err(JcError::Validation { .. })
        ));
        assert!(matches!(
            parse_config("[sweep]\nvalues = 1\n"),
            Err(JcError::Validation { key, .. }) if key == "axis"
        ));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-16.0, 16.0, 65).unwrap();
        assert_eq!(v.len(), 65);
        assert_eq!((v[0], v[32], v[64]), (-16.0, 0.0, 16.0));
        assert_eq!(linspace(3.0, 4.0, 1).unwrap(), vec![3.0]);
    }
}
