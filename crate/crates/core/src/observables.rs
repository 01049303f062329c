//! Cavity reduction, expectation values, the Husimi Q function and its peaks.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{JcError, Result};
use crate::fmt::float;
use crate::hilbert::{coherent_amplitudes, ModeSpace, LOWER, UPPER};
use crate::steady::DensityMatrix;

/// Partial trace over the qubit: ρ_cv = ⟨+|ρ|+⟩ + ⟨−|ρ|−⟩.
pub fn reduce_cavity(rho: &DensityMatrix, space: ModeSpace) -> Result<DensityMatrix> {
    check_dim(rho, space.total_dim())?;
    let dc = space.cavity_dim();
    let mut out = DensityMatrix::zeros(dc);
    for m in 0..dc {
        for n in 0..dc {
            let v = rho.get(space.index(n, LOWER), space.index(m, LOWER))
                + rho.get(space.index(n, UPPER), space.index(m, UPPER));
            out.set(n, m, v);
        }
    }
    Ok(out)
}

fn check_dim(rho: &DensityMatrix, expected: usize) -> Result<()> {
    if rho.dim() != expected {
        return Err(JcError::DimensionMismatch {
            expected,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// ⟨a†a⟩ of a cavity-only density matrix.
pub fn expect_photon(rho_cv: &DensityMatrix) -> f64 {
    rho_cv
        .diagonal()
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum()
}

/// ⟨a†a⟩ of a full cavity ⊗ qubit state.
pub fn photon_number(rho: &DensityMatrix, space: ModeSpace) -> Result<f64> {
    check_dim(rho, space.total_dim())?;
    Ok(crate::steady::mean_photon(rho, space))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Distance from the z axis, √(X² + Y²).
    pub fn transverse(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// ⟨σ−⟩ and the Bloch vector, with σ− = (σx − iσy)/2.
pub fn qubit_moments(rho: &DensityMatrix, space: ModeSpace) -> Result<(Complex64, BlochVector)> {
    check_dim(rho, space.total_dim())?;
    let mut sm = Complex64::new(0.0, 0.0);
    let mut z = 0.0;
    for n in 0..space.cavity_dim() {
        let (lo, up) = (space.index(n, LOWER), space.index(n, UPPER));
        sm += rho.get(up, lo);
        z += rho.get(up, up).re - rho.get(lo, lo).re;
    }
    let bloch = BlochVector {
        x: 2.0 * sm.re,
        y: -2.0 * sm.im,
        z,
    };
    Ok((sm, bloch))
}

/// Rectangular sampling window for [`q_function`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

pub const DEFAULT_GRID_POINTS: usize = 201;

impl GridSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
            nx: points,
            ny: points,
        }
    }

    /// Half-width √⟨n⟩ + 5 around the origin, 201 × 201.
    pub fn for_photon_number(mean_n: f64) -> Self {
        Self::square(mean_n.max(0.0).sqrt() + 5.0, DEFAULT_GRID_POINTS)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.nx >= 2
            && self.ny >= 2
            && self.x_min.is_finite()
            && self.y_min.is_finite()
            && self.x_max.is_finite()
            && self.y_max.is_finite()
            && self.x_max > self.x_min
            && self.y_max > self.y_min;
        if ok {
            Ok(())
        } else {
            Err(JcError::InvalidParams(format!("bad grid window {self:?}")))
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.y_max
        } else {
            self.y_min + j as f64 * self.dy()
        }
    }
}

/// Sampled Q function; `values[j * nx + i]` is Q at (x_i, y_j).
#[derive(Clone, Debug, PartialEq)]
pub struct QGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl QGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Riemann sum Σ Q dx dy.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.dx() * self.spec.dy()
    }

    /// `x,y,q` rows, y outer and x inner.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,q")?;
        for j in 0..self.spec.ny {
            let y = float(self.spec.y(j));
            for i in 0..self.spec.nx {
                writeln!(
                    w,
                    "{},{},{}",
                    float(self.spec.x(i)),
                    y,
                    float(self.get(i, j))
                )?;
            }
        }
        Ok(())
    }
}

/// Q(x + iy) = ⟨α|ρ_cv|α⟩ / π on the grid.
///
/// Coherent amplitudes are taken on the truncated space directly, which is
/// exact for ρ_cv supported there; no representability bound is imposed on
/// the window.
pub fn q_function(rho_cv: &DensityMatrix, spec: &GridSpec) -> Result<QGrid> {
    spec.validate()?;
    let d = rho_cv.dim();
    if d == 0 {
        return Err(JcError::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let n_max = d - 1;
    let data = rho_cv.as_vec();
    let values: Vec<f64> = (0..spec.ny * spec.nx)
        .into_par_iter()
        .map(|k| {
            let (j, i) = (k / spec.nx, k % spec.nx);
            let v = coherent_amplitudes(Complex64::new(spec.x(i), spec.y(j)), n_max);
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, vj) in v.iter().enumerate() {
                let column = &data[col * d..(col + 1) * d];
                let inner: Complex64 = v.iter().zip(column).map(|(vi, r)| vi.conj() * r).sum();
                acc += inner * vj;
            }
            acc.re / std::f64::consts::PI
        })
        .collect();
    Ok(QGrid {
        spec: *spec,
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub x: f64,
    pub y: f64,
    pub height: f64,
    /// Q mass of the grid points closer to this peak than to any other.
    pub weight: f64,
    /// Height above the highest saddle connecting to a taller peak.
    pub prominence: f64,
}

pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.01;

/// Peaks whose prominence is below this fraction of their own height are
/// treated as ripple and dropped.
pub const MIN_RELATIVE_PROMINENCE: f64 = 0.01;

/// Topographic prominence of every grid point that starts its own basin
/// when points are flooded in decreasing order.
fn prominences(q: &QGrid) -> Vec<Option<f64>> {
    let (nx, ny) = (q.spec.nx, q.spec.ny);
    let v = &q.values;
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));

    const UNSEEN: usize = usize::MAX;
    let mut parent = vec![UNSEEN; v.len()];
    // Highest point of each basin, stored at its root.
    let mut summit = vec![0usize; v.len()];
    let mut prom = vec![None; v.len()];

    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    for &k in &order {
        parent[k] = k;
        summit[k] = k;
        let (j, i) = (k / nx, k % nx);
        let mut roots: Vec<usize> = Vec::with_capacity(8);
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let (jj, ii) = (j as i64 + dj, i as i64 + di);
                if (dj, di) == (0, 0) || jj < 0 || ii < 0 || jj >= ny as i64 || ii >= nx as i64 {
                    continue;
                }
                let nb = jj as usize * nx + ii as usize;
                if parent[nb] != UNSEEN {
                    let r = find(&mut parent, nb);
                    if !roots.contains(&r) {
                        roots.push(r);
                    }
                }
            }
        }
        if roots.is_empty() {
            continue;
        }
        roots.sort_by(|&a, &b| {
            v[summit[b]]
                .total_cmp(&v[summit[a]])
                .then(summit[a].cmp(&summit[b]))
        });
        let top = roots[0];
        for &r in &roots[1..] {
            prom[summit[r]] = Some(v[summit[r]] - v[k]);
            parent[r] = top;
        }
        parent[k] = top;
    }
    if let Some(&g) = order.first() {
        prom[g] = Some(v[g]);
    }
    prom
}

fn is_strict_max(q: &QGrid, i: usize, j: usize) -> bool {
    let (nx, ny) = (q.spec.nx as i64, q.spec.ny as i64);
    let c = q.get(i, j);
    for dj in -1i64..=1 {
        for di in -1i64..=1 {
            let (ii, jj) = (i as i64 + di, j as i64 + dj);
            if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= nx || jj >= ny {
                continue;
            }
            if q.get(ii as usize, jj as usize) >= c {
                return false;
            }
        }
    }
    true
}

/// Quadratic refinement from central differences on the 3 × 3 stencil.
fn refine(q: &QGrid, i: usize, j: usize) -> Result<(f64, f64, f64)> {
    let s = &q.spec;
    let (x0, y0, h0) = (s.x(i), s.y(j), q.get(i, j));
    if i == 0 || j == 0 || i + 1 == s.nx || j + 1 == s.ny {
        return Ok((x0, y0, h0));
    }
    let (dx, dy) = (s.dx(), s.dy());
    let f = |di: i64, dj: i64| q.get((i as i64 + di) as usize, (j as i64 + dj) as usize);
    let gx = (f(1, 0) - f(-1, 0)) / (2.0 * dx);
    let gy = (f(0, 1) - f(0, -1)) / (2.0 * dy);
    let hxx = (f(1, 0) - 2.0 * h0 + f(-1, 0)) / (dx * dx);
    let hyy = (f(0, 1) - 2.0 * h0 + f(0, -1)) / (dy * dy);
    let hxy = (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4.0 * dx * dy);
    let det = hxx * hyy - hxy * hxy;
    if !(hxx < 0.0 && det > 0.0) {
        return Err(JcError::GridTooCoarse { x: x0, y: y0 });
    }
    let ox = (-(hyy * gx - hxy * gy) / det).clamp(-dx, dx);
    let oy = (-(hxx * gy - hxy * gx) / det).clamp(-dy, dy);
    let height =
        h0 + gx * ox + gy * oy + 0.5 * (hxx * ox * ox + 2.0 * hxy * ox * oy + hyy * oy * oy);
    Ok((x0 + ox, y0 + oy, height.max(h0)))
}

/// Strict 8-neighbour maxima at or above `rel_threshold · max Q`, with
/// prominence at least [`MIN_RELATIVE_PROMINENCE`] of their height, refined
/// by a local quadratic fit and sorted by height, tallest first.
pub fn find_peaks(q: &QGrid, rel_threshold: f64) -> Result<Vec<Peak>> {
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(JcError::InvalidParams(format!(
            "peak threshold {rel_threshold} outside (0, 1)"
        )));
    }
    let floor = rel_threshold * q.max();
    let prom = prominences(q);
    let mut peaks = Vec::new();
    for j in 0..q.spec.ny {
        for i in 0..q.spec.nx {
            let h = q.get(i, j);
            if h <= 0.0 || h < floor || !is_strict_max(q, i, j) {
                continue;
            }
            let Some(p) = prom[j * q.spec.nx + i] else {
                continue;
            };
            if p < MIN_RELATIVE_PROMINENCE * h {
                continue;
            }
            let (x, y, height) = refine(q, i, j)?;
            peaks.push(Peak {
                x,
                y,
                height,
                weight: 0.0,
                prominence: p,
            });
        }
    }
    peaks.sort_by(|a, b| {
        b.height
            .total_cmp(&a.height)
            .then(a.x.total_cmp(&b.x))
            .then(a.y.total_cmp(&b.y))
    });

    if !peaks.is_empty() {
        let cell = q.spec.dx() * q.spec.dy();
        let mut near = Vec::with_capacity(peaks.len());
        for j in 0..q.spec.ny {
            for i in 0..q.spec.nx {
                let (x, y) = (q.spec.x(i), q.spec.y(j));
                let dist: Vec<f64> = peaks.iter().map(|p| (p.x - x).hypot(p.y - y)).collect();
                let best = dist.iter().copied().fold(f64::INFINITY, f64::min);
                // Points equidistant from several peaks are shared evenly.
                near.clear();
                near.extend(
                    (0..peaks.len()).filter(|&k| dist[k] - best <= 1e-9 * best.max(1e-300)),
                );
                let share = q.get(i, j) * cell / near.len() as f64;
                for &k in &near {
                    peaks[k].weight += share;
                }
            }
        }
    }
    Ok(peaks)
}

/// JSON sidecar describing a Q grid: window, parameters, peaks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QGridSidecar {
    pub window: GridSpec,
    pub n_max: usize,
    pub mean_photon: f64,
    pub params: crate::lindblad::SystemParams,
    pub peak_threshold: f64,
    pub peaks: Vec<Peak>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::coherent_vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
        let a: Vec<Complex64> = (0..d * d)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut m = DensityMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let v: Complex64 = (0..d).map(|k| a[k * d + i] * a[k * d + j].conj()).sum();
                m.set(i, j, v);
            }
        }
        m.normalize_trace();
        m
    }

    fn coherent_cavity(alpha: Complex64, n_max: usize) -> DensityMatrix {
        DensityMatrix::from_pure(&coherent_vector(alpha, ModeSpace::new(n_max).unwrap()).unwrap())
    }

    #[test]
    fn product_state_reduces_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = ModeSpace::new(4).unwrap();
        let cav = random_state(&mut rng, s.cavity_dim());
        let qb = random_state(&mut rng, 2);
        let rc = reduce_cavity(&cav.kron(&qb), s).unwrap();
        assert!(rc.frobenius_distance(&cav) < 1e-14);
    }

    #[test]
    fn reduction_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = ModeSpace::new(5).unwrap();
        for _ in 0..10 {
            let rho = random_state(&mut rng, s.total_dim());
            let rc = reduce_cavity(&rho, s).unwrap();
            assert!((rc.trace() - c(1.0, 0.0)).norm() < 1e-12);
            assert!(rc.hermitian_defect() < 1e-14);
        }
        assert!(matches!(
            reduce_cavity(&DensityMatrix::zeros(3), s),
            Err(JcError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dressed_state_reduces_to_mixture() {
        let s = ModeSpace::new(3).unwrap();
        let mut psi = vec![c(0.0, 0.0); s.total_dim()];
        psi[s.index(1, LOWER)] = c(0.5f64.sqrt(), 0.0);
        psi[s.index(0, UPPER)] = c(0.5f64.sqrt(), 0.0);
        let rc = reduce_cavity(&DensityMatrix::from_pure(&psi), s).unwrap();
        let mut expect = DensityMatrix::zeros(4);
        expect.set(0, 0, c(0.5, 0.0));
        expect.set(1, 1, c(0.5, 0.0));
        assert!(rc.frobenius_distance(&expect) < 1e-15);
    }

    #[test]
    fn photon_expectations() {
        assert_eq!(expect_photon(&coherent_cavity(c(0.0, 0.0), 10)), 0.0);
        assert!((expect_photon(&coherent_cavity(c(1.0, -1.0), 40)) - 2.0).abs() < 1e-8);
        let s = ModeSpace::new(2).unwrap();
        let rho = DensityMatrix::basis_projector(s.total_dim(), s.index(2, UPPER));
        assert_eq!(photon_number(&rho, s).unwrap(), 2.0);
    }

    #[test]
    fn qubit_moment_examples() {
        let s = ModeSpace::new(2).unwrap();
        let lower = DensityMatrix::basis_projector(s.total_dim(), s.index(0, LOWER));
        let (sm, b) = qubit_moments(&lower, s).unwrap();
        assert_eq!(sm, c(0.0, 0.0));
        assert_eq!(b.z, -1.0);

        let mut psi = vec![c(0.0, 0.0); s.total_dim()];
        psi[s.index(0, LOWER)] = c(0.5f64.sqrt(), 0.0);
        psi[s.index(0, UPPER)] = c(0.5f64.sqrt(), 0.0);
        let (sm, b) = qubit_moments(&DensityMatrix::from_pure(&psi), s).unwrap();
        assert!((sm - c(0.5, 0.0)).norm() < 1e-15);
        assert!((b.x - 1.0).abs() < 1e-15 && b.z.abs() < 1e-15);

        // σ− = (σx − iσy)/2 for a phase e^{iπ/3} on the upper level.
        psi[s.index(0, UPPER)] = Complex64::from_polar(0.5f64.sqrt(), PI / 3.0);
        let (sm, b) = qubit_moments(&DensityMatrix::from_pure(&psi), s).unwrap();
        assert!((sm - c(b.x, -b.y) * 0.5).norm() < 1e-15);
        assert!((b.y + (PI / 3.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn moments_consistency_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = ModeSpace::new(3).unwrap();
        for _ in 0..20 {
            let rho = random_state(&mut rng, s.total_dim());
            let (sm, b) = qubit_moments(&rho, s).unwrap();
            assert!((sm.norm() - 0.5 * b.transverse()).abs() < 1e-12);
            assert!(b.length() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn vacuum_q_is_gaussian() {
        let q = q_function(
            &coherent_cavity(c(0.0, 0.0), 20),
            &GridSpec::square(3.0, 61),
        )
        .unwrap();
        assert!((q.get(30, 30) - 1.0 / PI).abs() < 1e-15);
        for (i, j) in [(0, 0), (10, 40), (45, 30), (60, 7)] {
            let (x, y) = (q.spec.x(i), q.spec.y(j));
            assert!((q.get(i, j) - (-(x * x + y * y)).exp() / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_q_profile_and_normalization() {
        let alpha = c(2.0, 1.0);
        let rho = coherent_cavity(alpha, 80);
        let r = alpha.norm() + 6.0;
        let q = q_function(&rho, &GridSpec::square(r, 241)).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..q.spec.ny {
            for i in 0..q.spec.nx {
                let b = c(q.spec.x(i), q.spec.y(j));
                worst = worst.max((q.get(i, j) - (-(b - alpha).norm_sqr()).exp() / PI).abs());
            }
        }
        assert!(worst < 1e-6, "{worst}");
        assert!((q.integral() - 1.0).abs() < 1e-4);

        let peaks = find_peaks(&q, DEFAULT_PEAK_THRESHOLD).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].x - 2.0).abs() < q.spec.dx() && (peaks[0].y - 1.0).abs() < q.spec.dy());
        assert!((peaks[0].height - 1.0 / PI).abs() < 1e-3);
        assert!((peaks[0].weight - q.integral()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_mixture_has_two_equal_peaks() {
        let plus = coherent_cavity(c(3.0, 0.0), 60);
        let minus = coherent_cavity(c(-3.0, 0.0), 60);
        let mut mix = DensityMatrix::zeros(61);
        for j in 0..61 {
            for i in 0..61 {
                mix.set(i, j, (plus.get(i, j) + minus.get(i, j)) * 0.5);
            }
        }
        let q = q_function(&mix, &GridSpec::square(8.0, 161)).unwrap();
        let peaks = find_peaks(&q, DEFAULT_PEAK_THRESHOLD).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].height - peaks[1].height).abs() < 0.01 * peaks[0].height);
        assert!((peaks[0].x + peaks[1].x).abs() < q.spec.dx());
        assert!((peaks[0].weight - peaks[1].weight).abs() < 1e-6);
    }

    #[test]
    fn indefinite_fit_is_reported() {
        let spec = GridSpec::square(1.0, 3);
        // Strict maximum at the centre sitting on a diagonal ridge.
        let v = vec![0.99, 0.9, 0.0, 0.9, 1.0, 0.9, 0.0, 0.9, 0.99];
        let grid = QGrid { spec, values: v };
        assert!(matches!(
            find_peaks(&grid, 0.01),
            Err(JcError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn ripple_below_prominence_floor_is_dropped() {
        // A broad bump carrying a tiny secondary maximum on its flank.
        let spec = GridSpec::square(4.0, 81);
        let mut values = Vec::with_capacity(81 * 81);
        for j in 0..81 {
            for i in 0..81 {
                let (x, y) = (spec.x(i), spec.y(j));
                let main = (-(x * x + y * y) / 2.0).exp();
                let ripple = 1e-4 * (-((x - 2.0).powi(2) + y * y) / 0.02).exp();
                values.push(main + ripple);
            }
        }
        let grid = QGrid { spec, values };
        let peaks = find_peaks(&grid, 0.01).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!(peaks[0].x.abs() < 1e-9 && peaks[0].y.abs() < 1e-9);
    }

    #[test]
    fn csv_layout() {
        let q = q_function(&coherent_cavity(c(0.0, 0.0), 4), &GridSpec::square(1.0, 3)).unwrap();
        let mut buf = Vec::new();
        q.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,q");
        assert_eq!(lines.len(), 10);
        assert!(lines[1].starts_with("-1.0000000000000000e0,-1.0000000000000000e0,"));
        assert!(lines[2].starts_with("0.0000000000000000e0,-1.0000000000000000e0,"));
    }

    #[test]
    fn threshold_must_be_fractional() {
        let q = q_function(&coherent_cavity(c(0.0, 0.0), 4), &GridSpec::square(1.0, 5)).unwrap();
        assert!(find_peaks(&q, 0.0).is_err());
        assert!(find_peaks(&q, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn q_is_nonnegative(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(&mut rng, 8);
            let q = q_function(&rho, &GridSpec::square(3.0, 21)).unwrap();
            proptest::prop_assert!(q.min() >= -1e-12);
        }
    }
}
