//! Functions on the unit circle: equispaced grids, Laurent series, FFT
//! analysis and synthesis, the Szegő check, outer factorization and the
//! harmonic extension into the disk.
//!
//! Every circle function lives on a [`CircleGrid`] of `M` nodes
//! `exp(2πik/M)`. Fourier coefficients are reported on the symmetric window
//! `[-M/2+1, M/2]`, which is also the alias-free range used when looking up
//! coefficients of a [`ScatteringFunction`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

/// Equispaced grid of `size` points on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CircleGrid {
    size: usize,
}

impl CircleGrid {
    pub const MIN_SIZE: usize = 8;

    pub fn new(size: usize) -> Result<Self> {
        if size < Self::MIN_SIZE || !size.is_power_of_two() {
            return Err(Error::Input(format!(
                "grid size {size} must be a power of two >= {}",
                Self::MIN_SIZE
            )));
        }
        Ok(Self { size })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn theta(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.size as f64
    }

    #[inline]
    pub fn node(&self, k: usize) -> C64 {
        Complex64::from_polar(1.0, self.theta(k))
    }

    pub fn nodes(&self) -> Vec<C64> {
        (0..self.size).map(|k| self.node(k)).collect()
    }

    /// `t^p` sampled on the grid, exact up to the rounding of the node angle.
    pub fn monomial(&self, p: i64) -> Vec<C64> {
        let m = self.size as i64;
        (0..self.size)
            .map(|k| {
                let idx = (p * k as i64).rem_euclid(m);
                Complex64::from_polar(1.0, 2.0 * PI * idx as f64 / m as f64)
            })
            .collect()
    }

    /// Alias-free symmetric coefficient window `[-M/2+1, M/2]`.
    pub fn window(&self) -> (i64, i64) {
        let half = (self.size / 2) as i64;
        (-half + 1, half)
    }

    pub fn in_window(&self, j: i64) -> bool {
        let (lo, hi) = self.window();
        (lo..=hi).contains(&j)
    }
}

/// Finite Laurent series `Σ_{j=lo}^{hi} c_j t^j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaurentSeries {
    lo: i64,
    coeffs: Vec<C64>,
}

impl LaurentSeries {
    pub fn new(lo: i64, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Input(
                "Laurent series needs at least one coefficient".into(),
            ));
        }
        Ok(Self { lo, coeffs })
    }

    /// Builds a series from `(index, value)` entries; repeated indices add.
    pub fn from_entries(entries: &[(i64, C64)]) -> Result<Self> {
        let lo = entries
            .iter()
            .map(|e| e.0)
            .min()
            .ok_or_else(|| Error::Input("no coefficient entries".into()))?;
        let hi = entries.iter().map(|e| e.0).max().unwrap_or(lo);
        let mut coeffs = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for &(j, c) in entries {
            coeffs[(j - lo) as usize] += c;
        }
        Self::new(lo, coeffs)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient at `j`, zero outside the stored range.
    pub fn get(&self, j: i64) -> C64 {
        if j < self.lo || j > self.hi() {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(j - self.lo) as usize]
        }
    }

    /// Drops leading and trailing coefficients with modulus `<= tol`.
    pub fn trimmed(&self, tol: f64) -> Self {
        let first = self.coeffs.iter().position(|c| c.norm() > tol);
        match first {
            None => Self {
                lo: 0,
                coeffs: vec![C64::new(0.0, 0.0)],
            },
            Some(first) => {
                let last = self.coeffs.iter().rposition(|c| c.norm() > tol).unwrap();
                Self {
                    lo: self.lo + first as i64,
                    coeffs: self.coeffs[first..=last].to_vec(),
                }
            }
        }
    }

    pub fn evaluate(&self, t: C64) -> C64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * t.powi((self.lo + i as i64) as i32))
            .sum()
    }
}

/// Discrete Fourier analysis: `ĉ_j = (1/M) Σ_k f_k exp(-2πijk/M)` on the
/// symmetric window.
/// `count` equispaced points on the circle of radius `r`, starting at `r`.
pub fn ring(r: f64, count: usize) -> Vec<C64> {
    (0..count)
        .map(|k| C64::from_polar(r, 2.0 * PI * k as f64 / count as f64))
        .collect()
}

pub fn analyze(samples: &[C64], grid: CircleGrid) -> Result<LaurentSeries> {
    let m = grid.size();
    if samples.len() != m {
        return Err(Error::Input(format!(
            "sample count {} does not match grid size {m}",
            samples.len()
        )));
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let (lo, hi) = grid.window();
    let coeffs = (lo..=hi)
        .map(|j| buf[j.rem_euclid(m as i64) as usize] * scale)
        .collect();
    LaurentSeries::new(lo, coeffs)
}

/// Samples `Σ c_j t^j` on the grid.
pub fn synthesize(series: &LaurentSeries, grid: CircleGrid) -> Result<Vec<C64>> {
    let m = grid.size();
    if series.hi() - series.lo() >= m as i64 {
        return Err(Error::Resolution(format!(
            "Laurent series spans [{}, {}], too wide for a grid of {m} points",
            series.lo(),
            series.hi()
        )));
    }
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (i, c) in series.coeffs().iter().enumerate() {
        let j = series.lo() + i as i64;
        buf[j.rem_euclid(m as i64) as usize] += c;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    Ok(buf)
}

/// A contractive function on the circle, the scattering datum.
#[derive(Debug, Clone, Serialize)]
pub struct ScatteringFunction {
    grid: CircleGrid,
    samples: Vec<C64>,
    coeffs: LaurentSeries,
    margin: f64,
}

impl ScatteringFunction {
    pub fn from_samples(grid: CircleGrid, samples: Vec<C64>) -> Result<Self> {
        let coeffs = analyze(&samples, grid)?;
        Self::assemble(grid, samples, coeffs)
    }

    /// Builds `R` from Laurent coefficients, which must lie in the grid's
    /// symmetric window.
    pub fn from_coeffs(grid: CircleGrid, series: &LaurentSeries) -> Result<Self> {
        let (lo, hi) = grid.window();
        if series.lo() < lo || series.hi() > hi {
            return Err(Error::Resolution(format!(
                "coefficients span [{}, {}] but a grid of {} resolves only [{lo}, {hi}]",
                series.lo(),
                series.hi(),
                grid.size()
            )));
        }
        let samples = synthesize(series, grid)?;
        let coeffs = LaurentSeries::new(lo, (lo..=hi).map(|j| series.get(j)).collect())?;
        Self::assemble(grid, samples, coeffs)
    }

    fn assemble(grid: CircleGrid, samples: Vec<C64>, coeffs: LaurentSeries) -> Result<Self> {
        if let Some(k) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Input(format!("non-finite sample at node {k}")));
        }
        let sup = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
        Ok(Self {
            grid,
            samples,
            coeffs,
            margin: 1.0 - sup,
        })
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn coeffs(&self) -> &LaurentSeries {
        &self.coeffs
    }

    /// `1 - sup_k |R(t_k)|`.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Fourier coefficient `c_j`, or a resolution error outside the window.
    pub fn coefficient(&self, j: i64) -> Result<C64> {
        if !self.grid.in_window(j) {
            let (lo, hi) = self.grid.window();
            return Err(Error::Resolution(format!(
                "coefficient c_{j} requested but a grid of {} resolves only [{lo}, {hi}]",
                self.grid.size()
            )));
        }
        Ok(self.coeffs.get(j))
    }

    /// Samples of `R` on another grid, resynthesized from the coefficients.
    pub fn samples_on(&self, grid: CircleGrid) -> Result<Vec<C64>> {
        if grid == self.grid {
            return Ok(self.samples.clone());
        }
        synthesize(&self.coeffs.trimmed(0.0), grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SzegoReport {
    pub sup_modulus: f64,
    /// Trapezoidal value of `∫ log(1 - |R|) dm`.
    pub log_integral: f64,
    pub passes: bool,
    pub margin: f64,
}

pub fn szego_check(r: &ScatteringFunction) -> SzegoReport {
    let sup = r.samples().iter().map(|s| s.norm()).fold(0.0, f64::max);
    let m = r.samples().len() as f64;
    let log_integral = r
        .samples()
        .iter()
        .map(|s| (1.0 - s.norm()).ln())
        .sum::<f64>()
        / m;
    SzegoReport {
        sup_modulus: sup,
        log_integral,
        passes: sup < 1.0 && log_integral.is_finite(),
        margin: 1.0 - sup,
    }
}

/// Boundary values of an outer function together with its value at 0.
#[derive(Debug, Clone, Serialize)]
pub struct OuterFunction {
    pub grid: CircleGrid,
    pub boundary_samples: Vec<C64>,
    pub value_at_zero: f64,
}

/// Outer function `T` with `|T|² = w` on the grid and `T(0) > 0`.
///
/// Computed as `exp(½(log w + i·H[log w]))` with `H` the zero-mean conjugate
/// function (Fourier multiplier `-i·sign(j)`).
pub fn outer_factor(w: &[f64], grid: CircleGrid) -> Result<OuterFunction> {
    let m = grid.size();
    if w.len() != m {
        return Err(Error::Input(format!(
            "density has {} samples, grid has {m}",
            w.len()
        )));
    }
    if let Some((k, v)) = w.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Domain(format!(
            "density must be strictly positive; w[{k}] = {v:e} at theta = {:.6}",
            grid.theta(k)
        )));
    }
    let mut buf: Vec<C64> = w.iter().map(|v| C64::new(v.ln(), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    // log w + i H[log w] keeps j = 0, doubles j > 0, kills j < 0.
    let half = m / 2;
    let scale = 1.0 / m as f64;
    let mean_log = buf[0].re * scale;
    for (j, c) in buf.iter_mut().enumerate() {
        let factor = match j {
            0 => 1.0,
            _ if j < half => 2.0,
            // Nyquist term is its own conjugate partner: keep it real-symmetric.
            _ if j == half => 1.0,
            _ => 0.0,
        };
        *c *= factor * scale;
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let boundary_samples = buf.iter().map(|g| (g * 0.5).exp()).collect();
    Ok(OuterFunction {
        grid,
        boundary_samples,
        value_at_zero: (0.5 * mean_log).exp(),
    })
}

/// Harmonic extension `Σ_{j≥0} c_j z^j + Σ_{j<0} c_j z̄^{-j}` at `|z| < 1`.
pub fn harmonic_extension(f: &LaurentSeries, z: C64) -> Result<C64> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "harmonic extension needs |z| < 1, got |z| = {}",
            z.norm()
        )));
    }
    let zc = z.conj();
    Ok(f.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let j = f.lo() + i as i64;
            if j >= 0 {
                c * z.powi(j as i32)
            } else {
                c * zc.powi((-j) as i32)
            }
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(m: usize) -> CircleGrid {
        CircleGrid::new(m).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(CircleGrid::new(4).is_err());
        assert!(CircleGrid::new(24).is_err());
        assert!(CircleGrid::new(16).is_ok());
    }

    #[test]
    fn analyze_constant_monomial_and_zero() {
        let g = grid(16);
        let ones = vec![c(1.0, 0.0); 16];
        let s = analyze(&ones, g).unwrap();
        for j in s.lo()..=s.hi() {
            let expected = if j == 0 { 1.0 } else { 0.0 };
            assert!((s.get(j) - c(expected, 0.0)).norm() < 1e-15, "j = {j}");
        }

        let tbar = g.monomial(-1);
        let s = analyze(&tbar, g).unwrap();
        assert!((s.get(-1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(s.coeffs().iter().map(|c| c.norm()).sum::<f64>() < 1.0 + 1e-13);

        let s = analyze(&[c(0.0, 0.0); 16], g).unwrap();
        assert!(s.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn analyze_rejects_length_mismatch() {
        assert!(matches!(
            analyze(&[c(1.0, 0.0); 5], grid(8)),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn szego_examples() {
        let g = grid(32);
        let zero = ScatteringFunction::from_samples(g, vec![c(0.0, 0.0); 32]).unwrap();
        let rep = szego_check(&zero);
        assert_eq!(rep.sup_modulus, 0.0);
        assert_eq!(rep.log_integral, 0.0);
        assert!(rep.passes);

        let half = ScatteringFunction::from_samples(g, vec![c(0.3, 0.4); 32]).unwrap();
        let rep = szego_check(&half);
        assert!((rep.log_integral - 0.5f64.ln()).abs() < 1e-14);
        assert!(rep.passes);

        let mut s = vec![c(0.1, 0.0); 32];
        s[7] = c(0.0, 1.0);
        let bad = ScatteringFunction::from_samples(g, s).unwrap();
        assert!(!szego_check(&bad).passes);
    }

    #[test]
    fn outer_factor_examples() {
        let g = grid(64);
        let t = outer_factor(&vec![1.0; 64], g).unwrap();
        assert!((t.value_at_zero - 1.0).abs() < 1e-15);
        assert!(t
            .boundary_samples
            .iter()
            .all(|v| (v - c(1.0, 0.0)).norm() < 1e-14));

        let t = outer_factor(&vec![0.75; 64], g).unwrap();
        assert!((t.value_at_zero - 0.75f64.sqrt()).abs() < 1e-14);

        // log|1 - t/2|² has coefficients of size 2^-j/j; 256 nodes keep aliasing below 1e-12.
        let g = grid(256);
        let nodes = g.nodes();
        let w: Vec<f64> = nodes
            .iter()
            .map(|z| (c(1.0, 0.0) - z * 0.5).norm_sqr())
            .collect();
        let t = outer_factor(&w, g).unwrap();
        assert!((t.value_at_zero - 1.0).abs() < 1e-12);
        for (v, z) in t.boundary_samples.iter().zip(&nodes) {
            assert!((v - (c(1.0, 0.0) - z * 0.5)).norm() < 1e-12);
        }
    }

    #[test]
    fn outer_factor_rejects_nonpositive_density() {
        let mut w = vec![1.0; 16];
        w[3] = 0.0;
        let err = outer_factor(&w, grid(16)).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("w[3]")));
    }

    #[test]
    fn outer_factor_reproduces_smooth_density() {
        let g = grid(1024);
        let w: Vec<f64> = (0..1024)
            .map(|k| {
                let th = g.theta(k);
                1.2 + 0.5 * th.cos() + 0.3 * (3.0 * th).sin()
            })
            .collect();
        let t = outer_factor(&w, g).unwrap();
        let worst = t
            .boundary_samples
            .iter()
            .zip(&w)
            .map(|(v, w)| (v.norm_sqr() - w).abs() / w)
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "relative density error {worst:e}");
    }

    #[test]
    fn harmonic_extension_examples() {
        let gamma = c(0.2, -0.7);
        let f = LaurentSeries::new(-1, vec![gamma]).unwrap();
        let v = harmonic_extension(&f, c(0.5, 0.0)).unwrap();
        assert!((v - gamma * 0.5).norm() < 1e-15);

        let konst = LaurentSeries::new(0, vec![c(3.0, 1.0)]).unwrap();
        assert_eq!(
            harmonic_extension(&konst, c(0.1, 0.6)).unwrap(),
            c(3.0, 1.0)
        );

        let t = LaurentSeries::new(1, vec![c(1.0, 0.0)]).unwrap();
        let v = harmonic_extension(&t, c(0.0, 0.3)).unwrap();
        assert!((v - c(0.0, 0.3)).norm() < 1e-15);

        assert!(matches!(
            harmonic_extension(&t, c(1.0, 0.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn harmonic_extension_tends_to_mean() {
        let f = LaurentSeries::new(
            -2,
            vec![
                c(1.0, 1.0),
                c(0.5, 0.0),
                c(0.25, -1.0),
                c(2.0, 0.0),
                c(0.0, 3.0),
            ],
        )
        .unwrap();
        let v = harmonic_extension(&f, c(1e-9, -1e-9)).unwrap();
        assert!((v - f.get(0)).norm() < 1e-8);
    }

    #[test]
    fn from_coeffs_checks_window() {
        let g = grid(16);
        let s = LaurentSeries::new(-9, vec![c(1.0, 0.0)]).unwrap();
        assert!(matches!(
            ScatteringFunction::from_coeffs(g, &s),
            Err(Error::Resolution(_))
        ));
        let r =
            ScatteringFunction::from_coeffs(g, &LaurentSeries::new(-1, vec![c(0.5, 0.0)]).unwrap())
                .unwrap();
        assert!((r.margin() - 0.5).abs() < 1e-15);
        assert!((r.coefficient(-1).unwrap() - c(0.5, 0.0)).norm() < 1e-16);
        assert!(r.coefficient(-8).is_err());
        assert!(r.coefficient(8).is_ok());
    }
}
