//! Pointwise `Σ` blocks and the spectral density of `U_R` with respect to a
//! pair of defect vectors.

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{CircleGrid, ScatteringFunction};
use crate::error::{Error, Result};
use crate::lr::{shift, LrElement, LrSpace, SectionParams};
use crate::verblunsky::{alpha_from_defects, balanced_split, recover_omega};
use crate::C64;

pub type Mat2 = Matrix2<C64>;

/// Grid samples of the `Σ` blocks at `(n, m)`.
#[derive(Debug, Clone)]
pub struct SigmaBlocks {
    pub n: i64,
    pub m: i64,
    pub grid: CircleGrid,
    /// `diag(Ā, A)·[[1, ω̄], [ω, 1]]`.
    pub s21_renorm: Vec<Mat2>,
    /// `diag(tⁿ, t̄^m)·Σ21'`; its columns are `K_{n,m}` and `t K̃_{n,m}`.
    pub s21: Vec<Mat2>,
    /// `[[1, R̄], [R, 1]]`.
    pub s22: Vec<Mat2>,
    /// `Σ12 Σ22⁻¹ Σ21` with `Σ12 = Σ21*`.
    pub s11: Vec<Mat2>,
}

impl SigmaBlocks {
    pub fn s12(&self) -> Vec<Mat2> {
        self.s21.iter().map(|m| m.adjoint()).collect()
    }
}

fn diag(a: C64, b: C64) -> Mat2 {
    Mat2::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), b)
}

/// Builds the blocks from the defect pair at `(n, m)`.
pub fn sigma_blocks(
    space: &LrSpace,
    n: i64,
    m: i64,
    section: &SectionParams,
    grid: CircleGrid,
) -> Result<SigmaBlocks> {
    let pair = space
        .defect_pair_converged(n, m, section)
        .map_err(|e| e.at_level(n + m))?;
    let omega = recover_omega(space, &pair, grid)?;
    let (k1, _) = space.evaluate(&pair.k, grid)?;
    let r = space.scattering().samples_on(grid)?;
    let tn = grid.monomial(n);
    let tbm = grid.monomial(-m);
    let one = C64::new(1.0, 0.0);
    let size = grid.size();
    let mut s21_renorm = Vec::with_capacity(size);
    let mut s21 = Vec::with_capacity(size);
    let mut s22 = Vec::with_capacity(size);
    let mut s11 = Vec::with_capacity(size);
    for i in 0..size {
        let a = tn[i] * k1[i].conj();
        let w = omega.samples[i];
        let sr = diag(a.conj(), a) * Mat2::new(one, w.conj(), w, one);
        let s = diag(tn[i], tbm[i]) * sr;
        let s22_i = Mat2::new(one, r[i].conj(), r[i], one);
        let det = 1.0 - r[i].norm_sqr();
        if !(det > 1e-12) {
            return Err(Error::Conditioning(format!(
                "Σ22 is singular at theta = {:.6} (1 - |R|² = {det:e})",
                grid.theta(i)
            )));
        }
        let inv = Mat2::new(one, -r[i].conj(), -r[i], one) / C64::new(det, 0.0);
        s11.push(s.adjoint() * inv * s);
        s21_renorm.push(sr);
        s21.push(s);
        s22.push(s22_i);
    }
    Ok(SigmaBlocks {
        n,
        m,
        grid,
        s21_renorm,
        s21,
        s22,
        s11,
    })
}

/// Which pair of unit vectors a density refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairTag {
    /// `(K_{n,n}, t K̃_{n,n})`.
    KAndTKtilde,
    /// `(K_{n,n}, K̃_{n+1,n})`.
    KAndKtildeNext,
}

#[derive(Debug, Clone)]
pub struct SpectralDensity {
    pub n: i64,
    pub tag: PairTag,
    pub grid: CircleGrid,
    pub samples: Vec<Mat2>,
}

/// Smallest eigenvalue of a Hermitian 2×2 matrix.
pub fn min_eigenvalue(m: &Mat2) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    0.5 * (a + d) - ((0.5 * (a - d)).powi(2) + b.norm_sqr()).sqrt()
}

fn check_nonnegative(samples: &[Mat2], grid: CircleGrid) -> Result<()> {
    for (i, m) in samples.iter().enumerate() {
        let herm = (m - m.adjoint())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if herm > 1e-9 * scale {
            return Err(Error::Inconsistency(format!(
                "density is not Hermitian at theta = {:.6} (defect {herm:e})",
                grid.theta(i)
            )));
        }
        let lmin = min_eigenvalue(m);
        if lmin < -1e-9 * scale {
            return Err(Error::Inconsistency(format!(
                "density has eigenvalue {lmin:e} at theta = {:.6}",
                grid.theta(i)
            )));
        }
    }
    Ok(())
}

/// Density of the spectral measure of `U_R` for `(K_{n,n}, t K̃_{n,n})`.
pub fn spectral_density(
    r: &ScatteringFunction,
    n: i64,
    section: &SectionParams,
) -> Result<SpectralDensity> {
    let space = LrSpace::new(r);
    let blocks = sigma_blocks(&space, n, n, section, r.grid())?;
    check_nonnegative(&blocks.s11, blocks.grid)?;
    Ok(SpectralDensity {
        n,
        tag: PairTag::KAndTKtilde,
        grid: blocks.grid,
        samples: blocks.s11,
    })
}

/// Moves a `(K, tK̃)` density to the pair `(K_{n,n}, K̃_{n+1,n})` via
/// `Σ ↦ C* Σ C`, `C = [[1, -ᾱ/ρ], [0, t̄/ρ]]`.
pub fn change_basis_density(d: &SpectralDensity, alpha2n: C64) -> Result<SpectralDensity> {
    if !(alpha2n.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "|alpha| = {} is not below 1",
            alpha2n.norm()
        )));
    }
    if d.tag != PairTag::KAndTKtilde {
        return Err(Error::Input(
            "basis change expects a (K, tK~) density".into(),
        ));
    }
    let rho = (1.0 - alpha2n.norm_sqr()).sqrt();
    let nodes = d.grid.nodes();
    let samples: Vec<Mat2> = d
        .samples
        .iter()
        .zip(&nodes)
        .map(|(s, t)| {
            let c = Mat2::new(
                C64::new(1.0, 0.0),
                -alpha2n.conj() / rho,
                C64::new(0.0, 0.0),
                t.conj() / rho,
            );
            c.adjoint() * s * c
        })
        .collect();
    check_nonnegative(&samples, d.grid)?;
    Ok(SpectralDensity {
        n: d.n,
        tag: PairTag::KAndKtildeNext,
        grid: d.grid,
        samples,
    })
}

/// Density for either tagged pair at level `2n`.
pub fn tagged_density(
    r: &ScatteringFunction,
    n: i64,
    tag: PairTag,
    section: &SectionParams,
) -> Result<SpectralDensity> {
    let d = spectral_density(r, n, section)?;
    match tag {
        PairTag::KAndTKtilde => Ok(d),
        PairTag::KAndKtildeNext => {
            let space = LrSpace::new(r);
            let pair = space
                .defect_pair_converged(n, n, section)
                .map_err(|e| e.at_level(2 * n))?;
            change_basis_density(&d, alpha_from_defects(&space, &pair)?)
        }
    }
}

/// Density samples plus the moment comparison, ready for output.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub n: i64,
    pub tag: PairTag,
    pub grid: usize,
    pub log_det: f64,
    pub moments: MomentReport,
    /// Row-major `[s00, s01, s10, s11]` per grid node.
    pub samples: Vec<[C64; 4]>,
    #[serde(skip)]
    pub density: SpectralDensity,
}

pub fn spectrum_report(
    r: &ScatteringFunction,
    n: i64,
    tag: PairTag,
    kmax: usize,
    section: &SectionParams,
) -> Result<SpectrumReport> {
    let density = tagged_density(r, n, tag, section)?;
    let moments = moment_check(&density, r, kmax, section)?;
    Ok(SpectrumReport {
        n,
        tag,
        grid: density.grid.size(),
        log_det: log_det_integral(&density),
        moments,
        samples: density
            .samples
            .iter()
            .map(|m| [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
            .collect(),
        density,
    })
}

/// `∫ t^k dΣ` by the trapezoidal rule.
pub fn moment(d: &SpectralDensity, k: i64) -> Mat2 {
    let tk = d.grid.monomial(k);
    let sum: Mat2 = d.samples.iter().zip(&tk).map(|(s, t)| s * *t).sum();
    sum / C64::new(d.grid.size() as f64, 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentEntry {
    pub k: i64,
    /// Quadrature moment, row-major `[s00, s01, s10, s11]`.
    pub quadrature: [C64; 4],
    /// `<U^k x_j, x_i>` from the Gram representation.
    pub exact: [C64; 4],
    pub discrepancy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub n: i64,
    pub tag: PairTag,
    pub entries: Vec<MomentEntry>,
    pub max_discrepancy: f64,
}

/// The vector pair a density refers to, in generator coordinates.
pub fn tagged_pair(
    space: &LrSpace,
    n: i64,
    tag: PairTag,
    section: &SectionParams,
) -> Result<(LrElement, LrElement)> {
    let here = space
        .defect_pair_converged(n, n, section)
        .map_err(|e| e.at_level(2 * n))?;
    let second = match tag {
        PairTag::KAndTKtilde => shift(&here.ktilde, 1),
        PairTag::KAndKtildeNext => {
            space
                .defect_pair_converged(n + 1, n, section)
                .map_err(|e| e.at_level(2 * n + 1))?
                .ktilde
        }
    };
    Ok((here.k, second))
}

/// Compares quadrature moments of `d` with exact Gram moments for `|k| ≤ kmax`.
pub fn moment_check(
    d: &SpectralDensity,
    r: &ScatteringFunction,
    kmax: usize,
    section: &SectionParams,
) -> Result<MomentReport> {
    let space = LrSpace::new(r);
    let (x0, x1) = tagged_pair(&space, d.n, d.tag, section)?;
    let xs = [&x0, &x1];
    let kmax = kmax as i64;
    let entries: Vec<MomentEntry> = (-kmax..=kmax)
        .into_par_iter()
        .map(|k| {
            let q = moment(d, k);
            let mut exact = [C64::new(0.0, 0.0); 4];
            for i in 0..2 {
                for j in 0..2 {
                    exact[2 * i + j] = space.inner_product(&shift(xs[j], k), xs[i])?;
                }
            }
            let quadrature = [q[(0, 0)], q[(0, 1)], q[(1, 0)], q[(1, 1)]];
            let discrepancy = quadrature
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            Ok(MomentEntry {
                k,
                quadrature,
                exact,
                discrepancy,
            })
        })
        .collect::<Result<_>>()?;
    let max_discrepancy = entries.iter().map(|e| e.discrepancy).fold(0.0, f64::max);
    Ok(MomentReport {
        n: d.n,
        tag: d.tag,
        entries,
        max_discrepancy,
    })
}

/// `sup_t ‖ρ_j diag(1, t̄) Σ21'_{j+1} - Σ21'_j diag(1, t̄) [[1, -ᾱ_j], [-α_j, 1]]‖`
/// (entrywise maximum).
pub fn sigma_recursion_check(
    r: &ScatteringFunction,
    level: i64,
    section: &SectionParams,
) -> Result<f64> {
    let space = LrSpace::new(r);
    let grid = r.grid();
    let (n0, m0) = balanced_split(level);
    let (n1, m1) = balanced_split(level + 1);
    let here = sigma_blocks(&space, n0, m0, section, grid)?;
    let next = sigma_blocks(&space, n1, m1, section, grid)?;
    let pair = space
        .defect_pair_converged(n0, m0, section)
        .map_err(|e| e.at_level(level))?;
    let alpha = alpha_from_defects(&space, &pair)?;
    let rho = C64::new((1.0 - alpha.norm_sqr()).sqrt(), 0.0);
    let one = C64::new(1.0, 0.0);
    let theta = Mat2::new(one, -alpha.conj(), -alpha, one);
    let nodes = grid.nodes();
    let mut worst: f64 = 0.0;
    for (i, t) in nodes.iter().enumerate() {
        let dt = diag(one, t.conj());
        let lhs = dt * next.s21_renorm[i] * rho;
        let rhs = here.s21_renorm[i] * dt * theta;
        worst = worst.max((lhs - rhs).iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

/// Trapezoidal value of `∫ log det Σ11 dm` (diagnostic only).
pub fn log_det_integral(d: &SpectralDensity) -> f64 {
    let sum: f64 = d.samples.iter().map(|m| m.determinant().re.ln()).sum();
    sum / d.samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::LaurentSeries;

    fn monomial_r(gamma: C64, power: i64, m: usize) -> ScatteringFunction {
        let grid = CircleGrid::new(m).unwrap();
        ScatteringFunction::from_coeffs(grid, &LaurentSeries::new(power, vec![gamma]).unwrap())
            .unwrap()
    }

    fn params() -> SectionParams {
        SectionParams {
            start: 16,
            cap: 64,
            ..SectionParams::default()
        }
    }

    fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
        (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_r_blocks() {
        let r = monomial_r(C64::new(0.0, 0.0), 0, 128);
        let space = LrSpace::new(&r);
        let grid = r.grid();
        let b = sigma_blocks(&space, 2, 2, &params(), grid).unwrap();
        let t2 = grid.monomial(2);
        for (i, t) in t2.iter().enumerate() {
            let e = max_diff(&b.s21[i], &diag(*t, t.conj()));
            assert!(e < 1e-14, "{e}");
            assert!(max_diff(&b.s22[i], &Mat2::identity()) == 0.0);
            assert!(max_diff(&b.s11[i], &Mat2::identity()) < 1e-14);
        }
        let d = spectral_density(&r, 0, &params()).unwrap();
        for k in -3..=3 {
            let expected = if k == 0 {
                Mat2::identity()
            } else {
                Mat2::zeros()
            };
            assert!(max_diff(&moment(&d, k), &expected) < 1e-15);
        }
        assert!(sigma_recursion_check(&r, 0, &params()).unwrap() < 1e-14);
        let moved = change_basis_density(&d, C64::new(0.0, 0.0)).unwrap();
        assert!(moved
            .samples
            .iter()
            .all(|m| max_diff(m, &Mat2::identity()) < 1e-15));
    }

    #[test]
    fn rank_one_blocks() {
        let gamma = C64::new(0.3, 0.4);
        let r = monomial_r(gamma, -1, 128);
        let space = LrSpace::new(&r);
        let grid = r.grid();
        let b = sigma_blocks(&space, 1, 0, &params(), grid).unwrap();
        let expected = Mat2::new(C64::new(1.0, 0.0), gamma.conj(), gamma, C64::new(1.0, 0.0));
        for i in 0..grid.size() {
            assert!(max_diff(&b.s21_renorm[i], &expected) < 1e-14);
            let det = b.s22[i].determinant();
            assert!((det - C64::new(1.0 - r.samples()[i].norm_sqr(), 0.0)).norm() < 1e-15);
        }
        for j in [0, 1, -1] {
            assert!(sigma_recursion_check(&r, j, &params()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn moments_match_gram() {
        let r = monomial_r(C64::new(0.5, 0.0), -1, 256);
        for n in [0, 1] {
            let d = spectral_density(&r, n, &params()).unwrap();
            let rep = moment_check(&d, &r, 4, &params()).unwrap();
            assert!(
                rep.max_discrepancy < 1e-12,
                "n = {n}: {}",
                rep.max_discrepancy
            );
            let m0 = moment(&d, 0);
            assert!((m0[(0, 0)].re - 1.0).abs() < 1e-12);
            assert!((m0[(1, 1)].re - 1.0).abs() < 1e-12);

            let space = LrSpace::new(&r);
            let pair = space.defect_pair_converged(n, n, &params()).unwrap();
            let alpha = alpha_from_defects(&space, &pair).unwrap();
            let moved = change_basis_density(&d, alpha).unwrap();
            let rep = moment_check(&moved, &r, 4, &params()).unwrap();
            assert!(
                rep.max_discrepancy < 1e-12,
                "moved n = {n}: {}",
                rep.max_discrepancy
            );
        }
    }

    #[test]
    fn change_basis_rejects_unit_alpha() {
        let r = monomial_r(C64::new(0.0, 0.0), 0, 64);
        let d = spectral_density(&r, 0, &params()).unwrap();
        assert!(matches!(
            change_basis_density(&d, C64::new(1.0, 0.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eigenvalue_helper() {
        let m = Mat2::new(
            C64::new(2.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, -1.0),
            C64::new(2.0, 0.0),
        );
        assert!((min_eigenvalue(&m) - 1.0).abs() < 1e-15);
    }
}
