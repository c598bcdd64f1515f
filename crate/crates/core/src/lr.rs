//! The weighted space `L^R` in generator coordinates.
//!
//! Elements are finite combinations of the analytic generators
//! `g'_k = [1; R] t^k` and the anti-analytic generators
//! `g''_l = [R̄; 1] t̄^l`. Within each family the generators are orthonormal,
//! and the only coupling is the Hankel block
//!
//! ```text
//! <g'_k, g''_l> = ∫ R t^(k+l) dm = c_{-(k+l)}
//! ```
//!
//! so every inner product is exact given the Fourier coefficients of `R`.
//! The defect vectors `K_{n,m}`, `K̃_{n,m}` are computed by projecting one
//! generator of a finite section frame against the others.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::circle::{CircleGrid, LaurentSeries, ScatteringFunction};
use crate::error::{Error, Result};
use crate::{c0, C64};

/// Index ranges of the generators an element is written over.
///
/// Analytic generators `g'_k` for `k` in `analytic_lo .. analytic_lo + analytic_len`,
/// anti-analytic generators `g''_l` for `l` in `anti_lo .. anti_lo + anti_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GeneratorFrame {
    pub analytic_lo: i64,
    pub analytic_len: usize,
    pub anti_lo: i64,
    pub anti_len: usize,
}

impl GeneratorFrame {
    /// The section frame for `Ȟ_{n,m}`: `g'_{n..n+N-1}` and `g''_{m+1..m+N}`.
    pub fn section(n: i64, m: i64, size: usize) -> Self {
        Self {
            analytic_lo: n,
            analytic_len: size,
            anti_lo: m + 1,
            anti_len: size,
        }
    }

    pub fn analytic_hi(&self) -> i64 {
        self.analytic_lo + self.analytic_len as i64 - 1
    }

    pub fn anti_hi(&self) -> i64 {
        self.anti_lo + self.anti_len as i64 - 1
    }

    pub fn dim(&self) -> usize {
        self.analytic_len + self.anti_len
    }

    /// Smallest frame containing both.
    pub fn union(&self, other: &Self) -> Self {
        fn merge(alo: i64, alen: usize, blo: i64, blen: usize) -> (i64, usize) {
            match (alen, blen) {
                (0, _) => (blo, blen),
                (_, 0) => (alo, alen),
                _ => {
                    let lo = alo.min(blo);
                    let hi = (alo + alen as i64).max(blo + blen as i64);
                    (lo, (hi - lo) as usize)
                }
            }
        }
        let (analytic_lo, analytic_len) = merge(
            self.analytic_lo,
            self.analytic_len,
            other.analytic_lo,
            other.analytic_len,
        );
        let (anti_lo, anti_len) = merge(self.anti_lo, self.anti_len, other.anti_lo, other.anti_len);
        Self {
            analytic_lo,
            analytic_len,
            anti_lo,
            anti_len,
        }
    }
}

/// Element of `L^R`: `Σ x_k g'_k + Σ y_l g''_l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrElement {
    pub frame: GeneratorFrame,
    pub x: Vec<C64>,
    pub y: Vec<C64>,
}

impl LrElement {
    pub fn zero(frame: GeneratorFrame) -> Self {
        Self {
            frame,
            x: vec![c0(); frame.analytic_len],
            y: vec![c0(); frame.anti_len],
        }
    }

    /// The single generator `g'_k`.
    pub fn analytic(k: i64) -> Self {
        Self {
            frame: GeneratorFrame {
                analytic_lo: k,
                analytic_len: 1,
                anti_lo: 0,
                anti_len: 0,
            },
            x: vec![C64::new(1.0, 0.0)],
            y: Vec::new(),
        }
    }

    /// The single generator `g''_l`.
    pub fn anti_analytic(l: i64) -> Self {
        Self {
            frame: GeneratorFrame {
                analytic_lo: 0,
                analytic_len: 0,
                anti_lo: l,
                anti_len: 1,
            },
            x: Vec::new(),
            y: vec![C64::new(1.0, 0.0)],
        }
    }

    /// Coordinate on `g'_k` (zero outside the frame).
    pub fn x_at(&self, k: i64) -> C64 {
        let i = k - self.frame.analytic_lo;
        if i < 0 || i >= self.frame.analytic_len as i64 {
            c0()
        } else {
            self.x[i as usize]
        }
    }

    /// Coordinate on `g''_l` (zero outside the frame).
    pub fn y_at(&self, l: i64) -> C64 {
        let i = l - self.frame.anti_lo;
        if i < 0 || i >= self.frame.anti_len as i64 {
            c0()
        } else {
            self.y[i as usize]
        }
    }

    /// Rewrites the element over a larger frame; shared coordinates are kept.
    pub fn rebase(&self, frame: GeneratorFrame) -> Self {
        let mut out = Self::zero(frame);
        for (i, v) in out.x.iter_mut().enumerate() {
            *v = self.x_at(frame.analytic_lo + i as i64);
        }
        for (i, v) in out.y.iter_mut().enumerate() {
            *v = self.y_at(frame.anti_lo + i as i64);
        }
        out
    }

    /// `a·self + b·other` over the union frame.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Self {
        let frame = self.frame.union(&other.frame);
        let mut out = Self::zero(frame);
        for (i, v) in out.x.iter_mut().enumerate() {
            let k = frame.analytic_lo + i as i64;
            *v = a * self.x_at(k) + b * other.x_at(k);
        }
        for (i, v) in out.y.iter_mut().enumerate() {
            let l = frame.anti_lo + i as i64;
            *v = a * self.y_at(l) + b * other.y_at(l);
        }
        out
    }

    pub fn scale(&self, a: C64) -> Self {
        Self {
            frame: self.frame,
            x: self.x.iter().map(|v| v * a).collect(),
            y: self.y.iter().map(|v| v * a).collect(),
        }
    }

    /// Largest coordinate difference, frames merged.
    pub fn max_coord_diff(&self, other: &Self) -> f64 {
        let d = self.combine(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0));
        d.x.iter().chain(&d.y).map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Multiplication by `t` applied `p` times: `g'_k → g'_{k+p}`, `g''_l → g''_{l-p}`.
pub fn shift(u: &LrElement, p: i64) -> LrElement {
    LrElement {
        frame: GeneratorFrame {
            analytic_lo: u.frame.analytic_lo + p,
            analytic_len: u.frame.analytic_len,
            anti_lo: u.frame.anti_lo - p,
            anti_len: u.frame.anti_len,
        },
        x: u.x.clone(),
        y: u.y.clone(),
    }
}

/// The Hankel coupling block of a frame: `cross[k][l] = c_{-(k+l)}`.
#[derive(Debug, Clone)]
pub struct GramBlocks {
    pub frame: GeneratorFrame,
    pub cross: DMatrix<C64>,
}

impl GramBlocks {
    /// Full Gram matrix with `G[r][c] = <gen_c, gen_r>`, analytic block first,
    /// so that `<u, v> = v* G u` in coordinates.
    pub fn full(&self) -> DMatrix<C64> {
        let na = self.frame.analytic_len;
        let nb = self.frame.anti_len;
        let mut g = DMatrix::<C64>::identity(na + nb, na + nb);
        for i in 0..na {
            for j in 0..nb {
                let c = self.cross[(i, j)];
                g[(na + j, i)] = c;
                g[(i, na + j)] = c.conj();
            }
        }
        g
    }
}

/// Unit vectors spanning `Ȟ_{n,m} ⊖ Ȟ_{n+1,m}` and `Ȟ_{n,m} ⊖ Ȟ_{n,m+1}`.
#[derive(Debug, Clone, Serialize)]
pub struct DefectPair {
    pub n: i64,
    pub m: i64,
    /// Section size `N` the pair was computed with.
    pub section: usize,
    pub k: LrElement,
    pub ktilde: LrElement,
    /// `<K, g'_n>`, the residual norm of `g'_n` against the rest of the frame.
    pub a0: f64,
    /// `<K̃, g''_{m+1}>`; agrees with `a0` (the Hankel block is symmetric).
    pub a0_tilde: f64,
    /// Condition number of the section Gram matrix.
    pub cond: f64,
    /// Whether section doubling met the coordinate tolerance.
    pub converged: bool,
    /// Coordinate change at the last doubling step.
    pub section_change: f64,
}

impl DefectPair {
    pub fn level(&self) -> i64 {
        self.n + self.m
    }
}

/// Finite-section controls for defect computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SectionParams {
    pub start: usize,
    pub cap: usize,
    /// Coordinate change below which doubling stops.
    pub tol: f64,
    /// Gram condition estimates above this are rejected.
    pub cond_cap: f64,
}

impl Default for SectionParams {
    fn default() -> Self {
        Self {
            start: 32,
            cap: 512,
            tol: 1e-9,
            cond_cap: 1e12,
        }
    }
}

/// Indices kept free at the top of the coefficient window so that elements
/// of neighbouring levels, and their shifts by a few steps, can still be
/// paired exactly.
const WINDOW_SLACK: i64 = 24;

/// Smallest admissible residual norm.
const A0_FLOOR: f64 = 1e-12;

/// `L^R` for a fixed scattering function.
#[derive(Debug, Clone, Copy)]
pub struct LrSpace<'a> {
    r: &'a ScatteringFunction,
}

impl<'a> LrSpace<'a> {
    pub fn new(r: &'a ScatteringFunction) -> Self {
        Self { r }
    }

    pub fn scattering(&self) -> &'a ScatteringFunction {
        self.r
    }

    /// `<g'_k, g''_l> = c_{-(k+l)}`.
    #[inline]
    pub fn coupling(&self, k: i64, l: i64) -> Result<C64> {
        self.r.coefficient(-(k + l))
    }

    /// Largest section size whose frame at level `j` stays in the coefficient
    /// window with room for neighbouring-level pairings.
    pub fn max_section(&self, level: i64) -> usize {
        let half = (self.r.grid().size() / 2) as i64;
        ((half - 1 - level - WINDOW_SLACK) / 2).max(0) as usize
    }

    pub fn gram_matrix(&self, frame: GeneratorFrame) -> Result<GramBlocks> {
        let na = frame.analytic_len;
        let nb = frame.anti_len;
        // Hankel: one lookup per anti-diagonal.
        let smin = frame.analytic_lo + frame.anti_lo;
        let diag: Vec<C64> = (0..(na + nb).saturating_sub(1))
            .map(|s| self.coupling(smin + s as i64, 0))
            .collect::<Result<_>>()?;
        let cross = DMatrix::from_fn(na, nb, |i, j| diag[i + j]);
        Ok(GramBlocks { frame, cross })
    }

    /// `<u, v>`, linear in `u`.
    pub fn inner_product(&self, u: &LrElement, v: &LrElement) -> Result<C64> {
        let mut acc = c0();
        for (i, xu) in u.x.iter().enumerate() {
            acc += xu * v.x_at(u.frame.analytic_lo + i as i64).conj();
        }
        for (i, yu) in u.y.iter().enumerate() {
            acc += yu * v.y_at(u.frame.anti_lo + i as i64).conj();
        }
        acc += self.cross_term(&u.x, u.frame.analytic_lo, &v.y, v.frame.anti_lo, false)?;
        acc += self.cross_term(&v.x, v.frame.analytic_lo, &u.y, u.frame.anti_lo, true)?;
        Ok(acc)
    }

    /// `Σ x_k conj(y_l) c_{-(k+l)}`, or with `swap` the conjugate pairing
    /// `Σ y_l conj(x_k) conj(c_{-(k+l)})` for `<g''_l, g'_k>` terms.
    fn cross_term(&self, x: &[C64], klo: i64, y: &[C64], llo: i64, swap: bool) -> Result<C64> {
        if x.is_empty() || y.is_empty() {
            return Ok(c0());
        }
        let smin = klo + llo;
        let diag: Vec<C64> = (0..x.len() + y.len() - 1)
            .map(|s| self.coupling(smin + s as i64, 0))
            .collect::<Result<_>>()?;
        let mut acc = c0();
        for (i, xk) in x.iter().enumerate() {
            if *xk == c0() {
                continue;
            }
            let mut row = c0();
            for (j, yl) in y.iter().enumerate() {
                let c = diag[i + j];
                row += if swap { yl * c.conj() } else { yl.conj() * c };
            }
            acc += if swap { xk.conj() * row } else { xk * row };
        }
        Ok(acc)
    }

    pub fn norm(&self, u: &LrElement) -> Result<f64> {
        Ok(self.inner_product(u, u)?.re.max(0.0).sqrt())
    }

    /// Defect pair at a fixed section size.
    pub fn defect_pair(&self, n: i64, m: i64, size: usize) -> Result<DefectPair> {
        if size == 0 {
            return Err(Error::Input("section size must be positive".into()));
        }
        let frame = GeneratorFrame::section(n, m, size);
        let blocks = self.gram_matrix(frame)?;
        let cond = hankel_condition(&blocks.cross);
        if !(cond <= 1e12) {
            return Err(Error::Conditioning(format!(
                "section Gram at (n, m, N) = ({n}, {m}, {size}) has condition estimate {cond:e}"
            )));
        }
        let g = blocks.full();
        let chol = g.cholesky().ok_or_else(|| {
            Error::Conditioning(format!(
                "section Gram at (n, m, N) = ({n}, {m}, {size}) is not positive definite"
            ))
        })?;
        // Columns of G^{-1} for g'_n (index 0) and g''_{m+1} (index N) give
        // the dual vectors orthogonal to every other generator of the frame.
        let dim = 2 * size;
        let mut rhs = DMatrix::<C64>::zeros(dim, 2);
        rhs[(0, 0)] = C64::new(1.0, 0.0);
        rhs[(size, 1)] = C64::new(1.0, 0.0);
        let dual = chol.solve(&rhs);
        let xa = dual[(0, 0)].re;
        let xb = dual[(size, 1)].re;
        let a0 = 1.0 / xa.sqrt();
        let a0_tilde = 1.0 / xb.sqrt();
        if !(a0 >= A0_FLOOR) || !(a0_tilde >= A0_FLOOR) {
            return Err(Error::Degeneracy(format!(
                "residual norm {a0:e} at (n, m) = ({n}, {m}); R violates the Szegő condition at grid scale"
            )));
        }
        let split = |col: usize, scale: f64| -> LrElement {
            LrElement {
                frame,
                x: (0..size).map(|i| dual[(i, col)] * scale).collect(),
                y: (0..size).map(|i| dual[(size + i, col)] * scale).collect(),
            }
        };
        Ok(DefectPair {
            n,
            m,
            section: size,
            k: split(0, a0),
            ktilde: split(1, a0_tilde),
            a0,
            a0_tilde,
            cond,
            converged: false,
            section_change: f64::NAN,
        })
    }

    /// Defect pair with the section size doubled until the coordinates settle.
    pub fn defect_pair_converged(
        &self,
        n: i64,
        m: i64,
        params: &SectionParams,
    ) -> Result<DefectPair> {
        let limit = params.cap.min(self.max_section(n + m));
        if limit == 0 {
            return Err(Error::Resolution(format!(
                "level {} does not fit in the coefficient window",
                n + m
            )));
        }
        let mut size = params.start.min(limit).max(1);
        let mut current = self.defect_pair(n, m, size)?;
        check_cond(&current, params)?;
        loop {
            let next_size = (2 * size).min(limit);
            if next_size == size {
                return Ok(current);
            }
            let next = self.defect_pair(n, m, next_size)?;
            check_cond(&next, params)?;
            let change = next
                .k
                .max_coord_diff(&current.k)
                .max(next.ktilde.max_coord_diff(&current.ktilde));
            current = next;
            current.section_change = change;
            if change < params.tol {
                current.converged = true;
                return Ok(current);
            }
            size = next_size;
        }
    }

    /// Component functions of `u` on a grid:
    /// `(Σ x_k t^k + R̄ Σ y_l t̄^l,  R Σ x_k t^k + Σ y_l t̄^l)`.
    pub fn evaluate(&self, u: &LrElement, grid: CircleGrid) -> Result<(Vec<C64>, Vec<C64>)> {
        let p = self.analytic_part(u, grid)?;
        let q = self.anti_part(u, grid)?;
        let r = self.r.samples_on(grid)?;
        let first = p
            .iter()
            .zip(&q)
            .zip(&r)
            .map(|((p, q), r)| p + r.conj() * q)
            .collect();
        let second = p
            .iter()
            .zip(&q)
            .zip(&r)
            .map(|((p, q), r)| r * p + q)
            .collect();
        Ok((first, second))
    }

    fn analytic_part(&self, u: &LrElement, grid: CircleGrid) -> Result<Vec<C64>> {
        if u.x.is_empty() {
            return Ok(vec![c0(); grid.size()]);
        }
        let lo = u.frame.analytic_lo;
        let hi = u.frame.analytic_hi();
        check_alias(lo, hi, grid)?;
        crate::circle::synthesize(&LaurentSeries::new(lo, u.x.clone())?, grid)
    }

    fn anti_part(&self, u: &LrElement, grid: CircleGrid) -> Result<Vec<C64>> {
        if u.y.is_empty() {
            return Ok(vec![c0(); grid.size()]);
        }
        // Σ y_l t^{-l}: powers from -anti_hi to -anti_lo.
        let lo = -u.frame.anti_hi();
        let hi = -u.frame.anti_lo;
        check_alias(lo, hi, grid)?;
        let coeffs: Vec<C64> = u.y.iter().rev().copied().collect();
        crate::circle::synthesize(&LaurentSeries::new(lo, coeffs)?, grid)
    }
}

fn check_cond(pair: &DefectPair, params: &SectionParams) -> Result<()> {
    if pair.cond > params.cond_cap {
        return Err(Error::Conditioning(format!(
            "section Gram at (n, m, N) = ({}, {}, {}) has condition estimate {:e} above cap {:e}",
            pair.n, pair.m, pair.section, pair.cond, params.cond_cap
        )));
    }
    Ok(())
}

fn check_alias(lo: i64, hi: i64, grid: CircleGrid) -> Result<()> {
    if !grid.in_window(lo) || !grid.in_window(hi) {
        let (wlo, whi) = grid.window();
        return Err(Error::Resolution(format!(
            "powers t^{lo}..t^{hi} alias on a grid of {} (window [{wlo}, {whi}])",
            grid.size()
        )));
    }
    Ok(())
}

/// Condition number of `[[I, H*], [H, I]]`, whose eigenvalues are `1 ± σ(H)`.
fn hankel_condition(cross: &DMatrix<C64>) -> f64 {
    if cross.is_empty() {
        return 1.0;
    }
    let smax = cross.clone().singular_values().max();
    if smax >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + smax) / (1.0 - smax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn monomial_r(gamma: C64, power: i64, m: usize) -> ScatteringFunction {
        let grid = CircleGrid::new(m).unwrap();
        ScatteringFunction::from_coeffs(grid, &LaurentSeries::new(power, vec![gamma]).unwrap())
            .unwrap()
    }

    fn zero_r(m: usize) -> ScatteringFunction {
        monomial_r(c0(), 0, m)
    }

    #[test]
    fn gram_zero_and_rank_one() {
        let r = zero_r(64);
        let sp = LrSpace::new(&r);
        let b = sp.gram_matrix(GeneratorFrame::section(0, 0, 4)).unwrap();
        assert!(b.cross.iter().all(|v| *v == c0()));

        let gamma = c(0.3, 0.2);
        let r = monomial_r(gamma, -1, 64);
        let sp = LrSpace::new(&r);
        let b = sp.gram_matrix(GeneratorFrame::section(0, 0, 4)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == 0 && j == 0 { gamma } else { c0() };
                assert!((b.cross[(i, j)] - expected).norm() < 1e-15, "({i},{j})");
            }
        }
        let b = sp.gram_matrix(GeneratorFrame::section(1, 0, 4)).unwrap();
        assert!(b.cross.iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn gram_outside_window_is_resolution_error() {
        let r = zero_r(16);
        let sp = LrSpace::new(&r);
        assert!(matches!(
            sp.gram_matrix(GeneratorFrame::section(0, 0, 8)),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn defect_pair_zero_r() {
        let r = zero_r(128);
        let sp = LrSpace::new(&r);
        let p = sp.defect_pair(2, -1, 8).unwrap();
        assert!((p.a0 - 1.0).abs() < 1e-15);
        assert!(p.k.max_coord_diff(&LrElement::analytic(2)) < 1e-15);
        assert!(p.ktilde.max_coord_diff(&LrElement::anti_analytic(0)) < 1e-15);
    }

    #[test]
    fn defect_pair_rank_one() {
        let gamma = c(0.5, 0.0);
        let r = monomial_r(gamma, -1, 128);
        let sp = LrSpace::new(&r);
        let p = sp.defect_pair(0, 0, 8).unwrap();
        let rho = 0.75f64.sqrt();
        assert!((p.a0 - rho).abs() < 1e-15);
        assert!((p.a0_tilde - rho).abs() < 1e-15);
        let k = LrElement::analytic(0).combine(
            c(1.0 / rho, 0.0),
            &LrElement::anti_analytic(1),
            -gamma / rho,
        );
        let kt = LrElement::anti_analytic(1).combine(
            c(1.0 / rho, 0.0),
            &LrElement::analytic(0),
            -gamma.conj() / rho,
        );
        assert!(p.k.max_coord_diff(&k) < 1e-14);
        assert!(p.ktilde.max_coord_diff(&kt) < 1e-14);

        let p = sp.defect_pair(1, 0, 8).unwrap();
        assert!((p.a0 - 1.0).abs() < 1e-15);
        assert!(p.k.max_coord_diff(&LrElement::analytic(1)) < 1e-15);
        assert!(p.ktilde.max_coord_diff(&LrElement::anti_analytic(1)) < 1e-15);
    }

    #[test]
    fn inner_product_examples() {
        let gamma = c(0.5, -0.1);
        let r = monomial_r(gamma, -1, 64);
        let sp = LrSpace::new(&r);
        let g0 = LrElement::analytic(0);
        assert!((sp.inner_product(&g0, &g0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let g1 = LrElement::anti_analytic(1);
        assert!((sp.inner_product(&g0, &g1).unwrap() - gamma).norm() < 1e-15);
        assert!((sp.inner_product(&g1, &g0).unwrap() - gamma.conj()).norm() < 1e-15);

        let r0 = zero_r(64);
        let sp0 = LrSpace::new(&r0);
        let p = sp0.defect_pair(0, 0, 4).unwrap();
        assert_eq!(sp0.inner_product(&p.k, &p.ktilde).unwrap(), c0());
    }

    #[test]
    fn shift_examples() {
        let s = shift(&LrElement::analytic(0), 1);
        assert!(s.max_coord_diff(&LrElement::analytic(1)) == 0.0);
        let s = shift(&LrElement::anti_analytic(1), 1);
        assert!(s.max_coord_diff(&LrElement::anti_analytic(0)) == 0.0);
    }

    #[test]
    fn evaluate_examples() {
        let gamma = c(0.5, 0.0);
        let r = monomial_r(gamma, -1, 64);
        let grid = r.grid();
        let sp = LrSpace::new(&r);
        let (f1, f2) = sp.evaluate(&LrElement::analytic(0), grid).unwrap();
        let tbar = grid.monomial(-1);
        for k in 0..64 {
            assert!((f1[k] - c(1.0, 0.0)).norm() < 1e-14);
            assert!((f2[k] - gamma * tbar[k]).norm() < 1e-14);
        }

        let p = sp.defect_pair(0, 0, 4).unwrap();
        let (f1, f2) = sp.evaluate(&p.k, grid).unwrap();
        let rho = 0.75f64.sqrt();
        assert!(f1.iter().all(|v| (v - c(rho, 0.0)).norm() < 1e-14));
        assert!(f2.iter().all(|v| v.norm() < 1e-14));

        let (f1, f2) = sp
            .evaluate(&LrElement::zero(GeneratorFrame::section(0, 0, 3)), grid)
            .unwrap();
        assert!(f1.iter().chain(&f2).all(|v| *v == c0()));
    }

    #[test]
    fn evaluate_detects_aliasing() {
        let r = zero_r(16);
        let sp = LrSpace::new(&r);
        assert!(matches!(
            sp.evaluate(&LrElement::analytic(9), r.grid()),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn converged_pair_is_certified_for_finite_rank() {
        let r = monomial_r(c(0.3, 0.4), -3, 256);
        let sp = LrSpace::new(&r);
        let p = sp
            .defect_pair_converged(-2, 1, &SectionParams::default())
            .unwrap();
        assert!(p.converged);
        assert!(p.section_change < 1e-12);
    }

    #[test]
    fn degenerate_r_is_rejected() {
        let r = monomial_r(c(1.0, 0.0), -1, 64);
        let sp = LrSpace::new(&r);
        assert!(sp.defect_pair(0, 0, 4).is_err());
    }
}
