//! Finite windows of the two-sided CMV matrix.
//!
//! Basis index `2n` stands for `K_{n,n}` and `2n+1` for `K̃_{n+1,n}`. With
//! `Θ_j = [[α_j, ρ_j], [ρ_j, -ᾱ_j]]`, column `2n` holds
//! `(ρ_{2n-1}α_{2n}, -ᾱ_{2n-1}α_{2n}, α_{2n+1}ρ_{2n}, ρ_{2n+1}ρ_{2n})` in rows
//! `2n-1..=2n+2` and column `2n+1` holds
//! `(ρ_{2n-1}ρ_{2n}, -ᾱ_{2n-1}ρ_{2n}, -α_{2n+1}ᾱ_{2n}, -ρ_{2n+1}ᾱ_{2n})`.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::verblunsky::VerblunskySequence;
use crate::{c0, C64};

/// Truncation policy at the window edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Exact compression: rows outside the window are dropped.
    #[default]
    ZeroTail,
    /// The two coupling coefficients across the edges are set to 1, which
    /// makes the finite block exactly unitary.
    Decoupled,
}

/// Resolvent flavour: `(I - zU*)` or `(I - z̄U)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventMode {
    Star,
    Plain,
}

/// Banded window of the CMV matrix over basis indices `lo..=hi`.
///
/// `lo` is even and `hi` is odd, so the window consists of whole column pairs.
#[derive(Debug, Clone)]
pub struct CmvMatrix {
    lo: i64,
    hi: i64,
    boundary: Boundary,
    /// `cols[c][r - c + 2]` for rows `c-2..=c+2`.
    cols: Vec<[C64; 5]>,
}

fn rho_of(a: C64) -> f64 {
    (1.0 - a.norm_sqr()).max(0.0).sqrt()
}

/// Builds the window `[-2⌈W/2⌉, 2⌈W/2⌉ + 1]`.
pub fn build_cmv(seq: &VerblunskySequence, w: usize, boundary: Boundary) -> Result<CmvMatrix> {
    seq.validate()?;
    if w == 0 {
        return Err(Error::Input("CMV window must be positive".into()));
    }
    let half = w.div_ceil(2) as i64;
    let lo = -2 * half;
    let hi = 2 * half + 1;
    let alpha = |j: i64| -> C64 {
        if boundary == Boundary::Decoupled && (j == lo - 1 || j == hi) {
            C64::new(1.0, 0.0)
        } else {
            seq.get(j)
        }
    };
    let dim = (hi - lo + 1) as usize;
    let mut cols = vec![[c0(); 5]; dim];
    for n in lo / 2..=(hi - 1) / 2 {
        let (am, a0, ap) = (alpha(2 * n - 1), alpha(2 * n), alpha(2 * n + 1));
        let (rm, r0, rp) = (rho_of(am), rho_of(a0), rho_of(ap));
        let even = (2 * n - lo) as usize;
        // Column 2n: rows 2n-1..=2n+2 are offsets -1..=2.
        cols[even] = [
            c0(),
            a0 * rm,
            -am.conj() * a0,
            ap * r0,
            C64::new(rp * r0, 0.0),
        ];
        // Column 2n+1: rows 2n-1..=2n+2 are offsets -2..=1.
        cols[even + 1] = [
            C64::new(rm * r0, 0.0),
            -am.conj() * r0,
            -ap * a0.conj(),
            -a0.conj() * rp,
            c0(),
        ];
    }
    // Rows outside the window are dropped.
    cols[0][1] = c0();
    cols[1][0] = c0();
    cols[dim - 2][4] = c0();
    cols[dim - 1][3] = c0();
    Ok(CmvMatrix {
        lo,
        hi,
        boundary,
        cols,
    })
}

impl CmvMatrix {
    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Position of basis index `i` in window vectors.
    pub fn pos(&self, i: i64) -> Option<usize> {
        (i >= self.lo && i <= self.hi).then(|| (i - self.lo) as usize)
    }

    /// Unit vector `δ_i`.
    pub fn delta(&self, i: i64) -> Result<Vec<C64>> {
        let p = self.pos(i).ok_or_else(|| {
            Error::Domain(format!(
                "basis index {i} outside window [{}, {}]",
                self.lo, self.hi
            ))
        })?;
        let mut v = vec![c0(); self.dim()];
        v[p] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// Entry at basis indices `(row, col)`.
    pub fn entry(&self, row: i64, col: i64) -> C64 {
        match (self.pos(row), self.pos(col)) {
            (Some(r), Some(c)) if r + 2 >= c && r <= c + 2 => self.cols[c][r + 2 - c],
            _ => c0(),
        }
    }

    fn check_len(&self, v: &[C64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Input(format!(
                "vector of length {} for a window of dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v)?;
        let d = self.dim();
        let mut out = vec![c0(); d];
        for (c, col) in self.cols.iter().enumerate() {
            if v[c] == c0() {
                continue;
            }
            for (o, u) in col.iter().enumerate() {
                if let Some(r) = (c + o).checked_sub(2).filter(|r| *r < d) {
                    out[r] += u * v[c];
                }
            }
        }
        Ok(out)
    }

    pub fn apply_adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v)?;
        let d = self.dim();
        let mut out = vec![c0(); d];
        for (c, col) in self.cols.iter().enumerate() {
            let mut acc = c0();
            for (o, u) in col.iter().enumerate() {
                if let Some(r) = (c + o).checked_sub(2).filter(|r| *r < d) {
                    acc += u.conj() * v[r];
                }
            }
            out[c] = acc;
        }
        Ok(out)
    }

    /// Applies `U^p` (negative powers use the adjoint).
    pub fn apply_power(&self, v: &[C64], p: i64) -> Result<Vec<C64>> {
        let mut out = v.to_vec();
        for _ in 0..p.unsigned_abs() {
            out = if p > 0 {
                self.apply(&out)?
            } else {
                self.apply_adjoint(&out)?
            };
        }
        Ok(out)
    }

    /// Solves `(I - zU*)x = v` (star) or `(I - z̄U)x = v` (plain).
    pub fn resolvent_solve(&self, z: C64, v: &[C64], mode: ResolventMode) -> Result<Vec<C64>> {
        self.check_len(v)?;
        if !(z.norm() <= 1.0 - 1e-6) {
            return Err(Error::Domain(format!(
                "|z| = {} exceeds 1 - 1e-6",
                z.norm()
            )));
        }
        let d = self.dim();
        let mut a = BandedMatrix::zeros(d, 2, 2);
        for i in 0..d {
            a.set(i, i, C64::new(1.0, 0.0));
        }
        for (c, col) in self.cols.iter().enumerate() {
            for (o, u) in col.iter().enumerate() {
                if let Some(r) = (c + o).checked_sub(2).filter(|r| *r < d) {
                    match mode {
                        // (U*)[c][r] = conj(U[r][c])
                        ResolventMode::Star => {
                            let cur = a.get(c, r);
                            a.set(c, r, cur - z * u.conj());
                        }
                        ResolventMode::Plain => {
                            let cur = a.get(r, c);
                            a.set(r, c, cur - z.conj() * u);
                        }
                    }
                }
            }
        }
        let lu = a.clone().factor()?;
        let x = lu.solve(v);
        let res = a.matvec(&x);
        let err = res
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let vn = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if err > 1e-10 * vn.max(f64::MIN_POSITIVE) {
            return Err(Error::Solver(format!(
                "resolvent residual {err:e} exceeds 1e-10 times the right-hand side norm {vn:e}"
            )));
        }
        Ok(x)
    }

    /// `max |(U*U - I)_{ij}|` over interior columns; under zero-tail the two
    /// outermost column pairs on each side are excluded.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let skip = match self.boundary {
            Boundary::Decoupled => 0,
            Boundary::ZeroTail => 4.min(d / 2),
        };
        let col_dense = |c: usize| -> Vec<(usize, C64)> {
            self.cols[c]
                .iter()
                .enumerate()
                .filter_map(|(o, u)| (c + o).checked_sub(2).filter(|r| *r < d).map(|r| (r, *u)))
                .collect()
        };
        let mut worst: f64 = 0.0;
        for i in skip..d - skip {
            let ci = col_dense(i);
            for j in i.saturating_sub(4).max(skip)..=(i + 4).min(d - 1 - skip) {
                let cj = col_dense(j);
                let mut acc = c0();
                for (ri, ui) in &ci {
                    for (rj, uj) in &cj {
                        if ri == rj {
                            acc += ui.conj() * uj;
                        }
                    }
                }
                if i == j {
                    acc -= C64::new(1.0, 0.0);
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (c, col) in self.cols.iter().enumerate() {
            for (o, u) in col.iter().enumerate() {
                if let Some(r) = (c + o).checked_sub(2).filter(|r| *r < d) {
                    m[(r, c)] = *u;
                }
            }
        }
        m
    }

    /// Nonzero entries as CSV `row,col,re,im` with basis indices.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "re", "im"])
            .map_err(csv_err)?;
        for c in self.lo..=self.hi {
            for r in c - 2..=c + 2 {
                let v = self.entry(r, c);
                if v != c0() {
                    w.serialize((r, c, v.re, v.im)).map_err(csv_err)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(lo: i64, len: usize, scale: f64, seed: u64) -> VerblunskySequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alphas = (0..len)
            .map(|_| {
                let r = scale * rng.random::<f64>();
                C64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>())
            })
            .collect();
        VerblunskySequence::new(lo, alphas).unwrap()
    }

    fn zero_seq() -> VerblunskySequence {
        VerblunskySequence::new(0, vec![c0()]).unwrap()
    }

    /// Independent construction as a product of two block-diagonal rotations.
    fn factored(seq: &VerblunskySequence, u: &CmvMatrix) -> DMatrix<C64> {
        let d = u.dim();
        let (lo, hi) = (u.lo(), u.hi());
        let alpha = |j: i64| {
            if u.boundary() == Boundary::Decoupled && (j == lo - 1 || j == hi) {
                C64::new(1.0, 0.0)
            } else {
                seq.get(j)
            }
        };
        // Rotations on the pairs (j, j+1) for j of a given parity, embedded in
        // an extended index range lo-1..=hi+1 and compressed afterwards.
        let ext = d + 2;
        let theta_blocks = |parity: i64| {
            let mut m = DMatrix::<C64>::zeros(ext, ext);
            let mut j = lo - 1;
            while j <= hi {
                if j.rem_euclid(2) == parity {
                    let a = alpha(j);
                    let r = C64::new(rho_of(a), 0.0);
                    let p = (j - lo + 1) as usize;
                    m[(p, p)] = a;
                    m[(p, p + 1)] = r;
                    m[(p + 1, p)] = r;
                    m[(p + 1, p + 1)] = -a.conj();
                    j += 2;
                } else {
                    j += 1;
                }
            }
            m
        };
        let full = theta_blocks(1) * theta_blocks(0);
        full.view((1, 1), (d, d)).into_owned()
    }

    #[test]
    fn zero_alphas_are_two_shifts() {
        let u = build_cmv(&zero_seq(), 8, Boundary::ZeroTail).unwrap();
        for n in -4..4 {
            assert_eq!(u.entry(2 * n + 2, 2 * n), C64::new(1.0, 0.0));
        }
        for n in -3..=4 {
            assert_eq!(u.entry(2 * n - 1, 2 * n + 1), C64::new(1.0, 0.0));
        }
        let d0 = u.delta(0).unwrap();
        assert_eq!(u.apply(&d0).unwrap(), u.delta(2).unwrap());
        let zero = vec![c0(); u.dim()];
        assert_eq!(u.apply(&zero).unwrap(), zero);
        assert_eq!(u.unitarity_defect(), 0.0);
    }

    #[test]
    fn single_alpha_columns() {
        let a = C64::new(0.3, 0.4);
        let seq = VerblunskySequence::new(1, vec![a]).unwrap();
        let u = build_cmv(&seq, 8, Boundary::ZeroTail).unwrap();
        let r = rho_of(a);
        // Column 0 (n = 0): α_{-1} = α_0 = 0, α_1 = a.
        assert_eq!(u.entry(1, 0), a);
        assert_eq!(u.entry(2, 0), C64::new(r, 0.0));
        assert_eq!(u.entry(-1, 0), c0());
        // Column 1: -α_1 ᾱ_0 = 0, -ρ_1 ᾱ_0 = 0, ρ_{-1}ρ_0 = 1 at row -1.
        assert_eq!(u.entry(-1, 1), C64::new(1.0, 0.0));
        assert_eq!(u.entry(1, 1), c0());
        // Column 2 (n = 1): ρ_1 α_2 = 0, -ᾱ_1 α_2 = 0, α_3 ρ_2 = 0, ρ_3 ρ_2 = 1.
        assert_eq!(u.entry(4, 2), C64::new(1.0, 0.0));
        // Column 3: ρ_1 ρ_2 at row 1, -ᾱ_1 ρ_2 at row 2.
        assert_eq!(u.entry(1, 3), C64::new(r, 0.0));
        assert_eq!(u.entry(2, 3), -a.conj());
    }

    #[test]
    fn matches_factored_form() {
        let seq = random_seq(-12, 25, 0.9, 3);
        for boundary in [Boundary::ZeroTail, Boundary::Decoupled] {
            let u = build_cmv(&seq, 10, boundary).unwrap();
            let diff = (u.to_dense() - factored(&seq, &u))
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-15, "{boundary:?}: {diff}");
        }
    }

    #[test]
    fn unitarity() {
        let seq = random_seq(-20, 41, 0.95, 11);
        let dec = build_cmv(&seq, 16, Boundary::Decoupled).unwrap();
        assert!(dec.unitarity_defect() < 1e-12);
        let zt = build_cmv(&seq, 16, Boundary::ZeroTail).unwrap();
        assert!(zt.unitarity_defect() < 1e-12);

        let d = dec.to_dense();
        let eig = d.clone().schur().eigenvalues().unwrap();
        for l in eig.iter() {
            assert!((l.norm() - 1.0).abs() < 1e-10);
        }

        let mut v = vec![c0(); zt.dim()];
        for (i, x) in v.iter_mut().enumerate().skip(6).take(zt.dim() - 12) {
            *x = C64::new(i as f64, -1.0);
        }
        let back = zt.apply_adjoint(&zt.apply(&v).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn resolvent_examples() {
        let u = build_cmv(&zero_seq(), 16, Boundary::ZeroTail).unwrap();
        let v = u.delta(0).unwrap();
        let x = u.resolvent_solve(c0(), &v, ResolventMode::Star).unwrap();
        assert_eq!(x, v);

        let x = u
            .resolvent_solve(C64::new(0.5, 0.0), &v, ResolventMode::Star)
            .unwrap();
        for k in 0..=8 {
            let p = u.pos(-2 * k).unwrap();
            assert!((x[p] - C64::new(0.5f64.powi(k as i32), 0.0)).norm() < 1e-15);
        }
        let total: f64 = x.iter().map(|v| v.norm()).sum::<f64>();
        assert!((total - (0..=8).map(|k| 0.5f64.powi(k)).sum::<f64>()).abs() < 1e-14);

        assert!(matches!(
            u.resolvent_solve(C64::new(1.0, 0.0), &v, ResolventMode::Plain),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn resolvent_matches_neumann_series() {
        let seq = random_seq(-20, 41, 0.7, 5);
        let u = build_cmv(&seq, 20, Boundary::ZeroTail).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v: Vec<C64> = (0..u.dim())
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        for z in [C64::new(0.9, 0.0), C64::new(0.0, -0.6), C64::new(0.5, 0.5)] {
            for mode in [ResolventMode::Star, ResolventMode::Plain] {
                let x = u.resolvent_solve(z, &v, mode).unwrap();
                let mut term = v.clone();
                let mut sum = v.clone();
                for _ in 0..600 {
                    term = match mode {
                        ResolventMode::Star => u
                            .apply_adjoint(&term)
                            .unwrap()
                            .iter()
                            .map(|t| z * t)
                            .collect(),
                        ResolventMode::Plain => u
                            .apply(&term)
                            .unwrap()
                            .iter()
                            .map(|t| z.conj() * t)
                            .collect(),
                    };
                    for (s, t) in sum.iter_mut().zip(&term) {
                        *s += t;
                    }
                }
                let err = x
                    .iter()
                    .zip(&sum)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-9, "{z} {mode:?}: {err}");
            }
        }
    }

    #[test]
    fn csv_dump_lists_nonzeros() {
        let u = build_cmv(&zero_seq(), 2, Boundary::Decoupled).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("row,col,re,im\n"));
        assert_eq!(text.lines().count(), 1 + u.dim());
    }

    #[test]
    fn window_shape() {
        let u = build_cmv(&zero_seq(), 128, Boundary::ZeroTail).unwrap();
        assert_eq!((u.lo(), u.hi()), (-128, 129));
        let u = build_cmv(&zero_seq(), 5, Boundary::ZeroTail).unwrap();
        assert_eq!((u.lo(), u.hi()), (-6, 7));
    }
}
