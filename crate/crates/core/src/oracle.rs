//! Brute-force reference for the `L^R` computations.
//!
//! Generators are sampled on an oversampled grid, the inner product is
//! evaluated by quadrature against the weight
//! `(1/|T|²)·[[1, -R̄], [-R, 1]]` with `T` the outer factor of `1 - |R|²`, and
//! defect vectors come out of modified Gram–Schmidt. Nothing here touches the
//! Hankel fast path.

use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{outer_factor, CircleGrid, ScatteringFunction};
use crate::error::{Error, Result};
use crate::verblunsky::VerblunskySequence;
use crate::C64;

/// How the quadrature weight is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightPath {
    /// Through the outer factor `T`.
    Outer,
    /// Pointwise inverse of `[[1, R̄], [R, 1]]`.
    Pointwise,
}

/// Oversampled grid with the `L^R` weight at each node.
#[derive(Debug, Clone)]
pub struct QuadratureSpace {
    pub grid: CircleGrid,
    pub path: WeightPath,
    /// `R` on the grid.
    pub r: Vec<C64>,
    /// Weight entries `(w11, w12, w21, w22)` per node.
    pub weight: Vec<[C64; 4]>,
    /// Factor `L*` of `W = L L*` per node: `(l11, conj(l21), l22)`.
    whiten: Vec<(f64, C64, f64)>,
}

/// Two-component function sampled on a quadrature grid.
pub type Samples = (Vec<C64>, Vec<C64>);

impl QuadratureSpace {
    pub fn new(r: &ScatteringFunction, oversample: usize, path: WeightPath) -> Result<Self> {
        if oversample == 0 || !oversample.is_power_of_two() {
            return Err(Error::Input(format!(
                "oversampling factor {oversample} must be a power of two"
            )));
        }
        let grid = CircleGrid::new(r.grid().size() * oversample)?;
        let rs = r.samples_on(grid)?;
        let weight: Vec<[C64; 4]> = match path {
            WeightPath::Outer => {
                let density: Vec<f64> = rs.iter().map(|v| 1.0 - v.norm_sqr()).collect();
                let t = outer_factor(&density, grid)?;
                rs.iter()
                    .zip(&t.boundary_samples)
                    .map(|(r, t)| {
                        let s = 1.0 / t.norm_sqr();
                        [C64::new(s, 0.0), -r.conj() * s, -r * s, C64::new(s, 0.0)]
                    })
                    .collect()
            }
            WeightPath::Pointwise => rs
                .iter()
                .map(|r| {
                    let det = 1.0 - r.norm_sqr();
                    [
                        C64::new(1.0 / det, 0.0),
                        -r.conj() / det,
                        -r / det,
                        C64::new(1.0 / det, 0.0),
                    ]
                })
                .collect(),
        };
        let mut whiten = Vec::with_capacity(weight.len());
        for (k, w) in weight.iter().enumerate() {
            let l11 = w[0].re.sqrt();
            let l21 = w[2] / l11;
            let rest = w[3].re - l21.norm_sqr();
            if !(l11 > 0.0) || rest < -1e-8 {
                return Err(Error::Resolution(format!(
                    "quadrature weight is indefinite at theta = {:.6} (pivot {rest:e}); raise the oversampling",
                    grid.theta(k)
                )));
            }
            whiten.push((l11, l21.conj(), rest.max(0.0).sqrt()));
        }
        Ok(Self {
            grid,
            path,
            r: rs,
            weight,
            whiten,
        })
    }

    /// `[tᵏ; R tᵏ]`.
    pub fn analytic(&self, k: i64) -> Samples {
        let tk = self.grid.monomial(k);
        let second = tk.iter().zip(&self.r).map(|(t, r)| t * r).collect();
        (tk, second)
    }

    /// `[R̄ t̄ˡ; t̄ˡ]`.
    pub fn anti_analytic(&self, l: i64) -> Samples {
        let tl = self.grid.monomial(-l);
        let first = tl.iter().zip(&self.r).map(|(t, r)| t * r.conj()).collect();
        (first, tl)
    }

    /// `L* u` stacked into one vector, so that `<u, v> = mean(conj(Lv)·Lu)`.
    fn whitened(&self, u: &Samples) -> Vec<C64> {
        let m = self.grid.size();
        let mut out = Vec::with_capacity(2 * m);
        for k in 0..m {
            let (l11, l21c, _) = self.whiten[k];
            out.push(u.0[k] * l11 + u.1[k] * l21c);
        }
        for k in 0..m {
            out.push(u.1[k] * self.whiten[k].2);
        }
        out
    }

    fn dot(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<C64>() / self.grid.size() as f64
    }
}

/// Quadrature value of `∫ v* W u dm`.
pub fn oracle_inner(u: &Samples, v: &Samples, q: &QuadratureSpace) -> Result<C64> {
    let m = q.grid.size();
    if [u.0.len(), u.1.len(), v.0.len(), v.1.len()]
        .iter()
        .any(|l| *l != m)
    {
        return Err(Error::Input(format!(
            "sample lists do not match the quadrature grid of {m}"
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..m {
        let w = &q.weight[k];
        let wu0 = w[0] * u.0[k] + w[1] * u.1[k];
        let wu1 = w[2] * u.0[k] + w[3] * u.1[k];
        acc += v.0[k].conj() * wu0 + v.1[k].conj() * wu1;
    }
    Ok(acc / m as f64)
}

/// Defect quantities at one level.
#[derive(Debug, Clone, Serialize)]
pub struct OracleLevel {
    pub level: i64,
    pub n: i64,
    pub m: i64,
    pub alpha: C64,
    pub a0: f64,
    pub a0_tilde: f64,
}

/// Orthonormal basis under construction (whitened coordinates).
struct Basis<'a> {
    q: &'a QuadratureSpace,
    vecs: Vec<Vec<C64>>,
}

impl<'a> Basis<'a> {
    /// Removes the basis components, twice for stability.
    fn project_out(&self, v: &mut [C64]) {
        for _ in 0..2 {
            for b in &self.vecs {
                let c = self.q.dot(v, b);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
    }

    fn push(&mut self, mut v: Vec<C64>) -> Result<()> {
        let before = self.q.dot(&v, &v).re.sqrt();
        self.project_out(&mut v);
        let nrm = self.q.dot(&v, &v).re.sqrt();
        if !(nrm > 1e-12 * before.max(1.0)) {
            return Err(Error::Degeneracy(format!(
                "generator family is numerically dependent (residual {nrm:e})"
            )));
        }
        for x in v.iter_mut() {
            *x /= nrm;
        }
        self.vecs.push(v);
        Ok(())
    }
}

/// Defect pair at `(n, m)` with section size `size` by Gram–Schmidt.
pub fn oracle_level(q: &QuadratureSpace, n: i64, m: i64, size: usize) -> Result<OracleLevel> {
    if size == 0 {
        return Err(Error::Input("section size must be positive".into()));
    }
    let mut basis = Basis {
        q,
        vecs: Vec::new(),
    };
    for i in 1..size as i64 {
        basis.push(q.whitened(&q.analytic(n + i)))?;
        basis.push(q.whitened(&q.anti_analytic(m + 1 + i)))?;
    }
    let mut u = q.whitened(&q.analytic(n));
    let mut w = q.whitened(&q.anti_analytic(m + 1));
    basis.project_out(&mut u);
    basis.project_out(&mut w);
    let unit = |v: &[C64]| -> Result<Vec<C64>> {
        let nrm = q.dot(v, v).re.sqrt();
        if !(nrm > 1e-12) {
            return Err(Error::Degeneracy(format!(
                "residual norm {nrm:e} at (n, m) = ({n}, {m})"
            )));
        }
        Ok(v.iter().map(|x| x / nrm).collect())
    };
    let u_hat = unit(&u)?;
    let w_hat = unit(&w)?;
    let strip = |v: &[C64], dir: &[C64]| -> Vec<C64> {
        let c = q.dot(v, dir);
        v.iter().zip(dir).map(|(x, d)| x - c * d).collect()
    };
    let k_raw = strip(&u, &w_hat);
    let kt_raw = strip(&w, &u_hat);
    let a0 = q.dot(&k_raw, &k_raw).re.sqrt();
    let a0_tilde = q.dot(&kt_raw, &kt_raw).re.sqrt();
    if !(a0 > 1e-12 && a0_tilde > 1e-12) {
        return Err(Error::Degeneracy(format!(
            "residual norm {a0:e} at (n, m) = ({n}, {m})"
        )));
    }
    let alpha = q.dot(&k_raw, &kt_raw) / (a0 * a0_tilde);
    Ok(OracleLevel {
        level: n + m,
        n,
        m,
        alpha,
        a0,
        a0_tilde,
    })
}

/// `α_j` for `j = lo..=hi` (and `a_j(0)` for `j = lo..=hi+1`) by quadrature.
pub fn oracle_verblunsky(
    q: &QuadratureSpace,
    lo: i64,
    hi: i64,
    size: usize,
) -> Result<(VerblunskySequence, Vec<OracleLevel>)> {
    if hi < lo {
        return Err(Error::Input("empty level window".into()));
    }
    let levels: Vec<OracleLevel> = (lo..=hi + 1)
        .into_par_iter()
        .map(|j| {
            let n = (j + 1).div_euclid(2);
            oracle_level(q, n, j - n, size).map_err(|e| e.at_level(j))
        })
        .collect::<Result<_>>()?;
    let alphas: Vec<C64> = levels[..levels.len() - 1].iter().map(|l| l.alpha).collect();
    let a0s = levels.iter().map(|l| l.a0).collect();
    let seq = VerblunskySequence::new(lo, alphas)
        .map_err(|e| Error::Inconsistency(format!("oracle produced an invalid sequence: {e}")))?
        .with_a0s(a0s)?;
    Ok((seq, levels))
}

/// Oracle versus fast-path comparison.
#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub oversample: usize,
    pub section: usize,
    pub max_alpha_diff: f64,
    pub max_a0_diff: f64,
    /// Largest relative difference between the two weight formulas.
    pub weight_path_diff: f64,
    /// Whether the 8× re-run was needed.
    pub refined: bool,
    pub passes: bool,
}

/// Compares `seq` against the oracle, retrying at 8× oversampling when the
/// 4× run disagrees by more than `tol`.
pub fn compare_with_oracle(
    r: &ScatteringFunction,
    seq: &VerblunskySequence,
    size: usize,
    tol: f64,
) -> Result<OracleComparison> {
    let run = |oversample: usize| -> Result<(f64, f64, f64)> {
        let q = QuadratureSpace::new(r, oversample, WeightPath::Outer)?;
        let qp = QuadratureSpace::new(r, oversample, WeightPath::Pointwise)?;
        let weight_diff = q
            .weight
            .iter()
            .zip(&qp.weight)
            .map(|(a, b)| {
                let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max)
                    / scale
            })
            .fold(0.0, f64::max);
        let (oseq, _) = oracle_verblunsky(&q, seq.lo, seq.hi(), size)?;
        let da = (seq.lo..=seq.hi())
            .map(|j| (seq.get(j) - oseq.get(j)).norm())
            .fold(0.0, f64::max);
        let d0 = match &seq.a0s {
            Some(_) => (seq.lo..=seq.hi() + 1)
                .map(|j| (seq.a0(j).unwrap_or(f64::NAN) - oseq.a0(j).unwrap_or(f64::NAN)).abs())
                .fold(0.0, f64::max),
            None => 0.0,
        };
        Ok((da, d0, weight_diff))
    };
    let (mut da, mut d0, mut wd) = run(4)?;
    let mut oversample = 4;
    let refined = !(da <= tol);
    if refined {
        (da, d0, wd) = run(8)?;
        oversample = 8;
    }
    Ok(OracleComparison {
        oversample,
        section: size,
        max_alpha_diff: da,
        max_a0_diff: d0,
        weight_path_diff: wd,
        refined,
        passes: da <= tol,
    })
}
