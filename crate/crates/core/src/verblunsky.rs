//! Verblunsky coefficients from defect pairs, Schur functions and the
//! associated consistency diagnostics.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{szego_check, CircleGrid, ScatteringFunction};
use crate::error::{Error, Result};
use crate::lr::{DefectPair, LrElement, LrSpace, SectionParams};
use crate::{c0, C64};

/// Coefficients `α_j` for `j = lo..=hi` with `ρ_j = √(1-|α_j|²)`.
///
/// Levels outside the stored range read as `α = 0`, `ρ = 1`. When produced by
/// inverse scattering, `a0s` holds the residual norms `a_j(0)` for
/// `j = lo..=hi+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerblunskySequence {
    pub lo: i64,
    pub alphas: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0s: Option<Vec<f64>>,
}

impl VerblunskySequence {
    pub fn new(lo: i64, alphas: Vec<C64>) -> Result<Self> {
        let seq = Self {
            lo,
            alphas,
            a0s: None,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn with_a0s(mut self, a0s: Vec<f64>) -> Result<Self> {
        if a0s.len() != self.alphas.len() + 1 {
            return Err(Error::Input(format!(
                "expected {} residual norms, got {}",
                self.alphas.len() + 1,
                a0s.len()
            )));
        }
        self.a0s = Some(a0s);
        Ok(self)
    }

    /// Checks `|α_j| < 1` and the shape of `a0s`.
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::Input("empty Verblunsky sequence".into()));
        }
        for (i, a) in self.alphas.iter().enumerate() {
            if !(a.norm() < 1.0) {
                return Err(Error::Domain(format!(
                    "|alpha_{}| = {} is not below 1",
                    self.lo + i as i64,
                    a.norm()
                )));
            }
        }
        if let Some(a0s) = &self.a0s {
            if a0s.len() != self.alphas.len() + 1 {
                return Err(Error::Input("a0s must cover lo..=hi+1".into()));
            }
        }
        Ok(())
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.alphas.len() as i64 - 1
    }

    pub fn get(&self, j: i64) -> C64 {
        let i = j - self.lo;
        if i < 0 || i >= self.alphas.len() as i64 {
            c0()
        } else {
            self.alphas[i as usize]
        }
    }

    pub fn rho(&self, j: i64) -> f64 {
        (1.0 - self.get(j).norm_sqr()).max(0.0).sqrt()
    }

    pub fn rhos(&self) -> Vec<f64> {
        (self.lo..=self.hi()).map(|j| self.rho(j)).collect()
    }

    /// `a_j(0)` if recorded.
    pub fn a0(&self, j: i64) -> Option<f64> {
        let a0s = self.a0s.as_ref()?;
        let i = j - self.lo;
        (i >= 0 && (i as usize) < a0s.len()).then(|| a0s[i as usize])
    }
}

/// Boundary values of `ω_j` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurFunction {
    pub level: i64,
    pub grid: CircleGrid,
    pub samples: Vec<C64>,
}

impl SchurFunction {
    /// `ω(0)`, the grid mean.
    pub fn value_at_zero(&self) -> C64 {
        self.samples.iter().sum::<C64>() / self.samples.len() as f64
    }

    pub fn sup(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `α_{n+m} = <K_{n,m}, K̃_{n,m}>`.
pub fn alpha_from_defects(space: &LrSpace, pair: &DefectPair) -> Result<C64> {
    let a = space.inner_product(&pair.k, &pair.ktilde)?;
    if !(a.norm() < 1.0) {
        return Err(Error::Inconsistency(format!(
            "|<K, K~>| = {} at (n, m) = ({}, {}) is not below 1",
            a.norm(),
            pair.n,
            pair.m
        ))
        .at_level(pair.level()));
    }
    Ok(a)
}

/// Default `(n, m)` split of a level: `n = ⌈j/2⌉`, `m = j - n`.
pub fn balanced_split(level: i64) -> (i64, i64) {
    let n = (level + 1).div_euclid(2);
    (n, level - n)
}

/// Controls for [`inverse_scattering`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseParams {
    pub level_lo: i64,
    pub level_hi: i64,
    pub section: SectionParams,
    pub margin_min: f64,
    /// Run split-invariance and rotation checks (needs extra defect pairs).
    pub checks: bool,
}

impl InverseParams {
    pub fn symmetric(j: i64) -> Self {
        Self {
            level_lo: -j,
            level_hi: j,
            ..Self::default()
        }
    }
}

impl Default for InverseParams {
    fn default() -> Self {
        Self {
            level_lo: -16,
            level_hi: 16,
            section: SectionParams::default(),
            margin_min: 1e-3,
            checks: true,
        }
    }
}

/// Per-level diagnostics of an inverse-scattering run.
#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub level: i64,
    pub n: i64,
    pub m: i64,
    pub alpha: C64,
    pub a0: f64,
    pub section: usize,
    pub cond: f64,
    pub converged: bool,
    pub section_change: f64,
    /// `|α(n,m) - α(n+1,m-1)|`.
    pub split_diff: Option<f64>,
    /// Norm residual of the rotation relation between levels `j` and `j+1`.
    pub rotation_residual: Option<f64>,
    /// `|√(1-|α_j|²) - a_j(0)/a_{j+1}(0)|`.
    pub rho_ratio_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseResult {
    pub sequence: VerblunskySequence,
    pub levels: Vec<LevelReport>,
    /// Default-split defect pairs for levels `lo..=hi+1`.
    #[serde(skip)]
    pub pairs: BTreeMap<i64, DefectPair>,
}

/// Computes defect pairs for all requested `(n, m)` in parallel.
pub fn defect_pairs(
    space: &LrSpace,
    keys: impl IntoIterator<Item = (i64, i64)>,
    params: &SectionParams,
) -> Result<BTreeMap<(i64, i64), DefectPair>> {
    let keys: Vec<(i64, i64)> = keys
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pairs: Vec<DefectPair> = keys
        .par_iter()
        .map(|&(n, m)| {
            space
                .defect_pair_converged(n, m, params)
                .map_err(|e| e.at_level(n + m))
        })
        .collect::<Result<_>>()?;
    Ok(keys.into_iter().zip(pairs).collect())
}

/// `α_j` for `j` in the requested level window, with diagnostics.
pub fn inverse_scattering(r: &ScatteringFunction, params: &InverseParams) -> Result<InverseResult> {
    if params.level_hi < params.level_lo {
        return Err(Error::Input("empty level window".into()));
    }
    let report = szego_check(r);
    if !report.passes || report.margin < params.margin_min {
        return Err(Error::Domain(format!(
            "scattering function fails the Szegő check: sup|R| = {}, margin {} (minimum {})",
            report.sup_modulus, report.margin, params.margin_min
        )));
    }
    let space = LrSpace::new(r);
    let (lo, hi) = (params.level_lo, params.level_hi);

    let mut keys = Vec::new();
    for j in lo..=hi + 1 {
        keys.push(balanced_split(j));
    }
    if params.checks {
        for j in lo..=hi {
            let (n, m) = balanced_split(j);
            keys.push((n + 1, m - 1));
            keys.push((n + 1, m));
            keys.push((n, m + 1));
        }
    }
    let pairs = defect_pairs(&space, keys, &params.section)?;
    let get = |n: i64, m: i64| &pairs[&(n, m)];

    let mut alphas = Vec::new();
    let mut a0s = Vec::new();
    for j in lo..=hi + 1 {
        let (n, m) = balanced_split(j);
        let p = get(n, m);
        a0s.push(p.a0);
        if j <= hi {
            alphas.push(alpha_from_defects(&space, p)?);
        }
    }

    let mut levels = Vec::new();
    for j in lo..=hi {
        let (n, m) = balanced_split(j);
        let p = get(n, m);
        let alpha = alphas[(j - lo) as usize];
        let rho = (1.0 - alpha.norm_sqr()).sqrt();
        let ratio = a0s[(j - lo) as usize] / a0s[(j - lo + 1) as usize];
        let (split_diff, rotation_residual) = if params.checks {
            let alt = alpha_from_defects(&space, get(n + 1, m - 1))?;
            let rot = rotation_residual(&space, p, get(n + 1, m), get(n, m + 1), alpha)
                .map_err(|e| e.at_level(j))?;
            (Some((alt - alpha).norm()), Some(rot))
        } else {
            (None, None)
        };
        levels.push(LevelReport {
            level: j,
            n,
            m,
            alpha,
            a0: p.a0,
            section: p.section,
            cond: p.cond,
            converged: p.converged,
            section_change: p.section_change,
            split_diff,
            rotation_residual,
            rho_ratio_diff: (rho - ratio).abs(),
        });
    }

    let sequence = VerblunskySequence::new(lo, alphas)?.with_a0s(a0s)?;
    let by_level = (lo..=hi + 1)
        .map(|j| {
            let (n, m) = balanced_split(j);
            (j, pairs[&(n, m)].clone())
        })
        .collect();
    Ok(InverseResult {
        sequence,
        levels,
        pairs: by_level,
    })
}

/// Residual of
/// `[K_{n,m}, K̃_{n+1,m}] = [K̃_{n,m}, K_{n,m+1}]·[[α, ρ], [ρ, -ᾱ]]`,
/// measured as the larger column norm in `L^R`.
pub fn rotation_residual(
    space: &LrSpace,
    here: &DefectPair,
    right: &DefectPair,
    up: &DefectPair,
    alpha: C64,
) -> Result<f64> {
    let rho = C64::new((1.0 - alpha.norm_sqr()).sqrt(), 0.0);
    let one = C64::new(1.0, 0.0);
    let col = |target: &LrElement, a: C64, b: C64| -> Result<f64> {
        let mix = here.ktilde.combine(a, &up.k, b);
        space.norm(&target.combine(one, &mix, -one))
    };
    let c1 = col(&here.k, alpha, rho)?;
    let c2 = col(&right.ktilde, rho, -alpha.conj())?;
    Ok(c1.max(c2))
}

/// `ω_{n+m}` from `K_{n,m} = [tⁿ Ā; t̄^m A ω]`.
pub fn recover_omega(
    space: &LrSpace,
    pair: &DefectPair,
    grid: CircleGrid,
) -> Result<SchurFunction> {
    let (k1, k2) = space.evaluate(&pair.k, grid)?;
    let tn = grid.monomial(pair.n);
    let tm = grid.monomial(pair.m);
    let mut bad = Vec::new();
    let mut samples = Vec::with_capacity(grid.size());
    for i in 0..grid.size() {
        // conj(t̄ⁿ K₁) = tⁿ conj(K₁) on the circle.
        let a = tn[i] * k1[i].conj();
        if a.norm() < 1e-8 {
            bad.push(i);
            samples.push(c0());
        } else {
            samples.push(tm[i] * k2[i] / a);
        }
    }
    if !bad.is_empty() {
        let shown: Vec<String> = bad
            .iter()
            .take(8)
            .map(|k| format!("{:.6}", grid.theta(*k)))
            .collect();
        return Err(Error::Evaluation(format!(
            "first component of K vanishes at {} nodes (theta = {}{})",
            bad.len(),
            shown.join(", "),
            if bad.len() > 8 { ", ..." } else { "" }
        ))
        .at_level(pair.level()));
    }
    Ok(SchurFunction {
        level: pair.level(),
        grid,
        samples,
    })
}

/// `ω_{j+1} = (t ω_j - α_j) / (1 - t ω_j ᾱ_j)`.
pub fn schur_step(omega: &SchurFunction, alpha: C64) -> Result<SchurFunction> {
    if !(alpha.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "|alpha| = {} is not below 1",
            alpha.norm()
        )));
    }
    let t = omega.grid.nodes();
    let samples = omega
        .samples
        .iter()
        .zip(&t)
        .map(|(w, t)| {
            let tw = t * w;
            (tw - alpha) / (C64::new(1.0, 0.0) - tw * alpha.conj())
        })
        .collect();
    Ok(SchurFunction {
        level: omega.level + 1,
        grid: omega.grid,
        samples,
    })
}

/// Products and sums over a sequence with recorded `a0s`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// `max_j |ρ_j - a_j(0)/a_{j+1}(0)|`.
    pub max_rho_ratio_diff: f64,
    /// `max_n |a_n(0) - a_{hi+1}(0)·Π_{j=n}^{hi} ρ_j|`.
    pub max_telescoping_diff: f64,
    pub sum_alpha_sq: f64,
    /// `Σ|α_j|²` over the top quarter of the window.
    pub tail_sum: f64,
    /// Whether `a_j(0)` is nondecreasing in `j` within `1e-6`.
    pub a0_nondecreasing: bool,
    /// Largest recorded `a_j(0)`, expected to approach 1.
    pub a0_last: f64,
}

pub fn convergence_report(seq: &VerblunskySequence) -> Result<ConvergenceReport> {
    let a0s = seq
        .a0s
        .as_ref()
        .ok_or_else(|| Error::Input("sequence carries no residual norms".into()))?;
    let len = seq.alphas.len();
    let rhos = seq.rhos();
    let mut max_ratio: f64 = 0.0;
    for i in 0..len {
        max_ratio = max_ratio.max((rhos[i] - a0s[i] / a0s[i + 1]).abs());
    }
    let mut max_tel: f64 = 0.0;
    let mut prod = a0s[len];
    for i in (0..len).rev() {
        prod *= rhos[i];
        max_tel = max_tel.max((a0s[i] - prod).abs());
    }
    let sum_alpha_sq = seq.alphas.iter().map(|a| a.norm_sqr()).sum();
    let tail_start = len - len.div_ceil(4);
    let tail_sum = seq.alphas[tail_start..].iter().map(|a| a.norm_sqr()).sum();
    let a0_nondecreasing = a0s.windows(2).all(|w| w[1] >= w[0] - 1e-6);
    Ok(ConvergenceReport {
        max_rho_ratio_diff: max_ratio,
        max_telescoping_diff: max_tel,
        sum_alpha_sq,
        tail_sum,
        a0_nondecreasing,
        a0_last: a0s[len],
    })
}
