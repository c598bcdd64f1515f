//! Direct scattering: reconstruct `R` from a Verblunsky sequence through
//! resolvents of the CMV matrix, plus the inverse/direct roundtrip driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{CircleGrid, ScatteringFunction};
use crate::cmv::{build_cmv, Boundary, CmvMatrix, ResolventMode};
use crate::error::{Error, Result};
use crate::lr::{LrElement, LrSpace, SectionParams};
use crate::verblunsky::{inverse_scattering, InverseParams, VerblunskySequence};
use crate::C64;

/// Approximations of the wandering vectors `e₀`, `d₀` in the CMV basis.
#[derive(Debug, Clone, Serialize)]
pub struct WanderingApprox {
    pub e0: Vec<C64>,
    pub d0: Vec<C64>,
    pub depth: usize,
    /// `2 - 2·Π_{j ≥ 2·depth} ρ_j`, the squared distance of `e0` from `e₀`.
    pub residual: f64,
}

/// `e0 = U^{-depth} δ_{2·depth}`, `d0 = U^{depth} δ_{2·depth+1}`.
pub fn wandering_vectors(
    u: &CmvMatrix,
    seq: &VerblunskySequence,
    depth: usize,
) -> Result<WanderingApprox> {
    let top = 2 * depth as i64 + 2;
    if top > u.hi() {
        return Err(Error::Domain(format!(
            "depth {depth} needs basis index {top}, window ends at {}",
            u.hi()
        )));
    }
    let d = depth as i64;
    let e0 = u.apply_power(&u.delta(2 * d)?, -d)?;
    let d0 = u.apply_power(&u.delta(2 * d + 1)?, d)?;
    let tail: f64 = (2 * d..=seq.hi().max(2 * d)).map(|j| seq.rho(j)).product();
    Ok(WanderingApprox {
        e0,
        d0,
        depth,
        residual: 2.0 - 2.0 * tail,
    })
}

/// Window and depth for direct scattering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectParams {
    pub window: usize,
    pub depth: usize,
}

impl Default for DirectParams {
    fn default() -> Self {
        Self {
            window: 128,
            depth: 32,
        }
    }
}

/// Operator data shared by all evaluation points.
#[derive(Debug, Clone)]
pub struct DirectScattering {
    pub cmv: CmvMatrix,
    pub wandering: WanderingApprox,
    /// `U·d0`, the partner paired against in the resolvent formula.
    pub partner: Vec<C64>,
}

impl DirectScattering {
    pub fn new(seq: &VerblunskySequence, params: &DirectParams) -> Result<Self> {
        let cmv = build_cmv(seq, params.window, Boundary::ZeroTail)?;
        let wandering = wandering_vectors(&cmv, seq, params.depth)?;
        let partner = cmv.apply(&wandering.d0)?;
        Ok(Self {
            cmv,
            wandering,
            partner,
        })
    }

    /// Harmonic extension of `R` at `z`:
    /// `<(I - zU*)^{-1} e0 + (I - z̄U)^{-1} e0 - e0, U d0>`.
    pub fn evaluate(&self, z: C64) -> Result<C64> {
        let e0 = &self.wandering.e0;
        let x1 = self.cmv.resolvent_solve(z, e0, ResolventMode::Star)?;
        let x2 = self.cmv.resolvent_solve(z, e0, ResolventMode::Plain)?;
        Ok(x1
            .iter()
            .zip(&x2)
            .zip(e0)
            .zip(&self.partner)
            .map(|(((a, b), e), p)| (a + b - e) * p.conj())
            .sum())
    }

    pub fn evaluate_many(&self, zs: &[C64]) -> Result<Vec<C64>> {
        zs.par_iter().map(|z| self.evaluate(*z)).collect()
    }

    /// Fourier coefficients `c_j = <e0, U^j (U d0)>` for `|j| ≤ jmax`.
    pub fn coefficients(&self, jmax: usize) -> Result<Vec<(i64, C64)>> {
        let j = jmax as i64;
        let mut out = Vec::with_capacity(2 * jmax + 1);
        for k in -j..=j {
            let v = self.cmv.apply_power(&self.partner, k)?;
            let c: C64 = self
                .wandering
                .e0
                .iter()
                .zip(&v)
                .map(|(e, p)| e * p.conj())
                .sum();
            out.push((k, c));
        }
        Ok(out)
    }
}

/// Values of the harmonic extension of `R` at each `z`.
pub fn direct_scattering(
    seq: &VerblunskySequence,
    zs: &[C64],
    params: &DirectParams,
) -> Result<Vec<C64>> {
    DirectScattering::new(seq, params)?.evaluate_many(zs)
}

/// Radii used for boundary extrapolation.
pub const RICHARDSON_EPS: (f64, f64) = (1e-2, 5e-3);

/// Boundary values on a grid by two-point Richardson extrapolation from the
/// rings `|z| = 1 - 1e-2` and `|z| = 1 - 5e-3`.
pub fn boundary_values(
    seq: &VerblunskySequence,
    grid: CircleGrid,
    params: &DirectParams,
) -> Result<Vec<C64>> {
    DirectScattering::new(seq, params)?.boundary_values(grid)
}

impl DirectScattering {
    pub fn boundary_values(&self, grid: CircleGrid) -> Result<Vec<C64>> {
        let nodes = grid.nodes();
        let (e1, e2) = RICHARDSON_EPS;
        let ring = |eps: f64| -> Vec<C64> { nodes.iter().map(|t| t * (1.0 - eps)).collect() };
        let r1 = self.evaluate_many(&ring(e1))?;
        let r2 = self.evaluate_many(&ring(e2))?;
        // Linear in eps: f(0) ≈ (e1 f(e2) - e2 f(e1)) / (e1 - e2).
        Ok(r1
            .iter()
            .zip(&r2)
            .map(|(a, b)| (b * e1 - a * e2) / (e1 - e2))
            .collect())
    }
}

/// Parameters of the roundtrip driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundtripParams {
    pub levels: i64,
    pub direct: DirectParams,
    pub section: SectionParams,
    pub margin_min: f64,
    /// Number of times `(J, W, depth, N cap)` are doubled after the base run.
    pub doublings: usize,
    /// Relative slack allowed when checking that errors do not grow.
    pub slack: f64,
}

impl Default for RoundtripParams {
    fn default() -> Self {
        Self {
            levels: 16,
            direct: DirectParams::default(),
            section: SectionParams::default(),
            margin_min: 1e-3,
            doublings: 1,
            slack: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripStep {
    pub levels: i64,
    pub window: usize,
    pub depth: usize,
    pub section_cap: usize,
    pub sup_error: f64,
    pub l2_error: f64,
    pub wandering_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport {
    pub sup_error: f64,
    pub l2_error: f64,
    pub ladder: Vec<RoundtripStep>,
    /// Each step's sup error is at most `(1 + slack)` times the previous one
    /// (with a `1e-12` floor for errors at rounding level).
    pub non_increasing: bool,
    /// Reconstruction at the base parameters.
    #[serde(skip)]
    pub reconstruction: Vec<C64>,
}

/// Inverse scattering followed by boundary reconstruction, compared with `R`.
pub fn roundtrip(r: &ScatteringFunction, params: &RoundtripParams) -> Result<RoundtripReport> {
    let grid = r.grid();
    let mut ladder = Vec::new();
    let mut reconstruction = Vec::new();
    for step in 0..=params.doublings {
        let f = 1usize << step;
        let levels = params.levels * f as i64;
        let direct = DirectParams {
            window: params.direct.window * f,
            depth: params.direct.depth * f,
        };
        let section = SectionParams {
            cap: params.section.cap * f,
            ..params.section
        };
        let inv = inverse_scattering(
            r,
            &InverseParams {
                level_lo: -levels,
                level_hi: levels,
                section,
                margin_min: params.margin_min,
                checks: false,
            },
        )?;
        let ds = DirectScattering::new(&inv.sequence, &direct)?;
        let rb = ds.boundary_values(grid)?;
        let (sup_error, l2_error) = errors(&rb, r.samples());
        ladder.push(RoundtripStep {
            levels,
            window: direct.window,
            depth: direct.depth,
            section_cap: section.cap,
            sup_error,
            l2_error,
            wandering_residual: ds.wandering.residual,
        });
        if step == 0 {
            reconstruction = rb;
        }
    }
    let non_increasing = ladder
        .windows(2)
        .all(|w| w[1].sup_error <= (1.0 + params.slack) * w[0].sup_error + 1e-12);
    Ok(RoundtripReport {
        sup_error: ladder[0].sup_error,
        l2_error: ladder[0].l2_error,
        ladder,
        non_increasing,
        reconstruction,
    })
}

/// Sup and root-mean-square differences.
pub fn errors(a: &[C64], b: &[C64]) -> (f64, f64) {
    let mut sup: f64 = 0.0;
    let mut sq = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).norm();
        sup = sup.max(d);
        sq += d * d;
    }
    (sup, (sq / a.len().max(1) as f64).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsEntry {
    pub m: i64,
    /// `‖g'_n - K_{n,m}‖²`.
    pub distance_sq: f64,
    /// `2 - 2 a_{n+m}(0)`.
    pub predicted: f64,
    pub a0: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub n: i64,
    pub entries: Vec<AsymptoticsEntry>,
    pub max_discrepancy: f64,
    /// `a_{n+m}(0)` nondecreasing in `m` within `1e-6`.
    pub monotone: bool,
}

/// Compares `‖g'_n - K_{n,m}‖²` with `2 - 2a_{n+m}(0)` for each `m`.
pub fn asymptotics_check(
    r: &ScatteringFunction,
    n: i64,
    ms: &[i64],
    section: &SectionParams,
) -> Result<AsymptoticsReport> {
    let space = LrSpace::new(r);
    let entries: Vec<AsymptoticsEntry> = ms
        .par_iter()
        .map(|&m| {
            let pair = space
                .defect_pair_converged(n, m, section)
                .map_err(|e| e.at_level(n + m))?;
            let diff =
                LrElement::analytic(n).combine(C64::new(1.0, 0.0), &pair.k, C64::new(-1.0, 0.0));
            let d = space.norm(&diff)?;
            Ok(AsymptoticsEntry {
                m,
                distance_sq: d * d,
                predicted: 2.0 - 2.0 * pair.a0,
                a0: pair.a0,
            })
        })
        .collect::<Result<_>>()?;
    let max_discrepancy = entries
        .iter()
        .map(|e| (e.distance_sq - e.predicted).abs())
        .fold(0.0, f64::max);
    let mut sorted: Vec<&AsymptoticsEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| e.m);
    let monotone = sorted.windows(2).all(|w| w[1].a0 >= w[0].a0 - 1e-6);
    Ok(AsymptoticsReport {
        n,
        entries,
        max_discrepancy,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c0;
    use crate::circle::LaurentSeries;

    fn seq_with(lo: i64, alphas: Vec<C64>) -> VerblunskySequence {
        VerblunskySequence::new(lo, alphas).unwrap()
    }

    #[test]
    fn wandering_zero_alphas() {
        let seq = seq_with(0, vec![c0()]);
        let u = build_cmv(&seq, 32, Boundary::ZeroTail).unwrap();
        for depth in [0, 3, 7] {
            let w = wandering_vectors(&u, &seq, depth).unwrap();
            assert_eq!(w.e0, u.delta(0).unwrap());
            assert_eq!(w.d0, u.delta(1).unwrap());
            assert_eq!(w.residual, 0.0);
        }
        assert!(matches!(
            wandering_vectors(&u, &seq, 16),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn depth_zero_is_identity() {
        let seq = seq_with(
            -2,
            vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.0), C64::new(0.5, 0.5)],
        );
        let u = build_cmv(&seq, 16, Boundary::ZeroTail).unwrap();
        let w = wandering_vectors(&u, &seq, 0).unwrap();
        assert_eq!(w.e0, u.delta(0).unwrap());
        assert_eq!(w.d0, u.delta(1).unwrap());
    }

    #[test]
    fn zero_sequence_gives_zero() {
        let seq = seq_with(0, vec![c0()]);
        let zs = [c0(), C64::new(0.5, 0.2), C64::new(-0.9, 0.0)];
        let out = direct_scattering(
            &seq,
            &zs,
            &DirectParams {
                window: 32,
                depth: 8,
            },
        )
        .unwrap();
        assert!(out.iter().all(|v| *v == c0()));
    }

    #[test]
    fn rank_one_values() {
        let gamma = 0.5;
        let seq = seq_with(0, vec![C64::new(-gamma, 0.0)]);
        let params = DirectParams {
            window: 32,
            depth: 8,
        };
        let out = direct_scattering(
            &seq,
            &[C64::new(0.5, 0.0), c0(), C64::new(0.2, 0.3)],
            &params,
        )
        .unwrap();
        assert!((out[0] - C64::new(0.25, 0.0)).norm() < 1e-12);
        assert!(out[1].norm() < 1e-12);
        assert!((out[2] - C64::new(0.1, -0.15)).norm() < 1e-12);
        let ds = DirectScattering::new(&seq, &params).unwrap();
        for (j, c) in ds.coefficients(3).unwrap() {
            let expected = if j == -1 { gamma } else { 0.0 };
            assert!((c - C64::new(expected, 0.0)).norm() < 1e-12, "c_{j} = {c}");
        }
    }

    #[test]
    fn boundary_values_of_rank_one() {
        let seq = seq_with(0, vec![C64::new(0.0, -0.3)]);
        let grid = CircleGrid::new(64).unwrap();
        let rb = boundary_values(
            &seq,
            grid,
            &DirectParams {
                window: 32,
                depth: 8,
            },
        )
        .unwrap();
        let target = ScatteringFunction::from_coeffs(
            grid,
            &LaurentSeries::new(-1, vec![C64::new(0.0, 0.3)]).unwrap(),
        )
        .unwrap();
        let (sup, _) = errors(&rb, target.samples());
        // The extension is linear in the radius, so extrapolation is exact.
        assert!(sup < 1e-10, "{sup}");
    }

    #[test]
    fn asymptotics_rank_one() {
        let grid = CircleGrid::new(256).unwrap();
        let r = ScatteringFunction::from_coeffs(
            grid,
            &LaurentSeries::new(-1, vec![C64::new(0.5, 0.0)]).unwrap(),
        )
        .unwrap();
        let rep = asymptotics_check(&r, 0, &[0, 1, 2, 3], &SectionParams::default()).unwrap();
        assert!(rep.max_discrepancy < 1e-12);
        assert!((rep.entries[0].predicted - (2.0 - 2.0 * 0.75f64.sqrt())).abs() < 1e-12);
        assert!(rep.entries[1..].iter().all(|e| e.distance_sq.abs() < 1e-12));
        assert!(rep.monotone);
    }
}
