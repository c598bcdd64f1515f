//! The invariant suite: every identity the pipeline is expected to satisfy,
//! evaluated on one scattering function.

use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::circle::{szego_check, CircleGrid, ScatteringFunction};
use crate::cmv::{build_cmv, Boundary};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::lr::{shift, DefectPair, GeneratorFrame, LrElement, LrSpace, SectionParams};
use crate::oracle::compare_with_oracle;
use crate::scattering::{asymptotics_check, roundtrip};
use crate::spectral::{
    change_basis_density, log_det_integral, moment_check, sigma_recursion_check, spectral_density,
};
use crate::verblunsky::{
    alpha_from_defects, convergence_report, inverse_scattering, recover_omega, schur_step,
    InverseResult, VerblunskySequence,
};
use crate::C64;

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
    /// When set, `tol` is a lower bound on `value`.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub lower_bound: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
    pub passed: bool,
}

impl CheckReport {
    /// Records `value ≤ tol`.
    pub fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        self.items.push(CheckItem {
            name: name.into(),
            value,
            tol,
            passed: value <= tol,
            lower_bound: false,
            detail: None,
        });
    }

    /// Records `value ≥ bound`.
    pub fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.items.push(CheckItem {
            name: name.into(),
            value,
            tol: bound,
            passed: value >= bound,
            lower_bound: true,
            detail: None,
        });
    }

    pub fn flag(&mut self, name: &str, ok: bool, detail: Option<String>) {
        self.items.push(CheckItem {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tol: 0.0,
            passed: ok,
            lower_bound: false,
            detail,
        });
    }

    /// Records a check whose computation failed.
    pub fn failed(&mut self, name: &str, err: &Error) {
        self.items.push(CheckItem {
            name: name.into(),
            value: f64::NAN,
            tol: 0.0,
            passed: false,
            lower_bound: false,
            detail: Some(err.to_string()),
        });
    }

    /// Runs `f` and records its value, or the error.
    pub fn measure(&mut self, name: &str, tol: f64, f: impl FnOnce() -> Result<f64>) {
        match f() {
            Ok(v) => self.at_most(name, v, tol),
            Err(e) => self.failed(name, &e),
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.items.iter().all(|i| i.passed);
        self
    }
}

/// Which expensive groups to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub oracle: bool,
    pub roundtrip: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            oracle: true,
            roundtrip: true,
        }
    }
}

/// `|<K, g>|` over the generators `K` must be orthogonal to, `|‖K‖ - 1|`,
/// and `|<K, g'_n> - a0|`; likewise for `K̃`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DefectDiagnostics {
    pub orthogonality: f64,
    pub norm_error: f64,
    pub source_error: f64,
}

pub fn defect_diagnostics(space: &LrSpace, pair: &DefectPair) -> Result<DefectDiagnostics> {
    let (n, m, size) = (pair.n, pair.m, pair.section as i64);
    let mut ortho: f64 = 0.0;
    for i in 0..size {
        let gk = LrElement::analytic(n + i);
        let gl = LrElement::anti_analytic(m + 1 + i);
        if i > 0 {
            ortho = ortho.max(space.inner_product(&pair.k, &gk)?.norm());
            ortho = ortho.max(space.inner_product(&pair.ktilde, &gl)?.norm());
        }
        ortho = ortho.max(space.inner_product(&pair.k, &gl)?.norm());
        ortho = ortho.max(space.inner_product(&pair.ktilde, &gk)?.norm());
    }
    // The loop above also paired K with g''_{m+1} and K̃ with g'_n, which is intended.
    let norm_error = (space.norm(&pair.k)? - 1.0)
        .abs()
        .max((space.norm(&pair.ktilde)? - 1.0).abs());
    let sk = space.inner_product(&pair.k, &LrElement::analytic(n))?;
    let st = space.inner_product(&pair.ktilde, &LrElement::anti_analytic(m + 1))?;
    let source_error = (sk - C64::new(pair.a0, 0.0))
        .norm()
        .max((st - C64::new(pair.a0, 0.0)).norm());
    Ok(DefectDiagnostics {
        orthogonality: ortho,
        norm_error,
        source_error,
    })
}

/// Largest deviation from the Hankel pattern and smallest Gram eigenvalue.
pub fn gram_structure(space: &LrSpace, frame: GeneratorFrame) -> Result<(f64, f64)> {
    let blocks = space.gram_matrix(frame)?;
    let c = &blocks.cross;
    let mut hankel: f64 = 0.0;
    for i in 0..c.nrows().saturating_sub(1) {
        for j in 1..c.ncols() {
            hankel = hankel.max((c[(i, j)] - c[(i + 1, j - 1)]).norm());
        }
    }
    let eig = SymmetricEigen::new(blocks.full()).eigenvalues;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((hankel, min))
}

/// Coordinate distance between the pair at `(n+1, m-1)` and the shifted pair at `(n, m)`.
pub fn shift_covariance(space: &LrSpace, n: i64, m: i64, section: &SectionParams) -> Result<f64> {
    let a = space.defect_pair_converged(n, m, section)?;
    let b = space.defect_pair_converged(n + 1, m - 1, section)?;
    Ok(shift(&a.k, 1)
        .max_coord_diff(&b.k)
        .max(shift(&a.ktilde, 1).max_coord_diff(&b.ktilde)))
}

/// Schur-chain diagnostics over consecutive levels.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SchurChain {
    /// `sup |ω_{j+1} - schur_step(ω_j, α_j)|`.
    pub chain: f64,
    /// `|ω_{j+1}(0) + α_j|`.
    pub value_at_zero: f64,
    /// `sup |ω_j|`.
    pub sup: f64,
}

pub fn schur_chain(
    space: &LrSpace,
    pairs: &BTreeMap<i64, DefectPair>,
    seq: &VerblunskySequence,
    grid: CircleGrid,
) -> Result<SchurChain> {
    let mut out = SchurChain {
        chain: 0.0,
        value_at_zero: 0.0,
        sup: 0.0,
    };
    let mut prev = None;
    for (level, pair) in pairs {
        let w = recover_omega(space, pair, grid)?;
        out.sup = out.sup.max(w.sup());
        if let Some((pl, pw)) = prev.take() {
            if pl + 1 == *level && pl >= seq.lo && pl <= seq.hi() {
                let alpha = seq.get(pl);
                let stepped = schur_step(&pw, alpha)?;
                out.chain = out.chain.max(stepped.sup_distance(&w));
                out.value_at_zero = out.value_at_zero.max((w.value_at_zero() + alpha).norm());
            }
        }
        prev = Some((*level, w));
    }
    Ok(out)
}

/// The basis vector with CMV index `i`: `K_{n,n}` for `i = 2n`, `K̃_{n+1,n}` for `i = 2n+1`.
fn basis_vector(pairs: &BTreeMap<i64, DefectPair>, i: i64) -> Option<&LrElement> {
    let p = pairs.get(&i)?;
    Some(if i.rem_euclid(2) == 0 {
        &p.k
    } else {
        &p.ktilde
    })
}

/// `max |<U b_c, b_r> - U[r][c]|` over the columns whose band lies inside the
/// computed levels. `pairs` must use the balanced split, so that level `i`
/// holds `K_{n,n}` (even `i`) or `K̃_{n+1,n}` (odd `i`).
pub fn gram_cmv_consistency(
    space: &LrSpace,
    pairs: &BTreeMap<i64, DefectPair>,
    seq: &VerblunskySequence,
) -> Result<f64> {
    let (lo, hi) = (seq.lo, seq.hi());
    let w = (hi.abs().max(lo.abs()) + 4) as usize;
    let u = build_cmv(seq, w, Boundary::ZeroTail)?;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for c in lo + 2..=hi - 1 {
        let Some(bc) = basis_vector(pairs, c) else {
            continue;
        };
        let ubc = shift(bc, 1);
        for r in c - 2..=c + 2 {
            let Some(br) = basis_vector(pairs, r) else {
                continue;
            };
            let g = space.inner_product(&ubc, br)?;
            worst = worst.max((g - u.entry(r, c)).norm());
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Input(
            "level window too small for the Gram/CMV comparison".into(),
        ));
    }
    Ok(worst)
}

/// `‖U K̃_{n,n} - K̃_{n+1,n-1}‖` and `‖U K_{n,n+1} - K_{n+1,n}‖`, the larger one.
pub fn shift_identities(space: &LrSpace, n: i64, section: &SectionParams) -> Result<f64> {
    let one = C64::new(1.0, 0.0);
    let here = space.defect_pair_converged(n, n, section)?;
    let a = space.defect_pair_converged(n + 1, n - 1, section)?;
    let up = space.defect_pair_converged(n, n + 1, section)?;
    let right = space.defect_pair_converged(n + 1, n, section)?;
    let d1 = space.norm(&shift(&here.ktilde, 1).combine(one, &a.ktilde, -one))?;
    let d2 = space.norm(&shift(&up.k, 1).combine(one, &right.k, -one))?;
    Ok(d1.max(d2))
}

/// Runs the whole suite.
pub fn run_checks(
    r: &ScatteringFunction,
    cfg: &RunConfig,
    opts: CheckOptions,
) -> Result<CheckReport> {
    let mut rep = CheckReport::default();
    let szego = szego_check(r);
    rep.flag(
        "szego",
        szego.passes && szego.margin >= cfg.margin_min,
        Some(format!(
            "sup |R| = {}, margin {}",
            szego.sup_modulus, szego.margin
        )),
    );
    let inv = inverse_scattering(r, &cfg.inverse())?;
    let space = LrSpace::new(r);
    let section = cfg.section();
    verblunsky_checks(&mut rep, &inv, cfg);
    lr_checks(&mut rep, &space, &inv, cfg);

    let seq = &inv.sequence;
    rep.measure("schur.chain", cfg.tol_fun, || {
        Ok(schur_chain(&space, &inv.pairs, seq, r.grid())?.chain)
    });
    rep.measure("schur.value_at_zero", cfg.tol_alg, || {
        Ok(schur_chain(&space, &inv.pairs, seq, r.grid())?.value_at_zero)
    });
    rep.measure("schur.sup", 1.0 + 1e-8, || {
        Ok(schur_chain(&space, &inv.pairs, seq, r.grid())?.sup)
    });

    for boundary in [Boundary::Decoupled, Boundary::ZeroTail] {
        let name = format!(
            "cmv.unitarity.{}",
            if boundary == Boundary::Decoupled {
                "decoupled"
            } else {
                "zero_tail"
            }
        );
        rep.measure(&name, 1e-12, || {
            Ok(build_cmv(seq, cfg.window, boundary)?.unitarity_defect())
        });
    }
    rep.measure("cmv.gram_entries", cfg.tol_fun, || {
        gram_cmv_consistency(&space, &inv.pairs, seq)
    });
    rep.measure("cmv.shift_identities", 1e-7, || {
        (-1..=1).try_fold(0.0f64, |acc, n| {
            Ok(acc.max(shift_identities(&space, n, &section)?))
        })
    });

    spectral_checks(&mut rep, r, seq, cfg);

    match asymptotics_check(r, 0, &(0..=8).collect::<Vec<_>>(), &section) {
        Ok(a) => {
            rep.at_most("asymptotics.identity", a.max_discrepancy, 1e-10);
            rep.flag("asymptotics.monotone", a.monotone, None);
        }
        Err(e) => rep.failed("asymptotics", &e),
    }

    if opts.oracle {
        match compare_with_oracle(r, seq, cfg.oracle_section, cfg.tol_fun) {
            Ok(c) => {
                rep.at_most("oracle.alpha", c.max_alpha_diff, cfg.tol_fun);
                rep.at_most("oracle.weight_paths", c.weight_path_diff, 1e-8);
            }
            Err(e) => rep.failed("oracle", &e),
        }
    }
    if opts.roundtrip {
        match roundtrip(r, &cfg.roundtrip()) {
            Ok(rt) => {
                rep.at_most("roundtrip.sup_error", rt.sup_error, cfg.tol_roundtrip);
                rep.flag(
                    "roundtrip.non_increasing",
                    rt.non_increasing,
                    Some(format!(
                        "ladder {:?}",
                        rt.ladder.iter().map(|s| s.sup_error).collect::<Vec<_>>()
                    )),
                );
            }
            Err(e) => rep.failed("roundtrip", &e),
        }
    }
    Ok(rep.finish())
}

fn verblunsky_checks(rep: &mut CheckReport, inv: &InverseResult, cfg: &RunConfig) {
    let seq = &inv.sequence;
    let max_alpha = seq.alphas.iter().map(|a| a.norm()).fold(0.0, f64::max);
    rep.flag(
        "alpha.modulus",
        max_alpha < 1.0,
        Some(format!("max |alpha| = {max_alpha}")),
    );
    let fold = |f: fn(&crate::verblunsky::LevelReport) -> Option<f64>| {
        inv.levels.iter().filter_map(f).fold(0.0, f64::max)
    };
    rep.at_most(
        "alpha.split_invariance",
        fold(|l| l.split_diff),
        cfg.tol_alg,
    );
    rep.at_most("alpha.rho_ratio", fold(|l| Some(l.rho_ratio_diff)), 1e-7);
    rep.at_most("alpha.rotation", fold(|l| l.rotation_residual), 1e-7);
    let unconverged: Vec<i64> = inv
        .levels
        .iter()
        .filter(|l| !l.converged)
        .map(|l| l.level)
        .collect();
    rep.flag(
        "section.converged",
        unconverged.is_empty(),
        (!unconverged.is_empty()).then(|| format!("levels {unconverged:?}")),
    );
    match convergence_report(seq) {
        Ok(c) => {
            rep.flag("a0.nondecreasing", c.a0_nondecreasing, None);
            rep.at_most("a0.telescoping", c.max_telescoping_diff, cfg.tol_alg);
        }
        Err(e) => rep.failed("a0", &e),
    }
}

fn lr_checks(rep: &mut CheckReport, space: &LrSpace, inv: &InverseResult, cfg: &RunConfig) {
    let mut ortho: f64 = 0.0;
    let mut norm: f64 = 0.0;
    let mut source: f64 = 0.0;
    let mut failure = None;
    for pair in inv.pairs.values() {
        match defect_diagnostics(space, pair) {
            Ok(d) => {
                ortho = ortho.max(d.orthogonality);
                norm = norm.max(d.norm_error);
                source = source.max(d.source_error);
            }
            Err(e) => failure = Some(e),
        }
    }
    match failure {
        Some(e) => rep.failed("defect", &e),
        None => {
            rep.at_most("defect.orthogonality", ortho, cfg.tol_alg);
            rep.at_most("defect.norm", norm, 1e-10);
            rep.at_most("defect.source", source, cfg.tol_alg);
        }
    }
    match gram_structure(space, GeneratorFrame::section(0, 0, cfg.section_start)) {
        Ok((hankel, min_eig)) => {
            rep.at_most("gram.hankel", hankel, 0.0);
            rep.at_least("gram.min_eigenvalue", min_eig, -1e-10);
        }
        Err(e) => rep.failed("gram", &e),
    }
    let section = cfg.section();
    rep.measure("defect.shift_covariance", cfg.tol_alg, || {
        [(0, 0), (1, 0), (-1, 0), (2, 1)]
            .iter()
            .try_fold(0.0f64, |acc, &(n, m)| {
                Ok(acc.max(shift_covariance(space, n, m, &section)?))
            })
    });
}

fn spectral_checks(
    rep: &mut CheckReport,
    r: &ScatteringFunction,
    seq: &VerblunskySequence,
    cfg: &RunConfig,
) {
    let section = cfg.section();
    let space = LrSpace::new(r);
    let mut worst: f64 = 0.0;
    let mut worst_moved: f64 = 0.0;
    let mut unit: f64 = 0.0;
    let mut logdet_finite = true;
    for n in 0..=2 {
        let res = (|| -> Result<()> {
            let d = spectral_density(r, n, &section)?;
            let m = moment_check(&d, r, 8, &section)?;
            worst = worst.max(m.max_discrepancy);
            if let Some(e0) = m.entries.iter().find(|e| e.k == 0) {
                unit = unit.max((e0.quadrature[0].re - 1.0).abs());
            }
            logdet_finite &= log_det_integral(&d).is_finite();
            let pair = space.defect_pair_converged(n, n, &section)?;
            let alpha = alpha_from_defects(&space, &pair)?;
            let moved = change_basis_density(&d, alpha)?;
            worst_moved = worst_moved.max(moment_check(&moved, r, 8, &section)?.max_discrepancy);
            Ok(())
        })();
        if let Err(e) = res {
            rep.failed("spectral.moments", &e);
            return;
        }
    }
    rep.at_most("spectral.moments", worst, cfg.tol_fun);
    rep.at_most("spectral.moments_next_pair", worst_moved, cfg.tol_fun);
    rep.at_most("spectral.unit_mass", unit, cfg.tol_alg);
    rep.flag("spectral.log_det_finite", logdet_finite, None);
    rep.measure("spectral.sigma_recursion", cfg.tol_fun, || {
        (seq.lo..seq.hi()).try_fold(0.0f64, |acc, j| {
            Ok(acc.max(sigma_recursion_check(r, j, &section)?))
        })
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Family;

    fn small_cfg() -> RunConfig {
        RunConfig {
            grid_size: 256,
            levels: 4,
            section_start: 16,
            section_cap: 64,
            window: 32,
            depth: 8,
            oracle_section: 24,
            ..RunConfig::default()
        }
    }

    #[test]
    fn zero_passes_everything() {
        let cfg = small_cfg();
        let r = Family::Zero
            .build(CircleGrid::new(cfg.grid_size).unwrap())
            .unwrap();
        let rep = run_checks(&r, &cfg, CheckOptions::default()).unwrap();
        let failed: Vec<_> = rep.items.iter().filter(|i| !i.passed).collect();
        assert!(rep.passed, "{failed:?}");
    }

    #[test]
    fn rank_one_passes_everything() {
        let cfg = small_cfg();
        let r = Family::Monomial {
            gamma: C64::new(0.5, 0.0),
            k: 1,
        }
        .build(CircleGrid::new(cfg.grid_size).unwrap())
        .unwrap();
        let rep = run_checks(&r, &cfg, CheckOptions::default()).unwrap();
        let failed: Vec<_> = rep.items.iter().filter(|i| !i.passed).collect();
        assert!(rep.passed, "{failed:?}");
    }
}
