//! Quick end-to-end checks of every subsystem at small resolution.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bm::{bm_from_parts, certify_folded, CriticalSet, DEFAULT_THETA, DEFAULT_TOL_ZERO};
use crate::compat::{compat_experiment, random_equivalent_pair, ExperimentConfig};
use crate::desing::{build_even_profile, build_odd_profile, desingularize, verify_desing};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::forms::{d0, d1, OneForm, TwoForm};
use crate::invariants::{liouville_volume_pv, modular_periods, regional_volumes, DEFAULT_CUTOFFS};
use crate::moser::{run_moser, MoserConfig};
use crate::primitive::{build_primitive, verify_primitive};
use crate::spectral::{SpectralField1D, SpectralField2D};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn random_field(rng: &mut ChaCha8Rng, bw: usize, modes: i32) -> SpectralField2D {
    let mut f = SpectralField2D::zeros(bw);
    for kx in -modes..=modes {
        for ky in 0..=modes {
            let decay = (1 + kx * kx + ky * ky) as f64;
            let a = rng.gen_range(-1.0..1.0) / (decay * decay);
            f = f.add(&SpectralField2D::cos(bw, kx, ky, a));
        }
    }
    f
}

fn z2() -> CriticalSet {
    CriticalSet::with_default_collar(vec![0.0, 0.5], vec![1, -1]).expect("valid circles")
}

fn sine_pair() -> Result<(crate::FoldedVolumeForm, crate::FoldedVolumeForm)> {
    let s = SpectralField2D::sin(16, 1, 0, 1.0);
    let s1 = s.add(&s.multiply(&SpectralField2D::cos(16, 0, 1, 0.3)));
    let o0 = certify_folded(&TwoForm::new(s), &z2(), DEFAULT_THETA, DEFAULT_TOL_ZERO)?;
    let o1 = certify_folded(&TwoForm::new(s1), &z2(), DEFAULT_THETA, DEFAULT_TOL_ZERO)?;
    Ok((o0, o1))
}

type Check = (&'static str, fn(ExecMode) -> Result<(bool, String)>);

fn exterior(_: ExecMode) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut dd: f64 = 0.0;
    let mut total: f64 = 0.0;
    for _ in 0..10 {
        let f = random_field(&mut rng, 16, 4);
        dd = d1(&d0(&f)).coef.grid_samples(64).iter().fold(dd, |m, v| m.max(v.abs()));
        let w = OneForm { a: random_field(&mut rng, 16, 4), b: random_field(&mut rng, 16, 4) };
        total = total.max(d1(&w).integral().abs());
    }
    Ok((dd <= 1e-13 && total <= 1e-13, format!("sup|dd f| = {dd:.1e}, max |∫dα| = {total:.1e}")))
}

fn volumes(_: ExecMode) -> Result<(bool, String)> {
    let (o0, o1) = sine_pair()?;
    let v0 = regional_volumes(&o0).volumes;
    let v1 = regional_volumes(&o1).volumes;
    let want = [1.0 / PI, -1.0 / PI];
    let err = v0.iter().chain(&v1).zip(want.iter().cycle()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok((err <= 1e-10, format!("regional volumes {v0:.6?}, error {err:.1e}")))
}

fn obstruction(mode: ExecMode) -> Result<(bool, String)> {
    let (o0, _) = sine_pair()?;
    let scaled =
        certify_folded(&TwoForm::new(SpectralField2D::sin(16, 1, 0, 1.1)), &z2(), DEFAULT_THETA, DEFAULT_TOL_ZERO)?;
    let cfg = MoserConfig { grid: 16, steps: 4, bandwidth: 8, exec: mode, ..MoserConfig::default() };
    match run_moser(&o0, &scaled, &cfg) {
        Err(Error::Obstruction { defects }) => {
            let err = (defects[0] - 0.1 / PI).abs().max((defects[1] + 0.1 / PI).abs());
            Ok((err <= 1e-9, format!("defects {defects:.6?}")))
        }
        Err(e) => Ok((false, e.to_string())),
        Ok(_) => Ok((false, "scaled form was not rejected".into())),
    }
}

fn primitive(_: ExecMode) -> Result<(bool, String)> {
    let (o0, o1) = sine_pair()?;
    let delta = o1.density().sub(o0.density());
    let p = build_primitive(&delta, &z2())?;
    let r = verify_primitive(&p, &delta, &z2());
    let min_order = r.orders.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((r.residual <= 1e-8 && min_order >= 1.9, format!("residual {:.1e}, min order {min_order:.2}", r.residual)))
}

fn moser(mode: ExecMode) -> Result<(bool, String)> {
    let (o0, o1) = sine_pair()?;
    let cfg = MoserConfig { grid: 64, steps: 40, bandwidth: 16, exec: mode, ..MoserConfig::default() };
    let c = run_moser(&o0, &o1, &cfg)?.certificate;
    Ok((
        c.passed,
        format!("pullback {:.1e}, fixing {:.1e}, min det {:.3}", c.pullback_error, c.fixing_error, c.min_jacobian),
    ))
}

fn periods(_: ExecMode) -> Result<(bool, String)> {
    let a = SpectralField1D::constant(16, 0.7).add(&SpectralField1D::cos(16, 2, 0.3));
    let b = SpectralField1D::constant(16, -0.2).add(&SpectralField1D::sin(16, 1, 0.5));
    let theta = bm_from_parts(2, z2(), vec![vec![a.clone(), b.clone()], vec![b, a]], SpectralField2D::zeros(16))?;
    let p = modular_periods(&theta);
    let err = (p.values[0][1] - 0.7).abs().max((p.values[0][0] + 0.2).abs());
    let pv = liouville_volume_pv(&theta, &DEFAULT_CUTOFFS)?;
    Ok((err <= 1e-10 && pv.diverged, format!("period error {err:.1e}, diverged {}", pv.diverged)))
}

fn even_desing(_: ExecMode) -> Result<(bool, String)> {
    let z = CriticalSet::with_default_collar(vec![0.0], vec![1])?;
    let l = vec![vec![SpectralField1D::constant(16, 1.0), SpectralField1D::zeros(16)]];
    let theta = bm_from_parts(2, z, l, SpectralField2D::constant(16, 1.0))?;
    let r = verify_desing(&desingularize(&theta, &build_even_profile(1, 0.1, 3)?)?);
    let outside = r.outside_agreement.unwrap_or(f64::INFINITY);
    let min = r.min_abs_coefficient.unwrap_or(0.0);
    Ok((outside <= 1e-12 && min > 0.0, format!("outside {outside:.1e}, min |coef| {min:.3}")))
}

fn odd_desing(_: ExecMode) -> Result<(bool, String)> {
    let one = SpectralField1D::constant(16, 1.0);
    let s = SpectralField2D::sin(16, 1, 0, 0.75).add(&SpectralField2D::sin(16, 3, 0, -0.25));
    let theta = bm_from_parts(1, z2(), vec![vec![one.clone()], vec![one.scale(-1.0)]], s)?;
    let r = verify_desing(&desingularize(&theta, &build_odd_profile(0, 0.1, 3)?)?);
    let slope = r.slope_rel_error.unwrap_or(f64::INFINITY);
    Ok((r.fold.is_some() && slope <= 1e-6, format!("folded {}, slope error {slope:.1e}", r.fold.is_some())))
}

fn compat(mode: ExecMode) -> Result<(bool, String)> {
    let (a, b) = random_equivalent_pair(3, 1, 16)?;
    let cfg = ExperimentConfig { exec: mode, ..ExperimentConfig::default() };
    let r = compat_experiment(&a, &b, &cfg)?;
    let defect = r.rows.iter().flat_map(|row| row.difference_volumes.iter()).fold(0.0_f64, |m, d| m.max(d.abs()));
    Ok((
        r.bm.equivalent && r.consistent && defect <= 1e-8,
        format!("rows {}, max difference volume {defect:.1e}", r.rows.len()),
    ))
}

const CHECKS: [Check; 9] = [
    ("exterior calculus", exterior),
    ("regional volumes", volumes),
    ("obstruction", obstruction),
    ("relative primitive", primitive),
    ("moser flow", moser),
    ("modular periods", periods),
    ("even desingularization", even_desing),
    ("odd desingularization", odd_desing),
    ("compatibility", compat),
];

/// Runs every check; failures and errors are reported, never raised.
pub fn run_selftest(mode: ExecMode) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = check(mode).unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckResult { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for r in run_selftest(ExecMode::Sequential) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
