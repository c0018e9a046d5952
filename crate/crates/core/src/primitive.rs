//! Primitives `β` with `dβ = Δ` vanishing to second order on the critical
//! circles, for densities `Δ` with zero regional volumes.

use serde::{Deserialize, Serialize};

use crate::bm::CriticalSet;
use crate::error::{Error, Result};
use crate::forms::{OneFormEval, TwoForm};
use crate::invariants::regional_volumes_of;
use crate::numerics::Smoothstep;
use crate::separable::SeparableField;
use crate::spectral::{cis_powers, SpectralField1D};

/// Defects at or below this are treated as zero.
pub const OBSTRUCTION_TOL: f64 = 1e-10;
/// Order to which the cutoff derivative vanishes at region ends; the
/// primitive is then `C^7` across circles.
pub const DEFAULT_FLATNESS: usize = 7;

/// Per-region volumes `∫_{R_j} Δ`.
pub fn obstruction(delta: &SeparableField, z: &CriticalSet) -> Vec<f64> {
    regional_volumes_of(delta, z).volumes
}

pub fn obstruction_form(delta: &TwoForm, z: &CriticalSet) -> Vec<f64> {
    obstruction(&delta.density(), z)
}

#[derive(Clone, Debug)]
struct RegionData {
    lo: f64,
    hi: f64,
    /// `h_j(y) = ∫_{c_j}^{c_{j+1}} Δ(s, y) ds`
    h: SpectralField1D,
    /// `H_j(y) = ∫_0^y h_j`
    big_h: SpectralField1D,
}

/// Piecewise primitive: on region `[c_j, c_{j+1}]` with `u` the relative
/// position and `χ` the smoothstep,
/// `b = ∫_{c_j}^x Δ ds - χ(u) h_j(y)` and `a = -χ'(u) H_j(y)`.
#[derive(Clone, Debug)]
pub struct PrimitiveOneForm {
    delta: SeparableField,
    critical: CriticalSet,
    step: Smoothstep,
    regions: Vec<RegionData>,
    ky: usize,
}

pub fn build_primitive(delta: &SeparableField, z: &CriticalSet) -> Result<PrimitiveOneForm> {
    build_primitive_with(delta, z, OBSTRUCTION_TOL, DEFAULT_FLATNESS)
}

pub fn build_primitive_with(
    delta: &SeparableField,
    z: &CriticalSet,
    tol: f64,
    flatness: usize,
) -> Result<PrimitiveOneForm> {
    let defects = obstruction(delta, z);
    if defects.iter().any(|d| d.abs() > tol) {
        return Err(Error::Obstruction { defects });
    }
    let mut regions = Vec::with_capacity(z.region_count());
    for j in 0..z.region_count() {
        let (lo, hi) = z.region(j);
        let h = delta.x_integral_profile(lo, hi);
        let big_h = h.antiderivative(tol)?;
        regions.push(RegionData { lo, hi, h, big_h });
    }
    let ky = delta.ky_max();
    Ok(PrimitiveOneForm { delta: delta.clone(), critical: z.clone(), step: Smoothstep::new(flatness), regions, ky })
}

impl PrimitiveOneForm {
    pub fn critical(&self) -> &CriticalSet {
        &self.critical
    }

    pub fn delta(&self) -> &SeparableField {
        &self.delta
    }

    /// Cutoff ramp shared by all regions (in the relative coordinate).
    pub fn cutoff(&self) -> &Smoothstep {
        &self.step
    }

    pub fn is_zero(&self) -> bool {
        self.delta.is_zero()
    }

    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        if self.delta.is_zero() {
            return [0.0, 0.0];
        }
        let (j, xu) = self.critical.locate(x);
        let r = &self.regions[j];
        let len = r.hi - r.lo;
        let u = (xu - r.lo) / len;
        let py = cis_powers(y, self.ky);
        let hy = r.h.eval_with(&py);
        // integrate from the nearer end of the region to avoid cancellation
        let b = if u <= 0.5 {
            let mut acc = 0.0;
            for t in self.delta.terms() {
                acc += t.x.integral(r.lo, xu) * t.y.eval_with(&py);
            }
            acc - self.step.value(u) * hy
        } else {
            let mut acc = 0.0;
            for t in self.delta.terms() {
                acc += t.x.integral(xu, r.hi) * t.y.eval_with(&py);
            }
            -acc + self.step.complement(u) * hy
        };
        let a = -self.step.deriv(u) / len * r.big_h.eval_with(&py);
        [a, b]
    }
}

impl OneFormEval for PrimitiveOneForm {
    fn components(&self, x: f64, y: f64) -> [f64; 2] {
        self.eval(x, y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveReport {
    /// `sup |dβ - Δ|` on the check grid.
    pub residual: f64,
    /// Fitted vanishing order of `β` per circle.
    pub orders: Vec<f64>,
    /// Largest jump of `β` across a circle.
    pub continuity_jump: f64,
}

const FD6: [(f64, f64); 6] = [
    (-3.0, -1.0 / 60.0),
    (-2.0, 9.0 / 60.0),
    (-1.0, -45.0 / 60.0),
    (1.0, 45.0 / 60.0),
    (2.0, -9.0 / 60.0),
    (3.0, 1.0 / 60.0),
];
const FD_STEP: f64 = 2e-4;

/// Checks `dβ = Δ` by sixth-order finite differences of the pointwise `β`,
/// fits vanishing orders and measures jumps across circles.
pub fn verify_primitive(beta: &dyn OneFormEval, delta: &SeparableField, z: &CriticalSet) -> PrimitiveReport {
    let n = 48;
    let mut residual: f64 = 0.0;
    for i in 0..n {
        let x = (i as f64 + 0.37) / n as f64;
        for j in 0..n {
            let y = (j as f64 + 0.61) / n as f64;
            let mut db_dx = 0.0;
            let mut da_dy = 0.0;
            for (k, w) in FD6 {
                db_dx += w * beta.components(x + k * FD_STEP, y)[1];
                da_dy += w * beta.components(x, y + k * FD_STEP)[0];
            }
            let d = (db_dx - da_dy) / FD_STEP;
            residual = residual.max((d - delta.eval(x, y)).abs());
        }
    }
    let orders = z.fit_orders(|x, y| {
        let [a, b] = beta.components(x, y);
        a.abs().max(b.abs())
    });
    let mut continuity_jump: f64 = 0.0;
    for &c in z.circles() {
        let left = if c > 0.0 { c - 1e-14 } else { 1.0 - 1e-14 };
        for j in 0..32 {
            let y = (j as f64 + 0.5) / 32.0;
            let l = beta.components(left, y);
            let r = beta.components(c, y);
            continuity_jump = continuity_jump.max((l[0] - r[0]).abs()).max((l[1] - r[1]).abs());
        }
    }
    PrimitiveReport { residual, orders, continuity_jump }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::OneForm;
    use crate::spectral::SpectralField2D;
    use std::f64::consts::{PI, TAU};

    const K: usize = 16;

    fn z2() -> CriticalSet {
        CriticalSet::with_default_collar(vec![0.0, 0.5], vec![1, -1]).unwrap()
    }

    #[test]
    fn obstruction_examples() {
        let z = z2();
        assert_eq!(obstruction(&SeparableField::zero(), &z), vec![0.0, 0.0]);
        let d = obstruction_form(&TwoForm::new(SpectralField2D::sin(K, 1, 0, 0.2)), &z);
        assert!((d[0] - 0.2 / PI).abs() < 1e-15 && (d[1] + 0.2 / PI).abs() < 1e-15);
        let f = SpectralField2D::sin(K, 1, 0, 1.0).multiply(&SpectralField2D::cos(K, 0, 1, 1.0));
        assert!(obstruction_form(&TwoForm::new(f), &z).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn closed_form_example() {
        let z = z2();
        let f = SpectralField2D::sin(K, 1, 0, 0.3).multiply(&SpectralField2D::cos(K, 0, 1, 1.0));
        let delta = TwoForm::new(f).density();
        let p = build_primitive(&delta, &z).unwrap();
        // on [0, 1/2] the x-antiderivative term is 0.3 cos(2πy)(1 - cos 2πx)/(2π)
        let (x, y) = (0.1, 0.3);
        let u = x / 0.5;
        let want =
            0.3 * (TAU * y).cos() * (1.0 - (TAU * x).cos()) / TAU - p.cutoff().value(u) * 0.3 * (TAU * y).cos() / PI;
        assert!((p.eval(x, y)[1] - want).abs() < 1e-14);
        let r = verify_primitive(&p, &delta, &z);
        assert!(r.residual < 1e-9, "residual {}", r.residual);
        assert!(r.orders.iter().all(|o| *o >= 1.95), "{:?}", r.orders);
        assert!(r.continuity_jump < 1e-10);
    }

    #[test]
    fn zero_and_first_order() {
        let z = z2();
        let p = build_primitive(&SeparableField::zero(), &z).unwrap();
        assert_eq!(p.eval(0.3, 0.4), [0.0, 0.0]);
        let r = verify_primitive(&p, &SeparableField::zero(), &z);
        assert_eq!(r.residual, 0.0);
        let hand = OneForm { a: SpectralField2D::zeros(K), b: SpectralField2D::sin(K, 1, 0, 1.0) };
        let r = verify_primitive(&hand, &SeparableField::zero(), &z);
        assert!(r.orders.iter().all(|o| (o - 1.0).abs() < 0.05), "{:?}", r.orders);
    }

    #[test]
    fn obstructed_difference_is_rejected() {
        let delta = TwoForm::new(SpectralField2D::sin(K, 1, 0, 0.1)).density();
        match build_primitive(&delta, &z2()) {
            Err(Error::Obstruction { defects }) => assert!((defects[0] - 0.1 / PI).abs() < 1e-15),
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    #[test]
    fn linear_in_the_difference() {
        let z = z2();
        let f = SpectralField2D::sin(K, 1, 0, 1.0)
            .multiply(&SpectralField2D::cos(K, 0, 1, 0.4).add(&SpectralField2D::sin(K, 1, 2, 0.1)));
        let delta = TwoForm::new(f).density();
        let p = build_primitive(&delta, &z).unwrap();
        let q = build_primitive(&delta.scale(-2.5), &z).unwrap();
        for i in 0..50 {
            let (x, y) = ((i as f64 * 0.618).fract(), (i as f64 * 0.377).fract());
            let a = p.eval(x, y);
            let b = q.eval(x, y);
            assert!((b[0] + 2.5 * a[0]).abs() < 1e-10 && (b[1] + 2.5 * a[1]).abs() < 1e-10);
        }
    }
}
