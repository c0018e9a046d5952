//! Desingularization profiles and the substitution of `df_ε` for the
//! singular factor `dt/t^m` against fixed Laurent data.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bm::{
    certify_density_inferred, singular_factor, BmNambuForm, CriticalSet, FoldCertificate, FoldedVolumeForm,
    DEFAULT_THETA, DEFAULT_TOL_ZERO,
};
use crate::error::{Error, Result};
use crate::numerics::{falling, wrapped_offset};
use crate::separable::{SeparableField, SeparableTerm, TabulatedProfile, XFactor, XProfile};

pub const DEFAULT_CONTACT_ORDER: usize = 3;
/// Extra contact orders tried when an interpolant fails to be monotone.
pub const MAX_ESCALATION: usize = 6;
const MONOTONE_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(m: usize) -> Self {
        if m.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// `f_ε(x) = ε^{-p} f(x/ε)` with `p = 2k-1` (even order `2k`) or `p = 2k`
/// (odd order `2k+1`).
///
/// Even: `f` is odd, an odd polynomial on `[-1, 1]` glued to
/// `-u^{1-2k}/(2k-1) ± 2`. Odd: `f` is even, `u² - 2` on `[-1, 1]`, a
/// Hermite bridge on `[1, 2]` and `log u` or `-u^{-(2k+2)}/(2k+2)` beyond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesingProfile {
    pub parity: Parity,
    pub k: usize,
    pub epsilon: f64,
    /// Requested contact order.
    pub contact_order: usize,
    /// Contact order actually used after escalation.
    pub used_order: usize,
    /// Even: coefficients of `u^{2j+1}`. Odd: coefficients of `(u-1)^j`.
    pub coefficients: Vec<f64>,
    /// Smallest sampled `f'` on the interpolated interval (unscaled).
    pub min_derivative: f64,
    /// `|f_inner^{(d)} - f_outer^{(d)}|` at each gluing point, `d = 0..=r`,
    /// in the unscaled variable.
    pub gluing: Vec<f64>,
}

fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<Vec<f64>> {
    a.lu()
        .solve(&b)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::InternalConsistency("singular interpolation system".into()))
}

/// `d`-th derivative of `-u^{1-2k}/(2k-1) + 2` for `u > 0`.
fn even_outer(k: usize, u: f64, d: usize) -> f64 {
    let e = 2 * k as i32;
    if d == 0 {
        -u.powi(1 - e) / (e - 1) as f64 + 2.0
    } else {
        falling(-(e as f64), d - 1) * u.powi(-e - d as i32 + 1)
    }
}

/// `d`-th derivative of the far branch for `u > 0`.
fn odd_far(k: usize, u: f64, d: usize) -> f64 {
    if k == 0 {
        match d {
            0 => u.ln(),
            _ => falling(-1.0, d - 1) * u.powi(-(d as i32)),
        }
    } else {
        let e = 2 * k as i32 + 2;
        if d == 0 {
            -u.powi(-e) / e as f64
        } else {
            falling(-(e as f64) - 1.0, d - 1) * u.powi(-e - d as i32)
        }
    }
}

fn odd_core(u: f64, d: usize) -> f64 {
    match d {
        0 => u * u - 2.0,
        1 => 2.0 * u,
        2 => 2.0,
        _ => 0.0,
    }
}

/// `Σ c_j falling(n_j, d) u^{n_j - d}` for exponents `n_j`.
fn poly_deriv(coeffs: &[f64], exps: impl Fn(usize) -> usize, u: f64, d: usize) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let n = exps(j);
            if n < d {
                0.0
            } else {
                c * falling(n as f64, d) * u.powi((n - d) as i32)
            }
        })
        .sum()
}

fn check_params(k: usize, epsilon: f64, r: usize) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon {epsilon} must be positive")));
    }
    if r < 2 {
        return Err(Error::InvalidInput(format!("contact order {r} must be at least 2")));
    }
    let _ = k;
    Ok(())
}

pub fn build_even_profile(k: usize, epsilon: f64, r: usize) -> Result<DesingProfile> {
    check_params(k, epsilon, r)?;
    if k == 0 {
        return Err(Error::InvalidInput("even profiles need k >= 1".into()));
    }
    let mut last_min = f64::NAN;
    for order in r..=r + MAX_ESCALATION {
        let n = order + 1;
        let a = DMatrix::from_fn(n, n, |d, j| falling((2 * j + 1) as f64, d));
        let b = DVector::from_fn(n, |d, _| even_outer(k, 1.0, d));
        let coefficients = solve(a, b)?;
        let deriv = |u: f64| poly_deriv(&coefficients, |j| 2 * j + 1, u, 1);
        let min_derivative =
            (0..=MONOTONE_SAMPLES).map(|i| deriv(i as f64 / MONOTONE_SAMPLES as f64)).fold(f64::INFINITY, f64::min);
        last_min = min_derivative;
        if min_derivative > 0.0 {
            let gluing = (0..=order)
                .map(|d| (poly_deriv(&coefficients, |j| 2 * j + 1, 1.0, d) - even_outer(k, 1.0, d)).abs())
                .collect();
            return Ok(DesingProfile {
                parity: Parity::Even,
                k,
                epsilon,
                contact_order: r,
                used_order: order,
                coefficients,
                min_derivative,
                gluing,
            });
        }
    }
    Err(Error::Monotonicity(format!(
        "even inner interpolant not increasing up to contact order {} (min derivative {last_min:e})",
        r + MAX_ESCALATION
    )))
}

pub fn build_odd_profile(k: usize, epsilon: f64, r: usize) -> Result<DesingProfile> {
    check_params(k, epsilon, r)?;
    let mut last_min = f64::NAN;
    for order in r..=r + MAX_ESCALATION {
        let n = 2 * order + 2;
        // unknowns b_j of (u-1)^j; rows: derivatives at u=1, then at u=2
        let a = DMatrix::from_fn(n, n, |row, j| {
            if row <= order {
                if row == j {
                    falling(j as f64, j)
                } else {
                    0.0
                }
            } else {
                falling(j as f64, row - order - 1)
            }
        });
        let b = DVector::from_fn(
            n,
            |row, _| {
                if row <= order {
                    odd_core(1.0, row)
                } else {
                    odd_far(k, 2.0, row - order - 1)
                }
            },
        );
        let coefficients = solve(a, b)?;
        let deriv = |s: f64| poly_deriv(&coefficients, |j| j, s, 1);
        let min_derivative =
            (0..=MONOTONE_SAMPLES).map(|i| deriv(i as f64 / MONOTONE_SAMPLES as f64)).fold(f64::INFINITY, f64::min);
        last_min = min_derivative;
        if min_derivative > 0.0 {
            let mut gluing: Vec<f64> =
                (0..=order).map(|d| (poly_deriv(&coefficients, |j| j, 0.0, d) - odd_core(1.0, d)).abs()).collect();
            gluing.extend((0..=order).map(|d| (poly_deriv(&coefficients, |j| j, 1.0, d) - odd_far(k, 2.0, d)).abs()));
            return Ok(DesingProfile {
                parity: Parity::Odd,
                k,
                epsilon,
                contact_order: r,
                used_order: order,
                coefficients,
                min_derivative,
                gluing,
            });
        }
    }
    Err(Error::Monotonicity(format!(
        "odd bridge not increasing up to contact order {} (min derivative {last_min:e})",
        r + MAX_ESCALATION
    )))
}

pub fn build_profile(m: usize, epsilon: f64, r: usize) -> Result<DesingProfile> {
    match Parity::of(m) {
        Parity::Even => build_even_profile(m / 2, epsilon, r),
        Parity::Odd => build_odd_profile(m / 2, epsilon, r),
    }
}

impl DesingProfile {
    /// Order `m` of the singular factor this profile replaces.
    pub fn order(&self) -> usize {
        match self.parity {
            Parity::Even => 2 * self.k,
            Parity::Odd => 2 * self.k + 1,
        }
    }

    /// Half-width of the region where `f_ε'` differs from `1/t^m`.
    pub fn support(&self) -> f64 {
        match self.parity {
            Parity::Even => self.epsilon,
            Parity::Odd => 2.0 * self.epsilon,
        }
    }

    fn scale_exponent(&self) -> i32 {
        match self.parity {
            Parity::Even => 2 * self.k as i32 - 1,
            Parity::Odd => 2 * self.k as i32,
        }
    }

    /// `d`-th derivative of the unscaled `f`.
    pub fn unscaled(&self, u: f64, d: usize) -> f64 {
        let a = u.abs();
        match self.parity {
            Parity::Even => {
                // f odd: f^{(d)}(-u) = (-1)^{d+1} f^{(d)}(u)
                let sign = if u < 0.0 && d.is_multiple_of(2) { -1.0 } else { 1.0 };
                let v = if a <= 1.0 {
                    poly_deriv(&self.coefficients, |j| 2 * j + 1, a, d)
                } else {
                    even_outer(self.k, a, d)
                };
                sign * v
            }
            Parity::Odd => {
                let sign = if u < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
                let v = if a <= 1.0 {
                    odd_core(a, d)
                } else if a < 2.0 {
                    poly_deriv(&self.coefficients, |j| j, a - 1.0, d)
                } else {
                    odd_far(self.k, a, d)
                };
                sign * v
            }
        }
    }

    /// `f_ε^{(d)}(x) = ε^{-p-d} f^{(d)}(x/ε)`.
    pub fn derivative(&self, x: f64, d: usize) -> f64 {
        self.unscaled(x / self.epsilon, d) * self.epsilon.powi(-self.scale_exponent() - d as i32)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `f_ε'`, in closed form on the core and far branches.
    pub fn deriv(&self, x: f64) -> f64 {
        let a = x.abs();
        let eps = self.epsilon;
        match self.parity {
            Parity::Even if a > eps => singular_factor(a, 2 * self.k),
            Parity::Odd if a <= eps => 2.0 * x / eps.powi(2 * self.k as i32 + 2),
            Parity::Odd if a >= 2.0 * eps => {
                if self.k == 0 {
                    singular_factor(x, 1)
                } else {
                    eps * eps * singular_factor(x, 2 * self.k + 3)
                }
            }
            _ => self.derivative(x, 1),
        }
    }

    pub fn second(&self, x: f64) -> f64 {
        match self.parity {
            Parity::Odd if x.abs() <= self.epsilon => 2.0 / self.epsilon.powi(2 * self.k as i32 + 2),
            _ => self.derivative(x, 2),
        }
    }

    /// Breakpoints of `f_ε` (positive side).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.parity {
            Parity::Even => vec![self.epsilon],
            Parity::Odd => vec![self.epsilon, 2.0 * self.epsilon],
        }
    }

    /// Whether `f_ε' = 1/t^m` beyond the support.
    pub fn agrees_outside(&self) -> bool {
        !(self.parity == Parity::Odd && self.k > 0)
    }
}

/// x-profile `ρ_c(t)·f_ε'(t)·t^i` for one circle and Laurent power.
struct DesingTerm {
    profile: Arc<DesingProfile>,
    critical: CriticalSet,
    circle: usize,
    power: i32,
}

impl XProfile for DesingTerm {
    fn value(&self, x: f64) -> f64 {
        let t = wrapped_offset(x, self.critical.position(self.circle));
        let (rho, _) = self.critical.partition(self.circle, t);
        if rho == 0.0 {
            return 0.0;
        }
        rho * self.profile.deriv(t) * t.powi(self.power)
    }

    fn deriv(&self, x: f64) -> f64 {
        let t = wrapped_offset(x, self.critical.position(self.circle));
        let (rho, drho) = self.critical.partition(self.circle, t);
        if rho == 0.0 {
            return 0.0;
        }
        let f1 = self.profile.deriv(t);
        let f2 = self.profile.second(t);
        let p = self.power;
        let tp = t.powi(p);
        let dtp = if p == 0 { 0.0 } else { p as f64 * t.powi(p - 1) };
        drho * f1 * tp + rho * f2 * tp + rho * f1 * dtp
    }

    fn knots(&self) -> Vec<f64> {
        let c = self.critical.position(self.circle);
        let mut offsets = self.profile.breakpoints();
        offsets.push(self.critical.collar_width());
        offsets.push(self.critical.reach(self.circle));
        let mut knots = vec![c, c + 0.5];
        for o in offsets {
            if o < 0.5 {
                knots.push(c + o);
                knots.push(c - o);
            }
        }
        knots
    }

    fn label(&self) -> String {
        format!("desing[circle {}, t^{}]", self.circle, self.power)
    }
}

/// `ω_ε = df_ε ∧ α + β` as a pointwise density.
#[derive(Clone, Debug)]
pub struct DesingularizedForm {
    pub parity: Parity,
    pub profile: Arc<DesingProfile>,
    density: SeparableField,
    source: BmNambuForm,
    folded: Option<FoldedVolumeForm>,
}

pub fn desingularize(theta: &BmNambuForm, profile: &DesingProfile) -> Result<DesingularizedForm> {
    let m = theta.m();
    if Parity::of(m) != profile.parity || profile.order() != m {
        return Err(Error::ParityMismatch(format!(
            "profile for order {} applied to a form of order {m}",
            profile.order()
        )));
    }
    let z = theta.critical();
    for i in 0..z.len() {
        let reach = z.reach(i);
        if profile.epsilon >= reach {
            return Err(Error::ProfileTooWide(format!(
                "epsilon {} reaches past the partition support {reach} of circle {i}",
                profile.epsilon
            )));
        }
    }
    let profile = Arc::new(profile.clone());
    let mut density = SeparableField::zero();
    for i in 0..z.len() {
        for (p, a) in theta.laurent(i).iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let term = DesingTerm { profile: profile.clone(), critical: z.clone(), circle: i, power: p as i32 };
            density.push(SeparableTerm {
                x: XFactor::Profile(Arc::new(TabulatedProfile::new(Arc::new(term)))),
                y: a.clone(),
            });
        }
    }
    density = density.add(&theta.smooth().density());
    let folded = match profile.parity {
        Parity::Odd if !z.is_empty() => {
            Some(certify_density_inferred(density.clone(), z, DEFAULT_THETA, DEFAULT_TOL_ZERO)?)
        }
        _ => None,
    };
    Ok(DesingularizedForm { parity: profile.parity, profile, density, source: theta.clone(), folded })
}

impl DesingularizedForm {
    pub fn density(&self) -> &SeparableField {
        &self.density
    }

    pub fn source(&self) -> &BmNambuForm {
        &self.source
    }

    /// Folded certification (odd order).
    pub fn folded(&self) -> Option<&FoldedVolumeForm> {
        self.folded.as_ref()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.density.eval(x, y)
    }

    /// Values on the `n × n` grid, row-major in y.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n * n).map(|i| self.eval((i % n) as f64 / n as f64, (i / n) as f64 / n as f64)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesingReport {
    pub parity: Parity,
    pub m: usize,
    pub epsilon: f64,
    pub contact_order: usize,
    pub used_order: usize,
    pub gluing_max: f64,
    pub profile_min_derivative: f64,
    /// Even order: `min |coefficient|` on the check grid.
    pub min_abs_coefficient: Option<f64>,
    /// Odd order: folded certificate of `ω_ε`.
    pub fold: Option<FoldCertificate>,
    /// Odd order: finite-difference normal slopes at the circles, sup-relative
    /// error against `2 α̂_0 / ε^{2k+2} + ∂_x β`.
    pub slope_rel_error: Option<f64>,
    /// `sup |ω_ε - θ|` where the two must agree; `None` where not expected.
    pub outside_agreement: Option<f64>,
    pub identical_to_source: bool,
}

const SLOPE_ROWS: usize = 64;
const CHECK_NX: usize = 2048;
const CHECK_NY: usize = 64;

/// Measured versus predicted normal slopes at each circle.
pub fn normal_slopes(d: &DesingularizedForm) -> Vec<(f64, f64)> {
    let theta = &d.source;
    let z = theta.critical();
    let prof = &d.profile;
    let h = 1e-3 * prof.epsilon;
    let smooth = theta.smooth().density();
    let mut out = Vec::new();
    for i in 0..z.len() {
        let c = z.position(i);
        for j in 0..SLOPE_ROWS {
            let y = (j as f64 + 0.5) / SLOPE_ROWS as f64;
            let w = |t: f64| d.eval(c + t, y);
            let measured = (8.0 * (w(h) - w(-h)) - (w(2.0 * h) - w(-2.0 * h))) / (12.0 * h);
            let a0 = theta.laurent(i)[0].eval(y);
            let predicted = 2.0 * a0 / prof.epsilon.powi(2 * prof.k as i32 + 2) + smooth.eval_dx(c, y);
            out.push((measured, predicted));
        }
    }
    out
}

pub fn verify_desing(d: &DesingularizedForm) -> DesingReport {
    let theta = &d.source;
    let z = theta.critical();
    let prof = &d.profile;
    let mut min_abs = f64::INFINITY;
    let mut agreement: f64 = 0.0;
    let check_outside = prof.agrees_outside();
    let mut identical = theta.is_smooth_only();
    for ix in 0..CHECK_NX {
        let x = (ix as f64 + 0.5) / CHECK_NX as f64;
        let outside = (0..z.len()).all(|i| wrapped_offset(x, z.position(i)).abs() > prof.support());
        for iy in 0..CHECK_NY {
            let y = iy as f64 / CHECK_NY as f64;
            let v = d.eval(x, y);
            min_abs = min_abs.min(v.abs());
            if outside && check_outside {
                if let Ok(s) = theta.eval(x, y) {
                    agreement = agreement.max((v - s).abs());
                }
            }
            if identical && theta.is_smooth_only() {
                identical = (v - theta.smooth().eval(x, y)).abs() <= 1e-12 * (1.0 + v.abs());
            }
        }
    }
    let slope_rel_error = match d.parity {
        Parity::Odd => Some(normal_slopes(d).iter().fold(0.0_f64, |e, (m, p)| e.max((m - p).abs() / p.abs()))),
        Parity::Even => None,
    };
    DesingReport {
        parity: d.parity,
        m: theta.m(),
        epsilon: prof.epsilon,
        contact_order: prof.contact_order,
        used_order: prof.used_order,
        gluing_max: prof.gluing.iter().copied().fold(0.0, f64::max),
        profile_min_derivative: prof.min_derivative,
        min_abs_coefficient: (d.parity == Parity::Even).then_some(min_abs),
        fold: d.folded.as_ref().map(|f| f.certificate().clone()),
        slope_rel_error,
        outside_agreement: check_outside.then_some(agreement),
        identical_to_source: identical,
    }
}
