//! Differential forms on the torus, interior products and discrete maps.

use serde::{Deserialize, Serialize};

use crate::bm::{CriticalSet, FoldedVolumeForm};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::numerics::{vanishing_quotient, QUOTIENT_BAND};
use crate::separable::SeparableField;
use crate::spectral::{Axis, SpectralField2D};

/// `a dx + b dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub a: SpectralField2D,
    pub b: SpectralField2D,
}

/// `coef dx∧dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    pub coef: SpectralField2D,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub vx: SpectralField2D,
    pub vy: SpectralField2D,
}

/// Pointwise access to the `(dx, dy)` components of a one-form.
pub trait OneFormEval: Send + Sync {
    fn components(&self, x: f64, y: f64) -> [f64; 2];
}

impl OneForm {
    pub fn zeros(bandwidth: usize) -> Self {
        Self { a: SpectralField2D::zeros(bandwidth), b: SpectralField2D::zeros(bandwidth) }
    }

    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        [self.a.eval(x, y), self.b.eval(x, y)]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { a: self.a.add(&other.a), b: self.b.add(&other.b) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { a: self.a.scale(s), b: self.b.scale(s) }
    }
}

impl OneFormEval for OneForm {
    fn components(&self, x: f64, y: f64) -> [f64; 2] {
        self.eval(x, y)
    }
}

impl TwoForm {
    pub fn new(coef: SpectralField2D) -> Self {
        Self { coef }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coef.eval(x, y)
    }

    pub fn integral(&self) -> f64 {
        self.coef.integrate_total()
    }

    pub fn density(&self) -> SeparableField {
        SeparableField::from_spectral(&self.coef)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { coef: self.coef.add(&other.coef) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { coef: self.coef.sub(&other.coef) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coef: self.coef.scale(s) }
    }
}

impl VectorField {
    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        [self.vx.eval(x, y), self.vy.eval(x, y)]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { vx: self.vx.add(&other.vx), vy: self.vy.add(&other.vy) }
    }
}

pub fn d0(f: &SpectralField2D) -> OneForm {
    OneForm { a: f.differentiate(Axis::X), b: f.differentiate(Axis::Y) }
}

pub fn d1(w: &OneForm) -> TwoForm {
    TwoForm { coef: w.b.differentiate(Axis::X).sub(&w.a.differentiate(Axis::Y)) }
}

/// `α ∧ β` for one-forms.
pub fn wedge(alpha: &OneForm, beta: &OneForm) -> TwoForm {
    TwoForm { coef: alpha.a.multiply(&beta.b).sub(&alpha.b.multiply(&beta.a)) }
}

/// Interior product `ι_v Ω = -Ω v_y dx + Ω v_x dy`.
pub fn contract(omega: &TwoForm, v: &VectorField) -> OneForm {
    OneForm { a: omega.coef.multiply(&v.vy).scale(-1.0), b: omega.coef.multiply(&v.vx) }
}

/// Solves `ι_v Ω = β` pointwise: `v = (b/w, -a/w)` where `w` is the density.
/// Near a critical circle the quotient is taken through the smooth factor
/// `β/(t·w)`, so `v` vanishes exactly on the circle.
#[inline]
pub fn contraction_quotient(
    critical: &CriticalSet,
    x: f64,
    y: f64,
    density: impl Fn(f64, f64) -> f64,
    beta: impl Fn(f64, f64) -> [f64; 2],
) -> [f64; 2] {
    let direct = |x: f64| {
        let w = density(x, y);
        let [a, b] = beta(x, y);
        [b / w, -a / w]
    };
    if critical.is_empty() {
        return direct(x);
    }
    let (i, t) = critical.nearest(x);
    if t.abs() >= QUOTIENT_BAND {
        return direct(x);
    }
    let c = critical.position(i);
    vanishing_quotient(t, |tau| {
        let xx = c + tau;
        let [a, b] = beta(xx, y);
        ([b, -a], density(xx, y))
    })
}

/// Vector field solving `ι_v Ω = β` for a folded `Ω`.
pub struct ContractionField<'a> {
    omega: &'a FoldedVolumeForm,
    beta: &'a dyn OneFormEval,
    orders: Vec<f64>,
}

/// Minimal fitted vanishing order of `β` accepted by [`solve_contraction`].
pub const MIN_CONTRACTION_ORDER: f64 = 1.5;

pub fn solve_contraction<'a>(omega: &'a FoldedVolumeForm, beta: &'a dyn OneFormEval) -> Result<ContractionField<'a>> {
    let orders = omega.critical().fit_orders(|x, y| {
        let [a, b] = beta.components(x, y);
        a.abs().max(b.abs())
    });
    for (i, &p) in orders.iter().enumerate() {
        if p < MIN_CONTRACTION_ORDER {
            return Err(Error::IllPosedContraction(format!(
                "one-form vanishes to order {p:.3} at circle {i}; order 2 is required"
            )));
        }
    }
    Ok(ContractionField { omega, beta, orders })
}

impl ContractionField<'_> {
    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        let w = self.omega.density();
        contraction_quotient(self.omega.critical(), x, y, |x, y| w.eval(x, y), |x, y| self.beta.components(x, y))
    }

    /// Fitted vanishing orders of the input one-form per circle.
    pub fn beta_orders(&self) -> &[f64] {
        &self.orders
    }

    /// Samples on an `m × m` grid and projects to `bandwidth`; returns the
    /// field and the larger of the two projection errors.
    pub fn sample(&self, m: usize, bandwidth: usize, mode: ExecMode) -> (VectorField, f64) {
        let vals = exec::map_indices(m * m, mode, |i| {
            let (ix, iy) = (i % m, i / m);
            self.eval(ix as f64 / m as f64, iy as f64 / m as f64)
        });
        let vx: Vec<f64> = vals.iter().map(|v| v[0]).collect();
        let vy: Vec<f64> = vals.iter().map(|v| v[1]).collect();
        let (fx, ex) = SpectralField2D::project_samples(&vx, m, bandwidth);
        let (fy, ey) = SpectralField2D::project_samples(&vy, m, bandwidth);
        (VectorField { vx: fx, vy: fy }, ex.max(ey))
    }
}

/// Orientation-preserving map of the torus sampled on an `N × N` grid as
/// `φ(p) = p + d(p)` with a continuous periodic displacement `d`.
/// Index layout is `iy * N + ix`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMap {
    #[serde(rename = "N")]
    n: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

const FD4: [f64; 4] = [1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0];

impl DiscreteMap {
    pub fn new(n: usize, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if n < 4 || dx.len() != n * n || dy.len() != n * n {
            return Err(Error::MalformedField(format!(
                "map grid N={n} needs {} displacements, got {} and {}",
                n * n,
                dx.len(),
                dy.len()
            )));
        }
        if dx.iter().chain(&dy).any(|v| !v.is_finite()) {
            return Err(Error::MalformedField("nonfinite displacement".into()));
        }
        Ok(Self { n, dx, dy })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, dx: vec![0.0; n * n], dy: vec![0.0; n * n] }
    }

    pub fn translation(n: usize, tx: f64, ty: f64) -> Self {
        Self { n, dx: vec![tx; n * n], dy: vec![ty; n * n] }
    }

    /// Builds a map from its displacement function.
    pub fn from_fn(n: usize, mode: ExecMode, f: impl Fn(f64, f64) -> [f64; 2] + Sync) -> Self {
        let vals = exec::map_indices(n * n, mode, |i| f((i % n) as f64 / n as f64, (i / n) as f64 / n as f64));
        Self { n, dx: vals.iter().map(|v| v[0]).collect(), dy: vals.iter().map(|v| v[1]).collect() }
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn displacement(&self) -> (&[f64], &[f64]) {
        (&self.dx, &self.dy)
    }

    pub fn grid_point(&self, i: usize) -> (f64, f64) {
        ((i % self.n) as f64 / self.n as f64, (i / self.n) as f64 / self.n as f64)
    }

    /// Unwrapped image `p + d(p)` of grid point `i`.
    pub fn image(&self, i: usize) -> (f64, f64) {
        let (x, y) = self.grid_point(i);
        (x + self.dx[i], y + self.dy[i])
    }

    /// Image reduced to `[0,1)²`.
    pub fn image_mod1(&self, i: usize) -> (f64, f64) {
        let (x, y) = self.image(i);
        (x.rem_euclid(1.0), y.rem_euclid(1.0))
    }

    pub fn max_displacement(&self) -> f64 {
        self.dx.iter().chain(&self.dy).fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Periodic Catmull-Rom bicubic interpolation of the displacement.
    pub fn interpolate_displacement(&self, x: f64, y: f64) -> [f64; 2] {
        let n = self.n;
        let gx = x.rem_euclid(1.0) * n as f64;
        let gy = y.rem_euclid(1.0) * n as f64;
        let (ix, fx) = (gx.floor() as isize, gx - gx.floor());
        let (iy, fy) = (gy.floor() as isize, gy - gy.floor());
        let wx = catmull_rom(fx);
        let wy = catmull_rom(fy);
        let mut out = [0.0; 2];
        for (j, wyj) in wy.iter().enumerate() {
            let row = (iy + j as isize - 1).rem_euclid(n as isize) as usize * n;
            let mut ax = 0.0;
            let mut ay = 0.0;
            for (i, wxi) in wx.iter().enumerate() {
                let k = row + (ix + i as isize - 1).rem_euclid(n as isize) as usize;
                ax += wxi * self.dx[k];
                ay += wxi * self.dy[k];
            }
            out[0] += wyj * ax;
            out[1] += wyj * ay;
        }
        out
    }

    /// `φ(p)` at an arbitrary point (unwrapped).
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let d = self.interpolate_displacement(x, y);
        (x + d[0], y + d[1])
    }

    /// `self ∘ inner` sampled on the grid of `inner`.
    pub fn compose(&self, inner: &DiscreteMap, mode: ExecMode) -> DiscreteMap {
        let vals = exec::map_indices(inner.n * inner.n, mode, |i| {
            let (x, y) = inner.image(i);
            let d = self.interpolate_displacement(x, y);
            [inner.dx[i] + d[0], inner.dy[i] + d[1]]
        });
        DiscreteMap { n: inner.n, dx: vals.iter().map(|v| v[0]).collect(), dy: vals.iter().map(|v| v[1]).collect() }
    }

    /// Jacobian determinants by fourth-order centered differences.
    pub fn jacobian_dets(&self, mode: ExecMode) -> Vec<f64> {
        let n = self.n;
        let scale = n as f64;
        exec::map_indices(n * n, mode, |i| {
            let (ix, iy) = ((i % n) as isize, (i / n) as isize);
            let at = |f: &[f64], jx: isize, jy: isize| {
                f[(jy.rem_euclid(n as isize) as usize) * n + jx.rem_euclid(n as isize) as usize]
            };
            let mut d = [[0.0; 2]; 2];
            for (c, f) in [&self.dx, &self.dy].into_iter().enumerate() {
                let mut gx = 0.0;
                let mut gy = 0.0;
                for (k, w) in [-2isize, -1, 1, 2].iter().zip(FD4) {
                    gx += w * at(f, ix + k, iy);
                    gy += w * at(f, ix, iy + k);
                }
                d[c] = [gx * scale, gy * scale];
            }
            (1.0 + d[0][0]) * (1.0 + d[1][1]) - d[0][1] * d[1][0]
        })
    }

    pub fn min_jacobian(&self, mode: ExecMode) -> f64 {
        self.jacobian_dets(mode).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Samples `f(φ(p))·det Dφ(p)` on the grid.
    pub fn pullback_samples(&self, f: impl Fn(f64, f64) -> f64 + Sync, mode: ExecMode) -> Result<Vec<f64>> {
        let dets = self.jacobian_dets(mode);
        if let Some((i, d)) = dets.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
            let (x, y) = self.grid_point(i);
            return Err(Error::Orientation(format!("Jacobian determinant {d:e} at ({x:.4}, {y:.4})")));
        }
        Ok(exec::map_indices(self.n * self.n, mode, |i| {
            let (x, y) = self.image(i);
            f(x, y) * dets[i]
        }))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DiscreteMap = serde_json::from_str(s).map_err(|e| Error::MalformedField(format!("map JSON: {e}")))?;
        Self::new(raw.n, raw.dx, raw.dy)
    }
}

fn catmull_rom(f: f64) -> [f64; 4] {
    let f2 = f * f;
    let f3 = f2 * f;
    [0.5 * (-f3 + 2.0 * f2 - f), 0.5 * (3.0 * f3 - 5.0 * f2 + 2.0), 0.5 * (-3.0 * f3 + 4.0 * f2 + f), 0.5 * (f3 - f2)]
}

/// `φ*Ω` sampled on the map grid and projected to `min(K, (N-1)/2)` modes.
/// Returns the form and the projection error.
pub fn pullback(omega: &TwoForm, phi: &DiscreteMap, mode: ExecMode) -> Result<(TwoForm, f64)> {
    let n = phi.resolution();
    let bw = omega.coef.bandwidth().min((n - 1) / 2);
    let density = omega.density();
    let samples = phi.pullback_samples(|x, y| density.eval(x, y), mode)?;
    let (coef, err) = SpectralField2D::project_samples(&samples, n, bw);
    Ok((TwoForm { coef }, err))
}
