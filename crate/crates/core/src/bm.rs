//! Critical sets, folded volume forms and b^m-Nambu forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::TwoForm;
use crate::numerics::{divide_by_t, fit_vanishing_order, smooth_transition, wrapped_offset};
use crate::separable::SeparableField;
use crate::spectral::{SpectralField1D, SpectralField2D};

pub const DEFAULT_THETA: f64 = 1e-3;
pub const DEFAULT_TOL_ZERO: f64 = 1e-10;
/// Agreement required between the collar remainder and the smooth part.
pub const PRESENTATION_TOL: f64 = 1e-10;

/// Union of circles `{x = c_i}` with coorientations and a collar width.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalSet {
    circles: Vec<f64>,
    coorientations: Vec<i8>,
    collar_width: f64,
}

impl CriticalSet {
    pub fn new(circles: Vec<f64>, coorientations: Vec<i8>, collar_width: f64) -> Result<Self> {
        if circles.len() != coorientations.len() {
            return Err(Error::InvalidInput(format!(
                "{} circles but {} coorientations",
                circles.len(),
                coorientations.len()
            )));
        }
        if coorientations.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidInput("coorientations must be +1 or -1".into()));
        }
        if !(collar_width > 0.0 && collar_width.is_finite()) {
            return Err(Error::InvalidInput(format!("collar width {collar_width} must be positive")));
        }
        let mut pairs: Vec<(f64, i8)> = circles.into_iter().zip(coorientations).collect();
        if pairs.iter().any(|(c, _)| !(0.0..1.0).contains(c)) {
            return Err(Error::InvalidInput("circle positions must lie in [0, 1)".into()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let r = pairs.len();
        for i in 0..r {
            let gap = if r == 1 { 1.0 } else { gap(pairs[i].0, pairs[(i + 1) % r].0) };
            if gap <= 2.0 * collar_width {
                return Err(Error::InvalidInput(format!("collars of width {collar_width} overlap (gap {gap})")));
            }
        }
        Ok(Self {
            circles: pairs.iter().map(|p| p.0).collect(),
            coorientations: pairs.iter().map(|p| p.1).collect(),
            collar_width,
        })
    }

    /// Collar width set to half the smallest reach (a quarter of the
    /// smallest gap), capped at 1/8.
    pub fn with_default_collar(circles: Vec<f64>, coorientations: Vec<i8>) -> Result<Self> {
        let mut sorted = circles.clone();
        sorted.sort_by(f64::total_cmp);
        let r = sorted.len();
        let mut min_gap: f64 = 1.0;
        for i in 0..r {
            if r > 1 {
                min_gap = min_gap.min(gap(sorted[i], sorted[(i + 1) % r]));
            }
        }
        Self::new(circles, coorientations, (0.25 * min_gap).min(0.125))
    }

    pub fn empty() -> Self {
        Self { circles: Vec::new(), coorientations: Vec::new(), collar_width: 0.125 }
    }

    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    pub fn circles(&self) -> &[f64] {
        &self.circles
    }

    pub fn coorientations(&self) -> &[i8] {
        &self.coorientations
    }

    pub fn collar_width(&self) -> f64 {
        self.collar_width
    }

    pub fn position(&self, i: usize) -> f64 {
        self.circles[i]
    }

    pub fn with_coorientations(&self, coorientations: Vec<i8>) -> Result<Self> {
        Self::new(self.circles.clone(), coorientations, self.collar_width)
    }

    /// Same circles and collar width (coorientations may differ).
    pub fn same_geometry(&self, other: &Self) -> bool {
        self.circles == other.circles && self.collar_width == other.collar_width
    }

    /// Half the distance to the nearest other circle (1/2 for a lone circle).
    pub fn reach(&self, i: usize) -> f64 {
        let r = self.len();
        if r <= 1 {
            return 0.5;
        }
        let c = self.circles[i];
        let left = gap(self.circles[(i + r - 1) % r], c);
        let right = gap(c, self.circles[(i + 1) % r]);
        0.5 * left.min(right)
    }

    /// Nearest circle and the wrapped offset `x - c` in `[-1/2, 1/2)`.
    pub fn nearest(&self, x: f64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, &c) in self.circles.iter().enumerate() {
            let t = wrapped_offset(x, c);
            if t.abs() < best.1.abs() {
                best = (i, t);
            }
        }
        best
    }

    /// Number of connected components of the complement.
    pub fn region_count(&self) -> usize {
        self.len().max(1)
    }

    /// Region `j` as the unwrapped interval `[c_j, c_{j+1}]`; the last region
    /// wraps through `x = 1`. Without circles the single region is `[0, 1]`.
    pub fn region(&self, j: usize) -> (f64, f64) {
        let r = self.len();
        if r == 0 {
            return (0.0, 1.0);
        }
        let lo = self.circles[j];
        let hi = if j + 1 < r { self.circles[j + 1] } else { self.circles[0] + 1.0 };
        (lo, hi)
    }

    /// Region containing `x` and the unwrapped abscissa in `[c_j, c_{j+1})`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let r = self.len();
        let xm = x.rem_euclid(1.0);
        if r == 0 {
            return (0, xm);
        }
        match self.circles.iter().rposition(|&c| c <= xm) {
            Some(j) => (j, xm),
            None => (r - 1, xm + 1.0),
        }
    }

    pub fn collar(&self, i: usize) -> CollarSpec {
        CollarSpec { index: i, center: self.circles[i], width: self.collar_width }
    }

    /// Partition function of circle `i` in the offset `t`: identically 1 on
    /// the collar, a smooth ramp down to 0 at the reach. Returns value and
    /// derivative in `t`.
    pub fn partition(&self, i: usize, t: f64) -> (f64, f64) {
        let inner = self.collar_width;
        let outer = self.reach(i);
        let a = t.abs();
        if a <= inner {
            return (1.0, 0.0);
        }
        if a >= outer {
            return (0.0, 0.0);
        }
        let u = (a - inner) / (outer - inner);
        let (s, ds) = smooth_transition(1.0 - u);
        (s, -ds * t.signum() / (outer - inner))
    }

    /// Fits the vanishing order of a magnitude `f` at every circle, using
    /// offsets in `[1e-4, 1e-2]` and the sup over both sides and 32 rows.
    pub fn fit_orders(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let ny = 32;
        self.circles
            .iter()
            .map(|&c| {
                fit_vanishing_order(1e-4, 1e-2, 8, |t| {
                    let mut m: f64 = 0.0;
                    for j in 0..ny {
                        let y = (j as f64 + 0.25) / ny as f64;
                        m = m.max(f(c + t, y).abs()).max(f(c - t, y).abs());
                    }
                    m
                })
            })
            .collect()
    }
}

fn gap(a: f64, b: f64) -> f64 {
    (b - a).rem_euclid(1.0)
}

/// Tubular neighborhood of one circle with defining function `t = x - c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollarSpec {
    pub index: usize,
    pub center: f64,
    pub width: f64,
}

impl CollarSpec {
    pub fn new(index: usize, center: f64, width: f64) -> Self {
        Self { index, center, width }
    }

    pub fn t(&self, x: f64) -> f64 {
        wrapped_offset(x, self.center)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.t(x).abs() <= self.width
    }

    pub fn project(&self, _x: f64, y: f64) -> (f64, f64) {
        (self.center, y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldCertificate {
    pub max_abs_on_z: f64,
    pub min_normal_slope: f64,
    pub theta: f64,
    pub tol_zero: f64,
    pub samples_per_circle: usize,
}

/// Density `w` of `w dx∧dy`, certified to vanish transversally on its
/// critical set and nowhere else.
#[derive(Clone, Debug)]
pub struct FoldedVolumeForm {
    density: SeparableField,
    critical: CriticalSet,
    certificate: FoldCertificate,
    spectral: Option<TwoForm>,
}

impl FoldedVolumeForm {
    pub fn density(&self) -> &SeparableField {
        &self.density
    }

    pub fn critical(&self) -> &CriticalSet {
        &self.critical
    }

    pub fn certificate(&self) -> &FoldCertificate {
        &self.certificate
    }

    /// Band-limited form when the density came from one.
    pub fn spectral(&self) -> Option<&TwoForm> {
        self.spectral.as_ref()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.density.eval(x, y)
    }
}

fn circle_samples(density: &SeparableField) -> usize {
    let bw = density.terms().iter().map(|t| t.y.bandwidth()).max().unwrap_or(0);
    (4 * bw).max(256)
}

pub fn certify_folded(omega: &TwoForm, z: &CriticalSet, theta: f64, tol_zero: f64) -> Result<FoldedVolumeForm> {
    let mut f = certify_density(omega.density(), z, theta, tol_zero)?;
    f.spectral = Some(omega.clone());
    Ok(f)
}

pub fn certify_density(
    density: SeparableField,
    z: &CriticalSet,
    theta: f64,
    tol_zero: f64,
) -> Result<FoldedVolumeForm> {
    certify_impl(density, z.clone(), theta, tol_zero, false)
}

/// Certifies and takes the coorientations from the measured slopes.
pub fn certify_density_inferred(
    density: SeparableField,
    z: &CriticalSet,
    theta: f64,
    tol_zero: f64,
) -> Result<FoldedVolumeForm> {
    certify_impl(density, z.clone(), theta, tol_zero, true)
}

fn certify_impl(
    density: SeparableField,
    mut z: CriticalSet,
    theta: f64,
    tol_zero: f64,
    infer: bool,
) -> Result<FoldedVolumeForm> {
    let n = circle_samples(&density);
    let mut max_abs: f64 = 0.0;
    let mut min_slope = f64::INFINITY;
    for i in 0..z.len() {
        let c = z.circles[i];
        let mut sign = 0.0;
        for j in 0..n {
            let y = j as f64 / n as f64;
            let v = density.eval(c, y);
            max_abs = max_abs.max(v.abs());
            if v.abs() > tol_zero {
                return Err(Error::NotFolded(format!("coefficient {v:e} on circle x={c} at y={y}")));
            }
            let s = density.eval_dx(c, y);
            min_slope = min_slope.min(s.abs());
            if s.abs() < theta {
                return Err(Error::Transversality(format!(
                    "normal derivative {s:e} below {theta:e} on circle x={c} at y={y}"
                )));
            }
            if sign == 0.0 {
                sign = s.signum();
            } else if s.signum() != sign {
                return Err(Error::Transversality(format!("normal derivative changes sign along circle x={c}")));
            }
        }
        if infer {
            z.coorientations[i] = sign as i8;
        } else if sign as i8 != z.coorientations[i] {
            return Err(Error::NotFolded(format!(
                "measured coorientation {sign} differs from declared {} at x={c}",
                z.coorientations[i]
            )));
        }
    }
    sign_scan(&density, &z)?;
    if z.is_empty() {
        min_slope = f64::NAN;
    }
    Ok(FoldedVolumeForm {
        density,
        certificate: FoldCertificate {
            max_abs_on_z: max_abs,
            min_normal_slope: min_slope,
            theta,
            tol_zero,
            samples_per_circle: n,
        },
        critical: z,
        spectral: None,
    })
}

/// The coefficient must keep the sign `s_j` throughout region `j`.
fn sign_scan(density: &SeparableField, z: &CriticalSet) -> Result<()> {
    let (nx, ny) = (256, 128);
    for j in 0..z.region_count() {
        let (lo, hi) = z.region(j);
        let expected = if z.is_empty() { 0.0 } else { z.coorientations[j] as f64 };
        let mut first = 0.0;
        for ix in 0..nx {
            let x = lo + (hi - lo) * (ix as f64 + 0.5) / nx as f64;
            for iy in 0..ny {
                let y = (iy as f64 + 0.5) / ny as f64;
                let v = density.eval(x, y);
                let want = if expected != 0.0 {
                    expected
                } else {
                    if first == 0.0 {
                        first = v.signum();
                    }
                    first
                };
                if !(v * want > 0.0) {
                    return Err(Error::NotFolded(format!(
                        "coefficient {v:e} at ({:.4}, {y:.4}) vanishes or has the wrong sign off the declared circles",
                        x.rem_euclid(1.0)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Smooth factor `μ = w/t` of a folded density on a collar.
#[derive(Clone, Debug)]
pub struct CollarFactor {
    density: SeparableField,
    collar: CollarSpec,
    min_abs: f64,
}

impl CollarFactor {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_offset(self.collar.t(x), y)
    }

    /// `μ` at the unwrapped offset `t` from the circle.
    pub fn eval_offset(&self, t: f64, y: f64) -> f64 {
        let c = self.collar.center;
        divide_by_t(t, |tau| self.density.eval(c + tau, y))
    }

    pub fn min_abs(&self) -> f64 {
        self.min_abs
    }

    pub fn collar(&self) -> &CollarSpec {
        &self.collar
    }
}

pub fn factor_defining(omega: &FoldedVolumeForm, collar: &CollarSpec) -> Result<CollarFactor> {
    let mut f = CollarFactor { density: omega.density.clone(), collar: *collar, min_abs: f64::INFINITY };
    let (nt, ny) = (129, 64);
    let mut sign = 0.0;
    for it in 0..nt {
        let t = collar.width * (2.0 * it as f64 / (nt - 1) as f64 - 1.0);
        for iy in 0..ny {
            let y = iy as f64 / ny as f64;
            let mu = f.eval_offset(t, y);
            if sign == 0.0 {
                sign = mu.signum();
            }
            if !(mu * sign > 0.0) {
                return Err(Error::CollarTooWide(format!(
                    "smooth factor {mu:e} at offset {t:.4} changes sign within the collar of x={}",
                    collar.center
                )));
            }
            f.min_abs = f.min_abs.min(mu.abs());
        }
    }
    Ok(f)
}

/// Point `s` of the segment `(1-s)Ω0 + sΩ1`; certification is checked at
/// the quarter points and at `s`.
pub fn convex_path(omega0: &FoldedVolumeForm, omega1: &FoldedVolumeForm, s: f64) -> Result<FoldedVolumeForm> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidInput(format!("path parameter {s} outside [0, 1]")));
    }
    if !omega0.critical.same_geometry(&omega1.critical) {
        return Err(Error::Incomparable("forms have different critical sets".into()));
    }
    if omega0.critical.coorientations != omega1.critical.coorientations {
        return Err(Error::PathDegeneracy("coorientations differ; the convex path degenerates".into()));
    }
    if s == 0.0 {
        return Ok(omega0.clone());
    }
    if s == 1.0 {
        return Ok(omega1.clone());
    }
    let theta = omega0.certificate.theta.min(omega1.certificate.theta);
    let tol = omega0.certificate.tol_zero.max(omega1.certificate.tol_zero);
    let at = |s: f64| -> Result<FoldedVolumeForm> {
        let d = omega0.density.scale(1.0 - s).add(&omega1.density.scale(s));
        let mut f = certify_density(d, &omega0.critical, theta, tol)
            .map_err(|e| Error::PathDegeneracy(format!("path fails certification at s={s}: {e}")))?;
        if let (Some(a), Some(b)) = (&omega0.spectral, &omega1.spectral) {
            f.spectral = Some(a.scale(1.0 - s).add(&b.scale(s)));
        }
        Ok(f)
    };
    for q in [0.25, 0.5, 0.75] {
        if q != s {
            at(q)?;
        }
    }
    at(s)
}

/// Top-degree b^m form: near circle `c` it reads
/// `(Σ_i α̂_i(y) t^i) / t^m dx∧dy + β`, blended by the partition functions
/// of the critical set, plus a global smooth part.
#[derive(Clone, Debug)]
pub struct BmNambuForm {
    m: usize,
    critical: CriticalSet,
    laurent: Vec<Vec<SpectralField1D>>,
    smooth: TwoForm,
    collar_remainder: Option<TwoForm>,
}

/// `1/t^m`; shared by the singular and desingularized evaluators so both
/// produce identical values where they agree.
#[inline]
pub(crate) fn singular_factor(t: f64, m: usize) -> f64 {
    1.0 / t.powi(m as i32)
}

impl BmNambuForm {
    pub fn new(
        m: usize,
        critical: CriticalSet,
        laurent: Vec<Vec<SpectralField1D>>,
        smooth: TwoForm,
        collar_remainder: Option<TwoForm>,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("order m must be positive".into()));
        }
        if laurent.len() != critical.len() {
            return Err(Error::MalformedField(format!(
                "{} Laurent blocks for {} circles",
                laurent.len(),
                critical.len()
            )));
        }
        if let Some(i) = laurent.iter().position(|l| l.len() != m) {
            return Err(Error::MalformedField(format!(
                "circle {i} has {} Laurent coefficients, expected {m}",
                laurent[i].len()
            )));
        }
        let form = Self { m, critical, laurent, smooth, collar_remainder };
        let gap = form.presentation_gap();
        if gap > PRESENTATION_TOL {
            return Err(Error::MalformedField(format!(
                "collar remainder and smooth part disagree by {gap:e} on the collars"
            )));
        }
        Ok(form)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn critical(&self) -> &CriticalSet {
        &self.critical
    }

    pub fn laurent(&self, circle: usize) -> &[SpectralField1D] {
        &self.laurent[circle]
    }

    pub fn smooth(&self) -> &TwoForm {
        &self.smooth
    }

    pub fn collar_remainder(&self) -> Option<&TwoForm> {
        self.collar_remainder.as_ref()
    }

    pub fn is_smooth_only(&self) -> bool {
        self.laurent.iter().flatten().all(|a| a.is_zero())
    }

    /// Largest difference between the two presentations on the collars.
    pub fn presentation_gap(&self) -> f64 {
        let Some(beta) = &self.collar_remainder else { return 0.0 };
        let mut gap: f64 = 0.0;
        for &c in &self.critical.circles {
            for it in 0..9 {
                let t = self.critical.collar_width * (it as f64 / 4.0 - 1.0);
                for iy in 0..64 {
                    let y = iy as f64 / 64.0;
                    gap = gap.max((beta.eval(c + t, y) - self.smooth.eval(c + t, y)).abs());
                }
            }
        }
        gap
    }

    /// Singular part `ρ_c(t)·Σ α̂_i(y) t^i / t^m` summed over circles.
    pub fn singular_part(&self, x: f64, y: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (i, &c) in self.critical.circles.iter().enumerate() {
            let t = wrapped_offset(x, c);
            let (rho, _) = self.critical.partition(i, t);
            if rho == 0.0 {
                continue;
            }
            let poly = self.laurent_poly(i, t, y);
            if poly == 0.0 {
                continue;
            }
            if t == 0.0 {
                return Err(Error::SingularPoint(format!("form is singular on the circle x={c}")));
            }
            acc += rho * poly * singular_factor(t, self.m);
        }
        Ok(acc)
    }

    /// `Σ_i α̂_i(y) t^i` for circle `i`.
    pub(crate) fn laurent_poly(&self, circle: usize, t: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for a in self.laurent[circle].iter().rev() {
            acc = acc * t + a.eval(y);
        }
        acc
    }

    /// Pointwise value away from the critical set.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.singular_part(x, y)? + self.smooth.eval(x, y))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m: self.m,
            critical: self.critical.clone(),
            laurent: self.laurent.iter().map(|l| l.iter().map(|a| a.scale(s)).collect()).collect(),
            smooth: self.smooth.scale(s),
            collar_remainder: self.collar_remainder.as_ref().map(|b| b.scale(s)),
        }
    }

    /// Componentwise sum; requires the same order and critical set.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.m != other.m || !self.critical.same_geometry(&other.critical) {
            return Err(Error::Incomparable("sum of forms with different structure".into()));
        }
        let laurent = self
            .laurent
            .iter()
            .zip(&other.laurent)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p.add(q)).collect())
            .collect();
        let remainder = match (&self.collar_remainder, &other.collar_remainder) {
            (Some(a), Some(b)) => Some(a.add(b)),
            _ => None,
        };
        Self::new(self.m, self.critical.clone(), laurent, self.smooth.add(&other.smooth), remainder)
    }
}

/// Convenience constructor for a density with one circle block per entry.
pub fn bm_from_parts(
    m: usize,
    critical: CriticalSet,
    laurent: Vec<Vec<SpectralField1D>>,
    smooth: SpectralField2D,
) -> Result<BmNambuForm> {
    BmNambuForm::new(m, critical, laurent, TwoForm::new(smooth), None)
}
