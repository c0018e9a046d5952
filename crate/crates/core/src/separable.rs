//! Pointwise densities on the torus written as finite sums `Σ X_j(x)·Y_j(y)`.
//!
//! Band-limited two-forms convert exactly (one trigonometric x-factor per
//! x-frequency); desingularized and Laurent-type forms add tabulated
//! x-profiles. Every x-factor carries an antiderivative, which is what the
//! relative-primitive construction and the regional volumes consume.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::spectral::{cis_powers, SpectralField1D, SpectralField2D};

/// A 1-periodic function of x with known derivative.
pub trait XProfile: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
    /// Points of `[0,1)` where the profile is only finitely smooth.
    fn knots(&self) -> Vec<f64>;
    fn label(&self) -> String {
        "profile".into()
    }
}

const TABLE_CELLS: usize = 4096;

// 8-point Gauss–Legendre on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_27),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_361_96),
    (0.183_434_642_495_649_8, 0.362_683_783_378_361_96),
    (0.525_532_409_916_329, 0.313_706_645_877_887_27),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Gauss–Legendre integral of `f` over `[a, b]`.
pub(crate) fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    GL8.iter().map(|&(t, w)| w * f(m + r * t)).sum::<f64>() * r
}

/// Composite Gauss–Legendre with `panels` equal panels.
pub(crate) fn gauss_legendre_composite(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| gauss_legendre(a + i as f64 * h, a + (i + 1) as f64 * h, &f)).sum()
}

/// An x-profile with a precomputed antiderivative (quintic Hermite between
/// Gauss–Legendre-integrated nodes; knots are always nodes).
pub struct TabulatedProfile {
    inner: Arc<dyn XProfile>,
    nodes: Vec<f64>,
    ivals: Vec<f64>,
    /// Per cell: one-sided `X(x0+), X'(x0+), X(x1-), X'(x1-)`.
    ends: Vec<[f64; 4]>,
    period_integral: f64,
}

impl fmt::Debug for TabulatedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TabulatedProfile")
            .field("label", &self.inner.label())
            .field("nodes", &self.nodes.len())
            .field("period_integral", &self.period_integral)
            .finish()
    }
}

impl TabulatedProfile {
    pub fn new(inner: Arc<dyn XProfile>) -> Self {
        let mut nodes: Vec<f64> = (0..=TABLE_CELLS).map(|i| i as f64 / TABLE_CELLS as f64).collect();
        for k in inner.knots() {
            let k = k.rem_euclid(1.0);
            nodes.push(k);
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        let ends: Vec<[f64; 4]> = nodes
            .windows(2)
            .map(|w| {
                let nudge = 1e-13 * (w[1] - w[0]);
                let (a, b) = (w[0] + nudge, w[1] - nudge);
                [inner.value(a), inner.deriv(a), inner.value(b), inner.deriv(b)]
            })
            .collect();
        let mut ivals = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        ivals.push(0.0);
        for w in nodes.windows(2) {
            // integrate strictly inside the cell so one-sided limits are used at knots
            acc += gauss_legendre(w[0], w[1], |x| inner.value(x));
            ivals.push(acc);
        }
        Self { inner, nodes, ivals, ends, period_integral: acc }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.inner.value(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.inner.deriv(x)
    }

    pub fn period_integral(&self) -> f64 {
        self.period_integral
    }

    /// An antiderivative valid for any real `x` (consistent across periods).
    pub fn antideriv(&self, x: f64) -> f64 {
        let n = x.floor();
        let u = x - n;
        n * self.period_integral + self.interp(u)
    }

    fn interp(&self, u: f64) -> f64 {
        let j = self.nodes.partition_point(|&v| v <= u).clamp(1, self.nodes.len() - 1) - 1;
        let (x0, x1) = (self.nodes[j], self.nodes[j + 1]);
        let h = x1 - x0;
        let s = (u - x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h0 = 1.0 - h5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
        let h3 = 0.5 * s3 - s4 + 0.5 * s5;
        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let [f0, d0, f1, d1] = self.ends[j];
        self.ivals[j] * h0 + h * f0 * h1 + h * h * d0 * h2 + h * h * d1 * h3 + h * f1 * h4 + self.ivals[j + 1] * h5
    }
}

#[derive(Clone, Debug)]
pub enum XFactor {
    One,
    /// `cos(2πkx)`
    Cos(u32),
    /// `sin(2πkx)`
    Sin(u32),
    Profile(Arc<TabulatedProfile>),
}

impl XFactor {
    fn same_kind(&self, other: &XFactor) -> bool {
        match (self, other) {
            (XFactor::One, XFactor::One) => true,
            (XFactor::Cos(a), XFactor::Cos(b)) | (XFactor::Sin(a), XFactor::Sin(b)) => a == b,
            (XFactor::Profile(a), XFactor::Profile(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    pub fn antideriv(&self, x: f64) -> f64 {
        match self {
            XFactor::One => x,
            XFactor::Cos(k) => {
                let kappa = TAU * *k as f64;
                (kappa * x).sin() / kappa
            }
            XFactor::Sin(k) => {
                let kappa = TAU * *k as f64;
                -(kappa * x).cos() / kappa
            }
            XFactor::Profile(p) => p.antideriv(x),
        }
    }

    /// `∫_a^b X`, computed to avoid cancellation for trigonometric factors.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            XFactor::One => b - a,
            XFactor::Cos(k) => {
                // sin(κb) - sin(κa) = 2 cos(κ(a+b)/2) sin(κ(b-a)/2)
                let kappa = TAU * *k as f64;
                2.0 * (0.5 * kappa * (a + b)).cos() * (0.5 * kappa * (b - a)).sin() / kappa
            }
            XFactor::Sin(k) => {
                // cos(κa) - cos(κb) = 2 sin(κ(a+b)/2) sin(κ(b-a)/2)
                let kappa = TAU * *k as f64;
                2.0 * (0.5 * kappa * (a + b)).sin() * (0.5 * kappa * (b - a)).sin() / kappa
            }
            XFactor::Profile(p) => p.antideriv(b) - p.antideriv(a),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeparableTerm {
    pub x: XFactor,
    pub y: SpectralField1D,
}

/// `Σ X_j(x)·Y_j(y)`.
#[derive(Clone, Debug, Default)]
pub struct SeparableField {
    terms: Vec<SeparableTerm>,
    kx_max: usize,
    ky_max: usize,
}

impl SeparableField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: Vec<SeparableTerm>) -> Self {
        let mut f = Self::zero();
        for t in terms {
            f.push(t);
        }
        f
    }

    pub fn push(&mut self, term: SeparableTerm) {
        if term.y.is_zero() {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.x.same_kind(&term.x)) {
            t.y = t.y.add(&term.y);
        } else {
            self.terms.push(term);
        }
        self.refresh();
    }

    fn refresh(&mut self) {
        self.terms.retain(|t| !t.y.is_zero());
        self.kx_max = self
            .terms
            .iter()
            .map(|t| match t.x {
                XFactor::Cos(k) | XFactor::Sin(k) => k as usize,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        self.ky_max = self.terms.iter().map(|t| t.y.max_mode()).max().unwrap_or(0);
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_spectral(f: &SpectralField2D) -> Self {
        let bw = f.bandwidth();
        let mut rows: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); 2 * bw + 1]; bw + 1];
        rows[0][bw] = Complex64::new(f.mean_coeff(), 0.0);
        for &(kx, ky, c) in f.half_modes() {
            let r = &mut rows[kx as usize];
            r[(ky + bw as i32) as usize] = c;
            if kx == 0 {
                r[(-ky + bw as i32) as usize] = c.conj();
            }
        }
        let mut terms = Vec::new();
        for (kx, row) in rows.iter().enumerate() {
            let at = |k: isize| row[(k + bw as isize) as usize];
            if kx == 0 {
                let nonneg: Vec<Complex64> = (0..=bw as isize).map(at).collect();
                let y = SpectralField1D::from_nonnegative(bw, &nonneg).expect("hermitian");
                terms.push(SeparableTerm { x: XFactor::One, y });
                continue;
            }
            let re: Vec<Complex64> = (0..=bw as isize).map(|k| (at(k) + at(-k).conj()) * 0.5).collect();
            let im: Vec<Complex64> =
                (0..=bw as isize).map(|k| (at(k) - at(-k).conj()) / Complex64::new(0.0, 2.0)).collect();
            let mut re = re;
            let mut im = im;
            re[0].im = 0.0;
            im[0].im = 0.0;
            let yr = SpectralField1D::from_nonnegative(bw, &re).expect("hermitian").scale(2.0);
            let yi = SpectralField1D::from_nonnegative(bw, &im).expect("hermitian").scale(-2.0);
            terms.push(SeparableTerm { x: XFactor::Cos(kx as u32), y: yr });
            terms.push(SeparableTerm { x: XFactor::Sin(kx as u32), y: yi });
        }
        Self::from_terms(terms)
    }

    pub fn scale(&self, s: f64) -> Self {
        let terms = self.terms.iter().map(|t| SeparableTerm { x: t.x.clone(), y: t.y.scale(s) }).collect();
        Self::from_terms(terms)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(SeparableTerm { x: t.x.clone(), y: t.y.scale(s) });
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    #[inline]
    fn x_values(&self, x: f64, deriv: bool) -> impl Iterator<Item = f64> + '_ {
        let px = cis_powers(x, self.kx_max);
        self.terms.iter().map(move |t| match (&t.x, deriv) {
            (XFactor::One, false) => 1.0,
            (XFactor::One, true) => 0.0,
            (XFactor::Cos(k), false) => px[*k as usize].re,
            (XFactor::Sin(k), false) => px[*k as usize].im,
            (XFactor::Cos(k), true) => -TAU * *k as f64 * px[*k as usize].im,
            (XFactor::Sin(k), true) => TAU * *k as f64 * px[*k as usize].re,
            (XFactor::Profile(p), false) => p.value(x),
            (XFactor::Profile(p), true) => p.deriv(x),
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let py = cis_powers(y, self.ky_max);
        self.x_values(x, false).zip(&self.terms).map(|(xv, t)| xv * t.y.eval_with(&py)).sum()
    }

    /// `∂/∂x` at a point.
    pub fn eval_dx(&self, x: f64, y: f64) -> f64 {
        let py = cis_powers(y, self.ky_max);
        self.x_values(x, true).zip(&self.terms).map(|(xv, t)| xv * t.y.eval_with(&py)).sum()
    }

    /// Value and both partial derivatives in one pass.
    pub fn eval_grad(&self, x: f64, y: f64) -> [f64; 3] {
        let py = cis_powers(y, self.ky_max);
        let mut out = [0.0; 3];
        for ((xv, xd), t) in self.x_values(x, false).zip(self.x_values(x, true)).zip(&self.terms) {
            let yv = t.y.eval_with(&py);
            out[0] += xv * yv;
            out[1] += xd * yv;
            out[2] += xv * t.y.eval_deriv_with(&py);
        }
        out
    }

    /// `∫_{x_lo}^{x_hi} ∫_0^1 f dy dx` for any `x_lo ≤ x_hi` (unwrapped).
    pub fn integrate_strip(&self, x_lo: f64, x_hi: f64) -> f64 {
        self.terms.iter().map(|t| t.x.integral(x_lo, x_hi) * t.y.mean()).sum()
    }

    pub fn integrate_total(&self) -> f64 {
        self.integrate_strip(0.0, 1.0)
    }

    /// `x ↦ ∫_a^x f(s, ·) ds` as a 1D field in y, for fixed `a` and `x`.
    pub fn x_integral_profile(&self, a: f64, b: f64) -> SpectralField1D {
        let bw = self.terms.iter().map(|t| t.y.bandwidth()).max().unwrap_or(0);
        let mut acc = SpectralField1D::zeros(bw);
        for t in &self.terms {
            acc = acc.axpy(t.x.integral(a, b), &t.y);
        }
        acc
    }

    pub(crate) fn ky_max(&self) -> usize {
        self.ky_max
    }
}

impl From<&SpectralField2D> for SeparableField {
    fn from(f: &SpectralField2D) -> Self {
        Self::from_spectral(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct Bump;
    impl XProfile for Bump {
        fn value(&self, x: f64) -> f64 {
            let t = x.rem_euclid(1.0) - 0.5;
            if t.abs() < 0.25 {
                (0.25 * 0.25 - t * t).powi(3)
            } else {
                0.0
            }
        }
        fn deriv(&self, x: f64) -> f64 {
            let t = x.rem_euclid(1.0) - 0.5;
            if t.abs() < 0.25 {
                -6.0 * t * (0.25 * 0.25 - t * t).powi(2)
            } else {
                0.0
            }
        }
        fn knots(&self) -> Vec<f64> {
            vec![0.25, 0.75]
        }
    }

    #[test]
    fn spectral_conversion_is_exact() {
        let bw = 6;
        let f = SpectralField2D::sin(bw, 1, 0, 1.0)
            .multiply(&SpectralField2D::constant(bw, 1.0).add(&SpectralField2D::cos(bw, 0, 1, 0.3)))
            .add(&SpectralField2D::cos(bw, 2, -3, 0.4))
            .add(&SpectralField2D::sin(bw, 0, 2, 0.1))
            .add(&SpectralField2D::constant(bw, 0.25));
        let s = SeparableField::from_spectral(&f);
        for &(x, y) in &[(0.1, 0.2), (0.77, 0.31), (0.5, 0.9)] {
            assert!((s.eval(x, y) - f.eval(x, y)).abs() < 1e-14);
            let fx = f.differentiate(crate::spectral::Axis::X);
            assert!((s.eval_dx(x, y) - fx.eval(x, y)).abs() < 1e-12);
            let fy = f.differentiate(crate::spectral::Axis::Y);
            let g = s.eval_grad(x, y);
            assert!((g[0] - f.eval(x, y)).abs() < 1e-14);
            assert!((g[1] - fx.eval(x, y)).abs() < 1e-12);
            assert!((g[2] - fy.eval(x, y)).abs() < 1e-12);
        }
        assert!((s.integrate_strip(0.1, 0.6) - f.integrate_strip(0.1, 0.6)).abs() < 1e-15);
    }

    #[test]
    fn tabulated_antiderivative() {
        let p = TabulatedProfile::new(Arc::new(Bump));
        // ∫ (a²-t²)³ over |t|<a = 32 a⁷/35
        let a: f64 = 0.25;
        let exact = 32.0 * a.powi(7) / 35.0;
        assert!((p.period_integral() - exact).abs() < 1e-16);
        let mid = p.antideriv(0.5) - p.antideriv(0.0);
        assert!((mid - exact / 2.0).abs() < 1e-16);
        assert!((p.antideriv(1.5) - p.antideriv(0.5) - exact).abs() < 1e-16);
        // interior point against composite quadrature
        let q = gauss_legendre_composite(0.25, 0.61, 64, |x| Bump.value(x));
        assert!((p.antideriv(0.61) - p.antideriv(0.25) - q).abs() < 1e-15);
    }
}
