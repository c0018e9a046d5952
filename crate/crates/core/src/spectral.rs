//! Periodic scalar fields on the circle and the flat torus stored as truncated
//! Fourier coefficient tables.
//!
//! All periods are 1. A field of bandwidth `K` holds the modes `-K..=K` per
//! axis and represents `f(p) = Σ c(k) exp(2πi k·p)`. Real-valued fields carry
//! Hermitian-symmetric tables, which every constructor checks or enforces.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub const DEFAULT_BANDWIDTH: usize = 64;
const SYMMETRY_TOL: f64 = 1e-12;
/// Above this many mode pairs the product switches from direct convolution to
/// the padded-grid transform.
const DIRECT_PRODUCT_LIMIT: usize = 250_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

pub(crate) type Powers = SmallVec<[Complex64; 24]>;

/// `z^0, z^1, ..., z^kmax` for `z = exp(2πi t)`.
#[inline]
pub(crate) fn cis_powers(t: f64, kmax: usize) -> Powers {
    let mut out = Powers::with_capacity(kmax + 1);
    out.push(Complex64::new(1.0, 0.0));
    if kmax == 0 {
        return out;
    }
    let (s, c) = (TAU * t).sin_cos();
    let z = Complex64::new(c, s);
    let mut p = z;
    out.push(p);
    for k in 2..=kmax {
        // re-anchor every 16 steps to keep the recurrence error flat
        p = if k % 16 == 0 {
            let (s, c) = (TAU * t * k as f64).sin_cos();
            Complex64::new(c, s)
        } else {
            p * z
        };
        out.push(p);
    }
    out
}

#[inline]
fn times_i_kappa(c: Complex64, kappa: f64) -> Complex64 {
    Complex64::new(-c.im * kappa, c.re * kappa)
}

// ---------------------------------------------------------------------------
// One dimension
// ---------------------------------------------------------------------------

/// Real periodic field on S¹ = R/Z. Only the non-negative modes are stored;
/// `c(-k) = conj(c(k))` and `c(0)` is real.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField1D {
    bandwidth: usize,
    coeffs: Vec<Complex64>,
    kmax: usize,
}

impl SpectralField1D {
    pub fn zeros(bandwidth: usize) -> Self {
        Self { bandwidth, coeffs: vec![Complex64::new(0.0, 0.0); bandwidth + 1], kmax: 0 }
    }

    pub fn constant(bandwidth: usize, value: f64) -> Self {
        let mut f = Self::zeros(bandwidth);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// `amp · cos(2πky)`.
    pub fn cos(bandwidth: usize, k: usize, amp: f64) -> Self {
        let mut f = Self::zeros(bandwidth.max(k));
        if k == 0 {
            f.coeffs[0] = Complex64::new(amp, 0.0);
        } else {
            f.coeffs[k] = Complex64::new(0.5 * amp, 0.0);
        }
        f.refresh();
        f
    }

    /// `amp · sin(2πky)`.
    pub fn sin(bandwidth: usize, k: usize, amp: f64) -> Self {
        let mut f = Self::zeros(bandwidth.max(k));
        if k > 0 {
            f.coeffs[k] = Complex64::new(0.0, -0.5 * amp);
        }
        f.refresh();
        f
    }

    /// Builds from non-negative modes; `coeffs[0]` must be real.
    pub fn from_nonnegative(bandwidth: usize, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() > bandwidth + 1 {
            return Err(Error::MalformedField(format!("{} coefficients exceed bandwidth {bandwidth}", coeffs.len())));
        }
        if let Some(c0) = coeffs.first() {
            if c0.im.abs() > SYMMETRY_TOL {
                return Err(Error::MalformedField(format!("mean coefficient has imaginary part {}", c0.im)));
            }
        }
        let mut f = Self::zeros(bandwidth);
        for (k, c) in coeffs.iter().enumerate() {
            f.coeffs[k] = if k == 0 { Complex64::new(c.re, 0.0) } else { *c };
        }
        f.refresh();
        Ok(f)
    }

    /// Builds from a full table indexed `-K..=K`, symmetrizing and returning
    /// the size of the correction.
    pub fn from_full_symmetrized(bandwidth: usize, full: &[Complex64]) -> Result<(Self, f64)> {
        let k = bandwidth as isize;
        if full.len() != 2 * bandwidth + 1 {
            return Err(Error::MalformedField("table length must be 2K+1".into()));
        }
        let at = |j: isize| full[(j + k) as usize];
        let mut f = Self::zeros(bandwidth);
        let mut corr: f64 = 0.0;
        for j in 0..=k {
            let a = at(j);
            let b = at(-j).conj();
            corr = corr.max((a - b).norm() * 0.5);
            f.coeffs[j as usize] = if j == 0 { Complex64::new(a.re, 0.0) } else { (a + b) * 0.5 };
        }
        f.refresh();
        Ok((f, corr))
    }

    fn refresh(&mut self) {
        self.kmax = self.coeffs.iter().rposition(|c| c.norm_sqr() != 0.0).unwrap_or(0);
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Highest mode with a nonzero coefficient.
    pub fn max_mode(&self) -> usize {
        self.kmax
    }

    pub fn coeff(&self, k: isize) -> Complex64 {
        let a = k.unsigned_abs();
        if a > self.bandwidth {
            return Complex64::new(0.0, 0.0);
        }
        if k >= 0 {
            self.coeffs[a]
        } else {
            self.coeffs[a].conj()
        }
    }

    pub fn nonnegative_coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let p = cis_powers(y, self.kmax);
        self.eval_with(&p)
    }

    /// Evaluates using a precomputed power table of length `> max_mode()`.
    #[inline]
    pub(crate) fn eval_with(&self, powers: &[Complex64]) -> f64 {
        let n = self.kmax + 1;
        let acc: f64 = self.coeffs[1..n].iter().zip(&powers[1..n]).map(|(c, z)| c.re * z.re - c.im * z.im).sum();
        self.coeffs[0].re + 2.0 * acc
    }

    /// `f'(y)` from the same power table as [`Self::eval_with`].
    #[inline]
    pub(crate) fn eval_deriv_with(&self, powers: &[Complex64]) -> f64 {
        let n = self.kmax + 1;
        let acc: f64 = (1..n)
            .zip(self.coeffs[1..n].iter().zip(&powers[1..n]))
            .map(|(k, (c, z))| k as f64 * (c.re * z.im + c.im * z.re))
            .sum();
        -2.0 * TAU * acc
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        for (k, c) in out.coeffs.iter_mut().enumerate() {
            *c = times_i_kappa(*c, TAU * k as f64);
        }
        out.refresh();
        out
    }

    /// `H(y) = ∫_0^y f`, periodic because the mean must vanish (within `tol`,
    /// the mean is otherwise dropped).
    pub fn antiderivative(&self, tol: f64) -> Result<Self> {
        if self.mean().abs() > tol {
            return Err(Error::InternalConsistency(format!(
                "antiderivative of a field with mean {:e} is not periodic",
                self.mean()
            )));
        }
        let mut out = Self::zeros(self.bandwidth);
        let mut c0 = Complex64::new(0.0, 0.0);
        for k in 1..=self.kmax {
            let kappa = TAU * k as f64;
            // c / (iκ) = -i c / κ
            let c = self.coeffs[k];
            let a = Complex64::new(c.im / kappa, -c.re / kappa);
            out.coeffs[k] = a;
            // H(0) = 0: constant = -Σ_{k≠0} a_k = -2 Re Σ_{k>0} a_k
            c0 -= Complex64::new(2.0 * a.re, 0.0);
        }
        out.coeffs[0] = c0;
        out.refresh();
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out.refresh();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let bw = self.bandwidth.max(other.bandwidth);
        let mut out = Self::zeros(bw);
        for k in 0..=bw {
            out.coeffs[k] = self.coeff(k as isize) + other.coeff(k as isize) * s;
        }
        out.refresh();
        out
    }

    /// Max of |f| over `n` uniform samples.
    pub fn sup_sampled(&self, n: usize) -> f64 {
        (0..n).map(|i| self.eval(i as f64 / n as f64).abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Field1DJson {
        let mut coeffs = Vec::new();
        for k in -(self.kmax as isize)..=(self.kmax as isize) {
            let c = self.coeff(k);
            if c.norm_sqr() != 0.0 {
                coeffs.push([k as f64, c.re, c.im]);
            }
        }
        Field1DJson { bandwidth: self.bandwidth, coeffs }
    }

    pub fn from_json(j: &Field1DJson) -> Result<(Self, f64)> {
        let bw = j.bandwidth;
        let mut full = vec![Complex64::new(0.0, 0.0); 2 * bw + 1];
        for e in &j.coeffs {
            let k = integral_index(e[0], bw)?;
            full[(k + bw as isize) as usize] += Complex64::new(e[1], e[2]);
        }
        Self::from_full_symmetrized(bw, &full)
    }
}

fn integral_index(v: f64, bw: usize) -> Result<isize> {
    if v.fract() != 0.0 || v.abs() > bw as f64 {
        return Err(Error::MalformedField(format!("mode index {v} outside -{bw}..={bw}")));
    }
    Ok(v as isize)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Field1DJson {
    #[serde(rename = "K")]
    pub bandwidth: usize,
    /// `[k, re, im]` entries, zeros omitted.
    pub coeffs: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Field2DJson {
    #[serde(rename = "K")]
    pub bandwidth: usize,
    /// `[kx, ky, re, im]` entries, zeros omitted.
    pub coeffs: Vec<[f64; 4]>,
}

// ---------------------------------------------------------------------------
// Two dimensions
// ---------------------------------------------------------------------------

/// Real periodic field on the unit torus.
#[derive(Clone, Debug)]
pub struct SpectralField2D {
    bandwidth: usize,
    table: Vec<Complex64>,
    /// Nonzero modes in the half plane `kx > 0 || (kx == 0 && ky > 0)`.
    half: Arc<Vec<(i32, i32, Complex64)>>,
    kx_max: usize,
    ky_max: usize,
}

impl PartialEq for SpectralField2D {
    fn eq(&self, other: &Self) -> bool {
        self.bandwidth == other.bandwidth && self.table == other.table
    }
}

impl SpectralField2D {
    pub fn zeros(bandwidth: usize) -> Self {
        let n = 2 * bandwidth + 1;
        let mut f = Self {
            bandwidth,
            table: vec![Complex64::new(0.0, 0.0); n * n],
            half: Arc::new(Vec::new()),
            kx_max: 0,
            ky_max: 0,
        };
        f.refresh();
        f
    }

    pub fn constant(bandwidth: usize, value: f64) -> Self {
        let mut f = Self::zeros(bandwidth);
        let i = f.index(0, 0);
        f.table[i] = Complex64::new(value, 0.0);
        f.refresh();
        f
    }

    /// `amp · cos(2π(kx·x + ky·y))`.
    pub fn cos(bandwidth: usize, kx: i32, ky: i32, amp: f64) -> Self {
        if kx == 0 && ky == 0 {
            return Self::constant(bandwidth, amp);
        }
        Self::from_modes(bandwidth, &[(kx, ky, Complex64::new(0.5 * amp, 0.0))]).expect("single mode within bandwidth")
    }

    /// `amp · sin(2π(kx·x + ky·y))`.
    pub fn sin(bandwidth: usize, kx: i32, ky: i32, amp: f64) -> Self {
        if kx == 0 && ky == 0 {
            return Self::zeros(bandwidth);
        }
        Self::from_modes(bandwidth, &[(kx, ky, Complex64::new(0.0, -0.5 * amp))]).expect("single mode within bandwidth")
    }

    /// Adds `c·e_k + conj(c)·e_{-k}` for every listed mode (the `(0,0)` entry
    /// contributes its real part once).
    pub fn from_modes(bandwidth: usize, modes: &[(i32, i32, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(bandwidth);
        for &(kx, ky, c) in modes {
            if kx.unsigned_abs() as usize > bandwidth || ky.unsigned_abs() as usize > bandwidth {
                return Err(Error::MalformedField(format!("mode ({kx},{ky}) outside bandwidth {bandwidth}")));
            }
            if kx == 0 && ky == 0 {
                let i = f.index(0, 0);
                f.table[i] += Complex64::new(c.re, 0.0);
            } else {
                let i = f.index(kx, ky);
                f.table[i] += c;
                let j = f.index(-kx, -ky);
                f.table[j] += c.conj();
            }
        }
        f.refresh();
        Ok(f)
    }

    /// Builds from a full `(2K+1)²` table (row index `ky`, column `kx`), rejecting
    /// asymmetric input.
    pub fn from_table(bandwidth: usize, table: Vec<Complex64>) -> Result<Self> {
        let n = 2 * bandwidth + 1;
        if table.len() != n * n {
            return Err(Error::MalformedField("table size must be (2K+1)^2".into()));
        }
        let mut f = Self { bandwidth, table, half: Arc::new(Vec::new()), kx_max: 0, ky_max: 0 };
        let asym = f.symmetry_defect();
        if asym > SYMMETRY_TOL {
            return Err(Error::MalformedField(format!("Hermitian symmetry violated by {asym:e}")));
        }
        f.symmetrize_in_place();
        f.refresh();
        Ok(f)
    }

    /// Builds from a possibly asymmetric table by averaging with the conjugate
    /// reflection; returns the correction norm.
    pub fn from_table_symmetrized(bandwidth: usize, table: Vec<Complex64>) -> Result<(Self, f64)> {
        let n = 2 * bandwidth + 1;
        if table.len() != n * n {
            return Err(Error::MalformedField("table size must be (2K+1)^2".into()));
        }
        let mut f = Self { bandwidth, table, half: Arc::new(Vec::new()), kx_max: 0, ky_max: 0 };
        let corr = f.symmetry_defect() * 0.5;
        f.symmetrize_in_place();
        f.refresh();
        Ok((f, corr))
    }

    #[inline]
    fn index(&self, kx: i32, ky: i32) -> usize {
        let n = 2 * self.bandwidth + 1;
        let b = self.bandwidth as i32;
        ((ky + b) as usize) * n + (kx + b) as usize
    }

    /// Largest violation of `c(-k) = conj(c(k))`.
    pub fn symmetry_defect(&self) -> f64 {
        let b = self.bandwidth as i32;
        let mut worst: f64 = 0.0;
        for ky in -b..=b {
            for kx in -b..=b {
                let d = self.table[self.index(kx, ky)] - self.table[self.index(-kx, -ky)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    fn symmetrize_in_place(&mut self) {
        let b = self.bandwidth as i32;
        for ky in -b..=b {
            for kx in -b..=b {
                if (kx, ky) < (-kx, -ky) {
                    continue;
                }
                let i = self.index(kx, ky);
                let j = self.index(-kx, -ky);
                let avg = (self.table[i] + self.table[j].conj()) * 0.5;
                self.table[i] = avg;
                self.table[j] = avg.conj();
            }
        }
    }

    fn refresh(&mut self) {
        let b = self.bandwidth as i32;
        let mut half = Vec::new();
        let (mut kxm, mut kym) = (0usize, 0usize);
        for ky in -b..=b {
            for kx in 0..=b {
                if kx == 0 && ky <= 0 {
                    continue;
                }
                let c = self.table[self.index(kx, ky)];
                if c.norm_sqr() != 0.0 {
                    half.push((kx, ky, c));
                    kxm = kxm.max(kx as usize);
                    kym = kym.max(ky.unsigned_abs() as usize);
                }
            }
        }
        self.half = Arc::new(half);
        self.kx_max = kxm;
        self.ky_max = kym;
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn coeff(&self, kx: i32, ky: i32) -> Complex64 {
        let b = self.bandwidth as i32;
        if kx.abs() > b || ky.abs() > b {
            return Complex64::new(0.0, 0.0);
        }
        self.table[self.index(kx, ky)]
    }

    /// Number of nonzero modes (full plane).
    pub fn nnz(&self) -> usize {
        2 * self.half.len() + usize::from(self.table[self.index(0, 0)].norm_sqr() != 0.0)
    }

    pub fn max_modes(&self) -> (usize, usize) {
        (self.kx_max, self.ky_max)
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    /// Point evaluation `Σ c(k) exp(2πi k·p)`; the table is Hermitian by
    /// construction so the imaginary part vanishes identically.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let px = cis_powers(x, self.kx_max);
        let py = cis_powers(y, self.ky_max);
        let mut acc = 0.0;
        for &(kx, ky, c) in self.half.iter() {
            let ex = px[kx as usize];
            let ey = if ky >= 0 { py[ky as usize] } else { py[(-ky) as usize].conj() };
            let e = ex * ey;
            acc += c.re * e.re - c.im * e.im;
        }
        self.table[self.index(0, 0)].re + 2.0 * acc
    }

    /// Checked evaluation following the point-evaluation contract.
    pub fn eval_point(&self, p: (f64, f64)) -> Result<f64> {
        let asym = self.symmetry_defect();
        if asym > SYMMETRY_TOL {
            return Err(Error::MalformedField(format!("symmetry violated by {asym:e}")));
        }
        Ok(self.eval(p.0, p.1))
    }

    pub fn differentiate(&self, axis: Axis) -> Self {
        let b = self.bandwidth as i32;
        let mut out = self.clone();
        for ky in -b..=b {
            for kx in -b..=b {
                let k = match axis {
                    Axis::X => kx,
                    Axis::Y => ky,
                };
                let i = self.index(kx, ky);
                out.table[i] = times_i_kappa(self.table[i], TAU * k as f64);
            }
        }
        out.refresh();
        out
    }

    /// Integral over the unit torus.
    pub fn integrate_total(&self) -> f64 {
        self.table[self.index(0, 0)].re
    }

    /// `∫_{x_lo}^{x_hi} ∫_0^1 f dy dx`, exact per mode.
    pub fn integrate_strip(&self, x_lo: f64, x_hi: f64) -> f64 {
        let mut acc = self.table[self.index(0, 0)].re * (x_hi - x_lo);
        for kx in 1..=self.bandwidth as i32 {
            let c = self.table[self.index(kx, 0)];
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let kappa = TAU * kx as f64;
            let (sh, ch) = (kappa * x_hi).sin_cos();
            let (sl, cl) = (kappa * x_lo).sin_cos();
            // ∫ e^{iκx} = (e^{iκx_hi} - e^{iκx_lo}) / (iκ); add the conjugate mode
            let d = Complex64::new(ch - cl, sh - sl);
            let v = c * d / Complex64::new(0.0, kappa);
            acc += 2.0 * v.re;
        }
        acc
    }

    /// The y-mean profile `x ↦ ∫_0^1 f(x,y) dy` as a 1D field.
    pub fn y_mean_profile(&self) -> SpectralField1D {
        let coeffs: Vec<Complex64> = (0..=self.bandwidth as i32).map(|kx| self.coeff(kx, 0)).collect();
        SpectralField1D::from_nonnegative(self.bandwidth, &coeffs).expect("hermitian row")
    }

    pub fn resize(&self, bandwidth: usize) -> Self {
        let mut out = Self::zeros(bandwidth);
        let b = self.bandwidth.min(bandwidth) as i32;
        for ky in -b..=b {
            for kx in -b..=b {
                let i = out.index(kx, ky);
                out.table[i] = self.coeff(kx, ky);
            }
        }
        out.refresh();
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.table.iter_mut().for_each(|c| *c *= s);
        out.refresh();
        out
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let bw = self.bandwidth.max(other.bandwidth);
        let mut out = self.resize(bw);
        let b = other.bandwidth as i32;
        for ky in -b..=b {
            for kx in -b..=b {
                let i = out.index(kx, ky);
                out.table[i] += other.coeff(kx, ky) * s;
            }
        }
        out.refresh();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// Product truncated back to the larger bandwidth without aliasing.
    pub fn multiply(&self, other: &Self) -> Self {
        let bw = self.bandwidth.max(other.bandwidth);
        if self.nnz() * other.nnz() <= DIRECT_PRODUCT_LIMIT {
            return self.multiply_direct(other, bw);
        }
        self.multiply_padded(other, bw)
    }

    fn full_modes(&self) -> Vec<(i32, i32, Complex64)> {
        let mut v = Vec::with_capacity(self.nnz());
        let c0 = self.table[self.index(0, 0)];
        if c0.norm_sqr() != 0.0 {
            v.push((0, 0, c0));
        }
        for &(kx, ky, c) in self.half.iter() {
            v.push((kx, ky, c));
            v.push((-kx, -ky, c.conj()));
        }
        v
    }

    fn multiply_direct(&self, other: &Self, bw: usize) -> Self {
        let mut out = Self::zeros(bw);
        let b = bw as i32;
        let fm = self.full_modes();
        let gm = other.full_modes();
        for &(ax, ay, ca) in &fm {
            for &(bx, by, cb) in &gm {
                let (kx, ky) = (ax + bx, ay + by);
                if kx.abs() > b || ky.abs() > b {
                    continue;
                }
                let i = out.index(kx, ky);
                out.table[i] += ca * cb;
            }
        }
        out.symmetrize_in_place();
        out.refresh();
        out
    }

    fn multiply_padded(&self, other: &Self, bw: usize) -> Self {
        let m = 3 * bw + 1;
        let fa = self.grid_samples(m);
        let ga = other.grid_samples(m);
        let prod: Vec<f64> = fa.iter().zip(&ga).map(|(a, b)| a * b).collect();
        let (mut out, _) = Self::project_samples(&prod, m, bw);
        let peak = out.table.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let floor = 1e-15 * peak;
        out.table.iter_mut().for_each(|c| {
            if c.norm() <= floor {
                *c = Complex64::new(0.0, 0.0)
            }
        });
        out.refresh();
        out
    }

    /// Samples on the uniform `m × m` grid, row-major with x fastest:
    /// entry `iy*m + ix` is `f(ix/m, iy/m)`. Requires `m ≥ 2K+1`.
    pub fn grid_samples(&self, m: usize) -> Vec<f64> {
        assert!(m > 2 * self.bandwidth, "grid too coarse for bandwidth");
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        let b = self.bandwidth as i32;
        for ky in -b..=b {
            for kx in -b..=b {
                let c = self.table[self.index(kx, ky)];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let ix = kx.rem_euclid(m as i32) as usize;
                let iy = ky.rem_euclid(m as i32) as usize;
                buf[iy * m + ix] = c;
            }
        }
        fft2(&mut buf, m, true);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Projects grid samples (layout as in [`grid_samples`](Self::grid_samples))
    /// onto bandwidth `K`; returns the field and the sup-norm projection error
    /// on the grid.
    pub fn project_samples(samples: &[f64], m: usize, bandwidth: usize) -> (Self, f64) {
        assert_eq!(samples.len(), m * m);
        assert!(m > 2 * bandwidth, "grid too coarse for bandwidth");
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut buf, m, false);
        let norm = 1.0 / (m * m) as f64;
        let n = 2 * bandwidth + 1;
        let mut table = vec![Complex64::new(0.0, 0.0); n * n];
        let b = bandwidth as i32;
        for ky in -b..=b {
            for kx in -b..=b {
                let ix = kx.rem_euclid(m as i32) as usize;
                let iy = ky.rem_euclid(m as i32) as usize;
                table[((ky + b) as usize) * n + (kx + b) as usize] = buf[iy * m + ix] * norm;
            }
        }
        let (f, _) = Self::from_table_symmetrized(bandwidth, table).expect("sized table");
        let back = f.grid_samples(m);
        let err = back.iter().zip(samples).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (f, err)
    }

    pub fn to_json(&self) -> Field2DJson {
        let b = self.bandwidth as i32;
        let mut coeffs = Vec::new();
        for ky in -b..=b {
            for kx in -b..=b {
                let c = self.table[self.index(kx, ky)];
                if c.norm_sqr() != 0.0 {
                    coeffs.push([kx as f64, ky as f64, c.re, c.im]);
                }
            }
        }
        Field2DJson { bandwidth: self.bandwidth, coeffs }
    }

    /// Loads a field, symmetrizing; returns the correction norm.
    pub fn from_json(j: &Field2DJson) -> Result<(Self, f64)> {
        let bw = j.bandwidth;
        let n = 2 * bw + 1;
        let mut table = vec![Complex64::new(0.0, 0.0); n * n];
        for e in &j.coeffs {
            let kx = integral_index(e[0], bw)?;
            let ky = integral_index(e[1], bw)?;
            let i = ((ky + bw as isize) as usize) * n + (kx + bw as isize) as usize;
            table[i] += Complex64::new(e[2], e[3]);
        }
        Self::from_table_symmetrized(bw, table)
    }

    /// Half-plane nonzero modes, used by the separable representation.
    pub(crate) fn half_modes(&self) -> &[(i32, i32, Complex64)] {
        &self.half
    }

    pub(crate) fn mean_coeff(&self) -> f64 {
        self.table[self.index(0, 0)].re
    }
}

/// In-place 2D transform of an `m × m` row-major buffer. `inverse` applies the
/// unnormalized `e^{+2πi}` transform.
pub(crate) fn fft2(buf: &mut [Complex64], m: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft: Arc<dyn Fft<f64>> = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    fft.process(buf);
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for ix in 0..m {
        for iy in 0..m {
            col[iy] = buf[iy * m + ix];
        }
        fft.process(&mut col);
        for iy in 0..m {
            buf[iy * m + ix] = col[iy];
        }
    }
}
