//! Classifying invariants: regional volumes, modular periods and the
//! principal-value Liouville volume.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bm::{BmNambuForm, CriticalSet, FoldedVolumeForm};
use crate::error::{Error, Result};
use crate::separable::{gauss_legendre_composite, SeparableField};

pub const DEFAULT_EQUIV_TOL: f64 = 1e-8;
pub const DEFAULT_CUTOFFS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
/// Periods below this magnitude count as zero for the divergence flag.
pub const PERIOD_ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionalVolumes {
    pub volumes: Vec<f64>,
    pub total: f64,
}

pub fn regional_volumes(omega: &FoldedVolumeForm) -> RegionalVolumes {
    regional_volumes_of(omega.density(), omega.critical())
}

/// Signed volumes of the regions `[c_j, c_{j+1}] × S¹` in cyclic order.
pub fn regional_volumes_of(density: &SeparableField, z: &CriticalSet) -> RegionalVolumes {
    let volumes = (0..z.region_count())
        .map(|j| {
            let (lo, hi) = z.region(j);
            density.integrate_strip(lo, hi)
        })
        .collect();
    RegionalVolumes { volumes, total: density.integrate_total() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldedVerdict {
    pub equivalent: bool,
    pub volumes0: Vec<f64>,
    pub volumes1: Vec<f64>,
    /// `V_j(Ω1) - V_j(Ω0)`.
    pub defects: Vec<f64>,
    pub max_defect: f64,
}

pub fn folded_equivalent(omega0: &FoldedVolumeForm, omega1: &FoldedVolumeForm, tol: f64) -> Result<FoldedVerdict> {
    let (z0, z1) = (omega0.critical(), omega1.critical());
    if !z0.same_geometry(z1) || z0.coorientations() != z1.coorientations() {
        return Err(Error::Incomparable("folded forms must share circles, collars and coorientations".into()));
    }
    let v0 = regional_volumes(omega0).volumes;
    let v1 = regional_volumes(omega1).volumes;
    let defects: Vec<f64> = v0.iter().zip(&v1).map(|(a, b)| b - a).collect();
    let max_defect = defects.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    Ok(FoldedVerdict { equivalent: max_defect <= tol, volumes0: v0, volumes1: v1, defects, max_defect })
}

/// `values[r][i-1]` is the period of the order-`i` singular term at circle
/// `r`, i.e. the mean of `α̂_{m-i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularPeriods {
    pub values: Vec<Vec<f64>>,
}

impl ModularPeriods {
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.values.iter().flatten().zip(other.values.iter().flatten()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub fn modular_periods(theta: &BmNambuForm) -> ModularPeriods {
    let m = theta.m();
    let values = (0..theta.critical().len())
        .map(|r| {
            let l = theta.laurent(r);
            (1..=m).map(|i| l[m - i].mean()).collect()
        })
        .collect();
    ModularPeriods { values }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSample {
    pub epsilon: f64,
    pub integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleVolume {
    /// Extrapolated principal value; `None` when the cutoff integrals diverge.
    pub value: Option<f64>,
    pub diverged: bool,
    /// Extrapolated limit after removing the divergent powers of the cutoff.
    pub finite_part: f64,
    pub cutoffs: Vec<CutoffSample>,
}

/// `2 ∫_{ε}^{R} ρ(t) t^{-p} dt` for circle `i` (even `p`), with the plateau
/// part in closed form.
fn even_power_integral(z: &CriticalSet, i: usize, p: usize, eps: f64) -> f64 {
    let inner = z.collar_width();
    let reach = z.reach(i);
    let pf = p as f64;
    let ramp_start = eps.max(inner);
    let ramp = gauss_legendre_composite(ramp_start, reach, 64, |t| z.partition(i, t).0 * t.powf(-pf));
    let plateau = if eps < inner { (eps.powf(1.0 - pf) - inner.powf(1.0 - pf)) / (pf - 1.0) } else { 0.0 };
    2.0 * (plateau + ramp)
}

/// `∫` over the torus minus the symmetric bands `|t| < ε` around every
/// circle, exact in the Laurent terms.
pub fn cutoff_integral(theta: &BmNambuForm, eps: f64) -> f64 {
    let z = theta.critical();
    let m = theta.m();
    let smooth = &theta.smooth().coef;
    let mut acc = smooth.integrate_total();
    for (i, &c) in z.circles().iter().enumerate() {
        acc -= smooth.integrate_strip(c - eps, c + eps);
        let l = theta.laurent(i);
        for (k, a) in l.iter().enumerate() {
            let p = m - k;
            if p % 2 == 1 {
                // odd powers cancel over the symmetric band
                continue;
            }
            let period = a.mean();
            if period != 0.0 {
                acc += period * even_power_integral(z, i, p, eps);
            }
        }
    }
    acc
}

pub fn liouville_volume_pv(theta: &BmNambuForm, cutoffs: &[f64]) -> Result<LiouvilleVolume> {
    let z = theta.critical();
    if cutoffs.is_empty() {
        return Err(Error::InvalidInput("at least one cutoff is required".into()));
    }
    let min_reach = (0..z.len()).map(|i| z.reach(i)).fold(0.5, f64::min);
    for w in cutoffs.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidInput("cutoffs must be strictly decreasing".into()));
        }
    }
    if !(cutoffs[cutoffs.len() - 1] > 0.0) || cutoffs[0] >= min_reach {
        return Err(Error::InvalidInput(format!("cutoffs must lie in (0, {min_reach})")));
    }
    let m = theta.m();
    let mut diverged = false;
    let mut divergent_part = |eps: f64| {
        let mut acc = 0.0;
        for i in 0..z.len() {
            for (k, a) in theta.laurent(i).iter().enumerate() {
                let p = m - k;
                if p.is_multiple_of(2) && a.mean().abs() > PERIOD_ZERO_TOL {
                    diverged = true;
                    acc += a.mean() * 2.0 * eps.powf(1.0 - p as f64) / (p as f64 - 1.0);
                }
            }
        }
        acc
    };
    let samples: Vec<CutoffSample> =
        cutoffs.iter().map(|&eps| CutoffSample { epsilon: eps, integral: cutoff_integral(theta, eps) }).collect();
    let regular: Vec<f64> = samples.iter().map(|s| s.integral - divergent_part(s.epsilon)).collect();
    let finite_part = extrapolate_odd(cutoffs, &regular);
    Ok(LiouvilleVolume {
        value: if diverged { None } else { Some(finite_part) },
        diverged,
        finite_part,
        cutoffs: samples,
    })
}

/// Limit at zero of a sequence known to expand in `1, ε, ε³, ε⁵, ...`.
fn extrapolate_odd(eps: &[f64], vals: &[f64]) -> f64 {
    let n = eps.len();
    let a = DMatrix::from_fn(n, n, |r, c| if c == 0 { 1.0 } else { eps[r].powi(2 * c as i32 - 1) });
    let b = DVector::from_column_slice(vals);
    match a.lu().solve(&b) {
        Some(x) => x[0],
        None => vals[n - 1],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmVerdict {
    pub equivalent: bool,
    pub periods0: ModularPeriods,
    pub periods1: ModularPeriods,
    pub max_period_difference: f64,
    pub volume0: LiouvilleVolume,
    pub volume1: LiouvilleVolume,
    pub volume_difference: f64,
}

/// Compares the top-degree class coordinates: all modular periods and the
/// regularized volume.
pub fn bm_equivalent(theta0: &BmNambuForm, theta1: &BmNambuForm, tol: f64) -> Result<BmVerdict> {
    if theta0.m() != theta1.m() {
        return Err(Error::Incomparable(format!("orders {} and {} differ", theta0.m(), theta1.m())));
    }
    if theta0.critical() != theta1.critical() {
        return Err(Error::Incomparable("critical sets differ".into()));
    }
    let periods0 = modular_periods(theta0);
    let periods1 = modular_periods(theta1);
    let max_period_difference = periods0.max_difference(&periods1);
    let volume0 = liouville_volume_pv(theta0, &DEFAULT_CUTOFFS)?;
    let volume1 = liouville_volume_pv(theta1, &DEFAULT_CUTOFFS)?;
    let volume_difference = (volume0.finite_part - volume1.finite_part).abs();
    Ok(BmVerdict {
        equivalent: max_period_difference <= tol && volume_difference <= tol,
        periods0,
        periods1,
        max_period_difference,
        volume0,
        volume1,
        volume_difference,
    })
}
