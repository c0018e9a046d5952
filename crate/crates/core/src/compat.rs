//! Desingularize pairs of odd-order b^m forms and compare the resulting
//! folded forms: classes, regional volumes and an optional Moser witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bm::{bm_from_parts, BmNambuForm, CriticalSet};
use crate::desing::{build_odd_profile, desingularize, Parity, DEFAULT_CONTACT_ORDER};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::invariants::{bm_equivalent, regional_volumes_of, BmVerdict, DEFAULT_EQUIV_TOL};
use crate::moser::{run_moser, MoserConfig};
use crate::spectral::{SpectralField1D, SpectralField2D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: usize,
    pub bandwidth: usize,
    pub steps: usize,
    /// Tolerance for class and regional-volume comparisons.
    pub tol: f64,
    pub pullback_tol: f64,
    pub fixing_tol: f64,
    pub epsilons: Vec<f64>,
    pub contact_order: usize,
    /// Run the Moser flow for every row.
    pub witness: bool,
    /// Seeds of the random family.
    pub seeds: Vec<u64>,
    #[serde(skip)]
    pub exec: ExecMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: 64,
            bandwidth: 16,
            steps: 50,
            tol: DEFAULT_EQUIV_TOL,
            pullback_tol: 1e-4,
            fixing_tol: 1e-8,
            epsilons: vec![0.05, 0.1, 0.2],
            contact_order: DEFAULT_CONTACT_ORDER,
            witness: false,
            seeds: (0..10).collect(),
            exec: ExecMode::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn moser(&self) -> MoserConfig {
        MoserConfig {
            steps: self.steps,
            grid: self.grid,
            bandwidth: self.bandwidth,
            pullback_tol: self.pullback_tol,
            fixing_tol: self.fixing_tol,
            volume_tol: self.tol,
            exec: self.exec,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub passed: bool,
    pub pullback_error: Option<f64>,
    pub fixing_error: Option<f64>,
    pub min_jacobian: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatRow {
    pub epsilon: f64,
    pub volumes0: Vec<f64>,
    pub volumes1: Vec<f64>,
    pub coorientations0: Vec<i8>,
    pub coorientations1: Vec<i8>,
    pub folded_equivalent: bool,
    pub max_defect: f64,
    /// Regional volumes of the difference of the two desingularized forms.
    pub difference_volumes: Vec<f64>,
    pub witness: Option<WitnessSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub m: usize,
    pub bm: BmVerdict,
    pub rows: Vec<CompatRow>,
    /// Equivalent inputs gave equivalent rows with passing witnesses.
    pub consistent: bool,
}

pub fn compat_experiment(theta0: &BmNambuForm, theta1: &BmNambuForm, cfg: &ExperimentConfig) -> Result<CompatReport> {
    let m = theta0.m();
    if Parity::of(m) != Parity::Odd {
        return Err(Error::WrongParity(format!("order {m} is even; the comparison needs odd order")));
    }
    let bm = bm_equivalent(theta0, theta1, cfg.tol)?;
    let z = theta0.critical();
    let mut rows = Vec::with_capacity(cfg.epsilons.len());
    for &eps in &cfg.epsilons {
        let profile = build_odd_profile(m / 2, eps, cfg.contact_order)?;
        let d0 = desingularize(theta0, &profile)?;
        let d1 = desingularize(theta1, &profile)?;
        let (f0, f1) = match (d0.folded(), d1.folded()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InternalConsistency("odd desingularization without certificate".into())),
        };
        let volumes0 = regional_volumes_of(f0.density(), z).volumes;
        let volumes1 = regional_volumes_of(f1.density(), z).volumes;
        let max_defect = volumes0.iter().zip(&volumes1).fold(0.0_f64, |a, (p, q)| a.max((q - p).abs()));
        let c0 = f0.critical().coorientations().to_vec();
        let c1 = f1.critical().coorientations().to_vec();
        let folded_equivalent = c0 == c1 && max_defect <= cfg.tol;
        let difference_volumes = regional_volumes_of(&d1.density().sub(d0.density()), z).volumes;
        let witness = (cfg.witness && folded_equivalent).then(|| match run_moser(f0, f1, &cfg.moser()) {
            Ok(out) => WitnessSummary {
                passed: out.certificate.passed,
                pullback_error: Some(out.certificate.pullback_error),
                fixing_error: Some(out.certificate.fixing_error),
                min_jacobian: Some(out.certificate.min_jacobian),
                error: None,
            },
            Err(e) => WitnessSummary {
                passed: false,
                pullback_error: None,
                fixing_error: None,
                min_jacobian: None,
                error: Some(e.to_string()),
            },
        });
        rows.push(CompatRow {
            epsilon: eps,
            volumes0,
            volumes1,
            coorientations0: c0,
            coorientations1: c1,
            folded_equivalent,
            max_defect,
            difference_volumes,
            witness,
        });
    }
    let consistent =
        !bm.equivalent || rows.iter().all(|r| r.folded_equivalent && r.witness.as_ref().is_none_or(|w| w.passed));
    Ok(CompatReport { m, bm, rows, consistent })
}

impl CompatReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One line per row.
    pub fn to_csv(&self) -> Result<String> {
        table_csv(std::slice::from_ref(self))
    }
}

/// One line per row of every report; `case` is the report's index.
pub fn table_csv(reports: &[CompatReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "case",
        "epsilon",
        "bm_equivalent",
        "folded_equivalent",
        "max_defect",
        "max_difference_volume",
        "witness_passed",
        "pullback_error",
        "fixing_error",
    ])
    .map_err(csv_err)?;
    for (case, report) in reports.iter().enumerate() {
        for r in &report.rows {
            let diff = r.difference_volumes.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
            let wit = r.witness.as_ref();
            w.write_record([
                case.to_string(),
                format!("{}", r.epsilon),
                format!("{}", report.bm.equivalent),
                format!("{}", r.folded_equivalent),
                format!("{:e}", r.max_defect),
                format!("{diff:e}"),
                wit.map(|w| w.passed.to_string()).unwrap_or_default(),
                opt(wit.and_then(|w| w.pullback_error)),
                opt(wit.and_then(|w| w.fixing_error)),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

const LAURENT_AMP: f64 = 0.03;

/// Circles of the random family; the first carries positive data, the
/// second negative, so that desingularized forms keep one sign per region.
pub fn family_critical_set() -> CriticalSet {
    CriticalSet::with_default_collar(vec![0.0, 0.5], vec![1, -1]).expect("valid circles")
}

fn random_profile(rng: &mut ChaCha8Rng, bw: usize, modes: usize, amp: f64) -> SpectralField1D {
    let mut f = SpectralField1D::zeros(bw);
    for k in 1..=modes {
        f = f.add(&SpectralField1D::cos(bw, k, rng.gen_range(-amp..amp)));
        f = f.add(&SpectralField1D::sin(bw, k, rng.gen_range(-amp..amp)));
    }
    f
}

/// Two odd-order forms on `{x = 0} ∪ {x = 1/2}` with the same class: equal
/// Laurent means, smooth parts differing by `sin(2πx)·r(y)` with `r`
/// mean-free.
pub fn random_equivalent_pair(seed: u64, m: usize, bw: usize) -> Result<(BmNambuForm, BmNambuForm)> {
    if m.is_multiple_of(2) {
        return Err(Error::WrongParity(format!("order {m} is even")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = family_critical_set();
    let mut laurent0 = Vec::new();
    let mut laurent1 = Vec::new();
    for sign in [1.0, -1.0] {
        let mut l0 = Vec::new();
        let mut l1 = Vec::new();
        for i in 0..m {
            // leading coefficient keeps its sign; higher powers are small
            let (mean, amp) = if i == 0 {
                (sign * rng.gen_range(0.5..1.5), LAURENT_AMP)
            } else {
                (rng.gen_range(-0.2..0.2), 0.5 * LAURENT_AMP)
            };
            let base = SpectralField1D::constant(bw, mean);
            l0.push(base.add(&random_profile(&mut rng, bw, 2, amp)));
            l1.push(base.add(&random_profile(&mut rng, bw, 2, amp)));
        }
        laurent0.push(l0);
        laurent1.push(l1);
    }
    let sigma = rng.gen_range(1.5..2.5);
    let q = random_profile(&mut rng, bw, 2, 0.1);
    let r = random_profile(&mut rng, bw, 2, 0.1);
    let lift = |f: &SpectralField1D| -> SpectralField2D {
        let mut modes = Vec::new();
        for (k, c) in f.nonnegative_coeffs().iter().enumerate() {
            if k <= bw {
                modes.push((0, k as i32, *c));
            }
        }
        SpectralField2D::from_modes(bw, &modes).expect("modes within bandwidth")
    };
    let s = SpectralField2D::sin(bw, 1, 0, sigma);
    let s0 = s.add(&s.multiply(&lift(&q)));
    let s1 = s0.add(&s.multiply(&lift(&r)));
    Ok((bm_from_parts(m, z.clone(), laurent0, s0)?, bm_from_parts(m, z, laurent1, s1)?))
}

/// [`compat_experiment`] over the random family of `cfg.seeds`.
pub fn compat_family(m: usize, cfg: &ExperimentConfig) -> Result<Vec<CompatReport>> {
    cfg.seeds
        .iter()
        .map(|&seed| {
            let (a, b) = random_equivalent_pair(seed, m, cfg.bandwidth)?;
            compat_experiment(&a, &b, cfg)
        })
        .collect()
}
