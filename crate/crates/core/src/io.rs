//! JSON documents for forms, maps and reports.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bm::{certify_folded, BmNambuForm, CriticalSet, FoldedVolumeForm, DEFAULT_THETA, DEFAULT_TOL_ZERO};
use crate::desing::{DesingReport, DesingularizedForm};
use crate::error::{Error, Result};
use crate::forms::TwoForm;
use crate::spectral::{Field1DJson, Field2DJson, SpectralField1D, SpectralField2D};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LaurentJson {
    pub alpha: Vec<Field1DJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FormJson {
    Folded {
        circles: Vec<f64>,
        coorientations: Vec<i8>,
        coef: Field2DJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        collar_width: Option<f64>,
    },
    Bm {
        m: usize,
        circles: Vec<f64>,
        laurent: Vec<LaurentJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<Field2DJson>,
        smooth: Field2DJson,
        collar_width: f64,
    },
}

#[derive(Clone, Debug)]
pub enum LoadedForm {
    Folded(FoldedVolumeForm),
    Bm(BmNambuForm),
}

/// A loaded form and the largest correction applied while restoring
/// Hermitian symmetry of its coefficient tables.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub form: LoadedForm,
    pub correction: f64,
}

fn field2(j: &Field2DJson, worst: &mut f64) -> Result<SpectralField2D> {
    let (f, c) = SpectralField2D::from_json(j)?;
    *worst = worst.max(c);
    Ok(f)
}

fn field1(j: &Field1DJson, worst: &mut f64) -> Result<SpectralField1D> {
    let (f, c) = SpectralField1D::from_json(j)?;
    *worst = worst.max(c);
    Ok(f)
}

impl FormJson {
    pub fn into_form(self) -> Result<Loaded> {
        let mut corr: f64 = 0.0;
        let form = match self {
            FormJson::Folded { circles, coorientations, coef, collar_width } => {
                let z = match collar_width {
                    Some(w) => CriticalSet::new(circles, coorientations, w)?,
                    None => CriticalSet::with_default_collar(circles, coorientations)?,
                };
                let coef = field2(&coef, &mut corr)?;
                LoadedForm::Folded(certify_folded(&TwoForm::new(coef), &z, DEFAULT_THETA, DEFAULT_TOL_ZERO)?)
            }
            FormJson::Bm { m, circles, laurent, beta, smooth, collar_width } => {
                let n = circles.len();
                let z = CriticalSet::new(circles, vec![1; n], collar_width)?;
                let laurent = laurent
                    .iter()
                    .map(|l| l.alpha.iter().map(|a| field1(a, &mut corr)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                let smooth = TwoForm::new(field2(&smooth, &mut corr)?);
                let beta = beta.map(|b| field2(&b, &mut corr)).transpose()?.map(TwoForm::new);
                LoadedForm::Bm(BmNambuForm::new(m, z, laurent, smooth, beta)?)
            }
        };
        Ok(Loaded { form, correction: corr })
    }

    pub fn from_folded(f: &FoldedVolumeForm) -> Result<Self> {
        let coef = f.spectral().ok_or_else(|| Error::InvalidInput("form has no spectral representation".into()))?;
        let z = f.critical();
        Ok(FormJson::Folded {
            circles: z.circles().to_vec(),
            coorientations: z.coorientations().to_vec(),
            coef: coef.coef.to_json(),
            collar_width: Some(z.collar_width()),
        })
    }

    pub fn from_bm(t: &BmNambuForm) -> Self {
        let z = t.critical();
        FormJson::Bm {
            m: t.m(),
            circles: z.circles().to_vec(),
            laurent: (0..z.len())
                .map(|i| LaurentJson { alpha: t.laurent(i).iter().map(|a| a.to_json()).collect() })
                .collect(),
            beta: t.collar_remainder().map(|b| b.coef.to_json()),
            smooth: t.smooth().coef.to_json(),
            collar_width: z.collar_width(),
        }
    }
}

pub fn parse_form(text: &str) -> Result<Loaded> {
    serde_json::from_str::<FormJson>(text)?.into_form()
}

pub fn load_form(path: impl AsRef<Path>) -> Result<Loaded> {
    parse_form(&fs::read_to_string(path)?)
}

pub fn to_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    fs::write(path, to_pretty(value)? + "\n")?;
    Ok(())
}

/// Sampled output of a desingularized form with its verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledForm {
    #[serde(rename = "type")]
    pub kind: String,
    pub m: usize,
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub circles: Vec<f64>,
    /// Row-major values, `index = iy·N + ix`.
    pub values: Vec<f64>,
    pub report: DesingReport,
}

impl SampledForm {
    pub fn new(d: &DesingularizedForm, report: DesingReport, n: usize) -> Self {
        Self {
            kind: "desing_sampled".into(),
            m: report.m,
            epsilon: report.epsilon,
            n,
            circles: d.source().critical().circles().to_vec(),
            values: d.sample(n),
            report,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bm::bm_from_parts;

    fn z2() -> CriticalSet {
        CriticalSet::with_default_collar(vec![0.0, 0.5], vec![1, -1]).unwrap()
    }

    #[test]
    fn folded_roundtrip() {
        let s = SpectralField2D::sin(8, 1, 0, 1.0);
        let coef = s.add(&s.multiply(&SpectralField2D::cos(8, 0, 1, 0.2)));
        let f = certify_folded(&TwoForm::new(coef), &z2(), DEFAULT_THETA, DEFAULT_TOL_ZERO).unwrap();
        let text = to_pretty(&FormJson::from_folded(&f).unwrap()).unwrap();
        assert!(text.contains("\"type\": \"folded\""));
        let back = parse_form(&text).unwrap();
        assert_eq!(back.correction, 0.0);
        match back.form {
            LoadedForm::Folded(g) => {
                for &(x, y) in &[(0.1, 0.2), (0.7, 0.9)] {
                    assert_eq!(g.eval(x, y), f.eval(x, y));
                }
                assert_eq!(g.critical(), f.critical());
            }
            LoadedForm::Bm(_) => panic!("wrong kind"),
        }
    }

    #[test]
    fn bm_roundtrip() {
        let l = vec![vec![SpectralField1D::constant(8, 1.0).add(&SpectralField1D::cos(8, 2, 0.2))]; 2];
        let t = bm_from_parts(1, z2().with_coorientations(vec![1, 1]).unwrap(), l, SpectralField2D::cos(8, 1, 1, 0.3))
            .unwrap();
        let text = to_pretty(&FormJson::from_bm(&t)).unwrap();
        match parse_form(&text).unwrap().form {
            LoadedForm::Bm(b) => {
                assert_eq!(b.m(), 1);
                assert_eq!(b.eval(0.3, 0.4).unwrap(), t.eval(0.3, 0.4).unwrap());
            }
            LoadedForm::Folded(_) => panic!("wrong kind"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_form("{"), Err(Error::Json(_))));
        assert!(matches!(parse_form(r#"{"type":"other"}"#), Err(Error::Json(_))));
        // a one-sided sine mode is symmetrized and the correction reported
        let half = r#"{"type":"folded","circles":[0.0,0.5],"coorientations":[1,-1],
            "coef":{"K":4,"coeffs":[[1,0,0.0,-1.0]]}}"#;
        let l = parse_form(half).unwrap();
        assert!(l.correction > 0.1);
        // not folded on the declared circles
        let cos = r#"{"type":"folded","circles":[0.0,0.5],"coorientations":[1,-1],
            "coef":{"K":4,"coeffs":[[1,0,0.5,0.0],[-1,0,0.5,0.0]]}}"#;
        let e = parse_form(cos).unwrap_err();
        assert_eq!(e.exit_code(), 4, "{e}");
    }
}
