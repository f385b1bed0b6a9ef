//! JSON form of a real series: only the half-lattice `l > 0 ∪ (l = 0, m ≥ 0)`
//! is stored, the rest follows from the reality condition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Series, TruncationSpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffRecord {
    pub l: i32,
    pub m: i32,
    pub n: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesDocument {
    pub rho: f64,
    pub trunc: TruncationSpec,
    pub coeffs: Vec<CoeffRecord>,
}

fn in_half_lattice(l: i32, m: i32) -> bool {
    l > 0 || (l == 0 && m >= 0)
}

impl Series {
    pub fn to_document(&self) -> Result<SeriesDocument> {
        if !self.is_real() {
            return Err(Error::NotReal(self.reality_defect()));
        }
        let coeffs = self
            .terms()
            .filter(|&(l, m, _, _)| in_half_lattice(l, m))
            .map(|(l, m, n, c)| CoeffRecord {
                l,
                m,
                n,
                re: c.re,
                im: c.im,
            })
            .collect();
        Ok(SeriesDocument {
            rho: self.rho,
            trunc: self.trunc,
            coeffs,
        })
    }

    pub fn from_document(doc: &SeriesDocument) -> Result<Self> {
        let mut s = Series::zero(doc.rho, doc.trunc)?;
        for rec in &doc.coeffs {
            if !in_half_lattice(rec.l, rec.m) {
                return Err(Error::InvalidParameter(format!(
                    "coefficient ({}, {}, {}) lies outside the stored half-lattice",
                    rec.l, rec.m, rec.n
                )));
            }
            let c = Complex64::new(rec.re, rec.im);
            s.set(rec.l, rec.m, rec.n, c)?;
            if rec.l != 0 || rec.m != 0 {
                s.set(-rec.l, -rec.m, rec.n, c.conj())?;
            }
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document()?)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }
}
