use serde::{Deserialize, Serialize};

use super::{Architecture, RationalTuple, Weights};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::polyalg::{HomPoly, JsonScalar, PolyJson};

/// A matrix entry: a bare number, or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarJson {
    Real(f64),
    Pair([f64; 2]),
}

impl ScalarJson {
    fn parts(self) -> (f64, Option<f64>) {
        match self {
            ScalarJson::Real(r) => (r, None),
            ScalarJson::Pair([r, i]) => (r, Some(i)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightsJson {
    pub arch: Vec<usize>,
    pub field: String,
    pub mats: Vec<Vec<Vec<ScalarJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleJson {
    pub numerators: Vec<PolyJson>,
    pub denominator: PolyJson,
}

impl<F: JsonScalar> Weights<F> {
    pub fn to_json(&self) -> WeightsJson {
        let f = self.field();
        let mats = self
            .mats()
            .iter()
            .map(|m| {
                m.to_rows()
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|c| match f.to_parts(c) {
                                (r, None) => ScalarJson::Real(r),
                                (r, Some(i)) => ScalarJson::Pair([r, i]),
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        WeightsJson { arch: self.arch().dims().to_vec(), field: f.tag().into(), mats, p: f.modulus() }
    }

    /// Reads weights into `field`; the JSON field tag must match it.
    pub fn from_json(field: F, j: &WeightsJson) -> Result<Self> {
        if j.field != field.tag() {
            return Err(Error::Json(format!("weights are over {:?}, expected {:?}", j.field, field.tag())));
        }
        if j.p.is_some() && j.p != field.modulus() {
            return Err(Error::Json(format!("modulus {:?} does not match {:?}", j.p, field.modulus())));
        }
        let arch = Architecture::new(j.arch.clone())?;
        let mut mats = Vec::with_capacity(j.mats.len());
        for m in &j.mats {
            let rows = m
                .iter()
                .map(|row| row.iter().map(|&s| { let (r, i) = s.parts(); field.from_parts(r, i) }).collect())
                .collect::<Result<Vec<Vec<_>>>>()?;
            mats.push(Matrix::from_rows(&rows)?);
        }
        Weights::new(field, arch, mats)
    }
}

impl<F: JsonScalar> RationalTuple<F> {
    pub fn to_json(&self) -> TupleJson {
        TupleJson {
            numerators: self.numerators.iter().map(|p| p.to_json()).collect(),
            denominator: self.denominator.to_json(),
        }
    }

    pub fn from_json(field: F, j: &TupleJson) -> Result<Self> {
        let numerators = j.numerators.iter().map(|p| HomPoly::from_json(field.clone(), p)).collect::<Result<Vec<_>>>()?;
        let denominator = HomPoly::from_json(field, &j.denominator)?;
        if numerators.iter().any(|p| p.nvars() != denominator.nvars()) {
            return Err(Error::NvarsMismatch(denominator.nvars(), numerators[0].nvars()));
        }
        Ok(RationalTuple { numerators, denominator })
    }
}
