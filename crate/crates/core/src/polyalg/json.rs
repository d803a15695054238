use serde::{Deserialize, Serialize};

use super::{ExponentVector, HomPoly};
use crate::error::{Error, Result};
use crate::field::{Complex, Field, PrimeField, Real};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub re: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<f64>,
}

/// Wire format of a polynomial. Terms are listed leading (grlex-largest) first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub nvars: usize,
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

/// Fields whose scalars can be written as `(re, im)`.
pub trait JsonScalar: Field {
    fn to_parts(&self, c: Self::Elem) -> (f64, Option<f64>);
    fn from_parts(&self, re: f64, im: Option<f64>) -> Result<Self::Elem>;
    /// `"real"`, `"complex"` or `"gfp"`.
    fn tag(&self) -> &'static str;
    fn modulus(&self) -> Option<u64> {
        None
    }
}

impl JsonScalar for Real {
    fn to_parts(&self, c: f64) -> (f64, Option<f64>) {
        (c, None)
    }
    fn from_parts(&self, re: f64, im: Option<f64>) -> Result<f64> {
        match im {
            Some(v) if v != 0.0 => Err(Error::Json(format!("complex coefficient {re}+{v}i in a real polynomial"))),
            _ => Ok(re),
        }
    }
    fn tag(&self) -> &'static str {
        "real"
    }
}

impl JsonScalar for Complex {
    fn to_parts(&self, c: Complex64) -> (f64, Option<f64>) {
        (c.re, Some(c.im))
    }
    fn from_parts(&self, re: f64, im: Option<f64>) -> Result<Complex64> {
        Ok(Complex64::new(re, im.unwrap_or(0.0)))
    }
    fn tag(&self) -> &'static str {
        "complex"
    }
}

impl JsonScalar for PrimeField {
    fn to_parts(&self, c: u64) -> (f64, Option<f64>) {
        (self.to_signed(c) as f64, None)
    }
    fn from_parts(&self, re: f64, im: Option<f64>) -> Result<u64> {
        if re.fract() != 0.0 || im.is_some_and(|v| v != 0.0) {
            return Err(Error::Json(format!("non-integer coefficient {re} over GF(p)")));
        }
        Ok(self.from_i64(re as i64))
    }
    fn tag(&self) -> &'static str {
        "gfp"
    }
    fn modulus(&self) -> Option<u64> {
        Some(PrimeField::modulus(self))
    }
}

impl<F: JsonScalar> HomPoly<F> {
    pub fn to_json(&self) -> PolyJson {
        let terms = self
            .terms()
            .rev()
            .map(|(e, &c)| {
                let (re, im) = self.field().to_parts(c);
                TermJson { exp: e.exps().to_vec(), re, im }
            })
            .collect();
        PolyJson { nvars: self.nvars(), degree: self.degree(), terms }
    }

    pub fn from_json(field: F, j: &PolyJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            terms.push((ExponentVector::new(t.exp.clone()), field.from_parts(t.re, t.im)?));
        }
        HomPoly::from_terms(field, j.nvars, j.degree, terms)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("plain data")
    }

    pub fn from_json_str(field: F, s: &str) -> Result<Self> {
        Self::from_json(field, &serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip_and_order() {
        let f = Real::default();
        let p = HomPoly::linear(f, &[1.0, 1.0]).mul(&HomPoly::linear(f, &[1.0, -1.0])).unwrap();
        let s = p.to_json_string();
        assert_eq!(s, r#"{"nvars":2,"degree":2,"terms":[{"exp":[2,0],"re":1.0},{"exp":[0,2],"re":-1.0}]}"#);
        assert_eq!(HomPoly::from_json_str(f, &s).unwrap(), p);
    }

    #[test]
    fn complex_and_prime_round_trip() {
        let c = Complex::default();
        let p = HomPoly::linear(c, &[Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0)]);
        assert_eq!(HomPoly::from_json_str(c, &p.to_json_string()).unwrap(), p);
        let g = PrimeField::default();
        let q = HomPoly::linear(g, &[3, g.from_i64(-5)]);
        assert_eq!(HomPoly::from_json_str(g, &q.to_json_string()).unwrap(), q);
    }

    #[test]
    fn rejects_bad_degree() {
        let s = r#"{"nvars":2,"degree":2,"terms":[{"exp":[1,0],"re":1.0}]}"#;
        assert!(HomPoly::from_json_str(Real::default(), s).is_err());
    }
}
