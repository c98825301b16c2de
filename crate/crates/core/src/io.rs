//! JSON wire formats for functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cyclic::{quasiperiodic, GroupFunction, Polynomial, QuasiTerm};
use crate::error::{Error, Result};

/// A double with 17 significant digits, enough to round-trip exactly.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub c: [f64; 2],
    pub poly: Vec<i64>,
}

/// `{"n","re","im"}`, `{"n","set"}` or `{"n","terms"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionJson {
    Dense {
        n: usize,
        re: Vec<f64>,
        #[serde(default)]
        im: Option<Vec<f64>>,
    },
    Indicator {
        n: usize,
        set: Vec<usize>,
    },
    Quasiperiodic {
        n: usize,
        terms: Vec<TermJson>,
    },
}

impl FunctionJson {
    pub fn from_function(f: &GroupFunction) -> Self {
        FunctionJson::Dense {
            n: f.modulus(),
            re: f.values().iter().map(|v| v.re).collect(),
            im: Some(f.values().iter().map(|v| v.im).collect()),
        }
    }

    pub fn to_function(&self) -> Result<GroupFunction> {
        match self {
            FunctionJson::Dense { n, re, im } => {
                let im = match im {
                    Some(im) if im.len() != re.len() => {
                        return Err(Error::Input("re and im have different lengths".into()))
                    }
                    Some(im) => im.clone(),
                    None => vec![0.0; re.len()],
                };
                GroupFunction::new(*n, re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect())
            }
            FunctionJson::Indicator { n, set } => {
                if let Some(&x) = set.iter().find(|&&x| x >= *n) {
                    return Err(Error::Input(format!("residue {x} is outside Z_{n}")));
                }
                GroupFunction::indicator(*n, set)
            }
            FunctionJson::Quasiperiodic { n, .. } => Ok(quasiperiodic(*n, &self.terms()?)?.function),
        }
    }

    /// The terms of a quasiperiodic description, if this is one.
    pub fn terms(&self) -> Result<Vec<QuasiTerm>> {
        match self {
            FunctionJson::Quasiperiodic { n, terms } => Ok(terms
                .iter()
                .map(|t| QuasiTerm {
                    coeff: Complex64::new(t.c[0], t.c[1]),
                    poly: Polynomial::new(&t.poly, *n),
                })
                .collect()),
            _ => Err(Error::Input("not a quasiperiodic description".into())),
        }
    }
}
