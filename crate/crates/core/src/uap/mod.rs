//! Certificates of uniform almost periodicity.
//!
//! A certificate of order `d ≥ 1` and bound `M` for `F` is a finite weighted
//! index set `H`, bounded columns `g_h` and coefficients `c_{n,h}` such that
//!
//! ```text
//! T^n F = M · Σ_h w_h · c_{n,h} · g_h        for every n ∈ Z_N,
//! ```
//!
//! where each coefficient is itself certified at order `d − 1` with bound at
//! most 1. Order-0 certificates are constants bounded in modulus by `M`.
//!
//! Coefficients refer to shared sub-certificates through [`NodeRef`], which
//! also carries a shift and a conjugation flag. This lets the dual-function
//! construction reuse one sub-certificate for every `n`.

mod algebra;
mod construct;
mod json;

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclic::GroupFunction;
use crate::error::{Error, Result};

pub use algebra::{cert_add, cert_conj, cert_multiply, cert_promote, cert_scale, cert_shift, cert_sum};
pub use construct::{
    certify_dual, certify_quasiperiodic, certify_wiener, duality_audit, lower_bound_correlation,
    CorrelationWitness, DualityReport,
};
pub use json::{CertificateJson, CoefficientJson, NodeJson};

/// `T^shift` applied to a shared certified function, optionally conjugated.
#[derive(Debug, Clone)]
pub struct NodeRef {
    pub node: Arc<CertifiedFunction>,
    pub shift: usize,
    pub conj: bool,
}

impl NodeRef {
    pub fn new(node: Arc<CertifiedFunction>) -> Self {
        Self { node, shift: 0, conj: false }
    }

    pub fn value(&self, x: usize) -> Complex64 {
        let v = self.node.func.at(x + self.shift);
        if self.conj {
            v.conj()
        } else {
            v
        }
    }

    pub fn bound(&self) -> f64 {
        self.node.bound()
    }

    /// The referenced function as an owned certified function.
    pub fn materialize(&self) -> CertifiedFunction {
        let shifted = cert_shift(&self.node, self.shift as i64);
        if self.conj {
            cert_conj(&shifted)
        } else {
            shifted
        }
    }
}

#[derive(Debug, Clone)]
pub enum Coefficient {
    /// A constant of modulus at most 1; valid at every level.
    Constant(Complex64),
    Node(NodeRef),
}

impl Coefficient {
    pub fn value(&self, x: usize) -> Complex64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Node(r) => r.value(x),
        }
    }

    pub fn bound(&self) -> f64 {
        match self {
            Coefficient::Constant(c) => c.norm(),
            Coefficient::Node(r) => r.bound(),
        }
    }

    pub(crate) fn conj(&self) -> Coefficient {
        match self {
            Coefficient::Constant(c) => Coefficient::Constant(c.conj()),
            Coefficient::Node(r) => Coefficient::Node(NodeRef {
                node: r.node.clone(),
                shift: r.shift,
                conj: !r.conj,
            }),
        }
    }
}

/// The data of an order `d ≥ 1` certificate.
#[derive(Debug, Clone)]
pub struct Representation {
    pub order: usize,
    pub bound: f64,
    pub weights: Vec<f64>,
    pub columns: Vec<GroupFunction>,
    /// `coeffs[n][h]` for `n ∈ 0..N`.
    pub coeffs: Vec<Vec<Coefficient>>,
}

#[derive(Debug, Clone)]
pub enum Certificate {
    Constant { bound: f64 },
    Representation(Representation),
}

/// A function together with a witness for its UAP bound.
#[derive(Debug, Clone)]
pub struct CertifiedFunction {
    func: GroupFunction,
    cert: Certificate,
}

impl CertifiedFunction {
    /// Constant function with an order-0 certificate.
    pub fn constant(n: usize, value: Complex64, bound: f64) -> Result<Self> {
        Ok(Self {
            func: GroupFunction::constant(n, value)?,
            cert: Certificate::Constant { bound },
        })
    }

    /// Assembles a certificate from raw parts; only the shape is checked here.
    pub fn from_parts(func: GroupFunction, cert: Certificate) -> Result<Self> {
        let n = func.modulus();
        if let Certificate::Representation(rep) = &cert {
            if rep.order == 0 {
                return Err(Error::Input("a representation must have order >= 1".into()));
            }
            let h = rep.weights.len();
            if rep.columns.len() != h || rep.coeffs.len() != n || rep.coeffs.iter().any(|row| row.len() != h) {
                return Err(Error::Input("certificate tables have inconsistent sizes".into()));
            }
            if let Some(c) = rep.columns.iter().find(|c| c.modulus() != n) {
                return Err(Error::Dimension {
                    expected: n,
                    found: c.modulus(),
                });
            }
        }
        Ok(Self { func, cert })
    }

    pub fn func(&self) -> &GroupFunction {
        &self.func
    }

    pub fn cert(&self) -> &Certificate {
        &self.cert
    }

    pub fn modulus(&self) -> usize {
        self.func.modulus()
    }

    pub fn order(&self) -> usize {
        match &self.cert {
            Certificate::Constant { .. } => 0,
            Certificate::Representation(r) => r.order,
        }
    }

    pub fn bound(&self) -> f64 {
        match &self.cert {
            Certificate::Constant { bound } => *bound,
            Certificate::Representation(r) => r.bound,
        }
    }

    pub fn representation(&self) -> Option<&Representation> {
        match &self.cert {
            Certificate::Representation(r) => Some(r),
            Certificate::Constant { .. } => None,
        }
    }

    pub fn index_count(&self) -> usize {
        self.representation().map_or(0, |r| r.weights.len())
    }

    pub fn into_parts(self) -> (GroupFunction, Certificate) {
        (self.func, self.cert)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationReport {
    pub max_reconstruction_error: f64,
    pub depth: usize,
    pub total_nodes: usize,
}

fn invalid(level: usize, n: usize, h: usize, reason: String) -> Error {
    Error::CertificateInvalid { level, n, h, reason }
}

/// Checks one node; returns its worst reconstruction error.
fn verify_node(cf: &CertifiedFunction, level: usize, tol: f64) -> Result<f64> {
    let n = cf.modulus();
    match &cf.cert {
        Certificate::Constant { bound } => {
            let c = cf.func.at(0);
            let spread = cf.func.values().iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
            if spread > tol {
                return Err(invalid(level, 0, 0, format!("order-0 function is not constant (spread {spread})")));
            }
            if c.norm() > bound + tol {
                return Err(invalid(level, 0, 0, format!("constant {} exceeds bound {bound}", c.norm())));
            }
            Ok(spread)
        }
        Certificate::Representation(rep) => {
            if !(rep.bound >= 0.0) || !rep.bound.is_finite() {
                return Err(invalid(level, 0, 0, format!("bound {} is not a finite non-negative number", rep.bound)));
            }
            if let Some(h) = rep.weights.iter().position(|&w| !(w >= -tol)) {
                return Err(invalid(level, 0, h, format!("negative weight {}", rep.weights[h])));
            }
            let total: f64 = crate::sum::sum_f64(rep.weights.iter().copied());
            if (total - 1.0).abs() > tol {
                return Err(invalid(level, 0, 0, format!("weights sum to {total}")));
            }
            if let Some(h) = rep.columns.iter().position(|g| !g.is_bounded(tol)) {
                return Err(invalid(level, 0, h, format!("column has sup norm {}", rep.columns[h].linf_norm())));
            }
            for (m, row) in rep.coeffs.iter().enumerate() {
                for (h, c) in row.iter().enumerate() {
                    if c.bound() > 1.0 + tol {
                        return Err(invalid(level, m, h, format!("coefficient bound {} > 1", c.bound())));
                    }
                    if let Coefficient::Node(r) = c {
                        if r.node.order() + 1 != rep.order {
                            return Err(invalid(
                                level,
                                m,
                                h,
                                format!("coefficient has order {} under an order-{} node", r.node.order(), rep.order),
                            ));
                        }
                        if r.node.modulus() != n {
                            return Err(invalid(level, m, h, "coefficient modulus differs".into()));
                        }
                    }
                    if rep.order == 1 {
                        if let Coefficient::Node(r) = c {
                            let v = r.value(0);
                            if (0..n).any(|x| (r.value(x) - v).norm() > tol) {
                                return Err(invalid(level, m, h, "order-1 coefficient is not constant".into()));
                            }
                        }
                    }
                }
            }
            // Reconstruction, in parallel over the shift n.
            let per_shift: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|m| {
                    let row = &rep.coeffs[m];
                    (0..n)
                        .map(|x| {
                            let mut acc = crate::sum::ComplexSum::default();
                            for (h, (c, g)) in row.iter().zip(&rep.columns).enumerate() {
                                acc.add(c.value(x) * g.at(x) * rep.weights[h]);
                            }
                            (cf.func.at(x + m) - acc.value() * rep.bound).norm()
                        })
                        .fold(0.0, f64::max)
                })
                .collect();
            let mut max_err = 0.0f64;
            for (m, &err) in per_shift.iter().enumerate() {
                if !(err <= tol) {
                    return Err(invalid(level, m, 0, format!("reconstruction error {err}")));
                }
                max_err = max_err.max(err);
            }
            Ok(max_err)
        }
    }
}

/// Recursively checks every invariant of a certificate tree.
pub fn verify_certificate(cf: &CertifiedFunction, tol: f64) -> Result<VerificationReport> {
    let mut seen: HashSet<*const CertifiedFunction> = HashSet::new();
    let mut queue: VecDeque<(&CertifiedFunction, usize)> = VecDeque::new();
    queue.push_back((cf, 0));
    seen.insert(cf as *const _);
    let mut max_err = 0.0f64;
    let mut depth = 0;
    while let Some((node, level)) = queue.pop_front() {
        if node.modulus() != cf.modulus() {
            return Err(invalid(level, 0, 0, "modulus differs from the root".into()));
        }
        max_err = max_err.max(verify_node(node, level, tol)?);
        depth = depth.max(level);
        if let Certificate::Representation(rep) = &node.cert {
            for row in &rep.coeffs {
                for c in row {
                    if let Coefficient::Node(r) = c {
                        let ptr = Arc::as_ptr(&r.node);
                        if seen.insert(ptr) {
                            queue.push_back((&r.node, level + 1));
                        }
                    }
                }
            }
        }
    }
    Ok(VerificationReport {
        max_reconstruction_error: max_err,
        depth: depth.max(cf.order()),
        total_nodes: seen.len(),
    })
}
