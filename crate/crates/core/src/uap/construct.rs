//! Certificate constructors: polynomial phases, dual functions and Fourier
//! expansions, plus the duality audit.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::algebra::cert_promote;
use super::{Certificate, CertifiedFunction, Coefficient, NodeRef, Representation};
use crate::cyclic::{phase, GroupFunction, Polynomial, Quasiperiodic};
use crate::error::{Error, Result};
use crate::gowers::{fourier_coefficients, gowers_norm_with_tol};

struct PhaseCertifier {
    n: usize,
    cache: HashMap<(Polynomial, usize), Arc<CertifiedFunction>>,
}

impl PhaseCertifier {
    fn phase_function(&self, p: &Polynomial) -> GroupFunction {
        GroupFunction::from_fn(self.n, |x| phase(p.eval(x as u64, self.n), self.n)).expect("prime modulus")
    }

    /// Coefficient row entry for the phase difference `e((P(x+m) − P(x))/N)`.
    fn difference_coefficient(&mut self, p: &Polynomial, m: usize, order: usize) -> Coefficient {
        let diff = p.difference(m as u64, self.n);
        if diff.degree() == 0 {
            Coefficient::Constant(phase(diff.coefficients()[0], self.n))
        } else {
            Coefficient::Node(NodeRef::new(self.certify(&diff, order - 1)))
        }
    }

    /// Certificate of `e(P/N)` at the given order (`deg P ≤ order`), bound 1.
    fn certify(&mut self, p: &Polynomial, order: usize) -> Arc<CertifiedFunction> {
        if let Some(c) = self.cache.get(&(p.clone(), order)) {
            return c.clone();
        }
        let func = self.phase_function(p);
        let cert = if order == 0 {
            Certificate::Constant { bound: 1.0 }
        } else {
            let coeffs = (0..self.n)
                .map(|m| vec![self.difference_coefficient(p, m, order)])
                .collect();
            Certificate::Representation(Representation {
                order,
                bound: 1.0,
                weights: vec![1.0],
                columns: vec![func.clone()],
                coeffs,
            })
        };
        let node = Arc::new(CertifiedFunction { func, cert });
        self.cache.insert((p.clone(), order), node.clone());
        node
    }
}

/// Certificate of order `max_j deg P_j` and bound 1 for a quasiperiodic function.
///
/// Columns are `c_j e(P_j/N)`; coefficients are the phase differences
/// `e((P_j(x+n) − P_j(x))/N)`, certified recursively one order lower.
pub fn certify_quasiperiodic(q: &Quasiperiodic) -> Result<CertifiedFunction> {
    let n = q.function.modulus();
    if q.degree == 0 {
        return Ok(CertifiedFunction {
            func: q.function.clone(),
            cert: Certificate::Constant { bound: 1.0 },
        });
    }
    let mut certifier = PhaseCertifier { n, cache: HashMap::new() };
    let j = q.terms.len();
    let columns = q
        .terms
        .iter()
        .map(|t| certifier.phase_function(&t.poly).scale(t.coeff))
        .collect();
    let coeffs = (0..n)
        .map(|m| {
            q.terms
                .iter()
                .map(|t| certifier.difference_coefficient(&t.poly, m, q.degree))
                .collect()
        })
        .collect();
    Ok(CertifiedFunction {
        func: q.function.clone(),
        cert: Certificate::Representation(Representation {
            order: q.degree,
            bound: 1.0,
            weights: vec![1.0 / j as f64; j],
            columns,
            coeffs,
        }),
    })
}

/// Certificate of order `d − 1` and bound 1 for the dual function `D_d(f)`.
///
/// Uses `H = Z_N` with uniform weights, `g_h = T^h f` and
/// `c_{n,h} = T^n conj(D_{d−1}(f̄ T^{h−n} f))`; the sub-certificate for each
/// difference `h − n` is built once and referenced with a shift.
pub fn certify_dual(f: &GroupFunction, d: usize, node_budget: u64, tol: f64) -> Result<CertifiedFunction> {
    if d == 0 {
        return Err(Error::InvalidConfiguration("the dual certificate needs d >= 1".into()));
    }
    if !f.is_bounded(tol) {
        return Err(Error::Precondition(format!(
            "dual certificates need a bounded function (sup norm {})",
            f.linf_norm()
        )));
    }
    let n = f.modulus();
    let needed = (n as u64).checked_pow(d as u32 - 1).unwrap_or(u64::MAX);
    if needed > node_budget {
        return Err(Error::ResourceLimit(format!(
            "a dual certificate for N = {n}, d = {d} needs about {needed} nodes (budget {node_budget}); use a smaller N or d"
        )));
    }
    Ok(dual_node(f, d))
}

fn dual_node(f: &GroupFunction, d: usize) -> CertifiedFunction {
    let n = f.modulus();
    if d == 1 {
        return CertifiedFunction {
            func: GroupFunction::constant(n, f.expectation()).expect("prime modulus"),
            cert: Certificate::Constant { bound: 1.0 },
        };
    }
    let products: Vec<GroupFunction> = (0..n)
        .map(|u| f.conj().mul(&f.shift(u as i64)).expect("same modulus"))
        .collect();
    let subs: Vec<Arc<CertifiedFunction>> = products.iter().map(|p| Arc::new(dual_node(p, d - 1))).collect();
    let coefficient = |m: usize, h: usize| -> Coefficient {
        let u = (h + n - m) % n;
        if d == 2 {
            Coefficient::Constant(subs[u].func.at(0).conj())
        } else {
            Coefficient::Node(NodeRef {
                node: subs[u].clone(),
                shift: m,
                conj: true,
            })
        }
    };
    let coeffs: Vec<Vec<Coefficient>> = (0..n).map(|m| (0..n).map(|h| coefficient(m, h)).collect()).collect();
    let columns: Vec<GroupFunction> = (0..n).map(|h| f.shift(h as i64)).collect();
    let weight = 1.0 / n as f64;
    let func = GroupFunction::from_fn(n, |x| {
        crate::sum::sum_complex(
            coeffs[0]
                .iter()
                .zip(&columns)
                .map(|(c, g)| c.value(x) * g.at(x)),
        ) * weight
    })
    .expect("prime modulus");
    CertifiedFunction {
        func,
        cert: Certificate::Representation(Representation {
            order: d - 1,
            bound: 1.0,
            weights: vec![weight; n],
            columns,
            coeffs,
        }),
    }
}

/// Fourier-expansion certificate: order 1 with bound `Σ_ξ |f̂(ξ)|`, promoted to `order`.
///
/// Columns are the characters `x ↦ e(ξx/N)` rotated by the phase of `f̂(ξ)`,
/// weights are `|f̂(ξ)|/M` and the coefficients are the constants `e(ξn/N)`.
pub fn certify_wiener(f: &GroupFunction, order: usize, tol: f64) -> Result<CertifiedFunction> {
    let n = f.modulus();
    if order == 0 {
        let c = f.at(0);
        if f.values().iter().any(|v| (v - c).norm() > tol) {
            return Err(Error::Precondition("only constants have order-0 certificates".into()));
        }
        return CertifiedFunction::from_parts(f.clone(), Certificate::Constant { bound: c.norm() });
    }
    let hat = fourier_coefficients(f);
    let bound = crate::sum::sum_f64(hat.iter().map(|c| c.norm()));
    let support: Vec<usize> = (0..n).filter(|&xi| hat[xi].norm() > 0.0).collect();
    let rep = if support.is_empty() {
        Representation {
            order: 1,
            bound: 0.0,
            weights: vec![1.0],
            columns: vec![GroupFunction::zero(n)?],
            coeffs: vec![vec![Coefficient::Constant(Complex64::new(1.0, 0.0))]; n],
        }
    } else {
        let weights = support.iter().map(|&xi| hat[xi].norm() / bound).collect();
        let columns = support
            .iter()
            .map(|&xi| Ok(GroupFunction::character(n, xi)?.scale(hat[xi] / hat[xi].norm())))
            .collect::<Result<Vec<_>>>()?;
        let coeffs = (0..n)
            .map(|m| {
                support
                    .iter()
                    .map(|&xi| Coefficient::Constant(phase((xi * m) as u64, n)))
                    .collect()
            })
            .collect();
        Representation {
            order: 1,
            bound,
            weights,
            columns,
            coeffs,
        }
    };
    let first = CertifiedFunction::from_parts(f.clone(), Certificate::Representation(rep))?;
    cert_promote(&first, order)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DualityReport {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub gowers_norm: f64,
    pub certified_bound: f64,
    pub holds: bool,
}

/// Checks `|⟨f, F⟩| ≤ ‖f‖_{U^{k−1}} · M` for a certificate of order `k − 2`.
pub fn duality_audit(f: &GroupFunction, cf: &CertifiedFunction, tol: f64) -> Result<DualityReport> {
    let k = cf.order() + 2;
    let lhs = f.inner_product(cf.func())?.norm();
    let gowers_norm = gowers_norm_with_tol(f, k - 1, tol)?.value;
    let rhs = gowers_norm * cf.bound();
    Ok(DualityReport {
        k,
        lhs,
        rhs,
        gowers_norm,
        certified_bound: cf.bound(),
        holds: lhs <= rhs + tol,
    })
}

#[derive(Debug, Clone)]
pub struct CorrelationWitness {
    pub certified: CertifiedFunction,
    /// `‖f‖_{U^{k−1}}`.
    pub norm: f64,
    /// `|⟨f, F⟩|`.
    pub correlation: f64,
}

/// A bounded `F` of order `k − 2` with bound 1 and `|⟨f, F⟩| ≥ ε^{2^{k−1}}`.
pub fn lower_bound_correlation(
    f: &GroupFunction,
    k: usize,
    epsilon: f64,
    node_budget: u64,
    tol: f64,
) -> Result<CorrelationWitness> {
    if k < 2 {
        return Err(Error::InvalidConfiguration(format!("k must be at least 2, got {k}")));
    }
    let norm = gowers_norm_with_tol(f, k - 1, tol)?.value;
    if norm < epsilon {
        return Err(Error::NormTooSmall { measured: norm, epsilon });
    }
    let certified = certify_dual(f, k - 1, node_budget, tol)?;
    let correlation = f.inner_product(certified.func())?.norm();
    let power = 1i32 << (k - 1);
    if correlation < epsilon.powi(power) - tol {
        return Err(Error::NumericalInconsistency(format!(
            "dual correlation {correlation} is below ε^{power} = {}",
            epsilon.powi(power)
        )));
    }
    Ok(CorrelationWitness {
        certified,
        norm,
        correlation,
    })
}
