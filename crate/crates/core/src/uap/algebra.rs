//! Closure operations on certificates: shifts, conjugation, scaling, convex
//! combinations, sums, products and promotion to higher order.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::{Certificate, CertifiedFunction, Coefficient, NodeRef, Representation};
use crate::cyclic::{residue, GroupFunction};
use crate::error::{Error, Result};

fn check_compatible(a: &CertifiedFunction, b: &CertifiedFunction) -> Result<()> {
    if a.modulus() != b.modulus() {
        return Err(Error::Dimension {
            expected: a.modulus(),
            found: b.modulus(),
        });
    }
    if a.order() != b.order() {
        return Err(Error::OrderMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    Ok(())
}

/// Certificate for `T^k F`: coefficient rows are re-indexed, `c′_{m,h} = c_{m+k,h}`.
pub fn cert_shift(a: &CertifiedFunction, k: i64) -> CertifiedFunction {
    let n = a.modulus();
    let s = residue(k, n);
    let func = a.func.shift(k);
    let cert = match &a.cert {
        Certificate::Constant { bound } => Certificate::Constant { bound: *bound },
        Certificate::Representation(rep) => Certificate::Representation(Representation {
            coeffs: (0..n).map(|m| rep.coeffs[(m + s) % n].clone()).collect(),
            ..rep.clone()
        }),
    };
    CertifiedFunction { func, cert }
}

/// Certificate for `F̄`: columns and coefficients are conjugated.
pub fn cert_conj(a: &CertifiedFunction) -> CertifiedFunction {
    let func = a.func.conj();
    let cert = match &a.cert {
        Certificate::Constant { bound } => Certificate::Constant { bound: *bound },
        Certificate::Representation(rep) => Certificate::Representation(Representation {
            order: rep.order,
            bound: rep.bound,
            weights: rep.weights.clone(),
            columns: rep.columns.iter().map(GroupFunction::conj).collect(),
            coeffs: rep
                .coeffs
                .iter()
                .map(|row| row.iter().map(Coefficient::conj).collect())
                .collect(),
        }),
    };
    CertifiedFunction { func, cert }
}

/// Certificate for `λF` with bound `|λ|·M`; the phase of `λ` moves into the columns.
pub fn cert_scale(a: &CertifiedFunction, lambda: Complex64) -> CertifiedFunction {
    let func = a.func.scale(lambda);
    let modulus = lambda.norm();
    let cert = match &a.cert {
        Certificate::Constant { bound } => Certificate::Constant { bound: bound * modulus },
        Certificate::Representation(rep) => {
            let unit = if modulus > 0.0 { lambda / modulus } else { Complex64::new(1.0, 0.0) };
            Certificate::Representation(Representation {
                order: rep.order,
                bound: rep.bound * modulus,
                weights: rep.weights.clone(),
                columns: rep.columns.iter().map(|g| g.scale(unit)).collect(),
                coeffs: rep.coeffs.clone(),
            })
        }
    };
    CertifiedFunction { func, cert }
}

fn concatenate(
    a: &Representation,
    b: &Representation,
    weight_a: f64,
    weight_b: f64,
    column_scale_a: f64,
    column_scale_b: f64,
    bound: f64,
) -> Representation {
    let scale = |cols: &[GroupFunction], s: f64| -> Vec<GroupFunction> {
        cols.iter().map(|g| g.scale(Complex64::new(s, 0.0))).collect()
    };
    let mut columns = scale(&a.columns, column_scale_a);
    columns.extend(scale(&b.columns, column_scale_b));
    Representation {
        order: a.order,
        bound,
        weights: a
            .weights
            .iter()
            .map(|w| w * weight_a)
            .chain(b.weights.iter().map(|w| w * weight_b))
            .collect(),
        columns,
        coeffs: a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(ra, rb)| ra.iter().chain(rb).cloned().collect())
            .collect(),
    }
}

/// Certificate for `(1−θ)a + θb` with bound `max(M_a, M_b)`.
///
/// Both certificates are first rewritten with the common bound by shrinking
/// their columns, then their index sets are concatenated with mixed weights.
pub fn cert_add(a: &CertifiedFunction, b: &CertifiedFunction, theta: f64) -> Result<CertifiedFunction> {
    check_compatible(a, b)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Input(format!("mixing weight {theta} is outside [0, 1]")));
    }
    let func = a
        .func
        .scale(Complex64::new(1.0 - theta, 0.0))
        .add(&b.func.scale(Complex64::new(theta, 0.0)))?;
    let bound = a.bound().max(b.bound());
    let cert = match (&a.cert, &b.cert) {
        (Certificate::Representation(ra), Certificate::Representation(rb)) => {
            let shrink = |m: f64| if bound > 0.0 { m / bound } else { 1.0 };
            Certificate::Representation(concatenate(
                ra,
                rb,
                1.0 - theta,
                theta,
                shrink(ra.bound),
                shrink(rb.bound),
                bound,
            ))
        }
        _ => Certificate::Constant { bound },
    };
    Ok(CertifiedFunction { func, cert })
}

/// Certificate for `a + b` with bound `M_a + M_b`, via `θ = M_b / (M_a + M_b)`.
pub fn cert_sum(a: &CertifiedFunction, b: &CertifiedFunction) -> Result<CertifiedFunction> {
    check_compatible(a, b)?;
    let func = a.func.add(&b.func)?;
    let bound = a.bound() + b.bound();
    let theta = if bound > 0.0 { b.bound() / bound } else { 0.5 };
    let cert = match (&a.cert, &b.cert) {
        (Certificate::Representation(ra), Certificate::Representation(rb)) => {
            Certificate::Representation(concatenate(ra, rb, 1.0 - theta, theta, 1.0, 1.0, bound))
        }
        _ => Certificate::Constant { bound },
    };
    Ok(CertifiedFunction { func, cert })
}

type ProductKey = (usize, usize, usize, bool);

struct Multiplier {
    n: usize,
    memo: HashMap<ProductKey, Arc<CertifiedFunction>>,
    scaled: HashMap<(usize, u64, u64), Arc<CertifiedFunction>>,
}

impl Multiplier {
    fn product(&mut self, a: &CertifiedFunction, b: &CertifiedFunction) -> Result<CertifiedFunction> {
        check_compatible(a, b)?;
        let func = a.func.mul(&b.func)?;
        let bound = a.bound() * b.bound();
        let cert = match (&a.cert, &b.cert) {
            (Certificate::Representation(ra), Certificate::Representation(rb)) => {
                let hb = rb.weights.len();
                let mut weights = Vec::with_capacity(ra.weights.len() * hb);
                let mut columns = Vec::with_capacity(ra.weights.len() * hb);
                for (wa, ga) in ra.weights.iter().zip(&ra.columns) {
                    for (wb, gb) in rb.weights.iter().zip(&rb.columns) {
                        weights.push(wa * wb);
                        columns.push(ga.mul(gb)?);
                    }
                }
                let mut coeffs = Vec::with_capacity(self.n);
                for (row_a, row_b) in ra.coeffs.iter().zip(&rb.coeffs) {
                    let mut row = Vec::with_capacity(row_a.len() * hb);
                    for ca in row_a {
                        for cb in row_b {
                            row.push(self.coefficient(ca, cb)?);
                        }
                    }
                    coeffs.push(row);
                }
                Certificate::Representation(Representation {
                    order: ra.order,
                    bound,
                    weights,
                    columns,
                    coeffs,
                })
            }
            _ => Certificate::Constant { bound },
        };
        Ok(CertifiedFunction { func, cert })
    }

    fn scaled_ref(&mut self, r: &NodeRef, c: Complex64) -> Coefficient {
        if c == Complex64::new(0.0, 0.0) {
            return Coefficient::Constant(c);
        }
        // conj?(T^s F) · c = conj?(T^s (F · c′)) with c′ = conj?(c).
        let inner = if r.conj { c.conj() } else { c };
        let key = (Arc::as_ptr(&r.node) as usize, inner.re.to_bits(), inner.im.to_bits());
        let node = self
            .scaled
            .entry(key)
            .or_insert_with(|| Arc::new(cert_scale(&r.node, inner)))
            .clone();
        Coefficient::Node(NodeRef {
            node,
            shift: r.shift,
            conj: r.conj,
        })
    }

    fn coefficient(&mut self, a: &Coefficient, b: &Coefficient) -> Result<Coefficient> {
        Ok(match (a, b) {
            (Coefficient::Constant(x), Coefficient::Constant(y)) => Coefficient::Constant(x * y),
            (Coefficient::Constant(x), Coefficient::Node(r)) | (Coefficient::Node(r), Coefficient::Constant(x)) => {
                self.scaled_ref(r, *x)
            }
            (Coefficient::Node(ra), Coefficient::Node(rb)) => {
                // conj₁?(T^{s₁}F) · conj₂?(T^{s₂}G) = conj₁?(T^{s₁}(F · T^{s₂−s₁} G′))
                // where G′ is G conjugated iff exactly one flag is set.
                let delta = (rb.shift + self.n - ra.shift) % self.n;
                let flip = ra.conj ^ rb.conj;
                let key = (
                    Arc::as_ptr(&ra.node) as usize,
                    Arc::as_ptr(&rb.node) as usize,
                    delta,
                    flip,
                );
                let node = match self.memo.get(&key) {
                    Some(node) => node.clone(),
                    None => {
                        let other = NodeRef {
                            node: rb.node.clone(),
                            shift: delta,
                            conj: flip,
                        }
                        .materialize();
                        let node = Arc::new(self.product(&ra.node, &other)?);
                        self.memo.insert(key, node.clone());
                        node
                    }
                };
                Coefficient::Node(NodeRef {
                    node,
                    shift: ra.shift,
                    conj: ra.conj,
                })
            }
        })
    }
}

/// Certificate for the pointwise product over the product index set, bound `M_a·M_b`.
pub fn cert_multiply(a: &CertifiedFunction, b: &CertifiedFunction) -> Result<CertifiedFunction> {
    let mut m = Multiplier {
        n: a.modulus(),
        memo: HashMap::new(),
        scaled: HashMap::new(),
    };
    m.product(a, b)
}

fn wrap_one_level(a: &CertifiedFunction) -> CertifiedFunction {
    let n = a.modulus();
    let bound = a.bound();
    let coeffs: Vec<Vec<Coefficient>> = if bound == 0.0 {
        vec![vec![Coefficient::Constant(Complex64::new(0.0, 0.0))]; n]
    } else if a.order() == 0 {
        vec![vec![Coefficient::Constant(a.func.at(0) / bound)]; n]
    } else {
        let unit = Arc::new(cert_scale(a, Complex64::new(1.0 / bound, 0.0)));
        (0..n)
            .map(|m| {
                vec![Coefficient::Node(NodeRef {
                    node: unit.clone(),
                    shift: m,
                    conj: false,
                })]
            })
            .collect()
    };
    CertifiedFunction {
        func: a.func.clone(),
        cert: Certificate::Representation(Representation {
            order: a.order() + 1,
            bound,
            weights: vec![1.0],
            columns: vec![GroupFunction::constant(n, Complex64::new(1.0, 0.0)).expect("same modulus")],
            coeffs,
        }),
    }
}

/// Re-expresses an order-`d` certificate at order `target ≥ d`, keeping the bound.
pub fn cert_promote(a: &CertifiedFunction, target: usize) -> Result<CertifiedFunction> {
    if target < a.order() {
        return Err(Error::OrderMismatch {
            left: a.order(),
            right: target,
        });
    }
    let mut current = a.clone();
    while current.order() < target {
        current = wrap_one_level(&current);
    }
    Ok(current)
}
