//! Functions on the cyclic group Z_N for prime N.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{mean_complex, sum_f64};

/// Default comparison tolerance used throughout the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Reduces an arbitrary integer into `0..n`.
pub fn residue(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

/// `e(a / n) = exp(2πi a / n)` with `a` reduced modulo `n` first.
pub fn phase(a: u64, n: usize) -> Complex64 {
    let a = a % n as u64;
    Complex64::from_polar(1.0, TAU * a as f64 / n as f64)
}

/// Modular inverse modulo a prime.
pub fn inverse_mod(a: usize, p: usize) -> Option<usize> {
    let a = a % p;
    if a == 0 {
        return None;
    }
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p as i64, a as i64);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    Some(t.rem_euclid(p as i64) as usize)
}

/// A complex-valued function on Z_N, stored densely.
#[derive(Clone, PartialEq)]
pub struct GroupFunction {
    n: usize,
    values: Vec<Complex64>,
}

impl fmt::Debug for GroupFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupFunction")
            .field("n", &self.n)
            .field("values", &self.values)
            .finish()
    }
}

impl GroupFunction {
    pub fn new(n: usize, values: Vec<Complex64>) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::NotPrime(n));
        }
        if values.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: values.len(),
            });
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> Complex64) -> Result<Self> {
        Self::new(n, (0..n).map(f).collect())
    }

    pub fn from_fn_mut(n: usize, f: impl FnMut(usize) -> Complex64) -> Result<Self> {
        Self::new(n, (0..n).map(f).collect())
    }

    pub fn from_real(n: usize, values: &[f64]) -> Result<Self> {
        Self::new(n, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        Self::new(n, vec![c; n])
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::constant(n, Complex64::new(0.0, 0.0))
    }

    /// Indicator of a set of residues; entries are reduced modulo `n`.
    pub fn indicator(n: usize, set: &[usize]) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        if n > 0 {
            for &x in set {
                values[x % n] = Complex64::new(1.0, 0.0);
            }
        }
        Self::new(n, values)
    }

    /// The character `x ↦ e(ξx/N)`.
    pub fn character(n: usize, xi: usize) -> Result<Self> {
        Self::from_fn(n, |x| phase((xi * x) as u64, n))
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, x: usize) -> Complex64 {
        self.values[x % self.n]
    }

    pub(crate) fn check_same(&self, other: &GroupFunction) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// `T^k f(x) = f(x + k)`.
    pub fn shift(&self, k: i64) -> GroupFunction {
        let s = residue(k, self.n);
        let values = (0..self.n).map(|x| self.values[(x + s) % self.n]).collect();
        GroupFunction { n: self.n, values }
    }

    /// `f_λ(x) = f(x / λ)`.
    pub fn dilate(&self, lambda: i64) -> Result<GroupFunction> {
        let inv = inverse_mod(residue(lambda, self.n), self.n).ok_or(Error::InvalidDilation(lambda))?;
        let values = (0..self.n).map(|x| self.values[(x * inv) % self.n]).collect();
        Ok(GroupFunction { n: self.n, values })
    }

    pub fn expectation(&self) -> Complex64 {
        mean_complex(self.values.iter().copied())
    }

    /// Average over a subset of residues (duplicates are ignored).
    pub fn expectation_on(&self, set: &[usize]) -> Result<Complex64> {
        let mut members = vec![false; self.n];
        for &x in set {
            members[x % self.n] = true;
        }
        if !members.iter().any(|&m| m) {
            return Err(Error::EmptyDomain);
        }
        Ok(mean_complex(
            (0..self.n).filter(|&x| members[x]).map(|x| self.values[x]),
        ))
    }

    /// `⟨f, g⟩ = E(f ḡ)`.
    pub fn inner_product(&self, other: &GroupFunction) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(mean_complex(
            self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()),
        ))
    }

    pub fn l2_norm(&self) -> f64 {
        (sum_f64(self.values.iter().map(|v| v.norm_sqr())) / self.n as f64).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_bounded(&self, tol: f64) -> bool {
        self.linf_norm() <= 1.0 + tol
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GroupFunction {
        GroupFunction {
            n: self.n,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn conj(&self) -> GroupFunction {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, c: Complex64) -> GroupFunction {
        self.map(|v| v * c)
    }

    fn zip_with(
        &self,
        other: &GroupFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<GroupFunction> {
        self.check_same(other)?;
        Ok(GroupFunction {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn mul(&self, other: &GroupFunction) -> Result<GroupFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &GroupFunction) -> Result<GroupFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GroupFunction) -> Result<GroupFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest pointwise distance to another function.
    pub fn max_distance(&self, other: &GroupFunction) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn l2_distance(&self, other: &GroupFunction) -> Result<f64> {
        Ok(self.sub(other)?.l2_norm())
    }
}

/// A polynomial with coefficients in Z_N, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<u64>,
}

impl Polynomial {
    /// Builds a polynomial and reduces its coefficients modulo `n`.
    pub fn new(coeffs: &[i64], n: usize) -> Self {
        let mut coeffs: Vec<u64> = coeffs.iter().map(|&a| residue(a, n) as u64).collect();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    /// Degree of the reduced polynomial; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation in Z_N.
    pub fn eval(&self, x: u64, n: usize) -> u64 {
        let n = n as u128;
        let x = x as u128 % n;
        self.coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, &a| (acc * x + a as u128) % n) as u64
    }

    /// The polynomial `x ↦ P(x + s) − P(x)`.
    pub fn difference(&self, s: u64, n: usize) -> Polynomial {
        let m = n as u128;
        let s = s as u128 % m;
        // Horner on polynomials: acc ← acc·(x + s) + a_i.
        let mut acc: Vec<u128> = vec![0];
        for &a in self.coeffs.iter().rev() {
            let mut next = vec![0u128; acc.len() + 1];
            for (i, &c) in acc.iter().enumerate() {
                next[i + 1] = (next[i + 1] + c) % m;
                next[i] = (next[i] + c * s) % m;
            }
            next[0] = (next[0] + a as u128) % m;
            acc = next;
        }
        let diff: Vec<i64> = acc
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let own = self.coeffs.get(i).copied().unwrap_or(0) as u128;
                ((c + m - own) % m) as i64
            })
            .collect();
        Polynomial::new(&diff, n)
    }
}

/// One summand `c · e(P(x)/N)` of a quasiperiodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiTerm {
    pub coeff: Complex64,
    pub poly: Polynomial,
}

/// `F(x) = (1/J) Σ_j c_j e(P_j(x)/N)` together with `max_j deg P_j`.
#[derive(Debug, Clone)]
pub struct Quasiperiodic {
    pub function: GroupFunction,
    pub degree: usize,
    pub terms: Vec<QuasiTerm>,
}

pub fn quasiperiodic(n: usize, terms: &[QuasiTerm]) -> Result<Quasiperiodic> {
    if !is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    if terms.is_empty() {
        return Err(Error::Input("a quasiperiodic function needs at least one term".into()));
    }
    for (index, t) in terms.iter().enumerate() {
        let modulus = t.coeff.norm();
        if modulus > 1.0 + DEFAULT_TOL {
            return Err(Error::InvalidCoefficient { index, modulus });
        }
    }
    let function = GroupFunction::from_fn(n, |x| {
        mean_complex(
            terms
                .iter()
                .map(|t| t.coeff * phase(t.poly.eval(x as u64, n), n)),
        )
    })?;
    let degree = terms.iter().map(|t| t.poly.degree()).max().unwrap_or(0);
    Ok(Quasiperiodic {
        function,
        degree,
        terms: terms.to_vec(),
    })
}

/// A subset of `{1..N}` transplanted into Z_{N′}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Embedding {
    pub modulus: usize,
    pub set: Vec<usize>,
}

/// Places `A ⊆ {1..N}` inside Z_{N′} where N′ is the least prime in `(kN, 2kN]`.
pub fn embed_interval(set: &[usize], n: usize, k: usize) -> Result<Embedding> {
    if n == 0 || k == 0 {
        return Err(Error::Input("embed_interval needs N >= 1 and k >= 1".into()));
    }
    if let Some(&bad) = set.iter().find(|&&a| a == 0 || a > n) {
        return Err(Error::Input(format!("element {bad} is outside 1..={n}")));
    }
    let modulus = (k * n + 1..=2 * k * n)
        .find(|&p| is_prime(p))
        .expect("Bertrand's postulate");
    let mut image: Vec<usize> = set.iter().map(|&a| a % modulus).collect();
    image.sort_unstable();
    image.dedup();
    Ok(Embedding { modulus, set: image })
}

/// A complexity bound: a non-negative real or +∞.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Complexity(f64);

impl Complexity {
    pub const INFINITE: Complexity = Complexity(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::Input(format!("complexity must be >= 0, got {value}")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn primality() {
        let primes: Vec<usize> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
    }

    #[test]
    fn rejects_composite_and_wrong_length() {
        assert!(matches!(GroupFunction::zero(6), Err(Error::NotPrime(6))));
        assert!(matches!(
            GroupFunction::new(5, vec![c(0.0); 4]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn shift_examples() {
        let f = GroupFunction::from_fn(7, |x| c(x as f64 * x as f64)).unwrap();
        assert_eq!(f.shift(0), f);
        assert_eq!(f.shift(2).shift(3), f.shift(5));
        assert_eq!(f.shift(-2), f.shift(5));
        let delta = GroupFunction::indicator(5, &[0]).unwrap();
        assert_eq!(delta.shift(1), GroupFunction::indicator(5, &[4]).unwrap());
    }

    #[test]
    fn dilate_examples() {
        let f = GroupFunction::from_fn(7, |x| c(x as f64)).unwrap();
        assert_eq!(f.dilate(1).unwrap(), f);
        assert_eq!(
            GroupFunction::indicator(5, &[2]).unwrap().dilate(2).unwrap(),
            GroupFunction::indicator(5, &[4]).unwrap()
        );
        assert_eq!(f.dilate(2).unwrap().dilate(3).unwrap(), f.dilate(6).unwrap());
        assert!(matches!(f.dilate(14), Err(Error::InvalidDilation(14))));
    }

    #[test]
    fn expectation_examples() {
        let k = GroupFunction::constant(5, Complex64::new(0.3, -0.2)).unwrap();
        assert!((k.expectation() - Complex64::new(0.3, -0.2)).norm() < 1e-15);
        let ind = GroupFunction::indicator(5, &[0, 1]).unwrap();
        assert!((ind.expectation() - c(0.4)).norm() < 1e-15);
        assert!(GroupFunction::character(7, 1).unwrap().expectation().norm() < 1e-12);
        assert!(matches!(ind.expectation_on(&[]), Err(Error::EmptyDomain)));
        assert!((ind.expectation_on(&[1, 2]).unwrap() - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn inner_product_examples() {
        let one = GroupFunction::constant(5, c(1.0)).unwrap();
        assert!((one.inner_product(&one).unwrap() - c(1.0)).norm() < 1e-15);
        let a = GroupFunction::indicator(5, &[0]).unwrap();
        let b = GroupFunction::indicator(5, &[1]).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0));
        let other = GroupFunction::zero(7).unwrap();
        assert!(matches!(a.inner_product(&other), Err(Error::Dimension { .. })));
    }

    #[test]
    fn polynomial_horner_and_difference() {
        let p = Polynomial::new(&[1, 2, 3], 7);
        assert_eq!(p.eval(2, 7), (1 + 4 + 12) % 7);
        assert_eq!(Polynomial::new(&[0, 0, 7], 7).degree(), 0);
        for s in 0..7u64 {
            let q = p.difference(s, 7);
            assert!(q.degree() <= 1);
            for x in 0..7u64 {
                let lhs = q.eval(x, 7);
                let rhs = (p.eval(x + s, 7) + 7 - p.eval(x, 7)) % 7;
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn quasiperiodic_examples() {
        let one = quasiperiodic(5, &[QuasiTerm { coeff: c(1.0), poly: Polynomial::new(&[0], 5) }]).unwrap();
        assert_eq!(one.function, GroupFunction::constant(5, c(1.0)).unwrap());
        assert_eq!(one.degree, 0);

        let lin = quasiperiodic(5, &[QuasiTerm { coeff: c(1.0), poly: Polynomial::new(&[0, 1], 5) }]).unwrap();
        for x in 0..5 {
            assert!((lin.function.at(x) - phase(x as u64, 5)).norm() < 1e-15);
        }

        let two = quasiperiodic(
            7,
            &[
                QuasiTerm { coeff: c(1.0), poly: Polynomial::new(&[0, 1], 7) },
                QuasiTerm { coeff: c(1.0), poly: Polynomial::new(&[0, 0, 1], 7) },
            ],
        )
        .unwrap();
        assert_eq!(two.degree, 2);
        for x in 0..7u64 {
            let expected = (phase(x, 7) + phase(x * x, 7)) / 2.0;
            assert!((two.function.at(x as usize) - expected).norm() < 1e-15);
        }

        let bad = quasiperiodic(5, &[QuasiTerm { coeff: c(1.5), poly: Polynomial::new(&[0], 5) }]);
        assert!(matches!(bad, Err(Error::InvalidCoefficient { index: 0, .. })));
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embed_interval(&[1, 5], 10, 3).unwrap().modulus, 31);
        assert_eq!(embed_interval(&[1, 2], 4, 2).unwrap().modulus, 11);
        assert_eq!(embed_interval(&[1], 9, 5).unwrap().set.len(), 1);
        assert_eq!(embed_interval(&[1], 1, 1).unwrap().modulus, 2);
        assert!(embed_interval(&[0], 4, 2).is_err());
    }

    #[test]
    fn complexity_rejects_negative() {
        assert!(Complexity::new(-1.0).is_err());
        assert!(!Complexity::INFINITE.is_finite());
        assert_eq!(Complexity::new(2.5).unwrap().value(), 2.5);
    }
}
