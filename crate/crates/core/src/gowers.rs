//! Gowers uniformity norms, dual functions and the generalised von Neumann check.
//!
//! Norms are evaluated through the power functional
//! `S_0(f) = E f`, `S_d(f) = E_h S_{d-1}(f̄ · T^h f)`, so that
//! `‖f‖_{U^d} = S_d(f)^{1/2^d}` with a single root at the end. The base case
//! `S_1(g) = |E g|²` (van der Corput) brings the cost down to `O(N^d)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclic::{phase, GroupFunction, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::sum::{mean_complex, sum_complex, ComplexSum};

/// Work size above which the outer `h` loop is spread over the thread pool.
const PARALLEL_THRESHOLD: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GowersNorm {
    pub order: usize,
    /// `‖f‖_{U^d}` for `d ≥ 1`; `|E f|` for `d = 0`.
    pub value: f64,
    /// `E f` when `d = 0`.
    pub u0_value: Option<Complex64>,
    /// The power functional `S_d(f)` before the root was taken.
    pub power: Complex64,
}

fn conj_times_shift(f: &[Complex64], h: usize) -> Vec<Complex64> {
    let n = f.len();
    (0..n).map(|x| f[x].conj() * f[(x + h) % n]).collect()
}

fn power_functional(f: &[Complex64], d: usize) -> Complex64 {
    match d {
        0 => mean_complex(f.iter().copied()),
        1 => Complex64::new(mean_complex(f.iter().copied()).norm_sqr(), 0.0),
        _ => mean_complex((0..f.len()).map(|h| power_functional(&conj_times_shift(f, h), d - 1))),
    }
}

fn power_functional_top(f: &[Complex64], d: usize) -> Complex64 {
    let n = f.len();
    if d >= 2 && n.saturating_pow(d as u32) >= PARALLEL_THRESHOLD {
        let parts: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|h| power_functional(&conj_times_shift(f, h), d - 1))
            .collect();
        sum_complex(parts) / n as f64
    } else {
        power_functional(f, d)
    }
}

/// Turns a power functional into a norm, checking that it is real and non-negative.
fn root_of_power(power: Complex64, d: usize, scale: f64, tol: f64) -> Result<f64> {
    let slack = tol * scale.max(1.0);
    if power.im.abs() > slack {
        return Err(Error::NumericalInconsistency(format!(
            "U^{d} power functional has imaginary part {}",
            power.im
        )));
    }
    if power.re < -slack {
        return Err(Error::NumericalInconsistency(format!(
            "U^{d} power functional is negative: {}",
            power.re
        )));
    }
    Ok(power.re.max(0.0).powf(1.0 / (1u64 << d) as f64))
}

pub fn gowers_norm(f: &GroupFunction, d: usize) -> Result<GowersNorm> {
    gowers_norm_with_tol(f, d, DEFAULT_TOL)
}

pub fn gowers_norm_with_tol(f: &GroupFunction, d: usize, tol: f64) -> Result<GowersNorm> {
    let power = power_functional_top(f.values(), d);
    if d == 0 {
        return Ok(GowersNorm {
            order: 0,
            value: power.norm(),
            u0_value: Some(power),
            power,
        });
    }
    let scale = f.linf_norm().powi(1 << d.min(30));
    let value = root_of_power(power, d, scale, tol)?;
    Ok(GowersNorm {
        order: d,
        value,
        u0_value: None,
        power,
    })
}

/// Cube-sum evaluation of `‖f‖_{U^d}`, used as an independent check for `d ≤ 3`.
pub fn gowers_norm_direct(f: &GroupFunction, d: usize) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedOrder { order: d, max: 3 });
    }
    let n = f.modulus();
    let v = f.values();
    let corners = 1usize << d;
    let mut acc = ComplexSum::default();
    let mut hs = vec![0usize; d];
    loop {
        for x in 0..n {
            let mut prod = Complex64::new(1.0, 0.0);
            for omega in 0..corners {
                let mut y = x;
                for (i, &h) in hs.iter().enumerate() {
                    if omega >> i & 1 == 1 {
                        y += h;
                    }
                }
                let value = v[y % n];
                prod *= if omega.count_ones() % 2 == 1 { value.conj() } else { value };
            }
            acc.add(prod);
        }
        // Odometer over (h_1, …, h_d).
        let mut i = 0;
        while i < d {
            hs[i] += 1;
            if hs[i] < n {
                break;
            }
            hs[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
    }
    let total = acc.value() / (n as f64).powi(d as i32 + 1);
    let scale = f.linf_norm().powi(corners as i32);
    root_of_power(total, d, scale, DEFAULT_TOL)
}

/// Fourier coefficients `f̂(ξ) = E_x f(x) e(−xξ/N)` by the direct transform.
pub fn fourier_coefficients(f: &GroupFunction) -> Vec<Complex64> {
    let n = f.modulus();
    (0..n)
        .map(|xi| {
            mean_complex(
                (0..n).map(|x| f.at(x) * phase(((n - xi % n) * x % n) as u64, n)),
            )
        })
        .collect()
}

/// `‖f‖_{U²}` as the ℓ⁴ norm of the Fourier coefficients.
pub fn gowers_u2_fourier(f: &GroupFunction) -> f64 {
    let fourth: Vec<f64> = fourier_coefficients(f)
        .iter()
        .map(|c| c.norm_sqr() * c.norm_sqr())
        .collect();
    crate::sum::sum_f64(fourth).powf(0.25)
}

fn dual_values(f: &[Complex64], d: usize) -> Vec<Complex64> {
    let n = f.len();
    match d {
        0 => vec![Complex64::new(1.0, 0.0); n],
        1 => vec![mean_complex(f.iter().copied()); n],
        _ => {
            let mut acc = vec![ComplexSum::default(); n];
            for h in 0..n {
                let inner = dual_values(&conj_times_shift(f, h), d - 1);
                for x in 0..n {
                    acc[x].add(inner[x].conj() * f[(x + h) % n]);
                }
            }
            acc.iter().map(|s| s.value() / n as f64).collect()
        }
    }
}

/// `D_0 f = 1`, `D_d f = E_h conj(D_{d-1}(f̄ T^h f)) · T^h f`.
pub fn dual_function(f: &GroupFunction, d: usize) -> GroupFunction {
    GroupFunction::new(f.modulus(), dual_values(f.values(), d))
        .expect("dual function keeps the modulus")
}

/// `E_{x,r} Π_j f_j(x + λ_j r)` over all of Z_N².
pub fn multilinear_average(fs: &[GroupFunction], lambdas: &[i64]) -> Result<Complex64> {
    if fs.is_empty() || fs.len() != lambdas.len() {
        return Err(Error::InvalidArity(format!(
            "{} functions and {} dilation factors",
            fs.len(),
            lambdas.len()
        )));
    }
    let n = fs[0].modulus();
    for f in &fs[1..] {
        fs[0].check_same(f)?;
    }
    let lambdas: Vec<usize> = lambdas.iter().map(|&l| crate::cyclic::residue(l, n)).collect();
    let mut acc = ComplexSum::default();
    for r in 0..n {
        for x in 0..n {
            let mut prod = Complex64::new(1.0, 0.0);
            for (f, &l) in fs.iter().zip(&lambdas) {
                prod *= f.at(x + l * r % n);
            }
            acc.add(prod);
        }
    }
    Ok(acc.value() / (n * n) as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct VonNeumannReport {
    pub lhs: f64,
    pub rhs: f64,
    pub norms: Vec<f64>,
    pub holds: bool,
}

/// Checks `|E_{x,r} Π_j T^{λ_j r} f_j| ≤ min_j ‖f_j‖_{U^{k−1}}` for distinct `λ_j`.
pub fn von_neumann_check(fs: &[GroupFunction], lambdas: &[i64], tol: f64) -> Result<VonNeumannReport> {
    if fs.is_empty() || fs.len() != lambdas.len() {
        return Err(Error::InvalidArity(format!(
            "{} functions and {} dilation factors",
            fs.len(),
            lambdas.len()
        )));
    }
    let n = fs[0].modulus();
    let mut seen = vec![false; n];
    for &l in lambdas {
        let r = crate::cyclic::residue(l, n);
        if std::mem::replace(&mut seen[r], true) {
            return Err(Error::InvalidConfiguration(format!(
                "dilation factor {l} repeats modulo {n}"
            )));
        }
    }
    for (j, f) in fs.iter().enumerate() {
        if !f.is_bounded(tol) {
            return Err(Error::Precondition(format!(
                "function {j} has sup norm {} > 1",
                f.linf_norm()
            )));
        }
    }
    let lhs = multilinear_average(fs, lambdas)?.norm();
    let norms = fs
        .iter()
        .map(|f| gowers_norm_with_tol(f, fs.len() - 1, tol).map(|g| g.value))
        .collect::<Result<Vec<_>>>()?;
    let rhs = norms.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(VonNeumannReport {
        lhs,
        rhs,
        norms,
        holds: lhs <= rhs + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_bounded;

    fn one(n: usize) -> GroupFunction {
        GroupFunction::constant(n, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn constants_have_unit_norm() {
        for d in 0..=4 {
            assert!((gowers_norm(&one(7), d).unwrap().value - 1.0).abs() < 1e-12);
        }
        assert!((gowers_norm_direct(&one(5), 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_phase_norms() {
        let f = GroupFunction::from_fn(7, |x| phase((x * x) as u64, 7)).unwrap();
        assert!((gowers_norm(&f, 3).unwrap().value - 1.0).abs() < 1e-9);
        // Gauss sums have modulus √N, so ‖f‖_{U²}⁴ = Σ|f̂|⁴ = 1/N.
        assert!((gowers_norm(&f, 2).unwrap().value - 7f64.powf(-0.25)).abs() < 1e-9);
    }

    #[test]
    fn linear_phase_has_zero_u1() {
        let f = GroupFunction::character(7, 1).unwrap();
        assert!(gowers_norm(&f, 1).unwrap().value < 1e-9);
    }

    #[test]
    fn u0_is_the_mean() {
        let f = GroupFunction::from_real(5, &[1.0, -1.0, 0.5, 0.0, 0.0]).unwrap();
        let g = gowers_norm(&f, 0).unwrap();
        assert!((g.u0_value.unwrap() - Complex64::new(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn direct_oracle_agrees() {
        let f = GroupFunction::indicator(5, &[0]).unwrap();
        assert!((gowers_norm_direct(&f, 1).unwrap() - 0.2).abs() < 1e-12);
        for seed in 0..10 {
            let f = random_bounded(5, seed);
            for d in 1..=3 {
                let a = gowers_norm(&f, d).unwrap().value;
                let b = gowers_norm_direct(&f, d).unwrap();
                assert!((a - b).abs() < 1e-9, "d={d}: {a} vs {b}");
            }
        }
        let f = random_bounded(7, 99);
        let a = gowers_norm(&f, 3).unwrap().value;
        assert!((a - gowers_norm_direct(&f, 3).unwrap()).abs() < 1e-9);
        assert!(matches!(
            gowers_norm_direct(&f, 4),
            Err(Error::UnsupportedOrder { order: 4, .. })
        ));
    }

    #[test]
    fn fourier_oracle_agrees() {
        assert!((gowers_u2_fourier(&GroupFunction::character(11, 3).unwrap()) - 1.0).abs() < 1e-12);
        assert_eq!(gowers_u2_fourier(&GroupFunction::zero(11).unwrap()), 0.0);
        for seed in 0..10 {
            let f = random_bounded(11, seed);
            let a = gowers_norm(&f, 2).unwrap().value;
            assert!((a - gowers_u2_fourier(&f)).abs() < 1e-9);
        }
    }

    #[test]
    fn dual_function_base_cases_and_identity() {
        let f = random_bounded(7, 3);
        assert_eq!(dual_function(&f, 0), one(7));
        let d1 = dual_function(&f, 1);
        assert!(d1.values().iter().all(|v| (v - f.expectation()).norm() < 1e-15));
        for d in 1..=3 {
            let lhs = f.inner_product(&dual_function(&f, d)).unwrap();
            let rhs = gowers_norm(&f, d).unwrap().value.powi(1 << d);
            assert!((lhs - Complex64::new(rhs, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn multilinear_average_examples() {
        let f0 = random_bounded(7, 5);
        let f1 = random_bounded(7, 6);
        let avg = multilinear_average(&[f0.clone(), f1.clone()], &[0, 1]).unwrap();
        assert!((avg - f0.expectation() * f1.expectation()).norm() < 1e-12);
        assert!((multilinear_average(&[one(5), one(5), one(5)], &[0, 1, 2]).unwrap().re - 1.0).abs() < 1e-15);

        let a = GroupFunction::indicator(5, &[0, 1, 2]).unwrap();
        let mut count = 0;
        for x in 0..5 {
            for r in 0..5 {
                if [x, x + r, x + 2 * r].iter().all(|&y| y % 5 <= 2) {
                    count += 1;
                }
            }
        }
        let avg = multilinear_average(&[a.clone(), a.clone(), a], &[0, 1, 2]).unwrap();
        assert!((avg.re - count as f64 / 25.0).abs() < 1e-15);
    }

    #[test]
    fn von_neumann_examples() {
        let r = von_neumann_check(&[one(5), one(5), one(5)], &[0, 1, 2], DEFAULT_TOL).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12 && r.holds);
        let zero = GroupFunction::zero(5).unwrap();
        let r = von_neumann_check(&[one(5), zero], &[0, 1], DEFAULT_TOL).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.holds);
        assert!(matches!(
            von_neumann_check(&[one(5), one(5)], &[1, 6], DEFAULT_TOL),
            Err(Error::InvalidConfiguration(_))
        ));
        let big = GroupFunction::constant(5, Complex64::new(2.0, 0.0)).unwrap();
        assert!(matches!(
            von_neumann_check(&[one(5), big], &[0, 1], DEFAULT_TOL),
            Err(Error::Precondition(_))
        ));
    }
}
