//! Desk-scale recurrence: progression averages, exhaustive minima over dense
//! sets, gating sets, greedy nets in `L²(A)` and Monte Carlo finite-rank sampling.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclic::{residue, GroupFunction};
use crate::error::{Error, Result};
use crate::partition::{conditional_expectation, Partition};
use crate::rng::{derive_rng, random_subset};
use crate::sum::{sum_f64, ComplexSum};

/// Range of common differences `r` in a recurrence average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RRange {
    /// All of Z_N.
    Full,
    /// `lo ≤ r ≤ hi`, both inclusive.
    Interval(usize, usize),
}

impl RRange {
    fn values(self, n: usize) -> Result<Vec<usize>> {
        match self {
            RRange::Full => Ok((0..n).collect()),
            RRange::Interval(lo, hi) if lo <= hi => Ok((lo..=hi).collect()),
            RRange::Interval(lo, hi) => Err(Error::Input(format!("empty range of differences {lo}..={hi}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceReport {
    pub k: usize,
    pub n: usize,
    pub mu: i64,
    pub r_count: usize,
    /// Real part of `E(Π_j T^{μjr} f(x) | x, r)`.
    pub average: f64,
    pub imaginary: f64,
}

/// `E(Π_{j<k} f(x + μjr) | x ∈ Z_N, r ∈ range)`, evaluated exactly.
pub fn recurrence_average(f: &GroupFunction, k: usize, range: RRange, mu: i64) -> Result<RecurrenceReport> {
    if k == 0 {
        return Err(Error::InvalidConfiguration("k must be at least 1".into()));
    }
    let n = f.modulus();
    let rs = range.values(n)?;
    let step = residue(mu, n);
    let partial: Vec<Complex64> = rs
        .par_iter()
        .map(|&r| {
            let d = (step * (r % n)) % n;
            let mut acc = ComplexSum::default();
            for x in 0..n {
                let mut p = Complex64::new(1.0, 0.0);
                for j in 0..k {
                    p *= f.at((x + j * d) % n);
                }
                acc.add(p);
            }
            acc.value()
        })
        .collect();
    let mut total = ComplexSum::default();
    for p in partial {
        total.add(p);
    }
    let value = total.value() / (n * rs.len()) as f64;
    Ok(RecurrenceReport {
        k,
        n,
        mu,
        r_count: rs.len(),
        average: value.re,
        imaginary: value.im,
    })
}

/// Bitmasks of the `k`-term progressions `{x + jr mod N}` for every `(x, r) ∈ Z_N²`.
fn progression_masks(n: usize, k: usize) -> Vec<u32> {
    let mut masks = Vec::with_capacity(n * n);
    for x in 0..n {
        for r in 0..n {
            masks.push((0..k).fold(0u32, |m, j| m | 1 << ((x + j * r) % n)));
        }
    }
    masks
}

/// Number of `(x, r) ∈ Z_N²` with `x, x + r, …, x + (k−1)r` all in the set.
fn count_in(masks: &[u32], set: u32) -> u64 {
    masks.iter().filter(|&&m| m & set == m).count() as u64
}

/// Orders bitmask sets by the lexicographic order of their sorted element lists.
fn lex_cmp(a: u32, b: u32) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        return Ordering::Equal;
    }
    let p = diff.trailing_zeros();
    let above = !((1u32 << p) - 1) & !(1u32 << p);
    let (with_p, without_p) = if a & (1 << p) != 0 { (a, b) } else { (b, a) };
    // The set without p is smaller only if it has nothing beyond the common prefix.
    let a_smaller = if without_p & above == 0 { without_p == a } else { with_p == a };
    if a_smaller {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn mask_to_set(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&x| mask & (1 << x) != 0).collect()
}

pub const EXHAUSTIVE_LIMIT: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Random { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalC {
    pub k: usize,
    pub n: usize,
    pub delta: f64,
    /// Sets of at least this size were examined.
    pub min_size: usize,
    pub c_min: f64,
    /// Progression count `N²·c_min`, including `r = 0`.
    pub count_min: u64,
    pub witness: Vec<usize>,
    pub sets_examined: u64,
}

/// `⌈δN⌉`, with a small allowance so that e.g. `δ = 0.3, N = 10` gives 3.
pub fn dense_size(delta: f64, n: usize) -> usize {
    ((delta * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Minimum of the `k`-term average of `1_A` over sets `A ⊆ Z_N` with `|A| ≥ δN`.
///
/// Exhaustive mode enumerates every such set; random mode samples sets of
/// exactly `⌈δN⌉` elements. Ties go to the lexicographically least set.
pub fn empirical_c(k: usize, delta: f64, n: usize, mode: SearchMode) -> Result<EmpiricalC> {
    if k == 0 {
        return Err(Error::InvalidConfiguration("k must be at least 1".into()));
    }
    if !crate::cyclic::is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidConfiguration(format!("δ must lie in (0, 1], got {delta}")));
    }
    let min_size = dense_size(delta, n).max(1);
    let better = |a: (u64, u32), b: (u64, u32)| match a.0.cmp(&b.0).then_with(|| lex_cmp(a.1, b.1)) {
        Ordering::Greater => b,
        _ => a,
    };
    let (best, examined) = match mode {
        SearchMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(Error::Mode(format!(
                    "exhaustive search needs N <= {EXHAUSTIVE_LIMIT}, got {n}; use random sampling"
                )));
            }
            let masks = progression_masks(n, k);
            let candidates = (0u32..1 << n).into_par_iter().filter(|s| s.count_ones() as usize >= min_size);
            let examined = candidates.clone().count() as u64;
            let best = candidates
                .map(|s| (count_in(&masks, s), s))
                .reduce(|| (u64::MAX, u32::MAX), better);
            (best, examined)
        }
        SearchMode::Random { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidConfiguration("random mode needs at least one sample".into()));
            }
            if n > 32 {
                return Err(Error::Mode(format!("random mode supports N <= 32, got {n}")));
            }
            let masks = progression_masks(n, k);
            let best = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = derive_rng(seed, "empirical-c", i);
                    let set = random_subset(n, min_size, &mut rng).iter().fold(0u32, |m, &x| m | 1 << x);
                    (count_in(&masks, set), set)
                })
                .reduce(|| (u64::MAX, u32::MAX), better);
            (best, samples)
        }
    };
    Ok(EmpiricalC {
        k,
        n,
        delta,
        min_size,
        c_min: best.0 as f64 / (n * n) as f64,
        count_min: best.0,
        witness: mask_to_set(best.1, n),
        sets_examined: examined,
    })
}

/// `(a, r, k)` with `r ≥ 1` and `a, a + r, …, a + (k−1)r` all in `set`, least in `(a, r)`.
pub fn find_k_ap_in_set(set: &[usize], k: usize) -> Result<Option<(usize, usize, usize)>> {
    if k == 0 {
        return Err(Error::InvalidConfiguration("k must be at least 1".into()));
    }
    let mut sorted: Vec<usize> = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let Some(&max) = sorted.last() else {
        return Ok(None);
    };
    let member = |x: usize| sorted.binary_search(&x).is_ok();
    for &a in &sorted {
        if k == 1 {
            return Ok(Some((a, 1, 1)));
        }
        let mut r = 1;
        while a + (k - 1) * r <= max {
            if (1..k).all(|j| member(a + j * r)) {
                return Ok(Some((a, r, k)));
            }
            r += 1;
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct GatingSet {
    pub m: usize,
    /// Shift `n = μλm mod N`.
    pub n: usize,
    pub set: Vec<usize>,
    pub density: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GatingSets {
    pub sets: Vec<GatingSet>,
    pub intersection: Vec<usize>,
    pub intersection_density: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GatingParams {
    pub k: usize,
    pub delta: f64,
    pub k_star: usize,
    pub lambda: i64,
    pub mu: i64,
}

/// The sets `E_n` for `n = μλm`, `m = 1..=k_*`: points where
/// `E(T^n f|B) ≥ δ/2` and `E(|T^n f − F_n| | B) ≤ δ/8k`.
///
/// `family` maps each residue `n` to the function `F_n` compared against `T^n f`.
pub fn gating_sets(
    f_uperp: &GroupFunction,
    family: &HashMap<usize, GroupFunction>,
    b: &Partition,
    params: GatingParams,
) -> Result<GatingSets> {
    let GatingParams { k, delta, k_star, lambda, mu } = params;
    if k == 0 || k_star == 0 {
        return Err(Error::InvalidConfiguration("k and k_* must be at least 1".into()));
    }
    let modulus = f_uperp.modulus();
    let mut sets = Vec::with_capacity(k_star);
    let mut inside = vec![true; modulus];
    for m in 1..=k_star {
        let n = residue(mu.wrapping_mul(lambda).wrapping_mul(m as i64), modulus);
        let family_member = family
            .get(&n)
            .ok_or_else(|| Error::Input(format!("the family has no function for n = {n}")))?;
        let shifted = f_uperp.shift(n as i64);
        let mean = conditional_expectation(&shifted, b)?;
        let gap = shifted.sub(family_member)?.map(|z| Complex64::new(z.norm(), 0.0));
        let gap_mean = conditional_expectation(&gap, b)?;
        let set: Vec<usize> = (0..modulus)
            .filter(|&x| mean.at(x).re >= delta / 2.0 && gap_mean.at(x).re <= delta / (8.0 * k as f64))
            .collect();
        let mut member = vec![false; modulus];
        for &x in &set {
            member[x] = true;
        }
        for (x, keep) in inside.iter_mut().enumerate() {
            *keep &= member[x];
        }
        sets.push(GatingSet {
            m,
            n,
            density: set.len() as f64 / modulus as f64,
            set,
        });
    }
    let intersection: Vec<usize> = (0..modulus).filter(|&x| inside[x]).collect();
    Ok(GatingSets {
        intersection_density: intersection.len() as f64 / modulus as f64,
        intersection,
        sets,
    })
}

/// Inner product normalised as an average over coordinates, as in `L²(A)`.
fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let mut acc = ComplexSum::default();
    for (a, b) in u.iter().zip(v) {
        acc.add(a * b.conj());
    }
    acc.value() / u.len() as f64
}

fn norm(u: &[Complex64]) -> f64 {
    inner(u, u).re.max(0.0).sqrt()
}

fn distance(u: &[Complex64], v: &[Complex64]) -> f64 {
    let diff: Vec<Complex64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    norm(&diff)
}

/// Component of `u` orthogonal to an orthonormal system, with one re-orthogonalisation pass.
fn orthogonal_component(u: &[Complex64], basis: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut w = u.to_vec();
    for _ in 0..2 {
        for e in basis {
            let c = inner(&w, e);
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi -= c * ei;
            }
        }
    }
    w
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonNet {
    /// Indices of the chosen representatives, increasing.
    pub representatives: Vec<usize>,
    pub radius: f64,
    /// Dimension `J` of the greedy orthonormal system.
    pub dimension: usize,
    /// Indices whose orthogonal components formed the system.
    pub basis_sources: Vec<usize>,
    /// `(4/θ)²·max‖v‖²`.
    pub bessel_bound: f64,
    pub bessel_holds: bool,
    /// `(1 + 4R/θ)^{2J}` with `R = max‖v‖`.
    pub packing_bound: f64,
    /// Largest distance from an input to its nearest representative.
    pub covering_radius: f64,
    /// Smallest distance between two representatives (infinite for one).
    pub separation: f64,
}

/// Greedy `θ`-net of vectors in `L²(A)`.
///
/// Phase one builds an orthonormal system from the lowest-index vectors at
/// distance `≥ θ/4` from the current span; phase two picks representatives
/// lowest-index first among vectors more than `θ` from all earlier ones. The
/// covering property is then re-checked against every input.
pub fn greedy_net(vectors: &[Vec<Complex64>], theta: f64) -> Result<EpsilonNet> {
    if !(theta > 0.0) {
        return Err(Error::InvalidConfiguration(format!("θ must be positive, got {theta}")));
    }
    if let Some(first) = vectors.first() {
        if first.is_empty() || vectors.iter().any(|v| v.len() != first.len()) {
            return Err(Error::Input("vectors must be non-empty and of equal length".into()));
        }
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut basis_sources = Vec::new();
    for (t, v) in vectors.iter().enumerate() {
        let w = orthogonal_component(v, &basis);
        let d = norm(&w);
        if d >= theta / 4.0 && d > 0.0 {
            basis.push(w.iter().map(|z| z / d).collect());
            basis_sources.push(t);
        }
    }

    let mut representatives: Vec<usize> = Vec::new();
    for (t, v) in vectors.iter().enumerate() {
        if representatives.iter().all(|&l| distance(v, &vectors[l]) > theta) {
            representatives.push(t);
        }
    }

    let covering_radius = vectors
        .iter()
        .map(|v| {
            representatives
                .iter()
                .map(|&l| distance(v, &vectors[l]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    if covering_radius > theta {
        return Err(Error::NumericalInconsistency(format!(
            "net covering radius {covering_radius} exceeds θ = {theta}"
        )));
    }
    let mut separation = f64::INFINITY;
    for (i, &a) in representatives.iter().enumerate() {
        for &b in &representatives[i + 1..] {
            separation = separation.min(distance(&vectors[a], &vectors[b]));
        }
    }
    let max_norm = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let dimension = basis.len();
    let bessel_bound = (4.0 / theta).powi(2) * max_norm * max_norm;
    let packing_bound = (1.0 + 4.0 * max_norm / theta).powi(2 * dimension as i32);
    if representatives.len() as f64 > packing_bound * (1.0 + 1e-12) {
        return Err(Error::NumericalInconsistency(format!(
            "{} representatives exceed the packing bound {packing_bound}",
            representatives.len()
        )));
    }
    Ok(EpsilonNet {
        representatives,
        radius: theta,
        dimension,
        basis_sources,
        bessel_holds: dimension as f64 <= bessel_bound,
        bessel_bound,
        packing_bound,
        covering_radius,
        separation,
    })
}

/// Net of the vectors `f_m = Σ_h w_h c_{m,h} g_h` restricted to `a`.
///
/// With bounded coefficients and columns the orthonormal system obeys the
/// Bessel bound `J ≤ (4/θ)²·max_h ‖g_h‖²`, which is enforced here.
pub fn greedy_net_structured(
    coefficients: &[Vec<Complex64>],
    columns: &[GroupFunction],
    weights: &[f64],
    a: &[usize],
    theta: f64,
) -> Result<EpsilonNet> {
    if columns.len() != weights.len() || coefficients.iter().any(|row| row.len() != columns.len()) {
        return Err(Error::Input("coefficient rows, columns and weights must have matching lengths".into()));
    }
    if a.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let bounded = |z: &Complex64| z.norm() <= 1.0 + crate::cyclic::DEFAULT_TOL;
    if !coefficients.iter().flatten().all(bounded) || !columns.iter().all(|g| g.is_bounded(crate::cyclic::DEFAULT_TOL)) {
        return Err(Error::Precondition("coefficients and columns must be bounded".into()));
    }
    let restricted: Vec<Vec<Complex64>> = columns.iter().map(|g| a.iter().map(|&x| g.at(x)).collect()).collect();
    let vectors: Vec<Vec<Complex64>> = coefficients
        .iter()
        .map(|row| {
            (0..a.len())
                .map(|i| {
                    let mut acc = ComplexSum::default();
                    for ((c, w), g) in row.iter().zip(weights).zip(&restricted) {
                        acc.add(c * g[i] * *w);
                    }
                    acc.value()
                })
                .collect()
        })
        .collect();
    let net = greedy_net(&vectors, theta)?;
    let column_norm = restricted.iter().map(|g| norm(g)).fold(0.0, f64::max);
    let bound = (4.0 / theta).powi(2) * column_norm * column_norm;
    if net.dimension as f64 > bound * (1.0 + 1e-12) {
        return Err(Error::NumericalInconsistency(format!(
            "orthonormal system of size {} exceeds the Bessel bound {bound}",
            net.dimension
        )));
    }
    Ok(net)
}

#[derive(Debug, Clone)]
pub struct FiniteRankSample {
    pub indices: Vec<usize>,
    pub approximant: GroupFunction,
    /// `‖F − mean of sampled columns‖_{L²}`.
    pub error: f64,
}

fn check_columns(columns: &[GroupFunction], weights: &[f64]) -> Result<WeightedIndex<f64>> {
    if columns.is_empty() || columns.len() != weights.len() {
        return Err(Error::Input("need one weight per column and at least one column".into()));
    }
    if !columns.iter().all(|g| g.is_bounded(crate::cyclic::DEFAULT_TOL)) {
        return Err(Error::Precondition("columns must be bounded".into()));
    }
    WeightedIndex::new(weights).map_err(|e| Error::Input(format!("invalid weights: {e}")))
}

fn weighted_mean(columns: &[GroupFunction], weights: &[f64]) -> Result<GroupFunction> {
    let total = sum_f64(weights.iter().copied());
    let n = columns[0].modulus();
    GroupFunction::from_fn(n, |x| {
        let mut acc = ComplexSum::default();
        for (g, w) in columns.iter().zip(weights) {
            acc.add(g.at(x) * (*w / total));
        }
        acc.value()
    })
}

/// Draws `d` independent column indices from the weights and averages the columns.
pub fn finite_rank_sample(
    columns: &[GroupFunction],
    weights: &[f64],
    d: usize,
    seed: u64,
    trial: u64,
) -> Result<FiniteRankSample> {
    let dist = check_columns(columns, weights)?;
    if d == 0 {
        return Err(Error::InvalidConfiguration("the sample count D must be at least 1".into()));
    }
    let exact = weighted_mean(columns, weights)?;
    sample_with(columns, &dist, &exact, d, seed, trial)
}

fn sample_with(
    columns: &[GroupFunction],
    dist: &WeightedIndex<f64>,
    exact: &GroupFunction,
    d: usize,
    seed: u64,
    trial: u64,
) -> Result<FiniteRankSample> {
    let mut rng = derive_rng(seed, "finite-rank", trial);
    let indices: Vec<usize> = (0..d).map(|_| dist.sample(&mut rng)).collect();
    let n = exact.modulus();
    let approximant = GroupFunction::from_fn(n, |x| {
        let mut acc = ComplexSum::default();
        for &h in &indices {
            acc.add(columns[h].at(x));
        }
        acc.value() / d as f64
    })?;
    let error = exact.l2_distance(&approximant)?;
    Ok(FiniteRankSample { indices, approximant, error })
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondMomentAudit {
    pub d: usize,
    pub trials: u64,
    pub mean_squared_error: f64,
    /// `1/D`.
    pub bound: f64,
    /// `(1/D)(1 + 3/√R)`.
    pub bound_with_slack: f64,
    pub holds: bool,
}

/// Mean of `‖F − sample mean‖²` over `trials` independent samples of size `d`.
pub fn second_moment_audit(
    columns: &[GroupFunction],
    weights: &[f64],
    d: usize,
    trials: u64,
    seed: u64,
) -> Result<SecondMomentAudit> {
    let dist = check_columns(columns, weights)?;
    if d == 0 || trials == 0 {
        return Err(Error::InvalidConfiguration("D and the trial count must be at least 1".into()));
    }
    let exact = weighted_mean(columns, weights)?;
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| sample_with(columns, &dist, &exact, d, seed, t).map(|s| s.error * s.error))
        .collect::<Result<Vec<f64>>>()?;
    let mean_squared_error = sum_f64(errors) / trials as f64;
    let bound = 1.0 / d as f64;
    let bound_with_slack = bound * (1.0 + 3.0 / (trials as f64).sqrt());
    Ok(SecondMomentAudit {
        d,
        trials,
        mean_squared_error,
        bound,
        bound_with_slack,
        holds: mean_squared_error <= bound_with_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averages() {
        let one = GroupFunction::constant(7, Complex64::new(1.0, 0.0)).unwrap();
        assert!((recurrence_average(&one, 3, RRange::Full, 1).unwrap().average - 1.0).abs() < 1e-15);
        let zero = GroupFunction::zero(7).unwrap();
        assert_eq!(recurrence_average(&zero, 3, RRange::Full, 1).unwrap().average, 0.0);

        // {0,1,2} in Z_5: r = 0 gives 3 triples, r = 1 gives (0,1,2), r = 4 gives (2,1,0).
        let f = GroupFunction::indicator(5, &[0, 1, 2]).unwrap();
        let r = recurrence_average(&f, 3, RRange::Full, 1).unwrap();
        assert!((r.average - 5.0 / 25.0).abs() < 1e-15);
        assert!(matches!(
            recurrence_average(&f, 3, RRange::Interval(3, 2), 1),
            Err(Error::Input(_))
        ));
        let r = recurrence_average(&f, 3, RRange::Interval(1, 1), 1).unwrap();
        assert!((r.average - 1.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn lexicographic_order_of_masks() {
        let m = |xs: &[u32]| xs.iter().fold(0u32, |acc, &x| acc | 1 << x);
        assert_eq!(lex_cmp(m(&[1, 2]), m(&[1, 2, 5])), Ordering::Less);
        assert_eq!(lex_cmp(m(&[1, 3]), m(&[1, 2, 5])), Ordering::Greater);
        assert_eq!(lex_cmp(m(&[0, 9]), m(&[1])), Ordering::Less);
        assert_eq!(lex_cmp(m(&[4]), m(&[4])), Ordering::Equal);
    }

    #[test]
    fn empirical_c_trivial_cases() {
        let c = empirical_c(1, 0.5, 11, SearchMode::Exhaustive).unwrap();
        assert!((c.c_min - 6.0 / 11.0).abs() < 1e-15);
        assert_eq!(c.witness, vec![0, 1, 2, 3, 4, 5]);
        let full = empirical_c(3, 1.0, 17, SearchMode::Exhaustive).unwrap();
        assert_eq!(full.c_min, 1.0);
        assert_eq!(full.sets_examined, 1);
        assert!(matches!(empirical_c(3, 0.5, 23, SearchMode::Exhaustive), Err(Error::Mode(_))));
        let random = empirical_c(3, 0.5, 13, SearchMode::Random { samples: 50, seed: 1 }).unwrap();
        assert_eq!(random.witness.len(), 7);
    }

    #[test]
    fn progressions_in_sets() {
        assert_eq!(find_k_ap_in_set(&[1, 2, 3, 4], 4).unwrap(), Some((1, 1, 4)));
        assert_eq!(find_k_ap_in_set(&[], 3).unwrap(), None);
        assert_eq!(find_k_ap_in_set(&[5, 1, 9], 3).unwrap(), Some((1, 4, 3)));
    }

    #[test]
    fn gating_with_trivial_algebra() {
        let n = 11;
        let b = Partition::trivial(n).unwrap();
        let one = GroupFunction::constant(n, Complex64::new(1.0, 0.0)).unwrap();
        let family: HashMap<usize, GroupFunction> = (0..n).map(|i| (i, one.clone())).collect();
        let params = GatingParams { k: 3, delta: 0.5, k_star: 4, lambda: 2, mu: 3 };
        let g = gating_sets(&one, &family, &b, params).unwrap();
        assert_eq!(g.intersection.len(), n);
        assert_eq!(g.sets.iter().map(|s| s.n).collect::<Vec<_>>(), vec![6, 1, 7, 2]);
        let partial: HashMap<usize, GroupFunction> = [(6, one.clone())].into_iter().collect();
        assert!(matches!(gating_sets(&one, &partial, &b, params), Err(Error::Input(_))));
    }

    #[test]
    fn nets() {
        let v = vec![Complex64::new(0.3, 0.1); 4];
        let net = greedy_net(&vec![v; 5], 0.1).unwrap();
        assert_eq!(net.representatives, vec![0]);
        assert_eq!(net.dimension, 1);

        let t = 6;
        let scale = (t as f64).sqrt();
        let orthonormal: Vec<Vec<Complex64>> = (0..t)
            .map(|i| (0..t).map(|j| Complex64::new(if i == j { scale } else { 0.0 }, 0.0)).collect())
            .collect();
        let net = greedy_net(&orthonormal, 1.0).unwrap();
        assert_eq!(net.representatives.len(), t);
        assert!((net.separation - 2f64.sqrt()).abs() < 1e-12);
        assert!(greedy_net(&orthonormal, 0.0).is_err());
    }

    #[test]
    fn sampling() {
        let g = GroupFunction::character(7, 2).unwrap();
        let s = finite_rank_sample(&[g], &[1.0], 5, 0, 0).unwrap();
        assert!(s.error < 1e-15);
        let a = GroupFunction::indicator(7, &[0, 1, 2]).unwrap();
        let b = GroupFunction::indicator(7, &[3, 4, 5, 6]).unwrap();
        let audit = second_moment_audit(&[a.clone(), b.clone()], &[0.5, 0.5], 7, 50, 3).unwrap();
        assert!(audit.holds);
        let again = second_moment_audit(&[a, b], &[0.5, 0.5], 7, 50, 3).unwrap();
        assert_eq!(audit.mean_squared_error, again.mean_squared_error);
    }
}
