//! σ-algebras generated by randomly translated level sets of certified functions.
//!
//! For a certified `G`, scale `ε` and offset `α` in the unit square
//! `S = [−1/2, 1/2)²`, the atoms of `B_ε(G)` are the non-empty preimages
//! `G⁻¹(ε(S + ζ + α))` over Gaussian integers `ζ`. Every cell has diameter
//! `√2·ε`, so `‖G − E(G|B)‖_∞ ≤ √2·ε` for `B_ε(G)` and every refinement of it.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::cyclic::{Complexity, GroupFunction};
use crate::error::{Error, Result};
use crate::partition::{conditional_expectation, Partition};
use crate::rng::derive_rng;
use crate::uap::{certify_wiener, CertifiedFunction};

/// Offset used when every sampled candidate scores the same.
pub const GOLDEN_ALPHA: Complex64 = Complex64 {
    re: 0.618_033_988_749_894_8 - 0.5,
    im: 0.381_966_011_250_105_1 - 0.5,
};

#[derive(Debug, Clone, Copy)]
pub enum AlphaChoice {
    Fixed(Complex64),
    Seeded(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct LevelSetOptions {
    /// Number of seeded offsets tried.
    pub retry_limit: u64,
    /// Width, in cell units, of the band around cell edges counted as boundary.
    pub boundary_width: f64,
}

impl Default for LevelSetOptions {
    fn default() -> Self {
        Self {
            retry_limit: 32,
            boundary_width: 0.125,
        }
    }
}

/// Gaussian integer `ζ` with `w ∈ S + ζ`.
fn cell_of(w: Complex64) -> (i64, i64) {
    ((w.re + 0.5).floor() as i64, (w.im + 0.5).floor() as i64)
}

/// Distance from `w` to the nearest edge of its cell, in cell units.
fn edge_distance(w: Complex64) -> f64 {
    let along = |t: f64| {
        let frac = (t + 0.5) - (t + 0.5).floor();
        frac.min(1.0 - frac)
    };
    along(w.re).min(along(w.im))
}

fn scaled(g: &GroupFunction, epsilon: f64, alpha: Complex64) -> Vec<Complex64> {
    g.values().iter().map(|&v| v / epsilon - alpha).collect()
}

/// Fraction of points whose scaled value lies within `width` of a cell edge.
pub fn boundary_mass(g: &GroupFunction, epsilon: f64, alpha: Complex64, width: f64) -> f64 {
    let w = scaled(g, epsilon, alpha);
    w.iter().filter(|&&z| edge_distance(z) < width).count() as f64 / w.len() as f64
}

fn in_unit_square(alpha: Complex64) -> bool {
    (-0.5..0.5).contains(&alpha.re) && (-0.5..0.5).contains(&alpha.im)
}

/// Picks the offset: the seeded candidate with least boundary mass, lowest index first.
pub fn select_alpha(g: &GroupFunction, epsilon: f64, seed: u64, options: &LevelSetOptions) -> Complex64 {
    let candidates: Vec<Complex64> = (0..options.retry_limit.max(1))
        .map(|i| {
            let mut rng = derive_rng(seed, "levelset-alpha", i);
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
        .collect();
    let masses: Vec<f64> = candidates
        .iter()
        .map(|&a| boundary_mass(g, epsilon, a, options.boundary_width))
        .collect();
    if candidates.len() > 1 && masses.iter().all(|&m| m == masses[0]) {
        return GOLDEN_ALPHA;
    }
    let best = (0..masses.len())
        .min_by(|&i, &j| masses[i].total_cmp(&masses[j]).then(i.cmp(&j)))
        .expect("at least one candidate");
    candidates[best]
}

#[derive(Debug, Clone)]
pub struct LevelSetAlgebra {
    pub partition: Partition,
    pub source: Arc<CertifiedFunction>,
    pub epsilon: f64,
    pub alpha: Complex64,
    pub seed: Option<u64>,
    /// Gaussian integer of each atom, in canonical atom order.
    pub cells: Vec<(i64, i64)>,
    /// Measured `‖G − E(G|B)‖_∞`.
    pub linf_error: f64,
    pub boundary_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetDiagnostics {
    pub atoms: usize,
    pub atom_bound: f64,
    pub linf_error: f64,
    pub linf_bound: f64,
    pub boundary_mass: f64,
    pub epsilon: f64,
    pub alpha: [f64; 2],
}

impl LevelSetAlgebra {
    /// `(2⌈M/ε⌉ + 2)²` for the certified bound `M` of the source.
    pub fn atom_bound(&self) -> f64 {
        let side = 2.0 * (self.source.bound() / self.epsilon).ceil() + 2.0;
        side * side
    }

    pub fn diagnostics(&self, options: &LevelSetOptions) -> LevelSetDiagnostics {
        LevelSetDiagnostics {
            atoms: self.partition.atom_count(),
            atom_bound: self.atom_bound(),
            linf_error: self.linf_error,
            linf_bound: std::f64::consts::SQRT_2 * self.epsilon,
            boundary_mass: boundary_mass(self.source.func(), self.epsilon, self.alpha, options.boundary_width),
            epsilon: self.epsilon,
            alpha: [self.alpha.re, self.alpha.im],
        }
    }
}

pub fn build_level_set_algebra(
    g: Arc<CertifiedFunction>,
    epsilon: f64,
    alpha: AlphaChoice,
    options: &LevelSetOptions,
) -> Result<LevelSetAlgebra> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidConfiguration(format!("ε must be positive, got {epsilon}")));
    }
    let (alpha, seed) = match alpha {
        AlphaChoice::Fixed(a) => {
            if !in_unit_square(a) {
                return Err(Error::Input(format!("offset {a} is outside [-1/2, 1/2)^2")));
            }
            (a, None)
        }
        AlphaChoice::Seeded(seed) => (select_alpha(g.func(), epsilon, seed, options), Some(seed)),
    };
    let n = g.modulus();
    let cells_per_point: Vec<(i64, i64)> = scaled(g.func(), epsilon, alpha).into_iter().map(cell_of).collect();
    let partition = Partition::from_labels(n, &cells_per_point)?;
    let mut cells = vec![(0, 0); partition.atom_count()];
    for (x, &label) in partition.labels().iter().enumerate() {
        cells[label] = cells_per_point[x];
    }
    let linf_error = g.func().max_distance(&conditional_expectation(g.func(), &partition)?)?;
    let mass = boundary_mass(g.func(), epsilon, alpha, options.boundary_width);
    Ok(LevelSetAlgebra {
        partition,
        source: g,
        epsilon,
        alpha,
        seed,
        cells,
        linf_error,
        boundary_mass: mass,
    })
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub source: Arc<CertifiedFunction>,
    pub epsilon: f64,
    pub alpha: Complex64,
}

impl Generator {
    fn cells(&self) -> Vec<(i64, i64)> {
        scaled(self.source.func(), self.epsilon, self.alpha).into_iter().map(cell_of).collect()
    }
}

/// A join of level-set algebras of certified functions of order at most `order`.
#[derive(Debug, Clone)]
pub struct CompactAlgebra {
    pub order: usize,
    pub partition: Partition,
    pub generators: Vec<Generator>,
    pub complexity: Complexity,
}

fn complexity_of(generators: &[Generator]) -> Complexity {
    if generators.is_empty() {
        return Complexity::new(0.0).expect("zero is a valid complexity");
    }
    let count = generators.len() as f64;
    let inverse_scale = generators.iter().map(|g| 1.0 / g.epsilon - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let bound = generators.iter().map(|g| g.source.bound()).fold(f64::NEG_INFINITY, f64::max);
    Complexity::new(count.max(inverse_scale).max(bound).max(0.0)).expect("non-negative")
}

impl CompactAlgebra {
    pub fn trivial(n: usize, order: usize) -> Result<Self> {
        Ok(Self {
            order,
            partition: Partition::trivial(n)?,
            generators: Vec::new(),
            complexity: complexity_of(&[]),
        })
    }

    pub fn modulus(&self) -> usize {
        self.partition.modulus()
    }

    /// Appends a generator; its certificate order may not exceed the algebra's order.
    pub fn join_level_set(&self, level_set: &LevelSetAlgebra) -> Result<CompactAlgebra> {
        if level_set.source.order() > self.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: level_set.source.order(),
            });
        }
        let partition = self.partition.join(&level_set.partition)?;
        let mut generators = self.generators.clone();
        generators.push(Generator {
            source: level_set.source.clone(),
            epsilon: level_set.epsilon,
            alpha: level_set.alpha,
        });
        let complexity = complexity_of(&generators);
        Ok(CompactAlgebra {
            order: self.order,
            partition,
            generators,
            complexity,
        })
    }
}

/// Joins a level-set algebra into a compact algebra.
pub fn join_compact(a: &CompactAlgebra, level_set: &LevelSetAlgebra) -> Result<CompactAlgebra> {
    a.join_level_set(level_set)
}

#[derive(Debug, Clone, Copy)]
pub struct ApproximationOptions {
    /// Largest interpolation degree allowed per generator.
    pub degree_budget: usize,
    pub tol: f64,
}

impl Default for ApproximationOptions {
    fn default() -> Self {
        Self {
            degree_budget: 64,
            tol: crate::cyclic::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeasurableApproximation {
    pub certified: CertifiedFunction,
    pub l2_distance: f64,
    /// Largest interpolation degree used by any generator.
    pub degree: usize,
}

/// Barycentric interpolant through complex nodes, with weights kept in log form.
struct Interpolant {
    nodes: Vec<Complex64>,
    log_weights: Vec<f64>,
    phases: Vec<Complex64>,
}

impl Interpolant {
    fn new(nodes: Vec<Complex64>) -> Self {
        let mut log_weights = Vec::with_capacity(nodes.len());
        let mut phases = Vec::with_capacity(nodes.len());
        for (i, &zi) in nodes.iter().enumerate() {
            let mut log = 0.0;
            let mut phase = Complex64::new(1.0, 0.0);
            for (j, &zj) in nodes.iter().enumerate() {
                if i != j {
                    let d = zi - zj;
                    log -= d.norm().ln();
                    phase *= (d / d.norm()).conj();
                }
            }
            log_weights.push(log);
            phases.push(phase);
        }
        let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for w in &mut log_weights {
            *w -= top;
        }
        Self { nodes, log_weights, phases }
    }

    fn degree(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    fn eval(&self, z: Complex64, values: &[f64]) -> f64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for (i, &zi) in self.nodes.iter().enumerate() {
            if z == zi {
                return values[i];
            }
            let t = self.phases[i] * self.log_weights[i].exp() / (z - zi);
            num += t * values[i];
            den += t;
        }
        (num / den).re
    }
}

/// Interpolant for each generator and the cell of each of its nodes.
struct GeneratorPolynomials {
    interpolant: Interpolant,
    node_cells: Vec<(i64, i64)>,
    /// Scaled value `ε⁻¹G(x) − α` at every point.
    points: Vec<Complex64>,
}

impl GeneratorPolynomials {
    fn new(generator: &Generator, budget: usize) -> Self {
        let points = scaled(generator.source.func(), generator.epsilon, generator.alpha);
        let mut seen = BTreeSet::new();
        let mut nodes = Vec::new();
        for &z in &points {
            if seen.insert((z.re.to_bits(), z.im.to_bits())) {
                nodes.push(z);
            }
        }
        nodes.truncate(budget + 1);
        let node_cells = nodes.iter().map(|&z| cell_of(z)).collect();
        Self {
            interpolant: Interpolant::new(nodes),
            node_cells,
            points,
        }
    }

    /// `P_ζ(ε⁻¹G(x) − α)` where `P_ζ` interpolates the indicator of cell `ζ`.
    fn cell_indicator(&self, cell: (i64, i64), x: usize) -> f64 {
        let values: Vec<f64> = self
            .node_cells
            .iter()
            .map(|&c| if c == cell { 1.0 } else { 0.0 })
            .collect();
        self.interpolant.eval(self.points[x], &values)
    }
}

/// A certified function of the algebra's order approximating a measurable `f`.
///
/// Each atom indicator is the product over generators of a polynomial in
/// `ε_j⁻¹G_j − α_j` that interpolates the indicator of the atom's cell on the
/// finitely many values the generator takes. The atom indicators are combined
/// with the atom values of `f`, clipped to `[0, 1]`, and the result is
/// certified by its Fourier expansion at the algebra's order.
pub fn approximate_measurable(
    f: &GroupFunction,
    b: &CompactAlgebra,
    delta: f64,
    options: &ApproximationOptions,
) -> Result<MeasurableApproximation> {
    let tol = options.tol;
    let n = b.modulus();
    if f.modulus() != n {
        return Err(Error::Dimension {
            expected: n,
            found: f.modulus(),
        });
    }
    if !f.is_real(tol) || f.values().iter().any(|v| v.re < -tol) || !f.is_bounded(tol) {
        return Err(Error::Precondition("f must be real, non-negative and bounded".into()));
    }
    if !b.partition.measures(f, tol) {
        return Err(Error::NotMeasurable("f is not constant on the atoms".into()));
    }
    let certify_constant = |c: f64| -> Result<CertifiedFunction> {
        let constant = CertifiedFunction::constant(n, Complex64::new(c, 0.0), c.abs())?;
        crate::uap::cert_promote(&constant, b.order)
    };
    let mean = f.expectation().re;
    let spread = f.values().iter().map(|v| (v.re - mean).abs()).fold(0.0, f64::max);
    if spread <= tol {
        let certified = certify_constant(mean)?;
        let l2_distance = f.l2_distance(certified.func())?;
        return Ok(MeasurableApproximation { certified, l2_distance, degree: 0 });
    }
    if delta >= f.l2_norm() {
        let certified = certify_constant(0.0)?;
        return Ok(MeasurableApproximation {
            certified,
            l2_distance: f.l2_norm(),
            degree: 0,
        });
    }

    let polys: Vec<GeneratorPolynomials> = b
        .generators
        .iter()
        .map(|g| GeneratorPolynomials::new(g, options.degree_budget))
        .collect();
    let degree = polys.iter().map(|p| p.interpolant.degree()).max().unwrap_or(0);
    let generator_cells: Vec<Vec<(i64, i64)>> = b.generators.iter().map(Generator::cells).collect();
    let atoms = b.partition.atoms();
    let atom_values: Vec<f64> = atoms.iter().map(|atom| f.at(atom[0]).re).collect();

    let values: Vec<Complex64> = (0..n)
        .map(|x| {
            let mut total = 0.0;
            for (atom, &value) in atoms.iter().zip(&atom_values) {
                if value == 0.0 {
                    continue;
                }
                let representative = atom[0];
                let mut indicator = 1.0;
                for (poly, cells) in polys.iter().zip(&generator_cells) {
                    indicator *= poly.cell_indicator(cells[representative], x);
                }
                total += value * indicator;
            }
            Complex64::new(total.clamp(0.0, 1.0), 0.0)
        })
        .collect();
    let approximant = GroupFunction::new(n, values)?;
    let l2_distance = f.l2_distance(&approximant)?;
    if l2_distance > delta {
        return Err(Error::Budget {
            achieved: l2_distance,
            target: delta,
        });
    }
    let certified = certify_wiener(&approximant, b.order, tol)?;
    Ok(MeasurableApproximation {
        certified,
        l2_distance,
        degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::{quasiperiodic, Polynomial, QuasiTerm};
    use crate::uap::{certify_dual, certify_quasiperiodic, verify_certificate};

    fn linear_phase(n: usize) -> Arc<CertifiedFunction> {
        let q = quasiperiodic(
            n,
            &[QuasiTerm {
                coeff: Complex64::new(1.0, 0.0),
                poly: Polynomial::new(&[0, 1], n),
            }],
        )
        .unwrap();
        Arc::new(certify_quasiperiodic(&q).unwrap())
    }

    #[test]
    fn constant_source_gives_one_atom() {
        let g = Arc::new(CertifiedFunction::constant(7, Complex64::new(0.3, 0.1), 1.0).unwrap());
        let ls = build_level_set_algebra(g, 0.2, AlphaChoice::Seeded(1), &LevelSetOptions::default()).unwrap();
        assert_eq!(ls.partition.atom_count(), 1);
        assert_eq!(ls.linf_error, 0.0);
    }

    #[test]
    fn unit_circle_cells() {
        let g = linear_phase(5);
        let ls = build_level_set_algebra(g.clone(), 0.6, AlphaChoice::Fixed(Complex64::new(0.0, 0.0)), &LevelSetOptions::default())
            .unwrap();
        // Independent cell assignment: round each coordinate of G/ε to the nearest integer.
        let expected: Vec<(i64, i64)> = g
            .func()
            .values()
            .iter()
            .map(|v| ((v.re / 0.6).round() as i64, (v.im / 0.6).round() as i64))
            .collect();
        assert_eq!(ls.partition, Partition::from_labels(5, &expected).unwrap());
        assert_eq!(ls.partition.atom_count(), 5);
        assert!(ls.linf_error <= std::f64::consts::SQRT_2 * 0.6);
        assert!(ls.partition.atom_count() as f64 <= ls.atom_bound());
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = linear_phase(5);
        assert!(build_level_set_algebra(g.clone(), 0.0, AlphaChoice::Seeded(0), &LevelSetOptions::default()).is_err());
        assert!(build_level_set_algebra(g, 0.5, AlphaChoice::Fixed(Complex64::new(0.5, 0.0)), &LevelSetOptions::default()).is_err());
    }

    #[test]
    fn seeded_alpha_is_shift_equivariant() {
        let f = crate::testutil::random_bounded(11, 5);
        let g = certify_dual(&f, 2, 1_000_000, 1e-9).unwrap();
        let opts = LevelSetOptions::default();
        let base = build_level_set_algebra(Arc::new(g.clone()), 0.05, AlphaChoice::Seeded(9), &opts).unwrap();
        for s in 0..11 {
            let shifted = Arc::new(crate::uap::cert_shift(&g, s));
            let ls = build_level_set_algebra(shifted, 0.05, AlphaChoice::Seeded(9), &opts).unwrap();
            assert_eq!(ls.alpha, base.alpha);
            assert_eq!(ls.partition, base.partition.shift(s));
        }
    }

    #[test]
    fn compact_algebra_complexity() {
        let n = 7;
        let mut a = CompactAlgebra::trivial(n, 1).unwrap();
        assert_eq!(a.complexity.value(), 0.0);
        for (i, bound) in [1.0, 3.0, 2.0].into_iter().enumerate() {
            let g = CertifiedFunction::constant(n, Complex64::new(0.5, 0.0), bound).unwrap();
            let ls = build_level_set_algebra(Arc::new(g), 0.5, AlphaChoice::Seeded(i as u64), &LevelSetOptions::default())
                .unwrap();
            a = join_compact(&a, &ls).unwrap();
        }
        assert_eq!(a.complexity.value(), 3.0);
        assert_eq!(a.generators.len(), 3);

        let high = linear_phase(n);
        let ls = build_level_set_algebra(high, 0.5, AlphaChoice::Seeded(0), &LevelSetOptions::default()).unwrap();
        let zero_order = CompactAlgebra::trivial(n, 0).unwrap();
        assert!(matches!(join_compact(&zero_order, &ls), Err(Error::OrderMismatch { .. })));
    }

    #[test]
    fn approximate_constant_and_small_targets() {
        let b = CompactAlgebra::trivial(7, 1).unwrap();
        let c = GroupFunction::constant(7, Complex64::new(0.4, 0.0)).unwrap();
        let a = approximate_measurable(&c, &b, 0.01, &ApproximationOptions::default()).unwrap();
        assert_eq!(a.l2_distance, 0.0);
        assert!((a.certified.bound() - 0.4).abs() < 1e-15);
        verify_certificate(&a.certified, 1e-9).unwrap();

        let g = linear_phase(11);
        let ls = build_level_set_algebra(g, 0.6, AlphaChoice::Seeded(3), &LevelSetOptions::default()).unwrap();
        let b = join_compact(&CompactAlgebra::trivial(11, 1).unwrap(), &ls).unwrap();
        let atom = &b.partition.atoms()[0];
        let f = GroupFunction::indicator(11, atom).unwrap();
        let a = approximate_measurable(&f, &b, 10.0, &ApproximationOptions::default()).unwrap();
        assert_eq!(a.certified.func(), &GroupFunction::zero(11).unwrap());
    }

    #[test]
    fn approximate_atom_indicator() {
        let g = linear_phase(11);
        let ls = build_level_set_algebra(g, 0.6, AlphaChoice::Seeded(3), &LevelSetOptions::default()).unwrap();
        let b = join_compact(&CompactAlgebra::trivial(11, 1).unwrap(), &ls).unwrap();
        for atom in b.partition.atoms() {
            let f = GroupFunction::indicator(11, &atom).unwrap();
            let a = approximate_measurable(&f, &b, 0.2, &ApproximationOptions::default()).unwrap();
            let measured = f.l2_distance(a.certified.func()).unwrap();
            assert!(measured <= 0.2);
            assert!((measured - a.l2_distance).abs() < 1e-15);
            assert!(a.certified.func().values().iter().all(|v| v.re >= 0.0 && v.re <= 1.0));
            verify_certificate(&a.certified, 1e-9).unwrap();
        }
    }

    #[test]
    fn approximation_rejects_non_measurable() {
        let b = CompactAlgebra::trivial(7, 1).unwrap();
        let f = GroupFunction::indicator(7, &[0]).unwrap();
        assert!(matches!(
            approximate_measurable(&f, &b, 0.1, &ApproximationOptions::default()),
            Err(Error::NotMeasurable(_))
        ));
    }

    #[test]
    fn degree_budget_is_enforced() {
        let f = crate::testutil::random_bounded(13, 2);
        let g = Arc::new(crate::uap::certify_wiener(&f, 1, 1e-9).unwrap());
        let ls = build_level_set_algebra(g, 0.05, AlphaChoice::Seeded(0), &LevelSetOptions::default()).unwrap();
        let b = join_compact(&CompactAlgebra::trivial(13, 1).unwrap(), &ls).unwrap();
        let target = GroupFunction::indicator(13, &b.partition.atoms()[0]).unwrap();
        let tight = ApproximationOptions { degree_budget: 2, ..Default::default() };
        match approximate_measurable(&target, &b, 1e-6, &tight) {
            Err(Error::Budget { achieved, target }) => assert!(achieved > target),
            other => panic!("expected a budget error, got {other:?}"),
        }
        let a = approximate_measurable(&target, &b, 1e-6, &ApproximationOptions::default()).unwrap();
        assert!(a.l2_distance <= 1e-6);
        assert_eq!(a.degree, 12);
    }
}
