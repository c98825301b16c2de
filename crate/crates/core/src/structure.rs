//! The energy-increment driver and the structure decomposition
//! `f = f_U + f_{U⊥}` with `f_{U⊥}` close to a certified almost periodic function.

use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::cyclic::{GroupFunction, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::gowers::gowers_norm_with_tol;
use crate::io::{csv_float, FunctionJson};
use crate::levelset::{
    approximate_measurable, build_level_set_algebra, join_compact, AlphaChoice, ApproximationOptions,
    CompactAlgebra, LevelSetOptions,
};
use crate::partition::{conditional_expectation, energy, Partition, PartitionJson};
use crate::rng::derive_rng;
use crate::uap::{lower_bound_correlation, verify_certificate, CertificateJson, CertifiedFunction};

/// A σ-algebra the driver can measure energies against.
pub trait Algebra: Clone {
    fn partition(&self) -> &Partition;
    fn complexity(&self) -> f64;
}

impl Algebra for Partition {
    fn partition(&self) -> &Partition {
        self
    }

    fn complexity(&self) -> f64 {
        self.atom_count() as f64
    }
}

impl Algebra for CompactAlgebra {
    fn partition(&self) -> &Partition {
        &self.partition
    }

    fn complexity(&self) -> f64 {
        self.complexity.value()
    }
}

#[derive(Debug, Clone)]
pub enum DichotomyOutcome<P, A> {
    Success(P),
    EnergyIncrement {
        algebra: A,
        measured_increment: f64,
        /// Lower bound the callback promises for this increment.
        declared_increment: f64,
    },
}

/// A dichotomy outcome plus one statistic recorded in the trace.
#[derive(Debug, Clone)]
pub struct DichotomyStep<P, A> {
    pub outcome: DichotomyOutcome<P, A>,
    pub statistic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopKind {
    /// `B′` replaced by the refinement.
    Inner,
    /// `B` replaced by the refinement.
    Outer,
    Halt,
}

impl LoopKind {
    fn as_str(self) -> &'static str {
        match self {
            LoopKind::Inner => "inner",
            LoopKind::Outer => "outer",
            LoopKind::Halt => "halt",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub step: u64,
    pub which_loop: LoopKind,
    pub energy_b: f64,
    pub energy_bprime: f64,
    pub complexity_b: f64,
    pub complexity_bprime: f64,
    pub gowers_fu: f64,
    /// `E(B″) − E(B′)` as re-measured by the driver.
    pub increment: Option<f64>,
    pub declared_increment: Option<f64>,
}

pub const TRACE_HEADER: &str = "step,which_loop,energy_B,energy_Bprime,complexity_B,complexity_Bprime,gowers_fU";

impl TraceRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.step,
            self.which_loop.as_str(),
            csv_float(self.energy_b),
            csv_float(self.energy_bprime),
            csv_float(self.complexity_b),
            csv_float(self.complexity_bprime),
            csv_float(self.gowers_fu)
        )
    }
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct DriverResult<P> {
    pub payload: P,
    pub trace: Vec<TraceRow>,
    pub steps: u64,
    pub outer_promotions: u64,
}

/// Runs the double iteration: `B′` grows while `E(B′) − E(B) ≤ τ²`, and the
/// refinement is promoted to `B` once the gap exceeds `τ²`.
///
/// Every refinement is re-checked: it must refine `B′` and strictly raise the energy.
pub fn energy_increment_driver<A, P, F>(
    fs: &[GroupFunction],
    trivial: A,
    tau: f64,
    budget: u64,
    mut dichotomy: F,
) -> Result<DriverResult<P>>
where
    A: Algebra,
    F: FnMut(&A, &A, u64) -> Result<DichotomyStep<P, A>>,
{
    if !(tau > 0.0) {
        return Err(Error::InvalidConfiguration(format!("τ must be positive, got {tau}")));
    }
    let energy_of = |a: &A| energy(fs, a.partition()).map(|e| e.value);
    let mut b = trivial.clone();
    let mut b_prime = trivial;
    let mut energy_b = energy_of(&b)?;
    let mut energy_bprime = energy_b;
    let mut trace = Vec::new();
    let mut outer_promotions = 0;
    for step in 1..=budget {
        let result = dichotomy(&b, &b_prime, step)?;
        let mut row = TraceRow {
            step,
            which_loop: LoopKind::Halt,
            energy_b,
            energy_bprime,
            complexity_b: b.complexity(),
            complexity_bprime: b_prime.complexity(),
            gowers_fu: result.statistic,
            increment: None,
            declared_increment: None,
        };
        match result.outcome {
            DichotomyOutcome::Success(payload) => {
                trace.push(row);
                return Ok(DriverResult {
                    payload,
                    trace,
                    steps: step,
                    outer_promotions,
                });
            }
            DichotomyOutcome::EnergyIncrement {
                algebra,
                declared_increment,
                ..
            } => {
                if !algebra.partition().refines(b_prime.partition()) {
                    return Err(Error::Refinement(format!("step {step}: the new algebra does not refine B′")));
                }
                let energy_new = energy_of(&algebra)?;
                let increment = energy_new - energy_bprime;
                if !(increment > 0.0) {
                    return Err(Error::NumericalInconsistency(format!(
                        "step {step}: energy increment {increment} is not positive"
                    )));
                }
                row.increment = Some(increment);
                row.declared_increment = Some(declared_increment);
                if energy_new - energy_b <= tau * tau {
                    row.which_loop = LoopKind::Inner;
                    b_prime = algebra;
                    energy_bprime = energy_new;
                } else {
                    row.which_loop = LoopKind::Outer;
                    outer_promotions += 1;
                    b = algebra;
                    b_prime = b.clone();
                    energy_b = energy_new;
                    energy_bprime = energy_new;
                }
                trace.push(row);
            }
        }
    }
    let mut lines = vec![TRACE_HEADER.to_string()];
    lines.extend(trace.iter().map(TraceRow::csv));
    Err(Error::NonTermination { steps: budget, trace: lines })
}

/// The uniformity threshold `t(k, δ, M)` a successful decomposition must meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// `2^{−k}·min(δ, 1/2)^{2^k}/(1 + M)`.
    Default,
    /// `c/M`.
    OverM(f64),
    Constant(f64),
}

impl Threshold {
    pub fn eval(&self, k: usize, delta: f64, m: f64) -> f64 {
        match *self {
            Threshold::Default => 0.5f64.powi(k as i32) * delta.min(0.5).powi(1 << k) / (1.0 + m),
            Threshold::OverM(c) => c / m,
            Threshold::Constant(c) => c,
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    /// Accepts `default`, `<c>/M` or a plain number.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let number = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|c| *c > 0.0 && c.is_finite())
                .ok_or_else(|| Error::Input(format!("threshold expression {s:?} is not a positive number")))
        };
        if s.eq_ignore_ascii_case("default") {
            Ok(Threshold::Default)
        } else if let Some(c) = s.strip_suffix("/M") {
            Ok(Threshold::OverM(number(c)?))
        } else {
            Ok(Threshold::Constant(number(s)?))
        }
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Threshold::Default => write!(f, "default"),
            Threshold::OverM(c) => write!(f, "{c}/M"),
            Threshold::Constant(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StructureConfig {
    pub threshold: Threshold,
    pub seed: u64,
    pub tol: f64,
    pub driver_steps: u64,
    pub cert_nodes: u64,
    pub poly_degree: usize,
    pub levelset: LevelSetOptions,
    /// Maximum number of times ε is halved when an increment falls short.
    pub epsilon_halvings: u32,
}

impl Default for StructureConfig {
    fn default() -> Self {
        Self {
            threshold: Threshold::Default,
            seed: 0,
            tol: DEFAULT_TOL,
            driver_steps: 1_000_000,
            cert_nodes: 1_000_000,
            poly_degree: 64,
            levelset: LevelSetOptions::default(),
            epsilon_halvings: 8,
        }
    }
}

/// `τ = δ²/5000k`, the energy-gap scale of the dichotomy.
pub fn tau(k: usize, delta: f64) -> f64 {
    delta * delta / (5000.0 * k as f64)
}

/// `M` is placed strictly above the certified bound of `f_UAP`.
pub fn bound_above(certified: f64) -> f64 {
    certified * (1.0 + 1e-6) + 1e-12
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub k: usize,
    pub delta: f64,
    pub f_u: GroupFunction,
    pub f_uperp: GroupFunction,
    pub f_uap: CertifiedFunction,
    pub m: f64,
    pub b: CompactAlgebra,
    pub b_prime: CompactAlgebra,
    pub threshold: Threshold,
    /// `‖f_U‖_{U^{k−1}}` as measured when the decomposition was produced.
    pub gowers_fu: f64,
    pub iterations: u64,
    pub outer_promotions: u64,
    pub energy_trace: Vec<TraceRow>,
}

fn check_density(f: &GroupFunction, k: usize, delta: f64, tol: f64) -> Result<()> {
    if k < 3 {
        return Err(Error::InvalidConfiguration(format!("k must be at least 3, got {k}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidConfiguration(format!("δ must lie in (0, 1], got {delta}")));
    }
    if !f.is_real(tol) || !f.is_bounded(tol) || f.values().iter().any(|v| v.re < -tol) {
        return Err(Error::Precondition("f must be real, non-negative and bounded".into()));
    }
    let mean = f.expectation().re;
    if mean < delta - tol {
        return Err(Error::Precondition(format!("E(f) = {mean} is below δ = {delta}")));
    }
    Ok(())
}

/// One call of the structure dichotomy for the pair `B ⊆ B′`.
///
/// Either `f − E(f|B′)` is uniform enough and a [`Decomposition`] is returned,
/// or `B′` is refined by a level-set algebra of the dual function of
/// `f − E(f|B′)`, which strictly raises the energy.
pub fn structure_dichotomy(
    f: &GroupFunction,
    k: usize,
    delta: f64,
    b: &CompactAlgebra,
    b_prime: &CompactAlgebra,
    config: &StructureConfig,
    step: u64,
) -> Result<DichotomyStep<Decomposition, CompactAlgebra>> {
    let tol = config.tol;
    check_density(f, k, delta, tol)?;
    let d = k - 2;
    if b.order != d || b_prime.order != d {
        return Err(Error::OrderMismatch {
            left: d,
            right: if b.order != d { b.order } else { b_prime.order },
        });
    }
    if !b_prime.partition.refines(&b.partition) {
        return Err(Error::Refinement("B′ does not refine B".into()));
    }
    let tau = tau(k, delta);
    let fs = std::slice::from_ref(f);
    let gap = energy(fs, &b_prime.partition)?.value - energy(fs, &b.partition)?.value;
    if gap > tau * tau * (1.0 + 1e-9) {
        return Err(Error::Precondition(format!("energy gap {gap} exceeds τ² = {}", tau * tau)));
    }

    let coarse = conditional_expectation(f, &b.partition)?;
    let options = ApproximationOptions {
        degree_budget: config.poly_degree,
        tol,
    };
    let approximation = approximate_measurable(&coarse, b, tau, &options)?;
    let f_uap = approximation.certified;
    let m = bound_above(f_uap.bound());

    let f_uperp = conditional_expectation(f, &b_prime.partition)?;
    let f_u = f.sub(&f_uperp)?;
    let gowers_fu = gowers_norm_with_tol(&f_u, k - 1, tol)?.value;
    if gowers_fu <= config.threshold.eval(k, delta, m) {
        return Ok(DichotomyStep {
            statistic: gowers_fu,
            outcome: DichotomyOutcome::Success(Decomposition {
                k,
                delta,
                f_u,
                f_uperp,
                f_uap,
                m,
                b: b.clone(),
                b_prime: b_prime.clone(),
                threshold: config.threshold,
                gowers_fu,
                iterations: 0,
                outer_promotions: 0,
                energy_trace: Vec::new(),
            }),
        });
    }

    let witness = lower_bound_correlation(&f_u, k, gowers_fu, config.cert_nodes, tol)?;
    let correlation = witness.correlation;
    let generator = Arc::new(witness.certified);
    let energy_prime = energy(fs, &b_prime.partition)?.value;
    let alpha_seed: u64 = derive_rng(config.seed, "structure-alpha", step).gen();
    let mut epsilon = correlation / 16.0;
    for _ in 0..=config.epsilon_halvings {
        let level_set = build_level_set_algebra(
            generator.clone(),
            epsilon,
            AlphaChoice::Seeded(alpha_seed),
            &config.levelset,
        )?;
        let refined = join_compact(b_prime, &level_set)?;
        let finer = conditional_expectation(f, &refined.partition)?;
        if finer.l2_distance(&f_uperp)? >= correlation / 4.0 {
            let measured_increment = energy(fs, &refined.partition)?.value - energy_prime;
            return Ok(DichotomyStep {
                statistic: gowers_fu,
                outcome: DichotomyOutcome::EnergyIncrement {
                    algebra: refined,
                    measured_increment,
                    declared_increment: (correlation / 4.0).powi(2),
                },
            });
        }
        epsilon /= 2.0;
    }
    Err(Error::NumericalInconsistency(format!(
        "no level-set refinement reached the increment {} after {} halvings of ε",
        correlation / 4.0,
        config.epsilon_halvings
    )))
}

/// Runs the driver with the structure dichotomy from the trivial algebras of order `k − 2`.
pub fn decompose(f: &GroupFunction, k: usize, delta: f64, config: &StructureConfig) -> Result<Decomposition> {
    check_density(f, k, delta, config.tol)?;
    let trivial = CompactAlgebra::trivial(f.modulus(), k - 2)?;
    let result = energy_increment_driver(
        std::slice::from_ref(f),
        trivial,
        tau(k, delta),
        config.driver_steps,
        |b, b_prime, step| structure_dichotomy(f, k, delta, b, b_prime, config, step),
    )?;
    let mut decomposition = result.payload;
    decomposition.iterations = result.steps;
    decomposition.outer_promotions = result.outer_promotions;
    decomposition.energy_trace = result.trace;
    Ok(decomposition)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Check {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

impl Check {
    fn at_most(value: f64, bound: f64) -> Self {
        Self { value, bound, holds: value <= bound }
    }

    fn at_least(value: f64, bound: f64) -> Self {
        Self { value, bound, holds: value >= bound }
    }
}

/// Independent re-measurement of every property a decomposition must have.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionAudit {
    /// `‖f − f_U − f_{U⊥}‖_∞`.
    pub split: Check,
    /// `‖f_{U⊥} − f_UAP‖_{L²} ≤ δ²/1024k`.
    pub central_0: Check,
    /// The same distance against the dichotomy's own `2τ = 2δ²/5000k`.
    pub central_0_tau: Check,
    /// `E(f_{U⊥}) ≥ δ`.
    pub central_1: Check,
    /// Certified bound `< M`.
    pub central_2: Check,
    /// `‖f_U‖_{U^{k−1}} ≤ t(k, δ, M)`.
    pub uniformity: Check,
    /// Largest `|⟨f_U, 1_A⟩|` over atoms `A` of `B′`.
    pub orthogonality: Check,
    pub uperp_bounded_nonnegative: bool,
    pub b_prime_refines_b: bool,
    pub certificate_valid: bool,
    /// Energy of `B′` never decreases along the trace.
    pub trace_monotone: bool,
    /// Every recorded increment meets its declared lower bound.
    pub increments_meet_declared: bool,
    pub all_hold: bool,
}

impl Decomposition {
    pub fn audit(&self, f: &GroupFunction, tol: f64) -> Result<DecompositionAudit> {
        let k = self.k as f64;
        let delta = self.delta;
        let residual = f.sub(&self.f_u)?.sub(&self.f_uperp)?.linf_norm();
        let split = Check::at_most(residual, 1e-12);
        let distance = self.f_uperp.l2_distance(self.f_uap.func())?;
        let central_0 = Check::at_most(distance, delta * delta / (1024.0 * k) + tol);
        let central_0_tau = Check::at_most(distance, 2.0 * tau(self.k, delta) + tol);
        let central_1 = Check::at_least(self.f_uperp.expectation().re, delta - tol);
        let central_2 = Check {
            value: self.f_uap.bound(),
            bound: self.m,
            holds: self.f_uap.bound() < self.m,
        };
        let measured = gowers_norm_with_tol(&self.f_u, self.k - 1, tol)?.value;
        let uniformity = Check::at_most(measured, self.threshold.eval(self.k, delta, self.m));
        let mut worst = 0.0f64;
        for atom in self.b_prime.partition.atoms() {
            let indicator = GroupFunction::indicator(f.modulus(), &atom)?;
            worst = worst.max(self.f_u.inner_product(&indicator)?.norm());
        }
        let orthogonality = Check::at_most(worst, 1e-10);
        let uperp_bounded_nonnegative =
            self.f_uperp.is_bounded(tol) && self.f_uperp.values().iter().all(|v| v.re >= -tol && v.im.abs() <= tol);
        let b_prime_refines_b = self.b_prime.partition.refines(&self.b.partition);
        let certificate_valid = verify_certificate(&self.f_uap, tol).is_ok();
        let trace_monotone = self
            .energy_trace
            .windows(2)
            .all(|w| w[1].energy_bprime >= w[0].energy_bprime && w[1].energy_b >= w[0].energy_b);
        let increments_meet_declared = self
            .energy_trace
            .iter()
            .all(|row| match (row.increment, row.declared_increment) {
                (Some(inc), Some(declared)) => inc >= declared * (1.0 - 1e-9),
                _ => true,
            });
        let all_hold = split.holds
            && central_0.holds
            && central_1.holds
            && central_2.holds
            && uniformity.holds
            && orthogonality.holds
            && uperp_bounded_nonnegative
            && b_prime_refines_b
            && certificate_valid
            && trace_monotone
            && increments_meet_declared;
        Ok(DecompositionAudit {
            split,
            central_0,
            central_0_tau,
            central_1,
            central_2,
            uniformity,
            orthogonality,
            uperp_bounded_nonnegative,
            b_prime_refines_b,
            certificate_valid,
            trace_monotone,
            increments_meet_declared,
            all_hold,
        })
    }

    pub fn report(&self, f: &GroupFunction, tol: f64) -> Result<DecompositionReport> {
        Ok(DecompositionReport {
            k: self.k,
            delta: self.delta,
            m: self.m,
            threshold: self.threshold.to_string(),
            threshold_value: self.threshold.eval(self.k, self.delta, self.m),
            gowers_fu: self.gowers_fu,
            iterations: self.iterations,
            outer_promotions: self.outer_promotions,
            b: self.b.partition.to_json(),
            b_prime: self.b_prime.partition.to_json(),
            complexity_b: self.b.complexity.value(),
            complexity_bprime: self.b_prime.complexity.value(),
            f_u: FunctionJson::from_function(&self.f_u),
            f_uperp: FunctionJson::from_function(&self.f_uperp),
            f_uap: CertificateJson::from_certified(&self.f_uap),
            audit: self.audit(f, tol)?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub k: usize,
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub threshold: String,
    pub threshold_value: f64,
    #[serde(rename = "gowers_fU")]
    pub gowers_fu: f64,
    pub iterations: u64,
    pub outer_promotions: u64,
    #[serde(rename = "B")]
    pub b: PartitionJson,
    #[serde(rename = "B_prime")]
    pub b_prime: PartitionJson,
    pub complexity_b: f64,
    pub complexity_bprime: f64,
    #[serde(rename = "f_U")]
    pub f_u: FunctionJson,
    #[serde(rename = "f_Uperp")]
    pub f_uperp: FunctionJson,
    #[serde(rename = "f_UAP")]
    pub f_uap: CertificateJson,
    pub audit: DecompositionAudit,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[derive(Clone)]
    struct Labelled(Partition, f64);

    impl Algebra for Labelled {
        fn partition(&self) -> &Partition {
            &self.0
        }
        fn complexity(&self) -> f64 {
            self.1
        }
    }

    #[test]
    fn immediate_success() {
        let f = GroupFunction::indicator(5, &[0, 1]).unwrap();
        let trivial = Labelled(Partition::trivial(5).unwrap(), 0.0);
        let r = energy_increment_driver(&[f], trivial, 0.5, 10, |_, _, _| {
            Ok(DichotomyStep::<_, Labelled> {
                outcome: DichotomyOutcome::Success(()),
                statistic: 0.0,
            })
        })
        .unwrap();
        assert_eq!(r.steps, 1);
        assert_eq!(r.outer_promotions, 0);
        assert_eq!(r.trace[0].which_loop, LoopKind::Halt);
    }

    /// Splits off one point per call; this f gains energy at every split.
    #[test]
    fn promotions_are_bounded_by_the_energy() {
        let n = 7;
        let f = GroupFunction::from_real(n, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let tau = 0.2;
        let trivial = Labelled(Partition::trivial(n).unwrap(), 0.0);
        let r = energy_increment_driver(std::slice::from_ref(&f), trivial, tau, 100, |_, bp, _| {
            let fu = f.sub(&conditional_expectation(&f, &bp.0).unwrap()).unwrap();
            if fu.l2_norm() < 1e-12 {
                return Ok(DichotomyStep {
                    outcome: DichotomyOutcome::Success(()),
                    statistic: 0.0,
                });
            }
            let atoms = bp.0.atoms();
            let fresh = (0..n).find(|&x| atoms[bp.0.label(x)].len() > 1).unwrap();
            let labels: Vec<(usize, bool)> = (0..n).map(|x| (bp.0.label(x), x == fresh)).collect();
            let refined = Labelled(Partition::from_labels(n, &labels).unwrap(), bp.1 + 1.0);
            Ok(DichotomyStep {
                outcome: DichotomyOutcome::EnergyIncrement {
                    algebra: refined,
                    measured_increment: 0.0,
                    declared_increment: 0.0,
                },
                statistic: fu.l2_norm(),
            })
        })
        .unwrap();
        assert!(r.outer_promotions as f64 <= (1.0 / (tau * tau)).ceil());
        assert!(r.trace.windows(2).all(|w| w[1].energy_bprime >= w[0].energy_bprime));
        assert!(r.trace.iter().any(|row| row.which_loop == LoopKind::Inner));
        assert!(r.trace.iter().any(|row| row.which_loop == LoopKind::Outer));
    }

    #[test]
    fn non_termination_carries_trace() {
        let f = GroupFunction::indicator(5, &[0, 1]).unwrap();
        let trivial = Labelled(Partition::trivial(5).unwrap(), 0.0);
        let err = energy_increment_driver(std::slice::from_ref(&f), trivial, 0.5, 3, |b, _, _| {
            let next = Partition::from_labels(5, &[0, 1, 2, 3, 4]).unwrap();
            let alg = if b.0.atom_count() == 1 { next } else { b.0.clone() };
            Ok(DichotomyStep::<(), Labelled> {
                outcome: DichotomyOutcome::EnergyIncrement {
                    algebra: Labelled(alg, 0.0),
                    measured_increment: 0.1,
                    declared_increment: 0.1,
                },
                statistic: 1.0,
            })
        })
        .unwrap_err();
        // The second call offers no energy gain, which the driver rejects.
        assert!(matches!(err, Error::NumericalInconsistency(_)));

        let err = energy_increment_driver(std::slice::from_ref(&f), Labelled(Partition::trivial(5).unwrap(), 0.0), 0.5, 0, |_, _, _| {
            Ok(DichotomyStep::<(), Labelled> {
                outcome: DichotomyOutcome::Success(()),
                statistic: 0.0,
            })
        })
        .unwrap_err();
        match err {
            Error::NonTermination { steps: 0, trace } => assert_eq!(trace, vec![TRACE_HEADER.to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn threshold_parsing() {
        assert_eq!("default".parse::<Threshold>().unwrap(), Threshold::Default);
        assert_eq!("0.05/M".parse::<Threshold>().unwrap(), Threshold::OverM(0.05));
        assert_eq!("1e-3".parse::<Threshold>().unwrap(), Threshold::Constant(1e-3));
        assert!("-1".parse::<Threshold>().is_err());
        assert!("x/M".parse::<Threshold>().is_err());
        assert_eq!(Threshold::OverM(0.05).eval(3, 0.3, 2.0), 0.025);
        let t = Threshold::Default.eval(3, 0.3, 1.0);
        assert!((t - 0.3f64.powi(8) / 16.0).abs() < 1e-20);
    }

    #[test]
    fn constant_density_decomposes_immediately() {
        let delta = 0.3;
        let f = GroupFunction::constant(11, Complex64::new(delta, 0.0)).unwrap();
        let d = decompose(&f, 3, delta, &StructureConfig::default()).unwrap();
        assert_eq!(d.iterations, 1);
        assert_eq!(d.f_u.linf_norm(), 0.0);
        assert_eq!(&d.f_uperp, &f);
        assert!((d.f_uap.bound() - delta).abs() < 1e-15);
        assert!(d.m > delta);
        assert!(d.audit(&f, 1e-9).unwrap().all_hold);
    }

    #[test]
    fn preconditions() {
        let f = GroupFunction::indicator(11, &[0]).unwrap();
        let cfg = StructureConfig::default();
        assert!(matches!(decompose(&f, 3, 0.5, &cfg), Err(Error::Precondition(_))));
        assert!(matches!(decompose(&f, 2, 0.05, &cfg), Err(Error::InvalidConfiguration(_))));
    }
}
