//! Van der Waerden machinery: monochromatic progressions and polychromatic
//! fans in colourings of `{1..n}`, exact small `W(k, m)` by backtracking, the
//! colour-focusing step, and the big-integer bound it yields.
//!
//! Positions are 1-based throughout. A progression `[a, r, k]` is
//! `a, a + r, …, a + (k−1)r`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Colouring {
    pub n: usize,
    pub m: usize,
    /// `colours[i − 1]` is the colour of position `i`, in `1..=m`.
    pub colours: Vec<usize>,
}

impl Colouring {
    pub fn new(m: usize, colours: Vec<usize>) -> Result<Self> {
        let c = Colouring {
            n: colours.len(),
            m,
            colours,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Input("a colouring needs at least one colour".into()));
        }
        if self.colours.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: self.colours.len(),
            });
        }
        if let Some((i, &c)) = self.colours.iter().enumerate().find(|(_, &c)| c == 0 || c > self.m) {
            return Err(Error::Input(format!("position {} has colour {c} outside 1..={}", i + 1, self.m)));
        }
        Ok(())
    }

    /// Colour of position `x`, or `None` outside `{1..n}`.
    pub fn colour(&self, x: i64) -> Option<usize> {
        if x >= 1 && (x as usize) <= self.n {
            Some(self.colours[x as usize - 1])
        } else {
            None
        }
    }
}

/// Colour shared by every term of `[a, r, len]`, if all terms lie in `{1..n}` and agree.
fn common_colour(c: &Colouring, a: i64, r: i64, len: usize) -> Option<usize> {
    let first = c.colour(a)?;
    for j in 1..len as i64 {
        if c.colour(a + j * r)? != first {
            return None;
        }
    }
    Some(first)
}

pub fn verify_mono_ap(c: &Colouring, k: usize, a: usize, r: usize) -> bool {
    k >= 1 && r >= 1 && common_colour(c, a as i64, r as i64, k).is_some()
}

/// Lexicographically least `(a, r)` with `r ≥ 1` and `[a, r, k]` monochromatic.
pub fn find_mono_ap(c: &Colouring, k: usize) -> Result<Option<(usize, usize)>> {
    if k == 0 {
        return Err(Error::InvalidConfiguration("k must be at least 1".into()));
    }
    for a in 1..=c.n {
        let mut r = 1;
        while a + (k - 1) * r <= c.n {
            if common_colour(c, a as i64, r as i64, k).is_some() {
                return Ok(Some((a, r)));
            }
            if k == 1 {
                break;
            }
            r += 1;
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fan {
    pub base: usize,
    pub radius: usize,
    pub degree: usize,
    /// Nonzero steps `r_1..r_d`; they may be negative.
    pub steps: Vec<i64>,
    /// `c_0` (the base) followed by the spoke colours `c_1..c_d`.
    pub colours: Vec<usize>,
}

/// Checks every fan invariant directly against the colouring.
pub fn verify_fan(c: &Colouring, fan: &Fan) -> bool {
    let k = fan.radius;
    if k < 1 || fan.steps.len() != fan.degree || fan.colours.len() != fan.degree + 1 {
        return false;
    }
    let a = fan.base as i64;
    if c.colour(a) != Some(fan.colours[0]) {
        return false;
    }
    for (i, &r) in fan.steps.iter().enumerate() {
        if r == 0 || c.colour(a + (k as i64 - 1) * r).is_none() {
            return false;
        }
        if k >= 2 && common_colour(c, a + r, r, k - 1) != Some(fan.colours[i + 1]) {
            return false;
        }
    }
    let mut seen = fan.colours.clone();
    seen.sort_unstable();
    seen.dedup();
    seen.len() == fan.colours.len()
}

/// Lexicographically least polychromatic fan `(a, r_1 < … < r_d)` of radius `k` and degree `d`.
///
/// Degree 0 gives the bare point 1.
pub fn find_polychromatic_fan(c: &Colouring, k: usize, d: usize) -> Result<Option<Fan>> {
    if k < 2 {
        return Err(Error::InvalidConfiguration("fans need radius k >= 2".into()));
    }
    if c.n == 0 {
        return Ok(None);
    }
    let n = c.n as i64;
    for a in 1..=n {
        let base = c.colour(a).expect("inside");
        let mut spokes: Vec<(i64, usize)> = Vec::new();
        let reach = (n - 1) / (k as i64 - 1);
        for r in -reach..=reach {
            if r == 0 || c.colour(a + (k as i64 - 1) * r).is_none() {
                continue;
            }
            if let Some(colour) = common_colour(c, a + r, r, k - 1) {
                if colour != base {
                    spokes.push((r, colour));
                }
            }
        }
        let mut chosen = Vec::with_capacity(d);
        if choose_spokes(&spokes, 0, d, base, &mut chosen) {
            let fan = Fan {
                base: a as usize,
                radius: k,
                degree: d,
                steps: chosen.iter().map(|&(r, _)| r).collect(),
                colours: std::iter::once(base).chain(chosen.iter().map(|&(_, col)| col)).collect(),
            };
            debug_assert!(verify_fan(c, &fan));
            return Ok(Some(fan));
        }
    }
    Ok(None)
}

fn choose_spokes(spokes: &[(i64, usize)], from: usize, d: usize, base: usize, chosen: &mut Vec<(i64, usize)>) -> bool {
    if chosen.len() == d {
        return true;
    }
    for i in from..spokes.len() {
        let (_, colour) = spokes[i];
        if colour == base || chosen.iter().any(|&(_, c)| c == colour) {
            continue;
        }
        chosen.push(spokes[i]);
        if choose_spokes(spokes, i + 1, d, base, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

#[derive(Debug, Clone, Serialize)]
pub struct VdwResult {
    pub k: usize,
    pub m: usize,
    /// `W(k, m)` when the search finished below `n_max`.
    pub value: Option<usize>,
    /// Every `m`-colouring of `{1..n}` has a monochromatic `k`-AP for `n ≥` this; `W > n_max` otherwise.
    pub lower_bound: usize,
    /// Lexicographically least longest avoiding colouring found.
    pub avoider: Colouring,
    pub nodes: u64,
}

/// Whether the last colour placed completes a monochromatic `k`-AP.
fn completes_ap(colours: &[u8], k: usize) -> bool {
    let p = colours.len() - 1;
    if k <= 1 {
        return true;
    }
    let c = colours[p];
    (1..=p / (k - 1)).any(|r| (1..k).all(|j| colours[p - j * r] == c))
}

struct Search<'a> {
    k: usize,
    m: u8,
    n_max: usize,
    budget: u64,
    nodes: &'a AtomicU64,
    aborted: &'a AtomicBool,
}

const FLUSH: u64 = 1 << 12;

impl Search<'_> {
    fn count(&self, local: &mut u64) -> bool {
        *local += 1;
        if *local >= FLUSH {
            let total = self.nodes.fetch_add(*local, Ordering::Relaxed) + *local;
            *local = 0;
            if total > self.budget {
                self.aborted.store(true, Ordering::Relaxed);
            }
        }
        !self.aborted.load(Ordering::Relaxed)
    }

    /// Depth-first search in lexicographic order; colours appear in order of first use.
    fn dfs(&self, colours: &mut Vec<u8>, used: u8, best: &mut Vec<u8>, local: &mut u64, stop_at: usize) {
        if !self.count(local) {
            return;
        }
        if colours.len() > best.len() {
            *best = colours.clone();
        }
        if colours.len() == stop_at {
            return;
        }
        for c in 1..=self.m.min(used + 1) {
            colours.push(c);
            if !completes_ap(colours, self.k) {
                self.dfs(colours, used.max(c), best, local, stop_at);
            }
            colours.pop();
        }
    }

    /// Avoiding prefixes of exactly `depth` positions, in lexicographic order.
    fn prefixes(&self, colours: &mut Vec<u8>, used: u8, depth: usize, out: &mut Vec<(Vec<u8>, u8)>) {
        if colours.len() == depth {
            out.push((colours.clone(), used));
            return;
        }
        for c in 1..=self.m.min(used + 1) {
            colours.push(c);
            if !completes_ap(colours, self.k) {
                self.prefixes(colours, used.max(c), depth, out);
            }
            colours.pop();
        }
    }
}

/// Exact `W(k, m)` by exhaustive backtracking over colourings of `{1..n}`, `n ≤ n_max`.
///
/// The search is split over avoiding prefixes and run in parallel; the
/// reported avoider is the lexicographically least longest one. `node_budget`
/// caps the number of search nodes.
pub fn vdw_number(k: usize, m: usize, n_max: usize, node_budget: u64) -> Result<VdwResult> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidConfiguration("k and m must be at least 1".into()));
    }
    if m > u8::MAX as usize - 1 {
        return Err(Error::InvalidConfiguration(format!("at most 254 colours are supported, got {m}")));
    }
    let nodes = AtomicU64::new(0);
    let aborted = AtomicBool::new(false);
    let search = Search {
        k,
        m: m as u8,
        n_max,
        budget: node_budget,
        nodes: &nodes,
        aborted: &aborted,
    };

    // Longest avoider within the prefix depth, found sequentially.
    let depth = n_max.min(14);
    let mut shallow_best = Vec::new();
    let mut local = 0;
    search.dfs(&mut Vec::new(), 0, &mut shallow_best, &mut local, depth);
    let mut prefixes = Vec::new();
    search.prefixes(&mut Vec::new(), 0, depth, &mut prefixes);

    let deep: Vec<Vec<u8>> = prefixes
        .into_par_iter()
        .map(|(mut prefix, used)| {
            let mut best = Vec::new();
            let mut local = 0;
            search.dfs(&mut prefix, used, &mut best, &mut local, search.n_max);
            search.nodes.fetch_add(local, Ordering::Relaxed);
            best
        })
        .collect();
    nodes.fetch_add(local, Ordering::Relaxed);
    if aborted.load(Ordering::Relaxed) {
        return Err(Error::ResourceLimit(format!(
            "van der Waerden search exceeded {node_budget} nodes"
        )));
    }
    // Prefixes are in lexicographic order, so the first longest one wins ties.
    let mut best = shallow_best;
    for candidate in deep {
        if candidate.len() > best.len() {
            best = candidate;
        }
    }
    let avoider = Colouring::new(m, best.iter().map(|&c| c as usize).collect())?;
    if find_mono_ap(&avoider, k)?.is_some() {
        return Err(Error::NumericalInconsistency("search returned a colouring with a monochromatic progression".into()));
    }
    let length = avoider.n;
    let (value, lower_bound) = if length < n_max {
        (Some(length + 1), length + 1)
    } else {
        (None, n_max + 1)
    };
    Ok(VdwResult {
        k,
        m,
        value,
        lower_bound,
        avoider,
        nodes: nodes.load(Ordering::Relaxed),
    })
}

/// A monochromatic progression or a polychromatic fan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FocusWitness {
    Progression { a: usize, r: usize, k: usize },
    Fan(Fan),
}

#[derive(Debug, Clone, Serialize)]
pub struct FocusStep {
    pub witness: FocusWitness,
    /// Whether the block progression was reversed to get a negative step.
    pub reversed: bool,
}

/// Monochromatic `[a, r, k]` with `r` of either sign, rewritten with a positive step.
fn positive_progression(a: i64, r: i64, k: usize) -> FocusWitness {
    let (start, step) = if r < 0 { (a + (k as i64 - 1) * r, -r) } else { (a, r) };
    FocusWitness::Progression {
        a: start as usize,
        r: step as usize,
        k,
    }
}

/// Sizes of the two sub-instances in one colour-focusing step.
#[derive(Debug, Clone, Copy)]
pub struct FocusSizes {
    /// Block length `N_1`.
    pub n1: usize,
    /// Number of blocks `N_2`.
    pub n2: usize,
}

/// One colour-focusing step on a colouring of `{1..4kN_1N_2}`.
///
/// Each block `{bkN_1 + 1..bkN_1 + N_1}` is handed to `block_solver`, which
/// returns a monochromatic `k`-AP or a polychromatic fan of degree `d − 1`
/// (positions relative to the block). Blocks are then coloured by their fan
/// data, `progression_solver` finds a monochromatic `(k−1)`-AP `[b, s, k−1]`
/// of blocks, and the fans along it are combined into a fan of degree `d`
/// based at `(b − s)kN_1 + a`, after reversing the progression so that `s < 0`.
/// The result is checked against the colouring before it is returned.
pub fn fan_focus_step<B, P>(
    c: &Colouring,
    k: usize,
    d: usize,
    sizes: FocusSizes,
    mut block_solver: B,
    mut progression_solver: P,
) -> Result<FocusStep>
where
    B: FnMut(&Colouring, usize, usize) -> Result<FocusWitness>,
    P: FnMut(&Colouring, usize) -> Result<Option<(usize, i64)>>,
{
    let FocusSizes { n1, n2 } = sizes;
    if k < 2 || d < 1 || n1 == 0 || n2 == 0 {
        return Err(Error::InvalidConfiguration("need k >= 2, d >= 1 and non-empty blocks".into()));
    }
    let needed = 4 * k * n1 * n2;
    if c.n < needed {
        return Err(Error::Precondition(format!("the colouring has {} positions, {needed} are needed", c.n)));
    }
    let block_len = k * n1;
    let mut fans = Vec::with_capacity(n2);
    for b in 1..=n2 {
        let offset = b * block_len;
        let sub = Colouring::new(c.m, c.colours[offset..offset + n1].to_vec())?;
        let sub_failure = |reason: String| Error::SubSolver { block: b, reason };
        match block_solver(&sub, k, d - 1).map_err(|e| sub_failure(e.to_string()))? {
            FocusWitness::Progression { a, r, k: len } => {
                let a = a + offset;
                if len != k || !verify_mono_ap(c, k, a, r) {
                    return Err(sub_failure("the returned progression is not monochromatic".into()));
                }
                return Ok(FocusStep {
                    witness: FocusWitness::Progression { a, r, k },
                    reversed: false,
                });
            }
            FocusWitness::Fan(fan) => {
                if fan.degree != d - 1 || fan.radius != k || !verify_fan(&sub, &fan) {
                    return Err(sub_failure("the returned fan is invalid".into()));
                }
                fans.push(fan);
            }
        }
    }

    let mut classes: HashMap<(usize, Vec<i64>, Vec<usize>), usize> = HashMap::new();
    let block_colours: Vec<usize> = fans
        .iter()
        .map(|f| {
            let next = classes.len() + 1;
            *classes.entry((f.base, f.steps.clone(), f.colours.clone())).or_insert(next)
        })
        .collect();
    let block_colouring = Colouring::new(classes.len(), block_colours)?;
    let (b, s) = progression_solver(&block_colouring, k - 1)?.ok_or_else(|| Error::SubSolver {
        block: 0,
        reason: "no monochromatic progression of blocks".into(),
    })?;
    if s == 0 || common_colour(&block_colouring, b as i64, s, k - 1).is_none() {
        return Err(Error::SubSolver {
            block: 0,
            reason: "the block progression is not monochromatic".into(),
        });
    }
    let (b, s, reversed) = if s > 0 {
        (b as i64 + (k as i64 - 2) * s, -s, true)
    } else {
        (b as i64, s, false)
    };
    let template = &fans[b as usize - 1];
    let kn1 = block_len as i64;
    let base = (b - s) * kn1 + template.base as i64;
    let mut steps = vec![s * kn1];
    steps.extend(template.steps.iter().map(|&r| s * kn1 + r));
    let spoke_colours = template.colours.clone();
    let base_colour = c
        .colour(base)
        .ok_or_else(|| Error::NumericalInconsistency(format!("base point {base} lies outside the colouring")))?;

    let witness = match spoke_colours.iter().position(|&col| col == base_colour) {
        Some(i) => {
            let w = positive_progression(base, steps[i], k);
            if let FocusWitness::Progression { a, r, .. } = w {
                if !verify_mono_ap(c, k, a, r) {
                    return Err(Error::NumericalInconsistency("combined progression is not monochromatic".into()));
                }
            }
            w
        }
        None => {
            let fan = Fan {
                base: base as usize,
                radius: k,
                degree: d,
                steps,
                colours: std::iter::once(base_colour).chain(spoke_colours).collect(),
            };
            if !verify_fan(c, &fan) {
                return Err(Error::NumericalInconsistency("combined fan fails verification".into()));
            }
            FocusWitness::Fan(fan)
        }
    };
    Ok(FocusStep { witness, reversed })
}

/// Exhaustive block solver: a monochromatic `k`-AP if there is one, else the least fan of degree `d`.
pub fn exhaustive_block_solver(c: &Colouring, k: usize, d: usize) -> Result<FocusWitness> {
    if let Some((a, r)) = find_mono_ap(c, k)? {
        return Ok(FocusWitness::Progression { a, r, k });
    }
    find_polychromatic_fan(c, k, d)?
        .map(FocusWitness::Fan)
        .ok_or_else(|| Error::Input("the block has neither a monochromatic progression nor a fan".into()))
}

/// Exhaustive progression solver with positive steps.
pub fn exhaustive_progression_solver(c: &Colouring, k: usize) -> Result<Option<(usize, i64)>> {
    Ok(find_mono_ap(c, k)?.map(|(a, r)| (a, r as i64)))
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerEntry {
    pub label: String,
    /// Exact decimal digit count, when the value was computed.
    pub digits: Option<u64>,
    /// Decimal value, when it has at most 60 digits.
    pub value: Option<String>,
    /// Lower bound on the digit count, for values that were not computed.
    pub digits_lower_bound: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub m: usize,
    /// The bound itself, in decimal, when it fits the digit limit.
    pub value: Option<String>,
    pub digits: Option<u64>,
    pub overflow: bool,
    /// Lower bound on the digit count of the bound when it overflowed.
    pub digits_lower_bound: Option<String>,
    pub digit_limit: u64,
    pub tower: Vec<TowerEntry>,
    #[serde(skip)]
    pub exact: Option<BigUint>,
}

impl BoundReport {
    /// Whether the bound is at least `w`.
    pub fn dominates(&self, w: u64) -> bool {
        match &self.exact {
            Some(v) => *v >= BigUint::from(w),
            // An overflowing bound has more than `digit_limit` digits.
            None => (w as f64).log10() < self.digit_limit as f64,
        }
    }
}

/// Exceeded-size marker carrying a lower bound on the number of decimal digits.
#[derive(Debug, Clone)]
struct Overflow {
    digits_lower_bound: BigUint,
}

const LOG10_2: f64 = std::f64::consts::LOG10_2;

/// Decimal digits of `x`, bracketed from its bit length.
fn digit_bounds(x: &BigUint) -> (u64, u64) {
    let bits = x.bits();
    if bits == 0 {
        return (1, 1);
    }
    let lower = ((bits - 1) as f64 * LOG10_2).floor() as u64 + 1;
    let upper = (bits as f64 * LOG10_2).floor() as u64 + 1;
    (lower, upper)
}

fn exact_digits(x: &BigUint) -> u64 {
    let (lo, hi) = digit_bounds(x);
    if lo == hi {
        return lo;
    }
    if *x >= BigUint::from(10u32).pow(lo as u32) {
        hi
    } else {
        lo
    }
}

struct BoundCalculator {
    digit_limit: u64,
    tower: Vec<TowerEntry>,
    vdw_memo: HashMap<(usize, BigUint), std::result::Result<BigUint, Overflow>>,
}

impl BoundCalculator {
    fn record(&mut self, label: String, value: &std::result::Result<BigUint, Overflow>) {
        let entry = match value {
            Ok(v) => {
                let digits = exact_digits(v);
                TowerEntry {
                    label,
                    digits: Some(digits),
                    value: (digits <= 60).then(|| v.to_string()),
                    digits_lower_bound: None,
                }
            }
            Err(o) => TowerEntry {
                label,
                digits: None,
                value: None,
                digits_lower_bound: Some(o.digits_lower_bound.to_string()),
            },
        };
        self.tower.push(entry);
    }

    fn guard(&self, x: BigUint) -> std::result::Result<BigUint, Overflow> {
        let (lo, _) = digit_bounds(&x);
        if lo > self.digit_limit {
            Err(Overflow {
                digits_lower_bound: BigUint::from(lo),
            })
        } else {
            Ok(x)
        }
    }

    /// `N_vdW(k, m)`: 1 for `k = 1`, else `N_FAN(k, m, m)`.
    fn vdw(&mut self, k: usize, m: &BigUint) -> std::result::Result<BigUint, Overflow> {
        if k == 1 {
            return Ok(BigUint::one());
        }
        if let Some(v) = self.vdw_memo.get(&(k, m.clone())) {
            return v.clone();
        }
        // Each degree multiplies by at least 4k >= 8, so N_FAN(k, m, m) >= 8^m.
        let floor_digits = m.clone() * BigUint::from(903u32) / BigUint::from(1000u32);
        let result = if floor_digits > BigUint::from(self.digit_limit) {
            Err(Overflow {
                digits_lower_bound: floor_digits,
            })
        } else if k == 2 {
            // N_vdW(1, ·) = 1, so every degree multiplies by exactly 8.
            let exponent = m.to_u32().expect("bounded by the digit limit");
            self.guard(BigUint::from(8u32).pow(exponent))
        } else {
            let degree = m.to_usize().expect("bounded by the digit limit");
            self.fan(k, m, degree)
        };
        self.record(format!("N_vdW({k}, {m})"), &result);
        self.vdw_memo.insert((k, m.clone()), result.clone());
        result
    }

    /// `N_FAN(k, m, d)` by iterating `N := 4k·N_1·N_2` from `N_FAN(k, m, 0) = 1`.
    fn fan(&mut self, k: usize, m: &BigUint, d: usize) -> std::result::Result<BigUint, Overflow> {
        let mut n1 = BigUint::one();
        for degree in 1..=d {
            let colours = m.pow(degree as u32) * n1.pow(degree as u32);
            let n2 = match self.vdw(k - 1, &colours) {
                Ok(v) => v,
                Err(o) => {
                    let overflow = Err(Overflow {
                        digits_lower_bound: o.digits_lower_bound,
                    });
                    self.record(format!("N_FAN({k}, {m}, {degree})"), &overflow);
                    return overflow;
                }
            };
            let next = self.guard(BigUint::from(4 * k) * &n1 * n2);
            self.record(format!("N_FAN({k}, {m}, {degree})"), &next);
            n1 = next?;
        }
        Ok(n1)
    }
}

/// Upper bound for `N_vdW(k, m)` from the colour-focusing recursion.
///
/// `N_FAN(k, m, d)` is indexed by the progression length `k`: it guarantees a
/// monochromatic `k`-AP or a polychromatic fan of radius `k` and degree `d`.
/// Values with more than `digit_limit` decimal digits are not computed; the
/// report then carries a lower bound on their size.
pub fn bound_recursion(k: usize, m: usize, digit_limit: u64) -> Result<BoundReport> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidConfiguration("k and m must be at least 1".into()));
    }
    let mut calc = BoundCalculator::new(digit_limit);
    let result = calc.vdw(k, &BigUint::from(m));
    Ok(calc.finish(k, m, result))
}

/// `N_FAN(k, m, d)` on its own, under the same digit limit.
pub fn fan_bound(k: usize, m: usize, d: usize, digit_limit: u64) -> Result<BoundReport> {
    if k < 2 || m == 0 {
        return Err(Error::InvalidConfiguration("fans need k >= 2 and m >= 1".into()));
    }
    let mut calc = BoundCalculator::new(digit_limit);
    let result = calc.fan(k, &BigUint::from(m), d);
    Ok(calc.finish(k, m, result))
}

impl BoundCalculator {
    fn new(digit_limit: u64) -> Self {
        BoundCalculator {
            digit_limit,
            tower: Vec::new(),
            vdw_memo: HashMap::new(),
        }
    }

    fn finish(self, k: usize, m: usize, result: std::result::Result<BigUint, Overflow>) -> BoundReport {
        let digit_limit = self.digit_limit;
        match result {
            Ok(v) => BoundReport {
                k,
                m,
                value: Some(v.to_string()),
                digits: Some(exact_digits(&v)),
                overflow: false,
                digits_lower_bound: None,
                digit_limit,
                tower: self.tower,
                exact: Some(v),
            },
            Err(o) => BoundReport {
                k,
                m,
                value: None,
                digits: None,
                overflow: true,
                digits_lower_bound: Some(o.digits_lower_bound.to_string()),
                digit_limit,
                tower: self.tower,
                exact: None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(m: usize, cs: &[usize]) -> Colouring {
        Colouring::new(m, cs.to_vec()).unwrap()
    }

    #[test]
    fn monochromatic_progressions() {
        assert_eq!(find_mono_ap(&col(1, &[1, 1, 1]), 3).unwrap(), Some((1, 1)));
        assert_eq!(find_mono_ap(&col(2, &[1, 2, 1, 2, 1, 2, 1, 2]), 3).unwrap(), Some((1, 2)));
        assert_eq!(find_mono_ap(&col(2, &[1, 2]), 2).unwrap(), None);
        assert!(Colouring::new(2, vec![1, 3]).is_err());
    }

    #[test]
    fn fans() {
        let f = find_polychromatic_fan(&col(2, &[1, 2, 2]), 2, 1).unwrap().unwrap();
        assert_eq!((f.base, f.steps.clone(), f.colours.clone()), (1, vec![1], vec![1, 2]));
        let zero = find_polychromatic_fan(&col(2, &[2, 1]), 3, 0).unwrap().unwrap();
        assert_eq!((zero.base, zero.degree), (1, 0));
        assert_eq!(find_polychromatic_fan(&col(1, &[1; 9]), 3, 1).unwrap(), None);
        // Negative steps are allowed: base 3 looks left at 2 and 1.
        let c = col(2, &[2, 2, 1]);
        let f = find_polychromatic_fan(&c, 3, 1).unwrap().unwrap();
        assert_eq!((f.base, f.steps.clone()), (3, vec![-1]));
        assert!(verify_fan(&c, &f));
    }

    #[test]
    fn small_numbers() {
        for m in 1..=4 {
            let w = vdw_number(2, m, 20, u64::MAX).unwrap();
            assert_eq!(w.value, Some(m + 1));
        }
        let w = vdw_number(3, 2, 20, u64::MAX).unwrap();
        assert_eq!(w.value, Some(9));
        assert_eq!(w.avoider.n, 8);
        assert_eq!(vdw_number(1, 3, 5, u64::MAX).unwrap().value, Some(1));
        let capped = vdw_number(3, 2, 6, u64::MAX).unwrap();
        assert_eq!((capped.value, capped.lower_bound), (None, 7));
        assert!(matches!(vdw_number(3, 3, 30, 1000), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn bounds() {
        assert_eq!(bound_recursion(1, 5, 1_000_000).unwrap().value.as_deref(), Some("1"));
        assert_eq!(bound_recursion(2, 2, 1_000_000).unwrap().value.as_deref(), Some("64"));
        let r = bound_recursion(3, 2, 1_000_000).unwrap();
        assert!(r.overflow);
        assert!(r.tower.iter().any(|t| t.label == "N_FAN(3, 2, 1)" && t.value.as_deref() == Some("768")));
        assert!(r.dominates(9));
        assert_eq!(fan_bound(3, 2, 0, 10).unwrap().value.as_deref(), Some("1"));
        assert_eq!(fan_bound(3, 2, 1, 10).unwrap().value.as_deref(), Some("768"));
        assert!(fan_bound(3, 2, 1, 2).unwrap().overflow);
    }

    #[test]
    fn focusing_with_unit_blocks() {
        // k = 2, d = 1: blocks have one point, N_2 = 1, so n = 8.
        for pattern in 0u32..256 {
            let cs: Vec<usize> = (0..8).map(|i| 1 + (pattern >> i & 1) as usize).collect();
            let c = col(2, &cs);
            let step = fan_focus_step(
                &c,
                2,
                1,
                FocusSizes { n1: 1, n2: 1 },
                exhaustive_block_solver,
                exhaustive_progression_solver,
            )
            .unwrap();
            match step.witness {
                FocusWitness::Progression { a, r, k } => assert!(verify_mono_ap(&c, k, a, r)),
                FocusWitness::Fan(f) => assert!(verify_fan(&c, &f) && f.degree == 1),
            }
        }
    }
}
