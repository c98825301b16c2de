//! Finite σ-algebras on Z_N, stored as one atom label per point.
//!
//! Labels are canonical: atoms are numbered in order of their least element,
//! so two partitions are equal exactly when their label vectors are equal.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cyclic::{is_prime, GroupFunction};
use crate::error::{Error, Result};
use crate::sum::{sum_f64, ComplexSum};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    labels: Vec<usize>,
    atom_count: usize,
}

/// Wire format `{"n": N, "labels": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionJson {
    pub n: usize,
    pub labels: Vec<usize>,
}

impl Partition {
    /// Builds a partition from arbitrary labels, relabelling canonically.
    pub fn from_labels<L: Copy + Eq + std::hash::Hash>(n: usize, labels: &[L]) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::NotPrime(n));
        }
        if labels.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: labels.len(),
            });
        }
        let mut map = HashMap::new();
        let canonical = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Ok(Self {
            n,
            labels: canonical,
            atom_count: map.len(),
        })
    }

    pub fn from_atoms(n: usize, atoms: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (i, atom) in atoms.iter().enumerate() {
            for &x in atom {
                if x >= n || labels[x] != usize::MAX {
                    return Err(Error::Input(format!("atoms do not partition Z_{n} (point {x})")));
                }
                labels[x] = i;
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(Error::Input(format!("atoms do not cover Z_{n}")));
        }
        Self::from_labels(n, &labels)
    }

    pub fn trivial(n: usize) -> Result<Self> {
        Self::from_labels(n, &vec![0usize; n])
    }

    pub fn discrete(n: usize) -> Result<Self> {
        Self::from_labels(n, &(0..n).collect::<Vec<_>>())
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn label(&self, x: usize) -> usize {
        self.labels[x % self.n]
    }

    /// Atoms in canonical order, each sorted ascending.
    pub fn atoms(&self) -> Vec<Vec<usize>> {
        let mut atoms = vec![Vec::new(); self.atom_count];
        for (x, &l) in self.labels.iter().enumerate() {
            atoms[l].push(x);
        }
        atoms
    }

    fn check_same(&self, other: &Partition) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Coarsest common refinement.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.check_same(other)?;
        let pairs: Vec<(usize, usize)> = self.labels.iter().copied().zip(other.labels.iter().copied()).collect();
        Partition::from_labels(self.n, &pairs)
    }

    /// True when every atom of `self` lies inside an atom of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> bool {
        if self.n != coarse.n {
            return false;
        }
        let mut image = vec![usize::MAX; self.atom_count];
        for (fine, &c) in self.labels.iter().zip(&coarse.labels) {
            if image[*fine] == usize::MAX {
                image[*fine] = c;
            } else if image[*fine] != c {
                return false;
            }
        }
        true
    }

    /// The partition whose atoms are `Ω − k` for the atoms `Ω` of `self`.
    pub fn shift(&self, k: i64) -> Partition {
        let s = crate::cyclic::residue(k, self.n);
        let labels: Vec<usize> = (0..self.n).map(|x| self.labels[(x + s) % self.n]).collect();
        Partition::from_labels(self.n, &labels).expect("shift keeps the modulus")
    }

    /// True when `f` is constant on every atom, within `tol`.
    pub fn measures(&self, f: &GroupFunction, tol: f64) -> bool {
        if f.modulus() != self.n {
            return false;
        }
        let mut rep: Vec<Option<Complex64>> = vec![None; self.atom_count];
        self.labels.iter().zip(f.values()).all(|(&l, &v)| match rep[l] {
            None => {
                rep[l] = Some(v);
                true
            }
            Some(r) => (r - v).norm() <= tol,
        })
    }

    pub fn to_json(&self) -> PartitionJson {
        PartitionJson {
            n: self.n,
            labels: self.labels.clone(),
        }
    }

    pub fn from_json(json: &PartitionJson) -> Result<Self> {
        Self::from_labels(json.n, &json.labels)
    }
}

/// Atom averages of `f`, indexed by canonical label.
pub fn atom_means(f: &GroupFunction, b: &Partition) -> Result<Vec<Complex64>> {
    if f.modulus() != b.modulus() {
        return Err(Error::Dimension {
            expected: b.modulus(),
            found: f.modulus(),
        });
    }
    let mut sums = vec![ComplexSum::default(); b.atom_count()];
    let mut sizes = vec![0usize; b.atom_count()];
    for (x, &l) in b.labels().iter().enumerate() {
        sums[l].add(f.at(x));
        sizes[l] += 1;
    }
    Ok(sums
        .iter()
        .zip(&sizes)
        .map(|(s, &c)| s.value() / c as f64)
        .collect())
}

/// `E(f|B)(x)`: the average of `f` over the atom containing `x`.
pub fn conditional_expectation(f: &GroupFunction, b: &Partition) -> Result<GroupFunction> {
    let means = atom_means(f, b)?;
    GroupFunction::new(b.modulus(), b.labels().iter().map(|&l| means[l]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    pub value: f64,
    pub tuple_size: usize,
}

/// `E_f(B) = Σ_j ‖E(f_j|B)‖²`.
pub fn energy(fs: &[GroupFunction], b: &Partition) -> Result<Energy> {
    if fs.is_empty() {
        return Err(Error::InvalidArity("energy of an empty tuple".into()));
    }
    let parts = fs
        .iter()
        .map(|f| conditional_expectation(f, b).map(|e| e.l2_norm().powi(2)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Energy {
        value: sum_f64(parts),
        tuple_size: fs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PythagorasReport {
    /// `Σ_j ‖E(f_j|B′) − E(f_j|B)‖²`.
    pub lhs: f64,
    /// `E_f(B′) − E_f(B)`.
    pub rhs: f64,
    pub difference: f64,
}

/// Evaluates both sides of the Pythagoras identity for nested `coarse ⊆ fine`.
pub fn pythagoras_check(fs: &[GroupFunction], coarse: &Partition, fine: &Partition) -> Result<PythagorasReport> {
    if !fine.refines(coarse) {
        return Err(Error::Refinement(
            "the second partition does not refine the first".into(),
        ));
    }
    let mut lhs_parts = Vec::with_capacity(fs.len());
    for f in fs {
        let a = conditional_expectation(f, coarse)?;
        let b = conditional_expectation(f, fine)?;
        lhs_parts.push(b.sub(&a)?.l2_norm().powi(2));
    }
    let lhs = sum_f64(lhs_parts);
    let rhs = energy(fs, fine)?.value - energy(fs, coarse)?.value;
    Ok(PythagorasReport {
        lhs,
        rhs,
        difference: (lhs - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_bounded;

    #[test]
    fn canonical_labels() {
        let p = Partition::from_labels(5, &[7, 7, 3, 3, 9]).unwrap();
        assert_eq!(p.labels(), &[0, 0, 1, 1, 2]);
        assert_eq!(p.atom_count(), 3);
        assert_eq!(p.atoms(), vec![vec![0, 1], vec![2, 3], vec![4]]);
    }

    #[test]
    fn conditional_expectation_examples() {
        let f = random_bounded(7, 1);
        let trivial = conditional_expectation(&f, &Partition::trivial(7).unwrap()).unwrap();
        assert!(trivial.values().iter().all(|v| (v - f.expectation()).norm() < 1e-15));
        assert_eq!(conditional_expectation(&f, &Partition::discrete(7).unwrap()).unwrap(), f);

        let b = Partition::from_atoms(5, &[vec![0, 1], vec![2, 3, 4]]).unwrap();
        let e = conditional_expectation(&GroupFunction::indicator(5, &[0]).unwrap(), &b).unwrap();
        let expected = [0.5, 0.5, 0.0, 0.0, 0.0];
        for (v, w) in e.values().iter().zip(expected) {
            assert!((v.re - w).abs() < 1e-15 && v.im == 0.0);
        }
    }

    #[test]
    fn join_examples() {
        let b = Partition::from_atoms(5, &[vec![0, 1, 2], vec![3, 4]]).unwrap();
        let c = Partition::from_atoms(5, &[vec![0], vec![1, 2, 3, 4]]).unwrap();
        assert_eq!(b.join(&b).unwrap(), b);
        assert_eq!(Partition::trivial(5).unwrap().join(&b).unwrap(), b);
        assert_eq!(
            b.join(&c).unwrap(),
            Partition::from_atoms(5, &[vec![0], vec![1, 2], vec![3, 4]]).unwrap()
        );
    }

    #[test]
    fn energy_examples() {
        let fs = [random_bounded(7, 2), random_bounded(7, 3)];
        let trivial = energy(&fs, &Partition::trivial(7).unwrap()).unwrap().value;
        let expected: f64 = fs.iter().map(|f| f.expectation().norm_sqr()).sum();
        assert!((trivial - expected).abs() < 1e-14);
        let discrete = energy(&fs, &Partition::discrete(7).unwrap()).unwrap().value;
        let expected: f64 = fs.iter().map(|f| f.l2_norm().powi(2)).sum();
        assert!((discrete - expected).abs() < 1e-14);
        assert!(matches!(
            energy(&[], &Partition::trivial(7).unwrap()),
            Err(Error::InvalidArity(_))
        ));
    }

    #[test]
    fn pythagoras_examples() {
        let f = [GroupFunction::indicator(5, &[0]).unwrap()];
        let t = Partition::trivial(5).unwrap();
        let d = Partition::discrete(5).unwrap();
        let r = pythagoras_check(&f, &t, &t).unwrap();
        assert!(r.lhs.abs() < 1e-15 && r.rhs.abs() < 1e-15);
        let r = pythagoras_check(&f, &t, &d).unwrap();
        assert!((r.lhs - 0.16).abs() < 1e-12 && (r.rhs - 0.16).abs() < 1e-12);
        let b = Partition::from_atoms(5, &[vec![0, 1], vec![2, 3, 4]]).unwrap();
        let c = Partition::from_atoms(5, &[vec![0, 2], vec![1, 3, 4]]).unwrap();
        assert!(matches!(pythagoras_check(&f, &b, &c), Err(Error::Refinement(_))));
    }

    #[test]
    fn refinement_test_is_explicit() {
        let b = Partition::from_atoms(5, &[vec![0, 1], vec![2, 3, 4]]).unwrap();
        let fine = Partition::from_atoms(5, &[vec![0], vec![1], vec![2, 4], vec![3]]).unwrap();
        assert!(fine.refines(&b));
        assert!(!b.refines(&fine));
        assert!(Partition::discrete(5).unwrap().refines(&fine));
    }
}
