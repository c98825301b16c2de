//! Compensated (Neumaier) summation.
//!
//! Every reduction in the crate goes through these helpers so that results do
//! not depend on how work was split across threads: partial results are always
//! collected in index order and then summed here.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn sum_f64<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Neumaier::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

pub fn sum_complex<I: IntoIterator<Item = Complex64>>(zs: I) -> Complex64 {
    let mut acc = ComplexSum::default();
    for z in zs {
        acc.add(z);
    }
    acc.value()
}

pub fn mean_complex<I: IntoIterator<Item = Complex64>>(zs: I) -> Complex64 {
    let mut acc = ComplexSum::default();
    let mut count = 0usize;
    for z in zs {
        acc.add(z);
        count += 1;
    }
    acc.value() / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum_f64(xs), 2.0);
    }
}
