//! Compensated accumulation and the equality tolerance used for comparing sums.

use num_complex::Complex64;

/// Neumaier's variant of Kahan summation. The result does not depend on the
/// magnitude ordering of the terms, only on the order they are added in.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Componentwise compensated accumulator for complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
    terms: u64,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
        self.terms += 1;
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    /// Number of terms added so far.
    pub fn terms(&self) -> u64 {
        self.terms
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

/// Absolute tolerance for comparing two sums of `terms` unit-scale terms:
/// `max(1e-9, terms * 2^-48)`.
pub fn sum_tolerance(terms: u64) -> f64 {
    (terms as f64 * 2f64.powi(-48)).max(1e-9)
}

/// Equality of two sums under [`sum_tolerance`].
pub fn sums_agree(a: Complex64, b: Complex64, terms: u64) -> bool {
    (a - b).norm() <= sum_tolerance(terms)
}
