//! Compensated summation.
//!
//! Shell norms weight entries by `lambda_j^{2s}`, which spans many orders of
//! magnitude at moderate truncation levels, so every reduction in the crate
//! goes through Neumaier's variant of Kahan summation. The running error term
//! is exact for each addition (Fast2Sum on the ordered pair).

#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Neumaier>().total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(xs), 2.0);
        assert_eq!(xs.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn wide_dynamic_range() {
        let xs = (0..40).map(|j| libm::pow(4.0, j as f64) * 1e-30).chain([1.0, -1.0]);
        let exact = (libm::pow(4.0, 40.0) - 1.0) / 3.0 * 1e-30;
        assert!((sum(xs) - exact).abs() <= 1e-15 * exact);
    }
}
