//! Compensated summation primitives.
//!
//! Long weighted orbit sums (1e5 terms and more) are the workhorse of this
//! crate, so plain `+=` accumulation is not acceptable. Everything funnels
//! through the Neumaier variant of Kahan summation: the compensation term
//! also captures the case where the increment dominates the running sum.

/// Neumaier compensated accumulator for one `f64` component.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Fixed-width vector of compensated accumulators.
#[derive(Debug, Clone)]
pub struct KahanVec {
    parts: Vec<KahanSum>,
}

impl KahanVec {
    pub fn zeros(dim: usize) -> Self {
        Self {
            parts: vec![KahanSum::new(); dim],
        }
    }

    #[inline]
    pub fn add_scaled(&mut self, scale: f64, v: &[f64]) {
        debug_assert_eq!(self.parts.len(), v.len());
        for (p, &x) in self.parts.iter_mut().zip(v) {
            p.add(scale * x);
        }
    }

    #[inline]
    pub fn add(&mut self, v: &[f64]) {
        debug_assert_eq!(self.parts.len(), v.len());
        for (p, &x) in self.parts.iter_mut().zip(v) {
            p.add(x);
        }
    }

    pub fn value(&self) -> Vec<f64> {
        self.parts.iter().map(|p| p.value()).collect()
    }

    pub fn scaled_value(&self, scale: f64) -> Vec<f64> {
        self.parts.iter().map(|p| scale * p.value()).collect()
    }

    pub fn dim(&self) -> usize {
        self.parts.len()
    }
}

/// Euclidean norm of a slice.
#[inline]
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean distance between two slices of equal length.
#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_increments() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..10_000 {
            s.add(1e-16);
        }
        let exact = 1.0 + 1e-12;
        assert!((s.value() - exact).abs() < 1e-15);
    }

    #[test]
    fn kahan_handles_large_increment_after_small() {
        let mut s = KahanSum::new();
        s.add(1e-16);
        s.add(1.0);
        s.add(-1.0);
        assert_eq!(s.value(), 1e-16);
    }

    #[test]
    fn vector_accumulator_matches_scalar() {
        let mut v = KahanVec::zeros(2);
        let mut a = KahanSum::new();
        let mut b = KahanSum::new();
        for j in 0..1000 {
            let x = (j as f64).sin();
            let y = (j as f64).cos();
            v.add_scaled(0.5, &[x, y]);
            a.add(0.5 * x);
            b.add(0.5 * y);
        }
        assert_eq!(v.value(), vec![a.value(), b.value()]);
    }
}
