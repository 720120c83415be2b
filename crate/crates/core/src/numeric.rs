//! Low-level numeric helpers: exactly rounded summation and percentiles.

/// Running sum of `f64` terms that is exact up to the final rounding.
///
/// Maintains a list of non-overlapping partials (Shewchuk's expansion, the
/// same scheme as Python's `math.fsum`). `value()` returns the correctly
/// rounded sum of everything added so far, which makes the result a function
/// of the *multiset* of terms only: permuting the insertion order cannot
/// change the output bits. Welfare comparisons across differently-labeled
/// but isomorphic networks rely on this.
#[derive(Clone, Debug)]
pub struct ExactSum {
    partials: [f64; 48],
    len: usize,
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum { partials: [0.0; 48], len: 0 }
    }

    pub fn add(&mut self, term: f64) {
        debug_assert!(term.is_finite(), "non-finite term in ExactSum");
        let mut x = term;
        let mut i = 0;
        for j in 0..self.len {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        assert!(i < self.partials.len(), "ExactSum partials overflow");
        self.partials[i] = x;
        self.len = i + 1;
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, terms: I) {
        for t in terms {
            self.add(t);
        }
    }

    /// Correctly rounded value of the accumulated sum.
    pub fn value(&self) -> f64 {
        // Partials are ordered by increasing magnitude and non-overlapping.
        // Sum from the largest down, with the round-half-even correction
        // when a lower partial would flip the tie (the math.fsum tail).
        if self.len == 0 {
            return 0.0;
        }
        let p = &self.partials[..self.len];
        let mut j = self.len - 1;
        let mut hi = p[j];
        let mut lo = 0.0;
        while j > 0 {
            let x = hi;
            let y = p[j - 1];
            j -= 1;
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        if j > 0 && ((lo < 0.0 && p[j - 1] < 0.0) || (lo > 0.0 && p[j - 1] > 0.0)) {
            let y2 = lo * 2.0;
            let x2 = hi + y2;
            if y2 == x2 - hi {
                hi = x2;
            }
        }
        hi
    }

    pub fn sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
        let mut s = ExactSum::new();
        s.extend(terms);
        s.value()
    }
}

/// Linearly interpolated percentile of a pooled histogram of integer values.
///
/// `counts[d]` holds how many observations equal `d`. `q` in [0, 1]. Matches
/// the usual "index = q * (m - 1), interpolate between neighbors" rule on the
/// sorted expansion of the histogram. Empty input yields 0.
pub fn percentile_from_histogram(counts: &[u64], q: f64) -> f64 {
    let m: u64 = counts.iter().sum();
    if m == 0 {
        return 0.0;
    }
    let pos = q * ((m - 1) as f64);
    let lo_rank = pos.floor() as u64;
    let hi_rank = pos.ceil() as u64;
    let frac = pos - pos.floor();
    let value_at = |rank: u64| -> f64 {
        let mut cum = 0u64;
        for (d, &c) in counts.iter().enumerate() {
            cum += c;
            if cum > rank {
                return d as f64;
            }
        }
        (counts.len() - 1) as f64
    };
    let lo = value_at(lo_rank);
    if hi_rank == lo_rank {
        lo
    } else {
        let hi = value_at(hi_rank);
        lo + frac * (hi - lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_sum_basics() {
        assert_eq!(ExactSum::sum([]), 0.0);
        assert_eq!(ExactSum::sum([1.5]), 1.5);
        assert_eq!(ExactSum::sum([1e16, 1.0, -1e16]), 1.0);
        assert_eq!(ExactSum::sum([0.1; 10]), {
            // reference: fsum of ten 0.1's is exactly 1.0 after one rounding
            1.0
        });
    }

    #[test]
    fn exact_sum_cancellation() {
        let terms = [1e100, 1.0, -1e100, 0.5];
        assert_eq!(ExactSum::sum(terms), 1.5);
    }

    proptest! {
        #[test]
        fn exact_sum_order_independent(mut xs in proptest::collection::vec(-1e9f64..1e9, 1..40), seed in 0u64..1000) {
            let a = ExactSum::sum(xs.iter().copied());
            // deterministic shuffle
            let mut s = seed;
            for i in (1..xs.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                xs.swap(i, j);
            }
            let b = ExactSum::sum(xs.iter().copied());
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn exact_sum_close_to_naive(xs in proptest::collection::vec(-1e6f64..1e6, 1..50)) {
            let exact = ExactSum::sum(xs.iter().copied());
            let naive: f64 = xs.iter().sum();
            prop_assert!((exact - naive).abs() <= 1e-6_f64.max(naive.abs() * 1e-12));
        }
    }

    #[test]
    fn percentile_interpolates() {
        // values: [1, 1, 2] -> p90 at index 1.8 -> 1.8
        let mut counts = vec![0u64; 3];
        counts[1] = 2;
        counts[2] = 1;
        assert!((percentile_from_histogram(&counts, 0.9) - 1.8).abs() < 1e-12);
        // all twos
        let counts = vec![0, 0, 10];
        assert_eq!(percentile_from_histogram(&counts, 0.9), 2.0);
        assert_eq!(percentile_from_histogram(&[], 0.9), 0.0);
    }
}
