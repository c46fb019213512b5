//! Small numeric helpers shared across modules.

/// Neumaier-compensated accumulator: the running compensation recovers the
/// low-order bits lost to cancellation or to adding small terms to a large
/// running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.sum + self.c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_bits() {
        let mut acc = Compensated::default();
        acc.add(1.0);
        acc.add(1e-16);
        acc.add(1e-16);
        acc.add(-1.0);
        let exact = 2e-16;
        assert_eq!(acc.value(), exact);
    }

    #[test]
    fn matches_plain_sum_on_benign_input() {
        let mut acc = Compensated::default();
        for i in 1..=100 {
            acc.add(i as f64);
        }
        assert_eq!(acc.value(), 5050.0);
    }
}
