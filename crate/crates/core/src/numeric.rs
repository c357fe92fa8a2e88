//! Small numerical helpers shared by the enumerators and bound evaluators.

use statrs::function::gamma::ln_gamma;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Accumulates `Σ sign_i · exp(log_i)` without underflowing small weights,
/// rescaling whenever a larger magnitude shows up.
#[derive(Debug, Clone, Copy)]
pub struct SignedLogSum {
    shift: f64,
    acc: CompensatedSum,
}

impl Default for SignedLogSum {
    fn default() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            acc: CompensatedSum::new(),
        }
    }
}

impl SignedLogSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `weight · value` where `weight = exp(log_weight)`.
    pub fn add_weighted(&mut self, log_weight: f64, value: f64) {
        if value == 0.0 || log_weight == f64::NEG_INFINITY {
            return;
        }
        let log_mag = log_weight + value.abs().ln();
        let sign = value.signum();
        if log_mag > self.shift {
            if self.shift.is_finite() {
                let scale = (self.shift - log_mag).exp();
                let rescaled = self.acc.value() * scale;
                self.acc = CompensatedSum::new();
                self.acc.add(rescaled);
            }
            self.shift = log_mag;
        }
        self.acc.add(sign * (log_mag - self.shift).exp());
    }

    pub fn value(&self) -> f64 {
        if self.shift == f64::NEG_INFINITY {
            0.0
        } else {
            self.acc.value() * self.shift.exp()
        }
    }
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `n!` as a float (exact for n ≤ 20, rounded beyond).
pub fn factorial(n: u64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Binomial coefficient as u128; `None` on overflow.
pub fn binomial_u128(n: u64, r: u64) -> Option<u128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Binomial coefficient as f64.
pub fn binomial(n: u64, r: u64) -> f64 {
    match binomial_u128(n, r) {
        Some(v) => v as f64,
        None => (ln_factorial(n) - ln_factorial(r) - ln_factorial(n - r)).exp(),
    }
}

/// Number of compositions of `n` into `parts` nonnegative parts, `C(n+parts-1, parts-1)`.
pub fn composition_count(n: u64, parts: usize) -> f64 {
    if parts == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    binomial(n + parts as u64 - 1, parts as u64 - 1)
}

/// Log-probability of the count vector `z` under `Mult(n, d)` with uniform bins.
pub fn multinomial_log_weight(z: &[u64]) -> f64 {
    let n: u64 = z.iter().sum();
    let d = z.len() as f64;
    ln_factorial(n) - z.iter().map(|&c| ln_factorial(c)).sum::<f64>() - n as f64 * d.ln()
}

/// Lexicographic enumeration of all compositions of `n` into `parts` parts.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Vec<u64>,
    done: bool,
}

impl Compositions {
    pub fn new(n: u64, parts: usize) -> Self {
        assert!(parts >= 1, "compositions need at least one part");
        let mut current = vec![0; parts];
        current[parts - 1] = n;
        Self {
            current,
            done: false,
        }
    }

    /// Advances in place; returns `None` once exhausted.
    pub fn next_ref(&mut self) -> Option<&[u64]> {
        if self.done {
            return None;
        }
        // First call returns the initial state; advance lazily afterwards.
        Some(&self.current)
    }

    fn advance(&mut self) {
        let d = self.current.len();
        if d == 1 {
            self.done = true;
            return;
        }
        // Find the rightmost position before the last with the tail nonzero.
        let last = self.current[d - 1];
        if last > 0 {
            // move one unit from the tail into position d-2
            self.current[d - 2] += 1;
            self.current[d - 1] = last - 1;
            return;
        }
        // tail is zero: find rightmost i < d-1 with current[i] > 0 and i > 0
        let mut i = d - 2;
        loop {
            if self.current[i] > 0 {
                if i == 0 {
                    self.done = true;
                    return;
                }
                let v = self.current[i];
                self.current[i] = 0;
                self.current[i - 1] += 1;
                self.current[d - 1] = v - 1;
                return;
            }
            if i == 0 {
                self.done = true;
                return;
            }
            i -= 1;
        }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        self.advance();
        Some(out)
    }
}

/// Calls `f` on each composition of `n` into `parts` parts without allocating per item.
pub fn for_each_composition(n: u64, parts: usize, mut f: impl FnMut(&[u64])) {
    let mut it = Compositions::new(n, parts);
    while let Some(z) = it.next_ref() {
        f(z);
        it.advance();
    }
}

/// Digits of `index` in base `base`, most significant first, padded to `len`.
pub fn digits(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// Inverse of [`digits`].
pub fn undigits(d: &[usize], base: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * base + x)
}

/// All permutations of `0..m` (Heap's algorithm order is irrelevant to callers).
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(m), &mut vec![false; m], &mut out);
    out
}

/// Sorted p-subsets of `0..n` in lexicographic order.
pub fn subsets_lex(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if p > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..p).collect();
    loop {
        out.push(cur.clone());
        // rightmost index that can be incremented
        let mut i = p;
        while i > 0 {
            i -= 1;
            if cur[i] < n - p + i {
                cur[i] += 1;
                for j in i + 1..p {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return out;
            }
        }
        if p == 0 {
            return out;
        }
    }
}

/// Colexicographic rank of a sorted subset: `Σ C(s_i, i+1)`.
pub fn colex_rank(subset: &[usize]) -> u64 {
    subset
        .iter()
        .enumerate()
        .map(|(i, &s)| binomial_u128(s as u64, i as u64 + 1).unwrap_or(0) as u64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_are_complete_and_distinct() {
        let all: Vec<_> = Compositions::new(5, 3).collect();
        assert_eq!(all.len() as f64, composition_count(5, 3));
        for z in &all {
            assert_eq!(z.iter().sum::<u64>(), 5);
        }
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
        assert_eq!(Compositions::new(0, 4).count(), 1);
        assert_eq!(Compositions::new(7, 1).count(), 1);
    }

    #[test]
    fn multinomial_weights_sum_to_one() {
        let mut acc = SignedLogSum::new();
        for_each_composition(12, 4, |z| acc.add_weighted(multinomial_log_weight(z), 1.0));
        assert!((acc.value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signed_log_sum_handles_tiny_and_negative_terms() {
        let mut acc = SignedLogSum::new();
        acc.add_weighted(-800.0, 1.0);
        acc.add_weighted(0.0, -2.0);
        acc.add_weighted(0.0, 3.0);
        assert!((acc.value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn subset_enumeration_and_colex() {
        let s = subsets_lex(5, 3);
        assert_eq!(s.len(), 10);
        assert_eq!(s[0], vec![0, 1, 2]);
        assert_eq!(s[9], vec![2, 3, 4]);
        let mut ranks: Vec<u64> = s.iter().map(|x| colex_rank(x)).collect();
        ranks.sort();
        assert_eq!(ranks, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_u128(30, 2), Some(435));
        assert_eq!(binomial(10, 0), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(digits(5, 2, 3), vec![1, 0, 1]);
        assert_eq!(undigits(&[1, 0, 1], 2), 5);
    }
}
