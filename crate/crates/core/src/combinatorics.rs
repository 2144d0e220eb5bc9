//! Counting helpers: binomials, multinomials, compositions, Poisson weights.

use crate::scalar::Real;

/// Exact binomial coefficient, saturating at `u128::MAX`.
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Binomial coefficient as a floating-point value.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_count(n - i) / T::from_count(i + 1);
    }
    acc
}

/// Multinomial coefficient `(sum)! / prod(parts!)`.
pub fn multinomial<T: Real>(parts: &[usize]) -> T {
    let mut remaining: usize = parts.iter().sum();
    let mut acc = T::one();
    for &p in parts {
        acc = acc * binomial::<T>(remaining, p);
        remaining -= p;
    }
    acc
}

pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_count(k))
}

/// Poisson weight `e^{-mean} mean^k / k!`, evaluated in log space.
pub fn poisson_weight<T: Real>(mean: T, k: usize) -> T {
    if mean == T::zero() {
        return if k == 0 { T::one() } else { T::zero() };
    }
    let mut log_fact = T::zero();
    for j in 2..=k {
        log_fact = log_fact + T::from_count(j).ln();
    }
    (T::from_count(k) * mean.ln() - mean - log_fact).exp()
}

/// Number of ways to place `quanta` indistinguishable quanta into `modes` modes.
pub fn composition_count(modes: usize, quanta: usize) -> u128 {
    if modes == 0 {
        return u128::from(quanta == 0);
    }
    binomial_u128((quanta + modes - 1) as u64, quanta as u64)
}

/// All compositions of `quanta` into `modes` non-negative parts, in descending
/// lexicographic order: `(n, 0, .., 0)` first, `(0, .., 0, n)` last.
pub fn compositions(modes: usize, quanta: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if modes == 0 {
        if quanta == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut current = vec![0usize; modes];
    fill(&mut current, 0, quanta, &mut out);
    out
}

fn fill(current: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v;
        fill(current, pos + 1, remaining - v, out);
    }
    current[pos] = 0;
}
