//! Float helpers that work without `std`.

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Numerically stable softmax of `logits`, restricted to `allowed` when given.
/// Disallowed entries get probability exactly zero.
pub(crate) fn softmax_masked(logits: &[f64], allowed: Option<&[bool]>) -> alloc::vec::Vec<f64> {
    let ok = |i: usize| allowed.is_none_or(|m| m[i]);
    let max = logits
        .iter()
        .enumerate()
        .filter(|&(i, _)| ok(i))
        .map(|(_, &z)| z)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut probs: alloc::vec::Vec<f64> = logits
        .iter()
        .enumerate()
        .map(|(i, &z)| if ok(i) { exp(z - max) } else { 0.0 })
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    probs
}

/// Log-sum-exp of the allowed logits.
pub(crate) fn log_sum_exp(logits: &[f64], allowed: Option<&[bool]>) -> f64 {
    let ok = |i: usize| allowed.is_none_or(|m| m[i]);
    let max = logits
        .iter()
        .enumerate()
        .filter(|&(i, _)| ok(i))
        .map(|(_, &z)| z)
        .fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logits
        .iter()
        .enumerate()
        .filter(|&(i, _)| ok(i))
        .map(|(_, &z)| exp(z - max))
        .sum();
    max + ln(total)
}

/// Categorical draw from a probability vector. Falls back to the last
/// positive entry when rounding leaves the cumulative sum short of `u`.
pub(crate) fn sample_categorical(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}
