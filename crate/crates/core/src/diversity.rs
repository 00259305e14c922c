//! Observed-state representatives and state-aware diversity.
//!
//! A level is summarized by `n` of the observations collected on it, chosen
//! greedily to maximize the facility-location score
//! `F_rep(S) = sum_{o in O} max_{s in S} k(o, s)` under the cosine kernel.
//! Two levels are compared through their representatives: a level's diversity
//! score sums, over its representatives, the best kernel match among the
//! pooled representatives of the other levels. Lower means more distinct.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math;

/// Cosine similarity with explicit handling of near-zero vectors: two zero
/// vectors are identical (1), a zero and a non-zero vector are unrelated (0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineKernel {
    pub zero_norm_epsilon: f64,
}

impl Default for CosineKernel {
    fn default() -> Self {
        Self {
            zero_norm_epsilon: 1e-9,
        }
    }
}

impl CosineKernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::config(format!(
                "kernel dimension mismatch: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let (sa, sb) = (math::dot(a, a), math::dot(b, b));
        let za = math::sqrt(sa) < self.zero_norm_epsilon;
        let zb = math::sqrt(sb) < self.zero_norm_epsilon;
        Ok(match (za, zb) {
            (true, true) => 1.0,
            (true, false) | (false, true) => 0.0,
            // One square root of the product keeps k(v, v) at exactly 1, and
            // the clamp keeps rounding from lifting any other pair above it.
            (false, false) => (math::dot(a, b) / math::sqrt(sa * sb)).clamp(-1.0, 1.0),
        })
    }

    /// Best match of `v` within `pool`, or `None` for an empty pool.
    fn best_match<V: AsRef<[f64]>>(&self, v: &[f64], pool: &[V]) -> Result<Option<f64>> {
        let mut best: Option<f64> = None;
        for u in pool {
            let k = self.eval(v, u.as_ref())?;
            best = Some(best.map_or(k, |b| b.max(k)));
        }
        Ok(best)
    }
}

/// Cosine similarity with the default zero-norm threshold.
pub fn cosine_kernel(a: &[f64], b: &[f64]) -> Result<f64> {
    CosineKernel::default().eval(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiversityConfig {
    /// Representative capacity `n`.
    pub n: usize,
    /// Subsample size `m'` drawn from all collected observations.
    pub m_prime: usize,
    pub zero_norm_epsilon: f64,
}

impl Default for DiversityConfig {
    fn default() -> Self {
        Self {
            n: 8,
            m_prime: 64,
            zero_norm_epsilon: 1e-9,
        }
    }
}

impl DiversityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("representative capacity n must be positive"));
        }
        if self.n >= self.m_prime {
            return Err(Error::config("representative capacity n must be below m_prime"));
        }
        if !(self.zero_norm_epsilon >= 0.0) {
            return Err(Error::config("zero_norm_epsilon must be non-negative"));
        }
        Ok(())
    }

    pub fn kernel(&self) -> CosineKernel {
        CosineKernel {
            zero_norm_epsilon: self.zero_norm_epsilon,
        }
    }
}

/// The observations chosen to stand for one level.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RepresentativeSet {
    pub level_ref: u64,
    pub capacity: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl RepresentativeSet {
    pub fn dim(&self) -> Option<usize> {
        self.vectors.first().map(Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vectors.len() > self.capacity {
            return Err(Error::config("representative set over capacity"));
        }
        let d = self.dim().unwrap_or(0);
        if self.vectors.iter().any(|v| v.len() != d) {
            return Err(Error::config("representative vectors differ in dimension"));
        }
        if self.vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::config("representative vector has a non-finite entry"));
        }
        Ok(())
    }
}

/// `F_rep(S) = sum over O of the best kernel match in S`.
pub fn rep_score<S: AsRef<[f64]>, O: AsRef<[f64]>>(
    kernel: &CosineKernel,
    selected: &[S],
    observed: &[O],
) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::precondition("rep_score over an empty selection"));
    }
    if observed.is_empty() {
        return Err(Error::precondition("rep_score over no observations"));
    }
    let mut total = 0.0;
    for o in observed {
        total += kernel
            .best_match(o.as_ref(), selected)?
            .expect("selection is non-empty");
    }
    Ok(total)
}

/// `F_rep(o | S) = F_rep({o} ∪ S) - F_rep(S)`, and `F_rep({o})` for empty `S`.
pub fn marginal_gain<S: AsRef<[f64]>, O: AsRef<[f64]>>(
    kernel: &CosineKernel,
    candidate: &[f64],
    selected: &[S],
    observed: &[O],
) -> Result<f64> {
    let mut gain = 0.0;
    for o in observed {
        let o = o.as_ref();
        let with = kernel.eval(o, candidate)?;
        gain += match kernel.best_match(o, selected)? {
            None => with,
            Some(best) => (with - best).max(0.0),
        };
    }
    Ok(gain)
}

/// Greedy facility-location selection of `n` pool indices. Every step adds
/// the candidate with the largest marginal gain over the whole pool, lowest
/// index on ties, and keeps going until `n` are picked or the pool runs out.
pub fn greedy_select<V: AsRef<[f64]>>(kernel: &CosineKernel, pool: &[V], n: usize) -> Result<Vec<usize>> {
    let m = pool.len();
    let mut sim = Vec::with_capacity(m * m);
    for a in pool {
        for b in pool {
            sim.push(kernel.eval(a.as_ref(), b.as_ref())?);
        }
    }
    let mut best: Option<Vec<f64>> = None;
    let mut chosen = Vec::with_capacity(n.min(m));
    let mut taken = alloc::vec![false; m];
    while chosen.len() < n.min(m) {
        let mut pick: Option<(usize, f64)> = None;
        for c in (0..m).filter(|&c| !taken[c]) {
            let gain: f64 = match &best {
                None => (0..m).map(|i| sim[i * m + c]).sum(),
                Some(b) => (0..m).map(|i| (sim[i * m + c] - b[i]).max(0.0)).sum(),
            };
            if pick.is_none_or(|(_, g)| gain > g) {
                pick = Some((c, gain));
            }
        }
        let (c, _) = pick.expect("an untaken candidate remains");
        taken[c] = true;
        chosen.push(c);
        best = Some(match best {
            None => (0..m).map(|i| sim[i * m + c]).collect(),
            Some(b) => (0..m).map(|i| b[i].max(sim[i * m + c])).collect(),
        });
    }
    Ok(chosen)
}

/// Uniform subsample of `min(m', |O|)` observations, kept in their original
/// order, then greedy selection of `n` representatives among them.
pub fn select_representatives<V: AsRef<[f64]>, R: Rng + ?Sized>(
    observed: &[V],
    cfg: &DiversityConfig,
    level_ref: u64,
    rng: &mut R,
) -> Result<RepresentativeSet> {
    if observed.is_empty() {
        return Err(Error::precondition("no observations to represent"));
    }
    let sample = subsample(observed, cfg.m_prime, rng);
    let picks = greedy_select(&cfg.kernel(), &sample, cfg.n)?;
    Ok(RepresentativeSet {
        level_ref,
        capacity: cfg.n,
        vectors: fill_to(&picks, cfg.n).map(|i| sample[i].to_vec()).collect(),
    })
}

/// Greedy picks cycled until there are `n` of them. A short episode can
/// offer fewer than `n` observations; repeating picks leaves `F_rep`
/// unchanged and keeps every set at size `n`, so diversity sums stay
/// comparable across levels.
pub(crate) fn fill_to(picks: &[usize], n: usize) -> impl Iterator<Item = usize> + '_ {
    picks.iter().copied().cycle().take(if picks.is_empty() { 0 } else { n })
}

pub(crate) fn subsample<'a, V: AsRef<[f64]>, R: Rng + ?Sized>(
    observed: &'a [V],
    size: usize,
    rng: &mut R,
) -> Vec<&'a [f64]> {
    if observed.len() <= size {
        return observed.iter().map(AsRef::as_ref).collect();
    }
    let mut idx = rand::seq::index::sample(rng, observed.len(), size).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| observed[i].as_ref()).collect()
}

/// State-aware diversity of one level against a collection of other levels:
/// the sum over its representatives of the best kernel match among the union
/// of the others' representatives. Higher means more redundant.
pub fn level_div_score(
    kernel: &CosineKernel,
    target: &RepresentativeSet,
    others: &[&RepresentativeSet],
) -> Result<f64> {
    let pool: Vec<&[f64]> = others
        .iter()
        .flat_map(|s| s.vectors.iter().map(Vec::as_slice))
        .collect();
    if pool.is_empty() {
        return Err(Error::precondition("diversity score needs other representatives"));
    }
    let mut total = 0.0;
    for v in &target.vectors {
        total += kernel.best_match(v, &pool)?.expect("pool is non-empty");
    }
    Ok(total)
}

/// Diversity of a whole buffer: each level scored against all the others.
pub fn buffer_div_score(kernel: &CosineKernel, sets: &[&RepresentativeSet]) -> Result<f64> {
    if sets.len() < 2 {
        return Err(Error::precondition("buffer diversity needs at least two levels"));
    }
    let mut total = 0.0;
    for i in 0..sets.len() {
        let others: Vec<&RepresentativeSet> = sets
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, s)| *s)
            .collect();
        total += level_div_score(kernel, sets[i], &others)?;
    }
    Ok(total)
}
