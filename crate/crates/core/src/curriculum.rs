//! Capacity-`K` level buffer with diversity-driven replacement and the
//! rank-prioritized replay distribution.
//!
//! Entries are kept in insertion order; a replacement removes the evicted
//! entry and appends the newcomer. Cached diversity scores always hold each
//! entry's score against the rest of the current buffer and are refreshed
//! after every mutation.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::diversity::{
    fill_to, greedy_select, level_div_score, subsample, CosineKernel, DiversityConfig, RepresentativeSet,
};
use crate::env::LevelParams;
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplayConfig {
    /// Buffer capacity `K`.
    pub capacity: usize,
    /// Probability of generating a new level on an iteration.
    pub p: f64,
    /// Weight of the diversity prioritization in the replay mixture.
    pub rho: f64,
    /// Rank temperature, shared by both prioritizations.
    pub beta: f64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            capacity: 32,
            p: 0.5,
            rho: 0.5,
            beta: 0.3,
        }
    }
}

impl ReplayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::config("buffer capacity K must be positive"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::config("p must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::config("rho must lie in [0, 1]"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("beta must be positive"));
        }
        Ok(())
    }
}

/// Which incumbent a full buffer gives up for a newcomer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ReplacementRule {
    /// Evict the most redundant level if the newcomer is less redundant.
    #[default]
    Diversity,
    /// Evict the lowest learning potential if the newcomer's is higher.
    LearningPotential,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BufferEntry {
    pub id: u64,
    pub level: LevelParams,
    pub reps: RepresentativeSet,
    /// Positive value loss from the latest visit.
    pub gae_score: f64,
    /// Cached diversity score against the rest of the buffer.
    pub div_score: f64,
    pub visits: u64,
    pub last_iteration: u64,
}

impl BufferEntry {
    pub fn new(id: u64, level: LevelParams, reps: RepresentativeSet, gae_score: f64, iteration: u64) -> Self {
        Self {
            id,
            level,
            reps,
            gae_score,
            div_score: 0.0,
            visits: 0,
            last_iteration: iteration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    InsertedEmptySlot,
    Replaced(u64),
    Rejected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelBuffer {
    config: ReplayConfig,
    rule: ReplacementRule,
    zero_norm_epsilon: f64,
    entries: Vec<BufferEntry>,
    /// `matches[i][j][r]`: best kernel match of representative `r` of entry
    /// `i` among the representatives of entry `j`. Kept in step with
    /// `entries` so a mutation only rescans one row and one column.
    matches: Vec<Vec<Vec<f64>>>,
}

impl LevelBuffer {
    pub fn new(config: ReplayConfig, rule: ReplacementRule, kernel: CosineKernel) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            rule,
            zero_norm_epsilon: kernel.zero_norm_epsilon,
            entries: Vec::new(),
            matches: Vec::new(),
        })
    }

    /// Restores a buffer as stored, cached scores included.
    pub fn from_parts(
        config: ReplayConfig,
        rule: ReplacementRule,
        kernel: CosineKernel,
        entries: Vec<BufferEntry>,
    ) -> Result<Self> {
        let mut buffer = Self {
            config,
            rule,
            zero_norm_epsilon: kernel.zero_norm_epsilon,
            entries,
            matches: Vec::new(),
        };
        buffer.validate()?;
        for i in 0..buffer.entries.len() {
            buffer.matches.push(Vec::new());
            buffer.link_last(i)?;
        }
        Ok(buffer)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.entries.len() > self.config.capacity {
            return Err(Error::config(format!(
                "{} entries exceed capacity {}",
                self.entries.len(),
                self.config.capacity
            )));
        }
        let dim = self.entries.iter().find_map(|e| e.reps.dim());
        for (i, e) in self.entries.iter().enumerate() {
            e.reps.validate()?;
            if e.reps.dim().is_some() && e.reps.dim() != dim {
                return Err(Error::config(format!(
                    "entry {} has mismatched representative dimension",
                    e.id
                )));
            }
            if !(e.gae_score >= 0.0 && e.gae_score.is_finite()) {
                return Err(Error::config(format!("entry {} has an invalid gae score", e.id)));
            }
            if self.entries[..i].iter().any(|o| o.id == e.id) {
                return Err(Error::config(format!("duplicate level id {}", e.id)));
            }
        }
        Ok(())
    }

    pub fn config(&self) -> &ReplayConfig {
        &self.config
    }

    pub fn rule(&self) -> ReplacementRule {
        self.rule
    }

    pub fn kernel(&self) -> CosineKernel {
        CosineKernel {
            zero_norm_epsilon: self.zero_norm_epsilon,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.config.capacity
    }

    pub fn entries(&self) -> &[BufferEntry] {
        &self.entries
    }

    pub fn get(&self, id: u64) -> Option<&BufferEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    fn position(&self, id: u64) -> Result<usize> {
        self.entries
            .iter()
            .position(|e| e.id == id)
            .ok_or(Error::UnknownLevel(id))
    }

    /// Admits `candidate`. Below capacity it is appended. At capacity the
    /// replacement rule decides; under the diversity rule every level in
    /// `{candidate} ∪ buffer` is scored against all the others and the
    /// candidate displaces the highest-scoring incumbent only if its own score
    /// is strictly lower.
    pub fn try_insert(&mut self, candidate: BufferEntry) -> Result<InsertOutcome> {
        candidate.reps.validate()?;
        if let Some(d) = self.entries.iter().find_map(|e| e.reps.dim()) {
            if candidate.reps.dim() != Some(d) {
                return Err(Error::config("candidate representatives differ in dimension"));
            }
        }
        if self.entries.iter().any(|e| e.id == candidate.id) {
            return Err(Error::config(format!("level id {} already buffered", candidate.id)));
        }
        if !self.is_full() {
            self.entries.push(candidate);
            self.matches.push(Vec::new());
            self.link_last(self.entries.len() - 1)?;
            self.refresh_div_scores()?;
            return Ok(InsertOutcome::InsertedEmptySlot);
        }
        let evict = match self.rule {
            ReplacementRule::Diversity => {
                let (cand_score, scores) = self.pooled_div_scores(&candidate)?;
                let incumbents: Vec<(f64, u64)> = scores
                    .iter()
                    .zip(&self.entries)
                    .map(|(&s, e)| (s, e.last_iteration))
                    .collect();
                choose_eviction(cand_score, &incumbents)
            }
            ReplacementRule::LearningPotential => {
                let incumbents: Vec<(f64, u64)> =
                    self.entries.iter().map(|e| (-e.gae_score, e.last_iteration)).collect();
                choose_eviction(-candidate.gae_score, &incumbents)
            }
        };
        match evict {
            Some(i) => {
                let old = self.entries.remove(i);
                self.matches.remove(i);
                for row in &mut self.matches {
                    row.remove(i);
                }
                self.entries.push(candidate);
                self.matches.push(Vec::new());
                self.link_last(self.entries.len() - 1)?;
                self.refresh_div_scores()?;
                Ok(InsertOutcome::Replaced(old.id))
            }
            None => Ok(InsertOutcome::Rejected),
        }
    }

    /// Diversity scores over the pool `{candidate} ∪ buffer`: the candidate's
    /// score against every incumbent, and each incumbent's score against the
    /// other incumbents plus the candidate.
    pub fn pooled_div_scores(&self, candidate: &BufferEntry) -> Result<(f64, Vec<f64>)> {
        let kernel = self.kernel();
        let n = self.entries.len();
        let mut cand_rows = Vec::with_capacity(n);
        let mut against_cand = Vec::with_capacity(n);
        for e in &self.entries {
            cand_rows.push(best_matches(&kernel, &candidate.reps, &e.reps)?);
            against_cand.push(best_matches(&kernel, &e.reps, &candidate.reps)?);
        }
        let cand = if n == 0 {
            0.0
        } else {
            pooled_score(
                candidate.reps.vectors.len(),
                cand_rows
                    .iter()
                    .zip(&self.entries)
                    .map(|(r, e)| (r.as_slice(), !e.reps.vectors.is_empty())),
            )?
        };
        let cand_nonempty = !candidate.reps.vectors.is_empty();
        let scores = (0..n)
            .map(|i| {
                let rows = self
                    .other_rows(i)
                    .chain(core::iter::once((against_cand[i].as_slice(), cand_nonempty)));
                pooled_score(self.entries[i].reps.vectors.len(), rows)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((cand, scores))
    }

    /// Rows of the match cache for entry `i` against every other entry,
    /// paired with whether that entry holds any representatives.
    fn other_rows(&self, i: usize) -> impl Iterator<Item = (&[f64], bool)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(move |&(j, _)| j != i)
            .map(move |(j, e)| (self.matches[i][j].as_slice(), !e.reps.vectors.is_empty()))
    }

    /// Fills row and column `i` of the match cache against entries `0..i`.
    fn link_last(&mut self, i: usize) -> Result<()> {
        let kernel = self.kernel();
        let mut row = Vec::with_capacity(i + 1);
        for j in 0..i {
            row.push(best_matches(&kernel, &self.entries[i].reps, &self.entries[j].reps)?);
            let col = best_matches(&kernel, &self.entries[j].reps, &self.entries[i].reps)?;
            self.matches[j].push(col);
        }
        row.push(Vec::new());
        self.matches[i] = row;
        Ok(())
    }

    /// Rescans row and column `i` of the match cache after entry `i` changed.
    fn relink(&mut self, i: usize) -> Result<()> {
        let kernel = self.kernel();
        for j in 0..self.entries.len() {
            if j != i {
                self.matches[i][j] = best_matches(&kernel, &self.entries[i].reps, &self.entries[j].reps)?;
                self.matches[j][i] = best_matches(&kernel, &self.entries[j].reps, &self.entries[i].reps)?;
            }
        }
        Ok(())
    }

    /// Each entry's diversity score against the rest of the current buffer,
    /// computed from scratch (0 for a lone entry).
    pub fn recompute_div_scores(&self) -> Result<Vec<f64>> {
        let kernel = self.kernel();
        let all: Vec<&RepresentativeSet> = self.entries.iter().map(|e| &e.reps).collect();
        if all.len() < 2 {
            return Ok(alloc::vec![0.0; all.len()]);
        }
        (0..all.len())
            .map(|i| {
                let others: Vec<&RepresentativeSet> = all
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, s)| *s)
                    .collect();
                level_div_score(&kernel, all[i], &others)
            })
            .collect()
    }

    fn refresh_div_scores(&mut self) -> Result<()> {
        let n = self.entries.len();
        let scores = if n < 2 {
            alloc::vec![0.0; n]
        } else {
            (0..n)
                .map(|i| pooled_score(self.entries[i].reps.vectors.len(), self.other_rows(i)))
                .collect::<Result<Vec<f64>>>()?
        };
        for (e, s) in self.entries.iter_mut().zip(scores) {
            e.div_score = s;
        }
        Ok(())
    }

    /// Buffer-level diversity, the sum of all cached entry scores; `None`
    /// below two entries.
    pub fn buffer_diversity(&self) -> Option<f64> {
        (self.entries.len() >= 2).then(|| self.entries.iter().map(|e| e.div_score).sum())
    }

    pub fn gae_priority(&self) -> Result<Vec<f64>> {
        let scores: Vec<f64> = self.entries.iter().map(|e| e.gae_score).collect();
        rank_priority(&scores, RankOrder::Descending, self.config.beta)
    }

    pub fn div_priority(&self) -> Result<Vec<f64>> {
        let scores: Vec<f64> = self.entries.iter().map(|e| e.div_score).collect();
        rank_priority(&scores, RankOrder::Ascending, self.config.beta)
    }

    /// `(1 - rho) P_gae + rho P_div` over the entries in buffer order.
    pub fn replay_distribution(&self) -> Result<Vec<f64>> {
        replay_mixture(&self.gae_priority()?, &self.div_priority()?, self.config.rho)
    }

    /// Draws a level id from the replay distribution and records the visit.
    pub fn sample_level<R: Rng + ?Sized>(&mut self, iteration: u64, rng: &mut R) -> Result<u64> {
        let dist = self.replay_distribution()?;
        let i = math::sample_categorical(&dist, rng.gen::<f64>());
        let entry = &mut self.entries[i];
        entry.visits += 1;
        entry.last_iteration = iteration;
        Ok(entry.id)
    }

    /// Re-selects the representatives of `id` greedily over its previous
    /// representatives plus an `m'` subsample of `fresh`, and stores the new
    /// learning-potential score.
    pub fn update_entry<V: AsRef<[f64]>, R: Rng + ?Sized>(
        &mut self,
        id: u64,
        fresh: &[V],
        new_gae: f64,
        cfg: &DiversityConfig,
        rng: &mut R,
    ) -> Result<()> {
        let i = self.position(id)?;
        if !(new_gae >= 0.0 && new_gae.is_finite()) {
            return Err(Error::precondition("gae score must be finite and non-negative"));
        }
        let entry = &self.entries[i];
        let mut pool: Vec<&[f64]> = entry.reps.vectors.iter().map(Vec::as_slice).collect();
        pool.extend(subsample(fresh, cfg.m_prime, rng));
        if let Some(d) = entry.reps.dim() {
            if pool.iter().any(|v| v.len() != d) {
                return Err(Error::config("fresh observations differ in dimension"));
            }
        }
        let picks = greedy_select(&self.kernel(), &pool, cfg.n)?;
        let vectors = fill_to(&picks, cfg.n).map(|j| pool[j].to_vec()).collect();
        let entry = &mut self.entries[i];
        entry.reps.vectors = vectors;
        entry.reps.capacity = cfg.n;
        entry.gae_score = new_gae;
        self.relink(i)?;
        self.refresh_div_scores()
    }
}

/// Best kernel match of each vector of `a` among the vectors of `b`, or
/// negative infinity when `b` is empty.
fn best_matches(kernel: &CosineKernel, a: &RepresentativeSet, b: &RepresentativeSet) -> Result<Vec<f64>> {
    a.vectors
        .iter()
        .map(|v| {
            let mut best = f64::NEG_INFINITY;
            for u in &b.vectors {
                best = best.max(kernel.eval(v, u)?);
            }
            Ok(best)
        })
        .collect()
}

/// Diversity score of a level with `len` representatives from its cached
/// best-match rows against each other level. Agrees bit for bit with
/// `level_div_score` over the union of those levels.
fn pooled_score<'a>(len: usize, rows: impl Iterator<Item = (&'a [f64], bool)>) -> Result<f64> {
    let mut best = alloc::vec![f64::NEG_INFINITY; len];
    let mut any = false;
    for (row, nonempty) in rows {
        any |= nonempty;
        for (b, &m) in best.iter_mut().zip(row) {
            *b = b.max(m);
        }
    }
    if !any {
        return Err(Error::precondition("diversity score needs other representatives"));
    }
    let mut total = 0.0;
    for b in best {
        total += b;
    }
    Ok(total)
}

/// Eviction decision shared by both replacement rules: the incumbent with the
/// largest score, oldest `last_iteration` and then lowest position on ties,
/// is evicted when the candidate's score is strictly below it.
pub fn choose_eviction(candidate_score: f64, incumbents: &[(f64, u64)]) -> Option<usize> {
    let mut worst: Option<usize> = None;
    for (i, &(score, last)) in incumbents.iter().enumerate() {
        let replace = match worst {
            None => true,
            Some(w) => {
                let (ws, wl) = incumbents[w];
                score > ws || (score == ws && last < wl)
            }
        };
        if replace {
            worst = Some(i);
        }
    }
    worst.filter(|&w| candidate_score < incumbents[w].0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankOrder {
    /// Rank 1 is the largest score.
    Descending,
    /// Rank 1 is the smallest score.
    Ascending,
}

/// Rank prioritization `h(rank)^(1/β) / Σ h(rank)^(1/β)` with `h = 1/rank`.
/// Equal scores are ranked by position.
pub fn rank_priority(scores: &[f64], order: RankOrder, beta: f64) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::precondition("rank priority over an empty buffer"));
    }
    if !(beta > 0.0) {
        return Err(Error::config("beta must be positive"));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| match order {
        RankOrder::Descending => scores[b].total_cmp(&scores[a]),
        RankOrder::Ascending => scores[a].total_cmp(&scores[b]),
    });
    let mut logw = alloc::vec![0.0; scores.len()];
    for (r, &i) in idx.iter().enumerate() {
        logw[i] = -math::ln((r + 1) as f64) / beta;
    }
    // rank 1 carries log-weight 0, the maximum
    let mut w: Vec<f64> = logw.iter().map(|&l| math::exp(l)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

pub fn replay_mixture(p_gae: &[f64], p_div: &[f64], rho: f64) -> Result<Vec<f64>> {
    if p_gae.len() != p_div.len() {
        return Err(Error::precondition("mixture components differ in length"));
    }
    if rho == 0.0 {
        return Ok(p_gae.to_vec());
    }
    if rho == 1.0 {
        return Ok(p_div.to_vec());
    }
    Ok(p_gae
        .iter()
        .zip(p_div)
        .map(|(g, d)| (1.0 - rho) * g + rho * d)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn level(i: u32) -> LevelParams {
        LevelParams {
            family_id: "maze".into(),
            encoding: vec![i, i + 1],
            seed: 0,
        }
    }

    fn entry(id: u64, vectors: &[[f64; 2]], gae: f64) -> BufferEntry {
        let reps = RepresentativeSet {
            level_ref: id,
            capacity: 2,
            vectors: vectors.iter().map(|v| v.to_vec()).collect(),
        };
        BufferEntry::new(id, level(id as u32), reps, gae, id)
    }

    fn buffer(capacity: usize, rule: ReplacementRule) -> LevelBuffer {
        let cfg = ReplayConfig {
            capacity,
            ..ReplayConfig::default()
        };
        LevelBuffer::new(cfg, rule, CosineKernel::default()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn warm_up_appends() {
        let mut buf = buffer(2, ReplacementRule::Diversity);
        assert_eq!(
            buf.try_insert(entry(1, &[[1.0, 0.0]], 0.1)).unwrap(),
            InsertOutcome::InsertedEmptySlot
        );
        assert_eq!(buf.entries()[0].div_score, 0.0);
        assert_eq!(
            buf.try_insert(entry(2, &[[1.0, 0.0]], 0.1)).unwrap(),
            InsertOutcome::InsertedEmptySlot
        );
        assert_eq!(buf.len(), 2);
    }

    #[test]
    fn eviction_rule_on_fixture_scores() {
        let inc = [(1.8, 0), (2.6, 0), (0.7, 0)];
        assert_eq!(choose_eviction(1.2, &inc), Some(1));
        assert_eq!(choose_eviction(2.6, &inc), None);
        assert_eq!(choose_eviction(3.0, &inc), None);
        // ties go to the oldest visit
        assert_eq!(choose_eviction(0.0, &[(2.0, 5), (2.0, 3), (1.0, 0)]), Some(1));
    }

    #[test]
    fn duplicate_candidate_is_rejected() {
        let mut buf = buffer(3, ReplacementRule::Diversity);
        buf.try_insert(entry(1, &[[1.0, 0.0], [0.0, 1.0]], 0.1)).unwrap();
        buf.try_insert(entry(2, &[[1.0, 1.0], [1.0, 0.5]], 0.1)).unwrap();
        buf.try_insert(entry(3, &[[1.0, 0.2], [0.3, 1.0]], 0.1)).unwrap();
        let dup = entry(4, &[[1.0, 1.0], [1.0, 0.5]], 0.9);
        let (cand, scores) = buf.pooled_div_scores(&dup).unwrap();
        assert!(scores.iter().all(|&s| s <= cand));
        assert_eq!(buf.try_insert(dup).unwrap(), InsertOutcome::Rejected);
        assert_eq!(buf.len(), 3);
    }

    #[test]
    fn distinct_candidate_evicts_most_redundant() {
        let mut buf = buffer(3, ReplacementRule::Diversity);
        buf.try_insert(entry(1, &[[1.0, 0.0]], 0.1)).unwrap();
        buf.try_insert(entry(2, &[[1.0, 0.01]], 0.1)).unwrap();
        buf.try_insert(entry(3, &[[1.0, 0.02]], 0.1)).unwrap();
        let out = buf.try_insert(entry(4, &[[0.0, 1.0]], 0.1)).unwrap();
        assert!(matches!(out, InsertOutcome::Replaced(_)));
        assert!(buf.get(4).is_some());
        let cached: Vec<f64> = buf.entries().iter().map(|e| e.div_score).collect();
        assert_eq!(cached, buf.recompute_div_scores().unwrap());
    }

    #[test]
    fn learning_potential_rule_evicts_minimum() {
        let mut buf = buffer(2, ReplacementRule::LearningPotential);
        buf.try_insert(entry(1, &[[1.0, 0.0]], 0.3)).unwrap();
        buf.try_insert(entry(2, &[[1.0, 0.0]], 0.1)).unwrap();
        assert_eq!(
            buf.try_insert(entry(3, &[[1.0, 0.0]], 0.05)).unwrap(),
            InsertOutcome::Rejected
        );
        assert_eq!(
            buf.try_insert(entry(4, &[[1.0, 0.0]], 0.2)).unwrap(),
            InsertOutcome::Replaced(2)
        );
    }

    #[test]
    fn gae_priority_fixture() {
        let p = rank_priority(&[0.9, 0.5, 0.1], RankOrder::Descending, 1.0).unwrap();
        assert!(close(&p, &[6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0], 1e-12));
        assert!(close(&p, &[0.5455, 0.2727, 0.1818], 1e-4));
        assert_eq!(rank_priority(&[0.4], RankOrder::Descending, 0.3).unwrap(), vec![1.0]);
        let cold = rank_priority(&[0.9, 0.5, 0.1], RankOrder::Descending, 1e-3).unwrap();
        assert!(cold[0] > 0.999);
    }

    #[test]
    fn div_priority_ranks_ascending() {
        let p = rank_priority(&[0.2, 1.5, 0.9], RankOrder::Ascending, 1.0).unwrap();
        assert!(close(&p, &[6.0 / 11.0, 2.0 / 11.0, 3.0 / 11.0], 1e-12));
        // equal scores fall back to position, so the 1/rank shape remains
        let tied = rank_priority(&[0.5, 0.5, 0.5], RankOrder::Ascending, 1.0).unwrap();
        assert!(close(&tied, &[6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0], 1e-12));
    }

    #[test]
    fn mixture_fixture_and_reductions() {
        let g = [0.5455, 0.2727, 0.1818];
        let d = [0.2, 0.3, 0.5];
        let m = replay_mixture(&g, &d, 0.5).unwrap();
        assert!(close(&m, &[0.3727, 0.2864, 0.3409], 1e-4));
        assert_eq!(replay_mixture(&g, &d, 0.0).unwrap(), g.to_vec());
        assert_eq!(replay_mixture(&g, &d, 1.0).unwrap(), d.to_vec());
    }

    #[test]
    fn empty_buffer_cannot_prioritize_or_sample() {
        let mut buf = buffer(2, ReplacementRule::Diversity);
        assert!(matches!(buf.gae_priority(), Err(Error::Precondition(_))));
        assert!(buf.sample_level(0, &mut crate::seeded_rng(0)).is_err());
    }

    #[test]
    fn single_entry_is_always_sampled() {
        let mut buf = buffer(4, ReplacementRule::Diversity);
        buf.try_insert(entry(9, &[[1.0, 0.0]], 0.2)).unwrap();
        let mut rng = crate::seeded_rng(5);
        for it in 0..20 {
            assert_eq!(buf.sample_level(it, &mut rng).unwrap(), 9);
        }
        assert_eq!(buf.get(9).unwrap().visits, 20);
        assert_eq!(buf.get(9).unwrap().last_iteration, 19);
    }

    #[test]
    fn update_with_identical_observations_keeps_reps() {
        let mut buf = buffer(2, ReplacementRule::Diversity);
        buf.try_insert(entry(1, &[[1.0, 0.0], [0.0, 1.0]], 0.2)).unwrap();
        buf.try_insert(entry(2, &[[1.0, 1.0]], 0.2)).unwrap();
        let before = buf.get(1).unwrap().reps.vectors.clone();
        let cfg = DiversityConfig {
            n: 2,
            m_prime: 8,
            ..DiversityConfig::default()
        };
        buf.update_entry(1, &before.clone(), 0.7, &cfg, &mut crate::seeded_rng(0))
            .unwrap();
        let e = buf.get(1).unwrap();
        assert_eq!(e.gae_score, 0.7);
        assert_eq!(e.reps.vectors, before);
        let cached: Vec<f64> = buf.entries().iter().map(|e| e.div_score).collect();
        assert_eq!(cached, buf.recompute_div_scores().unwrap());
    }

    #[test]
    fn update_of_unknown_level_fails() {
        let mut buf = buffer(2, ReplacementRule::Diversity);
        let none: [Vec<f64>; 0] = [];
        let cfg = DiversityConfig::default();
        assert_eq!(
            buf.update_entry(3, &none, 0.1, &cfg, &mut crate::seeded_rng(0)),
            Err(Error::UnknownLevel(3))
        );
    }
}
