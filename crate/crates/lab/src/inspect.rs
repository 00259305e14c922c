//! Human-readable dump of a buffer snapshot, with a consistency check of the
//! cached diversity scores.

use std::fmt::Write as _;

use ued_core::maze::{decode_level, render_ascii};

use crate::error::{LabError, Result};
use crate::snapshot::BufferSnapshot;

/// Largest tolerated gap between a cached and a recomputed diversity score.
pub const DIV_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Inspection {
    pub text: String,
    /// Recomputed buffer diversity, `None` below two entries.
    pub buffer_diversity: Option<f64>,
    /// `(entry id, cached, recomputed)` for every score off by more than
    /// [`DIV_TOLERANCE`].
    pub mismatches: Vec<(u64, f64, f64)>,
}

impl Inspection {
    /// The integrity verdict: an error listing every stale score.
    pub fn check(&self) -> Result<()> {
        if self.mismatches.is_empty() {
            return Ok(());
        }
        let list: Vec<String> = self
            .mismatches
            .iter()
            .map(|(id, c, r)| format!("entry {id}: cached F_div {c} but recomputed {r}"))
            .collect();
        Err(LabError::Integrity(list.join("; ")))
    }
}

pub fn inspect(snap: &BufferSnapshot) -> Result<Inspection> {
    let buffer = snap.buffer()?;
    let recomputed = buffer.recompute_div_scores()?;
    let mut text = String::new();
    let mut mismatches = Vec::new();
    let _ = writeln!(
        text,
        "{} entries (capacity {}, rule {:?})",
        buffer.len(),
        snap.config.capacity,
        snap.rule
    );
    for (entry, fresh) in buffer.entries().iter().zip(&recomputed) {
        let ok = (entry.div_score - fresh).abs() <= DIV_TOLERANCE;
        if !ok {
            mismatches.push((entry.id, entry.div_score, *fresh));
        }
        let _ = writeln!(text);
        let _ = writeln!(
            text,
            "entry {}  visits {}  last_iteration {}  reps {}",
            entry.id,
            entry.visits,
            entry.last_iteration,
            entry.reps.vectors.len()
        );
        let _ = writeln!(
            text,
            "  F_gae {}  F_div cached {}  recomputed {}{}",
            entry.gae_score,
            entry.div_score,
            fresh,
            if ok { "" } else { "  MISMATCH" }
        );
        match decode_level(&entry.level, &snap.maze) {
            Ok(level) => {
                for line in render_ascii(&level).lines() {
                    let _ = writeln!(text, "  {line}");
                }
            }
            Err(e) => {
                let _ = writeln!(text, "  (level not renderable: {e})");
            }
        }
    }
    let buffer_diversity = (recomputed.len() >= 2).then(|| recomputed.iter().sum());
    let _ = writeln!(text);
    match buffer_diversity {
        Some(d) => {
            let _ = writeln!(text, "buffer diversity (recomputed): {d}");
        }
        None => {
            let _ = writeln!(text, "buffer diversity (recomputed): undefined below two entries");
        }
    }
    Ok(Inspection {
        text,
        buffer_diversity,
        mismatches,
    })
}
