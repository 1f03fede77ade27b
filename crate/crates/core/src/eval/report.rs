use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EvalMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    pub id: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when the item failed and was scored as an empty prediction.
    pub error: Option<String>,
    /// Gold-logical-form mode only: whether templatize/instantiate reproduced
    /// the gold query.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round_trip: Option<bool>,
    pub query: Option<String>,
    /// Gold answers that were not predicted.
    pub missing: Vec<String>,
    /// Predicted answers that are not gold.
    pub unexpected: Vec<String>,
}

impl ItemScore {
    pub fn is_exact(&self) -> bool {
        self.error.is_none() && self.missing.is_empty() && self.unexpected.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub mode: EvalMode,
    pub items: Vec<ItemScore>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Items that ran without an error tag.
    pub scored: usize,
    /// Error tag counts.
    pub errors: BTreeMap<String, usize>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl ScoreReport {
    /// Sorts items by id and computes the aggregates.
    pub fn new(mode: EvalMode, mut items: Vec<ItemScore>) -> Self {
        items.sort_by(|a, b| a.id.cmp(&b.id));
        let mut errors = BTreeMap::new();
        for e in items.iter().filter_map(|i| i.error.as_ref()) {
            *errors.entry(e.clone()).or_insert(0) += 1;
        }
        Self {
            mode,
            macro_precision: mean(items.iter().map(|i| i.precision)),
            macro_recall: mean(items.iter().map(|i| i.recall)),
            macro_f1: mean(items.iter().map(|i| i.f1)),
            scored: items.iter().filter(|i| i.error.is_none()).count(),
            errors,
            items,
        }
    }

    /// Macro F1 over the items accepted by `keep`.
    pub fn macro_f1_where(&self, keep: impl Fn(&ItemScore) -> bool) -> f64 {
        mean(self.items.iter().filter(|i| keep(i)).map(|i| i.f1))
    }

    /// Items that did not score a perfect match.
    pub fn deviations(&self) -> impl Iterator<Item = &ItemScore> {
        self.items.iter().filter(|i| !i.is_exact())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable summary: aggregates, error counts, deviations.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            EvalMode::Full => "full",
            EvalMode::GoldLogicalForm => "gold-lf",
        };
        let _ = writeln!(out, "mode      {mode}");
        let _ = writeln!(out, "items     {}", self.items.len());
        let _ = writeln!(out, "scored    {}", self.scored);
        let _ = writeln!(out, "precision {:.4}", self.macro_precision);
        let _ = writeln!(out, "recall    {:.4}", self.macro_recall);
        let _ = writeln!(out, "f1        {:.4}", self.macro_f1);
        for (tag, n) in &self.errors {
            let _ = writeln!(out, "error     {tag:<24} {n}");
        }
        let deviations: Vec<_> = self.deviations().collect();
        if !deviations.is_empty() {
            let _ = writeln!(out, "\n{:<16} {:>6} {:>6} {:>6}  note", "id", "P", "R", "F1");
            for i in deviations {
                let note = match (&i.error, i.round_trip) {
                    (Some(e), _) => e.clone(),
                    (None, Some(false)) => "round-trip mismatch".to_string(),
                    _ => format!("{} missing, {} unexpected", i.missing.len(), i.unexpected.len()),
                };
                let _ = writeln!(
                    out,
                    "{:<16} {:>6.3} {:>6.3} {:>6.3}  {note}",
                    i.id, i.precision, i.recall, i.f1
                );
            }
        }
        out
    }
}
