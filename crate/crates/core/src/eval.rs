//! Evaluation over annotated test items: accuracy, rho sweeps, Fleiss'
//! kappa between annotator and algorithm, and the Wu-Palmer baseline.

use std::fmt::Write as _;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooccur::ApmiIndex;
use crate::disambig::{disambiguate_among, DisambiguationQuery};
use crate::error::{Error, Result};
use crate::wup::{baseline_disambiguate, Taxonomy};

/// Rho values swept by default.
pub const DEFAULT_RHO_GRID: [f64; 7] = [1.0, 1.5, 2.5, 3.0, 3.5, 4.0, 5.0];

/// A compound, one of its constituents, the constituent's synonyms and the
/// synonyms an annotator judged applicable to the compound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestItem {
    pub compound: String,
    pub constituent: String,
    pub synonyms: Vec<String>,
    pub applicable: Vec<String>,
}

impl TestItem {
    fn normalize(&mut self) {
        let norm = |s: &mut String| *s = s.trim().to_lowercase();
        norm(&mut self.compound);
        norm(&mut self.constituent);
        self.synonyms.iter_mut().for_each(norm);
        self.applicable.iter_mut().for_each(norm);
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.synonyms.len() < 2 {
            return Err(format!(
                "has {} synonyms, needs at least 2",
                self.synonyms.len()
            ));
        }
        if self.applicable.is_empty() {
            return Err("has no applicable synonym".into());
        }
        if let Some(a) = self.applicable.iter().find(|a| !self.synonyms.contains(a)) {
            return Err(format!("applicable {a:?} is not among the synonyms"));
        }
        Ok(())
    }

    pub fn is_applicable(&self, synonym: &str) -> bool {
        self.applicable.iter().any(|a| a == synonym)
    }
}

/// Reads one JSON object per line.
pub fn load_test_items<R: BufRead>(reader: R) -> Result<Vec<TestItem>> {
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut item: TestItem =
            serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        item.normalize();
        item.validate().map_err(|rule| {
            Error::parse(
                i + 1,
                format!(
                    "item {} ({}/{}) {rule}",
                    items.len() + 1,
                    item.compound,
                    item.constituent
                ),
            )
        })?;
        items.push(item);
    }
    Ok(items)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub compound: String,
    pub constituent: String,
    pub chosen: String,
    pub score: f64,
    pub correct: bool,
    pub no_signal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedItem {
    pub compound: String,
    pub constituent: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: String,
    pub rho: Option<f64>,
    pub include_constituent: Option<bool>,
    pub total: usize,
    pub evaluated: usize,
    pub correct: usize,
    pub no_signal: usize,
    /// `correct / evaluated`; 0 when nothing was evaluated.
    pub accuracy: f64,
    /// Annotator vs algorithm agreement; `None` when undefined.
    pub kappa: Option<f64>,
    pub records: Vec<ItemRecord>,
    pub skipped: Vec<SkippedItem>,
}

enum Outcome {
    Done(ItemRecord),
    Skipped(SkippedItem),
}

impl EvaluationReport {
    fn from_outcomes(
        method: &str,
        rho: Option<f64>,
        include_constituent: Option<bool>,
        items: &[TestItem],
        outcomes: Vec<Outcome>,
    ) -> Self {
        let mut records = Vec::new();
        let mut skipped = Vec::new();
        let mut subjects = Vec::new();
        for (item, outcome) in items.iter().zip(outcomes) {
            match outcome {
                Outcome::Done(r) => {
                    subjects.extend(agreement_rows(item, &r.chosen));
                    records.push(r);
                }
                Outcome::Skipped(s) => skipped.push(s),
            }
        }
        let evaluated = records.len();
        let correct = records.iter().filter(|r| r.correct).count();
        let accuracy = if evaluated == 0 {
            0.0
        } else {
            correct as f64 / evaluated as f64
        };
        let kappa = if subjects.is_empty() {
            None
        } else {
            fleiss_kappa(&subjects, 2).ok()
        };
        EvaluationReport {
            method: method.to_string(),
            rho,
            include_constituent,
            total: items.len(),
            evaluated,
            correct,
            no_signal: records.iter().filter(|r| r.no_signal).count(),
            accuracy,
            kappa,
            records,
            skipped,
        }
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method     {}", self.method);
        if let Some(rho) = self.rho {
            let _ = writeln!(out, "rho        {rho}");
        }
        if let Some(inc) = self.include_constituent {
            let _ = writeln!(
                out,
                "input set  {}",
                if inc {
                    "compound+constituent"
                } else {
                    "compound"
                }
            );
        }
        let _ = writeln!(
            out,
            "accuracy   {:.4} ({}/{} evaluated, {} skipped, {} no-signal)",
            self.accuracy,
            self.correct,
            self.evaluated,
            self.skipped.len(),
            self.no_signal
        );
        match self.kappa {
            Some(k) => {
                let _ = writeln!(out, "kappa      {k:.4}");
            }
            None => {
                let _ = writeln!(out, "kappa      undefined");
            }
        }
        let w_compound = self
            .records
            .iter()
            .map(|r| r.compound.len())
            .chain([8])
            .max()
            .unwrap_or(8);
        let w_const = self
            .records
            .iter()
            .map(|r| r.constituent.len())
            .chain([11])
            .max()
            .unwrap_or(11);
        let w_chosen = self
            .records
            .iter()
            .map(|r| r.chosen.len())
            .chain([6])
            .max()
            .unwrap_or(6);
        if !self.records.is_empty() {
            let _ = writeln!(
                out,
                "\n{:<w_compound$}  {:<w_const$}  {:<w_chosen$}  {:>12}  result",
                "compound", "constituent", "chosen", "score"
            );
        }
        for r in &self.records {
            let verdict = match (r.correct, r.no_signal) {
                (true, false) => "correct",
                (false, false) => "wrong",
                (true, true) => "correct (no signal)",
                (false, true) => "wrong (no signal)",
            };
            let _ = writeln!(
                out,
                "{:<w_compound$}  {:<w_const$}  {:<w_chosen$}  {:>12.4}  {verdict}",
                r.compound, r.constituent, r.chosen, r.score
            );
        }
        for s in &self.skipped {
            let _ = writeln!(
                out,
                "skipped {}/{}: {}",
                s.compound, s.constituent, s.reason
            );
        }
        out
    }
}

/// One subject per synonym, rated by the annotator (applicable or not)
/// and the algorithm (chosen or not). Columns are `[yes, no]`.
fn agreement_rows(item: &TestItem, chosen: &str) -> Vec<Vec<u64>> {
    let mut seen = Vec::new();
    item.synonyms
        .iter()
        .filter(|s| {
            let fresh = !seen.contains(s);
            seen.push(*s);
            fresh
        })
        .map(|s| {
            let yes = item.is_applicable(s) as u64 + (s == chosen) as u64;
            vec![yes, 2 - yes]
        })
        .collect()
}

fn skip(item: &TestItem, err: Error) -> Outcome {
    Outcome::Skipped(SkippedItem {
        compound: item.compound.clone(),
        constituent: item.constituent.clone(),
        reason: err.to_string(),
    })
}

/// Runs the disambiguator on every item, with the item's own synonyms as
/// candidates. Items failing a precondition are skipped and reported.
pub fn evaluate(
    index: &ApmiIndex,
    items: &[TestItem],
    rho: f64,
    include_constituent: bool,
) -> Result<EvaluationReport> {
    let outcomes = items
        .par_iter()
        .map(|item| {
            let mut query = DisambiguationQuery::new(&item.compound, &item.constituent);
            query.include_constituent = include_constituent;
            match disambiguate_among(index, &query, &item.synonyms, rho) {
                Ok(ans) => Ok(Outcome::Done(ItemRecord {
                    correct: item.is_applicable(&ans.chosen),
                    score: ans.ranked[0].1,
                    compound: ans.compound,
                    constituent: ans.constituent,
                    chosen: ans.chosen,
                    no_signal: ans.no_signal,
                })),
                Err(e @ Error::Precondition(_)) => Ok(skip(item, e)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport::from_outcomes(
        "set-expansion",
        Some(rho),
        Some(include_constituent),
        items,
        outcomes,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub accuracy: f64,
}

pub fn rho_sweep(
    index: &ApmiIndex,
    items: &[TestItem],
    rhos: &[f64],
    include_constituent: bool,
) -> Result<Vec<SweepRow>> {
    rhos.iter()
        .map(|&rho| {
            evaluate(index, items, rho, include_constituent).map(|r| SweepRow {
                rho,
                accuracy: r.accuracy,
            })
        })
        .collect()
}

/// CSV with header `rho,accuracy`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("rho,accuracy\n");
    for r in rows {
        let _ = writeln!(out, "{:?},{:?}", r.rho, r.accuracy);
    }
    out
}

/// Fleiss' kappa for `rows[subject][category]` rating counts, each row
/// summing to `raters`.
///
/// When every rating falls in one category the chance agreement is 1; kappa
/// is then taken as 1 if observed agreement is perfect, else it is an error.
pub fn fleiss_kappa(rows: &[Vec<u64>], raters: u64) -> Result<f64> {
    if raters < 2 {
        return Err(Error::usage("Fleiss' kappa needs at least two raters"));
    }
    let Some(first) = rows.first() else {
        return Err(Error::usage("Fleiss' kappa needs at least one subject"));
    };
    let categories = first.len();
    let n = raters as f64;
    let mut totals = vec![0u64; categories];
    let mut agreement = 0.0;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != categories {
            return Err(Error::usage(format!(
                "subject {i} has {} categories, expected {categories}",
                row.len()
            )));
        }
        let sum: u64 = row.iter().sum();
        if sum != raters {
            return Err(Error::usage(format!(
                "subject {i} has {sum} ratings, expected {raters}"
            )));
        }
        let sq: u64 = row.iter().map(|&x| x * x).sum();
        agreement += (sq - raters) as f64 / (n * (n - 1.0));
        for (t, &x) in totals.iter_mut().zip(row) {
            *t += x;
        }
    }
    let subjects = rows.len() as f64;
    let p_bar = agreement / subjects;
    let p_e: f64 = totals
        .iter()
        .map(|&t| {
            let p = t as f64 / (subjects * n);
            p * p
        })
        .sum();
    if p_e >= 1.0 {
        return if p_bar >= 1.0 {
            Ok(1.0)
        } else {
            Err(Error::usage("degenerate marginals"))
        };
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Runs the Wu-Palmer baseline on every item.
pub fn evaluate_baseline(taxonomy: &Taxonomy, items: &[TestItem]) -> EvaluationReport {
    let outcomes = items
        .par_iter()
        .map(
            |item| match baseline_disambiguate(taxonomy, &item.compound, &item.synonyms) {
                Ok((chosen, score)) => Outcome::Done(ItemRecord {
                    compound: item.compound.clone(),
                    constituent: item.constituent.clone(),
                    correct: item.is_applicable(&chosen),
                    no_signal: score <= 0.0,
                    chosen,
                    score,
                }),
                Err(e) => skip(item, e),
            },
        )
        .collect();
    EvaluationReport::from_outcomes("wu-palmer", None, None, items, outcomes)
}
