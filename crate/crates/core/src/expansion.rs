//! Set expansion over an [`ApmiIndex`].
//!
//! For an input set `S`, every context `c` gets
//!
//! * `f(c)`: the fraction of `S` with a positive `M_vc` entry in `c`,
//! * `a(c)`: the summed `M_vc` values of the members of `S` in `c`,
//! * `s(c) = f(c)^rho * a(c)`,
//!
//! and every word is scored `E(w) = sum_c M_cv[w][c] * s(c)`. This is the
//! product `M_cv · diag(f^rho) · M_vc · S`, since `M_vc · S` is exactly `a`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::context::ContextId;
use crate::cooccur::ApmiIndex;
use crate::error::{Error, Result};
use crate::ingest::{Vocabulary, WordId};

/// Nonempty set of seed words, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputSet {
    words: Vec<WordId>,
}

impl InputSet {
    pub fn new(index: &ApmiIndex, words: impl IntoIterator<Item = WordId>) -> Result<Self> {
        let words: BTreeSet<WordId> = words.into_iter().collect();
        if words.is_empty() {
            return Err(Error::usage("input set is empty"));
        }
        check_ids(index, words.iter().copied())?;
        Ok(InputSet {
            words: words.into_iter().collect(),
        })
    }

    pub fn from_terms<S: AsRef<str>>(index: &ApmiIndex, terms: &[S]) -> Result<Self> {
        let ids = terms
            .iter()
            .map(|t| index.word_id(t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(index, ids)
    }

    pub fn words(&self) -> &[WordId] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: WordId) -> bool {
        self.words.binary_search(&word).is_ok()
    }
}

fn check_ids(index: &ApmiIndex, ids: impl IntoIterator<Item = WordId>) -> Result<()> {
    let n = index.vocab().len();
    for id in ids {
        if id.index() >= n {
            return Err(Error::usage(format!(
                "word id {id} not in a vocabulary of {n} words"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionParams {
    /// Coherence penalty exponent applied to `f(c)`.
    pub rho: f64,
    /// Score only these words when set.
    pub candidates: Option<Vec<WordId>>,
}

impl ExpansionParams {
    pub fn new(rho: f64) -> Self {
        ExpansionParams {
            rho,
            candidates: None,
        }
    }

    pub fn with_candidates(mut self, candidates: impl IntoIterator<Item = WordId>) -> Self {
        self.candidates = Some(candidates.into_iter().collect());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContextScore {
    pub context: ContextId,
    pub fraction: f64,
    pub mass: f64,
    pub score: f64,
}

/// Words ranked by expansion score, highest first; ties in term order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpansionResult {
    pub ranked: Vec<(WordId, f64)>,
}

impl ExpansionResult {
    pub fn score(&self, word: WordId) -> Option<f64> {
        self.ranked
            .iter()
            .find(|(w, _)| *w == word)
            .map(|&(_, s)| s)
    }

    pub fn with_terms<'a>(&'a self, vocab: &'a Vocabulary) -> impl Iterator<Item = (&'a str, f64)> {
        self.ranked.iter().map(move |&(w, s)| (vocab.term(w), s))
    }
}

pub fn context_fraction(index: &ApmiIndex, set: &InputSet, context: ContextId) -> f64 {
    let present = set
        .words()
        .iter()
        .filter(|w| index.m_vc().get(context.index(), w.index()) > 0.0)
        .count();
    present as f64 / set.len() as f64
}

pub fn context_mass(index: &ApmiIndex, set: &InputSet, context: ContextId) -> f64 {
    set.words()
        .iter()
        .map(|w| index.m_vc().get(context.index(), w.index()))
        .sum()
}

/// Scores of every context in which some member of the set appears,
/// ordered by context id.
pub fn context_scores(index: &ApmiIndex, set: &InputSet, rho: f64) -> Result<Vec<ContextScore>> {
    check_rho(rho)?;
    // context -> (members present, summed APPMI)
    let mut acc: HashMap<u32, (usize, f64)> = HashMap::new();
    for &w in set.words() {
        for (c, v) in index.vc_by_word().row_iter(w.index()) {
            let e = acc.entry(c).or_default();
            e.0 += 1;
            e.1 += v;
        }
    }
    let n = set.len() as f64;
    let mut scores: Vec<ContextScore> = acc
        .into_iter()
        .map(|(c, (present, mass))| {
            let fraction = present as f64 / n;
            ContextScore {
                context: ContextId(c),
                fraction,
                mass,
                score: fraction.powf(rho) * mass,
            }
        })
        .collect();
    scores.sort_unstable_by_key(|s| s.context);
    Ok(scores)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::usage(format!(
            "rho must be positive and finite, got {rho}"
        )));
    }
    Ok(())
}

/// `sum_c row[c] * weights[c]` over two column-sorted sparse vectors.
fn sparse_dot(cols: &[u32], vals: &[f64], weights: &[(u32, f64)]) -> f64 {
    let mut sum = 0.0;
    if cols.len() <= weights.len() {
        for (c, v) in cols.iter().zip(vals) {
            if let Ok(k) = weights.binary_search_by_key(c, |&(wc, _)| wc) {
                sum += v * weights[k].1;
            }
        }
    } else {
        for &(c, s) in weights {
            if let Ok(k) = cols.binary_search(&c) {
                sum += vals[k] * s;
            }
        }
    }
    sum
}

pub(crate) fn rank(vocab: &Vocabulary, scored: &mut [(WordId, f64)]) {
    scored.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => vocab.term(a.0).cmp(vocab.term(b.0)),
        o => o,
    });
}

/// Scores every word (or every candidate) against the input set.
///
/// Words with score 0 are kept so that callers always get a total ranking.
pub fn expand(
    index: &ApmiIndex,
    set: &InputSet,
    params: &ExpansionParams,
) -> Result<ExpansionResult> {
    check_rho(params.rho)?;
    check_ids(index, set.words().iter().copied())?;
    let weights: Vec<(u32, f64)> = context_scores(index, set, params.rho)?
        .into_iter()
        .filter(|s| s.score > 0.0)
        .map(|s| (s.context.0, s.score))
        .collect();

    let words: Vec<WordId> = match &params.candidates {
        Some(c) => {
            check_ids(index, c.iter().copied())?;
            let unique: BTreeSet<WordId> = c.iter().copied().collect();
            unique.into_iter().collect()
        }
        None => index.vocab().ids().collect(),
    };
    let mut ranked: Vec<(WordId, f64)> = words
        .into_iter()
        .map(|w| {
            let (cols, vals) = index.m_cv().row(w.index());
            (w, sparse_dot(cols, vals, &weights))
        })
        .collect();
    rank(index.vocab(), &mut ranked);
    Ok(ExpansionResult { ranked })
}

/// Sub-index over `words` and every context in which at least one of them
/// has a positive entry in either matrix.
///
/// Expanding a set drawn from `words` over the sub-index gives the same
/// scores for the remaining words as expanding over the full index.
pub fn restrict(index: &ApmiIndex, words: &[WordId]) -> Result<ApmiIndex> {
    if words.is_empty() {
        return Err(Error::usage("cannot restrict to an empty word set"));
    }
    check_ids(index, words.iter().copied())?;
    let words: Vec<usize> = words
        .iter()
        .map(|w| w.index())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut contexts = BTreeSet::new();
    for &w in &words {
        contexts.extend(index.vc_by_word().row(w).0.iter().map(|&c| c as usize));
        contexts.extend(index.m_cv().row(w).0.iter().map(|&c| c as usize));
    }
    let contexts: Vec<usize> = contexts.into_iter().collect();

    let vocab = Vocabulary::from_terms(words.iter().map(|&w| index.vocab().term(WordId(w as u32))));
    let mut table = crate::context::ContextTable::new();
    for &c in &contexts {
        table.intern(index.contexts().key(ContextId(c as u32)).clone());
    }
    let m_vc = index.m_vc().select(&contexts, &words);
    let m_cv = index.m_cv().select(&words, &contexts);
    ApmiIndex::new(vocab, table, m_vc, m_cv, *index.config())
}
