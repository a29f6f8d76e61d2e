//! Word/context co-occurrence counts, PMI and APPMI, and the two APPMI
//! incidence matrices that make up an [`ApmiIndex`].
//!
//! With `P(w)`, `P(c)` and `P(w,c)` estimated from the counts,
//!
//! ```text
//! PMI(w,c)   = log P(w,c) / (P(w) P(c))
//! APPMI(w,c) = max(0, PMI(w,c) + log P(w,c) / P(w) + k)
//! APPMI(c,w) = max(0, PMI(w,c) + log P(w,c) / P(c) + k)
//! ```
//!
//! `M_vc[c][w] = APPMI(w,c)` and `M_cv[w][c] = APPMI(c,w)`; only strictly
//! positive values are stored.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::{ContextId, ContextKey, ContextScheme, ContextTable};
use crate::csr::Csr;
use crate::error::{Error, Result};
use crate::ingest::{merge_multiword, Sentence, Vocabulary, WordId};

/// How the joint probability `P(w,c)` is estimated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    /// `count(w,c) / N`.
    Joint,
    /// `count(w,c) / count(c)`.
    #[default]
    Conditional,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    Natural,
    Base2,
    Base10,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base2 => x.log2(),
            LogBase::Base10 => x.log10(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApmiConfig {
    /// Shift added before clipping at zero.
    pub k: f64,
    pub estimator: Estimator,
    pub log_base: LogBase,
}

impl Default for ApmiConfig {
    fn default() -> Self {
        ApmiConfig {
            k: 5.0,
            estimator: Estimator::Conditional,
            log_base: LogBase::Natural,
        }
    }
}

impl ApmiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(Error::usage(format!(
                "k must be finite and >= 0, got {}",
                self.k
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CooccurrenceCounts {
    pair: HashMap<(WordId, ContextId), u64>,
    word: Vec<u64>,
    context: Vec<u64>,
    total: u64,
}

fn bump(counts: &mut Vec<u64>, index: usize, n: u64) {
    if counts.len() <= index {
        counts.resize(index + 1, 0);
    }
    counts[index] += n;
}

impl CooccurrenceCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accumulate(&mut self, word: WordId, context: ContextId) {
        self.add(word, context, 1);
    }

    pub fn add(&mut self, word: WordId, context: ContextId, n: u64) {
        if n == 0 {
            return;
        }
        *self.pair.entry((word, context)).or_default() += n;
        bump(&mut self.word, word.index(), n);
        bump(&mut self.context, context.index(), n);
        self.total += n;
    }

    /// Adds another set of counts over the same id spaces.
    pub fn merge(&mut self, other: &CooccurrenceCounts) {
        for (&(w, c), &n) in &other.pair {
            self.add(w, c, n);
        }
    }

    pub fn pair_count(&self, word: WordId, context: ContextId) -> u64 {
        self.pair.get(&(word, context)).copied().unwrap_or(0)
    }

    pub fn word_count(&self, word: WordId) -> u64 {
        self.word.get(word.index()).copied().unwrap_or(0)
    }

    pub fn context_count(&self, context: ContextId) -> u64 {
        self.context.get(context.index()).copied().unwrap_or(0)
    }

    pub fn total_pairs(&self) -> u64 {
        self.total
    }

    pub fn distinct_pairs(&self) -> usize {
        self.pair.len()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (WordId, ContextId, u64)> + '_ {
        self.pair.iter().map(|(&(w, c), &n)| (w, c, n))
    }

    /// Whether the marginals and total agree with the pair counts.
    pub fn is_consistent(&self) -> bool {
        let mut word = vec![0u64; self.word.len()];
        let mut context = vec![0u64; self.context.len()];
        let mut total = 0;
        for (w, c, n) in self.pairs() {
            match (word.get_mut(w.index()), context.get_mut(c.index())) {
                (Some(a), Some(b)) => {
                    *a += n;
                    *b += n;
                }
                _ => return false,
            }
            total += n;
        }
        total == self.total && word == self.word && context == self.context
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probabilities {
    pub word: f64,
    pub context: f64,
    pub joint: f64,
}

impl Probabilities {
    pub fn from_counts(
        pair: u64,
        word: u64,
        context: u64,
        total: u64,
        estimator: Estimator,
    ) -> Result<Self> {
        if total == 0 {
            return Err(Error::usage("no co-occurrences counted"));
        }
        let n = total as f64;
        let joint = match estimator {
            _ if pair == 0 => 0.0,
            Estimator::Joint => pair as f64 / n,
            Estimator::Conditional => pair as f64 / context as f64,
        };
        Ok(Probabilities {
            word: word as f64 / n,
            context: context as f64 / n,
            joint,
        })
    }

    fn check_marginals(&self) -> Result<()> {
        if self.word <= 0.0 || self.context <= 0.0 {
            return Err(Error::usage(format!(
                "PMI needs positive marginals, got P(w) = {}, P(c) = {}",
                self.word, self.context
            )));
        }
        Ok(())
    }

    /// `log P(w,c) / (P(w) P(c))`, or `None` when `P(w,c) = 0`.
    pub fn pmi(&self, base: LogBase) -> Result<Option<f64>> {
        self.check_marginals()?;
        if self.joint <= 0.0 {
            return Ok(None);
        }
        Ok(Some(base.log(self.joint / (self.word * self.context))))
    }

    /// APPMI(w,c): the frequency term divides by `P(w)`.
    pub fn appmi(&self, config: &ApmiConfig) -> Result<f64> {
        self.appmi_with(config, self.word)
    }

    /// APPMI(c,w): the frequency term divides by `P(c)`.
    pub fn appmi_reverse(&self, config: &ApmiConfig) -> Result<f64> {
        self.appmi_with(config, self.context)
    }

    fn appmi_with(&self, config: &ApmiConfig, marginal: f64) -> Result<f64> {
        let Some(pmi) = self.pmi(config.log_base)? else {
            return Ok(0.0);
        };
        let freq = config.log_base.log(self.joint / marginal);
        Ok((pmi + freq + config.k).max(0.0))
    }
}

pub fn probability(
    counts: &CooccurrenceCounts,
    estimator: Estimator,
    word: WordId,
    context: ContextId,
) -> Result<Probabilities> {
    Probabilities::from_counts(
        counts.pair_count(word, context),
        counts.word_count(word),
        counts.context_count(context),
        counts.total_pairs(),
        estimator,
    )
}

pub fn pmi(
    counts: &CooccurrenceCounts,
    config: &ApmiConfig,
    word: WordId,
    context: ContextId,
) -> Result<Option<f64>> {
    probability(counts, config.estimator, word, context)?.pmi(config.log_base)
}

pub fn appmi(
    counts: &CooccurrenceCounts,
    config: &ApmiConfig,
    word: WordId,
    context: ContextId,
) -> Result<f64> {
    probability(counts, config.estimator, word, context)?.appmi(config)
}

pub fn appmi_reverse(
    counts: &CooccurrenceCounts,
    config: &ApmiConfig,
    word: WordId,
    context: ContextId,
) -> Result<f64> {
    probability(counts, config.estimator, word, context)?.appmi_reverse(config)
}

/// Vocabulary, contexts and the two APPMI incidence matrices.
///
/// Immutable once built.
#[derive(Clone, Debug)]
pub struct ApmiIndex {
    vocab: Vocabulary,
    contexts: ContextTable,
    /// Rows are contexts, columns words: `APPMI(w,c)`.
    m_vc: Csr,
    /// Rows are words, columns contexts: `APPMI(c,w)`.
    m_cv: Csr,
    /// `m_vc` transposed, for walking a word's contexts.
    vc_by_word: Csr,
    config: ApmiConfig,
}

impl ApmiIndex {
    pub fn new(
        vocab: Vocabulary,
        contexts: ContextTable,
        m_vc: Csr,
        m_cv: Csr,
        config: ApmiConfig,
    ) -> Result<Self> {
        config.validate()?;
        let (nw, nc) = (vocab.len(), contexts.len());
        if (m_vc.nrows(), m_vc.ncols()) != (nc, nw) {
            return Err(Error::usage(format!(
                "M_vc is {}x{}, expected {nc}x{nw}",
                m_vc.nrows(),
                m_vc.ncols()
            )));
        }
        if (m_cv.nrows(), m_cv.ncols()) != (nw, nc) {
            return Err(Error::usage(format!(
                "M_cv is {}x{}, expected {nw}x{nc}",
                m_cv.nrows(),
                m_cv.ncols()
            )));
        }
        if m_vc
            .values()
            .iter()
            .chain(m_cv.values())
            .any(|&v| !(v > 0.0 && v.is_finite()))
        {
            return Err(Error::usage(
                "incidence matrices may only store positive finite values",
            ));
        }
        let vc_by_word = m_vc.transpose();
        Ok(ApmiIndex {
            vocab,
            contexts,
            m_vc,
            m_cv,
            vc_by_word,
            config,
        })
    }

    /// Computes both APPMI matrices from counts.
    pub fn from_counts(
        vocab: Vocabulary,
        contexts: ContextTable,
        counts: &CooccurrenceCounts,
        config: ApmiConfig,
    ) -> Result<Self> {
        config.validate()?;
        let mut vc = Vec::with_capacity(counts.distinct_pairs());
        let mut cv = Vec::with_capacity(counts.distinct_pairs());
        for (w, c, _) in counts.pairs() {
            let p = probability(counts, config.estimator, w, c)?;
            let forward = p.appmi(&config)?;
            let reverse = p.appmi_reverse(&config)?;
            if forward > 0.0 {
                vc.push((c.0, w.0, forward));
            }
            if reverse > 0.0 {
                cv.push((w.0, c.0, reverse));
            }
        }
        let m_vc = Csr::from_triplets(contexts.len(), vocab.len(), vc)?;
        let m_cv = Csr::from_triplets(vocab.len(), contexts.len(), cv)?;
        Self::new(vocab, contexts, m_vc, m_cv, config)
    }

    /// Builds an index from dense tables: `m_vc[c][w]` and `m_cv[w][c]`.
    pub fn from_dense(
        words: &[&str],
        contexts: Vec<ContextKey>,
        m_vc: &[Vec<f64>],
        m_cv: &[Vec<f64>],
        config: ApmiConfig,
    ) -> Result<Self> {
        let vocab = Vocabulary::from_terms(words.iter().copied());
        if vocab.len() != words.len() {
            return Err(Error::usage("duplicate words in dense index"));
        }
        let mut table = ContextTable::new();
        for key in contexts {
            table.intern(key);
        }
        let dense_triplets = |rows: &[Vec<f64>]| {
            rows.iter()
                .enumerate()
                .flat_map(|(r, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, &v)| v != 0.0)
                        .map(move |(c, &v)| (r as u32, c as u32, v))
                })
                .collect::<Vec<_>>()
        };
        let m_vc = Csr::from_triplets(table.len(), vocab.len(), dense_triplets(m_vc))?;
        let m_cv = Csr::from_triplets(vocab.len(), table.len(), dense_triplets(m_cv))?;
        Self::new(vocab, table, m_vc, m_cv, config)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn contexts(&self) -> &ContextTable {
        &self.contexts
    }

    pub fn m_vc(&self) -> &Csr {
        &self.m_vc
    }

    pub fn m_cv(&self) -> &Csr {
        &self.m_cv
    }

    pub(crate) fn vc_by_word(&self) -> &Csr {
        &self.vc_by_word
    }

    pub fn config(&self) -> &ApmiConfig {
        &self.config
    }

    /// Looks a term up, failing with a precondition error naming it.
    pub fn word_id(&self, term: &str) -> Result<WordId> {
        self.vocab
            .get(term)
            .ok_or_else(|| Error::precondition(format!("{term:?} is not in the index vocabulary")))
    }

    pub fn nnz(&self) -> usize {
        self.m_vc.nnz() + self.m_cv.nnz()
    }
}

/// Counts every occurrence of a vocabulary word in its contexts.
///
/// Sentences are processed in parallel chunks; context ids are assigned in
/// first-occurrence order over the corpus, so the result does not depend on
/// the thread count.
pub fn count_cooccurrences(
    sentences: &[Sentence],
    vocab: &Vocabulary,
    scheme: ContextScheme,
) -> Result<(ContextTable, CooccurrenceCounts)> {
    const CHUNK: usize = 1024;
    let has_multiword = vocab.multiword_terms().next().is_some();
    let partials: Vec<(ContextTable, CooccurrenceCounts)> = sentences
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<_> {
            let mut table = ContextTable::new();
            let mut counts = CooccurrenceCounts::new();
            for sentence in chunk {
                let merged;
                let sentence = if has_multiword {
                    merged = merge_multiword(sentence, vocab);
                    &merged
                } else {
                    sentence
                };
                for (i, tok) in sentence.tokens.iter().enumerate() {
                    let Some(word) = vocab.get(&tok.surface) else {
                        continue;
                    };
                    if let Some(key) = scheme.extract(sentence, i)? {
                        counts.accumulate(word, table.intern(key));
                    }
                }
            }
            Ok((table, counts))
        })
        .collect::<Result<_>>()?;

    let mut table = ContextTable::new();
    let mut counts = CooccurrenceCounts::new();
    for (local_table, local_counts) in partials {
        let remap: Vec<ContextId> = local_table
            .keys()
            .iter()
            .map(|k| table.intern(k.clone()))
            .collect();
        for (w, c, n) in local_counts.pairs() {
            counts.add(w, remap[c.index()], n);
        }
    }
    Ok((table, counts))
}

pub fn build_index(
    sentences: &[Sentence],
    vocab: Vocabulary,
    scheme: ContextScheme,
    config: ApmiConfig,
) -> Result<ApmiIndex> {
    if vocab.is_empty() {
        return Err(Error::usage("empty vocabulary"));
    }
    if sentences.is_empty() {
        return Err(Error::usage("empty corpus"));
    }
    config.validate()?;
    let (contexts, counts) = count_cooccurrences(sentences, &vocab, scheme)?;
    ApmiIndex::from_counts(vocab, contexts, &counts, config)
}
