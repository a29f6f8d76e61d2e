//! Reference implementations and random generators shared by the
//! integration tests. The oracles here are deliberately naive: dense loops
//! straight from the formulas, with no sharing of code paths with the
//! library beyond its public data types.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use compsense_core::{
    ApmiConfig, ApmiIndex, ContextId, ContextKey, ContextTable, CooccurrenceCounts, Estimator,
    LogBase, Vocabulary, WordId,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn log_in(base: LogBase, x: f64) -> f64 {
    match base {
        LogBase::Natural => x.ln(),
        LogBase::Base2 => x.log2(),
        LogBase::Base10 => x.log10(),
    }
}

/// APPMI straight from counts. `reverse` divides the frequency term by
/// P(c) instead of P(w).
pub fn oracle_appmi(
    pair: u64,
    word: u64,
    context: u64,
    total: u64,
    config: &ApmiConfig,
    reverse: bool,
) -> f64 {
    if pair == 0 {
        return 0.0;
    }
    let n = total as f64;
    let p_w = word as f64 / n;
    let p_c = context as f64 / n;
    let p_wc = match config.estimator {
        Estimator::Joint => pair as f64 / n,
        Estimator::Conditional => pair as f64 / context as f64,
    };
    let pmi = log_in(config.log_base, p_wc / (p_w * p_c));
    let freq = log_in(config.log_base, p_wc / if reverse { p_c } else { p_w });
    (pmi + freq + config.k).max(0.0)
}

/// One consistent set of marginal counts: `pair <= min(word, context)` and
/// `word + context - pair <= total`.
#[derive(Clone, Copy, Debug)]
pub struct CountConfig {
    pub pair: u64,
    pub word: u64,
    pub context: u64,
    pub total: u64,
}

pub fn random_count_config<R: Rng>(rng: &mut R) -> CountConfig {
    let total = rng.gen_range(1..=10_000u64);
    let word = rng.gen_range(1..=total);
    let context = rng.gen_range(1..=total);
    let lo = (word + context).saturating_sub(total);
    let hi = word.min(context);
    let pair = rng.gen_range(lo..=hi);
    CountConfig {
        pair,
        word,
        context,
        total,
    }
}

pub fn random_config<R: Rng>(rng: &mut R) -> ApmiConfig {
    ApmiConfig {
        k: rng.gen_range(0.0..8.0),
        estimator: if rng.gen_bool(0.5) {
            Estimator::Joint
        } else {
            Estimator::Conditional
        },
        log_base: *[LogBase::Natural, LogBase::Base2, LogBase::Base10]
            .choose(rng)
            .unwrap(),
    }
}

pub struct RandomCounts {
    pub vocab: Vocabulary,
    pub contexts: ContextTable,
    pub counts: CooccurrenceCounts,
}

/// Random sparse co-occurrence counts over `w0..` and `c0..`.
pub fn random_counts<R: Rng>(rng: &mut R, max_words: usize, max_contexts: usize) -> RandomCounts {
    let n_words = rng.gen_range(2..=max_words);
    let n_contexts = rng.gen_range(1..=max_contexts);
    let density = rng.gen_range(0.05..0.5);
    let vocab = Vocabulary::from_terms((0..n_words).map(|i| format!("w{i}")));
    let mut contexts = ContextTable::new();
    for c in 0..n_contexts {
        contexts.intern(ContextKey::ngram([format!("c{c}"), "_".to_string()]));
    }
    let mut counts = CooccurrenceCounts::new();
    for w in 0..n_words {
        for c in 0..n_contexts {
            if rng.gen_bool(density) {
                counts.add(WordId(w as u32), ContextId(c as u32), rng.gen_range(1..=20));
            }
        }
    }
    if counts.total_pairs() == 0 {
        counts.add(WordId(0), ContextId(0), 1);
    }
    RandomCounts {
        vocab,
        contexts,
        counts,
    }
}

pub fn random_index<R: Rng>(rng: &mut R, max_words: usize, max_contexts: usize) -> ApmiIndex {
    let rc = random_counts(rng, max_words, max_contexts);
    let config = random_config(rng);
    ApmiIndex::from_counts(rc.vocab, rc.contexts, &rc.counts, config).unwrap()
}

/// Nonempty random subset of `0..n` with at most `max` members.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize, max: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let size = rng.gen_range(1..=max.min(n));
    let mut out = all[..size].to_vec();
    out.sort_unstable();
    out
}

/// Dense matrix form of expansion:
/// `E = M_cv · diag(f^rho) · M_vc · s` with `s` the 0/1 indicator of the set.
pub fn dense_expand(m_vc: &[Vec<f64>], m_cv: &[Vec<f64>], set: &[usize], rho: f64) -> Vec<f64> {
    let n_words = m_cv.len();
    let mut s = vec![0.0; n_words];
    for &w in set {
        s[w] = 1.0;
    }
    let a: Vec<f64> = m_vc
        .iter()
        .map(|row| row.iter().zip(&s).map(|(m, x)| m * x).sum())
        .collect();
    let f: Vec<f64> = m_vc
        .iter()
        .map(|row| set.iter().filter(|&&w| row[w] > 0.0).count() as f64 / set.len() as f64)
        .collect();
    let y: Vec<f64> = a.iter().zip(&f).map(|(a, f)| f.powf(rho) * a).collect();
    m_cv.iter()
        .map(|row| row.iter().zip(&y).map(|(m, y)| m * y).sum())
        .collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Random DAG over `n0..` (parents always have a smaller index) plus a
/// lexicon of `t0..` terms mapped to one to three senses each.
pub struct RandomTaxonomy {
    pub nodes: Vec<String>,
    pub parents: Vec<Vec<usize>>,
    pub lexicon: BTreeMap<String, Vec<usize>>,
}

impl RandomTaxonomy {
    pub fn generate<R: Rng>(rng: &mut R, max_nodes: usize) -> Self {
        let n = rng.gen_range(2..=max_nodes);
        let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let mut parents = vec![Vec::new(); n];
        for (i, ps) in parents.iter_mut().enumerate().skip(1) {
            if rng.gen_bool(0.15) {
                continue; // another root
            }
            let count = rng.gen_range(1..=3.min(i));
            let mut pool: Vec<usize> = (0..i).collect();
            pool.shuffle(rng);
            ps.extend_from_slice(&pool[..count]);
        }
        let mut lexicon = BTreeMap::new();
        for t in 0..rng.gen_range(3..=8) {
            let senses = random_subset(rng, n, 3);
            lexicon.insert(format!("t{t}"), senses);
        }
        RandomTaxonomy {
            nodes,
            parents,
            lexicon,
        }
    }

    pub fn edges(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                out.push((self.nodes[c].as_str(), self.nodes[p].as_str()));
            }
        }
        out
    }

    /// Every node appears in the lexicon under its own name so that roots
    /// without children still exist in the taxonomy.
    pub fn lexicon_pairs(&self) -> Vec<(&str, &str)> {
        let mut out: Vec<(&str, &str)> = self
            .nodes
            .iter()
            .map(|n| (n.as_str(), n.as_str()))
            .collect();
        for (t, senses) in &self.lexicon {
            for &s in senses {
                out.push((t.as_str(), self.nodes[s].as_str()));
            }
        }
        out
    }

    /// Depth by enumerating every upward path and keeping the shortest.
    pub fn depth(&self, node: usize) -> u32 {
        fn walk(t: &RandomTaxonomy, v: usize, memo: &mut HashMap<usize, u32>) -> u32 {
            if let Some(&d) = memo.get(&v) {
                return d;
            }
            let d = if t.parents[v].is_empty() {
                1
            } else {
                1 + t.parents[v]
                    .iter()
                    .map(|&p| walk(t, p, memo))
                    .min()
                    .unwrap()
            };
            memo.insert(v, d);
            d
        }
        walk(self, node, &mut HashMap::new())
    }

    pub fn ancestors(&self, node: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::from([node]);
        for &p in &self.parents[node] {
            out.extend(self.ancestors(p));
        }
        out
    }

    pub fn wup(&self, a: usize, b: usize) -> f64 {
        let common: Vec<usize> = self
            .ancestors(a)
            .intersection(&self.ancestors(b))
            .copied()
            .collect();
        let Some(lcs_depth) = common.iter().map(|&c| self.depth(c)).max() else {
            return 0.0;
        };
        let v = 2.0 * lcs_depth as f64 / (self.depth(a) + self.depth(b)) as f64;
        v.min(1.0)
    }

    pub fn word_similarity(&self, a: &str, b: &str) -> f64 {
        let mut best = 0.0f64;
        for &x in &self.lexicon[a] {
            for &y in &self.lexicon[b] {
                best = best.max(self.wup(x, y));
            }
        }
        best
    }

    /// Exhaustive argmax with ties going to the alphabetically first synonym.
    pub fn best_synonym(&self, compound: &str, synonyms: &[String]) -> (String, f64) {
        let mut sorted = synonyms.to_vec();
        sorted.sort();
        let mut best: Option<(String, f64)> = None;
        for s in sorted {
            let v = self.word_similarity(compound, &s);
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((s, v));
            }
        }
        best.unwrap()
    }
}
