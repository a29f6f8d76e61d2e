//! Synthetic inputs shared by the benchmarks.

use compsense_core::{ContextScheme, Sentence, Token, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Zipf-ish random corpus over `n_words` word types, as untagged sentences.
pub fn random_corpus(seed: u64, sentences: usize, n_words: usize) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..sentences)
        .map(|_| {
            let len = rng.gen_range(5..25);
            let tokens = (0..len)
                .map(|i| {
                    let r: f64 = rng.gen();
                    let w = ((n_words as f64).powf(r) as usize).min(n_words - 1);
                    Token::plain(format!("w{w}"), i)
                })
                .collect();
            Sentence::new(tokens)
        })
        .collect()
}

pub fn vocabulary(n_words: usize) -> Vocabulary {
    Vocabulary::from_terms((0..n_words).map(|w| format!("w{w}")))
}

pub const SCHEME: ContextScheme = ContextScheme::Ngram { window: 1 };
