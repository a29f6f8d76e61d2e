//! Corpus ingestion: CoNLL-U and plain-text readers, vocabulary interning,
//! and merging of multiword compound spellings into single tokens.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placeholder used for the POS and relation columns of plain-text tokens.
pub const PLACEHOLDER: &str = "_";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    /// Lowercased word form.
    pub surface: String,
    /// Universal POS tag.
    pub upos: String,
    /// 0-based index of the syntactic head; the root points at itself.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    /// A token without syntactic annotation, headed by itself.
    pub fn plain(surface: impl Into<String>, index: usize) -> Self {
        Token {
            surface: surface.into(),
            upos: PLACEHOLDER.to_string(),
            head: index,
            deprel: PLACEHOLDER.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    pub fn is_root(&self, index: usize) -> bool {
        self.tokens.get(index).is_some_and(|t| t.head == index)
    }

    /// Checks that the head links form a tree: every head in range, exactly
    /// one self-headed root, and no cycles.
    pub fn validate_tree(&self) -> Result<()> {
        let n = self.tokens.len();
        let mut roots = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.head >= n {
                return Err(Error::Structure(format!(
                    "token {} ({:?}) has head {} outside a sentence of {} tokens",
                    i + 1,
                    tok.surface,
                    tok.head + 1,
                    n
                )));
            }
            if tok.head == i {
                roots += 1;
            }
        }
        if n > 0 && roots != 1 {
            return Err(Error::Structure(format!(
                "expected exactly one root, found {roots}"
            )));
        }
        // 0 = unvisited, 1 = on current path, 2 = reaches the root
        let mut state = vec![0u8; n];
        for start in 0..n {
            let mut path = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                path.push(cur);
                let head = self.tokens[cur].head;
                if head == cur {
                    break;
                }
                if state[head] == 1 {
                    return Err(Error::Structure(format!(
                        "head links of token {} form a cycle",
                        head + 1
                    )));
                }
                cur = head;
            }
            for p in path {
                state[p] = 2;
            }
        }
        Ok(())
    }
}

/// Dense identifier of a vocabulary term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WordId(pub u32);

impl WordId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for WordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Splits a term on its internal separators (spaces and hyphens).
pub(crate) fn term_parts(term: &str) -> impl Iterator<Item = &str> {
    term.split([' ', '-']).filter(|p| !p.is_empty())
}

fn normalize_term(term: &str) -> String {
    term.trim().to_lowercase()
}

/// Bijective term <-> id mapping with contiguous ids.
///
/// Terms containing a space or hyphen are additionally indexed by their
/// separator-free parts so that [`merge_multiword`] can find them in token
/// sequences.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, WordId>,
    multiword: HashMap<Vec<String>, WordId>,
    multiword_heads: HashSet<String>,
    max_parts: usize,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from terms in order, lowercasing and dropping
    /// blanks and duplicates.
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = Vocabulary::new();
        for t in terms {
            if !t.as_ref().trim().is_empty() {
                vocab.intern(t.as_ref());
            }
        }
        vocab
    }

    pub fn intern(&mut self, term: &str) -> WordId {
        let term = normalize_term(term);
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = WordId(u32::try_from(self.terms.len()).expect("vocabulary exceeds u32 ids"));
        if term.contains([' ', '-']) {
            let parts: Vec<String> = term_parts(&term).map(str::to_string).collect();
            // First spelling wins when two spellings share the same parts.
            if parts.len() >= 2 && !self.multiword.contains_key(&parts) {
                self.max_parts = self.max_parts.max(parts.len());
                self.multiword_heads.insert(parts[0].clone());
                self.multiword.insert(parts, id);
            }
        }
        self.ids.insert(term.clone(), id);
        self.terms.push(term);
        id
    }

    pub fn get(&self, term: &str) -> Option<WordId> {
        match self.ids.get(term) {
            Some(&id) => Some(id),
            None => self.ids.get(&normalize_term(term)).copied(),
        }
    }

    pub fn term(&self, id: WordId) -> &str {
        &self.terms[id.index()]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn ids(&self) -> impl Iterator<Item = WordId> {
        (0..self.terms.len() as u32).map(WordId)
    }

    pub fn is_multiword(&self, term: &str) -> bool {
        term.contains([' ', '-']) && self.ids.contains_key(term)
    }

    pub fn multiword_terms(&self) -> impl Iterator<Item = &str> {
        self.terms
            .iter()
            .filter(|t| t.contains([' ', '-']))
            .map(String::as_str)
    }
}

/// Streaming CoNLL-U reader yielding one [`Sentence`] at a time.
///
/// Multiword-token ranges (`3-4`) and empty nodes (`3.1`) are skipped.
pub struct ConlluReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    done: bool,
}

impl<R: BufRead> ConlluReader<R> {
    pub fn new(reader: R) -> Self {
        ConlluReader {
            lines: reader.lines(),
            line_no: 0,
            done: false,
        }
    }

    fn read_sentence(&mut self) -> Result<Option<Sentence>> {
        // (surface, upos, raw 1-based head, deprel, line)
        let mut rows: Vec<(String, String, usize, String, usize)> = Vec::new();
        loop {
            let line = match self.lines.next() {
                Some(line) => line?,
                None => {
                    self.done = true;
                    break;
                }
            };
            self.line_no += 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                if rows.is_empty() {
                    continue;
                }
                break;
            }
            if line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 10 {
                return Err(Error::parse(
                    self.line_no,
                    format!("expected 10 tab-separated columns, found {}", cols.len()),
                ));
            }
            let id = cols[0];
            if id.contains('-') || id.contains('.') {
                continue;
            }
            let id: usize = id
                .parse()
                .map_err(|_| Error::parse(self.line_no, format!("non-numeric ID {id:?}")))?;
            if id != rows.len() + 1 {
                return Err(Error::parse(
                    self.line_no,
                    format!("expected token ID {}, found {id}", rows.len() + 1),
                ));
            }
            let head: usize = cols[6].parse().map_err(|_| {
                Error::parse(self.line_no, format!("non-numeric HEAD {:?}", cols[6]))
            })?;
            rows.push((
                cols[1].to_lowercase(),
                cols[3].to_string(),
                head,
                cols[7].to_string(),
                self.line_no,
            ));
        }
        if rows.is_empty() {
            return Ok(None);
        }
        let n = rows.len();
        let mut tokens = Vec::with_capacity(n);
        for (i, (surface, upos, head, deprel, line)) in rows.into_iter().enumerate() {
            let head = match head {
                0 => i,
                h if h <= n => h - 1,
                h => {
                    return Err(Error::Structure(format!(
                        "line {line}: HEAD {h} out of range for a sentence of {n} tokens"
                    )))
                }
            };
            if head != i && deprel.is_empty() {
                return Err(Error::parse(line, "empty DEPREL on a non-root token"));
            }
            tokens.push(Token {
                surface,
                upos,
                head,
                deprel,
            });
        }
        let sentence = Sentence::new(tokens);
        sentence.validate_tree()?;
        Ok(Some(sentence))
    }
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = Result<Sentence>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_sentence() {
            Ok(Some(s)) => Some(Ok(s)),
            Ok(None) => None,
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

pub fn parse_conllu<R: BufRead>(reader: R) -> Result<Vec<Sentence>> {
    ConlluReader::new(reader).collect()
}

/// Writes the columns this crate retains (ID, FORM, UPOS, HEAD, DEPREL);
/// the rest are `_`.
pub fn write_conllu<W: Write>(sentences: &[Sentence], mut out: W) -> Result<()> {
    for sentence in sentences {
        for (i, tok) in sentence.tokens.iter().enumerate() {
            let head = if tok.head == i { 0 } else { tok.head + 1 };
            writeln!(
                out,
                "{}\t{}\t_\t{}\t_\t_\t{}\t{}\t_\t_",
                i + 1,
                tok.surface,
                tok.upos,
                head,
                tok.deprel
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn ends_sentence(word: &str) -> bool {
    word.ends_with(['.', '!', '?'])
}

/// Lowercasing whitespace tokenizer. Sentences end at words carrying a
/// final `.`, `!` or `?`; trailing punctuation is stripped from every word.
pub fn tokenize_plain(text: &str) -> Vec<Sentence> {
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for word in text.split_whitespace() {
        let stripped = word
            .trim_end_matches(|c: char| c.is_ascii_punctuation())
            .trim_start_matches(['"', '\'', '(', '[', '{']);
        if !stripped.is_empty() {
            let index = current.len();
            current.push(Token::plain(stripped.to_lowercase(), index));
        }
        if ends_sentence(word) && !current.is_empty() {
            sentences.push(Sentence::new(std::mem::take(&mut current)));
        }
    }
    if !current.is_empty() {
        sentences.push(Sentence::new(current));
    }
    sentences
}

/// Replaces each maximal run of tokens spelling a multiword vocabulary term
/// with a single token, scanning left to right and preferring the longest
/// match at each position.
///
/// A run matches when its tokens, split on spaces and hyphens, give the same
/// parts as the term; bare `-` tokens may sit between parts. The merged token
/// is spelled like the vocabulary term and inherits the annotation of the
/// run's syntactic head.
pub fn merge_multiword(sentence: &Sentence, vocab: &Vocabulary) -> Sentence {
    if vocab.max_parts < 2 {
        return sentence.clone();
    }
    let tokens = &sentence.tokens;
    let n = tokens.len();
    // old index -> new index
    let mut remap = vec![0usize; n];
    // (first, last, merged surface) spans in output order
    let mut spans: Vec<(usize, usize, Option<WordId>)> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut best: Option<(usize, WordId)> = None;
        let mut first_parts = term_parts(&tokens[i].surface);
        if let Some(first) = first_parts.next() {
            if vocab.multiword_heads.contains(first) {
                let mut parts: Vec<String> = Vec::with_capacity(vocab.max_parts);
                for (j, tok) in tokens.iter().enumerate().skip(i) {
                    let before = parts.len();
                    parts.extend(term_parts(&tok.surface).map(str::to_string));
                    if parts.len() == before {
                        continue;
                    }
                    if parts.len() > vocab.max_parts {
                        break;
                    }
                    if let Some(&id) = vocab.multiword.get(&parts) {
                        best = Some((j, id));
                    }
                }
            }
        }
        match best {
            Some((j, id)) if j > i => {
                for r in remap.iter_mut().take(j + 1).skip(i) {
                    *r = spans.len();
                }
                spans.push((i, j, Some(id)));
                i = j + 1;
            }
            _ => {
                remap[i] = spans.len();
                spans.push((i, i, None));
                i += 1;
            }
        }
    }
    if spans.len() == n {
        return sentence.clone();
    }
    let merged = spans
        .iter()
        .enumerate()
        .map(|(new_idx, &(first, last, id))| {
            // The span token closest to the root: its path upward never
            // re-enters the span, so rewiring through it cannot form a cycle.
            let head_tok = (first..=last)
                .min_by_key(|&k| depth_of(tokens, k))
                .unwrap_or(first);
            let src = &tokens[head_tok];
            let head = if src.head == head_tok {
                new_idx
            } else {
                remap[src.head]
            };
            Token {
                surface: match id {
                    Some(id) => vocab.term(id).to_string(),
                    None => src.surface.clone(),
                },
                upos: src.upos.clone(),
                head,
                deprel: src.deprel.clone(),
            }
        })
        .collect();
    Sentence::new(merged)
}

/// Steps from `index` to a self-headed token, capped at the sentence length
/// so malformed head chains terminate.
fn depth_of(tokens: &[Token], mut index: usize) -> usize {
    let mut steps = 0;
    while tokens[index].head != index && tokens[index].head < tokens.len() && steps < tokens.len() {
        index = tokens[index].head;
        steps += 1;
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conllu_row(id: usize, form: &str, upos: &str, head: usize, deprel: &str) -> String {
        format!("{id}\t{form}\t_\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_\n")
    }

    #[test]
    fn empty_stream_parses_to_nothing() {
        assert!(parse_conllu("".as_bytes()).unwrap().is_empty());
        assert!(parse_conllu("\n\n# just a comment\n".as_bytes())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_token_sentence() {
        let text =
            conllu_row(1, "The", "DET", 2, "det") + &conllu_row(2, "bank", "NOUN", 0, "root");
        let s = parse_conllu(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        let toks = &s[0].tokens;
        assert_eq!(toks[0].surface, "the");
        assert_eq!(toks[0].head, 1);
        assert_eq!(toks[0].deprel, "det");
        assert!(s[0].is_root(1));
        assert_eq!(toks[1].upos, "NOUN");
    }

    #[test]
    fn multiword_token_ranges_are_skipped() {
        let text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n".to_string()
            + &conllu_row(1, "do", "AUX", 3, "aux")
            + &conllu_row(2, "n't", "PART", 3, "advmod")
            + &conllu_row(3, "go", "VERB", 0, "root");
        let s = parse_conllu(text.as_bytes()).unwrap();
        assert_eq!(s[0].len(), 3);
    }

    #[test]
    fn wrong_column_count_names_line() {
        let text = "# c\n1\tbank\tNOUN\n";
        match parse_conllu(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_head_names_line() {
        let text = conllu_row(1, "bank", "NOUN", 0, "root").replace("\t0\t", "\tx\t");
        match parse_conllu(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("HEAD"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn head_out_of_range_is_structural() {
        let text =
            conllu_row(1, "the", "DET", 7, "det") + &conllu_row(2, "bank", "NOUN", 0, "root");
        assert!(matches!(
            parse_conllu(text.as_bytes()),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn cycles_and_missing_roots_are_rejected() {
        let cyc = conllu_row(1, "a", "X", 2, "dep")
            + &conllu_row(2, "b", "X", 1, "dep")
            + &conllu_row(3, "c", "X", 0, "root");
        assert!(matches!(
            parse_conllu(cyc.as_bytes()),
            Err(Error::Structure(_))
        ));
        let two_roots = conllu_row(1, "a", "X", 0, "root") + &conllu_row(2, "b", "X", 0, "root");
        assert!(matches!(
            parse_conllu(two_roots.as_bytes()),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn tokenize_plain_examples() {
        let s = tokenize_plain("The money was gone.");
        assert_eq!(s.len(), 1);
        assert_eq!(
            s[0].surfaces().collect::<Vec<_>>(),
            ["the", "money", "was", "gone"]
        );

        let s = tokenize_plain("She hid her money in her sock.");
        assert_eq!(
            s[0].surfaces().collect::<Vec<_>>(),
            ["she", "hid", "her", "money", "in", "her", "sock"]
        );

        assert!(tokenize_plain("").is_empty());
        assert!(tokenize_plain(" ... ").is_empty());
        assert_eq!(tokenize_plain("One. Two! Three").len(), 3);
    }

    #[test]
    fn vocabulary_is_bijective_and_contiguous() {
        let v = Vocabulary::from_terms(["Money", "bank", "money", "", "home phone"]);
        assert_eq!(v.len(), 3);
        assert_eq!(v.get("money"), Some(WordId(0)));
        assert_eq!(v.get("MONEY"), Some(WordId(0)));
        assert_eq!(v.term(WordId(2)), "home phone");
        assert!(v.is_multiword("home phone"));
        assert!(!v.is_multiword("bank"));
    }

    fn plain(words: &[&str]) -> Sentence {
        Sentence::new(
            words
                .iter()
                .enumerate()
                .map(|(i, w)| Token::plain(*w, i))
                .collect(),
        )
    }

    #[test]
    fn merges_open_compound() {
        let v = Vocabulary::from_terms(["home phone"]);
        let merged = merge_multiword(&plain(&["home", "phone"]), &v);
        assert_eq!(merged.surfaces().collect::<Vec<_>>(), ["home phone"]);
    }

    #[test]
    fn merges_hyphenated_compound() {
        let v = Vocabulary::from_terms(["chain-smoker"]);
        let merged = merge_multiword(&plain(&["a", "chain", "-", "smoker"]), &v);
        assert_eq!(merged.surfaces().collect::<Vec<_>>(), ["a", "chain-smoker"]);
    }

    #[test]
    fn no_match_is_identity() {
        let v = Vocabulary::from_terms(["home phone"]);
        let s = plain(&["my", "home", "is", "a", "phone"]);
        assert_eq!(merge_multiword(&s, &v), s);
    }

    #[test]
    fn longest_match_wins() {
        let v = Vocabulary::from_terms(["bank account", "bank account number"]);
        let merged = merge_multiword(&plain(&["bank", "account", "number", "x"]), &v);
        assert_eq!(
            merged.surfaces().collect::<Vec<_>>(),
            ["bank account number", "x"]
        );
    }

    #[test]
    fn merged_token_takes_syntactic_head() {
        // my(2) home(2) phone(3) rang(root)
        let text = conllu_row(1, "my", "PRON", 3, "poss")
            + &conllu_row(2, "home", "NOUN", 3, "compound")
            + &conllu_row(3, "phone", "NOUN", 4, "nsubj")
            + &conllu_row(4, "rang", "VERB", 0, "root");
        let s = &parse_conllu(text.as_bytes()).unwrap()[0];
        let v = Vocabulary::from_terms(["home phone"]);
        let m = merge_multiword(s, &v);
        assert_eq!(m.len(), 3);
        assert_eq!(m.tokens[1].surface, "home phone");
        assert_eq!(m.tokens[1].deprel, "nsubj");
        assert_eq!(m.tokens[1].upos, "NOUN");
        assert_eq!(m.tokens[1].head, 2);
        assert_eq!(m.tokens[0].head, 1);
        assert!(m.is_root(2));
        m.validate_tree().unwrap();
    }

    #[test]
    fn merged_span_containing_the_root_stays_the_root() {
        // "ice" depends on "sold", which depends on "cream", the root.
        let tok = |surface: &str, head: usize, deprel: &str| Token {
            surface: surface.into(),
            upos: "NOUN".into(),
            head,
            deprel: deprel.into(),
        };
        let s = Sentence::new(vec![
            tok("ice", 2, "obj"),
            tok("cream", 1, "root"),
            tok("sold", 1, "acl"),
        ]);
        s.validate_tree().unwrap();
        let merged = merge_multiword(&s, &Vocabulary::from_terms(["ice cream"]));
        merged.validate_tree().unwrap();
        assert_eq!(merged.tokens[0].surface, "ice cream");
        assert_eq!(merged.tokens[0].deprel, "root");
        assert_eq!(merged.tokens[1].head, 0);
    }
}
