//! Choosing the sense of a compound constituent.
//!
//! The set `{compound, constituent}` is expanded over a sub-index holding
//! only the set, the constituent's synonyms, and the contexts they occur in.
//! The synonyms are ranked by their expansion score and the top one is the
//! sense the constituent takes in the compound.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::cooccur::ApmiIndex;
use crate::error::{Error, Result};
use crate::expansion::{expand, restrict, ExpansionParams, InputSet};

/// Headword -> synonyms, read from a `headword<TAB>synonym...` file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: BTreeMap<String, Vec<String>>,
}

impl SynonymLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds synonyms to a headword, skipping the headword itself and
    /// synonyms already listed.
    pub fn insert<I, S>(&mut self, headword: &str, synonyms: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let head = headword.trim().to_lowercase();
        let list = self.entries.entry(head.clone()).or_default();
        for s in synonyms {
            let s = s.as_ref().trim().to_lowercase();
            if !s.is_empty() && s != head && !list.contains(&s) {
                list.push(s);
            }
        }
    }

    pub fn get(&self, headword: &str) -> Option<&[String]> {
        self.entries
            .get(&headword.trim().to_lowercase())
            .map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_synonyms<R: BufRead>(reader: R) -> Result<SynonymLexicon> {
    let mut lexicon = SynonymLexicon::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let head = fields.next().unwrap_or_default().trim();
        if head.is_empty() {
            return Err(Error::parse(i + 1, "missing headword"));
        }
        let synonyms: Vec<&str> = fields.map(str::trim).filter(|s| !s.is_empty()).collect();
        if synonyms.is_empty() {
            return Err(Error::parse(
                i + 1,
                format!("headword {head:?} has no tab-separated synonyms"),
            ));
        }
        lexicon.insert(head, synonyms);
    }
    Ok(lexicon)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisambiguationQuery {
    pub compound: String,
    pub constituent: String,
    /// `false` expands `{compound}` alone.
    pub include_constituent: bool,
}

impl DisambiguationQuery {
    pub fn new(compound: impl Into<String>, constituent: impl Into<String>) -> Self {
        DisambiguationQuery {
            compound: compound.into().trim().to_lowercase(),
            constituent: constituent.into().trim().to_lowercase(),
            include_constituent: true,
        }
    }

    pub fn omit_constituent(mut self) -> Self {
        self.include_constituent = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisambiguationAnswer {
    pub compound: String,
    pub constituent: String,
    /// Synonyms with their expansion scores, best first.
    pub ranked: Vec<(String, f64)>,
    pub chosen: String,
    /// Every synonym scored 0; `chosen` is then the alphabetically first.
    pub no_signal: bool,
}

pub fn disambiguate(
    index: &ApmiIndex,
    query: &DisambiguationQuery,
    lexicon: &SynonymLexicon,
    rho: f64,
) -> Result<DisambiguationAnswer> {
    let synonyms = lexicon.get(&query.constituent).ok_or_else(|| {
        Error::precondition(format!("no synonyms listed for {:?}", query.constituent))
    })?;
    disambiguate_among(index, query, synonyms, rho)
}

/// Ranks an explicit synonym list instead of looking it up in a lexicon.
pub fn disambiguate_among<S: AsRef<str>>(
    index: &ApmiIndex,
    query: &DisambiguationQuery,
    synonyms: &[S],
    rho: f64,
) -> Result<DisambiguationAnswer> {
    let compound = index.word_id(&query.compound)?;
    let constituent = index.word_id(&query.constituent)?;

    let mut candidates = BTreeSet::new();
    for s in synonyms {
        let id = index.word_id(s.as_ref())?;
        if id != compound && id != constituent {
            candidates.insert(id);
        }
    }
    if candidates.len() < 2 {
        return Err(Error::precondition(format!(
            "{:?} needs at least two synonyms, found {}",
            query.constituent,
            candidates.len()
        )));
    }

    let mut focus: Vec<_> = candidates.iter().copied().collect();
    focus.push(compound);
    focus.push(constituent);
    let sub = restrict(index, &focus)?;

    let mut seeds = vec![query.compound.as_str()];
    if query.include_constituent {
        seeds.push(query.constituent.as_str());
    }
    let set = InputSet::from_terms(&sub, &seeds)?;
    let sub_candidates = candidates
        .iter()
        .map(|&id| sub.word_id(index.vocab().term(id)))
        .collect::<Result<Vec<_>>>()?;
    let result = expand(
        &sub,
        &set,
        &ExpansionParams::new(rho).with_candidates(sub_candidates),
    )?;

    let ranked: Vec<(String, f64)> = result
        .with_terms(sub.vocab())
        .filter(|(t, _)| *t != query.compound && *t != query.constituent)
        .map(|(t, s)| (t.to_string(), s))
        .collect();
    let no_signal = ranked.iter().all(|&(_, s)| s <= 0.0);
    let chosen = ranked[0].0.clone();
    Ok(DisambiguationAnswer {
        compound: query.compound.clone(),
        constituent: query.constituent.clone(),
        ranked,
        chosen,
        no_signal,
    })
}
