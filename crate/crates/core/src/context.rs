//! Context identities for word occurrences.
//!
//! A dependency context is `[deprel, head surface, head UPOS]`; an n-gram
//! context is the surrounding words with the target slot blanked out. In
//! neither case does the word itself appear in its context.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Sentence;

/// Marker for n-gram slots that fall outside the sentence.
pub const BOUNDARY: &str = "<S>";

/// Separator between the scheme tag and the parts of a canonical key.
pub const UNIT_SEPARATOR: char = '\x1F';

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Dep,
    Ngram,
}

impl Scheme {
    fn tag(self) -> &'static str {
        match self {
            Scheme::Dep => "DEP",
            Scheme::Ngram => "NGRAM",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextKey {
    scheme: Scheme,
    parts: Vec<String>,
}

impl ContextKey {
    pub fn dependency(
        deprel: impl Into<String>,
        head: impl Into<String>,
        head_upos: impl Into<String>,
    ) -> Self {
        ContextKey {
            scheme: Scheme::Dep,
            parts: vec![deprel.into(), head.into(), head_upos.into()],
        }
    }

    /// Left neighbours followed by right neighbours, nearest last on the
    /// left and nearest first on the right.
    pub fn ngram<I, S>(parts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ContextKey {
            scheme: Scheme::Ngram,
            parts: parts.into_iter().map(Into::into).collect(),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn parts(&self) -> &[String] {
        &self.parts
    }

    /// Serialized form used in index files, e.g. `"DEP\x1Fattr\x1Fis\x1FAUX"`.
    pub fn canonical(&self) -> String {
        let mut s = String::from(self.scheme.tag());
        for p in &self.parts {
            s.push(UNIT_SEPARATOR);
            s.push_str(p);
        }
        s
    }

    pub fn from_canonical(s: &str) -> Result<Self> {
        let mut fields = s.split(UNIT_SEPARATOR);
        let scheme = match fields.next() {
            Some("DEP") => Scheme::Dep,
            Some("NGRAM") => Scheme::Ngram,
            other => {
                return Err(Error::usage(format!(
                    "unknown context scheme tag {other:?}"
                )))
            }
        };
        let parts: Vec<String> = fields.map(str::to_string).collect();
        let ok = match scheme {
            Scheme::Dep => parts.len() == 3,
            Scheme::Ngram => !parts.is_empty() && parts.len().is_multiple_of(2),
        };
        if !ok {
            return Err(Error::usage(format!(
                "context key {:?} has {} parts",
                s.replace(UNIT_SEPARATOR, "|"),
                parts.len()
            )));
        }
        Ok(ContextKey { scheme, parts })
    }
}

impl fmt::Display for ContextKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scheme {
            Scheme::Dep => write!(f, "[{}]", self.parts.join(", ")),
            Scheme::Ngram => {
                let half = self.parts.len() / 2;
                write!(
                    f,
                    "{} ... {}",
                    self.parts[..half].join(" "),
                    self.parts[half..].join(" ")
                )
            }
        }
    }
}

fn check_index(sentence: &Sentence, index: usize) -> Result<()> {
    if index >= sentence.len() {
        return Err(Error::usage(format!(
            "token index {index} out of range for a sentence of {} tokens",
            sentence.len()
        )));
    }
    Ok(())
}

/// `[deprel, head surface, head UPOS]` for the token, or `None` for the root.
pub fn dependency_context(sentence: &Sentence, index: usize) -> Result<Option<ContextKey>> {
    check_index(sentence, index)?;
    let tok = &sentence.tokens[index];
    if tok.head == index {
        return Ok(None);
    }
    let head = sentence
        .tokens
        .get(tok.head)
        .ok_or_else(|| Error::Structure(format!("head {} out of range", tok.head)))?;
    Ok(Some(ContextKey::dependency(
        tok.deprel.clone(),
        head.surface.clone(),
        head.upos.clone(),
    )))
}

/// The `window` words on either side of the token, `<S>` past the edges.
pub fn ngram_context(sentence: &Sentence, index: usize, window: usize) -> Result<ContextKey> {
    check_index(sentence, index)?;
    if window == 0 {
        return Err(Error::usage("n-gram window must be at least 1"));
    }
    let surface = |i: isize| -> String {
        if i < 0 || i as usize >= sentence.len() {
            BOUNDARY.to_string()
        } else {
            sentence.tokens[i as usize].surface.clone()
        }
    };
    let at = index as isize;
    let w = window as isize;
    let parts = (at - w..at).chain(at + 1..=at + w).map(surface);
    Ok(ContextKey::ngram(parts))
}

/// How contexts are derived from token occurrences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ContextScheme {
    #[default]
    Dependency,
    Ngram { window: usize },
}

impl ContextScheme {
    pub fn extract(&self, sentence: &Sentence, index: usize) -> Result<Option<ContextKey>> {
        match *self {
            ContextScheme::Dependency => dependency_context(sentence, index),
            ContextScheme::Ngram { window } => ngram_context(sentence, index, window).map(Some),
        }
    }
}

/// Dense identifier of an interned context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContextId(pub u32);

impl ContextId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, Default)]
pub struct ContextTable {
    keys: Vec<ContextKey>,
    ids: HashMap<ContextKey, ContextId>,
}

impl ContextTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, key: ContextKey) -> ContextId {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = ContextId(u32::try_from(self.keys.len()).expect("context table exceeds u32 ids"));
        self.ids.insert(key.clone(), id);
        self.keys.push(key);
        id
    }

    pub fn get(&self, key: &ContextKey) -> Option<ContextId> {
        self.ids.get(key).copied()
    }

    pub fn key(&self, id: ContextId) -> &ContextKey {
        &self.keys[id.index()]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[ContextKey] {
        &self.keys
    }
}
