//! Wu-Palmer similarity over a hypernym taxonomy, and the baseline that
//! picks the synonym most similar to the compound.
//!
//! Depth is one more than the shortest parent path to any root, so roots
//! have depth 1. Taxonomy files hold two kinds of tab-separated lines:
//!
//! ```text
//! N   <child sense>   <parent sense>
//! L   <term>          <sense>
//! ```

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::BufRead;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct Taxonomy {
    names: Vec<String>,
    ids: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    depth: Vec<u32>,
    lexicon: BTreeMap<String, Vec<usize>>,
}

impl Taxonomy {
    /// Builds a taxonomy from `(child, parent)` edges and `(term, sense)`
    /// lexicon entries. Senses named only in the lexicon become roots.
    pub fn new<'a>(
        edges: impl IntoIterator<Item = (&'a str, &'a str)>,
        lexicon: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut tax = Taxonomy::default();
        for (child, parent) in edges {
            let c = tax.node(child);
            let p = tax.node(parent);
            if c == p {
                return Err(Error::Structure(format!("{child:?} is its own parent")));
            }
            if !tax.parents[c].contains(&p) {
                tax.parents[c].push(p);
            }
        }
        for (term, sense) in lexicon {
            let s = tax.node(sense);
            let senses = tax.lexicon.entry(term.trim().to_lowercase()).or_default();
            if !senses.contains(&s) {
                senses.push(s);
            }
        }
        tax.compute_depths()?;
        Ok(tax)
    }

    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut edges = Vec::new();
        let mut lexicon = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 || cols[1].is_empty() || cols[2].is_empty() {
                return Err(Error::parse(i + 1, "expected 3 tab-separated fields"));
            }
            match cols[0] {
                "N" => edges.push((cols[1].to_string(), cols[2].to_string())),
                "L" => lexicon.push((cols[1].to_string(), cols[2].to_string())),
                tag => return Err(Error::parse(i + 1, format!("unknown record type {tag:?}"))),
            }
        }
        Taxonomy::new(
            edges.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            lexicon.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        )
    }

    fn node(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        self.parents.push(Vec::new());
        id
    }

    /// Multi-source BFS down from the roots; any node left unreached sits
    /// on a cycle.
    fn compute_depths(&mut self) -> Result<()> {
        let n = self.names.len();
        let mut children = vec![Vec::new(); n];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let mut depth = vec![0u32; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| self.parents[i].is_empty()).collect();
        for &r in &queue {
            depth[r] = 1;
        }
        while let Some(v) = queue.pop_front() {
            for &c in &children[v] {
                if depth[c] == 0 {
                    depth[c] = depth[v] + 1;
                    queue.push_back(c);
                }
            }
        }
        if let Some(bad) = depth.iter().position(|&d| d == 0) {
            return Err(Error::Structure(format!(
                "sense {:?} does not reach a root",
                self.names[bad]
            )));
        }
        // Reaching a root does not rule out a cycle further down.
        let mut state = vec![0u8; n];
        for start in 0..n {
            if state[start] == 0 {
                self.check_acyclic(start, &mut state)?;
            }
        }
        self.depth = depth;
        Ok(())
    }

    fn check_acyclic(&self, start: usize, state: &mut [u8]) -> Result<()> {
        // iterative DFS over parent links; 1 = on stack, 2 = done
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if let Some(&p) = self.parents[v].get(top.1) {
                top.1 += 1;
                match state[p] {
                    0 => {
                        state[p] = 1;
                        stack.push((p, 0));
                    }
                    1 => {
                        return Err(Error::Structure(format!(
                            "hypernym cycle through {:?}",
                            self.names[p]
                        )))
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
        Ok(())
    }

    fn id(&self, sense: &str) -> Result<usize> {
        self.ids
            .get(sense)
            .copied()
            .ok_or_else(|| Error::usage(format!("unknown sense {sense:?}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn senses(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn parents(&self, sense: &str) -> Result<Vec<&str>> {
        Ok(self.parents[self.id(sense)?]
            .iter()
            .map(|&p| self.names[p].as_str())
            .collect())
    }

    pub fn term_senses(&self, term: &str) -> Option<Vec<&str>> {
        self.lexicon
            .get(&term.trim().to_lowercase())
            .map(|ss| ss.iter().map(|&s| self.names[s].as_str()).collect())
    }

    pub fn depth(&self, sense: &str) -> Result<u32> {
        Ok(self.depth[self.id(sense)?])
    }

    /// `v` and all its hypernyms, as a membership mask.
    fn ancestors(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![v];
        seen[v] = true;
        while let Some(x) = stack.pop() {
            for &p in &self.parents[x] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    fn wup_ids(&self, a: usize, b: usize) -> f64 {
        let mask = self.ancestors(a);
        let lcs_depth = self
            .ancestors(b)
            .iter()
            .enumerate()
            .filter(|&(i, &shared)| shared && mask[i])
            .map(|(i, _)| self.depth[i])
            .max();
        match lcs_depth {
            // With multiple inheritance a shortest-path depth can make a
            // subsumer deeper than the node itself; cap at identity.
            Some(d) => (2.0 * d as f64 / (self.depth[a] + self.depth[b]) as f64).min(1.0),
            None => 0.0,
        }
    }

    /// `2 depth(lcs) / (depth(a) + depth(b))`, 0 without a common ancestor.
    pub fn wup_similarity(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.wup_ids(self.id(a)?, self.id(b)?))
    }

    /// Maximum similarity over all sense pairs of two terms.
    pub fn word_similarity(&self, a: &str, b: &str) -> Result<f64> {
        let senses = |t: &str| {
            self.lexicon
                .get(&t.trim().to_lowercase())
                .ok_or_else(|| Error::precondition(format!("{t:?} is not in the taxonomy lexicon")))
        };
        let (sa, sb) = (senses(a)?, senses(b)?);
        Ok(sa
            .iter()
            .flat_map(|&x| sb.iter().map(move |&y| (x, y)))
            .map(|(x, y)| self.wup_ids(x, y))
            .fold(0.0, f64::max))
    }
}

/// The synonym with the highest word similarity to the compound; ties go
/// to the alphabetically first synonym.
pub fn baseline_disambiguate<S: AsRef<str>>(
    taxonomy: &Taxonomy,
    compound: &str,
    synonyms: &[S],
) -> Result<(String, f64)> {
    if taxonomy.term_senses(compound).is_none() {
        return Err(Error::precondition(format!(
            "{compound:?} is not in the taxonomy lexicon"
        )));
    }
    let mut scored = Vec::with_capacity(synonyms.len());
    for s in synonyms {
        let s = s.as_ref().trim().to_lowercase();
        if scored.iter().any(|(t, _)| *t == s) {
            continue;
        }
        let sim = taxonomy.word_similarity(compound, &s)?;
        scored.push((s, sim));
    }
    if scored.len() < 2 {
        return Err(Error::precondition(format!(
            "need at least two synonyms, found {}",
            scored.len()
        )));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(scored.swap_remove(0))
}
