use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Family, InterventionCode, InterventionError};
use crate::corpus::{Dataset, Token};
use crate::lexicon::{color_distance, lemma_key, ColorTable, Lexicon, Pos, VerbForm};
use crate::matching::{min_weight_matching, BipartiteConceptGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapProvenance {
    E,
    #[serde(rename = "E-comb")]
    ECombined,
    CA,
    CI,
}

/// One matched vocabulary. E-comb keeps one group per verb form; every
/// other map has a single group with no form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionGroup {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verb_form: Option<VerbForm>,
    /// Source lemma key to target lemma key.
    pub mapping: BTreeMap<String, String>,
    /// `{S, T, edges, pairs, total_weight}` record of the matching.
    pub audit: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionMap {
    pub pos: Pos,
    pub provenance: MapProvenance,
    pub groups: Vec<SubstitutionGroup>,
}

impl SubstitutionMap {
    /// Target lemma key for a source key; `verb_form` only matters for E-comb.
    pub fn lookup(&self, key: &str, verb_form: Option<VerbForm>) -> Option<&str> {
        let group = match self.provenance {
            MapProvenance::ECombined => self.groups.iter().find(|g| g.verb_form == verb_form)?,
            _ => self.groups.first()?,
        };
        group.mapping.get(key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.mapping.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when this map was built for `code` or one of its SG / -sing variants.
    pub fn serves(&self, code: InterventionCode) -> bool {
        let expected = match code.family {
            Family::E => MapProvenance::E,
            Family::EComb => MapProvenance::ECombined,
            Family::CA => MapProvenance::CA,
            Family::CI => MapProvenance::CI,
            _ => return false,
        };
        self.pos == code.pos && self.provenance == expected
    }
}

/// Lemma key a color token is known by: its surface when that names a
/// color, else its lemma.
fn color_key(t: &Token, table: &ColorTable) -> Option<String> {
    let surface = lemma_key(&t.surface);
    if table.contains(&surface) {
        return Some(surface);
    }
    let lemma = lemma_key(&t.lemma);
    table.contains(&lemma).then_some(lemma)
}

fn match_group<F>(sources: Vec<String>, targets: Vec<String>, verb_form: Option<VerbForm>, weight: F) -> Result<SubstitutionGroup, InterventionError>
where
    F: FnMut(&str, &str) -> Option<f64>,
{
    let g = BipartiteConceptGraph::build(sources, targets, weight)?;
    let m = min_weight_matching(&g);
    let mapping = m.pairs.iter().map(|p| (p.source.clone(), p.target.clone())).collect();
    Ok(SubstitutionGroup {
        verb_form,
        mapping,
        audit: m.audit_json(&g),
    })
}

/// Path-similarity matching of a vocabulary onto itself.
fn lexical_group(lex: &Lexicon, vocab: BTreeSet<String>, pos: Pos, verb_form: Option<VerbForm>) -> Result<SubstitutionGroup, InterventionError> {
    let words: Vec<String> = vocab.into_iter().collect();
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    let rows: Vec<Vec<Option<f64>>> = refs.par_iter().map(|s| lex.path_similarities(s, &refs, pos)).collect();
    let index: HashMap<&str, usize> = refs.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    match_group(words.clone(), words.clone(), verb_form, |s, t| rows[index[s]][index[t]])
}

/// Builds the dataset-level map for a map-driven code.
///
/// E: sources are the indexed query lemmas of the POS and targets are a copy
/// of them, weighted by path similarity. E-comb does the same per verb form.
/// CA targets the full color table, CI only the colors seen in the queries;
/// both weight by color similarity. An empty source set yields an empty map.
pub fn build_substitution_map(
    d: &Dataset,
    code: InterventionCode,
    lex: &Lexicon,
    colors: &ColorTable,
) -> Result<SubstitutionMap, InterventionError> {
    if !code.needs_map() {
        return Err(InterventionError::NoMap(code));
    }
    let pos = code.pos;
    let tokens = || d.queries.iter().flat_map(|q| q.tokens.iter());
    let (provenance, groups) = match code.family {
        Family::E => {
            let vocab: BTreeSet<String> = tokens()
                .filter(|t| t.pos == Some(pos))
                .map(|t| lemma_key(&t.lemma))
                .filter(|k| lex.contains(k, pos))
                .collect();
            (MapProvenance::E, vec![lexical_group(lex, vocab, pos, None)?])
        }
        Family::EComb => {
            let mut by_form: BTreeMap<Option<VerbForm>, BTreeSet<String>> = BTreeMap::new();
            for t in tokens().filter(|t| t.pos == Some(pos)) {
                let k = lemma_key(&t.lemma);
                if lex.contains(&k, pos) {
                    by_form.entry(t.verb_form).or_default().insert(k);
                }
            }
            let groups = by_form
                .into_iter()
                .map(|(form, vocab)| lexical_group(lex, vocab, pos, form))
                .collect::<Result<Vec<_>, _>>()?;
            (MapProvenance::ECombined, groups)
        }
        Family::CA | Family::CI => {
            let observed: BTreeSet<String> = tokens().filter_map(|t| color_key(t, colors)).collect();
            let dataset_table;
            let (provenance, target_table) = if code.family == Family::CA {
                (MapProvenance::CA, colors)
            } else {
                dataset_table = colors.dataset_subset(observed.iter().map(String::as_str));
                (MapProvenance::CI, &dataset_table)
            };
            let targets: Vec<String> = target_table.names().map(str::to_string).collect();
            let sources: Vec<String> = observed.into_iter().collect();
            // Every dataset color is also in the external table.
            let group = match_group(sources, targets, None, |s, t| color_distance(colors, s, t))?;
            (provenance, vec![group])
        }
        _ => unreachable!("needs_map covers exactly the map families"),
    };
    let map = SubstitutionMap { pos, provenance, groups };
    if map.is_empty() {
        log::warn!("substitution map for {code} is empty");
    }
    Ok(map)
}
