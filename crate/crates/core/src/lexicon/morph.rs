//! Inflection stripping in the style of WordNet's morphy: exception lists
//! first, then suffix detachment rules, keeping only indexed candidates.

use super::{lemma_key, Lexicon, Pos};

const NOUN_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ses", "s"),
    ("ves", "f"),
    ("xes", "x"),
    ("zes", "z"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("men", "man"),
    ("ies", "y"),
];

const VERB_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ies", "y"),
    ("es", "e"),
    ("es", ""),
    ("ed", "e"),
    ("ed", ""),
    ("ing", "e"),
    ("ing", ""),
];

const ADJ_RULES: &[(&str, &str)] = &[("er", ""), ("est", ""), ("er", "e"), ("est", "e")];

fn rules(pos: Pos) -> &'static [(&'static str, &'static str)] {
    match pos {
        Pos::Noun => NOUN_RULES,
        Pos::Verb => VERB_RULES,
        Pos::Adj => ADJ_RULES,
        Pos::Adp => &[],
    }
}

pub(super) fn base_forms(lex: &Lexicon, word: &str, pos: Pos) -> Vec<String> {
    let form = lemma_key(word);
    let mut out: Vec<String> = Vec::new();
    let push = |candidate: String, out: &mut Vec<String>| {
        if lex.contains(&candidate, pos) && !out.contains(&candidate) {
            out.push(candidate);
        }
    };
    for base in lex.exceptions(&form, pos) {
        push(base.clone(), &mut out);
    }
    push(form.clone(), &mut out);
    for (suffix, replacement) in rules(pos) {
        if let Some(stem) = form.strip_suffix(suffix) {
            if !stem.is_empty() {
                push(format!("{stem}{replacement}"), &mut out);
            }
        }
    }
    out
}
