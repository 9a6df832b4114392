use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_substitution_map, query_seed, Family, InterventionCode, InterventionError, InterventionSpec, SingleChoice, SubstitutionMap};
use crate::corpus::{join_surfaces, Dataset, Number, Query, Token, ADPOSITIONS};
use crate::lexicon::{display_lemma, lemma_key, ColorTable, Lexicon, Pos, SizeTable};
use crate::matching::randomized_matching;

// Independent random streams per query.
const STREAM_DRAW: u64 = 0;
const STREAM_SINGLE: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_SHUFFLE_PLURAL: u64 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub index: usize,
    pub old: String,
    /// Incoming lemma; `None` when the token was deleted.
    pub new: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditedQuery {
    pub query_id: String,
    pub code: InterventionCode,
    pub seed: u64,
    pub edited_text: String,
    pub substitutions: Vec<Substitution>,
    /// Positions whose surface changed or was deleted.
    pub n_perturbed: usize,
}

/// What a single edit may consult. `map` is required for E, E-comb, CA and
/// CI codes (except adposition E, which draws at random).
#[derive(Clone, Copy, Debug)]
pub struct EditResources<'a> {
    pub lexicon: &'a Lexicon,
    pub map: Option<&'a SubstitutionMap>,
}

struct Change {
    index: usize,
    old: String,
    // (surface, lemma) written at `index`; None deletes.
    new: Option<(String, String)>,
}

fn eligible(q: &Query, code: InterventionCode) -> Vec<&Token> {
    q.tokens
        .iter()
        .filter(|t| match code.family {
            Family::S => SizeTable::counterpart(&t.surface).is_some(),
            Family::CA | Family::CI => true,
            _ => t.pos == Some(code.pos),
        })
        .filter(|t| !code.singular_only || t.number == Number::Singular)
        .collect()
}

fn replace(t: &Token, lemma: &str) -> Change {
    let shown = display_lemma(lemma);
    Change {
        index: t.index,
        old: t.lemma.clone(),
        new: Some((shown.clone(), shown)),
    }
}

fn permute(tokens: &[&Token], seed: u64, out: &mut Vec<Change>) {
    let perm = randomized_matching(tokens.len(), seed);
    for (slot, &from) in perm.order.iter().enumerate() {
        out.push(Change {
            index: tokens[slot].index,
            old: tokens[slot].lemma.clone(),
            new: Some((tokens[from].surface.clone(), tokens[from].lemma.clone())),
        });
    }
}

fn plan(q: &Query, spec: &InterventionSpec, res: &EditResources<'_>) -> Result<Vec<Change>, InterventionError> {
    let code = spec.code;
    let seed = |stream| query_seed(spec.seed, &q.id, stream);
    let tokens = eligible(q, code);
    let lex = res.lexicon;
    let mut out = Vec::new();
    match code.family {
        Family::E if code.pos == Pos::Adp => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed(STREAM_DRAW));
            for t in tokens {
                let own = lemma_key(&t.surface);
                let pool: Vec<&str> = ADPOSITIONS.iter().copied().filter(|a| *a != own).collect();
                let pick = pool.choose(&mut rng).expect("adposition pool is never empty");
                out.push(replace(t, pick));
            }
        }
        Family::E | Family::EComb | Family::CA | Family::CI => {
            let map = res.map.ok_or(InterventionError::MissingMap(code))?;
            if !map.serves(code) {
                return Err(InterventionError::WrongMap {
                    code,
                    map: format!("{}-{:?}", map.pos.as_str(), map.provenance),
                });
            }
            for t in tokens {
                // Color words are keyed by surface first, then by lemma.
                let by_surface = lemma_key(&t.surface);
                let key = if matches!(code.family, Family::CA | Family::CI) && map.lookup(&by_surface, None).is_some() {
                    by_surface
                } else {
                    lemma_key(&t.lemma)
                };
                if let Some(target) = map.lookup(&key, t.verb_form) {
                    out.push(replace(t, target));
                }
            }
        }
        Family::S => {
            for t in tokens {
                let other = SizeTable::counterpart(&t.surface).expect("filtered on counterpart");
                out.push(replace(t, other));
            }
        }
        Family::A | Family::HE | Family::HO => {
            for t in tokens {
                let found = match code.family {
                    Family::A => lex.antonym_of(&t.lemma, code.pos),
                    Family::HE => lex.hypernym_of(&t.lemma, code.pos),
                    _ => lex.hyponym_of(&t.lemma, code.pos),
                };
                if let Some(target) = found {
                    out.push(replace(t, target));
                }
            }
        }
        Family::P if code.pos == Pos::Noun => {
            let (sing, plur): (Vec<&Token>, Vec<&Token>) = tokens.iter().partition(|t| t.number != Number::Plural);
            permute(&sing, seed(STREAM_SHUFFLE), &mut out);
            permute(&plur, seed(STREAM_SHUFFLE_PLURAL), &mut out);
            out.sort_by_key(|c| c.index);
        }
        Family::P | Family::RP => permute(&tokens, seed(STREAM_SHUFFLE), &mut out),
        Family::SPS => {
            let sing: Vec<&Token> = tokens.iter().copied().filter(|t| t.number == Number::Singular).collect();
            let plur: Vec<&Token> = tokens.iter().copied().filter(|t| t.number == Number::Plural).collect();
            for (s, p) in sing.iter().zip(plur.iter()) {
                for (at, from) in [(s, p), (p, s)] {
                    out.push(Change {
                        index: at.index,
                        old: at.lemma.clone(),
                        new: Some((from.surface.clone(), from.lemma.clone())),
                    });
                }
            }
            out.sort_by_key(|c| c.index);
        }
        Family::B => {
            for t in tokens {
                out.push(Change {
                    index: t.index,
                    old: t.lemma.clone(),
                    new: None,
                });
            }
        }
    }
    if code.single && out.len() > 1 {
        let keep = match spec.single_choice {
            SingleChoice::First => 0,
            SingleChoice::Seeded => ChaCha8Rng::seed_from_u64(seed(STREAM_SINGLE)).gen_range(0..out.len()),
        };
        out = vec![out.swap_remove(keep)];
    }
    Ok(out)
}

/// Applies one intervention to one query. Queries without eligible tokens
/// come back unchanged with `n_perturbed = 0`.
pub fn generate_edit(q: &Query, spec: &InterventionSpec, res: &EditResources<'_>) -> Result<EditedQuery, InterventionError> {
    spec.validate()?;
    let changes = plan(q, spec, res)?;
    let mut surfaces: Vec<Option<&str>> = q.tokens.iter().map(|t| Some(t.surface.as_str())).collect();
    let mut n_perturbed = 0;
    let mut substitutions = Vec::with_capacity(changes.len());
    for c in &changes {
        let before = surfaces[c.index];
        let after = c.new.as_ref().map(|(s, _)| s.as_str());
        if after != before {
            n_perturbed += 1;
        }
        surfaces[c.index] = after;
        substitutions.push(Substitution {
            index: c.index,
            old: c.old.clone(),
            new: c.new.as_ref().map(|(_, l)| l.clone()),
        });
    }
    Ok(EditedQuery {
        query_id: q.id.clone(),
        code: spec.code,
        seed: spec.seed,
        edited_text: join_surfaces(surfaces.into_iter().flatten()),
        substitutions,
        n_perturbed,
    })
}

/// Edited queries of a dataset plus the perturbed-word total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditBatch {
    pub edits: Vec<EditedQuery>,
    pub total_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<SubstitutionMap>,
}

impl EditBatch {
    /// Edits every query with already prepared resources. Output order
    /// follows the queries regardless of thread count.
    pub fn from_queries(queries: &[Query], spec: &InterventionSpec, res: &EditResources<'_>) -> Result<EditBatch, InterventionError> {
        let edits = queries
            .par_iter()
            .map(|q| generate_edit(q, spec, res))
            .collect::<Result<Vec<_>, _>>()?;
        let total_n = edits.iter().map(|e| e.n_perturbed).sum();
        Ok(EditBatch {
            edits,
            total_n,
            map: None,
        })
    }
}

/// Builds whatever map the code needs, then edits every query.
pub fn edit_dataset(d: &Dataset, spec: &InterventionSpec, lexicon: &Lexicon, colors: &ColorTable) -> Result<EditBatch, InterventionError> {
    spec.validate()?;
    let map = if spec.code.needs_map() {
        Some(build_substitution_map(d, spec.code.map_key(), lexicon, colors)?)
    } else {
        None
    };
    let res = EditResources {
        lexicon,
        map: map.as_ref(),
    };
    let mut batch = EditBatch::from_queries(&d.queries, spec, &res)?;
    batch.map = map;
    Ok(batch)
}

/// Writes one JSON object per edited query.
pub fn write_edits_jsonl<W: Write>(mut w: W, edits: &[EditedQuery]) -> Result<(), InterventionError> {
    for e in edits {
        serde_json::to_writer(&mut w, e).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
