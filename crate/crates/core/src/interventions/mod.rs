//! Contrastive query edits.
//!
//! Every code names a POS and an edit family, e.g. `NOUN-HE` or `ADJ-SG-CA`.
//! Dataset-level substitution maps (E, E-comb, CA, CI) are built once with a
//! minimum-weight matching and then applied per query. All randomness is
//! derived from the intervention seed and the query id.

mod edit;
mod map;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lexicon::Pos;
use crate::matching::MatchingError;

pub use edit::{edit_dataset, generate_edit, write_edits_jsonl, EditBatch, EditResources, EditedQuery, Substitution};
pub use map::{build_substitution_map, MapProvenance, SubstitutionGroup, SubstitutionMap};

#[derive(Debug, Error)]
pub enum InterventionError {
    #[error("unknown intervention code `{0}`")]
    UnknownCode(String),
    #[error("intervention {0} needs a substitution map")]
    MissingMap(InterventionCode),
    #[error("intervention {0} does not use a substitution map")]
    NoMap(InterventionCode),
    #[error("substitution map for {map} cannot serve {code}")]
    WrongMap { code: InterventionCode, map: String },
    #[error("single-token codes require SINGLE scope and vice versa ({0})")]
    Scope(InterventionCode),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error("writing edits: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// Most distant color from the full external table.
    CA,
    /// Most distant color among those observed in the dataset.
    CI,
    /// Size swap between the large and small word sets.
    S,
    /// Antonym.
    A,
    /// Most dissimilar concept by path similarity.
    E,
    /// E matched separately per verb form.
    EComb,
    /// Hypernym.
    HE,
    /// Hyponym.
    HO,
    /// Random permutation, number-preserving for nouns.
    P,
    /// Random permutation ignoring number.
    RP,
    /// Singular/plural position swap.
    SPS,
    /// Deletion.
    B,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::CA => "CA",
            Family::CI => "CI",
            Family::S => "S",
            Family::A => "A",
            Family::E => "E",
            Family::EComb => "E-comb",
            Family::HE => "HE",
            Family::HO => "HO",
            Family::P => "P",
            Family::RP => "RP",
            Family::SPS => "SPS",
            Family::B => "B",
        }
    }

    fn parse(s: &str) -> Option<Family> {
        Some(match s {
            "CA" => Family::CA,
            "CI" => Family::CI,
            "S" => Family::S,
            "A" => Family::A,
            "E" => Family::E,
            "E-comb" => Family::EComb,
            "HE" => Family::HE,
            "HO" => Family::HO,
            "P" => Family::P,
            "RP" => Family::RP,
            "SPS" => Family::SPS,
            "B" => Family::B,
            _ => return None,
        })
    }

    /// Families driven by a dataset-level substitution map.
    pub fn uses_map(self) -> bool {
        matches!(self, Family::CA | Family::CI | Family::E | Family::EComb)
    }

    pub fn is_permutation(self) -> bool {
        matches!(self, Family::P | Family::RP | Family::SPS)
    }
}

const FAMILIES_BY_POS: &[(Pos, &[Family])] = &[
    (Pos::Adj, &[Family::CA, Family::CI, Family::S, Family::A, Family::E, Family::P, Family::B]),
    (
        Pos::Noun,
        &[Family::E, Family::HE, Family::HO, Family::P, Family::RP, Family::SPS, Family::B],
    ),
    (
        Pos::Verb,
        &[Family::E, Family::EComb, Family::HE, Family::HO, Family::A, Family::P, Family::B],
    ),
    (Pos::Adp, &[Family::E, Family::B]),
];

const SINGLE_FAMILIES: &[Family] = &[Family::CA, Family::CI, Family::A, Family::E, Family::B];

/// A validated intervention code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InterventionCode {
    pub pos: Pos,
    pub family: Family,
    /// `SG-` variant: edit exactly one token.
    pub single: bool,
    /// `-sing` variant: only singular nouns are eligible.
    pub singular_only: bool,
}

impl InterventionCode {
    fn validate(self) -> Option<Self> {
        let allowed = FAMILIES_BY_POS.iter().find(|(p, _)| *p == self.pos)?.1;
        if !allowed.contains(&self.family) {
            return None;
        }
        if self.single && (self.singular_only || !SINGLE_FAMILIES.contains(&self.family)) {
            return None;
        }
        if self.singular_only && !(self.pos == Pos::Noun && matches!(self.family, Family::E | Family::B)) {
            return None;
        }
        Some(self)
    }

    /// Every valid code, in catalogue order.
    pub fn all() -> Vec<InterventionCode> {
        let mut out = Vec::new();
        for (pos, families) in FAMILIES_BY_POS {
            for &family in *families {
                for (single, singular_only) in [(false, false), (false, true), (true, false)] {
                    let c = InterventionCode {
                        pos: *pos,
                        family,
                        single,
                        singular_only,
                    };
                    if let Some(c) = c.validate() {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    /// The map-sharing code: SG and -sing variants use the plain code's map.
    pub fn map_key(self) -> InterventionCode {
        InterventionCode {
            single: false,
            singular_only: false,
            ..self
        }
    }

    /// True when edits need a dataset-level substitution map.
    pub fn needs_map(self) -> bool {
        self.family.uses_map() && self.pos != Pos::Adp
    }
}

impl fmt::Display for InterventionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-", self.pos.as_str())?;
        if self.single {
            f.write_str("SG-")?;
        }
        f.write_str(self.family.as_str())?;
        if self.singular_only {
            f.write_str("-sing")?;
        }
        Ok(())
    }
}

impl FromStr for InterventionCode {
    type Err = InterventionError;

    /// Accepts `POS-[SG-]FAMILY[-sing]` as well as `SG-POS-FAMILY`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || InterventionError::UnknownCode(s.to_string());
        let mut rest = s.trim();
        let mut single = false;
        if let Some(r) = rest.strip_prefix("SG-") {
            single = true;
            rest = r;
        }
        let (pos, mut rest) = rest.split_once('-').ok_or_else(unknown)?;
        let pos: Pos = pos.parse().map_err(|_| unknown())?;
        if let Some(r) = rest.strip_prefix("SG-") {
            if single {
                return Err(unknown());
            }
            single = true;
            rest = r;
        }
        let (family, singular_only) = match rest.strip_suffix("-sing") {
            Some(f) => (f, true),
            None => (rest, false),
        };
        let family = Family::parse(family).ok_or_else(unknown)?;
        InterventionCode {
            pos,
            family,
            single,
            singular_only,
        }
        .validate()
        .ok_or_else(unknown)
    }
}

impl Serialize for InterventionCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InterventionCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scope {
    All,
    Single,
}

/// How a single-token code picks its token.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleChoice {
    /// Lowest-index eligible token.
    #[default]
    First,
    /// Seeded uniform draw among eligible tokens.
    Seeded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterventionSpec {
    pub code: InterventionCode,
    pub seed: u64,
    pub scope: Scope,
    #[serde(default)]
    pub single_choice: SingleChoice,
}

impl InterventionSpec {
    /// Spec with the scope implied by the code.
    pub fn new(code: InterventionCode, seed: u64) -> Self {
        InterventionSpec {
            code,
            seed,
            scope: if code.single { Scope::Single } else { Scope::All },
            single_choice: SingleChoice::First,
        }
    }

    pub fn with_single_choice(mut self, choice: SingleChoice) -> Self {
        self.single_choice = choice;
        self
    }

    pub fn validate(&self) -> Result<(), InterventionError> {
        if self.code.single != (self.scope == Scope::Single) {
            return Err(InterventionError::Scope(self.code));
        }
        Ok(())
    }
}

/// Per-query seed: stable across platforms and independent of processing order.
pub fn query_seed(seed: u64, query_id: &str, stream: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stream.to_le_bytes());
    h.update(query_id.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
