//! Lexicon-driven baseline POS tagger.
//!
//! Closed-class words come from fixed lists. Open-class words are looked up
//! in the lexicon and disambiguated with a handful of local context rules;
//! when no rule fires the priority is NOUN > VERB > ADJ. Words with no
//! lexicon entry get no POS and are never edited.

use super::{Number, Token};
use crate::lexicon::{Lexicon, Pos, VerbForm};

/// Closed adposition list. Also the draw pool for random adposition edits.
pub const ADPOSITIONS: &[&str] = &[
    "about", "above", "across", "after", "against", "along", "alongside", "amid", "among",
    "around", "as", "at", "atop", "because", "before", "behind", "below", "beneath", "beside",
    "besides", "between", "beyond", "by", "despite", "down", "during", "except", "for", "from",
    "if", "in", "inside", "into", "like", "near", "of", "off", "on", "onto", "opposite",
    "outside", "over", "past", "per", "since", "than", "through", "throughout", "toward",
    "towards", "under", "underneath", "unlike", "until", "upon", "via", "while", "whilst",
    "with", "within", "without",
];

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "some", "any", "each", "every",
    "another", "no", "all", "both", "several", "many", "few", "much", "more", "most", "other",
    "such", "either", "neither", "its", "his", "her", "their", "our", "my", "your", "whose",
    "which", "what",
];

const PRONOUNS: &[&str] = &[
    "he", "she", "it", "they", "him", "them", "i", "me", "we", "us", "you", "who", "whom",
    "someone", "somebody", "something", "everyone", "everybody", "anyone", "nobody", "himself",
    "herself", "themselves", "itself", "myself", "yourself", "ourselves",
];

const NUMERALS: &[&str] = &[
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty", "thirty", "forty", "fifty", "hundred", "dozen",
];

const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor", "so", "yet", "then", "when", "where", "whether", "although", "though"];

const PARTICLES: &[&str] = &["to", "not", "n't", "out", "up", "away", "'s"];

const ADVERBS: &[&str] = &[
    "very", "also", "just", "together", "there", "here", "almost", "nearly", "too", "still",
    "quite", "only", "really", "outdoors", "indoors", "nearby", "downhill", "uphill", "back",
    "again", "currently", "closely", "how", "why", "even", "ever", "never",
];

/// Auxiliary and modal verbs: tagged VERB directly, with a fixed lemma and form.
const AUXILIARIES: &[(&str, &str, Option<VerbForm>)] = &[
    ("is", "be", Some(VerbForm::ThirdSingular)),
    ("are", "be", Some(VerbForm::Base)),
    ("am", "be", Some(VerbForm::Base)),
    ("was", "be", Some(VerbForm::Past)),
    ("were", "be", Some(VerbForm::Past)),
    ("be", "be", Some(VerbForm::Base)),
    ("been", "be", Some(VerbForm::PastParticiple)),
    ("being", "be", Some(VerbForm::Gerund)),
    ("has", "have", Some(VerbForm::ThirdSingular)),
    ("have", "have", Some(VerbForm::Base)),
    ("had", "have", Some(VerbForm::Past)),
    ("does", "do", Some(VerbForm::ThirdSingular)),
    ("do", "do", Some(VerbForm::Base)),
    ("did", "do", Some(VerbForm::Past)),
    ("can", "can", None),
    ("could", "could", None),
    ("will", "will", None),
    ("would", "would", None),
    ("shall", "shall", None),
    ("should", "should", None),
    ("may", "may", None),
    ("might", "might", None),
    ("must", "must", None),
];

/// Irregular plurals whose surface form is itself an indexed noun.
const PLURAL_ONLY: &[&str] = &["people", "police", "cattle", "clothes"];

const PUNCTUATION: &[char] = &['.', ',', '!', '?', ';', ':', '"', '(', ')', '[', ']'];

/// Splits on whitespace and detaches leading/trailing punctuation into
/// separate tokens. Hyphenated words stay whole.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut w = word;
        let mut lead = Vec::new();
        while let Some(c) = w.chars().next().filter(|c| PUNCTUATION.contains(c)) {
            lead.push(c.to_string());
            w = &w[c.len_utf8()..];
        }
        let mut trail = Vec::new();
        while let Some(c) = w.chars().last().filter(|c| PUNCTUATION.contains(c)) {
            trail.push(c.to_string());
            w = &w[..w.len() - c.len_utf8()];
        }
        out.extend(lead);
        if !w.is_empty() {
            out.push(w.to_string());
        }
        out.extend(trail.into_iter().rev());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Closed {
    Adp,
    Det,
    Pron,
    Num,
    Conj,
    Part,
    Adv,
    Aux,
    Punct,
}

fn closed_class(word: &str) -> Option<Closed> {
    let contains = |list: &[&str]| list.contains(&word);
    if word.chars().all(|c| PUNCTUATION.contains(&c)) {
        Some(Closed::Punct)
    } else if contains(ADPOSITIONS) {
        Some(Closed::Adp)
    } else if contains(DETERMINERS) {
        Some(Closed::Det)
    } else if contains(PRONOUNS) {
        Some(Closed::Pron)
    } else if contains(NUMERALS) || word.chars().all(|c| c.is_ascii_digit()) {
        Some(Closed::Num)
    } else if contains(CONJUNCTIONS) {
        Some(Closed::Conj)
    } else if contains(PARTICLES) {
        Some(Closed::Part)
    } else if contains(ADVERBS) {
        Some(Closed::Adv)
    } else if AUXILIARIES.iter().any(|(w, _, _)| *w == word) {
        Some(Closed::Aux)
    } else {
        None
    }
}

#[derive(Clone, Debug, Default)]
struct Candidates {
    noun: Vec<String>,
    verb: Vec<String>,
    adj: Vec<String>,
}

impl Candidates {
    fn is_empty(&self) -> bool {
        self.noun.is_empty() && self.verb.is_empty() && self.adj.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Closed(Closed),
    Open,
    Unknown,
}

/// Baseline tagger bound to a lexicon.
#[derive(Clone, Copy, Debug)]
pub struct Tagger<'a> {
    lex: &'a Lexicon,
}

impl<'a> Tagger<'a> {
    pub fn new(lex: &'a Lexicon) -> Self {
        Tagger { lex }
    }

    pub fn lexicon(&self) -> &'a Lexicon {
        self.lex
    }

    /// Chooses the base form with the most senses, keeping source order on ties.
    fn best_base(&self, forms: &[String], pos: Pos) -> Option<String> {
        let mut best: Option<(&String, usize)> = None;
        for f in forms {
            let n = self.lex.senses(f, pos).len();
            if best.is_none_or(|(_, m)| n > m) {
                best = Some((f, n));
            }
        }
        best.map(|(f, _)| f.clone())
    }

    /// Lemma and grammatical number of a surface tagged as a noun.
    pub fn noun_lemma(&self, surface: &str) -> (String, Number) {
        let lower = surface.to_lowercase();
        if PLURAL_ONLY.contains(&lower.as_str()) {
            return (lower, Number::Plural);
        }
        let forms = self.lex.base_forms(&lower, Pos::Noun);
        let key = crate::lexicon::lemma_key(&lower);
        // A distinct stem marks a plural unless the surface is itself the
        // better-attested noun ("gas" is not the plural of "ga").
        let own_senses = self.lex.senses(&key, Pos::Noun).len();
        let stem = forms
            .iter()
            .filter(|f| **f != key)
            .find(|f| own_senses == 0 || self.lex.senses(f, Pos::Noun).len() >= own_senses);
        if let Some(stem) = stem {
            return (crate::lexicon::display_lemma(stem), Number::Plural);
        }
        let lemma = forms.first().map(|f| crate::lexicon::display_lemma(f)).unwrap_or(lower);
        (lemma, Number::Singular)
    }

    /// Lemma for a surface under a non-noun POS; falls back to the lowercased surface.
    pub fn lemma_for(&self, surface: &str, pos: Pos) -> String {
        let lower = surface.to_lowercase();
        match pos {
            Pos::Noun => self.noun_lemma(surface).0,
            Pos::Adp => lower,
            _ => {
                if let Some((_, lemma, _)) = AUXILIARIES.iter().find(|(w, _, _)| *w == lower) {
                    return lemma.to_string();
                }
                let forms = self.lex.base_forms(&lower, pos);
                self.best_base(&forms, pos)
                    .map(|f| crate::lexicon::display_lemma(&f))
                    .unwrap_or(lower)
            }
        }
    }

    fn verb_form(surface: &str, lemma: &str, after_aux: Option<&str>) -> VerbForm {
        let s = surface.to_lowercase();
        let perfect_or_passive = matches!(
            after_aux,
            Some("is" | "are" | "was" | "were" | "be" | "been" | "being" | "am" | "has" | "have" | "had")
        );
        if s.ends_with("ing") && s != lemma {
            VerbForm::Gerund
        } else if s.ends_with("ed") || (s != lemma && !s.ends_with('s')) {
            if perfect_or_passive {
                VerbForm::PastParticiple
            } else {
                VerbForm::Past
            }
        } else if s.ends_with('s') && s != lemma {
            VerbForm::ThirdSingular
        } else {
            VerbForm::Base
        }
    }

    /// Tags a text into tokens. Deterministic for a given lexicon.
    pub fn tag(&self, text: &str) -> Vec<Token> {
        let words = tokenize(text);
        let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
        let slots: Vec<Slot> = lower
            .iter()
            .map(|w| match closed_class(w) {
                Some(c) => Slot::Closed(c),
                None => Slot::Open,
            })
            .collect();
        let cands: Vec<Candidates> = lower
            .iter()
            .zip(&slots)
            .map(|(w, slot)| {
                if *slot != Slot::Open {
                    return Candidates::default();
                }
                Candidates {
                    noun: self.lex.base_forms(w, Pos::Noun),
                    verb: self.lex.base_forms(w, Pos::Verb),
                    adj: self.lex.base_forms(w, Pos::Adj),
                }
            })
            .collect();
        let slots: Vec<Slot> = slots
            .into_iter()
            .zip(&cands)
            .map(|(s, c)| if s == Slot::Open && c.is_empty() { Slot::Unknown } else { s })
            .collect();

        // noun_ahead[i]: the words after i continue an adjective chain that ends in a noun.
        let n = words.len();
        let mut noun_ahead = vec![false; n + 1];
        for i in (0..n).rev() {
            let next_noun = i + 1 < n
                && slots[i + 1] == Slot::Open
                && !cands[i + 1].noun.is_empty()
                // A noun-capable word followed by an -ing verb usually ends
                // its own phrase ("a dress going into").
                && !(lower[i + 1].ends_with("ing") && !cands[i + 1].verb.is_empty() && !cands[i].noun.is_empty());
            let next_adj_chain = i + 1 < n
                && slots[i + 1] == Slot::Open
                && !cands[i + 1].adj.is_empty()
                && noun_ahead[i + 1];
            noun_ahead[i] = next_noun || next_adj_chain;
        }

        let mut tags: Vec<Option<Pos>> = vec![None; n];
        let mut numbers: Vec<Number> = vec![Number::NotApplicable; n];
        let mut tokens = Vec::with_capacity(n);
        for i in 0..n {
            let w = lower[i].as_str();
            let prev_word = i.checked_sub(1).map(|j| lower[j].as_str());
            let prev_slot = i.checked_sub(1).map(|j| slots[j]);
            let prev_tag = i.checked_sub(1).and_then(|j| tags[j]);
            let next_slot = slots.get(i + 1).copied();
            let c = &cands[i];

            let pos = match slots[i] {
                Slot::Closed(Closed::Adp) => Some(Pos::Adp),
                Slot::Closed(Closed::Aux) => Some(Pos::Verb),
                Slot::Closed(_) | Slot::Unknown => None,
                Slot::Open => Some(self.choose(ChoiceCtx {
                    word: w,
                    cands: c,
                    prev_word,
                    prev_slot,
                    prev_tag,
                    next_slot,
                    next_is_noun: i + 1 < n && slots[i + 1] == Slot::Open && !cands[i + 1].noun.is_empty(),
                    next_is_verb: i + 1 < n && slots[i + 1] == Slot::Open && !cands[i + 1].verb.is_empty(),
                    noun_ahead: noun_ahead[i],
                    prev_singular_noun: i > 0 && tags[i - 1] == Some(Pos::Noun) && numbers[i - 1] == Number::Singular,
                    coordinated_adj: i + 2 < n
                        && matches!(lower[i + 1].as_str(), "and" | "or")
                        && slots[i + 2] == Slot::Open
                        && !cands[i + 2].adj.is_empty()
                        && noun_ahead[i + 2],
                })),
            };
            tags[i] = pos;

            let (lemma, number) = match pos {
                Some(Pos::Noun) => self.noun_lemma(&words[i]),
                Some(p) => (self.lemma_for(&words[i], p), Number::NotApplicable),
                None => (w.to_string(), Number::NotApplicable),
            };
            numbers[i] = number;
            let verb_form = match (pos, slots[i]) {
                (Some(Pos::Verb), Slot::Closed(Closed::Aux)) => {
                    AUXILIARIES.iter().find(|(a, _, _)| *a == w).and_then(|(_, _, f)| *f)
                }
                (Some(Pos::Verb), _) => Some(Self::verb_form(w, &lemma, prev_word)),
                _ => None,
            };
            tokens.push(Token {
                surface: words[i].clone(),
                lemma,
                pos,
                verb_form,
                number,
                index: i,
            });
        }
        tokens
    }

    fn choose(&self, ctx: ChoiceCtx<'_>) -> Pos {
        let c = ctx.cands;
        let (has_n, has_v, has_a) = (!c.noun.is_empty(), !c.verb.is_empty(), !c.adj.is_empty());
        let count = usize::from(has_n) + usize::from(has_v) + usize::from(has_a);
        if count == 1 {
            return if has_n {
                Pos::Noun
            } else if has_v {
                Pos::Verb
            } else {
                Pos::Adj
            };
        }
        let w = ctx.word;
        let prev_det = matches!(ctx.prev_slot, Some(Slot::Closed(Closed::Det | Closed::Num)));
        let prev_modifier = prev_det || ctx.prev_tag == Some(Pos::Adj);

        if has_v && w.ends_with("ing") {
            if prev_modifier && !ctx.noun_ahead {
                return if has_n { Pos::Noun } else { Pos::Adj };
            }
            return Pos::Verb;
        }
        if has_v && w.ends_with("ed") {
            if has_a && (prev_modifier || ctx.noun_ahead) && !ctx.next_closed(Closed::Adp) {
                return Pos::Adj;
            }
            return Pos::Verb;
        }
        if has_v && matches!(ctx.prev_word, Some("to")) {
            return Pos::Verb;
        }
        if has_v
            && matches!(
                ctx.prev_slot,
                Some(Slot::Closed(Closed::Pron | Closed::Aux))
            )
            && !matches!(ctx.prev_word, Some("is" | "are" | "was" | "were" | "be" | "been" | "being" | "am"))
        {
            return Pos::Verb;
        }
        if has_a && (ctx.noun_ahead || ctx.coordinated_adj) {
            return Pos::Adj;
        }
        if has_a && matches!(ctx.prev_word, Some("is" | "are" | "was" | "were" | "be" | "been" | "being" | "am" | "very")) {
            return Pos::Adj;
        }
        if prev_modifier {
            return if has_n { Pos::Noun } else { Pos::Adj };
        }
        if has_v && ctx.prev_singular_noun {
            // Present-tense captions: a verb after a singular subject carries -s.
            if !w.ends_with('s') && c.verb.iter().any(|v| v == w) {
                return if has_n { Pos::Noun } else { Pos::Adj };
            }
            let object_follows = matches!(ctx.next_slot, Some(Slot::Closed(Closed::Det | Closed::Num | Closed::Pron)))
                || (ctx.next_is_noun && !ctx.next_is_verb);
            if object_follows {
                return Pos::Verb;
            }
        }
        if has_v && ctx.prev_tag == Some(Pos::Noun) {
            let clause_follows = matches!(
                ctx.next_slot,
                None | Some(Slot::Closed(
                    Closed::Adp | Closed::Det | Closed::Part | Closed::Punct | Closed::Adv | Closed::Pron | Closed::Conj | Closed::Num
                ))
            );
            if clause_follows && !ctx.next_is_noun {
                return Pos::Verb;
            }
        }
        if has_n {
            Pos::Noun
        } else if has_v {
            Pos::Verb
        } else {
            Pos::Adj
        }
    }
}

struct ChoiceCtx<'c> {
    word: &'c str,
    cands: &'c Candidates,
    prev_word: Option<&'c str>,
    prev_slot: Option<Slot>,
    prev_tag: Option<Pos>,
    next_slot: Option<Slot>,
    next_is_noun: bool,
    next_is_verb: bool,
    noun_ahead: bool,
    prev_singular_noun: bool,
    // "black and white cat": an adjective coordinated before a noun phrase.
    coordinated_adj: bool,
}

impl ChoiceCtx<'_> {
    fn next_closed(&self, class: Closed) -> bool {
        self.next_slot == Some(Slot::Closed(class))
    }
}
