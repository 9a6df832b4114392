//! Property checks shared by the per-module tests and the acceptance
//! target. Each one panics with a description on the first violation and
//! otherwise returns a short summary of what it covered.

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use contrastive_edits::corpus::{Dataset, Number, Query};
use contrastive_edits::interventions::{edit_dataset, generate_edit, EditBatch, EditResources, Family, InterventionCode, InterventionSpec, Scope};
use contrastive_edits::lexicon::Pos;
use contrastive_edits::matching::{brute_force_matching, min_weight_matching, BipartiteConceptGraph, Matching};
use contrastive_edits::report::{self, AceReport, ExperimentConfig, Format, Inputs};
use contrastive_edits::retrieval::{ace, rank_all, AceError, CorpusIndex, EmbeddingVector, Task};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracles::{random_graph, random_vectors, PathOracle};
use super::{colors, gold_dataset, repo_path, wordnet};

// ---- matching ----

/// Every pair is an edge, every target is used at most once, and the
/// pair list plus the unmatched list partition the sources.
pub fn assert_feasible(g: &BipartiteConceptGraph, m: &Matching) {
    let mut used = HashSet::new();
    let mut matched = HashSet::new();
    for p in &m.pairs {
        assert_eq!(g.weight(p.source_index, p.target_index), Some(p.weight), "pair {p:?} is not an edge");
        assert!(used.insert(p.target_index), "target {} used twice", p.target_index);
        assert!(matched.insert(p.source_index), "source {} matched twice", p.source_index);
    }
    let names: HashSet<&String> = m.pairs.iter().map(|p| &p.source).collect();
    assert!(m.unmatched_sources.iter().all(|s| !names.contains(s)));
    assert_eq!(m.pairs.len() + m.unmatched_sources.len(), g.sources().len());
}

/// Cost, cover and tie-broken assignment all equal the exhaustive search.
pub fn assert_matches_oracle(g: &BipartiteConceptGraph) {
    let fast = min_weight_matching(g);
    let slow = brute_force_matching(g).unwrap();
    assert_feasible(g, &fast);
    assert_eq!(fast.matched_count(), slow.matched_count(), "cover differs on {g:?}");
    assert_eq!(fast.total_weight, slow.total_weight, "cost differs on {g:?}");
    let n = g.sources().len();
    assert_eq!(fast.assignment(n), slow.assignment(n), "tie-break differs on {g:?}");
}

/// Seeded random instances with up to `max` sources and targets.
pub fn small_instances(count: usize, max: usize, dropout: f64, seed: u64) -> Vec<BipartiteConceptGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max);
            let m = rng.gen_range(1..=max);
            random_graph(&mut rng, n, m, dropout, None)
        })
        .collect()
}

/// Solves each instance, checking cost, cover and feasibility against the
/// exhaustive search; returns the elapsed time of the whole batch.
pub fn matching_optimality(instances: &[BipartiteConceptGraph]) -> Duration {
    let start = Instant::now();
    for g in instances {
        assert_matches_oracle(g);
    }
    start.elapsed()
}

/// Only the structural constraints and the maximum cover.
pub fn matching_constraints(instances: &[BipartiteConceptGraph]) -> usize {
    let mut pairs = 0;
    for g in instances {
        let m = min_weight_matching(g);
        assert_feasible(g, &m);
        let best = brute_force_matching(g).unwrap();
        assert_eq!(m.matched_count(), best.matched_count(), "not a maximum cover on {g:?}");
        pairs += m.pairs.len();
    }
    pairs
}

/// Dense `n x n` instance against `trials` random permutations.
pub fn matching_scale(n: usize, trials: usize, seed: u64) -> (Duration, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(&mut rng, n, n, 0.0, None);
    let start = Instant::now();
    let m = min_weight_matching(&g);
    let elapsed = start.elapsed();
    assert_feasible(&g, &m);
    assert_eq!(m.matched_count(), n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best_random = f64::INFINITY;
    for _ in 0..trials {
        perm.shuffle(&mut rng);
        let cost: f64 = perm.iter().enumerate().map(|(s, &t)| g.weight(s, t).unwrap()).sum();
        assert!(m.total_weight <= cost, "random assignment {cost} beats {}", m.total_weight);
        best_random = best_random.min(cost);
    }
    (elapsed, m.total_weight, best_random)
}

// ---- lexicon ----

pub fn lexicon_fixtures() {
    let lex = wordnet();
    assert_eq!(lex.antonym_of("young", Pos::Adj), Some("old"));
    assert_eq!(lex.antonym_of("crowded", Pos::Adj), Some("uncrowded"));
    assert_eq!(lex.hypernym_of("dog", Pos::Noun), Some("canine"));
    assert_eq!(lex.hypernym_of("pavement", Pos::Noun), Some("paved surface"));
    let first = lex.senses("dog", Pos::Noun)[0];
    let hypo = lex.synset(first).hyponyms[0];
    assert!(lex.synset(hypo).lemmas.iter().any(|l| l == "basenji"));
    assert_eq!(lex.hyponym_of("dog", Pos::Noun), Some("basenji"));
}

/// `pairs` random noun pairs: symmetry, range, self-similarity, batch
/// agreement and agreement with [`PathOracle`].
pub fn path_similarity_sample(pairs: usize, seed: u64) {
    let lex = wordnet();
    let oracle = PathOracle::new(lex);
    let nouns = lex.lemmas(Pos::Noun);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..pairs {
        let a = *nouns.choose(&mut rng).unwrap();
        let b = *nouns.choose(&mut rng).unwrap();
        let got = lex.path_similarity(a, b, Pos::Noun).expect("nouns share a root");
        assert!(got > 0.0 && got <= 1.0, "{a} {b}: {got}");
        assert_eq!(got, lex.path_similarity(b, a, Pos::Noun).unwrap(), "asymmetric: {a} {b}");
        assert_eq!(lex.path_similarity(a, a, Pos::Noun), Some(1.0));
        let want = oracle.similarity(lex, a, b, Pos::Noun).unwrap();
        assert!((got - want).abs() <= 1e-12, "{a} {b}: {got} vs {want}");
        assert_eq!(lex.path_similarities(a, &[b], Pos::Noun), vec![Some(got)]);
    }
}

// ---- interventions ----

pub fn run_code(d: &Dataset, code: &str, seed: u64) -> EditBatch {
    let code: InterventionCode = code.parse().unwrap();
    edit_dataset(d, &InterventionSpec::new(code, seed), wordnet(), colors()).unwrap()
}

fn sorted_words(s: &str) -> Vec<&str> {
    let mut w: Vec<&str> = s.split_whitespace().collect();
    w.sort_unstable();
    w
}

fn by_id(d: &Dataset) -> BTreeMap<&str, &Query> {
    d.queries.iter().map(|q| (q.id.as_str(), q)).collect()
}

pub fn reference_edit_rows() {
    let d = gold_dataset();
    let text = |code: &str, id: &str| {
        let b = run_code(&d, code, 0);
        b.edits.iter().find(|e| e.query_id == id).unwrap().edited_text.clone()
    };
    assert_eq!(text("ADJ-S", "s03#0"), "a big girl in a pink dress going into a wooden cabin");
    assert_eq!(text("NOUN-HE", "s00#0"), "two canine on paved surface moving toward each other");
    assert_eq!(text("NOUN-HO", "s00#0"), "two basenji on curbside moving toward each other");
    assert_eq!(text("NOUN-SPS", "s01#0"), "the ears with pierced man is wearing hat and an orange glasses");
    assert_eq!(
        text("ADP-B", "s02#0"),
        "the boy the blue shirt is swinging a baseball bat a ball the boy the red helmet waits to catch him out"
    );
    assert_eq!(text("NOUN-B", "s00#0"), "two on moving toward each other");
    assert_eq!(text("NOUN-B-sing", "s00#0"), "two dogs on moving toward each other");
    assert_eq!(text("ADJ-A", "s04#0"), "several old people sitting on a rail above a uncrowded beach");
}

/// Same seed, same batch; `n_perturbed == 0` exactly when the text is
/// unchanged; substitutions record the original lemma. Returns the number
/// of codes covered.
pub fn deterministic_and_counted() -> usize {
    let d = gold_dataset();
    let queries = by_id(&d);
    let codes = InterventionCode::all();
    for &code in &codes {
        let a = run_code(&d, &code.to_string(), 42);
        let b = run_code(&d, &code.to_string(), 42);
        assert_eq!(a, b, "{code}: not reproducible");
        assert_eq!(a.edits.len(), d.queries.len());
        assert_eq!(a.total_n, a.edits.iter().map(|e| e.n_perturbed).sum::<usize>());
        for e in &a.edits {
            let q = queries[e.query_id.as_str()];
            assert_eq!(e.n_perturbed == 0, e.edited_text == q.text, "{code} {}: n={} `{}`", e.query_id, e.n_perturbed, e.edited_text);
            if code.single {
                assert!(e.n_perturbed <= 1, "{code}: {} edits", e.n_perturbed);
            }
            for s in &e.substitutions {
                assert_eq!(q.tokens[s.index].lemma, s.old, "{code}");
            }
        }
    }
    codes.len()
}

pub fn permutations_preserve_multiset() {
    let d = gold_dataset();
    let queries = by_id(&d);
    for code in InterventionCode::all().into_iter().filter(|c| c.family.is_permutation()) {
        for seed in 0..5 {
            for e in run_code(&d, &code.to_string(), seed).edits {
                let q = queries[e.query_id.as_str()];
                assert_eq!(sorted_words(&e.edited_text), sorted_words(&q.text), "{code} seed {seed}");
            }
        }
    }
}

pub fn noun_permutation_keeps_number() {
    let d = gold_dataset();
    let queries = by_id(&d);
    let mut moved = 0;
    for seed in 0..10 {
        for e in run_code(&d, "NOUN-P", seed).edits {
            let q = queries[e.query_id.as_str()];
            for s in &e.substitutions {
                let new = s.new.as_deref().unwrap();
                let number = q.tokens[s.index].number;
                assert!(
                    q.tokens.iter().any(|t| t.pos == Some(Pos::Noun) && t.lemma == new && t.number == number),
                    "{}: `{new}` moved into a {number:?} slot",
                    e.query_id
                );
                moved += 1;
            }
        }
    }
    assert!(moved > 0);
}

pub fn singular_plural_swap_crosses_number() {
    let d = gold_dataset();
    let queries = by_id(&d);
    for e in run_code(&d, "NOUN-SPS", 0).edits {
        let q = queries[e.query_id.as_str()];
        for s in &e.substitutions {
            let was = q.tokens[s.index].number;
            let src = q.tokens.iter().find(|t| Some(&t.lemma) == s.new.as_ref() && t.pos == Some(Pos::Noun)).unwrap();
            assert_ne!(src.number, was);
            assert_ne!(was, Number::NotApplicable);
        }
    }
}

pub fn map_edits_injective() {
    let d = gold_dataset();
    let queries = by_id(&d);
    let mut checked = 0;
    for code in InterventionCode::all().into_iter().filter(|c| c.needs_map() && !c.single) {
        let batch = run_code(&d, &code.to_string(), 0);
        let map = batch.map.as_ref().unwrap();
        for g in &map.groups {
            let targets: HashSet<&String> = g.mapping.values().collect();
            assert_eq!(targets.len(), g.mapping.len(), "{code}: map is not injective");
            assert!(g.mapping.iter().all(|(s, t)| s != t), "{code}: fixed point in map");
            checked += g.mapping.len();
        }
        for e in &batch.edits {
            let q = queries[e.query_id.as_str()];
            let mut seen: BTreeMap<String, String> = BTreeMap::new();
            for s in &e.substitutions {
                let src = q.tokens[s.index].lemma.clone();
                let new = s.new.clone().unwrap();
                if let Some(prev) = seen.insert(new.clone(), src.clone()) {
                    assert_eq!(prev, src, "{code}: two sources edited into `{new}`");
                }
            }
        }
    }
    assert!(checked > 0);
}

pub fn deletion_idempotent() {
    let d = gold_dataset();
    let lex = wordnet();
    for code in InterventionCode::all().into_iter().filter(|c| c.family == Family::B) {
        let spec = InterventionSpec::new(code, 0);
        if spec.scope == Scope::Single {
            continue;
        }
        let batch = edit_dataset(&d, &spec, lex, colors()).unwrap();
        for (q, e) in d.queries.iter().zip(&batch.edits) {
            assert!(e.substitutions.iter().all(|s| s.new.is_none()));
            let deleted: HashSet<usize> = e.substitutions.iter().map(|s| s.index).collect();
            let mut tokens: Vec<_> = q.tokens.iter().filter(|t| !deleted.contains(&t.index)).cloned().collect();
            for (i, t) in tokens.iter_mut().enumerate() {
                t.index = i;
            }
            let reduced = Query::new(q.id.clone(), q.image_id.clone(), tokens);
            assert_eq!(reduced.text, e.edited_text);
            let res = EditResources { lexicon: lex, map: None };
            let again = generate_edit(&reduced, &spec, &res).unwrap();
            assert_eq!(again.n_perturbed, 0, "{code}: second pass edits `{}`", again.edited_text);
        }
    }
}

pub fn seeds_change_draws() {
    let d = gold_dataset();
    for code in ["NOUN-P", "ADP-E", "NOUN-RP"] {
        let texts = |seed| run_code(&d, code, seed).edits.into_iter().map(|e| e.edited_text).collect::<Vec<_>>();
        assert_ne!(texts(1), texts(2), "{code}");
    }
}

// ---- ACE ----

pub fn ace_arithmetic() {
    assert_eq!(ace(0.5, 0.4, 1000, 100_000).unwrap().value, 20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let o = rng.gen_range(0.0001..=1.0);
        let n = rng.gen_range(1..100_000);
        let scale = 10u64.pow(rng.gen_range(0..=9));
        assert_eq!(ace(o, o, n, scale).unwrap().value, 0.0);
    }
    assert!(matches!(ace(0.0, 0.3, 10, 100_000), Err(AceError::ZeroDefault)));
    assert!(matches!(ace(0.5, 0.4, 0, 100_000), Err(AceError::NoPerturbation)));
    assert!(matches!(ace(0.5, 0.5, 0, 100_000), Err(AceError::NoPerturbation)));
}

// ---- retrieval ----

/// Ranks are unchanged when every query and corpus vector is multiplied by
/// the same positive factor. Returns the number of rank lists compared.
pub fn cosine_invariance(seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus = random_vectors(&mut rng, 200, 16, "c");
    let queries = random_vectors(&mut rng, 50, 16, "q");
    let scaled = |vs: &[EmbeddingVector], f: f32| -> Vec<EmbeddingVector> {
        vs.iter()
            .map(|v| EmbeddingVector::new(v.id.clone(), v.values.iter().map(|x| x * f).collect()))
            .collect()
    };
    let base = rank_all(&queries, &CorpusIndex::new(corpus.clone()).unwrap()).unwrap();
    let mut compared = 0;
    for f in [7.3f32, 0.25, 1e3, 3e-2] {
        let other = rank_all(&scaled(&queries, f), &CorpusIndex::new(scaled(&corpus, f)).unwrap()).unwrap();
        assert_eq!(base, other, "factor {f}");
        compared += other.len();
    }
    compared
}

/// The toy experiment restricted to LR, run in a fresh output directory
/// on a dedicated pool of `threads` workers.
pub fn toy_lr_report(threads: usize) -> AceReport {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(repo_path("fixtures/toy_experiment.toml")).unwrap();
    cfg.output_dir = dir.path().to_path_buf();
    cfg.tasks = vec![Task::Lr];
    let inputs = Inputs::load(&cfg).unwrap();
    assert_eq!(inputs.dataset.image_corpus.len(), 10);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| report::run(&cfg, &inputs)).unwrap()
}

/// Serialized rows plus both renderings, for byte comparison.
pub fn report_bytes(r: &AceReport) -> String {
    format!(
        "{}\n{}\n{}",
        serde_json::to_string(&r.rows).unwrap(),
        r.render(Format::Markdown).unwrap(),
        r.render(Format::Csv).unwrap()
    )
}

