//! Library results checked against independent brute-force oracles.

mod common;

use std::collections::BTreeSet;

use dsqe::corpus::{tokenize, DisciplineMap, StopwordSet};
use dsqe::evaluation::{aggregate, evaluate_topic, paired_t_test, student_t_two_tailed};
use dsqe::expansion::{classify_topic, Qrels};
use dsqe::index::{InvertedIndex, RankedEntry, RankedList, WeightedQuery};
use dsqe::recommender::{log_jaccard, RecommenderModel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

#[test]
fn tokenizer_matches_reference_on_punctuation() {
    let text = "C++-based, 2nd-gen systems";
    assert_eq!(tokenize(text, &StopwordSet::empty()).into_tokens(), naive_tokens(text));
    assert_eq!(naive_tokens(text), ["c", "based", "2nd", "gen", "systems"]);
}

#[test]
fn index_doc_freq_matches_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let corpus = random_corpus(&mut rng, 100);
    let index = InvertedIndex::build(&corpus, &StopwordSet::empty());
    for token in all_tokens(&corpus) {
        assert_eq!(index.doc_freq(&token), brute_df(&corpus, &token), "{token}");
    }
    assert_eq!(index.doc_count(), corpus.size());
}

#[test]
fn search_matches_quadratic_scorer() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let corpus = random_corpus(&mut rng, 50);
        let index = InvertedIndex::build(&corpus, &StopwordSet::empty());
        let k = rng.gen_range(1..=4);
        let picked: Vec<&str> = WORDS.choose_multiple(&mut rng, k).copied().collect();
        let terms: Vec<(&str, f64)> = picked
            .into_iter()
            .map(|w| (w, [1.0, 0.5, 0.25][rng.gen_range(0..3)]))
            .collect();
        let query = WeightedQuery::new(terms.iter().copied()).unwrap();
        let got = index.search("q", &query, 1000).unwrap();
        let want = brute_search(&corpus, &terms);
        assert_eq!(got.len(), want.len());
        for (e, (id, score)) in got.entries.iter().zip(&want) {
            assert!((e.score - score).abs() < 1e-9, "{} vs {}", e.score, score);
            // equal-within-rounding scores may order differently; compare ids only when clearly apart
            if want.iter().filter(|(_, s)| (s - score).abs() < 1e-12).count() == 1 {
                assert_eq!(&e.doc_id, id);
            }
        }
    }
}

#[test]
fn cooccurrence_matches_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let corpus = random_corpus(&mut rng, 50);
        let model = RecommenderModel::build("m", &corpus, &StopwordSet::empty()).unwrap();
        for token in all_tokens(&corpus) {
            assert_eq!(model.token_df(&token) as usize, brute_df(&corpus, &token));
            for d in DESCRIPTORS {
                let co = brute_cooccurrence(&corpus, &token, d);
                assert_eq!(model.cooccurrence(&token, d) as usize, co);
                let expected = if co == 0 {
                    0.0
                } else {
                    let (co, tdf, ddf) = (co as f64, brute_df(&corpus, &token) as f64, brute_descriptor_df(&corpus, d) as f64);
                    (co + 1.0).ln() * co / (tdf + ddf - co)
                };
                assert!((model.score(&token, d) - expected).abs() < 1e-12);
            }
        }
        for d in DESCRIPTORS {
            assert_eq!(model.descriptor_df(d) as usize, brute_descriptor_df(&corpus, d));
        }
    }
}

#[test]
fn recommend_matches_exhaustive_scoring() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..30 {
        let corpus = random_corpus(&mut rng, 40);
        let model = RecommenderModel::build("m", &corpus, &StopwordSet::empty()).unwrap();
        let k = rng.gen_range(1..=3);
        let words: Vec<&str> = WORDS.choose_multiple(&mut rng, k).copied().collect();
        let query = tokenize(&words.join(" "), &StopwordSet::empty());
        let mut want: Vec<(String, f64)> = corpus
            .descriptor_vocabulary()
            .map(|d| {
                let distinct: BTreeSet<&str> = words.iter().copied().collect();
                let s: f64 = distinct.iter().map(|t| model.score(t, d)).sum();
                (d.to_string(), s)
            })
            .filter(|(d, s)| *s > 0.0 && !words.contains(&d.to_lowercase().as_str()))
            .collect();
        want.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| a.0.to_lowercase().cmp(&b.0.to_lowercase()))
        });
        want.truncate(4);
        let got = model.recommend(&query, 4);
        assert_eq!(got.len(), want.len());
        for (g, (d, s)) in got.iter().zip(&want) {
            assert!((g.score - s).abs() < 1e-12);
            assert_eq!(&g.descriptor, d);
        }
    }
}

#[test]
fn micro_partition_values_from_brute_force() {
    let corpus = dsqe::corpus::Corpus::new(vec![
        dsqe::corpus::Document {
            id: "d1".into(),
            title: "bilingual education school".into(),
            abstract_text: String::new(),
            descriptors: vec!["Multilingualism".into(), "Child".into()],
            classifications: vec![],
        },
        dsqe::corpus::Document {
            id: "d2".into(),
            title: "bilingual children".into(),
            abstract_text: String::new(),
            descriptors: vec!["Multilingualism".into(), "Speech".into()],
            classifications: vec![],
        },
    ])
    .unwrap();
    assert_eq!(brute_cooccurrence(&corpus, "bilingual", "Multilingualism"), 2);
    assert_eq!(brute_df(&corpus, "bilingual"), 2);
    assert_eq!(brute_descriptor_df(&corpus, "Multilingualism"), 2);
    // hand evaluation: ln(3)·2/2 and ln(2)·1/2
    assert!((log_jaccard(2, 2, 2) - 1.098612).abs() < 1e-6);
    assert!((log_jaccard(1, 2, 1) - 0.346574).abs() < 1e-6);
    let model = RecommenderModel::build("m", &corpus, &StopwordSet::empty()).unwrap();
    let got = model.recommend(&tokenize("bilingual", &StopwordSet::empty()), 2);
    assert_eq!(got[0].descriptor, "Multilingualism");
    assert_eq!(got[1].descriptor, "Child");
}

fn random_ranking(rng: &mut ChaCha8Rng) -> (RankedList, Qrels, BTreeSet<String>, Vec<String>) {
    let pool = rng.gen_range(1..=100);
    let mut docs: Vec<String> = (0..pool).map(|i| format!("doc{i:03}")).collect();
    docs.shuffle(rng);
    let r = rng.gen_range(1..=20.min(pool));
    let relevant: BTreeSet<String> = docs.choose_multiple(rng, r).cloned().collect();
    let mut qrels = Qrels::new(1);
    for d in &relevant {
        qrels.insert("t", d, rng.gen_range(1..=3)).unwrap();
    }
    for d in docs.iter().filter(|d| !relevant.contains(*d)).take(5) {
        qrels.insert("t", d, 0).unwrap();
    }
    let depth = rng.gen_range(0..=pool);
    let ranked: Vec<String> = docs[..depth].to_vec();
    let list = RankedList {
        topic_id: "t".into(),
        entries: ranked
            .iter()
            .enumerate()
            .map(|(i, d)| RankedEntry {
                doc_id: d.clone(),
                score: (pool - i) as f64,
                rank: i + 1,
            })
            .collect(),
    };
    (list, qrels, relevant, ranked)
}

#[test]
fn metrics_match_brute_force_scorer() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..300 {
        let (list, qrels, relevant, ranked) = random_ranking(&mut rng);
        let got = evaluate_topic(&list, &qrels).unwrap().values();
        let want = brute_metrics(&ranked, &relevant);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn map_matches_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let per_topic: Vec<_> = (0..100)
        .map(|_| {
            let (list, qrels, ..) = random_ranking(&mut rng);
            evaluate_topic(&list, &qrels).unwrap()
        })
        .collect();
    let mut sum = 0.0;
    for m in &per_topic {
        sum += m.average_precision;
    }
    let agg = aggregate(&per_topic).unwrap();
    assert!((agg.map - sum / 100.0).abs() < 1e-12);
}

#[test]
fn classification_matches_group_count_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let map = DisciplineMap::new(3, PREFIXES.iter().map(|p| (*p, format!("D{p}")))).unwrap();
    for _ in 0..100 {
        let corpus = random_corpus(&mut rng, 60);
        let mut qrels = Qrels::new(1);
        let docs: Vec<_> = corpus.documents().iter().collect();
        let chosen: Vec<_> = docs.choose_multiple(&mut rng, 20.min(docs.len())).copied().collect();
        for d in &chosen {
            qrels.insert("t", &d.id, 1).unwrap();
        }
        let got = classify_topic("t", &qrels, &corpus, &map).ok().map(|c| c.prefix);
        assert_eq!(got, brute_classify(&chosen, &PREFIXES));
    }
}

#[test]
fn t_test_matches_reference_values() {
    // reference values from scipy.stats.ttest_rel
    let cases: [(&[f64], &[f64], f64, f64); 4] = [
        (&[0.0, 0.0, 0.0, 0.0], &[0.0, 0.1, 0.2, 0.1], 2.449489742783178, 0.09172111331157187),
        (&[0.155, 0.21, 0.4, 0.05, 0.3], &[0.159, 0.25, 0.38, 0.09, 0.33], 1.6036193057471095, 0.18406279023559066),
        (
            &[0.1, 0.5, 0.3, 0.9, 0.4, 0.2, 0.7, 0.6],
            &[0.2, 0.4, 0.6, 0.95, 0.41, 0.3, 0.72, 0.8],
            1.9611240665910805,
            0.09066940236248039,
        ),
        (&[0.31, 0.12], &[0.52, 0.18], 1.8, 0.32282893443419036),
    ];
    for (base, var, t, p) in cases {
        let r = paired_t_test("m", base, var).unwrap();
        assert!((r.t - t).abs() < 1e-9, "t {} vs {t}", r.t);
        assert!((r.p - p).abs() < 1e-9, "p {} vs {p}", r.p);
        assert_eq!(r.df, base.len() - 1);
    }
}

#[test]
fn t_distribution_tail_matches_quadrature_and_reference() {
    // (t, df, scipy two-tailed p)
    let table = [
        (1.0, 1.0, 0.49999999999999956),
        (0.5, 10.0, 0.6278936057429729),
        (3.2, 25.0, 0.0037159684339301215),
        (-1.7, 7.0, 0.13292889678255518),
        (2.0, 99.0, 0.04823969337263297),
        (0.01, 2.0, 0.992929108958201),
        (4.5, 3.0, 0.020490412344453403),
    ];
    for (t, df, p) in table {
        let got = student_t_two_tailed(t, df);
        assert!((got - p).abs() < 1e-9, "t={t} df={df}: {got} vs {p}");
        assert!((got - simpson_t_two_tailed(t, df)).abs() < 1e-6);
    }
}
