//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its number. Run with `cargo test --test acceptance -- --nocapture` to see
//! every line.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;

use phlt::cli::{annotate_content, cmd_build_corpus, cmd_highlight, cmd_train, AppConfig, OutputFormat};
use phlt::corpus::{deduplicate, filter_samples, read_corpus, write_corpus, CorpusConfig, Sample};
use phlt::eval::{cross_validate, evaluate, kfold, train_test_split, SplitSpec};
use phlt::explain::{linear_attribution_full, surrogate_explain, SurrogateConfig};
use phlt::features::{binarize_matrix, count_matrix, tfidf_transform, SparseVector};
use phlt::ingest::{ingest_bulk_file, HeadingMatcher, RawBulkFile, SegmentRecord};
use phlt::models::{
    fit, log_count_ratio, sgd, train_mnb, train_nbsvm, ModelKind, TrainConfig,
};
use phlt::rng::{derive_seed, rng_from};
use phlt::synthetic::{generate_corpus, signature_phrase};
use phlt::text::{build_vocabulary, default_stoplist, NgramConfig};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn pass(n: u32, name: &str) {
    println!("ACCEPTANCE {n} ({name}): PASS");
}

/// Criterion 1: the bundled 3-grant fixture extracts exactly the golden
/// segments.
#[test]
fn criterion_01_parser_fixture_golden_segments() {
    let file = RawBulkFile::from_path(&fixture("ipg200107.xml")).unwrap();
    let outcome = ingest_bulk_file(&file, &HeadingMatcher::default()).unwrap();
    assert!(outcome.warnings.is_empty(), "warnings: {:?}", outcome.warnings);
    let golden: Vec<SegmentRecord> =
        serde_json::from_str(&std::fs::read_to_string(fixture("golden_segments.json")).unwrap())
            .unwrap();
    assert_eq!(outcome.records, golden);
    pass(1, "parser fixture extracts golden segments");
}

/// Independent brute-force Bayes posterior enumerator.
fn oracle_log_posteriors(
    docs: &[Vec<String>],
    labels: &[u8],
    vocab_terms: &[String],
    alpha: f64,
    doc: &[String],
) -> Vec<(u8, f64)> {
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let n = labels.len() as f64;
    classes
        .iter()
        .map(|&c| {
            let class_docs: Vec<&Vec<String>> = docs
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(d, _)| d)
                .collect();
            let prior = class_docs.len() as f64 / n;
            let total_terms: usize = class_docs
                .iter()
                .flat_map(|d| d.iter())
                .filter(|t| vocab_terms.contains(t))
                .count();
            let denom = vocab_terms.len() as f64 * alpha + total_terms as f64;
            let mut log_post = prior.ln();
            for term in doc {
                if !vocab_terms.contains(term) {
                    continue;
                }
                let count = class_docs
                    .iter()
                    .flat_map(|d| d.iter())
                    .filter(|t| *t == term)
                    .count();
                log_post += ((alpha + count as f64) / denom).ln();
            }
            (c, log_post)
        })
        .collect()
}

/// Criterion 2: MNB equals brute-force posterior enumeration on 50 random
/// corpora, argmax exact and log-scores within 1e-12.
#[test]
fn criterion_02_mnb_matches_brute_force_oracle() {
    let mut rng = rng_from(20260808);
    for round in 0..50 {
        let n_docs = rng.random_range(3..=20);
        let n_terms = rng.random_range(2..=30usize);
        let n_classes = rng.random_range(2..=3usize);
        let docs: Vec<Vec<String>> = (0..n_docs)
            .map(|_| {
                (0..rng.random_range(1..=15))
                    .map(|_| format!("t{}", rng.random_range(0..n_terms)))
                    .collect()
            })
            .collect();
        let labels: Vec<u8> = (0..n_docs).map(|i| (i % n_classes) as u8).collect();
        let vocab = build_vocabulary(
            &docs,
            &NgramConfig {
                min_n: 1,
                max_n: 1,
                ..NgramConfig::default()
            },
        )
        .unwrap();
        let counts = count_matrix(&docs, &vocab);
        let model = train_mnb(&counts, &labels, 1.0).unwrap();
        for (i, doc) in docs.iter().enumerate() {
            let (label, scores) = model.predict(counts.row(i)).unwrap();
            let oracle = oracle_log_posteriors(&docs, &labels, vocab.terms(), 1.0, doc);
            let mut best = oracle[0];
            for &(c, s) in &oracle[1..] {
                if s > best.1 {
                    best = (c, s);
                }
            }
            assert_eq!(label, best.0, "round {round} doc {i}: argmax mismatch");
            for (k, &(_, s)) in oracle.iter().enumerate() {
                assert!(
                    (scores[k] - s).abs() < 1e-12,
                    "round {round} doc {i} class {k}: {} vs oracle {s}",
                    scores[k]
                );
            }
        }
    }
    pass(2, "MNB equals brute-force Bayes enumeration on 50 corpora");
}

fn random_instance(
    seed: u64,
) -> (Vec<SparseVector>, Vec<f64>, Vec<f64>, f64) {
    let mut rng = rng_from(seed);
    let dim = 5;
    let n = 8;
    let rows: Vec<SparseVector> = (0..n)
        .map(|_| {
            let mut entries = Vec::new();
            for j in 0..dim as u32 {
                if rng.random_bool(0.7) {
                    entries.push((j, rng.random_range(0.1..1.0)));
                }
            }
            SparseVector::from_entries(dim, entries)
        })
        .collect();
    let targets: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let weights: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let bias: f64 = rng.random_range(-0.5..0.5);
    (rows, targets, weights, bias)
}

fn gradient_check(loss: sgd::LossKind, seed: u64, kink_guard: bool) -> Option<f64> {
    let (rows, targets, weights, bias) = random_instance(seed);
    let lambda = 0.1;
    if kink_guard {
        for (x, &y) in rows.iter().zip(&targets) {
            if (1.0 - y * (x.dot_dense(&weights) + bias)).abs() < 1e-3 {
                return None;
            }
        }
    }
    let (gw, gb) = sgd::gradient(loss, &weights, bias, &rows, &targets, lambda);
    let h = 1e-6;
    let rel = |fd: f64, g: f64| {
        if (fd - g).abs() < 1e-9 {
            0.0
        } else {
            (fd - g).abs() / g.abs().max(1e-8)
        }
    };
    let mut worst = 0.0f64;
    for j in 0..weights.len() {
        let mut wp = weights.clone();
        let mut wm = weights.clone();
        wp[j] += h;
        wm[j] -= h;
        let fd = (sgd::objective(loss, &wp, bias, &rows, &targets, lambda)
            - sgd::objective(loss, &wm, bias, &rows, &targets, lambda))
            / (2.0 * h);
        worst = worst.max(rel(fd, gw[j]));
    }
    let fd_b = (sgd::objective(loss, &weights, bias + h, &rows, &targets, lambda)
        - sgd::objective(loss, &weights, bias - h, &rows, &targets, lambda))
        / (2.0 * h);
    Some(worst.max(rel(fd_b, gb)))
}

/// Criterion 3: analytic (sub)gradients match central finite differences on
/// 20 random instances, relative error < 1e-4.
#[test]
fn criterion_03_gradients_match_finite_differences() {
    let mut checked = 0;
    for seed in 100..120u64 {
        let rel = gradient_check(sgd::LossKind::Logistic, seed, false).unwrap();
        assert!(rel < 1e-4, "logistic seed {seed}: rel err {rel}");
        checked += 1;
    }
    assert_eq!(checked, 20);

    let mut checked = 0;
    let mut seed = 200u64;
    while checked < 20 {
        if let Some(rel) = gradient_check(sgd::LossKind::Hinge, seed, true) {
            assert!(rel < 1e-4, "hinge seed {seed}: rel err {rel}");
            checked += 1;
        }
        seed += 1;
        assert!(seed < 600, "could not find 20 kink-free hinge instances");
    }
    pass(3, "LR and SVM gradients match finite differences");
}

/// Criterion 4: tf-idf values match the stated formula on a 3-document
/// corpus to 1e-9 and every nonzero row has unit L2 norm.
#[test]
fn criterion_04_tfidf_hand_check() {
    let docs: Vec<Vec<String>> = vec![
        vec!["a".into(), "b".into(), "a".into()],
        vec!["b".into(), "c".into()],
        vec!["c".into()],
    ];
    let cfg = NgramConfig {
        min_n: 1,
        max_n: 1,
        ..NgramConfig::default()
    };
    let vocab = build_vocabulary(&docs, &cfg).unwrap();
    let counts = count_matrix(&docs, &vocab);
    let tfidf = tfidf_transform(&counts, &vocab);

    // the stated formula, computed independently: idf = ln((1+N)/(1+df)) + 1
    let n = 3.0f64;
    let df = |term: &str| {
        docs.iter()
            .filter(|d| d.iter().any(|t| t == term))
            .count() as f64
    };
    let idf = |term: &str| ((1.0 + n) / (1.0 + df(term))).ln() + 1.0;
    for (d, doc) in docs.iter().enumerate() {
        let mut expected: Vec<(String, f64)> = Vec::new();
        let uniq: HashSet<&String> = doc.iter().collect();
        for term in uniq {
            let count = doc.iter().filter(|t| *t == term).count() as f64;
            expected.push((term.clone(), count * idf(term)));
        }
        let norm = expected.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        for (term, raw) in expected {
            let j = vocab.index_of(&term).unwrap();
            let got = tfidf.row(d).get(j);
            assert!(
                (got - raw / norm).abs() < 1e-9,
                "doc {d} term {term}: {got} vs {}",
                raw / norm
            );
        }
        assert!((tfidf.row(d).l2_norm() - 1.0).abs() < 1e-9);
    }
    pass(4, "tf-idf matches the stated formula with unit rows");
}

/// Criterion 5: NBSVM structure laws — the beta=1 endpoint reproduces the
/// per-class SVM on ratio-scaled features exactly, the log-count ratio is
/// antisymmetric under class swap, and symmetric counts give r = 0.
#[test]
fn criterion_05_nbsvm_structure() {
    let docs: Vec<Vec<String>> = vec![
        vec!["good".into(), "fine".into(), "shared".into()],
        vec!["good".into(), "great".into()],
        vec!["bad".into(), "awful".into(), "shared".into()],
        vec!["bad".into(), "poor".into()],
    ];
    let labels = [1u8, 1, 0, 0];
    let cfg = NgramConfig {
        min_n: 1,
        max_n: 1,
        ..NgramConfig::default()
    };
    let vocab = build_vocabulary(&docs, &cfg).unwrap();
    let binary = binarize_matrix(&count_matrix(&docs, &vocab));

    // beta = 1: per class, NBSVM weights equal the raw SVM on scaled rows
    let config = TrainConfig {
        nbsvm_beta: 1.0,
        ..TrainConfig::default()
    };
    let (model, _) = train_nbsvm(&binary, &labels, &config).unwrap();
    for (ci, &class) in model.classes.iter().enumerate() {
        let ratio = log_count_ratio(&binary, &labels, class, config.alpha).unwrap();
        let scaled: Vec<SparseVector> = binary
            .rows()
            .iter()
            .map(|r| r.map_values(|j, v| v * ratio.r[j as usize]))
            .collect();
        let targets: Vec<f64> = labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let (w, b, _) = sgd::train_binary(
            sgd::LossKind::Hinge,
            &scaled,
            &targets,
            binary.dim(),
            config.learning_rate,
            config.epochs,
            1.0 / (config.svm_c * labels.len() as f64),
            derive_seed(config.seed, ci as u64),
        );
        assert_eq!(model.weights[ci], w, "class {class} weights differ");
        assert_eq!(model.intercepts[ci], b, "class {class} intercept differs");
        // identical decision scores on every row
        for (row, scaled_row) in binary.rows().iter().zip(&scaled) {
            let nbsvm_score = model.scores(row).unwrap()[ci];
            let svm_score = scaled_row.dot_dense(&w) + b;
            assert_eq!(nbsvm_score, svm_score);
        }
    }

    // antisymmetry: r(c vs rest) = -r(rest vs c) for the 2-class problem
    let r0 = log_count_ratio(&binary, &labels, 0, 1.0).unwrap();
    let r1 = log_count_ratio(&binary, &labels, 1, 1.0).unwrap();
    for (a, b) in r0.r.iter().zip(&r1.r) {
        assert_eq!(*a, -*b);
    }
    assert_eq!(r0.b, -r1.b);

    // symmetric counts give r = 0
    let sym_docs: Vec<Vec<String>> = vec![
        vec!["x".into(), "y".into()],
        vec!["x".into(), "y".into()],
    ];
    let sym_vocab = build_vocabulary(&sym_docs, &cfg).unwrap();
    let sym = binarize_matrix(&count_matrix(&sym_docs, &sym_vocab));
    let r = log_count_ratio(&sym, &[0, 1], 0, 1.0).unwrap();
    assert!(r.r.iter().all(|&v| v == 0.0));
    pass(5, "NBSVM endpoint, antisymmetry and symmetry laws");
}

/// Criterion 6: split and fold laws over 200 random (n, k, seed) triples.
#[test]
fn criterion_06_split_and_fold_laws() {
    let mut rng = rng_from(606);
    for _ in 0..200 {
        let n = rng.random_range(2..400usize);
        let k = rng.random_range(2..=n.min(12));
        let seed: u64 = rng.random();

        let folds = kfold(n, k, seed).unwrap();
        let mut seen = vec![false; n];
        for fold in &folds {
            for &i in fold {
                assert!(!seen[i], "duplicate index {i}");
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s), "folds must cover 0..n");
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        let max = *sizes.iter().max().unwrap();
        let min = *sizes.iter().min().unwrap();
        assert!(max - min <= 1, "fold sizes {sizes:?}");
        assert_eq!(kfold(n, k, seed).unwrap(), folds, "kfold not reproducible");

        let spec = SplitSpec {
            test_fraction: 0.2,
            seed,
            stratified: false,
        };
        let (train, test) = train_test_split(n, &spec).unwrap();
        assert_eq!(train.len() + test.len(), n);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n, "split must be disjoint and exhaustive");
        assert_eq!(train_test_split(n, &spec).unwrap(), (train, test));
    }
    pass(6, "split and fold partition laws over 200 random triples");
}

/// Criterion 7: dedup idempotence and filter monotonicity on randomized
/// sample sets.
#[test]
fn criterion_07_dedup_and_filter_laws() {
    let mut rng = rng_from(707);
    let words = ["alpha", "beta", "gamma", "delta", "epsilon"];
    for _ in 0..100 {
        let n = rng.random_range(0..40usize);
        let samples: Vec<Sample> = (0..n)
            .map(|i| {
                let len = rng.random_range(0..8usize);
                let text: Vec<&str> = (0..len)
                    .map(|_| words[rng.random_range(0..words.len())])
                    .collect();
                Sample {
                    doc_number: format!("D{i}"),
                    title: String::new(),
                    text: text.join(" "),
                    label: rng.random_range(0..3u8),
                    paragraph_count: 1,
                    year: 2020,
                }
            })
            .collect();

        let (once, _) = deduplicate(samples.clone());
        let (twice, second_report) = deduplicate(once.clone());
        assert_eq!(once, twice, "dedup must be idempotent");
        assert_eq!(second_report.total(), 0);

        let config = CorpusConfig {
            min_word_count: rng.random_range(0..6usize),
            ..CorpusConfig::default()
        };
        let (kept, report) = filter_samples(samples.clone(), &config);
        assert_eq!(
            kept.len() + report.removed_null + report.removed_short,
            samples.len()
        );
        let mut cursor = samples.iter();
        for item in &kept {
            assert!(
                cursor.any(|s| s == item),
                "filter output must be a subsequence of its input"
            );
        }
    }
    pass(7, "dedup idempotence and filter monotonicity");
}

/// Criterion 8: the worked 4-sample metrics example reproduces exactly.
#[test]
fn criterion_08_metrics_hand_check() {
    let report = evaluate(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
    assert_eq!(report.precision[0], 1.0);
    assert_eq!(report.recall[0], 0.5);
    assert_eq!(report.f1[0], 2.0 / 3.0);
    assert_eq!(report.precision[1], 2.0 / 3.0);
    assert_eq!(report.recall[1], 1.0);
    assert_eq!(report.f1[1], 0.8);
    assert_eq!(report.confusion, vec![vec![1, 1], vec![0, 2]]);
    pass(8, "metrics hand check");
}

/// Criterion 9: synthetic 3-class end-to-end, 5-fold CV: macro-F1 >= 0.95
/// for the linear models and MNB, >= 0.70 for the depth-3 forest, under 60
/// seconds single-threaded.
#[test]
fn criterion_09_synthetic_end_to_end() {
    let started = Instant::now();
    let corpus = generate_corpus(100, 909); // 300 documents
    let labels: Vec<u8> = corpus.samples.iter().map(|s| s.label).collect();
    let texts: Vec<&str> = corpus.samples.iter().map(|s| s.text.as_str()).collect();
    let stoplist = default_stoplist();
    let ngram = NgramConfig::default();
    let train_cfg = TrainConfig::default();

    let run_cv = |kind: ModelKind| {
        cross_validate(
            &labels,
            5,
            909,
            |train_idx| {
                let fold_texts: Vec<&str> = train_idx.iter().map(|&i| texts[i]).collect();
                let fold_labels: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
                fit(kind, &fold_texts, &fold_labels, &ngram, &stoplist, &train_cfg)
                    .map(|t| t.model)
            },
            |model, i| model.predict_text(texts[i]).map(|(l, _)| l).unwrap(),
        )
        .unwrap()
    };

    for kind in [ModelKind::Svm, ModelKind::Logreg, ModelKind::Mnb, ModelKind::Nbsvm] {
        let outcome = run_cv(kind);
        assert!(
            outcome.mean_macro_f1 >= 0.95,
            "{kind}: macro F1 {:.4} below 0.95",
            outcome.mean_macro_f1
        );
        println!("  {kind}: 5-fold macro F1 {:.4}", outcome.mean_macro_f1);
    }
    let forest = run_cv(ModelKind::Forest);
    assert!(
        forest.mean_macro_f1 >= 0.70,
        "forest: macro F1 {:.4} below 0.70",
        forest.mean_macro_f1
    );
    println!("  forest: 5-fold macro F1 {:.4}", forest.mean_macro_f1);

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "end-to-end run took {elapsed:?}, budget is 60 s"
    );
    pass(9, "synthetic end-to-end 5-fold scores within budget");
}

/// Criterion 10: linear attribution completeness to 1e-9, and the
/// exhaustive-mask surrogate recovers attribution sign and rank order on a
/// linear predictor.
#[test]
fn criterion_10_explanation_completeness_and_surrogate_agreement() {
    let corpus = generate_corpus(40, 1010);
    let labels: Vec<u8> = corpus.samples.iter().map(|s| s.label).collect();
    let texts: Vec<&str> = corpus.samples.iter().map(|s| s.text.as_str()).collect();
    let unigram = NgramConfig {
        min_n: 1,
        max_n: 1,
        ..NgramConfig::default()
    };
    let trained = fit(
        ModelKind::Mnb,
        &texts,
        &labels,
        &unigram,
        &default_stoplist(),
        &TrainConfig::default(),
    )
    .unwrap();
    let model = &trained.model;

    // completeness on a handful of texts
    for text in texts.iter().take(20) {
        let full = linear_attribution_full(model, text, None).unwrap();
        let sum: f64 = full.terms.iter().map(|t| t.weight).sum();
        assert!(
            (full.intercept + sum - full.score).abs() < 1e-9,
            "completeness violated: {} + {} != {}",
            full.intercept,
            sum,
            full.score
        );
    }

    // exhaustive surrogate vs exact attribution on a 5-token text
    let text = "advantage improved problem aspect efficiency";
    let (target, _) = model.predict_text(text).unwrap();
    let full = linear_attribution_full(model, text, Some(target)).unwrap();
    let predictor = |variant: &str| {
        model
            .predict_text(variant)
            .map(|(_, scores)| scores)
            .unwrap_or_default()
    };
    let surrogate = surrogate_explain(
        predictor,
        text,
        target,
        model.classes(),
        &SurrogateConfig::default(),
        5,
    )
    .unwrap();
    assert_eq!(surrogate.tokens.len(), 5);
    // same rank order of the five tokens
    let exact_order: Vec<&str> = full.terms.iter().map(|t| t.token.as_str()).collect();
    let surrogate_order: Vec<&str> = surrogate.tokens.iter().map(|t| t.token.as_str()).collect();
    assert_eq!(surrogate_order, exact_order, "rank order differs");
    // same signs
    for s in &surrogate.tokens {
        let exact = full.terms.iter().find(|t| t.token == s.token).unwrap();
        assert_eq!(
            s.weight.is_sign_positive(),
            exact.weight.is_sign_positive(),
            "sign differs for {}",
            s.token
        );
    }
    pass(10, "attribution completeness and surrogate agreement");
}

/// Criterion 11: cmd_train and cmd_highlight are byte-deterministic across
/// two runs with the same seed.
#[test]
fn criterion_11_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("corpus.csv");
    write_corpus(&generate_corpus(30, 1111), &corpus_path).unwrap();
    let config = AppConfig::default();

    let model_a = dir.path().join("a.phlt");
    let model_b = dir.path().join("b.phlt");
    let report_a = cmd_train(&corpus_path, ModelKind::Nbsvm, &config, &model_a, OutputFormat::Text).unwrap();
    let report_b = cmd_train(&corpus_path, ModelKind::Nbsvm, &config, &model_b, OutputFormat::Text).unwrap();
    let bytes_a = std::fs::read(&model_a).unwrap();
    let bytes_b = std::fs::read(&model_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "model files differ between runs");
    // reports mention different paths; compare everything else
    let strip = |s: &str, p: &Path| s.replace(&p.display().to_string(), "<model>");
    assert_eq!(strip(&report_a, &model_a), strip(&report_b, &model_b));

    let input = dir.path().join("input.txt");
    std::fs::write(
        &input,
        format!(
            "device {} advantage improved\n\nunit {} problem drawback\n",
            signature_phrase(1),
            signature_phrase(2)
        ),
    )
    .unwrap();
    for format in [OutputFormat::Json, OutputFormat::Html] {
        let first = cmd_highlight(&model_a, &input, format, false, &config).unwrap();
        let second = cmd_highlight(&model_a, &input, format, false, &config).unwrap();
        assert_eq!(first, second, "highlight output differs between runs");
    }
    pass(11, "cmd_train and cmd_highlight byte determinism");
}

/// Supporting check for the highlight contract: each unit's label equals a
/// direct predict call, and the three signature paragraphs get the three
/// distinct labels.
#[test]
fn highlight_signature_paragraphs_get_three_labels() {
    let corpus = generate_corpus(60, 1234);
    let labels: Vec<u8> = corpus.samples.iter().map(|s| s.label).collect();
    let texts: Vec<&str> = corpus.samples.iter().map(|s| s.text.as_str()).collect();
    let trained = fit(
        ModelKind::Svm,
        &texts,
        &labels,
        &NgramConfig::default(),
        &default_stoplist(),
        &TrainConfig::default(),
    )
    .unwrap();
    let content = format!(
        "device {} advantage improved efficiency benefit gain\n\n\
         apparatus {} problem drawback conventional failure defect\n\n\
         member {} embodiment configured arrangement disposed formed\n",
        signature_phrase(1),
        signature_phrase(2),
        signature_phrase(0)
    );
    let annotated = annotate_content(&trained.model, &content, false).unwrap();
    assert_eq!(annotated.len(), 3);
    assert_eq!(annotated[0].label, 1);
    assert_eq!(annotated[1].label, 2);
    assert_eq!(annotated[2].label, 0);
    for unit in &annotated {
        let (direct, _) = trained.model.predict_text(&unit.text).unwrap();
        assert_eq!(direct, unit.label, "batch and single-shot paths disagree");
        assert!(unit.confidence > 0.0 && unit.confidence <= 1.0);
    }
}

/// Supporting check for the golden corpus file: build-corpus over the
/// fixture directory reproduces the hand-written CSV byte for byte.
#[test]
fn build_corpus_reproduces_golden_csv() {
    let dir = tempfile::tempdir().unwrap();
    let bulk_dir = dir.path().join("bulk");
    std::fs::create_dir(&bulk_dir).unwrap();
    std::fs::copy(fixture("ipg200107.xml"), bulk_dir.join("ipg200107.xml")).unwrap();
    let out = dir.path().join("corpus.csv");
    let dump = dir.path().join("segments.ndjson");
    let report = cmd_build_corpus(&bulk_dir, &AppConfig::default(), &out, Some(&dump)).unwrap();
    let written = std::fs::read_to_string(&out).unwrap();
    let golden = std::fs::read_to_string(fixture("golden_corpus.csv")).unwrap();
    assert_eq!(written, golden, "corpus CSV differs from golden:\n{report}");
    // the dump has one JSON object per segment, including the empty one
    let dump_contents = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(dump_contents.lines().count(), 4);
    let back = read_corpus(&out).unwrap();
    assert_eq!(back.len(), 3);
}
