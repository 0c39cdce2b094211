//! Acceptance suite. Runs every criterion, prints one PASS/FAIL/SKIP line
//! each, and exits nonzero if any criterion fails.
//!
//! Criterion 10 needs a real GloVe 42B text file: set `GLOVE_42B_PATH` (and
//! optionally `GLOVE_MAX_WORDS`, default 100000) to run it.

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cfaug_core::augment::{augment_pairs, jaccard, AugmentationConfig};
use cfaug_core::classifier::{gradient_check, train, Example, LossSelector, ModelParams, Scheme};
use cfaug_core::config::RunConfig;
use cfaug_core::dataset::{read_csv, Instance};
use cfaug_core::embedding::EmbeddingModel;
use cfaug_core::eval::{
    accuracy_from_scores, aggregate_gaps, auc_from_scores, ctf_gap_instance, evaluate, CtfReport,
    ModelScorer, Provenance,
};
use cfaug_core::lexicon::{IdentityLexicon, IdentityPair};
use cfaug_core::perturb::{
    blind_all, perturb_instance, replace_term, swap_pair, PerturbationConfig, DEFAULT_PLACEHOLDER,
};
use cfaug_core::pipeline::{self, THRESHOLD};
use cfaug_core::synthetic::cluster_fixture;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        status: Status::Pass,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        status: Status::Fail,
        detail: detail.into(),
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn within(limit: Duration, elapsed: Duration, outcome: Outcome) -> Outcome {
    if elapsed > limit {
        return fail(format!(
            "{} (took {elapsed:.1?}, limit {limit:?})",
            outcome.detail
        ));
    }
    outcome
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data")
}

fn fixture_config() -> RunConfig {
    RunConfig::read(data_dir().join("fixture.toml")).expect("fixture config")
}

// ---------------------------------------------------------------------------
// Independent oracles

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn oracle_top_k(m: &EmbeddingModel, term: &str, k: usize) -> Vec<String> {
    let q = m.vector(term).unwrap();
    let mut all: Vec<(f64, &String)> = m
        .vocab()
        .iter()
        .filter(|t| *t != term)
        .map(|t| (cosine(q, m.vector(t).unwrap()), t))
        .collect();
    all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)));
    all.into_iter().take(k).map(|(_, t)| t.clone()).collect()
}

fn oracle_jaccard(a: &[String], b: &[String]) -> f64 {
    let a: BTreeSet<&String> = a.iter().collect();
    let b: BTreeSet<&String> = b.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(&b).count() as f64 / union as f64
    }
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.into(), b.into())
    } else {
        (b.into(), a.into())
    }
}

fn oracle_augment(
    m: &EmbeddingModel,
    known: &[IdentityPair],
    cfg: &AugmentationConfig,
) -> BTreeSet<(String, String)> {
    let mut out: BTreeSet<_> = known
        .iter()
        .map(|p| unordered(&p.first, &p.second))
        .collect();
    for p in known {
        if !(m.contains(&p.first) && m.contains(&p.second)) {
            continue;
        }
        for x in oracle_top_k(m, &p.first, cfg.top_k1) {
            for y in oracle_top_k(m, &p.second, cfg.top_k1) {
                if x != y {
                    let s = oracle_jaccard(
                        &oracle_top_k(m, &x, cfg.top_k2),
                        &oracle_top_k(m, &y, cfg.top_k2),
                    );
                    if s >= cfg.tau {
                        out.insert(unordered(&x, &y));
                    }
                }
            }
        }
    }
    out
}

fn pair_keys(lex: &IdentityLexicon) -> BTreeSet<(String, String)> {
    lex.pairs()
        .iter()
        .map(|p| unordered(&p.first, &p.second))
        .collect()
}

fn aug(tau: f64, top_k1: usize, top_k2: usize) -> AugmentationConfig {
    AugmentationConfig {
        tau,
        top_k1,
        top_k2,
        lemmatize: false,
    }
}

// ---------------------------------------------------------------------------
// Criteria

fn c1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let fixtures = [
        (101, 6, 8, 30, 10, 0.15),
        (202, 9, 6, 40, 16, 0.30),
        (303, 4, 12, 50, 8, 0.45),
    ];
    let mut compared = 0;
    for (seed, clusters, per, noise, dim, spread) in fixtures {
        let f = cluster_fixture(seed, clusters, per, noise, dim, spread).unwrap();
        if f.model.len() > 100 {
            return fail(format!("fixture {seed} has {} words", f.model.len()));
        }
        for cfg in [aug(0.25, 3, 10), aug(0.25, 6, 25), aug(0.4, 4, 15)] {
            let got = pair_keys(&augment_pairs(&f.model, &f.known, &cfg).unwrap());
            let want = oracle_augment(&f.model, &f.known, &cfg);
            if got != want {
                let extra: Vec<_> = got.symmetric_difference(&want).take(5).collect();
                return fail(format!("fixture {seed} {cfg:?}: differs on {extra:?}"));
            }
            compared += got.len();
        }
    }
    within(
        Duration::from_secs(5),
        start.elapsed(),
        pass(format!(
            "3 fixtures x 3 configs, {compared} pairs, exact set equality"
        )),
    )
}

fn c2_filter_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut admitted = 0;
    for run in 0..100 {
        let f = cluster_fixture(
            rng.gen(),
            rng.gen_range(2..7),
            rng.gen_range(3..9),
            rng.gen_range(0..30),
            rng.gen_range(4..12),
            rng.gen_range(0.05..0.6),
        )
        .unwrap();
        let (k1, k2) = (rng.gen_range(2..7), rng.gen_range(5..25));
        let low = augment_pairs(&f.model, &f.known, &aug(0.25, k1, k2)).unwrap();
        let high = augment_pairs(&f.model, &f.known, &aug(0.4, k1, k2)).unwrap();
        for p in low.pairs().iter().filter(|p| p.score.is_some()) {
            let s = oracle_jaccard(
                &oracle_top_k(&f.model, &p.first, k2),
                &oracle_top_k(&f.model, &p.second, k2),
            );
            if s < 0.25 {
                return fail(format!(
                    "run {run}: ({}, {}) has similarity {s}",
                    p.first, p.second
                ));
            }
            admitted += 1;
        }
        if !pair_keys(&high).is_subset(&pair_keys(&low)) {
            return fail(format!(
                "run {run}: output at tau=0.4 is not a subset of tau=0.25"
            ));
        }
    }
    pass(format!(
        "100 runs, {admitted} admitted pairs re-checked, subset held in every run"
    ))
}

/// Bundled corpus, lexicon and embeddings for the training criteria.
struct Bundle {
    cfg: RunConfig,
    embeddings: EmbeddingModel,
    lexicon: IdentityLexicon,
    train: Vec<Instance>,
    test: Vec<Instance>,
}

fn bundle() -> Bundle {
    let cfg = fixture_config();
    let lexicon = pipeline::augment(&cfg).unwrap().lexicon;
    Bundle {
        embeddings: pipeline::load_embeddings(&cfg).unwrap(),
        train: read_csv(cfg.paths.dataset.as_ref().unwrap()).unwrap(),
        test: read_csv(cfg.paths.testset.as_ref().unwrap()).unwrap(),
        cfg,
        lexicon,
    }
}

fn run_scheme(b: &Bundle, scheme: Scheme, lambda: f64, seed: u64) -> CtfReport {
    let mut cfg = b.cfg.clone();
    cfg.seed = Some(seed);
    cfg.train.scheme = scheme;
    cfg.train.lambda1 = lambda;
    cfg.train.lambda2 = lambda;
    let cfg = cfg.resolved();
    let (model, _) = train(
        &b.embeddings,
        &b.train,
        Some(&b.lexicon),
        &cfg.train,
        &cfg.perturbation,
    )
    .unwrap();
    let scorer = ModelScorer {
        model: &model,
        embeddings: &b.embeddings,
    };
    evaluate(
        &scorer,
        &b.test,
        &b.lexicon,
        cfg.perturbation.cap,
        THRESHOLD,
        Provenance::default(),
    )
    .unwrap()
}

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

fn seed_mean(b: &Bundle, scheme: Scheme, lambda: f64) -> (f64, f64) {
    let reports: Vec<_> = SEEDS
        .iter()
        .map(|&s| run_scheme(b, scheme, lambda, s))
        .collect();
    let n = reports.len() as f64;
    (
        reports.iter().map(|r| r.ctf_all).sum::<f64>() / n,
        reports.iter().map(|r| r.acc_all).sum::<f64>() / n,
    )
}

fn c3_blindness_zero(b: &Bundle) -> Outcome {
    let start = Instant::now();
    let r = run_scheme(b, Scheme::Blindness, 0.0, 0);
    within(
        Duration::from_secs(30),
        start.elapsed(),
        check(
            r.ctf_all == 0.0 && r.ctf_pos == Some(0.0) && r.ctf_neg == Some(0.0),
            format!(
                "ctf_all = {:e} over {} counted instances",
                r.ctf_all,
                r.counted_pos + r.counted_neg
            ),
        ),
    )
}

fn c4_logit_pairing_trend(b: &Bundle) -> Outcome {
    let start = Instant::now();
    let (plain_ctf, plain_acc) = seed_mean(b, Scheme::Plain, 0.0);
    let (lp_ctf, lp_acc) = seed_mean(b, Scheme::LogitPairing, 1.0);
    let ratio = lp_ctf / plain_ctf;
    within(
        Duration::from_secs(300),
        start.elapsed(),
        check(
            plain_ctf > 0.0 && lp_ctf <= 0.25 * plain_ctf && plain_acc - lp_acc <= 0.05,
            format!(
                "ctf_all plain {plain_ctf:.4} -> logit pairing {lp_ctf:.4} (ratio {ratio:.3}); \
                 acc_all {plain_acc:.3} -> {lp_acc:.3}"
            ),
        ),
    )
}

fn c5_lambda_monotone(b: &Bundle) -> Outcome {
    let lambdas = [0.0, 0.5, 1.0, 5.0];
    let ctf: Vec<f64> = lambdas
        .iter()
        .map(|&l| seed_mean(b, Scheme::LogitPairing, l).0)
        .collect();
    let monotone = ctf.windows(2).all(|w| w[1] <= w[0]);
    let shown: Vec<String> = lambdas
        .iter()
        .zip(&ctf)
        .map(|(l, c)| format!("λ={l}: {c:.4}"))
        .collect();
    check(monotone, shown.join(", "))
}

fn c6_gradients() -> Outcome {
    const MARGIN: f64 = 1e-4;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, h) = (rng.gen_range(2..8), rng.gen_range(2..8));
        let vec = |rng: &mut ChaCha8Rng| {
            (0..d)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect::<Vec<f64>>()
        };
        let (params, batch) = loop {
            let p = ModelParams::init(d, h, &mut rng);
            let batch: Vec<Example> = (0..rng.gen_range(2..8))
                .map(|_| {
                    let mut ex = Example::new(vec(&mut rng), rng.gen_range(0..2));
                    ex.counterfactuals = (0..rng.gen_range(1..4)).map(|_| vec(&mut rng)).collect();
                    ex.blinded = (0..rng.gen_range(0..3)).map(|_| vec(&mut rng)).collect();
                    ex
                })
                .collect();
            let away = |v: &[f64]| p.forward(v).pre.iter().all(|z| z.abs() > MARGIN);
            let smooth = batch.iter().all(|ex| {
                let g = p.forward(&ex.features).logit;
                away(&ex.features)
                    && ex
                        .counterfactuals
                        .iter()
                        .chain(&ex.blinded)
                        .all(|v| away(v) && (g - p.forward(v).logit).abs() > MARGIN)
            });
            if smooth {
                break (p, batch);
            }
        };
        let refs: Vec<&Example> = batch.iter().collect();
        for sel in [
            LossSelector::Plain,
            LossSelector::logit_pairing(1.0, 1.0).unwrap(),
            LossSelector::logit_pairing(0.5, 2.0).unwrap(),
        ] {
            worst = worst.max(gradient_check(&params, &refs, sel, 1e-6));
        }
    }
    check(
        worst < 1e-5,
        format!("max relative error {worst:.2e} over 20 seeds (plain and logit pairing)"),
    )
}

fn c7_perturbation_properties() -> Outcome {
    const CASES: usize = 1000;
    let terms = [
        "she",
        "he",
        "man",
        "woman",
        "gay",
        "straight",
        "muslim",
        "christian",
    ];
    let filler = ["the", "is", "a", "very", "good", "bad", "today"];
    let mut all_pairs = Vec::new();
    for (i, a) in terms.iter().enumerate() {
        for b in &terms[i + 1..] {
            all_pairs.push(IdentityPair::known(a, b).unwrap());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures: Vec<String> = Vec::new();
    let note = |name: &str, ok: bool, failures: &mut Vec<String>| {
        if !ok && !failures.iter().any(|f| f == name) {
            failures.push(name.to_string());
        }
    };
    for case in 0..CASES {
        let n_pairs = rng.gen_range(1..8);
        let lexicon =
            IdentityLexicon::from_pairs(all_pairs.choose_multiple(&mut rng, n_pairs).cloned());
        let len = rng.gen_range(1..10);
        let tokens: Vec<String> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    terms.choose(&mut rng).unwrap().to_string()
                } else {
                    filler.choose(&mut rng).unwrap().to_string()
                }
            })
            .collect();
        let x = Instance::from_tokens(format!("case{case}"), tokens, rng.gen_range(0..2));
        let cfg = PerturbationConfig {
            n_r: rng.gen_range(0.0..=1.0),
            n_b: rng.gen_range(0.0..=1.0),
            n_s: rng.gen_range(0.0..=1.0),
            seed: rng.gen(),
            ..Default::default()
        };

        let set = perturb_instance(&x, &lexicon, &cfg);
        note(
            "label preservation",
            set.instances().all(|y| y.label == x.label),
            &mut failures,
        );
        note(
            "length preservation",
            set.replacements
                .iter()
                .chain(&set.swapped)
                .all(|(_, y)| y.tokens.len() == x.tokens.len()),
            &mut failures,
        );

        let pair = all_pairs.choose(&mut rng).unwrap();
        let involution = match swap_pair(&x, pair) {
            Some(once) => swap_pair(&once, pair).map(|t| t.tokens) == Some(x.tokens.clone()),
            None => !x.contains(&pair.first) && !x.contains(&pair.second),
        };
        note("swap involution", involution, &mut failures);

        let idempotent = match replace_term(&x, &pair.first, &pair.second) {
            Some(once) => replace_term(&once, &pair.first, &pair.second).is_none(),
            None => !x.contains(&pair.first),
        };
        note("replacement idempotence", idempotent, &mut failures);

        let blind = blind_all(&x, &lexicon, DEFAULT_PLACEHOLDER);
        note(
            "blindness completeness",
            blind.tokens.iter().all(|t| !lexicon.is_term(t))
                && blind.tokens.len() == x.tokens.len(),
            &mut failures,
        );

        note(
            "seed determinism",
            perturb_instance(&x, &lexicon, &cfg) == set,
            &mut failures,
        );
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("6 properties x {CASES} randomized cases, 0 failures")
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn c8_metric_oracles() -> Outcome {
    const TOL: f64 = 1e-12;
    let set = |xs: &[&str]| {
        xs.iter()
            .map(|s| s.to_string())
            .collect::<HashSet<String>>()
    };
    let mut bad: Vec<String> = Vec::new();
    let mut expect = |name: &str, got: f64, want: f64| {
        if (got - want).abs() > TOL {
            bad.push(format!("{name}: {got} != {want}"));
        }
    };
    expect(
        "jaccard identical",
        jaccard(&set(&["a", "b"]), &set(&["a", "b"])),
        1.0,
    );
    expect("jaccard disjoint", jaccard(&set(&["a"]), &set(&["b"])), 0.0);
    expect(
        "jaccard 2/4",
        jaccard(&set(&["a", "b", "c"]), &set(&["b", "c", "d"])),
        0.5,
    );

    let x = Instance::new("x", "a", 1);
    let cfs = [Instance::new("r1", "b", 1), Instance::new("r2", "c", 1)];
    let constant = |_: &Instance| 0.37;
    expect(
        "ctf constant",
        ctf_gap_instance(&constant, &x, &cfs).unwrap(),
        0.0,
    );
    let table = |i: &Instance| match i.text.as_str() {
        "a" => 0.8,
        "b" => 0.6,
        _ => 0.7,
    };
    expect(
        "ctf 0.8 vs {0.6,0.7}",
        ctf_gap_instance(&table, &x, &cfs).unwrap(),
        0.15,
    );
    let agg = aggregate_gaps(&[(1, Some(0.2)), (0, Some(0.1))]).unwrap();
    expect("ctf_pos", agg.ctf_pos.unwrap(), 0.2);
    expect("ctf_neg", agg.ctf_neg.unwrap(), 0.1);
    expect("ctf_all", agg.ctf_all, 0.15);
    expect("skipped", agg.skipped as f64, 0.0);

    let perfect = accuracy_from_scores(&[(1, 0.9), (0, 0.2), (1, 0.7), (0, 0.4)], 0.5).unwrap();
    expect("acc perfect pos", perfect.acc_pos.unwrap(), 1.0);
    expect("acc perfect neg", perfect.acc_neg.unwrap(), 1.0);
    expect("acc perfect all", perfect.acc_all, 1.0);
    let ties = accuracy_from_scores(&[(1, 0.5), (0, 0.5), (1, 0.5), (0, 0.5)], 0.5).unwrap();
    expect("acc constant pos", ties.acc_pos.unwrap(), 1.0);
    expect("acc constant neg", ties.acc_neg.unwrap(), 0.0);
    // hand fixture: positives 0.8 (hit), 0.3 (miss); negatives 0.1 (hit), 0.6 (miss)
    let hand = accuracy_from_scores(&[(1, 0.8), (1, 0.3), (0, 0.1), (0, 0.6)], 0.5).unwrap();
    expect("acc hand pos", hand.acc_pos.unwrap(), 0.5);
    expect("acc hand neg", hand.acc_neg.unwrap(), 0.5);
    expect("acc hand all", hand.acc_all, 0.5);

    expect(
        "auc separated",
        auc_from_scores(&[(1, 0.9), (1, 0.8), (0, 0.3), (0, 0.1)]).unwrap(),
        1.0,
    );
    expect(
        "auc 3 of 4",
        auc_from_scores(&[(1, 0.9), (1, 0.4), (0, 0.6), (0, 0.1)]).unwrap(),
        0.75,
    );
    expect(
        "auc all ties",
        auc_from_scores(&[(1, 0.5), (0, 0.5), (0, 0.5)]).unwrap(),
        0.5,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..100 {
        let n = rng.gen_range(4..80);
        let mut s: Vec<(u8, f64)> = (0..n)
            .map(|_| {
                (
                    rng.gen_range(0..2),
                    f64::from(rng.gen_range(0..25u8)) / 25.0,
                )
            })
            .collect();
        s[0].0 = 0;
        s[1].0 = 1;
        let base = auc_from_scores(&s).unwrap();
        for (name, f) in [
            ("cube", (|v: f64| v.powi(3)) as fn(f64) -> f64),
            ("exp", |v| (4.0 * v).exp()),
            ("logit", |v| ((v + 0.01) / (1.02 - v)).ln()),
        ] {
            let t: Vec<_> = s.iter().map(|&(y, v)| (y, f(v))).collect();
            expect(
                &format!("auc invariance set {i} {name}"),
                auc_from_scores(&t).unwrap(),
                base,
            );
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            "hand values exact to 1e-12; AUC invariant on 100 random sets x 3 transforms".into()
        } else {
            bad.join("; ")
        },
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cfaug"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn pipeline_run(out: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let cfg = data_dir().join("fixture.toml");
    let (c, o) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    run_cli(&["augment-pairs", "--config", c, "--out", o, "--seed", "11"])?;
    run_cli(&["perturb", "--config", c, "--out", o, "--seed", "11"])?;
    run_cli(&[
        "train",
        "--config",
        c,
        "--out",
        o,
        "--seed",
        "11",
        "--scheme",
        "logit-pairing",
        "--lambda1",
        "1",
        "--lambda2",
        "1",
    ])?;
    run_cli(&["evaluate", "--config", c, "--out", o, "--seed", "11"])?;
    [
        "lexicon.tsv",
        "perturbed.csv",
        "checkpoint.json",
        "training_log.csv",
        "report.json",
    ]
    .iter()
    .map(|name| {
        std::fs::read(out.join(name))
            .map(|b| (name.to_string(), b))
            .map_err(|e| format!("{name}: {e}"))
    })
    .collect()
}

fn c9_end_to_end() -> Outcome {
    let start = Instant::now();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = match pipeline_run(a.path()) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let elapsed = start.elapsed();
    let second = match pipeline_run(b.path()) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0.as_str())
        .collect();
    within(
        Duration::from_secs(60),
        elapsed,
        check(
            differing.is_empty(),
            if differing.is_empty() {
                format!("4 stages in {elapsed:.1?}; 5 artifacts byte-identical across runs")
            } else {
                format!("artifacts differ between runs: {differing:?}")
            },
        ),
    )
}

fn c10_real_glove() -> Outcome {
    let Some(path) = std::env::var_os("GLOVE_42B_PATH") else {
        return Outcome {
            status: Status::Skip,
            detail: "GLOVE_42B_PATH not set".into(),
        };
    };
    let max_words = std::env::var("GLOVE_MAX_WORDS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(100_000);
    let model = match EmbeddingModel::load_limited(&path, None, Some(max_words)) {
        Ok(m) => m,
        Err(e) => return fail(e.to_string()),
    };
    let known: Vec<IdentityPair> = cfaug_core::synthetic::SEED_PAIRS
        .iter()
        .map(|(a, b)| IdentityPair::known(a, b).unwrap())
        .collect();
    let lex = match augment_pairs(&model, &known, &AugmentationConfig::default()) {
        Ok(l) => l,
        Err(e) => return fail(e.to_string()),
    };
    let spot = [
        ("female", "male"),
        ("she", "he"),
        ("girl", "boy"),
        ("muslim", "christian"),
        ("gay", "lesbian"),
        ("jew", "christian"),
        ("liberal", "conservative"),
        ("mexican", "hispanic"),
        ("lady", "guy"),
        ("atheist", "buddhist"),
    ];
    let found: Vec<String> = spot
        .iter()
        .filter(|(a, b)| lex.contains_pair(a, b))
        .map(|(a, b)| format!("{a}/{b}"))
        .collect();
    check(
        found.len() >= 8,
        format!(
            "{} of 10 spot-check pairs among {} pairs ({} words loaded): {}",
            found.len(),
            lex.len(),
            model.len(),
            found.join(", ")
        ),
    )
}

/// A named criterion and the check that evaluates it.
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let shared = std::sync::OnceLock::new();
    let b = || shared.get_or_init(bundle);
    let criteria: Vec<Criterion<'_>> = vec![
        (
            "expansion equals brute-force oracle",
            Box::new(c1_oracle_equivalence),
        ),
        (
            "filter soundness and tau monotonicity",
            Box::new(c2_filter_soundness),
        ),
        (
            "blindness model has zero CTF gap",
            Box::new(move || c3_blindness_zero(b())),
        ),
        (
            "logit pairing reduces CTF gap",
            Box::new(move || c4_logit_pairing_trend(b())),
        ),
        (
            "CTF gap non-increasing in lambda",
            Box::new(move || c5_lambda_monotone(b())),
        ),
        (
            "analytic gradients match finite differences",
            Box::new(c6_gradients),
        ),
        (
            "perturbation property suite",
            Box::new(c7_perturbation_properties),
        ),
        ("metric oracles", Box::new(c8_metric_oracles)),
        ("end-to-end CLI pipeline", Box::new(c9_end_to_end)),
        ("lexicon spot check on GloVe 42B", Box::new(c10_real_glove)),
    ];
    let mut failed = 0;
    println!("acceptance criteria");
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            fail(format!("panicked: {msg}"))
        });
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!(
            "{tag} {:>2}. {name} [{:.1?}]: {}",
            i + 1,
            start.elapsed(),
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
