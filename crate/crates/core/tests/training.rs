//! Training behaviour on the synthetic corpus.

use std::path::Path;

use cfaug_core::augment::{augment_pairs, normalize_lexicon, AugmentationConfig};
use cfaug_core::classifier::{train, Checkpoint, Scheme, TrainConfig};
use cfaug_core::embedding::EmbeddingModel;
use cfaug_core::error::Error;
use cfaug_core::eval::{ctf_gap_dataset, ModelScorer};
use cfaug_core::lexicon::IdentityLexicon;
use cfaug_core::perturb::{counterfactuals_all, PerturbationConfig};
use cfaug_core::synthetic::{biased_corpus, BiasedCorpus, CorpusSpec};

struct Setup {
    corpus: BiasedCorpus,
    embeddings: EmbeddingModel,
    lexicon: IdentityLexicon,
}

fn setup(spec: &CorpusSpec) -> Setup {
    let corpus = biased_corpus(spec);
    let embeddings = EmbeddingModel::from_reader(
        corpus.embeddings.as_bytes(),
        Path::new("synthetic"),
        None,
        None,
    )
    .unwrap();
    let known = IdentityLexicon::parse_tsv(&corpus.known_pairs, Path::new("known")).unwrap();
    let cfg = AugmentationConfig {
        top_k1: 3,
        top_k2: 15,
        ..Default::default()
    };
    let raw = augment_pairs(&embeddings, known.pairs(), &cfg).unwrap();
    let lexicon = normalize_lexicon(&raw, true, Some(&embeddings));
    Setup {
        corpus,
        embeddings,
        lexicon,
    }
}

fn cfg(scheme: Scheme) -> TrainConfig {
    TrainConfig {
        scheme,
        epochs: 10,
        batch_size: 32,
        learning_rate: 0.01,
        ..Default::default()
    }
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn same_seed_same_parameters() {
    let s = setup(&CorpusSpec::default());
    let p = PerturbationConfig::default();
    for scheme in [Scheme::Plain, Scheme::LogitPairing, Scheme::Augmentation] {
        let (a, log_a) = train(
            &s.embeddings,
            &s.corpus.train,
            Some(&s.lexicon),
            &cfg(scheme),
            &p,
        )
        .unwrap();
        let (b, log_b) = train(
            &s.embeddings,
            &s.corpus.train,
            Some(&s.lexicon),
            &cfg(scheme),
            &p,
        )
        .unwrap();
        assert_eq!(bits(&a.params.to_flat()), bits(&b.params.to_flat()));
        assert_eq!(log_a, log_b);
    }
    let mut other = cfg(Scheme::Plain);
    other.seed = 1;
    let (a, _) = train(
        &s.embeddings,
        &s.corpus.train,
        None,
        &cfg(Scheme::Plain),
        &p,
    )
    .unwrap();
    let (b, _) = train(&s.embeddings, &s.corpus.train, None, &other, &p).unwrap();
    assert_ne!(a.params, b.params);
}

#[test]
fn zero_lambda_logit_pairing_is_plain_training() {
    let s = setup(&CorpusSpec::default());
    let p = PerturbationConfig::default();
    let mut lp = cfg(Scheme::LogitPairing);
    lp.lambda1 = 0.0;
    lp.lambda2 = 0.0;
    let (a, log_a) = train(&s.embeddings, &s.corpus.train, Some(&s.lexicon), &lp, &p).unwrap();
    let (b, log_b) = train(
        &s.embeddings,
        &s.corpus.train,
        None,
        &cfg(Scheme::Plain),
        &p,
    )
    .unwrap();
    assert_eq!(bits(&a.params.to_flat()), bits(&b.params.to_flat()));
    assert_eq!(log_a.epochs, log_b.epochs);
}

#[test]
fn blindness_model_ignores_identity_substitutions() {
    let s = setup(&CorpusSpec::default());
    let p = PerturbationConfig::default();
    let (model, _) = train(
        &s.embeddings,
        &s.corpus.train,
        Some(&s.lexicon),
        &cfg(Scheme::Blindness),
        &p,
    )
    .unwrap();
    for x in &s.corpus.test {
        let base = model.probability(x, &s.embeddings);
        for y in counterfactuals_all(x, &s.lexicon, 256) {
            assert_eq!(model.probability(&y, &s.embeddings), base);
        }
    }
    let scorer = ModelScorer {
        model: &model,
        embeddings: &s.embeddings,
    };
    let gaps = ctf_gap_dataset(&scorer, &s.corpus.test, &s.lexicon, 256).unwrap();
    assert_eq!(gaps.ctf_all, 0.0);
}

#[test]
fn separable_corpus_is_fit() {
    let spec = CorpusSpec {
        content_agreement: 1.0,
        ..Default::default()
    };
    let s = setup(&spec);
    let mut c = cfg(Scheme::Plain);
    c.epochs = 25;
    let (_, log) = train(
        &s.embeddings,
        &s.corpus.train,
        None,
        &c,
        &PerturbationConfig::default(),
    )
    .unwrap();
    assert!(
        log.final_accuracy().unwrap() >= 0.99,
        "{:?}",
        log.final_accuracy()
    );
}

#[test]
fn early_stopping_keeps_best_holdout_epoch() {
    let s = setup(&CorpusSpec::default());
    let mut c = cfg(Scheme::Plain);
    c.epochs = 40;
    c.learning_rate = 0.05;
    c.early_stopping = Some(3);
    let (_, log) = train(
        &s.embeddings,
        &s.corpus.train,
        None,
        &c,
        &PerturbationConfig::default(),
    )
    .unwrap();
    let best = log
        .epochs
        .iter()
        .min_by(|a, b| a.holdout_loss.unwrap().total_cmp(&b.holdout_loss.unwrap()))
        .unwrap();
    assert_eq!(best.epoch, log.best_epoch);
    if log.stopped_early {
        assert_eq!(log.epochs.len(), log.best_epoch + 3);
    }
}

#[test]
fn configuration_errors() {
    let s = setup(&CorpusSpec::default());
    let p = PerturbationConfig::default();
    let err = train(
        &s.embeddings,
        &s.corpus.train,
        None,
        &cfg(Scheme::LogitPairing),
        &p,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    let mut neg = cfg(Scheme::LogitPairing);
    neg.lambda1 = -1.0;
    let err = train(&s.embeddings, &s.corpus.train, Some(&s.lexicon), &neg, &p).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    let one_class: Vec<_> = s
        .corpus
        .train
        .iter()
        .filter(|x| x.label == 1)
        .cloned()
        .collect();
    assert!(train(&s.embeddings, &one_class, None, &cfg(Scheme::Plain), &p).is_err());
}

#[test]
fn checkpoint_file_round_trip() {
    let s = setup(&CorpusSpec::default());
    let (model, _) = train(
        &s.embeddings,
        &s.corpus.train,
        Some(&s.lexicon),
        &cfg(Scheme::Blindness),
        &PerturbationConfig::default(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    let ck = Checkpoint::new(&model, 0, "cfg", Some(s.lexicon.content_hash()));
    std::fs::write(&path, ck.to_json()).unwrap();
    let back = Checkpoint::read(&path).unwrap().model();
    assert_eq!(bits(&back.params.to_flat()), bits(&model.params.to_flat()));
    for x in &s.corpus.test {
        assert_eq!(
            back.probability(x, &s.embeddings).to_bits(),
            model.probability(x, &s.embeddings).to_bits()
        );
    }
}
