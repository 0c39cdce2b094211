//! Deterministic synthetic fixtures: clustered embedding tables and a small
//! biased corpus in which identity terms correlate with the label.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Instance;
use crate::embedding::EmbeddingModel;
use crate::error::Result;
use crate::lexicon::IdentityPair;

/// One sensitive category. Terms on the `targeted` side co-occur with the
/// positive label more often in the biased training split.
#[derive(Debug, Clone, Copy)]
pub struct IdentityCategory {
    pub name: &'static str,
    pub targeted: &'static [&'static str],
    pub other: &'static [&'static str],
}

pub const CATEGORIES: &[IdentityCategory] = &[
    IdentityCategory {
        name: "gender",
        targeted: &["woman", "she", "girl", "female", "lady"],
        other: &["man", "he", "boy", "male", "guy"],
    },
    IdentityCategory {
        name: "party",
        targeted: &["democrat", "liberal", "progressive"],
        other: &["republican", "conservative", "libertarian"],
    },
    IdentityCategory {
        name: "politician",
        targeted: &["trump", "pence", "cruz"],
        other: &["biden", "obama", "clinton"],
    },
    IdentityCategory {
        name: "race",
        targeted: &["blacks", "africans"],
        other: &["whites", "caucasians"],
    },
    IdentityCategory {
        name: "ethnicity",
        targeted: &["latino", "hispanic", "mexican"],
        other: &["asian", "korean", "japanese"],
    },
    IdentityCategory {
        name: "country",
        targeted: &["china", "russia", "iran"],
        other: &["america", "canada", "england"],
    },
    IdentityCategory {
        name: "continent",
        targeted: &["africa", "asia"],
        other: &["europe", "australia"],
    },
    IdentityCategory {
        name: "religion",
        targeted: &["jewish", "muslim", "jew"],
        other: &["christian", "catholic", "protestant"],
    },
    IdentityCategory {
        name: "belief",
        targeted: &["atheist", "agnostic"],
        other: &["buddhist", "hindu"],
    },
    IdentityCategory {
        name: "orientation",
        targeted: &["homosexual", "gay", "lesbian"],
        other: &["heterosexual", "straight", "bisexual"],
    },
];

/// The ten seed pairs, one per category.
pub const SEED_PAIRS: [(&str, &str); 10] = [
    ("man", "woman"),
    ("democrat", "republican"),
    ("trump", "biden"),
    ("blacks", "whites"),
    ("asian", "latino"),
    ("china", "america"),
    ("africa", "europe"),
    ("christian", "jewish"),
    ("buddhist", "atheist"),
    ("homosexual", "heterosexual"),
];

pub const TOXIC_WORDS: &[&str] = &[
    "idiot",
    "stupid",
    "disgusting",
    "pathetic",
    "trash",
    "moron",
    "awful",
    "vile",
    "filthy",
    "worthless",
    "scum",
    "dumb",
];

pub const NEUTRAL_WORDS: &[&str] = &[
    "lovely",
    "kind",
    "helpful",
    "great",
    "thanks",
    "nice",
    "smart",
    "friendly",
    "fine",
    "good",
    "polite",
    "brilliant",
];

pub const FILLER_WORDS: &[&str] = &[
    "the", "a", "is", "was", "and", "said", "this", "that", "today", "really", "very", "so",
    "just", "about", "my", "our", "their", "who", "what", "again", "here", "there", "post",
    "comment", "article", "news", "thread", "video", "week", "story", "reply", "thing",
];

/// Knobs of [`biased_corpus`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub seed: u64,
    pub dim: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Probability that a training row's identity term comes from the side
    /// matching its label (targeted for positive rows).
    pub identity_bias: f64,
    /// Probability that a training row's content word matches its label.
    pub content_agreement: f64,
    /// Fraction of rows with no identity term.
    pub no_identity: f64,
    /// Offset of identity terms along the shared side axis.
    pub side_scale: f64,
    /// Per-component noise scale of every word vector.
    pub noise: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            seed: 2019,
            dim: 32,
            n_train: 200,
            n_test: 100,
            identity_bias: 0.8,
            content_agreement: 0.85,
            no_identity: 0.1,
            side_scale: 0.4,
            noise: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BiasedCorpus {
    /// Embedding table in GloVe text format.
    pub embeddings: String,
    /// Seed pairs as a lexicon TSV.
    pub known_pairs: String,
    pub train: Vec<Instance>,
    pub test: Vec<Instance>,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v = gaussian(rng, dim, 1.0);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// `count` orthonormal directions (Gram–Schmidt over Gaussian draws).
fn orthonormal(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    assert!(
        count <= dim,
        "cannot fit {count} orthonormal directions in {dim} dimensions"
    );
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v = gaussian(rng, dim, 1.0);
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

fn combine(parts: &[(f64, &[f64])]) -> Vec<f64> {
    let dim = parts[0].1.len();
    (0..dim)
        .map(|i| parts.iter().map(|(w, v)| w * v[i]).sum())
        .collect()
}

/// Render rows in GloVe text format with six decimals.
pub fn glove_text<'a>(rows: impl IntoIterator<Item = (&'a str, &'a [f64])>) -> String {
    let mut out = String::new();
    for (token, v) in rows {
        out.push_str(token);
        for x in v {
            let _ = write!(out, " {x:.6}");
        }
        out.push('\n');
    }
    out
}

/// Generate the biased corpus. Labels follow the content word (with noise in
/// the training split only); identity terms follow the label with
/// probability `identity_bias` in training and are label-independent in the
/// test split.
pub fn biased_corpus(spec: &CorpusSpec) -> BiasedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.dim;
    let mut axes = orthonormal(&mut rng, CATEGORIES.len() + 4, d).into_iter();
    let side_axis = axes.next().expect("axis");

    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for cat in CATEGORIES {
        let centroid = axes.next().expect("axis");
        for (side, terms) in [(1.0, cat.targeted), (-1.0, cat.other)] {
            for t in terms {
                let noise = gaussian(&mut rng, d, spec.noise);
                let v = combine(&[
                    (1.0, &centroid),
                    (side * spec.side_scale, &side_axis),
                    (1.0, &noise),
                ]);
                rows.push((t.to_string(), v));
            }
        }
    }
    for words in [TOXIC_WORDS, NEUTRAL_WORDS, FILLER_WORDS] {
        let centroid = axes.next().expect("axis");
        for w in words {
            let noise = gaussian(&mut rng, d, 2.0 * spec.noise);
            rows.push((w.to_string(), combine(&[(1.0, &centroid), (1.0, &noise)])));
        }
    }
    let embeddings = glove_text(rows.iter().map(|(t, v)| (t.as_str(), v.as_slice())));

    let mut known_pairs = String::from("first\tsecond\n");
    for (a, b) in SEED_PAIRS {
        let _ = writeln!(known_pairs, "{a}\t{b}");
    }

    let train = sentences(&mut rng, spec, "tr", spec.n_train, true);
    let test = sentences(&mut rng, spec, "te", spec.n_test, false);
    BiasedCorpus {
        embeddings,
        known_pairs,
        train,
        test,
    }
}

fn sentences(
    rng: &mut ChaCha8Rng,
    spec: &CorpusSpec,
    prefix: &str,
    n: usize,
    biased: bool,
) -> Vec<Instance> {
    (0..n)
        .map(|i| {
            let label = u8::from(i % 2 == 0);
            let content_matches = !biased || rng.gen_bool(spec.content_agreement);
            let toxic = (label == 1) == content_matches;
            let content = if toxic { TOXIC_WORDS } else { NEUTRAL_WORDS };
            let mut tokens: Vec<&str> = vec![content.choose(rng).unwrap()];
            if !rng.gen_bool(spec.no_identity) {
                let cat = CATEGORIES.choose(rng).unwrap();
                let targeted = if biased {
                    (label == 1) == rng.gen_bool(spec.identity_bias)
                } else {
                    rng.gen_bool(0.5)
                };
                let side = if targeted { cat.targeted } else { cat.other };
                tokens.push(side.choose(rng).unwrap());
            }
            let fillers = rng.gen_range(2..=4);
            for _ in 0..fillers {
                tokens.push(FILLER_WORDS.choose(rng).unwrap());
            }
            tokens.shuffle(rng);
            Instance::new(format!("{prefix}{i:04}"), tokens.join(" "), label)
        })
        .collect()
}

/// A small clustered embedding table with one seed pair per cluster.
#[derive(Debug, Clone)]
pub struct ClusterFixture {
    pub model: EmbeddingModel,
    pub known: Vec<IdentityPair>,
}

/// `clusters` groups of `per_cluster` words (`c{i}w{j}`) around random
/// centroids plus `noise_words` unclustered words (`n{j}`). Cluster spread
/// is `spread` per component; the seed pair of cluster `i` is
/// `(c{i}w0, c{i}w1)`.
pub fn cluster_fixture(
    seed: u64,
    clusters: usize,
    per_cluster: usize,
    noise_words: usize,
    dim: usize,
    spread: f64,
) -> Result<ClusterFixture> {
    assert!(per_cluster >= 2, "a cluster needs at least two words");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut known = Vec::new();
    for i in 0..clusters {
        let centroid = unit(&mut rng, dim);
        for j in 0..per_cluster {
            let noise = gaussian(&mut rng, dim, spread);
            rows.push((
                format!("c{i}w{j}"),
                combine(&[(1.0, &centroid), (1.0, &noise)]),
            ));
        }
        known.push(IdentityPair::known(&format!("c{i}w0"), &format!("c{i}w1"))?);
    }
    for j in 0..noise_words {
        rows.push((format!("n{j}"), unit(&mut rng, dim)));
    }
    rows.shuffle(&mut rng);
    Ok(ClusterFixture {
        model: EmbeddingModel::from_rows(rows)?,
        known,
    })
}
