#![allow(dead_code)]

use bayespir::network::TermDag;
use bayespir::{build_index, CondTable, CorpusIndex, Document, Evidence, IndexOptions, Value};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub const EPS: f64 = 1e-4;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed tree (every node has at most one parent) with shuffled
/// labels.
pub fn random_tree(rng: &mut TestRng, nodes: usize) -> TermDag {
    let mut labels: Vec<usize> = (0..nodes).collect();
    labels.shuffle(rng);
    let arcs: Vec<(usize, usize)> = (1..nodes).map(|i| (labels[rng.gen_range(0..i)], labels[i])).collect();
    TermDag::from_arcs(nodes, arcs).unwrap()
}

/// Random polytree: a random undirected tree with every edge oriented by a
/// coin flip, so nodes may have several parents.
pub fn random_polytree(rng: &mut TestRng, nodes: usize) -> TermDag {
    let mut labels: Vec<usize> = (0..nodes).collect();
    labels.shuffle(rng);
    let arcs: Vec<(usize, usize)> = (1..nodes)
        .map(|i| {
            let (a, b) = (labels[rng.gen_range(0..i)], labels[i]);
            if rng.gen_bool(0.5) {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    TermDag::from_arcs(nodes, arcs).unwrap()
}

/// Random CPTs with every entry in `[ε, 1−ε]` and rows summing to 1.
pub fn random_cpts(rng: &mut TestRng, dag: &TermDag) -> Vec<CondTable> {
    (0..dag.len())
        .map(|x| {
            CondTable::from_fn(dag.parents(x).to_vec(), |_| {
                let p = rng.gen_range(EPS..=1.0 - EPS);
                [p, 1.0 - p]
            })
            .unwrap()
        })
        .collect()
}

/// Random hard evidence on up to `max` distinct nodes.
pub fn random_evidence(rng: &mut TestRng, nodes: usize, max: usize) -> Evidence {
    let count = rng.gen_range(0..=max.min(nodes));
    let mut picked: Vec<usize> = (0..nodes).collect();
    picked.shuffle(rng);
    picked[..count]
        .iter()
        .map(|&n| (n, Value::from_bit(rng.gen_bool(0.5))))
        .collect()
}

pub fn fruit() -> CorpusIndex {
    build_index(
        &[
            Document::new("D1", "apple apple banana"),
            Document::new("D2", "banana cherry"),
            Document::new("D3", "apple cherry cherry"),
        ],
        &IndexOptions::default(),
    )
    .unwrap()
}

/// Random corpus over a vocabulary of `vocab` words `w0..`, where every
/// document draws each word with probability `density` and term frequencies
/// 1..=3.
pub fn random_corpus(rng: &mut TestRng, docs: usize, vocab: usize, density: f64) -> Vec<Document> {
    (0..docs)
        .map(|d| {
            let mut words = Vec::new();
            for w in 0..vocab {
                if rng.gen_bool(density) {
                    for _ in 0..rng.gen_range(1..=3) {
                        words.push(format!("w{w}"));
                    }
                }
            }
            words.shuffle(rng);
            Document::new(format!("doc{d:02}"), words.join(" "))
        })
        .collect()
}

/// Every non-empty subset of `0..n`, as term lists.
pub fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    (1..1usize << n)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

/// Twenty documents where only `target` holds both `common` and `unique`,
/// and `unique` appears nowhere else.
pub fn needle_corpus() -> (Vec<Document>, &'static str, &'static str) {
    let fillers = [
        "river stone bank water",
        "common river market trade",
        "forest path stone moss",
        "common forest deer trail",
        "market price trade goods",
        "water mill grain bread",
        "common bread oven baker",
        "stone wall castle gate",
        "castle king crown gold",
        "common gold coin trade",
        "deer hunter bow arrow",
        "arrow target practice field",
        "field grain harvest farmer",
        "common farmer plough ox",
        "ox cart road market",
        "road bridge river crossing",
        "moss rock cave bat",
        "bat night moon owl",
        "owl forest night sound",
    ];
    let mut docs: Vec<Document> = fillers
        .iter()
        .enumerate()
        .map(|(i, t)| Document::new(format!("f{i:02}"), *t))
        .collect();
    docs.insert(7, Document::new("target", "common zephyr breeze"));
    (docs, "common", "zephyr")
}
