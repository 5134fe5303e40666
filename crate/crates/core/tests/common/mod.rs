//! Seeded corpora shared by the integration suites.

#![allow(dead_code)]

use dlx::cli::sample_instances;
use dlx::dl::{ClassId, DecisionList, Feature, FeatureSpace, Instance, Literal, Rule};
use dlx::model_io::{generate_random_dl, GeneratorParams};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub name: String,
    pub dl: DecisionList,
    pub instances: Vec<Instance>,
}

pub const INSTANCES_PER_MODEL: usize = 5;

/// Random list with up to 8 features, domains of 2 or 3 values, up to 12
/// rules and 2 or 3 classes.
pub fn random_case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_features = rng.gen_range(2..=8);
    let params = GeneratorParams {
        seed,
        num_features,
        domain_size: rng.gen_range(2..=3),
        num_rules: rng.gen_range(1..=12),
        max_antecedent_len: rng.gen_range(1..=num_features.min(3)),
        num_classes: rng.gen_range(2..=3),
    };
    let dl = generate_random_dl(&params).expect("valid parameters");
    let instances = sample_instances(dl.space(), seed ^ 0x9e37, INSTANCES_PER_MODEL);
    Case {
        name: format!("random-{seed}"),
        dl,
        instances,
    }
}

/// List whose rules are leaves of a random decision tree, so every rule
/// clashes with every other. Some leaves are dropped and fall through to
/// the default. With `unique_default` the default class is predicted by no
/// rule.
pub fn tree_case(seed: u64, unique_default: bool) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(2..=8);
    let d = rng.gen_range(2..=3);
    let features = (1..=m)
        .map(|i| Feature {
            name: format!("x{i}"),
            domain: (0..d).map(|v| v.to_string()).collect(),
        })
        .collect();
    let classes: Vec<String> = (0..3).map(|c| format!("c{c}")).collect();
    let space = FeatureSpace::new(features, classes).expect("valid space");

    let mut leaves: Vec<Vec<Literal>> = vec![Vec::new()];
    let depth = rng.gen_range(1..=3.min(m));
    for _ in 0..depth {
        let mut next = Vec::new();
        for path in leaves {
            let used: Vec<usize> = path.iter().map(|l| l.feature).collect();
            let free: Vec<usize> = (0..m).filter(|f| !used.contains(f)).collect();
            if next.len() + d > 12 || free.is_empty() || rng.gen_bool(0.3) {
                next.push(path);
                continue;
            }
            let f = *free.choose(&mut rng).expect("non-empty");
            for v in 0..d {
                let mut p = path.clone();
                p.push(Literal::eq(f, v));
                next.push(p);
            }
        }
        leaves = next;
    }
    leaves.shuffle(&mut rng);
    let keep = if leaves.len() > 1 { rng.gen_range(1..leaves.len()) } else { 1 };
    let rule_classes = if unique_default { 2 } else { 3 };
    let rules = leaves
        .into_iter()
        .take(keep.min(12))
        .map(|p| Rule::new(p, ClassId(rng.gen_range(0..rule_classes)), &space).expect("valid rule"))
        .collect();
    let default = if unique_default { ClassId(2) } else { ClassId(rng.gen_range(0..3)) };
    let dl = DecisionList::new(space, rules, default).expect("valid list");
    let instances = sample_instances(dl.space(), seed ^ 0x51ed, INSTANCES_PER_MODEL);
    Case {
        name: format!("tree-{seed}-{unique_default}"),
        dl,
        instances,
    }
}

/// 200 random lists plus 40 tree-shaped ones.
pub fn corpus() -> Vec<Case> {
    let mut cases: Vec<Case> = (0..200).map(random_case).collect();
    cases.extend((0..40).map(|i| tree_case(1000 + i, i % 2 == 0)));
    cases
}

pub fn fs(xs: &[usize]) -> dlx::dl::FeatureSet {
    xs.iter().copied().collect()
}
