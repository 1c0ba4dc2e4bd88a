use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Validation(format!("cross-validation needs k >= 2, got {k}")));
    }
    Ok(())
}

fn by_key<'a, S: AsRef<str>>(keys: &'a [S]) -> BTreeMap<&'a str, Vec<usize>> {
    let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, key) in keys.iter().enumerate() {
        map.entry(key.as_ref()).or_default().push(i);
    }
    map
}

fn assemble(n: usize, k: usize, fold_of: &[usize]) -> Vec<Fold> {
    (0..k)
        .map(|f| {
            let (test, train) = (0..n).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect()
}

/// Stratified k-fold split. Each class (in sorted label order) is shuffled and
/// dealt round-robin, continuing where the previous class stopped so that fold
/// sizes differ by at most one.
pub fn stratified_kfold<S: AsRef<str>>(labels: &[S], k: usize, seed: u64) -> Result<Vec<Fold>> {
    check_k(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for (label, mut idx) in by_key(labels) {
        if idx.len() < k {
            return Err(Error::Validation(format!(
                "class {label:?} has {} samples, fewer than the {k} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(assemble(labels.len(), k, &fold_of))
}

/// k-fold split that keeps every group (for example one recording) inside a
/// single fold. Groups are shuffled within their majority class and each is
/// placed in the fold that currently holds the fewest samples of that class.
pub fn grouped_kfold<S: AsRef<str>, G: AsRef<str>>(labels: &[S], groups: &[G], k: usize, seed: u64) -> Result<Vec<Fold>> {
    check_k(k)?;
    if groups.len() != labels.len() {
        return Err(Error::dim("fold groups", labels.len(), groups.len()));
    }
    let members = by_key(groups);
    if members.len() < k {
        return Err(Error::Validation(format!(
            "{} groups cannot fill {k} folds",
            members.len()
        )));
    }
    // Most frequent label in the group, lowest label on ties.
    let class_of = |idx: &[usize]| -> String {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for &i in idx {
            *counts.entry(labels[i].as_ref()).or_default() += 1;
        }
        let mut best = ("", 0);
        for (label, n) in counts {
            if n > best.1 {
                best = (label, n);
            }
        }
        best.0.to_string()
    };
    let mut per_class: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    for idx in members.into_values() {
        per_class.entry(class_of(&idx)).or_default().push(idx);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut sizes = vec![0usize; k];
    for (_, mut groups) in per_class {
        groups.shuffle(&mut rng);
        let mut class_sizes = vec![0usize; k];
        for g in groups {
            let f = (0..k).min_by_key(|&f| (class_sizes[f], sizes[f], f)).expect("k >= 2");
            class_sizes[f] += g.len();
            sizes[f] += g.len();
            for i in g {
                fold_of[i] = f;
            }
        }
    }
    if sizes.contains(&0) {
        return Err(Error::Validation("grouped split left a fold empty".into()));
    }
    Ok(assemble(labels.len(), k, &fold_of))
}
