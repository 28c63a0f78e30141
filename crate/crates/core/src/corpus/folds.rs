use serde::{Deserialize, Serialize};

use super::rng::{self, FOLD_DOMAIN, VALIDATION_DOMAIN};
use super::Corpus;
use crate::error::{Error, Result};

/// Assignment of every corpus document to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    /// Corpus indices assigned to `fold`, in corpus order.
    pub fn members(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (f == fold).then_some(i))
            .collect()
    }
}

/// Stratified k-fold assignment.
///
/// Members of each class are shuffled with their own stream seeded by
/// `(seed, class index)` and dealt round-robin across folds. The dealing
/// position carries over between classes so that remainders spread over
/// different folds instead of piling onto fold 0.
pub fn stratified_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    let labels = corpus.labels()?;
    let by_class = members_by_class(&labels, corpus.num_classes());
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::TooFewMembers {
                class: corpus.classes()[c].clone(),
                count: members.len(),
                required: k,
            });
        }
    }

    let mut assignment = vec![0; labels.len()];
    let mut offset = 0;
    for (c, mut members) in by_class.into_iter().enumerate() {
        let mut stream = rng::stream(seed, &[FOLD_DOMAIN, c as u64]);
        rng::shuffle(&mut stream, &mut members);
        for (pos, &idx) in members.iter().enumerate() {
            assignment[idx] = (offset + pos) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(FoldPlan {
        k,
        seed,
        assignment,
    })
}

/// Train / validation / test partition of a corpus, as corpus indices in
/// corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Hold out `test_fold` as the test set and carve a stratified validation
/// set of `validation_fraction` out of the remaining documents.
///
/// The validation size is `round(fraction * pool)`, apportioned across
/// classes by largest remainder (ties to the lower class index) so each
/// class contributes `floor` or `ceil` of its exact share.
pub fn split(
    corpus: &Corpus,
    plan: &FoldPlan,
    test_fold: usize,
    validation_fraction: f64,
) -> Result<Split> {
    if test_fold >= plan.k {
        return Err(Error::InvalidArgument(format!(
            "test fold {test_fold} out of range for k={}",
            plan.k
        )));
    }
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "validation fraction must lie in (0, 1), got {validation_fraction}"
        )));
    }
    if plan.assignment.len() != corpus.len() {
        return Err(Error::LengthMismatch {
            left: plan.assignment.len(),
            right: corpus.len(),
        });
    }
    let labels = corpus.labels()?;
    let n_classes = corpus.num_classes();

    let mut test = Vec::new();
    let mut pool_by_class = vec![Vec::new(); n_classes];
    for (i, (&fold, &label)) in plan.assignment.iter().zip(&labels).enumerate() {
        if fold == test_fold {
            test.push(i);
        } else {
            pool_by_class[label].push(i);
        }
    }

    let sizes: Vec<usize> = pool_by_class.iter().map(Vec::len).collect();
    let quotas = apportion(&sizes, validation_fraction);

    let mut in_validation = vec![false; corpus.len()];
    for (c, members) in pool_by_class.iter_mut().enumerate() {
        if members.len() == quotas[c] {
            return Err(Error::InvalidArgument(format!(
                "validation fraction {validation_fraction} leaves class `{}` empty in train",
                corpus.classes()[c]
            )));
        }
        let mut stream = rng::stream(plan.seed, &[VALIDATION_DOMAIN, test_fold as u64, c as u64]);
        rng::shuffle(&mut stream, members);
        for &idx in &members[..quotas[c]] {
            in_validation[idx] = true;
        }
    }

    let mut train = Vec::new();
    let mut validation = Vec::new();
    for (i, &fold) in plan.assignment.iter().enumerate() {
        if fold == test_fold {
            continue;
        }
        if in_validation[i] {
            validation.push(i);
        } else {
            train.push(i);
        }
    }
    Ok(Split {
        train,
        validation,
        test,
    })
}

fn members_by_class(labels: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &label) in labels.iter().enumerate() {
        by_class[label].push(i);
    }
    by_class
}

fn apportion(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let target = (fraction * total as f64).round() as usize;
    let exact: Vec<f64> = sizes.iter().map(|&n| fraction * n as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut remaining = target.saturating_sub(quotas.iter().sum());
    for &c in order.iter().cycle().take(sizes.len() * 2) {
        if remaining == 0 {
            break;
        }
        if quotas[c] < sizes[c] {
            quotas[c] += 1;
            remaining -= 1;
        }
    }
    quotas
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use proptest::prelude::*;

    fn corpus_with(counts: &[usize]) -> Corpus {
        // Interleave classes so corpus order does not coincide with class order.
        let mut docs = Vec::new();
        let mut left = counts.to_vec();
        let mut n = 0;
        while left.iter().any(|&c| c > 0) {
            for (c, rem) in left.iter_mut().enumerate() {
                if *rem > 0 {
                    docs.push(Document {
                        id: format!("d{n:03}"),
                        text: format!("text {n}"),
                        label: Some(c),
                    });
                    *rem -= 1;
                    n += 1;
                }
            }
        }
        let classes = (0..counts.len()).map(|c| format!("c{c}")).collect();
        Corpus::new(docs, classes).unwrap()
    }

    fn class_fold_counts(corpus: &Corpus, plan: &FoldPlan) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; plan.k]; corpus.num_classes()];
        for (doc, &f) in corpus.documents().iter().zip(&plan.assignment) {
            counts[doc.label.unwrap()][f] += 1;
        }
        counts
    }

    #[test]
    fn exact_divisibility_gives_one_per_class_per_fold() {
        let corpus = corpus_with(&[5, 5]);
        let plan = stratified_folds(&corpus, 5, 1).unwrap();
        for row in class_fold_counts(&corpus, &plan) {
            assert_eq!(row, vec![1; 5]);
        }
    }

    #[test]
    fn uneven_classes_spread_remainders() {
        let corpus = corpus_with(&[6, 5]);
        let plan = stratified_folds(&corpus, 5, 11).unwrap();
        let counts = class_fold_counts(&corpus, &plan);
        for row in &counts {
            assert!(row.iter().max().unwrap() - row.iter().min().unwrap() <= 1);
        }
        let mut totals: Vec<usize> = (0..5).map(|f| counts[0][f] + counts[1][f]).collect();
        totals.sort_unstable();
        assert_eq!(totals, vec![2, 2, 2, 2, 3]);
    }

    #[test]
    fn plan_is_deterministic_and_seed_sensitive() {
        let corpus = corpus_with(&[20, 13]);
        let a = stratified_folds(&corpus, 5, 99).unwrap();
        let b = stratified_folds(&corpus, 5, 99).unwrap();
        assert_eq!(
            serde_json::to_vec(&a).unwrap(),
            serde_json::to_vec(&b).unwrap()
        );
        let c = stratified_folds(&corpus, 5, 100).unwrap();
        assert_ne!(a.assignment, c.assignment);
    }

    #[test]
    fn rejects_small_classes_and_bad_k() {
        let corpus = corpus_with(&[4, 10]);
        assert!(matches!(
            stratified_folds(&corpus, 5, 0),
            Err(Error::TooFewMembers { count: 4, .. })
        ));
        assert!(stratified_folds(&corpus, 1, 0).is_err());
    }

    #[test]
    fn rejects_unlabeled_documents() {
        let docs = vec![
            Document {
                id: "a".into(),
                text: "x".into(),
                label: Some(0),
            },
            Document {
                id: "b".into(),
                text: "y".into(),
                label: None,
            },
        ];
        let corpus = Corpus::new(docs, vec!["c".into()]).unwrap();
        assert!(matches!(stratified_folds(&corpus, 2, 0), Err(Error::Unlabeled(id)) if id == "b"));
    }

    #[test]
    fn test_set_is_the_fold() {
        let corpus = corpus_with(&[10, 10]);
        let plan = stratified_folds(&corpus, 5, 3).unwrap();
        let s = split(&corpus, &plan, 0, 0.1).unwrap();
        assert_eq!(s.test, plan.members(0));
    }

    #[test]
    fn validation_size_and_ratio() {
        // 125 docs, k=5: the train pool has 100 documents (60 + 40).
        let corpus = corpus_with(&[75, 50]);
        let plan = stratified_folds(&corpus, 5, 8).unwrap();
        let s = split(&corpus, &plan, 2, 0.2).unwrap();
        assert_eq!(s.train.len() + s.validation.len(), 100);
        assert_eq!(s.validation.len(), 20);
        let labels = corpus.labels().unwrap();
        let pos = s.validation.iter().filter(|&&i| labels[i] == 0).count();
        assert_eq!(pos, 12);
    }

    #[test]
    fn apportion_largest_remainder() {
        // exact shares 6.6 and 13.4 → 7 and 13
        assert_eq!(apportion(&[33, 67], 0.2), vec![7, 13]);
        // three equal shares of 3.333.. → one class rounds up to reach 10
        assert_eq!(apportion(&[10, 10, 10], 1.0 / 3.0), vec![4, 3, 3]);
    }

    #[test]
    fn validation_cannot_empty_a_class() {
        let corpus = corpus_with(&[10, 2]);
        let plan = stratified_folds(&corpus, 2, 0).unwrap();
        assert!(split(&corpus, &plan, 0, 0.9).is_err());
        assert!(split(&corpus, &plan, 2, 0.1).is_err());
        assert!(split(&corpus, &plan, 0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn stratified_partition_properties(
            counts in proptest::collection::vec(5usize..30, 2..4),
            k in 2usize..6,
            seed in any::<u64>(),
            frac in 0.05f64..0.5,
        ) {
            let corpus = corpus_with(&counts);
            let plan = stratified_folds(&corpus, k, seed).unwrap();
            for row in class_fold_counts(&corpus, &plan) {
                prop_assert!(row.iter().max().unwrap() - row.iter().min().unwrap() <= 1);
            }
            for test_fold in 0..k {
                let s = match split(&corpus, &plan, test_fold, frac) {
                    Ok(s) => s,
                    Err(Error::InvalidArgument(_)) => continue,
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                };
                let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..corpus.len()).collect::<Vec<_>>());
                prop_assert_eq!(&s, &split(&corpus, &plan, test_fold, frac).unwrap());
            }
        }
    }
}
