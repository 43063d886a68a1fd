mod common;

use clsbm::{confusion_matrix, misclassified_count, CommunityAssignment};
use common::{all_perms, brute_force_misclassified};
use proptest::prelude::*;

fn assignment(k: usize, n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..k, n)
}

fn instance() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    (1usize..=6, 1usize..40).prop_flat_map(|(k, n)| (Just(k), assignment(k, n), assignment(k, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn count_equals_brute_force((k, t, e) in instance()) {
        let (t, e) = (CommunityAssignment(t), CommunityAssignment(e));
        let r = misclassified_count(&t, &e, k).unwrap();
        prop_assert_eq!(r.count, brute_force_misclassified(&t, &e, k));
        let matched: usize = r.best_perm.iter().enumerate().map(|(b, &a)| r.confusion[a][b]).sum();
        prop_assert_eq!(r.count, t.len() - matched);
        prop_assert!((0.0..=1.0).contains(&r.rate));
    }

    #[test]
    fn witness_is_the_smallest_optimal_permutation((k, t, e) in instance()) {
        let (t, e) = (CommunityAssignment(t), CommunityAssignment(e));
        let r = misclassified_count(&t, &e, k).unwrap();
        let first = all_perms(k)
            .into_iter()
            .find(|pi| t.labels().iter().zip(e.labels()).filter(|(&a, &b)| pi[b] != a).count() == r.count)
            .unwrap();
        prop_assert_eq!(r.best_perm, first);
    }

    #[test]
    fn invariant_under_relabeling_the_estimate((k, t, e) in instance(), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let pi = common::random_perm(&mut r, k);
        let relabeled = CommunityAssignment(e.iter().map(|&c| pi[c]).collect());
        let (t, e) = (CommunityAssignment(t), CommunityAssignment(e));
        prop_assert_eq!(
            misclassified_count(&t, &e, k).unwrap().count,
            misclassified_count(&t, &relabeled, k).unwrap().count
        );
    }

    #[test]
    fn confusion_rows_are_community_sizes((k, t, e) in instance()) {
        let (t, e) = (CommunityAssignment(t), CommunityAssignment(e));
        let conf = confusion_matrix(&t, &e, k).unwrap();
        let sizes = t.sizes(k);
        for a in 0..k {
            prop_assert_eq!(conf[a].iter().sum::<usize>(), sizes[a]);
        }
    }

    #[test]
    fn symmetric_on_balanced_instances(k in 2usize..5, m in 1usize..8, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let mut t: Vec<usize> = (0..k * m).map(|i| i % k).collect();
        let mut e = t.clone();
        use rand::seq::SliceRandom;
        t.shuffle(&mut r);
        e.shuffle(&mut r);
        let (t, e) = (CommunityAssignment(t), CommunityAssignment(e));
        prop_assert_eq!(
            misclassified_count(&t, &e, k).unwrap().count,
            misclassified_count(&e, &t, k).unwrap().count
        );
    }
}

#[test]
fn large_k_matches_brute_force_mass() {
    // K = 13 forces the assignment solver; compare against a K = 13 relabeling
    let k = 13;
    let truth: Vec<usize> = (0..260).map(|i| (i * 5 + i / 13) % k).collect();
    let mut est: Vec<usize> = truth.iter().map(|&c| (c * 7 + 3) % k).collect();
    for i in (0..260).step_by(9) {
        est[i] = (est[i] + 1) % k;
    }
    let errors = (0..260).step_by(9).count();
    let r = misclassified_count(&CommunityAssignment(truth), &CommunityAssignment(est), k).unwrap();
    assert_eq!(r.count, errors);
}
