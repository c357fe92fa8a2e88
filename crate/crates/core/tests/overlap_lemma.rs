use gsbm_core::bounds::{overlap_samples, overlap_sup_bound};
use gsbm_core::channel::{build_sbm, symmetric_interaction_matrix};
use gsbm_core::characteristic_tensor;
use gsbm_core::concentration::{check_overlap_lemma, Envelope};

const ENVELOPE: Envelope = Envelope { c: 2.0, decay: 0.5 };

fn sbm_overlap(alpha: f64, beta: f64, n: u64, samples: usize) -> (Vec<f64>, f64) {
    let fam = build_sbm(&symmetric_interaction_matrix(2, alpha, beta), n).unwrap();
    let t = characteristic_tensor(&fam);
    (overlap_samples(&t, n, samples, 17), overlap_sup_bound(&t, n))
}

#[test]
fn zero_overlap_is_trivial() {
    let rep = check_overlap_lemma(&[0.0; 1000], 20, 60.0, Some(0.0), ENVELOPE, 61).unwrap();
    assert_eq!(rep.mean_exp_truncated, 1.0);
    assert_eq!(rep.condition1, Some(true));
    assert!(rep.condition2);
}

#[test]
fn subcritical_sbm_meets_both_hypotheses() {
    let (r, sup) = sbm_overlap(3.0, 1.0, 500, 100_000);
    let d = 20;
    let a = d as f64 * 2f64.max((sup / d as f64).ln());
    let rep = check_overlap_lemma(&r, d, a, Some(sup), ENVELOPE, 101).unwrap();
    assert_eq!(rep.condition1, Some(true));
    assert!(rep.condition2, "violation at {:?}", rep.condition2_violation);
    // second-moment SNR 1/2 gives E exp(R) close to (1 - 1/2)^{-1/2}
    assert!((rep.mean_exp_truncated - 2f64.sqrt()).abs() < 0.1, "{}", rep.mean_exp_truncated);
}

#[test]
fn supercritical_sbm_breaks_the_tail_hypothesis() {
    let (r, sup) = sbm_overlap(10.0, 0.5, 500, 100_000);
    let d = 20;
    let a = d as f64 * 2f64.max((sup / d as f64).ln());
    let rep = check_overlap_lemma(&r, d, a, Some(sup), ENVELOPE, 101).unwrap();
    assert!(!rep.condition2);
    assert!(rep.condition2_violation.unwrap() > 0.0);
}

#[test]
fn overlap_samples_are_reproducible_and_bounded() {
    let (a, sup) = sbm_overlap(3.0, 1.0, 60, 5000);
    let (b, _) = sbm_overlap(3.0, 1.0, 60, 5000);
    assert_eq!(a, b);
    assert!(a.iter().all(|x| x.abs() <= sup));
}
