use gsbm_core::bounds::{bound_corollary, marginal_expansion, overlap_value, tensor_bound_exact, BoundOptions, CorollaryForm};
use gsbm_core::channel::{build_hsbm, build_sbm, symmetric_interaction_tensor};
use gsbm_core::characteristic::{marginalize, DEFAULT_ZERO_TOL};
use gsbm_core::multinomial::pearson_statistic;
use gsbm_core::oracle::{verify_chain, TinyInstance};
use gsbm_core::sampler::sample;
use gsbm_core::{characteristic_tensor, injective_norm, marginal_profile, ChannelFamily, InjectiveOptions, SymTensor};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

/// Random family whose channel depends only on the sorted label tuple.
fn symmetric_family(p: usize, k: usize, ell: usize, w: &[f64]) -> ChannelFamily {
    ChannelFamily::from_fn(p, k, ell, |a| {
        let mut s = a.to_vec();
        s.sort();
        let idx = s.iter().fold(0, |acc, &x| acc * k + x);
        let row = &w[idx * ell..(idx + 1) * ell];
        let total: f64 = row.iter().sum();
        row.iter().map(|x| x / total).collect()
    })
    .unwrap()
}

fn family_strategy(p: usize) -> impl Strategy<Value = ChannelFamily> {
    (2usize..=3, 2usize..=3).prop_flat_map(move |(k, ell)| {
        prop::collection::vec(0.05f64..1.0, k.pow(p as u32) * ell)
            .prop_map(move |w| symmetric_family(p, k, ell, &w))
    })
}

fn symmetric_q() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=3, 0.0f64..4.0, 0.0f64..4.0).prop_map(|(k, a, b)| {
        (0..k).map(|i| (0..k).map(|j| if i == j { a } else { b }).collect()).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn centered_channels_sum_to_zero(fam in family_strategy(2)) {
        for y in 0..fam.ell() {
            let s: f64 = (0..fam.num_tuples()).map(|a| fam.centered_by_index(a)[y]).sum();
            prop_assert!(s.abs() < 1e-12);
        }
        let audit = fam.audit(1e-10);
        prop_assert!(!audit.strongly_symmetric || audit.weakly_symmetric);
    }

    #[test]
    fn resample_composes(fam in family_strategy(2), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
        let a = fam.resample(e1).unwrap().resample(e2).unwrap();
        let b = fam.resample(1.0 - (1.0 - e1) * (1.0 - e2)).unwrap();
        for (x, y) in a.channels().iter().flatten().zip(b.channels().iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_calculus_scales_tensor(fam in family_strategy(2), eta in 0.0f64..0.95) {
        let t = characteristic_tensor(&fam);
        let r = characteristic_tensor(&fam.resample(eta).unwrap());
        let c = characteristic_tensor(&fam.censor(eta).unwrap());
        prop_assert!(r.max_abs_diff(&t.scaled((1.0 - eta).powi(2))) < 1e-12);
        prop_assert!(c.max_abs_diff(&t.scaled(1.0 - eta)) < 1e-12);
    }

    #[test]
    fn flattening_is_psd_and_contracts_to_zero(fam in family_strategy(2)) {
        let t = characteristic_tensor(&fam);
        let k = fam.k();
        let kp = fam.num_tuples();
        // G[a][b] = p! T_{(a1,b1),(a2,b2)}
        let g = DMatrix::from_fn(kp, kp, |a, b| {
            let (a1, a2, b1, b2) = (a / k, a % k, b / k, b % k);
            2.0 * t.get(&[a1 * k + b1, a2 * k + b2])
        });
        let min = SymmetricEigen::new(g).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(min >= -1e-10);
        let ones = vec![1.0; k * k];
        prop_assert!(t.contract_all(&ones).unwrap().abs() < 1e-10);
    }

    #[test]
    fn order_three_flattening_is_psd(fam in family_strategy(3)) {
        let t = characteristic_tensor(&fam);
        let k = fam.k();
        let kp = fam.num_tuples();
        let g = DMatrix::from_fn(kp, kp, |a, b| {
            let ai = [a / (k * k), (a / k) % k, a % k];
            let bi = [b / (k * k), (b / k) % k, b % k];
            6.0 * t.get(&[ai[0] * k + bi[0], ai[1] * k + bi[1], ai[2] * k + bi[2]])
        });
        let min = SymmetricEigen::new(g).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(min >= -1e-10);
    }

    #[test]
    fn telescoping_and_expansion_identity(fam in family_strategy(2), z in prop::collection::vec(0u64..6, 4..=9)) {
        let prof = marginal_profile(&fam, DEFAULT_ZERO_TOL).unwrap();
        let t = characteristic_tensor(&fam);
        let d = fam.k() * fam.k();
        for j in 2..=fam.p() {
            let m = marginalize(prof.tensor(j)).unwrap();
            prop_assert!(m.max_abs_diff(prof.tensor(j - 1)) < 1e-12);
        }
        prop_assert!(prof.zeroth.abs() < 1e-12);
        let mut counts = z.clone();
        counts.resize(d, 1);
        if counts.iter().sum::<u64>() > 0 {
            let lhs = overlap_value(&t, &counts).unwrap();
            let rhs = marginal_expansion(&prof, &counts).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn sbm_marginal_order_at_least_two(q in symmetric_q(), n in 10u64..200) {
        let fam = build_sbm(&q, n).unwrap();
        let prof = marginal_profile(&fam, DEFAULT_ZERO_TOL).unwrap();
        prop_assert!(prof.marginal_order.value().is_none_or(|j| j >= 2));
    }

    #[test]
    fn hsbm_marginal_order_at_least_two(a in 0.0f64..3.0, b in 0.0f64..3.0, k in 2usize..=3) {
        let fam = build_hsbm(&symmetric_interaction_tensor(3, k, a, b), 12).unwrap();
        let prof = marginal_profile(&fam, DEFAULT_ZERO_TOL).unwrap();
        prop_assert!(prof.marginal_order.value().is_none_or(|j| j >= 2));
    }

    #[test]
    fn power_method_never_exceeds_exact(entries in prop::collection::vec(-1.0f64..1.0, 9), w in prop::collection::vec(-1.0f64..1.0, 3)) {
        let mut sym = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                sym[i * 3 + j] = 0.5 * (entries[i * 3 + j] + entries[j * 3 + i]);
            }
        }
        let t = SymTensor::new(2, 3, sym).unwrap();
        let exact = injective_norm(&t, &InjectiveOptions::default()).value;
        let opts = InjectiveOptions { force_iterative: true, restarts: 20, iters: 5000, ..Default::default() };
        let it = injective_norm(&t, &opts);
        prop_assert!(it.value <= exact + 1e-10);
        prop_assert!((it.value - exact).abs() < 1e-8);

        let r1 = SymTensor::rank_one(0.7, &w, 3);
        let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let exact = 0.7 * norm.powi(3);
        let it = injective_norm(&r1, &opts);
        prop_assert!(it.value <= exact + 1e-10);
        prop_assert!((it.value - exact).abs() < 1e-8);
    }

    #[test]
    fn injective_norm_between_entry_probe_and_frobenius(entries in prop::collection::vec(-1.0f64..1.0, 8)) {
        let (t, _) = SymTensor::symmetrized(3, 2, entries).unwrap();
        let v = injective_norm(&t, &InjectiveOptions::default()).value;
        prop_assert!(v <= t.frobenius() + 1e-12);
        for u in [[1.0, 0.0], [0.0, 1.0], [std::f64::consts::FRAC_1_SQRT_2; 2]] {
            prop_assert!(t.contract_all(&u).unwrap().abs() <= v + 1e-9);
        }
    }

    #[test]
    fn pearson_statistic_range(z in prop::collection::vec(0u64..50, 2..8)) {
        let x = pearson_statistic(&z);
        let n: u64 = z.iter().sum();
        prop_assert!(x >= -1e-9);
        prop_assert!(x <= (z.len() as u64 * n) as f64 + 1e-9);
    }

    #[test]
    fn instances_are_reproducible(fam in family_strategy(2), seed in any::<u64>(), planted in any::<bool>()) {
        let a = sample(&fam, 9, planted, seed).unwrap();
        let b = sample(&fam, 9, planted, seed).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert!(a.validate().is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bounds_nondecreasing_in_degree(fam in family_strategy(2), n in 3u64..12) {
        let t = characteristic_tensor(&fam);
        let mut last = 0.0;
        for d in 0..=8 {
            let v = tensor_bound_exact(&t, n, d, 1e7).unwrap().value;
            prop_assert!(v >= last - 1e-12);
            last = v;
        }
    }

    #[test]
    fn chain_holds_on_small_instances(fam in family_strategy(2), n in 3usize..=4) {
        prop_assume!(fam.k() == 2 && fam.audit(1e-10).weakly_symmetric);
        let inst = TinyInstance::new(fam, n).unwrap();
        for d in 1..=4 {
            prop_assert!(verify_chain(&inst, d).is_ok());
        }
    }

    #[test]
    fn calculus_scales_relaxation(fam in family_strategy(2), eta in 0.05f64..0.9) {
        let base = marginal_profile(&fam, DEFAULT_ZERO_TOL).unwrap();
        let cens = marginal_profile(&fam.censor(eta).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        let res = marginal_profile(&fam.resample(eta).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        for j in 1..=2 {
            let b = base.norm(j).value;
            prop_assert!((cens.norm(j).value - (1.0 - eta) * b).abs() < 1e-12);
            prop_assert!((res.norm(j).value - (1.0 - eta).powi(2) * b).abs() < 1e-12);
        }
        let opts = BoundOptions::default();
        let direct = bound_corollary(&cens, 6, 3, CorollaryForm::Zbar, &opts).unwrap().value;
        prop_assert!(direct.is_finite());
    }
}
