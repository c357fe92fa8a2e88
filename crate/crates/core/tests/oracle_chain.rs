use gsbm_core::channel::{
    build_sbm, build_truth_or_haar, build_xor_sat, symmetric_interaction_matrix, GroupMode,
};
use gsbm_core::numeric::{digits, subsets_lex};
use gsbm_core::oracle::{chain_report, chain_report_with_tensor, channel_overlap, verify_chain, TinyInstance};
use gsbm_core::{characteristic_tensor, ChannelFamily, FiniteGroup, GsbmError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sbm31() -> ChannelFamily {
    build_sbm(&symmetric_interaction_matrix(2, 3.0, 1.0), 4).unwrap()
}

fn suite() -> Vec<(&'static str, ChannelFamily)> {
    vec![
        ("2-sbm(3,1)", sbm31()),
        ("xor(2,0.4)", build_xor_sat(2, 0.4).unwrap()),
        ("sync-z2(0.5)", build_truth_or_haar(&FiniteGroup::cyclic(2).unwrap(), 0.5, GroupMode::Sync).unwrap()),
        ("censored-sbm(0.3)", sbm31().censor(0.3).unwrap()),
    ]
}

fn random_family(rng: &mut ChaCha8Rng, p: usize, k: usize, ell: usize) -> ChannelFamily {
    let mu: Vec<Vec<f64>> = (0..k.pow(p as u32))
        .map(|_| {
            let w: Vec<f64> = (0..ell).map(|_| rng.random_range(0.1..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect();
    ChannelFamily::new(p, k, ell, mu).unwrap()
}

/// Likelihood ratio with the label sum outermost and every state filled in one pass.
fn ratios_x_outer(fam: &ChannelFamily, n: usize) -> Vec<f64> {
    let subsets = subsets_lex(n, fam.p());
    let big_n = subsets.len();
    let states = fam.ell().pow(big_n as u32);
    let mut out = vec![0.0; states];
    let kn = fam.k().pow(n as u32);
    for xi in 0..kn {
        let x = digits(xi, fam.k(), n);
        for (yi, slot) in out.iter_mut().enumerate() {
            let y = digits(yi, fam.ell(), big_n);
            let mut num = 1.0;
            let mut den = 1.0;
            for (s, &sym) in subsets.iter().zip(&y) {
                let a: Vec<usize> = s.iter().map(|&i| x[i]).collect();
                num *= fam.channel_of(&a).unwrap()[sym];
                den *= fam.average_channel()[sym];
            }
            *slot += num / den;
        }
    }
    out.iter().map(|v| v / kn as f64).collect()
}

#[test]
fn likelihood_ratio_matches_double_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let fam = random_family(&mut rng, 2, 2, 2);
        let inst = TinyInstance::new(fam.clone(), 3).unwrap();
        let reference = ratios_x_outer(&fam, 3);
        let ours = inst.all_likelihood_ratios();
        for (a, b) in ours.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn likelihood_ratio_normalized() {
    for (_, fam) in suite() {
        let inst = TinyInstance::new(fam, 4).unwrap();
        let ls = inst.all_likelihood_ratios();
        let qs = inst.all_null_probabilities();
        let mean: f64 = ls.iter().zip(&qs).map(|(l, q)| l * q).sum();
        assert!((mean - 1.0).abs() < 1e-10);
        assert!((qs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
    assert!(TinyInstance::new(sbm31(), 4).unwrap().likelihood_ratio(&[0, 0]).is_err());
}

#[test]
fn efron_stein_components_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fam = random_family(&mut rng, 2, 2, 2);
    let inst = TinyInstance::new(fam, 4).unwrap();
    let qs = inst.all_null_probabilities();
    let comps = inst.efron_stein_components(6);
    assert_eq!(comps.len(), 64);
    let mut total = vec![0.0; qs.len()];
    for i in 0..comps.len() {
        for (t, f) in total.iter_mut().zip(&comps[i].1) {
            *t += f;
        }
        for _ in 0..4 {
            let j = rng.random_range(0..comps.len());
            if i == j {
                continue;
            }
            let ip: f64 = qs.iter().zip(&comps[i].1).zip(&comps[j].1).map(|((q, a), b)| q * a * b).sum();
            assert!(ip.abs() < 1e-10, "U={} V={} inner {ip}", comps[i].0, comps[j].0);
        }
    }
    // the components sum back to the likelihood ratio
    for (a, b) in total.iter().zip(inst.all_likelihood_ratios()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn cadv_monotone_and_complete() {
    for (_, fam) in suite() {
        let inst = TinyInstance::new(fam, 4).unwrap();
        assert!((inst.cadv_exact(0) - 1.0).abs() < 1e-12);
        let mut last = 0.0;
        for d in 0..=inst.num_coords() {
            let v = inst.cadv_exact(d);
            assert!(v >= last - 1e-12);
            last = v;
        }
        assert!((last - inst.full_norm()).abs() < 1e-10);
    }
}

#[test]
fn golden_cadv_two_sbm() {
    // n = 4, α = 3, β = 1: edges are pairwise independent under P, so the
    // degree-2 projection is the constant; triangles enter at degree 3.
    let inst = TinyInstance::new(sbm31(), 4).unwrap();
    let d2 = inst.cadv_exact(2);
    let d3 = inst.cadv_exact(3);
    assert!((d2 - 1.0).abs() < 1e-12, "{d2:.17e}");
    assert!((d3 * d3 - 1.0625).abs() < 1e-12, "{:.17e}", d3 * d3);
}

#[test]
fn overlap_matches_tensor_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (_, fam) in suite() {
        let k = fam.k();
        let t = characteristic_tensor(&fam);
        let inst = TinyInstance::new(fam, 4).unwrap();
        for _ in 0..1000 {
            let x1: Vec<usize> = (0..4).map(|_| rng.random_range(0..k)).collect();
            let x2: Vec<usize> = (0..4).map(|_| rng.random_range(0..k)).collect();
            let mut z = vec![0.0; k * k];
            for i in 0..4 {
                z[x1[i] * k + x2[i]] += 1.0;
            }
            let r_all = inst.overlap_r(&x1, &x2, false).unwrap();
            assert!((r_all - t.contract_all(&z).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn overlap_diagonal_terms_at_smallest_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let raw = random_family(&mut rng, 2, 2, 3);
    let fam = ChannelFamily::from_fn(2, 2, 3, |a| {
        let mut sorted = a.to_vec();
        sorted.sort();
        raw.channel_of(&sorted).unwrap().to_vec()
    })
    .unwrap();
    let r = channel_overlap(&fam);
    let t = fam.num_tuples();
    let inst = TinyInstance::new(fam.clone(), 2).unwrap();
    for x1 in [[0, 1], [1, 1], [0, 0]] {
        for x2 in [[1, 0], [0, 1], [1, 1]] {
            let diag: f64 = (0..2)
                .map(|i| {
                    let a = fam.tuple_index(&[x1[i], x1[i]]).unwrap();
                    let b = fam.tuple_index(&[x2[i], x2[i]]).unwrap();
                    r[a * t + b]
                })
                .sum();
            let distinct = inst.overlap_r(&x1, &x2, true).unwrap();
            let all = inst.overlap_r(&x1, &x2, false).unwrap();
            assert!((all - distinct - 0.5 * diag).abs() < 1e-12);
        }
    }
    let trivial = build_sbm(&symmetric_interaction_matrix(2, 1.0, 1.0), 4).unwrap();
    let inst = TinyInstance::new(trivial, 3).unwrap();
    assert_eq!(inst.overlap_r(&[0, 1, 1], &[1, 0, 1], true).unwrap(), 0.0);
    assert!(inst.overlap_r(&[0, 1, 2], &[1, 0, 1], true).is_err());
}

#[test]
fn chain_holds_on_suite() {
    for (name, fam) in suite() {
        let inst = TinyInstance::new(fam, 4).unwrap();
        for d in 1..=4 {
            let rep = verify_chain(&inst, d).unwrap_or_else(|e| panic!("{name} D={d}: {e}"));
            assert!((rep.overlap_all - rep.bound_exact).abs() < 1e-10);
            for l in &rep.links {
                assert!(l.slack >= -1e-9, "{name} D={d} {}", l.link);
            }
        }
    }
}

#[test]
fn chain_holds_for_weakly_symmetric_sync_z3() {
    let fam = build_truth_or_haar(&FiniteGroup::cyclic(3).unwrap(), 0.4, GroupMode::Sync).unwrap();
    assert!(!fam.audit(1e-10).strongly_symmetric);
    let inst = TinyInstance::new(fam, 4).unwrap();
    for d in 1..=3 {
        verify_chain(&inst, d).unwrap();
    }
}

#[test]
fn mutated_tensor_breaks_chain() {
    let inst = TinyInstance::new(sbm31(), 4).unwrap();
    let t = characteristic_tensor(inst.family());
    let v = t.get(&[0, 0]);
    let bad = t.with_entry_unchecked(&[0, 0], -v);
    let rep = chain_report_with_tensor(&inst, 2, &bad).unwrap();
    assert!(!rep.passed);
    assert!(rep.first_violation().is_some());
    let ok = chain_report(&inst, 2).unwrap();
    assert!(ok.passed);
    let json = serde_json::to_string(&ok).unwrap();
    assert!(json.contains("\"D\":2"));
}

#[test]
fn verify_chain_reports_violated_link() {
    let inst = TinyInstance::new(sbm31(), 4).unwrap();
    let rep = verify_chain(&inst, 1).unwrap();
    assert_eq!(rep.links.len(), 4);
    let err = GsbmError::ChainViolation {
        link: rep.links[0].link.clone(),
        lhs: 2.0,
        rhs: 1.0,
    };
    assert!(err.to_string().contains("(i)"));
}
