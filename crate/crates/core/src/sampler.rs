//! Drawing GSBM instances under the null and planted measures, instance
//! serialization, and a chi-squared goodness-of-fit harness for channels.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::channel::ChannelFamily;
use crate::error::{invalid, GsbmError, Result};
use crate::numeric::{binomial_u128, colex_rank, subsets_lex};

/// Largest number of observations [`sample`] will materialize.
pub const MAX_OBSERVATIONS: u128 = 50_000_000;

/// A sampled observation array: one symbol per sorted p-subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub ell: usize,
    pub seed: u64,
    /// Hidden labels, present exactly for planted draws.
    pub labels: Option<Vec<usize>>,
    /// `[i1, …, ip, symbol]`, subsets in ascending lexicographic order.
    pub obs: Vec<Vec<usize>>,
}

impl Instance {
    pub fn is_planted(&self) -> bool {
        self.labels.is_some()
    }

    /// Checks the structural invariants, e.g. after loading from disk.
    pub fn validate(&self) -> Result<()> {
        let expected = binomial_u128(self.n as u64, self.p as u64).unwrap_or(u128::MAX);
        if self.obs.len() as u128 != expected {
            return Err(invalid(format!("{} observations, expected C(n,p) = {expected}", self.obs.len())));
        }
        if let Some(x) = &self.labels {
            if x.len() != self.n || x.iter().any(|&a| a >= self.k) {
                return Err(GsbmError::LabelOutOfRange(x.clone()));
            }
        }
        let mut prev: Option<&[usize]> = None;
        for row in &self.obs {
            if row.len() != self.p + 1 {
                return Err(invalid("observation rows must be [i1, ..., ip, symbol]"));
            }
            let (s, sym) = row.split_at(self.p);
            if s.windows(2).any(|w| w[0] >= w[1]) || s.last().is_some_and(|&i| i >= self.n) {
                return Err(invalid(format!("subset {s:?} is not sorted or out of range")));
            }
            if sym[0] >= self.ell {
                return Err(invalid(format!("symbol {} outside alphabet of size {}", sym[0], self.ell)));
            }
            if prev.is_some_and(|q| q >= s) {
                return Err(invalid("observation keys are not strictly ascending"));
            }
            prev = Some(s);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(s).map_err(|e| GsbmError::Spec(format!("invalid instance: {e}")))?;
        inst.validate()?;
        Ok(inst)
    }

    /// Edge list `i,j,symbol` for `p = 2`. With `skip` set, rows carrying
    /// that symbol (for graph SBMs, 1 = "no edge") are left out.
    pub fn to_csv_edges(&self, skip: Option<usize>) -> Result<String> {
        if self.p != 2 {
            return Err(GsbmError::Unsupported(format!("edge-list export needs p = 2, got {}", self.p)));
        }
        let mut out = String::from("i,j,symbol\n");
        for row in &self.obs {
            if Some(row[2]) == skip {
                continue;
            }
            writeln!(out, "{},{},{}", row[0], row[1], row[2]).expect("write to string");
        }
        Ok(out)
    }

    /// Number of observations with each symbol.
    pub fn symbol_counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.ell];
        for row in &self.obs {
            c[row[self.p]] += 1;
        }
        c
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Inverse-CDF draw from a probability vector.
pub fn draw_symbol<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &q) in probs.iter().enumerate() {
        if q <= 0.0 {
            continue;
        }
        acc += q;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Draws an instance. Labels come from stream 0 of `seed`; the subset with
/// colexicographic rank `r` uses stream `r + 1`, so each observation is
/// reproducible regardless of iteration order.
pub fn sample(fam: &ChannelFamily, n: usize, planted: bool, seed: u64) -> Result<Instance> {
    let p = fam.p();
    if n < p {
        return Err(invalid(format!("n = {n} must be at least p = {p}")));
    }
    let count = binomial_u128(n as u64, p as u64).unwrap_or(u128::MAX);
    if count > MAX_OBSERVATIONS {
        return Err(GsbmError::BudgetExceeded {
            what: "observations C(n,p)".into(),
            needed: count as f64,
            budget: MAX_OBSERVATIONS as f64,
        });
    }
    let labels = planted.then(|| {
        let mut rng = stream_rng(seed, 0);
        (0..n).map(|_| rng.random_range(0..fam.k())).collect::<Vec<usize>>()
    });
    let subsets = subsets_lex(n, p);
    let obs = subsets
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, colex_rank(&s) + 1);
            let probs = match &labels {
                Some(x) => {
                    let idx = s.iter().fold(0, |acc, &i| acc * fam.k() + x[i]);
                    fam.channel(idx)
                }
                None => fam.average_channel(),
            };
            let sym = draw_symbol(&mut rng, probs);
            let mut row = s;
            row.push(sym);
            row
        })
        .collect();
    Ok(Instance {
        n,
        p,
        k: fam.k(),
        ell: fam.ell(),
        seed,
        labels,
        obs,
    })
}

/// Goodness of fit of one channel's empirical symbol frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFit {
    /// Label tuple, or `None` for the average channel under the null.
    pub tuple: Option<Vec<usize>>,
    pub draws: u64,
    pub expected: Vec<f64>,
    pub empirical: Vec<f64>,
    pub chi2: f64,
    pub df: usize,
    /// `None` when the channel was never observed.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2Report {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub instances: usize,
    pub channels: Vec<ChannelFit>,
    pub min_p_value: Option<f64>,
}

/// Pearson goodness-of-fit of observed counts against `probs`. Symbols with
/// zero probability that were observed give p-value 0.
pub fn chi2_fit(counts: &[u64], probs: &[f64]) -> (f64, usize, Option<f64>) {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return (0.0, 0, None);
    }
    let t = total as f64;
    let mut stat = 0.0;
    let mut support = 0usize;
    for (&c, &q) in counts.iter().zip(probs) {
        if q <= 0.0 {
            if c > 0 {
                return (f64::INFINITY, 0, Some(0.0));
            }
            continue;
        }
        support += 1;
        let e = t * q;
        stat += (c as f64 - e).powi(2) / e;
    }
    let df = support.saturating_sub(1);
    if df == 0 {
        return (stat, 0, Some(1.0));
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    (stat, df, Some(dist.sf(stat)))
}

/// Draws planted instances of size `n` from `sampled` until at least
/// `samples` observations are collected, tabulates symbols per label tuple,
/// and tests each tuple's frequencies against `reference`'s channel. Pass the
/// same family twice for a correctness check, or a mutated reference as a
/// negative control.
pub fn empirical_chi2_against(
    sampled: &ChannelFamily,
    reference: &ChannelFamily,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<Chi2Report> {
    if sampled.p() != reference.p() || sampled.k() != reference.k() || sampled.ell() != reference.ell() {
        return Err(GsbmError::DimensionMismatch {
            expected: reference.num_tuples() * reference.ell(),
            got: sampled.num_tuples() * sampled.ell(),
        });
    }
    let per = binomial_u128(n as u64, sampled.p() as u64).unwrap_or(0) as u64;
    if per == 0 || samples == 0 {
        return Err(invalid("need n >= p and samples >= 1"));
    }
    let instances = samples.div_ceil(per) as usize;
    let ell = sampled.ell();
    let t = sampled.num_tuples();
    let mut seeds = stream_rng(seed, u64::MAX);
    let instance_seeds: Vec<u64> = (0..instances).map(|_| seeds.random()).collect();
    let tables: Vec<Vec<u64>> = instance_seeds
        .par_iter()
        .map(|&s| {
            let inst = sample(sampled, n, true, s).expect("size checked");
            let x = inst.labels.as_ref().expect("planted");
            let mut counts = vec![0u64; t * ell];
            for row in &inst.obs {
                let idx = row[..inst.p].iter().fold(0, |acc, &i| acc * inst.k + x[i]);
                counts[idx * ell + row[inst.p]] += 1;
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; t * ell];
    for table in tables {
        for (c, v) in counts.iter_mut().zip(table) {
            *c += v;
        }
    }
    let channels: Vec<ChannelFit> = (0..t)
        .map(|a| {
            let row = &counts[a * ell..(a + 1) * ell];
            let probs = reference.channel(a);
            let (chi2, df, p_value) = chi2_fit(row, probs);
            let draws: u64 = row.iter().sum();
            ChannelFit {
                tuple: Some(reference.tuple(a)),
                draws,
                expected: probs.to_vec(),
                empirical: row.iter().map(|&c| c as f64 / draws.max(1) as f64).collect(),
                chi2,
                df,
                p_value,
            }
        })
        .collect();
    let min_p_value = channels.iter().filter_map(|c| c.p_value).reduce(f64::min);
    Ok(Chi2Report {
        n,
        samples,
        seed,
        instances,
        channels,
        min_p_value,
    })
}

/// [`empirical_chi2_against`] with the family as its own reference.
pub fn empirical_chi2_distance(fam: &ChannelFamily, n: usize, samples: u64, seed: u64) -> Result<Chi2Report> {
    empirical_chi2_against(fam, fam, n, samples, seed)
}

/// Fit of many direct draws from a single probability vector.
pub fn single_channel_fit(probs: &[f64], draws: u64, seed: u64) -> ChannelFit {
    let mut rng = stream_rng(seed, 0);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..draws {
        counts[draw_symbol(&mut rng, probs)] += 1;
    }
    let (chi2, df, p_value) = chi2_fit(&counts, probs);
    ChannelFit {
        tuple: None,
        draws,
        expected: probs.to_vec(),
        empirical: counts.iter().map(|&c| c as f64 / draws.max(1) as f64).collect(),
        chi2,
        df,
        p_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_sbm, build_xor_sat, symmetric_interaction_matrix};

    #[test]
    fn instance_shape_and_determinism() {
        let fam = build_sbm(&symmetric_interaction_matrix(2, 3.0, 1.0), 30).unwrap();
        let a = sample(&fam, 30, true, 9).unwrap();
        a.validate().unwrap();
        assert_eq!(a.obs.len(), 435);
        assert_eq!(a.to_json(), sample(&fam, 30, true, 9).unwrap().to_json());
        let null = sample(&fam, 30, false, 9).unwrap();
        assert!(null.labels.is_none());
        let back = Instance::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert!(sample(&fam, 1, false, 0).is_err());
    }

    #[test]
    fn csv_export() {
        let fam = build_sbm(&symmetric_interaction_matrix(2, 3.0, 1.0), 10).unwrap();
        let inst = sample(&fam, 10, false, 1).unwrap();
        let all = inst.to_csv_edges(None).unwrap();
        assert_eq!(all.lines().count(), 46);
        let edges = inst.to_csv_edges(Some(1)).unwrap();
        assert_eq!(edges.lines().count() as u64, 1 + inst.symbol_counts()[0]);
        let xor = sample(&build_xor_sat(3, 0.5).unwrap(), 5, true, 0).unwrap();
        assert!(xor.to_csv_edges(None).is_err());
    }

    #[test]
    fn chi2_fit_edge_cases() {
        assert_eq!(chi2_fit(&[0, 0], &[0.5, 0.5]).2, None);
        assert_eq!(chi2_fit(&[5, 0], &[1.0, 0.0]).2, Some(1.0));
        assert_eq!(chi2_fit(&[5, 1], &[1.0, 0.0]).2, Some(0.0));
        let (_, df, p) = chi2_fit(&[50, 50], &[0.5, 0.5]);
        assert_eq!(df, 1);
        assert!((p.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corrupted_instances_rejected() {
        let fam = build_sbm(&symmetric_interaction_matrix(2, 3.0, 1.0), 10).unwrap();
        let mut inst = sample(&fam, 6, true, 2).unwrap();
        inst.obs.swap(0, 1);
        assert!(inst.validate().is_err());
        let mut inst = sample(&fam, 6, true, 2).unwrap();
        inst.obs.pop();
        assert!(inst.validate().is_err());
    }
}
