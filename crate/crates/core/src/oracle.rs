//! Brute-force oracles on tiny instances: the likelihood ratio, the exact
//! coordinate advantage via the Efron–Stein decomposition, the total
//! overlaps `R` and `R′`, and the inequality chain linking them to the
//! multinomial bounds.
//!
//! Nothing here goes through the characteristic tensor except links (iv)
//! and (v) of the chain, which are the quantities being checked.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_corollary, exp_truncated, tensor_bound_exact, BoundOptions, CorollaryForm};
use crate::channel::ChannelFamily;
use crate::characteristic::{characteristic_tensor, MarginalProfile, DEFAULT_ZERO_TOL};
use crate::error::{invalid, GsbmError, Result};
use crate::injective::InjectiveOptions;
use crate::numeric::{binomial_u128, digits, factorial, subsets_lex, CompensatedSum};
use crate::tensor::SymTensor;

/// Cap on `ℓ^N`, the number of observation states.
pub const STATE_BUDGET: f64 = 1e7;
/// Cap on `k^n`, the number of label vectors.
pub const LABEL_BUDGET: f64 = 1e6;
/// Allowed violation of an inequality link.
pub const CHAIN_SLACK: f64 = 1e-9;
/// Allowed mismatch between the two parameterizations of link (iii)=(iv).
pub const CHAIN_EQUALITY_TOL: f64 = 1e-10;

/// A GSBM at population size `n` small enough to enumerate every
/// observation state.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    fam: ChannelFamily,
    n: usize,
    subsets: Vec<Vec<usize>>,
    states: usize,
}

impl TinyInstance {
    pub fn new(fam: ChannelFamily, n: usize) -> Result<Self> {
        let p = fam.p();
        if n < p {
            return Err(invalid(format!("n = {n} must be at least p = {p}")));
        }
        let big_n = binomial_u128(n as u64, p as u64).unwrap_or(u128::MAX) as f64;
        let states = (fam.ell() as f64).powf(big_n);
        if states > STATE_BUDGET {
            return Err(GsbmError::BudgetExceeded {
                what: "observation states ell^N".into(),
                needed: states,
                budget: STATE_BUDGET,
            });
        }
        let labels = (fam.k() as f64).powi(n as i32);
        if labels > LABEL_BUDGET {
            return Err(GsbmError::BudgetExceeded {
                what: "label vectors k^n".into(),
                needed: labels,
                budget: LABEL_BUDGET,
            });
        }
        Ok(Self {
            subsets: subsets_lex(n, p),
            states: states as usize,
            fam,
            n,
        })
    }

    pub fn family(&self) -> &ChannelFamily {
        &self.fam
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of observation coordinates `C(n, p)`.
    pub fn num_coords(&self) -> usize {
        self.subsets.len()
    }

    /// Number of observation states `ℓ^N`.
    pub fn num_states(&self) -> usize {
        self.states
    }

    /// The p-subsets in lexicographic order.
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Symbols of state `index`, coordinate 0 most significant.
    pub fn state(&self, index: usize) -> Vec<usize> {
        digits(index, self.fam.ell(), self.num_coords())
    }

    /// Label tuple `x_S` in ascending index order.
    fn tuple_index(&self, x: &[usize], s: &[usize]) -> usize {
        s.iter().fold(0, |acc, &i| acc * self.fam.k() + x[i])
    }

    fn labels(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let k = self.fam.k();
        (0..k.pow(self.n as u32)).map(move |i| digits(i, k, self.n))
    }

    /// `Q(y) = Π_S μ_avg(y_S)`.
    pub fn null_probability(&self, y: &[usize]) -> f64 {
        let avg = self.fam.average_channel();
        y.iter().map(|&s| avg[s]).product()
    }

    /// `(dP/dQ)(y) = k^{-n} Σ_x Π_S μ_{x_S}(y_S) / μ_avg(y_S)`.
    pub fn likelihood_ratio(&self, y: &[usize]) -> Result<f64> {
        if y.len() != self.num_coords() || y.iter().any(|&s| s >= self.fam.ell()) {
            return Err(invalid("observation out of range"));
        }
        let avg = self.fam.average_channel();
        let total: CompensatedSum = self
            .labels()
            .map(|x| {
                self.subsets
                    .iter()
                    .zip(y)
                    .map(|(s, &sym)| self.fam.channel(self.tuple_index(&x, s))[sym] / avg[sym])
                    .product::<f64>()
            })
            .collect();
        Ok(total.value() / (self.fam.k() as f64).powi(self.n as i32))
    }

    /// Likelihood ratio at every state, in state-index order.
    pub fn all_likelihood_ratios(&self) -> Vec<f64> {
        (0..self.states)
            .into_par_iter()
            .map(|i| self.likelihood_ratio(&self.state(i)).expect("state in range"))
            .collect()
    }

    /// Null probabilities of every state.
    pub fn all_null_probabilities(&self) -> Vec<f64> {
        (0..self.states).map(|i| self.null_probability(&self.state(i))).collect()
    }

    /// Efron–Stein components `f_U` for `|U| ≤ max_size`, each as a function
    /// on the full state space, keyed by the coordinate bitmask `U`.
    pub fn efron_stein_components(&self, max_size: usize) -> Vec<(u64, Vec<f64>)> {
        let es = EfronStein::new(self);
        let big_n = self.num_coords();
        (0u64..1 << big_n)
            .filter(|u| u.count_ones() as usize <= max_size)
            .map(|u| {
                let table = es.component(u);
                let full = (0..self.states)
                    .map(|i| table[project(&self.state(i), u, self.fam.ell())])
                    .collect();
                (u, full)
            })
            .collect()
    }

    /// `CAdv_{≤D} = ‖proj_{V≤D} dP/dQ‖_{L²(Q)}` via the Efron–Stein decomposition.
    pub fn cadv_exact(&self, degree: usize) -> f64 {
        let es = EfronStein::new(self);
        let big_n = self.num_coords();
        let avg = self.fam.average_channel();
        let ell = self.fam.ell();
        let norms: Vec<f64> = (0u64..1 << big_n)
            .into_par_iter()
            .filter(|u| u.count_ones() as usize <= degree)
            .map(|u| {
                let table = es.component(u);
                let size = u.count_ones() as usize;
                table
                    .iter()
                    .enumerate()
                    .map(|(a, f)| {
                        let w: f64 = digits(a, ell, size).iter().map(|&s| avg[s]).product();
                        w * f * f
                    })
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        norms.into_iter().collect::<CompensatedSum>().value().sqrt()
    }

    /// `√(E_Q (dP/dQ)²)`.
    pub fn full_norm(&self) -> f64 {
        let ls = self.all_likelihood_ratios();
        let qs = self.all_null_probabilities();
        ls.iter()
            .zip(&qs)
            .map(|(l, q)| q * l * l)
            .collect::<CompensatedSum>()
            .value()
            .sqrt()
    }

    /// Total overlap between two label vectors. `distinct_only` sums the
    /// channel overlap over increasing index tuples (`R`); otherwise over
    /// all of `[n]^p` divided by `p!` (`R′`).
    pub fn overlap_r(&self, x1: &[usize], x2: &[usize], distinct_only: bool) -> Result<f64> {
        let k = self.fam.k();
        if x1.len() != self.n || x2.len() != self.n || x1.iter().chain(x2).any(|&a| a >= k) {
            return Err(GsbmError::LabelOutOfRange(x1.iter().chain(x2).copied().collect()));
        }
        Ok(self.overlap_with(&channel_overlap(&self.fam), x1, x2, distinct_only))
    }

    fn overlap_with(&self, r: &[f64], x1: &[usize], x2: &[usize], distinct_only: bool) -> f64 {
        let t = self.fam.num_tuples();
        let p = self.fam.p();
        if distinct_only {
            self.subsets
                .iter()
                .map(|s| r[self.tuple_index(x1, s) * t + self.tuple_index(x2, s)])
                .collect::<CompensatedSum>()
                .value()
        } else {
            let all: CompensatedSum = (0..self.n.pow(p as u32))
                .map(|flat| {
                    let idx = digits(flat, self.n, p);
                    r[self.tuple_index(x1, &idx) * t + self.tuple_index(x2, &idx)]
                })
                .collect();
            all.value() / factorial(p as u64)
        }
    }

    /// `E_{x1,x2} exp^{≤D}(R)` (or `R′`) over independent uniform labels.
    pub fn expected_overlap_exp(&self, degree: u32, distinct_only: bool) -> f64 {
        let r = channel_overlap(&self.fam);
        let labels: Vec<Vec<usize>> = self.labels().collect();
        let partial: Vec<f64> = labels
            .par_iter()
            .map(|x1| {
                labels
                    .iter()
                    .map(|x2| exp_truncated(self.overlap_with(&r, x1, x2, distinct_only), degree))
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        let total = partial.into_iter().collect::<CompensatedSum>().value();
        total / (labels.len() as f64).powi(2)
    }
}

/// Channel overlap `R(a, b) = E_{y∼μ_avg}[(dμ_a/dμ_avg − 1)(dμ_b/dμ_avg − 1)]`,
/// row-major over tuple indices, computed straight from the channels.
pub fn channel_overlap(fam: &ChannelFamily) -> Vec<f64> {
    let t = fam.num_tuples();
    let avg = fam.average_channel();
    let lr: Vec<Vec<f64>> = (0..t)
        .map(|a| fam.channel(a).iter().zip(avg).map(|(m, q)| m / q - 1.0).collect())
        .collect();
    let mut out = vec![0.0; t * t];
    for a in 0..t {
        for b in 0..t {
            out[a * t + b] = (0..fam.ell())
                .map(|y| avg[y] * lr[a][y] * lr[b][y])
                .collect::<CompensatedSum>()
                .value();
        }
    }
    out
}

/// Index of the restriction of a full state to the coordinates in `mask`
/// (ascending coordinate order, first most significant).
fn project(y: &[usize], mask: u64, ell: usize) -> usize {
    y.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .fold(0, |acc, (_, &s)| acc * ell + s)
}

/// Conditional expectations `g_S(y_S) = E_Q[L | y_S]` for every `S`, memoized
/// per subset.
struct EfronStein {
    ell: usize,
    tables: Vec<Vec<f64>>,
}

impl EfronStein {
    fn new(inst: &TinyInstance) -> Self {
        let big_n = inst.num_coords();
        let ell = inst.fam.ell();
        let avg = inst.fam.average_channel();
        let ls = inst.all_likelihood_ratios();
        let states: Vec<Vec<usize>> = (0..inst.states).map(|i| inst.state(i)).collect();
        let tables = (0u64..1 << big_n)
            .into_par_iter()
            .map(|s| {
                let size = s.count_ones() as usize;
                let mut acc = vec![CompensatedSum::new(); ell.pow(size as u32)];
                for (y, l) in states.iter().zip(&ls) {
                    // weight of the complementary coordinates under Q
                    let w: f64 = y
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| s >> i & 1 == 0)
                        .map(|(_, &sym)| avg[sym])
                        .product();
                    acc[project(y, s, ell)].add(w * l);
                }
                acc.into_iter().map(|c| c.value()).collect()
            })
            .collect();
        Self { ell, tables }
    }

    /// `f_U = Σ_{S⊆U} (−1)^{|U∖S|} g_S`, as a table over assignments of `y_U`.
    fn component(&self, u: u64) -> Vec<f64> {
        let size = u.count_ones() as usize;
        let coords: Vec<usize> = (0..64).filter(|i| u >> i & 1 == 1).collect();
        let mut out = Vec::with_capacity(self.ell.pow(size as u32));
        for a in 0..self.ell.pow(size as u32) {
            let ys = digits(a, self.ell, size);
            let mut acc = CompensatedSum::new();
            // iterate subsets S of U through sub-masks of the local positions
            for local in 0u64..1 << size {
                let mut s_mask = 0u64;
                let mut idx = 0usize;
                for (j, &c) in coords.iter().enumerate() {
                    if local >> j & 1 == 1 {
                        s_mask |= 1 << c;
                        idx = idx * self.ell + ys[j];
                    }
                }
                let sign = if (size - local.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
                acc.add(sign * self.tables[s_mask as usize][idx]);
            }
            out.push(acc.value());
        }
        out
    }
}

/// One link of the chain `(i) ≤ (ii) ≤ (iii) = (iv) ≤ (v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub link: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs` for inequalities, `−|rhs − lhs|` for the equality.
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub n: usize,
    #[serde(rename = "D")]
    pub degree: u32,
    /// `CAdv_{≤D}²`.
    pub cadv_sq: f64,
    /// `E exp^{≤D}(R)`.
    pub overlap_distinct: f64,
    /// `E exp^{≤D}(R′)`.
    pub overlap_all: f64,
    /// Exact multinomial bound.
    pub bound_exact: f64,
    /// Injective-norm relaxation.
    pub bound_corollary: f64,
    pub links: Vec<ChainLink>,
    pub passed: bool,
}

impl ChainReport {
    pub fn first_violation(&self) -> Option<&ChainLink> {
        self.links.iter().find(|l| !l.holds)
    }
}

fn le_link(name: &str, lhs: f64, rhs: f64) -> ChainLink {
    let slack = rhs - lhs;
    ChainLink {
        link: name.into(),
        lhs,
        rhs,
        slack,
        holds: slack >= -CHAIN_SLACK,
    }
}

/// Computes all five chain quantities using the family's own characteristic tensor.
pub fn chain_report(inst: &TinyInstance, degree: u32) -> Result<ChainReport> {
    chain_report_with_tensor(inst, degree, &characteristic_tensor(&inst.fam))
}

/// Same as [`chain_report`] but links (iv) and (v) use the supplied tensor,
/// which lets a deliberately corrupted tensor be checked against the oracle.
pub fn chain_report_with_tensor(inst: &TinyInstance, degree: u32, t: &SymTensor) -> Result<ChainReport> {
    let n = inst.n;
    let cadv = inst.cadv_exact(degree as usize);
    let cadv_sq = cadv * cadv;
    let overlap_distinct = inst.expected_overlap_exp(degree, true);
    let overlap_all = inst.expected_overlap_exp(degree, false);
    let exact = tensor_bound_exact(t, n as u64, degree, STATE_BUDGET)?.value;
    let profile = MarginalProfile::from_tensor(t.clone(), inst.fam.k(), DEFAULT_ZERO_TOL, &InjectiveOptions::default())?;
    let corollary = bound_corollary(&profile, n as u64, degree, CorollaryForm::Zbar, &BoundOptions::default())?.value;
    let diff = (overlap_all - exact).abs();
    let links = vec![
        le_link("(i) cadv^2 <= (ii) E exp(R)", cadv_sq, overlap_distinct),
        le_link("(ii) E exp(R) <= (iii) E exp(R')", overlap_distinct, overlap_all),
        ChainLink {
            link: "(iii) E exp(R') = (iv) bound_exact".into(),
            lhs: overlap_all,
            rhs: exact,
            slack: -diff,
            holds: diff <= CHAIN_EQUALITY_TOL * overlap_all.abs().max(1.0),
        },
        le_link("(iv) bound_exact <= (v) bound_corollary", exact, corollary),
    ];
    let passed = links.iter().all(|l| l.holds);
    Ok(ChainReport {
        n,
        degree,
        cadv_sq,
        overlap_distinct,
        overlap_all,
        bound_exact: exact,
        bound_corollary: corollary,
        links,
        passed,
    })
}

/// Runs the chain and fails with the first violated link.
pub fn verify_chain(inst: &TinyInstance, degree: u32) -> Result<ChainReport> {
    let report = chain_report(inst, degree)?;
    if let Some(l) = report.first_violation() {
        return Err(GsbmError::ChainViolation {
            link: l.link.clone(),
            lhs: l.lhs,
            rhs: l.rhs,
        });
    }
    Ok(report)
}
