//! Discrete channel families (generalized stochastic block models), their
//! standing-assumption audit, the named model builders and the channel
//! calculus (resampling and censorship).
//!
//! Label tuples `a ∈ [k]^p` are 0-based and stored row-major, first label
//! most significant. No canonical sorting is applied: `(g, h)` and `(h, g)`
//! are distinct channels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, GsbmError, Result};
use crate::group::FiniteGroup;
use crate::numeric::{binomial, digits, permutations, undigits, CompensatedSum};
use crate::tensor::SymTensor;

/// Channels must sum to one within this tolerance.
pub const PROBABILITY_TOL: f64 = 1e-12;
/// Entries below `-NEGATIVE_TOL` are rejected; smaller negatives are clamped to zero.
pub const NEGATIVE_TOL: f64 = 1e-14;
/// Default tolerance of [`ChannelFamily::audit`].
pub const DEFAULT_AUDIT_TOL: f64 = 1e-10;
/// Default work budget (`k^{2p}·p!`) above which the audit logs a cost warning.
pub const DEFAULT_AUDIT_BUDGET: f64 = 1e8;
/// Tolerance for the all-ones eigenvector condition on interaction matrices/tensors.
pub const INTERACTION_TOL: f64 = 1e-10;

/// A family of probability vectors `μ_a` on the alphabet `[ell]`, one per label tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFamily {
    p: usize,
    k: usize,
    ell: usize,
    mu: Vec<f64>,
    avg: Vec<f64>,
}

/// Result of checking non-triviality and the two symmetry notions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelAudit {
    pub nontrivial: bool,
    pub weakly_symmetric: bool,
    pub strongly_symmetric: bool,
    /// Largest violation of the weak-symmetry identity.
    pub max_symmetry_defect: f64,
    /// Largest `|μ_a(y) − μ_{a∘σ}(y)|`.
    pub max_strong_defect: f64,
    /// Regularity is automatic for non-degenerate discrete families.
    pub regular: bool,
}

/// Observation rule for truth-or-Haar group models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupMode {
    /// Observe `g·h⁻¹`.
    Sync,
    /// Observe `g·h`.
    Sumset,
}

impl ChannelFamily {
    /// Validates and builds a family. `mu[i]` is the channel of the label tuple
    /// with row-major index `i`.
    pub fn new(p: usize, k: usize, ell: usize, mu: Vec<Vec<f64>>) -> Result<Self> {
        if p < 2 {
            return Err(invalid(format!("arity p = {p} must be at least 2")));
        }
        if k < 1 || ell < 1 {
            return Err(invalid("k and ell must be at least 1"));
        }
        let tuples = k
            .checked_pow(p as u32)
            .ok_or_else(|| invalid("k^p overflows"))?;
        if mu.len() != tuples {
            return Err(GsbmError::DimensionMismatch {
                expected: tuples,
                got: mu.len(),
            });
        }
        let mut flat = Vec::with_capacity(tuples * ell);
        for (index, row) in mu.into_iter().enumerate() {
            if row.len() != ell {
                return Err(GsbmError::InvalidChannel {
                    index,
                    reason: format!("length {} != ell = {ell}", row.len()),
                });
            }
            let mut total = CompensatedSum::new();
            for &x in &row {
                if !x.is_finite() {
                    return Err(GsbmError::InvalidChannel {
                        index,
                        reason: "non-finite entry".into(),
                    });
                }
                if x < -NEGATIVE_TOL {
                    return Err(GsbmError::InvalidChannel {
                        index,
                        reason: format!("negative entry {x}"),
                    });
                }
                total.add(x.max(0.0));
            }
            if (total.value() - 1.0).abs() > PROBABILITY_TOL {
                return Err(GsbmError::InvalidChannel {
                    index,
                    reason: format!("sums to {}", total.value()),
                });
            }
            flat.extend(row.into_iter().map(|x| x.max(0.0)));
        }
        let avg: Vec<f64> = (0..ell)
            .map(|y| {
                let s: CompensatedSum = (0..tuples).map(|a| flat[a * ell + y]).collect();
                s.value() / tuples as f64
            })
            .collect();
        if let Some(symbol) = avg.iter().position(|&m| m <= 0.0) {
            return Err(GsbmError::Degenerate { symbol });
        }
        Ok(Self {
            p,
            k,
            ell,
            mu: flat,
            avg,
        })
    }

    /// Builds a family from a function of the label tuple.
    pub fn from_fn(p: usize, k: usize, ell: usize, f: impl Fn(&[usize]) -> Vec<f64>) -> Result<Self> {
        let tuples = k.pow(p as u32);
        let mu = (0..tuples).map(|i| f(&digits(i, k, p))).collect();
        Self::new(p, k, ell, mu)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Number of label tuples, `k^p`.
    pub fn num_tuples(&self) -> usize {
        self.mu.len() / self.ell
    }

    /// Row-major index of a label tuple.
    pub fn tuple_index(&self, a: &[usize]) -> Result<usize> {
        if a.len() != self.p || a.iter().any(|&x| x >= self.k) {
            return Err(GsbmError::LabelOutOfRange(a.to_vec()));
        }
        Ok(undigits(a, self.k))
    }

    pub fn tuple(&self, index: usize) -> Vec<usize> {
        digits(index, self.k, self.p)
    }

    /// `μ_a` by tuple index.
    pub fn channel(&self, index: usize) -> &[f64] {
        &self.mu[index * self.ell..(index + 1) * self.ell]
    }

    /// `μ_a` by label tuple.
    pub fn channel_of(&self, a: &[usize]) -> Result<&[f64]> {
        Ok(self.channel(self.tuple_index(a)?))
    }

    /// `μ_avg = k^{-p} Σ_a μ_a`.
    pub fn average_channel(&self) -> &[f64] {
        &self.avg
    }

    /// `μ̄_a = μ_a − μ_avg`.
    pub fn centered_channel(&self, a: &[usize]) -> Result<Vec<f64>> {
        Ok(self.centered_by_index(self.tuple_index(a)?))
    }

    pub fn centered_by_index(&self, index: usize) -> Vec<f64> {
        self.channel(index)
            .iter()
            .zip(&self.avg)
            .map(|(m, a)| m - a)
            .collect()
    }

    /// All channels as nested vectors, in tuple-index order.
    pub fn channels(&self) -> Vec<Vec<f64>> {
        (0..self.num_tuples()).map(|i| self.channel(i).to_vec()).collect()
    }

    /// Channel overlap matrix `R(a, b) = Σ_y μ̄_a(y) μ̄_b(y) / μ_avg(y)`,
    /// row-major `k^p × k^p`.
    pub fn overlap_matrix(&self) -> Vec<f64> {
        let t = self.num_tuples();
        let scaled: Vec<Vec<f64>> = (0..t)
            .map(|a| {
                self.centered_by_index(a)
                    .iter()
                    .zip(&self.avg)
                    .map(|(c, m)| c / m.sqrt())
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; t * t];
        for a in 0..t {
            for b in a..t {
                let v: CompensatedSum = scaled[a].iter().zip(&scaled[b]).map(|(x, y)| x * y).collect();
                out[a * t + b] = v.value();
                out[b * t + a] = v.value();
            }
        }
        out
    }

    /// Audit with the default work budget.
    pub fn audit(&self, tol: f64) -> ModelAudit {
        self.audit_with_budget(tol, DEFAULT_AUDIT_BUDGET)
    }

    /// Exhaustively checks non-triviality, weak symmetry (the likelihood-ratio
    /// cross-moment identity for all `a, b, σ`) and strong symmetry.
    pub fn audit_with_budget(&self, tol: f64, budget: f64) -> ModelAudit {
        let t = self.num_tuples();
        let perms = permutations(self.p);
        let work = (t as f64).powi(2) * perms.len() as f64;
        if work > budget {
            log::warn!("symmetry audit needs ~{work:.3e} comparisons (budget {budget:.3e})");
        }
        let nontrivial = (0..t).any(|a| self.centered_by_index(a).iter().any(|c| c.abs() > tol));

        // E_avg[(dμ_a/dμ_avg)(dμ_b/dμ_avg)] = Σ_y μ_a μ_b / μ_avg
        let mut cross = vec![0.0; t * t];
        for a in 0..t {
            for b in a..t {
                let v: CompensatedSum = (0..self.ell)
                    .map(|y| self.mu[a * self.ell + y] * self.mu[b * self.ell + y] / self.avg[y])
                    .collect();
                cross[a * t + b] = v.value();
                cross[b * t + a] = v.value();
            }
        }
        let permuted: Vec<Vec<usize>> = perms
            .iter()
            .map(|perm| {
                (0..t)
                    .map(|a| {
                        let tuple = self.tuple(a);
                        let moved: Vec<usize> = perm.iter().map(|&s| tuple[s]).collect();
                        undigits(&moved, self.k)
                    })
                    .collect()
            })
            .collect();

        let mut weak_defect: f64 = 0.0;
        let mut strong_defect: f64 = 0.0;
        for map in &permuted {
            for a in 0..t {
                let sa = map[a];
                for y in 0..self.ell {
                    strong_defect = strong_defect
                        .max((self.mu[a * self.ell + y] - self.mu[sa * self.ell + y]).abs());
                }
                for b in 0..t {
                    let d = (cross[a * t + b] - cross[sa * t + map[b]]).abs();
                    weak_defect = weak_defect.max(d);
                }
            }
        }
        ModelAudit {
            nontrivial,
            weakly_symmetric: weak_defect <= tol,
            strongly_symmetric: strong_defect <= tol,
            max_symmetry_defect: weak_defect,
            max_strong_defect: strong_defect,
            regular: true,
        }
    }

    /// η-resampling: `μ'_a = (1 − η) μ_a + η μ_avg`.
    pub fn resample(&self, eta: f64) -> Result<Self> {
        check_unit(eta, "resampling rate")?;
        let mu = (0..self.num_tuples())
            .map(|a| {
                self.channel(a)
                    .iter()
                    .zip(&self.avg)
                    .map(|(m, avg)| (1.0 - eta) * m + eta * avg)
                    .collect()
            })
            .collect();
        Self::new(self.p, self.k, self.ell, mu)
    }

    /// η-censorship: each observation is replaced by a fresh symbol `•`
    /// (index `ell`) with probability η. `η = 0` returns the family
    /// unchanged; `η = 1` returns the one-symbol family, since every original
    /// symbol then has probability zero.
    pub fn censor(&self, eta: f64) -> Result<Self> {
        check_unit(eta, "censorship rate")?;
        if eta == 0.0 {
            return Ok(self.clone());
        }
        if eta == 1.0 {
            return Self::new(self.p, self.k, 1, vec![vec![1.0]; self.num_tuples()]);
        }
        let mu = (0..self.num_tuples())
            .map(|a| {
                let mut row: Vec<f64> = self.channel(a).iter().map(|m| (1.0 - eta) * m).collect();
                row.push(eta);
                row
            })
            .collect();
        Self::new(self.p, self.k, self.ell + 1, mu)
    }

    /// Serializes to the raw model-file form `{"p","k","ell","mu":{"a1,…,ap":[…]}}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mu: BTreeMap<String, Vec<f64>> = (0..self.num_tuples())
            .map(|i| {
                let key = self
                    .tuple(i)
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                (key, self.channel(i).to_vec())
            })
            .collect();
        serde_json::json!({"p": self.p, "k": self.k, "ell": self.ell, "mu": mu})
    }
}

fn check_unit(eta: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("{what} {eta} outside [0, 1]")));
    }
    Ok(())
}

/// `Q_ab = α` on the diagonal and `β` elsewhere.
pub fn symmetric_interaction_matrix(k: usize, alpha: f64, beta: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|a| (0..k).map(|b| if a == b { alpha } else { beta }).collect())
        .collect()
}

/// Order-`p` tensor with `α` on the full diagonal and `β` elsewhere.
pub fn symmetric_interaction_tensor(p: usize, k: usize, alpha: f64, beta: f64) -> SymTensor {
    let entries = (0..k.pow(p as u32))
        .map(|i| {
            let t = digits(i, k, p);
            if t.iter().all(|&x| x == t[0]) {
                alpha
            } else {
                beta
            }
        })
        .collect();
    SymTensor::new(p, k, entries).expect("diagonal pattern is symmetric")
}

/// Checks that `q` is a symmetric nonnegative matrix with `q·1 = λ·1`; returns λ.
pub fn check_interaction_matrix(q: &[Vec<f64>]) -> Result<f64> {
    let k = q.len();
    if k < 1 {
        return Err(invalid("empty interaction matrix"));
    }
    let mut scale: f64 = 1.0;
    for (a, row) in q.iter().enumerate() {
        if row.len() != k {
            return Err(GsbmError::DimensionMismatch {
                expected: k,
                got: row.len(),
            });
        }
        for (b, &x) in row.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(invalid(format!("interaction entry Q[{a}][{b}] = {x} must be nonnegative")));
            }
            if (x - q[b][a]).abs() > INTERACTION_TOL * x.abs().max(1.0) {
                return Err(GsbmError::NotSymmetric {
                    defect: (x - q[b][a]).abs(),
                });
            }
            scale = scale.max(x.abs());
        }
    }
    let sums: Vec<f64> = q.iter().map(|row| row.iter().sum()).collect();
    let lambda = sums.iter().sum::<f64>() / k as f64;
    let residual = sums.iter().fold(0.0_f64, |m, s| m.max((s - lambda).abs()));
    if residual > INTERACTION_TOL * scale {
        return Err(GsbmError::NotRegularInteraction { residual });
    }
    Ok(lambda)
}

/// Checks the all-ones condition `Q[1, …, 1, ·] = λ·1` on a symmetric
/// nonnegative interaction tensor; returns λ.
pub fn check_interaction_tensor(q: &SymTensor) -> Result<f64> {
    if q.order() < 2 {
        return Err(invalid("interaction tensor must have order at least 2"));
    }
    if let Some(x) = q.entries().iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(invalid(format!("interaction entry {x} must be nonnegative")));
    }
    let ones = vec![1.0; q.dim()];
    let vs: Vec<&[f64]> = (0..q.order() - 1).map(|_| &ones[..]).collect();
    let marg = q.partial_contract(&vs)?;
    let sums = marg.entries();
    let lambda = sums.iter().sum::<f64>() / sums.len() as f64;
    let residual = sums.iter().fold(0.0_f64, |m, s| m.max((s - lambda).abs()));
    if residual > INTERACTION_TOL * q.max_abs().max(1.0) {
        return Err(GsbmError::NotRegularInteraction { residual });
    }
    Ok(lambda)
}

/// Graph SBM: `p = ℓ = 2`, `μ_(a,b) = (Q_ab / n, 1 − Q_ab / n)`; symbol 0 is an edge.
pub fn build_sbm(q: &[Vec<f64>], n: u64) -> Result<ChannelFamily> {
    check_interaction_matrix(q)?;
    let k = q.len();
    let max = q.iter().flatten().fold(0.0_f64, |m, &x| m.max(x));
    if (n as f64) <= max {
        return Err(invalid(format!("n = {n} must exceed the largest interaction entry {max}")));
    }
    ChannelFamily::from_fn(2, k, 2, |a| {
        let e = q[a[0]][a[1]] / n as f64;
        vec![e, 1.0 - e]
    })
}

/// Hypergraph SBM: `μ_a = (Q_a / C(n, p−1), 1 − Q_a / C(n, p−1))`.
pub fn build_hsbm(q: &SymTensor, n: u64) -> Result<ChannelFamily> {
    check_interaction_tensor(q)?;
    let p = q.order();
    if (n as usize) < p {
        return Err(invalid(format!("n = {n} must be at least p = {p}")));
    }
    let denom = binomial(n, p as u64 - 1);
    if let Some(x) = q.entries().iter().find(|&&x| x / denom > 1.0) {
        return Err(invalid(format!("interaction entry {x} exceeds C(n, p-1) = {denom}")));
    }
    ChannelFamily::from_fn(p, q.dim(), 2, |a| {
        let e = q.get(a) / denom;
        vec![e, 1.0 - e]
    })
}

/// Truth-or-Haar model on a finite group: `μ_(g,h) = η δ_{obs(g,h)} + (1 − η) Unif(G)`.
pub fn build_truth_or_haar(group: &FiniteGroup, eta: f64, mode: GroupMode) -> Result<ChannelFamily> {
    check_unit(eta, "truth probability")?;
    let k = group.order();
    ChannelFamily::from_fn(2, k, k, |a| {
        let (g, h) = (a[0], a[1]);
        let observed = match mode {
            GroupMode::Sync => group.mul(g, group.inv(h)),
            GroupMode::Sumset => group.mul(g, h),
        };
        let mut row = vec![(1.0 - eta) / k as f64; k];
        row[observed] += eta;
        row
    })
}

/// Maps label index 0 → +1 and 1 → −1.
fn label_sign(a: usize) -> i8 {
    if a == 0 {
        1
    } else {
        -1
    }
}

fn parity_symbol(a: &[usize]) -> usize {
    let prod: i8 = a.iter().map(|&x| label_sign(x)).product();
    if prod == 1 {
        0
    } else {
        1
    }
}

/// Planted p-XOR-SAT: labels `{+1, −1}` (indices 0, 1), alphabet `(+1, −1, •)`,
/// `μ_a = η δ_{a_1⋯a_p} + (1 − η) δ_•`.
pub fn build_xor_sat(p: usize, eta: f64) -> Result<ChannelFamily> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(format!("clause density {eta} outside (0, 1)")));
    }
    ChannelFamily::from_fn(p, 2, 3, |a| {
        let mut row = vec![0.0, 0.0, 1.0 - eta];
        row[parity_symbol(a)] = eta;
        row
    })
}

/// Fully revealed XOR model `μ_a = δ_{a_1⋯a_p}` on alphabet `(+1, −1)`.
pub fn build_xor_full_reveal(p: usize) -> Result<ChannelFamily> {
    ChannelFamily::from_fn(p, 2, 2, |a| {
        let mut row = vec![0.0, 0.0];
        row[parity_symbol(a)] = 1.0;
        row
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn validation_rules() {
        assert!(ChannelFamily::new(2, 1, 2, vec![vec![0.5, 0.5]]).is_ok());
        assert!(matches!(
            ChannelFamily::new(2, 1, 2, vec![vec![0.6, 0.5]]),
            Err(GsbmError::InvalidChannel { .. })
        ));
        assert!(ChannelFamily::new(2, 1, 2, vec![vec![1.1, -0.1]]).is_err());
        // tiny negatives are clamped
        let fam = ChannelFamily::new(2, 1, 2, vec![vec![1.0 + 5e-15, -5e-15]]);
        assert!(matches!(fam, Err(GsbmError::Degenerate { symbol: 1 })));
        assert!(matches!(
            ChannelFamily::new(2, 1, 2, vec![vec![1.0, 0.0]]),
            Err(GsbmError::Degenerate { symbol: 1 })
        ));
        assert!(ChannelFamily::new(1, 2, 2, vec![vec![0.5, 0.5]; 2]).is_err());
        assert!(ChannelFamily::new(2, 2, 2, vec![vec![0.5, 0.5]; 3]).is_err());
    }

    #[test]
    fn average_of_identical_channels() {
        let v = vec![0.2, 0.3, 0.5];
        let fam = ChannelFamily::new(2, 3, 3, vec![v.clone(); 9]).unwrap();
        assert!(close(fam.average_channel(), &v, 1e-15));
        assert!(close(&fam.centered_channel(&[1, 2]).unwrap(), &[0.0; 3], 1e-15));
        assert!(!fam.audit(DEFAULT_AUDIT_TOL).nontrivial);
        assert!(matches!(fam.centered_channel(&[3, 0]), Err(GsbmError::LabelOutOfRange(_))));
    }

    #[test]
    fn two_community_sbm_channels() {
        let (alpha, beta, n) = (3.0, 1.0, 20u64);
        let fam = build_sbm(&symmetric_interaction_matrix(2, alpha, beta), n).unwrap();
        let nf = n as f64;
        let avg = (alpha + beta) / (2.0 * nf);
        assert!(close(fam.average_channel(), &[avg, 1.0 - avg], 1e-15));
        let d = (alpha - beta) / (2.0 * nf);
        assert!(close(&fam.centered_channel(&[0, 0]).unwrap(), &[d, -d], 1e-15));
        assert!(close(&fam.centered_channel(&[1, 1]).unwrap(), &[d, -d], 1e-15));
        assert!(close(&fam.centered_channel(&[0, 1]).unwrap(), &[-d, d], 1e-15));
        let audit = fam.audit(DEFAULT_AUDIT_TOL);
        assert!(audit.nontrivial && audit.strongly_symmetric && audit.weakly_symmetric);

        let flat = build_sbm(&symmetric_interaction_matrix(2, 2.0, 2.0), n).unwrap();
        assert!(!flat.audit(DEFAULT_AUDIT_TOL).nontrivial);
    }

    #[test]
    fn sbm_circulant_construction() {
        let q = vec![vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 2.0]];
        assert_eq!(check_interaction_matrix(&q).unwrap(), 4.0);
        let fam = build_sbm(&q, 100).unwrap();
        assert!(close(fam.channel_of(&[0, 1]).unwrap(), &[0.01, 0.99], 1e-15));
    }

    #[test]
    fn sbm_rejections() {
        let irregular = vec![vec![0.3, 0.1], vec![0.1, 0.1]];
        assert!(matches!(
            build_sbm(&irregular, 10),
            Err(GsbmError::NotRegularInteraction { .. })
        ));
        let asym = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        assert!(build_sbm(&asym, 10).is_err());
        assert!(build_sbm(&symmetric_interaction_matrix(2, 3.0, 1.0), 3).is_err());
    }

    #[test]
    fn hsbm_matches_sbm_at_p2_and_is_trivial_when_flat() {
        let q = symmetric_interaction_matrix(2, 3.0, 1.0);
        let t = symmetric_interaction_tensor(2, 2, 3.0, 1.0);
        let a = build_sbm(&q, 20).unwrap();
        let b = build_hsbm(&t, 20).unwrap();
        assert!(close(&a.mu, &b.mu, 1e-15));

        let flat = build_hsbm(&symmetric_interaction_tensor(3, 2, 2.0, 2.0), 10).unwrap();
        assert!(!flat.audit(DEFAULT_AUDIT_TOL).nontrivial);

        let fam = build_hsbm(&symmetric_interaction_tensor(3, 2, 5.0, 1.0), 30).unwrap();
        let denom = 435.0;
        assert!(close(fam.channel_of(&[1, 1, 1]).unwrap(), &[5.0 / denom, 1.0 - 5.0 / denom], 1e-15));
        assert!(close(fam.channel_of(&[0, 1, 1]).unwrap(), &[1.0 / denom, 1.0 - 1.0 / denom], 1e-15));
        assert!(build_hsbm(&symmetric_interaction_tensor(3, 2, 500.0, 1.0), 30).is_err());
    }

    #[test]
    fn truth_or_haar_channels() {
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let fam = build_truth_or_haar(&z3, 0.3, GroupMode::Sync).unwrap();
        let u = 0.7 / 3.0;
        assert!(close(fam.channel_of(&[0, 1]).unwrap(), &[u, u, u + 0.3], 1e-15));
        assert!(close(fam.average_channel(), &[1.0 / 3.0; 3], 1e-15));

        let z2 = FiniteGroup::cyclic(2).unwrap();
        let det = build_truth_or_haar(&z2, 1.0, GroupMode::Sync).unwrap();
        assert_eq!(det.channel_of(&[1, 0]).unwrap(), &[0.0, 1.0]);
        assert_eq!(det.channel_of(&[1, 1]).unwrap(), &[1.0, 0.0]);

        let flat = build_truth_or_haar(&z3, 0.0, GroupMode::Sync).unwrap();
        assert!(!flat.audit(DEFAULT_AUDIT_TOL).nontrivial);
    }

    #[test]
    fn group_model_symmetry_audit() {
        for g in [FiniteGroup::cyclic(4).unwrap(), FiniteGroup::symmetric(3).unwrap()] {
            let fam = build_truth_or_haar(&g, 0.4, GroupMode::Sync).unwrap();
            let audit = fam.audit(DEFAULT_AUDIT_TOL);
            assert!(audit.weakly_symmetric, "{}", g.name());
            assert!(!audit.strongly_symmetric, "{}", g.name());
        }
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let audit = build_truth_or_haar(&z2, 0.4, GroupMode::Sync).unwrap().audit(1e-10);
        assert!(audit.strongly_symmetric);

        let s3 = FiniteGroup::symmetric(3).unwrap();
        let sumset = build_truth_or_haar(&s3, 0.4, GroupMode::Sumset).unwrap();
        assert!(!sumset.audit(DEFAULT_AUDIT_TOL).weakly_symmetric);
        let z5 = FiniteGroup::cyclic(5).unwrap();
        let abelian = build_truth_or_haar(&z5, 0.4, GroupMode::Sumset).unwrap();
        assert!(abelian.audit(DEFAULT_AUDIT_TOL).weakly_symmetric);
    }

    #[test]
    fn xor_sat_channels() {
        let fam = build_xor_sat(2, 0.5).unwrap();
        assert!(close(fam.channel_of(&[0, 1]).unwrap(), &[0.0, 0.5, 0.5], 1e-15));
        assert!(close(fam.average_channel(), &[0.25, 0.25, 0.5], 1e-15));
        let fam = build_xor_sat(3, 0.2).unwrap();
        // labels (+1, −1, −1) have product +1
        assert!(close(&fam.centered_channel(&[0, 1, 1]).unwrap(), &[0.1, -0.1, 0.0], 1e-15));
        let audit = fam.audit(DEFAULT_AUDIT_TOL);
        assert!(audit.nontrivial && audit.strongly_symmetric && audit.weakly_symmetric);
        assert!(matches!(build_xor_sat(3, 1.0), Err(GsbmError::Degenerate { symbol: 2 })));
        assert!(build_xor_sat(3, 0.0).is_err());
    }

    #[test]
    fn xor_is_censored_full_reveal() {
        for p in 2..=4 {
            let eta = 0.35;
            let direct = build_xor_sat(p, eta).unwrap();
            let censored = build_xor_full_reveal(p).unwrap().censor(1.0 - eta).unwrap();
            assert!(close(&direct.mu, &censored.mu, 1e-15));
        }
    }

    #[test]
    fn resampling_boundaries_and_sync_remark() {
        let fam = build_sbm(&symmetric_interaction_matrix(2, 3.0, 1.0), 10).unwrap();
        assert!(close(&fam.resample(0.0).unwrap().mu, &fam.mu, 1e-15));
        assert!(!fam.resample(1.0).unwrap().audit(1e-10).nontrivial);
        assert!(fam.resample(1.5).is_err());

        let g = FiniteGroup::cyclic(4).unwrap();
        let eta0 = 0.8;
        let eta = 0.25;
        let a = build_truth_or_haar(&g, eta0, GroupMode::Sync).unwrap().resample(eta).unwrap();
        let b = build_truth_or_haar(&g, (1.0 - eta) * eta0, GroupMode::Sync).unwrap();
        assert!(close(&a.mu, &b.mu, 1e-15));
    }

    #[test]
    fn censorship_boundaries() {
        let fam = build_sbm(&symmetric_interaction_matrix(2, 3.0, 1.0), 10).unwrap();
        assert_eq!(fam.censor(0.0).unwrap(), fam);
        let all = fam.censor(1.0).unwrap();
        assert_eq!(all.ell(), 1);
        assert!(!all.audit(1e-10).nontrivial);
        let c = fam.censor(0.3).unwrap();
        assert_eq!(c.ell(), 3);
        assert!((c.average_channel()[2] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn json_form_lists_every_tuple() {
        let fam = build_xor_sat(2, 0.5).unwrap();
        let v = fam.to_json_value();
        assert_eq!(v["mu"]["0,1"], serde_json::json!([0.0, 0.5, 0.5]));
        assert_eq!(v["ell"], 3);
    }
}
