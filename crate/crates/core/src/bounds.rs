//! Advantage bounds: truncated exponentials, the multinomial overlap bound,
//! its injective-norm relaxation, the marginal-order conditions, the
//! Kesten–Stigum checks and the multi-frequency advantage series.
//!
//! Every `BoundReport::value` is a bound on the *squared* coordinate advantage.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::channel::{check_interaction_matrix, check_interaction_tensor, ChannelFamily};
use crate::characteristic::{characteristic_tensor, MarginalOrder, MarginalProfile};
use crate::concentration::{pearson_moment_exact, sample_values};
use crate::error::{invalid, GsbmError, Result};
use crate::multinomial::{
    centered_norm_sq, exact_expectation, mc_expectation, pearson_statistic, sample_multinomial, DEFAULT_ENUM_BUDGET,
};
use crate::numeric::{binomial, factorial, CompensatedSum};
use crate::tensor::SymTensor;

/// `exp^{≤D}(t) = Σ_{d=0}^{D} t^d / d!`, by term recurrence with compensated
/// summation. Returns `+∞` when a term or the sum overflows.
pub fn exp_truncated(t: f64, degree: u32) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    let mut term = 1.0;
    for d in 1..=degree {
        term *= t / d as f64;
        if !term.is_finite() {
            return f64::INFINITY;
        }
        acc.add(term);
    }
    let v = acc.value();
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    ExactEnum,
    MonteCarlo,
    CorollaryRelaxation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorollaryForm {
    Zbar,
    Chi2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: u64,
    #[serde(rename = "D")]
    pub degree: u32,
    /// Bound on `CAdv_{≤D}²`.
    pub value: f64,
    pub method: BoundMethod,
    pub mc_stderr: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Set for the relaxation: which display was evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<CorollaryForm>,
    /// The relaxation used injective norms that are only lower-bound
    /// estimates, so its value is not a certified bound.
    #[serde(default)]
    pub lower_bound_norms: bool,
}

impl BoundReport {
    fn exact(n: u64, degree: u32, value: f64) -> Self {
        Self {
            n,
            degree,
            value,
            method: BoundMethod::ExactEnum,
            mc_stderr: None,
            samples: None,
            seed: None,
            form: None,
            lower_bound_norms: false,
        }
    }
}

/// Evaluation settings shared by the bound evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    /// Maximum number of compositions to enumerate.
    pub enum_budget: f64,
    /// Monte Carlo sample count when enumeration is over budget.
    pub samples: usize,
    pub seed: u64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            enum_budget: DEFAULT_ENUM_BUDGET,
            samples: 100_000,
            seed: 0,
        }
    }
}

fn as_f64(z: &[u64]) -> Vec<f64> {
    z.iter().map(|&c| c as f64).collect()
}

/// `⟨T, z^{⊗p}⟩`.
pub fn overlap_value(t: &SymTensor, z: &[u64]) -> Result<f64> {
    t.contract_all(&as_f64(z))
}

/// `Σ_{j=p*}^{p} C(p, j) n^{p−j} ⟨T^(j), z̄^{⊗j}⟩` with `z̄ = z − (n/k²)·1`.
pub fn marginal_expansion(profile: &MarginalProfile, z: &[u64]) -> Result<f64> {
    let Some(p_star) = profile.marginal_order.value() else {
        return Ok(0.0);
    };
    let d = profile.k * profile.k;
    if z.len() != d {
        return Err(GsbmError::DimensionMismatch {
            expected: d,
            got: z.len(),
        });
    }
    let n: u64 = z.iter().sum();
    let nf = n as f64;
    let zbar: Vec<f64> = z.iter().map(|&c| c as f64 - nf / d as f64).collect();
    let p = profile.p;
    let mut acc = CompensatedSum::new();
    for j in p_star..=p {
        let inner = profile.tensor(j).contract_all(&zbar)?;
        acc.add(binomial(p as u64, j as u64) * nf.powi((p - j) as i32) * inner);
    }
    Ok(acc.value())
}

/// Exact `E_{z∼Mult(n,k²)} exp^{≤D}(⟨T, z^{⊗p}⟩)` for a given tensor.
pub fn tensor_bound_exact(t: &SymTensor, n: u64, degree: u32, budget: f64) -> Result<BoundReport> {
    if degree == 0 || t.max_abs() == 0.0 {
        return Ok(BoundReport::exact(n, degree, 1.0));
    }
    let value = exact_expectation(n, t.dim(), budget, |z| {
        exp_truncated(t.contract_all(&as_f64(z)).expect("dimension"), degree)
    })?;
    Ok(BoundReport::exact(n, degree, value))
}

/// Monte Carlo estimate of the same expectation.
pub fn tensor_bound_mc(t: &SymTensor, n: u64, degree: u32, samples: usize, seed: u64) -> Result<BoundReport> {
    if samples == 0 {
        return Err(invalid("samples must be at least 1"));
    }
    let est = mc_expectation(n, t.dim(), samples, seed, |z| {
        exp_truncated(t.contract_all(&as_f64(z)).expect("dimension"), degree)
    });
    Ok(BoundReport {
        n,
        degree,
        value: est.mean,
        method: BoundMethod::MonteCarlo,
        mc_stderr: Some(est.stderr),
        samples: Some(samples),
        seed: Some(seed),
        form: None,
        lower_bound_norms: false,
    })
}

/// Draws of the overlap `R = ⟨T, z^{⊗p}⟩`, `z ∼ Mult(n, k²)`, on the same
/// stream layout as [`tensor_bound_mc`].
pub fn overlap_samples(t: &SymTensor, n: u64, samples: usize, seed: u64) -> Vec<f64> {
    let d = t.dim();
    sample_values(samples, seed, |rng| {
        let mut z = vec![0u64; d];
        sample_multinomial(rng, n, &mut z);
        t.contract_all(&as_f64(&z)).expect("dimension")
    })
}

/// `max |T| · n^p`, which dominates `|⟨T, z^{⊗p}⟩|` whenever `Σ z = n`.
pub fn overlap_sup_bound(t: &SymTensor, n: u64) -> f64 {
    t.max_abs() * (n as f64).powi(t.order() as i32)
}

/// Exact multinomial overlap bound with the default enumeration budget.
pub fn bound_exact(fam: &ChannelFamily, n: u64, degree: u32) -> Result<BoundReport> {
    bound_exact_with_budget(fam, n, degree, DEFAULT_ENUM_BUDGET)
}

pub fn bound_exact_with_budget(fam: &ChannelFamily, n: u64, degree: u32, budget: f64) -> Result<BoundReport> {
    tensor_bound_exact(&characteristic_tensor(fam), n, degree, budget)
}

pub fn bound_mc(fam: &ChannelFamily, n: u64, degree: u32, samples: usize, seed: u64) -> Result<BoundReport> {
    tensor_bound_mc(&characteristic_tensor(fam), n, degree, samples, seed)
}

/// The injective-norm relaxation of the overlap bound, in the `‖z̄‖` form or
/// the Pearson form. Enumerates when within budget, otherwise Monte Carlo.
pub fn bound_corollary(
    profile: &MarginalProfile,
    n: u64,
    degree: u32,
    form: CorollaryForm,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let Some(p_star) = profile.marginal_order.value() else {
        let mut r = BoundReport::exact(n, degree, 1.0);
        r.method = BoundMethod::CorollaryRelaxation;
        r.form = Some(form);
        return Ok(r);
    };
    let p = profile.p;
    let k = profile.k as f64;
    let nf = n as f64;
    let coefs: Vec<(usize, f64)> = (p_star..=p)
        .map(|j| (j, binomial(p as u64, j as u64) * profile.norm(j).value))
        .collect();
    let argument = |z: &[u64]| -> f64 {
        match form {
            CorollaryForm::Zbar => {
                let norm = centered_norm_sq(z).sqrt();
                coefs
                    .iter()
                    .map(|&(j, c)| c * nf.powi((p - j) as i32) * norm.powi(j as i32))
                    .sum()
            }
            CorollaryForm::Chi2 => {
                let x = pearson_statistic(z);
                coefs
                    .iter()
                    .map(|&(j, c)| c * k.powi(-(j as i32)) * nf.powf(p as f64 - j as f64 / 2.0) * x.powf(j as f64 / 2.0))
                    .sum()
            }
        }
    };
    let d = profile.k * profile.k;
    let f = |z: &[u64]| exp_truncated(argument(z), degree);
    let mut report = match exact_expectation(n, d, opts.enum_budget, f) {
        Ok(value) => BoundReport::exact(n, degree, value),
        Err(GsbmError::BudgetExceeded { .. }) => {
            let est = mc_expectation(n, d, opts.samples, opts.seed, f);
            BoundReport {
                n,
                degree,
                value: est.mean,
                method: BoundMethod::MonteCarlo,
                mc_stderr: Some(est.stderr),
                samples: Some(opts.samples),
                seed: Some(opts.seed),
                form: None,
                lower_bound_norms: false,
            }
        }
        Err(e) => return Err(e),
    };
    report.method = BoundMethod::CorollaryRelaxation;
    report.form = Some(form);
    report.lower_bound_norms = profile.has_lower_bound_norms(p_star);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVerdict {
    pub condition_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ThresholdVerdict {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            condition_name: name.into(),
            lhs,
            rhs,
            satisfied: lhs < rhs,
            margin: rhs - lhs,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn require_order(profile: &MarginalProfile) -> Result<usize> {
    match profile.marginal_order {
        MarginalOrder::Order(j) => Ok(j),
        MarginalOrder::Trivial => Err(GsbmError::Unsupported("trivial model has no marginal order".into())),
    }
}

/// General marginal-order condition:
/// `max_{p*≤j≤p} ‖T^(j)‖_inj ≤ c n^{−(2p−p*)/2} D^{−(p*−2)/2}`.
pub fn check_theorem_p3(profile: &MarginalProfile, n: u64, degree: u32, c: f64) -> Result<ThresholdVerdict> {
    let p_star = require_order(profile)?;
    if p_star < 2 {
        return Err(GsbmError::Unsupported(format!(
            "marginal order {p_star} < 2 is outside the regime of the general condition"
        )));
    }
    if !(c > 0.0) {
        return Err(invalid("constant c must be positive"));
    }
    let nf = n as f64;
    if degree as f64 > c * nf {
        return Err(invalid(format!("D = {degree} exceeds c·n = {}", c * nf)));
    }
    let p = profile.p as f64;
    let ps = p_star as f64;
    let lhs = (p_star..=profile.p)
        .map(|j| profile.norm(j).value)
        .fold(0.0, f64::max);
    let rhs = c * nf.powf(-(2.0 * p - ps) / 2.0) * (degree.max(1) as f64).powf(-(ps - 2.0) / 2.0);
    let mut v = ThresholdVerdict::new("max_j inj-norm(T^(j)) <= c n^(-(2p-p*)/2) D^(-(p*-2)/2)", lhs, rhs)
        .with_note(format!("verdict relative to the supplied constant c = {c}"));
    if profile.has_lower_bound_norms(p_star) {
        v.note = Some(format!(
            "{}; norms of order >= 3 are power-method lower bounds",
            v.note.unwrap()
        ));
    }
    Ok(v)
}

/// Verdicts for the marginal-order-2 conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremP2Verdict {
    /// `‖T^(2)‖ ≤ (1−ε) k² / (p(p−1) n^{p−1})` at the given n.
    pub sharp: ThresholdVerdict,
    /// `‖T^(2)‖ n^{p−1} p(p−1)/k²` against `1 − ε`.
    pub leading_order: ThresholdVerdict,
    /// `‖T^(j)‖_inj ≤ C / n^{p−1}` for `3 ≤ j ≤ p`.
    pub crude: Vec<ThresholdVerdict>,
    pub satisfied: bool,
}

pub fn check_theorem_p2(profile: &MarginalProfile, n: u64, epsilon: f64, c: f64) -> Result<TheoremP2Verdict> {
    let p_star = require_order(profile)?;
    if p_star != 2 {
        return Err(GsbmError::Unsupported(format!("marginal order is {p_star}, not 2")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(invalid(format!("epsilon {epsilon} outside [0, 1)")));
    }
    let p = profile.p;
    let nf = n as f64;
    let k2 = (profile.k * profile.k) as f64;
    let scale = nf.powi(p as i32 - 1) * (p * (p - 1)) as f64 / k2;
    let t2 = profile.norm(2).value;
    let note = "asymptotic condition evaluated at finite n; advisory";
    let sharp = ThresholdVerdict::new("||T^(2)|| <= (1-eps) k^2/(p(p-1) n^(p-1))", t2, (1.0 - epsilon) / scale)
        .with_note(note);
    let leading_order =
        ThresholdVerdict::new("||T^(2)|| n^(p-1) p(p-1)/k^2 < 1-eps", t2 * scale, 1.0 - epsilon).with_note(note);
    let crude: Vec<ThresholdVerdict> = (3..=p)
        .map(|j| {
            let mut v = ThresholdVerdict::new(
                format!("inj-norm(T^({j})) <= C/n^(p-1)"),
                profile.norm(j).value,
                c / nf.powi(p as i32 - 1),
            );
            if profile.norm(j).lower_bound_only {
                v = v.with_note("power-method lower bound");
            }
            v
        })
        .collect();
    let satisfied = sharp.satisfied && crude.iter().all(|v| v.satisfied);
    Ok(TheoremP2Verdict {
        sharp,
        leading_order,
        crude,
        satisfied,
    })
}

/// `max_{j≥2} |λ_j|²` and `λ_1` of a symmetric matrix with constant row sums.
fn ks_sides(m: DMatrix<f64>) -> (f64, f64) {
    let mut eig: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let lambda1 = eig[0];
    let lhs = eig[1..].iter().fold(0.0_f64, |m, l| m.max(l * l));
    (lhs, lambda1)
}

/// Kesten–Stigum condition `max_{j≥2} |λ_j(Q)|² < k λ_1(Q)`.
pub fn ks_threshold_sbm(q: &[Vec<f64>]) -> Result<ThresholdVerdict> {
    check_interaction_matrix(q)?;
    let k = q.len();
    let m = DMatrix::from_fn(k, k, |i, j| q[i][j]);
    let (lhs, lambda1) = ks_sides(m);
    Ok(ThresholdVerdict::new("max_j>=2 |lambda_j(Q)|^2 < k lambda_1(Q)", lhs, k as f64 * lambda1))
}

/// Hypergraph condition on `M = Q[1, …, 1, ·, ·]`:
/// `max_{j≥2} |λ_j(M)|² < (k^{p−1}/(p−1)) λ_1(M)`.
pub fn ks_threshold_hsbm(q: &SymTensor) -> Result<ThresholdVerdict> {
    check_interaction_tensor(q)?;
    let p = q.order();
    let k = q.dim();
    let m = if p == 2 {
        q.clone()
    } else {
        let ones = vec![1.0; k];
        let vs: Vec<&[f64]> = (0..p - 2).map(|_| &ones[..]).collect();
        q.partial_contract(&vs)?
    };
    let (lhs, lambda1) = ks_sides(m.as_matrix().expect("order 2"));
    let rhs = (k as f64).powi(p as i32 - 1) / (p as f64 - 1.0) * lambda1;
    Ok(ThresholdVerdict::new(
        "max_j>=2 |lambda_j(M)|^2 < (k^(p-1)/(p-1)) lambda_1(M)",
        lhs,
        rhs,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultifreqReport {
    pub k: usize,
    pub lambda: f64,
    pub n: u64,
    #[serde(rename = "D")]
    pub degree: u32,
    /// Squared degree-D advantage.
    pub value: f64,
    pub method: BoundMethod,
    pub mc_stderr: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

/// `Σ_{d≤D} (1/d!) (λ^{2d}/n^d) E ((k/2) Σ_ℓ (z_ℓ − n/k)²)^d` with
/// `z ∼ Mult(n, k)`, i.e. `E exp^{≤D}(λ² X / 2)` for `X ∼ χ²_Pear(n, k)`.
/// Uses exact Pearson moments when enumeration fits the budget.
pub fn multifreq_advantage(k: usize, lambda: f64, n: u64, degree: u32, opts: &BoundOptions) -> Result<MultifreqReport> {
    if k < 2 {
        return Err(invalid("k must be at least 2"));
    }
    if !(lambda >= 0.0) {
        return Err(invalid("lambda must be nonnegative"));
    }
    let mut report = MultifreqReport {
        k,
        lambda,
        n,
        degree,
        value: 1.0,
        method: BoundMethod::ExactEnum,
        mc_stderr: None,
        samples: None,
        seed: None,
    };
    if lambda == 0.0 || degree == 0 {
        return Ok(report);
    }
    match multifreq_exact(k, lambda, n, degree, opts.enum_budget) {
        Ok(v) => report.value = v,
        Err(GsbmError::BudgetExceeded { .. }) => {
            log::warn!("multi-frequency series over enumeration budget; using Monte Carlo");
            let est = multifreq_mc(k, lambda, n, degree, opts.samples, opts.seed);
            report.value = est.0;
            report.mc_stderr = Some(est.1);
            report.method = BoundMethod::MonteCarlo;
            report.samples = Some(opts.samples);
            report.seed = Some(opts.seed);
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Series evaluated term by term from exact Pearson moments.
pub fn multifreq_exact(k: usize, lambda: f64, n: u64, degree: u32, budget: f64) -> Result<f64> {
    let half = lambda * lambda / 2.0;
    let mut acc = CompensatedSum::new();
    for d in 0..=degree {
        let moment = pearson_moment_exact(n, k, d, budget)?;
        acc.add(half.powi(d as i32) * moment / factorial(d as u64));
    }
    Ok(acc.value())
}

/// Monte Carlo evaluation of `E exp^{≤D}(λ² X / 2)`; returns (mean, stderr).
pub fn multifreq_mc(k: usize, lambda: f64, n: u64, degree: u32, samples: usize, seed: u64) -> (f64, f64) {
    let half = lambda * lambda / 2.0;
    let est = mc_expectation(n, k, samples, seed, |z| exp_truncated(half * pearson_statistic(z), degree));
    (est.mean, est.stderr)
}
