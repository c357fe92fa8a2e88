//! Vector Bernstein and Pearson chi-squared tail/moment bounds, exact
//! Pearson moments, and empirical checks of the truncated-exponential
//! overlap lemma.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bounds::exp_truncated;
use crate::error::{invalid, Result};
use crate::multinomial::{exact_expectation, pearson_statistic, sample_multinomial, DEFAULT_ENUM_BUDGET};
use crate::numeric::ln_factorial;

/// `χ²_Pear(n, d)`: the law of `(d/n) Σ_i (z_i − n/d)²` for `z ∼ Mult(n, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PearsonSpec {
    pub n: u64,
    pub d: usize,
}

impl PearsonSpec {
    pub fn new(n: u64, d: usize) -> Result<Self> {
        if n < 1 || d < 1 {
            return Err(invalid("Pearson spec needs n, d >= 1"));
        }
        Ok(Self { n, d })
    }

    /// Largest attainable value, `d·n` (all throws in one bin gives `(d−1)n`).
    pub fn sup(&self) -> f64 {
        (self.d as u64 * self.n) as f64
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon {epsilon} outside (0, 1)")));
    }
    Ok(())
}

fn ln_net_size(d: usize, epsilon: f64) -> f64 {
    d as f64 * (1.0 + 2.0 / epsilon).ln()
}

/// Logarithm of the vector Bernstein tail bound
/// `(1+2/ε)^d exp(−t² / (2σ²n/(1−ε)² + (2/3)Mt/(1−ε)))`.
pub fn ln_vector_bernstein_bound(n: u64, d: usize, sigma2: f64, m: f64, t: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if !(sigma2 >= 0.0) || !(m > 0.0) || !(t >= 0.0) {
        return Err(invalid("need sigma2 >= 0, M > 0, t >= 0"));
    }
    let q = 1.0 - epsilon;
    let denom = 2.0 * sigma2 * n as f64 / (q * q) + (2.0 / 3.0) * m * t / q;
    let exponent = if t == 0.0 { 0.0 } else { -t * t / denom };
    Ok(ln_net_size(d, epsilon) + exponent)
}

pub fn vector_bernstein_bound(n: u64, d: usize, sigma2: f64, m: f64, t: f64, epsilon: f64) -> Result<f64> {
    Ok(ln_vector_bernstein_bound(n, d, sigma2, m, t, epsilon)?.exp())
}

/// Logarithm of the Pearson right-tail bound
/// `(1+2/ε)^d exp(−½(1−ε)² t / (1 + ((1−ε)/3) √((d−1)/n) √t))`.
pub fn ln_pearson_tail_bound(spec: PearsonSpec, t: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if !(t >= 0.0) {
        return Err(invalid("t must be nonnegative"));
    }
    let q = 1.0 - epsilon;
    let corr = 1.0 + (q / 3.0) * ((spec.d as f64 - 1.0) / spec.n as f64).sqrt() * t.sqrt();
    Ok(ln_net_size(spec.d, epsilon) - 0.5 * q * q * t / corr)
}

pub fn pearson_tail_bound(spec: PearsonSpec, t: f64, epsilon: f64) -> Result<f64> {
    Ok(ln_pearson_tail_bound(spec, t, epsilon)?.exp())
}

/// Logarithm of the moment bound
/// `2r(1+2/ε)^d [((1+√(δd))/(1−ε)²)^r 2^r Γ(r) + ((4/δ+4d)/(1−ε)²)^r Γ(2r)/n^r]`.
pub fn ln_pearson_moment_bound(spec: PearsonSpec, r: f64, delta: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta {delta} outside (0, 1)")));
    }
    if !(r >= 1.0) {
        return Err(invalid("r must be at least 1"));
    }
    let d = spec.d as f64;
    let q2 = (1.0 - epsilon).powi(2);
    let first = r * ((1.0 + (delta * d).sqrt()) / q2).ln() + r * 2f64.ln() + ln_gamma(r);
    let second = r * ((4.0 / delta + 4.0 * d) / q2).ln() + ln_gamma(2.0 * r) - r * (spec.n as f64).ln();
    let hi = first.max(second);
    let bracket = hi + ((first - hi).exp() + (second - hi).exp()).ln();
    Ok((2.0 * r).ln() + ln_net_size(spec.d, epsilon) + bracket)
}

pub fn pearson_moment_bound(spec: PearsonSpec, r: f64, delta: f64, epsilon: f64) -> Result<f64> {
    Ok(ln_pearson_moment_bound(spec, r, delta, epsilon)?.exp())
}

/// Exact `E X^r` by enumerating the multinomial support.
pub fn pearson_moment_exact(n: u64, d: usize, r: u32, budget: f64) -> Result<f64> {
    PearsonSpec::new(n, d)?;
    if r == 0 {
        return Ok(1.0);
    }
    exact_expectation(n, d, budget, |z| pearson_statistic(z).powi(r as i32))
}

/// Exact moments `E X^0, …, E X^{r_max}` with the default budget.
pub fn pearson_moments_exact(spec: PearsonSpec, r_max: u32) -> Result<Vec<f64>> {
    (0..=r_max)
        .map(|r| pearson_moment_exact(spec.n, spec.d, r, DEFAULT_ENUM_BUDGET))
        .collect()
}

/// Draws `samples` Pearson statistics, deterministically for a seed.
pub fn pearson_samples(spec: PearsonSpec, samples: usize, seed: u64) -> Vec<f64> {
    sample_values(samples, seed, |rng| {
        let mut z = vec![0u64; spec.d];
        sample_multinomial(rng, spec.n, &mut z);
        pearson_statistic(&z)
    })
}

/// Collects per-draw values in chunk order, using the same stream layout as
/// the Monte Carlo estimators.
pub fn sample_values<F>(samples: usize, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    use rand::SeedableRng;
    use rayon::prelude::*;
    let chunk = crate::multinomial::MC_CHUNK;
    (0..samples.div_ceil(chunk))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = chunk.min(samples - c * chunk);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

/// `P̂[X ≥ t]` for each `t`, from samples.
pub fn empirical_tail(samples: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len().max(1) as f64;
    grid.iter()
        .map(|&t| (sorted.len() - sorted.partition_point(|&x| x < t)) as f64 / len)
        .collect()
}

/// One row of a tail or moment comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// `t` for tails, `r` for moments.
    pub at: f64,
    pub empirical: f64,
    pub bound: f64,
}

impl ComparisonRow {
    pub fn holds(&self) -> bool {
        self.empirical <= self.bound
    }
}

/// `t` values `0, step, …, max` (inclusive, `points` entries).
pub fn linear_grid(max: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|i| max * i as f64 / (points - 1) as f64).collect()
}

/// Compares sampled Pearson tails with the tail bound on a grid.
pub fn validate_pearson_tail(
    spec: PearsonSpec,
    epsilon: f64,
    samples: usize,
    seed: u64,
    grid: &[f64],
) -> Result<(Vec<ComparisonRow>, f64)> {
    let xs = pearson_samples(spec, samples, seed);
    let max = xs.iter().copied().fold(0.0, f64::max);
    let tails = empirical_tail(&xs, grid);
    let rows = grid
        .iter()
        .zip(tails)
        .map(|(&t, e)| {
            Ok(ComparisonRow {
                at: t,
                empirical: e,
                bound: pearson_tail_bound(spec, t, epsilon)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, max))
}

/// Compares exact moments with the moment bound for `1 ≤ r ≤ r_max`.
pub fn validate_pearson_moments(spec: PearsonSpec, r_max: u32, delta: f64, epsilon: f64) -> Result<Vec<ComparisonRow>> {
    let exact = pearson_moments_exact(spec, r_max)?;
    (1..=r_max)
        .map(|r| {
            Ok(ComparisonRow {
                at: r as f64,
                empirical: exact[r as usize],
                bound: pearson_moment_bound(spec, r as f64, delta, epsilon)?,
            })
        })
        .collect()
}

/// Sums of `n` i.i.d. vectors uniform on `{±e_1, …, ±e_d}` (mean 0,
/// `‖Cov‖ = 1/d`, norm 1): empirical `P[‖Σ v_i‖ ≥ t]` against the vector
/// Bernstein bound.
pub fn validate_vector_bernstein(
    n: u64,
    d: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
    grid: &[f64],
) -> Result<Vec<ComparisonRow>> {
    if d < 1 {
        return Err(invalid("d must be at least 1"));
    }
    let norms = sample_values(trials, seed, |rng| {
        let mut s = vec![0i64; d];
        for _ in 0..n {
            let i = rng.random_range(0..d);
            s[i] += if rng.random::<bool>() { 1 } else { -1 };
        }
        (s.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt()
    });
    let tails = empirical_tail(&norms, grid);
    grid.iter()
        .zip(tails)
        .map(|(&t, e)| {
            Ok(ComparisonRow {
                at: t,
                empirical: e,
                bound: vector_bernstein_bound(n, d, 1.0 / d as f64, 1.0, t, epsilon)?,
            })
        })
        .collect()
}

/// Result of fitting the constant of the simplified moment bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentFit {
    pub c: f64,
    pub gamma: f64,
    pub ok: bool,
}

/// Fixed `γ` for the simplified moment bound fit.
pub const MOMENT_FIT_GAMMA: f64 = 0.1;
const FIT_C_START: f64 = 0.01;
const FIT_C_RATIO: f64 = 1.01;
const FIT_C_MAX: f64 = 1e4;

/// Smallest `C` on the geometric grid `0.01·1.01^i` (up to 1e4) such that
/// `E X^r ≤ r^{3/2} C^d ((2+ε) r / e)^r` for every spec and every
/// `1 ≤ r ≤ min(r_max, γn)` with `γ = 0.1`. An existence check only.
pub fn simple_moment_bound_fit(specs: &[PearsonSpec], epsilon: f64, r_max: u32) -> Result<MomentFit> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    let gamma = MOMENT_FIT_GAMMA;
    // smallest admissible ln C over all constraints
    let mut need = f64::NEG_INFINITY;
    for spec in specs {
        let r_hi = r_max.min((gamma * spec.n as f64).floor() as u32);
        if r_hi < 1 {
            continue;
        }
        let moments = pearson_moments_exact(*spec, r_hi)?;
        for r in 1..=r_hi {
            let m = moments[r as usize];
            if m <= 0.0 {
                continue;
            }
            let rf = r as f64;
            let ln_rest = 1.5 * rf.ln() + rf * ((2.0 + epsilon) * rf / std::f64::consts::E).ln();
            need = need.max((m.ln() - ln_rest) / spec.d as f64);
        }
    }
    let mut c = FIT_C_START;
    while c.ln() < need && c <= FIT_C_MAX {
        c *= FIT_C_RATIO;
    }
    Ok(MomentFit {
        c,
        gamma,
        ok: c <= FIT_C_MAX,
    })
}

/// `d! ≥ (d/e)^d` for all `1 ≤ d ≤ max_d`; returns the first violation.
pub fn factorial_bound_violation(max_d: u64) -> Option<u64> {
    (1..=max_d).find(|&d| {
        let df = d as f64;
        ln_factorial(d) < df * (df.ln() - 1.0) - 1e-12 * df
    })
}

/// Parameters of the envelope `f(t) = C·exp(−decay·t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub c: f64,
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapLemmaReport {
    #[serde(rename = "D")]
    pub degree: u32,
    #[serde(rename = "A")]
    pub a: f64,
    /// `D (2 ∨ log(‖R‖_∞ / D))`, absent when no analytic sup is known.
    pub condition1_rhs: Option<f64>,
    /// `None` when skipped for lack of an analytic sup.
    pub condition1: Option<bool>,
    pub condition2: bool,
    /// First grid point where the empirical tail exceeds the envelope.
    pub condition2_violation: Option<f64>,
    pub sup_bound: Option<f64>,
    pub grid: Vec<ComparisonRow>,
    /// Empirical `E exp^{≤D}(R)`.
    pub mean_exp_truncated: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Empirically checks the two hypotheses of the truncated-exponential
/// overlap lemma on samples of `R ≥ 0`.
pub fn check_overlap_lemma(
    samples: &[f64],
    degree: u32,
    a: f64,
    sup_bound: Option<f64>,
    envelope: Envelope,
    grid_points: usize,
) -> Result<OverlapLemmaReport> {
    if samples.is_empty() {
        return Err(invalid("need at least one sample"));
    }
    if !(a >= 0.0) {
        return Err(invalid("A must be nonnegative"));
    }
    let condition1_rhs = sup_bound.map(|s| {
        let dd = degree.max(1) as f64;
        dd * 2f64.max((s / dd).ln())
    });
    let condition1 = condition1_rhs.map(|rhs| a >= rhs);
    let ts = linear_grid(a, grid_points);
    let tails = empirical_tail(samples, &ts);
    let grid: Vec<ComparisonRow> = ts
        .iter()
        .zip(tails)
        .map(|(&t, e)| ComparisonRow {
            at: t,
            empirical: e,
            bound: envelope.c * (-(envelope.decay + 1.0) * t).exp(),
        })
        .collect();
    let condition2_violation = grid.iter().find(|r| !r.holds()).map(|r| r.at);
    let n = samples.len() as f64;
    let vals: Vec<f64> = samples.iter().map(|&r| exp_truncated(r, degree)).collect();
    let mean = vals.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(OverlapLemmaReport {
        degree,
        a,
        condition1_rhs,
        condition1,
        condition2: condition2_violation.is_none(),
        condition2_violation,
        sup_bound,
        grid,
        mean_exp_truncated: mean,
        stderr: (var / n).sqrt(),
        samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values_at_zero() {
        let net = (1.0 + 2.0 / 0.5f64).powi(3);
        assert!((vector_bernstein_bound(10, 3, 0.2, 1.0, 0.0, 0.5).unwrap() - net).abs() < 1e-9);
        let spec = PearsonSpec::new(50, 3).unwrap();
        assert!((pearson_tail_bound(spec, 0.0, 0.5).unwrap() - net).abs() < 1e-9);
        assert!(vector_bernstein_bound(10, 3, 0.2, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn bernstein_reproduces_pearson_tail_under_substitution() {
        for (n, d) in [(20u64, 2usize), (200, 4), (37, 9)] {
            let spec = PearsonSpec::new(n, d).unwrap();
            for &t in &[0.5, 3.0, 17.0] {
                for &eps in &[0.1, 0.6] {
                    let direct = ln_pearson_tail_bound(spec, t, eps).unwrap();
                    let df = d as f64;
                    let s = (n as f64 / df).sqrt() * t.sqrt();
                    let via = ln_vector_bernstein_bound(n, d, 1.0 / df, ((df - 1.0) / df).sqrt(), s, eps).unwrap();
                    assert!((direct - via).abs() < 1e-12 * direct.abs().max(1.0), "{n} {d} {t} {eps}");
                }
            }
        }
    }

    #[test]
    fn tail_bound_monotonicity() {
        let a = PearsonSpec::new(100, 4).unwrap();
        let b = PearsonSpec::new(20, 4).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..40 {
            let t = i as f64;
            let v = pearson_tail_bound(a, t, 0.3).unwrap();
            assert!(v <= last);
            last = v;
            if t > 0.0 {
                assert!(pearson_tail_bound(b, t, 0.3).unwrap() > v);
            }
        }
    }

    #[test]
    fn exact_first_moment_and_degenerate_bin() {
        for (n, d) in [(20u64, 2usize), (50, 4), (7, 3)] {
            let m = pearson_moment_exact(n, d, 1, DEFAULT_ENUM_BUDGET).unwrap();
            assert!((m - (d as f64 - 1.0)).abs() < 1e-10);
            assert_eq!(pearson_moment_exact(n, d, 0, DEFAULT_ENUM_BUDGET).unwrap(), 1.0);
        }
        assert_eq!(pearson_moment_exact(9, 1, 3, DEFAULT_ENUM_BUDGET).unwrap(), 0.0);
    }

    #[test]
    fn moment_bound_dominates_and_increases() {
        let spec = PearsonSpec::new(30, 4).unwrap();
        let exact = pearson_moment_exact(30, 4, 3, DEFAULT_ENUM_BUDGET).unwrap();
        assert!(pearson_moment_bound(spec, 3.0, 0.5, 0.5).unwrap() >= exact);
        let mut last = 0.0;
        for r in 1..=10 {
            let v = pearson_moment_bound(spec, r as f64, 0.5, 0.5).unwrap();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn moment_fit_behaviour() {
        let specs: Vec<PearsonSpec> = [20u64, 40, 80]
            .iter()
            .flat_map(|&n| [2usize, 4].map(|d| PearsonSpec::new(n, d).unwrap()))
            .collect();
        let tight = simple_moment_bound_fit(&specs, 0.5, 8).unwrap();
        assert!(tight.ok);
        let loose = simple_moment_bound_fit(&specs, 10.0, 8).unwrap();
        assert!(loose.c <= tight.c);
        let single = simple_moment_bound_fit(&[PearsonSpec::new(50, 1).unwrap()], 0.5, 5).unwrap();
        assert!(single.ok && single.c == FIT_C_START);
    }

    #[test]
    fn factorial_bound_holds() {
        assert_eq!(factorial_bound_violation(170), None);
    }

    #[test]
    fn overlap_lemma_on_zero() {
        let rep = check_overlap_lemma(&[0.0; 100], 5, 10.0, Some(0.0), Envelope { c: 1.0, decay: 0.1 }, 20).unwrap();
        assert_eq!(rep.mean_exp_truncated, 1.0);
        assert_eq!(rep.condition1, Some(true));
        assert!(rep.condition2);
    }

    #[test]
    fn empirical_tail_counts() {
        let t = empirical_tail(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.5, 3.0, 4.0]);
        assert_eq!(t, vec![1.0, 0.5, 0.25, 0.0]);
    }
}
