//! Injective norm `max_{‖v‖=1} |⟨T, v^{⊗m}⟩|` of symmetric tensors.
//!
//! Order ≤ 2 and rank-one tensors are handled exactly. Everything else goes
//! through a shifted symmetric higher-order power method with random
//! restarts, run on `T` and `−T`; that value is a lower bound.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::tensor::SymTensor;

/// Relative Frobenius residual below which a tensor counts as rank one.
pub const RANK_ONE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectiveOptions {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
    pub tol: f64,
    /// Skip the exact paths and always run the power method.
    pub force_iterative: bool,
}

impl Default for InjectiveOptions {
    fn default() -> Self {
        Self {
            restarts: 50,
            iters: 500,
            seed: 0,
            tol: 1e-12,
            force_iterative: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    /// Orders 0 and 1, or the zero tensor.
    Exact,
    ExactSpectral,
    RankOneExact,
    PowerMultistart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectiveNorm {
    pub value: f64,
    /// Unit vector attaining `value`.
    pub witness: Vec<f64>,
    /// `⟨T, w^{⊗m}⟩` at the witness (sign included).
    pub signed_value: f64,
    pub method: NormMethod,
    pub converged: bool,
    /// True when `value` is only guaranteed to be a lower bound.
    pub lower_bound_only: bool,
}

impl InjectiveNorm {
    fn exact(value: f64, witness: Vec<f64>, signed_value: f64, method: NormMethod) -> Self {
        Self {
            value,
            witness,
            signed_value,
            method,
            converged: true,
            lower_bound_only: false,
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn unit(dim: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[0] = 1.0;
    e
}

pub fn injective_norm(t: &SymTensor, opts: &InjectiveOptions) -> InjectiveNorm {
    let dim = t.dim();
    match t.order() {
        0 => {
            let v = t.entries()[0];
            return InjectiveNorm::exact(v.abs(), Vec::new(), v, NormMethod::Exact);
        }
        1 => {
            let mut w = t.entries().to_vec();
            let norm = normalize(&mut w);
            if norm == 0.0 {
                w = unit(dim);
            }
            return InjectiveNorm::exact(norm, w, norm, NormMethod::Exact);
        }
        _ => {}
    }
    if t.max_abs() == 0.0 {
        return InjectiveNorm::exact(0.0, unit(dim), 0.0, NormMethod::Exact);
    }
    if !opts.force_iterative {
        if t.order() == 2 {
            return spectral(t);
        }
        if let Some(r) = rank_one(t) {
            return r;
        }
    }
    power_multistart(t, opts)
}

fn spectral(t: &SymTensor) -> InjectiveNorm {
    let eig = SymmetricEigen::new(t.as_matrix().expect("order 2"));
    let (i, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty spectrum");
    let witness: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
    InjectiveNorm::exact(lambda.abs(), witness, lambda, NormMethod::ExactSpectral)
}

/// Leading left singular vector of the mode-1 unfolding.
fn leading_direction(t: &SymTensor) -> Vec<f64> {
    let d = t.dim();
    let cols = t.entries().len() / d;
    let unfold = DMatrix::from_row_slice(d, cols, t.entries());
    let gram = &unfold * unfold.transpose();
    let eig = SymmetricEigen::new(gram);
    let i = eig.eigenvalues.imax();
    eig.eigenvectors.column(i).iter().copied().collect()
}

fn rank_one(t: &SymTensor) -> Option<InjectiveNorm> {
    let m = t.order();
    let mut u = leading_direction(t);
    let c = t.contract_all(&u).ok()?;
    let approx = SymTensor::rank_one(c, &u, m);
    let residual = t
        .entries()
        .iter()
        .zip(approx.entries())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if residual > RANK_ONE_TOL * t.frobenius() {
        return None;
    }
    let mut signed = c;
    if m % 2 == 1 && c < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
        signed = -c;
    }
    Some(InjectiveNorm::exact(c.abs(), u, signed, NormMethod::RankOneExact))
}

struct Run {
    value: f64,
    x: Vec<f64>,
    converged: bool,
}

/// Shifted symmetric power iteration maximizing `sign·⟨T, x^{⊗m}⟩` on the sphere.
fn sshopm(t: &SymTensor, sign: f64, mut x: Vec<f64>, shift: f64, opts: &InjectiveOptions) -> Run {
    normalize(&mut x);
    let mut value = sign * t.contract_all(&x).expect("dimension checked");
    for _ in 0..opts.iters {
        let g = t.contract_to_vector(&x);
        let mut next: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| sign * gi + shift * xi).collect();
        if normalize(&mut next) == 0.0 {
            break;
        }
        let next_value = sign * t.contract_all(&next).expect("dimension checked");
        let step = (next_value - value).abs();
        x = next;
        value = next_value;
        if step <= opts.tol * value.abs().max(1e-300).max(opts.tol) {
            return Run {
                value,
                x,
                converged: true,
            };
        }
    }
    Run {
        value,
        x,
        converged: false,
    }
}

fn power_multistart(t: &SymTensor, opts: &InjectiveOptions) -> InjectiveNorm {
    let d = t.dim();
    let shift = (t.order() as f64 - 1.0) * t.frobenius();
    let lead = leading_direction(t);
    let restarts = opts.restarts.max(1);
    let runs: Vec<(usize, Run)> = (0..2 * (restarts + 1))
        .into_par_iter()
        .map(|job| {
            let sign = if job % 2 == 0 { 1.0 } else { -1.0 };
            let r = job / 2;
            let start = if r == 0 {
                lead.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(r as u64);
                (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
            };
            (job, sshopm(t, sign, start, shift, opts))
        })
        .collect();
    let (_, best) = runs
        .into_iter()
        .max_by(|(ja, a), (jb, b)| a.value.total_cmp(&b.value).then(jb.cmp(ja)))
        .expect("at least one run");
    let signed_value = t.contract_all(&best.x).expect("dimension checked");
    InjectiveNorm {
        value: signed_value.abs(),
        witness: best.x,
        signed_value,
        method: NormMethod::PowerMultistart,
        converged: best.converged,
        lower_bound_only: true,
    }
}
