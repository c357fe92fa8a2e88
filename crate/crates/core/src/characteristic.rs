//! Characteristic tensors, their marginals and the marginal order.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelFamily;
use crate::error::{invalid, Result};
use crate::injective::{injective_norm, InjectiveNorm, InjectiveOptions};
use crate::numeric::{digits, factorial, undigits};
use crate::tensor::SymTensor;

/// Default threshold on max-abs entries for deciding `T^(j) = 0`.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;
/// Pre-symmetrization defect above which a warning is logged.
pub const CHARACTERISTIC_SYMMETRY_WARN: f64 = 1e-10;

/// The characteristic tensor together with the symmetry defect of the raw
/// entries before symmetrization.
#[derive(Debug, Clone, PartialEq)]
pub struct Characteristic {
    pub tensor: SymTensor,
    pub symmetry_defect: f64,
}

/// Raw entries `(1/p!) R(a, b)` arranged as an order-`p` array over `[k²]`
/// with index `(a_j, b_j) ↦ a_j·k + b_j`.
fn raw_entries(fam: &ChannelFamily) -> Vec<f64> {
    let (p, k) = (fam.p(), fam.k());
    let t = fam.num_tuples();
    let overlap = fam.overlap_matrix();
    let scale = 1.0 / factorial(p as u64);
    let dim = k * k;
    let mut a = vec![0; p];
    let mut b = vec![0; p];
    (0..dim.pow(p as u32))
        .map(|flat| {
            for (j, pair) in digits(flat, dim, p).into_iter().enumerate() {
                a[j] = pair / k;
                b[j] = pair % k;
            }
            scale * overlap[undigits(&a, k) * t + undigits(&b, k)]
        })
        .collect()
}

/// Computes `T` and reports how far the raw entries were from symmetric.
pub fn characteristic(fam: &ChannelFamily) -> Characteristic {
    let dim = fam.k() * fam.k();
    let (tensor, symmetry_defect) =
        SymTensor::symmetrized(fam.p(), dim, raw_entries(fam)).expect("shape is consistent");
    if symmetry_defect > CHARACTERISTIC_SYMMETRY_WARN {
        log::warn!(
            "channel family is not weakly symmetric; characteristic tensor symmetrized (defect {symmetry_defect:.3e})"
        );
    }
    Characteristic {
        tensor,
        symmetry_defect,
    }
}

/// `T = (1/p!) Σ_y μ̄_a(y) μ̄_b(y) / μ_avg(y)`, symmetrized.
pub fn characteristic_tensor(fam: &ChannelFamily) -> SymTensor {
    characteristic(fam).tensor
}

/// `T^(j−1) = (1/k²) T^(j)[1, ·, …, ·]`.
pub fn marginalize(t: &SymTensor) -> Result<SymTensor> {
    if t.order() == 0 {
        return Err(invalid("cannot marginalize a scalar"));
    }
    let ones = vec![1.0; t.dim()];
    Ok(t.partial_contract(&[&ones])?.scaled(1.0 / t.dim() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalOrder {
    Order(usize),
    Trivial,
}

impl MarginalOrder {
    pub fn value(self) -> Option<usize> {
        match self {
            MarginalOrder::Order(j) => Some(j),
            MarginalOrder::Trivial => None,
        }
    }
}

/// `T^(p), …, T^(1)` with injective norms and the marginal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalProfile {
    pub p: usize,
    pub k: usize,
    /// `tensors[i]` is `T^(p−i)`.
    pub tensors: Vec<SymTensor>,
    pub inj_norms: Vec<InjectiveNorm>,
    pub marginal_order: MarginalOrder,
    pub zero_tol: f64,
    /// `T^(0)`, zero by construction for any genuine family.
    pub zeroth: f64,
}

impl MarginalProfile {
    /// Builds the profile of an arbitrary symmetric order-`p` tensor over `[k²]`.
    pub fn from_tensor(t: SymTensor, k: usize, zero_tol: f64, opts: &InjectiveOptions) -> Result<Self> {
        if t.dim() != k * k {
            return Err(invalid(format!("tensor dimension {} != k² = {}", t.dim(), k * k)));
        }
        if !(zero_tol > 0.0) {
            return Err(invalid("zero tolerance must be positive"));
        }
        let p = t.order();
        let mut tensors = vec![t];
        while tensors.last().unwrap().order() > 1 {
            let next = marginalize(tensors.last().unwrap())?;
            tensors.push(next);
        }
        let zeroth = marginalize(tensors.last().unwrap())?.entries()[0];
        if zeroth.abs() > zero_tol {
            log::warn!("T^(0) = {zeroth:.3e} is not zero; tensor is not a characteristic tensor");
        }
        let marginal_order = if tensors[0].max_abs() <= zero_tol {
            MarginalOrder::Trivial
        } else {
            let j = (1..=p)
                .find(|&j| tensors[p - j].max_abs() > zero_tol)
                .expect("T^(p) is nonzero");
            MarginalOrder::Order(j)
        };
        let inj_norms = tensors.iter().map(|t| injective_norm(t, opts)).collect();
        Ok(Self {
            p,
            k,
            tensors,
            inj_norms,
            marginal_order,
            zero_tol,
            zeroth,
        })
    }

    /// `T^(j)` for `1 ≤ j ≤ p`.
    pub fn tensor(&self, j: usize) -> &SymTensor {
        assert!((1..=self.p).contains(&j), "marginal index {j} out of 1..={}", self.p);
        &self.tensors[self.p - j]
    }

    /// Injective-norm estimate of `T^(j)`.
    pub fn norm(&self, j: usize) -> &InjectiveNorm {
        assert!((1..=self.p).contains(&j), "marginal index {j} out of 1..={}", self.p);
        &self.inj_norms[self.p - j]
    }

    pub fn is_trivial(&self) -> bool {
        self.marginal_order == MarginalOrder::Trivial
    }

    /// True when any norm at order `≥ from` is only a lower-bound estimate.
    pub fn has_lower_bound_norms(&self, from: usize) -> bool {
        (from.max(1)..=self.p).any(|j| self.norm(j).lower_bound_only)
    }
}

pub fn marginal_profile(fam: &ChannelFamily, zero_tol: f64) -> Result<MarginalProfile> {
    marginal_profile_with(fam, zero_tol, &InjectiveOptions::default())
}

pub fn marginal_profile_with(
    fam: &ChannelFamily,
    zero_tol: f64,
    opts: &InjectiveOptions,
) -> Result<MarginalProfile> {
    MarginalProfile::from_tensor(characteristic_tensor(fam), fam.k(), zero_tol, opts)
}
