//! Dense symmetric tensors.

use serde::{Deserialize, Serialize};

use crate::error::{GsbmError, Result};
use crate::numeric::{digits, permutations, undigits, CompensatedSum};

/// Entry-wise tolerance for accepting a tensor as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A dense order-`m` tensor over `R^dim` whose entries are invariant under
/// permutations of the index positions. Entries are stored row-major with
/// the first index most significant; order 0 holds a single scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

impl SymTensor {
    /// Builds a tensor after checking symmetry within [`SYMMETRY_TOL`].
    pub fn new(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        check_len(order, dim, entries.len())?;
        let defect = symmetry_defect(order, dim, &entries);
        if defect > SYMMETRY_TOL {
            return Err(GsbmError::NotSymmetric { defect });
        }
        Ok(Self { order, dim, entries })
    }

    /// Averages `entries` over all index permutations. Returns the tensor and
    /// the largest entry-wise deviation of the input from its symmetrization.
    pub fn symmetrized(order: usize, dim: usize, entries: Vec<f64>) -> Result<(Self, f64)> {
        check_len(order, dim, entries.len())?;
        if order < 2 {
            return Ok((Self { order, dim, entries }, 0.0));
        }
        let perms = permutations(order);
        let mut out = vec![0.0; entries.len()];
        let mut defect: f64 = 0.0;
        let mut permuted = vec![0; order];
        for (flat, slot) in out.iter_mut().enumerate() {
            let idx = digits(flat, dim, order);
            let mut acc = CompensatedSum::new();
            for perm in &perms {
                for (dst, &src) in permuted.iter_mut().zip(perm) {
                    *dst = idx[src];
                }
                acc.add(entries[undigits(&permuted, dim)]);
            }
            *slot = acc.value() / perms.len() as f64;
            defect = defect.max((entries[flat] - *slot).abs());
        }
        Ok((Self { order, dim, entries: out }, defect))
    }

    pub fn zeros(order: usize, dim: usize) -> Self {
        Self {
            order,
            dim,
            entries: vec![0.0; dim.pow(order as u32)],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            order: 0,
            dim: 1,
            entries: vec![value],
        }
    }

    /// `scale · w^{⊗order}`.
    pub fn rank_one(scale: f64, w: &[f64], order: usize) -> Self {
        let dim = w.len();
        let entries = (0..dim.pow(order as u32))
            .map(|flat| {
                digits(flat, dim, order)
                    .into_iter()
                    .fold(scale, |acc, i| acc * w[i])
            })
            .collect();
        Self { order, dim, entries }
    }

    /// Builds a symmetric tensor from an entry function, symmetrizing.
    pub fn from_fn(order: usize, dim: usize, f: impl Fn(&[usize]) -> f64) -> Result<(Self, f64)> {
        let entries = (0..dim.pow(order as u32))
            .map(|flat| f(&digits(flat, dim, order)))
            .collect();
        Self::symmetrized(order, dim, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        debug_assert_eq!(index.len(), self.order);
        self.entries[undigits(index, self.dim)]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            order: self.order,
            dim: self.dim,
            entries: self.entries.iter().map(|x| c * x).collect(),
        }
    }

    /// Scalar value of an order-0 tensor.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.order == 0).then(|| self.entries[0])
    }

    /// Row-major `dim × dim` view for order 2.
    pub fn as_matrix(&self) -> Option<nalgebra::DMatrix<f64>> {
        (self.order == 2)
            .then(|| nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.entries))
    }

    /// `T[v_1, …, v_m, ·, …, ·]`: contracts the first `vs.len()` axes.
    pub fn partial_contract(&self, vs: &[&[f64]]) -> Result<SymTensor> {
        if vs.is_empty() || vs.len() > self.order {
            return Err(GsbmError::InvalidParameter(format!(
                "cannot contract {} vectors into an order-{} tensor",
                vs.len(),
                self.order
            )));
        }
        let mut current = self.entries.clone();
        let mut order = self.order;
        for v in vs {
            if v.len() != self.dim {
                return Err(GsbmError::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
            current = contract_leading(&current, self.dim, order, v);
            order -= 1;
        }
        Ok(SymTensor {
            order,
            dim: self.dim,
            entries: current,
        })
    }

    /// `⟨T, v^{⊗m}⟩`.
    pub fn contract_all(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.dim {
            return Err(GsbmError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let mut current = self.entries.clone();
        for order in (1..=self.order).rev() {
            current = contract_leading(&current, self.dim, order, v);
        }
        Ok(current[0])
    }

    /// `T[v, …, v, ·]` (order − 1 copies of `v`), the gradient direction of
    /// `x ↦ ⟨T, x^{⊗m}⟩` up to the factor `m`.
    pub fn contract_to_vector(&self, v: &[f64]) -> Vec<f64> {
        assert!(self.order >= 1);
        let mut current = self.entries.clone();
        for order in (2..=self.order).rev() {
            current = contract_leading(&current, self.dim, order, v);
        }
        current
    }

    /// `⟨A, B⟩` for two tensors of the same shape.
    pub fn inner(&self, other: &SymTensor) -> Result<f64> {
        if self.order != other.order || self.dim != other.dim {
            return Err(GsbmError::DimensionMismatch {
                expected: self.entries.len(),
                got: other.entries.len(),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .collect::<CompensatedSum>()
            .value())
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &SymTensor) -> f64 {
        assert_eq!(self.entries.len(), other.entries.len());
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Replaces a single stored entry without re-symmetrizing. Only meant
    /// for building deliberately broken tensors in negative controls.
    pub fn with_entry_unchecked(mut self, index: &[usize], value: f64) -> Self {
        let flat = undigits(index, self.dim);
        self.entries[flat] = value;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tensor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            order: usize,
            dim: usize,
            entries: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(s).map_err(|e| GsbmError::Spec(e.to_string()))?;
        Self::new(raw.order, raw.dim, raw.entries)
    }
}

fn check_len(order: usize, dim: usize, len: usize) -> Result<()> {
    let expected = dim
        .checked_pow(order as u32)
        .ok_or_else(|| GsbmError::InvalidParameter("tensor too large".into()))?;
    if dim == 0 || len != expected {
        return Err(GsbmError::DimensionMismatch { expected, got: len });
    }
    Ok(())
}

/// Contracts the leading axis of a row-major order-`order` array with `v`.
fn contract_leading(entries: &[f64], dim: usize, order: usize, v: &[f64]) -> Vec<f64> {
    let block = dim.pow(order as u32 - 1);
    let mut out = vec![0.0; block];
    for (j, &vj) in v.iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        let slab = &entries[j * block..(j + 1) * block];
        for (o, &t) in out.iter_mut().zip(slab) {
            *o += vj * t;
        }
    }
    out
}

/// Largest `|T[idx] − T[σ(idx)]|` over all indices and permutations.
pub fn symmetry_defect(order: usize, dim: usize, entries: &[f64]) -> f64 {
    if order < 2 {
        return 0.0;
    }
    let perms = permutations(order);
    let mut permuted = vec![0; order];
    let mut defect: f64 = 0.0;
    for (flat, &x) in entries.iter().enumerate() {
        let idx = digits(flat, dim, order);
        for perm in &perms {
            for (dst, &src) in permuted.iter_mut().zip(perm) {
                *dst = idx[src];
            }
            defect = defect.max((x - entries[undigits(&permuted, dim)]).abs());
        }
    }
    defect
}
