//! Dense d-state tensors over index sets.
//!
//! A tensor over the index set `{i_1 < ... < i_k}` stores `d^(2k)` complex
//! entries: each index carries a variable ranging over the d^2 matrix units
//! `|b1><b2|`, encoded as `b1*d + b2`, and entries are laid out row-major in
//! the sorted index order. Contraction sums over the shared variables;
//! truncation rounds entries onto the grid of multiples of eps/2 inside
//! `[-B, B]`, which keeps the set-valued DP finite.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::IndexSet;
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    d: usize,
    indices: IndexSet,
    entries: Vec<Complex64>,
}

impl Tensor {
    pub fn new(d: usize, indices: IndexSet, entries: Vec<Complex64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::validation("tensor dimension must be at least 2"));
        }
        let expect = (d * d).pow(indices.len() as u32);
        if entries.len() != expect {
            return Err(Error::validation(format!(
                "tensor over {} indices needs {expect} entries, got {}",
                indices.len(),
                entries.len()
            )));
        }
        Ok(Tensor { d, indices, entries })
    }

    pub fn scalar(d: usize, value: Complex64) -> Self {
        Tensor {
            d,
            indices: IndexSet::empty(),
            entries: vec![value],
        }
    }

    pub fn filled(d: usize, indices: IndexSet, value: Complex64) -> Self {
        let len = (d * d).pow(indices.len() as u32);
        Tensor {
            d,
            indices,
            entries: vec![value; len],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    /// The single entry of a rank-0 tensor.
    pub fn scalar_value(&self) -> Result<Complex64> {
        if self.rank() != 0 {
            return Err(Error::invariant(format!(
                "expected a rank-0 tensor, got rank {}",
                self.rank()
            )));
        }
        Ok(self.entries[0])
    }

    /// Entry at the given variable codes, one per index in sorted order.
    pub fn entry(&self, codes: &[usize]) -> Complex64 {
        let dd = self.d * self.d;
        let mut off = 0;
        for &c in codes {
            off = off * dd + c;
        }
        self.entries[off]
    }
}

/// Hard cap on entries of any single materialized tensor.
pub const MAX_TENSOR_ENTRIES: usize = 1 << 24;

/// Entry count of a rank-`rank` tensor, or a resource error when it would
/// exceed the cap.
pub fn entry_budget(d: usize, rank: usize) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..rank {
        total = total
            .checked_mul(d * d)
            .filter(|&t| t <= MAX_TENSOR_ENTRIES)
            .ok_or_else(|| {
                Error::resource(format!(
                    "tensor over {rank} indices at d = {d} exceeds the entry cap {MAX_TENSOR_ENTRIES}"
                ))
            })?;
    }
    Ok(total)
}

/// Largest entry modulus.
pub fn linf_norm(g: &Tensor) -> f64 {
    g.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// L-infinity distance between tensors over the same index set.
pub fn distance(g1: &Tensor, g2: &Tensor) -> Result<f64> {
    if g1.d != g2.d || g1.indices != g2.indices {
        return Err(Error::validation(
            "distance requires matching dimension and index set",
        ));
    }
    Ok(g1
        .entries
        .iter()
        .zip(&g2.entries)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Reorders axes of `entries` (all of extent `dd`) so that output axis `a`
/// reads input axis `perm[a]`.
fn permute_axes(entries: &[Complex64], dd: usize, perm: &[usize]) -> Vec<Complex64> {
    let k = perm.len();
    if k <= 1 || perm.iter().enumerate().all(|(a, &p)| a == p) {
        return entries.to_vec();
    }
    let mut in_stride = vec![1usize; k];
    for a in (0..k - 1).rev() {
        in_stride[a] = in_stride[a + 1] * dd;
    }
    let mut out = vec![Complex64::default(); entries.len()];
    let mut codes = vec![0usize; k];
    for (o, slot) in out.iter_mut().enumerate() {
        let mut rem = o;
        for a in (0..k).rev() {
            codes[a] = rem % dd;
            rem /= dd;
        }
        let mut src = 0;
        for a in 0..k {
            src += codes[a] * in_stride[perm[a]];
        }
        *slot = entries[src];
    }
    out
}

/// Contraction: the result lives on the symmetric difference of the index
/// sets, and every entry sums over all assignments of the shared variables
/// in ascending code order. An empty intersection yields the outer product,
/// which network contraction never uses but test oracles may.
pub fn contract(g1: &Tensor, g2: &Tensor) -> Result<Tensor> {
    if g1.d != g2.d {
        return Err(Error::validation(format!(
            "dimension mismatch: {} vs {}",
            g1.d, g2.d
        )));
    }
    let d = g1.d;
    let dd = d * d;
    let shared = g1.indices.intersection(&g2.indices);
    let free1: Vec<u32> = g1.indices.iter().filter(|i| !shared.contains(*i)).collect();
    let free2: Vec<u32> = g2.indices.iter().filter(|i| !shared.contains(*i)).collect();

    // Permute g1 to [free1..., shared...] and g2 to [shared..., free2...].
    let axis_order = |indices: &IndexSet, target: &[u32]| -> Vec<usize> {
        target
            .iter()
            .map(|t| indices.iter().position(|i| i == *t).unwrap())
            .collect()
    };
    let order1: Vec<u32> = free1.iter().copied().chain(shared.iter()).collect();
    let order2: Vec<u32> = shared.iter().chain(free2.iter().copied()).collect();
    let a = permute_axes(&g1.entries, dd, &axis_order(&g1.indices, &order1));
    let b = permute_axes(&g2.entries, dd, &axis_order(&g2.indices, &order2));

    let rows = dd.pow(free1.len() as u32);
    let cols = dd.pow(free2.len() as u32);
    let inner = dd.pow(shared.len() as u32);
    let product = par::map_indexed(rows, |x| {
        let mut row = vec![Complex64::default(); cols];
        for (s, &av) in a[x * inner..(x + 1) * inner].iter().enumerate() {
            let brow = &b[s * cols..(s + 1) * cols];
            for (y, slot) in row.iter_mut().enumerate() {
                *slot += av * brow[y];
            }
        }
        row
    })
    .into_iter()
    .flatten()
    .collect::<Vec<_>>();

    // Axes are currently [free1..., free2...]; merge into sorted order.
    let result_set = g1.indices.sym_diff(&g2.indices);
    let concat: Vec<u32> = free1.iter().chain(free2.iter()).copied().collect();
    let perm: Vec<usize> = result_set
        .iter()
        .map(|t| concat.iter().position(|&c| c == t).unwrap())
        .collect();
    let entries = permute_axes(&product, dd, &perm);
    Tensor::new(d, result_set, entries)
}

/// Grid parameters for truncation: entries round componentwise onto integer
/// multiples of `epsilon/2` clamped to `[-clamp_bound, clamp_bound]`. The
/// error bounds of the DP are proved for a clamp bound of 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetParams {
    pub epsilon: f64,
    pub clamp_bound: f64,
}

impl NetParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_clamp(epsilon, 1.0)
    }

    pub fn with_clamp(epsilon: f64, clamp_bound: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::validation(format!(
                "grid parameter must lie in (0, 1), got {epsilon}"
            )));
        }
        if !clamp_bound.is_finite() || clamp_bound <= 0.0 {
            return Err(Error::validation("clamp bound must be positive"));
        }
        Ok(NetParams {
            epsilon,
            clamp_bound,
        })
    }

    fn step(&self) -> f64 {
        self.epsilon / 2.0
    }

    fn max_steps(&self) -> i64 {
        (self.clamp_bound / self.step()).floor() as i64
    }
}

fn round_component(x: f64, p: &NetParams) -> Result<i64> {
    if !x.is_finite() {
        return Err(Error::invariant("non-finite tensor entry"));
    }
    if x.abs() > p.clamp_bound + p.epsilon {
        return Err(Error::validation(format!(
            "entry outside net range: component {x} exceeds {} + {}",
            p.clamp_bound, p.epsilon
        )));
    }
    let k = (x / p.step()).round_ties_even() as i64;
    let m = p.max_steps();
    Ok(k.clamp(-m, m))
}

/// Rounds every entry onto the grid. Rounding ties go to the even multiple.
/// Guarantees `distance(g, trunc(g)) <= epsilon` for entries within the
/// clamp bound.
pub fn trunc(g: &Tensor, p: &NetParams) -> Result<Tensor> {
    Ok(trunc_with_key(g, p)?.0)
}

/// Truncation plus the integer grid coordinates, used as an exact
/// deduplication key.
pub fn trunc_with_key(g: &Tensor, p: &NetParams) -> Result<(Tensor, Vec<i64>)> {
    let step = p.step();
    let mut entries = Vec::with_capacity(g.entries.len());
    let mut key = Vec::with_capacity(g.entries.len() * 2);
    for z in &g.entries {
        let kr = round_component(z.re, p)?;
        let ki = round_component(z.im, p)?;
        key.push(kr);
        key.push(ki);
        entries.push(Complex64::new(kr as f64 * step, ki as f64 * step));
    }
    Ok((
        Tensor {
            d: g.d,
            indices: g.indices.clone(),
            entries,
        },
        key,
    ))
}

/// Member of a [`TensorSet`] with the provenance of its first producer.
#[derive(Debug, Clone)]
pub struct SetMember {
    pub tensor: Tensor,
    /// Indices into the two parent sets for DP-produced members; for leaf
    /// sets this is `(k, k)` where `k` indexes the original collection.
    pub provenance: (usize, usize),
}

/// Deduplicated set of tensors sharing one index set.
#[derive(Debug, Clone)]
pub struct TensorSet {
    d: usize,
    indices: IndexSet,
    members: Vec<SetMember>,
}

impl TensorSet {
    /// Builds a leaf set from exact (non-truncated) tensors, deduplicating
    /// entrywise-equal ones. Member provenance records the position of its
    /// first occurrence in `tensors`.
    pub fn from_tensors(d: usize, indices: IndexSet, tensors: Vec<Tensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::validation("tensor set must be nonempty"));
        }
        let mut set = TensorSet {
            d,
            indices,
            members: Vec::new(),
        };
        for (k, t) in tensors.into_iter().enumerate() {
            if t.d != d || t.indices != set.indices {
                return Err(Error::validation(
                    "tensor set members must share dimension and index set",
                ));
            }
            if set.members.iter().all(|m| m.tensor != t) {
                set.members.push(SetMember {
                    tensor: t,
                    provenance: (k, k),
                });
            }
        }
        Ok(set)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[SetMember] {
        &self.members
    }
}

/// Contracts every pair of the cartesian product, truncates, and
/// deduplicates by exact grid coordinates. Pairs are evaluated in ascending
/// `(left, right)` order and the first producer of a grid point wins, so
/// the result does not depend on the evaluation schedule.
pub fn set_contract_trunc(f1: &TensorSet, f2: &TensorSet, p: &NetParams) -> Result<TensorSet> {
    if f1.d != f2.d {
        return Err(Error::validation("dimension mismatch between tensor sets"));
    }
    if f1.indices.intersection(&f2.indices).is_empty() {
        return Err(Error::validation("set contraction requires a shared index"));
    }
    let pairs = f1.len() * f2.len();
    let produced: Vec<Result<(Tensor, Vec<i64>)>> = par::map_indexed(pairs, |idx| {
        let (i, j) = (idx / f2.len(), idx % f2.len());
        let c = contract(&f1.members[i].tensor, &f2.members[j].tensor)?;
        trunc_with_key(&c, p)
    });
    let mut out = TensorSet {
        d: f1.d,
        indices: f1.indices.sym_diff(&f2.indices),
        members: Vec::new(),
    };
    let mut seen: std::collections::HashMap<Vec<i64>, usize> = std::collections::HashMap::new();
    for (idx, item) in produced.into_iter().enumerate() {
        let (tensor, key) = item?;
        if seen.contains_key(&key) {
            continue;
        }
        seen.insert(key, out.members.len());
        out.members.push(SetMember {
            tensor,
            provenance: (idx / f2.len(), idx % f2.len()),
        });
    }
    Ok(out)
}
