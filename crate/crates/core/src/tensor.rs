//! Supersymmetric adjacency tensors, index mapping, unfolding, Kronecker
//! powers, and tensor-vector contraction.
//!
//! Tensors store one canonical (sorted) multi-index per symmetry class; the
//! permutation multiplicity is applied at contraction or unfolding time.
//! Linear indexing follows the `ivec` map with the first index fastest, and
//! every Kronecker-structured object in the crate composes the same way.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::poly::{Monomial, Polynomial};
use crate::scalar::{inv_factorial, uint_scale, FieldScalar, Rat, Scalar};

/// Index mapping for unfolding: 1-based indices `J` within mode sizes `N`
/// map to the 1-based linear position `j1 + sum_i (j_i - 1) * prod_{l<i} n_l`.
pub fn ivec(indices: &[usize], dims: &[usize]) -> Result<usize> {
    if indices.len() != dims.len() {
        return Err(Error::InvalidInput(format!(
            "ivec: {} indices vs {} mode sizes",
            indices.len(),
            dims.len()
        )));
    }
    let mut pos = 1usize;
    let mut stride = 1usize;
    for (i, (&j, &n)) in indices.iter().zip(dims).enumerate() {
        if j == 0 || j > n {
            return Err(Error::IndexOutOfRange {
                index: j,
                bound: n,
                position: i + 1,
            });
        }
        pos += (j - 1) * stride;
        stride *= n;
    }
    Ok(pos)
}

/// Inverse of [`ivec`]: decode a 1-based linear position into indices.
pub fn ivec_inverse(pos: usize, dims: &[usize]) -> Result<Vec<usize>> {
    let total: usize = dims.iter().product();
    if pos == 0 || pos > total {
        return Err(Error::IndexOutOfRange {
            index: pos,
            bound: total,
            position: 0,
        });
    }
    let mut rem = pos - 1;
    let mut out = Vec::with_capacity(dims.len());
    for &n in dims {
        out.push(rem % n + 1);
        rem /= n;
    }
    Ok(out)
}

/// 0-based companion of [`ivec`] for internal hot paths (no range checks).
pub(crate) fn ivec0(indices: &[usize], dim: usize) -> usize {
    let mut pos = 0;
    let mut stride = 1;
    for &j in indices {
        pos += j * stride;
        stride *= dim;
    }
    pos
}

/// 0-based inverse over a cube `dim^len`.
pub(crate) fn ivec0_inverse(mut pos: usize, dim: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(pos % dim);
        pos /= dim;
    }
    out
}

fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

fn guard_kron(what: &'static str, required: u128, caps: &Caps) -> Result<usize> {
    if required > caps.kron_cap as u128 {
        return Err(Error::KronCapExceeded {
            what,
            required,
            cap: caps.kron_cap,
        });
    }
    Ok(required as usize)
}

// ---------------------------------------------------------------------------
// Supersymmetric sparse tensor
// ---------------------------------------------------------------------------

/// Order-k supersymmetric tensor on a cubical index space `dim^k`, stored by
/// canonical sorted multi-index (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymTensor<T: Scalar> {
    order: usize,
    dim: usize,
    entries: BTreeMap<Vec<usize>, T>,
}

impl<T: Scalar> SparseSymTensor<T> {
    pub fn new(order: usize, dim: usize) -> Self {
        assert!(order >= 1 && dim >= 1);
        SparseSymTensor {
            order,
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Accumulate a value at a multi-index given in any order; the canonical
    /// key is the sorted index.
    pub fn add_entry(&mut self, index: &[usize], value: T) {
        assert_eq!(index.len(), self.order, "index arity");
        assert!(index.iter().all(|&i| i < self.dim), "index range");
        if value.is_zero() {
            return;
        }
        let mut key = index.to_vec();
        key.sort_unstable();
        match self.entries.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + value;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Value at any permutation of a stored index (zero when absent).
    pub fn get(&self, index: &[usize]) -> T {
        let mut key = index.to_vec();
        key.sort_unstable();
        self.entries.get(&key).cloned().unwrap_or_else(T::zero)
    }

    /// Canonical entries in sorted-index order.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &T)> {
        self.entries.iter()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn map_entries<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> SparseSymTensor<U> {
        let mut out = SparseSymTensor::new(self.order, self.dim);
        for (k, v) in &self.entries {
            out.add_entry(k, f(v));
        }
        out
    }
}

/// Adjacency tensor of the cardinality-k hyperedges: one canonical entry of
/// value `1/(k-1)!` per k-edge; the zero tensor when none exist.
pub fn adjacency_tensor<T: FieldScalar>(g: &Hypergraph, k: usize) -> Result<SparseSymTensor<T>> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "adjacency tensor needs cardinality >= 2, got {k}"
        )));
    }
    let mut t = SparseSymTensor::new(k, g.node_count());
    let coeff: T = inv_factorial(k as u64 - 1);
    for edge in g.edges_of_cardinality(k) {
        let idx: Vec<usize> = edge.nodes().iter().map(|&v| v - 1).collect();
        t.add_entry(&idx, coeff.clone());
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Sparse matrices
// ---------------------------------------------------------------------------

/// Sparse matrix keyed by `(row, col)`, 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat<T: Scalar> {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), T>,
}

/// Unfolded adjacency tensor over exact rationals.
pub type UnfoldedMatrix = SparseMat<Rat>;

impl<T: Scalar> SparseMat<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseMat::zero(n, n);
        for i in 0..n {
            m.add_entry(i, i, T::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn add_entry(&mut self, row: usize, col: usize, value: T) {
        assert!(row < self.rows && col < self.cols, "entry out of bounds");
        if value.is_zero() {
            return;
        }
        match self.entries.entry((row, col)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + value;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(T::zero)
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &T)> {
        self.entries.iter()
    }

    fn row_range(&self, row: usize) -> impl Iterator<Item = (&(usize, usize), &T)> {
        self.entries.range((row, 0)..=(row, usize::MAX))
    }

    pub fn add(&self, other: &SparseMat<T>) -> SparseMat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (&(r, c), v) in &other.entries {
            out.add_entry(r, c, v.clone());
        }
        out
    }

    pub fn mul(&self, other: &SparseMat<T>) -> SparseMat<T> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = SparseMat::zero(self.rows, other.cols);
        for (&(r, j), a) in &self.entries {
            for (&(_, c), b) in other.row_range(j) {
                out.add_entry(r, c, a.clone() * b.clone());
            }
        }
        out
    }

    /// Kronecker product with the *first* factor fastest: the entry at
    /// `(ra + rb * self.rows, ca + cb * self.cols)` is `self[ra, ca] *
    /// other[rb, cb]`. Matches the `ivec` linearization.
    pub fn kron(&self, other: &SparseMat<T>, caps: &Caps) -> Result<SparseMat<T>> {
        let rows = guard_kron(
            "kronecker product rows",
            self.rows as u128 * other.rows as u128,
            caps,
        )?;
        let cols = guard_kron(
            "kronecker product columns",
            self.cols as u128 * other.cols as u128,
            caps,
        )?;
        let mut out = SparseMat::zero(rows, cols);
        for (&(ra, ca), a) in &self.entries {
            for (&(rb, cb), b) in &other.entries {
                out.add_entry(
                    ra + rb * self.rows,
                    ca + cb * self.cols,
                    a.clone() * b.clone(),
                );
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = vec![T::zero(); self.rows];
        for (&(r, c), a) in &self.entries {
            out[r] = out[r].clone() + a.clone() * v[c].clone();
        }
        out
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> SparseMat<U> {
        let mut out = SparseMat::zero(self.rows, self.cols);
        for (&(r, c), v) in &self.entries {
            out.add_entry(r, c, f(v));
        }
        out
    }

    /// Interpret each column as a monomial in `dim` variables (the column
    /// index decodes through `ivec` into a tuple of variable indices) and
    /// return per-row polynomials. `degree` is the tuple length.
    pub fn rows_as_polynomials(&self, dim: usize, degree: usize) -> Vec<Polynomial<T>> {
        debug_assert_eq!(self.cols, checked_pow(dim, degree) as usize);
        let mut out = vec![Polynomial::zero(); self.rows];
        for (&(r, c), v) in &self.entries {
            let vars = ivec0_inverse(c, dim, degree);
            out[r].add_term(Monomial::from_vars(&vars), v.clone());
        }
        out
    }
}

impl SparseMat<Rat> {
    /// Debug dump: one `row col numerator/denominator` line per entry,
    /// 1-based, row-major.
    pub fn to_coord_text(&self) -> String {
        let mut s = String::new();
        for (&(r, c), v) in &self.entries {
            s.push_str(&format!(
                "{} {} {}/{}\n",
                r + 1,
                c + 1,
                v.numer(),
                v.denom()
            ));
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Unfolding, Kronecker powers, contraction
// ---------------------------------------------------------------------------

/// Lexicographically next permutation; `false` once exhausted.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All distinct permutations of a sorted multiset.
fn distinct_permutations(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

/// Number of distinct permutations of a sorted multiset: `len! / prod m_i!`.
fn multiset_permutations(sorted: &[usize]) -> u64 {
    assert!(sorted.len() <= 20, "multiplicity count overflows u64");
    let mut count: u64 = 1;
    let mut seen = 0u64;
    // count = prod over positions of (position / run length so far)
    let mut run = 0u64;
    let mut prev: Option<usize> = None;
    for &v in sorted {
        seen += 1;
        if prev == Some(v) {
            run += 1;
        } else {
            run = 1;
            prev = Some(v);
        }
        count = count * seen / run;
    }
    count
}

/// p-mode unfolding of a supersymmetric tensor into an `n x n^(k-1)` sparse
/// matrix; each canonical entry is expanded to all its distinct index
/// permutations, with columns linearized by `ivec` over the remaining modes.
pub fn unfold<T: Scalar>(t: &SparseSymTensor<T>, p: usize, caps: &Caps) -> Result<SparseMat<T>> {
    if p == 0 || p > t.order() {
        return Err(Error::IndexOutOfRange {
            index: p,
            bound: t.order(),
            position: 0,
        });
    }
    let n = t.dim();
    let cols = guard_kron("tensor unfolding", checked_pow(n, t.order() - 1), caps)?;
    let mut out = SparseMat::zero(n, cols);
    for (key, value) in t.entries() {
        for perm in distinct_permutations(key) {
            let row = perm[p - 1];
            let rest: Vec<usize> = perm
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != p - 1)
                .map(|(_, &j)| j)
                .collect();
            out.add_entry(row, ivec0(&rest, n), value.clone());
        }
    }
    Ok(out)
}

/// `x^[m]`: the m-fold Kronecker power of a vector, linearized by `ivec`
/// (entry at the position of `(j_1..j_m)` is the product of the `x_{j_i}`).
/// `m = 0` gives the length-1 vector `[1]`.
pub fn kron_power<T: Scalar>(x: &[T], m: usize, caps: &Caps) -> Result<Vec<T>> {
    guard_kron("kronecker power", checked_pow(x.len(), m), caps)?;
    let mut out = vec![T::one()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * x.len());
        for xj in x {
            for prev in &out {
                next.push(prev.clone() * xj.clone());
            }
        }
        // `next[i + j*out.len()] = out[i] * x[j]`: previous block fastest
        out = next;
    }
    Ok(out)
}

/// Tensor-vector contraction `(T x^(k-1))_i`, computed from canonical
/// entries with multiset permutation counting; never materializes the
/// `n^(k-1)` Kronecker vector.
pub fn tensor_apply<T: Scalar>(t: &SparseSymTensor<T>, x: &[T]) -> Vec<T> {
    assert_eq!(x.len(), t.dim(), "dimension mismatch");
    let mut out = vec![T::zero(); t.dim()];
    for (key, value) in t.entries() {
        let mut i = 0;
        while i < key.len() {
            let c = key[i];
            // skip repeats of c: one contraction per distinct index value
            let mut rest: Vec<usize> = key.to_vec();
            rest.remove(i);
            let mult = multiset_permutations(&rest);
            let prod = rest
                .iter()
                .fold(value.clone(), |acc, &j| acc * x[j].clone());
            out[c] = out[c].clone() + uint_scale(&prod, mult);
            while i < key.len() && key[i] == c {
                i += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{complete_hypergraph, Hypergraph};
    use crate::scalar::{rat, ratio};
    use proptest::prelude::*;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn ivec_small_examples() {
        assert_eq!(ivec(&[2, 1], &[3, 3]).unwrap(), 2);
        assert_eq!(ivec(&[1, 1, 1], &[2, 2, 2]).unwrap(), 1);
        assert_eq!(ivec(&[3, 3], &[3, 3]).unwrap(), 9);
        assert!(matches!(
            ivec(&[4, 1], &[3, 3]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(ivec(&[1], &[3, 3]).is_err());
    }

    #[test]
    fn ivec_is_a_bijection_on_4x4x4x4() {
        let dims = [4usize, 4, 4, 4];
        let mut seen = vec![false; 256];
        for a in 1..=4 {
            for b in 1..=4 {
                for c in 1..=4 {
                    for d in 1..=4 {
                        let j = [a, b, c, d];
                        let pos = ivec(&j, &dims).unwrap();
                        assert!((1..=256).contains(&pos));
                        assert!(!seen[pos - 1], "collision at {pos}");
                        seen[pos - 1] = true;
                        assert_eq!(ivec_inverse(pos, &dims).unwrap(), j);
                    }
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn adjacency_tensor_values() {
        // single 3-edge {1,2,3}: one canonical entry 1/2
        let g = Hypergraph::new(3, vec![vec![1, 2, 3]]).unwrap();
        let t: SparseSymTensor<Rat> = adjacency_tensor(&g, 3).unwrap();
        assert_eq!(t.entry_count(), 1);
        assert_eq!(t.get(&[0, 1, 2]), ratio(1, 2));
        assert_eq!(t.get(&[2, 0, 1]), ratio(1, 2));

        let tri = complete_hypergraph(3, 2).unwrap();
        let t2: SparseSymTensor<Rat> = adjacency_tensor(&tri, 2).unwrap();
        assert_eq!(t2.entry_count(), 3);
        assert_eq!(t2.get(&[0, 1]), rat(1));
        assert_eq!(t2.get(&[1, 2]), rat(1));

        let empty: SparseSymTensor<Rat> =
            adjacency_tensor(&Hypergraph::edgeless(3).unwrap(), 3).unwrap();
        assert_eq!(empty.entry_count(), 0);
    }

    #[test]
    fn unfold_single_hyperedge() {
        let g = Hypergraph::new(3, vec![vec![1, 2, 3]]).unwrap();
        let t: SparseSymTensor<Rat> = adjacency_tensor(&g, 3).unwrap();
        let m = unfold(&t, 1, &caps()).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 9));
        // row 1 (0-based row 0) has value 1/2 at the columns of (2,3) and (3,2)
        assert_eq!(m.get(0, ivec(&[2, 3], &[3, 3]).unwrap() - 1), ratio(1, 2));
        assert_eq!(m.get(0, ivec(&[3, 2], &[3, 3]).unwrap() - 1), ratio(1, 2));
        assert_eq!(m.entry_count(), 6);
        // supersymmetry: all unfoldings coincide
        assert_eq!(unfold(&t, 2, &caps()).unwrap(), m);
        assert_eq!(unfold(&t, 3, &caps()).unwrap(), m);
        assert!(unfold(&t, 4, &caps()).is_err());

        let z: SparseSymTensor<Rat> = SparseSymTensor::new(3, 3);
        assert_eq!(unfold(&z, 1, &caps()).unwrap().entry_count(), 0);
    }

    #[test]
    fn unfold_row_sums_count_incident_edges() {
        let g = complete_hypergraph(4, 3).unwrap();
        let t: SparseSymTensor<Rat> = adjacency_tensor(&g, 3).unwrap();
        let m = unfold(&t, 1, &caps()).unwrap();
        for node in 0..4 {
            let sum: Rat = (0..m.cols()).map(|c| m.get(node, c)).sum();
            let incident = g
                .edges_of_cardinality(3)
                .filter(|e| e.contains(node + 1))
                .count();
            assert_eq!(sum, rat(incident as i64));
        }
    }

    #[test]
    fn kron_power_examples() {
        let x = [rat(1), rat(2)];
        assert_eq!(
            kron_power(&x, 2, &caps()).unwrap(),
            vec![rat(1), rat(2), rat(2), rat(4)]
        );
        assert_eq!(kron_power(&x, 1, &caps()).unwrap(), x.to_vec());
        assert_eq!(kron_power(&x, 0, &caps()).unwrap(), vec![rat(1)]);

        // basis vector stays a basis vector
        let e1 = [rat(1), rat(0), rat(0)];
        let p = kron_power(&e1, 3, &caps()).unwrap();
        assert_eq!(p.len(), 27);
        assert_eq!(p[0], rat(1));
        assert!(p[1..].iter().all(|v| v.is_zero()));

        let tight = Caps {
            kron_cap: 100,
            ..Caps::default()
        };
        let big: Vec<Rat> = vec![rat(1); 10];
        assert!(matches!(
            kron_power(&big, 3, &tight),
            Err(Error::KronCapExceeded { .. })
        ));
    }

    #[test]
    fn tensor_apply_symbolic_small_graphs() {
        // 3-uniform hyperedge {1,2,3}: f = (x2 x3, x1 x3, x1 x2)
        let g = Hypergraph::new(3, vec![vec![1, 2, 3]]).unwrap();
        let t: SparseSymTensor<Rat> = adjacency_tensor(&g, 3).unwrap();
        let tp = t.map_entries(|c| Polynomial::constant(c.clone()));
        let vars: Vec<Polynomial<Rat>> = (0..3).map(Polynomial::var).collect();
        let f = tensor_apply(&tp, &vars);
        assert_eq!(f[0], Polynomial::var(1) * Polynomial::var(2));
        assert_eq!(f[1], Polynomial::var(0) * Polynomial::var(2));
        assert_eq!(f[2], Polynomial::var(0) * Polynomial::var(1));

        // triangle graph: f = (x2 + x3, x1 + x3, x1 + x2)
        let tri = complete_hypergraph(3, 2).unwrap();
        let t2: SparseSymTensor<Rat> = adjacency_tensor(&tri, 2).unwrap();
        let t2p = t2.map_entries(|c| Polynomial::constant(c.clone()));
        let f2 = tensor_apply(&t2p, &vars);
        assert_eq!(f2[0], Polynomial::var(1) + Polynomial::var(2));
        assert_eq!(f2[1], Polynomial::var(0) + Polynomial::var(2));
        assert_eq!(f2[2], Polynomial::var(0) + Polynomial::var(1));

        let z: SparseSymTensor<Rat> = SparseSymTensor::new(3, 3);
        assert!(tensor_apply(&z, &[rat(1), rat(2), rat(3)])
            .iter()
            .all(|v| v.is_zero()));
    }

    #[test]
    fn tensor_apply_with_repeated_indices() {
        // T_{001} = 1 (symmetric): (T x^2)_0 = 2 x0 x1, (T x^2)_1 = x0^2
        let mut t: SparseSymTensor<Rat> = SparseSymTensor::new(3, 2);
        t.add_entry(&[0, 0, 1], rat(1));
        let y = tensor_apply(&t, &[rat(3), rat(5)]);
        assert_eq!(y[0], rat(2 * 3 * 5));
        assert_eq!(y[1], rat(9));
    }

    #[test]
    fn coord_text_dump() {
        let g = Hypergraph::new(2, vec![vec![1, 2]]).unwrap();
        let t: SparseSymTensor<Rat> = adjacency_tensor(&g, 2).unwrap();
        let m = unfold(&t, 1, &caps()).unwrap();
        assert_eq!(m.to_coord_text(), "1 2 1/1\n2 1 1/1\n");
    }

    #[test]
    fn kron_power_jacobian_is_a_kronecker_sum() {
        // d(x^[m])/dx = sum_i x (x) ... I at slot i ... (x) x, checked
        // against the entry-wise symbolic gradient for n <= 3, m <= 3
        let caps = Caps::default();
        for n in 1usize..=3 {
            for m in 1usize..=3 {
                let vars: Vec<Polynomial<Rat>> = (0..n).map(Polynomial::var).collect();
                let xk = kron_power(&vars, m, &caps).unwrap();
                let entrywise: Vec<Vec<Polynomial<Rat>>> =
                    xk.iter().map(|p| p.gradient(n)).collect();

                let mut x_col: SparseMat<Polynomial<Rat>> = SparseMat::zero(n, 1);
                for (i, v) in vars.iter().enumerate() {
                    x_col.add_entry(i, 0, v.clone());
                }
                let eye: SparseMat<Polynomial<Rat>> = SparseMat::identity(n);
                let mut sum: SparseMat<Polynomial<Rat>> = SparseMat::zero(n.pow(m as u32), n);
                for slot in 0..m {
                    let mut acc: Option<SparseMat<Polynomial<Rat>>> = None;
                    for pos in 0..m {
                        let f = if pos == slot { &eye } else { &x_col };
                        acc = Some(match acc {
                            None => f.clone(),
                            Some(a) => a.kron(f, &caps).unwrap(),
                        });
                    }
                    sum = sum.add(&acc.unwrap());
                }
                for (row, grads) in entrywise.iter().enumerate() {
                    for (col, grad) in grads.iter().enumerate() {
                        assert_eq!(&sum.get(row, col), grad, "n={n} m={m} entry ({row},{col})");
                    }
                }
            }
        }
    }

    fn arb_sym_tensor() -> impl Strategy<Value = SparseSymTensor<Rat>> {
        (2usize..=4, 1usize..=4).prop_flat_map(|(k, n)| {
            proptest::collection::vec((proptest::collection::vec(0usize..n, k), -3i64..4), 0..5)
                .prop_map(move |entries| {
                    let mut t = SparseSymTensor::new(k, n);
                    for (idx, v) in entries {
                        t.add_entry(&idx, rat(v));
                    }
                    t
                })
        })
    }

    proptest! {
        // contraction against the unfold-then-kron oracle, exact over rationals
        #[test]
        fn tensor_apply_matches_unfold_kron(t in arb_sym_tensor()) {
            let n = t.dim();
            let x: Vec<Rat> = (0..n).map(|i| ratio(i as i64 + 2, 3)).collect();
            let direct = tensor_apply(&t, &x);
            let m = unfold(&t, 1, &Caps::default()).unwrap();
            let xk = kron_power(&x, t.order() - 1, &Caps::default()).unwrap();
            prop_assert_eq!(direct, m.apply(&xk));
        }

        #[test]
        fn all_unfoldings_agree(t in arb_sym_tensor()) {
            let m1 = unfold(&t, 1, &Caps::default()).unwrap();
            for p in 2..=t.order() {
                prop_assert_eq!(unfold(&t, p, &Caps::default()).unwrap(), m1.clone());
            }
        }

        #[test]
        fn kron_power_is_multiplicative(n in 1usize..4, a in 0usize..3, b in 0usize..3) {
            let x: Vec<Rat> = (0..n).map(|i| rat(i as i64 - 1)).collect();
            let big = kron_power(&x, a + b, &Caps::default()).unwrap();
            let left = kron_power(&x, a, &Caps::default()).unwrap();
            let right = kron_power(&x, b, &Caps::default()).unwrap();
            // first-factor-fastest composition
            let mut composed = Vec::with_capacity(big.len());
            for r in &right {
                for l in &left {
                    composed.push(l.clone() * r.clone());
                }
            }
            prop_assert_eq!(big, composed);
        }
    }
}
