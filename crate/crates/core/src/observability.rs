//! Local weak observability of hypergraph dynamics.
//!
//! The production path is symbolic: iterate Lie derivatives of the outputs
//! along the exact polynomial field, stack the gradients into the nonlinear
//! observability matrix (NOM), and decide `rank = n` by evaluating the
//! matrix at random points of a large prime field. Failure probabilities
//! are tracked with the Schwartz-Zippel bound and reported on the
//! certificate.
//!
//! A second, closed-form construction assembles the same matrix from
//! Kronecker sums of unfolded adjacency tensors. Its dimensions grow as
//! `n^(sum k_i)`, so it is capped to toy sizes and serves as an independent
//! oracle for the symbolic path.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::dynamics::{sensor_matrix, vector_field, OutputMatrix, PolyVectorField, SensorSet};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::poly::Polynomial;
use crate::scalar::{
    derive_seed, is_prime_u64, rat_to_fp, FieldScalar, Fp, Rat, Scalar, SplitMix64, DEFAULT_PRIMES,
};
use crate::tensor::{adjacency_tensor, unfold, SparseMat, SparseSymTensor};

/// `L_f phi = sum_i (d phi / d x_i) f_i`, exact.
pub fn lie_derivative<T: Scalar>(phi: &Polynomial<T>, f: &PolyVectorField<T>) -> Polynomial<T> {
    if let Some(v) = phi.max_var() {
        assert!(v < f.dim(), "dimension mismatch");
    }
    let mut out = Polynomial::zero();
    for (i, fi) in f.components().iter().enumerate() {
        if fi.is_zero() {
            continue;
        }
        let d = phi.partial_deriv(i);
        if !d.is_zero() {
            out = out + &d * fi;
        }
    }
    out
}

/// The stacked functions `L^0_f g_i, ..., L^r_f g_i`, level-major: entries
/// `0..m-1` are the linear outputs `C x`, the next `m` their first Lie
/// derivatives, and so on.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationStack {
    n: usize,
    m: usize,
    depth: usize,
    entries: Vec<Polynomial<Rat>>,
}

impl ObservationStack {
    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn output_count(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `m * (depth + 1)` polynomials, level-major.
    pub fn entries(&self) -> &[Polynomial<Rat>] {
        &self.entries
    }

    pub fn entry(&self, level: usize, output: usize) -> &Polynomial<Rat> {
        &self.entries[level * self.m + output]
    }
}

/// Level-by-level Lie-derivative iterator with a term-count guard.
struct LieChain {
    n: usize,
    field: PolyVectorField<Rat>,
    levels: Vec<Vec<Polynomial<Rat>>>,
    total_terms: usize,
}

impl LieChain {
    fn new(g: &Hypergraph, c: &OutputMatrix) -> Result<Self> {
        let n = g.node_count();
        if c.state_dim() != n {
            return Err(Error::InvalidInput(format!(
                "output matrix is over {} states, hypergraph has {}",
                c.state_dim(),
                n
            )));
        }
        let outputs = c.output_polynomials();
        let total_terms = outputs.iter().map(Polynomial::term_count).sum();
        Ok(LieChain {
            n,
            field: vector_field(g),
            levels: vec![outputs],
            total_terms,
        })
    }

    fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Append the next derivative level; fails once the stack holds more
    /// terms than the cap allows.
    fn extend(&mut self, caps: &Caps) -> Result<&[Polynomial<Rat>]> {
        let last = self.levels.last().expect("level 0 exists");
        let next: Vec<Polynomial<Rat>> = last
            .iter()
            .map(|phi| lie_derivative(phi, &self.field))
            .collect();
        self.total_terms += next.iter().map(Polynomial::term_count).sum::<usize>();
        self.levels.push(next);
        if self.total_terms > caps.term_cap {
            return Err(Error::TermCapExceeded {
                terms: self.total_terms,
                depth: self.depth(),
                cap: caps.term_cap,
            });
        }
        Ok(self.levels.last().unwrap())
    }

    fn into_stack(self) -> ObservationStack {
        let m = self.levels[0].len();
        let depth = self.levels.len() - 1;
        ObservationStack {
            n: self.n,
            m,
            depth,
            entries: self.levels.into_iter().flatten().collect(),
        }
    }
}

/// Build the observation stack to depth `r` by repeated Lie derivatives
/// against the full field. Since `f` is the sum of its per-cardinality
/// summands and the Lie derivative is additive, this equals the sum over
/// all cardinality sequences without enumerating them.
pub fn observation_stack(
    g: &Hypergraph,
    c: &OutputMatrix,
    r: usize,
    caps: &Caps,
) -> Result<ObservationStack> {
    let mut chain = LieChain::new(g, c)?;
    for _ in 0..r {
        chain.extend(caps)?;
    }
    Ok(chain.into_stack())
}

/// The NOM as exact polynomials: row `j` is the gradient of stack entry `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct NomSymbolic {
    n: usize,
    rows: Vec<Vec<Polynomial<Rat>>>,
}

impl NomSymbolic {
    pub fn from_rows(n: usize, rows: Vec<Vec<Polynomial<Rat>>>) -> Self {
        assert!(rows.iter().all(|r| r.len() == n));
        NomSymbolic { n, rows }
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Polynomial<Rat>>] {
        &self.rows
    }

    /// Maximum total degree of any entry (0 for an all-zero matrix).
    pub fn max_row_degree(&self) -> u32 {
        self.rows
            .iter()
            .flatten()
            .map(Polynomial::total_degree)
            .max()
            .unwrap_or(0)
    }

    /// Rows mapped into `F_p`; fails when `p` divides a coefficient
    /// denominator.
    fn rows_mod_p(&self, p: u64) -> Result<Vec<Vec<Polynomial<Fp>>>> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.try_map_coeffs(&mut |c| rat_to_fp(c, p)))
                    .collect()
            })
            .collect()
    }
}

/// Gradients of every stack entry, in stack order.
pub fn nom_symbolic(stack: &ObservationStack) -> NomSymbolic {
    NomSymbolic {
        n: stack.n,
        rows: stack.entries.iter().map(|e| e.gradient(stack.n)).collect(),
    }
}

/// Rank by Gaussian elimination over any field scalar, exact for rationals.
pub fn matrix_rank<F: FieldScalar>(mut rows: Vec<Vec<F>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    debug_assert!(rows.iter().all(|r| r.len() == ncols));
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = F::one() / rows[rank][col].clone();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone() * inv.clone();
            let (pivot_row, rest) = rows.split_at_mut(rank + 1);
            let target = &mut rest[r - rank - 1];
            for (lhs, rhs) in target[col..].iter_mut().zip(&pivot_row[rank][col..]) {
                *lhs = lhs.clone() - factor.clone() * rhs.clone();
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// One evaluation of the NOM at a random field point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub prime: u64,
    pub seed: u64,
    pub rank: usize,
}

/// Result of a probabilistic generic-rank computation. The certified rank is
/// the maximum over trials; `failure_bound` bounds the probability that the
/// true generic rank is still larger (each independent trial multiplies the
/// Schwartz-Zippel bound `D/p` down). An empty trial list marks an exact
/// symbolic computation with zero failure probability.
#[derive(Clone, Debug, PartialEq)]
pub struct RankCertificate {
    pub rank: usize,
    pub n: usize,
    pub trials: Vec<TrialRecord>,
    pub max_total_degree: u32,
    pub failure_bound: Rat,
    pub low_confidence: bool,
}

/// Knobs for the probabilistic rank test.
#[derive(Clone, Debug)]
pub struct RankOptions {
    pub primes: Vec<u64>,
    pub points_per_prime: usize,
    pub seed: u64,
    /// Certificates whose failure bound is not below this are marked
    /// low-confidence.
    pub confidence_threshold: Rat,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            primes: DEFAULT_PRIMES.to_vec(),
            points_per_prime: 5,
            seed: 0,
            confidence_threshold: Rat::new(1.into(), (1u64 << 40).into()),
        }
    }
}

const TRIAL_TAG: u64 = 0x7472_6961; // "tria"
const PROBE_TAG: u64 = 0x7072_6f62; // "prob"

/// Degree bound for the decisive minor: `n` times the maximum row degree.
fn minor_degree_bound(nom: &NomSymbolic) -> u64 {
    nom.n as u64 * nom.max_row_degree() as u64
}

pub(crate) fn check_prime(p: u64, required: u64) -> Result<()> {
    if !is_prime_u64(p) {
        return Err(Error::BadPrime {
            p,
            reason: "not prime".into(),
        });
    }
    if p <= required {
        return Err(Error::BadPrime {
            p,
            reason: format!("must exceed the minor degree bound {required}"),
        });
    }
    Ok(())
}

/// Generic rank of a polynomial matrix by evaluation at uniformly random
/// points of each prime field, with exact elimination on the evaluated
/// matrix. Every trial's sub-seed is recorded for replay.
pub fn generic_rank(nom: &NomSymbolic, opts: &RankOptions) -> Result<RankCertificate> {
    if opts.primes.is_empty() || opts.points_per_prime == 0 {
        return Err(Error::InvalidInput(
            "rank test needs at least one prime and one point".into(),
        ));
    }
    let degree_bound = minor_degree_bound(nom);
    for &p in &opts.primes {
        check_prime(p, degree_bound)?;
    }
    let mut trials = Vec::new();
    let mut failure_bound = Rat::one();
    for (pi, &p) in opts.primes.iter().enumerate() {
        let rows_p = nom.rows_mod_p(p)?;
        for t in 0..opts.points_per_prime {
            let seed = derive_seed(opts.seed, &[TRIAL_TAG, pi as u64, t as u64]);
            let point = SplitMix64::new(seed).field_point(nom.n, p);
            let rank = matrix_rank(evaluate_rows(&rows_p, &point));
            trials.push(TrialRecord {
                prime: p,
                seed,
                rank,
            });
            failure_bound *= Rat::new(degree_bound.into(), p.into());
        }
    }
    let rank = trials.iter().map(|t| t.rank).max().unwrap_or(0);
    let low_confidence = failure_bound >= opts.confidence_threshold;
    Ok(RankCertificate {
        rank,
        n: nom.n,
        trials,
        max_total_degree: nom.max_row_degree(),
        failure_bound,
        low_confidence,
    })
}

fn evaluate_rows(rows: &[Vec<Polynomial<Fp>>], point: &[Fp]) -> Vec<Vec<Fp>> {
    rows.iter()
        .map(|row| row.iter().map(|e| e.evaluate(point)).collect())
        .collect()
}

/// Exact generic rank by symbolic minor expansion over the rationals.
/// Exponential in the matrix size; only exposed for `n <= 3`.
pub fn exact_symbolic_rank(nom: &NomSymbolic) -> Result<usize> {
    if nom.n > 3 {
        return Err(Error::InvalidInput(format!(
            "exact symbolic rank is limited to n <= 3, got n = {}",
            nom.n
        )));
    }
    let max_order = nom.n.min(nom.row_count());
    for order in (1..=max_order).rev() {
        for rows in crate::hypergraph::k_subsets(nom.row_count(), order) {
            for cols in crate::hypergraph::k_subsets(nom.n, order) {
                let sub: Vec<Vec<&Polynomial<Rat>>> = rows
                    .iter()
                    .map(|&r| cols.iter().map(|&c| &nom.rows[r - 1][c - 1]).collect())
                    .collect();
                if !poly_det(&sub).is_zero() {
                    return Ok(order);
                }
            }
        }
    }
    Ok(0)
}

/// Laplace expansion along the first row.
fn poly_det(m: &[Vec<&Polynomial<Rat>>]) -> Polynomial<Rat> {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut det = Polynomial::zero();
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<&Polynomial<Rat>>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, &e)| e)
                    .collect()
            })
            .collect();
        let cofactor = *entry * &poly_det(&minor);
        det = if j % 2 == 0 {
            det + cofactor
        } else {
            det - cofactor
        };
    }
    det
}

/// Final observability decision.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservabilityVerdict {
    pub observable: bool,
    pub certificate: RankCertificate,
    pub r_used: usize,
}

/// Options for a full observability run.
#[derive(Clone, Debug, Default)]
pub struct ObsOptions {
    /// Lie-derivative depth; defaults to the state dimension.
    pub depth: Option<usize>,
    pub rank: RankOptions,
    pub caps: Caps,
    /// Decide by exact symbolic rank instead of random evaluation (n <= 3).
    pub exact: bool,
}

/// Observability test with default options: depth `r = n`, three primes near
/// 2^61, five points each.
pub fn is_locally_weakly_observable(
    g: &Hypergraph,
    c: &OutputMatrix,
) -> Result<ObservabilityVerdict> {
    observability_verdict(g, c, &ObsOptions::default())
}

/// Observability test: stack Lie derivatives to the requested depth, take
/// gradients, and decide `rank = n` by generic rank.
///
/// Levels are added one at a time; once the accumulated rows reach rank `n`
/// at a fixed probe point and again at an independent confirmation point,
/// deeper levels cannot change the verdict and the chain stops early.
pub fn observability_verdict(
    g: &Hypergraph,
    c: &OutputMatrix,
    opts: &ObsOptions,
) -> Result<ObservabilityVerdict> {
    let n = g.node_count();
    let r_max = opts.depth.unwrap_or(n);
    let probe_prime = *opts
        .rank
        .primes
        .first()
        .ok_or_else(|| Error::InvalidInput("rank test needs at least one prime".into()))?;
    check_prime(probe_prime, 0)?;
    let probe_points: Vec<Vec<Fp>> = (0..2)
        .map(|i| {
            SplitMix64::new(derive_seed(opts.rank.seed, &[PROBE_TAG, i]))
                .field_point(n, probe_prime)
        })
        .collect();

    let mut chain = LieChain::new(g, c)?;
    let mut rows: Vec<Vec<Polynomial<Rat>>> = Vec::new();
    let mut probe_rows: [Vec<Vec<Fp>>; 2] = [Vec::new(), Vec::new()];
    let mut r_used = r_max;
    let mut level = 0;
    loop {
        let entries = if level == 0 {
            chain.levels[0].clone()
        } else {
            chain.extend(&opts.caps)?.to_vec()
        };
        for e in &entries {
            let grad = e.gradient(n);
            let grad_fp: Vec<Polynomial<Fp>> = grad
                .iter()
                .map(|p| p.try_map_coeffs(&mut |c| rat_to_fp(c, probe_prime)))
                .collect::<Result<_>>()?;
            for (probe, point) in probe_rows.iter_mut().zip(&probe_points) {
                probe.push(grad_fp.iter().map(|q| q.evaluate(point)).collect());
            }
            rows.push(grad);
        }
        if matrix_rank(probe_rows[0].clone()) == n && matrix_rank(probe_rows[1].clone()) == n {
            r_used = level;
            break;
        }
        if level == r_max {
            break;
        }
        level += 1;
    }

    let nom = NomSymbolic { n, rows };
    let certificate = if opts.exact {
        let rank = exact_symbolic_rank(&nom)?;
        RankCertificate {
            rank,
            n,
            trials: Vec::new(),
            max_total_degree: nom.max_row_degree(),
            failure_bound: Rat::zero(),
            low_confidence: false,
        }
    } else {
        generic_rank(&nom, &opts.rank)?
    };
    Ok(ObservabilityVerdict {
        observable: certificate.rank == n,
        certificate,
        r_used,
    })
}

// ---------------------------------------------------------------------------
// Kronecker-form construction (bounded-size oracle)
// ---------------------------------------------------------------------------

/// Kronecker-sum derivative matrix for a cardinality sequence `(k_1..k_p)`:
/// the unfolded `A_{k_p}` placed in each of `sum_{i<p} k_i - (2p-3)` slots
/// with identities elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct BMatrix {
    pub seq: Vec<usize>,
    pub slots: usize,
    pub matrix: SparseMat<Rat>,
}

/// Build the B-matrix of a cardinality sequence (length >= 2). Dimensions
/// are `n^slots x n^(slots + k_p - 2)`; the kron cap refuses anything
/// larger, naming the required size.
pub fn b_matrix(g: &Hypergraph, seq: &[usize], caps: &Caps) -> Result<BMatrix> {
    if seq.len() < 2 {
        return Err(Error::InvalidInput(
            "B-matrix needs a cardinality sequence of length >= 2".into(),
        ));
    }
    if let Some(&k) = seq.iter().find(|&&k| k < 2) {
        return Err(Error::InvalidInput(format!(
            "cardinalities must be >= 2, got {k}"
        )));
    }
    let n = g.node_count();
    let p = seq.len();
    let k_last = seq[p - 1];
    let slots: usize = seq[..p - 1].iter().sum::<usize>() - (2 * p - 3);
    let t: SparseSymTensor<Rat> = adjacency_tensor(g, k_last)?;
    let a = unfold(&t, 1, caps)?;
    let identity: SparseMat<Rat> = SparseMat::identity(n);
    let mut sum: Option<SparseMat<Rat>> = None;
    for slot in 0..slots {
        let mut factor: Option<SparseMat<Rat>> = None;
        for pos in 0..slots {
            let next = if pos == slot { &a } else { &identity };
            factor = Some(match factor {
                None => next.clone(),
                Some(acc) => acc.kron(next, caps)?,
            });
        }
        let term = factor.expect("slots >= 1");
        sum = Some(match sum {
            None => term,
            Some(acc) => acc.add(&term),
        });
    }
    Ok(BMatrix {
        seq: seq.to_vec(),
        slots,
        matrix: sum.expect("slots >= 1"),
    })
}

/// NOM via the closed-form chain `C A_{k_1} B_{k_2 k_1} ... x^[d]`, summed
/// over all cardinality sequences per level, then differentiated. Must agree
/// with [`nom_symbolic`] term by term; intended for small instances only.
pub fn nom_kronecker(
    g: &Hypergraph,
    c: &OutputMatrix,
    r: usize,
    caps: &Caps,
) -> Result<NomSymbolic> {
    let n = g.node_count();
    if c.state_dim() != n {
        return Err(Error::InvalidInput(format!(
            "output matrix is over {} states, hypergraph has {}",
            c.state_dim(),
            n
        )));
    }
    let m = c.output_count();
    let top = g.max_cardinality();
    let mut levels: Vec<Vec<Polynomial<Rat>>> = vec![vec![Polynomial::zero(); m]; r + 1];
    levels[0] = c.output_polynomials();

    // depth-first over cardinality sequences, reusing the chain prefix
    struct Dfs<'a> {
        g: &'a Hypergraph,
        caps: &'a Caps,
        n: usize,
        top: usize,
        r: usize,
        levels: &'a mut Vec<Vec<Polynomial<Rat>>>,
    }
    impl Dfs<'_> {
        fn go(&mut self, seq: &mut Vec<usize>, prod: &SparseMat<Rat>, degree: usize) -> Result<()> {
            let level = seq.len();
            for (out, poly) in self.levels[level]
                .iter_mut()
                .zip(prod.rows_as_polynomials(self.n, degree))
            {
                *out = out.clone() + poly;
            }
            if level < self.r {
                for k in 2..=self.top {
                    seq.push(k);
                    let b = b_matrix(self.g, seq, self.caps)?;
                    let next = prod.mul(&b.matrix);
                    self.go(seq, &next, degree + k - 2)?;
                    seq.pop();
                }
            }
            Ok(())
        }
    }

    if r >= 1 && top >= 2 {
        let c_mat = c.to_sparse();
        let mut dfs = Dfs {
            g,
            caps,
            n,
            top,
            r,
            levels: &mut levels,
        };
        for k1 in 2..=top {
            let t: SparseSymTensor<Rat> = adjacency_tensor(g, k1)?;
            let a = unfold(&t, 1, caps)?;
            let prod = c_mat.mul(&a);
            let mut seq = vec![k1];
            dfs.go(&mut seq, &prod, k1 - 1)?;
        }
    }

    let rows = levels
        .into_iter()
        .flatten()
        .map(|e| e.gradient(n))
        .collect();
    Ok(NomSymbolic { n, rows })
}

// ---------------------------------------------------------------------------
// Maximal-cardinality implication
// ---------------------------------------------------------------------------

/// Verdicts for a hypergraph and its restriction to maximal cardinality,
/// with the implication "restricted observable => full observable".
#[derive(Clone, Debug)]
pub struct Prop15Report {
    pub max_cardinality: usize,
    pub restricted: ObservabilityVerdict,
    pub full: ObservabilityVerdict,
    pub implication_holds: bool,
}

/// Check the maximal-cardinality implication on one hypergraph. A violation
/// would contradict the supporting argument (top-degree NOM terms come
/// from maximal edges) and is a bug-stopping event.
pub fn check_proposition15(
    g: &Hypergraph,
    c: &OutputMatrix,
    opts: &ObsOptions,
) -> Result<Prop15Report> {
    let top = g.max_cardinality();
    if top < 2 {
        return Err(Error::InvalidInput(
            "implication check needs at least one hyperedge".into(),
        ));
    }
    let restricted = observability_verdict(&g.restrict_to_cardinality(top), c, opts)?;
    let full = observability_verdict(g, c, opts)?;
    let implication_holds = !restricted.observable || full.observable;
    Ok(Prop15Report {
        max_cardinality: top,
        restricted,
        full,
        implication_holds,
    })
}

// ---------------------------------------------------------------------------
// JSON export
// ---------------------------------------------------------------------------

/// Verdict document written by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictJson {
    pub n: usize,
    pub sensors: Vec<usize>,
    pub r_used: usize,
    pub rank: usize,
    pub observable: bool,
    pub trials: Vec<TrialRecord>,
    pub failure_bound: String,
}

impl ObservabilityVerdict {
    pub fn to_json(&self, sensors: &SensorSet) -> VerdictJson {
        VerdictJson {
            n: self.certificate.n,
            sensors: sensors.to_vec(),
            r_used: self.r_used,
            rank: self.certificate.rank,
            observable: self.observable,
            trials: self.certificate.trials.clone(),
            failure_bound: format!(
                "{}/{}",
                self.certificate.failure_bound.numer(),
                self.certificate.failure_bound.denom()
            ),
        }
    }
}

/// Convenience wrapper: verdict for a sensor set on a hypergraph.
pub fn verdict_for_sensors(
    g: &Hypergraph,
    sensors: &SensorSet,
    opts: &ObsOptions,
) -> Result<ObservabilityVerdict> {
    let c = sensor_matrix(sensors, g.node_count())?;
    observability_verdict(g, &c, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{complete_hypergraph, Hypergraph};
    use crate::scalar::rat;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn x(i: usize) -> Polynomial<Rat> {
        Polynomial::var(i)
    }

    fn single_three_edge() -> Hypergraph {
        Hypergraph::new(3, vec![vec![1, 2, 3]]).unwrap()
    }

    fn e1(n: usize) -> OutputMatrix {
        sensor_matrix(&SensorSet::new([1]), n).unwrap()
    }

    #[test]
    fn lie_derivative_examples() {
        let f = vector_field(&single_three_edge());
        assert_eq!(lie_derivative(&x(0), &f), x(1) * x(2));
        // L_f(x2 x3) = x1 x3^2 + x1 x2^2
        let phi = x(1) * x(2);
        let expected = x(0) * x(2) * x(2) + x(0) * x(1) * x(1);
        assert_eq!(lie_derivative(&phi, &f), expected);
        let c = Polynomial::constant(rat(7));
        assert!(lie_derivative(&c, &f).is_zero());
    }

    #[test]
    fn observation_stack_hyperedge() {
        let g = complete_hypergraph(3, 3).unwrap();
        let stack = observation_stack(&g, &e1(3), 2, &Caps::default()).unwrap();
        assert_eq!(stack.entries().len(), 3);
        assert_eq!(stack.entry(0, 0), &x(0));
        assert_eq!(stack.entry(1, 0), &(x(1) * x(2)));
        assert_eq!(
            stack.entry(2, 0),
            &(x(0) * x(2) * x(2) + x(0) * x(1) * x(1))
        );
    }

    #[test]
    fn observation_stack_edgeless_and_linear() {
        let g = Hypergraph::edgeless(3).unwrap();
        let stack = observation_stack(&g, &e1(3), 3, &Caps::default()).unwrap();
        assert_eq!(stack.entry(0, 0), &x(0));
        for level in 1..=3 {
            assert!(stack.entry(level, 0).is_zero());
        }

        // triangle graph: linear case (x1, x2+x3, 2x1+x2+x3)
        let tri = complete_hypergraph(3, 2).unwrap();
        let stack = observation_stack(&tri, &e1(3), 2, &Caps::default()).unwrap();
        assert_eq!(stack.entry(1, 0), &(x(1) + x(2)));
        assert_eq!(stack.entry(2, 0), &(x(0).scale(&rat(2)) + x(1) + x(2)));
    }

    #[test]
    fn term_cap_aborts_with_depth() {
        let g = complete_hypergraph(4, 3).unwrap();
        let caps = Caps {
            term_cap: 10,
            ..Caps::default()
        };
        match observation_stack(&g, &e1(4), 4, &caps) {
            Err(Error::TermCapExceeded { depth, cap: 10, .. }) => assert!(depth >= 1),
            other => panic!("expected term-cap abort, got {other:?}"),
        }
    }

    #[test]
    fn nom_gradients() {
        let g = complete_hypergraph(3, 3).unwrap();
        let stack = observation_stack(&g, &e1(3), 2, &Caps::default()).unwrap();
        let nom = nom_symbolic(&stack);
        assert_eq!(nom.row_count(), 3);
        let one = Polynomial::constant(rat(1));
        let zero = Polynomial::zero();
        assert_eq!(nom.rows()[0], vec![one, zero.clone(), zero.clone()]);
        assert_eq!(nom.rows()[1], vec![zero.clone(), x(2), x(1)]);
        assert_eq!(
            nom.rows()[2],
            vec![
                x(2) * x(2) + x(1) * x(1),
                (x(0) * x(1)).scale(&rat(2)),
                (x(0) * x(2)).scale(&rat(2)),
            ]
        );
    }

    #[test]
    fn matrix_rank_rational() {
        let rows = vec![
            vec![rat(1), rat(2), rat(3)],
            vec![rat(2), rat(4), rat(6)],
            vec![rat(0), rat(1), rat(1)],
        ];
        assert_eq!(matrix_rank(rows), 2);
        assert_eq!(matrix_rank::<Rat>(vec![vec![rat(0); 3]; 2]), 0);
        assert_eq!(matrix_rank::<Rat>(Vec::new()), 0);
    }

    #[test]
    fn generic_rank_examples() {
        let g = complete_hypergraph(3, 3).unwrap();
        let stack = observation_stack(&g, &e1(3), 2, &Caps::default()).unwrap();
        let nom = nom_symbolic(&stack);
        let cert = generic_rank(&nom, &RankOptions::default()).unwrap();
        assert_eq!(cert.rank, 3);
        assert_eq!(cert.trials.len(), 15);
        assert!(!cert.low_confidence);
        assert!(cert.trials.iter().all(|t| t.rank == 3));

        // determinant oracle: det = 2 x1 x3^2 - 2 x1 x2^2, nonzero
        let det = poly_det(&[
            vec![&nom.rows()[0][0], &nom.rows()[0][1], &nom.rows()[0][2]],
            vec![&nom.rows()[1][0], &nom.rows()[1][1], &nom.rows()[1][2]],
            vec![&nom.rows()[2][0], &nom.rows()[2][1], &nom.rows()[2][2]],
        ]);
        let expected = (x(0) * x(2) * x(2) - x(0) * x(1) * x(1)).scale(&rat(2));
        assert_eq!(det, expected);

        // zero matrix
        let zero = NomSymbolic::from_rows(2, vec![vec![Polynomial::zero(); 2]; 3]);
        assert_eq!(
            generic_rank(&zero, &RankOptions::default()).unwrap().rank,
            0
        );

        // constant rows: every trial sees the exact rational rank
        let consts = NomSymbolic::from_rows(
            2,
            vec![
                vec![Polynomial::constant(rat(1)), Polynomial::constant(rat(2))],
                vec![Polynomial::constant(rat(2)), Polynomial::constant(rat(4))],
            ],
        );
        let cert = generic_rank(&consts, &RankOptions::default()).unwrap();
        assert_eq!(cert.rank, 1);
        assert!(cert.trials.iter().all(|t| t.rank == 1));
        assert!(cert.failure_bound.is_zero());
    }

    #[test]
    fn bad_primes_are_rejected() {
        let nom = NomSymbolic::from_rows(2, vec![vec![x(0).pow(5), Polynomial::zero()]]);
        let mut opts = RankOptions {
            primes: vec![15],
            ..Default::default()
        };
        assert!(matches!(
            generic_rank(&nom, &opts),
            Err(Error::BadPrime { p: 15, .. })
        ));
        // degree bound: n * max degree = 10, so p = 7 is too small
        opts.primes = vec![7];
        assert!(matches!(
            generic_rank(&nom, &opts),
            Err(Error::BadPrime { p: 7, .. })
        ));
    }

    #[test]
    fn verdict_examples() {
        let g = complete_hypergraph(3, 3).unwrap();
        let v = is_locally_weakly_observable(&g, &e1(3)).unwrap();
        assert!(v.observable);
        assert_eq!(v.certificate.rank, 3);
        assert!(v.r_used <= 3);

        let tri = complete_hypergraph(3, 2).unwrap();
        let v = is_locally_weakly_observable(&tri, &e1(3)).unwrap();
        assert!(!v.observable);
        assert_eq!(v.certificate.rank, 2);

        let edgeless = Hypergraph::edgeless(3).unwrap();
        let all = sensor_matrix(&SensorSet::new([1, 2, 3]), 3).unwrap();
        let v = is_locally_weakly_observable(&edgeless, &all).unwrap();
        assert!(v.observable);
        assert_eq!(v.r_used, 0);
    }

    #[test]
    fn exact_rank_matches_probabilistic() {
        for (g, expect) in [
            (complete_hypergraph(3, 3).unwrap(), 3),
            (complete_hypergraph(3, 2).unwrap(), 2),
        ] {
            let stack = observation_stack(&g, &e1(3), 3, &Caps::default()).unwrap();
            let nom = nom_symbolic(&stack);
            assert_eq!(exact_symbolic_rank(&nom).unwrap(), expect);
            let opts = ObsOptions {
                exact: true,
                ..Default::default()
            };
            let v = observability_verdict(&g, &e1(3), &opts).unwrap();
            assert_eq!(v.certificate.rank, expect);
            assert!(v.certificate.trials.is_empty());
            assert!(v.certificate.failure_bound.is_zero());
        }
        let big = NomSymbolic::from_rows(4, vec![vec![Polynomial::zero(); 4]]);
        assert!(exact_symbolic_rank(&big).is_err());
    }

    #[test]
    fn b_matrix_structure() {
        let g = complete_hypergraph(3, 2).unwrap();
        let caps = Caps::default();
        let t: SparseSymTensor<Rat> = adjacency_tensor(&g, 2).unwrap();
        let a = unfold(&t, 1, &caps).unwrap();

        // seq (k1=2, k2=2): single slot, B = A2
        let b = b_matrix(&g, &[2, 2], &caps).unwrap();
        assert_eq!(b.slots, 1);
        assert_eq!(b.matrix, a);

        // seq (k1=3, k2=2): two slots, B = A2 (x) I + I (x) A2
        let b = b_matrix(&g, &[3, 2], &caps).unwrap();
        assert_eq!(b.slots, 2);
        let identity: SparseMat<Rat> = SparseMat::identity(3);
        let expected = a
            .kron(&identity, &caps)
            .unwrap()
            .add(&identity.kron(&a, &caps).unwrap());
        assert_eq!(b.matrix, expected);
        assert_eq!((b.matrix.rows(), b.matrix.cols()), (9, 9));

        // uniform (k,...,k) p times: slots = (p-1)k - (2p-3)
        let g3 = complete_hypergraph(3, 3).unwrap();
        let b = b_matrix(&g3, &[3, 3, 3], &caps).unwrap();
        assert_eq!(b.slots, (3 - 1) * 3 - (2 * 3 - 3));
        assert_eq!(b.matrix.rows(), 3usize.pow(3));
        assert_eq!(b.matrix.cols(), 3usize.pow(4));

        assert!(b_matrix(&g, &[2], &caps).is_err());
        let tight = Caps {
            kron_cap: 10,
            ..caps
        };
        assert!(matches!(
            b_matrix(&g3, &[3, 3, 3], &tight),
            Err(Error::KronCapExceeded { .. })
        ));
    }

    #[test]
    fn nom_kronecker_matches_symbolic_on_single_edge() {
        let g = single_three_edge();
        let caps = Caps::default();
        for r in 0..=3 {
            let stack = observation_stack(&g, &e1(3), r, &caps).unwrap();
            let sym = nom_symbolic(&stack);
            let kron = nom_kronecker(&g, &e1(3), r, &caps).unwrap();
            assert_eq!(kron, sym, "depth {r}");
        }
    }

    #[test]
    fn nom_kronecker_linear_case_is_kalman() {
        // K = 2: rows must be the constant Kalman rows C, CA, CA^2
        let tri = complete_hypergraph(3, 2).unwrap();
        let caps = Caps::default();
        let kron = nom_kronecker(&tri, &e1(3), 2, &caps).unwrap();
        let a = [[0i64, 1, 1], [1, 0, 1], [1, 1, 0]];
        // CA^j for C = e1
        let mut row = [1i64, 0, 0];
        let mut expected_rows = vec![row];
        for _ in 0..2 {
            let mut next = [0i64; 3];
            for j in 0..3 {
                for l in 0..3 {
                    next[j] += row[l] * a[l][j];
                }
            }
            expected_rows.push(next);
            row = next;
        }
        for (got, want) in kron.rows().iter().zip(expected_rows) {
            let got_consts: Vec<Rat> = got
                .iter()
                .map(|p| {
                    assert!(p.is_constant());
                    p.evaluate(&[rat(0), rat(0), rat(0)])
                })
                .collect();
            let want: Vec<Rat> = want.iter().map(|&v| rat(v)).collect();
            assert_eq!(got_consts, want);
        }
    }

    #[test]
    fn mixed_level2_matches_per_cardinality_decomposition() {
        // L^2_f g = sum over the four sequences (k1,k2) in {2,3}^2 of
        // L_{f_{k2}} L_{f_{k1}} g, with f_k the per-cardinality summand
        let g = complete_hypergraph(3, 2)
            .unwrap()
            .union(&complete_hypergraph(3, 3).unwrap())
            .unwrap();
        let c = e1(3);
        let caps = Caps::default();
        let stack = observation_stack(&g, &c, 2, &caps).unwrap();

        let f2 = vector_field(&g.restrict_to_cardinality(2));
        let f3 = vector_field(&g.restrict_to_cardinality(3));
        let g0 = c.output_polynomials().remove(0);
        let mut sum = Polynomial::zero();
        for fa in [&f2, &f3] {
            for fb in [&f2, &f3] {
                sum = sum + lie_derivative(&lie_derivative(&g0, fa), fb);
            }
        }
        assert_eq!(stack.entry(2, 0), &sum);

        // and the kronecker path agrees on the whole stack
        let sym = nom_symbolic(&stack);
        let kron = nom_kronecker(&g, &c, 2, &caps).unwrap();
        assert_eq!(kron, sym);
    }

    #[test]
    fn restriction_implication_examples() {
        let mixed = complete_hypergraph(3, 2)
            .unwrap()
            .union(&complete_hypergraph(3, 3).unwrap())
            .unwrap();
        let r = check_proposition15(&mixed, &e1(3), &ObsOptions::default()).unwrap();
        assert!(r.restricted.observable);
        assert!(r.full.observable);
        assert!(r.implication_holds);

        // uniform: restriction is the identity, verdicts coincide
        let g3 = complete_hypergraph(3, 3).unwrap();
        let r = check_proposition15(&g3, &e1(3), &ObsOptions::default()).unwrap();
        assert_eq!(r.restricted.observable, r.full.observable);

        // unobservable restriction: implication vacuous
        let tri = complete_hypergraph(3, 2).unwrap();
        let r = check_proposition15(&tri, &e1(3), &ObsOptions::default()).unwrap();
        assert!(!r.restricted.observable);
        assert!(r.implication_holds);

        assert!(check_proposition15(
            &Hypergraph::edgeless(3).unwrap(),
            &e1(3),
            &ObsOptions::default()
        )
        .is_err());
    }

    #[test]
    fn verdict_json_shape() {
        let g = complete_hypergraph(3, 3).unwrap();
        let sensors = SensorSet::new([1]);
        let v = verdict_for_sensors(&g, &sensors, &ObsOptions::default()).unwrap();
        let json = v.to_json(&sensors);
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.starts_with("{\"n\":3,\"sensors\":[1],"));
        assert!(text.contains("\"observable\":true"));
        assert!(text.contains("\"failure_bound\":\""));
        let back: VerdictJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.rank, 3);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = SplitMix64::new(42);
        for _ in 0..30 {
            let poly = random_poly(&mut rng, 4, 4);
            let grad = poly.gradient(4);
            let pf = poly.map_coeffs(&mut |c: &Rat| c.to_f64().unwrap());
            for _ in 0..3 {
                let pt: Vec<f64> = (0..4)
                    .map(|_| rng.next_below(2000) as f64 / 1000.0 - 1.0)
                    .collect();
                for v in 0..4 {
                    let h = 1e-5;
                    let mut up = pt.clone();
                    up[v] += h;
                    let mut dn = pt.clone();
                    dn[v] -= h;
                    let fd = (pf.evaluate(&up) - pf.evaluate(&dn)) / (2.0 * h);
                    let exact = grad[v]
                        .map_coeffs(&mut |c: &Rat| c.to_f64().unwrap())
                        .evaluate(&pt);
                    let scale = exact.abs().max(fd.abs()).max(1.0);
                    assert!(
                        (fd - exact).abs() / scale < 1e-6,
                        "poly {poly:?} var {v}: fd {fd} vs exact {exact}"
                    );
                }
            }
        }
    }

    fn random_poly(rng: &mut SplitMix64, nvars: usize, max_deg: u32) -> Polynomial<Rat> {
        let terms = rng.next_below(5) + 1;
        let mut p = Polynomial::zero();
        for _ in 0..terms {
            let mut mono = crate::poly::Monomial::unit();
            let deg = rng.next_below(max_deg as u64 + 1);
            for _ in 0..deg {
                mono = mono.mul(&crate::poly::Monomial::var(
                    rng.next_below(nvars as u64) as usize
                ));
            }
            let coeff = rat(rng.next_below(19) as i64 - 9);
            p.add_term(mono, coeff);
        }
        p
    }

    fn arb_hypergraph(max_n: usize, max_k: usize) -> impl Strategy<Value = Hypergraph> {
        (2usize..=max_n).prop_flat_map(move |n| {
            proptest::collection::vec(
                proptest::collection::btree_set(1usize..=n, 2..=max_k.min(n)),
                1..5,
            )
            .prop_map(move |edges| {
                Hypergraph::new(n, edges.into_iter().map(|e| e.into_iter().collect())).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        // rank never decreases with depth and stabilizes by r = n
        #[test]
        fn rank_monotone_and_stable_in_depth(g in arb_hypergraph(4, 3), sensor in 1usize..5) {
            let n = g.node_count();
            let sensors = SensorSet::new([(sensor - 1) % n + 1]);
            let c = sensor_matrix(&sensors, n).unwrap();
            let caps = Caps::default();
            let mut prev = 0;
            let mut ranks = Vec::new();
            for r in 0..=n + 1 {
                let stack = observation_stack(&g, &c, r, &caps).unwrap();
                let nom = nom_symbolic(&stack);
                let cert = generic_rank(&nom, &RankOptions::default()).unwrap();
                prop_assert!(cert.rank >= prev, "rank dropped at depth {r}");
                prev = cert.rank;
                ranks.push(cert.rank);
            }
            prop_assert_eq!(ranks[n], ranks[n + 1], "rank still rising past depth n");
        }

        // the kronecker oracle agrees with the production path
        #[test]
        fn kron_path_equals_symbolic_path(g in arb_hypergraph(3, 3), r in 0usize..3) {
            let c = OutputMatrix::identity(g.node_count());
            let caps = Caps::default();
            let sym = nom_symbolic(&observation_stack(&g, &c, r, &caps).unwrap());
            let kron = nom_kronecker(&g, &c, r, &caps).unwrap();
            prop_assert_eq!(kron, sym);
        }
    }
}
