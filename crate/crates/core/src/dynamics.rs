//! The polynomial vector field induced by a hypergraph, linear outputs, and
//! a fixed-step integrator for trajectory demos.
//!
//! Every component of the field is an exact polynomial: the cardinality-k
//! edges contribute the degree-(k-1) summand obtained by contracting the
//! adjacency tensor with the state. Floating point appears only in
//! [`simulate`]; all observability math stays exact.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeId};
use crate::poly::Polynomial;
use crate::scalar::{Rat, Scalar};
use crate::tensor::{adjacency_tensor, tensor_apply, SparseMat, SparseSymTensor};

/// Polynomial vector field on `n` state variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField<T: Scalar> {
    n: usize,
    components: Vec<Polynomial<T>>,
}

impl<T: Scalar> PolyVectorField<T> {
    /// Wrap component polynomials; every variable index must lie below the
    /// dimension.
    pub fn new(components: Vec<Polynomial<T>>) -> Result<Self> {
        let n = components.len();
        for (i, p) in components.iter().enumerate() {
            if let Some(v) = p.max_var() {
                if v >= n {
                    return Err(Error::InvalidInput(format!(
                        "component {} uses x{} but the field has {} variables",
                        i + 1,
                        v + 1,
                        n
                    )));
                }
            }
        }
        Ok(PolyVectorField { n, components })
    }

    pub fn zero(n: usize) -> Self {
        PolyVectorField {
            n,
            components: vec![Polynomial::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Polynomial<T>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial<T> {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    /// Componentwise sum; dimensions must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::NodeCountMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(PolyVectorField {
            n: self.n,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Exact evaluation at a point.
    pub fn evaluate(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        self.components.iter().map(|p| p.evaluate(x)).collect()
    }

    pub fn map_coeffs<U: Scalar>(&self, f: &mut impl FnMut(&T) -> U) -> PolyVectorField<U> {
        PolyVectorField {
            n: self.n,
            components: self.components.iter().map(|p| p.map_coeffs(f)).collect(),
        }
    }

    /// Largest total degree among components.
    pub fn max_degree(&self) -> u32 {
        self.components
            .iter()
            .map(Polynomial::total_degree)
            .max()
            .unwrap_or(0)
    }
}

impl PolyVectorField<Rat> {
    /// Lossy conversion for numerical integration.
    pub fn to_f64(&self) -> PolyVectorField<f64> {
        self.map_coeffs(&mut |c: &Rat| c.to_f64().expect("rational in f64 range"))
    }
}

/// `f(x) = sum_k A_k x^(k-1)` as exact polynomials; the zero field for an
/// edgeless hypergraph.
pub fn vector_field(g: &Hypergraph) -> PolyVectorField<Rat> {
    let n = g.node_count();
    let vars: Vec<Polynomial<Rat>> = (0..n).map(Polynomial::var).collect();
    let mut components = vec![Polynomial::zero(); n];
    for k in g.cardinalities() {
        let t: SparseSymTensor<Rat> =
            adjacency_tensor(g, k).expect("edge cardinality is at least 2");
        let symbolic = t.map_entries(|c| Polynomial::constant(c.clone()));
        for (i, p) in tensor_apply(&symbolic, &vars).into_iter().enumerate() {
            components[i] = components[i].clone() + p;
        }
    }
    PolyVectorField { n, components }
}

/// Set of sensor nodes (1-based ids, kept sorted).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorSet {
    nodes: BTreeSet<NodeId>,
}

impl SensorSet {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        SensorSet {
            nodes: nodes.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        SensorSet {
            nodes: BTreeSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    pub fn insert(&mut self, node: NodeId) {
        self.nodes.insert(node);
    }

    /// This set plus one node.
    pub fn with(&self, node: NodeId) -> Self {
        let mut s = self.clone();
        s.insert(node);
        s
    }

    /// Ascending node ids.
    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.nodes.iter().copied().collect()
    }
}

impl fmt::Display for SensorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Linear output matrix `C` with exact rational entries and no all-zero rows.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputMatrix {
    n: usize,
    rows: Vec<Vec<Rat>>,
}

impl OutputMatrix {
    pub fn from_rows(rows: Vec<Vec<Rat>>, n: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptySensorSet);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "output row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    n
                )));
            }
            if row.iter().all(Rat::is_zero) {
                return Err(Error::ZeroOutputRow { row: i + 1 });
            }
        }
        Ok(OutputMatrix { n, rows })
    }

    /// The identity output: every node observed.
    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![Rat::zero(); n];
                row[i] = Rat::one();
                row
            })
            .collect();
        OutputMatrix { n, rows }
    }

    pub fn output_count(&self) -> usize {
        self.rows.len()
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.rows
    }

    /// The outputs `c_i . x` as polynomials.
    pub fn output_polynomials(&self) -> Vec<Polynomial<Rat>> {
        self.rows
            .iter()
            .map(|row| {
                let mut p = Polynomial::zero();
                for (j, c) in row.iter().enumerate() {
                    p = p + Polynomial::var(j).scale(c);
                }
                p
            })
            .collect()
    }

    pub fn to_sparse(&self) -> SparseMat<Rat> {
        let mut m = SparseMat::zero(self.rows.len(), self.n);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                m.add_entry(r, c, v.clone());
            }
        }
        m
    }
}

/// One standard-basis output row per sensor node, sensors ascending.
pub fn sensor_matrix(sensors: &SensorSet, n: usize) -> Result<OutputMatrix> {
    if sensors.is_empty() {
        return Err(Error::EmptySensorSet);
    }
    let mut rows = Vec::with_capacity(sensors.len());
    for node in sensors.iter() {
        if node == 0 || node > n {
            return Err(Error::NodeOutOfRange { node, n });
        }
        let mut row = vec![Rat::zero(); n];
        row[node - 1] = Rat::one();
        rows.push(row);
    }
    OutputMatrix::from_rows(rows, n)
}

/// Fixed-step trajectory produced by [`simulate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dt: f64,
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `steps + 1` states, the initial one first.
    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    /// CSV with header `t,x1,...,xn`.
    pub fn to_csv_string(&self) -> String {
        let n = self.states.first().map(Vec::len).unwrap_or(0);
        let mut s = String::from("t");
        for i in 1..=n {
            s.push_str(&format!(",x{i}"));
        }
        s.push('\n');
        for (step, state) in self.states.iter().enumerate() {
            s.push_str(&format!("{}", step as f64 * self.dt));
            for v in state {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Classical fixed-step 4th-order Runge-Kutta. Polynomial fields can blow up
/// in finite time; a nonfinite component aborts with the offending step.
pub fn simulate(f: &PolyVectorField<f64>, x0: &[f64], dt: f64, steps: usize) -> Result<Trajectory> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::InvalidInput(format!(
            "step size must be positive, got {dt}"
        )));
    }
    if x0.len() != f.dim() {
        return Err(Error::InvalidInput(format!(
            "initial state has {} entries, field has {}",
            x0.len(),
            f.dim()
        )));
    }
    let n = f.dim();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.to_vec());
    let mut x = x0.to_vec();
    for step in 1..=steps {
        let k1 = f.evaluate(&x);
        let k2 = f.evaluate(&offset(&x, &k1, dt / 2.0));
        let k3 = f.evaluate(&offset(&x, &k2, dt / 2.0));
        let k4 = f.evaluate(&offset(&x, &k3, dt));
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if let Some(component) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SimulationBlowup {
                step,
                component: component + 1,
            });
        }
        states.push(x.clone());
    }
    Ok(Trajectory { dt, states })
}

fn offset(x: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}
