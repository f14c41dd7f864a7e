//! Sparse multivariate polynomials over a generic scalar.
//!
//! Variables are 0-based indices internally; display uses the 1-based `x1,
//! x2, ...` convention. Terms live in a `BTreeMap` keyed by monomials in
//! graded lexicographic order, so iteration is always deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::scalar::{uint_scale, Scalar};

/// Monomial as a sparse exponent map: sorted `(variable, power)` pairs with
/// no zero powers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<(usize, u32)>,
}

impl Monomial {
    /// The empty product (degree zero).
    pub fn unit() -> Self {
        Monomial { exps: Vec::new() }
    }

    /// `x_var`.
    pub fn var(var: usize) -> Self {
        Monomial {
            exps: vec![(var, 1)],
        }
    }

    /// From `(variable, power)` pairs; zero powers dropped, repeats summed.
    pub fn from_pairs(pairs: &[(usize, u32)]) -> Self {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for &(v, e) in pairs {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        Monomial {
            exps: map.into_iter().collect(),
        }
    }

    /// Product of `x_j` over a list of variables (repeats allowed).
    pub fn from_vars(vars: &[usize]) -> Self {
        let pairs: Vec<(usize, u32)> = vars.iter().map(|&v| (v, 1)).collect();
        Monomial::from_pairs(&pairs)
    }

    pub fn exponents(&self) -> &[(usize, u32)] {
        &self.exps
    }

    pub fn exponent_of(&self, var: usize) -> u32 {
        self.exps
            .iter()
            .find(|&&(v, _)| v == var)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_unit(&self) -> bool {
        self.exps.is_empty()
    }

    /// Largest variable index present.
    pub fn max_var(&self) -> Option<usize> {
        self.exps.last().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (va, ea) = self.exps[i];
            let (vb, eb) = other.exps[j];
            match va.cmp(&vb) {
                std::cmp::Ordering::Less => {
                    out.push((va, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((vb, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((va, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.exps[i..]);
        out.extend_from_slice(&other.exps[j..]);
        Monomial { exps: out }
    }

    /// `(old power, monomial with the power of `var` lowered by one)`, or
    /// `None` when `var` is absent.
    fn lower(&self, var: usize) -> Option<(u32, Monomial)> {
        let pos = self.exps.iter().position(|&(v, _)| v == var)?;
        let (_, e) = self.exps[pos];
        let mut exps = self.exps.clone();
        if e == 1 {
            exps.remove(pos);
        } else {
            exps[pos].1 = e - 1;
        }
        Some((e, Monomial { exps }))
    }

    /// Evaluate at a point.
    pub fn evaluate<T: Scalar>(&self, x: &[T]) -> T {
        let mut acc = T::one();
        for &(v, e) in &self.exps {
            acc = acc * scalar_pow(x[v].clone(), e);
        }
        acc
    }
}

/// Graded lexicographic order: total degree first, ties by exponent vector
/// with lower-indexed variables weighing more.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| {
                let (mut i, mut j) = (0, 0);
                loop {
                    match (self.exps.get(i), other.exps.get(j)) {
                        (None, None) => return std::cmp::Ordering::Equal,
                        (Some(_), None) => return std::cmp::Ordering::Greater,
                        (None, Some(_)) => return std::cmp::Ordering::Less,
                        (Some(&(va, ea)), Some(&(vb, eb))) => {
                            if va < vb {
                                return std::cmp::Ordering::Greater;
                            }
                            if va > vb {
                                return std::cmp::Ordering::Less;
                            }
                            if ea != eb {
                                return ea.cmp(&eb);
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                }
            })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn scalar_pow<T: Scalar>(base: T, mut exp: u32) -> T {
    let mut acc = T::one();
    let mut base = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base.clone();
        exp >>= 1;
    }
    acc
}

/// Sparse multivariate polynomial; no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial<T: Scalar> {
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn constant(c: T) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::unit(), c);
        p
    }

    /// `x_var`.
    pub fn var(var: usize) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::var(var), T::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, T)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Accumulate one term, dropping the monomial if the sum cancels.
    pub fn add_term(&mut self, mono: Monomial, coeff: T) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Terms in graded-lex order, constant first.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Option<&T> {
        self.terms.get(mono)
    }

    /// Maximum total degree; 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(Monomial::total_degree)
            .max()
            .unwrap_or(0)
    }

    /// Largest variable index appearing in any term.
    pub fn max_var(&self) -> Option<usize> {
        self.terms.keys().filter_map(Monomial::max_var).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_unit)
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial::from_terms(
            self.terms
                .iter()
                .map(|(m, v)| (m.clone(), v.clone() * c.clone())),
        )
    }

    /// Multiply by the integer `m` (used for permutation multiplicities).
    pub fn scale_uint(&self, m: u64) -> Self {
        if m == 0 {
            return Polynomial::zero();
        }
        Polynomial::from_terms(
            self.terms
                .iter()
                .map(|(mo, v)| (mo.clone(), uint_scale(v, m))),
        )
    }

    pub fn pow(&self, exp: u32) -> Self {
        scalar_pow(self.clone(), exp)
    }

    /// Exact partial derivative with respect to `x_var`.
    pub fn partial_deriv(&self, var: usize) -> Self {
        let mut out = Polynomial::zero();
        for (mono, coeff) in &self.terms {
            if let Some((e, lowered)) = mono.lower(var) {
                out.add_term(lowered, uint_scale(coeff, e as u64));
            }
        }
        out
    }

    /// Gradient with respect to `x_0 .. x_{n-1}`.
    pub fn gradient(&self, n: usize) -> Vec<Self> {
        (0..n).map(|v| self.partial_deriv(v)).collect()
    }

    /// Evaluate at a point; panics if a variable index exceeds `x.len()`.
    pub fn evaluate(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for (mono, coeff) in &self.terms {
            acc = acc + coeff.clone() * mono.evaluate(x);
        }
        acc
    }

    /// Map coefficients into another scalar, dropping any that map to zero.
    pub fn map_coeffs<U: Scalar>(&self, f: &mut impl FnMut(&T) -> U) -> Polynomial<U> {
        let mut out = Polynomial::zero();
        for (mono, coeff) in &self.terms {
            out.add_term(mono.clone(), f(coeff));
        }
        out
    }

    /// Fallible coefficient map (e.g. rational to prime field).
    pub fn try_map_coeffs<U: Scalar, E>(
        &self,
        f: &mut impl FnMut(&T) -> std::result::Result<U, E>,
    ) -> std::result::Result<Polynomial<U>, E> {
        let mut out = Polynomial::zero();
        for (mono, coeff) in &self.terms {
            out.add_term(mono.clone(), f(coeff)?);
        }
        Ok(out)
    }
}

impl<T: Scalar> Zero for Polynomial<T> {
    fn zero() -> Self {
        Polynomial {
            terms: BTreeMap::new(),
        }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<T: Scalar> One for Polynomial<T> {
    fn one() -> Self {
        Polynomial::constant(T::one())
    }
}

impl<T: Scalar> Add for Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(mut self, rhs: Polynomial<T>) -> Polynomial<T> {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<T: Scalar> Sub for Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(mut self, rhs: Polynomial<T>) -> Polynomial<T> {
        for (m, c) in rhs.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl<T: Scalar> Neg for Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        Polynomial::from_terms(self.terms.into_iter().map(|(m, c)| (m, -c)))
    }
}

impl<T: Scalar> Mul for Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Polynomial<T>) -> Polynomial<T> {
        (&self).mul(&rhs)
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.clone() + rhs.clone()
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.clone() - rhs.clone()
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // highest-degree terms first
        for (i, (mono, coeff)) in self.terms.iter().rev().enumerate() {
            let mut text = coeff.to_string();
            if i > 0 {
                if let Some(stripped) = text.strip_prefix('-') {
                    write!(f, " - ")?;
                    text = stripped.to_string();
                } else {
                    write!(f, " + ")?;
                }
            }
            let coeff = text;
            if mono.is_unit() {
                write!(f, "{coeff}")?;
            } else {
                if coeff != "1" {
                    write!(f, "{coeff}*")?;
                }
                let mut first = true;
                for &(v, e) in mono.exponents() {
                    if !first {
                        write!(f, "*")?;
                    }
                    first = false;
                    if e == 1 {
                        write!(f, "x{}", v + 1)?;
                    } else {
                        write!(f, "x{}^{}", v + 1, e)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Debug for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}
