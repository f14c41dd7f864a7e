//! Coefficient scalars.
//!
//! All core math (polynomials, tensors, elimination) is generic over the
//! scalar type. Three scalars matter in practice:
//!
//! * [`Rat`] — arbitrary-precision rationals, the production coefficient type;
//!   every symbolic computation is exact.
//! * [`Fp`] — a prime field with runtime modulus, used only when deciding
//!   generic rank by evaluation at random points.
//! * `f64` — used by the fixed-step integrator and by finite-difference
//!   cross-checks in tests.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational coefficient type.
pub type Rat = num_rational::BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Rational from a numerator/denominator pair.
pub fn ratio(numer: i64, denom: i64) -> Rat {
    Rat::new(numer.into(), denom.into())
}

/// Commutative ring scalar: what polynomial and tensor arithmetic needs.
pub trait Scalar:
    Clone + fmt::Debug + PartialEq + Zero + One + Neg<Output = Self> + Sub<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone + fmt::Debug + PartialEq + Zero + One + Neg<Output = Self> + Sub<Output = Self>
{
}

/// Field scalar: adds division, required by elimination and by the
/// `1/(k-1)!` adjacency coefficients.
pub trait FieldScalar: Scalar + Div<Output = Self> {}

impl<T> FieldScalar for T where T: Scalar + Div<Output = Self> {}

/// `x * m` for an unsigned integer `m`, by double-and-add. Lets ring-only
/// code apply permutation multiplicities without a `FromPrimitive` bound.
pub fn uint_scale<T: Scalar>(x: &T, mut m: u64) -> T {
    let mut acc = T::zero();
    let mut base = x.clone();
    while m > 0 {
        if m & 1 == 1 {
            acc = acc + base.clone();
        }
        m >>= 1;
        if m > 0 {
            base = base.clone() + base;
        }
    }
    acc
}

/// The integer `m` embedded into the scalar ring.
pub fn uint_to_scalar<T: Scalar>(m: u64) -> T {
    uint_scale(&T::one(), m)
}

/// `1 / (k)!` in a field scalar.
pub fn inv_factorial<T: FieldScalar>(k: u64) -> T {
    let mut f = T::one();
    for i in 2..=k {
        f = f * uint_to_scalar::<T>(i);
    }
    T::one() / f
}

// ---------------------------------------------------------------------------
// Prime field with runtime modulus
// ---------------------------------------------------------------------------

/// Element of a prime field `Z/p` with the modulus carried per element.
///
/// `p == 0` marks a modulus-free integer constant, as produced by
/// [`Zero::zero`] and [`One::one`]; it unifies with the other operand's
/// modulus on first contact. Constants combined with each other stay exact
/// integers (checked arithmetic, panicking on overflow). Mixing two elements
/// with distinct nonzero moduli is a programming error.
#[derive(Clone, Copy, Debug)]
pub struct Fp {
    value: u64,
    modulus: u64,
}

impl Fp {
    /// Element of `Z/p`. `p` must exceed 1; `value` is reduced.
    pub fn new(value: u64, p: u64) -> Self {
        assert!(p > 1, "modulus must exceed 1");
        Fp {
            value: value % p,
            modulus: p,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Multiplicative inverse; panics on zero or on a modulus-free constant
    /// other than `1`.
    pub fn inv(&self) -> Self {
        if self.modulus == 0 {
            assert!(
                self.value == 1,
                "cannot invert untyped constant {}",
                self.value
            );
            return *self;
        }
        assert!(self.value != 0, "division by zero in F_{}", self.modulus);
        Fp {
            value: inv_mod(self.value, self.modulus),
            modulus: self.modulus,
        }
    }

    fn join(self, other: Self) -> (u64, u64, u64) {
        let p = match (self.modulus, other.modulus) {
            (0, q) => q,
            (p, 0) => p,
            (p, q) => {
                debug_assert_eq!(p, q, "mixed moduli {p} and {q}");
                p
            }
        };
        if p == 0 {
            (self.value, other.value, 0)
        } else {
            (self.value % p, other.value % p, p)
        }
    }
}

impl PartialEq for Fp {
    fn eq(&self, other: &Self) -> bool {
        let (a, b, _) = self.join(*other);
        a == b
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let (a, b, p) = self.join(rhs);
        if p == 0 {
            Fp {
                value: a.checked_add(b).expect("untyped constant overflow"),
                modulus: 0,
            }
        } else {
            let mut v = a + b; // both < p <= 2^63, no overflow
            if v >= p {
                v -= p;
            }
            Fp {
                value: v,
                modulus: p,
            }
        }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        let (a, b, p) = self.join(rhs);
        if p == 0 {
            Fp {
                value: a.checked_sub(b).expect("untyped constant underflow"),
                modulus: 0,
            }
        } else {
            let v = if a >= b { a - b } else { a + p - b };
            Fp {
                value: v,
                modulus: p,
            }
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        let (a, b, p) = self.join(rhs);
        if p == 0 {
            Fp {
                value: a.checked_mul(b).expect("untyped constant overflow"),
                modulus: 0,
            }
        } else {
            Fp {
                value: mul_mod(a, b, p),
                modulus: p,
            }
        }
    }
}

impl Div for Fp {
    type Output = Fp;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Fp) -> Fp {
        self * rhs.inv()
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.modulus == 0 {
            assert!(
                self.value == 0,
                "cannot negate untyped constant {}",
                self.value
            );
            return self;
        }
        Fp::zero() - self
    }
}

impl Zero for Fp {
    fn zero() -> Self {
        Fp {
            value: 0,
            modulus: 0,
        }
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp {
            value: 1,
            modulus: 0,
        }
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A rational mapped into `Z/p`: `numer * denom^-1 mod p`. Fails when `p`
/// divides the denominator (the coefficient is not invertible mod `p`).
pub fn rat_to_fp(r: &Rat, p: u64) -> Result<Fp> {
    let numer = bigint_mod_u64(r.numer(), p);
    let denom = bigint_mod_u64(r.denom(), p);
    if denom == 0 {
        return Err(Error::BadPrime {
            p,
            reason: format!("divides the denominator of coefficient {r}"),
        });
    }
    Ok(Fp::new(mul_mod(numer, inv_mod(denom, p), p), p))
}

fn bigint_mod_u64(x: &num_bigint::BigInt, p: u64) -> u64 {
    use num_bigint::BigInt;
    let p_big = BigInt::from(p);
    let mut m = x % &p_big;
    if m.sign() == num_bigint::Sign::Minus {
        m += &p_big;
    }
    m.to_u64().expect("residue fits in u64")
}

// ---------------------------------------------------------------------------
// Modular arithmetic on u64 (moduli up to 2^63)
// ---------------------------------------------------------------------------

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse mod a prime, via Fermat.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin for u64 (full witness set, no false positives).
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n == w {
            return true;
        }
        if n.is_multiple_of(w) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Default primes for the probabilistic rank test, all near 2^61 so a single
/// evaluation already carries a vanishing failure probability.
pub const DEFAULT_PRIMES: [u64; 3] = [
    2_305_843_009_213_693_951, // 2^61 - 1
    2_305_843_009_212_645_239,
    2_305_843_009_211_596_763,
];

// ---------------------------------------------------------------------------
// Deterministic seed-splitting PRNG
// ---------------------------------------------------------------------------

/// SplitMix64: the single source of randomness. Every consumer derives its
/// own stream from the run seed plus a tag, so runs replay byte-identically.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, bound)` by rejection.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let limit = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < limit {
                return x % bound;
            }
        }
    }

    /// A point in `F_p^n`.
    pub fn field_point(&mut self, n: usize, p: u64) -> Vec<Fp> {
        (0..n).map(|_| Fp::new(self.next_below(p), p)).collect()
    }
}

/// Derive a sub-seed from a base seed and a tag path.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut rng = SplitMix64::new(base);
    let mut out = rng.next_u64();
    for &t in tags {
        let mut sub = SplitMix64::new(out ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        out = sub.next_u64();
    }
    out
}
