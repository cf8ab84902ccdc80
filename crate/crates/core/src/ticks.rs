//! Integer time base for the simulator.
//!
//! Every instant the simulator can reach is a multiple of `1 / L` for a
//! system-wide `L` (the lcm of the period and start denominators times the
//! lcm of the utilization denominators). Counting time in units of `1 / L`
//! keeps arithmetic exact without normalizing fractions. The integer type
//! is picked per system from the magnitude of `horizon * L`.

use std::fmt::Debug;

use ethnum::{I256, U256};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::model::TaskSystem;
use crate::time::Rational;

pub trait Ticks: Clone + Ord + Debug {
    fn zero() -> Self;
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Quotient when `o` divides `self`.
    fn div_exact(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    /// `self / scale` as a reduced fraction.
    fn ratio(&self, scale: &Self) -> Rational;
}

impl Ticks for i128 {
    fn zero() -> Self {
        0
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert_eq!(self % o, 0);
        self / o
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_positive(&self) -> bool {
        *self > 0
    }
    fn ratio(&self, scale: &Self) -> Rational {
        Rational::from_i128(*self, *scale)
    }
}

fn gcd_u256(mut a: U256, mut b: U256) -> U256 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn i256_to_big(v: I256) -> BigInt {
    let sign = if v < 0 { Sign::Minus } else { Sign::Plus };
    BigInt::from_bytes_le(sign, &v.unsigned_abs().to_le_bytes())
}

impl Ticks for I256 {
    fn zero() -> Self {
        I256::ZERO
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        if v.bits() > 254 {
            return None;
        }
        let (sign, bytes) = v.to_bytes_le();
        let mut buf = [0u8; 32];
        buf[..bytes.len()].copy_from_slice(&bytes);
        let mag = U256::from_le_bytes(buf).as_i256();
        Some(if sign == Sign::Minus { -mag } else { mag })
    }
    fn to_big(&self) -> BigInt {
        i256_to_big(*self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert_eq!(self % o, 0);
        self / o
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_positive(&self) -> bool {
        *self > 0
    }
    fn ratio(&self, scale: &Self) -> Rational {
        let g = gcd_u256(self.unsigned_abs(), scale.unsigned_abs()).as_i256();
        let (n, d) = (self / g, scale / g);
        match (i128::try_from(n), i128::try_from(d)) {
            (Ok(n), Ok(d)) => Rational::from_i128(n, d),
            _ => Rational::from_reduced_bigints(i256_to_big(n), i256_to_big(d)),
        }
    }
}

impl Ticks for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert!(Zero::is_zero(&(self % o)));
        self / o
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn ratio(&self, scale: &Self) -> Rational {
        Rational::from_bigints(self.clone(), scale.clone())
    }
}

/// Integer width able to hold every instant of a simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Width {
    I128,
    I256,
    Big,
}

/// The scale `L` of a system.
pub fn scale_of(system: &TaskSystem) -> BigInt {
    let mut time = BigInt::one();
    let mut util = BigInt::one();
    for t in &system.tasks {
        time = time.lcm(&t.period.denom()).lcm(&t.start.denom());
        util = util.lcm(&t.utilization.denom());
    }
    time * util
}

/// Narrowest width for simulating `system` up to `horizon`.
pub fn width_for(system: &TaskSystem, scale: &BigInt, horizon: &Rational) -> Width {
    let zero = Rational::zero();
    let max_period = system.tasks.iter().map(|t| &t.period).max().unwrap_or(&zero);
    let max_start = system.tasks.iter().map(|t| &t.start).max().unwrap_or(&zero);
    let bound = horizon + max_start + max_period + max_period + Rational::one();
    // products in the budget rule stay below the largest instant
    let bits = (bound.ceil() * scale).bits() + 2;
    match bits {
        0..=120 => Width::I128,
        121..=250 => Width::I256,
        _ => Width::Big,
    }
}

/// `r * scale` when that is an integer.
pub fn to_ticks<T: Ticks>(r: &Rational, scale: &BigInt) -> Option<T> {
    let (q, rem) = (r.numer() * scale).div_rem(&r.denom());
    if !Zero::is_zero(&rem) {
        return None;
    }
    T::from_big(&q)
}
