use num_bigint::BigInt;
use num_rational::BigRational;

/// Number type the probability formulas are generic over: `f32`/`f64`
/// for everyday use, [`Rational`](crate::Rational) when exact values
/// are needed (e.g. comparing against a brute-force enumeration).
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + num_traits::Zero
    + num_traits::One
    + std::ops::Sub<Output = Self>
    + std::ops::Div<Output = Self>
{
    fn from_u64(v: u64) -> Self;

    fn ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num) / Self::from_u64(den)
    }
}

impl Scalar for f32 {
    fn from_u64(v: u64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    fn from_u64(v: u64) -> Self {
        v as f64
    }
}

impl Scalar for BigRational {
    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// `base^exp` by binary exponentiation; exact for rationals,
/// `powu(x, 0) == 1` including `x == 0`.
pub fn powu<T: Scalar>(base: T, mut exp: u32) -> T {
    let mut acc = T::one();
    let mut sq = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * sq.clone();
        }
        sq = sq.clone() * sq;
        exp >>= 1;
    }
    acc
}

/// Binomial coefficient; the sizes used here (n ≤ 64) fit u128 easily.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc
}

pub fn binomial_s<T: Scalar>(n: u32, k: u32) -> T {
    let b = binomial(n, k);
    debug_assert!(b <= u64::MAX as u128);
    T::from_u64(b as u64)
}
