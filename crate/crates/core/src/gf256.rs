//! Arithmetic over GF(2^8).
//!
//! Elements are bytes read as polynomials over GF(2) reduced modulo
//! x^8 + x^4 + x^3 + x^2 + 1 (0x11D). Addition is XOR. Multiplication and
//! division go through log/antilog tables built at compile time; the bulk
//! slice kernels used by the codec use a full 256x256 product table.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Sub};

use crate::error::FieldError;

/// Reduction polynomial, including the x^8 term.
pub const MODULUS: u16 = 0x11D;

/// 2 (the polynomial x) generates the multiplicative group under `MODULUS`.
const GENERATOR: u16 = 0x02;

const fn build_exp() -> [u8; 512] {
    let mut exp = [0u8; 512];
    let mut val: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = val as u8;
        exp[i + 255] = val as u8;
        val *= GENERATOR;
        if val & 0x100 != 0 {
            val ^= MODULUS;
        }
        i += 1;
    }
    exp[510] = exp[0];
    exp[511] = exp[1];
    exp
}

const fn build_log(exp: &[u8; 512]) -> [u8; 256] {
    let mut log = [0u8; 256];
    let mut i = 0;
    while i < 255 {
        log[exp[i] as usize] = i as u8;
        i += 1;
    }
    log
}

const fn build_mul(exp: &[u8; 512], log: &[u8; 256]) -> [[u8; 256]; 256] {
    let mut table = [[0u8; 256]; 256];
    let mut a = 1;
    while a < 256 {
        let mut b = 1;
        while b < 256 {
            table[a][b] = exp[log[a] as usize + log[b] as usize];
            b += 1;
        }
        a += 1;
    }
    table
}

static EXP: [u8; 512] = build_exp();
static LOG: [u8; 256] = build_log(&EXP);
static MUL: [[u8; 256]; 256] = build_mul(&EXP, &LOG);

/// A single GF(2^8) symbol.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Gf256(pub u8);

impl Gf256 {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Multiplicative inverse; zero has none.
    pub fn inv(self) -> Result<Self, FieldError> {
        inv(self.0).map(Self)
    }
}

impl fmt::Debug for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf256({:#04x})", self.0)
    }
}

impl From<u8> for Gf256 {
    fn from(v: u8) -> Self {
        Self(v)
    }
}

impl Add for Gf256 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Self) -> Self {
        Self(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf256 {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Self) {
        self.0 ^= rhs.0;
    }
}

impl Sub for Gf256 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 ^ rhs.0)
    }
}

impl Mul for Gf256 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(mul(self.0, rhs.0))
    }
}

impl MulAssign for Gf256 {
    fn mul_assign(&mut self, rhs: Self) {
        self.0 = mul(self.0, rhs.0);
    }
}

/// Product of two symbols via the log/antilog tables.
#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    EXP[LOG[a as usize] as usize + LOG[b as usize] as usize]
}

/// Multiplicative inverse of `a`.
pub fn inv(a: u8) -> Result<u8, FieldError> {
    if a == 0 {
        return Err(FieldError::ZeroInverse);
    }
    Ok(EXP[255 - LOG[a as usize] as usize])
}

/// `a / b`.
pub fn div(a: u8, b: u8) -> Result<u8, FieldError> {
    if b == 0 {
        return Err(FieldError::ZeroInverse);
    }
    if a == 0 {
        return Ok(0);
    }
    Ok(EXP[LOG[a as usize] as usize + 255 - LOG[b as usize] as usize])
}

/// `dst[i] ^= c * src[i]` for every position.
#[inline]
pub fn mul_add_slice(dst: &mut [u8], src: &[u8], c: u8) {
    debug_assert_eq!(dst.len(), src.len());
    match c {
        0 => {}
        1 => {
            for (d, s) in dst.iter_mut().zip(src) {
                *d ^= *s;
            }
        }
        _ => {
            let row = &MUL[c as usize];
            for (d, s) in dst.iter_mut().zip(src) {
                *d ^= row[*s as usize];
            }
        }
    }
}

/// `buf[i] = c * buf[i]` for every position.
#[inline]
pub fn scale_slice(buf: &mut [u8], c: u8) {
    match c {
        1 => {}
        0 => buf.fill(0),
        _ => {
            let row = &MUL[c as usize];
            for b in buf.iter_mut() {
                *b = row[*b as usize];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Carry-less schoolbook product reduced bit by bit. Shares nothing with the
    /// table construction beyond the modulus constant.
    fn schoolbook_mul(a: u8, b: u8, modulus: u16) -> u8 {
        let mut acc: u16 = 0;
        for bit in 0..8 {
            if b & (1 << bit) != 0 {
                acc ^= (a as u16) << bit;
            }
        }
        for bit in (8..16).rev() {
            if acc & (1 << bit) != 0 {
                acc ^= modulus << (bit - 8);
            }
        }
        acc as u8
    }

    #[test]
    fn table_matches_schoolbook_for_all_pairs() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                let expected = schoolbook_mul(a, b, 0x11D);
                assert_eq!(mul(a, b), expected, "{a:#x} * {b:#x}");
                assert_eq!(MUL[a as usize][b as usize], expected);
            }
        }
    }

    #[test]
    fn x7_times_x_wraps_to_0x1d() {
        assert_eq!(schoolbook_mul(0x80, 0x02, 0x11D), 0x1D);
        assert_eq!(mul(0x80, 0x02), 0x1D);
    }

    #[test]
    fn identity_and_annihilator() {
        for a in 0..=255u8 {
            assert_eq!(mul(a, 1), a);
            assert_eq!(mul(0, a), 0);
            assert_eq!(a ^ a, 0);
        }
    }

    #[test]
    fn inverse_of_two_by_exhaustive_search() {
        let found: Vec<u8> = (1..=255u8).filter(|&b| schoolbook_mul(2, b, 0x11D) == 1).collect();
        assert_eq!(found.len(), 1);
        assert_eq!(inv(2).unwrap(), found[0]);
        assert_eq!(found[0], 0x8E);
    }

    #[test]
    fn inverse_properties() {
        assert_eq!(inv(1).unwrap(), 1);
        for a in 1..=255u8 {
            let ia = inv(a).unwrap();
            assert_eq!(mul(a, ia), 1);
            assert_eq!(inv(ia).unwrap(), a);
            assert_eq!(div(a, a).unwrap(), 1);
        }
        assert_eq!(inv(0), Err(FieldError::ZeroInverse));
        assert_eq!(Gf256(0).inv(), Err(FieldError::ZeroInverse));
        assert!(div(3, 0).is_err());
    }

    #[test]
    fn field_axioms_exhaustive_pairs_sampled_triples() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(mul(a, b), mul(b, a));
                assert_eq!(Gf256(a) + Gf256(b), Gf256(b) + Gf256(a));
            }
        }
        // full 2^24 triple space is cheap enough at opt-level 3, but a stride keeps
        // debug builds fast while still touching every a and c
        for a in 0..=255u8 {
            for b in (0..=255u8).step_by(7) {
                for c in 0..=255u8 {
                    assert_eq!(mul(mul(a, b), c), mul(a, mul(b, c)));
                    assert_eq!(mul(a, b ^ c), mul(a, b) ^ mul(a, c));
                }
            }
        }
    }

    #[test]
    fn slice_kernels_agree_with_scalar() {
        let src: Vec<u8> = (0..=255u8).collect();
        for c in [0u8, 1, 2, 0x53, 0xFF] {
            let mut dst: Vec<u8> = (0..=255u8).rev().collect();
            let before = dst.clone();
            mul_add_slice(&mut dst, &src, c);
            for i in 0..256 {
                assert_eq!(dst[i], before[i] ^ mul(c, src[i]));
            }
            let mut s = src.clone();
            scale_slice(&mut s, c);
            for i in 0..256 {
                assert_eq!(s[i], mul(c, src[i]));
            }
        }
    }
}
