//! Octonion arithmetic driven by a literal signed multiplication table.
//!
//! The basis is `e0 = 1, e1, ..., e7`. The product of two basis elements is
//! always `±e_k`; the table below fixes every sign, and through it the sign
//! pattern of the Dirac system in [`crate::dirac`].

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// One entry of the multiplication table: `e_i * e_j = sign * e_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisProduct {
    pub sign: i8,
    pub index: usize,
}

const fn p(index: usize) -> BasisProduct {
    BasisProduct { sign: 1, index }
}

const fn n(index: usize) -> BasisProduct {
    BasisProduct { sign: -1, index }
}

/// `MULTIPLICATION_TABLE[i][j]` is `e_i * e_j` (row = left factor).
pub const MULTIPLICATION_TABLE: [[BasisProduct; 8]; 8] = [
    [p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7)],
    [p(1), n(0), p(4), p(7), n(2), p(6), n(5), n(3)],
    [p(2), n(4), n(0), p(5), p(1), n(3), p(7), n(6)],
    [p(3), n(7), n(5), n(0), p(6), p(2), n(4), p(1)],
    [p(4), p(2), n(1), n(6), n(0), p(7), p(3), n(5)],
    [p(5), n(6), p(3), n(2), n(7), n(0), p(1), p(4)],
    [p(6), p(5), n(7), p(4), n(3), n(1), n(0), p(2)],
    [p(7), p(3), p(6), n(1), p(5), n(4), n(2), n(0)],
];

/// `e_i * e_j` as a table lookup.
#[inline]
pub fn basis_product(i: usize, j: usize) -> BasisProduct {
    MULTIPLICATION_TABLE[i][j]
}

/// An octonion `c[0] e0 + ... + c[7] e7`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Octonion(pub [f64; 8]);

impl Octonion {
    pub const ZERO: Octonion = Octonion([0.0; 8]);
    pub const ONE: Octonion = Octonion([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

    pub fn new(c: [f64; 8]) -> Self {
        Octonion(c)
    }

    /// The basis unit `e_i`.
    pub fn basis(i: usize) -> Self {
        assert!(i < 8, "octonion basis index {i} out of range");
        let mut c = [0.0; 8];
        c[i] = 1.0;
        Octonion(c)
    }

    pub fn scalar(s: f64) -> Self {
        let mut c = [0.0; 8];
        c[0] = s;
        Octonion(c)
    }

    pub fn coeffs(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Negates the seven imaginary coefficients.
    pub fn conj(&self) -> Self {
        let mut c = self.0;
        for v in c.iter_mut().skip(1) {
            *v = -*v;
        }
        Octonion(c)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// Euclidean length of the coefficient vector.
    pub fn norm(&self) -> f64 {
        // hypot-style scaling keeps |a| finite for large coefficients
        let m = self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if m == 0.0 || !m.is_finite() {
            return m;
        }
        let s: f64 = self.0.iter().map(|v| (v / m) * (v / m)).sum();
        m * s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.0;
        for v in c.iter_mut() {
            *v *= s;
        }
        Octonion(c)
    }

    /// Bilinear product expanded over all 64 table entries.
    pub fn mul(&self, rhs: &Octonion) -> Octonion {
        let mut out = [0.0; 8];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.0.iter().enumerate() {
                let e = MULTIPLICATION_TABLE[i][j];
                out[e.index] += f64::from(e.sign) * a * b;
            }
        }
        Octonion(out)
    }
}

/// `(ab)c - a(bc)`.
pub fn associator(a: &Octonion, b: &Octonion, c: &Octonion) -> Octonion {
    Octonion::mul(&a.mul(b), c) - a.mul(&b.mul(c))
}

/// `ab - ba`.
pub fn commutator(a: &Octonion, b: &Octonion) -> Octonion {
    a.mul(b) - b.mul(a)
}

impl Index<usize> for Octonion {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Octonion {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Octonion {
    type Output = Octonion;
    fn add(self, rhs: Octonion) -> Octonion {
        let mut c = self.0;
        for (v, r) in c.iter_mut().zip(rhs.0) {
            *v += r;
        }
        Octonion(c)
    }
}

impl AddAssign for Octonion {
    fn add_assign(&mut self, rhs: Octonion) {
        for (v, r) in self.0.iter_mut().zip(rhs.0) {
            *v += r;
        }
    }
}

impl Sub for Octonion {
    type Output = Octonion;
    fn sub(self, rhs: Octonion) -> Octonion {
        let mut c = self.0;
        for (v, r) in c.iter_mut().zip(rhs.0) {
            *v -= r;
        }
        Octonion(c)
    }
}

impl Neg for Octonion {
    type Output = Octonion;
    fn neg(self) -> Octonion {
        self.scale(-1.0)
    }
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: Octonion) -> Octonion {
        Octonion::mul(&self, &rhs)
    }
}

impl Mul<f64> for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: f64) -> Octonion {
        self.scale(rhs)
    }
}

impl fmt::Display for Octonion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, v) in self.0.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if *v < 0.0 { '-' } else { '+' })?;
            } else if *v < 0.0 {
                write!(f, "-")?;
            }
            write!(f, "{}e{}", v.abs(), i)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(i: usize) -> Octonion {
        Octonion::basis(i)
    }

    fn random(rng: &mut ChaCha8Rng) -> Octonion {
        let mut c = [0.0; 8];
        for v in c.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        Octonion(c)
    }

    #[test]
    fn table_spot_values() {
        assert_eq!(e(1) * e(2), e(4));
        assert_eq!(e(4) * e(3), -e(6));
        assert_eq!(e(7) * e(7), -e(0));
        assert_eq!(e(5) * e(6), e(1));
    }

    #[test]
    fn table_is_signed_permutation_and_antisymmetric() {
        for i in 0..8 {
            let mut seen = [false; 8];
            for j in 0..8 {
                let bp = basis_product(i, j);
                assert!(bp.sign == 1 || bp.sign == -1);
                assert!(!seen[bp.index], "row {i} repeats e{}", bp.index);
                seen[bp.index] = true;
                if i != 0 && j != 0 && i != j {
                    let ba = basis_product(j, i);
                    assert_eq!(ba.index, bp.index);
                    assert_eq!(ba.sign, -bp.sign);
                }
            }
        }
    }

    #[test]
    fn identity_conj_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&mut rng);
        assert_eq!(e(0) * a, a);
        assert_eq!(a * e(0), a);
        assert_eq!(e(0).conj(), e(0));
        assert_eq!(e(5).conj(), -e(5));
        let v = e(0) + e(1);
        assert!((v.norm() - 2f64.sqrt()).abs() < 1e-15);
        // a * conj(a) = |a|^2
        let aa = a * a.conj();
        assert!((aa[0] - a.norm_sqr()).abs() < 1e-14);
        assert!(aa.0[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn associator_witness() {
        assert_eq!(associator(&e(1), &e(2), &e(3)), e(6).scale(-2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (a, b) = (random(&mut rng), random(&mut rng));
        assert_eq!(associator(&e(0), &a, &b), Octonion::ZERO);
    }

    #[test]
    fn alternativity_on_basis_triples() {
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(associator(&e(i), &e(i), &e(j)), Octonion::ZERO);
                assert_eq!(associator(&e(j), &e(i), &e(i)), Octonion::ZERO);
            }
        }
    }

    #[test]
    fn display() {
        assert_eq!(format!("{}", Octonion::ZERO), "0");
        assert_eq!(format!("{}", e(1) - e(3).scale(2.0)), "1e1 - 2e3");
    }
}
