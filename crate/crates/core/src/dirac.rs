//! The Cauchy-Riemann-Fueter system as literal signed-derivative matrices.
//!
//! Entry `(i, j)` of [`DIRAC_MATRIX`] is `±d/dx_k`: row `i` of the system
//! reads `sum_j sign(i,j) * d f_j / d x_k(i,j) = 0`. The 7x7 [`PD_MATRIX`]
//! expresses `(d f0/dx1, ..., d f0/dx7)` through the derivatives of
//! `(f1, ..., f7)`.

use crate::error::{domain, Result};
use crate::fields::{Field, Jacobian, Point8};
use crate::octonion::{basis_product, Octonion};

/// `sign * d/dx_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedPartial {
    pub sign: i8,
    pub index: usize,
}

const fn d(index: usize) -> SignedPartial {
    SignedPartial { sign: 1, index }
}

const fn m(index: usize) -> SignedPartial {
    SignedPartial { sign: -1, index }
}

pub type DiracMatrix = [[SignedPartial; 8]; 8];
pub type PdMatrix = [[SignedPartial; 7]; 7];

pub const DIRAC_MATRIX: DiracMatrix = [
    [d(0), m(1), m(2), m(3), m(4), m(5), m(6), m(7)],
    [d(1), d(0), m(4), m(7), d(2), m(6), d(5), d(3)],
    [d(2), d(4), d(0), m(5), m(1), d(3), m(7), d(6)],
    [d(3), d(7), d(5), d(0), m(6), m(2), d(4), m(1)],
    [d(4), m(2), d(1), d(6), d(0), m(7), m(3), d(5)],
    [d(5), d(6), m(3), d(2), d(7), d(0), m(1), m(4)],
    [d(6), m(5), d(7), m(4), d(3), d(1), d(0), m(2)],
    [d(7), m(3), m(6), d(1), m(5), d(4), d(2), d(0)],
];

/// Row `i` gives `d f0 / d x_(i+1)`; column `j` acts on `f_(j+1)`.
pub const PD_MATRIX: PdMatrix = [
    [m(0), d(4), d(7), m(2), d(6), m(5), m(3)],
    [m(4), m(0), d(5), d(1), m(3), d(7), m(6)],
    [m(7), m(5), m(0), d(6), d(2), m(4), d(1)],
    [d(2), m(1), m(6), m(0), d(7), d(3), m(5)],
    [m(6), d(3), m(2), m(7), m(0), d(1), d(4)],
    [d(5), m(7), d(4), m(3), m(1), m(0), d(2)],
    [d(3), d(6), m(1), d(5), m(4), m(2), m(0)],
];

/// Rebuilds the Dirac matrix from the multiplication table:
/// `D[f] = sum_k e_k d_k f`, so `e_k e_j = ±e_i` puts `±d_k` at `(i, j)`.
pub fn dirac_matrix_from_table() -> DiracMatrix {
    let mut out = [[d(0); 8]; 8];
    let mut filled = [[false; 8]; 8];
    for k in 0..8 {
        for j in 0..8 {
            let bp = basis_product(k, j);
            assert!(!filled[bp.index][j], "table is not a signed permutation");
            filled[bp.index][j] = true;
            out[bp.index][j] = SignedPartial { sign: bp.sign, index: k };
        }
    }
    out
}

/// Rearranges rows 1..7 of the Dirac matrix into the `U = P(D) V` form.
pub fn pd_matrix_from_dirac(dm: &DiracMatrix) -> Option<PdMatrix> {
    let mut out = [[d(0); 7]; 7];
    for (r, row) in out.iter_mut().enumerate() {
        let i = r + 1;
        // the f0 column of row i must be +d_i for the rearrangement
        if dm[i][0] != d(i) {
            return None;
        }
        for (c, slot) in row.iter_mut().enumerate() {
            let e = dm[i][c + 1];
            *slot = SignedPartial { sign: -e.sign, index: e.index };
        }
    }
    Some(out)
}

/// Entries where the literal matrix differs from the table-derived one.
pub fn dirac_table_mismatches() -> Vec<(usize, usize, SignedPartial, SignedPartial)> {
    let derived = dirac_matrix_from_table();
    let mut out = Vec::new();
    for i in 0..8 {
        for j in 0..8 {
            if derived[i][j] != DIRAC_MATRIX[i][j] {
                out.push((i, j, DIRAC_MATRIX[i][j], derived[i][j]));
            }
        }
    }
    out
}

fn jacobian_at(f: &Field, p: &Point8) -> Result<Jacobian> {
    if !p.is_interior() {
        return Err(domain(format!("point {:?} is not interior", p.to_array())));
    }
    f.jacobian(p)
}

/// Applies the Dirac matrix to an exact Jacobian.
pub fn apply_dirac(jac: &Jacobian) -> Octonion {
    let mut out = [0.0; 8];
    for (i, row) in DIRAC_MATRIX.iter().enumerate() {
        out[i] = row
            .iter()
            .enumerate()
            .map(|(j, e)| f64::from(e.sign) * jac[j][e.index])
            .sum();
    }
    Octonion(out)
}

/// `M(D) (f0, ..., f7)` at `p`; zero iff `f` satisfies the system there.
pub fn dirac_residual(f: &Field, p: &Point8) -> Result<Octonion> {
    Ok(apply_dirac(&jacobian_at(f, p)?))
}

/// `sum_jk |d f_j / d x_k|^2`.
pub fn second_gradient_sq(f: &Field, p: &Point8) -> Result<f64> {
    Ok(frobenius_sq(&jacobian_at(f, p)?))
}

pub fn frobenius_sq(jac: &Jacobian) -> f64 {
    jac.iter().flatten().map(|v| v * v).sum()
}

/// Per-component squared gradients `|grad f_j|^2`.
pub fn component_gradient_sq(jac: &Jacobian) -> [f64; 8] {
    jac.map(|row| row.iter().map(|v| v * v).sum())
}

/// `|d f0/dx0 - sum_j d f_j/dx_j|`.
pub fn theorem1_row0_identity(f: &Field, p: &Point8) -> Result<f64> {
    let jac = jacobian_at(f, p)?;
    let div: f64 = (1..8).map(|j| jac[j][j]).sum();
    Ok((jac[0][0] - div).abs())
}

/// Max-norm of `U - P(D) V` with `U = (d f0/dx1, ..., d f0/dx7)` and
/// `V = (f1, ..., f7)`.
pub fn theorem1_pd_identity(f: &Field, p: &Point8) -> Result<f64> {
    let jac = jacobian_at(f, p)?;
    let mut worst = 0.0_f64;
    for (r, row) in PD_MATRIX.iter().enumerate() {
        let u = jac[0][r + 1];
        let pv: f64 = row
            .iter()
            .enumerate()
            .map(|(c, e)| f64::from(e.sign) * jac[c + 1][e.index])
            .sum();
        worst = worst.max((u - pv).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{lift, HarmonicPotential};

    #[test]
    fn literal_matrix_matches_table() {
        assert!(dirac_table_mismatches().is_empty());
    }

    #[test]
    fn pd_matrix_matches_rearranged_system() {
        assert_eq!(pd_matrix_from_dirac(&DIRAC_MATRIX), Some(PD_MATRIX));
    }

    #[test]
    fn row_structure() {
        assert_eq!(DIRAC_MATRIX[0][0], d(0));
        for j in 1..8 {
            assert_eq!(DIRAC_MATRIX[0][j], m(j));
            assert_eq!(DIRAC_MATRIX[j][j], d(0));
        }
        // expansion shown for the second equation:
        // d f0/dx1 = -d f1/dx0 + d f2/dx4 + d f3/dx7 - d f4/dx2 + d f5/dx6 - d f6/dx5 - d f7/dx3
        assert_eq!(PD_MATRIX[0], [m(0), d(4), d(7), m(2), d(6), m(5), m(3)]);
    }

    #[test]
    fn basis_constants_reproduce_table_signs() {
        // Field x_k e_j has Jacobian with single 1 at (j, k); D of it is e_k e_j.
        for k in 0..8 {
            for j in 0..8 {
                let mut jac = [[0.0; 8]; 8];
                jac[j][k] = 1.0;
                let r = apply_dirac(&jac);
                assert_eq!(r, Octonion::basis(k).mul(&Octonion::basis(j)));
            }
        }
    }

    #[test]
    fn fixture_values() {
        let p = Point8::new(0.5, [0.1; 7]);
        let f = Field::identity_fixture();
        let r = dirac_residual(&f, &p).unwrap();
        assert_eq!(r, Octonion::scalar(-6.0));
        assert_eq!(second_gradient_sq(&f, &p).unwrap(), 8.0);
        assert_eq!(theorem1_row0_identity(&f, &p).unwrap(), 6.0);
        // U vanishes and P(D) never pairs f_j with its own partial.
        assert_eq!(theorem1_pd_identity(&f, &p).unwrap(), 0.0);
        let c = Field::constant(Octonion([1.0; 8]));
        assert_eq!(dirac_residual(&c, &p).unwrap(), Octonion::ZERO);
        assert_eq!(second_gradient_sq(&c, &p).unwrap(), 0.0);
        assert_eq!(theorem1_row0_identity(&c, &p).unwrap(), 0.0);
        assert_eq!(theorem1_pd_identity(&c, &p).unwrap(), 0.0);
    }

    #[test]
    fn boundary_points_are_rejected() {
        let f = lift(HarmonicPotential::newton([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(dirac_residual(&f, &Point8::new(0.0, [0.0; 7])).is_err());
    }
}
