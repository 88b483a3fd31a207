// SPDX-License-Identifier: Apache-2.0

//! Operators on `n` qubits expanded in the tensor-product Pauli basis.
//!
//! A basis string `B_α = σ^{α_1} ⊗ … ⊗ σ^{α_n}` is stored as the base-4
//! integer `α = Σ_j α_j 4^{n-1-j}` (site 0 most significant), with
//! `0, 1, 2, 3` standing for `1, x, y, z`. Products are computed with the
//! single-site table `σ^a σ^b = i^k σ^{a xor b}`, so no matrix is ever formed.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ZERO;

/// Largest qubit count the dense representations support.
pub const MAX_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// `σ^a σ^b = i^k σ^c`; returns `(k mod 4, c)`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        let (a, b) = (self.index(), other.index());
        let c = Pauli::from_index(a ^ b);
        if a == 0 || b == 0 || a == b {
            return (0, c);
        }
        // x·y = iz, y·z = ix, z·x = iy
        let cyclic = matches!(
            (self, other),
            (Pauli::X, Pauli::Y) | (Pauli::Y, Pauli::Z) | (Pauli::Z, Pauli::X)
        );
        (if cyclic { 1 } else { 3 }, c)
    }

    pub fn matrix(self) -> DMatrix<Complex64> {
        let (o, l, i) = (ZERO, Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
        let entries = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "1",
            Pauli::X => "x",
            Pauli::Y => "y",
            Pauli::Z => "z",
        };
        f.write_str(s)
    }
}

pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Site `site` (0-based) of basis string `alpha` on `n` qubits.
pub fn site_pauli(alpha: usize, site: usize, n: usize) -> Pauli {
    Pauli::from_index(alpha >> (2 * (n - 1 - site)))
}

pub fn string_index(paulis: &[Pauli]) -> usize {
    paulis.iter().fold(0, |acc, p| acc * 4 + p.index())
}

pub fn string_of(alpha: usize, n: usize) -> Vec<Pauli> {
    (0..n).map(|s| site_pauli(alpha, s, n)).collect()
}

/// Number of non-identity sites.
pub fn weight(alpha: usize, n: usize) -> usize {
    (0..n)
        .filter(|&s| site_pauli(alpha, s, n) != Pauli::I)
        .count()
}

/// `B_α B_β = i^k B_γ`; returns `(k, γ)`.
pub fn string_mul(alpha: usize, beta: usize, n: usize) -> (u8, usize) {
    let mut phase = 0u8;
    for s in 0..n {
        let (k, _) = site_pauli(alpha, s, n).mul(site_pauli(beta, s, n));
        phase = (phase + k) & 3;
    }
    (phase, alpha ^ beta)
}

/// Whether two basis strings anticommute (odd number of clashing sites).
pub fn anticommute(alpha: usize, beta: usize, n: usize) -> bool {
    let clashes = (0..n)
        .filter(|&s| {
            let (a, b) = (site_pauli(alpha, s, n), site_pauli(beta, s, n));
            a != Pauli::I && b != Pauli::I && a != b
        })
        .count();
    clashes % 2 == 1
}

/// Operator `Σ_α c_α B_α` on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOperatorRep {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl PauliOperatorRep {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::arg(
                "n",
                format!("qubit count {n} outside 1..={MAX_QUBITS}"),
            ));
        }
        Ok(PauliOperatorRep {
            n,
            coeffs: vec![ZERO; 1 << (2 * n)],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut op = Self::zeros(n)?;
        op.coeffs[0] = Complex64::new(1.0, 0.0);
        Ok(op)
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let zero = Self::zeros(n)?;
        if coeffs.len() != zero.coeffs.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {n} qubits (expected {})",
                coeffs.len(),
                zero.coeffs.len()
            )));
        }
        Ok(PauliOperatorRep { n, coeffs })
    }

    /// Single basis string with coefficient `coeff`.
    pub fn basis(paulis: &[Pauli], coeff: Complex64) -> Result<Self> {
        let mut op = Self::zeros(paulis.len())?;
        op.coeffs[string_index(paulis)] = coeff;
        Ok(op)
    }

    /// `coeff · σ^p` on `site`, identity elsewhere.
    pub fn single_site(n: usize, site: usize, p: Pauli, coeff: Complex64) -> Result<Self> {
        if site >= n {
            return Err(Error::arg(
                "site",
                format!("site {site} outside {n} qubits"),
            ));
        }
        let mut paulis = vec![Pauli::I; n];
        paulis[site] = p;
        Self::basis(&paulis, coeff)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, paulis: &[Pauli]) -> Complex64 {
        self.coeffs[string_index(paulis)]
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(i, c)| (i, *c))
    }

    /// Real coefficients ⇔ Hermitian operator.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.im.abs() <= tol)
    }

    pub fn real_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.re).collect()
    }

    pub fn from_real(n: usize, coeffs: &[f64]) -> Result<Self> {
        Self::from_coeffs(n, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        PauliOperatorRep {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_size(other)?;
        Ok(PauliOperatorRep {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Operator product, exact in the Pauli algebra.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_size(other)?;
        let mut out = Self::zeros(self.n)?;
        for (a, ca) in self.nonzero() {
            for (b, cb) in other.nonzero() {
                let (k, g) = string_mul(a, b, self.n);
                out.coeffs[g] += ca * cb * i_pow(k);
            }
        }
        Ok(out)
    }

    fn same_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "operators on {} and {} qubits",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// Dense `2ⁿ × 2ⁿ` matrix.
    pub fn densify(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for (alpha, c) in self.nonzero() {
            let (flip, entries) = monomial(alpha, self.n);
            for (col, phase) in entries.iter().enumerate() {
                m[(col ^ flip, col)] += c * phase;
            }
        }
        m
    }

    /// Expands a dense matrix, `c_α = tr(B_α M) / 2ⁿ`.
    pub fn from_dense(n: usize, m: &DMatrix<Complex64>) -> Result<Self> {
        let mut op = Self::zeros(n)?;
        let dim = 1usize << n;
        if m.shape() != (dim, dim) {
            return Err(Error::Dimension(format!(
                "{:?} matrix for {n} qubits",
                m.shape()
            )));
        }
        for alpha in 0..op.coeffs.len() {
            let (flip, entries) = monomial(alpha, n);
            // tr(B M) = Σ_y B_{y⊕f, y} M_{y, y⊕f}
            let tr: Complex64 = entries
                .iter()
                .enumerate()
                .map(|(y, phase)| phase * m[(y, y ^ flip)])
                .sum();
            op.coeffs[alpha] = tr / dim as f64;
        }
        Ok(op)
    }

    pub fn operator_norm(&self) -> f64 {
        crate::linalg::operator_norm(&self.densify())
    }
}

/// `B_α` as a monomial matrix: `B|y⟩ = phase[y] |y ⊕ flip⟩`.
fn monomial(alpha: usize, n: usize) -> (usize, Vec<Complex64>) {
    let dim = 1usize << n;
    let mut flip = 0usize;
    for s in 0..n {
        if matches!(site_pauli(alpha, s, n), Pauli::X | Pauli::Y) {
            flip |= 1 << (n - 1 - s);
        }
    }
    let phases = (0..dim)
        .map(|y| {
            let mut k = 0u8;
            for s in 0..n {
                let bit = (y >> (n - 1 - s)) & 1;
                match site_pauli(alpha, s, n) {
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                    Pauli::Y => k += if bit == 0 { 1 } else { 3 },
                    Pauli::Z if bit == 1 => k += 2,
                    _ => {}
                }
            }
            i_pow(k)
        })
        .collect();
    (flip, phases)
}

/// `[a, b]` computed string by string: `[B_α, B_β] = 2 B_α B_β` when the
/// strings anticommute and `0` otherwise.
pub fn pauli_commutator(a: &PauliOperatorRep, b: &PauliOperatorRep) -> Result<PauliOperatorRep> {
    a.same_size(b)?;
    let n = a.n;
    let mut out = PauliOperatorRep::zeros(n)?;
    for (alpha, ca) in a.nonzero() {
        for (beta, cb) in b.nonzero() {
            if anticommute(alpha, beta, n) {
                let (k, g) = string_mul(alpha, beta, n);
                out.coeffs[g] += ca * cb * i_pow(k) * 2.0;
            }
        }
    }
    Ok(out)
}

impl fmt::Display for PauliOperatorRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (alpha, c) in self.nonzero() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)", c.re, c.im)?;
            for p in string_of(alpha, self.n) {
                write!(f, "{p}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, max_abs_diff};
    use num_complex::Complex;

    type Gauss = Complex<i64>;

    fn exact(p: Pauli) -> [[Gauss; 2]; 2] {
        let (o, l, i) = (Gauss::new(0, 0), Gauss::new(1, 0), Gauss::new(0, 1));
        match p {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    fn mul2(a: &[[Gauss; 2]; 2], b: &[[Gauss; 2]; 2]) -> [[Gauss; 2]; 2] {
        let mut out = [[Gauss::new(0, 0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..2 {
                    out[r][c] += a[r][k] * b[k][c];
                }
            }
        }
        out
    }

    /// Exact integer matrices on two qubits.
    fn exact_two(a: Pauli, b: Pauli) -> Vec<Vec<Gauss>> {
        let (ma, mb) = (exact(a), exact(b));
        (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| ma[r / 2][c / 2] * mb[r % 2][c % 2])
                    .collect()
            })
            .collect()
    }

    fn mul4(a: &[Vec<Gauss>], b: &[Vec<Gauss>]) -> Vec<Vec<Gauss>> {
        (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| (0..4).map(|k| a[r][k] * b[k][c]).sum())
                    .collect()
            })
            .collect()
    }

    fn sub4(a: &[Vec<Gauss>], b: &[Vec<Gauss>]) -> Vec<Vec<Gauss>> {
        (0..4)
            .map(|r| (0..4).map(|c| a[r][c] - b[r][c]).collect())
            .collect()
    }

    fn comm4(a: &[Vec<Gauss>], b: &[Vec<Gauss>]) -> Vec<Vec<Gauss>> {
        sub4(&mul4(a, b), &mul4(b, a))
    }

    #[test]
    fn sandwich_identity_is_exact() {
        for beta in Pauli::ALL {
            let mut sum = [[Gauss::new(0, 0); 2]; 2];
            for alpha in Pauli::ALL {
                let term = mul2(&mul2(&exact(alpha), &exact(beta)), &exact(alpha));
                for r in 0..2 {
                    for c in 0..2 {
                        sum[r][c] += term[r][c];
                    }
                }
            }
            let scale = if beta == Pauli::I { 4 } else { 0 };
            let expected = [
                [Gauss::new(scale, 0), Gauss::new(0, 0)],
                [Gauss::new(0, 0), Gauss::new(scale, 0)],
            ];
            assert_eq!(sum, expected, "β = {beta}");
        }
    }

    #[test]
    fn double_commutator_identity_is_exact() {
        // D_k(σ^α_j) = Σ_β [σ^β_k, [σ^β_k, σ^α_j]] = 8 δ_{jk} σ^α_j
        for alpha in Pauli::ALL {
            for j in 0..2 {
                let target = if j == 0 {
                    exact_two(alpha, Pauli::I)
                } else {
                    exact_two(Pauli::I, alpha)
                };
                for k in 0..2 {
                    let mut total: Vec<Vec<Gauss>> = vec![vec![Gauss::new(0, 0); 4]; 4];
                    for beta in [Pauli::X, Pauli::Y, Pauli::Z] {
                        let s = if k == 0 {
                            exact_two(beta, Pauli::I)
                        } else {
                            exact_two(Pauli::I, beta)
                        };
                        let d = comm4(&s, &comm4(&s, &target));
                        for r in 0..4 {
                            for c in 0..4 {
                                total[r][c] += d[r][c];
                            }
                        }
                    }
                    let factor = if alpha != Pauli::I && j == k { 8 } else { 0 };
                    let expected: Vec<Vec<Gauss>> = target
                        .iter()
                        .map(|row| row.iter().map(|z| z * factor).collect())
                        .collect();
                    assert_eq!(total, expected, "α = {alpha}, j = {j}, k = {k}");
                }
            }
        }
    }

    #[test]
    fn single_site_table_matches_matrices() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let (k, c) = a.mul(b);
                let lhs = a.matrix() * b.matrix();
                let rhs = c.matrix() * i_pow(k);
                assert!(max_abs_diff(&lhs, &rhs) < 1e-15, "{a}{b}");
            }
        }
    }

    #[test]
    fn x_z_commutator() {
        let x = PauliOperatorRep::basis(&[Pauli::X], Complex64::new(1.0, 0.0)).unwrap();
        let z = PauliOperatorRep::basis(&[Pauli::Z], Complex64::new(1.0, 0.0)).unwrap();
        let c = pauli_commutator(&x, &z).unwrap();
        assert_eq!(c.coeff(&[Pauli::Y]), Complex64::new(0.0, -2.0));
        assert_eq!(c.nonzero().count(), 1);
        assert_eq!(pauli_commutator(&x, &x).unwrap().nonzero().count(), 0);
    }

    #[test]
    fn two_qubit_hopping_commutator_matches_dense() {
        let one = Complex64::new(1.0, 0.0);
        let h = PauliOperatorRep::basis(&[Pauli::X, Pauli::X], one)
            .unwrap()
            .add(&PauliOperatorRep::basis(&[Pauli::Y, Pauli::Y], one).unwrap())
            .unwrap();
        let z1 = PauliOperatorRep::basis(&[Pauli::Z, Pauli::I], one).unwrap();
        let c = pauli_commutator(&h, &z1).unwrap();
        assert_eq!(c.coeff(&[Pauli::Y, Pauli::X]), Complex64::new(0.0, -2.0));
        assert_eq!(c.coeff(&[Pauli::X, Pauli::Y]), Complex64::new(0.0, 2.0));
        assert_eq!(c.nonzero().count(), 2);
        let hd = h.densify();
        let zd = z1.densify();
        assert!(max_abs_diff(&(&hd * &zd - &zd * &hd), &c.densify()) < 1e-14);
    }

    #[test]
    fn densify_matches_kron_and_round_trips() {
        let n = 3;
        for alpha in [0usize, 7, 27, 45, 63] {
            let paulis = string_of(alpha, n);
            let op = PauliOperatorRep::basis(&paulis, Complex64::new(1.0, 0.0)).unwrap();
            let k = paulis[1..]
                .iter()
                .fold(paulis[0].matrix(), |acc, p| kron(&acc, &p.matrix()));
            assert!(max_abs_diff(&op.densify(), &k) < 1e-15);
        }
        let mut op = PauliOperatorRep::zeros(n).unwrap();
        for (i, c) in op.coeffs_mut().iter_mut().enumerate() {
            *c = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        let back = PauliOperatorRep::from_dense(n, &op.densify()).unwrap();
        assert!(op
            .coeffs()
            .iter()
            .zip(back.coeffs())
            .all(|(a, b)| (a - b).norm() < 1e-13));
    }

    #[test]
    fn basis_orthogonality() {
        let n = 2;
        for a in 0..16 {
            for b in 0..16 {
                let ma =
                    PauliOperatorRep::basis(&string_of(a, n), Complex64::new(1.0, 0.0)).unwrap();
                let mb =
                    PauliOperatorRep::basis(&string_of(b, n), Complex64::new(1.0, 0.0)).unwrap();
                let tr = crate::linalg::trace(&(ma.densify() * mb.densify()));
                let expected = if a == b { 4.0 } else { 0.0 };
                assert!((tr - Complex64::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let a = PauliOperatorRep::identity(2).unwrap();
        let b = PauliOperatorRep::identity(3).unwrap();
        assert!(pauli_commutator(&a, &b).is_err());
        assert!(PauliOperatorRep::zeros(7).is_err());
    }
}
