// SPDX-License-Identifier: Apache-2.0

//! Intrinsic Hamiltonians and master-equation generators in the Pauli basis.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pauli::{
    anticommute, site_pauli, string_index, string_mul, weight, Pauli, PauliOperatorRep, MAX_QUBITS,
};
use crate::error::{Error, Result};

/// Nearest-neighbour Hamiltonian `H0 = Σ_j h_j + Σ_j f·σ_j`, with `h_j`
/// acting on sites `j` and `j+1` and given by its 16 coefficients on
/// `σ^a ⊗ σ^b` (index `4a + b`), and an optional uniform on-site field.
#[derive(Clone, Debug, PartialEq)]
pub struct H0Spec {
    n: usize,
    terms: Vec<[f64; 16]>,
    field: [f64; 4],
    label: String,
}

impl H0Spec {
    /// Same two-site term on every bond.
    pub fn uniform(n: usize, term: [f64; 16], label: impl Into<String>) -> Result<Self> {
        check_qubits(n)?;
        if term.iter().any(|c| !c.is_finite()) {
            return Err(Error::arg("h0", "coefficients must be finite"));
        }
        Ok(H0Spec {
            n,
            terms: vec![term; n.saturating_sub(1)],
            field: [0.0; 4],
            label: label.into(),
        })
    }

    /// `σ^x σ^x + σ^y σ^y` on every bond.
    pub fn xx(n: usize) -> Result<Self> {
        let mut term = [0.0; 16];
        term[4 * Pauli::X.index() + Pauli::X.index()] = 1.0;
        term[4 * Pauli::Y.index() + Pauli::Y.index()] = 1.0;
        Self::uniform(n, term, "xx")
    }

    /// `σ^x σ^x + σ^y σ^y + σ^z σ^z` on every bond.
    pub fn heisenberg(n: usize) -> Result<Self> {
        let mut term = [0.0; 16];
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            term[5 * p.index()] = 1.0;
        }
        Self::uniform(n, term, "heisenberg")
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::uniform(n, [0.0; 16], "zero")
    }

    /// Per-bond coefficient lists; a single list is repeated on every bond.
    pub fn custom(n: usize, terms: &[Vec<f64>]) -> Result<Self> {
        check_qubits(n)?;
        let bonds = n.saturating_sub(1);
        if terms.len() != 1 && terms.len() != bonds {
            return Err(Error::arg(
                "h0.terms",
                format!(
                    "{} terms for {bonds} bonds (give 1 or {bonds})",
                    terms.len()
                ),
            ));
        }
        let mut parsed = Vec::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            let arr: [f64; 16] = t.as_slice().try_into().map_err(|_| {
                Error::arg(
                    "h0.terms",
                    format!("term {i} has {} coefficients, expected 16", t.len()),
                )
            })?;
            if arr.iter().any(|c| !c.is_finite()) {
                return Err(Error::arg("h0.terms", format!("term {i} is not finite")));
            }
            parsed.push(arr);
        }
        let terms = if parsed.len() == 1 {
            vec![parsed[0]; bonds]
        } else {
            parsed
        };
        Ok(H0Spec {
            n,
            terms,
            field: [0.0; 4],
            label: "custom".into(),
        })
    }

    /// Adds `h σ^p` on every site.
    pub fn with_uniform_field(mut self, p: Pauli, h: f64) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::arg("field", "must be finite"));
        }
        self.field[p.index()] += h;
        self.label = format!("{}+{h}{p}", self.label);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[[f64; 16]] {
        &self.terms
    }

    pub fn field(&self) -> [f64; 4] {
        self.field
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Assembled `H0` in the Pauli basis.
    pub fn operator(&self) -> PauliOperatorRep {
        let mut op = PauliOperatorRep::zeros(self.n).expect("qubit count checked at construction");
        for (j, term) in self.terms.iter().enumerate() {
            for (ab, &c) in term.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let mut paulis = vec![Pauli::I; self.n];
                paulis[j] = Pauli::from_index(ab / 4);
                paulis[j + 1] = Pauli::from_index(ab % 4);
                op.coeffs_mut()[string_index(&paulis)] += Complex64::new(c, 0.0);
            }
        }
        for site in 0..self.n {
            for p in Pauli::ALL {
                let mut paulis = vec![Pauli::I; self.n];
                paulis[site] = p;
                op.coeffs_mut()[string_index(&paulis)] +=
                    Complex64::new(self.field[p.index()], 0.0);
            }
        }
        op
    }

    /// Operator norm of the assembled `H0`.
    pub fn h0_norm(&self) -> f64 {
        self.operator().operator_norm()
    }
}

impl fmt::Display for H0Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {} sites", self.label, self.n)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::arg(
            "n",
            format!("qubit count {n} outside 1..={MAX_QUBITS}"),
        ));
    }
    Ok(())
}

/// Lindblad operators of the noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NoiseKind {
    /// `σ^x_j, σ^y_j, σ^z_j` on every site.
    Isotropic,
    /// One operator `X_j = x·1 + y·σ^z_j` per site.
    Fixed { x: f64, y: f64 },
}

impl NoiseKind {
    /// `X_j = σ^z_j`.
    pub fn z_only() -> Self {
        NoiseKind::Fixed { x: 0.0, y: 1.0 }
    }

    /// Dissipation rate per unit `γ` on site letter `p`:
    /// `Σ_X [[σ^p, X], X] = d(p) σ^p`.
    pub fn site_rate(self, p: Pauli) -> f64 {
        match (self, p) {
            (_, Pauli::I) => 0.0,
            (NoiseKind::Isotropic, _) => 8.0,
            // [[σ^x, σ^z], σ^z] = 4σ^x; the identity part of X_j drops out
            (NoiseKind::Fixed { y, .. }, Pauli::X | Pauli::Y) => 4.0 * y * y,
            (NoiseKind::Fixed { .. }, Pauli::Z) => 0.0,
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::Isotropic => f.write_str("isotropic"),
            NoiseKind::Fixed { x, y } => write!(f, "fixed(x={x}, y={y})"),
        }
    }
}

/// Sparse real matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Csr {
    pub dim: usize,
    pub row_start: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_start = Vec::with_capacity(dim + 1);
        let (mut cols, mut values) = (Vec::new(), Vec::new());
        row_start.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                cols.push(c);
                values.push(v);
            }
            row_start.push(cols.len());
        }
        Csr {
            dim,
            row_start,
            cols,
            values,
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[r]..self.row_start[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// `out = self · v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).map(|(c, x)| x * v[c]).sum();
        }
    }

    /// `out = selfᵀ · v`.
    pub fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &vr) in v.iter().enumerate() {
            if vr == 0.0 {
                continue;
            }
            for (c, x) in self.row(r) {
                out[c] += x * vr;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, x) in self.row(r) {
                m[(r, c)] += x;
            }
        }
        m
    }
}

/// `F_{αβ}` with `−i[H0, B_α] = Σ_β F_{αβ} B_β`, stored by rows `α`.
pub(crate) fn structure_rows(h0: &H0Spec) -> Result<Csr> {
    let op = h0.operator();
    if !op.is_hermitian(0.0) {
        return Err(Error::arg("h0", "Hamiltonian must be Hermitian"));
    }
    let n = h0.n();
    let terms: Vec<(usize, f64)> = op.nonzero().map(|(g, c)| (g, c.re)).collect();
    let rows = (0..op.dim())
        .map(|alpha| {
            terms
                .iter()
                .filter(|&&(g, _)| anticommute(g, alpha, n))
                .map(|&(g, h)| {
                    // −i h [B_g, B_α] = −2i h i^k B_{g⊕α}, real since k is odd
                    let (k, beta) = string_mul(g, alpha, n);
                    let value = if k == 1 { 2.0 * h } else { -2.0 * h };
                    (beta, value)
                })
                .collect()
        })
        .collect();
    Ok(Csr::from_rows(rows))
}

/// Master-equation generator acting on real Pauli coefficient vectors.
///
/// In the Schrödinger picture `ċ = G c` with `G = Fᵀ − γ diag(d)`; the
/// Heisenberg picture uses `Gᵀ = F − γ diag(d)`. `d_α = Σ_j d(α_j)` is the
/// per-site dissipation rate of [`NoiseKind::site_rate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    n: usize,
    kind: NoiseKind,
    gamma: f64,
    h0_label: String,
    h0_norm: f64,
    structure: Csr,
    decay: Vec<f64>,
}

/// Builds the Schrödinger-picture generator `−i[H0, ρ] − γ Σ_j D_j(ρ)`.
pub fn build_generator(
    h0: &H0Spec,
    kind: NoiseKind,
    gamma: f64,
    n: usize,
) -> Result<Superoperator> {
    check_qubits(n)?;
    if h0.n() != n {
        return Err(Error::Dimension(format!(
            "H0 on {} sites, generator on {n}",
            h0.n()
        )));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::arg(
            "gamma",
            format!("must be finite and non-negative, got {gamma}"),
        ));
    }
    if let NoiseKind::Fixed { x, y } = kind {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::arg("noise", "field components must be finite"));
        }
    }
    let structure = structure_rows(h0)?;
    let decay = (0..structure.dim)
        .map(|alpha| {
            gamma
                * (0..n)
                    .map(|s| kind.site_rate(site_pauli(alpha, s, n)))
                    .sum::<f64>()
        })
        .collect();
    Ok(Superoperator {
        n,
        kind,
        gamma,
        h0_label: h0.label().to_string(),
        h0_norm: h0.h0_norm(),
        structure,
        decay,
    })
}

impl Superoperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.decay.len()
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn h0_label(&self) -> &str {
        &self.h0_label
    }

    pub fn h0_norm(&self) -> f64 {
        self.h0_norm
    }

    /// `γ d_α`, the dissipative decay rate of each basis string.
    pub fn decay_rates(&self) -> &[f64] {
        &self.decay
    }

    /// `out = G v`.
    pub fn apply_schrodinger(&self, v: &[f64], out: &mut [f64]) {
        self.structure.apply_transpose(v, out);
        for ((o, &x), &d) in out.iter_mut().zip(v).zip(&self.decay) {
            *o -= d * x;
        }
    }

    /// `out = Gᵀ v`.
    pub fn apply_heisenberg(&self, v: &[f64], out: &mut [f64]) {
        self.structure.apply(v, out);
        for ((o, &x), &d) in out.iter_mut().zip(v).zip(&self.decay) {
            *o -= d * x;
        }
    }

    /// Dense Schrödinger-picture matrix `G`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut g = self.structure.to_dense().transpose();
        for (i, d) in self.decay.iter().enumerate() {
            g[(i, i)] -= d;
        }
        g
    }

    /// Maximum absolute row sum of `G`, which also bounds `Gᵀ` since the
    /// structure part is antisymmetric.
    pub(crate) fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.structure.row(r).map(|(_, x)| x.abs()).sum::<f64>() + self.decay[r])
            .fold(0.0, f64::max)
    }

    /// Smallest decay rate among non-identity strings.
    pub(crate) fn min_traceless_decay(&self) -> f64 {
        self.decay[1..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Pauli weight of every basis string.
pub fn weights(n: usize) -> Vec<usize> {
    (0..1usize << (2 * n)).map(|a| weight(a, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::pauli::{pauli_commutator, string_of};

    #[test]
    fn xx_norm_matches_free_fermion_spectrum() {
        // H0 = 2 Σ ε_q n_q with ε_q = 2cos(qπ/(n+1)); the maximum fills ε_q > 0
        let h = H0Spec::xx(4).unwrap();
        let expected = 2.0
            * (2.0 * (std::f64::consts::PI / 5.0).cos()
                + 2.0 * (2.0 * std::f64::consts::PI / 5.0).cos());
        assert!((h.h0_norm() - expected).abs() < 1e-12);
        assert!((H0Spec::xx(2).unwrap().h0_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn structure_matches_commutators() {
        let h = H0Spec::heisenberg(3)
            .unwrap()
            .with_uniform_field(Pauli::X, 0.7)
            .unwrap();
        let f = structure_rows(&h).unwrap().to_dense();
        let op = h.operator();
        for alpha in [1usize, 5, 14, 27, 40, 63] {
            let b =
                PauliOperatorRep::basis(&string_of(alpha, 3), Complex64::new(1.0, 0.0)).unwrap();
            let c = pauli_commutator(&op, &b)
                .unwrap()
                .scale(Complex64::new(0.0, -1.0));
            for beta in 0..64 {
                assert!((c.coeffs()[beta] - Complex64::new(f[(alpha, beta)], 0.0)).norm() < 1e-13);
            }
        }
        assert!((&f + f.transpose()).amax() < 1e-14);
        assert!(f.row(0).amax() == 0.0);
    }

    #[test]
    fn dissipator_rates() {
        let h = H0Spec::zero(2).unwrap();
        let iso = build_generator(&h, NoiseKind::Isotropic, 0.5, 2).unwrap();
        let z = build_generator(&h, NoiseKind::z_only(), 0.5, 2).unwrap();
        let idx = |a: Pauli, b: Pauli| string_index(&[a, b]);
        assert_eq!(iso.decay_rates()[idx(Pauli::X, Pauli::Z)], 8.0);
        assert_eq!(iso.decay_rates()[idx(Pauli::I, Pauli::Y)], 4.0);
        assert_eq!(z.decay_rates()[idx(Pauli::X, Pauli::Z)], 2.0);
        assert_eq!(z.decay_rates()[idx(Pauli::Z, Pauli::Z)], 0.0);
        assert_eq!(z.decay_rates()[0], 0.0);
    }

    #[test]
    fn dense_and_sparse_agree() {
        let h = H0Spec::xx(3)
            .unwrap()
            .with_uniform_field(Pauli::Z, 0.3)
            .unwrap();
        let g = build_generator(&h, NoiseKind::Isotropic, 0.2, 3).unwrap();
        let dense = g.to_dense();
        let v: Vec<f64> = (0..64).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut out = vec![0.0; 64];
        g.apply_schrodinger(&v, &mut out);
        let expect = &dense * nalgebra::DVector::from_column_slice(&v);
        assert!(out
            .iter()
            .zip(expect.iter())
            .all(|(a, b)| (a - b).abs() < 1e-12));
        g.apply_heisenberg(&v, &mut out);
        let expect = dense.transpose() * nalgebra::DVector::from_column_slice(&v);
        assert!(out
            .iter()
            .zip(expect.iter())
            .all(|(a, b)| (a - b).abs() < 1e-12));
        // trace preservation: the identity row of G vanishes
        assert!(dense.row(0).amax() == 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let h = H0Spec::xx(3).unwrap();
        assert!(build_generator(&h, NoiseKind::Isotropic, -1.0, 3).is_err());
        assert!(build_generator(&h, NoiseKind::Isotropic, 0.1, 4).is_err());
        assert!(H0Spec::xx(7).is_err());
        assert!(H0Spec::custom(3, &[vec![0.0; 15]]).is_err());
        assert!(H0Spec::custom(4, &[vec![0.0; 16], vec![0.0; 16]]).is_err());
    }
}
