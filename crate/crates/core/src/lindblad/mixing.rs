// SPDX-License-Identifier: Apache-2.0

//! Structure matrix `F`, its rank diagnostic, and the spectral relaxation check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::generator::{structure_rows, H0Spec, Superoperator};
use super::pauli::{site_pauli, Pauli, PauliOperatorRep};
use crate::error::{Error, Result};

/// Largest qubit count for dense spectral analysis.
pub const MAX_SPECTRAL_QUBITS: usize = 5;
/// Relative singular-value threshold for numerical rank and kernels.
pub const RANK_TOL: f64 = 1e-10;

/// `F_{αβ}` with `−i[H0, B_α] = Σ_β F_{αβ} B_β`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureMatrix {
    pub n: usize,
    pub f: DMatrix<f64>,
}

impl StructureMatrix {
    /// Whether some site of `alpha` carries `σ^x` or `σ^y`.
    pub fn in_index_set(&self, alpha: usize) -> bool {
        (0..self.n).any(|s| matches!(site_pauli(alpha, s, self.n), Pauli::X | Pauli::Y))
    }
}

fn check_spectral(n: usize) -> Result<()> {
    if n > MAX_SPECTRAL_QUBITS {
        return Err(Error::arg(
            "n",
            format!("spectral analysis needs n ≤ {MAX_SPECTRAL_QUBITS}, got {n}"),
        ));
    }
    Ok(())
}

pub fn build_structure_matrix(h0: &H0Spec, n: usize) -> Result<StructureMatrix> {
    check_spectral(n)?;
    if h0.n() != n {
        return Err(Error::Dimension(format!(
            "H0 on {} sites, requested {n}",
            h0.n()
        )));
    }
    Ok(StructureMatrix {
        n,
        f: structure_rows(h0)?.to_dense(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub max_rank: usize,
    pub full_rank: bool,
    pub singular_values: Vec<f64>,
}

/// Rank of the block `F_{αβ}` with `α ∉ I`, `β ∈ I`.
pub fn rank_condition_report(f: &StructureMatrix) -> RankReport {
    let dim = f.f.nrows();
    let (outside, inside): (Vec<usize>, Vec<usize>) = (0..dim).partition(|&a| !f.in_index_set(a));
    let block = DMatrix::from_fn(outside.len(), inside.len(), |r, c| {
        f.f[(outside[r], inside[c])]
    });
    let mut singular_values: Vec<f64> = block.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = if top == 0.0 {
        0
    } else {
        singular_values
            .iter()
            .filter(|&&s| s > RANK_TOL * top)
            .count()
    };
    let max_rank = outside.len().min(inside.len());
    RankReport {
        rows: outside.len(),
        cols: inside.len(),
        rank,
        max_rank,
        full_rank: rank == max_rank,
        singular_values,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationReport {
    /// `−max Re λ` over eigenvalues outside the kernel; `∞` if there are none.
    pub gap: f64,
    pub kernel_dim: usize,
    /// Orthonormal basis of the kernel of the Schrödinger generator.
    pub steady_states: Vec<PauliOperatorRep>,
    pub maximally_mixing: bool,
    pub eigenvalues: Vec<Complex64>,
}

/// Eigen-analysis of the Schrödinger generator.
pub fn relaxation_check(gen: &Superoperator) -> Result<RelaxationReport> {
    check_spectral(gen.n())?;
    let g = gen.to_dense();
    let dim = g.nrows();
    let scale = gen.norm_bound().max(f64::MIN_POSITIVE);

    let svd = g.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let kernel: Vec<usize> = (0..dim)
        .filter(|&i| svd.singular_values[i] <= RANK_TOL * scale)
        .collect();
    let steady_states = kernel
        .iter()
        .map(|&i| {
            let row: Vec<f64> = v_t.row(i).iter().copied().collect();
            PauliOperatorRep::from_real(gen.n(), &row)
        })
        .collect::<Result<Vec<_>>>()?;
    let maximally_mixing =
        steady_states.len() == 1 && steady_states[0].coeffs()[0].norm() > 1.0 - 1e-8;

    let eigenvalues = real_eigenvalues_of(g)?;
    let mut by_size: Vec<Complex64> = eigenvalues.clone();
    by_size.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let gap = by_size[kernel.len().min(dim)..]
        .iter()
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);

    Ok(RelaxationReport {
        gap,
        kernel_dim: kernel.len(),
        steady_states,
        maximally_mixing,
        eigenvalues,
    })
}

/// Eigenvalues of a real square matrix.
fn real_eigenvalues_of(g: DMatrix<f64>) -> Result<Vec<Complex64>> {
    let m = faer::Mat::<f64>::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)]);
    let values = m
        .eigenvalues()
        .map_err(|e| Error::Unsupported(format!("eigenvalue solver failed: {e:?}")))?;
    Ok(values.iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::generator::{build_generator, NoiseKind};
    use crate::lindblad::pauli::string_of;
    use rand::{Rng, SeedableRng};

    #[test]
    fn sigma_x_structure() {
        let h = H0Spec::zero(1)
            .unwrap()
            .with_uniform_field(Pauli::X, 1.0)
            .unwrap();
        let f = build_structure_matrix(&h, 1).unwrap();
        let (y, z) = (Pauli::Y.index(), Pauli::Z.index());
        assert_eq!(f.f[(z, y)], -2.0);
        assert_eq!(f.f[(y, z)], 2.0);
        let others = f.f.iter().filter(|v| **v != 0.0).count();
        assert_eq!(others, 2);
        let report = rank_condition_report(&f);
        assert_eq!(
            (report.rows, report.cols, report.rank, report.max_rank),
            (2, 2, 1, 2)
        );
        assert!(!report.full_rank);
    }

    #[test]
    fn zero_hamiltonian() {
        let f = build_structure_matrix(&H0Spec::zero(2).unwrap(), 2).unwrap();
        assert_eq!(f.f.amax(), 0.0);
        let report = rank_condition_report(&f);
        assert_eq!(report.rank, 0);
        assert!(!report.full_rank);
        assert_eq!((report.rows, report.cols), (4, 12));
    }

    #[test]
    fn structure_is_antisymmetric_against_cyclic_trace() {
        let n = 2;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let terms = vec![(0..16)
            .map(|_| rng.random::<f64>() - 0.5)
            .collect::<Vec<f64>>()];
        let h = H0Spec::custom(n, &terms).unwrap();
        let f = build_structure_matrix(&h, n).unwrap();
        let hd = h.operator().densify();
        for a in 0..16 {
            for b in 0..16 {
                let ba = PauliOperatorRep::basis(&string_of(a, n), Complex64::new(1.0, 0.0))
                    .unwrap()
                    .densify();
                let bb = PauliOperatorRep::basis(&string_of(b, n), Complex64::new(1.0, 0.0))
                    .unwrap()
                    .densify();
                // F_{αβ} = tr(B_β · (−i)[H0, B_α]) / 2ⁿ
                let c = (&hd * &ba - &ba * &hd).map(|z| z * Complex64::new(0.0, -1.0));
                let oracle = crate::linalg::trace(&(&bb * c)).re / 4.0;
                assert!((f.f[(a, b)] - oracle).abs() < 1e-12);
                assert!((f.f[(a, b)] + f.f[(b, a)]).abs() < 1e-12);
            }
        }
        assert!(f.f.row(0).amax() == 0.0);
    }

    #[test]
    fn unitary_dynamics_has_many_fixed_points() {
        for n in [2, 3] {
            let h = H0Spec::heisenberg(n)
                .unwrap()
                .with_uniform_field(Pauli::X, 0.3)
                .unwrap();
            let gen = build_generator(&h, NoiseKind::Isotropic, 0.0, n).unwrap();
            let report = relaxation_check(&gen).unwrap();
            assert!(report.kernel_dim >= 1 << n);
            assert!(!report.maximally_mixing);
        }
    }

    #[test]
    fn z_noise_without_hamiltonian_keeps_z_strings() {
        let gen = build_generator(&H0Spec::zero(2).unwrap(), NoiseKind::z_only(), 0.3, 2).unwrap();
        let report = relaxation_check(&gen).unwrap();
        assert_eq!(report.kernel_dim, 4);
        assert!(!report.maximally_mixing);
    }

    #[test]
    fn isotropic_noise_mixes() {
        let gen = build_generator(&H0Spec::xx(3).unwrap(), NoiseKind::Isotropic, 0.3, 3).unwrap();
        let report = relaxation_check(&gen).unwrap();
        assert!(report.maximally_mixing);
        // Re λ = −γ⟨v, D v⟩/⟨v, v⟩ ≤ −8γ on traceless vectors
        assert!(report.gap >= 8.0 * 0.3 - 1e-8, "gap {}", report.gap);
    }

    #[test]
    fn generic_hamiltonian_z_noise_mixes_but_xx_does_not() {
        let xx = build_generator(&H0Spec::xx(2).unwrap(), NoiseKind::z_only(), 0.3, 2).unwrap();
        let report = relaxation_check(&xx).unwrap();
        assert!(!report.maximally_mixing);
        // Σσ^z and σ^zσ^z are conserved alongside the identity
        assert!(report.kernel_dim > 1);

        let h = H0Spec::xx(2)
            .unwrap()
            .with_uniform_field(Pauli::X, 0.8)
            .unwrap();
        let gen = build_generator(&h, NoiseKind::z_only(), 0.3, 2).unwrap();
        let report = relaxation_check(&gen).unwrap();
        assert!(report.maximally_mixing);
        assert!(report.gap > 0.0);
        let rank = rank_condition_report(&build_structure_matrix(&h, 2).unwrap());
        assert_eq!(rank.rows, 4);
    }
}
