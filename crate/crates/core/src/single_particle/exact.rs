// SPDX-License-Identifier: Apache-2.0

//! Closed forms for the averaged amplitude `c_{j,k}(t) = e^{-γt}(e^{-iRt})_{j,k}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Boundary, ChainSpec, HoppingMatrix, NoiseMode};
use crate::special::bessel_j_orders;

/// `(-i)^m`.
fn minus_i_pow(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Averaged correlation matrix at time `t`.
///
/// Open chains and rings use the closed-form spectrum of `R`. For the
/// infinite-analytic boundary the result covers a window of `chain.n`
/// consecutive sites, `c_{j,k} = e^{-γt} (-i)^{|j-k|} J_{|j-k|}(2t)`.
pub fn exact_averaged_correlation(chain: &ChainSpec, t: f64) -> Result<DMatrix<Complex64>> {
    chain.validate()?;
    if chain.noise_mode == NoiseMode::Static {
        return Err(Error::Unsupported(
            "static disorder has no closed-form averaged correlation".into(),
        ));
    }
    if !t.is_finite() {
        return Err(Error::arg("t", "must be finite"));
    }
    let damping = (-chain.effective_gamma() * t).exp();
    if chain.boundary == Boundary::InfiniteAnalytic {
        return Ok(infinite_chain_correlation(
            chain.effective_gamma(),
            t,
            chain.n,
        ));
    }
    let r = HoppingMatrix::build(chain)?;
    Ok(r.propagator(t).map(|z| z * damping))
}

/// Averaged correlation of the infinite chain on a window of `width` sites.
pub fn infinite_chain_correlation(gamma: f64, t: f64, width: usize) -> DMatrix<Complex64> {
    let damping = (-gamma * t).exp();
    let arg = 2.0 * t;
    let bessel = bessel_j_orders(width, arg.abs());
    // J_m(-x) = (-1)^m J_m(x) takes care of negative times
    let sign = |m: usize| if arg < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
    DMatrix::from_fn(width, width, |j, k| {
        let m = j.abs_diff(k);
        minus_i_pow(m) * (bessel[m] * sign(m) * damping)
    })
}

/// Independent evaluation of `e^{-iRt}` by Padé scaling-and-squaring.
pub fn matrix_exponential_check(r: &HoppingMatrix, t: f64) -> DMatrix<Complex64> {
    let generator = r.matrix().map(|x| Complex64::new(0.0, -x * t));
    generator.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn identity_at_time_zero() {
        for gamma in [0.0, 0.3] {
            let chain = ChainSpec::open(9, gamma).unwrap();
            let c = exact_averaged_correlation(&chain, 0.0).unwrap();
            assert!(max_abs_diff(&c, &DMatrix::identity(9, 9)) < 1e-13);
        }
    }

    #[test]
    fn damping_factorises() {
        let noisy = ChainSpec::open(15, 0.37).unwrap();
        let clean = ChainSpec::open(15, 0.0).unwrap();
        let t = 3.3;
        let a = exact_averaged_correlation(&noisy, t).unwrap();
        let b = exact_averaged_correlation(&clean, t).unwrap();
        let f = (-0.37 * t).exp();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y * f).norm() < 1e-12);
        }
    }

    #[test]
    fn infinite_chain_first_bessel_zero() {
        let c = infinite_chain_correlation(0.0, 2.404826 / 2.0, 5);
        assert!(c[(2, 2)].norm() < 1e-6);
    }

    #[test]
    fn large_open_chain_interior_matches_bessel() {
        let chain = ChainSpec::open(121, 0.0).unwrap();
        let t = 5.0;
        let c = exact_averaged_correlation(&chain, t).unwrap();
        let inf = infinite_chain_correlation(0.0, t, 121);
        for j in 40..80 {
            assert!((c[(j, 60)] - inf[(j, 60)]).norm() < 1e-10);
        }
    }

    #[test]
    fn two_site_exponential() {
        let r = HoppingMatrix::build(&ChainSpec::open(2, 0.0).unwrap()).unwrap();
        let t = 0.77_f64;
        let e = matrix_exponential_check(&r, t);
        let cos = Complex64::new(t.cos(), 0.0);
        let msin = Complex64::new(0.0, -t.sin());
        let expected = DMatrix::from_row_slice(2, 2, &[cos, msin, msin, cos]);
        assert!(max_abs_diff(&e, &expected) < 1e-14);
    }

    #[test]
    fn exponential_paths_agree_and_are_unitary() {
        let chain = ChainSpec::open(50, 0.0).unwrap();
        let r = HoppingMatrix::build(&chain).unwrap();
        let t = 25.0;
        let check = matrix_exponential_check(&r, t);
        let eig = r.propagator(t);
        assert!(max_abs_diff(&check, &eig) < 1e-9);
        let uu = &check * check.adjoint();
        assert!(max_abs_diff(&uu, &DMatrix::identity(50, 50)) < 1e-10);
        assert!(
            max_abs_diff(
                &matrix_exponential_check(&r, 0.0),
                &DMatrix::identity(50, 50)
            ) < 1e-15
        );

        let ring = HoppingMatrix::build(
            &ChainSpec::new(11, Boundary::Ring, 0.0, NoiseMode::None).unwrap(),
        )
        .unwrap();
        assert!(max_abs_diff(&matrix_exponential_check(&ring, 4.0), &ring.propagator(4.0)) < 1e-9);
    }

    #[test]
    fn static_mode_rejected() {
        let chain = ChainSpec::new(5, Boundary::Open, 0.1, NoiseMode::Static).unwrap();
        assert!(exact_averaged_correlation(&chain, 1.0).is_err());
    }
}
