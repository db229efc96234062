//! Property-based invariants over randomized inputs.

use nalgebra::DMatrix;
use proptest::prelude::*;

use chi2phase::phasespace::{WignerGrid, WignerWindow};
use chi2phase::spectral::{gaussian_mode, gram_schmidt, inner_product, FrequencyGrid};
use chi2phase::symplectic::random::{random_symplectic, SplitMix64};
use chi2phase::symplectic::{gbmd, is_symplectic, von_neumann_entropy};
use chi2phase::units::thz_to_angular;
use chi2phase::Error;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// GBMD round trip: any rectangular map passing the nonsingularity
    /// check reconstructs to 1e-10 with a symplectic factor.
    #[test]
    fn gbmd_round_trip(seed in any::<u64>(), m in 1usize..=2, n in 1usize..=6) {
        let mut rng = SplitMix64::new(seed);
        let a = DMatrix::from_fn(2 * m, 2 * n, |_, _| rng.normal());
        match gbmd(&a) {
            Ok(g) => {
                prop_assert!(g.reconstruction_error(&a) < 1e-10);
                prop_assert!(is_symplectic(&g.s, 1e-10).unwrap());
            }
            Err(Error::Degenerate { .. }) | Err(Error::SingularCore { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    /// Entropy is invariant under symplectic conjugation of the covariance.
    #[test]
    fn entropy_symplectic_invariance(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = SplitMix64::new(seed);
        let s = random_symplectic(n, 0.8, &mut rng);
        let mut thermal = DMatrix::identity(2 * n, 2 * n);
        for i in 0..n {
            let t = 1.0 + 2.0 * rng.uniform();
            thermal[(i, i)] = t;
            thermal[(n + i, n + i)] = t;
        }
        let cov = &s * &thermal * s.transpose();
        let conj = random_symplectic(n, 0.6, &mut rng);
        let cov2 = &conj * &cov * conj.transpose();
        let e1 = von_neumann_entropy(&cov).unwrap();
        let e2 = von_neumann_entropy(&cov2).unwrap();
        prop_assert!((e1 - e2).abs() < 1e-9 * e1.max(1.0));
    }

    /// Gram-Schmidt output reconstructs its seeds through the coefficient
    /// matrix and is orthonormal.
    #[test]
    fn gram_schmidt_reconstructs(c1 in 150.0f64..250.0, gap in 5.0f64..40.0, w in 8.0f64..25.0) {
        let grid = FrequencyGrid::uniform(
            thz_to_angular(0.1),
            thz_to_angular(500.0),
            1024,
        ).unwrap();
        let seeds = [
            gaussian_mode(thz_to_angular(c1), thz_to_angular(w), &grid).unwrap(),
            gaussian_mode(thz_to_angular(c1 + gap), thz_to_angular(w), &grid).unwrap(),
        ];
        let gs = gram_schmidt(&seeds, 0).unwrap();
        for (i, u) in gs.basis.iter().enumerate() {
            for (j, v) in gs.basis.iter().enumerate() {
                let ip = inner_product(u, v).unwrap();
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip.re - target).abs() < 1e-10 && ip.im.abs() < 1e-10);
            }
        }
        for (i, seed) in seeds.iter().enumerate() {
            let mut rebuilt = chi2phase::spectral::ModeFunction::zero(grid.clone());
            for (j, b) in gs.basis.iter().enumerate() {
                rebuilt.axpy(gs.coeffs[(i, j)], b).unwrap();
            }
            for (a, b) in rebuilt.amplitudes().iter().zip(seed.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-10);
            }
        }
    }

    /// The compact binary Wigner layout round-trips bit-exactly.
    #[test]
    fn wigner_binary_round_trip(n in 1usize..=4, half in 3.0f64..9.0) {
        let w = chi2phase::phasespace::fock_wigner(n, &WignerWindow::square(half, 33));
        let mut buf = Vec::new();
        w.write_binary(&mut buf).unwrap();
        let values = WignerGrid::read_binary_values(buf.as_slice()).unwrap();
        prop_assert_eq!(values, w.values);
    }
}
