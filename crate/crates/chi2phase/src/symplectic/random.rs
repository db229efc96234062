//! Deterministic generators for random symplectic matrices, used by the
//! property suites and the CLI self test.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// SplitMix64 PRNG; tiny, seedable and reproducible across platforms.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = (1.0 - self.uniform()).max(f64::MIN_POSITIVE);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Random orthogonal symplectic matrix: the phase-space image of a Haar-ish
/// random n x n unitary U, O = [[Re U, -Im U], [Im U, Re U]].
pub fn random_orthogonal_symplectic(n: usize, rng: &mut SplitMix64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.normal(), rng.normal()));
    let qr = g.qr();
    let u = qr.q();
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = u[(i, j)];
            o[(i, j)] = z.re;
            o[(i, n + j)] = -z.im;
            o[(n + i, j)] = z.im;
            o[(n + i, n + j)] = z.re;
        }
    }
    o
}

/// Random symplectic matrix O1 Z O2 with per-mode squeezing drawn uniformly
/// from [-max_squeeze, max_squeeze].
pub fn random_symplectic(n: usize, max_squeeze: f64, rng: &mut SplitMix64) -> DMatrix<f64> {
    let o1 = random_orthogonal_symplectic(n, rng);
    let o2 = random_orthogonal_symplectic(n, rng);
    let mut z = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let r = (2.0 * rng.uniform() - 1.0) * max_squeeze;
        z[(i, i)] = r.exp();
        z[(n + i, n + i)] = (-r).exp();
    }
    o1 * z * o2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::is_symplectic;

    #[test]
    fn generated_matrices_are_symplectic() {
        let mut rng = SplitMix64::new(1);
        for n in 1..=4 {
            let o = random_orthogonal_symplectic(n, &mut rng);
            assert!(is_symplectic(&o, 1e-10).unwrap());
            assert!((o.transpose() * &o - DMatrix::identity(2 * n, 2 * n)).amax() < 1e-12);
            let s = random_symplectic(n, 1.5, &mut rng);
            assert!(is_symplectic(&s, 1e-9).unwrap());
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut a = SplitMix64::new(99);
        let mut b = SplitMix64::new(99);
        let ma = random_symplectic(2, 1.0, &mut a);
        let mb = random_symplectic(2, 1.0, &mut b);
        assert_eq!(ma, mb);
    }
}
