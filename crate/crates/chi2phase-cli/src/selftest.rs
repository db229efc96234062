//! Built-in property suite: a fast subset of the release checks, printing
//! one PASS/FAIL line per property.

use nalgebra::DMatrix;

use chi2phase::phasespace::{
    fock_output_wigner, fock_wigner, wigner_convolution_oracle, GaussianState, WignerWindow,
};
use chi2phase::scenario::{point_maps, Setup, SetupParams};
use chi2phase::symplectic::random::{random_symplectic, SplitMix64};
use chi2phase::symplectic::{gbmd, is_symplectic, von_neumann_entropy};
use chi2phase::units::thz_to_angular;

struct Outcome {
    passed: usize,
    failed: usize,
}

impl Outcome {
    fn record(&mut self, name: &str, pass: bool, detail: String) {
        println!("{}: {name} ({detail})", if pass { "PASS" } else { "FAIL" });
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

pub fn run() -> bool {
    let mut out = Outcome {
        passed: 0,
        failed: 0,
    };

    // GBMD reconstruction on random rectangular maps.
    let mut rng = SplitMix64::new(0x5E1F);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 200 {
        let m = 1 + (rng.next_u64() % 2) as usize;
        let n = 1 + (rng.next_u64() % 6) as usize;
        let a = DMatrix::from_fn(2 * m, 2 * n, |_, _| rng.normal());
        match gbmd(&a) {
            Ok(g) => {
                worst = worst
                    .max(g.reconstruction_error(&a))
                    .max(if is_symplectic(&g.s, 1e-10).unwrap() {
                        0.0
                    } else {
                        1.0
                    });
                count += 1;
            }
            Err(_) => continue,
        }
    }
    out.record(
        "gbmd reconstruction (200 random maps)",
        worst < 1e-10,
        format!("worst error {worst:.2e}"),
    );

    // Entropy anchors.
    let vac = von_neumann_entropy(&DMatrix::identity(4, 4)).unwrap();
    let r = 1.0f64;
    let reduced = von_neumann_entropy(&((2.0 * r).cosh() * DMatrix::identity(2, 2))).unwrap();
    let ch2 = r.cosh() * r.cosh();
    let sh2 = r.sinh() * r.sinh();
    let closed = ch2 * ch2.ln() - sh2 * sh2.ln();
    out.record(
        "gaussian entropy anchors",
        vac < 1e-12 && (reduced - closed).abs() < 1e-6,
        format!("vacuum {vac:.1e}, reduced {reduced:.6} vs {closed:.6}"),
    );

    // First-order unitarity and commutation on a reduced grid.
    let params = SetupParams {
        n_points: 512,
        ..SetupParams::default()
    };
    match Setup::compile(params, 1) {
        Ok(setup) => {
            let mut worst_unit = 0.0f64;
            let mut worst_comm = 0.0f64;
            for f in [180.0, 200.0, 225.0] {
                let ctx = setup.output_context(thz_to_angular(f)).unwrap();
                for alpha in [4e5, 1.6e6] {
                    let map = ctx.map_at(alpha).unwrap();
                    worst_unit =
                        worst_unit.max((map.zeta * map.zeta - map.xi * map.xi - 1.0).abs());
                    let pm = point_maps(&setup, &ctx, alpha).unwrap();
                    worst_comm = worst_comm.max(pm.map.commutation_residual().amax());
                }
            }
            out.record(
                "zeta^2 - xi^2 = 1 (6 points)",
                worst_unit < 1e-6,
                format!("worst {worst_unit:.2e}"),
            );
            out.record(
                "commutation preservation (6 points)",
                worst_comm < 1e-8,
                format!("worst {worst_comm:.2e}"),
            );
        }
        Err(e) => out.record("setup compilation", false, e.to_string()),
    }

    // Closed-form Fock output against the convolution oracle.
    let mut rng = SplitMix64::new(0xFACE);
    let mut worst_dev = 0.0f64;
    for _ in 0..2 {
        let s = random_symplectic(3, 0.5, &mut rng);
        let rows = [0usize, 3];
        let a = DMatrix::from_fn(2, 2, |r, c| s[(rows[r], [0usize, 3][c])]);
        let b = DMatrix::from_fn(2, 4, |r, c| s[(rows[r], [1usize, 2, 4, 5][c])]);
        let cov_b = &b * b.transpose();
        let spread = &cov_b + &a * a.transpose() * 5.0;
        let half = 6.0 * spread.diagonal().amax().sqrt().max(1.0);
        let window = WignerWindow {
            half_x: half,
            half_p: half,
            nx: 48,
            np: 48,
        };
        for n in 1..=2usize {
            let closed = fock_output_wigner(n, &a, &cov_b, &window).unwrap();
            let w_in = fock_wigner(n, &WignerWindow::square(7.0, 97));
            let oracle = wigner_convolution_oracle(&w_in, &a, &cov_b, &window).unwrap();
            worst_dev = worst_dev.max((closed.values.clone() - &oracle.values).amax());
        }
    }
    out.record(
        "fock closed form vs convolution oracle",
        worst_dev < 1e-6,
        format!("worst deviation {worst_dev:.2e}"),
    );

    // Physicality of propagated vacuum.
    let vac_state = GaussianState::vacuum(1);
    let physical = vac_state.is_physical(1e-9).unwrap();
    out.record("vacuum state physicality", physical, "nu = 1".to_string());

    println!("selftest: {} passed, {} failed", out.passed, out.failed);
    out.failed == 0
}
