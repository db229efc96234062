//! Assembly of the quadrature input-output map (A, B), Gaussian-state
//! propagation through it, closed-form Fock-state output Wigner functions,
//! and a brute-force convolution oracle for cross-validation.
//!
//! Conventions: vacuum covariance = identity, Wigner functions normalized
//! to 1, phase-space ordering (x_1..x_k, p_1..p_k).

use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::chi2::FirstOrderMap;
use crate::special::laguerre;
use crate::spectral::{gram_schmidt, inner_product, ModeFunction};
use crate::symplectic::{symplectic_eigenvalues, symplectic_form, GbmdResult, GbmdSide};
use crate::{Error, Result};

/// A channel whose Gram-Schmidt seed vanished (no squeezing or
/// beam-splitting contribution for that output mode).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DroppedChannel {
    /// xi ~ 0: no squeezing partner for output mode `.0`.
    Squeezing(usize),
    /// zeta ~ 0: no beam-splitting partner for output mode `.0`.
    BeamSplitting(usize),
}

/// The real quadrature input-output map Gamma_out = A Gamma_in + B
/// Gamma_perp together with its complex building blocks.
#[derive(Debug, Clone)]
pub struct QuadratureMap {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    f_in: DMatrix<Complex64>,
    g_in: DMatrix<Complex64>,
    f_perp: DMatrix<Complex64>,
    g_perp: DMatrix<Complex64>,
    h_basis: Vec<ModeFunction>,
    dropped: Vec<DroppedChannel>,
}

impl QuadratureMap {
    /// Input -> output quadrature matrix, 2M x 2N.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Vacuum -> output quadrature matrix, 2M x 4M.
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn f_in(&self) -> &DMatrix<Complex64> {
        &self.f_in
    }

    pub fn g_in(&self) -> &DMatrix<Complex64> {
        &self.g_in
    }

    pub fn f_perp(&self) -> &DMatrix<Complex64> {
        &self.f_perp
    }

    pub fn g_perp(&self) -> &DMatrix<Complex64> {
        &self.g_perp
    }

    /// Orthogonal (initially vacuum) modes produced by Gram-Schmidt; zero
    /// modes stand in for dropped channels.
    pub fn h_basis(&self) -> &[ModeFunction] {
        &self.h_basis
    }

    pub fn dropped(&self) -> &[DroppedChannel] {
        &self.dropped
    }

    pub fn n_outputs(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn n_inputs(&self) -> usize {
        self.a.ncols() / 2
    }

    /// cov_B = B B^T, the covariance contribution of the vacuum modes.
    pub fn cov_b(&self) -> DMatrix<f64> {
        &self.b * self.b.transpose()
    }

    /// Residual of the commutation-preservation identity
    /// A Omega_N A^T + B Omega_2M B^T - Omega_M.
    pub fn commutation_residual(&self) -> DMatrix<f64> {
        let m = self.n_outputs();
        let n = self.n_inputs();
        &self.a * symplectic_form(n) * self.a.transpose()
            + &self.b * symplectic_form(2 * m) * self.b.transpose()
            - symplectic_form(m)
    }
}

/// Bogoliubov kernels feeding the quadrature-map assembly.
///
/// The delta part of the beam-splitting kernel is kept structural: it
/// contributes `delta * v_j` to the effective modes analytically and is
/// never discretized on the grid.
pub enum BogoliubovKernels<'a> {
    /// First-order-unitary reduction (single output mode).
    FirstOrder(&'a FirstOrderMap),
    /// Raw smooth kernels on the mode grid: F(omega, Omega) =
    /// delta_coeff d(omega - Omega) + f_smooth, G(omega, Omega) = g.
    /// Matrix rows index omega, columns index Omega.
    Raw {
        delta_coeff: f64,
        f_smooth: &'a DMatrix<Complex64>,
        g: &'a DMatrix<Complex64>,
    },
}

fn check_orthonormal(modes: &[ModeFunction], what: &str) -> Result<()> {
    for (i, u) in modes.iter().enumerate() {
        for (j, v) in modes.iter().enumerate() {
            let g = inner_product(u, v)?;
            let target = if i == j { 1.0 } else { 0.0 };
            if (g - Complex64::new(target, 0.0)).norm() > 1e-6 {
                return Err(Error::Contract(format!(
                    "{what} modes are not orthonormal: <{i}|{j}> = {g}"
                )));
            }
        }
    }
    Ok(())
}

/// Assemble the quadrature map for the given input and output mode sets.
///
/// Builds the effective modes f_j, g_j per output, orthogonalizes them
/// against the inputs (Gram-Schmidt basis {u, h}), collects the complex
/// matrix elements and maps them to the real quadrature matrices A and B.
/// Effective modes with norm below 1e-14 are dropped to zero columns and
/// recorded.
pub fn assemble_quadrature_map(
    kernels: &BogoliubovKernels,
    inputs: &[ModeFunction],
    outputs: &[ModeFunction],
) -> Result<QuadratureMap> {
    if inputs.is_empty() || outputs.is_empty() {
        return Err(Error::Parameter(
            "need at least one input and one output mode".to_string(),
        ));
    }
    check_orthonormal(inputs, "input")?;
    check_orthonormal(outputs, "output")?;
    let n = inputs.len();
    let m = outputs.len();
    let grid = inputs[0].grid().clone();

    if let BogoliubovKernels::FirstOrder(_) = kernels {
        if m != 1 {
            return Err(Error::Contract(
                "the first-order path describes a single output mode".to_string(),
            ));
        }
        for u in inputs {
            let overlap = inner_product(u, &outputs[0])?;
            if overlap.norm() > 2e-2 {
                return Err(Error::Contract(format!(
                    "first-order path requires spectrally disjoint input and output modes \
                     (overlap {overlap})"
                )));
            }
        }
    }

    // Effective (unnormalized) modes per output.
    let mut f_modes: Vec<ModeFunction> = Vec::with_capacity(m);
    let mut g_modes: Vec<ModeFunction> = Vec::with_capacity(m);
    for (j, v) in outputs.iter().enumerate() {
        match kernels {
            BogoliubovKernels::FirstOrder(map) => {
                let ratio = map.nu_over_theta();
                let mut f = v.clone();
                f.scale(Complex64::new(map.mu, 0.0));
                if !map.is_identity() {
                    f.axpy(Complex64::new(ratio, 0.0), &map.f_k)?;
                }
                let mut g = map.f_j.clone();
                g.scale(Complex64::new(ratio, 0.0));
                f_modes.push(f);
                g_modes.push(g);
            }
            BogoliubovKernels::Raw {
                delta_coeff,
                f_smooth,
                g,
            } => {
                let npts = grid.len();
                if f_smooth.nrows() != npts
                    || f_smooth.ncols() != npts
                    || g.nrows() != npts
                    || g.ncols() != npts
                {
                    return Err(Error::Shape(
                        "raw kernels must match the mode grid".to_string(),
                    ));
                }
                let weights = grid.weights();
                let vamp = v.amplitudes();
                let mut famp = vec![Complex64::new(0.0, 0.0); npts];
                let mut gamp = vec![Complex64::new(0.0, 0.0); npts];
                for l in 0..npts {
                    let mut accf = Complex64::new(0.0, 0.0);
                    let mut accg = Complex64::new(0.0, 0.0);
                    for i in 0..npts {
                        accf += f_smooth[(i, l)].conj() * vamp[i] * weights[i];
                        accg += g[(i, l)].conj() * vamp[i].conj() * weights[i];
                    }
                    famp[l] = *delta_coeff * vamp[l] + accf;
                    gamp[l] = accg;
                }
                f_modes.push(ModeFunction::from_amplitudes(grid.clone(), famp)?);
                g_modes.push(ModeFunction::from_amplitudes(grid.clone(), gamp)?);
                let _ = j;
            }
        }
    }

    // Drop vanished channels and orthogonalize the rest: seeds are
    // {u_1..u_N, g_1..g_M, f_1..f_M} with the inputs preserved.
    let mut dropped = Vec::new();
    let mut seeds: Vec<ModeFunction> = inputs.to_vec();
    // slot_of[i]: position of h_i in the Gram-Schmidt output, if kept.
    let mut slot_of: Vec<Option<usize>> = vec![None; 2 * m];
    for (j, gm) in g_modes.iter().enumerate() {
        if gm.norm() < 1e-14 {
            dropped.push(DroppedChannel::Squeezing(j));
        } else {
            slot_of[j] = Some(seeds.len());
            seeds.push(gm.clone());
        }
    }
    for (j, fm) in f_modes.iter().enumerate() {
        if fm.norm() < 1e-14 {
            dropped.push(DroppedChannel::BeamSplitting(j));
        } else {
            slot_of[m + j] = Some(seeds.len());
            seeds.push(fm.clone());
        }
    }
    let gs = gram_schmidt(&seeds, n)?;

    let mut h_basis: Vec<ModeFunction> = Vec::with_capacity(2 * m);
    for slot in &slot_of {
        match slot {
            Some(s) => h_basis.push(gs.basis[*s].clone()),
            None => h_basis.push(ModeFunction::zero(grid.clone())),
        }
    }

    // Complex matrix elements. coeffs[(seed, basis)] = <basis|seed>.
    let zero = Complex64::new(0.0, 0.0);
    let mut f_in = DMatrix::from_element(m, n, zero);
    let mut g_in = DMatrix::from_element(m, n, zero);
    let mut f_perp = DMatrix::from_element(m, 2 * m, zero);
    let mut g_perp = DMatrix::from_element(m, 2 * m, zero);
    for j in 0..m {
        if let Some(row) = slot_of[m + j] {
            for i in 0..n {
                f_in[(j, i)] = gs.coeffs[(row, i)].conj();
            }
            for h in 0..2 * m {
                if let Some(col) = slot_of[h] {
                    f_perp[(j, h)] = gs.coeffs[(row, col)].conj();
                }
            }
        }
        if let Some(row) = slot_of[j] {
            for i in 0..n {
                g_in[(j, i)] = gs.coeffs[(row, i)];
            }
            for h in 0..2 * m {
                if let Some(col) = slot_of[h] {
                    g_perp[(j, h)] = gs.coeffs[(row, col)];
                }
            }
        }
    }

    let a = quadrature_blocks(&f_in, &g_in);
    let b = quadrature_blocks(&f_perp, &g_perp);

    Ok(QuadratureMap {
        a,
        b,
        f_in,
        g_in,
        f_perp,
        g_perp,
        h_basis,
        dropped,
    })
}

/// Map complex annihilation/creation blocks to real quadrature blocks:
/// [[Re(F+G), Im(-F+G)], [Im(F+G), Re(F-G)]].
fn quadrature_blocks(f: &DMatrix<Complex64>, g: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (m, n) = (f.nrows(), f.ncols());
    let mut out = DMatrix::zeros(2 * m, 2 * n);
    for r in 0..m {
        for c in 0..n {
            let fv = f[(r, c)];
            let gv = g[(r, c)];
            out[(r, c)] = fv.re + gv.re;
            out[(r, n + c)] = -fv.im + gv.im;
            out[(m + r, c)] = fv.im + gv.im;
            out[(m + r, n + c)] = fv.re - gv.re;
        }
    }
    out
}

/// Gaussian state as mean vector and covariance matrix (vacuum = identity).
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn vacuum(modes: usize) -> Self {
        Self {
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    /// Product of two counter-squeezed modes,
    /// cov = diag(e^-2r, e^2r, e^2r, e^-2r) in (x1, x2, p1, p2) ordering.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let d = DVector::from_vec(vec![
            (-2.0 * r).exp(),
            (2.0 * r).exp(),
            (2.0 * r).exp(),
            (-2.0 * r).exp(),
        ]);
        Self {
            mean: DVector::zeros(4),
            cov: DMatrix::from_diagonal(&d),
        }
    }

    pub fn modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    /// Marginal state of the selected modes.
    pub fn reduced(&self, keep: &[usize]) -> Result<GaussianState> {
        let n = self.modes();
        for &k in keep {
            if k >= n {
                return Err(Error::Parameter(format!("mode index {k} out of range")));
            }
        }
        let dim = 2 * keep.len();
        let mut cov = DMatrix::zeros(dim, dim);
        let mut mean = DVector::zeros(dim);
        let idx: Vec<usize> = keep
            .iter()
            .map(|&k| k)
            .chain(keep.iter().map(|&k| n + k))
            .collect();
        for (r, &ir) in idx.iter().enumerate() {
            mean[r] = self.mean[ir];
            for (c, &ic) in idx.iter().enumerate() {
                cov[(r, c)] = self.cov[(ir, ic)];
            }
        }
        Ok(GaussianState { mean, cov })
    }

    /// All symplectic eigenvalues at least 1 - tol.
    pub fn is_physical(&self, tol: f64) -> Result<bool> {
        let nus = symplectic_eigenvalues(&self.cov)?;
        Ok(nus.iter().all(|&nu| nu >= 1.0 - tol))
    }
}

/// Output of [`propagate_gaussian`].
#[derive(Debug, Clone)]
pub struct PropagatedGaussian {
    /// Reduced input covariance P S cov_in S^T P^T (equals cov_in when no
    /// reduction applies).
    pub cov_in_s: DMatrix<f64>,
    /// The output state over min(M, N) modes. For an output-mode surplus
    /// this is the conditional (Schur-complement) state of the kept block,
    /// which exposes the convolution structure but may be sub-Heisenberg
    /// when the environment block of cov_B carries correlations.
    pub state: GaussianState,
    /// For an output-mode surplus: the marginal covariance of the kept
    /// block, always physical.
    pub marginal_cov: Option<DMatrix<f64>>,
    /// For an output-mode surplus: the linear response of the kept block's
    /// conditional mean to the environment phase-space point.
    pub mean_response: Option<DMatrix<f64>>,
}

/// Propagate a zero-mean Gaussian state through the map, reducing mode
/// counts with the supplied GBMD of `map.a()`.
pub fn propagate_gaussian(
    state_in: &GaussianState,
    map: &QuadratureMap,
    gbmd: &GbmdResult,
) -> Result<PropagatedGaussian> {
    let n = map.n_inputs();
    if state_in.modes() != n {
        return Err(Error::Shape(format!(
            "input state has {} modes, map expects {n}",
            state_in.modes()
        )));
    }
    let scale = map.a().amax().max(1.0);
    if gbmd.reconstruction_error(map.a()) > 1e-8 * scale {
        return Err(Error::Contract(
            "the GBMD does not factor this map's A matrix".to_string(),
        ));
    }
    if !state_in.is_physical(1e-6)? {
        return Err(Error::Contract("input state is unphysical".to_string()));
    }
    let cov_b = map.cov_b();

    match gbmd.side {
        GbmdSide::Square | GbmdSide::Right => {
            let cov_in_s = if gbmd.side == GbmdSide::Square {
                state_in.cov.clone()
            } else {
                &gbmd.p * &gbmd.s * &state_in.cov * gbmd.s.transpose() * gbmd.p.transpose()
            };
            let cov_out = &cov_b + &gbmd.core * &cov_in_s * gbmd.core.transpose();
            let k = cov_out.nrows();
            Ok(PropagatedGaussian {
                cov_in_s,
                state: GaussianState {
                    mean: DVector::zeros(k),
                    cov: cov_out,
                },
                marginal_cov: None,
                mean_response: None,
            })
        }
        GbmdSide::Left => {
            let m = map.n_outputs();
            // S_L^{-1} = Omega^T S_L^T Omega in closed form.
            let omega = symplectic_form(m);
            let s_inv = omega.transpose() * gbmd.s.transpose() * &omega;
            let c = s_inv.transpose() * &cov_b * &s_inv;
            // Kept block: modes 1..N of the transformed output space.
            let sys: Vec<usize> = (0..n).chain(m..m + n).collect();
            let env: Vec<usize> = (n..m).chain(m + n..2 * m).collect();
            let pick = |rows: &[usize], cols: &[usize]| {
                DMatrix::from_fn(rows.len(), cols.len(), |r, ccol| c[(rows[r], cols[ccol])])
            };
            let c_ss = pick(&sys, &sys);
            let c_se = pick(&sys, &env);
            let c_es = pick(&env, &sys);
            let c_ee = pick(&env, &env);
            let c_ee_inv = c_ee.clone().try_inverse().ok_or_else(|| Error::Degenerate {
                detail: "environment block of cov_B is singular".to_string(),
                null_direction: None,
            })?;
            let schur = &c_ss - &c_se * &c_ee_inv * &c_es;
            let pushed = &gbmd.core * &state_in.cov * gbmd.core.transpose();
            let cov_out = &schur + &pushed;
            Ok(PropagatedGaussian {
                cov_in_s: state_in.cov.clone(),
                state: GaussianState {
                    mean: DVector::zeros(2 * n),
                    cov: cov_out,
                },
                marginal_cov: Some(&c_ss + &pushed),
                mean_response: Some(c_se * c_ee_inv),
            })
        }
    }
}

/// Rescaled output covariance cov_in_s + core^-1 cov_B core^-T.
///
/// No physicality check: the rescaled state may legitimately be unphysical.
pub fn rescaled_output_cov(
    cov_in_s: &DMatrix<f64>,
    cov_b: &DMatrix<f64>,
    gbmd: &GbmdResult,
) -> Result<DMatrix<f64>> {
    let core_inv = gbmd.core_inverse()?;
    Ok(cov_in_s + &core_inv * cov_b * core_inv.transpose())
}

/// Rectangular sampling window in single-mode phase space.
#[derive(Debug, Clone, Copy)]
pub struct WignerWindow {
    pub half_x: f64,
    pub half_p: f64,
    pub nx: usize,
    pub np: usize,
}

impl WignerWindow {
    pub fn square(half: f64, n: usize) -> Self {
        Self {
            half_x: half,
            half_p: half,
            nx: n,
            np: n,
        }
    }

    fn axes(&self) -> (Vec<f64>, Vec<f64>, f64) {
        let xs: Vec<f64> = (0..self.nx)
            .map(|i| -self.half_x + 2.0 * self.half_x * i as f64 / (self.nx - 1) as f64)
            .collect();
        let ps: Vec<f64> = (0..self.np)
            .map(|i| -self.half_p + 2.0 * self.half_p * i as f64 / (self.np - 1) as f64)
            .collect();
        let cell = (xs[1] - xs[0]) * (ps[1] - ps[0]);
        (xs, ps, cell)
    }
}

/// Sampled single-mode Wigner function.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// values[(ix, ip)] = W(x_axis[ix], p_axis[ip]).
    pub values: DMatrix<f64>,
    pub cell_area: f64,
}

impl WignerGrid {
    pub fn from_fn(window: &WignerWindow, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let (xs, ps, cell) = window.axes();
        let rows: Vec<Vec<f64>> = xs
            .par_iter()
            .map(|&x| ps.iter().map(|&p| f(x, p)).collect())
            .collect();
        let values = DMatrix::from_fn(xs.len(), ps.len(), |i, j| rows[i][j]);
        Self {
            x_axis: xs,
            p_axis: ps,
            values,
            cell_area: cell,
        }
    }

    /// Quadrature of the sampled field.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.cell_area
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest |W| on the boundary ring.
    pub fn edge_mass(&self) -> f64 {
        let (nx, np) = (self.x_axis.len(), self.p_axis.len());
        let mut worst: f64 = 0.0;
        for i in 0..nx {
            worst = worst.max(self.values[(i, 0)].abs());
            worst = worst.max(self.values[(i, np - 1)].abs());
        }
        for j in 0..np {
            worst = worst.max(self.values[(0, j)].abs());
            worst = worst.max(self.values[(nx - 1, j)].abs());
        }
        worst
    }

    /// Bilinear interpolation, zero outside the window.
    pub fn interpolate(&self, x: f64, p: f64) -> f64 {
        let (nx, np) = (self.x_axis.len(), self.p_axis.len());
        let dx = self.x_axis[1] - self.x_axis[0];
        let dp = self.p_axis[1] - self.p_axis[0];
        let fx = (x - self.x_axis[0]) / dx;
        let fp = (p - self.p_axis[0]) / dp;
        if fx < 0.0 || fp < 0.0 || fx > (nx - 1) as f64 || fp > (np - 1) as f64 {
            return 0.0;
        }
        let ix = (fx.floor() as usize).min(nx - 2);
        let ip = (fp.floor() as usize).min(np - 2);
        let tx = fx - ix as f64;
        let tp = fp - ip as f64;
        let v00 = self.values[(ix, ip)];
        let v10 = self.values[(ix + 1, ip)];
        let v01 = self.values[(ix, ip + 1)];
        let v11 = self.values[(ix + 1, ip + 1)];
        v00 * (1.0 - tx) * (1.0 - tp)
            + v10 * tx * (1.0 - tp)
            + v01 * (1.0 - tx) * tp
            + v11 * tx * tp
    }

    /// CSV dump with columns x, p, value.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,p,value")?;
        for (i, &x) in self.x_axis.iter().enumerate() {
            for (j, &p) in self.p_axis.iter().enumerate() {
                writeln!(w, "{:e},{:e},{:e}", x, p, self.values[(i, j)])?;
            }
        }
        Ok(())
    }

    /// Compact binary layout: 16-byte header (nx, np as little-endian u64)
    /// followed by row-major little-endian f64 values.
    pub fn write_binary<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let nx = self.x_axis.len() as u64;
        let np = self.p_axis.len() as u64;
        w.write_all(&nx.to_le_bytes())?;
        w.write_all(&np.to_le_bytes())?;
        for i in 0..self.x_axis.len() {
            for j in 0..self.p_axis.len() {
                w.write_all(&self.values[(i, j)].to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Read the binary layout written by [`WignerGrid::write_binary`].
    /// Axes are not stored in the payload and are left empty.
    pub fn read_binary_values<R: std::io::Read>(mut r: R) -> Result<DMatrix<f64>> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        let nx = u64::from_le_bytes(header[0..8].try_into().unwrap()) as usize;
        let np = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let mut buf = vec![0u8; nx * np * 8];
        r.read_exact(&mut buf)?;
        let mut values = DMatrix::zeros(nx, np);
        for i in 0..nx {
            for j in 0..np {
                let off = (i * np + j) * 8;
                values[(i, j)] = f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
            }
        }
        Ok(values)
    }
}

/// Sample a single-mode Gaussian Wigner function
/// W(g) = exp(-(g-m)^T cov^-1 (g-m)) / (pi sqrt(det cov)).
pub fn gaussian_wigner_eval(state: &GaussianState, window: &WignerWindow) -> Result<WignerGrid> {
    if state.modes() != 1 {
        return Err(Error::Shape(
            "gaussian_wigner_eval samples single-mode states; reduce first".to_string(),
        ));
    }
    let det = state.cov[(0, 0)] * state.cov[(1, 1)] - state.cov[(0, 1)] * state.cov[(1, 0)];
    if det <= 0.0 || state.cov[(0, 0)] <= 0.0 {
        return Err(Error::Contract(
            "covariance matrix is not positive definite".to_string(),
        ));
    }
    let inv = [
        state.cov[(1, 1)] / det,
        -state.cov[(0, 1)] / det,
        -state.cov[(1, 0)] / det,
        state.cov[(0, 0)] / det,
    ];
    let norm = 1.0 / (std::f64::consts::PI * det.sqrt());
    let (mx, mp) = (state.mean[0], state.mean[1]);
    Ok(WignerGrid::from_fn(window, move |x, p| {
        let dx = x - mx;
        let dp = p - mp;
        let q = inv[0] * dx * dx + (inv[1] + inv[2]) * dx * dp + inv[3] * dp * dp;
        norm * (-q).exp()
    }))
}

/// Wigner function of the n-photon Fock state,
/// W_n(g) = (-1)^n / pi L_n(2 |g|^2) exp(-|g|^2).
pub fn fock_wigner(n: usize, window: &WignerWindow) -> WignerGrid {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    WignerGrid::from_fn(window, move |x, p| {
        let r2 = x * x + p * p;
        sign / std::f64::consts::PI * laguerre(n, 0.0, 2.0 * r2) * (-r2).exp()
    })
}

/// Smoothing singular values of A^-1 cov_B A^-T together with the
/// eigenbasis, labeled so that sigma_x belongs to the eigenvector closer to
/// the x axis.
pub struct SmoothingDecomposition {
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub e_x: Vector2<f64>,
    pub e_p: Vector2<f64>,
    pub a_inv: nalgebra::Matrix2<f64>,
    pub det_a: f64,
}

/// Decompose the single-mode map into the smoothing geometry of the Fock
/// closed form.
pub fn smoothing_decomposition(
    a: &DMatrix<f64>,
    cov_b: &DMatrix<f64>,
) -> Result<SmoothingDecomposition> {
    if a.nrows() != 2 || a.ncols() != 2 {
        return Err(Error::Shape(
            "smoothing decomposition applies to single-mode maps".to_string(),
        ));
    }
    let det_a = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    if det_a.abs() < 1e-12 * a.amax().powi(2).max(1e-300) {
        return Err(Error::SingularCore {
            sigma_min: det_a.abs(),
        });
    }
    let a_inv = nalgebra::Matrix2::new(
        a[(1, 1)] / det_a,
        -a[(0, 1)] / det_a,
        -a[(1, 0)] / det_a,
        a[(0, 0)] / det_a,
    );
    let cb = nalgebra::Matrix2::new(
        cov_b[(0, 0)],
        cov_b[(0, 1)],
        cov_b[(1, 0)],
        cov_b[(1, 1)],
    );
    let c = a_inv * cb * a_inv.transpose();
    let sym = 0.5 * (c + c.transpose());
    let eig = sym.symmetric_eigen();
    let (v0, v1) = (eig.eigenvectors.column(0), eig.eigenvectors.column(1));
    let (sx, sp, ex, ep) = if v0[0].abs() >= v1[0].abs() {
        (
            eig.eigenvalues[0],
            eig.eigenvalues[1],
            Vector2::new(v0[0], v0[1]),
            Vector2::new(v1[0], v1[1]),
        )
    } else {
        (
            eig.eigenvalues[1],
            eig.eigenvalues[0],
            Vector2::new(v1[0], v1[1]),
            Vector2::new(v0[0], v0[1]),
        )
    };
    Ok(SmoothingDecomposition {
        sigma_x: sx,
        sigma_p: sp,
        e_x: ex,
        e_p: ep,
        a_inv,
        det_a,
    })
}

/// One factor of the Fock closed form: ((s-1)/(s+1))^m L_m^(-1/2)(-2w^2 /
/// (s^2-1)), with the analytic s -> 1 limit (w^2/2)^m / m!.
fn fock_factor(m: usize, sigma: f64, w: f64) -> f64 {
    if (sigma - 1.0).abs() <= 1e-9 {
        let mut term = 1.0;
        for k in 1..=m {
            term *= w * w / 2.0 / k as f64;
        }
        term
    } else {
        let ratio = (sigma - 1.0) / (sigma + 1.0);
        let arg = -2.0 * w * w / (sigma * sigma - 1.0);
        ratio.powi(m as i32) * laguerre(m, -0.5, arg)
    }
}

/// Closed-form output Wigner function for an n-photon input through a
/// single-mode map (A, cov_B).
pub fn fock_output_wigner(
    n: usize,
    a: &DMatrix<f64>,
    cov_b: &DMatrix<f64>,
    window: &WignerWindow,
) -> Result<WignerGrid> {
    if n > 20 {
        return Err(Error::Parameter(
            "fock_output_wigner supports n <= 20".to_string(),
        ));
    }
    let sd = smoothing_decomposition(a, cov_b)?;
    let pref = 1.0
        / (std::f64::consts::PI
            * sd.det_a.abs()
            * ((sd.sigma_x + 1.0) * (sd.sigma_p + 1.0)).sqrt());
    Ok(WignerGrid::from_fn(window, move |x, p| {
        let u = sd.a_inv * Vector2::new(x, p);
        let y = u.dot(&sd.e_x);
        let z = u.dot(&sd.e_p);
        let envelope =
            (-y * y / (sd.sigma_x + 1.0) - z * z / (sd.sigma_p + 1.0)).exp();
        let mut series = 0.0;
        for m in 0..=n {
            series += fock_factor(m, sd.sigma_x, y) * fock_factor(n - m, sd.sigma_p, z);
        }
        pref * envelope * series
    }))
}

/// Brute-force convolution oracle: W_out(g) = (W_in * G)(core^-1 g) /
/// |det core| by direct 2-D quadrature over the input grid, with the
/// smoothing Gaussian G normalized to unit mass.
///
/// Independent of [`fock_output_wigner`]: it never touches the closed-form
/// series and fixes its normalization by construction.
pub fn wigner_convolution_oracle(
    w_in: &WignerGrid,
    core: &DMatrix<f64>,
    cov_b: &DMatrix<f64>,
    window: &WignerWindow,
) -> Result<WignerGrid> {
    let edge = w_in.edge_mass();
    if edge > 1e-9 {
        return Err(Error::Window { edge_mass: edge });
    }
    let sd = smoothing_decomposition(core, cov_b)?;
    let g_cov = sd.a_inv
        * nalgebra::Matrix2::new(cov_b[(0, 0)], cov_b[(0, 1)], cov_b[(1, 0)], cov_b[(1, 1)])
        * sd.a_inv.transpose();
    let g_cov = 0.5 * (g_cov + g_cov.transpose());
    let det_g = g_cov[(0, 0)] * g_cov[(1, 1)] - g_cov[(0, 1)] * g_cov[(1, 0)];
    let inv_det_core = 1.0 / sd.det_a.abs();

    if det_g.abs() < 1e-24 || g_cov.trace() < 1e-12 {
        // Degenerate smoothing: the Gaussian collapses to a delta and the
        // output is the rescaled input.
        return Ok(WignerGrid::from_fn(window, move |x, p| {
            let u = sd.a_inv * Vector2::new(x, p);
            inv_det_core * w_in.interpolate(u[0], u[1])
        }));
    }
    let g_inv = nalgebra::Matrix2::new(
        g_cov[(1, 1)] / det_g,
        -g_cov[(0, 1)] / det_g,
        -g_cov[(1, 0)] / det_g,
        g_cov[(0, 0)] / det_g,
    );
    let g_norm = 1.0 / (std::f64::consts::PI * det_g.sqrt());
    let cell = w_in.cell_area;

    Ok(WignerGrid::from_fn(window, move |x, p| {
        let u = sd.a_inv * Vector2::new(x, p);
        let mut acc = 0.0;
        for (i, &wx) in w_in.x_axis.iter().enumerate() {
            for (j, &wp) in w_in.p_axis.iter().enumerate() {
                let val = w_in.values[(i, j)];
                if val == 0.0 {
                    continue;
                }
                let dx = u[0] - wx;
                let dp = u[1] - wp;
                let q = g_inv[(0, 0)] * dx * dx
                    + (g_inv[(0, 1)] + g_inv[(1, 0)]) * dx * dp
                    + g_inv[(1, 1)] * dp * dp;
                acc += val * (-q).exp();
            }
        }
        inv_det_core * g_norm * cell * acc
    }))
}
