//! Symplectic linear algebra: the symplectic form, symplecticity tests,
//! Bloch-Messiah factorization of square symplectic matrices, its
//! generalization to rectangular quadrature maps, symplectic eigenvalues
//! and the Gaussian von Neumann entropy.
//!
//! Phase-space ordering is (x_1..x_n, p_1..p_n) throughout, with the form
//! Omega = [[0, I], [-I, 0]].

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub mod random;

/// The 2n x 2n symplectic form [[0, I_n], [-I_n, 0]].
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

/// True iff ||M^T Omega M - Omega||_max < tol.
pub fn is_symplectic(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let dim = even_square_dim(m)?;
    let omega = symplectic_form(dim / 2);
    let residual = m.transpose() * &omega * m - omega;
    Ok(residual.amax() < tol)
}

fn even_square_dim(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(Error::Shape(format!(
            "expected an even dimension, got {}",
            m.nrows()
        )));
    }
    Ok(m.nrows())
}

fn even_dims(m: &DMatrix<f64>) -> Result<(usize, usize)> {
    if m.nrows() % 2 != 0 || m.ncols() % 2 != 0 || m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Shape(format!(
            "expected even nonzero dimensions, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok((m.nrows() / 2, m.ncols() / 2))
}

/// Bloch-Messiah decomposition M = O Z O' of a symplectic matrix.
///
/// O and O' are orthogonal symplectic, Z = diag(z_1..z_n, 1/z_1..1/z_n)
/// with z_i >= 1, ordered by decreasing squeezing.
pub fn bloch_messiah(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let dim = even_square_dim(m)?;
    let n = dim / 2;
    if !is_symplectic(m, 1e-8)? {
        return Err(Error::Contract(
            "bloch_messiah requires a symplectic input".to_string(),
        ));
    }
    let omega = symplectic_form(n);

    // Polar split M = W P with P = (M^T M)^{1/2}; both factors are
    // symplectic and W is orthogonal.
    let mtm = m.transpose() * m;
    let eig = nalgebra::linalg::SymmetricEigen::new(mtm);
    let mut p_inv = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let lam = eig.eigenvalues[i];
        if lam <= 0.0 {
            return Err(Error::Contract(
                "symplectic input has a non-positive M^T M eigenvalue".to_string(),
            ));
        }
        let v = eig.eigenvectors.column(i);
        p_inv += (1.0 / lam.sqrt()) * &v * v.transpose();
    }
    let w = m * &p_inv;

    // Eigenvalues of P come in (z, 1/z) pairs. Keep one eigenvector per
    // mode with z >= 1; the partner column is Omega^T e.
    let ztol = 1e-9;
    let mut e_cols: Vec<DVector<f64>> = Vec::new();
    let mut z_vals: Vec<f64> = Vec::new();
    let mut unit_cluster: Vec<DVector<f64>> = Vec::new();
    for i in 0..dim {
        let z = eig.eigenvalues[i].sqrt();
        if z > 1.0 + ztol {
            e_cols.push(eig.eigenvectors.column(i).into_owned());
            z_vals.push(z);
        } else if z >= 1.0 - ztol {
            unit_cluster.push(eig.eigenvectors.column(i).into_owned());
        }
        // z < 1 - ztol: partner of a collected vector, skipped.
    }
    // Split the z = 1 subspace into canonical pairs {v, Omega^T v}.
    while !unit_cluster.is_empty() {
        let v = unit_cluster.remove(0);
        let fv = omega.transpose() * &v;
        for u in unit_cluster.iter_mut() {
            let a = v.dot(u);
            let b = fv.dot(u);
            *u -= a * &v + b * &fv;
        }
        unit_cluster.retain(|u| u.norm() > 1e-6);
        for u in unit_cluster.iter_mut() {
            let nrm = u.norm();
            *u /= nrm;
        }
        e_cols.push(v);
        z_vals.push(1.0);
    }
    if e_cols.len() != n {
        return Err(Error::Contract(format!(
            "eigenvalue pairing failed: got {} modes, expected {n}",
            e_cols.len()
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z_vals[b].partial_cmp(&z_vals[a]).unwrap());

    let mut o = DMatrix::zeros(dim, dim);
    let mut z = DMatrix::zeros(dim, dim);
    for (slot, &idx) in order.iter().enumerate() {
        let e = &e_cols[idx];
        let f = omega.transpose() * e;
        o.column_mut(slot).copy_from(e);
        o.column_mut(n + slot).copy_from(&f);
        z[(slot, slot)] = z_vals[idx];
        z[(n + slot, n + slot)] = 1.0 / z_vals[idx];
    }
    let o1 = &w * &o;
    let o2 = o.transpose();
    Ok((o1, z, o2))
}

/// Which side of the generalized Bloch-Messiah factorization applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbmdSide {
    /// More output than input modes: A = S^T P^T core.
    Left,
    /// Equal mode counts: A = core.
    Square,
    /// More input than output modes: A = core P S.
    Right,
}

/// Generalized Bloch-Messiah factorization of a rectangular quadrature map.
#[derive(Debug, Clone)]
pub struct GbmdResult {
    pub side: GbmdSide,
    /// Symplectic factor: S_R (2N x 2N) for `Right`, S_L (2M x 2M) for
    /// `Left`, identity for `Square`.
    pub s: DMatrix<f64>,
    /// Selector picking the first mode pairs: 2M x 2N (`Right`) or
    /// 2N x 2M (`Left`); identity for `Square`.
    pub p: DMatrix<f64>,
    /// Invertible square core of dimension 2 min(M, N).
    pub core: DMatrix<f64>,
    /// Product of the per-mode sign fixes absorbed into the core.
    pub sign: f64,
}

impl GbmdResult {
    /// Rebuild the input matrix from the factors.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        match self.side {
            GbmdSide::Square => self.core.clone(),
            GbmdSide::Right => &self.core * &self.p * &self.s,
            GbmdSide::Left => self.s.transpose() * self.p.transpose() * &self.core,
        }
    }

    /// Largest entry of the reconstruction residual against `a`.
    pub fn reconstruction_error(&self, a: &DMatrix<f64>) -> f64 {
        (self.reconstruct() - a).amax()
    }

    /// Inverse of the core, or a singular-core error.
    pub fn core_inverse(&self) -> Result<DMatrix<f64>> {
        let sv = self.core.clone().singular_values();
        if sv.min() <= 1e-12 * sv.max().max(1e-300) {
            return Err(Error::SingularCore { sigma_min: sv.min() });
        }
        self.core
            .clone()
            .try_inverse()
            .ok_or(Error::SingularCore { sigma_min: sv.min() })
    }
}

/// Selector matrix of shape 2m x 2n (m <= n) keeping mode pairs 1..m.
fn selector(m: usize, n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(2 * m, 2 * n);
    for i in 0..m {
        p[(i, i)] = 1.0;
        p[(m + i, n + i)] = 1.0;
    }
    p
}

/// Generalized Bloch-Messiah decomposition of a real 2M x 2N matrix with
/// A Omega A^T nonsingular.
///
/// An output-mode surplus is handled through the decomposition of A^T, so
/// both rectangular orientations share one elimination routine.
pub fn gbmd(a: &DMatrix<f64>) -> Result<GbmdResult> {
    let (m, n) = even_dims(a)?;
    check_a_omega_at(a, m.min(n))?;
    match m.cmp(&n) {
        std::cmp::Ordering::Equal => {
            let core = a.clone();
            check_core_invertible(&core)?;
            Ok(GbmdResult {
                side: GbmdSide::Square,
                s: DMatrix::identity(2 * n, 2 * n),
                p: DMatrix::identity(2 * n, 2 * n),
                core,
                sign: 1.0,
            })
        }
        std::cmp::Ordering::Less => {
            let (core, p, s, sign) = gbmd_reduce(a)?;
            check_core_invertible(&core)?;
            Ok(GbmdResult {
                side: GbmdSide::Right,
                s,
                p,
                core,
                sign,
            })
        }
        std::cmp::Ordering::Greater => {
            let at = a.transpose();
            let (core_t, p, s, sign) = gbmd_reduce(&at)?;
            let core = core_t.transpose();
            check_core_invertible(&core)?;
            Ok(GbmdResult {
                side: GbmdSide::Left,
                s,
                p,
                core,
                sign,
            })
        }
    }
}

fn check_a_omega_at(a: &DMatrix<f64>, k: usize) -> Result<()> {
    let n = a.ncols() / 2;
    let omega = symplectic_form(n);
    let form = a * &omega * a.transpose();
    let svd = form.clone().svd(true, false);
    let mut sv: Vec<(usize, f64)> = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .collect();
    sv.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
    let needed = 2 * k;
    let largest = sv[0].1;
    let (weak_idx, smallest) = sv.get(needed - 1).copied().unwrap_or((0, 0.0));
    if smallest <= 1e-10 * largest.max(1e-300) {
        let u = svd.u.expect("svd with u requested");
        let null_dir: Vec<f64> = u.column(weak_idx).iter().copied().collect();
        return Err(Error::Degenerate {
            detail: format!(
                "A Omega A^T is singular (sigma_min = {smallest:.3e}, sigma_max = {largest:.3e})"
            ),
            null_direction: Some(null_dir),
        });
    }
    Ok(())
}

fn check_core_invertible(core: &DMatrix<f64>) -> Result<()> {
    let sv = core.clone().singular_values();
    let largest = sv.max();
    let smallest = sv.min();
    if smallest <= 1e-12 * largest.max(1e-300) {
        return Err(Error::SingularCore {
            sigma_min: smallest,
        });
    }
    Ok(())
}

/// Right-side reduction A = core P S for a 2m x 2n input with m < n.
///
/// For each output mode pair, a symplectic Householder reflection clears the
/// x tail of the p row, a symplectic Givens rotation clears the in-plane
/// cross term, a second Householder clears the p tail, and a symplectic
/// Gauss transform reduces the x row. Transforms act on modes k..n only, so
/// previously reduced rows keep their single-entry structure. A final
/// single-mode squeezing rebalances the effective quadrature rows. All
/// inverses are accumulated in closed form, making S symplectic by
/// construction; correctness is enforced by the reconstruction invariant.
fn gbmd_reduce(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, f64)> {
    let (m, n) = even_dims(a)?;
    let scale = a.amax().max(1e-300);
    let tol = 1e-13 * scale;

    let mut w = a.clone();
    // v accumulates the right transforms (A v has the selected-column
    // structure); s accumulates their inverses, i.e. the symplectic factor.
    let mut s = DMatrix::<f64>::identity(2 * n, 2 * n);
    let mut v = DMatrix::<f64>::identity(2 * n, 2 * n);
    let mut sign = 1.0;

    for k in 0..m {
        let prow = m + k;
        if let Some(u) = house_vector(&row_segment(&w, prow, k, n, false)) {
            apply_householder(&mut w, &mut s, &mut v, k, n, &u);
        }
        let wx = w[(prow, k)];
        let wp = w[(prow, n + k)];
        let r = wx.hypot(wp);
        if wx.abs() > tol {
            apply_givens(&mut w, &mut s, &mut v, k, n, wp / r, wx / r);
        }
        if let Some(u) = house_vector(&row_segment(&w, prow, k, n, true)) {
            apply_householder(&mut w, &mut s, &mut v, k, n, &u);
        }

        let r11 = w[(k, k)];
        let r23 = w[(prow, n + k)];
        if r11.abs() <= tol || r23.abs() <= tol {
            let null_dir: Vec<f64> = w.row(prow).iter().copied().collect();
            return Err(Error::Degenerate {
                detail: format!(
                    "elimination pivot vanished at mode {k} (r11 = {r11:.3e}, r23 = {r23:.3e})"
                ),
                null_direction: Some(null_dir),
            });
        }
        sign *= (r11 * r23).signum();
        apply_gauss(&mut w, &mut s, &mut v, k, prow, n);
    }

    // The core is W restricted to the selected columns; the rest vanished.
    let p = selector(m, n);
    let mut core = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..2 * m {
        for j in 0..m {
            core[(i, j)] = w[(i, j)];
            core[(i, m + j)] = w[(i, n + j)];
        }
    }

    // Undo the residual squeezing of the effective modes: equalize the
    // Euclidean norms of the x and p rows of S per kept mode and compensate
    // with the inverse squeezer in the core columns.
    for k in 0..m {
        let nx = s.row(k).norm();
        let np = s.row(n + k).norm();
        if nx > 0.0 && np > 0.0 {
            let f = (np / nx).sqrt();
            s.row_mut(k).scale_mut(f);
            s.row_mut(n + k).scale_mut(1.0 / f);
            core.column_mut(k).scale_mut(1.0 / f);
            core.column_mut(m + k).scale_mut(f);
        }
    }

    Ok((core, p, s, sign))
}

fn row_segment(w: &DMatrix<f64>, row: usize, k: usize, n: usize, p_part: bool) -> Vec<f64> {
    let base = if p_part { n } else { 0 };
    (k..n).map(|j| w[(row, base + j)]).collect()
}

/// Householder unit vector u with (I - 2 u u^T) seg = -+||seg|| e_1, or
/// `None` when the tail is already negligible.
fn house_vector(seg: &[f64]) -> Option<Vec<f64>> {
    let norm = seg.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tail = seg[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || tail <= 1e-15 * norm {
        return None;
    }
    let mut u = seg.to_vec();
    u[0] += norm * if seg[0] >= 0.0 { 1.0 } else { -1.0 };
    let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut u {
        *x /= un;
    }
    Some(u)
}

/// Right-multiply W and V by diag(H, H), H = I - 2 u u^T on modes k..n, and
/// left-multiply S by the same (self-inverse) transform.
fn apply_householder(
    w: &mut DMatrix<f64>,
    s: &mut DMatrix<f64>,
    v: &mut DMatrix<f64>,
    k: usize,
    n: usize,
    u: &[f64],
) {
    let cols_x: Vec<usize> = (k..n).collect();
    let cols_p: Vec<usize> = (n + k..2 * n).collect();
    for cols in [&cols_x, &cols_p] {
        reflect_columns(w, cols, u);
        reflect_columns(v, cols, u);
        reflect_rows(s, cols, u);
    }
}

/// cols <- cols (I - 2 u u^T) over the given column set.
fn reflect_columns(mat: &mut DMatrix<f64>, cols: &[usize], u: &[f64]) {
    for r in 0..mat.nrows() {
        let mut dot = 0.0;
        for (i, &c) in cols.iter().enumerate() {
            dot += u[i] * mat[(r, c)];
        }
        let f = 2.0 * dot;
        for (i, &c) in cols.iter().enumerate() {
            mat[(r, c)] -= f * u[i];
        }
    }
}

/// rows <- (I - 2 u u^T) rows over the given row set.
fn reflect_rows(mat: &mut DMatrix<f64>, rows: &[usize], u: &[f64]) {
    for c in 0..mat.ncols() {
        let mut dot = 0.0;
        for (i, &r) in rows.iter().enumerate() {
            dot += u[i] * mat[(r, c)];
        }
        let f = 2.0 * dot;
        for (i, &r) in rows.iter().enumerate() {
            mat[(r, c)] -= f * u[i];
        }
    }
}

/// Right-multiply W and V by the single-mode rotation in the (x_k, p_k)
/// plane and left-multiply S by its inverse.
fn apply_givens(
    w: &mut DMatrix<f64>,
    s: &mut DMatrix<f64>,
    v: &mut DMatrix<f64>,
    k: usize,
    n: usize,
    c: f64,
    sn: f64,
) {
    rotate_columns(w, k, n + k, c, sn);
    rotate_columns(v, k, n + k, c, sn);
    rotate_rows_inverse(s, k, n + k, c, sn);
}

fn rotate_columns(mat: &mut DMatrix<f64>, cx: usize, cp: usize, c: f64, s: f64) {
    for r in 0..mat.nrows() {
        let x = mat[(r, cx)];
        let p = mat[(r, cp)];
        mat[(r, cx)] = c * x - s * p;
        mat[(r, cp)] = s * x + c * p;
    }
}

fn rotate_rows_inverse(mat: &mut DMatrix<f64>, rx: usize, rp: usize, c: f64, s: f64) {
    for col in 0..mat.ncols() {
        let x = mat[(rx, col)];
        let p = mat[(rp, col)];
        mat[(rx, col)] = c * x - s * p;
        mat[(rp, col)] = s * x + c * p;
    }
}

/// Right-multiply by the symplectic Gauss transform on modes k..n that maps
/// the x_k row to a multiple of e_k and the p_k row to a multiple of
/// e_{n+k}. The transform and its inverse are written in closed form from
/// the current entries of the x_k row, which keeps the accumulated S exact.
fn apply_gauss(
    w: &mut DMatrix<f64>,
    s: &mut DMatrix<f64>,
    v: &mut DMatrix<f64>,
    k: usize,
    prow: usize,
    n: usize,
) {
    let r11 = w[(k, k)];
    let r23 = w[(prow, n + k)];
    let tail: Vec<usize> = (k + 1..n).collect();
    let a = (r23 / r11).abs().sqrt();

    let b: Vec<f64> = tail.iter().map(|&j| -w[(k, j)] / r11).collect();
    let d: Vec<f64> = tail.iter().map(|&j| -w[(k, n + j)] / r11).collect();
    let c = -w[(k, n + k)] / (a * r11);
    let e: Vec<f64> = d.iter().map(|&x| x / a).collect();
    let q: Vec<f64> = b.iter().map(|&x| -x / a).collect();

    let dim = 2 * n;
    let mut t = DMatrix::<f64>::identity(dim, dim);
    let mut t_inv = DMatrix::<f64>::identity(dim, dim);

    t[(k, k)] = a;
    t[(k, n + k)] = c;
    t[(n + k, n + k)] = 1.0 / a;
    for (i, &j) in tail.iter().enumerate() {
        t[(k, j)] = b[i];
        t[(k, n + j)] = d[i];
        t[(j, n + k)] = e[i];
        t[(n + j, n + k)] = q[i];
    }

    let be: f64 = b.iter().zip(&e).map(|(x, y)| x * y).sum();
    let dq: f64 = d.iter().zip(&q).map(|(x, y)| x * y).sum();
    t_inv[(k, k)] = 1.0 / a;
    t_inv[(k, n + k)] = be + dq - c;
    t_inv[(n + k, n + k)] = a;
    for (i, &j) in tail.iter().enumerate() {
        t_inv[(k, j)] = -b[i] / a;
        t_inv[(k, n + j)] = -d[i] / a;
        t_inv[(j, n + k)] = -e[i] * a;
        t_inv[(n + j, n + k)] = -q[i] * a;
    }

    *w *= &t;
    *v *= &t;
    *s = &t_inv * &*s;
}

/// Symplectic eigenvalues of a symmetric positive-definite covariance
/// matrix: the moduli of the eigenvalues of i Omega cov, one per mode,
/// sorted in decreasing order. Vacuum = identity yields all ones.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = even_square_dim(cov)?;
    let n = dim / 2;
    let scale = cov.amax().max(1.0);
    if (cov - cov.transpose()).amax() > 1e-10 * scale {
        return Err(Error::Contract(
            "covariance matrix is not symmetric".to_string(),
        ));
    }
    let sym = 0.5 * (cov + cov.transpose());
    let eig = nalgebra::linalg::SymmetricEigen::new(sym);
    let mut sqrt_cov = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let lam = eig.eigenvalues[i];
        if lam <= 0.0 {
            return Err(Error::Contract(format!(
                "covariance matrix is not positive definite (eigenvalue {lam:.3e})"
            )));
        }
        let vcol = eig.eigenvectors.column(i);
        sqrt_cov += lam.sqrt() * &vcol * vcol.transpose();
    }
    let omega = symplectic_form(n);
    let q = &sqrt_cov * &omega * &sqrt_cov;
    let mut sv: Vec<f64> = q.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv.into_iter().step_by(2).collect())
}

/// Gaussian von Neumann entropy in nats.
///
/// S = sum_k [(nu+1)/2 ln((nu+1)/2) - (nu-1)/2 ln((nu-1)/2)] over the
/// symplectic eigenvalues. Eigenvalues within 1e-6 below one are clipped to
/// one; anything smaller is an unphysical state.
pub fn von_neumann_entropy(cov: &DMatrix<f64>) -> Result<f64> {
    let nus = symplectic_eigenvalues(cov)?;
    entropy_from_symplectic_eigenvalues(&nus)
}

/// Dump a dense matrix as row-major CSV (debugging interchange format).
pub fn write_matrix_csv<W: std::io::Write>(m: &DMatrix<f64>, mut w: W) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                write!(w, ",")?;
            }
            write!(w, "{:e}", m[(i, j)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read a dense row-major CSV matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv<R: std::io::BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::Format(format!("bad matrix entry: {e}")))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Format("ragged matrix CSV".to_string()));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("empty matrix CSV".to_string()));
    }
    let (nr, nc) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

/// Entropy from precomputed symplectic eigenvalues (same conventions as
/// [`von_neumann_entropy`]).
pub fn entropy_from_symplectic_eigenvalues(nus: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &nu in nus {
        if nu < 1.0 - 1e-6 {
            return Err(Error::Unphysical { nu_min: nu });
        }
        let nu = nu.max(1.0);
        let up = 0.5 * (nu + 1.0);
        let dn = 0.5 * (nu - 1.0);
        total += up * up.ln();
        if dn > 0.0 {
            total -= dn * dn.ln();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::random::{random_symplectic, SplitMix64};
    use super::*;

    fn random_matrix(rows: usize, cols: usize, rng: &mut SplitMix64) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.normal())
    }

    #[test]
    fn form_basics() {
        let o1 = symplectic_form(1);
        assert_eq!(o1[(0, 1)], 1.0);
        assert_eq!(o1[(1, 0)], -1.0);
        let o3 = symplectic_form(3);
        let sq = &o3 * &o3;
        assert!((sq + DMatrix::identity(6, 6)).amax() < 1e-15);
        let o5 = symplectic_form(5);
        assert!((o5.transpose() + &o5).amax() < 1e-15);
    }

    #[test]
    fn is_symplectic_examples() {
        let id = DMatrix::identity(4, 4);
        assert!(is_symplectic(&id, 1e-12).unwrap());
        let r = 0.7_f64;
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![r.exp(), (-r).exp()]));
        assert!(is_symplectic(&z, 1e-12).unwrap());
        let two = 2.0 * DMatrix::identity(4, 4);
        assert!(!is_symplectic(&two, 1e-12).unwrap());
        let odd = DMatrix::identity(3, 3);
        assert!(matches!(is_symplectic(&odd, 1e-12), Err(Error::Shape(_))));
    }

    #[test]
    fn bloch_messiah_orthogonal_input_gives_identity_z() {
        let mut rng = SplitMix64::new(11);
        for n in [1usize, 2, 3] {
            let o = random::random_orthogonal_symplectic(n, &mut rng);
            let (o1, z, o2) = bloch_messiah(&o).unwrap();
            assert!((z.clone() - DMatrix::identity(2 * n, 2 * n)).amax() < 1e-9);
            assert!(((&o1 * &z * &o2) - &o).amax() < 1e-9);
        }
    }

    #[test]
    fn bloch_messiah_recovers_single_mode_squeezer() {
        let r = 0.85_f64;
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![r.exp(), (-r).exp()]));
        let (o1, z, o2) = bloch_messiah(&m).unwrap();
        assert!((z[(0, 0)] - r.exp()).abs() < 1e-10);
        assert!((z[(1, 1)] - (-r).exp()).abs() < 1e-10);
        assert!(((o1 * z * o2) - m).amax() < 1e-9);
    }

    #[test]
    fn bloch_messiah_random_symplectic_reconstruction() {
        let mut rng = SplitMix64::new(7);
        for n in [1usize, 2, 3, 4] {
            for _ in 0..20 {
                let m = random_symplectic(n, 1.2, &mut rng);
                let (o1, z, o2) = bloch_messiah(&m).unwrap();
                assert!(is_symplectic(&o1, 1e-9).unwrap());
                assert!(is_symplectic(&o2, 1e-9).unwrap());
                assert!((o1.transpose() * &o1 - DMatrix::identity(2 * n, 2 * n)).amax() < 1e-9);
                assert!((o2.transpose() * &o2 - DMatrix::identity(2 * n, 2 * n)).amax() < 1e-9);
                let err = ((&o1 * &z * &o2) - &m).amax();
                assert!(err < 1e-9, "n={n}: reconstruction error {err}");
            }
        }
    }

    #[test]
    fn bloch_messiah_rejects_non_symplectic() {
        let m = 2.0 * DMatrix::identity(4, 4);
        assert!(matches!(bloch_messiah(&m), Err(Error::Contract(_))));
    }

    #[test]
    fn gbmd_square_identity() {
        let a = DMatrix::identity(2, 2);
        let g = gbmd(&a).unwrap();
        assert_eq!(g.side, GbmdSide::Square);
        assert!((g.core.clone() - a).amax() < 1e-15);
    }

    #[test]
    fn gbmd_square_symplectic_passthrough() {
        let mut rng = SplitMix64::new(3);
        let a = random_symplectic(1, 0.9, &mut rng);
        let g = gbmd(&a).unwrap();
        assert_eq!(g.side, GbmdSide::Square);
        assert!((g.core.clone() - &a).amax() < 1e-15);
        assert!((g.s.clone() - DMatrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn gbmd_right_random_reconstruction() {
        let mut rng = SplitMix64::new(42);
        for n in 2..=6usize {
            for _ in 0..40 {
                let a = random_matrix(2, 2 * n, &mut rng);
                match gbmd(&a) {
                    Ok(g) => {
                        assert_eq!(g.side, GbmdSide::Right);
                        assert!(is_symplectic(&g.s, 1e-10).unwrap());
                        let err = g.reconstruction_error(&a);
                        assert!(err < 1e-10, "n={n}: reconstruction error {err:.3e}");
                        g.core_inverse().unwrap();
                    }
                    Err(Error::Degenerate { .. }) => {}
                    Err(other) => panic!("unexpected error: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn gbmd_left_random_reconstruction() {
        let mut rng = SplitMix64::new(43);
        for m in 2..=4usize {
            for _ in 0..40 {
                let a = random_matrix(2 * m, 2, &mut rng);
                match gbmd(&a) {
                    Ok(g) => {
                        assert_eq!(g.side, GbmdSide::Left);
                        assert!(is_symplectic(&g.s, 1e-10).unwrap());
                        let err = g.reconstruction_error(&a);
                        assert!(err < 1e-10, "m={m}: reconstruction error {err:.3e}");
                    }
                    Err(Error::Degenerate { .. }) => {}
                    Err(other) => panic!("unexpected error: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn gbmd_left_matches_transposed_right() {
        let mut rng = SplitMix64::new(44);
        let a = random_matrix(4, 2, &mut rng);
        let left = gbmd(&a).unwrap();
        let right = gbmd(&a.transpose()).unwrap();
        assert!((left.core.transpose() - right.core).amax() < 1e-12);
        assert!((left.s.clone() - right.s).amax() < 1e-12);
    }

    #[test]
    fn gbmd_effective_rows_balanced() {
        let mut rng = SplitMix64::new(45);
        let a = random_matrix(2, 8, &mut rng);
        let g = gbmd(&a).unwrap();
        let nx = g.s.row(0).norm();
        let np = g.s.row(4).norm();
        assert!((nx - np).abs() < 1e-10 * nx.max(np));
    }

    #[test]
    fn gbmd_rejects_singular_form() {
        // Two parallel rows make A Omega A^T vanish identically.
        let mut a = DMatrix::zeros(2, 4);
        a[(0, 0)] = 1.0;
        a[(0, 2)] = 0.5;
        a[(1, 0)] = 2.0;
        a[(1, 2)] = 1.0;
        match gbmd(&a) {
            Err(Error::Degenerate { null_direction, .. }) => {
                assert!(null_direction.is_some());
            }
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn gbmd_agrees_with_bloch_messiah_on_square_symplectic() {
        let mut rng = SplitMix64::new(46);
        let a = random_symplectic(2, 1.0, &mut rng);
        let g = gbmd(&a).unwrap();
        assert!((g.core.clone() - &a).amax() < 1e-15);
        let (o1, z, o2) = bloch_messiah(&a).unwrap();
        assert!(((o1 * z * o2) - a).amax() < 1e-9);
    }

    #[test]
    fn symplectic_eigenvalues_examples() {
        let id = DMatrix::identity(6, 6);
        for nu in symplectic_eigenvalues(&id).unwrap() {
            assert!((nu - 1.0).abs() < 1e-12);
        }
        let r = 0.9_f64;
        let sq = DMatrix::from_diagonal(&DVector::from_vec(vec![(-2.0 * r).exp(), (2.0 * r).exp()]));
        let nus = symplectic_eigenvalues(&sq).unwrap();
        assert_eq!(nus.len(), 1);
        assert!((nus[0] - 1.0).abs() < 1e-10);
        let thermal = 3.5 * DMatrix::identity(2, 2);
        let nus = symplectic_eigenvalues(&thermal).unwrap();
        assert!((nus[0] - 3.5).abs() < 1e-10);
    }

    #[test]
    fn symplectic_eigenvalues_reject_asymmetric() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 0.5;
        assert!(matches!(
            symplectic_eigenvalues(&m),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn entropy_examples() {
        let vac = DMatrix::identity(4, 4);
        assert!(von_neumann_entropy(&vac).unwrap() < 1e-12);

        // Pure product of counter-squeezed modes (x1, x2, p1, p2 ordering).
        let r = 1.0_f64;
        let tms = DMatrix::from_diagonal(&DVector::from_vec(vec![
            (-2.0 * r).exp(),
            (2.0 * r).exp(),
            (2.0 * r).exp(),
            (-2.0 * r).exp(),
        ]));
        assert!(von_neumann_entropy(&tms).unwrap() < 1e-9);

        // Reduced mode of an entangled two-mode squeezed state is thermal
        // with nu = cosh(2r); closed form via cosh^2 r and sinh^2 r.
        let nu = (2.0 * r).cosh();
        let reduced = nu * DMatrix::identity(2, 2);
        let s = von_neumann_entropy(&reduced).unwrap();
        let ch2 = r.cosh() * r.cosh();
        let sh2 = r.sinh() * r.sinh();
        let expected = ch2 * ch2.ln() - sh2 * sh2.ln();
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 1.6199).abs() < 1e-4);
    }

    #[test]
    fn entropy_from_epr_reduction() {
        // Build the entangled two-mode squeezed covariance and reduce mode 1.
        let r = 1.0_f64;
        let c = (2.0 * r).cosh();
        let s = (2.0 * r).sinh();
        let mut cov = DMatrix::zeros(4, 4);
        cov[(0, 0)] = c;
        cov[(1, 1)] = c;
        cov[(2, 2)] = c;
        cov[(3, 3)] = c;
        cov[(0, 1)] = s;
        cov[(1, 0)] = s;
        cov[(2, 3)] = -s;
        cov[(3, 2)] = -s;
        assert!(von_neumann_entropy(&cov).unwrap() < 1e-9);
        let mut reduced = DMatrix::zeros(2, 2);
        reduced[(0, 0)] = cov[(0, 0)];
        reduced[(1, 1)] = cov[(2, 2)];
        let got = von_neumann_entropy(&reduced).unwrap();
        let ch2 = r.cosh() * r.cosh();
        let sh2 = r.sinh() * r.sinh();
        assert!((got - (ch2 * ch2.ln() - sh2 * sh2.ln())).abs() < 1e-9);
    }

    #[test]
    fn entropy_invariant_under_symplectic_conjugation() {
        let mut rng = SplitMix64::new(9);
        for n in [1usize, 2, 3] {
            for _ in 0..10 {
                // Physical covariance: S (I + thermal) S^T.
                let s = random_symplectic(n, 0.8, &mut rng);
                let mut diag = DMatrix::identity(2 * n, 2 * n);
                for i in 0..n {
                    let t = 1.0 + rng.uniform() * 2.0;
                    diag[(i, i)] = t;
                    diag[(n + i, n + i)] = t;
                }
                let cov = &s * &diag * s.transpose();
                let s2 = random_symplectic(n, 0.7, &mut rng);
                let cov2 = &s2 * &cov * s2.transpose();
                let e1 = von_neumann_entropy(&cov).unwrap();
                let e2 = von_neumann_entropy(&cov2).unwrap();
                assert!((e1 - e2).abs() < 1e-9 * e1.max(1.0), "{e1} vs {e2}");
            }
        }
    }

    #[test]
    fn entropy_rejects_unphysical() {
        let cov = 0.5 * DMatrix::identity(2, 2);
        assert!(matches!(
            von_neumann_entropy(&cov),
            Err(Error::Unphysical { .. })
        ));
    }

    #[test]
    fn matrix_csv_round_trip() {
        let mut rng = SplitMix64::new(55);
        let m = random_matrix(3, 5, &mut rng);
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        let back = read_matrix_csv(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(m, back);
    }
}
