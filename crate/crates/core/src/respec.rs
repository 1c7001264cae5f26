//! Finite-dimensional checker for the variational dimension bound on the
//! negative spectral subspace: given a symmetric A with H = H- + H0 + H+,
//! a subspace X with Q <= 0 and a P-invariant Y orthogonal to X (P the
//! projection onto H-), the checks are
//!
//!   X n ker P = X n H0,   PX perp Y,
//!   dim(H- minus Y) >= dim PX = dim X - dim(X n H0).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A concrete instance: symmetric matrix with subspace bases as columns.
#[derive(Debug, Clone)]
pub struct RespecInstance {
    pub a: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    /// Construction tolerance for the instance invariants.
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RespecReport {
    pub dim_x: usize,
    pub dim_x_h0: usize,
    pub dim_px: usize,
    pub dim_hminus_minus_y: usize,
    pub equality_ok: bool,
    pub inequality_ok: bool,
    pub kernel_match_ok: bool,
    pub px_perp_y_residual: f64,
    pub form_max_on_x: f64,
    pub pass: bool,
}

/// Numerical rank with an ambiguity guard: singular values within a factor
/// 10 of the tolerance raise an error.
fn guarded_rank(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Ok(0);
    }
    let svd = m.clone().svd(false, false);
    let mut rank = 0;
    for &s in svd.singular_values.iter() {
        if s > tol * 10.0 {
            rank += 1;
        } else if s > tol / 10.0 {
            return Err(Error::RankAmbiguous { sv: s, tol });
        }
    }
    Ok(rank)
}

fn hcat(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = parts.iter().map(|p| p.nrows()).max().unwrap_or(0);
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        out.view_mut((0, at), (p.nrows(), p.ncols())).copy_from(*p);
        at += p.ncols();
    }
    out
}

pub fn respec_check(inst: &RespecInstance, rank_tol: f64) -> Result<RespecReport> {
    let n = inst.a.nrows();
    let sym = (&inst.a + inst.a.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    let mut neg_cols = Vec::new();
    let mut zero_cols = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -rank_tol * 10.0 {
            neg_cols.push(i);
        } else if lam <= rank_tol * 10.0 {
            if lam.abs() > rank_tol / 10.0 {
                return Err(Error::RankAmbiguous { sv: lam.abs(), tol: rank_tol });
            }
            zero_cols.push(i);
        }
    }
    let pick = |cols: &[usize]| -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            m.column_mut(j).copy_from(&eig.eigenvectors.column(c));
        }
        m
    };
    let h_minus = pick(&neg_cols);
    let h_zero = pick(&zero_cols);
    // Orthogonal projection onto H-.
    let p = &h_minus * h_minus.transpose();
    // Instance invariants.
    let restricted = inst.x.transpose() * &sym * &inst.x;
    let form_max_on_x = if restricted.ncols() == 0 {
        0.0
    } else {
        let fe = ((&restricted + restricted.transpose()) * 0.5).symmetric_eigen();
        fe.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    };
    if form_max_on_x > inst.tol {
        return Err(Error::InvalidComplex(format!(
            "quadratic form positive on X: max {form_max_on_x:.3e}"
        )));
    }
    let xy = inst.x.transpose() * &inst.y;
    if xy.iter().any(|v| v.abs() > inst.tol) {
        return Err(Error::InvalidComplex("X not orthogonal to Y".into()));
    }
    // P-invariance of Y: each P y must lie in span(Y).
    if inst.y.ncols() > 0 {
        let py = &p * &inst.y;
        // Least squares via normal equations on an orthonormalized Y.
        let y_ortho = orthonormal_basis(&inst.y, rank_tol);
        let proj = &y_ortho * (y_ortho.transpose() * &py);
        let resid = (&py - proj).norm();
        if resid > inst.tol * 10.0 {
            return Err(Error::InvalidComplex(format!("Y not P-invariant: residual {resid:.3e}")));
        }
    }
    // Dimensions.
    let dim_x = guarded_rank(&inst.x, rank_tol)?;
    let dim_h0 = h_zero.ncols();
    let dim_x_h0 = dim_x + dim_h0 - guarded_rank(&hcat(&[&inst.x, &h_zero]), rank_tol)?;
    let px = &p * &inst.x;
    let dim_px = guarded_rank(&px, rank_tol)?;
    let py = &p * &inst.y;
    let dim_py = guarded_rank(&py, rank_tol)?;
    let dim_hminus_minus_y = h_minus.ncols() - dim_py;
    // X n ker P = X n H0 (dimensions; the inclusion >= is automatic).
    let dim_x_kerp = dim_x - dim_px;
    let kernel_match_ok = dim_x_kerp == dim_x_h0;
    // PX perp Y.
    let mut px_perp_y_residual = 0.0f64;
    let cross = px.transpose() * &inst.y;
    for v in cross.iter() {
        px_perp_y_residual = px_perp_y_residual.max(v.abs());
    }
    let equality_ok = dim_px == dim_x - dim_x_h0;
    let inequality_ok = dim_hminus_minus_y >= dim_px;
    let pass = equality_ok
        && inequality_ok
        && kernel_match_ok
        && px_perp_y_residual <= inst.tol * 10.0;
    Ok(RespecReport {
        dim_x,
        dim_x_h0,
        dim_px,
        dim_hminus_minus_y,
        equality_ok,
        inequality_ok,
        kernel_match_ok,
        px_perp_y_residual,
        form_max_on_x,
        pass,
    })
}

fn orthonormal_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let mut cols: Vec<nalgebra::DVector<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v: nalgebra::DVector<f64> = m.column(j).into();
        for _ in 0..2 {
            for c in &cols {
                let d = c.dot(&v);
                v -= c * d;
            }
        }
        let nrm = v.norm();
        if nrm > tol {
            cols.push(v / nrm);
        }
    }
    let mut out = DMatrix::zeros(m.nrows(), cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.column_mut(j).copy_from(c);
    }
    out
}

/// Seeded random instance: mixed-signature A conjugated by a random
/// rotation; X built from negative-plus-null combinations orthogonal to Y;
/// Y a P-invariant subspace (a block inside H- plus a block inside H0+H+).
pub fn random_instance(dim: usize, seed: u64) -> RespecInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_neg = rng.gen_range(dim / 5..=2 * dim / 5);
    let n_zero = rng.gen_range(3..=(dim / 6).max(4));
    let n_pos = dim - n_neg - n_zero;
    let mut lambdas = Vec::with_capacity(dim);
    for _ in 0..n_neg {
        lambdas.push(-(0.5 + 1.5 * rng.gen::<f64>()));
    }
    for _ in 0..n_zero {
        lambdas.push(0.0);
    }
    for _ in 0..n_pos {
        lambdas.push(0.5 + 1.5 * rng.gen::<f64>());
    }
    // Random rotation via QR of a random matrix.
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
    let q = g.qr().q();
    let a = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lambdas)) * q.transpose();
    // Eigen-coordinate picks: columns 0..n_neg of q span H-, the next n_zero
    // span H0.
    let col = |i: usize| q.column(i);
    // Y: a few vectors inside H- and a few inside H0 + H+.
    let y_neg = rng.gen_range(0..=n_neg / 3);
    let y_rest = rng.gen_range(0..=3usize);
    let mut y = DMatrix::zeros(dim, y_neg + y_rest);
    for j in 0..y_neg {
        let mut v = nalgebra::DVector::zeros(dim);
        for i in 0..n_neg {
            v += col(i) * (rng.gen::<f64>() * 2.0 - 1.0);
        }
        y.column_mut(j).copy_from(&v);
    }
    for j in 0..y_rest {
        let mut v = nalgebra::DVector::zeros(dim);
        for i in n_neg..dim {
            v += col(i) * (rng.gen::<f64>() * 2.0 - 1.0);
        }
        y.column_mut(y_neg + j).copy_from(&v);
    }
    let y = orthonormal_basis(&y, 1e-12);
    // Complements inside H- and H0 orthogonal to Y.
    let h_minus = {
        let mut m = DMatrix::zeros(dim, n_neg);
        for i in 0..n_neg {
            m.column_mut(i).copy_from(&col(i));
        }
        m
    };
    let h_zero = {
        let mut m = DMatrix::zeros(dim, n_zero);
        for i in 0..n_zero {
            m.column_mut(i).copy_from(&col(n_neg + i));
        }
        m
    };
    // Vectors of span(block) orthogonal to Y: solve (Y^T block) c = 0 in the
    // block coefficients, so no components outside the block leak in.
    let compl = |block: &DMatrix<f64>| -> DMatrix<f64> {
        let constraints = y.transpose() * block;
        let coeffs = nullspace_coeffs(&constraints);
        block * coeffs
    };
    let c_neg = compl(&h_minus);
    let c_zero = compl(&h_zero);
    // X: pure-null vectors, pure-negative vectors, and mixtures.
    let nx_null = rng.gen_range(1..=c_zero.ncols().max(1)).min(c_zero.ncols());
    let nx_neg = rng.gen_range(1..=3usize.min(c_neg.ncols().max(1))).min(c_neg.ncols());
    let nx_mix = rng.gen_range(0..=2usize);
    let mut xs: Vec<nalgebra::DVector<f64>> = Vec::new();
    for j in 0..nx_null {
        xs.push(c_zero.column(j).into());
    }
    for j in 0..nx_neg {
        xs.push(c_neg.column(j).into());
    }
    for _ in 0..nx_mix {
        let mut v = nalgebra::DVector::zeros(dim);
        for j in 0..c_neg.ncols() {
            v += c_neg.column(j) * (rng.gen::<f64>() * 2.0 - 1.0);
        }
        for j in 0..c_zero.ncols() {
            v += c_zero.column(j) * (rng.gen::<f64>() * 2.0 - 1.0);
        }
        if v.norm() > 1e-8 {
            xs.push(v.normalize());
        }
    }
    let mut x = DMatrix::zeros(dim, xs.len());
    for (j, v) in xs.iter().enumerate() {
        x.column_mut(j).copy_from(v);
    }
    RespecInstance { a, x, y, tol: 1e-8 }
}

/// Orthonormal basis of the right nullspace of a (small) constraint matrix,
/// by Gram-Schmidt of the identity against the orthonormalized rows.
fn nullspace_coeffs(constraints: &DMatrix<f64>) -> DMatrix<f64> {
    let n = constraints.ncols();
    let rows = orthonormal_basis(&constraints.transpose(), 1e-10);
    let mut kept: Vec<nalgebra::DVector<f64>> = Vec::new();
    for j in 0..n {
        let mut v = nalgebra::DVector::zeros(n);
        v[j] = 1.0;
        for _ in 0..2 {
            for k in 0..rows.ncols() {
                let r: nalgebra::DVector<f64> = rows.column(k).into();
                let d = r.dot(&v);
                v -= r * d;
            }
            for c in &kept {
                let d = c.dot(&v);
                v -= c * d;
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            kept.push(v / nrm);
        }
    }
    let mut out = DMatrix::zeros(n, kept.len());
    for (j, c) in kept.iter().enumerate() {
        out.column_mut(j).copy_from(c);
    }
    out
}

/// The three closed-form instances.
pub fn trivial_instances() -> Vec<RespecInstance> {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 0.0, 1.0]));
    let e = |i: usize| {
        let mut v = DMatrix::zeros(3, 1);
        v[(i, 0)] = 1.0;
        v
    };
    let empty = DMatrix::zeros(3, 0);
    let mut two = DMatrix::zeros(3, 2);
    two[(0, 0)] = 1.0;
    two[(1, 1)] = 1.0;
    vec![
        RespecInstance { a: a.clone(), x: e(0), y: empty.clone(), tol: 1e-12 },
        RespecInstance { a: a.clone(), x: e(1), y: empty.clone(), tol: 1e-12 },
        RespecInstance { a, x: two, y: e(2), tol: 1e-12 },
    ]
}
