//! Discrete Laplacians and their low spectra.
//!
//! The solver is a block Rayleigh-quotient minimization (LOBPCG) on the
//! mass-symmetrized operator B^{-1/2} L B^{-1/2}, with full
//! reorthogonalization of the iterate blocks and deterministic seeding. A
//! dense full-spectrum path backs the oracle tests and the bulk counting
//! experiments. Transfer operators of a cover (pullback and fiber average)
//! are assembled sparse and verified against their exact identities.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::SurfaceComplex;
use crate::cover::Cover;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceKind {
    Graph,
    Cotangent,
}

/// Compressed sparse rows; rectangular.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; duplicates accumulate.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { rows, cols, indptr, indices, values }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            y[i] = s;
        }
        y
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Stiffness matrix L with diagonal mass B. Graph kind: L = D - W with edge
/// weights; cotangent kind: half-cotangent stiffness with lumped mass.
#[derive(Debug, Clone)]
pub struct LaplaceOperator {
    pub kind: LaplaceKind,
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
}

impl LaplaceOperator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// <a, b>_B
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.mass).map(|((x, y), m)| x * y * m).sum()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }

    /// Euclidean residual norm ||L v - lambda B v||.
    pub fn residual(&self, v: &[f64], lambda: f64) -> f64 {
        let lv = self.stiffness.matvec(v);
        lv.iter()
            .zip(v)
            .zip(&self.mass)
            .map(|((l, x), m)| {
                let r = l - lambda * m * x;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Assembles the Laplacian of a complex.
pub fn assemble(c: &SurfaceComplex, kind: LaplaceKind) -> Result<LaplaceOperator> {
    match kind {
        LaplaceKind::Graph => {
            let n = c.n_vertices();
            let mut triplets = Vec::with_capacity(4 * c.edges().len());
            for e in c.edges() {
                triplets.push((e.u, e.u, e.weight));
                triplets.push((e.v, e.v, e.weight));
                triplets.push((e.u, e.v, -e.weight));
                triplets.push((e.v, e.u, -e.weight));
            }
            let stiffness = CsrMatrix::from_triplets(n, n, &triplets);
            Ok(LaplaceOperator { kind, stiffness, mass: c.mass().to_vec() })
        }
        LaplaceKind::Cotangent => {
            let coords = c.coords().ok_or(Error::MissingCoordinates)?;
            let n = c.n_vertices();
            let mut triplets = Vec::new();
            let mut lumped = vec![0.0f64; n];
            for (fi, f) in c.faces().iter().enumerate() {
                let vs = face_vertices(c, f);
                if vs.len() != 3 {
                    return Err(Error::InvalidComplex(format!(
                        "cotangent assembly requires triangles; face {fi} has {} corners",
                        vs.len()
                    )));
                }
                let p: Vec<[f64; 3]> = vs.iter().map(|&v| coords[v]).collect();
                let area = triangle_area(&p[0], &p[1], &p[2]);
                if area < 1e-12 {
                    return Err(Error::DegenerateTriangle { face: fi, area });
                }
                for corner in 0..3 {
                    let (a, b, o) = (vs[(corner + 1) % 3], vs[(corner + 2) % 3], vs[corner]);
                    let cot = cotangent(&coords[o], &coords[a], &coords[b]);
                    let w = 0.5 * cot;
                    triplets.push((a, a, w));
                    triplets.push((b, b, w));
                    triplets.push((a, b, -w));
                    triplets.push((b, a, -w));
                    lumped[vs[corner]] += area / 3.0;
                }
            }
            if lumped.iter().any(|&m| m <= 0.0) {
                return Err(Error::InvalidComplex("isolated vertex in cotangent assembly".into()));
            }
            let stiffness = CsrMatrix::from_triplets(n, n, &triplets);
            Ok(LaplaceOperator { kind, stiffness, mass: lumped })
        }
    }
}

fn face_vertices(c: &SurfaceComplex, f: &crate::complex::Face) -> Vec<usize> {
    f.walk
        .iter()
        .map(|&(e, fwd)| if fwd { c.edges()[e].u } else { c.edges()[e].v })
        .collect()
}

fn triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let cx = u[1] * v[2] - u[2] * v[1];
    let cy = u[2] * v[0] - u[0] * v[2];
    let cz = u[0] * v[1] - u[1] * v[0];
    0.5 * (cx * cx + cy * cy + cz * cz).sqrt()
}

/// Cotangent of the angle at `o` in triangle (o, a, b).
fn cotangent(o: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let u = [a[0] - o[0], a[1] - o[1], a[2] - o[2]];
    let v = [b[0] - o[0], b[1] - o[1], b[2] - o[2]];
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cx = u[1] * v[2] - u[2] * v[1];
    let cy = u[2] * v[0] - u[0] * v[2];
    let cz = u[0] * v[1] - u[1] * v[0];
    let cross = (cx * cx + cy * cy + cz * cz).sqrt();
    dot / cross
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

/// Sorted low eigenpairs with multiplicity clusters and solver residuals.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// B-orthonormal eigenvectors, one per eigenvalue.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Half-open index ranges of multiplicity clusters.
    pub clusters: Vec<(usize, usize)>,
    /// True when the whole spectrum was computed.
    pub complete: bool,
    pub cluster_gap: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn last_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Cluster whose representative value is within `tol` of lambda.
    pub fn cluster_at(&self, lambda: f64, tol: f64) -> Option<(usize, usize)> {
        self.clusters
            .iter()
            .copied()
            .find(|&(s, e)| {
                let rep = self.eigenvalues[s..e].iter().sum::<f64>() / (e - s) as f64;
                (rep - lambda).abs() <= tol
            })
    }

    fn from_pairs(
        mut pairs: Vec<(f64, Vec<f64>, f64)>,
        complete: bool,
        rel_cluster_gap: f64,
    ) -> Spectrum {
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let residuals: Vec<f64> = pairs.iter().map(|p| p.2).collect();
        let vectors: Vec<Vec<f64>> = pairs.into_iter().map(|p| p.1).collect();
        let scale = eigenvalues.last().map(|x| x.abs()).unwrap_or(1.0).max(1.0);
        let gap = rel_cluster_gap * scale;
        let mut clusters = Vec::new();
        let mut start = 0usize;
        for i in 1..=eigenvalues.len() {
            if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > gap {
                clusters.push((start, i));
                start = i;
            }
        }
        Spectrum { eigenvalues, vectors, residuals, clusters, complete, cluster_gap: gap }
    }
}

/// Dense full spectrum; the oracle path. Deterministic, O(n^3).
pub fn dense_spectrum(op: &LaplaceOperator, rel_cluster_gap: f64) -> Spectrum {
    let n = op.dim();
    let scale: Vec<f64> = op.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut a = op.stiffness.to_dense();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= scale[i] * scale[j];
        }
    }
    // Exact symmetry for the eigensolver.
    let sym = (&a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());
    let mut pairs = Vec::with_capacity(n);
    for &k in &order {
        let y = eig.eigenvectors.column(k);
        let v: Vec<f64> = (0..n).map(|i| y[i] * scale[i]).collect();
        let lambda = eig.eigenvalues[k];
        let res = op.residual(&v, lambda) / norm2(&v).max(1e-300);
        pairs.push((lambda, v, res));
    }
    let mut s = Spectrum::from_pairs(pairs, true, rel_cluster_gap);
    normalize_b(&mut s, op);
    s
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize_b(s: &mut Spectrum, op: &LaplaceOperator) {
    for v in s.vectors.iter_mut() {
        let n = op.inner(v, v).sqrt();
        if n > 0.0 {
            for x in v.iter_mut() {
                *x /= n;
            }
        }
    }
}

/// The m smallest generalized eigenpairs by block Rayleigh-quotient
/// minimization with full reorthogonalization; deterministic given the seed.
/// The residual contract is ||L v - lambda B v|| <= tol * ||v|| per pair.
pub fn lowest_eigenpairs(
    op: &LaplaceOperator,
    m: usize,
    tol: f64,
    seed: u64,
    max_iters: usize,
    rel_cluster_gap: f64,
) -> Result<Spectrum> {
    let n = op.dim();
    if m == 0 || m > n {
        return Err(Error::InvalidComplex(format!("requested {m} pairs of a {n}-dim operator")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidComplex("tolerance must be positive".into()));
    }
    // Symmetrized operator A = B^{-1/2} L B^{-1/2} acting on y = B^{1/2} v.
    let scale: Vec<f64> = op.mass.iter().map(|mm| 1.0 / mm.sqrt()).collect();
    let apply_a = |y: &[f64]| -> Vec<f64> {
        let x: Vec<f64> = y.iter().zip(&scale).map(|(v, s)| v * s).collect();
        let mut z = op.stiffness.matvec(&x);
        for (zi, s) in z.iter_mut().zip(&scale) {
            *zi *= s;
        }
        z
    };
    // Jacobi preconditioner on A.
    let mut diag_a = vec![0.0f64; n];
    for i in 0..n {
        for (j, v) in op.stiffness.row(i) {
            if j == i {
                diag_a[i] += v * scale[i] * scale[i];
            }
        }
    }
    let precond = |r: &[f64]| -> Vec<f64> {
        r.iter().zip(&diag_a).map(|(x, d)| if *d > 1e-12 { x / d } else { *x }).collect()
    };
    let nb = (m + (m / 2).clamp(2, 8)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..nb)
        .map(|_| (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
        .collect();
    orthonormalize(&mut x, &[], 1e-12);
    let mut p: Vec<Vec<f64>> = Vec::new();
    // Converged pairs, locked in ascending order; all later blocks are kept
    // orthogonal to them.
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut achieved: Vec<f64> = Vec::new();
    let res_in_original = |y: &[f64], lam: f64| -> f64 {
        let v: Vec<f64> = y.iter().zip(&scale).map(|(yy, s)| yy * s).collect();
        op.residual(&v, lam) / norm2(&v).max(1e-300)
    };
    for _iter in 0..max_iters {
        let locked_refs: Vec<&Vec<f64>> = locked.iter().map(|(_, y)| y).collect();
        orthonormalize(&mut x, &locked_refs, 1e-12);
        while x.len() < nb - locked.len().min(nb) {
            let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            x.push(v);
            orthonormalize(&mut x, &locked_refs, 1e-12);
        }
        // Rayleigh-Ritz within the active block.
        let ax: Vec<Vec<f64>> = x.iter().map(|c| apply_a(c)).collect();
        let nx = x.len();
        let mut h = DMatrix::zeros(nx, nx);
        for i in 0..nx {
            for j in i..nx {
                let v = dot(&x[i], &ax[j]);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..nx).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let rotate = |cols: &[Vec<f64>]| -> Vec<Vec<f64>> {
            order
                .iter()
                .map(|&col| {
                    let q: DVector<f64> = eig.eigenvectors.column(col).into();
                    let mut v = vec![0.0; n];
                    for (bi, b) in cols.iter().enumerate() {
                        let coef = q[bi];
                        if coef != 0.0 {
                            for (t, bt) in b.iter().enumerate() {
                                v[t] += coef * bt;
                            }
                        }
                    }
                    v
                })
                .collect()
        };
        x = rotate(&x);
        let ax = rotate(&ax);
        let lambdas: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        // Lock the converged prefix.
        let mut lock_count = 0;
        for k in 0..x.len() {
            if locked.len() + lock_count >= m {
                break;
            }
            if res_in_original(&x[k], lambdas[k]) <= tol {
                lock_count += 1;
            } else {
                break;
            }
        }
        for k in 0..lock_count {
            locked.push((lambdas[k], x[k].clone()));
        }
        if lock_count > 0 {
            x.drain(0..lock_count);
        }
        if locked.len() >= m {
            let mut pairs = Vec::with_capacity(m);
            for (lam, y) in locked.into_iter().take(m) {
                let v: Vec<f64> = y.iter().zip(&scale).map(|(yy, s)| yy * s).collect();
                let res = op.residual(&v, lam) / norm2(&v).max(1e-300);
                pairs.push((lam, v, res));
            }
            let mut s = Spectrum::from_pairs(pairs, m == n, rel_cluster_gap);
            normalize_b(&mut s, op);
            return Ok(s);
        }
        let lambdas = &lambdas[lock_count..];
        let ax = &ax[lock_count..];
        // Residual directions, normalized then preconditioned.
        let mut w: Vec<Vec<f64>> = Vec::with_capacity(x.len());
        achieved = Vec::new();
        for (k, (xc, axc)) in x.iter().zip(ax).enumerate() {
            let lam = lambdas[k];
            let mut r: Vec<f64> = axc.iter().zip(xc).map(|(a, b)| a - lam * b).collect();
            if locked.len() + k < m {
                achieved.push(res_in_original(xc, lam));
            }
            let nrm = norm2(&r);
            if nrm > 1e-300 {
                for t in r.iter_mut() {
                    *t /= nrm;
                }
            }
            w.push(precond(&r));
        }
        // Subspace [X W P], fully reorthogonalized (locked included).
        let locked_refs: Vec<&Vec<f64>> = locked.iter().map(|(_, y)| y).collect();
        let mut basis = x.clone();
        orthonormalize(&mut w, &locked_refs.iter().copied().chain(basis.iter()).collect::<Vec<_>>(), 1e-8);
        basis.extend(w);
        if !p.is_empty() {
            let mut pp = p.clone();
            orthonormalize(
                &mut pp,
                &locked_refs.iter().copied().chain(basis.iter()).collect::<Vec<_>>(),
                1e-8,
            );
            basis.extend(pp);
        }
        let nsb = basis.len();
        let abasis: Vec<Vec<f64>> = basis.iter().map(|c| apply_a(c)).collect();
        let mut hs = DMatrix::zeros(nsb, nsb);
        for i in 0..nsb {
            for j in i..nsb {
                let v = dot(&basis[i], &abasis[j]);
                hs[(i, j)] = v;
                hs[(j, i)] = v;
            }
        }
        let eig = hs.symmetric_eigen();
        let mut order: Vec<usize> = (0..nsb).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let take = (nb - locked.len()).min(nsb);
        let nx_now = x.len();
        let mut new_x: Vec<Vec<f64>> = Vec::with_capacity(take);
        let mut new_p: Vec<Vec<f64>> = Vec::with_capacity(take);
        for &col in order.iter().take(take) {
            let q: DVector<f64> = eig.eigenvectors.column(col).into();
            let mut xv = vec![0.0; n];
            let mut pv = vec![0.0; n];
            for (bi, b) in basis.iter().enumerate() {
                let coef = q[bi];
                if coef == 0.0 {
                    continue;
                }
                for (t, bt) in b.iter().enumerate() {
                    xv[t] += coef * bt;
                }
                if bi >= nx_now {
                    for (t, bt) in b.iter().enumerate() {
                        pv[t] += coef * bt;
                    }
                }
            }
            new_x.push(xv);
            new_p.push(pv);
        }
        let locked_refs: Vec<&Vec<f64>> = locked.iter().map(|(_, y)| y).collect();
        orthonormalize(&mut new_x, &locked_refs, 1e-12);
        orthonormalize(&mut new_p, &[], 1e-8);
        x = new_x;
        p = new_p;
        p.truncate((m + 2).min(nb));
    }
    Err(Error::NoConvergence { iters: max_iters, achieved })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt, two passes, dropping dependent columns.
fn orthonormalize(cols: &mut Vec<Vec<f64>>, against: &[&Vec<f64>], drop_tol: f64) {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for c in cols.iter() {
        let mut v = c.clone();
        for _pass in 0..2 {
            for a in against {
                let d = dot(&v, a);
                for (x, y) in v.iter_mut().zip(a.iter()) {
                    *x -= d * y;
                }
            }
            for a in &kept {
                let d = dot(&v, a);
                for (x, y) in v.iter_mut().zip(a.iter()) {
                    *x -= d * y;
                }
            }
        }
        let nrm = norm2(&v);
        if nrm > drop_tol {
            for x in v.iter_mut() {
                *x /= nrm;
            }
            kept.push(v);
        }
    }
    *cols = kept;
}

/// Computes eigenpairs until the spectrum is certified past `lambda`:
/// the last computed eigenvalue exceeds lambda + margin, or the spectrum is
/// complete. Grows the block geometrically.
pub fn spectrum_past(
    op: &LaplaceOperator,
    lambda: f64,
    margin: f64,
    tol: f64,
    seed: u64,
    max_iters: usize,
    rel_cluster_gap: f64,
) -> Result<Spectrum> {
    let n = op.dim();
    let mut m = 8.min(n);
    loop {
        let s = if m == n || n <= 64 {
            dense_spectrum(op, rel_cluster_gap)
        } else {
            lowest_eigenpairs(op, m, tol, seed, max_iters, rel_cluster_gap)?
        };
        if s.complete || s.last_eigenvalue() > lambda + margin {
            return Ok(s);
        }
        if m == n {
            return Ok(s);
        }
        m = (2 * m).min(n);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    Closed,
    Open,
}

/// Counting function N(lambda) / N(lambda-) with a certified margin.
/// Eigenvalues within +-margin of lambda count as equal to lambda; values in
/// the guard band (margin, 2 margin] of |mu - lambda| make the count
/// ambiguous and raise an error.
pub fn count_below(s: &Spectrum, lambda: f64, mode: CountMode, margin: f64) -> Result<usize> {
    if !s.complete && s.last_eigenvalue() < lambda + 2.0 * margin {
        return Err(Error::RangeExceeded { lambda, last: s.last_eigenvalue() });
    }
    for &mu in &s.eigenvalues {
        let d = (mu - lambda).abs();
        if d > margin && d <= 2.0 * margin {
            return Err(Error::AmbiguousCount { lambda, eigenvalue: mu, margin });
        }
    }
    let count = match mode {
        CountMode::Closed => s.eigenvalues.iter().filter(|&&mu| mu <= lambda + margin).count(),
        CountMode::Open => s.eigenvalues.iter().filter(|&&mu| mu <= lambda - margin).count(),
    };
    Ok(count)
}

// ---------------------------------------------------------------------------
// Transfer operators
// ---------------------------------------------------------------------------

/// Pullback P* (copy along sheets) and pushdown P_* (fiber average) of a
/// cover, with their exact identities checked at build time.
#[derive(Debug, Clone)]
pub struct TransferPair {
    pub degree: usize,
    pullback: CsrMatrix,
    pushdown: CsrMatrix,
}

impl TransferPair {
    pub fn pullback(&self, phi: &[f64]) -> Vec<f64> {
        self.pullback.matvec(phi)
    }

    pub fn pushdown(&self, phi_cover: &[f64]) -> Vec<f64> {
        self.pushdown.matvec(phi_cover)
    }
}

/// Builds the transfer pair and verifies: structural P_* P* = I, and the
/// intertwining L' P* = P* L to 1e-12 relative on seeded random vectors.
pub fn transfer_pair(cov: &Cover) -> Result<TransferPair> {
    let nv = cov.base().n_vertices();
    let n = cov.degree();
    let mut up = Vec::with_capacity(nv * n);
    let mut down = Vec::with_capacity(nv * n);
    for v in 0..nv {
        for i in 0..n {
            let lift = cov.lift_vertex(v, i);
            up.push((lift, v, 1.0));
            down.push((v, lift, 1.0 / n as f64));
        }
    }
    let pullback = CsrMatrix::from_triplets(nv * n, nv, &up);
    let pushdown = CsrMatrix::from_triplets(nv, nv * n, &down);
    // Structural identity P_* P* = I: each base row hits its fiber exactly
    // once per sheet with coefficient 1/n.
    for v in 0..nv {
        let entries: Vec<(usize, f64)> = pushdown.row(v).collect();
        if entries.len() != n
            || entries
                .iter()
                .any(|&(j, val)| cov.project_vertex(j) != v || (val - 1.0 / n as f64).abs() != 0.0)
        {
            return Err(Error::InvalidComplex("pushdown row structure broken".into()));
        }
    }
    let pair = TransferPair { degree: n, pullback, pushdown };
    // Intertwining check.
    let lb = assemble(cov.base(), LaplaceKind::Graph)?;
    let lc = assemble(cov.total(), LaplaceKind::Graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7f3a_11);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let phi: Vec<f64> = (0..nv).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let a = lc.stiffness.matvec(&pair.pullback(&phi));
        let b = pair.pullback(&lb.stiffness.matvec(&phi));
        let scale = norm2(&a).max(norm2(&b)).max(1e-30);
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        worst = worst.max(diff / scale);
    }
    if worst > 1e-12 {
        return Err(Error::IntertwiningFailure { residual: worst });
    }
    Ok(pair)
}

/// Dimensions of the invariant splitting E'_lambda = p*E_lambda + ker p_* on
/// a certified cluster of the cover spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplittingReport {
    pub lambda: f64,
    pub dim_total: usize,
    pub dim_lifted: usize,
    pub dim_kernel: usize,
    pub ortho_residual: f64,
    pub isometry_residual: f64,
    pub additive: bool,
}

pub fn invariant_splitting(
    cov: &Cover,
    lambda: f64,
    s_base: &Spectrum,
    s_cover: &Spectrum,
    tol: f64,
) -> Result<SplittingReport> {
    let (cs, ce) = s_cover
        .cluster_at(lambda, tol.max(s_cover.cluster_gap))
        .ok_or(Error::ClusterNotFound { lambda })?;
    let dim_total = ce - cs;
    let pair = transfer_pair(cov)?;
    let lb = assemble(cov.base(), LaplaceKind::Graph)?;
    let lc = assemble(cov.total(), LaplaceKind::Graph)?;
    let n = cov.degree() as f64;
    // Lifted block: pullbacks of base cluster vectors, scaled to unit B'-norm.
    let lifted: Vec<Vec<f64>> = match s_base.cluster_at(lambda, tol.max(s_base.cluster_gap)) {
        Some((bs, be)) => (bs..be)
            .map(|k| {
                let mut w = pair.pullback(&s_base.vectors[k]);
                let nrm = lc.inner(&w, &w).sqrt();
                for x in w.iter_mut() {
                    *x /= nrm;
                }
                w
            })
            .collect(),
        None => vec![],
    };
    let dim_lifted = lifted.len();
    // Kernel block: cover cluster vectors minus their B'-projection on the
    // lifted block.
    let mut ortho_residual: f64 = 0.0;
    let mut kernel_dim = 0usize;
    let mut kernel_vectors: Vec<Vec<f64>> = Vec::new();
    for k in cs..ce {
        let mut v = s_cover.vectors[k].clone();
        for w in &lifted {
            let d = lc.inner(&v, w);
            for (x, y) in v.iter_mut().zip(w) {
                *x -= d * y;
            }
        }
        for w in &kernel_vectors {
            let d = lc.inner(&v, w);
            for (x, y) in v.iter_mut().zip(w) {
                *x -= d * y;
            }
        }
        let nrm = lc.inner(&v, &v).sqrt();
        if nrm > tol.max(1e-8) {
            for x in v.iter_mut() {
                *x /= nrm;
            }
            // Pushdown must vanish on the kernel block.
            let down = pair.pushdown(&v);
            let down_norm = lb.inner(&down, &down).sqrt();
            ortho_residual = ortho_residual.max(down_norm);
            kernel_vectors.push(v);
            kernel_dim += 1;
        }
    }
    // Cross-block inner products.
    for w in &lifted {
        for kv in &kernel_vectors {
            ortho_residual = ortho_residual.max(lc.inner(w, kv).abs());
        }
    }
    // sqrt(n) p_* is an isometry on the lifted block.
    let mut isometry_residual: f64 = 0.0;
    for a in &lifted {
        for b in &lifted {
            let da = pair.pushdown(a);
            let db = pair.pushdown(b);
            let lhs = n * lb.inner(&da, &db);
            let rhs = lc.inner(a, b);
            isometry_residual = isometry_residual.max((lhs - rhs).abs());
        }
    }
    Ok(SplittingReport {
        lambda,
        dim_total,
        dim_lifted,
        dim_kernel: kernel_dim,
        ortho_residual,
        isometry_residual,
        additive: dim_total == dim_lifted + kernel_dim,
    })
}

/// Smallest Dirichlet eigenvalue of the principal submatrix on `sub`.
pub fn dirichlet_lambda0(c: &SurfaceComplex, sub: &[usize]) -> Result<f64> {
    let n = c.n_vertices();
    let sub_set: std::collections::BTreeSet<usize> = sub.iter().copied().collect();
    if sub_set.is_empty() || sub_set.len() >= n {
        return Err(Error::EmptyOrFullSubset);
    }
    let order: Vec<usize> = sub_set.iter().copied().collect();
    let index_of: std::collections::BTreeMap<usize, usize> =
        order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let full = assemble(c, LaplaceKind::Graph)?;
    let k = order.len();
    let mut triplets = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        for (j, val) in full.stiffness.row(v) {
            if let Some(&jj) = index_of.get(&j) {
                triplets.push((i, jj, val));
            }
        }
    }
    let stiffness = CsrMatrix::from_triplets(k, k, &triplets);
    let mass: Vec<f64> = order.iter().map(|&v| c.mass()[v]).collect();
    let op = LaplaceOperator { kind: LaplaceKind::Graph, stiffness, mass };
    if k <= 512 {
        Ok(dense_spectrum(&op, 1e-7).eigenvalues[0])
    } else {
        let s = lowest_eigenpairs(&op, 1, 1e-10, 1, 4000, 1e-7)?;
        Ok(s.eigenvalues[0])
    }
}
