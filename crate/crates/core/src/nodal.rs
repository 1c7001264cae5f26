//! Nodal domains of eigenvectors, their topology, intersection cocycles of
//! complement components, and plans for cyclic covers built from them.
//!
//! Nodal domains are vertex-sign domains: connected components of the
//! strictly positive and strictly negative vertex sets, with an explicit
//! zero set in between. Cocycles are closed integer (or mod-2) 1-cochains
//! supported away from the chosen domain; their evaluations on the
//! fundamental cycles of a spanning tree realize homomorphisms of the
//! fundamental group that kill the domain's loops.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::complex::{
    evaluate_cochain_on_walk, mu_from_signature, DomainTopology, Orientation, SpanningTree,
    SurfaceComplex,
};
use crate::cover::{build_cover, subdomain_group, CoverSpec};
use crate::error::{Error, Result};
use crate::group::SubgroupWordSet;
use crate::spectra::{LaplaceOperator, Spectrum};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodalDomain {
    pub sign: i8,
    pub vertices: Vec<usize>,
    pub topology: DomainTopology,
}

/// Signed decomposition of an eigenvector into nodal domains and a zero set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodalDecomposition {
    pub eigenvector: Vec<f64>,
    pub eps_zero: f64,
    pub zero_set: Vec<usize>,
    pub domains: Vec<NodalDomain>,
}

impl NodalDecomposition {
    pub fn nu(&self) -> usize {
        self.domains.len()
    }
}

/// Splits the vertex set by sign with threshold eps_zero * ||phi||_inf and
/// classifies each signed component.
pub fn nodal_decomposition(
    c: &SurfaceComplex,
    phi: &[f64],
    eps_zero: f64,
) -> Result<NodalDecomposition> {
    if phi.len() != c.n_vertices() {
        return Err(Error::InvalidComplex("eigenvector length mismatch".into()));
    }
    if !(eps_zero > 0.0 && eps_zero < 0.1) {
        return Err(Error::InvalidComplex("eps_zero must lie in (0, 0.1)".into()));
    }
    let max = phi.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if max == 0.0 {
        return Err(Error::AllZeroVector);
    }
    let threshold = eps_zero * max;
    let zero_set: Vec<usize> = (0..phi.len()).filter(|&v| phi[v].abs() <= threshold).collect();
    if 2 * zero_set.len() > phi.len() {
        return Err(Error::ZeroSetTooLarge {
            percent: 100.0 * zero_set.len() as f64 / phi.len() as f64,
        });
    }
    let mut domains = Vec::new();
    for sign in [1i8, -1] {
        let side: Vec<usize> = (0..phi.len())
            .filter(|&v| {
                if sign > 0 {
                    phi[v] > threshold
                } else {
                    phi[v] < -threshold
                }
            })
            .collect();
        for comp in c.components_of_subset(&side) {
            let topology = c.classify_subsurface(&comp)?;
            domains.push(NodalDomain { sign, vertices: comp, topology });
        }
    }
    domains.sort_by_key(|d| d.vertices[0]);
    Ok(NodalDecomposition { eigenvector: phi.to_vec(), eps_zero, zero_set, domains })
}

/// Canonical representative of an eigenvalue cluster: the unit B-norm vector
/// of the span maximizing the smallest |phi(v)|, found by seeded multistart
/// pattern search, then sign-normalized. Single vectors are only
/// sign-normalized.
pub fn canonical_cluster_vector(
    op: &LaplaceOperator,
    s: &Spectrum,
    cluster: (usize, usize),
    seed: u64,
) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let (cs, ce) = cluster;
    let basis: Vec<&Vec<f64>> = s.vectors[cs..ce].iter().collect();
    let d = basis.len();
    let n = basis[0].len();
    let combine = |q: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (coef, b) in q.iter().zip(&basis) {
            for (x, y) in v.iter_mut().zip(b.iter()) {
                *x += coef * y;
            }
        }
        v
    };
    let min_abs = |v: &[f64]| v.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    let normalize = |q: &mut Vec<f64>| {
        let nrm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in q.iter_mut() {
            *x /= nrm;
        }
    };
    let sign_fix = |v: &mut Vec<f64>| {
        let mut best = 0usize;
        for i in 0..v.len() {
            if v[i].abs() > v[best].abs() {
                best = i;
            }
        }
        if v[best] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    };
    if d == 1 {
        let mut v = basis[0].clone();
        sign_fix(&mut v);
        return v;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        starts.push(e);
    }
    if d == 2 {
        for k in 0..180 {
            let t = std::f64::consts::PI * k as f64 / 180.0;
            starts.push(vec![t.cos(), t.sin()]);
        }
    }
    for _ in 0..(128 * d) {
        let mut q: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        normalize(&mut q);
        starts.push(q);
    }
    let mut best_q = starts[0].clone();
    let mut best_val = -1.0f64;
    for start in starts {
        let mut q = start;
        let mut val = min_abs(&combine(&q));
        let mut step = 0.5f64;
        while step > 1e-4 {
            let mut improved = false;
            for i in 0..d {
                for delta in [step, -step] {
                    let mut q2 = q.clone();
                    q2[i] += delta;
                    normalize(&mut q2);
                    let v2 = min_abs(&combine(&q2));
                    if v2 > val {
                        val = v2;
                        q = q2;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if val > best_val {
            best_val = val;
            best_q = q;
        }
    }
    let mut v = combine(&best_q);
    let nrm = op.inner(&v, &v).sqrt();
    for x in v.iter_mut() {
        *x /= nrm;
    }
    sign_fix(&mut v);
    v
}

/// The cocycle count of a complement component from its signature.
/// Orientable: 2g + k - 1 + (l-1) v 0; non-orientable: g + k - 1 + (l-1) v 0.
pub fn mu_formula(g: usize, k: usize, l: usize, orientable: bool) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidSignature { g: g as i64, k: 0, l: l as i64 });
    }
    let mu = mu_from_signature(g, k, l, orientable);
    // Relation to the Euler characteristic: mu = -chi + 1 if l = 0, else -chi.
    let chi = if orientable {
        2 - 2 * g as i64 - k as i64 - l as i64
    } else {
        2 - g as i64 - k as i64 - l as i64
    };
    debug_assert_eq!(mu as i64, -chi + i64::from(l == 0));
    Ok(mu)
}

/// Report of the chi-maximizing nodal domain and the generator bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodalBoundData {
    pub nu: usize,
    pub chi_s: i64,
    pub best_domain: usize,
    pub chi_u: i64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// Minimal generator count of the fundamental group of the ambient
    /// complex: 2 - chi when closed, 1 - chi otherwise.
    pub nu_s: i64,
    pub closed: bool,
    /// A nodal domain with at most this many generators exists.
    pub generator_bound: i64,
}

pub fn nodal_count_bound_data(c: &SurfaceComplex, d: &NodalDecomposition) -> Result<NodalBoundData> {
    if d.nu() < 2 {
        return Err(Error::SingleDomain);
    }
    let chi_s = c.euler_characteristic();
    let (best_domain, chi_u) = d
        .domains
        .iter()
        .enumerate()
        .map(|(i, dom)| (i, dom.topology.chi))
        .max_by_key(|&(i, chi)| (chi, std::cmp::Reverse(i)))
        .unwrap();
    let nu = d.nu() as i64;
    let closed = !c.faces().is_empty()
        && c.infinity_edges().is_empty()
        && c.edge_faces().iter().all(|fs| fs.len() == 2);
    let nu_s = if closed { 2 - chi_s } else { 1 - chi_s };
    let generator_bound = if closed { nu_s / 2 } else { (nu_s + 1) / 2 };
    Ok(NodalBoundData {
        nu: d.nu(),
        chi_s,
        best_domain,
        chi_u,
        lower_ok: chi_s <= nu * chi_u,
        upper_ok: chi_u <= 1,
        nu_s,
        closed,
        generator_bound,
    })
}

// ---------------------------------------------------------------------------
// Intersection cocycles
// ---------------------------------------------------------------------------

/// Closed 1-cochain supported away from the chosen nodal domain, with its
/// evaluations on the fundamental cycles of the reference spanning tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntersectionCocycle {
    pub values: Vec<i64>,
    pub mod2: bool,
    pub evaluations: Vec<i64>,
}

/// Cocycles attached to one component of the complement of a nodal domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplementCocycles {
    pub component: Vec<usize>,
    pub topology: DomainTopology,
    pub cocycles: Vec<IntersectionCocycle>,
    /// True when the computed rank matches the mu of the topology formula.
    pub mu_agrees: bool,
}

/// Word evaluation of a cocycle through its fundamental-cycle evaluations.
pub fn evaluate_on_word(evaluations: &[i64], word: &[i32]) -> i64 {
    word.iter()
        .map(|&l| {
            let g = l.unsigned_abs() as usize - 1;
            if l > 0 {
                evaluations[g]
            } else {
                -evaluations[g]
            }
        })
        .sum()
}

/// A basis of intersection cocycles per complement component of domain `u`.
/// Integer coefficients on orientable (or face-free) complexes, mod 2
/// otherwise. Every returned cocycle is closed on all faces and evaluates to
/// zero on the generators of the domain's fundamental-group image.
pub fn intersection_cocycles(
    c: &SurfaceComplex,
    d: &NodalDecomposition,
    domain_id: usize,
) -> Result<Vec<ComplementCocycles>> {
    let domain = d
        .domains
        .get(domain_id)
        .ok_or_else(|| Error::InvalidComplex(format!("domain {domain_id} out of range")))?;
    let u_set: BTreeSet<usize> = domain.vertices.iter().copied().collect();
    let complement: Vec<usize> =
        (0..c.n_vertices()).filter(|v| !u_set.contains(v)).collect();
    if complement.is_empty() {
        return Err(Error::EmptyOrFullSubset);
    }
    let tree = SpanningTree::bfs(c, 0)?;
    let basepoint = domain.vertices[0];
    let gamma_u = subdomain_group(c, &tree, &domain.vertices, basepoint)?;
    let mod2 = c.orientation() == Orientation::NonOrientable;
    let mut out = Vec::new();
    for comp in c.components_of_subset(&complement) {
        let comp_set: BTreeSet<usize> = comp.iter().copied().collect();
        let topology = c.classify_subsurface(&comp)?;
        let support: BTreeSet<usize> = (0..c.edges().len())
            .filter(|&e| {
                let edge = &c.edges()[e];
                comp_set.contains(&edge.u) || comp_set.contains(&edge.v)
            })
            .collect();
        let lattice = if mod2 {
            crate::homology::cocycle_lattice_mod2(c, &support)
        } else {
            crate::homology::cocycle_lattice(c, &support)
        };
        let cocycles = if mod2 {
            reduce_mod2(c, &tree, &lattice, &gamma_u)
        } else {
            reduce_integer(c, &tree, &lattice, &gamma_u)?
        };
        let mu_agrees = cocycles.len() == topology.mu;
        out.push(ComplementCocycles { component: comp, topology, cocycles, mu_agrees });
    }
    Ok(out)
}

/// Integer case: quotient the support lattice by trivial directions via row
/// echelon of the evaluation matrix; keep combinations with independent
/// nonzero evaluations.
fn reduce_integer(
    c: &SurfaceComplex,
    tree: &SpanningTree,
    lattice: &[Vec<i64>],
    gamma_u: &SubgroupWordSet,
) -> Result<Vec<IntersectionCocycle>> {
    use crate::snf::{row_echelon_with_transform, IntMat};
    use num_bigint::BigInt;
    use num_traits::{ToPrimitive, Zero};
    if lattice.is_empty() {
        return Ok(vec![]);
    }
    let ngen = tree.nontree.len();
    let evals: Vec<Vec<i64>> = lattice
        .iter()
        .map(|w| {
            tree.nontree
                .iter()
                .map(|&e| evaluate_cochain_on_walk(w, &tree.fundamental_cycle_walk(c, e)))
                .collect()
        })
        .collect();
    let mut ev = IntMat::zeros(lattice.len(), ngen);
    for (i, row) in evals.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            ev.set(i, j, BigInt::from(v));
        }
    }
    let (h, u) = row_echelon_with_transform(&ev);
    let mut out = Vec::new();
    for i in 0..h.rows {
        if (0..h.cols).all(|j| h.get(i, j).is_zero()) {
            continue;
        }
        // Combined cochain: sum_k u[i][k] * lattice[k].
        let mut values = vec![0i64; c.edges().len()];
        for k in 0..lattice.len() {
            let coef = u.get(i, k).to_i64().expect("desk-scale cocycle combination");
            if coef == 0 {
                continue;
            }
            for (e, &v) in lattice[k].iter().enumerate() {
                values[e] += coef * v;
            }
        }
        let mut evaluations: Vec<i64> = (0..ngen)
            .map(|j| h.get(i, j).to_i64().expect("desk-scale evaluation"))
            .collect();
        // Sign: first nonzero evaluation positive (echelon already does this,
        // but keep the invariant explicit).
        if let Some(first) = evaluations.iter().find(|&&x| x != 0) {
            if *first < 0 {
                for v in values.iter_mut() {
                    *v = -*v;
                }
                for v in evaluations.iter_mut() {
                    *v = -*v;
                }
            }
        }
        // Gamma_U must evaluate to zero.
        if gamma_u.words.iter().any(|w| evaluate_on_word(&evaluations, w) != 0) {
            return Err(Error::InvalidComplex(
                "cocycle fails to vanish on the domain's loops".into(),
            ));
        }
        debug_assert!(cocycle_closed(c, &values, false));
        out.push(IntersectionCocycle { values, mod2: false, evaluations });
    }
    Ok(out)
}

/// Mod-2 case: Gaussian elimination of the evaluation matrix with an
/// identity tail tracking combinations.
fn reduce_mod2(
    c: &SurfaceComplex,
    tree: &SpanningTree,
    lattice: &[Vec<i64>],
    gamma_u: &SubgroupWordSet,
) -> Vec<IntersectionCocycle> {
    use crate::snf::Mat2;
    if lattice.is_empty() {
        return vec![];
    }
    let ngen = tree.nontree.len();
    let rows = lattice.len();
    let mut m = Mat2::zeros(rows, ngen + rows);
    for (i, w) in lattice.iter().enumerate() {
        for (j, &e) in tree.nontree.iter().enumerate() {
            let val = evaluate_cochain_on_walk(w, &tree.fundamental_cycle_walk(c, e));
            if val.rem_euclid(2) == 1 {
                m.set(i, j, true);
            }
        }
        m.set(i, ngen + i, true);
    }
    // Eliminate only on the evaluation columns.
    let mut rank_rows: Vec<usize> = Vec::new();
    let mut used = vec![false; rows];
    for col in 0..ngen {
        let Some(pivot) = (0..rows).find(|&i| !used[i] && m.get(i, col)) else { continue };
        used[pivot] = true;
        rank_rows.push(pivot);
        for i in 0..rows {
            if i != pivot && m.get(i, col) {
                for j in 0..ngen + rows {
                    let v = m.get(i, j) ^ m.get(pivot, j);
                    m.set(i, j, v);
                }
            }
        }
    }
    let mut out = Vec::new();
    for &i in &rank_rows {
        let mut values = vec![0i64; c.edges().len()];
        for (k, w) in lattice.iter().enumerate() {
            if m.get(i, ngen + k) {
                for (e, &v) in w.iter().enumerate() {
                    values[e] = (values[e] + v).rem_euclid(2);
                }
            }
        }
        let evaluations: Vec<i64> = (0..ngen).map(|j| i64::from(m.get(i, j))).collect();
        if gamma_u.words.iter().any(|w| evaluate_on_word(&evaluations, w).rem_euclid(2) != 0) {
            continue;
        }
        debug_assert!(cocycle_closed(c, &values, true));
        out.push(IntersectionCocycle { values, mod2: true, evaluations });
    }
    out
}

fn cocycle_closed(c: &SurfaceComplex, values: &[i64], mod2: bool) -> bool {
    c.faces().iter().all(|f| {
        let s = evaluate_cochain_on_walk(values, &f.walk);
        if mod2 {
            s.rem_euclid(2) == 0
        } else {
            s == 0
        }
    })
}

// ---------------------------------------------------------------------------
// Unstable cover plans
// ---------------------------------------------------------------------------

/// A planned cyclic cover twisted by one intersection cocycle, with the
/// predicted counting bound.
#[derive(Debug, Clone)]
pub struct UnstableCoverPlan {
    pub degree: usize,
    pub spec: CoverSpec,
    pub cocycle: IntersectionCocycle,
    pub mu_used: usize,
    pub mu_total: usize,
    /// Predicted N_cover(lambda-) >= N_base(lambda-) + predicted_extra.
    pub predicted_extra: usize,
    pub connected: bool,
    /// True when halving or doubling eps_zero changes the complement
    /// component count or the total cocycle count.
    pub eps_sensitive: bool,
}

/// Builds the degree-n cyclic cover plan from the first surjectivity-capable
/// cocycle of the domain's complement.
pub fn unstable_cover_plan(
    c: &SurfaceComplex,
    d: &NodalDecomposition,
    domain_id: usize,
    degree: usize,
) -> Result<UnstableCoverPlan> {
    if degree < 2 {
        return Err(Error::InvalidComplex("cover degree must be at least 2".into()));
    }
    let mod2 = c.orientation() == Orientation::NonOrientable;
    if mod2 && degree != 2 {
        return Err(Error::InvalidComplex(
            "mod-2 cocycles force degree 2 on non-orientable complexes".into(),
        ));
    }
    let components = intersection_cocycles(c, d, domain_id)?;
    let mu_total: usize = components.iter().map(|cc| cc.cocycles.len()).sum();
    let gcd = |a: i64, b: i64| -> i64 {
        let (mut a, mut b) = (a.abs(), b.abs());
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    };
    let chosen = components
        .iter()
        .flat_map(|cc| cc.cocycles.iter())
        .find(|w| {
            let g = w.evaluations.iter().fold(0i64, |acc, &x| gcd(acc, x));
            g == 1 || (g != 0 && gcd(g, degree as i64) == 1)
        })
        .or_else(|| components.iter().flat_map(|cc| cc.cocycles.iter()).next())
        .cloned()
        .ok_or(Error::NoCocycle)?;
    let spec = CoverSpec::cyclic_from_cocycle(c, degree, &chosen.values)?;
    let cover = build_cover(c, &spec)?;
    // Sensitivity of the complement structure to the zero threshold.
    let eps_sensitive = {
        let probe = |eps: f64| -> Option<(usize, usize)> {
            let dd = nodal_decomposition(c, &d.eigenvector, eps).ok()?;
            if domain_id >= dd.nu() {
                return None;
            }
            let cc = intersection_cocycles(c, &dd, domain_id).ok()?;
            Some((cc.len(), cc.iter().map(|x| x.cocycles.len()).sum()))
        };
        let here = (components.len(), mu_total);
        [0.5 * d.eps_zero, (2.0 * d.eps_zero).min(0.09)]
            .iter()
            .any(|&e| probe(e).map(|v| v != here).unwrap_or(true))
    };
    Ok(UnstableCoverPlan {
        degree,
        spec,
        cocycle: chosen,
        mu_used: 1,
        mu_total,
        predicted_extra: degree - 1,
        connected: cover.is_connected(),
        eps_sensitive,
    })
}

// ---------------------------------------------------------------------------
// JSON exchange
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodalJson {
    pub eps_zero: f64,
    pub zero_set: Vec<usize>,
    pub domains: Vec<NodalDomain>,
}

impl From<&NodalDecomposition> for NodalJson {
    fn from(d: &NodalDecomposition) -> Self {
        NodalJson { eps_zero: d.eps_zero, zero_set: d.zero_set.clone(), domains: d.domains.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_preset, PresetKind};
    use crate::spectra::{assemble, dense_spectrum, LaplaceKind};

    fn cycle12_lambda1_canonical() -> (SurfaceComplex, Vec<f64>) {
        let c = build_preset(PresetKind::Cycle, &[12]).unwrap();
        let op = assemble(&c, LaplaceKind::Graph).unwrap();
        let s = dense_spectrum(&op, 1e-7);
        let cluster = s.clusters[1];
        assert_eq!(cluster, (1, 3));
        let v = canonical_cluster_vector(&op, &s, cluster, 7);
        (c, v)
    }

    #[test]
    fn cycle_lambda1_two_arcs_no_zeros() {
        let (c, v) = cycle12_lambda1_canonical();
        let d = nodal_decomposition(&c, &v, 1e-8).unwrap();
        assert!(d.zero_set.is_empty(), "canonical rotation avoids zero vertices");
        assert_eq!(d.nu(), 2);
        for dom in &d.domains {
            assert_eq!(dom.vertices.len(), 6);
            assert!(dom.topology.graph_like);
            assert_eq!(dom.topology.k, 2);
        }
        // The canonical vector is the half-step cosine: min |phi| = cos(75 deg)
        // times the amplitude.
        let min = v.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
        let max = v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let expect = (75.0f64).to_radians().cos() / (15.0f64).to_radians().cos();
        assert!((min / max - expect).abs() < 1e-6, "{} vs {expect}", min / max);
    }

    #[test]
    fn constant_vector_single_domain() {
        let c = build_preset(PresetKind::Cycle, &[12]).unwrap();
        let d = nodal_decomposition(&c, &vec![1.0; 12], 1e-8).unwrap();
        assert_eq!(d.nu(), 1);
        assert!(matches!(nodal_count_bound_data(&c, &d), Err(Error::SingleDomain)));
        assert!(matches!(
            nodal_decomposition(&c, &vec![0.0; 12], 1e-8),
            Err(Error::AllZeroVector)
        ));
    }

    #[test]
    fn torus_lambda1_two_annular_bands() {
        let c = build_preset(PresetKind::GridTorus, &[12, 12]).unwrap();
        let op = assemble(&c, LaplaceKind::Graph).unwrap();
        let s = dense_spectrum(&op, 1e-7);
        let cluster = s.cluster_at(s.eigenvalues[1], 1e-9).unwrap();
        assert_eq!(cluster.1 - cluster.0, 4, "lambda_1 of the square torus has multiplicity 4");
        let v = canonical_cluster_vector(&op, &s, cluster, 7);
        let d = nodal_decomposition(&c, &v, 1e-8).unwrap();
        assert!(d.zero_set.is_empty());
        assert_eq!(d.nu(), 2);
        for dom in &d.domains {
            assert_eq!(dom.vertices.len(), 72);
            assert!(!dom.topology.graph_like);
            assert_eq!((dom.topology.g, dom.topology.k, dom.topology.l), (0, 2, 0));
            assert_eq!(dom.topology.chi, 0);
            assert_eq!(dom.topology.mu, 1);
        }
        let data = nodal_count_bound_data(&c, &d).unwrap();
        assert_eq!(data.chi_u, 0);
        assert!(data.lower_ok && data.upper_ok);
        assert_eq!(data.nu_s, 2);
        assert!(data.closed);
    }

    #[test]
    fn mu_formula_values_and_errors() {
        assert_eq!(mu_formula(0, 2, 0, true).unwrap(), 1);
        assert_eq!(mu_formula(0, 1, 1, true).unwrap(), 0);
        assert_eq!(mu_formula(1, 1, 1, false).unwrap(), 1);
        assert!(mu_formula(1, 0, 0, true).is_err());
    }

    #[test]
    fn torus_band_single_cocycle() {
        let c = build_preset(PresetKind::GridTorus, &[12, 12]).unwrap();
        let op = assemble(&c, LaplaceKind::Graph).unwrap();
        let s = dense_spectrum(&op, 1e-7);
        let v = canonical_cluster_vector(&op, &s, s.clusters[1], 7);
        let d = nodal_decomposition(&c, &v, 1e-8).unwrap();
        let comps = intersection_cocycles(&c, &d, 0).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].cocycles.len(), 1);
        assert!(comps[0].mu_agrees);
        let w = &comps[0].cocycles[0];
        // Evaluations on the torus winding cycles: rank one, gcd one.
        let nonzero: Vec<i64> = w.evaluations.iter().copied().filter(|&x| x != 0).collect();
        assert!(!nonzero.is_empty());
        let g = nonzero.iter().fold(0i64, |a, &b| {
            let (mut x, mut y) = (a.abs(), b.abs());
            while y != 0 {
                let t = x % y;
                x = y;
                y = t;
            }
            x
        });
        assert_eq!(g, 1);
        // Support avoids the domain's internal edges.
        let u_set: BTreeSet<usize> = d.domains[0].vertices.iter().copied().collect();
        for (e, &val) in w.values.iter().enumerate() {
            if val != 0 {
                let edge = &c.edges()[e];
                assert!(!(u_set.contains(&edge.u) && u_set.contains(&edge.v)));
            }
        }
    }

    #[test]
    fn disc_complement_has_no_cocycles() {
        let c = build_preset(PresetKind::GridTorus, &[8, 8]).unwrap();
        // Vertices minus a 2x2 disc patch: the complement component is the
        // patch, a disc, so mu = 0.
        let patch: BTreeSet<usize> = [0usize, 1, 8, 9].into_iter().collect();
        let big: Vec<usize> = (0..64).filter(|v| !patch.contains(v)).collect();
        // Fake a decomposition with the big domain.
        let mut phi = vec![-1.0; 64];
        for &v in &big {
            phi[v] = 1.0;
        }
        let d = nodal_decomposition(&c, &phi, 1e-8).unwrap();
        let id = d.domains.iter().position(|dom| dom.sign > 0).unwrap();
        let comps = intersection_cocycles(&c, &d, id).unwrap();
        assert_eq!(comps.len(), 1);
        assert!(comps[0].cocycles.is_empty());
        assert!(comps[0].mu_agrees);
        assert_eq!(comps[0].topology.mu, 0);
        assert!(matches!(
            unstable_cover_plan(&c, &d, id, 2),
            Err(Error::NoCocycle)
        ));
    }

    #[test]
    fn genus_two_one_holed_torus_complement_rank_two() {
        let c = build_preset(PresetKind::GenusGPolygon, &[2, 1]).unwrap();
        // Block 1 interior (vertices 16..28 plus glue circle 10,11,14,15)
        // versus block 0 interior: paint block 0's non-glued part positive.
        let mut phi = vec![-1.0; c.n_vertices()];
        for v in 0..16 {
            if ![10usize, 11, 14, 15].contains(&v) {
                phi[v] = 1.0;
            }
        }
        let d = nodal_decomposition(&c, &phi, 1e-8).unwrap();
        let id = d.domains.iter().position(|dom| dom.sign > 0).unwrap();
        let comps = intersection_cocycles(&c, &d, id).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].cocycles.len(), 2, "one-holed torus complement has mu = 2");
        assert!(comps[0].mu_agrees);
    }

    #[test]
    fn cycle_arc_plan_doubles_circle() {
        let (c, v) = cycle12_lambda1_canonical();
        let d = nodal_decomposition(&c, &v, 1e-8).unwrap();
        let plan = unstable_cover_plan(&c, &d, 0, 2).unwrap();
        assert_eq!(plan.mu_used, 1);
        assert_eq!(plan.predicted_extra, 1);
        assert!(plan.connected);
        assert!(!plan.eps_sensitive);
        let cov = build_cover(&c, &plan.spec).unwrap();
        assert_eq!(cov.total().n_vertices(), 24);
        for v in 0..24 {
            assert_eq!(cov.total().adjacency()[v].len(), 2, "double cover is a circle");
        }
    }

    #[test]
    fn moebius_mod2_cocycles() {
        let c = build_preset(PresetKind::Moebius, &[12, 4]).unwrap();
        // Two bands across the width: rows 0..1 positive, rows 2..3 negative.
        let mut phi = vec![0.0; c.n_vertices()];
        for v in 0..c.n_vertices() {
            phi[v] = if v / 12 < 2 { 1.0 } else { -1.0 };
        }
        let d = nodal_decomposition(&c, &phi, 1e-8).unwrap();
        // The flip identifies the two bands' ends; the decomposition is
        // whatever it is, but any cocycles must be mod-2 and closed.
        for id in 0..d.nu() {
            let comps = intersection_cocycles(&c, &d, id).unwrap();
            for cc in comps {
                for w in cc.cocycles {
                    assert!(w.mod2);
                    assert!(w.values.iter().all(|&x| x == 0 || x == 1));
                }
            }
        }
        // Degree > 2 is rejected on non-orientable complexes.
        let err = unstable_cover_plan(&c, &d, 0, 3);
        assert!(err.is_err());
    }
}
