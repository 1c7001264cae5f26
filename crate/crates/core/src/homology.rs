//! First homology of a surface complex over Z or Z/2, and the quotient
//! A = H1(M) / i_*(H1(U)) for a subdomain U.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::{AbelianInvariants, SurfaceComplex};
use crate::error::{Error, Result};
use crate::snf::{column_kernel, snf_invariant_factors, solve_in_basis, IntMat, Mat2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    Z,
    Z2,
}

/// Vertex-by-edge boundary matrix, column e = v - u.
pub fn boundary1(c: &SurfaceComplex) -> IntMat {
    let mut m = IntMat::zeros(c.n_vertices(), c.edges().len());
    for (j, e) in c.edges().iter().enumerate() {
        m.add_to(e.v, j, &BigInt::from(1));
        m.add_to(e.u, j, &BigInt::from(-1));
    }
    m
}

/// Edge-by-face boundary matrix from the directed face walks. An edge
/// traversed twice in the same direction picks up coefficient +-2, which is
/// what produces torsion on non-orientable complexes.
pub fn boundary2(c: &SurfaceComplex) -> IntMat {
    let mut m = IntMat::zeros(c.edges().len(), c.faces().len());
    for (j, f) in c.faces().iter().enumerate() {
        for &(e, forward) in &f.walk {
            m.add_to(e, j, &BigInt::from(if forward { 1 } else { -1 }));
        }
    }
    m
}

/// H1 of the complex. Over Z the result is rank plus invariant factors; over
/// Z/2 the group (Z/2)^d is reported as `torsion = [2; d]`.
pub fn homology_h1(c: &SurfaceComplex, coeffs: Coefficients) -> Result<AbelianInvariants> {
    if !c.is_connected() {
        return Err(Error::DisconnectedComplex);
    }
    h1_with_extra_relations(c, &[], coeffs)
}

/// Invariants of A = H1(M) / i_*(H1(sub)): the fundamental cycles of the
/// induced subgraph are appended to the face relations before reduction.
pub fn quotient_by_subdomain(c: &SurfaceComplex, sub: &[usize]) -> Result<AbelianInvariants> {
    if !c.is_connected() {
        return Err(Error::DisconnectedComplex);
    }
    let comps = c.components_of_subset(sub);
    if comps.len() != 1 {
        return Err(Error::DisconnectedSubset);
    }
    let cycles = subgraph_fundamental_cycles(c, sub);
    h1_with_extra_relations(c, &cycles, Coefficients::Z)
}

/// Fundamental cycles of the subgraph induced by `sub`, as edge-indexed
/// integer chains over the whole complex.
pub fn subgraph_fundamental_cycles(c: &SurfaceComplex, sub: &[usize]) -> Vec<Vec<i64>> {
    let sub_set: std::collections::BTreeSet<usize> = sub.iter().copied().collect();
    let induced = c.induced_edges(&sub_set);
    let induced_set: std::collections::BTreeSet<usize> = induced.iter().copied().collect();
    // Spanning forest by BFS over induced edges.
    let mut parent: Vec<Option<(usize, usize, bool)>> = vec![None; c.n_vertices()];
    let mut seen = std::collections::BTreeSet::new();
    let mut tree_edges = std::collections::BTreeSet::new();
    for &root in sub {
        if seen.contains(&root) {
            continue;
        }
        seen.insert(root);
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, eid) in &c.adjacency()[v] {
                if induced_set.contains(&eid) && !seen.contains(&w) {
                    seen.insert(w);
                    parent[w] = Some((v, eid, c.edges()[eid].u == v));
                    tree_edges.insert(eid);
                    queue.push_back(w);
                }
            }
        }
    }
    let path_to_root = |mut v: usize, chain: &mut Vec<i64>, sign: i64| {
        while let Some((p, eid, forward)) = parent[v] {
            // forward: edge points p -> v.
            chain[eid] += if forward { -sign } else { sign };
            v = p;
        }
    };
    let mut cycles = Vec::new();
    for &eid in &induced {
        if tree_edges.contains(&eid) {
            continue;
        }
        let e = &c.edges()[eid];
        let mut chain = vec![0i64; c.edges().len()];
        chain[eid] += 1;
        // Close up: walk v back to root, then root down to u.
        path_to_root(e.v, &mut chain, 1);
        path_to_root(e.u, &mut chain, -1);
        cycles.push(chain);
    }
    cycles
}

fn h1_with_extra_relations(
    c: &SurfaceComplex,
    extra_cycles: &[Vec<i64>],
    coeffs: Coefficients,
) -> Result<AbelianInvariants> {
    let ne = c.edges().len();
    match coeffs {
        Coefficients::Z => {
            let d1 = boundary1(c);
            let kernel = column_kernel(&d1);
            let k = kernel.len();
            let mut basis = IntMat::zeros(ne, k);
            for (j, v) in kernel.iter().enumerate() {
                for i in 0..ne {
                    basis.set(i, j, v[i].clone());
                }
            }
            // Relations: face boundaries plus the extra cycles, expressed in
            // kernel coordinates.
            let d2 = boundary2(c);
            let n_rel = d2.cols + extra_cycles.len();
            let mut rel = IntMat::zeros(k, n_rel);
            for j in 0..d2.cols {
                let col = d2.column(j);
                let x = solve_in_basis(&basis, &col).ok_or_else(|| {
                    Error::InvalidComplex("face boundary outside cycle space".into())
                })?;
                for i in 0..k {
                    rel.set(i, j, x[i].clone());
                }
            }
            for (jj, cyc) in extra_cycles.iter().enumerate() {
                let col: Vec<BigInt> = cyc.iter().map(|&x| BigInt::from(x)).collect();
                let x = solve_in_basis(&basis, &col).ok_or_else(|| {
                    Error::InvalidComplex("subdomain cycle outside cycle space".into())
                })?;
                for i in 0..k {
                    rel.set(i, d2.cols + jj, x[i].clone());
                }
            }
            let factors = snf_invariant_factors(&rel);
            let rank = k - factors.iter().filter(|d| !d.is_zero()).count();
            let torsion: Vec<u64> = factors
                .iter()
                .filter(|d| **d > BigInt::from(1))
                .map(|d| d.to_u64().expect("desk-scale torsion"))
                .collect();
            Ok(AbelianInvariants { rank, torsion })
        }
        Coefficients::Z2 => {
            let mut d1 = Mat2::zeros(c.n_vertices(), ne);
            for (j, e) in c.edges().iter().enumerate() {
                // Mod 2 a self-cancelling pair would vanish; endpoints differ
                // here since self-loops are rejected at construction.
                d1.set(e.u, j, true);
                d1.set(e.v, j, true);
            }
            let mut d2 = Mat2::zeros(ne, c.faces().len() + extra_cycles.len());
            for (j, f) in c.faces().iter().enumerate() {
                for &(e, _) in &f.walk {
                    let cur = d2.get(e, j);
                    d2.set(e, j, !cur);
                }
            }
            for (jj, cyc) in extra_cycles.iter().enumerate() {
                for (e, &v) in cyc.iter().enumerate() {
                    if v.rem_euclid(2) == 1 {
                        d2.set(e, c.faces().len() + jj, true);
                    }
                }
            }
            let dim = ne - d1.rank() - d2.rank();
            Ok(AbelianInvariants { rank: 0, torsion: vec![2; dim] })
        }
    }
}

/// Lattice basis of closed integer 1-cochains supported on the given edges:
/// cochains whose coboundary vanishes on every face. Returned as full-length
/// edge vectors (zero outside the support).
pub fn cocycle_lattice(
    c: &SurfaceComplex,
    support: &std::collections::BTreeSet<usize>,
) -> Vec<Vec<i64>> {
    let cols: Vec<usize> = support.iter().copied().collect();
    let col_of: std::collections::BTreeMap<usize, usize> =
        cols.iter().enumerate().map(|(j, &e)| (e, j)).collect();
    // Constraint rows: faces that touch the support.
    let mut rows: Vec<Vec<(usize, i64)>> = Vec::new();
    for f in c.faces() {
        let mut row: std::collections::BTreeMap<usize, i64> = Default::default();
        let mut touches = false;
        for &(e, fwd) in &f.walk {
            if let Some(&j) = col_of.get(&e) {
                touches = true;
                *row.entry(j).or_insert(0) += if fwd { 1 } else { -1 };
            }
        }
        if touches {
            rows.push(row.into_iter().collect());
        }
    }
    let mut m = IntMat::zeros(rows.len(), cols.len());
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            m.set(i, j, BigInt::from(v));
        }
    }
    let kernel = column_kernel(&m);
    kernel
        .into_iter()
        .map(|v| {
            let mut full = vec![0i64; c.edges().len()];
            for (j, val) in v.iter().enumerate() {
                full[cols[j]] = val.to_i64().expect("desk-scale cocycle entries");
            }
            full
        })
        .collect()
}

/// Basis of closed mod-2 1-cochains supported on the given edges.
pub fn cocycle_lattice_mod2(
    c: &SurfaceComplex,
    support: &std::collections::BTreeSet<usize>,
) -> Vec<Vec<i64>> {
    let cols: Vec<usize> = support.iter().copied().collect();
    let col_of: std::collections::BTreeMap<usize, usize> =
        cols.iter().enumerate().map(|(j, &e)| (e, j)).collect();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for f in c.faces() {
        let mut row: std::collections::BTreeMap<usize, i64> = Default::default();
        let mut touches = false;
        for &(e, _) in &f.walk {
            if let Some(&j) = col_of.get(&e) {
                touches = true;
                *row.entry(j).or_insert(0) += 1;
            }
        }
        if touches {
            rows.push(row.into_iter().filter(|&(_, v)| v % 2 == 1).map(|(j, _)| j).collect());
        }
    }
    let mut m = Mat2::zeros(rows.len(), cols.len());
    for (i, row) in rows.iter().enumerate() {
        for &j in row {
            m.set(i, j, true);
        }
    }
    m.kernel()
        .into_iter()
        .map(|v| {
            let mut full = vec![0i64; c.edges().len()];
            for (j, &on) in v.iter().enumerate() {
                if on {
                    full[cols[j]] = 1;
                }
            }
            full
        })
        .collect()
}

/// Floating-point rank of the cycle space, used as an independent oracle in
/// tests: rank H1 = E - rank d1 - rank d2 for complexes without torsion in
/// their chain groups.
pub fn cycle_space_rank_f64(c: &SurfaceComplex) -> usize {
    let d1 = boundary1(c);
    let d2 = boundary2(c);
    let r1 = rank_f64(&d1);
    let r2 = rank_f64(&d2);
    c.edges().len() - r1 - r2
}

fn rank_f64(m: &IntMat) -> usize {
    let mut a: Vec<Vec<f64>> = (0..m.rows)
        .map(|i| (0..m.cols).map(|j| m.get(i, j).to_f64().unwrap()).collect())
        .collect();
    let mut rank = 0;
    for col in 0..m.cols {
        let Some(p) = (rank..m.rows)
            .filter(|&i| a[i][col].abs() > 1e-9)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
        else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][col];
        for i in 0..m.rows {
            if i != rank && a[i][col].abs() > 0.0 {
                let f = a[i][col] / pivot;
                for j in col..m.cols {
                    a[i][j] -= f * a[rank][j];
                }
            }
        }
        rank += 1;
        if rank == m.rows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_preset, PresetKind};

    #[test]
    fn torus_h1_rank_two() {
        let c = build_preset(PresetKind::GridTorus, &[6, 6]).unwrap();
        let h = homology_h1(&c, Coefficients::Z).unwrap();
        assert_eq!(h, AbelianInvariants { rank: 2, torsion: vec![] });
    }

    #[test]
    fn genus_two_h1_rank_four() {
        let c = build_preset(PresetKind::GenusGPolygon, &[2, 1]).unwrap();
        let h = homology_h1(&c, Coefficients::Z).unwrap();
        assert_eq!(h, AbelianInvariants { rank: 4, torsion: vec![] });
    }

    #[test]
    fn moebius_h1_rank_one() {
        let c = build_preset(PresetKind::Moebius, &[8, 3]).unwrap();
        let h = homology_h1(&c, Coefficients::Z).unwrap();
        assert_eq!(h, AbelianInvariants { rank: 1, torsion: vec![] });
    }

    #[test]
    fn cycle_and_annulus_h1() {
        let c = build_preset(PresetKind::Cycle, &[12]).unwrap();
        assert_eq!(homology_h1(&c, Coefficients::Z).unwrap().rank, 1);
        let a = build_preset(PresetKind::Annulus, &[8, 3]).unwrap();
        assert_eq!(homology_h1(&a, Coefficients::Z).unwrap().rank, 1);
    }

    /// Klein bottle glued by hand: 4x4 grid, y-wrap composed with an x-flip.
    /// H1 must be Z + Z/2, and Z/2 coefficients give (Z/2)^2.
    #[test]
    fn klein_bottle_torsion() {
        let a = 4usize;
        let b = 4usize;
        let flip = |x: usize| (a - x % a) % a;
        let vid = |x: usize, y: usize| -> usize {
            if y == b {
                flip(x)
            } else {
                y * a + x % a
            }
        };
        let h = |x: usize, y: usize| y * a + x % a;
        let v = |x: usize, y: usize| a * b + y * a + x % a;
        let mut edges = Vec::new();
        for y in 0..b {
            for x in 0..a {
                edges.push((vid(x, y), vid(x + 1, y), 1.0));
            }
        }
        for y in 0..b {
            for x in 0..a {
                edges.push((vid(x, y), vid(x, y + 1), 1.0));
            }
        }
        let mut faces = Vec::new();
        for y in 0..b {
            for x in 0..a {
                // The top edge of the seam quads is traversed through the flip:
                // it joins flip(x+1) = a-x-1 and flip(x) = a-x in row 0.
                let top = if y + 1 == b { h(a - 1 - x, 0) } else { h(x, y + 1) };
                faces.push(vec![h(x, y), v(x + 1, y), top, v(x, y)]);
            }
        }
        let c = SurfaceComplex::new(a * b, edges, faces, vec![1.0; a * b], vec![], None).unwrap();
        assert_eq!(c.euler_characteristic(), 0);
        assert_eq!(c.orientation(), crate::complex::Orientation::NonOrientable);
        let h1 = homology_h1(&c, Coefficients::Z).unwrap();
        assert_eq!(h1, AbelianInvariants { rank: 1, torsion: vec![2] });
        let h1_2 = homology_h1(&c, Coefficients::Z2).unwrap();
        assert_eq!(h1_2.torsion.len(), 2);
    }

    #[test]
    fn quotient_examples_on_torus() {
        let c = build_preset(PresetKind::GridTorus, &[6, 6]).unwrap();
        // Contractible disc patch: trivial image, A = Z^2.
        let disc: Vec<usize> = vec![0, 1, 6, 7];
        let q = quotient_by_subdomain(&c, &disc).unwrap();
        assert_eq!(q, AbelianInvariants { rank: 2, torsion: vec![] });
        // Essential ring around one cycle: A = Z.
        let ring: Vec<usize> = (0..6).collect();
        let q = quotient_by_subdomain(&c, &ring).unwrap();
        assert_eq!(q, AbelianInvariants { rank: 1, torsion: vec![] });
        // Whole complex: trivial quotient.
        let all: Vec<usize> = (0..c.n_vertices()).collect();
        let q = quotient_by_subdomain(&c, &all).unwrap();
        assert!(q.is_trivial());
    }

    #[test]
    fn h1_matches_f64_rank_oracle() {
        for c in [
            build_preset(PresetKind::Cycle, &[12]).unwrap(),
            build_preset(PresetKind::GridTorus, &[5, 4]).unwrap(),
            build_preset(PresetKind::Annulus, &[6, 3]).unwrap(),
            build_preset(PresetKind::Moebius, &[6, 3]).unwrap(),
            build_preset(PresetKind::GenusGPolygon, &[2, 1]).unwrap(),
        ] {
            let h = homology_h1(&c, Coefficients::Z).unwrap();
            assert_eq!(h.rank, cycle_space_rank_f64(&c));
        }
    }

    #[test]
    fn disconnected_complex_rejected() {
        let c = SurfaceComplex::new(
            4,
            vec![(0, 1, 1.0), (2, 3, 1.0)],
            vec![],
            vec![1.0; 4],
            vec![],
            None,
        )
        .unwrap();
        assert!(matches!(homology_h1(&c, Coefficients::Z), Err(Error::DisconnectedComplex)));
    }
}
