//! Finite covers of a surface complex from permutation voltages on the
//! non-tree edges of a spanning tree, preimage components, subdomain
//! fundamental-group words, and towers of covers.
//!
//! Cover vertices are ordered sheet-major: the lift of base vertex `v` on
//! sheet `i` has id `i * |V| + v`, so the pullback operator is a vertical
//! stack of identity blocks. The lift of base edge `e` starting on sheet `i`
//! has id `e * n + i`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::complex::{SpanningTree, SurfaceComplex};
use crate::error::{Error, Result};
use crate::group::{free_reduce, CosetAction, SubgroupWordSet, Word};

/// Permutation voltage assignment over a spanning tree; tree edges carry the
/// identity. Permutations are 0-based image vectors of length `degree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSpec {
    pub degree: usize,
    pub tree: Vec<usize>,
    pub voltages: BTreeMap<usize, Vec<usize>>,
}

impl CoverSpec {
    /// Identity voltages over a BFS tree: n disjoint copies of the base.
    pub fn identity(c: &SurfaceComplex, degree: usize) -> Result<Self> {
        let tree = SpanningTree::bfs(c, 0)?;
        let id: Vec<usize> = (0..degree).collect();
        let voltages = tree.nontree.iter().map(|&e| (e, id.clone())).collect();
        Ok(CoverSpec { degree, tree: tree.tree_edges.iter().copied().collect(), voltages })
    }

    /// Cyclic cover of degree n twisted by an integer cocycle: non-tree edge
    /// e gets the n-cycle power sigma^omega(e), after gauging omega to vanish
    /// on the tree.
    pub fn cyclic_from_cocycle(
        c: &SurfaceComplex,
        degree: usize,
        cocycle: &[i64],
    ) -> Result<Self> {
        let tree = SpanningTree::bfs(c, 0)?;
        let n = degree as i64;
        let mut voltages = BTreeMap::new();
        for &e in &tree.nontree {
            let total = crate::complex::evaluate_cochain_on_walk(
                cocycle,
                &tree.fundamental_cycle_walk(c, e),
            );
            let shift = total.rem_euclid(n) as usize;
            let perm: Vec<usize> = (0..degree).map(|i| (i + shift) % degree).collect();
            voltages.insert(e, perm);
        }
        Ok(CoverSpec { degree, tree: tree.tree_edges.iter().copied().collect(), voltages })
    }

    /// Product of commuting cyclic twists: voltage(e) = prod_j sigma_j^{w_j(e)}
    /// where sigma_j acts on coordinate j of Z/n_1 x ... x Z/n_m sheets.
    pub fn abelian_from_cocycles(
        c: &SurfaceComplex,
        factors: &[u64],
        cocycles: &[Vec<i64>],
    ) -> Result<Self> {
        if factors.len() != cocycles.len() {
            return Err(Error::InvalidComplex("one cocycle per cyclic factor required".into()));
        }
        let tree = SpanningTree::bfs(c, 0)?;
        let degree: usize = factors.iter().product::<u64>() as usize;
        let strides: Vec<usize> = (0..factors.len())
            .map(|i| factors[i + 1..].iter().product::<u64>() as usize)
            .collect();
        let mut voltages = BTreeMap::new();
        for &e in &tree.nontree {
            let mut perm: Vec<usize> = Vec::with_capacity(degree);
            let shifts: Vec<usize> = cocycles
                .iter()
                .zip(factors)
                .map(|(w, &k)| {
                    let total = crate::complex::evaluate_cochain_on_walk(
                        w,
                        &tree.fundamental_cycle_walk(c, e),
                    );
                    total.rem_euclid(k as i64) as usize
                })
                .collect();
            for x in 0..degree {
                let mut y = x;
                for (j, &k) in factors.iter().enumerate() {
                    let k = k as usize;
                    let digit = y / strides[j] % k;
                    let bumped = (digit + shifts[j]) % k;
                    y = y - digit * strides[j] + bumped * strides[j];
                }
                perm.push(y);
            }
            voltages.insert(e, perm);
        }
        Ok(CoverSpec { degree, tree: tree.tree_edges.iter().copied().collect(), voltages })
    }
}

/// A built cover: total complex, projection data, and the induced monodromy
/// action on the fiber over the tree root.
#[derive(Debug, Clone)]
pub struct Cover {
    base: SurfaceComplex,
    total: SurfaceComplex,
    degree: usize,
    spec: CoverSpec,
    monodromy: CosetAction,
}

impl Cover {
    pub fn base(&self) -> &SurfaceComplex {
        &self.base
    }

    pub fn total(&self) -> &SurfaceComplex {
        &self.total
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn spec(&self) -> &CoverSpec {
        &self.spec
    }

    /// Monodromy action on the fiber over the tree root; one generator per
    /// non-tree edge (ascending id order).
    pub fn monodromy(&self) -> &CosetAction {
        &self.monodromy
    }

    pub fn project_vertex(&self, total_vertex: usize) -> usize {
        total_vertex % self.base.n_vertices()
    }

    pub fn sheet_of(&self, total_vertex: usize) -> usize {
        total_vertex / self.base.n_vertices()
    }

    pub fn lift_vertex(&self, base_vertex: usize, sheet: usize) -> usize {
        sheet * self.base.n_vertices() + base_vertex
    }

    pub fn project_edge(&self, total_edge: usize) -> usize {
        total_edge / self.degree
    }

    pub fn is_connected(&self) -> bool {
        self.monodromy.is_transitive()
    }

    /// Fiber over a base vertex, ascending.
    pub fn fiber(&self, base_vertex: usize) -> Vec<usize> {
        (0..self.degree).map(|i| self.lift_vertex(base_vertex, i)).collect()
    }
}

/// Builds the cover defined by a voltage spec. Fails when the tree is not a
/// spanning tree, a voltage is missing or not a permutation, or some face
/// has non-trivial total voltage (the spec then does not define a cover of
/// the 2-complex).
pub fn build_cover(c: &SurfaceComplex, spec: &CoverSpec) -> Result<Cover> {
    let n = spec.degree;
    if n == 0 {
        return Err(Error::InvalidComplex("cover degree must be positive".into()));
    }
    let nv = c.n_vertices();
    let ne = c.edges().len();
    // Tree validation.
    let tree_set: BTreeSet<usize> = spec.tree.iter().copied().collect();
    if tree_set.len() != nv - 1 || spec.tree.iter().any(|&e| e >= ne) {
        return Err(Error::InvalidComplex("tree is not a spanning tree".into()));
    }
    {
        // Acyclic and spanning: BFS over tree edges reaches everything.
        let mut seen = vec![false; nv];
        seen[0] = true;
        let mut queue = std::collections::VecDeque::from([0usize]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, eid) in &c.adjacency()[v] {
                if tree_set.contains(&eid) && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        if count != nv {
            return Err(Error::InvalidComplex("tree edges do not span the complex".into()));
        }
    }
    // Voltage table, identity on tree edges.
    let identity: Vec<usize> = (0..n).collect();
    let mut sigma: Vec<Vec<usize>> = Vec::with_capacity(ne);
    for e in 0..ne {
        if tree_set.contains(&e) {
            if spec.voltages.contains_key(&e) {
                return Err(Error::InvalidComplex(format!("tree edge {e} carries a voltage")));
            }
            sigma.push(identity.clone());
        } else {
            let p = spec
                .voltages
                .get(&e)
                .ok_or_else(|| Error::InvalidComplex(format!("missing voltage on edge {e}")))?;
            if p.len() != n || !is_perm(p) {
                return Err(Error::InvalidComplex(format!("voltage on edge {e} is not a permutation")));
            }
            sigma.push(p.clone());
        }
    }
    let sigma_inv: Vec<Vec<usize>> = sigma.iter().map(|p| inv_perm(p)).collect();
    // Face condition: total voltage around each face walk is the identity.
    for (fi, f) in c.faces().iter().enumerate() {
        for start in 0..n {
            let mut s = start;
            for &(e, fwd) in &f.walk {
                s = if fwd { sigma[e][s] } else { sigma_inv[e][s] };
            }
            if s != start {
                return Err(Error::FaceVoltageNontrivial { face: fi });
            }
        }
    }
    // Total complex.
    let mut edges = Vec::with_capacity(ne * n);
    let mut infinity = Vec::new();
    for (e, edge) in c.edges().iter().enumerate() {
        for i in 0..n {
            let u = i * nv + edge.u;
            let v = sigma[e][i] * nv + edge.v;
            edges.push((u, v, edge.weight));
            if c.infinity_edges().contains(&e) {
                infinity.push(e * n + i);
            }
        }
    }
    let mut faces = Vec::with_capacity(c.faces().len() * n);
    for f in c.faces() {
        for start in 0..n {
            let mut s = start;
            let mut lifted = Vec::with_capacity(f.walk.len());
            for &(e, fwd) in &f.walk {
                if fwd {
                    lifted.push(e * n + s);
                    s = sigma[e][s];
                } else {
                    s = sigma_inv[e][s];
                    lifted.push(e * n + s);
                }
            }
            faces.push(lifted);
        }
    }
    let mut mass = Vec::with_capacity(nv * n);
    for _ in 0..n {
        mass.extend_from_slice(c.mass());
    }
    let total = SurfaceComplex::new(nv * n, edges, faces, mass, infinity, None)?;
    // Monodromy: one generator per non-tree edge, ascending.
    let nontree: Vec<usize> = (0..ne).filter(|e| !tree_set.contains(e)).collect();
    let monodromy = CosetAction::new(n, nontree.iter().map(|&e| sigma[e].clone()).collect())?;
    Ok(Cover { base: c.clone(), total, degree: n, spec: spec.clone(), monodromy })
}

fn is_perm(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| {
        if x >= seen.len() || seen[x] {
            false
        } else {
            seen[x] = true;
            true
        }
    })
}

fn inv_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// Connected components of the preimage of a connected base subset.
pub fn preimage_components(cov: &Cover, sub: &[usize]) -> Result<Vec<Vec<usize>>> {
    if sub.is_empty() {
        return Err(Error::EmptyOrFullSubset);
    }
    if cov.base().components_of_subset(sub).len() != 1 {
        return Err(Error::DisconnectedSubset);
    }
    let mut lifted = Vec::with_capacity(sub.len() * cov.degree());
    for i in 0..cov.degree() {
        for &v in sub {
            lifted.push(cov.lift_vertex(v, i));
        }
    }
    Ok(cov.total().components_of_subset(&lifted))
}

/// Generator words for the image of the subdomain's fundamental group:
/// one word per non-tree edge of a BFS tree of the subdomain, written over
/// the free generators attached to `tree` (the base spanning tree).
pub fn subdomain_group(
    c: &SurfaceComplex,
    tree: &SpanningTree,
    sub: &[usize],
    basepoint: usize,
) -> Result<SubgroupWordSet> {
    let sub_set: BTreeSet<usize> = sub.iter().copied().collect();
    if !sub_set.contains(&basepoint) {
        return Err(Error::BasepointOutside { v: basepoint });
    }
    if c.components_of_subset(sub).len() != 1 {
        return Err(Error::DisconnectedSubset);
    }
    let induced: BTreeSet<usize> = c.induced_edges(&sub_set).into_iter().collect();
    // BFS tree of the subdomain.
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; c.n_vertices()];
    let mut seen: BTreeSet<usize> = BTreeSet::from([basepoint]);
    let mut sub_tree: BTreeSet<usize> = BTreeSet::new();
    let mut queue = std::collections::VecDeque::from([basepoint]);
    while let Some(v) = queue.pop_front() {
        for &(w, eid) in &c.adjacency()[v] {
            if induced.contains(&eid) && !seen.contains(&w) {
                seen.insert(w);
                parent[w] = Some((v, eid));
                sub_tree.insert(eid);
                queue.push_back(w);
            }
        }
    }
    let path_from_base = |v: usize| -> Vec<(usize, bool)> {
        let mut up = Vec::new();
        let mut cur = v;
        while let Some((p, eid)) = parent[cur] {
            up.push((eid, c.edges()[eid].u == p));
            cur = p;
        }
        up.reverse();
        up
    };
    let mut words = Vec::new();
    for &e in &induced {
        if sub_tree.contains(&e) {
            continue;
        }
        let edge = &c.edges()[e];
        let mut walk = path_from_base(edge.u);
        walk.push((e, true));
        let mut back = path_from_base(edge.v);
        back.reverse();
        for (_, f) in back.iter_mut() {
            *f = !*f;
        }
        walk.extend(back);
        // Read off the non-tree letters of the base tree.
        let mut word: Word = Vec::new();
        for (eid, fwd) in walk {
            if let Some(g) = tree.generator_index(eid) {
                word.push(if fwd { g as i32 + 1 } else { -(g as i32 + 1) });
            }
        }
        let reduced = free_reduce(&word);
        words.push(reduced);
    }
    Ok(SubgroupWordSet { words })
}

// ---------------------------------------------------------------------------
// Towers
// ---------------------------------------------------------------------------

/// A tower M_k -> ... -> M_1 -> M_0; level i covers level i-1.
#[derive(Debug, Clone)]
pub struct Tower {
    base: SurfaceComplex,
    levels: Vec<Cover>,
}

impl Tower {
    pub fn trivial(base: SurfaceComplex) -> Self {
        Tower { base, levels: vec![] }
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn base(&self) -> &SurfaceComplex {
        &self.base
    }

    pub fn levels(&self) -> &[Cover] {
        &self.levels
    }

    pub fn complex_at(&self, k: usize) -> Result<&SurfaceComplex> {
        if k == 0 {
            Ok(&self.base)
        } else if k <= self.levels.len() {
            Ok(self.levels[k - 1].total())
        } else {
            Err(Error::IndexOutOfRange { level: k, height: self.levels.len() })
        }
    }

    /// Composite degree of M_k -> M_0.
    pub fn degree_at(&self, k: usize) -> Result<usize> {
        if k > self.levels.len() {
            return Err(Error::IndexOutOfRange { level: k, height: self.levels.len() });
        }
        Ok(self.levels[..k].iter().map(|c| c.degree()).product())
    }

    pub fn push_level(&mut self, spec: &CoverSpec) -> Result<()> {
        let current = if self.levels.is_empty() {
            self.base.clone()
        } else {
            self.levels.last().unwrap().total().clone()
        };
        let cover = build_cover(&current, spec)?;
        self.levels.push(cover);
        Ok(())
    }

    pub fn project_to_base(&self, level: usize, mut vertex: usize) -> Result<usize> {
        if level > self.levels.len() {
            return Err(Error::IndexOutOfRange { level, height: self.levels.len() });
        }
        for cov in self.levels[..level].iter().rev() {
            vertex = cov.project_vertex(vertex);
        }
        Ok(vertex)
    }

    /// Fiber over base vertex x0 in M_k.
    pub fn fiber_over(&self, k: usize, x0: usize) -> Result<Vec<usize>> {
        let ck = self.complex_at(k)?;
        (0..ck.n_vertices())
            .filter_map(|v| match self.project_to_base(k, v) {
                Ok(b) if b == x0 => Some(Ok(v)),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            })
            .collect()
    }

    /// Weighted graph-metric diameter of the fiber over x0 in M_k. Edge
    /// length is 1/weight (weights are conductances).
    pub fn fiber_diameter(&self, k: usize, x0: usize) -> Result<f64> {
        let fiber = self.fiber_over(k, x0)?;
        let ck = self.complex_at(k)?;
        let mut best: f64 = 0.0;
        for &src in &fiber {
            let dist = dijkstra(ck, src);
            for &dst in &fiber {
                let d = dist[dst];
                if d.is_finite() {
                    best = best.max(d);
                }
            }
        }
        Ok(best)
    }
}

pub fn build_tower(c: &SurfaceComplex, specs: &[CoverSpec]) -> Result<Tower> {
    let mut tower = Tower::trivial(c.clone());
    for spec in specs {
        tower.push_level(spec)?;
    }
    Ok(tower)
}

fn dijkstra(c: &SurfaceComplex, src: usize) -> Vec<f64> {
    let n = c.n_vertices();
    let mut dist = vec![f64::INFINITY; n];
    dist[src] = 0.0;
    // Binary heap over (ordered) distances.
    let mut heap = std::collections::BinaryHeap::new();
    heap.push((std::cmp::Reverse(ordered_float(0.0)), src));
    while let Some((std::cmp::Reverse(d), v)) = heap.pop() {
        let d = d.0;
        if d > dist[v] {
            continue;
        }
        for &(w, eid) in &c.adjacency()[v] {
            let len = 1.0 / c.edges()[eid].weight;
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push((std::cmp::Reverse(ordered_float(nd)), w));
            }
        }
    }
    dist
}

#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap()
    }
}

fn ordered_float(x: f64) -> OrdF64 {
    OrdF64(x)
}

// ---------------------------------------------------------------------------
// Seeded instance generators for the verification suites
// ---------------------------------------------------------------------------

pub mod sampling {
    //! Random (base, cover spec, subdomain) triples. Graph bases carry fully
    //! random voltages; bases with faces get abelian voltages built from
    //! random closed cochains so every face lifts.

    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use super::{CoverSpec, SurfaceComplex};
    use crate::complex::{build_preset, PresetKind, SpanningTree};
    use crate::error::Result;

    pub fn random_base(rng: &mut ChaCha8Rng) -> SurfaceComplex {
        match rng.gen_range(0..5u8) {
            0 => build_preset(PresetKind::Cycle, &[rng.gen_range(6..=16)]).unwrap(),
            1 => build_preset(
                PresetKind::GridTorus,
                &[rng.gen_range(4..=6), rng.gen_range(4..=6)],
            )
            .unwrap(),
            2 => build_preset(PresetKind::Annulus, &[rng.gen_range(5..=8), rng.gen_range(3..=4)])
                .unwrap(),
            3 => build_preset(PresetKind::GenusGPolygon, &[2, 1]).unwrap(),
            _ => random_graph(rng),
        }
    }

    /// Connected multigraph: a spanning path plus random chords.
    fn random_graph(rng: &mut ChaCha8Rng) -> SurfaceComplex {
        let n = rng.gen_range(6..=12usize);
        let mut edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        let extra = rng.gen_range(1..=4usize);
        for _ in 0..extra {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                edges.push((u.min(v), u.max(v), 1.0));
            }
        }
        SurfaceComplex::new(n, edges, vec![], vec![1.0; n], vec![], None).unwrap()
    }

    /// A valid voltage spec of the given degree: free random permutations on
    /// graph bases, abelian cocycle powers otherwise.
    pub fn random_spec(
        c: &SurfaceComplex,
        degree: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<CoverSpec> {
        let tree = SpanningTree::bfs(c, 0)?;
        if c.faces().is_empty() {
            let mut voltages = std::collections::BTreeMap::new();
            for &e in &tree.nontree {
                voltages.insert(e, random_permutation(degree, rng));
            }
            return Ok(CoverSpec {
                degree,
                tree: tree.tree_edges.iter().copied().collect(),
                voltages,
            });
        }
        let support: std::collections::BTreeSet<usize> = (0..c.edges().len()).collect();
        let basis = crate::homology::cocycle_lattice(c, &support);
        let mut cocycle = vec![0i64; c.edges().len()];
        for w in &basis {
            let coef = rng.gen_range(-2i64..=2);
            if coef != 0 {
                for (e, &v) in w.iter().enumerate() {
                    cocycle[e] += coef * v;
                }
            }
        }
        CoverSpec::cyclic_from_cocycle(c, degree, &cocycle)
    }

    pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            p.swap(i, j);
        }
        p
    }

    /// Connected random subdomain grown by BFS from a random seed vertex.
    pub fn random_subdomain(c: &SurfaceComplex, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let n = c.n_vertices();
        let target = rng.gen_range(1..n);
        let seed = rng.gen_range(0..n);
        let mut sub = vec![seed];
        let mut set: std::collections::BTreeSet<usize> = sub.iter().copied().collect();
        while sub.len() < target {
            let mut frontier: Vec<usize> = set
                .iter()
                .flat_map(|&v| c.adjacency()[v].iter().map(|&(w, _)| w))
                .filter(|w| !set.contains(w))
                .collect();
            frontier.sort_unstable();
            frontier.dedup();
            if frontier.is_empty() {
                break;
            }
            let pick = frontier[rng.gen_range(0..frontier.len())];
            set.insert(pick);
            sub.push(pick);
        }
        sub.sort_unstable();
        sub
    }
}

// ---------------------------------------------------------------------------
// JSON exchange
// ---------------------------------------------------------------------------

/// Wire format of a cover spec. Voltage permutations are 1-based image lists
/// keyed by edge id.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverSpecJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    pub degree: usize,
    pub tree: Vec<usize>,
    pub voltages: BTreeMap<usize, Vec<usize>>,
}

impl CoverSpecJson {
    pub fn from_spec(spec: &CoverSpec, base: Option<String>) -> Self {
        CoverSpecJson {
            base,
            degree: spec.degree,
            tree: spec.tree.clone(),
            voltages: spec
                .voltages
                .iter()
                .map(|(&e, p)| (e, p.iter().map(|&x| x + 1).collect()))
                .collect(),
        }
    }

    pub fn into_spec(self) -> Result<CoverSpec> {
        let voltages = self
            .voltages
            .into_iter()
            .map(|(e, p)| {
                let zero_based: Result<Vec<usize>> = p
                    .into_iter()
                    .map(|x| {
                        if x == 0 || x > self.degree {
                            Err(Error::InvalidComplex("voltage image out of range".into()))
                        } else {
                            Ok(x - 1)
                        }
                    })
                    .collect();
                Ok((e, zero_based?))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(CoverSpec { degree: self.degree, tree: self.tree, voltages })
    }
}
