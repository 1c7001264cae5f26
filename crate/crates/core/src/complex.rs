//! Weighted 2-dimensional cell complexes: presets, Euler characteristic,
//! subsurface classification.
//!
//! A [`SurfaceComplex`] is a finite multigraph with positive edge weights and
//! vertex masses, plus an optional set of faces given as cyclic edge lists.
//! Edges marked "at infinity" model the circles at infinity of a finite-type
//! surface while keeping the complex finite.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orientability status of a complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Orientable,
    NonOrientable,
    GraphOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// One face as a cyclic edge list together with the derived directed walk.
/// `walk[i] = (edge, forward)` with `forward` meaning the edge is traversed
/// from `u` to `v`.
#[derive(Debug, Clone)]
pub struct Face {
    pub edges: Vec<usize>,
    pub walk: Vec<(usize, bool)>,
}

#[derive(Debug, Clone)]
pub struct SurfaceComplex {
    n_vertices: usize,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    mass: Vec<f64>,
    infinity_edges: BTreeSet<usize>,
    coords: Option<Vec<[f64; 3]>>,
    orientation: Orientation,
    adjacency: Vec<Vec<(usize, usize)>>,
    edge_faces: Vec<Vec<usize>>,
}

/// Topological signature of a classified subsurface.
///
/// For genuine surface pieces `chi = 2 - 2g - k - l` (orientable) or
/// `2 - g - k - l` (non-orientable). Graph-like pieces set `graph_like` and
/// reinterpret `g` as the cycle rank and `k` as the number of cut edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainTopology {
    pub orientable: bool,
    pub graph_like: bool,
    pub g: usize,
    pub k: usize,
    pub l: usize,
    pub chi: i64,
    pub mu: usize,
}

/// Invariant factors of a finitely generated abelian group:
/// `Z^rank + Z/k_1 + ... + Z/k_m` with `k_1 | k_2 | ... | k_m`, each >= 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianInvariants {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianInvariants {
    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn order(&self) -> Option<u64> {
        if self.rank > 0 {
            None
        } else {
            Some(self.torsion.iter().product())
        }
    }
}

/// `mu` of a complement component from its signature; the orientable case is
/// `2g + k - 1 + (l-1) v 0`, the non-orientable one `g + k - 1 + (l-1) v 0`.
pub fn mu_from_signature(g: usize, k: usize, l: usize, orientable: bool) -> usize {
    let handles = if orientable { 2 * g } else { g };
    handles + k.saturating_sub(1) + l.saturating_sub(1)
}

impl SurfaceComplex {
    /// Validates and builds a complex. Checks: endpoints in range, weights and
    /// masses positive, faces chain into closed walks, every edge lies in at
    /// most two faces and marked edges in at most one.
    pub fn new(
        n_vertices: usize,
        edges: Vec<(usize, usize, f64)>,
        faces: Vec<Vec<usize>>,
        mass: Vec<f64>,
        infinity_edges: Vec<usize>,
        coords: Option<Vec<[f64; 3]>>,
    ) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::InvalidComplex("no vertices".into()));
        }
        if mass.len() != n_vertices {
            return Err(Error::InvalidComplex(format!(
                "mass length {} != vertex count {}",
                mass.len(),
                n_vertices
            )));
        }
        if let Some(c) = &coords {
            if c.len() != n_vertices {
                return Err(Error::InvalidComplex("coords length mismatch".into()));
            }
        }
        for (i, m) in mass.iter().enumerate() {
            if !(*m > 0.0) {
                return Err(Error::InvalidComplex(format!("mass[{i}] = {m} not positive")));
            }
        }
        let edges: Vec<Edge> = edges
            .into_iter()
            .map(|(u, v, weight)| Edge { u, v, weight })
            .collect();
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n_vertices || e.v >= n_vertices {
                return Err(Error::InvalidComplex(format!("edge {i} endpoint out of range")));
            }
            if e.u == e.v {
                return Err(Error::InvalidComplex(format!("edge {i} is a self-loop")));
            }
            if !(e.weight > 0.0) {
                return Err(Error::InvalidComplex(format!("edge {i} weight not positive")));
            }
        }
        let mut built_faces = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let walk = chain_face(&edges, f)
                .ok_or_else(|| Error::InvalidComplex(format!("face {fi} does not chain into a closed walk")))?;
            built_faces.push(Face { edges: f.clone(), walk });
        }
        let mut edge_faces = vec![Vec::new(); edges.len()];
        for (fi, f) in built_faces.iter().enumerate() {
            for &e in &f.edges {
                if e >= edges.len() {
                    return Err(Error::InvalidComplex(format!("face {fi} uses unknown edge {e}")));
                }
                edge_faces[e].push(fi);
            }
        }
        let infinity_edges: BTreeSet<usize> = infinity_edges.into_iter().collect();
        for &e in &infinity_edges {
            if e >= edges.len() {
                return Err(Error::InvalidComplex(format!("infinity edge {e} unknown")));
            }
        }
        for (e, fs) in edge_faces.iter().enumerate() {
            let cap = if infinity_edges.contains(&e) { 1 } else { 2 };
            if fs.len() > cap {
                return Err(Error::NonSurface { edge: e, count: fs.len() });
            }
        }
        let mut adjacency = vec![Vec::new(); n_vertices];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, i));
            adjacency[e.v].push((e.u, i));
        }
        let orientation = detect_orientation(&built_faces, &edge_faces);
        Ok(SurfaceComplex {
            n_vertices,
            edges,
            faces: built_faces,
            mass,
            infinity_edges,
            coords,
            orientation,
            adjacency,
            edge_faces,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn infinity_edges(&self) -> &BTreeSet<usize> {
        &self.infinity_edges
    }

    pub fn coords(&self) -> Option<&[[f64; 3]]> {
        self.coords.as_deref()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn adjacency(&self) -> &[Vec<(usize, usize)>] {
        &self.adjacency
    }

    pub fn edge_faces(&self) -> &[Vec<usize>] {
        &self.edge_faces
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Connected components of the 1-skeleton, each sorted ascending.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_of(&self.adjacency, &(0..self.n_vertices).collect::<Vec<_>>())
    }

    /// Connected components of the subcomplex induced by `sub`.
    pub fn components_of_subset(&self, sub: &[usize]) -> Vec<Vec<usize>> {
        components_of(&self.adjacency, sub)
    }

    /// Edge ids with both endpoints in `sub`.
    pub fn induced_edges(&self, sub: &BTreeSet<usize>) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| sub.contains(&self.edges[i].u) && sub.contains(&self.edges[i].v))
            .collect()
    }

    /// Face ids all of whose edges are induced by `sub`.
    pub fn induced_faces(&self, sub: &BTreeSet<usize>) -> Vec<usize> {
        let induced: BTreeSet<usize> = self.induced_edges(sub).into_iter().collect();
        (0..self.faces.len())
            .filter(|&f| self.faces[f].edges.iter().all(|e| induced.contains(e)))
            .collect()
    }

    /// Edges with exactly one endpoint in `sub`.
    pub fn cut_edges(&self, sub: &BTreeSet<usize>) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| sub.contains(&self.edges[i].u) != sub.contains(&self.edges[i].v))
            .collect()
    }

    /// Classifies the subsurface induced by `sub`: orientability, genus,
    /// boundary circles split into doors (`k`) and exits at infinity (`l`),
    /// Euler characteristic and the cocycle count `mu`.
    pub fn classify_subsurface(&self, sub: &[usize]) -> Result<DomainTopology> {
        let sub_set: BTreeSet<usize> = sub.iter().copied().collect();
        if sub_set.is_empty() {
            return Err(Error::EmptyOrFullSubset);
        }
        for &v in &sub_set {
            if v >= self.n_vertices {
                return Err(Error::InvalidComplex(format!("subset vertex {v} out of range")));
            }
        }
        let comps = self.components_of_subset(sub);
        if comps.len() != 1 {
            return Err(Error::DisconnectedSubset);
        }
        let edges = self.induced_edges(&sub_set);
        let faces = self.induced_faces(&sub_set);
        let chi = sub_set.len() as i64 - edges.len() as i64 + faces.len() as i64;

        if faces.is_empty() {
            // Graph piece: `g` is the cycle rank, doors are the cut edges and
            // exits the marked edges inside the piece.
            let g = edges.len() + 1 - sub_set.len();
            let k = self.cut_edges(&sub_set).len();
            let l = edges.iter().filter(|e| self.infinity_edges.contains(e)).count();
            let mu = g + k.saturating_sub(1) + l.saturating_sub(1);
            return Ok(DomainTopology { orientable: true, graph_like: true, g, k, l, chi, mu });
        }

        // Face incidence within the subcomplex.
        let face_set: BTreeSet<usize> = faces.iter().copied().collect();
        let mut sub_edge_faces: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &e in &edges {
            sub_edge_faces.insert(e, Vec::new());
        }
        for &f in &faces {
            for &e in &self.faces[f].edges {
                sub_edge_faces.get_mut(&e).unwrap().push(f);
            }
        }
        for (&e, fs) in &sub_edge_faces {
            if fs.len() > 2 {
                return Err(Error::NonSurface { edge: e, count: fs.len() });
            }
        }
        let boundary_edges: Vec<usize> = sub_edge_faces
            .iter()
            .filter(|(_, fs)| fs.len() == 1)
            .map(|(&e, _)| e)
            .collect();
        let circles = trace_boundary_circles(self, &boundary_edges, &face_set)?;
        let mut k = 0usize;
        let mut l = 0usize;
        for circle in &circles {
            if circle.iter().all(|e| self.infinity_edges.contains(e)) {
                l += 1;
            } else {
                k += 1;
            }
        }
        let orientable = orient_face_subset(&self.faces, &sub_edge_faces, &face_set);
        let holes = (k + l) as i64;
        let g = if orientable {
            let two_g = 2 - chi - holes;
            if two_g < 0 || two_g % 2 != 0 {
                return Err(Error::InvalidSignature { g: two_g, k: k as i64, l: l as i64 });
            }
            (two_g / 2) as usize
        } else {
            let gg = 2 - chi - holes;
            if gg < 0 {
                return Err(Error::InvalidSignature { g: gg, k: k as i64, l: l as i64 });
            }
            gg as usize
        };
        let mu = if k + l == 0 {
            if orientable { 2 * g } else { g }
        } else {
            mu_from_signature(g, k, l, orientable)
        };
        Ok(DomainTopology { orientable, graph_like: false, g, k, l, chi, mu })
    }
}

/// Chains a cyclic edge list into a directed closed walk, or `None`.
fn chain_face(edges: &[Edge], face: &[usize]) -> Option<Vec<(usize, bool)>> {
    if face.len() < 2 {
        return None;
    }
    for &e in face {
        if e >= edges.len() {
            return None;
        }
    }
    let first = &edges[face[0]];
    'dir: for &start_forward in &[true, false] {
        let mut walk = vec![(face[0], start_forward)];
        let start = if start_forward { first.u } else { first.v };
        let mut head = if start_forward { first.v } else { first.u };
        for &e in &face[1..] {
            let edge = &edges[e];
            if edge.u == head {
                walk.push((e, true));
                head = edge.v;
            } else if edge.v == head {
                walk.push((e, false));
                head = edge.u;
            } else {
                continue 'dir;
            }
        }
        if head == start {
            return Some(walk);
        }
    }
    None
}

fn components_of(adjacency: &[Vec<(usize, usize)>], sub: &[usize]) -> Vec<Vec<usize>> {
    let sub_set: BTreeSet<usize> = sub.iter().copied().collect();
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::new();
    for &s in &sub_set {
        if seen.contains(&s) {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([s]);
        seen.insert(s);
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &(w, _) in &adjacency[v] {
                if sub_set.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Tries to orient all faces coherently: shared edges traversed in opposite
/// directions. Returns false when no coherent orientation exists.
fn detect_orientation(faces: &[Face], edge_faces: &[Vec<usize>]) -> Orientation {
    if faces.is_empty() {
        return Orientation::GraphOnly;
    }
    let all: BTreeSet<usize> = (0..faces.len()).collect();
    let mut by_edge: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, fs) in edge_faces.iter().enumerate() {
        by_edge.insert(e, fs.clone());
    }
    if orient_face_subset(faces, &by_edge, &all) {
        Orientation::Orientable
    } else {
        Orientation::NonOrientable
    }
}

fn orient_face_subset(
    faces: &[Face],
    sub_edge_faces: &BTreeMap<usize, Vec<usize>>,
    face_set: &BTreeSet<usize>,
) -> bool {
    // Edge direction of each traversal, per face.
    let mut assign: BTreeMap<usize, i8> = BTreeMap::new();
    for &root in face_set {
        if assign.contains_key(&root) {
            continue;
        }
        assign.insert(root, 1);
        let mut queue = VecDeque::from([root]);
        while let Some(f) = queue.pop_front() {
            let of = assign[&f];
            // A face traversing the same edge twice in the same direction is
            // immediately non-orientable.
            for &(e, _) in &faces[f].walk {
                let dirs: Vec<bool> = faces[f]
                    .walk
                    .iter()
                    .filter(|(e2, _)| *e2 == e)
                    .map(|&(_, d)| d)
                    .collect();
                if dirs.len() == 2 && dirs[0] == dirs[1] {
                    return false;
                }
            }
            for &(e, dir) in &faces[f].walk {
                let Some(others) = sub_edge_faces.get(&e) else { continue };
                for &f2 in others {
                    if f2 == f || !face_set.contains(&f2) {
                        continue;
                    }
                    let dir2 = faces[f2]
                        .walk
                        .iter()
                        .find(|(e2, _)| *e2 == e)
                        .map(|&(_, d)| d)
                        .unwrap();
                    // Coherence: o_f * dir = -o_f2 * dir2.
                    let want = -of * if dir == dir2 { 1 } else { -1 };
                    match assign.get(&f2) {
                        Some(&o2) => {
                            if o2 != want {
                                return false;
                            }
                        }
                        None => {
                            assign.insert(f2, want);
                            queue.push_back(f2);
                        }
                    }
                }
            }
        }
    }
    true
}

/// Walks boundary circles of a subsurface by corner-walking around vertices
/// inside the induced faces; correct also at pinched vertices.
fn trace_boundary_circles(
    c: &SurfaceComplex,
    boundary_edges: &[usize],
    face_set: &BTreeSet<usize>,
) -> Result<Vec<Vec<usize>>> {
    let bset: BTreeSet<usize> = boundary_edges.iter().copied().collect();
    let mut sub_edge_faces: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &f in face_set {
        for &e in &c.faces[f].edges {
            sub_edge_faces.entry(e).or_default().push(f);
        }
    }
    // Directed boundary half-edges still to visit: (edge, entering-vertex).
    let mut pending: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &e in &bset {
        pending.insert((e, c.edges[e].u));
        pending.insert((e, c.edges[e].v));
    }
    let mut circles = Vec::new();
    while let Some(&(e0, v0)) = pending.iter().next() {
        let mut circle = Vec::new();
        let mut cur = (e0, v0);
        loop {
            if !pending.remove(&cur) {
                return Err(Error::InvalidComplex(
                    "boundary walk revisited a half-edge; subsurface boundary is not a union of circles".into(),
                ));
            }
            circle.push(cur.0);
            let (e, at) = cur;
            // Fan around `at` starting from `e` through induced faces until
            // the next boundary edge.
            let mut cur_edge = e;
            let mut cur_face = sub_edge_faces[&e][0];
            let next = loop {
                let other = other_edge_at_corner(&c.faces[cur_face], &c.edges, cur_edge, at)
                    .ok_or_else(|| Error::InvalidComplex("face corner lookup failed".into()))?;
                if bset.contains(&other) {
                    break other;
                }
                let fs = &sub_edge_faces[&other];
                let next_face = *fs
                    .iter()
                    .find(|&&f| f != cur_face)
                    .ok_or_else(|| Error::InvalidComplex("interior edge with one face during boundary walk".into()))?;
                cur_edge = other;
                cur_face = next_face;
            };
            let nv = opposite_endpoint(&c.edges[next], at);
            cur = (next, nv);
            // Mark leaving half-edge of `next` as used: entering at `at`.
            pending.remove(&(next, at));
            if next == e0 && nv == v0 {
                break;
            }
            if circle.len() > 4 * c.edges.len() {
                return Err(Error::InvalidComplex("boundary walk failed to close".into()));
            }
            if cur == (e0, v0) {
                break;
            }
        }
        circles.push(circle);
    }
    Ok(circles)
}

fn opposite_endpoint(e: &Edge, v: usize) -> usize {
    if e.u == v {
        e.v
    } else {
        e.u
    }
}

/// In `face`, finds the edge adjacent to `edge` at corner vertex `at`.
fn other_edge_at_corner(face: &Face, edges: &[Edge], edge: usize, at: usize) -> Option<usize> {
    let walk = &face.walk;
    let n = walk.len();
    for i in 0..n {
        let (e, fwd) = walk[i];
        if e != edge {
            continue;
        }
        let head = if fwd { edges[e].v } else { edges[e].u };
        let tail = if fwd { edges[e].u } else { edges[e].v };
        if head == at {
            return Some(walk[(i + 1) % n].0);
        }
        if tail == at {
            return Some(walk[(i + n - 1) % n].0);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Spanning trees of the 1-skeleton
// ---------------------------------------------------------------------------

/// BFS spanning tree. The non-tree edges, in ascending id order, are the free
/// generators of the fundamental group of the 1-skeleton at `root`; generator
/// `i` (1-based) traverses non-tree edge `nontree[i-1]` forward.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    pub root: usize,
    pub tree_edges: BTreeSet<usize>,
    parent: Vec<Option<(usize, usize)>>,
    pub nontree: Vec<usize>,
    generator_of_edge: BTreeMap<usize, usize>,
}

impl SpanningTree {
    pub fn bfs(c: &SurfaceComplex, root: usize) -> Result<Self> {
        if root >= c.n_vertices() {
            return Err(Error::InvalidComplex(format!("root {root} out of range")));
        }
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; c.n_vertices()];
        let mut seen = vec![false; c.n_vertices()];
        seen[root] = true;
        let mut tree_edges = BTreeSet::new();
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, eid) in &c.adjacency()[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, eid));
                    tree_edges.insert(eid);
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::DisconnectedComplex);
        }
        let nontree: Vec<usize> =
            (0..c.edges().len()).filter(|e| !tree_edges.contains(e)).collect();
        let generator_of_edge: BTreeMap<usize, usize> =
            nontree.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Ok(SpanningTree { root, tree_edges, parent, nontree, generator_of_edge })
    }

    /// Generator index (0-based) of a non-tree edge.
    pub fn generator_index(&self, edge: usize) -> Option<usize> {
        self.generator_of_edge.get(&edge).copied()
    }

    /// Directed walk from `root` to `v` through the tree: (edge, forward).
    pub fn path_from_root(&self, c: &SurfaceComplex, v: usize) -> Vec<(usize, bool)> {
        let mut up = Vec::new();
        let mut cur = v;
        while let Some((p, eid)) = self.parent[cur] {
            // Traversal p -> cur is forward iff the edge is stored (p, cur).
            up.push((eid, c.edges()[eid].u == p));
            cur = p;
        }
        up.reverse();
        up
    }

    /// The fundamental cycle of non-tree edge `e` as a directed walk:
    /// root -> u, e forward, v -> root.
    pub fn fundamental_cycle_walk(&self, c: &SurfaceComplex, e: usize) -> Vec<(usize, bool)> {
        let edge = &c.edges()[e];
        let mut walk = self.path_from_root(c, edge.u);
        walk.push((e, true));
        let mut back = self.path_from_root(c, edge.v);
        back.reverse();
        for (eid, f) in back.iter_mut() {
            let _ = eid;
            *f = !*f;
        }
        walk.extend(back);
        walk
    }
}

/// Sum of a cochain (value per edge) over a directed walk.
pub fn evaluate_cochain_on_walk(cochain: &[i64], walk: &[(usize, bool)]) -> i64 {
    walk.iter().map(|&(e, fwd)| if fwd { cochain[e] } else { -cochain[e] }).sum()
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    Cycle,
    GridTorus,
    GenusGPolygon,
    Annulus,
    Moebius,
    Path,
}

impl std::str::FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(PresetKind::Cycle),
            "grid_torus" => Ok(PresetKind::GridTorus),
            "genus_g_polygon" => Ok(PresetKind::GenusGPolygon),
            "annulus" => Ok(PresetKind::Annulus),
            "moebius" => Ok(PresetKind::Moebius),
            "path" => Ok(PresetKind::Path),
            _ => Err(Error::InvalidParams { kind: s.into(), reason: "unknown preset kind".into() }),
        }
    }
}

/// Builds one of the preset complexes with unit weights and masses,
/// deterministic vertex ordering and documented Euler characteristic.
pub fn build_preset(kind: PresetKind, params: &[usize]) -> Result<SurfaceComplex> {
    match kind {
        PresetKind::Cycle => {
            let [n] = expect_params::<1>("cycle", params)?;
            if n < 3 {
                return invalid("cycle", "length must be >= 3");
            }
            let edges = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
            SurfaceComplex::new(n, edges, vec![], vec![1.0; n], vec![], None)
        }
        PresetKind::Path => {
            let [n] = expect_params::<1>("path", params)?;
            if n < 2 {
                return invalid("path", "length must be >= 2");
            }
            let edges = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
            SurfaceComplex::new(n, edges, vec![], vec![1.0; n], vec![], None)
        }
        PresetKind::GridTorus => {
            let [a, b] = expect_params::<2>("grid_torus", params)?;
            if a < 3 || b < 3 {
                return invalid("grid_torus", "grid must be at least 3x3");
            }
            let g = TorusGrid::new(a, b);
            SurfaceComplex::new(g.nv(), g.edges(), g.faces(), vec![1.0; g.nv()], vec![], None)
        }
        PresetKind::Annulus => {
            let [a, w] = expect_params::<2>("annulus", params)?;
            if a < 3 || w < 2 {
                return invalid("annulus", "need circumference >= 3 and width >= 2");
            }
            build_band(a, w, false)
        }
        PresetKind::Moebius => {
            let [a, w] = expect_params::<2>("moebius", params)?;
            if a < 3 || w < 2 {
                return invalid("moebius", "need circumference >= 3 and width >= 2");
            }
            build_band(a, w, true)
        }
        PresetKind::GenusGPolygon => {
            let [g, r] = expect_params::<2>("genus_g_polygon", params)?;
            if g < 1 || r < 1 {
                return invalid("genus_g_polygon", "need genus >= 1 and refinement >= 1");
            }
            build_genus(g, 4 * r)
        }
    }
}

fn expect_params<const N: usize>(kind: &str, params: &[usize]) -> Result<[usize; N]> {
    params
        .try_into()
        .map_err(|_| Error::InvalidParams { kind: kind.into(), reason: format!("expected {N} parameters") })
}

fn invalid(kind: &str, reason: &str) -> Result<SurfaceComplex> {
    Err(Error::InvalidParams { kind: kind.into(), reason: reason.into() })
}

/// Index helper for an `a` x `b` torus grid. Horizontal edges come first
/// (`y*a + x`), vertical edges after (`a*b + y*a + x`).
struct TorusGrid {
    a: usize,
    b: usize,
}

impl TorusGrid {
    fn new(a: usize, b: usize) -> Self {
        TorusGrid { a, b }
    }

    fn nv(&self) -> usize {
        self.a * self.b
    }

    fn vid(&self, x: usize, y: usize) -> usize {
        (y % self.b) * self.a + (x % self.a)
    }

    fn h(&self, x: usize, y: usize) -> usize {
        (y % self.b) * self.a + (x % self.a)
    }

    fn v(&self, x: usize, y: usize) -> usize {
        self.a * self.b + (y % self.b) * self.a + (x % self.a)
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut edges = Vec::with_capacity(2 * self.nv());
        for y in 0..self.b {
            for x in 0..self.a {
                edges.push((self.vid(x, y), self.vid(x + 1, y), 1.0));
            }
        }
        for y in 0..self.b {
            for x in 0..self.a {
                edges.push((self.vid(x, y), self.vid(x, y + 1), 1.0));
            }
        }
        edges
    }

    fn face_at(&self, x: usize, y: usize) -> Vec<usize> {
        vec![self.h(x, y), self.v(x + 1, y), self.h(x, y + 1), self.v(x, y)]
    }

    fn faces(&self) -> Vec<Vec<usize>> {
        let mut faces = Vec::with_capacity(self.nv());
        for y in 0..self.b {
            for x in 0..self.a {
                faces.push(self.face_at(x, y));
            }
        }
        faces
    }
}

/// Annulus or Moebius band as an `a` x `w` grid strip, seam glued straight or
/// with a vertical flip. Boundary edges are marked at infinity.
fn build_band(a: usize, w: usize, flip: bool) -> Result<SurfaceComplex> {
    let vid = |x: usize, y: usize| y * a + x;
    let nv = a * w;
    let mut edges = Vec::new();
    // Horizontal edges, row-major: id = y*a + x; x = a-1 is the seam edge.
    for y in 0..w {
        for x in 0..a {
            if x + 1 < a {
                edges.push((vid(x, y), vid(x + 1, y), 1.0));
            } else if flip {
                edges.push((vid(a - 1, y), vid(0, w - 1 - y), 1.0));
            } else {
                edges.push((vid(a - 1, y), vid(0, y), 1.0));
            }
        }
    }
    // Vertical edges: id = a*w + y*a + x for y in 0..w-1.
    let voff = a * w;
    for y in 0..w - 1 {
        for x in 0..a {
            edges.push((vid(x, y), vid(x, y + 1), 1.0));
        }
    }
    let h = |x: usize, y: usize| y * a + x;
    let v = |x: usize, y: usize| voff + y * a + x;
    let mut faces = Vec::new();
    for y in 0..w - 1 {
        for x in 0..a {
            if x + 1 < a {
                faces.push(vec![h(x, y), v(x + 1, y), h(x, y + 1), v(x, y)]);
            } else if flip {
                // Seam quad between rows y and y+1 glues to flipped rows.
                faces.push(vec![h(a - 1, y), v(0, w - 2 - y), h(a - 1, y + 1), v(a - 1, y)]);
            } else {
                faces.push(vec![h(a - 1, y), v(0, y), h(a - 1, y + 1), v(a - 1, y)]);
            }
        }
    }
    // Mark every edge with fewer than two faces as a circle at infinity.
    let probe = SurfaceComplex::new(nv, edges.clone(), faces.clone(), vec![1.0; nv], vec![], None)?;
    let marked: Vec<usize> = (0..edges.len()).filter(|&e| probe.edge_faces()[e].len() < 2).collect();
    SurfaceComplex::new(nv, edges, faces, vec![1.0; nv], marked, None)
}

/// Closed orientable genus-g surface as a chain of g holed grid tori glued
/// along their hole circles with reversed orientation.
fn build_genus(g: usize, s: usize) -> Result<SurfaceComplex> {
    if g == 1 {
        return build_preset(PresetKind::GridTorus, &[s, s]);
    }
    let grid = TorusGrid::new(s, s);
    let m = s / 2;
    // Per-block hole corners in removed-face walk order.
    let left_corners = |_: usize| [(0usize, 0usize), (1, 0), (1, 1), (0, 1)];
    let right_corners = |_: usize| [(m, m), (m + 1, m), (m + 1, m + 1), (m, m + 1)];
    let left_edges = |gr: &TorusGrid| [gr.h(0, 0), gr.v(1, 0), gr.h(0, 1), gr.v(0, 0)];
    let right_edges = |gr: &TorusGrid| [gr.h(m, m), gr.v(m + 1, m), gr.h(m, m + 1), gr.v(m, m)];

    let mut vmaps: Vec<Vec<usize>> = Vec::new();
    let mut emaps: Vec<Vec<usize>> = Vec::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut faces: Vec<Vec<usize>> = Vec::new();
    let mut next_vertex = 0usize;

    for b in 0..g {
        let mut vmap = vec![usize::MAX; grid.nv()];
        if b > 0 {
            // Identify this block's left hole with the previous block's right
            // hole, reversing the circle: l0-r0, l1-r3, l2-r2, l3-r1.
            let lc = left_corners(b);
            let rc = right_corners(b - 1);
            let pairs = [(lc[0], rc[0]), (lc[1], rc[3]), (lc[2], rc[2]), (lc[3], rc[1])];
            for ((lx, ly), (rx, ry)) in pairs {
                vmap[grid.vid(lx, ly)] = vmaps[b - 1][grid.vid(rx, ry)];
            }
        }
        for v in 0..grid.nv() {
            if vmap[v] == usize::MAX {
                vmap[v] = next_vertex;
                next_vertex += 1;
            }
        }
        let mut emap = vec![usize::MAX; 2 * grid.nv()];
        if b > 0 {
            let le = left_edges(&grid);
            let re = right_edges(&grid);
            // Edge identification induced by the vertex pairs above.
            let pairs = [(le[0], re[3]), (le[1], re[2]), (le[2], re[1]), (le[3], re[0])];
            for (l, r) in pairs {
                emap[l] = emaps[b - 1][r];
            }
        }
        for (local, (u, v, wt)) in grid.edges().into_iter().enumerate() {
            if emap[local] == usize::MAX {
                emap[local] = edges.len();
                edges.push((vmap[u], vmap[v], wt));
            }
        }
        let mut holes: Vec<(usize, usize)> = vec![];
        if b > 0 {
            holes.push((0, 0));
        }
        if b + 1 < g {
            holes.push((m, m));
        }
        if b == 0 && g > 1 {
            // Leftmost block only uses its right hole.
        }
        for y in 0..s {
            for x in 0..s {
                if holes.contains(&(x, y)) {
                    continue;
                }
                let f = grid.face_at(x, y);
                faces.push(f.into_iter().map(|e| emap[e]).collect());
            }
        }
        vmaps.push(vmap);
        emaps.push(emap);
    }
    SurfaceComplex::new(next_vertex, edges, faces, vec![1.0; next_vertex], vec![], None)
}

// ---------------------------------------------------------------------------
// JSON exchange format
// ---------------------------------------------------------------------------

/// Wire format of a complex; field names are fixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexJson {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub faces: Vec<Vec<usize>>,
    pub mass: Vec<f64>,
    pub infinity_edges: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[f64; 3]>>,
}

impl From<&SurfaceComplex> for ComplexJson {
    fn from(c: &SurfaceComplex) -> Self {
        ComplexJson {
            vertices: c.n_vertices,
            edges: c.edges.iter().map(|e| (e.u, e.v, e.weight)).collect(),
            faces: c.faces.iter().map(|f| f.edges.clone()).collect(),
            mass: c.mass.clone(),
            infinity_edges: c.infinity_edges.iter().copied().collect(),
            coords: c.coords.clone(),
        }
    }
}

impl TryFrom<ComplexJson> for SurfaceComplex {
    type Error = Error;

    fn try_from(j: ComplexJson) -> Result<Self> {
        SurfaceComplex::new(j.vertices, j.edges, j.faces, j.mass, j.infinity_edges, j.coords)
    }
}
