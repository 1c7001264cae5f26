//! Coset actions of finitely presented groups on finite fibers: orbits,
//! minimal generating numbers, and low-index subgroup enumeration by
//! exhaustive search over transitive permutation representations.
//!
//! Subgroups of index n are represented by pointed transitive actions on
//! {1..n} up to relabelings fixing the basepoint; the canonical form is the
//! lexicographically minimal permutation tuple.

use serde::{Deserialize, Serialize};

use crate::complex::AbelianInvariants;
use crate::error::{Error, Result};

/// Word over group generators: letters +-1..+-rank, negative for inverses.
pub type Word = Vec<i32>;

/// Reduces a word freely (cancels adjacent x x^-1 pairs).
pub fn free_reduce(word: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for &l in word {
        if l == 0 {
            continue;
        }
        if let Some(&last) = out.last() {
            if last == -l {
                out.pop();
                continue;
            }
        }
        out.push(l);
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Presentation {
    pub rank: usize,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn free(rank: usize) -> Self {
        Presentation { rank, relators: vec![] }
    }

    /// Closed orientable genus-g surface group: one relator, the product of
    /// commutators [a_1,b_1]...[a_g,b_g] of length 4g.
    pub fn surface(genus: usize) -> Self {
        let mut relator = Vec::with_capacity(4 * genus);
        for i in 0..genus {
            let a = (2 * i + 1) as i32;
            let b = (2 * i + 2) as i32;
            relator.extend_from_slice(&[a, b, -a, -b]);
        }
        Presentation { rank: 2 * genus, relators: vec![relator] }
    }

    pub fn validate(&self) -> Result<()> {
        for rel in &self.relators {
            for &l in rel {
                if l == 0 || l.unsigned_abs() as usize > self.rank {
                    return Err(Error::InvalidWord { letter: l, rank: self.rank });
                }
            }
        }
        Ok(())
    }
}

/// Words generating a subgroup, stored freely reduced.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SubgroupWordSet {
    pub words: Vec<Word>,
}

impl SubgroupWordSet {
    pub fn new(words: Vec<Word>) -> Self {
        SubgroupWordSet { words: words.iter().map(|w| free_reduce(w)).collect() }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Right action of group generators on {1..n}; the basepoint is point 1
/// (index 0 internally).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetAction {
    degree: usize,
    perms: Vec<Vec<usize>>,
    inverse: Vec<Vec<usize>>,
}

impl CosetAction {
    pub fn new(degree: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        for p in &perms {
            if p.len() != degree || !is_permutation(p) {
                return Err(Error::InvalidComplex("coset action generator is not a permutation".into()));
            }
        }
        let inverse = perms.iter().map(|p| invert(p)).collect();
        Ok(CosetAction { degree, perms, inverse })
    }

    /// Regular action of Z/k_1 x ... x Z/k_m on itself, one generator per
    /// factor, points ordered lexicographically by tuple.
    pub fn regular_abelian(factors: &[u64]) -> Result<Self> {
        let order: u64 = factors.iter().product();
        if factors.iter().any(|&k| k == 0) || order == 0 {
            return Err(Error::InvalidComplex("zero cyclic factor".into()));
        }
        let n = order as usize;
        let m = factors.len();
        let strides: Vec<usize> = (0..m)
            .map(|i| factors[i + 1..].iter().product::<u64>() as usize)
            .collect();
        let mut perms = Vec::with_capacity(m);
        for g in 0..m {
            let mut p = vec![0usize; n];
            for (x, slot) in p.iter_mut().enumerate() {
                // Decode coordinate g, bump it mod k_g, re-encode.
                let k = factors[g] as usize;
                let digit = x / strides[g] % k;
                let bumped = (digit + 1) % k;
                *slot = x - digit * strides[g] + bumped * strides[g];
            }
            perms.push(p);
        }
        CosetAction::new(n, perms)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_generators(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn apply_letter(&self, point: usize, letter: i32) -> Result<usize> {
        let g = letter.unsigned_abs() as usize;
        if letter == 0 || g > self.perms.len() {
            return Err(Error::InvalidWord { letter, rank: self.perms.len() });
        }
        Ok(if letter > 0 { self.perms[g - 1][point] } else { self.inverse[g - 1][point] })
    }

    pub fn apply_word(&self, point: usize, word: &[i32]) -> Result<usize> {
        let mut p = point;
        for &l in word {
            p = self.apply_letter(p, l)?;
        }
        Ok(p)
    }

    /// The permutation realized by a word.
    pub fn word_permutation(&self, word: &[i32]) -> Result<Vec<usize>> {
        (0..self.degree).map(|i| self.apply_word(i, word)).collect()
    }

    pub fn is_transitive(&self) -> bool {
        orbit_of(self.degree, &self.perms, &self.inverse, 0).len() == self.degree
    }

    pub fn relators_hold(&self, p: &Presentation) -> Result<bool> {
        for rel in &p.relators {
            for i in 0..self.degree {
                if self.apply_word(i, rel)? != i {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

fn orbit_of(n: usize, perms: &[Vec<usize>], inverse: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    let mut out = vec![start];
    while let Some(x) = queue.pop_front() {
        for p in perms.iter().chain(inverse.iter()) {
            let y = p[x];
            if !seen[y] {
                seen[y] = true;
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Orbit partition of {1..n} under the subgroup generated by the words.
pub fn orbits(a: &CosetAction, gens: &SubgroupWordSet) -> Result<Vec<Vec<usize>>> {
    let mut dsu: Vec<usize> = (0..a.degree).collect();
    fn find(dsu: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while dsu[r] != r {
            r = dsu[r];
        }
        let mut c = x;
        while dsu[c] != r {
            let next = dsu[c];
            dsu[c] = r;
            c = next;
        }
        r
    }
    for w in &gens.words {
        for i in 0..a.degree {
            let j = a.apply_word(i, w)?;
            let (ri, rj) = (find(&mut dsu, i), find(&mut dsu, j));
            if ri != rj {
                dsu[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut buckets: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..a.degree {
        let r = find(&mut dsu, i);
        buckets.entry(r).or_default().push(i);
    }
    Ok(buckets.into_values().collect())
}

/// True iff every generator word fixes the basepoint.
pub fn fixed_identity_coset(a: &CosetAction, gens: &SubgroupWordSet) -> Result<bool> {
    for w in &gens.words {
        if a.apply_word(0, w)? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimal number of generators of the coset space: the smallest k such that
/// k elements together with the basepoint stabilizer act transitively.
/// Exhaustive over coset representatives, exact for degree <= cap.
pub fn min_generators_coset(a: &CosetAction, cap: usize) -> Result<usize> {
    let n = a.degree;
    if n > cap {
        return Err(Error::DegreeTooLarge { degree: n, cap });
    }
    if !a.is_transitive() {
        return Err(Error::InvalidComplex("min_generators_coset requires a transitive action".into()));
    }
    if n == 1 {
        return Ok(0);
    }
    // Transversal permutations t[x] with 0 -> x, by BFS words.
    let id: Vec<usize> = (0..n).collect();
    let mut transversal: Vec<Option<Vec<usize>>> = vec![None; n];
    transversal[0] = Some(id.clone());
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let tx = transversal[x].clone().unwrap();
        for (dir, table) in [(1i32, &a.perms), (-1i32, &a.inverse)] {
            let _ = dir;
            for p in table.iter() {
                let y = p[x];
                if transversal[y].is_none() {
                    transversal[y] = Some(compose(&tx, p));
                    queue.push_back(y);
                }
            }
        }
    }
    let transversal: Vec<Vec<usize>> = transversal.into_iter().map(|t| t.unwrap()).collect();
    // Schreier generators of the basepoint stabilizer: t[x] g t[x.g]^{-1}.
    let mut stab: Vec<Vec<usize>> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for x in 0..n {
        for p in &a.perms {
            let y = p[x];
            let s = compose(&compose(&transversal[x], p), &invert(&transversal[y]));
            debug_assert_eq!(s[0], 0);
            if s != id && seen.insert(s.clone()) {
                stab.push(s);
            }
        }
    }
    let stab_inv: Vec<Vec<usize>> = stab.iter().map(|p| invert(p)).collect();
    // Try k-subsets of candidate coset representatives sigma_x, x != 0.
    let reaches_all = |extra: &[usize]| -> bool {
        let mut perms: Vec<&Vec<usize>> = stab.iter().chain(stab_inv.iter()).collect();
        let extra_perms: Vec<Vec<usize>> = extra
            .iter()
            .flat_map(|&x| [transversal[x].clone(), invert(&transversal[x])])
            .collect();
        perms.extend(extra_perms.iter());
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = std::collections::VecDeque::from([0usize]);
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for p in &perms {
                let y = p[x];
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    };
    for k in 1..n {
        let mut found = false;
        for_each_combination(n - 1, k, &mut |subset| {
            if !found {
                let points: Vec<usize> = subset.iter().map(|&i| i + 1).collect();
                if reaches_all(&points) {
                    found = true;
                }
            }
        });
        if found {
            return Ok(k);
        }
    }
    Ok(n - 1)
}

/// Calls `f` on every k-subset of {0..n-1} in lexicographic order.
fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        f(&subset);
        // Advance.
        let mut i = k;
        while i > 0 {
            i -= 1;
            if subset[i] + 1 <= n - (k - i) {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return;
            }
        }
        if k == 0 {
            return;
        }
    }
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // Right action convention: (a then b)[x] = b[a[x]].
    a.iter().map(|&x| b[x]).collect()
}

/// Lemma-preu4-style report: orbit count versus the bound k - l + 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitBoundReport {
    pub k: usize,
    pub l: usize,
    pub orbits: usize,
    pub bound: usize,
    pub holds: bool,
}

pub fn orbit_lower_bound_check(
    a: &CosetAction,
    gens: &SubgroupWordSet,
    cap: usize,
) -> Result<OrbitBoundReport> {
    let k = min_generators_coset(a, cap)?;
    let l = gens.len();
    let orbit_count = orbits(a, gens)?.len();
    let bound = (k + 1).saturating_sub(l).max(1);
    Ok(OrbitBoundReport { k, l, orbits: orbit_count, bound, holds: orbit_count >= bound })
}

/// Minimal generating number of a finite abelian group: the maximal number
/// of cyclic factors sharing a common prime divisor.
pub fn abelian_mu(inv: &AbelianInvariants) -> Result<usize> {
    if inv.rank > 0 {
        return Err(Error::InfiniteGroup { rank: inv.rank });
    }
    let mut primes = std::collections::BTreeSet::new();
    for &k in &inv.torsion {
        let mut k = k;
        let mut p = 2u64;
        while p * p <= k {
            if k % p == 0 {
                primes.insert(p);
                while k % p == 0 {
                    k /= p;
                }
            }
            p += 1;
        }
        if k > 1 {
            primes.insert(k);
        }
    }
    let mu = primes
        .iter()
        .map(|&p| inv.torsion.iter().filter(|&&k| k % p == 0).count())
        .max()
        .unwrap_or(0);
    Ok(mu)
}

// ---------------------------------------------------------------------------
// Subgroup enumeration
// ---------------------------------------------------------------------------

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(factorial(n));
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permutations(&mut cur, n, &mut out);
    out.sort_unstable();
    out
}

fn heap_permutations(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permutations(cur, k - 1, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// All index-n subgroups of the presented group as pointed transitive coset
/// actions, in deterministic (lexicographically canonical) order.
pub fn enumerate_index_n(p: &Presentation, n: usize, bound: usize) -> Result<Vec<CosetAction>> {
    p.validate()?;
    if n == 0 || n > bound {
        return Err(Error::BoundExceeded { n, bound });
    }
    let r = p.rank;
    if n == 1 {
        let perms = vec![vec![0usize]; r];
        return Ok(vec![CosetAction::new(1, perms)?]);
    }
    let perms = all_permutations(n);
    let total = (perms.len() as f64).powi(r as i32);
    if total > 6e8 {
        return Err(Error::BoundExceeded { n, bound });
    }
    // Relabelings of {2..n} (index 0 fixed), with precomputed inverses.
    let relabelings: Vec<(Vec<usize>, Vec<usize>)> = all_permutations(n - 1)
        .into_iter()
        .map(|p| {
            let mut q = vec![0usize; n];
            for (i, &x) in p.iter().enumerate() {
                q[i + 1] = x + 1;
            }
            let qi = invert(&q);
            (q, qi)
        })
        .filter(|(q, _)| q.iter().enumerate().any(|(i, &x)| i != x))
        .collect();
    let mut found: Vec<Vec<&Vec<usize>>> = Vec::new();
    let mut counter = vec![0usize; r];
    let np = perms.len();
    'outer: loop {
        let tuple: Vec<&Vec<usize>> = counter.iter().map(|&i| &perms[i]).collect();
        if tuple_is_action(&tuple, p, n) && tuple_is_transitive(&tuple, n) && tuple_is_canonical(&tuple, &relabelings) {
            found.push(tuple);
        }
        // Mixed-radix increment.
        let mut i = r;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            counter[i] += 1;
            if counter[i] < np {
                break;
            }
            counter[i] = 0;
        }
    }
    found.sort();
    found
        .into_iter()
        .map(|tuple| CosetAction::new(n, tuple.into_iter().cloned().collect()))
        .collect()
}

fn tuple_is_action(tuple: &[&Vec<usize>], p: &Presentation, n: usize) -> bool {
    for rel in &p.relators {
        for start in 0..n {
            let mut x = start;
            for &l in rel {
                let g = l.unsigned_abs() as usize - 1;
                x = if l > 0 {
                    tuple[g][x]
                } else {
                    tuple[g].iter().position(|&y| y == x).unwrap()
                };
            }
            if x != start {
                return false;
            }
        }
    }
    true
}

fn tuple_is_transitive(tuple: &[&Vec<usize>], n: usize) -> bool {
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0usize];
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for p in tuple {
            let y = p[x];
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
            // Inverse direction.
            let z = p.iter().position(|&v| v == x).unwrap();
            if !seen[z] {
                seen[z] = true;
                count += 1;
                stack.push(z);
            }
        }
    }
    count == n
}

/// Canonical iff the tuple is lexicographically minimal among conjugates by
/// relabelings fixing the basepoint. The conjugate of p by rel sends x to
/// rel[p[rel^-1[x]]].
fn tuple_is_canonical(tuple: &[&Vec<usize>], relabelings: &[(Vec<usize>, Vec<usize>)]) -> bool {
    for (rel, rel_inv) in relabelings {
        let mut cmp = std::cmp::Ordering::Equal;
        'tup: for p in tuple {
            for x in 0..p.len() {
                let conj = rel[p[rel_inv[x]]];
                match conj.cmp(&p[x]) {
                    std::cmp::Ordering::Equal => continue,
                    other => {
                        cmp = other;
                        break 'tup;
                    }
                }
            }
        }
        if cmp == std::cmp::Ordering::Less {
            return false;
        }
    }
    true
}

/// Containment of pointed subgroups: the degree-2n action's subgroup lies in
/// the degree-n action's subgroup iff a pointed equivariant map exists.
pub fn pointed_containment(small_index: &CosetAction, large_index: &CosetAction) -> bool {
    // small_index: index n (larger subgroup); large_index: index 2n.
    let n_big = large_index.degree;
    let mut f: Vec<Option<usize>> = vec![None; n_big];
    f[0] = Some(0);
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let fx = f[x].unwrap();
        for g in 0..large_index.perms.len() {
            for dir in [1i32, -1] {
                let y = if dir > 0 { large_index.perms[g][x] } else { large_index.inverse[g][x] };
                let fy = if dir > 0 {
                    small_index.perms[g][fx]
                } else {
                    small_index.inverse[g][fx]
                };
                match f[y] {
                    None => {
                        f[y] = Some(fy);
                        queue.push_back(y);
                    }
                    Some(existing) => {
                        if existing != fy {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Ledger for the containment bound: every index-2n subgroup lies in at most
/// 2n-1 index-n subgroups, giving u(2n) >= a(n)/(2n-1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountReport {
    pub n: usize,
    pub a_n: usize,
    pub a_2n: usize,
    pub max_containments: usize,
    pub containment_bound: usize,
    pub bound_holds: bool,
    pub unstable_lower_bound: f64,
}

pub fn intermediate_count_check(p: &Presentation, n: usize, bound: usize) -> Result<CountReport> {
    let index_n = enumerate_index_n(p, n, bound)?;
    let index_2n = enumerate_index_n(p, 2 * n, bound)?;
    let mut max_containments = 0usize;
    for b in &index_2n {
        let count = index_n.iter().filter(|a| pointed_containment(a, b)).count();
        max_containments = max_containments.max(count);
    }
    let containment_bound = 2 * n - 1;
    Ok(CountReport {
        n,
        a_n: index_n.len(),
        a_2n: index_2n.len(),
        max_containments,
        containment_bound,
        bound_holds: max_containments <= containment_bound,
        unstable_lower_bound: index_n.len() as f64 / containment_bound as f64,
    })
}

// ---------------------------------------------------------------------------
// JSON exchange
// ---------------------------------------------------------------------------

/// Wire format: permutations are 1-based image lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CosetActionJson {
    pub degree: usize,
    pub perms: Vec<Vec<usize>>,
}

impl From<&CosetAction> for CosetActionJson {
    fn from(a: &CosetAction) -> Self {
        CosetActionJson {
            degree: a.degree,
            perms: a.perms.iter().map(|p| p.iter().map(|&x| x + 1).collect()).collect(),
        }
    }
}

impl TryFrom<CosetActionJson> for CosetAction {
    type Error = Error;

    fn try_from(j: CosetActionJson) -> Result<Self> {
        let perms = j
            .perms
            .into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|x| {
                        if x == 0 || x > j.degree {
                            Err(Error::InvalidComplex("permutation image out of range".into()))
                        } else {
                            Ok(x - 1)
                        }
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CosetAction::new(j.degree, perms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic_action(n: usize) -> CosetAction {
        let shift: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        CosetAction::new(n, vec![shift]).unwrap()
    }

    #[test]
    fn orbit_examples() {
        let a = cyclic_action(6);
        // <g^2> splits into odd and even classes.
        let parts = orbits(&a, &SubgroupWordSet::new(vec![vec![1, 1]])).unwrap();
        assert_eq!(parts, vec![vec![0, 2, 4], vec![1, 3, 5]]);
        // Empty set: singletons.
        let parts = orbits(&a, &SubgroupWordSet::default()).unwrap();
        assert_eq!(parts.len(), 6);
        // Full cycle: one orbit.
        let parts = orbits(&a, &SubgroupWordSet::new(vec![vec![1]])).unwrap();
        assert_eq!(parts.len(), 1);
    }

    /// Brute-force oracle: close a point set under repeated word application.
    fn orbit_count_oracle(a: &CosetAction, gens: &SubgroupWordSet) -> usize {
        let mut owner: Vec<usize> = (0..a.degree()).collect();
        loop {
            let mut changed = false;
            for w in &gens.words {
                for i in 0..a.degree() {
                    let j = a.apply_word(i, w).unwrap();
                    let (oi, oj) = (owner[i], owner[j]);
                    if oi != oj {
                        let keep = oi.min(oj);
                        for o in owner.iter_mut() {
                            if *o == oi.max(oj) {
                                *o = keep;
                            }
                        }
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let set: std::collections::BTreeSet<usize> = owner.into_iter().collect();
        set.len()
    }

    #[test]
    fn orbits_match_oracle() {
        let a = CosetAction::regular_abelian(&[2, 4]).unwrap();
        for gens in [
            SubgroupWordSet::new(vec![vec![1]]),
            SubgroupWordSet::new(vec![vec![2]]),
            SubgroupWordSet::new(vec![vec![1, 2]]),
            SubgroupWordSet::new(vec![vec![2, 2]]),
        ] {
            assert_eq!(orbits(&a, &gens).unwrap().len(), orbit_count_oracle(&a, &gens));
        }
    }

    #[test]
    fn fixed_identity_examples() {
        let a = cyclic_action(2);
        assert!(!fixed_identity_coset(&a, &SubgroupWordSet::new(vec![vec![1]])).unwrap());
        assert!(fixed_identity_coset(&a, &SubgroupWordSet::new(vec![vec![1, 1]])).unwrap());
    }

    #[test]
    fn min_generators_regular_actions() {
        let klein = CosetAction::regular_abelian(&[2, 2]).unwrap();
        assert_eq!(min_generators_coset(&klein, 24).unwrap(), 2);
        let z6 = CosetAction::regular_abelian(&[6]).unwrap();
        assert_eq!(min_generators_coset(&z6, 24).unwrap(), 1);
        let z2z4 = CosetAction::regular_abelian(&[2, 4]).unwrap();
        assert_eq!(min_generators_coset(&z2z4, 24).unwrap(), 2);
        let trivial = CosetAction::new(1, vec![vec![0]]).unwrap();
        assert_eq!(min_generators_coset(&trivial, 24).unwrap(), 0);
        let e8 = CosetAction::regular_abelian(&[2, 2, 2]).unwrap();
        assert_eq!(min_generators_coset(&e8, 24).unwrap(), 3);
    }

    #[test]
    fn min_generators_degree_cap() {
        let a = cyclic_action(25);
        assert!(matches!(min_generators_coset(&a, 24), Err(Error::DegreeTooLarge { .. })));
    }

    #[test]
    fn preu4_bound_instances() {
        // (Z/2)^3 regular, single-element subsets: every element has order 2,
        // so there are at least 4 orbits, and the bound k-l+1 = 3 holds.
        let a = CosetAction::regular_abelian(&[2, 2, 2]).unwrap();
        for w in [vec![1], vec![2], vec![3], vec![1, 2], vec![1, 2, 3]] {
            let r = orbit_lower_bound_check(&a, &SubgroupWordSet::new(vec![w]), 24).unwrap();
            assert!(r.holds);
            assert_eq!(r.bound, 3);
            assert!(r.orbits >= 4);
        }
        // Z/2 x Z/4, gens = {(1,0)}: 4 orbits >= 2 - 1 + 1.
        let a = CosetAction::regular_abelian(&[2, 4]).unwrap();
        let r = orbit_lower_bound_check(&a, &SubgroupWordSet::new(vec![vec![1]]), 24).unwrap();
        assert_eq!(r.orbits, 4);
        assert_eq!(r.bound, 2);
        assert!(r.holds);
    }

    #[test]
    fn abelian_mu_values() {
        let mu = |t: &[u64]| abelian_mu(&AbelianInvariants { rank: 0, torsion: t.to_vec() }).unwrap();
        assert_eq!(mu(&[2, 4]), 2);
        assert_eq!(mu(&[6]), 1);
        assert_eq!(mu(&[]), 0);
        assert_eq!(mu(&[2, 2, 2]), 3);
        assert_eq!(mu(&[2, 6, 12]), 3);
        assert!(abelian_mu(&AbelianInvariants { rank: 1, torsion: vec![] }).is_err());
    }

    /// Hall's recursion for the number of index-n subgroups of a free group
    /// of rank r: t_n = n (n!)^(r-1) - sum_{k=1}^{n-1} ((n-k)!)^(r-1) t_k.
    fn hall_counts(rank: usize, up_to: usize) -> Vec<usize> {
        let mut t = vec![0usize; up_to + 1];
        for n in 1..=up_to {
            let mut v = n * factorial(n).pow(rank as u32 - 1);
            for k in 1..n {
                v -= factorial(n - k).pow(rank as u32 - 1) * t[k];
            }
            t[n] = v;
        }
        t
    }

    #[test]
    fn free_group_counts_match_hall() {
        let p = Presentation::free(2);
        let hall = hall_counts(2, 4);
        assert_eq!(&hall[1..=4], &[1, 3, 13, 71]);
        for n in 1..=4 {
            let subs = enumerate_index_n(&p, n, 6).unwrap();
            assert_eq!(subs.len(), hall[n], "n={n}");
            for s in &subs {
                assert!(s.is_transitive());
            }
        }
    }

    #[test]
    fn genus_two_index_two_count() {
        let p = Presentation::surface(2);
        let subs = enumerate_index_n(&p, 2, 4).unwrap();
        // Index-2 subgroups correspond to surjections Z^4 -> Z/2.
        assert_eq!(subs.len(), 15);
        for s in &subs {
            assert!(s.relators_hold(&p).unwrap());
        }
    }

    #[test]
    fn containment_counts_small() {
        let p = Presentation::free(2);
        let report = intermediate_count_check(&p, 2, 6).unwrap();
        assert_eq!(report.a_n, 3);
        assert_eq!(report.a_2n, 71);
        assert!(report.bound_holds);
        assert!(report.max_containments <= 3);
        // n = 1: every index-2 subgroup lies in exactly one index-1 subgroup.
        let report = intermediate_count_check(&p, 1, 6).unwrap();
        assert_eq!(report.a_n, 1);
        assert_eq!(report.max_containments, 1);
    }

    #[test]
    fn enumeration_bound_respected() {
        let p = Presentation::free(2);
        assert!(matches!(enumerate_index_n(&p, 7, 6), Err(Error::BoundExceeded { .. })));
    }

    #[test]
    fn coset_action_json_round_trip() {
        let a = CosetAction::regular_abelian(&[2, 2]).unwrap();
        let j = CosetActionJson::from(&a);
        assert!(j.perms.iter().all(|p| p.iter().all(|&x| (1..=4).contains(&x))));
        let back = CosetAction::try_from(j).unwrap();
        assert_eq!(back, a);
    }
}
