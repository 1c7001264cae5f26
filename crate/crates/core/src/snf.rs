//! Integer matrix reductions in unbounded arithmetic: Smith normal form with
//! minimal-absolute-value pivoting, integer kernels via column echelon, and a
//! transform-tracking row echelon. A small GF(2) eliminator sits at the end.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        IntMat { rows, cols, data: entries.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &BigInt) {
        self.data[i * self.cols + j] += v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row_a -= q * row_b
    pub fn row_submul(&mut self, a: usize, b: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let sub = q * self.get(b, j);
            self.data[a * self.cols + j] -= sub;
        }
    }

    /// col_a -= q * col_b
    pub fn col_submul(&mut self, a: usize, b: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let sub = q * self.get(i, b);
            self.data[i * self.cols + a] -= sub;
        }
    }

    pub fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.get(a, j).clone();
            self.set(a, j, v);
        }
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        (0..self.cols).all(|j| self.get(i, j).is_zero())
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * other.get(k, j);
                    out.data[i * other.cols + j] += add;
                }
            }
        }
        out
    }
}

/// Rounded division: quotient minimizing |a - q*b|.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if a.sign() == b.sign() {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

/// Invariant factors of `a` (nonzero diagonal of the Smith normal form, signs
/// dropped, divisibility chain enforced).
pub fn snf_invariant_factors(a: &IntMat) -> Vec<BigInt> {
    let mut m = a.clone();
    let n = m.rows.min(m.cols);
    let mut t = 0;
    while t < n {
        // Minimal nonzero |entry| in the trailing submatrix.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..m.rows {
            for j in t..m.cols {
                if m.get(i, j).is_zero() {
                    continue;
                }
                match pivot {
                    None => pivot = Some((i, j)),
                    Some((pi, pj)) => {
                        if m.get(i, j).abs() < m.get(pi, pj).abs() {
                            pivot = Some((i, j));
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap_rows(t, pi);
        m.swap_cols(t, pj);
        // Clear row and column t by Euclidean descent.
        loop {
            let mut clean = true;
            for i in t + 1..m.rows {
                if m.get(i, t).is_zero() {
                    continue;
                }
                let q = round_div(m.get(i, t), m.get(t, t));
                m.row_submul(i, t, &q);
                if !m.get(i, t).is_zero() {
                    m.swap_rows(i, t);
                    clean = false;
                }
            }
            for j in t + 1..m.cols {
                if m.get(t, j).is_zero() {
                    continue;
                }
                let q = round_div(m.get(t, j), m.get(t, t));
                m.col_submul(j, t, &q);
                if !m.get(t, j).is_zero() {
                    m.swap_cols(j, t);
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        // Divisibility fix-up: pivot must divide the whole trailing block.
        let mut restart = false;
        'scan: for i in t + 1..m.rows {
            for j in t + 1..m.cols {
                if !(m.get(i, j) % m.get(t, t)).is_zero() {
                    // Fold row i into row t and redo the elimination.
                    let minus_one = BigInt::from(-1);
                    m.row_submul(t, i, &minus_one);
                    restart = true;
                    break 'scan;
                }
            }
        }
        if restart {
            continue;
        }
        t += 1;
    }
    let mut out = Vec::new();
    for i in 0..t {
        out.push(m.get(i, i).abs());
    }
    out
}

/// Basis of the integer kernel `{x : a x = 0}`, as column vectors. The basis
/// spans the kernel as a direct summand of Z^cols.
pub fn column_kernel(a: &IntMat) -> Vec<Vec<BigInt>> {
    let mut m = a.clone();
    let mut t = IntMat::identity(a.cols);
    let mut active: Vec<usize> = (0..a.cols).collect();
    for r in 0..m.rows {
        loop {
            let mut nonzero: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&c| !m.get(r, c).is_zero())
                .collect();
            if nonzero.len() <= 1 {
                if let Some(&c) = nonzero.first() {
                    active.retain(|&x| x != c);
                }
                break;
            }
            // Reduce the larger entries against the smallest.
            nonzero.sort_by(|&x, &y| m.get(r, x).abs().cmp(&m.get(r, y).abs()));
            let small = nonzero[0];
            for &c in &nonzero[1..] {
                let q = round_div(m.get(r, c), m.get(r, small));
                m.col_submul(c, small, &q);
                t.col_submul(c, small, &q);
            }
        }
    }
    active.sort_unstable();
    active.iter().map(|&c| t.column(c)).collect()
}

/// Row echelon with a tracked unimodular transform: returns `(h, u)` with
/// `u * a = h`, `u` unimodular and `h` in echelon form. The nonzero rows of
/// `h` are a lattice basis of the row space of `a`.
pub fn row_echelon_with_transform(a: &IntMat) -> (IntMat, IntMat) {
    let mut m = a.clone();
    let mut u = IntMat::identity(a.rows);
    let mut pivot_row = 0usize;
    for col in 0..m.cols {
        if pivot_row >= m.rows {
            break;
        }
        loop {
            let mut nonzero: Vec<usize> =
                (pivot_row..m.rows).filter(|&i| !m.get(i, col).is_zero()).collect();
            if nonzero.is_empty() {
                break;
            }
            if nonzero.len() == 1 {
                m.swap_rows(pivot_row, nonzero[0]);
                u.swap_rows(pivot_row, nonzero[0]);
                if m.get(pivot_row, col).is_negative() {
                    m.negate_row(pivot_row);
                    u.negate_row(pivot_row);
                }
                pivot_row += 1;
                break;
            }
            nonzero.sort_by(|&x, &y| m.get(x, col).abs().cmp(&m.get(y, col).abs()));
            let small = nonzero[0];
            for &i in &nonzero[1..] {
                let q = round_div(m.get(i, col), m.get(small, col));
                m.row_submul(i, small, &q);
                u.row_submul(i, small, &q);
            }
        }
    }
    (m, u)
}

/// Solves `basis * x = b` when the columns of `basis` span a direct summand
/// containing `b`. Returns `None` when `b` lies outside the span.
pub fn solve_in_basis(basis: &IntMat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(basis.rows, b.len());
    let (h, u) = row_echelon_with_transform(basis);
    // u * basis = h, so basis * x = b  <=>  h * x = u * b.
    let mut ub = vec![BigInt::zero(); basis.rows];
    for i in 0..basis.rows {
        let mut s = BigInt::zero();
        for j in 0..basis.rows {
            if !u.get(i, j).is_zero() {
                s += u.get(i, j) * &b[j];
            }
        }
        ub[i] = s;
    }
    let mut x = vec![BigInt::zero(); basis.cols];
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for i in 0..h.rows {
        if let Some(j) = (0..h.cols).find(|&j| !h.get(i, j).is_zero()) {
            pivots.push((i, j));
        }
    }
    for &(i, j) in pivots.iter().rev() {
        let mut rhs = ub[i].clone();
        for jj in j + 1..h.cols {
            if !h.get(i, jj).is_zero() {
                rhs -= h.get(i, jj) * &x[jj];
            }
        }
        let (q, r) = rhs.div_rem(h.get(i, j));
        if !r.is_zero() {
            return None;
        }
        x[j] = q;
    }
    // Verify; also covers inconsistency on the zero rows of h.
    for i in 0..basis.rows {
        let mut s = BigInt::zero();
        for j in 0..basis.cols {
            if !basis.get(i, j).is_zero() {
                s += basis.get(i, j) * &x[j];
            }
        }
        if s != b[i] {
            return None;
        }
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// GF(2)
// ---------------------------------------------------------------------------

/// Dense matrix over GF(2), one bitset per row.
#[derive(Debug, Clone)]
pub struct Mat2 {
    pub rows: usize,
    pub cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl Mat2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Mat2 { rows, cols, words, data: vec![0; rows * words.max(1)] }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = i * self.words + j / 64;
        if v {
            self.data[w] |= 1 << (j % 64);
        } else {
            self.data[w] &= !(1 << (j % 64));
        }
    }

    fn xor_rows(&mut self, target: usize, source: usize) {
        for w in 0..self.words {
            let s = self.data[source * self.words + w];
            self.data[target * self.words + w] ^= s;
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate().0
    }

    /// In-place Gaussian elimination; returns (rank, pivot columns).
    pub fn eliminate(&mut self) -> (usize, Vec<usize>) {
        let mut rank = 0;
        let mut pivots = Vec::new();
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&i| self.get(i, col)) else { continue };
            for w in 0..self.words {
                self.data.swap(rank * self.words + w, p * self.words + w);
            }
            for i in 0..self.rows {
                if i != rank && self.get(i, col) {
                    self.xor_rows(i, rank);
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        (rank, pivots)
    }

    /// Basis of the right kernel `{x : a x = 0}` over GF(2).
    pub fn kernel(&self) -> Vec<Vec<bool>> {
        let mut m = self.clone();
        let (_, pivots) = m.eliminate();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::new();
        for &f in &free {
            let mut x = vec![false; self.cols];
            x[f] = true;
            for (r, &p) in pivots.iter().enumerate() {
                if m.get(r, f) {
                    x[p] = true;
                }
            }
            basis.push(x);
        }
        basis
    }
}
