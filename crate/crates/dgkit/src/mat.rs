//! Dense matrices over a Euclidean cover, Smith normal form with transforms,
//! exact solving and kernel bases.

use crate::ring::{Cover, Ring, RingError, Scalar};
use std::fmt;

/// A rows x cols matrix with entries in the Euclidean cover of `ring`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    pub ring: Ring,
    pub rows: usize,
    pub cols: usize,
    entries: Vec<Scalar>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat({}x{})[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(ring: Ring, rows: usize, cols: usize) -> Mat {
        let z = ring.cover().zero();
        Mat {
            ring,
            rows,
            cols,
            entries: vec![z; rows * cols],
        }
    }

    pub fn identity(ring: Ring, n: usize) -> Mat {
        let mut m = Mat::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.cover().one());
        }
        m
    }

    pub fn from_fn(ring: Ring, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Mat {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Mat {
            ring,
            rows,
            cols,
            entries,
        }
    }

    pub fn from_i64(ring: Ring, data: &[&[i64]]) -> Mat {
        let rows = data.len();
        let cols = data.first().map(|r| r.len()).unwrap_or(0);
        Mat::from_fn(ring, rows, cols, |i, j| Scalar::from_i64(data[i][j], ring))
    }

    /// Diagonal scalar matrix c * I_n.
    pub fn scalar(ring: Ring, n: usize, c: &Scalar) -> Mat {
        let mut m = Mat::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, c.clone());
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.ring, self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let c = self.ring.cover();
        Mat::from_fn(self.ring, self.rows, self.cols, |i, j| {
            c.add(self.at(i, j), other.at(i, j))
        })
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let c = self.ring.cover();
        Mat::from_fn(self.ring, self.rows, self.cols, |i, j| {
            c.sub(self.at(i, j), other.at(i, j))
        })
    }

    pub fn neg(&self) -> Mat {
        let c = self.ring.cover();
        Mat::from_fn(self.ring, self.rows, self.cols, |i, j| c.neg(self.at(i, j)))
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        let c = self.ring.cover();
        Mat::from_fn(self.ring, self.rows, self.cols, |i, j| c.mul(s, self.at(i, j)))
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(
            self.cols, other.rows,
            "matrix product shape mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let c = self.ring.cover();
        let mut out = Mat::zeros(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let p = c.mul(a, b);
                    let idx = i * out.cols + j;
                    let cur = std::mem::replace(&mut out.entries[idx], c.zero());
                    out.entries[idx] = c.add(&cur, &p);
                }
            }
        }
        out
    }

    /// Canonicalize entries modulo the structural relation of the ring.
    pub fn reduced(&self) -> Mat {
        Mat::from_fn(self.ring, self.rows, self.cols, |i, j| {
            self.ring.reduce(self.at(i, j))
        })
    }

    /// Horizontal concatenation [self | other].
    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.ring, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.at(i, j).clone()
            } else {
                other.at(i, j - self.cols).clone()
            }
        })
    }

    /// Vertical concatenation [self; other].
    pub fn vcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        Mat::from_fn(self.ring, self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.at(i, j).clone()
            } else {
                other.at(i - self.rows, j).clone()
            }
        })
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat {
        Mat::from_fn(self.ring, r1 - r0, c1 - c0, |i, j| {
            self.at(r0 + i, c0 + j).clone()
        })
    }

    pub fn col(&self, j: usize) -> Mat {
        self.submatrix(0, self.rows, j, j + 1)
    }

    /// Block-diagonal assembly.
    pub fn block_diag(ring: Ring, blocks: &[&Mat]) -> Mat {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Mat::zeros(ring, rows, cols);
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(ro + i, co + j, b.at(i, j).clone());
                }
            }
            ro += b.rows;
            co += b.cols;
        }
        m
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }
}

/// Smith normal form result: `u * a * v = d` with `u`, `v` invertible over
/// the cover and `d` diagonal with the divisibility chain.
#[derive(Clone, Debug)]
pub struct Snf {
    pub d: Mat,
    pub u: Mat,
    pub uinv: Mat,
    pub v: Mat,
    pub vinv: Mat,
}

impl Snf {
    /// Diagonal entries (length min(rows, cols)).
    pub fn diagonal(&self) -> Vec<Scalar> {
        let n = self.d.rows.min(self.d.cols);
        (0..n).map(|i| self.d.at(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

struct SnfCalc {
    cover: Cover,
    a: Mat,
    u: Mat,
    uinv: Mat,
    v: Mat,
    vinv: Mat,
}

impl SnfCalc {
    fn new(a: Mat) -> SnfCalc {
        let ring = a.ring;
        let (m, n) = (a.rows, a.cols);
        SnfCalc {
            cover: ring.cover(),
            a,
            u: Mat::identity(ring, m),
            uinv: Mat::identity(ring, m),
            v: Mat::identity(ring, n),
            vinv: Mat::identity(ring, n),
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.a.cols {
            let (x, y) = (self.a.at(i, k).clone(), self.a.at(j, k).clone());
            self.a.set(i, k, y);
            self.a.set(j, k, x);
        }
        for k in 0..self.u.cols {
            let (x, y) = (self.u.at(i, k).clone(), self.u.at(j, k).clone());
            self.u.set(i, k, y);
            self.u.set(j, k, x);
        }
        for k in 0..self.uinv.rows {
            let (x, y) = (self.uinv.at(k, i).clone(), self.uinv.at(k, j).clone());
            self.uinv.set(k, i, y);
            self.uinv.set(k, j, x);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.a.rows {
            let (x, y) = (self.a.at(k, i).clone(), self.a.at(k, j).clone());
            self.a.set(k, i, y);
            self.a.set(k, j, x);
        }
        for k in 0..self.v.rows {
            let (x, y) = (self.v.at(k, i).clone(), self.v.at(k, j).clone());
            self.v.set(k, i, y);
            self.v.set(k, j, x);
        }
        for k in 0..self.vinv.cols {
            let (x, y) = (self.vinv.at(i, k).clone(), self.vinv.at(j, k).clone());
            self.vinv.set(i, k, y);
            self.vinv.set(j, k, x);
        }
    }

    /// Left-multiply rows (i, j) by [[a, b], [c, d]] with unit determinant.
    fn left_elem(&mut self, comps: [&Scalar; 4], i: usize, j: usize) {
        let cv = self.cover;
        let [a, b, c, d] = comps;
        let det = cv.sub(&cv.mul(a, d), &cv.mul(b, c));
        debug_assert!(cv.is_unit(&det));
        let det_inv = cv.inv_unit(&det);
        for k in 0..self.a.cols {
            let x = self.a.at(i, k).clone();
            let y = self.a.at(j, k).clone();
            self.a.set(i, k, cv.add(&cv.mul(a, &x), &cv.mul(b, &y)));
            self.a.set(j, k, cv.add(&cv.mul(c, &x), &cv.mul(d, &y)));
        }
        for k in 0..self.u.cols {
            let x = self.u.at(i, k).clone();
            let y = self.u.at(j, k).clone();
            self.u.set(i, k, cv.add(&cv.mul(a, &x), &cv.mul(b, &y)));
            self.u.set(j, k, cv.add(&cv.mul(c, &x), &cv.mul(d, &y)));
        }
        // uinv gets the inverse from the right: det_inv * [[d, -b], [-c, a]]
        for k in 0..self.uinv.rows {
            let x = self.uinv.at(k, i).clone();
            let y = self.uinv.at(k, j).clone();
            let ni = cv.mul(&det_inv, &cv.sub(&cv.mul(&x, d), &cv.mul(&y, c)));
            let nj = cv.mul(&det_inv, &cv.add(&cv.mul(&y, a), &cv.neg(&cv.mul(&x, b))));
            self.uinv.set(k, i, ni);
            self.uinv.set(k, j, nj);
        }
    }

    /// Right-multiply cols (i, j) by [[a, c], [b, d]] with unit determinant.
    fn right_elem(&mut self, comps: [&Scalar; 4], i: usize, j: usize) {
        let cv = self.cover;
        let [a, b, c, d] = comps;
        let det = cv.sub(&cv.mul(a, d), &cv.mul(b, c));
        debug_assert!(cv.is_unit(&det));
        let det_inv = cv.inv_unit(&det);
        for k in 0..self.a.rows {
            let x = self.a.at(k, i).clone();
            let y = self.a.at(k, j).clone();
            self.a.set(k, i, cv.add(&cv.mul(&x, a), &cv.mul(&y, b)));
            self.a.set(k, j, cv.add(&cv.mul(&x, c), &cv.mul(&y, d)));
        }
        for k in 0..self.v.rows {
            let x = self.v.at(k, i).clone();
            let y = self.v.at(k, j).clone();
            self.v.set(k, i, cv.add(&cv.mul(&x, a), &cv.mul(&y, b)));
            self.v.set(k, j, cv.add(&cv.mul(&x, c), &cv.mul(&y, d)));
        }
        for k in 0..self.vinv.cols {
            let x = self.vinv.at(i, k).clone();
            let y = self.vinv.at(j, k).clone();
            let ni = cv.mul(&det_inv, &cv.sub(&cv.mul(d, &x), &cv.mul(c, &y)));
            let nj = cv.mul(&det_inv, &cv.add(&cv.mul(a, &y), &cv.neg(&cv.mul(b, &x))));
            self.vinv.set(i, k, ni);
            self.vinv.set(j, k, nj);
        }
    }

    fn mul_row(&mut self, i: usize, unit: &Scalar) {
        let cv = self.cover;
        let inv = cv.inv_unit(unit);
        for k in 0..self.a.cols {
            let x = cv.mul(unit, self.a.at(i, k));
            self.a.set(i, k, x);
        }
        for k in 0..self.u.cols {
            let x = cv.mul(unit, self.u.at(i, k));
            self.u.set(i, k, x);
        }
        for k in 0..self.uinv.rows {
            let x = cv.mul(self.uinv.at(k, i), &inv);
            self.uinv.set(k, i, x);
        }
    }

    /// Pivot with minimal Euclidean size in the trailing submatrix, ties
    /// broken by row-major position.
    fn select_pivot(&self, from: usize) -> Option<(usize, usize)> {
        let cv = self.cover;
        let mut best: Option<(u64, usize, usize)> = None;
        for i in from..self.a.rows {
            for j in from..self.a.cols {
                let e = self.a.at(i, j);
                if e.is_zero() {
                    continue;
                }
                let s = cv.size(e);
                match best {
                    None => best = Some((s, i, j)),
                    Some((bs, _, _)) if s < bs => best = Some((s, i, j)),
                    _ => {}
                }
            }
        }
        best.map(|(_, i, j)| (i, j))
    }

    fn eliminate(&mut self, t: usize) {
        let cv = self.cover;
        loop {
            let mut changed = false;
            // clear column t below pivot
            for i in (t + 1)..self.a.rows {
                if self.a.at(i, t).is_zero() {
                    continue;
                }
                let x = self.a.at(t, t).clone();
                let y = self.a.at(i, t).clone();
                let (d, s, tt) = cv.gcdx(&x, &y);
                let a = cv.div_exact(&x, &d).unwrap();
                let b = cv.div_exact(&y, &d).unwrap();
                if cv.is_unit(&a) {
                    // simple row operation keeps transforms sparse
                    let q = cv.mul(&cv.inv_unit(&a), &b);
                    let one = cv.one();
                    let nq = cv.neg(&q);
                    self.left_elem([&one, &cv.zero(), &nq, &one], t, i);
                } else {
                    self.left_elem([&s, &tt, &cv.neg(&b), &a], t, i);
                }
                changed = true;
            }
            // clear row t right of pivot
            for j in (t + 1)..self.a.cols {
                if self.a.at(t, j).is_zero() {
                    continue;
                }
                let x = self.a.at(t, t).clone();
                let y = self.a.at(t, j).clone();
                let (d, s, tt) = cv.gcdx(&x, &y);
                let a = cv.div_exact(&x, &d).unwrap();
                let b = cv.div_exact(&y, &d).unwrap();
                if cv.is_unit(&a) {
                    let q = cv.mul(&cv.inv_unit(&a), &b);
                    let one = cv.one();
                    let nq = cv.neg(&q);
                    self.right_elem([&one, &cv.zero(), &nq, &one], t, j);
                } else {
                    self.right_elem([&s, &tt, &cv.neg(&b), &a], t, j);
                }
                changed = true;
            }
            if !changed {
                break;
            }
            // row ops may have refilled the column; loop until both are clear
            let col_clear = ((t + 1)..self.a.rows).all(|i| self.a.at(i, t).is_zero());
            let row_clear = ((t + 1)..self.a.cols).all(|j| self.a.at(t, j).is_zero());
            if col_clear && row_clear {
                break;
            }
        }
    }

    fn process(&mut self) {
        let n = self.a.rows.min(self.a.cols);
        for t in 0..n {
            let Some((pi, pj)) = self.select_pivot(t) else {
                break;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            self.eliminate(t);
        }
        self.normalize_diag();
    }

    fn normalize_diag(&mut self) {
        let cv = self.cover;
        let n = self.a.rows.min(self.a.cols);
        let rank = (0..n)
            .take_while(|&i| !self.a.at(i, i).is_zero())
            .count();
        if rank > 0 {
            loop {
                let mut sorted = true;
                for i in 0..rank - 1 {
                    let x = self.a.at(i, i).clone();
                    let y = self.a.at(i + 1, i + 1).clone();
                    if cv.divides(&x, &y) {
                        continue;
                    }
                    sorted = false;
                    // gcd trick on the 2x2 diagonal block
                    let (d, s, t) = cv.gcdx(&x, &y);
                    let a = cv.div_exact(&x, &d).unwrap();
                    let b = cv.div_exact(&y, &d).unwrap();
                    let one = cv.one();
                    let tb = cv.mul(&t, &b);
                    let sa = cv.mul(&s, &a);
                    self.left_elem([&one, &one, &cv.neg(&tb), &sa], i, i + 1);
                    self.right_elem([&s, &t, &cv.neg(&b), &a], i, i + 1);
                    // clean the off-diagonal fill-in
                    self.eliminate(i);
                }
                if sorted {
                    break;
                }
            }
        }
        for i in 0..rank {
            let u = cv.normalizing_unit(self.a.at(i, i));
            if !u.is_one() {
                self.mul_row(i, &u);
            }
        }
    }
}

/// Smith normal form over the Euclidean cover.
///
/// Deterministic: pivots are chosen by smallest Euclidean size, ties broken
/// by lowest row-major index. Not defined over the rationals.
pub fn snf(m: &Mat) -> Result<Snf, RingError> {
    if m.ring.cover() == Cover::Rat {
        return Err(RingError::UnsupportedRing);
    }
    Ok(snf_cover(m))
}

fn snf_cover(m: &Mat) -> Snf {
    let mut calc = SnfCalc::new(m.clone());
    calc.process();
    Snf {
        d: calc.a,
        u: calc.u,
        uinv: calc.uinv,
        v: calc.v,
        vinv: calc.vinv,
    }
}

/// Internal SNF usable for every cover. Rational matrices are cleared of
/// denominators columnwise first (column scaling is a right-multiplication
/// by an invertible diagonal matrix, folded into v).
pub(crate) fn snf_any(m: &Mat) -> Snf {
    if m.ring.cover() != Cover::Rat {
        return snf_cover(m);
    }
    // Over a field the same elimination works verbatim: every nonzero entry
    // is a unit, divisions are exact.
    snf_cover(m)
}

/// Solve a * x = b exactly over the cover. Returns None when no solution
/// exists.
pub fn solve_cover(a: &Mat, b: &Mat) -> Option<Mat> {
    assert_eq!(a.rows, b.rows, "solve shape mismatch");
    let s = snf_any(a);
    let cv = a.ring.cover();
    let ub = s.u.mul(b);
    let n = a.rows.min(a.cols);
    let mut y = Mat::zeros(a.ring, a.cols, b.cols);
    for j in 0..b.cols {
        for i in 0..a.rows {
            let rhs = ub.at(i, j);
            if i < n && !s.d.at(i, i).is_zero() {
                match cv.div_exact(rhs, s.d.at(i, i)) {
                    Some(q) => y.set(i, j, q),
                    None => return None,
                }
            } else if !rhs.is_zero() {
                return None;
            }
        }
    }
    Some(s.v.mul(&y))
}

/// Columns spanning the kernel of a over the cover.
pub fn kernel_cover(a: &Mat) -> Mat {
    let s = snf_any(a);
    let n = a.rows.min(a.cols);
    let mut zero_cols = Vec::new();
    for j in 0..a.cols {
        if j >= n || s.d.at(j, j).is_zero() {
            zero_cols.push(j);
        }
    }
    let mut out = Mat::zeros(a.ring, a.cols, zero_cols.len());
    for (k, &j) in zero_cols.iter().enumerate() {
        for i in 0..a.cols {
            out.set(i, k, s.v.at(i, j).clone());
        }
    }
    out
}

/// Solve a * x = b modulo the structural relation of the ring (the relation
/// applies coordinatewise in the target). This is the ring-level linear
/// solver of the workbench.
pub fn solve(a: &Mat, b: &Mat) -> Result<Option<Mat>, RingError> {
    if a.rows != b.rows {
        return Err(RingError::ShapeMismatch(format!(
            "lhs has {} rows, rhs has {}",
            a.rows, b.rows
        )));
    }
    let aug = match a.ring.structural() {
        Some(s) => a.hcat(&Mat::scalar(a.ring, a.rows, &s)),
        None => a.clone(),
    };
    Ok(solve_cover(&aug, b).map(|x| x.submatrix(0, a.cols, 0, b.cols).reduced()))
}

/// Spanning set for { x : a*x = 0 modulo the structural relation }.
pub fn kernel_mod_structural(a: &Mat) -> Mat {
    let aug = match a.ring.structural() {
        Some(s) => a.hcat(&Mat::scalar(a.ring, a.rows, &s)),
        None => a.clone(),
    };
    let k = kernel_cover(&aug);
    k.submatrix(0, a.cols, 0, k.cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_examples() {
        // diag(2,3) -> diag(1,6)
        let m = Mat::from_i64(Ring::Int, &[&[2, 0], &[0, 3]]);
        let s = snf(&m).unwrap();
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
        assert_eq!(s.d, Mat::from_i64(Ring::Int, &[&[1, 0], &[0, 6]]));

        // empty
        let e = Mat::zeros(Ring::Int, 0, 0);
        let s = snf(&e).unwrap();
        assert_eq!(s.d.rows, 0);

        // already diagonal 1x1
        let m = Mat::from_i64(Ring::Int, &[&[4]]);
        let s = snf(&m).unwrap();
        assert_eq!(s.d, m);
    }

    #[test]
    fn snf_transform_invertibility() {
        let m = Mat::from_i64(
            Ring::Int,
            &[&[-20, -7, -27, 2], &[17, 8, 14, -4], &[13, 8, 10, -4], &[-9, -2, -14, 0]],
        );
        let s = snf(&m).unwrap();
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
        assert_eq!(s.u.mul(&s.uinv), Mat::identity(Ring::Int, 4));
        assert_eq!(s.v.mul(&s.vinv), Mat::identity(Ring::Int, 4));
        // divisibility chain
        let cv = Ring::Int.cover();
        let d = s.diagonal();
        for w in d.windows(2) {
            if !w[1].is_zero() {
                assert!(cv.divides(&w[0], &w[1]) || w[0].is_zero() == w[1].is_zero());
            }
            if !w[0].is_zero() && !w[1].is_zero() {
                assert!(cv.divides(&w[0], &w[1]));
            }
        }
    }

    #[test]
    fn snf_rational_rank() {
        let m = Mat::from_i64(Ring::Rational, &[&[1, 2], &[2, 4]]);
        let s = snf_any(&m);
        assert_eq!(s.rank(), 1);
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
    }

    #[test]
    fn snf_is_unsupported_over_q() {
        let m = Mat::from_i64(Ring::Rational, &[&[1]]);
        assert_eq!(snf(&m).unwrap_err(), RingError::UnsupportedRing);
    }

    #[test]
    fn solve_intmod() {
        let r = Ring::IntMod(4);
        let a = Mat::from_i64(r, &[&[2]]);
        assert_eq!(solve(&a, &Mat::from_i64(r, &[&[1]])).unwrap(), None);
        let x = solve(&a, &Mat::from_i64(r, &[&[2]])).unwrap().unwrap();
        assert_eq!(a.mul(&x).reduced(), Mat::from_i64(r, &[&[2]]));
    }

    #[test]
    fn solve_dual_structural() {
        let r = Ring::DualNumbers(2);
        let x_poly = Scalar::Poly(vec![0, 1]);
        let mut a = Mat::zeros(r, 1, 1);
        a.set(0, 0, x_poly.clone());
        let b = Mat::zeros(r, 1, 1);
        // x * t = 0 mod x^2 has solutions; t = x is one of them
        let sol = solve(&a, &b).unwrap().unwrap();
        let prod = a.mul(&sol).reduced();
        assert!(prod.is_zero());
        let mut cand = Mat::zeros(r, 1, 1);
        cand.set(0, 0, x_poly);
        assert!(a.mul(&cand).reduced().is_zero());
    }

    #[test]
    fn kernel_over_cover() {
        let a = Mat::from_i64(Ring::Int, &[&[2, 4]]);
        let k = kernel_cover(&a);
        assert_eq!(k.cols, 1);
        assert!(a.mul(&k).is_zero());
    }

    #[test]
    fn snf_poly_cover() {
        let r = Ring::DualNumbers(3);
        let x = Scalar::Poly(vec![0, 1]);
        let x2 = Scalar::Poly(vec![0, 0, 1]);
        let mut m = Mat::zeros(r, 2, 2);
        m.set(0, 0, x.clone());
        m.set(1, 1, x2.clone());
        let s = snf(&m).unwrap();
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
        assert_eq!(s.d.at(0, 0), &x);
        assert_eq!(s.d.at(1, 1), &x2);
    }
}
