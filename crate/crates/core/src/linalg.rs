//! Sparse vectors and exact dense elimination over `Q` and `Q(ζ_N)`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::scalars::{Cyclo, Rational};

/// Exact field element usable in elimination.
pub trait Coeff: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Inverse of a nonzero element.
    fn inv(&self) -> Self;
    fn from_rational(q: &Rational) -> Self;
}

impl Coeff for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
}

impl Coeff for Cyclo {
    fn zero() -> Self {
        Cyclo::zero()
    }
    fn one() -> Self {
        Cyclo::one()
    }
    fn is_zero(&self) -> bool {
        Cyclo::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn sub(&self, o: &Self) -> Self {
        self.sub_ref(o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn neg(&self) -> Self {
        self.neg_ref()
    }
    fn inv(&self) -> Self {
        Cyclo::inv(self).expect("inverse of nonzero element")
    }
    fn from_rational(q: &Rational) -> Self {
        Cyclo::from_rational(q.clone())
    }
}

/// Sparse vector indexed by basis position; zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SparseVec<T> {
    entries: BTreeMap<usize, T>,
}

impl<T: Coeff> SparseVec<T> {
    pub fn new() -> Self {
        SparseVec {
            entries: BTreeMap::new(),
        }
    }

    pub fn basis(i: usize) -> Self {
        let mut v = Self::new();
        v.entries.insert(i, T::one());
        v
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, T)>) -> Self {
        let mut v = Self::new();
        for (i, c) in pairs {
            v.add_at(i, &c);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        self.entries.get(&i)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn add_at(&mut self, i: usize, c: &T) {
        if c.is_zero() {
            return;
        }
        let remove = match self.entries.get_mut(&i) {
            Some(x) => {
                *x = x.add(c);
                x.is_zero()
            }
            None => {
                self.entries.insert(i, c.clone());
                false
            }
        };
        if remove {
            self.entries.remove(&i);
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: &T) {
        if c.is_zero() {
            return;
        }
        let unit = *c == T::one();
        for (i, x) in other.iter() {
            if unit {
                self.add_at(i, x);
            } else {
                self.add_at(i, &x.mul(c));
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.add_scaled(other, &T::one());
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.add_scaled(other, &T::one().neg());
        r
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        SparseVec {
            entries: self.entries.iter().map(|(i, x)| (*i, x.mul(c))).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        SparseVec {
            entries: self.entries.iter().map(|(i, x)| (*i, x.neg())).collect(),
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<T> {
        let mut d = vec![T::zero(); n];
        for (i, c) in self.iter() {
            d[i] = c.clone();
        }
        d
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> SparseVec<U> {
        SparseVec::from_pairs(self.iter().map(|(i, c)| (i, f(c))))
    }

    /// First index at which `self` and `other` differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        self.sub(other).support().next()
    }
}

/// Reduced row echelon form computed in place; returns the pivot columns.
/// Pivoting is deterministic: the first row with a nonzero entry is used.
pub fn rref<T: Coeff>(m: &mut [Vec<T>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].inv();
        if inv != T::one() {
            for x in m[row].iter_mut() {
                if !x.is_zero() {
                    *x = x.mul(&inv);
                }
            }
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for (x, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = x.sub(&f.mul(p));
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank<T: Coeff>(rows: &[Vec<T>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Basis of `{x : M x = 0}`. Each basis vector has a 1 at its own free
/// column and 0 at every other free column, so coordinates of a kernel
/// element are read off at the free columns.
pub fn nullspace<T: Coeff>(rows: &[Vec<T>], ncols: usize) -> (Vec<Vec<T>>, Vec<usize>) {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![T::zero(); ncols];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = m[r][f].neg();
            }
            v
        })
        .collect();
    (basis, free)
}

/// Solves a square system given as augmented rows `[A | b]` with `ncols`
/// unknowns; returns `None` unless the solution is unique.
pub fn solve_augmented<T: Coeff>(rows: &mut [Vec<T>], ncols: usize) -> Option<Vec<T>> {
    let pivots = rref(rows, ncols + 1);
    if pivots.len() != ncols || pivots.iter().any(|&p| p >= ncols) {
        return None;
    }
    Some((0..ncols).map(|r| rows[r][ncols].clone()).collect())
}

/// Incremental row space over `T` used for exact rank reduction: stores
/// reduced rows keyed by pivot column.
#[derive(Clone, Debug, Default)]
pub struct Echelon<T> {
    rows: Vec<(usize, Vec<T>)>,
    ncols: usize,
}

impl<T: Coeff> Echelon<T> {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            rows: Vec::new(),
            ncols,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[T]) -> Vec<T> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x = x.sub(&f.mul(r));
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[T]) -> bool {
        self.reduce(v).iter().all(Coeff::is_zero)
    }

    /// Inserts `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: &[T]) -> bool {
        assert_eq!(v.len(), self.ncols);
        let r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[p].inv();
        let r: Vec<T> = r.iter().map(|x| x.mul(&inv)).collect();
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, y) in row.iter_mut().zip(&r) {
                    if !y.is_zero() {
                        *x = x.sub(&f.mul(y));
                    }
                }
            }
        }
        self.rows.push((p, r));
        true
    }
}

/// Expresses `target` as a combination of `vectors` (all of length `n`),
/// returning the coefficients if it lies in their span.
pub fn express_in_span<T: Coeff>(vectors: &[Vec<T>], target: &[T]) -> Option<Vec<T>> {
    let k = vectors.len();
    let n = target.len();
    let mut rows: Vec<Vec<T>> = (0..n)
        .map(|r| {
            let mut row: Vec<T> = vectors.iter().map(|v| v[r].clone()).collect();
            row.push(target[r].clone());
            row
        })
        .collect();
    let pivots = rref(&mut rows, k + 1);
    if pivots.contains(&k) {
        return None;
    }
    let mut sol = vec![T::zero(); k];
    for (r, &p) in pivots.iter().enumerate() {
        sol[p] = rows[r][k].clone();
    }
    Some(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{int, rat};

    #[test]
    fn nullspace_of_rank_one() {
        let m = vec![vec![int(1), int(2), int(3)]];
        let (basis, free) = nullspace(&m, 3);
        assert_eq!(free, vec![1, 2]);
        for v in &basis {
            let dot = &m[0][0] * &v[0] + &m[0][1] * &v[1] + &m[0][2] * &v[2];
            assert!(Zero::is_zero(&dot));
        }
    }

    #[test]
    fn solve_two_by_two() {
        let mut rows = vec![vec![int(2), int(1), int(5)], vec![int(1), int(-1), int(1)]];
        assert_eq!(solve_augmented(&mut rows, 2), Some(vec![int(2), int(1)]));
        let mut singular = vec![vec![int(1), int(1), int(1)], vec![int(2), int(2), int(2)]];
        assert_eq!(solve_augmented(&mut singular, 2), None);
    }

    #[test]
    fn echelon_span() {
        let mut e = Echelon::new(3);
        assert!(e.insert(&[int(1), int(1), int(0)]));
        assert!(e.insert(&[int(0), int(1), int(1)]));
        assert!(!e.insert(&[int(1), int(2), int(1)]));
        assert!(e.contains(&[rat(1, 2), int(0), rat(-1, 2)]));
        assert_eq!(e.rank(), 2);
    }

    #[test]
    fn span_coefficients() {
        let vs = vec![vec![int(1), int(0)], vec![int(1), int(1)]];
        assert_eq!(
            express_in_span(&vs, &[int(3), int(2)]),
            Some(vec![int(1), int(2)])
        );
        let vs = vec![vec![int(1), int(0)]];
        assert_eq!(express_in_span(&vs, &[int(0), int(1)]), None);
    }

    #[test]
    fn sparse_cancellation() {
        let mut v: SparseVec<Rational> = SparseVec::basis(3);
        v.add_at(3, &int(-1));
        assert!(v.is_zero());
    }
}

impl<T: Coeff + std::fmt::Display> std::fmt::Display for SparseVec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.iter().map(|(i, c)| format!("({c})w{i}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}
