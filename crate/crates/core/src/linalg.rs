//! Exact rational linear algebra: matrices over `BigRational`, reduced row
//! echelon form, nullspaces, and canonical subspaces.
//!
//! Subspaces are stored with their basis in reduced row echelon form, so two
//! subspaces are equal iff their canonical bases are equal componentwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Nearest rational with denominator 10^13; used to pin floating-point design
/// targets as exact coefficients.
pub fn rat_from_f64(x: f64) -> Rat {
    let den: i64 = 10_000_000_000_000;
    let num = (x * den as f64).round();
    Rat::new(
        BigInt::from_f64(num).expect("finite coefficient"),
        BigInt::from(den),
    )
}

pub fn vec_to_f64(v: &[Rat]) -> Vec<f64> {
    v.iter().map(rat_to_f64).collect()
}

/// Dense row-major matrix over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_vec(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rat::is_zero)
    }

    /// Gauss-Jordan inverse; `None` for singular matrices.
    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rat::one();
        }
        let pivots = rref_in_place(&mut aug);
        if pivots.len() < n || pivots.iter().enumerate().any(|(r, &c)| c != r) {
            return None;
        }
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| vec_to_f64(self.row(i))).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// In-place reduced row echelon form. Returns the pivot columns in order.
pub fn rref_in_place(m: &mut Mat) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = m[(p, j)].clone();
                m[(p, j)] = m[(r, j)].clone();
                m[(r, j)] = tmp;
            }
        }
        let inv = m[(r, c)].recip();
        for j in c..cols {
            let v = &m[(r, j)] * &inv;
            m[(r, j)] = v;
        }
        for i in 0..rows {
            if i != r && !m[(i, c)].is_zero() {
                let factor = m[(i, c)].clone();
                for j in c..cols {
                    let v = &m[(i, j)] - &factor * &m[(r, j)];
                    m[(i, j)] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// A linear subspace of Q^n with canonical (RREF) basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSubspace {
    ambient_dim: usize,
    basis: Vec<Vec<Rat>>,
}

impl LinearSubspace {
    pub fn span(ambient_dim: usize, vectors: &[Vec<Rat>]) -> Self {
        for v in vectors {
            assert_eq!(v.len(), ambient_dim, "vector of wrong dimension");
        }
        if vectors.is_empty() {
            return LinearSubspace {
                ambient_dim,
                basis: Vec::new(),
            };
        }
        let mut m = Mat::from_rows(vectors.to_vec());
        let pivots = rref_in_place(&mut m);
        let basis = (0..pivots.len()).map(|i| m.row(i).to_vec()).collect();
        LinearSubspace { ambient_dim, basis }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        LinearSubspace {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        LinearSubspace::span(ambient_dim, &Mat::identity(ambient_dim).rows_vec())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rat>] {
        &self.basis
    }

    /// Pivot columns of the canonical basis.
    fn pivot_cols(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|row| row.iter().position(|x| !x.is_zero()).expect("no zero rows"))
            .collect()
    }

    /// Coordinates of `v` in the canonical basis, if `v` lies in the span.
    ///
    /// With an RREF basis the candidate coordinates can be read off at the
    /// pivot columns; membership is then a single exact reconstruction check.
    pub fn coords_of(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(v.len(), self.ambient_dim);
        let pivots = self.pivot_cols();
        let coords: Vec<Rat> = pivots.iter().map(|&c| v[c].clone()).collect();
        let mut recon = vec![Rat::zero(); self.ambient_dim];
        for (c, row) in coords.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (r, b) in recon.iter_mut().zip(row) {
                *r += c * b;
            }
        }
        if recon.iter().zip(v).all(|(a, b)| a == b) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn contains_vector(&self, v: &[Rat]) -> bool {
        self.coords_of(v).is_some()
    }

    pub fn contains(&self, other: &LinearSubspace) -> bool {
        other.basis.iter().all(|v| self.contains_vector(v))
    }

    /// Intersection via the kernel of [A^T | -B^T].
    pub fn intersect(&self, other: &LinearSubspace) -> LinearSubspace {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let n = self.ambient_dim;
        let (a, b) = (self.dim(), other.dim());
        if a == 0 || b == 0 {
            return LinearSubspace::zero(n);
        }
        let mut m = Mat::zeros(n, a + b);
        for (col, v) in self.basis.iter().enumerate() {
            for i in 0..n {
                m[(i, col)] = v[i].clone();
            }
        }
        for (col, v) in other.basis.iter().enumerate() {
            for i in 0..n {
                m[(i, a + col)] = -v[i].clone();
            }
        }
        let kernel = nullspace(&m);
        let vectors: Vec<Vec<Rat>> = kernel
            .basis()
            .iter()
            .map(|uv| {
                let mut w = vec![Rat::zero(); n];
                for (coef, basis_vec) in uv[..a].iter().zip(&self.basis) {
                    if coef.is_zero() {
                        continue;
                    }
                    for (wi, bi) in w.iter_mut().zip(basis_vec) {
                        *wi += coef * bi;
                    }
                }
                w
            })
            .collect();
        LinearSubspace::span(n, &vectors)
    }

    /// Image of this subspace under the linear map `m` (applied to columns).
    pub fn map_by(&self, m: &Mat) -> LinearSubspace {
        let vectors: Vec<Vec<Rat>> = self.basis.iter().map(|v| m.mul_vec(v)).collect();
        LinearSubspace::span(m.nrows(), &vectors)
    }

    /// Matrix of the orthogonal projection onto this subspace.
    pub fn orthogonal_projection(&self) -> Mat {
        let n = self.ambient_dim;
        if self.basis.is_empty() {
            return Mat::zeros(n, n);
        }
        let a = Mat::from_rows(self.basis.clone());
        let at = a.transpose();
        let gram = a.mul(&at);
        let gram_inv = gram.inverse().expect("basis vectors are independent");
        at.mul(&gram_inv).mul(&a)
    }
}

/// Canonical basis of the right nullspace {x : m x = 0}.
pub fn nullspace(m: &Mat) -> LinearSubspace {
    let n = m.ncols();
    let mut r = m.clone();
    let pivots = rref_in_place(&mut r);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let free: Vec<usize> = (0..n).filter(|c| !pivot_set.contains(c)).collect();
    let mut vectors = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![Rat::zero(); n];
        v[f] = Rat::one();
        for (row_idx, &p) in pivots.iter().enumerate() {
            v[p] = -r[(row_idx, f)].clone();
        }
        vectors.push(v);
    }
    LinearSubspace::span(n, &vectors)
}

/// Solve m x = rhs; `None` if inconsistent. Under-determined systems return
/// the solution with free variables set to zero.
pub fn solve(m: &Mat, rhs: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(m.nrows(), rhs.len());
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut aug = Mat::zeros(rows, cols + 1);
    for i in 0..rows {
        for j in 0..cols {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, cols)] = rhs[i].clone();
    }
    let pivots = rref_in_place(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rat::zero(); cols];
    for (row_idx, &p) in pivots.iter().enumerate() {
        x[p] = aug[(row_idx, cols)].clone();
    }
    Some(x)
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

/// Scale a rational vector to a primitive integer vector with positive leading
/// entry, for deterministic hyperplane normals.
pub fn primitive_integer_vector(v: &[Rat]) -> Vec<Rat> {
    use num_integer::Integer;
    let mut den_lcm = BigInt::one();
    for x in v {
        if !x.is_zero() {
            den_lcm = den_lcm.lcm(x.denom());
        }
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(den_lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    let mut out: Vec<BigInt> = ints.into_iter().map(|x| x / &g).collect();
    if let Some(first) = out.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in out.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    out.into_iter().map(Rat::from_integer).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| rat_int(x)).collect()
    }

    #[test]
    fn rref_canonicalizes_spans() {
        let s1 = LinearSubspace::span(3, &[v(&[1, 1, 0]), v(&[0, 0, 1])]);
        let s2 = LinearSubspace::span(3, &[v(&[2, 2, 2]), v(&[1, 1, 3]), v(&[3, 3, 5])]);
        assert_eq!(s1, s2);
        assert_eq!(s1.dim(), 2);
    }

    #[test]
    fn nullspace_of_singular_matrix() {
        // x + y + z = 0 has a 2-dim solution space.
        let m = Mat::from_rows(vec![v(&[1, 1, 1])]);
        let ns = nullspace(&m);
        assert_eq!(ns.dim(), 2);
        for b in ns.basis() {
            assert!(dot(b, &v(&[1, 1, 1])).is_zero());
        }
    }

    #[test]
    fn intersect_planes_in_r3() {
        let p1 = LinearSubspace::span(3, &[v(&[1, 0, 0]), v(&[0, 1, 0])]);
        let p2 = LinearSubspace::span(3, &[v(&[0, 1, 0]), v(&[0, 0, 1])]);
        let line = p1.intersect(&p2);
        assert_eq!(line.dim(), 1);
        assert!(line.contains_vector(&v(&[0, 5, 0])));
    }

    #[test]
    fn coords_roundtrip_and_membership() {
        let s = LinearSubspace::span(4, &[v(&[1, 0, 1, 0]), v(&[0, 1, 0, 1])]);
        let x = v(&[3, -2, 3, -2]);
        let c = s.coords_of(&x).unwrap();
        assert_eq!(c, v(&[3, -2]));
        assert!(!s.contains_vector(&v(&[1, 0, 0, 0])));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Mat::from_rows(vec![v(&[2, 1, 0]), v(&[1, 3, 1]), v(&[0, 1, 4])]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(3));
        let singular = Mat::from_rows(vec![v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[0, 0, 1])]);
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn orthogonal_projection_is_idempotent_and_fixes_subspace() {
        let s = LinearSubspace::span(3, &[v(&[1, 1, 1]), v(&[1, -1, 0])]);
        let p = s.orthogonal_projection();
        assert_eq!(p.mul(&p), p);
        assert_eq!(p.mul_vec(&v(&[2, 0, 1])), {
            // 2,0,1 decomposed: projection stays in the span
            let proj = p.mul_vec(&v(&[2, 0, 1]));
            assert!(s.contains_vector(&proj));
            proj
        });
        // symmetric
        assert_eq!(p.transpose(), p);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = Mat::from_rows(vec![v(&[1, 2]), v(&[3, 4])]);
        let x = solve(&m, &v(&[5, 6])).unwrap();
        assert_eq!(m.mul_vec(&x), v(&[5, 6]));
        let sing = Mat::from_rows(vec![v(&[1, 1]), v(&[1, 1])]);
        assert!(solve(&sing, &v(&[0, 1])).is_none());
    }
}
