//! Dense so(n) algebra for small n, plus the so(3) hat map and the
//! so(4) = so(3) ⊕ so(3) splitting.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Skew-symmetric n×n matrix. Only the strict upper triangle is free; the
/// lower triangle is always the exact negation.
#[derive(Clone, Debug, PartialEq)]
pub struct Skew<T: Scalar> {
    n: usize,
    data: Vec<T>,
}

pub type SkewMatrix = Skew<f64>;
pub type CSkewMatrix = Skew<Complex64>;

/// Number of independent entries of so(n).
pub fn so_dim(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Index pairs (i, j), i < j, in lexicographic order — the coordinate order
/// used everywhere in the crate.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(so_dim(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// Position of (i, j) (i < j) in `pairs(n)`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl<T: Scalar> Skew<T> {
    pub fn zeros(n: usize) -> Self {
        Skew { n, data: vec![T::zero(); n * n] }
    }

    /// Build from the upper-triangle coordinates in `pairs(n)` order.
    pub fn from_upper(n: usize, coords: &[T]) -> Result<Self> {
        if coords.len() != so_dim(n) {
            return Err(Error::DimensionMismatch { expected: so_dim(n), found: coords.len() });
        }
        let mut m = Self::zeros(n);
        for (k, (i, j)) in pairs(n).into_iter().enumerate() {
            m.set(i, j, coords[k]);
        }
        Ok(m)
    }

    /// Build from a dense row-major array; rejects anything that is not
    /// exactly skew.
    pub fn from_dense(n: usize, dense: &[T]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: dense.len() });
        }
        for i in 0..n {
            if dense[i * n + i] != T::zero() {
                return Err(Error::NotStructured("skew-symmetric (nonzero diagonal)"));
            }
            for j in i + 1..n {
                if dense[i * n + j] != -dense[j * n + i] {
                    return Err(Error::NotStructured("skew-symmetric"));
                }
            }
        }
        Ok(Skew { n, data: dense.to_vec() })
    }

    /// Elementary matrix with +1 at (i, j) and −1 at (j, i).
    pub fn elementary(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.set(i, j, T::from_f64(1.0));
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Sets (i, j) and the mirrored (j, i) entry.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i != j, "diagonal of a skew matrix is fixed at zero");
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = -v;
    }

    pub fn upper(&self) -> Vec<T> {
        pairs(self.n).into_iter().map(|(i, j)| self.get(i, j)).collect()
    }

    pub fn dense(&self) -> &[T] {
        &self.data
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Skew { n: self.n, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Skew { n: self.n, data }
    }

    pub fn scale(&self, s: T) -> Self {
        Skew { n: self.n, data: self.data.iter().map(|&a| a * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &a| m.max(a.modulus()))
    }

    /// Dense product self·other (not skew in general).
    pub fn matmul(&self, other: &Self) -> Vec<T> {
        dense_mul(self.n, &self.data, &other.data)
    }

    /// Trace of the product self·other.
    pub fn trace_product(&self, other: &Self) -> T {
        let n = self.n;
        let mut acc = T::zero();
        for i in 0..n {
            for k in 0..n {
                acc = acc + self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }
}

impl SkewMatrix {
    pub fn to_complex(&self) -> CSkewMatrix {
        Skew { n: self.n, data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }
}

fn dense_mul<T: Scalar>(n: usize, a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] = out[i * n + j] + aik * b[k * n + j];
            }
        }
    }
    out
}

/// [a, b] = ab − ba.
pub fn commutator<T: Scalar>(a: &Skew<T>, b: &Skew<T>) -> Result<Skew<T>> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, found: b.n });
    }
    let n = a.n;
    let ab = dense_mul(n, &a.data, &b.data);
    let ba = dense_mul(n, &b.data, &a.data);
    let mut out = Skew::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            out.set(i, j, ab[i * n + j] - ba[i * n + j]);
        }
    }
    Ok(out)
}

/// Symmetric n×n real matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: dense.len() });
        }
        for i in 0..n {
            for j in i + 1..n {
                if dense[i * n + j] != dense[j * n + i] {
                    return Err(Error::NotStructured("symmetric"));
                }
            }
        }
        Ok(SymMatrix { n, data: dense.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn dense(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).abs() <= tol))
    }
}

/// Ω = JM + MJ.
pub fn inertia_map<T: Scalar>(j: &SymMatrix, m: &Skew<T>) -> Result<Skew<T>> {
    if j.n != m.n {
        return Err(Error::DimensionMismatch { expected: j.n, found: m.n });
    }
    let n = m.n;
    let mut out = Skew::zeros(n);
    for a in 0..n {
        for b in a + 1..n {
            let mut acc = T::zero();
            for k in 0..n {
                let jak = j.get(a, k);
                if jak != 0.0 {
                    acc = acc + T::from_f64(jak) * m.get(k, b);
                }
                let jkb = j.get(k, b);
                if jkb != 0.0 {
                    acc = acc + m.get(a, k) * T::from_f64(jkb);
                }
            }
            out.set(a, b, acc);
        }
    }
    Ok(out)
}

pub type Vec3 = [f64; 3];

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// hat(v)·x = v × x.
pub fn hat(v: &Vec3) -> SkewMatrix {
    let mut m = SkewMatrix::zeros(3);
    m.set(0, 1, -v[2]);
    m.set(0, 2, v[1]);
    m.set(1, 2, -v[0]);
    m
}

pub fn unhat(m: &SkewMatrix) -> Result<Vec3> {
    if m.n != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: m.n });
    }
    Ok([-m.get(1, 2), m.get(0, 2), -m.get(0, 1)])
}

/// Vector operator A (Ω = A·M on vectors) ↔ so(3) inertia J with
/// JM̂ + M̂J = (AM)^, namely J = (tr A / 2)·I − A.
pub fn so3_inertia_from_operator(a: &SymMatrix) -> SymMatrix {
    let mut j = a.clone();
    let half_tr = a.trace() / 2.0;
    for i in 0..3 {
        for k in 0..3 {
            let v = if i == k { half_tr - a.get(i, i) } else { -a.get(i, k) };
            j.data[i * 3 + k] = v;
        }
    }
    j
}

pub fn so3_operator_from_inertia(j: &SymMatrix) -> SymMatrix {
    let mut a = j.clone();
    let tr = j.trace();
    for i in 0..3 {
        for k in 0..3 {
            let v = if i == k { tr - j.get(i, i) } else { -j.get(i, k) };
            a.data[i * 3 + k] = v;
        }
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vec3Pair {
    pub plus: Vec3,
    pub minus: Vec3,
}

/// so(4) → (M₊, M₋) per the table
/// ```text
///  0    −p3   p2  −q1
///  p3    0   −p1  −q2
/// −p2   p1    0   −q3
///  q1   q2   q3    0
/// ```
pub fn split_so4(m: &SkewMatrix) -> Result<Vec3Pair> {
    if m.n != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: m.n });
    }
    Ok(Vec3Pair {
        plus: [-m.get(1, 2), m.get(0, 2), -m.get(0, 1)],
        minus: [-m.get(0, 3), -m.get(1, 3), -m.get(2, 3)],
    })
}

pub fn join_so4(p: &Vec3Pair) -> SkewMatrix {
    let mut m = SkewMatrix::zeros(4);
    m.set(0, 1, -p.plus[2]);
    m.set(0, 2, p.plus[1]);
    m.set(1, 2, -p.plus[0]);
    m.set(0, 3, -p.minus[0]);
    m.set(1, 3, -p.minus[1]);
    m.set(2, 3, -p.minus[2]);
    m
}

/// (M₁, M₂) = ((M₊+M₋)/2, (M₊−M₋)/2).
pub fn so4_halves(p: &Vec3Pair) -> (Vec3, Vec3) {
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    for k in 0..3 {
        a[k] = 0.5 * (p.plus[k] + p.minus[k]);
        b[k] = 0.5 * (p.plus[k] - p.minus[k]);
    }
    (a, b)
}

pub fn so4_from_halves(a: &Vec3, b: &Vec3) -> Vec3Pair {
    let mut plus = [0.0; 3];
    let mut minus = [0.0; 3];
    for k in 0..3 {
        plus[k] = a[k] + b[k];
        minus[k] = a[k] - b[k];
    }
    Vec3Pair { plus, minus }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_skew(n: usize, seed: i64) -> SkewMatrix {
        let coords: Vec<f64> =
            (0..so_dim(n)).map(|k| (((k as i64 * 7 + seed * 13) % 11) - 5) as f64).collect();
        SkewMatrix::from_upper(n, &coords).unwrap()
    }

    #[test]
    fn elementary_commutator() {
        let e12 = SkewMatrix::elementary(3, 0, 1);
        let e13 = SkewMatrix::elementary(3, 0, 2);
        let e23 = SkewMatrix::elementary(3, 1, 2);
        assert_eq!(commutator(&e12, &e13).unwrap(), e23.scale(-1.0));
    }

    #[test]
    fn commutator_self_and_antisymmetry() {
        let x = int_skew(5, 1);
        let y = int_skew(5, 2);
        assert_eq!(commutator(&x, &x).unwrap().max_abs(), 0.0);
        assert_eq!(commutator(&x, &y).unwrap(), commutator(&y, &x).unwrap().scale(-1.0));
        assert!(commutator(&x, &int_skew(4, 0)).is_err());
    }

    #[test]
    fn jacobi_exact_on_integers() {
        for n in 3..=6 {
            let (a, b, c) = (int_skew(n, 1), int_skew(n, 2), int_skew(n, 3));
            let t1 = commutator(&commutator(&a, &b).unwrap(), &c).unwrap();
            let t2 = commutator(&commutator(&b, &c).unwrap(), &a).unwrap();
            let t3 = commutator(&commutator(&c, &a).unwrap(), &b).unwrap();
            assert_eq!(t1.add(&t2).add(&t3).max_abs(), 0.0);
        }
    }

    #[test]
    fn hat_convention() {
        let m = hat(&[0.0, 0.0, 1.0]);
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(1, 0), 1.0);
        let a = hat(&[1.0, 0.0, 0.0]);
        let b = [0.0, 1.0, 0.0];
        let ab: Vec<f64> = (0..3).map(|i| (0..3).map(|k| a.get(i, k) * b[k]).sum()).collect();
        assert_eq!(ab, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn hat_bracket_is_cross() {
        let a = [0.3, -1.2, 2.0];
        let b = [1.5, 0.25, -0.75];
        let lhs = commutator(&hat(&a), &hat(&b)).unwrap();
        let rhs = hat(&cross(&a, &b));
        assert!(lhs.sub(&rhs).max_abs() < 1e-15);
    }

    #[test]
    fn split_table_entry() {
        let mut m = SkewMatrix::zeros(4);
        m.set(0, 1, 1.0);
        let p = split_so4(&m).unwrap();
        assert_eq!(p.plus, [0.0, 0.0, -1.0]);
        assert_eq!(p.minus, [0.0, 0.0, 0.0]);
        let z = split_so4(&SkewMatrix::zeros(4)).unwrap();
        assert_eq!(z, Vec3Pair { plus: [0.0; 3], minus: [0.0; 3] });
    }

    #[test]
    fn inertia_examples() {
        let m = int_skew(4, 3);
        let half = SymMatrix::diag(&[0.5; 4]);
        assert_eq!(inertia_map(&half, &m).unwrap(), m);

        // block form (6): J1, J3, J13, J24
        let (j1, j3, j13, j24) = (1.0, 3.0, 0.7, 2.0);
        let mut j = SymMatrix::diag(&[j1, j1, j3, j3]);
        j.set(0, 2, j13);
        j.set(1, 3, j24);
        let om = inertia_map(&j, &SkewMatrix::elementary(4, 0, 2)).unwrap();
        assert_eq!(om.get(0, 2), j1 + j3);
        let om = inertia_map(&j, &SkewMatrix::elementary(4, 0, 3)).unwrap();
        assert_eq!(om.get(0, 1), j24);
    }

    #[test]
    fn operator_inertia_roundtrip() {
        let mut a = SymMatrix::diag(&[1.0, 1.0, 3.0]);
        a.set(0, 2, 0.4);
        let j = so3_inertia_from_operator(&a);
        assert_eq!(so3_operator_from_inertia(&j), a);
        let v = [0.2, -0.7, 1.1];
        let om = unhat(&inertia_map(&j, &hat(&v)).unwrap()).unwrap();
        for i in 0..3 {
            let av: f64 = (0..3).map(|k| a.get(i, k) * v[k]).sum();
            assert!((om[i] - av).abs() < 1e-15);
        }
    }

    #[test]
    fn pair_index_matches_pairs() {
        for n in 3..=8 {
            for (k, (i, j)) in pairs(n).into_iter().enumerate() {
                assert_eq!(pair_index(n, i, j), k);
            }
        }
    }

    #[test]
    fn from_dense_rejects_nonskew() {
        assert!(SkewMatrix::from_dense(2, &[0.0, 1.0, 1.0, 0.0]).is_err());
        assert!(SkewMatrix::from_dense(2, &[1.0, 1.0, -1.0, 0.0]).is_err());
        assert!(SymMatrix::from_dense(2, &[0.0, 1.0, 2.0, 0.0]).is_err());
    }
}
