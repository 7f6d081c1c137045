//! Arithmetic axiom (ArA): tangent/transversal split of the generalized
//! eigenspaces of K relative to the symplectic leaf through C, and the
//! rationality and pairing conditions on the exponents.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::BalanceSolution;
use crate::error::{Error, Result};
use crate::numeric::{cluster, eigenvalues, is_integer, is_rational, sort_complex};
use crate::poly::Poly;

pub const RATIONAL_QMAX: i64 = 24;
pub const RATIONAL_TOL: f64 = 1e-7;
const CLUSTER_TOL: f64 = 1e-6;
/// Singular values of dC·V below this (relative) count as zero, above
/// `SEP_HI` as nonzero; anything between is ambiguous.
const SEP_LO: f64 = 1e-8;
const SEP_HI: f64 = 1e-4;

#[derive(Clone, Debug, Serialize)]
pub struct AraReport {
    /// Number of functions supplied, and the rank of their differentials
    /// at C (the codimension of the level set through C).
    pub supplied: usize,
    pub p: usize,
    pub tangent: Vec<Complex64>,
    pub transversal: Vec<Complex64>,
    /// n − p tangent and p transversal.
    pub split_ok: bool,
    pub transversal_rational: bool,
    pub tangent_rational: usize,
    pub half_tangent_rational: bool,
    /// Irrational tangential exponents split into pairs with integer differences.
    pub irrational_paired: bool,
    pub pass: bool,
}

/// Gradients of the Casimirs at C, one row each.
pub fn casimir_gradients(casimirs: &[Poly], at: &[Complex64]) -> Vec<DVector<Complex64>> {
    casimirs.iter().map(|p| DVector::from_iterator(at.len(), p.gradient(at.len()).iter().map(|g| g.eval(at)))).collect()
}

pub fn ara_check(sol: &BalanceSolution, casimirs: &[Poly]) -> Result<AraReport> {
    ara_check_matrix(&sol.k, &casimir_gradients(casimirs, &sol.c))
}

/// ArA for a Kowalevski matrix `k` and Casimir differentials `grads` at C.
pub fn ara_check_matrix(k: &DMatrix<Complex64>, grads: &[DVector<Complex64>]) -> Result<AraReport> {
    let n = k.nrows();
    let supplied = grads.len();
    let mut ev = eigenvalues(k);
    sort_complex(&mut ev);
    let dc = DMatrix::from_fn(supplied, n, |r, j| grads[r][j]);
    let dscale = dc.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(1e-300);
    let p = if supplied == 0 { 0 } else { numeric_rank(&dc, dscale)? };
    let mut tangent = Vec::new();
    let mut transversal = Vec::new();
    for (lambda, mult) in cluster(&ev, CLUSTER_TOL) {
        // generalized eigenspace: null space of (K − λI)^m
        let mut a = k.clone();
        for i in 0..n {
            a[(i, i)] -= lambda;
        }
        let mut pw = DMatrix::<Complex64>::identity(n, n);
        for _ in 0..mult {
            pw = &pw * &a;
        }
        let svd = pw.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let basis = DMatrix::from_fn(n, mult, |i, col| vt[(order[col], i)].conj());
        let rank = if p == 0 { 0 } else { numeric_rank(&(&dc * &basis), dscale).map_err(|e| match e {
            Error::ClassificationAmbiguous(m) => Error::ClassificationAmbiguous(format!("exponent {lambda}: {m}")),
            e => e,
        })? };
        transversal.extend(std::iter::repeat_n(lambda, rank));
        tangent.extend(std::iter::repeat_n(lambda, mult - rank));
    }
    let rational = |z: &Complex64| is_rational(*z, RATIONAL_QMAX, RATIONAL_TOL);
    let transversal_rational = transversal.iter().all(rational);
    let tangent_rational = tangent.iter().filter(|z| rational(z)).count();
    let irr: Vec<Complex64> = tangent.iter().filter(|z| !rational(z)).copied().collect();
    let irrational_paired = pair_up(&irr);
    let split_ok = transversal.len() == p && tangent.len() == n - p;
    let half = 2 * tangent_rational >= tangent.len();
    Ok(AraReport {
        supplied,
        p,
        tangent,
        transversal,
        split_ok,
        transversal_rational,
        tangent_rational,
        half_tangent_rational: half,
        irrational_paired,
        pass: split_ok && transversal_rational && half && irrational_paired,
    })
}

/// Rank with the tangent/transversal thresholds; values between them are
/// reported rather than guessed.
fn numeric_rank(m: &DMatrix<Complex64>, scale: f64) -> Result<usize> {
    let mut r = 0;
    for &s in m.clone().svd(false, false).singular_values.iter() {
        let rel = s / scale;
        if rel > SEP_HI {
            r += 1;
        } else if rel > SEP_LO {
            return Err(Error::ClassificationAmbiguous(format!("component {rel:.1e} neither tangent nor transversal")));
        }
    }
    Ok(r)
}

/// Perfect matching of `v` into pairs with integer differences (backtracking).
fn pair_up(v: &[Complex64]) -> bool {
    fn go(rest: &mut Vec<Complex64>) -> bool {
        let Some(first) = rest.pop() else { return true };
        for k in 0..rest.len() {
            if is_integer(first - rest[k], RATIONAL_TOL) {
                let other = rest.remove(k);
                if go(rest) {
                    return true;
                }
                rest.insert(k, other);
            }
        }
        rest.push(first);
        false
    }
    let mut rest = v.to_vec();
    go(&mut rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c;

    fn unit(n: usize, k: usize) -> DVector<Complex64> {
        DVector::from_fn(n, |i, _| if i == k { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    fn diag(v: &[Complex64]) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
    }

    #[test]
    fn lone_irrational_fails() {
        let s2 = 2f64.sqrt();
        let k = diag(&[c(-1.0, 0.0), c(s2, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let r = ara_check_matrix(&k, &[unit(4, 3)]).unwrap();
        assert!(r.split_ok && r.transversal_rational && r.half_tangent_rational);
        assert!(!r.irrational_paired && !r.pass);
    }

    #[test]
    fn paired_irrationals_pass() {
        let s2 = 2f64.sqrt();
        let k = diag(&[c(s2, 0.0), c(1.0 + s2, 0.0), c(2.0, 0.0), c(-1.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let r = ara_check_matrix(&k, &[unit(6, 4), unit(6, 5)]).unwrap();
        assert_eq!(r.transversal, vec![c(3.0, 0.0), c(4.0, 0.0)]);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn repeated_exponent_split() {
        // eigenvalue 2 twice, one copy tangent and one transversal
        let k = diag(&[c(2.0, 0.0), c(2.0, 0.0), c(-1.0, 0.0)]);
        let r = ara_check_matrix(&k, &[unit(3, 1)]).unwrap();
        assert_eq!(r.transversal.len(), 1);
        assert_eq!(r.tangent.len(), 2);
    }

    #[test]
    fn ambiguous_reported() {
        let k = diag(&[c(2.0, 0.0), c(3.0, 0.0)]);
        let g = DVector::from_vec(vec![c(1e-6, 0.0), c(1.0, 0.0)]);
        assert!(matches!(ara_check_matrix(&k, &[g]), Err(Error::ClassificationAmbiguous(_))));
    }
}
