//! Three-dimensional systems H₁ = H₀ + J·b·M₃ on e(3), with H₀ the
//! Lagrange top ½(J₁(M₁²+M₂²) + J₃M₃²) + Γ₃: germs of b at the balance
//! branches, characteristic polynomials of the Kowalevski matrices K₁..K₄,
//! and the Theorem 5 filter.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{ara_check_matrix, casimir_gradients, check_qh, solve_balances, AraReport, Mask, QHSystem, QhReport, SolveOptions};
use crate::error::{Error, Result};
use crate::numeric::{c, eigenvalues, horner, is_integer, sort_complex};
use crate::poisson::{e3_standard, ham_field_poly, standard_casimirs};
use crate::poly::{Monomial, Poly};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GermModel {
    pub j: f64,
    pub j1: f64,
    pub j3: f64,
}

impl Default for GermModel {
    fn default() -> Self {
        GermModel { j: 1.0, j1: 1.0, j3: 0.6 }
    }
}

impl GermModel {
    pub fn h0(&self) -> Poly {
        let v = Poly::var;
        v(0).pow(2).add(&v(1).pow(2)).scale_re(0.5 * self.j1).add(&v(2).pow(2).scale_re(0.5 * self.j3)).add(&v(5))
    }

    pub fn h1(&self, b: &Poly) -> Poly {
        self.h0().add(&b.mul(&Poly::var(2)).scale_re(self.j))
    }

    /// Induced field on (M₁,M₂,M₃,Γ₁,Γ₂,Γ₃) with g = (1,1,1,2,2,2).
    pub fn field(&self, b: &Poly) -> QHSystem {
        QHSystem::new(ham_field_poly(&e3_standard(), &self.h1(b)), vec![1, 1, 1, 2, 2, 2]).expect("six components")
    }
}

/// The four branches K₁..K₄: (J·f, s) with ĉ₁ = s·i·ĉ₂.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    K1,
    K2,
    K3,
    K4,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::K1, Branch::K2, Branch::K3, Branch::K4];

    pub fn index(self) -> usize {
        self as usize + 1
    }

    /// J·f on this branch.
    pub fn jf(self) -> Complex64 {
        match self {
            Branch::K1 => c(0.0, -1.0),
            Branch::K2 => c(0.0, 2.0),
            Branch::K3 => c(0.0, 1.0),
            Branch::K4 => c(0.0, -2.0),
        }
    }

    /// s in ĉ₁ = s·i·ĉ₂.
    pub fn sign(self) -> f64 {
        match self {
            Branch::K1 | Branch::K4 => 1.0,
            Branch::K2 | Branch::K3 => -1.0,
        }
    }
}

/// Value f and first partials f₁..f₆ of b at a balance, with ĉ₂ and
/// X = Jĉ₂f₂, Y = Jĉ₂f₁.
#[derive(Clone, Debug, Serialize)]
pub struct GermData {
    pub f: Complex64,
    pub fs: [Complex64; 6],
    pub c2: Complex64,
    pub x: Complex64,
    pub y: Complex64,
}

impl GermData {
    pub fn new(j: f64, f: Complex64, fs: [Complex64; 6], c2: Complex64) -> Self {
        GermData { f, fs, c2, x: c2 * fs[1] * j, y: c2 * fs[0] * j }
    }

    /// Germ of a b that is linear in M at the balance of `branch`
    /// (ĉ₂ fixed by f = b(Ĉ)).
    pub fn from_b(model: &GermModel, b: &Poly, branch: Branch) -> Result<Self> {
        let bad = |reason: &str| Error::BranchInconsistent { branch: branch.index(), reason: reason.to_string() };
        if b.degree() > 1 || !b.coeff(&Monomial::one()).eq(&c(0.0, 0.0)) {
            return Err(bad("b must be linear and homogeneous in M (QH)"));
        }
        let mut fs = [c(0.0, 0.0); 6];
        for (k, slot) in fs.iter_mut().enumerate() {
            *slot = b.coeff(&Monomial::var(k));
        }
        if b.num_vars() > 6 || fs[3..].iter().any(|v| v.norm() != 0.0) {
            return Err(bad("Γ-dependent b breaks quasi-homogeneity"));
        }
        // f = b(Ĉ) = (s·i·f₁ + f₂)·ĉ₂ with ĉ₃ = 0
        let slope = c(0.0, branch.sign()) * fs[0] + fs[1];
        if slope.norm() < 1e-12 {
            return Err(bad("b vanishes on this branch"));
        }
        let f = branch.jf() / model.j;
        Ok(GermData::new(model.j, f, fs, f / slope))
    }

    /// Germ with prescribed X, Y and ĉ₂ = 1/J (so f₁ = Y, f₂ = X).
    pub fn from_xy(model: &GermModel, branch: Branch, x: Complex64, y: Complex64) -> Self {
        let mut fs = [c(0.0, 0.0); 6];
        fs[0] = y;
        fs[1] = x;
        GermData::new(model.j, branch.jf() / model.j, fs, c(1.0 / model.j, 0.0))
    }
}

/// Balance point Ĉ and Kowalevski matrix of `branch` for `germ`.
pub fn germ_kowalevski(model: &GermModel, germ: &GermData, branch: Branch) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let bad = |reason: String| Error::BranchInconsistent { branch: branch.index(), reason };
    if (germ.f * model.j - branch.jf()).norm() > 1e-9 {
        return Err(bad(format!("J·f = {} but the branch requires {}", germ.f * model.j, branch.jf())));
    }
    let j = model.j;
    let m = [c(0.0, branch.sign()) * germ.c2, germ.c2, c(0.0, 0.0)];
    // ∇H₁ at Ĉ (ĉ₃ = 0): (J₁ĉ₁, J₁ĉ₂, J₃ĉ₃ + Jf, 0, 0, 1); Hessian at germ level
    let grad = [m[0] * model.j1, m[1] * model.j1, m[2] * model.j3 + germ.f * j, c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    let mut hess = DMatrix::<Complex64>::zeros(6, 6);
    for (k, v) in [model.j1, model.j1, model.j3].iter().enumerate() {
        hess[(k, k)] = c(*v, 0.0);
    }
    for k in 0..6 {
        hess[(2, k)] += germ.fs[k] * j;
        hess[(k, 2)] += germ.fs[k] * j;
    }
    let pi = e3_standard();
    let g = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];
    // balance g·C + π(C)∇H₁ = 0 is affine in Γ once M is fixed
    let pi_at = |z: &[Complex64]| {
        DMatrix::from_fn(6, 6, |r, s| {
            let e = pi.entry_poly(r, s);
            e.eval(z)
        })
    };
    let mut z0 = [m[0], m[1], m[2], c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    let resid = |z: &[Complex64]| {
        let p = pi_at(z);
        let gr = DVector::from_row_slice(&grad);
        let f = p * gr;
        DVector::from_fn(6, |i, _| f[i] + z[i] * g[i])
    };
    let r0 = resid(&z0);
    let mut a = DMatrix::<Complex64>::zeros(6, 3);
    for k in 0..3 {
        let mut e = z0;
        e[3 + k] = c(1.0, 0.0);
        let col = resid(&e) - &r0;
        a.set_column(k, &col);
    }
    let sol = a.clone().svd(true, true).solve(&(-&r0), 1e-13).map_err(|e| bad(e.to_string()))?;
    for k in 0..3 {
        z0[3 + k] = sol[k];
    }
    let worst = resid(&z0).camax();
    if worst > 1e-8 {
        return Err(bad(format!("no balance with this germ (residual {worst:.1e})")));
    }
    // K_ij = Σ_l ∂_j π^{il} ∂_l H₁ + Σ_l π^{il} ∂_l∂_j H₁ + g_i δ_ij
    let p = pi_at(&z0);
    let mut k = &p * &hess;
    for i in 0..6 {
        for l in 0..6 {
            if grad[l].norm() == 0.0 {
                continue;
            }
            for &(s, v) in pi.partials(i, l) {
                k[(i, s)] += grad[l] * v;
            }
        }
        k[(i, i)] += g[i];
    }
    Ok((z0.to_vec(), k))
}

/// Ascending coefficients of det(wI − K) (Faddeev–LeVerrier); for even
/// size this is det(K − wI).
pub fn charpoly(k: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = k.nrows();
    let mut coeffs = vec![c(0.0, 0.0); n + 1];
    coeffs[n] = c(1.0, 0.0);
    let mut mk = DMatrix::<Complex64>::zeros(n, n);
    for step in 1..=n {
        let mut next = k * &mk;
        for i in 0..n {
            next[(i, i)] += coeffs[n - step + 1];
        }
        mk = next;
        let akm = k * &mk;
        coeffs[n - step] = -akm.trace() / step as f64;
    }
    coeffs
}

/// Pch of `branch` for `germ` (ascending coefficients).
pub fn germ_charpolys(model: &GermModel, germ: &GermData, branch: Branch) -> Result<Vec<Complex64>> {
    Ok(charpoly(&germ_kowalevski(model, germ, branch)?.1))
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchResult {
    pub branch: usize,
    pub applicable: bool,
    pub reason: Option<String>,
    pub germ: Option<GermData>,
    pub charpoly: Vec<Complex64>,
    pub roots: Vec<Complex64>,
    pub integer_coeffs: bool,
    /// |Pch(−1)|.
    pub pch_minus1: f64,
    /// Coefficient of w⁵ and the printed value −9 − 2Y of (46).
    pub a15: Option<Complex64>,
    pub a15_printed: Option<Complex64>,
    pub ara: Option<AraReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem5Verdict {
    pub b: String,
    pub qh: QhReport,
    /// "branches", "balances" (no branch applies) or "qh" (rejected early).
    pub mode: String,
    pub branches: Vec<BranchResult>,
    /// Prop 13(b): Pch coefficients agree for J ∈ {1, 2, 7}.
    pub j_independent: bool,
    pub balances_ara: Vec<AraReport>,
    pub pass: bool,
}

const INT_TOL: f64 = 1e-8;
const PROP14_TOL: f64 = 1e-9;

fn branch_result(model: &GermModel, b: &Poly, branch: Branch) -> BranchResult {
    let mut out = BranchResult {
        branch: branch.index(),
        applicable: false,
        reason: None,
        germ: None,
        charpoly: Vec::new(),
        roots: Vec::new(),
        integer_coeffs: false,
        pch_minus1: f64::NAN,
        a15: None,
        a15_printed: None,
        ara: None,
        pass: false,
    };
    let run = || -> Result<(GermData, Vec<Complex64>, DMatrix<Complex64>)> {
        let germ = GermData::from_b(model, b, branch)?;
        let (z, k) = germ_kowalevski(model, &germ, branch)?;
        Ok((germ, z, k))
    };
    match run() {
        Err(e) => out.reason = Some(e.to_string()),
        Ok((germ, z, k)) => {
            let cp = charpoly(&k);
            out.applicable = true;
            out.integer_coeffs = cp.iter().all(|v| is_integer(*v, INT_TOL));
            out.pch_minus1 = horner(&cp, c(-1.0, 0.0)).norm();
            out.a15 = Some(cp[5]);
            out.a15_printed = Some(c(-9.0, 0.0) - germ.y * 2.0);
            out.roots = eigenvalues(&k);
            sort_complex(&mut out.roots);
            let cas: Vec<Poly> = standard_casimirs(3).into_iter().map(|(_, p)| p).collect();
            match ara_check_matrix(&k, &casimir_gradients(&cas, &z)) {
                Ok(a) => out.ara = Some(a),
                Err(e) => out.reason = Some(e.to_string()),
            }
            out.pass = out.integer_coeffs
                && out.pch_minus1 < PROP14_TOL
                && out.ara.as_ref().is_some_and(|a| a.pass);
            out.charpoly = cp;
            out.germ = Some(germ);
        }
    }
    out
}

/// Theorem 5 filter for b (polynomial in z₁..z₆): (QH) on the induced
/// field, then Props 13–14 and (ArA) on every applicable branch. When no
/// branch applies (b vanishes on all of them) the actual balances on
/// {ĉ₃ = 0} are checked against (ArA) instead.
pub fn theorem5_filter(b: &Poly, model: &GermModel, seed: u64) -> Result<Theorem5Verdict> {
    let sys = model.field(b);
    let qh = check_qh(&sys, seed);
    let mut v = Theorem5Verdict {
        b: b.to_string(),
        qh: qh.clone(),
        mode: "qh".into(),
        branches: Vec::new(),
        j_independent: false,
        balances_ara: Vec::new(),
        pass: false,
    };
    if !qh.pass {
        return Ok(v);
    }
    v.branches = Branch::ALL.iter().map(|&br| branch_result(model, b, br)).collect();
    v.j_independent = [2.0, 7.0].iter().all(|&j| {
        let other = GermModel { j, ..*model };
        Branch::ALL.iter().zip(&v.branches).all(|(&br, base)| {
            let r = branch_result(&other, b, br);
            r.applicable == base.applicable
                && r.charpoly.iter().zip(&base.charpoly).all(|(a, b)| (a - b).norm() < INT_TOL)
        })
    });
    if v.branches.iter().any(|r| r.applicable) {
        v.mode = "branches".into();
        v.pass = v.j_independent && v.branches.iter().filter(|r| r.applicable).all(|r| r.pass);
    } else {
        v.mode = "balances".into();
        let cas: Vec<Poly> = standard_casimirs(3).into_iter().map(|(_, p)| p).collect();
        let opts = SolveOptions { seed, ..SolveOptions::default() };
        let sols = solve_balances(&sys, &Mask::zeros(&[2]), &opts);
        let mut ok = !sols.is_empty();
        for s in &sols {
            let a = super::ara_check(s, &cas)?;
            ok &= a.pass && s.exponents.iter().all(|e| crate::numeric::is_rational(*e, 24, 1e-7));
            v.balances_ara.push(a);
        }
        v.pass = ok;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kowalevski::field_from_spec;
    use crate::models::{make_spec, Kind, Params};

    fn b(src: &str) -> Poly {
        Poly::parse(src).unwrap()
    }

    #[test]
    fn germ_matrix_matches_field() {
        let model = GermModel { j: 1.3, j1: 1.0, j3: 0.6 };
        for src in ["z1 + 2*z3", "-3*z1 + i*z2", "z2 - 0.5*z1"] {
            let bp = b(src);
            let sys = model.field(&bp);
            for br in Branch::ALL {
                let Ok(germ) = GermData::from_b(&model, &bp, br) else { continue };
                let (z, k) = germ_kowalevski(&model, &germ, br).unwrap();
                assert!(sys.balance_residual(&z).iter().all(|r| r.norm() < 1e-10), "{src} {br:?}");
                assert!((sys.kowalevski_matrix(&z) - &k).camax() < 1e-12);
                assert!((bp.eval(&z) - germ.f).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn classical_ha_is_b_equal_z1() {
        // H₀ + J z₁z₃ is the classical HA Hamiltonian with J₁₃ = J
        let model = GermModel { j: 0.8, j1: 1.0, j3: 0.6 };
        let p: Params = [("J1", 1.0), ("J3", 0.6), ("J13", 0.8), ("z0", 1.0)].iter().map(|&(k, v)| (k.to_string(), v)).collect();
        let spec = make_spec(Kind::ClassicalHA, 3, &p).unwrap();
        let want = field_from_spec(&spec);
        let got = model.field(&b("z1"));
        for (a, w) in got.f.iter().zip(&want.f) {
            assert!(a.sub(w).max_coeff() < 1e-14, "{a} vs {w}");
        }
    }

    #[test]
    fn charpoly_matches_eigenvalues() {
        let k = DMatrix::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let cp = charpoly(&k);
        for e in crate::numeric::eigenvalues(&k) {
            assert!(horner(&cp, e).norm() < 1e-12);
        }
    }

    #[test]
    fn prop14_on_all_branches() {
        let model = GermModel::default();
        for src in ["z1 + 0.5*z3", "-3*z1 + i*z2", "z1 + 2*z3"] {
            let v = theorem5_filter(&b(src), &model, 1).unwrap();
            for r in v.branches.iter().filter(|r| r.applicable) {
                assert!(r.pch_minus1 < 1e-9, "{src}: {r:?}");
            }
        }
    }

    #[test]
    fn theorem5_classical_family_passes() {
        for k in [0.5, 2.0] {
            let v = theorem5_filter(&b(&format!("z1 + {k}*z3")), &GermModel::default(), 1).unwrap();
            assert!(v.pass, "{v:?}");
            assert_eq!(v.mode, "branches");
        }
    }

    #[test]
    fn gamma_dependent_b_rejected() {
        let v = theorem5_filter(&b("z1 + z4"), &GermModel::default(), 1).unwrap();
        assert!(!v.qh.pass && !v.pass && v.mode == "qh");
    }

    #[test]
    fn pure_z3_falls_back_to_balances() {
        let v = theorem5_filter(&b("z3"), &GermModel::default(), 1).unwrap();
        assert_eq!(v.mode, "balances");
        assert!(v.branches.iter().all(|r| !r.applicable));
    }
}
