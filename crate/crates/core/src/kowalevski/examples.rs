//! The worked balance examples: 3D Hess–Appel'rot, the two 4D families,
//! 5D case 8 and 6D case 1, each with its expected exponent multisets.

use num_complex::Complex64;
use serde::Serialize;

use super::{ara_check, balance_solution, field_from_spec, newton_balance, solve_balances, AraReport, BalanceSolution, Mask, SolveOptions};
use crate::error::{Error, Result};
use crate::models::{make_spec, Kind, Params, SystemSpec};
use crate::numeric::{c, multiset_distance};
use crate::poisson::spectral_casimirs;
use crate::poly::Poly;

pub const EXPONENT_TOL: f64 = 1e-7;
const SELECT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct ExampleReport {
    pub name: String,
    pub params: Params,
    pub expected: Vec<Vec<Complex64>>,
    pub found: Vec<Vec<Complex64>>,
    pub balances: Vec<Vec<Complex64>>,
    /// Worst, over expected multisets, of the best matching distance.
    pub max_error: f64,
    pub ara: Vec<AraReport>,
    pub pass: bool,
}

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn re(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| c(x, 0.0)).collect()
}

fn near(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < SELECT_TOL
}

fn report(name: &str, spec: &SystemSpec, expected: Vec<Vec<Complex64>>, sols: &[BalanceSolution], ara: Vec<AraReport>) -> ExampleReport {
    let found: Vec<Vec<Complex64>> = sols.iter().map(|s| s.exponents.clone()).collect();
    let max_error = expected
        .iter()
        .map(|e| found.iter().filter_map(|f| multiset_distance(e, f)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let pass = !expected.is_empty() && max_error <= EXPONENT_TOL && ara.iter().all(|a| a.pass);
    ExampleReport {
        name: name.into(),
        params: spec.params.clone(),
        expected,
        found,
        balances: sols.iter().map(|s| s.c.clone()).collect(),
        max_error,
        ara,
        pass,
    }
}

/// 3D Hess–Appel'rot (Zhukovskii frame, J₁ = 1, J₃ = 0.6), balances on
/// {c₃ = 0} with c₁ ≠ 0.
pub fn hess_appelrot_3d(j13: f64, seed: u64) -> Result<ExampleReport> {
    let spec = make_spec(Kind::ClassicalHA, 3, &params(&[("J1", 1.0), ("J3", 0.6), ("J13", j13), ("z0", 1.0)]))?;
    let sys = field_from_spec(&spec);
    let sols: Vec<BalanceSolution> = solve_balances(&sys, &Mask::zeros(&[2]), &SolveOptions { seed, ..Default::default() })
        .into_iter()
        .filter(|s| s.c[0].norm() > SELECT_TOL)
        .collect();
    let expected = vec![re(&[-1.0, -2.0, 2.0, 4.0, 3.0, 3.0]), re(&[-1.0, 1.0, 3.0, 2.0, 2.0, 2.0])];
    Ok(report("3d-hess-appelrot", &spec, expected, &sols, Vec::new()))
}

fn ha4(j1: f64, j3: f64, j13: f64, j24: f64) -> Result<SystemSpec> {
    make_spec(Kind::HA4, 4, &params(&[("J1", j1), ("J3", j3), ("J13", j13), ("J24", j24), ("chi12", 1.0), ("chi34", 2.0)]))
}

/// 4D Example 2, case 3: J₁ = 1, J₃ = 3, χ = (1, 2), d₁ = d₂ = d₆ = 0, the
/// balance with d₃ = d₄ = i/4, d₅ = 0.
pub fn example2_4d(j13: f64, j24: f64, seed: u64) -> Result<ExampleReport> {
    let spec = ha4(1.0, 3.0, j13, j24)?;
    let sys = field_from_spec(&spec);
    let q = c(0.0, 0.25);
    let sols: Vec<BalanceSolution> = solve_balances(&sys, &Mask::zeros(&[0, 1, 5]), &SolveOptions { seed, ..Default::default() })
        .into_iter()
        .filter(|s| near(s.c[2], q) && near(s.c[3], q) && near(s.c[4], c(0.0, 0.0)))
        .take(1)
        .collect();
    let a = (j13 - j24) / 2.0;
    let expected = vec![re(&[0.0, -1.0, 3.0, 4.0, 1.0 + a, 1.0 - a, 2.0 + a, 2.0 - a, 2.0, 1.0, 2.0, 1.0])];
    Ok(report("4d-example2-case3", &spec, expected, &sols, Vec::new()))
}

/// 4D Example 1: J₁₃ = 0, J₁ = 0.3, J₃ = 0.7, d₁ = d₆ = 0 and d₂ pinned;
/// the s-family member with d₅ = −d₂, d₃ = d₄ ≠ 0. Also runs (ArA) against
/// the level set of the four spectral Casimirs inside {M₁₂ = M₃₄ = 0}.
pub fn example1_4d(j24: f64, d2: f64, seed: u64) -> Result<ExampleReport> {
    let spec = ha4(0.3, 0.7, 0.0, j24)?;
    let sys = field_from_spec(&spec);
    let mask = Mask::zeros(&[0, 5]).with(1, c(d2, 0.0));
    let sols: Vec<BalanceSolution> = solve_balances(&sys, &mask, &SolveOptions { seed, ..Default::default() })
        .into_iter()
        .filter(|s| near(s.c[4], -s.c[1]) && near(s.c[2], s.c[3]) && s.c[2].norm() > SELECT_TOL)
        .take(1)
        .collect();
    let a = 2.0 * (j24 * j24 * (1.0 + d2 * d2)).sqrt();
    let expected = vec![re(&[0.0, -1.0, 3.0, 4.0, 2.0, 1.0, 2.0, 1.0, 2.0 + a, 2.0 - a, 1.0 + a, 1.0 - a])];
    let mut cas: Vec<Poly> = spectral_casimirs().into_iter().map(|(_, p)| p).collect();
    cas.extend(spec.relation_coords().into_iter().map(Poly::var));
    let ara = sols.iter().map(|s| ara_check(s, &cas)).collect::<Result<Vec<_>>>()?;
    let mut r = report("4d-example1", &spec, expected, &sols, ara);
    r.pass &= r.ara.iter().all(|a| a.tangent.len() == 8 && a.transversal.len() == 4);
    Ok(r)
}

/// Solve the Γ part of a balance with the M part held fixed.
fn balance_from_m(spec: &SystemSpec, m: &[Complex64]) -> Result<BalanceSolution> {
    let sys = field_from_spec(spec);
    let dim = sys.dim();
    let mask = Mask { fixed: m.iter().copied().enumerate().collect() };
    let mut start = vec![c(0.0, 0.0); dim];
    start[..m.len()].copy_from_slice(m);
    let z = newton_balance(&sys, &mask, &start, 50)?;
    Ok(balance_solution(&sys, &Mask::zeros(&spec.relation_coords()), z))
}

/// 5D Example 3, case 8: J₁ = 1, J₃ = 3, J₁₃ = 5, J₂₄ = 1, χ₁₂ = 1 and
/// M₁₃ = −3/(2J₁₃), M₁₄ = i/2, M₁₅ = √(J₁₃² − 9J₂₄²)/(2J₁₃J₂₄).
pub fn case8_5d() -> Result<ExampleReport> {
    let (j13, j24) = (5.0, 1.0);
    let spec = make_spec(Kind::HAn, 5, &params(&[("J1", 1.0), ("J3", 3.0), ("J13", j13), ("J24", j24), ("chi12", 1.0)]))?;
    let mut m = vec![c(0.0, 0.0); 10];
    m[1] = c(-3.0 / (2.0 * j13), 0.0);
    m[2] = c(0.0, 0.5);
    m[3] = c((j13 * j13 - 9.0 * j24 * j24).sqrt() / (2.0 * j13 * j24), 0.0);
    let sol = balance_from_m(&spec, &m)?;
    let s2 = 2f64.sqrt();
    let expected = vec![re(&[
        0.0, -1.0, 1.5, 4.0, 3.5, s2, -s2, 1.0 + s2, 1.0 - s2, 1.0, 0.5, 3.0, 2.5, 1.0, 0.5, 3.0, 2.5, 2.0, 2.0, 2.0,
    ])];
    Ok(report("5d-example3-case8", &spec, expected, &[sol], Vec::new()))
}

/// 6D Example 4, case 1: J₁ = 1, J₃ = 3, J₂₄ = 4, χ₁₂ = 1 with
/// M₁₃ = i/2, Γ₁₂ = 1/2, Γ₂₃ = i/2 and everything else zero.
pub fn case1_6d(j13: f64) -> Result<ExampleReport> {
    if j13.abs() >= 4.0 {
        return Err(Error::Spec("case 1 needs |J13| < 4".into()));
    }
    let spec = make_spec(Kind::HAn, 6, &params(&[("J1", 1.0), ("J3", 3.0), ("J13", j13), ("J24", 4.0), ("chi12", 1.0)]))?;
    let sys = field_from_spec(&spec);
    let mut z = vec![c(0.0, 0.0); 30];
    z[1] = c(0.0, 0.5);
    z[15] = c(0.5, 0.0);
    z[20] = c(0.0, 0.5);
    let sol = balance_solution(&sys, &Mask::zeros(&spec.relation_coords()), z);
    if sol.residual > 1e-12 {
        return Err(Error::NoConvergence { residual: sol.residual });
    }
    let a = (16.0 - j13 * j13).sqrt() / 2.0;
    let b = j13 / 2.0;
    let mut e = Vec::new();
    for (v, k) in [(-1.0, 4), (1.0, 3), (2.0, 7), (3.0, 4), (4.0, 4)] {
        e.extend(std::iter::repeat_n(c(v, 0.0), k));
    }
    e.extend([c(1.0 + a, 0.0), c(1.0 - a, 0.0), c(a, 0.0), c(-a, 0.0)]);
    e.extend([c(1.0, -b), c(1.0, -b), c(0.0, b), c(0.0, b)]);
    Ok(report("6d-example4-case1", &spec, vec![e], &[sol], Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_d() {
        for j13 in [1.0, 3.0] {
            let r = hess_appelrot_3d(j13, 42).unwrap();
            assert_eq!(r.found.len(), 4);
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn four_d_example2() {
        let r = example2_4d(0.7, 0.2, 42).unwrap();
        assert!(r.pass, "{:?} {:?}", r.max_error, r.found);
    }

    #[test]
    fn four_d_example1() {
        for d2 in [0.0, 1.0] {
            let r = example1_4d(0.4, d2, 42).unwrap();
            assert!(r.pass, "{:?} {:?} {:?}", r.max_error, r.found, r.ara);
        }
    }

    #[test]
    fn five_and_six_d() {
        let r = case8_5d().unwrap();
        assert!(r.pass, "{:?} {:?}", r.max_error, r.found);
        let r = case1_6d(2.0).unwrap();
        assert!(r.pass, "{:?} {:?}", r.max_error, r.found);
    }
}
