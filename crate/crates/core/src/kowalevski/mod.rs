//! Kowalevski analysis of quasi-homogeneous fields: balances −g·C = f(C),
//! Kowalevski matrices K = Df(C) + diag(g), their exponents, the
//! arithmetic axiom, and the germ analysis of three-dimensional systems
//! H₁ = H₀ + J·b·M₃.

mod ara;
pub mod examples;
mod germ;

pub use ara::{ara_check, ara_check_matrix, casimir_gradients, AraReport};
pub use germ::{
    charpoly, germ_charpolys, theorem5_filter, Branch, BranchResult, GermData, GermModel, Theorem5Verdict,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{entry_poly, SystemSpec};
use crate::numeric::{c, eigenvalues, sort_complex};
use crate::poly::{poly_matmul, Poly};
use crate::sample;
use crate::skewalg::{pairs, so_dim};

/// ż_i = f_i(z) with quasi-homogeneity exponents g.
#[derive(Clone, Debug)]
pub struct QHSystem {
    pub f: Vec<Poly>,
    pub g: Vec<u32>,
    jac: Vec<Vec<Poly>>,
}

impl QHSystem {
    pub fn new(f: Vec<Poly>, g: Vec<u32>) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::DimensionMismatch { expected: f.len(), found: g.len() });
        }
        let n = f.len();
        if let Some(v) = f.iter().map(|p| p.num_vars()).max().filter(|&v| v > n) {
            return Err(Error::DimensionMismatch { expected: n, found: v });
        }
        let jac = f.iter().map(|p| p.gradient(n)).collect();
        Ok(QHSystem { f, g, jac })
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.f.iter().map(|p| p.eval(z)).collect()
    }

    /// g_i C_i + f_i(C).
    pub fn balance_residual(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.f.iter().zip(&self.g).zip(z).map(|((p, &g), &zi)| p.eval(z) + zi * g as f64).collect()
    }

    /// K^i_j = ∂f_i/∂z_j(C) + g_i δ^i_j.
    pub fn kowalevski_matrix(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.jac[i][j].eval(z) + if i == j { c(self.g[i] as f64, 0.0) } else { c(0.0, 0.0) })
    }

    /// Central-difference Jacobian of f plus diag(g) (for cross-checks).
    pub fn kowalevski_matrix_fd(&self, z: &[Complex64], h: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut k = DMatrix::zeros(n, n);
        let mut y = z.to_vec();
        for j in 0..n {
            y[j] = z[j] + h;
            let fp = self.eval(&y);
            y[j] = z[j] - h;
            let fm = self.eval(&y);
            y[j] = z[j];
            for i in 0..n {
                k[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        for i in 0..n {
            k[(i, i)] += self.g[i] as f64;
        }
        k
    }
}

// ------------------------------------------------------------ fields

/// Euler–Poisson field Ṁ = [M,Ω] + [Γ,χ], Γ̇ = [Γ,Ω] of `spec` on its chart,
/// with g = 1 on M and 2 on Γ.
pub fn field_from_spec(spec: &SystemSpec) -> QHSystem {
    let n = spec.n;
    let mat = |block: usize| {
        let mut m = vec![Poly::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = entry_poly(n, block, i, j);
            }
        }
        m
    };
    let (m, g) = (mat(0), mat(1));
    let jm: Vec<Poly> = spec.j.dense().iter().map(|&v| Poly::real(v)).collect();
    let chi: Vec<Poly> = spec.chi.dense().iter().map(|&v| Poly::real(v)).collect();
    let add = |a: &[Poly], b: &[Poly]| a.iter().zip(b).map(|(x, y)| x.add(y)).collect::<Vec<_>>();
    let sub = |a: &[Poly], b: &[Poly]| a.iter().zip(b).map(|(x, y)| x.sub(y)).collect::<Vec<_>>();
    let comm = |a: &[Poly], b: &[Poly]| sub(&poly_matmul(n, a, b), &poly_matmul(n, b, a));
    let omega = add(&poly_matmul(n, &jm, &m), &poly_matmul(n, &m, &jm));
    let mdot = add(&comm(&m, &omega), &comm(&g, &chi));
    let gdot = comm(&g, &omega);
    let mut f = Vec::with_capacity(2 * so_dim(n));
    for dot in [&mdot, &gdot] {
        if n == 3 {
            // vector chart: v₁ = −X₂₃, v₂ = X₁₃, v₃ = −X₁₂
            f.push(dot[5].neg());
            f.push(dot[2].clone());
            f.push(dot[1].neg());
        } else {
            for (i, j) in pairs(n) {
                f.push(dot[i * n + j].clone());
            }
        }
    }
    let g = (0..2 * so_dim(n)).map(|k| if k < so_dim(n) { 1 } else { 2 }).collect();
    QHSystem::new(f, g).expect("chart field is square")
}

#[derive(Clone, Debug, Serialize)]
pub struct QhReport {
    pub pass: bool,
    pub worst: f64,
    pub samples: usize,
}

pub const QH_TOL: f64 = 1e-10;

/// f_i(a^g z) == a^{g_i+1} f_i(z) at 50 random (a, z) pairs.
pub fn check_qh(sys: &QHSystem, seed: u64) -> QhReport {
    let mut rng = sample::rng(seed);
    let n = sys.dim();
    let mut worst = 0.0f64;
    let samples = 50;
    for _ in 0..samples {
        let a: f64 = rng.random_range(0.5..2.0);
        let z: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let za: Vec<Complex64> = z.iter().zip(&sys.g).map(|(&zi, &g)| zi * a.powi(g as i32)).collect();
        let (f, fa) = (sys.eval(&z), sys.eval(&za));
        for i in 0..n {
            let want = f[i] * a.powi(sys.g[i] as i32 + 1);
            let scale = want.norm().max(fa[i].norm()).max(1.0);
            worst = worst.max((fa[i] - want).norm() / scale);
        }
    }
    QhReport { pass: worst < QH_TOL, worst, samples }
}

// ------------------------------------------------------------ balances

/// Components of C held at fixed values during the solve (the invariant
/// relations fix some of them to 0). Indices are 0-based chart positions.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Mask {
    pub fixed: Vec<(usize, Complex64)>,
}

impl Mask {
    pub fn zeros(indices: &[usize]) -> Self {
        Mask { fixed: indices.iter().map(|&k| (k, c(0.0, 0.0))).collect() }
    }

    pub fn with(mut self, index: usize, value: Complex64) -> Self {
        self.fixed.retain(|e| e.0 != index);
        self.fixed.push((index, value));
        self.fixed.sort_by_key(|e| e.0);
        self
    }

    pub fn is_fixed(&self, k: usize) -> bool {
        self.fixed.iter().any(|e| e.0 == k)
    }

    fn apply(&self, z: &mut [Complex64]) {
        for &(k, v) in &self.fixed {
            z[k] = v;
        }
    }

    /// The invariant-relation mask of a Hess-Appel'rot spec.
    pub fn relations(spec: &SystemSpec) -> Self {
        Mask::zeros(&spec.relation_coords())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceSolution {
    pub c: Vec<Complex64>,
    pub mask: Mask,
    #[serde(skip)]
    pub k: DMatrix<Complex64>,
    pub exponents: Vec<Complex64>,
    pub residual: f64,
    /// Number of free directions along which the balance moves in a family
    /// (numeric rank deficiency of the Jacobian restricted to free entries).
    pub family_dim: usize,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub starts: usize,
    pub seed: u64,
    pub scale: f64,
    pub max_iter: usize,
    pub dedup_tol: f64,
    /// Extra starting points tried before the random ones.
    pub seeds: Vec<Vec<Complex64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { starts: 200, seed: sample::DEFAULT_SEED, scale: 1.0, max_iter: 200, dedup_tol: 1e-7, seeds: Vec::new() }
    }
}

pub const BALANCE_TOL: f64 = 1e-10;
const TRIVIAL: f64 = 1e-6;

/// Damped Gauss–Newton from one start; free entries are those not in `mask`.
pub fn newton_balance(sys: &QHSystem, mask: &Mask, start: &[Complex64], max_iter: usize) -> Result<Vec<Complex64>> {
    let n = sys.dim();
    let free: Vec<usize> = (0..n).filter(|&k| !mask.is_fixed(k)).collect();
    let mut z = start.to_vec();
    mask.apply(&mut z);
    let norm = |r: &[Complex64]| r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut r = sys.balance_residual(&z);
    let mut rn = norm(&r);
    for _ in 0..max_iter {
        if rn < 1e-14 {
            break;
        }
        let k = sys.kowalevski_matrix(&z);
        let jf = DMatrix::from_fn(n, free.len(), |i, j| k[(i, free[j])]);
        let rhs = DVector::from_vec(r.clone());
        let svd = jf.svd(true, true);
        let Ok(step) = svd.solve(&rhs, 1e-12 * svd.singular_values.max().max(1.0)) else { break };
        let mut alpha = 1.0;
        let mut improved = false;
        while alpha > 1e-6 {
            let mut y = z.clone();
            for (j, &k) in free.iter().enumerate() {
                y[k] -= step[j] * alpha;
            }
            let ry = sys.balance_residual(&y);
            let ny = norm(&ry);
            if ny.is_finite() && ny < rn {
                z = y;
                r = ry;
                rn = ny;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let worst = r.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if worst < BALANCE_TOL && z.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(z)
    } else {
        Err(Error::NoConvergence { residual: worst })
    }
}

/// Multi-start solve of −g_i C_i = f_i(C) under `mask`; nonzero solutions,
/// deduplicated, in order of discovery (deterministic for a given seed).
pub fn solve_balances(sys: &QHSystem, mask: &Mask, opts: &SolveOptions) -> Vec<BalanceSolution> {
    let n = sys.dim();
    let mut starts: Vec<Vec<Complex64>> = opts.seeds.clone();
    for k in 0..opts.starts {
        let mut r = sample::substream(opts.seed, k as u64);
        starts.push(
            (0..n)
                .map(|_| {
                    let re: f64 = r.sample(StandardNormal);
                    let im: f64 = r.sample(StandardNormal);
                    c(re, im) * opts.scale
                })
                .collect(),
        );
    }
    let roots: Vec<Option<Vec<Complex64>>> =
        starts.par_iter().map(|s| newton_balance(sys, mask, s, opts.max_iter).ok()).collect();
    let mut out: Vec<BalanceSolution> = Vec::new();
    for z in roots.into_iter().flatten() {
        if z.iter().all(|v| v.norm() < TRIVIAL) {
            continue;
        }
        let scale = z.iter().fold(1.0f64, |m, v| m.max(v.norm()));
        if out.iter().any(|s| s.c.iter().zip(&z).all(|(a, b)| (a - b).norm() <= opts.dedup_tol * scale)) {
            continue;
        }
        out.push(balance_solution(sys, mask, z));
    }
    out
}

/// Assemble K, exponents and diagnostics at a known balance point.
pub fn balance_solution(sys: &QHSystem, mask: &Mask, z: Vec<Complex64>) -> BalanceSolution {
    let n = sys.dim();
    let k = sys.kowalevski_matrix(&z);
    let residual = sys.balance_residual(&z).iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let free: Vec<usize> = (0..n).filter(|&i| !mask.is_fixed(i)).collect();
    let jf = DMatrix::from_fn(n, free.len(), |i, j| k[(i, free[j])]);
    let sv = jf.svd(false, false).singular_values;
    let top = sv.max().max(1.0);
    let rank = sv.iter().filter(|&&s| s > 1e-8 * top).count();
    let mut exps = eigenvalues(&k);
    sort_complex(&mut exps);
    BalanceSolution { c: z, mask: mask.clone(), k, exponents: exps, residual, family_dim: free.len() - rank }
}

/// Sorted Kowalevski exponents of a solution.
pub fn exponents(sol: &BalanceSolution) -> Vec<Complex64> {
    sol.exponents.clone()
}

/// Solve along a one-parameter family: entry `index` is pinned to each
/// value in turn.
pub fn sweep_family(
    sys: &QHSystem,
    mask: &Mask,
    index: usize,
    values: &[Complex64],
    opts: &SolveOptions,
) -> Vec<(Complex64, Vec<BalanceSolution>)> {
    values.iter().map(|&v| (v, solve_balances(sys, &mask.clone().with(index, v), opts))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_spec, Kind, Params};
    use crate::numeric::multiset_distance;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    fn field3(j13: f64) -> QHSystem {
        let spec =
            make_spec(Kind::ClassicalHA, 3, &params(&[("J1", 1.0), ("J3", 0.6), ("J13", j13), ("z0", 1.0)])).unwrap();
        field_from_spec(&spec)
    }

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn qh_holds_and_breaks() {
        let sys = field3(1.0);
        assert!(check_qh(&sys, 1).pass);
        let spec = make_spec(
            Kind::HA4,
            4,
            &params(&[("J1", 1.0), ("J3", 3.0), ("J13", 0.7), ("J24", 0.2), ("chi12", 1.0), ("chi34", 2.0)]),
        )
        .unwrap();
        assert!(check_qh(&field_from_spec(&spec), 2).pass);
        let mut f = sys.f.clone();
        f[0] = f[0].add(&Poly::real(1.0));
        assert!(!check_qh(&QHSystem::new(f, sys.g.clone()).unwrap(), 3).pass);
    }

    #[test]
    fn field_matches_rhs() {
        use crate::dynamics::{rhs, PhaseState};
        let spec = make_spec(
            Kind::HAn,
            5,
            &params(&[("J1", 0.4), ("J3", 0.6), ("J13", 0.9), ("J24", -0.3), ("chi12", 1.0)]),
        )
        .unwrap();
        let sys = field_from_spec(&spec);
        let mut r = sample::rng(5);
        let s = sample::random_state(&mut r, 5);
        let (dm, dg) = rhs(&spec, &s).unwrap();
        let want = PhaseState { m: dm, gamma: dg, t: 0.0 }.chart_coords();
        let got = sys.eval(&re(&s.chart_coords()));
        for k in 0..want.len() {
            assert!((got[k].re - want[k]).abs() < 1e-13 && got[k].im == 0.0);
        }
        // 3D vector chart
        let spec3 = make_spec(Kind::ClassicalHA, 3, &params(&[("J1", 1.0), ("J3", 0.6), ("J13", 0.4), ("z0", 1.0)])).unwrap();
        let s = sample::random_state(&mut r, 3);
        let (dm, dg) = rhs(&spec3, &s).unwrap();
        let want = PhaseState { m: dm, gamma: dg, t: 0.0 }.chart_coords();
        let got = field_from_spec(&spec3).eval(&re(&s.chart_coords()));
        for k in 0..6 {
            assert!((got[k].re - want[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn three_d_elimination() {
        // c₄ = −J₁₃c₁² + c₂, c₅ = −c₁(1 + J₁₃c₂), c₆ = −(c₁² + c₂²)/2 on every c₁ ≠ 0 balance
        let j13 = 1.7;
        let sys = field3(j13);
        let sols = solve_balances(&sys, &Mask::zeros(&[2]), &SolveOptions::default());
        let nontriv: Vec<_> = sols.iter().filter(|s| s.c[0].norm() > 1e-6).collect();
        assert_eq!(nontriv.len(), 4);
        for s in nontriv {
            let (c1, c2) = (s.c[0], s.c[1]);
            assert!((s.c[3] - (-c1 * c1 * j13 + c2)).norm() < 1e-9);
            assert!((s.c[4] + c1 * (c2 * j13 + 1.0)).norm() < 1e-9);
            assert!((s.c[5] + (c1 * c1 + c2 * c2) / 2.0).norm() < 1e-9);
            assert!(s.residual < BALANCE_TOL);
            assert!(s.exponents.iter().any(|e| (e + 1.0).norm() < 1e-9));
        }
    }

    #[test]
    fn exponents_scale_invariant() {
        let mut tables = Vec::new();
        for kappa in [1.0, 2.0, 10.0] {
            let sys = field3(kappa);
            let sols = solve_balances(&sys, &Mask::zeros(&[2]), &SolveOptions::default());
            let mut t: Vec<Vec<Complex64>> = sols.iter().filter(|s| s.c[0].norm() > 1e-6).map(exponents).collect();
            t.sort_by(|a, b| a[0].re.total_cmp(&b[0].re));
            tables.push(t);
        }
        for t in &tables[1..] {
            assert_eq!(t.len(), tables[0].len());
            for (a, b) in t.iter().zip(&tables[0]) {
                assert!(multiset_distance(a, b).unwrap() < 1e-7);
            }
        }
    }

    #[test]
    fn analytic_k_matches_fd() {
        let sys = field3(1.3);
        let sols = solve_balances(&sys, &Mask::zeros(&[2]), &SolveOptions::default());
        for s in &sols {
            let fd = sys.kowalevski_matrix_fd(&s.c, 1e-5);
            assert!((&fd - &s.k).camax() < 1e-7);
        }
    }
}
