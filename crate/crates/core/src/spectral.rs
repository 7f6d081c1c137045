//! Spectral-curve bookkeeping for n = 4 and the so(4) = so(3) ⊕ so(3)
//! reduction with its elliptic quadratures.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{integrate, integrate_ode, IntegratorConfig, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::lax::{build, spectral_coeffs, SpectralCoefficients};
use crate::models::{Kind, SystemSpec};
use crate::numeric::{cluster, deriv5, poly_roots};
use crate::sample;
use crate::skewalg::{cross, dot, join_so4, so4_from_halves, so4_halves, split_so4, Vec3};

/// Ascending coefficients of P(λ) (a..e reversed) and Q(λ) (f..j reversed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveData {
    pub p: [f64; 5],
    pub q: [f64; 5],
}

impl From<&SpectralCoefficients> for CurveData {
    fn from(sc: &SpectralCoefficients) -> Self {
        CurveData { p: sc.p(), q: sc.q() }
    }
}

impl CurveData {
    pub fn of_state(spec: &SystemSpec, s: &PhaseState) -> Result<Self> {
        if spec.n != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: spec.n });
        }
        Ok(CurveData::from(&spectral_coeffs(&build(spec, s)?.0)))
    }

    fn half_p_plus(&self, sign: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        for k in 0..5 {
            out[k] = 0.5 * self.p[k] + sign * self.q[k];
        }
        out
    }
}

fn to_c(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

const ROOT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gamma1Curve {
    /// P²/4 − Q², ascending, degree 8.
    pub coeffs: Vec<f64>,
    pub roots: Vec<Complex64>,
    pub distinct_roots: usize,
    pub genus: usize,
    pub degenerate: bool,
}

/// u² = P²/4 − Q² = (P/2 − Q)(P/2 + Q). Roots are taken factor by factor
/// (each a well-conditioned quartic) and merged with a 1e-8 relative
/// tolerance; genus = ⌊(r − 1)/2⌋ for r distinct roots.
pub fn curve_gamma1(cd: &CurveData) -> Result<Gamma1Curve> {
    let mut coeffs = vec![0.0; 9];
    for a in 0..5 {
        for b in 0..5 {
            coeffs[a + b] += 0.25 * cd.p[a] * cd.p[b] - cd.q[a] * cd.q[b];
        }
    }
    if coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::DegenerateCurve("P²/4 − Q² vanishes identically".into()));
    }
    let mut roots = poly_roots(&to_c(&cd.half_p_plus(1.0)));
    roots.extend(poly_roots(&to_c(&cd.half_p_plus(-1.0))));
    crate::numeric::sort_complex(&mut roots);
    let distinct = cluster(&roots, ROOT_TOL).len();
    let genus = distinct.saturating_sub(1) / 2;
    Ok(Gamma1Curve { degenerate: distinct < roots.len(), coeffs, roots, distinct_roots: distinct, genus })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublePoints {
    pub lambdas: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
    pub all_simple: bool,
    pub arithmetic_genus: usize,
    pub normalization_genus: usize,
}

/// Arithmetic genus of a spectral curve of an n×n Lax matrix of degree N
/// in λ.
pub fn arithmetic_genus(n: usize, big_n: usize) -> usize {
    (n - 1) * (n * big_n - 2) / 2
}

/// The points (λ_k, 0), Q(λ_k) = 0, where both sheets of μ² meet.
pub fn double_points(cd: &CurveData) -> Result<DoublePoints> {
    if cd.q.iter().all(|&c| c == 0.0) {
        return Err(Error::QIdenticallyZero);
    }
    let roots = poly_roots(&to_c(&cd.q));
    // multiplicity: double roots of a quartic split by ~√ε, so cluster loosely
    let cl = cluster(&roots, 1e-6);
    let mut lambdas = Vec::new();
    let mut mult = Vec::new();
    for (r, m) in cl {
        lambdas.push(r);
        mult.push(m);
    }
    let ga = arithmetic_genus(4, 2);
    Ok(DoublePoints {
        all_simple: mult.iter().all(|&m| m == 1) && lambdas.len() == 4,
        normalization_genus: ga.saturating_sub(lambdas.len()),
        arithmetic_genus: ga,
        lambdas,
        multiplicities: mult,
    })
}

/// j-invariant of y² = quartic (descending a..e; a = 0 gives a cubic).
pub fn quartic_j_invariant(desc: [f64; 5]) -> f64 {
    let [a, b, c, d, e] = desc;
    let i = 12.0 * a * e - 3.0 * b * d + c * c;
    let j = 72.0 * a * c * e + 9.0 * b * c * d - 27.0 * a * d * d - 27.0 * e * b * b - 2.0 * c * c * c;
    let i3 = 4.0 * i * i * i;
    1728.0 * i3 / (i3 - j * j)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvesC1C2 {
    /// Ascending coefficients of P/2 + Q and P/2 − Q.
    pub c1: [f64; 5],
    pub c2: [f64; 5],
    pub j1: f64,
    pub j2: f64,
}

fn desc(a: [f64; 5]) -> [f64; 5] {
    [a[4], a[3], a[2], a[1], a[0]]
}

/// v² = P/2 ± Q.
pub fn curves_c1c2(cd: &CurveData) -> CurvesC1C2 {
    let c1 = cd.half_p_plus(1.0);
    let c2 = cd.half_p_plus(-1.0);
    CurvesC1C2 { c1, c2, j1: quartic_j_invariant(desc(c1)), j2: quartic_j_invariant(desc(c2)) }
}

// ------------------------------------------------------------ reduction

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub k: [f64; 2],
    pub l: [f64; 2],
    pub m: [Vec3; 2],
    pub gamma: [Vec3; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub state: ReducedState,
    pub chi: [Vec3; 2],
    pub h: [f64; 2],
    pub c: [f64; 2],
    /// ⟨Γᵢ, Γᵢ⟩ (= 1 on the normalized level).
    pub gamma_norm2: [f64; 2],
    /// ⟨χᵢ, Mᵢ⟩.
    pub chi_m: [f64; 2],
}

fn sum_j(spec: &SystemSpec) -> f64 {
    spec.j1() + spec.j3()
}

/// χ₁ = (0, 0, −(χ₁₂+χ₃₄)/2), χ₂ = (0, 0, −(χ₁₂−χ₃₄)/2).
pub fn reduced_chi(spec: &SystemSpec) -> [Vec3; 2] {
    let (a, b) = (spec.chi12(), spec.chi34());
    [[0.0, 0.0, -0.5 * (a + b)], [0.0, 0.0, -0.5 * (a - b)]]
}

pub fn reduce(spec: &SystemSpec, s: &PhaseState) -> Result<Reduction> {
    if spec.n != 4 || s.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: s.dim() });
    }
    let (m1, m2) = so4_halves(&split_so4(&s.m)?);
    let (g1, g2) = so4_halves(&split_so4(&s.gamma)?);
    let chi = reduced_chi(spec);
    let js = sum_j(spec);
    let m = [m1, m2];
    let g = [g1, g2];
    let mut h = [0.0; 2];
    let mut c = [0.0; 2];
    let mut k = [0.0; 2];
    let mut l = [0.0; 2];
    let mut gn = [0.0; 2];
    let mut cm = [0.0; 2];
    for i in 0..2 {
        h[i] = dot(&m[i], &m[i]) + 2.0 / js * dot(&chi[i], &g[i]);
        c[i] = dot(&m[i], &g[i]);
        k[i] = m[i][0].hypot(m[i][1]);
        l[i] = m[i][0].atan2(m[i][1]);
        gn[i] = dot(&g[i], &g[i]);
        cm[i] = dot(&chi[i], &m[i]);
    }
    Ok(Reduction { state: ReducedState { k, l, m, gamma: g }, chi, h, c, gamma_norm2: gn, chi_m: cm })
}

/// Ω₁, Ω₂ in terms of M₁, M₂ (§5 display).
pub fn reduced_omega(spec: &SystemSpec, m1: &Vec3, m2: &Vec3) -> (Vec3, Vec3) {
    let js = sum_j(spec);
    let jd = spec.j1() - spec.j3();
    let (p, q) = (spec.j13() + spec.j24(), spec.j13() - spec.j24());
    let o1 = [js * m1[0] - q * m2[2], js * m1[1], js * m1[2] + jd * m2[2] - p * m2[0]];
    let o2 = [js * m2[0] - p * m1[2], js * m2[1], js * m2[2] + jd * m1[2] - q * m1[0]];
    (o1, o2)
}

/// Eq (12): Ṁᵢ = 2(Mᵢ×Ωᵢ + Γᵢ×χᵢ), Γ̇ᵢ = 2Γᵢ×Ωᵢ on y = (M₁, Γ₁, M₂, Γ₂).
pub fn reduced_rhs(spec: &SystemSpec, y: &[f64], out: &mut [f64]) {
    let v = |k: usize| [y[3 * k], y[3 * k + 1], y[3 * k + 2]];
    let (m1, g1, m2, g2) = (v(0), v(1), v(2), v(3));
    let (o1, o2) = reduced_omega(spec, &m1, &m2);
    let chi = reduced_chi(spec);
    let parts = [
        add(&cross(&m1, &o1), &cross(&g1, &chi[0])),
        cross(&g1, &o1),
        add(&cross(&m2, &o2), &cross(&g2, &chi[1])),
        cross(&g2, &o2),
    ];
    for (k, p) in parts.iter().enumerate() {
        for a in 0..3 {
            out[3 * k + a] = 2.0 * p[a];
        }
    }
}

fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn reduced_vector(s: &PhaseState) -> Result<Vec<f64>> {
    let (m1, m2) = so4_halves(&split_so4(&s.m)?);
    let (g1, g2) = so4_halves(&split_so4(&s.gamma)?);
    Ok([m1, g1, m2, g2].concat())
}

pub fn state_from_reduced(y: &[f64], t: f64) -> PhaseState {
    let v = |k: usize| [y[3 * k], y[3 * k + 1], y[3 * k + 2]];
    PhaseState { m: join_so4(&so4_from_halves(&v(0), &v(2))), gamma: join_so4(&so4_from_halves(&v(1), &v(3))), t }
}

/// Integrate (14)–(15) directly; samples are mapped back to so(4).
pub fn integrate_reduced(spec: &SystemSpec, s0: &PhaseState, cfg: &IntegratorConfig) -> Result<Vec<PhaseState>> {
    let y0 = reduced_vector(s0)?;
    let mut out = Vec::new();
    integrate_ode(|_, y, o| reduced_rhs(spec, y, o), &y0, cfg, |t, y| out.push(state_from_reduced(y, s0.t + t)))?;
    Ok(out)
}

/// Max entrywise difference between the full flow and the split flow,
/// sampled on the common RK4 grid.
pub fn reduction_crosscheck(spec: &SystemSpec, s0: &PhaseState, cfg: &IntegratorConfig) -> Result<f64> {
    let full = integrate(spec, s0, cfg)?;
    let red = integrate_reduced(spec, s0, cfg)?;
    if full.samples.len() != red.len() {
        return Err(Error::Spec("cross-check needs a fixed-step integrator".into()));
    }
    let mut worst = 0.0f64;
    for (a, b) in full.samples.iter().zip(&red) {
        for (x, y) in a.flat().iter().zip(b.flat()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticCurve {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// 8A x³ − 4B x² − 8A x − 4C, descending.
    pub cubic: [f64; 4],
    pub j_invariant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticReduction {
    pub e1: EllipticCurve,
    pub e2: EllipticCurve,
}

pub fn elliptic_reduction(spec: &SystemSpec, red: &Reduction) -> EllipticReduction {
    let js = sum_j(spec);
    let mk = |i: usize| {
        let a = js * red.chi[i][2];
        let b = js * js * red.h[i];
        let c = js * js * (red.c[i] * red.c[i] - red.h[i]);
        let cubic = [8.0 * a, -4.0 * b, -8.0 * a, -4.0 * c];
        EllipticCurve { a, b, c, cubic, j_invariant: quartic_j_invariant([0.0, cubic[0], cubic[1], cubic[2], cubic[3]]) }
    };
    EllipticReduction { e1: mk(0), e2: mk(1) }
}

/// P₃(x) = 4(J₁+J₃)²[(g − x²)(h − 2χ₃x/(J₁+J₃)) − c²] with g = ⟨Γ,Γ⟩
/// (the displayed form is g = 1).
pub fn quadrature_poly(spec: &SystemSpec, red: &Reduction, i: usize, x: f64) -> f64 {
    let js = sum_j(spec);
    4.0 * js * js * ((red.gamma_norm2[i] - x * x) * (red.h[i] - 2.0 / js * red.chi[i][2] * x) - red.c[i] * red.c[i])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    /// max |Γ̇ᵢ₃² − P₃(Γᵢ₃)|.
    pub gamma3: [f64; 2],
    /// max |Kᵢ² − (hᵢ − 2χᵢ₃Γᵢ₃/(J₁+J₃))|.
    pub k_squared: [f64; 2],
    /// max |l̇ᵢ − rhs|.
    pub l_dot: [f64; 2],
    /// max |(16) cubic − P₃| over the trajectory (algebraic consequence).
    pub eq16: f64,
    /// max drift of hᵢ, cᵢ along the trajectory.
    pub integral_drift: f64,
    pub skipped_k_zero: usize,
}

impl QuadratureReport {
    pub fn max(&self) -> f64 {
        [self.gamma3, self.k_squared, self.l_dot].iter().flatten().fold(self.eq16, |a, &b| a.max(b))
    }
}

fn unwrap_angles(xs: &mut [f64]) {
    for k in 1..xs.len() {
        let mut d = xs[k] - xs[k - 1];
        while d > std::f64::consts::PI {
            xs[k] -= 2.0 * std::f64::consts::PI;
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            xs[k] += 2.0 * std::f64::consts::PI;
            d += 2.0 * std::f64::consts::PI;
        }
    }
}

const K_MIN: f64 = 1e-3;

pub fn quadrature_check(spec: &SystemSpec, traj: &Trajectory) -> Result<QuadratureReport> {
    if spec.kind != Kind::HA4 && spec.kind != Kind::LagrangeBitop {
        return Err(Error::Unsupported("quadratures are derived for HA4 and the bitop".into()));
    }
    if traj.len() < 5 {
        return Err(Error::Spec("trajectory too short for the 5-point stencil".into()));
    }
    let t = traj.times();
    let reds: Vec<Reduction> = traj.samples.iter().map(|s| reduce(spec, s)).collect::<Result<_>>()?;
    // the quadratures are derived on M₍₁₎₃ = M₍₂₎₃ = 0
    let rel = reds.iter().fold(0.0f64, |a, r| a.max(r.state.m[0][2].abs()).max(r.state.m[1][2].abs()));
    if rel > 1e-6 {
        return Err(Error::InvariantViolated { residual: rel });
    }
    let js = sum_j(spec);
    let (p, q) = (spec.j13() + spec.j24(), spec.j13() - spec.j24());
    let mut rep = QuadratureReport {
        gamma3: [0.0; 2],
        k_squared: [0.0; 2],
        l_dot: [0.0; 2],
        eq16: 0.0,
        integral_drift: 0.0,
        skipped_k_zero: 0,
    };
    let r0 = &reds[0];
    let ell = elliptic_reduction(spec, r0);
    let mut l: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for i in 0..2 {
        l[i] = reds.iter().map(|r| r.state.l[i]).collect();
        unwrap_angles(&mut l[i]);
    }
    for i in 0..2 {
        let g3: Vec<f64> = reds.iter().map(|r| r.state.gamma[i][2]).collect();
        let cub = if i == 0 { ell.e1.cubic } else { ell.e2.cubic };
        for (k, r) in reds.iter().enumerate() {
            rep.integral_drift = rep.integral_drift.max((r.h[i] - r0.h[i]).abs()).max((r.c[i] - r0.c[i]).abs());
            let x = g3[k];
            let gd = deriv5(&t, &g3, k);
            rep.gamma3[i] = rep.gamma3[i].max((gd * gd - quadrature_poly(spec, r, i, x)).abs());
            let e16 = ((cub[0] * x + cub[1]) * x + cub[2]) * x + cub[3];
            // (16) is P₃ on the level ⟨Γ,Γ⟩ = 1; compare with the g-independent form
            let p3_unit = quadrature_poly(spec, &Reduction { gamma_norm2: [1.0; 2], ..r0.clone() }, i, x);
            rep.eq16 = rep.eq16.max((e16 - p3_unit).abs());
            let ksq = r.h[i] - 2.0 / js * r.chi[i][2] * x;
            rep.k_squared[i] = rep.k_squared[i].max((r.state.k[i].powi(2) - ksq).abs());
            // l jumps where Kᵢ passes through 0; keep the stencil clear of it
            let lo = k.saturating_sub(2);
            let hi = (k + 2).min(reds.len() - 1);
            if reds[lo..=hi].iter().any(|w| w.state.k[i] < K_MIN) {
                rep.skipped_k_zero += 1;
                continue;
            }
            let other = 1 - i;
            let coupling = if i == 0 { p } else { q };
            let want = -2.0 * coupling * r.state.k[other] * r.state.l[other].sin()
                + 2.0 * r.chi[i][2] * r.c[i] / r.state.k[i].powi(2);
            rep.l_dot[i] = rep.l_dot[i].max((deriv5(&t, &l[i], k) - want).abs());
        }
    }
    if rep.skipped_k_zero == 2 * reds.len() {
        return Err(Error::KZero { index: 1, t: t[0] });
    }
    Ok(rep)
}

// ------------------------------------------------------------- reports

/// A state whose Γ₁ and P²/4 − Q² roots are well separated (entries
/// uniform in [−1, 1], resampled until separation ≥ 1e-3 and
/// |discriminant proxy| ≥ 1e-6), projected onto the invariant manifold.
pub fn generic_curve_state(spec: &SystemSpec, rng: &mut impl Rng) -> Result<PhaseState> {
    for _ in 0..1000 {
        let s = sample::compliant_state(rng, spec);
        let cd = CurveData::of_state(spec, &s)?;
        let g = curve_gamma1(&cd)?;
        let q = poly_roots(&to_c(&cd.q));
        if min_sep(&g.roots) >= 1e-3 && q.len() == 4 && min_sep(&q) >= 1e-3 {
            return Ok(s);
        }
    }
    Err(Error::DegenerateCurve("no generic state found in 1000 draws".into()))
}

fn min_sep(r: &[Complex64]) -> f64 {
    let mut m = f64::INFINITY;
    for a in 0..r.len() {
        for b in a + 1..r.len() {
            m = m.min((r[a] - r[b]).norm());
        }
    }
    m
}

fn cjson(z: &Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn curve_report(spec: &SystemSpec, s: &PhaseState) -> Result<Value> {
    let cd = CurveData::of_state(spec, s)?;
    let g = curve_gamma1(&cd)?;
    let dp = double_points(&cd)?;
    let c12 = curves_c1c2(&cd);
    let red = reduce(spec, s)?;
    let ell = elliptic_reduction(spec, &red);
    Ok(json!({
        "P": cd.p, "Q": cd.q,
        "genus": g.genus,
        "distinct_roots": g.distinct_roots,
        "degenerate": g.degenerate,
        "double_points": dp.lambdas.iter().map(cjson).collect::<Vec<_>>(),
        "double_point_multiplicities": dp.multiplicities,
        "arithmetic_genus": dp.arithmetic_genus,
        "normalization_genus": dp.normalization_genus,
        "C1": {"coeffs": c12.c1, "j": c12.j1},
        "C2": {"coeffs": c12.c2, "j": c12.j2},
        "E1": serde_json::to_value(&ell.e1).expect("plain data"),
        "E2": serde_json::to_value(&ell.e2).expect("plain data"),
        "h": red.h, "c": red.c,
    }))
}
