//! Lax pair L(λ) = λ²C + λM + Γ, A(λ) = λχ + Ω, and the spectral
//! polynomial det(L(λ) − μ) = μ⁴ + P(λ)μ² + Q(λ)² for n = 4.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{rhs, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::models::SystemSpec;
use crate::numeric::{eigenvalues, multiset_distance};
use crate::skewalg::{commutator, inertia_map, SkewMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct LaxPolynomial {
    pub c: SkewMatrix,
    pub m: SkewMatrix,
    pub gamma: SkewMatrix,
}

impl LaxPolynomial {
    /// Dense L(λ) for complex λ.
    pub fn at(&self, lambda: Complex64) -> DMatrix<Complex64> {
        let n = self.m.dim();
        DMatrix::from_fn(n, n, |i, j| {
            lambda * lambda * self.c.get(i, j) + lambda * self.m.get(i, j) + self.gamma.get(i, j)
        })
    }

    /// Coefficient k (of λᵏ) of entry (i, j).
    fn coeff(&self, k: usize, i: usize, j: usize) -> f64 {
        match k {
            0 => self.gamma.get(i, j),
            1 => self.m.get(i, j),
            _ => self.c.get(i, j),
        }
    }
}

/// (L, (χ, Ω)) for the spec at a state.
pub fn build(spec: &SystemSpec, s: &PhaseState) -> Result<(LaxPolynomial, (SkewMatrix, SkewMatrix))> {
    let c = spec.lax_c()?;
    let omega = inertia_map(&spec.j, &s.m)?;
    Ok((LaxPolynomial { c, m: s.m.clone(), gamma: s.gamma.clone() }, (spec.chi.clone(), omega)))
}

/// max over λ-coefficients of |L̇ − [L, A]|, with L̇ = λṀ + Γ̇ from the
/// vector field.
pub fn lax_residual(spec: &SystemSpec, s: &PhaseState) -> Result<f64> {
    let (l, (chi, omega)) = build(spec, s)?;
    let (md, gd) = rhs(spec, s)?;
    // [L, A] = λ³[C,χ] + λ²([C,Ω]+[M,χ]) + λ([M,Ω]+[Γ,χ]) + [Γ,Ω]
    let r3 = commutator(&l.c, &chi)?;
    let r2 = commutator(&l.c, &omega)?.add(&commutator(&l.m, &chi)?);
    let r1 = md.sub(&commutator(&l.m, &omega)?.add(&commutator(&l.gamma, &chi)?));
    let r0 = gd.sub(&commutator(&l.gamma, &omega)?);
    Ok([r3, r2, r1, r0].iter().fold(0.0f64, |a, r| a.max(r.max_abs())))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub i: f64,
    pub j: f64,
}

impl SpectralCoefficients {
    pub fn named(&self) -> [(&'static str, f64); 10] {
        [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("e", self.e),
            ("f", self.f),
            ("g", self.g),
            ("h", self.h),
            ("i", self.i),
            ("j", self.j),
        ]
    }

    /// P(λ) coefficients, ascending.
    pub fn p(&self) -> [f64; 5] {
        [self.e, self.d, self.c, self.b, self.a]
    }

    /// Q(λ) coefficients, ascending.
    pub fn q(&self) -> [f64; 5] {
        [self.j, self.i, self.h, self.g, self.f]
    }
}

/// P = Σ_{i<j} L_ij², Q = Pf L = L₁₂L₃₄ − L₁₃L₂₄ + L₁₄L₂₃, expanded in λ.
/// For C supported on (1,2),(3,4) this is exactly the closed-form list a..j.
pub fn spectral_coeffs(l: &LaxPolynomial) -> SpectralCoefficients {
    assert_eq!(l.m.dim(), 4, "spectral coefficients are defined for n = 4");
    let mut p = [0.0; 5];
    let mut q = [0.0; 5];
    let prod = |out: &mut [f64; 5], (i1, j1): (usize, usize), (i2, j2): (usize, usize), sign: f64| {
        for a in 0..3 {
            for b in 0..3 {
                out[a + b] += sign * l.coeff(a, i1, j1) * l.coeff(b, i2, j2);
            }
        }
    };
    for (i, j) in crate::skewalg::pairs(4) {
        prod(&mut p, (i, j), (i, j), 1.0);
    }
    prod(&mut q, (0, 1), (2, 3), 1.0);
    prod(&mut q, (0, 2), (1, 3), -1.0);
    prod(&mut q, (0, 3), (1, 2), 1.0);
    SpectralCoefficients { e: p[0], d: p[1], c: p[2], b: p[3], a: p[4], j: q[0], i: q[1], h: q[2], g: q[3], f: q[4] }
}

/// det(L(λ) − μ) via complex LU, the oracle for `spectral_coeffs`.
pub fn spectral_det(l: &LaxPolynomial, lambda: Complex64, mu: Complex64) -> Complex64 {
    let mut m = l.at(lambda);
    for k in 0..m.nrows() {
        m[(k, k)] -= mu;
    }
    m.determinant()
}

pub fn spectral_poly_eval(sc: &SpectralCoefficients, lambda: Complex64, mu: Complex64) -> Complex64 {
    let ev = |cs: [f64; 5]| cs.iter().rev().fold(Complex64::new(0.0, 0.0), |a, &x| a * lambda + x);
    let (p, q) = (ev(sc.p()), ev(sc.q()));
    mu.powi(4) + p * mu * mu + q * q
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub name: String,
    pub abs: f64,
    pub rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsospectralityReport {
    pub lambda_star: f64,
    pub drifts: Vec<Drift>,
    pub eigenvalue_drift: f64,
    pub max_lax_residual: f64,
}

impl IsospectralityReport {
    pub fn drift(&self, name: &str) -> Option<&Drift> {
        self.drifts.iter().find(|d| d.name == name)
    }
}

fn drift_of(name: &str, xs: &[f64]) -> Drift {
    let x0 = xs[0];
    let abs = xs.iter().fold(0.0f64, |a, v| a.max((v - x0).abs()));
    let rel = if x0.abs() < 1e-12 { abs } else { abs / x0.abs() };
    Drift { name: name.to_string(), abs, rel }
}

/// Coefficient drifts (n = 4: a..j; n ≠ 4: tr L(λ*)^k, k = 2, 4) and the
/// drift of the spectrum of L(λ*).
pub fn isospectrality_report(spec: &SystemSpec, traj: &Trajectory, lambda_star: f64) -> Result<IsospectralityReport> {
    if traj.is_empty() {
        return Err(Error::Spec("empty trajectory".into()));
    }
    let lam = Complex64::new(lambda_star, 0.0);
    let mut series: Vec<(String, Vec<f64>)> = Vec::new();
    let mut spec0: Option<Vec<Complex64>> = None;
    let mut eig_drift = 0.0f64;
    let mut max_res = 0.0f64;
    for s in &traj.samples {
        let (l, _) = build(spec, s)?;
        max_res = max_res.max(lax_residual(spec, s)?);
        let row: Vec<(String, f64)> = if spec.n == 4 {
            spectral_coeffs(&l).named().iter().map(|(k, v)| (k.to_string(), *v)).collect()
        } else {
            let m = l.at(lam);
            let m2 = &m * &m;
            let m4 = &m2 * &m2;
            vec![("trL2".to_string(), m2.trace().re), ("trL4".to_string(), m4.trace().re)]
        };
        if series.is_empty() {
            series = row.iter().map(|(k, _)| (k.clone(), Vec::new())).collect();
        }
        for ((_, v), (_, x)) in series.iter_mut().zip(row) {
            v.push(x);
        }
        let ev = eigenvalues(&l.at(lam));
        match &spec0 {
            None => spec0 = Some(ev),
            Some(e0) => eig_drift = eig_drift.max(multiset_distance(e0, &ev).unwrap_or(f64::INFINITY)),
        }
    }
    Ok(IsospectralityReport {
        lambda_star,
        drifts: series.iter().map(|(k, v)| drift_of(k, v)).collect(),
        eigenvalue_drift: eig_drift,
        max_lax_residual: max_res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegratorConfig};
    use crate::models::{make_spec, Kind, Params};
    use crate::numeric::c;
    use crate::sample;
    use rand::Rng;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    fn ha4() -> SystemSpec {
        make_spec(
            Kind::HA4,
            4,
            &params(&[("J1", 1.0), ("J3", 3.0), ("J13", 0.6), ("J24", 0.25), ("chi12", 1.0), ("chi34", 2.0)]),
        )
        .unwrap()
    }

    #[test]
    fn c_matrices() {
        let s = ha4();
        let (l, _) = build(&s, &PhaseState::zeros(4)).unwrap();
        assert_eq!(l.c, s.chi.scale(0.25));
        assert_eq!(l.m.max_abs(), 0.0);
        let k = 1.0;
        let cl = make_spec(
            Kind::ClassicalHA,
            3,
            &params(&[("Jt1", 1.0), ("Jt2", 2.0), ("Jt3", 3.0), ("x0", k), ("y0", 0.0), ("z0", -k)]),
        )
        .unwrap();
        let (l, _) = build(&cl, &PhaseState::zeros(3)).unwrap();
        assert_eq!(l.c, cl.chi.scale(0.5));
    }

    #[test]
    fn classical_lax_on_surface() {
        let k = 0.8;
        let cl = make_spec(
            Kind::ClassicalHA,
            3,
            &params(&[("Jt1", 1.0), ("Jt2", 2.0), ("Jt3", 4.0), ("x0", k * 1.0), ("y0", 0.0), ("z0", -k * 2f64.sqrt())]),
        )
        .unwrap();
        let mut r = sample::rng(11);
        let s = sample::compliant_state(&mut r, &cl);
        assert!(lax_residual(&cl, &s).unwrap() < 1e-12);
        let s = sample::random_state(&mut r, 3);
        assert!(lax_residual(&cl, &s).unwrap() > 1e-6);
    }

    #[test]
    fn residual_on_and_off_manifold() {
        let spec = ha4();
        let mut r = sample::rng(12);
        let s = sample::compliant_state(&mut r, &spec);
        assert!(lax_residual(&spec, &s).unwrap() < 1e-12);
        let mut s2 = s.clone();
        s2.m.set(0, 1, 1.0);
        let (j13, j24, x12, x34) = (spec.j13(), spec.j24(), spec.chi12(), spec.chi34());
        let (m12, m34) = (1.0, 0.0);
        let d13 = -x12 * (j13 * m12 + j24 * m34) + x34 * (j13 * m34 + j24 * m12);
        let d24 = -x12 * (j13 * m34 + j24 * m12) + x34 * (j13 * m12 + j24 * m34);
        let want = (d13.abs().max(d24.abs())) / (spec.j1() + spec.j3());
        assert!((lax_residual(&spec, &s2).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn closed_form_coefficients() {
        let spec = ha4();
        let mut r = sample::rng(13);
        let s = sample::random_state(&mut r, 4);
        let (l, _) = build(&spec, &s).unwrap();
        let sc = spectral_coeffs(&l);
        let (cc, m, g) = (&l.c, &l.m, &l.gamma);
        let mm = |i: usize, j: usize| m.get(i - 1, j - 1);
        let gg = |i: usize, j: usize| g.get(i - 1, j - 1);
        let (c12, c34) = (cc.get(0, 1), cc.get(2, 3));
        assert!((sc.b - (2.0 * c12 * mm(1, 2) + 2.0 * c34 * mm(3, 4))).abs() < 1e-14);
        let h = gg(3, 4) * c12 + gg(1, 2) * c34 + mm(1, 2) * mm(3, 4) + mm(2, 3) * mm(1, 4) - mm(1, 3) * mm(2, 4);
        assert!((sc.h - h).abs() < 1e-14);
        let i = mm(3, 4) * gg(1, 2) + mm(1, 2) * gg(3, 4) + mm(1, 4) * gg(2, 3) + mm(2, 3) * gg(1, 4)
            - gg(1, 3) * mm(2, 4)
            - gg(2, 4) * mm(1, 3);
        assert!((sc.i - i).abs() < 1e-14);
        assert!((sc.a - (c12 * c12 + c34 * c34)).abs() < 1e-15);
        assert!((sc.f - c12 * c34).abs() < 1e-15);
    }

    #[test]
    fn determinant_oracle() {
        let spec = ha4();
        let mut r = sample::rng(14);
        let s = sample::random_state(&mut r, 4);
        let (l, _) = build(&spec, &s).unwrap();
        let sc = spectral_coeffs(&l);
        for _ in 0..20 {
            let lam = c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
            let mu = c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
            let a = spectral_det(&l, lam, mu);
            let b = spectral_poly_eval(&sc, lam, mu);
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn gamma_example() {
        let l = LaxPolynomial {
            c: SkewMatrix::zeros(4),
            m: SkewMatrix::zeros(4),
            gamma: {
                let mut g = SkewMatrix::zeros(4);
                g.set(0, 1, 1.0);
                g.set(2, 3, 1.0);
                g
            },
        };
        let sc = spectral_coeffs(&l);
        assert_eq!(sc.e, 2.0);
        assert_eq!(sc.j, 1.0);
        assert_eq!([sc.a, sc.b, sc.c, sc.d, sc.f, sc.g, sc.h, sc.i], [0.0; 8]);
    }

    #[test]
    fn casimirs_conserved_off_manifold() {
        let spec = ha4();
        let mut r = sample::rng(15);
        let s = sample::random_state(&mut r, 4);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 5.0)).unwrap();
        let rep = isospectrality_report(&spec, &traj, 0.7).unwrap();
        for k in ["d", "e", "i", "j"] {
            assert!(rep.drift(k).unwrap().rel < 1e-8, "{k}");
        }
        assert!(rep.drift("b").unwrap().abs > 1e-3);
        // c and h are integrals only on b = g = 0
        assert!(rep.drift("c").unwrap().abs > 1e-4);
        assert!(rep.drift("h").unwrap().abs > 1e-4);
    }

    #[test]
    fn isospectral_on_manifold() {
        let spec = ha4();
        let mut r = sample::rng(16);
        let s = sample::compliant_state(&mut r, &spec);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 5.0)).unwrap();
        let rep = isospectrality_report(&spec, &traj, 0.7).unwrap();
        assert!(rep.eigenvalue_drift < 1e-7);
        for k in ["c", "h"] {
            assert!(rep.drift(k).unwrap().rel < 1e-8, "{k}");
        }
    }

    #[test]
    fn free_case_all_constant() {
        let p = params(&[("J1", 1.0), ("J3", 3.0), ("J13", 0.6), ("J24", 0.25), ("chi12", 0.0), ("chi34", 0.0)]);
        let spec = make_spec(Kind::HA4, 4, &p).unwrap();
        let mut r = sample::rng(17);
        let s = sample::random_state(&mut r, 4);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 3.0)).unwrap();
        let rep = isospectrality_report(&spec, &traj, 0.7).unwrap();
        for d in &rep.drifts {
            assert!(d.abs < 1e-9, "{}", d.name);
        }
    }

    #[test]
    fn ha5_traces() {
        let spec = make_spec(Kind::HAn, 5, &params(&[("J1", 1.0), ("J3", 2.0), ("J13", 0.5), ("J24", 0.3), ("chi12", 1.0)]))
            .unwrap();
        let mut r = sample::rng(18);
        let s = sample::compliant_state(&mut r, &spec);
        assert!(lax_residual(&spec, &s).unwrap() < 1e-12);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 2.0)).unwrap();
        let rep = isospectrality_report(&spec, &traj, 0.7).unwrap();
        for d in &rep.drifts {
            assert!(d.rel < 1e-8, "{}", d.name);
        }
    }
}
