//! Euler–Poisson flow Ṁ = [M, Ω] + [Γ, χ], Γ̇ = [Γ, Ω], Ω = JM + MJ;
//! fixed-step RK4 and adaptive RKF45 with per-step monitors.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lax;
use crate::models::{Kind, SystemSpec};
use crate::numeric::deriv5;
use crate::skewalg::{commutator, hat, inertia_map, pairs, so_dim, unhat, SkewMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    pub m: SkewMatrix,
    pub gamma: SkewMatrix,
    pub t: f64,
}

impl PhaseState {
    pub fn zeros(n: usize) -> Self {
        PhaseState { m: SkewMatrix::zeros(n), gamma: SkewMatrix::zeros(n), t: 0.0 }
    }

    pub fn new(m: SkewMatrix, gamma: SkewMatrix) -> Result<Self> {
        if m.dim() != gamma.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: gamma.dim() });
        }
        Ok(PhaseState { m, gamma, t: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// Upper-triangle coordinates of M then Γ.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.m.upper();
        v.extend(self.gamma.upper());
        v
    }

    pub fn from_flat(n: usize, v: &[f64], t: f64) -> Result<Self> {
        let d = so_dim(n);
        if v.len() < 2 * d {
            return Err(Error::DimensionMismatch { expected: 2 * d, found: v.len() });
        }
        Ok(PhaseState { m: SkewMatrix::from_upper(n, &v[..d])?, gamma: SkewMatrix::from_upper(n, &v[d..2 * d])?, t })
    }

    /// Coordinates of the polynomial chart: (M₁,M₂,M₃,Γ₁,Γ₂,Γ₃) for n = 3,
    /// `flat()` otherwise.
    pub fn chart_coords(&self) -> Vec<f64> {
        if self.dim() == 3 {
            let mut v = unhat(&self.m).expect("n = 3").to_vec();
            v.extend(unhat(&self.gamma).expect("n = 3"));
            v
        } else {
            self.flat()
        }
    }

    pub fn from_chart(n: usize, x: &[f64]) -> Result<Self> {
        if n == 3 {
            if x.len() != 6 {
                return Err(Error::DimensionMismatch { expected: 6, found: x.len() });
            }
            Ok(PhaseState { m: hat(&[x[0], x[1], x[2]]), gamma: hat(&[x[3], x[4], x[5]]), t: 0.0 })
        } else {
            Self::from_flat(n, x, 0.0)
        }
    }
}

pub fn rhs(spec: &SystemSpec, s: &PhaseState) -> Result<(SkewMatrix, SkewMatrix)> {
    if s.dim() != spec.n || s.gamma.dim() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, found: s.dim() });
    }
    let omega = inertia_map(&spec.j, &s.m)?;
    let mdot = commutator(&s.m, &omega)?.add(&commutator(&s.gamma, &spec.chi)?);
    let gdot = commutator(&s.gamma, &omega)?;
    Ok((mdot, gdot))
}

/// ½ Σ_{i<j} M_ij Ω_ij + Σ_{i<j} χ_ij Γ_ij.
pub fn energy(spec: &SystemSpec, s: &PhaseState) -> f64 {
    let omega = inertia_map(&spec.j, &s.m).expect("dimensions checked by caller");
    let mut h = 0.0;
    for (a, b) in pairs(spec.n) {
        h += 0.5 * s.m.get(a, b) * omega.get(a, b) + spec.chi.get(a, b) * s.gamma.get(a, b);
    }
    h
}

fn matpow_trace(n: usize, first: &[f64], base: &[f64], k: usize) -> f64 {
    // tr(first · base^k)
    let mut acc = first.to_vec();
    for _ in 0..k {
        let mut next = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                next[i * n + j] = (0..n).map(|l| acc[i * n + l] * base[l * n + j]).sum();
            }
        }
        acc = next;
    }
    (0..n).map(|i| acc[i * n + i]).sum()
}

/// Named conserved quantities. n = 3: F1 (energy), F2 = ⟨M,Γ⟩, F3 = ⟨Γ,Γ⟩,
/// F4 = ⟨M,χ⟩. n ≥ 4: energy, tr Γ^{2k}, tr MΓ^{2k−1}, and for n = 4 the
/// spectral coefficients a..j.
pub fn first_integrals(spec: &SystemSpec, s: &PhaseState) -> Vec<(String, f64)> {
    let n = spec.n;
    let mut out = vec![("energy".to_string(), energy(spec, s))];
    if n == 3 {
        let m = unhat(&s.m).expect("n = 3");
        let g = unhat(&s.gamma).expect("n = 3");
        let chi = unhat(&spec.chi).expect("n = 3");
        let dot = crate::skewalg::dot;
        out[0].0 = "F1".into();
        out.push(("F2".into(), dot(&m, &g)));
        out.push(("F3".into(), dot(&g, &g)));
        out.push(("F4".into(), dot(&m, &chi)));
        return out;
    }
    let gd = s.gamma.dense();
    for k in 1..=n / 2 {
        out.push((format!("trG{}", 2 * k), matpow_trace(n, gd, gd, 2 * k - 1)));
        out.push((format!("trMG{}", 2 * k - 1), matpow_trace(n, s.m.dense(), gd, 2 * k - 1)));
    }
    if n == 4 {
        if let Ok(l) = lax::build(spec, s) {
            let sc = lax::spectral_coeffs(&l.0);
            out.extend(sc.named().into_iter().map(|(k, v)| (k.to_string(), v)));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    RK4,
    RKF45,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub tol: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { method: Method::RK4, dt: 1e-3, tol: 1e-10, dt_min: 1e-12, dt_max: 0.1, t_end: 10.0 }
    }
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        IntegratorConfig { dt, t_end, ..Default::default() }
    }

    pub fn rkf45(tol: f64, t_end: f64) -> Self {
        IntegratorConfig { method: Method::RKF45, tol, dt: 1e-2, t_end, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0 && self.t_end >= 0.0 && self.tol > 0.0 && self.dt_min > 0.0 && self.dt_max >= self.dt_min;
        if !ok || !self.dt.is_finite() || !self.t_end.is_finite() {
            return Err(Error::Spec(format!("bad integrator config {self:?}")));
        }
        Ok(())
    }
}

/// Integrate ẏ = f(t, y) from t = 0, calling `on_step(t, y)` at t = 0 and
/// at every accepted step.
pub fn integrate_ode<F, S>(f: F, y0: &[f64], cfg: &IntegratorConfig, mut on_step: S) -> Result<()>
where
    F: Fn(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]),
{
    cfg.validate()?;
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    on_step(t, &y);
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 6];
    let mut tmp = vec![0.0; dim];
    match cfg.method {
        Method::RK4 => {
            let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
            let h = cfg.t_end / steps as f64;
            for step in 0..steps {
                f(t, &y, &mut k[0]);
                for i in 0..dim {
                    tmp[i] = y[i] + 0.5 * h * k[0][i];
                }
                f(t + 0.5 * h, &tmp, &mut k[1]);
                for i in 0..dim {
                    tmp[i] = y[i] + 0.5 * h * k[1][i];
                }
                f(t + 0.5 * h, &tmp, &mut k[2]);
                for i in 0..dim {
                    tmp[i] = y[i] + h * k[2][i];
                }
                f(t + h, &tmp, &mut k[3]);
                for i in 0..dim {
                    y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
                }
                t = (step + 1) as f64 * h;
                on_step(t, &y);
            }
        }
        Method::RKF45 => {
            // Fehlberg 4(5), advancing with the fifth-order solution.
            const A: [[f64; 5]; 6] = [
                [0.0, 0.0, 0.0, 0.0, 0.0],
                [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
                [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
                [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
                [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
                [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
            ];
            const CT: [f64; 6] = [0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5];
            const B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];
            const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];
            let mut h = cfg.dt.min(cfg.dt_max);
            let mut y5 = vec![0.0; dim];
            while t < cfg.t_end {
                let last = t + h >= cfg.t_end;
                if last {
                    h = cfg.t_end - t;
                }
                for s in 0..6 {
                    for i in 0..dim {
                        tmp[i] = y[i] + h * (0..s).map(|r| A[s][r] * k[r][i]).sum::<f64>();
                    }
                    let (head, tail) = k.split_at_mut(s);
                    let _ = head;
                    f(t + CT[s] * h, &tmp, &mut tail[0]);
                }
                let mut err = 0.0f64;
                for i in 0..dim {
                    let s5: f64 = (0..6).map(|r| B5[r] * k[r][i]).sum();
                    let s4: f64 = (0..6).map(|r| B4[r] * k[r][i]).sum();
                    y5[i] = y[i] + h * s5;
                    let scale = 1.0 + y[i].abs().max(y5[i].abs());
                    err = err.max((h * (s5 - s4)).abs() / scale);
                }
                if err <= cfg.tol || h <= cfg.dt_min {
                    if err > cfg.tol {
                        return Err(Error::StepSizeUnderflow { t, h });
                    }
                    t = if last { cfg.t_end } else { t + h };
                    y.copy_from_slice(&y5);
                    on_step(t, &y);
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * (cfg.tol / err).powf(0.2)).clamp(0.2, 5.0) };
                h = (h * fac).min(cfg.dt_max);
                if h < cfg.dt_min {
                    if t < cfg.t_end {
                        return Err(Error::StepSizeUnderflow { t, h });
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monitor {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub monitors: Vec<Monitor>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors.iter().find(|m| m.name == name).map(|m| m.values.as_slice())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// max_t |x(t) − x(0)| per conserved-quantity monitor, with the
    /// relative variant |x(t) − x(0)| / |x(0)| (absolute when |x(0)| < 1e-12).
    pub fn drifts(&self) -> Vec<(String, f64, f64)> {
        self.monitors
            .iter()
            .filter(|m| !m.name.starts_with("rel:") && !m.name.starts_with("phi"))
            .map(|m| {
                let x0 = m.values[0];
                let abs = m.values.iter().fold(0.0f64, |a, v| a.max((v - x0).abs()));
                let rel = if x0.abs() < 1e-12 { abs } else { abs / x0.abs() };
                (m.name.clone(), abs, rel)
            })
            .collect()
    }

    /// max_t |r(t)| per invariant-relation monitor.
    pub fn relation_residuals(&self) -> Vec<(String, f64)> {
        self.monitors
            .iter()
            .filter_map(|m| {
                m.name
                    .strip_prefix("rel:")
                    .map(|n| (n.to_string(), m.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))))
            })
            .collect()
    }

    /// Header t, M_ij, Gamma_ij, monitors.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let Some(first) = self.samples.first() else {
            return out;
        };
        let n = first.dim();
        let mut cols = vec!["t".to_string()];
        for (a, b) in pairs(n) {
            cols.push(format!("M{}{}", a + 1, b + 1));
        }
        for (a, b) in pairs(n) {
            cols.push(format!("Gamma{}{}", a + 1, b + 1));
        }
        cols.extend(self.monitors.iter().map(|m| m.name.clone()));
        out.push_str(&cols.join(","));
        out.push('\n');
        for (k, s) in self.samples.iter().enumerate() {
            let mut row = vec![fmt_num(s.t)];
            row.extend(s.flat().into_iter().map(fmt_num));
            row.extend(self.monitors.iter().map(|m| fmt_num(m.values[k])));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> Value {
        let last = self.samples.last().expect("nonempty trajectory");
        let drifts: serde_json::Map<String, Value> = self
            .drifts()
            .into_iter()
            .map(|(k, a, r)| (k, json!({"abs": a, "rel": r})))
            .collect();
        let rel: serde_json::Map<String, Value> =
            self.relation_residuals().into_iter().map(|(k, v)| (k, json!(v))).collect();
        json!({
            "final_state": {"t": last.t, "M": last.m.upper(), "Gamma": last.gamma.upper()},
            "samples": self.samples.len(),
            "max_drifts": drifts,
            "invariant_residuals": rel,
        })
    }
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.17e}")
}

/// Integrate the Euler–Poisson flow. For n ≥ 4 two extra quadrature
/// channels φ₁ = ∫(Ω₃₄+Ω₁₂)dt, φ₂ = ∫(Ω₃₄−Ω₁₂)dt are carried along.
pub fn integrate(spec: &SystemSpec, state0: &PhaseState, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let n = spec.n;
    if state0.dim() != n || state0.gamma.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: state0.dim() });
    }
    let d = so_dim(n);
    let aux = if n >= 4 { 2 } else { 0 };
    let mut y0 = state0.flat();
    y0.extend(std::iter::repeat_n(0.0, aux));

    let field = |_t: f64, y: &[f64], out: &mut [f64]| {
        let s = PhaseState::from_flat(n, y, 0.0).expect("layout fixed");
        let (md, gd) = rhs(spec, &s).expect("dimensions fixed");
        out[..d].copy_from_slice(&md.upper());
        out[d..2 * d].copy_from_slice(&gd.upper());
        if aux > 0 {
            let om = inertia_map(&spec.j, &s.m).expect("dimensions fixed");
            out[2 * d] = om.get(2, 3) + om.get(0, 1);
            out[2 * d + 1] = om.get(2, 3) - om.get(0, 1);
        }
    };

    let mut samples = Vec::new();
    let mut monitors: Vec<Monitor> = Vec::new();
    let t0 = state0.t;
    integrate_ode(field, &y0, cfg, |t, y| {
        let s = PhaseState::from_flat(n, y, t0 + t).expect("layout fixed");
        let mut row = first_integrals(spec, &s);
        row.extend(spec.invariant_residuals(&s).into_iter().map(|(k, v)| (format!("rel:{k}"), v)));
        if aux > 0 {
            row.push(("phi1".into(), y[2 * d]));
            row.push(("phi2".into(), y[2 * d + 1]));
        }
        if monitors.is_empty() {
            monitors = row.iter().map(|(k, _)| Monitor { name: k.clone(), values: Vec::new() }).collect();
        }
        for (m, (_, v)) in monitors.iter_mut().zip(row) {
            m.values.push(v);
        }
        samples.push(s);
    })?;
    Ok(Trajectory { samples, monitors })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop8cReport {
    pub residual_phi1: f64,
    pub residual_phi2: f64,
    pub relation_residual: f64,
}

impl Prop8cReport {
    pub fn max(&self) -> f64 {
        self.residual_phi1.max(self.residual_phi2)
    }
}

/// φ̇₁ = N₁(J₂₄+J₁₃), φ̇₂ = −N₄(J₂₄−J₁₃) with N₁ = M₁₄−M₂₃, N₄ = M₁₄+M₂₃,
/// φ̇ taken by a 5-point stencil on the integrated φ channels.
pub fn prop8c_check(spec: &SystemSpec, traj: &Trajectory) -> Result<Prop8cReport> {
    if spec.kind != Kind::HA4 {
        return Err(Error::Unsupported("Proposition 8(c) concerns HA4".into()));
    }
    if traj.len() < 5 {
        return Err(Error::Spec("trajectory too short for the 5-point stencil".into()));
    }
    let rel = traj
        .samples
        .iter()
        .fold(0.0f64, |a, s| a.max(s.m.get(0, 1).abs()).max(s.m.get(2, 3).abs()));
    if rel > 1e-6 {
        return Err(Error::InvariantViolated { residual: rel });
    }
    let t = traj.times();
    let p1 = traj.monitor("phi1").ok_or_else(|| Error::Spec("no phi1 channel".into()))?;
    let p2 = traj.monitor("phi2").ok_or_else(|| Error::Spec("no phi2 channel".into()))?;
    let (j13, j24) = (spec.j13(), spec.j24());
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    for (k, s) in traj.samples.iter().enumerate() {
        let n1 = s.m.get(0, 3) - s.m.get(1, 2);
        let n4 = s.m.get(0, 3) + s.m.get(1, 2);
        r1 = r1.max((deriv5(&t, p1, k) - n1 * (j24 + j13)).abs());
        r2 = r2.max((deriv5(&t, p2, k) + n4 * (j24 - j13)).abs());
    }
    Ok(Prop8cReport { residual_phi1: r1, residual_phi2: r2, relation_residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_spec, Params};
    use crate::sample;

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

    fn ha5() -> SystemSpec {
        make_spec(Kind::HAn, 5, &params(&[("J1", 1.0), ("J3", 2.0), ("J13", 0.5), ("J24", 0.3), ("chi12", 1.0)]))
            .unwrap()
    }

    #[test]
    fn equilibrium() {
        let spec = ha4();
        let s = PhaseState { m: SkewMatrix::zeros(4), gamma: spec.chi.clone(), t: 0.0 };
        let (md, gd) = rhs(&spec, &s).unwrap();
        assert_eq!(md.max_abs(), 0.0);
        assert_eq!(gd.max_abs(), 0.0);
    }

    #[test]
    fn lemma1_formula() {
        let spec = ha4();
        let mut r = sample::rng(1);
        for _ in 0..10 {
            let s = sample::random_state(&mut r, 4);
            let (md, _) = rhs(&spec, &s).unwrap();
            let m = |i: usize, j: usize| s.m.get(i - 1, j - 1);
            let want = spec.j13() * (m(1, 3) * m(1, 2) + m(2, 4) * m(3, 4)) + spec.j24() * (m(1, 3) * m(3, 4) + m(1, 2) * m(2, 4));
            assert!((md.get(0, 1) - want).abs() < 1e-14);
        }
        let s = sample::compliant_state(&mut r, &spec);
        let (md, _) = rhs(&spec, &s).unwrap();
        assert_eq!(md.get(0, 1), 0.0);
        assert_eq!(md.get(2, 3), 0.0);
    }

    #[test]
    fn lemma2b_rhs_zero() {
        let spec = make_spec(Kind::HAn, 6, &params(&[("J1", 1.0), ("J3", 2.0), ("J13", 0.5), ("J24", 0.3), ("chi12", 1.0)]))
            .unwrap();
        let mut r = sample::rng(2);
        let s = sample::compliant_state(&mut r, &spec);
        let (md, _) = rhs(&spec, &s).unwrap();
        assert_eq!(md.get(4, 5), 0.0);
    }

    #[test]
    fn free_top_energy() {
        let mut p = params(&[("J1", 1.0), ("J3", 3.0), ("J13", 0.6), ("J24", 0.25), ("chi12", 0.0), ("chi34", 0.0)]);
        p.insert("chi12".into(), 0.0);
        let spec = make_spec(Kind::HA4, 4, &p).unwrap();
        let mut r = sample::rng(3);
        let s = sample::random_state(&mut r, 4);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 10.0)).unwrap();
        let (_, _, rel) = traj.drifts().into_iter().find(|d| d.0 == "energy").unwrap();
        assert!(rel < 1e-9, "{rel}");
    }

    #[test]
    fn invariant_relations_persist() {
        let mut r = sample::rng(4);
        for spec in [ha4(), ha5()] {
            let s = sample::compliant_state(&mut r, &spec);
            let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 10.0)).unwrap();
            for (name, v) in traj.relation_residuals() {
                assert!(v < 1e-8, "{name}: {v}");
            }
        }
    }

    #[test]
    fn integrals_conserved_generic() {
        let mut r = sample::rng(5);
        let spec = ha5();
        let s = sample::random_state(&mut r, 5);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 10.0)).unwrap();
        for (name, abs, rel) in traj.drifts() {
            assert!(rel < 1e-8 || abs < 1e-10, "{name}: {rel}");
        }
    }

    #[test]
    fn classical_first_integrals() {
        let k = 1.0;
        let spec = make_spec(
            Kind::ClassicalHA,
            3,
            &params(&[("Jt1", 1.0), ("Jt2", 2.0), ("Jt3", 3.0), ("x0", k), ("y0", 0.0), ("z0", -k)]),
        )
        .unwrap();
        let s = PhaseState::from_chart(3, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let f = first_integrals(&spec, &s);
        assert_eq!(f[1], ("F2".to_string(), 1.0));
        assert_eq!(f[2], ("F3".to_string(), 1.0));
        let mut r = sample::rng(6);
        let s = sample::compliant_state(&mut r, &spec);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 10.0)).unwrap();
        assert!(traj.relation_residuals()[0].1 < 1e-8);
    }

    #[test]
    fn j_coefficient_example() {
        let spec = ha4();
        let mut s = PhaseState::zeros(4);
        s.gamma.set(0, 1, 1.0);
        s.gamma.set(2, 3, 1.0);
        let f = first_integrals(&spec, &s);
        assert_eq!(f.iter().find(|(k, _)| k == "j").unwrap().1, 1.0);
    }

    #[test]
    fn rk4_slope_matches_rhs() {
        let spec = ha4();
        let mut r = sample::rng(7);
        let s = sample::random_state(&mut r, 4);
        let dt = 1e-3;
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(dt, 4.0 * dt)).unwrap();
        let t = traj.times();
        let (md, _) = rhs(&spec, &s).unwrap();
        for (k, want) in md.upper().into_iter().enumerate() {
            let y: Vec<f64> = traj.samples.iter().map(|x| x.flat()[k]).collect();
            assert!((deriv5(&t, &y, 0) - want).abs() < 1e-8);
        }
    }

    #[test]
    fn rkf45_matches_rk4() {
        let spec = ha4();
        let mut r = sample::rng(8);
        let s = sample::random_state(&mut r, 4);
        let a = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 2.0)).unwrap();
        let b = integrate(&spec, &s, &IntegratorConfig::rkf45(1e-11, 2.0)).unwrap();
        let (x, y) = (a.samples.last().unwrap().flat(), b.samples.last().unwrap().flat());
        assert_eq!(b.samples.last().unwrap().t, 2.0);
        for k in 0..x.len() {
            assert!((x[k] - y[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn prop8c() {
        let spec = ha4();
        let mut r = sample::rng(9);
        let s = sample::compliant_state(&mut r, &spec);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 3.0)).unwrap();
        assert!(prop8c_check(&spec, &traj).unwrap().max() < 1e-8);

        let bad = sample::random_state(&mut r, 4);
        let traj = integrate(&spec, &bad, &IntegratorConfig::rk4(1e-3, 0.1)).unwrap();
        assert!(matches!(prop8c_check(&spec, &traj), Err(Error::InvariantViolated { .. })));
    }

    #[test]
    fn prop8c_degenerate_cases() {
        let p = params(&[("J1", 1.0), ("J3", 3.0), ("J13", 0.4), ("J24", 0.4), ("chi12", 1.0), ("chi34", 2.0)]);
        let spec = make_spec(Kind::HA4, 4, &p).unwrap();
        let mut r = sample::rng(10);
        let s = sample::compliant_state(&mut r, &spec);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 1.0)).unwrap();
        let phi2 = traj.monitor("phi2").unwrap();
        assert!(phi2.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn csv_header() {
        let spec = ha4();
        let traj = integrate(&spec, &PhaseState::zeros(4), &IntegratorConfig::rk4(0.1, 0.2)).unwrap();
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,M12,M13,M14,M23,M24,M34,Gamma12,"));
        assert_eq!(csv.lines().count(), 4);
    }
}
