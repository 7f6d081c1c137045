//! Named rigid-body systems: classical, four- and n-dimensional
//! Hess-Appel'rot, Lagrange top, Lagrange bitop; their Hamiltonians and
//! the block-form ↔ diagonal-form correspondence.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::dynamics::PhaseState;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::skewalg::{
    hat, pair_index, pairs, so3_inertia_from_operator, so3_operator_from_inertia, so_dim, unhat, SkewMatrix,
    SymMatrix,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    ClassicalHA,
    HA4,
    HAn,
    LagrangeTop,
    LagrangeBitop,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    HFirst,
    HSecond,
}

pub type Params = BTreeMap<String, f64>;

pub const DEFAULT_CONDITION_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub kind: Kind,
    pub n: usize,
    /// Inertia in the so(n) convention Ω = JM + MJ (also for n = 3).
    pub j: SymMatrix,
    pub chi: SkewMatrix,
    pub params: Params,
    /// Filled for HA4/HAn when J₃ ≠ J₁ or the π/4 limit applies.
    pub diag: Option<DiagonalizedSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizedSpec {
    pub jtilde: Vec<f64>,
    pub chitilde: Vec<f64>,
    pub t1: f64,
    pub t2: f64,
    pub phi: f64,
    pub phi1: f64,
    /// Row-major orthogonal S with J̃ = SᵀJS.
    pub s: Vec<f64>,
    /// |J̃₃−J̃₄ − (J̃₂−J̃₁)|.
    pub residual_c1: f64,
    /// Def 1'(c) second identity on magnitudes.
    pub residual_c2: f64,
    /// Same identity with signed cos 2φ factors (reported, not enforced).
    pub residual_c2_signed: f64,
    /// χ̃₁₂χ̃₃₄ + χ̃₁₄χ̃₂₃.
    pub residual_c3: f64,
}

fn param(params: &Params, key: &str) -> Result<f64> {
    params.get(key).copied().ok_or_else(|| Error::MissingParam(key.to_string()))
}

fn param_or(params: &Params, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Block form (6)/(10): J₁ on (1,1),(2,2); J₃ elsewhere on the diagonal;
/// J₁₃ at (1,3); J₂₄ at (2,4).
pub fn block_inertia(n: usize, j1: f64, j3: f64, j13: f64, j24: f64) -> SymMatrix {
    let mut d = vec![j3; n];
    d[0] = j1;
    d[1] = j1;
    let mut j = SymMatrix::diag(&d);
    j.set(0, 2, j13);
    if n >= 4 {
        j.set(1, 3, j24);
    }
    j
}

fn chi_12_34(n: usize, chi12: f64, chi34: f64) -> SkewMatrix {
    let mut c = SkewMatrix::zeros(n);
    c.set(0, 1, chi12);
    if n >= 4 {
        c.set(2, 3, chi34);
    }
    c
}

pub fn make_spec(kind: Kind, n: usize, params: &Params) -> Result<SystemSpec> {
    make_spec_with_tol(kind, n, params, DEFAULT_CONDITION_TOL)
}

pub fn make_spec_with_tol(kind: Kind, n: usize, params: &Params, tol: f64) -> Result<SystemSpec> {
    let (j, chi) = match kind {
        Kind::ClassicalHA => {
            require_n(n, 3)?;
            let (op, chiv) = classical_operator(params)?;
            (so3_inertia_from_operator(&op), hat(&chiv))
        }
        Kind::LagrangeTop if n == 3 => {
            let j1 = param(params, "J1")?;
            let j3 = param(params, "J3")?;
            let z0 = param_or(params, "z0", 1.0);
            let op = SymMatrix::diag(&[j1, j1, j3]);
            (so3_inertia_from_operator(&op), hat(&[0.0, 0.0, z0]))
        }
        Kind::LagrangeTop => {
            if n < 4 {
                return Err(Error::Spec(format!("LagrangeTop needs n = 3 or n ≥ 4, got {n}")));
            }
            let j1 = param(params, "J1")?;
            let j3 = param(params, "J3")?;
            (block_inertia(n, j1, j3, 0.0, 0.0), chi_12_34(n, param_or(params, "chi12", 1.0), 0.0))
        }
        Kind::HA4 => {
            require_n(n, 4)?;
            let j = block_inertia(4, param(params, "J1")?, param(params, "J3")?, param(params, "J13")?, param(params, "J24")?);
            (j, chi_12_34(4, param(params, "chi12")?, param(params, "chi34")?))
        }
        Kind::HAn => {
            if n < 4 {
                return Err(Error::Spec(format!("HAn needs n ≥ 4, got {n}")));
            }
            let j = block_inertia(n, param(params, "J1")?, param(params, "J3")?, param(params, "J13")?, param(params, "J24")?);
            (j, chi_12_34(n, param(params, "chi12")?, 0.0))
        }
        Kind::LagrangeBitop => {
            require_n(n, 4)?;
            let j = block_inertia(4, param(params, "J1")?, param(params, "J3")?, 0.0, 0.0);
            (j, chi_12_34(4, param(params, "chi12")?, param(params, "chi34")?))
        }
        Kind::Custom => {
            return Err(Error::Spec("Custom systems need explicit J and chi (use SystemSpec::new)".into()));
        }
    };
    SystemSpec::new_with_tol(kind, j, chi, params.clone(), tol)
}

fn require_n(n: usize, want: usize) -> Result<()> {
    if n != want {
        return Err(Error::DimensionMismatch { expected: want, found: n });
    }
    Ok(())
}

/// Vector operator and χ-vector of a classical spec: either the
/// Zhukovskii frame (J1, J3, J13, z0) or the diagonal frame
/// (Jt1, Jt2, Jt3, x0, y0, z0).
fn classical_operator(params: &Params) -> Result<(SymMatrix, [f64; 3])> {
    if params.contains_key("Jt1") {
        let jt = [param(params, "Jt1")?, param(params, "Jt2")?, param(params, "Jt3")?];
        let chi = [param(params, "x0")?, param_or(params, "y0", 0.0), param(params, "z0")?];
        Ok((SymMatrix::diag(&jt), chi))
    } else {
        let j1 = param(params, "J1")?;
        let j3 = param(params, "J3")?;
        let j13 = param(params, "J13")?;
        let mut op = SymMatrix::diag(&[j1, j1, j3]);
        op.set(0, 2, j13);
        Ok((op, [0.0, 0.0, param_or(params, "z0", 1.0)]))
    }
}

fn violated(condition: &str, residual: f64) -> Error {
    Error::ConditionViolated { condition: condition.to_string(), residual }
}

impl SystemSpec {
    pub fn new(kind: Kind, j: SymMatrix, chi: SkewMatrix, params: Params) -> Result<Self> {
        Self::new_with_tol(kind, j, chi, params, DEFAULT_CONDITION_TOL)
    }

    /// Validates the defining conditions of `kind` against explicit matrices.
    pub fn new_with_tol(kind: Kind, j: SymMatrix, chi: SkewMatrix, params: Params, tol: f64) -> Result<Self> {
        let n = j.dim();
        if chi.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: chi.dim() });
        }
        if !(3..=8).contains(&n) {
            return Err(Error::Spec(format!("dimension {n} outside 3..=8")));
        }
        let mut spec = SystemSpec { kind, n, j, chi, params, diag: None };
        match kind {
            Kind::ClassicalHA => spec.check_classical(tol)?,
            Kind::HA4 | Kind::HAn | Kind::LagrangeBitop => spec.check_block(tol)?,
            Kind::LagrangeTop if n >= 4 => spec.check_block(tol)?,
            _ => {}
        }
        if matches!(kind, Kind::HA4 | Kind::HAn) {
            spec.diag = Some(diagonalize(&spec)?);
        }
        Ok(spec)
    }

    fn check_classical(&self, tol: f64) -> Result<()> {
        if self.n != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: self.n });
        }
        let op = self.operator3();
        let chi = unhat(&self.chi)?;
        if op.is_diagonal(0.0) {
            // diagonal frame: condition (3)
            let (a, b, c) = (op.get(0, 0), op.get(1, 1), op.get(2, 2));
            if !(a < b && b < c) {
                return Err(violated("(3): J̃₁ < J̃₂ < J̃₃", (b - a).min(c - b)));
            }
            if chi[1].abs() > tol {
                return Err(violated("(3): y₀ = 0", chi[1].abs()));
            }
            let r = chi[0] * (c - b).sqrt() + chi[2] * (b - a).sqrt();
            if r.abs() > tol {
                return Err(violated("(3): x₀√(J̃₃−J̃₂) + z₀√(J̃₂−J̃₁) = 0", r.abs()));
            }
        } else {
            // Zhukovskii frame: J₁ = J₂, only J₁₃ off-diagonal, χ = (0,0,z₀)
            let r = [op.get(0, 0) - op.get(1, 1), op.get(0, 1), op.get(1, 2), chi[0], chi[1]]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            if r > tol {
                return Err(violated("Zhukovskii frame: J₁₁ = J₂₂, J₁₂ = J₂₃ = 0, χ = (0,0,z₀)", r));
            }
        }
        Ok(())
    }

    fn check_block(&self, tol: f64) -> Result<()> {
        let n = self.n;
        let (j1, j3) = (self.j.get(0, 0), self.j.get(2, 2));
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let want = match (a, b) {
                    (0, 0) | (1, 1) => j1,
                    (x, y) if x == y => j3,
                    (0, 2) | (1, 3) => {
                        if matches!(self.kind, Kind::LagrangeBitop | Kind::LagrangeTop) {
                            0.0
                        } else {
                            continue;
                        }
                    }
                    _ => 0.0,
                };
                worst = worst.max((self.j.get(a, b) - want).abs());
            }
        }
        if worst > tol {
            return Err(violated("J block form (6)/(10)", worst));
        }
        let mut cw = 0.0f64;
        for (a, b) in pairs(n) {
            let free = (a, b) == (0, 1)
                || ((a, b) == (2, 3) && matches!(self.kind, Kind::HA4 | Kind::LagrangeBitop));
            if !free {
                cw = cw.max(self.chi.get(a, b).abs());
            }
        }
        if cw > tol {
            return Err(violated("χ shape of Definition 1(b)/2(b)", cw));
        }
        Ok(())
    }

    /// Vector operator A (Ω = A·M on vectors); only for n = 3.
    pub fn operator3(&self) -> SymMatrix {
        assert_eq!(self.n, 3);
        so3_operator_from_inertia(&self.j)
    }

    pub fn j1(&self) -> f64 {
        self.j.get(0, 0)
    }

    pub fn j3(&self) -> f64 {
        self.j.get(2, 2)
    }

    pub fn j13(&self) -> f64 {
        self.j.get(0, 2)
    }

    pub fn j24(&self) -> f64 {
        if self.n >= 4 {
            self.j.get(1, 3)
        } else {
            0.0
        }
    }

    pub fn chi12(&self) -> f64 {
        self.chi.get(0, 1)
    }

    pub fn chi34(&self) -> f64 {
        if self.n >= 4 {
            self.chi.get(2, 3)
        } else {
            0.0
        }
    }

    /// The constant matrix C of the Lax polynomial λ²C + λM + Γ.
    pub fn lax_c(&self) -> Result<SkewMatrix> {
        match self.kind {
            Kind::ClassicalHA | Kind::LagrangeTop if self.n == 3 => {
                // J̃₂ (diagonal frame) or J₁ (Zhukovskii frame): the (2,2) entry either way
                let op = self.operator3();
                Ok(self.chi.scale(1.0 / op.get(1, 1)))
            }
            Kind::HA4 | Kind::HAn | Kind::LagrangeBitop | Kind::LagrangeTop => {
                Ok(self.chi.scale(1.0 / (self.j1() + self.j3())))
            }
            Kind::Custom | Kind::ClassicalHA => Err(Error::Unsupported("no Lax pair for Custom systems".into())),
        }
    }

    /// Named invariant-relation residuals at a state.
    pub fn invariant_residuals(&self, s: &PhaseState) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        match self.kind {
            Kind::ClassicalHA => {
                let m = unhat(&s.m).expect("n = 3");
                let chi = unhat(&self.chi).expect("n = 3");
                out.push(("F4".to_string(), m[0] * chi[0] + m[2] * chi[2]));
            }
            Kind::HA4 => {
                out.push(("M12".to_string(), s.m.get(0, 1)));
                out.push(("M34".to_string(), s.m.get(2, 3)));
            }
            Kind::HAn => {
                out.push(("M12".to_string(), s.m.get(0, 1)));
                for (a, b) in pairs(self.n) {
                    if a >= 2 {
                        out.push((format!("M{}{}", a + 1, b + 1), s.m.get(a, b)));
                    }
                }
            }
            _ => {}
        }
        out
    }

    /// Project a state onto the invariant manifold (no-op for kinds
    /// without invariant relations).
    pub fn impose_relations(&self, s: &mut PhaseState) {
        match self.kind {
            Kind::ClassicalHA => {
                let m = unhat(&s.m).expect("n = 3");
                let chi = unhat(&self.chi).expect("n = 3");
                let k = crate::skewalg::dot(&m, &chi) / crate::skewalg::dot(&chi, &chi);
                s.m = hat(&[m[0] - k * chi[0], m[1] - k * chi[1], m[2] - k * chi[2]]);
            }
            Kind::HA4 | Kind::HAn => {
                let n = self.n;
                for k in self.relation_coords() {
                    let (a, b) = pairs(n)[k];
                    s.m.set(a, b, 0.0);
                }
            }
            _ => {}
        }
    }

    /// Coordinates that the invariant relations force to zero, in chart
    /// order (n = 3: vector chart; n ≥ 4: upper-triangle chart).
    pub fn relation_coords(&self) -> Vec<usize> {
        match self.kind {
            Kind::ClassicalHA | Kind::LagrangeTop if self.n == 3 => vec![2],
            Kind::HA4 | Kind::LagrangeBitop => vec![pair_index(4, 0, 1), pair_index(4, 2, 3)],
            Kind::HAn | Kind::LagrangeTop => {
                let mut v = vec![pair_index(self.n, 0, 1)];
                for (a, b) in pairs(self.n) {
                    if a >= 2 {
                        v.push(pair_index(self.n, a, b));
                    }
                }
                v
            }
            _ => Vec::new(),
        }
    }
}

/// Orthogonal block rotation bringing J to diagonal form (Proposition 1).
pub fn diagonalize(spec: &SystemSpec) -> Result<DiagonalizedSpec> {
    if !matches!(spec.kind, Kind::HA4 | Kind::HAn) {
        return Err(Error::Unsupported("diagonalize applies to HA4/HAn".into()));
    }
    let n = spec.n;
    let (j1, j3, j13, j24) = (spec.j1(), spec.j3(), spec.j13(), spec.j24());
    let angle = |off: f64| -> f64 {
        if j3 == j1 {
            if off == 0.0 {
                0.0
            } else {
                FRAC_PI_4.copysign(off)
            }
        } else {
            0.5 * (2.0 * off / (j3 - j1)).atan()
        }
    };
    let (phi, phi1) = (angle(j13), angle(j24));
    let (c, s, c1, s1) = (phi.cos(), phi.sin(), phi1.cos(), phi1.sin());
    let mut smat = vec![0.0; n * n];
    for k in 0..n {
        smat[k * n + k] = 1.0;
    }
    smat[0] = c;
    smat[2] = s;
    smat[2 * n] = -s;
    smat[2 * n + 2] = c;
    smat[n + 1] = c1;
    smat[n + 3] = s1;
    smat[3 * n + 1] = -s1;
    smat[3 * n + 3] = c1;

    let jt = conj_t(n, &smat, spec.j.dense());
    let chit = conj_t(n, &smat, spec.chi.dense());
    let jtilde: Vec<f64> = (0..n).map(|k| jt[k * n + k]).collect();
    let x = |a: usize, b: usize| chit[a * n + b];
    let (x12, x14, x23, x34) = (x(0, 1), x(0, 3), x(1, 2), x(2, 3));

    let num1 = 2.0 * (x14 * x34 - x12 * x23);
    let den1 = x14 * x14 - x34 * x34 + x12 * x12 - x23 * x23;
    let num2 = 2.0 * (x14 * x12 - x23 * x34);
    let den2 = -x14 * x14 - x34 * x34 + x12 * x12 + x23 * x23;
    let t1 = num1 / den1;
    let t2 = num2 / den2;
    // (J̃₃−J̃₁)/√(1+t²) written as (J̃₃−J̃₁)·den/√(den²+num²) to survive den = 0
    let cos2 = |num: f64, den: f64| {
        let r = num.hypot(den);
        if r == 0.0 {
            f64::NAN
        } else {
            den / r
        }
    };
    let lhs = (jtilde[2] - jtilde[0]) * cos2(num1, den1);
    let rhs = (jtilde[3] - jtilde[1]) * cos2(num2, den2);
    let (residual_c2, residual_c2_signed) = if lhs.is_nan() || rhs.is_nan() {
        (0.0, 0.0)
    } else {
        ((lhs.abs() - rhs.abs()).abs(), (lhs - rhs).abs())
    };
    let out = DiagonalizedSpec {
        residual_c1: ((jtilde[2] - jtilde[3]) - (jtilde[1] - jtilde[0])).abs(),
        residual_c2,
        residual_c2_signed,
        residual_c3: (x12 * x34 + x14 * x23).abs(),
        jtilde,
        chitilde: chit,
        t1,
        t2,
        phi,
        phi1,
        s: smat,
    };
    Ok(out)
}

/// SᵀAS for dense row-major n×n.
fn conj_t(n: usize, s: &[f64], a: &[f64]) -> Vec<f64> {
    let mut tmp = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            tmp[i * n + j] = (0..n).map(|k| a[i * n + k] * s[k * n + j]).sum();
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n).map(|k| s[k * n + i] * tmp[k * n + j]).sum();
        }
    }
    out
}

// ---------------------------------------------------------------- charts

/// Number of chart coordinates: 6 for n = 3, n(n−1) otherwise.
pub fn chart_dim(n: usize) -> usize {
    2 * so_dim(n)
}

/// Linear polynomial for entry (i, j) of M (block 0) or Γ (block 1) in the
/// chart of dimension n.
pub fn entry_poly(n: usize, block: usize, i: usize, j: usize) -> Poly {
    if i == j {
        return Poly::zero();
    }
    let off = block * so_dim(n);
    if n == 3 {
        // vector chart: M₁₂ = −v₃, M₁₃ = v₂, M₂₃ = −v₁
        let (a, b, sgn) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let (k, s) = match (a, b) {
            (0, 1) => (2, -1.0),
            (0, 2) => (1, 1.0),
            _ => (0, -1.0),
        };
        return Poly::var(off + k).scale_re(s * sgn);
    }
    if i < j {
        Poly::var(off + pair_index(n, i, j))
    } else {
        Poly::var(off + pair_index(n, j, i)).neg()
    }
}

fn omega_polys(spec: &SystemSpec) -> Vec<Poly> {
    let n = spec.n;
    let mut om = vec![Poly::zero(); n * n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = Poly::zero();
            for k in 0..n {
                let jak = spec.j.get(a, k);
                if jak != 0.0 {
                    acc = acc.add(&entry_poly(n, 0, k, b).scale_re(jak));
                }
                let jkb = spec.j.get(k, b);
                if jkb != 0.0 {
                    acc = acc.add(&entry_poly(n, 0, a, k).scale_re(jkb));
                }
            }
            om[a * n + b] = acc;
        }
    }
    om
}

/// H = ½ Σ_{i<j} M_ij Ω_ij + Σ_{i<j} χ_ij Γ_ij as a chart polynomial.
pub fn energy_poly(spec: &SystemSpec) -> Poly {
    let n = spec.n;
    let om = omega_polys(spec);
    let mut h = Poly::zero();
    for (a, b) in pairs(n) {
        h = h.add(&entry_poly(n, 0, a, b).mul(&om[a * n + b]).scale_re(0.5));
        let c = spec.chi.get(a, b);
        if c != 0.0 {
            h = h.add(&entry_poly(n, 1, a, b).scale_re(c));
        }
    }
    h
}

/// Chart polynomial of the first or second Hamiltonian.
pub fn hamiltonian_poly(spec: &SystemSpec, which: Which) -> Result<Poly> {
    match which {
        Which::HFirst => Ok(energy_poly(spec)),
        Which::HSecond => second_hamiltonian(spec),
    }
}

pub fn hamiltonian(spec: &SystemSpec, state: &PhaseState, which: Which) -> Result<f64> {
    if state.m.dim() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, found: state.m.dim() });
    }
    let p = hamiltonian_poly(spec, which)?;
    Ok(p.eval_real(&state.chart_coords()))
}

fn second_hamiltonian(spec: &SystemSpec) -> Result<Poly> {
    let n = spec.n;
    let tol = 1e-12;
    let m = |i: usize, j: usize| entry_poly(n, 0, i - 1, j - 1);
    let g = |i: usize, j: usize| entry_poly(n, 1, i - 1, j - 1);
    let pairing = {
        let d = so_dim(n);
        (0..d).fold(Poly::zero(), |acc, k| acc.add(&Poly::var(k).mul(&Poly::var(d + k))))
    };
    match spec.kind {
        Kind::LagrangeTop if n == 3 => {
            let op = spec.operator3();
            let chi = unhat(&spec.chi)?;
            let r = [op.get(0, 0) - 1.0, op.get(1, 1) - 1.0, op.get(0, 2), chi[2] - 1.0, chi[0], chi[1]]
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            if r > tol {
                return Err(Error::Unsupported(
                    "3D second Hamiltonian needs the normalization J1 = 1, z0 = 1 (a = J3)".into(),
                ));
            }
            let a = op.get(2, 2);
            let v = |k: usize| Poly::var(k);
            let inner = v(0).mul(&v(0)).add(&v(1).mul(&v(1))).scale_re(0.5).add(&v(5));
            Ok(v(2).mul(&inner).scale_re(a - 1.0).add(&pairing))
        }
        Kind::LagrangeBitop => {
            let a = spec.j1();
            if (spec.j1() + spec.j3() - 1.0).abs() > tol {
                return Err(Error::Unsupported("bitop second Hamiltonian needs J1 + J3 = 1".into()));
            }
            let (c12, c34) = (spec.chi12(), spec.chi34());
            let den = c12 * c12 - c34 * c34;
            if den.abs() <= 1e-9 {
                return Err(Error::Unsupported("bitop second Hamiltonian needs χ12² ≠ χ34²".into()));
            }
            let sq = |p: Poly| p.mul(&p);
            let kin = sq(m(1, 3)).add(&sq(m(1, 4))).add(&sq(m(2, 3))).add(&sq(m(2, 4))).scale_re(0.5);
            let t1 = m(1, 2)
                .scale_re(c12)
                .add(&m(3, 4).scale_re(c34))
                .scale_re((2.0 * a - 1.0) / den)
                .mul(&kin.add(&g(1, 2).scale_re(c12)).add(&g(3, 4).scale_re(c34)));
            let inner2 = m(2, 3)
                .mul(&m(1, 4))
                .sub(&m(1, 3).mul(&m(2, 4)))
                .add(&g(3, 4).scale_re(c12))
                .add(&g(1, 2).scale_re(c34));
            let t2 = m(3, 4).scale_re(c12).add(&m(1, 2).scale_re(c34)).scale_re((1.0 - 2.0 * a) / den).mul(&inner2);
            Ok(t1.add(&t2).add(&pairing))
        }
        Kind::LagrangeTop => {
            let a = spec.j1();
            if (spec.j1() + spec.j3() - 1.0).abs() > tol || (spec.chi12() - 1.0).abs() > tol {
                return Err(Error::Unsupported("n-dimensional second Hamiltonian needs J1 + J3 = 1, χ12 = 1".into()));
            }
            let mut kin = Poly::zero();
            for p in 3..=n {
                kin = kin.add(&m(1, p).mul(&m(1, p))).add(&m(2, p).mul(&m(2, p)));
            }
            let mut h = m(1, 2).mul(&kin.scale_re(0.5).add(&g(1, 2))).scale_re(2.0 * a - 1.0);
            for p in 3..=n {
                for q in p + 1..=n {
                    let inner = m(1, q).mul(&m(2, p)).sub(&m(2, q).mul(&m(1, p))).add(&g(p, q));
                    h = h.add(&m(p, q).mul(&inner).scale_re(1.0 - 2.0 * a));
                }
            }
            Ok(h.add(&pairing))
        }
        _ => Err(Error::Unsupported(format!("no second Hamiltonian for {:?}", spec.kind))),
    }
}

/// Spec of the integrable base system obtained by switching off the
/// Hess-Appel'rot couplings (J₁₃ = J₂₄ = 0).
pub fn base_system(spec: &SystemSpec) -> Result<SystemSpec> {
    let mut p = spec.params.clone();
    match spec.kind {
        Kind::ClassicalHA => {
            let op = spec.operator3();
            if op.is_diagonal(0.0) {
                return Err(Error::Unsupported("base system defined in the Zhukovskii frame only".into()));
            }
            p.insert("J1".into(), op.get(0, 0));
            p.insert("J3".into(), op.get(2, 2));
            p.insert("z0".into(), unhat(&spec.chi)?[2]);
            make_spec(Kind::LagrangeTop, 3, &p)
        }
        Kind::HA4 => {
            p.insert("J1".into(), spec.j1());
            p.insert("J3".into(), spec.j3());
            p.insert("chi12".into(), spec.chi12());
            p.insert("chi34".into(), spec.chi34());
            make_spec(Kind::LagrangeBitop, 4, &p)
        }
        Kind::HAn => {
            p.insert("J1".into(), spec.j1());
            p.insert("J3".into(), spec.j3());
            p.insert("chi12".into(), spec.chi12());
            make_spec(Kind::LagrangeTop, spec.n, &p)
        }
        _ => Err(Error::Unsupported(format!("{:?} is not a Hess-Appel'rot kind", spec.kind))),
    }
}
