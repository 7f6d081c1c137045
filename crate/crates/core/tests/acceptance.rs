//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use hesslab::dynamics::{integrate, prop8c_check, IntegratorConfig};
use hesslab::kowalevski::examples::{case1_6d, case8_5d, example1_4d, example2_4d, hess_appelrot_3d};
use hesslab::kowalevski::{theorem5_filter, GermModel};
use hesslab::lax::{build, lax_residual, spectral_coeffs};
use hesslab::models::{make_spec, Kind, Params};
use hesslab::numeric::{c, horner, poly_roots};
use hesslab::poisson::{poisson_suite, restrictive_suite};
use hesslab::poly::Poly;
use hesslab::spectral::{curve_gamma1, double_points, generic_curve_state, quadrature_check, reduction_crosscheck, CurveData};
use hesslab::{sample, SystemSpec};
use num_complex::Complex64;

type Outcome = Result<(bool, String), String>;

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn ha4(j13: f64, j24: f64) -> SystemSpec {
    make_spec(Kind::HA4, 4, &params(&[("J1", 1.0), ("J3", 3.0), ("J13", j13), ("J24", j24), ("chi12", 1.0), ("chi34", 2.0)]))
        .unwrap()
}

fn within(limit: Option<Duration>, t: Duration) -> bool {
    limit.is_none_or(|l| t <= l)
}

fn c1() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for j13 in [1.0, 3.0] {
        let r = hess_appelrot_3d(j13, 42).map_err(|e| e.to_string())?;
        ok &= r.pass;
        worst = worst.max(r.max_error);
    }
    Ok((ok, format!("max exponent error {worst:.1e}")))
}

fn c2() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for (a, b) in [(0.7, 0.2), (1.5, -0.4), (-0.3, 0.9)] {
        let r = example2_4d(a, b, 42).map_err(|e| e.to_string())?;
        ok &= r.pass;
        worst = worst.max(r.max_error);
    }
    Ok((ok, format!("3 samples, max exponent error {worst:.1e}")))
}

fn c3() -> Outcome {
    let mut ok = true;
    let mut info = Vec::new();
    for d2 in [0.0, 1.0] {
        let r = example1_4d(0.4, d2, 42).map_err(|e| e.to_string())?;
        ok &= r.pass;
        let split = r.ara.first().map(|a| format!("{}/{}", a.tangent.len(), a.transversal.len())).unwrap_or("-".into());
        info.push(format!("d2={d2}: err {:.1e}, tangent/transversal {split}", r.max_error));
    }
    Ok((ok, info.join("; ")))
}

fn c4() -> Outcome {
    let r5 = case8_5d().map_err(|e| e.to_string())?;
    let mut ok = r5.pass;
    let mut worst = r5.max_error;
    for j13 in [1.0, 2.0, 3.0] {
        let r = case1_6d(j13).map_err(|e| e.to_string())?;
        ok &= r.pass;
        worst = worst.max(r.max_error);
    }
    Ok((ok, format!("5D case 8 and 6D case 1 (J13 = 1, 2, 3), max error {worst:.1e}")))
}

/// Ascending coefficients of Π (w − r).
fn from_roots(roots: &[f64]) -> Vec<Complex64> {
    let mut p = vec![c(1.0, 0.0)];
    for &r in roots {
        let mut q = vec![c(0.0, 0.0); p.len() + 1];
        for (k, &v) in p.iter().enumerate() {
            q[k + 1] += v;
            q[k] -= v * r;
        }
        p = q;
    }
    p
}

fn c5() -> Outcome {
    let model = GermModel::default();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut prop14 = 0.0f64;
    for k in [0.5, 2.0] {
        let v = theorem5_filter(&Poly::parse(&format!("z1 + {k}*z3")).unwrap(), &model, 42).map_err(|e| e.to_string())?;
        ok &= v.pass;
        prop14 = v.branches.iter().filter(|b| b.applicable).fold(prop14, |m, b| m.max(b.pch_minus1));
        notes.push(format!("z1+{k}z3 {}", if v.pass { "passes" } else { "fails" }));
    }
    let v = theorem5_filter(&Poly::parse("-3*z1 + i*z2").unwrap(), &model, 42).map_err(|e| e.to_string())?;
    ok &= !v.pass;
    notes.push(format!("-3z1+iz2 {}", if v.pass { "passes (expected fail)" } else { "fails" }));
    prop14 = v.branches.iter().filter(|b| b.applicable).fold(prop14, |m, b| m.max(b.pch_minus1));
    let b1 = &v.branches[0];
    let want = from_roots(&[0.0, 1.0, 2.0, 3.0, -1.0, -2.0]);
    let d1 = if b1.applicable {
        b1.charpoly.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    ok &= d1 <= 1e-8;
    notes.push(format!("Pch1 coefficient error {d1:.2}"));
    let b3 = &v.branches[2];
    let factor = poly_roots(&[c(9.0, 0.0), c(-2.0, 0.0), c(2.0, 0.0)]);
    let d3 = if b3.applicable {
        let scale = b3.charpoly.iter().fold(1.0f64, |m, v| m.max(v.norm()));
        factor.iter().map(|&r| horner(&b3.charpoly, r).norm() / scale).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    ok &= d3 <= 1e-8;
    notes.push(format!("Pch3 at roots of 2w²−2w+9 {d3:.2}"));
    ok &= prop14 <= 1e-9;
    notes.push(format!("max |Pch(−1)| {prop14:.1e}"));
    Ok((ok, notes.join("; ")))
}

fn named(spec: &SystemSpec, s: &hesslab::PhaseState) -> Vec<(&'static str, f64)> {
    let (l, _) = build(spec, s).unwrap();
    spectral_coeffs(&l).named().to_vec()
}

fn c6() -> Outcome {
    let spec = ha4(0.6, 0.25);
    let mut r = sample::rng(42);
    let s0 = sample::compliant_state(&mut r, &spec);
    let traj = integrate(&spec, &s0, &IntegratorConfig::rkf45(1e-10, 10.0)).map_err(|e| e.to_string())?;
    let first = named(&spec, &s0);
    let mut rel = 0.0f64;
    let mut small = 0.0f64;
    for s in &traj.samples {
        for ((k, v), (_, v0)) in named(&spec, s).into_iter().zip(&first) {
            match k {
                "b" | "g" => small = small.max(v.abs()),
                "c" | "h" | "d" | "e" | "i" | "j" => rel = rel.max((v - v0).abs() / v0.abs().max(1e-12)),
                _ => {}
            }
        }
    }
    let bad = sample::random_state(&mut r, 4);
    let tb = integrate(&spec, &bad, &IntegratorConfig::rkf45(1e-10, 10.0)).map_err(|e| e.to_string())?;
    let b0 = named(&spec, &bad)[1].1;
    let bdrift = tb.samples.iter().map(|s| (named(&spec, s)[1].1 - b0).abs()).fold(0.0, f64::max);
    Ok((
        rel < 1e-7 && small < 1e-9 && bdrift > 1e-3,
        format!("max rel drift {rel:.1e}, max |b|,|g| {small:.1e}, control b drift {bdrift:.1e}"),
    ))
}

fn c7() -> Outcome {
    let ha5 = make_spec(Kind::HAn, 5, &params(&[("J1", 1.0), ("J3", 2.0), ("J13", 0.5), ("J24", 0.3), ("chi12", 1.0)])).unwrap();
    let mut r = sample::rng(42);
    let mut on = 0.0f64;
    let mut off = f64::INFINITY;
    for spec in [ha4(0.6, 0.25), ha5] {
        for _ in 0..100 {
            let mut s = sample::compliant_state(&mut r, &spec);
            on = on.max(lax_residual(&spec, &s).map_err(|e| e.to_string())?);
            s.m.set(0, 1, 1.0);
            off = off.min(lax_residual(&spec, &s).map_err(|e| e.to_string())?);
        }
    }
    Ok((on < 1e-12 && off > 1e-6, format!("compliant max {on:.1e}, with M12 = 1 min {off:.1e}")))
}

fn c8() -> Outcome {
    let claims = poisson_suite(42, 100).map_err(|e| e.to_string())?;
    let failed: Vec<&str> = claims.iter().filter(|c| !c.pass).map(|c| c.claim_id.as_str()).collect();
    Ok((failed.is_empty(), format!("{} claims, failed: {failed:?}", claims.len())))
}

fn c9() -> Outcome {
    let claims = restrictive_suite(42, 100).map_err(|e| e.to_string())?;
    let wanted = |id: &str| ["A1:", "A2:", "prop9:"].iter().any(|p| id.starts_with(p));
    let failed: Vec<String> = claims
        .iter()
        .filter(|c| wanted(&c.claim_id) && !c.pass)
        .map(|c| format!("{} ({:.2e})", c.claim_id, c.max_defect))
        .collect();
    Ok((failed.is_empty(), format!("failed: {failed:?}")))
}

fn c10() -> Outcome {
    let spec = ha4(0.6, 0.25);
    let mut r = sample::rng(42);
    let mut s = sample::compliant_state(&mut r, &spec);
    // unit Γ halves keep the reduced quadratures well scaled
    let mut y = hesslab::spectral::reduced_vector(&s).map_err(|e| e.to_string())?;
    for k in [1, 3] {
        let n = (y[3 * k].powi(2) + y[3 * k + 1].powi(2) + y[3 * k + 2].powi(2)).sqrt();
        for a in 0..3 {
            y[3 * k + a] /= n;
        }
    }
    s = hesslab::spectral::state_from_reduced(&y, 0.0);
    let cross = reduction_crosscheck(&spec, &s, &IntegratorConfig::rk4(1e-3, 5.0)).map_err(|e| e.to_string())?;
    let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 5.0)).map_err(|e| e.to_string())?;
    let quad = quadrature_check(&spec, &traj).map_err(|e| e.to_string())?.max();
    let mut curves_ok = true;
    for _ in 0..5 {
        let g = generic_curve_state(&spec, &mut r).map_err(|e| e.to_string())?;
        let cd = CurveData::of_state(&spec, &g).map_err(|e| e.to_string())?;
        let dp = double_points(&cd).map_err(|e| e.to_string())?;
        curves_ok &= curve_gamma1(&cd).map_err(|e| e.to_string())?.genus == 3
            && dp.lambdas.len() == 4
            && dp.all_simple
            && dp.normalization_genus == 5;
    }
    Ok((
        cross < 1e-8 && quad < 1e-6 && curves_ok,
        format!("flow difference {cross:.1e}, quadrature residual {quad:.1e}, curves (genus 3, 4 double points, normalization 5) {curves_ok}"),
    ))
}

fn c11() -> Outcome {
    let spec = ha4(0.6, 0.25);
    let mut r = sample::rng(42);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let s = sample::compliant_state(&mut r, &spec);
        let traj = integrate(&spec, &s, &IntegratorConfig::rk4(1e-3, 5.0)).map_err(|e| e.to_string())?;
        worst = worst.max(prop8c_check(&spec, &traj).map_err(|e| e.to_string())?.max());
    }
    Ok((worst < 1e-8, format!("max residual {worst:.1e} on 3 trajectories")))
}

fn main() {
    let criteria: [(&str, Option<u64>, fn() -> Outcome); 11] = [
        ("3D Kowalevski exponents", Some(5), c1),
        ("4D Example 2 case 3 exponents", Some(30), c2),
        ("4D Example 1 exponents and 8/4 split", None, c3),
        ("5D case 8 and 6D case 1 exponents", None, c4),
        ("Theorem 5 filter and Pch checks", None, c5),
        ("Isospectrality along HA4 flow", Some(10), c6),
        ("Lax identity", None, c7),
        ("Poisson suite", None, c8),
        ("Restrictive integrability", None, c9),
        ("Reduction cross-check and curves", None, c10),
        ("Prop 8(c) identity", None, c11),
    ];
    let mut failures = 0;
    for (k, (title, limit, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = run();
        let dt = t0.elapsed();
        let limit = limit.map(Duration::from_secs);
        let (pass, detail) = match out {
            Ok((p, d)) => (p && within(limit, dt), d),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = limit.map(|l| format!(", limit {}s", l.as_secs())).unwrap_or_default();
        println!("{} {:>2} {title}: {detail} [{:.2}s{budget}]", if pass { "PASS" } else { "FAIL" }, k + 1, dt.as_secs_f64());
        failures += usize::from(!pass);
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
