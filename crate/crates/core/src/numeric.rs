//! Small numerical helpers: polynomial roots, eigenvalues, stencils,
//! multiset matching, rational detection.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Eigenvalues of a complex square matrix (Schur form).
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1.0);
    // QR can stall on ±-symmetric spectra (even polynomials); shifting the
    // spectrum off-centre breaks the symmetry
    for shift in [0.0, 0.3125, -0.5625, 1.375] {
        let sigma = c(shift * scale, 0.5 * shift * scale);
        let mut a = m.clone();
        for k in 0..n {
            a[(k, k)] += sigma;
        }
        if let Some(schur) = a.try_schur(f64::EPSILON, 1000 * n) {
            let (_, t) = schur.unpack();
            return (0..n).map(|k| t[(k, k)] - sigma).collect();
        }
    }
    panic!("Schur iteration failed to converge for every shift")
}

/// Roots of Σ coeffs[k] λ^k, via companion-matrix eigenvalues followed by
/// a few Newton polishing steps. Leading zeros are dropped.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1].norm() == 0.0 {
        deg -= 1;
    }
    if deg <= 1 {
        return Vec::new();
    }
    let d = deg - 1;
    let lead = coeffs[d];
    let mut comp = DMatrix::<Complex64>::zeros(d, d);
    for k in 0..d {
        comp[(0, k)] = -coeffs[d - 1 - k] / lead;
        if k + 1 < d {
            comp[(k + 1, k)] = c(1.0, 0.0);
        }
    }
    let mut roots = eigenvalues(&comp);
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner_with_derivative(&coeffs[..deg], *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let next = *r - step;
            if !next.re.is_finite() || !next.im.is_finite() {
                break;
            }
            if horner_with_derivative(&coeffs[..deg], next).0.norm() < p.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    sort_complex(&mut roots);
    roots
}

pub fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * x + a)
}

fn horner_with_derivative(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = c(0.0, 0.0);
    let mut dp = c(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// Sort by (real, imag) with a small tolerance on the real part so that
/// conjugate pairs stay adjacent.
pub fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        if (a.re - b.re).abs() > 1e-9 {
            a.re.total_cmp(&b.re)
        } else {
            a.im.total_cmp(&b.im)
        }
    });
}

/// Group values into clusters of mutual distance ≤ tol (relative to
/// max(1, |z|)); returns (representative, multiplicity).
pub fn cluster(values: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &z in values {
        let scale = z.norm().max(1.0);
        if let Some(e) = out.iter_mut().find(|(r, _)| (*r - z).norm() <= tol * scale) {
            e.1 += 1;
        } else {
            out.push((z, 1));
        }
    }
    out
}

/// Max error of the best greedy matching between two multisets, or None if
/// their sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    // match the most isolated targets first
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[i].re.total_cmp(&a[j].re).then(a[i].im.total_cmp(&a[j].im)));
    for i in order {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, z)| (k, (z - a[i]).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[k] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

/// p/q with q ≤ qmax within tol of x.
pub fn rational_approx(x: f64, qmax: i64, tol: f64) -> Option<(i64, i64)> {
    for q in 1..=qmax {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() <= tol {
            return Some((p as i64, q));
        }
    }
    None
}

pub fn is_rational(z: Complex64, qmax: i64, tol: f64) -> bool {
    z.im.abs() <= tol && rational_approx(z.re, qmax, tol).is_some()
}

pub fn is_integer(z: Complex64, tol: f64) -> bool {
    z.im.abs() <= tol && (z.re - z.re.round()).abs() <= tol
}

/// Derivative at node k of samples (t, y) by differentiating the Lagrange
/// interpolant through the five nearest nodes (nonuniform-safe).
pub fn deriv5(t: &[f64], y: &[f64], k: usize) -> f64 {
    let n = t.len();
    assert!(n >= 5 && k < n);
    let lo = k.saturating_sub(2).min(n - 5);
    let idx: Vec<usize> = (lo..lo + 5).collect();
    let x = t[k];
    let mut d = 0.0;
    for &i in &idx {
        // l_i'(x) = Σ_{m≠i} 1/(t_i−t_m) Π_{l≠i,m} (x−t_l)/(t_i−t_l)
        let mut li = 0.0;
        for &m in &idx {
            if m == i {
                continue;
            }
            let mut prod = 1.0 / (t[i] - t[m]);
            for &l in &idx {
                if l != i && l != m {
                    prod *= (x - t[l]) / (t[i] - t[l]);
                }
            }
            li += prod;
        }
        d += y[i] * li;
    }
    d
}
