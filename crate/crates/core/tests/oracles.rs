//! Independent numerical oracles for the Green's function and the exact channel.

use hmimo_core::channel::{ca1_pair_channel, exact_pair_channel};
use hmimo_core::em::C3;
use hmimo_core::*;
use nalgebra::Vector3;
use num_complex::Complex64;
use std::f64::consts::PI;

fn em() -> EmConstants {
    EmConstants::from_frequency(30e9).unwrap()
}

/// `g(r0 + δ)/g(r0) − 1`, formed without cancellation: the distance
/// increment as `(2 r0·δ + δ·δ)/(|r0 + δ| + |r0|)` and `e^{iθ} − 1` as
/// `−2 sin²(θ/2) + i sin θ`.
fn g_ratio_minus_one(r0: &Vec3, delta: &Vec3, k0: f64) -> Complex64 {
    let (n0, n) = (r0.norm(), (r0 + delta).norm());
    let dr = (2.0 * r0.dot(delta) + delta.dot(delta)) / (n + n0);
    let theta = k0 * dr;
    let half = (0.5 * theta).sin();
    let expm1 = Complex64::new(-2.0 * half * half, theta.sin());
    let q = n0 / n;
    expm1 * q - dr / n
}

/// `(I + ∇∇/k²) g` with the Hessian from second-order central differences.
/// Stencil weights sum to zero, so `Σ c_i g_i = g(r0) Σ c_i (g_i/g(r0) − 1)`.
fn dyadic_by_differences(r: &Vec3, k0: f64, h: f64) -> C3 {
    let e = [Vector3::x(), Vector3::y(), Vector3::z()];
    let eps = |d: Vec3| g_ratio_minus_one(r, &d, k0);
    let mut hess = C3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            hess[(i, j)] = if i == j {
                (eps(e[i] * h) + eps(-e[i] * h)) / (h * h)
            } else {
                let f = |a: f64, b: f64| eps(e[i] * (a * h) + e[j] * (b * h));
                (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / (4.0 * h * h)
            };
        }
    }
    let g0 = scalar_green(r, &Vector3::zeros(), k0).unwrap();
    (C3::identity() + hess / Complex64::from(k0 * k0)) * g0
}

#[test]
fn dyadic_matches_finite_differences() {
    let k = em();
    let lam = k.wavelength;
    for r in [
        Vector3::new(1.0, 0.0, 0.0) * lam,
        Vector3::new(0.0, 0.0, 0.5) * lam,
        Vector3::new(0.3, -0.4, 0.5) * lam,
        Vector3::new(2.0, 1.0, -3.0) * lam,
        Vector3::new(-1.0, 4.0, 3.0) * lam,
    ] {
        let g = dyadic_green(&r, &Vector3::zeros(), k.wavenumber).unwrap();
        let fd = dyadic_by_differences(&r, k.wavenumber, 1e-6 * lam);
        let err = (g - fd).norm() / g.norm();
        assert!(err < 1e-5, "r = {r:?}: {err}");
    }
}

#[test]
fn first_order_distance_is_second_order_accurate() {
    let r_bar = Vector3::new(0.3, -0.2, 1.0);
    let dm = Vector3::new(0.02, 0.01, -0.015);
    let dn = Vector3::new(-0.01, 0.03, 0.005);
    let err = |t: f64| {
        let exact = (r_bar + (dm - dn) * t).norm();
        (first_order_distance(&r_bar, &(dm * t), &(dn * t)).unwrap() - exact).abs()
    };
    for t in [1.0, 0.5, 0.25, 0.125] {
        let order = (err(t) / err(t / 2.0)).log2();
        assert!(order >= 1.9, "t = {t}: order {order}");
    }
}

/// Midpoint rule in all four coordinates with one Richardson step.
fn midpoint_oracle(tx: &ElementFrame, rx: &ElementFrame, k: &EmConstants, n: usize) -> C3 {
    let rule = |f: &ElementFrame, n: usize| -> Vec<Vec3> {
        let (hh, hv) = (f.len_h / n as f64, f.len_v / n as f64);
        let mut pts = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let x = -0.5 * f.len_h + (a as f64 + 0.5) * hh;
                let y = -0.5 * f.len_v + (b as f64 + 0.5) * hv;
                pts.push(f.point(x, y));
            }
        }
        pts
    };
    let sum = |n: usize| {
        let (pt, pr) = (rule(tx, n), rule(rx, n));
        let mut acc = C3::zeros();
        for m in &pr {
            for s in &pt {
                acc += dyadic_green(m, s, k.wavenumber).unwrap();
            }
        }
        let w = tx.area() * rx.area() / (n * n * n * n) as f64;
        acc * (k.channel_prefactor() * w)
    };
    let coarse = sum(n);
    let fine = sum(2 * n);
    (fine * Complex64::from(4.0) - coarse) / Complex64::from(3.0)
}

#[test]
fn exact_pair_matches_brute_force_midpoint() {
    let k = em();
    let lam = k.wavelength;
    let tx = ElementFrame {
        center: Vector3::zeros(),
        dir_h: Vector3::x(),
        dir_v: Vector3::y(),
        len_h: 0.2 * lam,
        len_v: 0.15 * lam,
    };
    let c = (PI / 5.0).cos();
    let s = (PI / 5.0).sin();
    let rx = ElementFrame {
        center: Vector3::new(0.1, 0.2, 0.6) * lam,
        dir_h: Vector3::new(c, 0.0, s),
        dir_v: Vector3::y(),
        len_h: 0.1 * lam,
        len_v: 0.2 * lam,
    };
    let exact = exact_pair_channel(&tx, &rx, &k, &QuadratureSpec::default()).unwrap();
    let oracle = midpoint_oracle(&tx, &rx, &k, 24);
    let err = (exact.matrix - oracle).norm() / oracle.norm();
    assert!(err < 1e-6, "{err}");
}

#[test]
fn small_elements_approach_point_source_limit() {
    let k = em();
    let lam = k.wavelength;
    let frame = |center: Vec3, l: f64| ElementFrame {
        center,
        dir_h: Vector3::x(),
        dir_v: Vector3::y(),
        len_h: l,
        len_v: l,
    };
    let r = Vector3::new(0.4, -0.3, 1.2) * lam;
    let point = dyadic_green(&r, &Vector3::zeros(), k.wavenumber).unwrap() * k.channel_prefactor();
    let mut errs = Vec::new();
    let mut ca1_errs = Vec::new();
    for l in [0.2, 0.1, 0.05, 0.025].map(|x| x * lam) {
        let (tx, rx) = (frame(Vector3::zeros(), l), frame(r, l));
        let e = exact_pair_channel(&tx, &rx, &k, &QuadratureSpec::default()).unwrap();
        let per_area = e.matrix / Complex64::from(tx.area() * rx.area());
        errs.push((per_area - point).norm() / point.norm());
        let ca1 = ca1_pair_channel(&tx, &rx, &k).unwrap();
        ca1_errs.push((ca1.matrix - e.matrix).norm() / e.matrix.norm());
    }
    for w in errs.windows(2).chain(ca1_errs.windows(2)) {
        assert!(w[0] / w[1] > 3.5, "{errs:?} {ca1_errs:?}");
    }
}

#[test]
fn ca2_gap_grows_with_spacing() {
    let base = Scenario::reference(30e9)
        .unwrap()
        .with_tx_counts(3, 3)
        .with_rx_counts(2, 2);
    let lam = base.em.wavelength;
    let spacings = [0.01, 0.05, 0.1, 0.2, 0.5].map(|s| s * lam);
    let r = sweep_spacing(&base, &spacings, &[90.0]).unwrap();
    let ca2: Vec<f64> = r.points.iter().map(|p| p.mse_ca2.unwrap()).collect();
    assert!(ca2.windows(2).all(|w| w[0] < w[1]), "{ca2:?}");
    assert!(r.points.iter().all(|p| p.mse_ca1.unwrap() < p.mse_ca2.unwrap()));
}
