//! Reference solutions that share no code with the solver under test.

#![allow(dead_code)]

use num_complex::Complex64;

/// ħ²/(2 m_e), meV·nm², from CODATA SI values rather than the library constant.
pub fn hbar2_over_2me() -> f64 {
    let hbar = 1.054_571_817e-34;
    let me = 9.109_383_701_5e-31;
    let mev = 1.602_176_634e-22;
    hbar * hbar / (2.0 * me) / mev * 1e18
}

/// E₁ of an infinitely deep well of width `l` nm.
pub fn infinite_well_level(n: usize, l: f64, mass: f64) -> f64 {
    let k = n as f64 * std::f64::consts::PI / l;
    hbar2_over_2me() * k * k / mass
}

/// ⟨1|z|2⟩ of the infinite well, −16L/(9π²).
pub fn infinite_well_dipole_12(l: f64) -> f64 {
    -16.0 * l / (9.0 * std::f64::consts::PI.powi(2))
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-14 * m.abs().max(1.0) {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Bound levels of a finite square well (width `l`, depth `v0`, uniform mass)
/// from the even and odd transcendental conditions
/// k·sin(kL/2) = κ·cos(kL/2) and k·cos(kL/2) = −κ·sin(kL/2).
pub fn finite_well_levels(l: f64, v0: f64, mass: f64) -> Vec<f64> {
    let c = hbar2_over_2me();
    let k = |e: f64| (mass * e / c).sqrt();
    let kappa = |e: f64| (mass * (v0 - e) / c).sqrt();
    let even = |e: f64| k(e) * (k(e) * l / 2.0).sin() - kappa(e) * (k(e) * l / 2.0).cos();
    let odd = |e: f64| k(e) * (k(e) * l / 2.0).cos() + kappa(e) * (k(e) * l / 2.0).sin();
    let mut roots = Vec::new();
    let n = 200_000;
    let step = v0 / n as f64;
    for f in [&even as &dyn Fn(f64) -> f64, &odd] {
        let mut prev_e = 1e-12;
        let mut prev = f(prev_e);
        for i in 1..n {
            let e = i as f64 * step;
            let cur = f(e);
            if (cur < 0.0) != (prev < 0.0) {
                roots.push(bisect(&|x| f(x), prev_e, e));
            }
            prev_e = e;
            prev = cur;
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}

/// A piecewise-constant profile described by regions (potential, mass, width).
/// The first and last entries are semi-infinite; their widths are ignored.
#[derive(Debug, Clone)]
pub struct Region {
    pub potential: f64,
    pub mass: f64,
    pub width: f64,
}

/// Collapse sampled cells into regions of equal (V, m).
pub fn regions_from_cells(potential: &[f64], mass: &[f64], dz: f64) -> Vec<Region> {
    let mut out: Vec<Region> = Vec::new();
    for (&v, &m) in potential.iter().zip(mass) {
        match out.last_mut() {
            Some(r) if r.potential == v && r.mass == m => r.width += dz,
            _ => out.push(Region {
                potential: v,
                mass: m,
                width: dz,
            }),
        }
    }
    out
}

/// Incoming-wave amplitude in the open right region for the solution that
/// decays into the closed left region, at complex energy `e`. Written in the
/// plane-wave amplitude basis; its zeros are the S-matrix poles.
pub fn incoming_amplitude(regions: &[Region], e: Complex64) -> Complex64 {
    let c = hbar2_over_2me();
    let i = Complex64::i();
    let first = &regions[0];
    let kappa_l = ((first.potential - e) * first.mass / c).sqrt();
    // ψ = e^{κx} at the first interface: value 1, ψ'/m = κ/m.
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = kappa_l / first.mass;
    for r in &regions[1..regions.len() - 1] {
        let k = ((e - r.potential) * r.mass / c).sqrt();
        let a = 0.5 * (p + q * r.mass / (i * k));
        let b = 0.5 * (p - q * r.mass / (i * k));
        let ep = (i * k * r.width).exp();
        let em = (-i * k * r.width).exp();
        p = a * ep + b * em;
        q = i * k / r.mass * (a * ep - b * em);
    }
    let last = regions.last().unwrap();
    let k = ((e - last.potential) * last.mass / c).sqrt();
    0.5 * (p - q * last.mass / (i * k))
}

/// Complex poles E_r − iΓ/2 found from the real-axis minima of the incoming
/// amplitude, refined by Newton iteration. Returns (E_r, Γ) pairs.
pub fn pole_scan(regions: &[Region], lo: f64, hi: f64, step: f64) -> Vec<(f64, f64)> {
    let n = ((hi - lo) / step).ceil() as usize;
    let mags: Vec<f64> = (0..=n)
        .map(|j| incoming_amplitude(regions, Complex64::new(lo + j as f64 * step, 0.0)).norm())
        .collect();
    let mut poles: Vec<(f64, f64)> = Vec::new();
    for j in 1..n {
        if !(mags[j] < mags[j - 1] && mags[j] <= mags[j + 1]) {
            continue;
        }
        let mut e = Complex64::new(lo + j as f64 * step, -step);
        let mut converged = false;
        for _ in 0..100 {
            let g = incoming_amplitude(regions, e);
            let h = Complex64::new(1e-6 * step.max(1e-3), 0.0);
            let dg = (incoming_amplitude(regions, e + h) - incoming_amplitude(regions, e - h)) / (2.0 * h);
            let delta = g / dg;
            e -= delta;
            if delta.norm() < 1e-12 * e.norm().max(1.0) {
                converged = true;
                break;
            }
        }
        if converged && e.im < 0.0 && e.re > lo && e.re < hi {
            let gamma = -2.0 * e.im;
            if !poles.iter().any(|&(er, _)| (er - e.re).abs() < 1e-6) {
                poles.push((e.re, gamma));
            }
        }
    }
    poles.sort_by(|a, b| a.0.total_cmp(&b.0));
    poles
}
