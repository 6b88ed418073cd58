//! Envelope-function eigenstates on a [`PotentialGrid`].
//!
//! The grid is collapsed into runs of cells with equal potential and mass.
//! Inside a run the solution of −C(ψ′/m)′ + Vψ = Eψ is a pair of exponentials
//! or trigonometric functions, so the state (ψ, ψ′/m) is carried across each
//! run by an exact 2×2 transfer matrix. Continuity of ψ and ψ′/m at the run
//! boundaries is the BenDaniel–Duke condition. The first and last runs are
//! treated as semi-infinite.
//!
//! Bound states are the zeros of the right-edge matching function for the
//! solution that decays to the left. Energies are bracketed on a scan grid,
//! with a Sturm node count guarding against two roots in one scan step, then
//! bisected. Quasi-bound states of structures with a lowered right side show
//! up as Breit–Wigner jumps of the scattering phase, which is sampled
//! adaptively and fitted.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{breit_wigner_phase, levenberg_marquardt, FitOptions};
use crate::heterostructure::PotentialGrid;
use crate::quadrature::trapz_product;
use crate::units::HBAR2_OVER_2ME;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    /// meV
    pub energy: f64,
    /// Sampled on the grid cells, nm^(−1/2), ∫ψ² dz = 1.
    pub envelope: Vec<f64>,
    pub node_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceQuality {
    Good,
    /// Another resonance lies within a few widths; the single-line fit is
    /// biased.
    Overlapping,
    /// Relative width uncertainty from the fit residual exceeds the target.
    PoorFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resonance {
    /// meV
    pub energy: f64,
    /// Full width Γ, meV.
    pub width: f64,
    /// Standard error of Γ from the fit residual, relative to Γ.
    pub width_uncertainty: f64,
    pub quality: ResonanceQuality,
    /// Normalized over the structure interior and zero in the open region.
    pub envelope: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundOptions {
    /// Bracketing scan step, meV.
    pub scan_step: f64,
    /// Energy tolerance, meV.
    pub tolerance: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            scan_step: 0.01,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ResonanceOptions {
    /// Coarse phase scan step, meV.
    pub scan_step: f64,
    /// Largest phase change allowed between neighbouring samples, rad.
    pub max_phase_step: f64,
    /// Features broader than this are treated as background, meV.
    pub max_width: f64,
    /// Accepted relative width uncertainty.
    pub max_width_uncertainty: f64,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self {
            scan_step: 0.01,
            max_phase_step: 0.2,
            max_width: 20.0,
            max_width_uncertainty: 0.05,
        }
    }
}

/// A run of grid cells with constant potential and mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Slice {
    pub potential: f64,
    pub mass: f64,
    pub first_cell: usize,
    pub cells: usize,
    /// z of the left edge, nm.
    pub z_start: f64,
    pub width: f64,
}

pub(crate) fn slices(grid: &PotentialGrid) -> Vec<Slice> {
    let mut out: Vec<Slice> = Vec::new();
    for i in 0..grid.len() {
        let (v, m) = (grid.potential[i], grid.mass[i]);
        match out.last_mut() {
            Some(s) if s.potential == v && s.mass == m => {
                s.cells += 1;
                s.width += grid.dz;
            }
            _ => out.push(Slice {
                potential: v,
                mass: m,
                first_cell: i,
                cells: 1,
                z_start: grid.z[i] - 0.5 * grid.dz,
                width: grid.dz,
            }),
        }
    }
    // Recompute widths from cell counts to avoid accumulated rounding.
    for s in &mut out {
        s.width = s.cells as f64 * grid.dz;
    }
    out
}

/// m(E − V)/C, the squared local wavenumber (negative when evanescent).
fn wavenumber_sq(energy: f64, s: &Slice) -> f64 {
    s.mass * (energy - s.potential) / HBAR2_OVER_2ME
}

#[derive(Debug, Clone, Copy)]
struct State {
    psi: f64,
    /// ψ′/m
    phi: f64,
}

/// Exact propagation of (ψ, ψ′/m) over a distance `x` inside one run.
fn propagate(st: State, q2: f64, mass: f64, x: f64) -> State {
    if q2 > 0.0 {
        let k = q2.sqrt();
        let (s, c) = (k * x).sin_cos();
        State {
            psi: st.psi * c + st.phi * mass * s / k,
            phi: -st.psi * k * s / mass + st.phi * c,
        }
    } else if q2 < 0.0 {
        let kappa = (-q2).sqrt();
        let (s, c) = ((kappa * x).sinh(), (kappa * x).cosh());
        State {
            psi: st.psi * c + st.phi * mass * s / kappa,
            phi: st.psi * kappa * s / mass + st.phi * c,
        }
    } else {
        State {
            psi: st.psi + st.phi * mass * x,
            phi: st.phi,
        }
    }
}

/// Zeros of ψ in (0, d] for the run solution starting from `st`.
fn zeros_in_run(st: State, q2: f64, mass: f64, d: f64) -> usize {
    if q2 > 0.0 {
        let k = q2.sqrt();
        let theta = (st.phi * mass / k).atan2(st.psi);
        let u0 = -theta - FRAC_PI_2;
        let u1 = k * d - theta - FRAC_PI_2;
        ((u1 / PI).floor() - (u0 / PI).floor()).max(0.0) as usize
    } else if q2 < 0.0 {
        let kappa = (-q2).sqrt();
        let b = st.phi * mass / kappa;
        if b == 0.0 {
            return 0;
        }
        let t = -st.psi / b;
        usize::from(t > 0.0 && t <= (kappa * d).tanh())
    } else {
        let slope = st.phi * mass;
        if slope == 0.0 {
            return 0;
        }
        let x = -st.psi / slope;
        usize::from(x > 0.0 && x <= d)
    }
}

fn normalize(st: State) -> State {
    let scale = st.psi.abs().max(st.phi.abs());
    if scale > 0.0 && scale.is_finite() {
        State {
            psi: st.psi / scale,
            phi: st.phi / scale,
        }
    } else {
        st
    }
}

/// Solution decaying into the left run, carried to the right edge of the
/// interior. Returns the normalized end state and the interior node count.
fn shoot(runs: &[Slice], energy: f64) -> (State, usize) {
    let left = &runs[0];
    let kappa = (-wavenumber_sq(energy, left)).max(0.0).sqrt();
    let mut st = State {
        psi: 1.0,
        phi: kappa / left.mass,
    };
    let mut nodes = 0;
    if runs.len() > 2 {
        for s in &runs[1..runs.len() - 1] {
            let q2 = wavenumber_sq(energy, s);
            nodes += zeros_in_run(st, q2, s.mass, s.width);
            st = normalize(propagate(st, q2, s.mass, s.width));
        }
    }
    (st, nodes)
}

/// Matching function and Sturm count (number of bound states below `energy`).
fn bound_match(runs: &[Slice], energy: f64) -> (f64, usize) {
    let (st, nodes) = shoot(runs, energy);
    let right = runs.last().expect("non-empty");
    let kappa = (-wavenumber_sq(energy, right)).max(0.0).sqrt();
    let f = st.phi + kappa / right.mass * st.psi;
    (f, nodes + usize::from(st.psi * f < 0.0))
}

/// Scattering phase δ with ψ ∝ sin(k(z − z_R) + δ) in the open right run.
fn phase_at(runs: &[Slice], energy: f64) -> f64 {
    let (st, _) = shoot(runs, energy);
    let right = runs.last().expect("non-empty");
    let k = wavenumber_sq(energy, right).max(0.0).sqrt();
    (k * st.psi).atan2(right.mass * st.phi)
}

/// Public access to the matching function, mainly for diagnostics.
pub fn matching_function(grid: &PotentialGrid, energy: f64) -> f64 {
    bound_match(&slices(grid), energy).0
}

/// Number of bound states strictly below `energy` (oscillation theorem).
pub fn states_below(grid: &PotentialGrid, energy: f64) -> usize {
    bound_match(&slices(grid), energy).1
}

/// Scattering phase (rad, wrapped to (−π, π]) for a grid open on the right.
pub fn phase_shift(grid: &PotentialGrid, energy: f64) -> f64 {
    phase_at(&slices(grid), energy)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tail {
    /// Decaying exponential into the last run.
    Decaying,
    /// Open side: the envelope is cut at the start of the last run.
    Truncated,
}

/// Left-decaying solution at `energy` sampled on every cell, unnormalized.
fn raw_envelope(grid: &PotentialGrid, runs: &[Slice], energy: f64, tail: Tail) -> Vec<f64> {
    let mut psi = vec![0.0; grid.len()];
    let left = &runs[0];
    let kappa_l = (-wavenumber_sq(energy, left)).max(0.0).sqrt();
    let interior_start = left.z_start + left.width;
    if runs.len() == 1 {
        return psi;
    }
    for i in left.first_cell..left.first_cell + left.cells {
        psi[i] = (kappa_l * (grid.z[i] - interior_start)).exp();
    }
    let mut st = State {
        psi: 1.0,
        phi: kappa_l / left.mass,
    };
    for s in &runs[1..runs.len() - 1] {
        let q2 = wavenumber_sq(energy, s);
        for i in s.first_cell..s.first_cell + s.cells {
            psi[i] = propagate(st, q2, s.mass, grid.z[i] - s.z_start).psi;
        }
        st = propagate(st, q2, s.mass, s.width);
    }
    let right = runs.last().expect("non-empty");
    if tail == Tail::Decaying {
        let kappa_r = (-wavenumber_sq(energy, right)).max(0.0).sqrt();
        for i in right.first_cell..right.first_cell + right.cells {
            psi[i] = st.psi * (-kappa_r * (grid.z[i] - right.z_start)).exp();
        }
    }
    psi
}

fn normalize_envelope(psi: &mut [f64], dz: f64) {
    let norm = trapz_product(psi.len(), dz, |i| psi[i] * psi[i]).sqrt();
    if norm > 0.0 && norm.is_finite() {
        psi.iter_mut().for_each(|p| *p /= norm);
    }
}

/// Sign changes of a sampled envelope, ignoring samples below 10⁻⁹ of the peak.
pub fn count_nodes(envelope: &[f64]) -> usize {
    let peak = envelope.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * peak;
    let mut last_sign = 0.0;
    let mut nodes = 0;
    for &v in envelope {
        if v.abs() <= floor {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }
    nodes
}

fn bisect_root(runs: &[Slice], mut a: f64, mut fa: f64, mut b: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let (fm, _) = bound_match(runs, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    // Final secant step inside the bracket.
    let fb = bound_match(runs, b).0;
    if fb != fa && (fa < 0.0) != (fb < 0.0) {
        let root = a - fa * (b - a) / (fb - fa);
        if root.is_finite() && root >= a && root <= b {
            return root;
        }
    }
    0.5 * (a + b)
}

/// Roots inside [a, b], which holds `count_b − count_a` eigenvalues.
#[allow(clippy::too_many_arguments)]
fn isolate(
    runs: &[Slice],
    a: f64,
    (fa, ca): (f64, usize),
    b: f64,
    (fb, cb): (f64, usize),
    tol: f64,
    depth: usize,
    roots: &mut Vec<f64>,
) {
    let inside = cb.saturating_sub(ca);
    if inside == 0 {
        return;
    }
    if fa == 0.0 {
        roots.push(a);
        return;
    }
    if inside == 1 && (fa < 0.0) != (fb < 0.0) {
        roots.push(bisect_root(runs, a, fa, b, tol));
        return;
    }
    if depth > 60 || b - a <= tol {
        roots.extend(std::iter::repeat(0.5 * (a + b)).take(inside));
        return;
    }
    let mid = 0.5 * (a + b);
    let m = bound_match(runs, mid);
    isolate(runs, a, (fa, ca), mid, m, tol, depth + 1, roots);
    isolate(runs, mid, m, b, (fb, cb), tol, depth + 1, roots);
}

fn scan_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    pts.push(hi);
    pts
}

/// All bound states with energies in the window, in ascending order.
pub fn solve_bound(
    grid: &PotentialGrid,
    window: EnergyWindow,
    options: &BoundOptions,
) -> Result<Vec<BoundState>> {
    if !(window.lo < window.hi) {
        return Err(Error::Config(format!(
            "empty energy window {}..{} meV",
            window.lo, window.hi
        )));
    }
    if !(options.scan_step > 0.0 && options.tolerance > 0.0) {
        return Err(Error::Config("scan step and tolerance must be positive".into()));
    }
    let runs = slices(grid);
    let edge = runs[0].potential.min(runs[runs.len() - 1].potential);
    if window.hi >= edge {
        return Err(Error::WindowAtEdge {
            lo: window.lo,
            hi: window.hi,
            edge,
        });
    }
    let lo = window.lo.max(grid.min_potential());
    if lo >= window.hi {
        return Ok(Vec::new());
    }
    let points = scan_points(lo, window.hi, options.scan_step);
    let values: Vec<(f64, usize)> = points.par_iter().map(|&e| bound_match(&runs, e)).collect();

    // The internal bracket is tighter than the reported tolerance so the final
    // secant step lands well inside it.
    let tol = options.tolerance * 1e-3;
    let mut energies = Vec::new();
    for i in 0..points.len() - 1 {
        isolate(
            &runs,
            points[i],
            values[i],
            points[i + 1],
            values[i + 1],
            tol,
            0,
            &mut energies,
        );
    }
    if values[0].0 == 0.0 {
        energies.insert(0, points[0]);
    }

    Ok(energies
        .into_par_iter()
        .map(|energy| {
            let mut envelope = raw_envelope(grid, &runs, energy, Tail::Decaying);
            normalize_envelope(&mut envelope, grid.dz);
            let node_count = count_nodes(&envelope);
            BoundState {
                energy,
                envelope,
                node_count,
            }
        })
        .collect())
}

fn wrap(d: f64) -> f64 {
    let mut x = d % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

fn refine_phase(
    runs: &[Slice],
    a: (f64, f64),
    b: (f64, f64),
    options: &ResonanceOptions,
    depth: usize,
    out: &mut Vec<(f64, f64)>,
) {
    let d = wrap(b.1 - a.1);
    if d.abs() > options.max_phase_step && depth < 60 && b.0 - a.0 > 1e-12 * b.0.abs().max(1.0) {
        let mid_e = 0.5 * (a.0 + b.0);
        let mid = (mid_e, phase_at(runs, mid_e));
        refine_phase(runs, a, mid, options, depth + 1, out);
        refine_phase(runs, mid, b, options, depth + 1, out);
    } else {
        out.push(b);
    }
}

/// Unwrapped phase sampled finely enough that neighbours differ by at most
/// `max_phase_step`.
fn sample_phase(runs: &[Slice], lo: f64, hi: f64, options: &ResonanceOptions) -> Vec<(f64, f64)> {
    let coarse: Vec<(f64, f64)> = scan_points(lo, hi, options.scan_step)
        .into_par_iter()
        .map(|e| (e, phase_at(runs, e)))
        .collect();
    let pieces: Vec<Vec<(f64, f64)>> = coarse
        .par_windows(2)
        .map(|w| {
            let mut out = Vec::new();
            refine_phase(runs, w[0], w[1], options, 0, &mut out);
            out
        })
        .collect();
    let mut raw = vec![coarse[0]];
    raw.extend(pieces.into_iter().flatten());
    let mut unwrapped = Vec::with_capacity(raw.len());
    let mut acc = raw[0].1;
    unwrapped.push((raw[0].0, acc));
    for w in raw.windows(2) {
        acc += wrap(w[1].1 - w[0].1);
        unwrapped.push((w[1].0, acc));
    }
    unwrapped
}

fn unwrap_series(energies: &[f64], runs: &[Slice]) -> Vec<f64> {
    let raw: Vec<f64> = energies.par_iter().map(|&e| phase_at(runs, e)).collect();
    let mut out = Vec::with_capacity(raw.len());
    let mut acc = raw[0];
    out.push(acc);
    for w in raw.windows(2) {
        acc += wrap(w[1] - w[0]);
        out.push(acc);
    }
    out
}

struct Candidate {
    energy: f64,
    width: f64,
}

fn fit_candidate(
    runs: &[Slice],
    c: &Candidate,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64, f64)> {
    let mut center = c.energy;
    let mut width = c.width;
    let mut result = (center, width, f64::INFINITY);
    for _ in 0..2 {
        let a = (center - 6.0 * width).max(lo);
        let b = (center + 6.0 * width).min(hi);
        let n = 161;
        let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        let ys = unwrap_series(&xs, runs);
        let mid_phase = ys[n / 2];
        let fit = levenberg_marquardt(
            &xs,
            &ys,
            &[center, width, mid_phase, 0.0],
            |x, p| breit_wigner_phase(x, p, center),
            FitOptions::default(),
        )?;
        let w = fit.params[1].abs();
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Numerical(format!(
                "Breit–Wigner fit near {center} meV gave width {w}"
            )));
        }
        result = (fit.params[0], w, fit.std_error(1) / w);
        center = fit.params[0];
        width = w;
    }
    Ok(result)
}

/// Quasi-bound states of a structure whose right side is lowered.
pub fn solve_resonances(
    grid: &PotentialGrid,
    window: EnergyWindow,
    options: &ResonanceOptions,
) -> Result<Vec<Resonance>> {
    if !(window.lo < window.hi) {
        return Err(Error::Config(format!(
            "empty energy window {}..{} meV",
            window.lo, window.hi
        )));
    }
    let runs = slices(grid);
    if runs.len() < 3 {
        return Err(Error::Config("resonances need an interior between the outer runs".into()));
    }
    let floor = runs[runs.len() - 1].potential;
    let left_edge = runs[0].potential;
    if !(floor < left_edge) {
        return Err(Error::Config(format!(
            "right side ({floor} meV) is not open relative to the left edge ({left_edge} meV)"
        )));
    }
    if window.lo <= floor {
        return Err(Error::Config(format!(
            "resonance window must lie above the open-side floor {floor} meV"
        )));
    }
    if window.hi >= left_edge {
        return Err(Error::WindowAtEdge {
            lo: window.lo,
            hi: window.hi,
            edge: left_edge,
        });
    }

    let samples = sample_phase(&runs, window.lo, window.hi, options);
    let slopes: Vec<(f64, f64)> = samples
        .windows(2)
        .map(|w| (0.5 * (w[0].0 + w[1].0), (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
        .collect();
    let threshold = 2.0 / options.max_width;
    let phase_at_energy = |e: f64| -> f64 {
        let idx = samples.partition_point(|s| s.0 < e).min(samples.len() - 1);
        samples[idx].1
    };

    let mut candidates: Vec<Candidate> = Vec::new();
    for i in 0..slopes.len() {
        let s = slopes[i].1;
        if s <= threshold {
            continue;
        }
        let left_ok = i == 0 || slopes[i - 1].1 < s;
        let right_ok = i + 1 == slopes.len() || slopes[i + 1].1 <= s;
        if !(left_ok && right_ok) || i == 0 || i + 1 == slopes.len() {
            continue;
        }
        let width = 2.0 / s;
        let energy = slopes[i].0;
        let rise = phase_at_energy(energy + 3.0 * width) - phase_at_energy(energy - 3.0 * width);
        if rise < FRAC_PI_2 {
            continue;
        }
        if candidates
            .last()
            .is_some_and(|c: &Candidate| (energy - c.energy).abs() < 0.5 * c.width.min(width))
        {
            continue;
        }
        candidates.push(Candidate { energy, width });
    }

    let fitted: Vec<(f64, f64, f64)> = candidates
        .par_iter()
        .map(|c| fit_candidate(&runs, c, window.lo, window.hi))
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(fitted.len());
    for (i, &(energy, width, unc)) in fitted.iter().enumerate() {
        if !(energy > window.lo && energy < window.hi) || width > options.max_width {
            continue;
        }
        let overlapping = fitted.iter().enumerate().any(|(j, &(e2, w2, _))| {
            j != i && (energy - e2).abs() < 3.0 * (width + w2)
        });
        let quality = if overlapping {
            ResonanceQuality::Overlapping
        } else if unc > options.max_width_uncertainty {
            ResonanceQuality::PoorFit
        } else {
            ResonanceQuality::Good
        };
        let mut envelope = raw_envelope(grid, &runs, energy, Tail::Truncated);
        normalize_envelope(&mut envelope, grid.dz);
        out.push(Resonance {
            energy,
            width,
            width_uncertainty: unc,
            quality,
            envelope,
        });
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

/// Even (+1), odd (−1) or mixed (0) about the grid centre, to `tol` in
/// relative L² norm.
pub fn parity(envelope: &[f64], tol: f64) -> i8 {
    let norm: f64 = envelope.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0;
    }
    let n = envelope.len();
    let diff = |sign: f64| -> f64 {
        (0..n)
            .map(|i| (envelope[i] - sign * envelope[n - 1 - i]).powi(2))
            .sum::<f64>()
            .sqrt()
            / norm
    };
    if diff(1.0) < tol {
        1
    } else if diff(-1.0) < tol {
        -1
    } else {
        0
    }
}
