//! Grid quadrature and adaptive Gauss–Kronrod integration.

use crate::error::{Error, Result};

/// Trapezoidal rule over uniformly spaced samples.
pub fn trapz(values: &[f64], dx: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dx * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

/// Trapezoidal rule applied to a pointwise product without allocating.
pub fn trapz_product<F>(n: usize, dx: f64, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = (0..n).map(&f).sum();
    dx * (inner - 0.5 * (f(0) + f(n - 1)))
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss–Kronrod 7/15 quadrature to a relative tolerance.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    let mut intervals = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    let mut evaluations = 15;
    loop {
        let value: f64 = intervals.iter().map(|iv| iv.2).sum();
        let error: f64 = intervals.iter().map(|iv| iv.3).sum();
        if error <= rel_tol * value.abs() || error < 1e-300 {
            return Ok(Integral {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not reach relative tolerance {rel_tol:e} \
                 (estimate {error:e} on {value:e})"
            )));
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapz_exact_for_linear() {
        let v: Vec<f64> = (0..11).map(|i| 2.0 * i as f64 * 0.1 + 1.0).collect();
        assert!((trapz(&v, 0.1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gk_gaussian() {
        let r = adaptive_gk(|x| (-x * x).exp(), -10.0, 10.0, 1e-12, 200).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gk_lorentzian_peak() {
        let w = 1e-3;
        let r = adaptive_gk(|x| w / (x * x + w * w), -1.0, 1.0, 1e-10, 500).unwrap();
        let exact = 2.0 * (1.0 / w).atan();
        assert!((r.value - exact).abs() < 1e-8 * exact);
    }
}
