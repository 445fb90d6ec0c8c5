//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

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
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 20_000;

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

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "quadrature bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let total = (b - a).abs();
    // Seed with unit-width segments so narrow features cannot fall between nodes.
    let pieces = total.ceil().max(1.0) as usize;
    let width = (b - a) / pieces as f64;
    let mut stack: Vec<(f64, f64)> = (0..pieces)
        .rev()
        .map(|k| {
            let lo = a + width * k as f64;
            let hi = if k + 1 == pieces { b } else { a + width * (k + 1) as f64 };
            (lo, hi)
        })
        .collect();
    let mut sum = 0.0;
    let mut segments = 0usize;
    let budget = MAX_SEGMENTS + pieces;
    while let Some((lo, hi)) = stack.pop() {
        segments += 1;
        if segments > budget {
            return Err(Error::QuadratureFailure {
                what: format!("segment budget exhausted on [{a}, {b}]"),
                tol,
            });
        }
        let (value, err) = gk15(&f, lo, hi);
        if !value.is_finite() {
            return Err(Error::QuadratureFailure {
                what: format!("non-finite integrand on [{lo}, {hi}]"),
                tol,
            });
        }
        let share = tol * (hi - lo).abs() / total;
        let mid = 0.5 * (lo + hi);
        if err <= share.max(f64::EPSILON * value.abs()) || mid <= lo.min(hi) || mid >= lo.max(hi) {
            sum += value;
        } else {
            stack.push((mid, hi));
            stack.push((lo, mid));
        }
    }
    Ok(sum)
}

/// Integrates over `[a, b]` split at the given interior breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut knots = vec![a];
    knots.extend(breaks.iter().copied().filter(|&c| c > a && c < b));
    knots.push(b);
    let pieces = (knots.len() - 1) as f64;
    knots
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol / pieces))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomials_and_gaussian() {
        assert_abs_diff_eq!(integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap(), 9.0, epsilon = 1e-12);
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(integrate(phi, -40.0, 40.0, 1e-13).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            integrate_pieces(|x: f64| x.abs() * phi(x), -40.0, 40.0, &[0.0], 1e-13).unwrap(),
            (2.0 / std::f64::consts::PI).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn non_finite_integrand_fails() {
        assert!(matches!(
            integrate(|x| 1.0 / x, -1.0, 1.0, 1e-10),
            Err(Error::QuadratureFailure { .. })
        ));
    }
}
