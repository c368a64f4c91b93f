//! Adaptive Gauss–Kronrod (7/15) quadrature on fixed panels, plus the periodic
//! trapezoid rule used for angular averages.

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Absolute tolerance on the integral.
    pub abs_tol: f64,
    /// Maximum bisection depth inside one panel.
    pub max_depth: u32,
    /// Upper bound on the number of initial panels.
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-9, max_depth: 40, max_panels: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let center = (a + b) / T::lit(2.0);
    let half = (b - a) / T::lit(2.0);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod += T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss += T::lit(WG[j / 2]) * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T, depth: u32, max_depth: u32) -> Integral<T> {
    let (value, error) = gk15(f, a, b);
    let roundoff = T::lit(50.0) * T::eps() * value.abs();
    if error <= tol || error <= roundoff || depth >= max_depth {
        return Integral { value, error };
    }
    let mid = (a + b) / T::lit(2.0);
    let half_tol = tol / T::lit(2.0);
    let left = adaptive(f, a, mid, half_tol, depth + 1, max_depth);
    let right = adaptive(f, mid, b, half_tol, depth + 1, max_depth);
    Integral { value: left.value + right.value, error: left.error + right.error }
}

/// Integrates `f` over `[a, b]`, first cutting the interval into panels no
/// wider than `panel_width` (half an oscillation period of the integrand) and
/// refining each panel adaptively.
///
/// Fails if the accumulated error estimate exceeds `opts.abs_tol`.
pub fn integrate_panels<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    panel_width: T,
    opts: &QuadratureOptions,
) -> Result<Integral<T>> {
    let span = b - a;
    if span <= T::zero() {
        return Ok(Integral { value: T::zero(), error: T::zero() });
    }
    let wanted = (span / panel_width).ceil().to_usize().unwrap_or(usize::MAX).max(1);
    let panels = wanted.min(opts.max_panels);
    let width = span / T::from_usize_lossy(panels);
    let tol = T::lit(opts.abs_tol);
    let per_panel = tol / T::from_usize_lossy(panels);

    let mut value = T::zero();
    let mut error = T::zero();
    for i in 0..panels {
        let lo = a + width * T::from_usize_lossy(i);
        let hi = if i + 1 == panels { b } else { lo + width };
        let part = adaptive(&f, lo, hi, per_panel, 0, opts.max_depth);
        value += part.value;
        error += part.error;
    }
    if error > tol && error > T::lit(100.0) * T::eps() * value.abs() {
        return Err(Error::Quadrature { estimate: error.to_f64().unwrap_or(f64::NAN), tolerance: opts.abs_tol });
    }
    Ok(Integral { value, error })
}

/// Number of trapezoid nodes that resolves `cos(x cos θ)` on the circle to
/// roundoff. The rule is exact for Fourier modes below the node count, and
/// `J_m(x)` is negligible once `m` exceeds `x` by a few Airy widths.
fn angular_nodes(x: f64) -> usize {
    let x = x.abs();
    let n = (x + 12.0 * x.cbrt() + 32.0).ceil() as usize;
    n.div_ceil(4) * 4
}

/// Angular means `(1/2π)∫ cos(ρ k̂·r) dθ` and `(1/2π)∫ sin(ρ k̂·r) dθ` with
/// `k̂ = (cos θ, sin θ)`, by the periodic trapezoid rule.
///
/// `r ↦ −r` negates every node argument exactly, so the sine mean is exactly
/// odd and the cosine mean exactly even in `r`.
pub fn angular_means<T: Real>(rho: T, rx: T, ry: T) -> (T, T) {
    if rx == T::zero() && ry == T::zero() {
        return (T::one(), T::zero());
    }
    let radius = (rx * rx + ry * ry).sqrt();
    let n = angular_nodes((rho * radius).to_f64().unwrap_or(0.0));
    let step = T::lit(2.0) * T::PI() / T::from_usize_lossy(n);
    let mut c = T::zero();
    let mut s = T::zero();
    for i in 0..n {
        let theta = step * T::from_usize_lossy(i);
        let arg = rho * (rx * theta.cos() + ry * theta.sin());
        c += arg.cos();
        s += arg.sin();
    }
    let norm = T::from_usize_lossy(n);
    (c / norm, s / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bessel_j0_series(x: f64) -> f64 {
        let q = -(x * x) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k as f64 * k as f64);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let opts = QuadratureOptions::default();
        let r = integrate_panels(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 10.0, &opts).unwrap();
        assert_abs_diff_eq!(r.value, (64.0 - 1.0) / 6.0 - (8.0 + 1.0), epsilon = 1e-13);
    }

    #[test]
    fn oscillatory_integral_meets_tolerance() {
        let opts = QuadratureOptions::default();
        let exact = 1.0 - 200.0f64.cos();
        let r = integrate_panels(|x: f64| x.sin(), 0.0, 200.0, 1.0, &opts).unwrap();
        assert_abs_diff_eq!(r.value, exact, epsilon = 1e-10);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadratureOptions { abs_tol: 1e-12, max_depth: 2, max_panels: 1 };
        let err = integrate_panels(|x: f64| (1.0 / (x + 1e-6)).sin(), 0.0, 1.0, 1.0, &opts);
        assert!(matches!(err, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn angular_cosine_mean_is_bessel_j0() {
        for &x in &[0.1, 1.0, 2.5, 7.0, 12.0] {
            let (c, s) = angular_means(x, 0.6, 0.8);
            assert_abs_diff_eq!(c, bessel_j0_series(x), epsilon = 1e-12);
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn angular_means_parity_is_exact() {
        for &(rho, rx, ry) in &[(3.3, 1.5, -0.5), (17.0, 2.0, 2.0), (0.7, -0.5, 1.5)] {
            let (c1, s1) = angular_means(rho, rx, ry);
            let (c2, s2) = angular_means(rho, -rx, -ry);
            assert_eq!(c1, c2);
            assert_eq!(s1, -s2);
        }
    }
}
