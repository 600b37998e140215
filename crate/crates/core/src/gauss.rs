//! Standard normal CDF, quantile, and density.
//!
//! `erf`/`erfc` follow Cody's rational minimax approximations (W. J. Cody,
//! "Rational Chebyshev approximation for the error function", Math. Comp. 23,
//! 1969; the SPECFUN CALERF coefficients), accurate to well below 1e-14
//! relative over the whole range. No external math dependency is used, so
//! results are bit-stable across builds. The quantile uses Acklam's rational
//! initializer polished by one Halley step against this `phi`.
#![allow(clippy::excessive_precision)]

const A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
const C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
const P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

const ONE_OVER_SQRT_PI: f64 = 0.5641895835477562869;
const THRESH: f64 = 0.46875;

/// erfc(y) for y in (0.46875, inf), via the region-2/3 approximations.
fn erfc_tail(y: f64) -> f64 {
    let result = if y <= 4.0 {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        (xnum + C[7]) / (xden + D[7])
    } else {
        let ysq = 1.0 / (y * y);
        let mut xnum = P[5] * ysq;
        let mut xden = ysq;
        for i in 0..4 {
            xnum = (xnum + P[i]) * ysq;
            xden = (xden + Q[i]) * ysq;
        }
        let r = ysq * (xnum + P[4]) / (xden + Q[4]);
        (ONE_OVER_SQRT_PI - r) / y
    };
    // split exp(-y^2) to keep the argument exactly representable
    let ysq = (y * 16.0).floor() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * result
}

/// The error function.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= THRESH {
        let z = y * y;
        let mut xnum = A[4] * z;
        let mut xden = z;
        for i in 0..3 {
            xnum = (xnum + A[i]) * z;
            xden = (xden + B[i]) * z;
        }
        x * (xnum + A[3]) / (xden + B[3])
    } else {
        let e = 1.0 - erfc_tail(y);
        if x < 0.0 {
            -e
        } else {
            e
        }
    }
}

/// The complementary error function.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= THRESH {
        1.0 - erf(x)
    } else if x < 0.0 {
        2.0 - erfc_tail(y)
    } else {
        erfc_tail(y)
    }
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn phi_density(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

// Acklam's inverse-normal coefficients.
const IA: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const IB: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const IC: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ID: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Standard normal quantile; `phi(normal_quantile(q)) = q` to ~1e-15 for
/// `q` in (0, 1).
pub fn normal_quantile(q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "quantile argument must be in (0,1)");
    let p_low = 0.02425;
    let x = if q < p_low {
        let r = (-2.0 * q.ln()).sqrt();
        (((((IC[0] * r + IC[1]) * r + IC[2]) * r + IC[3]) * r + IC[4]) * r + IC[5])
            / ((((ID[0] * r + ID[1]) * r + ID[2]) * r + ID[3]) * r + 1.0)
    } else if q <= 1.0 - p_low {
        let r = q - 0.5;
        let s = r * r;
        (((((IA[0] * s + IA[1]) * s + IA[2]) * s + IA[3]) * s + IA[4]) * s + IA[5]) * r
            / (((((IB[0] * s + IB[1]) * s + IB[2]) * s + IB[3]) * s + IB[4]) * s + 1.0)
    } else {
        let r = (-2.0 * (1.0 - q).ln()).sqrt();
        -(((((IC[0] * r + IC[1]) * r + IC[2]) * r + IC[3]) * r + IC[4]) * r + IC[5])
            / ((((ID[0] * r + ID[1]) * r + ID[2]) * r + ID[3]) * r + 1.0)
    };
    // one Halley step against our own phi
    let e = phi(x) - q;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Antiderivative of the normal CDF: `int phi = x phi(x) + density(x)`.
pub fn phi_antiderivative(x: f64) -> f64 {
    x * phi(x) + phi_density(x)
}
