//! Small numerical helpers: compensated sums, log-sum-exp and the modified
//! Bessel function of the second kind in log space.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// Neumaier-compensated sum.
pub fn neumaier_sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in iter {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `log Σ exp(v)`; `-∞` for an empty input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return peak;
    }
    if peak == f64::INFINITY {
        return peak;
    }
    peak + neumaier_sum(values.iter().map(|v| (v - peak).exp())).ln()
}

/// `log K_ν(x)` for `x > 0`.
///
/// Half-integer orders use the terminating closed form; other orders go
/// through Temme's series or Steed's continued fraction.
pub fn ln_bessel_k(nu: f64, x: f64) -> f64 {
    let nu = nu.abs();
    let twice = 2.0 * nu;
    if twice.fract() == 0.0 && (twice as u64) % 2 == 1 && nu < 1e4 {
        ln_bessel_k_half_integer((nu - 0.5) as u32, x)
    } else {
        ln_bessel_k_general(nu, x)
    }
}

/// `log K_{n+1/2}(x)` from
/// `K_{n+1/2}(x) = √(π/2x) e^{-x} Σ_{k≤n} (n+k)! / (k!(n-k)!) (2x)^{-k}`.
pub fn ln_bessel_k_half_integer(n: u32, x: f64) -> f64 {
    let ln2x = (2.0 * x).ln();
    // log of (n+k)!/(k!(n-k)!) built incrementally:
    // term_{k+1}/term_k = (n+k+1)(n-k) / (k+1)
    let mut terms = Vec::with_capacity(n as usize + 1);
    let mut ln_coef = 0.0;
    for k in 0..=n {
        terms.push(ln_coef - k as f64 * ln2x);
        if k < n {
            let kf = k as f64;
            let nf = n as f64;
            ln_coef += ((nf + kf + 1.0) * (nf - kf) / (kf + 1.0)).ln();
        }
    }
    0.5 * (PI / (2.0 * x)).ln() - x + log_sum_exp(&terms)
}

// 1/Γ(1+z) = Σ C_k z^k, coefficients from the Taylor series of 1/Γ.
const RGAMMA1P: [f64; 12] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_1,
    -0.000_020_134_854_780_8,
];

/// Temme's `γ₁(μ) = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)` and
/// `γ₂(μ) = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2`, plus `1/Γ(1+μ)` and `1/Γ(1-μ)`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let gampl = 1.0 / gamma(1.0 + mu);
    let gammi = 1.0 / gamma(1.0 - mu);
    let gam2 = 0.5 * (gammi + gampl);
    let gam1 = if mu.abs() < 0.1 {
        // odd part of the series divided by μ
        let m2 = mu * mu;
        let mut acc = 0.0;
        let mut pow = 1.0;
        for k in (1..RGAMMA1P.len()).step_by(2) {
            acc += RGAMMA1P[k] * pow;
            pow *= m2;
        }
        -acc
    } else {
        (gammi - gampl) / (2.0 * mu)
    };
    (gam1, gam2, gampl, gammi)
}

/// `(log K_μ(x), K_{μ+1}(x)/K_μ(x))` for `|μ| ≤ 1/2`.
fn ln_k_low_order(mu: f64, x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-16;
    const MAX_IT: usize = 100_000;
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mu2 = mu * mu;
        for i in 1..MAX_IT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let k_mu = sum;
        let k_mu1 = sum1 * 2.0 / x;
        (k_mu.ln(), k_mu1 / k_mu)
    } else {
        // Steed's algorithm for the CF2 of Thompson and Barnett
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu * mu;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 1..MAX_IT {
            let fi = i as f64;
            a -= 2.0 * fi;
            c = -a * c / (fi + 1.0);
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        h *= a1;
        let ln_k = 0.5 * (PI / (2.0 * x)).ln() - x - s.ln();
        (ln_k, (mu + x + 0.5 - h) / x)
    }
}

/// `log K_ν(x)` for any real order, via the low-order pair and upward
/// recurrence on the ratio `K_{ν+1}/K_ν`.
pub fn ln_bessel_k_general(nu: f64, x: f64) -> f64 {
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut ln_k, mut ratio) = ln_k_low_order(mu, x);
    let xi2 = 2.0 / x;
    for i in 1..=(nl as u64) {
        ln_k += ratio.ln();
        ratio = (mu + i as f64) * xi2 + 1.0 / ratio;
    }
    ln_k
}

#[cfg(test)]
mod tests {
    use super::*;

    // log K_ν(x) reference values at 30 digits
    const REFERENCE: [(f64, f64, f64); 13] = [
        (0.0, 1.0, -0.865_064_398_906_788_1),
        (1.0, 1.0, -0.507_651_948_210_752_3),
        (0.0, 0.1, 0.886_684_366_678_742_1),
        (2.0, 0.5, 2.021_571_874_388_047_2),
        (1.5, 3.0, -3.035_832_719_237_546_5),
        (2.5, 10.0, -10.640_322_251_618_633),
        (3.0, 20.0, -21.058_883_102_277_593),
        (0.3, 1.7, -1.777_424_395_492_060_6),
        (0.3, 2.3, -2.520_002_835_206_857),
        (7.0, 0.05, 31.708_156_044_666_075),
        (50.0, 3.0, 123.553_444_927_977_05),
        (1.5, 500.0, -502.879_514_693_903_7),
        (4.0, 1e-3, 31.502_222_043_503_107),
    ];

    #[test]
    fn matches_reference_values() {
        for &(nu, x, expect) in &REFERENCE {
            let got = ln_bessel_k(nu, x);
            let tol = 1e-10 * expect.abs().max(1.0);
            assert!((got - expect).abs() < tol, "K_{nu}({x}): {got} vs {expect}");
        }
    }

    #[test]
    fn half_integer_routes_agree() {
        for n in 0..12u32 {
            for &x in &[0.01, 0.3, 1.0, 1.99, 2.0, 2.01, 7.5, 40.0, 300.0] {
                let a = ln_bessel_k_half_integer(n, x);
                let b = ln_bessel_k_general(n as f64 + 0.5, x);
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn k_half_closed_form() {
        for &x in &[0.2, 1.0, 5.0] {
            let expect = 0.5 * (PI / (2.0 * x)).ln() - x;
            assert!((ln_bessel_k(0.5, x) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn recurrence_holds() {
        // K_{ν+1} = K_{ν-1} + (2ν/x) K_ν
        for &nu in &[1.0, 1.3, 2.0, 3.7] {
            for &x in &[0.5, 1.9, 2.1, 6.0] {
                let km = ln_bessel_k(nu - 1.0, x).exp();
                let k0 = ln_bessel_k(nu, x).exp();
                let kp = ln_bessel_k(nu + 1.0, x).exp();
                assert!((kp - km - 2.0 * nu / x * k0).abs() < 1e-11 * kp);
            }
        }
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
