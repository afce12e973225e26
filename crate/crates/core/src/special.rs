//! Special functions needed by the Fourier filter: the principal Lambert-W
//! branch and exponentially scaled modified Bessel functions `e^{-x} I_n(x)`.

use crate::error::{invalid, Result};

const MAX_HALLEY_ITERS: usize = 64;

/// Principal branch `W₀(x)` for `x ≥ 0`, i.e. the `w ≥ 0` with `w e^w = x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(
            "x",
            format!("lambert_w0 needs a finite x >= 0, got {x}"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x <= std::f64::consts::E {
        // Halley on w e^w - x
        let mut w = (1.0 + x).ln();
        for _ in 0..MAX_HALLEY_ITERS {
            let ew = w.exp();
            let f = w * ew - x;
            let fp = ew * (w + 1.0);
            let step = f / (fp - (w + 2.0) * f / (2.0 * w + 2.0));
            w -= step;
            if step.abs() <= 1e-16 * w.abs().max(1e-300) {
                break;
            }
        }
        Ok(w)
    } else {
        // Newton on w + ln w - ln x, which avoids overflow of e^w for huge x
        let lx = x.ln();
        let mut w = lx - lx.ln();
        for _ in 0..MAX_HALLEY_ITERS {
            let g = w + w.ln() - lx;
            let step = g / (1.0 + 1.0 / w);
            w -= step;
            if step.abs() <= 1e-16 * w {
                break;
            }
        }
        Ok(w)
    }
}

/// `e^{-β} I_k(β)` for every order `k = 0..=n_max`.
///
/// Miller backward recurrence normalized with `I₀ + 2 Σ_{k≥1} I_k = e^β`,
/// which yields the scaled values directly and stays finite for any `β`.
pub fn scaled_bessel_i_seq(n_max: usize, beta: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(
            "beta",
            format!("must be positive and finite, got {beta}"),
        ));
    }
    let start = n_max + 32 + (80.0 * beta).sqrt().ceil() as usize;
    let mut y = vec![0.0f64; start + 2];
    y[start] = 1.0;
    for k in (1..=start).rev() {
        y[k - 1] = (2.0 * k as f64 / beta) * y[k] + y[k + 1];
        if y[k - 1] > 1e250 {
            for v in &mut y[k - 1..] {
                *v *= 1e-250;
            }
        }
    }
    let norm = y[0] + 2.0 * y[1..=start].iter().sum::<f64>();
    y.truncate(n_max + 1);
    for v in &mut y {
        *v /= norm;
    }
    Ok(y)
}

/// `e^{-β} I_n(β)`.
pub fn scaled_bessel_i(n: usize, beta: f64) -> Result<f64> {
    Ok(scaled_bessel_i_seq(n, beta)?[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(x: f64) -> f64 {
        let w = lambert_w0(x).unwrap();
        (w * w.exp() - x).abs() / x
    }

    #[test]
    fn lambert_known_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        for x in [1e-12, 1e-3, 0.5, 2.0, 10.0, 95.49, 1e4, 1e100, 1e300] {
            assert!(residual(x) < 1e-12, "x = {x}: residual {}", residual(x));
        }
    }

    #[test]
    fn lambert_rejects_negative() {
        assert!(lambert_w0(-0.1).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn bessel_small_argument_limits() {
        assert!((scaled_bessel_i(0, 1e-10).unwrap() - 1.0).abs() < 1e-9);
        assert!(scaled_bessel_i(1, 1e-10).unwrap().abs() < 1e-9);
    }

    // Independent route: direct power series Σ (β/2)^{2k+n} / (k! (k+n)!).
    fn series(n: usize, beta: f64) -> f64 {
        let h = beta / 2.0;
        let mut term = (0..n).fold(1.0, |acc, i| acc * h / (i + 1) as f64);
        let mut sum = 0.0;
        for k in 0..2000 {
            sum += term;
            term *= h * h / (((k + 1) * (k + 1 + n)) as f64);
            if term < sum * 1e-18 {
                break;
            }
        }
        sum * (-beta).exp()
    }

    #[test]
    fn bessel_matches_power_series() {
        for &(n, beta) in &[(3usize, 50.0), (0, 1.0), (5, 7.5), (12, 30.0), (1, 0.3)] {
            let got = scaled_bessel_i(n, beta).unwrap();
            let want = series(n, beta);
            assert!(
                ((got - want) / want).abs() < 1e-10,
                "n={n} beta={beta}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn bessel_decreasing_and_stable_for_large_beta() {
        for beta in [5.0, 700.0, 1e6] {
            let v = scaled_bessel_i_seq(40, beta).unwrap();
            assert!(v.iter().all(|x| x.is_finite() && *x > 0.0));
            assert!(v.windows(2).all(|w| w[1] < w[0]), "beta = {beta}");
        }
        // e^{-x} I_0(x) ~ 1/sqrt(2πx) (1 + 1/(8x))
        let x = 1e6;
        let asym = (1.0 + 1.0 / (8.0 * x)) / (2.0 * std::f64::consts::PI * x).sqrt();
        assert!((scaled_bessel_i(0, x).unwrap() / asym - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bessel_rejects_bad_beta() {
        assert!(scaled_bessel_i(0, 0.0).is_err());
        assert!(scaled_bessel_i(0, -1.0).is_err());
    }
}
