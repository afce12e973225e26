//! Truncated Fourier approximation `F` of the 2π-periodic Heaviside step.
//!
//! The series is `F(x) = Σ_{k∈S₁} F_k e^{ikx}` with `F₀ = ½` and, on odd
//! `k = 2j+1`,
//!
//! ```text
//! F_k = -i √(β/2π) e^{-β} (I_j(β) + I_{j+1}(β)) / (2j+1)    0 ≤ j < d
//! F_k = -i √(β/2π) e^{-β}  I_d(β)               / (2d+1)    j = d
//! F_{-k} = -F_k
//! ```
//!
//! Untruncated, the sum is `½ + ½ erf(√(2β) sin x)`; the boundary coefficient
//! comes from cutting the Jacobi–Anger expansion of `e^{β cos 2x}` at order `d`.
//! Only the magnitudes on `S₁⁺` are stored; the real form is
//! `F(x) = ½ + 2 Σ_{k∈S₁⁺} |F_k| sin(kx)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::special::{lambert_w0, scaled_bessel_i_seq};

/// Points per band half used when searching for the truncation order.
const BAND_POINTS: usize = 20_001;
/// Points over `[-π, π]` used for the global range check.
const GLOBAL_POINTS: usize = 40_001;
const MAX_ORDER: usize = 1 << 20;
const DROP_BELOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierParams {
    /// Target approximation error ε on the band.
    pub epsilon: f64,
    /// Band margin δ: the bound holds on `[δ, π-δ] ∪ [-π+δ, -δ]`.
    pub delta_band: f64,
    /// Truncation order; the odd frequencies are `1, 3, …, 2d+1`.
    pub d: usize,
    pub beta: f64,
}

impl FourierParams {
    pub fn validate(&self) -> Result<()> {
        check_eps_delta(self.epsilon, self.delta_band)?;
        if self.d < 1 {
            return Err(invalid("d", "must be at least 1"));
        }
        if !(self.beta >= 1.0) || !self.beta.is_finite() {
            return Err(invalid("beta", "must be finite and >= 1"));
        }
        Ok(())
    }
}

fn check_eps_delta(epsilon: f64, delta_band: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(
            "epsilon",
            format!("must lie in (0, 1/2), got {epsilon}"),
        ));
    }
    if !(delta_band > 0.0 && delta_band < PI / 2.0) {
        return Err(invalid(
            "delta_band",
            format!("must lie in (0, π/2), got {delta_band}"),
        ));
    }
    Ok(())
}

/// Damping `β = max{ W(3/(π ε²)) / (4 sin² δ), 1 }`.
pub fn damping_beta(epsilon: f64, delta_band: f64) -> Result<f64> {
    check_eps_delta(epsilon, delta_band)?;
    let w = lambert_w0(3.0 / (PI * epsilon * epsilon))?;
    let s = delta_band.sin();
    Ok((w / (4.0 * s * s)).max(1.0))
}

/// Pick `β` from the closed form and the smallest `d` whose measured error
/// meets `ε` on the band (and stays inside `[-ε, 1+ε]` globally).
///
/// `d` is searched by doubling and then bisection.
pub fn choose_params(epsilon: f64, delta_band: f64) -> Result<FourierParams> {
    let beta = damping_beta(epsilon, delta_band)?;
    let passes = |d: usize| -> Result<bool> {
        let p = FourierParams {
            epsilon,
            delta_band,
            d,
            beta,
        };
        let s = build_series(&p)?;
        if band_error(&s, BAND_POINTS) > epsilon {
            return Ok(false);
        }
        let (lo, hi) = global_range(&s, GLOBAL_POINTS);
        Ok(lo >= -epsilon && hi <= 1.0 + epsilon)
    };

    let mut hi = 1usize;
    while !passes(hi)? {
        if hi >= MAX_ORDER {
            return Err(invalid(
                "epsilon",
                format!("no truncation order up to {MAX_ORDER} reaches the band error"),
            ));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo >= 1 {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if passes(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    Ok(FourierParams {
        epsilon,
        delta_band,
        d: hi,
        beta,
    })
}

/// Coefficient magnitudes `|F_k|` on the odd positive frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    params: FourierParams,
    /// `(k, |F_k|)` with `k` odd and ascending.
    terms: Vec<(u32, f64)>,
    dropped: usize,
}

pub fn build_series(params: &FourierParams) -> Result<FourierSeries> {
    params.validate()?;
    let d = params.d;
    let beta = params.beta;
    let bessel = scaled_bessel_i_seq(d + 1, beta)?;
    let pref = (beta / (2.0 * PI)).sqrt();
    let mut terms = Vec::with_capacity(d + 1);
    let mut dropped = 0;
    for j in 0..=d {
        let k = 2 * j + 1;
        let num = if j < d {
            bessel[j] + bessel[j + 1]
        } else {
            bessel[d]
        };
        let mag = pref * num / k as f64;
        if mag < DROP_BELOW {
            dropped += 1;
            continue;
        }
        terms.push((k as u32, mag));
    }
    if dropped > 0 {
        log::info!("dropped {dropped} Fourier coefficients below {DROP_BELOW:e}");
    }
    let series = FourierSeries {
        params: *params,
        terms,
        dropped,
    };
    log::debug!(
        "Fourier series d={} beta={:.4}: sum |F_k| over S1 = {:.6}",
        d,
        beta,
        0.5 + 2.0 * series.abs_sum()
    );
    Ok(series)
}

impl FourierSeries {
    pub fn params(&self) -> &FourierParams {
        &self.params
    }

    /// `(k, |F_k|)` pairs on the retained odd positive frequencies.
    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn frequencies(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.iter().map(|&(k, _)| k)
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn f0(&self) -> f64 {
        0.5
    }

    /// `Σ_{k∈S₁⁺} |F_k|`.
    pub fn abs_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.1).sum()
    }

    /// The complex coefficient `F_k` for any integer `k`.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        if k == 0 {
            return Complex64::new(0.5, 0.0);
        }
        let mag = self
            .terms
            .iter()
            .find(|&&(kk, _)| kk as i64 == k.abs())
            .map_or(0.0, |t| t.1);
        if k > 0 {
            Complex64::new(0.0, -mag)
        } else {
            Complex64::new(0.0, mag)
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        0.5 + 2.0
            * self
                .terms
                .iter()
                .map(|&(k, m)| m * (k as f64 * x).sin())
                .sum::<f64>()
    }

    // sin(kx) over odd k by rotation; used for dense grids.
    fn evaluate_fast(&self, x: f64) -> f64 {
        let (s2, c2) = (2.0 * x).sin_cos();
        let (mut s, mut c) = x.sin_cos();
        let mut k = 1u32;
        let mut acc = 0.0;
        for &(kk, m) in &self.terms {
            while k < kk {
                let ns = s * c2 + c * s2;
                c = c * c2 - s * s2;
                s = ns;
                k += 2;
            }
            acc += m * s;
        }
        0.5 + 2.0 * acc
    }
}

/// Largest `|Θ(x) - F(x)|` over `points` evenly spaced samples of each band half.
pub fn band_error(series: &FourierSeries, points: usize) -> f64 {
    let delta = series.params.delta_band;
    let n = points.max(2);
    let h = (PI - 2.0 * delta) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = delta + i as f64 * h;
            let upper = (1.0 - series.evaluate_fast(x)).abs();
            let lower = series.evaluate_fast(-x).abs();
            upper.max(lower)
        })
        .fold(0.0, f64::max)
}

/// `(min F, max F)` over `points` evenly spaced samples of `[-π, π]`.
pub fn global_range(series: &FourierSeries, points: usize) -> (f64, f64) {
    let n = points.max(2);
    let h = 2.0 * PI / (n - 1) as f64;
    (0..n)
        .map(|i| series.evaluate_fast(-PI + i as f64 * h))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// The ideal periodic step: 1 on `[0, π)`, 0 on `[-π, 0)` (mod 2π).
pub fn heaviside(x: f64) -> f64 {
    if x.rem_euclid(2.0 * PI) < PI {
        1.0
    } else {
        0.0
    }
}

/// Diagnostic dump with columns `k,abs_f_k`.
pub fn series_csv(series: &FourierSeries) -> String {
    let mut out = String::from("k,abs_f_k\n");
    for &(k, m) in series.terms() {
        out.push_str(&format!("{k},{m:.17e}\n"));
    }
    out
}

impl From<&FourierSeries> for FourierParams {
    fn from(s: &FourierSeries) -> Self {
        s.params
    }
}

impl std::fmt::Display for FourierParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "eps={} delta={} d={} beta={:.6}",
            self.epsilon, self.delta_band, self.d, self.beta
        )
    }
}
