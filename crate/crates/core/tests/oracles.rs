//! Library results checked against independent numerical oracles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;

use sqpe::fourier::{build_series, damping_beta, FourierParams};
use sqpe::pauli::{normalize_hamiltonian, PauliString, PauliTerm};
use sqpe::statevector::{dense_hamiltonian, diagonalize};

/// Smooth limit the truncated series approaches.
fn erf_step(beta: f64, x: f64) -> f64 {
    0.5 + 0.5 * erf((2.0 * beta).sqrt() * x.sin())
}

#[test]
fn fourier_coefficients_match_quadrature() {
    let (eps, delta) = (0.05, 0.2);
    let beta = damping_beta(eps, delta).unwrap();
    let d = 12;
    let series = build_series(&FourierParams {
        epsilon: eps,
        delta_band: delta,
        d,
        beta,
    })
    .unwrap();
    // trapezoid rule is spectrally accurate for smooth periodic integrands
    let m = 4096;
    for &(k, _) in &series.terms()[..d] {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            let x = -PI + 2.0 * PI * i as f64 / m as f64;
            acc += erf_step(beta, x) * Complex64::from_polar(1.0, -(k as f64) * x);
        }
        let quad = acc / m as f64;
        let got = series.coefficient(k as i64);
        assert!((quad - got).norm() < 1e-12, "k = {k}: {quad} vs {got}");
    }
    assert!((series.coefficient(0).re - 0.5).abs() < 1e-15);
}

#[test]
fn long_series_converges_to_erf_step() {
    let (eps, delta) = (0.05, 0.2);
    let beta = damping_beta(eps, delta).unwrap();
    let series = build_series(&FourierParams {
        epsilon: eps,
        delta_band: delta,
        d: 200,
        beta,
    })
    .unwrap();
    // statrs erf carries about 1e-10 absolute error in this range
    for i in 0..=400 {
        let x = -PI + 2.0 * PI * i as f64 / 400.0;
        assert!(
            (series.evaluate(x) - erf_step(beta, x)).abs() < 1e-9,
            "x = {x}"
        );
    }
    // 40-digit mpmath value of the erf form at one point
    let x = -3.063_052_837_250_048_3;
    assert!((series.evaluate(x) - 0.202_344_048_994_896_04).abs() < 1e-14);
}

/// Real symmetric embedding `[[A, -B], [B, A]]` of `A + iB`, diagonalized by
/// cyclic Jacobi sweeps. Every eigenvalue appears twice.
fn jacobi_eigenvalues(h: &nalgebra::DMatrix<Complex64>) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for _ in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (rp, rq) = (a[p].clone(), a[q].clone());
                for (k, (apk, aqk)) in rp.into_iter().zip(rq).enumerate() {
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    e.sort_by(f64::total_cmp);
    e.into_iter().step_by(2).collect()
}

#[test]
fn eigenvalues_match_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=4usize {
        for _ in 0..3 {
            let terms: Vec<PauliTerm> = (0..5)
                .map(|_| {
                    let x = rng.random_range(0..1u64 << n);
                    let z = rng.random_range(0..1u64 << n);
                    let c = rng.random_range(-1.0..1.0);
                    PauliTerm::new(c, PauliString::from_masks(n, x, z).unwrap()).unwrap()
                })
                .collect();
            let h = normalize_hamiltonian(terms, 0.05).unwrap();
            let got = diagonalize(&h).unwrap();
            let want = jacobi_eigenvalues(&dense_hamiltonian(&h).unwrap());
            for (g, w) in got.eigenvalues().iter().zip(&want) {
                assert!((g - w).abs() < 1e-10, "n = {n}: {g} vs {w}");
            }
        }
    }
}

#[test]
fn case1_ground_energy_is_frozen() {
    // qubits 0 and 1 enter only through Z, leaving 2x2 blocks; the lowest is
    // 0.15 - sqrt(0.45^2 + 0.1^2)
    let terms = vec![
        PauliTerm::parse(0.2, "IIZ").unwrap(),
        PauliTerm::parse(0.1, "ZIX").unwrap(),
        PauliTerm::parse(0.15, "IZI").unwrap(),
        PauliTerm::parse(0.25, "IZZ").unwrap(),
    ];
    let h = normalize_hamiltonian(terms, 0.05).unwrap();
    let s = diagonalize(&h).unwrap();
    assert!((s.ground_energy() - (-0.310_977_222_864_644_6)).abs() < 1e-12);
    assert_eq!(s.ground_degeneracy(), 2);
}
