use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use sqpe::compiler::Factor;
use sqpe::fourier::{build_series, damping_beta, FourierParams};
use sqpe::pauli::PauliString;
use sqpe::statevector::StateVector;

fn letter_matrix(c: char) -> DMatrix<Complex64> {
    let (o, z, i) = (
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 1.0),
    );
    let v = match c {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        _ => [o, z, z, -o],
    };
    DMatrix::from_row_slice(2, 2, &v)
}

fn matrix(p: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for q in (0..p.n_qubits()).rev() {
        m = m.kronecker(&letter_matrix(p.letter(q)));
    }
    m
}

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (0..1u64 << n, 0..1u64 << n).prop_map(move |(x, z)| PauliString::from_masks(n, x, z).unwrap())
}

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n).prop_filter_map(
        "zero vector",
        move |v| {
            let amps = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            StateVector::normalized(n, amps).ok()
        },
    )
}

proptest! {
    #[test]
    fn product_matches_dense(a in pauli(3), b in pauli(3)) {
        let (phase, c) = a.multiply(&b).unwrap();
        let want = matrix(&a) * matrix(&b);
        let got = matrix(&c) * phase.to_complex();
        prop_assert!((want - got).norm() < 1e-12);
    }

    #[test]
    fn product_is_associative(a in pauli(4), b in pauli(4), c in pauli(4)) {
        let (p1, ab) = a.multiply(&b).unwrap();
        let (p2, left) = ab.multiply(&c).unwrap();
        let (q1, bc) = b.multiply(&c).unwrap();
        let (q2, right) = a.multiply(&bc).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(p1 * p2, q1 * q2);
    }

    #[test]
    fn letters_round_trip(a in pauli(5)) {
        let s = a.to_string();
        prop_assert_eq!(s.parse::<PauliString>().unwrap(), a);
    }

    #[test]
    fn factors_preserve_norm(
        phi in state(3),
        ops in prop::collection::vec((pauli(3), any::<bool>(), -3.0..3.0f64), 0..12),
    ) {
        let factors: Vec<Factor> = ops
            .into_iter()
            .map(|(p, rot, th)| if rot { Factor::Rotation(p, th) } else { Factor::Pauli(p) })
            .collect();
        let mut psi = phi.clone();
        psi.apply_factors(&factors).unwrap();
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_matches_dense(phi in state(2), p in pauli(2), th in -3.0..3.0f64) {
        let got = phi.apply_pauli_rotation(&p, th).unwrap();
        let id = DMatrix::<Complex64>::identity(4, 4);
        let u = id * Complex64::new(th.cos(), 0.0) + matrix(&p) * Complex64::new(0.0, th.sin());
        let want = u * nalgebra::DVector::from_column_slice(phi.amplitudes());
        for (g, w) in got.amplitudes().iter().zip(want.iter()) {
            prop_assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn series_is_conjugate_symmetric(eps in 0.01..0.3f64, delta in 0.05..1.0f64, d in 1usize..40, x in -3.2..3.2f64) {
        let series = build_series(&FourierParams {
            epsilon: eps,
            delta_band: delta,
            d,
            beta: damping_beta(eps, delta).unwrap(),
        }).unwrap();
        for &(k, _) in series.terms() {
            let k = k as i64;
            prop_assert!((series.coefficient(-k) - series.coefficient(k).conj()).norm() < 1e-15);
        }
        prop_assert!((series.evaluate(x) + series.evaluate(-x) - 1.0).abs() < 1e-12);
    }
}
