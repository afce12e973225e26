//! Pauli strings, phase-tracked products and the weighted Pauli-sum Hamiltonian.
//!
//! A string is stored in symplectic form as two bitmasks. Qubit `q` maps to
//! bit `q` of both masks and of every computational-basis index. In text the
//! leftmost letter is qubit 0, so `"ZIX"` is `Z` on qubit 0 and `X` on qubit 2.
//!
//! The operator represented by masks `(x, z)` is `i^{|x & z|} X^x Z^z`, which
//! makes a `Y` letter (both bits set) equal to `i X Z`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Largest qubit count a [`PauliString`] can hold.
pub const MAX_QUBITS: usize = 64;

/// An element of the quarter-turn group `{+1, +i, -1, -i}`, stored as the
/// exponent of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    /// `i^k` for any integer `k`.
    pub fn from_i_power(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    /// `+1` for nonnegative signs, `-1` otherwise.
    pub fn from_sign(negative: bool) -> Self {
        if negative {
            Phase::MINUS_ONE
        } else {
            Phase::ONE
        }
    }

    pub fn i_power(self) -> u8 {
        self.0
    }

    pub fn pow(self, n: u64) -> Self {
        Phase(((self.0 as u64 * (n % 4)) % 4) as u8)
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Multiply a complex number by this phase without rounding.
    #[inline]
    pub fn apply(self, z: Complex64) -> Complex64 {
        match self.0 {
            0 => z,
            1 => Complex64::new(-z.im, z.re),
            2 => -z,
            _ => Complex64::new(z.im, -z.re),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        };
        f.write_str(s)
    }
}

/// A tensor product of single-qubit Paulis with no residual phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::from_masks(n_qubits, 0, 0)
    }

    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(invalid("n_qubits", "must be positive"));
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n: n_qubits,
                max: MAX_QUBITS,
            });
        }
        let mask = if n_qubits == 64 {
            u64::MAX
        } else {
            (1u64 << n_qubits) - 1
        };
        if (x | z) & !mask != 0 {
            return Err(invalid("masks", "bits set beyond n_qubits"));
        }
        Ok(Self { n_qubits, x, z })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of `Y` letters, i.e. the `i` power hidden in the symplectic form.
    #[inline]
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn letter(&self, qubit: usize) -> char {
        match ((self.x >> qubit) & 1, (self.z >> qubit) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    /// Phase-tracked product: returns `(phase, c)` with `self * rhs = phase * c`.
    pub fn multiply(&self, rhs: &PauliString) -> Result<(Phase, PauliString)> {
        if self.n_qubits != rhs.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: rhs.n_qubits,
            });
        }
        Ok(self.mul_unchecked(rhs))
    }

    /// [`multiply`](Self::multiply) without the qubit-count check.
    #[inline]
    pub(crate) fn mul_unchecked(&self, rhs: &PauliString) -> (Phase, PauliString) {
        let x = self.x ^ rhs.x;
        let z = self.z ^ rhs.z;
        // X^a Z^b X^c Z^d = (-1)^{|b & c|} X^{a^c} Z^{b^d}
        let swap = (self.z & rhs.x).count_ones() as i64;
        let k =
            self.y_count() as i64 + rhs.y_count() as i64 - (x & z).count_ones() as i64 + 2 * swap;
        (
            Phase::from_i_power(k),
            PauliString {
                n_qubits: self.n_qubits,
                x,
                z,
            },
        )
    }

    /// Action on a computational basis state: `P|b> = phase(b) |b ^ x>`.
    #[inline]
    pub fn basis_action(&self, basis: u64) -> (Phase, u64) {
        let k = self.y_count() as i64 + 2 * (basis & self.z).count_ones() as i64;
        (Phase::from_i_power(k), basis ^ self.x)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<char> = s.chars().collect();
        if letters.is_empty() {
            return Err(invalid("pauli string", "empty"));
        }
        if letters.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n: letters.len(),
                max: MAX_QUBITS,
            });
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, &c) in letters.iter().enumerate() {
            let bit = 1u64 << q;
            match c {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit
                }
                'Z' => z |= bit,
                other => {
                    return Err(Error::InvalidPauliLetter {
                        letter: other,
                        string: s.to_string(),
                    })
                }
            }
        }
        PauliString::from_masks(letters.len(), x, z)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

/// `coefficient * string`; the coefficient may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(invalid(
                "coefficient",
                format!("{coefficient} is not finite"),
            ));
        }
        if coefficient == 0.0 {
            return Err(invalid("coefficient", "zero coefficients are not allowed"));
        }
        Ok(Self {
            coefficient,
            string,
        })
    }

    pub fn parse(coefficient: f64, letters: &str) -> Result<Self> {
        Self::new(coefficient, letters.parse()?)
    }
}

/// A Hamiltonian `H = Σ α_j P_j` normalized for phase estimation.
///
/// `lambda = Σ |α_j|` and `tau = π / (2 λ + Δ)`, so `τ‖H‖ ≤ τλ < π/2` and the
/// spectrum of `τH` sits inside `(-π/2, π/2)`. Term order is kept as given.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    terms: Vec<PauliTerm>,
    lambda: f64,
    tau: f64,
    delta_precision: f64,
}

impl PauliSum {
    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn n_qubits(&self) -> usize {
        self.terms[0].string.n_qubits()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn delta_precision(&self) -> f64 {
        self.delta_precision
    }

    /// Sampling weights `p_i = |α_i| / λ` paired with `sgn(α_i)`.
    pub fn probability_weights(&self) -> Vec<(f64, f64)> {
        self.terms
            .iter()
            .map(|t| (t.coefficient.abs() / self.lambda, t.coefficient.signum()))
            .collect()
    }
}

/// Build a [`PauliSum`] and its normalization constants.
pub fn normalize_hamiltonian(terms: Vec<PauliTerm>, delta_precision: f64) -> Result<PauliSum> {
    if terms.is_empty() {
        return Err(Error::EmptyHamiltonian);
    }
    if !(delta_precision > 0.0 && delta_precision.is_finite()) {
        return Err(invalid("delta_precision", "must be positive and finite"));
    }
    let n = terms[0].string.n_qubits();
    for t in &terms {
        if t.string.n_qubits() != n {
            return Err(Error::QubitMismatch {
                left: n,
                right: t.string.n_qubits(),
            });
        }
        if !t.coefficient.is_finite() || t.coefficient == 0.0 {
            return Err(invalid("coefficient", "must be finite and nonzero"));
        }
    }
    let lambda: f64 = terms.iter().map(|t| t.coefficient.abs()).sum();
    if lambda <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    let tau = PI / (2.0 * lambda + delta_precision);
    debug_assert!(tau * lambda < PI / 2.0);
    Ok(PauliSum {
        terms,
        lambda,
        tau,
        delta_precision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(ps("X").multiply(&ps("X")).unwrap(), (Phase::ONE, ps("I")));
        assert_eq!(ps("X").multiply(&ps("Y")).unwrap(), (Phase::I, ps("Z")));
        assert_eq!(
            ps("Y").multiply(&ps("X")).unwrap(),
            (Phase::MINUS_I, ps("Z"))
        );
        assert_eq!(ps("Z").multiply(&ps("X")).unwrap(), (Phase::I, ps("Y")));
        assert_eq!(ps("Y").multiply(&ps("Z")).unwrap(), (Phase::I, ps("X")));
    }

    #[test]
    fn two_qubit_product_commuting_strings() {
        // XZ * ZX = (XZ)(ZX) per qubit: (X Z) ⊗ (Z X) = (-iY) ⊗ (iY) = YY
        let (ph, c) = ps("XZ").multiply(&ps("ZX")).unwrap();
        assert_eq!(c, ps("YY"));
        assert_eq!(ph, Phase::ONE);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(matches!(
            ps("XX").multiply(&ps("X")),
            Err(Error::QubitMismatch { .. })
        ));
    }

    #[test]
    fn parse_and_display_round_trip() {
        let s = ps("ZIXY");
        assert_eq!(s.to_string(), "ZIXY");
        assert_eq!(s.letter(0), 'Z');
        assert_eq!(s.letter(2), 'X');
        assert!(matches!(
            "IXQ".parse::<PauliString>(),
            Err(Error::InvalidPauliLetter { letter: 'Q', .. })
        ));
    }

    #[test]
    fn phase_group() {
        assert_eq!(Phase::I.pow(4), Phase::ONE);
        assert_eq!(Phase::MINUS_I.pow(2), Phase::MINUS_ONE);
        assert_eq!(Phase::I * Phase::MINUS_I, Phase::ONE);
        assert_eq!(Phase::from_i_power(-1), Phase::MINUS_I);
        let z = Complex64::new(0.3, -0.7);
        for k in 0..4 {
            let p = Phase::from_i_power(k);
            assert!((p.apply(z) - p.to_complex() * z).norm() < 1e-15);
        }
    }

    fn case1() -> Vec<PauliTerm> {
        vec![
            PauliTerm::parse(0.2, "IIZ").unwrap(),
            PauliTerm::parse(0.1, "ZIX").unwrap(),
            PauliTerm::parse(0.15, "IZI").unwrap(),
            PauliTerm::parse(0.25, "IZZ").unwrap(),
        ]
    }

    #[test]
    fn case1_normalization() {
        let h = normalize_hamiltonian(case1(), 0.05).unwrap();
        assert!((h.lambda() - 0.7).abs() < 1e-15);
        assert!((h.tau() - PI / 1.45).abs() < 1e-15);
        assert!(h.tau() * h.lambda() < PI / 2.0);

        let p = h.probability_weights();
        let expect = [2.0 / 7.0, 1.0 / 7.0, 3.0 / 14.0, 5.0 / 14.0];
        for ((pi, si), e) in p.iter().zip(expect) {
            assert!((pi - e).abs() < 1e-15);
            assert_eq!(*si, 1.0);
        }
    }

    #[test]
    fn single_term_normalization() {
        let h = normalize_hamiltonian(vec![PauliTerm::parse(1.0, "Z").unwrap()], 1.0).unwrap();
        assert_eq!(h.lambda(), 1.0);
        assert!((h.tau() - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn negative_weights_carry_sign() {
        let h = normalize_hamiltonian(
            vec![
                PauliTerm::parse(-0.5, "X").unwrap(),
                PauliTerm::parse(0.5, "Z").unwrap(),
            ],
            0.1,
        )
        .unwrap();
        assert_eq!(h.probability_weights(), vec![(0.5, -1.0), (0.5, 1.0)]);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            normalize_hamiltonian(vec![], 0.1),
            Err(Error::EmptyHamiltonian)
        ));
        assert!(PauliTerm::parse(0.0, "X").is_err());
        assert!(normalize_hamiltonian(case1(), 0.0).is_err());
        let mixed = vec![
            PauliTerm::parse(1.0, "X").unwrap(),
            PauliTerm::parse(1.0, "XX").unwrap(),
        ];
        assert!(matches!(
            normalize_hamiltonian(mixed, 0.1),
            Err(Error::QubitMismatch { .. })
        ));
    }
}
