//! Dense statevector emulation, exact diagonalization and the reference CDF.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::compiler::{Factor, SampledUnitary};
use crate::error::{invalid, Error, Result};
use crate::pauli::{PauliString, PauliSum, Phase};

/// Default qubit cap for dense diagonalization.
pub const DEFAULT_DIAG_CAP: usize = 12;
/// Largest register the emulator will allocate.
pub const MAX_EMULATED_QUBITS: usize = 30;
const NORM_TOL: f64 = 1e-10;
/// Eigenvalues closer than this to the minimum count as ground states.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wrap amplitudes; they must already have unit norm.
    pub fn new(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_register(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                actual: amps.len(),
            });
        }
        let norm = norm_sqr(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(
                "amplitudes",
                format!("squared norm is {norm}, not 1"),
            ));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Scale arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amps).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("amplitudes", "cannot normalize a zero vector"));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::new(n_qubits, amps)
    }

    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index as usize >= dim {
            return Err(invalid(
                "index",
                format!("{index} out of range for {n_qubits} qubits"),
            ));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_qubits,
                actual: 1 << n,
            });
        }
        Ok(())
    }

    /// `phase · P |ψ⟩`.
    pub fn apply_pauli(&self, p: &PauliString, phase: Phase) -> Result<Self> {
        let mut out = self.clone();
        out.apply_pauli_mut(p, phase)?;
        Ok(out)
    }

    pub fn apply_pauli_mut(&mut self, p: &PauliString, phase: Phase) -> Result<()> {
        self.check(p.n_qubits())?;
        let src = self.amps.clone();
        for (b, a) in src.into_iter().enumerate() {
            let (ph, target) = p.basis_action(b as u64);
            self.amps[target as usize] = (phase * ph).apply(a);
        }
        Ok(())
    }

    /// `e^{iθP}|ψ⟩ = (cos θ + i sin θ P)|ψ⟩`.
    pub fn apply_pauli_rotation(&self, p: &PauliString, theta: f64) -> Result<Self> {
        let mut out = self.clone();
        out.apply_pauli_rotation_mut(p, theta)?;
        Ok(out)
    }

    pub fn apply_pauli_rotation_mut(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        self.check(p.n_qubits())?;
        if !theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        if theta == 0.0 {
            return Ok(());
        }
        let (s, c) = theta.sin_cos();
        let src = self.amps.clone();
        for a in &mut self.amps {
            *a *= c;
        }
        for (b, a) in src.into_iter().enumerate() {
            let (ph, target) = p.basis_action(b as u64);
            self.amps[target as usize] += Phase::I.apply(ph.apply(a)) * s;
        }
        Ok(())
    }

    /// Apply factors in order, merging runs of Pauli factors into one string.
    pub fn apply_factors(&mut self, factors: &[Factor]) -> Result<()> {
        let mut pending: Option<(Phase, PauliString)> = None;
        for f in factors {
            match f {
                Factor::Pauli(p) => {
                    self.check(p.n_qubits())?;
                    pending = Some(match pending {
                        None => (Phase::ONE, *p),
                        Some((ph, acc)) => {
                            let (k, prod) = p.mul_unchecked(&acc);
                            (ph * k, prod)
                        }
                    });
                }
                Factor::Rotation(p, theta) => {
                    if let Some((ph, acc)) = pending.take() {
                        self.apply_pauli_mut(&acc, ph)?;
                    }
                    self.apply_pauli_rotation_mut(p, *theta)?;
                }
            }
        }
        if let Some((ph, acc)) = pending {
            self.apply_pauli_mut(&acc, ph)?;
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check(other.n_qubits)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `⟨ψ|U|ψ⟩` for the factor product of `u`. The sampled phase is not
    /// included; multiply by `u.phase()` for the phased value.
    pub fn expectation(&self, u: &SampledUnitary) -> Result<Complex64> {
        self.check(u.n_qubits())?;
        let mut work = self.clone();
        work.apply_factors(u.factors())?;
        self.inner(&work)
    }
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(invalid("n_qubits", "must be positive"));
    }
    if n_qubits > MAX_EMULATED_QUBITS {
        return Err(Error::TooManyQubits {
            n: n_qubits,
            max: MAX_EMULATED_QUBITS,
        });
    }
    Ok(())
}

/// Dense `2ⁿ×2ⁿ` matrix of `Σ α_l P_l`.
pub fn dense_hamiltonian(h: &PauliSum) -> Result<DMatrix<Complex64>> {
    let n = h.n_qubits();
    check_register(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for term in h.terms() {
        for b in 0..dim {
            let (ph, target) = term.string.basis_action(b as u64);
            m[(target as usize, b)] += ph.to_complex() * term.coefficient;
        }
    }
    Ok(m)
}

/// Full eigendecomposition with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n_qubits: usize,
    eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    eigenvectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        let amps = self.eigenvectors.column(k).iter().copied().collect();
        StateVector::normalized(self.n_qubits, amps).expect("eigenvectors have unit norm")
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Number of eigenvalues within [`DEGENERACY_TOL`] of the minimum.
    pub fn ground_degeneracy(&self) -> usize {
        let e0 = self.eigenvalues[0];
        self.eigenvalues
            .iter()
            .take_while(|&&e| e - e0 < DEGENERACY_TOL)
            .count()
    }

    /// Overlaps `p_k = |⟨ψ_k|φ⟩|²` of `state` against every eigenvector.
    pub fn reference(&self, state: &StateVector) -> Result<SpectralReference> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: state.n_qubits(),
            });
        }
        let overlaps = (0..self.eigenvalues.len())
            .map(|k| {
                self.eigenvectors
                    .column(k)
                    .iter()
                    .zip(state.amplitudes())
                    .map(|(v, a)| v.conj() * a)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect();
        SpectralReference::new(self.eigenvalues.clone(), overlaps)
    }
}

pub fn diagonalize(h: &PauliSum) -> Result<Spectrum> {
    diagonalize_with_cap(h, DEFAULT_DIAG_CAP)
}

pub fn diagonalize_with_cap(h: &PauliSum, cap: usize) -> Result<Spectrum> {
    let n = h.n_qubits();
    if n > cap {
        return Err(Error::DiagonalizationCap { n, cap });
    }
    let m = dense_hamiltonian(h)?;
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = eig.eigenvectors.select_columns(&order);
    Ok(Spectrum {
        n_qubits: n,
        eigenvalues,
        eigenvectors,
    })
}

/// `√η|ψ₀⟩ + √(1−η)|ψ⊥⟩` with `ψ⊥` a seeded random unit vector orthogonal to
/// the whole ground eigenspace.
pub fn make_trial_state(h: &PauliSum, eta: f64, seed: u64) -> Result<StateVector> {
    trial_state(&diagonalize(h)?, eta, seed)
}

/// As [`make_trial_state`] on an existing decomposition.
pub fn trial_state(spectrum: &Spectrum, eta: f64, seed: u64) -> Result<StateVector> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid("eta", format!("must lie in (0, 1], got {eta}")));
    }
    let n = spectrum.n_qubits;
    let g = spectrum.ground_degeneracy();
    if g > 1 {
        log::warn!(
            "ground energy is {g}-fold degenerate; using the first ground eigenvector \
             and keeping the orthogonal part outside the whole ground space"
        );
    }
    let psi0 = spectrum.eigenvector(0);
    if eta == 1.0 {
        return Ok(psi0);
    }
    let dim = 1usize << n;
    if g == dim {
        return Err(invalid(
            "eta",
            "the ground space fills the register, no orthogonal state exists",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| {
            Complex64::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            )
        })
        .collect();
    // two Gram-Schmidt passes against the ground space
    for _ in 0..2 {
        for k in 0..g {
            let col = spectrum.eigenvectors.column(k);
            let c: Complex64 = col.iter().zip(&v).map(|(e, a)| e.conj() * a).sum();
            for (a, e) in v.iter_mut().zip(col.iter()) {
                *a -= c * e;
            }
        }
    }
    let perp = StateVector::normalized(n, v)?;
    let (a, b) = (eta.sqrt(), (1.0 - eta).sqrt());
    let amps = psi0
        .amplitudes()
        .iter()
        .zip(perp.amplitudes())
        .map(|(x, y)| x * a + y * b)
        .collect();
    StateVector::normalized(n, amps)
}

/// Point spectrum `{(β_k, p_k)}` seen by a trial state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReference {
    eigenvalues: Vec<f64>,
    overlaps: Vec<f64>,
}

impl SpectralReference {
    /// Eigenvalues are sorted ascending (carrying their overlaps along).
    pub fn new(eigenvalues: Vec<f64>, overlaps: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != overlaps.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                actual: overlaps.len(),
            });
        }
        if overlaps
            .iter()
            .any(|p| !(*p >= -NORM_TOL && *p <= 1.0 + NORM_TOL))
        {
            return Err(invalid("overlaps", "must lie in [0, 1]"));
        }
        let total: f64 = overlaps.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(invalid("overlaps", format!("sum to {total}, not 1")));
        }
        let mut pairs: Vec<(f64, f64)> = eigenvalues.into_iter().zip(overlaps).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            eigenvalues: pairs.iter().map(|p| p.0).collect(),
            overlaps: pairs.iter().map(|p| p.1.clamp(0.0, 1.0)).collect(),
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn overlaps(&self) -> &[f64] {
        &self.overlaps
    }

    /// Number of spectral points `K`.
    pub fn project_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Total weight on eigenvalues within [`DEGENERACY_TOL`] of the minimum.
    pub fn ground_weight(&self) -> f64 {
        let e0 = self.eigenvalues[0];
        self.eigenvalues
            .iter()
            .zip(&self.overlaps)
            .take_while(|(e, _)| **e - e0 < DEGENERACY_TOL)
            .map(|(_, p)| p)
            .sum()
    }
}

/// `C(x) = Σ_{τβ_k ≤ x} p_k`.
pub fn exact_cdf(reference: &SpectralReference, tau: f64, x: f64) -> f64 {
    reference
        .eigenvalues
        .iter()
        .zip(&reference.overlaps)
        .filter(|(e, _)| tau * **e <= x)
        .map(|(_, p)| p)
        .sum::<f64>()
        .min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{normalize_hamiltonian, PauliTerm};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ham(terms: &[(f64, &str)]) -> PauliSum {
        normalize_hamiltonian(
            terms
                .iter()
                .map(|&(c, s)| PauliTerm::parse(c, s).unwrap())
                .collect(),
            0.05,
        )
        .unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn single_qubit_actions() {
        let zero = StateVector::basis(1, 0).unwrap();
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(
            zero.apply_pauli(&x, Phase::ONE).unwrap(),
            StateVector::basis(1, 1).unwrap()
        );
        assert_eq!(zero.apply_pauli(&z, Phase::ONE).unwrap(), zero);
        let r = zero.apply_pauli_rotation(&z, 0.3).unwrap();
        assert!(close(
            r.amplitudes(),
            &[c(0.3f64.cos(), 0.3f64.sin()), c(0.0, 0.0)],
            1e-15
        ));
        assert_eq!(zero.apply_pauli_rotation(&x, 0.0).unwrap(), zero);
    }

    #[test]
    fn merged_factors_match_sequential_application() {
        let psi = StateVector::normalized(
            2,
            vec![c(0.1, 0.4), c(-0.3, 0.2), c(0.5, -0.1), c(0.2, 0.6)],
        )
        .unwrap();
        let a: PauliString = "XY".parse().unwrap();
        let b: PauliString = "ZX".parse().unwrap();
        let r: PauliString = "YZ".parse().unwrap();
        let factors = vec![
            Factor::Pauli(a),
            Factor::Pauli(b),
            Factor::Rotation(r, 0.4),
            Factor::Pauli(b),
        ];
        let mut merged = psi.clone();
        merged.apply_factors(&factors).unwrap();
        let seq = psi
            .apply_pauli(&a, Phase::ONE)
            .unwrap()
            .apply_pauli(&b, Phase::ONE)
            .unwrap()
            .apply_pauli_rotation(&r, 0.4)
            .unwrap()
            .apply_pauli(&b, Phase::ONE)
            .unwrap();
        assert!(close(merged.amplitudes(), seq.amplitudes(), 1e-14));
        assert!((merged.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_of_simple_unitaries() {
        let z: PauliString = "Z".parse().unwrap();
        let id = SampledUnitary::identity(1);
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(zero.expectation(&id).unwrap(), c(1.0, 0.0));
        let u = SampledUnitary::from_parts(1, vec![Factor::Pauli(z)], Phase::ONE);
        assert_eq!(zero.expectation(&u).unwrap(), c(1.0, 0.0));
        assert_eq!(one.expectation(&u).unwrap(), c(-1.0, 0.0));
    }

    #[test]
    fn case1_spectrum() {
        let h = ham(&[(0.2, "IIZ"), (0.1, "ZIX"), (0.15, "IZI"), (0.25, "IZZ")]);
        let s = diagonalize(&h).unwrap();
        let want = [
            -0.310_977, -0.310_977, -0.261_803, -0.261_803, -0.038_197, -0.038_197, 0.610_977,
            0.610_977,
        ];
        for (a, b) in s.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-6);
        }
        assert_eq!(s.ground_degeneracy(), 2);
    }

    #[test]
    fn trial_state_overlap() {
        let h = ham(&[(0.2, "IIZ"), (0.1, "ZIX"), (0.15, "IZI"), (0.25, "IZZ")]);
        let s = diagonalize(&h).unwrap();
        for (eta, seed) in [(0.25, 1), (0.1, 9), (0.7, 3)] {
            let phi = trial_state(&s, eta, seed).unwrap();
            let ov = s.eigenvector(0).inner(&phi).unwrap().norm_sqr();
            assert!((ov - eta).abs() < 1e-10);
            let r = s.reference(&phi).unwrap();
            assert!((r.ground_weight() - eta).abs() < 1e-10);
            assert!((r.overlaps().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        let exact = trial_state(&s, 1.0, 0).unwrap();
        assert!((s.eigenvector(0).inner(&exact).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(trial_state(&s, 0.0, 0).is_err());
        assert!(trial_state(&s, 1.5, 0).is_err());
    }

    #[test]
    fn cdf_steps() {
        let r = SpectralReference::new(vec![0.5, -1.0, 2.0], vec![0.5, 0.25, 0.25]).unwrap();
        assert_eq!(r.eigenvalues(), &[-1.0, 0.5, 2.0]);
        let tau = 0.5;
        assert_eq!(exact_cdf(&r, tau, -0.6), 0.0);
        assert_eq!(exact_cdf(&r, tau, -0.5), 0.25);
        assert_eq!(exact_cdf(&r, tau, 0.3), 0.75);
        assert_eq!(exact_cdf(&r, tau, 1.0), 1.0);
        assert!(SpectralReference::new(vec![0.0], vec![0.5]).is_err());
    }

    #[test]
    fn diagonalization_cap() {
        let h = ham(&[(1.0, "ZZZZZ")]);
        assert!(matches!(
            diagonalize_with_cap(&h, 4),
            Err(Error::DiagonalizationCap { n: 5, cap: 4 })
        ));
    }
}
