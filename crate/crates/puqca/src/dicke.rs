//! Dicke states and the block-unitary construction that classifies
//! density by a single-site measurement.
//!
//! A Dicke state spreads one excitation count uniformly over the ring,
//! so every site carries marginal i/n; attaching relative phases keeps
//! the marginals and yields an orthonormal family, one state per basis
//! vector of the weight-i sector. Stacking those families into a
//! block-diagonal unitary maps any classical input to a state whose
//! single-site readout answers the majority question, at every site.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::Configuration;
use crate::statevector::{binomial, excitation_probability, weight_words, StateVector};
use crate::{Error, Result};

/// Uniform superposition of all weight-i basis states.
pub fn dicke_state(n: usize, i: usize) -> Result<StateVector> {
    if n < 2 || n > 24 {
        return Err(Error::SizeCap(n, 24));
    }
    if i > n {
        return Err(Error::InvalidArgument(format!(
            "excitation count {i} exceeds {n} sites"
        )));
    }
    generalized_dicke(n, i, 0)
}

/// Probability of finding an excitation at site p: i/n regardless of p.
pub fn dicke_marginal(n: usize, i: usize, p: usize) -> Result<f64> {
    if p >= n {
        return Err(Error::SiteRange(p, n));
    }
    if i > n {
        return Err(Error::InvalidArgument(format!(
            "excitation count {i} exceeds {n} sites"
        )));
    }
    Ok(i as f64 / n as f64)
}

/// Dicke state with relative phase e^{i2πkj/C(n,i)} on the j-th weight-i
/// word (lexicographic order). k = 0 recovers the plain Dicke state;
/// distinct k are orthonormal and share the same single-site marginals.
pub fn generalized_dicke(n: usize, i: usize, k: usize) -> Result<StateVector> {
    if n < 2 || n > 24 {
        return Err(Error::SizeCap(n, 24));
    }
    let dim = binomial(n, i) as usize;
    if i > n || k >= dim {
        return Err(Error::InvalidArgument(format!(
            "phase index {k} out of range for a {dim}-dimensional sector"
        )));
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let mut amps = vec![Complex64::ZERO; 1 << n];
    for (j, word) in weight_words(n, i).into_iter().enumerate() {
        let phase = std::f64::consts::TAU * (k as f64) * (j as f64) / dim as f64;
        amps[word as usize] = Complex64::from_polar(scale, phase);
    }
    Ok(StateVector::from_amplitudes(n, amps))
}

/// Cap on the sector dimension handled by [`block_unitary`].
pub const BLOCK_DIMENSION_CAP: usize = 4096;

/// The weight-i block U^{(i)}: column k holds generalized_dicke(n,i,k)
/// restricted to the sector, i.e. the C(n,i)-point Fourier matrix over
/// the lexicographic sector basis.
pub fn block_unitary(n: usize, i: usize) -> Result<DMatrix<Complex64>> {
    if i > n {
        return Err(Error::InvalidArgument(format!(
            "excitation count {i} exceeds {n} sites"
        )));
    }
    let dim = binomial(n, i) as usize;
    if dim > BLOCK_DIMENSION_CAP {
        return Err(Error::Dimension(format!(
            "sector dimension {dim} exceeds the {BLOCK_DIMENSION_CAP} cap"
        )));
    }
    let scale = 1.0 / (dim as f64).sqrt();
    Ok(DMatrix::from_fn(dim, dim, |j, k| {
        let phase = std::f64::consts::TAU * (k as f64) * (j as f64) / dim as f64;
        Complex64::from_polar(scale, phase)
    }))
}

/// Outcome of the single-map existence check.
#[derive(Debug, Clone)]
pub struct ExistenceReport {
    pub n: usize,
    /// Valid (non-half-density) inputs examined.
    pub inputs_checked: usize,
    /// Largest per-block deviation of U†U from the identity.
    pub unitarity_error: f64,
    /// Human-readable descriptions of every violation found.
    pub violations: Vec<String>,
}

impl ExistenceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Applies the assembled block unitary to every valid input and checks
/// that one measured site — any site — recovers the majority. The map is
/// applied directly, sector by sector; no circuit form is claimed.
pub fn verify_existence(n: usize) -> Result<ExistenceReport> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::OddSize(n));
    }
    if n > 10 {
        return Err(Error::SizeCap(n, 10));
    }
    let mut violations = Vec::new();
    let mut unitarity_error: f64 = 0.0;
    // Blocks partition the computational basis by weight, so per-block
    // unitarity is global unitarity and number conservation holds by
    // construction; both are still measured rather than assumed.
    for i in 0..=n {
        let u = block_unitary(n, i)?;
        let dim = u.ncols();
        let gram = u.adjoint() * &u;
        let err = (gram - DMatrix::<Complex64>::identity(dim, dim)).camax();
        unitarity_error = unitarity_error.max(err);
        if err > 1e-10 {
            violations.push(format!("weight-{i} block deviates from unitarity by {err:.3e}"));
        }
    }
    let mut inputs_checked = 0;
    for word in 0..(1u64 << n) {
        let b = Configuration::from_word(word, n)?;
        let i = b.weight() as usize;
        if 2 * i == n {
            continue;
        }
        inputs_checked += 1;
        // U|b⟩ is the generalized Dicke state whose phase index is b's
        // rank within its sector.
        let words = weight_words(n, i);
        let rank = words.iter().position(|&w| w == word).expect("word in sector");
        let psi = generalized_dicke(n, i, rank)?;
        let want = crate::dct::majority(&b);
        for p in 0..n {
            let pr = excitation_probability(&psi, p);
            let got = crate::dct::guess_from_probability(pr, 0.0);
            if got != want {
                violations.push(format!(
                    "input {b} read at site {p}: probability {pr:.6} guesses {got}, majority {want}"
                ));
            }
        }
    }
    Ok(ExistenceReport {
        n,
        inputs_checked,
        unitarity_error,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn inner(a: &StateVector, b: &StateVector) -> Complex64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    #[test]
    fn plain_dicke_states() {
        let vac = dicke_state(4, 0).unwrap();
        assert_eq!(vac.amplitudes()[0], Complex64::ONE);
        assert_eq!(vac.amplitudes()[1..].iter().map(|a| a.norm()).sum::<f64>(), 0.0);

        let one = dicke_state(4, 1).unwrap();
        for word in [1usize, 2, 4, 8] {
            assert_abs_diff_eq!(one.amplitudes()[word].re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(one.amplitudes()[word].im, 0.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(one.norm(), 1.0, epsilon = 1e-12);

        let two = dicke_state(6, 2).unwrap();
        let nonzero: Vec<f64> = two
            .amplitudes()
            .iter()
            .filter(|a| a.norm() > 0.0)
            .map(|a| a.re)
            .collect();
        assert_eq!(nonzero.len(), 15);
        for a in nonzero {
            assert_abs_diff_eq!(a, 1.0 / 15f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn marginals_are_density() {
        for (n, i, want) in [(4, 1, 0.25), (6, 4, 2.0 / 3.0), (8, 0, 0.0)] {
            for p in 0..n {
                let m = dicke_marginal(n, i, p).unwrap();
                assert_eq!(m, want);
                let pr = excitation_probability(&dicke_state(n, i).unwrap(), p);
                assert_abs_diff_eq!(pr, m, epsilon = 1e-12);
            }
        }
        assert!(dicke_marginal(4, 1, 4).is_err());
    }

    #[test]
    fn phase_states() {
        let base = dicke_state(4, 1).unwrap();
        let k0 = generalized_dicke(4, 1, 0).unwrap();
        assert_eq!(base.amplitudes(), k0.amplitudes());

        // Phases 1, i, -1, -i across the four weight-1 words 0001..1000.
        let k1 = generalized_dicke(4, 1, 1).unwrap();
        let expect = [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, -0.5),
        ];
        for (word, want) in [1usize, 2, 4, 8].into_iter().zip(expect) {
            let got = k1.amplitudes()[word];
            assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-12);
            assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-12);
        }

        // Marginals ignore the phases.
        for k in 0..15 {
            let psi = generalized_dicke(6, 2, k).unwrap();
            for p in 0..6 {
                assert_abs_diff_eq!(excitation_probability(&psi, p), 1.0 / 3.0, epsilon = 1e-12);
            }
        }
        assert!(generalized_dicke(6, 2, 15).is_err());
    }

    #[test]
    fn phase_states_are_orthonormal() {
        for (n, i) in [(6, 2), (8, 3)] {
            let dim = binomial(n, i) as usize;
            let states: Vec<StateVector> = (0..dim)
                .map(|k| generalized_dicke(n, i, k).unwrap())
                .collect();
            for a in 0..dim {
                for b in a..dim {
                    let ip = inner(&states[a], &states[b]);
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(ip.re, want, epsilon = 1e-12);
                    assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn blocks_are_fourier_matrices() {
        // Weight-1 block is the n-point discrete Fourier matrix.
        let n = 6;
        let u = block_unitary(n, 1).unwrap();
        let scale = 1.0 / (n as f64).sqrt();
        for j in 0..n {
            for k in 0..n {
                let want = Complex64::from_polar(
                    scale,
                    std::f64::consts::TAU * (j * k) as f64 / n as f64,
                );
                let got = u[(j, k)];
                assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-12);
                assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-12);
            }
        }

        let u = block_unitary(6, 2).unwrap();
        let gram = u.adjoint() * &u;
        let err = (gram - DMatrix::<Complex64>::identity(15, 15)).camax();
        assert!(err < 1e-12, "gram deviation {err}");

        // Columns are the phase states, restricted to the sector.
        let words = weight_words(6, 2);
        for k in 0..15 {
            let psi = generalized_dicke(6, 2, k).unwrap();
            for (j, &w) in words.iter().enumerate() {
                let amp = psi.amplitudes()[w as usize];
                let got = u[(j, k)];
                assert_abs_diff_eq!(got.re, amp.re, epsilon = 1e-12);
                assert_abs_diff_eq!(got.im, amp.im, epsilon = 1e-12);
            }
        }

        // Column marginals at weight 3 of 8.
        let words = weight_words(8, 3);
        let u = block_unitary(8, 3).unwrap();
        for k in [0usize, 7, 41] {
            let mut amps = vec![Complex64::ZERO; 1 << 8];
            for (j, &w) in words.iter().enumerate() {
                amps[w as usize] = u[(j, k)];
            }
            let psi = StateVector::from_amplitudes(8, amps);
            for p in 0..8 {
                assert_abs_diff_eq!(excitation_probability(&psi, p), 3.0 / 8.0, epsilon = 1e-12);
            }
        }

        assert!(block_unitary(24, 12).is_err());
    }

    #[test]
    fn existence_check_passes() {
        for (n, valid) in [(4usize, 10usize), (6, 44)] {
            let report = verify_existence(n).unwrap();
            assert!(report.passed(), "violations: {:?}", report.violations);
            assert_eq!(report.inputs_checked, valid);
            assert!(report.unitarity_error < 1e-12);
        }
        assert!(verify_existence(5).is_err());
        assert!(verify_existence(12).is_err());
    }
}
