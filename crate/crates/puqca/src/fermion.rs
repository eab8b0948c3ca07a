//! The number-conserving free-fermion path: when both gates have α = 0
//! and φ = 0 the automaton's action on occupation observables reduces to
//! an n×n single-particle propagator, block-diagonalized by a Fourier
//! transform over cell pairs into n/2 independent 2×2 momentum blocks.
//! Readout probabilities then cost O(n²) per input instead of 2^n.
//!
//! Boundary subtlety: mapping the ring of qubits to fermions makes the
//! wrap-around bond's sign depend on total particle-number parity. Odd
//! occupation gives the plain periodic propagator (integer momenta);
//! even occupation needs the antiperiodic one (half-integer momenta).
//! [`Boundary::WeightParity`] picks the right grid per input and is the
//! default everywhere; the fixed grids remain available because some of
//! the embedded reference tables were evidently produced with the
//! periodic formula applied to every sector.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::dct::{self, ClassifierSpec, FitnessReport};
use crate::model::{Configuration, FermionRule, GateParams, PUQCARule};
use crate::{Error, Result};

type C64 = Complex64;

const SIMULABLE_TOLERANCE: f64 = 1e-12;

/// One layer's single-particle action: the 2×2 unitary [[a,b],[−b*,a*]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleParticleBlock {
    pub a: C64,
    pub b: C64,
}

impl SingleParticleBlock {
    /// Block for angles (θ, ξ, γ): a = e^{iξ}cosθ, b = e^{iγ}sinθ.
    pub fn from_angles(theta: f64, xi: f64, gamma: f64) -> Self {
        Self {
            a: C64::from_polar(1.0, xi) * theta.cos(),
            b: C64::from_polar(1.0, gamma) * theta.sin(),
        }
    }

    pub fn matrix(&self) -> Matrix2<C64> {
        Matrix2::new(self.a, self.b, -self.b.conj(), self.a.conj())
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() - 1.0).abs()
    }
}

/// Which momentum grid the propagator is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Integer momenta for odd particle number, half-integer for even —
    /// the grid the spin chain actually induces. Default.
    #[default]
    WeightParity,
    /// Integer momenta for every sector (exact only at odd occupation).
    Periodic,
    /// Half-integer momenta for every sector.
    Antiperiodic,
}

impl Boundary {
    /// Momentum-grid offset (0 or 1 half-step) for a given occupation.
    fn twist(self, occupied: usize) -> usize {
        match self {
            Boundary::WeightParity => 1 - occupied % 2,
            Boundary::Periodic => 0,
            Boundary::Antiperiodic => 1,
        }
    }
}

/// Occupied fermionic modes, labeled (cell, subcell) with cell = site/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationSet {
    n: usize,
    labels: Vec<(usize, usize)>,
}

impl OccupationSet {
    pub fn new(n: usize, labels: Vec<(usize, usize)>) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::OddSize(n));
        }
        let mut seen = std::collections::HashSet::new();
        for &(cs, cp) in &labels {
            if cs >= n / 2 || cp >= 2 {
                return Err(Error::InvalidArgument(format!(
                    "mode ({cs},{cp}) out of range for {n} sites"
                )));
            }
            if !seen.insert((cs, cp)) {
                return Err(Error::InvalidArgument(format!(
                    "mode ({cs},{cp}) listed twice"
                )));
            }
        }
        Ok(Self { n, labels })
    }

    /// The modes occupied by a classical configuration.
    pub fn from_configuration(b: &Configuration) -> Self {
        let labels = b.occupied_sites().into_iter().map(site_label).collect();
        Self { n: b.n(), labels }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[(usize, usize)] {
        &self.labels
    }
}

/// Site index p as the (cell, subcell) pair (p div 2, p mod 2).
pub fn site_label(p: usize) -> (usize, usize) {
    (p / 2, p % 2)
}

/// The two-site gate generated by the hopping Hamiltonian with coupling
/// J, hopping phase θ, and on-site fields h1 (left), h2 (right), run for
/// time τ. Closed form of e^{−ihτ}; the matrix exponential is the test
/// oracle.
pub fn gate_from_hamiltonian(j: f64, theta: f64, h1: f64, h2: f64, tau: f64) -> [[C64; 4]; 4] {
    let phi = (h1 + h2) * tau;
    let r = (h1 - h2).hypot(j);
    let omega = tau * r;
    let (cos_beta, sin_beta) = if r > 0.0 {
        ((h1 - h2) / r, j / r)
    } else {
        (0.0, 0.0)
    };
    let (sin_o, cos_o) = omega.sin_cos();
    let mut w = [[C64::ZERO; 4]; 4];
    w[0][0] = C64::from_polar(1.0, -phi);
    w[3][3] = C64::from_polar(1.0, phi);
    w[1][1] = C64::new(cos_o, -cos_beta * sin_o);
    w[2][2] = C64::new(cos_o, cos_beta * sin_o);
    let hop = C64::new(0.0, -sin_beta * sin_o);
    w[1][2] = hop * C64::from_polar(1.0, theta);
    w[2][1] = hop * C64::from_polar(1.0, -theta);
    w
}

/// The 4×4 hopping Hamiltonian behind [`gate_from_hamiltonian`].
pub fn hopping_hamiltonian(j: f64, theta: f64, h1: f64, h2: f64) -> DMatrix<C64> {
    let mut h = DMatrix::zeros(4, 4);
    h[(0, 0)] = C64::new(h1 + h2, 0.0);
    h[(1, 1)] = C64::new(h1 - h2, 0.0);
    h[(2, 2)] = C64::new(h2 - h1, 0.0);
    h[(3, 3)] = C64::new(-h1 - h2, 0.0);
    h[(1, 2)] = C64::from_polar(j, theta);
    h[(2, 1)] = C64::from_polar(j, -theta);
    h
}

/// e^{−ihτ} for Hermitian h, via eigendecomposition.
pub fn quadratic_propagator(h: &DMatrix<C64>, tau: f64) -> Result<DMatrix<C64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "propagator needs a square matrix, got {}×{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let defect = (h - h.adjoint()).camax();
    if defect > 1e-12 {
        return Err(Error::NotHermitian(defect));
    }
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|lambda| C64::from_polar(1.0, -lambda * tau)),
    );
    Ok(&eig.eigenvectors * phases * eig.eigenvectors.adjoint())
}

fn rule_blocks(fr: &FermionRule) -> (SingleParticleBlock, SingleParticleBlock) {
    (
        SingleParticleBlock::from_angles(fr.theta1, fr.xi1, fr.gamma1),
        SingleParticleBlock::from_angles(fr.theta2, fr.xi2, fr.gamma2),
    )
}

fn block_diagonal(n: usize, block: &SingleParticleBlock) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    let b = block.matrix();
    for c in 0..n / 2 {
        m[(2 * c, 2 * c)] = b[(0, 0)];
        m[(2 * c, 2 * c + 1)] = b[(0, 1)];
        m[(2 * c + 1, 2 * c)] = b[(1, 0)];
        m[(2 * c + 1, 2 * c + 1)] = b[(1, 1)];
    }
    m
}

/// Conjugation by the cyclic shift X = Σ|j⟩⟨j+1|, with an optional sign
/// twist on the wrap-around entry (the antiperiodic boundary).
fn shift_conjugate(m: &DMatrix<C64>, twist: usize) -> DMatrix<C64> {
    let n = m.nrows();
    let sign = |i: usize| if twist == 1 && i == n - 1 { -1.0 } else { 1.0 };
    DMatrix::from_fn(n, n, |i, j| {
        sign(i) * sign(j) * m[((i + 1) % n, (j + 1) % n)]
    })
}

/// The even- and odd-layer single-particle propagators (A_e, A_o) on n
/// modes with the plain periodic wrap.
pub fn layers(fr: &FermionRule, n: usize) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    layers_with(fr, n, 0)
}

fn layers_with(fr: &FermionRule, n: usize, twist: usize) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::OddSize(n));
    }
    let (b1, b2) = rule_blocks(fr);
    let a_e = block_diagonal(n, &b1);
    let a_o = shift_conjugate(&block_diagonal(n, &b2), twist);
    Ok((a_e, a_o))
}

/// Dense one-step propagator 𝔸 = A_o·A_e on the chosen momentum grid
/// (twist 0 = periodic, 1 = antiperiodic). Oracle for the momentum path.
pub fn dense_propagator(fr: &FermionRule, n: usize, twist: usize) -> Result<DMatrix<C64>> {
    let (a_e, a_o) = layers_with(fr, n, twist)?;
    Ok(a_o * a_e)
}

/// 2×2 momentum blocks M(k), k = 0…n/2−1, on the plain periodic grid.
pub fn momentum_blocks(fr: &FermionRule, n: usize) -> Result<Vec<Matrix2<C64>>> {
    momentum_blocks_with(fr, n, 0)
}

/// Momentum blocks on the grid with the given half-step offset: block k
/// carries ω = e^{i2π(2k+twist)/n}.
pub fn momentum_blocks_with(fr: &FermionRule, n: usize, twist: usize) -> Result<Vec<Matrix2<C64>>> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::OddSize(n));
    }
    let (b1, b2) = rule_blocks(fr);
    let (a1, b1) = (b1.a, b1.b);
    let (a2, b2) = (b2.a, b2.b);
    Ok((0..n / 2)
        .map(|k| {
            let omega = C64::from_polar(
                1.0,
                std::f64::consts::TAU * (2 * k + twist) as f64 / n as f64,
            );
            let omega_c = omega.conj();
            Matrix2::new(
                a2.conj() * a1 + b2.conj() * b1.conj() * omega_c,
                a2.conj() * b1 - b2.conj() * a1.conj() * omega_c,
                a1 * b2 * omega - a2 * b1.conj(),
                b2 * b1 * omega + a2 * a1.conj(),
            )
        })
        .collect())
}

/// M^t for a unitary 2×2 block, by spectral decomposition; exact and
/// stable for any step count.
pub fn block_power(m: &Matrix2<C64>, t: usize) -> Matrix2<C64> {
    if t == 0 {
        return Matrix2::identity();
    }
    if t == 1 {
        return *m;
    }
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let power = |lambda: C64| C64::from_polar(lambda.norm().powi(t as i32), t as f64 * lambda.arg());
    if disc.norm() < 1e-9 {
        // Unitary ⇒ normal, so a (near-)degenerate block is (near-)scalar.
        let lambda = tr / 2.0;
        return Matrix2::identity() * power(lambda);
    }
    let lp = (tr + disc) / 2.0;
    let lm = (tr - disc) / 2.0;
    let id = Matrix2::identity();
    let proj_p = (m - id * lm) / disc;
    let proj_m = (id * lp - m) / disc;
    proj_p * power(lp) + proj_m * power(lm)
}

/// Rebuilds the dense t-step propagator from momentum blocks:
/// (F⊗I₂)(⊕M(k)^t)(F†⊗I₂) with F the cell-space Fourier transform on
/// the same grid. Used to pin conventions against [`dense_propagator`].
pub fn assemble_propagator(blocks: &[Matrix2<C64>], n: usize, twist: usize, t: usize) -> DMatrix<C64> {
    let cells = n / 2;
    let scale = 1.0 / cells as f64;
    let powers: Vec<Matrix2<C64>> = blocks.iter().map(|m| block_power(m, t)).collect();
    DMatrix::from_fn(n, n, |row, col| {
        let (js, jp) = (row / 2, row % 2);
        let (cs, cp) = (col / 2, col % 2);
        let mut sum = C64::ZERO;
        for (k, mk) in powers.iter().enumerate() {
            let phase = std::f64::consts::TAU * (2 * k + twist) as f64 * (js as f64 - cs as f64)
                / n as f64;
            sum += C64::from_polar(1.0, phase) * mk[(jp, cp)];
        }
        sum * scale
    })
}

/// Probability of finding an excitation at `site` after t steps from the
/// classical configuration occupying `set`, via the momentum-space sum.
pub fn occupation_probability(
    fr: &FermionRule,
    n: usize,
    t: usize,
    set: &OccupationSet,
    site: (usize, usize),
) -> Result<f64> {
    occupation_probability_with(fr, n, t, set, site, Boundary::default())
}

pub fn occupation_probability_with(
    fr: &FermionRule,
    n: usize,
    t: usize,
    set: &OccupationSet,
    site: (usize, usize),
    boundary: Boundary,
) -> Result<f64> {
    if set.n() != n {
        return Err(Error::Dimension(format!(
            "occupation set is for {} sites, propagator for {n}",
            set.n()
        )));
    }
    let (js, jp) = site;
    if js >= n / 2 || jp >= 2 {
        return Err(Error::SiteRange(2 * js + jp, n));
    }
    let twist = boundary.twist(set.len());
    let blocks = momentum_blocks_with(fr, n, twist)?;
    let powers: Vec<Matrix2<C64>> = blocks.iter().map(|m| block_power(m, t)).collect();
    Ok(probability_from_powers(&powers, n, set, js, jp))
}

/// Σ_{c∈S} |u_c|² with u_c = (2/n) Σ_k e^{i4πk(j_s−c_s)/n} ⟨j_p|M(k)^t|c_p⟩.
/// The grid's half-step offset contributes only a per-c global phase, so
/// it drops out of the modulus and only the blocks carry the twist.
fn probability_from_powers(
    powers: &[Matrix2<C64>],
    n: usize,
    set: &OccupationSet,
    js: usize,
    jp: usize,
) -> f64 {
    let scale = 2.0 / n as f64;
    set.labels()
        .iter()
        .map(|&(cs, cp)| {
            let mut u = C64::ZERO;
            for (k, mk) in powers.iter().enumerate() {
                let phase = std::f64::consts::TAU * 2.0 * k as f64 * (js as f64 - cs as f64)
                    / n as f64;
                u += C64::from_polar(1.0, phase) * mk[(jp, cp)];
            }
            (scale * u.norm()).powi(2)
        })
        .sum()
}

/// Single-particle block of a gate in the simulable regime (α = φ = 0).
pub fn gate_fermion_correspondence(g: &GateParams) -> Result<SingleParticleBlock> {
    if !g.is_simulable(SIMULABLE_TOLERANCE) {
        return Err(Error::NotSimulable(format!(
            "gate has alpha = {:.3e}, phi = {:.3e}; both must vanish",
            g.alpha, g.phi
        )));
    }
    Ok(SingleParticleBlock::from_angles(g.theta, g.xi, g.gamma))
}

/// Six-angle form of a simulable eight-angle rule.
pub fn fermion_rule_from(rule: &PUQCARule) -> Result<FermionRule> {
    gate_fermion_correspondence(&rule.w0)?;
    gate_fermion_correspondence(&rule.w1)?;
    Ok(FermionRule::new(
        rule.w0.theta,
        rule.w0.xi,
        rule.w0.gamma,
        rule.w1.theta,
        rule.w1.xi,
        rule.w1.gamma,
    ))
}

/// Exact fitness with probabilities from the momentum-space path.
pub fn fermion_fitness(fr: &FermionRule, spec: &ClassifierSpec) -> Result<FitnessReport> {
    fermion_fitness_with(fr, spec, Boundary::default())
}

pub fn fermion_fitness_with(
    fr: &FermionRule,
    spec: &ClassifierSpec,
    boundary: Boundary,
) -> Result<FitnessReport> {
    let configs = dct::enumerate_valid(spec.n)?;
    fermion_fitness_over(fr, spec, &configs, boundary)
}

pub fn fermion_fitness_over(
    fr: &FermionRule,
    spec: &ClassifierSpec,
    configs: &[Configuration],
    boundary: Boundary,
) -> Result<FitnessReport> {
    let (js, jp) = site_label(spec.p);
    // Two grids at most; build each block-power set once.
    let mut powers: [Option<Vec<Matrix2<C64>>>; 2] = [None, None];
    for twist in 0..2 {
        if configs.iter().any(|b| boundary.twist(b.weight() as usize) == twist) {
            let blocks = momentum_blocks_with(fr, spec.n, twist)?;
            powers[twist] = Some(blocks.iter().map(|m| block_power(m, spec.t)).collect());
        }
    }
    dct::fitness_from_probability(spec, configs, move |b| {
        let set = OccupationSet::from_configuration(b);
        let twist = boundary.twist(set.len());
        let p = powers[twist].as_ref().expect("grid prepared");
        probability_from_powers(p, spec.n, &set, js, jp)
    })
}
