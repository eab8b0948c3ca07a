//! Exact simulation of the brick-wall automaton on a periodic qubit ring.
//!
//! Two representations are provided. [`StateVector`] holds all 2^n
//! amplitudes and is the ground truth everything else is validated
//! against. [`SectorState`] exploits particle-number conservation and
//! restricts to one Hamming-weight sector of dimension C(n, k); both
//! paths must agree to ~1e-10 everywhere and the test suite enforces it.
//!
//! Site k of a configuration lives at bit position n−1−k of the basis
//! index (b_0 is the most significant bit), so the index of a basis
//! state equals the integer value of its bit string.

use std::sync::Arc;

use num_complex::Complex64;

use crate::model::{gate_matrix, Configuration, GateParams, PUQCARule};

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Binomial coefficient as u64; exact for every n ≤ 62 that
/// [`Configuration`] admits.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// All n-bit words of Hamming weight k in ascending integer order
/// (equivalently: lexicographic order of the bit strings).
pub fn weight_words(n: usize, k: usize) -> Vec<u64> {
    assert!(n <= 62, "sector enumeration capped at 62 bits");
    let count = binomial(n, k) as usize;
    let mut words = Vec::with_capacity(count);
    if k == 0 {
        words.push(0);
        return words;
    }
    if k > n {
        return words;
    }
    // Gosper's hack: next word with the same popcount.
    let limit = 1u64 << n;
    let mut w = (1u64 << k) - 1;
    while w < limit {
        words.push(w);
        let c = w & w.wrapping_neg();
        let r = w + c;
        w = (((w ^ r) >> 2) / c) | r;
        if c == 0 {
            break;
        }
    }
    debug_assert_eq!(words.len(), count);
    words
}

/// Position of `word` within `weight_words(n, weight(word))`.
pub fn sector_rank(word: u64, n: usize) -> usize {
    let mut remaining = word.count_ones() as usize;
    let mut rank = 0u64;
    for i in 0..n {
        if remaining == 0 {
            break;
        }
        if (word >> (n - 1 - i)) & 1 == 1 {
            rank += binomial(n - 1 - i, remaining);
            remaining -= 1;
        }
    }
    rank as usize
}

/// The data a bond update actually needs: the {|01⟩,|10⟩} block and the
/// phase on |11⟩. Variant evaluation in the verifier builds transformed
/// copies of these, so the simulator consumes this form rather than raw
/// angles.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BondGate {
    pub u11: C64,
    pub u12: C64,
    pub u21: C64,
    pub u22: C64,
    pub phi: C64,
}

impl BondGate {
    pub fn from_params(g: &GateParams) -> Self {
        let m = gate_matrix(g);
        Self {
            u11: m[1][1],
            u12: m[1][2],
            u21: m[2][1],
            u22: m[2][2],
            phi: m[3][3],
        }
    }

    fn phi_is_trivial(&self) -> bool {
        (self.phi - ONE).norm() == 0.0
    }
}

/// A rule lowered to bond-gate form.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BondRule {
    pub w0: BondGate,
    pub w1: BondGate,
}

impl BondRule {
    pub fn from_rule(rule: &PUQCARule) -> Self {
        Self {
            w0: BondGate::from_params(&rule.w0),
            w1: BondGate::from_params(&rule.w1),
        }
    }
}

/// Dense state of the full 2^n-dimensional register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub(crate) fn from_amplitudes(n: usize, amps: Vec<C64>) -> Self {
        assert_eq!(amps.len(), 1usize << n);
        Self { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// The computational basis state |b⟩.
pub fn basis_state(b: &Configuration) -> StateVector {
    let mut amps = vec![ZERO; 1usize << b.n()];
    amps[b.index() as usize] = ONE;
    StateVector { n: b.n(), amps }
}

fn apply_bond(amps: &mut [C64], n: usize, p: usize, g: &BondGate) {
    let q = (p + 1) % n;
    let mp = 1usize << (n - 1 - p);
    let mq = 1usize << (n - 1 - q);
    let phase = !g.phi_is_trivial();
    for l in 0..amps.len() {
        if l & mp == 0 {
            if l & mq != 0 {
                let l2 = (l | mp) & !mq;
                let a01 = amps[l];
                let a10 = amps[l2];
                amps[l] = g.u11 * a01 + g.u12 * a10;
                amps[l2] = g.u21 * a01 + g.u22 * a10;
            }
        } else if phase && l & mq != 0 {
            amps[l] *= g.phi;
        }
    }
}

pub(crate) fn step_in_place(amps: &mut [C64], n: usize, rule: &BondRule) {
    for p in (0..n).step_by(2) {
        apply_bond(amps, n, p, &rule.w0);
    }
    for p in (1..n).step_by(2) {
        apply_bond(amps, n, p, &rule.w1);
    }
}

/// One automaton step: the even-bond layer followed by the odd-bond layer.
pub fn step(psi: &StateVector, rule: &PUQCARule) -> StateVector {
    let mut out = psi.clone();
    step_in_place(&mut out.amps, out.n, &BondRule::from_rule(rule));
    out
}

/// `t` automaton steps applied to the basis state |b⟩.
pub fn evolve(b: &Configuration, rule: &PUQCARule, t: usize) -> StateVector {
    let bond = BondRule::from_rule(rule);
    let mut psi = basis_state(b);
    for _ in 0..t {
        step_in_place(&mut psi.amps, psi.n, &bond);
    }
    psi
}

/// Probability of measuring the excitation |1⟩ at site `p`.
pub fn excitation_probability(psi: &StateVector, p: usize) -> f64 {
    assert!(p < psi.n, "site {p} out of range for {} sites", psi.n);
    let mask = 1usize << (psi.n - 1 - p);
    psi.amps
        .iter()
        .enumerate()
        .filter(|(l, _)| l & mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Cyclic right rotation by `m` sites: basis states are relabelled the
/// same way [`Configuration::rotated`] rotates bit strings.
pub fn translate(psi: &StateVector, m: usize) -> StateVector {
    let n = psi.n;
    let m = m % n;
    if m == 0 {
        return psi.clone();
    }
    let mask = (1u64 << n) - 1;
    let mut amps = vec![ZERO; psi.amps.len()];
    for (l, &a) in psi.amps.iter().enumerate() {
        let w = l as u64;
        let rotated = (((w >> m) | (w << (n - m))) & mask) as usize;
        amps[rotated] = a;
    }
    StateVector { n, amps }
}

/// Excitation probability at every site.
pub fn marginal_profile(psi: &StateVector) -> Vec<f64> {
    (0..psi.n).map(|p| excitation_probability(psi, p)).collect()
}

/// Precomputed index structure for one (n, k) weight sector: the sector
/// basis in ascending order and, per bond, the amplitude pairs a bond
/// gate mixes. Building it costs O(C(n,k)·n²) once; it is then shared by
/// every configuration of that weight across all time steps.
#[derive(Debug)]
pub struct SectorTables {
    n: usize,
    k: usize,
    words: Vec<u64>,
    /// For bond p: indices of (…0_p 1_q…, …1_p 0_q…) amplitude pairs.
    mix_pairs: Vec<Vec<(u32, u32)>>,
    /// For bond p: indices of members with both bond sites occupied.
    doubly_occupied: Vec<Vec<u32>>,
}

impl SectorTables {
    pub fn build(n: usize, k: usize) -> Arc<Self> {
        assert!(n >= 2 && n % 2 == 0, "sector tables need an even ring");
        let words = weight_words(n, k);
        let mut mix_pairs = Vec::with_capacity(n);
        let mut doubly_occupied = Vec::with_capacity(n);
        for p in 0..n {
            let q = (p + 1) % n;
            let mp = 1u64 << (n - 1 - p);
            let mq = 1u64 << (n - 1 - q);
            let mut pairs = Vec::new();
            let mut both = Vec::new();
            for (i, &w) in words.iter().enumerate() {
                if w & mp == 0 {
                    if w & mq != 0 {
                        let partner = (w | mp) & !mq;
                        pairs.push((i as u32, sector_rank(partner, n) as u32));
                    }
                } else if w & mq != 0 {
                    both.push(i as u32);
                }
            }
            mix_pairs.push(pairs);
            doubly_occupied.push(both);
        }
        Arc::new(Self {
            n,
            k,
            words,
            mix_pairs,
            doubly_occupied,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// State restricted to one Hamming-weight sector.
#[derive(Debug, Clone)]
pub struct SectorState {
    tables: Arc<SectorTables>,
    amps: Vec<C64>,
}

impl SectorState {
    /// The basis state |b⟩ in its weight sector.
    pub fn from_configuration(b: &Configuration, tables: &Arc<SectorTables>) -> Self {
        assert_eq!(b.n(), tables.n, "configuration size differs from tables");
        assert_eq!(
            b.weight() as usize,
            tables.k,
            "configuration weight differs from tables"
        );
        let mut amps = vec![ZERO; tables.dimension()];
        amps[sector_rank(b.index(), tables.n)] = ONE;
        Self {
            tables: Arc::clone(tables),
            amps,
        }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn step_with(&mut self, rule: &BondRule) {
        let n = self.tables.n;
        for p in (0..n).step_by(2) {
            self.apply_bond(p, &rule.w0);
        }
        for p in (1..n).step_by(2) {
            self.apply_bond(p, &rule.w1);
        }
    }

    /// One automaton step within the sector.
    pub fn step(&mut self, rule: &PUQCARule) {
        self.step_with(&BondRule::from_rule(rule));
    }

    fn apply_bond(&mut self, p: usize, g: &BondGate) {
        for &(i01, i10) in &self.tables.mix_pairs[p] {
            let a01 = self.amps[i01 as usize];
            let a10 = self.amps[i10 as usize];
            self.amps[i01 as usize] = g.u11 * a01 + g.u12 * a10;
            self.amps[i10 as usize] = g.u21 * a01 + g.u22 * a10;
        }
        if !g.phi_is_trivial() {
            for &i in &self.tables.doubly_occupied[p] {
                self.amps[i as usize] *= g.phi;
            }
        }
    }

    /// Probability of measuring |1⟩ at site `p`.
    pub fn excitation_probability(&self, p: usize) -> f64 {
        let n = self.tables.n;
        assert!(p < n, "site {p} out of range for {n} sites");
        let mask = 1u64 << (n - 1 - p);
        self.tables
            .words
            .iter()
            .zip(&self.amps)
            .filter(|(w, _)| *w & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn marginal_profile(&self) -> Vec<f64> {
        (0..self.tables.n)
            .map(|p| self.excitation_probability(p))
            .collect()
    }

    /// Embeds the sector amplitudes back into a dense state.
    pub fn to_statevector(&self) -> StateVector {
        let mut amps = vec![ZERO; 1usize << self.tables.n];
        for (&w, &a) in self.tables.words.iter().zip(&self.amps) {
            amps[w as usize] = a;
        }
        StateVector {
            n: self.tables.n,
            amps,
        }
    }
}

/// `t` automaton steps of |b⟩ inside its weight sector.
pub fn evolve_sector(
    b: &Configuration,
    rule: &PUQCARule,
    t: usize,
    tables: &Arc<SectorTables>,
) -> SectorState {
    let bond = BondRule::from_rule(rule);
    let mut st = SectorState::from_configuration(b, tables);
    for _ in 0..t {
        st.step_with(&bond);
    }
    st
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::TAU;

    fn random_rule(rng: &mut StdRng) -> PUQCARule {
        let mut a = || rng.random_range(0.0..TAU);
        PUQCARule {
            w0: GateParams::new(a(), a(), a(), a(), a()),
            w1: GateParams::new(a(), a(), a(), a(), a()),
        }
    }

    fn random_state(n: usize, rng: &mut StdRng) -> StateVector {
        let mut amps: Vec<C64> = (0..1usize << n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(n, amps)
    }

    #[test]
    fn basis_state_indexing() {
        let psi = basis_state(&Configuration::parse_bits("0000").unwrap());
        assert_eq!(psi.amplitudes()[0], ONE);
        let psi = basis_state(&Configuration::parse_bits("1000").unwrap());
        assert_eq!(psi.amplitudes()[8], ONE);
        let psi = basis_state(&Configuration::parse_bits("10110000").unwrap());
        assert_eq!(psi.amplitudes()[176], ONE);
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn vacuum_and_full_states_are_fixed_points() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let mut rule = random_rule(&mut rng);
            rule.w0.phi = 0.0;
            rule.w1.phi = 0.0;
            let vac = Configuration::parse_bits("000000").unwrap();
            assert_eq!(step(&basis_state(&vac), &rule), basis_state(&vac));
            let full = Configuration::parse_bits("111111").unwrap();
            let out = step(&basis_state(&full), &rule);
            assert_abs_diff_eq!(
                (out.amplitudes()[full.index() as usize] - ONE).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn identity_rule_fixes_every_basis_state() {
        let rule = PUQCARule::identity();
        let b = Configuration::parse_bits("1000").unwrap();
        assert_eq!(evolve(&b, &rule, 5), basis_state(&b));
    }

    #[test]
    fn norm_and_weight_sector_are_preserved() {
        let mut rng = StdRng::seed_from_u64(11);
        for &n in &[4usize, 6, 8, 10] {
            let rule = random_rule(&mut rng);
            let psi = random_state(n, &mut rng);
            let out = step(&psi, &rule);
            assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);

            // Basis input stays inside its weight sector.
            let word = rng.random_range(0..1u64 << n);
            let b = Configuration::from_word(word, n).unwrap();
            let out = evolve(&b, &rule, 3);
            for (l, a) in out.amplitudes().iter().enumerate() {
                if (l as u64).count_ones() != b.weight() {
                    assert!(
                        a.norm() < 1e-14,
                        "weight leaked at index {l}: amplitude {a}"
                    );
                }
            }
        }
    }

    #[test]
    fn excitation_probability_reads_single_bits() {
        let psi = basis_state(&Configuration::parse_bits("1000").unwrap());
        assert_eq!(excitation_probability(&psi, 0), 1.0);
        assert_eq!(excitation_probability(&psi, 1), 0.0);
        let psi = basis_state(&Configuration::parse_bits("1010").unwrap());
        assert_eq!(marginal_profile(&psi), vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn translate_rotates_right_and_cycles() {
        let b = Configuration::parse_bits("10110000").unwrap();
        let shifted = translate(&basis_state(&b), 2);
        let expect = Configuration::parse_bits("00101100").unwrap();
        assert_eq!(shifted.amplitudes()[expect.index() as usize], ONE);
        let full_cycle = translate(&basis_state(&b), 8);
        assert_eq!(full_cycle, basis_state(&b));
        let vac = basis_state(&Configuration::parse_bits("0000").unwrap());
        assert_eq!(translate(&vac, 3), vac);
    }

    #[test]
    fn step_commutes_with_two_site_translation() {
        let mut rng = StdRng::seed_from_u64(23);
        for &n in &[4usize, 6, 8] {
            let rule = random_rule(&mut rng);
            let psi = random_state(n, &mut rng);
            let a = step(&translate(&psi, 2), &rule);
            let b = translate(&step(&psi, &rule), 2);
            let dev: f64 = a
                .amplitudes()
                .iter()
                .zip(b.amplitudes())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(dev < 1e-10, "translation commutator {dev} at n={n}");
        }
    }

    #[test]
    fn covariance_of_outcomes_under_even_shifts() {
        let mut rng = StdRng::seed_from_u64(31);
        for &n in &[4usize, 6, 8] {
            let rule = random_rule(&mut rng);
            let t = rng.random_range(1..4);
            for word in 0..1u64 << n {
                let b = Configuration::from_word(word, n).unwrap();
                let base = evolve(&b, &rule, t);
                for m in 1..n / 2 {
                    let shifted = evolve(&b.rotated(2 * m), &rule, t);
                    for p in 0..n {
                        let lhs = excitation_probability(&base, p);
                        let rhs = excitation_probability(&shifted, (p + 2 * m) % n);
                        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
                    }
                }
                if n == 8 && word > 64 {
                    break; // keep the dense sweep quick
                }
            }
        }
    }

    #[test]
    fn sector_path_matches_dense_path() {
        let mut rng = StdRng::seed_from_u64(47);
        for &n in &[4usize, 6, 8, 10] {
            let rule = random_rule(&mut rng);
            for k in 0..=n {
                let tables = SectorTables::build(n, k);
                let word = *weight_words(n, k)
                    .get(rng.random_range(0..binomial(n, k) as usize))
                    .unwrap();
                let b = Configuration::from_word(word, n).unwrap();
                let t = rng.random_range(0..5);
                let dense = evolve(&b, &rule, t);
                let sect = evolve_sector(&b, &rule, t, &tables).to_statevector();
                let dev: f64 = dense
                    .amplitudes()
                    .iter()
                    .zip(sect.amplitudes())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                assert!(dev < 1e-10, "dense/sector deviation {dev} at n={n} k={k}");
            }
        }
    }

    #[test]
    fn sector_rank_agrees_with_enumeration_order() {
        for n in [4usize, 6, 10] {
            for k in 0..=n {
                for (i, &w) in weight_words(n, k).iter().enumerate() {
                    assert_eq!(sector_rank(w, n), i);
                }
            }
        }
        assert!(weight_words(6, 2).windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn binomial_small_table() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(14, 7), 3432);
        assert_eq!(binomial(16, 8), 12870);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }
}
