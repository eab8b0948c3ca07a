//! Reference rules with their reported fitness values, embedded so the
//! verification command and the regression tests can re-derive every
//! number offline.
//!
//! Angle layout: a full-parametrization layer is `[theta, xi, gamma,
//! alpha]` with phi = 0; a six-angle (simulable) layer is `[theta, xi,
//! gamma]` with alpha = phi = 0. Layer 1 acts on even bonds, layer 2 on
//! odd bonds; the verification search can also try the swapped reading.

use crate::model::{FermionRule, GateParams, PUQCARule};

pub type FullLayer = [f64; 4];
pub type SimulableLayer = [f64; 3];

pub fn full_rule(layer1: FullLayer, layer2: FullLayer) -> PUQCARule {
    let [t1, x1, g1, a1] = layer1;
    let [t2, x2, g2, a2] = layer2;
    PUQCARule::new(
        GateParams::new(t1, a1, g1, x1, 0.0),
        GateParams::new(t2, a2, g2, x2, 0.0),
    )
}

pub fn simulable_rule(layer1: SimulableLayer, layer2: SimulableLayer) -> FermionRule {
    let [t1, x1, g1] = layer1;
    let [t2, x2, g2] = layer2;
    FermionRule::new(t1, x1, g1, t2, x2, g2)
}

/// One size-specific solution, evaluated over all valid inputs.
#[derive(Debug, Clone, Copy)]
pub struct PerSizeRule {
    pub n: usize,
    pub t: usize,
    pub layer1: FullLayer,
    pub layer2: FullLayer,
    pub fitness: f64,
}

/// Readout site for the eight-angle reference solutions.
pub const FULL_READOUT_SITE: usize = 1;

/// Size-specific eight-angle solutions, each run for t = n/2 steps.
pub const PER_SIZE_FULL: [PerSizeRule; 6] = [
    PerSizeRule {
        n: 4,
        t: 2,
        layer1: [0.6892, 6.0897, 0.1366, 0.4177],
        layer2: [0.8995, 5.8840, 0.8684, 2.8956],
        fitness: 1.0000,
    },
    PerSizeRule {
        n: 6,
        t: 3,
        layer1: [0.9001, 0.0752, 0.3960, 0.4801],
        layer2: [0.6786, 0.9749, 0.5549, 0.7985],
        fitness: 1.0000,
    },
    PerSizeRule {
        n: 8,
        t: 4,
        layer1: [0.8870, 5.0322, 1.6581, 0.1687],
        layer2: [0.5313, 6.2298, 1.1563, 1.6556],
        fitness: 1.0000,
    },
    PerSizeRule {
        n: 10,
        t: 5,
        layer1: [1.0642, 0.3063, 0.2655, 0.8413],
        layer2: [0.8338, 0.8077, 6.1987, 2.6387],
        fitness: 1.0000,
    },
    PerSizeRule {
        n: 12,
        t: 6,
        layer1: [0.7497, 0.6441, 5.0980, 1.7034],
        layer2: [0.9875, 0.7946, 0.3631, 1.4459],
        fitness: 1.0000,
    },
    PerSizeRule {
        n: 14,
        t: 7,
        layer1: [0.9282, 5.6197, 0.4424, 1.0604],
        layer2: [0.6703, 0.6944, 3.1894, 1.8323],
        fitness: 1.0000,
    },
];

/// Fitness of one rule at one size, after t steps.
#[derive(Debug, Clone, Copy)]
pub struct MultiSizeRow {
    pub n: usize,
    pub t: usize,
    pub fitness: f64,
}

/// The single eight-angle rule reported to work across sizes.
pub const MULTI_SIZE_FULL_LAYER1: FullLayer = [0.5367, 6.1344, 0.2414, 1.0714];
pub const MULTI_SIZE_FULL_LAYER2: FullLayer = [0.5988, 6.1795, 5.0084, 1.0913];

pub const MULTI_SIZE_FULL_ROWS: [MultiSizeRow; 6] = [
    MultiSizeRow { n: 4, t: 2, fitness: 1.0000 },
    MultiSizeRow { n: 6, t: 3, fitness: 1.0000 },
    MultiSizeRow { n: 8, t: 4, fitness: 1.0000 },
    MultiSizeRow { n: 10, t: 5, fitness: 0.9909 },
    MultiSizeRow { n: 12, t: 6, fitness: 0.9861 },
    MultiSizeRow { n: 14, t: 7, fitness: 0.9921 },
];

/// Reported miss counts behind the imperfect rows above:
/// (n, misclassified, valid inputs).
pub const MULTI_SIZE_FULL_MISSES: [(usize, usize, usize); 3] =
    [(10, 7, 772), (12, 44, 3172), (14, 102, 12952)];

/// A six-angle rule evaluated across sizes, with its reported row values.
#[derive(Debug, Clone, Copy)]
pub struct SimulableMultiTable {
    pub label: &'static str,
    pub layer1: SimulableLayer,
    pub layer2: SimulableLayer,
    pub rows: [MultiSizeRow; 6],
}

/// The two cross-size rules in the simulable (alpha = 0) regime.
pub const SIMULABLE_MULTI: [SimulableMultiTable; 2] = [
    SimulableMultiTable {
        label: "simulable-multi-a",
        layer1: [0.4749, 1.4803, 5.5727],
        layer2: [0.4833, 1.1740, 3.3965],
        rows: [
            MultiSizeRow { n: 4, t: 2, fitness: 1.0000 },
            MultiSizeRow { n: 6, t: 3, fitness: 0.9091 },
            MultiSizeRow { n: 8, t: 4, fitness: 0.8925 },
            MultiSizeRow { n: 10, t: 5, fitness: 0.9974 },
            MultiSizeRow { n: 12, t: 6, fitness: 0.8153 },
            MultiSizeRow { n: 14, t: 7, fitness: 0.7627 },
        ],
    },
    SimulableMultiTable {
        label: "simulable-multi-b",
        layer1: [0.4949, 0.7195, 0.0337],
        layer2: [0.4790, 1.0300, 0.4848],
        rows: [
            MultiSizeRow { n: 4, t: 2, fitness: 1.0000 },
            MultiSizeRow { n: 6, t: 3, fitness: 0.9091 },
            MultiSizeRow { n: 8, t: 4, fitness: 0.8925 },
            MultiSizeRow { n: 10, t: 5, fitness: 0.9896 },
            MultiSizeRow { n: 12, t: 6, fitness: 0.7995 },
            MultiSizeRow { n: 14, t: 7, fitness: 0.7763 },
        ],
    },
];

/// One size-specific six-angle solution; read at site 0, and not always
/// at t = n/2.
#[derive(Debug, Clone, Copy)]
pub struct SimulablePerSizeRule {
    pub n: usize,
    pub t: usize,
    pub layer1: SimulableLayer,
    pub layer2: SimulableLayer,
    pub fitness: f64,
}

/// Readout site for the six-angle reference solutions.
pub const SIMULABLE_READOUT_SITE: usize = 0;

pub const SIMULABLE_PER_SIZE: [SimulablePerSizeRule; 6] = [
    SimulablePerSizeRule {
        n: 4,
        t: 2,
        layer1: [0.3692, 0.3158, 0.1242],
        layer2: [0.2891, 0.2193, 0.5550],
        fitness: 1.0000,
    },
    SimulablePerSizeRule {
        n: 6,
        t: 3,
        layer1: [0.8452, 0.1676, 0.0163],
        layer2: [0.5060, 0.4904, 6.1718],
        fitness: 1.0000,
    },
    SimulablePerSizeRule {
        n: 8,
        t: 4,
        layer1: [0.5985, 1.7330, 0.2285],
        layer2: [0.8025, 0.3008, 0.6899],
        fitness: 1.0000,
    },
    SimulablePerSizeRule {
        n: 10,
        t: 6,
        layer1: [0.3963, 0.8772, 0.7499],
        layer2: [0.4026, 0.6149, 1.1856],
        fitness: 1.0000,
    },
    SimulablePerSizeRule {
        n: 12,
        t: 13,
        layer1: [0.7089, 0.9207, 0.6102],
        layer2: [0.7453, 0.4214, 0.4745],
        fitness: 1.0000,
    },
    SimulablePerSizeRule {
        n: 14,
        t: 15,
        layer1: [0.4592, 0.7973, 0.7148],
        layer2: [0.4311, 0.8624, 0.8936],
        fitness: 0.9722,
    },
];

/// Reported classical baselines, rounded to four decimals.
pub const CLASSICAL_BOUNDS: [(usize, f64); 7] = [
    (4, 0.8000),
    (6, 0.7273),
    (8, 0.6882),
    (10, 0.6632),
    (12, 0.6456),
    (14, 0.6325),
    (16, 0.6222),
];

/// Search hyperparameters used for the reference solutions.
pub const SEARCH_MUTATION_RATE: f64 = 0.36;
pub const SEARCH_MUTATION_SIGMA: f64 = 0.45;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dct::{classical_bound, enumerate_valid, fitness, Backend, ClassifierSpec};

    #[test]
    fn bounds_match_the_closed_form() {
        for (n, reported) in CLASSICAL_BOUNDS {
            let exact = classical_bound(n).unwrap();
            assert!(
                (exact - reported).abs() < 5e-5,
                "n = {n}: {exact} vs {reported}"
            );
        }
    }

    #[test]
    fn multi_size_rule_small_rows() {
        let rule = full_rule(MULTI_SIZE_FULL_LAYER1, MULTI_SIZE_FULL_LAYER2);
        for row in &MULTI_SIZE_FULL_ROWS[..4] {
            let spec = ClassifierSpec::new(row.n, row.t, FULL_READOUT_SITE, 0.0).unwrap();
            let valid = enumerate_valid(row.n).unwrap();
            let report = fitness(&rule, &spec, &valid, Backend::Sector).unwrap();
            assert!(
                (report.fitness - row.fitness).abs() < 5e-5,
                "n = {}: computed {:.6}, recorded {:.4}",
                row.n,
                report.fitness,
                row.fitness
            );
        }
        // The first imperfect row, down to the raw miss count.
        let spec = ClassifierSpec::new(10, 5, FULL_READOUT_SITE, 0.0).unwrap();
        let valid = enumerate_valid(10).unwrap();
        let report = fitness(&rule, &spec, &valid, Backend::Sector).unwrap();
        let (_, misses, total) = MULTI_SIZE_FULL_MISSES[0];
        assert_eq!(report.wrong_count, misses);
        assert_eq!(report.half_error_count, 0);
        assert_eq!(report.total, total);
    }

    #[test]
    fn reproducible_per_size_rules_solve() {
        // The n = 6 and n = 10 entries reproduce F = 1 exactly as
        // recorded; the other entries' reproduction status is reported
        // by the verification command rather than asserted here.
        for entry in [&PER_SIZE_FULL[1], &PER_SIZE_FULL[3]] {
            let rule = full_rule(entry.layer1, entry.layer2);
            let spec = ClassifierSpec::new(entry.n, entry.t, FULL_READOUT_SITE, 0.0).unwrap();
            let valid = enumerate_valid(entry.n).unwrap();
            let report = fitness(&rule, &spec, &valid, Backend::Sector).unwrap();
            assert_eq!(
                report.fitness, 1.0,
                "n = {}: wrong {} half {}",
                entry.n, report.wrong_count, report.half_error_count
            );
        }
    }

    #[test]
    fn simulable_rules_are_simulable() {
        for table in &SIMULABLE_MULTI {
            let rule = simulable_rule(table.layer1, table.layer2).to_full_rule();
            assert!(rule.is_simulable(1e-12));
        }
        for entry in &SIMULABLE_PER_SIZE {
            let rule = simulable_rule(entry.layer1, entry.layer2).to_full_rule();
            assert!(rule.is_simulable(1e-12), "n = {}", entry.n);
        }
    }

    #[test]
    fn simulable_multi_rule_small_rows() {
        let table = &SIMULABLE_MULTI[0];
        let rule = simulable_rule(table.layer1, table.layer2).to_full_rule();
        for row in &table.rows[..3] {
            let spec = ClassifierSpec::new(row.n, row.t, 1, 0.0).unwrap();
            let valid = enumerate_valid(row.n).unwrap();
            let report = fitness(&rule, &spec, &valid, Backend::Sector).unwrap();
            assert!(
                (report.fitness - row.fitness).abs() < 5e-5,
                "n = {}: computed {:.6}, recorded {:.4}",
                row.n,
                report.fitness,
                row.fitness
            );
        }
    }
}
