//! Recomputation of every embedded reference table, with an explicit,
//! bounded convention search. Orientation conventions (layer order,
//! readout-site origin, string endianness) are easy to lose between
//! implementations, so on mismatch the harness can retry a small named
//! variant set and report which one, if any, reproduces a table — more
//! honest than silently hardcoding whichever happens to fit.

use std::f64::consts::PI;

use crate::dct::{self, Backend, ClassifierSpec};
use crate::fermion::{self, Boundary};
use crate::model::{FermionRule, GateParams, PUQCARule};
use crate::tables::{self, FullLayer, SimulableLayer};
use crate::{Error, Result};

/// Matching tolerance for four-decimal table values.
pub const TABLE_TOLERANCE: f64 = 5e-5;

/// One recomputed table cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub table: &'static str,
    pub n: usize,
    pub t: usize,
    pub p: usize,
    pub expected: f64,
    pub computed: f64,
    pub matched: bool,
    pub variant: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerificationReport {
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.matched)
    }

    pub fn mismatch_count(&self) -> usize {
        self.rows.iter().filter(|r| !r.matched).count()
    }
}

/// The embedded table families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFamily {
    Bound,
    PerSizeFull,
    MultiSizeFull,
    SimulableMultiA,
    SimulableMultiB,
    PerSizeFermionic,
}

impl TableFamily {
    pub const ALL: [TableFamily; 6] = [
        TableFamily::Bound,
        TableFamily::PerSizeFull,
        TableFamily::MultiSizeFull,
        TableFamily::SimulableMultiA,
        TableFamily::SimulableMultiB,
        TableFamily::PerSizeFermionic,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TableFamily::Bound => "bound",
            TableFamily::PerSizeFull => "per-size-full",
            TableFamily::MultiSizeFull => "multi-size-full",
            TableFamily::SimulableMultiA => "simulable-multi-a",
            TableFamily::SimulableMultiB => "simulable-multi-b",
            TableFamily::PerSizeFermionic => "per-size-fermionic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| {
                let ids: Vec<_> = Self::ALL.iter().map(|f| f.id()).collect();
                Error::InvalidArgument(format!(
                    "unknown table {s:?} (expected one of {})",
                    ids.join(", ")
                ))
            })
    }
}

/// One point of the convention search space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Variant {
    /// Exchange the two layers' gate assignments.
    pub swap_layers: bool,
    /// Read the lattice in reversed site order (gates SWAP-conjugated,
    /// readout site reflected).
    pub mirror: bool,
    /// Shift the readout site by one.
    pub site_offset: bool,
    /// Stage the second layer one bond earlier (equals a one-site
    /// relabeling; spans the shift-direction ambiguity). Full rules only.
    pub shift_flip: bool,
    /// Read the tables' third fermionic angle literally as α (γ = 0)
    /// instead of as γ; forces statevector evaluation.
    pub third_angle_literal: bool,
    /// Momentum grid for fermionic evaluation.
    pub boundary: Boundary,
}

impl Variant {
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.swap_layers {
            parts.push("swapped-layers");
        }
        if self.mirror {
            parts.push("mirrored");
        }
        if self.site_offset {
            parts.push("site+1");
        }
        if self.shift_flip {
            parts.push("shift-flipped");
        }
        if self.third_angle_literal {
            parts.push("third-angle-alpha");
        }
        match self.boundary {
            Boundary::WeightParity => {}
            Boundary::Periodic => parts.push("periodic"),
            Boundary::Antiperiodic => parts.push("antiperiodic"),
        }
        if parts.is_empty() {
            "default".into()
        } else {
            parts.join("+")
        }
    }

    fn weight(&self) -> usize {
        self.swap_layers as usize
            + self.mirror as usize
            + self.site_offset as usize
            + self.shift_flip as usize
            + self.third_angle_literal as usize
            + (self.boundary != Boundary::WeightParity) as usize
    }
}

fn mirror_gate(g: &GateParams) -> GateParams {
    GateParams::new(g.theta, g.alpha, g.alpha - g.gamma + PI, g.alpha - g.xi, g.phi)
}

fn full_gate(layer: FullLayer) -> GateParams {
    let [theta, xi, gamma, alpha] = layer;
    GateParams::new(theta, alpha, gamma, xi, 0.0)
}

fn variant_full_rule(l1: FullLayer, l2: FullLayer, v: &Variant) -> PUQCARule {
    let (a, b) = if v.swap_layers ^ v.shift_flip {
        (l2, l1)
    } else {
        (l1, l2)
    };
    let mut w0 = full_gate(a);
    let mut w1 = full_gate(b);
    if v.mirror {
        w0 = mirror_gate(&w0);
        w1 = mirror_gate(&w1);
    }
    PUQCARule::new(w0, w1)
}

fn variant_fermion_rule(l1: SimulableLayer, l2: SimulableLayer, v: &Variant) -> FermionRule {
    let (a, b) = if v.swap_layers { (l2, l1) } else { (l1, l2) };
    let mut fr = FermionRule::new(a[0], a[1], a[2], b[0], b[1], b[2]);
    if v.mirror {
        // SWAP conjugation of a simulable gate: (θ, ξ, γ) → (θ, −ξ, π−γ).
        fr = FermionRule::new(
            fr.theta1,
            -fr.xi1,
            PI - fr.gamma1,
            fr.theta2,
            -fr.xi2,
            PI - fr.gamma2,
        );
    }
    fr
}

fn variant_site(p: usize, n: usize, v: &Variant) -> usize {
    let mut p = p;
    if v.mirror {
        p = (n - 1 - p) % n;
    }
    if v.site_offset {
        p = (p + 1) % n;
    }
    if v.shift_flip {
        p = (p + 1) % n;
    }
    p
}

fn eval_full(
    l1: FullLayer,
    l2: FullLayer,
    n: usize,
    t: usize,
    v: &Variant,
    backend: Backend,
) -> Result<f64> {
    let rule = variant_full_rule(l1, l2, v);
    let p = variant_site(tables::FULL_READOUT_SITE, n, v);
    let spec = ClassifierSpec::new(n, t, p, 0.0)?;
    let valid = dct::enumerate_valid(n)?;
    Ok(dct::fitness(&rule, &spec, &valid, backend)?.fitness)
}

fn eval_simulable(
    l1: SimulableLayer,
    l2: SimulableLayer,
    n: usize,
    t: usize,
    v: &Variant,
    backend: Backend,
) -> Result<f64> {
    let p = variant_site(tables::SIMULABLE_READOUT_SITE, n, v);
    let spec = ClassifierSpec::new(n, t, p, 0.0)?;
    if v.third_angle_literal {
        let (a, b) = if v.swap_layers { (l2, l1) } else { (l1, l2) };
        let gate = |l: SimulableLayer| GateParams::new(l[0], l[2], 0.0, l[1], 0.0);
        let mut w0 = gate(a);
        let mut w1 = gate(b);
        if v.mirror {
            w0 = mirror_gate(&w0);
            w1 = mirror_gate(&w1);
        }
        let rule = PUQCARule::new(w0, w1);
        let valid = dct::enumerate_valid(n)?;
        return Ok(dct::fitness(&rule, &spec, &valid, backend)?.fitness);
    }
    let fr = variant_fermion_rule(l1, l2, v);
    Ok(fermion::fermion_fitness_with(&fr, &spec, v.boundary)?.fitness)
}

/// The explicit variant set tried for a family. Ordered default-first,
/// then by number of flipped axes, so the reported variant deviates as
/// little as possible.
fn variant_set(family: TableFamily, search: bool) -> Vec<Variant> {
    if !search {
        return vec![Variant::default()];
    }
    let mut out = Vec::new();
    match family {
        TableFamily::Bound => out.push(Variant::default()),
        TableFamily::PerSizeFull | TableFamily::MultiSizeFull => {
            for bits in 0..16u32 {
                out.push(Variant {
                    swap_layers: bits & 1 != 0,
                    mirror: bits & 2 != 0,
                    site_offset: bits & 4 != 0,
                    shift_flip: bits & 8 != 0,
                    ..Variant::default()
                });
            }
        }
        _ => {
            for bits in 0..8u32 {
                for boundary in [Boundary::WeightParity, Boundary::Periodic] {
                    out.push(Variant {
                        swap_layers: bits & 1 != 0,
                        mirror: bits & 2 != 0,
                        site_offset: bits & 4 != 0,
                        boundary,
                        ..Variant::default()
                    });
                }
            }
            // The alternative reading of the third angle column, on its
            // own: a reading choice, not an orientation.
            out.push(Variant {
                third_angle_literal: true,
                ..Variant::default()
            });
        }
    }
    out.sort_by_key(Variant::weight);
    out
}

struct Cell {
    n: usize,
    t: usize,
    expected: f64,
    kind: CellKind,
}

enum CellKind {
    Bound,
    Full(FullLayer, FullLayer),
    Simulable(SimulableLayer, SimulableLayer),
}

fn family_cells(family: TableFamily) -> Vec<Cell> {
    match family {
        TableFamily::Bound => tables::CLASSICAL_BOUNDS
            .iter()
            .map(|&(n, expected)| Cell {
                n,
                t: 0,
                expected,
                kind: CellKind::Bound,
            })
            .collect(),
        TableFamily::PerSizeFull => tables::PER_SIZE_FULL
            .iter()
            .map(|r| Cell {
                n: r.n,
                t: r.t,
                expected: r.fitness,
                kind: CellKind::Full(r.layer1, r.layer2),
            })
            .collect(),
        TableFamily::MultiSizeFull => tables::MULTI_SIZE_FULL_ROWS
            .iter()
            .map(|r| Cell {
                n: r.n,
                t: r.t,
                expected: r.fitness,
                kind: CellKind::Full(tables::MULTI_SIZE_FULL_LAYER1, tables::MULTI_SIZE_FULL_LAYER2),
            })
            .collect(),
        TableFamily::SimulableMultiA | TableFamily::SimulableMultiB => {
            let table = &tables::SIMULABLE_MULTI[(family == TableFamily::SimulableMultiB) as usize];
            table
                .rows
                .iter()
                .map(|r| Cell {
                    n: r.n,
                    t: r.t,
                    expected: r.fitness,
                    kind: CellKind::Simulable(table.layer1, table.layer2),
                })
                .collect()
        }
        TableFamily::PerSizeFermionic => tables::SIMULABLE_PER_SIZE
            .iter()
            .map(|r| Cell {
                n: r.n,
                t: r.t,
                expected: r.fitness,
                kind: CellKind::Simulable(r.layer1, r.layer2),
            })
            .collect(),
    }
}

fn eval_cell(cell: &Cell, v: &Variant, backend: Backend) -> Result<(f64, usize)> {
    Ok(match &cell.kind {
        CellKind::Bound => (dct::classical_bound(cell.n)?, 0),
        CellKind::Full(l1, l2) => (
            eval_full(*l1, *l2, cell.n, cell.t, v, backend)?,
            variant_site(tables::FULL_READOUT_SITE, cell.n, v),
        ),
        CellKind::Simulable(l1, l2) => (
            eval_simulable(*l1, *l2, cell.n, cell.t, v, backend)?,
            variant_site(tables::SIMULABLE_READOUT_SITE, cell.n, v),
        ),
    })
}

/// Recomputes one family, trying variants in order until one matches
/// every cell; otherwise reports the best-scoring variant's rows.
pub fn verify_family(family: TableFamily, search: bool) -> Result<Vec<ReportRow>> {
    verify_family_with(family, search, Backend::Sector)
}

/// [`verify_family`] with an explicit evaluation backend for the full
/// statevector rows ([`Backend::Dense`] audits the fast path).
pub fn verify_family_with(
    family: TableFamily,
    search: bool,
    backend: Backend,
) -> Result<Vec<ReportRow>> {
    let cells = family_cells(family);
    let mut best: Option<(usize, Vec<ReportRow>)> = None;
    for v in variant_set(family, search) {
        let mut rows = Vec::with_capacity(cells.len());
        let mut matches = 0usize;
        for cell in &cells {
            let (computed, p) = eval_cell(cell, &v, backend)?;
            let matched = (computed - cell.expected).abs() <= TABLE_TOLERANCE;
            matches += matched as usize;
            rows.push(ReportRow {
                table: family.id(),
                n: cell.n,
                t: cell.t,
                p,
                expected: cell.expected,
                computed,
                matched,
                variant: v.label(),
            });
        }
        if matches == cells.len() {
            return Ok(rows);
        }
        if best.as_ref().map_or(true, |(m, _)| matches > *m) {
            best = Some((matches, rows));
        }
    }
    Ok(best.expect("variant set nonempty").1)
}

/// Recomputes the given families (all of them by default order).
pub fn verify_tables(families: &[TableFamily], search: bool) -> Result<VerificationReport> {
    verify_tables_with(families, search, Backend::Sector)
}

pub fn verify_tables_with(
    families: &[TableFamily],
    search: bool,
    backend: Backend,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    for &family in families {
        report.rows.extend(verify_family_with(family, search, backend)?);
    }
    Ok(report)
}
