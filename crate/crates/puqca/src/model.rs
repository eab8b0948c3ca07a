//! Shared domain types: gate parametrizations, update rules, lattice
//! configurations, and the rule-file (de)serialization used by the CLI.
//!
//! A single cell update is a two-qubit gate that conserves particle
//! number: it acts as identity on |00⟩, as a phase on |11⟩, and mixes
//! {|01⟩, |10⟩} through a 2×2 unitary whose determinant is e^{iα}.
//! One automaton step applies the `w0` gate on even bonds
//! {0,1},{2,3},…,{n−2,n−1} and then the `w1` gate on odd bonds
//! {1,2},{3,4},…,{n−1,0} (periodic wrap).

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub(crate) fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// The five angles of one number-conserving two-qubit gate.
///
/// `phi` is the phase picked up by |11⟩; every published experiment fixes
/// it to zero, but it is carried so the full gate family stays expressible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub theta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub xi: f64,
    pub phi: f64,
}

impl GateParams {
    /// Builds a gate parameter set, wrapping every angle into [0, 2π).
    ///
    /// # Panics
    /// Panics if any angle is non-finite; angles always originate from
    /// finite literals, parsed files (validated separately), or wrapped
    /// mutations.
    pub fn new(theta: f64, alpha: f64, gamma: f64, xi: f64, phi: f64) -> Self {
        for (name, v) in [
            ("theta", theta),
            ("alpha", alpha),
            ("gamma", gamma),
            ("xi", xi),
            ("phi", phi),
        ] {
            assert!(v.is_finite(), "gate angle {name} must be finite, got {v}");
        }
        Self {
            theta: wrap_angle(theta),
            alpha: wrap_angle(alpha),
            gamma: wrap_angle(gamma),
            xi: wrap_angle(xi),
            phi: wrap_angle(phi),
        }
    }

    /// The identity gate (all angles zero).
    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// True when the middle 2×2 block has unit determinant and |11⟩ picks
    /// up no phase, i.e. the gate admits the free-fermion fast path.
    pub fn is_simulable(&self, tol: f64) -> bool {
        let near_zero = |a: f64| a <= tol || (TAU - a) <= tol;
        near_zero(self.alpha) && near_zero(self.phi)
    }
}

/// 4×4 gate matrix in basis order (|00⟩, |01⟩, |10⟩, |11⟩), row-major.
///
/// The left qubit of a bond is the lower lattice index. The matrix is
/// unitary for every parameter choice; the {|01⟩,|10⟩} block determinant
/// is e^{iα}.
pub fn gate_matrix(g: &GateParams) -> [[Complex64; 4]; 4] {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let (s, c) = g.theta.sin_cos();
    let e = |phase: f64| Complex64::from_polar(1.0, phase);
    let mut m = [[zero; 4]; 4];
    m[0][0] = one;
    m[1][1] = e(g.xi) * c;
    m[1][2] = e(g.gamma) * s;
    m[2][1] = -e(g.alpha - g.gamma) * s;
    m[2][2] = e(g.alpha - g.xi) * c;
    m[3][3] = e(g.phi);
    m
}

/// One automaton rule: the even-bond gate applied first, the odd-bond
/// gate second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PUQCARule {
    pub w0: GateParams,
    pub w1: GateParams,
}

impl PUQCARule {
    pub fn new(w0: GateParams, w1: GateParams) -> Self {
        Self { w0, w1 }
    }

    /// The do-nothing rule; evolving any basis state returns it unchanged.
    pub fn identity() -> Self {
        Self {
            w0: GateParams::identity(),
            w1: GateParams::identity(),
        }
    }

    pub fn is_simulable(&self, tol: f64) -> bool {
        self.w0.is_simulable(tol) && self.w1.is_simulable(tol)
    }
}

/// Six angles defining the two single-particle blocks of the simulable
/// regime: block j has entries a_j = e^{iξ_j}cosθ_j, b_j = e^{iγ_j}sinθ_j,
/// so |a_j|² + |b_j|² = 1 holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermionRule {
    pub theta1: f64,
    pub xi1: f64,
    pub gamma1: f64,
    pub theta2: f64,
    pub xi2: f64,
    pub gamma2: f64,
}

impl FermionRule {
    pub fn new(theta1: f64, xi1: f64, gamma1: f64, theta2: f64, xi2: f64, gamma2: f64) -> Self {
        let angles = [theta1, xi1, gamma1, theta2, xi2, gamma2];
        assert!(
            angles.iter().all(|a| a.is_finite()),
            "fermion rule angles must be finite"
        );
        Self {
            theta1: wrap_angle(theta1),
            xi1: wrap_angle(xi1),
            gamma1: wrap_angle(gamma1),
            theta2: wrap_angle(theta2),
            xi2: wrap_angle(xi2),
            gamma2: wrap_angle(gamma2),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// The equivalent two-qubit-gate rule (α = 0, φ = 0 gates). Evolving
    /// a basis state with it reproduces the fermionic marginals exactly.
    pub fn to_full_rule(&self) -> PUQCARule {
        PUQCARule {
            w0: GateParams::new(self.theta1, 0.0, self.gamma1, self.xi1, 0.0),
            w1: GateParams::new(self.theta2, 0.0, self.gamma2, self.xi2, 0.0),
        }
    }
}

/// A classical lattice state: the bit string b_0 … b_{n−1} on an even-size
/// ring, stored as the integer whose most significant bit (within width n)
/// is b_0. The integer doubles as the computational-basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Configuration {
    word: u64,
    n: usize,
}

/// Largest lattice size a `Configuration` can hold.
pub const MAX_SITES: usize = 62;

impl Configuration {
    /// Builds a configuration from its basis index.
    pub fn from_word(word: u64, n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::OddSize(n));
        }
        if n > MAX_SITES {
            return Err(Error::SizeCap(n, MAX_SITES));
        }
        if word >> n != 0 {
            return Err(Error::InvalidArgument(format!(
                "index {word} does not fit in {n} bits"
            )));
        }
        Ok(Self { word, n })
    }

    /// Parses a literal bit string such as "10110000".
    pub fn parse_bits(s: &str) -> Result<Self> {
        let n = s.len();
        if n < 2 || n % 2 != 0 {
            return Err(Error::OddSize(n));
        }
        if n > MAX_SITES {
            return Err(Error::SizeCap(n, MAX_SITES));
        }
        let mut word = 0u64;
        for ch in s.chars() {
            word <<= 1;
            match ch {
                '0' => {}
                '1' => word |= 1,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "configuration strings may only contain 0 and 1, got {ch:?}"
                    )))
                }
            }
        }
        Ok(Self { word, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The computational-basis index ℓ = Σ_k b_k 2^{n−1−k}.
    pub fn index(&self) -> u64 {
        self.word
    }

    /// Value of bit b_k (site k).
    pub fn bit(&self, k: usize) -> bool {
        assert!(k < self.n, "site {k} out of range for {} sites", self.n);
        (self.word >> (self.n - 1 - k)) & 1 == 1
    }

    /// Number of excitations (Hamming weight).
    pub fn weight(&self) -> u32 {
        self.word.count_ones()
    }

    /// Cyclic right rotation by `m` sites: the bit at site k moves to
    /// site (k + m) mod n.
    pub fn rotated(&self, m: usize) -> Self {
        let m = m % self.n;
        if m == 0 {
            return *self;
        }
        let mask = (1u64 << self.n) - 1;
        let word = ((self.word >> m) | (self.word << (self.n - m))) & mask;
        Self { word, n: self.n }
    }

    /// Sites holding an excitation, in ascending order.
    pub fn occupied_sites(&self) -> Vec<usize> {
        (0..self.n).filter(|&k| self.bit(k)).collect()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.n {
            write!(f, "{}", u8::from(self.bit(k)))?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_bits(s)
    }
}

/// Either kind of rule, as stored in a rule file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleSpec {
    Full(PUQCARule),
    Fermionic(FermionRule),
}

impl RuleSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            RuleSpec::Full(_) => "full",
            RuleSpec::Fermionic(_) => "fermionic",
        }
    }
}

/// Version tag written into every rule file.
pub const RULE_SCHEMA: u32 = 1;

/// Flat on-disk record; validation happens after deserialization so that
/// missing or extraneous keys produce precise errors per rule kind.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleRecord {
    schema: u32,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w0: Option<GateAngles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w1: Option<GateAngles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma2: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateAngles {
    theta: f64,
    alpha: f64,
    gamma: f64,
    xi: f64,
    #[serde(default)]
    phi: f64,
}

impl From<GateParams> for GateAngles {
    fn from(g: GateParams) -> Self {
        Self {
            theta: g.theta,
            alpha: g.alpha,
            gamma: g.gamma,
            xi: g.xi,
            phi: g.phi,
        }
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::RuleFile(format!("angle {name} is not finite")))
    }
}

fn require(name: &str, v: Option<f64>) -> Result<f64> {
    finite(name, v.ok_or_else(|| Error::RuleFile(format!("missing angle {name}")))?)
}

/// Serializes a rule to the canonical JSON rule-file text.
pub fn serialize_rule(rule: &RuleSpec, label: Option<&str>) -> String {
    let mut rec = RuleRecord {
        schema: RULE_SCHEMA,
        kind: rule.kind().to_owned(),
        label: label.map(str::to_owned),
        ..RuleRecord::default()
    };
    match rule {
        RuleSpec::Full(r) => {
            rec.w0 = Some(r.w0.into());
            rec.w1 = Some(r.w1.into());
        }
        RuleSpec::Fermionic(r) => {
            rec.theta1 = Some(r.theta1);
            rec.xi1 = Some(r.xi1);
            rec.gamma1 = Some(r.gamma1);
            rec.theta2 = Some(r.theta2);
            rec.xi2 = Some(r.xi2);
            rec.gamma2 = Some(r.gamma2);
        }
    }
    let mut text = serde_json::to_string_pretty(&rec).expect("rule records always serialize");
    text.push('\n');
    text
}

/// Parses rule-file text, rejecting unknown keys, missing angles, and
/// non-finite values.
pub fn parse_rule(text: &str) -> Result<RuleSpec> {
    let rec: RuleRecord =
        serde_json::from_str(text).map_err(|e| Error::RuleFile(e.to_string()))?;
    if rec.schema != RULE_SCHEMA {
        return Err(Error::RuleFile(format!(
            "unsupported schema {} (expected {RULE_SCHEMA})",
            rec.schema
        )));
    }
    let reject_fermionic_keys = || -> Result<()> {
        if rec.theta1.is_some()
            || rec.xi1.is_some()
            || rec.gamma1.is_some()
            || rec.theta2.is_some()
            || rec.xi2.is_some()
            || rec.gamma2.is_some()
        {
            return Err(Error::RuleFile(
                "full rules must not carry fermionic angle keys".into(),
            ));
        }
        Ok(())
    };
    match rec.kind.as_str() {
        "full" => {
            reject_fermionic_keys()?;
            let gate = |name: &str, g: Option<GateAngles>| -> Result<GateParams> {
                let g = g.ok_or_else(|| Error::RuleFile(format!("missing gate {name}")))?;
                Ok(GateParams::new(
                    finite(&format!("{name}.theta"), g.theta)?,
                    finite(&format!("{name}.alpha"), g.alpha)?,
                    finite(&format!("{name}.gamma"), g.gamma)?,
                    finite(&format!("{name}.xi"), g.xi)?,
                    finite(&format!("{name}.phi"), g.phi)?,
                ))
            };
            Ok(RuleSpec::Full(PUQCARule {
                w0: gate("w0", rec.w0)?,
                w1: gate("w1", rec.w1)?,
            }))
        }
        "fermionic" => {
            if rec.w0.is_some() || rec.w1.is_some() {
                return Err(Error::RuleFile(
                    "fermionic rules must not carry w0/w1 gate objects".into(),
                ));
            }
            Ok(RuleSpec::Fermionic(FermionRule::new(
                require("theta1", rec.theta1)?,
                require("xi1", rec.xi1)?,
                require("gamma1", rec.gamma1)?,
                require("theta2", rec.theta2)?,
                require("xi2", rec.xi2)?,
                require("gamma2", rec.gamma2)?,
            )))
        }
        other => Err(Error::RuleFile(format!(
            "unknown rule kind {other:?} (expected \"full\" or \"fermionic\")"
        ))),
    }
}
