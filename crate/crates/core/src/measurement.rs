//! Detectors, Born-rule outcome distributions and the two measurement
//! pipelines.
//!
//! Absorbing detectors are projective occupation measurements followed by
//! annihilation of the clicked mode. Non-absorbing detectors act in two steps:
//! an interaction that entangles their ancilla with the mode occupation
//! ([`scatter_entangle`]), and a later readout of the ancilla.
//!
//! [`run_collapse_pipeline`] walks the events in time order and projects at
//! every measurement; [`run_unitary_pipeline`] applies every unitary and
//! entangling step first and evaluates all projectors once at the end. For
//! valid event lists both yield the same joint distribution.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::fock::{BasisConfig, StateVector};
use crate::optics::{apply_mode_transform, ModeTransform};
use crate::{Error, Result, TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsorbingDetector {
    pub label: String,
    pub mode: usize,
    pub click_time: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReadoutBasis {
    Computational,
    /// Joint measurement of two ancillas on `(|A⟩ ± |B⟩)`, see [`AncillaBasis`].
    PlusMinus,
}

impl ReadoutBasis {
    pub fn keyword(&self) -> &'static str {
        match self {
            Self::Computational => "computational",
            Self::PlusMinus => "plusminus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonAbsorbingDetector {
    pub label: String,
    pub mode: usize,
    pub ancilla: usize,
    pub interaction_time: i64,
    pub readout_time: i64,
    pub basis: ReadoutBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Silent,
    Clicked,
    Pristine,
    Scattered,
    Plus,
    Minus,
    /// Joint readout found the ancilla pair outside the plus/minus span.
    Outside,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Silent => "silent",
            Self::Clicked => "clicked",
            Self::Pristine => "pristine",
            Self::Scattered => "scattered",
            Self::Plus => "plus",
            Self::Minus => "minus",
            Self::Outside => "outside",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::Silent, Self::Clicked, Self::Pristine, Self::Scattered, Self::Plus, Self::Minus, Self::Outside]
            .into_iter()
            .find(|o| o.name() == name)
    }

    pub fn is_absorbing(&self) -> bool {
        matches!(self, Self::Silent | Self::Clicked)
    }
}

/// Joint outcome record keyed by detector (or readout) label.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClickPattern(BTreeMap<String, Outcome>);

impl ClickPattern {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, label: impl Into<String>, outcome: Outcome) -> Self {
        self.0.insert(label.into(), outcome);
        self
    }

    pub fn insert(&mut self, label: impl Into<String>, outcome: Outcome) {
        self.0.insert(label.into(), outcome);
    }

    pub fn get(&self, label: &str) -> Option<Outcome> {
        self.0.get(label).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Outcome)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Labels of absorbing detectors that clicked.
    pub fn clicked(&self) -> impl Iterator<Item = &str> {
        self.iter().filter(|(_, o)| *o == Outcome::Clicked).map(|(k, _)| k)
    }
}

/// `C&!D&B1=scattered`; the empty pattern renders as `-`.
impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (i, (label, outcome)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str("&")?;
            }
            match outcome {
                Outcome::Clicked => write!(f, "{label}")?,
                Outcome::Silent => write!(f, "!{label}")?,
                other => write!(f, "{label}={}", other.name())?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeEntry {
    pub pattern: ClickPattern,
    pub probability: f64,
    pub post_state: Option<StateVector>,
}

/// Born-rule probabilities over joint patterns, sorted by pattern.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeDistribution {
    entries: Vec<OutcomeEntry>,
}

impl OutcomeDistribution {
    pub fn from_entries(mut entries: Vec<OutcomeEntry>) -> Self {
        entries.sort_by(|a, b| a.pattern.cmp(&b.pattern));
        Self { entries }
    }

    pub fn entries(&self) -> &[OutcomeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).fold(0.0, |a, p| a + p)
    }

    /// Probability of an exact pattern (zero if absent).
    pub fn probability(&self, pattern: &ClickPattern) -> f64 {
        self.entries.binary_search_by(|e| e.pattern.cmp(pattern)).map(|i| self.entries[i].probability).unwrap_or(0.0)
    }

    pub fn probability_where(&self, mut pred: impl FnMut(&ClickPattern) -> bool) -> f64 {
        self.entries.iter().filter(|e| pred(&e.pattern)).map(|e| e.probability).fold(0.0, |a, p| a + p)
    }

    pub fn get(&self, pattern: &ClickPattern) -> Option<&OutcomeEntry> {
        self.entries.binary_search_by(|e| e.pattern.cmp(pattern)).ok().map(|i| &self.entries[i])
    }

    /// Half the L1 distance, with missing patterns counted as zero.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let mut probs: BTreeMap<&ClickPattern, (f64, f64)> = BTreeMap::new();
        for e in &self.entries {
            probs.entry(&e.pattern).or_default().0 += e.probability;
        }
        for e in &other.entries {
            probs.entry(&e.pattern).or_default().1 += e.probability;
        }
        0.5 * probs.values().map(|(p, q)| (p - q).abs()).sum::<f64>()
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Rotates the detector's ancilla to its scattered state on every
/// configuration where the detector's mode is occupied.
pub fn scatter_entangle(state: &StateVector, det: &NonAbsorbingDetector) -> Result<StateVector> {
    let space = state.space();
    space.check_mode(det.mode)?;
    let ancilla = space.ancilla_id(det.ancilla)?;
    if state.iter().any(|(c, _)| c.ancilla_index(det.ancilla) != 0) {
        return Err(Error::AncillaNotPristine(ancilla.label.clone()));
    }
    let (keep, flip) = ancilla.scattered_components();
    state.map_terms(|config, amp, emit| {
        if config.is_occupied(det.mode) {
            emit(*config, amp * keep);
            emit(BasisConfig { ancillas: config.ancillas | 1 << det.ancilla, ..*config }, amp * flip);
        } else {
            emit(*config, amp);
        }
        Ok(())
    })
}

fn project_occupation(state: &StateVector, mode: usize, occupied: bool) -> StateVector {
    state.filter(|c| c.is_occupied(mode) == occupied)
}

fn project_ancilla_bit(state: &StateVector, ancilla: usize, bit: u8) -> StateVector {
    state.filter(|c| c.ancilla_index(ancilla) == bit)
}

/// Every click pattern over `detectors` with its probability and the
/// post-absorption state (absent for zero-probability patterns).
pub fn born_distribution(state: &StateVector, detectors: &[AbsorbingDetector]) -> Result<OutcomeDistribution> {
    for d in detectors {
        state.space().check_mode(d.mode)?;
    }
    let norm = state.norm_sqr();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let mut entries = Vec::with_capacity(1 << detectors.len());
    for mask in 0u64..(1u64 << detectors.len()) {
        let mut pattern = ClickPattern::new();
        let mut component = state.clone();
        for (k, d) in detectors.iter().enumerate() {
            let clicked = mask >> k & 1 == 1;
            pattern.insert(d.label.clone(), if clicked { Outcome::Clicked } else { Outcome::Silent });
            component = project_occupation(&component, d.mode, clicked);
        }
        let probability = component.norm_sqr() / norm;
        let post_state = if component.is_zero() { None } else { Some(absorb(&component, detectors, &pattern)?.normalized()?) };
        entries.push(OutcomeEntry { pattern, probability, post_state });
    }
    Ok(OutcomeDistribution::from_entries(entries))
}

fn absorb(state: &StateVector, detectors: &[AbsorbingDetector], pattern: &ClickPattern) -> Result<StateVector> {
    detectors
        .iter()
        .filter(|d| pattern.get(&d.label) == Some(Outcome::Clicked))
        .try_fold(state.clone(), |s, d| s.annihilate(d.mode))
}

/// Normalized post-measurement state for the absorbing outcomes in `pattern`.
/// Clicked particles are removed.
pub fn project_click(state: &StateVector, detectors: &[AbsorbingDetector], pattern: &ClickPattern) -> Result<StateVector> {
    let mut component = state.clone();
    for (label, outcome) in pattern.iter() {
        let det = detectors
            .iter()
            .find(|d| d.label == label)
            .ok_or_else(|| Error::Domain(format!("pattern names unknown detector `{label}`")))?;
        let clicked = match outcome {
            Outcome::Clicked => true,
            Outcome::Silent => false,
            other => return Err(Error::Domain(format!("`{}` is not an absorbing outcome", other.name()))),
        };
        component = project_occupation(&component, det.mode, clicked);
    }
    if component.is_zero() {
        return Err(Error::ZeroProbability);
    }
    absorb(&component, detectors, pattern)?.normalized()
}

/// Basis for [`measure_ancilla`].
///
/// `PlusMinusJoint` on ancillas `(M, N)` measures the orthonormal pair
/// `(|A⟩ ± |B⟩)/‖·‖` with `|A⟩ = |M⁰⟩|N*⟩` and `|B⟩ = |M*⟩|N⁰⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AncillaBasis {
    Computational,
    PlusMinusJoint,
}

/// 4×4 projectors on the pair index `(bit_first << 1) | bit_second`.
struct JointProjectors {
    plus: [[Complex64; 4]; 4],
    minus: [[Complex64; 4]; 4],
    outside: [[Complex64; 4]; 4],
}

fn joint_projectors(state: &StateVector, first: usize, second: usize) -> Result<JointProjectors> {
    let space = state.space();
    let (s1, r1) = space.ancilla_id(first)?.scattered_components();
    let (s2, r2) = space.ancilla_id(second)?.scattered_components();
    if first == second {
        return Err(Error::JointArity);
    }
    // |A⟩ = |0⟩ ⊗ (s2|0⟩ + r2|1⟩), |B⟩ = (s1|0⟩ + r1|1⟩) ⊗ |0⟩
    let a = [s2, r2, 0.0, 0.0];
    let b = [s1, 0.0, r1, 0.0];
    let outer = |sign: f64| -> [[Complex64; 4]; 4] {
        let v: [f64; 4] = core::array::from_fn(|k| a[k] + sign * b[k]);
        let n: f64 = v.iter().map(|x| x * x).sum();
        let mut p = [[zero(); 4]; 4];
        if n > TOLERANCE {
            for i in 0..4 {
                for j in 0..4 {
                    p[i][j] = Complex64::new(v[i] * v[j] / n, 0.0);
                }
            }
        }
        p
    };
    let plus = outer(1.0);
    let minus = outer(-1.0);
    let mut outside = [[zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let id = if i == j { 1.0 } else { 0.0 };
            outside[i][j] = Complex64::new(id, 0.0) - plus[i][j] - minus[i][j];
        }
    }
    Ok(JointProjectors { plus, minus, outside })
}

fn apply_pair_operator(state: &StateVector, first: usize, second: usize, op: &[[Complex64; 4]; 4]) -> Result<StateVector> {
    let pair_mask = (1u32 << first) | (1u32 << second);
    let index = |c: &BasisConfig| ((c.ancilla_index(first) as usize) << 1) | c.ancilla_index(second) as usize;
    let with_index = |c: &BasisConfig, k: usize| {
        let mut ancillas = c.ancillas & !pair_mask;
        if k & 2 != 0 {
            ancillas |= 1 << first;
        }
        if k & 1 != 0 {
            ancillas |= 1 << second;
        }
        BasisConfig { occupations: c.occupations, ancillas }
    };
    state.map_terms(|config, amp, emit| {
        let col = index(config);
        for (row, line) in op.iter().enumerate() {
            let u = line[col];
            if u != zero() {
                emit(with_index(config, row), u * amp);
            }
        }
        Ok(())
    })
}

/// Born distribution of an ancilla measurement. Post states keep the
/// ancillas in their measured state.
pub fn measure_ancilla(state: &StateVector, ancillas: &[usize], basis: AncillaBasis) -> Result<OutcomeDistribution> {
    let space = state.space();
    for &a in ancillas {
        space.check_ancilla(a)?;
    }
    let norm = state.norm_sqr();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let entry = |pattern: ClickPattern, component: StateVector| -> Result<OutcomeEntry> {
        let probability = component.norm_sqr() / norm;
        let post_state = if component.is_zero() { None } else { Some(component.normalized()?) };
        Ok(OutcomeEntry { pattern, probability, post_state })
    };
    let mut entries = Vec::new();
    match basis {
        AncillaBasis::Computational => {
            for mask in 0u64..(1u64 << ancillas.len()) {
                let mut pattern = ClickPattern::new();
                let mut component = state.clone();
                for (k, &a) in ancillas.iter().enumerate() {
                    let bit = (mask >> k & 1) as u8;
                    pattern
                        .insert(space.ancillas()[a].label.clone(), if bit == 1 { Outcome::Scattered } else { Outcome::Pristine });
                    component = project_ancilla_bit(&component, a, bit);
                }
                entries.push(entry(pattern, component)?);
            }
        }
        AncillaBasis::PlusMinusJoint => {
            let [first, second] = ancillas else {
                return Err(Error::JointArity);
            };
            let proj = joint_projectors(state, *first, *second)?;
            let outside = apply_pair_operator(state, *first, *second, &proj.outside)?;
            if outside.norm_sqr() / norm > TOLERANCE {
                return Err(Error::OutsideJointSpan);
            }
            let key = joint_key(&space.ancillas()[*first].label, &space.ancillas()[*second].label);
            for (outcome, op) in [(Outcome::Plus, &proj.plus), (Outcome::Minus, &proj.minus)] {
                let component = apply_pair_operator(state, *first, *second, op)?;
                entries.push(entry(ClickPattern::new().with(key.clone(), outcome), component)?);
            }
        }
    }
    Ok(OutcomeDistribution::from_entries(entries))
}

/// Pattern key of a joint readout over two labels.
pub fn joint_key(first: &str, second: &str) -> String {
    format!("{first}+{second}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReadoutKind {
    Single { ancilla: usize },
    Joint { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Readout {
    /// Pattern key the outcome is recorded under.
    pub key: String,
    pub kind: ReadoutKind,
}

impl Readout {
    fn ancillas(&self) -> Vec<usize> {
        match self.kind {
            ReadoutKind::Single { ancilla } => alloc::vec![ancilla],
            ReadoutKind::Joint { first, second } => alloc::vec![first, second],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Transform(ModeTransform),
    Entangle(NonAbsorbingDetector),
    Click(AbsorbingDetector),
    Readout(Readout),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedEvent {
    pub time: i64,
    pub kind: EventKind,
}

/// Checks the causal structure both pipelines rely on.
pub fn validate_events(events: &[TimedEvent]) -> Result<()> {
    let mut absorbed: BTreeMap<usize, i64> = BTreeMap::new();
    let mut entangled: BTreeMap<usize, i64> = BTreeMap::new();
    let mut read: BTreeMap<usize, i64> = BTreeMap::new();
    let mut last = i64::MIN;
    for ev in events {
        if ev.time < last {
            return Err(Error::Ordering(format!("event at time {} follows time {last}", ev.time)));
        }
        last = ev.time;
        let touches = |modes: &mut dyn Iterator<Item = usize>| -> Result<()> {
            for m in modes {
                if let Some(t) = absorbed.get(&m) {
                    return Err(Error::Ordering(format!("mode {m} used at time {} after absorption at time {t}", ev.time)));
                }
            }
            Ok(())
        };
        match &ev.kind {
            EventKind::Transform(t) => touches(&mut t.touched_modes())?,
            EventKind::Entangle(d) => {
                touches(&mut core::iter::once(d.mode))?;
                if entangled.insert(d.ancilla, ev.time).is_some() {
                    return Err(Error::Ordering(format!("ancilla {} interacts twice", d.ancilla)));
                }
                if read.contains_key(&d.ancilla) {
                    return Err(Error::Ordering(format!("ancilla {} interacts after its readout", d.ancilla)));
                }
            }
            EventKind::Click(d) => {
                if absorbed.insert(d.mode, ev.time).is_some() {
                    return Err(Error::Ordering(format!("mode {} consumed twice", d.mode)));
                }
            }
            EventKind::Readout(r) => {
                for a in r.ancillas() {
                    match entangled.get(&a) {
                        Some(&t) if t < ev.time => {}
                        _ => return Err(Error::Ordering(format!("ancilla {a} read out at time {} before interacting", ev.time))),
                    }
                    if read.insert(a, ev.time).is_some() {
                        return Err(Error::Ordering(format!("ancilla {a} read out twice")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Projective branches of one measurement event, without renormalization.
fn measurement_branches(state: &StateVector, kind: &EventKind) -> Result<Vec<(String, Outcome, StateVector)>> {
    Ok(match kind {
        EventKind::Click(d) => alloc::vec![
            (d.label.clone(), Outcome::Clicked, project_occupation(state, d.mode, true)),
            (d.label.clone(), Outcome::Silent, project_occupation(state, d.mode, false)),
        ],
        EventKind::Readout(r) => match r.kind {
            ReadoutKind::Single { ancilla } => alloc::vec![
                (r.key.clone(), Outcome::Scattered, project_ancilla_bit(state, ancilla, 1)),
                (r.key.clone(), Outcome::Pristine, project_ancilla_bit(state, ancilla, 0)),
            ],
            ReadoutKind::Joint { first, second } => {
                let p = joint_projectors(state, first, second)?;
                alloc::vec![
                    (r.key.clone(), Outcome::Plus, apply_pair_operator(state, first, second, &p.plus)?),
                    (r.key.clone(), Outcome::Minus, apply_pair_operator(state, first, second, &p.minus)?),
                    (r.key.clone(), Outcome::Outside, apply_pair_operator(state, first, second, &p.outside)?),
                ]
            }
        },
        _ => unreachable!("not a measurement"),
    })
}

fn apply_unitary_event(state: &StateVector, kind: &EventKind) -> Result<StateVector> {
    match kind {
        EventKind::Transform(t) => apply_mode_transform(state, t),
        EventKind::Entangle(d) => scatter_entangle(state, d),
        _ => unreachable!("not a unitary event"),
    }
}

fn is_measurement(kind: &EventKind) -> bool {
    matches!(kind, EventKind::Click(_) | EventKind::Readout(_))
}

struct Branch {
    pattern: ClickPattern,
    probability: f64,
    state: StateVector,
}

/// Walks the events in time order, projecting and renormalizing at every
/// click and readout. Branches of zero probability are dropped.
pub fn run_collapse_pipeline(initial: &StateVector, events: &[TimedEvent]) -> Result<OutcomeDistribution> {
    validate_events(events)?;
    let mut branches = alloc::vec![Branch { pattern: ClickPattern::new(), probability: 1.0, state: initial.normalized()? }];
    for ev in events {
        if !is_measurement(&ev.kind) {
            for b in &mut branches {
                b.state = apply_unitary_event(&b.state, &ev.kind)?;
            }
            continue;
        }
        let mut next = Vec::with_capacity(branches.len() * 2);
        for b in branches {
            for (label, outcome, component) in measurement_branches(&b.state, &ev.kind)? {
                let p = component.norm_sqr();
                if p == 0.0 {
                    continue;
                }
                let component = match &ev.kind {
                    EventKind::Click(d) if outcome == Outcome::Clicked => component.annihilate(d.mode)?,
                    _ => component,
                };
                let mut pattern = b.pattern.clone();
                pattern.insert(label, outcome);
                next.push(Branch { pattern, probability: b.probability * p, state: component.normalized()? });
            }
        }
        branches = next;
    }
    Ok(OutcomeDistribution::from_entries(
        branches
            .into_iter()
            .map(|b| OutcomeEntry { pattern: b.pattern, probability: b.probability, post_state: Some(b.state) })
            .collect(),
    ))
}

/// Applies every transform and interaction first, then evaluates the joint
/// Born rule over the product of all click and readout projectors.
pub fn run_unitary_pipeline(initial: &StateVector, events: &[TimedEvent]) -> Result<OutcomeDistribution> {
    validate_events(events)?;
    let mut state = initial.normalized()?;
    for ev in events.iter().filter(|e| !is_measurement(&e.kind)) {
        state = apply_unitary_event(&state, &ev.kind)?;
    }
    let measurements: Vec<&EventKind> = events.iter().map(|e| &e.kind).filter(|k| is_measurement(k)).collect();
    let mut entries = Vec::new();
    joint_born(&state, &measurements, ClickPattern::new(), &mut entries)?;
    for e in &mut entries {
        if let Some(s) = e.post_state.take() {
            let mut absorbed = s;
            for kind in &measurements {
                if let EventKind::Click(d) = kind {
                    if e.pattern.get(&d.label) == Some(Outcome::Clicked) {
                        absorbed = absorbed.annihilate(d.mode)?;
                    }
                }
            }
            e.post_state = Some(absorbed.normalized()?);
        }
    }
    Ok(OutcomeDistribution::from_entries(entries))
}

fn joint_born(state: &StateVector, rest: &[&EventKind], pattern: ClickPattern, out: &mut Vec<OutcomeEntry>) -> Result<()> {
    let Some((first, rest)) = rest.split_first() else {
        let probability = state.norm_sqr();
        if probability > 0.0 {
            out.push(OutcomeEntry { pattern, probability, post_state: Some(state.clone()) });
        }
        return Ok(());
    };
    for (label, outcome, component) in measurement_branches(state, first)? {
        if component.is_zero() {
            continue;
        }
        let mut p = pattern.clone();
        p.insert(label, outcome);
        joint_born(&component, rest, p, out)?;
    }
    Ok(())
}

impl fmt::Display for OutcomeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{}\t{}", e.pattern, e.probability)?;
        }
        Ok(())
    }
}

impl From<&AbsorbingDetector> for ClickPattern {
    fn from(d: &AbsorbingDetector) -> Self {
        ClickPattern::new().with(d.label.to_string(), Outcome::Clicked)
    }
}
