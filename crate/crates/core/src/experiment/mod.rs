//! Event-ordered interferometer graphs, the two shipped experiments, and the
//! analysis layer on top of the measurement pipelines.

mod analysis;
mod builders;
mod random;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::fock::{FockSpace, StateVector};
use crate::measurement::{
    joint_key, run_collapse_pipeline, run_unitary_pipeline, AbsorbingDetector, EventKind, NonAbsorbingDetector,
    OutcomeDistribution, Readout, ReadoutBasis, ReadoutKind, TimedEvent,
};
use crate::optics::{make_beam_splitter, ModeTransform, PhaseShifter};
use crate::{Error, Result, TOLERANCE};

pub use analysis::{
    evaluate_row, linspace, post_select, sample, sweep, sweep_columns, visibility, Column, Condition, ResultRow, ResultTable,
    SweepConfig, TableMeta, Term, ThetaParam,
};
pub use builders::{build_part_a, build_part_a_with, build_part_b};
pub use random::random_graph;

/// Spin label shared by every source; spin is not dynamical.
pub const SPIN_TAG: &str = "g";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceNode {
    pub label: String,
    pub mode: usize,
    pub spin_tag: String,
}

impl SourceNode {
    pub fn new(label: impl Into<String>, mode: usize) -> Self {
        Self { label: label.into(), mode, spin_tag: SPIN_TAG.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    /// 50/50 splitter with the crate's fixed phase convention.
    BeamSplitter {
        label: String,
        in_a: usize,
        in_b: usize,
        out_a: usize,
        out_b: usize,
        time: i64,
    },
    Phase {
        shifter: PhaseShifter,
        time: i64,
    },
    /// Arbitrary mode unitary; not expressible in the text format.
    Unitary {
        label: String,
        transform: ModeTransform,
        time: i64,
    },
}

impl Element {
    pub fn time(&self) -> i64 {
        match self {
            Self::BeamSplitter { time, .. } | Self::Phase { time, .. } | Self::Unitary { time, .. } => *time,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Self::BeamSplitter { label, .. } | Self::Unitary { label, .. } => Some(label),
            Self::Phase { .. } => None,
        }
    }

    pub fn transform(&self) -> Result<ModeTransform> {
        match self {
            Self::BeamSplitter { in_a, in_b, out_a, out_b, .. } => make_beam_splitter(*in_a, *in_b, *out_a, *out_b),
            Self::Phase { shifter, .. } => Ok(shifter.transform()),
            Self::Unitary { transform, .. } => Ok(transform.clone()),
        }
    }

    fn ports(&self) -> (Vec<usize>, Vec<usize>) {
        match self {
            Self::BeamSplitter { in_a, in_b, out_a, out_b, .. } => (alloc::vec![*in_a, *in_b], alloc::vec![*out_a, *out_b]),
            Self::Phase { shifter, .. } => (alloc::vec![shifter.mode], alloc::vec![shifter.mode]),
            Self::Unitary { transform, .. } => (transform.inputs().to_vec(), transform.outputs().to_vec()),
        }
    }
}

/// Which graph item a validation problem belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Graph,
    Mode(usize),
    Ancilla(usize),
    Source(usize),
    Element(usize),
    NDetector(usize),
    Detector(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: Subject,
    pub message: String,
}

/// Sources, time-ordered optical elements, non-absorbing detectors and
/// absorbing detectors over one Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGraph {
    pub space: FockSpace,
    pub sources: Vec<SourceNode>,
    /// Non-decreasing in time.
    pub elements: Vec<Element>,
    pub ndetectors: Vec<NonAbsorbingDetector>,
    pub detectors: Vec<AbsorbingDetector>,
}

impl ExperimentGraph {
    pub fn new(space: FockSpace) -> Self {
        Self { space, sources: Vec::new(), elements: Vec::new(), ndetectors: Vec::new(), detectors: Vec::new() }
    }

    pub fn particle_count(&self) -> usize {
        self.sources.len()
    }

    /// Stable sort of the elements by time.
    pub fn sort_elements(&mut self) {
        self.elements.sort_by_key(Element::time);
    }

    /// Every structural problem in the graph.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |subject, message: String| out.push(Violation { subject, message });
        let space = &self.space;
        let n_modes = space.modes().len();
        let mode_name = |m: usize| space.modes().get(m).map(|x| x.label.clone()).unwrap_or_else(|| format!("#{m}"));

        let labeled = self
            .sources
            .iter()
            .enumerate()
            .map(|(i, s)| (Subject::Source(i), s.label.as_str()))
            .chain(self.elements.iter().enumerate().filter_map(|(i, e)| e.label().map(|l| (Subject::Element(i), l))))
            .chain(self.ndetectors.iter().enumerate().map(|(i, d)| (Subject::NDetector(i), d.label.as_str())))
            .chain(self.detectors.iter().enumerate().map(|(i, d)| (Subject::Detector(i), d.label.as_str())));
        let mut names: BTreeSet<&str> = BTreeSet::new();
        for (subject, name) in labeled {
            if !names.insert(name) {
                push(subject, format!("duplicate name `{name}`"));
            }
        }

        let mut fed: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, s) in self.sources.iter().enumerate() {
            if s.mode >= n_modes {
                push(Subject::Source(i), format!("unknown mode index {}", s.mode));
            } else if fed.insert(s.mode, i).is_some() {
                push(Subject::Source(i), format!("mode `{}` fed by two sources", mode_name(s.mode)));
            }
        }

        let mut absorbed: BTreeMap<usize, i64> = BTreeMap::new();
        for (i, d) in self.detectors.iter().enumerate() {
            if d.mode >= n_modes {
                push(Subject::Detector(i), format!("unknown mode index {}", d.mode));
            } else if absorbed.insert(d.mode, d.click_time).is_some() {
                push(Subject::Detector(i), format!("mode `{}` consumed twice", mode_name(d.mode)));
            }
        }
        let after_absorption = |subject, m: usize, t: i64, push: &mut dyn FnMut(Subject, String)| {
            if let Some(&ct) = absorbed.get(&m) {
                if t >= ct {
                    push(subject, format!("mode `{}` used at time {t} but absorbed at time {ct}", mode_name(m)));
                }
            }
        };

        let mut last_time = i64::MIN;
        for (i, e) in self.elements.iter().enumerate() {
            if e.time() < last_time {
                push(Subject::Element(i), format!("time {} precedes earlier element time {last_time}", e.time()));
            }
            last_time = last_time.max(e.time());
            let (ins, outs) = e.ports();
            if let Some(m) = ins.iter().chain(&outs).find(|&&m| m >= n_modes) {
                push(Subject::Element(i), format!("unknown mode index {m}"));
                continue;
            }
            for ports in [&ins, &outs] {
                if let Some((_, m)) = ports.iter().enumerate().find(|(k, m)| ports[..*k].contains(m)) {
                    push(Subject::Element(i), format!("port mode `{}` repeated", mode_name(*m)));
                }
            }
            if let Element::Unitary { transform, .. } = e {
                let dev = transform.matrix().unitarity_deviation();
                if dev > TOLERANCE {
                    push(Subject::Element(i), format!("transform is not unitary (max deviation {dev:e})"));
                }
            }
            let mut touched: Vec<usize> = ins.clone();
            touched.extend(outs.iter().filter(|m| !ins.contains(m)));
            for m in touched {
                after_absorption(Subject::Element(i), m, e.time(), &mut push);
            }
        }

        let mut ancilla_users: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, d) in self.ndetectors.iter().enumerate() {
            if d.mode >= n_modes {
                push(Subject::NDetector(i), format!("unknown mode index {}", d.mode));
                continue;
            }
            if d.ancilla >= space.ancillas().len() {
                push(Subject::NDetector(i), format!("unknown ancilla index {}", d.ancilla));
                continue;
            }
            if ancilla_users.insert(d.ancilla, i).is_some() {
                push(Subject::NDetector(i), format!("ancilla `{}` used by two detectors", space.ancillas()[d.ancilla].label));
            }
            if d.readout_time <= d.interaction_time {
                push(
                    Subject::NDetector(i),
                    format!("readout time {} must follow interaction time {}", d.readout_time, d.interaction_time),
                );
            }
            after_absorption(Subject::NDetector(i), d.mode, d.interaction_time, &mut push);
        }
        let mut joint_groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, d) in self.ndetectors.iter().enumerate() {
            if d.basis == ReadoutBasis::PlusMinus {
                joint_groups.entry(d.readout_time).or_default().push(i);
            }
        }
        for (t, group) in &joint_groups {
            if group.len() != 2 {
                for &i in group {
                    push(
                        Subject::NDetector(i),
                        format!("plusminus readout at time {t} needs exactly two detectors, found {}", group.len()),
                    );
                }
            }
        }

        // a fresh output (not also an input) must be empty when the element fires
        let mut live: BTreeSet<usize> = self.sources.iter().map(|s| s.mode).collect();
        let mut order: Vec<(i64, usize)> = self.elements.iter().enumerate().map(|(i, e)| (e.time(), i)).collect();
        order.sort();
        for (_, i) in order {
            let (ins, outs) = self.elements[i].ports();
            if ins.iter().chain(&outs).any(|&m| m >= n_modes) {
                continue;
            }
            for m in outs.iter().filter(|m| !ins.contains(m)) {
                if live.contains(m) {
                    push(Subject::Element(i), format!("output mode `{}` may already be occupied", mode_name(*m)));
                }
            }
            let any_live = ins.iter().any(|m| live.contains(m));
            for m in &ins {
                live.remove(m);
            }
            if any_live {
                live.extend(outs.iter().copied());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidGraph(v.message)),
        }
    }

    /// Joint readouts as `(key, first ndetector, second ndetector, time)`,
    /// paired by readout time in declaration order.
    pub fn joint_readouts(&self) -> Vec<(String, usize, usize, i64)> {
        let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, d) in self.ndetectors.iter().enumerate() {
            if d.basis == ReadoutBasis::PlusMinus {
                groups.entry(d.readout_time).or_default().push(i);
            }
        }
        groups
            .into_iter()
            .filter(|(_, g)| g.len() == 2)
            .map(|(t, g)| (joint_key(&self.ndetectors[g[0]].label, &self.ndetectors[g[1]].label), g[0], g[1], t))
            .collect()
    }

    /// Time-ordered event list. At equal times, transforms and interactions
    /// precede clicks, which precede readouts.
    pub fn events(&self) -> Result<Vec<TimedEvent>> {
        self.validate()?;
        let mut keyed: Vec<((i64, u8), TimedEvent)> = Vec::new();
        for e in &self.elements {
            keyed.push(((e.time(), 0), TimedEvent { time: e.time(), kind: EventKind::Transform(e.transform()?) }));
        }
        for d in &self.ndetectors {
            keyed.push(((d.interaction_time, 0), TimedEvent { time: d.interaction_time, kind: EventKind::Entangle(d.clone()) }));
        }
        for d in &self.detectors {
            keyed.push(((d.click_time, 1), TimedEvent { time: d.click_time, kind: EventKind::Click(d.clone()) }));
        }
        let mut readouts: Vec<(i64, Readout)> = self
            .ndetectors
            .iter()
            .filter(|d| d.basis == ReadoutBasis::Computational)
            .map(|d| (d.readout_time, Readout { key: d.label.clone(), kind: ReadoutKind::Single { ancilla: d.ancilla } }))
            .collect();
        for (key, a, b, t) in self.joint_readouts() {
            let kind = ReadoutKind::Joint { first: self.ndetectors[a].ancilla, second: self.ndetectors[b].ancilla };
            readouts.push((t, Readout { key, kind }));
        }
        readouts.sort_by_key(|(t, _)| *t);
        for (t, r) in readouts {
            keyed.push(((t, 2), TimedEvent { time: t, kind: EventKind::Readout(r) }));
        }
        keyed.sort_by_key(|(k, _)| *k);
        Ok(keyed.into_iter().map(|(_, e)| e).collect())
    }

    /// Vacuum with one fermion per source, ancillas pristine.
    pub fn initial_state(&self) -> Result<StateVector> {
        let modes: Vec<usize> = self.sources.iter().map(|s| s.mode).collect();
        StateVector::vacuum(Arc::new(self.space.clone())).create_all(&modes)
    }

    /// Exact joint distribution from the collapse-at-click pipeline.
    pub fn run(&self) -> Result<OutcomeDistribution> {
        run_collapse_pipeline(&self.initial_state()?, &self.events()?)
    }

    pub fn run_unitary(&self) -> Result<OutcomeDistribution> {
        run_unitary_pipeline(&self.initial_state()?, &self.events()?)
    }

    /// Total-variation distance between the two pipelines' distributions.
    pub fn compare_models(&self) -> Result<f64> {
        Ok(self.run()?.total_variation(&self.run_unitary()?))
    }

    /// Copy with the phase of the first (`Theta1`) or second (`Theta2`) phase
    /// shifter replaced.
    pub fn with_theta(&self, param: ThetaParam, theta: f64) -> Result<Self> {
        let wanted = match param {
            ThetaParam::Theta1 => 0,
            ThetaParam::Theta2 => 1,
        };
        let mut next = self.clone();
        let shifter = next
            .elements
            .iter_mut()
            .filter_map(|e| match e {
                Element::Phase { shifter, .. } => Some(shifter),
                _ => None,
            })
            .nth(wanted)
            .ok_or_else(|| Error::InvalidGraph(format!("graph has no phase shifter for {}", param.name())))?;
        shifter.theta = theta;
        Ok(next)
    }

    /// The same experiment without non-absorbing detectors or ancillas.
    pub fn without_nondestructive(&self) -> Result<Self> {
        let space = FockSpace::new(self.space.modes().iter().map(|m| m.label.clone()))?;
        Ok(Self { space, ndetectors: Vec::new(), ..self.clone() })
    }

    /// Short content hash of the canonical text rendering.
    pub fn content_hash(&self) -> String {
        let text = crate::dsl::render(self).unwrap_or_else(|_| format!("{self:?}"));
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }
}
