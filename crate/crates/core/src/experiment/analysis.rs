use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ExperimentGraph;
use crate::measurement::{ClickPattern, Outcome, OutcomeDistribution, OutcomeEntry, ReadoutBasis};
use crate::{Error, Result, CONVENTION};

/// Conditional distribution over the entries accepted by `pred`.
pub fn post_select(dist: &OutcomeDistribution, mut pred: impl FnMut(&ClickPattern) -> bool) -> Result<OutcomeDistribution> {
    let kept: Vec<OutcomeEntry> = dist.entries().iter().filter(|e| pred(&e.pattern)).cloned().collect();
    let total: f64 = kept.iter().map(|e| e.probability).sum();
    if total <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    Ok(OutcomeDistribution::from_entries(
        kept.into_iter().map(|e| OutcomeEntry { probability: e.probability / total, ..e }).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    /// Absorbing detector clicked, or computational readout found the
    /// scattered level.
    Positive(String),
    /// Absorbing detector silent, or computational readout pristine.
    Negative(String),
    Exact(String, Outcome),
    /// Outcome of any joint plus/minus readout.
    Joint(Outcome),
}

impl Term {
    fn matches(&self, pattern: &ClickPattern) -> bool {
        match self {
            Self::Positive(l) => matches!(pattern.get(l), Some(Outcome::Clicked | Outcome::Scattered)),
            Self::Negative(l) => matches!(pattern.get(l), Some(Outcome::Silent | Outcome::Pristine)),
            Self::Exact(l, o) => pattern.get(l) == Some(*o),
            Self::Joint(o) => pattern.iter().any(|(k, v)| k.contains('+') && v == *o),
        }
    }

    fn mentions(&self, label: &str) -> bool {
        match self {
            Self::Positive(l) | Self::Negative(l) | Self::Exact(l, _) => l == label,
            Self::Joint(_) => label.contains('+'),
        }
    }
}

/// A conjunction of outcome terms, optionally restricted to coincidence
/// events in which every emitted particle was absorbed by a detector.
///
/// Text form: terms separated by `&` or `,`; `X` (clicked/scattered), `!X`
/// (silent/pristine), `X=outcome`, or a bare `plus`/`minus`/`outside` for
/// the joint readout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub terms: Vec<Term>,
    pub coincidence: bool,
}

impl Condition {
    /// Parses the text form; the result conditions on coincidences.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for raw in text.split(['&', ',']) {
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(Error::InvalidCondition(format!("empty term in `{text}`")));
            }
            let term = if let Some(rest) = raw.strip_prefix('!') {
                Term::Negative(check_label(rest)?.into())
            } else if let Some((label, outcome)) = raw.split_once('=') {
                let o = Outcome::from_name(outcome.trim())
                    .ok_or_else(|| Error::InvalidCondition(format!("unknown outcome `{}`", outcome.trim())))?;
                Term::Exact(label.trim().into(), o)
            } else if let Some(o) =
                Outcome::from_name(raw).filter(|o| matches!(o, Outcome::Plus | Outcome::Minus | Outcome::Outside))
            {
                Term::Joint(o)
            } else {
                Term::Positive(check_label(raw)?.into())
            };
            terms.push(term);
        }
        Ok(Self { terms, coincidence: true })
    }

    pub fn matches(&self, pattern: &ClickPattern, particles: usize) -> bool {
        (!self.coincidence || pattern.clicked().count() == particles) && self.terms.iter().all(|t| t.matches(pattern))
    }

    pub fn mentions(&self, label: &str) -> bool {
        self.terms.iter().any(|t| t.mentions(label))
    }

    /// Column-name fragment, e.g. `CD_minus` for `C&D&minus`.
    pub fn header(&self) -> String {
        let mut head = String::new();
        let mut tail: Vec<String> = Vec::new();
        for t in &self.terms {
            match t {
                Term::Positive(l) => head.push_str(l),
                Term::Negative(l) => tail.push(format!("not{l}")),
                Term::Exact(l, o) => tail.push(format!("{}_{}", l.replace('+', ""), o.name())),
                Term::Joint(o) => tail.push(o.name().into()),
            }
        }
        if !head.is_empty() {
            tail.insert(0, head);
        }
        tail.join("_")
    }
}

fn check_label(label: &str) -> Result<&str> {
    let ok = !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '+');
    if ok {
        Ok(label)
    } else {
        Err(Error::InvalidCondition(format!("bad label `{label}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaParam {
    Theta1,
    Theta2,
}

impl ThetaParam {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Theta1 => "theta1",
            Self::Theta2 => "theta2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "theta1" => Some(Self::Theta1),
            "theta2" => Some(Self::Theta2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub parameter: ThetaParam,
    pub grid: Vec<f64>,
    pub condition: Option<Condition>,
}

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => alloc::vec![from],
        n => (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// What a table column measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub header: String,
    clicked: Option<Vec<String>>,
    target: Option<(String, Outcome)>,
}

impl Column {
    fn matches(&self, pattern: &ClickPattern) -> bool {
        let clicked_ok = match &self.clicked {
            Some(set) => {
                let mut got: Vec<&str> = pattern.clicked().collect();
                got.sort_unstable();
                let mut want: Vec<&str> = set.iter().map(String::as_str).collect();
                want.sort_unstable();
                got == want
            }
            None => true,
        };
        let target_ok = match &self.target {
            Some((label, outcome)) => pattern.get(label) == Some(*outcome),
            None => true,
        };
        clicked_ok && target_ok
    }
}

/// Readout outcomes reported as columns: `(pattern key, outcome, fragment)`.
fn readout_targets(graph: &ExperimentGraph) -> Vec<(String, Outcome, String)> {
    let mut out = Vec::new();
    for d in graph.ndetectors.iter().filter(|d| d.basis == ReadoutBasis::Computational) {
        out.push((d.label.clone(), Outcome::Scattered, d.label.clone()));
    }
    let joints = graph.joint_readouts();
    let single = joints.len() == 1;
    for (key, ..) in joints {
        for o in [Outcome::Plus, Outcome::Minus] {
            let frag = if single { o.name().to_string() } else { format!("{}_{}", key.replace('+', ""), o.name()) };
            out.push((key.clone(), o, frag));
        }
    }
    out
}

fn subsets<T: Clone>(items: &[T], size: usize) -> Vec<Vec<T>> {
    if size == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, x) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], size - 1) {
            rest.insert(0, x.clone());
            out.push(rest);
        }
    }
    out
}

/// Column layout for a graph.
///
/// Without a condition: the probability that exactly the set `S` of absorbing
/// detectors clicks, for every `S` no larger than the particle count
/// (`p_none`, `p_C`, ..., `p_CD`, ...), then for every full coincidence set
/// the joint probability with each readout outcome (`p_CD_B1`, `p_CD_minus`).
///
/// With a condition `F`: the conditional click probability of every absorbing
/// detector not named in `F` (`p_D_given_C`) followed by the conditional
/// readout outcomes (`p_B1_given_C`, `p_minus_given_CD`).
pub fn sweep_columns(graph: &ExperimentGraph, condition: Option<&Condition>) -> Vec<Column> {
    let labels: Vec<String> = graph.detectors.iter().map(|d| d.label.clone()).collect();
    let particles = graph.particle_count();
    let readouts = readout_targets(graph);
    let mut columns = Vec::new();
    match condition {
        None => {
            for k in 0..=particles.min(labels.len()) {
                for set in subsets(&labels, k) {
                    let name = if set.is_empty() { "none".into() } else { set.concat() };
                    columns.push(Column { header: format!("p_{name}"), clicked: Some(set), target: None });
                }
            }
            if particles > 0 && particles <= labels.len() {
                for set in subsets(&labels, particles) {
                    for (key, outcome, frag) in &readouts {
                        columns.push(Column {
                            header: format!("p_{}_{frag}", set.concat()),
                            clicked: Some(set.clone()),
                            target: Some((key.clone(), *outcome)),
                        });
                    }
                }
            }
        }
        Some(cond) => {
            let given = cond.header();
            for l in labels.iter().filter(|l| !cond.mentions(l)) {
                columns.push(Column {
                    header: format!("p_{l}_given_{given}"),
                    clicked: None,
                    target: Some((l.clone(), Outcome::Clicked)),
                });
            }
            for (key, outcome, frag) in readouts.iter().filter(|(k, ..)| !cond.mentions(k)) {
                columns.push(Column {
                    header: format!("p_{frag}_given_{given}"),
                    clicked: None,
                    target: Some((key.clone(), *outcome)),
                });
            }
        }
    }
    columns
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub theta: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableMeta {
    pub graph_hash: String,
    pub convention: String,
    pub version: String,
    pub parameter: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub meta: TableMeta,
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn column(&self, header: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == header)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }
}

/// Evaluates every column on one graph.
pub fn evaluate_row(graph: &ExperimentGraph, columns: &[Column], condition: Option<&Condition>) -> Result<Vec<f64>> {
    let dist = graph.run()?;
    let particles = graph.particle_count();
    let dist = match condition {
        Some(c) => post_select(&dist, |p| c.matches(p, particles))?,
        None => dist,
    };
    Ok(columns.iter().map(|col| dist.probability_where(|p| col.matches(p))).collect())
}

/// One run per grid point of `builder(theta)`.
pub fn sweep<B>(builder: B, config: &SweepConfig) -> Result<ResultTable>
where
    B: Fn(f64) -> Result<ExperimentGraph>,
{
    let first = *config.grid.first().ok_or_else(|| Error::Domain("sweep grid is empty".into()))?;
    let template = builder(first)?;
    let cond = config.condition.as_ref();
    let columns = sweep_columns(&template, cond);
    let rows = config
        .grid
        .iter()
        .map(|&theta| Ok(ResultRow { theta, values: evaluate_row(&builder(theta)?, &columns, cond)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResultTable {
        meta: TableMeta::new(&template, config.parameter),
        columns: columns.into_iter().map(|c| c.header).collect(),
        rows,
    })
}

impl TableMeta {
    pub fn new(graph: &ExperimentGraph, parameter: ThetaParam) -> Self {
        Self {
            graph_hash: graph.content_hash(),
            convention: CONVENTION.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            parameter: parameter.name().into(),
        }
    }
}

/// Fringe visibility `(max − min)/(max + min)`.
pub fn visibility(column: &[f64]) -> Result<f64> {
    if column.is_empty() {
        return Err(Error::Domain("visibility of an empty column".into()));
    }
    let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = column.iter().copied().fold(f64::INFINITY, f64::min);
    if max + min <= 0.0 {
        return Err(Error::Domain("visibility of an all-zero column".into()));
    }
    Ok((max - min) / (max + min))
}

/// Multinomial draw of `shots` outcomes, reproducible for a fixed seed.
/// Every pattern of the distribution is reported, including zero counts.
pub fn sample(dist: &OutcomeDistribution, shots: u64, seed: u64) -> Result<Vec<(ClickPattern, u64)>> {
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    let total = dist.total();
    if dist.is_empty() || total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let mut cumulative = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for e in dist.entries() {
        acc += e.probability;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.gen::<f64>() * total;
        let k = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        *counts.entry(k).or_default() += 1;
    }
    Ok(dist.entries().iter().enumerate().map(|(k, e)| (e.pattern.clone(), counts.get(&k).copied().unwrap_or(0))).collect())
}
