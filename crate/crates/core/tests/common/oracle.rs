//! Brute-force first-quantized evaluator used as an independent reference.
//!
//! Particles carry explicit slot labels; the initial state is an explicit
//! antisymmetrized sum over permutations and every optical element acts on
//! each slot as a one-particle map. No creation operators, no sign
//! bookkeeping beyond the initial Slater determinant.

#![allow(dead_code)]

use std::collections::BTreeMap;

use interfersim_core::experiment::{Element, ExperimentGraph};
use interfersim_core::measurement::{ClickPattern, Outcome, ReadoutBasis};
use interfersim_core::Complex64;

/// Labeled-particle amplitudes keyed by (mode of each slot, ancilla bits).
pub type Wavefunction = BTreeMap<(Vec<usize>, u32), Complex64>;

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    if n == 0 {
        return vec![(vec![], 1.0)];
    }
    let mut out = Vec::new();
    for (perm, sign) in permutations(n - 1) {
        // insert n-1 at every position; each step right of the end is one transposition
        for pos in 0..=perm.len() {
            let mut p = perm.clone();
            p.insert(pos, n - 1);
            let moves = perm.len() - pos;
            out.push((p, if moves % 2 == 0 { sign } else { -sign }));
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `(1/√n!) Σ_σ sgn(σ) |modes[σ(1)], …, modes[σ(n)]⟩`
pub fn slater(modes: &[usize]) -> Wavefunction {
    let norm = 1.0 / factorial(modes.len()).sqrt();
    let mut psi = Wavefunction::new();
    for (perm, sign) in permutations(modes.len()) {
        let slots: Vec<usize> = perm.iter().map(|&i| modes[i]).collect();
        *psi.entry((slots, 0)).or_default() += Complex64::new(sign * norm, 0.0);
    }
    psi.retain(|_, a| a.norm() > 0.0);
    psi
}

/// One-particle map `mode -> [(mode', coefficient)]`; modes absent from the
/// map are left alone.
type SingleParticle = BTreeMap<usize, Vec<(usize, Complex64)>>;

fn one_particle_map(element: &Element) -> SingleParticle {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut map = SingleParticle::new();
    match element {
        Element::BeamSplitter { in_a, in_b, out_a, out_b, .. } => {
            map.insert(*in_a, vec![(*out_a, Complex64::new(h, 0.0)), (*out_b, Complex64::new(h, 0.0))]);
            map.insert(*in_b, vec![(*out_a, Complex64::new(h, 0.0)), (*out_b, Complex64::new(-h, 0.0))]);
        }
        Element::Phase { shifter, .. } => {
            map.insert(shifter.mode, vec![(shifter.mode, Complex64::from_polar(1.0, shifter.theta))]);
        }
        Element::Unitary { transform, .. } => {
            let m = transform.matrix();
            for (col, &input) in transform.inputs().iter().enumerate() {
                let image = transform.outputs().iter().enumerate().map(|(row, &out)| (out, m.get(row, col))).collect();
                map.insert(input, image);
            }
        }
    }
    map
}

pub fn apply_one_particle(psi: &Wavefunction, map: &SingleParticle) -> Wavefunction {
    let mut out = psi.clone();
    let n = psi.keys().next().map(|(s, _)| s.len()).unwrap_or(0);
    for slot in 0..n {
        let mut next = Wavefunction::new();
        for ((slots, anc), amp) in &out {
            match map.get(&slots[slot]) {
                None => *next.entry((slots.clone(), *anc)).or_default() += amp,
                Some(image) => {
                    for &(m, u) in image {
                        let mut s = slots.clone();
                        s[slot] = m;
                        *next.entry((s, *anc)).or_default() += amp * u;
                    }
                }
            }
        }
        out = next;
    }
    out.retain(|_, a| a.norm() > 1e-15);
    out
}

fn entangle(psi: &Wavefunction, mode: usize, ancilla: usize, overlap: f64) -> Wavefunction {
    let r = (1.0 - overlap * overlap).max(0.0).sqrt();
    let mut out = Wavefunction::new();
    for ((slots, anc), amp) in psi {
        if slots.contains(&mode) {
            assert_eq!(anc >> ancilla & 1, 0, "ancilla already scattered");
            *out.entry((slots.clone(), *anc)).or_default() += amp * overlap;
            *out.entry((slots.clone(), anc | 1 << ancilla)).or_default() += amp * r;
        } else {
            *out.entry((slots.clone(), *anc)).or_default() += amp;
        }
    }
    out
}

/// State right before any absorbing detector or readout acts.
pub fn evolve(graph: &ExperimentGraph) -> Wavefunction {
    let modes: Vec<usize> = graph.sources.iter().map(|s| s.mode).collect();
    let mut psi = slater(&modes);
    let mut steps: Vec<(i64, usize, Step)> = Vec::new();
    for e in &graph.elements {
        steps.push((e.time(), 0, Step::Optics(one_particle_map(e))));
    }
    for d in &graph.ndetectors {
        let overlap = graph.space.ancillas()[d.ancilla].scattered_overlap;
        steps.push((d.interaction_time, 1, Step::Entangle(d.mode, d.ancilla, overlap)));
    }
    steps.sort_by_key(|(t, k, _)| (*t, *k));
    for (_, _, step) in steps {
        psi = match step {
            Step::Optics(map) => apply_one_particle(&psi, &map),
            Step::Entangle(m, a, s) => entangle(&psi, m, a, s),
        };
    }
    psi
}

enum Step {
    Optics(SingleParticle),
    Entangle(usize, usize, f64),
}

/// Orthonormal basis of the ancilla pair space with outcome labels; index
/// `(bit_first << 1) | bit_second`.
fn pair_basis(s1: f64, s2: f64) -> Vec<(Outcome, [f64; 4])> {
    let r1 = (1.0 - s1 * s1).max(0.0).sqrt();
    let r2 = (1.0 - s2 * s2).max(0.0).sqrt();
    let a = [s2, r2, 0.0, 0.0];
    let b = [s1, 0.0, r1, 0.0];
    let mut basis: Vec<(Outcome, [f64; 4])> = Vec::new();
    let push = |outcome: Outcome, v: [f64; 4], basis: &mut Vec<(Outcome, [f64; 4])>| {
        let mut w = v;
        for (_, e) in basis.iter() {
            let dot: f64 = (0..4).map(|k| e[k] * w[k]).sum();
            for k in 0..4 {
                w[k] -= dot * e[k];
            }
        }
        let n: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 && basis.len() < 4 {
            basis.push((outcome, w.map(|x| x / n)));
        }
    };
    push(Outcome::Plus, std::array::from_fn(|k| a[k] + b[k]), &mut basis);
    push(Outcome::Minus, std::array::from_fn(|k| a[k] - b[k]), &mut basis);
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        push(Outcome::Outside, e, &mut basis);
    }
    basis
}

/// Exact joint distribution over every absorbing detector and readout.
pub fn distribution(graph: &ExperimentGraph) -> BTreeMap<ClickPattern, f64> {
    let psi = evolve(graph);

    // joint readouts: plusminus detectors grouped by readout time
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, d) in graph.ndetectors.iter().enumerate() {
        if d.basis == ReadoutBasis::PlusMinus {
            groups.entry(d.readout_time).or_default().push(i);
        }
    }
    let pairs: Vec<(String, usize, usize)> = groups
        .values()
        .map(|g| {
            assert_eq!(g.len(), 2);
            let (d1, d2) = (&graph.ndetectors[g[0]], &graph.ndetectors[g[1]]);
            (format!("{}+{}", d1.label, d2.label), d1.ancilla, d2.ancilla)
        })
        .collect();

    // rotate each pair into its readout basis; the key's ancilla bits then
    // hold basis indices for paired ancillas
    let mut rotated = psi;
    let mut pair_bases = Vec::new();
    for (_, first, second) in &pairs {
        let ancillas = graph.space.ancillas();
        let basis = pair_basis(ancillas[*first].scattered_overlap, ancillas[*second].scattered_overlap);
        let mask = (1u32 << first) | (1u32 << second);
        let mut next = Wavefunction::new();
        for ((slots, anc), amp) in &rotated {
            let k = ((anc >> first & 1) << 1 | (anc >> second & 1)) as usize;
            for (j, (_, e)) in basis.iter().enumerate() {
                if e[k] != 0.0 {
                    let bits = (anc & !mask) | ((j as u32 >> 1) << first) | ((j as u32 & 1) << second);
                    *next.entry((slots.clone(), bits)).or_default() += amp * e[k];
                }
            }
        }
        rotated = next;
        pair_bases.push(basis);
    }

    let mut dist: BTreeMap<ClickPattern, f64> = BTreeMap::new();
    for ((slots, anc), amp) in &rotated {
        let mut pattern = ClickPattern::new();
        for d in &graph.detectors {
            pattern.insert(d.label.clone(), if slots.contains(&d.mode) { Outcome::Clicked } else { Outcome::Silent });
        }
        for d in graph.ndetectors.iter().filter(|d| d.basis == ReadoutBasis::Computational) {
            let bit = anc >> d.ancilla & 1;
            pattern.insert(d.label.clone(), if bit == 1 { Outcome::Scattered } else { Outcome::Pristine });
        }
        for ((key, first, second), basis) in pairs.iter().zip(&pair_bases) {
            let j = ((anc >> first & 1) << 1 | (anc >> second & 1)) as usize;
            pattern.insert(key.clone(), basis[j].0);
        }
        *dist.entry(pattern).or_default() += amp.norm_sqr();
    }
    dist
}

/// Largest per-pattern difference between the oracle and an engine
/// distribution, over the union of both supports.
pub fn max_deviation(oracle: &BTreeMap<ClickPattern, f64>, engine: &interfersim_core::measurement::OutcomeDistribution) -> f64 {
    let mut worst: f64 = 0.0;
    for (pattern, p) in oracle {
        worst = worst.max((p - engine.probability(pattern)).abs());
    }
    for e in engine.entries() {
        let p = oracle.get(&e.pattern).copied().unwrap_or(0.0);
        worst = worst.max((p - e.probability).abs());
    }
    worst
}
