//! Compilation of an optimal vector into an executable switching schedule.
//!
//! The positive and negative supports of `a` become the branch label sets
//! `Λ+` and `Λ-`. Each half of the GHZ-like superposition dwells on label
//! `x` for `2 t |a_x| / ||a||_1`, switching through its set in order of
//! decreasing weight; both halves evolve for total time `t` (the zero-sum
//! constraint makes the two halves of the support carry equal weight
//! `||a||_1 / 2`). The accumulated relative phase is `2 t q / ||a||_1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::l1::L1Solution;
use crate::pauli::DiagonalHamiltonian;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("solution is identically zero; nothing to compile")]
    DegenerateSolution,
    #[error("switch endpoints collide with the concurrent branch label {label}")]
    LabelCollision { label: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// A timed basis switch on one branch of the superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub time: f64,
    pub branch: Branch,
    pub from: u64,
    pub to: u64,
}

/// The compiled schedule: initial label pair, time-ordered switches, final
/// pair, and the solution data the phase prediction needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub n: usize,
    pub t: f64,
    pub l1: f64,
    pub init: (u64, u64),
    pub events: Vec<SwitchEvent>,
    #[serde(rename = "final")]
    pub final_pair: (u64, u64),
    pub rounds: usize,
}

impl Protocol {
    /// Per-branch segments as (label, duration), reconstructed from the
    /// event list.
    pub fn segments(&self, branch: Branch) -> Vec<(u64, f64)> {
        let mut label = match branch {
            Branch::Plus => self.init.0,
            Branch::Minus => self.init.1,
        };
        let mut prev = 0.0;
        let mut out = Vec::new();
        for e in self.events.iter().filter(|e| e.branch == branch) {
            out.push((label, e.time - prev));
            debug_assert_eq!(e.from, label);
            label = e.to;
            prev = e.time;
        }
        out.push((label, self.t - prev));
        out
    }

    /// Merged timeline: boundaries at every event time, with the labels of
    /// both branches on each interval. Used by the dense back-ends.
    pub fn timeline(&self) -> Vec<TimelineSegment> {
        let mut out = Vec::new();
        let (mut plus, mut minus) = self.init;
        let mut prev = 0.0;
        let mut idx = 0;
        while idx < self.events.len() {
            let time = self.events[idx].time;
            if time > prev {
                out.push(TimelineSegment {
                    duration: time - prev,
                    plus,
                    minus,
                    switches: Vec::new(),
                });
            }
            let mut switches = Vec::new();
            while idx < self.events.len() && self.events[idx].time == time {
                let e = self.events[idx];
                match e.branch {
                    Branch::Plus => plus = e.to,
                    Branch::Minus => minus = e.to,
                }
                switches.push(e);
                idx += 1;
            }
            if let Some(last) = out.last_mut() {
                last.switches = switches;
            } else {
                out.push(TimelineSegment {
                    duration: 0.0,
                    plus: self.init.0,
                    minus: self.init.1,
                    switches,
                });
            }
            prev = time;
        }
        out.push(TimelineSegment {
            duration: self.t - prev,
            plus,
            minus,
            switches: Vec::new(),
        });
        out
    }
}

/// One interval of the merged timeline: both branch labels during the
/// interval, then the switches applied at its end.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelineSegment {
    pub duration: f64,
    pub plus: u64,
    pub minus: u64,
    pub switches: Vec<SwitchEvent>,
}

/// Compile a solved instance into its switching schedule.
///
/// Branch enumerations are ordered by decreasing `|a_x|`, ties by label.
/// Coincident plus/minus switch times produce adjacent event records with
/// the plus branch first.
pub fn compile(sol: &L1Solution, n: usize, t: f64) -> Result<Protocol, ProtocolError> {
    if sol.is_zero() || sol.l1() <= 0.0 {
        return Err(ProtocolError::DegenerateSolution);
    }
    let mut plus: Vec<(u64, f64)> = Vec::new();
    let mut minus: Vec<(u64, f64)> = Vec::new();
    for e in sol.support() {
        if e.v > 0.0 {
            plus.push((e.x, e.v));
        } else {
            minus.push((e.x, -e.v));
        }
    }
    debug_assert!(
        !plus.is_empty() && !minus.is_empty(),
        "zero-sum with a != 0"
    );
    let by_weight =
        |a: &(u64, f64), b: &(u64, f64)| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0));
    plus.sort_by(by_weight);
    minus.sort_by(by_weight);

    // Durations are normalized per branch so each half evolves for exactly
    // t; with the zero-sum constraint this is the 2 t |a_x| / ||a||_1
    // schedule.
    let events_for = |entries: &[(u64, f64)], branch: Branch| -> Vec<SwitchEvent> {
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        let mut acc = 0.0;
        let mut out = Vec::new();
        for k in 0..entries.len().saturating_sub(1) {
            acc += entries[k].1;
            out.push(SwitchEvent {
                time: t * acc / total,
                branch,
                from: entries[k].0,
                to: entries[k + 1].0,
            });
        }
        out
    };
    let mut events = events_for(&plus, Branch::Plus);
    events.extend(events_for(&minus, Branch::Minus));
    events.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then_with(|| match (a.branch, b.branch) {
                (Branch::Plus, Branch::Minus) => std::cmp::Ordering::Less,
                (Branch::Minus, Branch::Plus) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            })
    });

    Ok(Protocol {
        n,
        t,
        l1: sol.l1(),
        init: (plus[0].0, minus[0].0),
        events,
        final_pair: (plus[plus.len() - 1].0, minus[minus.len() - 1].0),
        rounds: sol.support_size(),
    })
}

/// Predicted relative phase under a diagonal Hamiltonian, accumulated
/// segment by segment. When the Hamiltonian is `Σ_j θ_j s_j` over the
/// generators the LP solved, this equals `2 t (α·θ) / ||a||_1`.
pub fn predict_phase(proto: &Protocol, h: &DiagonalHamiltonian) -> f64 {
    let dwell = |branch| -> f64 {
        proto
            .segments(branch)
            .iter()
            .map(|&(label, dt)| h.energy(label) * dt)
            .sum()
    };
    // Each branch accumulates exp(-i E dt); the relative phase is the
    // minus-branch phase relative to the plus branch.
    dwell(Branch::Plus) - dwell(Branch::Minus)
}

/// A CNOT-style gate record: flip `target` when qubit `control` holds
/// `polarity` (true = CNOT, false = CNOT_0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlledFlip {
    pub control: usize,
    pub polarity: bool,
    pub target: usize,
}

impl ControlledFlip {
    pub fn apply_to_label(&self, label: u64) -> u64 {
        if label >> self.control & 1 == u64::from(self.polarity) {
            label ^ (1 << self.target)
        } else {
            label
        }
    }
}

/// Gate list realizing one branch switch while fixing the other branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchDecomposition {
    pub gates: Vec<ControlledFlip>,
}

impl SwitchDecomposition {
    pub fn apply_to_label(&self, mut label: u64) -> u64 {
        for g in &self.gates {
            label = g.apply_to_label(label);
        }
        label
    }
}

/// Decompose the switch `|from⟩ → |to⟩` into controlled flips conditioned on
/// qubits where the moving branch differs from the spectator label `other`,
/// so the spectator is untouched.
pub fn decompose_switch(
    from: u64,
    to: u64,
    other: u64,
) -> Result<SwitchDecomposition, ProtocolError> {
    if from == other {
        return Err(ProtocolError::LabelCollision { label: from });
    }
    if to == other {
        return Err(ProtocolError::LabelCollision { label: to });
    }
    let mut gates = Vec::new();
    let mut cur = from;
    while cur != to {
        let diff = cur ^ to;
        let distinct = cur ^ other;
        debug_assert_ne!(distinct, 0, "branch labels stay distinct");
        // Prefer a control bit that is not itself scheduled to flip.
        let stable = distinct & !diff;
        let (control, flips) = if stable != 0 {
            (stable.trailing_zeros() as usize, diff)
        } else {
            // Every distinguishing bit must flip; hold one back as control
            // and finish it on the next pass with a fresh control.
            let c = distinct.trailing_zeros() as usize;
            (c, diff & !(1u64 << c))
        };
        let polarity = cur >> control & 1 == 1;
        let mut rest = flips;
        while rest != 0 {
            let target = rest.trailing_zeros() as usize;
            gates.push(ControlledFlip {
                control,
                polarity,
                target,
            });
            rest &= rest - 1;
        }
        cur ^= flips;
    }
    Ok(SwitchDecomposition { gates })
}

/// The interference observable `-i(|x⟩⟨y| - |y⟩⟨x|)` on the final label
/// pair `(x, y)`. Outcomes within the branch subspace are ±1 with
/// `P(±1) = (1 ± sin φ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementObservable {
    pub n: usize,
    pub plus_label: u64,
    pub minus_label: u64,
}

impl MeasurementObservable {
    pub fn expectation(&self, phase: f64) -> f64 {
        phase.sin()
    }

    pub fn variance(&self, phase: f64) -> f64 {
        let c = phase.cos();
        c * c
    }

    pub fn prob_plus(&self, phase: f64) -> f64 {
        (1.0 + phase.sin()) / 2.0
    }
}

pub fn measurement_observable(proto: &Protocol) -> MeasurementObservable {
    MeasurementObservable {
        n: proto.n,
        plus_label: proto.final_pair.0,
        minus_label: proto.final_pair.1,
    }
}
