use serde::Serialize;

use super::{Bipartition, CausalityError};
use crate::geometry::{sorkin_geometry_check, Diamond, SorkinGeometryReport};
use crate::quantum::{positive_projector, trace_distance, Channel, DensityOp, Effect};

/// One of Alice's declared choices: a non-selective operation on her factors.
#[derive(Clone, Debug, Serialize)]
pub struct Alternative {
    pub name: String,
    pub channel: Channel,
}

/// Alice acts in `o_a`, Bob applies `bob` in `o_b`, Charlie reads `C` in `o_c`.
#[derive(Clone, Debug, Serialize)]
pub struct SorkinScenario {
    pub o_a: Diamond,
    pub o_b: Diamond,
    pub o_c: Diamond,
    pub partition: Bipartition,
    pub omega: DensityOp,
    pub alternatives: Vec<Alternative>,
    pub bob: Channel,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharlieState {
    pub alternative: String,
    pub state: DensityOp,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairDistance {
    pub first: String,
    pub second: String,
    pub trace_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SorkinReport {
    pub geometry: SorkinGeometryReport,
    pub charlie_states: Vec<CharlieState>,
    pub distances: Vec<PairDistance>,
    pub max_distance: f64,
    /// Projector onto the positive part of the difference of the furthest pair.
    pub distinguishing_effect: Option<Effect>,
}

/// Charlie's reduced state for each of Alice's alternatives, followed by Bob's operation.
pub fn run_sorkin(s: &SorkinScenario, samples: usize, seed: u64) -> Result<SorkinReport, CausalityError> {
    let geometry = sorkin_geometry_check(&s.o_a, &s.o_b, &s.o_c, samples, seed);
    if !geometry.admissible() {
        return Err(CausalityError::PreconditionViolated(format!(
            "regions do not form a Sorkin configuration (ordered: {}, outer regions spacelike: {})",
            geometry.ordered, geometry.disjoint_ac
        )));
    }
    let space = s.omega.space();
    s.partition.check(space)?;
    if s.bob.space_in() != space || !s.bob.is_nonselective() {
        return Err(CausalityError::PreconditionViolated("Bob's operation must be non-selective on the system".into()));
    }
    let a = s.partition.a();
    let c_labels = s.partition.c();

    let mut charlie_states = Vec::with_capacity(s.alternatives.len());
    for alt in &s.alternatives {
        if alt.channel.space_in().labels().iter().any(|l| !a.contains(l)) {
            return Err(CausalityError::PreconditionViolated(format!("alternative `{}` acts outside Alice's factors", alt.name)));
        }
        if !alt.channel.is_nonselective() {
            return Err(CausalityError::PreconditionViolated(format!("alternative `{}` is selective", alt.name)));
        }
        let after_alice = alt.channel.embedded(space)?.apply_state(&s.omega)?;
        let after_bob = s.bob.apply_state(&after_alice)?;
        charlie_states.push(CharlieState { alternative: alt.name.clone(), state: after_bob.reduced(&c_labels)? });
    }

    let mut distances = Vec::new();
    let mut furthest: Option<(f64, usize, usize)> = None;
    for i in 0..charlie_states.len() {
        for j in i + 1..charlie_states.len() {
            let d = trace_distance(&charlie_states[i].state, &charlie_states[j].state)?;
            if furthest.is_none_or(|f| d > f.0) {
                furthest = Some((d, i, j));
            }
            distances.push(PairDistance {
                first: charlie_states[i].alternative.clone(),
                second: charlie_states[j].alternative.clone(),
                trace_distance: d,
            });
        }
    }
    let distinguishing_effect = match furthest {
        Some((_, i, j)) => {
            let (x, y) = (&charlie_states[i].state, &charlie_states[j].state);
            Some(Effect::new(x.space().clone(), positive_projector(&(x.mat() - y.mat())))?)
        }
        None => None,
    };
    Ok(SorkinReport { geometry, charlie_states, distances, max_distance: furthest.map_or(0.0, |f| f.0), distinguishing_effect })
}
