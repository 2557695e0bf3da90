//! Hypersphere-collision sequence designer.
//!
//! Each sequence `p_n` is the center of a ball of radius `R_seq` on the
//! complex unit sphere and each PAPR probe `w_s` the center of a ball of
//! radius `R_PAPR`. Two sequence balls overlap exactly when
//! `|p_mᴴp_n| > Γ_mut = 1 − 2R_seq²`; a sequence ball overlaps a probe ball
//! exactly when `L·|w_sᴴp_n|² > Γ_PAPR`. Every outer iteration pushes
//! overlapping balls apart (coherence first, then PAPR), then adapts
//! `R_seq` and the step sizes based on whether the coherence improved.

mod config;

pub use config::*;

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, inner, normalize, Metrics, PaprProbeSet, SequenceSet};
use crate::rng;

// Candidate pairs are shortlisted from `‖d‖² = 2 − 2|g|` with this slack, then
// confirmed on the explicitly formed displacement vector.
const SHORTLIST_SLACK: f64 = 1e-9;

const STAGE_SEQUENCE: u64 = 1;
const STAGE_PAPR: u64 = 2;

/// Mutable designer state, readable through [`Solver::state`].
#[derive(Debug, Clone)]
pub struct SolverState {
    pub current: SequenceSet,
    /// Best PAPR-feasible set seen so far.
    pub best: Option<SequenceSet>,
    /// Coherence target `Γ_mut = 1 − 2R_seq²`.
    pub gamma_mut: f64,
    pub r_seq: f64,
    /// `None` while the PAPR constraint is vacuous.
    pub r_papr: Option<f64>,
    pub r_bound: f64,
    pub mu_min: f64,
    /// `mu_min` as of the previous step-size review.
    pub mu_min_prev_window: f64,
    pub tau_seq: f64,
    pub tau_papr: f64,
    pub iteration: usize,
    pub stall_counter: usize,
    pub last_iteration_feasible: bool,
}

/// Per-iteration snapshot passed to progress sinks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub iteration: usize,
    pub mu_current: f64,
    pub mu_min: f64,
    pub r_seq: f64,
    pub r_papr: Option<f64>,
    pub gamma_mut: f64,
    pub tau_seq: f64,
    pub tau_papr: f64,
    pub feasible: bool,
    pub papr_rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    Stalled,
    NoFeasibleSolution,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::MaxIterations => "max_iterations",
            Termination::Stalled => "stalled",
            Termination::NoFeasibleSolution => "no_feasible_solution",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// Coherence of the working set after the iteration.
    pub coherence: f64,
    pub mu_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: SolverConfig,
    pub papr_stage_skipped: bool,
    pub welch_bound: Option<f64>,
    pub initial_coherence: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Metrics of the returned set; `None` without a feasible set.
    pub final_metrics: Option<Metrics>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// `None` exactly when `report.termination` is `NoFeasibleSolution`.
    pub best: Option<SequenceSet>,
    pub report: RunReport,
}

/// Outcome of one PAPR-resolution stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaprStage {
    pub feasible: bool,
    /// Update rounds executed by the slowest sequence.
    pub rounds: usize,
}

pub struct Solver {
    config: SolverConfig,
    probes: Option<PaprProbeSet>,
    /// `R_seq + R_PAPR`, constant over a run.
    papr_contact: Option<f64>,
    welch_bound: Option<f64>,
    initial_coherence: f64,
    state: SolverState,
    trajectory: Vec<TrajectoryPoint>,
}

impl Solver {
    /// Starts from i.i.d. complex Gaussian sequences drawn from `config.seed`.
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let initial = crate::baselines::random_gaussian_set(
            config.assignment.clone(),
            config.count,
            config.seed,
        )?;
        Self::with_initial(config, initial)
    }

    /// Starts from a caller-supplied set (warm start).
    pub fn with_initial(config: SolverConfig, initial: SequenceSet) -> Result<Self> {
        config.validate()?;
        if initial.assignment() != &config.assignment {
            return Err(Error::validation(
                "init",
                "initial set was designed for a different subcarrier assignment",
            ));
        }
        if initial.count() != config.count {
            return Err(Error::validation(
                "init",
                format!("initial set has {} sequences, expected {}", initial.count(), config.count),
            ));
        }
        let welch = model::welch_bound(config.len(), config.count).ok();
        if welch.is_none() {
            log::warn!("N <= L: targeting orthogonality instead of the Welch bound");
        }
        let gamma_bound = welch.unwrap_or(0.0);
        let r_bound = radius_for_target(gamma_bound);

        let (probes, papr_contact) = if config.papr_is_vacuous() {
            (None, None)
        } else {
            let contact = (2.0 * (1.0 - (config.papr_threshold / config.len() as f64).sqrt())).sqrt();
            (Some(PaprProbeSet::new(&config.assignment)), Some(contact))
        };

        let initial_coherence = model::coherence(&initial)?;
        let state = SolverState {
            current: initial,
            best: None,
            gamma_mut: target_for_radius(r_bound),
            r_seq: r_bound,
            r_papr: papr_contact.map(|c| c - r_bound),
            r_bound,
            mu_min: 1.0,
            mu_min_prev_window: 1.0,
            tau_seq: config.tau_seq,
            tau_papr: config.tau_papr,
            iteration: 0,
            stall_counter: 0,
            last_iteration_feasible: false,
        };
        Ok(Self {
            config,
            probes,
            papr_contact,
            welch_bound: welch,
            initial_coherence,
            state,
            trajectory: Vec::new(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn initial_coherence(&self) -> f64 {
        self.initial_coherence
    }

    /// `R_seq + R_PAPR`, or `None` when the PAPR constraint is vacuous.
    pub fn papr_contact_distance(&self) -> Option<f64> {
        self.papr_contact
    }

    /// One parallel sequence-sequence collision round. All displacements are
    /// computed from the same snapshot, then applied. Returns how many
    /// sequences moved.
    pub fn sequence_collision_round(&mut self, round: usize) -> usize {
        let set = &self.state.current;
        let len = set.len();
        let count = set.count();
        let data = set.as_flat();
        let contact = 2.0 * self.state.r_seq;
        let tau = self.state.tau_seq;
        let seed = self.config.seed;
        let iteration = self.state.iteration as u64;

        // gram[m * count + n] = p_mᴴ p_n for m < n
        let gram: Vec<Complex64> = (0..count)
            .into_par_iter()
            .flat_map_iter(|m| {
                let pm = &data[m * len..(m + 1) * len];
                (0..count).map(move |n| {
                    if n > m {
                        inner(pm, &data[n * len..(n + 1) * len])
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();

        let updates: Vec<Option<Vec<Complex64>>> = (0..count)
            .into_par_iter()
            .map(|n| {
                let pn = &data[n * len..(n + 1) * len];
                let mut push = vec![Complex64::new(0.0, 0.0); len];
                let mut d = vec![Complex64::new(0.0, 0.0); len];
                let mut collided = false;
                for m in (0..count).filter(|&m| m != n) {
                    let g = if m < n { gram[m * count + n] } else { gram[n * count + m].conj() };
                    let mag = g.norm();
                    if (2.0 - 2.0 * mag).max(0.0).sqrt() >= contact + SHORTLIST_SLACK {
                        continue;
                    }
                    let phase = if mag > 0.0 { g / mag } else { Complex64::new(1.0, 0.0) };
                    let pm = &data[m * len..(m + 1) * len];
                    d.iter_mut().zip(pn.iter().zip(pm)).for_each(|(z, (a, b))| *z = a - phase * b);
                    let dist = model::norm(&d);
                    if dist >= contact {
                        continue;
                    }
                    collided = true;
                    if dist > 0.0 {
                        d.iter_mut().for_each(|z| *z /= dist);
                    } else {
                        d = rng::escape_direction(
                            seed,
                            &[STAGE_SEQUENCE, iteration, round as u64, n as u64, m as u64],
                            len,
                        );
                    }
                    let weight = contact - dist;
                    push.iter_mut().zip(&d).for_each(|(u, v)| *u += weight * v);
                }
                if !collided {
                    return None;
                }
                let mut moved: Vec<Complex64> = pn.iter().zip(&push).map(|(p, u)| p + tau * u).collect();
                normalize(&mut moved).then_some(moved)
            })
            .collect();

        let out = self.state.current.as_flat_mut();
        let mut moved = 0;
        for (n, update) in updates.into_iter().enumerate() {
            if let Some(row) = update {
                out[n * len..(n + 1) * len].copy_from_slice(&row);
                moved += 1;
            }
        }
        moved
    }

    /// Pushes sequences away from the PAPR probes until no sequence exceeds
    /// the threshold or `papr_inner_cap` rounds have run. Sequences do not
    /// interact in this stage, so each one is iterated independently; the
    /// result equals running synchronized parallel rounds.
    pub fn papr_collision_resolve(&mut self) -> PaprStage {
        let (Some(probes), Some(contact)) = (&self.probes, self.papr_contact) else {
            return PaprStage { feasible: true, rounds: 0 };
        };
        let len = self.state.current.len();
        let tau = self.state.tau_papr;
        let cap = self.config.papr_inner_cap;
        let seed = self.config.seed;
        let iteration = self.state.iteration as u64;
        let data = self.state.current.as_flat_mut();

        let outcomes: Vec<(bool, usize)> = data
            .par_chunks_exact_mut(len)
            .enumerate()
            .map(|(n, seq)| {
                for round in 0..=cap {
                    let Some(push) = papr_push(seq, probes, contact) else {
                        return (true, round);
                    };
                    if round == cap {
                        break;
                    }
                    let push_norm = model::norm(&push);
                    let direction = if push_norm > 0.0 {
                        push.iter().map(|u| u / push_norm).collect()
                    } else {
                        rng::escape_direction(
                            seed,
                            &[STAGE_PAPR, iteration, round as u64, n as u64],
                            len,
                        )
                    };
                    let mut moved: Vec<Complex64> =
                        seq.iter().zip(&direction).map(|(p, u)| p + tau * u).collect();
                    if normalize(&mut moved) {
                        seq.copy_from_slice(&moved);
                    }
                }
                (false, cap)
            })
            .collect();

        PaprStage {
            feasible: outcomes.iter().all(|o| o.0),
            rounds: outcomes.iter().map(|o| o.1).max().unwrap_or(0),
        }
    }

    /// Adapts `R_seq` from the coherence of the working set, then re-derives
    /// `Γ_mut` and `R_PAPR`. Reads `mu_min` before it is updated for this
    /// iteration.
    pub fn update_radii(&mut self, mu_current: f64) {
        let st = &mut self.state;
        let step = self.config.radius_step;
        st.r_seq = if mu_current < st.mu_min {
            (st.r_seq + step).min(st.r_bound)
        } else if mu_current <= st.gamma_mut {
            st.r_bound
        } else {
            (st.r_seq - step).max(step.min(st.r_bound))
        };
        st.gamma_mut = target_for_radius(st.r_seq);
        st.r_papr = self.papr_contact.map(|c| c - st.r_seq);
    }

    /// Grows both step sizes by `1 + ρ` if `mu_min` improved since the last
    /// review and shrinks them by `1 − ρ` otherwise.
    pub fn update_step_sizes(&mut self) {
        let st = &mut self.state;
        let rho = self.config.adaptation_rate;
        let factor = if st.mu_min < st.mu_min_prev_window { 1.0 + rho } else { 1.0 - rho };
        st.tau_seq *= factor;
        st.tau_papr *= factor;
        st.mu_min_prev_window = st.mu_min;
    }

    /// One outer iteration.
    pub fn step(&mut self) -> Progress {
        for round in 0..self.config.collision_rounds {
            self.sequence_collision_round(round);
        }
        let stage = self.papr_collision_resolve();
        let mu_current = model::max_cross_magnitude(
            self.state.current.as_flat(),
            self.state.current.len(),
        );

        self.update_radii(mu_current);

        let st = &mut self.state;
        st.last_iteration_feasible = stage.feasible;
        if stage.feasible && mu_current < st.mu_min {
            st.mu_min = mu_current;
            st.best = Some(st.current.clone());
            st.stall_counter = 0;
        } else {
            st.stall_counter += 1;
        }
        st.iteration += 1;
        if st.iteration.is_multiple_of(self.config.review_period) {
            self.update_step_sizes();
        }

        let st = &self.state;
        self.trajectory.push(TrajectoryPoint { coherence: mu_current, mu_min: st.mu_min });
        Progress {
            iteration: st.iteration,
            mu_current,
            mu_min: st.mu_min,
            r_seq: st.r_seq,
            r_papr: st.r_papr,
            gamma_mut: st.gamma_mut,
            tau_seq: st.tau_seq,
            tau_papr: st.tau_papr,
            feasible: stage.feasible,
            papr_rounds: stage.rounds,
        }
    }

    /// Iterates until `max_iterations` or `stall_limit` is reached.
    pub fn run(mut self, mut progress: Option<&mut dyn FnMut(&Progress)>) -> Result<RunResult> {
        let started = Instant::now();
        let stop = loop {
            let p = self.step();
            if let Some(sink) = progress.as_mut() {
                sink(&p);
            }
            if self.state.stall_counter >= self.config.stall_limit {
                break Termination::Stalled;
            }
            if self.state.iteration >= self.config.max_iterations {
                break Termination::MaxIterations;
            }
        };

        let best = self.state.best.take();
        let (termination, final_metrics) = match &best {
            Some(set) => {
                let probes = match &self.probes {
                    Some(p) => p.clone(),
                    None => PaprProbeSet::new(&self.config.assignment),
                };
                (stop, Some(model::evaluate(set, &probes)?))
            }
            None => (Termination::NoFeasibleSolution, None),
        };
        let report = RunReport {
            papr_stage_skipped: self.probes.is_none(),
            welch_bound: self.welch_bound,
            initial_coherence: self.initial_coherence,
            iterations: self.state.iteration,
            termination,
            trajectory: std::mem::take(&mut self.trajectory),
            final_metrics,
            wall_time_seconds: started.elapsed().as_secs_f64(),
            config: self.config,
        };
        Ok(RunResult { best, report })
    }
}

/// Convenience wrapper: build a [`Solver`] and run it.
pub fn run(config: SolverConfig, progress: Option<&mut dyn FnMut(&Progress)>) -> Result<RunResult> {
    Solver::new(config)?.run(progress)
}

/// `R = √(0.5(1 − Γ))`
pub fn radius_for_target(gamma: f64) -> f64 {
    (0.5 * (1.0 - gamma)).sqrt()
}

/// `Γ = 1 − 2R²`
pub fn target_for_radius(radius: f64) -> f64 {
    1.0 - 2.0 * radius * radius
}

/// Accumulated push away from every probe ball the sequence ball overlaps, or
/// `None` when there is no overlap.
fn papr_push(seq: &[Complex64], probes: &PaprProbeSet, contact: f64) -> Option<Vec<Complex64>> {
    let mut push: Option<Vec<Complex64>> = None;
    for w in probes.iter() {
        let z = inner(w, seq);
        let mag = z.norm();
        if (2.0 - 2.0 * mag).max(0.0).sqrt() >= contact + SHORTLIST_SLACK {
            continue;
        }
        let phase = if mag > 0.0 { z / mag } else { Complex64::new(1.0, 0.0) };
        let d: Vec<Complex64> = seq.iter().zip(w).map(|(p, w)| p - phase * w).collect();
        let dist = model::norm(&d);
        if dist >= contact {
            continue;
        }
        let acc = push.get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); seq.len()]);
        // A sequence sitting exactly on a probe contributes no direction; the
        // caller substitutes a random one if the total push vanishes.
        if dist > 0.0 {
            let weight = (contact - dist) / dist;
            acc.iter_mut().zip(&d).for_each(|(u, v)| *u += weight * v);
        }
    }
    push
}
