//! Per-slot control loop, baseline policies and the experiment runner.

mod aggregate;
mod policy;

use std::collections::VecDeque;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use aggregate::{optimality_gap, trailing_mean, Aggregates};
pub use policy::PolicyKind;

use crate::actor::Actor;
use crate::bandwidth::{solve_allocation, Allocation, AllocationProblem};
use crate::config::{action_space_size, SystemConfig};
use crate::critic::{select_action, GpModel, KernelParams, Observation};
use crate::env::{Environment, SlotRecord};
use crate::error::{LabError, Result};
use crate::rng::{LabRng, SeedTree, LABEL_POLICY};
use crate::types::{DegradationAction, SlotObservation, SlotState};

/// One executed slot plus the controller-side bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotLog {
    pub record: SlotRecord,
    /// Number of actions the policy considered (K_t for LAB, A^N for exhaustive policies).
    pub k_t: usize,
    /// 1-based position of the chosen candidate; 1 for policies without a candidate list.
    pub k_star: usize,
    /// Wall-clock time spent choosing the action.
    pub decision_ms: f64,
    /// Utility or acquisition evaluations spent on the decision.
    pub evaluations: usize,
}

/// Records and aggregates of one (policy, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub policy: PolicyKind,
    pub seed: u64,
    pub slots: Vec<SlotLog>,
    pub aggregates: Aggregates,
}

/// Bandwidth split for `action` under channel `gains`. Latency weights of zero
/// leave the split undetermined; they are floored so the solver stays well posed.
pub fn allocate(cfg: &SystemConfig, action: &DegradationAction, gains: &[f64]) -> Result<Allocation> {
    let data_bits = action
        .levels()
        .iter()
        .zip(&cfg.native_resolution)
        .map(|(&a, &res)| crate::env::data_size_bits(res, a))
        .collect::<Result<Vec<f64>>>()?;
    let w_max = cfg.latency_weight.iter().copied().fold(0.0, f64::max);
    let weights = if w_max > 0.0 {
        cfg.latency_weight.iter().map(|&w| w.max(1e-6 * w_max)).collect()
    } else {
        vec![1.0; cfg.n_devices]
    };
    let prob = AllocationProblem {
        data_bits,
        gains: gains.to_vec(),
        powers: cfg.tx_power_w.clone(),
        weights,
        bandwidth_hz: cfg.bandwidth_hz,
        noise_psd: cfg.noise_psd_w_per_hz,
    };
    solve_allocation(&prob)
}

enum PolicyState {
    Lab { actor: Box<Actor>, critic: Box<GpModel> },
    FullBo { critic: Box<GpModel>, actions: Vec<DegradationAction> },
    Ideal { actions: Vec<DegradationAction> },
    DelayObli,
    DelayMin,
    Random { rng: Box<LabRng> },
}

fn enumerate(cfg: &SystemConfig) -> Result<Vec<DegradationAction>> {
    let size = action_space_size(cfg.n_devices, cfg.n_levels);
    match size {
        Some(s) if s <= cfg.enumeration_cap => Ok(DegradationAction::enumerate_all(cfg.n_devices, cfg.n_levels).collect()),
        _ => Err(LabError::config(
            "enumeration_cap",
            format!("A^N = {}^{} exceeds the cap {}", cfg.n_levels, cfg.n_devices, cfg.enumeration_cap),
        )),
    }
}

fn new_critic(cfg: &SystemConfig) -> Result<Box<GpModel>> {
    Ok(Box::new(GpModel::new(cfg.n_devices, cfg.critic.cache_size, KernelParams::initial(cfg.n_devices))?))
}

/// Stepwise driver for one policy on one seed.
pub struct Runner {
    cfg: SystemConfig,
    policy: PolicyKind,
    seed: u64,
    env: Environment,
    state: PolicyState,
    history: VecDeque<SlotObservation>,
    last: Option<SlotRecord>,
    t: usize,
}

impl Runner {
    pub fn new(cfg: &SystemConfig, policy: PolicyKind, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let seeds = SeedTree::new(seed);
        let state = match policy {
            PolicyKind::Lab => PolicyState::Lab { actor: Box::new(Actor::new(cfg, &seeds)?), critic: new_critic(cfg)? },
            PolicyKind::FullBo => PolicyState::FullBo { critic: new_critic(cfg)?, actions: enumerate(cfg)? },
            PolicyKind::Ideal => PolicyState::Ideal { actions: enumerate(cfg)? },
            PolicyKind::DelayObli => PolicyState::DelayObli,
            PolicyKind::DelayMin => PolicyState::DelayMin,
            PolicyKind::Random => PolicyState::Random { rng: Box::new(seeds.stream(LABEL_POLICY)) },
        };
        Ok(Self {
            cfg: cfg.clone(),
            policy,
            seed,
            env: Environment::new(cfg.clone(), seeds)?,
            state,
            history: VecDeque::with_capacity(cfg.actor.history_len),
            last: None,
            t: 0,
        })
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    /// BO cache size, if the policy has one.
    pub fn cache_len(&self) -> Option<usize> {
        match &self.state {
            PolicyState::Lab { critic, .. } | PolicyState::FullBo { critic, .. } => Some(critic.cache().len()),
            _ => None,
        }
    }

    /// Current GP hyperparameters, if the policy has a critic.
    pub fn kernel_params(&self) -> Option<&KernelParams> {
        match &self.state {
            PolicyState::Lab { critic, .. } | PolicyState::FullBo { critic, .. } => Some(critic.params()),
            _ => None,
        }
    }

    pub fn replay_len(&self) -> Option<usize> {
        match &self.state {
            PolicyState::Lab { actor, .. } => Some(actor.memory().len()),
            _ => None,
        }
    }

    fn observation(&self, gains: &[f64]) -> SlotObservation {
        let n = self.cfg.n_devices;
        match &self.last {
            None => SlotObservation { channel_gains: gains.to_vec(), slot_index: self.t, ..SlotObservation::zero(n) },
            Some(r) => SlotObservation {
                channel_gains: gains.to_vec(),
                prev_confidences: r.confidence.clone(),
                prev_latencies: r.latencies(),
                prev_action: r.action.clone(),
                prev_bandwidth: r.bandwidth.clone(),
                prev_utility: r.total_utility,
                slot_index: self.t,
            },
        }
    }

    fn execute(&mut self, action: &DegradationAction, gains: &[f64]) -> Result<SlotRecord> {
        let alloc = allocate(&self.cfg, action, gains)?;
        self.env.execute_slot(action, &alloc.b, self.t)
    }

    /// Runs the next slot.
    pub fn step(&mut self) -> Result<SlotLog> {
        self.t += 1;
        let t = self.t;
        let gains = self.env.channel(t)?.to_vec();
        let obs = self.observation(&gains);
        let l = self.cfg.actor.history_len;
        if self.history.len() == l {
            self.history.pop_front();
        }
        self.history.push_back(obs);
        let recent: Vec<SlotObservation> = self.history.iter().cloned().collect();
        let slot_state = SlotState::from_recent(&recent, l, self.cfg.n_devices);
        let n = self.cfg.n_devices;
        let crit = self.cfg.critic.clone();

        let start = Instant::now();
        let (action, k_t, k_star, evaluations, ideal_record) = match &mut self.state {
            PolicyState::Lab { actor, critic } => {
                let k_t = actor.k();
                let (_, cands) = actor.propose(&slot_state)?;
                let actions: Vec<DegradationAction> = cands.into_iter().map(|c| c.action).collect();
                let sel = select_action(&actions, &gains, t, critic, crit.acquisition, crit.zeta)?;
                (sel.action, k_t, sel.k_star, actions.len(), None)
            }
            PolicyState::FullBo { critic, actions } => {
                let sel = select_action(actions, &gains, t, critic, crit.acquisition, crit.zeta)?;
                (sel.action, actions.len(), sel.k_star, actions.len(), None)
            }
            PolicyState::Ideal { actions } => {
                let actions = actions.clone();
                let mut best: Option<(usize, SlotRecord)> = None;
                for (i, a) in actions.iter().enumerate() {
                    let rec = self.execute(a, &gains)?;
                    if best.as_ref().is_none_or(|(_, b)| rec.total_utility > b.total_utility) {
                        best = Some((i, rec));
                    }
                }
                let (i, rec) = best.expect("non-empty action space");
                (actions[i].clone(), actions.len(), i + 1, actions.len(), Some(rec))
            }
            PolicyState::DelayObli => (DegradationAction::uniform(n, 0), 1, 1, 0, None),
            PolicyState::DelayMin => (DegradationAction::uniform(n, self.cfg.n_levels - 1), 1, 1, 0, None),
            PolicyState::Random { rng } => {
                let levels = (0..n).map(|_| rng.gen_range(0..self.cfg.n_levels)).collect();
                (DegradationAction::new(levels, self.cfg.n_levels)?, 1, 1, 0, None)
            }
        };
        let decision_ms = start.elapsed().as_secs_f64() * 1e3;

        let record = match ideal_record {
            Some(r) => r,
            None => self.execute(&action, &gains)?,
        };

        match &mut self.state {
            PolicyState::Lab { actor, critic } => {
                actor.remember(&slot_state, &action)?;
                critic.insert(Observation { h: gains.clone(), a: action.levels().to_vec(), t, y: record.total_utility })?;
                actor.maybe_train(t)?;
                if t.is_multiple_of(crit.refit_interval) {
                    refit_logged(critic, crit.refit_max_iters, t);
                }
                actor.observe_k_star(k_star, t);
            }
            PolicyState::FullBo { critic, .. } => {
                critic.insert(Observation { h: gains.clone(), a: action.levels().to_vec(), t, y: record.total_utility })?;
                if t.is_multiple_of(crit.refit_interval) {
                    refit_logged(critic, crit.refit_max_iters, t);
                }
            }
            _ => {}
        }
        self.last = Some(record.clone());
        Ok(SlotLog { record, k_t, k_star, decision_ms, evaluations })
    }

    /// Runs the configured horizon.
    pub fn run(mut self) -> Result<RunResult> {
        let slots = (0..self.cfg.horizon).map(|_| self.step()).collect::<Result<Vec<_>>>()?;
        let aggregates = Aggregates::from_slots(&slots);
        Ok(RunResult { policy: self.policy, seed: self.seed, slots, aggregates })
    }
}

fn refit_logged(critic: &mut GpModel, max_iters: usize, t: usize) {
    match critic.refit(max_iters) {
        Ok(Some(out)) => log::debug!("t={t}: refit LML {:.4} -> {:.4}", out.lml_initial, out.lml_final),
        Ok(None) => {}
        Err(e) => log::warn!("t={t}: refit failed, keeping previous parameters: {e}"),
    }
}

/// Runs `policy` for the configured horizon on `seed`.
pub fn run_experiment(cfg: &SystemConfig, policy: PolicyKind, seed: u64) -> Result<RunResult> {
    Runner::new(cfg, policy, seed)?.run()
}
