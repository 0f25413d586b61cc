//! Optimistic Adam: the optimistic two-sequence update applied to the
//! bias-corrected, preconditioned gradient instead of the raw one.
//!
//! One fresh stochastic gradient per step updates the Adam moments; the
//! resulting preconditioned step `p_k` enters the same predict/correct
//! kernel as OSG, so the main iterate follows
//! `new point = mixed point - 2 eta p_k + eta p_{k-1}` in one-line form.
//! With `beta1 = beta2 = 0` and the unit-preconditioner hook the trajectory
//! degrades to plain OSG bit-for-bit.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optim::{correct, predict, GradDraw};
use crate::problems::{noisy_operator, ProblemOracle};
use crate::topology::{mix, GossipMatrix, MixingSchedule};

#[derive(Debug, Clone, Copy)]
pub struct OAdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Diagnostic hook: skip the second-moment divide so the preconditioner
    /// is the identity and the update reduces to OSG on `m1`-corrected
    /// gradients.
    pub unit_preconditioner: bool,
}

impl Default for OAdamParams {
    fn default() -> OAdamParams {
        OAdamParams { beta1: 0.9, beta2: 0.999, eps: 1e-8, unit_preconditioner: false }
    }
}

#[derive(Debug, Clone)]
pub struct OAdamState {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    /// First moment.
    pub m1: DVector<f64>,
    /// Second moment (elementwise nonnegative).
    pub m2: DVector<f64>,
    /// Previous bias-corrected preconditioned step.
    pub p_prev: DVector<f64>,
    /// Steps taken; drives bias correction.
    pub step: u32,
}

impl OAdamState {
    pub fn new(x0: DVector<f64>) -> OAdamState {
        let d = x0.len();
        OAdamState {
            z: x0.clone(),
            x: x0,
            m1: DVector::zeros(d),
            m2: DVector::zeros(d),
            p_prev: DVector::zeros(d),
            step: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Bias-corrected preconditioned step from the current moments.
fn preconditioned(state: &OAdamState, params: &OAdamParams) -> DVector<f64> {
    let k = state.step as i32;
    let bc1 = 1.0 - params.beta1.powi(k);
    let bc2 = 1.0 - params.beta2.powi(k);
    DVector::from_fn(state.m1.len(), |i, _| {
        let m1_hat = state.m1[i] / bc1;
        if params.unit_preconditioner {
            m1_hat
        } else {
            let m2_hat = state.m2[i] / bc2;
            m1_hat / (m2_hat.sqrt() + params.eps)
        }
    })
}

/// One optimistic Adam step from an explicit base point.
pub fn oadam_apply(
    state: &mut OAdamState,
    base: &DVector<f64>,
    params: &OAdamParams,
    eta: f64,
    draw: &mut GradDraw,
) {
    predict(&mut state.z, base, &state.p_prev, eta);
    let g = draw(&state.z);
    state.step += 1;
    for i in 0..g.len() {
        state.m1[i] = params.beta1 * state.m1[i] + (1.0 - params.beta1) * g[i];
        state.m2[i] = params.beta2 * state.m2[i] + (1.0 - params.beta2) * g[i] * g[i];
    }
    let p = preconditioned(state, params);
    correct(&mut state.x, &state.z, &p, &state.p_prev, eta);
    state.p_prev = p;
}

/// Single-machine optimistic Adam step: one fresh stochastic gradient.
pub fn oadam_step<R: rand::Rng + ?Sized>(
    state: &mut OAdamState,
    problem: &dyn ProblemOracle,
    params: &OAdamParams,
    eta: f64,
    minibatch: usize,
    rng: &mut R,
) {
    assert!(eta > 0.0, "eta must be positive");
    let base = state.x.clone();
    let mut draw = |z: &DVector<f64>| noisy_operator(problem, z, minibatch, rng);
    oadam_apply(state, &base, params, eta, &mut draw);
}

/// Per-worker state for the decentralized Adam variants.
#[derive(Debug, Clone)]
pub struct OAdamWorker {
    pub worker_id: usize,
    pub adam: OAdamState,
    pub rng: ChaCha8Rng,
}

impl OAdamWorker {
    pub fn new(worker_id: usize, x0: DVector<f64>, rng: ChaCha8Rng) -> OAdamWorker {
        OAdamWorker { worker_id, adam: OAdamState::new(x0), rng }
    }
}

/// Decentralized optimistic Adam round, mirroring the DPOSG iteration with
/// the Adam step substituted: one shared mixing result, then one
/// preconditioned optimistic step per worker.
pub fn oadam_iteration(
    workers: &mut [OAdamWorker],
    w: &GossipMatrix,
    schedule: &MixingSchedule,
    problem: &dyn ProblemOracle,
    params: &OAdamParams,
    eta: f64,
    minibatch: usize,
    topo_rng: &mut ChaCha8Rng,
    parallel: bool,
) -> Result<()> {
    if workers.is_empty() {
        return Err(Error::Config("no workers".into()));
    }
    if workers.len() != w.size() {
        return Err(Error::WorkerCountMismatch { matrix: w.size(), workers: workers.len() });
    }
    let d = workers[0].adam.dim();
    let mut x = DMatrix::zeros(d, workers.len());
    for (i, ws) in workers.iter().enumerate() {
        x.column_mut(i).copy_from(&ws.adam.x);
    }
    let mixed = mix(&x, schedule, w, topo_rng)?;

    let step = |(i, ws): (usize, &mut OAdamWorker)| {
        let base = DVector::from_column_slice(mixed.column(i).as_slice());
        let OAdamWorker { adam, rng, .. } = ws;
        let mut draw = |z: &DVector<f64>| noisy_operator(problem, z, minibatch, rng);
        oadam_apply(adam, &base, params, eta, &mut draw);
    };
    if parallel {
        workers.par_iter_mut().enumerate().for_each(step);
    } else {
        workers.iter_mut().enumerate().for_each(step);
    }
    Ok(())
}
