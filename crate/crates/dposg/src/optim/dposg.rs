//! The decentralized iteration: mix once, then one optimistic step per
//! worker with the shared mixed columns as base.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optim::{osg_apply, OsgState};
use crate::problems::{noisy_operator, ProblemOracle};
use crate::topology::{mix, GossipMatrix, MixingSchedule};

/// Per-worker optimizer state plus its private rng stream.
#[derive(Debug, Clone)]
pub struct WorkerState {
    pub worker_id: usize,
    pub osg: OsgState,
    pub rng: ChaCha8Rng,
}

impl WorkerState {
    pub fn new(worker_id: usize, x0: DVector<f64>, rng: ChaCha8Rng) -> WorkerState {
        WorkerState { worker_id, osg: OsgState::new(x0), rng }
    }
}

/// Assembles the column-per-worker matrix of x-iterates.
pub fn stack_x(workers: &[WorkerState]) -> DMatrix<f64> {
    let d = workers[0].osg.dim();
    let mut x = DMatrix::zeros(d, workers.len());
    for (i, w) in workers.iter().enumerate() {
        x.column_mut(i).copy_from(&w.osg.x);
    }
    x
}

/// One synchronous round:
///
/// 1. mix the stacked x-iterates through `t` communication sub-rounds,
///    producing one shared mixed matrix used by both optimistic sub-steps;
/// 2. for each worker, predict `z` from its mixed column and the cached
///    gradient, draw ONE fresh stochastic gradient at `z` from the worker's
///    own stream, and update `x`.
///
/// The per-worker phase is embarrassingly parallel; with `parallel` set it
/// fans out across threads and produces bit-identical results, since every
/// worker owns its state and rng.
pub fn dposg_iteration(
    workers: &mut [WorkerState],
    w: &GossipMatrix,
    schedule: &MixingSchedule,
    problem: &dyn ProblemOracle,
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
    let d = workers[0].osg.dim();
    if workers.iter().any(|ws| ws.osg.dim() != d) || d != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), got: d });
    }

    let x = stack_x(workers);
    let mixed = mix(&x, schedule, w, topo_rng)?;

    let step = |(i, ws): (usize, &mut WorkerState)| {
        let base = DVector::from_column_slice(mixed.column(i).as_slice());
        let WorkerState { osg, rng, .. } = ws;
        let mut draw = |z: &DVector<f64>| noisy_operator(problem, z, minibatch, rng);
        osg_apply(osg, &base, eta, &mut draw);
    };
    if parallel {
        workers.par_iter_mut().enumerate().for_each(step);
    } else {
        workers.iter_mut().enumerate().for_each(step);
    }
    Ok(())
}

/// Derives worker `i`'s rng from a master seed: one ChaCha key per seed,
/// one stream per worker id. Adding workers never perturbs the sample
/// sequence of existing ones.
pub fn worker_rng(master_seed: u64, worker_id: usize) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(worker_id as u64);
    rng
}

/// Stream id reserved for topology sampling so random mixing never collides
/// with a worker stream.
pub const TOPOLOGY_STREAM: u64 = u64::MAX;

pub fn topology_rng(master_seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(TOPOLOGY_STREAM);
    rng
}
