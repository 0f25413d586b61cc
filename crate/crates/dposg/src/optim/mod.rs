//! Optimizer kernels: single-machine OSG, its one-line form, the plain GDA
//! baseline, the decentralized iteration, optimistic Adam, and the
//! hyperparameter planners.
//!
//! # Floating-point evaluation order
//!
//! The two-sequence update, its one-line equivalent, and the decentralized
//! per-worker update are algebraically the same method. To make that
//! equivalence testable bit-for-bit, every kernel applies the update through
//! the two fixed-order primitives below:
//!
//! ```text
//! predict:  z[i] = base[i] - eta * g_prev[i]
//! correct:  x[i] = (z[i] - eta * g[i]) + eta * g_prev[i]   // = base - eta*g
//! ```
//!
//! Chaining predict/correct reproduces exactly the floating-point operation
//! sequence of the one-line update `z <- z - 2 eta g + eta g_prev` as
//! implemented in [`one_line_step_with`], so shared-tape trajectories agree
//! to the last bit.

pub mod dposg;
pub mod oadam;
pub mod planner;

use nalgebra::DVector;
use rand::Rng;

use crate::problems::{noisy_operator, ProblemOracle};

pub use dposg::{dposg_iteration, WorkerState};
pub use oadam::{oadam_step, OAdamParams, OAdamState};
pub use planner::{plan_eta, plan_t, BindingTerm, EtaPlan, PlannerInput, THEORY_C};

/// A source of (stochastic) gradient values queried at a point.
pub type GradDraw<'a> = dyn FnMut(&DVector<f64>) -> DVector<f64> + 'a;

pub(crate) fn predict(z: &mut DVector<f64>, base: &DVector<f64>, g_prev: &DVector<f64>, eta: f64) {
    for i in 0..z.len() {
        z[i] = base[i] - eta * g_prev[i];
    }
}

pub(crate) fn correct(
    x: &mut DVector<f64>,
    z: &DVector<f64>,
    g: &DVector<f64>,
    g_prev: &DVector<f64>,
    eta: f64,
) {
    for i in 0..x.len() {
        x[i] = (z[i] - eta * g[i]) + eta * g_prev[i];
    }
}

/// Two-sequence optimistic state. At `k = 0` both sequences sit at the
/// initial point and the cached gradient is zero, so the first z-step is a
/// pure carry of `x0`.
#[derive(Debug, Clone)]
pub struct OsgState {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub g_prev: DVector<f64>,
}

impl OsgState {
    pub fn new(x0: DVector<f64>) -> OsgState {
        let g_prev = DVector::zeros(x0.len());
        OsgState { z: x0.clone(), x: x0, g_prev }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// One optimistic step from an explicit base point (the mixed column in the
/// decentralized setting, the previous `x` on a single machine). Draws
/// exactly one gradient, at the predicted point.
pub fn osg_apply(state: &mut OsgState, base: &DVector<f64>, eta: f64, draw: &mut GradDraw) {
    predict(&mut state.z, base, &state.g_prev, eta);
    let g = draw(&state.z);
    correct(&mut state.x, &state.z, &g, &state.g_prev, eta);
    state.g_prev = g;
}

/// Single-machine optimistic step with a caller-supplied gradient source.
pub fn osg_step_with(state: &mut OsgState, eta: f64, draw: &mut GradDraw) {
    let base = state.x.clone();
    osg_apply(state, &base, eta, draw);
}

/// Single-machine optimistic stochastic gradient step: one fresh stochastic
/// gradient per step, the previous one reused for the prediction.
pub fn osg_step<R: Rng + ?Sized>(
    state: &mut OsgState,
    problem: &dyn ProblemOracle,
    eta: f64,
    minibatch: usize,
    rng: &mut R,
) {
    assert!(eta > 0.0, "eta must be positive");
    let mut draw = |z: &DVector<f64>| noisy_operator(problem, z, minibatch, rng);
    osg_step_with(state, eta, &mut draw);
}

/// State for the one-line form `z <- z - 2 eta g(z) + eta g_prev`.
///
/// Seeded with the initial point, this tracks the z-sequence of
/// [`OsgState`] exactly: after `k` one-line steps, `z` equals the
/// two-sequence `z_{k+1}` bit-for-bit under a shared gradient tape.
#[derive(Debug, Clone)]
pub struct OneLineOsg {
    pub z: DVector<f64>,
    pub g_prev: DVector<f64>,
}

impl OneLineOsg {
    pub fn new(z0: DVector<f64>) -> OneLineOsg {
        let g_prev = DVector::zeros(z0.len());
        OneLineOsg { z: z0, g_prev }
    }
}

/// One step of the one-line update. The evaluation order
/// `((z - eta*g) + eta*g_prev) - eta*g` mirrors the predict/correct chain of
/// the two-sequence form.
pub fn one_line_step_with(state: &mut OneLineOsg, eta: f64, draw: &mut GradDraw) {
    let g = draw(&state.z);
    for i in 0..state.z.len() {
        state.z[i] = ((state.z[i] - eta * g[i]) + eta * state.g_prev[i]) - eta * g[i];
    }
    state.g_prev = g;
}

/// Plain simultaneous gradient descent-ascent, the comparison baseline:
/// `x <- x - eta * g(x)` with the gradient drawn at the current point.
pub fn gda_step_with(x: &mut DVector<f64>, eta: f64, draw: &mut GradDraw) {
    let g = draw(x);
    for i in 0..x.len() {
        x[i] -= eta * g[i];
    }
}

pub fn gda_step<R: Rng + ?Sized>(
    x: &mut DVector<f64>,
    problem: &dyn ProblemOracle,
    eta: f64,
    minibatch: usize,
    rng: &mut R,
) {
    let mut draw = |p: &DVector<f64>| noisy_operator(problem, p, minibatch, rng);
    gda_step_with(x, eta, &mut draw);
}

/// Replayable record of gradient draws, used to feed two algorithm
/// formulations the identical sample sequence without constraining the rng.
#[derive(Debug, Clone, Default)]
pub struct SampleTape {
    entries: Vec<(DVector<f64>, DVector<f64>)>,
}

impl SampleTape {
    pub fn new() -> SampleTape {
        SampleTape::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, point: DVector<f64>, grad: DVector<f64>) {
        self.entries.push((point, grad));
    }

    /// Replays recorded gradients in order. Panics if a query point differs
    /// bit-wise from the recorded one, which doubles as a trajectory check.
    pub fn replay(&self) -> impl FnMut(&DVector<f64>) -> DVector<f64> + '_ {
        let mut cursor = 0;
        move |point: &DVector<f64>| {
            let (recorded_point, grad) = self
                .entries
                .get(cursor)
                .unwrap_or_else(|| panic!("tape exhausted after {cursor} draws"));
            for (a, b) in point.iter().zip(recorded_point.iter()) {
                assert_eq!(
                    a.to_bits(),
                    b.to_bits(),
                    "tape query point diverged at draw {cursor}: {a} vs {b}"
                );
            }
            cursor += 1;
            grad.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{BilinearSaddle, QuadraticSaddle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(v: &DVector<f64>) -> Vec<u64> {
        v.iter().map(|x| x.to_bits()).collect()
    }

    #[test]
    fn cold_start_carries_x0() {
        // g_prev = 0 at k = 0, so z_1 = x_0 and x_1 = x_0 - eta * g(x_0).
        let p = QuadraticSaddle::new(1, 1.0, 1.0, 1.0, 0.0);
        let x0 = DVector::from_vec(vec![2.0, -1.0]);
        let mut state = OsgState::new(x0.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        osg_step(&mut state, &p, 0.1, 1, &mut rng);
        assert_eq!(state.z, x0);
        let g = p.operator(&x0);
        let expected = &x0 - 0.1 * &g;
        for (a, b) in state.x.iter().zip(expected.iter()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn one_oracle_call_per_step() {
        let p = QuadraticSaddle::new(2, 1.0, 1.0, 1.0, 1.0);
        let mut state = OsgState::new(DVector::zeros(4));
        let mut calls = 0usize;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut draw = |z: &DVector<f64>| {
                calls += 1;
                noisy_operator(&p, z, 1, &mut rng)
            };
            osg_step_with(&mut state, 0.05, &mut draw);
        }
        assert_eq!(calls, 100);
    }

    #[test]
    fn osg_converges_where_gda_orbits_out() {
        // Deterministic scalar bilinear game: GDA's norm grows by
        // (1 + eta^2)^(1/2) per step while OSG contracts.
        let p = BilinearSaddle::scaled_identity(1, 1.0, 0.0);
        let eta = 0.1;
        let x0 = DVector::from_vec(vec![1.0, 1.0]);

        let mut osg = OsgState::new(x0.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut norms = Vec::new();
        for k in 1..=2000 {
            osg_step(&mut osg, &p, eta, 1, &mut rng);
            if k == 500 || k == 2000 {
                norms.push(osg.x.norm());
            }
        }
        // measured contraction: |root| = 0.994936 per step -> ~0.11 at 500
        assert!(norms[0] < 0.15, "||x_500|| = {}", norms[0]);
        assert!(norms[1] <= 1e-3, "||x_2000|| = {}", norms[1]);

        let mut x = x0.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..500 {
            gda_step(&mut x, &p, eta, 1, &mut rng);
        }
        let expected = 2.0_f64.sqrt() * (1.0 + eta * eta).powf(250.0);
        assert!(x.norm() >= x0.norm());
        assert!((x.norm() - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn one_line_form_matches_two_sequence_bitwise() {
        let p = QuadraticSaddle::new(2, 1.0, 1.0, 1.0, 1.0);
        let eta = 0.05;
        let x0 = DVector::from_vec(vec![0.3, -0.7, 1.1, 0.2]);
        let steps = 200;

        // record the two-sequence run on a tape
        let mut tape = SampleTape::new();
        let mut two_seq = OsgState::new(x0.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut z_traj = Vec::new();
        for _ in 0..steps {
            let mut draw = |z: &DVector<f64>| {
                let g = noisy_operator(&p, z, 1, &mut rng);
                tape.push(z.clone(), g.clone());
                g
            };
            osg_step_with(&mut two_seq, eta, &mut draw);
            z_traj.push(two_seq.z.clone());
        }

        // replay through the one-line form; the replayer's point assertion
        // already checks the query trajectory bit-wise
        let mut one_line = OneLineOsg::new(x0);
        let mut replay = tape.replay();
        assert_eq!(bits(&one_line.z), bits(&z_traj[0]));
        for k in 1..steps {
            one_line_step_with(&mut one_line, eta, &mut replay);
            assert_eq!(bits(&one_line.z), bits(&z_traj[k]), "diverged at step {k}");
        }
    }

    #[test]
    fn tape_replays_identical_queries() {
        let mut tape = SampleTape::new();
        tape.push(DVector::from_vec(vec![1.0]), DVector::from_vec(vec![2.0]));
        let mut replay = tape.replay();
        assert_eq!(replay(&DVector::from_vec(vec![1.0]))[0], 2.0);
    }

    #[test]
    #[should_panic(expected = "diverged")]
    fn tape_replay_rejects_diverged_queries() {
        let mut tape = SampleTape::new();
        tape.push(DVector::from_vec(vec![1.0]), DVector::from_vec(vec![2.0]));
        let mut replay = tape.replay();
        replay(&DVector::from_vec(vec![1.5]));
    }
}
