//! Gossip matrices and multi-round mixing schedules.
//!
//! A gossip matrix is a symmetric doubly stochastic `M x M` weight matrix
//! describing which workers average with which neighbors. Mixing quality is
//! summarized by `rho = max(|lambda_2|, |lambda_M|)`: repeated averaging
//! contracts worker disagreement at rate `rho^t`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Entrywise tolerance for symmetry, row sums and the [0, 1] range.
pub const ENTRY_TOL: f64 = 1e-12;
/// Tolerance for the leading eigenvalue check `lambda_1 = 1`.
pub const EIGEN_TOL: f64 = 1e-9;

/// How a gossip matrix was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Ring,
    Complete,
    Identity,
    Custom,
    /// One sample drawn by [`GossipMatrix::random_two_neighbor`].
    RandomTwoNeighbor,
}

/// Symmetric doubly stochastic mixing matrix.
#[derive(Debug, Clone)]
pub struct GossipMatrix {
    size: usize,
    entries: DMatrix<f64>,
    kind: MatrixKind,
}

/// Eigenvalue summary of a gossip matrix.
#[derive(Debug, Clone)]
pub struct SpectralInfo {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// `max(|lambda_2|, |lambda_M|)`; zero for a single node.
    pub rho: f64,
}

/// How the `t` communication sub-rounds of one iteration are performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingSchedule {
    /// Apply the same matrix in every sub-round (`X * W^t` by repeated
    /// right-multiplication).
    FixedPower { rounds: usize },
    /// Draw a fresh random two-neighbor matrix for each sub-round.
    RandomSequence { rounds: usize },
}

impl MixingSchedule {
    pub fn rounds(&self) -> usize {
        match *self {
            MixingSchedule::FixedPower { rounds } => rounds,
            MixingSchedule::RandomSequence { rounds } => rounds,
        }
    }
}

impl GossipMatrix {
    /// Ring topology: every node averages equally with itself and its two
    /// neighbors. `M = 2` degenerates to pairwise averaging, `M = 1` to the
    /// trivial `[1]`.
    pub fn ring(size: usize) -> GossipMatrix {
        assert!(size >= 1, "ring requires M >= 1");
        let entries = match size {
            1 => DMatrix::from_element(1, 1, 1.0),
            2 => DMatrix::from_element(2, 2, 0.5),
            _ => {
                let third = 1.0 / 3.0;
                let mut w = DMatrix::zeros(size, size);
                for i in 0..size {
                    w[(i, i)] = third;
                    w[(i, (i + 1) % size)] = third;
                    w[(i, (i + size - 1) % size)] = third;
                }
                w
            }
        };
        GossipMatrix { size, entries, kind: MatrixKind::Ring }
    }

    /// Complete topology: every entry `1/M`. One round of mixing replaces
    /// every column by the exact column mean.
    pub fn complete(size: usize) -> GossipMatrix {
        assert!(size >= 1, "complete requires M >= 1");
        let entries = DMatrix::from_element(size, size, 1.0 / size as f64);
        GossipMatrix { size, entries, kind: MatrixKind::Complete }
    }

    /// Identity topology: no communication. `rho = 1` for `M > 1`, so this is
    /// only admissible for single-machine runs.
    pub fn identity(size: usize) -> GossipMatrix {
        assert!(size >= 1, "identity requires M >= 1");
        GossipMatrix { size, entries: DMatrix::identity(size, size), kind: MatrixKind::Identity }
    }

    /// Draws one random two-neighbor matrix: a uniformly random Hamiltonian
    /// ring over the `M` nodes with weight `1/3` on self and on each of the
    /// two ring neighbors. Every sample is symmetric doubly stochastic and
    /// every node has exactly two neighbors.
    pub fn random_two_neighbor<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Result<GossipMatrix> {
        if size < 3 {
            return Err(Error::RandomMixingTooSmall(size));
        }
        let mut order: Vec<usize> = (0..size).collect();
        order.shuffle(rng);
        let third = 1.0 / 3.0;
        let mut w = DMatrix::zeros(size, size);
        for idx in 0..size {
            let node = order[idx];
            let next = order[(idx + 1) % size];
            let prev = order[(idx + size - 1) % size];
            w[(node, node)] = third;
            w[(node, next)] = third;
            w[(node, prev)] = third;
        }
        Ok(GossipMatrix { size, entries: w, kind: MatrixKind::RandomTwoNeighbor })
    }

    /// Wraps an arbitrary matrix after checking all gossip invariants,
    /// including `lambda_1 = 1`.
    pub fn custom(entries: DMatrix<f64>) -> Result<GossipMatrix> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidGossipMatrix(format!(
                "expected a square nonempty matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let w = GossipMatrix { size: entries.nrows(), entries, kind: MatrixKind::Custom };
        w.check_entries()?;
        w.spectral()?;
        Ok(w)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// Largest off-diagonal degree: how many neighbors the busiest node
    /// talks to in one sub-round.
    pub fn max_degree(&self) -> usize {
        (0..self.size)
            .map(|i| (0..self.size).filter(|&j| j != i && self.entries[(i, j)] != 0.0).count())
            .max()
            .unwrap_or(0)
    }

    fn check_entries(&self) -> Result<()> {
        let w = &self.entries;
        let m = self.size;
        for i in 0..m {
            let mut row_sum = 0.0;
            for j in 0..m {
                let e = w[(i, j)];
                if !(-ENTRY_TOL..=1.0 + ENTRY_TOL).contains(&e) {
                    return Err(Error::InvalidGossipMatrix(format!(
                        "entry ({i},{j}) = {e} outside [0, 1]"
                    )));
                }
                if (e - w[(j, i)]).abs() > ENTRY_TOL {
                    return Err(Error::InvalidGossipMatrix(format!(
                        "not symmetric at ({i},{j}): {e} vs {}",
                        w[(j, i)]
                    )));
                }
                row_sum += e;
            }
            if (row_sum - 1.0).abs() > ENTRY_TOL {
                return Err(Error::InvalidGossipMatrix(format!("row {i} sums to {row_sum}")));
            }
        }
        Ok(())
    }

    /// Eigenvalues in descending order plus `rho`. Fails with the violated
    /// invariant if the matrix is not a valid gossip matrix.
    pub fn spectral(&self) -> Result<SpectralInfo> {
        self.check_entries()?;
        let eig = SymmetricEigen::new(self.entries.clone());
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("symmetric eigenvalues are finite"));
        if (eigenvalues[0] - 1.0).abs() > EIGEN_TOL {
            return Err(Error::InvalidGossipMatrix(format!(
                "largest eigenvalue is {}, expected 1",
                eigenvalues[0]
            )));
        }
        let rho = if self.size == 1 {
            0.0
        } else {
            let second = eigenvalues[1].abs();
            let last = eigenvalues[self.size - 1].abs();
            second.max(last).clamp(0.0, 1.0)
        };
        Ok(SpectralInfo { eigenvalues, rho })
    }

    /// Plain-text serialization: first line `M`, then `M` rows of `M`
    /// space-separated decimals. Values are printed with the shortest
    /// round-tripping representation, so parsing restores exact entries.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.size.to_string());
        out.push('\n');
        for i in 0..self.size {
            for j in 0..self.size {
                if j > 0 {
                    out.push(' ');
                }
                out.push_str(&format!("{}", self.entries[(i, j)]));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) format and validates all
    /// invariants. The result is tagged [`MatrixKind::Custom`].
    pub fn from_text(text: &str) -> Result<GossipMatrix> {
        let mut lines = text.lines();
        let m: usize = lines
            .next()
            .ok_or_else(|| Error::InvalidGossipMatrix("empty input".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::InvalidGossipMatrix(format!("bad size line: {e}")))?;
        if m == 0 {
            return Err(Error::InvalidGossipMatrix("size must be >= 1".into()));
        }
        let mut entries = DMatrix::zeros(m, m);
        for i in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::InvalidGossipMatrix(format!("missing row {i}")))?;
            let values: Vec<&str> = line.split_whitespace().collect();
            if values.len() != m {
                return Err(Error::InvalidGossipMatrix(format!(
                    "row {i} has {} entries, expected {m}",
                    values.len()
                )));
            }
            for (j, v) in values.iter().enumerate() {
                entries[(i, j)] = v
                    .parse()
                    .map_err(|e| Error::InvalidGossipMatrix(format!("row {i} col {j}: {e}")))?;
            }
        }
        GossipMatrix::custom(entries)
    }
}

/// One right-multiplication `out = x * w`, skipping zero weights so that
/// disconnected nodes contribute no floating-point work and `W = I` leaves
/// columns bit-identical. The first nonzero term initializes the output
/// column directly.
fn apply_round(x: &DMatrix<f64>, w: &DMatrix<f64>, out: &mut DMatrix<f64>) {
    let (d, m) = x.shape();
    for col in 0..m {
        let mut first = true;
        for j in 0..m {
            let weight = w[(j, col)];
            if weight == 0.0 {
                continue;
            }
            if first {
                for r in 0..d {
                    out[(r, col)] = weight * x[(r, j)];
                }
                first = false;
            } else {
                for r in 0..d {
                    out[(r, col)] += weight * x[(r, j)];
                }
            }
        }
        if first {
            for r in 0..d {
                out[(r, col)] = 0.0;
            }
        }
    }
}

/// Applies `t` communication sub-rounds to the column-per-worker matrix `x`.
///
/// `FixedPower` right-multiplies by `w` in each sub-round (never by an
/// explicit matrix power, mirroring `t` physical communication rounds);
/// `RandomSequence` draws an independent two-neighbor sample per sub-round.
/// Both preserve the exact column mean up to summation order.
pub fn mix<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    schedule: &MixingSchedule,
    w: &GossipMatrix,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if x.ncols() != w.size() {
        return Err(Error::DimensionMismatch { expected: w.size(), got: x.ncols() });
    }
    let mut cur = x.clone();
    let mut next = DMatrix::zeros(x.nrows(), x.ncols());
    match *schedule {
        MixingSchedule::FixedPower { rounds } => {
            for _ in 0..rounds {
                apply_round(&cur, w.entries(), &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
        }
        MixingSchedule::RandomSequence { rounds } => {
            for _ in 0..rounds {
                let sample = GossipMatrix::random_two_neighbor(w.size(), rng)?;
                apply_round(&cur, sample.entries(), &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
        }
    }
    Ok(cur)
}

/// Smallest `t` with `t >= log_{1/rho}(1 + M * sqrt(m*M*G^2 + sigma^2) / (4*sigma))`.
///
/// `rho = 0` (exact averaging) trivially satisfies the bound with `t = 1`.
pub fn min_rounds(rho: f64, workers: usize, minibatch: usize, grad_bound: f64, sigma: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&rho) {
        if rho >= 1.0 {
            return Err(Error::SpectralGapClosed(rho));
        }
        return Err(Error::Config(format!("rho must be in [0, 1), got {rho}")));
    }
    if sigma == 0.0 {
        return Err(Error::NoiselessRounds);
    }
    if sigma < 0.0 || grad_bound < 0.0 {
        return Err(Error::Config("sigma and G must be nonnegative".into()));
    }
    if workers == 0 || minibatch == 0 {
        return Err(Error::Config("M and m must be >= 1".into()));
    }
    if rho == 0.0 {
        return Ok(1);
    }
    let m_w = workers as f64;
    let m_b = minibatch as f64;
    let inner = 1.0 + m_w * (m_b * m_w * grad_bound * grad_bound + sigma * sigma).sqrt() / (4.0 * sigma);
    let t = (inner.ln() / (1.0 / rho).ln()).ceil();
    Ok((t as usize).max(1))
}

/// Closed form for the ring spectral gap, `1/3 + (2/3) cos(2 pi / M)`,
/// valid for `M >= 4`.
pub fn ring_rho_closed_form(size: usize) -> f64 {
    assert!(size >= 4);
    1.0 / 3.0 + 2.0 / 3.0 * (2.0 * std::f64::consts::PI / size as f64).cos()
}
