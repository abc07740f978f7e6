//! Validated probability types and the end-to-end composition of coder,
//! channel and decoder.
//!
//! Matrices are square, row-major and row-stochastic: entry `(i, j)` of a
//! coder is `P(s_j | m_i)`, of a channel `P(s_j | s_i)` and of a decoder
//! `P(m_j | s_i)`.
//!
//! Orientation of the joint matrix: `J[i][j]` is the probability that
//! referent `m_j` was sent **and** referent `m_i` was decoded. Columns are
//! indexed by the input, rows by the output, so column sums give the world
//! distribution and row sums give the decoded distribution. Every marginal
//! helper in this crate follows that convention.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{CoreError, Result};

/// Tolerance used by every stochasticity check.
pub const EPS_STOCH: f64 = 1e-9;

/// What a [`Distribution`] is distributed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    /// World events. Every event must carry non-zero mass.
    World,
    /// Signals, before or after the channel.
    Signal,
    /// Decoded referents. Zero entries are allowed.
    Decoded,
}

/// A probability vector over a finite set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<f64>,
    label: Label,
}

impl Distribution {
    /// Validates `raw` as-is.
    pub fn new(raw: Vec<f64>, label: Label) -> Result<Self> {
        Self::validate(raw, label, false)
    }

    /// Rescales `raw` by its sum, then validates.
    pub fn normalized(raw: Vec<f64>, label: Label) -> Result<Self> {
        Self::validate(raw, label, true)
    }

    /// Validation entry point with an explicit normalize flag.
    pub fn validate(mut raw: Vec<f64>, label: Label, normalize: bool) -> Result<Self> {
        if raw.is_empty() {
            return Err(CoreError::Empty);
        }
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { index, value });
            }
            if value < 0.0 {
                return Err(CoreError::NegativeEntry { index, value });
            }
        }
        if label == Label::World {
            if let Some(index) = raw.iter().position(|&p| p == 0.0) {
                return Err(CoreError::ZeroWorldEvent { index });
            }
        }
        let sum: f64 = raw.iter().sum();
        if normalize && sum > 0.0 {
            raw.iter_mut().for_each(|p| *p /= sum);
        }
        let sum: f64 = raw.iter().sum();
        if (sum - 1.0).abs() > EPS_STOCH {
            return Err(CoreError::SumNotOne { sum, tol: EPS_STOCH });
        }
        Ok(Distribution { probs: raw, label })
    }

    pub fn uniform(n: usize, label: Label) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::Empty);
        }
        Ok(Distribution {
            probs: vec![1.0 / n as f64; n],
            label,
        })
    }

    /// Uniformly random point of the open simplex (flat Dirichlet).
    pub fn random<R: Rng + ?Sized>(n: usize, label: Label, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::Empty);
        }
        Ok(Distribution {
            probs: random_simplex_point(n, rng),
            label,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    // Output of an exact product of validated inputs; only the sum is re-checked.
    fn from_product(probs: Vec<f64>, label: Label) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        Distribution { probs, label }
    }
}

fn random_simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    // Normalized Exp(1) draws; the open lower bound keeps every entry > 0.
    let mut v: Vec<f64> = (0..n)
        .map(|_| -rng.gen_range(f64::MIN_POSITIVE..1.0f64).ln())
        .collect();
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|p| *p /= sum);
    v
}

/// Which stage of the pipeline a matrix models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    Coder,
    Decoder,
    Channel,
    /// Product coder·channel·decoder.
    Composite,
}

impl Role {
    fn name(self) -> &'static str {
        match self {
            Role::Coder => "coder",
            Role::Decoder => "decoder",
            Role::Channel => "channel",
            Role::Composite => "composite",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Square row-stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochasticMatrix {
    n: usize,
    data: Vec<f64>,
    role: Role,
}

impl StochasticMatrix {
    /// Validates a row-major nested array.
    pub fn new(rows: Vec<Vec<f64>>, role: Role) -> Result<Self> {
        Self::validate(rows, role, false)
    }

    /// Rescales every row by its sum before validating.
    pub fn normalized(rows: Vec<Vec<f64>>, role: Role) -> Result<Self> {
        Self::validate(rows, role, true)
    }

    pub fn validate(rows: Vec<Vec<f64>>, role: Role, normalize: bool) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(CoreError::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for (r, mut row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(CoreError::NotSquare {
                    row: r,
                    len: row.len(),
                    expected: n,
                });
            }
            for (c, &value) in row.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(CoreError::EntryOutOfRange { row: r, col: c, value });
                }
            }
            if normalize {
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    row.iter_mut().for_each(|v| *v /= s);
                }
            }
            for (c, &value) in row.iter().enumerate() {
                if value > 1.0 + EPS_STOCH {
                    return Err(CoreError::EntryOutOfRange { row: r, col: c, value });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > EPS_STOCH {
                return Err(CoreError::NonStochastic {
                    row: r,
                    sum,
                    tol: EPS_STOCH,
                });
            }
            data.extend(row);
        }
        Ok(StochasticMatrix { n, data, role })
    }

    pub fn identity(n: usize, role: Role) -> Self {
        let perm: Vec<usize> = (0..n).collect();
        Self::permutation(&perm, role).expect("identity is a permutation")
    }

    /// Permutation matrix sending row `i` to column `perm[i]`.
    pub fn permutation(perm: &[usize], role: Role) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(CoreError::Empty);
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(CoreError::InvalidConfig(format!(
                    "{perm:?} is not a permutation of 0..{n}"
                )));
            }
            seen[p] = true;
        }
        let mut data = vec![0.0; n * n];
        for (i, &p) in perm.iter().enumerate() {
            data[i * n + p] = 1.0;
        }
        Ok(StochasticMatrix { n, data, role })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn binary_symmetric(p: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]], Role::Channel)
    }

    /// Matrix whose rows are independent flat-Dirichlet draws.
    pub fn random<R: Rng + ?Sized>(n: usize, role: Role, rng: &mut R) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n {
            data.extend(random_simplex_point(n, rng));
        }
        StochasticMatrix { n, data, role }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Every column holds at least one strictly positive entry.
    pub fn covers_all_columns(&self) -> std::result::Result<(), usize> {
        for c in 0..self.n {
            if (0..self.n).all(|r| self.get(r, c) <= 0.0) {
                return Err(c);
            }
        }
        Ok(())
    }

    /// Plain matrix product; the result inherits `role`.
    pub fn product(&self, other: &StochasticMatrix, role: Role) -> Result<StochasticMatrix> {
        if self.n != other.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(StochasticMatrix { n, data, role })
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, dist: &Distribution, label: Label) -> Result<Distribution> {
        if dist.len() != self.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                found: dist.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        for (k, &w) in dist.probs().iter().enumerate() {
            for (o, &m) in out.iter_mut().zip(self.row(k)) {
                *o += w * m;
            }
        }
        Ok(Distribution::from_product(out, label))
    }

    pub(crate) fn from_raw(n: usize, data: Vec<f64>, role: Role) -> Self {
        debug_assert_eq!(data.len(), n * n);
        StochasticMatrix { n, data, role }
    }

    pub(crate) fn data(&self) -> &[f64] {
        &self.data
    }
}

/// A coder/decoder pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agent {
    pub id: String,
    coder: StochasticMatrix,
    decoder: StochasticMatrix,
}

impl Agent {
    pub fn new(id: impl Into<String>, coder: StochasticMatrix, decoder: StochasticMatrix) -> Result<Self> {
        expect_role(&coder, Role::Coder)?;
        expect_role(&decoder, Role::Decoder)?;
        if coder.dim() != decoder.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: coder.dim(),
                found: decoder.dim(),
            });
        }
        Ok(Agent {
            id: id.into(),
            coder,
            decoder,
        })
    }

    pub fn coder(&self) -> &StochasticMatrix {
        &self.coder
    }

    pub fn decoder(&self) -> &StochasticMatrix {
        &self.decoder
    }

    pub fn dim(&self) -> usize {
        self.coder.dim()
    }

    pub(crate) fn with_matrices(&self, coder: StochasticMatrix, decoder: StochasticMatrix) -> Self {
        Agent {
            id: self.id.clone(),
            coder,
            decoder,
        }
    }
}

fn expect_role(m: &StochasticMatrix, role: Role) -> Result<()> {
    if m.role() != role {
        return Err(CoreError::RoleMismatch {
            expected: role.name(),
            found: m.role().name(),
        });
    }
    Ok(())
}

/// Which agent codes and which decodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Sender codes, receiver decodes.
    SenderToReceiver,
    /// Receiver codes, sender decodes.
    ReceiverToSender,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::SenderToReceiver => Direction::ReceiverToSender,
            Direction::ReceiverToSender => Direction::SenderToReceiver,
        }
    }
}

/// World distribution, two agents and the channel between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommSystem {
    world: Distribution,
    sender: Agent,
    receiver: Agent,
    channel: StochasticMatrix,
}

impl CommSystem {
    pub fn new(world: Distribution, sender: Agent, receiver: Agent, channel: StochasticMatrix) -> Result<Self> {
        if world.label() != Label::World {
            return Err(CoreError::InvalidConfig(
                "the world distribution must carry the World label".into(),
            ));
        }
        expect_role(&channel, Role::Channel)?;
        let n = world.len();
        for found in [sender.dim(), receiver.dim(), channel.dim()] {
            if found != n {
                return Err(CoreError::DimensionMismatch { expected: n, found });
            }
        }
        Ok(CommSystem {
            world,
            sender,
            receiver,
            channel,
        })
    }

    pub fn dim(&self) -> usize {
        self.world.len()
    }

    pub fn world(&self) -> &Distribution {
        &self.world
    }

    pub fn sender(&self) -> &Agent {
        &self.sender
    }

    pub fn receiver(&self) -> &Agent {
        &self.receiver
    }

    pub fn channel(&self) -> &StochasticMatrix {
        &self.channel
    }

    /// `(coding agent, decoding agent)` for a direction.
    pub fn endpoints(&self, direction: Direction) -> (&Agent, &Agent) {
        match direction {
            Direction::SenderToReceiver => (&self.sender, &self.receiver),
            Direction::ReceiverToSender => (&self.receiver, &self.sender),
        }
    }

    /// Optional reachability check: for each agent, every referent is an
    /// output of its decoder for at least one signal.
    pub fn check_world_coverage(&self) -> Result<()> {
        for agent in [&self.sender, &self.receiver] {
            if let Err(referent) = agent.decoder().covers_all_columns() {
                return Err(CoreError::UncoveredReferent {
                    agent: agent.id.clone(),
                    referent,
                });
            }
        }
        Ok(())
    }

    /// Conditional matrix `P(decoded m_i | sent m_l)` at `[l][i]`.
    pub fn end_to_end(&self, direction: Direction) -> StochasticMatrix {
        let (from, to) = self.endpoints(direction);
        compose_end_to_end(from.coder(), &self.channel, to.decoder())
            .expect("system dimensions validated at construction")
    }
}

/// `coder · channel · decoder`; row `l`, column `i` is the probability of
/// decoding `m_i` after sending `m_l`.
pub fn compose_end_to_end(
    coder: &StochasticMatrix,
    channel: &StochasticMatrix,
    decoder: &StochasticMatrix,
) -> Result<StochasticMatrix> {
    coder
        .product(channel, Role::Composite)?
        .product(decoder, Role::Composite)
}

/// Signal distribution `ν = μ · P` emitted by a coder.
pub fn signal_distribution(world: &Distribution, coder: &StochasticMatrix) -> Result<Distribution> {
    coder.left_apply(world, Label::Signal)
}

/// Signal distribution `ν′ = μ · (P·Λ)` at the channel output.
pub fn received_signal_distribution(
    world: &Distribution,
    coder: &StochasticMatrix,
    channel: &StochasticMatrix,
) -> Result<Distribution> {
    coder
        .product(channel, Role::Composite)?
        .left_apply(world, Label::Signal)
}

/// Distribution of decoded referents `μ′ = μ · (P·Λ·Q)`.
pub fn decoded_distribution(system: &CommSystem, direction: Direction) -> Distribution {
    system
        .end_to_end(direction)
        .left_apply(system.world(), Label::Decoded)
        .expect("system dimensions validated at construction")
}

/// Joint probabilities over (decoded, sent) referent pairs; see the module docs for orientation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointMatrix {
    n: usize,
    data: Vec<f64>,
}

impl JointMatrix {
    /// Validates a hand-written joint matrix: non-negative, square, total mass 1.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(CoreError::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(CoreError::NotSquare {
                    row: r,
                    len: row.len(),
                    expected: n,
                });
            }
            for (c, &value) in row.iter().enumerate() {
                if !value.is_finite() || !(0.0..=1.0 + EPS_STOCH).contains(&value) {
                    return Err(CoreError::EntryOutOfRange { row: r, col: c, value });
                }
            }
            data.extend(row);
        }
        let sum: f64 = data.iter().sum();
        if (sum - 1.0).abs() > EPS_STOCH {
            return Err(CoreError::SumNotOne { sum, tol: EPS_STOCH });
        }
        Ok(JointMatrix { n, data })
    }

    /// Weights the conditional matrix `P(decoded m_i | sent m_j)` (at
    /// `[j][i]`) by the input distribution.
    pub fn from_end_to_end(input: &Distribution, e2e: &StochasticMatrix) -> Result<Self> {
        let n = e2e.dim();
        if input.len() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                found: input.len(),
            });
        }
        let mu = input.probs();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = mu[j] * e2e.get(j, i);
            }
        }
        Ok(JointMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `P(decoded = m_output, sent = m_input)`.
    #[inline]
    pub fn get(&self, output: usize, input: usize) -> f64 {
        self.data[output * self.n + input]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.get(i, i))
    }

    /// Column sums: distribution of the sent referent.
    pub fn input_marginal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Row sums: distribution of the decoded referent.
    pub fn output_marginal(&self) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks_exact(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// `J[i][j] = μ(m_j) · endToEnd[j][i]`.
pub fn joint_matrix(system: &CommSystem, direction: Direction) -> JointMatrix {
    JointMatrix::from_end_to_end(system.world(), &system.end_to_end(direction))
        .expect("system dimensions validated at construction")
}
