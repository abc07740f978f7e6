//! Capacity of a discrete memoryless channel by alternating maximization
//! (Blahut–Arimoto), stopped on the classical upper/lower bound pair.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::measures::symmetric_report;
use crate::system::{CommSystem, Distribution, Label, StochasticMatrix};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Input weights below this are reported as exactly zero.
const WEIGHT_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Certified lower bound on the capacity, in bits.
    pub capacity: f64,
    pub optimal_input: Distribution,
    pub iterations: usize,
    pub converged: bool,
    /// Upper bound minus lower bound at termination.
    pub gap_bound: f64,
}

impl CapacityResult {
    pub fn upper_bound(&self) -> f64 {
        self.capacity + self.gap_bound
    }
}

/// Capacity bounds for the input distribution of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

/// Iteration state. Each [`step`](Self::step) evaluates the bounds at the
/// current input distribution and then applies the multiplicative update.
#[derive(Debug, Clone)]
pub struct BlahutArimoto<'a> {
    channel: &'a StochasticMatrix,
    input: Vec<f64>,
    output: Vec<f64>,
    weights: Vec<f64>,
    iterations: usize,
}

impl<'a> BlahutArimoto<'a> {
    /// Starts from the uniform input distribution.
    pub fn new(channel: &'a StochasticMatrix) -> Self {
        let n = channel.dim();
        BlahutArimoto {
            channel,
            input: vec![1.0 / n as f64; n],
            output: vec![0.0; n],
            weights: vec![0.0; n],
            iterations: 0,
        }
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn step(&mut self) -> Bounds {
        let n = self.channel.dim();
        self.output.iter_mut().for_each(|q| *q = 0.0);
        for (x, &p) in self.input.iter().enumerate() {
            for (q, &w) in self.output.iter_mut().zip(self.channel.row(x)) {
                *q += p * w;
            }
        }
        // weights[x] = 2^{D(W(.|x) || q)}
        let mut max_div = f64::NEG_INFINITY;
        for x in 0..n {
            let div: f64 = self
                .channel
                .row(x)
                .iter()
                .zip(&self.output)
                .filter(|(&w, _)| w > 0.0)
                .map(|(&w, &q)| w * (w / q).log2())
                .sum();
            max_div = max_div.max(div);
            self.weights[x] = div;
        }
        // Shift by the max divergence so the exponentials stay in range.
        let mut z = 0.0;
        for (wt, &p) in self.weights.iter_mut().zip(&self.input) {
            *wt = p * (*wt - max_div).exp2();
            z += *wt;
        }
        let lower = max_div + z.log2();
        for (p, &wt) in self.input.iter_mut().zip(&self.weights) {
            *p = wt / z;
        }
        self.iterations += 1;
        Bounds { lower, upper: max_div }
    }
}

pub fn channel_capacity(channel: &StochasticMatrix, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(CoreError::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(CoreError::InvalidConfig("max_iter must be at least 1".into()));
    }
    let log_n = (channel.dim() as f64).log2();
    let mut solver = BlahutArimoto::new(channel);
    let mut bounds = solver.step();
    while bounds.upper - bounds.lower > tol && solver.iterations() < max_iter {
        bounds = solver.step();
    }
    let gap = (bounds.upper - bounds.lower).max(0.0);
    let converged = gap <= tol;

    let mut input = solver.input().to_vec();
    input.iter_mut().filter(|p| **p < WEIGHT_FLOOR).for_each(|p| *p = 0.0);
    let optimal_input = Distribution::normalized(input, Label::Signal)?;

    Ok(CapacityResult {
        capacity: bounds.lower.clamp(0.0, log_n),
        optimal_input,
        iterations: solver.iterations(),
        converged,
        gap_bound: gap,
    })
}

/// The three quantities of the chain `𝓕 ≤ ⟨I⟩ ≤ C(Λ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub avg_consistent_info: f64,
    pub avg_mutual_info: f64,
    pub capacity: CapacityResult,
    pub holds: bool,
}

pub fn verify_chain(system: &CommSystem, tol: f64) -> Result<ChainReport> {
    let sym = symmetric_report(system);
    let capacity = channel_capacity(system.channel(), tol, DEFAULT_MAX_ITER)?;
    let holds = sym.avg_consistent_info <= sym.avg_mutual_info + tol
        && sym.avg_mutual_info <= capacity.upper_bound() + tol;
    Ok(ChainReport {
        avg_consistent_info: sym.avg_consistent_info,
        avg_mutual_info: sym.avg_mutual_info,
        capacity,
        holds,
    })
}
