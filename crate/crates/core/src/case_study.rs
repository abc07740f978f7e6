//! The binary symmetric channel case study: two agents, a uniform binary
//! world, and three configurations checked against published values.
//!
//! * Case 1: identity coders, swapped decoders, noiseless channel.
//! * Case 2: identity coders and decoders, noiseless channel.
//! * Case 3: the Case 2 agents over a channel with crossover 0.1.

use serde::Serialize;

use crate::measures::{directed_report, symmetric_report};
use crate::system::{
    decoded_distribution, joint_matrix, Agent, CommSystem, Direction, Distribution, Label, Role, StochasticMatrix,
};

/// Absolute tolerance against the published three-decimal values.
pub const CASE_TOL: f64 = 1e-3;

fn pair(decoder: StochasticMatrix, channel: StochasticMatrix) -> CommSystem {
    let coder = StochasticMatrix::identity(2, Role::Coder);
    let v = Agent::new("v", coder.clone(), decoder.clone()).expect("2x2");
    let u = Agent::new("u", coder, decoder).expect("2x2");
    CommSystem::new(Distribution::uniform(2, Label::World).expect("n = 2"), v, u, channel).expect("2x2")
}

pub fn case1_system() -> CommSystem {
    pair(
        StochasticMatrix::permutation(&[1, 0], Role::Decoder).expect("swap"),
        StochasticMatrix::identity(2, Role::Channel),
    )
}

pub fn case2_system() -> CommSystem {
    pair(
        StochasticMatrix::identity(2, Role::Decoder),
        StochasticMatrix::identity(2, Role::Channel),
    )
}

pub fn case3_system() -> CommSystem {
    pair(
        StochasticMatrix::identity(2, Role::Decoder),
        StochasticMatrix::binary_symmetric(0.1).expect("p = 0.1"),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub case: u8,
    pub quantity: &'static str,
    pub computed: f64,
    pub published: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseStudy {
    pub tolerance: f64,
    pub checks: Vec<Check>,
}

impl CaseStudy {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn get(&self, case: u8, quantity: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.case == case && c.quantity == quantity)
    }

    /// Side-by-side table, values at three decimals.
    pub fn render(&self) -> String {
        let title = |case| match case {
            1 => "Case 1: non-preservation of referentiality (noiseless, swapped decoders)",
            2 => "Case 2: preservation of referentiality (noiseless, identity codes)",
            _ => "Case 3: noisy channel (crossover 0.1, identity codes)",
        };
        let mut out = String::new();
        let mut current = 0;
        for c in &self.checks {
            if c.case != current {
                if current != 0 {
                    out.push('\n');
                }
                current = c.case;
                out.push_str(title(current));
                out.push('\n');
                out.push_str(&format!("  {:<26} {:>9} {:>9}  result\n", "quantity", "computed", "published"));
            }
            out.push_str(&format!(
                "  {:<26} {:>9.3} {:>9.3}  {}\n",
                c.quantity,
                c.computed,
                c.published,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "\n{} of {} values within {:e}\n",
            self.checks.len() - self.failures(),
            self.checks.len(),
            self.tolerance
        ));
        out
    }
}

fn push(checks: &mut Vec<Check>, case: u8, quantity: &'static str, computed: f64, published: f64) {
    checks.push(Check {
        case,
        quantity,
        computed,
        published,
        pass: (computed - published).abs() <= CASE_TOL,
    });
}

fn surprisal(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub fn run() -> CaseStudy {
    let fwd = Direction::SenderToReceiver;
    let mut checks = Vec::new();

    let s1 = case1_system();
    let mu1 = decoded_distribution(&s1, fwd);
    let j1 = joint_matrix(&s1, fwd);
    let r1 = directed_report(&s1, fwd);
    push(&mut checks, 1, "mu'(m1)", mu1.probs()[0], 0.5);
    push(&mut checks, 1, "mu'(m2)", mu1.probs()[1], 0.5);
    push(&mut checks, 1, "J11", j1.get(0, 0), 0.0);
    push(&mut checks, 1, "J12", j1.get(0, 1), 0.5);
    push(&mut checks, 1, "J21", j1.get(1, 0), 0.5);
    push(&mut checks, 1, "J22", j1.get(1, 1), 0.0);
    push(&mut checks, 1, "I (bits)", r1.mutual_info, 1.0);
    push(&mut checks, 1, "sigma", r1.sigma, 0.0);
    push(&mut checks, 1, "consistent I (bits)", r1.consistent_info, 0.0);

    let s2 = case2_system();
    let r2 = directed_report(&s2, fwd);
    push(&mut checks, 2, "I (bits)", r2.mutual_info, 1.0);
    push(&mut checks, 2, "sigma", r2.sigma, 1.0);
    push(&mut checks, 2, "consistent I (bits)", r2.consistent_info, 1.0);

    let s3 = case3_system();
    let mu3 = decoded_distribution(&s3, fwd);
    let j3 = joint_matrix(&s3, fwd);
    let r3 = directed_report(&s3, fwd);
    let sym3 = symmetric_report(&s3);
    push(&mut checks, 3, "J11", j3.get(0, 0), 0.45);
    push(&mut checks, 3, "J12", j3.get(0, 1), 0.05);
    push(&mut checks, 3, "J21", j3.get(1, 0), 0.05);
    push(&mut checks, 3, "J22", j3.get(1, 1), 0.45);
    push(&mut checks, 3, "mu'(m1)", mu3.probs()[0], 0.5);
    push(&mut checks, 3, "mu'(m2)", mu3.probs()[1], 0.5);
    push(&mut checks, 3, "I (bits)", r3.mutual_info, 0.531);
    push(&mut checks, 3, "-J log J, diagonal", surprisal(j3.get(0, 0)), 0.518);
    push(&mut checks, 3, "-J log J, off-diagonal", surprisal(j3.get(0, 1)), 0.216);
    push(&mut checks, 3, "H(X,X') (bits)", r3.h_joint, 1.468);
    push(&mut checks, 3, "sigma", r3.sigma, 0.706);
    push(&mut checks, 3, "consistent I (bits)", r3.consistent_info, 0.375);
    push(&mut checks, 3, "symmetric F (bits)", sym3.avg_consistent_info, 0.375);
    push(&mut checks, 3, "physical noise (bits)", r3.dissipation_physical, 0.469);
    push(&mut checks, 3, "referential noise (bits)", r3.dissipation_referential, 0.156);
    push(&mut checks, 3, "H(X) (bits)", r3.h_input, 1.0);

    CaseStudy {
        tolerance: CASE_TOL,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_published_value_is_reproduced() {
        let study = run();
        for c in &study.checks {
            assert!(c.pass, "case {} {}: {} vs {}", c.case, c.quantity, c.computed, c.published);
        }
        assert_eq!(study.checks.len(), 28);
    }

    #[test]
    fn render_lists_every_check() {
        let text = run().render();
        assert_eq!(text.matches("PASS").count(), 28);
        assert!(text.contains("sigma                          0.706     0.706  PASS"));
    }
}
