//! Entropic measures over joint matrices, in bits.
//!
//! Every sum uses the convention `0 · log 0 = 0`.

use serde::Serialize;

use crate::error::Result;
use crate::system::{
    compose_end_to_end, joint_matrix, CommSystem, Direction, Distribution, JointMatrix, StochasticMatrix,
};

/// Tolerance for the identities between report fields.
pub const EPS_NUM: f64 = 1e-9;

#[inline]
fn surprisal_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a raw probability vector.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| surprisal_term(p)).sum()
}

pub fn entropy(dist: &Distribution) -> f64 {
    entropy_bits(dist.probs())
}

pub fn joint_entropy(j: &JointMatrix) -> f64 {
    entropy_bits(j.entries())
}

/// Which marginal a conditional entropy conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    /// `H(input | output)`, the physical-noise term.
    GivenOutput,
    /// `H(output | input)`.
    GivenInput,
}

pub fn conditional_entropy(j: &JointMatrix, conditioning: Conditioning) -> f64 {
    let marginal = match conditioning {
        Conditioning::GivenOutput => j.output_marginal(),
        Conditioning::GivenInput => j.input_marginal(),
    };
    (joint_entropy(j) - entropy_bits(&marginal)).max(0.0)
}

/// `Σ J_ij log2(J_ij / (out_i · in_j))`.
pub fn mutual_information(j: &JointMatrix) -> f64 {
    let n = j.dim();
    let out = j.output_marginal();
    let inp = j.input_marginal();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let p = j.get(i, k);
            if p > 0.0 {
                acc += p * (p / (out[i] * inp[k])).log2();
            }
        }
    }
    acc.max(0.0)
}

/// Share of the joint entropy carried by the diagonal (consistent) pairs.
///
/// When the joint entropy is zero all mass sits in one cell; σ is 1 if that
/// cell is on the diagonal and 0 otherwise.
pub fn referential_parameter(j: &JointMatrix) -> f64 {
    let h_joint = joint_entropy(j);
    if h_joint == 0.0 {
        let on_diagonal = j.diagonal().any(|p| p > 0.5);
        return if on_diagonal { 1.0 } else { 0.0 };
    }
    let diag: f64 = j.diagonal().map(surprisal_term).sum();
    (diag / h_joint).clamp(0.0, 1.0)
}

/// Mutual information weighted by the referential parameter.
pub fn consistent_information(j: &JointMatrix) -> f64 {
    mutual_information(j) * referential_parameter(j)
}

/// Probability that a referent is decoded as itself (trace of `J`).
pub fn payoff_fraction(j: &JointMatrix) -> f64 {
    j.diagonal().sum()
}

/// Lost information, split into channel noise and misreferentiated correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dissipation {
    pub physical: f64,
    pub referential: f64,
}

impl Dissipation {
    pub fn total(&self) -> f64 {
        self.physical + self.referential
    }
}

pub fn dissipation(j: &JointMatrix) -> Dissipation {
    let sigma = referential_parameter(j);
    Dissipation {
        physical: conditional_entropy(j, Conditioning::GivenOutput),
        referential: (1.0 - sigma) * mutual_information(j),
    }
}

/// All measures for one direction of a system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoReport {
    pub h_input: f64,
    pub h_output: f64,
    pub h_joint: f64,
    pub h_cond_input_given_output: f64,
    pub mutual_info: f64,
    pub sigma: f64,
    pub consistent_info: f64,
    pub payoff_fraction: f64,
    pub dissipation_physical: f64,
    pub dissipation_referential: f64,
}

impl InfoReport {
    pub fn from_joint(j: &JointMatrix) -> Self {
        let h_input = entropy_bits(&j.input_marginal());
        let h_output = entropy_bits(&j.output_marginal());
        let h_joint = joint_entropy(j);
        let h_cond = conditional_entropy(j, Conditioning::GivenOutput);
        let mutual_info = mutual_information(j);
        let sigma = referential_parameter(j);
        InfoReport {
            h_input,
            h_output,
            h_joint,
            h_cond_input_given_output: h_cond,
            mutual_info,
            sigma,
            consistent_info: sigma * mutual_info,
            payoff_fraction: payoff_fraction(j),
            dissipation_physical: h_cond,
            dissipation_referential: (1.0 - sigma) * mutual_info,
        }
    }

    pub fn dissipation(&self) -> Dissipation {
        Dissipation {
            physical: self.dissipation_physical,
            referential: self.dissipation_referential,
        }
    }
}

pub fn directed_report(system: &CommSystem, direction: Direction) -> InfoReport {
    InfoReport::from_joint(&joint_matrix(system, direction))
}

/// Report for a bare pipeline, without assembling a [`CommSystem`].
pub fn pipeline_report(
    world: &Distribution,
    coder: &StochasticMatrix,
    channel: &StochasticMatrix,
    decoder: &StochasticMatrix,
) -> Result<InfoReport> {
    let e2e = compose_end_to_end(coder, channel, decoder)?;
    Ok(InfoReport::from_joint(&JointMatrix::from_end_to_end(world, &e2e)?))
}

/// Both directions over the same channel and their averages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricReport {
    pub forward: InfoReport,
    pub backward: InfoReport,
    /// ⟨I⟩
    pub avg_mutual_info: f64,
    /// Average consistent information between the two agents.
    pub avg_consistent_info: f64,
    pub avg_payoff: f64,
}

pub fn symmetric_report(system: &CommSystem) -> SymmetricReport {
    let forward = directed_report(system, Direction::SenderToReceiver);
    let backward = directed_report(system, Direction::ReceiverToSender);
    SymmetricReport {
        avg_mutual_info: 0.5 * (forward.mutual_info + backward.mutual_info),
        avg_consistent_info: 0.5 * (forward.consistent_info + backward.consistent_info),
        avg_payoff: 0.5 * (forward.payoff_fraction + backward.payoff_fraction),
        forward,
        backward,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Agent, Label, Role};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // 1 - h(0.1), h(0.1) and case-3 values, frozen from a direct evaluation
    // of the closed-form expressions on the printed joint matrix.
    const H_01: f64 = 0.468_995_593_589_281_2;
    const BSC01_MI: f64 = 0.531_004_406_410_718_8;
    const CASE3_H_JOINT: f64 = 1.468_995_593_589_281_3;
    const CASE3_SIGMA: f64 = 0.705_790_261_471_966_2;
    const CASE3_CONSISTENT: f64 = 0.374_777_738_843_387_44;
    const CASE3_REFERENTIAL: f64 = 0.156_226_667_567_331_36;

    fn jm(rows: &[&[f64]]) -> JointMatrix {
        JointMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn case1() -> JointMatrix {
        jm(&[&[0.0, 0.5], &[0.5, 0.0]])
    }
    fn case2() -> JointMatrix {
        jm(&[&[0.5, 0.0], &[0.0, 0.5]])
    }
    fn case3() -> JointMatrix {
        jm(&[&[0.45, 0.05], &[0.05, 0.45]])
    }
    fn independent() -> JointMatrix {
        jm(&[&[0.25, 0.25], &[0.25, 0.25]])
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_examples() {
        let d = |v: Vec<f64>| Distribution::new(v, Label::Signal).unwrap();
        assert_eq!(entropy(&d(vec![0.5, 0.5])), 1.0);
        assert_eq!(entropy(&d(vec![1.0])), 0.0);
        assert!(close(entropy(&d(vec![0.9, 0.1])), H_01, 1e-15));
        assert!(close(entropy(&d(vec![0.9, 0.1])), 0.4690, 1e-4));
        assert_eq!(entropy(&d(vec![1.0, 0.0])), 0.0);
    }

    #[test]
    fn joint_entropy_examples() {
        assert!(close(joint_entropy(&case3()), CASE3_H_JOINT, 1e-12));
        assert!(close(joint_entropy(&case3()), 1.468, 1e-3));
        assert_eq!(joint_entropy(&case1()), 1.0);
        assert_eq!(joint_entropy(&case2()), 1.0);
    }

    #[test]
    fn conditional_entropy_examples() {
        assert!(close(conditional_entropy(&case3(), Conditioning::GivenOutput), H_01, 1e-12));
        assert_eq!(conditional_entropy(&case1(), Conditioning::GivenOutput), 0.0);
        assert!(close(conditional_entropy(&independent(), Conditioning::GivenOutput), 1.0, 1e-15));
        assert!(close(conditional_entropy(&independent(), Conditioning::GivenInput), 1.0, 1e-15));
    }

    #[test]
    fn conditional_direction_matters() {
        // output is constant: H(out|in) = 0, H(in|out) = H(in)
        let j = jm(&[&[0.0, 0.0], &[0.3, 0.7]]);
        assert_eq!(conditional_entropy(&j, Conditioning::GivenInput), 0.0);
        assert!(close(
            conditional_entropy(&j, Conditioning::GivenOutput),
            entropy_bits(&[0.3, 0.7]),
            1e-15
        ));
    }

    #[test]
    fn mutual_information_examples() {
        assert!(close(mutual_information(&case1()), 1.0, 1e-15));
        assert!(close(mutual_information(&case3()), BSC01_MI, 1e-12));
        assert_eq!(mutual_information(&independent()), 0.0);
    }

    #[test]
    fn referential_parameter_examples() {
        assert_eq!(referential_parameter(&case1()), 0.0);
        assert_eq!(referential_parameter(&case2()), 1.0);
        assert!(close(referential_parameter(&case3()), CASE3_SIGMA, 1e-12));
    }

    #[test]
    fn referential_parameter_degenerate() {
        assert_eq!(referential_parameter(&jm(&[&[0.0, 0.0], &[0.0, 1.0]])), 1.0);
        assert_eq!(referential_parameter(&jm(&[&[0.0, 1.0], &[0.0, 0.0]])), 0.0);
        assert_eq!(referential_parameter(&jm(&[&[1.0]])), 1.0);
    }

    #[test]
    fn consistent_information_examples() {
        assert!(close(consistent_information(&case3()), CASE3_CONSISTENT, 1e-12));
        assert_eq!(consistent_information(&case1()), 0.0);
        assert!(close(consistent_information(&case2()), 1.0, 1e-15));
    }

    #[test]
    fn payoff_examples() {
        assert_eq!(payoff_fraction(&case1()), 0.0);
        assert!(close(payoff_fraction(&case3()), 0.9, 1e-15));
        assert_eq!(payoff_fraction(&case2()), 1.0);
    }

    #[test]
    fn dissipation_examples() {
        let d = dissipation(&case3());
        assert!(close(d.physical, H_01, 1e-12));
        assert!(close(d.referential, CASE3_REFERENTIAL, 1e-12));
        assert_eq!(dissipation(&case2()), Dissipation { physical: 0.0, referential: 0.0 });
        let d = dissipation(&case1());
        assert_eq!(d.physical, 0.0);
        assert!(close(d.referential, 1.0, 1e-15));
    }

    fn bsc_system(p: f64, coder: StochasticMatrix, decoder: StochasticMatrix) -> CommSystem {
        let a = Agent::new("v", coder.clone(), decoder.clone()).unwrap();
        let b = Agent::new("u", coder, decoder).unwrap();
        CommSystem::new(
            Distribution::uniform(2, Label::World).unwrap(),
            a,
            b,
            StochasticMatrix::binary_symmetric(p).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn directed_report_examples() {
        let id = |r| StochasticMatrix::identity(2, r);
        let swap = StochasticMatrix::permutation(&[1, 0], Role::Decoder).unwrap();
        let r = directed_report(&bsc_system(0.1, id(Role::Coder), id(Role::Decoder)), Direction::SenderToReceiver);
        assert!(close(r.mutual_info, 0.531, 1e-3));
        assert!(close(r.sigma, 0.706, 1e-3));
        assert!(close(r.consistent_info, 0.375, 1e-3));

        let r = directed_report(&bsc_system(0.0, id(Role::Coder), id(Role::Decoder)), Direction::SenderToReceiver);
        assert_eq!((r.mutual_info, r.sigma, r.consistent_info), (1.0, 1.0, 1.0));

        let r = directed_report(&bsc_system(0.0, id(Role::Coder), swap), Direction::SenderToReceiver);
        assert_eq!((r.mutual_info, r.sigma, r.consistent_info), (1.0, 0.0, 0.0));
    }

    #[test]
    fn symmetric_report_examples() {
        let id = |r| StochasticMatrix::identity(2, r);
        let s = symmetric_report(&bsc_system(0.1, id(Role::Coder), id(Role::Decoder)));
        assert!(close(s.avg_consistent_info, 0.375, 1e-3));
        let s = symmetric_report(&bsc_system(0.0, id(Role::Coder), id(Role::Decoder)));
        assert_eq!(s.avg_consistent_info, 1.0);
        assert_eq!(s.avg_mutual_info, 1.0);
    }

    #[test]
    fn directions_can_disagree() {
        // v codes identically and decodes identically; u keeps v's coder but
        // its decoder collapses every signal onto m_1.
        let id = |r| StochasticMatrix::identity(2, r);
        let collapse = StochasticMatrix::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]], Role::Decoder).unwrap();
        let v = Agent::new("v", id(Role::Coder), id(Role::Decoder)).unwrap();
        let u = Agent::new("u", id(Role::Coder), collapse).unwrap();
        let sys = CommSystem::new(Distribution::uniform(2, Label::World).unwrap(), v, u, id(Role::Channel)).unwrap();
        let s = symmetric_report(&sys);
        // v -> u: u's decoder discards everything
        assert_eq!(s.forward.mutual_info, 0.0);
        // u -> v: identity chain
        assert_eq!(s.backward.mutual_info, 1.0);
        assert_eq!(s.avg_mutual_info, 0.5);
        assert_eq!(s.forward.payoff_fraction, 0.5);
    }

    /// Independent evaluation: I = Σ_l Σ_i μ_l E[l][i] log(E[l][i] / μ′_i),
    /// built from the conditional matrix instead of the joint one.
    fn brute_force_mi(mu: &[f64], e2e: &[Vec<f64>]) -> f64 {
        let n = mu.len();
        let mut mu_out = vec![0.0; n];
        for l in 0..n {
            for i in 0..n {
                mu_out[i] += mu[l] * e2e[l][i];
            }
        }
        let mut total = 0.0;
        for l in 0..n {
            for i in 0..n {
                let c = e2e[l][i];
                if c > 0.0 {
                    total += mu[l] * c * (c / mu_out[i]).log2();
                }
            }
        }
        total
    }

    fn arb_system(n_range: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = CommSystem> {
        (n_range, any::<u64>()).prop_map(|(n, seed)| crate::sample::random_system(n, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn mi_matches_brute_force(sys in arb_system(2..=3)) {
            let e2e = sys.end_to_end(Direction::SenderToReceiver).to_rows();
            let oracle = brute_force_mi(sys.world().probs(), &e2e);
            let j = joint_matrix(&sys, Direction::SenderToReceiver);
            prop_assert!((mutual_information(&j) - oracle).abs() <= 1e-12);
        }

        #[test]
        fn report_identities(sys in arb_system(2..=8)) {
            let r = directed_report(&sys, Direction::SenderToReceiver);
            prop_assert!((0.0..=1.0).contains(&r.sigma));
            prop_assert!(r.consistent_info >= 0.0);
            prop_assert!(r.consistent_info <= r.mutual_info + EPS_NUM);
            prop_assert!(r.mutual_info <= r.h_input.min(r.h_output) + EPS_NUM);
            prop_assert!((r.mutual_info - (r.h_input + r.h_output - r.h_joint)).abs() <= EPS_NUM);
            prop_assert!((r.consistent_info - r.sigma * r.mutual_info).abs() <= EPS_NUM);
            let total = r.dissipation_physical + r.dissipation_referential + r.consistent_info;
            prop_assert!((total - r.h_input).abs() <= EPS_NUM);
        }

        #[test]
        fn symmetric_average_bound(sys in arb_system(2..=6)) {
            let s = symmetric_report(&sys);
            prop_assert!(s.avg_consistent_info <= s.avg_mutual_info + EPS_NUM);
            prop_assert_eq!(s.avg_mutual_info, 0.5 * (s.forward.mutual_info + s.backward.mutual_info));
        }

        #[test]
        fn identity_end_to_end_is_fully_consistent(n in 1usize..=8, seed in any::<u64>()) {
            let sys = crate::sample::consistent_permutation_system(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let r = directed_report(&sys, Direction::SenderToReceiver);
            prop_assert_eq!(r.sigma, 1.0);
            prop_assert!((r.mutual_info - r.h_input).abs() <= EPS_NUM);
        }
    }
}
