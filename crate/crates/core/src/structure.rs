//! Structural classification of a system direction: permutation codes,
//! full consistency and the noisy regime.

use serde::Serialize;

use crate::measures::{conditional_entropy, referential_parameter, Conditioning};
use crate::system::{joint_matrix, CommSystem, Direction, Role, StochasticMatrix};

/// Tolerance for permutation detection and the transpose condition.
pub const PERMUTATION_TOL: f64 = 1e-9;
/// Conditional entropy (bits) above which a direction counts as noisy.
pub const NOISE_DELTA: f64 = 1e-9;

/// Every row and every column holds exactly one entry within `tol` of 1,
/// with all others within `tol` of 0.
pub fn is_permutation(m: &StochasticMatrix, tol: f64) -> bool {
    let n = m.dim();
    let mut col_ones = vec![0usize; n];
    for r in 0..n {
        let mut row_ones = 0;
        for (c, &v) in m.row(r).iter().enumerate() {
            if (v - 1.0).abs() <= tol {
                row_ones += 1;
                col_ones[c] += 1;
            } else if v.abs() > tol {
                return false;
            }
        }
        if row_ones != 1 {
            return false;
        }
    }
    col_ones.iter().all(|&c| c == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    /// Permutation pipeline whose composition is the identity.
    FullyConsistent,
    /// Permutation pipeline that scrambles referents: maximal I, σ < 1.
    MaxInfoReferentialLoss,
    /// `H(input | output) > δ`.
    Noisy,
    /// Noiseless within `NOISE_DELTA` without every stage passing the
    /// permutation test. With a full-support world an exactly noiseless
    /// pipeline is always a permutation pipeline, so this only shows up in
    /// the gap between the two tolerances.
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witnesses {
    pub coder_is_permutation: bool,
    pub channel_is_permutation: bool,
    pub decoder_is_permutation: bool,
    pub condition_p_eq_lq_transposed: bool,
}

impl Witnesses {
    pub fn all_permutations(&self) -> bool {
        self.coder_is_permutation && self.channel_is_permutation && self.decoder_is_permutation
    }

    pub fn named(&self) -> [(&'static str, bool); 4] {
        [
            ("coder_is_permutation", self.coder_is_permutation),
            ("channel_is_permutation", self.channel_is_permutation),
            ("decoder_is_permutation", self.decoder_is_permutation),
            ("condition_P_eq_LQ_transposed", self.condition_p_eq_lq_transposed),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub kind: Kind,
    pub sigma: f64,
    pub is_noiseless: bool,
    /// `H(input | output)` in bits.
    pub physical_noise: f64,
    pub witnesses: Witnesses,
}

fn witnesses(system: &CommSystem, direction: Direction) -> Witnesses {
    let (from, to) = system.endpoints(direction);
    let coder = from.coder();
    let decoder = to.decoder();
    let channel = system.channel();
    let lq = channel
        .product(decoder, Role::Composite)
        .expect("system dimensions validated at construction");
    let n = system.dim();
    let transposed = (0..n).all(|i| (0..n).all(|j| (coder.get(i, j) - lq.get(j, i)).abs() <= PERMUTATION_TOL));
    Witnesses {
        coder_is_permutation: is_permutation(coder, PERMUTATION_TOL),
        channel_is_permutation: is_permutation(channel, PERMUTATION_TOL),
        decoder_is_permutation: is_permutation(decoder, PERMUTATION_TOL),
        condition_p_eq_lq_transposed: transposed,
    }
}

/// All three stages are permutations and `P = (Λ·Q)ᵀ`, i.e. the end-to-end
/// map is the identity.
pub fn check_full_consistency(system: &CommSystem, direction: Direction) -> bool {
    let w = witnesses(system, direction);
    w.all_permutations() && w.condition_p_eq_lq_transposed
}

pub fn classify(system: &CommSystem, direction: Direction) -> Classification {
    let w = witnesses(system, direction);
    let j = joint_matrix(system, direction);
    let physical_noise = conditional_entropy(&j, Conditioning::GivenOutput);
    let is_noiseless = physical_noise <= NOISE_DELTA;
    let kind = if !is_noiseless {
        Kind::Noisy
    } else if w.all_permutations() {
        if w.condition_p_eq_lq_transposed {
            Kind::FullyConsistent
        } else {
            Kind::MaxInfoReferentialLoss
        }
    } else {
        Kind::Other
    };
    Classification {
        kind,
        sigma: referential_parameter(&j),
        is_noiseless,
        physical_noise,
        witnesses: w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::directed_report;
    use crate::sample;
    use crate::system::{Agent, Distribution, Label};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sys(p: StochasticMatrix, ch: StochasticMatrix, q: StochasticMatrix) -> CommSystem {
        let a = Agent::new("v", p.clone(), q.clone()).unwrap();
        let b = Agent::new("u", p, q).unwrap();
        CommSystem::new(Distribution::uniform(a.dim(), Label::World).unwrap(), a, b, ch).unwrap()
    }

    fn id(r: Role) -> StochasticMatrix {
        StochasticMatrix::identity(2, r)
    }

    fn swap(r: Role) -> StochasticMatrix {
        StochasticMatrix::permutation(&[1, 0], r).unwrap()
    }

    #[test]
    fn permutation_detection() {
        assert!(is_permutation(&id(Role::Coder), 1e-9));
        assert!(is_permutation(&swap(Role::Coder), 1e-9));
        let half = StochasticMatrix::new(vec![vec![0.5, 0.5], vec![0.0, 1.0]], Role::Coder).unwrap();
        assert!(!is_permutation(&half, 1e-9));
        // both rows hit column 0: row-wise fine, column-wise not
        let merge = StochasticMatrix::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]], Role::Coder).unwrap();
        assert!(!is_permutation(&merge, 1e-9));
    }

    #[test]
    fn full_consistency_cases() {
        let fwd = Direction::SenderToReceiver;
        assert!(check_full_consistency(&sys(id(Role::Coder), id(Role::Channel), id(Role::Decoder)), fwd));
        assert!(!check_full_consistency(&sys(id(Role::Coder), id(Role::Channel), swap(Role::Decoder)), fwd));
        let bsc = StochasticMatrix::binary_symmetric(0.1).unwrap();
        assert!(!check_full_consistency(&sys(id(Role::Coder), bsc, id(Role::Decoder)), fwd));
        // swap ∘ swap ∘ identity: consistent even though nothing is the identity
        assert!(check_full_consistency(&sys(swap(Role::Coder), swap(Role::Channel), id(Role::Decoder)), fwd));
    }

    #[test]
    fn classify_cases() {
        let fwd = Direction::SenderToReceiver;
        let c1 = classify(&sys(id(Role::Coder), id(Role::Channel), swap(Role::Decoder)), fwd);
        assert_eq!(c1.kind, Kind::MaxInfoReferentialLoss);
        assert_eq!(c1.sigma, 0.0);
        let c2 = classify(&sys(id(Role::Coder), id(Role::Channel), id(Role::Decoder)), fwd);
        assert_eq!(c2.kind, Kind::FullyConsistent);
        assert_eq!(c2.sigma, 1.0);
        let bsc = StochasticMatrix::binary_symmetric(0.1).unwrap();
        let c3 = classify(&sys(id(Role::Coder), bsc, id(Role::Decoder)), fwd);
        assert_eq!(c3.kind, Kind::Noisy);
        assert!((c3.sigma - 0.706).abs() < 1e-3);
        assert!(!c3.is_noiseless);
    }

    #[test]
    fn merging_deterministic_map_is_noisy() {
        // m_2 and m_3 share signal s_3; the decoder cannot tell them apart
        let p = StochasticMatrix::new(
            vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]],
            Role::Coder,
        )
        .unwrap();
        let q = StochasticMatrix::new(
            vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            Role::Decoder,
        )
        .unwrap();
        let c = classify(&sys(p, StochasticMatrix::identity(3, Role::Channel), q), Direction::SenderToReceiver);
        assert_eq!(c.kind, Kind::Noisy);
        assert!(!c.witnesses.coder_is_permutation);
    }

    #[test]
    fn classification_agrees_with_measures_on_permutation_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..7 {
            let s = sample::consistent_permutation_system(n, &mut rng);
            let c = classify(&s, Direction::SenderToReceiver);
            assert_eq!(c.kind, Kind::FullyConsistent);
            let r = directed_report(&s, Direction::SenderToReceiver);
            assert!((r.consistent_info - r.mutual_info).abs() < 1e-9);
            assert!((r.mutual_info - r.h_input).abs() < 1e-9);
        }
    }
}
