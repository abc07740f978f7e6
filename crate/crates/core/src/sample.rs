//! Seeded generators for random systems, used by the evolution initializer
//! and by the property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::system::{Agent, CommSystem, Distribution, Label, Role, StochasticMatrix};

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

pub fn random_agent<R: Rng + ?Sized>(id: impl Into<String>, n: usize, rng: &mut R) -> Agent {
    Agent::new(
        id,
        StochasticMatrix::random(n, Role::Coder, rng),
        StochasticMatrix::random(n, Role::Decoder, rng),
    )
    .expect("random matrices share a dimension")
}

/// Random world, agents and channel, all with dense flat-Dirichlet rows.
pub fn random_system<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CommSystem {
    let world = Distribution::random(n, Label::World, rng).expect("n >= 1");
    let sender = random_agent("v", n, rng);
    let receiver = random_agent("u", n, rng);
    let channel = StochasticMatrix::random(n, Role::Channel, rng);
    CommSystem::new(world, sender, receiver, channel).expect("dimensions agree")
}

/// Random world with permutation coder and channel, and the receiver decoder
/// chosen to undo them, so the forward end-to-end map is the identity.
pub fn consistent_permutation_system<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CommSystem {
    let world = Distribution::random(n, Label::World, rng).expect("n >= 1");
    let p = random_permutation(n, rng);
    let l = random_permutation(n, rng);
    // referent i -> signal l[p[i]]; the decoder maps it back to i.
    let mut q = vec![0; n];
    for i in 0..n {
        q[l[p[i]]] = i;
    }
    let coder = StochasticMatrix::permutation(&p, Role::Coder).unwrap();
    let decoder = StochasticMatrix::permutation(&q, Role::Decoder).unwrap();
    let channel = StochasticMatrix::permutation(&l, Role::Channel).unwrap();
    let agent = Agent::new("v", coder, decoder).unwrap();
    let mut other = agent.clone();
    other.id = "u".into();
    CommSystem::new(world, agent, other, channel).unwrap()
}

/// Channel `(1 − noise)·Π + noise·R` for a random permutation `Π` and a random
/// stochastic `R`. Every entry of the noise part is strictly positive.
pub fn noisy_channel<R: Rng + ?Sized>(n: usize, noise: f64, rng: &mut R) -> StochasticMatrix {
    let perm = StochasticMatrix::permutation(&random_permutation(n, rng), Role::Channel).unwrap();
    let mix = StochasticMatrix::random(n, Role::Channel, rng);
    let rows = perm
        .rows()
        .zip(mix.rows())
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (1.0 - noise) * x + noise * y).collect())
        .collect();
    StochasticMatrix::normalized(rows, Role::Channel).unwrap()
}

/// Random system whose channel carries at least `min_noise` mixing weight.
/// Agents are permutation codes or dense random matrices with equal odds.
pub fn noisy_system<R: Rng + ?Sized>(n: usize, min_noise: f64, rng: &mut R) -> CommSystem {
    let world = Distribution::random(n, Label::World, rng).expect("n >= 1");
    let noise = rng.gen_range(min_noise..=1.0);
    let channel = noisy_channel(n, noise, rng);
    let agent = |id: &str, rng: &mut R| {
        if rng.gen_bool(0.5) {
            Agent::new(
                id,
                StochasticMatrix::permutation(&random_permutation(n, rng), Role::Coder).unwrap(),
                StochasticMatrix::permutation(&random_permutation(n, rng), Role::Decoder).unwrap(),
            )
            .unwrap()
        } else {
            random_agent(id, n, rng)
        }
    };
    let sender = agent("v", rng);
    let receiver = agent("u", rng);
    CommSystem::new(world, sender, receiver, channel).unwrap()
}

/// All `n!` permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                extend(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Direction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn permutations_enumerated() {
        assert_eq!(all_permutations(3).len(), 6);
        assert_eq!(all_permutations(1), vec![vec![0]]);
        assert_eq!(all_permutations(3)[1], vec![0, 2, 1]);
    }

    #[test]
    fn consistent_system_is_identity_end_to_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..7 {
            let s = consistent_permutation_system(n, &mut rng);
            assert_eq!(s.end_to_end(Direction::SenderToReceiver), StochasticMatrix::identity(n, crate::system::Role::Composite));
        }
    }

    #[test]
    fn noisy_channel_is_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = noisy_channel(4, 0.3, &mut rng);
        for row in ch.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&x| x > 0.0));
        }
    }
}
