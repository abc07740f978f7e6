//! Structural invariants of composition and the joint matrix over seeded
//! random systems.

use coninfo::sample;
use coninfo::{
    compose_end_to_end, decoded_distribution, joint_matrix, Direction, Distribution, Label, Role, StochasticMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

#[test]
fn composition_and_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=8);
        let sys = sample::random_system(n, &mut rng);
        for dir in [Direction::SenderToReceiver, Direction::ReceiverToSender] {
            let e = sys.end_to_end(dir);
            let total: f64 = e.rows().flatten().sum();
            assert!((total - n as f64).abs() < TOL);
            StochasticMatrix::new(e.to_rows(), Role::Composite).expect("composition is stochastic");

            let (from, to) = sys.endpoints(dir);
            let manual = compose_end_to_end(from.coder(), sys.channel(), to.decoder()).unwrap();
            for (a, b) in manual.rows().zip(e.rows()) {
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).abs() < 1e-15);
                }
            }

            let j = joint_matrix(&sys, dir);
            let decoded = decoded_distribution(&sys, dir);
            Distribution::new(decoded.probs().to_vec(), Label::Decoded).expect("decoded is a distribution");
            for (a, b) in j.input_marginal().iter().zip(sys.world().probs()) {
                assert!((a - b).abs() < TOL);
            }
            for (a, b) in j.output_marginal().iter().zip(decoded.probs()) {
                assert!((a - b).abs() < TOL);
            }
        }
    }
}
