use entroflow::flow::{FlowSystem, State};
use entroflow::geodesics::{self, SolveMethod};
use entroflow::markov::Grid;
use entroflow::means::Density;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn rough_pairs() {
    let sys = FlowSystem::heat(Grid::new(8).unwrap(), Density::Boltzmann).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut shooting = 0;
    for pair in 0..10 {
        let a = State::sample(9, &mut rng);
        let b = State::sample(9, &mut rng);
        match geodesics::verify_displacement_convexity(&sys, &a, &b, 0.0, 256) {
            Ok(r) => {
                if r.method == SolveMethod::Shooting { shooting += 1; }
                println!("pair {pair}: method {:?} chord_ok {} diff_ok {} formula_ok {} speed_var {:.2e} min a {:.4} min b {:.4}",
                    r.method, r.chord_ok, r.differential_ok, r.formula_ok, r.speed_variation,
                    a.iter().cloned().fold(f64::INFINITY, f64::min),
                    b.iter().cloned().fold(f64::INFINITY, f64::min));
            }
            Err(e) => println!("pair {pair}: FAILED {e}"),
        }
    }
    println!("shooting succeeded on {shooting}/10");
}
