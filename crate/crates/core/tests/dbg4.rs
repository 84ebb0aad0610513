use entroflow::flow::{FlowSystem, State};
use entroflow::geodesics;
use entroflow::markov::Grid;
use entroflow::means::Density;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn probe_pair5() {
    let sys = FlowSystem::heat(Grid::new(8).unwrap(), Density::Boltzmann).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut a = State::uniform(9);
    let mut b = State::uniform(9);
    for k in 0..=5 {
        a = State::sample(9, &mut rng);
        b = State::sample(9, &mut rng);
        if k == 5 { break; }
    }
    println!("a = {:?}", &a[..]);
    println!("b = {:?}", &b[..]);
    // try shooting with various tolerances to see residual path
    for tol in [1e-8, 1e-6, 1e-4] {
        match geodesics::shoot(&sys, &a, &b, tol) {
            Ok(p) => println!("tol {tol:.0e}: OK method {:?} action {:.6} residual {:.3e}", p.method, p.action, p.boundary_residual),
            Err(e) => println!("tol {tol:.0e}: {e}"),
        }
    }
}
