// Brute-force check of the closed form: a refined grid over the feasible
// set never beats the solver by more than its own resolution.

use af_secrecy::oracle::{grid_search, GridSpec};
use af_secrecy::{optimal_rate, EcgalNetwork, NetworkParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let diamond = EcgalNetwork::diamond(3, 0.8, 2.5, 1.1, 2.0, 0.7, 1.3)?;
    let layered = EcgalNetwork::new(NetworkParams {
        layers: 2,
        relays: 2,
        h_s: 1.0,
        h_mid: vec![1.4],
        h_t: 2.0,
        h_e: 0.9,
        p_s: 5.0,
        p: 1.0,
        sigma2: 1.0,
    })?;
    for (name, net, symmetric) in [("diamond", &diamond, false), ("two-layer", &layered, true)] {
        let spec = GridSpec::new(32, 3, symmetric)?;
        let m = net.relays();
        let grid = grid_search(net, m, &spec)?;
        let closed = optimal_rate(net, m)?.rate_bits;
        println!(
            "{name}: solver {closed:.9}  grid {:.9}  eps_grid {:.2e}  evaluations {}  spread {:?}",
            grid.rate.rate_bits,
            grid.epsilon_grid,
            grid.evaluations,
            grid.within_layer_spread()
        );
        assert!(closed >= grid.rate.rate_bits - grid.epsilon_grid);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("grid oracle example");
}
