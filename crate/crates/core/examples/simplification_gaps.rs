// Rate lost by using `k` of the `N` relays per layer, with the matching
// upper bound at high and low source power.

use af_secrecy::gap::{asymptotic_constants, gaps};
use af_secrecy::{EcgalNetwork, NetworkParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for p_s in [1e8, 1e-8] {
        let diamond = EcgalNetwork::diamond(8, 1.0, 2.0, 1.0, p_s, 1e6, 1.0)?;
        for k in [1, 4] {
            let r = gaps(&diamond, k)?;
            let b = r.bound.expect("secure network has a bound");
            println!(
                "diamond N=8 k={k} P_s={p_s:e}: cases {}/{}  add {:.4e}  mul {:?}  {} = {:.4}  holds {:?}",
                r.case_n,
                r.case_k,
                r.additive_gap,
                r.multiplicative_gap,
                b.id,
                b.value,
                b.holds()
            );
        }
    }
    let deep = EcgalNetwork::new(NetworkParams {
        layers: 3,
        relays: 8,
        h_s: 1.0,
        h_mid: vec![1.0, 2.0],
        h_t: 4.0,
        h_e: 2.0,
        p_s: 1e8,
        p: 1.0,
        sigma2: 1.0,
    })?;
    let (a, b) = asymptotic_constants(&deep)?;
    let r = gaps(&deep, 2)?;
    println!(
        "L=3: a = {a}, b = {b}; gap {:.4} vs {:?} (regime ok: {})",
        r.additive_gap,
        r.bound.map(|b| (b.id.as_str(), b.value)),
        r.regime_ok
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("gap example");
}
