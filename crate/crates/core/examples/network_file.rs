// Reading and writing the `key = value` network description.

use af_secrecy::netfile::{format_network, parse_network};

const CONFIG: &str = "\
# two-layer fixture
L = 2
N = 4
h_s = 1
h_mid = 1
h_t = 2
h_e = 1
P_s = 1e8
P = 1
sigma2 = 1
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = parse_network(CONFIG)?;
    let text = format_network(&net);
    print!("{text}");
    assert_eq!(parse_network(&text)?, net);
    match parse_network(&CONFIG.replace("sigma2 = 1\n", "")) {
        Err(e) => println!("without sigma2: {e}"),
        Ok(_) => unreachable!("sigma2 is required"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("network file example");
}
