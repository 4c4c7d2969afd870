//! Plain-text network description.
//!
//! ```text
//! # comment
//! L = 2
//! N = 4
//! h_s = 1
//! h_mid = 1.5          # L - 1 comma-separated gains
//! h_t = 2
//! h_e = 1
//! P_s = 1e8
//! P = 1
//! sigma2 = 1
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{EcgalNetwork, NetworkParams};

const KEYS: [&str; 9] = ["L", "N", "h_s", "h_mid", "h_t", "h_e", "P_s", "P", "sigma2"];

fn parse_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn number(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|e| parse_err(key, format!("`{}`: {e}", v.trim())))
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|e| parse_err(key, format!("`{}`: {e}", v.trim())))
}

pub fn parse_network(text: &str) -> Result<EcgalNetwork> {
    let mut entries: BTreeMap<&str, &str> = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("line {}: expected `key = value`", no + 1)))?;
        let key = key.trim();
        let key = KEYS
            .iter()
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| parse_err(key, format!("line {}: unknown key", no + 1)))?;
        if entries.insert(key, value.trim()).is_some() {
            return Err(parse_err(key, format!("line {}: duplicate key", no + 1)));
        }
    }
    let get = |key: &str| {
        entries
            .get(key)
            .copied()
            .ok_or_else(|| Error::MissingKey(key.to_string()))
    };
    let layers = count("L", get("L")?)?;
    let h_mid = match entries.get("h_mid").copied().map(str::trim) {
        None | Some("") => Vec::new(),
        Some(list) => list
            .split(',')
            .map(|v| number("h_mid", v))
            .collect::<Result<Vec<_>>>()?,
    };
    if layers > 1 && !entries.contains_key("h_mid") {
        return Err(Error::MissingKey("h_mid".into()));
    }
    EcgalNetwork::new(NetworkParams {
        layers,
        relays: count("N", get("N")?)?,
        h_s: number("h_s", get("h_s")?)?,
        h_mid,
        h_t: number("h_t", get("h_t")?)?,
        h_e: number("h_e", get("h_e")?)?,
        p_s: number("P_s", get("P_s")?)?,
        p: number("P", get("P")?)?,
        sigma2: number("sigma2", get("sigma2")?)?,
    })
}

pub fn read_network(path: &Path) -> Result<EcgalNetwork> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_network(&text)
}

/// Serialises a network so that [`parse_network`] reproduces it exactly.
pub fn format_network(net: &EcgalNetwork) -> String {
    let p = net.params();
    let mid = p
        .h_mid
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "L = {}\nN = {}\nh_s = {:?}\nh_mid = {mid}\nh_t = {:?}\nh_e = {:?}\nP_s = {:?}\nP = {:?}\nsigma2 = {:?}\n",
        p.layers, p.relays, p.h_s, p.h_t, p.h_e, p.p_s, p.p, p.sigma2
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAMOND: &str = "# GLB fixture\nL = 1\nN = 1\nh_s = 1\nh_t = 2\nh_e = 1\nP_s = 1\nP = 10 # relay power\nsigma2 = 1\n";

    #[test]
    fn parses_and_round_trips() {
        let net = parse_network(DIAMOND).unwrap();
        assert_eq!(net.relay_power(), 10.0);
        assert!(net.h_mid().is_empty());
        assert_eq!(parse_network(&format_network(&net)).unwrap(), net);

        let deep = EcgalNetwork::new(NetworkParams {
            layers: 3,
            relays: 5,
            h_s: 0.1 + 0.2,
            h_mid: vec![1.0 / 3.0, 2.5e-7],
            h_t: 4.0,
            h_e: 1e300,
            p_s: 1e-8,
            p: 0.01,
            sigma2: 7.0,
        })
        .unwrap();
        assert_eq!(parse_network(&format_network(&deep)).unwrap(), deep);
    }

    #[test]
    fn reports_offending_key() {
        let missing = DIAMOND.replace("sigma2 = 1\n", "");
        assert_eq!(parse_network(&missing), Err(Error::MissingKey("sigma2".into())));
        let bad = DIAMOND.replace("h_t = 2", "h_t = two");
        assert!(matches!(parse_network(&bad), Err(Error::Parse { key, .. }) if key == "h_t"));
        let dup = format!("{DIAMOND}h_e = 3\n");
        assert!(matches!(parse_network(&dup), Err(Error::Parse { key, .. }) if key == "h_e"));
        let unknown = format!("{DIAMOND}gain = 3\n");
        assert!(matches!(parse_network(&unknown), Err(Error::Parse { key, .. }) if key == "gain"));
        let deep = DIAMOND.replace("L = 1", "L = 2");
        assert_eq!(parse_network(&deep), Err(Error::MissingKey("h_mid".into())));
        let wrong_len = DIAMOND.replace("L = 1", "L = 3\nh_mid = 1");
        assert!(matches!(parse_network(&wrong_len), Err(Error::InvalidNetwork(_))));
    }
}
