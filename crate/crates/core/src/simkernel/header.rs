use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rng::RNG_NAME;

/// Reproducibility header carried by every JSON report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub seed: u64,
    pub rng: String,
    pub config_hash: String,
}

impl ReportHeader {
    pub fn new<C: Serialize>(seed: u64, config: &C) -> Self {
        ReportHeader {
            seed,
            rng: RNG_NAME.to_string(),
            config_hash: config_hash(config),
        }
    }
}

/// SHA-256 of the config's canonical JSON encoding, hex.
pub fn config_hash<C: Serialize>(config: &C) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes to JSON");
    hex::encode(Sha256::digest(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Cfg {
        n: u32,
        loss: f64,
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&Cfg { n: 1, loss: 0.1 });
        assert_eq!(a, config_hash(&Cfg { n: 1, loss: 0.1 }));
        assert_ne!(a, config_hash(&Cfg { n: 2, loss: 0.1 }));
        assert_eq!(a.len(), 64);
    }
}
