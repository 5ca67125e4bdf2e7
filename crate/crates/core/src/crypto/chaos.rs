use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_BURN_IN: usize = 1000;
pub const ETA_MIN: f64 = 3.57;
pub const ETA_MAX: f64 = 4.0;

/// Parameters of the logistic map `x_{k+1} = eta x_k (1 - x_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosKey {
    pub x0: f64,
    pub eta: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl ChaosKey {
    pub fn new(x0: f64, eta: f64) -> Result<Self> {
        let k = ChaosKey { x0, eta, burn_in: DEFAULT_BURN_IN };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0 && self.x0 < 1.0) || self.x0 == 0.5 {
            return Err(invalid(format!("x0 must lie in (0, 1) and differ from 0.5, got {}", self.x0)));
        }
        if !(self.eta > ETA_MIN && self.eta <= ETA_MAX) {
            return Err(invalid(format!("eta must lie in ({ETA_MIN}, {ETA_MAX}], got {}", self.eta)));
        }
        Ok(())
    }
}

/// `n` iterates after discarding `burn_in` of them.
pub fn logistic_sequence(key: &ChaosKey, n: usize) -> Result<Vec<f64>> {
    key.validate()?;
    let mut x = key.x0;
    let mut out = Vec::with_capacity(n);
    for i in 0..key.burn_in + n {
        x = key.eta * x * (1.0 - x);
        if x <= 0.0 || x >= 1.0 {
            return Err(Error::DegenerateOrbit(i + 1));
        }
        if i >= key.burn_in {
            out.push(x);
        }
    }
    Ok(out)
}

/// Indices that sort `values` ascending, ties by index.
pub fn argsort(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

pub fn chaotic_permutation(key: &ChaosKey, n: usize) -> Result<Vec<usize>> {
    Ok(argsort(&logistic_sequence(key, n)?))
}

pub fn invert_permutation(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &j in p {
        if j >= p.len() || seen[j] {
            return false;
        }
        seen[j] = true;
    }
    true
}

/// Mask bytes `min(floor(256 x), 255)`.
pub fn quantize(values: &[f64]) -> Vec<u8> {
    values.iter().map(|&x| (x * 256.0).floor().clamp(0.0, 255.0) as u8).collect()
}
