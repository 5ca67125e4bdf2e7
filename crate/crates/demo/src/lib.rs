//! Browser bindings for three operations: transforming a graph signal,
//! compressing it, and encrypting a small image. Results cross the boundary
//! as JSON strings or RGB byte vectors.

use std::sync::Arc;

use mpgfrft::compression::{compress_adapted, compress_spectral};
use mpgfrft::crypto::{decrypt_image, encrypt_image, magnitude_image, CipherKey, Ciphertext};
use mpgfrft::graph::{shift_operator, GraphDescriptor, ShiftKind};
use mpgfrft::imaging::ByteImage;
use mpgfrft::linalg::{random_signal, CVec};
use mpgfrft::spectral::{gft_basis, multipliers, FractionalOperator, OrderVector, SpectralBasis, TransformKind, DISTINCTNESS_TOL};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn basis(graph: &str, n: usize, seed: u64) -> mpgfrft::Result<Arc<SpectralBasis>> {
    let desc = GraphDescriptor { n, kind: graph.into(), seed: Some(seed), k: None, weight_scheme: None };
    let g = desc.build()?;
    Ok(Arc::new(gft_basis(&shift_operator(&g, ShiftKind::Laplacian), DISTINCTNESS_TOL)?))
}

fn parse_orders(text: &str) -> Result<Vec<f64>, JsError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| js_err(format!("'{s}' is not a number"))))
        .collect()
}

fn re(v: &CVec) -> Vec<f64> {
    v.iter().map(|c| c.re).collect()
}

fn im(v: &CVec) -> Vec<f64> {
    v.iter().map(|c| c.im).collect()
}

/// Applies the transform of `kind` ("gfrft", "mpgfrft-i" or "mpgfrft-ii")
/// with `orders` (comma separated block values) to a seeded random signal
/// on a `graph` of `n` nodes.
#[wasm_bindgen]
pub fn transform_signal(graph: &str, n: usize, kind: &str, orders: &str, seed: u32) -> Result<String, JsError> {
    let kind: TransformKind = kind.parse().map_err(js_err)?;
    let values = parse_orders(orders)?;
    if values.is_empty() {
        return Err(js_err("need at least one order value"));
    }
    let seed = seed as u64;
    let basis = basis(graph, n, seed).map_err(js_err)?;
    let a = match kind {
        TransformKind::Gfrft => OrderVector::constant(n, values[0]),
        _ => OrderVector::blocks(n, &values).map_err(js_err)?,
    };
    let op = FractionalOperator::new(&basis, kind, &a).map_err(js_err)?;
    let x = random_signal(n, seed);
    let y = op.apply(&x).map_err(js_err)?;
    let back = op.inverse_apply(&y).map_err(js_err)?;
    let m = multipliers(&basis, kind, &a).map_err(js_err)?;
    Ok(json!({
        "orders": a.as_slice(),
        "signal": re(&x),
        "re": re(&y),
        "im": im(&y),
        "multiplier_abs": m.iter().map(|c| c.norm()).collect::<Vec<_>>(),
        "inverse_error": (&back - &x).camax(),
        "conditioning_warning": op.conditioning_warning(),
    })
    .to_string())
}

/// Keeps a fraction `ratio` of the coefficients of a seeded random signal,
/// once in the graph Fourier basis and once in the signal-adapted basis.
#[wasm_bindgen]
pub fn compress_signal(graph: &str, n: usize, ratio: f64, seed: u32) -> Result<String, JsError> {
    let seed = seed as u64;
    let basis = basis(graph, n, seed).map_err(js_err)?;
    let x = random_signal(n, seed);
    let gft = multipliers(&basis, TransformKind::MpgfrftI, &OrderVector::constant(n, 1.0)).map_err(js_err)?;
    let (gft_rec, gft_rep) = compress_spectral(&basis, &gft, &x, ratio).map_err(js_err)?;
    let (ad_rec, ad_rep) = compress_adapted(&x, ratio, seed).map_err(js_err)?;
    Ok(json!({
        "signal": re(&x),
        "gft": { "reconstruction": re(&gft_rec), "report": gft_rep },
        "adapted": { "reconstruction": re(&ad_rec), "report": ad_rep },
    })
    .to_string())
}

/// An RGB image encrypted under a generated key.
#[wasm_bindgen]
pub struct CipherSession {
    key: CipherKey,
    ct: Ciphertext,
}

#[wasm_bindgen]
impl CipherSession {
    /// `rgb` holds `3 * width * height` bytes, row major.
    #[wasm_bindgen(constructor)]
    pub fn new(width: usize, height: usize, rgb: Vec<u8>, kind: &str, group_size: usize, seed: u32) -> Result<CipherSession, JsError> {
        let kind: TransformKind = kind.parse().map_err(js_err)?;
        let img = ByteImage::new(width, height, 3, rgb).map_err(js_err)?;
        let key = CipherKey::generate(kind, group_size, seed as u64).map_err(js_err)?;
        let ct = encrypt_image(&img, &key).map_err(js_err)?;
        Ok(CipherSession { key, ct })
    }

    /// Coefficient magnitudes as an RGB image.
    pub fn cipher_preview(&self) -> Result<Vec<u8>, JsError> {
        Ok(magnitude_image(&self.ct, &self.key).map_err(js_err)?.data)
    }

    /// Decrypts with every key order shifted by `delta`; 0 recovers the image.
    pub fn decrypt(&self, delta: f64) -> Result<Vec<u8>, JsError> {
        let key = self.key.with_orders(self.key.orders.offset(delta));
        Ok(decrypt_image(&self.ct, &key).map_err(js_err)?.data)
    }

    pub fn fingerprint(&self) -> String {
        self.key.fingerprint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpgfrft::imaging::synthetic_rgb;
    use serde_json::Value;

    #[test]
    fn transform_reports_a_working_inverse() {
        for kind in ["gfrft", "mpgfrft-i", "mpgfrft-ii"] {
            let out: Value = serde_json::from_str(&transform_signal("sensor", 16, kind, "0.7, 0.2, 0.5", 3).unwrap()).unwrap();
            assert_eq!(out["re"].as_array().unwrap().len(), 16);
            assert!(out["inverse_error"].as_f64().unwrap() < 1e-8, "{kind}: {}", out["inverse_error"]);
        }
        let cyc: Value = serde_json::from_str(&transform_signal("cycle", 8, "mpgfrft-i", "1", 0).unwrap()).unwrap();
        for m in cyc["multiplier_abs"].as_array().unwrap() {
            assert!((m.as_f64().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn adapted_basis_beats_the_gft_at_one_coefficient() {
        let out: Value = serde_json::from_str(&compress_signal("sensor", 20, 0.05, 1).unwrap()).unwrap();
        let adapted = out["adapted"]["report"]["re"].as_f64().unwrap();
        let gft = out["gft"]["report"]["re"].as_f64().unwrap();
        assert!(adapted < 1e-10 && gft > 0.1, "{adapted} {gft}");
    }

    #[test]
    fn session_round_trips_and_garbles_off_key() {
        let img = synthetic_rgb(8, 8);
        let s = CipherSession::new(8, 8, img.data.clone(), "mpgfrft-ii", 16, 4).unwrap();
        assert_eq!(s.decrypt(0.0).unwrap(), img.data);
        assert_ne!(s.decrypt(0.2).unwrap(), img.data);
        assert_eq!(s.cipher_preview().unwrap().len(), img.data.len());
        assert_eq!(s.fingerprint().len(), 64);
    }
}
