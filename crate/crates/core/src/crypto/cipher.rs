use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::chaos::{argsort, invert_permutation, logistic_sequence, quantize, ChaosKey};
use super::dna::{dna_decode, dna_encode, dna_xor};
use crate::error::{Error, Result};
use crate::graph::{build_knn_graph, shift_operator, ShiftKind, WeightScheme};
use crate::imaging::{to_byte, ByteImage};
use crate::linalg::CVec;
use crate::spectral::{
    gft_basis, type_ii_invertibility, FractionalOperator, OrderVector, SpectralBasis,
    TransformKind, DISTINCTNESS_TOL,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const KEY_VERSION: u32 = 1;
pub const DEFAULT_GROUP_SIZE: usize = 64;
/// Neighbours per node of each group graph.
pub const GROUP_KNN: usize = 4;

fn bad_key(msg: impl Into<String>) -> Error {
    Error::InvalidKey(msg.into())
}

/// Secret material for [`encrypt_image`]. `chaos[0..3]` drive the per-channel
/// permutation and DNA mask, `chaos[3]` the grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CipherKey {
    pub version: u32,
    pub kind: TransformKind,
    pub dna_rule: u8,
    pub group_size: usize,
    pub chaos: [ChaosKey; 4],
    pub orders: OrderVector,
}

impl CipherKey {
    /// Random valid key. Orders are drawn from `[0.1, 1)`, constant for GFRFT.
    pub fn generate(kind: TransformKind, group_size: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chaos_key = |rng: &mut ChaCha8Rng| loop {
            let x0: f64 = rng.random_range(0.01..0.99);
            if (x0 - 0.5).abs() > 1e-3 {
                let eta = rng.random_range(3.9..4.0);
                return ChaosKey::new(x0, eta);
            }
        };
        let chaos = [chaos_key(&mut rng)?, chaos_key(&mut rng)?, chaos_key(&mut rng)?, chaos_key(&mut rng)?];
        let dna_rule = rng.random_range(1..=8u8);
        let orders = match kind {
            TransformKind::Gfrft => OrderVector::constant(group_size, rng.random_range(0.1..1.0)),
            _ => OrderVector::new((0..group_size).map(|_| rng.random_range(0.1..1.0)).collect())?,
        };
        let key = CipherKey { version: KEY_VERSION, kind, dna_rule, group_size, chaos, orders };
        key.validate()?;
        Ok(key)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != KEY_VERSION {
            return Err(bad_key(format!("unsupported key version {}", self.version)));
        }
        if !(1..=8).contains(&self.dna_rule) {
            return Err(bad_key(format!("DNA rule must be 1..=8, got {}", self.dna_rule)));
        }
        if self.group_size <= GROUP_KNN {
            return Err(bad_key(format!("group size must exceed {GROUP_KNN}, got {}", self.group_size)));
        }
        if self.orders.len() != self.group_size {
            return Err(bad_key(format!(
                "{} orders for group size {}",
                self.orders.len(),
                self.group_size
            )));
        }
        if self.kind == TransformKind::Gfrft && !self.orders.is_constant() {
            return Err(bad_key("a GFRFT key needs a constant order vector"));
        }
        for c in &self.chaos {
            c.validate().map_err(|e| bad_key(e.to_string()))?;
        }
        Ok(())
    }

    /// Same key with another order vector, as used for decryption with `b`.
    pub fn with_orders(&self, orders: OrderVector) -> Self {
        CipherKey { orders, ..self.clone() }
    }

    /// Compact JSON in field order; numbers use the shortest representation
    /// that parses back to the same double.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("key serializes")
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), lowercase hex.
    pub fn fingerprint(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("key serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let key: CipherKey = serde_json::from_str(text).map_err(|e| bad_key(e.to_string()))?;
        key.validate()?;
        Ok(key)
    }
}

/// Encrypted image: one complex vector per group, in storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    pub width: usize,
    pub height: usize,
    pub padding: usize,
    pub group_size: usize,
    pub groups: Vec<CVec>,
    /// Fingerprint of the encrypting key; not stored in the binary format.
    pub key_fingerprint: Option<String>,
}

impl Ciphertext {
    pub fn stream_len(&self) -> usize {
        3 * self.width * self.height + self.padding
    }

    pub fn stream(&self) -> impl Iterator<Item = &Complex64> {
        self.groups.iter().flat_map(|g| g.iter())
    }
}

/// Grouping permutation and per-group bases for one image size and key.
/// Depends only on the size, the group size and the grouping chaos key.
#[derive(Debug, Clone)]
pub struct GroupLayout {
    pub width: usize,
    pub height: usize,
    pub group_size: usize,
    pub padding: usize,
    /// Storage position `i` holds flattened element `order[i]`.
    pub order: Vec<usize>,
    pub bases: Vec<Arc<SpectralBasis>>,
}

/// Chaotic grouping of the zero-padded flattened image: storage position
/// `i` holds flattened element `order[i]`.
pub fn grouping_order(width: usize, height: usize, key: &CipherKey) -> Result<Vec<usize>> {
    let padded = (3 * width * height).div_ceil(key.group_size) * key.group_size;
    Ok(argsort(&logistic_sequence(&key.chaos[3], padded)?))
}

impl GroupLayout {
    pub fn new(width: usize, height: usize, key: &CipherKey) -> Result<Self> {
        key.validate()?;
        if width == 0 || height == 0 {
            return Err(bad_key("image has no pixels"));
        }
        let g = key.group_size;
        let total = 3 * width * height;
        let padded = total.div_ceil(g) * g;
        let order = grouping_order(width, height, key)?;
        let build = |chunk: &[usize]| -> Result<Arc<SpectralBasis>> {
            // Flattened element e sits at pixel e / 3, channel e % 3; padding
            // continues the raster past the last row.
            let points: Vec<Vec<f64>> = chunk
                .iter()
                .map(|&e| {
                    let p = e / 3;
                    vec![(p % width) as f64, (p / width) as f64, (e % 3) as f64]
                })
                .collect();
            let graph = build_knn_graph(&points, GROUP_KNN, true, WeightScheme::default())?;
            Ok(Arc::new(gft_basis(&shift_operator(&graph, ShiftKind::Laplacian), DISTINCTNESS_TOL)?))
        };
        #[cfg(feature = "parallel")]
        let bases: Result<Vec<_>> = order.par_chunks(g).map(build).collect();
        #[cfg(not(feature = "parallel"))]
        let bases: Result<Vec<_>> = order.chunks(g).map(build).collect();
        Ok(GroupLayout { width, height, group_size: g, padding: padded - total, order, bases: bases? })
    }

    fn matches(&self, width: usize, height: usize, key: &CipherKey) -> Result<()> {
        if self.width != width || self.height != height || self.group_size != key.group_size {
            return Err(bad_key("layout was built for another image size or group size"));
        }
        Ok(())
    }

    fn operator(&self, g: usize, key: &CipherKey) -> Result<FractionalOperator> {
        let basis = &self.bases[g];
        if key.kind == TransformKind::MpgfrftII {
            let (ok, min) = type_ii_invertibility(basis, &key.orders)?;
            if !ok {
                return Err(bad_key(format!(
                    "type-II operator of group {g} is singular (min |d| = {min:.3e})"
                )));
            }
        }
        FractionalOperator::new(basis, key.kind, &key.orders)
    }
}

/// Per-channel chaotic permutation and DNA mask.
fn channel_stream(key: &ChaosKey, pixels: usize) -> Result<(Vec<usize>, Vec<u8>)> {
    let seq = logistic_sequence(key, 2 * pixels)?;
    Ok((argsort(&seq[..pixels]), quantize(&seq[pixels..])))
}

fn dna_mask(bytes: &[u8], mask: &[u8], rule: u8) -> Result<Vec<u8>> {
    let s = dna_encode(bytes, rule)?;
    let m = dna_encode(mask, rule)?;
    dna_decode(&dna_xor(&s, &m, rule)?, rule)
}

/// Permutation and DNA diffusion of each channel, merged back into
/// interleaved RGB order.
pub fn confuse(img: &ByteImage, key: &CipherKey) -> Result<Vec<u8>> {
    let p = img.pixel_count();
    let mut flat = vec![0u8; 3 * p];
    for c in 0..3 {
        let (perm, mask) = channel_stream(&key.chaos[c], p)?;
        let permuted: Vec<u8> = perm.iter().map(|&i| img.data[3 * i + c]).collect();
        for (i, v) in dna_mask(&permuted, &mask, key.dna_rule)?.into_iter().enumerate() {
            flat[3 * i + c] = v;
        }
    }
    Ok(flat)
}

/// Inverse of [`confuse`].
pub fn unconfuse(flat: &[u8], width: usize, height: usize, key: &CipherKey) -> Result<ByteImage> {
    let p = width * height;
    let mut data = vec![0u8; 3 * p];
    for c in 0..3 {
        let (perm, mask) = channel_stream(&key.chaos[c], p)?;
        let diffused: Vec<u8> = (0..p).map(|i| flat[3 * i + c]).collect();
        let permuted = dna_mask(&diffused, &mask, key.dna_rule)?;
        for (i, &src) in perm.iter().enumerate() {
            data[3 * src + c] = permuted[i];
        }
    }
    ByteImage::new(width, height, 3, data)
}

fn require_rgb(img: &ByteImage) -> Result<()> {
    if img.channels != 3 {
        return Err(crate::error::invalid("encryption expects an RGB image"));
    }
    Ok(())
}

pub fn encrypt_image(img: &ByteImage, key: &CipherKey) -> Result<Ciphertext> {
    require_rgb(img)?;
    let layout = GroupLayout::new(img.width, img.height, key)?;
    encrypt_with_layout(img, key, &layout)
}

pub fn encrypt_with_layout(img: &ByteImage, key: &CipherKey, layout: &GroupLayout) -> Result<Ciphertext> {
    require_rgb(img)?;
    key.validate()?;
    layout.matches(img.width, img.height, key)?;
    let mut flat = confuse(img, key)?;
    flat.resize(flat.len() + layout.padding, 0);
    let g = key.group_size;
    let work = |(gi, chunk): (usize, &[usize])| -> Result<CVec> {
        let x = CVec::from_iterator(g, chunk.iter().map(|&e| Complex64::new(flat[e] as f64, 0.0)));
        layout.operator(gi, key)?.apply(&x)
    };
    #[cfg(feature = "parallel")]
    let groups: Result<Vec<CVec>> = layout.order.par_chunks(g).enumerate().map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let groups: Result<Vec<CVec>> = layout.order.chunks(g).enumerate().map(work).collect();
    Ok(Ciphertext {
        width: img.width,
        height: img.height,
        padding: layout.padding,
        group_size: g,
        groups: groups?,
        key_fingerprint: Some(key.fingerprint()),
    })
}

pub fn decrypt_image(ct: &Ciphertext, key: &CipherKey) -> Result<ByteImage> {
    let layout = GroupLayout::new(ct.width, ct.height, key)?;
    decrypt_with_layout(ct, key, &layout)
}

/// Inverse transform of every group with `key.orders`, rounded to bytes,
/// then the DNA and permutation stages are undone.
pub fn decrypt_with_layout(ct: &Ciphertext, key: &CipherKey, layout: &GroupLayout) -> Result<ByteImage> {
    key.validate()?;
    layout.matches(ct.width, ct.height, key)?;
    if ct.group_size != key.group_size
        || ct.padding != layout.padding
        || ct.groups.len() * ct.group_size != ct.stream_len()
        || ct.groups.iter().any(|v| v.len() != ct.group_size)
    {
        return Err(Error::MalformedCiphertext("group structure does not match the key".into()));
    }
    let work = |(gi, y): (usize, &CVec)| -> Result<CVec> {
        let op = layout.operator(gi, key)?;
        op.inverse_apply(y).map_err(|e| match e {
            Error::NotInvertible { min_abs_diag } => {
                bad_key(format!("decryption operator of group {gi} is singular ({min_abs_diag:.3e})"))
            }
            other => other,
        })
    };
    #[cfg(feature = "parallel")]
    let plain: Result<Vec<CVec>> = ct.groups.par_iter().enumerate().map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let plain: Result<Vec<CVec>> = ct.groups.iter().enumerate().map(work).collect();
    let mut flat = vec![0u8; ct.stream_len()];
    for (&e, v) in layout.order.iter().zip(plain?.iter().flat_map(|g| g.iter())) {
        flat[e] = to_byte(v.re);
    }
    flat.truncate(3 * ct.width * ct.height);
    unconfuse(&flat, ct.width, ct.height, key)
}

/// Lossy cipher image. Each coefficient magnitude is drawn at the pixel
/// of the element that occupied its storage slot, and the whole image is
/// scaled by its largest magnitude. Padding slots are dropped.
pub fn magnitude_image(ct: &Ciphertext, key: &CipherKey) -> Result<ByteImage> {
    if ct.group_size != key.group_size {
        return Err(bad_key("group size differs from the ciphertext"));
    }
    let n = 3 * ct.width * ct.height;
    let order = grouping_order(ct.width, ct.height, key)?;
    let mut mags = vec![0.0; n];
    for (&e, c) in order.iter().zip(ct.stream()) {
        if e < n {
            mags[e] = c.norm();
        }
    }
    let max = mags.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    ByteImage::new(ct.width, ct.height, 3, mags.iter().map(|m| to_byte(m * scale)).collect())
}

/// Inverse grouping, exposed for checks on the layout.
pub fn storage_positions(layout: &GroupLayout) -> Vec<usize> {
    invert_permutation(&layout.order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{random_rgb, synthetic_rgb};
    use crate::linalg::norm2;

    #[test]
    fn round_trip_both_kinds() {
        let img = random_rgb(8, 8, 3);
        for (i, kind) in [TransformKind::MpgfrftI, TransformKind::MpgfrftII, TransformKind::Gfrft].into_iter().enumerate() {
            let key = CipherKey::generate(kind, 64, 10 + i as u64).unwrap();
            let ct = encrypt_image(&img, &key).unwrap();
            assert_eq!(ct.groups.len(), 3);
            assert_eq!(decrypt_image(&ct, &key).unwrap(), img);
        }
    }

    #[test]
    fn padding_is_handled() {
        let img = synthetic_rgb(5, 3);
        let key = CipherKey::generate(TransformKind::MpgfrftI, 16, 1).unwrap();
        let ct = encrypt_image(&img, &key).unwrap();
        assert_eq!(ct.padding, 48 - 45);
        assert_eq!(decrypt_image(&ct, &key).unwrap(), img);
    }

    #[test]
    fn confusion_alone_round_trips_and_scrambles() {
        let img = synthetic_rgb(16, 16);
        let key = CipherKey::generate(TransformKind::MpgfrftI, 64, 2).unwrap();
        let flat = confuse(&img, &key).unwrap();
        assert_ne!(flat, img.data);
        assert_eq!(unconfuse(&flat, 16, 16, &key).unwrap(), img);
    }

    #[test]
    fn type_i_groups_preserve_energy() {
        let img = random_rgb(8, 8, 4);
        let key = CipherKey::generate(TransformKind::MpgfrftI, 64, 5).unwrap();
        let layout = GroupLayout::new(8, 8, &key).unwrap();
        let ct = encrypt_with_layout(&img, &key, &layout).unwrap();
        let flat = confuse(&img, &key).unwrap();
        for (chunk, y) in layout.order.chunks(64).zip(&ct.groups) {
            let e: f64 = chunk.iter().map(|&i| (flat[i] as f64).powi(2)).sum::<f64>().sqrt();
            assert!((norm2(y) - e).abs() < 1e-8 * e.max(1.0));
        }
    }

    #[test]
    fn key_json_and_fingerprint() {
        let key = CipherKey::generate(TransformKind::MpgfrftII, 64, 9).unwrap();
        let back = CipherKey::from_json(&key.to_json_pretty()).unwrap();
        assert_eq!(back, key);
        assert_eq!(back.fingerprint(), key.fingerprint());
        assert_eq!(key.fingerprint().len(), 64);
        let other = key.with_orders(key.orders.offset(1e-12));
        assert_ne!(other.fingerprint(), key.fingerprint());
        let v: serde_json::Value = serde_json::from_str(&key.canonical_json()).unwrap();
        let fields: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(fields.len(), 6);
        assert!(CipherKey::from_json("{\"version\": 1}").is_err());
        let mut bad = key.clone();
        bad.dna_rule = 9;
        assert!(matches!(bad.validate(), Err(Error::InvalidKey(_))));
    }

    #[test]
    fn wrong_channel_key_breaks_that_channel() {
        let img = synthetic_rgb(16, 16);
        let key = CipherKey::generate(TransformKind::MpgfrftI, 64, 11).unwrap();
        let ct = encrypt_image(&img, &key).unwrap();
        let mut wrong = key.clone();
        wrong.chaos[0].x0 += 1e-10;
        let out = decrypt_image(&ct, &wrong).unwrap();
        let err: f64 = (0..256).map(|p| (out.data[3 * p] as f64 - img.data[3 * p] as f64).abs()).sum::<f64>() / 256.0;
        assert!(err > 30.0, "mean abs error {err}");
        assert!((0..256).all(|p| out.data[3 * p + 1] == img.data[3 * p + 1]));
    }
}
