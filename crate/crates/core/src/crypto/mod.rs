//! Image encryption: chaotic permutation and DNA diffusion per channel,
//! followed by a fractional transform of pseudo-randomly grouped values.

pub mod analysis;
pub mod chaos;
pub mod cipher;
pub mod dna;
pub mod format;

pub use analysis::{adjacent_correlation, gfrft_brute_force, sensitivity_sweep, Correlation, Direction};
pub use chaos::{chaotic_permutation, logistic_sequence, ChaosKey};
pub use cipher::{
    decrypt_image, decrypt_with_layout, encrypt_image, encrypt_with_layout, magnitude_image, CipherKey,
    Ciphertext, GroupLayout,
};
pub use dna::{dna_decode, dna_encode, dna_xor};
pub use format::{read_ciphertext, write_ciphertext};
