use crate::error::{invalid, Error, Result};

/// Base for each 2-bit code `00, 01, 10, 11` under rules 1 to 8. Every rule
/// maps complementary bases (A/T, C/G) to complementary codes.
const RULES: [[u8; 4]; 8] = [
    *b"ACGT", *b"AGCT", *b"CATG", *b"GATC", *b"CTAG", *b"GTAC", *b"TCGA", *b"TGCA",
];

fn table(rule: u8) -> Result<&'static [u8; 4]> {
    match rule {
        1..=8 => Ok(&RULES[rule as usize - 1]),
        _ => Err(invalid(format!("DNA rule must be 1..=8, got {rule}"))),
    }
}

fn code_of(table: &[u8; 4], base: u8) -> Result<u8> {
    table
        .iter()
        .position(|&b| b == base)
        .map(|p| p as u8)
        .ok_or_else(|| Error::MalformedCiphertext(format!("invalid DNA base {:?}", base as char)))
}

/// Four bases per byte, most significant bit pair first.
pub fn dna_encode(bytes: &[u8], rule: u8) -> Result<String> {
    let t = table(rule)?;
    let mut out = Vec::with_capacity(bytes.len() * 4);
    for &b in bytes {
        for shift in [6, 4, 2, 0] {
            out.push(t[((b >> shift) & 3) as usize]);
        }
    }
    Ok(String::from_utf8(out).expect("bases are ASCII"))
}

pub fn dna_decode(bases: &str, rule: u8) -> Result<Vec<u8>> {
    let t = table(rule)?;
    let raw = bases.as_bytes();
    if raw.len() % 4 != 0 {
        return Err(Error::MalformedCiphertext(format!(
            "DNA length {} is not a multiple of 4",
            raw.len()
        )));
    }
    raw.chunks_exact(4)
        .map(|q| {
            q.iter().try_fold(0u8, |acc, &b| Ok((acc << 2) | code_of(t, b)?))
        })
        .collect()
}

/// Base-wise XOR of the 2-bit codes under `rule`.
pub fn dna_xor(s1: &str, s2: &str, rule: u8) -> Result<String> {
    let t = table(rule)?;
    if s1.len() != s2.len() {
        return Err(invalid("DNA sequences differ in length"));
    }
    let out: Result<Vec<u8>> = s1
        .bytes()
        .zip(s2.bytes())
        .map(|(a, b)| Ok(t[(code_of(t, a)? ^ code_of(t, b)?) as usize]))
        .collect();
    Ok(String::from_utf8(out?).expect("bases are ASCII"))
}
