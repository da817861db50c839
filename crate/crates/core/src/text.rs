//! Packing text into two-bit message units.
//!
//! Each UTF-8 byte becomes four codes, most significant bit pair first; the
//! first bit of a pair is `k`, the second `l`.

use crate::bell::PauliCode;

pub fn text_to_codes(text: &str) -> Vec<PauliCode> {
    text.bytes()
        .flat_map(|byte| {
            (0..4)
                .rev()
                .map(move |i| PauliCode::from_index(((byte >> (2 * i)) & 0b11) as usize))
        })
        .collect()
}

/// Reassembles bytes from complete groups of four codes; a trailing partial
/// group is dropped. Invalid UTF-8 is replaced lossily.
pub fn codes_to_text(codes: &[PauliCode]) -> String {
    let bytes: Vec<u8> = codes
        .chunks_exact(4)
        .map(|c| {
            c.iter()
                .fold(0u8, |acc, code| (acc << 2) | code.index() as u8)
        })
        .collect();
    String::from_utf8_lossy(&bytes).into_owned()
}
