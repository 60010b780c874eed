//! Packed bit sequences with an exact bit length.
//!
//! Bit `i` lives in byte `i / 8` at bit position `i % 8`, least-significant
//! position first. Pad bits past `len()` in the final byte are always zero,
//! which lets the word-level helpers below read past the end without masking.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[inline]
fn low_mask(count: usize) -> u64 {
    if count >= 64 {
        u64::MAX
    } else {
        (1u64 << count) - 1
    }
}

/// A packed, immutable-once-built sequence of bits.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSequence {
    data: Vec<u8>,
    nbits: usize,
}

impl BitSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nbits: usize) -> Self {
        Self {
            data: Vec::with_capacity(nbits.div_ceil(8)),
            nbits: 0,
        }
    }

    /// Wraps whole bytes; the bit length is `8 * data.len()`.
    pub fn from_bytes(data: Vec<u8>) -> Self {
        let nbits = data.len() * 8;
        Self { data, nbits }
    }

    /// Wraps bytes holding `nbits` valid bits. Surplus bytes are dropped and
    /// pad bits are cleared.
    pub fn from_bytes_with_len(mut data: Vec<u8>, nbits: usize) -> Result<Self> {
        let available = data.len() * 8;
        if nbits > available {
            return Err(Error::InvalidParameter(format!(
                "bit count {nbits} exceeds the {available} bits available"
            )));
        }
        data.truncate(nbits.div_ceil(8));
        let mut seq = Self { data, nbits };
        seq.clear_padding();
        Ok(seq)
    }

    /// Parses `'0'`/`'1'` characters. Line breaks are skipped.
    pub fn parse_ascii(text: &str) -> Result<Self> {
        let mut seq = Self::with_capacity(text.len());
        for (pos, ch) in text.char_indices() {
            match ch {
                '0' => seq.push(false),
                '1' => seq.push(true),
                '\n' | '\r' => {}
                other => {
                    return Err(Error::Format(format!(
                        "unexpected character {other:?} at byte offset {pos}"
                    )))
                }
            }
        }
        Ok(seq)
    }

    pub fn to_ascii(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nbits
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nbits == 0
    }

    /// The packed bytes, pad bits zero.
    #[inline]
    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, index: usize) -> Option<bool> {
        (index < self.nbits).then(|| self.data[index / 8] >> (index % 8) & 1 == 1)
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let offset = self.nbits % 8;
        if offset == 0 {
            self.data.push(0);
        }
        if bit {
            *self.data.last_mut().unwrap() |= 1 << offset;
        }
        self.nbits += 1;
    }

    /// Appends the low `count` bits of `word`, lowest first.
    pub fn push_word(&mut self, word: u64, count: usize) {
        debug_assert!(count <= 64);
        let mut word = word & low_mask(count);
        let mut remaining = count;
        let offset = self.nbits % 8;
        if offset != 0 && remaining > 0 {
            let take = remaining.min(8 - offset);
            *self.data.last_mut().unwrap() |= ((word & low_mask(take)) << offset) as u8;
            word = if take == 64 { 0 } else { word >> take };
            remaining -= take;
            self.nbits += take;
        }
        while remaining > 0 {
            let take = remaining.min(8);
            self.data.push((word & low_mask(take)) as u8);
            word >>= take;
            remaining -= take;
            self.nbits += take;
        }
    }

    /// Appends all bits of `other`. Works for any alignment of `self`.
    pub fn extend_from(&mut self, other: &BitSequence) {
        if self.nbits.is_multiple_of(8) {
            self.data.extend_from_slice(&other.data);
            self.nbits += other.nbits;
            return;
        }
        self.data.reserve(other.data.len() + 1);
        let mut pos = 0;
        while pos < other.nbits {
            let take = (other.nbits - pos).min(64);
            self.push_word(other.word_at(pos), take);
            pos += take;
        }
    }

    /// Shortens the sequence to `nbits` bits; no-op if already shorter.
    pub fn truncate(&mut self, nbits: usize) {
        if nbits >= self.nbits {
            return;
        }
        self.nbits = nbits;
        self.data.truncate(nbits.div_ceil(8));
        self.clear_padding();
    }

    /// Copies out `len` bits starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> BitSequence {
        assert!(
            start + len <= self.nbits,
            "slice {start}..{} out of range for {} bits",
            start + len,
            self.nbits
        );
        let mut out = BitSequence::with_capacity(len);
        let mut pos = 0;
        while pos < len {
            let take = (len - pos).min(64);
            out.push_word(self.word_at(start + pos), take);
            pos += take;
        }
        out
    }

    /// Splits into consecutive pieces of at most `chunk_bits` bits.
    pub fn chunks(&self, chunk_bits: usize) -> Vec<BitSequence> {
        assert!(chunk_bits > 0, "chunk size must be positive");
        (0..self.nbits)
            .step_by(chunk_bits)
            .map(|start| self.slice(start, chunk_bits.min(self.nbits - start)))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.nbits).map(move |i| self.data[i / 8] >> (i % 8) & 1 == 1)
    }

    /// The 64 bits starting at bit `offset`, bit `offset` in position 0.
    /// Positions past the end read as zero.
    #[inline]
    pub fn word_at(&self, offset: usize) -> u64 {
        let byte = offset / 8;
        let shift = offset % 8;
        let mut buf = [0u8; 9];
        if byte < self.data.len() {
            let end = (byte + 9).min(self.data.len());
            buf[..end - byte].copy_from_slice(&self.data[byte..end]);
        }
        let lo = u64::from_le_bytes(buf[..8].try_into().unwrap());
        if shift == 0 {
            lo
        } else {
            (lo >> shift) | ((buf[8] as u64) << (64 - shift))
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.data.iter().map(|b| b.count_ones() as u64).sum()
    }

    /// Number of ones among bits `start .. start + len`.
    pub fn count_ones_in(&self, start: usize, len: usize) -> u64 {
        let mut total = 0;
        let mut pos = 0;
        while pos < len {
            let take = (len - pos).min(64);
            total += (self.word_at(start + pos) & low_mask(take)).count_ones() as u64;
            pos += take;
        }
        total
    }

    /// `sum_{i < len} x[start + i] * x[start + lag + i]`.
    pub fn count_coincident(&self, start: usize, lag: usize, len: usize) -> u64 {
        let mut total = 0;
        let mut pos = 0;
        while pos < len {
            let take = (len - pos).min(64);
            let a = self.word_at(start + pos);
            let b = self.word_at(start + lag + pos);
            total += (a & b & low_mask(take)).count_ones() as u64;
            pos += take;
        }
        total
    }

    fn clear_padding(&mut self) {
        let used = self.nbits % 8;
        if used != 0 {
            if let Some(last) = self.data.last_mut() {
                *last &= (1u8 << used) - 1;
            }
        }
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const PREVIEW: usize = 64;
        let shown: String = self
            .iter()
            .take(PREVIEW)
            .map(|b| if b { '1' } else { '0' })
            .collect();
        let ellipsis = if self.nbits > PREVIEW { "…" } else { "" };
        write!(f, "BitSequence({} bits: {shown}{ellipsis})", self.nbits)
    }
}

impl FromIterator<bool> for BitSequence {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut seq = BitSequence::new();
        for bit in iter {
            seq.push(bit);
        }
        seq
    }
}

/// Bit-level concatenation: the bits of `a` followed by the bits of `b`.
pub fn concat(a: &BitSequence, b: &BitSequence) -> BitSequence {
    let mut out = BitSequence::with_capacity(a.len() + b.len());
    out.extend_from(a);
    out.extend_from(b);
    out
}

pub fn concat_all<'a, I>(parts: I) -> BitSequence
where
    I: IntoIterator<Item = &'a BitSequence>,
{
    let mut out = BitSequence::new();
    for part in parts {
        out.extend_from(part);
    }
    out
}

/// On-disk encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitFormat {
    /// Headerless packed bytes.
    Raw,
    /// One `'0'`/`'1'` character per bit.
    Ascii,
}

impl FromStr for BitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(BitFormat::Raw),
            "ascii" => Ok(BitFormat::Ascii),
            other => Err(Error::InvalidParameter(format!(
                "unknown bit format {other:?} (expected raw or ascii)"
            ))),
        }
    }
}

pub fn write_to<W: Write>(seq: &BitSequence, mut writer: W, format: BitFormat) -> Result<()> {
    match format {
        BitFormat::Raw => writer.write_all(seq.as_bytes())?,
        BitFormat::Ascii => {
            writer.write_all(seq.to_ascii().as_bytes())?;
            writer.write_all(b"\n")?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn write_file(seq: &BitSequence, path: impl AsRef<Path>, format: BitFormat) -> Result<()> {
    let file = fs::File::create(path)?;
    write_to(seq, io::BufWriter::new(file), format)
}

/// Reads a whole stream. With `nbits_override` the result is cut to that many
/// bits, which must not exceed what the input holds.
pub fn read_from<R: Read>(
    mut reader: R,
    format: BitFormat,
    nbits_override: Option<usize>,
) -> Result<BitSequence> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let seq = match format {
        BitFormat::Raw => BitSequence::from_bytes(bytes),
        BitFormat::Ascii => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|e| Error::Format(format!("ascii bit file is not valid UTF-8: {e}")))?;
            BitSequence::parse_ascii(text)?
        }
    };
    match nbits_override {
        None => Ok(seq),
        Some(n) if n > seq.len() => Err(Error::InvalidParameter(format!(
            "bit count override {n} exceeds the {} bits in the input",
            seq.len()
        ))),
        Some(n) => {
            let mut seq = seq;
            seq.truncate(n);
            Ok(seq)
        }
    }
}

pub fn read_file(
    path: impl AsRef<Path>,
    format: BitFormat,
    nbits_override: Option<usize>,
) -> Result<BitSequence> {
    read_from(fs::File::open(path)?, format, nbits_override)
}
