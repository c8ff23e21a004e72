//! Canonical binary witness encoding.
//!
//! Layout: LEB128 varint `t`, LEB128 varint `|Σ|`, then for each step the
//! left and right operand codes. An operand code is one tag bit
//! (`0` terminal, `1` prior step) followed by an index of
//! `ceil(log2(max(|Σ|, t, 2)))` bits: the alphabet position for terminals,
//! `j - 1` for step `s_j`. Bits are packed most-significant first and the
//! tail is zero-padded to a byte boundary.

use super::plan::{AssemblyPlan, AssemblyStep, Operand};
use super::word::Alphabet;
use crate::error::ModelError;

/// Multiplier on the per-step term in [`witness_bound_bits`].
pub const WITNESS_BOUND_CONSTANT: f64 = 2.0;

fn index_width(t: usize, sigma: usize) -> u32 {
    let m = t.max(sigma).max(2) as u64;
    64 - (m - 1).leading_zeros()
}

fn varint_len(mut v: u64) -> usize {
    let mut n = 1;
    while v >= 0x80 {
        v >>= 7;
        n += 1;
    }
    n
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8 & 0x7f) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn get_varint(bytes: &[u8], pos: &mut usize) -> Result<u64, ModelError> {
    let mut v = 0u64;
    let mut shift = 0;
    loop {
        let b = *bytes
            .get(*pos)
            .ok_or_else(|| ModelError::MalformedWitness("truncated header".into()))?;
        *pos += 1;
        if shift >= 64 {
            return Err(ModelError::MalformedWitness("varint overflow".into()));
        }
        v |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
    }
}

struct BitWriter {
    bytes: Vec<u8>,
    used: u32,
}

impl BitWriter {
    fn push(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            if self.used.is_multiple_of(8) {
                self.bytes.push(0);
            }
            let bit = ((value >> k) & 1) as u8;
            let last = self.bytes.last_mut().expect("pushed above");
            *last |= bit << (7 - self.used % 8);
            self.used += 1;
        }
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    bit: usize,
}

impl BitReader<'_> {
    fn read(&mut self, width: u32) -> Result<u64, ModelError> {
        let mut v = 0u64;
        for _ in 0..width {
            let byte = self
                .bytes
                .get(self.bit / 8)
                .ok_or_else(|| ModelError::MalformedWitness("truncated step data".into()))?;
            v = (v << 1) | u64::from((byte >> (7 - self.bit % 8)) & 1);
            self.bit += 1;
        }
        Ok(v)
    }
}

/// Encodes a validated plan. Terminals are written as alphabet positions.
pub fn encode_witness(plan: &AssemblyPlan) -> Result<Vec<u8>, ModelError> {
    plan.validate()?;
    let t = plan.steps.len();
    let sigma = plan.alphabet.len();
    let width = index_width(t, sigma);
    let mut out = Vec::new();
    put_varint(&mut out, t as u64);
    put_varint(&mut out, sigma as u64);
    let mut bits = BitWriter { bytes: out, used: 0 };
    for step in &plan.steps {
        for op in step.operands() {
            let (tag, index) = match op {
                Operand::Terminal(c) => (0, plan.alphabet.position(c).expect("validated") as u64),
                Operand::Prior(j) => (1, j as u64 - 1),
            };
            bits.push(tag, 1);
            bits.push(index, width);
        }
    }
    Ok(bits.bytes)
}

/// Decodes a witness against `alphabet`, whose size must match the header.
pub fn decode_witness(bytes: &[u8], alphabet: &Alphabet) -> Result<AssemblyPlan, ModelError> {
    let mut pos = 0;
    let t = get_varint(bytes, &mut pos)? as usize;
    let sigma = get_varint(bytes, &mut pos)? as usize;
    if sigma != alphabet.len() {
        return Err(ModelError::MalformedWitness(format!(
            "header declares {sigma} symbols, alphabet has {}",
            alphabet.len()
        )));
    }
    let width = index_width(t, sigma);
    let payload_bits = 2 * t as u128 * (1 + width as u128);
    let expected_bytes = payload_bits.div_ceil(8);
    if (bytes.len() - pos) as u128 != expected_bytes {
        return Err(ModelError::MalformedWitness(format!(
            "expected {expected_bytes} payload bytes, found {}",
            bytes.len() - pos
        )));
    }
    let mut reader = BitReader {
        bytes: &bytes[pos..],
        bit: 0,
    };
    let mut steps = Vec::with_capacity(t);
    for _ in 0..t {
        let mut pair = [Operand::Prior(0); 2];
        for slot in &mut pair {
            let tag = reader.read(1)?;
            let index = reader.read(width)? as usize;
            *slot = if tag == 0 {
                let c = *alphabet.symbols().get(index).ok_or_else(|| {
                    ModelError::MalformedWitness(format!("terminal index {index} out of range"))
                })?;
                Operand::Terminal(c)
            } else {
                Operand::Prior(index + 1)
            };
        }
        steps.push(AssemblyStep::new(pair[0], pair[1]));
    }
    if reader.read((8 - reader.bit % 8) as u32 % 8)? != 0 {
        return Err(ModelError::MalformedWitness("non-zero padding".into()));
    }
    let plan = AssemblyPlan::new(alphabet.clone(), steps);
    plan.validate()?;
    Ok(plan)
}

/// Exact size in bits of the canonical encoding, padding included.
pub fn witness_encoding_size(plan: &AssemblyPlan) -> u64 {
    let t = plan.steps.len();
    let sigma = plan.alphabet.len();
    let header = varint_len(t as u64) + varint_len(sigma as u64);
    let payload_bits = 2 * t as u64 * (1 + u64::from(index_width(t, sigma)));
    8 * (header as u64 + payload_bits.div_ceil(8))
}

/// Documented upper bound on [`witness_encoding_size`]:
/// `c * t * (log2(t + |Σ|) + 2) + header + 7` with `c = 2`.
pub fn witness_bound_bits(t: usize, sigma: usize) -> f64 {
    let header = 8 * (varint_len(t as u64) + varint_len(sigma as u64));
    let per_step = if t == 0 {
        0.0
    } else {
        t as f64 * (((t + sigma) as f64).log2() + 2.0)
    };
    WITNESS_BOUND_CONSTANT * per_step + header as f64 + 7.0
}
