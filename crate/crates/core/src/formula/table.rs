use super::{submasks, Determination, PartialAssignment};
use crate::error::{Result, SbfeError};

/// Largest `n` for which a full truth table is materialized.
pub const TABLE_CAP: usize = 24;

/// `2^n` outputs packed into 64-bit words; entry `x` is bit `x % 64` of word `x / 64`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    words: Vec<u64>,
}

fn word_count(n: usize) -> usize {
    (1usize << n).div_ceil(64)
}

impl TruthTable {
    pub fn zeros(n: usize) -> Result<Self> {
        if n > TABLE_CAP {
            return Err(SbfeError::SizeExceeded { what: "truth table", n, cap: TABLE_CAP });
        }
        Ok(Self { n, words: vec![0; word_count(n)] })
    }

    /// Panics if `n` exceeds [`TABLE_CAP`].
    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut t = Self::zeros(n).expect("truth table size");
        for x in 0..1usize << n {
            if f(x) {
                t.words[x / 64] |= 1 << (x % 64);
            }
        }
        t
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let n = bits.len().trailing_zeros() as usize;
        if !bits.len().is_power_of_two() {
            return Err(SbfeError::InvalidFormula(format!("truth table length {} is not a power of two", bits.len())));
        }
        let mut t = Self::zeros(n)?;
        for (x, &b) in bits.iter().enumerate() {
            if b {
                t.words[x / 64] |= 1 << (x % 64);
            }
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, x: usize) -> bool {
        self.words[x / 64] >> (x % 64) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len()).map(|x| self.get(x)).collect()
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Scans every completion of the subcube fixed by `pa`.
    pub fn is_determined(&self, pa: &PartialAssignment) -> Determination {
        let full = super::full_mask(self.n);
        let free = !pa.tested() & full;
        let base = pa.values() & full;
        let first = self.get(base as usize);
        for sub in submasks(free) {
            if self.get((base | sub) as usize) != first {
                return Determination::Undetermined;
            }
        }
        Determination::Determined(first)
    }

    /// Same `n`; entry `x` reads the original at `x` with bit `var` forced to `value`.
    pub fn restrict(&self, var: usize, value: bool) -> Self {
        let bit = 1usize << var;
        Self::from_fn(self.n, |x| self.get(if value { x | bit } else { x & !bit }))
    }

    /// Little-endian bytes (entry `x` is bit `x % 8` of byte `x / 8`) as
    /// lowercase hex; tables shorter than a byte are zero-padded.
    pub fn to_hex(&self) -> String {
        let nbytes = self.len().div_ceil(8);
        let mut bytes = Vec::with_capacity(nbytes);
        for i in 0..nbytes {
            bytes.push((self.words[i / 8] >> (8 * (i % 8))) as u8);
        }
        hex::encode(bytes)
    }

    pub fn from_hex(n: usize, s: &str) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        let bytes = hex::decode(s.trim()).map_err(|e| SbfeError::Parse(format!("bits_hex: {e}")))?;
        let nbytes = t.len().div_ceil(8);
        if bytes.len() != nbytes {
            return Err(SbfeError::Parse(format!("bits_hex has {} bytes, expected {nbytes} for n = {n}", bytes.len())));
        }
        for (i, b) in bytes.iter().enumerate() {
            t.words[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        if t.len() < 8 && bytes[0] >> t.len() != 0 {
            return Err(SbfeError::Parse("bits_hex sets bits beyond 2^n".into()));
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn majority3() -> TruthTable {
        TruthTable::from_fn(3, |x| x.count_ones() >= 2)
    }

    #[test]
    fn restrict_majority_gives_or() {
        // Fixing x2 = 1 leaves x0 ∨ x1 on the remaining bits.
        let r = majority3().restrict(2, true);
        for x in 0..8usize {
            assert_eq!(r.get(x), (x & 1 != 0) || (x & 2 != 0));
        }
    }

    #[test]
    fn hex_round_trip_and_layout() {
        let and2 = TruthTable::from_bits(&[false, false, false, true]).unwrap();
        assert_eq!(and2.to_hex(), "08");
        let x0 = TruthTable::from_bits(&[false, true]).unwrap();
        assert_eq!(x0.to_hex(), "02");
        let m = majority3();
        assert_eq!(TruthTable::from_hex(3, &m.to_hex()).unwrap(), m);
        let big = TruthTable::from_fn(7, |x| x % 3 == 0);
        assert_eq!(TruthTable::from_hex(7, &big.to_hex()).unwrap(), big);
        assert!(TruthTable::from_hex(2, "18").is_err());
        assert!(TruthTable::from_hex(3, "0000").is_err());
    }

    #[test]
    fn subcube_scan() {
        let m = majority3();
        let pa = PartialAssignment::empty().with(0, true).with(1, true);
        assert_eq!(m.is_determined(&pa), Determination::Determined(true));
        let pa = PartialAssignment::empty().with(0, true);
        assert_eq!(m.is_determined(&pa), Determination::Undetermined);
    }
}
