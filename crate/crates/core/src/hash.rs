//! Prefix-sliced XOR hash family `h(x) = Ax ⊕ b` over GF(2).
//!
//! A single `h` drawn from `H(n, n)` generates the whole chain
//! `h^(1), …, h^(n)`: the m-th prefix slice keeps the first `m` output
//! coordinates. Cells `h^(m)⁻¹(α^(m))` are therefore nested in `m`.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Largest dimension for which [`enumerate_family`] is allowed.
pub const MAX_ENUMERABLE_DIM: usize = 4;

/// Fixed-length bit vector packed into 64-bit words.
///
/// Bit `i` lives at position `i % 64` of word `i / 64`. Bits past `len`
/// are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(WORD)], len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Low `len` bits of `value`; `len` must be at most 64.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value & low_mask(len);
        }
        v
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Option<Self> {
        let bits: Option<Vec<bool>> = s
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        bits.map(|b| Self::from_bools(&b))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The packed value, if the vector fits in one word.
    pub fn as_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Inner product over GF(2). Lengths must match.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot product of unequal lengths");
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        ones & 1 == 1
    }

    /// First `m` bits.
    pub fn prefix(&self, m: usize) -> BitVec {
        assert!(m <= self.len);
        let mut out = Self::zeros(m);
        for (dst, src) in out.words.iter_mut().zip(&self.words) {
            *dst = *src;
        }
        if !m.is_multiple_of(WORD) {
            if let Some(last) = out.words.last_mut() {
                *last &= low_mask(m % WORD);
            }
        }
        out
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

#[inline]
fn low_mask(bits: usize) -> u64 {
    if bits >= WORD {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A cell selector: the first `m` bits of `alpha`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellRef {
    pub alpha: BitVec,
    pub m: usize,
}

impl CellRef {
    pub fn new(alpha: BitVec, m: usize) -> Result<Self> {
        if m > alpha.len() {
            return Err(Error::Contract(format!("prefix length {m} exceeds hash dimension {}", alpha.len())));
        }
        Ok(Self { alpha, m })
    }
}

/// An affine map `x ↦ Ax ⊕ b` on `{0,1}^n`, used through its prefix slices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct XorHash {
    rows: Vec<BitVec>,
    offset: BitVec,
    n: usize,
}

impl XorHash {
    pub fn new(rows: Vec<BitVec>, offset: BitVec) -> Result<Self> {
        let n = offset.len();
        if n == 0 {
            return Err(Error::Contract("hash dimension must be positive".into()));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Contract(format!("hash matrix must be {n}x{n} to match the offset")));
        }
        Ok(Self { rows, offset, n })
    }

    /// `A = I`, `b = offset`.
    pub fn identity(offset: BitVec) -> Self {
        let n = offset.len();
        let rows = (0..n)
            .map(|i| {
                let mut r = BitVec::zeros(n);
                r.set(i, true);
                r
            })
            .collect();
        Self { rows, offset, n }
    }

    /// Draws every bit of `A` and `b` independently and uniformly.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1, "hash dimension must be positive");
        let draw = |rng: &mut R| {
            let mut v = BitVec::zeros(n);
            for (w, word) in v.words.iter_mut().enumerate() {
                let bits = (n - w * WORD).min(WORD);
                *word = rng.gen::<u64>() & low_mask(bits);
            }
            v
        };
        let rows = (0..n).map(|_| draw(rng)).collect();
        let offset = draw(rng);
        Self { rows, offset, n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn offset(&self) -> &BitVec {
        &self.offset
    }

    /// First `m` coordinates of `Ax ⊕ b`.
    pub fn prefix_apply(&self, m: usize, x: &BitVec) -> Result<BitVec> {
        if m > self.n {
            return Err(Error::Contract(format!("prefix length {m} exceeds hash dimension {}", self.n)));
        }
        if x.len() != self.n {
            return Err(Error::Contract(format!("input has {} bits, hash expects {}", x.len(), self.n)));
        }
        let mut out = BitVec::zeros(m);
        for i in 0..m {
            out.set(i, self.rows[i].dot(x) ^ self.offset.get(i));
        }
        Ok(out)
    }

    /// Packed `h^(m)(x)` for `n ≤ 64`; coordinate `i` is bit `i`.
    #[inline]
    pub fn prefix_value_u64(&self, m: usize, x: u64) -> u64 {
        debug_assert!(self.n <= WORD && m <= self.n);
        let b = self.offset.words[0];
        let mut out = 0u64;
        for (i, row) in self.rows[..m].iter().enumerate() {
            let bit = ((row.words[0] & x).count_ones() as u64 & 1) ^ ((b >> i) & 1);
            out |= bit << i;
        }
        out
    }

    pub fn cell_contains(&self, cell: &CellRef, x: &BitVec) -> bool {
        match self.prefix_apply(cell.m, x) {
            Ok(v) => v == cell.alpha.prefix(cell.m),
            Err(_) => false,
        }
    }

    /// Debug dump: one `0/1` string per row of `A`, then `b` after a `|`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for row in &self.rows {
            s.push_str(&row.to_string());
            s.push('\n');
        }
        s.push('|');
        s.push_str(&self.offset.to_string());
        s
    }

    /// Inverse of [`XorHash::dump`].
    pub fn from_dump(text: &str) -> Result<Self> {
        let bad = || Error::Contract("malformed hash dump".into());
        let mut rows = Vec::new();
        let mut offset = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('|') {
                offset = Some(BitVec::parse(rest).ok_or_else(bad)?);
            } else {
                rows.push(BitVec::parse(line).ok_or_else(bad)?);
            }
        }
        Self::new(rows, offset.ok_or_else(bad)?)
    }
}

/// Number of `(A, b, α)` triples in the family of dimension `n`.
pub fn family_size(n: usize) -> u64 {
    1u64 << (n * n + 2 * n)
}

/// Decodes member `index` of the enumeration order used by [`enumerate_family`].
///
/// Bits `0..n²` fill `A` row-major, the next `n` fill `b`, the last `n` fill `α`.
pub fn family_member(n: usize, index: u64) -> (XorHash, BitVec) {
    debug_assert!(n <= MAX_ENUMERABLE_DIM && index < family_size(n));
    let mask = low_mask(n);
    let rows = (0..n).map(|i| BitVec::from_u64(index >> (i * n), n)).collect();
    let offset = BitVec::from_u64((index >> (n * n)) & mask, n);
    let alpha = BitVec::from_u64((index >> (n * n + n)) & mask, n);
    (XorHash { rows, offset, n }, alpha)
}

/// Every `(h, α)` with `h ∈ H(n, n)` and `α ∈ {0,1}^n`, each exactly once.
pub fn enumerate_family(n: usize) -> Result<impl Iterator<Item = (XorHash, BitVec)>> {
    if n == 0 || n > MAX_ENUMERABLE_DIM {
        return Err(Error::FamilyTooLarge { n, max: MAX_ENUMERABLE_DIM });
    }
    Ok((0..family_size(n)).map(move |i| family_member(n, i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn bits(s: &str) -> BitVec {
        BitVec::parse(s).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let a = XorHash::sample(1, &mut ChaCha8Rng::seed_from_u64(11));
        let b = XorHash::sample(1, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
        let h = XorHash::sample(3, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(h.rows().len(), 3);
        assert!(h.rows().iter().all(|r| r.len() == 3));
        assert_eq!(h.offset().len(), 3);
    }

    #[test]
    fn matrix_bits_are_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut ones = [0u32; 4];
        let samples = 10_000;
        for _ in 0..samples {
            let h = XorHash::sample(2, &mut rng);
            for (k, slot) in ones.iter_mut().enumerate() {
                *slot += h.rows()[k / 2].get(k % 2) as u32;
            }
        }
        for c in ones {
            let freq = c as f64 / samples as f64;
            assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn prefix_apply_examples() {
        let id = XorHash::identity(BitVec::zeros(2));
        assert_eq!(id.prefix_apply(1, &bits("01")).unwrap(), bits("0"));
        let shifted = XorHash::identity(bits("11"));
        assert_eq!(shifted.prefix_apply(2, &bits("01")).unwrap(), bits("10"));
        assert!(id.prefix_apply(0, &bits("11")).unwrap().is_empty());
        assert!(id.prefix_apply(3, &bits("11")).is_err());
    }

    #[test]
    fn cell_contains_examples() {
        let id = XorHash::identity(BitVec::zeros(2));
        let cell = CellRef::new(bits("00"), 1).unwrap();
        assert!(id.cell_contains(&cell, &bits("01")));
        assert!(!id.cell_contains(&cell, &bits("11")));
        let whole = CellRef::new(bits("10"), 0).unwrap();
        for x in ["00", "01", "10", "11"] {
            assert!(id.cell_contains(&whole, &bits(x)));
        }
        assert!(CellRef::new(bits("10"), 3).is_err());
    }

    #[test]
    fn family_sizes() {
        assert_eq!(enumerate_family(1).unwrap().count(), 8);
        assert_eq!(enumerate_family(2).unwrap().count(), 256);
        assert!(matches!(enumerate_family(5).map(|_| ()), Err(Error::FamilyTooLarge { n: 5, .. })));
    }

    #[test]
    fn family_members_are_distinct() {
        let seen: HashSet<String> = enumerate_family(2).unwrap().map(|(h, a)| format!("{}#{}", h.dump(), a)).collect();
        assert_eq!(seen.len(), 256);
    }

    #[test]
    fn fast_path_matches_general_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=10 {
            let h = XorHash::sample(n, &mut rng);
            for x in 0..(1u64 << n).min(64) {
                for m in 0..=n {
                    let slow = h.prefix_apply(m, &BitVec::from_u64(x, n)).unwrap();
                    assert_eq!(slow.as_u64().unwrap(), h.prefix_value_u64(m, x));
                }
            }
        }
    }

    #[test]
    fn dump_round_trips() {
        let h = XorHash::sample(4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(XorHash::from_dump(&h.dump()).unwrap(), h);
    }

    #[test]
    fn wide_vectors() {
        let mut v = BitVec::zeros(130);
        v.set(129, true);
        v.set(3, true);
        assert_eq!(v.prefix(100).iter().filter(|b| *b).count(), 1);
        assert!(!v.dot(&v));
        assert_eq!(v.to_string().len(), 130);
    }
}
