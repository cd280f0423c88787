use std::fmt;

/// Binary word indexing construction nodes; the root is the empty word.
/// Packed into a u64, most significant pushed letter first, so that equal
/// length words compare in lexicographic (= left-to-right interval) order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryWord {
    bits: u64,
    len: u8,
}

pub const MAX_WORD_LEN: u8 = 63;

impl BinaryWord {
    pub fn empty() -> Self {
        BinaryWord { bits: 0, len: 0 }
    }

    pub fn len(&self) -> u32 {
        self.len as u32
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&self, letter: u8) -> Self {
        assert!(letter <= 1, "binary letter");
        assert!(self.len < MAX_WORD_LEN, "word too long");
        BinaryWord {
            bits: (self.bits << 1) | letter as u64,
            len: self.len + 1,
        }
    }

    pub fn parent(&self) -> Option<(BinaryWord, u8)> {
        if self.len == 0 {
            return None;
        }
        let last = (self.bits & 1) as u8;
        Some((
            BinaryWord { bits: self.bits >> 1, len: self.len - 1 },
            last,
        ))
    }

    /// Letter at position i (0 = first letter from the root).
    pub fn letter(&self, i: u32) -> u8 {
        assert!(i < self.len as u32);
        ((self.bits >> (self.len as u32 - 1 - i)) & 1) as u8
    }

    pub fn letters(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len as u32).map(move |i| self.letter(i))
    }

    pub fn repeated(letter: u8, n: u32) -> Self {
        let mut w = BinaryWord::empty();
        for _ in 0..n {
            w = w.push(letter);
        }
        w
    }

    pub fn zeros(n: u32) -> Self {
        Self::repeated(0, n)
    }

    pub fn ones(n: u32) -> Self {
        Self::repeated(1, n)
    }

    pub fn concat(&self, other: &BinaryWord) -> Self {
        assert!(self.len + other.len <= MAX_WORD_LEN, "word too long");
        BinaryWord {
            bits: (self.bits << other.len) | other.bits,
            len: self.len + other.len,
        }
    }

    /// Number of leading letters equal to `letter`.
    pub fn leading(&self, letter: u8) -> u32 {
        let mut n = 0;
        for l in self.letters() {
            if l == letter {
                n += 1;
            } else {
                break;
            }
        }
        n
    }

    /// The suffix after dropping the first n letters.
    pub fn suffix(&self, n: u32) -> BinaryWord {
        assert!(n <= self.len as u32);
        let rem = self.len as u32 - n;
        let mask = if rem == 0 { 0 } else { (1u64 << rem) - 1 };
        BinaryWord { bits: self.bits & mask, len: rem as u8 }
    }

    /// All letters flipped (0 ↔ 1); mirrors the word tree left to right.
    pub fn flipped(&self) -> BinaryWord {
        let mask = if self.len == 0 { 0 } else { (1u64 << self.len) - 1 };
        BinaryWord { bits: (!self.bits) & mask, len: self.len }
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        let mut w = BinaryWord::empty();
        for &l in letters {
            w = w.push(l);
        }
        w
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return write!(f, "e");
        }
        for l in self.letters() {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w({self})")
    }
}
