//! Exact positions in `[0, 1)`.
//!
//! Partial sums such as `1 - 2^-m` stop being distinguishable in `f64` long
//! before `m = 64`, so points of `T` are kept as binary fractions with 128
//! fractional bits. Cell membership in the 4-adic partition is then a shift,
//! and differences between points are exact before they are rounded to `f64`.

use serde::{Serialize, Serializer};

/// Deepest 4-adic level addressable with 128 fractional bits.
pub const MAX_LEVEL: u32 = 64;

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;
const TWO_POW_NEG_128: f64 = 1.0 / TWO_POW_128;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(u128);

impl Position {
    pub const ZERO: Position = Position(0);

    pub const fn from_bits(bits: u128) -> Self {
        Position(bits)
    }

    pub const fn bits(self) -> u128 {
        self.0
    }

    /// Truncating conversion; `None` outside `[0, 1)`.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !(0.0..1.0).contains(&x) {
            return None;
        }
        Some(Position((x * TWO_POW_128) as u128))
    }

    /// Nearest `f64` not above the exact value, so the result stays below 1.
    pub fn to_f64(self) -> f64 {
        let width = 128 - self.0.leading_zeros();
        let kept = if width > 53 {
            self.0 & !((1u128 << (width - 53)) - 1)
        } else {
            self.0
        };
        kept as f64 * TWO_POW_NEG_128
    }

    /// `|self - other|`, exact until the final rounding.
    pub fn distance(self, other: Position) -> f64 {
        bits_to_f64(self.0.abs_diff(other.0))
    }

    pub fn checked_add(self, other: Position) -> Option<Position> {
        self.0.checked_add(other.0).map(Position)
    }

    /// Index `i` of the level-`level` cell `[i 4^-k, (i+1) 4^-k)` holding the point.
    pub fn cell_index(self, level: u32) -> u128 {
        assert!(level <= MAX_LEVEL, "level {level} exceeds {MAX_LEVEL}");
        if level == 0 {
            0
        } else {
            self.0 >> (128 - 2 * level)
        }
    }

    /// Distance from the left endpoint of the enclosing level-`level` cell.
    pub fn offset_in_cell(self, level: u32) -> f64 {
        assert!(level <= MAX_LEVEL, "level {level} exceeds {MAX_LEVEL}");
        if level == 0 {
            return bits_to_f64(self.0);
        }
        let shift = 128 - 2 * level;
        if shift == 0 {
            0.0
        } else {
            bits_to_f64(self.0 & ((1u128 << shift) - 1))
        }
    }

    /// Left endpoint of cell `index` at `level`, if it lies in `[0, 1)`.
    pub fn cell_left(level: u32, index: u128) -> Option<Position> {
        assert!(level <= MAX_LEVEL, "level {level} exceeds {MAX_LEVEL}");
        if level == 0 {
            return (index == 0).then_some(Position::ZERO);
        }
        let shift = 128 - 2 * level;
        if 2 * level < 128 && index >> (2 * level) != 0 {
            return None;
        }
        Some(Position(index << shift))
    }
}

fn bits_to_f64(bits: u128) -> f64 {
    bits as f64 * TWO_POW_NEG_128
}

/// `4^-level`, exact.
pub fn cell_width(level: u32) -> f64 {
    0.25f64.powi(level as i32)
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_dyadic_values() {
        for x in [0.0, 0.25, 0.5, 0.75, 1.0 - f64::EPSILON / 2.0] {
            assert_eq!(Position::from_f64(x).unwrap().to_f64(), x);
        }
        assert!(Position::from_f64(1.0).is_none());
        assert!(Position::from_f64(-0.0).is_some());
        assert!(Position::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn cells_and_offsets() {
        let p = Position::from_f64(0.3).unwrap();
        assert_eq!(p.cell_index(0), 0);
        assert_eq!(p.cell_index(1), 1);
        assert_eq!(p.cell_index(2), 4);
        assert!((p.offset_in_cell(1) - 0.05).abs() < 1e-16);
        assert_eq!(
            Position::from_bits(u128::MAX).cell_index(MAX_LEVEL),
            u128::MAX
        );
        assert_eq!(
            Position::from_bits(u128::MAX).offset_in_cell(MAX_LEVEL),
            0.0
        );
        assert_eq!(Position::cell_left(1, 3).unwrap().to_f64(), 0.75);
        assert!(Position::cell_left(1, 4).is_none());
    }

    #[test]
    fn tiny_gaps_near_one_survive() {
        let a = Position::from_bits(u128::MAX - (1u128 << 64));
        let b = Position::from_bits(u128::MAX);
        assert!(a < b);
        assert_eq!(a.distance(b), 2f64.powi(-64));
        assert!(b.to_f64() < 1.0);
    }
}
