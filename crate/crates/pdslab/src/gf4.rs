//! Arithmetic of the field GF(4) = {0, 1, w, w+1} where w^2 = w + 1.
//!
//! Elements carry the fixed 2-bit encoding 0 -> 0, 1 -> 1, w -> 2,
//! w+1 -> 3, so addition is XOR of codes. The characters '0', '1',
//! 'w', 'W' name the four elements in every textual format.
//!
//! Multiplication:
//! ```text
//! * | 0  1  w  W
//! --+------------
//! 0 | 0  0  0  0
//! 1 | 0  1  w  W
//! w | 0  w  W  1
//! W | 0  W  1  w
//! ```

use crate::Error;

pub(crate) const MUL: [[u8; 4]; 4] = [
    [0, 0, 0, 0],
    [0, 1, 2, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
];

/// The Frobenius map x -> x^2 on codes.
pub(crate) const SQR: [u8; 4] = [0, 1, 3, 2];

/// Tr(x) = x + x^2 on codes; values land in the prime subfield.
pub(crate) const TRACE: [u8; 4] = [0, 0, 1, 1];

const CHARS: [char; 4] = ['0', '1', 'w', 'W'];

/// An element of GF(4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GF4(u8);

impl GF4 {
    pub const ZERO: GF4 = GF4(0);
    pub const ONE: GF4 = GF4(1);
    pub const OMEGA: GF4 = GF4(2);
    /// w + 1 = w^2.
    pub const OMEGA1: GF4 = GF4(3);

    pub const ALL: [GF4; 4] = [GF4(0), GF4(1), GF4(2), GF4(3)];

    /// Wraps a 2-bit code. Panics on codes >= 4.
    pub fn new(code: u8) -> GF4 {
        assert!(code < 4, "GF4 code out of range: {code}");
        GF4(code)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn square(self) -> GF4 {
        GF4(SQR[self.0 as usize])
    }

    /// Tr(x) = x + x^2, an element of {0, 1}.
    pub fn trace(self) -> GF4 {
        GF4(TRACE[self.0 as usize])
    }

    pub fn trace_bit(self) -> u8 {
        TRACE[self.0 as usize]
    }

    pub fn from_char(c: char) -> Result<GF4, Error> {
        match c {
            '0' => Ok(GF4(0)),
            '1' => Ok(GF4(1)),
            'w' => Ok(GF4(2)),
            'W' => Ok(GF4(3)),
            _ => Err(Error::InvalidLiteral(c.to_string())),
        }
    }

    pub fn to_char(self) -> char {
        CHARS[self.0 as usize]
    }

    /// Parses a string of GF4 characters.
    pub fn parse_vec(s: &str) -> Result<Vec<GF4>, Error> {
        s.chars().map(GF4::from_char).collect()
    }

    pub fn format_vec(v: &[GF4]) -> String {
        v.iter().map(|x| x.to_char()).collect()
    }
}

impl std::ops::Add for GF4 {
    type Output = GF4;
    #[inline]
    fn add(self, rhs: GF4) -> GF4 {
        GF4(self.0 ^ rhs.0)
    }
}

impl std::ops::Mul for GF4 {
    type Output = GF4;
    #[inline]
    fn mul(self, rhs: GF4) -> GF4 {
        GF4(MUL[self.0 as usize][rhs.0 as usize])
    }
}

impl std::fmt::Display for GF4 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_is_xor() {
        assert_eq!(GF4::OMEGA + GF4::OMEGA, GF4::ZERO);
        assert_eq!(GF4::OMEGA + GF4::ONE, GF4::OMEGA1);
        for x in GF4::ALL {
            assert_eq!(GF4::ZERO + x, x);
            assert_eq!(x + x, GF4::ZERO);
        }
        for a in GF4::ALL {
            for b in GF4::ALL {
                assert_eq!(a + b, b + a);
            }
        }
    }

    #[test]
    fn multiplication_table() {
        assert_eq!(GF4::OMEGA * GF4::OMEGA, GF4::OMEGA1);
        assert_eq!(GF4::OMEGA * GF4::OMEGA1, GF4::ONE);
        for x in GF4::ALL {
            assert_eq!(GF4::ZERO * x, GF4::ZERO);
            assert_eq!(GF4::ONE * x, x);
        }
        // associativity and distributivity, exhaustive
        for a in GF4::ALL {
            for b in GF4::ALL {
                assert_eq!(a * b, b * a);
                for c in GF4::ALL {
                    assert_eq!((a * b) * c, a * (b * c));
                    assert_eq!(a * (b + c), a * b + a * c);
                }
            }
        }
    }

    #[test]
    fn fourth_power_is_identity() {
        for a in GF4::ALL {
            assert_eq!(a * (a * a), a * a * a);
            assert_eq!(a * a * a * a, a);
        }
    }

    #[test]
    fn trace_values() {
        assert_eq!(GF4::ZERO.trace(), GF4::ZERO);
        assert_eq!(GF4::ONE.trace(), GF4::ZERO);
        assert_eq!(GF4::OMEGA.trace(), GF4::ONE);
        assert_eq!(GF4::OMEGA1.trace(), GF4::ONE);
        for a in GF4::ALL {
            assert_eq!(a.trace(), a + a.square());
            assert!(a.trace().code() < 2);
            assert_eq!(a.square().trace(), a.trace());
            for b in GF4::ALL {
                assert_eq!((a + b).trace(), a.trace() + b.trace());
            }
        }
    }

    #[test]
    fn squaring_is_an_automorphism_of_order_two() {
        let fixed: Vec<GF4> = GF4::ALL.iter().copied().filter(|a| a.square() == *a).collect();
        assert_eq!(fixed, vec![GF4::ZERO, GF4::ONE]);
        for a in GF4::ALL {
            assert_eq!(a.square().square(), a);
            for b in GF4::ALL {
                assert_eq!((a + b).square(), a.square() + b.square());
                assert_eq!((a * b).square(), a.square() * b.square());
            }
        }
    }

    #[test]
    fn char_roundtrip() {
        for a in GF4::ALL {
            assert_eq!(GF4::from_char(a.to_char()).unwrap(), a);
        }
        assert!(GF4::from_char('x').is_err());
        assert_eq!(GF4::parse_vec("0w1W").unwrap().len(), 4);
        assert_eq!(GF4::format_vec(&GF4::parse_vec("0w1W").unwrap()), "0w1W");
    }
}
