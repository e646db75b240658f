//! Quadratic forms Q_a(x, y) = sum_i (a_i x_i^2 + x_i y_i + y_i^2) on the
//! twisted groups, their signs and level sets.
//!
//! The form is a function of the underlying coordinates only, so one
//! FormSpec evaluates identically over every twist vector. Whether the
//! sign is +1 or -1 is controlled entirely by the coefficient traces.

use crate::bitset::IndexSet;
use crate::gf4::GF4;
use crate::twisted::{GroupContext, TwistedElement};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormSpec {
    coeffs: Vec<GF4>,
}

impl FormSpec {
    pub fn new(coeffs: Vec<GF4>) -> FormSpec {
        FormSpec { coeffs }
    }

    /// Parses a coefficient literal of n characters over {0,1,w,W}.
    pub fn parse(s: &str) -> Result<FormSpec> {
        Ok(FormSpec {
            coeffs: GF4::parse_vec(s)?,
        })
    }

    pub fn coeffs(&self) -> &[GF4] {
        &self.coeffs
    }

    pub fn block_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn literal(&self) -> String {
        GF4::format_vec(&self.coeffs)
    }

    /// s(Q_a) = prod_i (-1)^Tr(a_i).
    pub fn sign(&self) -> i32 {
        let parity: u8 = self
            .coeffs
            .iter()
            .map(|a| a.trace_bit())
            .fold(0, |acc, t| acc ^ t);
        if parity == 0 {
            1
        } else {
            -1
        }
    }

    fn check_dims(&self, ctx: &GroupContext) -> Result<()> {
        if self.coeffs.len() != ctx.block_count() {
            return Err(Error::DimensionMismatch {
                expected: ctx.block_count(),
                got: self.coeffs.len(),
            });
        }
        Ok(())
    }

    /// Per-block lookup of Q_alpha on the 16 block digits.
    fn digit_tables(&self) -> Vec<[u8; 16]> {
        self.coeffs
            .iter()
            .map(|&alpha| {
                let mut t = [0u8; 16];
                for (d, slot) in t.iter_mut().enumerate() {
                    let x = GF4::new((d >> 2) as u8);
                    let y = GF4::new((d & 3) as u8);
                    *slot = (alpha * x.square() + x * y + y.square()).code();
                }
                t
            })
            .collect()
    }

    pub fn eval_idx(&self, ctx: &GroupContext, g: usize) -> Result<GF4> {
        self.check_dims(ctx)?;
        let tables = self.digit_tables();
        Ok(eval_with_tables(&tables, ctx.block_count(), g))
    }

    pub fn eval(&self, ctx: &GroupContext, g: &TwistedElement) -> Result<GF4> {
        let idx = ctx.index_of(g)?;
        self.eval_idx(ctx, idx)
    }

    /// Q values for every element, as GF4 codes.
    pub fn value_table(&self, ctx: &GroupContext) -> Result<Vec<u8>> {
        self.check_dims(ctx)?;
        let tables = self.digit_tables();
        let n = ctx.block_count();
        Ok((0..ctx.order())
            .map(|g| eval_with_tables(&tables, n, g).code())
            .collect())
    }

    /// Elements with Q(g) = value; zero is removed when value = 0.
    pub fn level_set(&self, ctx: &GroupContext, value: GF4) -> Result<IndexSet> {
        let vals = self.value_table(ctx)?;
        let mut set = IndexSet::new(ctx.order());
        for (g, &q) in vals.iter().enumerate() {
            if q == value.code() {
                set.insert(g);
            }
        }
        if value.is_zero() {
            set.remove(0);
        }
        Ok(set)
    }
}

fn eval_with_tables(tables: &[[u8; 16]], n: usize, g: usize) -> GF4 {
    let mut acc = 0u8;
    for (i, t) in tables.iter().enumerate() {
        let d = (g >> (4 * (n - 1 - i))) & 0xF;
        acc ^= t[d];
    }
    GF4::new(acc)
}

impl std::fmt::Display for FormSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.literal())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(bits: &str) -> GroupContext {
        GroupContext::parse(bits).unwrap()
    }

    #[test]
    fn eval_examples() {
        let c = ctx("0");
        let f = FormSpec::parse("0").unwrap();
        let g = c.parse_element("ww").unwrap();
        assert_eq!(f.eval_idx(&c, g).unwrap(), GF4::ZERO);

        let f = FormSpec::parse("w").unwrap();
        let g = c.parse_element("10").unwrap();
        assert_eq!(f.eval_idx(&c, g).unwrap(), GF4::OMEGA);

        for a in ["0", "1", "w", "W"] {
            let f = FormSpec::parse(a).unwrap();
            assert_eq!(f.eval_idx(&c, 0).unwrap(), GF4::ZERO);
        }
    }

    #[test]
    fn eval_is_independent_of_twist() {
        let c0 = ctx("00");
        let c1 = ctx("11");
        let f = FormSpec::parse("w1").unwrap();
        for g in 0..c0.order() {
            assert_eq!(f.eval_idx(&c0, g).unwrap(), f.eval_idx(&c1, g).unwrap());
        }
    }

    #[test]
    fn sign_examples() {
        assert_eq!(FormSpec::parse("0").unwrap().sign(), 1);
        assert_eq!(FormSpec::parse("w").unwrap().sign(), -1);
        assert_eq!(FormSpec::parse("wW").unwrap().sign(), 1);
        assert_eq!(FormSpec::parse("01").unwrap().sign(), 1);
        assert_eq!(FormSpec::parse("0w").unwrap().sign(), -1);
    }

    #[test]
    fn level_set_sizes_single_block() {
        let c = ctx("0");
        let f0 = FormSpec::parse("0").unwrap();
        assert_eq!(f0.level_set(&c, GF4::ZERO).unwrap().count(), 6);
        let fw = FormSpec::parse("w").unwrap();
        assert_eq!(fw.level_set(&c, GF4::ZERO).unwrap().count(), 0);
        assert_eq!(fw.level_set(&c, GF4::ONE).unwrap().count(), 5);
    }

    #[test]
    fn level_set_sizes_match_formulas() {
        // sizes: (4^{n-1}+s)(4^n-s) at level zero, 4^{n-1}(4^n-s) otherwise
        for (bits, a) in [("00", "00"), ("01", "0w"), ("11", "w1"), ("10", "wW")] {
            let c = ctx(bits);
            let f = FormSpec::parse(a).unwrap();
            let n = 2i64;
            let s = f.sign() as i64;
            let p = 4i64.pow((n - 1) as u32);
            let q = 4i64.pow(n as u32);
            let mut total = 0;
            for v in GF4::ALL {
                let size = f.level_set(&c, v).unwrap().count() as i64;
                if v.is_zero() {
                    assert_eq!(size, (p + s) * (q - s));
                } else {
                    assert_eq!(size, p * (q - s));
                }
                total += size;
            }
            assert_eq!(total, c.order() as i64 - 1);
        }
    }

    #[test]
    fn symmetric_under_twisted_negation() {
        for bits in ["0", "1", "01", "11"] {
            let c = ctx(bits);
            for a_lit in ["0", "w"] {
                let a: String = std::iter::repeat(a_lit).take(c.block_count()).collect();
                let f = FormSpec::parse(&a).unwrap();
                for g in 0..c.order() {
                    assert_eq!(
                        f.eval_idx(&c, g).unwrap(),
                        f.eval_idx(&c, c.neg_idx(g)).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn quadratic_form_axioms_on_the_vector_space() {
        // scalar action and the polar form live on plain coordinates,
        // not the twisted law
        let c = ctx("0");
        let scale = |s: GF4, g: usize| -> usize {
            let el = c.element(g).unwrap();
            let blocks: Vec<(GF4, GF4)> = el.blocks.iter().map(|&(x, y)| (s * x, s * y)).collect();
            c.index_of(&TwistedElement { blocks }).unwrap()
        };
        for a in ["0", "1", "w", "W"] {
            let f = FormSpec::parse(a).unwrap();
            for g in 0..16 {
                for s in GF4::ALL {
                    let lhs = f.eval_idx(&c, scale(s, g)).unwrap();
                    let rhs = s.square() * f.eval_idx(&c, g).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
            // B(u,v) = Q(u+v)-Q(u)-Q(v) biadditive (plain XOR addition of
            // coordinates on the untwisted context), exhaustive n=1
            let b = |u: usize, v: usize| -> GF4 {
                f.eval_idx(&c, u ^ v).unwrap() + f.eval_idx(&c, u).unwrap() + f.eval_idx(&c, v).unwrap()
            };
            for u in 0..16 {
                for v in 0..16 {
                    for w in 0..16 {
                        assert_eq!(b(u ^ w, v), b(u, v) + b(w, v));
                    }
                    for s in GF4::ALL {
                        assert_eq!(b(scale(s, u), v), s * b(u, v));
                    }
                }
            }
        }
    }

    #[test]
    fn bilinearity_sampled_n2() {
        use rand::{Rng, SeedableRng};
        let c = ctx("00");
        let f = FormSpec::parse("w0").unwrap();
        let b = |u: usize, v: usize| -> GF4 {
            f.eval_idx(&c, u ^ v).unwrap() + f.eval_idx(&c, u).unwrap() + f.eval_idx(&c, v).unwrap()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100_000 {
            let (u, v, w) = (
                rng.gen_range(0..256),
                rng.gen_range(0..256),
                rng.gen_range(0..256),
            );
            assert_eq!(b(u ^ w, v), b(u, v) + b(w, v));
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let c = ctx("00");
        let f = FormSpec::parse("0").unwrap();
        assert!(f.eval_idx(&c, 0).is_err());
        assert!(f.level_set(&c, GF4::ZERO).is_err());
    }
}
