//! Exact fixed-point summation of `f64` values.
//!
//! Every finite double is an odd integer times a power of two, so any finite
//! set of doubles can be added exactly in a wide two's-complement integer whose
//! least significant bit sits at the smallest exponent present. Sums are rounded
//! to `f64` exactly once (round to nearest, ties to even), which makes them
//! independent of summation order. Prefix tables built on this representation
//! return rectangle sums that are bit-identical to a direct correctly rounded sum.

/// Upper bound on the limb count of any format; the full double range needs 35.
pub const MAX_LIMBS: usize = 40;

const FULL_RANGE_LSB: i32 = -1074;

/// Layout of a fixed-point integer: value = (two's-complement integer) × 2^lsb_exp.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedFormat {
    lsb_exp: i32,
    limbs: usize,
}

/// Splits a finite nonzero double into (odd mantissa, exponent, negative).
fn decompose(v: f64) -> Option<(u64, i32, bool)> {
    if v == 0.0 || !v.is_finite() {
        return None;
    }
    let bits = v.to_bits();
    let neg = bits >> 63 == 1;
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    let tz = mant.trailing_zeros();
    mant >>= tz;
    exp += tz as i32;
    Some((mant, exp, neg))
}

fn bit_len(x: u64) -> i32 {
    64 - x.leading_zeros() as i32
}

impl FixedFormat {
    /// Smallest format holding every value of `values` and any sum of at most
    /// `max_terms` of them (with either sign).
    pub fn for_values(values: &[f64], max_terms: usize) -> Self {
        let mut lsb = i32::MAX;
        let mut top = i32::MIN;
        for &v in values {
            if let Some((mant, exp, _)) = decompose(v) {
                lsb = lsb.min(exp);
                top = top.max(exp + bit_len(mant));
            }
        }
        if lsb == i32::MAX {
            return FixedFormat {
                lsb_exp: 0,
                limbs: 1,
            };
        }
        let growth = bit_len(max_terms.max(1) as u64);
        let bits = (top - lsb) + growth + 2;
        let limbs = (bits as usize).div_ceil(64);
        assert!(limbs <= MAX_LIMBS, "fixed-point format too wide");
        FixedFormat {
            lsb_exp: lsb,
            limbs,
        }
    }

    /// Format covering every finite double, for up to 2^64 terms.
    pub fn full_range() -> Self {
        // top exponent 1024, lsb -1074, 64 growth bits and a sign bit
        let bits = 1024 + 1074 + 64 + 2;
        FixedFormat {
            lsb_exp: FULL_RANGE_LSB,
            limbs: (bits as usize).div_ceil(64),
        }
    }

    pub fn limbs(&self) -> usize {
        self.limbs
    }

    pub fn lsb_exp(&self) -> i32 {
        self.lsb_exp
    }

    /// Writes `v` into `out` (length `limbs`). Panics if `v` does not fit.
    pub fn encode(&self, v: f64, out: &mut [u64]) {
        debug_assert_eq!(out.len(), self.limbs);
        out.iter_mut().for_each(|w| *w = 0);
        let Some((mant, exp, neg)) = decompose(v) else {
            assert!(v.is_finite(), "cannot encode a non-finite value");
            return;
        };
        assert!(exp >= self.lsb_exp, "value below the format resolution");
        let shift = (exp - self.lsb_exp) as usize;
        let limb = shift / 64;
        let off = shift % 64;
        assert!(
            limb < self.limbs && shift + (bit_len(mant) as usize) < 64 * self.limbs,
            "value exceeds the format range"
        );
        out[limb] = mant << off;
        if off > 0 && limb + 1 < self.limbs {
            out[limb + 1] = mant >> (64 - off);
        }
        if neg {
            negate(out);
        }
    }

    /// Rounds the fixed-point integer to the nearest double.
    pub fn decode(&self, bits: &[u64]) -> f64 {
        debug_assert_eq!(bits.len(), self.limbs);
        let mut buf = [0u64; MAX_LIMBS];
        let mag = &mut buf[..bits.len()];
        mag.copy_from_slice(bits);
        let neg = mag[mag.len() - 1] >> 63 == 1;
        if neg {
            negate(mag);
        }
        let Some(top_limb) = mag.iter().rposition(|&w| w != 0) else {
            return 0.0;
        };
        let len = 64 * top_limb as i32 + bit_len(mag[top_limb]);
        let magnitude = if len <= 64 {
            ldexp(mag[0] as f64, self.lsb_exp)
        } else {
            let shift = (len - 64) as usize;
            let limb = shift / 64;
            let off = shift % 64;
            let mut window = mag[limb] >> off;
            if off > 0 {
                window |= mag[limb + 1] << (64 - off);
            }
            let sticky = mag[..limb].iter().any(|&w| w != 0)
                || (off > 0 && mag[limb] & ((1u64 << off) - 1) != 0);
            window |= sticky as u64;
            ldexp(window as f64, self.lsb_exp + shift as i32)
        };
        if neg {
            -magnitude
        } else {
            magnitude
        }
    }
}

fn negate(x: &mut [u64]) {
    let mut carry = 1u64;
    for w in x.iter_mut() {
        let (s, c) = (!*w).overflowing_add(carry);
        *w = s;
        carry = c as u64;
    }
}

/// `acc += x` modulo 2^(64·limbs).
#[inline]
pub fn add_assign(acc: &mut [u64], x: &[u64]) {
    let mut carry = false;
    for (a, &b) in acc.iter_mut().zip(x) {
        let (s1, c1) = a.overflowing_add(b);
        let (s2, c2) = s1.overflowing_add(carry as u64);
        *a = s2;
        carry = c1 || c2;
    }
}

/// `acc -= x` modulo 2^(64·limbs).
#[inline]
pub fn sub_assign(acc: &mut [u64], x: &[u64]) {
    let mut borrow = false;
    for (a, &b) in acc.iter_mut().zip(x) {
        let (d1, b1) = a.overflowing_sub(b);
        let (d2, b2) = d1.overflowing_sub(borrow as u64);
        *a = d2;
        borrow = b1 || b2;
    }
}

fn pow2(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// x × 2^e with a single rounding when `x` carries at most 53 significant bits.
fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= pow2(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= pow2(-1000);
        e += 1000;
    }
    x * pow2(e)
}

/// Streaming correctly rounded sum over the whole double range.
#[derive(Clone, Debug)]
pub struct ExactSum {
    format: FixedFormat,
    pos: [u64; MAX_LIMBS],
    neg: [u64; MAX_LIMBS],
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

/// Adds `word << (64 * limb)` into `acc`, propagating the carry.
#[inline]
fn add_word(acc: &mut [u64], limb: usize, word: u64) {
    let mut k = limb;
    let mut carry = word;
    while carry != 0 && k < acc.len() {
        let (s, c) = acc[k].overflowing_add(carry);
        acc[k] = s;
        carry = c as u64;
        k += 1;
    }
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum {
            format: FixedFormat::full_range(),
            pos: [0; MAX_LIMBS],
            neg: [0; MAX_LIMBS],
        }
    }

    pub fn add(&mut self, v: f64) {
        assert!(v.is_finite(), "cannot sum a non-finite value");
        let Some((mant, exp, neg)) = decompose(v) else {
            return;
        };
        let limbs = self.format.limbs;
        let shift = (exp - FULL_RANGE_LSB) as usize;
        let limb = shift / 64;
        let off = shift % 64;
        let acc = if neg {
            &mut self.neg[..limbs]
        } else {
            &mut self.pos[..limbs]
        };
        add_word(acc, limb, mant << off);
        if off > 0 {
            add_word(acc, limb + 1, mant >> (64 - off));
        }
    }

    pub fn value(&self) -> f64 {
        let limbs = self.format.limbs;
        let mut diff = self.pos;
        sub_assign(&mut diff[..limbs], &self.neg[..limbs]);
        self.format.decode(&diff[..limbs])
    }
}

impl Extend<f64> for ExactSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Correctly rounded sum of an iterator of finite doubles.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut s = ExactSum::new();
    s.extend(values);
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_exact() {
        assert_eq!(exact_sum([1e100, 1.0, -1e100]), 1.0);
        // float(0.1) + float(0.2) - float(0.3) is exactly 2^-55
        assert_eq!(exact_sum([0.1, 0.2, -0.3]), 2f64.powi(-55));
    }

    #[test]
    fn round_trip_through_format() {
        let vals = [3.5, -1.25e-7, 7.0e12, 0.0, 1e-300];
        let fmt = FixedFormat::for_values(&vals, vals.len());
        let mut buf = vec![0u64; fmt.limbs()];
        for &v in &vals {
            fmt.encode(v, &mut buf);
            assert_eq!(fmt.decode(&buf), v);
        }
    }

    #[test]
    fn ties_round_to_even() {
        // 2^53 + 1 is a tie between 2^53 and 2^53 + 2
        let s = exact_sum([2f64.powi(53), 1.0]);
        assert_eq!(s, 2f64.powi(53));
        let s = exact_sum([2f64.powi(53) + 2.0, 1.0]);
        assert_eq!(s, 2f64.powi(53) + 4.0);
        // sticky bit breaks the tie upward
        let s = exact_sum([2f64.powi(53), 1.0, 2f64.powi(-60)]);
        assert_eq!(s, 2f64.powi(53) + 2.0);
    }

    #[test]
    fn prefix_difference_matches_direct_sum() {
        let vals: Vec<f64> = (0..50).map(|k| ((k * 37 % 11) as f64 + 0.1) * 1.3f64.powi(k - 20)).collect();
        let fmt = FixedFormat::for_values(&vals, vals.len());
        let l = fmt.limbs();
        let mut prefix = vec![0u64; (vals.len() + 1) * l];
        let mut cell = vec![0u64; l];
        for (k, &v) in vals.iter().enumerate() {
            fmt.encode(v, &mut cell);
            let (head, tail) = prefix.split_at_mut((k + 1) * l);
            tail[..l].copy_from_slice(&head[k * l..]);
            add_assign(&mut tail[..l], &cell);
        }
        for lo in 0..vals.len() {
            for hi in lo..vals.len() {
                let mut acc = prefix[(hi + 1) * l..(hi + 2) * l].to_vec();
                sub_assign(&mut acc, &prefix[lo * l..(lo + 1) * l]);
                assert_eq!(fmt.decode(&acc), exact_sum(vals[lo..=hi].iter().copied()));
            }
        }
    }
}
