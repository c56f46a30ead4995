//! Integers in the factorial number system.
//!
//! A nonnegative integer `n` has a unique expansion `n = a_1*1! + a_2*2! + ... + a_k*k!`
//! with `0 <= a_i <= i` and `a_k != 0`. The always-zero `0!` digit is not stored.
//! Digits are kept little-endian (`a_1` first) so that padding with low-order
//! zeros is a prefix insertion; the textual form is big-endian, `.`-separated
//! and terminated by `!`, e.g. `2020` is `2.4.4.0.2.0!` and zero is `0!`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative integer.
pub type Natural = BigUint;

/// Factorial-base digits `(a_1, ..., a_k)` of a nonnegative integer.
///
/// Zero is the empty digit list, so a nonempty list always has a nonzero top digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FactoradicRep {
    digits: Vec<u32>,
}

impl FactoradicRep {
    pub fn zero() -> Self {
        Self { digits: Vec::new() }
    }

    /// Builds a representation from little-endian digits, checking `a_i <= i`
    /// and that the top digit is nonzero.
    pub fn from_digits(digits: Vec<u32>) -> Result<Self> {
        for (idx, &digit) in digits.iter().enumerate() {
            let position = idx + 1;
            if digit as usize > position {
                return Err(Error::DigitOutOfRange { position, digit });
            }
        }
        if digits.last() == Some(&0) {
            return Err(Error::LeadingZero);
        }
        Ok(Self { digits })
    }

    /// Laisant's procedure: divide by 2, 3, 4, ... and keep the remainders.
    pub fn from_u64(mut n: u64) -> Self {
        let mut digits = Vec::new();
        let mut radix = 2u64;
        while n > 0 {
            digits.push((n % radix) as u32);
            n /= radix;
            radix += 1;
        }
        Self { digits }
    }

    pub fn from_natural(n: &Natural) -> Self {
        if let Some(small) = n.to_u64() {
            return Self::from_u64(small);
        }
        let mut digits = Vec::new();
        let mut rest = n.clone();
        let mut radix = 2u32;
        loop {
            if let Some(small) = rest.to_u64() {
                let mut small = small;
                let mut radix = u64::from(radix);
                while small > 0 {
                    digits.push((small % radix) as u32);
                    small /= radix;
                    radix += 1;
                }
                break;
            }
            let rem = (&rest % radix).to_u32().unwrap_or(0);
            digits.push(rem);
            rest /= radix;
            radix += 1;
        }
        Self { digits }
    }

    /// The representation `1.1.....1!` with `x` ones, i.e. `1! + 2! + ... + x!`.
    pub fn ones(x: usize) -> Self {
        Self {
            digits: vec![1; x],
        }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Number of factoradic digits `k` (0 for zero).
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Evaluates `sum a_i * i!` by Horner's rule on the mixed radix.
    pub fn to_natural(&self) -> Natural {
        let mut acc = Natural::zero();
        // acc holds sum_{j>=i} a_j * j!/i!; stepping down to position i multiplies by i+1.
        for (idx, &digit) in self.digits.iter().enumerate().rev() {
            acc *= (idx + 2) as u64;
            acc += digit;
        }
        acc
    }

    pub fn to_u64(&self) -> Option<u64> {
        let mut acc: u64 = 0;
        for (idx, &digit) in self.digits.iter().enumerate().rev() {
            acc = acc.checked_mul(idx as u64 + 2)?.checked_add(u64::from(digit))?;
        }
        Some(acc)
    }

    /// `f_t`: the same digits moved up `t` places, with zeros at positions `1..=t`.
    pub fn shift(&self, t: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut digits = Vec::with_capacity(t + self.digits.len());
        digits.resize(t, 0);
        digits.extend_from_slice(&self.digits);
        Self { digits }
    }

    /// Adds a natural number with carries in the mixed radix.
    pub fn add(&self, y: &Natural) -> Self {
        self.add_rep(&Self::from_natural(y))
    }

    pub fn add_u64(&self, y: u64) -> Self {
        self.add_rep(&Self::from_u64(y))
    }

    pub fn add_rep(&self, other: &Self) -> Self {
        let (long, short) = if self.len() >= other.len() {
            (&self.digits, &other.digits)
        } else {
            (&other.digits, &self.digits)
        };
        let mut digits = Vec::with_capacity(long.len() + 1);
        let mut carry = 0u64;
        for (idx, &a) in long.iter().enumerate() {
            if idx >= short.len() && carry == 0 {
                digits.extend_from_slice(&long[idx..]);
                break;
            }
            let b = short.get(idx).copied().unwrap_or(0);
            let radix = idx as u64 + 2;
            let sum = u64::from(a) + u64::from(b) + carry;
            digits.push((sum % radix) as u32);
            carry = sum / radix;
        }
        let mut radix = long.len() as u64 + 2;
        while carry > 0 {
            digits.push((carry % radix) as u32);
            carry /= radix;
            radix += 1;
        }
        Self { digits }
    }
}

impl From<u64> for FactoradicRep {
    fn from(n: u64) -> Self {
        Self::from_u64(n)
    }
}

impl From<&Natural> for FactoradicRep {
    fn from(n: &Natural) -> Self {
        Self::from_natural(n)
    }
}

/// Number of factoradic digits of `n` without building the digit list.
pub fn digit_count(mut n: u64) -> usize {
    let mut count = 0;
    let mut radix = 2u64;
    while n > 0 {
        n /= radix;
        radix += 1;
        count += 1;
    }
    count
}

pub fn digit_count_natural(n: &Natural) -> usize {
    match n.to_u64() {
        Some(small) => digit_count(small),
        None => FactoradicRep::from_natural(n).len(),
    }
}

pub fn to_factoradic(n: &Natural) -> FactoradicRep {
    FactoradicRep::from_natural(n)
}

pub fn to_natural(d: &FactoradicRep) -> Natural {
    d.to_natural()
}

impl fmt::Display for FactoradicRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.is_empty() {
            return f.write_str("0!");
        }
        for (n, digit) in self.digits.iter().rev().enumerate() {
            if n > 0 {
                f.write_str(".")?;
            }
            write!(f, "{digit}")?;
        }
        f.write_str("!")
    }
}

impl FromStr for FactoradicRep {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parse_err = |reason| Error::Parse {
            text: text.to_string(),
            reason,
        };
        let body = text
            .strip_suffix('!')
            .ok_or_else(|| parse_err("missing terminating '!'"))?;
        if body == "0" {
            return Ok(Self::zero());
        }
        let mut big_endian = Vec::new();
        for part in body.split('.') {
            if part.is_empty() {
                return Err(parse_err("empty digit"));
            }
            if !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(parse_err("non-digit character"));
            }
            if part.len() > 1 && part.starts_with('0') {
                return Err(parse_err("digit with leading zeros"));
            }
            let digit: u32 = part.parse().map_err(|_| parse_err("digit too large"))?;
            big_endian.push(digit);
        }
        big_endian.reverse();
        Self::from_digits(big_endian)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(digits: &[u32]) -> FactoradicRep {
        FactoradicRep::from_digits(digits.to_vec()).unwrap()
    }

    fn factorial(n: u64) -> u64 {
        (1..=n).product()
    }

    #[test]
    fn converts_2020() {
        assert_eq!(FactoradicRep::from_u64(2020).digits(), &[0, 2, 0, 4, 4, 2]);
        assert_eq!(rep(&[0, 2, 0, 4, 4, 2]).to_u64(), Some(2020));
        assert_eq!(rep(&[0, 2, 0, 4, 4, 2]).to_natural(), Natural::from(2020u32));
    }

    #[test]
    fn small_cases() {
        assert!(FactoradicRep::from_u64(0).is_zero());
        assert_eq!(FactoradicRep::from_u64(5).digits(), &[1, 2]);
        assert_eq!(FactoradicRep::from_u64(23).digits(), &[1, 2, 3]);
        assert_eq!(rep(&[1, 1, 1]).to_u64(), Some(9));
        assert_eq!(FactoradicRep::zero().to_natural(), Natural::zero());
    }

    #[test]
    fn rejects_malformed_digits() {
        assert!(matches!(
            FactoradicRep::from_digits(vec![2]),
            Err(Error::DigitOutOfRange { position: 1, digit: 2 })
        ));
        assert!(matches!(
            FactoradicRep::from_digits(vec![1, 0]),
            Err(Error::LeadingZero)
        ));
    }

    #[test]
    fn sum_of_i_times_factorial() {
        for k in 1..=12u64 {
            let digits: Vec<u32> = (1..=k as u32).collect();
            assert_eq!(rep(&digits).to_u64(), Some(factorial(k + 1) - 1));
        }
    }

    #[test]
    fn shift_examples() {
        let five = FactoradicRep::from_u64(5);
        assert_eq!(five.shift(2).to_u64(), Some(54));
        assert_eq!(five.shift(0), five);
        assert_eq!(FactoradicRep::from_u64(1).shift(3).to_u64(), Some(24));
        assert!(FactoradicRep::zero().shift(4).is_zero());
    }

    #[test]
    fn add_examples() {
        assert_eq!(FactoradicRep::from_u64(20).add_u64(5).to_u64(), Some(25));
        assert_eq!(FactoradicRep::from_u64(23).add_u64(1).digits(), &[0, 0, 0, 1]);
        assert_eq!(
            FactoradicRep::zero().add_u64(2020),
            FactoradicRep::from_u64(2020)
        );
    }

    #[test]
    fn big_values_round_trip() {
        let n: Natural = "123456789012345678901234567890123456789".parse().unwrap();
        let d = FactoradicRep::from_natural(&n);
        assert_eq!(d.to_natural(), n);
        assert_eq!(d.to_u64(), None);
        assert_eq!(digit_count_natural(&n), d.len());
    }

    #[test]
    fn text_format() {
        assert_eq!(FactoradicRep::from_u64(2020).to_string(), "2.4.4.0.2.0!");
        assert_eq!(FactoradicRep::zero().to_string(), "0!");
        assert_eq!("2.4.4.0.2.0!".parse::<FactoradicRep>().unwrap().to_u64(), Some(2020));
        assert!("0!".parse::<FactoradicRep>().unwrap().is_zero());
    }

    #[test]
    fn text_rejects() {
        for bad in ["1.2.3!", "0.1!", "1.0", "", "!", "1..0!", "1.a!", " 1!", "1.00!", "01!"] {
            assert!(bad.parse::<FactoradicRep>().is_err(), "{bad:?} accepted");
        }
        assert!(matches!(
            "1.2.3!".parse::<FactoradicRep>(),
            Err(Error::DigitOutOfRange { .. })
        ));
    }

    #[test]
    fn digit_count_matches() {
        for n in 0..5000u64 {
            assert_eq!(digit_count(n), FactoradicRep::from_u64(n).len());
        }
    }
}
