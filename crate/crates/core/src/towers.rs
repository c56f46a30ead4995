//! Certificates for arbitrarily long runs of consecutive p-happy numbers.
//!
//! The construction pads all-ones numbers: `S_e(1! + 2! + ... + x!) = x` for
//! every `e`, and if `y` has at most `t` factoradic digits then
//! `S_e(f_t(x) + y) = S_e(x) + S_e(y)`. Starting from an offset `l` that sends
//! every element of `U_e` to `p`, the chain `l_r = l`,
//! `l_j = f_t(ones(l_{j+1}))` gives `S_e(l_j + y) = l_{j+1} + S_e(y)`, so
//! `l_0 + 1, ..., l_0 + m` all reach `p`. Above depth one the numbers have a
//! digit count equal to the value of the next level, so the chain is kept
//! symbolic and checked by replaying those two rewrite rules.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::dynamics::{happy_step, happy_step_nat, AttractorAtlas, Exponent};
use crate::error::{Error, Result};
use crate::factoradic::{digit_count_natural, FactoradicRep, Natural};

/// Default iteration cap for [`nice_check`].
pub const DEFAULT_NICE_CAP: u64 = 1000;

/// Offsets `l` that make `U_e + l` iterate to `p`, as `(e, p, l)`.
pub const BUILTIN_WITNESSES: [(u32, u64, u64); 9] = [
    (2, 1, 20),
    (2, 4, 2841),
    (2, 5, 45),
    (3, 1, 2),
    (3, 16, 50127),
    (3, 17, 4506),
    (4, 1, 6),
    (4, 658, 65763),
    (4, 659, 31743),
];

pub fn builtin_offset(e: Exponent, p: &Natural) -> Option<Natural> {
    BUILTIN_WITNESSES
        .iter()
        .find(|(we, wp, _)| *we == e.get() && Natural::from(*wp) == *p)
        .map(|&(_, _, l)| Natural::from(l))
}

/// The all-ones number `1! + 2! + ... + x!`, whose image under every `S_e` is `x`.
pub fn preimage_ones(x: &Natural) -> Result<FactoradicRep> {
    match x.to_u32() {
        Some(count) if count > 0 => Ok(FactoradicRep::ones(count as usize)),
        _ => Err(Error::OutOfDomain(x.clone())),
    }
}

/// Both sides of `S_e(f_t(x) + y) = S_e(x) + S_e(y)`, evaluated without
/// checking that `t` covers the digits of `y`.
pub fn additivity_sides(x: &Natural, y: &Natural, t: usize, e: Exponent) -> (Natural, Natural) {
    let padded = FactoradicRep::from_natural(x).shift(t).add(y);
    let lhs = happy_step(&padded, e);
    let rhs = happy_step_nat(x, e) + happy_step_nat(y, e);
    (lhs, rhs)
}

/// Checks the padding identity; errors if `t` is shorter than the digits of `y`.
pub fn additivity_check(x: &Natural, y: &Natural, t: usize, e: Exponent) -> Result<bool> {
    let needed = digit_count_natural(y);
    if t < needed {
        return Err(Error::ShiftTooShort { t, needed });
    }
    let (lhs, rhs) = additivity_sides(x, y, t, e);
    Ok(lhs == rhs)
}

/// An offset `l` with, for each `u` in `U_e`, the least `q_u` such that
/// `S_e^{q_u}(l + u) = p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceWitness {
    pub e: Exponent,
    pub p: Natural,
    pub l: Natural,
    pub steps: BTreeMap<Natural, u64>,
}

impl NiceWitness {
    pub fn steps_for(&self, u: &Natural) -> Option<u64> {
        self.steps.get(u).copied()
    }
}

pub fn nice_check(
    e: Exponent,
    p: &Natural,
    l: &Natural,
    atlas: &AttractorAtlas,
    cap: u64,
) -> Result<NiceWitness> {
    check_atlas(atlas, e)?;
    if !atlas.fixed_points().contains(p) {
        return Err(Error::NotAFixedPoint {
            e: e.get(),
            p: p.clone(),
        });
    }
    let mut steps = BTreeMap::new();
    for u in atlas.cycle_set() {
        let start = l + &u;
        let mut value = start.clone();
        let mut q = 0u64;
        while value != *p {
            if q == cap {
                let report = crate::dynamics::classify(&start, e, Some(atlas))?;
                return Err(Error::NiceFailed {
                    l: l.clone(),
                    u,
                    attractor: report.attractor,
                    steps: report.steps_to_attractor,
                });
            }
            value = happy_step_nat(&value, e);
            q += 1;
        }
        steps.insert(u, q);
    }
    Ok(NiceWitness {
        e,
        p: p.clone(),
        l: l.clone(),
        steps,
    })
}

fn check_atlas(atlas: &AttractorAtlas, e: Exponent) -> Result<()> {
    if atlas.e() != e {
        return Err(Error::ExponentMismatch {
            atlas: atlas.e().get(),
            requested: e.get(),
        });
    }
    Ok(())
}

/// The symbolic number `l_0` of a chain `l_r = base`, `l_j = f_t(ones(l_{j+1}))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainNumber {
    pub base: Natural,
    pub shift: usize,
    pub depth: usize,
}

impl ChainNumber {
    /// The chain starting at level `j`, i.e. `l_j`.
    pub fn level(&self, j: usize) -> ChainNumber {
        assert!(j <= self.depth, "level {j} beyond depth {}", self.depth);
        ChainNumber {
            depth: self.depth - j,
            ..self.clone()
        }
    }

    /// Decimal description of the size of `l_0 + 1`.
    pub fn size_note(&self) -> String {
        match self.depth {
            0 => format!("n_1 = {}", &self.base + 1u32),
            1 => format!(
                "ones-block of {} digits shifted by {}: {} factoradic digits, about 10^{} in decimal",
                self.base,
                self.shift,
                &self.base + self.shift,
                format_log10(log10_top_level(&self.base, self.shift)),
            ),
            depth => format!(
                "ones-block of l_1 digits shifted by {}, applied {} times over base {}; \
                 l_{} has {} factoradic digits, about 10^{} in decimal",
                self.shift,
                depth,
                self.base,
                depth - 1,
                &self.base + self.shift,
                format_log10(log10_top_level(&self.base, self.shift)),
            ),
        }
    }
}

/// `log10` of `(t+1)! + ... + (t+x)!`, the value of `f_t(ones(x))`, to within rounding.
fn log10_top_level(x: &Natural, t: usize) -> f64 {
    let top = x.to_f64().unwrap_or(f64::MAX) + t as f64;
    // log10(n!) via Stirling; the lower-order terms of the sum add under 1%.
    if top < 2.0 {
        return 0.0;
    }
    let ln = top * top.ln() - top + 0.5 * (2.0 * std::f64::consts::PI * top).ln();
    ln / std::f64::consts::LN_10
}

fn format_log10(value: f64) -> String {
    if value.is_finite() {
        format!("{:.1}", value)
    } else {
        "inf".to_string()
    }
}

/// Expands a chain to concrete digits, failing if any level needs more than
/// `size_cap` digits.
pub fn materialize(chain: &ChainNumber, size_cap: usize) -> Result<FactoradicRep> {
    if chain.depth == 0 {
        let digits = digit_count_natural(&chain.base);
        if digits > size_cap {
            return Err(Error::SizeCapExceeded {
                estimate: digits.to_string(),
                cap: size_cap,
            });
        }
        return Ok(FactoradicRep::from_natural(&chain.base));
    }
    let inner = materialize(&chain.level(1), size_cap)?;
    // inner has k digits, so its value is at least k!; bail out before evaluating it.
    if inner.len() > 1 && factorial_exceeds(inner.len(), size_cap.saturating_sub(chain.shift)) {
        let log10 = if chain.depth == 1 {
            (chain.base.to_f64().unwrap_or(f64::MAX)).log10()
        } else {
            log10_top_level(&chain.level(2).base, chain.shift)
        };
        return Err(Error::SizeCapExceeded {
            estimate: format!("about 10^{}", format_log10(log10)),
            cap: size_cap,
        });
    }
    let count = inner.to_natural();
    let total = &count + chain.shift;
    match (count.to_usize(), total.to_usize()) {
        (Some(count), Some(total)) if count > 0 && total <= size_cap => {
            Ok(FactoradicRep::ones(count).shift(chain.shift))
        }
        _ => Err(Error::SizeCapExceeded {
            estimate: total.to_string(),
            cap: size_cap,
        }),
    }
}

fn factorial_exceeds(k: usize, limit: usize) -> bool {
    let mut acc: usize = 1;
    for i in 2..=k {
        acc = match acc.checked_mul(i) {
            Some(v) => v,
            None => return true,
        };
        if acc > limit {
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SequenceStep {
    pub i: u64,
    pub steps: u64,
}

/// A run `l_0 + 1, ..., l_0 + m` with `S_e^{steps_i}(l_0 + i) = p` for each `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceCertificate {
    pub e: Exponent,
    pub p: Natural,
    pub m: u64,
    pub t: usize,
    pub r: usize,
    pub chain: ChainNumber,
    pub per_i: Vec<SequenceStep>,
    pub size_note: String,
}

impl SequenceCertificate {
    /// JSON object with keys `e, p, m, t, r, l, per_i, size_note` in that order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

fn json_number(n: &Natural) -> serde_json::Number {
    // arbitrary_precision keeps every digit of the decimal string.
    serde_json::from_str(&n.to_string()).unwrap_or_else(|_| serde_json::Number::from(0u8))
}

impl Serialize for SequenceCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SequenceCertificate", 8)?;
        s.serialize_field("e", &self.e.get())?;
        s.serialize_field("p", &json_number(&self.p))?;
        s.serialize_field("m", &self.m)?;
        s.serialize_field("t", &self.t)?;
        s.serialize_field("r", &self.r)?;
        s.serialize_field("l", &json_number(&self.chain.base))?;
        s.serialize_field("per_i", &self.per_i)?;
        s.serialize_field("size_note", &self.size_note)?;
        s.end()
    }
}

/// One point of a replayed orbit: either `l_level + offset` or a concrete value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayValue {
    Symbolic { level: usize, offset: Natural },
    Concrete(Natural),
}

/// Builds the chain certificate for `m` consecutive integers reaching `p`.
pub fn build_sequence(
    e: Exponent,
    p: &Natural,
    m: u64,
    witness: &NiceWitness,
    atlas: &AttractorAtlas,
) -> Result<SequenceCertificate> {
    check_atlas(atlas, e)?;
    if witness.e != e || witness.p != *p {
        return Err(Error::InvalidArgument(format!(
            "witness is for (e={}, p={}), not (e={}, p={})",
            witness.e, witness.p, e, p
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("run length m must be at least 1".into()));
    }

    // r: least depth putting every S^r(i) in U_e.
    let mut r = 0usize;
    for i in 1..=m {
        let (_, steps) = atlas
            .classify_u64(i)
            .ok_or_else(|| Error::OutOfDomain(Natural::from(i)))?;
        r = r.max(steps as usize);
    }

    let mut t = 0usize;
    let mut landing = Vec::with_capacity(m as usize);
    for i in 1..=m {
        let mut value = Natural::from(i);
        for j in 0..=r {
            t = t.max(digit_count_natural(&value));
            if j < r {
                value = happy_step_nat(&value, e);
            }
        }
        landing.push(value);
    }

    let chain = ChainNumber {
        base: witness.l.clone(),
        shift: t,
        depth: r,
    };
    let mut per_i = Vec::with_capacity(m as usize);
    for (i, u) in (1..=m).zip(&landing) {
        let q = witness.steps_for(u).ok_or_else(|| Error::ReplayFailed {
            i,
            reason: format!("S^{r}({i}) = {u} is not covered by the witness"),
        })?;
        per_i.push(SequenceStep {
            i,
            steps: q + r as u64,
        });
    }

    let certificate = SequenceCertificate {
        e,
        p: p.clone(),
        m,
        t,
        r,
        size_note: chain.size_note(),
        chain,
        per_i,
    };
    for step in &certificate.per_i {
        replay(&certificate, step.i)?;
    }
    Ok(certificate)
}

/// Replays `S_e` on `l_0 + i` symbolically: `l_j + y -> l_{j+1} + S_e(y)` while
/// `y` fits in the shift, then concrete iteration from `l + S_e^r(i)`.
///
/// Returns the `steps_i + 1` values visited, ending at `p`.
pub fn replay(certificate: &SequenceCertificate, i: u64) -> Result<Vec<ReplayValue>> {
    let entry = certificate
        .per_i
        .iter()
        .find(|s| s.i == i)
        .ok_or_else(|| Error::ReplayFailed {
            i,
            reason: "index outside the certified run".into(),
        })?;
    let chain = &certificate.chain;
    let e = certificate.e;
    let mut value = if chain.depth == 0 {
        ReplayValue::Concrete(&chain.base + i)
    } else {
        ReplayValue::Symbolic {
            level: 0,
            offset: Natural::from(i),
        }
    };
    let mut visited = Vec::with_capacity(entry.steps as usize + 1);
    for _ in 0..entry.steps {
        let next = match &value {
            ReplayValue::Symbolic { level, offset } => {
                let digits = digit_count_natural(offset);
                if digits > chain.shift {
                    return Err(Error::ReplayFailed {
                        i,
                        reason: format!(
                            "offset {offset} at level {level} has {digits} digits, shift is {}",
                            chain.shift
                        ),
                    });
                }
                let image = happy_step_nat(offset, e);
                if level + 1 == chain.depth {
                    ReplayValue::Concrete(&chain.base + image)
                } else {
                    ReplayValue::Symbolic {
                        level: level + 1,
                        offset: image,
                    }
                }
            }
            ReplayValue::Concrete(n) => ReplayValue::Concrete(happy_step_nat(n, e)),
        };
        visited.push(std::mem::replace(&mut value, next));
    }
    if value != ReplayValue::Concrete(certificate.p.clone()) {
        return Err(Error::ReplayFailed {
            i,
            reason: format!("ended at {value:?} after {} steps", entry.steps),
        });
    }
    visited.push(value);
    Ok(visited)
}

/// Outcome of checking a certificate against concrete iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrossCheck {
    /// Every step of every orbit matched the replay.
    Agrees,
    /// The chain does not fit under the size cap.
    TooLarge { estimate: String },
}

/// Materializes `l_0` and iterates `S_e` concretely on each `l_0 + i`,
/// comparing every step after the first against the symbolic replay.
pub fn cross_check(certificate: &SequenceCertificate, size_cap: usize) -> Result<CrossCheck> {
    let chain = &certificate.chain;
    let top = match materialize(chain, size_cap) {
        Ok(rep) => rep,
        Err(Error::SizeCapExceeded { estimate, .. }) => {
            return Ok(CrossCheck::TooLarge { estimate })
        }
        Err(other) => return Err(other),
    };
    // Concrete values of l_1, ..., l_r for evaluating symbolic replay points.
    let mut levels = vec![Natural::zero(); chain.depth + 1];
    for (j, slot) in levels.iter_mut().enumerate().skip(1) {
        *slot = materialize(&chain.level(j), size_cap)?.to_natural();
    }

    let e = certificate.e;
    for step in &certificate.per_i {
        let expected = replay(certificate, step.i)?;
        let start = top.add_u64(step.i);
        let mut concrete = happy_step(&start, e);
        for (k, point) in expected.iter().enumerate().skip(1) {
            let symbolic_value = match point {
                ReplayValue::Concrete(v) => v.clone(),
                ReplayValue::Symbolic { level, offset } => &levels[*level] + offset,
            };
            if symbolic_value != concrete {
                return Err(Error::ReplayFailed {
                    i: step.i,
                    reason: format!(
                        "step {k}: concrete {concrete} differs from replay {symbolic_value}"
                    ),
                });
            }
            if k + 1 < expected.len() {
                concrete = happy_step_nat(&concrete, e);
            }
        }
        if expected.len() == 1 && start.to_natural() != certificate.p {
            return Err(Error::ReplayFailed {
                i: step.i,
                reason: "zero-step orbit does not start at p".into(),
            });
        }
    }
    Ok(CrossCheck::Agrees)
}
