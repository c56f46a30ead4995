//! The e-power factoradic happy function `S_e` and its dynamics.
//!
//! `S_e(n)` is the sum of the `e`-th powers of the factoradic digits of `n`.
//! Above a certified bound `M_e` the map strictly decreases, so every orbit
//! drops into `[1, M_e]` and, by pigeonhole, ends in a fixed point or a cycle.
//! [`AttractorAtlas`] memoizes the classification of that whole range.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{CertificateCheck, Error, Result};
use crate::factoradic::{FactoradicRep, Natural};

/// Default safety cap on orbit length for [`classify`].
pub const DEFAULT_ITERATION_CAP: u64 = 1_000_000;

/// Largest `M_e` for which [`enumerate_attractors`] will build a table.
pub const DEFAULT_ATLAS_LIMIT: u64 = 50_000_000;

/// Largest factoradic digit of any `u64` (20! < 2^64 < 21!).
const MAX_U64_DIGIT: usize = 20;

/// The power `e >= 1` applied to each digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent(u32);

impl Exponent {
    pub fn new(e: u32) -> Result<Self> {
        if e == 0 {
            return Err(Error::InvalidExponent(e));
        }
        Ok(Self(e))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `a^e` for every digit a `u64` can carry, or `None` where it overflows.
#[derive(Debug, Clone)]
pub(crate) struct DigitPowers {
    powers: [Option<u64>; MAX_U64_DIGIT + 1],
}

impl DigitPowers {
    pub(crate) fn new(e: Exponent) -> Self {
        let mut powers = [None; MAX_U64_DIGIT + 1];
        for (a, slot) in powers.iter_mut().enumerate() {
            *slot = (a as u64).checked_pow(e.get());
        }
        Self { powers }
    }

    /// `S_e(n)`, or `None` if the sum leaves `u64`.
    #[inline]
    pub(crate) fn step(&self, mut n: u64) -> Option<u64> {
        let mut sum = 0u64;
        let mut radix = 2u64;
        while n > 0 {
            let digit = (n % radix) as usize;
            if digit != 0 {
                sum = sum.checked_add(self.powers[digit]?)?;
            }
            n /= radix;
            radix += 1;
        }
        Some(sum)
    }
}

/// `S_e` applied to a representation: the sum of `a_i^e`. Zero maps to zero.
pub fn happy_step(d: &FactoradicRep, e: Exponent) -> Natural {
    // Tally digit values first; long representations are mostly repeated small digits.
    let mut tally: HashMap<u32, u64> = HashMap::new();
    for &digit in d.digits() {
        if digit != 0 {
            *tally.entry(digit).or_insert(0) += 1;
        }
    }
    let mut sum = Natural::zero();
    for (digit, count) in tally {
        sum += BigUint::from(digit).pow(e.get()) * count;
    }
    sum
}

pub fn happy_step_nat(n: &Natural, e: Exponent) -> Natural {
    if let Some(small) = n.to_u64() {
        if let Some(image) = DigitPowers::new(e).step(small) {
            return Natural::from(image);
        }
    }
    happy_step(&FactoradicRep::from_natural(n), e)
}

/// `S_e(n)` on machine integers; `None` if the image does not fit in `u64`.
pub fn happy_step_u64(n: u64, e: Exponent) -> Option<u64> {
    DigitPowers::new(e).step(n)
}

/// The `steps`-fold composition `S_e^steps(n)`.
pub fn iterate(n: &Natural, e: Exponent, steps: u64) -> Natural {
    let powers = DigitPowers::new(e);
    let mut value = n.clone();
    for _ in 0..steps {
        value = match value.to_u64().and_then(|small| powers.step(small)) {
            Some(image) => Natural::from(image),
            None => happy_step(&FactoradicRep::from_natural(&value), e),
        };
    }
    value
}

/// Where an orbit ends up: a fixed point or a cycle of length at least two.
///
/// Cycles are stored rotated so the smallest member comes first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttractorId {
    FixedPoint(Natural),
    Cycle(Vec<Natural>),
}

impl AttractorId {
    /// Builds the attractor from the members of a periodic orbit in orbit order.
    pub fn from_orbit(mut members: Vec<Natural>) -> Self {
        assert!(!members.is_empty(), "empty periodic orbit");
        if members.len() == 1 {
            return AttractorId::FixedPoint(members.pop().unwrap_or_default());
        }
        let min_at = members
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(idx, _)| idx)
            .unwrap_or(0);
        members.rotate_left(min_at);
        AttractorId::Cycle(members)
    }

    pub fn members(&self) -> &[Natural] {
        match self {
            AttractorId::FixedPoint(p) => std::slice::from_ref(p),
            AttractorId::Cycle(members) => members,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AttractorId::FixedPoint(_) => "fixed",
            AttractorId::Cycle(_) => "cycle",
        }
    }

    pub fn is_fixed_point(&self, p: &Natural) -> bool {
        matches!(self, AttractorId::FixedPoint(q) if q == p)
    }

    /// Members joined by `;` in canonical order.
    pub fn members_text(&self) -> String {
        self.members()
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl fmt::Display for AttractorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttractorId::FixedPoint(p) => write!(f, "{p}"),
            AttractorId::Cycle(members) => {
                f.write_str("(")?;
                for (idx, m) in members.iter().enumerate() {
                    if idx > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{m}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Result of following the orbit of `start` until it enters its attractor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitReport {
    pub start: Natural,
    pub e: Exponent,
    /// Least `l` with `S_e^l(start)` on the attractor.
    pub steps_to_attractor: u64,
    pub attractor: AttractorId,
    /// `S_e^0(start), ..., S_e^steps(start)` when requested.
    pub trajectory: Option<Vec<Natural>>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions<'a> {
    pub atlas: Option<&'a AttractorAtlas>,
    pub cap: u64,
    pub trace: bool,
}

impl Default for ClassifyOptions<'_> {
    fn default() -> Self {
        Self {
            atlas: None,
            cap: DEFAULT_ITERATION_CAP,
            trace: false,
        }
    }
}

pub fn classify(n: &Natural, e: Exponent, atlas: Option<&AttractorAtlas>) -> Result<OrbitReport> {
    classify_with(
        n,
        e,
        ClassifyOptions {
            atlas,
            ..ClassifyOptions::default()
        },
    )
}

/// Follows the orbit of `n` recording visited values until one repeats, or
/// until it lands in the atlas range where the memoized answer is spliced in.
pub fn classify_with(n: &Natural, e: Exponent, opts: ClassifyOptions<'_>) -> Result<OrbitReport> {
    if n.is_zero() {
        return Err(Error::OutOfDomain(n.clone()));
    }
    if let Some(atlas) = opts.atlas {
        if atlas.e != e {
            return Err(Error::ExponentMismatch {
                atlas: atlas.e.get(),
                requested: e.get(),
            });
        }
    }
    let powers = DigitPowers::new(e);
    let step = |value: &Natural| -> Natural {
        match value.to_u64().and_then(|small| powers.step(small)) {
            Some(image) => Natural::from(image),
            None => happy_step(&FactoradicRep::from_natural(value), e),
        }
    };

    let mut seen: HashMap<Natural, u64> = HashMap::new();
    let mut path: Vec<Natural> = Vec::new();
    let mut value = n.clone();
    loop {
        if let Some(atlas) = opts.atlas {
            if let Some((index, tail)) = value.to_u64().and_then(|v| atlas.lookup_index(v)) {
                let steps = path.len() as u64 + tail;
                let trajectory = opts.trace.then(|| {
                    let mut trajectory = path.clone();
                    let mut cursor = value.clone();
                    for _ in 0..tail {
                        let next = step(&cursor);
                        trajectory.push(std::mem::replace(&mut cursor, next));
                    }
                    trajectory.push(cursor);
                    trajectory
                });
                return Ok(OrbitReport {
                    start: n.clone(),
                    e,
                    steps_to_attractor: steps,
                    attractor: atlas.attractors[index].clone(),
                    trajectory,
                });
            }
        }
        if let Some(&entry) = seen.get(&value) {
            let cycle = path[entry as usize..].to_vec();
            let trajectory = opts.trace.then(|| path[..=entry as usize].to_vec());
            return Ok(OrbitReport {
                start: n.clone(),
                e,
                steps_to_attractor: entry,
                attractor: AttractorId::from_orbit(cycle),
                trajectory,
            });
        }
        if path.len() as u64 > opts.cap {
            return Err(Error::IterationCap {
                start: n.clone(),
                cap: opts.cap,
            });
        }
        let next = step(&value);
        seen.insert(value.clone(), path.len() as u64);
        path.push(value);
        value = next;
    }
}

/// Least `j` with `j! > j^(e-1)`.
pub fn smallest_j(e: Exponent) -> u32 {
    let mut j = 1u32;
    let mut factorial = BigUint::one();
    loop {
        if factorial > BigUint::from(j).pow(e.get() - 1) {
            return j;
        }
        j += 1;
        factorial *= j;
    }
}

fn factorial(n: u32) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Which exact checks of a descent certificate held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertificateChecks {
    /// `j! > j^(e-1)`.
    pub base_case: bool,
    /// `(j+1)^(e-1) <= j^(e-1) * (j+1)`, which carries `k! > k^(e-1)` to every `k >= j`.
    pub induction_step: bool,
    /// `(j+1)! - (j+1)^(e-1) + C_e > 0`.
    pub dominance: bool,
}

/// Certified bound `M_e` above which `S_e(n) < n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentBound {
    pub e: Exponent,
    pub j: u32,
    /// `M_e = 1*1! + 2*2! + ... + j*j! = (j+1)! - 1`.
    pub bound: Natural,
    /// `C_e`: the least possible contribution of positions `2..j` to `n - S_e(n)`.
    pub tail_offset: BigInt,
    pub checks: CertificateChecks,
}

impl DescentBound {
    pub fn certificate_ok(&self) -> bool {
        self.checks.base_case && self.checks.induction_step && self.checks.dominance
    }

    pub fn ensure_certified(&self) -> Result<()> {
        let failed = if !self.checks.base_case {
            CertificateCheck::BaseCase
        } else if !self.checks.induction_step {
            CertificateCheck::InductionStep
        } else if !self.checks.dominance {
            CertificateCheck::Dominance
        } else {
            return Ok(());
        };
        Err(Error::CertificateFailed {
            e: self.e.get(),
            check: failed,
        })
    }
}

pub fn descent_bound(e: Exponent) -> DescentBound {
    let j = smallest_j(e);
    let power = e.get() - 1;
    let j_fact = factorial(j);
    let next_fact = &j_fact * (j + 1);

    let mut tail_offset = BigInt::zero();
    for i in 2..j {
        let place = BigInt::from(factorial(i));
        let least = (0..=i)
            .map(|a| BigInt::from(a) * &place - BigInt::from(a).pow(e.get()))
            .min()
            .unwrap_or_default();
        tail_offset += least;
    }

    let base_case = j_fact > BigUint::from(j).pow(power);
    let induction_step =
        BigUint::from(j + 1).pow(power) <= BigUint::from(j).pow(power) * (j + 1);
    let dominance = BigInt::from(next_fact.clone()) - BigInt::from(BigUint::from(j + 1).pow(power))
        + &tail_offset
        > BigInt::zero();

    DescentBound {
        e,
        j,
        bound: next_fact - 1u32,
        tail_offset,
        checks: CertificateChecks {
            base_case,
            induction_step,
            dominance,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    attractor: u32,
    steps: u32,
}

const UNSET: Entry = Entry {
    attractor: u32::MAX,
    steps: u32::MAX,
};

/// Every fixed point and cycle of `S_e`, with a memoized classification of `[1, M_e]`.
///
/// Immutable once built; share freely across threads.
#[derive(Debug, Clone)]
pub struct AttractorAtlas {
    e: Exponent,
    bound: u64,
    attractors: Vec<AttractorId>,
    fixed_points: Vec<Natural>,
    cycles: Vec<AttractorId>,
    table: Vec<Entry>,
    members: HashMap<u64, u32>,
    powers: DigitPowers,
}

pub fn enumerate_attractors(e: Exponent) -> Result<AttractorAtlas> {
    enumerate_attractors_with_limit(e, DEFAULT_ATLAS_LIMIT)
}

pub fn enumerate_attractors_with_limit(e: Exponent, limit: u64) -> Result<AttractorAtlas> {
    let certificate = descent_bound(e);
    certificate.ensure_certified()?;
    let bound = match certificate.bound.to_u64() {
        Some(bound) if bound <= limit => bound,
        _ => {
            return Err(Error::AtlasTooLarge {
                e: e.get(),
                size: certificate.bound,
                limit,
            })
        }
    };
    AttractorAtlas::build(e, bound)
}

impl AttractorAtlas {
    fn build(e: Exponent, bound: u64) -> Result<Self> {
        let powers = DigitPowers::new(e);
        let overflow = |v: u64| Error::OutOfDomain(Natural::from(v));
        let mut table = vec![UNSET; bound as usize];
        let mut members: HashMap<u64, u32> = HashMap::new();
        let mut found: Vec<Vec<u64>> = Vec::new();

        let mut path: Vec<u64> = Vec::new();
        let mut on_path: HashMap<u64, usize> = HashMap::new();
        for n in 1..=bound {
            if table[(n - 1) as usize] != UNSET {
                continue;
            }
            path.clear();
            on_path.clear();
            let mut value = n;
            // Attractor index and remaining steps at the point the walk stops.
            let (attractor, tail_steps, resolved_len) = loop {
                if value >= 1 && value <= bound && table[(value - 1) as usize] != UNSET {
                    let hit = table[(value - 1) as usize];
                    break (hit.attractor, u64::from(hit.steps), path.len());
                }
                if let Some(&index) = members.get(&value) {
                    break (index, 0, path.len());
                }
                if let Some(&entry) = on_path.get(&value) {
                    let index = found.len() as u32;
                    let cycle = path[entry..].to_vec();
                    for &member in &cycle {
                        members.insert(member, index);
                        if member >= 1 && member <= bound {
                            table[(member - 1) as usize] = Entry {
                                attractor: index,
                                steps: 0,
                            };
                        }
                    }
                    found.push(cycle);
                    break (index, 0, entry);
                }
                on_path.insert(value, path.len());
                path.push(value);
                value = powers.step(value).ok_or_else(|| overflow(value))?;
            };
            for (k, &x) in path[..resolved_len].iter().enumerate() {
                if x >= 1 && x <= bound {
                    let steps = (resolved_len - k) as u64 + tail_steps;
                    table[(x - 1) as usize] = Entry {
                        attractor,
                        steps: u32::try_from(steps).map_err(|_| overflow(x))?,
                    };
                }
            }
        }

        // Renumber attractors into canonical order: fixed points ascending, then cycles.
        let ids: Vec<AttractorId> = found
            .into_iter()
            .map(|orbit| AttractorId::from_orbit(orbit.into_iter().map(Natural::from).collect()))
            .collect();
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        let mut renumber = vec![0u32; ids.len()];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new as u32;
        }
        for entry in &mut table {
            entry.attractor = renumber[entry.attractor as usize];
        }
        for index in members.values_mut() {
            *index = renumber[*index as usize];
        }
        let attractors: Vec<AttractorId> = order.iter().map(|&old| ids[old].clone()).collect();
        let fixed_points = attractors
            .iter()
            .filter_map(|a| match a {
                AttractorId::FixedPoint(p) => Some(p.clone()),
                AttractorId::Cycle(_) => None,
            })
            .collect();
        let cycles = attractors
            .iter()
            .filter(|a| matches!(a, AttractorId::Cycle(_)))
            .cloned()
            .collect();

        Ok(Self {
            e,
            bound,
            attractors,
            fixed_points,
            cycles,
            table,
            members,
            powers,
        })
    }

    pub fn e(&self) -> Exponent {
        self.e
    }

    /// `M_e`, the top of the memoized range.
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn fixed_points(&self) -> &[Natural] {
        &self.fixed_points
    }

    pub fn cycles(&self) -> &[AttractorId] {
        &self.cycles
    }

    /// All attractors in canonical order (fixed points ascending, then cycles).
    pub fn attractors(&self) -> &[AttractorId] {
        &self.attractors
    }

    /// `U_e`: every fixed point and cycle member, ascending.
    pub fn cycle_set(&self) -> Vec<Natural> {
        let mut set: Vec<u64> = self.members.keys().copied().collect();
        set.sort_unstable();
        set.into_iter().map(Natural::from).collect()
    }

    pub fn in_cycle_set(&self, n: u64) -> bool {
        self.members.contains_key(&n)
    }

    /// Memoized `(attractor, steps)` for `n` in `[1, M_e]` or on an attractor.
    pub fn lookup(&self, n: u64) -> Option<(&AttractorId, u64)> {
        self.lookup_index(n)
            .map(|(index, steps)| (&self.attractors[index], steps))
    }

    pub(crate) fn lookup_index(&self, n: u64) -> Option<(usize, u64)> {
        if let Some(&index) = self.members.get(&n) {
            return Some((index as usize, 0));
        }
        if n == 0 || n > self.bound {
            return None;
        }
        let entry = self.table[(n - 1) as usize];
        Some((entry.attractor as usize, u64::from(entry.steps)))
    }

    /// Attractor index and step count for any positive `n`, descending first
    /// when `n > M_e`.
    pub(crate) fn classify_index(&self, n: u64) -> Option<(usize, u64)> {
        let mut value = n;
        let mut steps = 0u64;
        loop {
            if let Some((index, tail)) = self.lookup_index(value) {
                return Some((index, steps + tail));
            }
            if value == 0 {
                return None;
            }
            value = self.powers.step(value)?;
            steps += 1;
        }
    }

    /// The attractor reached by `n` (positive) and the number of steps to reach it.
    pub fn classify_u64(&self, n: u64) -> Option<(&AttractorId, u64)> {
        self.classify_index(n)
            .map(|(index, steps)| (&self.attractors[index], steps))
    }

    /// CSV dump with columns `kind,members`; members are `;`-separated.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        // Writing into a Vec cannot fail.
        let _ = writer.write_record(["kind", "members"]);
        for attractor in &self.attractors {
            let _ = writer.write_record([attractor.kind().to_string(), attractor.members_text()]);
        }
        String::from_utf8(writer.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}
