//! Map families and the basic iteration engine.
//!
//! Three variants per odd multiplier `a` (with odd offset `b`, normally 1):
//!
//! * `C`: n -> a*n + b for odd n, n/2 for even n
//! * `T`: n -> (a*n + b)/2 for odd n, n/2 for even n
//! * `U`: odd n -> (a*n + b) / 2^ord2(a*n + b), the accelerated map on odds
//!
//! All arithmetic is exact; values are signed big integers so orbits of
//! negative seeds and the huge excursions of 5x+1 orbits are handled without
//! overflow.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Variant {
    /// Classic form: `a*n + b` on odds.
    C,
    /// Halved form: `(a*n + b)/2` on odds.
    T,
    /// Accelerated form: divides out every power of 2 in one step; odd inputs only.
    U,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::C => write!(f, "C"),
            Variant::T => write!(f, "T"),
            Variant::U => write!(f, "U"),
        }
    }
}

/// Which map family to iterate: multiplier, offset, variant.
///
/// `prune_modulus` is the modulus used by inverse-tree pruning and equals `a`
/// for the standard `b = 1` maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct MapSpec {
    multiplier: u64,
    offset: i64,
    variant: Variant,
}

impl MapSpec {
    pub fn new(multiplier: u64, offset: i64, variant: Variant) -> Result<Self> {
        if multiplier < 3 || multiplier % 2 == 0 {
            return Err(Error::InvalidMapSpec(format!(
                "multiplier must be odd and >= 3, got {multiplier}"
            )));
        }
        if offset % 2 == 0 {
            return Err(Error::InvalidMapSpec(format!(
                "offset must be odd, got {offset}"
            )));
        }
        Ok(Self { multiplier, offset, variant })
    }

    /// The 3x+1 map in halved form.
    pub fn t3() -> Self {
        Self { multiplier: 3, offset: 1, variant: Variant::T }
    }

    /// The 5x+1 map in halved form.
    pub fn t5() -> Self {
        Self { multiplier: 5, offset: 1, variant: Variant::T }
    }

    pub fn c3() -> Self {
        Self { multiplier: 3, offset: 1, variant: Variant::C }
    }

    pub fn u3() -> Self {
        Self { multiplier: 3, offset: 1, variant: Variant::U }
    }

    pub fn u5() -> Self {
        Self { multiplier: 5, offset: 1, variant: Variant::U }
    }

    /// Standard map for a given odd multiplier g (3 or 5) in halved form.
    pub fn halved(g: u64) -> Result<Self> {
        Self::new(g, 1, Variant::T)
    }

    pub fn multiplier(&self) -> u64 {
        self.multiplier
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn with_variant(self, variant: Variant) -> Self {
        Self { variant, ..self }
    }

    /// Modulus used by inverse-tree pruning; equals the multiplier when b = 1.
    pub fn prune_modulus(&self) -> u64 {
        self.multiplier
    }

    /// Apply one step of the map. For variant `U` the input must be odd.
    pub fn apply(&self, n: &BigInt) -> Result<BigInt> {
        match self.variant {
            Variant::C => {
                if n.is_odd() {
                    Ok(self.ax_plus_b(n))
                } else {
                    Ok(n >> 1)
                }
            }
            Variant::T => {
                if n.is_odd() {
                    Ok(self.ax_plus_b(n) >> 1)
                } else {
                    Ok(n >> 1)
                }
            }
            Variant::U => {
                if !n.is_odd() {
                    return Err(Error::AcceleratedOnEven);
                }
                let x = self.ax_plus_b(n);
                if x.is_zero() {
                    return Err(Error::AcceleratedHitZero);
                }
                let e = x.trailing_zeros().expect("nonzero");
                Ok(x >> e)
            }
        }
    }

    /// The exponent consumed by one accelerated step: ord2(a*n + b) for odd n.
    pub fn step_exponent(&self, n: &BigInt) -> Result<u64> {
        if !n.is_odd() {
            return Err(Error::AcceleratedOnEven);
        }
        let x = self.ax_plus_b(n);
        ord2(&x)
    }

    fn ax_plus_b(&self, n: &BigInt) -> BigInt {
        n * self.multiplier + self.offset
    }

    /// One step on machine words. Returns `None` on overflow; callers fall
    /// back to the big-integer path. Variant `U` is excluded here (scans use
    /// C/T forms).
    #[inline]
    pub(crate) fn apply_u64(&self, n: u64) -> Option<u64> {
        if self.offset != 1 {
            return None; // exotic offsets take the arbitrary-precision lane
        }
        if n & 1 == 0 {
            if matches!(self.variant, Variant::U) {
                return None; // undefined on evens; the exact lane reports the error
            }
            Some(n >> 1)
        } else {
            let x = n.checked_mul(self.multiplier)?.checked_add(1)?;
            match self.variant {
                Variant::C => Some(x),
                Variant::T => Some(x >> 1),
                Variant::U => Some(x >> x.trailing_zeros()),
            }
        }
    }
}

/// Largest k with 2^k dividing n. Errors on n = 0.
pub fn ord2(n: &BigInt) -> Result<u64> {
    n.trailing_zeros().ok_or(Error::Ord2OfZero)
}

/// Stopping rules for `iterate`. A closed enumeration so scan loops stay
/// allocation-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopCondition {
    /// Stop at the first k >= 0 with value = v (a seed already equal to v
    /// stops immediately).
    ReachValue(BigInt),
    /// Stop at the first k >= 1 with value = seed (cycle return).
    ReturnToSeed,
    /// Stop at the first k >= 0 with value < threshold.
    ValueBelow(BigInt),
    /// Stop at the first k >= 0 with value > threshold.
    ValueAbove(BigInt),
    /// Run exactly this many steps.
    Steps(usize),
}

/// A finite orbit prefix with its parity trace.
///
/// `values[0]` is the seed; `values[k+1] = map(values[k])`. For variant `U`
/// the `exponent_trace` records ord2(a*v + b) per step, so the orbit can be
/// reconstructed exactly from seed and trace.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub seed: BigInt,
    pub values: Vec<BigInt>,
    pub parity_bits: Vec<bool>,
    pub exponent_trace: Option<Vec<u64>>,
    pub truncated: bool,
}

impl Orbit {
    /// Number of steps taken (values.len() - 1).
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn last(&self) -> &BigInt {
        self.values.last().expect("orbit holds at least the seed")
    }

    /// Re-verify the chain invariant values[k+1] = map(values[k]) and the
    /// parity/exponent traces.
    pub fn verify(&self, spec: &MapSpec) -> Result<()> {
        if self.values.first() != Some(&self.seed) {
            return Err(Error::Domain("orbit does not start at seed".into()));
        }
        for (k, w) in self.values.windows(2).enumerate() {
            let expect = spec.apply(&w[0])?;
            if expect != w[1] {
                return Err(Error::Domain(format!("chain broken at step {k}")));
            }
        }
        for (v, &p) in self.values.iter().zip(&self.parity_bits) {
            if v.is_odd() != p {
                return Err(Error::Domain("parity trace mismatch".into()));
            }
        }
        if let Some(trace) = &self.exponent_trace {
            let mut v = self.seed.clone();
            for &e in trace {
                if spec.step_exponent(&v)? != e {
                    return Err(Error::Domain("exponent trace mismatch".into()));
                }
                v = spec.apply(&v)?;
            }
        }
        Ok(())
    }
}

/// Iterate `spec` from `seed` until `stop` fires or `budget` steps elapse.
///
/// A truncated orbit is a normal result, not an error: 5x+1 orbits are
/// expected to diverge, so every open-ended iteration carries a budget.
pub fn iterate(spec: &MapSpec, seed: BigInt, stop: &StopCondition, budget: usize) -> Result<Orbit> {
    let track_exponents = spec.variant() == Variant::U;
    let mut values = Vec::with_capacity(16);
    let mut parity_bits = Vec::with_capacity(16);
    let mut exponent_trace = track_exponents.then(Vec::new);

    let mut current = seed.clone();
    values.push(current.clone());
    parity_bits.push(current.is_odd());

    let done = |k: usize, v: &BigInt| -> bool {
        match stop {
            StopCondition::ReachValue(target) => v == target,
            StopCondition::ReturnToSeed => k >= 1 && v == &seed,
            StopCondition::ValueBelow(threshold) => v < threshold,
            StopCondition::ValueAbove(threshold) => v > threshold,
            StopCondition::Steps(n) => k >= *n,
        }
    };

    let mut k = 0;
    let mut truncated = false;
    while !done(k, &current) {
        if k >= budget {
            truncated = true;
            break;
        }
        if let Some(trace) = exponent_trace.as_mut() {
            trace.push(spec.step_exponent(&current)?);
        }
        current = spec.apply(&current)?;
        values.push(current.clone());
        parity_bits.push(current.is_odd());
        k += 1;
    }

    Ok(Orbit { seed, values, parity_bits, exponent_trace, truncated })
}

/// Convenience: orbit of `n` under the map until it reaches 1 (or budget).
pub fn orbit_to_one(spec: &MapSpec, n: u64, budget: usize) -> Result<Orbit> {
    iterate(spec, BigInt::from(n), &StopCondition::ReachValue(BigInt::one()), budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply_i(spec: &MapSpec, n: i64) -> i64 {
        let v = spec.apply(&big(n)).unwrap();
        i64::try_from(&v).unwrap()
    }

    #[test]
    fn t3_basic_values() {
        let t3 = MapSpec::t3();
        assert_eq!(apply_i(&t3, 3), 5);
        assert_eq!(apply_i(&t3, 2), 1);
        assert_eq!(apply_i(&t3, 1), 2);
        // negative orbit {-5, -7, -10}
        assert_eq!(apply_i(&t3, -5), -7);
        assert_eq!(apply_i(&t3, -7), -10);
        assert_eq!(apply_i(&t3, -10), -5);
        assert_eq!(apply_i(&t3, -1), -1);
    }

    #[test]
    fn t5_basic_values() {
        let t5 = MapSpec::t5();
        assert_eq!(apply_i(&t5, 1), 3);
        assert_eq!(apply_i(&t5, 3), 8);
        assert_eq!(apply_i(&t5, 7), 18);
    }

    #[test]
    fn c3_compresses_to_t3() {
        let c3 = MapSpec::c3();
        let t3 = MapSpec::t3();
        assert_eq!(apply_i(&c3, 3), 10);
        // C(C(2n+1)) = T(2n+1), and C(2n) = T(2n) = n
        for n in -50i64..50 {
            let odd = 2 * n + 1;
            let c2 = c3.apply(&c3.apply(&big(odd)).unwrap()).unwrap();
            assert_eq!(c2, t3.apply(&big(odd)).unwrap());
            assert_eq!(c3.apply(&big(2 * n)).unwrap(), big(n));
        }
    }

    #[test]
    fn u3_divides_out_all_twos() {
        let u3 = MapSpec::u3();
        // 3*17 + 1 = 52 = 4*13
        assert_eq!(apply_i(&u3, 17), 13);
        assert_eq!(apply_i(&u3, 1), 1);
        // 3*7 + 1 = 22 = 2*11
        assert_eq!(apply_i(&u3, 7), 11);
        assert!(matches!(u3.apply(&big(4)), Err(Error::AcceleratedOnEven)));
    }

    #[test]
    fn u3_preserves_coprime_to_six() {
        let u3 = MapSpec::u3();
        for n in (1..2000i64).step_by(2) {
            if n % 3 == 0 {
                continue;
            }
            let m = u3.apply(&big(n)).unwrap();
            assert!(m.is_odd());
            assert!(!(&m % 3i32).is_zero(), "U3({n}) = {m} divisible by 3");
        }
    }

    #[test]
    fn ord2_values() {
        assert_eq!(ord2(&big(8)).unwrap(), 3);
        assert_eq!(ord2(&big(22)).unwrap(), 1);
        assert_eq!(ord2(&big(7)).unwrap(), 0);
        assert_eq!(ord2(&big(-24)).unwrap(), 3);
        assert!(matches!(ord2(&big(0)), Err(Error::Ord2OfZero)));
    }

    #[test]
    fn iterate_reaches_one() {
        let orbit = orbit_to_one(&MapSpec::t3(), 3, 100).unwrap();
        let vals: Vec<i64> = orbit.values.iter().map(|v| i64::try_from(v).unwrap()).collect();
        assert_eq!(vals, vec![3, 5, 8, 4, 2, 1]);
        assert_eq!(orbit.steps(), 5);
        assert!(!orbit.truncated);
        orbit.verify(&MapSpec::t3()).unwrap();
    }

    #[test]
    fn iterate_seed_already_at_target() {
        let orbit = orbit_to_one(&MapSpec::t3(), 1, 100).unwrap();
        assert_eq!(orbit.steps(), 0);
        assert!(!orbit.truncated);
    }

    #[test]
    fn iterate_cycle_return() {
        // 13 -> 33 -> 83 -> 208 -> 104 -> 52 -> 26 -> 13 under T5
        let orbit =
            iterate(&MapSpec::t5(), big(13), &StopCondition::ReturnToSeed, 100).unwrap();
        let vals: Vec<i64> = orbit.values.iter().map(|v| i64::try_from(v).unwrap()).collect();
        assert_eq!(vals, vec![13, 33, 83, 208, 104, 52, 26, 13]);
        assert_eq!(orbit.steps(), 7);
    }

    #[test]
    fn iterate_budget_truncates() {
        let orbit = iterate(
            &MapSpec::t5(),
            big(7),
            &StopCondition::ReachValue(BigInt::one()),
            10,
        )
        .unwrap();
        assert!(orbit.truncated);
        assert_eq!(orbit.steps(), 10);
        orbit.verify(&MapSpec::t5()).unwrap();
    }

    #[test]
    fn iterate_value_conditions() {
        // sigma_lambda style: first iterate of 3 below 3 is 2 at k = 4
        let orbit = iterate(&MapSpec::t3(), big(3), &StopCondition::ValueBelow(big(3)), 100)
            .unwrap();
        assert_eq!(orbit.steps(), 4);
        assert_eq!(orbit.last(), &big(2));

        let orbit = iterate(&MapSpec::t5(), big(7), &StopCondition::ValueAbove(big(14)), 100)
            .unwrap();
        assert_eq!(orbit.steps(), 1);
        assert_eq!(orbit.last(), &big(18));

        let orbit = iterate(&MapSpec::t3(), big(6), &StopCondition::Steps(3), 100).unwrap();
        assert_eq!(orbit.steps(), 3);
        assert_eq!(orbit.last(), &big(8));
    }

    #[test]
    fn exponent_trace_reconstructs_orbit() {
        let u3 = MapSpec::u3();
        let orbit = iterate(&u3, big(7), &StopCondition::Steps(5), 100).unwrap();
        let trace = orbit.exponent_trace.as_ref().unwrap();
        assert_eq!(trace.len(), 5);
        let mut v = big(7);
        for (&e, expect) in trace.iter().zip(&orbit.values[1..]) {
            v = (&v * 3 + 1) >> e;
            assert_eq!(&v, expect);
        }
        orbit.verify(&u3).unwrap();
    }

    #[test]
    fn fast_path_matches_bigint() {
        for spec in [MapSpec::t3(), MapSpec::t5(), MapSpec::c3()] {
            for n in 1u64..5000 {
                let fast = spec.apply_u64(n).unwrap();
                let slow = spec.apply(&BigInt::from(n)).unwrap();
                assert_eq!(BigInt::from(fast), slow, "spec {spec:?} n {n}");
            }
        }
        for n in (1u64..5000).step_by(2) {
            let u3 = MapSpec::u3();
            assert_eq!(
                BigInt::from(u3.apply_u64(n).unwrap()),
                u3.apply(&BigInt::from(n)).unwrap()
            );
        }
        // overflow reported, not wrapped; U on evens defers to the exact lane
        assert_eq!(MapSpec::t3().apply_u64(u64::MAX), None);
        assert_eq!(MapSpec::u3().apply_u64(4), None);
    }

    #[test]
    fn spec_validation() {
        assert!(MapSpec::new(4, 1, Variant::T).is_err());
        assert!(MapSpec::new(1, 1, Variant::T).is_err());
        assert!(MapSpec::new(3, 2, Variant::T).is_err());
        assert!(MapSpec::new(7, -1, Variant::T).is_ok());
    }
}
