//! Truncated 2-adic arithmetic: the halved maps extended to bit vectors, the
//! shift map, and the explicit conjugacy inverse, all with auditable
//! precision accounting. Every division by 2 costs one valid bit.

use crate::error::{Error, Result};
use crate::maps::{MapSpec, Variant};
use crate::rng;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

/// A 2-adic integer known to finitely many bits, least significant first.
/// The vector length is the precision; bits beyond it are unknown, not zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    bits: Vec<bool>,
}

impl Dyadic {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Precision { need: 1, have: 0 });
        }
        Ok(Self { bits })
    }

    /// Embed an integer (negatives in two's complement) to the given
    /// precision.
    pub fn from_integer(n: &BigInt, precision: usize) -> Result<Self> {
        if precision == 0 {
            return Err(Error::Precision { need: 1, have: 0 });
        }
        let modulus = BigInt::one() << precision;
        let mut r = n.mod_floor(&modulus);
        let mut bits = Vec::with_capacity(precision);
        for _ in 0..precision {
            bits.push(r.is_odd());
            r >>= 1;
        }
        Ok(Self { bits })
    }

    /// Uniformly random bits from a seeded stream.
    pub fn random<R: RngCore>(precision: usize, rng: &mut R) -> Result<Self> {
        if precision == 0 {
            return Err(Error::Precision { need: 1, have: 0 });
        }
        let mut bits = Vec::with_capacity(precision);
        let mut word = 0u64;
        for k in 0..precision {
            if k % 64 == 0 {
                word = rng.next_u64();
            }
            bits.push(word & 1 == 1);
            word >>= 1;
        }
        Ok(Self { bits })
    }

    pub fn precision(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, k: usize) -> Option<bool> {
        self.bits.get(k).copied()
    }

    /// Parity, i.e. the 2-adic residue mod 2.
    pub fn is_odd(&self) -> bool {
        self.bits[0]
    }

    /// The known residue: an integer in [0, 2^precision).
    pub fn to_residue(&self) -> BigInt {
        let mut v = BigInt::zero();
        for &b in self.bits.iter().rev() {
            v <<= 1;
            if b {
                v += 1;
            }
        }
        v
    }

    /// Keep only the first m bits.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.bits.len() {
            return Err(Error::Precision { need: m.max(1), have: self.bits.len() });
        }
        Ok(Self { bits: self.bits[..m].to_vec() })
    }

    /// Prefix agreement mod 2^n.
    pub fn congruent(&self, other: &Self, n: usize) -> Result<bool> {
        if n > self.bits.len() || n > other.bits.len() {
            return Err(Error::Precision { need: n, have: self.bits.len().min(other.bits.len()) });
        }
        Ok(self.bits[..n] == other.bits[..n])
    }

    pub fn flip_bit(&mut self, k: usize) -> Result<()> {
        if k >= self.bits.len() {
            return Err(Error::Precision { need: k + 1, have: self.bits.len() });
        }
        self.bits[k] = !self.bits[k];
        Ok(())
    }
}

impl std::fmt::Display for Dyadic {
    /// Dot-prefixed LSB-first digit string, the 2-adic analogue of a decimal
    /// expansion.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, ".")?;
        for &b in &self.bits {
            write!(f, "{}", u8::from(b))?;
        }
        Ok(())
    }
}

/// One step of the halved map extended 2-adically. Reads the parity from
/// bit 0 and spends one bit of precision on the halving.
pub fn apply_map_2adic(spec: &MapSpec, alpha: &Dyadic) -> Result<Dyadic> {
    if spec.variant() != Variant::T {
        return Err(Error::Domain(
            "2-adic extension is defined for the halved form".into(),
        ));
    }
    let m = alpha.precision();
    if m < 2 {
        return Err(Error::Precision { need: 2, have: m });
    }
    let v = alpha.to_residue();
    // odd branch: a*v + b is even because a, b are odd; the halving is exact
    // on residues and the result is valid mod 2^(m-1)
    let next = if alpha.is_odd() { (v * spec.multiplier() + spec.offset()) >> 1 } else { v >> 1 };
    Dyadic::from_integer(&next, m - 1)
}

/// The 2-adic shift: drop bit 0.
pub fn shift_2adic(alpha: &Dyadic) -> Result<Dyadic> {
    let m = alpha.precision();
    if m < 2 {
        return Err(Error::Precision { need: 2, have: m });
    }
    Dyadic::from_bits(alpha.bits[1..].to_vec())
}

/// First m bits of the conjugacy inverse: bit k is the parity of the k-th
/// forward iterate. Demands precision 2m so the whole orbit stays inside the
/// valid window with slack.
pub fn phi_inverse(spec: &MapSpec, alpha: &Dyadic, m: usize) -> Result<Dyadic> {
    if m == 0 {
        return Err(Error::Precision { need: 1, have: 0 });
    }
    if alpha.precision() < 2 * m {
        return Err(Error::Precision { need: 2 * m, have: alpha.precision() });
    }
    let mut bits = Vec::with_capacity(m);
    let mut x = alpha.clone();
    for k in 0..m {
        bits.push(x.is_odd());
        if k + 1 < m {
            x = apply_map_2adic(spec, &x)?;
        }
    }
    Dyadic::from_bits(bits)
}

/// Outcome of a randomized exact-bit verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct VerificationEvidence {
    pub trials: usize,
    pub failures: usize,
    pub bit_depth: usize,
}

impl VerificationEvidence {
    pub fn all_passed(&self) -> bool {
        self.failures == 0
    }
}

/// Whether the conjugacy inverse maps the pair to the same residue class
/// mod 2^n. The caller controls whether the inputs actually satisfy the
/// solenoidal hypothesis, so this doubles as the negative control.
pub fn solenoidal_agreement(
    spec: &MapSpec,
    x: &Dyadic,
    y: &Dyadic,
    n: usize,
) -> Result<bool> {
    let px = phi_inverse(spec, x, n)?;
    let py = phi_inverse(spec, y, n)?;
    px.congruent(&py, n)
}

/// Random pairs agreeing mod 2^n but free above: the conjugacy inverse must
/// map them to the same class mod 2^n, bit-exactly.
pub fn verify_solenoidal(
    spec: &MapSpec,
    bit_depth: usize,
    trials: usize,
    master_seed: u64,
) -> Result<VerificationEvidence> {
    if bit_depth == 0 {
        return Err(Error::Precision { need: 1, have: 0 });
    }
    let mut rng = rng::stream(master_seed, 0);
    let mut failures = 0;
    for _ in 0..trials {
        let shared = Dyadic::random(bit_depth, &mut rng)?;
        let mut x_bits = shared.bits.clone();
        let mut y_bits = shared.bits;
        let upper = Dyadic::random(bit_depth, &mut rng)?;
        x_bits.extend_from_slice(&upper.bits);
        let upper = Dyadic::random(bit_depth, &mut rng)?;
        y_bits.extend_from_slice(&upper.bits);
        let x = Dyadic::from_bits(x_bits)?;
        let y = Dyadic::from_bits(y_bits)?;
        if !solenoidal_agreement(spec, &x, &y, bit_depth)? {
            failures += 1;
        }
    }
    Ok(VerificationEvidence { trials, failures, bit_depth })
}

/// Exact finite-precision witness of the shift conjugacy: the first m-1 bits
/// of Φ⁻¹(T̃(α)) and S(Φ⁻¹(α)) must agree for random α.
pub fn verify_conjugacy(
    spec: &MapSpec,
    samples: usize,
    m: usize,
    master_seed: u64,
) -> Result<VerificationEvidence> {
    if m < 2 {
        return Err(Error::Precision { need: 2, have: m });
    }
    let mut rng = rng::stream(master_seed, 1);
    let mut failures = 0;
    for _ in 0..samples {
        let alpha = Dyadic::random(2 * m + 2, &mut rng)?;
        let lhs = phi_inverse(spec, &apply_map_2adic(spec, &alpha)?, m - 1)?;
        let rhs = shift_2adic(&phi_inverse(spec, &alpha, m)?)?;
        if !lhs.congruent(&rhs, m - 1)? {
            failures += 1;
        }
    }
    Ok(VerificationEvidence { trials: samples, failures, bit_depth: m - 1 })
}
