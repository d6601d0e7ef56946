//! Per-seed orbit statistics and the exhaustive record scanners behind the
//! empirical tables: stopping times, ones counts, excursions, scaled
//! trajectories.
//!
//! Scan kernels run in u64 as long as values fit and promote a seed to
//! arbitrary precision on the first overflow, so results are exact at any
//! scale while desk-scale ranges stay fast.

use crate::error::{Error, Result};
use crate::ld;
use crate::maps::{MapSpec, Variant};
use crate::numeric::big_ln;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

/// Default per-seed step budget for 3x+1-style scans (descending drift).
pub const DEFAULT_BUDGET_3X: usize = 100_000;
/// Default per-seed step budget when orbits are expected divergent (5x+1).
pub const DEFAULT_BUDGET_5X: usize = 10_000;

/// Sensible per-seed budget for the given map.
pub fn default_budget(spec: &MapSpec) -> usize {
    if spec.multiplier() == 3 {
        DEFAULT_BUDGET_3X
    } else {
        DEFAULT_BUDGET_5X
    }
}

/// Orbit value in a two-lane representation: u64 while it fits, arbitrary
/// precision after the first overflow. Negative values always take the big
/// lane.
#[derive(Debug, Clone)]
enum Value {
    Small(u64),
    Big(BigInt),
}

impl Value {
    fn from_i64(v: i64) -> Self {
        if v >= 0 {
            Value::Small(v as u64)
        } else {
            Value::Big(BigInt::from(v))
        }
    }

    fn step(&self, spec: &MapSpec) -> Result<Value> {
        match self {
            Value::Small(v) => match spec.apply_u64(*v) {
                Some(next) => Ok(Value::Small(next)),
                None => spec.apply(&BigInt::from(*v)).map(Value::Big),
            },
            Value::Big(b) => spec.apply(b).map(Value::Big),
        }
    }

    fn is_odd(&self) -> bool {
        match self {
            Value::Small(v) => v & 1 == 1,
            Value::Big(b) => b.is_odd(),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Value::Small(v) => *v == 0,
            Value::Big(b) => b.is_zero(),
        }
    }

    fn is_one(&self) -> bool {
        match self {
            Value::Small(v) => *v == 1,
            Value::Big(b) => *b == BigInt::from(1),
        }
    }

    fn abs_is_one(&self) -> bool {
        match self {
            Value::Small(v) => *v == 1,
            Value::Big(b) => b.magnitude().to_u64() == Some(1),
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Value::Small(v) => BigInt::from(*v),
            Value::Big(b) => b.clone(),
        }
    }

    fn abs_big(&self) -> BigInt {
        match self {
            Value::Small(v) => BigInt::from(*v),
            Value::Big(b) => b.abs(),
        }
    }

    fn to_f64(&self) -> f64 {
        match self {
            Value::Small(v) => *v as f64,
            Value::Big(b) => b.to_f64().unwrap_or(f64::INFINITY),
        }
    }

    fn ln_f64(&self) -> Result<f64> {
        match self {
            Value::Small(v) if *v > 0 => Ok((*v as f64).ln()),
            Value::Small(v) => Err(Error::Domain(format!("ln of non-positive value {v}"))),
            Value::Big(b) => big_ln(b),
        }
    }

    fn cmp_signed(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Small(a), Value::Small(b)) => a.cmp(b),
            (Value::Small(a), Value::Big(b)) => BigInt::from(*a).cmp(b),
            (Value::Big(a), Value::Small(b)) => a.cmp(&BigInt::from(*b)),
            (Value::Big(a), Value::Big(b)) => a.cmp(b),
        }
    }

    fn cmp_abs(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Small(a), Value::Small(b)) => a.cmp(b),
            _ => self.abs_big().cmp(&other.abs_big()),
        }
    }
}

/// Exact comparison of orbit values against λ·n, with the f64 λ decomposed
/// into its exact dyadic rational p/q, so v < λ·n becomes v·q < p·n in
/// integers.
struct RatioGate {
    num: BigInt, // p·n
    den: BigInt, // q
    fast: Option<(u128, u128)>,
}

impl RatioGate {
    fn new(lambda: f64, n: &BigInt) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Domain(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        let r = BigRational::from_float(lambda).expect("finite float is rational");
        let num = r.numer() * n;
        let den = r.denom().clone();
        let fast = match (num.to_u128(), den.to_u128()) {
            // den < 2^64 keeps v·den inside u128 for any u64 v
            (Some(a), Some(b)) if b.leading_zeros() >= 64 => Some((a, b)),
            _ => None,
        };
        Ok(Self { num, den, fast })
    }

    /// v < λ·n
    fn below(&self, v: &Value) -> bool {
        if let (Value::Small(x), Some((num, den))) = (v, self.fast) {
            if let Some(lhs) = (*x as u128).checked_mul(den) {
                return lhs < num;
            }
        }
        v.to_big() * &self.den < self.num
    }

    /// v > λ·n
    fn above(&self, v: &Value) -> bool {
        if let (Value::Small(x), Some((num, den))) = (v, self.fast) {
            if let Some(lhs) = (*x as u128).checked_mul(den) {
                return lhs > num;
            }
        }
        v.to_big() * &self.den > self.num
    }
}

/// Everything a single pass over one orbit produces.
struct Profile {
    sigma_lambda: Option<u64>,
    sigma_infty: Option<u64>,
    ones: u64,
    max: Value,
    min_abs: Value,
    exhausted: bool,
}

/// One pass over the orbit of `seed`, stopping at the absorbing fixed point
/// 0, at |value| = 1 (after at least one step for multipliers other than 3:
/// the 3x+1 convention lets the seed itself count, so σ∞(1) = 0, while the
/// 5x+1 convention requires a full return, σ∞(1; T₅) = 5), or at the step
/// budget.
fn run_profile(spec: &MapSpec, seed: Value, lambda: Option<f64>, budget: usize) -> Result<Profile> {
    let stop_floor: u64 = if spec.multiplier() == 3 { 0 } else { 1 };
    let gate = match lambda {
        Some(l) => Some(RatioGate::new(l, &seed.to_big())?),
        None => None,
    };
    let mut p = Profile {
        sigma_lambda: None,
        sigma_infty: None,
        ones: 0,
        max: seed.clone(),
        min_abs: seed.clone(),
        exhausted: false,
    };
    let mut v = seed;
    let mut k: u64 = 0;
    loop {
        if p.sigma_lambda.is_none() {
            if let Some(g) = &gate {
                if g.below(&v) {
                    p.sigma_lambda = Some(k);
                }
            }
        }
        if k > 0 {
            // iterate statistics exclude the seed; the loop exits exactly at
            // σ∞, so the final 1 is counted
            if v.is_odd() {
                p.ones += 1;
            }
            if v.cmp_signed(&p.max) == Ordering::Greater {
                p.max = v.clone();
            }
            if v.cmp_abs(&p.min_abs) == Ordering::Less {
                p.min_abs = v.clone();
            }
        }
        if v.is_zero() {
            break;
        }
        if k >= stop_floor && v.abs_is_one() {
            if v.is_one() {
                p.sigma_infty = Some(k);
            }
            break;
        }
        if k as usize >= budget {
            p.exhausted = true;
            break;
        }
        v = v.step(spec)?;
        k += 1;
    }
    Ok(p)
}

/// Full statistics bundle for one seed.
#[derive(Debug, Clone)]
pub struct SeedStats {
    pub seed: i64,
    pub sigma_lambda: Option<u64>,
    pub sigma_infty: Option<u64>,
    /// Odd iterates among steps 1..=σ∞ (partial count if the budget hit).
    pub ones: u64,
    pub max_excursion: BigInt,
    /// min |T^{(k)}(seed)| over the traversed prefix.
    pub min_excursion: BigInt,
    /// σ∞ / ln n, for n ≥ 2 with σ∞ defined.
    pub gamma_ratio: Option<f64>,
    /// ln t(n) / ln n, for n ≥ 2.
    pub rho_ratio: Option<f64>,
    pub ones_ratio: Option<f64>,
    pub budget_exhausted: bool,
}

fn build_stats(seed: i64, p: &Profile) -> SeedStats {
    let ln_n = if seed >= 2 { Some((seed as f64).ln()) } else { None };
    let gamma_ratio = match (p.sigma_infty, ln_n) {
        (Some(s), Some(l)) => Some(s as f64 / l),
        _ => None,
    };
    let rho_ratio = match (ln_n, p.max.ln_f64()) {
        (Some(l), Ok(lt)) => Some(lt / l),
        _ => None,
    };
    let ones_ratio = p
        .sigma_infty
        .filter(|&s| s > 0)
        .map(|s| p.ones as f64 / s as f64);
    SeedStats {
        seed,
        sigma_lambda: p.sigma_lambda,
        sigma_infty: p.sigma_infty,
        ones: p.ones,
        max_excursion: p.max.to_big(),
        min_excursion: p.min_abs.abs_big(),
        gamma_ratio,
        rho_ratio,
        ones_ratio,
        budget_exhausted: p.exhausted,
    }
}

/// Compute the whole statistics bundle for one seed in a single orbit pass.
/// `lambda` additionally tracks σ_λ when given.
pub fn seed_stats(
    spec: &MapSpec,
    seed: i64,
    lambda: Option<f64>,
    budget: usize,
) -> Result<SeedStats> {
    let p = run_profile(spec, Value::from_i64(seed), lambda, budget)?;
    Ok(build_stats(seed, &p))
}

/// σ_λ(n): least k ≥ 0 with T^{(k)}(n)/n < λ, compared exactly. 0 whenever
/// λ > 1. Absent when the budget runs out first (or when the orbit provably
/// never descends that far, e.g. λ·n ≤ 1 on a positive orbit).
pub fn lambda_stopping_time(
    spec: &MapSpec,
    n: u64,
    lambda: f64,
    budget: usize,
) -> Result<Option<u64>> {
    if n < 1 {
        return Err(Error::Domain("lambda stopping time needs n >= 1".into()));
    }
    Ok(run_profile(spec, Value::Small(n), Some(lambda), budget)?.sigma_lambda)
}

/// σ_λ⁺(n): least k ≥ 0 with T^{(k)}(n)/n > λ, for λ ≥ 1. Absent when the
/// budget runs out (seeds entering a bounded cycle below λ·n stay absent for
/// any budget).
pub fn lambda_plus_stopping_time(
    spec: &MapSpec,
    n: u64,
    lambda: f64,
    budget: usize,
) -> Result<Option<u64>> {
    if n < 1 {
        return Err(Error::Domain("lambda-plus stopping time needs n >= 1".into()));
    }
    if !(lambda >= 1.0) {
        return Err(Error::Domain(format!(
            "lambda-plus stopping time needs lambda >= 1, got {lambda}"
        )));
    }
    let gate = RatioGate::new(lambda, &BigInt::from(n))?;
    let mut v = Value::Small(n);
    for k in 0..=budget as u64 {
        if gate.above(&v) {
            return Ok(Some(k));
        }
        if k as usize == budget {
            break;
        }
        v = v.step(spec)?;
    }
    Ok(None)
}

/// σ∞(n): least k with T^{(k)}(n) = 1 (k ≥ 0 for multiplier 3, k ≥ 1
/// otherwise). Absent on budget exhaustion.
pub fn total_stopping_time(spec: &MapSpec, n: u64, budget: usize) -> Result<Option<u64>> {
    if n < 1 {
        return Err(Error::Domain("total stopping time needs n >= 1".into()));
    }
    Ok(run_profile(spec, Value::Small(n), None, budget)?.sigma_infty)
}

/// Number of odd values among T(n), ..., T^{(σ∞)}(n) = 1: the seed is
/// excluded, the final 1 counts. Errors when σ∞ is not reached in budget.
pub fn ones_count(spec: &MapSpec, n: u64, budget: usize) -> Result<u64> {
    if n < 1 {
        return Err(Error::Domain("ones count needs n >= 1".into()));
    }
    let p = run_profile(spec, Value::Small(n), None, budget)?;
    if p.sigma_infty.is_none() {
        return Err(Error::Undefined(format!(
            "ones({n}) undefined: total stopping time not reached within {budget} steps"
        )));
    }
    Ok(p.ones)
}

/// An orbit extreme, with a truncation flag when the budget cut the orbit
/// short (the extreme then covers only the traversed prefix).
#[derive(Debug, Clone)]
pub struct Excursion {
    pub value: BigInt,
    pub truncated: bool,
}

/// t(n) = max T^{(k)}(n) over the orbit through its arrival at 1.
pub fn max_excursion(spec: &MapSpec, n: u64, budget: usize) -> Result<Excursion> {
    if n < 1 {
        return Err(Error::Domain("max excursion needs n >= 1".into()));
    }
    let p = run_profile(spec, Value::Small(n), None, budget)?;
    Ok(Excursion { value: p.max.to_big(), truncated: p.exhausted })
}

/// t⁻(n) = min |T^{(k)}(n)|, defined for any integer seed (0 is an absorbing
/// fixed point with t⁻(0) = 0).
pub fn min_excursion_abs(spec: &MapSpec, seed: i64, budget: usize) -> Result<Excursion> {
    let p = run_profile(spec, Value::from_i64(seed), None, budget)?;
    Ok(Excursion { value: p.min_abs.abs_big(), truncated: p.exhausted })
}

/// Record-scan statistics. The ratio statistics (γ∞, ones-ratio, σ∞) scan
/// odd seeds from 3: even seeds carry trivial halving prefixes that shadow
/// the meaningful records (ones-ratio(2) = 1). Excursion statistics scan
/// every seed from 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Statistic {
    GammaInfty,
    OnesRatio,
    SigmaInfty,
    MaxExcursion,
    Rho,
}

impl Statistic {
    pub fn odd_domain(self) -> bool {
        matches!(self, Statistic::GammaInfty | Statistic::OnesRatio | Statistic::SigmaInfty)
    }

    pub fn domain_start(self) -> u64 {
        if self.odd_domain() {
            3
        } else {
            2
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistic::GammaInfty => "gamma",
            Statistic::OnesRatio => "ones_ratio",
            Statistic::SigmaInfty => "sigma",
            Statistic::MaxExcursion => "t",
            Statistic::Rho => "rho",
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn stat_value(statistic: Statistic, p: &Profile, seed: u64) -> Option<f64> {
    let ln_n = if seed >= 2 { Some((seed as f64).ln()) } else { None };
    match statistic {
        Statistic::GammaInfty => Some(p.sigma_infty? as f64 / ln_n?),
        Statistic::OnesRatio => {
            let s = p.sigma_infty.filter(|&s| s > 0)?;
            Some(p.ones as f64 / s as f64)
        }
        Statistic::SigmaInfty => Some(p.sigma_infty? as f64),
        Statistic::MaxExcursion => Some(p.max.to_f64()),
        Statistic::Rho => Some(p.max.ln_f64().ok()? / ln_n?),
    }
}

#[derive(Debug, Clone)]
pub struct RecordEntry {
    /// 1-based rank in the record list.
    pub rank: usize,
    pub seed: u64,
    pub value: f64,
    pub stats: SeedStats,
}

#[derive(Debug, Clone)]
pub struct RecordList {
    pub statistic: Statistic,
    pub entries: Vec<RecordEntry>,
}

/// Seeds per parallel work unit. Fixed, so the block partition (and hence
/// the merged output) is identical for every worker count.
const SCAN_BLOCK: u64 = 1 << 16;

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn block_ranges(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut blocks = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = hi.min(start.saturating_add(SCAN_BLOCK - 1));
        blocks.push((start, end));
        if end == u64::MAX {
            break;
        }
        start = end + 1;
    }
    blocks
}

/// Exhaustive record scan over `range`, restricted to the statistic's
/// domain. Work is split over fixed seed blocks scanned in parallel; block
/// results merge in seed order, so the output is deterministic and
/// independent of the worker count. Seeds whose orbit exhausts the budget
/// are skipped (their statistics are not final). Ties never enter: a record
/// must strictly exceed the running maximum, so the smallest seed holding a
/// value wins.
pub fn scan_records(
    spec: &MapSpec,
    statistic: Statistic,
    range: RangeInclusive<u64>,
    budget: usize,
    workers: Option<usize>,
) -> Result<RecordList> {
    let lo = (*range.start()).max(statistic.domain_start());
    let hi = *range.end();
    if hi > i64::MAX as u64 {
        return Err(Error::Domain("seed range exceeds i64".into()));
    }
    let blocks = block_ranges(lo, hi);
    let per_block: Vec<Vec<(u64, f64, Profile)>> = with_pool(workers, || {
        blocks
            .par_iter()
            .map(|&(blo, bhi)| scan_block(spec, statistic, blo, bhi, budget))
            .collect::<Result<Vec<_>>>()
    })??;

    let mut entries = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for block in per_block {
        for (seed, value, profile) in block {
            if value > best {
                best = value;
                entries.push(RecordEntry {
                    rank: entries.len() + 1,
                    seed,
                    value,
                    stats: build_stats(seed as i64, &profile),
                });
            }
        }
    }
    Ok(RecordList { statistic, entries })
}

fn scan_block(
    spec: &MapSpec,
    statistic: Statistic,
    blo: u64,
    bhi: u64,
    budget: usize,
) -> Result<Vec<(u64, f64, Profile)>> {
    let mut out = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let step = if statistic.odd_domain() { 2 } else { 1 };
    let mut n = blo;
    if statistic.odd_domain() && n & 1 == 0 {
        n += 1;
    }
    while n <= bhi {
        let p = run_profile(spec, Value::Small(n), None, budget)?;
        if !p.exhausted {
            if let Some(v) = stat_value(statistic, &p, n) {
                if v > best {
                    best = v;
                    out.push((n, v, p));
                }
            }
        }
        match n.checked_add(step) {
            Some(next) => n = next,
            None => break,
        }
    }
    Ok(out)
}

/// Odd seeds in `range` whose excursion ratio ρ(n) = ln t(n)/ln n exceeds
/// `threshold`, with their ratios. Budget-exhausted orbits are skipped.
pub fn rho_exceeding(
    spec: &MapSpec,
    range: RangeInclusive<u64>,
    threshold: f64,
    budget: usize,
    workers: Option<usize>,
) -> Result<Vec<(u64, f64)>> {
    let lo = (*range.start()).max(3);
    let hi = *range.end();
    if hi > i64::MAX as u64 {
        return Err(Error::Domain("seed range exceeds i64".into()));
    }
    let blocks = block_ranges(lo, hi);
    let per_block: Vec<Vec<(u64, f64)>> = with_pool(workers, || {
        blocks
            .par_iter()
            .map(|&(blo, bhi)| -> Result<Vec<(u64, f64)>> {
                let mut out = Vec::new();
                let mut n = if blo & 1 == 0 { blo + 1 } else { blo };
                while n <= bhi {
                    let p = run_profile(spec, Value::Small(n), None, budget)?;
                    if !p.exhausted {
                        if let Some(rho) = stat_value(Statistic::Rho, &p, n) {
                            if rho > threshold {
                                out.push((n, rho));
                            }
                        }
                    }
                    n += 2;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(per_block.into_iter().flatten().collect())
}

/// A trajectory rescaled to (k/ln n, ln T^{(k)}(n)/ln n), together with the
/// predicted envelope polylines for the 3x+1 halved map: the stopping
/// overlay from (0,1) down to (γ, 0), and the extremal-excursion overlay
/// rising at slope (3/4)ln3 − ln2 to height 2 and descending at the mean
/// drift.
#[derive(Debug, Clone)]
pub struct ScaledTrajectory {
    pub seed: u64,
    pub points: Vec<(f64, f64)>,
    pub truncated: bool,
    pub stopping_overlay: Option<[(f64, f64); 2]>,
    pub excursion_overlay: Option<[(f64, f64); 3]>,
}

pub fn scaled_trajectory(spec: &MapSpec, n: u64, budget: usize) -> Result<ScaledTrajectory> {
    if n < 2 {
        return Err(Error::Domain("scaled trajectory needs n >= 2".into()));
    }
    let ln_n = (n as f64).ln();
    let stop_floor: u64 = if spec.multiplier() == 3 { 0 } else { 1 };
    let mut points = Vec::new();
    let mut truncated = false;
    let mut v = Value::Small(n);
    let mut k: u64 = 0;
    loop {
        points.push((k as f64 / ln_n, v.ln_f64()? / ln_n));
        if k >= stop_floor && v.abs_is_one() {
            break;
        }
        if k as usize >= budget {
            truncated = true;
            break;
        }
        v = v.step(spec)?;
        k += 1;
    }
    let overlays = if spec.multiplier() == 3 && spec.variant() == Variant::T {
        let gamma = ld::solve_gamma(&ld::Mgf::rrw(3))?.gamma;
        let slope = 0.75 * 3f64.ln() - 2f64.ln();
        let peak_x = 1.0 / slope;
        let end_x = peak_x + 2.0 / (0.5 * (4f64 / 3.0).ln());
        (
            Some([(0.0, 1.0), (gamma, 0.0)]),
            Some([(0.0, 1.0), (peak_x, 2.0), (end_x, 0.0)]),
        )
    } else {
        (None, None)
    };
    Ok(ScaledTrajectory {
        seed: n,
        points,
        truncated,
        stopping_overlay: overlays.0,
        excursion_overlay: overlays.1,
    })
}

impl RecordList {
    /// Fixed-layout CSV. Ratio statistics use the stopping-time table layout
    /// (k,n,sigma,ones,ones_ratio,gamma); excursion statistics use the
    /// excursion table layout (k,n,t,r,rho) with r = t/n².
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match self.statistic {
            Statistic::GammaInfty | Statistic::OnesRatio | Statistic::SigmaInfty => {
                s.push_str("k,n,sigma,ones,ones_ratio,gamma\n");
                for e in &self.entries {
                    let st = &e.stats;
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{:.6},{:.6}",
                        e.rank,
                        e.seed,
                        st.sigma_infty.map(|v| v.to_string()).unwrap_or_default(),
                        st.ones,
                        st.ones_ratio.unwrap_or(f64::NAN),
                        st.gamma_ratio.unwrap_or(f64::NAN),
                    );
                }
            }
            Statistic::MaxExcursion | Statistic::Rho => {
                s.push_str("k,n,t,r,rho\n");
                for e in &self.entries {
                    let st = &e.stats;
                    let t_f = st.max_excursion.to_f64().unwrap_or(f64::INFINITY);
                    let r = t_f / (e.seed as f64).powi(2);
                    let _ = writeln!(
                        s,
                        "{},{},{},{:.3},{:.3}",
                        e.rank,
                        e.seed,
                        st.max_excursion,
                        r,
                        st.rho_ratio.unwrap_or(f64::NAN),
                    );
                }
            }
        }
        s
    }
}
