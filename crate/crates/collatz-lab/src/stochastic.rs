//! Simulators for the random-walk and branching-random-walk models of the
//! iteration, in log scale.
//!
//! Conventions. Positions here are the walk values Z_k themselves (log of
//! the modelled iterate), so the forward-walk drift is negative for the 3x
//! case and positive for the 5x case. The analytic module `ld` measures the
//! same steps as descents; the two conventions differ by a sign.
//!
//! Reproducibility. Every public entry point that owns randomness keys a
//! ChaCha8 stream by (master seed, stream id) via [`crate::rng::stream`],
//! with one stream per trial or per walker seed. Aggregates are sums and
//! minima, so results are byte-identical for any worker count.

use std::f64::consts::LN_2;
use std::io::Write;
use std::ops::RangeInclusive;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;
use crate::trees;

/// Default ceiling on total stored individuals in one branching realization.
pub const DEFAULT_POPULATION_CAP: usize = 10_000_000;

/// Finite-atom step distribution of a walk on the line, with its first two
/// moments frozen at construction.
#[derive(Debug, Clone, Serialize)]
pub struct WalkModel {
    atoms: Vec<(f64, f64)>, // (probability, step)
    drift: f64,
    sigma: f64,
}

impl WalkModel {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("walk model needs at least one atom".into()));
        }
        if atoms.iter().any(|&(p, s)| !(p > 0.0) || !s.is_finite()) {
            return Err(Error::Domain("step probabilities must be positive and steps finite".into()));
        }
        let total: f64 = atoms.iter().map(|&(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("step probabilities must sum to 1, got {total}")));
        }
        let drift: f64 = atoms.iter().map(|&(p, s)| p * s).sum();
        let var: f64 = atoms.iter().map(|&(p, s)| p * (s - drift) * (s - drift)).sum();
        Ok(Self { atoms, drift, sigma: var.sqrt() })
    }

    /// Step law of the halved map's log-size walk: up ln(g/2) or down ln 2,
    /// equal odds. Drift (1/2)ln(g/4), per-step deviation (1/2)ln g.
    pub fn rrw(g: u64) -> Result<Self> {
        if g < 3 || g % 2 == 0 {
            return Err(Error::InvalidMapSpec(format!("multiplier must be odd and >= 3, got {g}")));
        }
        let gf = g as f64;
        Self::new(vec![(0.5, (gf / 2.0).ln()), (0.5, -LN_2)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// One step by inverse CDF over the atoms, in storage order. The final
    /// atom absorbs the rounding tail, so a generator pinned at the top of
    /// the unit interval deterministically picks the last atom.
    pub fn sample_step<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(p, s) in &self.atoms[..self.atoms.len() - 1] {
            acc += p;
            if u < acc {
                return s;
            }
        }
        self.atoms[self.atoms.len() - 1].1
    }
}

/// Partial-sum path Z_0 = z0, Z_k = Z_{k-1} + step. Length steps + 1.
pub fn brw_path<R: Rng>(model: &WalkModel, z0: f64, steps: usize, rng: &mut R) -> Vec<f64> {
    let mut path = Vec::with_capacity(steps + 1);
    let mut z = z0;
    path.push(z);
    for _ in 0..steps {
        z += model.sample_step(rng);
        path.push(z);
    }
    path
}

/// Outcome of one walk run, with first passage and running extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkSummary {
    pub start: f64,
    /// First k >= 1 with Z_k <= 0, if reached within the steps taken.
    pub steps_to_passage: Option<u64>,
    pub steps_taken: u64,
    /// sup Z_k over k = 0..=steps_taken (log of the peak excursion).
    pub log_peak: f64,
    /// inf Z_k over k = 0..=steps_taken (log of the minimal excursion).
    pub log_trough: f64,
}

fn walk_core<R: Rng>(
    model: &WalkModel,
    z0: f64,
    budget: u64,
    stop_at_passage: bool,
    rng: &mut R,
) -> WalkSummary {
    let mut z = z0;
    let mut peak = z0;
    let mut trough = z0;
    let mut steps = 0u64;
    let mut passage = None;
    while steps < budget {
        z += model.sample_step(rng);
        steps += 1;
        peak = peak.max(z);
        trough = trough.min(z);
        if z <= 0.0 && passage.is_none() {
            passage = Some(steps);
            if stop_at_passage {
                break;
            }
        }
    }
    WalkSummary { start: z0, steps_to_passage: passage, steps_taken: steps, log_peak: peak, log_trough: trough }
}

/// Run one walk from z0 until it first reaches Z_k <= 0 (k >= 1) or
/// exhausts `budget` steps. This is the stopping-time view: steps_taken is
/// the passage step itself when one occurs.
pub fn walk_until_passage<R: Rng>(model: &WalkModel, z0: f64, budget: u64, rng: &mut R) -> WalkSummary {
    walk_core(model, z0, budget, true, rng)
}

/// Run one walk for exactly `budget` steps, recording the first passage
/// step if any. Divergent-model statistics (peak before escape, minimal
/// excursion) need the path beyond the first zero crossing, so nothing
/// stops early here.
pub fn walk_full<R: Rng>(model: &WalkModel, z0: f64, budget: u64, rng: &mut R) -> WalkSummary {
    walk_core(model, z0, budget, false, rng)
}

/// One repeated-random-walk trial: the independent walk attached to seed n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RrwTrial {
    pub n: u64,
    #[serde(flatten)]
    pub walk: WalkSummary,
}

/// Independent walks for every n in the range, walker n starting at ln n.
/// Stream ids are the seeds themselves, so any sub-range reproduces the
/// exact same per-seed walks. Each walk runs its full budget: peak and
/// trough statistics belong to the whole trajectory, not the stopped one,
/// and the first passage step is recorded on the way.
pub fn rrw_trials(
    model: &WalkModel,
    master_seed: u64,
    seeds: RangeInclusive<u64>,
    budget: u64,
) -> Result<Vec<RrwTrial>> {
    if *seeds.start() < 1 {
        return Err(Error::Domain("walker seeds start at 1 (position is ln n)".into()));
    }
    let mut out = Vec::with_capacity((seeds.end() + 1 - seeds.start()) as usize);
    for n in seeds {
        let mut rng = rng::stream(master_seed, n);
        out.push(RrwTrial { n, walk: walk_full(model, (n as f64).ln(), budget, &mut rng) });
    }
    Ok(out)
}

/// Kolmogorov-Smirnov distance between a sample and a reference CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Branching random walk over residue types mod g^level. Level 0 is the
/// untyped walk: one child shifted ln 2, plus with probability 1/g a second
/// child shifted ln(2/g). For level >= 1 the same marginal arises from a
/// typed rule: lift the parent's residue uniformly to mod g^{level+1}, then
/// take the deterministic pruned inverse image of the lift.
#[derive(Debug, Clone, Serialize)]
pub struct BranchModel {
    g: u64,
    level: u32,
    modulus: u64, // g^level; 1 at level 0, collapsing every type to 0
    #[serde(skip)]
    down_shift: f64, // ln(2/g)
}

impl BranchModel {
    pub fn new(g: u64, level: u32) -> Result<Self> {
        if g != 3 && g != 5 {
            return Err(Error::InvalidMapSpec(format!("branching models cover multipliers 3 and 5, got {g}")));
        }
        // lifts live mod g^{level+1} and get doubled, so keep 2*g^{level+1} in u64
        let lift_modulus = g.checked_pow(level + 1).filter(|&m| m <= u64::MAX / 2);
        let Some(lift_modulus) = lift_modulus else {
            return Err(Error::Domain(format!("level {level} overflows the residue arithmetic")));
        };
        Ok(Self { g, level, modulus: lift_modulus / g, down_shift: (2.0 / g as f64).ln() })
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Marginal probability of a two-child birth (the level-0 coin).
    pub fn branch_probability(&self) -> f64 {
        1.0 / self.g as f64
    }

    /// Type of the progenitor: residue 1, which level 0 collapses to 0.
    pub fn root_type(&self) -> u64 {
        1 % self.modulus
    }

    /// Offspring of a parent of type `ty`: the always-present doubled child
    /// and, when the lifted residue admits the pruned odd preimage, a second
    /// child. One uniform digit in 0..g drives both levels: it is the lift
    /// digit for level >= 1 and the branch coin for level 0 (where the
    /// modulus-1 arithmetic makes exactly one digit value branch).
    fn sample_children<R: Rng>(&self, ty: u64, rng: &mut R) -> ((u64, f64), Option<(u64, f64)>) {
        // floor-scaled draw: never rejects (so degenerate generators can
        // drive it) and its 2^-64 bias is far below every tolerance here
        let m = ((u128::from(rng.gen::<u64>()) * u128::from(self.g)) >> 64) as u64;
        let lift = ty + m * self.modulus;
        let doubled = ((2 * lift) % self.modulus, LN_2);
        let odd = trees::branch_allowed(self.g as usize, (lift % (self.g * self.g)) as usize)
            .then(|| (((2 * lift - 1) / self.g) % self.modulus, self.down_shift));
        (doubled, odd)
    }
}

/// One grown branching-random-walk tree. Positions per generation are kept
/// sorted, so `first_births[k] == positions[k][0]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Realization {
    pub seed: u64,
    pub trial: u64,
    /// Deepest fully grown generation.
    #[serde(rename = "K")]
    pub depth: u32,
    /// N_k for k = 0..=depth.
    #[serde(rename = "N_k")]
    pub counts: Vec<u64>,
    /// L_k* = min position at generation k, k = 0..=depth.
    #[serde(rename = "L_star")]
    pub first_births: Vec<f64>,
    /// Set when the population cap cut growth short of the requested depth.
    pub truncated: bool,
    #[serde(skip)]
    pub positions: Vec<Vec<f64>>,
    /// Residue types aligned with `positions`; empty vectors at level 0.
    #[serde(skip)]
    pub types: Vec<Vec<u64>>,
    /// (one-child births, two-child births) over all reproducing parents.
    #[serde(skip)]
    pub branch_events: (u64, u64),
}

impl Realization {
    pub fn leaf_generation(&self) -> &[f64] {
        &self.positions[self.depth as usize]
    }

    pub fn total_individuals(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Grow a realization from a caller-supplied generator. The seed and trial
/// labels are recorded verbatim; [`bp_grow`] is the keyed-stream wrapper.
pub fn bp_grow_from<R: Rng>(
    model: &BranchModel,
    root_log_size: f64,
    depth: u32,
    cap: usize,
    labels: (u64, u64),
    rng: &mut R,
) -> Realization {
    let typed = model.level() >= 1;
    let mut positions = vec![vec![root_log_size]];
    let mut types = vec![if typed { vec![model.root_type()] } else { Vec::new() }];
    let mut counts = vec![1u64];
    let mut first_births = vec![root_log_size];
    let mut branch_events = (0u64, 0u64);
    let mut total = 1usize;
    let mut truncated = false;

    for k in 1..=depth {
        let parents = &positions[k as usize - 1];
        let parent_types = &types[k as usize - 1];
        let mut next_pos = Vec::with_capacity(parents.len() * 2);
        let mut next_ty = Vec::new();
        if typed {
            next_ty.reserve(parents.len() * 2);
        }
        let mut one = 0u64;
        let mut two = 0u64;
        for (i, &p) in parents.iter().enumerate() {
            let ty = if typed { parent_types[i] } else { 0 };
            let ((t1, s1), second) = model.sample_children(ty, rng);
            next_pos.push(p + s1);
            if typed {
                next_ty.push(t1);
            }
            match second {
                Some((t2, s2)) => {
                    next_pos.push(p + s2);
                    if typed {
                        next_ty.push(t2);
                    }
                    two += 1;
                }
                None => one += 1,
            }
        }
        if total + next_pos.len() > cap {
            // drop the whole generation: a partial one would bias the counts
            // and the first-birth minimum
            truncated = true;
            break;
        }
        if typed {
            // co-sort positions with their types; the (position, type) key
            // makes the order independent of production order
            let mut idx: Vec<u32> = (0..next_pos.len() as u32).collect();
            idx.sort_unstable_by(|&a, &b| {
                next_pos[a as usize]
                    .total_cmp(&next_pos[b as usize])
                    .then(next_ty[a as usize].cmp(&next_ty[b as usize]))
            });
            next_pos = idx.iter().map(|&i| next_pos[i as usize]).collect();
            next_ty = idx.iter().map(|&i| next_ty[i as usize]).collect();
        } else {
            next_pos.sort_unstable_by(f64::total_cmp);
        }
        total += next_pos.len();
        branch_events.0 += one;
        branch_events.1 += two;
        counts.push(next_pos.len() as u64);
        first_births.push(next_pos[0]);
        positions.push(next_pos);
        types.push(next_ty);
    }

    Realization {
        seed: labels.0,
        trial: labels.1,
        depth: counts.len() as u32 - 1,
        counts,
        first_births,
        truncated,
        positions,
        types,
        branch_events,
    }
}

/// Grow one realization on the stream keyed by (master_seed, trial).
pub fn bp_grow(
    model: &BranchModel,
    root_log_size: f64,
    depth: u32,
    cap: usize,
    master_seed: u64,
    trial: u64,
) -> Realization {
    let mut rng = rng::stream(master_seed, trial);
    bp_grow_from(model, root_log_size, depth, cap, (master_seed, trial), &mut rng)
}

/// ln N_K / K over the deepest grown generation.
pub fn bp_growth_rate(r: &Realization) -> Result<f64> {
    if r.depth == 0 {
        return Err(Error::Undefined("growth rate needs at least one grown generation".into()));
    }
    Ok((*r.counts.last().expect("counts nonempty") as f64).ln() / f64::from(r.depth))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnsembleStats {
    pub trials: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Growth-rate estimate across independent realizations (trial ids
/// 0..trials on the master seed), with across-realization dispersion.
pub fn bp_growth_ensemble(
    model: &BranchModel,
    depth: u32,
    cap: usize,
    master_seed: u64,
    trials: usize,
) -> Result<EnsembleStats> {
    if trials == 0 {
        return Err(Error::EmptySample);
    }
    let mut rates = Vec::with_capacity(trials);
    for trial in 0..trials {
        let r = bp_grow(model, 0.0, depth, cap, master_seed, trial as u64);
        rates.push(bp_growth_rate(&r)?);
    }
    let mean = rates.iter().sum::<f64>() / trials as f64;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / trials as f64;
    Ok(EnsembleStats { trials, mean, sd: var.sqrt() })
}

/// Normalized first-birth series L_k*/k for k = 1..=depth.
pub fn first_birth_series(r: &Realization) -> Vec<f64> {
    (1..=r.depth as usize).map(|k| r.first_births[k] / k as f64).collect()
}

/// I*(x): individuals with position <= ln x over all generations k >= 1.
pub fn bp_inverse_count(r: &Realization, x: f64) -> Result<u64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("inverse counts need x > 0, got {x}")));
    }
    let u = x.ln();
    Ok(r.positions[1..]
        .iter()
        .map(|gen| gen.partition_point(|&p| p <= u) as u64)
        .sum())
}

fn log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

/// Least-squares slope of ln I*(x) against ln x over the given grid.
pub fn inverse_count_slope(r: &Realization, xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::Domain("slope fit needs at least two abscissas".into()));
    }
    let mut pts = Vec::with_capacity(xs.len());
    for &x in xs {
        let c = bp_inverse_count(r, x)?;
        if c == 0 {
            return Err(Error::Undefined(format!("no individuals at or below ln {x}; widen the realization")));
        }
        pts.push((x.ln(), (c as f64).ln()));
    }
    Ok(log_slope(&pts))
}

/// Result of a deep inverse-count scan; the tree itself is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCountScan {
    /// I*(x) for each threshold in the request grid, same order.
    pub counts: Vec<u64>,
    /// Deepest generation that still held live individuals.
    pub leaf_generation: u32,
    /// True when the live population hit `cap`; counts from that generation
    /// on are not included.
    pub truncated: bool,
    /// Largest live population across generations.
    pub peak_population: usize,
}

/// Streaming I*(x) for depths far beyond what a stored realization can hold.
/// Generations are grown one at a time, keeping only individuals that can
/// still place a descendant at or below ln(max x) within the horizon: a node
/// at position p in generation k stays live only while
/// p <= ln(max x) + min(margin, (depth - k) * ln(g/2)).
///
/// The horizon term is exact bookkeeping (one line of descent falls at most
/// ln(g/2) per generation, so nodes above that line are unreachable from the
/// window). The margin term discards nodes whose subtrees could in principle
/// still dip into the window, but the expected number of countable
/// descendants of a node sitting d above it decays like e^{-d}: the
/// reproduction-weighted descent measure is exactly critical at unit tilt.
/// Margins of 10 or more perturb expected counts by far less than Monte
/// Carlo noise while keeping the live population small.
pub fn bp_inverse_count_scan(
    model: &BranchModel,
    xs: &[f64],
    depth: u32,
    margin: f64,
    cap: usize,
    master_seed: u64,
    trial: u64,
) -> Result<InverseCountScan> {
    if model.level != 0 {
        return Err(Error::Domain("inverse-count scans support level-0 models only".into()));
    }
    if xs.is_empty() || xs.iter().any(|&x| !(x > 0.0)) || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("thresholds must be positive and strictly ascending".into()));
    }
    if !(margin >= 0.0) || cap == 0 {
        return Err(Error::Domain("need margin >= 0 and a nonzero population cap".into()));
    }
    let lxs: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
    let top = *lxs.last().expect("nonempty grid");
    let descent = -model.down_shift; // ln(g/2) > 0
    let mut rng = rng::stream(master_seed, trial);
    // bin_hits[i] tallies children landing in (ln x_{i-1}, ln x_i]; prefix
    // sums at the end turn them into the cumulative counts I*(x_i).
    let mut bin_hits = vec![0u64; lxs.len()];
    let mut gen_hits = vec![0u64; lxs.len()];
    let mut current = vec![0.0f64];
    let mut next: Vec<f64> = Vec::new();
    let mut truncated = false;
    let mut leaf_generation = 0u32;
    let mut peak_population = 1usize;
    'grow: for k in 1..=depth {
        let window = top + margin.min(f64::from(depth - k) * descent);
        next.clear();
        gen_hits.iter_mut().for_each(|h| *h = 0);
        for parent in 0..current.len() {
            let p = current[parent];
            let (up, down) = model.sample_children(0, &mut rng);
            for shift in [Some(up.1), down.map(|d| d.1)].into_iter().flatten() {
                let child = p + shift;
                if child > window {
                    continue;
                }
                if next.len() == cap {
                    // partial generations would bias the counts, so the
                    // whole generation is abandoned
                    truncated = true;
                    break 'grow;
                }
                next.push(child);
                let idx = lxs.partition_point(|&l| l < child);
                if idx < gen_hits.len() {
                    gen_hits[idx] += 1;
                }
            }
        }
        for (b, g) in bin_hits.iter_mut().zip(&gen_hits) {
            *b += g;
        }
        if next.is_empty() {
            break;
        }
        leaf_generation = k;
        peak_population = peak_population.max(next.len());
        std::mem::swap(&mut current, &mut next);
    }
    let mut counts = bin_hits;
    for i in 1..counts.len() {
        counts[i] += counts[i - 1];
    }
    Ok(InverseCountScan { counts, leaf_generation, truncated, peak_population })
}

/// Least-squares slope of ln(mean I*(x)) against ln x, with scan counts
/// averaged over independent realizations. The ensemble mean is the point:
/// a single realization carries a random multiplicative factor that varies
/// across generation bands and distorts desk-scale slope fits by several
/// hundredths.
pub fn inverse_count_slope_scan(
    model: &BranchModel,
    xs: &[f64],
    depth: u32,
    margin: f64,
    cap: usize,
    master_seed: u64,
    trials: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::EmptySample);
    }
    if xs.len() < 2 {
        return Err(Error::Domain("slope fit needs at least two abscissas".into()));
    }
    let mut mean = vec![0.0f64; xs.len()];
    for t in 0..trials {
        let scan = bp_inverse_count_scan(model, xs, depth, margin, cap, master_seed, t)?;
        if scan.truncated {
            return Err(Error::Undefined(format!(
                "scan trial {t} hit the population cap {cap} at generation {}; raise the cap",
                scan.leaf_generation + 1
            )));
        }
        for (m, c) in mean.iter_mut().zip(&scan.counts) {
            *m += *c as f64 / trials as f64;
        }
    }
    let mut pts = Vec::with_capacity(xs.len());
    for (&x, &m) in xs.iter().zip(&mean) {
        if m == 0.0 {
            return Err(Error::Undefined(format!("no individuals at or below ln {x}; deepen the scan")));
        }
        pts.push((x.ln(), m.ln()));
    }
    Ok(log_slope(&pts))
}

/// Chi-square statistic (1 dof) of the realized one/two-child split against
/// the level-0 marginal ((g-1)/g, 1/g).
pub fn offspring_chi2(r: &Realization, model: &BranchModel) -> Result<f64> {
    let (one, two) = r.branch_events;
    let total = (one + two) as f64;
    if total == 0.0 {
        return Err(Error::EmptySample);
    }
    let p_two = model.branch_probability();
    let e_one = total * (1.0 - p_two);
    let e_two = total * p_two;
    Ok((one as f64 - e_one).powi(2) / e_one + (two as f64 - e_two).powi(2) / e_two)
}

/// One JSON object per realization: {seed, trial, K, N_k, L_star, truncated}.
pub fn write_realizations_jsonl<W: Write>(mut out: W, realizations: &[Realization]) -> Result<()> {
    for r in realizations {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;
    use statrs::distribution::{ContinuousCDF, Normal};

    /// Generator pinned to one output word; drives degenerate paths.
    struct ConstRng(u64);

    impl RngCore for ConstRng {
        fn next_u32(&mut self) -> u32 {
            self.0 as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            for b in dest {
                *b = self.0 as u8;
            }
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
            self.fill_bytes(dest);
            Ok(())
        }
    }

    fn walk3() -> WalkModel {
        WalkModel::rrw(3).unwrap()
    }

    fn walk5() -> WalkModel {
        WalkModel::rrw(5).unwrap()
    }

    #[test]
    fn walk_model_moments_match_closed_forms() {
        let m3 = walk3();
        assert!((m3.drift() - 0.5 * 0.75f64.ln()).abs() < 1e-15);
        assert!((m3.sigma() - 0.5 * 3f64.ln()).abs() < 1e-15);
        let m5 = walk5();
        assert!((m5.drift() - 0.5 * 1.25f64.ln()).abs() < 1e-15);
        assert!((m5.sigma() - 0.5 * 5f64.ln()).abs() < 1e-15);
        assert!(m3.drift() < 0.0 && m5.drift() > 0.0);
        let total: f64 = m3.atoms().iter().map(|&(p, _)| p).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn walk_model_rejects_bad_inputs() {
        assert!(WalkModel::rrw(4).is_err());
        assert!(WalkModel::rrw(1).is_err());
        assert!(WalkModel::new(vec![]).is_err());
        assert!(WalkModel::new(vec![(0.4, 1.0), (0.4, -1.0)]).is_err());
        assert!(WalkModel::new(vec![(1.0, f64::NAN)]).is_err());
    }

    #[test]
    fn walk_model_sample_moments_within_five_se() {
        // 10^6 draws against the exact atom moments
        let m = walk3();
        let mut rng = rng::stream(90, 0);
        let n = 1_000_000usize;
        let mut sum = 0f64;
        let mut sum2 = 0f64;
        for _ in 0..n {
            let s = m.sample_step(&mut rng);
            sum += s;
            sum2 += s * s;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        let se_mean = m.sigma() / (n as f64).sqrt();
        assert!((mean - m.drift()).abs() < 5.0 * se_mean, "mean {mean} vs {}", m.drift());
        // SE of the sample variance from the exact fourth central moment.
        // For a symmetric two-point law mu4 = sigma^4 exactly, so the linear
        // term vanishes and the whole deviation is the quadratic
        // -(mean - mu)^2; allow for both.
        let mu4: f64 = m.atoms().iter().map(|&(p, s)| p * (s - m.drift()).powi(4)).sum();
        let se_var = ((mu4 - m.sigma().powi(4)) / n as f64).sqrt();
        let tol = 5.0 * se_var + (5.0 * se_mean) * (5.0 * se_mean) + 1e-12;
        assert!((var - m.sigma() * m.sigma()).abs() < tol, "var {var}");
    }

    #[test]
    fn degenerate_all_even_path_descends_by_ln2_each_step() {
        let m = walk3();
        let z0 = 10.0;
        let path = brw_path(&m, z0, 3, &mut ConstRng(u64::MAX));
        assert_eq!(path.len(), 4);
        assert!((path[3] - (z0 - 3.0 * LN_2)).abs() < 1e-12);
        for w in path.windows(2) {
            assert!((w[1] - w[0] + LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn paths_reproduce_per_stream() {
        let m = walk3();
        let a = brw_path(&m, 5.0, 64, &mut rng::stream(7, 1));
        let b = brw_path(&m, 5.0, 64, &mut rng::stream(7, 1));
        let c = brw_path(&m, 5.0, 64, &mut rng::stream(7, 2));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn path_mean_at_k100_matches_drift() {
        // 10^5 paths, tolerance 3*sigma*sqrt(100)/sqrt(10^5)
        let m = walk3();
        let k = 100usize;
        let trials = 100_000usize;
        let mut sum = 0f64;
        for t in 0..trials {
            let mut rng = rng::stream(91, t as u64);
            let mut z = 0.0;
            for _ in 0..k {
                z += m.sample_step(&mut rng);
            }
            sum += z;
        }
        let mean = sum / trials as f64;
        let target = k as f64 * m.drift();
        let tol = 3.0 * m.sigma() * (k as f64).sqrt() / (trials as f64).sqrt();
        assert!((mean - target).abs() < tol, "mean {mean}, target {target}, tol {tol}");
    }

    #[test]
    fn stopping_proxy_mean_near_inverse_drift() {
        // mean steps-to-passage over ln n for z0 = ln 10^6: ~ 1/|drift| = 6.95212
        let m = walk3();
        let z0 = 1e6f64.ln();
        let trials = 10_000u64;
        let mut sum = 0f64;
        for t in 0..trials {
            let s = walk_until_passage(&m, z0, 100_000, &mut rng::stream(92, t));
            let steps = s.steps_to_passage.expect("negative drift walk must pass") as f64;
            sum += steps / z0;
            // the walk stops at first passage, so the trough is the passage
            // value itself: within one down-step of 0
            assert!(s.log_trough >= -LN_2 && s.log_trough <= 0.0);
            assert_eq!(s.steps_taken, s.steps_to_passage.unwrap());
        }
        let mean = sum / trials as f64;
        assert!((mean - 6.95212).abs() < 0.2, "proxy mean {mean}");
    }

    #[test]
    fn stopping_steps_normalized_approach_gaussian_at_the_slow_rate() {
        // The normalized passage time tends to N(0,1) only at rate
        // O(1/sqrt(z0)) with constant ~ 0.25: the skew of the passage law
        // genuinely floors the KS distance near 0.067 at z0 = ln 10^6, and
        // the sub-0.05 regime starts around z0 ~ ln 10^14. Check the floor,
        // the decay, and the eventual sub-0.05 distance at 10^4 trials.
        let m = walk3();
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mu = m.drift().abs();
        let d_at = |z0: f64| {
            let scale = mu.powf(-1.5) * m.sigma() * z0.sqrt();
            let mut sample = Vec::with_capacity(10_000);
            for t in 0..10_000u64 {
                let s = walk_until_passage(&m, z0, 100_000, &mut rng::stream(93, t));
                let steps = s.steps_to_passage.unwrap() as f64;
                sample.push((steps - z0 / mu) / scale);
            }
            ks_statistic(&sample, |x| normal.cdf(x)).unwrap()
        };
        let d6 = d_at(1e6f64.ln());
        let d14 = d_at(1e14f64.ln());
        assert!(d6 > 0.04 && d6 < 0.09, "KS at ln 1e6: {d6}");
        assert!(d14 < 0.05, "KS at ln 1e14: {d14}");
        assert!(d14 < d6, "distance failed to shrink: {d14} vs {d6}");
    }

    #[test]
    fn positive_drift_walks_rarely_return() {
        // from z0 = ln 10^4 the 5x walk returns below 0 with probability
        // about exp(-theta* z0) ~ 4%; budget 600 steps leaves ~ +58 of drift
        let m = walk5();
        let z0 = 1e4f64.ln();
        let trials = 10_000u64;
        let mut returned = 0u32;
        let mut peak_min = f64::INFINITY;
        for t in 0..trials {
            let s = walk_until_passage(&m, z0, 600, &mut rng::stream(94, t));
            if s.steps_to_passage.is_some() {
                returned += 1;
            } else {
                peak_min = peak_min.min(s.log_peak);
            }
        }
        let fraction = f64::from(returned) / trials as f64;
        assert!(fraction < 0.05, "return fraction {fraction}");
        assert!(fraction > 0.01, "return fraction suspiciously small: {fraction}");
        // every survivor has drifted well above its start; the weakest of
        // ~10^4 sits a couple sigma under the mean +58, still far above z0
        assert!(peak_min > 10.0, "weakest surviving peak {peak_min}");
    }

    #[test]
    fn rrw_trials_keyed_by_seed_are_range_independent() {
        let m = walk3();
        let all = rrw_trials(&m, 17, 2..=200, 10_000).unwrap();
        let one = rrw_trials(&m, 17, 50..=50, 10_000).unwrap();
        assert_eq!(all.len(), 199);
        let in_range = all.iter().find(|t| t.n == 50).unwrap();
        assert_eq!(in_range.walk, one[0].walk);
        assert!(rrw_trials(&m, 17, 0..=5, 100).is_err());
    }

    #[test]
    fn rrw_minimal_excursions_concentrate_above_the_predicted_floor() {
        // The minimal-excursion exponent log t-(n) / ln n has predicted
        // infimum 1 - 1/theta* = -1.86466 as n grows. Small seeds divide an
        // O(1) dip by a tiny ln n and swamp the statistic, so the window
        // starts at 10^3; there the ensemble minimum hovers near the
        // constant from above, dips below -1.9 stay rare, and dips below 0
        // are the few-percent ruin events with rate theta* ~ 0.349.
        let m = walk5();
        let trials = rrw_trials(&m, 931, 1_000..=10_000, 2_500).unwrap();
        let ratios: Vec<f64> = trials.iter().map(|t| t.walk.log_trough / (t.n as f64).ln()).collect();
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let below = ratios.iter().filter(|&&r| r < -1.9).count();
        let ruin = ratios.iter().filter(|&&r| r < 0.0).count() as f64 / ratios.len() as f64;
        assert!(min > -2.5 && min < -1.0, "ensemble minimum {min}");
        assert!(below <= 3, "{below} seeds below -1.9");
        assert!(ruin > 0.02 && ruin < 0.08, "ruin fraction {ruin}");
    }

    #[test]
    fn ks_statistic_handles_edges() {
        assert!(matches!(ks_statistic(&[], |_| 0.5), Err(Error::EmptySample)));
        // single point at the median of the reference: D = 1/2
        let d = ks_statistic(&[0.0], |x| if x < 0.0 { 0.0 } else { 0.5 }).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn branch_model_validation_and_marginals() {
        assert!(BranchModel::new(4, 0).is_err());
        assert!(BranchModel::new(3, 60).is_err());
        let b3 = BranchModel::new(3, 0).unwrap();
        assert_eq!(b3.root_type(), 0);
        assert!((b3.branch_probability() - 1.0 / 3.0).abs() < 1e-15);
        let b5 = BranchModel::new(5, 0).unwrap();
        assert!((b5.branch_probability() - 0.2).abs() < 1e-15);
        let b52 = BranchModel::new(5, 2).unwrap();
        assert_eq!(b52.root_type(), 1);
    }

    #[test]
    fn degenerate_one_child_tree_is_a_ray() {
        // digit 0 never branches: N_k = 1 and the position climbs by ln 2
        let b = BranchModel::new(3, 0).unwrap();
        let root = 2.5f64;
        let r = bp_grow_from(&b, root, 12, 1 << 20, (0, 0), &mut ConstRng(0));
        assert_eq!(r.counts, vec![1; 13]);
        assert!(!r.truncated);
        for k in 0..=12usize {
            assert!((r.first_births[k] - (root + k as f64 * LN_2)).abs() < 1e-12);
        }
        assert_eq!(r.branch_events, (12, 0));
    }

    #[test]
    fn degenerate_always_branch_tree_doubles_and_rate_is_ln2() {
        // for g=3 the top digit (2) always admits the odd preimage
        let b = BranchModel::new(3, 0).unwrap();
        let r = bp_grow_from(&b, 0.0, 12, 1 << 20, (0, 0), &mut ConstRng(u64::MAX));
        let expected: Vec<u64> = (0..=12).map(|k| 1u64 << k).collect();
        assert_eq!(r.counts, expected);
        let rate = bp_growth_rate(&r).unwrap();
        assert!((rate - LN_2).abs() < 1e-12);
        // every generation's minimum rides the ln(2/3) branch children
        for k in 0..=12usize {
            assert!((r.first_births[k] - k as f64 * (2f64 / 3.0).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_first_generation_size_is_four_thirds() {
        let b = BranchModel::new(3, 0).unwrap();
        let trials = 10_000u64;
        let mut sum = 0u64;
        for t in 0..trials {
            sum += bp_grow(&b, 0.0, 1, 16, 96, t).counts[1];
        }
        let mean = sum as f64 / trials as f64;
        // N_1 is 1 or 2 with P(2) = 1/3: sd = sqrt(2)/3, 5 SE band
        let tol = 5.0 * (2f64.sqrt() / 3.0) / (trials as f64).sqrt();
        assert!((mean - 4.0 / 3.0).abs() < tol, "mean N_1 = {mean}");
    }

    #[test]
    fn realizations_reproduce_and_streams_differ() {
        let b = BranchModel::new(3, 1).unwrap();
        let a = bp_grow(&b, 0.0, 14, 1 << 20, 11, 3);
        let a2 = bp_grow(&b, 0.0, 14, 1 << 20, 11, 3);
        let c = bp_grow(&b, 0.0, 14, 1 << 20, 11, 4);
        assert_eq!(a, a2);
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn realization_structure_invariants() {
        let b = BranchModel::new(3, 2).unwrap();
        let r = bp_grow(&b, 1.0, 18, 1 << 22, 97, 0);
        assert_eq!(r.depth as usize + 1, r.counts.len());
        assert_eq!(r.counts.len(), r.first_births.len());
        for k in 0..=r.depth as usize {
            let gen = &r.positions[k];
            assert_eq!(gen.len() as u64, r.counts[k]);
            assert!(r.counts[k] >= 1, "no extinction");
            assert!(gen.windows(2).all(|w| w[0] <= w[1]), "sorted positions");
            assert_eq!(r.first_births[k], gen[0]);
            // shifts are ln 2 up or ln(2/3) down, so generation k is pinched
            // between the all-branch and all-double rays
            let lo = 1.0 + k as f64 * (2f64 / 3.0).ln() - 1e-9;
            let hi = 1.0 + k as f64 * LN_2 + 1e-9;
            assert!(gen[0] >= lo && *gen.last().unwrap() <= hi);
            // residue types stay units mod 9
            assert!(r.types[k].iter().all(|&t| t % 3 != 0 && t < 9));
            if k > 0 {
                assert!(r.counts[k] >= r.counts[k - 1], "offspring include the doubled child");
                assert!(r.counts[k] <= 2 * r.counts[k - 1]);
            }
        }
        let series = first_birth_series(&r);
        assert_eq!(series.len(), r.depth as usize);
        assert!((series[r.depth as usize - 1] - r.first_births[r.depth as usize] / r.depth as f64).abs() < 1e-15);
    }

    #[test]
    fn growth_rate_needs_depth() {
        let b = BranchModel::new(3, 0).unwrap();
        let r = bp_grow(&b, 0.0, 0, 16, 0, 0);
        assert!(bp_growth_rate(&r).is_err());
    }

    #[test]
    fn tiny_cap_truncates_cleanly() {
        let b = BranchModel::new(3, 0).unwrap();
        let r = bp_grow(&b, 0.0, 30, 40, 98, 1);
        assert!(r.truncated);
        assert!(r.depth < 30);
        assert!(r.total_individuals() <= 40);
        // truncation drops whole generations, never parts of one
        assert_eq!(r.counts.len(), r.depth as usize + 1);
        assert!(r.counts.iter().all(|&n| n >= 1));
    }

    #[test]
    fn growth_ensemble_matches_log_four_thirds_at_desk_scale() {
        let b = BranchModel::new(3, 0).unwrap();
        let stats = bp_growth_ensemble(&b, 25, 1 << 20, 99, 40).unwrap();
        assert!((stats.mean - (4f64 / 3.0).ln()).abs() < 0.05, "mean rate {}", stats.mean);
        assert!(stats.sd < 0.05);
        let b5 = BranchModel::new(5, 0).unwrap();
        let stats5 = bp_growth_ensemble(&b5, 25, 1 << 20, 99, 40).unwrap();
        assert!((stats5.mean - 1.2f64.ln()).abs() < 0.05, "mean rate {}", stats5.mean);
    }

    #[test]
    #[ignore = "acceptance-scale ensemble; run with --ignored"]
    fn growth_ensemble_at_acceptance_scale() {
        let b = BranchModel::new(3, 0).unwrap();
        let stats = bp_growth_ensemble(&b, 40, DEFAULT_POPULATION_CAP, 100, 100).unwrap();
        assert!((stats.mean - (4f64 / 3.0).ln()).abs() < 0.02, "mean rate {}", stats.mean);
        let b5 = BranchModel::new(5, 0).unwrap();
        let stats5 = bp_growth_ensemble(&b5, 40, DEFAULT_POPULATION_CAP, 100, 100).unwrap();
        assert!((stats5.mean - 1.2f64.ln()).abs() < 0.02, "mean rate {}", stats5.mean);
    }

    #[test]
    fn typed_levels_reproduce_untyped_branch_marginal() {
        // one- vs two-child frequencies at ~10^5 reproducing parents, against
        // the level-0 split (2/3, 1/3). Ancestry correlation inflates the
        // iid chi-square reference, so the bound is set an order above it.
        for level in [1u32, 2] {
            let b = BranchModel::new(3, level).unwrap();
            let r = bp_grow(&b, 0.0, 41, 400_000, 101, u64::from(level));
            let parents = r.branch_events.0 + r.branch_events.1;
            assert!(parents > 100_000, "only {parents} parents at level {level}");
            let chi2 = offspring_chi2(&r, &b).unwrap();
            assert!(chi2 < 30.0, "chi2 {chi2} at level {level}");
            let freq = r.branch_events.1 as f64 / parents as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.02, "branch frequency {freq}");
        }
    }

    #[test]
    fn first_birth_series_tracks_the_predicted_limit_loosely() {
        // beta_BP = 0.02399 is a k -> infinity limit; at K = 40 the series
        // only brackets it. The hard bounds are the step extremes.
        let b = BranchModel::new(3, 0).unwrap();
        let r = bp_grow(&b, 0.0, 40, 1 << 21, 102, 0);
        let series = first_birth_series(&r);
        for (i, v) in series.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!(*v >= (2f64 / 3.0).ln() - 1e-12, "L_{}*/{} = {v} below the one-step floor", i + 1, k);
            assert!(*v <= LN_2 + 1e-12);
        }
        let tail = series[series.len() - 1];
        assert!(tail > -0.2 && tail < 0.3, "normalized first birth {tail} drifted");
    }

    #[test]
    fn inverse_count_on_the_ray_is_exact() {
        // one-child tree from 0: generation k sits at k ln 2, so
        // I*(x) = floor(log2 x) for x >= 1
        let b = BranchModel::new(3, 0).unwrap();
        let r = bp_grow_from(&b, 0.0, 40, 1 << 20, (0, 0), &mut ConstRng(0));
        assert_eq!(bp_inverse_count(&r, 0.5).unwrap(), 0);
        assert_eq!(bp_inverse_count(&r, 1.0).unwrap(), 0);
        assert_eq!(bp_inverse_count(&r, 2.0).unwrap(), 1);
        assert_eq!(bp_inverse_count(&r, 1000.0).unwrap(), 9);
        assert_eq!(bp_inverse_count(&r, 1024.0).unwrap(), 10);
        assert!(bp_inverse_count(&r, 0.0).is_err());
        assert!(bp_inverse_count(&r, -3.0).is_err());
    }

    #[test]
    fn inverse_count_below_root_is_zero() {
        let b = BranchModel::new(3, 0).unwrap();
        let r = bp_grow(&b, 100.0f64.ln(), 10, 1 << 16, 103, 0);
        // x below the root size: even the ln(2/3) children of the root sit
        // above ln x, and the root itself is excluded
        assert_eq!(bp_inverse_count(&r, 50.0).unwrap(), 0);
        assert!(bp_inverse_count(&r, 1e9).unwrap() > 0);
    }

    #[test]
    fn single_realization_slope_wobbles_around_the_truncated_expectation() {
        // one stored tree at K = 40: the exact expected-count slope over this
        // window is 0.68 and individual trees scatter a tenth either way, so
        // only a wide sanity band is honest here; the calibrated statements
        // live in the scan tests below
        let b = BranchModel::new(3, 0).unwrap();
        let r = bp_grow(&b, 0.0, 40, 1 << 20, 104, 0);
        let xs: Vec<f64> = (0..7).map(|i| 10f64.powf(2.0 + 0.25 * i as f64)).collect();
        let slope = inverse_count_slope(&r, &xs).unwrap();
        assert!(slope > 0.5 && slope < 0.95, "slope {slope}");
        assert!(inverse_count_slope(&r, &xs[..1]).is_err());
    }

    #[test]
    fn scan_counts_match_closed_form_first_generation_means() {
        // depth 1: the ln 2 child is always there, the ln(2/3) child appears
        // with probability 1/3, so E I*(0.7) = E I*(1.9) = 1/3 and
        // E I*(2.1) = 1/3 + 1
        let b = BranchModel::new(3, 0).unwrap();
        let xs = [0.7, 1.9, 2.1];
        let trials = 4_000u64;
        let mut mean = [0f64; 3];
        for t in 0..trials {
            let s = bp_inverse_count_scan(&b, &xs, 1, f64::INFINITY, 1 << 10, 714, t).unwrap();
            assert!(!s.truncated);
            for (m, c) in mean.iter_mut().zip(&s.counts) {
                *m += *c as f64 / trials as f64;
            }
        }
        // se of a p = 1/3 indicator at 4000 trials is 0.0075
        assert!((mean[0] - 1.0 / 3.0).abs() < 0.025, "E I*(0.7) = {}", mean[0]);
        assert!((mean[1] - 1.0 / 3.0).abs() < 0.025, "E I*(1.9) = {}", mean[1]);
        assert!((mean[2] - 4.0 / 3.0).abs() < 0.025, "E I*(2.1) = {}", mean[2]);
    }

    #[test]
    fn scan_validates_inputs_and_reproduces() {
        let b3 = BranchModel::new(3, 0).unwrap();
        let xs = [10.0, 100.0];
        assert!(bp_inverse_count_scan(&BranchModel::new(3, 1).unwrap(), &xs, 5, 1.0, 10, 0, 0).is_err());
        assert!(bp_inverse_count_scan(&b3, &[], 5, 1.0, 10, 0, 0).is_err());
        assert!(bp_inverse_count_scan(&b3, &[100.0, 10.0], 5, 1.0, 10, 0, 0).is_err());
        assert!(bp_inverse_count_scan(&b3, &[-1.0, 10.0], 5, 1.0, 10, 0, 0).is_err());
        assert!(bp_inverse_count_scan(&b3, &xs, 5, -0.5, 10, 0, 0).is_err());
        assert!(bp_inverse_count_scan(&b3, &xs, 5, 1.0, 0, 0, 0).is_err());
        let a = bp_inverse_count_scan(&b3, &xs, 25, 8.0, 1 << 20, 715, 3).unwrap();
        let b = bp_inverse_count_scan(&b3, &xs, 25, 8.0, 1 << 20, 715, 3).unwrap();
        assert_eq!(a, b);
        // a tiny cap truncates and the ensemble helper refuses the biased run
        let t = bp_inverse_count_scan(&b3, &xs, 25, 8.0, 4, 715, 3).unwrap();
        assert!(t.truncated);
        assert!(matches!(
            inverse_count_slope_scan(&b3, &xs, 25, 8.0, 4, 715, 1),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn scan_slopes_track_the_truncated_expectation_at_desk_depth() {
        // The window [1e2, 1e5] wants generations near 6.95 ln x (3x) and
        // 9.2 ln x (5x); desk-scale horizons cut those off, and the exact
        // expected-count slopes at these depths are 0.7694 (g=3, K=50) and
        // 0.5432 (g=5, K=78). Ensemble means over a couple dozen scans sit
        // within a few hundredths of them.
        let xs: Vec<f64> = (0..7).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
        let b3 = BranchModel::new(3, 0).unwrap();
        let s3 = inverse_count_slope_scan(&b3, &xs, 50, f64::INFINITY, 4_000_000, 710, 24).unwrap();
        assert!((s3 - 0.7694).abs() < 0.08, "g=3 desk slope {s3}");
        let b5 = BranchModel::new(5, 0).unwrap();
        let s5 = inverse_count_slope_scan(&b5, &xs, 78, 10.0, 4_000_000, 710, 48).unwrap();
        assert!((s5 - 0.5432).abs() < 0.08, "g=5 desk slope {s5}");
    }

    #[test]
    #[ignore = "deep scans, expensive unoptimized; the acceptance suite runs the same configs"]
    fn inverse_count_slopes_at_acceptance_scale() {
        // Horizons deep enough for the spec windows: K = 90 (g=3) puts the
        // expected slope at 0.936 of the x^1 law, K = 220 (g=5) at 0.637
        // against eta ~ 0.6509; ensemble means land inside the stated bands.
        let xs: Vec<f64> = (0..7).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
        let b3 = BranchModel::new(3, 0).unwrap();
        let s3 = inverse_count_slope_scan(&b3, &xs, 90, 10.0, 40_000_000, 710, 4).unwrap();
        assert!((s3 - 1.0).abs() < 0.1, "3x slope {s3}");
        let b5 = BranchModel::new(5, 0).unwrap();
        let s5 = inverse_count_slope_scan(&b5, &xs, 220, 10.0, 4_000_000, 710, 16).unwrap();
        assert!((s5 - 0.65).abs() < 0.05, "5x slope {s5}");
    }

    #[test]
    fn jsonl_exposes_the_documented_fields_only() {
        let b = BranchModel::new(3, 0).unwrap();
        let rs = vec![bp_grow(&b, 0.0, 5, 1 << 10, 106, 0), bp_grow(&b, 0.0, 5, 1 << 10, 106, 1)];
        let mut buf = Vec::new();
        write_realizations_jsonl(&mut buf, &rs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.trim_end().lines().collect();
        assert_eq!(lines.len(), 2);
        let v: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        let obj = v.as_object().unwrap();
        for key in ["seed", "trial", "K", "N_k", "L_star", "truncated"] {
            assert!(obj.contains_key(key), "missing {key}");
        }
        assert!(!obj.contains_key("positions"));
        assert_eq!(v["K"], 5);
        assert_eq!(v["N_k"].as_array().unwrap().len(), 6);
    }
}
