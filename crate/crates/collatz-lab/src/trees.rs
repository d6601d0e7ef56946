//! Backward iteration: inverse-image computation, pruned preimage trees,
//! the residue-class census of tree shapes and leaf counts, and counting of
//! inverse iterates below a bound.
//!
//! On counting inverse iterates: the preimage tree above a root is infinite
//! (doubling never stops), and a seed n <= x can reach the root only through
//! its own forward orbit, which may peak far above x (excursions grow
//! roughly like x^2 at the record seeds). A breadth-first frontier cutoff at
//! any small multiple of x therefore undercounts. The exact count is
//! computed by forward-iterating every |n| <= x instead, which is sound and
//! cheaper; a budgeted BFS with a 2x frontier is kept as a documented lower
//! bound (it finds exactly the seeds whose orbits stay within 2x).

use crate::error::{Error, Result};
use crate::maps::{MapSpec, Variant};
use serde::Serialize;
use std::collections::{HashMap, HashSet, VecDeque};

fn require_halved(spec: &MapSpec) -> Result<()> {
    if spec.variant() != Variant::T || spec.offset() != 1 {
        return Err(Error::Domain(
            "inverse iteration is defined for the halved maps with offset 1".into(),
        ));
    }
    Ok(())
}

/// Preimages of n under the halved map: 2n always, and (2n-1)/g when that
/// is an integer (2n ≡ 1 mod g). The doubling preimage comes first.
pub fn inverse_image(spec: &MapSpec, n: i64) -> Result<Vec<i64>> {
    require_halved(spec)?;
    let g = spec.multiplier() as i64;
    let double = n
        .checked_mul(2)
        .ok_or_else(|| Error::Domain(format!("2*{n} overflows")))?;
    let mut out = vec![double];
    if (double - 1).rem_euclid(g) == 0 {
        out.push((double - 1) / g);
    }
    Ok(out)
}

/// Preimages with branches divisible by g removed (the pruned tree's edge
/// rule): for 3x+1 the branch survives iff n ≡ 2, 8 (mod 9), for 5x+1 iff
/// n ≡ 3, 8, 18, 23 (mod 25).
pub fn pruned_inverse_image(spec: &MapSpec, n: i64) -> Result<Vec<i64>> {
    let g = spec.multiplier() as i64;
    Ok(inverse_image(spec, n)?
        .into_iter()
        .filter(|v| v.rem_euclid(g) != 0)
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeNode {
    pub label: i64,
    pub depth: u32,
    pub children: Vec<usize>,
}

/// A depth-k pruned preimage tree with integer labels; nodes[0] is the root.
#[derive(Debug, Clone, Serialize)]
pub struct PrunedTree {
    pub depth: u32,
    pub nodes: Vec<TreeNode>,
}

impl PrunedTree {
    pub fn root(&self) -> i64 {
        self.nodes[0].label
    }

    pub fn leaf_count(&self) -> u64 {
        self.nodes.iter().filter(|n| n.depth == self.depth).count() as u64
    }

    pub fn leaves(&self) -> Vec<i64> {
        self.nodes
            .iter()
            .filter(|n| n.depth == self.depth)
            .map(|n| n.label)
            .collect()
    }
}

pub fn grow_pruned_tree(spec: &MapSpec, root: i64, k: u32) -> Result<PrunedTree> {
    require_halved(spec)?;
    if k > 30 {
        return Err(Error::Domain("tree depth capped at 30".into()));
    }
    let g = spec.multiplier() as i64;
    if root.rem_euclid(g) == 0 {
        return Err(Error::Domain(format!("root {root} is divisible by {g}")));
    }
    let mut nodes = vec![TreeNode { label: root, depth: 0, children: Vec::new() }];
    let mut frontier = vec![0usize];
    for depth in 1..=k {
        let mut next = Vec::new();
        for idx in frontier {
            for child in pruned_inverse_image(spec, nodes[idx].label)? {
                let ci = nodes.len();
                nodes.push(TreeNode { label: child, depth, children: Vec::new() });
                nodes[idx].children.push(ci);
                next.push(ci);
            }
        }
        frontier = next;
    }
    Ok(PrunedTree { depth: k, nodes })
}

/// (N_k(a), N_k*(a)): preimages of a at depth exactly k, and those not
/// divisible by g. For a ≡ 0 (mod g) the tree is a bare doubling chain, so
/// N_k = 1 and N_k* = 0 once k >= 1.
pub fn leaf_counts(spec: &MapSpec, a: i64, k: u32) -> Result<(u64, u64)> {
    require_halved(spec)?;
    if k > 30 {
        return Err(Error::Domain("tree depth capped at 30".into()));
    }
    let g = spec.multiplier() as i128;
    fn rec(v: i128, depth: u32, g: i128) -> (u64, u64) {
        if depth == 0 {
            return (1, u64::from(v.rem_euclid(g) != 0));
        }
        let (mut n, mut ns) = rec(2 * v, depth - 1, g);
        if (2 * v - 1).rem_euclid(g) == 0 {
            let (bn, bns) = rec((2 * v - 1) / g, depth - 1, g);
            n += bn;
            ns += bns;
        }
        (n, ns)
    }
    Ok(rec(a as i128, k, g))
}

/// One row of the residue census: extremes of the pruned leaf count over
/// all admissible residue classes mod g^{k+1}, the number of distinct tree
/// types (ordered shape with node labels mod g), and the leaf-count
/// extremes scaled by the exact mean (g+1 / g)^k.
#[derive(Debug, Clone, Serialize)]
pub struct CensusRow {
    pub k: u32,
    pub tree_types: u64,
    pub n_minus: u64,
    pub n_plus: u64,
    /// Σ N_k*(a) over admissible residues; equals 2·4^k (g=3), 4·6^k (g=5).
    pub leaf_sum: u64,
    /// ((g+1)/g)^k, the exact mean leaf count.
    pub mean: f64,
    pub d_minus: f64,
    pub d_plus: f64,
}

fn census_limit(g: u64) -> u32 {
    match g {
        3 => 14, // 3^15 residues; the next level would need ~4x the memory
        5 => 8,
        _ => 6,
    }
}

pub(crate) fn branch_allowed(g: usize, a: usize) -> bool {
    match g {
        3 => matches!(a % 9, 2 | 8),
        5 => a % 5 == 3 && a % 25 != 13,
        _ => unreachable!("census validates the multiplier"),
    }
}

/// Full census table for depths 1..=k_max, built by one pass of the
/// residue DP: a depth-d tree is determined by its root residue mod
/// g^{d+1}, and its children are depth-(d-1) trees keyed mod g^d, so each
/// level refines the previous one. Tree types are interned per level from
/// (root label mod g, child type ids).
pub fn tree_census_table(g: u64, k_max: u32) -> Result<Vec<CensusRow>> {
    if !(g == 3 || g == 5) {
        return Err(Error::Domain("census supports multipliers 3 and 5".into()));
    }
    if k_max == 0 || k_max > census_limit(g) {
        return Err(Error::Domain(format!(
            "census depth must be in 1..={} for g={g}",
            census_limit(g)
        )));
    }
    let gu = g as usize;
    let ratio = (g as f64) / ((g + 1) as f64);

    // depth 0: bare roots keyed mod g
    let mut prev_counts: Vec<u16> = vec![1; gu];
    let mut prev_types: Vec<u32> = (0..gu as u32).collect();
    let mut child_mod = gu;

    let mut rows = Vec::with_capacity(k_max as usize);
    for d in 1..=k_max {
        let modulus = child_mod * gu;
        let mut counts = vec![0u16; modulus];
        let mut types = vec![0u32; modulus];
        let mut intern: HashMap<u64, u32> = HashMap::new();
        let (mut lo, mut hi, mut sum) = (u16::MAX, 0u16, 0u64);
        for a in 0..modulus {
            if a % gu == 0 {
                continue;
            }
            let c1 = (2 * a) % child_mod;
            let branch = branch_allowed(gu, a);
            let mut n = prev_counts[c1];
            let t2 = if branch {
                let c2 = ((2 * a - 1) / gu) % child_mod;
                n += prev_counts[c2];
                prev_types[c2]
            } else {
                0xff_ffff
            };
            let key =
                (a % gu) as u64 | ((prev_types[c1] as u64) << 4) | ((t2 as u64) << 34);
            let next_id = intern.len() as u32;
            let tid = *intern.entry(key).or_insert(next_id);
            debug_assert!(tid < 0xff_ffff, "type id overflows the packing");
            counts[a] = n;
            types[a] = tid;
            lo = lo.min(n);
            hi = hi.max(n);
            sum += n as u64;
        }
        let scale = ratio.powi(d as i32);
        rows.push(CensusRow {
            k: d,
            tree_types: intern.len() as u64,
            n_minus: lo as u64,
            n_plus: hi as u64,
            leaf_sum: sum,
            mean: (1.0 / ratio).powi(d as i32),
            d_minus: lo as f64 * scale,
            d_plus: hi as f64 * scale,
        });
        prev_counts = counts;
        prev_types = types;
        child_mod = modulus;
    }
    Ok(rows)
}

pub fn tree_census(g: u64, k: u32) -> Result<CensusRow> {
    Ok(tree_census_table(g, k)?.pop().expect("k >= 1"))
}

/// Σ N_k*(a) over admissible residues mod g^{k+1}, exactly.
pub fn census_sum_identity(g: u64, k: u32) -> Result<u64> {
    if k == 0 {
        return Ok(g - 1); // one bare root per admissible residue mod g
    }
    Ok(tree_census_table(g, k)?.last().expect("nonempty").leaf_sum)
}

/// Census rows rendered as CSV in the table's column order.
pub fn census_csv(rows: &[CensusRow]) -> String {
    let mut out = String::from("k,types,n_minus,n_plus,mean,d_minus,d_plus\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.2},{:.3},{:.3}\n",
            r.k, r.tree_types, r.n_minus, r.n_plus, r.mean, r.d_minus, r.d_plus
        ));
    }
    out
}

/// Result of counting inverse iterates of a up to |n| <= x.
#[derive(Debug, Clone, Serialize)]
pub struct InverseCount {
    /// Seeds whose forward orbit provably hits a.
    pub count: u64,
    /// Seeds whose orbit neither hit a nor resolved within the budget
    /// (possible on divergent orbits, e.g. under the 5x+1 map).
    pub unresolved: u64,
    pub exact: bool,
}

const MEMO_RADIUS: i64 = 1 << 12;
const CYCLE_WATCH: i128 = 512;

/// π_a(x): how many |n| <= x contain a in their forward orbit (k >= 0
/// applications allowed, so a itself counts). Exact via forward iteration
/// of every seed; orbits that re-enter a small value already seen are in a
/// cycle and resolve as misses, and a per-seed step budget guards against
/// unresolvable (divergent) orbits, which are reported separately.
pub fn count_inverse_iterates(
    spec: &MapSpec,
    a: i64,
    x: u64,
    budget: u64,
) -> Result<InverseCount> {
    require_halved(spec)?;
    if x < a.unsigned_abs() {
        return Err(Error::Domain("need x >= |a|".into()));
    }
    if x > i64::MAX as u64 {
        return Err(Error::Domain("x out of range".into()));
    }
    let g = spec.multiplier() as i128;
    let target = a as i128;
    // memo of definite outcomes for small |v|
    let mut memo: Vec<i8> = vec![-1; (2 * MEMO_RADIUS + 1) as usize];
    let memo_at = |v: i128| -> Option<usize> {
        (v.unsigned_abs() <= MEMO_RADIUS as u128).then(|| (v as i64 + MEMO_RADIUS) as usize)
    };
    let mut count = 0u64;
    let mut unresolved = 0u64;
    let xi = x as i128;
    let mut n = -xi;
    while n <= xi {
        let mut v = n;
        let mut path: Vec<usize> = Vec::new();
        let mut watched: HashSet<i128> = HashSet::new();
        let mut outcome: i8 = -1; // 1 hit, 0 miss, -1 unresolved
        let mut steps = 0u64;
        loop {
            if v == target {
                outcome = 1;
                break;
            }
            if let Some(slot) = memo_at(v) {
                if memo[slot] >= 0 {
                    outcome = memo[slot];
                    break;
                }
                path.push(slot);
            }
            // revisiting a small value means the orbit is in a cycle that
            // does not contain a (a is checked before insertion)
            if v.abs() <= CYCLE_WATCH && !watched.insert(v) {
                outcome = 0;
                break;
            }
            if steps >= budget {
                break;
            }
            steps += 1;
            v = if v.rem_euclid(2) == 0 { v / 2 } else { (g * v + 1) / 2 };
        }
        match outcome {
            1 => count += 1,
            0 => {}
            _ => unresolved += 1,
        }
        if outcome >= 0 {
            for slot in path {
                memo[slot] = outcome;
            }
        }
        n += 1;
    }
    Ok(InverseCount { count, unresolved, exact: unresolved == 0 })
}

/// Lower bound on π_a(x) by breadth-first search up the preimage tree,
/// expanding only labels with |label| <= 2x. Sound because every node
/// reached is a genuine inverse iterate; it undercounts exactly the seeds
/// whose forward orbit exceeds 2x before reaching a.
pub fn bfs_lower_bound(
    spec: &MapSpec,
    a: i64,
    x: u64,
    node_budget: usize,
) -> Result<InverseCount> {
    require_halved(spec)?;
    if x < a.unsigned_abs() {
        return Err(Error::Domain("need x >= |a|".into()));
    }
    let frontier = 2 * x as i128;
    let mut seen: HashSet<i128> = HashSet::new();
    let mut queue: VecDeque<i64> = VecDeque::new();
    seen.insert(a as i128);
    queue.push_back(a);
    let mut count = u64::from(a.unsigned_abs() <= x);
    let mut truncated = false;
    while let Some(v) = queue.pop_front() {
        if seen.len() >= node_budget {
            truncated = true;
            break;
        }
        for p in inverse_image(spec, v)? {
            if (p as i128).abs() > frontier || !seen.insert(p as i128) {
                continue;
            }
            if p.unsigned_abs() <= x {
                count += 1;
            }
            queue.push_back(p);
        }
    }
    Ok(InverseCount { count, unresolved: 0, exact: !truncated })
}
