//! Large-deviations engine: moment generating functions, Legendre-transform
//! rate functions, and the root/fixed-point/variational problems that yield
//! the predicted constants.
//!
//! Conventions. Walks are measured as log-descent per step: a halving step
//! descends by ln 2, an odd step of the halved map descends by ln(2/g)
//! (negative, i.e. the value grows). The random-walk MGF for the g case is
//! M(th) = (2^th + (2/g)^th)/2. Branching processes use position increments
//! with expected-offspring weights: M_BP(th) = 2^th + (1/g)(2/g)^th, which
//! satisfies M_BP(th) = M_RRW(th + 1) identically.

use crate::error::{Error, Result};

const TOL: f64 = 1e-14;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgfKind {
    /// Weights are probabilities summing to 1 (so M(0) = 1).
    Rrw,
    /// Weights are expected offspring contributions (M(0) = mean offspring).
    Bp,
}

/// Finite-atom moment generating function M(th) = sum w_i exp(th s_i).
#[derive(Debug, Clone)]
pub struct Mgf {
    atoms: Vec<(f64, f64)>, // (weight, step)
    kind: MgfKind,
}

impl Mgf {
    pub fn new(atoms: Vec<(f64, f64)>, kind: MgfKind) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("MGF needs at least one atom".into()));
        }
        if atoms.iter().any(|&(w, _)| w <= 0.0 || !w.is_finite()) {
            return Err(Error::Domain("MGF weights must be positive".into()));
        }
        if kind == MgfKind::Rrw {
            let total: f64 = atoms.iter().map(|&(w, _)| w).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "RRW weights must sum to 1, got {total}"
                )));
            }
        }
        Ok(Self { atoms, kind })
    }

    /// Random-walk MGF of the halved map's descent steps:
    /// (2^th + (2/g)^th)/2.
    pub fn rrw(g: u64) -> Self {
        let g = g as f64;
        Self {
            atoms: vec![(0.5, 2f64.ln()), (0.5, (2.0 / g).ln())],
            kind: MgfKind::Rrw,
        }
    }

    /// Branching-process MGF 2^th + (1/g)(2/g)^th.
    pub fn bp(g: u64) -> Self {
        let g = g as f64;
        Self {
            atoms: vec![(1.0, 2f64.ln()), (1.0 / g, (2.0 / g).ln())],
            kind: MgfKind::Bp,
        }
    }

    /// The variant (2^th + (5/2)^th)/2 that appears in one printed form of
    /// the 5x+1 analysis. It mixes a descent step with an ascent step, is
    /// strictly increasing, and therefore admits no nonzero root of
    /// M(th) = 1 and no stopping fixed point; it is kept constructible so
    /// the discrepancy between the two printed forms can be demonstrated
    /// rather than silently patched over.
    pub fn rrw5_ascent_textual() -> Self {
        Self {
            atoms: vec![(0.5, 2f64.ln()), (0.5, 2.5f64.ln())],
            kind: MgfKind::Rrw,
        }
    }

    /// Deterministic single-step walk (probability 1 of descending `step`).
    pub fn deterministic(step: f64) -> Self {
        Self { atoms: vec![(1.0, step)], kind: MgfKind::Rrw }
    }

    pub fn kind(&self) -> MgfKind {
        self.kind
    }

    pub fn min_step(&self) -> f64 {
        self.atoms.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min)
    }

    pub fn max_step(&self) -> f64 {
        self.atoms.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max)
    }

    fn is_degenerate(&self) -> bool {
        self.max_step() - self.min_step() < 1e-15
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.ln_eval(theta).exp()
    }

    /// ln M(th), evaluated with max-term factoring so extreme th cannot
    /// overflow.
    pub fn ln_eval(&self, theta: f64) -> f64 {
        let m = self
            .atoms
            .iter()
            .map(|&(w, s)| w.ln() + theta * s)
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self.atoms.iter().map(|&(w, s)| (w.ln() + theta * s - m).exp()).sum();
        m + sum.ln()
    }

    /// (ln M)'(th): the mean step under the exponentially tilted measure.
    pub fn ln_deriv(&self, theta: f64) -> f64 {
        self.tilted_moments(theta).0
    }

    /// ((ln M)'(th), (ln M)''(th)) = tilted (mean, variance). The variance is
    /// positive for nondegenerate atom sets, which is what makes every Newton
    /// iteration below monotone-safe.
    pub fn tilted_moments(&self, theta: f64) -> (f64, f64) {
        let m = self
            .atoms
            .iter()
            .map(|&(w, s)| w.ln() + theta * s)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for &(w, s) in &self.atoms {
            let p = (w.ln() + theta * s - m).exp();
            z += p;
            s1 += p * s;
            s2 += p * s * s;
        }
        let mean = s1 / z;
        (mean, (s2 / z - mean * mean).max(0.0))
    }

    /// Drift of the walk: mean step (ln M)'(0).
    pub fn drift(&self) -> f64 {
        self.ln_deriv(0.0)
    }

    /// Solve (ln M)'(th) = a for th. Requires min_step < a < max_step.
    fn tilt_for_mean(&self, a: f64) -> Result<f64> {
        if !(self.min_step() < a && a < self.max_step()) {
            return Err(Error::Domain(format!(
                "target mean {a} outside open step hull ({}, {})",
                self.min_step(),
                self.max_step()
            )));
        }
        // (ln M)' is strictly increasing; expand a bracket, then Newton.
        let (mut lo, mut hi) = (-1.0, 1.0);
        for _ in 0..200 {
            if self.ln_deriv(lo) <= a {
                break;
            }
            lo *= 2.0;
        }
        for _ in 0..200 {
            if self.ln_deriv(hi) >= a {
                break;
            }
            hi *= 2.0;
        }
        newton(
            |th| {
                let (mean, var) = self.tilted_moments(th);
                (mean - a, var)
            },
            lo,
            hi,
        )
    }
}

/// One point of a Legendre transform: g(a) with its maximizing tilt.
#[derive(Debug, Clone, Copy)]
pub struct RatePoint {
    pub a: f64,
    pub g: f64,
    pub theta: f64,
}

/// g(a) = sup_th (a th - ln M(th)).
pub fn rate_function(mgf: &Mgf, a: f64) -> Result<RatePoint> {
    let theta = mgf.tilt_for_mean(a)?;
    Ok(RatePoint { a, g: a * theta - mgf.ln_eval(theta), theta })
}

/// Signed branching rate gbar(a) = -sup_{th <= 0} (a th - ln M(th)).
///
/// Positive where generation-k populations hold ~exp(k gbar(a)) individuals
/// at positions <= a k; equal to ln M(0) (the plateau) once a exceeds the
/// unconstrained mean (ln M)'(0); -infinity below the minimal step.
pub fn signed_bp_rate(mgf: &Mgf, a: f64) -> Result<f64> {
    let s_min = mgf.min_step();
    if a < s_min - 1e-12 {
        return Ok(f64::NEG_INFINITY);
    }
    if a <= s_min + 1e-12 {
        // sup attained in the th -> -inf limit; only the minimal atom survives
        let w_min = self_weight_at_min(mgf);
        return Ok(w_min.ln());
    }
    if a >= mgf.ln_deriv(0.0) {
        return Ok(mgf.ln_eval(0.0));
    }
    let p = rate_function(mgf, a)?;
    Ok(-p.g)
}

fn self_weight_at_min(mgf: &Mgf) -> f64 {
    let s_min = mgf.min_step();
    mgf.atoms
        .iter()
        .filter(|&&(_, s)| (s - s_min).abs() < 1e-15)
        .map(|&(w, _)| w)
        .sum()
}

#[derive(Debug, Clone, Copy)]
pub struct GammaSolution {
    pub gamma: f64,
    /// a = 1/gamma, the descent rate at the fixed point.
    pub a: f64,
    pub theta: f64,
}

/// Fixed point gamma * g(1/gamma) = 1, the unique root with gamma > 1/drift.
///
/// Parameterized by a = 1/gamma: g(a) - a is strictly decreasing on
/// (0, drift) from g(0) > 0 to -drift < 0, so the root is bracketed and
/// unique. Requires positive drift (the walk must actually descend on
/// average); a deterministic walk of step s descends ln n in (1/s) ln n
/// steps, returned as the degenerate limit.
pub fn solve_gamma(mgf: &Mgf) -> Result<GammaSolution> {
    if mgf.kind() != MgfKind::Rrw {
        return Err(Error::Solver("stopping fixed point is defined for RRW kind".into()));
    }
    if mgf.is_degenerate() {
        let s = mgf.min_step();
        if s <= 0.0 {
            return Err(Error::Solver("deterministic walk does not descend".into()));
        }
        return Ok(GammaSolution { gamma: 1.0 / s, a: s, theta: 0.0 });
    }
    let d = mgf.drift();
    if d <= 0.0 {
        return Err(Error::Solver(format!(
            "walk drift {d} is not a descent; no stopping fixed point"
        )));
    }
    let f = |a: f64| -> Result<f64> { Ok(rate_function(mgf, a)?.g - a) };
    let lo = d * 1e-12;
    let hi = d * (1.0 - 1e-12);
    if f(lo)? <= 0.0 || f(hi)? >= 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    let a = bisect_result(f, lo, hi)?;
    let p = rate_function(mgf, a)?;
    Ok(GammaSolution { gamma: 1.0 / a, a, theta: p.theta })
}

#[derive(Debug, Clone, Copy)]
pub struct FirstBirthSolution {
    pub beta: f64,
    pub theta: f64,
}

/// First-birth constant: the root of gbar(beta) = 0 on the increasing
/// branch, located by the tangency condition
/// th (ln M)'(th) - ln M(th) = 0 with th < 0.
pub fn solve_first_birth(mgf: &Mgf) -> Result<FirstBirthSolution> {
    if mgf.kind() != MgfKind::Bp {
        return Err(Error::Solver("first birth is defined for BP kind".into()));
    }
    let h = |th: f64| -> (f64, f64) {
        let (mean, var) = mgf.tilted_moments(th);
        (th * mean - mgf.ln_eval(th), th * var)
    };
    // h(0) = -ln M(0) < 0 for supercritical BP; h -> -ln w_min > 0 as
    // th -> -inf; h' = th (ln M)'' < 0 on th < 0, so the root is unique.
    let mut lo = -1.0;
    for _ in 0..200 {
        if h(lo).0 > 0.0 {
            break;
        }
        lo *= 2.0;
    }
    if h(lo).0 <= 0.0 {
        return Err(Error::NoBracket { lo, hi: 0.0 });
    }
    let theta = newton(h, lo, -1e-12)?;
    Ok(FirstBirthSolution { beta: mgf.ln_deriv(theta), theta })
}

/// Both roots of M(th) = 1 around the minimum of ln M.
///
/// Errors when the tilted mean never vanishes (monotone M, as for the
/// textual ascent variant) or when min M > 1.
pub fn unit_roots(mgf: &Mgf) -> Result<(f64, f64)> {
    let (s_min, s_max) = (mgf.min_step(), mgf.max_step());
    if s_min >= 0.0 || s_max <= 0.0 {
        return Err(Error::Solver(
            "M is monotone (all steps share a sign); no nonzero root of M = 1".into(),
        ));
    }
    // Minimize ln M: solve (ln M)' = 0.
    let th_min = mgf.tilt_for_mean(0.0)?;
    if mgf.ln_eval(th_min) > 0.0 {
        return Err(Error::Solver("min M > 1; no roots of M = 1".into()));
    }
    let f = |th: f64| {
        let (mean, _) = mgf.tilted_moments(th);
        (mgf.ln_eval(th), mean)
    };
    let mut lo = th_min - 1.0;
    for _ in 0..200 {
        if mgf.ln_eval(lo) > 0.0 {
            break;
        }
        lo -= (th_min - lo).abs();
    }
    let left = newton(f, lo, th_min)?;
    let mut hi = th_min + 1.0;
    for _ in 0..200 {
        if mgf.ln_eval(hi) > 0.0 {
            break;
        }
        hi += (hi - th_min).abs();
    }
    let right = newton(f, th_min, hi)?;
    Ok((left, right))
}

/// The nonzero root of M(th) = 1 for an RRW-kind MGF (whose trivial root
/// is 0).
pub fn solve_nonzero_root(mgf: &Mgf) -> Result<f64> {
    if mgf.kind() != MgfKind::Rrw {
        return Err(Error::Solver("nonzero unit root is an RRW-kind operation".into()));
    }
    let (left, right) = unit_roots(mgf)?;
    Ok(if left.abs() > right.abs() { left } else { right })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationalMode {
    /// min of g(a)/a over positive a.
    MinRateOverA,
    /// max of |a|/g(a); used with negative-a intervals for ascent programs.
    MaxAbsAOverRate,
    /// max of gbar(a)/a (BP kind).
    MaxSignedRateOverA,
}

#[derive(Debug, Clone, Copy)]
pub struct VariationalSolution {
    pub a_star: f64,
    pub value: f64,
    pub theta: f64,
    /// Set when the optimizer landed on an interval endpoint, which usually
    /// means the interval truncated the true optimum.
    pub at_boundary: bool,
}

/// 1-D variational problems over the rate functions, by golden-section with
/// the objective's natural sign folded in.
pub fn solve_variational(
    mgf: &Mgf,
    mode: VariationalMode,
    interval: (f64, f64),
) -> Result<VariationalSolution> {
    let (lo, hi) = interval;
    if !(lo < hi) {
        return Err(Error::Domain("empty variational interval".into()));
    }
    let objective = |a: f64| -> f64 {
        let val = match mode {
            VariationalMode::MinRateOverA => match rate_function(mgf, a) {
                Ok(p) => p.g / a,
                Err(_) => f64::INFINITY,
            },
            VariationalMode::MaxAbsAOverRate => match rate_function(mgf, a) {
                Ok(p) if p.g > 0.0 => -(a.abs() / p.g),
                _ => f64::INFINITY,
            },
            VariationalMode::MaxSignedRateOverA => match signed_bp_rate(mgf, a) {
                Ok(r) => -(r / a),
                Err(_) => f64::INFINITY,
            },
        };
        if val.is_nan() {
            f64::INFINITY
        } else {
            val
        }
    };
    let a_star = golden_min(objective, lo, hi);
    let raw = objective(a_star);
    if !raw.is_finite() {
        return Err(Error::Solver("variational objective not finite at optimum".into()));
    }
    let value = match mode {
        VariationalMode::MinRateOverA => raw,
        _ => -raw,
    };
    let theta = match mode {
        VariationalMode::MaxSignedRateOverA => rate_function(mgf, a_star).map(|p| p.theta)?,
        _ => rate_function(mgf, a_star)?.theta,
    };
    let span = hi - lo;
    let at_boundary = (a_star - lo).abs() < 1e-6 * span || (hi - a_star).abs() < 1e-6 * span;
    Ok(VariationalSolution { a_star, value, theta, at_boundary })
}

/// Largest |M_BP(th) - M_RRW(th + 1)| over a uniform grid; the identity is
/// exact, so this measures only floating-point noise.
pub fn duality_residual(bp: &Mgf, rrw: &Mgf, lo: f64, hi: f64, n: usize) -> f64 {
    (0..=n)
        .map(|i| {
            let th = lo + (hi - lo) * i as f64 / n as f64;
            (bp.eval(th) - rrw.eval(th + 1.0)).abs()
        })
        .fold(0.0, f64::max)
}

/// Newton with bisection safeguard on a bracketing interval.
/// `f` returns (value, derivative); requires f(lo) and f(hi) of opposite
/// signs (checked).
fn newton(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let step_ok = dfx != 0.0 && {
            let nx = x - fx / dfx;
            nx > lo && nx < hi
        };
        let next = if step_ok { x - fx / dfx } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= TOL * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

fn bisect_result(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let flo = f(lo)?;
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= TOL * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..300 {
        if (hi - lo).abs() < 1e-13 * (1.0 + lo.abs() + hi.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// A named constant with its defining formula, for reporting.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NamedConstant {
    pub name: &'static str,
    pub value: f64,
    pub formula: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

fn c(name: &'static str, value: f64, formula: &'static str) -> NamedConstant {
    NamedConstant { name, value, formula, note: None }
}

fn cn(
    name: &'static str,
    value: f64,
    formula: &'static str,
    note: &'static str,
) -> NamedConstant {
    NamedConstant { name, value, formula, note: Some(note) }
}

/// Every predicted constant the solver produces, with closed forms where
/// they exist.
pub fn constants() -> Vec<NamedConstant> {
    let ln2 = 2f64.ln();
    let ln3 = 3f64.ln();
    let ln5 = 5f64.ln();
    let ln43 = (4f64 / 3.0).ln();

    let rrw3 = Mgf::rrw(3);
    let bp3 = Mgf::bp(3);
    let rrw5 = Mgf::rrw(5);
    let bp5 = Mgf::bp(5);

    let gamma3 = solve_gamma(&rrw3).expect("3x+1 fixed point");
    let beta3 = solve_first_birth(&bp3).expect("3x+1 first birth");
    let theta3 = solve_nonzero_root(&rrw3).expect("3x+1 unit root");
    let theta5 = solve_nonzero_root(&rrw5).expect("5x+1 unit root");
    let beta5 = solve_first_birth(&bp5).expect("5x+1 first birth");
    let edge3 = bp3.ln_deriv(0.0);
    let edge5 = bp5.ln_deriv(0.0);
    let eta3 = solve_variational(&bp3, VariationalMode::MaxSignedRateOverA, (1e-3, edge3))
        .expect("3x+1 count exponent");
    let eta5 = solve_variational(&bp5, VariationalMode::MaxSignedRateOverA, (1e-3, edge5))
        .expect("5x+1 count exponent");
    let tau5 = solve_variational(&rrw5, VariationalMode::MinRateOverA, (1e-6, ln2 - 1e-9))
        .expect("5x+1 min rate ratio");
    let ascent3 = solve_variational(
        &rrw3,
        VariationalMode::MaxAbsAOverRate,
        (rrw3.min_step() + 1e-9, -1e-6),
    )
    .expect("3x+1 ascent program");

    let slope = 0.75 * ln3 - ln2;
    let peak_x = 1.0 / slope;
    let end_x = peak_x + 2.0 / (0.5 * ln43);

    vec![
        c("drift_3", 0.5 * (3f64 / 4.0).ln(), "ln(3/4)/2"),
        c("step_sd_3", 0.5 * ln3, "ln(3)/2"),
        c("drift_5", 0.5 * (5f64 / 4.0).ln(), "ln(5/4)/2"),
        c("step_sd_5", 0.5 * ln5, "ln(5)/2"),
        c("mean_halved_steps_per_log", 2.0 / ln43, "2/ln(4/3)"),
        c("mean_accelerated_steps_per_log", 1.0 / ln43, "1/ln(4/3)"),
        c(
            "total_stopping_lower_bound_3",
            29.0 / (29.0 * ln2 - 14.0 * ln3),
            "29/(29 ln2 - 14 ln3)",
        ),
        c(
            "total_stopping_lower_bound_5",
            (ln2 + ln5) / (ln2 * ln2),
            "(ln2 + ln5)/(ln2)^2",
        ),
        c("gamma_rrw_3", gamma3.gamma, "unique gamma > 1/|mu| with gamma*g(1/gamma) = 1"),
        c("beta_bp_3", beta3.beta, "root of signed BP rate, g = 3"),
        c("rho_rrw_3", 1.0 + 1.0 / theta3.abs(), "1 + 1/|theta*|, M_rrw3(theta*) = 1"),
        c("theta_unit_root_3", theta3, "nonzero root of M_rrw3 = 1 (exactly -1)"),
        c("excursion_ascent_slope", slope, "(3/4) ln3 - ln2"),
        c("excursion_peak_x", peak_x, "1/((3/4) ln3 - ln2)"),
        c("excursion_end_x", end_x, "peak_x + 2/((1/2) ln(4/3))"),
        c("ascent_rate_3", ascent3.a_star.abs(), "optimal ascent rate (equals the overlay slope)"),
        c("bp_growth_3", ln43, "ln(4/3)"),
        c("bp_growth_5", (6f64 / 5.0).ln(), "ln(6/5)"),
        c("count_exponent_3", eta3.value, "max over a of gbar_3(a)/a (equals 1)"),
        c(
            "bulk_generations_per_log_3",
            1.0 / eta3.a_star,
            "1/a*, g = 3 (coincides with 2/ln(4/3))",
        ),
        c("theta_star_5", theta5, "nonzero root of M_rrw5 = 1"),
        c("rho_minus_5", 1.0 - 1.0 / theta5, "1 - 1/theta*"),
        c("eta_rrw_5", 1.0 - tau5.value, "1 - min over a of g_5(a)/a"),
        c("beta_bp_5", beta5.beta, "root of signed BP rate, g = 5"),
        cn(
            "gamma_bp_5",
            1.0 / beta5.beta,
            "1/beta_bp_5",
            "printed elsewhere as 84.76012 = 1/0.011798 (5-digit truncation of beta)",
        ),
        c("eta_bp_5", eta5.value, "max over a of gbar_5(a)/a on [0, plateau edge)"),
        c("bulk_rate_5", eta5.a_star, "a* attaining the 5x+1 count exponent"),
        cn(
            "bulk_generations_per_log_5",
            1.0 / eta5.a_star,
            "1/a*, g = 5",
            "printed elsewhere as 9.19963 = 1/0.1087 (4-digit rounding of a*)",
        ),
        c("plateau_edge_3", edge3, "ln2 - (1/4) ln3"),
        c("plateau_edge_5", edge5, "(1/6) ln(64/5)"),
    ]
}

pub fn constant(name: &str) -> Option<f64> {
    constants().into_iter().find(|k| k.name == name).map(|k| k.value)
}
