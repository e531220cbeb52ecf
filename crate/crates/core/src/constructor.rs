//! MIW sequences: forward shooting on the first point, bracketing and
//! bisection over the achieved-counts ordering, then a Newton polish.
//!
//! A sequence `x_1 < … < x_N` is MIW for `f` when, with `ζ_n = 1/(x_n - x_{n-1})`
//! and the sentinels `ζ_1 = ζ_{N+1} = 0`,
//! `ζ_{n+1} - ζ_n = η(x_n)` for every `n`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{MiwError, Result};
use crate::quad::{integrate, QuadOptions};
use crate::scalar::Real;
use crate::states::EnergyState;

pub const MAX_POINTS: usize = 100_000;
/// Points closer than this to a root abort a shot.
pub const ROOT_GUARD: f64 = 1e-12;
pub const SCAN_POINTS: usize = 256;
pub const MAX_REFINEMENTS: usize = 3;
pub const MAX_BISECTIONS: usize = 200;
/// Right boundary residual at which bisection stops early.
pub const BISECT_TARGET: f64 = 1e-10;
const SPAN_CONSTANT: f64 = 2.0;
const MAX_NEWTON: usize = 60;
const ROOT_RETRIES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "step")]
pub enum ShootOutcome {
    Completed,
    /// `D_n ≤ 0` at the given 1-based point index `n < N`.
    TerminatedEarly(usize),
    /// The given 1-based point landed within [`ROOT_GUARD`] of a root.
    RootHit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult<T> {
    pub trajectory: Vec<T>,
    pub regions: Vec<usize>,
    pub classification: ShootOutcome,
    /// `D_N = ζ_N + η(x_N)` when the shot completed.
    pub signed_residual: Option<T>,
    pub achieved_counts: Vec<usize>,
}

/// Forward recursion from `x1`: `x_2 = x_1 + 1/η(x_1)`, then
/// `x_{n+1} = x_n + 1/D_n` with `D_n = ζ_n + η(x_n)` while `D_n > 0`.
pub fn shoot<T: Real>(state: &EnergyState<T>, x1: T, n: usize) -> Result<ShootResult<T>> {
    if n == 0 {
        return Err(MiwError::InvalidArgument("N must be positive".into()));
    }
    if !x1.is_finite() || state.region_of(x1) != 0 || state.roots.first().is_some_and(|&r| r == x1) {
        return Err(MiwError::InvalidStart { x1: x1.as_f64(), reason: "not in the leftmost region" });
    }
    let z = state.eta(x1);
    if !(z > T::zero()) {
        return Err(MiwError::InvalidStart { x1: x1.as_f64(), reason: "η(x1) is not positive" });
    }
    let guard = T::lit(ROOT_GUARD);
    let mut trajectory = Vec::with_capacity(n);
    let mut regions = Vec::with_capacity(n);
    let mut achieved = vec![0usize; state.num_regions()];
    let mut push = |x: T, traj: &mut Vec<T>, regs: &mut Vec<usize>| {
        let k = state.region_of(x);
        traj.push(x);
        regs.push(k);
        achieved[k] += 1;
    };
    push(x1, &mut trajectory, &mut regions);
    if state.root_distance(x1) <= guard {
        return Ok(finish(trajectory, regions, ShootOutcome::RootHit(1), None, achieved));
    }
    // zeta holds ζ_{k+1} for the current last point x_k, i.e. D_k.
    let mut zeta = z;
    let mut x = x1;
    if n == 1 {
        return Ok(finish(trajectory, regions, ShootOutcome::Completed, Some(zeta), achieved));
    }
    for k in 1..n {
        if !(zeta > T::zero()) {
            return Ok(finish(trajectory, regions, ShootOutcome::TerminatedEarly(k), None, achieved));
        }
        x = x + T::one() / zeta;
        push(x, &mut trajectory, &mut regions);
        if state.root_distance(x) <= guard || !x.is_finite() {
            return Ok(finish(trajectory, regions, ShootOutcome::RootHit(k + 1), None, achieved));
        }
        zeta = zeta + state.eta(x);
    }
    Ok(finish(trajectory, regions, ShootOutcome::Completed, Some(zeta), achieved))
}

fn finish<T>(
    trajectory: Vec<T>,
    regions: Vec<usize>,
    classification: ShootOutcome,
    signed_residual: Option<T>,
    achieved_counts: Vec<usize>,
) -> ShootResult<T> {
    ShootResult { trajectory, regions, classification, signed_residual, achieved_counts }
}

/// Orders a shot against the target: `Less` means `x1` is too small.
///
/// The first point whose region differs from its target decides; a shot that
/// matches throughout but stops early is too large; a completed matching shot
/// is ordered by the sign of `D_N`.
pub fn compare_shot<T: Real>(shot: &ShootResult<T>, target: &[usize]) -> Ordering {
    for (got, want) in shot.regions.iter().zip(target) {
        if got != want {
            return got.cmp(want);
        }
    }
    match shot.classification {
        ShootOutcome::Completed => match shot.signed_residual {
            Some(d) if d > T::zero() => Ordering::Less,
            Some(d) if d < T::zero() => Ordering::Greater,
            _ => Ordering::Equal,
        },
        ShootOutcome::TerminatedEarly(_) => Ordering::Greater,
        // A root hit on the last matching point: the next point never existed.
        ShootOutcome::RootHit(_) => Ordering::Greater,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals<T> {
    pub interior: T,
    pub left_bc: T,
    pub right_bc: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructMeta<T> {
    pub bisection_iterations: usize,
    pub bracket: (T, T),
    pub refinements: usize,
    pub newton_iterations: usize,
    /// `|D_N|` of the best completed shot in the target class, if any.
    pub shoot_residual: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiwSequence<T> {
    pub ell: usize,
    pub counts: Vec<usize>,
    pub points: Vec<T>,
    pub residuals: Residuals<T>,
    pub meta: ConstructMeta<T>,
}

/// JSON form `{ell, counts, points, residuals}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiwRecord {
    pub ell: usize,
    pub counts: Vec<usize>,
    pub points: Vec<f64>,
    pub residuals: Residuals<f64>,
}

impl<T: Real> MiwSequence<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn record(&self) -> MiwRecord {
        MiwRecord {
            ell: self.ell,
            counts: self.counts.clone(),
            points: self.points.iter().map(|x| x.as_f64()).collect(),
            residuals: Residuals {
                interior: self.residuals.interior.as_f64(),
                left_bc: self.residuals.left_bc.as_f64(),
                right_bc: self.residuals.right_bc.as_f64(),
            },
        }
    }

    /// Points lying in region `k`.
    pub fn region_part(&self, k: usize) -> &[T] {
        let start: usize = self.counts[..k].iter().sum();
        &self.points[start..start + self.counts[k]]
    }
}

impl MiwRecord {
    /// Rebuilds a sequence from its record; residuals are recomputed.
    pub fn into_sequence<T: Real>(self, state: &EnergyState<T>) -> Result<MiwSequence<T>> {
        if state.ell != self.ell {
            return Err(MiwError::InvalidArgument(format!("record has ell {} but state has {}", self.ell, state.ell)));
        }
        let total: usize = self.counts.iter().sum();
        if self.counts.len() != state.num_regions() || total != self.points.len() {
            return Err(MiwError::InvalidCounts(format!("counts {:?} do not describe {} points", self.counts, self.points.len())));
        }
        let points: Vec<T> = self.points.iter().map(|&x| T::lit(x)).collect();
        let zero = (T::zero(), T::zero());
        let mut seq = MiwSequence {
            ell: self.ell,
            counts: self.counts,
            points,
            residuals: Residuals { interior: T::zero(), left_bc: T::zero(), right_bc: T::zero() },
            meta: ConstructMeta { bisection_iterations: 0, bracket: zero, refinements: 0, newton_iterations: 0, shoot_residual: None },
        };
        let report = verify(&seq, state);
        if let Some(i) = report.not_increasing {
            return Err(MiwError::NotIncreasing(i));
        }
        seq.residuals = report.residuals;
        Ok(seq)
    }
}

fn check_counts<T: Real>(state: &EnergyState<T>, counts: &[usize]) -> Result<usize> {
    if counts.len() != state.num_regions() {
        return Err(MiwError::InvalidCounts(format!(
            "expected {} region counts for ell = {}, got {}",
            state.num_regions(),
            state.ell,
            counts.len()
        )));
    }
    if state.ell == 0 && counts[0] < 2 {
        return Err(MiwError::InvalidCounts("the ground state needs at least 2 points".into()));
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(MiwError::InvalidCounts("every region needs at least one point".into()));
    }
    let n: usize = counts.iter().sum();
    if n > MAX_POINTS {
        return Err(MiwError::InvalidCounts(format!("N = {n} exceeds {MAX_POINTS}")));
    }
    Ok(n)
}

fn target_regions(counts: &[usize]) -> Vec<usize> {
    counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat(k).take(c)).collect()
}

/// Shot at `x1` compared with the target, with a nudge to the next float on a root hit.
fn probe<T: Real>(state: &EnergyState<T>, x1: T, target: &[usize]) -> (Ordering, Option<ShootResult<T>>) {
    let mut x = x1;
    for _ in 0..ROOT_RETRIES {
        match shoot(state, x, target.len()) {
            Err(_) => return (Ordering::Greater, None),
            Ok(s) => {
                if matches!(s.classification, ShootOutcome::RootHit(_)) {
                    let step = x.abs().max(T::one()) * T::epsilon();
                    x = x + step;
                    continue;
                }
                return (compare_shot(&s, target), Some(s));
            }
        }
    }
    match shoot(state, x, target.len()) {
        Ok(s) => (compare_shot(&s, target), Some(s)),
        Err(_) => (Ordering::Greater, None),
    }
}

struct Bracket<T> {
    lo: T,
    hi: T,
    refinements: usize,
}

fn scan<T: Real>(state: &EnergyState<T>, target: &[usize]) -> Result<Bracket<T>> {
    let n = target.len();
    let cap = state.roots.first().copied().unwrap_or(T::zero());
    let logn = T::from_usize_lossy(n.max(2)).ln();
    let mut lo = cap.min(T::zero()) - T::lit(SPAN_CONSTANT) * logn.sqrt() - T::lit(2.0);
    let mut points = SCAN_POINTS;
    let mut tallies = vec![];
    for refinement in 0..=MAX_REFINEMENTS {
        let mut prev: Option<(T, Ordering)> = None;
        let (mut less, mut greater) = (0usize, 0usize);
        for i in 0..points {
            let x = lo + (cap - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(points);
            let (ord, _) = probe(state, x, target);
            match ord {
                Ordering::Less => less += 1,
                _ => greater += 1,
            }
            if ord == Ordering::Equal {
                return Ok(Bracket { lo: x, hi: x, refinements: refinement });
            }
            if let Some((px, Ordering::Less)) = prev {
                if ord == Ordering::Greater {
                    return Ok(Bracket { lo: px, hi: x, refinements: refinement });
                }
            }
            prev = Some((x, ord));
        }
        tallies.push(format!("scan {refinement}: {points} points on [{lo}, {cap}) gave {less} too small, {greater} too large"));
        points *= 4;
        lo = cap - (cap - lo) * T::lit(2.0);
    }
    Err(MiwError::Construction(format!("no bracket for x1 ({})", tallies.join("; "))))
}

/// Keeps the completed in-class shot with the smallest `|D_N|`.
fn consider<T: Real>(best: &mut Option<(T, Vec<T>)>, s: &ShootResult<T>, target: &[usize]) {
    if s.classification == ShootOutcome::Completed && s.regions == target {
        let d = s.signed_residual.unwrap_or(T::infinity()).abs();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            *best = Some((d, s.trajectory.clone()));
        }
    }
}

/// The unique MIW sequence of `state` with `counts[k]` points in region `k`.
pub fn construct<T: Real>(state: &EnergyState<T>, counts: &[usize]) -> Result<MiwSequence<T>> {
    let n = check_counts(state, counts)?;
    let target = target_regions(counts);
    let bracket = scan(state, &target)?;
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut best: Option<(T, Vec<T>)> = None;
    for x in [lo, hi] {
        if let (_, Some(s)) = probe(state, x, &target) {
            consider(&mut best, &s, &target);
        }
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS && lo < hi {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let (ord, shot) = probe(state, mid, &target);
        if let Some(s) = &shot {
            consider(&mut best, s, &target);
        }
        match ord {
            Ordering::Less => lo = mid,
            Ordering::Greater => hi = mid,
            Ordering::Equal => {
                lo = mid;
                hi = mid;
            }
        }
        if best.as_ref().is_some_and(|(d, _)| *d <= T::lit(BISECT_TARGET)) {
            break;
        }
    }
    let shoot_residual = best.as_ref().map(|(d, _)| *d);
    let start = match best {
        Some((_, traj)) => traj,
        None => quantile_guess(state, counts)?,
    };
    let (points, newton_iterations) = polish(state, start, &target);
    let mut seq = MiwSequence {
        ell: state.ell,
        counts: counts.to_vec(),
        points,
        residuals: Residuals { interior: T::zero(), left_bc: T::zero(), right_bc: T::zero() },
        meta: ConstructMeta {
            bisection_iterations: iterations,
            bracket: (lo, hi),
            refinements: bracket.refinements,
            newton_iterations,
            shoot_residual,
        },
    };
    let report = verify(&seq, state);
    if report.not_increasing.is_some() || !report.counts_match {
        return Err(MiwError::Construction(format!("polished sequence left its class: {report:?}")));
    }
    seq.residuals = report.residuals;
    debug_assert!(n == seq.points.len());
    Ok(seq)
}

/// Region counts `N_k = ⌊N ∫_{R_k} f⌋` with the remainder in the last region.
pub fn auto_counts<T: Real>(state: &EnergyState<T>, n: usize) -> Result<Vec<usize>> {
    let masses = state.region_masses()?;
    let nf = T::from_usize_lossy(n);
    let mut counts: Vec<usize> = masses[..state.ell]
        .iter()
        .map(|m| (nf * m.mass).floor().to_usize().unwrap_or(0))
        .collect();
    let used: usize = counts.iter().sum();
    if used > n {
        return Err(MiwError::TooFewPoints(n));
    }
    counts.push(n - used);
    let min = if state.ell == 0 { 2 } else { 1 };
    if counts.iter().any(|&c| c < min) {
        return Err(MiwError::TooFewPoints(n));
    }
    Ok(counts)
}

pub fn construct_auto<T: Real>(state: &EnergyState<T>, n: usize) -> Result<MiwSequence<T>> {
    let counts = auto_counts(state, n)?;
    construct(state, &counts)
}

/// `F_n = ζ_{n+1} - ζ_n - η(x_n)`, the negative gradient of the concave
/// functional `L(x) = Σ log(x_{n+1} - x_n) + Σ log f(x_n)`.
fn stationarity<T: Real>(state: &EnergyState<T>, x: &[T]) -> Vec<T> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let up = if i + 1 < n { T::one() / (x[i + 1] - x[i]) } else { T::zero() };
            let down = if i > 0 { T::one() / (x[i] - x[i - 1]) } else { T::zero() };
            up - down - state.eta(x[i])
        })
        .collect()
}

fn objective<T: Real>(state: &EnergyState<T>, x: &[T]) -> T {
    let gaps: T = x.windows(2).map(|w| (w[1] - w[0]).ln()).sum();
    gaps + x.iter().map(|&v| state.log_weight(v)).sum::<T>()
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &a| m.max(a.abs()))
}

fn feasible<T: Real>(state: &EnergyState<T>, x: &[T], target: &[usize]) -> bool {
    x.windows(2).all(|w| w[1] > w[0])
        && x.iter().zip(target).all(|(&v, &k)| v.is_finite() && state.region_of(v) == k && state.root_distance(v) > T::zero())
}

/// Solves the symmetric tridiagonal system `J d = rhs` (Thomas algorithm).
fn solve_tridiagonal<T: Real>(diag: &[T], off: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = if n > 1 { off[0] / diag[0] } else { T::zero() };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    d
}

/// Newton iteration on `F = 0` with a feasibility-preserving backtrack. The
/// Jacobian is `-∇²L`, symmetric positive definite and tridiagonal.
fn polish<T: Real>(state: &EnergyState<T>, mut x: Vec<T>, target: &[usize]) -> (Vec<T>, usize) {
    let n = x.len();
    if n < 2 || !feasible(state, &x, target) {
        return (x, 0);
    }
    let mut f = stationarity(state, &x);
    let mut norm = max_abs(&f);
    let mut iterations = 0;
    let mut stalls = 0;
    for _ in 0..MAX_NEWTON {
        iterations += 1;
        let zeta2: Vec<T> = x.windows(2).map(|w| {
            let z = T::one() / (w[1] - w[0]);
            z * z
        }).collect();
        let diag: Vec<T> = (0..n)
            .map(|i| {
                let up = if i + 1 < n { zeta2[i] } else { T::zero() };
                let down = if i > 0 { zeta2[i - 1] } else { T::zero() };
                up + down - state.eta_prime(x[i])
            })
            .collect();
        let off: Vec<T> = zeta2.iter().map(|&z| -z).collect();
        let rhs: Vec<T> = f.iter().map(|&v| -v).collect();
        let step = solve_tridiagonal(&diag, &off, &rhs);
        let l0 = objective(state, &x);
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<T> = x.iter().zip(&step).map(|(&a, &d)| a + t * d).collect();
            if feasible(state, &trial, target) {
                let ft = stationarity(state, &trial);
                let nt = max_abs(&ft);
                if objective(state, &trial) >= l0 || nt < norm {
                    accepted = Some((trial, ft, nt));
                    break;
                }
            }
            t = t * T::lit(0.5);
        }
        let Some((trial, ft, nt)) = accepted else { break };
        let moved = x.iter().zip(&trial).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        let scale = max_abs(&x) + T::one();
        stalls = if nt < norm * T::lit(0.5) { 0 } else { stalls + 1 };
        x = trial;
        f = ft;
        norm = nt;
        if moved <= T::eps_times(4.0) * scale || stalls >= 3 {
            break;
        }
    }
    (x, iterations)
}

/// Mid-quantiles of each conditional region distribution, used to seed the
/// polish when no shot lands in the target class.
fn quantile_guess<T: Real>(state: &EnergyState<T>, counts: &[usize]) -> Result<Vec<T>> {
    let first = state.roots.first().copied().unwrap_or(T::zero());
    let last = state.roots.last().copied().unwrap_or(T::zero());
    let pad = T::lit(12.0);
    let (lo, hi) = (first - pad, last + pad);
    let cells = 4000;
    let h = (hi - lo) / T::from_usize_lossy(cells);
    let grid: Vec<T> = (0..=cells).map(|i| lo + h * T::from_usize_lossy(i)).collect();
    let opts = QuadOptions::new(1e-15, 1e-10);
    let mut cum = vec![T::zero(); cells + 1];
    for i in 0..cells {
        cum[i + 1] = cum[i] + integrate(|t| state.density(t), grid[i], grid[i + 1], &opts)?.value;
    }
    let total = cum[cells];
    let mut out = Vec::with_capacity(counts.iter().sum());
    for (k, &c) in counts.iter().enumerate() {
        let (a, b) = state.region_bounds(k);
        let fa = if a.is_finite() { interp_cdf(&grid, &cum, a) } else { T::zero() };
        let fb = if b.is_finite() { interp_cdf(&grid, &cum, b) } else { total };
        for j in 0..c {
            let q = fa + (fb - fa) * (T::from_usize_lossy(j) + T::lit(0.5)) / T::from_usize_lossy(c);
            let mut x = invert_cdf(&grid, &cum, q);
            let margin = T::lit(1e-9);
            if a.is_finite() {
                x = x.max(a + margin);
            }
            if b.is_finite() {
                x = x.min(b - margin);
            }
            out.push(x);
        }
    }
    Ok(out)
}

fn interp_cdf<T: Real>(grid: &[T], cum: &[T], x: T) -> T {
    let i = grid.partition_point(|&g| g <= x).clamp(1, grid.len() - 1);
    let w = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
    cum[i - 1] + w * (cum[i] - cum[i - 1])
}

fn invert_cdf<T: Real>(grid: &[T], cum: &[T], q: T) -> T {
    let i = cum.partition_point(|&c| c < q).clamp(1, cum.len() - 1);
    let span = cum[i] - cum[i - 1];
    let w = if span > T::zero() { (q - cum[i - 1]) / span } else { T::lit(0.5) };
    grid[i - 1] + w * (grid[i] - grid[i - 1])
}

/// Recomputed invariants of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport<T> {
    /// Max over `1 < n < N` of `|ζ_{n+1} - ζ_n - η(x_n)| / (1 + |η(x_n)|)`.
    pub residuals: Residuals<T>,
    /// First 1-based index `n` with `x_{n+1} ≤ x_n`.
    pub not_increasing: Option<usize>,
    pub achieved_counts: Vec<usize>,
    pub counts_match: bool,
    /// `max |x_n + x_{N-n+1}|` when the counts are palindromic.
    pub symmetry: Option<T>,
    pub min_root_distance: T,
}

impl<T: Real> VerifyReport<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.interior.max(self.residuals.left_bc).max(self.residuals.right_bc)
    }
}

pub fn verify<T: Real>(seq: &MiwSequence<T>, state: &EnergyState<T>) -> VerifyReport<T> {
    let x = &seq.points;
    let n = x.len();
    let not_increasing = x.windows(2).position(|w| !(w[1] > w[0])).map(|i| i + 1);
    let mut achieved = vec![0usize; state.num_regions()];
    for &v in x {
        achieved[state.region_of(v)] += 1;
    }
    let rel = |num: T, eta: T| num.abs() / (T::one() + eta.abs());
    let mut interior = T::zero();
    for i in 1..n.saturating_sub(1) {
        let eta = state.eta(x[i]);
        let r = rel(T::one() / (x[i + 1] - x[i]) - T::one() / (x[i] - x[i - 1]) - eta, eta);
        interior = if r.is_nan() { T::infinity() } else { interior.max(r) };
    }
    let (left_bc, right_bc) = if n >= 2 {
        let e1 = state.eta(x[0]);
        let en = state.eta(x[n - 1]);
        (rel(T::one() / (x[1] - x[0]) - e1, e1), rel(T::one() / (x[n - 1] - x[n - 2]) + en, en))
    } else if n == 1 {
        let e = state.eta(x[0]).abs();
        (e, e)
    } else {
        (T::zero(), T::zero())
    };
    let palindromic = seq.counts.iter().eq(seq.counts.iter().rev());
    let symmetry = palindromic.then(|| (0..n).fold(T::zero(), |m, i| m.max((x[i] + x[n - 1 - i]).abs())));
    VerifyReport {
        residuals: Residuals { interior, left_bc, right_bc },
        not_increasing,
        counts_match: achieved == seq.counts,
        achieved_counts: achieved,
        symmetry,
        min_root_distance: x.iter().fold(T::infinity(), |m, &v| m.min(state.root_distance(v))),
    }
}
