//! Gap and span diagnostics, exact Wasserstein-1 distances, the coupling and
//! mixture bounds, the energy functional and log-log rate fits.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::constructor::{construct_auto, MiwSequence};
use crate::error::{MiwError, Result};
use crate::quad::{integrate, QuadOptions};
use crate::scalar::{linear_fit, Real};
use crate::states::{EnergyState, RegionMass};

/// Bisection stops once the crossing bracket is this narrow.
pub const CROSSING_TOL: f64 = 1e-12;

/// `n(t) = max{k : x_k ≤ t}` with the sentinel `x_0 = -∞`.
pub fn locate<T: Real>(points: &[T], t: T) -> usize {
    points.partition_point(|&x| x <= t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport<T> {
    pub max_gap: T,
    /// 1-based `n` with `x_{n+1} - x_n` maximal.
    pub argmax: usize,
    pub first_gap: T,
    pub last_gap: T,
    /// `x_{n(r)+1} - x_{n(r)}` for each root `r`.
    pub root_gaps: Vec<T>,
    pub span: (T, T),
    /// `x_N / √(log N_ℓ)`.
    pub right_span_ratio: T,
    /// `|x_1| / √(log N_0)`.
    pub left_span_ratio: T,
    pub max_at_root_or_extremity: bool,
}

pub fn gap_report<T: Real>(seq: &MiwSequence<T>, state: &EnergyState<T>) -> Result<GapReport<T>> {
    let x = &seq.points;
    let n = x.len();
    if n < 2 {
        return Err(MiwError::InvalidArgument("gap report needs N ≥ 2".into()));
    }
    let gaps: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let (mut argmax, mut max_gap) = (1, gaps[0]);
    for (i, &g) in gaps.iter().enumerate() {
        if g > max_gap {
            max_gap = g;
            argmax = i + 1;
        }
    }
    let root_idx: Vec<usize> = state.roots.iter().map(|&r| locate(x, r)).collect();
    let root_gaps = root_idx
        .iter()
        .map(|&k| if k >= 1 && k < n { x[k] - x[k - 1] } else { T::nan() })
        .collect();
    let ratio = |v: T, count: usize| v / T::from_usize_lossy(count).ln().sqrt();
    Ok(GapReport {
        max_gap,
        argmax,
        first_gap: gaps[0],
        last_gap: gaps[n - 2],
        root_gaps,
        span: (x[0], x[n - 1]),
        right_span_ratio: ratio(x[n - 1], *seq.counts.last().unwrap_or(&n)),
        left_span_ratio: ratio(x[0].abs(), *seq.counts.first().unwrap_or(&n)),
        max_at_root_or_extremity: argmax == 1 || argmax == n - 1 || root_idx.contains(&argmax),
    })
}

/// Smallest `v > r_ℓ` with `p_ℓ'(v)/p_ℓ(v) ≤ v/4` (zero for `ℓ = 0`).
pub fn span_threshold<T: Real>(state: &EnergyState<T>) -> T {
    let Some(&top) = state.roots.last() else { return T::zero() };
    let excess = |v: T| {
        let (p, dp) = state.hermite(v);
        dp / p - v / T::lit(4.0)
    };
    // p'/p - v/4 falls from +∞ to -∞ beyond the last root
    let mut lo = top;
    let mut hi = top + T::one();
    while excess(hi) > T::zero() {
        hi = hi + hi;
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `(x_N², x_{n(v)+1}² + 4(1 + log(N - n(v))))` for the threshold `v` of
/// [`span_threshold`]; the first never exceeds the second.
pub fn span_bound<T: Real>(seq: &MiwSequence<T>, state: &EnergyState<T>) -> Result<(T, T)> {
    let x = &seq.points;
    let n = x.len();
    let v = span_threshold(state);
    let nv = locate(x, v);
    if nv >= n {
        return Err(MiwError::InvalidArgument(format!("no point beyond v = {v}")));
    }
    let xn = x[n - 1];
    let xv = x[nv];
    let rhs = xv * xv + T::lit(4.0) * (T::one() + T::from_usize_lossy(n - nv).ln());
    Ok((xn * xn, rhs))
}

pub fn coupling_bound<T: Real>(points: &[T]) -> Result<T> {
    let n = points.len();
    if n < 2 {
        return Err(MiwError::InvalidArgument("coupling bound needs N ≥ 2".into()));
    }
    Ok((points[n - 1] - points[0]) / T::from_usize_lossy(n - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionDistance<T> {
    pub k: usize,
    pub distance: T,
    /// `c_{N,k} = N_k / N`.
    pub share: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WassersteinReport<T> {
    pub distance: T,
    pub coupling_bound: T,
    pub per_region: Vec<RegionDistance<T>>,
    /// `d · N / √(log N)`.
    pub scaled: T,
}

/// `∫_a^b |F_Q - F_P|` for the empirical measure on `points ⊂ (a, b)` and the
/// distribution with density `g` (already normalized on `(a, b)`).
///
/// On `[x_n, x_{n+1})` the empirical CDF is the constant `c = n/N`, and with
/// `F_P(a') = F_a` the signed piece is
/// `∫_{a'}^{b'} (F_P - c) = (b' - a')(F_a - c) + ∫_{a'}^{b'} (b' - t) g(t) dt`.
/// A piece is split where `F_P` crosses `c`; there is at most one such point.
pub fn empirical_distance<T: Real, G: Fn(T) -> T + Sync>(points: &[T], g: G, a: T, b: T) -> Result<T> {
    let n = points.len();
    if n == 0 {
        return Err(MiwError::InvalidArgument("empty point set".into()));
    }
    let opts = QuadOptions::new(1e-16, 1e-13);
    let first = points[0];
    let last = points[n - 1];
    let left = integrate(|t| (first - t) * g(t), a, first, &opts)?.value;
    let right = integrate(|t| (t - last) * g(t), last, b, &opts)?.value;
    let head = integrate(&g, a, first, &opts)?.value;
    let masses: Vec<T> = points
        .par_windows(2)
        .map(|w| integrate(&g, w[0], w[1], &opts).map(|r| r.value))
        .collect::<Result<_>>()?;
    let mut cum = Vec::with_capacity(n);
    let mut acc = head;
    cum.push(acc);
    for &m in &masses {
        acc = acc + m;
        cum.push(acc);
    }
    let nf = T::from_usize_lossy(n);
    let pieces: Vec<T> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let (x0, x1) = (points[i], points[i + 1]);
            let c = T::from_usize_lossy(i + 1) / nf;
            let (fa, fb) = (cum[i], cum[i + 1]);
            let signed = |lo: T, hi: T, f_lo: T| -> Result<T> {
                let tail = integrate(|t| (hi - t) * g(t), lo, hi, &opts)?.value;
                Ok((hi - lo) * (f_lo - c) + tail)
            };
            if c <= fa {
                return signed(x0, x1, fa);
            }
            if c >= fb {
                return signed(x0, x1, fa).map(|v| -v);
            }
            let s = crossing(&g, x0, x1, fa, c, &opts)?;
            let fs = fa + integrate(&g, x0, s, &opts)?.value;
            Ok(signed(s, x1, fs)? - signed(x0, s, fa)?)
        })
        .collect::<Result<_>>()?;
    let inner: T = pieces.iter().copied().sum();
    Ok(left + inner + right)
}

/// Bisection for `F_a + ∫_{x0}^s g = c` on `[x0, x1]`.
fn crossing<T: Real, G: Fn(T) -> T>(g: &G, x0: T, x1: T, fa: T, c: T, opts: &QuadOptions<T>) -> Result<T> {
    let (mut lo, mut hi) = (x0, x1);
    let tol = T::lit(CROSSING_TOL).max(T::eps_times(4.0));
    // The running integral keeps each evaluation to the newly added sliver.
    let mut f_lo = fa;
    while hi - lo > tol * (T::one() + lo.abs().max(hi.abs())) {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f_lo + integrate(g, lo, mid, opts)?.value;
        if f_mid < c {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

/// Exact `d(Q, P)` for the empirical measure `Q` of the sequence, plus the
/// per-region distances `d(Q_k, P_k)` against the conditional distributions.
pub fn wasserstein<T: Real>(seq: &MiwSequence<T>, state: &EnergyState<T>) -> Result<WassersteinReport<T>> {
    let x = &seq.points;
    let n = x.len();
    let distance = empirical_distance(x, |t| state.density(t), T::neg_infinity(), T::infinity())?;
    let masses = state.region_masses()?;
    let nf = T::from_usize_lossy(n);
    let mut per_region = Vec::with_capacity(masses.len());
    for m in &masses {
        let part = seq.region_part(m.k);
        let (a, b) = state.region_bounds(m.k);
        let inv = T::one() / m.mass;
        let d = empirical_distance(part, |t| state.density(t) * inv, a, b)?;
        per_region.push(RegionDistance { k: m.k, distance: d, share: T::from_usize_lossy(part.len()) / nf });
    }
    Ok(WassersteinReport {
        distance,
        coupling_bound: coupling_bound(x)?,
        per_region,
        scaled: distance * nf / nf.ln().sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureReport<T> {
    /// `Σ c_{N,k} d(Q_k, P_k) + μ Σ |c_{N,k} - c_k|`, the estimate assembled in the proof.
    pub assembled: T,
    /// `r = max(max_k d_k, max_k |c_{N,k} - c_k|)`.
    pub rate: T,
    pub mu: T,
    /// `(K + μ) r` as stated.
    pub stated_bound: T,
    /// `(1 + (K + 1) μ) r`, which the proof's chain of inequalities supports.
    pub proof_bound: T,
    pub holds: bool,
}

/// Combines per-region distances into the mixture estimate. `μ` is the largest
/// conditional absolute mean.
pub fn mixture_distance<T: Real>(distances: &[T], shares: &[T], masses: &[RegionMass<T>]) -> Result<MixtureReport<T>> {
    if distances.len() != shares.len() || shares.len() != masses.len() || shares.is_empty() {
        return Err(MiwError::InvalidArgument("distances, shares and masses differ in length".into()));
    }
    let sum: T = shares.iter().copied().sum();
    if (sum - T::one()).abs() > T::eps_times(64.0) * T::from_usize_lossy(shares.len()) {
        return Err(MiwError::ShareMismatch(sum.as_f64()));
    }
    let mu = masses.iter().fold(T::zero(), |m, r| m.max(r.conditional_abs_mean));
    let mut assembled = T::zero();
    let mut rate = T::zero();
    for ((&d, &c), m) in distances.iter().zip(shares).zip(masses) {
        let dc = (c - m.mass).abs();
        assembled = assembled + c * d + mu * dc;
        rate = rate.max(d).max(dc);
    }
    let k = T::from_usize_lossy(shares.len() - 1);
    let proof_bound = (T::one() + (k + T::one()) * mu) * rate;
    Ok(MixtureReport {
        assembled,
        rate,
        mu,
        stated_bound: (k + mu) * rate,
        proof_bound,
        holds: assembled <= proof_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy<T> {
    /// `Σ x_n²`
    pub v: T,
    /// `Σ (ζ_{n+1} - ζ_n)²` with `ζ_1 = ζ_{N+1} = 0`.
    pub u: T,
    pub h: T,
}

pub fn check_increasing<T: Real>(x: &[T]) -> Result<()> {
    match x.windows(2).position(|w| !(w[1] > w[0])) {
        Some(i) => Err(MiwError::NotIncreasing(i + 1)),
        None => Ok(()),
    }
}

pub fn energy<T: Real>(x: &[T]) -> Result<Energy<T>> {
    check_increasing(x)?;
    Ok(energy_unchecked(x))
}

pub(crate) fn energy_unchecked<T: Real>(x: &[T]) -> Energy<T> {
    let n = x.len();
    let zeta = |k: usize| -> T {
        // ζ_k for k = 1..=N+1, 1-based
        if k <= 1 || k > n {
            T::zero()
        } else {
            T::one() / (x[k - 1] - x[k - 2])
        }
    };
    let v: T = x.iter().map(|&a| a * a).sum();
    let u: T = (1..=n)
        .map(|k| {
            let d = zeta(k + 1) - zeta(k);
            d * d
        })
        .sum();
    Energy { v, u, h: v + u }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit<T> {
    pub slope: T,
    pub intercept: T,
    pub scaled_min: T,
    pub scaled_max: T,
}

impl<T: Real> RateFit<T> {
    /// `max / min` of `d · N / √(log N)`.
    pub fn scaled_spread(&self) -> T {
        self.scaled_max / self.scaled_min
    }
}

/// Least-squares slope of `log d` against `log N`.
pub fn rate_fit<T: Real>(ns: &[usize], ds: &[T]) -> Result<RateFit<T>> {
    if ns.len() < 4 || ns.len() != ds.len() {
        return Err(MiwError::DegenerateTable(format!("need at least 4 rows, got {}", ns.len())));
    }
    if ns.iter().any(|&n| n < 2) || ds.iter().any(|&d| !(d > T::zero())) {
        return Err(MiwError::DegenerateTable("rows need N ≥ 2 and positive distances".into()));
    }
    let lx: Vec<T> = ns.iter().map(|&n| T::from_usize_lossy(n).ln()).collect();
    let ly: Vec<T> = ds.iter().map(|d| d.ln()).collect();
    let (slope, intercept) =
        linear_fit(&lx, &ly).ok_or_else(|| MiwError::DegenerateTable("all N are equal".into()))?;
    let scaled: Vec<T> = ns.iter().zip(ds).map(|(&n, &d)| {
        let nf = T::from_usize_lossy(n);
        d * nf / nf.ln().sqrt()
    }).collect();
    let scaled_min = scaled.iter().copied().fold(T::infinity(), T::min);
    let scaled_max = scaled.iter().copied().fold(T::neg_infinity(), T::max);
    Ok(RateFit { slope, intercept, scaled_min, scaled_max })
}

/// One row of the rate table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub ell: usize,
    pub counts: String,
    pub wasserstein: f64,
    pub coupling_bound: f64,
    pub max_gap: f64,
    pub x1: f64,
    #[serde(rename = "xN")]
    pub xn: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub runtime_ms: f64,
}

pub const RATE_HEADER: &str = "N,ell,counts,wasserstein,coupling_bound,max_gap,x1,xN,H,runtime_ms";

pub fn rate_row<T: Real>(state: &EnergyState<T>, n: usize) -> Result<RateRow> {
    let start = Instant::now();
    let seq = construct_auto(state, n)?;
    let w = wasserstein(&seq, state)?;
    let gaps = gap_report(&seq, state)?;
    let e = energy(&seq.points)?;
    Ok(RateRow {
        n,
        ell: state.ell,
        counts: seq.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"),
        wasserstein: w.distance.as_f64(),
        coupling_bound: w.coupling_bound.as_f64(),
        max_gap: gaps.max_gap.as_f64(),
        x1: seq.points[0].as_f64(),
        xn: seq.points[seq.len() - 1].as_f64(),
        h: e.h.as_f64(),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Rows for every `N`, computed concurrently and returned in input order.
pub fn rate_sweep<T: Real>(state: &EnergyState<T>, ns: &[usize]) -> Result<Vec<RateRow>> {
    ns.par_iter().map(|&n| rate_row(state, n)).collect()
}

/// Geometric grid `start, start·factor, …` up to `stop` inclusive.
pub fn geometric_grid(start: usize, stop: usize, factor: usize) -> Result<Vec<usize>> {
    if start == 0 || factor < 2 || stop < start {
        return Err(MiwError::InvalidArgument(format!("bad grid {start}:{stop}:{factor}")));
    }
    let mut out = vec![];
    let mut n = start;
    while n <= stop {
        out.push(n);
        n = n.checked_mul(factor).ok_or_else(|| MiwError::InvalidArgument("grid overflow".into()))?;
    }
    Ok(out)
}
