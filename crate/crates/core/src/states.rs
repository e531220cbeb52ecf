//! Hermite polynomials and the higher-energy densities `f = c p_ℓ² e^{-x²/2}`.

use serde::{Deserialize, Serialize};

use crate::error::{MiwError, Result};
use crate::quad::{integrate_split, QuadOptions};
use crate::scalar::Real;

/// Largest order with exact `i64` coefficients and well separated roots.
pub const MAX_ORDER: usize = 20;

/// Monomial coefficients of the probabilists' Hermite polynomial `p_ℓ`,
/// lowest degree first.
pub fn hermite_coeffs(ell: usize) -> Result<Vec<i64>> {
    if ell > MAX_ORDER {
        return Err(MiwError::OrderOutOfRange(ell));
    }
    let mut prev: Vec<i64> = vec![];
    let mut cur: Vec<i64> = vec![1];
    for k in 0..ell {
        // p_{k+1} = x p_k - k p_{k-1}
        let mut next = vec![0i64; k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= k as i64 * c;
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `(p_ℓ(x), p_ℓ'(x))` by the three-term recurrence; `p_ℓ' = ℓ p_{ℓ-1}`.
pub fn hermite_eval<T: Real>(ell: usize, x: T) -> Result<(T, T)> {
    if ell > MAX_ORDER {
        return Err(MiwError::OrderOutOfRange(ell));
    }
    Ok(hermite_pair(ell, x))
}

fn hermite_pair<T: Real>(ell: usize, x: T) -> (T, T) {
    if ell == 0 {
        return (T::one(), T::zero());
    }
    let mut pm = T::one();
    let mut p = x;
    for k in 1..ell {
        let next = x * p - T::from_usize_lossy(k) * pm;
        pm = p;
        p = next;
    }
    (p, T::from_usize_lossy(ell) * pm)
}

/// Horner evaluation of integer coefficients (lowest degree first).
pub fn poly_eval<T: Real>(coeffs: &[i64], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + T::from_i64(c).expect("coefficient"))
}

pub fn poly_derivative(coeffs: &[i64]) -> Vec<i64> {
    coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as i64 * c).collect()
}

/// Sorted roots of `p_ℓ`, symmetric about zero by construction.
///
/// Each positive root is bracketed by the interlacing roots of `p_{ℓ-1}` and
/// bisected until the bracket is two adjacent floats.
pub fn hermite_roots<T: Real>(ell: usize) -> Result<Vec<T>> {
    if ell > MAX_ORDER {
        return Err(MiwError::OrderOutOfRange(ell));
    }
    let mut roots: Vec<T> = vec![];
    for k in 1..=ell {
        let bound = T::from_usize_lossy(4 * k + 2).sqrt() + T::one();
        let mut edges = vec![-bound];
        edges.extend(roots.iter().copied());
        edges.push(bound);
        let mut next = Vec::with_capacity(k);
        for w in edges.windows(2) {
            if w[1] <= T::zero() {
                continue;
            }
            let lo = w[0].max(T::zero());
            next.push(bisect_root(k, lo, w[1]));
        }
        // zero is a root for odd k; the positive half is mirrored
        let mut full: Vec<T> = next.iter().filter(|&&r| r > T::zero()).map(|&r| -r).collect();
        full.reverse();
        if k % 2 == 1 {
            full.push(T::zero());
        }
        full.extend(next.iter().copied().filter(|&r| r > T::zero()));
        roots = full;
    }
    Ok(roots)
}

fn bisect_root<T: Real>(k: usize, mut lo: T, mut hi: T) -> T {
    let mut flo = hermite_pair(k, lo).0;
    if flo == T::zero() {
        return lo;
    }
    loop {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            let fh = hermite_pair(k, hi).0;
            return if fh.abs() < flo.abs() { hi } else { lo };
        }
        let fm = hermite_pair(k, mid).0;
        if fm == T::zero() {
            return mid;
        }
        if (fm < T::zero()) == (flo < T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// `f = c p_ℓ² e^{-x²/2}` with its roots and normalizing constant.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyState<T> {
    pub ell: usize,
    pub coeffs: Vec<i64>,
    pub roots: Vec<T>,
    pub norm_c: T,
}

/// Values of `η = f'/f` and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivative<T> {
    pub eta: T,
    pub d1: T,
    pub d2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionMass<T> {
    pub k: usize,
    pub mass: T,
    pub conditional_mean: T,
    pub conditional_abs_mean: T,
}

/// JSON form `{ell, roots, norm_c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyStateRecord {
    pub ell: usize,
    pub roots: Vec<f64>,
    pub norm_c: f64,
}

impl<T: Real> EnergyState<T> {
    pub fn new(ell: usize) -> Result<Self> {
        let coeffs = hermite_coeffs(ell)?;
        let roots = hermite_roots::<T>(ell)?;
        let mut state = Self { ell, coeffs, roots, norm_c: T::one() };
        let total = integrate_split(|x| state.weight(x), T::neg_infinity(), T::infinity(), &state.roots, &QuadOptions::tight())?;
        state.norm_c = T::one() / total.value;
        Ok(state)
    }

    pub fn record(&self) -> EnergyStateRecord {
        EnergyStateRecord {
            ell: self.ell,
            roots: self.roots.iter().map(|r| r.as_f64()).collect(),
            norm_c: self.norm_c.as_f64(),
        }
    }

    pub fn num_regions(&self) -> usize {
        self.ell + 1
    }

    /// `(p_ℓ(x), p_ℓ'(x))`.
    pub fn hermite(&self, x: T) -> (T, T) {
        hermite_pair(self.ell, x)
    }

    /// Unnormalized density `p_ℓ(x)² e^{-x²/2}`, with `p_ℓ` taken as the
    /// product over its roots so relative precision survives near a root.
    pub fn weight(&self, x: T) -> T {
        let prod = self.roots.iter().fold(T::one(), |acc, &r| acc * (x - r));
        prod * prod * (-T::lit(0.5) * x * x).exp()
    }

    pub fn density(&self, x: T) -> T {
        self.norm_c * self.weight(x)
    }

    /// `log f(x) - log c`.
    pub fn log_weight(&self, x: T) -> T {
        let two = T::lit(2.0);
        self.roots.iter().fold(-T::lit(0.5) * x * x, |acc, &r| acc + two * (x - r).abs().ln())
    }

    /// `η(x) = -x + 2 Σ 1/(x - r_j)`; infinite at a root.
    #[inline]
    pub fn eta(&self, x: T) -> T {
        let two = T::lit(2.0);
        self.roots.iter().fold(-x, |acc, &r| acc + two / (x - r))
    }

    /// `η'(x) = -1 - 2 Σ (x - r_j)^{-2}`, the curvature of `log f`.
    #[inline]
    pub fn eta_prime(&self, x: T) -> T {
        let two = T::lit(2.0);
        self.roots.iter().fold(-T::one(), |acc, &r| {
            let d = x - r;
            acc - two / (d * d)
        })
    }

    pub fn log_derivative(&self, x: T) -> Result<LogDerivative<T>> {
        if let Some(&r) = self.roots.iter().find(|&&r| r == x) {
            return Err(MiwError::Pole(r.as_f64()));
        }
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let mut out = LogDerivative { eta: -x, d1: -T::one(), d2: T::zero() };
        for &r in &self.roots {
            let u = T::one() / (x - r);
            out.eta = out.eta + two * u;
            out.d1 = out.d1 - two * u * u;
            out.d2 = out.d2 + four * u * u * u;
        }
        if !out.eta.is_finite() {
            return Err(MiwError::Pole(x.as_f64()));
        }
        Ok(out)
    }

    /// `η'''(x) = -12 Σ (x - r_j)^{-4}`.
    pub fn eta_third(&self, x: T) -> T {
        let c = T::lit(12.0);
        self.roots.iter().fold(T::zero(), |acc, &r| {
            let u = T::one() / (x - r);
            acc - c * u * u * u * u
        })
    }

    /// Index `k` of the region `R_k` containing `x` (roots counted strictly below `x`).
    pub fn region_of(&self, x: T) -> usize {
        self.roots.partition_point(|&r| r < x)
    }

    /// `(r_k, r_{k+1})` with infinite sentinels.
    pub fn region_bounds(&self, k: usize) -> (T, T) {
        let a = if k == 0 { T::neg_infinity() } else { self.roots[k - 1] };
        let b = if k >= self.ell { T::infinity() } else { self.roots[k] };
        (a, b)
    }

    pub fn regions(&self) -> Vec<(T, T)> {
        (0..self.num_regions()).map(|k| self.region_bounds(k)).collect()
    }

    /// Distance from `x` to the nearest root (infinite for `ℓ = 0`).
    pub fn root_distance(&self, x: T) -> T {
        self.roots.iter().fold(T::infinity(), |acc, &r| acc.min((x - r).abs()))
    }

    /// `∫_a^b f(t) g(t) dt`.
    pub fn integrate_against<G: Fn(T) -> T>(&self, g: G, a: T, b: T) -> Result<T> {
        let r = integrate_split(|t| self.density(t) * g(t), a, b, &self.roots, &QuadOptions::tight())?;
        Ok(r.value)
    }

    /// `F(x) = ∫_{-∞}^x f`; integrates the shorter tail.
    pub fn cdf(&self, x: T) -> Result<T> {
        if x == T::neg_infinity() {
            return Ok(T::zero());
        }
        if x == T::infinity() {
            return Ok(T::one());
        }
        let opts = QuadOptions::new(1e-16, 1e-14);
        let v = if x <= T::zero() {
            integrate_split(|t| self.density(t), T::neg_infinity(), x, &self.roots, &opts)?.value
        } else {
            T::one() - integrate_split(|t| self.density(t), x, T::infinity(), &self.roots, &opts)?.value
        };
        Ok(v.max(T::zero()).min(T::one()))
    }

    /// Region masses with conditional first moments; mirrored regions share
    /// one computation so symmetric masses agree exactly.
    pub fn region_masses(&self) -> Result<Vec<RegionMass<T>>> {
        let k_count = self.num_regions();
        let mut raw = vec![(T::zero(), T::zero(), T::zero()); k_count];
        for k in 0..k_count {
            let mirror = self.ell - k;
            if mirror < k {
                let (m, s, sa) = raw[mirror];
                raw[k] = (m, -s, sa);
                continue;
            }
            let (a, b) = self.region_bounds(k);
            let m = self.integrate_against(|_| T::one(), a, b)?;
            let s = self.integrate_against(|t| t, a, b)?;
            let sa = self.integrate_against(|t| t.abs(), a, b)?;
            raw[k] = (m, s, sa);
        }
        let total: T = raw.iter().map(|r| r.0).sum();
        Ok(raw
            .iter()
            .enumerate()
            .map(|(k, &(m, s, sa))| RegionMass { k, mass: m / total, conditional_mean: s / m, conditional_abs_mean: sa / m })
            .collect())
    }

    /// Zero of `η` inside region `k`: the mode of the conditional density.
    pub fn region_mode(&self, k: usize) -> T {
        let (a, b) = self.region_bounds(k);
        let span = T::lit(64.0);
        let mut lo = if a.is_finite() { a } else { b.min(T::zero()) - span };
        let mut hi = if b.is_finite() { b } else { a.max(T::zero()) + span };
        // η decreases from +∞ to -∞ across the region
        for _ in 0..400 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eta(mid) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        T::lit(0.5) * (lo + hi)
    }
}

/// Solves `p(x) - p(0) = (1 - x²) q(x) + x q'(x) - q(0)` for `q`, coefficient by
/// coefficient from the top degree down. Generic so exact rationals work.
///
/// With `q = Σ b_m x^m`, matching `x^k` gives `a_k = (1 + k) b_k - b_{k-2}`.
/// The downward sweep fixes every `b`, and the `x¹` equation is then a
/// consistency condition that fails for most odd parts.
pub fn solve_q<N>(p: &[N]) -> Result<Vec<N>>
where
    N: num_traits::Num + Clone + PartialEq + std::fmt::Debug + num_traits::ToPrimitive,
{
    let degree = p.iter().rposition(|c| *c != N::zero()).unwrap_or(0);
    if degree < 2 {
        return Err(MiwError::DegreeTooLow(degree));
    }
    let mut b = vec![N::zero(); degree - 1];
    let small = |n: usize| -> N {
        let mut v = N::zero();
        for _ in 0..n {
            v = v + N::one();
        }
        v
    };
    let get = |b: &Vec<N>, m: usize| -> N { b.get(m).cloned().unwrap_or_else(N::zero) };
    for k in (2..=degree).rev() {
        // b_{k-2} = (1 + k) b_k - a_k
        b[k - 2] = small(k + 1) * get(&b, k) - p[k].clone();
    }
    let a1 = p.get(1).cloned().unwrap_or_else(N::zero);
    let mismatch = a1 - small(2) * get(&b, 1);
    if mismatch != N::zero() {
        return Err(MiwError::NotRepresentable(mismatch.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(b)
}
