//! Gradient of `H = Σ x_n² + Σ (ζ_{n+1} - ζ_n)²`, its approximate vanishing on
//! MIW sequences, the identity `x² = 2η' + η² + (4ℓ + 2)`, and the behaviour
//! at the centre of the symmetric `ℓ = 1` sequence.

use rayon::prelude::*;
use serde::Serialize;

use crate::constructor::{construct, MiwSequence};
use crate::error::{MiwError, Result};
use crate::metrics::{check_increasing, energy_unchecked, locate};
use crate::scalar::{linear_fit, Real};
use crate::states::EnergyState;

/// Relative step of the central-difference oracle.
pub const FD_STEP: f64 = 1e-6;

/// `∂H/∂x_n` for an arbitrary increasing configuration:
/// `(1/2)∂H = x_n - ζ_{n+1}²(∇_{n+2}ζ - ∇_{n+1}ζ) + ζ_n²(∇_{n+1}ζ - ∇_nζ)`
/// with `∇_kζ = ζ_k - ζ_{k-1}` for `2 ≤ k ≤ N+1` and zero otherwise.
pub fn grad_h<T: Real>(x: &[T]) -> Result<Vec<T>> {
    check_increasing(x)?;
    Ok(grad_unchecked(x))
}

pub(crate) fn grad_unchecked<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    // z[k] = ζ_k for k = 0..=N+1 (index 0 unused)
    let mut z = vec![T::zero(); n + 2];
    for k in 2..=n {
        z[k] = T::one() / (x[k - 1] - x[k - 2]);
    }
    let nabla = |k: usize| if (2..=n + 1).contains(&k) { z[k] - z[k - 1] } else { T::zero() };
    let two = T::lit(2.0);
    (1..=n)
        .map(|i| {
            let up = z[i + 1] * z[i + 1] * (nabla(i + 2) - nabla(i + 1));
            let down = z[i] * z[i] * (nabla(i + 1) - nabla(i));
            two * (x[i - 1] - up + down)
        })
        .collect()
}

/// Central differences of `H` with step `FD_STEP · max(1, |x_n|)`.
pub fn fd_gradient<T: Real>(x: &[T]) -> Result<Vec<T>> {
    check_increasing(x)?;
    let mut work = x.to_vec();
    Ok((0..x.len())
        .map(|i| {
            let h = T::lit(FD_STEP) * x[i].abs().max(T::one());
            work[i] = x[i] + h;
            let up = energy_unchecked(&work).h;
            work[i] = x[i] - h;
            let down = energy_unchecked(&work).h;
            work[i] = x[i];
            (up - down) / (h + h)
        })
        .collect())
}

/// `∂H` at the 1-based interior index `n` using the MIW relation:
/// `2x_n - 2(η_{n+1} - η_n)/(x_{n+1} - x_n)² + 2(η_n - η_{n-1})/(x_n - x_{n-1})²`.
pub fn grad_on_miw<T: Real>(x: &[T], state: &EnergyState<T>, n: usize) -> Result<T> {
    if n < 2 || n + 1 > x.len() {
        return Err(MiwError::BoundaryIndex(n));
    }
    let (a, b, c) = (x[n - 2], x[n - 1], x[n]);
    let (ea, eb, ec) = (state.eta(a), state.eta(b), state.eta(c));
    let two = T::lit(2.0);
    let up = c - b;
    let down = b - a;
    Ok(two * b - two * (ec - eb) / (up * up) + two * (eb - ea) / (down * down))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitValue<T> {
    /// `2t - 2η'(t)η(t) - 2η''(t)`.
    pub value: T,
    /// `t² - 2η'(t) - η(t)² - (4ℓ + 2)`.
    pub identity_residual: T,
    /// The same two quantities evaluated term by term, for comparison.
    pub naive_value: T,
    pub naive_residual: T,
}

/// The limit of `∂H` at `t` and the identity behind its vanishing.
///
/// With `s_1 = Σ 1/(t - r_j)`, `s_2 = Σ 1/(t - r_j)²` the identity residual is
/// `-4(s_1² - s_2 - t s_1 + ℓ)`. Partial fractions turn the bracket into
/// `Σ_j (2S_j - r_j)/(t - r_j)` with `S_j = Σ_{i≠j} 1/(r_j - r_i)`, which stays
/// accurate next to a root; the limit value is its derivative.
pub fn limit_formula<T: Real>(state: &EnergyState<T>, t: T) -> Result<LimitValue<T>> {
    let d = state.log_derivative(t)?;
    let mut residual = T::zero();
    let mut value = T::zero();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    for (j, &rj) in state.roots.iter().enumerate() {
        let s: T = state.roots.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &ri)| T::one() / (rj - ri)).sum();
        let u = T::one() / (t - rj);
        residual = residual + (two * s - rj) * u;
        value = value + (two * s - rj) * u * u;
    }
    let e = T::from_usize_lossy(4 * state.ell + 2);
    Ok(LimitValue {
        value: four * value,
        identity_residual: -four * residual,
        naive_value: two * t - two * d.d1 * d.eta - two * d.d2,
        naive_residual: t * t - two * d.d1 - d.eta * d.eta - e,
    })
}

/// 0-based index of `x_{n(0)+1}`, the first positive point.
pub fn center_index<T: Real>(x: &[T]) -> usize {
    locate(x, T::zero())
}

/// `(4/x³)(3 - x_{n(0)+1}/x_{n(0)+2})` for the symmetric `ℓ = 1` sequence.
pub fn center_closed_form<T: Real>(x: &[T]) -> Result<T> {
    let c = center_index(x);
    if c + 1 >= x.len() {
        return Err(MiwError::BoundaryIndex(c + 1));
    }
    let xc = x[c];
    Ok(T::lit(4.0) / (xc * xc * xc) * (T::lit(3.0) - xc / x[c + 1]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReport<T> {
    pub grad: Vec<T>,
    pub fd_error: T,
    /// `(t, 2t - 2η'η - 2η'')` at the probed `t`.
    pub limit_values: Vec<(T, T)>,
    /// `(∂H at n(0)+1, closed form)` for `ℓ = 1`.
    pub center_value: Option<(T, T)>,
}

pub fn gradient_report<T: Real>(seq: &MiwSequence<T>, state: &EnergyState<T>, probes: &[T]) -> Result<GradientReport<T>> {
    let grad = grad_h(&seq.points)?;
    let fd = fd_gradient(&seq.points)?;
    let fd_error = grad.iter().zip(&fd).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
    let limit_values = probes
        .iter()
        .map(|&t| limit_formula(state, t).map(|v| (t, v.value)))
        .collect::<Result<_>>()?;
    let center_value = if state.ell == 1 {
        let c = center_index(&seq.points);
        center_closed_form(&seq.points).ok().map(|closed| (grad[c], closed))
    } else {
        None
    };
    Ok(GradientReport { grad, fd_error, limit_values, center_value })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterRow<T> {
    #[serde(rename = "N")]
    pub n: usize,
    pub x_center: T,
    pub grad_center: T,
    pub closed_form: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterTable<T> {
    pub rows: Vec<CenterRow<T>>,
    /// Log-log slope of `x_{n(0)+1}` against `N`.
    pub slope: T,
    /// Log-log slope of the centre gradient against `N`.
    pub grad_slope: T,
}

pub const CENTER_HEADER: &str = "N,x_center,grad_center,slope_estimate";

/// Symmetric `ℓ = 1` sequences with counts `(N/2, N/2)` for each even `N`.
pub fn center_scaling<T: Real>(state: &EnergyState<T>, ns: &[usize]) -> Result<CenterTable<T>> {
    if state.ell != 1 {
        return Err(MiwError::InvalidArgument("centre scaling is defined for ell = 1".into()));
    }
    if let Some(&n) = ns.iter().find(|&&n| n % 2 == 1 || n < 4) {
        return Err(MiwError::InvalidArgument(format!("N = {n} must be even and at least 4")));
    }
    let rows: Vec<CenterRow<T>> = ns
        .par_iter()
        .map(|&n| {
            let seq = construct(state, &[n / 2, n / 2])?;
            let c = center_index(&seq.points);
            let grad = grad_h(&seq.points)?;
            Ok(CenterRow { n, x_center: seq.points[c], grad_center: grad[c], closed_form: center_closed_form(&seq.points)? })
        })
        .collect::<Result<_>>()?;
    let lx: Vec<T> = rows.iter().map(|r| T::from_usize_lossy(r.n).ln()).collect();
    let ly: Vec<T> = rows.iter().map(|r| r.x_center.ln()).collect();
    let lg: Vec<T> = rows.iter().map(|r| r.grad_center.ln()).collect();
    let slope = linear_fit(&lx, &ly).map(|f| f.0).unwrap_or(T::nan());
    let grad_slope = linear_fit(&lx, &lg).map(|f| f.0).unwrap_or(T::nan());
    Ok(CenterTable { rows, slope, grad_slope })
}

impl<T: Real> CenterTable<T> {
    /// Local slope `Δ log x / Δ log N` against the previous row.
    pub fn local_slopes(&self) -> Vec<Option<T>> {
        let mut out = vec![None];
        for w in self.rows.windows(2) {
            let dn = (T::from_usize_lossy(w[1].n) / T::from_usize_lossy(w[0].n)).ln();
            out.push(Some((w[1].x_center / w[0].x_center).ln() / dn));
        }
        out.truncate(self.rows.len());
        out
    }
}
