//! Solutions `g_h` of the Stein equation `g' + ηg = h - E_P[h]` on a region
//! and the bound they give on `|E_R[h] - E_P[h]|`.

use serde::Serialize;

use crate::error::{MiwError, Result};
use crate::quad::{integrate, QuadOptions};
use crate::scalar::Real;
use crate::states::EnergyState;

/// Grid size used for `sup |g_h''|` over `(x_1, x_N)`.
pub const SUP_GRID: usize = 4096;
/// Radius (relative to the region width) inside which the near-root series is meaningful.
pub const SERIES_RADIUS: f64 = 1e-2;
/// Half-width of the sampled window around the mode on an infinite side.
const RAY_WINDOW: f64 = 6.0;

/// Built-in 1-Lipschitz test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    Identity,
    Tanh,
    SoftPlus,
    Sin,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] = [Self::Identity, Self::Tanh, Self::SoftPlus, Self::Sin];

    pub fn value<T: Real>(self, x: T) -> T {
        match self {
            Self::Identity => x,
            Self::Tanh => x.tanh(),
            // log(1 + e^x) without overflow
            Self::SoftPlus => x.max(T::zero()) + (-x.abs()).exp().ln_1p(),
            Self::Sin => x.sin(),
        }
    }

    pub fn derivative<T: Real>(self, x: T) -> T {
        match self {
            Self::Identity => T::one(),
            Self::Tanh => {
                let c = x.cosh();
                T::one() / (c * c)
            }
            Self::SoftPlus => T::one() / (T::one() + (-x).exp()),
            Self::Sin => x.cos(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Tanh => "tanh",
            Self::SoftPlus => "softplus",
            Self::Sin => "sin",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|h| h.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinSample<T> {
    pub x: T,
    pub g: T,
    pub gp: T,
    pub gpp: T,
    /// `|g'_fd + ηg - (h - E_P[h])|` with a five-point derivative of `g`.
    pub residual: T,
}

pub const SAMPLE_HEADER: &str = "x,g,gp,gpp,residual";

#[derive(Debug, Clone)]
pub struct SteinProbe<T> {
    pub state: EnergyState<T>,
    pub region: usize,
    pub a: T,
    pub b: T,
    pub h: TestFunction,
    pub mass: T,
    pub e_p_h: T,
    /// `E_P[X]` under the conditional distribution.
    pub mean: T,
    /// Left/right forms of `g_h` switch here (the zero of `η`).
    pub mode: T,
    pub samples: Vec<SteinSample<T>>,
}

fn opts<T: Real>() -> QuadOptions<T> {
    QuadOptions::new(1e-300, 1e-13)
}

/// Builds `g_h(x) = f(x)^{-1} ∫_a^x f(t)(h(t) - E_P[h]) dt` on region `k`
/// and samples it on `grid` interior points.
pub fn build_gh<T: Real>(state: &EnergyState<T>, k: usize, h: TestFunction, grid: usize) -> Result<SteinProbe<T>> {
    if k >= state.num_regions() {
        return Err(MiwError::InvalidArgument(format!("region {k} does not exist for ell = {}", state.ell)));
    }
    let (a, b) = state.region_bounds(k);
    let w = |t: T| state.weight(t);
    let mass = integrate(w, a, b, &opts())?.value;
    let e_p_h = integrate(|t| w(t) * h.value(t), a, b, &opts())?.value / mass;
    let mean = integrate(|t| w(t) * t, a, b, &opts())?.value / mass;
    let mode = state.region_mode(k);
    let mut probe = SteinProbe { state: state.clone(), region: k, a, b, h, mass, e_p_h, mean, mode, samples: vec![] };
    let window = T::lit(RAY_WINDOW);
    let lo = if a.is_finite() { a } else { mode - window };
    let hi = if b.is_finite() { b } else { mode + window };
    let nf = T::from_usize_lossy(grid);
    probe.samples = (0..grid)
        .map(|i| probe.sample(lo + (hi - lo) * (T::from_usize_lossy(i) + T::lit(0.5)) / nf))
        .collect::<Result<_>>()?;
    Ok(probe)
}

impl<T: Real> SteinProbe<T> {
    fn centered(&self, t: T) -> T {
        self.h.value(t) - self.e_p_h
    }

    /// Signed `∫ w (h - E)` from the nearer end (`a` left of the mode, `b`
    /// right of it), in units of the unnormalized weight `w`.
    fn partial(&self, x: T) -> Result<T> {
        let w = |t: T| self.state.weight(t) * self.centered(t);
        if x <= self.mode {
            Ok(integrate(w, self.a, x, &opts())?.value)
        } else {
            Ok(-integrate(w, x, self.b, &opts())?.value)
        }
    }

    fn inside(&self, x: T) -> Result<()> {
        if x > self.a && x < self.b && x.is_finite() {
            Ok(())
        } else {
            Err(MiwError::InvalidArgument(format!("x = {x} outside region ({}, {})", self.a, self.b)))
        }
    }

    /// `g_h(x)`.
    pub fn g(&self, x: T) -> Result<T> {
        self.inside(x)?;
        Ok(self.partial(x)? / self.state.weight(x))
    }

    /// `(g, g', g'')` with `g' = h - E - ηg` and `g'' = (η² - η')g - η(h - E) + h'`.
    pub fn eval(&self, x: T) -> Result<(T, T, T)> {
        let g = self.g(x)?;
        let d = self.state.log_derivative(x)?;
        let c = self.centered(x);
        let gp = c - d.eta * g;
        let gpp = (d.eta * d.eta - d.d1) * g - d.eta * c + self.h.derivative(x);
        Ok((g, gp, gpp))
    }

    /// Full sample including the finite-difference Stein residual.
    pub fn sample(&self, x: T) -> Result<SteinSample<T>> {
        let (g, gp, gpp) = self.eval(x)?;
        let edge = (x - self.a).min(self.b - x);
        let step = T::lit(1e-3).min(edge / T::lit(8.0));
        let base = self.partial(x)?;
        // neighbours reuse the integral at x so quadrature noise does not enter the difference
        let w = |t: T| self.state.weight(t) * self.centered(t);
        let at = |s: T| -> Result<T> {
            let y = x + s;
            let extra = integrate(w, x, y, &opts())?.value;
            Ok((base + extra) / self.state.weight(y))
        };
        let two = T::lit(2.0);
        let fd = (-at(two * step)? + T::lit(8.0) * at(step)? - T::lit(8.0) * at(-step)? + at(-two * step)?)
            / (T::lit(12.0) * step);
        let eta = self.state.eta(x);
        let residual = (fd + eta * g - self.centered(x)).abs();
        Ok(SteinSample { x, g, gp, gpp, residual })
    }

    pub fn max_residual(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| m.max(s.residual))
    }

    /// Leading near-root term `(1/3)(x - a)(h(x) - E_P[h])` at a finite left root.
    pub fn series_left(&self, x: T) -> Option<T> {
        self.a.is_finite().then(|| (x - self.a) * self.centered(x) / T::lit(3.0))
    }

    /// `|x² g(x) + x (h(x) - E_P[h])|`, bounded on an infinite right side.
    pub fn tail_term(&self, x: T) -> Result<T> {
        Ok((x * x * self.g(x)? + x * self.centered(x)).abs())
    }

    /// `sup |g''|` over an evenly spaced grid strictly inside `(lo, hi)`.
    pub fn sup_gpp(&self, lo: T, hi: T, grid: usize) -> Result<T> {
        let nf = T::from_usize_lossy(grid + 1);
        let mut sup = T::zero();
        for i in 1..=grid {
            let x = lo + (hi - lo) * T::from_usize_lossy(i) / nf;
            sup = sup.max(self.eval(x)?.2.abs());
        }
        for x in [lo, hi] {
            sup = sup.max(self.eval(x)?.2.abs());
        }
        Ok(sup)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryTerms<T> {
    /// `g(x_1)/(x_2 - x_1)`
    pub g1_over_gap: T,
    /// `g(x_N)/(x_N - x_{N-1})`
    pub gn_over_gap: T,
    /// `η(x_1) g(x_1)`
    pub eta_g1: T,
    /// `η(x_N) g(x_N)`
    pub eta_gn: T,
    /// `(|η g|(x_1) / ((2/3)(E_P[X] - a)), |g(x_1)|/(x_2 - x_1) / ((5/3)(E_P[X] - a)))` for finite `a`.
    pub left_ratios: Option<(T, T)>,
    /// The mirror quantities against `b - E_P[X]` for finite `b`.
    pub right_ratios: Option<(T, T)>,
}

fn check_part<T: Real>(probe: &SteinProbe<T>, part: &[T]) -> Result<()> {
    if part.len() < 2 {
        return Err(MiwError::InvalidArgument("a region part needs at least two points".into()));
    }
    for &x in part {
        probe.inside(x)?;
    }
    Ok(())
}

pub fn boundary_terms<T: Real>(probe: &SteinProbe<T>, part: &[T]) -> Result<BoundaryTerms<T>> {
    check_part(probe, part)?;
    let n = part.len();
    let (x1, x2, xm, xn) = (part[0], part[1], part[n - 2], part[n - 1]);
    let (g1, gn) = (probe.g(x1)?, probe.g(xn)?);
    let eta_g1 = probe.state.eta(x1) * g1;
    let eta_gn = probe.state.eta(xn) * gn;
    let g1_over_gap = g1 / (x2 - x1);
    let gn_over_gap = gn / (xn - xm);
    let two3 = T::lit(2.0) / T::lit(3.0);
    let five3 = T::lit(5.0) / T::lit(3.0);
    let left_ratios = probe.a.is_finite().then(|| {
        let s = probe.mean - probe.a;
        (eta_g1.abs() / (two3 * s), g1_over_gap.abs() / (five3 * s))
    });
    let right_ratios = probe.b.is_finite().then(|| {
        let s = probe.b - probe.mean;
        (eta_gn.abs() / (two3 * s), gn_over_gap.abs() / (five3 * s))
    });
    Ok(BoundaryTerms { g1_over_gap, gn_over_gap, eta_g1, eta_gn, left_ratios, right_ratios })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinBound<T> {
    pub bound: T,
    pub actual: T,
    pub e_r_h: T,
    pub sup_gpp: T,
}

/// The bound on `|E_R[h] - E_P[h]|` for a sequence part in the probe's region,
///
/// `(1/(N-1)) (|g(x_N)/(x_N - x_{N-1}) - g(x_1)/(x_2 - x_1) + β(ηg)(x_N) + (1-β)(ηg)(x_1)|
///  + (x_N - x_1)(1 + sup |g''|))`,
///
/// together with the actual difference, where `R` has density
/// `1/((N-1)(x_{n+1} - x_n))` on each gap.
pub fn stein_bound<T: Real>(probe: &SteinProbe<T>, part: &[T], beta: T) -> Result<SteinBound<T>> {
    if !(beta >= T::zero() && beta <= T::one()) {
        return Err(MiwError::InvalidArgument(format!("beta = {beta} outside [0, 1]")));
    }
    let bt = boundary_terms(probe, part)?;
    let n = part.len();
    let (x1, xn) = (part[0], part[n - 1]);
    let sup = probe.sup_gpp(x1, xn, SUP_GRID)?;
    let m1 = T::from_usize_lossy(n - 1);
    let edge = (bt.gn_over_gap - bt.g1_over_gap + beta * bt.eta_gn + (T::one() - beta) * bt.eta_g1).abs();
    let bound = (edge + (xn - x1) * (T::one() + sup)) / m1;
    let mut e_r_h = T::zero();
    for w in part.windows(2) {
        let v = integrate(|t| probe.h.value(t), w[0], w[1], &opts())?.value;
        e_r_h = e_r_h + v / (w[1] - w[0]);
    }
    e_r_h = e_r_h / m1;
    Ok(SteinBound { bound, actual: (e_r_h - probe.e_p_h).abs(), e_r_h, sup_gpp: sup })
}
