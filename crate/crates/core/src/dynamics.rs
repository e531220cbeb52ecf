//! Velocity-Verlet integration of
//! `H_MIW = Σ p_n²/2 + Σ x_n² + Σ (ζ_{n+1} - ζ_n)²`.

use serde::Serialize;

use crate::error::{MiwError, Result};
use crate::metrics::{check_increasing, energy_unchecked};
use crate::scalar::Real;
use crate::stability::grad_unchecked;

/// Smallest gap tolerated during a step.
pub const MIN_GAP: f64 = 1e-9;

/// Fixed start for the comparison run: five evenly spaced worlds, rescaled
/// by [`matched_start`] to a prescribed energy.
pub const ARBITRARY_START: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState<T> {
    pub t: T,
    pub x: Vec<T>,
    pub p: Vec<T>,
    pub energy_0: T,
}

impl<T: Real> PhaseState<T> {
    /// State at `t = 0`; momenta default to zero.
    pub fn new(x: Vec<T>, p: Option<Vec<T>>) -> Result<Self> {
        check_increasing(&x)?;
        if x.is_empty() {
            return Err(MiwError::InvalidArgument("no worlds".into()));
        }
        let p = p.unwrap_or_else(|| vec![T::zero(); x.len()]);
        if p.len() != x.len() {
            return Err(MiwError::InvalidArgument(format!("{} momenta for {} positions", p.len(), x.len())));
        }
        let energy_0 = hamiltonian(&x, &p);
        Ok(Self { t: T::zero(), x, p, energy_0 })
    }

    pub fn energy(&self) -> T {
        hamiltonian(&self.x, &self.p)
    }

    /// `|H(t) - H(0)| / H(0)`.
    pub fn relative_drift(&self) -> T {
        ((self.energy() - self.energy_0) / self.energy_0).abs()
    }
}

pub fn hamiltonian<T: Real>(x: &[T], p: &[T]) -> T {
    let kinetic: T = p.iter().map(|&v| v * v).sum::<T>() * T::lit(0.5);
    kinetic + energy_unchecked(x).h
}

/// `-∂H/∂x`.
pub fn force<T: Real>(x: &[T]) -> Result<Vec<T>> {
    check_increasing(x)?;
    Ok(grad_unchecked(x).into_iter().map(|g| -g).collect())
}

fn guard<T: Real>(x: &[T], time: T) -> Result<()> {
    let min = T::lit(MIN_GAP);
    match x.windows(2).position(|w| !(w[1] - w[0] >= min)) {
        Some(i) => Err(MiwError::Collision { index: i + 1, time: time.as_f64() }),
        None if x.iter().all(|v| v.is_finite()) => Ok(()),
        None => Err(MiwError::Collision { index: 0, time: time.as_f64() }),
    }
}

/// One kick-drift-kick step. A negative `dt` runs the scheme backwards.
pub fn step<T: Real>(state: &PhaseState<T>, dt: T) -> Result<PhaseState<T>> {
    if dt == T::zero() || !dt.is_finite() {
        return Err(MiwError::InvalidArgument(format!("dt = {dt}")));
    }
    guard(&state.x, state.t)?;
    let half = dt * T::lit(0.5);
    let f0 = grad_unchecked(&state.x);
    let p_half: Vec<T> = state.p.iter().zip(&f0).map(|(&p, &g)| p - half * g).collect();
    let x: Vec<T> = state.x.iter().zip(&p_half).map(|(&x, &p)| x + dt * p).collect();
    let t = state.t + dt;
    guard(&x, t)?;
    let f1 = grad_unchecked(&x);
    let p = p_half.iter().zip(&f1).map(|(&p, &g)| p - half * g).collect();
    Ok(PhaseState { t, x, p, energy_0: state.energy_0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub samples: Vec<PhaseState<T>>,
    pub dt: T,
    pub stride: usize,
    pub integrator: &'static str,
    /// Largest relative energy drift over every step, not only the samples.
    pub max_drift: T,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &PhaseState<T> {
        self.samples.last().expect("trajectory holds the initial state")
    }

    /// `Σ_n max_t |x_n(t) - x_n(0)|` over the samples.
    pub fn excursion(&self) -> T {
        let x0 = &self.samples[0].x;
        (0..x0.len())
            .map(|n| self.samples.iter().fold(T::zero(), |m, s| m.max((s.x[n] - x0[n]).abs())))
            .sum()
    }
}

/// A failed run keeps whatever was integrated before the error.
#[derive(Debug, Clone)]
pub struct SimulationError<T> {
    pub error: MiwError,
    pub partial: Trajectory<T>,
}

impl<T: Real> std::fmt::Display for SimulationError<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} samples", self.error, self.partial.samples.len())
    }
}

impl<T: Real> std::error::Error for SimulationError<T> {}

/// Integrates to `t_max` with `round(t_max/dt)` steps, keeping every
/// `stride`-th state and the initial one.
pub fn simulate<T: Real>(init: &PhaseState<T>, dt: T, t_max: T, stride: usize) -> Result<Trajectory<T>, SimulationError<T>> {
    let mut traj = Trajectory { samples: vec![init.clone()], dt, stride, integrator: "velocity-verlet", max_drift: T::zero() };
    let bad = |msg: String, traj: Trajectory<T>| SimulationError { error: MiwError::InvalidArgument(msg), partial: traj };
    if !(dt > T::zero()) || !(t_max >= T::zero()) || stride == 0 {
        return Err(bad(format!("need dt > 0, t_max ≥ 0, stride ≥ 1 (got {dt}, {t_max}, {stride})"), traj));
    }
    let steps = (t_max / dt).round().to_usize().unwrap_or(0);
    let mut cur = init.clone();
    for i in 1..=steps {
        match step(&cur, dt) {
            Ok(next) => cur = next,
            Err(error) => return Err(SimulationError { error, partial: traj }),
        }
        traj.max_drift = traj.max_drift.max(cur.relative_drift());
        if i % stride == 0 || i == steps {
            traj.samples.push(cur.clone());
        }
    }
    Ok(traj)
}

/// [`ARBITRARY_START`] scaled by `s` so that `H(s·v) = target`, on the branch
/// `s ≥ argmin H(s·v)`. `H(s·v) = s²V + U/s²` is minimal at `s⁴ = U/V`.
pub fn matched_start<T: Real>(target: T) -> Result<Vec<T>> {
    let v: Vec<T> = ARBITRARY_START.iter().map(|&a| T::lit(a)).collect();
    let e = energy_unchecked(&v);
    let s_min = (e.u / e.v).sqrt().sqrt();
    let h = |s: T| s * s * e.v + e.u / (s * s);
    if target < h(s_min) {
        return Err(MiwError::InvalidArgument(format!("energy {target} below the family minimum {}", h(s_min))));
    }
    let (mut lo, mut hi) = (s_min, s_min);
    while h(hi) < target {
        hi = hi * T::lit(2.0);
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = T::lit(0.5) * (lo + hi);
    Ok(v.iter().map(|&a| a * s).collect())
}
