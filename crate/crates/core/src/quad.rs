//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Infinite endpoints are truncated at `±TAIL_CUT`: every integrand in this
//! crate carries the Gaussian factor `e^{-x²/2}`, which underflows well before.

use crate::error::{MiwError, Result};
use crate::scalar::Real;

/// Where infinite integration limits are cut.
pub const TAIL_CUT: f64 = 40.0;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_segments: usize,
}

impl<T: Real> QuadOptions<T> {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol: T::lit(abs_tol), rel_tol: T::lit(rel_tol), max_segments: 4000 }
    }

    /// Tight defaults: the tolerances are clamped to a few hundred ulps for
    /// narrow types.
    pub fn tight() -> Self {
        Self::new(1e-15, 1e-13)
    }

    fn effective(&self) -> (T, T) {
        let floor = T::eps_times(100.0);
        (self.abs_tol.max(T::min_positive_value()), self.rel_tol.max(floor))
    }
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self::tight()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue<T> {
    pub value: T,
    pub error: T,
    pub segments: usize,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    abs: T,
}

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
/// Returns `(value, error estimate, ∫|f| estimate)`.
pub fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + T::lit(WGK[j]) * (f1 + f2);
        res_abs = res_abs + T::lit(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half_len.abs();
    let value = res_k * half_len;
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut err = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let round = T::eps_times(50.0) * res_abs;
    if round > err {
        err = round;
    }
    (value, err, res_abs)
}

fn finite_limits<T: Real>(a: T, b: T) -> (T, T) {
    let cut = T::lit(TAIL_CUT);
    let a = if a == T::neg_infinity() { (-cut).min(b - T::one()) } else { a };
    let b = if b == T::infinity() { cut.max(a + T::one()) } else { b };
    (a, b)
}

/// Integrates `f` over `[a, b]`; `a` may be `-∞` and `b` may be `+∞`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<QuadValue<T>> {
    if a == b {
        return Ok(QuadValue { value: T::zero(), error: T::zero(), segments: 0 });
    }
    if b < a {
        let r = integrate(f, b, a, opts)?;
        return Ok(QuadValue { value: -r.value, ..r });
    }
    let (a, b) = finite_limits(a, b);
    let (abs_tol, rel_tol) = opts.effective();
    let (v, e, m) = gk15(&f, a, b);
    let mut segs = vec![Segment { a, b, value: v, error: e, abs: m }];
    loop {
        let total: T = segs.iter().map(|s| s.value).sum();
        let err: T = segs.iter().map(|s| s.error).sum();
        // cancelling integrands cannot do better than round-off on ∫|f|
        let floor = T::eps_times(100.0) * segs.iter().map(|s| s.abs).sum::<T>();
        if err <= abs_tol.max(rel_tol * total.abs()).max(floor) {
            return Ok(QuadValue { value: total, error: err, segments: segs.len() });
        }
        let (idx, worst) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, s)| (i, *s))
            .expect("non-empty");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if segs.len() >= opts.max_segments || mid <= worst.a || mid >= worst.b || !err.is_finite() {
            // The roundoff floor was reached if the split can no longer change anything.
            if err <= T::eps_times(1e3) * segs.iter().map(|s| s.abs).sum::<T>() {
                return Ok(QuadValue { value: total, error: err, segments: segs.len() });
            }
            return Err(MiwError::Quadrature { a: a.as_f64(), b: b.as_f64(), error: err.as_f64() });
        }
        let (v1, e1, m1) = gk15(&f, worst.a, mid);
        let (v2, e2, m2) = gk15(&f, mid, worst.b);
        segs[idx] = Segment { a: worst.a, b: mid, value: v1, error: e1, abs: m1 };
        segs.push(Segment { a: mid, b: worst.b, value: v2, error: e2, abs: m2 });
    }
}

/// Integrates over consecutive pieces split at `breaks` (which must lie in `[a, b]`).
pub fn integrate_split<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    breaks: &[T],
    opts: &QuadOptions<T>,
) -> Result<QuadValue<T>> {
    let mut edges = vec![a];
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    let mut out = QuadValue { value: T::zero(), error: T::zero(), segments: 0 };
    for w in edges.windows(2) {
        let r = integrate(&f, w[0], w[1], opts)?;
        out.value = out.value + r.value;
        out.error = out.error + r.error;
        out.segments += r.segments;
    }
    Ok(out)
}
