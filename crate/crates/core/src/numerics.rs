//! Scalar special functions, bracketed root finding and pathwise quadrature.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::sde_engine::BrownianPath;

const HALLEY_MAX_ITER: usize = 64;

/// Principal branch `W₀` of the Lambert W function, `w e^w = x`, `w ≥ -1`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch_point = -1.0 / E;
    if x.is_nan() || x < branch_point {
        return Err(Error::Domain {
            what: "lambert_w0",
            value: x,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == branch_point {
        return Ok(-1.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = if x < -0.25 {
        // Branch-point series in p = sqrt(2(ex + 1)).
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        x.ln_1p()
    };

    for _ in 0..HALLEY_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    if !w.is_finite() {
        return Err(Error::NonFinite("lambert_w0"));
    }
    Ok(w)
}

/// `W₀(e^ln_x)` for arguments whose exponential overflows.
pub fn lambert_w0_exp(ln_x: f64) -> Result<f64> {
    if ln_x < 500.0 {
        return lambert_w0(ln_x.exp());
    }
    // Newton on w + ln w = ln_x.
    let mut w = ln_x - ln_x.ln();
    for _ in 0..HALLEY_MAX_ITER {
        let g = w + w.ln() - ln_x;
        let step = g / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 1e-15 * w {
            break;
        }
    }
    Ok(w)
}

/// Interval known to bracket a sign change, plus stopping rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        RootBracket {
            lo,
            hi,
            tol: 1e-12,
            max_iter: 200,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Brent's method: inverse quadratic interpolation and secant steps, with a
/// bisection step whenever the interpolant leaves the bracket or stalls.
pub fn find_root<F>(f: F, bracket: RootBracket) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let RootBracket {
        lo,
        hi,
        tol,
        max_iter,
    } = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "bracket",
            value: hi - lo,
            reason: "need lo < hi and tol > 0",
        });
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::NonFinite("find_root objective"));
        }
    }
    Err(Error::MaxIterations {
        iterations: max_iter,
    })
}

/// Plain bisection; slow but with no interpolation logic to go wrong.
pub fn bisect<F>(f: F, bracket: RootBracket) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    for _ in 0..bracket.max_iter.max(2000) {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= bracket.tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::MaxIterations {
        iterations: bracket.max_iter,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol * (1.0 + 0.5 * (a + b).abs()) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        if x1 >= x2 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Which pathwise integral of `e^{a s + b W_s}` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralFlavor {
    /// `∫ e^{a s + b W_s} ds` by the trapezoid rule on the path grid.
    Time,
    /// Left-point Itô sum `Σ e^{a s_i + b W_{s_i}} ΔW_i`.
    Ito,
}

/// Integral from 0 to grid point `upto` (time `upto · dt`).
pub fn pathwise_exponential_integral(
    drift_exp: f64,
    vol: f64,
    path: &BrownianPath,
    upto: usize,
    flavor: IntegralFlavor,
) -> Result<f64> {
    if upto > path.n_steps() {
        return Err(Error::IndexOutOfRange {
            index: upto,
            len: path.n_steps(),
        });
    }
    let dt = path.dt;
    let mut w = 0.0;
    let mut sum = 0.0;
    let mut left = 1.0;
    for (i, dw) in path.increments[..upto].iter().enumerate() {
        match flavor {
            IntegralFlavor::Time => {
                w += dw;
                let right = (drift_exp * (i + 1) as f64 * dt + vol * w).exp();
                sum += 0.5 * (left + right) * dt;
                left = right;
            }
            IntegralFlavor::Ito => {
                sum += (drift_exp * i as f64 * dt + vol * w).exp() * dw;
                w += dw;
            }
        }
    }
    if !sum.is_finite() {
        return Err(Error::NonFinite("pathwise exponential integral"));
    }
    Ok(sum)
}

/// Running values of [`pathwise_exponential_integral`] at every grid point,
/// starting with 0 at `t = 0`.
pub fn cumulative_exponential_integral(
    drift_exp: f64,
    vol: f64,
    path: &BrownianPath,
    flavor: IntegralFlavor,
) -> Result<Vec<f64>> {
    let dt = path.dt;
    let mut out = Vec::with_capacity(path.n_steps() + 1);
    out.push(0.0);
    let mut w = 0.0;
    let mut sum = 0.0;
    let mut left = 1.0;
    for (i, dw) in path.increments.iter().enumerate() {
        match flavor {
            IntegralFlavor::Time => {
                w += dw;
                let right = (drift_exp * (i + 1) as f64 * dt + vol * w).exp();
                sum += 0.5 * (left + right) * dt;
                left = right;
            }
            IntegralFlavor::Ito => {
                sum += (drift_exp * i as f64 * dt + vol * w).exp() * dw;
                w += dw;
            }
        }
        out.push(sum);
    }
    if !sum.is_finite() {
        return Err(Error::NonFinite("pathwise exponential integral"));
    }
    Ok(out)
}
