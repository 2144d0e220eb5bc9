//! Adaptive Simpson quadrature with interval bisection.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_DEPTH: u32 = 40;

/// Integrates a complex-valued `f` over `[a, b]`.
///
/// `breakpoints` inside `(a, b)` become panel edges (kinks or jumps of the
/// integrand). Panels are further split so none is wider than `max_panel`.
/// The tolerance is relative to an estimate of `∫|f|`, so oscillatory
/// integrands with near-cancelling results still terminate.
pub fn integrate<T, F>(mut f: F, a: T, b: T, breakpoints: &[T], max_panel: Option<T>, tol: T) -> Result<Complex<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    if !(tol > T::zero()) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    if b == a {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    if b < a {
        return integrate(f, b, a, breakpoints, max_panel, tol).map(|z| -z);
    }

    let mut edges = vec![a];
    let mut inner: Vec<T> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    inner.dedup();
    edges.extend(inner);
    edges.push(b);

    // Each panel remembers its segment; evaluations are clamped a hair inside
    // so a jump at a breakpoint is seen as a one-sided limit.
    let mut panels: Vec<(T, T, T, T)> = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let nudge = (T::lit(4.0) * T::epsilon() * lo.abs().max(hi.abs())).min((hi - lo) / T::lit(4.0));
        let (slo, shi) = (lo + nudge, hi - nudge);
        let pieces = match max_panel {
            Some(p) if p > T::zero() => ((hi - lo) / p).ceil().to_usize().unwrap_or(1).clamp(1, 1 << 16),
            _ => 1,
        };
        let width = (hi - lo) / T::from_count(pieces);
        for k in 0..pieces {
            let x0 = lo + width * T::from_count(k);
            let x1 = if k + 1 == pieces { hi } else { x0 + width };
            panels.push((x0, x1, slo, shi));
        }
    }

    // First pass: Simpson estimates per panel and an L1 scale.
    let six = T::lit(6.0);
    let mut seeds = Vec::with_capacity(panels.len());
    let mut l1 = T::zero();
    for &(x0, x1, slo, shi) in &panels {
        let mut g = |x: T| f(x.max(slo).min(shi));
        let xm = (x0 + x1) / T::lit(2.0);
        let (f0, fm, f1) = (g(x0)?, g(xm)?, g(x1)?);
        let whole = (f0 + fm * T::lit(4.0) + f1) * ((x1 - x0) / six);
        l1 = l1 + (f0.norm() + fm.norm() * T::lit(4.0) + f1.norm()) * ((x1 - x0) / six);
        seeds.push((x0, x1, slo, shi, f0, fm, f1, whole));
    }
    let scale = if l1 > T::zero() { l1 } else { T::one() };
    let eps_total = tol * scale;
    let span = b - a;

    let mut total = Complex::new(T::zero(), T::zero());
    let mut worst = T::zero();
    for (x0, x1, slo, shi, f0, fm, f1, whole) in seeds {
        let eps = eps_total * (x1 - x0) / span;
        let mut g = |x: T| f(x.max(slo).min(shi));
        total = total + adapt(&mut g, x0, x1, f0, fm, f1, whole, eps, MAX_DEPTH, &mut worst)?;
    }
    if worst > T::zero() {
        return Err(Error::Numeric {
            what: "adaptive Simpson quadrature".into(),
            residual: (worst / scale).to_f64_lossy(),
        });
    }
    Ok(total)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<T, F>(mut f: F, a: T, b: T, breakpoints: &[T], max_panel: Option<T>, tol: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    integrate(|x| f(x).map(|v| Complex::new(v, T::zero())), a, b, breakpoints, max_panel, tol).map(|z| z.re)
}

#[allow(clippy::too_many_arguments)]
fn adapt<T, F>(
    f: &mut F,
    a: T,
    b: T,
    fa: Complex<T>,
    fm: Complex<T>,
    fb: Complex<T>,
    whole: Complex<T>,
    eps: T,
    depth: u32,
    worst: &mut T,
) -> Result<Complex<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm)?;
    let frm = f(rm)?;
    let h = (b - a) / T::lit(12.0);
    let left = (fa + flm * T::lit(4.0) + fm) * h;
    let right = (fm + frm * T::lit(4.0) + fb) * h;
    let sum = left + right;
    let diff = (sum - whole).norm();
    let roundoff = T::epsilon() * T::lit(64.0) * sum.norm();
    if diff <= T::lit(15.0) * eps || diff <= roundoff {
        return Ok(sum + (sum - whole) / T::lit(15.0));
    }
    if depth == 0 || m <= a || m >= b {
        if diff > *worst {
            *worst = diff;
        }
        return Ok(sum);
    }
    let half = eps / two;
    Ok(adapt(f, a, m, fa, flm, fm, left, half, depth - 1, worst)?
        + adapt(f, m, b, fm, frm, fb, right, half, depth - 1, worst)?)
}
