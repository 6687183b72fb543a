//! Root polishing: bisection on a bracketing edge and damped Newton in the
//! plane for simultaneous zeros of a complex-valued function.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// A refined root is kept only if `|F|` ends below this.
pub const ACCEPT_RESIDUAL: f64 = 1e-8;
/// Refined roots closer than this (in parameter units) are merged.
pub const DEDUPE_RADIUS: f64 = 1e-6;

const BISECTION_STOP: f64 = 1e-13;
const MAX_BISECTIONS: usize = 200;
const NEWTON_STOP: f64 = 1e-13;
const MAX_NEWTON: usize = 50;
const MAX_HALVINGS: usize = 40;
const FD_STEP: f64 = 1e-6;
/// Ratio of singular values below which the Jacobian counts as singular.
const GRAZING_RATIO: f64 = 1e-6;

/// A simultaneous zero of `Re F` and `Im F` in a parameter plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
    /// `|F(x, y)|` at the refined location.
    pub residual: f64,
    /// The level curves touch rather than cross: the Jacobian is singular.
    pub grazing: bool,
}

/// Bisects `f` on `[a, b]` given `f(a)`, `f(b)` of opposite sign. Returns the
/// best abscissa seen and `|f|` there.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, fb: f64) -> (f64, f64) {
    let (mut best, mut best_abs) = if fa.abs() <= fb.abs() { (a, fa.abs()) } else { (b, fb.abs()) };
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm.abs() < best_abs {
            best = mid;
            best_abs = fm.abs();
        }
        if best_abs < BISECTION_STOP {
            break;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    (best, best_abs)
}

/// Rectangle the Newton iterates are projected onto.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Domain {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Domain {
    fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0].clamp(self.x.0, self.x.1), p[1].clamp(self.y.0, self.y.1)]
    }
}

type Jacobian = [[f64; 2]; 2];

fn jacobian<F>(f: &F, p: [f64; 2]) -> Result<Jacobian>
where
    F: Fn(f64, f64) -> Result<Complex64>,
{
    let h = FD_STEP;
    let dx = (f(p[0] + h, p[1])? - f(p[0] - h, p[1])?) / (2.0 * h);
    let dy = (f(p[0], p[1] + h)? - f(p[0], p[1] - h)?) / (2.0 * h);
    Ok([[dx.re, dy.re], [dx.im, dy.im]])
}

/// Singular values of a 2×2 matrix, largest first.
fn singular_values(j: &Jacobian) -> (f64, f64) {
    let a = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let d = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    let b = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let mean = 0.5 * (a + d);
    let spread = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    ((mean + spread).sqrt(), (mean - spread).max(0.0).sqrt())
}

pub(crate) fn is_grazing<F>(f: &F, x: f64, y: f64) -> Result<bool>
where
    F: Fn(f64, f64) -> Result<Complex64>,
{
    let (hi, lo) = singular_values(&jacobian(f, [x, y])?);
    Ok(hi == 0.0 || lo < GRAZING_RATIO * hi)
}

/// Damped Newton on `(Re F, Im F)` with a central-difference Jacobian.
///
/// The step solves `(JᵀJ + μI) δ = -JᵀF` with a tiny `μ`, which is plain
/// Newton for a regular Jacobian and stays finite at tangencies; it is halved
/// until `|F|` decreases. Returns `None` unless the residual falls below
/// [`ACCEPT_RESIDUAL`].
pub(crate) fn newton<F>(f: &F, start: [f64; 2], domain: Domain) -> Result<Option<PlanePoint>>
where
    F: Fn(f64, f64) -> Result<Complex64>,
{
    let mut p = domain.clamp(start);
    let mut value = f(p[0], p[1])?;
    for _ in 0..MAX_NEWTON {
        if value.norm() < NEWTON_STOP {
            break;
        }
        let j = jacobian(f, p)?;
        let g = [
            j[0][0] * value.re + j[1][0] * value.im,
            j[0][1] * value.re + j[1][1] * value.im,
        ];
        let mut a = [
            [j[0][0] * j[0][0] + j[1][0] * j[1][0], j[0][0] * j[0][1] + j[1][0] * j[1][1]],
            [0.0, j[0][1] * j[0][1] + j[1][1] * j[1][1]],
        ];
        a[1][0] = a[0][1];
        let mu = 1e-14 * (a[0][0] + a[1][1]).max(f64::MIN_POSITIVE);
        a[0][0] += mu;
        a[1][1] += mu;
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let delta = [
            -(a[1][1] * g[0] - a[0][1] * g[1]) / det,
            -(a[0][0] * g[1] - a[1][0] * g[0]) / det,
        ];

        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..MAX_HALVINGS {
            let q = domain.clamp([p[0] + lambda * delta[0], p[1] + lambda * delta[1]]);
            let fq = f(q[0], q[1])?;
            if fq.norm() < value.norm() {
                p = q;
                value = fq;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let residual = value.norm();
    if residual >= ACCEPT_RESIDUAL {
        return Ok(None);
    }
    Ok(Some(PlanePoint {
        x: p[0],
        y: p[1],
        residual,
        grazing: is_grazing(f, p[0], p[1])?,
    }))
}

/// Walks the straight piece `a → b` of an `Re F = 0` polyline looking for a
/// sign change of `Im F`. Each probe is first pulled back onto `Re F = 0`
/// along `∇ Re F`, then the parameter along the piece is bisected.
pub(crate) fn bisect_along_real_curve<F>(
    f: &F,
    a: [f64; 2],
    b: [f64; 2],
    domain: Domain,
) -> Result<Option<PlanePoint>>
where
    F: Fn(f64, f64) -> Result<Complex64>,
{
    let project = |s: f64| -> Result<([f64; 2], Complex64)> {
        let mut p = domain.clamp([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        let mut value = f(p[0], p[1])?;
        for _ in 0..8 {
            if value.re.abs() < NEWTON_STOP {
                break;
            }
            let j = jacobian(f, p)?;
            let grad = [j[0][0], j[0][1]];
            let norm2 = grad[0] * grad[0] + grad[1] * grad[1];
            if norm2 == 0.0 {
                break;
            }
            p = domain.clamp([p[0] - value.re * grad[0] / norm2, p[1] - value.re * grad[1] / norm2]);
            value = f(p[0], p[1])?;
        }
        Ok((p, value))
    };

    let (mut lo, mut hi) = (0.0, 1.0);
    let (p_lo, mut f_lo) = project(lo)?;
    let (p_hi, f_hi) = project(hi)?;
    let mut best = if f_lo.norm() <= f_hi.norm() { (p_lo, f_lo) } else { (p_hi, f_hi) };
    if (f_lo.im > 0.0) == (f_hi.im > 0.0) && best.1.norm() >= ACCEPT_RESIDUAL {
        return Ok(None);
    }
    for _ in 0..60 {
        if best.1.norm() < NEWTON_STOP {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (p_mid, f_mid) = project(mid)?;
        if f_mid.norm() < best.1.norm() {
            best = (p_mid, f_mid);
        }
        if (f_mid.im > 0.0) == (f_lo.im > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let (p, value) = best;
    if value.norm() >= ACCEPT_RESIDUAL {
        return Ok(None);
    }
    Ok(Some(PlanePoint {
        x: p[0],
        y: p[1],
        residual: value.norm(),
        grazing: is_grazing(f, p[0], p[1])?,
    }))
}

/// Keeps the first of any group of points closer than [`DEDUPE_RADIUS`],
/// then orders the survivors by `(x, y)`.
pub(crate) fn dedupe(points: impl IntoIterator<Item = PlanePoint>) -> Vec<PlanePoint> {
    let mut kept: Vec<PlanePoint> = Vec::new();
    for p in points {
        if !kept.iter().any(|k| (k.x - p.x).hypot(k.y - p.y) < DEDUPE_RADIUS) {
            kept.push(p);
        }
    }
    kept.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    kept
}
