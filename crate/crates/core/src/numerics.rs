//! Numerical machinery shared by the special functions and the closed forms:
//! adaptive Gauss–Kronrod quadrature (finite and semi-infinite), Brent root
//! finding, tail-controlled series summation and central differences.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::specfun::SeriesControl;

// 15-point Kronrod abscissae; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Semi-infinite ranges are split at `origin + TAIL_SPLIT * scale`; the part
/// beyond is mapped onto `[0, 1)`.
const TAIL_SPLIT: f64 = 50.0;

/// How an integration range is presented to the Gauss–Kronrod kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    /// Integrate on the given finite interval.
    None,
    /// `[a, inf)`: the head `[a, a + 50 scale]` is integrated directly and the
    /// tail through `z = z0 + scale * t / (1 - t)`. `scale` should be the
    /// decay length of the integrand.
    SemiInfinite { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub transform: Transform,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            transform: Transform::None,
        }
    }
}

impl QuadSpec {
    pub fn semi_infinite(scale: f64) -> Self {
        Self {
            transform: Transform::SemiInfinite { scale },
            ..Self::default()
        }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidParam {
                name: "abs_tol",
                value: self.abs_tol,
                range: ">= 0",
            });
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParam {
                name: "rel_tol",
                value: self.rel_tol,
                range: "(0, 1)",
            });
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParam {
                name: "max_subdivisions",
                value: 0.0,
                range: ">= 1",
            });
        }
        if let Transform::SemiInfinite { scale } = self.transform {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::InvalidParam {
                    name: "scale",
                    value: scale,
                    range: "finite and > 0",
                });
            }
        }
        Ok(())
    }
}

/// Outcome of a successful adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Estimated absolute error; at most `max(abs_tol, rel_tol * |value|)`.
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    Tail { origin: f64, scale: f64 },
}

impl Map {
    #[inline]
    fn eval<F: Fn(f64) -> f64>(&self, f: &F, t: f64) -> f64 {
        match *self {
            Map::Identity => f(t),
            Map::Tail { origin, scale } => {
                let s = 1.0 - t;
                if s <= 0.0 {
                    return 0.0;
                }
                let v = f(origin + scale * t / s);
                if v == 0.0 {
                    0.0
                } else {
                    v * scale / (s * s)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    map: Map,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * resabs;
        if floor > err {
            err = floor;
        }
    }
    err
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, map: Map, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = map.eval(f, center);

    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..3 {
        let k = 2 * j + 1;
        let dx = half * XGK[k];
        let f1 = map.eval(f, center - dx);
        let f2 = map.eval(f, center + dx);
        fv1[k] = f1;
        fv2[k] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[k] * (f1 + f2);
        res_abs += WGK[k] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let k = 2 * j;
        let dx = half * XGK[k];
        let f1 = map.eval(f, center - dx);
        let f2 = map.eval(f, center + dx);
        fv1[k] = f1;
        fv2[k] = f2;
        res_k += WGK[k] * (f1 + f2);
        res_abs += WGK[k] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for k in 0..7 {
        res_asc += WGK[k] * ((fv1[k] - mean).abs() + (fv2[k] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let error = rescale_error((res_k - res_g) * half, res_abs, res_asc);
    Panel {
        lo,
        hi,
        map,
        value,
        error,
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// `b` may be `f64::INFINITY` when `spec.transform` is
/// [`Transform::SemiInfinite`]. The panel with the largest error estimate is
/// bisected until the summed estimate meets `max(abs_tol, rel_tol |I|)`.
pub fn quad_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<Quadrature> {
    spec.validate()?;
    if !a.is_finite() || b.is_nan() || b < a {
        return Err(Error::Domain {
            func: "quad_adaptive",
            arg: b,
            expected: "finite a <= b",
        });
    }

    let mut heap = BinaryHeap::new();
    match (b.is_finite(), spec.transform) {
        (true, _) => {
            if a == b {
                return Ok(Quadrature {
                    value: 0.0,
                    error: 0.0,
                    subdivisions: 0,
                });
            }
            heap.push(gauss_kronrod_15(&f, Map::Identity, a, b));
        }
        (false, Transform::SemiInfinite { scale }) => {
            let split = a + TAIL_SPLIT * scale;
            heap.push(gauss_kronrod_15(&f, Map::Identity, a, split));
            heap.push(gauss_kronrod_15(
                &f,
                Map::Tail {
                    origin: split,
                    scale,
                },
                0.0,
                1.0,
            ));
        }
        (false, Transform::None) => {
            return Err(Error::Domain {
                func: "quad_adaptive",
                arg: b,
                expected: "an infinite bound requires Transform::SemiInfinite",
            });
        }
    }

    let mut frozen: Vec<Panel> = Vec::new();
    let mut subdivisions = 0usize;
    let mut total: f64 = heap.iter().map(|p| p.value).sum();
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();

    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        if subdivisions >= spec.max_subdivisions {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi)
            || (worst.hi - worst.lo) <= 4.0 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs())
        {
            frozen.push(worst);
            continue;
        }
        let left = gauss_kronrod_15(&f, worst.map, worst.lo, mid);
        let right = gauss_kronrod_15(&f, worst.map, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();

    if !value.is_finite() || error > spec.abs_tol.max(spec.rel_tol * value.abs()) {
        let worst = panels
            .iter()
            .max_by(|p, q| p.error.total_cmp(&q.error))
            .copied()
            .expect("at least one panel");
        let (worst_lo, worst_hi) = match worst.map {
            Map::Identity => (worst.lo, worst.hi),
            Map::Tail { origin, scale } => (
                origin + scale * worst.lo / (1.0 - worst.lo),
                origin + scale * worst.hi / (1.0 - worst.hi),
            ),
        };
        return Err(Error::QuadratureFailed {
            value,
            error,
            worst_lo,
            worst_hi,
        });
    }

    Ok(Quadrature {
        value,
        error,
        subdivisions,
    })
}

/// Brent's method on a sign-changing bracket. Returns an endpoint exactly when
/// `g` vanishes there.
pub fn root_bracketed<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a), g(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) {
        return Err(Error::NoBracket {
            lo,
            hi,
            g_lo: fa,
            g_hi: fb,
        });
    }

    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if (fb > 0.0) == (fc > 0.0) {
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
        fb = g(b);
    }
    Err(Error::Degenerate(format!(
        "root_bracketed: no convergence on [{lo:e}, {hi:e}]"
    )))
}

/// Partial sum of a series together with its stopping diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub sum: f64,
    pub terms_used: usize,
    /// Magnitude of the last term added.
    pub tail_estimate: f64,
    pub converged: bool,
}

/// Sums `term(0) + term(1) + ...` until three consecutive terms fall below
/// `rel_tol * |partial sum|`, or `max_terms` is reached (`converged = false`).
pub fn series_accumulate<T: FnMut(usize) -> f64>(mut term: T, control: &SeriesControl) -> SeriesSum {
    let mut sum = 0.0;
    let mut small_run = 0;
    let mut last = f64::INFINITY;
    for k in 0..control.max_terms() {
        let t = term(k);
        sum += t;
        last = t.abs();
        if last < control.rel_tol() * sum.abs() || (t == 0.0 && sum == 0.0) {
            small_run += 1;
            if small_run == 3 {
                return SeriesSum {
                    sum,
                    terms_used: k + 1,
                    tail_estimate: last,
                    converged: true,
                };
            }
        } else {
            small_run = 0;
        }
    }
    SeriesSum {
        sum,
        terms_used: control.max_terms(),
        tail_estimate: last,
        converged: false,
    }
}

/// `(f(x + h) - f(x - h)) / 2h`, accurate to O(h^2) for smooth `f`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
