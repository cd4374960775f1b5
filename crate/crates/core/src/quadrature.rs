//! Adaptive one-dimensional quadrature.
//!
//! Globally adaptive Gauss-Kronrod (7/15) integration: the interval with the
//! largest error estimate is bisected until the summed estimate meets
//! `max(abs_tol, rel_tol * |value|)`. Error estimates use the QUADPACK
//! rescaling of `|K15 - G7|`. Semi-infinite ranges are mapped onto `(0, 1]`
//! with `t = a + L (1 - u) / u` or truncated at a fixed radius.
//!
//! The `*_many` variants integrate several functions on one set of nodes;
//! each component must meet the tolerance on its own.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use serde::Serialize;

/// Kronrod abscissae on [0, 1); odd indices are the Gauss-7 nodes.
#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
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

/// Gauss-7 weights for nodes XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// How a semi-infinite range is reduced to a finite one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SemiInfinitePolicy {
    /// Substitute `t = a + scale * (1 - u) / u`; `scale` should be near the
    /// length over which the integrand varies.
    Transform { scale: f64 },
    /// Integrate `[a, radius]` and drop the tail.
    Truncate { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub semi_infinite: SemiInfinitePolicy,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            max_subdivisions: 500,
            semi_infinite: SemiInfinitePolicy::Transform { scale: 1.0 },
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.semi_infinite = SemiInfinitePolicy::Transform { scale };
        self
    }

    /// Both tolerances divided by `10^levels`.
    pub fn tightened(mut self, levels: i32) -> Self {
        let factor = 10f64.powi(levels);
        self.rel_tol /= factor;
        self.abs_tol /= factor;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_subdivisions > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Finite,
    Transformed { scale: f64 },
    Truncated { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
    pub subdivisions: usize,
    pub method: Method,
}

/// Scalar integral: value, error estimate and bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
    pub method: Method,
}

impl From<Integral<1>> for Estimate {
    fn from(r: Integral<1>) -> Self {
        Estimate {
            value: r.value[0],
            error: r.error[0],
            evaluations: r.evaluations,
            subdivisions: r.subdivisions,
            method: r.method,
        }
    }
}

/// Failure to meet the requested tolerance, with the best available estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct NonConvergence {
    pub estimate: f64,
    pub error: f64,
    pub subdivisions: usize,
    pub reason: &'static str,
}

impl fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} after {} subdivisions (estimate {:e}, error {:e})",
            self.reason, self.subdivisions, self.estimate, self.error
        )
    }
}

impl std::error::Error for NonConvergence {}

impl From<NonConvergence> for crate::Error {
    fn from(e: NonConvergence) -> Self {
        crate::Error::Quadrature {
            context: e.reason.to_string(),
            estimate: e.estimate,
            error: e.error,
        }
    }
}

pub type QuadResult<T> = std::result::Result<T, NonConvergence>;

pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadResult<Estimate>
where
    F: Fn(f64) -> f64,
{
    integrate_many(|x| [f(x)], a, b, spec).map(Estimate::from)
}

pub fn integrate_semi_infinite<F>(f: F, a: f64, spec: &QuadratureSpec) -> QuadResult<Estimate>
where
    F: Fn(f64) -> f64,
{
    integrate_semi_infinite_many(|x| [f(x)], a, spec).map(Estimate::from)
}

pub fn integrate_many<const N: usize, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadResult<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if a == b {
        return Ok(Integral {
            value: [0.0; N],
            error: [0.0; N],
            evaluations: 0,
            subdivisions: 0,
            method: Method::Finite,
        });
    }
    if a > b {
        let mut r = adaptive(&f, b, a, spec)?;
        r.value.iter_mut().for_each(|v| *v = -*v);
        return Ok(r);
    }
    adaptive(&f, a, b, spec)
}

pub fn integrate_semi_infinite_many<const N: usize, F>(f: F, a: f64, spec: &QuadratureSpec) -> QuadResult<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    match spec.semi_infinite {
        SemiInfinitePolicy::Truncate { radius } => {
            let mut r = integrate_many(f, a, a.max(radius), spec)?;
            r.method = Method::Truncated { radius };
            Ok(r)
        }
        SemiInfinitePolicy::Transform { scale } => {
            let g = |u: f64| {
                let t = a + scale * (1.0 - u) / u;
                let jac = scale / (u * u);
                let mut v = f(t);
                if t.is_finite() {
                    v.iter_mut().for_each(|c| *c *= jac);
                } else {
                    v = [0.0; N];
                }
                v
            };
            let mut r = adaptive(&g, 0.0, 1.0, spec)?;
            r.method = Method::Transformed { scale };
            Ok(r)
        }
    }
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    key: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl<const N: usize> Eq for Segment<N> {}

impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn rule<const N: usize, F>(f: &F, a: f64, b: f64) -> QuadResult<Segment<N>>
where
    F: Fn(f64) -> [f64; N],
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);

    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut resabs = [0.0; N];
    let mut fv1 = [[0.0; N]; 7];
    let mut fv2 = [[0.0; N]; 7];
    for i in 0..N {
        kronrod[i] = fc[i] * WGK[7];
        gauss[i] = fc[i] * WG[3];
        resabs[i] = fc[i].abs() * WGK[7];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = f(centre - dx);
        let hi = f(centre + dx);
        fv1[j] = lo;
        fv2[j] = hi;
        for i in 0..N {
            kronrod[i] += WGK[j] * (lo[i] + hi[i]);
            resabs[i] += WGK[j] * (lo[i].abs() + hi[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * (lo[i] + hi[i]);
            }
        }
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for i in 0..N {
        let mean = kronrod[i] * 0.5;
        let mut resasc = WGK[7] * (fc[i] - mean).abs();
        for j in 0..7 {
            resasc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        let resasc = resasc * half.abs();
        let resabs = resabs[i] * half.abs();
        let k = kronrod[i] * half;
        let mut err = ((kronrod[i] - gauss[i]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        if !k.is_finite() || !err.is_finite() {
            return Err(NonConvergence {
                estimate: k,
                error: err,
                subdivisions: 0,
                reason: "integrand is not finite",
            });
        }
        value[i] = k;
        error[i] = err;
    }
    let key = error.iter().cloned().fold(0.0, f64::max);
    Ok(Segment {
        a,
        b,
        value,
        error,
        key,
    })
}

fn adaptive<const N: usize, F>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadResult<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    let first = rule(f, a, b)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);

    let converged = |t: &[f64; N], e: &[f64; N]| (0..N).all(|i| e[i] <= spec.abs_tol.max(spec.rel_tol * t[i].abs()));

    let mut subdivisions = 1;
    while !converged(&total, &total_err) {
        if subdivisions >= spec.max_subdivisions {
            return Err(NonConvergence {
                estimate: total[0],
                error: total_err[0],
                subdivisions,
                reason: "subdivision limit reached",
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(NonConvergence {
                estimate: total[0],
                error: total_err[0],
                subdivisions,
                reason: "interval cannot be bisected further",
            });
        }
        let left = rule(f, worst.a, mid)?;
        let right = rule(f, mid, worst.b)?;
        evaluations += 30;
        for i in 0..N {
            total[i] += left.value[i] + right.value[i] - worst.value[i];
            total_err[i] += left.error[i] + right.error[i] - worst.error[i];
        }
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // Re-sum to keep the running totals free of cancellation drift.
            total = [0.0; N];
            total_err = [0.0; N];
            for s in heap.iter() {
                for i in 0..N {
                    total[i] += s.value[i];
                    total_err[i] += s.error[i];
                }
            }
        }
    }

    Ok(Integral {
        value: total,
        error: total_err,
        evaluations,
        subdivisions,
        method: Method::Finite,
    })
}
