//! Globally adaptive Gauss–Kronrod (G10/K21) integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::QuadValue;
use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1], descending; odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525478210,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Stopping rule: done when `error <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            max_intervals: 20_000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    fn target(&self, value_norm: f64) -> f64 {
        self.abs.max(self.rel * value_norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    abs_value: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<T> Eq for Segment<T> {}

impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One K21 panel with the QUADPACK error heuristic; also returns `∫|f|`.
fn kronrod_panel<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    let mut abs_sum = fc.norm() * WGK[10];
    let mut values = [(T::zero(), T::zero()); 10];
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = (f1, f2);
        kronrod = kronrod + (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fc - mean).norm();
    for (j, (f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((*f1 - mean).norm() + (*f2 - mean).norm());
    }
    let h = half.abs();
    let result = kronrod * half;
    let res_abs = abs_sum * h;
    let res_asc = asc * h;
    let mut err = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err, res_abs)
}

/// Adaptive integration over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_breakpoints(f, &[a, b], tol)
}

/// Adaptive integration over consecutive panels `points[0]..points[n-1]`.
///
/// The breakpoints seed the initial partition; the panel with the largest
/// error estimate is bisected until the summed error meets `tol`.
pub fn integrate_breakpoints<T, F>(f: F, points: &[f64], tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if points.len() < 2 {
        return Err(Error::Quadrature("need at least two breakpoints".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Quadrature("breakpoints must be finite".into()));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Quadrature("breakpoints must be ascending".into()));
    }

    let mut heap = BinaryHeap::with_capacity(points.len());
    let mut total = T::zero();
    let mut total_err = 0.0;
    let mut total_abs = 0.0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, error, abs_value) = kronrod_panel(&f, w[0], w[1]);
        total = total + value;
        total_err += error;
        total_abs += abs_value;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
            abs_value,
        });
    }

    // panel errors never drop below 50 eps |f|, so neither can the target
    let roundoff = |abs: f64| 100.0 * f64::EPSILON * abs;
    let mut since_resum = 0usize;
    while total_err > tol.target(total.norm()).max(roundoff(total_abs)) {
        if heap.len() >= tol.max_intervals.max(points.len()) {
            return Err(Error::Quadrature(format!(
                "{} intervals exhausted with error {:e} (value {:e})",
                heap.len(),
                total_err,
                total.norm()
            )));
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            return Err(Error::Quadrature(format!(
                "interval collapsed with error {total_err:e}"
            )));
        }
        let (v1, e1, r1) = kronrod_panel(&f, worst.a, mid);
        let (v2, e2, r2) = kronrod_panel(&f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        total_abs += r1 + r2 - worst.abs_value;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            abs_value: r1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            abs_value: r2,
        });
        since_resum += 1;
        if since_resum == 256 {
            // keep the running sums free of cancellation drift
            since_resum = 0;
            total = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.error).sum();
            total_abs = heap.iter().map(|s| s.abs_value).sum();
        }
    }

    // final sum in ascending order of position for reproducibility
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().fold(T::zero(), |acc, s| acc + s.value);
    let error = segments.iter().map(|s| s.error).sum();
    Ok(Estimate {
        value,
        error,
        intervals: segments.len(),
    })
}

/// Adaptive integration over `[a, ∞)` through `x = a + (1 - s)/s`, `s ∈ (0, 1]`.
///
/// `splits` are extra breakpoints in `x` (each must exceed `a`).
pub fn integrate_semi_infinite<T, F>(f: F, a: f64, splits: &[f64], tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut s_points: Vec<f64> = splits
        .iter()
        .filter(|&&x| x > a && x.is_finite())
        .map(|&x| 1.0 / (1.0 + (x - a)))
        .collect();
    s_points.push(0.0);
    s_points.push(1.0);
    s_points.sort_by(f64::total_cmp);
    s_points.dedup();
    let g = |s: f64| {
        if s <= 0.0 {
            return T::zero();
        }
        let x = a + (1.0 - s) / s;
        f(x) * (1.0 / (s * s))
    };
    integrate_breakpoints(g, &s_points, tol)
}
