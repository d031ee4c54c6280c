//! Energy-axis quadrature.
//!
//! Two tools live here. [`integrate`] is a globally adaptive 7/15-point
//! Gauss-Kronrod integrator with interval bisection, used for one-off
//! integrals (Lamb shifts, sum rules, spectra). [`PanelNodes`] is a fixed
//! composite Gauss-Legendre node set that is built once for an integrand
//! profile and reused for many oscillatory transforms, which is how the
//! kernel lattices and Fourier reconstructions are evaluated.

use std::collections::BinaryHeap;
use std::ops::{Add, Sub};
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            absolute: 1e-12,
            relative: 1e-8,
            max_intervals: 4000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    /// Final interval partition, sorted by lower endpoint.
    pub partition: Vec<(f64, f64)>,
}

struct Segment<T> {
    lower: f64,
    upper: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    let mut res_abs = fc.magnitude() * WGK[7];
    let mut fv = [(T::zero(), T::zero()); 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = (f1, f2);
        kronrod = kronrod + (f1 + f2).scale(WGK[j]);
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2).scale(WG[j / 2]);
        }
    }
    let mean = kronrod.scale(0.5);
    let mut res_asc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j].0 - mean).magnitude() + (fv[j].1 - mean).magnitude());
    }
    let scale = half.abs();
    res_abs *= scale;
    res_asc *= scale;
    let mut err = (kronrod - gauss).magnitude() * scale;
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (kronrod.scale(half), err)
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`, pre-split at
/// `breakpoints` (points outside the interval are ignored).
///
/// Subintervals are bisected in order of decreasing error estimate until
/// the total estimate meets `tol`. Exhausting `max_intervals` is reported
/// as [`Error::NumericalFailure`] carrying the final estimate.
pub fn integrate<T, F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
    context: &str,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integration bounds must be finite ({context})"
        )));
    }
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: 0.0,
            partition: Vec::new(),
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    // Intervals too narrow to split are retired here.
    let mut retired: Vec<Segment<T>> = Vec::new();
    for w in cuts.windows(2) {
        let (value, error) = kronrod15(&f, w[0], w[1]);
        total = total + value;
        total_err += error;
        heap.push(Segment {
            lower: w[0],
            upper: w[1],
            value,
            error,
        });
    }

    let target = |total: T| tol.absolute.max(tol.relative * total.magnitude());
    while total_err > target(total) {
        if heap.len() + retired.len() >= tol.max_intervals {
            return Err(Error::NumericalFailure {
                context: context.to_string(),
                estimate: total_err,
                target: target(total),
            });
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.lower + seg.upper);
        let width = seg.upper - seg.lower;
        if width <= 1e-14 * seg.lower.abs().max(seg.upper.abs()).max(1e-300) || mid == seg.lower
        {
            retired.push(seg);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = kronrod15(&f, seg.lower, mid);
        let (v2, e2) = kronrod15(&f, mid, seg.upper);
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            lower: seg.lower,
            upper: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            lower: mid,
            upper: seg.upper,
            value: v2,
            error: e2,
        });
    }

    // Re-sum for a clean total free of accumulated cancellation.
    let mut segments: Vec<Segment<T>> = heap.into_vec();
    segments.extend(retired);
    segments.sort_by(|x, y| x.lower.total_cmp(&y.lower));
    let mut value = T::zero();
    let mut error = 0.0;
    for s in &segments {
        value = value + s.value;
        error += s.error;
    }
    if error > target(value) * 10.0 {
        return Err(Error::NumericalFailure {
            context: context.to_string(),
            estimate: error,
            target: target(value),
        });
    }
    Ok(Estimate {
        value: value.scale(sign),
        error,
        partition: segments.iter().map(|s| (s.lower, s.upper)).collect(),
    })
}

const PANEL_ORDER: usize = 16;

fn reference_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = GaussLegendre::new(PANEL_ORDER).expect("order >= 2");
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        pairs
    })
}

/// Composite Gauss-Legendre nodes and weights on a set of panels.
#[derive(Debug, Clone, Default)]
pub struct PanelNodes {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelNodes {
    /// Places a 16-point Gauss-Legendre rule on every panel.
    pub fn from_panels(panels: &[(f64, f64)]) -> Self {
        let rule = reference_rule();
        let mut nodes = Vec::with_capacity(panels.len() * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels.len() * PANEL_ORDER);
        for &(a, b) in panels {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for &(x, w) in rule {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sum<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Recipe for a panel partition of one energy interval.
#[derive(Debug, Clone)]
pub struct PanelPlan {
    /// Largest panel width anywhere.
    pub max_width: f64,
    /// Endpoints toward which panels are refined geometrically, for
    /// integrands with algebraic endpoint behaviour.
    pub graded_points: Vec<f64>,
    /// Interior points that must be panel boundaries.
    pub breakpoints: Vec<f64>,
    /// Windows `(lower, upper, width)` with a tighter width cap.
    pub windows: Vec<(f64, f64, f64)>,
}

const GRADING_RATIO: f64 = 0.15;
const GRADING_DEPTH: f64 = 1e-14;

impl PanelPlan {
    pub fn new(max_width: f64) -> Self {
        Self {
            max_width,
            graded_points: Vec::new(),
            breakpoints: Vec::new(),
            windows: Vec::new(),
        }
    }

    fn width_cap(&self, x: f64) -> f64 {
        self.windows
            .iter()
            .filter(|(lo, hi, _)| x >= *lo && x <= *hi)
            .map(|w| w.2)
            .fold(self.max_width, f64::min)
    }

    /// Partitions `[a, b]` into panels according to the plan.
    pub fn panels(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut cuts = vec![a, b];
        for &x in self.breakpoints.iter().chain(&self.graded_points) {
            if x > a && x < b {
                cuts.push(x);
            }
        }
        for &(lo, hi, _) in &self.windows {
            for x in [lo, hi] {
                if x > a && x < b {
                    cuts.push(x);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let is_graded = |x: f64| {
            self.graded_points
                .iter()
                .any(|g| (g - x).abs() <= 1e-15 * x.abs().max(1.0))
        };
        let mut panels = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let len = hi - lo;
            let grade_lo = is_graded(lo);
            let grade_hi = is_graded(hi);
            let mut inner_lo = lo;
            let mut inner_hi = hi;
            let reach = |capped: f64| capped.min(if grade_lo && grade_hi { len / 3.0 } else { len / 2.0 });
            if grade_lo {
                let h = reach(self.width_cap(lo));
                panels.extend(geometric(lo, h, 1.0));
                inner_lo = lo + h;
            }
            if grade_hi {
                let h = reach(self.width_cap(hi));
                panels.extend(geometric(hi, h, -1.0));
                inner_hi = hi - h;
            }
            if inner_hi > inner_lo {
                let cap = self.width_cap(0.5 * (inner_lo + inner_hi)).min(
                    self.width_cap(inner_lo).min(self.width_cap(inner_hi)),
                );
                let count = ((inner_hi - inner_lo) / cap).ceil().max(1.0) as usize;
                let step = (inner_hi - inner_lo) / count as f64;
                for i in 0..count {
                    let p0 = inner_lo + step * i as f64;
                    let p1 = if i + 1 == count { inner_hi } else { p0 + step };
                    panels.push((p0, p1));
                }
            }
        }
        panels.sort_by(|x, y| x.0.total_cmp(&y.0));
        panels
    }
}

/// Panels `[edge + dir*h*q^(k+1), edge + dir*h*q^k]`, down to a depth
/// where the remaining sliver is negligible.
fn geometric(edge: f64, h: f64, dir: f64) -> Vec<(f64, f64)> {
    let levels = (GRADING_DEPTH.ln() / GRADING_RATIO.ln()).ceil() as i32;
    let mut out = Vec::with_capacity(levels as usize + 1);
    let mut outer = h;
    for _ in 0..levels {
        let inner = outer * GRADING_RATIO;
        let (p, q) = (edge + dir * inner, edge + dir * outer);
        out.push(if p < q { (p, q) } else { (q, p) });
        outer = inner;
    }
    let (p, q) = (edge, edge + dir * outer);
    out.push(if p < q { (p, q) } else { (q, p) });
    out
}
