//! Numerical integration: adaptive Gauss–Kronrod (7/15) on finite and
//! infinite intervals, and Gauss–Hermite rules for expectations under a
//! normal law.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Kronrod abscissae on [0, 1], descending; odd indices are the Gauss nodes.
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
/// 7-point Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 20_000;

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub value: f64,
    /// Estimated absolute error (sum of |K15 - G7| over the final partition).
    pub abs_err: f64,
}

/// Requested accuracy: stop once `err <= max(abs, rel * |value|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-13, 1e-12)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive Gauss–Kronrod on a finite interval, bisecting the worst segment.
fn adaptive_finite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: Tolerance) -> Quad {
    if a == b {
        return Quad {
            value: 0.0,
            abs_err: 0.0,
        };
    }
    let mut heap = BinaryHeap::new();
    let (value, err) = gk15(f, a, b);
    heap.push(Segment { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    while total_err > tol.abs.max(tol.rel * total.abs()) && heap.len() < MAX_SEGMENTS {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(f, worst.a, mid);
        let (rv, re) = gk15(f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.err;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            err: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            err: re,
        });
    }
    // re-sum to shed the drift of the running updates
    let (value, abs_err) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err));
    Quad { value, abs_err }
}

/// Integral of `f` over `[a, b]`; either end may be infinite.
///
/// Half-infinite ranges are mapped to `[0, 1)` with `x = a + t / (1 - t)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Quad {
    integrate_dyn(&f, a, b, tol)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Quad {
    if a > b {
        let q = integrate_dyn(f, b, a, tol);
        return Quad {
            value: -q.value,
            abs_err: q.abs_err,
        };
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive_finite(&f, a, b, tol),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            };
            adaptive_finite(&g, 0.0, 1.0, tol)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(b - t / s) / (s * s)
            };
            adaptive_finite(&g, 0.0, 1.0, tol)
        }
        (false, false) => split_dyn(f, &[0.0], a, b, tol),
    }
}

/// Integral over `[a, b]` split at the given interior points (modes, kinks).
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Quad {
    split_dyn(&f, points, a, b, tol)
}

fn split_dyn(f: &dyn Fn(f64) -> f64, points: &[f64], a: f64, b: f64, tol: Tolerance) -> Quad {
    let mut cuts: Vec<f64> = points
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > a && *p < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let mut total = Quad {
        value: 0.0,
        abs_err: 0.0,
    };
    for w in edges.windows(2) {
        let q = integrate_dyn(f, w[0], w[1], tol);
        total.value += q.value;
        total.abs_err += q.abs_err;
    }
    total
}

/// Gauss–Hermite rule for the weight `exp(-u^2)` on the real line.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Orthonormal Hermite polynomial `p_n(z)` and `sqrt(2n) p_{n-1}(z)` (its
/// derivative), both divided by `exp(ln_scale)`.
fn hermite_scaled(n: usize, z: f64) -> (f64, f64, f64) {
    const BIG: f64 = 1e150;
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    let mut ln_scale = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > BIG {
            p1 /= BIG;
            p2 /= BIG;
            ln_scale += BIG.ln();
        }
    }
    (p1, (2.0 * n as f64).sqrt() * p2, ln_scale)
}

/// Node counts for which a rule is cached: 128, 256, 512, 1024.
pub const GH_LEVELS: [usize; 4] = [128, 256, 512, 1024];

impl GaussHermite {
    /// Nodes are the eigenvalues of the symmetric Jacobi matrix (zero
    /// diagonal, off-diagonal `sqrt(k / 2)`), isolated by Sturm-sequence
    /// bisection and polished by Newton on the orthonormal recurrence.
    /// The recurrence is rescaled on the fly so that nothing overflows for
    /// large `n`; weights are formed in log space.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Hermite needs at least two nodes");
        let off2: Vec<f64> = (1..n).map(|k| k as f64 / 2.0).collect();
        // number of eigenvalues strictly below x
        let count_below = |x: f64| {
            let mut q = -x;
            let mut count = usize::from(q < 0.0);
            for &e2 in &off2 {
                let prev = if q == 0.0 { f64::MIN_POSITIVE } else { q };
                q = -x - e2 / prev;
                count += usize::from(q < 0.0);
            }
            count
        };
        let bound = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
        let m = n.div_ceil(2);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..m {
            // i-th largest eigenvalue: count_below(x) <= n - 1 - i at the root
            let target = n - 1 - i;
            let (mut lo, mut hi) = (-bound, bound);
            while hi - lo > 1e-15 * hi.abs().max(1.0) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(mid) > target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let mut z = 0.5 * (lo + hi);
            let mut ln_pp = 0.0;
            for iter in 0..3 {
                let (p1, pp, ln_scale) = hermite_scaled(n, z);
                ln_pp = pp.abs().ln() + ln_scale;
                if iter < 2 {
                    z -= p1 / pp;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = (std::f64::consts::LN_2 - 2.0 * ln_pp).exp();
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            x[m - 1] = 0.0;
        }
        GaussHermite {
            nodes: x,
            weights: w,
        }
    }

    /// Shared rule for one of [`GH_LEVELS`].
    pub fn cached(level: usize) -> &'static GaussHermite {
        static RULES: [OnceLock<GaussHermite>; 4] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        RULES[level].get_or_init(|| GaussHermite::new(GH_LEVELS[level]))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[g(Z)]` for `Z ~ N(0, 1)`, via `z = sqrt(2) u`.
    pub fn expect_std_normal<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * g(std::f64::consts::SQRT_2 * u))
            .sum();
        s / PI.sqrt()
    }
}

/// `E[g(Z)]`, `Z ~ N(0,1)`, doubling the Gauss–Hermite rule from 128 nodes
/// until two successive rules agree to `1e-10`. Returns the finest estimate
/// and the last successive difference.
pub fn normal_expectation<F: Fn(f64) -> f64>(g: F) -> (f64, f64) {
    let mut prev = GaussHermite::cached(0).expect_std_normal(&g);
    let mut diff = f64::INFINITY;
    for level in 1..GH_LEVELS.len() {
        let next = GaussHermite::cached(level).expect_std_normal(&g);
        diff = (next - prev).abs();
        prev = next;
        if diff < 1e-10 {
            break;
        }
    }
    (prev, diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_for_polynomials() {
        // K15 integrates degree 22 exactly, G7 degree 13
        for deg in 0..=22 {
            let (v, _) = gk15(&|x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v - exact).abs() < 1e-15, "deg={deg}");
        }
        let (_, e) = gk15(&|x: f64| x.powi(13), -1.0, 1.0);
        assert!(e < 1e-15);
    }

    #[test]
    fn infinite_ranges() {
        let tol = Tolerance::default();
        let q = integrate(
            |x: f64| (-x * x).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            tol,
        );
        assert!((q.value - PI.sqrt()).abs() < 1e-13);
        let q = integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, tol);
        assert!((q.value - 1.0).abs() < 1e-13);
        let q = integrate(|x: f64| x.exp(), f64::NEG_INFINITY, 2.0, tol);
        assert!((q.value - 2f64.exp()).abs() < 1e-12);
        let q = integrate(|x: f64| x.exp(), 2.0, f64::NEG_INFINITY, tol);
        assert!((q.value + 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn kink_split() {
        let f = |x: f64| x.abs() * (-x * x / 2.0).exp();
        let q = integrate_split(f, &[0.0], -10.0, 10.0, Tolerance::default());
        let exact = 2.0 * (1.0 - (-50.0_f64).exp());
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn hermite_rules_reproduce_normal_moments() {
        for (level, &n) in GH_LEVELS.iter().enumerate() {
            let gh = GaussHermite::cached(level);
            assert_eq!(gh.len(), n);
            let total: f64 = gh.weights().iter().sum();
            assert!((total - PI.sqrt()).abs() < 1e-13, "n={}", gh.len());
            assert!(gh.nodes().windows(2).all(|w| w[0] > w[1]));
            let m2 = gh.expect_std_normal(|z| z * z);
            let m4 = gh.expect_std_normal(|z| z.powi(4));
            let m6 = gh.expect_std_normal(|z| z.powi(6));
            assert!((m2 - 1.0).abs() < 1e-13);
            assert!((m4 - 3.0).abs() < 1e-12);
            assert!((m6 - 15.0).abs() < 1e-11);
        }
    }

    #[test]
    fn normal_expectation_of_smooth_function() {
        // E[cos(Z)] = exp(-1/2)
        let (v, d) = normal_expectation(f64::cos);
        assert!((v - (-0.5f64).exp()).abs() < 1e-14);
        assert!(d < 1e-10);
    }
}
