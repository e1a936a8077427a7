//! Power cells of Legendre duals in `a` (rank 1 or 2) and quadrature of
//! `exp(-affine) * K` over them, where `K(x) = prod ((1 - e^{-2 alpha(x)})/2)^2`.

use alloc::vec;
use alloc::vec::Vec;

pub type Point2 = [f64; 2];

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Adaptive rule for `int exp(-e(x)) K(x) dx` with `e` affine and `e >= 0`
/// expected on the region.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpQuad {
    pub order: usize,
    /// Largest panel width / triangle diameter.
    pub max_width: f64,
    /// Largest variation of the exponent over one panel.
    pub max_spread: f64,
    /// Panels whose smallest exponent exceeds this are dropped.
    pub cutoff: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ExpQuad {
    pub fn new(order: usize, max_width: f64, max_spread: f64, cutoff: f64) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        ExpQuad { order, max_width, max_spread, cutoff, nodes, weights }
    }
}

impl Default for ExpQuad {
    fn default() -> Self {
        ExpQuad::new(10, 1.0, 2.0, 60.0)
    }
}

/// A convex region of `a`: an interval or a polygon (counterclockwise).
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Interval(f64, f64),
    Polygon(Vec<Point2>),
    Empty,
}

impl Region {
    pub fn is_empty(&self) -> bool {
        match self {
            Region::Interval(a, b) => b <= a,
            Region::Polygon(p) => p.len() < 3 || polygon_area(p) <= 0.0,
            Region::Empty => true,
        }
    }

    /// Keeps `{x : <a, x> <= b}`.
    pub fn clip(&self, a: &[f64], b: f64) -> Region {
        match self {
            Region::Empty => Region::Empty,
            Region::Interval(lo, hi) => {
                let (mut lo, mut hi) = (*lo, *hi);
                if a[0] > 0.0 {
                    hi = hi.min(b / a[0]);
                } else if a[0] < 0.0 {
                    lo = lo.max(b / a[0]);
                } else if b < 0.0 {
                    return Region::Empty;
                }
                if hi <= lo {
                    Region::Empty
                } else {
                    Region::Interval(lo, hi)
                }
            }
            Region::Polygon(p) => {
                let q = clip_polygon(p, [a[0], a[1]], b);
                if q.len() < 3 {
                    Region::Empty
                } else {
                    Region::Polygon(q)
                }
            }
        }
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Region::Empty => Vec::new(),
            Region::Interval(a, b) => vec![vec![*a], vec![*b]],
            Region::Polygon(p) => p.iter().map(|v| v.to_vec()).collect(),
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Region::Empty => 0.0,
            Region::Interval(a, b) => (b - a).max(0.0),
            Region::Polygon(p) => polygon_area(p),
        }
    }
}

pub fn polygon_area(p: &[Point2]) -> f64 {
    let n = p.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (p[i], p[(i + 1) % n]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

/// Sutherland–Hodgman step against `<a, x> <= b`.
pub fn clip_polygon(p: &[Point2], a: Point2, b: f64) -> Vec<Point2> {
    let n = p.len();
    let mut out = Vec::with_capacity(n + 1);
    let f = |x: &Point2| a[0] * x[0] + a[1] * x[1] - b;
    for i in 0..n {
        let cur = p[i];
        let next = p[(i + 1) % n];
        let (fc, fn_) = (f(&cur), f(&next));
        if fc <= 0.0 {
            out.push(cur);
        }
        if (fc < 0.0 && fn_ > 0.0) || (fc > 0.0 && fn_ < 0.0) {
            let t = fc / (fc - fn_);
            out.push([cur[0] + t * (next[0] - cur[0]), cur[1] + t * (next[1] - cur[1])]);
        }
    }
    out
}

/// `[-radius, radius]^r` intersected with `{<alpha, x> >= 0}`.
pub fn base_region(rank: usize, radius: f64, simple_roots: &[Vec<f64>]) -> Region {
    let mut region = match rank {
        1 => Region::Interval(-radius, radius),
        _ => Region::Polygon(vec![[-radius, -radius], [radius, -radius], [radius, radius], [-radius, radius]]),
    };
    for a in simple_roots {
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        region = region.clip(&neg, 0.0);
    }
    region
}

/// Cell of site `j` for `max_k (<x, y_k> - h_k)` inside `base`; ties with an
/// identical site go to the lower index.
pub fn power_cell(base: &Region, sites: &[Vec<f64>], heights: &[f64], j: usize) -> Region {
    let mut cell = base.clone();
    for (k, (yk, hk)) in sites.iter().zip(heights).enumerate() {
        if k == j {
            continue;
        }
        let a: Vec<f64> = yk.iter().zip(&sites[j]).map(|(p, q)| p - q).collect();
        let b = hk - heights[j];
        if a.iter().all(|v| *v == 0.0) {
            if b < 0.0 || (b == 0.0 && k < j) {
                return Region::Empty;
            }
            continue;
        }
        cell = cell.clip(&a, b);
        if cell.is_empty() {
            return Region::Empty;
        }
    }
    cell
}

/// All cells of `max_k (x y_k - h_k)` on a line at once, from the lower
/// hull of `(y_k, h_k)`; agrees with [`power_cell`] for each index.
pub fn interval_cells(base: &Region, sites: &[Vec<f64>], heights: &[f64]) -> Vec<Region> {
    let mut out = vec![Region::Empty; sites.len()];
    let Region::Interval(lo, hi) = *base else {
        return out;
    };
    let mut idx: Vec<usize> = (0..sites.len()).collect();
    idx.sort_by(|&a, &b| {
        sites[a][0]
            .partial_cmp(&sites[b][0])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(heights[a].partial_cmp(&heights[b]).unwrap_or(core::cmp::Ordering::Equal))
            .then(a.cmp(&b))
    });
    idx.dedup_by(|b, a| sites[*a][0] == sites[*b][0]);
    let cross = |o: usize, a: usize, b: usize| {
        (sites[a][0] - sites[o][0]) * (heights[b] - heights[o]) - (heights[a] - heights[o]) * (sites[b][0] - sites[o][0])
    };
    let mut chain: Vec<usize> = Vec::new();
    for &p in &idx {
        while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0 {
            chain.pop();
        }
        chain.push(p);
    }
    let slope = |a: usize, b: usize| (heights[b] - heights[a]) / (sites[b][0] - sites[a][0]);
    for (i, &c) in chain.iter().enumerate() {
        let left = if i == 0 { lo } else { slope(chain[i - 1], c).max(lo) };
        let right = if i + 1 == chain.len() { hi } else { slope(c, chain[i + 1]).min(hi) };
        if right > left {
            out[c] = Region::Interval(left, right);
        }
    }
    out
}

/// `K(x) = prod_{alpha in Phi+} ((1 - e^{-2 alpha(x)}) / 2)^2`.
pub fn kernel(x: &[f64], positive_roots: &[Vec<f64>]) -> f64 {
    positive_roots.iter().fold(1.0, |acc, a| {
        let t: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
        let f = 0.5 * (-libm::expm1(-2.0 * t));
        acc * f * f
    })
}

fn affine(slope: &[f64], offset: f64, x: &[f64]) -> f64 {
    slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + offset
}

/// Smallest value of an affine function over the region's vertices.
pub fn region_min(region: &Region, slope: &[f64], offset: f64) -> Option<f64> {
    region
        .vertices()
        .iter()
        .map(|v| affine(slope, offset, v))
        .reduce(f64::min)
}

/// `int_region exp(-(<slope, x> + offset)) K(x) dx`.
pub fn integrate_exp(region: &Region, slope: &[f64], offset: f64, roots: &[Vec<f64>], q: &ExpQuad) -> f64 {
    match region {
        Region::Empty => 0.0,
        Region::Interval(a, b) => interval_exp(*a, *b, slope[0], offset, roots, q, 0),
        Region::Polygon(p) => {
            let mut total = 0.0;
            for i in 1..p.len().saturating_sub(1) {
                total += triangle_exp([p[0], p[i], p[i + 1]], slope, offset, roots, q, 0);
            }
            total
        }
    }
}

fn interval_exp(a: f64, b: f64, s: f64, c: f64, roots: &[Vec<f64>], q: &ExpQuad, depth: u32) -> f64 {
    let (ea, eb) = (s * a + c, s * b + c);
    let (lo, hi) = (ea.min(eb), ea.max(eb));
    if lo > q.cutoff {
        return 0.0;
    }
    if depth < 40 && (b - a > q.max_width || hi - lo > q.max_spread) {
        let m = 0.5 * (a + b);
        return interval_exp(a, m, s, c, roots, q, depth + 1) + interval_exp(m, b, s, c, roots, q, depth + 1);
    }
    let h = b - a;
    let mut sum = 0.0;
    for (t, w) in q.nodes.iter().zip(&q.weights) {
        let x = a + h * t;
        sum += w * libm::exp(-(s * x + c)) * kernel(&[x], roots);
    }
    sum * h
}

fn triangle_exp(t: [Point2; 3], s: &[f64], c: f64, roots: &[Vec<f64>], q: &ExpQuad, depth: u32) -> f64 {
    let e: Vec<f64> = t.iter().map(|p| s[0] * p[0] + s[1] * p[1] + c).collect();
    let lo = e.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo > q.cutoff {
        return 0.0;
    }
    let d = |p: Point2, r: Point2| libm::hypot(p[0] - r[0], p[1] - r[1]);
    let diam = d(t[0], t[1]).max(d(t[1], t[2])).max(d(t[0], t[2]));
    if depth < 30 && (diam > q.max_width || hi - lo > q.max_spread) {
        let mid = |p: Point2, r: Point2| [0.5 * (p[0] + r[0]), 0.5 * (p[1] + r[1])];
        let (m01, m12, m02) = (mid(t[0], t[1]), mid(t[1], t[2]), mid(t[0], t[2]));
        return triangle_exp([t[0], m01, m02], s, c, roots, q, depth + 1)
            + triangle_exp([m01, t[1], m12], s, c, roots, q, depth + 1)
            + triangle_exp([m02, m12, t[2]], s, c, roots, q, depth + 1)
            + triangle_exp([m01, m12, m02], s, c, roots, q, depth + 1);
    }
    let e1 = [t[1][0] - t[0][0], t[1][1] - t[0][1]];
    let e2 = [t[2][0] - t[0][0], t[2][1] - t[0][1]];
    let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let mut sum = 0.0;
    for (u, wu) in q.nodes.iter().zip(&q.weights) {
        for (v, wv) in q.nodes.iter().zip(&q.weights) {
            // collapsed square: (u, v) -> (u (1 - v), u v)
            let (a, b) = (u * (1.0 - v), u * v);
            let x = [t[0][0] + a * e1[0] + b * e2[0], t[0][1] + a * e1[1] + b * e2[1]];
            sum += wu * wv * u * libm::exp(-(s[0] * x[0] + s[1] * x[1] + c)) * kernel(&x, roots);
        }
    }
    sum * det
}

/// `K` as a finite sum `sum_k c_k exp(-<beta_k, x>)`.
pub fn kernel_terms(positive_roots: &[Vec<f64>], rank: usize) -> Vec<(Vec<f64>, f64)> {
    let mut terms: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; rank], 1.0)];
    for a in positive_roots {
        let mut next: Vec<(Vec<f64>, f64)> = Vec::new();
        for (beta, c) in &terms {
            for (k, f) in [(0.0, 0.25), (2.0, -0.5), (4.0, 0.25)] {
                let b: Vec<f64> = beta.iter().zip(a).map(|(p, q)| p + k * q).collect();
                match next.iter_mut().find(|(nb, _)| nb.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12)) {
                    Some(entry) => entry.1 += c * f,
                    None => next.push((b, c * f)),
                }
            }
        }
        next.retain(|(_, c)| *c != 0.0);
        terms = next;
    }
    terms
}

/// `(e^b - e^a) / (b - a)`
fn exp_dd2(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let d = hi - lo;
    if d < 1e-12 {
        libm::exp(lo) * (1.0 + 0.5 * d)
    } else {
        libm::exp(hi) * (-libm::expm1(-d)) / d
    }
}

/// Second divided difference of `exp` at three points.
fn exp_dd3(mut z: [f64; 3]) -> f64 {
    z.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let d = z[2] - z[0];
    if d < 1e-3 {
        // sum_k h_k(d1, d2) / (k + 2)!
        let (d1, d2) = (z[1] - z[0], z[2] - z[0]);
        let mut sum = 0.0;
        let mut fact = 2.0;
        for k in 0..6u32 {
            let h: f64 = (0..=k).map(|i| libm::pow(d1, i as f64) * libm::pow(d2, (k - i) as f64)).sum();
            sum += h / fact;
            fact *= (k + 3) as f64;
        }
        return libm::exp(z[0]) * sum;
    }
    (exp_dd2(z[1], z[2]) - exp_dd2(z[0], z[1])) / d
}

/// `int_region exp(-(<slope, x> + offset)) K(x) dx` in closed form, with
/// `K` given by [`kernel_terms`].
pub fn integrate_exp_exact(region: &Region, slope: &[f64], offset: f64, terms: &[(Vec<f64>, f64)]) -> f64 {
    let mut total = 0.0;
    for (beta, c) in terms {
        let s: Vec<f64> = slope.iter().zip(beta).map(|(p, q)| p + q).collect();
        let z = |x: &[f64]| -(affine(&s, offset, x));
        total += c * match region {
            Region::Empty => 0.0,
            Region::Interval(a, b) => (b - a) * exp_dd2(z(&[*a]), z(&[*b])),
            Region::Polygon(p) => {
                let mut acc = 0.0;
                for i in 1..p.len().saturating_sub(1) {
                    let t = [p[0], p[i], p[i + 1]];
                    let area = ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0])).abs();
                    acc += area * exp_dd3([z(&t[0]), z(&t[1]), z(&t[2])]);
                }
                acc
            }
        };
    }
    total
}

/// Convex hull (counterclockwise, collinear points dropped) by monotone chain.
pub fn convex_hull_2d(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point2, a: Point2, b: Point2| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// `min` over unit directions of the closed chamber `{<alpha, xi> >= 0}` of
/// `max_j <xi, v_j>`.
pub fn decay_rate(vectors: &[Vec<f64>], simple_roots: &[Vec<f64>], rank: usize) -> f64 {
    let in_chamber = |xi: &[f64]| {
        simple_roots
            .iter()
            .all(|a| a.iter().zip(xi).map(|(p, q)| p * q).sum::<f64>() >= -1e-12)
    };
    let support = |xi: &[f64]| {
        vectors
            .iter()
            .map(|v| v.iter().zip(xi).map(|(p, q)| p * q).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if rank == 1 {
        candidates.push(vec![1.0]);
        candidates.push(vec![-1.0]);
    } else {
        let pts: Vec<Point2> = vectors.iter().map(|v| [v[0], v[1]]).collect();
        let hull = convex_hull_2d(&pts);
        let n = hull.len();
        let mut push = |x: f64, y: f64| {
            let r = libm::hypot(x, y);
            if r > 0.0 {
                candidates.push(vec![x / r, y / r]);
            }
        };
        for i in 0..n {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            push(b[1] - a[1], a[0] - b[0]);
            push(-a[0], -a[1]);
        }
        for a in simple_roots {
            push(-a[1], a[0]);
            push(a[1], -a[0]);
        }
    }
    candidates
        .iter()
        .filter(|xi| in_chamber(xi))
        .map(|xi| support(xi))
        .fold(f64::INFINITY, f64::min)
}
