//! Minimal angular variance over a fixed coefficient support.
//!
//! A support set decomposes into maximal arithmetic progressions ("threads")
//! with step L. The correlation sum_k c_{k-L} conj(c_k) is then a
//! block-tridiagonal quadratic form whose per-thread blocks are tridiagonal
//! Toeplitz matrices with zero diagonal and halves beside it, so the best
//! achievable correlation is cos(pi/(m0+2)) where m0+1 is the longest thread
//! length, and the minimal angular variance is tan^2(pi/(m0+2)).

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{CoeffMap, Direction, FixedState, LatticeIndex};
use crate::numeric::{KahanSum, SplitMix64};

/// A finite set of lattice points eligible to carry nonzero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    dim: usize,
    points: Vec<LatticeIndex>,
}

impl SupportSet {
    /// Deduplicates while preserving first-occurrence order.
    pub fn new(dim: usize, points: Vec<LatticeIndex>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("support set must be nonempty"));
        }
        let mut seen: HashSet<LatticeIndex, FixedState> = HashSet::default();
        let mut out = Vec::with_capacity(points.len());
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(p.dim(), dim));
            }
            if seen.insert(p.clone()) {
                out.push(p);
            }
        }
        Ok(Self { dim, points: out })
    }

    /// The box prod [-N_j, N_j].
    pub fn cube(n: &LatticeIndex) -> Result<Self> {
        if n.coords.iter().any(|&x| x < 0) {
            return Err(Error::invalid("box bounds must be nonnegative"));
        }
        let d = n.dim();
        let mut points = Vec::new();
        let mut k = vec![0i64; d];
        scan(&n.coords, &mut k, 0, &mut |k| points.push(LatticeIndex::from(k)));
        Self::new(d, points)
    }

    /// Axis cross: all multiples t e_j with |t| <= N_j.
    pub fn cross(n: &LatticeIndex) -> Result<Self> {
        let d = n.dim();
        let mut points = vec![LatticeIndex::zero(d)];
        for axis in 0..d {
            for t in 1..=n.coords[axis] {
                points.push(LatticeIndex::unit(d, axis).scaled(t));
                points.push(LatticeIndex::unit(d, axis).scaled(-t));
            }
        }
        Self::new(d, points)
    }

    /// The segment k0 + m L for m = 0..=m_max.
    pub fn line(k0: &LatticeIndex, l: &Direction, m_max: u32) -> Result<Self> {
        if k0.dim() != l.dim() {
            return Err(Error::DimensionMismatch(k0.dim(), l.dim()));
        }
        let points = (0..=m_max as i64)
            .map(|m| k0.add(&l.as_index().scaled(m).coords))
            .collect();
        Self::new(k0.dim(), points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticeIndex] {
        &self.points
    }
}

fn scan(bounds: &[i64], k: &mut Vec<i64>, axis: usize, f: &mut impl FnMut(&[i64])) {
    if axis == bounds.len() {
        f(k);
        return;
    }
    for v in -bounds[axis]..=bounds[axis] {
        k[axis] = v;
        scan(bounds, k, axis + 1, f);
    }
}

/// A maximal arithmetic progression with step L inside a support set.
#[derive(Debug, Clone, PartialEq)]
pub struct Thread {
    /// First element; start - L is outside the support.
    pub start: LatticeIndex,
    /// start, start + L, ..., start + m L in order.
    pub points: Vec<LatticeIndex>,
}

impl Thread {
    #[allow(clippy::len_without_is_empty)] // threads are nonempty by construction
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// m = number of steps; the thread has m + 1 points.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// Partitions a support set into maximal threads with step L, sorted by
/// decreasing length with lexicographic tie-break on the start point.
pub fn thread_decompose(s: &SupportSet, l: &Direction) -> Result<Vec<Thread>> {
    if s.dim() != l.dim() {
        return Err(Error::DimensionMismatch(s.dim(), l.dim()));
    }
    let set: HashSet<&LatticeIndex, FixedState> = s.points().iter().collect();
    let mut threads = Vec::new();
    for p in s.points() {
        if set.contains(&p.sub(l.coords())) {
            continue; // not a thread start
        }
        let mut points = vec![p.clone()];
        let mut cur = p.add(l.coords());
        while set.contains(&cur) {
            let next = cur.add(l.coords());
            points.push(cur);
            cur = next;
        }
        threads.push(Thread { start: p.clone(), points });
    }
    threads.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then_with(|| a.start.cmp(&b.start))
    });
    debug_assert_eq!(threads.iter().map(Thread::len).sum::<usize>(), s.len());
    Ok(threads)
}

/// Analytic eigenpairs of the (m+1) x (m+1) tridiagonal Toeplitz matrix with
/// zero diagonal and 1/2 on the sub- and super-diagonal: eigenvalues
/// cos(pi n/(m+2)) in descending order with unnormalized eigenvectors
/// v_j = sin(pi n j/(m+2)).
pub fn toeplitz_eigenpairs(m: usize) -> Vec<(f64, Vec<f64>)> {
    let size = m + 1;
    let denom = (m + 2) as f64;
    (1..=size)
        .map(|n| {
            let lambda = (PI * n as f64 / denom).cos();
            let v = (1..=size).map(|j| (PI * (n * j) as f64 / denom).sin()).collect();
            (lambda, v)
        })
        .collect()
}

/// The polynomial attaining the minimal angular variance on a support.
#[derive(Debug, Clone)]
pub struct MinVarSolution {
    pub polynomial: CoeffMap,
    /// tan^2(pi/(m0+2)).
    pub var_angular: f64,
    /// Longest thread has m0 + 1 points.
    pub m0: usize,
    /// m0 (m0+4)/12 tan^2(pi/(m0+2)) - 1/2.
    pub up: f64,
}

/// Minimal directional angular variance over polynomials supported in `s`.
///
/// The minimizer places the sine profile sin(pi j/(m0+2)) on the longest
/// thread. By default the coefficients are kept unnormalized (squared norm
/// (m0+2)/2); pass `normalize` to get a unit-norm polynomial.
pub fn min_var_directional(
    s: &SupportSet,
    l: &Direction,
    normalize: bool,
) -> Result<MinVarSolution> {
    let threads = thread_decompose(s, l)?;
    let longest = &threads[0];
    let m0 = longest.steps();
    if m0 == 0 {
        return Err(Error::InfiniteVariance);
    }
    let denom = (m0 + 2) as f64;
    let scale = if normalize { (2.0 / denom).sqrt() } else { 1.0 };
    let mut poly = CoeffMap::with_capacity(s.dim(), m0 + 1);
    for (j, point) in longest.points.iter().enumerate() {
        let c = (PI * (j + 1) as f64 / denom).sin() * scale;
        poly.set(point.clone(), Complex64::new(c, 0.0))?;
    }
    let t = (PI / denom).tan();
    let var_angular = t * t;
    let up = m0 as f64 * (m0 as f64 + 4.0) / 12.0 * var_angular - 0.5;
    Ok(MinVarSolution { polynomial: poly, var_angular, m0, up })
}

/// Minimal Goh-Goodman angular variance over the box prod [-N_j, N_j]:
/// the tensor-product sine polynomial and the variance
/// (d - sum cos^2(pi/(2N_j+2))) / (sum cos(pi/(2N_j+2)))^2.
///
/// The returned polynomial has unit norm and attains the per-axis
/// correlations cos(pi/(2N_j+2)) on every axis simultaneously.
pub fn min_var_gg_rect(n: &LatticeIndex) -> Result<(CoeffMap, f64)> {
    if n.coords.iter().any(|&x| x < 1) {
        return Err(Error::invalid("box bounds must be positive componentwise"));
    }
    let d = n.dim();
    let count: usize = n.coords.iter().map(|&x| (2 * x + 1) as usize).product();
    let mut map = CoeffMap::with_capacity(d, count);
    let mut k = vec![0i64; d];
    let mut emit = |k: &[i64]| {
        let mut c = 1.0f64;
        for (&kj, &nj) in k.iter().zip(&n.coords) {
            let lj = (kj + nj + 1) as f64;
            c *= (PI * lj / (2.0 * nj as f64 + 2.0)).sin() / ((nj + 1) as f64).sqrt();
        }
        map.set(LatticeIndex::from(k), Complex64::new(c, 0.0)).unwrap();
    };
    scan(&n.coords, &mut k, 0, &mut emit);

    let mut cos_sum = KahanSum::new();
    let mut cos_sq_sum = KahanSum::new();
    for &nj in &n.coords {
        let c = (PI / (2.0 * nj as f64 + 2.0)).cos();
        cos_sum.add(c);
        cos_sq_sum.add(c * c);
    }
    let var = (d as f64 - cos_sq_sum.value()) / (cos_sum.value() * cos_sum.value());
    Ok((map, var))
}

/// Best correlation found by repeated projected gradient ascent on the real
/// Rayleigh quotient of the thread adjacency form, from `restarts` random
/// unit starts. Verification oracle for the analytic maximum cos(pi/(m0+2)),
/// not a production solver; deterministic for a fixed seed.
pub fn rayleigh_max_search(
    s: &SupportSet,
    l: &Direction,
    restarts: u32,
    seed: u64,
) -> Result<f64> {
    if s.dim() != l.dim() {
        return Err(Error::DimensionMismatch(s.dim(), l.dim()));
    }
    let n = s.len();
    let mut index: std::collections::HashMap<&LatticeIndex, usize, FixedState> =
        std::collections::HashMap::default();
    for (i, p) in s.points().iter().enumerate() {
        index.insert(p, i);
    }
    // adjacency pairs (i, j) with point_j = point_i + L
    let mut pairs = Vec::new();
    for (i, p) in s.points().iter().enumerate() {
        if let Some(&j) = index.get(&p.add(l.coords())) {
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        return Ok(0.0);
    }

    let quot = |c: &[f64], mc: &mut [f64]| -> f64 {
        mc.iter_mut().for_each(|x| *x = 0.0);
        let mut r = 0.0;
        for &(i, j) in &pairs {
            r += c[i] * c[j];
            mc[i] += 0.5 * c[j];
            mc[j] += 0.5 * c[i];
        }
        r
    };

    let mut rng = SplitMix64::new(seed);
    let mut best = 0.0f64;
    let mut c = vec![0.0f64; n];
    let mut mc = vec![0.0f64; n];
    for _ in 0..restarts {
        for x in c.iter_mut() {
            *x = rng.next_normal();
        }
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.iter_mut().for_each(|x| *x /= norm);
        let mut r_prev = quot(&c, &mut mc);
        for _ in 0..200 {
            // gradient step of size 1/(2(1+R)) followed by reprojection,
            // i.e. c <- normalize(Mc + c); the spectrum sits in [-1, 1] so
            // the ascent is monotone
            for i in 0..n {
                c[i] += mc[i];
            }
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            c.iter_mut().for_each(|x| *x /= norm);
            let r = quot(&c, &mut mc);
            if (r - r_prev).abs() < 1e-13 {
                r_prev = r;
                break;
            }
            r_prev = r;
        }
        best = best.max(r_prev.abs());
    }
    Ok(best)
}
