//! Generators for the explicit coefficient families used as localization
//! benchmarks: rectangular Dirichlet and cube Fejer kernels, powers of the
//! raised cosine, their rank-one perturbations, and the classical kernels
//! placed along an arbitrary lattice direction.
//!
//! Every family here is real, even and nonnegative in coefficient space, so
//! frequency means vanish identically.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{CoeffMap, Direction, LatticeIndex};

/// Rectangular Dirichlet kernel: c_k = 1 on the box -N <= k <= N.
pub fn dirichlet_rect(n: &LatticeIndex) -> Result<CoeffMap> {
    if n.coords.iter().any(|&x| x < 1) {
        return Err(Error::invalid("Dirichlet size must be positive componentwise"));
    }
    let d = n.dim();
    let count: usize = n.coords.iter().map(|&x| (2 * x + 1) as usize).product();
    let mut map = CoeffMap::with_capacity(d, count);
    let mut k = vec![0i64; d];
    box_scan(&n.coords, &mut k, &mut |k| {
        map.set(LatticeIndex::from(k), Complex64::ONE).unwrap();
    });
    Ok(map)
}

/// Cube Fejer kernel: c_k = 1 - ||k||_inf / n on ||k||_inf < n.
/// Support size is (2n - 1)^d.
pub fn fejer_inf(n: u32, d: usize) -> Result<CoeffMap> {
    if n < 1 {
        return Err(Error::invalid("Fejer order must be >= 1"));
    }
    if d < 1 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    let r = n as i64 - 1;
    let count = (2 * r + 1).pow(d as u32) as usize;
    let mut map = CoeffMap::with_capacity(d, count);
    let bounds = vec![r; d];
    let mut k = vec![0i64; d];
    box_scan(&bounds, &mut k, &mut |k| {
        let inf = k.iter().map(|x| x.abs()).max().unwrap_or(0);
        let w = 1.0 - inf as f64 / n as f64;
        map.set(LatticeIndex::from(k), Complex64::new(w, 0.0)).unwrap();
    });
    Ok(map)
}

/// (1 + cos 2 pi <L, x>)^n. The coefficients sit on the line m L with
/// c_{mL} = C(2n, n+m) / 2^n, evaluated by the outward ratio recurrence from
/// the central value (2n-1)!!/n! so that no intermediate overflows.
pub fn powered_cos(n: u32, l: &Direction) -> Result<CoeffMap> {
    if n < 1 {
        return Err(Error::invalid("powered cosine requires n >= 1"));
    }
    let weights = powered_cos_weights(n);
    let mut map = CoeffMap::with_capacity(l.dim(), 2 * n as usize + 1);
    for (m, &w) in (-(n as i64)..=n as i64).zip(&weights) {
        map.set(l.as_index().scaled(m), Complex64::new(w, 0.0))?;
    }
    Ok(map)
}

/// Weights C(2n, n+m)/2^n for m = -n..=n.
fn powered_cos_weights(n: u32) -> Vec<f64> {
    let n = n as i64;
    // central coefficient C(2n,n)/2^n = (2n-1)!!/n! = prod (2i-1)/i
    let mut center = 1.0f64;
    for i in 1..=n {
        center *= (2 * i - 1) as f64 / i as f64;
    }
    let mut half = vec![0.0f64; n as usize + 1];
    half[0] = center;
    for m in 1..=n {
        half[m as usize] = half[m as usize - 1] * (n - m + 1) as f64 / (n + m) as f64;
    }
    let mut weights = Vec::with_capacity(2 * n as usize + 1);
    for m in -n..=n {
        weights.push(half[m.unsigned_abs() as usize]);
    }
    weights
}

/// p~_n = (1 + cos 2 pi <L, x>)^n + 2 cos 2 pi x_1. Requires L not collinear
/// with e_1.
pub fn perturbed_p(n: u32, l: &Direction) -> Result<CoeffMap> {
    let d = l.dim();
    if is_collinear_with_axis(l, 0) {
        return Err(Error::invalid(
            "perturbed_p requires L not collinear with e_1",
        ));
    }
    let mut map = powered_cos(n, l)?;
    map.accumulate(LatticeIndex::unit(d, 0), Complex64::ONE)?;
    map.accumulate(LatticeIndex::unit(d, 0).scaled(-1), Complex64::ONE)?;
    Ok(map)
}

/// t~_n = (1 + cos 2 pi x_1)^n + 2 cos 2 pi <L, x>. Requires |L_j| > 1 for
/// every j (which also rules out collinearity with any axis).
pub fn perturbed_t(n: u32, l: &Direction) -> Result<CoeffMap> {
    let d = l.dim();
    for axis in 0..d {
        if is_collinear_with_axis(l, axis) {
            return Err(Error::invalid(format!(
                "perturbed_t requires L not collinear with e_{}",
                axis + 1
            )));
        }
    }
    if l.coords().iter().any(|&c| c.abs() <= 1) {
        return Err(Error::invalid(
            "perturbed_t requires |L_j| > 1 for every component",
        ));
    }
    let e1 = Direction::new(LatticeIndex::unit(d, 0).coords)?;
    let mut map = powered_cos(n, &e1)?;
    map.accumulate(l.as_index().clone(), Complex64::ONE)?;
    map.accumulate(l.as_index().scaled(-1), Complex64::ONE)?;
    Ok(map)
}

/// Dirichlet kernel placed along L: unit entries at k0 + m L, |m| <= n.
/// k0 defaults to the origin; the uncertainty product does not depend on it.
pub fn dirichlet_along(n: u32, l: &Direction, k0: Option<&LatticeIndex>) -> Result<CoeffMap> {
    line_kernel(n, l, k0, |_, _| 1.0)
}

/// Fejer kernel placed along L: entries 1 - |m|/n at k0 + m L.
pub fn fejer_along(n: u32, l: &Direction, k0: Option<&LatticeIndex>) -> Result<CoeffMap> {
    line_kernel(n, l, k0, |m, n| 1.0 - m.unsigned_abs() as f64 / n as f64)
}

fn line_kernel(
    n: u32,
    l: &Direction,
    k0: Option<&LatticeIndex>,
    weight: impl Fn(i64, u32) -> f64,
) -> Result<CoeffMap> {
    if n < 1 {
        return Err(Error::invalid("directional kernel requires n >= 1"));
    }
    let d = l.dim();
    let origin = LatticeIndex::zero(d);
    let k0 = k0.unwrap_or(&origin);
    if k0.dim() != d {
        return Err(Error::DimensionMismatch(k0.dim(), d));
    }
    let mut map = CoeffMap::with_capacity(d, 2 * n as usize + 1);
    for m in -(n as i64)..=n as i64 {
        let w = weight(m, n);
        map.set(k0.add(&l.as_index().scaled(m).coords), Complex64::new(w, 0.0))?;
    }
    Ok(map)
}

fn is_collinear_with_axis(l: &Direction, axis: usize) -> bool {
    l.coords()
        .iter()
        .enumerate()
        .all(|(i, &c)| i == axis || c == 0)
}

/// Row-major scan of the box prod [-b_j, b_j].
fn box_scan(bounds: &[i64], k: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    fn rec(bounds: &[i64], k: &mut Vec<i64>, axis: usize, f: &mut impl FnMut(&[i64])) {
        if axis == bounds.len() {
            f(k);
            return;
        }
        for v in -bounds[axis]..=bounds[axis] {
            k[axis] = v;
            rec(bounds, k, axis + 1, f);
        }
    }
    rec(bounds, k, 0, f);
}
