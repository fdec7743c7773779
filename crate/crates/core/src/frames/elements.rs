//! Scaling and wavelet coefficient generators, their reference profiles, and
//! localization-limit sweeps.
//!
//! Stored maps carry the 2^{j/2}-rescaled coefficients (xi_hat for the
//! scaling side), which keeps deep levels inside f64 range; the uncertainty
//! product is scale-invariant so nothing downstream changes.

use num_complex::Complex64;

use super::context::FrameContext;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::{CoeffMap, Direction, LatticeIndex};
use crate::uncertainty::{up_directional, UpReport};

/// Truncated coefficient maps of one frame level.
#[derive(Debug, Clone)]
pub struct FrameElementCoeffs {
    pub level: u32,
    /// 2^{j/2} phi_hat_j = xi_hat_j on the truncation window.
    pub phi_hat: CoeffMap,
    /// 2^{j/2} psi_hat_j = lambda_{j+1} xi_hat_{j+1} / sqrt(2).
    pub psi_hat: CoeffMap,
    /// log2 of the true scale factor (-j/2).
    pub scale_log2: f64,
    /// Half-width of the cube window that was enumerated.
    pub window_radius: i64,
}

/// Envelope exp(-||L||^2 ||k||^2 / max(j+2, r_star(k))) that dominates both
/// the scaling and wavelet coefficients at level j.
fn envelope(ctx: &FrameContext, j: u32, k_norm_sq: f64) -> f64 {
    let denom = ctx.r_star(k_norm_sq).max(j + 2) as f64;
    (-ctx.l_norm_sq() * k_norm_sq / denom).exp()
}

/// Smallest cube radius whose outside has envelope < eps, plus one shell.
fn window_radius(ctx: &FrameContext, j: u32, eps: f64) -> i64 {
    let mut s: i64 = 1;
    loop {
        let n = (s * s) as f64;
        if envelope(ctx, j, n) < eps {
            return s + 1;
        }
        s += 1;
    }
}

fn cube_points(dim: usize, radius: i64, f: &mut impl FnMut(&[i64])) {
    fn rec(dim: usize, radius: i64, k: &mut Vec<i64>, axis: usize, f: &mut impl FnMut(&[i64])) {
        if axis == dim {
            f(k);
            return;
        }
        for v in -radius..=radius {
            k[axis] = v;
            rec(dim, radius, k, axis + 1, f);
        }
    }
    let mut k = vec![0i64; dim];
    rec(dim, radius, &mut k, 0, f);
}

/// Number of lattice points the level-j window enumeration will touch;
/// usable as a cheap pre-check against a point budget.
pub fn window_points_estimate(ctx: &FrameContext, j: u32, eps: f64) -> u64 {
    if !(0.0..1.0).contains(&eps) || eps <= 0.0 {
        return 0;
    }
    let radius = window_radius(ctx, j, eps);
    (2 * radius + 1).pow(ctx.dim() as u32) as u64
}

/// Builds the level-j scaling and wavelet coefficient maps, truncated where
/// the Gaussian envelope falls below eps (one extra shell kept as margin).
pub fn frame_element_coeffs(
    ctx: &FrameContext,
    j: u32,
    eps: f64,
    budget: &mut Budget,
) -> Result<FrameElementCoeffs> {
    if !(0.0..1.0).contains(&eps) || eps <= 0.0 {
        return Err(Error::invalid("truncation tolerance must lie in (0, 1)"));
    }
    let dim = ctx.dim();
    let radius = window_radius(ctx, j, eps);
    let count = (2 * radius + 1).pow(dim as u32) as u64;
    budget.charge(count)?;

    let mut phi = CoeffMap::with_capacity(dim, count as usize);
    let mut psi = CoeffMap::with_capacity(dim, count as usize);
    let mut err: Option<Error> = None;
    cube_points(dim, radius, &mut |k| {
        if err.is_some() {
            return;
        }
        let mut build = || -> Result<()> {
            let xi_j = ctx.xi_hat(j, k)?;
            if xi_j != 0.0 {
                phi.set(LatticeIndex::from(k), Complex64::new(xi_j, 0.0))?;
            }
            let xi_next = ctx.xi_hat(j + 1, k)?;
            if xi_next != 0.0 {
                let lam = ctx.lambda(j + 1, k)?;
                let v = lam * xi_next * std::f64::consts::FRAC_1_SQRT_2;
                if v != Complex64::ZERO {
                    psi.set(LatticeIndex::from(k), v)?;
                }
            }
            Ok(())
        };
        if let Err(e) = build() {
            err = Some(e);
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(FrameElementCoeffs {
        level: j,
        phi_hat: phi,
        psi_hat: psi,
        scale_log2: -(j as f64) / 2.0,
        window_radius: radius,
    })
}

/// Analytic upper bound on the squared-coefficient mass outside the window,
/// from the envelope of the truncated Gaussian branch.
pub fn tail_mass_bound(ctx: &FrameContext, j: u32, radius: i64) -> f64 {
    let dim = ctx.dim() as f64;
    let mut total = 0.0;
    let mut s = radius + 1;
    loop {
        let n = (s * s) as f64;
        let env = envelope(ctx, j, n);
        let shell = 2.0 * dim * (2.0 * s as f64 + 1.0).powf(dim - 1.0);
        let term = shell * env * env;
        total += term;
        if term < total * 1e-18 || term == 0.0 {
            return total;
        }
        s += 1;
    }
}

/// Reference scaling profile: hat(xi0_j)(k) = exp(-||L||^2 ||k||^2 / j),
/// truncated at eps.
pub fn xi0_reference(l: &Direction, j: u32, eps: f64) -> Result<CoeffMap> {
    if j < 2 {
        return Err(Error::invalid("reference profiles need level >= 2"));
    }
    gaussian_like(l, eps, j as f64, |n, lsq| (-lsq * n / j as f64).exp())
}

/// Reference wavelet profile:
/// |hat(eta_j)(k)| = (1 - exp(-2||L||^2||k||^2/(j(j+1))))^{1/2} exp(-||L||^2||k||^2/(j+1)).
/// The unimodular factor e^{2 pi i <k0, B^{-j} k>} is dropped: it is a linear
/// phase, and the uncertainty product is invariant under it.
pub fn eta_reference(l: &Direction, j: u32, eps: f64) -> Result<CoeffMap> {
    if j < 2 {
        return Err(Error::invalid("reference profiles need level >= 2"));
    }
    let jf = j as f64;
    gaussian_like(l, eps, jf + 1.0, move |n, lsq| {
        let x = 2.0 * lsq * n / (jf * (jf + 1.0));
        (-(-x).exp_m1()).sqrt() * (-lsq * n / (jf + 1.0)).exp()
    })
}

fn gaussian_like(
    l: &Direction,
    eps: f64,
    env_scale: f64,
    value: impl Fn(f64, f64) -> f64,
) -> Result<CoeffMap> {
    if !(0.0..1.0).contains(&eps) || eps <= 0.0 {
        return Err(Error::invalid("truncation tolerance must lie in (0, 1)"));
    }
    let lsq = l.norm_sq() as f64;
    let radius = (env_scale * (1.0 / eps).ln() / lsq).sqrt().ceil() as i64 + 1;
    let dim = l.dim();
    let mut map = CoeffMap::with_capacity(dim, ((2 * radius + 1).pow(dim as u32)) as usize);
    cube_points(dim, radius, &mut |k| {
        let n: f64 = k.iter().map(|&x| (x * x) as f64).sum();
        let v = value(n, lsq);
        if v != 0.0 {
            map.set(LatticeIndex::from(k), Complex64::new(v, 0.0)).unwrap();
        }
    });
    Ok(map)
}

/// UP limit of the scaling functions.
pub fn phi_limit_target() -> f64 {
    0.25
}

/// UP limit of the wavelet functions in dimension d:
/// (1/4) (d+2)(d^2-2d+4)/d^3.
pub fn psi_limit_target(d: usize) -> f64 {
    let d = d as f64;
    0.25 * (d + 2.0) * (d * d - 2.0 * d + 4.0) / (d * d * d)
}

/// One row of a localization-limit sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub j: u32,
    pub up_phi: f64,
    pub up_psi: f64,
    pub target_phi: f64,
    pub target_psi: f64,
    /// Squared norms of the stored (2^{j/2}-rescaled) maps.
    pub norm_phi: f64,
    pub norm_psi: f64,
}

/// Uncertainty products of phi_j and psi_j for each requested level.
pub fn up_limit_sweep(
    ctx: &FrameContext,
    levels: &[u32],
    eps: f64,
    budget: &mut Budget,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(levels.len());
    for &j in levels {
        rows.push(up_limit_row(ctx, j, eps, budget)?);
    }
    Ok(rows)
}

/// A single sweep level; exposed so callers can parallelize across levels.
pub fn up_limit_row(ctx: &FrameContext, j: u32, eps: f64, budget: &mut Budget) -> Result<SweepRow> {
    if j < 1 {
        return Err(Error::invalid("sweep levels must be >= 1"));
    }
    let el = frame_element_coeffs(ctx, j, eps, budget)?;
    let l = ctx.direction();
    let up_phi = up_directional(&el.phi_hat, l)?;
    let up_psi = up_directional(&el.psi_hat, l)?;
    Ok(SweepRow {
        j,
        up_phi: finite_up(&up_phi),
        up_psi: finite_up(&up_psi),
        target_phi: phi_limit_target(),
        target_psi: psi_limit_target(ctx.dim()),
        norm_phi: el.phi_hat.squared_norm(),
        norm_psi: el.psi_hat.squared_norm(),
    })
}

/// Uncertainty products of the reference profiles xi0_j and eta_j, which
/// share the phi/psi limits.
pub fn reference_limits_check(l: &Direction, j: u32, eps: f64) -> Result<(UpReport, UpReport)> {
    let xi0 = xi0_reference(l, j, eps)?;
    let eta = eta_reference(l, j, eps)?;
    Ok((up_directional(&xi0, l)?, up_directional(&eta, l)?))
}

fn finite_up(rep: &UpReport) -> f64 {
    rep.up.unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::super::dilation::{dyadic, quincunx};
    use super::*;
    use crate::numeric::KahanSum;

    fn ctx2() -> FrameContext {
        FrameContext::new(quincunx(), Direction::new(vec![1, 0]).unwrap()).unwrap()
    }

    fn ctx1() -> FrameContext {
        FrameContext::new(dyadic(), Direction::new(vec![1]).unwrap()).unwrap()
    }

    #[test]
    fn scaling_relation_entrywise() {
        // xi_j(k) = nu_{j+1}(k) xi_{j+1}(k), i.e. phi_j = mu_{j+1} phi_{j+1}
        // after unscaling.
        let ctx = ctx2();
        let mut budget = Budget::unlimited();
        for j in [2u32, 5, 9] {
            let el = frame_element_coeffs(&ctx, j, 1e-6, &mut budget).unwrap();
            for (k, &v) in el.phi_hat.iter() {
                let nu = ctx.nu(j + 1, &k.coords).unwrap();
                let next = ctx.xi_hat(j + 1, &k.coords).unwrap();
                assert!(
                    (v.re - nu * next).abs() < 1e-13,
                    "j={j} k={:?}: {} vs {}",
                    k,
                    v.re,
                    nu * next
                );
            }
        }
    }

    #[test]
    fn mask_modulus_identity_on_window() {
        // |mu_{j+1}|^2 + |lambda_{j+1}|^2 = 2 everywhere on the window
        let ctx = ctx1();
        let mut budget = Budget::unlimited();
        let el = frame_element_coeffs(&ctx, 4, 1e-8, &mut budget).unwrap();
        for (k, _) in el.phi_hat.iter() {
            let mu = ctx.mu(5, &k.coords).unwrap();
            let lam = ctx.lambda(5, &k.coords).unwrap();
            assert!((mu * mu + lam.norm_sqr() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn psi_bounded_by_sqrt2_scaled() {
        // stored psi = 2^{j/2} psi_hat, so |stored| <= 1
        let ctx = ctx2();
        let mut budget = Budget::unlimited();
        let el = frame_element_coeffs(&ctx, 3, 1e-8, &mut budget).unwrap();
        for (_, v) in el.psi_hat.iter() {
            assert!(v.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn phi_norm_matches_direct_sum_in_exp_regime() {
        // once j >= j1 on the window, ||stored phi||^2 = sum exp(-2 l^2 |k|^2 / j)
        let ctx = ctx1();
        let mut budget = Budget::unlimited();
        let j = 50u32;
        let el = frame_element_coeffs(&ctx, j, 1e-10, &mut budget).unwrap();
        let mut direct = KahanSum::new();
        let r = el.window_radius;
        for k in -r..=r {
            direct.add((-2.0 * (k * k) as f64 / j as f64).exp());
        }
        let got = el.phi_hat.squared_norm();
        assert!((got - direct.value()).abs() < 1e-10 * direct.value());
    }

    #[test]
    fn dropped_tail_is_negligible() {
        let ctx = ctx2();
        let mut budget = Budget::unlimited();
        for (j, eps) in [(2u32, 1e-8f64), (20, 1e-8), (100, 1e-10)] {
            let el = frame_element_coeffs(&ctx, j, eps, &mut budget).unwrap();
            let tail = tail_mass_bound(&ctx, j, el.window_radius);
            let retained = el.phi_hat.squared_norm();
            assert!(
                tail < eps * eps * retained,
                "j={j}: tail {tail:.3e} vs {:.3e}",
                eps * eps * retained
            );
        }
    }

    #[test]
    fn psi_matches_eta_profile_at_deep_levels() {
        // deep inside, 2^{j/2} psi_hat has exactly the eta modulus
        let ctx = ctx2();
        let mut budget = Budget::unlimited();
        let j = 60u32;
        let el = frame_element_coeffs(&ctx, j, 1e-8, &mut budget).unwrap();
        let eta = eta_reference(ctx.direction(), j, 1e-8).unwrap();
        for (k, v) in el.psi_hat.iter() {
            let e = eta.get(&k.coords).re;
            assert!(
                (v.norm() - e).abs() < 1e-13,
                "k={k:?}: |psi|={} eta={e}",
                v.norm()
            );
        }
    }

    #[test]
    fn eta_frequency_mean_is_zero() {
        let l = Direction::new(vec![1, 0]).unwrap();
        let eta = eta_reference(&l, 40, 1e-8).unwrap();
        assert_eq!(crate::uncertainty::frequency_mean(&eta, &l).unwrap(), 0.0);
    }

    #[test]
    fn reference_limits_converge() {
        // xi0 at j=500 within 1% of 1/4 (d=1), eta at j=500 within 2% of
        // 1/2 (d=2)
        let l = Direction::new(vec![1]).unwrap();
        let (xi0, _) = reference_limits_check(&l, 500, 1e-8).unwrap();
        assert!((xi0.up.unwrap() - 0.25).abs() / 0.25 < 0.01);

        let l = Direction::new(vec![1, 0]).unwrap();
        let (_, eta) = reference_limits_check(&l, 500, 1e-8).unwrap();
        let target = psi_limit_target(2);
        assert!((eta.up.unwrap() - target).abs() / target < 0.02);
    }

    #[test]
    fn frame_elements_track_reference_profiles() {
        // the gap between the frame products and the reference products
        // shrinks with the level
        let ctx = ctx2();
        let mut budget = Budget::unlimited();
        for (j, tol) in [(50u32, 0.05), (100, 0.03), (200, 0.02)] {
            let row = super::up_limit_row(&ctx, j, 1e-8, &mut budget).unwrap();
            let (xi0, eta) = reference_limits_check(ctx.direction(), j, 1e-8).unwrap();
            let gap_phi = (row.up_phi - xi0.up.unwrap()).abs() / xi0.up.unwrap();
            let gap_psi = (row.up_psi - eta.up.unwrap()).abs() / eta.up.unwrap();
            assert!(gap_phi < tol, "j={j}: phi gap {gap_phi}");
            assert!(gap_psi < tol, "j={j}: psi gap {gap_psi}");
        }
    }

    #[test]
    fn budget_rejects_oversized_windows() {
        let ctx = ctx2();
        let mut budget = Budget::with_cap(100);
        let err = frame_element_coeffs(&ctx, 50, 1e-10, &mut budget);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }
}
