//! Numerical verification of the frame properties: the two unitary-extension
//! mask identities and the energy cascade E_{j+1} = E_j + W_j.

use std::collections::HashMap;

use num_complex::Complex64;

use super::context::FrameContext;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::{CoeffMap, FixedState};
use crate::numeric::{KahanComplex, KahanSum};

/// Maximum residuals of the mask identities over a window.
#[derive(Debug, Clone)]
pub struct UepReport {
    pub level: u32,
    /// max |mu^2 + |lambda|^2 - 2|
    pub residual_partition: f64,
    /// max |mu(k) mu(k + s) + lambda(k) conj(lambda(k + s))|, s = B^{j-1} k0
    pub residual_orthogonality: f64,
    pub points_checked: usize,
}

/// Verifies the two mask identities on the given window (defaults to the
/// full period when `window` is `None`). Residuals are reported, not judged.
pub fn uep_identity_check(
    ctx: &FrameContext,
    j: u32,
    window: Option<&[Vec<i64>]>,
) -> Result<UepReport> {
    if j < 1 {
        return Err(Error::invalid("mask identities need level >= 1"));
    }
    let period;
    let window = match window {
        Some(w) => w,
        None => {
            period = ctx.period_points(j)?;
            &period
        }
    };
    let mut res1 = 0.0f64;
    let mut res2 = 0.0f64;
    for k in window {
        let mu1 = ctx.mu(j, k)?;
        let lam1 = ctx.lambda(j, k)?;
        res1 = res1.max((mu1 * mu1 + lam1.norm_sqr() - 2.0).abs());

        let mu2 = std::f64::consts::SQRT_2 * ctx.nu_shifted(j, k)?;
        let lam2 = ctx.lambda_at_shifted(j, k)?;
        res2 = res2.max((mu1 * mu2 + lam1 * lam2.conj()).norm());
    }
    Ok(UepReport {
        level: j,
        residual_partition: res1,
        residual_orthogonality: res2,
        points_checked: window.len(),
    })
}

/// Energies of one cascade level.
#[derive(Debug, Clone)]
pub struct CascadeRow {
    pub j: u32,
    /// E_j = sum over translates of |<f, phi_j(. - A^{-j}k)>|^2.
    pub energy_phi: f64,
    /// W_j = same with psi_j.
    pub energy_psi: f64,
}

/// Cascade verification report.
#[derive(Debug, Clone)]
pub struct CascadeReport {
    pub rows: Vec<CascadeRow>,
    pub norm_sq: f64,
    /// E_{j+1} - E_j - W_j for consecutive rows.
    pub cascade_residuals: Vec<f64>,
    /// ||f||^2 - E_J at the last level.
    pub final_gap: f64,
}

/// Computes E_j and W_j for j = 0..=j_max and the telescoping residuals.
///
/// Both energies reduce to residue-class sums: grouping the support of f
/// modulo B^j Z^d gives E_j = sum_t |sum_{m = t} c_m xi_j(m)|^2 and
/// W_j = (1/2) sum_t |sum_{m = t} c_m conj(lambda_{j+1}(m)) xi_{j+1}(m)|^2,
/// with all 2^{+/-j} factors cancelled symbolically. Once B^j Z^d separates
/// the support the classes are singletons and levels of any size cost O(|supp|).
pub fn parseval_cascade_check(
    ctx: &FrameContext,
    f: &CoeffMap,
    j_max: u32,
    budget: &mut Budget,
) -> Result<CascadeReport> {
    if f.is_empty() {
        return Err(Error::EmptyCoeffMap);
    }
    if f.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch(f.dim(), ctx.dim()));
    }
    let mut rows = Vec::with_capacity(j_max as usize + 1);
    for j in 0..=j_max {
        budget.charge(f.len() as u64)?;
        let (e, w) = level_energies(ctx, f, j)?;
        rows.push(CascadeRow { j, energy_phi: e, energy_psi: w });
    }
    let cascade_residuals = rows
        .windows(2)
        .map(|w| w[1].energy_phi - w[0].energy_phi - w[0].energy_psi)
        .collect();
    let norm_sq = f.squared_norm();
    let final_gap = norm_sq - rows.last().unwrap().energy_phi;
    Ok(CascadeReport { rows, norm_sq, cascade_residuals, final_gap })
}

/// E_j and W_j at one level; usable at arbitrarily deep j once the support
/// is separated by B^j Z^d.
pub fn level_energies(ctx: &FrameContext, f: &CoeffMap, j: u32) -> Result<(f64, f64)> {
    let support_separated = {
        let mut diam = 0.0f64;
        let pts: Vec<_> = f.iter().map(|(k, _)| k).collect();
        for (i, a) in pts.iter().enumerate() {
            for b in pts.iter().skip(i + 1) {
                let d: f64 = a
                    .coords
                    .iter()
                    .zip(&b.coords)
                    .map(|(x, y)| ((x - y) * (x - y)) as f64)
                    .sum();
                diam = diam.max(d.sqrt());
            }
        }
        diam < ctx.min_lattice_norm(j) * 0.999
    };

    if support_separated {
        // every support point is alone in its residue class
        let mut e = KahanSum::new();
        let mut w = KahanSum::new();
        for (k, c) in f.iter() {
            let p = c.norm_sqr();
            let xi_j = ctx.xi_hat(j, &k.coords)?;
            e.add(p * xi_j * xi_j);
            let xi_next = ctx.xi_hat(j + 1, &k.coords)?;
            let lam_abs = std::f64::consts::SQRT_2 * ctx.nu_shifted(j + 1, &k.coords)?;
            w.add(0.5 * p * lam_abs * lam_abs * xi_next * xi_next);
        }
        return Ok((e.value(), w.value()));
    }

    // group the support by residue class mod B^j Z^d (exact reduction)
    let mut groups: HashMap<Vec<i64>, (KahanComplex, KahanComplex), FixedState> =
        HashMap::default();
    for (k, c) in f.iter() {
        let key = ctx.reduce(j, &k.coords)?;
        let xi_j = ctx.xi_hat(j, &k.coords)?;
        let xi_next = ctx.xi_hat(j + 1, &k.coords)?;
        let lam = ctx.lambda(j + 1, &k.coords)?;
        let slot = groups.entry(key).or_default();
        slot.0.add(c * xi_j);
        slot.1.add(c * lam.conj() * xi_next);
    }
    let mut e = KahanSum::new();
    let mut w = KahanSum::new();
    for (zphi, zpsi) in groups.values() {
        e.add(zphi.value().norm_sqr());
        w.add(0.5 * zpsi.value().norm_sqr());
    }
    Ok((e.value(), w.value()))
}

impl FrameContext {
    /// lambda_j evaluated at k + B^{j-1} k0; needed by the orthogonality
    /// residual. Uses 2 B^{j-1} k0 = B^j (B^{-1} 2 k0) being a full period.
    pub(crate) fn lambda_at_shifted(&self, j: u32, k: &[i64]) -> Result<Complex64> {
        // lambda_j(k + s) = e^{2 pi i <k0, B^{-j}(k+s)>} mu_j(k + 2s)
        //                 = e^{2 pi i <k0, B^{-j}k>} e^{2 pi i <k0, B^{-1}k0>} mu_j(k)
        let mag = std::f64::consts::SQRT_2 * self.nu(j, k)?;
        let frac = self.phase_frac(j, k)?;
        let half_twist = self.k0_self_pairing()?;
        Ok(Complex64::from_polar(
            mag,
            std::f64::consts::TAU * (frac + half_twist),
        ))
    }

    /// <k0, B^{-1} k0> mod 1. The mask orthogonality identity needs this to
    /// be 1/2, which holds for every dilation whose k0 avoids both A Z^d and
    /// A^T Z^d with odd self-pairing; the residual check reports any failure.
    pub(crate) fn k0_self_pairing(&self) -> Result<f64> {
        self.phase_frac(1, &self.dilation().k0().coords)
    }
}

#[cfg(test)]
mod tests {
    use super::super::dilation::{dyadic, quincunx};
    use super::*;
    use crate::lattice::{Direction, LatticeIndex};
    use crate::numeric::SplitMix64;

    fn ctx_quincunx(l: Vec<i64>) -> FrameContext {
        FrameContext::new(quincunx(), Direction::new(l).unwrap()).unwrap()
    }

    #[test]
    fn k0_self_pairing_is_half() {
        let ctx = ctx_quincunx(vec![1, 1]);
        assert!((ctx.k0_self_pairing().unwrap() - 0.5).abs() < 1e-15);
        let ctx = FrameContext::new(dyadic(), Direction::new(vec![1]).unwrap()).unwrap();
        assert!((ctx.k0_self_pairing().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uep_identities_small_levels() {
        let ctx = ctx_quincunx(vec![1, 1]);
        for j in 2..=10u32 {
            let rep = uep_identity_check(&ctx, j, None).unwrap();
            assert!(rep.residual_partition < 1e-12, "j={j}: {rep:?}");
            assert!(rep.residual_orthogonality < 1e-12, "j={j}: {rep:?}");
            assert_eq!(rep.points_checked, 1 << j);
        }
        let ctx = FrameContext::new(dyadic(), Direction::new(vec![1]).unwrap()).unwrap();
        let rep = uep_identity_check(&ctx, 3, None).unwrap();
        assert!(rep.residual_partition < 1e-12);
        assert!(rep.residual_orthogonality < 1e-12);
    }

    #[test]
    fn boundary_partition_identity() {
        // shell points are classified exactly (integer comparisons), so both
        // mask values are the 1/sqrt(2) constant and the partition identity
        // 2*(1/2) + 2*(1/2) = 2 holds to one rounding of that constant
        let ctx = ctx_quincunx(vec![1, 1]);
        let mut hit = false;
        for j in 2..=6u32 {
            for p in ctx.period_points(j).unwrap() {
                if ctx.in_closure(j - 1, &p).unwrap() && !ctx.in_interior(j - 1, &p).unwrap() {
                    assert_eq!(ctx.nu(j, &p).unwrap(), std::f64::consts::FRAC_1_SQRT_2);
                    let mu = ctx.mu(j, &p).unwrap();
                    let lam = ctx.lambda(j, &p).unwrap();
                    assert!((mu * mu + lam.norm_sqr() - 2.0).abs() < 2e-15);
                    hit = true;
                }
            }
        }
        assert!(hit);
    }

    #[test]
    fn cascade_on_delta_at_origin() {
        // for f = delta_0: E_j = 1, W_j = 0 for every j >= 1
        let ctx = ctx_quincunx(vec![1, 1]);
        let f = CoeffMap::from_entries(2, [(LatticeIndex::zero(2), Complex64::ONE)]).unwrap();
        let rep = parseval_cascade_check(&ctx, &f, 12, &mut Budget::unlimited()).unwrap();
        for row in &rep.rows[1..] {
            assert!((row.energy_phi - 1.0).abs() < 1e-14, "{row:?}");
            assert!(row.energy_psi.abs() < 1e-14, "{row:?}");
        }
        // level 0 bootstraps through the wavelet instead
        assert!(rep.rows[0].energy_phi.abs() < 1e-14);
        assert!((rep.rows[0].energy_psi - 1.0).abs() < 1e-14);
        for r in &rep.cascade_residuals {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn cascade_telescopes_on_random_polynomial() {
        let ctx = ctx_quincunx(vec![1, 0]);
        let mut rng = SplitMix64::new(2024);
        let mut entries = vec![];
        for a in -4..=4i64 {
            for b in -4..=4i64 {
                entries.push((
                    LatticeIndex::new(vec![a, b]),
                    Complex64::new(rng.next_normal(), 0.0),
                ));
            }
        }
        let f = CoeffMap::from_entries(2, entries).unwrap();
        let rep = parseval_cascade_check(&ctx, &f, 14, &mut Budget::unlimited()).unwrap();
        for (i, r) in rep.cascade_residuals.iter().enumerate() {
            assert!(r.abs() < 1e-10, "residual at j={i}: {r:.3e}");
        }
        // energies increase toward ||f||^2
        for w in rep.rows.windows(2) {
            assert!(w[1].energy_phi >= w[0].energy_phi - 1e-12);
        }
        assert!(rep.final_gap > 0.0);
        assert!(rep.final_gap < rep.norm_sq);
    }

    #[test]
    fn cascade_scales_quadratically() {
        let ctx = ctx_quincunx(vec![1, 0]);
        let f = CoeffMap::from_entries(
            2,
            [
                (LatticeIndex::new(vec![0, 0]), Complex64::ONE),
                (LatticeIndex::new(vec![1, -1]), Complex64::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        let g = f.scaled(Complex64::new(3.0, 0.0));
        let a = parseval_cascade_check(&ctx, &f, 6, &mut Budget::unlimited()).unwrap();
        let b = parseval_cascade_check(&ctx, &g, 6, &mut Budget::unlimited()).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert!((rb.energy_phi - 9.0 * ra.energy_phi).abs() < 1e-12);
            assert!((rb.energy_psi - 9.0 * ra.energy_psi).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_determinant_dilation_pipeline() {
        // [[1,1],[1,-1]] has det = -2; the sign-normalized reduction and
        // phase paths must behave exactly like the det = +2 case
        let dil = super::super::dilation::validate_dilation(&[vec![1, 1], vec![1, -1]]).unwrap();
        assert_eq!(dil.det(), -2);
        let ctx = FrameContext::new(dil, Direction::new(vec![1, 1]).unwrap()).unwrap();
        assert!((ctx.k0_self_pairing().unwrap() - 0.5).abs() < 1e-15);
        for j in 1..=8u32 {
            for p in ctx.period_points(j).unwrap() {
                let a = ctx.nu(j, &p).unwrap();
                let b = ctx.nu_shifted(j, &p).unwrap();
                assert!((a * a + b * b - 1.0).abs() < 1e-14, "j={j} p={p:?}");
            }
            let rep = uep_identity_check(&ctx, j, None).unwrap();
            assert!(rep.residual_partition < 1e-12, "j={j}");
            assert!(rep.residual_orthogonality < 1e-12, "j={j}");
        }
        let mut rng = SplitMix64::new(5150);
        let mut entries = vec![];
        for a in -3..=3i64 {
            for b in -3..=3i64 {
                entries.push((
                    LatticeIndex::new(vec![a, b]),
                    Complex64::new(rng.next_normal(), rng.next_normal()),
                ));
            }
        }
        let f = CoeffMap::from_entries(2, entries).unwrap();
        let rep = parseval_cascade_check(&ctx, &f, 12, &mut Budget::unlimited()).unwrap();
        for r in &rep.cascade_residuals {
            assert!(r.abs() < 1e-10, "cascade residual {r:.3e}");
        }
    }

    #[test]
    fn energy_gap_vanishes_at_deep_levels() {
        // E_J -> ||f||^2 with an O(1/J) rate; the separated-support path
        // makes huge J cheap.
        let ctx = ctx_quincunx(vec![1, 0]);
        let f = CoeffMap::from_entries(
            2,
            [
                (LatticeIndex::new(vec![1, 0]), Complex64::ONE),
                (LatticeIndex::new(vec![-2, 3]), Complex64::new(0.25, 0.0)),
            ],
        )
        .unwrap();
        let norm = f.squared_norm();
        let mut prev_gap = f64::INFINITY;
        for j in [20u32, 100, 1000, 100_000, 30_000_000] {
            let (e, _) = level_energies(&ctx, &f, j).unwrap();
            let gap = norm - e;
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-6, "gap at J=3e7: {prev_gap:.3e}");
    }
}
