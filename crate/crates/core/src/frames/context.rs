//! Level machinery for the periodic frame construction: exact reduction into
//! fundamental domains of B^j Z^d, the three-case masks nu_j, and the
//! convergent infinite product behind the scaling coefficients.
//!
//! Exactness strategy: B^{-j} = adj(B^j)/det(B^j) with det = (+/-2)^j, so all
//! membership and reduction tests are integer comparisons while i128 holds
//! the powers. Beyond that range every point we ever evaluate sits deep
//! inside the fundamental domain, which a verified ball-growth certificate
//! (spectral, not per-point) turns into the plain Gaussian branch.

use num_complex::Complex64;

use super::dilation::{DilationMatrix, IMat};
use crate::error::{Error, Result};
use crate::lattice::{Direction, LatticeIndex};

const DEFAULT_TABLE_CAP: u32 = 64;

/// Everything needed to evaluate masks and frame coefficients for one
/// dilation matrix and localization direction. Immutable after construction.
#[derive(Debug)]
pub struct FrameContext {
    dil: DilationMatrix,
    l: Direction,
    l_norm_sq: f64,
    theta0: f64,
    /// Ball certificate holds for every level >= j0.
    j0: u32,
    /// Exact integer tables exist for levels 0..=exact_cap.
    exact_cap: u32,
    b_pow: Vec<Option<IMat>>,
    adjb_pow: Vec<Option<IMat>>,
    detb_pow: Vec<Option<i128>>,
    adja_pow: Vec<Option<IMat>>,
    deta_pow: Vec<Option<i128>>,
    /// shift[r] = B^{r-1} k0 for r >= 1 (mask shift at level r).
    shift: Vec<Option<Vec<i64>>>,
    /// ashift[i] = A^i k0 (digits of the coset expansion).
    ashift: Vec<Option<Vec<i64>>>,
    /// Float B^{-r} matrices with their Frobenius norms.
    binv: Vec<Vec<f64>>,
    binv_fro: Vec<f64>,
}

fn mat_apply_f64(m: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    (0..d)
        .map(|i| (0..d).map(|j| m[i * d + j] * v[j]).sum())
        .collect()
}

fn mat_mul_f64(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += a[i * d + k] * b[k * d + j];
            }
            out[i * d + j] = acc;
        }
    }
    out
}

impl FrameContext {
    pub fn new(dil: DilationMatrix, l: Direction) -> Result<Self> {
        Self::with_table_cap(dil, l, DEFAULT_TABLE_CAP)
    }

    /// `table_cap` bounds the levels at which exact integer reduction is
    /// available; mask and product evaluations beyond it fall back to the
    /// certified deep-interior branch.
    pub fn with_table_cap(dil: DilationMatrix, l: Direction, table_cap: u32) -> Result<Self> {
        if dil.dim() != l.dim() {
            return Err(Error::DimensionMismatch(dil.dim(), l.dim()));
        }
        let d = dil.dim();
        let cap = table_cap.max(8) as usize;

        let b = dil.b_mat();
        let adj_b = b.adjugate().ok_or_else(overflow)?;
        let det_b = b.det().ok_or_else(overflow)?;
        let a = dil.a_mat();
        let adj_a = a.adjugate().ok_or_else(overflow)?;
        let det_a = a.det().ok_or_else(overflow)?;

        let mut b_pow = vec![Some(IMat::identity(d))];
        let mut adjb_pow = vec![Some(IMat::identity(d))];
        let mut detb_pow = vec![Some(1i128)];
        let mut adja_pow = vec![Some(IMat::identity(d))];
        let mut deta_pow = vec![Some(1i128)];
        for r in 1..=cap {
            b_pow.push(b_pow[r - 1].as_ref().and_then(|m| m.mul(&b)));
            adjb_pow.push(adjb_pow[r - 1].as_ref().and_then(|m| m.mul(&adj_b)));
            detb_pow.push(detb_pow[r - 1].and_then(|x| x.checked_mul(det_b)));
            adja_pow.push(adja_pow[r - 1].as_ref().and_then(|m| m.mul(&adj_a)));
            deta_pow.push(deta_pow[r - 1].and_then(|x| x.checked_mul(det_a)));
        }

        // mask shifts B^{r-1} k0 and coset digits A^i k0
        let k0_vec: Vec<i128> = dil.k0().coords.iter().map(|&x| x as i128).collect();
        let mut shift: Vec<Option<Vec<i64>>> = vec![None];
        let mut cur = Some(k0_vec.clone());
        for _ in 1..=cap {
            shift.push(cur.as_ref().and_then(|v| narrow(v)));
            cur = cur.and_then(|v| b.mul_vec(&v));
        }
        let mut ashift: Vec<Option<Vec<i64>>> = Vec::with_capacity(cap + 1);
        let mut cur = Some(k0_vec);
        for _ in 0..=cap {
            ashift.push(cur.as_ref().and_then(|v| narrow(v)));
            cur = cur.and_then(|v| a.mul_vec(&v));
        }

        let exact_cap = (1..=cap)
            .take_while(|&r| {
                b_pow[r].is_some()
                    && adjb_pow[r].is_some()
                    && detb_pow[r].is_some()
                    && shift[r].is_some()
            })
            .last()
            .unwrap_or(0) as u32;

        // float inverse powers
        let binv1: Vec<f64> = {
            let adj = adj_b.to_f64();
            adj.iter().map(|x| x / det_b as f64).collect()
        };
        let mut binv = vec![{
            let mut id = vec![0.0; d * d];
            for i in 0..d {
                id[i * d + i] = 1.0;
            }
            id
        }];
        for r in 1..=cap {
            binv.push(mat_mul_f64(&binv[r - 1], &binv1, d));
        }
        let row_norms = |m: &[f64]| -> (f64, f64) {
            let mut maxrow = 0.0f64;
            let mut fro = 0.0f64;
            for i in 0..d {
                let s: f64 = (0..d).map(|j| m[i * d + j] * m[i * d + j]).sum();
                maxrow = maxrow.max(s.sqrt());
                fro += s;
            }
            (maxrow, fro.sqrt())
        };
        let (binv_maxrow, binv_fro): (Vec<f64>, Vec<f64>) =
            binv.iter().map(|m| row_norms(m)).unzip();

        // theta0 from the spectral gap, then the ball-growth certificate:
        // q_r = maxrow(B^{-(r-1)}) (1+theta0)^r / 2 < 1/2 means the ball of
        // radius (1+theta0)^r/2 lies in int(K_{r-1}).
        let theta0 = 0.9 * (dil.min_eig_modulus() - 1.0);
        let growth = 1.0 + theta0;
        let q = |r: usize| -> f64 { binv_maxrow[r - 1] * growth.powi(r as i32) / 2.0 };

        // contraction step: one s with ||B^{-s}||_F (1+theta0)^s <= 0.9 lets
        // q_{r+s} <= 0.9 q_r, so a verified initial window covers all levels
        let s_star = (1..=cap).find(|&s| binv_fro[s] * growth.powi(s as i32) <= 0.9);
        let s_star = s_star.ok_or_else(|| {
            Error::InvalidDilation(
                "ball-growth certificate failed: no contracting power found".into(),
            )
        })?;
        let mut j0 = None;
        'outer: for r0 in 2..=cap.saturating_sub(s_star) {
            for r in r0..=(r0 + s_star) {
                if q(r) >= 0.5 - 1e-9 {
                    continue 'outer;
                }
            }
            j0 = Some(r0 as u32);
            break;
        }
        let j0 = j0.ok_or_else(|| {
            Error::InvalidDilation(
                "ball-growth certificate failed in the working range".into(),
            )
        })?;

        let l_norm_sq = l.norm_sq() as f64;
        Ok(Self {
            dil,
            l,
            l_norm_sq,
            theta0,
            j0,
            exact_cap,
            b_pow,
            adjb_pow,
            detb_pow,
            adja_pow,
            deta_pow,
            shift,
            ashift,
            binv,
            binv_fro,
        })
    }

    pub fn dilation(&self) -> &DilationMatrix {
        &self.dil
    }

    pub fn direction(&self) -> &Direction {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.dil.dim()
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn exact_cap(&self) -> u32 {
        self.exact_cap
    }

    pub fn l_norm_sq(&self) -> f64 {
        self.l_norm_sq
    }

    fn exact_tables(&self, j: u32) -> Option<(&IMat, &IMat, i128)> {
        let j = j as usize;
        if j >= self.b_pow.len() {
            return None;
        }
        match (&self.b_pow[j], &self.adjb_pow[j], self.detb_pow[j]) {
            (Some(b), Some(adj), Some(det)) => Some((b, adj, det)),
            _ => None,
        }
    }

    /// Reduces k into the fundamental domain K_j = Z^d intersect
    /// B^j [-1/2, 1/2)^d, exactly.
    pub fn reduce(&self, j: u32, k: &[i64]) -> Result<Vec<i64>> {
        let (b, adj, det) = self
            .exact_tables(j)
            .ok_or(Error::LevelOutOfRange(j, self.exact_cap))?;
        let kv: Vec<i128> = k.iter().map(|&x| x as i128).collect();
        let w = adj.mul_vec(&kv).ok_or_else(overflow)?;
        let den = 2 * det.abs();
        let mut p = Vec::with_capacity(k.len());
        for &wi in &w {
            // floor(w/det + 1/2) with a positive denominator
            let num = if det > 0 { 2 * wi + det } else { -(2 * wi + det) };
            p.push(num.div_euclid(den));
        }
        let bp = b.mul_vec(&p).ok_or_else(overflow)?;
        let mut out = Vec::with_capacity(k.len());
        for (kv_i, bp_i) in kv.iter().zip(&bp) {
            out.push(
                i64::try_from(kv_i - bp_i).map_err(|_| Error::Serialization("reduction overflow".into()))?,
            );
        }
        Ok(out)
    }

    /// k in int(K_level) = Z^d intersect B^level (-1/2, 1/2)^d, exactly.
    pub fn in_interior(&self, level: u32, k: &[i64]) -> Result<bool> {
        let (_, adj, det) = self
            .exact_tables(level)
            .ok_or(Error::LevelOutOfRange(level, self.exact_cap))?;
        let kv: Vec<i128> = k.iter().map(|&x| x as i128).collect();
        let w = adj.mul_vec(&kv).ok_or_else(overflow)?;
        Ok(w.iter().all(|&wi| 2 * wi.abs() < det.abs()))
    }

    /// k in the closed cube K_level (boundary included), exactly.
    pub fn in_closure(&self, level: u32, k: &[i64]) -> Result<bool> {
        let (_, adj, det) = self
            .exact_tables(level)
            .ok_or(Error::LevelOutOfRange(level, self.exact_cap))?;
        let kv: Vec<i128> = k.iter().map(|&x| x as i128).collect();
        let w = adj.mul_vec(&kv).ok_or_else(overflow)?;
        Ok(w.iter().all(|&wi| 2 * wi.abs() <= det.abs()))
    }

    /// Membership in the half-open fundamental domain K_j.
    pub fn in_fundamental(&self, j: u32, k: &[i64]) -> Result<bool> {
        let (_, adj, det) = self
            .exact_tables(j)
            .ok_or(Error::LevelOutOfRange(j, self.exact_cap))?;
        let kv: Vec<i128> = k.iter().map(|&x| x as i128).collect();
        let w = adj.mul_vec(&kv).ok_or_else(overflow)?;
        let da = det.abs();
        let sign = if det > 0 { 1 } else { -1 };
        Ok(w.iter().all(|&wi| {
            let v = 2 * sign * wi;
            -da <= v && v < da
        }))
    }

    /// The Gaussian mask seed f_j(k) = exp(-||L||^2 ||k||^2 / (j (j-1))) for
    /// j >= 2; identically zero at the j = 1 bootstrap level.
    fn f_level(&self, j: u32, k_norm_sq: f64) -> f64 {
        if j < 2 {
            return 0.0;
        }
        (-self.l_norm_sq * k_norm_sq / (j as f64 * (j as f64 - 1.0))).exp()
    }

    /// 1 - f_j(k)^2, evaluated through expm1 so near-zero arguments keep
    /// full relative precision.
    fn f_sq_complement(&self, j: u32, k_norm_sq: f64) -> f64 {
        if j < 2 {
            return 1.0;
        }
        let x = 2.0 * self.l_norm_sq * k_norm_sq / (j as f64 * (j as f64 - 1.0));
        -(-x).exp_m1()
    }

    /// Deep-interior certificate: k in int(K_{level}) whenever level+1 >= j0
    /// and ||k|| <= (1+theta0)^{level+1}/2.
    fn ball_certificate(&self, level: u32, k_norm_sq: f64) -> bool {
        let r = level as f64 + 1.0;
        if (level + 1) < self.j0 {
            return false;
        }
        // ||k||^2 <= (1+theta0)^{2r}/4
        let log_bound = 2.0 * r * (1.0 + self.theta0).ln() - 4.0f64.ln();
        k_norm_sq.ln() <= log_bound || k_norm_sq == 0.0
    }

    /// The B^j-periodic mask value nu_j(k): the Gaussian branch on the
    /// interior of K_{j-1}, the complementary branch on its k0-translate,
    /// and 1/sqrt(2) on the boundary shell (which takes precedence over the
    /// translate branch).
    pub fn nu(&self, j: u32, k: &[i64]) -> Result<f64> {
        if j < 1 {
            return Err(Error::invalid("mask level must be >= 1"));
        }
        if self.exact_tables(j).is_some() && self.exact_tables(j - 1).is_some() {
            let red = self.reduce(j, k)?;
            if self.in_interior(j - 1, &red)? {
                let n = norm_sq_i64(&red);
                return Ok(self.f_level(j, n));
            }
            if self.in_closure(j - 1, &red)? {
                return Ok(std::f64::consts::FRAC_1_SQRT_2);
            }
            let s = self.shift[j as usize].as_ref().expect("exact tables imply shift");
            let shifted: Vec<i64> = red.iter().zip(s).map(|(a, b)| a - b).collect();
            let red2 = self.reduce(j, &shifted)?;
            if self.in_interior(j - 1, &red2)? {
                let n = norm_sq_i64(&red2);
                return Ok(self.f_sq_complement(j, n).sqrt());
            }
            return Err(Error::CoverageViolation { point: k.to_vec(), level: j });
        }
        // beyond exact tables: only the certified deep-interior branch exists
        let n = norm_sq_i64(k);
        if self.ball_certificate(j - 1, n) {
            Ok(self.f_level(j, n))
        } else {
            Err(Error::LevelOutOfRange(j, self.exact_cap))
        }
    }

    /// nu_j(k + B^{j-1} k0) without materializing the shift at deep levels.
    pub fn nu_shifted(&self, j: u32, k: &[i64]) -> Result<f64> {
        if j < 1 {
            return Err(Error::invalid("mask level must be >= 1"));
        }
        if self.exact_tables(j).is_some() && self.exact_tables(j - 1).is_some() {
            let s = self.shift[j as usize].as_ref().expect("exact tables imply shift");
            let shifted: Vec<i64> = k.iter().zip(s).map(|(a, b)| a + b).collect();
            return self.nu(j, &shifted);
        }
        let n = norm_sq_i64(k);
        if self.ball_certificate(j - 1, n) {
            // k interior forces the translate branch at k + B^{j-1}k0
            Ok(self.f_sq_complement(j, n).sqrt())
        } else {
            Err(Error::LevelOutOfRange(j, self.exact_cap))
        }
    }

    /// Scaling mask mu_j = sqrt(2) nu_j.
    pub fn mu(&self, j: u32, k: &[i64]) -> Result<f64> {
        Ok(std::f64::consts::SQRT_2 * self.nu(j, k)?)
    }

    /// Wavelet mask lambda_j(k) = e^{2 pi i <k0, B^{-j} k>} mu_j(k + B^{j-1} k0).
    pub fn lambda(&self, j: u32, k: &[i64]) -> Result<Complex64> {
        let mag = std::f64::consts::SQRT_2 * self.nu_shifted(j, k)?;
        let frac = self.phase_frac(j, k)?;
        Ok(Complex64::from_polar(mag, std::f64::consts::TAU * frac))
    }

    /// <k0, B^{-j} k> reduced mod 1; exact rational arithmetic while the
    /// integer tables last, float beyond (where the phase is far below any
    /// tolerance of interest).
    pub fn phase_frac(&self, j: u32, k: &[i64]) -> Result<f64> {
        if let Some((_, adj, det)) = self.exact_tables(j) {
            let kv: Vec<i128> = k.iter().map(|&x| x as i128).collect();
            let w = adj.mul_vec(&kv).ok_or_else(overflow)?;
            let mut num: i128 = 0;
            for (k0_i, w_i) in self.dil.k0().coords.iter().zip(&w) {
                num = num
                    .checked_add((*k0_i as i128).checked_mul(*w_i).ok_or_else(overflow)?)
                    .ok_or_else(overflow)?;
            }
            let da = det.abs();
            let num = if det > 0 { num } else { -num };
            return Ok(num.rem_euclid(da) as f64 / da as f64);
        }
        // float fallback: apply B^{-1} repeatedly
        let d = self.dim();
        let mut v: Vec<f64> = k.iter().map(|&x| x as f64).collect();
        let step = &self.binv[1];
        let cached = self.binv.len() - 1;
        let mut remaining = j as usize;
        if remaining >= cached {
            v = mat_apply_f64(&self.binv[cached], d, &v);
            remaining -= cached;
        }
        for _ in 0..remaining {
            v = mat_apply_f64(step, d, &v);
        }
        let phase: f64 = self
            .dil
            .k0()
            .coords
            .iter()
            .zip(&v)
            .map(|(&a, &b)| a as f64 * b)
            .sum();
        Ok(phase.rem_euclid(1.0))
    }

    /// First level from which k is guaranteed to stay in every deeper
    /// interior: max(j0, floor(log_{1+theta0}(2||k||)) + 1).
    pub fn r_star(&self, k_norm_sq: f64) -> u32 {
        if k_norm_sq <= 0.0 {
            return self.j0;
        }
        let norm = k_norm_sq.sqrt();
        let raw = (2.0 * norm).ln() / (1.0 + self.theta0).ln();
        let mut j1 = raw.floor() as i64 + 1;
        // guard against the boundary case of the float log
        while (1.0 + self.theta0).powi(j1 as i32) <= 2.0 * norm {
            j1 += 1;
        }
        (j1.max(self.j0 as i64)) as u32
    }

    /// The scaling-coefficient product xi_hat_j(k) = prod_{r > j} nu_r(k).
    /// Factors up to the safe cutoff are evaluated honestly; the rest
    /// telescope into exp(-||L||^2 ||k||^2 / cutoff).
    pub fn xi_hat(&self, j: u32, k: &[i64]) -> Result<f64> {
        let cutoff = self.r_star(norm_sq_i64(k)).max(j);
        self.xi_hat_with_cutoff(j, k, cutoff)
    }

    /// Same with an explicit cutoff >= the safe one (the result must not
    /// depend on the choice; exposed for self-consistency checks).
    pub fn xi_hat_with_cutoff(&self, j: u32, k: &[i64], cutoff: u32) -> Result<f64> {
        let n = norm_sq_i64(k);
        if cutoff < self.r_star(n).max(j) {
            return Err(Error::invalid("cutoff below the certified tail start"));
        }
        let mut prod = 1.0f64;
        for r in (j + 1)..=cutoff {
            prod *= self.nu(r, k)?;
            if prod == 0.0 {
                return Ok(0.0);
            }
        }
        Ok(prod * (-self.l_norm_sq * n / cutoff as f64).exp())
    }

    /// Representatives of Z^d / B^j Z^d inside K_j via the digit expansion
    /// sum B^i {0, k0}, reduced. Exactly 2^j points.
    pub fn period_points(&self, j: u32) -> Result<Vec<Vec<i64>>> {
        if j > 22 {
            return Err(Error::invalid("period enumeration capped at 2^22 points"));
        }
        let mut out = Vec::with_capacity(1usize << j);
        for t in 0u64..(1u64 << j) {
            let mut x = vec![0i64; self.dim()];
            for i in 0..j {
                if (t >> i) & 1 == 1 {
                    let s = self.shift[i as usize + 1]
                        .as_ref()
                        .ok_or(Error::LevelOutOfRange(j, self.exact_cap))?;
                    for (xi, si) in x.iter_mut().zip(s) {
                        *xi += si;
                    }
                }
            }
            out.push(self.reduce(j, &x)?);
        }
        Ok(out)
    }

    /// Coset representatives of Z^d / A^j Z^d as the digit expansion
    /// sum A^i {0, k0} (deterministic order, not reduced).
    pub fn coset_reps(&self, j: u32) -> Result<Vec<LatticeIndex>> {
        if j > 22 {
            return Err(Error::invalid("coset enumeration capped at 2^22 points"));
        }
        let mut out = Vec::with_capacity(1usize << j);
        for t in 0u64..(1u64 << j) {
            let mut x = vec![0i64; self.dim()];
            for i in 0..j {
                if (t >> i) & 1 == 1 {
                    let s = self.ashift[i as usize]
                        .as_ref()
                        .ok_or(Error::LevelOutOfRange(j, self.exact_cap))?;
                    for (xi, si) in x.iter_mut().zip(s) {
                        *xi += si;
                    }
                }
            }
            out.push(LatticeIndex::new(x));
        }
        Ok(out)
    }

    /// Whether x = y (mod A^j Z^d), exactly.
    pub fn congruent_mod_level(&self, j: u32, x: &[i64], y: &[i64]) -> Result<bool> {
        let j = j as usize;
        let (adj, det) = match (self.adja_pow.get(j), self.deta_pow.get(j)) {
            (Some(Some(adj)), Some(Some(det))) => (adj, *det),
            _ => return Err(Error::LevelOutOfRange(j as u32, self.exact_cap)),
        };
        let diff: Vec<i128> = x.iter().zip(y).map(|(&a, &b)| a as i128 - b as i128).collect();
        let w = adj.mul_vec(&diff).ok_or_else(overflow)?;
        Ok(w.iter().all(|&wi| wi % det == 0))
    }

    /// Lower bound on the norm of nonzero vectors of B^j Z^d. Monotone in j
    /// because B^j Z^d is a sublattice of B^m Z^d for m <= j.
    pub fn min_lattice_norm(&self, j: u32) -> f64 {
        let idx = (j as usize).min(self.binv_fro.len() - 1);
        let fro = self.binv_fro[idx];
        if fro == 0.0 {
            f64::INFINITY
        } else {
            1.0 / fro
        }
    }
}

fn norm_sq_i64(k: &[i64]) -> f64 {
    k.iter().map(|&x| (x as f64) * (x as f64)).sum()
}

fn narrow(v: &[i128]) -> Option<Vec<i64>> {
    v.iter().map(|&x| i64::try_from(x).ok()).collect()
}

fn overflow() -> Error {
    Error::Serialization("integer overflow in lattice arithmetic".into())
}
