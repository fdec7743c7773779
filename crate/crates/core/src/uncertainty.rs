//! Directional and coordinate-wise uncertainty products.
//!
//! Both products multiply an angular variance (how far the shifted-coefficient
//! correlation falls below the norm) by a frequency variance (the second
//! central moment of the frequency content), and both are bounded below by
//! 1/4. The directional product measures localization along a single integer
//! direction L; the Goh-Goodman product sums the coordinate axes.

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::lattice::{CoeffMap, Direction, LatticeIndex};
use crate::numeric::{KahanComplex, KahanSum};

/// Relative threshold below which a shifted-coefficient correlation is
/// treated as a structural zero rather than round-off.
pub const ZERO_CORRELATION_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpStatus {
    /// Correlation nonzero: the product is finite and at least 1/4.
    Finite,
    /// Correlation vanishes on a support of size >= 2: angular variance and
    /// the product are +infinity.
    InfiniteAngular,
    /// Single-point support: frequency variance is 0 and angular variance is
    /// infinite, so no value is assigned to the product.
    UndefinedMonomial,
}

impl UpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            UpStatus::Finite => "Finite",
            UpStatus::InfiniteAngular => "InfiniteAngular",
            UpStatus::UndefinedMonomial => "UndefinedMonomial",
        }
    }
}

/// Variances, commutator magnitude and the uncertainty product value.
#[derive(Debug, Clone, PartialEq)]
pub struct UpReport {
    pub var_angular: f64,
    pub var_frequency: f64,
    pub commutator_abs: f64,
    /// `None` exactly in the monomial case, where 0 * inf has no meaning.
    pub up: Option<f64>,
    pub status: UpStatus,
}

impl Serialize for UpReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        fn num_or_inf<S: SerializeStruct>(
            st: &mut S,
            name: &'static str,
            v: f64,
        ) -> std::result::Result<(), S::Error> {
            if v.is_infinite() {
                st.serialize_field(name, "inf")
            } else {
                st.serialize_field(name, &v)
            }
        }
        let mut st = serializer.serialize_struct("UpReport", 5)?;
        num_or_inf(&mut st, "var_angular", self.var_angular)?;
        num_or_inf(&mut st, "var_frequency", self.var_frequency)?;
        st.serialize_field("commutator_abs", &self.commutator_abs)?;
        match self.up {
            None => st.serialize_field("up", &None::<f64>)?,
            Some(v) if v.is_infinite() => st.serialize_field("up", "inf")?,
            Some(v) => st.serialize_field("up", &v)?,
        }
        st.serialize_field("status", self.status.as_str())?;
        st.end()
    }
}

/// First and second moments of an odd linear weight w(k) under |c_k|^2
/// (w(-k) = -w(k); both call sites pass linear forms).
///
/// The first moment folds k and -k into one term so that it cancels exactly,
/// not merely to round-off, on maps with |c_k| = |c_{-k}|.
fn moments(f: &CoeffMap, weight: impl Fn(&LatticeIndex) -> f64) -> (f64, f64) {
    let mut m1 = KahanSum::new();
    let mut m2 = KahanSum::new();
    for (k, c) in f.iter() {
        let w = weight(k);
        let p = c.norm_sqr();
        m2.add(w * w * p);
        let neg: Vec<i64> = k.coords.iter().map(|x| -x).collect();
        if neg.as_slice() > k.coords.as_slice() || neg == k.coords {
            // pair representative: fold the mirrored term in so that an even
            // map cancels term by term
            let q = f.get(&neg).norm_sqr();
            if neg == k.coords {
                m1.add(w * p);
            } else {
                m1.add(w * (p - q));
            }
        } else if !f.contains(&neg) {
            m1.add(w * p);
        }
    }
    (m1.value(), m2.value())
}

/// Correlation sum_k c_{k-s} conj(c_k) for an integer shift s.
fn shifted_correlation(f: &CoeffMap, shift: &[i64]) -> num_complex::Complex64 {
    let mut acc = KahanComplex::new();
    let mut scratch = vec![0i64; shift.len()];
    for (k, c) in f.iter() {
        for (i, (ki, si)) in k.coords.iter().zip(shift).enumerate() {
            scratch[i] = ki - si;
        }
        let g = f.get(&scratch);
        if g != num_complex::Complex64::ZERO {
            acc.add(g * c.conj());
        }
    }
    acc.value()
}

/// Mean of <L, k> under the weight |c_k|^2 / ||f||^2. Evaluated through the
/// same k/-k pairing as the variances, so it is exactly zero whenever
/// |c_k| = |c_{-k}|.
pub fn frequency_mean(f: &CoeffMap, l: &Direction) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptyCoeffMap);
    }
    if f.dim() != l.dim() {
        return Err(Error::DimensionMismatch(f.dim(), l.dim()));
    }
    let (m1, _) = moments(f, |k| l.dot(k) as f64);
    Ok(m1 / f.squared_norm())
}

/// Directional uncertainty product along L.
pub fn up_directional(f: &CoeffMap, l: &Direction) -> Result<UpReport> {
    if f.is_empty() {
        return Err(Error::EmptyCoeffMap);
    }
    if f.dim() != l.dim() {
        return Err(Error::DimensionMismatch(f.dim(), l.dim()));
    }

    let norm_sq = f.squared_norm();
    let corr = shifted_correlation(f, l.coords());
    let corr_abs = corr.norm();
    let l_sq = l.norm_sq() as f64;
    let commutator_abs = l_sq * corr_abs;

    if f.len() == 1 {
        return Ok(UpReport {
            var_angular: f64::INFINITY,
            var_frequency: 0.0,
            commutator_abs,
            up: None,
            status: UpStatus::UndefinedMonomial,
        });
    }

    let (m1, m2) = moments(f, |k| l.dot(k) as f64);
    let mean = m1 / norm_sq;
    let var_frequency = (m2 / norm_sq - mean * mean).max(0.0);

    if corr_abs < ZERO_CORRELATION_RTOL * norm_sq {
        return Ok(UpReport {
            var_angular: f64::INFINITY,
            var_frequency,
            commutator_abs,
            up: Some(f64::INFINITY),
            status: UpStatus::InfiniteAngular,
        });
    }

    let ratio = norm_sq / corr_abs;
    let var_angular = ratio * ratio - 1.0;
    let up = var_angular * var_frequency / l.norm_fourth();
    Ok(UpReport {
        var_angular,
        var_frequency,
        commutator_abs,
        up: Some(up),
        status: UpStatus::Finite,
    })
}

/// Goh-Goodman coordinate-wise uncertainty product.
pub fn up_gg(f: &CoeffMap) -> Result<UpReport> {
    if f.is_empty() {
        return Err(Error::EmptyCoeffMap);
    }
    let d = f.dim();
    let norm_sq = f.squared_norm();

    let mut axis_corr_abs = Vec::with_capacity(d);
    for axis in 0..d {
        let mut shift = vec![0i64; d];
        shift[axis] = 1;
        axis_corr_abs.push(shifted_correlation(f, &shift).norm());
    }
    let mut corr_sum = KahanSum::new();
    for &a in &axis_corr_abs {
        corr_sum.add(a);
    }
    let corr_sum = corr_sum.value();

    if f.len() == 1 {
        return Ok(UpReport {
            var_angular: f64::INFINITY,
            var_frequency: 0.0,
            commutator_abs: corr_sum,
            up: None,
            status: UpStatus::UndefinedMonomial,
        });
    }

    let mut var_frequency = KahanSum::new();
    for axis in 0..d {
        let (m1, m2) = moments(f, |k| k.coords[axis] as f64);
        let mean = m1 / norm_sq;
        var_frequency.add((m2 / norm_sq - mean * mean).max(0.0));
    }
    let var_frequency = var_frequency.value();

    if axis_corr_abs
        .iter()
        .all(|&a| a < ZERO_CORRELATION_RTOL * norm_sq)
    {
        return Ok(UpReport {
            var_angular: f64::INFINITY,
            var_frequency,
            commutator_abs: corr_sum,
            up: Some(f64::INFINITY),
            status: UpStatus::InfiniteAngular,
        });
    }

    let mut num = KahanSum::new();
    for &a in &axis_corr_abs {
        num.add(norm_sq * norm_sq - a * a);
    }
    let var_angular = num.value() / (corr_sum * corr_sum);
    let up = var_angular * var_frequency;
    Ok(UpReport {
        var_angular,
        var_frequency,
        commutator_abs: corr_sum,
        up: Some(up),
        status: UpStatus::Finite,
    })
}

/// Closed-form kernel families usable as oracles against the generic path.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// UP of (1 + cos 2 pi <L, x>)^n: 1/4 + 1/(8n - 2).
    PoweredCos { n: u32 },
    /// UP of the rectangular Dirichlet kernel D_N along L.
    DirichletRect { n: LatticeIndex, l: Direction },
    /// Limit of UP(F_n) in dimension d: (d+1)^2 (d+2)^2 / (6 d (d+3) (d+4)).
    FejerLimit { d: usize },
    /// The Goh-Goodman product of F_n has the same limit.
    FejerLimitGg { d: usize },
    /// Limit of the Fejer kernel placed along a direction: 3/10.
    DirectionalFejerLimit,
    /// UP of the minimal-angular-variance polynomial with longest thread
    /// length m0 + 1: m0 (m0+4)/12 tan^2(pi/(m0+2)) - 1/2.
    MinVarPoly { m0: u64 },
}

/// Evaluates the analytic uncertainty-product value for a kernel family.
pub fn closed_form_up(family: &ClosedForm) -> Result<f64> {
    match family {
        ClosedForm::PoweredCos { n } => {
            if *n < 1 {
                return Err(Error::invalid("powered cosine requires n >= 1"));
            }
            Ok(0.25 + 1.0 / (8.0 * *n as f64 - 2.0))
        }
        ClosedForm::DirichletRect { n, l } => {
            if n.dim() != l.dim() {
                return Err(Error::DimensionMismatch(n.dim(), l.dim()));
            }
            if n.coords.iter().any(|&x| x < 1) {
                return Err(Error::invalid("Dirichlet size must be positive componentwise"));
            }
            let mut ratio = 1.0f64;
            for (&nj, &lj) in n.coords.iter().zip(l.coords()) {
                let full = 2 * nj + 1;
                let overlap = full - lj.abs();
                if overlap <= 0 {
                    return Ok(f64::INFINITY);
                }
                ratio *= full as f64 / overlap as f64;
            }
            let var_angular = ratio * ratio - 1.0;
            let mut var_frequency = 0.0;
            for (&nj, &lj) in n.coords.iter().zip(l.coords()) {
                var_frequency += (lj * lj * nj * (nj + 1)) as f64 / 3.0;
            }
            Ok(var_angular * var_frequency / l.norm_fourth())
        }
        ClosedForm::FejerLimit { d } | ClosedForm::FejerLimitGg { d } => {
            if *d < 1 {
                return Err(Error::invalid("dimension must be >= 1"));
            }
            let d = *d as f64;
            Ok((d + 1.0).powi(2) * (d + 2.0).powi(2) / (6.0 * d * (d + 3.0) * (d + 4.0)))
        }
        ClosedForm::DirectionalFejerLimit => Ok(0.3),
        ClosedForm::MinVarPoly { m0 } => {
            if *m0 < 1 {
                return Err(Error::invalid("minimal-variance polynomial requires m0 >= 1"));
            }
            let m0 = *m0 as f64;
            let t = (std::f64::consts::PI / (m0 + 2.0)).tan();
            Ok(m0 * (m0 + 4.0) / 12.0 * t * t - 0.5)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn map(dim: usize, entries: &[(&[i64], f64)]) -> CoeffMap {
        CoeffMap::from_entries(
            dim,
            entries.iter().map(|(k, v)| (LatticeIndex::from(*k), c(*v))),
        )
        .unwrap()
    }

    #[test]
    fn powered_cos_n1_is_5_over_12() {
        // p_1 = {-L: 1/2, 0: 1, L: 1/2} has UP = 1/4 + 1/6 = 5/12 for any L
        for l_coords in [vec![1], vec![3], vec![1, 1], vec![2, -1]] {
            let l = Direction::new(l_coords.clone()).unwrap();
            let d = l.dim();
            let f = CoeffMap::from_entries(
                d,
                [
                    (l.as_index().scaled(-1), c(0.5)),
                    (LatticeIndex::zero(d), c(1.0)),
                    (l.as_index().clone(), c(0.5)),
                ],
            )
            .unwrap();
            let rep = up_directional(&f, &l).unwrap();
            assert_eq!(rep.status, UpStatus::Finite);
            assert!((rep.up.unwrap() - 5.0 / 12.0).abs() < 1e-14, "L={:?}", l_coords);
        }
    }

    #[test]
    fn monomial_is_undefined() {
        let f = map(2, &[(&[3, -1], 3.7)]);
        let l = Direction::new(vec![1, 0]).unwrap();
        let rep = up_directional(&f, &l).unwrap();
        assert_eq!(rep.status, UpStatus::UndefinedMonomial);
        assert_eq!(rep.var_frequency, 0.0);
        assert!(rep.var_angular.is_infinite());
        assert!(rep.up.is_none());

        let rep = up_gg(&f).unwrap();
        assert_eq!(rep.status, UpStatus::UndefinedMonomial);
        assert!(rep.up.is_none());
    }

    #[test]
    fn dirichlet_1d_n2() {
        // D_2 in one dimension: UP = (25/16 - 1) * 2 = 9/8
        let f = map(1, &[(&[-2], 1.0), (&[-1], 1.0), (&[0], 1.0), (&[1], 1.0), (&[2], 1.0)]);
        let l = Direction::new(vec![1]).unwrap();
        let rep = up_directional(&f, &l).unwrap();
        assert!((rep.up.unwrap() - 9.0 / 8.0).abs() < 1e-14);
        assert!((rep.var_angular - 9.0 / 16.0).abs() < 1e-14);
        assert!((rep.var_frequency - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gg_dirichlet_2d() {
        // D_(1,1): UP_GG = 5/8 * 4/3 = 5/6
        let mut entries = vec![];
        for a in -1..=1 {
            for b in -1..=1 {
                entries.push((LatticeIndex::new(vec![a, b]), c(1.0)));
            }
        }
        let f = CoeffMap::from_entries(2, entries).unwrap();
        let rep = up_gg(&f).unwrap();
        assert!((rep.up.unwrap() - 5.0 / 6.0).abs() < 1e-13);
        assert!((rep.var_angular - 5.0 / 8.0).abs() < 1e-14);
        assert!((rep.var_frequency - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn gg_no_adjacent_pairs_is_infinite() {
        let f = map(2, &[(&[0, 0], 1.0), (&[2, 0], 1.0)]);
        let rep = up_gg(&f).unwrap();
        assert_eq!(rep.status, UpStatus::InfiniteAngular);
        assert_eq!(rep.up, Some(f64::INFINITY));
    }

    #[test]
    fn directional_disjoint_shift_is_infinite() {
        let f = map(1, &[(&[0], 1.0), (&[5], 1.0)]);
        let l = Direction::new(vec![2]).unwrap();
        let rep = up_directional(&f, &l).unwrap();
        assert_eq!(rep.status, UpStatus::InfiniteAngular);
        assert_eq!(rep.up, Some(f64::INFINITY));
        assert!(rep.var_frequency > 0.0);
    }

    #[test]
    fn closed_forms() {
        assert!((closed_form_up(&ClosedForm::FejerLimit { d: 1 }).unwrap() - 0.3).abs() < 1e-15);
        assert!((closed_form_up(&ClosedForm::FejerLimit { d: 2 }).unwrap() - 0.4).abs() < 1e-15);
        assert!(
            (closed_form_up(&ClosedForm::FejerLimit { d: 3 }).unwrap() - 100.0 / 189.0).abs()
                < 1e-15
        );
        assert!(
            (closed_form_up(&ClosedForm::PoweredCos { n: 5 }).unwrap() - (0.25 + 1.0 / 38.0))
                .abs()
                < 1e-15
        );
        assert_eq!(closed_form_up(&ClosedForm::DirectionalFejerLimit).unwrap(), 0.3);
        // m0 -> infinity limit of the minimal-variance product
        let v = closed_form_up(&ClosedForm::MinVarPoly { m0: 1_000_000 }).unwrap();
        let limit = std::f64::consts::PI.powi(2) / 12.0 - 0.5;
        assert!((v - limit).abs() < 1e-5);
        assert!(closed_form_up(&ClosedForm::PoweredCos { n: 0 }).is_err());
    }

    #[test]
    fn dirichlet_closed_form_matches_direct() {
        let n = LatticeIndex::new(vec![2]);
        let l = Direction::new(vec![1]).unwrap();
        let v = closed_form_up(&ClosedForm::DirichletRect { n, l }).unwrap();
        assert!((v - 9.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn shift_modulate_preserves_up() {
        // g(x) = 2.5 e^{2 pi i <(5,-1), x>} f(x - (0.3, 0.7)) for the squared
        // raised cosine along (1,1)
        let l = Direction::new(vec![1, 1]).unwrap();
        let f = crate::kernels::powered_cos(2, &l).unwrap();
        let g = f
            .shift_modulate(&LatticeIndex::new(vec![5, -1]), &[0.3, 0.7], 2.5)
            .unwrap();
        let a = up_directional(&f, &l).unwrap().up.unwrap();
        let b = up_directional(&g, &l).unwrap().up.unwrap();
        assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn evenness_gives_exact_zero_mean() {
        let f = map(2, &[(&[2, 1], 0.37), (&[-2, -1], 0.37), (&[0, 0], 0.11)]);
        let l = Direction::new(vec![3, -1]).unwrap();
        let (m1, _) = moments(&f, |k| l.dot(k) as f64);
        assert_eq!(m1, 0.0);
    }

    #[test]
    fn report_serializes_inf_as_string() {
        let f = map(2, &[(&[0, 0], 1.0), (&[2, 0], 1.0)]);
        let rep = up_gg(&f).unwrap();
        let s = serde_json::to_string(&rep).unwrap();
        assert!(s.contains("\"up\":\"inf\""));
        assert!(s.contains("\"status\":\"InfiniteAngular\""));

        let f = map(2, &[(&[0, 0], 1.0)]);
        let rep = up_gg(&f).unwrap();
        let s = serde_json::to_string(&rep).unwrap();
        assert!(s.contains("\"up\":null"));
    }
}
