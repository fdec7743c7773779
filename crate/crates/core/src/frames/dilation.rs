//! Integer dilation matrices with |det| = 2 and expanding spectrum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticeIndex;

/// Dense square integer matrix with exact i128 arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct IMat {
    pub d: usize,
    pub e: Vec<i128>,
}

impl IMat {
    pub fn identity(d: usize) -> Self {
        let mut e = vec![0; d * d];
        for i in 0..d {
            e[i * d + i] = 1;
        }
        Self { d, e }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let d = rows.len();
        let mut e = Vec::with_capacity(d * d);
        for row in rows {
            e.extend(row.iter().map(|&x| x as i128));
        }
        Self { d, e }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.e[i * self.d + j]
    }

    pub fn transpose(&self) -> IMat {
        let d = self.d;
        let mut e = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                e[j * d + i] = self.get(i, j);
            }
        }
        IMat { d, e }
    }

    /// Checked product; `None` on i128 overflow.
    pub fn mul(&self, other: &IMat) -> Option<IMat> {
        let d = self.d;
        let mut e = vec![0i128; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: i128 = 0;
                for k in 0..d {
                    acc = acc.checked_add(self.get(i, k).checked_mul(other.get(k, j))?)?;
                }
                e[i * d + j] = acc;
            }
        }
        Some(IMat { d, e })
    }

    pub fn mul_vec(&self, v: &[i128]) -> Option<Vec<i128>> {
        let d = self.d;
        let mut out = vec![0i128; d];
        for i in 0..d {
            let mut acc: i128 = 0;
            for k in 0..d {
                acc = acc.checked_add(self.get(i, k).checked_mul(v[k])?)?;
            }
            out[i] = acc;
        }
        Some(out)
    }

    fn minor(&self, skip_i: usize, skip_j: usize) -> IMat {
        let d = self.d;
        let mut e = Vec::with_capacity((d - 1) * (d - 1));
        for i in 0..d {
            if i == skip_i {
                continue;
            }
            for j in 0..d {
                if j == skip_j {
                    continue;
                }
                e.push(self.get(i, j));
            }
        }
        IMat { d: d - 1, e }
    }

    /// Cofactor-expansion determinant; fine for the small d used here.
    pub fn det(&self) -> Option<i128> {
        match self.d {
            0 => Some(1),
            1 => Some(self.e[0]),
            2 => self
                .get(0, 0)
                .checked_mul(self.get(1, 1))?
                .checked_sub(self.get(0, 1).checked_mul(self.get(1, 0))?),
            _ => {
                let mut acc: i128 = 0;
                for j in 0..self.d {
                    let m = self.minor(0, j).det()?;
                    let term = self.get(0, j).checked_mul(m)?;
                    acc = if j % 2 == 0 {
                        acc.checked_add(term)?
                    } else {
                        acc.checked_sub(term)?
                    };
                }
                Some(acc)
            }
        }
    }

    /// Adjugate: adj(M) M = det(M) I.
    pub fn adjugate(&self) -> Option<IMat> {
        let d = self.d;
        if d == 1 {
            return Some(IMat { d, e: vec![1] });
        }
        let mut e = vec![0i128; d * d];
        for i in 0..d {
            for j in 0..d {
                let c = self.minor(i, j).det()?;
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                e[j * d + i] = sign * c;
            }
        }
        Some(IMat { d, e })
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.e.iter().map(|&x| x as f64).collect()
    }
}

/// Monic characteristic polynomial coefficients [c_1, ..., c_d] of an integer
/// matrix (lambda^d + c_1 lambda^{d-1} + ... + c_d), via Faddeev-LeVerrier.
fn char_poly(a: &IMat) -> Option<Vec<i128>> {
    let d = a.d;
    let mut coeffs = Vec::with_capacity(d);
    let mut m = IMat::identity(d);
    for k in 1..=d {
        m = a.mul(&m)?;
        let tr: i128 = (0..d).map(|i| m.get(i, i)).sum();
        let c = -tr / k as i128; // exact by construction
        coeffs.push(c);
        for i in 0..d {
            m.e[i * d + i] = m.e[i * d + i].checked_add(c)?;
        }
    }
    Some(coeffs)
}

/// Roots of a monic polynomial by Durand-Kerner iteration.
fn poly_roots(lower_coeffs: &[f64]) -> Vec<Complex64> {
    let d = lower_coeffs.len();
    if d == 0 {
        return vec![];
    }
    let eval = |z: Complex64| -> Complex64 {
        let mut p = Complex64::ONE;
        for &c in lower_coeffs {
            p = p * z + c;
        }
        p
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..d).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..500 {
        let mut delta_max = 0.0f64;
        for i in 0..d {
            let mut denom = Complex64::ONE;
            for j in 0..d {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom == Complex64::ZERO {
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta_max = delta_max.max(step.norm());
        }
        if delta_max < 1e-14 {
            break;
        }
    }
    roots
}

/// An integer matrix with |det| = 2 and all eigenvalues of modulus > 1,
/// together with the nontrivial coset representative k0 of Z^d / A Z^d.
#[derive(Debug, Clone)]
pub struct DilationMatrix {
    dim: usize,
    rows: Vec<Vec<i64>>,
    det: i64,
    k0: LatticeIndex,
    eigenvalues: Vec<Complex64>,
    min_eig_modulus: f64,
}

impl DilationMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    pub fn k0(&self) -> &LatticeIndex {
        &self.k0
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn min_eig_modulus(&self) -> f64 {
        self.min_eig_modulus
    }

    pub(crate) fn a_mat(&self) -> IMat {
        IMat::from_rows(&self.rows)
    }

    pub(crate) fn b_mat(&self) -> IMat {
        self.a_mat().transpose()
    }
}

/// Membership of v in M Z^d, decided by adj(M) v = 0 (mod 2); valid because
/// |det M| = 2.
fn in_sublattice(adj: &IMat, v: &[i128]) -> bool {
    adj.mul_vec(v)
        .map(|w| w.iter().all(|x| x % 2 == 0))
        .unwrap_or(false)
}

/// Validates a dilation matrix: square, integer, |det| = 2, every eigenvalue
/// of modulus > 1 (no closer to the unit circle than 1e-9), and finds k0 by
/// enumerating the residues {0,1}^d. The chosen k0 is outside both A Z^d and
/// A^T Z^d, which the mask construction relies on.
pub fn validate_dilation(rows: &[Vec<i64>]) -> Result<DilationMatrix> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::InvalidDilation("matrix must be nonempty".into()));
    }
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidDilation("matrix must be square".into()));
    }
    let a = IMat::from_rows(rows);
    let det = a
        .det()
        .ok_or_else(|| Error::InvalidDilation("determinant overflow".into()))?;
    if det.abs() != 2 {
        return Err(Error::InvalidDilation(format!(
            "determinant must be +/-2, got {det}"
        )));
    }

    let coeffs = char_poly(&a)
        .ok_or_else(|| Error::InvalidDilation("characteristic polynomial overflow".into()))?;
    let eigenvalues = poly_roots(&coeffs.iter().map(|&c| c as f64).collect::<Vec<_>>());
    let min_eig_modulus = eigenvalues
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min);
    if min_eig_modulus <= 1.0 + 1e-9 {
        return Err(Error::InvalidDilation(format!(
            "all eigenvalues must have modulus > 1; smallest is {min_eig_modulus:.12}"
        )));
    }

    let adj_a = a
        .adjugate()
        .ok_or_else(|| Error::InvalidDilation("adjugate overflow".into()))?;
    let adj_b = a
        .transpose()
        .adjugate()
        .ok_or_else(|| Error::InvalidDilation("adjugate overflow".into()))?;
    // digit order: coordinate 0 is the least significant bit, so (1,0,...)
    // is tried before (0,1,...)
    let mut k0 = None;
    for t in 1u64..(1 << d) {
        let v: Vec<i128> = (0..d).map(|i| ((t >> i) & 1) as i128).collect();
        if !in_sublattice(&adj_a, &v) && !in_sublattice(&adj_b, &v) {
            k0 = Some(LatticeIndex::new(v.iter().map(|&x| x as i64).collect()));
            break;
        }
    }
    let k0 = k0.ok_or_else(|| {
        Error::InvalidDilation("no residue outside both A Z^d and A^T Z^d".into())
    })?;

    Ok(DilationMatrix {
        dim: d,
        rows: rows.to_vec(),
        det: det as i64,
        k0,
        eigenvalues,
        min_eig_modulus,
    })
}

/// The quincunx matrix [[1, 1], [-1, 1]].
pub fn quincunx() -> DilationMatrix {
    validate_dilation(&[vec![1, 1], vec![-1, 1]]).expect("quincunx is a valid dilation")
}

/// The dyadic 1-d dilation [2].
pub fn dyadic() -> DilationMatrix {
    validate_dilation(&[vec![2]]).expect("[2] is a valid dilation")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quincunx_is_valid() {
        let m = quincunx();
        assert_eq!(m.det(), 2);
        assert_eq!(m.k0().coords, vec![1, 0]);
        for z in m.eigenvalues() {
            assert!((z.norm() - std::f64::consts::SQRT_2).abs() < 1e-10);
        }
    }

    #[test]
    fn dyadic_is_valid() {
        let m = dyadic();
        assert_eq!(m.k0().coords, vec![1]);
        assert!((m.min_eig_modulus() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_determinant_rejected() {
        assert!(validate_dilation(&[vec![2, 0], vec![0, 2]]).is_err());
        assert!(validate_dilation(&[vec![1, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn unit_eigenvalue_rejected() {
        // det = 2 but one eigenvalue is 1
        assert!(validate_dilation(&[vec![1, 0], vec![0, 2]]).is_err());
    }

    #[test]
    fn non_square_rejected() {
        assert!(validate_dilation(&[vec![1, 2]]).is_err());
        assert!(validate_dilation(&[]).is_err());
    }

    #[test]
    fn root_of_two_matrix() {
        // [[0,1],[2,0]] has eigenvalues +/- sqrt(2)
        let m = validate_dilation(&[vec![0, 1], vec![2, 0]]).unwrap();
        assert!((m.min_eig_modulus() - std::f64::consts::SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn adjugate_identity() {
        let a = IMat::from_rows(&[vec![1, 1], vec![-1, 1]]);
        let adj = a.adjugate().unwrap();
        let prod = adj.mul(&a).unwrap();
        let det = a.det().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(prod.get(i, j), if i == j { det } else { 0 });
            }
        }
    }
}
