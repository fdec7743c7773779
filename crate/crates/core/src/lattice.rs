//! Sparse multivariate Fourier coefficient maps and integer-lattice geometry.
//!
//! A trigonometric polynomial (or truncated Fourier series) is represented by
//! a finite map from integer lattice points to complex amplitudes. The
//! canonical sparse form never stores an amplitude that is exactly zero, so
//! iteration is proportional to the true support and membership is O(1).

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeSeq, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{KahanComplex, KahanSum};

/// Fixed-seed hasher so iteration order is a function of insertion history
/// alone, never of process-level randomness.
pub type FixedState = BuildHasherDefault<DefaultHasher>;

/// A point of the integer lattice Z^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeIndex {
    pub coords: Vec<i64>,
}

impl LatticeIndex {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    pub fn zero(dim: usize) -> Self {
        Self { coords: vec![0; dim] }
    }

    /// Standard basis vector e_j (zero-based axis).
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut coords = vec![0; dim];
        coords[axis] = 1;
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, other: &[i64]) -> i64 {
        debug_assert_eq!(self.coords.len(), other.len());
        self.coords.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> i64 {
        self.coords.iter().map(|a| a * a).sum()
    }

    pub fn add(&self, other: &[i64]) -> LatticeIndex {
        LatticeIndex::new(
            self.coords
                .iter()
                .zip(other)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &[i64]) -> LatticeIndex {
        LatticeIndex::new(
            self.coords
                .iter()
                .zip(other)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scaled(&self, m: i64) -> LatticeIndex {
        LatticeIndex::new(self.coords.iter().map(|a| a * m).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&a| a == 0)
    }
}

impl From<Vec<i64>> for LatticeIndex {
    fn from(coords: Vec<i64>) -> Self {
        Self { coords }
    }
}

impl From<&[i64]> for LatticeIndex {
    fn from(coords: &[i64]) -> Self {
        Self { coords: coords.to_vec() }
    }
}

/// A nonzero integer vector defining the directional operators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Direction {
    index: LatticeIndex,
}

impl Direction {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("direction must have dimension >= 1"));
        }
        if coords.iter().all(|&c| c == 0) {
            return Err(Error::invalid("direction must be a nonzero vector"));
        }
        Ok(Self { index: LatticeIndex::new(coords) })
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn coords(&self) -> &[i64] {
        &self.index.coords
    }

    pub fn as_index(&self) -> &LatticeIndex {
        &self.index
    }

    pub fn dot(&self, k: &LatticeIndex) -> i64 {
        self.index.dot(&k.coords)
    }

    /// ||L||^2 as an exact integer.
    pub fn norm_sq(&self) -> i64 {
        self.index.norm_sq()
    }

    /// ||L||^4, squared once at the end in integer arithmetic so the
    /// normalization of the uncertainty product carries no cancellation.
    pub fn norm_fourth(&self) -> f64 {
        let n = self.norm_sq() as i128;
        (n * n) as f64
    }
}

/// Sparse map from lattice points to complex Fourier amplitudes.
#[derive(Debug, Clone, Default)]
pub struct CoeffMap {
    dim: usize,
    entries: HashMap<LatticeIndex, Complex64, FixedState>,
}

impl CoeffMap {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: HashMap::default() }
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        Self {
            dim,
            entries: HashMap::with_capacity_and_hasher(cap, FixedState::default()),
        }
    }

    /// Builds a map from (index, amplitude) pairs. Duplicate indices
    /// accumulate; exact zeros are dropped.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LatticeIndex, Complex64)>,
    {
        let mut map = CoeffMap::new(dim);
        for (k, c) in entries {
            map.accumulate(k, c)?;
        }
        Ok(map)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Amplitude at `k`; zero when `k` is outside the support.
    pub fn get(&self, k: &[i64]) -> Complex64 {
        self.entries.get(k).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        self.entries.contains_key(k)
    }

    /// Replaces the amplitude at `k` (removing the entry when it is zero).
    pub fn set(&mut self, k: LatticeIndex, c: Complex64) -> Result<()> {
        self.check_dim(k.dim())?;
        if c == Complex64::ZERO {
            self.entries.remove(&k);
        } else {
            self.entries.insert(k, c);
        }
        Ok(())
    }

    /// Adds `c` to the amplitude at `k`, keeping the sparse form canonical.
    pub fn accumulate(&mut self, k: LatticeIndex, c: Complex64) -> Result<()> {
        self.check_dim(k.dim())?;
        match self.entries.entry(k) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                let v = e.get() + c;
                if v == Complex64::ZERO {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                if c != Complex64::ZERO {
                    e.insert(c);
                }
            }
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeIndex, &Complex64)> {
        self.entries.iter()
    }

    /// Entries sorted lexicographically by index, for byte-stable output.
    pub fn sorted_entries(&self) -> Vec<(&LatticeIndex, Complex64)> {
        let mut v: Vec<_> = self.entries.iter().map(|(k, c)| (k, *c)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Sum of |c_k|^2, compensated.
    pub fn squared_norm(&self) -> f64 {
        let mut acc = KahanSum::new();
        for c in self.entries.values() {
            acc.add(c.norm_sqr());
        }
        acc.value()
    }

    /// Parseval pairing sum_k c_k(f) conj(c_k(g)).
    pub fn inner(&self, other: &CoeffMap) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut acc = KahanComplex::new();
        for (k, c) in &self.entries {
            let g = other.get(&k.coords);
            if g != Complex64::ZERO {
                acc.add(c * g.conj());
            }
        }
        Ok(acc.value())
    }

    /// g(x) = a e^{2 pi i <K, x>} f(x - x0), i.e. c_k(g) = a e^{-2 pi i <k-K, x0>} c_{k-K}(f).
    /// These manipulations do not change the uncertainty product.
    pub fn shift_modulate(&self, shift: &LatticeIndex, x0: &[f64], a: f64) -> Result<CoeffMap> {
        self.check_dim(shift.dim())?;
        self.check_dim(x0.len())?;
        if a == 0.0 {
            return Err(Error::invalid("scale factor a must be nonzero"));
        }
        let mut out = CoeffMap::with_capacity(self.dim, self.len());
        for (k, c) in &self.entries {
            let phase: f64 = k
                .coords
                .iter()
                .zip(x0)
                .map(|(&ki, &xi)| ki as f64 * xi)
                .sum();
            let factor = Complex64::from_polar(a.abs(), -std::f64::consts::TAU * phase)
                * if a < 0.0 { -1.0 } else { 1.0 };
            out.entries.insert(k.add(&shift.coords), c * factor);
        }
        Ok(out)
    }

    /// The modulation operator along L: (A_L f)_k = c_{k-L}. Support shifts
    /// by +L and the norm is preserved.
    pub fn modulate(&self, l: &Direction) -> Result<CoeffMap> {
        self.check_dim(l.dim())?;
        let mut out = CoeffMap::with_capacity(self.dim, self.len());
        for (k, c) in &self.entries {
            out.entries.insert(k.add(l.coords()), *c);
        }
        Ok(out)
    }

    /// The scaled directional derivative along L: (B_L f)_k = -<L, k> c_k.
    /// Entries with <L, k> = 0 vanish.
    pub fn derivative_along(&self, l: &Direction) -> Result<CoeffMap> {
        self.check_dim(l.dim())?;
        let mut out = CoeffMap::with_capacity(self.dim, self.len());
        for (k, c) in &self.entries {
            let w = l.dot(k);
            if w != 0 {
                out.entries.insert(k.clone(), -(w as f64) * c);
            }
        }
        Ok(out)
    }

    /// Interprets a dense tensor of samples as coefficients on a centered
    /// window: index zero sits at the tensor center and even lengths are
    /// biased toward negative indices. `data` is row-major.
    pub fn from_discrete_signal(shape: &[usize], data: &[Complex64]) -> Result<CoeffMap> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::invalid("tensor must be nonempty in every axis"));
        }
        let total: usize = shape.iter().product();
        if data.len() != total {
            return Err(Error::invalid(format!(
                "tensor data length {} does not match shape product {}",
                data.len(),
                total
            )));
        }
        let dim = shape.len();
        let mut out = CoeffMap::with_capacity(dim, total);
        let mut coords = vec![0usize; dim];
        for (flat, &c) in data.iter().enumerate() {
            let mut rem = flat;
            for axis in (0..dim).rev() {
                coords[axis] = rem % shape[axis];
                rem /= shape[axis];
            }
            if c != Complex64::ZERO {
                let k: Vec<i64> = coords
                    .iter()
                    .zip(shape)
                    .map(|(&i, &n)| i as i64 - (n / 2) as i64)
                    .collect();
                out.entries.insert(LatticeIndex::new(k), c);
            }
        }
        Ok(out)
    }

    /// Reads the amplitudes back on the same centered window; entries outside
    /// the window are ignored. Round-trip with `from_discrete_signal` is exact.
    pub fn to_discrete_signal(&self, shape: &[usize]) -> Result<Vec<Complex64>> {
        if shape.len() != self.dim {
            return Err(Error::DimensionMismatch(shape.len(), self.dim));
        }
        if shape.contains(&0) {
            return Err(Error::invalid("tensor must be nonempty in every axis"));
        }
        let total: usize = shape.iter().product();
        let mut data = vec![Complex64::ZERO; total];
        let mut k = vec![0i64; self.dim];
        for (flat, slot) in data.iter_mut().enumerate() {
            let mut rem = flat;
            for axis in (0..self.dim).rev() {
                let i = rem % shape[axis];
                rem /= shape[axis];
                k[axis] = i as i64 - (shape[axis] / 2) as i64;
            }
            *slot = self.get(&k);
        }
        Ok(data)
    }

    /// Rescales every amplitude.
    pub fn scaled(&self, a: Complex64) -> CoeffMap {
        let mut out = CoeffMap::with_capacity(self.dim, self.len());
        if a == Complex64::ZERO {
            return out;
        }
        for (k, c) in &self.entries {
            out.entries.insert(k.clone(), c * a);
        }
        out
    }

    /// Parses the JSON form produced by the `Serialize` impl.
    pub fn from_json_str(s: &str) -> Result<CoeffMap> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        let dim = v
            .get("dim")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::Serialization("missing integer field `dim`".into()))?
            as usize;
        if dim == 0 {
            return Err(Error::Serialization("dim must be >= 1".into()));
        }
        let rows = v
            .get("entries")
            .and_then(|e| e.as_array())
            .ok_or_else(|| Error::Serialization("missing array field `entries`".into()))?;
        let mut map = CoeffMap::with_capacity(dim, rows.len());
        for row in rows {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Serialization("entry rows must be arrays".into()))?;
            if row.len() != dim + 2 {
                return Err(Error::Serialization(format!(
                    "entry row must have {} elements (d indices, re, im)",
                    dim + 2
                )));
            }
            let mut coords = Vec::with_capacity(dim);
            for item in &row[..dim] {
                coords.push(
                    item.as_i64()
                        .ok_or_else(|| Error::Serialization("indices must be integers".into()))?,
                );
            }
            let re = row[dim]
                .as_f64()
                .ok_or_else(|| Error::Serialization("re must be a number".into()))?;
            let im = row[dim + 1]
                .as_f64()
                .ok_or_else(|| Error::Serialization("im must be a number".into()))?;
            map.accumulate(LatticeIndex::new(coords), Complex64::new(re, im))?;
        }
        Ok(map)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("CoeffMap serialization cannot fail")
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            Err(Error::DimensionMismatch(self.dim, other))
        } else {
            Ok(())
        }
    }
}

impl PartialEq for CoeffMap {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.entries == other.entries
    }
}

// Lets map lookups take `&[i64]` without allocating a key. Consistent with
// the derived `Hash`/`Eq` because a `Vec<i64>` hashes like its slice.
impl std::borrow::Borrow<[i64]> for LatticeIndex {
    fn borrow(&self) -> &[i64] {
        &self.coords
    }
}

impl Serialize for CoeffMap {
    /// `{"dim": d, "entries": [[k_1, ..., k_d, re, im], ...]}` with entries
    /// sorted lexicographically by index.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Row<'a>(&'a LatticeIndex, Complex64);
        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.dim() + 2))?;
                for c in &self.0.coords {
                    seq.serialize_element(c)?;
                }
                seq.serialize_element(&self.1.re)?;
                seq.serialize_element(&self.1.im)?;
                seq.end()
            }
        }
        struct Rows<'a>(&'a CoeffMap);
        impl Serialize for Rows<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let sorted = self.0.sorted_entries();
                let mut seq = serializer.serialize_seq(Some(sorted.len()))?;
                for (k, c) in sorted {
                    seq.serialize_element(&Row(k, c))?;
                }
                seq.end()
            }
        }
        let mut st = serializer.serialize_struct("CoeffMap", 2)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("entries", &Rows(self))?;
        st.end()
    }
}
