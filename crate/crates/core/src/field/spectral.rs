use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::Grid;
use super::norms::pairwise_sum;
use crate::error::{Error, Result};
use crate::fft;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How many components a field carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Vector,
    /// Row-major 3×3 tensor, component `3i + j`.
    Tensor,
}

impl Shape {
    pub fn ncomp(self) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector => 3,
            Shape::Tensor => 9,
        }
    }

    pub fn from_ncomp(ncomp: usize) -> Option<Self> {
        match ncomp {
            1 => Some(Shape::Scalar),
            3 => Some(Shape::Vector),
            9 => Some(Shape::Tensor),
            _ => None,
        }
    }
}

/// A real periodic field stored as Fourier coefficients on an `n³` grid.
///
/// `comps[c][idx]` is the coefficient of `e^{ik·x}` for component `c` at the
/// wavenumber `grid.k_of(idx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    comps: Vec<Vec<Complex64>>,
    time: f64,
}

impl SpectralField {
    pub fn zeros(grid: Grid, shape: Shape) -> Self {
        SpectralField {
            grid,
            comps: vec![vec![ZERO; grid.len()]; shape.ncomp()],
            time: 0.0,
        }
    }

    pub fn scalar_zeros(grid: Grid) -> Self {
        Self::zeros(grid, Shape::Scalar)
    }

    pub fn vector_zeros(grid: Grid) -> Self {
        Self::zeros(grid, Shape::Vector)
    }

    pub fn from_coeffs(grid: Grid, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if Shape::from_ncomp(comps.len()).is_none() {
            return Err(Error::Shape(format!(
                "expected 1, 3 or 9 components, got {}",
                comps.len()
            )));
        }
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Shape(format!(
                "every component needs {} coefficients",
                grid.len()
            )));
        }
        Ok(SpectralField {
            grid,
            comps,
            time: 0.0,
        })
    }

    /// Transforms physical samples (one array per component) to coefficients.
    pub fn from_physical(grid: Grid, values: &[Vec<f64>]) -> Result<Self> {
        if values.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::Shape(format!(
                "every component needs {} samples",
                grid.len()
            )));
        }
        let refs: Vec<&[f64]> = values.iter().map(|v| v.as_slice()).collect();
        Self::from_coeffs(grid, fft::analyze_real(grid.n(), &refs))
    }

    /// Samples `f` at every grid point and transforms.
    pub fn from_fn<F>(grid: Grid, shape: Shape, f: F) -> Self
    where
        F: Fn([f64; 3], &mut [f64]),
    {
        let ncomp = shape.ncomp();
        let mut values = vec![vec![0.0; grid.len()]; ncomp];
        let mut buf = vec![0.0; ncomp];
        for idx in 0..grid.len() {
            f(grid.point(idx), &mut buf);
            for c in 0..ncomp {
                values[c][idx] = buf[c];
            }
        }
        Self::from_physical(grid, &values).expect("shape is consistent by construction")
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn shape(&self) -> Shape {
        Shape::from_ncomp(self.comps.len()).expect("validated at construction")
    }

    #[inline]
    pub fn is_vector(&self) -> bool {
        self.comps.len() == 3
    }

    #[inline]
    pub fn is_scalar(&self) -> bool {
        self.comps.len() == 1
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn comps(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    /// Coefficient of component `c` at wavenumber `k` (zero if not representable).
    pub fn coeff(&self, c: usize, k: [i64; 3]) -> Complex64 {
        self.grid
            .index_of(k)
            .map(|idx| self.comps[c][idx])
            .unwrap_or(ZERO)
    }

    pub fn set_coeff(&mut self, c: usize, k: [i64; 3], v: Complex64) {
        if let Some(idx) = self.grid.index_of(k) {
            self.comps[c][idx] = v;
        }
    }

    /// Physical samples on the native grid, one array per component.
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        let refs: Vec<&[Complex64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        fft::synthesize_real(self.grid.n(), &refs)
    }

    /// Coefficients zero-padded onto a finer grid; the field is unchanged as a
    /// function. Nyquist coefficients are split evenly between `±n/2`.
    pub fn padded(&self, target: Grid) -> Result<SpectralField> {
        if target.n() < self.grid.n() {
            return Err(Error::param(
                "target",
                "padding target must be at least as fine as the source grid",
            ));
        }
        if target.n() == self.grid.n() {
            return Ok(self.clone());
        }
        let half = (self.grid.n() / 2) as i64;
        let mut out = SpectralField::zeros(target, self.shape()).with_time(self.time);
        for idx in 0..self.grid.len() {
            if self.comps.iter().all(|c| c[idx] == ZERO) {
                continue;
            }
            let k = self.grid.k_of(idx);
            let options: Vec<Vec<i64>> = k
                .iter()
                .map(|&ki| if ki == half { vec![half, -half] } else { vec![ki] })
                .collect();
            let weight = 1.0 / (options.iter().map(|o| o.len()).product::<usize>() as f64);
            for &a in &options[0] {
                for &b in &options[1] {
                    for &c in &options[2] {
                        let t = target.index_of([a, b, c]).expect("padded modes fit");
                        for (dst, src) in out.comps.iter_mut().zip(self.comps.iter()) {
                            dst[t] += src[idx] * weight;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Physical samples on the grid refined `factor` times per axis.
    pub fn to_physical_oversampled(&self, factor: usize) -> Vec<Vec<f64>> {
        let target = Grid::new(self.grid.n() * factor.max(1)).expect("power of two");
        self.padded(target).expect("finer target").to_physical()
    }

    /// Restriction to a coarser grid (the left inverse of [`padded`](Self::padded));
    /// fails if a nonzero mode lies beyond the target's Nyquist wavenumber.
    pub fn restricted(&self, target: Grid) -> Result<SpectralField> {
        let mut out = SpectralField::zeros(target, self.shape()).with_time(self.time);
        for idx in 0..self.grid.len() {
            if self.comps.iter().all(|c| c[idx] == ZERO) {
                continue;
            }
            let k = self.grid.k_of(idx);
            let half = (target.n() / 2) as i64;
            if k.iter().any(|ki| ki.abs() > half) {
                return Err(Error::Precondition(format!(
                    "mode {k:?} does not fit on an n={} grid",
                    target.n()
                )));
            }
            // `±n/2` both land on the target's Nyquist index, which undoes the
            // even split made by `padded`.
            let n = target.n() as i64;
            let t = k
                .iter()
                .fold(0usize, |acc, ki| acc * target.n() + ki.rem_euclid(n) as usize);
            for (dst, src) in out.comps.iter_mut().zip(self.comps.iter()) {
                dst[t] += src[idx];
            }
        }
        Ok(out)
    }

    /// Multiplies every mode by a real symbol of the wavenumber.
    pub fn apply_multiplier<F: Fn([i64; 3]) -> f64>(&self, symbol: F) -> SpectralField {
        let mut out = self.clone();
        for idx in 0..self.grid.len() {
            let m = symbol(self.grid.k_of(idx));
            for c in out.comps.iter_mut() {
                c[idx] *= m;
            }
        }
        out
    }

    /// Same as [`apply_multiplier`](Self::apply_multiplier) but the symbol
    /// only sees `|k|²`; values are cached per distinct `|k|²`.
    pub fn apply_radial_multiplier<F: Fn(f64) -> f64>(&self, symbol: F) -> SpectralField {
        let modes = self.grid.modes();
        let n = self.grid.n() as i64;
        // |k|² ranges over 0..=3(n/2)².
        let mut cache = vec![f64::NAN; (3 * (n / 2) * (n / 2) + 1) as usize];
        let mut out = self.clone();
        for (idx, &ksq) in modes.ksq_int.iter().enumerate() {
            let slot = &mut cache[ksq as usize];
            if slot.is_nan() {
                *slot = symbol((ksq as f64).sqrt());
            }
            let m = *slot;
            for c in out.comps.iter_mut() {
                c[idx] *= m;
            }
        }
        out
    }

    /// Zeroes every mode outside the two-thirds cube.
    pub fn dealias(&mut self) {
        let modes = self.grid.modes();
        for (idx, keep) in modes.retained.iter().enumerate() {
            if !keep {
                for c in self.comps.iter_mut() {
                    c[idx] = ZERO;
                }
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    /// Largest coefficient magnitude outside the two-thirds cube.
    pub fn alias_content(&self) -> f64 {
        let mut m: f64 = 0.0;
        let modes = self.grid.modes();
        for (idx, keep) in modes.retained.iter().enumerate() {
            if !keep {
                for c in &self.comps {
                    m = m.max(c[idx].norm());
                }
            }
        }
        m
    }

    pub fn mean(&self) -> Vec<Complex64> {
        self.comps.iter().map(|c| c[0]).collect()
    }

    pub fn zero_mean(&mut self) {
        for c in self.comps.iter_mut() {
            c[0] = ZERO;
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `max_k |k·F̂(k)|` for a vector field.
    pub fn divergence_defect(&self) -> f64 {
        assert!(self.is_vector(), "divergence defect needs a vector field");
        let mut m: f64 = 0.0;
        let modes = self.grid.modes();
        for (idx, k) in modes.k.iter().enumerate() {
            let d = self.comps[0][idx] * k[0] + self.comps[1][idx] * k[1] + self.comps[2][idx] * k[2];
            m = m.max(d.norm());
        }
        m
    }

    pub fn is_divergence_free(&self, rel_tol: f64) -> bool {
        self.divergence_defect() <= rel_tol * self.max_abs_coeff().max(f64::MIN_POSITIVE)
    }

    /// `max_k |F̂(-k) - conj F̂(k)|`, ignoring Nyquist planes.
    pub fn hermitian_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for idx in 0..self.grid.len() {
            if self.grid.is_nyquist(self.grid.k_of(idx)) {
                continue;
            }
            let mi = self.grid.mirror(idx);
            for c in &self.comps {
                m = m.max((c[mi] - c[idx].conj()).norm());
            }
        }
        m
    }

    /// `∫ F·G dx` by Parseval.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.ncomp(), other.ncomp(), "component mismatch");
        let terms: Vec<f64> = self
            .comps
            .iter()
            .zip(other.comps.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re))
            .collect();
        self.grid.volume() * pairwise_sum(&terms)
    }

    /// `‖F‖₂` by Parseval (vector magnitude pointwise).
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let terms: Vec<f64> = self
            .comps
            .iter()
            .flat_map(|c| c.iter().map(|v| v.norm_sqr()))
            .collect();
        self.grid.volume() * pairwise_sum(&terms)
    }

    /// `½‖F‖₂²`.
    pub fn energy(&self) -> f64 {
        0.5 * self.l2_norm_sq()
    }

    /// `‖∇F‖₂² = (2π)³ Σ |k|² |F̂(k)|²`.
    pub fn grad_l2_sq(&self) -> f64 {
        let modes = self.grid.modes();
        let terms: Vec<f64> = self
            .comps
            .iter()
            .flat_map(|c| c.iter().zip(modes.ksq.iter()).map(|(v, k2)| k2 * v.norm_sqr()))
            .collect();
        self.grid.volume() * pairwise_sum(&terms)
    }

    /// `∫ ∇F : ∇G dx`.
    pub fn grad_inner(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let modes = self.grid.modes();
        let terms: Vec<f64> = self
            .comps
            .iter()
            .zip(other.comps.iter())
            .flat_map(|(a, b)| {
                a.iter()
                    .zip(b.iter())
                    .zip(modes.ksq.iter())
                    .map(|((x, y), k2)| k2 * (x * y.conj()).re)
            })
            .collect();
        self.grid.volume() * pairwise_sum(&terms)
    }

    /// Direct evaluation `Σ_k F̂(k) e^{ik·x}` at an arbitrary point.
    pub fn evaluate_at(&self, x: [f64; 3]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncomp()];
        for idx in 0..self.grid.len() {
            if self.comps.iter().all(|c| c[idx] == ZERO) {
                continue;
            }
            let k = self.grid.kf_of(idx);
            let phase = Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            for (o, c) in out.iter_mut().zip(self.comps.iter()) {
                *o += (c[idx] * phase).re;
            }
        }
        out
    }

    /// Extracts a single component as a scalar field.
    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid,
            comps: vec![self.comps[c].clone()],
            time: self.time,
        }
    }

    /// Stacks scalar fields into one field.
    pub fn stack(parts: &[SpectralField]) -> Result<SpectralField> {
        let Some(first) = parts.first() else {
            return Err(Error::Shape("cannot stack zero fields".into()));
        };
        let mut comps = Vec::new();
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::Shape("grid mismatch while stacking".into()));
            }
            comps.extend(p.comps.iter().cloned());
        }
        SpectralField::from_coeffs(first.grid, comps).map(|f| f.with_time(first.time))
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.comps.iter_mut() {
            c.iter_mut().for_each(|v| *v *= a);
        }
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.ncomp(), other.ncomp(), "component mismatch");
        for (dst, src) in self.comps.iter_mut().zip(other.comps.iter()) {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += s * a;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| *v == ZERO))
    }

    pub(crate) fn check_vector(&self, what: &str) -> Result<()> {
        if self.is_vector() {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what} needs a 3-component field, got {}",
                self.ncomp()
            )))
        }
    }

    pub(crate) fn check_scalar(&self, what: &str) -> Result<()> {
        if self.is_scalar() {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what} needs a scalar field, got {} components",
                self.ncomp()
            )))
        }
    }

    pub(crate) fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "grid mismatch: n={} vs n={}",
                self.grid.n(),
                other.grid.n()
            )))
        }
    }
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(rhs);
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}
