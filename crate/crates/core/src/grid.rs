//! Dense row-major grids and the per-pixel transforms shared by every stage.
//!
//! Planes are held as `f64` in memory. On-disk containers store `f32`, and
//! reductions over planes always accumulate in `f64`.

use alloc::{format, vec, vec::Vec};

use crate::error::{ensure_dims, Error, Result};

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("grid dimensions must be >= 1, got {width}x{height}")));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::invalid(format!("data length {len} does not match {width}x{height}")));
    }
    Ok(())
}

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::invalid(format!("non-finite {what} value at index {i}"))),
        None => Ok(()),
    }
}

/// H×W plane of real values: probabilities, logits, entropies, residuals or
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        check_finite(&data, "field")?;
        Ok(ScalarField { width, height, data })
    }

    /// Like [`ScalarField::new`] but additionally requires every value in
    /// `[0, 1]`.
    pub fn probability(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let field = Self::new(width, height, data)?;
        if let Some(i) = field.data.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(format!("probability {} out of [0, 1] at index {i}", field.data[i])));
        }
        Ok(field)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Internal constructor for buffers whose invariants the caller upholds.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, data.len());
        debug_assert!(data.iter().all(|v| v.is_finite()));
        ScalarField { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn is_probability(&self) -> bool {
        self.data.iter().all(|p| (0.0..=1.0).contains(p))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Applies `f` per pixel. The result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        ScalarField::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn ensure_probability(&self) -> Result<()> {
        match self.data.iter().position(|p| !(0.0..=1.0).contains(p)) {
            Some(i) => Err(Error::invalid(format!("value {} at index {i} is not a probability", self.data[i]))),
            None => Ok(()),
        }
    }
}

/// H×W binary grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Mask { width, height, data })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Mask as a 0/1 plane.
    pub fn to_field(&self) -> ScalarField {
        ScalarField::from_raw(self.width, self.height, self.data.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }
}

/// Dense displacement field in pixels per frame: `u` horizontal, `v`
/// vertical.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_dims(width, height, u.len())?;
        check_dims(width, height, v.len())?;
        check_finite(&u, "flow u")?;
        check_finite(&v, "flow v")?;
        Ok(FlowField { width, height, u, v })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::constant(width, height, 0.0, 0.0)
    }

    pub fn constant(width: usize, height: usize, u: f64, v: f64) -> Result<Self> {
        let n = width * height;
        Self::new(width, height, vec![u; n], vec![v; n])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> (f64, f64)) -> Result<Self> {
        let n = width * height;
        let (mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for y in 0..height {
            for x in 0..width {
                let (a, b) = f(x, y);
                u.push(a);
                v.push(b);
            }
        }
        Self::new(width, height, u, v)
    }

    pub(crate) fn from_raw(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Self {
        debug_assert_eq!(u.len(), width * height);
        debug_assert_eq!(v.len(), width * height);
        FlowField { width, height, u, v }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    /// Flow with every vector negated.
    pub fn negated(&self) -> FlowField {
        FlowField::from_raw(
            self.width,
            self.height,
            self.u.iter().map(|a| -a).collect(),
            self.v.iter().map(|a| -a).collect(),
        )
    }
}

/// Luminance frame with intensities in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        check_finite(&data, "intensity")?;
        if let Some(i) = data.iter().position(|p| !(0.0..=255.0).contains(p)) {
            return Err(Error::invalid(format!("intensity {} out of [0, 255] at index {i}", data[i])));
        }
        Ok(GrayFrame { width, height, data })
    }

    /// Frame from interleaved 8-bit RGB using Rec.601 luma weights.
    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::invalid(format!("rgb buffer of {} bytes does not match {width}x{height}x3", rgb.len())));
        }
        let data = rgb.chunks_exact(3).map(|px| luminance(px[0] as f64, px[1] as f64, px[2] as f64)).collect();
        Self::new(width, height, data)
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| b as f64).collect())
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Intensities rounded to bytes.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| libm::round(v) as u8).collect()
    }
}

/// Rec.601 luma.
pub fn luminance(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Logistic function `1 / (1 + e^-x)`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    // Branch keeps exp() from overflowing for very negative inputs.
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Converts a logit plane into foreground probabilities.
pub fn sigmoid_map(logits: &ScalarField) -> Result<ScalarField> {
    check_finite(&logits.data, "logit")?;
    Ok(ScalarField::from_raw(logits.width, logits.height, logits.data.iter().map(|&x| sigmoid(x)).collect()))
}

/// Binarizes a probability plane with the strict test `p > tau`.
pub fn threshold_mask(prob: &ScalarField, tau: f64) -> Result<Mask> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::config(format!("threshold {tau} must lie in (0, 1)")));
    }
    prob.ensure_probability()?;
    Ok(Mask { width: prob.width, height: prob.height, data: prob.data.iter().map(|&p| p > tau).collect() })
}

pub(crate) fn same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    ensure_dims(a, b)
}
