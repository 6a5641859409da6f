//! Word-length emulation for receiver datapaths.
//!
//! Values are carried as `f64` and rounded to the target format at datapath
//! boundaries: inputs, reference sequences, filter taps and accumulator outputs.

use std::fmt;
use std::str::FromStr;

use half::f16;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signed fixed-point format `{W, I}`: `W` total bits, `I` integer bits including sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedPointFormat {
    total_bits: u32,
    integer_bits: u32,
}

impl FixedPointFormat {
    pub fn new(total_bits: u32, integer_bits: u32) -> Result<Self> {
        if !(2..=62).contains(&total_bits) || integer_bits < 1 || integer_bits > total_bits {
            return Err(Error::Config(format!(
                "invalid fixed-point format {{{total_bits},{integer_bits}}}"
            )));
        }
        Ok(Self {
            total_bits,
            integer_bits,
        })
    }

    pub fn total_bits(self) -> u32 {
        self.total_bits
    }

    pub fn integer_bits(self) -> u32 {
        self.integer_bits
    }

    pub fn fractional_bits(self) -> u32 {
        self.total_bits - self.integer_bits
    }

    pub fn step(self) -> f64 {
        (-(self.fractional_bits() as f64)).exp2()
    }

    pub fn min_value(self) -> f64 {
        -((self.integer_bits - 1) as f64).exp2()
    }

    pub fn max_value(self) -> f64 {
        ((self.integer_bits - 1) as f64).exp2() - self.step()
    }

    /// Round to nearest step (ties away from zero), then saturate.
    pub fn quantize(self, x: f64) -> f64 {
        let scale = (self.fractional_bits() as f64).exp2();
        let q = (x * scale).round() / scale;
        q.clamp(self.min_value(), self.max_value())
    }
}

impl fmt::Display for FixedPointFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fixed{}_{}", self.total_bits, self.integer_bits)
    }
}

pub fn quantize_fixed(x: f64, fmt: FixedPointFormat) -> f64 {
    fmt.quantize(x)
}

pub fn quantize_fixed_complex(x: Complex64, fmt: FixedPointFormat) -> Complex64 {
    Complex64::new(fmt.quantize(x.re), fmt.quantize(x.im))
}

/// Largest finite binary16 value.
pub const HALF_MAX: f64 = 65504.0;

/// Round to binary16 (nearest, ties to even) and back, saturating at ±65504.
pub fn quantize_half(x: f64) -> f64 {
    let h = f16::from_f64(x).to_f64();
    if h.is_infinite() {
        HALF_MAX.copysign(h)
    } else {
        h
    }
}

/// Arithmetic format of one receiver datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NumericMode {
    #[default]
    Float32,
    Float16,
    Fixed(FixedPointFormat),
}

impl NumericMode {
    pub fn fixed(total_bits: u32, integer_bits: u32) -> Result<Self> {
        Ok(NumericMode::Fixed(FixedPointFormat::new(
            total_bits,
            integer_bits,
        )?))
    }

    #[inline]
    pub fn q(self, x: f64) -> f64 {
        match self {
            NumericMode::Float32 => x as f32 as f64,
            NumericMode::Float16 => quantize_half(x),
            NumericMode::Fixed(f) => f.quantize(x),
        }
    }

    #[inline]
    pub fn qc(self, x: Complex64) -> Complex64 {
        Complex64::new(self.q(x.re), self.q(x.im))
    }

    pub fn quantize_slice(self, xs: &[Complex64]) -> Vec<Complex64> {
        xs.iter().map(|&x| self.qc(x)).collect()
    }

    pub fn label(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericMode::Float32 => f.write_str("float32"),
            NumericMode::Float16 => f.write_str("float16"),
            NumericMode::Fixed(x) => x.fmt(f),
        }
    }
}

impl FromStr for NumericMode {
    type Err = Error;

    /// Accepts `float32`/`spfl`, `float16`/`hpfl`, `fixed24_2` and `fixed{24,2}`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "float32" | "f32" | "spfl" => return Ok(NumericMode::Float32),
            "float16" | "f16" | "hpfl" => return Ok(NumericMode::Float16),
            _ => {}
        }
        let body = t
            .strip_prefix("fixed")
            .ok_or_else(|| Error::Config(format!("unknown numeric mode '{s}'")))?;
        let body = body.trim_start_matches('{').trim_end_matches('}');
        let mut parts = body.split(['_', ',']);
        let parse = |p: Option<&str>| -> Result<u32> {
            p.and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("malformed fixed-point mode '{s}'")))
        };
        let w = parse(parts.next())?;
        let i = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::Config(format!("malformed fixed-point mode '{s}'")));
        }
        NumericMode::fixed(w, i)
    }
}

impl Serialize for NumericMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NumericMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
