//! Function handles: anything holomorphic on the disc that can report a value
//! and a derivative at a point.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::expr::HoloExpr;

pub trait Holo: Send + Sync {
    fn value(&self, z: C64) -> Result<C64>;
    fn deriv(&self, z: C64) -> Result<C64>;
    fn label(&self) -> String {
        "f".to_string()
    }
}

pub type Func = Arc<dyn Holo>;

impl fmt::Debug for dyn Holo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Holo({})", self.label())
    }
}

/// An expression together with its symbolic derivative.
#[derive(Debug, Clone)]
pub struct ExprFn {
    pub f: HoloExpr,
    pub df: HoloExpr,
}

impl ExprFn {
    pub fn new(f: HoloExpr) -> Self {
        let df = f.differentiate();
        ExprFn { f, df }
    }

    pub fn parse(src: &str) -> Result<Self> {
        Ok(Self::new(HoloExpr::parse(src)?))
    }

    pub fn handle(self) -> Func {
        Arc::new(self)
    }
}

impl Holo for ExprFn {
    fn value(&self, z: C64) -> Result<C64> {
        self.f.eval(z)
    }
    fn deriv(&self, z: C64) -> Result<C64> {
        self.df.eval(z)
    }
    fn label(&self) -> String {
        self.f.to_string()
    }
}

/// A function known only through its derivative and its value at 0.
///
/// Values are recovered by Gauss–Legendre integration along `[0, z]`.
pub struct DerivOnly<D: Fn(C64) -> Result<C64> + Send + Sync> {
    pub d: D,
    pub at_zero: C64,
    pub name: String,
}

impl<D: Fn(C64) -> Result<C64> + Send + Sync> Holo for DerivOnly<D> {
    fn value(&self, z: C64) -> Result<C64> {
        Ok(self.at_zero + crate::quad::segment_integral(&self.d, C64::new(0.0, 0.0), z, 1e-12)?)
    }
    fn deriv(&self, z: C64) -> Result<C64> {
        (self.d)(z)
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Central difference quotient, used by tests and consistency checks.
pub fn finite_difference(f: &dyn Holo, z: C64, h: f64) -> Result<C64> {
    let a = f.value(z + h)?;
    let b = f.value(z - h)?;
    let d = (a - b) / (2.0 * h);
    if d.re.is_finite() && d.im.is_finite() {
        Ok(d)
    } else {
        Err(Error::domain("non-finite difference quotient"))
    }
}
