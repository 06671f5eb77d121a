//! Scalar abstraction for the numeric formulas.
//!
//! Everything that is plain arithmetic (reputation formulas, interpolation,
//! summary statistics) is written against [`Real`] so it works at `f32` or
//! `f64`; the simulation instantiates it at [`crate::Scalar`].

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: num_traits::Float + num_traits::FromPrimitive + std::fmt::Debug {
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable as scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Linear interpolation between `a` and `b` at parameter `s` in `[0, 1]`.
pub fn lerp<F: Real>(a: F, b: F, s: F) -> F {
    a + (b - a) * s
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<F: Real>(values: &[F]) -> Option<F> {
    if values.is_empty() {
        return None;
    }
    let sum = values.iter().fold(F::zero(), |acc, &v| acc + v);
    Some(sum / F::from_usize_lossy(values.len()))
}

/// Sample standard deviation; zero for fewer than two values.
pub fn stddev<F: Real>(values: &[F]) -> F {
    if values.len() < 2 {
        return F::zero();
    }
    let m = mean(values).unwrap();
    let ss = values
        .iter()
        .fold(F::zero(), |acc, &v| acc + (v - m) * (v - m));
    (ss / F::from_usize_lossy(values.len() - 1)).sqrt()
}
