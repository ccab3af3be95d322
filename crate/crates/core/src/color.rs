//! Linear RGB triples used for albedos, radiance and image pixels.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Sub};

/// Rec. 709 / sRGB luminance weights.
pub const LUMINANCE_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rgb(pub [f64; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0.0; 3]);
    pub const WHITE: Rgb = Rgb([1.0; 3]);

    #[inline]
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb([r, g, b])
    }

    #[inline]
    pub const fn splat(v: f64) -> Self {
        Rgb([v; 3])
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.0[0]
    }
    #[inline]
    pub fn g(&self) -> f64 {
        self.0[1]
    }
    #[inline]
    pub fn b(&self) -> f64 {
        self.0[2]
    }

    pub fn luminance(&self) -> f64 {
        self.0
            .iter()
            .zip(LUMINANCE_WEIGHTS)
            .map(|(c, w)| c * w)
            .sum()
    }

    pub fn max_channel(&self) -> f64 {
        self.0[0].max(self.0[1]).max(self.0[2])
    }

    pub fn min_channel(&self) -> f64 {
        self.0[0].min(self.0[1]).min(self.0[2])
    }

    pub fn is_black(&self) -> bool {
        self.0 == [0.0; 3]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Clamps every channel into `[lo, hi]`.
    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        Rgb(self.0.map(|c| c.clamp(lo, hi)))
    }

    /// Negative channels set to zero, then scaled so the largest channel is 1.
    /// A triple with no positive channel maps to black.
    pub fn normalized_to_unit_max(&self) -> Self {
        let c = self.clamp(0.0, f64::INFINITY);
        let m = c.max_channel();
        if m > 0.0 {
            c * (1.0 / m)
        } else {
            Rgb::BLACK
        }
    }
}

impl Add for Rgb {
    type Output = Rgb;
    #[inline]
    fn add(self, o: Rgb) -> Rgb {
        Rgb([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Rgb {
    #[inline]
    fn add_assign(&mut self, o: Rgb) {
        for i in 0..3 {
            self.0[i] += o.0[i];
        }
    }
}

impl Sub for Rgb {
    type Output = Rgb;
    #[inline]
    fn sub(self, o: Rgb) -> Rgb {
        Rgb([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul for Rgb {
    type Output = Rgb;
    #[inline]
    fn mul(self, o: Rgb) -> Rgb {
        Rgb([self.0[0] * o.0[0], self.0[1] * o.0[1], self.0[2] * o.0[2]])
    }
}

impl Mul<f64> for Rgb {
    type Output = Rgb;
    #[inline]
    fn mul(self, s: f64) -> Rgb {
        Rgb(self.0.map(|c| c * s))
    }
}

impl MulAssign<f64> for Rgb {
    #[inline]
    fn mul_assign(&mut self, s: f64) {
        for c in &mut self.0 {
            *c *= s;
        }
    }
}

impl MulAssign for Rgb {
    #[inline]
    fn mul_assign(&mut self, o: Rgb) {
        for i in 0..3 {
            self.0[i] *= o.0[i];
        }
    }
}

impl Div<f64> for Rgb {
    type Output = Rgb;
    #[inline]
    fn div(self, s: f64) -> Rgb {
        Rgb(self.0.map(|c| c / s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luminance_of_primaries() {
        assert_eq!(Rgb::new(1.0, 0.0, 0.0).luminance(), 0.2126);
        assert!((Rgb::WHITE.luminance() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_max_normalisation_drops_negatives() {
        let c = Rgb::new(-0.2, 0.5, 0.25).normalized_to_unit_max();
        assert_eq!(c, Rgb::new(0.0, 1.0, 0.5));
        assert_eq!(
            Rgb::new(-1.0, -2.0, 0.0).normalized_to_unit_max(),
            Rgb::BLACK
        );
    }
}
