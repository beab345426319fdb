use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Responses observed on the equidistant design `x_j = j/n`, `j = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    ys: Vec<f64>,
}

/// Inclusive index range `lo..=hi` (zero based) of a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowRange {
    pub lo: usize,
    pub hi: usize,
}

impl WindowRange {
    pub fn len(&self) -> usize {
        self.hi + 1 - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn indices(&self) -> core::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl Sample {
    pub fn new(ys: Vec<f64>) -> Result<Self> {
        if ys.len() < 2 {
            return Err(Error::InvalidInput("sample needs at least two observations"));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidInput("responses must be finite"));
        }
        Ok(Self { ys })
    }

    pub fn n(&self) -> usize {
        self.ys.len()
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Design point of the zero-based observation `i`, i.e. `(i+1)/n`.
    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 / self.n() as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.x(i)).collect()
    }

    /// Design points with `|x_i - x| <= h`, or `None` when there are none.
    ///
    /// The boundary comparison carries a `1e-9 / n` slack so that design
    /// points sitting exactly on the window edge are always included.
    pub fn window(&self, x: f64, h: f64) -> Option<WindowRange> {
        let n = self.n() as f64;
        let lo = libm::ceil((x - h) * n - 1e-9).max(1.0);
        let hi = libm::floor((x + h) * n + 1e-9).min(n);
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return None;
        }
        Some(WindowRange {
            lo: lo as usize - 1,
            hi: hi as usize - 1,
        })
    }

    /// Copy with every response shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            ys: self.ys.iter().map(|y| y + delta).collect(),
        }
    }

    /// Copy with every response multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            ys: self.ys.iter().map(|y| y * lambda).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_short_or_nonfinite() {
        assert!(Sample::new(vec![1.0]).is_err());
        assert!(Sample::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn window_includes_edges_and_clips() {
        let s = Sample::new(vec![0.0; 10]).unwrap();
        // x = 0.5, h = 0.2 covers 0.3..=0.7, i.e. j = 3..=7.
        let w = s.window(0.5, 0.2).unwrap();
        assert_eq!((w.lo, w.hi), (2, 6));
        assert_eq!(w.len(), 5);
        // Near the left edge the window is the intersection with [0, 1].
        let w = s.window(0.05, 0.2).unwrap();
        assert_eq!((w.lo, w.hi), (0, 1));
        assert!(s.window(0.55, 0.01).is_none());
    }
}
