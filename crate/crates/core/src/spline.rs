//! Clamped cubic splines with user-supplied end slopes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplineKnots {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    pub end_slopes: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SplineKnots", into = "SplineKnots")]
pub struct ClampedSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    end_slopes: [f64; 2],
    moments: Vec<f64>,
}

impl TryFrom<SplineKnots> for ClampedSpline {
    type Error = Error;
    fn try_from(k: SplineKnots) -> Result<Self> {
        Self::new(k.knots, k.values, k.end_slopes[0], k.end_slopes[1])
    }
}

impl From<ClampedSpline> for SplineKnots {
    fn from(s: ClampedSpline) -> Self {
        Self { knots: s.knots, values: s.values, end_slopes: s.end_slopes }
    }
}

impl ClampedSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, slope_a: f64, slope_b: f64) -> Result<Self> {
        let m = knots.len();
        if m < 2 || values.len() != m {
            return Err(Error::Invalid("spline needs matching knots/values, at least two".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("spline knots must increase strictly".into()));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        diag[0] = h[0] / 3.0;
        sup[0] = h[0] / 6.0;
        rhs[0] = (values[1] - values[0]) / h[0] - slope_a;
        for i in 1..m - 1 {
            sub[i] = h[i - 1] / 6.0;
            diag[i] = (h[i - 1] + h[i]) / 3.0;
            sup[i] = h[i] / 6.0;
            rhs[i] = (values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1];
        }
        sub[m - 1] = h[m - 2] / 6.0;
        diag[m - 1] = h[m - 2] / 3.0;
        rhs[m - 1] = slope_b - (values[m - 1] - values[m - 2]) / h[m - 2];
        // Thomas algorithm; the system is strictly diagonally dominant.
        for i in 1..m {
            let f = sub[i] / diag[i - 1];
            diag[i] -= f * sup[i - 1];
            rhs[i] -= f * rhs[i - 1];
        }
        let mut moments = vec![0.0; m];
        moments[m - 1] = rhs[m - 1] / diag[m - 1];
        for i in (0..m - 1).rev() {
            moments[i] = (rhs[i] - sup[i] * moments[i + 1]) / diag[i];
        }
        Ok(Self { knots, values, end_slopes: [slope_a, slope_b], moments })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// Value, first and second derivative at `x` (clamped to the knot range).
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let k = &self.knots;
        let m = k.len();
        let x = x.clamp(k[0], k[m - 1]);
        let i = match k.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(m - 2),
            Err(i) => (i.max(1) - 1).min(m - 2),
        };
        let h = k[i + 1] - k[i];
        let a = (k[i + 1] - x) / h;
        let b = (x - k[i]) / h;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let f = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        [f, d1, d2]
    }
}
