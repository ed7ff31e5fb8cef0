use super::Grid;
use crate::{Error, Result};

/// Composite trapezoid rule over the grid.
///
/// For smooth integrands that decay at both ends the trapezoid rule converges
/// spectrally, which is why it is preferred here to Simpson's rule.
pub fn integrate(samples: &[f64], grid: &Grid) -> Result<f64> {
    check_len(samples.len(), grid)?;
    let n = samples.len();
    let mut sum = NeumaierSum::default();
    sum.add(0.5 * samples[0]);
    for &s in &samples[1..n - 1] {
        sum.add(s);
    }
    sum.add(0.5 * samples[n - 1]);
    Ok(sum.total() * grid.spacing())
}

/// Running integral `C[i] = ∫_{lo}^{x_i} f`, with `C[0] = 0`.
///
/// Each cell is integrated with the cubic through its four neighbouring
/// samples (one-sided at the ends), so the error is `O(h^4)`.
pub fn cumulative(samples: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    check_len(samples.len(), grid)?;
    let f = samples;
    let n = f.len();
    let h = grid.spacing() / 24.0;
    let mut out = Vec::with_capacity(n);
    let mut acc = NeumaierSum::default();
    out.push(0.0);
    for i in 0..n - 1 {
        let cell = if i == 0 {
            9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
        } else if i == n - 2 {
            f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]
        } else {
            -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]
        };
        acc.add(h * cell);
        out.push(acc.total());
    }
    Ok(out)
}

fn check_len(len: usize, grid: &Grid) -> Result<()> {
    if len != grid.n() {
        return Err(Error::ContractViolation(format!("{len} samples for a grid of {} points", grid.n())));
    }
    Ok(())
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
