use std::f64::consts::PI;

use crate::linalg::{least_squares, DenseMatrix};

/// Second-order IIR section, normalized so `a0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    /// Notch at `f0_hz` with quality factor `q`: zeros on the unit circle at
    /// ±f0, poles just inside.
    pub fn notch(f0_hz: f64, q: f64, fs_hz: f64) -> Self {
        let w0 = 2.0 * PI * f0_hz / fs_hz;
        let alpha = w0.sin() / (2.0 * q);
        let cos = w0.cos();
        let a0 = 1.0 + alpha;
        Self {
            b: [1.0 / a0, -2.0 * cos / a0, 1.0 / a0],
            a: [1.0, -2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    /// Magnitude response at `f_hz` for one pass.
    pub fn gain(&self, f_hz: f64, fs_hz: f64) -> f64 {
        let w = 2.0 * PI * f_hz / fs_hz;
        let eval = |c: &[f64; 3]| {
            let re = c[0] + c[1] * w.cos() + c[2] * (2.0 * w).cos();
            let im = -c[1] * w.sin() - c[2] * (2.0 * w).sin();
            (re * re + im * im).sqrt()
        };
        eval(&self.b) / eval(&self.a)
    }

    /// Transposed direct form II with initial state `z`.
    pub fn filter(&self, x: &[f64], mut z: [f64; 2]) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        x.iter()
            .map(|&xn| {
                let y = b0 * xn + z[0];
                z[0] = b1 * xn - a1 * y + z[1];
                z[1] = b2 * xn - a2 * y;
                y
            })
            .collect()
    }

    /// Samples for the zero-input response to decay by roughly 1e-3.
    fn settle_len(&self) -> usize {
        // Pole radius r = sqrt(a2); envelope r^n.
        let r = self.a[2].abs().sqrt();
        if r <= 0.0 || r >= 1.0 {
            return 64;
        }
        ((1e-3f64).ln() / r.ln()).ceil() as usize + 1
    }

    /// One causal pass whose initial state is chosen by least squares so the
    /// zero-input (transient) response best cancels the start-up output over
    /// the settling window. A pure tone at the notch frequency then starts in
    /// steady state instead of ringing.
    pub fn filter_settled(&self, x: &[f64]) -> Vec<f64> {
        let m = self.settle_len().min(x.len());
        if m < 2 {
            return self.filter(x, [0.0, 0.0]);
        }
        let y0 = self.filter(&x[..m], [0.0, 0.0]);
        let zero = vec![0.0; m];
        let r0 = self.filter(&zero, [1.0, 0.0]);
        let r1 = self.filter(&zero, [0.0, 1.0]);
        let basis = DenseMatrix::from_fn(m, 2, |i, j| if j == 0 { r0[i] } else { r1[i] });
        let target: Vec<f64> = y0.iter().map(|v| -v).collect();
        let z = match least_squares(&basis, &target) {
            Ok(z) if z.iter().all(|v| v.is_finite()) => [z[0], z[1]],
            _ => [0.0, 0.0],
        };
        self.filter(x, z)
    }

    /// Forward then backward pass: zero phase, squared magnitude response.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.filter_settled(x);
        y.reverse();
        let mut y = self.filter_settled(&y);
        y.reverse();
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_have_unit_dc_gain_and_null_at_f0() {
        let f = Biquad::notch(60.0, 30.0, 250.0);
        assert!((f.gain(0.0, 250.0) - 1.0).abs() < 1e-12);
        assert!(f.gain(60.0, 250.0) < 1e-12);
        assert!((f.gain(15.0, 250.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let f = Biquad::notch(50.0, 30.0, 500.0);
        assert!(f.filtfilt(&[0.0; 100]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_inputs_are_handled() {
        let f = Biquad::notch(50.0, 30.0, 500.0);
        assert_eq!(f.filtfilt(&[]).len(), 0);
        assert_eq!(f.filtfilt(&[1.0]).len(), 1);
    }
}
