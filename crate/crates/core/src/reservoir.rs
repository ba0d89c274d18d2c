//! The fixed chaotic reservoir and its state update.
//!
//! ```text
//! x(k) = tanh(W_in u(k) + W x(k-1) + W_fb z(k-1))
//! r(k) = (1 - alpha) r(k-1) + alpha x(k-1)
//! z(k) = r(k)ᵀ W_out
//! ```
//!
//! The leaky activation uses the state from *before* the update by default;
//! `leak_uses_current_x` switches to the conventional `x(k)`.

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, DenseVector, SparseMatrix};
use crate::rng::{SeededRng, Substream};

/// Structural parameters carried alongside the weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsnParams {
    pub n: usize,
    pub connectivity: f64,
    pub chaos_factor: f64,
    pub leak_rate: f64,
    pub leak_uses_current_x: bool,
}

/// Echo state network with a single linear readout.
///
/// `w`, `w_in` and `w_fb` are fixed after construction; only `w_out` is
/// written by the learners.
#[derive(Debug, Clone, PartialEq)]
pub struct EsnModel {
    pub params: EsnParams,
    w: SparseMatrix,
    w_in: DenseVector,
    w_fb: DenseVector,
    pub w_out: DenseVector,
}

impl EsnModel {
    /// Draws a reservoir: each of the N² entries of `W` is nonzero with
    /// probability `p`, with value `g * U[-0.5, 0.5)`; `W_in`, `W_fb` are
    /// `U[-1, 1)`; the readout starts at zero.
    pub fn build(config: &ExperimentConfig, rng: &SeededRng) -> Result<Self> {
        config.validate()?;
        let n = config.n_neurons;
        let g = config.chaos_factor;
        let mut internal = rng.stream(Substream::Internal);
        let mut triplets = Vec::with_capacity((config.connectivity * (n * n) as f64 * 1.2) as usize + 8);
        for row in 0..n {
            for col in 0..n {
                if internal.unit() < config.connectivity {
                    let v = internal.uniform(-0.5, 0.5, 1)?[0] * g;
                    triplets.push((row, col, v));
                }
            }
        }
        let w = SparseMatrix::from_triplets(n, &triplets)?;
        let w_in = rng.stream(Substream::Input).uniform(-1.0, 1.0, n)?;
        let w_fb = rng.stream(Substream::Feedback).uniform(-1.0, 1.0, n)?;
        Ok(Self {
            params: EsnParams {
                n,
                connectivity: config.connectivity,
                chaos_factor: g,
                leak_rate: config.leak_rate,
                leak_uses_current_x: config.leak_uses_current_x,
            },
            w,
            w_in: w_in.into(),
            w_fb: w_fb.into(),
            w_out: DenseVector::zeros(n),
        })
    }

    /// Assembles a model from explicit weights.
    pub fn from_parts(
        params: EsnParams,
        w: SparseMatrix,
        w_in: DenseVector,
        w_fb: DenseVector,
        w_out: DenseVector,
    ) -> Result<Self> {
        let n = params.n;
        check_len(n, w.dim())?;
        check_len(n, w_in.len())?;
        check_len(n, w_fb.len())?;
        check_len(n, w_out.len())?;
        Ok(Self { params, w, w_in, w_fb, w_out })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn internal(&self) -> &SparseMatrix {
        &self.w
    }

    pub fn input_weights(&self) -> &DenseVector {
        &self.w_in
    }

    pub fn feedback_weights(&self) -> &DenseVector {
        &self.w_fb
    }

    /// `z = rᵀ W_out`.
    pub fn readout(&self, r: &DenseVector) -> Result<f64> {
        r.dot(&self.w_out)
    }

    /// Power-iteration estimate of the spectral radius of `W`.
    pub fn spectral_diagnostic(&self) -> Option<f64> {
        spectral_radius_estimate(self.n(), |v, out| {
            self.w.mul_vec_into(v, out).expect("square");
        })
    }
}

/// Evolving reservoir state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    pub x: DenseVector,
    pub r: DenseVector,
    pub z_prev: f64,
    pub k: usize,
    scratch: Vec<f64>,
}

impl ReservoirState {
    /// Zero state, zero activation, zero previous output.
    pub fn zeros(n: usize) -> Self {
        Self { x: DenseVector::zeros(n), r: DenseVector::zeros(n), z_prev: 0.0, k: 0, scratch: vec![0.0; n] }
    }

    /// Advances one step driven by input `u` and fed-back output `z_prev`.
    pub fn step(&mut self, model: &EsnModel, u: f64, z_prev: f64) -> Result<()> {
        let n = model.n();
        check_len(n, self.x.len())?;
        check_len(n, self.r.len())?;
        if !u.is_finite() || !z_prev.is_finite() {
            return Err(Error::NonFinite { step: self.k + 1, what: "reservoir drive" });
        }
        let alpha = model.params.leak_rate;
        let keep = 1.0 - alpha;
        if !model.params.leak_uses_current_x {
            for (r, x) in self.r.as_mut_slice().iter_mut().zip(self.x.as_slice()) {
                *r = keep * *r + alpha * x;
            }
        }
        model.w.mul_vec_into(self.x.as_slice(), &mut self.scratch)?;
        let w_in = model.w_in.as_slice();
        let w_fb = model.w_fb.as_slice();
        for (i, x) in self.x.as_mut_slice().iter_mut().enumerate() {
            *x = (w_in[i] * u + self.scratch[i] + w_fb[i] * z_prev).tanh();
        }
        if model.params.leak_uses_current_x {
            for (r, x) in self.r.as_mut_slice().iter_mut().zip(self.x.as_slice()) {
                *r = keep * *r + alpha * x;
            }
        }
        self.z_prev = z_prev;
        self.k += 1;
        if !self.x.is_finite() || !self.r.is_finite() {
            return Err(Error::NonFinite { step: self.k, what: "reservoir state" });
        }
        Ok(())
    }
}

const POWER_BURN_IN: usize = 100;
const POWER_WINDOW: usize = 200;
const POWER_MAX_WINDOWS: usize = 60;
const POWER_TOL: f64 = 1e-4;

/// Spectral radius of the operator `apply` by normalized power iteration.
///
/// The estimate is the geometric mean growth factor over a window of
/// iterations rather than a single Rayleigh quotient, which keeps it valid
/// when the dominant eigenvalues form a complex pair. Returns `None` if two
/// consecutive windows never agree within the tolerance.
pub fn spectral_radius_estimate(n: usize, mut apply: impl FnMut(&[f64], &mut [f64])) -> Option<f64> {
    if n == 0 {
        return Some(0.0);
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 1.618).sin()).collect();
    let mut w = vec![0.0; n];
    let norm0 = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm0);

    // One normalized iteration; returns ln of the growth factor.
    let mut iterate = |v: &mut Vec<f64>, w: &mut Vec<f64>| -> Option<f64> {
        apply(v, w);
        let norm = dot(w, w).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        for (a, b) in v.iter_mut().zip(w.iter()) {
            *a = b / norm;
        }
        Some(norm.ln())
    };

    for _ in 0..POWER_BURN_IN {
        if iterate(&mut v, &mut w).is_none() {
            return Some(0.0);
        }
    }
    let mut prev: Option<f64> = None;
    for _ in 0..POWER_MAX_WINDOWS {
        let mut acc = 0.0;
        for _ in 0..POWER_WINDOW {
            acc += iterate(&mut v, &mut w)?;
        }
        let est = (acc / POWER_WINDOW as f64).exp();
        if let Some(p) = prev {
            if (est - p).abs() <= POWER_TOL * est.max(p) {
                return Some(0.5 * (est + p));
            }
        }
        prev = Some(est);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_model(alpha: f64, current: bool) -> EsnModel {
        let params =
            EsnParams { n: 3, connectivity: 0.5, chaos_factor: 1.0, leak_rate: alpha, leak_uses_current_x: current };
        let w = SparseMatrix::from_triplets(3, &[(0, 1, 0.4), (1, 2, -0.3), (2, 0, 0.2)]).unwrap();
        EsnModel::from_parts(
            params,
            w,
            vec![0.5, -0.5, 0.25].into(),
            vec![0.1, 0.2, -0.3].into(),
            DenseVector::zeros(3),
        )
        .unwrap()
    }

    #[test]
    fn zero_state_zero_drive_stays_zero() {
        let m = tiny_model(0.1, false);
        let mut s = ReservoirState::zeros(3);
        s.step(&m, 0.0, 0.0).unwrap();
        assert_eq!(s.x, DenseVector::zeros(3));
        assert_eq!(s.r, DenseVector::zeros(3));
        assert_eq!(s.k, 1);
    }

    #[test]
    fn leak_uses_previous_state() {
        let m = tiny_model(0.1, false);
        let mut s = ReservoirState::zeros(3);
        s.x = vec![1.0; 3].into();
        s.step(&m, 0.3, -0.2).unwrap();
        for &r in s.r.as_slice() {
            assert!((r - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_leak_copies_previous_state() {
        let m = tiny_model(1.0, false);
        let mut s = ReservoirState::zeros(3);
        s.x = vec![0.3, -0.6, 0.9].into();
        s.r = vec![5.0, -7.0, 2.0].into();
        let before = s.x.clone();
        s.step(&m, 1.0, 0.5).unwrap();
        assert_eq!(s.r, before);
    }

    #[test]
    fn conventional_leak_uses_new_state() {
        let m = tiny_model(1.0, true);
        let mut s = ReservoirState::zeros(3);
        s.x = vec![0.3, -0.6, 0.9].into();
        s.step(&m, 1.0, 0.5).unwrap();
        assert_eq!(s.r, s.x);
    }

    #[test]
    fn state_update_matches_formula() {
        let m = tiny_model(0.1, false);
        let mut s = ReservoirState::zeros(3);
        s.x = vec![0.5, 0.25, -0.5].into();
        s.step(&m, 2.0, -1.0).unwrap();
        let expect0 = (0.5 * 2.0 + 0.4 * 0.25 + -0.1f64).tanh();
        let expect1 = (-0.5 * 2.0 + -0.3 * -0.5 - 0.2f64).tanh();
        let expect2 = (0.25 * 2.0 + 0.2 * 0.5 + 0.3f64).tanh();
        assert_eq!(s.x.as_slice(), &[expect0, expect1, expect2]);
    }

    #[test]
    fn non_finite_drive_is_an_error() {
        let m = tiny_model(0.1, false);
        let mut s = ReservoirState::zeros(3);
        assert!(matches!(s.step(&m, f64::NAN, 0.0), Err(Error::NonFinite { step: 1, .. })));
    }

    #[test]
    fn readout_values() {
        let mut m = tiny_model(0.1, false);
        assert_eq!(m.readout(&vec![1.0, 2.0, 3.0].into()).unwrap(), 0.0);
        m.w_out = vec![3.0, -1.0, 0.0].into();
        assert_eq!(m.readout(&DenseVector::zeros(3)).unwrap(), 0.0);
        assert_eq!(m.readout(&vec![1.0, 2.0, 0.0].into()).unwrap(), 1.0);
        assert!(m.readout(&DenseVector::zeros(2)).is_err());
    }

    #[test]
    fn spectral_radius_of_scaled_identity_and_zero() {
        let s = 1.7;
        let est = spectral_radius_estimate(5, |v, out| {
            for (o, x) in out.iter_mut().zip(v) {
                *o = s * x;
            }
        })
        .unwrap();
        assert!((est - s).abs() < 1e-12);
        let zero = spectral_radius_estimate(5, |_, out| out.fill(0.0)).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn spectral_radius_of_rotation_pair() {
        // Eigenvalues 1.3 e^{±i 0.7}: a complex dominant pair.
        let (c, s) = (1.3 * 0.7f64.cos(), 1.3 * 0.7f64.sin());
        let est = spectral_radius_estimate(3, |v, out| {
            out[0] = c * v[0] - s * v[1];
            out[1] = s * v[0] + c * v[1];
            out[2] = 0.4 * v[2];
        })
        .unwrap();
        assert!((est - 1.3).abs() / 1.3 < 0.01, "{est}");
    }
}
