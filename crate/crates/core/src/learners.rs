//! Online readout training rules.
//!
//! All three rules share the prior error `e(k) = r(k)ᵀ W_out(k-1) - f(k)`.
//!
//! * RLS FORCE: `W_out(k) = W_out(k-1) - e(k) P(k) r(k)` with the rank-1
//!   inverse-correlation recursion
//!   `P(k) = P(k-1) - P(k-1) r rᵀ P(k-1) / (1 + rᵀ P(k-1) r)`, `P(0) = I / a`.
//! * Composite RLS: additionally keeps the filtered regression
//!   `Ω(k) = L{r rᵀ}`, `Y(k) = L{r f}` with `L(z) = λ / (1 - (1 - λ) z⁻¹)`
//!   and the generalized error `E(k) = Ω(k) W_out(k-1) - Y(k)`, and steps
//!   along `P(k) (e(k) r(k) ∓ β E(k))`.
//! * Composite LMS: the composite direction with `P(k)` replaced by a scalar
//!   rate `η`.

use crate::config::{CompositeSign, ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, DenseMatrix, DenseVector};

/// `e(k) = rᵀ W_out(k-1) - f(k)`.
pub fn prior_error(r: &DenseVector, w_out: &DenseVector, f: f64) -> Result<f64> {
    Ok(r.dot(w_out)? - f)
}

/// Inverse-correlation ("learning-rate") matrix of the RLS recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct RlsState {
    pub p: DenseMatrix,
    pub a: f64,
    pr: Vec<f64>,
}

impl RlsState {
    /// `P(0) = I / a`.
    pub fn new(n: usize, a: f64) -> Self {
        Self { p: DenseMatrix::identity_scaled(n, 1.0 / a), a, pr: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.p.rows()
    }

    /// Rank-1 update of `P` with regressor `r`.
    ///
    /// Returns the gain denominator `1 + rᵀ P(k-1) r`. Afterwards
    /// [`RlsState::gain`] holds `P(k) r = P(k-1) r / (1 + rᵀ P(k-1) r)`.
    /// Only the upper triangle is computed and mirrored, so `P` is exactly
    /// symmetric after every update.
    pub fn update(&mut self, r: &DenseVector) -> Result<f64> {
        check_len(self.n(), r.len())?;
        self.p.mul_vec_into(r.as_slice(), &mut self.pr)?;
        let denom = 1.0 + dot(r.as_slice(), &self.pr);
        if !denom.is_finite() || denom <= 0.0 {
            return Err(Error::NonFinite { step: 0, what: "RLS gain denominator" });
        }
        self.p.sub_sym_rank1(&self.pr, 1.0 / denom);
        for v in self.pr.iter_mut() {
            *v /= denom;
        }
        Ok(denom)
    }

    /// `P(k) r(k)` from the most recent [`RlsState::update`].
    pub fn gain(&self) -> &[f64] {
        &self.pr
    }
}

/// Time-domain realization of the first-order filter `L` applied to the
/// extended regression `r rᵀ W = r f`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub omega: DenseMatrix,
    pub y: DenseVector,
    pub lambda: f64,
}

impl FilterBank {
    /// Cold-start filters (`Ω = 0`, `Y = 0`).
    pub fn new(n: usize, lambda: f64) -> Self {
        Self { omega: DenseMatrix::zeros(n, n), y: DenseVector::zeros(n), lambda }
    }

    /// `Ω(k) = (1-λ) Ω(k-1) + λ r rᵀ`, `Y(k) = (1-λ) Y(k-1) + λ r f`.
    pub fn update(&mut self, r: &DenseVector, f: f64) -> Result<()> {
        check_len(self.y.len(), r.len())?;
        let lambda = self.lambda;
        self.omega.blend_outer(r.as_slice(), lambda);
        for (y, ri) in self.y.as_mut_slice().iter_mut().zip(r.as_slice()) {
            *y = (1.0 - lambda) * *y + lambda * ri * f;
        }
        Ok(())
    }

    /// `E = Ω W_out - Y`, using the weights from before the current step.
    pub fn generalized_error(&self, w_out: &DenseVector) -> Result<DenseVector> {
        let mut e = self.omega.mul_vec(w_out)?;
        for (ei, yi) in e.as_mut_slice().iter_mut().zip(self.y.as_slice()) {
            *ei -= yi;
        }
        Ok(e)
    }
}

/// Result of one learner step.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerOutput {
    pub w_out: DenseVector,
    pub e_prior: f64,
    pub e_posterior: f64,
    pub e_norm: f64,
    /// `1 + rᵀ P(k-1) r` for the RLS-based rules, `1` for LMS.
    pub gain_denominator: f64,
}

/// One basic RLS FORCE step.
pub fn rls_force_step(w_out: &DenseVector, rls: &mut RlsState, r: &DenseVector, f: f64) -> Result<LearnerOutput> {
    let e = prior_error(r, w_out, f)?;
    let denom = rls.update(r)?;
    let mut w = w_out.clone();
    for (wi, gi) in w.as_mut_slice().iter_mut().zip(rls.gain()) {
        *wi -= e * gi;
    }
    let e_post = prior_error(r, &w, f)?;
    Ok(LearnerOutput { w_out: w, e_prior: e, e_posterior: e_post, e_norm: 0.0, gain_denominator: denom })
}

/// One composite RLS FORCE step.
///
/// With `beta == 0` this performs exactly the arithmetic of
/// [`rls_force_step`], so both produce bit-identical weights.
pub fn composite_rls_step(
    w_out: &DenseVector,
    rls: &mut RlsState,
    bank: &mut FilterBank,
    r: &DenseVector,
    f: f64,
    beta: f64,
    sign: CompositeSign,
) -> Result<LearnerOutput> {
    let e = prior_error(r, w_out, f)?;
    bank.update(r, f)?;
    let big_e = bank.generalized_error(w_out)?;
    let denom = rls.update(r)?;
    let mut w = w_out.clone();
    for (wi, gi) in w.as_mut_slice().iter_mut().zip(rls.gain()) {
        *wi -= e * gi;
    }
    if beta != 0.0 {
        let pe = rls.p.mul_vec(&big_e)?;
        let c = sign.factor() * beta;
        for (wi, pei) in w.as_mut_slice().iter_mut().zip(pe.as_slice()) {
            *wi -= c * pei;
        }
    }
    let e_post = prior_error(r, &w, f)?;
    Ok(LearnerOutput { w_out: w, e_prior: e, e_posterior: e_post, e_norm: big_e.norm(), gain_denominator: denom })
}

/// One composite LMS FORCE step: `W(k) = W(k-1) - η (e r ∓ β E)`.
pub fn composite_lms_step(
    w_out: &DenseVector,
    bank: &mut FilterBank,
    r: &DenseVector,
    f: f64,
    beta: f64,
    eta: f64,
    sign: CompositeSign,
) -> Result<LearnerOutput> {
    let e = prior_error(r, w_out, f)?;
    bank.update(r, f)?;
    let big_e = bank.generalized_error(w_out)?;
    let c = sign.factor() * beta;
    let mut w = w_out.clone();
    for ((wi, ri), ei) in w.as_mut_slice().iter_mut().zip(r.as_slice()).zip(big_e.as_slice()) {
        *wi -= eta * (e * ri + c * ei);
    }
    let e_post = prior_error(r, &w, f)?;
    Ok(LearnerOutput { w_out: w, e_prior: e, e_posterior: e_post, e_norm: big_e.norm(), gain_denominator: 1.0 })
}

/// A configured learner together with its memory.
#[derive(Debug, Clone, PartialEq)]
pub enum Learner {
    Rls(RlsState),
    CompositeRls { rls: RlsState, bank: FilterBank, beta: f64, sign: CompositeSign },
    CompositeLms { bank: FilterBank, beta: f64, eta: f64, sign: CompositeSign },
}

impl Learner {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        let n = config.n_neurons;
        match config.method {
            Method::RlsForce => Learner::Rls(RlsState::new(n, config.rls_init)),
            Method::CompositeRls => Learner::CompositeRls {
                rls: RlsState::new(n, config.rls_init),
                bank: FilterBank::new(n, config.filter_const),
                beta: config.composite_gain,
                sign: config.composite_sign,
            },
            Method::CompositeLms => Learner::CompositeLms {
                bank: FilterBank::new(n, config.filter_const),
                beta: config.composite_gain,
                eta: config.lms_rate,
                sign: config.composite_sign,
            },
        }
    }

    pub fn step(&mut self, w_out: &DenseVector, r: &DenseVector, f: f64) -> Result<LearnerOutput> {
        match self {
            Learner::Rls(rls) => rls_force_step(w_out, rls, r, f),
            Learner::CompositeRls { rls, bank, beta, sign } => composite_rls_step(w_out, rls, bank, r, f, *beta, *sign),
            Learner::CompositeLms { bank, beta, eta, sign } => {
                composite_lms_step(w_out, bank, r, f, *beta, *eta, *sign)
            }
        }
    }

    pub fn rls(&self) -> Option<&RlsState> {
        match self {
            Learner::Rls(rls) | Learner::CompositeRls { rls, .. } => Some(rls),
            Learner::CompositeLms { .. } => None,
        }
    }

    pub fn filter_bank(&self) -> Option<&FilterBank> {
        match self {
            Learner::Rls(_) => None,
            Learner::CompositeRls { bank, .. } | Learner::CompositeLms { bank, .. } => Some(bank),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DenseVector {
        x.to_vec().into()
    }

    #[test]
    fn prior_error_examples() {
        assert_eq!(prior_error(&v(&[0.3, 0.4]), &v(&[0.0, 0.0]), 1.2).unwrap(), -1.2);
        assert_eq!(prior_error(&v(&[0.0, 0.0]), &v(&[5.0, -2.0]), 0.0).unwrap(), 0.0);
        assert_eq!(prior_error(&v(&[1.0, 2.0]), &v(&[3.0, -1.0]), 0.5).unwrap(), 0.5);
        assert!(prior_error(&v(&[1.0]), &v(&[1.0, 2.0]), 0.0).is_err());
    }

    #[test]
    fn scalar_p_update() {
        let mut s = RlsState::new(1, 1.0);
        assert_eq!(s.p.get(0, 0), 1.0);
        s.update(&v(&[1.0])).unwrap();
        assert_eq!(s.p.get(0, 0), 0.5);
    }

    #[test]
    fn initial_p_is_scaled_identity() {
        let s = RlsState::new(4, 2.0);
        assert_eq!(s.p, DenseMatrix::identity_scaled(4, 0.5));
    }

    #[test]
    fn zero_regressor_leaves_p() {
        let mut s = RlsState::new(3, 1.0);
        s.update(&v(&[0.2, -0.1, 0.4])).unwrap();
        let before = s.p.clone();
        s.update(&DenseVector::zeros(3)).unwrap();
        assert_eq!(s.p, before);
    }

    #[test]
    fn scalar_rls_step() {
        let mut s = RlsState::new(1, 1.0);
        let out = rls_force_step(&v(&[0.0]), &mut s, &v(&[1.0]), 1.0).unwrap();
        assert_eq!(out.e_prior, -1.0);
        assert_eq!(s.p.get(0, 0), 0.5);
        assert_eq!(out.w_out, v(&[0.5]));
        assert_eq!(out.e_posterior, -0.5);
    }

    #[test]
    fn zero_error_keeps_weights_but_updates_p() {
        let mut s = RlsState::new(2, 1.0);
        let w = v(&[1.0, 1.0]);
        let out = rls_force_step(&w, &mut s, &v(&[0.5, 0.5]), 1.0).unwrap();
        assert_eq!(out.w_out, w);
        assert_ne!(s.p, DenseMatrix::identity_scaled(2, 1.0));
    }

    #[test]
    fn filter_memoryless_limit() {
        let mut b = FilterBank::new(2, 1.0);
        b.update(&v(&[1.0, 2.0]), 3.0).unwrap();
        b.update(&v(&[-1.0, 0.5]), 2.0).unwrap();
        assert_eq!(b.omega.as_slice(), &[1.0, -0.5, -0.5, 0.25]);
        assert_eq!(b.y, v(&[-2.0, 1.0]));
    }

    #[test]
    fn filter_geometric_recursion() {
        let mut b = FilterBank::new(1, 0.5);
        let mut ys = Vec::new();
        for _ in 0..3 {
            b.update(&v(&[1.0]), 1.0).unwrap();
            ys.push(b.y[0]);
        }
        assert_eq!(ys, vec![0.5, 0.75, 0.875]);
    }

    #[test]
    fn generalized_error_cold_and_consistent() {
        let b = FilterBank::new(2, 0.5);
        assert_eq!(b.generalized_error(&v(&[3.0, 4.0])).unwrap(), DenseVector::zeros(2));
        let mut b = FilterBank::new(2, 1.0);
        // Ω = r rᵀ with r = (1, 1), Y = r f with f = 2; W = (1, 1) solves Ω W = Y.
        b.update(&v(&[1.0, 1.0]), 2.0).unwrap();
        assert_eq!(b.generalized_error(&v(&[1.0, 1.0])).unwrap(), DenseVector::zeros(2));
    }

    #[test]
    fn composite_joint_zero_error_is_fixed_point() {
        // Ω W = Y and rᵀ W = f on every step: both errors vanish.
        let w = v(&[1.0, 1.0]);
        let mut rls = RlsState::new(2, 1.0);
        let mut bank = FilterBank::new(2, 0.5);
        let out = composite_rls_step(&w, &mut rls, &mut bank, &v(&[1.0, 1.0]), 2.0, 3.0, CompositeSign::Paper).unwrap();
        assert_eq!(out.w_out, w);
        let mut bank = FilterBank::new(2, 0.5);
        let out = composite_lms_step(&w, &mut bank, &v(&[1.0, 1.0]), 2.0, 3.0, 0.1, CompositeSign::Gradient).unwrap();
        assert_eq!(out.w_out, w);
    }

    #[test]
    fn composite_scalar_two_steps() {
        // N = 1, a = 1, λ = 0.5, β = 3, paper sign.
        // k=1: r=1, f=1, W=0: e=-1, Ω=0.5, Y=0.5, E=-0.5, P=0.5,
        //      W = 0 - 0.5 (-1 - 3(-0.5)) = -0.25
        // k=2: r=2, f=1, W=-0.25: e=-1.5, Ω=2.25, Y=1.25, E=-1.8125,
        //      P = 0.5 - 0.25*4/(1+2) = 1/6,
        //      W = -0.25 - (1/6)(-3 + 5.4375) = -0.25 - 0.40625 = -0.65625
        let mut rls = RlsState::new(1, 1.0);
        let mut bank = FilterBank::new(1, 0.5);
        let s = CompositeSign::Paper;
        let o1 = composite_rls_step(&v(&[0.0]), &mut rls, &mut bank, &v(&[1.0]), 1.0, 3.0, s).unwrap();
        assert!((o1.w_out[0] + 0.25).abs() < 1e-12);
        let o2 = composite_rls_step(&o1.w_out, &mut rls, &mut bank, &v(&[2.0]), 1.0, 3.0, s).unwrap();
        assert!((o2.e_prior + 1.5).abs() < 1e-12);
        assert!((o2.e_norm - 1.8125).abs() < 1e-12);
        assert!((o2.w_out[0] + 0.65625).abs() < 1e-12, "{}", o2.w_out[0]);
    }

    #[test]
    fn composite_gradient_sign_scalar() {
        // Same first step with the gradient sign: W = 0 - 0.5 (-1 + 3(-0.5)) = 1.25
        let mut rls = RlsState::new(1, 1.0);
        let mut bank = FilterBank::new(1, 0.5);
        let o =
            composite_rls_step(&v(&[0.0]), &mut rls, &mut bank, &v(&[1.0]), 1.0, 3.0, CompositeSign::Gradient).unwrap();
        assert!((o.w_out[0] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn lms_scalar_delta_rule() {
        let mut bank = FilterBank::new(1, 0.5);
        let o = composite_lms_step(&v(&[0.0]), &mut bank, &v(&[1.0]), 1.0, 0.0, 0.1, CompositeSign::Paper).unwrap();
        assert!((o.w_out[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn lms_step_is_linear_in_rate() {
        let w = v(&[0.2, -0.4, 0.1]);
        let r = v(&[0.3, 0.7, -0.2]);
        let step = |eta: f64| {
            let mut bank = FilterBank::new(3, 0.5);
            bank.update(&v(&[0.1, 0.2, 0.3]), 0.9).unwrap();
            let o = composite_lms_step(&w, &mut bank, &r, 1.1, 3.0, eta, CompositeSign::Paper).unwrap();
            (0..3).map(|i| o.w_out[i] - w[i]).collect::<Vec<_>>()
        };
        let full = step(0.02);
        let half = step(0.01);
        for (a, b) in full.iter().zip(&half) {
            assert!((a - 2.0 * b).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_zero_matches_rls_bitwise() {
        let mut a = RlsState::new(3, 1.0);
        let mut b = RlsState::new(3, 1.0);
        let mut bank = FilterBank::new(3, 0.5);
        let mut wa = DenseVector::zeros(3);
        let mut wb = DenseVector::zeros(3);
        for k in 0..40 {
            let t = k as f64;
            let r = v(&[(0.3 * t).sin(), (0.7 * t).cos(), (1.1 * t).sin() * 0.5]);
            let f = (0.2 * t).sin() + 1.0;
            let oa = rls_force_step(&wa, &mut a, &r, f).unwrap();
            let ob = composite_rls_step(&wb, &mut b, &mut bank, &r, f, 0.0, CompositeSign::Paper).unwrap();
            assert_eq!(oa.w_out, ob.w_out);
            assert_eq!(oa.e_prior.to_bits(), ob.e_prior.to_bits());
            assert_eq!(oa.e_posterior.to_bits(), ob.e_posterior.to_bits());
            wa = oa.w_out;
            wb = ob.w_out;
        }
        assert_eq!(a, b);
    }

    #[test]
    fn learner_from_config_selects_rule() {
        let mut cfg = ExperimentConfig { n_neurons: 4, ..Default::default() };
        cfg.method = Method::RlsForce;
        assert!(matches!(Learner::from_config(&cfg), Learner::Rls(_)));
        cfg.method = Method::CompositeLms;
        let l = Learner::from_config(&cfg);
        assert!(l.rls().is_none() && l.filter_bank().is_some());
    }
}
