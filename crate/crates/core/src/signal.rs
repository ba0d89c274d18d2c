//! Target signals. The main one is the discrete Mackey-Glass recurrence
//!
//! ```text
//! f(k+1) = f(k) + 0.1 * (0.2 f(k-tau) / (1 + f(k-tau)^10) - 0.1 f(k))
//! ```
//!
//! with a constant pre-history `f(k) = f(0)` for `k <= 0`.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Sequential producer of a scalar signal.
pub trait SignalSource {
    fn next_value(&mut self) -> Result<f64>;

    /// Rewind to the initial condition; subsequent values replay exactly.
    fn reset(&mut self);
}

/// Delay line of the Mackey-Glass recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct MgsState {
    // f(k - tau) ..= f(k), oldest first.
    history: VecDeque<f64>,
    tau: usize,
    step: usize,
}

impl MgsState {
    pub fn new(tau: i64, f0: f64) -> Result<Self> {
        if tau < 1 {
            return Err(Error::InvalidDelay(tau));
        }
        let tau = tau as usize;
        Ok(Self { history: std::iter::repeat_n(f0, tau + 1).collect(), tau, step: 0 })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Index `k` of the current value.
    pub fn step_index(&self) -> usize {
        self.step
    }

    /// `f(k)`.
    pub fn current(&self) -> f64 {
        *self.history.back().expect("history holds tau + 1 values")
    }

    /// Advances to `k + 1` and returns `f(k + 1)`.
    pub fn advance(&mut self) -> Result<f64> {
        let delayed = *self.history.front().expect("history holds tau + 1 values");
        let now = self.current();
        let next = now + 0.1 * (0.2 * delayed / (1.0 + delayed.powi(10)) - 0.1 * now);
        if !next.is_finite() {
            return Err(Error::NonFinite { step: self.step + 1, what: "Mackey-Glass value" });
        }
        self.history.pop_front();
        self.history.push_back(next);
        self.step += 1;
        Ok(next)
    }
}

/// The Mackey-Glass sequence `f(0), f(1), ...` as a [`SignalSource`].
#[derive(Debug, Clone)]
pub struct MackeyGlass {
    initial: MgsState,
    state: MgsState,
    started: bool,
}

impl MackeyGlass {
    pub fn new(tau: usize, f0: f64) -> Result<Self> {
        let initial = MgsState::new(tau as i64, f0)?;
        Ok(Self { state: initial.clone(), initial, started: false })
    }

    /// The first `len` values, `f(0)` included.
    pub fn sequence(tau: usize, f0: f64, len: usize) -> Result<Vec<f64>> {
        let mut src = Self::new(tau, f0)?;
        (0..len).map(|_| src.next_value()).collect()
    }
}

impl SignalSource for MackeyGlass {
    fn next_value(&mut self) -> Result<f64> {
        if !self.started {
            self.started = true;
            return Ok(self.state.current());
        }
        self.state.advance()
    }

    fn reset(&mut self) {
        self.state = self.initial.clone();
        self.started = false;
    }
}
