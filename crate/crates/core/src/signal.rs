//! Signal conditioning shared by the gesture modules: an adaptive low-pass
//! (One Euro) filter for jitter, dual-threshold hysteresis, and a hold-time
//! debouncer.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::GestureError;

/// One Euro filter parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowPassParams {
    /// Minimum cutoff frequency in Hz.
    pub fc_min: f64,
    /// Speed coefficient; 0 gives a fixed-cutoff exponential smoother.
    pub beta: f64,
    /// Cutoff of the derivative estimate in Hz.
    pub d_cutoff: f64,
}

impl Default for LowPassParams {
    fn default() -> Self {
        LowPassParams {
            fc_min: 1.0,
            beta: 0.5,
            d_cutoff: 1.0,
        }
    }
}

impl LowPassParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.fc_min > 0.0 && self.fc_min.is_finite()) {
            return Err("fc_min must be > 0".into());
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err("beta must be >= 0".into());
        }
        if !(self.d_cutoff > 0.0 && self.d_cutoff.is_finite()) {
            return Err("d_cutoff must be > 0".into());
        }
        Ok(())
    }
}

/// Smoothing weight for a sample `te_s` seconds after the previous one.
pub fn alpha(cutoff_hz: f64, te_s: f64) -> f64 {
    let tau = 1.0 / (2.0 * PI * cutoff_hz);
    1.0 / (1.0 + tau / te_s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowPassState {
    params: LowPassParams,
    prev_value: f64,
    prev_derivative: f64,
    prev_t_ms: f64,
    initialized: bool,
}

impl LowPassState {
    pub fn new(params: LowPassParams) -> Self {
        LowPassState {
            params,
            prev_value: 0.0,
            prev_derivative: 0.0,
            prev_t_ms: 0.0,
            initialized: false,
        }
    }

    pub fn params(&self) -> LowPassParams {
        self.params
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    /// Last smoothed output, if any sample has been seen.
    pub fn value(&self) -> Option<f64> {
        self.initialized.then_some(self.prev_value)
    }

    pub fn reset(&mut self) {
        self.initialized = false;
        self.prev_derivative = 0.0;
    }

    pub fn step(&mut self, x: f64, t_ms: f64) -> Result<f64, GestureError> {
        if !self.initialized {
            self.prev_value = x;
            self.prev_derivative = 0.0;
            self.prev_t_ms = t_ms;
            self.initialized = true;
            return Ok(x);
        }
        if t_ms <= self.prev_t_ms {
            return Err(GestureError::NonMonotonicTime {
                prev_ms: self.prev_t_ms,
                t_ms,
            });
        }
        let te = (t_ms - self.prev_t_ms) / 1000.0;
        let p = self.params;

        let raw_derivative = (x - self.prev_value) / te;
        let a_d = alpha(p.d_cutoff, te);
        let derivative = a_d * raw_derivative + (1.0 - a_d) * self.prev_derivative;

        let cutoff = p.fc_min + p.beta * derivative.abs();
        let a = alpha(cutoff, te);
        let out = a * x + (1.0 - a) * self.prev_value;

        self.prev_value = out;
        self.prev_derivative = derivative;
        self.prev_t_ms = t_ms;
        Ok(out)
    }
}

/// Free-function form of [`LowPassState::step`].
pub fn lowpass_step(state: &mut LowPassState, x: f64, t_ms: f64) -> Result<f64, GestureError> {
    state.step(x, t_ms)
}

/// Two independent scalar filters for a 2D cursor.
#[derive(Debug, Clone, PartialEq)]
pub struct LowPass2 {
    pub x: LowPassState,
    pub y: LowPassState,
}

impl LowPass2 {
    pub fn new(params: LowPassParams) -> Self {
        LowPass2 {
            x: LowPassState::new(params),
            y: LowPassState::new(params),
        }
    }

    pub fn step(&mut self, x: f64, y: f64, t_ms: f64) -> Result<(f64, f64), GestureError> {
        Ok((self.x.step(x, t_ms)?, self.y.step(y, t_ms)?))
    }

    pub fn reset(&mut self) {
        self.x.reset();
        self.y.reset();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    ActivateBelow,
    ActivateAbove,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisState {
    active: bool,
    on_threshold: f64,
    off_threshold: f64,
    polarity: Polarity,
}

impl HysteresisState {
    pub fn new(
        polarity: Polarity,
        on_threshold: f64,
        off_threshold: f64,
    ) -> Result<Self, GestureError> {
        let ordered = match polarity {
            Polarity::ActivateBelow => on_threshold < off_threshold,
            Polarity::ActivateAbove => on_threshold > off_threshold,
        };
        if !ordered || !on_threshold.is_finite() || !off_threshold.is_finite() {
            return Err(GestureError::InvalidThresholds(format!(
                "{polarity:?} with on={on_threshold} off={off_threshold}"
            )));
        }
        Ok(HysteresisState {
            active: false,
            on_threshold,
            off_threshold,
            polarity,
        })
    }

    pub fn below(on: f64, off: f64) -> Result<Self, GestureError> {
        Self::new(Polarity::ActivateBelow, on, off)
    }

    pub fn above(on: f64, off: f64) -> Result<Self, GestureError> {
        Self::new(Polarity::ActivateAbove, on, off)
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn reset(&mut self) {
        self.active = false;
    }

    pub fn step(&mut self, v: f64) -> bool {
        match self.polarity {
            Polarity::ActivateBelow => {
                if v < self.on_threshold {
                    self.active = true;
                } else if v > self.off_threshold {
                    self.active = false;
                }
            }
            Polarity::ActivateAbove => {
                if v > self.on_threshold {
                    self.active = true;
                } else if v < self.off_threshold {
                    self.active = false;
                }
            }
        }
        self.active
    }
}

pub fn hysteresis_step(state: &mut HysteresisState, v: f64) -> bool {
    state.step(v)
}

/// Accepts a new value only after it has been observed continuously for
/// `hold_ms`.
///
/// The state starts unsettled: `stable()` reports the initial value but
/// `is_settled()` stays false until some value has persisted for the hold
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct Debounce<T = bool> {
    candidate: T,
    candidate_since_ms: Option<f64>,
    stable: T,
    settled: bool,
    hold_ms: f64,
    last_t_ms: Option<f64>,
}

pub type DebounceState = Debounce<bool>;

impl<T: Copy + PartialEq> Debounce<T> {
    pub fn new(hold_ms: f64, initial: T) -> Self {
        Debounce {
            candidate: initial,
            candidate_since_ms: None,
            stable: initial,
            settled: false,
            hold_ms: hold_ms.max(0.0),
            last_t_ms: None,
        }
    }

    pub fn stable(&self) -> T {
        self.stable
    }

    pub fn is_settled(&self) -> bool {
        self.settled
    }

    pub fn hold_ms(&self) -> f64 {
        self.hold_ms
    }

    pub fn step(&mut self, value: T, t_ms: f64) -> Result<T, GestureError> {
        if let Some(prev) = self.last_t_ms {
            if t_ms < prev {
                return Err(GestureError::NonMonotonicTime {
                    prev_ms: prev,
                    t_ms,
                });
            }
        }
        self.last_t_ms = Some(t_ms);

        if self.candidate_since_ms.is_none() || value != self.candidate {
            self.candidate = value;
            self.candidate_since_ms = Some(t_ms);
        }
        let since = self.candidate_since_ms.unwrap_or(t_ms);
        if t_ms - since >= self.hold_ms {
            self.stable = self.candidate;
            self.settled = true;
        }
        Ok(self.stable)
    }
}

pub fn debounce_step(state: &mut DebounceState, b: bool, t_ms: f64) -> Result<bool, GestureError> {
    state.step(b, t_ms)
}
