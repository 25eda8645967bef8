//! Closed-form accelerate / cruise / decelerate speed profiles.

use serde::{Deserialize, Serialize};

/// Straight-line motion over `distance` starting at speed `v0` and ending at rest.
///
/// The speed ramps up at `accel` to `v_peak`, cruises, then ramps down to zero.
/// When the distance is too short to reach the speed limit the cruise phase is
/// empty and the profile is triangular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionProfile {
    pub distance: f64,
    pub v0: f64,
    pub v_peak: f64,
    pub accel: f64,
    pub t_accel: f64,
    pub t_cruise: f64,
    pub t_decel: f64,
    pub total: f64,
}

impl MotionProfile {
    pub fn new(distance: f64, v0: f64, v_max: f64, accel: f64) -> Self {
        assert!(v_max > 0.0 && accel > 0.0, "limits must be positive");
        let distance = distance.max(0.0);
        // Never start faster than the limit, and never faster than can still stop in `distance`.
        let v0 = v0.clamp(0.0, v_max).min((2.0 * accel * distance).sqrt());
        let d_up = (v_max * v_max - v0 * v0) / (2.0 * accel);
        let d_down = v_max * v_max / (2.0 * accel);
        let (v_peak, t_cruise) = if d_up + d_down <= distance {
            (v_max, (distance - d_up - d_down) / v_max)
        } else {
            (((2.0 * accel * distance + v0 * v0) / 2.0).sqrt(), 0.0)
        };
        let t_accel = (v_peak - v0) / accel;
        let t_decel = v_peak / accel;
        Self {
            distance,
            v0,
            v_peak,
            accel,
            t_accel,
            t_cruise,
            t_decel,
            total: t_accel + t_cruise + t_decel,
        }
    }

    /// A zero-length profile (robot stays put).
    pub fn at_rest() -> Self {
        Self {
            distance: 0.0,
            v0: 0.0,
            v_peak: 0.0,
            accel: 1.0,
            t_accel: 0.0,
            t_cruise: 0.0,
            t_decel: 0.0,
            total: 0.0,
        }
    }

    fn accel_distance(&self) -> f64 {
        self.v0 * self.t_accel + 0.5 * self.accel * self.t_accel * self.t_accel
    }

    fn cruise_end_distance(&self) -> f64 {
        self.accel_distance() + self.v_peak * self.t_cruise
    }

    pub fn position(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.total);
        if t <= self.t_accel {
            self.v0 * t + 0.5 * self.accel * t * t
        } else if t <= self.t_accel + self.t_cruise {
            self.accel_distance() + self.v_peak * (t - self.t_accel)
        } else {
            let tau = t - self.t_accel - self.t_cruise;
            (self.cruise_end_distance() + self.v_peak * tau - 0.5 * self.accel * tau * tau)
                .min(self.distance)
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.v0;
        }
        if t >= self.total {
            return 0.0;
        }
        if t <= self.t_accel {
            self.v0 + self.accel * t
        } else if t <= self.t_accel + self.t_cruise {
            self.v_peak
        } else {
            (self.v_peak - self.accel * (t - self.t_accel - self.t_cruise)).max(0.0)
        }
    }

    /// Earliest time at which `position(t) == s` (position is monotone).
    pub fn time_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.distance {
            return self.total;
        }
        let s_acc = self.accel_distance();
        if s <= s_acc {
            // v0 t + a t²/2 = s
            let a = self.accel;
            return (-self.v0 + (self.v0 * self.v0 + 2.0 * a * s).sqrt()) / a;
        }
        let s_cruise = self.cruise_end_distance();
        if s <= s_cruise {
            return self.t_accel + (s - s_acc) / self.v_peak;
        }
        // v_peak τ - a τ²/2 = s - s_cruise, taking the earlier root
        let rem = s - s_cruise;
        let disc = (self.v_peak * self.v_peak - 2.0 * self.accel * rem).max(0.0);
        self.t_accel + self.t_cruise + (self.v_peak - disc.sqrt()) / self.accel
    }
}
