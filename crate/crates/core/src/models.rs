//! Closed-form maneuver primitives shared by export and replay.
//!
//! Three building blocks parameterize every scenario in the database:
//!
//! * a cubic velocity profile for brake (and coupled cut-in speed) maneuvers,
//!   `v(t) = v0 + (vf - v0) * (3s^2 - 2s^3)` with `s = t/T`, whose end slopes
//!   vanish so the maneuver joins constant-speed phases without acceleration
//!   jumps;
//! * a sinusoidal lateral profile for lane changes, parameterized by the
//!   longitudinal distance traveled during the change, which pins both end
//!   points exactly;
//! * the constant-velocity back-calculation that places the vehicles at
//!   t = 0 so a distance trigger fires at a configurable simulation time
//!   (5 s by default).

use crate::error::ModelError;

/// Default simulation time at which the maneuver trigger distance is
/// reached, giving a system under test time to initialize.
pub const DEFAULT_TRIGGER_TIME: f64 = 5.0;

/// Cubic velocity transition from `v0` to `vf` over `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBrakeProfile {
    pub v0: f64,
    pub vf: f64,
    pub duration: f64,
}

impl CubicBrakeProfile {
    pub fn new(v0: f64, vf: f64, duration: f64) -> Result<Self, ModelError> {
        if !(duration > 0.0) {
            return Err(ModelError::InvalidProfile {
                detail: format!("duration must be positive, got {duration}"),
            });
        }
        Ok(CubicBrakeProfile { v0, vf, duration })
    }

    /// Velocity at `t` in `[0, duration]`.
    ///
    /// Both boundary slopes are zero: `v'(0) = v'(T) = 0`.
    pub fn velocity(&self, t: f64) -> Result<f64, ModelError> {
        check_range(t, 0.0, self.duration)?;
        Ok(self.velocity_at(t))
    }

    pub(crate) fn velocity_at(&self, t: f64) -> f64 {
        let s = (t / self.duration).clamp(0.0, 1.0);
        self.v0 + (self.vf - self.v0) * (3.0 * s * s - 2.0 * s * s * s)
    }

    /// Signed acceleration at `t` (negative while braking).
    pub fn acceleration(&self, t: f64) -> f64 {
        let s = (t / self.duration).clamp(0.0, 1.0);
        (self.vf - self.v0) / self.duration * 6.0 * s * (1.0 - s)
    }

    /// Analytic maximum of the deceleration magnitude, attained at `T/2`:
    /// `1.5 * (v0 - vf) / T`.
    pub fn peak_deceleration(&self) -> f64 {
        1.5 * (self.v0 - self.vf) / self.duration
    }

    /// Distance traveled from `0` to `t`, integrated in closed form.
    pub fn distance_until(&self, t: f64) -> Result<f64, ModelError> {
        check_range(t, 0.0, self.duration)?;
        let s = t / self.duration;
        Ok(self.v0 * t + (self.vf - self.v0) * self.duration * (s.powi(3) - 0.5 * s.powi(4)))
    }

    /// Total distance over the whole maneuver: `T * (v0 + vf) / 2`.
    pub fn total_distance(&self) -> f64 {
        self.duration * (self.v0 + self.vf) / 2.0
    }
}

/// Sinusoidal lane-change profile parameterized by longitudinal travel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalLaneChange {
    /// Initial lateral position (road frame, m).
    pub d0: f64,
    /// Final lateral position (road frame, m).
    pub df: f64,
    /// Longitudinal distance traveled by the vehicle during the change, m.
    pub travel: f64,
}

impl SinusoidalLaneChange {
    pub fn new(d0: f64, df: f64, travel: f64) -> Result<Self, ModelError> {
        if !(travel > 0.0) {
            return Err(ModelError::InvalidProfile {
                detail: format!("cut-in distance must be positive, got {travel}"),
            });
        }
        Ok(SinusoidalLaneChange { d0, df, travel })
    }

    /// Lateral position after traveling `s` of the maneuver's longitudinal
    /// extent: `d(s) = d0 + (df - d0)/2 * (1 - cos(pi * s / S))`.
    ///
    /// Endpoint slopes are zero and `d(S) = df` holds exactly, so the
    /// simulated and recorded maneuvers share their end points.
    pub fn lateral(&self, s: f64) -> Result<f64, ModelError> {
        check_range(s, 0.0, self.travel)?;
        Ok(self.lateral_unchecked(s))
    }

    pub(crate) fn lateral_unchecked(&self, s: f64) -> f64 {
        let phase = std::f64::consts::PI * (s / self.travel).clamp(0.0, 1.0);
        self.d0 + (self.df - self.d0) / 2.0 * (1.0 - phase.cos())
    }
}

/// Back-calculates the bumper gap at simulation start so that, under
/// constant velocities, the gap equals `trigger_distance` at `t_trigger`.
///
/// Fails when the challenger would have to start behind the ego; the caller
/// is expected to shorten the initialization time (see
/// [`resolve_trigger_timing`]).
pub fn initial_gap_for_trigger(
    trigger_distance: f64,
    v_ego: f64,
    v_ch: f64,
    t_trigger: f64,
) -> Result<f64, ModelError> {
    if !(trigger_distance > 0.0) {
        return Err(ModelError::InvalidProfile {
            detail: format!("trigger distance must be positive, got {trigger_distance}"),
        });
    }
    let gap = trigger_distance + t_trigger * (v_ego - v_ch);
    if gap <= 0.0 {
        // gap(t) = D + t (v_ego - v_ch) stays positive for t < D / (v_ch - v_ego).
        let max_trigger = trigger_distance / (v_ch - v_ego);
        return Err(ModelError::NonPositiveGap { gap, max_trigger });
    }
    Ok(gap)
}

/// Picks an initialization time and the matching t = 0 gap for a scenario.
///
/// Uses [`DEFAULT_TRIGGER_TIME`] whenever the back-calculation succeeds;
/// otherwise halves the time remaining until the challenger would overtake
/// the ego, which always yields a positive starting gap of `D/2`.
pub fn resolve_trigger_timing(trigger_distance: f64, v_ego: f64, v_ch: f64) -> (f64, f64) {
    match initial_gap_for_trigger(trigger_distance, v_ego, v_ch, DEFAULT_TRIGGER_TIME) {
        Ok(gap) => (DEFAULT_TRIGGER_TIME, gap),
        Err(_) => {
            let t = 0.5 * trigger_distance / (v_ch - v_ego);
            let gap = trigger_distance + t * (v_ego - v_ch);
            (t, gap)
        }
    }
}

fn check_range(value: f64, lo: f64, hi: f64) -> Result<(), ModelError> {
    // Tolerate tiny overshoot from accumulated timestep arithmetic.
    let slack = 1e-9 * hi.abs().max(1.0);
    if value < lo - slack || value > hi + slack {
        return Err(ModelError::OutOfRange { value, lo, hi });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_velocity_boundaries_and_midpoint() {
        let p = CubicBrakeProfile::new(19.44, 13.89, 4.0).unwrap();
        assert_relative_eq!(p.velocity(0.0).unwrap(), 19.44);
        assert_relative_eq!(p.velocity(4.0).unwrap(), 13.89);
        assert_relative_eq!(p.velocity(2.0).unwrap(), 16.665, max_relative = 1e-12);
        assert!(p.velocity(4.5).is_err());
        assert!(p.velocity(-0.5).is_err());
    }

    #[test]
    fn peak_deceleration_matches_finite_difference_search() {
        // Independent route: maximize -dv/dt on a 1 ms grid.
        let grid_peak = |p: &CubicBrakeProfile| {
            let h = 1e-3;
            let steps = (p.duration / h) as usize;
            (0..steps)
                .map(|i| {
                    let t = i as f64 * h;
                    -(p.velocity_at(t + h) - p.velocity_at(t)) / h
                })
                .fold(f64::MIN, f64::max)
        };

        let p = CubicBrakeProfile::new(19.44, 13.89, 4.0).unwrap();
        assert_relative_eq!(p.peak_deceleration(), 2.08125, max_relative = 1e-9);
        assert!((p.peak_deceleration() - grid_peak(&p)).abs() < 1e-3);
        assert!((p.peak_deceleration() - 2.081).abs() < 1e-3);

        let q = CubicBrakeProfile::new(20.0, 14.0, 3.0).unwrap();
        assert_relative_eq!(q.peak_deceleration(), 3.0);
        assert!((q.peak_deceleration() - grid_peak(&q)).abs() < 1e-3);

        let flat = CubicBrakeProfile::new(15.0, 15.0, 2.0).unwrap();
        assert_eq!(flat.peak_deceleration(), 0.0);
    }

    #[test]
    fn cubic_is_monotone_non_increasing() {
        let p = CubicBrakeProfile::new(19.44, 13.89, 4.0).unwrap();
        let mut prev = f64::MAX;
        for i in 0..=4000 {
            let v = p.velocity_at(i as f64 * 1e-3);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn cubic_distance_matches_quadrature() {
        // Simpson's rule is exact for cubics, so this checks the closed form
        // against an independent numerical route.
        let p = CubicBrakeProfile::new(19.44, 13.89, 4.0).unwrap();
        let n = 10_000;
        let h = p.duration / n as f64;
        let mut integral = 0.0;
        for i in 0..n {
            let a = i as f64 * h;
            integral += h / 6.0
                * (p.velocity_at(a)
                    + 4.0 * p.velocity_at(a + h / 2.0)
                    + p.velocity_at(a + h));
        }
        assert_relative_eq!(p.total_distance(), integral, max_relative = 1e-6);
        assert_relative_eq!(
            p.distance_until(p.duration).unwrap(),
            p.total_distance(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn sinusoid_boundaries_and_midpoint() {
        let lc = SinusoidalLaneChange::new(0.0, 3.5, 80.0).unwrap();
        assert_relative_eq!(lc.lateral(0.0).unwrap(), 0.0);
        assert_relative_eq!(lc.lateral(80.0).unwrap(), 3.5);
        assert_relative_eq!(lc.lateral(40.0).unwrap(), 1.75);
        assert!(lc.lateral(81.0).is_err());
    }

    #[test]
    fn sinusoid_is_monotone_between_endpoints() {
        let lc = SinusoidalLaneChange::new(-0.3, 3.2, 64.0).unwrap();
        let mut prev = f64::MIN;
        for i in 0..=1000 {
            let d = lc.lateral_unchecked(i as f64 * 0.064);
            assert!(d >= prev - 1e-12);
            prev = d;
        }
    }

    #[test]
    fn trigger_gap_examples() {
        assert_relative_eq!(initial_gap_for_trigger(30.0, 20.0, 15.0, 5.0).unwrap(), 55.0);
        assert_relative_eq!(initial_gap_for_trigger(20.0, 15.0, 15.0, 5.0).unwrap(), 20.0);
        match initial_gap_for_trigger(5.0, 15.0, 18.0, 5.0) {
            Err(ModelError::NonPositiveGap { gap, .. }) => {
                assert_relative_eq!(gap, -10.0);
            }
            other => panic!("expected NonPositiveGap, got {other:?}"),
        }
    }

    #[test]
    fn trigger_gap_reproduces_distance_at_trigger_time() {
        // Simulating both vehicles at constant speed from g0 must reproduce
        // the trigger distance at t_trigger exactly.
        for (d, ve, vc) in [(30.0, 20.0, 15.0), (12.0, 14.0, 16.0), (45.0, 18.0, 18.0)] {
            let g0 = initial_gap_for_trigger(d, ve, vc, 5.0).unwrap();
            let gap_at_trigger = g0 + 5.0 * (vc - ve);
            assert_relative_eq!(gap_at_trigger, d, max_relative = 1e-12);
        }
    }

    #[test]
    fn shortened_trigger_keeps_gap_positive() {
        let (t, gap) = resolve_trigger_timing(5.0, 15.0, 18.0);
        assert!(t > 0.0 && t < DEFAULT_TRIGGER_TIME);
        assert_relative_eq!(gap, 2.5);
        let (t, gap) = resolve_trigger_timing(30.0, 20.0, 15.0);
        assert_eq!(t, DEFAULT_TRIGGER_TIME);
        assert_relative_eq!(gap, 55.0);
    }
}
