//! Deterministic fixed-timestep kinematic replay of scenario records.
//!
//! The engine is semantically equivalent to the exported documents: the ego
//! drives at constant speed, the challenger holds its initial speed until
//! the maneuver trigger fires, then follows the closed-form maneuver
//! profiles. Challenger positions are integrated with the stepwise midpoint
//! rule (2nd order); the trigger crossing is located exactly within the
//! step so that refinement of the timestep converges cleanly.

use crate::error::ReplayError;
use crate::extract::{BrakeScenario, CutInScenario, ScenarioRecord, SwerveScenario};
use crate::models::{CubicBrakeProfile, SinusoidalLaneChange};

/// Horizon after which a distance trigger that has not fired makes the
/// scenario parameters inconsistent.
const TRIGGER_HORIZON_S: f64 = 60.0;

/// Trace continues this long after the maneuver completes.
const TAIL_S: f64 = 2.0;

/// One sampled simulation state: time, center position, longitudinal speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
}

/// Fixed-timestep replay result for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub timestep: f64,
    /// Simulation time at which the maneuver action started.
    pub trigger_time: f64,
    /// Simulation time at which the maneuver action completed.
    pub maneuver_end_time: f64,
    pub ego_states: Vec<SimState>,
    pub challenger_states: Vec<SimState>,
    pub ego_length: f64,
    pub challenger_length: f64,
}

impl SimTrace {
    pub fn end_time(&self) -> f64 {
        self.ego_states.last().map_or(0.0, |s| s.t)
    }

    /// Serializes the trace as CSV with columns
    /// `t, ego_x, ego_y, ego_v, ch_x, ch_y, ch_v`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,ego_x,ego_y,ego_v,ch_x,ch_y,ch_v\n");
        for (e, c) in self.ego_states.iter().zip(&self.challenger_states) {
            out.push_str(&format!(
                "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                e.t, e.x, e.y, e.v, c.x, c.y, c.v
            ));
        }
        out
    }
}

/// Bumper gap (challenger rear minus ego front) at the sample nearest `t`.
pub fn gap_at(trace: &SimTrace, t: f64) -> Result<f64, ReplayError> {
    let end = trace.end_time();
    if t < -1e-9 || t > end + 1e-9 {
        return Err(ReplayError::TimeOutOfRange { t, end });
    }
    let idx = ((t / trace.timestep).round() as usize).min(trace.ego_states.len() - 1);
    let ego = &trace.ego_states[idx];
    let ch = &trace.challenger_states[idx];
    Ok((ch.x - trace.challenger_length / 2.0) - (ego.x + trace.ego_length / 2.0))
}

/// Longitudinal maneuver the challenger performs once triggered.
struct ChallengerProgram {
    /// Speed profile over the maneuver window.
    profile: CubicBrakeProfile,
    /// Maneuver duration, s.
    duration: f64,
    /// Lateral profile as a function of the longitudinal travel since the
    /// trigger; `None` keeps the lateral position fixed.
    lateral: Option<SinusoidalLaneChange>,
    /// Lateral oscillation (swerve): amplitude, angular frequency and the
    /// lane-center baseline; evaluated over time instead of travel.
    oscillation: Option<(f64, f64, f64)>,
    /// Lateral position before the trigger.
    y0: f64,
}

impl ChallengerProgram {
    fn speed(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            self.profile.v0
        } else if tau >= self.duration {
            self.profile.vf
        } else {
            self.profile.velocity_at(tau)
        }
    }

    fn lateral_at(&self, tau: f64, travel: f64) -> f64 {
        if tau <= 0.0 {
            return self.y0;
        }
        if let Some(lc) = &self.lateral {
            if tau >= self.duration {
                // Endpoint matching: after completion the lateral position
                // is the exact target.
                return lc.df;
            }
            return lc.lateral_unchecked(travel.clamp(0.0, lc.travel));
        }
        if let Some((amplitude, omega, center)) = self.oscillation {
            let phase = omega * tau.clamp(0.0, self.duration);
            return center - amplitude * phase.cos();
        }
        self.y0
    }
}

struct Setup {
    v_ego: f64,
    v_ch0: f64,
    ego_y: f64,
    ego_length: f64,
    challenger_length: f64,
    /// Bumper gap at t = 0.
    initial_gap: f64,
    /// Gap at which the maneuver fires; `None` means a pure time trigger.
    trigger_distance: Option<f64>,
    trigger_time_config: f64,
    program: ChallengerProgram,
}

/// Replays a scenario with the given timestep, producing uniform-grid
/// traces for ego and challenger.
pub fn replay(scenario: &ScenarioRecord, timestep: f64) -> Result<SimTrace, ReplayError> {
    if !(timestep > 0.0 && timestep <= 0.1) {
        return Err(ReplayError::BadTimestep { value: timestep });
    }
    let setup = match scenario {
        ScenarioRecord::Brake(s) => brake_setup(s)?,
        ScenarioRecord::CutIn(s) => cutin_setup(s)?,
        ScenarioRecord::Swerve(s) => swerve_setup(s)?,
    };
    run(setup, timestep)
}

fn brake_setup(s: &BrakeScenario) -> Result<Setup, ReplayError> {
    if !(s.brake_duration > 0.0) || !(s.trigger_distance > 0.0) || !(s.initial_gap > 0.0) {
        return Err(ReplayError::InvalidScenario {
            detail: "brake scenario needs positive duration, trigger distance and gap".into(),
        });
    }
    Ok(Setup {
        v_ego: s.v_ego0,
        v_ch0: s.v_ch0,
        ego_y: s.lane_center_y,
        ego_length: s.ego.length,
        challenger_length: s.challenger.length,
        initial_gap: s.initial_gap,
        trigger_distance: Some(s.trigger_distance),
        trigger_time_config: s.trigger_time_s,
        program: ChallengerProgram {
            profile: CubicBrakeProfile {
                v0: s.v_ch0,
                vf: s.v_ch_final,
                duration: s.brake_duration,
            },
            duration: s.brake_duration,
            lateral: None,
            oscillation: None,
            y0: s.lane_center_y,
        },
    })
}

fn cutin_setup(s: &CutInScenario) -> Result<Setup, ReplayError> {
    if !(s.cutin_distance > 0.0) || !(s.trigger_distance > 0.0) || !(s.initial_gap > 0.0) {
        return Err(ReplayError::InvalidScenario {
            detail: "cut-in scenario needs positive travel, trigger distance and gap".into(),
        });
    }
    if !(s.v_ch0 + s.v_ch_final > 0.0) {
        return Err(ReplayError::InvalidScenario {
            detail: "cut-in challenger speeds must be positive".into(),
        });
    }
    // The speed change is coupled to the lateral maneuver: the duration
    // follows from the distance traveled during the lane change.
    let duration = 2.0 * s.cutin_distance / (s.v_ch0 + s.v_ch_final);
    Ok(Setup {
        v_ego: s.v_ego0,
        v_ch0: s.v_ch0,
        ego_y: s.target_lane_center,
        ego_length: s.ego.length,
        challenger_length: s.challenger.length,
        initial_gap: s.initial_gap,
        trigger_distance: Some(s.trigger_distance),
        trigger_time_config: s.trigger_time_s,
        program: ChallengerProgram {
            profile: CubicBrakeProfile {
                v0: s.v_ch0,
                vf: s.v_ch_final,
                duration,
            },
            duration,
            lateral: Some(SinusoidalLaneChange {
                d0: s.source_lane_center + s.initial_lane_offset,
                df: s.target_lane_center + s.final_lane_offset,
                travel: s.cutin_distance,
            }),
            oscillation: None,
            y0: s.source_lane_center + s.initial_lane_offset,
        },
    })
}

fn swerve_setup(s: &SwerveScenario) -> Result<Setup, ReplayError> {
    if !(s.lateral_range > 0.0) || !(s.max_lateral_acceleration > 0.0) || !(s.initial_distance > 0.0)
    {
        return Err(ReplayError::InvalidScenario {
            detail: "swerve scenario needs positive range, lateral acceleration and gap".into(),
        });
    }
    let amplitude = s.lateral_range / 2.0;
    let omega = (s.max_lateral_acceleration / amplitude).sqrt();
    // Two full oscillation periods, starting from the rest point.
    let duration = 4.0 * std::f64::consts::PI / omega;
    let y0 = s.ch_lane_center - amplitude;
    Ok(Setup {
        v_ego: s.v_ego0,
        v_ch0: s.v_ch0,
        ego_y: s.ego_lane_center,
        ego_length: s.ego.length,
        challenger_length: s.challenger.length,
        initial_gap: s.initial_distance,
        trigger_distance: None,
        trigger_time_config: s.trigger_time_s,
        program: ChallengerProgram {
            profile: CubicBrakeProfile {
                v0: s.v_ch0,
                vf: s.v_ch0,
                duration,
            },
            duration,
            lateral: None,
            oscillation: Some((amplitude, omega, s.ch_lane_center)),
            y0,
        },
    })
}

fn run(setup: Setup, dt: f64) -> Result<SimTrace, ReplayError> {
    // Center positions; the gap refers to bumpers.
    let ego_x0 = 0.0;
    let ch_x0 = setup.initial_gap + (setup.ego_length + setup.challenger_length) / 2.0;
    let v_rel = setup.v_ch0 - setup.v_ego;

    // Locate the trigger. Pre-trigger speeds are constant, so the gap is
    // linear in time and the in-step crossing is exact.
    let trigger_time = match setup.trigger_distance {
        None => setup.trigger_time_config,
        Some(distance) => {
            let gap = |t: f64| setup.initial_gap + v_rel * t;
            let closing = v_rel <= 0.0;
            let fired = |g: f64| {
                if closing {
                    g <= distance + 1e-12
                } else {
                    g >= distance - 1e-12
                }
            };
            if fired(gap(0.0)) {
                0.0
            } else {
                let mut crossed = None;
                let mut n = 1u64;
                loop {
                    let t = n as f64 * dt;
                    if fired(gap(t)) {
                        crossed = Some(t);
                        break;
                    }
                    if t > TRIGGER_HORIZON_S {
                        break;
                    }
                    n += 1;
                }
                if crossed.is_none() {
                    return Err(ReplayError::TriggerNeverFired {
                        horizon: TRIGGER_HORIZON_S,
                    });
                }
                // Exact crossing of the linear pre-trigger gap.
                (distance - setup.initial_gap) / v_rel
            }
        }
    };

    let maneuver_end_time = trigger_time + setup.program.duration;
    let end_time = maneuver_end_time + TAIL_S;
    let n_samples = (end_time / dt).ceil() as usize + 1;

    let mut ego_states = Vec::with_capacity(n_samples);
    let mut challenger_states = Vec::with_capacity(n_samples);

    // Challenger longitudinal state advances by the midpoint rule once the
    // maneuver runs; before the trigger the closed form is exact.
    let mut ch_x = ch_x0;
    let mut prev_t = 0.0f64;
    let mut travel = 0.0; // longitudinal travel since the trigger

    for n in 0..n_samples {
        let t = n as f64 * dt;
        ego_states.push(SimState {
            t,
            x: ego_x0 + setup.v_ego * t,
            y: setup.ego_y,
            v: setup.v_ego,
        });

        if t <= trigger_time {
            ch_x = ch_x0 + setup.v_ch0 * t;
        } else {
            // Integrate from the previous sample (or the exact trigger
            // time for the partial first step).
            let a = prev_t.max(trigger_time);
            if prev_t <= trigger_time {
                ch_x = ch_x0 + setup.v_ch0 * trigger_time;
                travel = 0.0;
            }
            let mid = 0.5 * (a + t);
            let v_mid = setup.program.speed(mid - trigger_time);
            ch_x += (t - a) * v_mid;
            travel += (t - a) * v_mid;
        }

        let tau = t - trigger_time;
        challenger_states.push(SimState {
            t,
            x: ch_x,
            y: setup.program.lateral_at(tau, travel),
            v: setup.program.speed(tau),
        });
        prev_t = t;
    }

    Ok(SimTrace {
        timestep: dt,
        trigger_time,
        maneuver_end_time,
        ego_states,
        challenger_states,
        ego_length: setup.ego_length,
        challenger_length: setup.challenger_length,
    })
}
