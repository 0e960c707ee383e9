//! Closed-loop run: controller at the sample rate, plant substepped to
//! 10 ms or finer, seeded noise, one frame per sample.

use timeseries_core::{Dataset, SampleFrame, SplitMix64};

use crate::plant::{controller_step, plant_step, PlantParams, PlantState, VOLTAGE_LIMIT};
use crate::{lqr_gain, Result, SequenceSchedule};

/// Simulates `floor(duration * rate_hz)` samples starting from rest.
///
/// Each frame draws exactly four pseudo-random numbers, in this order:
/// ripple innovation fan 0, ripple innovation fan 1, yaw quantization
/// offset, pitch quantization offset. Keeping the order fixed is what makes
/// runs bit-reproducible from the seed.
pub fn run_cycle(
    params: &PlantParams,
    schedule: &SequenceSchedule,
    duration: f64,
    rate_hz: f64,
    noise_seed: u64,
) -> Result<Dataset> {
    assert!(duration > 0.0, "duration must be positive");
    assert!(rate_hz > 0.0, "rate must be positive");

    let k = lqr_gain(
        &params.a_matrix(),
        &params.b_matrix(),
        &params.q_matrix(),
        &params.r_matrix(),
    )?;

    let n = (duration * rate_hz).floor() as usize;
    let dt = 1.0 / rate_hz;
    let substeps = ((dt / 0.01) - 1e-9).ceil().max(1.0) as usize;
    let dt_sub = dt / substeps as f64;
    let alpha = (-dt / params.ripple_tau).exp();

    let mut rng = SplitMix64::new(noise_seed);
    let mut state = PlantState::default();
    let mut ripple = (0.0f64, 0.0f64);
    let mut frames = Vec::with_capacity(n);

    for i in 0..n {
        let t = i as f64 / rate_hz;
        let target = schedule.target_at(t);
        let (u0, u1) = controller_step(&state, target, &k);

        let peak = params.ripple_volts;
        ripple.0 = alpha * ripple.0 + (1.0 - alpha) * rng.next_range(-peak, peak);
        ripple.1 = alpha * ripple.1 + (1.0 - alpha) * rng.next_range(-peak, peak);
        let q = params.angle_quantum / 2.0;
        let yaw_noise = rng.next_range(-q, q);
        let pitch_noise = rng.next_range(-q, q);

        let applied = (
            (u0 + ripple.0).clamp(-VOLTAGE_LIMIT, VOLTAGE_LIMIT),
            (u1 + ripple.1).clamp(-VOLTAGE_LIMIT, VOLTAGE_LIMIT),
        );

        frames.push(SampleFrame {
            t,
            voltage0: applied.0,
            voltage1: applied.1,
            current0: state.current0,
            current1: state.current1,
            motor_speed0: state.speed0,
            motor_speed1: state.speed1,
            yaw: state.yaw + yaw_noise,
            pitch: state.pitch + pitch_noise,
            target_yaw: target.0,
            target_pitch: target.1,
            yaw_dot: state.yaw_dot,
            pitch_dot: state.pitch_dot,
        });

        for _ in 0..substeps {
            state = plant_step(params, &state, applied, dt_sub);
        }
    }

    Ok(Dataset::new(frames, rate_hz).expect("simulator emits uniform time steps"))
}
