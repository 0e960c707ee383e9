//! Linear plant model and the saturated state-feedback controller.
//!
//! The mechanical state vector is x = (Θ, Ψ, Θ̇, Ψ̇) with pitch Θ and yaw Ψ
//! in radians. Both fans push the beam up (pitch) with the same sign and
//! turn it (yaw) with opposite signs:
//!
//! ```text
//! Θ̈ = −kθ Θ − cθ Θ̇ + bθ (U0 + U1)
//! Ψ̈ = −kψ Ψ − cψ Ψ̇ + bψ (U0 − U1)
//! ```
//!
//! Motor currents and speeds are first-order lags of |U| so the emitted
//! dataset carries all 13 recorded channels.

use nalgebra::DMatrix;

pub const VOLTAGE_LIMIT: f64 = 24.0;

/// Everything numeric about one rig: mechanics, motor lags, LQR weights and
/// noise magnitudes. Serialized 1:1 as the `[plant]` table of the config
/// file; see `configs/sim-default.toml` for the documented defaults.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantParams {
    /// Restoring stiffness per axis, 1/s^2. Both are 1.0 so the open-loop
    /// plant is stable and the Euclidean state norm is a Lyapunov function.
    pub pitch_spring: f64,
    pub yaw_spring: f64,
    /// Viscous damping per axis, 1/s. Yaw includes bearing friction and is
    /// several times stiffer, which is what keeps its rate ripple low.
    pub pitch_damping: f64,
    pub yaw_damping: f64,
    /// Thrust gain of one fan on each axis, rad/s^2 per volt.
    pub pitch_gain: f64,
    pub yaw_gain: f64,
    /// Motor electrical model: I and s are first-order lags of |U|.
    pub current_gain: f64,
    pub current_tau: f64,
    pub speed_gain: f64,
    pub speed_tau: f64,
    /// LQR weights, diagonal of Q over (Θ, Ψ, Θ̇, Ψ̇) and of R over (U0, U1).
    pub q_diag: [f64; 4],
    pub r_diag: [f64; 2],
    /// Encoder LSB in radians; angle readings carry uniform noise of ±LSB/2.
    pub angle_quantum: f64,
    /// Peak of the raw voltage ripple innovation (volts) and the time
    /// constant of the low-pass that band-limits it (seconds).
    pub ripple_volts: f64,
    pub ripple_tau: f64,
}

impl Default for PlantParams {
    fn default() -> PlantParams {
        PlantParams {
            pitch_spring: 1.0,
            yaw_spring: 1.0,
            pitch_damping: 0.8,
            yaw_damping: 3.0,
            pitch_gain: 0.06,
            yaw_gain: 0.03,
            current_gain: 0.12,
            current_tau: 0.02,
            speed_gain: 120.0,
            speed_tau: 0.3,
            q_diag: [290.0, 410.0, 0.0, 30.0],
            r_diag: [1e-4, 1e-4],
            angle_quantum: 0.000767,
            ripple_volts: 5.0,
            ripple_tau: 0.04,
        }
    }
}

impl PlantParams {
    /// 4×4 state matrix over (Θ, Ψ, Θ̇, Ψ̇).
    pub fn a_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            -self.pitch_spring, 0.0, -self.pitch_damping, 0.0,
            0.0, -self.yaw_spring, 0.0, -self.yaw_damping,
        ])
    }

    /// 4×2 input matrix over (U0, U1).
    pub fn b_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(4, 2, &[
            0.0, 0.0,
            0.0, 0.0,
            self.pitch_gain, self.pitch_gain,
            self.yaw_gain, -self.yaw_gain,
        ])
    }

    pub fn q_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&self.q_diag))
    }

    pub fn r_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&self.r_diag))
    }
}

/// Full simulator state: beam mechanics plus the two motor models.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub pitch: f64,
    pub yaw: f64,
    pub pitch_dot: f64,
    pub yaw_dot: f64,
    pub current0: f64,
    pub current1: f64,
    pub speed0: f64,
    pub speed1: f64,
}

impl PlantState {
    pub fn norm(&self) -> f64 {
        (self.pitch * self.pitch
            + self.yaw * self.yaw
            + self.pitch_dot * self.pitch_dot
            + self.yaw_dot * self.yaw_dot
            + self.current0 * self.current0
            + self.current1 * self.current1
            + self.speed0 * self.speed0
            + self.speed1 * self.speed1)
            .sqrt()
    }

    fn derivative(&self, p: &PlantParams, u0: f64, u1: f64) -> PlantState {
        PlantState {
            pitch: self.pitch_dot,
            yaw: self.yaw_dot,
            pitch_dot: -p.pitch_spring * self.pitch - p.pitch_damping * self.pitch_dot
                + p.pitch_gain * (u0 + u1),
            yaw_dot: -p.yaw_spring * self.yaw - p.yaw_damping * self.yaw_dot
                + p.yaw_gain * (u0 - u1),
            current0: (p.current_gain * u0.abs() - self.current0) / p.current_tau,
            current1: (p.current_gain * u1.abs() - self.current1) / p.current_tau,
            speed0: (p.speed_gain * u0.abs() - self.speed0) / p.speed_tau,
            speed1: (p.speed_gain * u1.abs() - self.speed1) / p.speed_tau,
        }
    }

    fn add_scaled(&self, k: &PlantState, h: f64) -> PlantState {
        PlantState {
            pitch: self.pitch + h * k.pitch,
            yaw: self.yaw + h * k.yaw,
            pitch_dot: self.pitch_dot + h * k.pitch_dot,
            yaw_dot: self.yaw_dot + h * k.yaw_dot,
            current0: self.current0 + h * k.current0,
            current1: self.current1 + h * k.current1,
            speed0: self.speed0 + h * k.speed0,
            speed1: self.speed1 + h * k.speed1,
        }
    }
}

/// One 4th-order Runge-Kutta step of the plant under constant voltages.
/// The step must stay at or below 10 ms; callers sampling slower than
/// 100 Hz substep internally.
pub fn plant_step(params: &PlantParams, state: &PlantState, voltages: (f64, f64), dt: f64) -> PlantState {
    assert!(dt > 0.0 && dt <= 0.01 + 1e-12, "plant_step dt out of range: {dt}");
    let (u0, u1) = voltages;
    let k1 = state.derivative(params, u0, u1);
    let k2 = state.add_scaled(&k1, dt / 2.0).derivative(params, u0, u1);
    let k3 = state.add_scaled(&k2, dt / 2.0).derivative(params, u0, u1);
    let k4 = state.add_scaled(&k3, dt).derivative(params, u0, u1);
    let mut out = state.add_scaled(&k1, dt / 6.0);
    out = out.add_scaled(&k2, dt / 3.0);
    out = out.add_scaled(&k3, dt / 3.0);
    out.add_scaled(&k4, dt / 6.0)
}

/// Saturated LQR tracking law: u = clamp(−K·(x − x_ref), ±24 V) with
/// x_ref = (Θ_T, Ψ_T, 0, 0). `target` is (yaw, pitch).
pub fn controller_step(state: &PlantState, target: (f64, f64), k: &DMatrix<f64>) -> (f64, f64) {
    let (target_yaw, target_pitch) = target;
    let e = [
        state.pitch - target_pitch,
        state.yaw - target_yaw,
        state.pitch_dot,
        state.yaw_dot,
    ];
    let mut u = [0.0f64; 2];
    for (row, out) in u.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (col, ev) in e.iter().enumerate() {
            acc += k[(row, col)] * ev;
        }
        *out = (-acc).clamp(-VOLTAGE_LIMIT, VOLTAGE_LIMIT);
    }
    (u[0], u[1])
}
