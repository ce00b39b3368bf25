//! Three degree-of-freedom point-mass dynamics for a thrusting lander.
//!
//! Position and velocity live in a target-centered frame. Rotating-frame
//! accelerations are evaluated in the body-centered frame, reached by adding
//! [`BodyParams::r_offset`] to the position. Translational state is propagated
//! with a fixed-step RK4 integrator holding thrust, disturbance and mass
//! constant across the step; mass is propagated with an explicit Euler step of
//! the rocket equation.

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Reference gravity used to convert specific impulse into exhaust velocity.
pub const G_REF: f64 = 9.8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("mass {mass:.3} kg fell to or below the dry-mass floor {floor:.3} kg")]
    DepletedMass { mass: f64, floor: f64 },
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanderState {
    /// Position relative to the landing target, m.
    pub r: Vec3,
    /// Velocity, m/s.
    pub v: Vec3,
    /// Mass, kg.
    pub m: f64,
    /// Elapsed time, s.
    pub t: f64,
    /// Propellant consumed so far, kg.
    pub fuel_used: f64,
}

impl LanderState {
    pub fn new(r: Vec3, v: Vec3, m: f64) -> Self {
        Self {
            r,
            v,
            m,
            t: 0.0,
            fuel_used: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(self.v.iter()).all(|x| x.is_finite())
            && self.m.is_finite()
            && self.t.is_finite()
            && self.fuel_used.is_finite()
    }
}

/// Physical parameters of the body being landed on, fixed for one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyParams {
    pub g: Vec3,
    /// Body rotation rate in the body-centered frame, rad/s.
    pub omega: Vec3,
    /// Vector from the body's rotation center to the target, m.
    pub r_offset: Vec3,
    /// Constant solar radiation pressure acceleration, m/s^2.
    pub srp: Vec3,
    pub isp: f64,
    pub g_ref: f64,
    /// Per-axis standard deviation of the disturbance force, N.
    pub f_env_sigma: Vec3,
    /// Mass below which the vehicle is out of propellant, kg.
    pub dry_mass: f64,
}

impl BodyParams {
    /// Flat, non-rotating body with the given gravity and engine.
    pub fn simple(g: Vec3, isp: f64, dry_mass: f64) -> Self {
        Self {
            g,
            omega: Vec3::zeros(),
            r_offset: Vec3::zeros(),
            srp: Vec3::zeros(),
            isp,
            g_ref: G_REF,
            f_env_sigma: Vec3::zeros(),
            dry_mass,
        }
    }

    /// Mass flow rate for a given thrust magnitude, kg/s.
    pub fn mass_flow(&self, thrust_mag: f64) -> f64 {
        thrust_mag / (self.isp * self.g_ref)
    }
}

/// Commanded thrust force vector, N.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThrustCommand(pub Vec3);

impl ThrustCommand {
    pub fn zero() -> Self {
        Self(Vec3::zeros())
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }
}

/// Coriolis and centrifugal terms `2 (v_a x w) + ((w x r_a) x w)`.
pub fn rotational_accel(r_a: &Vec3, v_a: &Vec3, omega: &Vec3) -> Vec3 {
    2.0 * v_a.cross(omega) + omega.cross(r_a).cross(omega)
}

fn acceleration(r: &Vec3, v: &Vec3, force: &Vec3, m: f64, body: &BodyParams) -> Vec3 {
    let r_a = r + body.r_offset;
    force / m + body.g + body.srp + rotational_accel(&r_a, v, &body.omega)
}

/// Advances the lander by one control step.
pub fn step_dynamics(
    state: &LanderState,
    cmd: &ThrustCommand,
    body: &BodyParams,
    f_env: &Vec3,
    dt: f64,
) -> Result<LanderState, DynamicsError> {
    if !(dt > 0.0) {
        return Err(DynamicsError::InvalidStep(dt));
    }
    let force = cmd.0 + f_env;
    let m = state.m;
    let (r0, v0) = (state.r, state.v);

    let k1r = v0;
    let k1v = acceleration(&r0, &v0, &force, m, body);
    let r1 = r0 + 0.5 * dt * k1r;
    let v1 = v0 + 0.5 * dt * k1v;
    let k2r = v1;
    let k2v = acceleration(&r1, &v1, &force, m, body);
    let r2 = r0 + 0.5 * dt * k2r;
    let v2 = v0 + 0.5 * dt * k2v;
    let k3r = v2;
    let k3v = acceleration(&r2, &v2, &force, m, body);
    let r3 = r0 + dt * k3r;
    let v3 = v0 + dt * k3v;
    let k4r = v3;
    let k4v = acceleration(&r3, &v3, &force, m, body);

    let r = r0 + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    let v = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

    let dm = dt * body.mass_flow(cmd.magnitude());
    let m_next = m - dm;
    if m_next <= body.dry_mass {
        return Err(DynamicsError::DepletedMass {
            mass: m_next,
            floor: body.dry_mass,
        });
    }
    Ok(LanderState {
        r,
        v,
        m: m_next,
        t: state.t + dt,
        fuel_used: state.fuel_used + dm,
    })
}

/// Draws one disturbance force, independent zero-mean Gaussian per axis.
pub fn sample_disturbance<R: Rng + ?Sized>(rng: &mut R, body: &BodyParams) -> Vec3 {
    Vec3::from_fn(|i, _| {
        let sigma = body.f_env_sigma[i];
        if sigma == 0.0 {
            0.0
        } else {
            let n: f64 = StandardNormal.sample(rng);
            sigma * n
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mars_body() -> BodyParams {
        BodyParams::simple(Vec3::new(0.0, 0.0, -3.7114), 225.0, 200.0)
    }

    #[test]
    fn rotational_accel_examples() {
        let z = rotational_accel(
            &Vec3::new(3.0, 4.0, 5.0),
            &Vec3::new(1.0, 2.0, 3.0),
            &Vec3::zeros(),
        );
        assert_eq!(z, Vec3::zeros());

        let w = Vec3::new(0.0, 0.0, 1e-3);
        let a = rotational_accel(&Vec3::new(1000.0, 0.0, 0.0), &Vec3::zeros(), &w);
        assert!((a - Vec3::new(1e-3, 0.0, 0.0)).norm() < 1e-15);

        let a = rotational_accel(&Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0), &w);
        assert!((a - Vec3::new(0.0, -2e-3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn free_drift() {
        let body = BodyParams::simple(Vec3::zeros(), 225.0, 200.0);
        let s = LanderState::new(Vec3::new(0.0, 0.0, 100.0), Vec3::new(0.0, 0.0, -10.0), 1000.0);
        let n = step_dynamics(&s, &ThrustCommand::zero(), &body, &Vec3::zeros(), 0.1).unwrap();
        assert!((n.r - Vec3::new(0.0, 0.0, 99.0)).norm() < 1e-12);
        assert_eq!(n.v, s.v);
        assert_eq!(n.m, s.m);
        assert!((n.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn constant_gravity_matches_closed_form() {
        let body = mars_body();
        let s = LanderState::new(Vec3::new(0.0, 0.0, 100.0), Vec3::new(0.0, 0.0, -10.0), 1000.0);
        let n = step_dynamics(&s, &ThrustCommand::zero(), &body, &Vec3::zeros(), 0.1).unwrap();
        // closed form: v + g dt, r + v dt + g dt^2 / 2
        assert!((n.v.z - (-10.37114)).abs() < 1e-12);
        assert!((n.r.z - 98.98144300).abs() < 1e-12);
    }

    #[test]
    fn mass_flow_example() {
        let body = mars_body();
        let s = LanderState::new(Vec3::new(0.0, 0.0, 1000.0), Vec3::zeros(), 2000.0);
        let cmd = ThrustCommand(Vec3::new(0.0, 9000.0, 12000.0));
        let n = step_dynamics(&s, &cmd, &body, &Vec3::zeros(), 1.0).unwrap();
        let expected: f64 = 15000.0 / (225.0 * 9.8);
        assert!((expected - 6.802721).abs() < 1e-6);
        assert!((s.m - n.m - expected).abs() < 1e-9);
        assert!((n.fuel_used - expected).abs() < 1e-9);
    }

    #[test]
    fn depleted_mass_is_reported() {
        let body = mars_body();
        let s = LanderState::new(Vec3::new(0.0, 0.0, 1000.0), Vec3::zeros(), 201.0);
        let cmd = ThrustCommand(Vec3::new(0.0, 0.0, 15000.0));
        let err = step_dynamics(&s, &cmd, &body, &Vec3::zeros(), 1.0).unwrap_err();
        assert!(matches!(err, DynamicsError::DepletedMass { .. }));
        assert!(step_dynamics(&s, &cmd, &body, &Vec3::zeros(), 0.0).is_err());
    }

    #[test]
    fn rk4_is_fourth_order() {
        // A rotating frame makes the acceleration depend on position and velocity.
        let mut body = BodyParams::simple(Vec3::new(0.0, 0.0, -0.01), 225.0, 1.0);
        body.omega = Vec3::new(0.02, -0.01, 0.03);
        body.r_offset = Vec3::new(0.0, 0.0, 250.0);
        let s0 = LanderState::new(Vec3::new(100.0, -50.0, 80.0), Vec3::new(1.0, 2.0, -1.0), 500.0);
        let horizon = 20.0;
        let run = |n: usize| {
            let dt = horizon / n as f64;
            let mut s = s0;
            for _ in 0..n {
                s = step_dynamics(&s, &ThrustCommand::zero(), &body, &Vec3::zeros(), dt).unwrap();
            }
            s.r
        };
        let reference = run(4096);
        let e1 = (run(40) - reference).norm();
        let e2 = (run(80) - reference).norm();
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn disturbance_statistics() {
        let mut body = mars_body();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(sample_disturbance(&mut rng, &body), Vec3::zeros());

        body.f_env_sigma = Vec3::repeat(100.0);
        let n = 100_000;
        let mut sum = Vec3::zeros();
        for _ in 0..n {
            sum += sample_disturbance(&mut rng, &body);
        }
        let mean = sum / n as f64;
        for i in 0..3 {
            assert!(mean[i].abs() < 1.5, "axis {i} mean {}", mean[i]);
        }

        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            assert_eq!(sample_disturbance(&mut a, &body), sample_disturbance(&mut b, &body));
        }
    }

    proptest! {
        #[test]
        fn mass_decreases_by_rocket_equation(
            tx in -8000.0..8000.0f64, ty in -8000.0..8000.0f64, tz in 100.0..10000.0f64,
            dt in 0.01..2.0f64, m in 1000.0..2200.0f64,
        ) {
            let body = mars_body();
            let s = LanderState::new(Vec3::new(0.0, 0.0, 2000.0), Vec3::new(-30.0, 0.0, -80.0), m);
            let cmd = ThrustCommand(Vec3::new(tx, ty, tz));
            let n = step_dynamics(&s, &cmd, &body, &Vec3::zeros(), dt).unwrap();
            let dm = dt * cmd.magnitude() / (225.0 * 9.8);
            prop_assert!(n.m < s.m);
            prop_assert!((s.m - n.m - dm).abs() < 1e-9);
        }

        #[test]
        fn offset_irrelevant_without_rotation(ox in -500.0..500.0f64, oz in -500.0..500.0f64) {
            let a = mars_body();
            let mut b = a;
            b.r_offset = Vec3::new(ox, 0.0, oz);
            let s = LanderState::new(Vec3::new(10.0, 20.0, 300.0), Vec3::new(-1.0, 0.5, -20.0), 1500.0);
            let cmd = ThrustCommand(Vec3::new(100.0, 0.0, 5000.0));
            let na = step_dynamics(&s, &cmd, &a, &Vec3::zeros(), 0.2).unwrap();
            let nb = step_dynamics(&s, &cmd, &b, &Vec3::zeros(), 0.2).unwrap();
            prop_assert_eq!(na, nb);
        }

        #[test]
        fn rotational_accel_scaling(
            wx in -1e-2..1e-2f64, wy in -1e-2..1e-2f64, wz in -1e-2..1e-2f64,
            c in 0.1..5.0f64, vx in -5.0..5.0f64,
        ) {
            let r = Vec3::new(300.0, -120.0, 500.0);
            let w = Vec3::new(wx, wy, wz);
            let base = rotational_accel(&r, &Vec3::zeros(), &w);
            let scaled = rotational_accel(&r, &Vec3::zeros(), &(c * w));
            prop_assert!((scaled - c * c * base).norm() <= 1e-12 * (1.0 + scaled.norm()));

            // Coriolis part is linear in velocity.
            let v = Vec3::new(vx, 1.0, -2.0);
            let cor1 = rotational_accel(&r, &v, &w) - base;
            let cor2 = rotational_accel(&r, &(2.0 * v), &w) - base;
            prop_assert!((cor2 - 2.0 * cor1).norm() <= 1e-12 * (1.0 + cor2.norm()));
        }
    }
}
