//! Stand-in for the expensive policy: tracks the reference trajectory.

use rand::Rng;

use super::env::EnvState;
use super::trajectory::ReferenceTrajectory;
use crate::action::{Action, Source};

/// Reference action for the current step, corrected by the gap between the
/// state and the reference state, plus uniform noise of half-width `noise`
/// on every continuous channel. Channels are clamped to `±v_max_env`.
///
/// While the state sits exactly on the reference the correction is zero,
/// so with `noise = 0` the reference action is returned unchanged.
pub fn oracle_policy_step<R: Rng + ?Sized>(
    state: &EnvState,
    reference: &ReferenceTrajectory,
    noise: f64,
    v_max_env: f64,
    rng: &mut R,
) -> Action {
    let step = state.step;
    let base = reference.action_at(step);
    let ref_pos = reference.position_at(step);
    let ref_rot = reference.orientation_at(step);
    let mut ch = [0.0; 6];
    for i in 0..3 {
        ch[i] = base.trans[i] + (ref_pos[i] - state.ee_pos[i]);
        ch[i + 3] = base.rot[i] + (ref_rot[i] - state.ee_rot[i]);
    }
    if noise > 0.0 {
        for v in ch.iter_mut() {
            *v += rng.random_range(-noise..=noise);
        }
    }
    for v in ch.iter_mut() {
        *v = v.clamp(-v_max_env, v_max_env);
    }
    Action::from_continuous(ch, base.gripper, Source::Vla)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::trajectory::{gen_reference_trajectory, PhaseProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference() -> ReferenceTrajectory {
        let p = PhaseProfile::default();
        let c = p.capacity();
        gen_reference_trajectory(&p, [0.0; 3], [0.7 * c, 0.6 * c, -0.65 * c], 4).unwrap()
    }

    #[test]
    fn noiseless_on_reference_is_exact() {
        let r = reference();
        let mut s = EnvState::new(r.positions[0], vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for k in 0..r.len() {
            let a = oracle_policy_step(&s, &r, 0.0, 1.0, &mut rng);
            assert_eq!(a.trans, r.actions[k].trans);
            assert_eq!(a.rot, r.actions[k].rot);
            assert_eq!(a.gripper, r.actions[k].gripper);
            assert_eq!(a.source, Source::Vla);
            s.apply(&a);
        }
    }

    #[test]
    fn noise_is_bounded() {
        let r = reference();
        let s = EnvState::new(r.positions[0], vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a = oracle_policy_step(&s, &r, 0.01, 1.0, &mut rng);
            for (x, y) in a.continuous().iter().zip(r.actions[0].continuous()) {
                assert!((x - y).abs() <= 0.01 + 1e-15);
            }
        }
    }

    #[test]
    fn seeded_noise_reproduces() {
        let r = reference();
        let s = EnvState::new(r.positions[0], vec![]);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10)
                .map(|_| oracle_policy_step(&s, &r, 0.05, 1.0, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn corrects_drift_and_clamps() {
        let r = reference();
        let mut s = EnvState::new(r.positions[0], vec![]);
        s.ee_pos[0] -= 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = oracle_policy_step(&s, &r, 0.0, 1.0, &mut rng);
        assert!((a.trans[0] - (r.actions[0].trans[0] + 0.1)).abs() < 1e-12);
        s.ee_pos[1] += 50.0;
        let a = oracle_policy_step(&s, &r, 0.0, 1.0, &mut rng);
        assert_eq!(a.trans[1], -1.0);
    }
}
