//! Actions, their provenance and the fixed-capacity action buffer.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Which model produced an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    /// The expensive vision-language-action policy.
    Vla,
    /// The lightweight ridge-regression generator.
    Lwm,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Vla => "VLA",
            Source::Lwm => "LWM",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "VLA" => Some(Source::Vla),
            "LWM" => Some(Source::Lwm),
            _ => None,
        }
    }
}

/// Per-step end-effector command: translational and rotational velocities
/// (displacement per timestep) plus a binary gripper state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub trans: [f64; 3],
    pub rot: [f64; 3],
    /// 0 = open, 1 = closed.
    pub gripper: u8,
    pub source: Source,
}

impl Action {
    pub fn new(trans: [f64; 3], rot: [f64; 3], gripper: u8, source: Source) -> Result<Self> {
        let a = Action {
            trans,
            rot,
            gripper,
            source,
        };
        a.validate()?;
        Ok(a)
    }

    /// Zero-velocity action holding the given gripper state.
    pub fn still(gripper: u8, source: Source) -> Self {
        Action {
            trans: [0.0; 3],
            rot: [0.0; 3],
            gripper,
            source,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.continuous().iter().all(|v| v.is_finite()) {
            return Err(Error::domain("action has non-finite components"));
        }
        if self.gripper > 1 {
            return Err(Error::domain(format!(
                "gripper must be 0 or 1, got {}",
                self.gripper
            )));
        }
        Ok(())
    }

    /// The six continuous channels: trans followed by rot.
    pub fn continuous(&self) -> [f64; 6] {
        let [x, y, z] = self.trans;
        let [rx, ry, rz] = self.rot;
        [x, y, z, rx, ry, rz]
    }

    pub fn from_continuous(channels: [f64; 6], gripper: u8, source: Source) -> Self {
        Action {
            trans: [channels[0], channels[1], channels[2]],
            rot: [channels[3], channels[4], channels[5]],
            gripper,
            source,
        }
    }
}

/// Scalar speed of an action: the largest translational magnitude.
pub fn translational_speed(a: &Action) -> f64 {
    a.trans.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// FIFO of the most recent actions, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionBuffer {
    capacity: usize,
    entries: VecDeque<Action>,
}

impl ActionBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::domain("action buffer capacity must be positive"));
        }
        Ok(ActionBuffer {
            capacity,
            entries: VecDeque::with_capacity(capacity + 1),
        })
    }

    /// Appends `a`, evicting the oldest entry when full.
    pub fn push(&mut self, a: Action) {
        self.entries.push_back(a);
        if self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Action> + '_ {
        self.entries.iter()
    }

    pub fn last(&self) -> Option<&Action> {
        self.entries.back()
    }

    /// Fraction of buffered actions produced by the expensive policy.
    pub fn vla_ratio(&self) -> Result<f64> {
        if self.entries.is_empty() {
            return Err(Error::domain("vla_ratio of an empty buffer"));
        }
        let vla = self
            .entries
            .iter()
            .filter(|a| a.source == Source::Vla)
            .count();
        Ok(vla as f64 / self.entries.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged(x: f64, source: Source) -> Action {
        Action::from_continuous([x, 0.0, 0.0, 0.0, 0.0, 0.0], 0, source)
    }

    fn xs(buf: &ActionBuffer) -> Vec<f64> {
        buf.iter().map(|a| a.trans[0]).collect()
    }

    #[test]
    fn push_under_capacity() {
        let mut buf = ActionBuffer::new(2).unwrap();
        buf.push(tagged(1.0, Source::Vla));
        buf.push(tagged(2.0, Source::Vla));
        assert_eq!(xs(&buf), vec![1.0, 2.0]);
    }

    #[test]
    fn push_evicts_oldest() {
        let mut buf = ActionBuffer::new(2).unwrap();
        for x in [1.0, 2.0, 3.0] {
            buf.push(tagged(x, Source::Vla));
        }
        assert_eq!(xs(&buf), vec![2.0, 3.0]);
    }

    #[test]
    fn push_into_empty() {
        let mut buf = ActionBuffer::new(6).unwrap();
        buf.push(tagged(1.0, Source::Vla));
        assert_eq!(xs(&buf), vec![1.0]);
        assert!(!buf.is_full());
    }

    #[test]
    fn zero_capacity_rejected() {
        assert!(ActionBuffer::new(0).is_err());
    }

    /// Every push sequence over a small alphabet leaves the buffer equal to
    /// the last `capacity` pushed items, in push order.
    #[test]
    fn push_order_exhaustive() {
        for capacity in 1..=4 {
            for len in 0..=6u32 {
                for code in 0..3u32.pow(len) {
                    let mut seq = Vec::new();
                    let mut c = code;
                    for _ in 0..len {
                        seq.push((c % 3) as f64);
                        c /= 3;
                    }
                    let mut buf = ActionBuffer::new(capacity).unwrap();
                    for &x in &seq {
                        buf.push(tagged(x, Source::Vla));
                    }
                    let start = seq.len().saturating_sub(capacity);
                    assert_eq!(xs(&buf), seq[start..].to_vec());
                }
            }
        }
    }

    #[test]
    fn vla_ratio_counts_sources() {
        let mut buf = ActionBuffer::new(6).unwrap();
        buf.push(tagged(0.0, Source::Vla));
        buf.push(tagged(0.0, Source::Vla));
        buf.push(tagged(0.0, Source::Lwm));
        assert!((buf.vla_ratio().unwrap() - 2.0 / 3.0).abs() < 1e-15);

        let mut all_vla = ActionBuffer::new(6).unwrap();
        let mut all_lwm = ActionBuffer::new(6).unwrap();
        for _ in 0..6 {
            all_vla.push(tagged(0.0, Source::Vla));
            all_lwm.push(tagged(0.0, Source::Lwm));
        }
        assert_eq!(all_vla.vla_ratio().unwrap(), 1.0);
        assert_eq!(all_lwm.vla_ratio().unwrap(), 0.0);
    }

    #[test]
    fn vla_ratio_empty_is_error() {
        let buf = ActionBuffer::new(3).unwrap();
        assert!(matches!(buf.vla_ratio(), Err(Error::Domain(_))));
    }

    #[test]
    fn speed_is_max_magnitude() {
        let a = |t: [f64; 3]| Action::new(t, [0.0; 3], 0, Source::Vla).unwrap();
        assert_eq!(translational_speed(&a([0.1, -0.4, 0.2])), 0.4);
        assert_eq!(translational_speed(&a([0.0, 0.0, 0.0])), 0.0);
        assert_eq!(translational_speed(&a([-0.7, 0.1, 0.1])), 0.7);
    }

    #[test]
    fn invalid_actions() {
        assert!(Action::new([f64::NAN, 0.0, 0.0], [0.0; 3], 0, Source::Vla).is_err());
        assert!(Action::new([0.0; 3], [0.0; 3], 2, Source::Vla).is_err());
    }

    proptest::proptest! {
        #[test]
        fn ratio_complements_lwm_share(sources in proptest::collection::vec(proptest::bool::ANY, 1..12)) {
            let mut buf = ActionBuffer::new(6).unwrap();
            for s in &sources {
                buf.push(tagged(0.0, if *s { Source::Vla } else { Source::Lwm }));
            }
            let lwm = buf.iter().filter(|a| a.source == Source::Lwm).count() as f64;
            let r = buf.vla_ratio().unwrap();
            proptest::prop_assert!((0.0..=1.0).contains(&r));
            proptest::prop_assert!((r - (1.0 - lwm / buf.len() as f64)).abs() < 1e-15);
        }

        #[test]
        fn speed_zero_iff_still(t in proptest::array::uniform3(-1.0f64..1.0), zero_mask in 0u8..8) {
            let mut trans = t;
            for (i, v) in trans.iter_mut().enumerate() {
                if zero_mask & (1 << i) != 0 { *v = 0.0; }
            }
            let a = Action::from_continuous([trans[0], trans[1], trans[2], 0.0, 0.0, 0.0], 0, Source::Vla);
            let all_zero = trans.iter().all(|v| *v == 0.0);
            proptest::prop_assert_eq!(translational_speed(&a) == 0.0, all_zero);
        }
    }
}
