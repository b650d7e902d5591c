use std::fmt;
use std::sync::Arc;

use crate::mesh::{BoundaryTag, Point2, CHANNEL_HEIGHT};

pub type VelocityField = Arc<dyn Fn(Point2) -> [f64; 2] + Send + Sync>;

/// What a boundary tag prescribes for the velocity.
#[derive(Clone)]
pub enum VelocityCondition {
    Fixed([f64; 2]),
    Profile(VelocityField),
    /// Do-nothing outflow: no constraint.
    Natural,
}

impl VelocityCondition {
    pub fn value_at(&self, p: Point2) -> Option<[f64; 2]> {
        match self {
            VelocityCondition::Fixed(v) => Some(*v),
            VelocityCondition::Profile(f) => Some(f(p)),
            VelocityCondition::Natural => None,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        !matches!(self, VelocityCondition::Natural)
    }
}

impl fmt::Debug for VelocityCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VelocityCondition::Fixed(v) => write!(f, "Fixed({v:?})"),
            VelocityCondition::Profile(_) => write!(f, "Profile(..)"),
            VelocityCondition::Natural => write!(f, "Natural"),
        }
    }
}

/// Velocity prescription per boundary tag. A node touched by edges with
/// different tags takes the value of the highest-priority tag, in the order
/// Lid, Inflow, Wall, Outflow.
#[derive(Clone, Debug)]
pub struct BoundaryConditionSet {
    pub lid: VelocityCondition,
    pub wall: VelocityCondition,
    pub inflow: VelocityCondition,
    pub outflow: VelocityCondition,
}

impl BoundaryConditionSet {
    /// Lid moving with `(1, 0)`, no-slip elsewhere.
    pub fn cavity() -> Self {
        Self {
            lid: VelocityCondition::Fixed([1.0, 0.0]),
            ..Self::homogeneous()
        }
    }

    /// No-slip everywhere the boundary is Dirichlet, natural outflow.
    pub fn homogeneous() -> Self {
        Self {
            lid: VelocityCondition::Fixed([0.0, 0.0]),
            wall: VelocityCondition::Fixed([0.0, 0.0]),
            inflow: VelocityCondition::Fixed([0.0, 0.0]),
            outflow: VelocityCondition::Natural,
        }
    }

    /// Parabolic inflow `u_x = 4 u_max y (H − y) / H²`, no-slip walls,
    /// do-nothing outflow.
    pub fn step_channel(u_max: f64) -> Self {
        let h = CHANNEL_HEIGHT;
        Self {
            inflow: VelocityCondition::Profile(Arc::new(move |p: Point2| [4.0 * u_max * p.y * (h - p.y) / (h * h), 0.0])),
            ..Self::homogeneous()
        }
    }

    pub fn condition(&self, tag: BoundaryTag) -> Option<&VelocityCondition> {
        match tag {
            BoundaryTag::Lid => Some(&self.lid),
            BoundaryTag::Wall => Some(&self.wall),
            BoundaryTag::Inflow => Some(&self.inflow),
            BoundaryTag::Outflow => Some(&self.outflow),
            BoundaryTag::Interior => None,
        }
    }

    /// Lower is stronger.
    pub fn priority(tag: BoundaryTag) -> u8 {
        match tag {
            BoundaryTag::Lid => 0,
            BoundaryTag::Inflow => 1,
            BoundaryTag::Wall => 2,
            BoundaryTag::Outflow => 3,
            BoundaryTag::Interior => 4,
        }
    }
}
