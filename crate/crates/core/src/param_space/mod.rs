//! Hamilton-type flows in the parameter space of trial wavefunctions.
//!
//! A trial family psi(q; u, v) is driven either by the energy flow F
//! (du/dt = dH/dv, dv/dt = -dH/du with H = <psi|H|psi>) or by the flux flow
//! G, which also honours the parameter-space currents j = -hbar Im<psi|d psi>.

pub mod family;
pub mod flows;
pub mod linalg;

pub use family::{FamilyModel, Geometry, TrialFamily};
pub use flows::{
    alternate_compose, dynamical_pair_check, flux_flow_step, hamilton_flow, hamilton_flow_step,
    loop_action, loop_action_invariant, wellposedness_determinant, wellposedness_determinant_with, FlowReport,
    FlowRow,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters split into paired halves u and v.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(default)]
    pub time: f64,
}

impl ParameterState {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let s = Self { u, v, time: 0.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u.len() != self.v.len() {
            return Err(Error::InvalidInput(format!(
                "u has {} components but v has {}",
                self.u.len(),
                self.v.len()
            )));
        }
        if self.u.iter().chain(&self.v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("parameter state is not finite".into()));
        }
        Ok(())
    }

    pub fn pairs(&self) -> usize {
        self.u.len()
    }

    /// z = (u, v).
    pub fn to_vec(&self) -> Vec<f64> {
        self.u.iter().chain(&self.v).copied().collect()
    }

    pub fn from_vec(z: &[f64], time: f64) -> Self {
        let n = z.len() / 2;
        Self { u: z[..n].to_vec(), v: z[n..].to_vec(), time }
    }
}
