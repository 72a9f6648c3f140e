//! Concrete field theories: charged scalar, Dirac, Yang–Mills, metric-affine
//! gravity and the Komar current, with their energy tensors and the relations
//! between them.

use std::sync::Arc;

use thiserror::Error;

use crate::connections::{ConnectionError, FiberedChart, GeneralConnection};
use crate::geometry::GeometryError;
use crate::symexpr::Expr;
use crate::variational::VariationalError;

pub mod coupled;
pub mod dirac;
pub mod gravity;
pub mod komar;
pub mod scalar;
pub mod yangmills;

pub use coupled::{einstein_from_currents, total_conservation, EinsteinReport, ScalarGaugeModel, TotalConservation};
pub use dirac::{dirac_lagrangian, dirac_onshell_divergence_rhs, gamma_matrices, DiracModel};
pub use gravity::{gravity_current_identity, gravity_energy_tensor, gravity_lagrangian, gravity_momentum, GravityModel};
pub use komar::{komar_current, komar_lift, lie_derivative_connection, lie_derivative_connection_covariant, KomarData};
pub use scalar::{scalar_lagrangian, scalar_onshell_divergence_rhs, ScalarModel};
pub use yangmills::{maxwell_tensor, yang_mills_energy_tensor, yang_mills_lagrangian, YangMillsModel};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("model `{0}` needs {1}")]
    Unsupported(&'static str, String),
}

pub(crate) fn delta(a: usize, b: usize) -> Expr {
    if a == b {
        Expr::one()
    } else {
        Expr::zero()
    }
}

/// Direct sum of general connections whose fiber coordinates are concatenated in `fc`.
pub(crate) fn stack_connections(
    fc: Arc<FiberedChart>,
    parts: &[&GeneralConnection],
) -> Result<GeneralConnection, ConnectionError> {
    let k = parts.iter().flat_map(|p| p.k.iter().cloned()).collect();
    GeneralConnection::new(fc, k)
}

/// Concatenate the fibers of several charts over the same base.
pub(crate) fn product_chart(parts: &[&FiberedChart]) -> Result<Arc<FiberedChart>, ConnectionError> {
    let base = parts[0].base.clone();
    let mut names = Vec::new();
    let mut bounds = Vec::new();
    for p in parts {
        names.extend(p.fiber.iter().cloned());
        bounds.extend(p.fiber_bounds.iter().cloned());
    }
    FiberedChart::from_owned(base, names, bounds)
}
