//! Finite element spaces on triangles: quadratic Lagrange (P2), the
//! Hsieh–Clough–Tocher C1 macroelement and the linear Hellan–Herrmann–Johnson
//! symmetric tensor element, plus quadrature.

pub mod hct;
pub mod hhj;
pub mod p2;
pub mod quadrature;

pub use hct::{HctElement, HctSpace};
pub use hhj::{HhjElement, HhjSpace};
pub use p2::{P2DofMap, P2Element};
pub use quadrature::{edge_rule, triangle_rule, EdgeRule, TriangleRule};

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::Tensor;

/// Result of a pointwise evaluation of order 0, 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Derivative {
    Value(f64),
    Gradient(Point),
    Hessian(Tensor),
}

pub(crate) fn check_order(order: u8) -> Result<()> {
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    Ok(())
}
