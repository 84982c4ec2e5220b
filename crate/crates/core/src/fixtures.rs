//! Small hand-built instances used by tests, the acceptance suite and the CLI.

use crate::controlled::{ControlPair, ControlledFusionFrame};
use crate::fusion::WeightedSubspaceFamily;
use crate::hilbert::{Operator, SubspaceBasis};
use crate::tolerances::Tolerances;

/// The ℝ³ example: coordinate planes `span{e₁,e₂}`, `span{e₁,e₃}`,
/// `span{e₂,e₃}` with unit weights,
/// `C = [[1,0,0],[0,1,0],[1,0,1]]` and `C′ = [[1,0,0],[0,1,0],[0,1,1]]`.
///
/// `S_W = [[2,2,2],[0,2,0],[0,2,2]]`, optimal bounds `1` and `4`. The local
/// operator of the second plane is not Hermitian, so the square-root gate
/// fails at index 1.
pub fn r3_example() -> ControlledFusionFrame<f64> {
    ControlledFusionFrame::new(r3_family(), r3_controls()).expect("valid example")
}

pub fn r3_family() -> WeightedSubspaceFamily<f64> {
    WeightedSubspaceFamily::new(
        [[0, 1], [0, 2], [1, 2]]
            .iter()
            .map(|axes| (SubspaceBasis::coordinate(3, axes).expect("axes in range"), 1.0))
            .collect(),
    )
    .expect("valid family")
}

pub fn r3_controls() -> ControlPair<f64> {
    let c = Operator::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]]).expect("square");
    let cp = Operator::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]).expect("square");
    ControlPair::new(c, cp, &Tolerances::default()).expect("invertible controls")
}

/// The coordinate lines of `ℝⁿ` with unit weights and `C = C′ = Id`: a Parseval frame.
pub fn coordinate_parseval(n: usize) -> ControlledFusionFrame<f64> {
    ControlledFusionFrame::uncontrolled(
        WeightedSubspaceFamily::new(
            (0..n)
                .map(|i| (SubspaceBasis::coordinate(n, &[i]).expect("axis in range"), 1.0))
                .collect(),
        )
        .expect("valid family"),
    )
}
