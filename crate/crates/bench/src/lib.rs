//! Fixtures shared by the benchmarks.

use duffamp_core::{FixedPoint, ModelParams};

/// `γ = 2, Δ = −2, χ = 1`: bistable for `I_p ∈ (50/54, 1)`.
pub fn bistable() -> ModelParams {
    ModelParams::new(2.0, -2.0, 1.0).expect("valid parameters")
}

/// `γ = 2, Δ = −1, χ = 1`: monostable.
pub fn monostable() -> ModelParams {
    ModelParams::new(2.0, -1.0, 1.0).expect("valid parameters")
}

/// Lower-branch fixed point at `n0 = 0.36` of [`bistable`].
pub fn lower_branch_point() -> FixedPoint {
    FixedPoint::at_occupation(0.36, &bistable()).expect("valid occupation")
}
