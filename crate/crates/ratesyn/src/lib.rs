//! Worst-case convergence-rate certification and synthesis for
//! first-order optimization methods.
//!
//! A first-order method is modeled as a SISO linear controller in
//! feedback with the gradient of the function being minimized. The
//! gradient of an `m`-strongly-convex function with `l`-Lipschitz
//! gradient is, after a loop transformation, a nonlinearity confined to
//! the normalized sector (-1, 1); integral quadratic constraints
//! describe it more finely (slope restriction). On top of that model
//! the crate provides:
//!
//! - [`analysis`]: certify a geometric convergence rate for a FIXED
//!   algorithm by solving a small semidefinite feasibility problem and
//!   bisecting on the rate;
//! - [`synthesis`]: eliminate the controller from the certification
//!   problem and find the best rate achievable by ANY finite-memory
//!   method, then recover a controller attaining it — gradient descent
//!   with stepsize `2/(m+l)` is optimal against the sector class
//!   (rate `(l-m)/(l+m)`), and the rate `1 - sqrt(m/l)` is optimal
//!   against slope-restricted gradients under the one-tap IQC;
//! - [`algo`], [`iqc`]: the controller realizations, test functions and
//!   simulator, and the IQC factorizations feeding both pipelines;
//! - [`lmi`], [`lemmas`], [`linalg`]: the self-contained numerical
//!   layer — a dense LMI feasibility solver, the elimination and
//!   completion lemmas, and small symmetric-matrix utilities.

pub mod algo;
pub mod analysis;
pub mod iqc;
pub mod lemmas;
pub mod linalg;
pub mod lmi;
pub mod synthesis;

pub use algo::{
    build_plant, gradient_descent, heavy_ball, simulate, triple_momentum, AlgoError, AlgorithmSS,
    PlantSS, SimulationResult, TestFunction,
};
pub use analysis::{
    assemble_analysis_lmi, certify_rate, AnalysisError, IqcFamily, RateCertificate,
};
pub use iqc::{
    check_iqc_on_trajectory, off_by_one_iqc, sector_iqc, zames_falb_fir_iqc, IqcError,
    IqcFactorization, ZamesFalbCoeffs,
};
pub use lemmas::{
    complete_matrix, elimination_feasible, recover_theta, CompletionProblem, EliminationProblem,
    LemmasError,
};
pub use linalg::{
    is_pd, is_psd, min_eig, nullspace_basis, schur_complement, LinalgError, RectMatrix, SymMatrix,
    Tolerances,
};
pub use lmi::{
    evaluate, solve_feasibility, witness_margins, AffineLmi, ConstraintMargin, FeasibilityResult,
    LmiError, LmiSystem, Sense,
};
pub use synthesis::{
    assemble_final_lmis, recover_controller, sector_elimination_boundary,
    sector_elimination_problem, sector_feasible, sector_witness_q, synthesize_sector,
    synthesize_slope_restricted, SectorSynthesisResult, SlopeSynthesisResult, SynthesisError,
};
