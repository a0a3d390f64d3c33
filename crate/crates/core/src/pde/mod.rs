//! Radial semilinear solver, blow-up problems, classifiers and barrier checks.

mod barrier;
mod blowup;
mod classify;
mod comparison;
mod grid;
mod line;
mod mass_ode;
mod operator;
mod solver;
mod stationary;

pub use barrier::{
    barrier_grid, search_mrk, search_psi, verify_barrier, Barrier, BarrierCheck, BarrierPoint,
    BarrierSearch, MrkBarrier, PsiBarrier, SearchSettings,
};
pub use blowup::{
    solve_blowup, solve_blowup_annulus, solve_blowup_ball, BlowupProblem, BlowupSolution,
    Discretisation, LevelRecord, Region, SATURATION_TOL,
};
pub use classify::{
    csp_probability, punctured_classify, umax_classify, PuncturedReport, UmaxReport, LINE_SOURCE,
    PLATEAU_TOL, PUNCTURED_SOURCE, UMAX_SOURCE, ZERO_TOL,
};
pub use comparison::{
    compare_solutions_monotonicity, theorem2_shift_check, ComparisonReport, ShiftReport,
    COMPARISON_TOL,
};
pub use grid::{Grid, DEFAULT_RATIO, MAX_RATIO};
pub use line::{
    change_of_variables_line, inverse_square_on_line, line_asymptotics, LineAsymptotics, LineChart,
};
pub use mass_ode::mass_ode;
pub use operator::{LineStencil, RadialFiniteVolume, Row, SpatialOperator};
pub use solver::{
    operator_for, solve_semilinear, Boundaries, Boundary, Field, SolveOptions, Stepper,
};
pub use stationary::{stationary_residual, StationaryCandidate};
