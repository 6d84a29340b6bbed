//! Fixtures shared by the criterion benches.

use quadroot::{MethodParams, PrecisionContext, Problem, ProblemId, Scalar, StoppingCriteria};

pub struct Fixture {
    pub ctx: PrecisionContext,
    pub problem: Problem,
    pub x0: Scalar,
    pub params: MethodParams,
    pub stop: StoppingCriteria,
}

/// `problem` from its default start at `digits` precision with the
/// default stopping rule.
pub fn fixture(problem: ProblemId, digits: u32) -> Fixture {
    let ctx = PrecisionContext::new(digits).expect("digits above minimum");
    let problem = Problem::new(problem);
    Fixture {
        ctx,
        x0: problem.default_x0(ctx),
        problem,
        params: MethodParams::defaults(ctx),
        stop: StoppingCriteria::defaults(ctx),
    }
}
