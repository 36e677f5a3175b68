//! Entry-expression language and scenario documents.

mod expr;
mod scenario;

pub use expr::{eval_expr, parse_expr, BinOp, EvalError, Expr, ParseError, Program};
pub use scenario::{
    load_scenario, load_scenario_with_params, substitute_params, OperatorSpec, Scenario,
    ScenarioError,
};
