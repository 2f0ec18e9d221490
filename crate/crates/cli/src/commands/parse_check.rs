use drift_ode_expr::parse;

use crate::error::{CliError, Result};

/// Normalised form, syntax tree, and a sample value when the expression is constant or in `t`.
pub fn report(source: &str) -> Result<String> {
    let expr =
        parse(source).map_err(|e| CliError::Usage(format!("cannot parse `{source}`: {e}")))?;
    let mut s = format!("normalized: {expr}\ntree:\n{}", expr.tree());
    if !s.ends_with('\n') {
        s.push('\n');
    }
    if !expr.uses(drift_ode_expr::Var::I) {
        match expr.eval_t(0.0) {
            Ok(v) => s.push_str(&format!("value at t = 0: {v}\n")),
            Err(e) => s.push_str(&format!("value at t = 0: {e}\n")),
        }
    }
    Ok(s)
}
