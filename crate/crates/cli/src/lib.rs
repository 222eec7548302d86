pub mod dsl;
pub mod run;

pub use dsl::{parse_session, Diagnostic, Session};
pub use run::{check_text, run_session, Options, Report};
