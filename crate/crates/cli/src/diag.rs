//! Diagnostics on stderr. `LAMG_COLOR` = `always`/`1` or `never`/`0`;
//! otherwise color follows whether stderr is a terminal.

use std::env;
use std::io::IsTerminal;

use lamg_core::ParseError;

pub enum Failure {
    Usage(String),
    Io(String, String),
    Parse(String, ParseError),
    Type(String, String),
    /// A stuck term: an interpreter bug, never a user error.
    Internal(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            _ => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Io(path, e) => format!("{path}: {e}"),
            Failure::Parse(path, e) => format!("{path}:{}: {}", e.pos, e.message),
            Failure::Type(path, e) => format!("{path}: type error: {e}"),
            Failure::Internal(e) => format!("internal: {e}"),
        }
    }
}

fn color_enabled() -> bool {
    match env::var("LAMG_COLOR").as_deref() {
        Ok("always" | "1" | "true") => true,
        Ok("never" | "0" | "false") => false,
        _ => std::io::stderr().is_terminal(),
    }
}

pub fn report(f: &Failure) {
    if color_enabled() {
        eprintln!("\x1b[1;31merror\x1b[0m: {}", f.message());
    } else {
        eprintln!("error: {}", f.message());
    }
}
