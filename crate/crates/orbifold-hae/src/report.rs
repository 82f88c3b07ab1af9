//! Named check results shared by every verifier.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual_zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, residual_zero: bool) -> Self {
        Check { name: name.into(), residual_zero, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.residual_zero)
}

/// One line per check, `ok`/`FAIL` first so the output greps well.
pub fn render(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let tag = if c.residual_zero { "ok  " } else { "FAIL" };
        s.push_str(&format!("{tag} {}", c.name));
        if let Some(n) = &c.note {
            s.push_str(&format!("  ({n})"));
        }
        s.push('\n');
    }
    s
}
