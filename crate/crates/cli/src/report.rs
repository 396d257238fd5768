use serde_json::{json, Value};

/// Output of one command. `holds` is false for a negative answer
/// (different genus, not primitive, a failed check), which maps to exit 1.
#[derive(Clone, Debug)]
pub struct Report {
    pub result: Value,
    pub lines: Vec<String>,
    pub notes: Vec<String>,
    pub holds: bool,
}

impl Report {
    pub fn new(result: Value) -> Self {
        Report { result, lines: Vec::new(), notes: Vec::new(), holds: true }
    }

    pub fn line(mut self, s: impl Into<String>) -> Self {
        self.lines.push(s.into());
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn holds(mut self, holds: bool) -> Self {
        self.holds = holds;
        self
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str("note: ");
            out.push_str(n);
            out.push('\n');
        }
        out
    }

    pub fn render_json(&self, command: &[String]) -> String {
        let doc = json!({
            "command": command,
            "holds": self.holds,
            "result": self.result,
            "notes": self.notes,
        });
        serde_json::to_string_pretty(&doc).expect("reports serialise") + "\n"
    }
}

/// Error document for `--format json`.
pub fn error_json(command: &[String], kind: &str, message: &str, code: u8) -> String {
    let doc = json!({ "command": command, "error": { "kind": kind, "message": message, "exit_code": code } });
    serde_json::to_string_pretty(&doc).expect("reports serialise") + "\n"
}
