use std::fmt;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Undetermined,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Undetermined => 2,
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One finding. Numeric findings always carry the tolerance they were judged
/// against; `ok` is the verdict when the finding is a test.
#[derive(Clone, Debug, Serialize)]
pub struct Finding {
    pub name: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ok: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<String>,
    pub results: Vec<Finding>,
    pub residuals: Vec<f64>,
    pub status: Status,
}

impl RunReport {
    pub fn new(command: &str, inputs: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            results: Vec::new(),
            residuals: Vec::new(),
            status: Status::Pass,
        }
    }

    /// A number compared against `tol`.
    pub fn measure(&mut self, name: &str, value: impl Into<Value>, tol: f64, ok: bool) -> bool {
        self.results.push(Finding { name: name.into(), value: value.into(), tol: Some(tol), ok: Some(ok) });
        ok
    }

    /// A number reported for information, computed at tolerance `tol`.
    pub fn number(&mut self, name: &str, value: impl Into<Value>, tol: f64) {
        self.results.push(Finding { name: name.into(), value: value.into(), tol: Some(tol), ok: None });
    }

    pub fn flag(&mut self, name: &str, value: bool, tol: f64) -> bool {
        self.results.push(Finding { name: name.into(), value: value.into(), tol: Some(tol), ok: Some(value) });
        value
    }

    /// Non-numeric information (paths, names, nested documents).
    pub fn info(&mut self, name: &str, value: impl Into<Value>) {
        self.results.push(Finding { name: name.into(), value: value.into(), tol: None, ok: None });
    }

    pub fn fail_unless(&mut self, ok: bool) {
        if !ok && self.status == Status::Pass {
            self.status = Status::Fail;
        }
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.3e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().all(Value::is_number) => {
            format!("[{}]", items.iter().map(show).collect::<Vec<_>>().join(", "))
        }
        Value::Array(items) => format!("[{} items]", items.len()),
        Value::Object(map) if map.len() <= 6 && map.values().all(|x| !x.is_object() && !x.is_array()) => {
            map.iter().map(|(k, x)| format!("{k}={}", show(x))).collect::<Vec<_>>().join(" ")
        }
        Value::Object(_) => "{…}".into(),
        other => other.to_string(),
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inputs.is_empty() {
            true => writeln!(f, "{}", self.command)?,
            false => writeln!(f, "{} {}", self.command, self.inputs.join(" "))?,
        }
        let width = self.results.iter().map(|r| r.name.len()).max().unwrap_or(0);
        for r in &self.results {
            write!(f, "  {:<width$}  {}", r.name, show(&r.value))?;
            if let Some(tol) = r.tol {
                write!(f, "  (tol {tol:.0e})")?;
            }
            match r.ok {
                Some(true) => write!(f, "  ok")?,
                Some(false) => write!(f, "  FAILED")?,
                None => {}
            }
            writeln!(f)?;
        }
        write!(f, "status: {}", serde_json::to_value(self.status).unwrap().as_str().unwrap_or("?"))
    }
}
