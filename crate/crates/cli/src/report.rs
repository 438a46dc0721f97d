use serde_json::{Map, Value};

/// Ordered key/value output of a command.
#[derive(Debug, Default)]
pub struct Report {
    rows: Vec<(&'static str, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &'static str, value: impl Into<Value>) {
        self.rows.push((key, value.into()));
    }

    /// One `key: value` line per row; strings unquoted, everything else as JSON.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.rows {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let map: Map<String, Value> = self.rows.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        serde_json::to_string_pretty(&Value::Object(map)).expect("report serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_rows_in_order() {
        let mut r = Report::new();
        r.push("b", 1.5);
        r.push("a", "x");
        r.push("l", vec![0u64, 1]);
        assert_eq!(r.to_text(), "b: 1.5\na: x\nl: [0,1]\n");
        assert!(r.to_json().contains("\"a\": \"x\""));
    }
}
