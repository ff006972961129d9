//! Invariant checks and their JSON-lines report.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "in")]
    Within,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    /// Bound, or `[lo, hi]` for [`Relation::Within`].
    pub threshold: Vec<f64>,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, relation: Relation, threshold: Vec<f64>) -> Self {
        let t = &threshold;
        let pass = match relation {
            Relation::Below => measured < t[0],
            Relation::Above => measured > t[0],
            Relation::AtMost => measured <= t[0],
            Relation::AtLeast => measured >= t[0],
            Relation::Within => measured >= t[0] && measured <= t[1],
        };
        Self {
            name: name.into(),
            measured,
            relation,
            threshold,
            pass,
        }
    }

    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, Relation::Below, vec![bound])
    }

    pub fn above(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, Relation::Above, vec![bound])
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, Relation::AtMost, vec![bound])
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, Relation::AtLeast, vec![bound])
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, measured, Relation::Within, vec![lo, hi])
    }

    pub fn to_json(&self) -> String {
        // NaN is not valid JSON; a NaN measurement is a failed check reported as null
        serde_json::to_string(self).expect("check serializes")
    }
}

pub fn to_jsonl(checks: &[Check]) -> String {
    checks.iter().map(|c| c.to_json() + "\n").collect()
}

pub fn failures(checks: &[Check]) -> Vec<&Check> {
    checks.iter().filter(|c| !c.pass).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::below("a", 1.0, 2.0).pass);
        assert!(!Check::below("a", 2.0, 2.0).pass);
        assert!(Check::at_most("a", 2.0, 2.0).pass);
        assert!(Check::within("a", 4.0, 3.5, 4.5).pass);
        assert!(!Check::within("a", f64::NAN, 3.5, 4.5).pass);
        assert!(!Check::above("a", f64::NAN, 0.0).pass);
    }

    #[test]
    fn json_shape() {
        let j = Check::within("ratio", 4.0, 3.5, 4.5).to_json();
        assert_eq!(
            j,
            r#"{"name":"ratio","measured":4.0,"relation":"in","threshold":[3.5,4.5],"pass":true}"#
        );
        let n = Check::below("x", f64::NAN, 1.0).to_json();
        assert!(n.contains(r#""measured":null"#));
    }
}
