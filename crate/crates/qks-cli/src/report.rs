//! Report records and their JSON / CSV encodings.

use std::io::{self, Write};

use serde::Serialize;

/// Version of the JSON layout.
pub const SCHEMA: u32 = 1;

/// JSON formatter that prints every float with 17 significant digits.
#[derive(Default)]
pub struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", sci(value))
    }
}

pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> anyhow::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut w, SciFormatter);
    value.serialize(&mut ser)?;
    writeln!(w)?;
    Ok(())
}

/// How a value is compared with its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Below,
    Above,
    Equal,
}

impl Relation {
    fn as_str(self) -> &'static str {
        match self {
            Relation::Below => "below",
            Relation::Above => "above",
            Relation::Equal => "equal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, threshold: f64, relation: Relation) -> Self {
        let passed = match relation {
            Relation::Below => value < threshold,
            Relation::Above => value > threshold,
            Relation::Equal => value == threshold,
        };
        Self { name: name.into(), value, threshold, relation, passed }
    }

    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Relation::Below)
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, Relation::Above)
    }

    pub fn equal(name: impl Into<String>, value: f64, expected: f64) -> Self {
        Self::new(name, value, expected, Relation::Equal)
    }
}

/// Output of `verify`.
#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub command: &'static str,
    pub suite: String,
    pub n: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn new(suite: &str, n: usize, seed: u64, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = checks.iter().all(|c| c.passed);
        Self { schema: SCHEMA, command: "verify", suite: suite.to_string(), n, seed, passed, checks }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> anyhow::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["name", "value", "threshold", "relation", "passed"])?;
        for c in &self.checks {
            out.write_record([&c.name, &sci(c.value), &sci(c.threshold), c.relation.as_str(), &c.passed.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct DimRow {
    pub class: usize,
    pub computed: usize,
    pub formula: usize,
}

/// Output of `dims`.
#[derive(Debug, Serialize)]
pub struct DimsReport {
    pub schema: u32,
    pub command: &'static str,
    pub n: usize,
    pub classes: Vec<DimRow>,
    pub total: usize,
    pub dim_v: usize,
    pub passed: bool,
}

impl DimsReport {
    pub fn write_csv<W: Write>(&self, w: W) -> anyhow::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["class", "computed", "formula"])?;
        for r in &self.classes {
            out.write_record([r.class.to_string(), r.computed.to_string(), r.formula.to_string()])?;
        }
        out.write_record(["total".to_string(), self.total.to_string(), self.dim_v.to_string()])?;
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct MembershipRow {
    pub residual: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub member: bool,
}

/// Output of `decompose`.
#[derive(Debug, Serialize)]
pub struct DecomposeReport {
    pub schema: u32,
    pub command: &'static str,
    pub n: usize,
    pub membership: MembershipRow,
    /// Present classes, `None` when the tensor is not in the module.
    pub label: Option<Vec<usize>>,
    pub decomposition: Option<qks::classification::DecompositionReport>,
}

impl DecomposeReport {
    pub fn write_csv<W: Write>(&self, w: W) -> anyhow::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["class", "norm", "relative_norm", "present"])?;
        if let (Some(label), Some(dec)) = (&self.label, &self.decomposition) {
            for i in 0..5 {
                out.write_record([
                    (i + 1).to_string(),
                    sci(dec.norms[i]),
                    sci(dec.relative_norms[i]),
                    label.contains(&(i + 1)).to_string(),
                ])?;
            }
        }
        out.write_record(["membership".to_string(), sci(self.membership.residual), sci(self.membership.relative), self.membership.member.to_string()])?;
        out.flush()?;
        Ok(())
    }
}
