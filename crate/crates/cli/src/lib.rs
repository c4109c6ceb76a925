//! JSON reports and command implementations for the `orthokit` binary.
//!
//! Terms are rendered in `.trs` term syntax and positions in dotted syntax.
//! When decoding, a bare identifier containing `#` is read as a variable
//! (the renamed-apart variables of critical pairs); every other bare
//! identifier is a constant.

pub mod commands;

use std::collections::BTreeMap;

use anyhow::{anyhow, Context, Result};
use orthokit_core::oracle::Failure;
use orthokit_core::orthogonality::NonLinearVar;
use orthokit_core::syntax::parse_term_by;
use orthokit_core::{
    CriticalPair, JoinWitness, OrthoReport, ParallelStep, Position, PropertyReport, Redex,
    Severity, Substitution, Term,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonReport<P> {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub input_digest: String,
    pub payload: P,
}

impl<P> JsonReport<P> {
    pub fn new(command: &str, inputs: &[&str], payload: P) -> Self {
        JsonReport {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            input_digest: input_digest(inputs),
            payload,
        }
    }
}

/// SHA-256 over the inputs, each terminated by a NUL byte.
pub fn input_digest(inputs: &[&str]) -> String {
    let mut h = Sha256::new();
    for part in inputs {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

/// Canonical JSON: keys sorted, two-space indentation, trailing newline.
pub fn emit_report<P: Serialize>(report: &JsonReport<P>) -> String {
    // going through Value sorts object keys
    let value = serde_json::to_value(report).expect("report serializes");
    let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
    out.push('\n');
    out
}

pub fn parse_report<P: DeserializeOwned>(text: &str) -> Result<JsonReport<P>> {
    serde_json::from_str(text).context("malformed report")
}

pub fn decode_term(text: &str) -> Result<Term> {
    parse_term_by(text, |v| v.contains('#')).map_err(|e| anyhow!("term `{text}`: {e}"))
}

fn decode_position(text: &str) -> Result<Position> {
    text.parse().map_err(|e| anyhow!("position `{text}`: {e}"))
}

fn encode_subst(s: &Substitution) -> BTreeMap<String, String> {
    s.iter()
        .map(|(x, t)| (x.to_string(), t.to_string()))
        .collect()
}

fn decode_subst(m: &BTreeMap<String, String>) -> Result<Substitution> {
    m.iter()
        .map(|(x, t)| Ok((x.clone(), decode_term(t)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonLinearVarDto {
    pub rule: usize,
    pub var: String,
    pub occurrences: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalPairDto {
    pub outer_rule: usize,
    pub inner_rule: usize,
    pub overlap_pos: String,
    pub mgu: BTreeMap<String, String>,
    pub left: String,
    pub right: String,
    pub peak: String,
    pub trivial: bool,
}

impl From<&CriticalPair> for CriticalPairDto {
    fn from(cp: &CriticalPair) -> Self {
        CriticalPairDto {
            outer_rule: cp.outer_rule,
            inner_rule: cp.inner_rule,
            overlap_pos: cp.overlap_pos.to_string(),
            mgu: encode_subst(&cp.mgu),
            left: cp.left.to_string(),
            right: cp.right.to_string(),
            peak: cp.peak.to_string(),
            trivial: cp.trivial,
        }
    }
}

impl CriticalPairDto {
    pub fn decode(&self) -> Result<CriticalPair> {
        Ok(CriticalPair {
            outer_rule: self.outer_rule,
            inner_rule: self.inner_rule,
            overlap_pos: decode_position(&self.overlap_pos)?,
            mgu: decode_subst(&self.mgu)?,
            left: decode_term(&self.left)?,
            right: decode_term(&self.right)?,
            peak: decode_term(&self.peak)?,
            trivial: self.trivial,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthoReportDto {
    pub left_linear: bool,
    pub right_linear: bool,
    pub linear: bool,
    pub ambiguous: bool,
    pub orthogonal: bool,
    pub weakly_orthogonal: bool,
    pub offending_rules: Vec<NonLinearVarDto>,
    pub critical_pair_count: usize,
    pub sample_cps: Vec<CriticalPairDto>,
}

impl From<&OrthoReport> for OrthoReportDto {
    fn from(r: &OrthoReport) -> Self {
        OrthoReportDto {
            left_linear: r.left_linear,
            right_linear: r.right_linear,
            linear: r.linear,
            ambiguous: r.ambiguous,
            orthogonal: r.orthogonal,
            weakly_orthogonal: r.weakly_orthogonal,
            offending_rules: r
                .offending_rules
                .iter()
                .map(|n| NonLinearVarDto {
                    rule: n.rule,
                    var: n.var.clone(),
                    occurrences: n.occurrences,
                })
                .collect(),
            critical_pair_count: r.critical_pair_count,
            sample_cps: r.sample_cps.iter().map(CriticalPairDto::from).collect(),
        }
    }
}

impl OrthoReportDto {
    pub fn decode(&self) -> Result<OrthoReport> {
        Ok(OrthoReport {
            left_linear: self.left_linear,
            right_linear: self.right_linear,
            linear: self.linear,
            ambiguous: self.ambiguous,
            orthogonal: self.orthogonal,
            weakly_orthogonal: self.weakly_orthogonal,
            offending_rules: self
                .offending_rules
                .iter()
                .map(|n| NonLinearVar {
                    rule: n.rule,
                    var: n.var.clone(),
                    occurrences: n.occurrences,
                })
                .collect(),
            critical_pair_count: self.critical_pair_count,
            sample_cps: self
                .sample_cps
                .iter()
                .map(CriticalPairDto::decode)
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedexDto {
    pub position: String,
    pub rule: usize,
    pub subst: BTreeMap<String, String>,
}

impl From<&Redex> for RedexDto {
    fn from(r: &Redex) -> Self {
        RedexDto {
            position: r.position.to_string(),
            rule: r.rule,
            subst: encode_subst(&r.subst),
        }
    }
}

impl RedexDto {
    pub fn decode(&self) -> Result<Redex> {
        Ok(Redex {
            position: decode_position(&self.position)?,
            rule: self.rule,
            subst: decode_subst(&self.subst)?,
        })
    }
}

fn encode_step(step: &ParallelStep) -> Vec<RedexDto> {
    step.redexes().map(|r| RedexDto::from(&r)).collect()
}

fn decode_step(items: &[RedexDto]) -> Result<ParallelStep> {
    Ok(ParallelStep::from_redexes(
        items
            .iter()
            .map(RedexDto::decode)
            .collect::<Result<Vec<_>>>()?,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinWitnessDto {
    pub source: String,
    pub left_result: String,
    pub right_result: String,
    pub join_term: String,
    pub step_from_left: Vec<RedexDto>,
    pub step_from_right: Vec<RedexDto>,
}

impl From<&JoinWitness> for JoinWitnessDto {
    fn from(w: &JoinWitness) -> Self {
        JoinWitnessDto {
            source: w.source.to_string(),
            left_result: w.left_result.to_string(),
            right_result: w.right_result.to_string(),
            join_term: w.join_term.to_string(),
            step_from_left: encode_step(&w.step_from_left),
            step_from_right: encode_step(&w.step_from_right),
        }
    }
}

impl JoinWitnessDto {
    pub fn decode(&self) -> Result<JoinWitness> {
        Ok(JoinWitness {
            source: decode_term(&self.source)?,
            left_result: decode_term(&self.left_result)?,
            right_result: decode_term(&self.right_result)?,
            join_term: decode_term(&self.join_term)?,
            step_from_left: decode_step(&self.step_from_left)?,
            step_from_right: decode_step(&self.step_from_right)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureDto {
    pub case: usize,
    pub severity: String,
    pub context: String,
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReportDto {
    pub property_name: String,
    pub seed: u64,
    pub cases_run: usize,
    pub failures: Vec<FailureDto>,
    pub inconclusive: usize,
    pub verdict: String,
}

impl From<&PropertyReport> for PropertyReportDto {
    fn from(r: &PropertyReport) -> Self {
        PropertyReportDto {
            property_name: r.property_name.clone(),
            seed: r.seed,
            cases_run: r.cases_run,
            failures: r
                .failures
                .iter()
                .map(|f| FailureDto {
                    case: f.case,
                    severity: f.severity.to_string(),
                    context: f.context.clone(),
                    witness: f.witness.iter().map(Term::to_string).collect(),
                })
                .collect(),
            inconclusive: r.inconclusive,
            verdict: r.verdict().to_string(),
        }
    }
}

impl PropertyReportDto {
    /// The report this was made from. The verdict is recomputed, so a
    /// mismatching `verdict` field is an error.
    pub fn decode(&self) -> Result<PropertyReport> {
        let failures = self
            .failures
            .iter()
            .map(|f| {
                let severity = match f.severity.as_str() {
                    "bug" => Severity::Bug,
                    "expected" => Severity::Expected,
                    other => return Err(anyhow!("unknown severity `{other}`")),
                };
                Ok(Failure {
                    case: f.case,
                    severity,
                    context: f.context.clone(),
                    witness: f
                        .witness
                        .iter()
                        .map(|t| decode_term(t))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let report = PropertyReport {
            property_name: self.property_name.clone(),
            seed: self.seed,
            cases_run: self.cases_run,
            failures,
            inconclusive: self.inconclusive,
        };
        if report.verdict().to_string() != self.verdict {
            return Err(anyhow!(
                "verdict `{}` does not match the report contents ({})",
                self.verdict,
                report.verdict()
            ));
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use orthokit_core::oracle::check_local_confluence_bounded;
    use orthokit_core::{analyze, join_parallel_divergence, parse_trs, Trs};

    fn e1() -> Trs {
        parse_trs("(VAR x) (RULES f(x) -> g(x) a -> b)").unwrap()
    }

    #[test]
    fn ortho_report_round_trips() {
        let trs = parse_trs("(VAR x) (RULES f(g(x)) -> a g(b) -> c h(x,x) -> x)").unwrap();
        let report = analyze(&trs);
        let json = emit_report(&JsonReport::new(
            "check",
            &["input"],
            OrthoReportDto::from(&report),
        ));
        let back: JsonReport<OrthoReportDto> = parse_report(&json).unwrap();
        assert_eq!(back.payload.decode().unwrap(), report);
        assert_eq!(emit_report(&back), json);
    }

    #[test]
    fn join_witness_round_trips() {
        let trs = e1();
        let s = Term::app("f", vec![Term::constant("a")]);
        let left = ParallelStep::infer(&trs, &s, &[(Position::root(), 0)]).unwrap();
        let right = ParallelStep::infer(&trs, &s, &[("1".parse().unwrap(), 1)]).unwrap();
        let w = join_parallel_divergence(&trs, &s, &left, &right).unwrap();
        let json = emit_report(&JsonReport::new("join", &[], JoinWitnessDto::from(&w)));
        assert!(json.contains("\"join_term\": \"g(b)\""));
        let back: JsonReport<JoinWitnessDto> = parse_report(&json).unwrap();
        assert_eq!(back.payload.decode().unwrap(), w);
    }

    #[test]
    fn property_report_round_trips() {
        let amb = parse_trs("(RULES a -> b a -> c)").unwrap();
        let report = check_local_confluence_bounded(&amb, &Term::constant("a"), 2);
        let dto = PropertyReportDto::from(&report);
        assert_eq!(dto.verdict, "fail");
        let json = emit_report(&JsonReport::new("confluence", &[], dto));
        let back: JsonReport<PropertyReportDto> = parse_report(&json).unwrap();
        assert_eq!(back.payload.decode().unwrap(), report);
    }

    #[test]
    fn empty_report_is_inconclusive() {
        let dto = PropertyReportDto::from(&PropertyReport::new("empty", 0));
        assert_eq!(dto.verdict, "inconclusive");
        let mut tampered = dto.clone();
        tampered.verdict = "pass".into();
        assert!(tampered.decode().is_err());
    }

    #[test]
    fn keys_are_sorted_and_digest_is_stable() {
        let json = emit_report(&JsonReport::new(
            "x",
            &["a", "b"],
            serde_json::json!({"z": 1, "a": 2}),
        ));
        let keys: Vec<usize> = [
            "\"command\"",
            "\"input_digest\"",
            "\"payload\"",
            "\"schema_version\"",
            "\"tool_version\"",
        ]
        .iter()
        .map(|k| json.find(k).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(json.find("\"a\"").unwrap() < json.find("\"z\"").unwrap());
        assert_eq!(input_digest(&["a", "b"]), input_digest(&["a", "b"]));
        assert_ne!(input_digest(&["ab"]), input_digest(&["a", "b"]));
    }

    #[test]
    fn renamed_variables_decode_as_variables() {
        assert_eq!(
            decode_term("f(x#0)").unwrap(),
            Term::app("f", vec![Term::var("x#0")])
        );
        assert_eq!(decode_term("x").unwrap(), Term::constant("x"));
    }
}
