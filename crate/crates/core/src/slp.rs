//! Straight-line programs: the reduced expression sets written out as one
//! addition per definition line.
//!
//! A scheme program has three sections. Section `u` computes the left
//! product factors `x[l]` from `a[i][j]`, section `v` the right factors
//! `y[l]` from `b[j][k]`, and section `w` the outputs `c[i][k]` from the
//! products `m[l] = x[l] * y[l]`. Temporaries `t1, t2, ...` are numbered
//! across the whole program.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::engine::replay_prefix;
use crate::scheme::Scheme;
use crate::search::{Component, SearchReport};
use crate::system::{LinearSystem, Sign, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: '{name}' is used before its definition")]
    UseBeforeDefinition { line: usize, name: String },
    #[error("line {line}: '{name}' is defined twice")]
    Redefinition { line: usize, name: String },
    #[error("report was computed for scheme {expected}, not {found}")]
    SchemeMismatch { expected: String, found: String },
    #[error("report substitutions do not replay: {0}")]
    Replay(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedName {
    pub sign: Sign,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    /// `target = lhs ± rhs`, one addition.
    Def {
        target: String,
        lhs: String,
        rhs: SignedName,
    },
    /// `target = ±v1 ± v2 ...`, one addition per term after the first.
    Output { target: String, terms: Vec<SignedName> },
}

impl Statement {
    pub fn target(&self) -> &str {
        match self {
            Statement::Def { target, .. } | Statement::Output { target, .. } => target,
        }
    }

    pub fn additions(&self) -> usize {
        match self {
            Statement::Def { .. } => 1,
            Statement::Output { terms, .. } => terms.len().saturating_sub(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub label: String,
    pub statements: Vec<Statement>,
}

impl Section {
    pub fn additions(&self) -> usize {
        self.statements.iter().map(Statement::additions).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StraightLineProgram {
    pub header: Vec<String>,
    pub sections: Vec<Section>,
}

fn sign_str(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Def { target, lhs, rhs } => {
                write!(f, "{target} = {lhs} {} {}", sign_str(rhs.sign), rhs.name)
            }
            Statement::Output { target, terms } => {
                write!(f, "{target} =")?;
                if terms.is_empty() {
                    return f.write_str(" 0");
                }
                for (k, t) in terms.iter().enumerate() {
                    match (k, t.sign) {
                        (0, Sign::Plus) => write!(f, " {}", t.name)?,
                        (0, Sign::Minus) => write!(f, " -{}", t.name)?,
                        (_, s) => write!(f, " {} {}", sign_str(s), t.name)?,
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for StraightLineProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.header {
            writeln!(f, "# {line}")?;
        }
        for section in &self.sections {
            if self.sections.len() > 1 {
                writeln!(f, "# {}", section.label)?;
            }
            for st in &section.statements {
                writeln!(f, "{st}")?;
            }
        }
        let total = self.additions();
        if self.sections.len() > 1 {
            let parts: Vec<String> = self
                .sections
                .iter()
                .map(|s| format!("{} {}", s.label, s.additions()))
                .collect();
            writeln!(f, "# additions: {total} ({})", parts.join(", "))
        } else {
            writeln!(f, "# additions: {total}")
        }
    }
}

impl StraightLineProgram {
    pub fn additions(&self) -> usize {
        self.sections.iter().map(Section::additions).sum()
    }

    /// Parses program text. Comment lines start with `#`.
    ///
    /// Names that are never defined are inputs. Every other name must be
    /// defined before use and only once.
    pub fn parse(text: &str) -> Result<Self, SlpError> {
        let mut parsed = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            parsed.push((line, parse_statement(line, body)?));
        }
        let defined_at: BTreeMap<&str, usize> = {
            let mut map = BTreeMap::new();
            for (line, st) in &parsed {
                if map.insert(st.target(), *line).is_some() {
                    return Err(SlpError::Redefinition {
                        line: *line,
                        name: st.target().to_string(),
                    });
                }
            }
            map
        };
        for (line, st) in &parsed {
            for name in operands(st) {
                if defined_at.get(name).is_some_and(|def| def >= line) {
                    return Err(SlpError::UseBeforeDefinition {
                        line: *line,
                        name: name.to_string(),
                    });
                }
            }
        }
        Ok(StraightLineProgram {
            header: Vec::new(),
            sections: vec![Section {
                label: String::new(),
                statements: parsed.into_iter().map(|(_, st)| st).collect(),
            }],
        })
    }

    /// Linear form of every statement target over the input names.
    pub fn expand(&self) -> BTreeMap<String, BTreeMap<String, i64>> {
        let mut forms: BTreeMap<String, BTreeMap<String, i64>> = BTreeMap::new();
        for st in self.sections.iter().flat_map(|s| &s.statements) {
            let terms: Vec<(i64, &str)> = match st {
                Statement::Def { lhs, rhs, .. } => {
                    vec![(1, lhs.as_str()), (rhs.sign.value() as i64, rhs.name.as_str())]
                }
                Statement::Output { terms, .. } => terms
                    .iter()
                    .map(|t| (t.sign.value() as i64, t.name.as_str()))
                    .collect(),
            };
            let mut form = BTreeMap::new();
            for (coeff, name) in terms {
                let inner = forms
                    .get(name)
                    .cloned()
                    .unwrap_or_else(|| BTreeMap::from([(name.to_string(), 1)]));
                for (input, c) in inner {
                    *form.entry(input).or_insert(0) += coeff * c;
                }
            }
            form.retain(|_, c| *c != 0);
            forms.insert(st.target().to_string(), form);
        }
        forms
    }
}

fn operands(st: &Statement) -> Vec<&str> {
    match st {
        Statement::Def { lhs, rhs, .. } => vec![lhs.as_str(), rhs.name.as_str()],
        Statement::Output { terms, .. } => terms.iter().map(|t| t.name.as_str()).collect(),
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '[' | ']'))
}

fn parse_statement(line: usize, body: &str) -> Result<Statement, SlpError> {
    let syntax = |message: String| SlpError::Syntax { line, message };
    let (target, rhs) = body
        .split_once('=')
        .ok_or_else(|| syntax("expected 'name = expression'".into()))?;
    let target = target.trim().to_string();
    if !valid_name(&target) {
        return Err(syntax(format!("invalid name '{target}'")));
    }
    let tokens: Vec<&str> = rhs.split_whitespace().collect();
    if tokens == ["0"] {
        return Ok(Statement::Output {
            target,
            terms: Vec::new(),
        });
    }
    let mut terms = Vec::new();
    let mut iter = tokens.into_iter();
    let first = iter.next().ok_or_else(|| syntax("empty expression".into()))?;
    let (sign, name) = match first.strip_prefix('-') {
        Some(rest) => (Sign::Minus, rest),
        None => (Sign::Plus, first),
    };
    terms.push((sign, name));
    while let Some(op) = iter.next() {
        let sign = match op {
            "+" => Sign::Plus,
            "-" => Sign::Minus,
            other => return Err(syntax(format!("expected '+' or '-', found '{other}'"))),
        };
        let name = iter
            .next()
            .ok_or_else(|| syntax("expression ends with an operator".into()))?;
        terms.push((sign, name));
    }
    if let Some((_, bad)) = terms.iter().find(|(_, n)| !valid_name(n)) {
        return Err(syntax(format!("invalid name '{bad}'")));
    }
    let terms: Vec<SignedName> = terms
        .into_iter()
        .map(|(sign, name)| SignedName {
            sign,
            name: name.to_string(),
        })
        .collect();
    let is_temp = target.starts_with('t') && target[1..].chars().all(|c| c.is_ascii_digit());
    if is_temp && terms.len() == 2 && terms[0].sign == Sign::Plus {
        let mut it = terms.into_iter();
        let lhs = it.next().expect("two terms").name;
        let rhs = it.next().expect("two terms");
        return Ok(Statement::Def { target, lhs, rhs });
    }
    Ok(Statement::Output { target, terms })
}

/// Writes one reduced system as a section. `name(v)` names base variable
/// `v` (1-based); fresh variable `k` becomes `t{temp_offset + k}`.
fn section_for(
    label: &str,
    sys: &LinearSystem,
    input: &dyn Fn(u32) -> String,
    output: &dyn Fn(usize) -> String,
    fresh: &dyn Fn(usize) -> String,
) -> Section {
    let n_x = sys.n_x();
    let var = |v: u32| -> String {
        if v <= n_x {
            input(v)
        } else {
            fresh((v - n_x) as usize)
        }
    };
    let mut statements = Vec::new();
    for (k, def) in sys.fresh_defs().iter().enumerate() {
        statements.push(Statement::Def {
            target: fresh(k + 1),
            lhs: var(def.i),
            rhs: SignedName {
                sign: def.sign,
                name: var(def.j),
            },
        });
    }
    for (row, terms) in sys.sorted_expressions().into_iter().enumerate() {
        statements.push(Statement::Output {
            target: output(row),
            terms: ordered_terms(terms)
                .into_iter()
                .map(|t| SignedName {
                    sign: Sign::of(t),
                    name: var(t.unsigned_abs()),
                })
                .collect(),
        });
    }
    Section {
        label: label.to_string(),
        statements,
    }
}

/// Terms by variable index, so a row reads in input order.
fn ordered_terms(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by_key(|t| (t.unsigned_abs(), *t));
    terms
}

/// Program for a standalone system, named like the worked example:
/// inputs `x1..`, fresh variables continuing the numbering, outputs `e1..`.
pub fn emit_system_slp(sys: &LinearSystem) -> StraightLineProgram {
    let n_x = sys.n_x();
    let section = section_for(
        "e",
        sys,
        &|v| format!("x{v}"),
        &|row| format!("e{}", row + 1),
        &|k| format!("x{}", n_x as usize + k),
    );
    StraightLineProgram {
        header: vec![format!("expression set over {n_x} variables")],
        sections: vec![section],
    }
}

/// Program for a scheme reduced as described by `report`.
pub fn emit_slp(scheme: &Scheme, report: &SearchReport) -> Result<StraightLineProgram, SlpError> {
    let digest = scheme.digest();
    if digest != report.scheme_digest {
        return Err(SlpError::SchemeMismatch {
            expected: report.scheme_digest.clone(),
            found: digest,
        });
    }
    let (n, p) = (scheme.n, scheme.p);
    let systems = scheme.extract_systems();
    let mut sections = Vec::with_capacity(3);
    let mut offset = 0usize;
    for (c, sys) in Component::ALL.into_iter().zip(systems.iter()) {
        let comp = report.components.get(c);
        let reduced = replay_prefix(sys, &comp.substitutions).map_err(|e| SlpError::Replay(e.to_string()))?;
        let base = offset;
        let fresh = move |k: usize| format!("t{}", base + k);
        let section = match c {
            Component::U => section_for(
                "u",
                &reduced,
                &|v| {
                    let q = v as usize - 1;
                    format!("a[{}][{}]", q / n, q % n)
                },
                &|row| format!("x[{row}]"),
                &fresh,
            ),
            Component::V => section_for(
                "v",
                &reduced,
                &|v| {
                    let q = v as usize - 1;
                    format!("b[{}][{}]", q / p, q % p)
                },
                &|row| format!("y[{row}]"),
                &fresh,
            ),
            Component::W => section_for(
                "w",
                &reduced,
                &|v| format!("m[{}]", v - 1),
                &|row| format!("c[{}][{}]", row / p, row % p),
                &fresh,
            ),
        };
        offset += reduced.fresh_defs().len();
        sections.push(section);
    }
    Ok(StraightLineProgram {
        header: vec![
            format!("scheme ({},{},{}:{}) {}", scheme.m, scheme.n, scheme.p, scheme.r, digest),
            "m[l] = x[l] * y[l]".to_string(),
        ],
        sections,
    })
}

/// Linear forms a scheme program must compute, keyed by output name.
pub fn scheme_forms(scheme: &Scheme) -> BTreeMap<String, BTreeMap<String, i64>> {
    let (n, p) = (scheme.n, scheme.p);
    let mut forms = BTreeMap::new();
    let mut add = |target: String, row: &[i8], name: &dyn Fn(usize) -> String| {
        let form: BTreeMap<String, i64> = row
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(q, &c)| (name(q), c as i64))
            .collect();
        forms.insert(target, form);
    };
    for (l, row) in scheme.u.iter().enumerate() {
        add(format!("x[{l}]"), row, &|q| format!("a[{}][{}]", q / n, q % n));
    }
    for (l, row) in scheme.v.iter().enumerate() {
        add(format!("y[{l}]"), row, &|q| format!("b[{}][{}]", q / p, q % p));
    }
    for (ik, row) in scheme.w.iter().enumerate() {
        add(format!("c[{}][{}]", ik / p, ik % p), row, &|q| format!("m[{q}]"));
    }
    forms
}

/// True when the program computes exactly the scheme's linear forms.
pub fn matches_scheme(program: &StraightLineProgram, scheme: &Scheme) -> bool {
    let expanded = program.expand();
    scheme_forms(scheme)
        .into_iter()
        .all(|(name, form)| expanded.get(&name) == Some(&form))
}

/// Counts the binary `+`/`-` operators in program text, ignoring comments.
pub fn count_operators(text: &str) -> usize {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| l.split_whitespace().filter(|tok| *tok == "+" || *tok == "-").count())
        .sum()
}

/// The total from the trailing `# additions: N` comment.
pub fn stated_additions(text: &str) -> Option<usize> {
    text.lines()
        .rev()
        .find_map(|l| l.strip_prefix("# additions: "))
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|n| n.parse().ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{optimize_scheme, SearchConfig};
    use crate::system::CanonicalPair;

    fn worked_example_reduced() -> LinearSystem {
        let mut sys =
            LinearSystem::new(4, vec![vec![1, 2, -3, 4], vec![1, -2, -4], vec![1, -2, -3, 4]]).unwrap();
        sys.apply_substitution(CanonicalPair::try_from((2, 4, 1)).unwrap())
            .unwrap();
        sys.apply_substitution(CanonicalPair::try_from((1, 3, -1)).unwrap())
            .unwrap();
        sys
    }

    #[test]
    fn worked_example_program() {
        let text = emit_system_slp(&worked_example_reduced()).to_string();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(
            body,
            vec![
                "x5 = x2 + x4",
                "x6 = x1 - x3",
                "e1 = x5 + x6",
                "e2 = x1 - x5",
                "e3 = -x2 + x4 + x6",
            ]
        );
        assert!(text.ends_with("# additions: 6\n"));
        assert_eq!(count_operators(&text), 6);
        assert_eq!(stated_additions(&text), Some(6));
    }

    #[test]
    fn worked_example_expands_to_original() {
        let text = emit_system_slp(&worked_example_reduced()).to_string();
        let forms = StraightLineProgram::parse(&text).unwrap().expand();
        let e3: BTreeMap<String, i64> =
            [("x1", 1), ("x2", -1), ("x3", -1), ("x4", 1)].map(|(k, v)| (k.to_string(), v)).into();
        assert_eq!(forms["e3"], e3);
    }

    #[test]
    fn strassen_program_has_no_definitions() {
        let s = Scheme::strassen();
        let cfg = SearchConfig {
            n_processes: Some(4),
            ..Default::default()
        };
        let report = optimize_scheme(&s, &cfg).unwrap();
        let program = emit_slp(&s, &report).unwrap();
        assert!(program
            .sections
            .iter()
            .flat_map(|s| &s.statements)
            .all(|st| matches!(st, Statement::Output { .. })));
        let text = program.to_string();
        assert_eq!(count_operators(&text), 18);
        assert_eq!(stated_additions(&text), Some(18));
        assert!(text.contains("# additions: 18 (u 5, v 5, w 8)"));
        let reparsed = StraightLineProgram::parse(&text).unwrap();
        assert!(matches_scheme(&reparsed, &s));
    }

    #[test]
    fn zero_rows_print_as_zero() {
        let sys = LinearSystem::new(2, vec![vec![], vec![1, -2]]).unwrap();
        let text = emit_system_slp(&sys).to_string();
        assert!(text.contains("e1 = 0\n"));
        let forms = StraightLineProgram::parse(&text).unwrap().expand();
        assert!(forms["e1"].is_empty());
    }

    #[test]
    fn parse_rejects_bad_programs() {
        assert!(matches!(
            StraightLineProgram::parse("e1 = t1 + x1\nt1 = x1 + x2\n"),
            Err(SlpError::UseBeforeDefinition { line: 1, .. })
        ));
        assert!(matches!(
            StraightLineProgram::parse("t1 = x1 + x2\nt1 = x1 - x2\n"),
            Err(SlpError::Redefinition { line: 2, .. })
        ));
        assert!(matches!(
            StraightLineProgram::parse("e1 = x1 * x2\n"),
            Err(SlpError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            StraightLineProgram::parse("e1 x1\n"),
            Err(SlpError::Syntax { .. })
        ));
    }

    #[test]
    fn foreign_report_is_refused() {
        let s = Scheme::strassen();
        let cfg = SearchConfig {
            n_processes: Some(2),
            ..Default::default()
        };
        let report = optimize_scheme(&Scheme::naive(2, 2, 2), &cfg).unwrap();
        assert!(matches!(emit_slp(&s, &report), Err(SlpError::SchemeMismatch { .. })));
    }
}
