//! One-file workbench inputs: a domain block plus named formulas, processes,
//! transducers and explicit transition systems.
//!
//! ```text
//! ports = {i, j}
//! payloads = {req, ans, cls}
//! formula phi1 = max X.[(x)?req when x != j]
//!     ([x!ans]X && [x?req]ff)
//! process pg = rec X.(i?req.i!ans.X + i?cls.nil)
//! transducer id = id
//! lts two {
//!   s -i?req-> t
//! }
//! ```
//!
//! Indented lines continue the previous definition and `#` starts a comment.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::{parse_formula_at, Formula};
use crate::lts::{parse_lts_at, Lts};
use crate::process::{parse_process_at, Proc};
use crate::symbolic::Domain;
use crate::transducer::{parse_transducer_at, Trn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Formula,
    Process,
    Transducer,
    Lts,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Formula => "formula",
            Kind::Process => "process",
            Kind::Transducer => "transducer",
            Kind::Lts => "lts",
        })
    }
}

#[derive(Debug, Clone)]
pub enum Item {
    Formula(Formula),
    Process(Proc),
    Transducer(Trn),
    Lts(Lts),
}

impl Item {
    pub fn kind(&self) -> Kind {
        match self {
            Item::Formula(_) => Kind::Formula,
            Item::Process(_) => Kind::Process,
            Item::Transducer(_) => Kind::Transducer,
            Item::Lts(_) => Kind::Lts,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SpecFile {
    pub domain: Option<Domain>,
    /// Definitions in file order.
    pub items: Vec<(String, Item)>,
    index: HashMap<String, usize>,
}

impl SpecFile {
    pub fn get(&self, name: &str) -> Option<&Item> {
        self.index.get(name).map(|&k| &self.items[k].1)
    }

    pub fn formula(&self, name: &str) -> Result<&Formula> {
        match self.get(name) {
            Some(Item::Formula(f)) => Ok(f),
            _ => Err(Error::UnknownName(name.to_string())),
        }
    }

    pub fn transducer(&self, name: &str) -> Result<&Trn> {
        match self.get(name) {
            Some(Item::Transducer(e)) => Ok(e),
            _ => Err(Error::UnknownName(name.to_string())),
        }
    }

    pub fn formulas(&self) -> impl Iterator<Item = (&str, &Formula)> {
        self.items.iter().filter_map(|(n, it)| match it {
            Item::Formula(f) => Some((n.as_str(), f)),
            _ => None,
        })
    }

    /// Processes and explicit transition systems, the latter as given and
    /// the former as reachable graphs of at most `bound` states.
    pub fn systems(&self, bound: usize) -> Result<Vec<(&str, Lts)>> {
        let mut out = Vec::new();
        for (n, it) in &self.items {
            match it {
                Item::Process(p) => out.push((n.as_str(), crate::process::reachable(p, bound)?)),
                Item::Lts(l) => out.push((n.as_str(), l.clone())),
                _ => {}
            }
        }
        Ok(out)
    }
}

struct Block {
    kind: Kind,
    name: String,
    line: usize,
    text: String,
}

fn is_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

fn value_set(rhs: &str, line: usize, col: usize) -> Result<Vec<String>> {
    let inner = rhs
        .trim()
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| Error::parse(line, col, "expected `{v1, v2, ...}`"))?;
    let vals: Vec<String> = inner.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if let Some(bad) = vals.iter().find(|v| !is_name(v)) {
        return Err(Error::parse(line, col, format!("`{bad}` is not a valid value name")));
    }
    Ok(vals)
}

pub fn parse_spec(text: &str) -> Result<SpecFile> {
    let lines: Vec<&str> = text.lines().collect();
    let mut ports = None;
    let mut payloads = None;
    let mut blocks: Vec<Block> = Vec::new();
    let mut k = 0;
    while k < lines.len() {
        let line_no = k + 1;
        let raw = lines[k];
        let line = strip_comment(raw);
        k += 1;
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with(char::is_whitespace) {
            return Err(Error::parse(line_no, 1, "indented line does not continue a definition"));
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match head {
            "ports" | "payloads" => {
                let Some((_, rhs)) = line.split_once('=') else {
                    return Err(Error::parse(line_no, head.len() + 1, "expected `=`"));
                };
                let vals = value_set(rhs, line_no, line.find('=').unwrap() + 2)?;
                let slot = if head == "ports" { &mut ports } else { &mut payloads };
                if slot.replace(vals).is_some() {
                    return Err(Error::parse(line_no, 1, format!("`{head}` declared twice")));
                }
            }
            "lts" => {
                let rest = rest.trim();
                let Some(name) = rest.strip_suffix('{').map(str::trim) else {
                    return Err(Error::parse(line_no, 1, "expected `lts NAME {`"));
                };
                if !is_name(name) {
                    return Err(Error::parse(line_no, 5, format!("`{name}` is not a valid name")));
                }
                let start = k;
                while k < lines.len() && strip_comment(lines[k]).trim() != "}" {
                    k += 1;
                }
                if k == lines.len() {
                    return Err(Error::parse(line_no, 1, format!("unterminated `lts {name}` block")));
                }
                let text = lines[start..k].join("\n");
                k += 1;
                blocks.push(Block { kind: Kind::Lts, name: name.to_string(), line: start + 1, text });
            }
            "formula" | "process" | "transducer" => {
                let kind = match head {
                    "formula" => Kind::Formula,
                    "process" => Kind::Process,
                    _ => Kind::Transducer,
                };
                let Some(eq) = line.find('=') else {
                    return Err(Error::parse(line_no, 1, format!("expected `{head} NAME = ...`")));
                };
                let name = line[head.len()..eq].trim();
                if !is_name(name) {
                    return Err(Error::parse(line_no, head.len() + 2, format!("`{name}` is not a valid name")));
                }
                // keep columns aligned with the file
                let mut text = " ".repeat(eq + 1) + &line[eq + 1..];
                while k < lines.len() {
                    let next = strip_comment(lines[k]);
                    if !next.trim().is_empty() && !next.starts_with(char::is_whitespace) {
                        break;
                    }
                    text.push('\n');
                    text.push_str(next);
                    k += 1;
                }
                blocks.push(Block { kind, name: name.to_string(), line: line_no, text });
            }
            other => {
                return Err(Error::parse(
                    line_no,
                    1,
                    format!("unknown section `{other}`; expected ports, payloads, formula, process, transducer or lts"),
                ))
            }
        }
    }
    let domain = match (ports, payloads) {
        (Some(p), Some(q)) => Some(Domain::new(p, q)?),
        (None, None) => None,
        _ => return Err(Error::Domain("both `ports` and `payloads` must be declared".into())),
    };
    let d = domain.as_ref();
    let mut spec = SpecFile { domain: domain.clone(), ..SpecFile::default() };
    for b in blocks {
        if spec.index.contains_key(&b.name) {
            return Err(Error::DuplicateName(b.name));
        }
        let item = match b.kind {
            Kind::Formula => Item::Formula(parse_formula_at(&b.text, b.line, d)?),
            Kind::Process => Item::Process(parse_process_at(&b.text, b.line, d)?),
            Kind::Transducer => Item::Transducer(parse_transducer_at(&b.text, b.line, d)?),
            Kind::Lts => Item::Lts(parse_lts_at(&b.text, b.line, d)?),
        };
        spec.index.insert(b.name.clone(), spec.items.len());
        spec.items.push((b.name, item));
    }
    Ok(spec)
}
