//! Free-form MPS and LP text writers and readers.
//!
//! Numbers are written with 12 significant digits. Binary columns are marked
//! with `BV` bounds in MPS and a `Binaries` section in LP text so they
//! survive a round trip distinct from general integers.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{MipModel, Relation, Role, RowFamily, Sense, VarKind};

const OBJ_ROW: &str = "obj";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    MpsFree,
    LpText,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mps" | "mps_free" => Ok(ExportFormat::MpsFree),
            "lp" | "lp_text" => Ok(ExportFormat::LpText),
            other => Err(Error::Schema(format!("unknown export format `{other}` (expected mps or lp)"))),
        }
    }
}

/// Decimal string with 12 significant digits, shortest form.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn export_model(model: &MipModel, format: ExportFormat) -> Result<String> {
    check_names(model)?;
    Ok(match format {
        ExportFormat::MpsFree => write_mps(model),
        ExportFormat::LpText => write_lp(model),
    })
}

fn check_names(model: &MipModel) -> Result<()> {
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for v in model.variables() {
        check_token(&v.name)?;
        if seen.insert(&v.name, ()).is_some() {
            return Err(Error::NameCollision(v.name.clone()));
        }
    }
    let mut rows: HashMap<&str, ()> = HashMap::new();
    for c in model.constraints() {
        check_token(&c.name)?;
        if c.name == OBJ_ROW || rows.insert(&c.name, ()).is_some() {
            return Err(Error::NameCollision(c.name.clone()));
        }
    }
    Ok(())
}

fn check_token(name: &str) -> Result<()> {
    let bad = name.is_empty()
        || name.chars().any(|c| c.is_whitespace() || c == ':')
        || name.starts_with(|c: char| c.is_ascii_digit() || c == '+' || c == '-' || c == '.');
    if bad {
        return Err(Error::Schema(format!("name `{name}` cannot be exported")));
    }
    Ok(())
}

fn write_mps(model: &MipModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", if model.name.is_empty() { "model" } else { &model.name });
    if model.objective().sense == Sense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N {OBJ_ROW}");
    for c in model.constraints() {
        let t = match c.relation {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        let _ = writeln!(out, " {t} {}", c.name);
    }
    let mut col_entries: Vec<Vec<(&str, f64)>> = vec![Vec::new(); model.num_vars()];
    for &(j, a) in &model.objective().terms {
        col_entries[j].push((OBJ_ROW, a));
    }
    for c in model.constraints() {
        for &(j, a) in &c.terms {
            col_entries[j].push((&c.name, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for (j, v) in model.variables().iter().enumerate() {
        let int = v.kind.is_integral();
        if int != in_int {
            let _ = writeln!(out, "    MARKER MARKER {}", if int { "INTORG" } else { "INTEND" });
            in_int = int;
        }
        if col_entries[j].is_empty() {
            let _ = writeln!(out, "    {} {OBJ_ROW} 0", v.name);
        }
        for &(row, a) in &col_entries[j] {
            let _ = writeln!(out, "    {} {row} {}", v.name, format_number(a));
        }
    }
    if in_int {
        out.push_str("    MARKER MARKER INTEND\n");
    }
    out.push_str("RHS\n");
    for c in model.constraints() {
        if c.rhs != 0.0 {
            let _ = writeln!(out, "    RHS {} {}", c.name, format_number(c.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for v in model.variables() {
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            let _ = writeln!(out, " BV BND {}", v.name);
            continue;
        }
        if v.lower == v.upper {
            let _ = writeln!(out, " FX BND {} {}", v.name, format_number(v.lower));
            continue;
        }
        if v.lower.is_finite() {
            let _ = writeln!(out, " LO BND {} {}", v.name, format_number(v.lower));
        } else {
            let _ = writeln!(out, " MI BND {}", v.name);
        }
        if v.upper.is_finite() {
            let _ = writeln!(out, " UP BND {} {}", v.name, format_number(v.upper));
        } else {
            let _ = writeln!(out, " PL BND {}", v.name);
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn write_terms(out: &mut String, model: &MipModel, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0");
    }
    for &(j, a) in terms {
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", format_number(a.abs()), model.variables()[j].name);
    }
}

fn write_lp(model: &MipModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", if model.name.is_empty() { "model" } else { &model.name });
    out.push_str(match model.objective().sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    let _ = write!(out, " {OBJ_ROW}:");
    write_terms(&mut out, model, &model.objective().terms);
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}:", c.name);
        write_terms(&mut out, model, &c.terms);
        let _ = writeln!(out, " {} {}", c.relation.symbol(), format_number(c.rhs));
    }
    out.push_str("Bounds\n");
    let bound = |x: f64| {
        if x == f64::INFINITY {
            "+inf".to_string()
        } else if x == f64::NEG_INFINITY {
            "-inf".to_string()
        } else {
            format_number(x)
        }
    };
    for v in model.variables() {
        let _ = writeln!(out, " {} <= {} <= {}", bound(v.lower), v.name, bound(v.upper));
    }
    let section = |out: &mut String, title: &str, kind: VarKind| {
        let names: Vec<&str> =
            model.variables().iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if !names.is_empty() {
            let _ = writeln!(out, "{title}");
            for name in names {
                let _ = writeln!(out, " {name}");
            }
        }
    };
    section(&mut out, "Binaries", VarKind::Binary);
    section(&mut out, "Generals", VarKind::Integer);
    out.push_str("End\n");
    out
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "+inf" | "inf" | "+infinity" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| Error::Parse { line, message: format!("expected a number, got `{tok}`") }),
    }
}

pub fn import_model(text: &str, format: ExportFormat) -> Result<MipModel> {
    match format {
        ExportFormat::MpsFree => import_mps(text),
        ExportFormat::LpText => import_lp(text),
    }
}

struct ColumnDraft {
    name: String,
    integer: bool,
    entries: Vec<(String, f64)>,
    lower: Option<f64>,
    upper: Option<f64>,
    binary: bool,
}

pub fn import_mps(text: &str) -> Result<MipModel> {
    #[derive(PartialEq)]
    enum Sec {
        None,
        ObjSense,
        Rows,
        Columns,
        Rhs,
        Bounds,
        End,
    }
    let mut name = String::new();
    let mut sense = Sense::Minimize;
    let mut rows: Vec<(String, Relation)> = Vec::new();
    let mut obj_name: Option<String> = None;
    let mut cols: Vec<ColumnDraft> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut rhs: HashMap<String, f64> = HashMap::new();
    let mut sec = Sec::None;
    let mut in_int = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let is_header = !raw.starts_with(' ') && !raw.starts_with('\t');
        if is_header {
            sec = match toks[0] {
                "NAME" => {
                    name = toks.get(1).unwrap_or(&"").to_string();
                    Sec::None
                }
                "OBJSENSE" => {
                    if let Some(s) = toks.get(1) {
                        sense = if *s == "MAX" { Sense::Maximize } else { Sense::Minimize };
                    }
                    Sec::ObjSense
                }
                "ROWS" => Sec::Rows,
                "COLUMNS" => Sec::Columns,
                "RHS" => Sec::Rhs,
                "BOUNDS" => Sec::Bounds,
                "ENDATA" => Sec::End,
                other => return Err(Error::Parse { line, message: format!("unknown section `{other}`") }),
            };
            continue;
        }
        let bad = |msg: &str| Error::Parse { line, message: msg.to_string() };
        match sec {
            Sec::ObjSense => {
                sense = match toks[0] {
                    "MAX" | "MAXIMIZE" => Sense::Maximize,
                    "MIN" | "MINIMIZE" => Sense::Minimize,
                    _ => return Err(bad("expected MAX or MIN")),
                }
            }
            Sec::Rows => {
                if toks.len() != 2 {
                    return Err(bad("row line needs a type and a name"));
                }
                let rel = match toks[0] {
                    "N" => {
                        if obj_name.is_some() {
                            return Err(bad("more than one objective row"));
                        }
                        obj_name = Some(toks[1].to_string());
                        continue;
                    }
                    "L" => Relation::Le,
                    "G" => Relation::Ge,
                    "E" => Relation::Eq,
                    _ => return Err(bad("row type must be N, L, G or E")),
                };
                if rows.iter().any(|r| r.0 == toks[1]) {
                    return Err(Error::NameCollision(toks[1].to_string()));
                }
                rows.push((toks[1].to_string(), rel));
            }
            Sec::Columns => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" || toks.get(1) == Some(&"MARKER") {
                    in_int = match toks.get(2).copied() {
                        Some("INTORG") | Some("'INTORG'") => true,
                        Some("INTEND") | Some("'INTEND'") => false,
                        _ => return Err(bad("unknown marker")),
                    };
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(bad("column line needs one or two (row, value) pairs"));
                }
                let col = match col_index.get(toks[0]) {
                    Some(&c) => c,
                    None => {
                        col_index.insert(toks[0].to_string(), cols.len());
                        cols.push(ColumnDraft {
                            name: toks[0].to_string(),
                            integer: in_int,
                            entries: Vec::new(),
                            lower: None,
                            upper: None,
                            binary: false,
                        });
                        cols.len() - 1
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let v = parse_num(pair[1], line)?;
                    cols[col].entries.push((pair[0].to_string(), v));
                }
            }
            Sec::Rhs => {
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(bad("rhs line needs one or two (row, value) pairs"));
                }
                for pair in toks[1..].chunks(2) {
                    rhs.insert(pair[0].to_string(), parse_num(pair[1], line)?);
                }
            }
            Sec::Bounds => {
                if toks.len() < 3 {
                    return Err(bad("bound line too short"));
                }
                let &c = col_index.get(toks[2]).ok_or_else(|| bad("bound on unknown column"))?;
                let val = || -> Result<f64> { parse_num(toks.get(3).ok_or_else(|| bad("bound value missing"))?, line) };
                let col = &mut cols[c];
                match toks[0] {
                    "LO" => col.lower = Some(val()?),
                    "UP" => col.upper = Some(val()?),
                    "FX" => {
                        let v = val()?;
                        col.lower = Some(v);
                        col.upper = Some(v);
                    }
                    "MI" => col.lower = Some(f64::NEG_INFINITY),
                    "PL" => col.upper = Some(f64::INFINITY),
                    "FR" => {
                        col.lower = Some(f64::NEG_INFINITY);
                        col.upper = Some(f64::INFINITY);
                    }
                    "BV" => {
                        col.binary = true;
                        col.lower = Some(0.0);
                        col.upper = Some(1.0);
                    }
                    "LI" => {
                        col.integer = true;
                        col.lower = Some(val()?);
                    }
                    "UI" => {
                        col.integer = true;
                        col.upper = Some(val()?);
                    }
                    other => return Err(bad(&format!("unknown bound type `{other}`"))),
                }
            }
            Sec::None | Sec::End => return Err(bad("data outside a section")),
        }
    }
    if sec != Sec::End {
        return Err(Error::Parse { line: text.lines().count(), message: "missing ENDATA".into() });
    }
    let obj = obj_name.unwrap_or_else(|| OBJ_ROW.to_string());
    let mut model = MipModel::new(name, sense);
    for c in &cols {
        let kind = if c.binary {
            VarKind::Binary
        } else if c.integer {
            VarKind::Integer
        } else {
            VarKind::Continuous
        };
        let lower = c.lower.unwrap_or(0.0);
        let upper = c.upper.unwrap_or(f64::INFINITY);
        model.add_var(c.name.clone(), kind, lower, upper, Role::Generic)?;
    }
    let row_pos: HashMap<&str, usize> = rows.iter().enumerate().map(|(i, r)| (r.0.as_str(), i)).collect();
    let mut row_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows.len()];
    let mut obj_terms = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        for (row, v) in &c.entries {
            if *row == obj {
                obj_terms.push((j, *v));
            } else {
                let &i = row_pos.get(row.as_str()).ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("column `{}` references unknown row `{row}`", c.name),
                })?;
                row_terms[i].push((j, *v));
            }
        }
    }
    for ((rname, rel), terms) in rows.iter().zip(row_terms) {
        let r = rhs.get(rname).copied().unwrap_or(0.0);
        model.add_row(rname.clone(), terms, *rel, r, RowFamily::Generic)?;
    }
    model.set_objective(sense, obj_terms)?;
    Ok(model)
}

/// Parses `+ 2 x - 3 y` style term lists; returns terms and the remaining
/// tokens.
fn parse_terms<'t>(toks: &'t [&'t str], line: usize) -> Result<(Vec<(String, f64)>, &'t [&'t str])> {
    let mut terms = Vec::new();
    let mut k = 0;
    while k < toks.len() {
        let tok = toks[k];
        if matches!(tok, "<=" | ">=" | "=" | "=<" | "=>") {
            break;
        }
        if tok == "0" && terms.is_empty() && k + 1 >= toks.len() {
            k += 1;
            continue;
        }
        if tok == "0" && terms.is_empty() && matches!(toks.get(k + 1), Some(&"<=" | &">=" | &"=")) {
            k += 1;
            continue;
        }
        let sign = match tok {
            "+" => 1.0,
            "-" => -1.0,
            _ => return Err(Error::Parse { line, message: format!("expected + or -, got `{tok}`") }),
        };
        let coef = toks.get(k + 1).ok_or(Error::Parse { line, message: "dangling sign".into() })?;
        let var = toks.get(k + 2).ok_or(Error::Parse { line, message: "missing variable".into() })?;
        terms.push((var.to_string(), sign * parse_num(coef, line)?));
        k += 3;
    }
    Ok((terms, &toks[k..]))
}

pub fn import_lp(text: &str) -> Result<MipModel> {
    #[derive(PartialEq)]
    enum Sec {
        Head,
        Objective,
        Rows,
        Bounds,
        Binaries,
        Generals,
        End,
    }
    let mut name = String::from("model");
    let mut sense = Sense::Minimize;
    let mut objective: Vec<(String, f64)> = Vec::new();
    let mut rows: Vec<(String, Vec<(String, f64)>, Relation, f64)> = Vec::new();
    let mut bounds: Vec<(String, f64, f64)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    let mut generals: Vec<String> = Vec::new();
    let mut sec = Sec::Head;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('\\') {
            if sec == Sec::Head {
                name = rest.trim().to_string();
            }
            continue;
        }
        let header = match t {
            "Maximize" => {
                sense = Sense::Maximize;
                Some(Sec::Objective)
            }
            "Minimize" => {
                sense = Sense::Minimize;
                Some(Sec::Objective)
            }
            "Subject To" => Some(Sec::Rows),
            "Bounds" => Some(Sec::Bounds),
            "Binaries" => Some(Sec::Binaries),
            "Generals" => Some(Sec::Generals),
            "End" => Some(Sec::End),
            _ => None,
        };
        if let Some(h) = header {
            sec = h;
            continue;
        }
        let bad = |msg: String| Error::Parse { line, message: msg };
        let toks: Vec<&str> = t.split_whitespace().collect();
        match sec {
            Sec::Objective => {
                let label = toks[0].strip_suffix(':').ok_or_else(|| bad("objective needs a label".into()))?;
                if label != OBJ_ROW {
                    return Err(bad(format!("unexpected objective label `{label}`")));
                }
                let (terms, rest) = parse_terms(&toks[1..], line)?;
                if !rest.is_empty() {
                    return Err(bad("trailing tokens after objective".into()));
                }
                objective = terms;
            }
            Sec::Rows => {
                let label = toks[0].strip_suffix(':').ok_or_else(|| bad("row needs a `name:` label".into()))?;
                let (terms, rest) = parse_terms(&toks[1..], line)?;
                if rest.len() != 2 {
                    return Err(bad("row needs a relation and a right-hand side".into()));
                }
                let rel = match rest[0] {
                    "<=" | "=<" => Relation::Le,
                    ">=" | "=>" => Relation::Ge,
                    "=" => Relation::Eq,
                    other => return Err(bad(format!("unknown relation `{other}`"))),
                };
                rows.push((label.to_string(), terms, rel, parse_num(rest[1], line)?));
            }
            Sec::Bounds => {
                if toks.len() != 5 || toks[1] != "<=" || toks[3] != "<=" {
                    return Err(bad("bounds lines must read `lo <= name <= hi`".into()));
                }
                bounds.push((toks[2].to_string(), parse_num(toks[0], line)?, parse_num(toks[4], line)?));
            }
            Sec::Binaries => binaries.extend(toks.iter().map(|s| s.to_string())),
            Sec::Generals => generals.extend(toks.iter().map(|s| s.to_string())),
            Sec::Head | Sec::End => return Err(bad(format!("unexpected line `{t}`"))),
        }
    }
    if sec != Sec::End {
        return Err(Error::Parse { line: text.lines().count(), message: "missing End".into() });
    }
    let mut model = MipModel::new(name, sense);
    for (vname, lo, hi) in &bounds {
        let kind = if binaries.contains(vname) {
            VarKind::Binary
        } else if generals.contains(vname) {
            VarKind::Integer
        } else {
            VarKind::Continuous
        };
        model.add_var(vname.clone(), kind, *lo, *hi, Role::Generic)?;
    }
    let lookup = |model: &MipModel, v: &str| {
        model.var_index(v).ok_or_else(|| Error::Parse { line: 0, message: format!("variable `{v}` has no bounds line") })
    };
    for (rname, terms, rel, r) in rows {
        let t: Vec<(usize, f64)> = terms.iter().map(|(v, a)| Ok((lookup(&model, v)?, *a))).collect::<Result<_>>()?;
        model.add_row(rname, t, rel, r, RowFamily::Generic)?;
    }
    let t: Vec<(usize, f64)> = objective.iter().map(|(v, a)| Ok((lookup(&model, v)?, *a))).collect::<Result<_>>()?;
    model.set_objective(sense, t)?;
    Ok(model)
}

/// Coefficient matrix as formatted strings, for exact round-trip comparison.
pub fn matrix_fingerprint(model: &MipModel) -> Vec<String> {
    let mut out = Vec::new();
    let vars = model.variables();
    out.push(format!("sense {:?}", model.objective().sense));
    for &(j, a) in &model.objective().terms {
        out.push(format!("obj {} {}", vars[j].name, format_number(a)));
    }
    for v in vars {
        out.push(format!("var {} {:?} {} {}", v.name, v.kind, format_number(v.lower), format_number(v.upper)));
    }
    for c in model.constraints() {
        let terms: Vec<String> = c.terms.iter().map(|&(j, a)| format!("{}:{}", vars[j].name, format_number(a))).collect();
        out.push(format!("row {} {} {} {}", c.name, terms.join(","), c.relation.symbol(), format_number(c.rhs)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MipModel {
        let mut m = MipModel::new("sample", Sense::Maximize);
        let x = m.add_var("x", VarKind::Binary, 0.0, 1.0, Role::Generic).unwrap();
        let u = m.add_var("u", VarKind::Integer, 2.0, 5.0, Role::Generic).unwrap();
        let t = m.add_var("t", VarKind::Continuous, 0.0, f64::INFINITY, Role::Generic).unwrap();
        m.add_var("idle", VarKind::Continuous, f64::NEG_INFINITY, 3.0, Role::Generic).unwrap();
        m.add_row("a", [(x, 1.0), (u, -0.1234567890123)], Relation::Le, 2.5, RowFamily::Generic).unwrap();
        m.add_row("b", [(t, 3.0), (x, -4.0)], Relation::Ge, -1.0, RowFamily::Generic).unwrap();
        m.add_row("c", [(t, 1.0)], Relation::Eq, 0.0, RowFamily::Generic).unwrap();
        m.set_objective(Sense::Maximize, [(x, 2.0), (t, 1e-7)]).unwrap();
        m
    }

    #[test]
    fn twelve_digit_numbers() {
        assert_eq!(format_number(0.1234567890123), "0.123456789012");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(-1e-7), "-0.0000001");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn round_trips() {
        let m = sample();
        for fmt in [ExportFormat::MpsFree, ExportFormat::LpText] {
            let text = export_model(&m, fmt).unwrap();
            let back = import_model(&text, fmt).unwrap();
            assert_eq!(matrix_fingerprint(&back), matrix_fingerprint(&m), "{fmt:?}\n{text}");
            assert_eq!(export_model(&back, fmt).unwrap(), text);
        }
    }

    #[test]
    fn empty_model() {
        let m = MipModel::new("empty", Sense::Minimize);
        for fmt in [ExportFormat::MpsFree, ExportFormat::LpText] {
            let back = import_model(&export_model(&m, fmt).unwrap(), fmt).unwrap();
            assert_eq!(back.num_rows(), 0);
            assert_eq!(back.num_vars(), 0);
        }
    }

    #[test]
    fn integer_bounds_written() {
        let text = export_model(&sample(), ExportFormat::MpsFree).unwrap();
        assert!(text.contains(" LO BND u 2\n"));
        assert!(text.contains(" UP BND u 5\n"));
        assert!(text.contains("MARKER MARKER INTORG"));
    }

    #[test]
    fn objective_row_name_collides() {
        let mut m = MipModel::new("c", Sense::Minimize);
        m.add_var("x", VarKind::Continuous, 0.0, 1.0, Role::Generic).unwrap();
        m.add_row(OBJ_ROW, [(0, 1.0)], Relation::Le, 1.0, RowFamily::Generic).unwrap();
        assert_eq!(export_model(&m, ExportFormat::MpsFree), Err(Error::NameCollision(OBJ_ROW.into())));
    }

    #[test]
    fn parse_errors_have_lines() {
        let err = import_mps("NAME x\nROWS\n Q r\nENDATA\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(import_lp("Minimize\n obj: + 1 x\n").is_err());
    }
}
