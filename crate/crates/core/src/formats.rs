//! Plain-text file formats.
//!
//! * `.dat`: one transaction per line, ascending space-separated 0-based item
//!   ids. An empty line is an empty transaction. Tids are assigned 1, 2, ... in
//!   line order (comment lines do not count).
//! * `.cst`: `n <int>`, `t <int>`, then `<ids> : <support>` per constraint.
//! * `.prv`: `<ids> : <s_min> <s_max>` per privacy rule.
//! * edge lists: optional `vertices <int>`, then `u v` per edge.
//!
//! Lines starting with `#` are comments and are skipped by every reader, with
//! one exception: a `# scrubbed ...` line in a `.cst` carries the scrub lineage.
//! Writers emit canonical text, so `write(read(text)) == text` for any
//! canonical comment-free input.

use std::fmt::Write as _;

use crate::constraints::{ConstraintSet, ScrubMarker, SupportConstraint};
use crate::database::TransactionDatabase;
use crate::error::{Error, Result};
use crate::itemset::{ItemSet, ItemUniverse};
use crate::oracle::Graph;
use crate::privacy::{AuditFinding, PrivacyRule};
use crate::report::{ConstraintDeviation, SynthesisReport};

const SCRUB_TAG: &str = "# scrubbed";

/// Splits text into numbered lines; a single trailing newline does not start
/// a new line.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let parts: Vec<&str> = if text.is_empty() {
        Vec::new()
    } else {
        body.split('\n').collect()
    };
    parts
        .into_iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

fn is_comment(line: &str) -> bool {
    line.starts_with('#')
}

fn parse_u64(tok: &str, line: usize, what: &str) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| Error::parse(line, format!("expected {what}, found `{tok}`")))
}

/// Parses strictly ascending item ids.
fn parse_ids(text: &str, line: usize) -> Result<Vec<usize>> {
    let mut ids = Vec::new();
    for tok in text.split_whitespace() {
        let id = parse_u64(tok, line, "item id")? as usize;
        if let Some(&prev) = ids.last() {
            if id <= prev {
                return Err(Error::parse(line, "item ids must be strictly ascending"));
            }
        }
        ids.push(id);
    }
    Ok(ids)
}

fn itemset_at(t: usize, ids: &[usize], line: usize) -> Result<ItemSet> {
    ItemSet::from_items(t, ids.iter().copied()).map_err(|e| Error::parse(line, e.to_string()))
}

/// Prefixes every line of `header` with `# `.
pub fn with_header(header: &[String], body: &str) -> String {
    let mut out = String::new();
    for h in header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    out.push_str(body);
    out
}

/// Reads a `.dat` file. When `universe_size` is `None` the universe is
/// `max id + 1` (at least one item).
pub fn read_database(text: &str, universe_size: Option<usize>) -> Result<TransactionDatabase> {
    let mut raw = Vec::new();
    let mut max_id = None::<usize>;
    for (no, line) in lines(text) {
        if is_comment(line) {
            continue;
        }
        let ids = parse_ids(line, no)?;
        if let Some(&last) = ids.last() {
            max_id = Some(max_id.map_or(last, |m: usize| m.max(last)));
        }
        raw.push((no, ids));
    }
    let t = match universe_size {
        Some(t) => t,
        None => max_id.map_or(1, |m| m + 1),
    };
    let universe = ItemUniverse::new(t)?;
    let sets = raw
        .iter()
        .map(|(no, ids)| itemset_at(t, ids, *no))
        .collect::<Result<Vec<_>>>()?;
    TransactionDatabase::from_itemsets(universe, sets)
}

pub fn write_database(db: &TransactionDatabase) -> String {
    let mut out = String::new();
    for row in db.rows() {
        let _ = writeln!(out, "{}", row.items);
    }
    out
}

pub fn read_constraints(text: &str) -> Result<ConstraintSet> {
    let mut n = None;
    let mut t = None;
    let mut marker_line = None;
    let mut pending = Vec::new();
    for (no, line) in lines(text) {
        if line.starts_with(SCRUB_TAG) {
            marker_line = Some((no, line));
            continue;
        }
        if is_comment(line) || line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("n ") {
            n = Some(parse_u64(rest.trim(), no, "n")?);
        } else if let Some(rest) = line.strip_prefix("t ") {
            t = Some(parse_u64(rest.trim(), no, "t")? as usize);
        } else {
            let (lhs, rhs) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(no, "expected `<ids> : <support>`"))?;
            let ids = parse_ids(lhs, no)?;
            if ids.is_empty() {
                return Err(Error::parse(no, "constraint on the empty itemset"));
            }
            let support = parse_u64(rhs.trim(), no, "support")?;
            pending.push((no, ids, support));
        }
    }
    let n = n.ok_or_else(|| Error::parse(0, "missing `n <int>` line"))?;
    let t = t.ok_or_else(|| Error::parse(0, "missing `t <int>` line"))?;
    let universe = ItemUniverse::new(t)?;
    let constraints = pending
        .iter()
        .map(|(no, ids, support)| {
            Ok(SupportConstraint {
                itemset: itemset_at(t, ids, *no)?,
                support: *support,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let marker = marker_line
        .map(|(no, line)| parse_scrub_marker(line, t, no))
        .transpose()?;
    Ok(ConstraintSet::new(universe, n, constraints)?.with_scrub_marker(marker))
}

fn parse_scrub_marker(line: &str, t: usize, no: usize) -> Result<ScrubMarker> {
    let mut seed = None;
    let mut sensitive = None;
    for tok in line[SCRUB_TAG.len()..].split_whitespace() {
        if let Some(v) = tok.strip_prefix("seed=") {
            seed = Some(parse_u64(v, no, "seed")?);
        } else if let Some(v) = tok.strip_prefix("sensitive=") {
            let ids = v
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| parse_u64(s, no, "item id").map(|x| x as usize))
                .collect::<Result<Vec<_>>>()?;
            sensitive = Some(itemset_at(t, &ids, no)?);
        }
    }
    match (seed, sensitive) {
        (Some(seed), Some(sensitive)) => Ok(ScrubMarker { seed, sensitive }),
        _ => Err(Error::parse(no, "malformed scrub marker")),
    }
}

pub fn write_constraints(cs: &ConstraintSet) -> String {
    let mut out = String::new();
    if let Some(marker) = cs.scrub_marker() {
        let ids: Vec<String> = marker.sensitive.items().map(|k| k.to_string()).collect();
        let _ = writeln!(
            out,
            "{SCRUB_TAG} seed={} sensitive={}",
            marker.seed,
            ids.join(",")
        );
    }
    let _ = writeln!(out, "n {}", cs.n());
    let _ = writeln!(out, "t {}", cs.universe().size());
    for c in cs.constraints() {
        let _ = writeln!(out, "{} : {}", c.itemset, c.support);
    }
    out
}

pub fn read_privacy(text: &str, universe_size: usize) -> Result<Vec<PrivacyRule>> {
    let mut rules = Vec::new();
    for (no, line) in lines(text) {
        if is_comment(line) || line.trim().is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(no, "expected `<ids> : <s_min> <s_max>`"))?;
        let ids = parse_ids(lhs, no)?;
        let bounds: Vec<&str> = rhs.split_whitespace().collect();
        if bounds.len() != 2 {
            return Err(Error::parse(no, "expected two bounds `<s_min> <s_max>`"));
        }
        let s_min = parse_u64(bounds[0], no, "s_min")?;
        let s_max = parse_u64(bounds[1], no, "s_max")?;
        if s_min > s_max {
            return Err(Error::parse(no, "s_min exceeds s_max"));
        }
        rules.push(PrivacyRule {
            itemset: itemset_at(universe_size, &ids, no)?,
            s_min,
            s_max,
        });
    }
    Ok(rules)
}

pub fn write_privacy(rules: &[PrivacyRule]) -> String {
    let mut out = String::new();
    for r in rules {
        let _ = writeln!(out, "{} : {} {}", r.itemset, r.s_min, r.s_max);
    }
    out
}

pub fn read_edges(text: &str) -> Result<Graph> {
    let mut declared = None;
    let mut edges = Vec::new();
    for (no, line) in lines(text) {
        if is_comment(line) || line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertices ") {
            declared = Some(parse_u64(rest.trim(), no, "vertex count")? as usize);
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(no, "expected `u v`"));
        }
        let u = parse_u64(toks[0], no, "vertex")? as usize;
        let v = parse_u64(toks[1], no, "vertex")? as usize;
        edges.push((u, v));
    }
    let implied = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let count = declared.unwrap_or(implied);
    Graph::new(count, edges)
}

pub fn write_edges(g: &Graph) -> String {
    let mut out = format!("vertices {}\n", g.vertex_count());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Deviation report as CSV: one row per constraint, then the summary rows
/// with the key in the first column and the value in the second.
pub fn write_report(r: &SynthesisReport) -> String {
    let mut out = String::from("itemset,target,actual,deviation\n");
    for row in &r.per_constraint {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.itemset, row.target, row.actual, row.deviation
        );
    }
    let _ = writeln!(out, "n_target,{},,", r.n_target);
    let _ = writeln!(out, "n_actual,{},,", r.n_actual);
    let lp = r.lp_objective.map(fmt_real).unwrap_or_default();
    let _ = writeln!(out, "lp_objective,{lp},,");
    let _ = writeln!(out, "sum_abs_deviation,{},,", r.sum_abs_deviation);
    let _ = writeln!(out, "max_abs_deviation,{},,", r.max_abs_deviation);
    out
}

pub fn read_report(text: &str, universe_size: usize) -> Result<SynthesisReport> {
    let mut rows = Vec::new();
    let mut n_target = None;
    let mut n_actual = None;
    let mut lp_objective = None;
    let mut sum_abs = None;
    let mut max_abs = None;
    let mut header_seen = false;
    for (no, line) in lines(text) {
        if is_comment(line) || line.is_empty() {
            continue;
        }
        if !header_seen {
            if line != "itemset,target,actual,deviation" {
                return Err(Error::parse(no, "missing report header"));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::parse(no, "expected 4 columns"));
        }
        match cols[0] {
            "n_target" => n_target = Some(parse_u64(cols[1], no, "n_target")?),
            "n_actual" => n_actual = Some(parse_u64(cols[1], no, "n_actual")?),
            "lp_objective" => {
                if !cols[1].is_empty() {
                    lp_objective = Some(
                        cols[1]
                            .parse::<f64>()
                            .map_err(|_| Error::parse(no, "bad lp_objective"))?,
                    );
                }
            }
            "sum_abs_deviation" => sum_abs = Some(parse_u64(cols[1], no, "sum")?),
            "max_abs_deviation" => max_abs = Some(parse_u64(cols[1], no, "max")?),
            items => {
                let ids = parse_ids(items, no)?;
                let deviation = cols[3]
                    .parse::<i64>()
                    .map_err(|_| Error::parse(no, "bad deviation"))?;
                rows.push(ConstraintDeviation {
                    itemset: itemset_at(universe_size, &ids, no)?,
                    target: parse_u64(cols[1], no, "target")?,
                    actual: parse_u64(cols[2], no, "actual")?,
                    deviation,
                });
            }
        }
    }
    let (Some(n_target), Some(n_actual), Some(sum_abs), Some(max_abs)) =
        (n_target, n_actual, sum_abs, max_abs)
    else {
        return Err(Error::parse(0, "report is missing summary rows"));
    };
    let report = SynthesisReport::from_rows(n_target, n_actual, rows, lp_objective);
    if report.sum_abs_deviation != sum_abs || report.max_abs_deviation != max_abs {
        return Err(Error::parse(0, "summary rows disagree with per-constraint rows"));
    }
    Ok(report)
}

fn fmt_branch(c: Option<f64>) -> String {
    match c {
        None => String::new(),
        Some(x) if x.is_infinite() => "inf".to_string(),
        Some(x) => fmt_real(x),
    }
}

pub fn write_findings(findings: &[AuditFinding]) -> String {
    let mut out = String::from("itemset,s_min,s_max,c_low,c_high,confidence,leaked\n");
    for f in findings {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f.rule.itemset,
            f.rule.s_min,
            f.rule.s_max,
            fmt_branch(f.confidence_low_branch),
            fmt_branch(f.confidence_high_branch),
            fmt_branch(Some(f.confidence)),
            f.leaked
        );
    }
    out
}
