//! Reader for the subset of the MATPOWER `.m` case format that the lossless
//! model needs: `baseMVA`, `bus`, `gen` and `branch`. Other assignments and
//! matrix blocks (`gencost`, `bus_name`, ...) are skipped.

use super::{BranchRecord, BusRecord, GenRecord, RawCase};
use crate::error::ParseError;

// bus columns
const BUS_I: usize = 0;
const BUS_TYPE: usize = 1;
const PD: usize = 2;
const VM: usize = 7;
// gen columns
const GEN_BUS: usize = 0;
const PG: usize = 1;
const GEN_STATUS: usize = 7;
// branch columns
const F_BUS: usize = 0;
const T_BUS: usize = 1;
const BR_R: usize = 2;
const BR_X: usize = 3;
const BR_B: usize = 4;
const BR_STATUS: usize = 10;

struct Block {
    rows: Vec<(usize, Vec<f64>)>,
}

pub(super) fn parse_matpower(text: &str) -> Result<RawCase, ParseError> {
    let mut base_mva = None;
    let mut bus = None;
    let mut gen = None;
    let mut branch = None;

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l)));
    while let Some((lineno, line)) = lines.next() {
        let trimmed = line.trim();
        let Some(rest) = trimmed.strip_prefix("mpc.") else {
            continue;
        };
        let Some(eq) = rest.find('=') else {
            continue;
        };
        let name = rest[..eq].trim();
        let rhs = rest[eq + 1..].trim();

        if rhs.starts_with('[') || rhs.starts_with('{') {
            let close = if rhs.starts_with('[') { ']' } else { '}' };
            let block = read_block(lineno, &rhs[1..], close, &mut lines, close == ']')?;
            match name {
                "bus" => bus = Some(block),
                "gen" => gen = Some(block),
                "branch" => branch = Some(block),
                _ => {}
            }
        } else if name == "baseMVA" {
            let value = rhs.trim_end_matches(';').trim();
            base_mva = Some(parse_number(value).ok_or_else(|| ParseError::Syntax {
                line: lineno,
                msg: format!("invalid baseMVA value `{value}`"),
            })?);
        }
    }

    let base_mva = base_mva.ok_or(ParseError::MissingBlock("baseMVA"))?;
    let bus = bus.ok_or(ParseError::MissingBlock("bus"))?;
    let branch = branch.unwrap_or(Block { rows: Vec::new() });
    let gen = gen.unwrap_or(Block { rows: Vec::new() });

    let mut buses = Vec::with_capacity(bus.rows.len());
    for (line, row) in &bus.rows {
        require_cols(*line, row, 3, "bus")?;
        buses.push(BusRecord {
            id: as_id(*line, row[BUS_I])?,
            bus_type: row[BUS_TYPE] as u8,
            pd: row[PD],
            vm: row.get(VM).copied().unwrap_or(1.0),
        });
    }

    let mut gens = Vec::new();
    for (line, row) in &gen.rows {
        require_cols(*line, row, 2, "gen")?;
        if row.get(GEN_STATUS).copied().unwrap_or(1.0) <= 0.0 {
            continue;
        }
        gens.push(GenRecord {
            bus: as_id(*line, row[GEN_BUS])?,
            pg: row[PG],
        });
    }

    let mut branches = Vec::new();
    for (line, row) in &branch.rows {
        require_cols(*line, row, 4, "branch")?;
        if row.get(BR_STATUS).copied().unwrap_or(1.0) <= 0.0 {
            continue;
        }
        branches.push(BranchRecord {
            from: as_id(*line, row[F_BUS])?,
            to: as_id(*line, row[T_BUS])?,
            r: row[BR_R],
            x: row[BR_X],
            charging: row.get(BR_B).copied().unwrap_or(0.0),
            susceptance: None,
        });
    }

    let raw = RawCase {
        base_mva,
        buses,
        gens,
        branches,
    };
    raw.validate()?;
    Ok(raw)
}

fn read_block<'a>(
    start: usize,
    first: &str,
    close: char,
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    numeric: bool,
) -> Result<Block, ParseError> {
    let mut rows = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    let mut row_line = start;
    let mut pending = Some((start, first.to_string()));

    loop {
        let (lineno, line) = match pending.take() {
            Some(p) => p,
            None => match lines.next() {
                Some((n, l)) => (n, l.to_string()),
                None => {
                    return Err(ParseError::Syntax {
                        line: start,
                        msg: format!("unterminated matrix block (missing `{close}`)"),
                    })
                }
            },
        };
        let (body, done) = match line.find(close) {
            Some(pos) => (&line[..pos], true),
            None => (line.as_str(), false),
        };
        if numeric {
            for (i, segment) in body.split(';').enumerate() {
                if i > 0 && !current.is_empty() {
                    rows.push((row_line, std::mem::take(&mut current)));
                }
                for token in segment.split(|c: char| c.is_whitespace() || c == ',') {
                    if token.is_empty() {
                        continue;
                    }
                    if current.is_empty() {
                        row_line = lineno;
                    }
                    let value = parse_number(token).ok_or_else(|| ParseError::Syntax {
                        line: lineno,
                        msg: format!("invalid number `{token}`"),
                    })?;
                    current.push(value);
                }
            }
            // a newline also terminates a row
            if !current.is_empty() {
                rows.push((row_line, std::mem::take(&mut current)));
            }
        }
        if done {
            return Ok(Block { rows });
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn parse_number(token: &str) -> Option<f64> {
    match token {
        "Inf" | "inf" => Some(f64::INFINITY),
        "-Inf" | "-inf" => Some(f64::NEG_INFINITY),
        _ => token.parse().ok(),
    }
}

fn require_cols(line: usize, row: &[f64], n: usize, what: &str) -> Result<(), ParseError> {
    if row.len() < n {
        return Err(ParseError::Syntax {
            line,
            msg: format!("{what} row has {} columns, need at least {n}", row.len()),
        });
    }
    Ok(())
}

fn as_id(line: usize, v: f64) -> Result<usize, ParseError> {
    if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
        Ok(v as usize)
    } else {
        Err(ParseError::Syntax {
            line,
            msg: format!("invalid bus number {v}"),
        })
    }
}
