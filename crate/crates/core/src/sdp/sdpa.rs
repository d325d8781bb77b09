//! SDPA sparse format (`.dat-s`).
//!
//! SDPA files describe `max <F0, Y> s.t. <F_i, Y> = c_i, Y PSD`. A problem
//! `min <C, W> s.t. <A_i, W> = b_i` is written with `F0 = -C`, `F_i = A_i`
//! and `c = b`, so the objective reported by an external solver is the
//! negative of ours (before the offset). Block 1 is the PSD block; the
//! nonnegative part, if any, is block 2 with a negative size.
//!
//! Label and offset travel in `*` comment lines so that a write/read/write
//! cycle is byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::problem::{Constraint, SdpProblem, SparseSym};
use crate::error::{Error, Result};

fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn to_string(p: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "* label {}", p.label);
    let _ = writeln!(out, "* offset {}", fmt_num(p.offset));
    let _ = writeln!(out, "* objective = -(sdpa objective) + offset");
    let _ = writeln!(out, "{}", p.constraints.len());
    if p.lp_len > 0 {
        let _ = writeln!(out, "2");
        let _ = writeln!(out, "{} -{}", p.psd_side, p.lp_len);
    } else {
        let _ = writeln!(out, "1");
        let _ = writeln!(out, "{}", p.psd_side);
    }
    let rhs: Vec<String> = p.constraints.iter().map(|c| fmt_num(c.rhs)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));

    let mut emit = |mat: usize, psd: &SparseSym, lp: &[(usize, f64)], sign: f64| {
        for (r, c, v) in psd.iter() {
            let _ = writeln!(out, "{} 1 {} {} {}", mat, r + 1, c + 1, fmt_num(sign * v));
        }
        for &(j, v) in lp {
            if v != 0.0 {
                let _ = writeln!(out, "{} 2 {} {} {}", mat, j + 1, j + 1, fmt_num(sign * v));
            }
        }
    };
    let cost_lp: Vec<(usize, f64)> = p.cost_lp.iter().copied().enumerate().collect();
    emit(0, &p.cost_psd, &cost_lp, -1.0);
    for (i, c) in p.constraints.iter().enumerate() {
        emit(i + 1, &c.psd, &c.lp, 1.0);
    }
    out
}

pub fn write_file(p: &SdpProblem, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_string(p)).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: impl AsRef<Path>) -> Result<SdpProblem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last_line = self.items.last().map_or(0, |t| t.0);
        let t = self
            .items
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::SdpaParse {
                line: last_line,
                msg: format!("unexpected end of input, expected {what}"),
            })?;
        self.pos += 1;
        Ok(t)
    }

    fn int(&mut self, what: &str) -> Result<i64> {
        let (line, t) = self.next(what)?;
        let v: f64 = t.parse().map_err(|_| Error::SdpaParse {
            line,
            msg: format!("expected {what}, found `{t}`"),
        })?;
        if v.fract() != 0.0 {
            return Err(Error::SdpaParse {
                line,
                msg: format!("expected integer {what}, found `{t}`"),
            });
        }
        Ok(v as i64)
    }

    fn float(&mut self, what: &str) -> Result<f64> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| Error::SdpaParse {
            line,
            msg: format!("expected {what}, found `{t}`"),
        })
    }

    fn done(&self) -> bool {
        self.pos >= self.items.len()
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).map_or(0, |t| t.0)
    }
}

pub fn parse(text: &str) -> Result<SdpProblem> {
    let mut label = String::new();
    let mut offset = 0.0;
    let mut items = Vec::new();
    let mut header = true;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let trimmed = raw.trim_start();
        if header && (trimmed.starts_with('*') || trimmed.starts_with('"')) {
            let body = trimmed[1..].trim();
            if let Some(l) = body.strip_prefix("label ") {
                label = l.to_string();
            } else if body == "label" {
                label.clear();
            } else if let Some(o) = body.strip_prefix("offset ") {
                offset = o.trim().parse().map_err(|_| Error::SdpaParse {
                    line: line_no,
                    msg: format!("bad offset `{o}`"),
                })?;
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        header = false;
        // anything after the first non-numeric token is a trailing comment
        for tok in raw
            .split(|c: char| c.is_whitespace() || "{}(),".contains(c))
            .filter(|t| !t.is_empty())
        {
            if tok.parse::<f64>().is_err() {
                break;
            }
            items.push((line_no, tok));
        }
    }
    let mut toks = Tokens { items, pos: 0 };

    let m = toks.int("number of constraints")?;
    let nblocks = toks.int("number of blocks")?;
    if m < 0 || !(1..=2).contains(&nblocks) {
        return Err(Error::SdpaParse {
            line: toks.line(),
            msg: "only one PSD block plus an optional LP block is supported".into(),
        });
    }
    let m = m as usize;
    let mut psd_block = None;
    let mut lp_block = None;
    let mut sizes = Vec::new();
    for blk in 1..=nblocks as usize {
        let sz = toks.int("block size")?;
        sizes.push(sz);
        if sz > 0 && psd_block.is_none() {
            psd_block = Some(blk);
        } else if sz < 0 && lp_block.is_none() {
            lp_block = Some(blk);
        } else {
            return Err(Error::SdpaParse {
                line: toks.line(),
                msg: "only one PSD block plus an optional LP block is supported".into(),
            });
        }
    }
    let psd_side = psd_block.map_or(0, |b| sizes[b - 1] as usize);
    let lp_len = lp_block.map_or(0, |b| (-sizes[b - 1]) as usize);

    let mut p = SdpProblem::new(psd_side, lp_len);
    p.label = label;
    p.offset = offset;
    p.constraints = (0..m)
        .map(|_| toks.float("right-hand side").map(Constraint::new))
        .collect::<Result<_>>()?;

    while !toks.done() {
        let line = toks.line();
        let mat = toks.int("matrix number")?;
        let blk = toks.int("block number")?;
        let i = toks.int("row index")?;
        let j = toks.int("column index")?;
        let v = toks.float("value")?;
        let bad = |msg: &str| Error::SdpaParse {
            line,
            msg: msg.to_string(),
        };
        if mat < 0 || mat as usize > m {
            return Err(bad("matrix number out of range"));
        }
        let blk = blk as usize;
        if Some(blk) == psd_block {
            if i < 1 || j < 1 || i as usize > psd_side || j as usize > psd_side {
                return Err(bad("entry outside the PSD block"));
            }
            let (r, c) = ((i - 1) as usize, (j - 1) as usize);
            if mat == 0 {
                p.cost_psd.add(r, c, -v);
            } else {
                p.constraints[mat as usize - 1].psd.add(r, c, v);
            }
        } else if Some(blk) == lp_block {
            if i != j || i < 1 || i as usize > lp_len {
                return Err(bad("LP block entries must be on the diagonal"));
            }
            let k = (i - 1) as usize;
            if mat == 0 {
                p.cost_lp[k] -= v;
            } else {
                let c = std::mem::take(&mut p.constraints[mat as usize - 1]);
                p.constraints[mat as usize - 1] = c.lp(k, v);
            }
        } else {
            return Err(bad("unknown block number"));
        }
    }
    Ok(p)
}
