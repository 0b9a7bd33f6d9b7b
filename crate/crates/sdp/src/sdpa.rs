//! SDPA sparse (`.dat-s`) files.
//!
//! SDPA writes constraints as `sum_i x_i F_i - F_0 ⪰ 0`, so the constant term
//! of an [`LmiProblem`] block is written negated. Margin weights are not part
//! of the format and are dropped.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::{LmiBlock, LmiProblem, SdpaError};

/// Shortest decimal text that parses back to the same `f64` (at most 17
/// significant digits), always with a fractional part or exponent.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

/// Writes `p` with objective `c` (zeros when `None`).
pub fn write_sdpa<W: Write>(p: &LmiProblem, c: Option<&[f64]>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", p.num_vars)?;
    writeln!(w, "{}", p.blocks.len())?;
    let sizes: Vec<String> = p.blocks.iter().map(|b| b.dim.to_string()).collect();
    writeln!(w, "{}", sizes.join(" "))?;
    let obj: Vec<String> = (0..p.num_vars).map(|i| format_value(c.map_or(0.0, |c| c[i]))).collect();
    writeln!(w, "{}", obj.join(" "))?;
    let max_mat = p.blocks.iter().filter_map(|b| b.mats.keys().next_back().copied()).max().unwrap_or(0);
    for matno in 0..=max_mat {
        for (k, b) in p.blocks.iter().enumerate() {
            if let Some(m) = b.mats.get(&matno) {
                for (&(i, j), &v) in m {
                    let v = if matno == 0 { -v } else { v };
                    writeln!(w, "{} {} {} {} {}", matno, k + 1, i + 1, j + 1, format_value(v))?;
                }
            }
        }
    }
    Ok(())
}

pub fn export_sdpa(p: &LmiProblem, c: Option<&[f64]>, path: &Path) -> Result<(), SdpaError> {
    let f = std::fs::File::create(path)?;
    let mut bw = std::io::BufWriter::new(f);
    write_sdpa(p, c, &mut bw)?;
    bw.flush()?;
    Ok(())
}

fn tokens(line: &str) -> Vec<&str> {
    line.split(|ch: char| ch.is_whitespace() || ",{}()".contains(ch)).filter(|s| !s.is_empty()).collect()
}

/// Parses a problem and its objective vector.
pub fn read_sdpa<R: Read>(r: R) -> Result<(LmiProblem, Vec<f64>), SdpaError> {
    let lines = BufReader::new(r).lines();
    let mut header: Vec<(usize, String)> = Vec::new();
    let mut p: Option<LmiProblem> = None;
    let mut obj = Vec::new();
    for (no, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        let empty_objective = t.is_empty() && header.len() == 3 && tokens(&header[0].1).first() == Some(&"0");
        if !empty_objective && (t.is_empty() || t.starts_with('"') || t.starts_with('*')) {
            continue;
        }
        let err = |msg: &str| SdpaError::Parse { line: no + 1, msg: msg.to_string() };
        if header.len() < 4 {
            header.push((no + 1, t.to_string()));
            if header.len() == 4 {
                let num = |s: &str, l: usize| {
                    s.parse::<i64>().map_err(|_| SdpaError::Parse { line: l, msg: format!("bad integer {s:?}") })
                };
                let m = num(tokens(&header[0].1).first().ok_or_else(|| err("missing m"))?, header[0].0)?;
                let nb = num(tokens(&header[1].1).first().ok_or_else(|| err("missing block count"))?, header[1].0)?;
                let sizes: Vec<i64> =
                    tokens(&header[2].1).iter().map(|s| num(s, header[2].0)).collect::<Result<_, _>>()?;
                if m < 0 || nb < 0 || sizes.len() != nb as usize {
                    return Err(SdpaError::Parse {
                        line: header[2].0,
                        msg: "block sizes do not match block count".into(),
                    });
                }
                let mut prob = LmiProblem::new(m as usize);
                for s in sizes {
                    if s == 0 {
                        return Err(SdpaError::Parse { line: header[2].0, msg: "zero block size".into() });
                    }
                    prob.push(LmiBlock::new(s.unsigned_abs() as usize));
                }
                obj = tokens(&header[3].1)
                    .iter()
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| SdpaError::Parse { line: header[3].0, msg: format!("bad value {s:?}") })
                    })
                    .collect::<Result<_, _>>()?;
                if obj.len() != m as usize {
                    return Err(SdpaError::Parse { line: header[3].0, msg: "objective length differs from m".into() });
                }
                p = Some(prob);
            }
            continue;
        }
        let prob = p.as_mut().expect("header parsed");
        let tk = tokens(t);
        if tk.len() != 5 {
            return Err(err("expected `matno blkno i j value`"));
        }
        let ix = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad index {s:?}")));
        let (matno, blk, i, j) = (ix(tk[0])?, ix(tk[1])?, ix(tk[2])?, ix(tk[3])?);
        let v: f64 = tk[4].parse().map_err(|_| err(&format!("bad value {:?}", tk[4])))?;
        if matno > prob.num_vars || blk == 0 || blk > prob.blocks.len() {
            return Err(err("matrix or block number out of range"));
        }
        let b = &mut prob.blocks[blk - 1];
        if i == 0 || j == 0 || i > b.dim || j > b.dim {
            return Err(err("entry index out of range"));
        }
        let key = if i <= j { (i - 1, j - 1) } else { (j - 1, i - 1) };
        let v = if matno == 0 { -v } else { v };
        if v != 0.0 {
            b.mats.entry(matno).or_default().insert(key, v);
        }
    }
    match p {
        Some(p) => Ok((p, obj)),
        None => Err(SdpaError::Parse { line: header.len(), msg: "truncated header".into() }),
    }
}

pub fn import_sdpa(path: &Path) -> Result<(LmiProblem, Vec<f64>), SdpaError> {
    read_sdpa(std::fs::File::open(path)?)
}
