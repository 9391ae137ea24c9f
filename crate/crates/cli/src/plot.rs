//! Plot-ready CSVs: x is the pull index, y the series values.

use std::io::{BufRead, Write};

use anyhow::{bail, Context};

pub const RUNNING_HEADER: &str = "pull,running_mu_h_T,running_mu_l_T";
pub const MAE_HEADER: &str = "pull,mae";

pub fn write_running<W: Write>(rows: &[(usize, f64, f64)], mut out: W) -> anyhow::Result<()> {
    writeln!(out, "{RUNNING_HEADER}")?;
    for (pull, h, l) in rows {
        writeln!(out, "{pull},{h},{l}")?;
    }
    Ok(())
}

pub fn read_running<R: BufRead>(input: R) -> anyhow::Result<Vec<(usize, f64, f64)>> {
    read_rows(input, RUNNING_HEADER, |f| {
        Ok((f[0].parse()?, f[1].parse()?, f[2].parse()?))
    })
}

pub fn write_mae<W: Write>(rows: &[(usize, f64)], mut out: W) -> anyhow::Result<()> {
    writeln!(out, "{MAE_HEADER}")?;
    for (pull, e) in rows {
        writeln!(out, "{pull},{e}")?;
    }
    Ok(())
}

pub fn read_mae<R: BufRead>(input: R) -> anyhow::Result<Vec<(usize, f64)>> {
    read_rows(input, MAE_HEADER, |f| Ok((f[0].parse()?, f[1].parse()?)))
}

fn read_rows<R: BufRead, T>(
    input: R,
    header: &str,
    parse: impl Fn(&[&str]) -> anyhow::Result<T>,
) -> anyhow::Result<Vec<T>> {
    let width = header.split(',').count();
    let mut lines = input.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim() != header {
        bail!("expected header {header:?}, got {:?}", first.trim());
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != width {
            bail!("line {}: expected {width} fields, got {}", i + 2, fields.len());
        }
        out.push(parse(&fields).with_context(|| format!("line {}", i + 2))?);
    }
    Ok(out)
}
