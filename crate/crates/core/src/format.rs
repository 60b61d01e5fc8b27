//! Line-delimited snapshot files.
//!
//! ```text
//! #interchange-snapshots	format_version=1
//! #dimension=12	vertices=4096	t_max=16384	seed=7	replica=0	rng=...	martingale=1
//! t	N_t	N_tilde_t	V_gt_2	V_gt_64	largest_cycle	largest_cluster	p_t	S	M	M_tilde	X_t
//! 0	4096	4096	0	0	1	1	1.0000000000000000e0	0	0	0	0.0000000000000000e0
//! H	16384	812x1 97x2 1x130
//! #end	S=..	M=..	M_tilde=..
//! ```
//!
//! Fields are tab separated. One `V_gt_<ℓ>` column per tracked threshold; `X_t` only
//! when the martingale is tracked. `H` lines carry a cycle-length histogram as
//! `length x multiplicity` pairs. A file without the `#end` trailer is incomplete.
//! Floating values are written with 17 significant digits, which round-trips exactly.

use std::io::{BufRead, Write};

use crate::engine::{EventCounts, Histogram, RunHeader, RunRecord, Snapshot};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "#interchange-snapshots";

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn column_names(header: &RunHeader) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "N_t", "N_tilde_t"].iter().map(|s| s.to_string()).collect();
    cols.extend(header.thresholds.iter().map(|l| format!("V_gt_{l}")));
    cols.extend(
        ["largest_cycle", "largest_cluster", "p_t", "S", "M", "M_tilde"]
            .iter()
            .map(|s| s.to_string()),
    );
    if header.martingale {
        cols.push("X_t".into());
    }
    cols
}

pub fn write_header<W: Write>(out: &mut W, header: &RunHeader) -> Result<()> {
    writeln!(out, "{MAGIC}\tformat_version={}", header.format_version)?;
    writeln!(
        out,
        "#dimension={}\tvertices={}\tt_max={}\tseed={}\treplica={}\trng={}\tmartingale={}",
        header.dimension,
        header.vertices,
        header.t_max,
        header.seed,
        header.replica,
        header.rng,
        u8::from(header.martingale)
    )?;
    writeln!(out, "{}", column_names(header).join("\t"))?;
    Ok(())
}

pub fn write_snapshot<W: Write>(out: &mut W, s: &Snapshot) -> Result<()> {
    write!(out, "{}\t{}\t{}", s.t, s.cycles, s.clusters)?;
    for v in &s.long_cycle_vertices {
        write!(out, "\t{v}")?;
    }
    write!(
        out,
        "\t{}\t{}\t{}\t{}\t{}\t{}",
        s.largest_cycle,
        s.largest_cluster,
        float(s.merge_hazard),
        s.counts.splits,
        s.counts.merges_same_cluster,
        s.counts.merges_cross_cluster
    )?;
    if let Some(x) = s.martingale {
        write!(out, "\t{}", float(x))?;
    }
    writeln!(out)?;
    Ok(())
}

pub fn write_histogram<W: Write>(out: &mut W, h: &Histogram) -> Result<()> {
    let pairs: Vec<String> = h.lengths.iter().map(|(l, m)| format!("{l}x{m}")).collect();
    writeln!(out, "H\t{}\t{}", h.t, pairs.join(" "))?;
    Ok(())
}

pub fn write_trailer<W: Write>(out: &mut W, totals: &EventCounts) -> Result<()> {
    writeln!(
        out,
        "#end\tS={}\tM={}\tM_tilde={}",
        totals.splits, totals.merges_same_cluster, totals.merges_cross_cluster
    )?;
    Ok(())
}

/// Serializes a whole record, histograms placed right after the snapshot of their time.
pub fn write_record<W: Write>(out: &mut W, record: &RunRecord) -> Result<()> {
    write_header(out, &record.header)?;
    let mut hist = record.histograms.iter().peekable();
    for s in &record.snapshots {
        while let Some(h) = hist.next_if(|h| h.t < s.t) {
            write_histogram(out, h)?;
        }
        write_snapshot(out, s)?;
        while let Some(h) = hist.next_if(|h| h.t == s.t) {
            write_histogram(out, h)?;
        }
    }
    for h in hist {
        write_histogram(out, h)?;
    }
    if let Some(totals) = &record.totals {
        write_trailer(out, totals)?;
    }
    Ok(())
}

pub fn record_to_string(record: &RunRecord) -> String {
    let mut buf = Vec::new();
    write_record(&mut buf, record).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn key_values(line: &str) -> impl Iterator<Item = (&str, &str)> {
    line.trim_start_matches('#').split('\t').filter_map(|kv| kv.split_once('='))
}

struct LineParser {
    line: usize,
}

impl LineParser {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Parse { line: self.line, reason: reason.into() }
    }

    fn num<T: std::str::FromStr>(&self, field: &str, what: &str) -> Result<T> {
        field.parse().map_err(|_| self.err(format!("bad {what} `{field}`")))
    }
}

/// Parses a snapshot file. A missing trailer yields `totals: None` rather than an error.
pub fn read_record<R: BufRead>(input: R) -> Result<RunRecord> {
    let mut lines = input.lines().enumerate();
    let mut p = LineParser { line: 0 };
    let mut next_line = |p: &mut LineParser| -> Result<Option<String>> {
        match lines.next() {
            Some((i, l)) => {
                p.line = i + 1;
                Ok(Some(l?))
            }
            None => Ok(None),
        }
    };

    let first = next_line(&mut p)?.ok_or_else(|| p.err("empty file"))?;
    if !first.starts_with(MAGIC) {
        return Err(p.err("missing format magic"));
    }
    let version: u32 = key_values(&first)
        .find(|(k, _)| *k == "format_version")
        .map(|(_, v)| p.num(v, "format_version"))
        .transpose()?
        .ok_or_else(|| p.err("missing format_version"))?;
    if version != FORMAT_VERSION {
        return Err(p.err(format!("unsupported format_version {version}")));
    }

    let meta = next_line(&mut p)?.ok_or_else(|| p.err("missing run metadata"))?;
    let mut header = RunHeader {
        format_version: version,
        dimension: 0,
        vertices: 0,
        t_max: 0,
        seed: 0,
        replica: 0,
        rng: String::new(),
        thresholds: Vec::new(),
        martingale: false,
    };
    for (k, v) in key_values(&meta) {
        match k {
            "dimension" => header.dimension = p.num(v, k)?,
            "vertices" => header.vertices = p.num(v, k)?,
            "t_max" => header.t_max = p.num(v, k)?,
            "seed" => header.seed = p.num(v, k)?,
            "replica" => header.replica = p.num(v, k)?,
            "rng" => header.rng = v.to_string(),
            "martingale" => header.martingale = p.num::<u8>(v, k)? != 0,
            other => return Err(p.err(format!("unknown metadata key `{other}`"))),
        }
    }

    let columns_line = next_line(&mut p)?.ok_or_else(|| p.err("missing column header"))?;
    for col in columns_line.split('\t') {
        if let Some(l) = col.strip_prefix("V_gt_") {
            header.thresholds.push(p.num(l, "threshold column")?);
        }
    }
    let expected = column_names(&header);
    if columns_line.split('\t').ne(expected.iter().map(String::as_str)) {
        return Err(p.err(format!("column header does not match metadata; expected `{}`", expected.join(" "))));
    }

    let width = expected.len();
    let k = header.thresholds.len();
    let mut record = RunRecord { header, snapshots: Vec::new(), histograms: Vec::new(), totals: None };
    while let Some(line) = next_line(&mut p)? {
        if record.totals.is_some() {
            return Err(p.err("data after #end trailer"));
        }
        if line.starts_with("#end") {
            let (mut s, mut m, mut mt) = (None, None, None);
            for (key, v) in key_values(&line) {
                match key {
                    "S" => s = Some(p.num(v, key)?),
                    "M" => m = Some(p.num(v, key)?),
                    "M_tilde" => mt = Some(p.num(v, key)?),
                    other => return Err(p.err(format!("unknown trailer key `{other}`"))),
                }
            }
            let (Some(splits), Some(merges_same_cluster), Some(merges_cross_cluster)) = (s, m, mt) else {
                return Err(p.err("trailer needs S, M and M_tilde"));
            };
            let totals = EventCounts { splits, merges_same_cluster, merges_cross_cluster };
            // t_max is always snapshotted, so the trailer must repeat its counts.
            match record.snapshots.last() {
                Some(last) if last.t == record.header.t_max && last.counts == totals => {}
                _ => return Err(p.err("trailer does not match the snapshot at t_max")),
            }
            record.totals = Some(totals);
        } else if let Some(rest) = line.strip_prefix("H\t") {
            let (t, pairs) = rest.split_once('\t').unwrap_or((rest, ""));
            let mut lengths = Vec::new();
            for pair in pairs.split(' ').filter(|s| !s.is_empty()) {
                let (l, m) = pair.split_once('x').ok_or_else(|| p.err(format!("bad histogram entry `{pair}`")))?;
                lengths.push((p.num(l, "cycle length")?, p.num(m, "multiplicity")?));
            }
            record.histograms.push(Histogram { t: p.num(t, "histogram time")?, lengths });
        } else {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != width {
                return Err(p.err(format!("expected {width} fields, found {}", f.len())));
            }
            let snap = Snapshot {
                t: p.num(f[0], "t")?,
                cycles: p.num(f[1], "N_t")?,
                clusters: p.num(f[2], "N_tilde_t")?,
                long_cycle_vertices: f[3..3 + k].iter().map(|v| p.num(v, "V_gt")).collect::<Result<_>>()?,
                largest_cycle: p.num(f[3 + k], "largest_cycle")?,
                largest_cluster: p.num(f[4 + k], "largest_cluster")?,
                merge_hazard: p.num(f[5 + k], "p_t")?,
                counts: EventCounts {
                    splits: p.num(f[6 + k], "S")?,
                    merges_same_cluster: p.num(f[7 + k], "M")?,
                    merges_cross_cluster: p.num(f[8 + k], "M_tilde")?,
                },
                martingale: if record.header.martingale { Some(p.num(f[9 + k], "X_t")?) } else { None },
            };
            if record.snapshots.last().is_some_and(|s: &Snapshot| s.t >= snap.t) {
                return Err(p.err(format!("snapshot times not increasing at t={}", snap.t)));
            }
            record.snapshots.push(snap);
        }
    }
    Ok(record)
}
