//! `LABELS v1` text bundles: build info, a per-layer size manifest and one
//! hex line per point.

use treecover_core::routing::{decode_label, encode_label, BuildInfo, LabelBits, LabelBundle};
use treecover_core::tree_model::Mode;

use crate::Failure;

/// Largest and mean bit count of each label layer.
#[derive(Clone, Debug, PartialEq)]
pub struct SizeTable {
    pub rows: Vec<(&'static str, usize, f64)>,
}

impl SizeTable {
    pub fn of(bits: &[LabelBits]) -> Self {
        type Layer = (&'static str, fn(&LabelBits) -> usize);
        let layers: [Layer; 5] = [
            ("apex", |b| b.apex),
            ("partial", |b| b.partial),
            ("far", |b| b.far),
            ("header", |b| b.header),
            ("total", |b| b.total()),
        ];
        let n = bits.len().max(1) as f64;
        let rows = layers
            .iter()
            .map(|(name, f)| {
                let max = bits.iter().map(f).max().unwrap_or(0);
                let mean = bits.iter().map(f).sum::<usize>() as f64 / n;
                (*name, max, mean)
            })
            .collect();
        SizeTable { rows }
    }

    pub fn max_total(&self) -> usize {
        self.rows.last().map_or(0, |r| r.1)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("layer     max_bits  mean_bits\n");
        for (name, max, mean) in &self.rows {
            out.push_str(&format!("{name:<9} {max:>9} {mean:>10.1}\n"));
        }
        out
    }
}

fn floats(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ")
}

pub fn write_bundle(bundle: &LabelBundle) -> (String, SizeTable) {
    let encoded: Vec<(Vec<u8>, LabelBits)> = bundle.labels.iter().map(encode_label).collect();
    let bits: Vec<LabelBits> = encoded.iter().map(|e| e.1).collect();
    let table = SizeTable::of(&bits);
    let i = &bundle.info;
    let mut out = format!("LABELS v1 n={} d={} build={:016x}\n", bundle.labels.len(), i.dim, i.fingerprint);
    out.push_str(&format!(
        "I mode={} eps_internal={:.16e} mu={:.16e} ell={}\n",
        i.mode.name(),
        i.eps_internal,
        i.mu,
        i.ell
    ));
    out.push_str(&format!("O {}\n", floats(&i.origin)));
    out.push_str(&format!("S {}\n", floats(&i.shifts)));
    for (name, max, mean) in &table.rows {
        out.push_str(&format!("M {name} max={max} mean={mean:.3}\n"));
    }
    for (l, (bytes, _)) in bundle.labels.iter().zip(&encoded) {
        out.push_str(&format!("L {} {}\n", l.point, hex::encode(bytes)));
    }
    (out, table)
}

pub fn read_bundle(text: &str) -> Result<LabelBundle, Failure> {
    let bad = |line: usize, msg: &str| Failure::invalid(format!("labels line {line}: {msg}"));
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let field = |tok: Option<&str>, key: &str| -> Option<String> {
        tok?.strip_prefix(key)?.strip_prefix('=').map(str::to_string)
    };
    let (ln, head) = lines.next().ok_or_else(|| bad(1, "empty bundle"))?;
    let mut t = head.split_whitespace();
    if t.next() != Some("LABELS") || t.next() != Some("v1") {
        return Err(bad(ln, "expected `LABELS v1`"));
    }
    let n: usize = field(t.next(), "n").and_then(|v| v.parse().ok()).ok_or_else(|| bad(ln, "bad n"))?;
    let dim: usize = field(t.next(), "d").and_then(|v| v.parse().ok()).ok_or_else(|| bad(ln, "bad d"))?;
    let fingerprint =
        field(t.next(), "build").and_then(|v| u64::from_str_radix(&v, 16).ok()).ok_or_else(|| bad(ln, "bad build"))?;
    let mut info: Option<(Mode, f64, f64, u32)> = None;
    let (mut origin, mut shifts) = (None, None);
    let mut labels = Vec::with_capacity(n);
    let nums = |rest: std::str::SplitWhitespace<'_>, ln: usize| -> Result<Vec<f64>, Failure> {
        rest.map(|x| x.parse::<f64>().map_err(|_| bad(ln, "bad number"))).collect()
    };
    for (ln, line) in lines {
        let mut t = line.split_whitespace();
        match t.next() {
            Some("I") => {
                let mode = field(t.next(), "mode").and_then(|m| Mode::parse(&m)).ok_or_else(|| bad(ln, "bad mode"))?;
                let e =
                    field(t.next(), "eps_internal").and_then(|v| v.parse().ok()).ok_or_else(|| bad(ln, "bad eps"))?;
                let mu = field(t.next(), "mu").and_then(|v| v.parse().ok()).ok_or_else(|| bad(ln, "bad mu"))?;
                let ell = field(t.next(), "ell").and_then(|v| v.parse().ok()).ok_or_else(|| bad(ln, "bad ell"))?;
                info = Some((mode, e, mu, ell));
            }
            Some("O") => origin = Some(nums(t, ln)?),
            Some("S") => shifts = Some(nums(t, ln)?),
            Some("M") => {}
            Some("L") => {
                let _id = t.next().ok_or_else(|| bad(ln, "missing point id"))?;
                let bytes =
                    hex::decode(t.next().ok_or_else(|| bad(ln, "missing label"))?).map_err(|_| bad(ln, "bad hex"))?;
                let label = decode_label(&bytes, dim).map_err(|e| bad(ln, &e.to_string()))?;
                if label.build != fingerprint {
                    return Err(bad(ln, "label from a different build"));
                }
                labels.push(label);
            }
            _ => return Err(bad(ln, "unknown record")),
        }
    }
    let (mode, eps_internal, mu, ell) = info.ok_or_else(|| bad(0, "missing I record"))?;
    let origin = origin.ok_or_else(|| bad(0, "missing O record"))?;
    let shifts = shifts.ok_or_else(|| bad(0, "missing S record"))?;
    if labels.len() != n || origin.len() != dim {
        return Err(bad(0, "record counts disagree with the header"));
    }
    let info = BuildInfo { dim, mode, eps_internal, mu, ell, origin, shifts, fingerprint };
    Ok(LabelBundle { info, labels })
}
