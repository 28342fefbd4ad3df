//! Inter-coder reliability for double-coded label samples: percent
//! agreement and Cohen's κ.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub n: usize,
    pub n_labels: usize,
    pub percent_agreement: f64,
    pub expected_agreement: f64,
    pub kappa: f64,
}

/// Percent agreement and Cohen's κ for two aligned label sequences.
///
/// When chance agreement is total (both coders used one identical label
/// throughout), κ is reported as 1.
pub fn cohen_kappa<S: AsRef<str>>(a: &[S], b: &[S]) -> Result<Agreement> {
    if a.len() != b.len() {
        return Err(Error::Inference(format!(
            "coder sequences differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Inference("no items to compare".into()));
    }
    let n = a.len() as f64;
    let mut ma: BTreeMap<&str, f64> = BTreeMap::new();
    let mut mb: BTreeMap<&str, f64> = BTreeMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x.as_ref(), y.as_ref());
        *ma.entry(x).or_default() += 1.0;
        *mb.entry(y).or_default() += 1.0;
        if x == y {
            agree += 1;
        }
    }
    let labels: BTreeSet<&str> = ma.keys().chain(mb.keys()).copied().collect();
    let po = agree as f64 / n;
    let pe: f64 = labels
        .iter()
        .map(|l| ma.get(l).copied().unwrap_or(0.0) * mb.get(l).copied().unwrap_or(0.0))
        .sum::<f64>()
        / (n * n);
    let kappa = if (1.0 - pe).abs() < 1e-15 {
        1.0
    } else {
        (po - pe) / (1.0 - pe)
    };
    Ok(Agreement {
        n: a.len(),
        n_labels: labels.len(),
        percent_agreement: po,
        expected_agreement: pe,
        kappa,
    })
}

/// Reads a coder file of `item<TAB>label` lines (`#` comments).
pub fn read_coder_file(path: &Path) -> Result<Vec<(String, String)>> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (item, label) = line.split_once('\t').ok_or_else(|| Error::Record {
            path: path.to_path_buf(),
            line: i + 1,
            message: "expected `item<TAB>label`".into(),
        })?;
        out.push((item.trim().to_string(), label.trim().to_lowercase()));
    }
    Ok(out)
}

/// Pairs the two coders' labels by item id, in the first coder's order,
/// keeping at most `sample` items. Items missing from either coder are an
/// error.
pub fn align_coders(
    a: &[(String, String)],
    b: &[(String, String)],
    sample: Option<usize>,
) -> Result<(Vec<String>, Vec<String>)> {
    let lookup: BTreeMap<&str, &str> = b.iter().map(|(i, l)| (i.as_str(), l.as_str())).collect();
    if lookup.len() != b.len() {
        return Err(Error::Inference("second coder file repeats an item".into()));
    }
    let take = sample.unwrap_or(a.len()).min(a.len());
    let mut la = Vec::with_capacity(take);
    let mut lb = Vec::with_capacity(take);
    for (item, label) in &a[..take] {
        let other = lookup
            .get(item.as_str())
            .ok_or_else(|| Error::Inference(format!("item `{item}` missing from second coder")))?;
        la.push(label.clone());
        lb.push(other.to_string());
    }
    Ok((la, lb))
}
