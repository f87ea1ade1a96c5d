//! The UEA `.ts` multivariate time-series format and the in-memory dataset.
//!
//! Format essentials: `#` lines are comments, header directives start with
//! `@` and are case-insensitive, `@data` opens the data section. One
//! instance per line, channels separated by `:`, samples comma-separated,
//! the class label is the last `:`-token. Only equal-length, labelled,
//! non-timestamped series are supported.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDataset {
    pub name: String,
    pub class_names: Vec<String>,
    n_features: usize,
    series_length: usize,
    /// sample values, row-major [instance][feature][time]
    values: Vec<f64>,
    labels: Vec<usize>,
}

impl TimeSeriesDataset {
    /// Assemble a dataset from raw parts, checking every invariant.
    pub fn new(
        name: String,
        class_names: Vec<String>,
        n_features: usize,
        series_length: usize,
        values: Vec<f64>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if n_features == 0 || series_length == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs at least one feature and one sample".into(),
            ));
        }
        if labels.is_empty() {
            return Err(Error::InvalidArgument("dataset has no instances".into()));
        }
        if values.len() != labels.len() * n_features * series_length {
            return Err(Error::InvalidArgument(format!(
                "value buffer holds {} samples, expected {}",
                values.len(),
                labels.len() * n_features * series_length
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample {bad}")));
        }
        if labels.iter().any(|&l| l >= class_names.len()) {
            return Err(Error::InvalidArgument("label id out of class range".into()));
        }
        Ok(TimeSeriesDataset {
            name,
            class_names,
            n_features,
            series_length,
            values,
            labels,
        })
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, instance: usize) -> usize {
        self.labels[instance]
    }

    /// One channel of one instance.
    pub fn channel(&self, instance: usize, feature: usize) -> &[f64] {
        let start = (instance * self.n_features + feature) * self.series_length;
        &self.values[start..start + self.series_length]
    }

    /// Channel slices of one instance for the given feature subset, in
    /// subset order.
    pub fn channels(&self, instance: usize, subset: &[usize]) -> Vec<&[f64]> {
        subset.iter().map(|&f| self.channel(instance, f)).collect()
    }

    /// Count of instances per class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_names.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Per-channel z-normalization (each instance channel separately).
    /// Channels with zero variance are centred to zero.
    pub fn z_normalized(&self) -> TimeSeriesDataset {
        let mut out = self.clone();
        let len = self.series_length as f64;
        for chunk in out.values.chunks_mut(self.series_length) {
            let mean = chunk.iter().sum::<f64>() / len;
            let var = chunk.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len;
            let sd = var.sqrt();
            for v in chunk.iter_mut() {
                *v -= mean;
                if sd > 1e-12 {
                    *v /= sd;
                }
            }
        }
        out
    }
}

#[derive(Default)]
struct Header {
    problem_name: Option<String>,
    dimensions: Option<usize>,
    univariate: Option<bool>,
    equal_length: Option<bool>,
    series_length: Option<usize>,
    class_names: Option<Vec<String>>,
}

fn parse_bool(line_no: usize, directive: &str, value: Option<&str>) -> Result<bool> {
    match value.map(|v| v.to_ascii_lowercase()).as_deref() {
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        _ => Err(Error::TsParse {
            line: line_no,
            msg: format!("{directive} expects true or false"),
        }),
    }
}

fn parse_count(line_no: usize, directive: &str, value: Option<&str>) -> Result<usize> {
    value
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::TsParse {
            line: line_no,
            msg: format!("{directive} expects a positive integer"),
        })
}

fn apply_directive(h: &mut Header, line_no: usize, line: &str) -> Result<()> {
    let mut tokens = line.split_whitespace();
    let directive = tokens.next().unwrap_or("").to_ascii_lowercase();
    let first = tokens.next();
    match directive.as_str() {
        "@problemname" => {
            let mut name = first.unwrap_or("").to_string();
            for t in tokens {
                name.push(' ');
                name.push_str(t);
            }
            if name.is_empty() {
                return Err(Error::TsParse {
                    line: line_no,
                    msg: "@problemName expects a name".into(),
                });
            }
            h.problem_name = Some(name);
        }
        "@dimensions" => h.dimensions = Some(parse_count(line_no, "@dimensions", first)?),
        "@univariate" => h.univariate = Some(parse_bool(line_no, "@univariate", first)?),
        "@equallength" => h.equal_length = Some(parse_bool(line_no, "@equalLength", first)?),
        "@serieslength" => h.series_length = Some(parse_count(line_no, "@seriesLength", first)?),
        "@classlabel" => {
            let has_labels = parse_bool(line_no, "@classLabel", first)?;
            if !has_labels {
                return Err(Error::TsParse {
                    line: line_no,
                    msg: "unlabelled datasets are not supported (@classLabel false)".into(),
                });
            }
            let names: Vec<String> = tokens.map(str::to_string).collect();
            if names.is_empty() {
                return Err(Error::TsParse {
                    line: line_no,
                    msg: "@classLabel true requires the label list".into(),
                });
            }
            h.class_names = Some(names);
        }
        "@timestamps" => {
            if parse_bool(line_no, "@timeStamps", first)? {
                return Err(Error::TsParse {
                    line: line_no,
                    msg: "timestamped series are not supported".into(),
                });
            }
        }
        // value irrelevant: series samples must parse as finite numbers
        // either way, so a missing-value marker would fail downstream
        "@missing" => {
            parse_bool(line_no, "@missing", first)?;
        }
        _ => {
            return Err(Error::TsParse {
                line: line_no,
                msg: format!("malformed header directive '{directive}'"),
            });
        }
    }
    Ok(())
}

/// Parse a `.ts` document into a dataset.
pub fn parse_ts(text: &str) -> Result<TimeSeriesDataset> {
    let mut header = Header::default();
    let mut in_data = false;

    let mut n_features = 0usize;
    let mut series_length = 0usize;
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_data {
            if line.eq_ignore_ascii_case("@data") {
                if header.equal_length == Some(false) {
                    return Err(Error::TsParse {
                        line: line_no,
                        msg: "variable-length series are not supported (@equalLength false)"
                            .into(),
                    });
                }
                let class_names = header.class_names.as_ref().ok_or(Error::TsParse {
                    line: line_no,
                    msg: "missing @classLabel before @data".into(),
                })?;
                if let (Some(true), Some(d)) = (header.univariate, header.dimensions) {
                    if d != 1 {
                        return Err(Error::TsParse {
                            line: line_no,
                            msg: format!("@univariate true contradicts @dimensions {d}"),
                        });
                    }
                }
                let mut seen = HashSet::new();
                if let Some(dup) = class_names.iter().find(|n| !seen.insert(n.as_str())) {
                    return Err(Error::TsParse {
                        line: line_no,
                        msg: format!("duplicate class label '{dup}'"),
                    });
                }
                in_data = true;
            } else if line.starts_with('@') {
                apply_directive(&mut header, line_no, line)?;
            } else {
                return Err(Error::TsParse {
                    line: line_no,
                    msg: "data line before @data".into(),
                });
            }
            continue;
        }

        // data line: channel:channel:...:label
        let class_names = header.class_names.as_ref().unwrap();
        let mut parts: Vec<&str> = line.split(':').collect();
        if parts.len() < 2 {
            return Err(Error::TsParse {
                line: line_no,
                msg: "expected at least one channel and a class label".into(),
            });
        }
        let label_token = parts.pop().unwrap().trim();
        let label = class_names
            .iter()
            .position(|n| n == label_token)
            .ok_or_else(|| Error::TsParse {
                line: line_no,
                msg: format!("unknown class label '{label_token}'"),
            })?;

        if labels.is_empty() {
            n_features = parts.len();
            if let Some(d) = header.dimensions {
                if d != n_features {
                    return Err(Error::TsParse {
                        line: line_no,
                        msg: format!("line has {n_features} channels, @dimensions says {d}"),
                    });
                }
            }
            if header.univariate == Some(true) && n_features != 1 {
                return Err(Error::TsParse {
                    line: line_no,
                    msg: format!("@univariate true but line has {n_features} channels"),
                });
            }
        } else if parts.len() != n_features {
            return Err(Error::TsParse {
                line: line_no,
                msg: format!("line has {} channels, expected {n_features}", parts.len()),
            });
        }

        for channel in &parts {
            let before = values.len();
            for tok in channel.split(',') {
                let v: f64 = tok.trim().parse().map_err(|_| Error::TsParse {
                    line: line_no,
                    msg: format!("non-numeric sample '{}'", tok.trim()),
                })?;
                if !v.is_finite() {
                    return Err(Error::TsParse {
                        line: line_no,
                        msg: format!("non-finite sample '{}'", tok.trim()),
                    });
                }
                values.push(v);
            }
            let got = values.len() - before;
            if labels.is_empty() && series_length == 0 {
                series_length = match header.series_length {
                    Some(l) if l != got => {
                        return Err(Error::TsParse {
                            line: line_no,
                            msg: format!("ragged channel: {got} samples, @seriesLength says {l}"),
                        });
                    }
                    _ => got,
                };
            }
            if got != series_length {
                return Err(Error::TsParse {
                    line: line_no,
                    msg: format!("ragged channel: {got} samples, expected {series_length}"),
                });
            }
        }
        labels.push(label);
    }

    if !in_data {
        return Err(Error::TsParse {
            line: text.lines().count(),
            msg: "missing @data section".into(),
        });
    }
    if labels.is_empty() {
        return Err(Error::TsParse {
            line: text.lines().count(),
            msg: "empty data section".into(),
        });
    }

    TimeSeriesDataset::new(
        header.problem_name.unwrap_or_default(),
        header.class_names.unwrap(),
        n_features,
        series_length,
        values,
        labels,
    )
}

/// Render a dataset back to `.ts` text. `parse_ts` of the output yields an
/// equal dataset; floats are printed with Rust's shortest round-trip form.
pub fn serialize_ts(ds: &TimeSeriesDataset) -> String {
    let mut out = String::new();
    out.push_str(&format!("@problemName {}\n", ds.name));
    out.push_str("@timeStamps false\n");
    out.push_str(&format!("@univariate {}\n", ds.n_features == 1));
    out.push_str(&format!("@dimensions {}\n", ds.n_features));
    out.push_str("@equalLength true\n");
    out.push_str(&format!("@seriesLength {}\n", ds.series_length));
    out.push_str(&format!("@classLabel true {}\n", ds.class_names.join(" ")));
    out.push_str("@data\n");
    for i in 0..ds.n_instances() {
        for f in 0..ds.n_features {
            let samples: Vec<String> = ds.channel(i, f).iter().map(|v| format!("{v}")).collect();
            out.push_str(&samples.join(","));
            out.push(':');
        }
        out.push_str(&ds.class_names[ds.label(i)]);
        out.push('\n');
    }
    out
}

/// Parse a train/test pair and require matching schemas (same features,
/// series length, and class list in the same order).
pub fn load_split(
    train_text: &str,
    test_text: &str,
) -> Result<(TimeSeriesDataset, TimeSeriesDataset)> {
    let train = parse_ts(train_text)?;
    let test = parse_ts(test_text)?;
    check_schema(&train, &test)?;
    Ok((train, test))
}

/// Schema compatibility check shared by split loading and cross-set
/// distance computation.
pub fn check_schema(a: &TimeSeriesDataset, b: &TimeSeriesDataset) -> Result<()> {
    if a.n_features != b.n_features {
        return Err(Error::SchemaMismatch(format!(
            "{} vs {} features",
            a.n_features, b.n_features
        )));
    }
    if a.series_length != b.series_length {
        return Err(Error::SchemaMismatch(format!(
            "series length {} vs {}",
            a.series_length, b.series_length
        )));
    }
    if a.class_names != b.class_names {
        return Err(Error::SchemaMismatch("class lists differ".into()));
    }
    Ok(())
}

/// Keep round(fraction × class size) instances of every class (at least
/// one), chosen by seeded per-class shuffle; surviving instances stay in
/// their original relative order.
pub fn stratified_subsample(
    ds: &TimeSeriesDataset,
    fraction: f64,
    seed: u64,
) -> Result<TimeSeriesDataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} outside (0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; ds.n_instances()];
    for class in 0..ds.class_names.len() {
        let mut members: Vec<usize> = (0..ds.n_instances())
            .filter(|&i| ds.label(i) == class)
            .collect();
        if members.is_empty() {
            continue;
        }
        let take = ((fraction * members.len() as f64).round() as usize).max(1);
        members.shuffle(&mut rng);
        for &i in &members[..take] {
            keep[i] = true;
        }
    }
    let kept: Vec<usize> = (0..ds.n_instances()).filter(|&i| keep[i]).collect();
    let mut values = Vec::with_capacity(kept.len() * ds.n_features * ds.series_length);
    let mut labels = Vec::with_capacity(kept.len());
    for &i in &kept {
        for f in 0..ds.n_features {
            values.extend_from_slice(ds.channel(i, f));
        }
        labels.push(ds.label(i));
    }
    TimeSeriesDataset::new(
        ds.name.clone(),
        ds.class_names.clone(),
        ds.n_features,
        ds.series_length,
        values,
        labels,
    )
}

/// Restrict a dataset to the given channels, reordered to subset order.
pub fn project_features(ds: &TimeSeriesDataset, subset: &[usize]) -> Result<TimeSeriesDataset> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty feature subset".into()));
    }
    let mut seen = HashSet::new();
    for &f in subset {
        if f >= ds.n_features {
            return Err(Error::InvalidArgument(format!(
                "feature index {f} out of range (dataset has {})",
                ds.n_features
            )));
        }
        if !seen.insert(f) {
            return Err(Error::InvalidArgument(format!("duplicate feature index {f}")));
        }
    }
    let mut values = Vec::with_capacity(ds.n_instances() * subset.len() * ds.series_length);
    for i in 0..ds.n_instances() {
        for &f in subset {
            values.extend_from_slice(ds.channel(i, f));
        }
    }
    TimeSeriesDataset::new(
        ds.name.clone(),
        ds.class_names.clone(),
        subset.len(),
        ds.series_length,
        values,
        ds.labels.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "\
#comment line
@problemName toy
@timeStamps false
@dimensions 2
@equalLength true
@seriesLength 3
@classLabel true a b
@data
1,2,3:4,5,6:a
7,8,9:1,1,1:b
0,0,0:2,2,2:a
";

    #[test]
    fn parses_toy_file() {
        let ds = parse_ts(TOY).unwrap();
        assert_eq!(ds.name, "toy");
        assert_eq!(ds.n_instances(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.series_length(), 3);
        assert_eq!(ds.class_names, vec!["a", "b"]);
        assert_eq!(ds.channel(0, 0), &[1.0, 2.0, 3.0]);
        assert_eq!(ds.channel(0, 1), &[4.0, 5.0, 6.0]);
        assert_eq!(ds.labels(), &[0, 1, 0]);
    }

    #[test]
    fn directives_are_case_insensitive() {
        let text = TOY.replace("@problemName", "@PROBLEMNAME").replace("@data", "@DATA");
        assert!(parse_ts(&text).is_ok());
    }

    #[test]
    fn ragged_channel_is_rejected() {
        let text = TOY.replace("7,8,9:1,1,1:b", "7,8:1,1,1:b");
        let err = parse_ts(&text).unwrap_err();
        assert!(err.to_string().contains("ragged"), "{err}");
    }

    #[test]
    fn channel_count_mismatch_is_rejected() {
        let text = TOY.replace("7,8,9:1,1,1:b", "7,8,9:b");
        assert!(parse_ts(&text).is_err());
    }

    #[test]
    fn unknown_class_label_is_rejected() {
        let text = TOY.replace("0,0,0:2,2,2:a", "0,0,0:2,2,2:c");
        let err = parse_ts(&text).unwrap_err();
        assert!(err.to_string().contains("unknown class label"), "{err}");
    }

    #[test]
    fn non_numeric_sample_is_rejected() {
        let text = TOY.replace("7,8,9", "7,oops,9");
        let err = parse_ts(&text).unwrap_err();
        assert!(err.to_string().contains("non-numeric"), "{err}");
    }

    #[test]
    fn nan_sample_is_rejected() {
        let text = TOY.replace("7,8,9", "7,NaN,9");
        assert!(parse_ts(&text).is_err());
    }

    #[test]
    fn empty_data_section_is_rejected() {
        let text: String = TOY.lines().take_while(|l| !l.starts_with('1')).fold(
            String::new(),
            |mut acc, l| {
                acc.push_str(l);
                acc.push('\n');
                acc
            },
        );
        let err = parse_ts(&text).unwrap_err();
        assert!(err.to_string().contains("empty data"), "{err}");
    }

    #[test]
    fn variable_length_is_rejected() {
        let text = TOY.replace("@equalLength true", "@equalLength false");
        let err = parse_ts(&text).unwrap_err();
        assert!(err.to_string().contains("variable-length"), "{err}");
    }

    #[test]
    fn timestamps_are_rejected() {
        let text = TOY.replace("@timeStamps false", "@timeStamps true");
        assert!(parse_ts(&text).is_err());
    }

    #[test]
    fn missing_data_directive_is_rejected() {
        let text = TOY.replace("@data\n", "");
        let res = parse_ts(&text);
        assert!(res.is_err());
    }

    #[test]
    fn crlf_input_parses() {
        let text = TOY.replace('\n', "\r\n");
        assert_eq!(parse_ts(&text).unwrap(), parse_ts(TOY).unwrap());
    }

    #[test]
    fn round_trip_preserves_dataset() {
        let ds = parse_ts(TOY).unwrap();
        let again = parse_ts(&serialize_ts(&ds)).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn load_split_accepts_self_pair() {
        let (train, test) = load_split(TOY, TOY).unwrap();
        assert_eq!(train, test);
    }

    #[test]
    fn load_split_rejects_dimension_mismatch() {
        let other = "\
@problemName toy
@dimensions 1
@equalLength true
@seriesLength 3
@classLabel true a b
@data
1,2,3:a
";
        let err = load_split(TOY, other).unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch(_)), "{err}");
    }

    #[test]
    fn subsample_full_fraction_is_identity() {
        let ds = parse_ts(TOY).unwrap();
        let sub = stratified_subsample(&ds, 1.0, 42).unwrap();
        assert_eq!(ds, sub);
    }

    #[test]
    fn subsample_counts_and_determinism() {
        // 10 instances, 5 per class, fraction 0.6 -> 3 per class
        let mut text = String::from(
            "@problemName t\n@dimensions 1\n@equalLength true\n@seriesLength 2\n@classLabel true a b\n@data\n",
        );
        for i in 0..10 {
            let label = if i % 2 == 0 { "a" } else { "b" };
            text.push_str(&format!("{i},{i}:{label}\n"));
        }
        let ds = parse_ts(&text).unwrap();
        let s1 = stratified_subsample(&ds, 0.6, 7).unwrap();
        let s2 = stratified_subsample(&ds, 0.6, 7).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.n_instances(), 6);
        let counts = s1.class_counts();
        assert_eq!(counts, vec![3, 3]);
        // different seed may choose different instances but same counts
        let s3 = stratified_subsample(&ds, 0.6, 8).unwrap();
        assert_eq!(s3.class_counts(), vec![3, 3]);
    }

    #[test]
    fn subsample_keeps_every_class() {
        let ds = parse_ts(TOY).unwrap();
        let sub = stratified_subsample(&ds, 0.01, 3).unwrap();
        // floor of one instance per class
        assert_eq!(sub.class_counts(), vec![1, 1]);
    }

    #[test]
    fn subsample_rejects_bad_fraction() {
        let ds = parse_ts(TOY).unwrap();
        assert!(stratified_subsample(&ds, 0.0, 0).is_err());
        assert!(stratified_subsample(&ds, 1.5, 0).is_err());
    }

    #[test]
    fn project_identity_and_reorder() {
        let ds = parse_ts(TOY).unwrap();
        assert_eq!(project_features(&ds, &[0, 1]).unwrap(), ds);
        let swapped = project_features(&ds, &[1, 0]).unwrap();
        assert_eq!(swapped.channel(0, 0), ds.channel(0, 1));
        assert_eq!(swapped.channel(0, 1), ds.channel(0, 0));
    }

    #[test]
    fn project_rejects_bad_subsets() {
        let ds = parse_ts(TOY).unwrap();
        assert!(project_features(&ds, &[]).is_err());
        assert!(project_features(&ds, &[0, 0]).is_err());
        assert!(project_features(&ds, &[7]).is_err());
    }

    #[test]
    fn project_composition() {
        let ds = parse_ts(TOY).unwrap();
        let s1 = project_features(&ds, &[1, 0]).unwrap();
        // relative index of original channel 0 inside [1,0] is 1
        let composed = project_features(&s1, &[1]).unwrap();
        let direct = project_features(&ds, &[0]).unwrap();
        assert_eq!(composed, direct);
    }

    #[test]
    fn z_normalize_centres_and_scales() {
        let ds = parse_ts(TOY).unwrap();
        let z = ds.z_normalized();
        for i in 0..z.n_instances() {
            for f in 0..z.n_features() {
                let ch = z.channel(i, f);
                let mean: f64 = ch.iter().sum::<f64>() / ch.len() as f64;
                assert!(mean.abs() < 1e-12);
                let var: f64 = ch.iter().map(|v| v * v).sum::<f64>() / ch.len() as f64;
                // constant channels collapse to zero, others to unit variance
                assert!(var.abs() < 1e-12 || (var - 1.0).abs() < 1e-12);
            }
        }
    }
}
