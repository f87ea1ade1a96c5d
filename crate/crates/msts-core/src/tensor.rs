//! Per-feature pairwise DTW distance matrices with a persistent cache.
//!
//! Cache layout: magic `MSTSDT01`, little-endian u64 fingerprint, u32
//! feature count, u32 instance count, then feature-major f64 payload.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dataset::{check_schema, TimeSeriesDataset};
use crate::dtw::{dtw_univariate, WarpingParams};
use crate::error::{Error, Result};

const CACHE_MAGIC: &[u8; 8] = b"MSTSDT01";

/// Pairwise train-train DTW costs, one symmetric zero-diagonal matrix per
/// feature, bound to the producing dataset by fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTensor {
    pub n_features: usize,
    pub n_instances: usize,
    pub fingerprint: u64,
    /// row-major [feature][i][j]
    distances: Vec<f64>,
}

impl DistanceTensor {
    /// One feature's full n×n matrix.
    pub fn slice(&self, feature: usize) -> &[f64] {
        let n2 = self.n_instances * self.n_instances;
        &self.distances[feature * n2..(feature + 1) * n2]
    }

    pub fn get(&self, feature: usize, i: usize, j: usize) -> f64 {
        self.slice(feature)[i * self.n_instances + j]
    }
}

/// 64-bit FNV-1a over dataset shape, values, labels, and warping params.
pub fn dataset_fingerprint(ds: &TimeSeriesDataset, params: WarpingParams) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(PRIME);
        }
    };
    eat(&(ds.n_instances() as u64).to_le_bytes());
    eat(&(ds.n_features() as u64).to_le_bytes());
    eat(&(ds.series_length() as u64).to_le_bytes());
    for i in 0..ds.n_instances() {
        for f in 0..ds.n_features() {
            for v in ds.channel(i, f) {
                eat(&v.to_le_bytes());
            }
        }
    }
    for &l in ds.labels() {
        eat(&(l as u64).to_le_bytes());
    }
    match params.window {
        None => eat(&[0xff]),
        Some(w) => {
            eat(&[0x01]);
            eat(&(w as u64).to_le_bytes());
        }
    }
    hash
}

fn check_params(ds: &TimeSeriesDataset, params: WarpingParams) -> Result<()> {
    if let Some(w) = params.window {
        if w >= ds.series_length() {
            return Err(Error::InvalidArgument(format!(
                "window {w} must be smaller than series length {}",
                ds.series_length()
            )));
        }
    }
    Ok(())
}

/// The upper-triangle work items, one per (feature, i) with j > i.
fn row_costs(ds: &TimeSeriesDataset, params: WarpingParams, f: usize, i: usize) -> Vec<f64> {
    let a = ds.channel(i, f);
    (i + 1..ds.n_instances())
        .map(|j| {
            dtw_univariate(a, ds.channel(j, f), params)
                .expect("non-empty equal-length channels cannot fail")
        })
        .collect()
}

fn assemble(ds: &TimeSeriesDataset, params: WarpingParams, rows: Vec<Vec<f64>>) -> DistanceTensor {
    let n = ds.n_instances();
    let nf = ds.n_features();
    let mut distances = vec![0.0; nf * n * n];
    let mut it = rows.into_iter();
    for f in 0..nf {
        let base = f * n * n;
        for i in 0..n {
            for (offset, d) in it.next().unwrap().into_iter().enumerate() {
                let j = i + 1 + offset;
                distances[base + i * n + j] = d;
                distances[base + j * n + i] = d;
            }
        }
    }
    DistanceTensor {
        n_features: nf,
        n_instances: n,
        fingerprint: dataset_fingerprint(ds, params),
        distances,
    }
}

/// Pairwise DTW matrices for every feature. Parallel over rows when the
/// `parallel` feature is enabled; output is identical either way.
pub fn compute_distance_tensor(
    ds: &TimeSeriesDataset,
    params: WarpingParams,
) -> Result<DistanceTensor> {
    check_params(ds, params)?;
    #[cfg(feature = "parallel")]
    {
        let work: Vec<(usize, usize)> = (0..ds.n_features())
            .flat_map(|f| (0..ds.n_instances()).map(move |i| (f, i)))
            .collect();
        let rows: Vec<Vec<f64>> = work
            .into_par_iter()
            .map(|(f, i)| row_costs(ds, params, f, i))
            .collect();
        Ok(assemble(ds, params, rows))
    }
    #[cfg(not(feature = "parallel"))]
    {
        compute_distance_tensor_serial(ds, params)
    }
}

/// Sequential fallback of `compute_distance_tensor`.
pub fn compute_distance_tensor_serial(
    ds: &TimeSeriesDataset,
    params: WarpingParams,
) -> Result<DistanceTensor> {
    check_params(ds, params)?;
    let mut rows = Vec::with_capacity(ds.n_features() * ds.n_instances());
    for f in 0..ds.n_features() {
        for i in 0..ds.n_instances() {
            rows.push(row_costs(ds, params, f, i));
        }
    }
    Ok(assemble(ds, params, rows))
}

/// Σ over the subset of per-feature costs between instances i and j.
pub fn subset_distance(t: &DistanceTensor, subset: &[usize], i: usize, j: usize) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty feature subset".into()));
    }
    if i >= t.n_instances || j >= t.n_instances {
        return Err(Error::InvalidArgument(format!(
            "instance index out of range ({i}, {j}) for {}",
            t.n_instances
        )));
    }
    let mut total = 0.0;
    for &f in subset {
        if f >= t.n_features {
            return Err(Error::InvalidArgument(format!(
                "feature index {f} out of range (tensor has {})",
                t.n_features
            )));
        }
        total += t.get(f, i, j);
    }
    Ok(total)
}

fn cross_row(
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    subset: &[usize],
    params: WarpingParams,
    i: usize,
) -> Vec<f64> {
    (0..train.n_instances())
        .map(|j| {
            subset
                .iter()
                .map(|&f| {
                    dtw_univariate(test.channel(i, f), train.channel(j, f), params)
                        .expect("non-empty equal-length channels cannot fail")
                })
                .sum()
        })
        .collect()
}

fn check_subset(n_features: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty feature subset".into()));
    }
    if let Some(&f) = subset.iter().find(|&&f| f >= n_features) {
        return Err(Error::InvalidArgument(format!(
            "feature index {f} out of range (dataset has {n_features})"
        )));
    }
    Ok(())
}

/// Test-to-train summed per-feature DTW costs, rows indexed by test
/// instance. Same subset semantics as `subset_distance`.
pub fn cross_distance(
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    subset: &[usize],
    params: WarpingParams,
) -> Result<Vec<Vec<f64>>> {
    check_schema(train, test)?;
    check_subset(train.n_features(), subset)?;
    check_params(train, params)?;
    #[cfg(feature = "parallel")]
    {
        Ok((0..test.n_instances())
            .into_par_iter()
            .map(|i| cross_row(train, test, subset, params, i))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        cross_distance_serial(train, test, subset, params)
    }
}

/// Sequential fallback of `cross_distance`.
pub fn cross_distance_serial(
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    subset: &[usize],
    params: WarpingParams,
) -> Result<Vec<Vec<f64>>> {
    check_schema(train, test)?;
    check_subset(train.n_features(), subset)?;
    check_params(train, params)?;
    Ok((0..test.n_instances())
        .map(|i| cross_row(train, test, subset, params, i))
        .collect())
}

/// Write the tensor cache, via a temp file in the same directory so a
/// crash never leaves a half-written cache behind.
pub fn save_tensor(t: &DistanceTensor, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let tmp_path = path.with_extension("tmp");
    {
        let file = fs::File::create(&tmp_path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        let write = |w: &mut BufWriter<fs::File>, bytes: &[u8]| w.write_all(bytes).map_err(io_err);
        write(&mut w, CACHE_MAGIC)?;
        write(&mut w, &t.fingerprint.to_le_bytes())?;
        write(&mut w, &(t.n_features as u32).to_le_bytes())?;
        write(&mut w, &(t.n_instances as u32).to_le_bytes())?;
        for v in &t.distances {
            write(&mut w, &v.to_le_bytes())?;
        }
        w.flush().map_err(io_err)?;
    }
    fs::rename(&tmp_path, path).map_err(io_err)
}

/// Read a tensor cache and verify it matches the expected fingerprint
/// (compute it from the current dataset and params first).
pub fn load_tensor(path: &Path, expected_fingerprint: u64) -> Result<DistanceTensor> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut r = BufReader::new(file);

    let mut read_exact = |buf: &mut [u8]| -> Result<()> {
        r.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::CacheFormat(format!("truncated cache {}", path.display()))
            } else {
                Error::Io {
                    path: path.to_path_buf(),
                    source: e,
                }
            }
        })
    };

    let mut magic = [0u8; 8];
    read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::CacheFormat(format!(
            "bad magic in {}",
            path.display()
        )));
    }
    let mut b8 = [0u8; 8];
    read_exact(&mut b8)?;
    let fingerprint = u64::from_le_bytes(b8);
    let mut b4 = [0u8; 4];
    read_exact(&mut b4)?;
    let n_features = u32::from_le_bytes(b4) as usize;
    read_exact(&mut b4)?;
    let n_instances = u32::from_le_bytes(b4) as usize;

    let expected_len = n_features * n_instances * n_instances;
    let mut distances = Vec::with_capacity(expected_len);
    for _ in 0..expected_len {
        read_exact(&mut b8)?;
        distances.push(f64::from_le_bytes(b8));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(io_err)? != 0 {
        return Err(Error::CacheFormat(format!(
            "trailing bytes after payload in {}",
            path.display()
        )));
    }

    if fingerprint != expected_fingerprint {
        return Err(Error::FingerprintMismatch {
            expected: expected_fingerprint,
            found: fingerprint,
        });
    }
    Ok(DistanceTensor {
        n_features,
        n_instances,
        fingerprint,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_ts;

    fn toy() -> TimeSeriesDataset {
        parse_ts(
            "@problemName toy\n@dimensions 2\n@equalLength true\n@seriesLength 3\n\
             @classLabel true a b\n@data\n\
             1,2,3:4,5,6:a\n7,8,9:1,1,1:b\n0,0,0:2,2,2:a\n1,2,3:4,5,6:b\n",
        )
        .unwrap()
    }

    const NOW: WarpingParams = WarpingParams::UNCONSTRAINED;

    #[test]
    fn tensor_is_symmetric_with_zero_diagonal() {
        let ds = toy();
        let t = compute_distance_tensor(&ds, NOW).unwrap();
        assert_eq!(t.n_features, 2);
        assert_eq!(t.n_instances, 4);
        for f in 0..t.n_features {
            for i in 0..t.n_instances {
                assert_eq!(t.get(f, i, i), 0.0);
                for j in 0..t.n_instances {
                    assert_eq!(t.get(f, i, j), t.get(f, j, i));
                    assert!(t.get(f, i, j) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn tensor_entries_match_direct_dtw() {
        let ds = toy();
        let t = compute_distance_tensor(&ds, NOW).unwrap();
        for f in 0..2 {
            for i in 0..4 {
                for j in 0..4 {
                    let d = dtw_univariate(ds.channel(i, f), ds.channel(j, f), NOW).unwrap();
                    assert_eq!(t.get(f, i, j), d);
                }
            }
        }
    }

    #[test]
    fn duplicate_instances_give_zero_rows() {
        let ds = toy();
        let t = compute_distance_tensor(&ds, NOW).unwrap();
        // instances 0 and 3 are identical
        for f in 0..2 {
            assert_eq!(t.get(f, 0, 3), 0.0);
        }
    }

    #[test]
    fn parallel_and_serial_agree_bitwise() {
        let ds = toy();
        let a = compute_distance_tensor(&ds, NOW).unwrap();
        let b = compute_distance_tensor_serial(&ds, NOW).unwrap();
        assert_eq!(a, b);
        let wa = compute_distance_tensor(&ds, WarpingParams::windowed(1)).unwrap();
        let wb = compute_distance_tensor_serial(&ds, WarpingParams::windowed(1)).unwrap();
        assert_eq!(wa, wb);
    }

    #[test]
    fn window_must_fit_series_length() {
        let ds = toy();
        assert!(compute_distance_tensor(&ds, WarpingParams::windowed(3)).is_err());
        assert!(compute_distance_tensor(&ds, WarpingParams::windowed(2)).is_ok());
    }

    #[test]
    fn fingerprint_sensitive_to_values_labels_params() {
        let ds = toy();
        let base = dataset_fingerprint(&ds, NOW);
        assert_eq!(base, dataset_fingerprint(&ds, NOW));
        assert_ne!(base, dataset_fingerprint(&ds, WarpingParams::windowed(1)));
        let mut text = crate::dataset::serialize_ts(&ds);
        text = text.replace("7,8,9", "7,8,10");
        let other = parse_ts(&text).unwrap();
        assert_ne!(base, dataset_fingerprint(&other, NOW));
        let relabeled = parse_ts(&crate::dataset::serialize_ts(&ds).replace("1,1,1:b", "1,1,1:a"))
            .unwrap();
        assert_ne!(base, dataset_fingerprint(&relabeled, NOW));
    }

    #[test]
    fn subset_distance_sums_slices() {
        let ds = toy();
        let t = compute_distance_tensor(&ds, NOW).unwrap();
        let d01 = subset_distance(&t, &[0, 1], 0, 1).unwrap();
        assert_eq!(d01, t.get(0, 0, 1) + t.get(1, 0, 1));
        assert_eq!(subset_distance(&t, &[1], 2, 1).unwrap(), t.get(1, 2, 1));
        assert_eq!(subset_distance(&t, &[0, 1], 2, 2).unwrap(), 0.0);
    }

    #[test]
    fn subset_distance_validates() {
        let ds = toy();
        let t = compute_distance_tensor(&ds, NOW).unwrap();
        assert!(subset_distance(&t, &[], 0, 1).is_err());
        assert!(subset_distance(&t, &[5], 0, 1).is_err());
        assert!(subset_distance(&t, &[0], 9, 1).is_err());
    }

    #[test]
    fn cross_distance_consistent_with_tensor() {
        let ds = toy();
        let t = compute_distance_tensor(&ds, NOW).unwrap();
        let m = cross_distance(&ds, &ds, &[0], NOW).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[i][j], t.get(0, i, j));
            }
        }
        let m2 = cross_distance(&ds, &ds, &[0, 1], NOW).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m2[i][j], subset_distance(&t, &[0, 1], i, j).unwrap());
            }
        }
    }

    #[test]
    fn cross_distance_parallel_serial_agree() {
        let ds = toy();
        let a = cross_distance(&ds, &ds, &[0, 1], NOW).unwrap();
        let b = cross_distance_serial(&ds, &ds, &[0, 1], NOW).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.dtw");
        let ds = toy();
        let t = compute_distance_tensor(&ds, NOW).unwrap();
        save_tensor(&t, &path).unwrap();
        let loaded = load_tensor(&path, t.fingerprint).unwrap();
        assert_eq!(t, loaded);
        // byte-identical on rewrite
        let first = std::fs::read(&path).unwrap();
        save_tensor(&t, &path).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
    }

    #[test]
    fn load_rejects_wrong_fingerprint() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.dtw");
        let ds = toy();
        let t = compute_distance_tensor(&ds, NOW).unwrap();
        save_tensor(&t, &path).unwrap();
        let err = load_tensor(&path, t.fingerprint ^ 1).unwrap_err();
        assert!(matches!(err, Error::FingerprintMismatch { .. }), "{err}");
    }

    #[test]
    fn load_rejects_truncation_and_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.dtw");
        let ds = toy();
        let t = compute_distance_tensor(&ds, NOW).unwrap();
        save_tensor(&t, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        let err = load_tensor(&path, t.fingerprint).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");

        let mut garbled = bytes.clone();
        garbled[0] ^= 0xff;
        std::fs::write(&path, &garbled).unwrap();
        let err = load_tensor(&path, t.fingerprint).unwrap_err();
        assert!(err.to_string().contains("bad magic"), "{err}");
    }
}
