use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::atomic_write;

pub const SIZES_FILE: &str = "sizes.txt";
pub const USER_BUNDLE_FILE: &str = "user_bundle.txt";
pub const USER_ITEM_FILE: &str = "user_item.txt";
pub const BUNDLE_ITEM_FILE: &str = "bundle_item.txt";

/// Where a dataset came from, with SHA-256 of each input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub dir: PathBuf,
    pub checksums: Vec<(String, String)>,
}

/// Users, bundles and items with three deduplicated pair lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub num_users: usize,
    pub num_bundles: usize,
    pub num_items: usize,
    pub user_bundle: Vec<(u32, u32)>,
    pub user_item: Vec<(u32, u32)>,
    pub bundle_item: Vec<(u32, u32)>,
    pub provenance: Option<Provenance>,
    /// Duplicate lines dropped during loading.
    pub duplicates: usize,
}

/// The dataset summary columns `#U #I #B #U-I #U-B AvgI/B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub users: usize,
    pub items: usize,
    pub bundles: usize,
    pub user_item: usize,
    pub user_bundle: usize,
    pub avg_items_per_bundle: f64,
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#U={} #I={} #B={} #U-I={} #U-B={} AvgI/B={:.2}",
            self.users,
            self.items,
            self.bundles,
            self.user_item,
            self.user_bundle,
            self.avg_items_per_bundle
        )
    }
}

fn sort_dedup(pairs: &mut Vec<(u32, u32)>) -> usize {
    let before = pairs.len();
    pairs.sort_unstable();
    pairs.dedup();
    before - pairs.len()
}

impl Dataset {
    /// Builds a dataset from in-memory pairs, validating ids and deduplicating.
    pub fn new(
        num_users: usize,
        num_bundles: usize,
        num_items: usize,
        mut user_bundle: Vec<(u32, u32)>,
        mut user_item: Vec<(u32, u32)>,
        mut bundle_item: Vec<(u32, u32)>,
    ) -> Result<Self> {
        let duplicates = sort_dedup(&mut user_bundle)
            + sort_dedup(&mut user_item)
            + sort_dedup(&mut bundle_item);
        let ds = Self {
            num_users,
            num_bundles,
            num_items,
            user_bundle,
            user_item,
            bundle_item,
            provenance: None,
            duplicates,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |pairs: &[(u32, u32)], file: &str, rows: usize, cols: usize| -> Result<()> {
            for (k, &(a, b)) in pairs.iter().enumerate() {
                if a as usize >= rows || b as usize >= cols {
                    return Err(Error::Load {
                        path: file.into(),
                        line: k + 1,
                        msg: format!("pair ({a}, {b}) outside {rows}x{cols}"),
                    });
                }
            }
            Ok(())
        };
        check(
            &self.user_bundle,
            USER_BUNDLE_FILE,
            self.num_users,
            self.num_bundles,
        )?;
        check(
            &self.user_item,
            USER_ITEM_FILE,
            self.num_users,
            self.num_items,
        )?;
        check(
            &self.bundle_item,
            BUNDLE_ITEM_FILE,
            self.num_bundles,
            self.num_items,
        )?;
        let mut has_items = vec![false; self.num_bundles];
        for &(b, _) in &self.bundle_item {
            has_items[b as usize] = true;
        }
        if let Some(b) = has_items.iter().position(|&h| !h) {
            return Err(Error::Load {
                path: BUNDLE_ITEM_FILE.into(),
                line: 0,
                msg: format!("bundle {b} has no items"),
            });
        }
        Ok(())
    }

    pub fn stats(&self) -> DatasetStats {
        DatasetStats {
            users: self.num_users,
            items: self.num_items,
            bundles: self.num_bundles,
            user_item: self.user_item.len(),
            user_bundle: self.user_bundle.len(),
            avg_items_per_bundle: if self.num_bundles == 0 {
                0.0
            } else {
                self.bundle_item.len() as f64 / self.num_bundles as f64
            },
        }
    }
}

fn read_text(path: &Path) -> Result<(String, String)> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Error::Load {
        path: path.to_path_buf(),
        line: 0,
        msg: "not valid UTF-8".into(),
    })?;
    Ok((text, digest))
}

fn parse_pairs(path: &Path, text: &str, rows: usize, cols: usize) -> Result<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Load {
            path: path.to_path_buf(),
            line: line_no,
            msg,
        };
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(format!("expected two integers, got {line:?}")));
        };
        let a: u32 = a.parse().map_err(|_| err(format!("bad integer {a:?}")))?;
        let b: u32 = b.parse().map_err(|_| err(format!("bad integer {b:?}")))?;
        if a as usize >= rows {
            return Err(err(format!("id {a} >= declared count {rows}")));
        }
        if b as usize >= cols {
            return Err(err(format!("id {b} >= declared count {cols}")));
        }
        out.push((a, b));
    }
    Ok(out)
}

/// Reads `sizes.txt` (`M N O`) and the three tab-separated pair files.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let sizes_path = dir.join(SIZES_FILE);
    let (sizes, sizes_sum) = read_text(&sizes_path)?;
    let counts: Vec<usize> = sizes
        .split_whitespace()
        .map(|s| s.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Load {
            path: sizes_path.clone(),
            line: 1,
            msg: format!("expected \"M N O\", got {:?}", sizes.trim()),
        })?;
    let [m, n, o] = counts[..] else {
        return Err(Error::Load {
            path: sizes_path,
            line: 1,
            msg: format!("expected three counts, got {}", counts.len()),
        });
    };
    let mut checksums = vec![(SIZES_FILE.to_string(), sizes_sum)];
    let mut load = |name: &str, rows, cols| -> Result<Vec<(u32, u32)>> {
        let path = dir.join(name);
        let (text, sum) = read_text(&path)?;
        checksums.push((name.to_string(), sum));
        parse_pairs(&path, &text, rows, cols)
    };
    let ub = load(USER_BUNDLE_FILE, m, n)?;
    let ui = load(USER_ITEM_FILE, m, o)?;
    let bi = load(BUNDLE_ITEM_FILE, n, o)?;
    let mut ds = Dataset::new(m, n, o, ub, ui, bi).map_err(|e| match e {
        Error::Load { path, line, msg } => Error::Load {
            path: dir.join(path),
            line,
            msg,
        },
        other => other,
    })?;
    if ds.duplicates > 0 {
        warn!(
            "{}: dropped {} duplicate pairs",
            dir.display(),
            ds.duplicates
        );
    }
    ds.provenance = Some(Provenance {
        dir: dir.to_path_buf(),
        checksums,
    });
    Ok(ds)
}

fn pairs_text(pairs: &[(u32, u32)]) -> String {
    let mut s = String::with_capacity(pairs.len() * 12);
    for (a, b) in pairs {
        s.push_str(&format!("{a}\t{b}\n"));
    }
    s
}

/// Writes the four dataset files into `dir`, creating it if needed.
pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    atomic_write(
        &dir.join(SIZES_FILE),
        format!("{} {} {}\n", ds.num_users, ds.num_bundles, ds.num_items).as_bytes(),
    )?;
    atomic_write(
        &dir.join(USER_BUNDLE_FILE),
        pairs_text(&ds.user_bundle).as_bytes(),
    )?;
    atomic_write(
        &dir.join(USER_ITEM_FILE),
        pairs_text(&ds.user_item).as_bytes(),
    )?;
    atomic_write(
        &dir.join(BUNDLE_ITEM_FILE),
        pairs_text(&ds.bundle_item).as_bytes(),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) {
        fs::write(dir.join(name), text).unwrap();
    }

    fn fixture(dir: &Path) {
        write(dir, SIZES_FILE, "2 2 3\n");
        write(dir, USER_BUNDLE_FILE, "0\t0\n1\t1\n0\t0\n");
        write(dir, USER_ITEM_FILE, "0\t0\n1\t2\n");
        write(dir, BUNDLE_ITEM_FILE, "0\t0\n0\t1\n1\t1\n1\t2\n");
    }

    #[test]
    fn loads_and_dedups() {
        let tmp = tempfile::tempdir().unwrap();
        fixture(tmp.path());
        let ds = load_dataset(tmp.path()).unwrap();
        assert_eq!(ds.user_bundle, vec![(0, 0), (1, 1)]);
        assert_eq!(ds.duplicates, 1);
        assert_eq!(
            ds.stats().to_string(),
            "#U=2 #I=3 #B=2 #U-I=2 #U-B=2 AvgI/B=2.00"
        );
        assert_eq!(ds.provenance.as_ref().unwrap().checksums.len(), 4);
    }

    #[test]
    fn errors_name_file_and_line() {
        let tmp = tempfile::tempdir().unwrap();
        fixture(tmp.path());
        write(tmp.path(), USER_ITEM_FILE, "0\t0\n1\t3\n");
        let err = load_dataset(tmp.path()).unwrap_err().to_string();
        assert!(err.contains("user_item.txt:2"), "{err}");

        write(tmp.path(), USER_ITEM_FILE, "0\t0\nfoo bar\n");
        let err = load_dataset(tmp.path()).unwrap_err().to_string();
        assert!(err.contains("user_item.txt:2"), "{err}");

        write(tmp.path(), USER_ITEM_FILE, "0\t0\t1\n");
        assert!(load_dataset(tmp.path()).is_err());

        write(tmp.path(), USER_ITEM_FILE, "0\t0\n");
        write(tmp.path(), BUNDLE_ITEM_FILE, "0\t0\n");
        let err = load_dataset(tmp.path()).unwrap_err().to_string();
        assert!(err.contains("bundle 1 has no items"), "{err}");

        fs::remove_file(tmp.path().join(USER_BUNDLE_FILE)).unwrap();
        assert!(load_dataset(tmp.path()).is_err());
    }

    #[test]
    fn save_load_roundtrip() {
        let tmp = tempfile::tempdir().unwrap();
        fixture(tmp.path());
        let ds = load_dataset(tmp.path()).unwrap();
        let out = tmp.path().join("copy");
        save_dataset(&ds, &out).unwrap();
        let back = load_dataset(&out).unwrap();
        assert_eq!(back.user_bundle, ds.user_bundle);
        assert_eq!(back.user_item, ds.user_item);
        assert_eq!(back.bundle_item, ds.bundle_item);
        assert_eq!(back.duplicates, 0);
    }
}
