//! Plain-text allowlist file.
//!
//! One entry per line: a MAC address, whitespace, then an optional label
//! running to the end of the line. Lines starting with `#` are comments and
//! blank lines are ignored. Saved files are sorted by MAC and replaced
//! atomically.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::auth::Allowlist;
use crate::model::{parse_mac, ModelError};

#[derive(Debug, Error)]
pub enum AllowlistError {
    #[error("allowlist file not found: {0}")]
    FileMissing(PathBuf),
    #[error("line {line_number}: {reason}")]
    Parse {
        line_number: usize,
        reason: ParseReason,
    },
    #[error("allowlist I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseReason {
    #[error(transparent)]
    MalformedMac(#[from] ModelError),
    #[error("duplicate entry for {0}")]
    Duplicate(String),
}

/// Labels must stay on one line and survive trimming.
pub fn is_valid_label(label: &str) -> bool {
    label.trim() == label && !label.chars().any(char::is_control)
}

pub fn parse_allowlist(text: &str) -> Result<Allowlist, AllowlistError> {
    let mut allowlist = Allowlist::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (mac_text, label) = match line.split_once(char::is_whitespace) {
            Some((m, rest)) => (m, rest.trim()),
            None => (line, ""),
        };
        let err = |reason| AllowlistError::Parse {
            line_number: idx + 1,
            reason,
        };
        let mac = parse_mac(mac_text).map_err(|e| err(e.into()))?;
        if allowlist.contains(&mac) {
            return Err(err(ParseReason::Duplicate(mac.to_string())));
        }
        allowlist.insert(mac, label);
    }
    Ok(allowlist)
}

pub fn render_allowlist(allowlist: &Allowlist) -> String {
    let mut out = String::new();
    for (mac, label) in allowlist.iter() {
        out.push_str(&mac.to_string());
        if !label.is_empty() {
            out.push(' ');
            out.push_str(label);
        }
        out.push('\n');
    }
    out
}

pub fn load_allowlist(path: &Path) -> Result<Allowlist, AllowlistError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => AllowlistError::FileMissing(path.to_path_buf()),
        _ => AllowlistError::Io(e),
    })?;
    parse_allowlist(&text)
}

pub fn save_allowlist(allowlist: &Allowlist, path: &Path) -> Result<(), AllowlistError> {
    save_allowlist_with_hook(allowlist, path, |_| Ok(()))
}

/// Like [`save_allowlist`], running `before_rename` once the temporary file
/// is fully written. An error from the hook aborts the save and leaves the
/// original file untouched; tests use it to inject a crash.
pub fn save_allowlist_with_hook<F>(
    allowlist: &Allowlist,
    path: &Path,
    before_rename: F,
) -> Result<(), AllowlistError>
where
    F: FnOnce(&Path) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".allowlist")
        .tempfile_in(dir)?;
    tmp.write_all(render_allowlist(allowlist).as_bytes())?;
    tmp.as_file().sync_all()?;
    before_rename(tmp.path())?;
    tmp.persist(path).map_err(|e| AllowlistError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MacAddress;
    use proptest::prelude::*;

    #[test]
    fn parses_entries_comments_and_blanks() {
        let al =
            parse_allowlist("AA:BB:CC:DD:EE:FF station-1\n# ops\n11:22:33:44:55:66\n").unwrap();
        assert_eq!(al.len(), 2);
        let aa = parse_mac("AA:BB:CC:DD:EE:FF").unwrap();
        let one = parse_mac("11:22:33:44:55:66").unwrap();
        assert_eq!(al.label(&aa), Some("station-1"));
        assert_eq!(al.label(&one), Some(""));

        let al = parse_allowlist("\n  \n# only comments\n").unwrap();
        assert!(al.is_empty());
        assert!(parse_allowlist("").unwrap().is_empty());
    }

    #[test]
    fn canonicalizes_and_keeps_label_spaces() {
        let al = parse_allowlist("aa-bb-cc-dd-ee-ff\tfront door  panel \n").unwrap();
        let (mac, label) = al.iter().next().unwrap();
        assert_eq!(mac.to_string(), "AA:BB:CC:DD:EE:FF");
        assert_eq!(label, "front door  panel");
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_allowlist("AA:BB:CC:DD:EE:01\n# c\nAA:BB:CC:DD:EE\n").unwrap_err();
        assert!(matches!(
            err,
            AllowlistError::Parse {
                line_number: 3,
                reason: ParseReason::MalformedMac(_)
            }
        ));

        let err = parse_allowlist("AA:BB:CC:DD:EE:01 a\naa:bb:cc:dd:ee:01 b\n").unwrap_err();
        assert!(matches!(
            err,
            AllowlistError::Parse {
                line_number: 2,
                reason: ParseReason::Duplicate(_)
            }
        ));
    }

    #[test]
    fn missing_file() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_allowlist(&dir.path().join("nope.txt")),
            Err(AllowlistError::FileMissing(_))
        ));
    }

    #[test]
    fn save_sorts_by_mac_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("allow.txt");
        let mut al = Allowlist::new();
        al.insert(MacAddress::new([0xFF, 0, 0, 0, 0, 1]), "z");
        al.insert(MacAddress::new([0x01, 0, 0, 0, 0, 2]), "");
        al.insert(MacAddress::new([0x0A, 0, 0, 0, 0, 3]), "mid label");
        save_allowlist(&al, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "01:00:00:00:00:02\n0A:00:00:00:00:03 mid label\nFF:00:00:00:00:01 z\n"
        );
        assert_eq!(load_allowlist(&path).unwrap(), al);
    }

    #[test]
    fn crash_before_rename_leaves_original() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("allow.txt");
        fs::write(&path, "AA:BB:CC:DD:EE:FF original\n").unwrap();

        let mut replacement = Allowlist::new();
        replacement.insert(MacAddress::new([1; 6]), "new");
        let mut tmp_seen = None;
        let res = save_allowlist_with_hook(&replacement, &path, |tmp| {
            assert_eq!(fs::read_to_string(tmp)?, "01:01:01:01:01:01 new\n");
            tmp_seen = Some(tmp.to_path_buf());
            Err(io::Error::other("injected crash"))
        });
        assert!(res.is_err());
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "AA:BB:CC:DD:EE:FF original\n"
        );
        assert!(!tmp_seen.unwrap().exists());
        let leftovers = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 1);
    }

    #[test]
    fn label_validation() {
        assert!(is_valid_label(""));
        assert!(is_valid_label("station 1"));
        assert!(!is_valid_label(" padded"));
        assert!(!is_valid_label("two\nlines"));
    }

    fn allowlist_strategy() -> impl Strategy<Value = Allowlist> {
        prop::collection::btree_map(any::<[u8; 6]>(), "([a-z0-9_#-]+( [a-z0-9_#-]+)*)?", 0..1000)
            .prop_map(|m| {
                m.into_iter()
                    .map(|(o, l)| (MacAddress::new(o), l))
                    .collect()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn file_round_trip(al in allowlist_strategy()) {
            prop_assert_eq!(parse_allowlist(&render_allowlist(&al)).unwrap(), al);
        }
    }
}
