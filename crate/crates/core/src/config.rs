//! TOML loading with line-numbered diagnostics and dotted-key overrides.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub(crate) fn config_error(path: Option<&Path>, text: &str, err: &toml::de::Error) -> Error {
    Error::Config {
        path: path.map(Path::to_path_buf),
        line: err.span().map(|s| line_of(text, s.start)),
        message: err.message().to_string(),
    }
}

/// Attach a location to a semantic error raised after deserialization.
pub(crate) fn located(path: Option<&Path>, text: &str, offset: Option<usize>, err: Error) -> Error {
    let line = offset.map(|o| line_of(text, o));
    match err {
        Error::Config { message, .. } => Error::Config {
            path: path.map(Path::to_path_buf),
            line,
            message,
        },
        other => Error::Config {
            path: path.map(Path::to_path_buf),
            line,
            message: other.to_string(),
        },
    }
}

/// Parse a TOML document into `T`, reporting the failing line.
pub fn parse_toml<T: DeserializeOwned>(text: &str, path: Option<&Path>) -> Result<T> {
    toml::from_str(text).map_err(|e| config_error(path, text, &e))
}

fn parse_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Apply `a.b.c=value` to a parsed document. Intermediate tables are created.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override '{assignment}' is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(format!("bad override key '{key}'")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("override key '{key}': '{p}' is not a table")))?;
    }
    cur.insert(
        parts[parts.len() - 1].to_string(),
        parse_value(value.trim()),
    );
    Ok(())
}

/// Loaded document text with overrides applied. Line numbers refer to the
/// file as written when no overrides are given.
pub struct Document {
    pub path: Option<PathBuf>,
    pub text: String,
}

impl Document {
    pub fn read(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: Some(path.to_path_buf()),
            line: None,
            message: e.to_string(),
        })?;
        Self::from_text(text, Some(path), overrides)
    }

    pub fn from_text(text: String, path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = if overrides.is_empty() {
            text
        } else {
            let mut table: toml::Table = parse_toml(&text, path)?;
            for o in overrides {
                apply_override(&mut table, o).map_err(|e| located(path, &text, None, e))?;
            }
            toml::to_string(&table).map_err(|e| Error::config(e.to_string()))?
        };
        Ok(Self {
            path: path.map(Path::to_path_buf),
            text,
        })
    }

    pub fn parse<T: DeserializeOwned>(&self) -> Result<T> {
        parse_toml(&self.text, self.path.as_deref())
    }

    pub fn base_dir(&self) -> PathBuf {
        self.path
            .as_ref()
            .and_then(|p| p.parent().map(Path::to_path_buf))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Write `bytes` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Deserialize, Debug)]
    #[serde(deny_unknown_fields)]
    struct Inner {
        rtol: f64,
    }

    #[derive(Deserialize, Debug)]
    #[serde(deny_unknown_fields)]
    struct Doc {
        name: String,
        solver: Inner,
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = "name = \"a\"\n[solver]\nrtol = 1e-8\nbogus = 3\n";
        match parse_toml::<Doc>(text, None) {
            Err(Error::Config { line, message, .. }) => {
                assert_eq!(line, Some(4));
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dotted_override() {
        let text = "name = \"a\"\n[solver]\nrtol = 1e-8\n".to_string();
        let doc =
            Document::from_text(text, None, &["solver.rtol=1e-6".into(), "name=b".into()]).unwrap();
        let d: Doc = doc.parse().unwrap();
        assert_eq!(d.solver.rtol, 1e-6);
        assert_eq!(d.name, "b");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x/out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
