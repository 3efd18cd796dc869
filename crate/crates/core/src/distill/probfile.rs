use std::collections::HashMap;
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the teacher is queried on auxiliary examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    /// Privileged input replaced by the zero vector.
    AudioOnly,
    /// Auxiliary privileged vectors passed to the teacher.
    Privileged,
}

impl QueryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryMode::AudioOnly => "audio_only",
            QueryMode::Privileged => "privileged",
        }
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "audio_only" | "audio" => Ok(QueryMode::AudioOnly),
            "privileged" | "priv" => Ok(QueryMode::Privileged),
            other => Err(Error::UnknownStrategy {
                kind: "query mode",
                name: other.into(),
                available: "audio_only, privileged".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbRow {
    pub id: String,
    pub label: usize,
    pub probs: Vec<f64>,
}

/// Teacher probabilities on the auxiliary set, written once.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherProbFile {
    pub num_classes: usize,
    pub mode: QueryMode,
    pub teacher_hash: String,
    pub rows: Vec<ProbRow>,
}

/// Tolerance on row sums when reading.
const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// `v` with 9 significant digits.
fn format_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    // exponent after rounding to 9 digits, so 0.9999999999 counts as 1.00000000
    let sci = format!("{v:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..9).contains(&exp) {
        format!("{:.*}", (8 - exp).max(0) as usize, v)
    } else {
        sci
    }
}

fn malformed(line: usize, msg: impl fmt::Display) -> Error {
    Error::MalformedProbFile(format!("line {line}: {msg}"))
}

impl TeacherProbFile {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "#K={} mode={} teacher={}\n",
            self.num_classes, self.mode, self.teacher_hash
        );
        for row in &self.rows {
            out.push_str(&row.id);
            out.push(',');
            out.push_str(&row.label.to_string());
            for &p in &row.probs {
                out.push(',');
                out.push_str(&format_sig9(p));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| malformed(1, "missing `#` header"))?;
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for tok in header.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| malformed(1, format!("bad header field `{tok}`")))?;
            fields.insert(k, v);
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| malformed(1, format!("header lacks `{k}`")))
        };
        let num_classes: usize = get("K")?.parse().map_err(|_| malformed(1, "K is not an integer"))?;
        if num_classes == 0 {
            return Err(malformed(1, "K must be positive"));
        }
        let mode: QueryMode = get("mode")?.parse().map_err(|_| malformed(1, "unknown query mode"))?;
        let teacher_hash = get("teacher")?.to_string();

        let mut rows = Vec::new();
        for (i, line) in lines {
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != num_classes + 2 {
                return Err(malformed(
                    n,
                    format!("expected {} fields, found {}", num_classes + 2, parts.len()),
                ));
            }
            let label: usize = parts[1].parse().map_err(|_| malformed(n, "label is not an integer"))?;
            if label >= num_classes {
                return Err(malformed(n, format!("label {label} out of range")));
            }
            let probs = parts[2..]
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| malformed(n, format!("bad probability `{s}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(malformed(n, "probability outside [0, 1]"));
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(malformed(n, format!("probabilities sum to {sum}")));
            }
            rows.push(ProbRow {
                id: parts[0].to_string(),
                label,
                probs,
            });
        }
        Ok(Self {
            num_classes,
            mode,
            teacher_hash,
            rows,
        })
    }

    /// Writes the file; fails if `path` already exists.
    pub fn write_once(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut file = match OpenOptions::new().write(true).create_new(true).open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == ErrorKind::AlreadyExists => return Err(Error::OneShotViolation(path.to_path_buf())),
            Err(e) => return Err(Error::io(path, e)),
        };
        file.write_all(self.to_text().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn by_id(&self) -> HashMap<&str, &ProbRow> {
        self.rows.iter().map(|r| (r.id.as_str(), r)).collect()
    }
}
