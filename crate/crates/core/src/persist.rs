//! Line-oriented text model files.
//!
//! ```text
//! boostkit-model
//! format_version 1
//! scalar f64
//! mode classify
//! loss exponential
//! link sigmoid2f
//! dims 2
//! alpha_cap 35
//! provenance seed 7
//! terms 2
//! term 1 0.5493061443340549 0 2.5 -1 1
//! term 2 0.3 1 -0.25 1 -1
//! end
//! ```
//!
//! A `term` line is `round alpha feature threshold left right`. Density models
//! use `mode cde`, then `support_lo`, `support_hi`, `breakpoints k`, and one
//! `classifier j breakpoint constant{0,1} terms n` header per breakpoint
//! followed by its term lines. Floats are written in the shortest form that
//! parses back to the identical value, so reloading reproduces predictions
//! bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::booster::{AdditiveModel, BoostLoss, Term};
use crate::cde::{Breakpoints, CdeClassifier, ConditionalDensityModel};
use crate::error::{Error, Result};
use crate::losses::Link;
use crate::scalar::Scalar;
use crate::stump::{Stump, MAX_SCORE};

pub const MAGIC: &str = "boostkit-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel<T> {
    Classifier(AdditiveModel<T>),
    Density(ConditionalDensityModel<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile<T> {
    pub model: SavedModel<T>,
    /// Free-form `(key, value)` pairs: seed, config echo and the like.
    pub provenance: Vec<(String, String)>,
}

impl<T: Scalar> ModelFile<T> {
    pub fn classifier(model: AdditiveModel<T>) -> Self {
        Self {
            model: SavedModel::Classifier(model),
            provenance: Vec::new(),
        }
    }

    pub fn density(model: ConditionalDensityModel<T>) -> Self {
        Self {
            model: SavedModel::Density(model),
            provenance: Vec::new(),
        }
    }

    pub fn with_provenance(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.provenance.push((key.into(), value.to_string()));
        self
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = String::new();
        let (mode, loss, dims) = match &self.model {
            SavedModel::Classifier(m) => ("classify", m.loss(), m.dims()),
            SavedModel::Density(m) => ("cde", BoostLoss::Logistic, m.dims()),
        };
        let link = Link::for_loss(loss);
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "format_version {FORMAT_VERSION}");
        let _ = writeln!(s, "scalar {}", T::NAME);
        let _ = writeln!(s, "mode {mode}");
        let _ = writeln!(s, "loss {}", loss.name());
        let _ = writeln!(s, "link {}", link.name());
        let _ = writeln!(s, "dims {dims}");
        let _ = writeln!(s, "alpha_cap {MAX_SCORE}");
        for (k, v) in &self.provenance {
            if k.is_empty() || k.contains(char::is_whitespace) || v.contains('\n') {
                return Err(Error::InvalidArgument(format!("unwritable provenance entry `{k}`")));
            }
            let _ = writeln!(s, "provenance {k} {v}");
        }
        match &self.model {
            SavedModel::Classifier(m) => {
                let _ = writeln!(s, "terms {}", m.len());
                write_terms(&mut s, m.terms());
            }
            SavedModel::Density(m) => {
                let (lo, hi) = m.breakpoints().support();
                let _ = writeln!(s, "support_lo {lo}");
                let _ = writeln!(s, "support_hi {hi}");
                let _ = writeln!(s, "breakpoints {}", m.breakpoints().len());
                for (j, c) in m.classifiers().iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "classifier {} {} constant {} terms {}",
                        j + 1,
                        c.breakpoint,
                        u8::from(c.constant),
                        c.model.len()
                    );
                    write_terms(&mut s, c.model.terms());
                }
            }
        }
        let _ = writeln!(s, "end");
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Parser::new(text).parse()
    }

    /// Writes to a temporary sibling file and renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, self.to_text()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn write_terms<T: Scalar>(s: &mut String, terms: &[Term<T>]) {
    for (i, t) in terms.iter().enumerate() {
        let _ = writeln!(
            s,
            "term {} {} {} {} {} {}",
            i + 1,
            t.alpha,
            t.stump.feature,
            t.stump.threshold,
            t.stump.left,
            t.stump.right
        );
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory and an
/// atomic rename.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Self { lines, pos: 0 }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let line = self
            .lines
            .get(self.pos.saturating_sub(1))
            .map_or(0, |(n, _)| *n);
        Error::ModelFormat {
            line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        let (_, l) = *self
            .lines
            .get(self.pos)
            .ok_or_else(|| Error::ModelFormat {
                line: self.lines.last().map_or(0, |(n, _)| *n),
                message: "unexpected end of file".into(),
            })?;
        self.pos += 1;
        Ok(l)
    }

    fn peek_key(&self) -> Option<&'a str> {
        self.lines
            .get(self.pos)
            .and_then(|(_, l)| l.split_whitespace().next())
    }

    /// Reads `key value` and returns the value text.
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ if line == key => Ok(""),
            _ => Err(self.err(format!("expected `{key}`, found `{line}`"))),
        }
    }

    fn num<V: std::str::FromStr>(&self, s: &str, what: &str) -> Result<V> {
        s.parse().map_err(|_| self.err(format!("bad {what} `{s}`")))
    }

    fn float<T: Scalar>(&self, s: &str, what: &str) -> Result<T> {
        let v: T = self.num(s, what)?;
        if !v.is_finite() {
            return Err(self.err(format!("non-finite {what}")));
        }
        Ok(v)
    }

    fn terms<T: Scalar>(&mut self, n: usize, dims: usize) -> Result<Vec<Term<T>>> {
        let mut out = Vec::with_capacity(n);
        for k in 1..=n {
            let line = self.next_line()?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 7 || f[0] != "term" {
                return Err(self.err("expected `term round alpha feature threshold left right`"));
            }
            let round: usize = self.num(f[1], "round")?;
            if round != k {
                return Err(self.err(format!("term {round} out of order, expected {k}")));
            }
            let feature: usize = self.num(f[3], "feature index")?;
            if feature >= dims {
                return Err(self.err(format!("feature {feature} out of range for {dims} inputs")));
            }
            out.push(Term {
                alpha: self.float(f[2], "alpha")?,
                stump: Stump::new(
                    feature,
                    self.float(f[4], "threshold")?,
                    self.float(f[5], "left output")?,
                    self.float(f[6], "right output")?,
                ),
            });
        }
        Ok(out)
    }

    fn parse<T: Scalar>(mut self) -> Result<ModelFile<T>> {
        if self.next_line()? != MAGIC {
            return Err(self.err("not a boostkit model file"));
        }
        let version: u32 = {
            let v = self.field("format_version")?;
            self.num(v, "format version")?
        };
        if version != FORMAT_VERSION {
            return Err(self.err(format!("unsupported format_version {version}")));
        }
        let scalar = self.field("scalar")?;
        if scalar != T::NAME {
            return Err(self.err(format!("model stores {scalar} values, reader expects {}", T::NAME)));
        }
        let mode = self.field("mode")?;
        let loss = BoostLoss::parse(self.field("loss")?).map_err(|e| self.err(e.to_string()))?;
        let link = Link::parse(self.field("link")?).map_err(|e| self.err(e.to_string()))?;
        if link != Link::for_loss(loss) {
            return Err(self.err(format!("link {} does not match loss {}", link.name(), loss.name())));
        }
        let dims: usize = {
            let v = self.field("dims")?;
            self.num(v, "dims")?
        };
        if dims == 0 {
            return Err(self.err("dims must be >= 1"));
        }
        let _cap: f64 = {
            let v = self.field("alpha_cap")?;
            self.num(v, "alpha cap")?
        };
        let mut provenance = Vec::new();
        while self.peek_key() == Some("provenance") {
            let rest = self.field("provenance")?;
            let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
            provenance.push((k.to_string(), v.to_string()));
        }
        let model = match mode {
            "classify" => {
                let n: usize = {
                    let v = self.field("terms")?;
                    self.num(v, "term count")?
                };
                if n == 0 {
                    return Err(self.err("classifier has no terms (need T >= 1)"));
                }
                let terms = self.terms(n, dims)?;
                SavedModel::Classifier(
                    AdditiveModel::from_terms(dims, loss, terms).map_err(|e| self.err(e.to_string()))?,
                )
            }
            "cde" => {
                if loss != BoostLoss::Logistic {
                    return Err(self.err("density models must use the logistic loss"));
                }
                let lo: T = {
                    let v = self.field("support_lo")?;
                    self.float(v, "support_lo")?
                };
                let hi: T = {
                    let v = self.field("support_hi")?;
                    self.float(v, "support_hi")?
                };
                let k: usize = {
                    let v = self.field("breakpoints")?;
                    self.num(v, "breakpoint count")?
                };
                let mut values = Vec::with_capacity(k);
                let mut classifiers = Vec::with_capacity(k);
                for j in 1..=k {
                    let line = self.next_line()?;
                    let f: Vec<&str> = line.split_whitespace().collect();
                    if f.len() != 7 || f[0] != "classifier" || f[3] != "constant" || f[5] != "terms" {
                        return Err(self.err("expected `classifier j breakpoint constant c terms n`"));
                    }
                    if self.num::<usize>(f[1], "classifier index")? != j {
                        return Err(self.err(format!("classifier {} out of order", f[1])));
                    }
                    let b: T = self.float(f[2], "breakpoint")?;
                    let constant = match f[4] {
                        "0" => false,
                        "1" => true,
                        other => return Err(self.err(format!("bad constant flag `{other}`"))),
                    };
                    let n: usize = self.num(f[6], "term count")?;
                    let terms = self.terms(n, dims)?;
                    values.push(b);
                    classifiers.push(CdeClassifier {
                        breakpoint: b,
                        model: AdditiveModel::from_terms(dims, loss, terms)
                            .map_err(|e| self.err(e.to_string()))?,
                        constant,
                    });
                }
                let bp = Breakpoints::new(values, lo, hi).map_err(|e| self.err(e.to_string()))?;
                SavedModel::Density(
                    ConditionalDensityModel::new(bp, classifiers).map_err(|e| self.err(e.to_string()))?,
                )
            }
            other => return Err(self.err(format!("unknown mode `{other}`"))),
        };
        if self.next_line()? != "end" {
            return Err(self.err("expected `end`"));
        }
        if self.pos != self.lines.len() {
            self.pos += 1;
            return Err(self.err("trailing content after `end`"));
        }
        Ok(ModelFile { model, provenance })
    }
}
