//! Line-oriented text format for trained ensembles.
//!
//! ```text
//! rhbox/1
//! scalar f64
//! rng chacha20
//! n_features 4
//! n_classes 2
//! class_names ["genuine","forged"]
//! feature_names null
//! normalization 4
//! norm <min> <max>            (one line per feature)
//! config n_estimators 100
//! config sample_rate <x>
//! config max_features 4
//! config theta <x>
//! config gamma uniform <x>     (or: per_dimension <x> ...)
//! config seed 42
//! learners 100
//! learner <i> boxes <count> features <f> ...
//! theta <x>
//! gamma uniform <x>
//! box <class> <count> <min ...> | <max ...>
//! end
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips `f64` exactly.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::NormalizationParams;
use crate::ensemble::{MaxFeatures, RhConfig, RhModel};
use crate::error::{Error, Result};
use crate::geometry::{Hyperbox, Sensitivity};
use crate::gfmm::GfmmModel;
use crate::rng::RNG_ALGORITHM;
use crate::scalar::Scalar;

pub const FORMAT_VERSION: &str = "rhbox/1";
const MAJOR: u32 = 1;

fn real<T: Scalar>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

fn reals<T: Scalar>(xs: &[T]) -> String {
    xs.iter().map(|&x| real(x)).collect::<Vec<_>>().join(" ")
}

fn gamma_text<T: Scalar>(g: &Sensitivity<T>) -> String {
    match g {
        Sensitivity::Uniform(x) => format!("uniform {}", real(*x)),
        Sensitivity::PerDimension(v) => format!("per_dimension {}", reals(v)),
    }
}

pub fn write_model<T: Scalar, W: Write>(model: &RhModel<T>, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{FORMAT_VERSION}")?;
    writeln!(w, "scalar {}", T::NAME)?;
    writeln!(w, "rng {RNG_ALGORITHM}")?;
    writeln!(w, "n_features {}", model.n_features)?;
    writeln!(w, "n_classes {}", model.n_classes)?;
    writeln!(w, "class_names {}", serde_json::to_string(&model.class_names).expect("strings serialize"))?;
    writeln!(w, "feature_names {}", serde_json::to_string(&model.feature_names).expect("strings serialize"))?;
    match &model.normalization {
        Some(n) => {
            writeln!(w, "normalization {}", n.dims())?;
            for (lo, hi) in n.mins.iter().zip(&n.maxs) {
                writeln!(w, "norm {} {}", real(*lo), real(*hi))?;
            }
        }
        None => writeln!(w, "normalization none")?,
    }
    let c = &model.config;
    writeln!(w, "config n_estimators {}", c.n_estimators)?;
    writeln!(w, "config sample_rate {}", real(c.sample_rate))?;
    writeln!(w, "config max_features {}", model.max_features())?;
    writeln!(w, "config theta {}", real(c.theta))?;
    writeln!(w, "config gamma {}", gamma_text(&c.gamma))?;
    writeln!(w, "config seed {}", c.seed)?;
    writeln!(w, "learners {}", model.learners.len())?;
    for (i, l) in model.learners.iter().enumerate() {
        let feats: Vec<String> = l.feature_indices.iter().map(|f| f.to_string()).collect();
        writeln!(w, "learner {i} boxes {} features {}", l.boxes.len(), feats.join(" "))?;
        writeln!(w, "theta {}", real(l.theta))?;
        writeln!(w, "gamma {}", gamma_text(&l.gamma))?;
        for b in &l.boxes {
            writeln!(
                w,
                "box {} {} {} | {}",
                b.class_label,
                b.sample_count,
                reals(&b.min_point),
                reals(&b.max_point)
            )?;
        }
    }
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

pub fn model_to_string<T: Scalar>(model: &RhModel<T>) -> String {
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("model text is UTF-8")
}

/// Writes to a sibling temporary file and renames it into place.
pub fn save_model<T: Scalar>(model: &RhModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    write_model(model, std::fs::File::create(&tmp)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<RhModel<T>> {
    read_model(BufReader::new(std::fs::File::open(path)?))
}

pub fn model_from_str<T: Scalar>(text: &str) -> Result<RhModel<T>> {
    read_model(text.as_bytes())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::ModelFormat {
            line: self.line,
            reason: reason.into(),
        }
    }

    fn next(&mut self) -> Result<String> {
        match self.inner.next() {
            Some(l) => {
                self.line += 1;
                Ok(l?.trim_end_matches('\r').to_string())
            }
            None => Err(Error::ModelFormat {
                line: self.line + 1,
                reason: "unexpected end of file".into(),
            }),
        }
    }

    /// Next line, which must start with `key`; returns the remainder.
    fn field(&mut self, key: &str) -> Result<String> {
        let l = self.next()?;
        match l.strip_prefix(key) {
            Some(rest) if rest.is_empty() || rest.starts_with(' ') => Ok(rest.trim().to_string()),
            _ => Err(self.err(format!("expected `{key}`, found `{l}`"))),
        }
    }

    fn int(&self, s: &str, what: &str) -> Result<usize> {
        s.parse().map_err(|_| self.err(format!("{what}: `{s}` is not an integer")))
    }

    fn real<T: Scalar>(&self, s: &str) -> Result<T> {
        let v: f64 = s.parse().map_err(|_| self.err(format!("`{s}` is not a number")))?;
        T::from_f64(v).ok_or_else(|| self.err(format!("`{s}` is out of range")))
    }

    fn reals<T: Scalar>(&self, s: &str) -> Result<Vec<T>> {
        s.split_whitespace().map(|t| self.real(t)).collect()
    }

    fn gamma<T: Scalar>(&self, s: &str) -> Result<Sensitivity<T>> {
        let (kind, rest) = s.split_once(' ').unwrap_or((s, ""));
        let g = match kind {
            "uniform" => Sensitivity::Uniform(self.real(rest.trim())?),
            "per_dimension" => Sensitivity::PerDimension(self.reals(rest)?),
            _ => return Err(self.err(format!("unknown gamma kind `{kind}`"))),
        };
        g.validate().map_err(|e| self.err(e.to_string()))?;
        Ok(g)
    }
}

fn check_version(line: &str) -> Result<()> {
    let Some(v) = line.strip_prefix("rhbox/") else {
        return Err(Error::ModelFormat {
            line: 1,
            reason: "not an rhbox model file".into(),
        });
    };
    let major: u32 = v
        .split('.')
        .next()
        .and_then(|m| m.parse().ok())
        .ok_or_else(|| Error::ModelFormat {
            line: 1,
            reason: format!("malformed version `{line}`"),
        })?;
    if major != MAJOR {
        return Err(Error::Version {
            found: line.to_string(),
            supported: FORMAT_VERSION.to_string(),
        });
    }
    Ok(())
}

pub fn read_model<T: Scalar, R: BufRead>(reader: R) -> Result<RhModel<T>> {
    let mut r = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let first = r.next()?;
    check_version(first.trim())?;
    let scalar = r.field("scalar")?;
    if scalar != T::NAME {
        return Err(r.err(format!("model stores {scalar} values but {} was requested", T::NAME)));
    }
    let rng = r.field("rng")?;
    if rng != RNG_ALGORITHM {
        return Err(r.err(format!("unknown random generator `{rng}`")));
    }
    let n_features = {
        let s = r.field("n_features")?;
        r.int(&s, "n_features")?
    };
    let n_classes = {
        let s = r.field("n_classes")?;
        r.int(&s, "n_classes")?
    };
    let class_names: Vec<String> = {
        let s = r.field("class_names")?;
        serde_json::from_str(&s).map_err(|e| r.err(format!("class_names: {e}")))?
    };
    if class_names.len() != n_classes {
        return Err(r.err(format!("{} class names for {n_classes} classes", class_names.len())));
    }
    let feature_names: Option<Vec<String>> = {
        let s = r.field("feature_names")?;
        serde_json::from_str(&s).map_err(|e| r.err(format!("feature_names: {e}")))?
    };
    if feature_names.as_ref().is_some_and(|f| f.len() != n_features) {
        return Err(r.err("feature_names length differs from n_features"));
    }
    let normalization = {
        let s = r.field("normalization")?;
        if s == "none" {
            None
        } else {
            let p = r.int(&s, "normalization")?;
            if p != n_features {
                return Err(r.err("normalization length differs from n_features"));
            }
            let mut mins = Vec::with_capacity(p);
            let mut maxs = Vec::with_capacity(p);
            for _ in 0..p {
                let s = r.field("norm")?;
                let v: Vec<T> = r.reals(&s)?;
                if v.len() != 2 {
                    return Err(r.err("norm line needs a min and a max"));
                }
                mins.push(v[0]);
                maxs.push(v[1]);
            }
            Some(NormalizationParams { mins, maxs })
        }
    };

    let n_estimators = {
        let s = r.field("config n_estimators")?;
        r.int(&s, "n_estimators")?
    };
    let sample_rate = {
        let s = r.field("config sample_rate")?;
        r.real(&s)?
    };
    let max_features = {
        let s = r.field("config max_features")?;
        r.int(&s, "max_features")?
    };
    let theta = {
        let s = r.field("config theta")?;
        r.real(&s)?
    };
    let gamma = {
        let s = r.field("config gamma")?;
        r.gamma(&s)?
    };
    let seed = {
        let s = r.field("config seed")?;
        s.parse::<u64>().map_err(|_| r.err(format!("seed `{s}` is not a u64")))?
    };
    let config = RhConfig {
        n_estimators,
        sample_rate,
        max_features: MaxFeatures::Count(max_features),
        theta,
        gamma,
        seed,
    };
    config.validate(n_features).map_err(|e| r.err(e.to_string()))?;

    let n_learners = {
        let s = r.field("learners")?;
        r.int(&s, "learners")?
    };
    if n_learners != n_estimators {
        return Err(r.err(format!("{n_learners} learners but n_estimators is {n_estimators}")));
    }
    let mut learners = Vec::with_capacity(n_learners);
    for i in 0..n_learners {
        let head = r.field("learner")?;
        let mut parts = head.split_whitespace();
        let idx = parts.next().unwrap_or("");
        if r.int(idx, "learner index")? != i {
            return Err(r.err(format!("expected learner {i}")));
        }
        if parts.next() != Some("boxes") {
            return Err(r.err("expected `boxes` after learner index"));
        }
        let n_boxes = r.int(parts.next().unwrap_or(""), "box count")?;
        if parts.next() != Some("features") {
            return Err(r.err("expected `features`"));
        }
        let features = parts.map(|f| r.int(f, "feature index")).collect::<Result<Vec<_>>>()?;
        if let Some(&f) = features.iter().find(|&&f| f >= n_features) {
            return Err(r.err(format!("feature {f} out of range")));
        }
        if features.len() > max_features {
            return Err(r.err("learner uses more features than max_features"));
        }
        let d = features.len();
        let theta = {
            let s = r.field("theta")?;
            r.real(&s)?
        };
        let gamma = {
            let s = r.field("gamma")?;
            r.gamma(&s)?
        };
        let mut boxes = Vec::with_capacity(n_boxes);
        for _ in 0..n_boxes {
            let s = r.field("box")?;
            let (head, max_part) = s.split_once('|').ok_or_else(|| r.err("box line lacks `|`"))?;
            let mut hp = head.split_whitespace();
            let class = r.int(hp.next().unwrap_or(""), "box class")?;
            let count = r.int(hp.next().unwrap_or(""), "box count")?;
            if class >= n_classes {
                return Err(r.err(format!("box class {class} out of range")));
            }
            let min: Vec<T> = hp.map(|t| r.real(t)).collect::<Result<_>>()?;
            let max: Vec<T> = r.reals(max_part)?;
            if min.len() != d || max.len() != d {
                return Err(r.err(format!("box has {} / {} coordinates, expected {d}", min.len(), max.len())));
            }
            boxes.push(Hyperbox::new(min, max, class, count).map_err(|e| r.err(e.to_string()))?);
        }
        let learner =
            GfmmModel::from_parts(boxes, features, theta, gamma).map_err(|e| r.err(e.to_string()))?;
        learners.push(learner);
    }
    let end = r.next()?;
    if end.trim() != "end" {
        return Err(r.err(format!("expected `end`, found `{end}`")));
    }
    let class_set = learners.iter().flat_map(|l| l.class_set.iter().copied()).collect();
    Ok(RhModel {
        learners,
        config,
        n_features,
        n_classes,
        class_set,
        class_names,
        feature_names,
        normalization,
    })
}
