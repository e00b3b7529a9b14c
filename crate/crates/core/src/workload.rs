//! Stand-in for the frozen controller.
//!
//! Synthetic mode draws i.i.d. random bipolar class prototypes (which are
//! quasi-orthogonal at high dimension), perturbs them into supports by
//! random element flips, and into queries by additive Gaussian noise
//! followed by 8-bit quantization. Replay mode ingests embeddings computed
//! elsewhere.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::protocol::ProtocolSpec;
use crate::rng::{self, tag};
use crate::vector::{BipolarVector, ClassId, QueryVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticWorkloadParams {
    pub d: usize,
    /// Probability that a support element differs from its prototype.
    pub flip_prob: f64,
    /// Std of the Gaussian added to the prototype before quantization.
    pub query_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticWorkloadParams {
    fn default() -> Self {
        SyntheticWorkloadParams { d: 256, flip_prob: 0.1, query_noise: 0.4, seed: 0 }
    }
}

impl SyntheticWorkloadParams {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::config("workload: d must be >= 1"));
        }
        if !(0.0..0.5).contains(&self.flip_prob) {
            return Err(Error::config(format!("workload: flip_prob must lie in [0, 0.5) (got {})", self.flip_prob)));
        }
        if !(self.query_noise >= 0.0 && self.query_noise.is_finite()) {
            return Err(Error::config("workload: query_noise must be finite and >= 0"));
        }
        Ok(())
    }
}

pub fn gen_prototypes<R: Rng + ?Sized>(n_classes: usize, d: usize, rng: &mut R) -> Vec<BipolarVector> {
    (0..n_classes)
        .map(|_| BipolarVector::from_signs((0..d).map(|_| rng.gen::<bool>())))
        .collect()
}

/// Flips each element independently with probability `flip_prob`.
pub fn gen_support<R: Rng + ?Sized>(prototype: &BipolarVector, flip_prob: f64, rng: &mut R) -> BipolarVector {
    let flipped = prototype
        .as_slice()
        .iter()
        .map(|&e| if flip_prob > 0.0 && rng.gen_bool(flip_prob) { -e } else { e });
    BipolarVector::from_signs(flipped.map(|e| e > 0))
}

/// `clamp(round(127 (p + z) / (1 + 3 s)), -127, 127)` with `z ~ N(0, s)`.
pub fn gen_query<R: Rng + ?Sized>(prototype: &BipolarVector, query_noise: f64, rng: &mut R) -> QueryVector {
    let scale = QueryVector::MAX as f64 / (1.0 + 3.0 * query_noise);
    let max = QueryVector::MAX as f64;
    let elements = prototype
        .as_slice()
        .iter()
        .map(|&p| {
            let z: f64 = if query_noise > 0.0 { query_noise * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
            (scale * (p as f64 + z)).round().clamp(-max, max) as i8
        })
        .collect();
    QueryVector::new(elements).expect("clamped to [-127, 127]")
}

/// Supports to write and queries to evaluate in one session.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionData {
    pub supports: Vec<(ClassId, BipolarVector)>,
    pub queries: Vec<(ClassId, QueryVector)>,
}

/// Source of per-session supports and queries.
pub trait SessionSource {
    fn dim(&self) -> usize;
    fn num_sessions(&self) -> usize;
    /// Data for the zero-based session `index`.
    fn session(&mut self, index: usize) -> Result<SessionData>;
}

/// Synthetic controller outputs laid out on a protocol's session plan.
#[derive(Debug, Clone)]
pub struct SyntheticWorkload {
    params: SyntheticWorkloadParams,
    spec: ProtocolSpec,
    prototypes: Vec<BipolarVector>,
}

impl SyntheticWorkload {
    pub fn new(params: SyntheticWorkloadParams, spec: &ProtocolSpec) -> Result<Self> {
        params.validate()?;
        spec.validate(None)?;
        let mut rng = rng::stream(params.seed, &[tag::PROTOTYPES]);
        let prototypes = gen_prototypes(spec.total_classes(), params.d, &mut rng);
        Ok(SyntheticWorkload { params, spec: spec.clone(), prototypes })
    }

    pub fn prototype(&self, class: ClassId) -> &BipolarVector {
        &self.prototypes[class.0 as usize]
    }
}

impl SessionSource for SyntheticWorkload {
    fn dim(&self) -> usize {
        self.params.d
    }

    fn num_sessions(&self) -> usize {
        self.spec.num_sessions()
    }

    fn session(&mut self, index: usize) -> Result<SessionData> {
        if index >= self.num_sessions() {
            return Err(Error::config(format!("session index {index} beyond protocol")));
        }
        let seed = self.params.seed;
        let (new_classes, shots) = self.spec.new_classes(index);
        let mut support_rng = rng::stream(seed, &[tag::SUPPORTS, index as u64]);
        let mut supports = Vec::with_capacity(new_classes.len() * shots as usize);
        for c in new_classes {
            let class = ClassId(c as u32);
            for _ in 0..shots {
                supports.push((class, gen_support(&self.prototypes[c], self.params.flip_prob, &mut support_rng)));
            }
        }
        let mut query_rng = rng::stream(seed, &[tag::QUERIES, index as u64]);
        let seen = self.spec.classes_seen(index);
        let mut queries = Vec::with_capacity(seen * self.spec.queries_per_class as usize);
        for c in 0..seen {
            for _ in 0..self.spec.queries_per_class {
                queries.push((ClassId(c as u32), gen_query(&self.prototypes[c], self.params.query_noise, &mut query_rng)));
            }
        }
        Ok(SessionData { supports, queries })
    }
}

/// Controller outputs loaded from an embedding file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset {
    dim: usize,
    sessions: Vec<SessionData>,
}

impl EmbeddingDataset {
    pub fn new(dim: usize, sessions: Vec<SessionData>) -> Self {
        EmbeddingDataset { dim, sessions }
    }

    pub fn sessions(&self) -> &[SessionData] {
        &self.sessions
    }

    /// Checks the session layout against a protocol plan: session count,
    /// number of new classes per session, and that every query names a class
    /// already written.
    pub fn validate_against(&self, spec: &ProtocolSpec) -> Result<()> {
        if self.sessions.len() != spec.num_sessions() {
            return Err(Error::config(format!(
                "embedding file has {} sessions, protocol expects {}",
                self.sessions.len(),
                spec.num_sessions()
            )));
        }
        let mut seen = BTreeSet::new();
        for (k, s) in self.sessions.iter().enumerate() {
            let before = seen.len();
            seen.extend(s.supports.iter().map(|(c, _)| *c));
            let expected = spec.new_classes(k).0.len();
            if seen.len() - before != expected {
                return Err(Error::config(format!(
                    "session {}: {} new classes, protocol expects {expected}",
                    k + 1,
                    seen.len() - before
                )));
            }
            if let Some((c, _)) = s.queries.iter().find(|(c, _)| !seen.contains(c)) {
                return Err(Error::config(format!("session {}: query for unseen class {c}", k + 1)));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["session".to_string(), "class_id".into(), "role".into()];
        header.extend((0..self.dim).map(|i| format!("e{i}")));
        let wr = |e: csv::Error| Error::config(format!("writing embeddings: {e}"));
        out.write_record(&header).map_err(wr)?;
        for (k, s) in self.sessions.iter().enumerate() {
            let rows = s
                .supports
                .iter()
                .map(|(c, v)| (c, "support", v.as_slice()))
                .chain(s.queries.iter().map(|(c, v)| (c, "query", v.as_slice())));
            for (c, role, v) in rows {
                let mut rec = vec![(k + 1).to_string(), c.to_string(), role.to_string()];
                rec.extend(v.iter().map(|e| e.to_string()));
                out.write_record(&rec).map_err(wr)?;
            }
        }
        out.flush().map_err(|e| Error::config(format!("writing embeddings: {e}")))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(r);
        let header = reader
            .headers()
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
            .clone();
        let fixed = ["session", "class_id", "role"];
        if header.len() < 4 || header.iter().take(3).ne(fixed) {
            return Err(Error::Parse { line: 1, msg: "header must start with session,class_id,role,e0".into() });
        }
        let dim = header.len() - 3;
        for (i, name) in header.iter().skip(3).enumerate() {
            if name != format!("e{i}") {
                return Err(Error::Parse { line: 1, msg: format!("expected column e{i}, found `{name}`") });
            }
        }

        let mut by_session: Vec<(u32, SessionData)> = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != header.len() {
                return Err(Error::DimensionMismatch { expected: dim, got: rec.len().saturating_sub(3) });
            }
            let parse_err = |what: &str, v: &str| Error::Parse { line, msg: format!("bad {what} `{v}`") };
            let session: u32 = rec[0].trim().parse().map_err(|_| parse_err("session", &rec[0]))?;
            if session == 0 {
                return Err(Error::RangeViolation { line, msg: "sessions are numbered from 1".into() });
            }
            let class = ClassId(rec[1].trim().parse().map_err(|_| parse_err("class_id", &rec[1]))?);
            let values = rec
                .iter()
                .skip(3)
                .map(|v| v.trim().parse::<i32>().map_err(|_| parse_err("element", v)))
                .collect::<Result<Vec<i32>>>()?;
            let idx = match by_session.iter().position(|(s, _)| *s == session) {
                Some(i) => i,
                None => {
                    by_session.push((session, SessionData::default()));
                    by_session.len() - 1
                }
            };
            let data = &mut by_session[idx].1;
            match rec[2].trim() {
                "support" => {
                    if let Some(i) = values.iter().position(|&v| v != 1 && v != -1) {
                        return Err(Error::RangeViolation {
                            line,
                            msg: format!("support element e{i} = {} is not -1 or 1", values[i]),
                        });
                    }
                    let v = BipolarVector::from_signs(values.iter().map(|&v| v > 0));
                    data.supports.push((class, v));
                }
                "query" => {
                    if let Some(i) = values.iter().position(|v| !(-127..=127).contains(v)) {
                        return Err(Error::RangeViolation {
                            line,
                            msg: format!("query element e{i} = {} outside [-127, 127]", values[i]),
                        });
                    }
                    let v = QueryVector::new(values.iter().map(|&v| v as i8).collect()).expect("range checked");
                    data.queries.push((class, v));
                }
                other => return Err(Error::Parse { line, msg: format!("role must be support or query, got `{other}`") }),
            }
        }
        by_session.sort_by_key(|(s, _)| *s);
        for (i, (s, _)) in by_session.iter().enumerate() {
            if *s as usize != i + 1 {
                return Err(Error::config(format!("embedding sessions must be numbered 1..N without gaps (missing {})", i + 1)));
            }
        }
        Ok(EmbeddingDataset { dim, sessions: by_session.into_iter().map(|(_, d)| d).collect() })
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingDataset::read_csv(std::io::BufReader::new(file))
}

impl SessionSource for EmbeddingDataset {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_sessions(&self) -> usize {
        self.sessions.len()
    }

    fn session(&mut self, index: usize) -> Result<SessionData> {
        self.sessions
            .get(index)
            .cloned()
            .ok_or_else(|| Error::config(format!("session index {index} beyond embedding file")))
    }
}
