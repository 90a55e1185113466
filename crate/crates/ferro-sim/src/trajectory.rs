//! Binary trajectory artifacts.
//!
//! Layout:
//!
//! ```text
//! ferro-trajectory\n
//! key = value\n            (one line per header entry, fixed order)
//! end_header\n
//! index table              (snapshots × [step: u64, time: f64], little-endian)
//! body                     (snapshots × coefficients f64, little-endian, row-major)
//! ```
//!
//! Nothing in the file depends on wall-clock time or thread count, so equal
//! configurations give byte-identical files.

use std::fmt;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use ferro_spectral::galerkin::Layout;
use ferro_spectral::integrator::TrajectoryRecord;
use ferro_spectral::spectral::{Bases, Polarization, SpaceTag};
use sha2::{Digest, Sha256};

use crate::config::hex;

pub const MAGIC: &str = "ferro-trajectory";
pub const SCHEMA_VERSION: u32 = 1;
const END: &str = "end_header";

/// SHA-256 over the basis ordering: for each block, every mode's wavevector
/// and polarization in coordinate order.
pub fn basis_digest(bases: &Bases) -> String {
    let mut h = Sha256::new();
    for (block, tag) in [("a", SpaceTag::V), ("b", SpaceTag::W), ("c", SpaceTag::V2), ("d", SpaceTag::Grad), ("e", SpaceTag::V2)] {
        h.update(block.as_bytes());
        for m in bases.get(tag).modes() {
            for c in m.k {
                h.update(c.to_le_bytes());
            }
            h.update([polarization_code(m.pol)]);
        }
    }
    hex(&h.finalize())
}

fn polarization_code(p: Polarization) -> u8 {
    match p {
        Polarization::DivFree1 => 0,
        Polarization::DivFree2 => 1,
        Polarization::Gradient => 2,
        Polarization::Full1 => 3,
        Polarization::Full2 => 4,
        Polarization::Full3 => 5,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryHeader {
    pub schema_version: u32,
    pub config_hash: String,
    pub basis_digest: String,
    pub seed: u64,
    pub member: u64,
    pub k_max: usize,
    /// Block sizes `a, b, c, d, e`.
    pub blocks: [usize; 5],
    pub snapshots: usize,
    pub dt: f64,
    pub radius: f64,
    pub stopped_at: Option<f64>,
    pub failure: Option<String>,
}

impl TrajectoryHeader {
    pub fn coefficients(&self) -> usize {
        self.blocks.iter().sum()
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |x: Option<f64>| x.map_or_else(|| "none".to_string(), |t| format!("{t:?}"));
        vec![
            ("schema_version", self.schema_version.to_string()),
            ("config_hash", self.config_hash.clone()),
            ("basis_digest", self.basis_digest.clone()),
            ("seed", self.seed.to_string()),
            ("member", self.member.to_string()),
            ("k_max", self.k_max.to_string()),
            ("blocks", self.blocks.map(|b| b.to_string()).join(",")),
            ("snapshots", self.snapshots.to_string()),
            ("dt", format!("{:?}", self.dt)),
            ("radius", format!("{:?}", self.radius)),
            ("stopped_at", opt(self.stopped_at)),
            ("failure", self.failure.clone().unwrap_or_else(|| "none".into()).replace('\n', " ")),
        ]
    }
}

/// Header, step/time index and coefficient rows of one member.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryFile {
    pub header: TrajectoryHeader,
    pub index: Vec<(u64, f64)>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub enum ArtifactError {
    Io(io::Error),
    Format(String),
    /// Artifact and configuration disagree.
    Mismatch(String),
}

impl fmt::Display for ArtifactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArtifactError::Io(e) => write!(f, "i/o error: {e}"),
            ArtifactError::Format(m) => write!(f, "malformed trajectory file: {m}"),
            ArtifactError::Mismatch(m) => write!(f, "artifact does not match configuration: {m}"),
        }
    }
}

impl std::error::Error for ArtifactError {}

impl From<io::Error> for ArtifactError {
    fn from(e: io::Error) -> Self {
        ArtifactError::Io(e)
    }
}

fn layout_blocks(l: Layout) -> [usize; 5] {
    [l.v, l.w, l.v2, l.grad, l.v2]
}

impl TrajectoryFile {
    pub fn from_record(record: &TrajectoryRecord, config_hash: &str, bases: &Bases, dt: f64) -> Self {
        let layout = Layout::of(bases);
        let header = TrajectoryHeader {
            schema_version: SCHEMA_VERSION,
            config_hash: config_hash.to_string(),
            basis_digest: basis_digest(bases),
            seed: record.seed,
            member: record.member,
            k_max: bases.k_max(),
            blocks: layout_blocks(layout),
            snapshots: record.states.len(),
            dt,
            radius: record.radius,
            stopped_at: record.stopped_at,
            failure: record.failure.as_ref().map(|f| format!("step {} t={:?}: {}", f.step, f.time, f.message)),
        };
        let index = record.times.iter().map(|&t| ((t / dt).round() as u64, t)).collect();
        let rows = record.states.iter().map(|s| s.as_slice().to_vec()).collect();
        TrajectoryFile { header, index, rows }
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{MAGIC}")?;
        for (k, v) in self.header.entries() {
            writeln!(w, "{k} = {v}")?;
        }
        writeln!(w, "{END}")?;
        for &(step, t) in &self.index {
            w.write_all(&step.to_le_bytes())?;
            w.write_all(&t.to_le_bytes())?;
        }
        for row in &self.rows {
            for x in row {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(io::BufWriter::new(f))
    }

    pub fn read_from(r: impl Read) -> Result<Self, ArtifactError> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim_end() != MAGIC {
            return Err(ArtifactError::Format("missing magic line".into()));
        }
        let mut kv = std::collections::BTreeMap::new();
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(ArtifactError::Format("header not terminated".into()));
            }
            let l = line.trim_end();
            if l == END {
                break;
            }
            let (k, v) = l.split_once(" = ").ok_or_else(|| ArtifactError::Format(format!("bad header line `{l}`")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| kv.get(k).cloned().ok_or_else(|| ArtifactError::Format(format!("header lacks `{k}`")));
        fn num<T: std::str::FromStr>(k: &str, v: String) -> Result<T, ArtifactError> {
            v.parse().map_err(|_| ArtifactError::Format(format!("header `{k}` = `{v}` is not a number")))
        }
        let schema_version: u32 = num("schema_version", get("schema_version")?)?;
        if schema_version != SCHEMA_VERSION {
            return Err(ArtifactError::Format(format!("schema version {schema_version}, expected {SCHEMA_VERSION}")));
        }
        let blocks_text = get("blocks")?;
        let parts: Vec<usize> = blocks_text
            .split(',')
            .map(|s| num("blocks", s.to_string()))
            .collect::<Result<_, _>>()?;
        let blocks: [usize; 5] =
            parts.try_into().map_err(|_| ArtifactError::Format("`blocks` needs five sizes".into()))?;
        let opt_f = |k: &str, v: String| -> Result<Option<f64>, ArtifactError> {
            if v == "none" {
                Ok(None)
            } else {
                num(k, v).map(Some)
            }
        };
        let failure = get("failure")?;
        let header = TrajectoryHeader {
            schema_version,
            config_hash: get("config_hash")?,
            basis_digest: get("basis_digest")?,
            seed: num("seed", get("seed")?)?,
            member: num("member", get("member")?)?,
            k_max: num("k_max", get("k_max")?)?,
            blocks,
            snapshots: num("snapshots", get("snapshots")?)?,
            dt: num("dt", get("dt")?)?,
            radius: num("radius", get("radius")?)?,
            stopped_at: opt_f("stopped_at", get("stopped_at")?)?,
            failure: (failure != "none").then_some(failure),
        };
        let mut buf = [0u8; 8];
        let mut next = |r: &mut BufReader<_>| -> Result<[u8; 8], ArtifactError> {
            r.read_exact(&mut buf).map_err(|_| ArtifactError::Format("truncated body".into()))?;
            Ok(buf)
        };
        let mut index = Vec::with_capacity(header.snapshots);
        for _ in 0..header.snapshots {
            let step = u64::from_le_bytes(next(&mut r)?);
            let t = f64::from_le_bytes(next(&mut r)?);
            index.push((step, t));
        }
        let n = header.coefficients();
        let mut rows = Vec::with_capacity(header.snapshots);
        for _ in 0..header.snapshots {
            let mut row = Vec::with_capacity(n);
            for _ in 0..n {
                row.push(f64::from_le_bytes(next(&mut r)?));
            }
            rows.push(row);
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(ArtifactError::Format(format!("{} trailing bytes", rest.len())));
        }
        Ok(TrajectoryFile { header, index, rows })
    }

    pub fn read(path: &Path) -> Result<Self, ArtifactError> {
        TrajectoryFile::read_from(std::fs::File::open(path)?)
    }

    /// Refuses an artifact written under another configuration or basis.
    pub fn check_against(&self, config_hash: &str, bases: &Bases) -> Result<(), ArtifactError> {
        if self.header.config_hash != config_hash {
            return Err(ArtifactError::Mismatch(format!(
                "config hash {} in artifact, {} for this config",
                self.header.config_hash, config_hash
            )));
        }
        let digest = basis_digest(bases);
        if self.header.basis_digest != digest {
            return Err(ArtifactError::Mismatch("basis ordering digest differs".into()));
        }
        if self.header.blocks != layout_blocks(Layout::of(bases)) {
            return Err(ArtifactError::Mismatch("block sizes differ".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ferro_spectral::galerkin::GalerkinState;

    fn sample(bases: &Bases) -> TrajectoryRecord {
        let layout = Layout::of(bases);
        let states = (0..3)
            .map(|s| GalerkinState::from_vec(layout, (0..layout.len()).map(|i| (i * 7 + s) as f64 * 0.1).collect()).unwrap())
            .collect();
        TrajectoryRecord {
            member: 2,
            seed: 99,
            radius: f64::INFINITY,
            times: vec![0.0, 0.01, 0.02],
            states,
            stopped_at: None,
            failure: None,
            steps_taken: 20,
        }
    }

    #[test]
    fn write_read_round_trip() {
        let bases = Bases::new(1).unwrap();
        let file = TrajectoryFile::from_record(&sample(&bases), "abc", &bases, 1e-3);
        let mut bytes = Vec::new();
        file.write_to(&mut bytes).unwrap();
        let back = TrajectoryFile::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.index[2], (20, 0.02));
        back.check_against("abc", &bases).unwrap();
    }

    #[test]
    fn mismatched_hash_or_basis_is_refused() {
        let bases = Bases::new(1).unwrap();
        let file = TrajectoryFile::from_record(&sample(&bases), "abc", &bases, 1e-3);
        assert!(matches!(file.check_against("xyz", &bases), Err(ArtifactError::Mismatch(_))));
        let other = Bases::new(2).unwrap();
        assert!(matches!(file.check_against("abc", &other), Err(ArtifactError::Mismatch(_))));
    }

    #[test]
    fn digest_tracks_basis() {
        assert_eq!(basis_digest(&Bases::new(1).unwrap()), basis_digest(&Bases::new(1).unwrap()));
        assert_ne!(basis_digest(&Bases::new(1).unwrap()), basis_digest(&Bases::new(2).unwrap()));
    }

    #[test]
    fn truncated_body_is_rejected() {
        let bases = Bases::new(1).unwrap();
        let file = TrajectoryFile::from_record(&sample(&bases), "abc", &bases, 1e-3);
        let mut bytes = Vec::new();
        file.write_to(&mut bytes).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(TrajectoryFile::read_from(bytes.as_slice()), Err(ArtifactError::Format(_))));
    }
}
