//! TOML experiment recipes.
//!
//! ```toml
//! metric = "euclid"
//! carrier = { lo = [0.0, 0.0], hi = [1.0, 1.0] }
//! snap = 0.0078125
//! tol = 1e-6
//! max_iter = 200
//! seed_set = { points = [[0.0, 0.0]] }
//!
//! [[maps]]
//! form = "affine2d 0.5 0 0 0.5 0 0"
//! lip = 0.5
//! ```
//!
//! Sets are written inline as `{ points = [[x], ...] }` or
//! `{ interval = [a, b] }`. Optional tables: `render`, `semigroup`,
//! `collage`, `address`, `conspace`.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::hyperspace::CompactSet;
use crate::ifs::Ifs;
use crate::maps::{LipMap, Predicate};
use crate::pmetric::{Carrier, MetricKey, Point, RealSpace};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub metric: String,
    pub carrier: CarrierSpec,
    pub snap: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub size_cap: Option<usize>,
    #[serde(default)]
    pub maps: Vec<MapSpec>,
    pub condensation: Option<SetSpec>,
    pub seed_set: Option<SetSpec>,
    pub render: Option<RenderSpec>,
    pub semigroup: Option<SemigroupSpec>,
    pub collage: Option<CollageSpec>,
    pub address: Option<AddressSpec>,
    pub conspace: Option<ConspaceSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub form: String,
    pub lip: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub points: Option<Vec<Vec<f64>>>,
    pub interval: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSpec {
    pub width: usize,
    pub height: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSpec {
    pub predicate: String,
    pub depth: usize,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollageSpec {
    pub sets: Vec<SetSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddressSpec {
    pub words: Vec<String>,
    /// Exact attractor, when known; otherwise it is computed.
    pub attractor: Option<SetSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConspaceSpec {
    pub t: f64,
    pub limit: MapSpec,
    pub sequence: Vec<MapSpec>,
    pub grid: Option<usize>,
    pub cauchy_tol: Option<f64>,
}

impl SetSpec {
    pub fn build(&self) -> Result<CompactSet> {
        match (&self.points, &self.interval) {
            (Some(pts), None) => CompactSet::points(
                pts.iter()
                    .map(|c| Point::new(c))
                    .collect::<Result<Vec<_>>>()?,
            ),
            (None, Some([a, b])) => CompactSet::interval(*a, *b),
            _ => Err(Error::Parse("a set needs exactly one of `points` or `interval`".into())),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn metric_key(&self) -> Result<MetricKey> {
        self.metric.parse()
    }

    pub fn space(&self) -> Result<RealSpace> {
        let carrier = Carrier::new(Point::new(&self.carrier.lo)?, Point::new(&self.carrier.hi)?)?;
        RealSpace::from_key(self.metric_key()?, carrier)
    }

    pub fn lip_maps(&self) -> Result<Vec<LipMap>> {
        let key = self.metric_key()?;
        self.maps
            .iter()
            .map(|m| {
                let f = LipMap::parse(&m.form, key)?;
                Ok(match m.lip {
                    Some(l) => f.with_lip(l),
                    None => f,
                })
            })
            .collect()
    }

    /// The IFS with condensation, snap and size cap applied. `snap`
    /// overrides the configured value.
    pub fn ifs(&self, snap: Option<f64>) -> Result<Ifs> {
        let mut ifs = Ifs::new(self.space()?, self.lip_maps()?)?;
        if let Some(c) = &self.condensation {
            ifs = ifs.with_condensation(c.build()?)?;
        }
        if let Some(s) = snap.or(self.snap) {
            ifs = ifs.with_snap(s)?;
        }
        if let Some(cap) = self.size_cap {
            ifs = ifs.with_size_cap(cap);
        }
        Ok(ifs)
    }

    pub fn predicate(&self) -> Result<Option<Predicate>> {
        self.semigroup.as_ref().map(|s| s.predicate.parse()).transpose()
    }
}
