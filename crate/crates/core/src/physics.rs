//! Jet-constituent ingestion and the leading-pair feature construction.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs::File;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{minkowski_invariant, FourMomentum, LIGHTLIKE_FLOOR};
use crate::points::PointSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetConstituentRecord {
    pub event_id: i64,
    pub jet_index: i64,
    pub pt: f64,
    pub eta: f64,
    pub phi: f64,
    pub momentum: Option<FourMomentum>,
}

/// CSV column names for each record field. The four-momentum columns are
/// optional as a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub event_id: String,
    pub jet_index: String,
    pub pt: String,
    pub eta: String,
    pub phi: String,
    pub e: Option<String>,
    pub p1: Option<String>,
    pub p2: Option<String>,
    pub p3: Option<String>,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        ColumnSchema {
            event_id: "event_id".into(),
            jet_index: "jet_index".into(),
            pt: "pt".into(),
            eta: "eta".into(),
            phi: "phi".into(),
            e: None,
            p1: None,
            p2: None,
            p3: None,
        }
    }
}

impl ColumnSchema {
    /// Default names plus `E, p1, p2, p3` columns.
    pub fn with_momentum() -> Self {
        ColumnSchema {
            e: Some("E".into()),
            p1: Some("p1".into()),
            p2: Some("p2".into()),
            p3: Some("p3".into()),
            ..Default::default()
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn momentum_columns(&self) -> Result<Option<[&str; 4]>> {
        match (&self.e, &self.p1, &self.p2, &self.p3) {
            (Some(e), Some(a), Some(b), Some(c)) => Ok(Some([e, a, b, c])),
            (None, None, None, None) => Ok(None),
            _ => Err(Error::Config("four-momentum columns must be given all together or not at all".into())),
        }
    }
}

fn lightlike_ok(m: &FourMomentum) -> bool {
    m.e > 0.0 && minkowski_invariant(m) >= -LIGHTLIKE_FLOOR * (m.e * m.e).max(1.0)
}

impl JetConstituentRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.pt >= 0.0 && self.pt.is_finite()) {
            return Err(format!("pt = {} must be a nonnegative number", self.pt));
        }
        if !self.eta.is_finite() {
            return Err("eta is not finite".into());
        }
        if !(self.phi.abs() <= PI + 1e-12) {
            return Err(format!("phi = {} outside [-pi, pi]", self.phi));
        }
        if let Some(m) = &self.momentum {
            if !m.to_array().iter().all(|v| v.is_finite()) {
                return Err("four-momentum is not finite".into());
            }
            if !lightlike_ok(m) {
                return Err(format!("four-momentum is spacelike or has E <= 0 (Q = {})", minkowski_invariant(m)));
            }
        }
        Ok(())
    }
}

/// Read constituent records from a CSV file with a header row.
///
/// Row numbers in errors count the header as row 1.
pub fn load_constituents(path: &Path, schema: &ColumnSchema) -> Result<Vec<JetConstituentRecord>> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let parse_err = |row: usize, msg: String| Error::Parse { path: path.into(), row, msg };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| parse_err(1, format!("missing column '{name}'")))
    };
    let ix = [col(&schema.event_id)?, col(&schema.jet_index)?, col(&schema.pt)?, col(&schema.eta)?, col(&schema.phi)?];
    let mom = match schema.momentum_columns()? {
        Some(names) => Some([col(names[0])?, col(names[1])?, col(names[2])?, col(names[3])?]),
        None => None,
    };
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| parse_err(row, e.to_string()))?;
        let cell = |i: usize| rec.get(i).map(str::trim).ok_or_else(|| parse_err(row, format!("missing field {i}")));
        let int = |i: usize, name: &str| -> Result<i64> {
            let c = cell(i)?;
            c.parse().map_err(|_| parse_err(row, format!("{name} = '{c}' is not an integer")))
        };
        let num = |i: usize, name: &str| -> Result<f64> {
            let c = cell(i)?;
            c.parse().map_err(|_| parse_err(row, format!("{name} = '{c}' is not a number")))
        };
        let momentum = match mom {
            Some(m) => Some(FourMomentum::new(num(m[0], "E")?, num(m[1], "p1")?, num(m[2], "p2")?, num(m[3], "p3")?)),
            None => None,
        };
        let r = JetConstituentRecord {
            event_id: int(ix[0], "event_id")?,
            jet_index: int(ix[1], "jet_index")?,
            pt: num(ix[2], "pt")?,
            eta: num(ix[3], "eta")?,
            phi: num(ix[4], "phi")?,
            momentum,
        };
        r.validate().map_err(|m| parse_err(row, m))?;
        out.push(r);
    }
    Ok(out)
}

/// Write records with the default column names (plus `E, p1, p2, p3` when
/// every record carries a four-momentum).
pub fn write_constituents(path: &Path, records: &[JetConstituentRecord]) -> Result<()> {
    let io = |e: csv::Error| Error::Io { path: path.into(), source: std::io::Error::other(e) };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let with_mom = !records.is_empty() && records.iter().all(|r| r.momentum.is_some());
    let mut header = vec!["event_id", "jet_index", "pt", "eta", "phi"];
    if with_mom {
        header.extend(["E", "p1", "p2", "p3"]);
    }
    w.write_record(&header).map_err(io)?;
    for r in records {
        let mut row = vec![r.event_id.to_string(), r.jet_index.to_string(), r.pt.to_string(), r.eta.to_string(), r.phi.to_string()];
        if with_mom {
            let m = r.momentum.expect("checked above");
            row.extend(m.to_array().iter().map(|v| v.to_string()));
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.into(), source })
}

/// `(p_T cos φ, p_T sin φ)`.
pub fn transverse_pair(pt: f64, phi: f64) -> Result<[f64; 2]> {
    if !(pt >= 0.0) {
        return Err(Error::invalid(format!("negative transverse momentum {pt}")));
    }
    Ok([pt * phi.cos(), pt * phi.sin()])
}

/// Massless four-momentum from `(p_T, η, φ)`.
pub fn massless_momentum(pt: f64, eta: f64, phi: f64) -> FourMomentum {
    FourMomentum::new(pt * eta.cosh(), pt * phi.cos(), pt * phi.sin(), pt * eta.sinh())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    #[default]
    Transverse2d,
    FourMomentum,
}

impl FeatureMode {
    pub fn dim(self) -> usize {
        match self {
            FeatureMode::Transverse2d => 2,
            FeatureMode::FourMomentum => 4,
        }
    }
}

/// Leading (`X`) and second-leading (`Y`) constituent features, one row per event.
#[derive(Clone, Debug, PartialEq)]
pub struct LeadingPairs {
    pub x: PointSet,
    pub y: PointSet,
    pub mode: FeatureMode,
    pub event_ids: Vec<i64>,
    /// Events with fewer than two constituents.
    pub skipped_events: usize,
    /// Events whose leading pair fails the lightlike floor.
    pub dropped_spacelike: usize,
}

impl LeadingPairs {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn feature(r: &JetConstituentRecord, mode: FeatureMode) -> Result<Vec<f64>> {
    match mode {
        FeatureMode::Transverse2d => Ok(transverse_pair(r.pt, r.phi)?.to_vec()),
        FeatureMode::FourMomentum => {
            let m = r.momentum.unwrap_or_else(|| massless_momentum(r.pt, r.eta, r.phi));
            Ok(m.to_array().to_vec())
        }
    }
}

/// Per event, the two constituents with the largest `p_T`. Ties keep input
/// order. Events appear in order of first occurrence. In four-momentum mode,
/// records without explicit momenta are treated as massless.
pub fn leading_pairs(records: &[JetConstituentRecord], mode: FeatureMode) -> Result<LeadingPairs> {
    let mut order: Vec<i64> = Vec::new();
    let mut groups: HashMap<i64, Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        groups
            .entry(r.event_id)
            .or_insert_with(|| {
                order.push(r.event_id);
                Vec::new()
            })
            .push(i);
    }
    let dim = mode.dim();
    let mut x = PointSet::with_capacity(order.len(), dim);
    let mut y = PointSet::with_capacity(order.len(), dim);
    let mut event_ids = Vec::new();
    let (mut skipped, mut dropped) = (0, 0);
    for ev in order {
        let mut idx = groups.remove(&ev).expect("grouped above");
        if idx.len() < 2 {
            skipped += 1;
            continue;
        }
        // stable sort: equal pt keeps input order
        idx.sort_by(|&a, &b| records[b].pt.total_cmp(&records[a].pt));
        let fx = feature(&records[idx[0]], mode)?;
        let fy = feature(&records[idx[1]], mode)?;
        if mode == FeatureMode::FourMomentum
            && !(lightlike_ok(&FourMomentum::from_slice(&fx)) && lightlike_ok(&FourMomentum::from_slice(&fy)))
        {
            dropped += 1;
            continue;
        }
        x.push(&fx)?;
        y.push(&fy)?;
        event_ids.push(ev);
    }
    if skipped > 0 {
        log::info!("skipped {skipped} events with fewer than two constituents");
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} events failing the lightlike floor");
    }
    Ok(LeadingPairs { x, y, mode, event_ids, skipped_events: skipped, dropped_spacelike: dropped })
}

/// Permute `Y` across events, keeping `X` fixed.
pub fn shuffle_responses<R: Rng + ?Sized>(ds: &LeadingPairs, rng: &mut R) -> LeadingPairs {
    if ds.len() < 2 {
        log::warn!("fewer than two events; nothing to shuffle");
        return ds.clone();
    }
    let mut perm: Vec<usize> = (0..ds.len()).collect();
    perm.shuffle(rng);
    let mut out = ds.clone();
    out.y = ds.y.select(&perm);
    out
}

/// Synthetic stand-in for leading-pair transverse momenta.
///
/// `‖X‖` is log-normal, the azimuth of `X` is `N(0, azimuth_sd²)` (uniform on
/// the circle when `azimuth_sd` is `None`), and `Y = R_{φ_X} Ỹ` where `Ỹ` has
/// norm `share·‖X‖` times a log-normal factor and a small angle
/// `N(0, opening_sd²)` independent of `X`. The conditional law of `Y` given
/// `X` is therefore `SO(2)`-equivariant for every choice of parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JetSurrogate {
    pub azimuth_sd: Option<f64>,
    pub opening_sd: f64,
    pub share: f64,
}

impl Default for JetSurrogate {
    fn default() -> Self {
        JetSurrogate { azimuth_sd: Some(0.4), opening_sd: 0.15, share: 0.5 }
    }
}

impl JetSurrogate {
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LeadingPairs> {
        if !(self.opening_sd >= 0.0 && self.share > 0.0) || self.azimuth_sd.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::invalid("surrogate spreads must be nonnegative and share positive"));
        }
        let open = Normal::new(0.0, self.opening_sd).map_err(|e| Error::invalid(e.to_string()))?;
        let mut x = PointSet::with_capacity(n, 2);
        let mut y = PointSet::with_capacity(n, 2);
        for _ in 0..n {
            let r = (0.3 * rng.sample::<f64, _>(StandardNormal)).exp() * 10.0;
            let phi = match self.azimuth_sd {
                Some(s) => s * rng.sample::<f64, _>(StandardNormal),
                None => rng.random::<f64>() * 2.0 * PI - PI,
            };
            let ry = self.share * r * (0.3 * rng.sample::<f64, _>(StandardNormal)).exp();
            let psi = phi + open.sample(rng);
            x.push(&[r * phi.cos(), r * phi.sin()])?;
            y.push(&[ry * psi.cos(), ry * psi.sin()])?;
        }
        Ok(LeadingPairs {
            x,
            y,
            mode: FeatureMode::Transverse2d,
            event_ids: (0..n as i64).collect(),
            skipped_events: 0,
            dropped_spacelike: 0,
        })
    }
}
