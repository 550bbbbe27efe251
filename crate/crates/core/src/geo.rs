//! Coordinate → region resolution.
//!
//! States are resolved by an even-odd point-in-polygon test on planar
//! lat/lon; cities by great-circle distance to a center within a radius.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::region::{RegionId, UnknownRegion};

const BUNDLED_STATES: &str = include_str!("../data/geo/india_states.geojson");
const BUNDLED_CITIES: &str = include_str!("../data/geo/cities.csv");

/// Mean Earth radius in kilometres.
const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("coordinate out of range: lat {lat}, lon {lon}")]
pub struct InvalidCoordinate {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, InvalidCoordinate> {
        if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) {
            Ok(Self { lat, lon })
        } else {
            Err(InvalidCoordinate { lat, lon })
        }
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    /// Haversine distance in kilometres.
    pub fn distance_km(&self, other: &GeoPoint) -> f64 {
        let (lat1, lat2) = (self.lat.to_radians(), other.lat.to_radians());
        let dlat = lat2 - lat1;
        let dlon = (other.lon - self.lon).to_radians();
        let a = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_KM * a.sqrt().asin()
    }
}

/// A polygon with an exterior ring and optional holes, as `(lon, lat)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    rings: Vec<Vec<(f64, f64)>>,
    bbox: (f64, f64, f64, f64),
}

impl Polygon {
    /// First ring is the exterior, the rest are holes. Rings need at least
    /// three distinct vertices; a closing vertex is optional.
    pub fn new(rings: Vec<Vec<(f64, f64)>>) -> Result<Self, String> {
        if rings.is_empty() {
            return Err("polygon has no rings".into());
        }
        for ring in &rings {
            let mut distinct = ring.clone();
            if distinct.len() > 1 && distinct.first() == distinct.last() {
                distinct.pop();
            }
            if distinct.len() < 3 {
                return Err(format!("ring has {} distinct vertices, need 3", distinct.len()));
            }
            if ring.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err("non-finite coordinate".into());
            }
        }
        let ext = &rings[0];
        let bbox = ext.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(x0, y0, x1, y1), &(x, y)| (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
        );
        Ok(Self { rings, bbox })
    }

    /// Even-odd rule over all rings, so holes are excluded.
    pub fn contains(&self, p: &GeoPoint) -> bool {
        let (x, y) = (p.lon, p.lat);
        let (x0, y0, x1, y1) = self.bbox;
        if x < x0 || x > x1 || y < y0 || y > y1 {
            return false;
        }
        let mut inside = false;
        for ring in &self.rings {
            let n = ring.len();
            let mut j = n - 1;
            for i in 0..n {
                let (xi, yi) = ring[i];
                let (xj, yj) = ring[j];
                if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                    inside = !inside;
                }
                j = i;
            }
        }
        inside
    }

    /// Area-weighted centroid of the exterior ring.
    pub fn centroid(&self) -> GeoPoint {
        let ring = &self.rings[0];
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        let n = ring.len();
        for i in 0..n {
            let (x0, y0) = ring[i];
            let (x1, y1) = ring[(i + 1) % n];
            let cross = x0 * y1 - x1 * y0;
            a += cross;
            cx += (x0 + x1) * cross;
            cy += (y0 + y1) * cross;
        }
        let a = a / 2.0;
        GeoPoint { lat: cy / (6.0 * a), lon: cx / (6.0 * a) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct City {
    pub region: RegionId,
    pub center: GeoPoint,
    pub radius_km: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum BoundaryError {
    #[error("reading boundaries: {0}")]
    Io(#[from] io::Error),
    #[error("boundary file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("feature {index}: {message}")]
    Geometry { index: usize, message: String },
    #[error("feature {index}: missing \"state_code\" property")]
    MissingStateCode { index: usize },
    #[error("missing regions: {}", .0.join(", "))]
    MissingRegions(Vec<String>),
    #[error("city table line {line}: {message}")]
    City { line: u64, message: String },
}

/// State polygons in file order plus the city table. Immutable once loaded.
#[derive(Debug, Clone)]
pub struct BoundarySet {
    states: Vec<(RegionId, Vec<Polygon>)>,
    cities: Vec<City>,
}

#[derive(Deserialize)]
struct FeatureCollection {
    #[serde(default)]
    features: Vec<Feature>,
}

#[derive(Deserialize)]
struct Feature {
    #[serde(default)]
    properties: serde_json::Map<String, serde_json::Value>,
    geometry: Option<Geometry>,
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum Geometry {
    Polygon { coordinates: Vec<Vec<Vec<f64>>> },
    MultiPolygon { coordinates: Vec<Vec<Vec<Vec<f64>>>> },
}

fn ring_from_json(ring: Vec<Vec<f64>>) -> Result<Vec<(f64, f64)>, String> {
    ring.into_iter()
        .map(|pos| match pos.as_slice() {
            [lon, lat, ..] => Ok((*lon, *lat)),
            _ => Err("position needs two coordinates".to_string()),
        })
        .collect()
}

fn polygon_from_json(rings: Vec<Vec<Vec<f64>>>) -> Result<Polygon, String> {
    let rings = rings.into_iter().map(ring_from_json).collect::<Result<Vec<_>, _>>()?;
    Polygon::new(rings)
}

#[derive(Deserialize)]
struct CityRow {
    city: String,
    lat: f64,
    lon: f64,
    radius_km: f64,
}

fn load_cities<R: Read>(source: R) -> Result<Vec<City>, BoundaryError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut cities = Vec::new();
    for row in reader.deserialize::<CityRow>() {
        let row = row.map_err(|e| BoundaryError::City {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = cities.len() as u64 + 2;
        let region = RegionId::city(&row.city)
            .map_err(|UnknownRegion(c)| BoundaryError::City { line, message: format!("unknown city {c:?}") })?;
        let center = GeoPoint::new(row.lat, row.lon)
            .map_err(|e| BoundaryError::City { line, message: e.to_string() })?;
        if !(row.radius_km > 0.0 && row.radius_km.is_finite()) {
            return Err(BoundaryError::City { line, message: format!("radius_km must be positive, got {}", row.radius_km) });
        }
        cities.push(City { region, center, radius_km: row.radius_km });
    }
    Ok(cities)
}

/// Loads a GeoJSON feature collection (each feature carrying a `state_code`
/// property) and a `city,lat,lon,radius_km` table. Every one of the 33
/// served states must have at least one polygon. Features for codes outside
/// that set are skipped with a warning.
pub fn load_boundaries<R: Read, C: Read>(states: R, cities: C) -> Result<BoundarySet, BoundaryError> {
    let collection: FeatureCollection = serde_json::from_reader(states)?;
    let mut out: Vec<(RegionId, Vec<Polygon>)> = Vec::new();

    for (index, feature) in collection.features.into_iter().enumerate() {
        let code = feature
            .properties
            .get("state_code")
            .and_then(|v| v.as_str())
            .ok_or(BoundaryError::MissingStateCode { index })?;
        let region = match RegionId::state(code) {
            Ok(r) => r,
            Err(_) => {
                warn!("boundary feature {index}: skipping unknown state code {code:?}");
                continue;
            }
        };
        let geometry = feature
            .geometry
            .ok_or_else(|| BoundaryError::Geometry { index, message: "null geometry".into() })?;
        let polygons = match geometry {
            Geometry::Polygon { coordinates } => vec![polygon_from_json(coordinates)],
            Geometry::MultiPolygon { coordinates } => coordinates.into_iter().map(polygon_from_json).collect(),
        }
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|message| BoundaryError::Geometry { index, message })?;

        match out.iter_mut().find(|(r, _)| *r == region) {
            Some((_, existing)) => existing.extend(polygons),
            None => out.push((region, polygons)),
        }
    }

    let present: BTreeSet<_> = out.iter().filter(|(_, p)| !p.is_empty()).map(|(r, _)| r.code()).collect();
    let missing: Vec<String> = RegionId::all_states()
        .filter(|r| !present.contains(r.code()))
        .map(|r| r.code().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(BoundaryError::MissingRegions(missing));
    }

    Ok(BoundarySet { states: out, cities: load_cities(cities)? })
}

impl BoundarySet {
    /// The simplified boundary partition and city table shipped with the crate.
    pub fn bundled() -> Self {
        load_boundaries(BUNDLED_STATES.as_bytes(), BUNDLED_CITIES.as_bytes()).expect("bundled boundaries are valid")
    }

    pub fn from_paths(states: impl AsRef<Path>, cities: impl AsRef<Path>) -> Result<Self, BoundaryError> {
        load_boundaries(BufReader::new(File::open(states)?), BufReader::new(File::open(cities)?))
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn polygons(&self, state: &RegionId) -> &[Polygon] {
        self.states
            .iter()
            .find(|(r, _)| r == state)
            .map(|(_, p)| p.as_slice())
            .unwrap_or(&[])
    }

    pub fn cities(&self) -> &[City] {
        &self.cities
    }

    /// First state (in file order) whose polygons contain `p`.
    pub fn resolve_state(&self, p: &GeoPoint) -> Option<RegionId> {
        self.states
            .iter()
            .find(|(_, polys)| polys.iter().any(|poly| poly.contains(p)))
            .map(|(r, _)| r.clone())
    }

    /// Nearest city whose center lies within its radius of `p`.
    pub fn resolve_city(&self, p: &GeoPoint) -> Option<RegionId> {
        self.cities
            .iter()
            .map(|c| (c, c.center.distance_km(p)))
            .filter(|(c, d)| *d <= c.radius_km)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c.region.clone())
    }
}
