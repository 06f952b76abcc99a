//! The series file format `{meta, entries: [{x, orbit_size, coeffs}]}`.

use lacewalk::lattice::{parse_rational, SpatialSeries, Storage, ZPolynomial};
use lacewalk::{Error, LatticePoint};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    /// `"G"` or `"Pi"`.
    pub kind: String,
    pub dim: usize,
    pub beta: String,
    pub order: usize,
    pub storage: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub x: Vec<i32>,
    pub orbit_size: u64,
    /// Coefficients of `z^0 .. z^N`.
    pub coeffs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub meta: SeriesMeta,
    pub entries: Vec<SeriesEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<serde_json::Value>,
}

impl SeriesFile {
    pub fn from_series(kind: &str, beta: &BigRational, s: &SpatialSeries) -> Self {
        let orbit = s.to_orbit().expect("series built by the toolkit are symmetric");
        let entries = orbit
            .entries()
            .map(|(x, p)| SeriesEntry {
                x: x.coords().to_vec(),
                orbit_size: x.orbit_size(),
                coeffs: p.coeffs().iter().map(|c| c.to_string()).collect(),
            })
            .collect();
        SeriesFile {
            meta: SeriesMeta {
                kind: kind.to_string(),
                dim: s.dim(),
                beta: beta.to_string(),
                order: s.order(),
                storage: Storage::Orbit.as_str().to_string(),
            },
            entries,
            audit: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn beta(&self) -> Result<BigRational, Error> {
        parse_rational(&self.meta.beta).map_err(|e| Error::Format(e.to_string()))
    }

    /// Rebuilds the series, checking that every entry is a canonical
    /// representative with the right orbit size and coefficient count.
    pub fn to_series(&self) -> Result<SpatialSeries, Error> {
        let m = &self.meta;
        if m.storage != Storage::Orbit.as_str() {
            return Err(Error::Format(format!("unsupported storage {:?}", m.storage)));
        }
        let mut s = SpatialSeries::new(m.dim, m.order, Storage::Orbit)?;
        let mut previous: Option<LatticePoint> = None;
        for e in &self.entries {
            let x = LatticePoint::new(&e.x)?;
            if x.dim() != m.dim || !x.is_representative() {
                return Err(Error::Format(format!("entry {x} is not a canonical representative in d = {}", m.dim)));
            }
            if previous.as_ref().is_some_and(|p| p >= &x) {
                return Err(Error::Format(format!("entry {x} is out of order or repeated")));
            }
            if x.orbit_size() != e.orbit_size {
                return Err(Error::Format(format!("entry {x} has orbit size {} but lists {}", x.orbit_size(), e.orbit_size)));
            }
            if e.coeffs.len() != m.order + 1 {
                return Err(Error::Format(format!("entry {x} lists {} coefficients, expected {}", e.coeffs.len(), m.order + 1)));
            }
            let coeffs = e
                .coeffs
                .iter()
                .map(|c| parse_rational(c).map_err(|err| Error::Format(err.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            s.insert(&x, ZPolynomial::from_coefficients(coeffs, m.order)?)?;
            previous = Some(x);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lacewalk::lattice::rational;
    use lacewalk::walks::{enumerate_g, EnumerationOptions, WalkWeightParams};

    #[test]
    fn round_trip_is_byte_identical() {
        let beta = rational(1, 2);
        let g = enumerate_g(&WalkWeightParams::new(2, beta.clone(), 6).unwrap(), &EnumerationOptions::default()).unwrap();
        let text = SeriesFile::from_series("G", &beta, &g.series).render();
        let back = SeriesFile::parse(&text).unwrap();
        assert_eq!(back.to_series().unwrap(), g.series);
        assert_eq!(SeriesFile::from_series("G", &back.beta().unwrap(), &back.to_series().unwrap()).render(), text);
    }

    #[test]
    fn malformed_entries_rejected() {
        let beta = rational(0, 1);
        let g = enumerate_g(&WalkWeightParams::new(2, beta.clone(), 3).unwrap(), &EnumerationOptions::default()).unwrap();
        let good = SeriesFile::from_series("G", &beta, &g.series);
        let mut bad = good.clone();
        bad.entries[1].x = vec![0, 1];
        assert!(bad.to_series().is_err());
        let mut bad = good.clone();
        bad.entries[1].orbit_size += 1;
        assert!(bad.to_series().is_err());
        let mut bad = good;
        bad.entries[0].coeffs.pop();
        assert!(bad.to_series().is_err());
        assert!(SeriesFile::parse("{").is_err());
    }
}
