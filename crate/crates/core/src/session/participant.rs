use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgeBand {
    Under18,
    From18To24,
    From25To34,
    From35To44,
    From45To54,
    From55To64,
    Over64,
}

impl AgeBand {
    pub const ALL: [AgeBand; 7] = [
        AgeBand::Under18,
        AgeBand::From18To24,
        AgeBand::From25To34,
        AgeBand::From35To44,
        AgeBand::From45To54,
        AgeBand::From55To64,
        AgeBand::Over64,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgeBand::Under18 => "under-18",
            AgeBand::From18To24 => "18-24",
            AgeBand::From25To34 => "25-34",
            AgeBand::From35To44 => "35-44",
            AgeBand::From45To54 => "45-54",
            AgeBand::From55To64 => "55-64",
            AgeBand::Over64 => "65+",
        }
    }
}

impl fmt::Display for AgeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgeBand {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == '–' || c == '_' { '-' } else { c })
            .filter(|c| !c.is_whitespace())
            .collect();
        match norm.as_str() {
            "under-18" | "<18" | "under18" => Ok(AgeBand::Under18),
            "18-24" => Ok(AgeBand::From18To24),
            "25-34" => Ok(AgeBand::From25To34),
            "35-44" => Ok(AgeBand::From35To44),
            "45-54" => Ok(AgeBand::From45To54),
            "55-64" => Ok(AgeBand::From55To64),
            "65+" | "65-plus" | ">64" => Ok(AgeBand::Over64),
            _ => Err(format!("unknown age band `{s}`")),
        }
    }
}

impl Serialize for AgeBand {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for AgeBand {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Declared range of the self-reported proficiency scale (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProficiencyRange {
    pub min: i32,
    pub max: i32,
}

impl Default for ProficiencyRange {
    fn default() -> Self {
        ProficiencyRange { min: 1, max: 5 }
    }
}

impl ProficiencyRange {
    pub fn contains(&self, band: i32) -> bool {
        (self.min..=self.max).contains(&band)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub participant_id: String,
    pub first_language: String,
    pub self_proficiency: i32,
    pub age_band: AgeBand,
    pub education: String,
    pub hours_reading_per_week: f64,
    pub locale: String,
}

impl Participant {
    fn validate(&self, record: usize, range: ProficiencyRange) -> Result<()> {
        if self.participant_id.trim().is_empty() {
            return Err(Error::malformed(record, "participant_id", "empty"));
        }
        if self.first_language.trim().is_empty() {
            return Err(Error::malformed(record, "first_language", "empty"));
        }
        if !range.contains(self.self_proficiency) {
            return Err(Error::malformed(
                record,
                "self_proficiency",
                format!(
                    "{} outside declared band range {}..={}",
                    self.self_proficiency, range.min, range.max
                ),
            ));
        }
        if !(self.hours_reading_per_week.is_finite() && self.hours_reading_per_week >= 0.0) {
            return Err(Error::malformed(
                record,
                "hours_reading_per_week",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

pub fn load_participants(path: impl AsRef<Path>, range: ProficiencyRange) -> Result<Vec<Participant>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_participants(file, range)
}

/// CSV with header
/// `participant_id,first_language,self_proficiency,age_band,education,hours_reading_per_week,locale`.
/// Lines starting with `#` are ignored.
pub fn read_participants<R: Read>(reader: R, range: ProficiencyRange) -> Result<Vec<Participant>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<Participant>().enumerate() {
        let p = rec.map_err(|e| {
            let field = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err
                    .field()
                    .map(|f| PARTICIPANT_FIELDS.get(f as usize).copied().unwrap_or("?"))
                    .unwrap_or("<row>")
                    .to_string(),
                _ => "<row>".to_string(),
            };
            Error::Malformed {
                record: i,
                field,
                message: e.to_string(),
            }
        })?;
        p.validate(i, range)?;
        out.push(p);
    }
    Ok(out)
}

const PARTICIPANT_FIELDS: [&str; 7] = [
    "participant_id",
    "first_language",
    "self_proficiency",
    "age_band",
    "education",
    "hours_reading_per_week",
    "locale",
];

pub fn write_participants<W: Write>(writer: W, participants: &[Participant]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in participants {
        w.serialize(p)
            .map_err(|e| Error::io("<participants>", std::io::Error::other(e)))?;
    }
    w.flush().map_err(|e| Error::io("<participants>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "participant_id,first_language,self_proficiency,age_band,education,hours_reading_per_week,locale\n";

    #[test]
    fn reads_and_writes() {
        let text = format!("# seed=0\n{HEADER}p1,English,5,25-34,BA,7.5,US\np2,Tamil,3,18-24,MA,2,IN\n");
        let ps = read_participants(text.as_bytes(), ProficiencyRange::default()).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].age_band, AgeBand::From25To34);
        let mut buf = Vec::new();
        write_participants(&mut buf, &ps).unwrap();
        let again = read_participants(buf.as_slice(), ProficiencyRange::default()).unwrap();
        assert_eq!(ps, again);
    }

    #[test]
    fn proficiency_outside_range_is_rejected() {
        let text = format!("{HEADER}p1,English,9,25-34,BA,7.5,US\n");
        match read_participants(text.as_bytes(), ProficiencyRange::default()).unwrap_err() {
            Error::Malformed { field, .. } => assert_eq!(field, "self_proficiency"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn empty_first_language_is_rejected() {
        let text = format!("{HEADER}p1,,3,25-34,BA,7.5,US\n");
        assert!(read_participants(text.as_bytes(), ProficiencyRange::default()).is_err());
    }

    #[test]
    fn age_band_spellings() {
        assert_eq!("25 – 34".parse::<AgeBand>(), Ok(AgeBand::From25To34));
        assert_eq!("65+".parse::<AgeBand>(), Ok(AgeBand::Over64));
        assert!("100-200".parse::<AgeBand>().is_err());
    }
}
