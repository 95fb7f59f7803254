//! Archive scene identifiers of the form `YYYYMMDD_HHMMSS_XX_satid`.

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneId {
    /// Acquisition time, UTC.
    pub timestamp: DateTime<Utc>,
    /// The two-digit field between the time and the satellite.
    pub sequence: String,
    pub satellite_id: String,
}

impl std::fmt::Display for SceneId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}_{}_{}", self.timestamp.format("%Y%m%d_%H%M%S"), self.sequence, self.satellite_id)
    }
}

impl std::str::FromStr for SceneId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_scene_id(s)
    }
}

pub fn parse_scene_id(id: &str) -> Result<SceneId> {
    let fail = |reason: &str| Error::SceneId { id: id.to_string(), reason: reason.to_string() };
    let parts: Vec<&str> = id.split('_').collect();
    let [date, time, sequence, satellite] = parts[..] else {
        return Err(fail("expected four underscore-separated fields"));
    };
    let digits = |s: &str, n: usize| s.len() == n && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(date, 8) {
        return Err(fail("date must be YYYYMMDD"));
    }
    if !digits(time, 6) {
        return Err(fail("time must be HHMMSS"));
    }
    if !digits(sequence, 2) {
        return Err(fail("third field must be two digits"));
    }
    if satellite.is_empty() || !satellite.bytes().all(|b| b.is_ascii_alphanumeric()) {
        return Err(fail("satellite id must be alphanumeric"));
    }
    let naive = NaiveDateTime::parse_from_str(&format!("{date}{time}"), "%Y%m%d%H%M%S")
        .map_err(|e| fail(&format!("invalid date or time ({e})")))?;
    Ok(SceneId {
        timestamp: Utc.from_utc_datetime(&naive),
        sequence: sequence.to_string(),
        satellite_id: satellite.to_string(),
    })
}
