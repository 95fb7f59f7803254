//! Two-line element sets: enough of the format to get the mean motion, the
//! epoch and the identifiers, with full column and checksum validation.

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LINE_LENGTH: usize = 69;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TleError {
    #[error("TLE line {line} has {len} characters, expected 69")]
    BadLength { line: u8, len: usize },

    #[error("TLE line {line} does not start with '{line}'")]
    BadLineNumber { line: u8 },

    #[error("TLE line {line}: column {column} must be a space")]
    MissingSpace { line: u8, column: usize },

    #[error("TLE line {line}: checksum digit is {found}, computed {expected}")]
    BadChecksum { line: u8, expected: u8, found: char },

    #[error("TLE line {line}: malformed {field} field {text:?}")]
    BadField { line: u8, field: &'static str, text: String },

    #[error("TLE satellite numbers differ between lines ({0} vs {1})")]
    SatelliteMismatch(String, String),

    #[error("TLE mean motion {0} rev/day is outside (0, 20)")]
    MeanMotionOutOfRange(f64),
}

/// Modulo-10 sum over the first 68 columns: digits count their value, '-'
/// counts one, everything else zero.
pub fn checksum(line: &str) -> u8 {
    let sum: u32 = line
        .chars()
        .take(LINE_LENGTH - 1)
        .map(|c| match c {
            '-' => 1,
            c => c.to_digit(10).unwrap_or(0),
        })
        .sum();
    (sum % 10) as u8
}

/// Whether the final column holds the line's checksum.
pub fn checksum_valid(line: &str) -> bool {
    line.len() == LINE_LENGTH && line.is_ascii() && line.as_bytes()[LINE_LENGTH - 1] == b'0' + checksum(line)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TleRecord {
    /// Catalog number as written (five characters, may be alpha-5).
    pub satellite_number: String,
    pub classification: char,
    pub international_designator: String,
    pub epoch: DateTime<Utc>,
    pub mean_motion_rev_per_day: f64,
    pub inclination_deg: f64,
    pub eccentricity: f64,
    pub revolution_number: u32,
    pub checksums: [u8; 2],
    lines: [String; 2],
}

/// 1-based inclusive column range.
fn cols(line: &str, from: usize, to: usize) -> &str {
    &line[from - 1..to]
}

fn field<T: std::str::FromStr>(line_no: u8, line: &str, from: usize, to: usize, name: &'static str) -> Result<T, TleError> {
    let text = cols(line, from, to);
    text.trim().parse().map_err(|_| TleError::BadField { line: line_no, field: name, text: text.to_string() })
}

/// A number written with an implied leading decimal point, as the
/// eccentricity is.
fn implied_decimal(line_no: u8, line: &str, from: usize, to: usize, name: &'static str) -> Result<f64, TleError> {
    let text = cols(line, from, to);
    if !text.chars().all(|c| c.is_ascii_digit()) {
        return Err(TleError::BadField { line: line_no, field: name, text: text.to_string() });
    }
    Ok(format!("0.{text}").parse().expect("digits form a decimal"))
}

/// Exponent-notation field such as " 12345-4" or "-11606-4".
fn check_exponent_field(line_no: u8, line: &str, from: usize, to: usize, name: &'static str) -> Result<(), TleError> {
    let text = cols(line, from, to);
    let b = text.as_bytes();
    let ok = matches!(b[0], b' ' | b'+' | b'-')
        && b[1..6].iter().all(|c| c.is_ascii_digit() || *c == b' ')
        && matches!(b[6], b'+' | b'-' | b' ')
        && b[7].is_ascii_digit();
    if ok {
        Ok(())
    } else {
        Err(TleError::BadField { line: line_no, field: name, text: text.to_string() })
    }
}

fn check_line(line_no: u8, line: &str, spaces: &[usize]) -> Result<(), TleError> {
    if line.len() != LINE_LENGTH || !line.is_ascii() {
        return Err(TleError::BadLength { line: line_no, len: line.chars().count() });
    }
    if line.as_bytes()[0] != b'0' + line_no {
        return Err(TleError::BadLineNumber { line: line_no });
    }
    let found = line.as_bytes()[LINE_LENGTH - 1] as char;
    let expected = checksum(line);
    if found.to_digit(10) != Some(u32::from(expected)) {
        return Err(TleError::BadChecksum { line: line_no, expected, found });
    }
    if let Some(&column) = spaces.iter().find(|&&c| line.as_bytes()[c - 1] != b' ') {
        return Err(TleError::MissingSpace { line: line_no, column });
    }
    Ok(())
}

fn epoch_from(year2: u32, day: f64) -> Option<DateTime<Utc>> {
    // Two-digit years 57..99 are 1957..1999.
    let year = if year2 < 57 { 2000 + year2 } else { 1900 + year2 } as i32;
    let start = NaiveDate::from_ymd_opt(year, 1, 1)?.and_hms_opt(0, 0, 0)?;
    let days_in_year = if NaiveDate::from_ymd_opt(year, 12, 31)?.ordinal0() == 365 { 366.0 } else { 365.0 };
    if !(1.0..days_in_year + 1.0).contains(&day) {
        return None;
    }
    let micros = ((day - 1.0) * 86_400e6).round() as i64;
    Some(Utc.from_utc_datetime(&(start + Duration::microseconds(micros))))
}

/// Parses and validates a two-line element set.
pub fn parse_tle(line1: &str, line2: &str) -> Result<TleRecord, TleError> {
    let line1 = line1.trim_end_matches(['\r', '\n']);
    let line2 = line2.trim_end_matches(['\r', '\n']);
    check_line(1, line1, &[2, 9, 18, 33, 44, 53, 62, 64])?;
    check_line(2, line2, &[2, 8, 17, 26, 34, 43, 52])?;

    let sat1 = cols(line1, 3, 7);
    let sat2 = cols(line2, 3, 7);
    let sat_ok = |s: &str| s.chars().all(|c| c.is_ascii_alphanumeric()) && s[1..].chars().all(|c| c.is_ascii_digit());
    if !sat_ok(sat1) {
        return Err(TleError::BadField { line: 1, field: "satellite number", text: sat1.to_string() });
    }
    if sat1 != sat2 {
        return Err(TleError::SatelliteMismatch(sat1.to_string(), sat2.to_string()));
    }
    let classification = line1.as_bytes()[7] as char;
    if !matches!(classification, 'U' | 'C' | 'S') {
        return Err(TleError::BadField { line: 1, field: "classification", text: classification.to_string() });
    }
    let year2: u32 = field(1, line1, 19, 20, "epoch year")?;
    if !cols(line1, 19, 20).chars().all(|c| c.is_ascii_digit()) {
        return Err(TleError::BadField { line: 1, field: "epoch year", text: cols(line1, 19, 20).to_string() });
    }
    let day: f64 = field(1, line1, 21, 32, "epoch day")?;
    let epoch = epoch_from(year2, day).ok_or_else(|| TleError::BadField {
        line: 1,
        field: "epoch day",
        text: cols(line1, 21, 32).to_string(),
    })?;
    let _: f64 = field(1, line1, 34, 43, "mean motion derivative")?;
    check_exponent_field(1, line1, 45, 52, "mean motion second derivative")?;
    check_exponent_field(1, line1, 54, 61, "drag term")?;
    let _: u8 = field(1, line1, 63, 63, "ephemeris type")?;
    let _: u32 = field(1, line1, 65, 68, "element set number")?;

    let inclination_deg: f64 = field(2, line2, 9, 16, "inclination")?;
    let _: f64 = field(2, line2, 18, 25, "right ascension")?;
    let eccentricity = implied_decimal(2, line2, 27, 33, "eccentricity")?;
    let _: f64 = field(2, line2, 35, 42, "argument of perigee")?;
    let _: f64 = field(2, line2, 44, 51, "mean anomaly")?;
    let mean_motion: f64 = field(2, line2, 53, 63, "mean motion")?;
    let revolution_number: u32 = field(2, line2, 64, 68, "revolution number")?;
    if !(mean_motion > 0.0 && mean_motion < 20.0) {
        return Err(TleError::MeanMotionOutOfRange(mean_motion));
    }

    Ok(TleRecord {
        satellite_number: sat1.to_string(),
        classification,
        international_designator: cols(line1, 10, 17).trim_end().to_string(),
        epoch,
        mean_motion_rev_per_day: mean_motion,
        inclination_deg,
        eccentricity,
        revolution_number,
        checksums: [checksum(line1), checksum(line2)],
        lines: [line1.to_string(), line2.to_string()],
    })
}

/// Reads the first two non-empty lines of a TLE file, skipping an optional
/// leading name line.
pub fn parse_tle_text(text: &str) -> Result<TleRecord, TleError> {
    let lines: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
    let start = lines.iter().position(|l| l.starts_with("1 ")).unwrap_or(0);
    let l1 = lines.get(start).copied().unwrap_or("");
    let l2 = lines.get(start + 1).copied().unwrap_or("");
    parse_tle(l1, l2)
}

fn with_checksum(mut body: String) -> String {
    body.truncate(LINE_LENGTH - 1);
    let c = checksum(&body);
    body.push(char::from(b'0' + c));
    body
}

impl TleRecord {
    /// The two lines, with the mean motion field and checksums written from
    /// the record. Unmodified records reproduce their input.
    pub fn to_lines(&self) -> [String; 2] {
        let mut l2 = self.lines[1].clone();
        l2.replace_range(52..63, &format!("{:11.8}", self.mean_motion_rev_per_day));
        [with_checksum(self.lines[0].clone()), with_checksum(l2)]
    }

    /// A minimal, valid element set for the given epoch and mean motion.
    pub fn synthesize(satellite_number: u32, epoch: DateTime<Utc>, mean_motion_rev_per_day: f64) -> Result<Self, TleError> {
        let year2 = epoch.year().rem_euclid(100);
        let start = Utc.with_ymd_and_hms(epoch.year(), 1, 1, 0, 0, 0).single().expect("January 1st exists");
        let day = 1.0 + (epoch - start).num_microseconds().unwrap_or(0) as f64 / 86_400e6;
        let l1 = format!(
            "1 {satellite_number:05}U 22001A   {year2:02}{day:012.8}  .00000000  00000-0  00000-0 0  999 "
        );
        let l2 = format!(
            "2 {satellite_number:05}  97.4500 120.0000 0001000  90.0000 270.0000 {mean_motion_rev_per_day:11.8}    1 "
        );
        parse_tle(&with_checksum(l1), &with_checksum(l2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ISS1: &str = "1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927";
    const ISS2: &str = "2 25544  51.6416 247.4627 0006703 130.5360 325.0288 15.72125391563537";

    #[test]
    fn parses_reference_set() {
        let t = parse_tle(ISS1, ISS2).unwrap();
        assert_eq!(t.satellite_number, "25544");
        assert_eq!(t.international_designator, "98067A");
        assert_eq!(t.mean_motion_rev_per_day, 15.72125391);
        assert_eq!(t.eccentricity, 0.0006703);
        assert_eq!(t.revolution_number, 56353);
        assert_eq!(t.epoch.format("%Y-%m-%d").to_string(), "2008-09-20");
        assert_eq!(t.checksums, [7, 7]);
    }

    #[test]
    fn round_trip() {
        let t = parse_tle(ISS1, ISS2).unwrap();
        assert_eq!(t.to_lines(), [ISS1.to_string(), ISS2.to_string()]);
    }

    #[test]
    fn synthesized_mean_motion() {
        let epoch = Utc.with_ymd_and_hms(2022, 5, 30, 17, 38, 6).unwrap();
        let t = TleRecord::synthesize(43013, epoch, 15.15).unwrap();
        assert_eq!(t.mean_motion_rev_per_day, 15.15);
        assert!(t.to_lines()[1].contains("15.15000000"));
        assert!((t.epoch - epoch).num_milliseconds().abs() < 5);
        let [a, b] = t.to_lines();
        assert_eq!(parse_tle(&a, &b).unwrap(), t);
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(parse_tle(&ISS1[..68], ISS2), Err(TleError::BadLength { line: 1, .. })));
        let mut bad = ISS2.to_string();
        bad.replace_range(68..69, "8");
        assert!(matches!(parse_tle(ISS1, &bad), Err(TleError::BadChecksum { line: 2, .. })));
        // Letter in the mean motion, checksum recomputed.
        let mut bad = ISS2.to_string();
        bad.replace_range(54..55, "x");
        let bad = with_checksum(bad);
        assert!(matches!(parse_tle(ISS1, &bad), Err(TleError::BadField { field: "mean motion", .. })));
        let mut bad = ISS2.to_string();
        bad.replace_range(52..63, "25.00000000");
        let bad = with_checksum(bad);
        assert!(matches!(parse_tle(ISS1, &bad), Err(TleError::MeanMotionOutOfRange(_))));
        assert!(matches!(parse_tle(ISS2, ISS1), Err(TleError::BadLineNumber { line: 1 })));
    }

    #[test]
    fn name_line_is_skipped() {
        let text = format!("ISS (ZARYA)\n{ISS1}\n{ISS2}\n");
        assert_eq!(parse_tle_text(&text).unwrap().satellite_number, "25544");
    }

    #[test]
    fn every_digit_mutation_is_caught() {
        for line in [ISS1, ISS2] {
            for (i, c) in line.char_indices() {
                let Some(d) = c.to_digit(10) else { continue };
                for nd in (0..10).filter(|&nd| nd != d) {
                    let mut m = line.to_string();
                    m.replace_range(i..i + 1, &nd.to_string());
                    assert!(!checksum_valid(&m), "{m}");
                }
            }
        }
    }
}
