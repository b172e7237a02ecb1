//! Line-delimited JSON encoding of proximity logs.
//!
//! One fingerprint per line:
//!
//! ```text
//! {"device":"aa:bb:cc:dd:ee:ff","t":1357000000.0,"aps":[{"ssid":"mycafe","bssid":"00:11:22:33:44:55","rssi":-55}]}
//! ```
//!
//! Lines may interleave devices in any order but each device's lines must
//! be strictly increasing in `t`. Blank lines are skipped.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{DeviceId, EnvironmentSnapshot, Fingerprint, LogError, ProximityLog, Timestamp};
use crate::jsonl::{JsonlError, JsonlErrorKind};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    device: DeviceId,
    t: Timestamp,
    aps: EnvironmentSnapshot,
}

#[derive(Serialize)]
struct RecordRef<'a> {
    device: &'a DeviceId,
    t: Timestamp,
    aps: &'a EnvironmentSnapshot,
}

/// Encode one fingerprint as a single JSON line (no trailing newline).
pub fn encode_line(device: &DeviceId, fp: &Fingerprint) -> String {
    serde_json::to_string(&RecordRef { device, t: fp.t, aps: &fp.env }).expect("fingerprint records always serialize")
}

pub fn decode_line(line: &str) -> Result<(DeviceId, Fingerprint), serde_json::Error> {
    let rec: Record = serde_json::from_str(line)?;
    Ok((rec.device, Fingerprint::new(rec.t, rec.aps)))
}

/// Ingest every line of `reader` into `log`.
pub fn read_into<R: BufRead>(reader: R, log: &mut ProximityLog) -> Result<usize, JsonlError> {
    let mut count = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| JsonlError::new(line_no, JsonlErrorKind::Io(e)))?;
        if line.trim().is_empty() {
            continue;
        }
        let (device, fp) =
            decode_line(&line).map_err(|e| JsonlError::new(line_no, JsonlErrorKind::Parse(e.to_string())))?;
        log.ingest(device, fp)
            .map_err(|e: LogError| JsonlError::new(line_no, JsonlErrorKind::Invalid(e.to_string())))?;
        count += 1;
    }
    Ok(count)
}

pub fn read_log<R: BufRead>(reader: R) -> Result<ProximityLog, JsonlError> {
    let mut log = ProximityLog::new();
    read_into(reader, &mut log)?;
    Ok(log)
}

/// Write the whole log, ordered by `(t, device)`.
pub fn write_log<W: Write>(log: &ProximityLog, mut out: W) -> std::io::Result<()> {
    for (device, fp) in log.time_ordered() {
        writeln!(out, "{}", encode_line(&device, fp))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{"device":"aa:bb:cc:dd:ee:ff","t":1357000000.0,"aps":[{"ssid":"mycafe","bssid":"00:11:22:33:44:55","rssi":-55}]}"#;

    #[test]
    fn documented_line_round_trips_verbatim() {
        let (device, fp) = decode_line(SAMPLE).unwrap();
        assert_eq!(device.to_string(), "aa:bb:cc:dd:ee:ff");
        assert_eq!(fp.t, 1357000000.0);
        assert_eq!(fp.env.observations()[0].ssid, "mycafe");
        assert_eq!(fp.env.observations()[0].rssi, -55);
        assert_eq!(encode_line(&device, &fp), SAMPLE);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = format!("{SAMPLE}\n\nnot json\n");
        let err = read_log(text.as_bytes()).unwrap_err();
        assert_eq!(err.line, 3);

        let text = format!("{SAMPLE}\n{SAMPLE}\n");
        let err = read_log(text.as_bytes()).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn rejects_duplicate_bssid_and_bad_mac() {
        let dup = r#"{"device":"aa:bb:cc:dd:ee:ff","t":1.0,"aps":[{"ssid":"a","bssid":"00:11:22:33:44:55","rssi":-1},{"ssid":"b","bssid":"00:11:22:33:44:55","rssi":-2}]}"#;
        assert!(read_log(dup.as_bytes()).is_err());
        let bad = r#"{"device":"phone","t":1.0,"aps":[]}"#;
        assert!(read_log(bad.as_bytes()).is_err());
    }

    #[test]
    fn interleaved_devices_are_accepted() {
        let text = "\
{\"device\":\"00:00:00:00:00:02\",\"t\":5.0,\"aps\":[]}
{\"device\":\"00:00:00:00:00:01\",\"t\":1.0,\"aps\":[]}
{\"device\":\"00:00:00:00:00:02\",\"t\":6.0,\"aps\":[]}
";
        let log = read_log(text.as_bytes()).unwrap();
        assert_eq!(log.device_count(), 2);
        assert_eq!(log.sample_count(), 3);
        let mut out = Vec::new();
        write_log(&log, &mut out).unwrap();
        let lines: Vec<_> = std::str::from_utf8(&out).unwrap().lines().map(String::from).collect();
        assert!(lines[0].contains("\"t\":1.0"));
    }
}
