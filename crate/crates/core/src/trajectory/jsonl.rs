//! JSONL encodings for trajectories (`{"object":"o1","t":3,"x":12.5,"y":-4.0}`)
//! and discovered convoys.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Convoy, ObjectId, Point2D, Tick, TrajectoryDb};
use crate::jsonl::{JsonlError, JsonlErrorKind};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    object: ObjectId,
    t: Tick,
    x: f64,
    y: f64,
}

pub fn read_trajectories<R: BufRead>(reader: R) -> Result<TrajectoryDb, JsonlError> {
    let mut db = TrajectoryDb::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| JsonlError::new(line_no, JsonlErrorKind::Io(e)))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record =
            serde_json::from_str(&line).map_err(|e| JsonlError::new(line_no, JsonlErrorKind::Parse(e.to_string())))?;
        db.insert(rec.object, rec.t, Point2D::new(rec.x, rec.y))
            .map_err(|e| JsonlError::new(line_no, JsonlErrorKind::Invalid(e.to_string())))?;
    }
    Ok(db)
}

pub fn write_trajectories<W: Write>(db: &TrajectoryDb, mut out: W) -> std::io::Result<()> {
    for (t, object, p) in db.time_ordered() {
        let rec = Record { object: object.clone(), t, x: p.x, y: p.y };
        writeln!(out, "{}", serde_json::to_string(&rec).map_err(std::io::Error::other)?)?;
    }
    Ok(())
}

pub fn write_convoys<W: Write>(convoys: &[Convoy], mut out: W) -> std::io::Result<()> {
    for c in convoys {
        writeln!(out, "{}", serde_json::to_string(c).map_err(std::io::Error::other)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_line_parses() {
        let db = read_trajectories(r#"{"object":"o1","t":3,"x":12.5,"y":-4.0}"#.as_bytes()).unwrap();
        assert_eq!(db.position(&"o1".into(), 3), Some(Point2D::new(12.5, -4.0)));
        let mut out = Vec::new();
        write_trajectories(&db, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "{\"object\":\"o1\",\"t\":3,\"x\":12.5,\"y\":-4.0}\n");
    }

    #[test]
    fn bad_lines_report_their_number() {
        let text = "{\"object\":\"o1\",\"t\":3,\"x\":1.0,\"y\":1.0}\n{\"object\":\"o1\",\"t\":3,\"x\":1.0,\"y\":1.0}\n";
        assert_eq!(read_trajectories(text.as_bytes()).unwrap_err().line, 2);
        assert_eq!(read_trajectories("{\"object\":1}".as_bytes()).unwrap_err().line, 1);
    }
}
