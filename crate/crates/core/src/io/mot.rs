//! MOT-style CSV track files: `frame,id,x,y,w,h,conf,...`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Shape};
use crate::setmetrics::{Track, TrackSet};

/// Tracks parsed from a file and the number of rows read.
#[derive(Debug, Clone, PartialEq)]
pub struct MotTracks {
    pub tracks: TrackSet,
    pub rows: usize,
}

pub fn load_mot(path: &Path) -> Result<MotTracks> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    parse_mot(file, &path.display().to_string())
}

/// Rows sharing an id form one track; its domain may have gaps. The window
/// is the observed frame range. Columns after the box are ignored.
pub fn parse_mot<R: Read>(reader: R, label: &str) -> Result<MotTracks> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut states: BTreeMap<u64, BTreeMap<i64, Shape>> = BTreeMap::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format {
            path: label.to_string(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let err = |message: String| Error::Record {
            path: label.to_string(),
            index: line,
            message,
        };
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() < 6 {
            return Err(err(format!(
                "expected at least 6 fields, got {}",
                rec.len()
            )));
        }
        let num = |k: usize, name: &str| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("{name} '{}' is not a number", &rec[k])))
        };
        let int = |k: usize, name: &str| -> Result<f64> {
            let v = num(k, name)?;
            if v.fract() != 0.0 {
                return Err(err(format!("{name} '{}' is not an integer", &rec[k])));
            }
            Ok(v)
        };
        let frame = int(0, "frame")? as i64;
        let id = int(1, "id")?;
        if id < 0.0 {
            return Err(err(format!("negative id {id}")));
        }
        let (x, y, w, h) = (num(2, "x")?, num(3, "y")?, num(4, "w")?, num(5, "h")?);
        if !(w > 0.0 && h > 0.0) {
            return Err(err(format!("non-positive box size {w} x {h}")));
        }
        let b = BoundingBox::from_xywh(x, y, w, h).map_err(|e| err(e.to_string()))?;
        let track = states.entry(id as u64).or_default();
        if track.insert(frame, Shape::from_box(b)).is_some() {
            return Err(err(format!("duplicate (frame, id) = ({frame}, {id})")));
        }
        rows += 1;
    }
    let tracks = states
        .into_iter()
        .map(|(id, st)| Track::new(id, st))
        .collect::<Result<Vec<_>>>()?;
    Ok(MotTracks {
        tracks: TrackSet::from_tracks(tracks)?,
        rows,
    })
}

/// Gives both track sets the smallest window covering both.
pub fn align_windows(a: TrackSet, b: TrackSet) -> Result<(TrackSet, TrackSet)> {
    let window = match (a.observed_range(), b.observed_range()) {
        (Some(x), Some(y)) => (x.0.min(y.0), x.1.max(y.1)),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => a.window(),
    };
    Ok((a.with_window(window)?, b.with_window(window)?))
}

/// Writes boxes as `frame,id,x,y,w,h,1,-1,-1,-1` rows ordered by frame, then id.
pub fn write_mot<W: Write>(set: &TrackSet, out: W) -> Result<()> {
    let mut rows: Vec<(i64, u64, BoundingBox)> = Vec::new();
    for tr in set.tracks() {
        for (&t, s) in tr.states() {
            let b = s
                .as_box()
                .ok_or_else(|| Error::InvalidShape("MOT files hold boxes only".into()))?;
            rows.push((t, tr.label, *b));
        }
    }
    rows.sort_by_key(|r| (r.0, r.1));
    let mut w = csv::Writer::from_writer(out);
    for (t, id, b) in rows {
        w.write_record([
            t.to_string(),
            id.to_string(),
            b.x_min.to_string(),
            b.y_min.to_string(),
            b.width().to_string(),
            b.height().to_string(),
            "1".into(),
            "-1".into(),
            "-1".into(),
            "-1".into(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragmented_track() {
        let m = parse_mot("1,7,0,0,10,10,1\n3,7,1,1,10,10,1\n".as_bytes(), "x").unwrap();
        assert_eq!(m.rows, 2);
        assert_eq!(m.tracks.len(), 1);
        let tr = &m.tracks.tracks()[0];
        assert_eq!(tr.states().keys().copied().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(m.tracks.window(), (1, 3));
    }

    #[test]
    fn empty_file() {
        let m = parse_mot("".as_bytes(), "x").unwrap();
        assert!(m.tracks.is_empty());
        assert_eq!(m.rows, 0);
    }

    #[test]
    fn rejects_bad_rows() {
        match parse_mot("1,1,0,0,1,1\n1,1,0,0,2,2\n".as_bytes(), "x") {
            Err(Error::Record { index, message, .. }) => {
                assert_eq!(index, 2);
                assert!(message.contains("duplicate"));
            }
            other => panic!("{other:?}"),
        }
        match parse_mot("1,1,0,0,1,1\n2,1,a,0,1,1\n".as_bytes(), "x") {
            Err(Error::Record { index, .. }) => assert_eq!(index, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_mot("1,1,0,0,0,1\n".as_bytes(), "x").is_err());
        assert!(parse_mot("1,1,0,0\n".as_bytes(), "x").is_err());
    }

    #[test]
    fn write_read_round_trip() {
        let m = parse_mot(
            "2,1,0.5,0,10,10\n4,1,1,1,3,3\n3,2,5,5,2,2\n".as_bytes(),
            "x",
        )
        .unwrap();
        let mut buf = Vec::new();
        write_mot(&m.tracks, &mut buf).unwrap();
        let back = parse_mot(buf.as_slice(), "y").unwrap();
        assert_eq!(back.tracks, m.tracks);
    }
}
