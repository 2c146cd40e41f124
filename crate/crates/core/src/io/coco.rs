//! COCO-style JSON: ground-truth files (`{"images", "annotations", ...}`)
//! and result files (a bare list of annotations).

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Geometry, Mask, Shape, ShapeKind};
use crate::setmetrics::ShapeSet;

/// Shape sets keyed by image id, with the number of records read.
#[derive(Debug, Clone, PartialEq)]
pub struct CocoImages {
    pub sets: BTreeMap<u64, ShapeSet>,
    pub records: usize,
}

impl CocoImages {
    pub fn shape_count(&self) -> usize {
        self.sets.values().map(ShapeSet::len).sum()
    }
}

pub fn load_coco(path: &Path, kind: ShapeKind) -> Result<CocoImages> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_coco(&text, &path.display().to_string(), kind)
}

/// Parses either a ground-truth document or a result list. Boxes come from
/// `bbox`, masks from `segmentation` (RLE or polygons).
pub fn parse_coco(text: &str, label: &str, kind: ShapeKind) -> Result<CocoImages> {
    let fmt = |message: String| Error::Format {
        path: label.to_string(),
        message,
    };
    let doc: Value = serde_json::from_str(text).map_err(|e| fmt(format!("invalid JSON: {e}")))?;
    let (annotations, images) = match &doc {
        Value::Array(a) => (a.as_slice(), None),
        Value::Object(o) => {
            let ann = match o.get("annotations") {
                Some(Value::Array(a)) => a.as_slice(),
                Some(_) => return Err(fmt("'annotations' is not a list".into())),
                None => &[],
            };
            let images = match o.get("images") {
                Some(Value::Array(a)) => Some(a.as_slice()),
                Some(_) => return Err(fmt("'images' is not a list".into())),
                None => None,
            };
            (ann, images)
        }
        _ => return Err(fmt("expected a JSON list or object".into())),
    };

    let mut shapes: BTreeMap<u64, Vec<Shape>> = BTreeMap::new();
    for (index, img) in images.unwrap_or(&[]).iter().enumerate() {
        let id = img
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| fmt(format!("image entry {index} has no integer 'id'")))?;
        shapes.entry(id).or_default();
    }
    for (index, rec) in annotations.iter().enumerate() {
        let err = |message: String| Error::Record {
            path: label.to_string(),
            index,
            message,
        };
        let obj = rec
            .as_object()
            .ok_or_else(|| err("not a JSON object".into()))?;
        let image_id = obj
            .get("image_id")
            .and_then(Value::as_u64)
            .ok_or_else(|| err("missing integer 'image_id'".into()))?;
        let geometry = match kind {
            ShapeKind::Box => Geometry::Box(parse_bbox(obj).map_err(err)?),
            ShapeKind::Mask => Geometry::Mask(parse_segmentation(obj).map_err(err)?),
        };
        let mut shape = Shape {
            geometry,
            score: None,
            class_id: None,
        };
        if let Some(v) = obj.get("score") {
            let s = v
                .as_f64()
                .ok_or_else(|| err("'score' is not a number".into()))?;
            shape = shape.with_score(s).map_err(|e| err(e.to_string()))?;
        }
        if let Some(v) = obj.get("category_id") {
            let c = v
                .as_u64()
                .and_then(|c| u32::try_from(c).ok())
                .ok_or_else(|| err("'category_id' is not a non-negative integer".into()))?;
            shape = shape.with_class(c);
        }
        shapes.entry(image_id).or_default().push(shape);
    }
    let sets = shapes
        .into_iter()
        .map(|(id, v)| Ok((id, ShapeSet::new(v)?.with_id(id))))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(CocoImages {
        sets,
        records: annotations.len(),
    })
}

fn numbers(v: &Value, what: &str) -> std::result::Result<Vec<f64>, String> {
    v.as_array()
        .ok_or_else(|| format!("'{what}' is not a list"))?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| format!("'{what}' holds a non-number"))
        })
        .collect()
}

fn parse_bbox(obj: &Map<String, Value>) -> std::result::Result<BoundingBox, String> {
    let v = numbers(obj.get("bbox").ok_or("missing 'bbox'")?, "bbox")?;
    if v.len() != 4 {
        return Err(format!("'bbox' needs 4 numbers, got {}", v.len()));
    }
    if !(v[2] > 0.0 && v[3] > 0.0) {
        return Err(format!("non-positive box size {} x {}", v[2], v[3]));
    }
    BoundingBox::from_xywh(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_segmentation(obj: &Map<String, Value>) -> std::result::Result<Mask, String> {
    let seg = obj.get("segmentation").ok_or("missing 'segmentation'")?;
    let cells = match seg {
        Value::Object(rle) => rle_cells(rle)?,
        Value::Array(polys) => {
            let polys = polys
                .iter()
                .map(|p| numbers(p, "segmentation"))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            rasterize_polygons(&polys)?
        }
        _ => return Err("'segmentation' is neither RLE nor polygons".into()),
    };
    Mask::from_cells(&cells).map_err(|_| "segmentation covers no pixel".to_string())
}

fn rle_cells(rle: &Map<String, Value>) -> std::result::Result<Vec<(i64, i64)>, String> {
    let size = numbers(rle.get("size").ok_or("RLE without 'size'")?, "size")?;
    if size.len() != 2 || size.iter().any(|&x| x < 0.0 || x.fract() != 0.0) {
        return Err("RLE 'size' must be [height, width]".into());
    }
    let (h, w) = (size[0] as usize, size[1] as usize);
    let counts = match rle.get("counts").ok_or("RLE without 'counts'")? {
        Value::String(s) => decode_rle_string(s)?,
        v => numbers(v, "counts")?
            .into_iter()
            .map(|c| {
                if c >= 0.0 && c.fract() == 0.0 {
                    Ok(c as u64)
                } else {
                    Err(format!("invalid RLE count {c}"))
                }
            })
            .collect::<std::result::Result<Vec<_>, String>>()?,
    };
    let total: u64 = counts.iter().sum();
    if total != (h * w) as u64 {
        return Err(format!("RLE counts sum to {total}, expected {}", h * w));
    }
    // Runs alternate background/foreground over column-major pixel order.
    let mut cells = Vec::new();
    let mut pos = 0usize;
    for (k, &c) in counts.iter().enumerate() {
        let c = c as usize;
        if k % 2 == 1 {
            for idx in pos..pos + c {
                cells.push(((idx / h) as i64, (idx % h) as i64));
            }
        }
        pos += c;
    }
    Ok(cells)
}

/// Decodes the compressed COCO RLE string: 5-bit groups with a continuation
/// bit, sign-extended, and counts after the second stored as differences.
pub fn decode_rle_string(s: &str) -> std::result::Result<Vec<u64>, String> {
    let bytes = s.as_bytes();
    let mut counts: Vec<i64> = Vec::new();
    let mut p = 0;
    while p < bytes.len() {
        let mut x: i64 = 0;
        let mut k = 0;
        loop {
            let Some(&b) = bytes.get(p) else {
                return Err("truncated compressed RLE".into());
            };
            if !(48..48 + 64).contains(&b) || k > 12 {
                return Err("invalid compressed RLE".into());
            }
            let c = (b - 48) as i64;
            x |= (c & 0x1f) << (5 * k);
            p += 1;
            k += 1;
            if c & 0x20 == 0 {
                if c & 0x10 != 0 {
                    x |= -1i64 << (5 * k);
                }
                break;
            }
        }
        if counts.len() > 2 {
            x += counts[counts.len() - 2];
        }
        counts.push(x);
    }
    counts
        .into_iter()
        .map(|c| u64::try_from(c).map_err(|_| "negative RLE count".to_string()))
        .collect()
}

/// Encodes counts in the compressed COCO RLE string form.
pub fn encode_rle_string(counts: &[u64]) -> String {
    let mut out = String::new();
    for (i, &c) in counts.iter().enumerate() {
        let mut x = c as i64;
        if i > 2 {
            x -= counts[i - 2] as i64;
        }
        loop {
            let mut b = x & 0x1f;
            x >>= 5;
            let more = if b & 0x10 != 0 { x != -1 } else { x != 0 };
            if more {
                b |= 0x20;
            }
            out.push((b as u8 + 48) as char);
            if !more {
                break;
            }
        }
    }
    out
}

/// Pixels whose centres lie inside any polygon (even-odd rule).
fn rasterize_polygons(polys: &[Vec<f64>]) -> std::result::Result<Vec<(i64, i64)>, String> {
    let mut cells = std::collections::BTreeSet::new();
    for p in polys {
        if p.len() < 6 || p.len() % 2 != 0 {
            return Err("polygon needs at least three (x, y) points".into());
        }
        let pts: Vec<(f64, f64)> = p.chunks(2).map(|c| (c[0], c[1])).collect();
        let x0 = pts
            .iter()
            .map(|q| q.0)
            .fold(f64::INFINITY, f64::min)
            .floor() as i64;
        let x1 = pts
            .iter()
            .map(|q| q.0)
            .fold(f64::NEG_INFINITY, f64::max)
            .ceil() as i64;
        let y0 = pts
            .iter()
            .map(|q| q.1)
            .fold(f64::INFINITY, f64::min)
            .floor() as i64;
        let y1 = pts
            .iter()
            .map(|q| q.1)
            .fold(f64::NEG_INFINITY, f64::max)
            .ceil() as i64;
        for y in y0..y1 {
            for x in x0..x1 {
                if inside(&pts, x as f64 + 0.5, y as f64 + 0.5) {
                    cells.insert((x, y));
                }
            }
        }
    }
    Ok(cells.into_iter().collect())
}

fn inside(pts: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut c = false;
    let n = pts.len();
    for i in 0..n {
        let (xi, yi) = pts[i];
        let (xj, yj) = pts[(i + n - 1) % n];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            c = !c;
        }
    }
    c
}

/// Reference and prediction sets for every image id found in either file;
/// missing sides are empty.
pub fn pair_images(
    reference: &CocoImages,
    prediction: &CocoImages,
) -> Vec<(u64, ShapeSet, ShapeSet)> {
    let ids: std::collections::BTreeSet<u64> = reference
        .sets
        .keys()
        .chain(prediction.sets.keys())
        .copied()
        .collect();
    ids.into_iter()
        .map(|id| {
            let get = |m: &CocoImages| {
                m.sets
                    .get(&id)
                    .cloned()
                    .unwrap_or_else(|| ShapeSet::empty().with_id(id))
            };
            (id, get(reference), get(prediction))
        })
        .collect()
}

fn annotation(image_id: u64, s: &Shape, id: Option<usize>) -> Value {
    let mut o = Map::new();
    if let Some(id) = id {
        o.insert("id".into(), json!(id));
    }
    o.insert("image_id".into(), json!(image_id));
    if let Some(c) = s.class_id {
        o.insert("category_id".into(), json!(c));
    }
    match &s.geometry {
        Geometry::Box(b) => {
            o.insert(
                "bbox".into(),
                json!([b.x_min, b.y_min, b.width(), b.height()]),
            );
        }
        Geometry::Mask(m) => {
            o.insert("segmentation".into(), mask_rle(m));
        }
    }
    if let Some(score) = s.score {
        o.insert("score".into(), json!(score));
    }
    Value::Object(o)
}

// Uncompressed RLE of a mask on a canvas starting at the origin.
fn mask_rle(m: &Mask) -> Value {
    let (x0, y0) = m.origin();
    let (w, h) = m.dims();
    let (cw, ch) = ((x0.max(0) as usize) + w, (y0.max(0) as usize) + h);
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for x in 0..cw as i64 {
        for y in 0..ch as i64 {
            let v = m.get(x, y);
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
    }
    counts.push(run);
    json!({ "size": [ch, cw], "counts": counts })
}

/// Ground-truth document with one image entry per set.
pub fn coco_reference_json(images: &[(u64, &ShapeSet)]) -> Value {
    let mut anns = Vec::new();
    let mut classes = std::collections::BTreeSet::new();
    for (image_id, set) in images {
        for s in set.shapes() {
            anns.push(annotation(*image_id, s, Some(anns.len() + 1)));
            if let Some(c) = s.class_id {
                classes.insert(c);
            }
        }
    }
    json!({
        "images": images.iter().map(|(id, _)| json!({ "id": id })).collect::<Vec<_>>(),
        "annotations": anns,
        "categories": classes.iter().map(|c| json!({ "id": c })).collect::<Vec<_>>(),
    })
}

/// Result list with one record per shape.
pub fn coco_results_json(images: &[(u64, &ShapeSet)]) -> Value {
    Value::Array(
        images
            .iter()
            .flat_map(|(id, set)| set.shapes().iter().map(|s| annotation(*id, s, None)))
            .collect(),
    )
}
