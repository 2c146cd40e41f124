//! File formats: COCO-style JSON for shape sets, MOT-style CSV for tracks,
//! and scenario dumps with a JSON sidecar.

mod coco;
mod dump;
mod mot;

pub use coco::{
    coco_reference_json, coco_results_json, decode_rle_string, encode_rle_string, load_coco,
    pair_images, parse_coco, CocoImages,
};
pub use dump::{dump_scenario, load_dumped_detection, load_dumped_tracking, ScenarioSidecar};
pub use mot::{align_windows, load_mot, parse_mot, write_mot, MotTracks};
