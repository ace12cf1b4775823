//! File-emitting visualization: time × channel heatmap images and
//! interpolated scalp topography grids.
//!
//! Relevance is signed, so both renderers use a diverging blue–white–red
//! scale centered exactly at zero: warm cells argue for the decision, cool
//! cells against it, white cells are neutral. All outputs are deterministic
//! byte-for-byte given identical inputs.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, RgbImage};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::RelevanceMap;
use crate::error::{Error, Result};
use crate::montage::Montage;

/// Number of cells per side when callers don't choose one.
pub const DEFAULT_GRID_SIZE: usize = 64;

/// Scalp-map interpolation result: a square grid over `[-1, 1]²` where cells
/// outside the unit-radius head are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct TopographyGrid {
    /// Interpolated values, `grid[[row, col]]`; row 0 is the top of the head
    /// (y = +1 side), column 0 the left (x = −1 side). NaN marks cells
    /// outside the head.
    pub grid: Array2<f64>,
}

impl TopographyGrid {
    /// Coordinate bounds of the grid square on both axes.
    pub const EXTENT: [f64; 2] = [-1.0, 1.0];

    /// Cells per side.
    pub fn size(&self) -> usize {
        self.grid.nrows()
    }

    /// Center coordinates `(x, y)` of a cell.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        let cell = 2.0 / self.size() as f64;
        (
            -1.0 + (col as f64 + 0.5) * cell,
            1.0 - (row as f64 + 0.5) * cell,
        )
    }
}

/// Interpolates per-channel values onto a `grid_size × grid_size` scalp grid
/// by inverse-distance weighting (power 2) over all electrodes.
///
/// A cell lying within three quarters of a cell width of some electrode
/// takes that electrode's value exactly, which pins the map to the data at
/// the electrodes themselves; everywhere else the weighted average keeps the
/// surface inside the range of the inputs. Cells whose centers fall outside
/// the unit-radius head are NaN.
pub fn topography(
    values: &[f64],
    channels: &[String],
    montage: &Montage,
    grid_size: usize,
) -> Result<TopographyGrid> {
    if grid_size == 0 {
        return Err(Error::Argument("grid size must be at least 1".into()));
    }
    if values.len() != channels.len() {
        return Err(Error::Shape(format!(
            "{} values for {} channels",
            values.len(),
            channels.len()
        )));
    }
    if values.is_empty() {
        return Err(Error::Argument(
            "cannot interpolate an empty channel set".into(),
        ));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Validation(format!(
            "channel values must be finite, got {bad}"
        )));
    }
    let positions = montage.positions_for(channels)?;

    let cell = 2.0 / grid_size as f64;
    let snap_distance_sq = (0.75 * cell).powi(2);
    let grid = Array2::from_shape_fn((grid_size, grid_size), |(row, col)| {
        let x = -1.0 + (col as f64 + 0.5) * cell;
        let y = 1.0 - (row as f64 + 0.5) * cell;
        if x * x + y * y > 1.0 {
            return f64::NAN;
        }
        let mut nearest = (f64::INFINITY, 0);
        let mut numerator = 0.0;
        let mut denominator = 0.0;
        for (k, p) in positions.iter().enumerate() {
            let d_sq = (x - p[0]).powi(2) + (y - p[1]).powi(2);
            if d_sq < nearest.0 {
                nearest = (d_sq, k);
            }
            // Guard the division: snapped cells never use these terms.
            let w = 1.0 / d_sq.max(f64::MIN_POSITIVE);
            numerator += w * values[k];
            denominator += w;
        }
        if nearest.0 <= snap_distance_sq {
            values[nearest.1]
        } else {
            numerator / denominator
        }
    });
    Ok(TopographyGrid { grid })
}

/// Writes a topography grid as CSV, one row per grid row, with missing
/// (outside-head) cells spelled `nan`.
pub fn write_topography_csv(grid: &TopographyGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for row in grid.grid.rows() {
        let line = row
            .iter()
            .map(|&v| {
                if v.is_nan() {
                    "nan".to_string()
                } else {
                    format!("{v}")
                }
            })
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Writes a relevance map as CSV: a `time_ms` column followed by one column
/// per channel, one row per timepoint.
pub fn write_relevance_csv(map: &RelevanceMap, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "time_ms,{}", map.channels.join(","))?;
    for (t, row) in map.values.rows().into_iter().enumerate() {
        let cells = row.iter().map(|v| format!("{v}")).collect::<Vec<_>>();
        writeln!(out, "{},{}", map.time_ms[t], cells.join(","))?;
    }
    Ok(())
}

/// Reads a relevance map written by [`write_relevance_csv`]. Annotation
/// fields (trial index, decision) are not stored in the CSV and come back
/// zeroed.
pub fn read_relevance_csv(path: impl AsRef<Path>) -> Result<RelevanceMap> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("relevance CSV is empty".into()))?;
    let mut columns = header.split(',');
    if columns.next() != Some("time_ms") {
        return Err(Error::Format(
            "relevance CSV must start with a time_ms column".into(),
        ));
    }
    let channels: Vec<String> = columns.map(str::to_string).collect();
    if channels.is_empty() {
        return Err(Error::Format("relevance CSV has no channel columns".into()));
    }

    let mut time_ms = Vec::new();
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        let mut cells = line.split(',');
        let parse = |cell: Option<&str>| -> Result<f64> {
            cell.ok_or_else(|| Error::Format(format!("row {row}: missing column")))?
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {row}: {e}")))
        };
        time_ms.push(parse(cells.next())?);
        for _ in 0..channels.len() {
            values.push(parse(cells.next())?);
        }
        if cells.next().is_some() {
            return Err(Error::Format(format!(
                "row {row}: more columns than the header declares"
            )));
        }
    }
    let n_time = time_ms.len();
    let values = Array2::from_shape_vec((n_time, channels.len()), values)
        .map_err(|e| Error::Shape(e.to_string()))?;
    RelevanceMap::new(channels, time_ms, values)
}

/// Color-scale limits recorded next to each rendered heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapScale {
    /// Value rendered as full blue.
    pub vmin: f64,
    /// Value rendered as full red.
    pub vmax: f64,
}

const COLD_ANCHOR: [f64; 3] = [40.0, 76.0, 200.0];
// The warm anchor is the cold one with red and blue swapped, so negating a
// map mirrors every pixel exactly (R and B trade places, G is unchanged).
const WARM_ANCHOR: [f64; 3] = [200.0, 76.0, 40.0];

/// Diverging blue–white–red color for a normalized value in `[-1, 1]`.
pub fn diverging_color(u: f64) -> [u8; 3] {
    let u = u.clamp(-1.0, 1.0);
    let anchor = if u < 0.0 { COLD_ANCHOR } else { WARM_ANCHOR };
    let s = u.abs();
    let mut rgb = [0u8; 3];
    for (out, a) in rgb.iter_mut().zip(anchor) {
        *out = (255.0 + s * (a - 255.0)).round() as u8;
    }
    rgb
}

/// Pixels per matrix cell: large enough to see small maps, capped so big
/// maps stay near a 512-pixel canvas.
fn block_size(n_rows: usize, n_cols: usize) -> usize {
    (512 / n_rows.max(n_cols)).clamp(1, 32)
}

/// Renders a relevance map to a lossless PNG, one `block × block` pixel
/// square per (timepoint, channel) cell: time runs down the image, channels
/// run across. The color scale is symmetric about zero with limits
/// `±max|value|`; a sidecar JSON at `<path>.json` records those limits.
pub fn render_heatmap(map: &RelevanceMap, path: impl AsRef<Path>) -> Result<HeatmapScale> {
    let path = path.as_ref();
    if let Some(bad) = map.values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Validation(format!(
            "relevance values must be finite, got {bad}"
        )));
    }
    let mut limit = map.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if limit == 0.0 {
        limit = 1e-12;
    }

    let (n_time, n_channels) = map.values.dim();
    let block = block_size(n_time, n_channels);
    let mut img = RgbImage::new((n_channels * block) as u32, (n_time * block) as u32);
    for ((t, c), &v) in map.values.indexed_iter() {
        let rgb = image::Rgb(diverging_color(v / limit));
        for dy in 0..block {
            for dx in 0..block {
                img.put_pixel((c * block + dx) as u32, (t * block + dy) as u32, rgb);
            }
        }
    }
    let writer = BufWriter::new(File::create(path)?);
    PngEncoder::new(writer)
        .write_image(img.as_raw(), img.width(), img.height(), ExtendedColorType::Rgb8)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;

    let scale = HeatmapScale {
        vmin: -limit,
        vmax: limit,
    };
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".json");
    let out = BufWriter::new(File::create(sidecar)?);
    serde_json::to_writer_pretty(out, &scale)?;
    Ok(scale)
}

/// Color of cells outside the head in rendered topographies.
const MISSING_CELL_COLOR: [u8; 3] = [205, 205, 205];

/// Renders a topography grid to a lossless PNG with the same diverging
/// scale as [`render_heatmap`]; outside-head cells are neutral gray. A
/// sidecar JSON at `<path>.json` records the scale limits.
pub fn render_topography(grid: &TopographyGrid, path: impl AsRef<Path>) -> Result<HeatmapScale> {
    let path = path.as_ref();
    let mut limit = grid
        .grid
        .iter()
        .filter(|v| !v.is_nan())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if limit == 0.0 {
        limit = 1e-12;
    }
    let size = grid.size();
    let block = block_size(size, size);
    let mut img = RgbImage::new((size * block) as u32, (size * block) as u32);
    for ((row, col), &v) in grid.grid.indexed_iter() {
        let rgb = image::Rgb(if v.is_nan() {
            MISSING_CELL_COLOR
        } else {
            diverging_color(v / limit)
        });
        for dy in 0..block {
            for dx in 0..block {
                img.put_pixel((col * block + dx) as u32, (row * block + dy) as u32, rgb);
            }
        }
    }
    let writer = BufWriter::new(File::create(path)?);
    PngEncoder::new(writer)
        .write_image(img.as_raw(), img.width(), img.height(), ExtendedColorType::Rgb8)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;

    let scale = HeatmapScale {
        vmin: -limit,
        vmax: limit,
    };
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".json");
    let out = BufWriter::new(File::create(sidecar)?);
    serde_json::to_writer_pretty(out, &scale)?;
    Ok(scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test_map(values: Array2<f64>) -> RelevanceMap {
        let (n_time, n_channels) = values.dim();
        RelevanceMap::new(
            (0..n_channels).map(|c| format!("e{c}")).collect(),
            (0..n_time).map(|t| t as f64 * 10.0).collect(),
            values,
        )
        .unwrap()
    }

    fn two_electrode_montage() -> Montage {
        Montage::new(vec![
            ("L".to_string(), [-0.5, 0.0]),
            ("R".to_string(), [0.5, 0.0]),
        ])
        .unwrap()
    }

    #[test]
    fn constant_input_interpolates_to_that_constant_inside_the_head() {
        let montage = Montage::standard();
        let channels: Vec<String> = montage.names()[..8].to_vec();
        let values = vec![0.37; 8];
        let topo = topography(&values, &channels, &montage, 64).unwrap();
        let mut inside = 0;
        for ((row, col), &v) in topo.grid.indexed_iter() {
            let (x, y) = topo.cell_center(row, col);
            if x * x + y * y > 1.0 {
                assert!(v.is_nan(), "cell ({row},{col}) outside the head must be NaN");
            } else {
                assert_abs_diff_eq!(v, 0.37, epsilon = 1e-12);
                inside += 1;
            }
        }
        // Roughly π/4 of the square is inside the unit disk.
        assert!(inside > 64 * 64 / 2);
    }

    #[test]
    fn single_source_peaks_at_its_nearest_cell() {
        let montage = Montage::standard();
        let channels: Vec<String> = montage.names()[..5].to_vec();
        let mut values = vec![0.0; 5];
        values[2] = 0.9;
        let topo = topography(&values, &channels, &montage, 64).unwrap();

        let p = montage.position(&channels[2]).unwrap();
        let mut best = (f64::INFINITY, (0, 0));
        for row in 0..64 {
            for col in 0..64 {
                let (x, y) = topo.cell_center(row, col);
                let d = (x - p[0]).powi(2) + (y - p[1]).powi(2);
                if d < best.0 {
                    best = (d, (row, col));
                }
            }
        }
        let peak = topo
            .grid
            .indexed_iter()
            .filter(|(_, v)| !v.is_nan())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(peak.0, best.1);
        assert_abs_diff_eq!(*peak.1, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn electrode_cells_reproduce_electrode_values_closely() {
        let montage = Montage::standard();
        // Legacy alias names (T3/T7 etc.) share a position; a physical
        // recording never contains both, so keep one name per position.
        let mut seen = Vec::new();
        let channels: Vec<String> = montage
            .names()
            .iter()
            .filter(|name| {
                let p = montage.position(name).unwrap();
                if seen.iter().any(|&q: &[f64; 2]| q == p) {
                    false
                } else {
                    seen.push(p);
                    true
                }
            })
            .cloned()
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let values: Vec<f64> = (0..channels.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let topo = topography(&values, &channels, &montage, 64).unwrap();
        for (k, name) in channels.iter().enumerate() {
            let p = montage.position(name).unwrap();
            let mut best = (f64::INFINITY, (0, 0));
            for row in 0..64 {
                for col in 0..64 {
                    let (x, y) = topo.cell_center(row, col);
                    let d = (x - p[0]).powi(2) + (y - p[1]).powi(2);
                    if d < best.0 {
                        best = (d, (row, col));
                    }
                }
            }
            let rendered = topo.grid[best.1];
            assert!(
                (rendered - values[k]).abs() <= 0.01 * values[k].abs(),
                "electrode {name}: rendered {rendered} vs value {}",
                values[k]
            );
        }
    }

    #[test]
    fn mirrored_sources_produce_an_antisymmetric_map() {
        let montage = two_electrode_montage();
        let channels = vec!["L".to_string(), "R".to_string()];
        let topo = topography(&[-1.0, 1.0], &channels, &montage, 64).unwrap();
        for row in 0..64 {
            for col in 0..64 {
                let v = topo.grid[[row, col]];
                let mirrored = topo.grid[[row, 63 - col]];
                if v.is_nan() {
                    assert!(mirrored.is_nan());
                } else {
                    assert_abs_diff_eq!(v, -mirrored, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn interpolation_stays_within_the_input_range() {
        let montage = Montage::standard();
        let channels: Vec<String> = montage.names()[..12].to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let values: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..3.0)).collect();
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let topo = topography(&values, &channels, &montage, 48).unwrap();
        for &v in topo.grid.iter().filter(|v| !v.is_nan()) {
            assert!(
                (lo - 1e-12..=hi + 1e-12).contains(&v),
                "cell {v} outside [{lo}, {hi}]"
            );
        }
    }

    #[test]
    fn unknown_channel_is_named_in_the_error() {
        let montage = two_electrode_montage();
        let channels = vec!["L".to_string(), "Pz".to_string()];
        match topography(&[1.0, 2.0], &channels, &montage, 16) {
            Err(Error::MontageMissing(name)) => assert_eq!(name, "Pz"),
            other => panic!("expected MontageMissing, got {other:?}"),
        }
    }

    #[test]
    fn grid_csv_spells_missing_cells_as_nan() {
        let montage = two_electrode_montage();
        let channels = vec!["L".to_string(), "R".to_string()];
        let topo = topography(&[1.0, 2.0], &channels, &montage, 8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        write_topography_csv(&topo, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 8);
        assert!(lines.iter().all(|l| l.split(',').count() == 8));
        // Corner cells are outside the head.
        assert!(lines[0].starts_with("nan,"));
        // Values parse back.
        for cell in lines.iter().flat_map(|l| l.split(',')) {
            if cell != "nan" {
                cell.parse::<f64>().unwrap();
            }
        }
    }

    #[test]
    fn relevance_csv_has_time_column_and_channel_headers() {
        let map = test_map(ndarray::array![[0.5, -0.25], [1.0, 0.0]]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.csv");
        write_relevance_csv(&map, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time_ms,e0,e1");
        assert_eq!(lines[1], "0,0.5,-0.25");
        assert_eq!(lines[2], "10,1,0");
    }

    #[test]
    fn zero_map_renders_uniform_white_with_floor_scale() {
        let map = test_map(Array2::zeros((4, 3)));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.png");
        let scale = render_heatmap(&map, &path).unwrap();
        assert_eq!(scale.vmin, -1e-12);
        assert_eq!(scale.vmax, 1e-12);

        let img = image::open(&path).unwrap().to_rgb8();
        assert!(img.pixels().all(|p| p.0 == [255, 255, 255]));

        let sidecar: HeatmapScale = serde_json::from_str(
            &std::fs::read_to_string(path.with_extension("png.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(sidecar, scale);
    }

    #[test]
    fn negated_map_renders_as_exact_palette_mirror() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let values = Array2::from_shape_fn((7, 5), |_| rng.random_range(-1.0..1.0));
        let dir = tempfile::tempdir().unwrap();
        let pos_path = dir.path().join("pos.png");
        let neg_path = dir.path().join("neg.png");
        render_heatmap(&test_map(values.clone()), &pos_path).unwrap();
        render_heatmap(&test_map(values.mapv(|v| -v)), &neg_path).unwrap();

        let pos = image::open(&pos_path).unwrap().to_rgb8();
        let neg = image::open(&neg_path).unwrap().to_rgb8();
        assert_eq!(pos.dimensions(), neg.dimensions());
        for (p, n) in pos.pixels().zip(neg.pixels()) {
            assert_eq!([n.0[2], n.0[1], n.0[0]], p.0, "pixels must mirror R<->B");
        }
    }

    #[test]
    fn image_dimensions_are_integer_multiples_of_the_map_shape() {
        let dir = tempfile::tempdir().unwrap();

        // Full protocol-sized map: one pixel per cell.
        let big = test_map(Array2::from_shape_fn((301, 118), |(t, c)| {
            ((t * 7 + c) % 13) as f64 - 6.0
        }));
        let big_path = dir.path().join("big.png");
        render_heatmap(&big, &big_path).unwrap();
        let img = image::open(&big_path).unwrap();
        assert_eq!(img.width() % 118, 0);
        assert_eq!(img.height() % 301, 0);
        assert_eq!((img.width(), img.height()), (118, 301));

        // Tiny map: blocks grow but stay integer multiples.
        let small = test_map(ndarray::array![[1.0, -1.0, 0.0], [0.5, 0.0, -0.5]]);
        let small_path = dir.path().join("small.png");
        render_heatmap(&small, &small_path).unwrap();
        let img = image::open(&small_path).unwrap();
        assert_eq!(img.width() % 3, 0);
        assert_eq!(img.height() % 2, 0);
        assert_eq!((img.width(), img.height()), (96, 64));
    }

    #[test]
    fn rendering_is_deterministic_byte_for_byte() {
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let values = Array2::from_shape_fn((9, 4), |_| rng.random_range(-2.0..2.0));
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.png");
        let b = dir.path().join("b.png");
        render_heatmap(&test_map(values.clone()), &a).unwrap();
        render_heatmap(&test_map(values), &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(
            std::fs::read(a.with_extension("png.json")).unwrap(),
            std::fs::read(b.with_extension("png.json")).unwrap()
        );
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let map = test_map(Array2::zeros((2, 2)));
        match render_heatmap(&map, "/nonexistent-dir/f.png") {
            Err(Error::Io(_)) => {}
            other => panic!("expected Io error, got {other:?}"),
        }
    }

    #[test]
    fn relevance_csv_round_trips_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(94);
        let values = Array2::from_shape_fn((6, 3), |_| rng.random_range(-1.0..1.0));
        let map = test_map(values);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.csv");
        write_relevance_csv(&map, &path).unwrap();
        let back = read_relevance_csv(&path).unwrap();
        assert_eq!(back.channels, map.channels);
        assert_eq!(back.time_ms, map.time_ms);
        assert_eq!(back.values, map.values);
    }

    #[test]
    fn malformed_relevance_csv_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "frequency,a,b\n1,2,3\n").unwrap();
        assert!(matches!(read_relevance_csv(&path), Err(Error::Format(_))));
        std::fs::write(&path, "time_ms,a,b\n1,2\n").unwrap();
        assert!(matches!(read_relevance_csv(&path), Err(Error::Format(_))));
        std::fs::write(&path, "time_ms,a,b\n1,2,3,4\n").unwrap();
        assert!(matches!(read_relevance_csv(&path), Err(Error::Format(_))));
    }

    #[test]
    fn topography_render_marks_outside_cells_gray() {
        let montage = two_electrode_montage();
        let channels = vec!["L".to_string(), "R".to_string()];
        let topo = topography(&[0.0, 0.0], &channels, &montage, 16).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("topo.png");
        let scale = render_topography(&topo, &path).unwrap();
        assert_eq!(scale.vmax, 1e-12);
        let img = image::open(&path).unwrap().to_rgb8();
        let block = (img.width() / 16) as usize;
        for ((row, col), &v) in topo.grid.indexed_iter() {
            let px = img
                .get_pixel((col * block) as u32, (row * block) as u32)
                .0;
            if v.is_nan() {
                assert_eq!(px, MISSING_CELL_COLOR);
            } else {
                assert_eq!(px, [255, 255, 255]);
            }
        }

        let path2 = dir.path().join("topo2.png");
        render_topography(&topo, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let montage = two_electrode_montage();
        let channels = vec!["L".to_string(), "R".to_string()];
        assert!(matches!(
            topography(&[1.0], &channels, &montage, 16),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            topography(&[1.0, f64::NAN], &channels, &montage, 16),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            topography(&[1.0, 2.0], &channels, &montage, 0),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            topography(&[], &[], &montage, 16),
            Err(Error::Argument(_))
        ));
    }
}
