//! File formats: signal tables, adjacency matrices, operators, order
//! vectors, images and training logs.
//!
//! Signal CSV files hold one node per row and one signal per column. A first
//! row starting with the sentinel cell `#coords` followed by a count `d`
//! marks the first `d` columns of every later row as node coordinates.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, GraphDescriptor};
use crate::imaging::ByteImage;
use crate::learn::LearnResult;
use crate::linalg::{CMat, CVec};
use crate::spectral::OrderVector;

pub const COORDS_SENTINEL: &str = "#coords";

#[derive(Debug, Clone, PartialEq)]
pub struct SignalTable {
    /// `N x M`, one column per signal.
    pub values: DMatrix<f64>,
    pub coords: Option<Vec<Vec<f64>>>,
}

impl SignalTable {
    pub fn nodes(&self) -> usize {
        self.values.nrows()
    }

    pub fn signals(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> Result<CVec> {
        if j >= self.signals() {
            return Err(invalid(format!("column {j} out of range, table has {}", self.signals())));
        }
        Ok(self.values.column(j).map(|v| Complex64::new(v, 0.0)))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn csv_rows<R: Read>(reader: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}

fn parse_cell(cell: &str, line: usize) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| parse_err(line, format!("'{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("'{cell}' is not finite")));
    }
    Ok(v)
}

/// Parses rectangular numeric rows; ragged input names the offending line.
fn numeric_rows(rows: &[(usize, Vec<String>)]) -> Result<Vec<Vec<f64>>> {
    let width = rows.first().map_or(0, |r| r.1.len());
    rows.iter()
        .map(|(line, cells)| {
            if cells.len() != width {
                return Err(parse_err(
                    *line,
                    format!("expected {width} fields, found {}", cells.len()),
                ));
            }
            cells.iter().map(|c| parse_cell(c, *line)).collect()
        })
        .collect()
}

pub fn parse_signal_csv<R: Read>(reader: R) -> Result<SignalTable> {
    let mut rows = csv_rows(reader)?;
    let mut dims = 0usize;
    if let Some((line, first)) = rows.first() {
        if first[0] == COORDS_SENTINEL {
            let d = first.get(1).ok_or_else(|| parse_err(*line, "coordinate header needs a dimension"))?;
            dims = d.parse().map_err(|_| parse_err(*line, format!("bad coordinate dimension '{d}'")))?;
            rows.remove(0);
        }
    }
    let data = numeric_rows(&rows)?;
    if data.is_empty() {
        return Err(parse_err(1, "no data rows"));
    }
    let width = data[0].len();
    if dims >= width {
        return Err(parse_err(rows[0].0, "coordinate columns leave no signal column"));
    }
    let values = DMatrix::from_fn(data.len(), width - dims, |i, j| data[i][dims + j]);
    let coords = (dims > 0).then(|| data.iter().map(|r| r[..dims].to_vec()).collect());
    Ok(SignalTable { values, coords })
}

pub fn load_signal_csv(path: impl AsRef<Path>) -> Result<SignalTable> {
    parse_signal_csv(BufReader::new(File::open(path)?))
}

/// Writes values with the shortest representation that reads back exactly.
pub fn write_signal_csv<W: Write>(table: &SignalTable, mut out: W) -> Result<()> {
    if let Some(c) = &table.coords {
        let d = c.first().map_or(0, Vec::len);
        writeln!(out, "{COORDS_SENTINEL},{d}")?;
    }
    for i in 0..table.nodes() {
        let mut cells: Vec<String> = table
            .coords
            .as_ref()
            .map(|c| c[i].iter().map(|v| v.to_string()).collect())
            .unwrap_or_default();
        cells.extend(table.values.row(i).iter().map(|v| v.to_string()));
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn save_signal_csv(table: &SignalTable, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_signal_csv(table, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Dense adjacency matrix, one row per line.
pub fn parse_graph_csv<R: Read>(reader: R) -> Result<Graph> {
    let rows = csv_rows(reader)?;
    let data = numeric_rows(&rows)?;
    let n = data.len();
    if n == 0 || data[0].len() != n {
        return Err(parse_err(1, format!("adjacency must be square, got {n} rows")));
    }
    Graph::from_weights(DMatrix::from_fn(n, n, |i, j| data[i][j]))
}

pub fn load_graph_csv(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph_csv(BufReader::new(File::open(path)?))
}

pub fn save_graph_csv(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in g.weights().row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_graph_descriptor(path: impl AsRef<Path>) -> Result<GraphDescriptor> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(e.line(), e.to_string()))
}

/// Loads `.json` descriptors and generates the graph, or reads adjacency CSV.
pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => load_graph_descriptor(path)?.build(),
        _ => load_graph_csv(path),
    }
}

/// Complex matrix as CSV, real and imaginary parts interleaved per entry.
pub fn write_operator_csv<W: Write>(m: &CMat, mut out: W) -> Result<()> {
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().flat_map(|c| [c.re.to_string(), c.im.to_string()]).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn parse_operator_csv<R: Read>(reader: R) -> Result<CMat> {
    let rows = csv_rows(reader)?;
    let data = numeric_rows(&rows)?;
    let n = data.len();
    if n == 0 || data[0].len() != 2 * n {
        return Err(parse_err(1, format!("expected {} interleaved columns", 2 * n)));
    }
    Ok(CMat::from_fn(n, n, |i, j| Complex64::new(data[i][2 * j], data[i][2 * j + 1])))
}

pub fn orders_to_json(a: &OrderVector) -> String {
    serde_json::to_string(a).expect("orders serialize")
}

pub fn orders_from_json(text: &str) -> Result<OrderVector> {
    let v: Vec<f64> = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    OrderVector::new(v)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn write_progress_csv<W: Write>(result: &LearnResult, log_every: usize, mut out: W) -> Result<()> {
    writeln!(out, "epoch,loss,metric")?;
    for (e, l, m) in result.progress_rows(log_every) {
        match m {
            Some(m) => writeln!(out, "{e},{l},{m}")?,
            None => writeln!(out, "{e},{l},")?,
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ImageFormat {
    Png,
    Pnm,
}

fn image_format(path: &Path) -> Result<ImageFormat> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(ImageFormat::Png),
        Some("ppm" | "pgm" | "pnm") => Ok(ImageFormat::Pnm),
        _ => Err(Error::Format(format!("unsupported image format: {}", path.display()))),
    }
}

/// Reads PNG or PPM/PGM as 8-bit gray or RGB; alpha is dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<ByteImage> {
    let path = path.as_ref();
    let fmt = match image_format(path)? {
        ImageFormat::Png => image::ImageFormat::Png,
        ImageFormat::Pnm => image::ImageFormat::Pnm,
    };
    let bytes = std::fs::read(path)?;
    let img = image::load_from_memory_with_format(&bytes, fmt).map_err(|e| Error::Format(e.to_string()))?;
    let gray = matches!(img.color(), image::ColorType::L8 | image::ColorType::L16 | image::ColorType::La8 | image::ColorType::La16);
    if gray {
        let g = img.to_luma8();
        ByteImage::new(g.width() as usize, g.height() as usize, 1, g.into_raw())
    } else {
        let rgb = img.to_rgb8();
        ByteImage::new(rgb.width() as usize, rgb.height() as usize, 3, rgb.into_raw())
    }
}

/// Writes PNG, or binary PPM (RGB) / PGM (gray) for `.ppm`, `.pgm`, `.pnm`.
pub fn save_image(img: &ByteImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let fmt = image_format(path)?;
    let color = if img.channels == 3 { image::ExtendedColorType::Rgb8 } else { image::ExtendedColorType::L8 };
    let (w, h) = (img.width as u32, img.height as u32);
    let file = BufWriter::new(File::create(path)?);
    let res = match fmt {
        ImageFormat::Png => image::ImageEncoder::write_image(
            image::codecs::png::PngEncoder::new(file),
            &img.data,
            w,
            h,
            color,
        ),
        ImageFormat::Pnm => {
            let subtype = if img.channels == 3 {
                image::codecs::pnm::PnmSubtype::Pixmap(image::codecs::pnm::SampleEncoding::Binary)
            } else {
                image::codecs::pnm::PnmSubtype::Graymap(image::codecs::pnm::SampleEncoding::Binary)
            };
            image::ImageEncoder::write_image(
                image::codecs::pnm::PnmEncoder::new(file).with_subtype(subtype),
                &img.data,
                w,
                h,
                color,
            )
        }
    };
    res.map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{random_rgb, Resample};

    #[test]
    fn single_column_and_ragged() {
        let t = parse_signal_csv("1\n2\n3\n".as_bytes()).unwrap();
        assert_eq!(t.values.as_slice(), &[1.0, 2.0, 3.0]);
        match parse_signal_csv("1,2\n3\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_signal_csv("1\nx\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn coords_header_and_exact_round_trip() {
        let t = parse_signal_csv("#coords,2\n0,0,0.1,5\n1,0,0.30000000000000004,6\n".as_bytes()).unwrap();
        assert_eq!(t.signals(), 2);
        assert_eq!(t.coords.as_ref().unwrap()[1], vec![1.0, 0.0]);
        let mut buf = Vec::new();
        write_signal_csv(&t, &mut buf).unwrap();
        assert_eq!(parse_signal_csv(&buf[..]).unwrap(), t);
        let odd = SignalTable { values: DMatrix::from_column_slice(2, 1, &[std::f64::consts::PI, 1.0 / 3.0]), coords: None };
        let mut buf = Vec::new();
        write_signal_csv(&odd, &mut buf).unwrap();
        assert_eq!(parse_signal_csv(&buf[..]).unwrap(), odd);
    }

    #[test]
    fn operator_and_orders_round_trip() {
        let m = CMat::from_fn(3, 3, |i, j| Complex64::new(i as f64 / 7.0, -(j as f64) / 3.0));
        let mut buf = Vec::new();
        write_operator_csv(&m, &mut buf).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf).lines().next().unwrap().split(',').count(), 6);
        assert_eq!(parse_operator_csv(&buf[..]).unwrap(), m);
        let a = OrderVector::new(vec![0.1, 1.0 / 3.0, -2.5e-17]).unwrap();
        assert_eq!(orders_from_json(&orders_to_json(&a)).unwrap(), a);
    }

    #[test]
    fn images_round_trip_and_reject_unknown() {
        let dir = tempfile::tempdir().unwrap();
        let img = random_rgb(7, 5, 3);
        for name in ["a.ppm", "a.png"] {
            let p = dir.path().join(name);
            save_image(&img, &p).unwrap();
            assert_eq!(load_image(&p).unwrap(), img);
        }
        let gray = img.to_gray();
        let p = dir.path().join("g.pgm");
        save_image(&gray, &p).unwrap();
        assert_eq!(load_image(&p).unwrap(), gray);
        assert!(matches!(save_image(&img, dir.path().join("a.bmp")), Err(Error::Format(_))));
        let resized = img.resize(256, 256, Resample::Bilinear).unwrap().crop(64, 64, 128, 128).unwrap();
        assert_eq!((resized.width, resized.height), (128, 128));
    }

    #[test]
    fn checkerboard_ppm_layout() {
        let mut text = b"P6\n4 4\n255\n".to_vec();
        for r in 0..4 {
            for c in 0..4 {
                let v = if (r + c) % 2 == 0 { 255 } else { 0 };
                text.extend_from_slice(&[v, v, v]);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cb.ppm");
        std::fs::write(&p, &text).unwrap();
        let img = load_image(&p).unwrap();
        assert_eq!((img.width, img.height, img.channels), (4, 4, 3));
        assert_eq!(img.get(0, 0, 0), 255);
        assert_eq!(img.get(1, 0, 2), 0);
        assert_eq!(img.get(1, 1, 1), 255);
        assert_eq!(img.data, text[11..].to_vec());
    }

    #[test]
    fn graph_csv_round_trip() {
        let g = crate::graph::build_random_weighted_graph(6, 0.3, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        save_graph_csv(&g, &p).unwrap();
        assert_eq!(load_graph(&p).unwrap().weights(), g.weights());
        assert!(parse_graph_csv("0,1\n1,0,2\n".as_bytes()).is_err());
    }
}
