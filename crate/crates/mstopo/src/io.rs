//! File formats: CSV tables, PGM cell grids, the JSON model document, VTK
//! legacy field exports, and PNG renderings.
//!
//! Every artifact carries a metadata block — tool version, configuration
//! hash, seed — as `#` comment lines (CSV, PGM), the title line (VTK), a
//! `metadata` object (JSON), or a JSON sidecar (PNG). All writes are atomic:
//! content goes to a temporary file in the destination directory which is
//! then renamed over the target, so readers never observe partial files.
//! Floats are written in Rust's shortest round-trip decimal form, making
//! every text format lossless and byte-deterministic.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{MixedInput, MrLvgpModel};
use crate::homog::{PropertyDataset, PropertySample, StiffnessVec, STIFFNESS_NAMES};
use crate::microlib::PixelGrid;
use crate::topopt::{AssembledStructure, TraceRow};

/// Provenance stamped into every artifact.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Meta {
    /// Tool version (the crate version).
    pub version: String,
    /// SHA-256 of the effective run configuration.
    pub config: String,
    /// Master seed of the run.
    pub seed: u64,
}

impl Meta {
    /// Metadata for the current tool version.
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config_hash.into(),
            seed,
        }
    }

    /// The three `#` comment lines used by text formats.
    fn comment_lines(&self) -> String {
        format!(
            "# mstopo {}\n# config {}\n# seed {}\n",
            self.version, self.config, self.seed
        )
    }

    /// The single-line form used by the VTK title.
    fn one_line(&self) -> String {
        format!(
            "mstopo {} config {} seed {}",
            self.version, self.config, self.seed
        )
    }
}

/// Writes `bytes` to `path` atomically (temp file + rename), creating parent
/// directories as needed.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Encodes a header plus stringified records as CSV bytes.
fn csv_body(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(header)
        .and_then(|_| rows.iter().try_for_each(|row| writer.write_record(row)))
        .map_err(|e| Error::Config(format!("CSV encoding failed: {e}")))?;
    writer
        .into_inner()
        .map_err(|e| Error::Config(format!("CSV encoding failed: {e}")))
}

/// Builds a commented CSV document from a header and stringified records.
fn csv_document(meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut out = meta.comment_lines().into_bytes();
    out.extend(csv_body(header, rows)?);
    Ok(out)
}

/// A CSV reader that skips the `#` metadata block.
fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file))
}

fn parse_field<T: std::str::FromStr>(path: &Path, record: &csv::StringRecord, i: usize) -> Result<T> {
    record
        .get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| {
            Error::parse(
                path,
                format!("bad value in column {i} of record {record:?}"),
            )
        })
}

// ---------------------------------------------------------------------------
// Library artifacts
// ---------------------------------------------------------------------------

/// One manifest row: a generated cell and where its grid lives.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestRow {
    /// 1-based class id.
    pub class_id: usize,
    /// Requested volume fraction.
    pub target_vf: f64,
    /// Volume fraction of the rasterized grid.
    pub achieved_vf: f64,
    /// Grid file path relative to the manifest.
    pub grid_file: String,
}

/// Writes the library manifest (`class_id, target_vf, achieved_vf, grid_file`).
pub fn write_manifest(path: &Path, meta: &Meta, rows: &[ManifestRow]) -> Result<()> {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.class_id.to_string(),
                r.target_vf.to_string(),
                r.achieved_vf.to_string(),
                r.grid_file.clone(),
            ]
        })
        .collect();
    let doc = csv_document(
        meta,
        &["class_id", "target_vf", "achieved_vf", "grid_file"],
        &records,
    )?;
    write_atomic(path, &doc)
}

/// Writes the homogenized dataset (`class_id, vf, C11, C12, C22, C66`).
pub fn write_dataset(path: &Path, meta: &Meta, dataset: &PropertyDataset) -> Result<()> {
    let header: Vec<&str> = ["class_id", "vf"]
        .into_iter()
        .chain(STIFFNESS_NAMES)
        .collect();
    let records: Vec<Vec<String>> = dataset
        .samples
        .iter()
        .map(|s| {
            let mut row = vec![s.input.class.to_string(), s.input.vf.to_string()];
            row.extend(s.stiffness.components().iter().map(|c| c.to_string()));
            row
        })
        .collect();
    let doc = csv_document(meta, &header, &records)?;
    write_atomic(path, &doc)
}

/// Reads a dataset previously written by [`write_dataset`].
pub fn read_dataset(path: &Path) -> Result<PropertyDataset> {
    let mut reader = csv_reader(path)?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        if record.len() != 6 {
            return Err(Error::parse(
                path,
                format!("expected 6 columns, found {}", record.len()),
            ));
        }
        let class: usize = parse_field(path, &record, 0)?;
        let vf: f64 = parse_field(path, &record, 1)?;
        let mut c = [0.0; 4];
        for (j, slot) in c.iter_mut().enumerate() {
            *slot = parse_field(path, &record, 2 + j)?;
        }
        if class == 0 {
            return Err(Error::parse(path, "class ids are 1-based"));
        }
        samples.push(PropertySample {
            input: MixedInput { vf, class },
            stiffness: StiffnessVec::from_components(c),
        });
    }
    if samples.is_empty() {
        return Err(Error::parse(path, "dataset has no rows"));
    }
    Ok(PropertyDataset { samples })
}

/// Writes a cell grid as binary PGM (P5), 0 = void, 255 = solid, rows top
/// down.
pub fn write_pgm(path: &Path, meta: &Meta, grid: &PixelGrid) -> Result<()> {
    let res = grid.resolution();
    let mut out = format!("P5\n{}{res} {res}\n255\n", meta.comment_lines()).into_bytes();
    for row in 0..res {
        for col in 0..res {
            out.push(if grid.get(col, res - 1 - row) { 255 } else { 0 });
        }
    }
    write_atomic(path, &out)
}

/// Reads a square PGM written by [`write_pgm`].
pub fn read_pgm(path: &Path) -> Result<PixelGrid> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if !bytes.starts_with(b"P5") {
        return Err(Error::parse(path, "not a binary PGM (P5) file"));
    }
    // Header: three whitespace-separated tokens (width, height, maxval)
    // after the magic, with '#' comments running to end of line.
    let mut pos = 2;
    let mut tokens = Vec::with_capacity(3);
    while tokens.len() < 3 && pos < bytes.len() {
        match bytes[pos] {
            b'#' => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => pos += 1,
            _ => {
                let start = pos;
                while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                let token = std::str::from_utf8(&bytes[start..pos])
                    .map_err(|_| Error::parse(path, "non-ASCII header"))?;
                tokens.push(
                    token
                        .parse::<usize>()
                        .map_err(|_| Error::parse(path, format!("bad header token {token:?}")))?,
                );
            }
        }
    }
    let [width, height, maxval] = tokens[..] else {
        return Err(Error::parse(path, "truncated PGM header"));
    };
    if width != height {
        return Err(Error::parse(path, "cell grids must be square"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse(path, format!("unsupported maxval {maxval}")));
    }
    pos += 1; // single whitespace byte after maxval
    let payload = &bytes[pos..];
    if payload.len() != width * height {
        return Err(Error::parse(
            path,
            format!(
                "payload holds {} bytes for {} pixels",
                payload.len(),
                width * height
            ),
        ));
    }
    let mut cells = vec![false; width * height];
    for row in 0..height {
        for col in 0..width {
            if payload[row * width + col] > 0 {
                cells[col * height + (height - 1 - row)] = true;
            }
        }
    }
    PixelGrid::from_cells(width, cells)
}

// ---------------------------------------------------------------------------
// Model artifacts
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    metadata: Meta,
    model: crate::gp::ModelFile,
}

/// Writes a fitted model as a JSON document with a metadata block.
pub fn write_model(path: &Path, meta: &Meta, model: &MrLvgpModel) -> Result<()> {
    let doc = ModelDoc {
        metadata: meta.clone(),
        model: model.to_file(),
    };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Config(format!("model serialization failed: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Loads a model written by [`write_model`], with its metadata.
pub fn read_model(path: &Path) -> Result<(Meta, MrLvgpModel)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: ModelDoc =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    Ok((doc.metadata, MrLvgpModel::from_file(doc.model)?))
}

/// Writes the latent-space table (`class_id, z1, z2`).
pub fn write_latent_table(path: &Path, meta: &Meta, model: &MrLvgpModel) -> Result<()> {
    let records: Vec<Vec<String>> = model
        .export_latent()
        .into_iter()
        .map(|(class, z)| vec![class.to_string(), z[0].to_string(), z[1].to_string()])
        .collect();
    let doc = csv_document(meta, &["class_id", "z1", "z2"], &records)?;
    write_atomic(path, &doc)
}

/// One repetition of the holdout validation protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRep {
    /// Repetition index (0-based).
    pub rep: usize,
    /// Seed that drew this repetition's split and fit starts.
    pub seed: u64,
    /// Test mean squared error per response, raw scale.
    pub mse: Vec<f64>,
}

/// Writes the per-repetition validation log (`rep, seed, mse_<response>...`).
pub fn write_validation(
    path: &Path,
    meta: &Meta,
    names: &[String],
    reps: &[ValidationRep],
) -> Result<()> {
    let mse_cols: Vec<String> = names.iter().map(|n| format!("mse_{n}")).collect();
    let header: Vec<&str> = ["rep", "seed"]
        .into_iter()
        .chain(mse_cols.iter().map(|s| s.as_str()))
        .collect();
    let records: Vec<Vec<String>> = reps
        .iter()
        .map(|r| {
            let mut row = vec![r.rep.to_string(), r.seed.to_string()];
            row.extend(r.mse.iter().map(|m| m.to_string()));
            row
        })
        .collect();
    let doc = csv_document(meta, &header, &records)?;
    write_atomic(path, &doc)
}

/// Writes the validation summary (`response, mse_mean, mse_variance`).
pub fn write_validation_summary(
    path: &Path,
    meta: &Meta,
    names: &[String],
    reps: &[ValidationRep],
) -> Result<()> {
    let n = reps.len();
    let records: Vec<Vec<String>> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mean = reps.iter().map(|r| r.mse[j]).sum::<f64>() / n as f64;
            let variance = if n > 1 {
                reps.iter().map(|r| (r.mse[j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            vec![name.clone(), mean.to_string(), variance.to_string()]
        })
        .collect();
    let doc = csv_document(meta, &["response", "mse_mean", "mse_variance"], &records)?;
    write_atomic(path, &doc)
}

// ---------------------------------------------------------------------------
// Optimization artifacts
// ---------------------------------------------------------------------------

/// Writes the iteration trace (`stage, iter, compliance, volume, change`).
pub fn write_trace(path: &Path, meta: &Meta, rows: &[TraceRow]) -> Result<()> {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.stage.to_string(),
                r.iter.to_string(),
                r.compliance.to_string(),
                r.volume.to_string(),
                r.change.to_string(),
            ]
        })
        .collect();
    let doc = csv_document(
        meta,
        &["stage", "iter", "compliance", "volume", "change"],
        &records,
    )?;
    write_atomic(path, &doc)
}

/// One element of a saved design field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRow {
    /// Flat mesh element index.
    pub elem: usize,
    /// Element column.
    pub ex: usize,
    /// Element row.
    pub ey: usize,
    /// Volume fraction the assembled structure realizes.
    pub rho: f64,
    /// Latent coordinate 1 (an anchor for snapped fields).
    pub z1: f64,
    /// Latent coordinate 2.
    pub z2: f64,
    /// 1-based class id.
    pub class: usize,
    /// Mean element strain energy over load cases.
    pub compliance_density: f64,
}

/// A saved design field: mesh dimensions plus one row per active element.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    /// Elements along x.
    pub nx: usize,
    /// Elements along y.
    pub ny: usize,
    /// Active element rows, ascending by flat index.
    pub rows: Vec<FieldRow>,
}

/// Writes a design field
/// (`elem, ex, ey, rho, z1, z2, class, compliance_density`), with the mesh
/// dimensions in the metadata block.
pub fn write_field(path: &Path, meta: &Meta, field: &FieldFile) -> Result<()> {
    let mut out = meta.comment_lines();
    out.push_str(&format!("# nx {}\n# ny {}\n", field.nx, field.ny));
    let records: Vec<Vec<String>> = field
        .rows
        .iter()
        .map(|r| {
            vec![
                r.elem.to_string(),
                r.ex.to_string(),
                r.ey.to_string(),
                r.rho.to_string(),
                r.z1.to_string(),
                r.z2.to_string(),
                r.class.to_string(),
                r.compliance_density.to_string(),
            ]
        })
        .collect();
    let mut doc = out.into_bytes();
    doc.extend(csv_body(
        &[
            "elem",
            "ex",
            "ey",
            "rho",
            "z1",
            "z2",
            "class",
            "compliance_density",
        ],
        &records,
    )?);
    write_atomic(path, &doc)
}

/// Reads a field written by [`write_field`].
pub fn read_field(path: &Path) -> Result<FieldFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut nx = None;
    let mut ny = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let mut words = line.trim_start_matches('#').split_whitespace();
        match (words.next(), words.next()) {
            (Some("nx"), Some(v)) => nx = v.parse().ok(),
            (Some("ny"), Some(v)) => ny = v.parse().ok(),
            _ => {}
        }
    }
    let (nx, ny) = match (nx, ny) {
        (Some(nx), Some(ny)) if nx > 0 && ny > 0 => (nx, ny),
        _ => return Err(Error::parse(path, "missing mesh dimensions (# nx / # ny)")),
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        if record.len() != 8 {
            return Err(Error::parse(
                path,
                format!("expected 8 columns, found {}", record.len()),
            ));
        }
        let row = FieldRow {
            elem: parse_field(path, &record, 0)?,
            ex: parse_field(path, &record, 1)?,
            ey: parse_field(path, &record, 2)?,
            rho: parse_field(path, &record, 3)?,
            z1: parse_field(path, &record, 4)?,
            z2: parse_field(path, &record, 5)?,
            class: parse_field(path, &record, 6)?,
            compliance_density: parse_field(path, &record, 7)?,
        };
        if row.ex >= nx || row.ey >= ny || row.elem != row.ex * ny + row.ey {
            return Err(Error::parse(
                path,
                format!("element {} inconsistent with mesh {nx}x{ny}", row.elem),
            ));
        }
        if row.class == 0 {
            return Err(Error::parse(path, "class ids are 1-based"));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, "field has no rows"));
    }
    Ok(FieldFile { nx, ny, rows })
}

/// Writes the latent-space scatter (`kind, id, z1, z2`): class anchors
/// followed by per-element latent points.
pub fn write_latent_scatter(
    path: &Path,
    meta: &Meta,
    anchors: &[[f64; 2]],
    elems: &[(usize, [f64; 2])],
) -> Result<()> {
    let mut records: Vec<Vec<String>> = anchors
        .iter()
        .enumerate()
        .map(|(i, z)| {
            vec![
                "anchor".to_string(),
                (i + 1).to_string(),
                z[0].to_string(),
                z[1].to_string(),
            ]
        })
        .collect();
    records.extend(elems.iter().map(|(e, z)| {
        vec![
            "element".to_string(),
            e.to_string(),
            z[0].to_string(),
            z[1].to_string(),
        ]
    }));
    let doc = csv_document(meta, &["kind", "id", "z1", "z2"], &records)?;
    write_atomic(path, &doc)
}

/// Writes the class-usage table (`class_id, elements, percent`).
pub fn write_class_usage(path: &Path, meta: &Meta, counts: &[usize]) -> Result<()> {
    let total: usize = counts.iter().sum();
    let records: Vec<Vec<String>> = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let percent = 100.0 * count as f64 / total.max(1) as f64;
            vec![
                (i + 1).to_string(),
                count.to_string(),
                percent.to_string(),
            ]
        })
        .collect();
    let doc = csv_document(meta, &["class_id", "elements", "percent"], &records)?;
    write_atomic(path, &doc)
}

/// Writes a design field as a VTK legacy structured-points dataset with
/// cell data `rho, z1, z2, class, compliance_density`. Passive elements
/// carry zeros.
pub fn write_vtk(path: &Path, meta: &Meta, field: &FieldFile) -> Result<()> {
    let (nx, ny) = (field.nx, field.ny);
    let mut rho = vec![0.0; nx * ny];
    let mut z1 = vec![0.0; nx * ny];
    let mut z2 = vec![0.0; nx * ny];
    let mut class = vec![0usize; nx * ny];
    let mut energy = vec![0.0; nx * ny];
    for row in &field.rows {
        let e = row.elem;
        rho[e] = row.rho;
        z1[e] = row.z1;
        z2[e] = row.z2;
        class[e] = row.class;
        energy[e] = row.compliance_density;
    }

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(&meta.one_line());
    out.push('\n');
    out.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    out.push_str(&format!("DIMENSIONS {} {} 1\n", nx + 1, ny + 1));
    out.push_str("ORIGIN 0 0 0\nSPACING 1 1 1\n");
    out.push_str(&format!("CELL_DATA {}\n", nx * ny));

    // VTK cell ordering: x fastest, bottom row first.
    let scalars = |out: &mut String, name: &str, value: &dyn Fn(usize) -> String| {
        out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
        for iy in 0..ny {
            for ix in 0..nx {
                out.push_str(&value(ix * ny + iy));
                out.push('\n');
            }
        }
    };
    scalars(&mut out, "rho", &|e| rho[e].to_string());
    scalars(&mut out, "z1", &|e| z1[e].to_string());
    scalars(&mut out, "z2", &|e| z2[e].to_string());
    out.push_str("SCALARS class int 1\nLOOKUP_TABLE default\n");
    for iy in 0..ny {
        for ix in 0..nx {
            out.push_str(&class[ix * ny + iy].to_string());
            out.push('\n');
        }
    }
    scalars(&mut out, "compliance_density", &|e| energy[e].to_string());

    write_atomic(path, out.as_bytes())
}

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

/// Distinct colors for class maps, one per class id (1-based, cycling).
const CLASS_PALETTE: [[u8; 3]; 6] = [
    [230, 25, 75],   // red
    [60, 180, 75],   // green
    [255, 225, 25],  // yellow
    [0, 130, 200],   // blue
    [245, 130, 48],  // orange
    [145, 30, 180],  // purple
];

fn encode_png(image: image::DynamicImage) -> Result<Vec<u8>> {
    let mut bytes = Cursor::new(Vec::new());
    image
        .write_to(&mut bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Config(format!("PNG encoding failed: {e}")))?;
    Ok(bytes.into_inner())
}

fn write_png_with_sidecar(path: &Path, meta: &Meta, image: image::DynamicImage) -> Result<()> {
    let (width, height) = (image.width(), image.height());
    write_atomic(path, &encode_png(image)?)?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".json");
    let doc = serde_json::json!({
        "metadata": meta,
        "width": width,
        "height": height,
    });
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Config(format!("sidecar serialization failed: {e}")))?;
    text.push('\n');
    write_atomic(&PathBuf::from(sidecar), text.as_bytes())
}

/// Writes the assembled structure as a grayscale PNG (0 = void, 255 = solid)
/// plus a `.json` metadata sidecar.
pub fn write_structure_png(
    path: &Path,
    meta: &Meta,
    structure: &AssembledStructure,
) -> Result<()> {
    let pixels: Vec<u8> = structure
        .pixels
        .iter()
        .map(|&solid| if solid { 255 } else { 0 })
        .collect();
    let image = image::GrayImage::from_raw(
        structure.width as u32,
        structure.height as u32,
        pixels,
    )
    .expect("pixel buffer matches dimensions");
    write_png_with_sidecar(path, meta, image::DynamicImage::ImageLuma8(image))
}

/// Writes an element-resolution class map (one color per class, passive
/// black) plus a `.json` metadata sidecar.
pub fn write_class_map_png(path: &Path, meta: &Meta, field: &FieldFile) -> Result<()> {
    let (nx, ny) = (field.nx, field.ny);
    let mut image = image::RgbImage::new(nx as u32, ny as u32);
    for row in &field.rows {
        let color = CLASS_PALETTE[(row.class - 1) % CLASS_PALETTE.len()];
        image.put_pixel(row.ex as u32, (ny - 1 - row.ey) as u32, image::Rgb(color));
    }
    write_png_with_sidecar(path, meta, image::DynamicImage::ImageRgb8(image))
}

/// Writes an element-resolution density map (gray = density, passive black)
/// plus a `.json` metadata sidecar.
pub fn write_density_png(path: &Path, meta: &Meta, field: &FieldFile) -> Result<()> {
    let (nx, ny) = (field.nx, field.ny);
    let mut image = image::GrayImage::new(nx as u32, ny as u32);
    for row in &field.rows {
        let level = (row.rho.clamp(0.0, 1.0) * 255.0).round() as u8;
        image.put_pixel(
            row.ex as u32,
            (ny - 1 - row.ey) as u32,
            image::Luma([level]),
        );
    }
    write_png_with_sidecar(path, meta, image::DynamicImage::ImageLuma8(image))
}
