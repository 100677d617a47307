//! CSV and JSON artifacts: grid functions with their metadata, extremal
//! summaries, residual tables and complement data.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{ExtremalResult, PinSpec};
use crate::grid::{FracParams, GridFunction, Lattice};
use crate::operator::Residual;
use crate::perron::ComplementData;
use crate::seminorm::{gagliardo_seminorm, holder_seminorm, KernelWeights};

/// Sidecar metadata of a grid-function CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    #[serde(rename = "L")]
    pub half_extent: f64,
    pub h: f64,
    pub far_field: f64,
}

impl GridMeta {
    pub fn of(u: &GridFunction) -> Self {
        let l = u.lattice();
        let params = l.params();
        Self { n: params.n(), s: params.s(), p: params.p(), half_extent: l.half_extent(), h: l.spacing(), far_field: u.far_field() }
    }

    pub fn lattice(&self) -> Result<Arc<Lattice>> {
        Lattice::build(FracParams::new(self.n, self.s, self.p)?, self.half_extent, self.h)
    }
}

fn coordinate_header(n: usize) -> Vec<&'static str> {
    if n == 1 {
        vec!["x"]
    } else {
        vec!["x", "y"]
    }
}

fn coordinates(lattice: &Lattice, i: usize) -> Vec<String> {
    let x = lattice.point(i);
    x.iter().take(lattice.dim()).map(|c| c.to_string()).collect()
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `x[,y],value` rows in node order, plus the metadata JSON.
pub fn write_grid_function(u: &GridFunction, csv_path: &Path, meta_path: &Path) -> Result<()> {
    write_values(u, csv_path)?;
    write_json(&GridMeta::of(u), meta_path)
}

fn write_values(u: &GridFunction, csv_path: &Path) -> Result<()> {
    let lattice = u.lattice();
    let mut wr = csv::Writer::from_path(csv_path)?;
    let mut header = coordinate_header(lattice.dim());
    header.push("value");
    wr.write_record(&header)?;
    for i in 0..lattice.len() {
        let mut row = coordinates(lattice, i);
        row.push(u.value(i).to_string());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

fn read_rows(csv_path: &Path, lattice: &Lattice, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::Reader::from_path(csv_path)?;
    let n = lattice.dim();
    let mut rows = Vec::with_capacity(lattice.len());
    for (k, record) in rd.records().enumerate() {
        let record = record?;
        if record.len() != n + columns {
            return Err(Error::Parse(format!("row {k} has {} fields, expected {}", record.len(), n + columns)));
        }
        let fields = record
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {k}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        let mut x = [0.0; 2];
        x[..n].copy_from_slice(&fields[..n]);
        if lattice.node_at(x)? != k {
            return Err(Error::Parse(format!("row {k} is not in node order")));
        }
        rows.push(fields[n..].to_vec());
    }
    if rows.len() != lattice.len() {
        return Err(Error::Parse(format!("{} rows for a lattice of {} nodes", rows.len(), lattice.len())));
    }
    Ok(rows)
}

pub fn read_grid_function(csv_path: &Path, meta_path: &Path) -> Result<GridFunction> {
    let meta: GridMeta = serde_json::from_str(&fs::read_to_string(meta_path)?)?;
    let lattice = meta.lattice()?;
    let values = read_rows(csv_path, &lattice, 1)?.into_iter().map(|r| r[0]).collect();
    GridFunction::new(lattice, values, meta.far_field)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtremalSummary {
    pub pins: PinSpec,
    pub gagliardo: f64,
    pub holder: f64,
    pub c_star_hat: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub grid: GridMeta,
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_extremal(res: &ExtremalResult, dir: &Path, stem: &str) -> Result<()> {
    write_values(&res.u, &dir.join(format!("{stem}.csv")))?;
    let summary = ExtremalSummary {
        pins: res.pins,
        gagliardo: res.gagliardo,
        holder: res.holder,
        c_star_hat: res.c_star_hat,
        iterations: res.iterations,
        final_grad_norm: res.final_grad_norm,
        grid: GridMeta::of(&res.u),
    };
    write_json(&summary, &dir.join(format!("{stem}.json")))
}

/// Reads an extremal back; the seminorms are recomputed from the values.
pub fn read_extremal(csv_path: &Path, json_path: &Path, w: Option<&KernelWeights>) -> Result<ExtremalResult> {
    let summary: ExtremalSummary = serde_json::from_str(&fs::read_to_string(json_path)?)?;
    let lattice = summary.grid.lattice()?;
    let values: Vec<f64> = read_rows(csv_path, &lattice, 1)?.into_iter().map(|r| r[0]).collect();
    let u = GridFunction::new(lattice.clone(), values, summary.grid.far_field)?;
    let pins = PinSpec::new(&lattice, summary.pins.x0, summary.pins.y0, summary.pins.a, summary.pins.b)?;
    let built;
    let w = match w {
        Some(w) if u.same_lattice_as(w.lattice()) => w,
        Some(_) => return Err(Error::Mismatch),
        None => {
            built = KernelWeights::build(&lattice);
            &built
        }
    };
    let gagliardo = gagliardo_seminorm(&u, w)?;
    let hs = holder_seminorm(&u)?;
    Ok(ExtremalResult {
        u,
        pins,
        gagliardo,
        holder: hs.value,
        holder_argpair: hs.argpair,
        c_star_hat: hs.value / gagliardo,
        iterations: summary.iterations,
        final_grad_norm: summary.final_grad_norm,
        free_far_field: false,
        energy_history: Vec::new(),
    })
}

#[derive(Serialize)]
struct ResidualSummary {
    max_abs: f64,
    mean_abs: f64,
    pin_masses: Option<[f64; 2]>,
    expected_pin_mass: Option<f64>,
    fitted_factor: Option<f64>,
}

/// `node_index,x[,y],residual` rows plus the summary JSON.
pub fn write_residual(res: &Residual, lattice: &Lattice, csv_path: &Path, json_path: &Path) -> Result<()> {
    let mut wr = csv::Writer::from_path(csv_path)?;
    let mut header = vec!["node_index"];
    header.extend(coordinate_header(lattice.dim()));
    header.push("residual");
    wr.write_record(&header)?;
    for (&i, v) in res.nodes.iter().zip(&res.values) {
        let mut row = vec![i.to_string()];
        row.extend(coordinates(lattice, i));
        row.push(v.to_string());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    let summary = ResidualSummary {
        max_abs: res.max_abs,
        mean_abs: res.mean_abs,
        pin_masses: res.pin_masses,
        expected_pin_mass: res.expected_pin_mass,
        fitted_factor: res.fitted_factor,
    };
    write_json(&summary, json_path)
}

/// `x[,y],value,mask` rows (`mask = 1` for free nodes) plus metadata.
pub fn write_complement(data: &ComplementData, values: Option<&GridFunction>, csv_path: &Path, meta_path: &Path) -> Result<()> {
    let lattice = &data.lattice;
    let mut wr = csv::Writer::from_path(csv_path)?;
    let mut header = coordinate_header(lattice.dim());
    header.extend(["value", "mask"]);
    wr.write_record(&header)?;
    for i in 0..lattice.len() {
        let mut row = coordinates(lattice, i);
        let v = values.map_or(data.g[i], |u| u.value(i));
        row.push(v.to_string());
        row.push(if data.free[i] { "1" } else { "0" }.to_string());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    let meta = GridMeta {
        n: lattice.dim(),
        s: lattice.params().s(),
        p: lattice.params().p(),
        half_extent: lattice.half_extent(),
        h: lattice.spacing(),
        far_field: data.far_field,
    };
    write_json(&meta, meta_path)
}

pub fn read_complement(csv_path: &Path, meta_path: &Path) -> Result<ComplementData> {
    let meta: GridMeta = serde_json::from_str(&fs::read_to_string(meta_path)?)?;
    let lattice = meta.lattice()?;
    let rows = read_rows(csv_path, &lattice, 2)?;
    let g = rows.iter().map(|r| r[0]).collect();
    let free = rows
        .iter()
        .map(|r| match r[1] {
            1.0 => Ok(true),
            0.0 => Ok(false),
            m => Err(Error::Parse(format!("mask value {m} is not 0 or 1"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    ComplementData::new(lattice, free, g, meta.far_field)
}
