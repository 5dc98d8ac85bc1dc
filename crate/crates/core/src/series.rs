//! `series.csv`: one header row, then one row per record, columns in
//! [`DiagnosticsRecord`] field order.

use std::io::Write;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, RecordSpec};
use crate::{Error, Result};

fn label(x: f64) -> String {
    format!("{x}")
}

/// Column names for records built with `spec`.
pub fn header(spec: &RecordSpec) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(spec.k_list.iter().map(|k| format!("P{}", label(*k))));
    h.extend(["Z", "m0"].map(String::from));
    h.extend(spec.r_list.iter().map(|r| format!("m_R{}", label(*r))));
    h.extend(["E0", "omega_sup"].map(String::from));
    h.extend(spec.p_list.iter().map(|p| format!("omega_L{}", label(*p))));
    h.extend(
        [
            "dP2_bulk",
            "dP2_axis",
            "dZ_bulk",
            "dZ_axis",
            "mass_axis_r",
            "mass_axis_z",
            "mass_weighted_z",
            "gamma0",
            "ur_axis_integral",
            "ineq_resid",
            "lj_ratio",
            "clamp_count",
            "mass_weighted_r",
            "P2_line",
            "Z_line",
        ]
        .map(String::from),
    );
    h.extend(spec.r_list.iter().map(|r| format!("int_mR4_R{}", label(*r))));
    h.extend(spec.r_list.iter().map(|r| format!("zratio_R{}", label(*r))));
    h.push("flags".into());
    h
}

/// Cells of one record, numbers in shortest round-trip notation.
pub fn row(rec: &DiagnosticsRecord) -> Vec<String> {
    let mut v = vec![label(rec.t)];
    v.extend(rec.p_k.iter().map(|x| label(*x)));
    v.extend([rec.big_z, rec.m0].map(label));
    v.extend(rec.m_r.iter().map(|x| label(*x)));
    v.extend([rec.e0, rec.omega_sup].map(label));
    v.extend(rec.omega_lp.iter().map(|x| label(*x)));
    v.extend(
        [
            rec.dp2_bulk,
            rec.dp2_axis,
            rec.dz_bulk,
            rec.dz_axis,
            rec.mass_axis_r,
            rec.mass_axis_z,
            rec.mass_weighted_z,
            rec.gamma0,
            rec.ur_axis_integral,
            rec.ineq_resid,
            rec.lj_ratio,
        ]
        .map(label),
    );
    v.push(rec.clamp_count.to_string());
    v.extend([rec.mass_weighted_r, rec.p2_line, rec.z_line].map(label));
    v.extend(rec.mr4_integral.iter().map(|x| label(*x)));
    v.extend(rec.z_ratio.iter().map(|x| label(*x)));
    v.push(if rec.flags.is_empty() { "ok".into() } else { rec.flags.join(";") });
    v
}

pub struct SeriesWriter<W: Write> {
    inner: csv::Writer<W>,
    columns: usize,
}

impl<W: Write> SeriesWriter<W> {
    /// Writes the header immediately.
    pub fn new(out: W, spec: &RecordSpec) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        let h = header(spec);
        let columns = h.len();
        inner.write_record(&h).map_err(csv_error)?;
        Ok(Self { inner, columns })
    }

    pub fn write(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        let cells = row(rec);
        debug_assert_eq!(cells.len(), self.columns);
        self.inner.write_record(&cells).map_err(csv_error)?;
        self.inner.flush().map_err(|e| Error::Config(format!("series write failed: {e}")))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("series write failed: {e}"))
}

/// A series file held as named numeric columns.
#[derive(Clone, Debug)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn from_reader<R: std::io::Read>(input: R, origin: &Path) -> Result<Self> {
        let err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            msg,
        };
        let mut rdr = csv::Reader::from_reader(input);
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| err(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let flags = columns.iter().position(|c| c == "flags");
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| err(e.to_string()))?;
            let vals = rec
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    if Some(j) == flags {
                        return Ok(f64::NAN);
                    }
                    cell.parse::<f64>()
                        .map_err(|e| err(format!("row {}, column {}: {cell:?}: {e}", i + 2, columns[j])))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(vals);
        }
        Ok(Self { columns, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path)
    }

    /// `(t, value)` pairs of one column.
    pub fn column(&self, name: &str) -> Result<Vec<(f64, f64)>> {
        let j = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Config(format!("series has no column `{name}`")))?;
        let t = self
            .columns
            .iter()
            .position(|c| c == "t")
            .ok_or_else(|| Error::Config("series has no `t` column".into()))?;
        Ok(self.rows.iter().map(|r| (r[t], r[j])).collect())
    }

    pub fn flags_column(&self) -> Option<usize> {
        self.columns.iter().position(|c| c == "flags")
    }
}
