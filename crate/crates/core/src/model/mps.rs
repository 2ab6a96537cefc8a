//! Free-format MPS export.
//!
//! Names are written verbatim (builders never emit whitespace in names).
//! Integer columns are bracketed by `MARKER` lines and every column gets an
//! explicit bound record, so readers that default integer columns to `[0, 1]`
//! or `[0, inf)` agree.

use std::io::Write;

use super::{MilpModel, RowSense};
use crate::error::Result;

const OBJECTIVE_ROW: &str = "OBJ";

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}

/// Writes `model` as free MPS to `out`.
pub fn write_mps<W: Write>(model: &MilpModel, mut out: W) -> Result<()> {
    model.validate()?;
    let row_names: Vec<String> = model.constraints.iter().map(|r| sanitize(&r.name)).collect();
    let col_names: Vec<String> = model.variables.iter().map(|v| sanitize(&v.name)).collect();

    // Column-major view of the row coefficients.
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.variables.len()];
    for (r, row) in model.constraints.iter().enumerate() {
        for &(var, coef) in &row.terms {
            columns[var.0].push((r, coef));
        }
    }
    let mut costs = vec![0.0; model.variables.len()];
    for &(var, coef) in &model.objective {
        costs[var.0] += coef;
    }

    writeln!(out, "NAME {}", model.kind)?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N {OBJECTIVE_ROW}")?;
    for (row, name) in model.constraints.iter().zip(&row_names) {
        let sense = match row.sense {
            RowSense::Le => 'L',
            RowSense::Ge => 'G',
            RowSense::Eq => 'E',
        };
        writeln!(out, " {sense} {name}")?;
    }

    writeln!(out, "COLUMNS")?;
    let mut in_integer = false;
    let mut marker = 0;
    for (k, var) in model.variables.iter().enumerate() {
        if var.integer != in_integer {
            let kind = if var.integer { "INTORG" } else { "INTEND" };
            writeln!(out, " MARKER{marker} 'MARKER' '{kind}'")?;
            marker += 1;
            in_integer = var.integer;
        }
        let name = &col_names[k];
        if costs[k] != 0.0 || columns[k].is_empty() {
            writeln!(out, " {name} {OBJECTIVE_ROW} {:e}", costs[k])?;
        }
        for &(r, coef) in &columns[k] {
            writeln!(out, " {name} {} {coef:e}", row_names[r])?;
        }
    }
    if in_integer {
        writeln!(out, " MARKER{marker} 'MARKER' 'INTEND'")?;
    }

    writeln!(out, "RHS")?;
    for (row, name) in model.constraints.iter().zip(&row_names) {
        if row.rhs != 0.0 {
            writeln!(out, " RHS {name} {:e}", row.rhs)?;
        }
    }

    writeln!(out, "BOUNDS")?;
    for (var, name) in model.variables.iter().zip(&col_names) {
        if var.lower == var.upper {
            writeln!(out, " FX BND {name} {:e}", var.lower)?;
            continue;
        }
        if var.lower == f64::NEG_INFINITY {
            writeln!(out, " MI BND {name}")?;
        } else {
            writeln!(out, " LO BND {name} {:e}", var.lower)?;
        }
        if var.upper == f64::INFINITY {
            writeln!(out, " PL BND {name}")?;
        } else {
            writeln!(out, " UP BND {name} {:e}", var.upper)?;
        }
    }
    writeln!(out, "ENDATA")?;
    Ok(())
}

impl MilpModel {
    pub fn save_mps(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_mps(self, file)
    }

    pub fn to_mps_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_mps(self, &mut buf)?;
        Ok(String::from_utf8(buf).expect("MPS output is ASCII"))
    }
}

#[cfg(test)]
mod tests {
    use std::ffi::CString;

    use crate::altermilp::random_init;
    use crate::environment::{generate, GenerationConfig, GridPreset};
    use crate::model::{build_fixed_all, build_fixed_x};

    fn read_back_objective(path: &std::path::Path) -> (f64, usize, usize) {
        let path = CString::new(path.to_str().unwrap()).unwrap();
        unsafe {
            let h = highs_sys::Highs_create();
            let flag = CString::new("output_flag").unwrap();
            highs_sys::Highs_setBoolOptionValue(h, flag.as_ptr(), 0);
            let status = highs_sys::Highs_readModel(h, path.as_ptr());
            assert!(status >= 0, "HiGHS rejected the MPS file");
            let cols = highs_sys::Highs_getNumCol(h) as usize;
            let rows = highs_sys::Highs_getNumRow(h) as usize;
            highs_sys::Highs_run(h);
            let obj = highs_sys::Highs_getObjectiveValue(h);
            highs_sys::Highs_destroy(h);
            (obj, cols, rows)
        }
    }

    #[test]
    fn exported_lp_reads_back_with_same_optimum() {
        let env = generate(&GenerationConfig::preset(GridPreset::Small, 3)).unwrap();
        let s = random_init(&env, 3);
        let model = build_fixed_all(&env, &s).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixed_all.mps");
        model.save_mps(&path).unwrap();
        let (obj, cols, rows) = read_back_objective(&path);
        assert_eq!(cols, model.variables().len());
        assert_eq!(rows, model.constraints().len());
        let expected = crate::evaluator::evaluate(&env, &s).unwrap().makespan;
        approx::assert_relative_eq!(obj, expected, max_relative = 1e-6);
    }

    #[test]
    fn exported_mip_keeps_integrality_markers() {
        let env = generate(&GenerationConfig::preset(GridPreset::Tiny, 1)).unwrap();
        let s = random_init(&env, 1);
        let model = build_fixed_x(&env, &s.job_assignment, None).unwrap();
        let text = model.to_mps_string().unwrap();
        assert!(text.starts_with("NAME fixed-x\n"));
        assert!(text.contains("'INTORG'"));
        assert!(text.trim_end().ends_with("ENDATA"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixed_x.mps");
        std::fs::write(&path, &text).unwrap();
        let (obj, _, _) = read_back_objective(&path);
        let best = crate::solver::solve(&model, &crate::solver::SolveOptions::exact(10.0)).unwrap();
        approx::assert_relative_eq!(obj, best.objective, max_relative = 1e-6);
    }
}
