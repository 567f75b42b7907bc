//! CSV evaluation grids: rows are grid points (disk samples then circle
//! samples), columns are re(z), im(z) followed by re/im of each matrix entry.

use crate::config::GridConfig;
use aip_core::circle;
use aip_core::colligation::CoefficientMatrix;
use aip_core::linalg::{C64, CMatrix};
use aip_core::parametrization::{disk_samples, lft_solution, SchurParameter};
use aip_core::Result;

const GRID_SEED: u64 = 0x6A1D;

pub fn grid_points(grid: &GridConfig) -> Vec<C64> {
    let mut points = disk_samples(grid.disk_points, grid.radius, GRID_SEED);
    points.extend(circle::grid(grid.circle_points));
    points
}

fn push_entries(row: &mut String, m: &CMatrix) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            row.push_str(&format!(",{:.16e},{:.16e}", m[(i, j)].re, m[(i, j)].im));
        }
    }
}

fn block_header(name: &str, rows: usize, cols: usize, out: &mut String) {
    for i in 0..rows {
        for j in 0..cols {
            out.push_str(&format!(",{name}_{i}{j}_re,{name}_{i}{j}_im"));
        }
    }
}

/// S over the grid, blocks named s0, s1, s2, s.
pub fn s_grid_csv(cm: &CoefficientMatrix, grid: &GridConfig) -> Result<String> {
    let mut out = String::from("re_z,im_z");
    block_header("s0", cm.dim_e2, cm.dim_e1, &mut out);
    block_header("s1", cm.dim_n1, cm.dim_e1, &mut out);
    block_header("s2", cm.dim_e2, cm.dim_n2, &mut out);
    block_header("s", cm.dim_n1, cm.dim_n2, &mut out);
    out.push('\n');
    for z in grid_points(grid) {
        let blocks = cm.blocks(z)?;
        let mut row = format!("{:.16e},{:.16e}", z.re, z.im);
        push_entries(&mut row, &blocks.s0);
        push_entries(&mut row, &blocks.s1);
        push_entries(&mut row, &blocks.s2);
        push_entries(&mut row, &blocks.s);
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// One solution w over the grid.
pub fn w_grid_csv(
    cm: &CoefficientMatrix,
    om: &SchurParameter,
    grid: &GridConfig,
) -> Result<String> {
    let mut out = String::from("re_z,im_z");
    block_header("w", cm.dim_e2, cm.dim_e1, &mut out);
    out.push('\n');
    for z in grid_points(grid) {
        let w = lft_solution(cm, om, z)?;
        let mut row = format!("{:.16e},{:.16e}", z.re, z.im);
        push_entries(&mut row, &w);
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}
