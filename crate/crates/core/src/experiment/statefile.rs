use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distinguish::{dmax, uhlmann_fidelity, MaxRelEntropy};
use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, DensityOperator, C64};

/// On-disk layout: `{"dims": [..], "matrix": [[[re, im], ...], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dims: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
}

pub fn state_from_json(text: &str) -> Result<DensityOperator> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("state file: {e}")))?;
    let rows = file.matrix.len();
    let cols = file.matrix.first().map_or(0, Vec::len);
    if let Some(bad) = file.matrix.iter().find(|r| r.len() != cols) {
        return Err(Error::BadShape {
            rows,
            cols,
            len: bad.len(),
        });
    }
    let data = file
        .matrix
        .iter()
        .flatten()
        .map(|[re, im]| C64::new(*re, *im))
        .collect();
    DensityOperator::new(ComplexMatrix::from_vec(rows, cols, data)?, file.dims)
}

pub fn state_to_json(state: &DensityOperator) -> String {
    let m = state.matrix();
    let file = StateFile {
        dims: state.dims().to_vec(),
        matrix: (0..m.rows())
            .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    };
    serde_json::to_string(&file).expect("state serializes")
}

pub fn load_state(path: &Path) -> Result<DensityOperator> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    state_from_json(&text)
}

pub fn save_state(path: &Path, state: &DensityOperator) -> Result<()> {
    std::fs::write(path, state_to_json(state))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Fidelity, purified distance and D_max(ρ‖σ) for one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureReport {
    pub fidelity: f64,
    pub purified_distance: f64,
    pub dmax: MaxRelEntropy,
}

pub fn measure(rho: &DensityOperator, sigma: &DensityOperator) -> Result<MeasureReport> {
    let f = uhlmann_fidelity(rho, sigma)?;
    Ok(MeasureReport {
        fidelity: f.value(),
        purified_distance: f.purified_distance().value(),
        dmax: dmax(rho, sigma)?,
    })
}
