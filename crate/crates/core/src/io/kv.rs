use super::fmt_float;
use crate::cell::EffectiveCoefficients;
use crate::error::{Error, Result};
use crate::fem::Tensor2;
use crate::mesh::{Inclusion, UnitCellGeometry};

pub const COEFFICIENT_KEYS: [&str; 9] = [
    "porosity",
    "D11",
    "D12",
    "D22",
    "K11",
    "K12",
    "K22",
    "sigma_bar",
    "dirichlet_mean",
];

/// `key=value` lines for the nine coefficients, preceded by a commented geometry echo.
pub fn coefficients_kv(c: &EffectiveCoefficients) -> String {
    let mut out = String::new();
    match c.geometry.inclusion {
        Inclusion::Disk { center, radius } => {
            out += &format!("# inclusion=disk center={},{} radius={}\n", center[0], center[1], radius)
        }
        Inclusion::None => out += "# inclusion=none\n",
    }
    out += &format!("# target_h={}\n", c.geometry.target_h);
    let values = [
        c.porosity,
        c.d.0[0][0],
        c.d.0[0][1],
        c.d.0[1][1],
        c.k.0[0][0],
        c.k.0[0][1],
        c.k.0[1][1],
        c.sigma_bar,
        c.dirichlet_mean,
    ];
    for (k, v) in COEFFICIENT_KEYS.iter().zip(values) {
        out += &format!("{k}={}\n", fmt_float(v));
    }
    out
}

/// Parses a coefficients file; all nine keys are required, `#` lines are ignored. The
/// geometry is not recovered and is reported as an empty cell.
pub fn parse_coefficients_kv(text: &str) -> Result<EffectiveCoefficients> {
    let mut values = [None; 9];
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: n + 1,
            column: 1,
            message: "expected key=value".into(),
        })?;
        let Some(slot) = COEFFICIENT_KEYS.iter().position(|k| *k == key.trim()) else {
            continue;
        };
        values[slot] = Some(value.trim().parse::<f64>().map_err(|e| Error::Parse {
            line: n + 1,
            column: line.find('=').unwrap_or(0) + 2,
            message: e.to_string(),
        })?);
    }
    let mut v = [0.0; 9];
    for (i, slot) in values.iter().enumerate() {
        v[i] = slot.ok_or_else(|| Error::validation(COEFFICIENT_KEYS[i], "missing from coefficients file"))?;
    }
    Ok(EffectiveCoefficients {
        geometry: UnitCellGeometry::empty(1.0),
        porosity: v[0],
        d: Tensor2::new(v[1], v[2], v[2], v[3]),
        k: Tensor2::new(v[4], v[5], v[5], v[6]),
        sigma_bar: v[7],
        dirichlet_mean: v[8],
    })
}
