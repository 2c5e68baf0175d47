//! Named Lindblad operator sets.

use crate::error::{Error, Result};
use crate::operator::pauli::{sigma_minus, sigma_x, sigma_y, sigma_z};
use crate::operator::Operator;

pub const PRESET_NAMES: [&str; 4] = ["qubit-decay", "qubit-z", "qubit-xy", "spinhalf-ism"];

/// `qubit-decay`: σ⁻; `qubit-z`: σz/2; `qubit-xy`: σx/2, σy/2;
/// `spinhalf-ism`: Jx, Jy, Jz at j = ½.
pub fn lindblads(name: &str) -> Result<Vec<Operator>> {
    let half = |op: Operator| op.scale_real(0.5);
    Ok(match name {
        "qubit-decay" => vec![sigma_minus()],
        "qubit-z" => vec![half(sigma_z())],
        "qubit-xy" => vec![half(sigma_x()), half(sigma_y())],
        "spinhalf-ism" => vec![half(sigma_x()), half(sigma_y()), half(sigma_z())],
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown preset '{other}' (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}
