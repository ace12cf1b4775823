//! Standard scalp electrode positions projected to the unit disk.
//!
//! Positions follow the extended 10-10 placement system: coronal electrode
//! rows sit at fractions 0.1..0.9 of the nasion–inion arc, and within each
//! row the electrodes are evenly spaced in inclination along the coronal
//! circle from the midline out to the ear-level ring. The spherical positions
//! are flattened with an azimuthal-equidistant projection (Cz at the origin,
//! ear-level ring at radius 1), the conventional top-down scalp view:
//! +x is the subject's right, +y the front.
//!
//! The table is data, not an assumption about any particular cap: rendering
//! rejects channels missing from it, while every other pipeline stage accepts
//! arbitrary channel names.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Named 2-D electrode positions on the unit disk.
#[derive(Debug, Clone)]
pub struct Montage {
    names: Vec<String>,
    positions: Vec<[f64; 2]>,
    index: HashMap<String, usize>,
}

impl Montage {
    /// Builds a montage from explicit positions.
    ///
    /// Names must be unique and every position must lie within radius 1.2 of
    /// the origin (slightly outside the scalp disk is legal for ear/neck
    /// electrodes).
    pub fn new(entries: Vec<(String, [f64; 2])>) -> Result<Self> {
        let mut names = Vec::with_capacity(entries.len());
        let mut positions = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (name, pos) in entries {
            if name.is_empty() {
                return Err(Error::Validation("empty electrode name".into()));
            }
            if pos[0].hypot(pos[1]) > 1.2 {
                return Err(Error::Validation(format!(
                    "electrode '{name}' at ({}, {}) lies outside radius 1.2",
                    pos[0], pos[1]
                )));
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(Error::Validation(format!("duplicate electrode name '{name}'")));
            }
            names.push(name);
            positions.push(pos);
        }
        Ok(Montage { names, positions, index })
    }

    /// The bundled standard 10-20/10-10 montage (69 positions plus the
    /// legacy aliases T3/T4/T5/T6).
    pub fn standard() -> Montage {
        let mut entries = standard_positions();
        // Older naming for the temporal ring electrodes.
        for (alias, canonical) in [("T3", "T7"), ("T4", "T8"), ("T5", "P7"), ("T6", "P8")] {
            let pos = entries
                .iter()
                .find(|(n, _)| n == canonical)
                .map(|(_, p)| *p)
                .expect("canonical temporal electrodes are always generated");
            entries.push((alias.to_string(), pos));
        }
        Montage::new(entries).expect("bundled table satisfies montage invariants")
    }

    /// Position of `name`, if the montage contains it.
    pub fn position(&self, name: &str) -> Option<[f64; 2]> {
        self.index.get(name).map(|&i| self.positions[i])
    }

    /// Positions for a list of channels, failing on the first unknown name.
    pub fn positions_for(&self, channels: &[String]) -> Result<Vec<[f64; 2]>> {
        channels
            .iter()
            .map(|c| self.position(c).ok_or_else(|| Error::MontageMissing(c.clone())))
            .collect()
    }

    /// Electrode names in table order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Generates the 69 unique scalp positions of the bundled table.
fn standard_positions() -> Vec<(String, [f64; 2])> {
    // (row prefix, nasion-inion fraction, lateral steps present in the row).
    // Step 0 is the midline ("z"); odd steps go left, even steps right;
    // steps 7/8 are the ear-level ring.
    let rows: [(&str, f64, &[u8]); 9] = [
        ("Fp", 0.1, &[1, 0, 2]),
        ("AF", 0.2, &[7, 5, 3, 1, 0, 2, 4, 6, 8]),
        ("F", 0.3, &[7, 5, 3, 1, 0, 2, 4, 6, 8]),
        ("FC", 0.4, &[7, 5, 3, 1, 0, 2, 4, 6, 8]),
        ("C", 0.5, &[7, 5, 3, 1, 0, 2, 4, 6, 8]),
        ("CP", 0.6, &[7, 5, 3, 1, 0, 2, 4, 6, 8]),
        ("P", 0.7, &[7, 5, 3, 1, 0, 2, 4, 6, 8]),
        ("PO", 0.8, &[7, 5, 3, 1, 0, 2, 4, 6, 8]),
        ("O", 0.9, &[1, 0, 2]),
    ];
    let mut entries = Vec::with_capacity(69);
    for (prefix, frac, steps) in rows {
        for &step in steps {
            entries.push((electrode_name(prefix, step), project(frac, step)));
        }
    }
    entries
}

/// 10-10 naming: the ring electrodes of the FC/C/CP rows carry the
/// traditional FT/T/TP prefixes.
fn electrode_name(prefix: &str, step: u8) -> String {
    if step == 0 {
        return format!("{prefix}z");
    }
    let prefix = match (prefix, step) {
        ("FC", 7 | 8) => "FT",
        ("C", 7 | 8) => "T",
        ("CP", 7 | 8) => "TP",
        _ => prefix,
    };
    format!("{prefix}{step}")
}

/// Spherical 10-10 position for (row fraction, lateral step), projected to 2-D.
fn project(frac: f64, step: u8) -> [f64; 2] {
    use std::f64::consts::{FRAC_PI_2, PI};
    // The coronal circle of this row lies in the plane y = cos(frac*pi) with
    // radius sin(frac*pi); psi sweeps it from the vertex (psi=0) to the
    // ear-level ring (psi=±pi/2) in four even steps.
    let y_plane = (frac * PI).cos();
    let rho = (frac * PI).sin();
    let lateral_units = f64::from((step + 1) / 2); // 0, 1, 1, 2, 2, 3, 3, 4, 4
    let sign = if step == 0 {
        0.0
    } else if step % 2 == 1 {
        -1.0 // odd = left hemisphere
    } else {
        1.0
    };
    let psi = sign * lateral_units / 4.0 * FRAC_PI_2;
    let (x3, y3, z3) = (rho * psi.sin(), y_plane, rho * psi.cos());
    // Azimuthal-equidistant: disk radius = inclination from vertex / 90 deg.
    let r = z3.clamp(-1.0, 1.0).acos() / FRAC_PI_2;
    let horiz = x3.hypot(y3);
    if horiz < 1e-12 {
        return [0.0, 0.0];
    }
    [r * x3 / horiz, r * y3 / horiz]
}
