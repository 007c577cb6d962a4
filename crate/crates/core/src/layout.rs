//! Cell geometry, neighbor classification and the built-in circuit layouts.
//!
//! Coordinates are integers in units of the dot spacing `a`; adjacent cells
//! sit `2a` apart center-to-center. Device cells map to qubits in the order
//! they appear in the layout.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QcaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPosition {
    pub x: i64,
    pub y: i64,
}

impl GridPosition {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn offset_to(&self, other: &GridPosition) -> (i64, i64) {
        (other.x - self.x, other.y - self.y)
    }
}

impl fmt::Display for GridPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeighborClass {
    Nearest,
    Diagonal,
    None,
}

/// Classify the coupling between two cells from their grid offset.
///
/// Only horizontal/vertical neighbors at the cell pitch and diagonal
/// neighbors one pitch away in both directions interact; everything else is
/// dropped.
pub fn classify_pair(p1: GridPosition, p2: GridPosition) -> Result<NeighborClass> {
    if p1 == p2 {
        return Err(QcaError::Layout(format!("cells overlap at {p1}")));
    }
    let (dx, dy) = p1.offset_to(&p2);
    Ok(match (dx.abs(), dy.abs()) {
        (2, 0) | (0, 2) => NeighborClass::Nearest,
        (2, 2) => NeighborClass::Diagonal,
        _ => NeighborClass::None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Device,
    Driver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: String,
    pub position: GridPosition,
    pub role: Role,
    /// Fixed polarization, present only for drivers.
    pub driver_polarization: Option<f64>,
}

impl Cell {
    pub fn device(id: impl Into<String>, x: i64, y: i64) -> Self {
        Self {
            id: id.into(),
            position: GridPosition::new(x, y),
            role: Role::Device,
            driver_polarization: None,
        }
    }

    pub fn driver(id: impl Into<String>, x: i64, y: i64, p: f64) -> Self {
        Self {
            id: id.into(),
            position: GridPosition::new(x, y),
            role: Role::Driver,
            driver_polarization: Some(p),
        }
    }

    pub fn is_driver(&self) -> bool {
        self.role == Role::Driver
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitLayout {
    pub name: String,
    pub cells: Vec<Cell>,
}

impl CircuitLayout {
    /// Build and validate a layout.
    pub fn new(name: impl Into<String>, cells: Vec<Cell>) -> Result<Self> {
        let layout = Self {
            name: name.into(),
            cells,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let mut ids = HashSet::new();
        for cell in &self.cells {
            if !seen.insert(cell.position) {
                return Err(QcaError::Layout(format!(
                    "cell `{}` overlaps another cell at {}",
                    cell.id, cell.position
                )));
            }
            if !ids.insert(cell.id.as_str()) {
                return Err(QcaError::Layout(format!("duplicate cell id `{}`", cell.id)));
            }
            match (cell.role, cell.driver_polarization) {
                (Role::Driver, Some(p)) => check_polarization(p)?,
                (Role::Driver, None) => {
                    return Err(QcaError::Layout(format!(
                        "driver `{}` has no polarization",
                        cell.id
                    )))
                }
                (Role::Device, Some(_)) => {
                    return Err(QcaError::Layout(format!(
                        "device `{}` must not carry a polarization",
                        cell.id
                    )))
                }
                (Role::Device, None) => {}
            }
        }
        Ok(())
    }

    /// Device cells in qubit order.
    pub fn devices(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.role == Role::Device)
    }

    pub fn drivers(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.role == Role::Driver)
    }

    pub fn n_devices(&self) -> usize {
        self.devices().count()
    }

    pub fn n_drivers(&self) -> usize {
        self.drivers().count()
    }

    pub fn driver_polarizations(&self) -> Vec<f64> {
        self.drivers()
            .map(|c| c.driver_polarization.unwrap_or(0.0))
            .collect()
    }

    /// Replace driver polarizations, in driver order.
    pub fn with_driver_polarizations(mut self, pols: &[f64]) -> Result<Self> {
        if pols.len() != self.n_drivers() {
            return Err(QcaError::DimensionMismatch {
                expected: self.n_drivers(),
                found: pols.len(),
            });
        }
        for &p in pols {
            check_polarization(p)?;
        }
        let mut it = pols.iter();
        for cell in self.cells.iter_mut().filter(|c| c.is_driver()) {
            cell.driver_polarization = it.next().copied();
        }
        Ok(self)
    }

    /// Index of the device cell with the given id.
    pub fn device_index(&self, id: &str) -> Option<usize> {
        self.devices().position(|c| c.id == id)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: LayoutFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&LayoutFile::from(self))?)
    }
}

fn check_polarization(p: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&p) {
        return Err(QcaError::Domain(format!(
            "polarization {p} outside [-1, 1]"
        )));
    }
    Ok(())
}

/// On-disk layout format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub name: String,
    pub cells: Vec<LayoutFileCell>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFileCell {
    pub id: String,
    pub x: i64,
    pub y: i64,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl TryFrom<LayoutFile> for CircuitLayout {
    type Error = QcaError;

    fn try_from(file: LayoutFile) -> Result<Self> {
        let cells = file
            .cells
            .into_iter()
            .map(|c| Cell {
                id: c.id,
                position: GridPosition::new(c.x, c.y),
                role: c.role,
                driver_polarization: c.p,
            })
            .collect();
        CircuitLayout::new(file.name, cells)
    }
}

impl From<&CircuitLayout> for LayoutFile {
    fn from(layout: &CircuitLayout) -> Self {
        Self {
            name: layout.name.clone(),
            cells: layout
                .cells
                .iter()
                .map(|c| LayoutFileCell {
                    id: c.id.clone(),
                    x: c.position.x,
                    y: c.position.y,
                    role: c.role,
                    p: c.driver_polarization,
                })
                .collect(),
        }
    }
}

/// The canonical circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BuiltinLayout {
    /// One driver followed by `N` device cells in a row.
    Wire(usize),
    Inverter,
    Majority6,
    Majority2,
}

impl BuiltinLayout {
    /// Every built-in layout with at most `max_devices` device cells.
    pub fn all_up_to(max_devices: usize) -> Vec<BuiltinLayout> {
        let mut out: Vec<_> = (1..=max_devices).map(BuiltinLayout::Wire).collect();
        for b in [Self::Inverter, Self::Majority6, Self::Majority2] {
            if b.n_devices() <= max_devices {
                out.push(b);
            }
        }
        out
    }

    pub fn n_devices(&self) -> usize {
        match self {
            Self::Wire(n) => *n,
            Self::Inverter | Self::Majority6 => 6,
            Self::Majority2 => 2,
        }
    }

    /// Build the layout with every driver at polarization +1.
    pub fn build(&self) -> Result<CircuitLayout> {
        match *self {
            Self::Wire(n) => {
                if n == 0 {
                    return Err(QcaError::InvalidArgument(
                        "wire needs at least one device cell".into(),
                    ));
                }
                let mut cells = vec![Cell::driver("D", 0, 0, 1.0)];
                cells.extend((0..n).map(|k| Cell::device(format!("c{k}"), 2 * k as i64 + 2, 0)));
                CircuitLayout::new(format!("wire{n}"), cells)
            }
            Self::Inverter => CircuitLayout::new(
                "inverter",
                vec![
                    Cell::driver("D", 0, 0, 1.0),
                    Cell::device("c0", 2, 0),
                    Cell::device("c1", 2, 2),
                    Cell::device("c2", 2, -2),
                    Cell::device("c3", 4, 2),
                    Cell::device("c4", 4, -2),
                    Cell::device("c5", 6, 0),
                ],
            ),
            Self::Majority6 => CircuitLayout::new(
                "majority6",
                vec![
                    Cell::driver("A", 0, 4, 1.0),
                    Cell::driver("B", -4, 0, 1.0),
                    Cell::driver("C", 0, -4, 1.0),
                    Cell::device("c0", 0, 2),
                    Cell::device("c1", -2, 0),
                    Cell::device("c2", 0, -2),
                    Cell::device("c3", 0, 0),
                    Cell::device("c4", 2, 0),
                    Cell::device("c5", 4, 0),
                ],
            ),
            Self::Majority2 => CircuitLayout::new(
                "majority2",
                vec![
                    Cell::driver("A", 0, 2, 1.0),
                    Cell::driver("B", -2, 0, 1.0),
                    Cell::driver("C", 0, -2, 1.0),
                    Cell::device("c0", 0, 0),
                    Cell::device("c1", 2, 0),
                ],
            ),
        }
    }

    /// Device index of the cell that carries the circuit's output.
    pub fn output_cell(&self) -> usize {
        match self {
            Self::Wire(n) => n.saturating_sub(1),
            Self::Inverter | Self::Majority6 => 5,
            Self::Majority2 => 1,
        }
    }
}

impl FromStr for BuiltinLayout {
    type Err = QcaError;

    /// Accepts `wire(N)`, `wireN`, `inverter`, `majority6`, `majority2`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "inverter" => return Ok(Self::Inverter),
            "majority6" => return Ok(Self::Majority6),
            "majority2" => return Ok(Self::Majority2),
            _ => {}
        }
        if let Some(rest) = lower.strip_prefix("wire") {
            let digits = rest.trim_start_matches('(').trim_end_matches(')');
            let n: usize = digits
                .parse()
                .map_err(|_| QcaError::UnknownLayout(s.to_string()))?;
            if n == 0 {
                return Err(QcaError::InvalidArgument("wire(0) has no cells".into()));
            }
            return Ok(Self::Wire(n));
        }
        Err(QcaError::UnknownLayout(s.to_string()))
    }
}

/// Look up a built-in layout by name; `wire` takes its cell count in `params`.
pub fn builtin_layout(name: &str, params: &[i64]) -> Result<CircuitLayout> {
    let which = match name {
        "wire" => {
            let n = *params
                .first()
                .ok_or_else(|| QcaError::InvalidArgument("wire requires a cell count".into()))?;
            if n < 1 {
                return Err(QcaError::InvalidArgument(format!(
                    "wire needs N >= 1, got {n}"
                )));
            }
            BuiltinLayout::Wire(n as usize)
        }
        other => other.parse()?,
    };
    which.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(x: i64, y: i64) -> GridPosition {
        GridPosition::new(x, y)
    }

    fn partners(layout: &CircuitLayout, id: &str, class: NeighborClass, role: Role) -> usize {
        let cell = layout.cells.iter().find(|c| c.id == id).unwrap();
        layout
            .cells
            .iter()
            .filter(|c| c.id != id && c.role == role)
            .filter(|c| classify_pair(cell.position, c.position).unwrap() == class)
            .count()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_pair(gp(0, 0), gp(2, 0)).unwrap(),
            NeighborClass::Nearest
        );
        assert_eq!(
            classify_pair(gp(0, 0), gp(2, 2)).unwrap(),
            NeighborClass::Diagonal
        );
        assert_eq!(
            classify_pair(gp(0, 0), gp(4, 0)).unwrap(),
            NeighborClass::None
        );
        assert_eq!(
            classify_pair(gp(0, 0), gp(0, -2)).unwrap(),
            NeighborClass::Nearest
        );
        assert_eq!(
            classify_pair(gp(1, 1), gp(-1, 3)).unwrap(),
            NeighborClass::Diagonal
        );
        assert!(classify_pair(gp(3, 3), gp(3, 3)).is_err());
    }

    #[test]
    fn wire_layout_shape() {
        let w = builtin_layout("wire", &[3]).unwrap();
        assert_eq!(w.n_drivers(), 1);
        assert_eq!(w.n_devices(), 3);
        let pos: Vec<_> = w.devices().map(|c| c.position).collect();
        assert_eq!(pos, vec![gp(2, 0), gp(4, 0), gp(6, 0)]);
        assert!(builtin_layout("wire", &[0]).is_err());
        assert!(builtin_layout("wire", &[]).is_err());
        assert!(matches!(
            builtin_layout("bridge", &[]),
            Err(QcaError::UnknownLayout(_))
        ));
    }

    #[test]
    fn wire_pair_counts() {
        for n in 1..=9 {
            let w = BuiltinLayout::Wire(n).build().unwrap();
            let devs: Vec<_> = w.devices().collect();
            let (mut near, mut diag) = (0, 0);
            for i in 0..devs.len() {
                for j in i + 1..devs.len() {
                    match classify_pair(devs[i].position, devs[j].position).unwrap() {
                        NeighborClass::Nearest => near += 1,
                        NeighborClass::Diagonal => diag += 1,
                        NeighborClass::None => {}
                    }
                }
            }
            assert_eq!(near, n - 1);
            assert_eq!(diag, 0);
        }
    }

    #[test]
    fn inverter_output_couples_diagonally() {
        let inv = BuiltinLayout::Inverter.build().unwrap();
        assert_eq!(
            partners(&inv, "c5", NeighborClass::Diagonal, Role::Device),
            2
        );
        assert_eq!(
            partners(&inv, "c5", NeighborClass::Nearest, Role::Device),
            0
        );
        let c5 = inv.cells.iter().find(|c| c.id == "c5").unwrap().position;
        for id in ["c3", "c4"] {
            let p = inv.cells.iter().find(|c| c.id == id).unwrap().position;
            assert_eq!(classify_pair(c5, p).unwrap(), NeighborClass::Diagonal);
        }
    }

    #[test]
    fn majority_inputs_have_one_driver_each() {
        let m = BuiltinLayout::Majority6.build().unwrap();
        for id in ["c0", "c1", "c2"] {
            assert_eq!(
                partners(&m, id, NeighborClass::Nearest, Role::Driver),
                1,
                "{id}"
            );
        }
        // c4 sees c0 and c2 across the diagonal
        assert_eq!(partners(&m, "c4", NeighborClass::Diagonal, Role::Device), 2);
        let m2 = BuiltinLayout::Majority2.build().unwrap();
        assert_eq!((m2.n_drivers(), m2.n_devices()), (3, 2));
    }

    #[test]
    fn builtin_names_parse() {
        assert_eq!(
            "wire(7)".parse::<BuiltinLayout>().unwrap(),
            BuiltinLayout::Wire(7)
        );
        assert_eq!(
            "wire15".parse::<BuiltinLayout>().unwrap(),
            BuiltinLayout::Wire(15)
        );
        assert_eq!(
            "Majority2".parse::<BuiltinLayout>().unwrap(),
            BuiltinLayout::Majority2
        );
        assert!("wire()".parse::<BuiltinLayout>().is_err());
        assert!("wire(0)".parse::<BuiltinLayout>().is_err());
    }

    #[test]
    fn layout_rejects_overlap_and_bad_drivers() {
        let overlap =
            CircuitLayout::new("x", vec![Cell::device("a", 0, 0), Cell::device("b", 0, 0)]);
        assert!(matches!(overlap, Err(QcaError::Layout(_))));
        let bad = CircuitLayout::new("x", vec![Cell::driver("d", 0, 0, 1.5)]);
        assert!(matches!(bad, Err(QcaError::Domain(_))));
        let w = BuiltinLayout::Wire(2).build().unwrap();
        assert!(w.clone().with_driver_polarizations(&[0.3, 0.1]).is_err());
        let w = w.with_driver_polarizations(&[-0.25]).unwrap();
        assert_eq!(w.driver_polarizations(), vec![-0.25]);
    }

    #[test]
    fn layout_file_roundtrip_and_strictness() {
        let src = r#"{"name":"pair","cells":[
            {"id":"D","x":0,"y":0,"role":"driver","p":-1.0},
            {"id":"c0","x":2,"y":0,"role":"device"},
            {"id":"c1","x":4,"y":0,"role":"device"}]}"#;
        let l = CircuitLayout::from_json_str(src).unwrap();
        assert_eq!(l.n_devices(), 2);
        assert_eq!(l.driver_polarizations(), vec![-1.0]);
        let again = CircuitLayout::from_json_str(&l.to_json_string().unwrap()).unwrap();
        assert_eq!(again, l);

        let unknown = r#"{"name":"x","cells":[{"id":"a","x":0,"y":0,"role":"device","z":1}]}"#;
        assert!(CircuitLayout::from_json_str(unknown).is_err());
        let top_unknown = r#"{"name":"x","cells":[],"pitch":2}"#;
        assert!(CircuitLayout::from_json_str(top_unknown).is_err());
        let no_p = r#"{"name":"x","cells":[{"id":"a","x":0,"y":0,"role":"driver"}]}"#;
        assert!(CircuitLayout::from_json_str(no_p).is_err());
    }
}
