//! JSON fixtures for structure constants and matrix representations.
//!
//! ```json
//! {
//!   "name": "so3",
//!   "dim": 3,
//!   "c": [[0, 1, 2, 1.0], [1, 2, 0, 1.0], [0, 2, 1, -1.0]],
//!   "hilbert_dim": 3,
//!   "generators": [[[re, im], ...], ...]
//! }
//! ```
//!
//! Each `c` entry `[a, b, k, value]` with `a < b` sets `c[a][b][k]`; the
//! antisymmetric partner is implied. Generators, when present, are listed
//! row-major as `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, MatrixRepresentation, StructureConstants};
use crate::error::{Error, Result};
use crate::rotor::rma_structure_constants;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFixture {
    pub name: String,
    pub dim: usize,
    pub c: Vec<(usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hilbert_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<[f64; 2]>>>,
}

impl AlgebraFixture {
    pub fn from_structure_constants(name: &str, sc: &StructureConstants) -> Self {
        Self { name: name.into(), dim: sc.dim(), c: sc.triplets(), hilbert_dim: None, generators: None }
    }

    pub fn from_representation(name: &str, rep: &MatrixRepresentation) -> Self {
        let mut f = Self::from_structure_constants(name, rep.structure_constants());
        f.hilbert_dim = Some(rep.dim_hilbert());
        f.generators = Some(
            rep.generators()
                .iter()
                .map(|g| {
                    let d = g.nrows();
                    (0..d * d).map(|i| [g[(i / d, i % d)].re, g[(i / d, i % d)].im]).collect()
                })
                .collect(),
        );
        f
    }

    pub fn structure_constants(&self) -> Result<StructureConstants> {
        if let Some(&(a, b, k, _)) = self.c.iter().find(|(a, b, _, _)| a >= b) {
            return Err(Error::Fixture(format!("{}: entry ({a}, {b}, {k}) must have a < b", self.name)));
        }
        StructureConstants::from_triplets(self.dim, &self.c)
            .map_err(|e| Error::Fixture(format!("{}: {e}", self.name)))
    }

    pub fn representation(&self) -> Result<MatrixRepresentation> {
        let sc = self.structure_constants()?;
        let (d, gens) = match (self.hilbert_dim, &self.generators) {
            (Some(d), Some(g)) => (d, g),
            _ => return Err(Error::Fixture(format!("{}: no matrix representation given", self.name))),
        };
        let mats = gens
            .iter()
            .enumerate()
            .map(|(a, flat)| {
                if flat.len() != d * d {
                    return Err(Error::Fixture(format!(
                        "{}: generator {a} has {} entries, expected {}",
                        self.name,
                        flat.len(),
                        d * d
                    )));
                }
                Ok(CMatrix::from_fn(d, d, |r, c| {
                    let [re, im] = flat[r * d + c];
                    Complex64::new(re, im)
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixRepresentation::new(sc, mats).map_err(|e| Error::Fixture(format!("{}: {e}", self.name)))
    }

    /// Canonical layout: one structure constant or generator per line.
    pub fn to_json(&self) -> String {
        let mut s = format!("{{\n  \"name\": {},\n  \"dim\": {},\n  \"c\": [\n", js(&self.name), self.dim);
        let rows: Vec<String> = self
            .c
            .iter()
            .map(|&(a, b, k, v)| format!("    [{a}, {b}, {k}, {}]", js(&v)))
            .collect();
        if rows.is_empty() {
            s.truncate(s.len() - 1);
            s.push(']');
        } else {
            s.push_str(&rows.join(",\n"));
            s.push_str("\n  ]");
        }
        if let (Some(d), Some(gens)) = (self.hilbert_dim, &self.generators) {
            s.push_str(&format!(",\n  \"hilbert_dim\": {d},\n  \"generators\": [\n"));
            let rows: Vec<String> = gens
                .iter()
                .map(|g| {
                    let entries: Vec<String> = g.iter().map(|[re, im]| format!("[{}, {}]", js(re), js(im))).collect();
                    format!("    [{}]", entries.join(", "))
                })
                .collect();
            s.push_str(&rows.join(",\n"));
            s.push_str("\n  ]");
        }
        s.push_str("\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Fixture(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
    }
}

fn js<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("value serializes")
}

/// Names and contents of the fixtures shipped with the crate.
pub const SHIPPED: [(&str, &str); 4] = [
    ("so3", include_str!("../fixtures/so3.json")),
    ("r6", include_str!("../fixtures/r6.json")),
    ("rma", include_str!("../fixtures/rma.json")),
    ("spin1", include_str!("../fixtures/spin1.json")),
];

/// Parses a shipped fixture by name.
pub fn shipped(name: &str) -> Result<AlgebraFixture> {
    let (_, text) = SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Fixture(format!("no shipped fixture named {name:?}")))?;
    AlgebraFixture::from_json(text)
}

/// The fixtures as produced by the built-in constructors.
pub fn builtin(name: &str) -> Result<AlgebraFixture> {
    Ok(match name {
        "so3" => AlgebraFixture::from_structure_constants("so3", &StructureConstants::so3()),
        "r6" => AlgebraFixture::from_structure_constants("r6", &StructureConstants::abelian(6)),
        "rma" => AlgebraFixture::from_structure_constants("rma", &rma_structure_constants()),
        "spin1" => AlgebraFixture::from_representation("spin1", &MatrixRepresentation::spin1()),
        _ => return Err(Error::Fixture(format!("no built-in fixture named {name:?}"))),
    })
}
