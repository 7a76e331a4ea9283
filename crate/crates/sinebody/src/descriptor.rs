//! JSON body descriptors.
//!
//! ```json
//! {"dim": 3, "kind": "cylinders",
//!  "cylinders": [{"axis": [1, 0, 0], "radius": 1}, {"axis": [0, 1, 0], "radius": 1}]}
//! ```
//!
//! Syntax and shape errors carry the line and column reported by the parser;
//! geometric errors (non-positive sizes, zero or parallel axes, ...) carry
//! the path of the offending field.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sinebody_core::{BodyDescriptor, BodyKind, Cylinder};

use crate::error::{Error, Result};

/// On-disk form of a body descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: KindFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KindFile {
    Ball { radius: f64 },
    Ellipsoid { semiaxes: Vec<f64> },
    Box { half_widths: Vec<f64> },
    Cylinders { cylinders: Vec<CylinderFile> },
    RadialTable { nodes: Vec<Vec<f64>>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderFile {
    pub axis: Vec<f64>,
    pub radius: f64,
}

impl DescriptorFile {
    /// Validates the descriptor; `origin` names the source in diagnostics.
    pub fn build(&self, origin: &str) -> Result<BodyDescriptor> {
        let kind = match &self.kind {
            KindFile::Ball { radius } => BodyKind::Ball { radius: *radius },
            KindFile::Ellipsoid { semiaxes } => BodyKind::Ellipsoid {
                semiaxes: semiaxes.clone(),
            },
            KindFile::Box { half_widths } => BodyKind::Box {
                half_widths: half_widths.clone(),
            },
            KindFile::Cylinders { cylinders } => BodyKind::CylinderSet {
                cylinders: cylinders
                    .iter()
                    .map(|c| Cylinder {
                        axis: c.axis.clone(),
                        radius: c.radius,
                    })
                    .collect(),
            },
            KindFile::RadialTable { nodes, values } => BodyKind::RadialTable {
                nodes: nodes.clone(),
                values: values.clone(),
            },
        };
        let body = BodyDescriptor::new(self.dim, kind).map_err(|e| match e {
            sinebody_core::Error::InvalidBody { field, reason } => Error::Descriptor {
                path: origin.to_string(),
                field,
                reason,
            },
            other => Error::Core(other),
        })?;
        Ok(match &self.name {
            Some(name) => body.with_name(name.clone()),
            None => body,
        })
    }

    /// Descriptor of an already validated body (axes come out normalized).
    pub fn from_body(body: &BodyDescriptor) -> Self {
        use sinebody_core::StarBody;
        let kind = match body.kind() {
            BodyKind::Ball { radius } => KindFile::Ball { radius: *radius },
            BodyKind::Ellipsoid { semiaxes } => KindFile::Ellipsoid {
                semiaxes: semiaxes.clone(),
            },
            BodyKind::Box { half_widths } => KindFile::Box {
                half_widths: half_widths.clone(),
            },
            BodyKind::CylinderSet { cylinders } => KindFile::Cylinders {
                cylinders: cylinders
                    .iter()
                    .map(|c| CylinderFile {
                        axis: c.axis.clone(),
                        radius: c.radius,
                    })
                    .collect(),
            },
            BodyKind::RadialTable { nodes, values } => KindFile::RadialTable {
                nodes: nodes.clone(),
                values: values.clone(),
            },
        };
        Self {
            dim: body.dim(),
            name: body.name().map(str::to_string),
            kind,
        }
    }
}

/// Parses and validates a descriptor from JSON text.
pub fn parse_descriptor(text: &str, origin: &str) -> Result<BodyDescriptor> {
    let file: DescriptorFile = serde_json::from_str(text).map_err(|source| Error::Json {
        path: origin.to_string(),
        source,
    })?;
    file.build(origin)
}

/// Reads, parses and validates a descriptor file.
pub fn load_descriptor(path: &Path) -> Result<BodyDescriptor> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_descriptor(&text, &path.display().to_string())
}

/// Serializes a body as pretty-printed JSON.
pub fn to_json(body: &BodyDescriptor) -> String {
    serde_json::to_string_pretty(&DescriptorFile::from_body(body)).expect("descriptors serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use sinebody_core::StarBody;

    #[test]
    fn parses_every_kind() {
        let texts = [
            r#"{"dim": 3, "kind": "ball", "radius": 2}"#,
            r#"{"dim": 2, "kind": "ellipsoid", "semiaxes": [1, 2]}"#,
            r#"{"dim": 3, "kind": "box", "half_widths": [1, 1, 1]}"#,
            r#"{"dim": 3, "kind": "cylinders", "cylinders": [{"axis": [2, 0, 0], "radius": 1}, {"axis": [0, 1, 0], "radius": 1}]}"#,
            r#"{"dim": 2, "kind": "radial_table", "nodes": [[1, 0], [0, 1]], "values": [1, 2]}"#,
        ];
        for t in texts {
            let body = parse_descriptor(t, "inline").unwrap();
            let again = parse_descriptor(&to_json(&body), "round trip").unwrap();
            assert_eq!(body.kind(), again.kind());
            assert_eq!(body.label(), again.label());
        }
    }

    #[test]
    fn axes_are_normalized_on_load() {
        let body = parse_descriptor(
            r#"{"dim": 3, "kind": "cylinders", "cylinders": [{"axis": [3, 0, 0], "radius": 1}, {"axis": [0, 0, 5], "radius": 1}]}"#,
            "inline",
        )
        .unwrap();
        match body.kind() {
            BodyKind::CylinderSet { cylinders } => {
                assert_eq!(cylinders[0].axis, vec![1.0, 0.0, 0.0]);
                assert_eq!(cylinders[1].axis, vec![0.0, 0.0, 1.0]);
            }
            other => panic!("unexpected kind {other:?}"),
        }
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = parse_descriptor(
            r#"{"dim": 3, "kind": "cylinders", "cylinders": [{"axis": [1, 0, 0], "radius": 1}, {"axis": [0, 0, 0], "radius": 1}]}"#,
            "bad.json",
        )
        .unwrap_err();
        assert!(err.to_string().contains("cylinders[1].axis"), "{err}");
        assert!(err.is_input_error());

        let err = parse_descriptor(r#"{"dim": 2, "kind": "ellipsoid", "semiaxes": [1, -2]}"#, "bad.json").unwrap_err();
        assert!(err.to_string().contains("semiaxes[1]"), "{err}");
    }

    #[test]
    fn syntax_errors_report_a_line() {
        let err = parse_descriptor("{\n  \"dim\": 3,\n  \"kind\": \"ball\",\n  \"radius\": }", "bad.json").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
        let err = parse_descriptor(r#"{"dim": 3, "kind": "torus"}"#, "bad.json").unwrap_err();
        assert!(err.to_string().contains("torus"), "{err}");
    }
}
