//! Built-in bodies available by name on the command line and in suites.

use std::path::Path;

use sinebody_core::BodyDescriptor;

use crate::descriptor::load_descriptor;
use crate::error::{Error, Result};

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "ball", "ball2", "ball3", "ellipse", "spheroid", "square", "cube", "bicylinder", "tricylinder",
];

/// A named body from the zoo; `ball` takes its dimension from `dim`
/// (default 3).
pub fn builtin(name: &str, dim: Option<usize>) -> Result<BodyDescriptor> {
    let body = match name {
        "ball" => BodyDescriptor::ball(dim.unwrap_or(3), 1.0)?,
        "ball2" => BodyDescriptor::ball(2, 1.0)?,
        "ball3" => BodyDescriptor::ball(3, 1.0)?,
        "ellipse" => BodyDescriptor::ellipsoid(&[1.0, 2.0])?,
        "spheroid" => BodyDescriptor::ellipsoid(&[1.0, 1.0, 2.0])?,
        "square" => BodyDescriptor::rectangular_box(&[1.0, 1.0])?,
        "cube" => BodyDescriptor::rectangular_box(&[1.0, 1.0, 1.0])?,
        "bicylinder" => BodyDescriptor::steinmetz(2)?,
        "tricylinder" => BodyDescriptor::steinmetz(3)?,
        _ => return Err(Error::UnknownBody(name.to_string())),
    };
    if let Some(d) = dim {
        if name != "ball" && d != sinebody_core::StarBody::dim(&body) {
            return Err(Error::Usage(format!(
                "built-in body {name} lives in dimension {}, not {d}",
                sinebody_core::StarBody::dim(&body)
            )));
        }
    }
    Ok(body.with_name(name))
}

/// Resolves a command-line body argument: an existing file is read as a
/// descriptor, anything else is looked up among the built-ins.
pub fn resolve(arg: &str, dim: Option<usize>) -> Result<BodyDescriptor> {
    let path = Path::new(arg);
    if path.is_file() {
        let body = load_descriptor(path)?;
        if let Some(d) = dim {
            let found = sinebody_core::StarBody::dim(&body);
            if d != found {
                return Err(Error::Usage(format!("{arg} has dimension {found}, but --dim {d} was given")));
            }
        }
        return Ok(body);
    }
    builtin(arg, dim)
}
