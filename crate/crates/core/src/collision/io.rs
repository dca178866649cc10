//! Versioned text serialization of collision tensors.
//!
//! ```text
//! # collision-tensor
//! # format_version = 1
//! # variant = exact
//! # dim = 8
//! # ... further `# key = value` metadata
//! jp,kp,j,k,re,im
//! 0,0,0,0,9.9999999999999978e-1,0.0000000000000000e0
//! ```
//!
//! One row per element in storage order, numbers with 17 significant digits.
//! Metadata keys other than `format_version`, `variant` and `dim` are
//! informational and ignored by the reader.

use std::fmt::Write as _;

use super::tensor::{CollisionTensor, Variant};
use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "# collision-tensor";
const COLUMNS: &str = "jp,kp,j,k,re,im";

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_tensor<T: Real>(tensor: &CollisionTensor<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "# format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "# variant = {}", tensor.variant.name());
    let _ = writeln!(out, "# dim = {}", tensor.dim);
    if let Some(s) = &tensor.spec {
        let _ = writeln!(
            out,
            "# chain = n_qubits {} h {} epsilon {} g {} mass {} beta {} sigma_p {} gamma {}",
            s.n_qubits,
            fmt17(s.h.as_f64()),
            fmt17(s.epsilon.as_f64()),
            fmt17(s.g.as_f64()),
            fmt17(s.mass.as_f64()),
            fmt17(s.beta.as_f64()),
            fmt17(s.sigma_p.as_f64()),
            fmt17(s.gamma.as_f64()),
        );
    }
    if let Some(k) = &tensor.kernel {
        let _ = writeln!(out, "# kernel = {} W {}", k.shape.name(), fmt17(k.cutoff_w.as_f64()));
    }
    if let Some(q) = &tensor.quadrature {
        let _ = writeln!(
            out,
            "# quadrature = panels {} nodes {} intervals {} energy_cutoff {} momentum_cutoff {} max_error {}",
            q.panels,
            q.nodes,
            q.intervals,
            fmt17(q.energy_cutoff.as_f64()),
            fmt17(q.momentum_cutoff.as_f64()),
            fmt17(q.max_error.as_f64()),
        );
    }
    let _ = writeln!(out, "# trace_projected = {}", tensor.trace_projected);
    let _ = writeln!(out, "{COLUMNS}");
    for (i, [jp, kp, j, k]) in tensor.tuples().enumerate() {
        let z = tensor.entries[i];
        let _ =
            writeln!(out, "{jp},{kp},{j},{k},{},{}", fmt17(z.re.as_f64()), fmt17(z.im.as_f64()));
    }
    out
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Format { what: "tensor file", line, message: message.into() }
}

/// Parses the text produced by [`write_tensor`]. Only entries, variant and the
/// trace-projection flag are restored; provenance is left empty.
pub fn read_tensor<T: Real>(text: &str) -> Result<CollisionTensor<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((n, _)) => return Err(bad(n, "missing '# collision-tensor' header")),
        None => return Err(bad(1, "empty input")),
    }
    let mut version = None;
    let mut variant = None;
    let mut dim = None;
    let mut projected = false;
    let mut header_end = 0;
    for (n, line) in lines.by_ref() {
        if line == COLUMNS {
            header_end = n;
            break;
        }
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| bad(n, "expected '#' metadata or column header"))?;
        let (key, value) = body.split_once('=').ok_or_else(|| bad(n, "expected 'key = value'"))?;
        let value = value.trim();
        match key.trim() {
            "format_version" => {
                let v: u32 =
                    value.parse().map_err(|_| bad(n, "format_version is not an integer"))?;
                if v != FORMAT_VERSION {
                    return Err(bad(n, format!("unsupported format_version {v}")));
                }
                version = Some(v);
            }
            "variant" => {
                variant = Some(value.parse::<Variant>().map_err(|e| bad(n, e.to_string()))?)
            }
            "dim" => {
                dim = Some(value.parse::<usize>().map_err(|_| bad(n, "dim is not an integer"))?)
            }
            "trace_projected" => projected = value == "true",
            _ => {}
        }
    }
    if header_end == 0 {
        return Err(bad(0, "missing column header"));
    }
    let (Some(_), Some(variant), Some(dim)) = (version, variant, dim) else {
        return Err(bad(header_end, "header lacks format_version, variant or dim"));
    };
    let mut tensor = CollisionTensor::zeros(dim, variant);
    tensor.trace_projected = projected;
    let mut seen = vec![false; dim.pow(4)];
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad(n, format!("expected 6 fields, found {}", fields.len())));
        }
        let mut idx = [0usize; 4];
        for (slot, field) in idx.iter_mut().zip(&fields[..4]) {
            *slot = field.parse().map_err(|_| bad(n, format!("bad index '{field}'")))?;
            if *slot >= dim {
                return Err(bad(n, format!("index {slot} out of range")));
            }
        }
        let re: f64 = fields[4].parse().map_err(|_| bad(n, "bad real part"))?;
        let im: f64 = fields[5].parse().map_err(|_| bad(n, "bad imaginary part"))?;
        let i = tensor.index(idx[0], idx[1], idx[2], idx[3]);
        if seen[i] {
            return Err(bad(n, "duplicate element"));
        }
        seen[i] = true;
        tensor.entries[i] = cplx(T::lit(re), T::lit(im));
    }
    if seen.iter().any(|&s| !s) {
        return Err(bad(0, "tensor file is missing elements"));
    }
    Ok(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut t = CollisionTensor::<f64>::identity(2, Variant::Narrow);
        t.set(1, 0, 1, 0, cplx(0.1 + 0.2, -1.0 / 3.0));
        let back: CollisionTensor<f64> = read_tensor(&write_tensor(&t)).unwrap();
        assert_eq!(back.entries, t.entries);
        assert_eq!(back.variant, Variant::Narrow);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let t = CollisionTensor::<f64>::identity(2, Variant::Exact);
        let text = write_tensor(&t).replace("1,1,1,1,", "1,1,1,9,");
        match read_tensor::<f64>(&text) {
            Err(Error::Format { line, .. }) => assert!(line > 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_tensor::<f64>("").is_err());
        assert!(read_tensor::<f64>(
            &write_tensor(&t).replace("format_version = 1", "format_version = 7")
        )
        .is_err());
    }
}
