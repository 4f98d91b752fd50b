use std::path::{Path, PathBuf};

use cbirl_core::equality::{EqualityNet, EqualityNetConfig};
use cbirl_core::numcore::{Activation, FeedForwardNet, Matrix};

use super::{content_lines, fmt_f64, parse_f64, read, write, FormatError};

pub const NET_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "cbirl-net";

/// Textual network snapshot:
///
/// ```text
/// cbirl-net 1
/// layers 4 8 1
/// activations relu logistic
/// layer 0
/// <one line per weight row>
/// <bias line>
/// layer 1
/// ...
/// ```
pub fn write_net(net: &FeedForwardNet) -> String {
    let mut out = format!("{MAGIC} {NET_FORMAT_VERSION}\nlayers");
    for n in net.layer_sizes() {
        out.push_str(&format!(" {n}"));
    }
    out.push_str(&format!(
        "\nactivations {} {}\n",
        net.hidden_activation().tag(),
        net.output_activation().tag()
    ));
    let row = |values: &[f64]| values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" ");
    for (l, (w, b)) in net.weights().iter().zip(net.biases()).enumerate() {
        out.push_str(&format!("layer {l}\n"));
        for r in 0..w.rows() {
            out.push_str(&row(w.row(r)));
            out.push('\n');
        }
        out.push_str(&row(b));
        out.push('\n');
    }
    out
}

pub fn parse_net(text: &str) -> Result<FeedForwardNet, FormatError> {
    let mut lines = content_lines(text);
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| FormatError::Invalid(format!("snapshot ends before {what}")))
    };

    let (line, header) = next("header")?;
    let version = header
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| FormatError::syntax(line, "not a network snapshot"))?;
    if version != NET_FORMAT_VERSION.to_string() {
        return Err(FormatError::syntax(line, format!("unsupported snapshot version `{version}`")));
    }

    let (line, layers) = next("layer sizes")?;
    let sizes = layers
        .strip_prefix("layers")
        .ok_or_else(|| FormatError::syntax(line, "expected `layers`"))?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| FormatError::syntax(line, format!("bad layer size `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;

    let (line, acts) = next("activations")?;
    let tags: Vec<&str> = acts
        .strip_prefix("activations")
        .ok_or_else(|| FormatError::syntax(line, "expected `activations`"))?
        .split_whitespace()
        .collect();
    let activation = |t: &str| {
        Activation::from_tag(t).ok_or_else(|| FormatError::syntax(line, format!("unknown activation `{t}`")))
    };
    let [hidden, output] = tags[..] else {
        return Err(FormatError::syntax(line, "expected two activation tags"));
    };
    let (hidden, output) = (activation(hidden)?, activation(output)?);

    if sizes.len() < 2 {
        return Err(FormatError::syntax(line, "need at least two layer sizes"));
    }
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for (l, pair) in sizes.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let (line, tag) = next("layer")?;
        if tag != format!("layer {l}") {
            return Err(FormatError::syntax(line, format!("expected `layer {l}`")));
        }
        let mut read_row = |len: usize| -> Result<Vec<f64>, FormatError> {
            let (line, content) = next("parameters")?;
            let row = content
                .split_whitespace()
                .map(|t| parse_f64(t, line))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != len {
                return Err(FormatError::syntax(line, format!("expected {len} values, found {}", row.len())));
            }
            Ok(row)
        };
        let mut data = Vec::with_capacity(fan_in * fan_out);
        for _ in 0..fan_out {
            data.extend(read_row(fan_in)?);
        }
        weights.push(Matrix::from_vec(fan_out, fan_in, data).map_err(|e| FormatError::Invalid(e.to_string()))?);
        biases.push(read_row(fan_out)?);
    }
    if let Some((line, _)) = lines.next() {
        return Err(FormatError::syntax(line, "trailing content after the last layer"));
    }
    FeedForwardNet::from_parts(sizes, weights, biases, hidden, output).map_err(|e| FormatError::Invalid(e.to_string()))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".config.toml");
    path.with_file_name(name)
}

/// Writes the network to `path` and its configuration to
/// `<path>.config.toml`.
pub fn save_equality(path: &Path, net: &EqualityNet, cfg: &EqualityNetConfig) -> Result<(), FormatError> {
    write(path, &write_net(net.net()))?;
    let toml = toml::to_string(cfg).map_err(|e| FormatError::Invalid(e.to_string()))?;
    write(&sidecar(path), &toml)
}

pub fn load_equality(path: &Path) -> Result<(EqualityNet, EqualityNetConfig), FormatError> {
    let net = parse_net(&read(path)?)?;
    let side = sidecar(path);
    let cfg: EqualityNetConfig = toml::from_str(&read(&side)?)
        .map_err(|e| FormatError::Invalid(format!("{}: {e}", side.display())))?;
    let net = EqualityNet::from_net(net).map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok((net, cfg))
}
