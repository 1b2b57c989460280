//! Angle parsing and formatting.
//!
//! Grammar: a token ending in `pi` (optionally `Npi`, `pi/D` or `Npi/D` with
//! decimal N, D) denotes the corresponding multiple of pi; a bare decimal is
//! radians. A leading minus applies to the whole token.

use std::f64::consts::PI;

pub fn parse_angle(token: &str) -> Result<f64, String> {
    let t = token.trim();
    if t.is_empty() {
        return Err("empty angle".into());
    }
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    let bad =
        |t: &str| format!("cannot parse angle '{t}' (examples: 0.125pi, pi/6, -0.25pi, 1.5708)");
    if let Some(pos) = t.find("pi") {
        let (num, rest) = t.split_at(pos);
        let rest = &rest[2..];
        let numerator = if num.is_empty() {
            1.0
        } else {
            num.parse::<f64>().map_err(|_| bad(token))?
        };
        let denominator = if rest.is_empty() {
            1.0
        } else {
            let d = rest.strip_prefix('/').ok_or_else(|| bad(token))?;
            let d: f64 = d.parse().map_err(|_| bad(token))?;
            if d == 0.0 {
                return Err("zero denominator in angle".into());
            }
            d
        };
        Ok(sign * numerator * PI / denominator)
    } else {
        t.parse::<f64>().map(|v| sign * v).map_err(|_| bad(token))
    }
}

/// Parse a comma-separated angle triple.
pub fn parse_angle3(token: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = token.split(',').collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected three comma-separated angles, got '{token}'"
        ));
    }
    Ok([
        parse_angle(parts[0])?,
        parse_angle(parts[1])?,
        parse_angle(parts[2])?,
    ])
}

pub fn parse_angle2(token: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = token.split(',').collect();
    if parts.len() != 2 {
        return Err(format!(
            "expected two comma-separated angles, got '{token}'"
        ));
    }
    Ok([parse_angle(parts[0])?, parse_angle(parts[1])?])
}

/// Render an angle as a multiple of pi, e.g. `0.125pi`.
pub fn format_pi(x: f64) -> String {
    let frac = x / PI;
    let rounded = (frac * 1e9).round() / 1e9;
    let mut s = format!("{rounded}");
    if s == "-0" {
        s = "0".into();
    }
    format!("{s}pi")
}
