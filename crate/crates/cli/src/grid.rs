//! Grid arguments: a comma list `0,0.5,1` or an inclusive range `lo:hi:n`.

pub fn parse(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    let out = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range grid must be lo:hi:n, got '{spec}'"));
        }
        let lo = number(parts[0])?;
        let hi = number(parts[1])?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("point count in '{spec}' must be a positive integer"))?;
        match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        }
    } else {
        spec.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    if out.is_empty() {
        return Err(format!("grid '{spec}' is empty"));
    }
    Ok(out)
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{}' is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("grid value '{}' is not finite", s.trim()));
    }
    Ok(v)
}
