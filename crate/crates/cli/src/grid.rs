//! Grid flags: `start:stop:count` (inclusive, evenly spaced) or a comma list.

pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("grid is empty".into());
    }
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [single] => single
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad grid value '{v}': {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?,
        [start, stop, count] => {
            let start: f64 = start
                .trim()
                .parse()
                .map_err(|e| format!("bad range start '{start}': {e}"))?;
            let stop: f64 = stop
                .trim()
                .parse()
                .map_err(|e| format!("bad range stop '{stop}': {e}"))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|e| format!("bad range count '{count}': {e}"))?;
            match count {
                0 => return Err("range count must be at least 1".into()),
                1 => vec![start],
                _ => (0..count)
                    .map(|i| {
                        if i + 1 == count {
                            stop
                        } else {
                            start + (stop - start) * i as f64 / (count - 1) as f64
                        }
                    })
                    .collect(),
            }
        }
        _ => return Err(format!("grid '{text}' is neither start:stop:count nor a comma list")),
    };
    if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
        return Err(format!("grid value {v} is not finite"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        assert_eq!(parse_grid("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
        let g = parse_grid("0:0.3:4").unwrap();
        assert_eq!(*g.last().unwrap(), 0.3);
    }

    #[test]
    fn malformed_grids() {
        for bad in ["", "1:2", "a,b", "0:1:0", "0:1:x", "1:2:3:4", "inf", "1,,2"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }
}
