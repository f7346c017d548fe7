use std::str::FromStr;

/// A list of parameter values, written as `1,10,100`, `lin:a:b:n` or
/// `log:a:b:n` (both endpoints included).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("lin:") {
            let (a, b, n) = range_parts(rest)?;
            return Ok(Grid(spaced(a, b, n, |x| x, |x| x)));
        }
        if let Some(rest) = s.strip_prefix("log:") {
            let (a, b, n) = range_parts(rest)?;
            if !(a > 0.0 && b > 0.0) {
                return Err(format!("log grid endpoints must be positive, got {a} and {b}"));
            }
            return Ok(Grid(spaced(a, b, n, f64::ln, f64::exp)));
        }
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(parse_number)
            .collect::<Result<_, _>>()
            .map(Grid)
    }
}

fn parse_number(x: &str) -> Result<f64, String> {
    let v: f64 = x.parse().map_err(|_| format!("cannot parse {x:?} as a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("grid value {x:?} is not finite"))
    }
}

fn range_parts(rest: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = rest.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected start:stop:count, got {rest:?}"));
    };
    let n: usize = n.trim().parse().map_err(|_| format!("cannot parse count {n:?}"))?;
    Ok((parse_number(a.trim())?, parse_number(b.trim())?, n))
}

fn spaced(a: f64, b: f64, n: usize, to: fn(f64) -> f64, from: fn(f64) -> f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (ta, tb) = (to(a), to(b));
            (0..n)
                .map(|i| match i {
                    0 => a,
                    i if i == n - 1 => b,
                    i => from(ta + (tb - ta) * i as f64 / (n - 1) as f64),
                })
                .collect()
        }
    }
}
