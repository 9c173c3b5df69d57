//! Value parsing and artifact formatting.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::berezin::RangeCloud;

/// Parses `1`, `-0.5`, `0.3+0.4i`, `-2e-3-1e-2i`, `0.6i`, `i`, `-i`. `j` may stand for `i`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse {text:?} as a complex number");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return match s.parse::<f64>() {
            Ok(re) if re.is_finite() => Ok(Complex64::new(re, 0.0)),
            _ => Err(bad()),
        };
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re.is_empty() {
        0.0
    } else {
        re.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    let z = Complex64::new(re, im);
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, String> {
    text.split(',').map(parse_complex).collect()
}

pub fn parse_real(text: &str) -> Result<f64, String> {
    let z = parse_complex(text)?;
    if z.im != 0.0 {
        return Err(format!("{text:?} must be real"));
    }
    Ok(z.re)
}

pub fn parse_real_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(parse_real).collect()
}

pub fn parse_u32_list(text: &str) -> Result<Vec<u32>, String> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("cannot parse {t:?} as a non-negative integer"))
        })
        .collect()
}

/// `R,T` grid sizes.
pub fn parse_grid(text: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [r, t] => match (r.parse(), t.parse()) {
            (Ok(r), Ok(t)) => Ok((r, t)),
            _ => Err(format!("cannot parse grid {text:?}; expected R,T")),
        },
        _ => Err(format!("cannot parse grid {text:?}; expected R,T")),
    }
}

/// `%.17g`: 17 significant digits, trailing zeros dropped. Both zeros print as `0`.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };
    if (-4..17).contains(&exp) {
        let mut out = String::from(sign);
        if exp < 0 {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
            out.push_str(&digits);
        } else {
            let point = exp as usize + 1;
            out.push_str(&digits[..point]);
            out.push('.');
            out.push_str(&digits[point..]);
        }
        let trimmed = out.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        let frac = digits[1..].trim_end_matches('0');
        let dot = if frac.is_empty() { "" } else { "." };
        let esign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{}{dot}{frac}e{esign}{:02}", &digits[..1], exp.abs())
    }
}

pub const CSV_HEADER: &str = "w_re,w_im,ber_re,ber_im";

pub fn cloud_csv(cloud: &RangeCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 96);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in cloud.samples() {
        let w = s.w.value();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            g17(w.re),
            g17(w.im),
            g17(s.value.re),
            g17(s.value.im)
        );
    }
    out
}

/// Scatter of the cloud in the window `[-0.1, x_max + 0.1] x [-h, h]`, mapped to the unit square.
pub fn cloud_svg(cloud: &RangeCloud, x_max: f64) -> String {
    let x0 = -0.1;
    let x_hi = cloud.samples().iter().map(|s| s.value.re).fold(x_max, f64::max);
    let x1 = x_hi + 0.1;
    let h = (x1 - x0) / 2.0;
    let h = cloud.samples().iter().map(|s| s.value.im.abs() + 0.1).fold(h, f64::max);
    let (sx, sy) = (1.0 / (x1 - x0), 1.0 / (2.0 * h));
    let mut out = String::with_capacity(cloud.len() * 48 + 512);
    out.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\" width=\"800\" height=\"800\">\n");
    out.push_str("<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"white\"/>\n");
    let ax = (0.0 - x0) * sx;
    let _ = writeln!(
        out,
        "<line x1=\"{ax:.6}\" y1=\"0\" x2=\"{ax:.6}\" y2=\"1\" stroke=\"#999\" stroke-width=\"0.002\"/>\n<line x1=\"0\" y1=\"0.5\" x2=\"1\" y2=\"0.5\" stroke=\"#999\" stroke-width=\"0.002\"/>"
    );
    out.push_str("<g fill=\"#1f4e9c\" fill-opacity=\"0.6\">\n");
    for s in cloud.samples() {
        let x = (s.value.re - x0) * sx;
        let y = (h - s.value.im) * sy;
        let _ = writeln!(out, "<circle cx=\"{x:.6}\" cy=\"{y:.6}\" r=\"0.0015\"/>");
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.5").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("-0.3+0.4i").unwrap(), c(-0.3, 0.4));
        assert_eq!(parse_complex("0.3 - 0.4j").unwrap(), c(0.3, -0.4));
        assert_eq!(parse_complex("0.6i").unwrap(), c(0.0, 0.6));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("1+i").unwrap(), c(1.0, 1.0));
        assert_eq!(parse_complex("1e-3-2E-2i").unwrap(), c(1e-3, -2e-2));
        assert_eq!(parse_complex("-1e+2").unwrap(), c(-100.0, 0.0));
        for bad in ["", "x", "1+", "0.5k", "nan", "1++2i", "inf"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
        assert_eq!(parse_complex_list("1,0.5i").unwrap(), vec![c(1.0, 0.0), c(0.0, 0.5)]);
        assert!(parse_real("0.5i").is_err());
        assert_eq!(parse_grid("200,512").unwrap(), (200, 512));
        assert!(parse_grid("200").is_err());
        assert_eq!(parse_u32_list("1,0,2").unwrap(), vec![1, 0, 2]);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(-1.0), "-1");
        assert_eq!(g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(g17(123.25), "123.25");
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(0.00012), "0.00012");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(-0.0), "0");
        for x in [0.1, 1.0 / 3.0, 2.0_f64.sqrt(), -7.25e-9, 6.02e23, 1e-300] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
