//! CSV text output.

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros removed,
/// exponent notation outside `1e-4 ≤ |x| < 1e12`.
pub fn g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Round first so that 9.9999999999999e3 is classified by its rounded exponent.
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        return format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim(&format!("{:.*}", decimals, x)).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Accumulates a CSV document with a fixed header.
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let cols: Vec<&str> = header.iter().map(|h| h.as_ref()).collect();
        let mut text = cols.join(",");
        text.push('\n');
        Self {
            text,
            width: cols.len(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        debug_assert_eq!(cells.len(), self.width);
        let cols: Vec<&str> = cells.iter().map(|c| c.as_ref()).collect();
        self.text.push_str(&cols.join(","));
        self.text.push('\n');
    }

    pub fn numbers(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| g12(v)).collect();
        self.row(&cells);
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
