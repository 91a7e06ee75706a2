use serde_json::{json, Value};

/// Like C's `%.12g`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A float as it appears in JSON output: rounded to the printed precision.
pub fn num(x: f64) -> Value {
    sig12(x).parse::<f64>().map(Value::from).unwrap_or(Value::Null)
}

pub fn document(command: &str, mut body: Value) -> String {
    let mut doc = json!({"schemaVersion": 1, "command": command});
    if let (Some(d), Some(b)) = (doc.as_object_mut(), body.as_object_mut()) {
        d.append(b);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn offset((x, y): (i64, i64)) -> String {
    format!("({x},{y})")
}

pub fn vec3(v: [i64; 3]) -> String {
    format!("({},{},{})", v[0], v[1], v[2])
}
