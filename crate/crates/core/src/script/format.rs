use super::ast::ScriptAst;

/// Canonical text: one track per line, positional arguments, numbers with
/// at most six significant digits and no exponent.
pub fn format_script(ast: &ScriptAst) -> String {
    let mut out = String::new();
    for track in &ast.tracks {
        out.push('"');
        out.push_str(&track.asset_ref);
        out.push('"');
        for op in &track.chain {
            out.push('.');
            out.push_str(op.method.name());
            out.push('(');
            let args: Vec<String> = op.args.iter().map(|&v| format_number(v)).collect();
            out.push_str(&args.join(", "));
            out.push(')');
        }
        out.push('\n');
    }
    out
}

/// Plain decimal rendering rounded to six significant digits.
pub fn format_number(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return "0".to_string();
    }
    let sci = format!("{:.5e}", value.abs());
    let (mantissa, exponent) = sci.split_once('e').expect("scientific notation");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();

    let mut text = if exponent >= 5 {
        let mut s = digits.clone();
        s.extend(std::iter::repeat_n('0', (exponent - 5) as usize));
        s
    } else if exponent >= 0 {
        let split = exponent as usize + 1;
        format!("{}.{}", &digits[..split], &digits[split..])
    } else {
        let zeros = "0".repeat((-exponent - 1) as usize);
        format!("0.{zeros}{digits}")
    };
    if text.contains('.') {
        let trimmed = text.trim_end_matches('0').trim_end_matches('.').len();
        text.truncate(trimmed);
    }
    if value < 0.0 {
        text.insert(0, '-');
    }
    text
}
