//! Rule-set exporters: a standalone C99 header and a plain-text listing.
//!
//! The emitted C uses only `stdint.h`, static arrays and `static inline`
//! functions (so unused entry points do not trip `-Wunused-function`).
//! Inputs are the raw 0/1 feature bytes; negated literals are derived inside.
//! `<prefix>_predict` and `<prefix>_explain` reproduce [`RuleSet::predict`]
//! and literal-level [`RuleSet::predict_and_explain`] exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::predictor::RuleSet;

const VALUES_PER_LINE: usize = 12;

pub fn is_valid_prefix(prefix: &str) -> bool {
    let mut chars = prefix.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn write_array<T: std::fmt::Display>(out: &mut String, ctype: &str, name: &str, values: &[T]) {
    // Zero-length arrays are not valid C99.
    let len = values.len().max(1);
    let _ = writeln!(out, "static const {ctype} {name}[{len}] = {{");
    if values.is_empty() {
        out.push_str("    0\n");
    }
    for chunk in values.chunks(VALUES_PER_LINE) {
        let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "    {},", line.join(", "));
    }
    out.push_str("};\n\n");
}

/// Emit `rs` as a self-contained C99 header. Same rule set, same bytes.
pub fn export_program(rs: &RuleSet, prefix: &str) -> Result<String> {
    if !is_valid_prefix(prefix) {
        return Err(Error::SymbolPrefix(prefix.to_string()));
    }
    let p = prefix;
    let guard = format!("{}_INFERENCE_H", prefix.to_ascii_uppercase());
    let n = rs.n_literals();
    let k = rs.n_classes();
    let r = rs.len();

    let mut offsets = Vec::with_capacity(r + 1);
    let mut literals = Vec::new();
    let mut weights = Vec::with_capacity(r * k);
    offsets.push(0u64);
    for rule in rs.rules() {
        literals.extend(rule.literals.iter().copied());
        offsets.push(literals.len() as u64);
        weights.extend(rule.weights.iter().copied());
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "/* Weighted rule set: {r} rules over {n} binary features, {k} classes.\n * Generated file; do not edit. */"
    );
    let _ = writeln!(out, "#ifndef {guard}\n#define {guard}\n");
    out.push_str("#include <stdint.h>\n\n");
    let _ = writeln!(out, "#define {p}_N_FEATURES {n}u");
    let _ = writeln!(out, "#define {p}_N_LITERALS {}u", 2 * n);
    let _ = writeln!(out, "#define {p}_N_CLASSES {k}");
    let _ = writeln!(out, "#define {p}_N_RULES {r}u\n");

    write_array(&mut out, "uint32_t", &format!("{p}_rule_offsets"), &offsets);
    write_array(&mut out, "uint32_t", &format!("{p}_rule_literals"), &literals);
    write_array(&mut out, "int32_t", &format!("{p}_rule_weights"), &weights);

    let _ = write!(
        out,
        r#"static inline int {p}_rule_fires(const uint8_t* x, uint32_t rule)
{{
    uint32_t i;
    for (i = {p}_rule_offsets[rule]; i < {p}_rule_offsets[rule + 1u]; ++i) {{
        uint32_t lit = {p}_rule_literals[i];
        int bit = lit < {p}_N_FEATURES ? x[lit] != 0 : x[lit - {p}_N_FEATURES] == 0;
        if (!bit) {{
            return 0;
        }}
    }}
    return 1;
}}

static inline int {p}_votes(const uint8_t* x, int64_t* votes, uint8_t* fired)
{{
    uint32_t rule;
    int c;
    int best = 0;
    for (c = 0; c < {p}_N_CLASSES; ++c) {{
        votes[c] = 0;
    }}
    for (rule = 0; rule != {p}_N_RULES; ++rule) {{
        int on = {p}_rule_fires(x, rule);
        if (fired) {{
            fired[rule] = (uint8_t)on;
        }}
        if (on) {{
            for (c = 0; c < {p}_N_CLASSES; ++c) {{
                votes[c] += {p}_rule_weights[rule * {p}_N_CLASSES + (uint32_t)c];
            }}
        }}
    }}
    for (c = 1; c < {p}_N_CLASSES; ++c) {{
        if (votes[c] > votes[best]) {{
            best = c;
        }}
    }}
    return best;
}}

/* Predicted class for the raw feature bytes x[0..{p}_N_FEATURES), each 0 or 1. */
static inline int {p}_predict(const uint8_t* x)
{{
    int64_t votes[{p}_N_CLASSES];
    return {p}_votes(x, votes, 0);
}}

/* Writes {p}_N_LITERALS literal-level scores for for_class (a negative
 * for_class means the predicted class). Returns the predicted class, or -1
 * if for_class is out of range. */
static inline int {p}_explain(const uint8_t* x, int for_class, int32_t* out_scores)
{{
    int64_t votes[{p}_N_CLASSES];
    uint8_t fired[{p}_N_RULES > 0u ? {p}_N_RULES : 1u];
    uint32_t rule;
    uint32_t i;
    int predicted = {p}_votes(x, votes, fired);
    int cls = for_class < 0 ? predicted : for_class;
    if (cls >= {p}_N_CLASSES) {{
        return -1;
    }}
    for (i = 0; i < {p}_N_LITERALS; ++i) {{
        out_scores[i] = 0;
    }}
    for (rule = 0; rule != {p}_N_RULES; ++rule) {{
        if (fired[rule]) {{
            int32_t w = {p}_rule_weights[rule * {p}_N_CLASSES + (uint32_t)cls];
            for (i = {p}_rule_offsets[rule]; i < {p}_rule_offsets[rule + 1u]; ++i) {{
                out_scores[{p}_rule_literals[i]] += w;
            }}
        }}
    }}
    return predicted;
}}

#endif /* {guard} */
"#
    );
    Ok(out)
}

/// One line per rule, e.g. `x0 AND NOT x1 : [2, -2]`.
pub fn export_rules_text(rs: &RuleSet) -> String {
    let n = rs.n_literals() as u32;
    let mut out = String::new();
    for rule in rs.rules() {
        let terms: Vec<String> = rule
            .literals
            .iter()
            .map(|&l| {
                if l < n {
                    format!("x{l}")
                } else {
                    format!("NOT x{}", l - n)
                }
            })
            .collect();
        let weights: Vec<String> = rule.weights.iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "{} : [{}]", terms.join(" AND "), weights.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::Rule;

    fn one_rule() -> RuleSet {
        RuleSet::from_rules(
            2,
            2,
            vec![Rule {
                literals: vec![0, 3],
                weights: vec![2, -2],
            }],
        )
        .unwrap()
    }

    #[test]
    fn prefix_rules() {
        for ok in ["tm", "_x", "inference_tm2", "A"] {
            assert!(is_valid_prefix(ok), "{ok}");
        }
        for bad in ["", "2tm", "tm-1", "t m", "tm.h"] {
            assert!(!is_valid_prefix(bad), "{bad}");
            assert!(matches!(export_program(&one_rule(), bad), Err(Error::SymbolPrefix(_))));
        }
    }

    #[test]
    fn rules_text() {
        assert_eq!(export_rules_text(&one_rule()), "x0 AND NOT x1 : [2, -2]\n");
        let empty = RuleSet::from_rules(2, 2, vec![]).unwrap();
        assert_eq!(export_rules_text(&empty), "");
    }

    #[test]
    fn program_encodes_the_rule() {
        let src = export_program(&one_rule(), "tm").unwrap();
        assert!(src.contains("static const uint32_t tm_rule_offsets[2] = {\n    0, 2,\n};"));
        assert!(src.contains("static const uint32_t tm_rule_literals[2] = {\n    0, 3,\n};"));
        assert!(src.contains("static const int32_t tm_rule_weights[2] = {\n    2, -2,\n};"));
        assert!(src.contains("static inline int tm_predict(const uint8_t* x)"));
        assert!(src.contains("static inline int tm_explain(const uint8_t* x, int for_class, int32_t* out_scores)"));
        assert!(src.contains("#include <stdint.h>"));
        assert_eq!(src.matches("#include").count(), 1);
        for banned in ["malloc", "free(", "printf", "stdlib"] {
            assert!(!src.contains(banned), "{banned}");
        }
    }

    #[test]
    fn empty_program_has_placeholder_arrays() {
        let rs = RuleSet::from_rules(3, 2, vec![]).unwrap();
        let src = export_program(&rs, "tm").unwrap();
        assert!(src.contains("#define tm_N_RULES 0u"));
        assert!(src.contains("static const uint32_t tm_rule_literals[1] = {\n    0\n};"));
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            export_program(&one_rule(), "p").unwrap(),
            export_program(&one_rule(), "p").unwrap()
        );
    }
}
