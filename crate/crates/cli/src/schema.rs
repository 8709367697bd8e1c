//! Required fields of the JSON documents, addressed by JSON pointer.

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Str,
    /// A number; `null` stands for a non-finite value.
    Num,
    Int,
    Bool,
    OptStr,
    OptNum,
    NumArray(Option<usize>),
    Array,
}

pub type Schema = &'static [(&'static str, Kind)];

pub const MASS: Schema = &[
    ("/schema", Kind::Str),
    ("/spacetime", Kind::Str),
    ("/n_theta", Kind::Int),
    ("/n_phi", Kind::Int),
    ("/area", Kind::Num),
    ("/willmore", Kind::Num),
    ("/m_h", Kind::Num),
];

pub const VARIATION: Schema = &[
    ("/schema", Kind::Str),
    ("/variation/chi", Kind::Int),
    ("/variation/lines", Kind::NumArray(Some(5))),
    ("/variation/total", Kind::Num),
    ("/variation/normalization", Kind::Num),
    ("/variation/mass_derivative", Kind::Num),
    ("/bhms/phi_null", Kind::Num),
    ("/bhms/radial/g_term", Kind::Num),
    ("/bhms/radial/theta_t_integral", Kind::Num),
    ("/bhms/radial/theta_l_integral", Kind::Num),
    ("/bhms/radial/u_term", Kind::Num),
    ("/bhms/radial/total", Kind::Num),
    ("/bhms/radial/u_defect", Kind::Num),
    ("/bhms/timelike/total", Kind::Num),
    ("/bhms/timelike/u_defect", Kind::Num),
    ("/bhms/g_term", Kind::Num),
    ("/bhms/u_term", Kind::Num),
    ("/bhms/total", Kind::Num),
    ("/bhms/mass_derivative", Kind::Num),
    ("/certificate/case", Kind::Str),
    ("/certificate/theta/coefficients", Kind::NumArray(None)),
    ("/certificate/condition_residual", Kind::Num),
    ("/certificate/f_integral", Kind::Num),
    ("/certificate/f_scale", Kind::Num),
    ("/certificate/v_condition_min", Kind::Num),
    ("/certificate/sup_beta", Kind::Num),
    ("/certificate/pass", Kind::Bool),
];

pub const SUMMARY: Schema = &[
    ("/schema", Kind::Str),
    ("/spacetime", Kind::Str),
    ("/steps", Kind::Int),
    ("/s_final", Kind::Num),
    ("/completed", Kind::Bool),
    ("/stopped", Kind::OptStr),
    ("/m_h_initial", Kind::Num),
    ("/m_h_final", Kind::Num),
    ("/m_h_drift", Kind::Num),
    ("/min_mass_increment", Kind::OptNum),
    ("/monotone", Kind::Bool),
    ("/monotone_tolerance", Kind::Num),
    ("/area_initial", Kind::Num),
    ("/area_final", Kind::Num),
    ("/area_ratio", Kind::Num),
    ("/area_law_defect", Kind::Num),
    ("/certificate_pass_rate", Kind::Num),
    ("/max_fd_check", Kind::Num),
    ("/max_normalization_defect", Kind::Num),
    ("/min_mesh_quality", Kind::Num),
    ("/mesh_warnings", Kind::Int),
];

pub const VERIFY: Schema = &[
    ("/schema", Kind::Str),
    ("/seed", Kind::Int),
    ("/spacetime", Kind::Str),
    ("/all_pass", Kind::Bool),
    ("/checks", Kind::Array),
];

/// Fields of every entry of `/checks` in `verify.json`.
pub const VERIFY_CHECK: Schema = &[
    ("/name", Kind::Str),
    ("/pass", Kind::Bool),
    ("/error", Kind::OptNum),
    ("/tolerance", Kind::Num),
    ("/detail", Kind::Str),
];

fn matches(v: &Value, kind: Kind) -> bool {
    match kind {
        Kind::Str => v.is_string(),
        Kind::Num => v.is_number() || v.is_null(),
        Kind::Int => v.is_u64() || v.is_i64(),
        Kind::Bool => v.is_boolean(),
        Kind::OptStr => v.is_string() || v.is_null(),
        Kind::OptNum => v.is_number() || v.is_null(),
        Kind::NumArray(len) => v.as_array().is_some_and(|a| {
            len.map_or(true, |n| a.len() == n) && a.iter().all(|x| x.is_number() || x.is_null())
        }),
        Kind::Array => v.is_array(),
    }
}

/// Lists every missing or mistyped field.
pub fn violations(doc: &Value, schema: Schema) -> Vec<String> {
    schema
        .iter()
        .filter_map(|&(pointer, kind)| match doc.pointer(pointer) {
            None => Some(format!("missing {pointer}")),
            Some(v) if !matches(v, kind) => {
                Some(format!("{pointer}: expected {kind:?}, found {v}"))
            }
            Some(_) => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn reports_missing_and_mistyped_fields() {
        let doc = json!({"schema": "hflow-mass/1", "spacetime": 3, "n_theta": 32, "n_phi": 64,
                         "area": 1.0, "m_h": null});
        let v = violations(&doc, MASS);
        assert_eq!(v.len(), 2, "{v:?}");
        assert!(v.iter().any(|s| s.contains("/spacetime")));
        assert!(v.iter().any(|s| s.contains("missing /willmore")));
    }
}
