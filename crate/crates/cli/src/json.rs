//! JSON encodings: complex scalars as `[re, im]`, matrices row-major,
//! divisor classes as `{degree, point}`.

use ellconn::bundles::BundleDescriptor;
use ellconn::connections::ResidueSet;
use ellconn::curves::{CPoint, DivisorClassE, EPoint};
use ellconn::linalg::Mat2;
use ellconn::monodromy::MonodromyRep;
use ellconn::C64;
use serde_json::{json, Map, Value};

pub fn cx(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn cxs(z: &[C64]) -> Value {
    Value::Array(z.iter().map(|&v| cx(v)).collect())
}

pub fn mat(m: &Mat2) -> Value {
    json!([[cx(m.m[0][0]), cx(m.m[0][1])], [cx(m.m[1][0]), cx(m.m[1][1])]])
}

pub fn epoint(p: &EPoint) -> Value {
    match p.xy() {
        None => json!("infinity"),
        Some((x, y)) => json!({ "x": cx(x), "y": cx(y) }),
    }
}

pub fn cpoint(p: &CPoint) -> Value {
    match p {
        CPoint::Affine { xi, y } => json!({ "xi": cx(*xi), "y": cx(*y) }),
        CPoint::InfinityPlus => json!("infinity+"),
        CPoint::InfinityMinus => json!("infinity-"),
    }
}

pub fn divisor(d: &DivisorClassE) -> Value {
    json!({ "degree": d.degree, "point": epoint(&d.rep) })
}

pub fn descriptor(b: &BundleDescriptor) -> Value {
    match b {
        BundleDescriptor::DirectSum(a, c) => {
            json!({ "kind": "direct_sum", "summands": [divisor(a), divisor(c)] })
        }
        BundleDescriptor::AtiyahStable(d) => json!({ "kind": "atiyah_stable", "det": divisor(d) }),
    }
}

pub fn residues(r: &ResidueSet) -> Value {
    let mut m = Map::new();
    for (name, res) in r.iter() {
        m.insert(name.to_string(), mat(&res));
    }
    Value::Object(m)
}

pub fn monodromy(m: &MonodromyRep) -> Value {
    json!({
        "M_a": mat(&m.m_a),
        "M_b": mat(&m.m_b),
        "M_gamma1": mat(&m.m_g1),
        "M_gamma2": mat(&m.m_g2),
        "relation_residual": m.relation_residual(),
        "order2_residual": m.order2_residual(),
    })
}
