use crate::config::{parse_complex, JobConfig, Oracle};
use crate::json::{self, cx, cxs, mat};
use ellconn::bundles::{
    gabber_extra_x, gabber_monodromy, gabber_transform, identify_direct_image, moduli_image, stability,
};
use ellconn::connections::{
    analytic_residues, direct_image_matrix, numeric_residues, ContourSettings, Rank1Connection,
};
use ellconn::curves::BiellipticCover;
use ellconn::groups::exact::SymbolBasis;
use ellconn::groups::*;
use ellconn::linalg::Mat2;
use ellconn::monodromy::*;
use ellconn::periods::*;
use ellconn::quadrature::Method;
use ellconn::{Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MonodromyMethod {
    Closed,
    Transport,
    Both,
}

fn connection(cfg: &JobConfig, cover: &BiellipticCover) -> Rank1Connection {
    match cfg.points {
        None => Rank1Connection::trivial(cfg.lambda1, cfg.lambda2),
        Some((a, b)) => Rank1Connection::points(cfg.lambda1, cfg.lambda2, a.place(cover), b.place(cover)),
    }
}

fn points(cfg: &JobConfig, cover: &BiellipticCover) -> Result<(ellconn::curves::CPoint, ellconn::curves::CPoint)> {
    cfg.points
        .map(|(a, b)| (a.place(cover), b.place(cover)))
        .ok_or_else(|| Error::InvalidInput("this subcommand needs `bundle = points`".into()))
}

fn job_header(cfg: &JobConfig) -> Value {
    let mut h = json!({
        "t": cx(cfg.t),
        "tp": cx(cfg.tp),
        "lambda1": cx(cfg.lambda1),
        "lambda2": cx(cfg.lambda2),
        "bundle": if cfg.points.is_some() { "points" } else { "trivial" },
        "seed": cfg.seed,
    });
    if let Ok(cover) = cfg.cover() {
        if let Ok((q1, q2)) = points(cfg, &cover) {
            h["q1"] = json::cpoint(&q1);
            h["q2"] = json::cpoint(&q2);
        }
    }
    h
}

fn quad_tag(cfg: &JobConfig) -> Value {
    json!({
        "method": cfg.quadrature.method.name(),
        "abs_tol": cfg.quadrature.abs_tol,
        "rel_tol": cfg.quadrature.rel_tol,
    })
}

fn ode_tag(cfg: &JobConfig) -> Value {
    json!({
        "method": "dormand-prince",
        "tol": cfg.transport.ode.tol,
        "max_step": cfg.transport.ode.max_step,
        "step_fraction": cfg.transport.step_fraction,
    })
}

pub fn periods(cfg: &JobConfig) -> Result<Value> {
    let cover = cfg.cover()?;
    let q = cfg.quadrature;
    let constants = match cfg.real_pair() {
        Some((t, tp)) if 1.0 < t && t < tp => {
            let a = hyperelliptic_constants_with(t, tp, &q.with_method(Method::TanhSinh))?;
            let b = hyperelliptic_constants_with(t, tp, &q.with_method(Method::ChebyshevGauss))?;
            json!({
                "K": a.k, "Kp": a.kp, "L": a.l, "Lp": a.lp,
                "methods": [Method::TanhSinh.name(), Method::ChebyshevGauss.name()],
                "max_rel_diff": a.max_rel_diff(&b),
            })
        }
        _ => Value::Null,
    };
    let ep = elliptic_periods(cfg.t, &q)?;
    let (reduced, steps) = modular_reduce(ep.tau)?;
    let cyc = cycles(&cover, &[])?;
    let z = cyc.holomorphic(&q)?.normalized()?;
    let conn = connection(cfg, &cover);
    let n = omega_periods(&conn, &cover, &q)?;
    let mut out = json!({
        "job": job_header(cfg),
        "quadrature": quad_tag(cfg),
        "constants": constants,
        "elliptic": {
            "k": cx(ep.k), "l": cx(ep.l), "tau": cx(ep.tau),
            "tau_reduced": cx(reduced), "reduction_steps": steps,
        },
        "period_matrix": {
            "Z": mat(&z),
            "im_eigenvalues": imaginary_part_eigenvalues(&z).to_vec(),
            "riemann_relations": riemann_relations(&z),
            "in_period_locus": in_period_locus(&z),
        },
        "omega_periods": cxs(&n.n),
    });
    if !conn.is_trivial() {
        let r = omega_periods_reciprocity(&conn, &cover, &q)?;
        out["reciprocity"] = json!({
            "N3": cx(r.n3),
            "N4": cx(r.n4),
            "distance_mod_2pi_i": [distance_mod_2pi_i(n.n[2] - r.n3), distance_mod_2pi_i(n.n[3] - r.n4)],
        });
    }
    Ok(out)
}

pub fn connection_report(cfg: &JobConfig) -> Result<Value> {
    let cover = cfg.cover()?;
    let conn = connection(cfg, &cover);
    let a = direct_image_matrix(&conn, &cover)?;
    let avoid = a.avoid_x();
    let curve = cover.curve();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut grid = Vec::new();
    while grid.len() < cfg.samples {
        let x = C64::new(rng.gen_range(-1.0..4.0), rng.gen_range(-1.5..1.5));
        if avoid.iter().any(|p| (p - x).norm() < 0.05) {
            continue;
        }
        let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let y = curve.rhs(x).sqrt() * s;
        let m = a.eval(x, y);
        grid.push(json!({ "x": cx(x), "y": cx(y), "A": mat(&m), "trace": cx(m.trace()) }));
    }
    let an = analytic_residues(&a)?;
    let contour = ContourSettings::default();
    let nu = numeric_residues(&a, &contour)?;
    Ok(json!({
        "job": job_header(cfg),
        "case": a.case.map(|c| c.name()),
        "samples": grid,
        "residues": {
            "analytic": json::residues(&an),
            "numeric": json::residues(&nu),
            "numeric_method": { "method": "trapezoid-contour", "tol": contour.tol },
            "max_diff": an.max_diff(&nu),
            "sum_norm_analytic": an.sum().max_abs(),
            "sum_norm_numeric": nu.sum().max_abs(),
        },
    }))
}

pub fn monodromy(cfg: &JobConfig, method: MonodromyMethod) -> Result<Value> {
    let cover = cfg.cover()?;
    let conn = connection(cfg, &cover);
    let mut out = json!({ "job": job_header(cfg) });
    let closed = if method != MonodromyMethod::Transport {
        let m = closed_form_for(&conn, &cover, &cfg.quadrature)?;
        out["closed"] = json::monodromy(&m);
        out["closed"]["method"] = quad_tag(cfg);
        Some(m)
    } else {
        None
    };
    let transport = if method != MonodromyMethod::Closed {
        let a = direct_image_matrix(&conn, &cover)?;
        let loops = standard_loops(&cover, &a.avoid_x())?;
        let m = transport_monodromy(&conn, &cover, &loops, &cfg.transport)?;
        out["transport"] = json::monodromy(&m);
        out["transport"]["method"] = ode_tag(cfg);
        out["base_point"] = cx(loops.base);
        Some(m)
    } else {
        None
    };
    if let (Some(c), Some(t)) = (closed, transport) {
        let d = c.max_diff(&t);
        out["max_deviation"] = json!(d);
        out["tol"] = json!(cfg.compare_tol);
        out["agree"] = json!(d < cfg.compare_tol);
    }
    Ok(out)
}

pub fn rh_image(elliptic: &[C64], genus2: &[C64]) -> Result<Value> {
    match (elliptic, genus2) {
        ([w1, w2], []) => Ok(json!({
            "curve": "elliptic",
            "w": cxs(&[*w1, *w2]),
            "in_image": rh_image_elliptic(*w1, *w2)?,
        })),
        ([], [a, b, c, d]) => Ok(json!({
            "curve": "genus2",
            "w": cxs(&[*a, *b, *c, *d]),
            "in_image": rh_image_genus2([*a, *b, *c, *d])?,
        })),
        _ => Err(Error::InvalidInput("give either --elliptic W1 W2 or --genus2 W1 W2 W3 W4".into())),
    }
}

pub fn bundle(cfg: &JobConfig) -> Result<Value> {
    let cover = cfg.cover()?;
    let (q1, q2) = points(cfg, &cover)?;
    let (desc, case) = identify_direct_image(&cover, &q1, &q2)?;
    let curve = cover.curve();
    let image = match moduli_image(&cover, &q1, &q2) {
        Ok(p) => json::epoint(&p),
        Err(Error::Degenerate(_)) => Value::Null,
        Err(e) => return Err(e),
    };
    Ok(json!({
        "job": job_header(cfg),
        "case": case.name(),
        "descriptor": json::descriptor(&desc),
        "stability": stability(&desc).name(),
        "degree": desc.degree(),
        "det": json::divisor(&desc.det(&curve)),
        "moduli_image": image,
    }))
}

pub fn gabber(cfg: &JobConfig, check_monodromy: bool) -> Result<Value> {
    let cover = cfg.cover()?;
    let (q1, q2) = points(cfg, &cover)?;
    let conn = connection(cfg, &cover);
    let a = direct_image_matrix(&conn, &cover)?;
    let res = analytic_residues(&a)?;
    let g = gabber_transform(&cover, &q1, &q2, &res)?;
    let mut out = json!({
        "job": job_header(cfg),
        "descriptor": json::descriptor(&g.bundle),
        "degree": g.bundle.degree(),
        "stability": stability(&g.bundle).name(),
        "det_from_history": json::divisor(&g.det_from_history),
        "elm_direction": cxs(&g.v),
        "p_plus": {
            "residue_before": res.at_p_plus.map(|m| mat(&m)),
            "residue_after": g.residues_after.at_p_plus.map(|m| mat(&m)),
            "eigenvalues_before": cxs(&g.eigen_before),
            "eigenvalues_after": cxs(&g.eigen_after),
        },
    });
    if check_monodromy {
        let mut extra = a.avoid_x();
        extra.extend(gabber_extra_x(&cover));
        let loops = standard_loops(&cover, &extra)?;
        let m0 = transport_monodromy(&conn, &cover, &loops, &cfg.transport)?;
        let m1 = gabber_monodromy(&conn, &cover, &loops, &cfg.transport)?;
        let d = m0.max_diff(&m1);
        out["monodromy_check"] = json!({
            "method": ode_tag(cfg),
            "max_deviation": d,
            "tol": cfg.compare_tol,
            "agree": d < cfg.compare_tol,
        });
    }
    Ok(out)
}

/// Exact exponents and, when every value is a rational multiple of `πi`,
/// their numeric values.
fn exact_exponents(cfg: &JobConfig) -> Result<(Exponents, Option<[C64; 4]>)> {
    let Some(strs) = &cfg.exponents else {
        return Ok((Exponents::generic_exact(), None));
    };
    let basis = SymbolBasis::new(&cfg.symbols)?;
    let mut values = Vec::new();
    let mut numeric = Some([C64::new(0.0, 0.0); 4]);
    for (j, s) in strs.iter().enumerate() {
        let v = basis.parse(s)?;
        let p = v.pi_coeff();
        if v.sub(&basis.pi_i(p)).is_zero() {
            if let Some(n) = numeric.as_mut() {
                n[j] = C64::new(0.0, std::f64::consts::PI * (*p.numer() as f64) / (*p.denom() as f64));
            }
        } else {
            numeric = None;
        }
        values.push(v);
    }
    let values: [_; 4] = values.try_into().expect("four values");
    Ok((Exponents::Exact { basis, values }, numeric))
}

fn generator_matrices(e: [C64; 4]) -> Vec<Mat2> {
    vec![h_theta(e[2]).scale(e[0].exp()), h_theta(e[3]).scale(e[1].exp()), Mat2::sigma3()]
}

pub fn classify(cfg: &JobConfig) -> Result<Value> {
    let (exps, numeric, mode) = match cfg.oracle {
        Oracle::Exact => {
            let (e, n) = exact_exponents(cfg)?;
            (e, n, "exact")
        }
        Oracle::Numeric => {
            let e = match &cfg.exponents {
                Some(strs) => {
                    let mut e = [C64::new(0.0, 0.0); 4];
                    for (j, s) in strs.iter().enumerate() {
                        e[j] = parse_complex(s)?;
                    }
                    e
                }
                None => {
                    let cover = cfg.cover()?;
                    let m = closed_form_for(&connection(cfg, &cover), &cover, &cfg.quadrature)?;
                    exponents_from_monodromy(&m)?
                }
            };
            (Exponents::numeric(e), Some(e), "numeric")
        }
    };
    let k = kernel_data(&exps)?;
    let g = classify_group(&k)?;
    let lat = |l: &ellconn::groups::lattice::Lattice2| json!({ "basis": l.basis, "rank": l.rank(), "index": l.index() });
    let mut out = json!({
        "job": job_header(cfg),
        "oracle": mode,
        "relations": k.relations,
        "ker_phi1": lat(&k.ker_phi1),
        "ker_phi2": lat(&k.ker_phi2),
        "characters": lat(&k.characters),
        "r1": k.r1(),
        "r2": k.r2(),
        "group": {
            "q1": g.q1.describe(),
            "q2": g.q2.describe(),
            "table_row": g.table_row,
            "split": g.split.name(),
            "finite": g.finite,
            "order": g.order,
            "structure": g.structure,
        },
        "dgal": dgal_from_characters(&k).name(),
        "dgal_rank_criterion": classify_dgal(&k).name(),
    });
    if let Exponents::Numeric { values, height_bound, tol } = &exps {
        out["exponents"] = cxs(values);
        out["relation_search"] = json!({ "method": "lll", "height_bound": height_bound, "tol": tol });
        if let Some(q) = k.quality {
            out["relation_search"]["max_accepted"] = json!(q.max_accepted);
            out["relation_search"]["min_rejected"] = json!(q.min_rejected);
        }
    }
    if let (true, Some(e)) = (g.finite, numeric) {
        let (n, _) = finite_closure(&generator_matrices(e), 100_000)?;
        out["closure_order"] = json!(n);
        out["closure_matches"] = json!(g.order == Some(n as i128));
    }
    Ok(out)
}

pub fn isomonodromy(cfg: &JobConfig, other: Option<&JobConfig>) -> Result<Value> {
    let inv = |c: &JobConfig| -> Result<(IsomonodromyInvariants, Mat2)> {
        let z = match c.taus {
            Some((a, b)) => g2_period_matrix(a, b)?.z,
            None => cycles(&c.cover()?, &[])?.holomorphic(&c.quadrature)?.normalized()?,
        };
        Ok((isomonodromy_invariants([c.lambda1, c.lambda2], c.zl, &z)?, z))
    };
    let enc = |i: &IsomonodromyInvariants, z: &Mat2| {
        json!({ "lambda": cxs(&i.lambda), "w": cxs(&i.w), "pq": i.pq.to_vec(), "Z": mat(z) })
    };
    let (a, za) = inv(cfg)?;
    let mut out = json!({ "job": job_header(cfg), "invariants": enc(&a, &za) });
    if let Some(o) = other {
        let (b, zb) = inv(o)?;
        out["other"] = json!({ "job": job_header(o), "invariants": enc(&b, &zb) });
        out["same_surface"] = json!(a.same_surface(&b, cfg.compare_tol) && za.max_diff(&zb) <= cfg.compare_tol);
        out["tol"] = json!(cfg.compare_tol);
    }
    Ok(out)
}
