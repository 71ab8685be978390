use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use spinbie::geometry::Vec3;
use spinbie::mellin;
use spinbie::operators::{
    assemble_e_2d, assemble_e_3d, assemble_k_2d, assemble_reflection, dump_operator, panel_average,
    Reflection,
};
use spinbie::scattering::*;
use spinbie::{Mesh, Multivector, RealLinearOperator, Result};

use crate::config::*;

/// One CSV file: header plus rows of already formatted cells.
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&'static str]) -> Self {
        Table { name: name.into(), header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub struct Artifacts {
    pub results: Value,
    pub tables: Vec<Table>,
}

fn f(x: f64) -> String {
    format!("{x:e}")
}

fn probe_points(p: &Probes, seed: u64) -> Vec<Vec3> {
    let mut pts = p.points.clone();
    if let Some(s) = &p.sphere {
        pts.extend(sphere_points(s.center, s.radius, s.count));
    }
    if let Some(s) = &p.random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..s.count {
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).sqrt();
            let d = [r * phi.cos(), r * phi.sin(), z];
            pts.push([0, 1, 2].map(|a| s.center[a] + s.radius * d[a]));
        }
    }
    pts
}

fn report_json(r: &spinbie::SolveReport) -> Value {
    json!({
        "size": r.size,
        "residual_norm": r.residual_norm,
        "condition_estimate": r.condition_estimate,
        "sigma_min": r.sigma_min,
        "sigma_max": r.sigma_max,
        "deflated": r.deflated,
        "solve_seconds": r.elapsed,
    })
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Artifacts> {
    match cfg {
        ExperimentConfig::Dirichlet2d(c) => dirichlet2d(c, true),
        ExperimentConfig::Dirichlet2dClassical(c) => dirichlet2d(c, false),
        ExperimentConfig::MaxwellPec(c) => maxwell_pec(c),
        ExperimentConfig::DiracGeneric(c) => dirac_generic(c),
        ExperimentConfig::Transmission(c) => transmission(c),
        ExperimentConfig::MellinSweep(c) => mellin_sweep(c),
        ExperimentConfig::CornerSweep(c) => corner(c),
        ExperimentConfig::ResonanceSweep(c) => resonance(c),
        ExperimentConfig::CalderonCheck(c) => calderon(c),
        ExperimentConfig::OperatorDump(c) => operator_dump(c, out),
    }
}

fn dirichlet2d(c: &Dirichlet2dConfig, spin: bool) -> Result<Artifacts> {
    let curve = c.geometry.curve()?;
    let g: Vec<f64> = curve.nodes.iter().map(|z| c.data.eval(*z)).collect();
    let sol = if spin {
        solve_dirichlet2d_spin(&curve, &g)?
    } else {
        solve_dirichlet2d_classical(&curve, &g)?
    };
    let mut boundary = Table::new("boundary", &["node", "x", "y", "data", "trace", "error"]);
    let mut worst_boundary: f64 = 0.0;
    for (i, z) in curve.nodes.iter().enumerate() {
        let t = sol.trace.values[i].scalar_part().re;
        let e = (t - g[i]).abs();
        worst_boundary = worst_boundary.max(e);
        boundary.push(vec![i.to_string(), f(z.re), f(z.im), f(g[i]), f(t), f(e)]);
    }
    let mut probes = Table::new("probes", &["x", "y", "potential", "exact", "error"]);
    let mut worst_probe: f64 = 0.0;
    for p in &c.probes {
        let z = C64::new(p[0], p[1]);
        let u = sol.potential(z)?;
        let exact = c.data.eval(z);
        worst_probe = worst_probe.max((u - exact).abs());
        probes.push(vec![f(p[0]), f(p[1]), f(u), f(exact), f((u - exact).abs())]);
    }
    Ok(Artifacts {
        results: json!({
            "formulation": if spin { "spin" } else { "classical" },
            "nodes": curve.len(),
            "max_boundary_error": worst_boundary,
            "max_probe_error": if c.probes.is_empty() { Value::Null } else { json!(worst_probe) },
            "solve": report_json(&sol.report),
        }),
        tables: vec![boundary, probes],
    })
}

fn field_tables(
    surface: &spinbie::Surface3D,
    trace: &[Multivector],
    reference: Option<&ElectromagneticField>,
    points: &[Vec3],
    eval: &dyn Fn(Vec3) -> Result<Multivector>,
) -> Result<(Table, Table, Value)> {
    let exact = match reference {
        Some(r) => Some(panel_average(surface, &|x| r.multivector(x))?),
        None => None,
    };
    let mut traces = Table::new("trace", &["panel", "cx", "cy", "cz", "trace_norm", "error"]);
    for (t, c) in surface.centroids.iter().enumerate() {
        let err = exact.as_ref().map_or(f64::NAN, |e| (trace[t] - e[t]).norm());
        traces.push(vec![t.to_string(), f(c[0]), f(c[1]), f(c[2]), f(trace[t].norm()), f(err)]);
    }
    let mut probes = Table::new("probes", &["x", "y", "z", "field_norm", "grade_residual", "error"]);
    let (mut grade, mut worst): (f64, f64) = (0.0, 0.0);
    for p in points {
        let v = eval(*p)?;
        let gr = grade_residual(&v);
        grade = grade.max(gr);
        let err = match reference {
            Some(r) => {
                let e = r.multivector(*p)?;
                (v - e).norm() / e.norm()
            }
            None => f64::NAN,
        };
        if err.is_finite() {
            worst = worst.max(err);
        }
        probes.push(vec![f(p[0]), f(p[1]), f(p[2]), f(v.norm()), f(gr), f(err)]);
    }
    let summary = json!({
        "trace_relative_error": exact.as_ref().map(|e| relative_error(trace, e, &surface.areas)),
        "max_probe_relative_error": if reference.is_some() && !points.is_empty() { Some(worst) } else { None },
        "max_grade_residual": if points.is_empty() { None } else { Some(grade) },
        "probe_count": points.len(),
    });
    Ok((traces, probes, summary))
}

fn maxwell_pec(c: &MaxwellPecConfig) -> Result<Artifacts> {
    let surface = c.geometry.surface()?;
    let sol = solve_maxwell_pec(&surface, c.wave_number.wave_number()?, &c.incident)?;
    let points = probe_points(&c.probes, c.seed);
    let (traces, probes, summary) =
        field_tables(&surface, sol.trace(), c.reference.as_ref(), &points, &|x| sol.scattered(x))?;
    Ok(Artifacts {
        results: json!({
            "panels": surface.len(),
            "scattered": summary,
            "solve": report_json(sol.report()),
        }),
        tables: vec![traces, probes],
    })
}

fn dirac_generic(c: &DiracGenericConfig) -> Result<Artifacts> {
    let surface = c.geometry.surface()?;
    let g = panel_average(&surface, &|x| c.data.multivector(x))?;
    let sol = solve_dirac_generic(&surface, c.wave_number.wave_number()?, c.side, c.part, &g)?;
    let points = probe_points(&c.probes, c.seed);
    let (traces, probes, summary) =
        field_tables(&surface, &sol.trace, c.reference.as_ref(), &points, &|x| sol.field(x))?;
    Ok(Artifacts {
        results: json!({
            "panels": surface.len(),
            "side": c.side,
            "part": c.part,
            "field": summary,
            "solve": report_json(&sol.report),
        }),
        tables: vec![traces, probes],
    })
}

fn transmission(c: &TransmissionRunConfig) -> Result<Artifacts> {
    let cfg = c.build()?;
    let sol = solve_transmission(&cfg, &c.incident)?;
    let jump = jump_residual(&sol, c.jump_offset)?;
    let mut probes = Table::new("probes", &["x", "y", "z", "region", "total_norm", "scattered_norm", "incident_norm"]);
    let (mut refl, mut inc) = (0.0, 0.0);
    for p in probe_points(&c.probes, c.seed) {
        let region = sol.region_of(p);
        let field = sol.field(region, p)?;
        let incident = c.incident.multivector(p)?;
        let (total, scattered) = if region == 0 {
            refl += field.norm().powi(2);
            inc += incident.norm().powi(2);
            ((field + incident).norm(), field.norm())
        } else {
            (field.norm(), f64::NAN)
        };
        probes.push(vec![
            f(p[0]),
            f(p[1]),
            f(p[2]),
            region.to_string(),
            f(total),
            f(scattered),
            f(incident.norm()),
        ]);
    }
    Ok(Artifacts {
        results: json!({
            "bodies": cfg.bodies.len(),
            "interface_panels": sol.interface.len(),
            "wave_numbers": sol.wave_numbers.iter().map(|k| [k.value().re, k.value().im]).collect::<Vec<_>>(),
            "jump_residual": jump,
            "exterior_reflected_over_incident": if inc > 0.0 { Some((refl / inc).sqrt()) } else { None },
            "solve": report_json(&sol.report),
        }),
        tables: vec![probes],
    })
}

fn mellin_sweep(c: &MellinSweepConfig) -> Result<Artifacts> {
    let grid = match &c.xi_grid {
        Some(g) => mellin::xi_grid(g.per_sign, g.xi_max, g.uniform),
        None => mellin::default_xi_grid(),
    };
    let r = mellin::theta_sweep(&c.thetas, &grid)?;
    let mut rows = Table::new(
        "sweep",
        &["theta", "inv_iplus_k", "inv_iplus_en", "inv_np_on_ep", "inv_ep_on_np"],
    );
    for row in &r.rows {
        rows.push(vec![
            f(row.theta),
            f(row.inv_iplus_k),
            f(row.inv_iplus_en),
            f(row.inv_np_on_ep),
            f(row.inv_ep_on_np),
        ]);
    }
    let mut exps = Table::new("exponents", &["quantity", "exponent", "intercept", "r_squared"]);
    for (name, fit) in [
        ("inv_iplus_k", r.exponent_iplus_k),
        ("inv_iplus_en", r.exponent_iplus_en),
        ("inv_np_on_ep", r.exponent_np_on_ep),
        ("inv_ep_on_np", r.exponent_ep_on_np),
    ] {
        exps.push(vec![name.into(), f(fit.slope), f(fit.intercept), f(fit.r_squared)]);
    }
    Ok(Artifacts {
        results: json!({
            "xi_points": grid.len(),
            "exponent_iplus_k": r.exponent_iplus_k.slope,
            "exponent_iplus_en": r.exponent_iplus_en.slope,
            "exponent_np_on_ep": r.exponent_np_on_ep.slope,
            "exponent_ep_on_np": r.exponent_ep_on_np.slope,
        }),
        tables: vec![rows, exps],
    })
}

fn corner(c: &CornerSweepConfig) -> Result<Artifacts> {
    let rows = corner_sweep(&c.thetas, c.nodes, c.grading)?;
    let mut t = Table::new(
        "corner",
        &["theta", "nodes", "kappa_classical_raw", "kappa_classical", "kappa_spin_raw", "kappa_spin", "ratio"],
    );
    for r in &rows {
        t.push(vec![
            f(r.theta),
            r.nodes.to_string(),
            f(r.kappa_classical_raw),
            f(r.kappa_classical),
            f(r.kappa_spin_raw),
            f(r.kappa_spin),
            f(r.ratio),
        ]);
    }
    let monotone = rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    Ok(Artifacts {
        results: json!({
            "deflated_outliers": CORNER_DEFLATION,
            "ratio_monotone": monotone,
            "total_ratio_growth": rows.last().zip(rows.first()).map(|(l, f)| l.ratio / f.ratio),
        }),
        tables: vec![t],
    })
}

fn resonance(c: &ResonanceSweepConfig) -> Result<Artifacts> {
    let surface = c.geometry.surface()?;
    let rows = resonance_sweep(&surface, &c.wave_numbers())?;
    let mut t = Table::new(
        "resonance",
        &["k", "sigma_min_spin", "sigma_max_spin", "sigma_min_ansatz", "sigma_max_ansatz"],
    );
    for r in &rows {
        t.push(vec![f(r.k), f(r.sigma_min_spin), f(r.sigma_max_spin), f(r.sigma_min_ansatz), f(r.sigma_max_ansatz)]);
    }
    let spread = |g: fn(&ResonanceRow) -> f64| {
        let v: Vec<f64> = rows.iter().map(g).collect();
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    Ok(Artifacts {
        results: json!({
            "panels": surface.len(),
            "spin_sigma_min_spread": spread(|r| r.sigma_min_spin),
            "ansatz_sigma_min_spread": spread(|r| r.sigma_min_ansatz),
        }),
        tables: vec![t],
    })
}

fn calderon(c: &CalderonCheckConfig) -> Result<Artifacts> {
    let mut t = Table::new(
        "calderon",
        &["mesh", "nodes", "k", "e2_minus_i", "skew_defect", "inv_norm_plus", "inv_norm_minus"],
    );
    let mut skipped = Vec::new();
    for g in &c.geometries {
        let mesh = g.mesh()?;
        for &k in &c.wave_numbers {
            if matches!(mesh, Mesh::Curve(_)) && k != 0.0 {
                skipped.push(json!({"geometry": g, "k": k, "reason": "planar operators are static"}));
                continue;
            }
            let row = calderon_check(&mesh, k)?;
            let (plus, minus) = if c.half_space_norms {
                let h = half_space_inverse_norms(&mesh, k)?;
                (h.inv_norm_plus, h.inv_norm_minus)
            } else {
                (f64::NAN, f64::NAN)
            };
            t.push(vec![row.mesh, row.nodes.to_string(), f(k), f(row.e2_minus_i), f(row.skew_defect), f(plus), f(minus)]);
        }
    }
    Ok(Artifacts { results: json!({ "rows": t.rows.len(), "skipped": skipped }), tables: vec![t] })
}

fn operator_dump(c: &OperatorDumpConfig, out: &Path) -> Result<Artifacts> {
    let mesh = c.geometry.mesh()?;
    let k = c.wave_number.unwrap_or(0.0);
    let op: RealLinearOperator = match &mesh {
        Mesh::Curve(curve) => {
            if k != 0.0 {
                return Err(spinbie::Error::Invalid("planar operators are static (k = 0)".into()));
            }
            let e = assemble_e_2d(curve)?;
            match c.operator {
                DumpOperator::E => e,
                DumpOperator::K => assemble_k_2d(curve)?,
                DumpOperator::N => assemble_reflection(&mesh, Reflection::N, &e.space)?,
                DumpOperator::S => assemble_reflection(&mesh, Reflection::S, &e.space)?,
                DumpOperator::T => assemble_reflection(&mesh, Reflection::T, &e.space)?,
            }
        }
        Mesh::Surface(surface) => {
            let e = assemble_e_3d(surface, spinbie::WaveNumber::new(C64::new(k, 0.0))?)?;
            let which = match c.operator {
                DumpOperator::E => None,
                DumpOperator::N => Some(Reflection::N),
                DumpOperator::S => Some(Reflection::S),
                DumpOperator::T => Some(Reflection::T),
                DumpOperator::K => {
                    return Err(spinbie::Error::Invalid("K is only assembled on planar curves".into()))
                }
            };
            match which {
                None => e.realify(),
                Some(w) => {
                    let r: spinbie::ComplexOperator = assemble_reflection(&mesh, w, &e.space)?;
                    r.realify()
                }
            }
        }
    };
    let path = out.join("operator.bin");
    let header = dump_operator(&op, &path)?;
    Ok(Artifacts {
        results: json!({ "file": "operator.bin", "header": header }),
        tables: Vec::new(),
    })
}
