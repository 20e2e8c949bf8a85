use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use energy_space::boundary::{
    boundary_point_limit, boundary_sum_identity, indicator_energy, weak_null_scan,
};
use energy_space::deficiency::{defect_shoot_chain, finite_section_scan, semibounded_check};
use energy_space::dipole::{dipoles, gram as kernel_gram, monopole_trace, reconstruct_delta};
use energy_space::duality::{
    duality_pair_check, harmonic_defect, kernel_to_graph, roundtrip_check,
};
use energy_space::gaussian::{
    characteristic_target, dipole_transform_target, gaussian_field, mc_characteristic,
    mc_dipole_transform, mc_moment, moment_target, sampled_covariance, MonteCarloEstimate,
};
use energy_space::io::{
    parse_filtration, parse_graph_spec, parse_section, parse_window, read_dirac_gram,
};
use energy_space::lattice::{
    chain_closed_forms, direct_energy, fourier_energy, monopole_symbol_divergence,
};
use energy_space::{
    BoundaryMode, Error, Filtration, FiniteSection, GraphFunction, VertexId, WeightedGraph,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::report::Report;
use crate::{Common, FunctionArg, ModeArg, SectionArgs};

fn label(v: &VertexId) -> Value {
    serde_json::to_value(v).expect("labels serialize")
}

fn graph(common: &Common) -> Result<WeightedGraph> {
    let spec = common
        .graph
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--graph is required".into()))?;
    Ok(parse_graph_spec(spec, common.base.as_deref())?)
}

fn echo_graph(report: &mut Report, common: &Common, g: &WeightedGraph) {
    report
        .input("graph", common.graph.clone().unwrap_or_default())
        .input("base", label(g.base_point()))
        .input("seed", common.seed);
}

fn mode(m: ModeArg) -> BoundaryMode {
    match m {
        ModeArg::Free => BoundaryMode::Free,
        ModeArg::Dirichlet => BoundaryMode::Dirichlet,
    }
}

fn section(g: &WeightedGraph, args: &SectionArgs, report: &mut Report) -> Result<FiniteSection> {
    let s = parse_section(g, args.section.as_deref(), mode(args.mode))?;
    report
        .input(
            "section",
            args.section.clone().unwrap_or_else(|| "default".into()),
        )
        .input("section_size", s.len())
        .input("mode", serde_json::to_value(s.mode())?);
    Ok(s)
}

fn filtration(g: &WeightedGraph, spec: &str, report: &mut Report) -> Result<Filtration> {
    let f = parse_filtration(g, spec)?;
    report.input("filtration", spec).input("levels", f.len());
    Ok(f)
}

fn function_values(u: &GraphFunction, vertices: &[VertexId]) -> Value {
    Value::Array(
        vertices
            .iter()
            .filter_map(|v| u.get(v).map(|x| json!({"vertex": label(v), "value": x})))
            .collect(),
    )
}

fn restrict(u: &GraphFunction, vertices: &[VertexId]) -> GraphFunction {
    GraphFunction::restricted(
        vertices
            .iter()
            .filter_map(|v| u.get(v).map(|x| (v.clone(), x)))
            .collect(),
    )
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn dipole(common: &Common, args: &SectionArgs, window: &str) -> Result<Report> {
    let mut r = Report::new(
        "dipole",
        "dipole reproducing property <v_x, u>_E = u(x) - u(o)",
    );
    let g = graph(common)?;
    echo_graph(&mut r, common, &g);
    let s = section(&g, args, &mut r)?;
    let xs = parse_window(&g, window)?;
    r.input("window", xs.iter().map(label).collect::<Vec<_>>());
    let tol = common.tol.unwrap_or(1e-10);
    r.tolerance("reproducing", tol);
    if xs.iter().any(|x| x == g.base_point()) {
        return Err(Error::DipoleAtBase.into());
    }
    let vs = dipoles(&g, &xs, &s)?;
    let interior = s.interior(&g)?;
    let o = g.base_point();
    let mut out = Vec::new();
    for (x, v) in xs.iter().zip(&vs) {
        let energy = g.energy(v)?;
        let mut residual: f64 = 0.0;
        for y in &interior {
            let pairing = g.energy_inner(v, &GraphFunction::delta(y.clone()))?;
            let expected = f64::from(u8::from(y == x)) - f64::from(u8::from(y == o));
            residual = residual.max((pairing - expected).abs());
        }
        r.row(x, "energy", energy)
            .row(x, "reproducing_residual", residual);
        for y in s.vertices() {
            if let Some(val) = v.get(y) {
                r.row(x, format!("v({y})"), val);
            }
        }
        out.push(json!({
            "vertex": label(x),
            "energy": energy,
            "reproducing_residual": residual,
            "pass": residual <= tol,
            "values": function_values(v, s.vertices()),
        }));
    }
    r.result("dipoles", out);
    Ok(r)
}

pub fn gram(common: &Common, args: &SectionArgs, window: &str) -> Result<Report> {
    let mut r = Report::new("gram", "dipole kernel k(x,y) = <v_x, v_y>_E");
    let g = graph(common)?;
    echo_graph(&mut r, common, &g);
    let s = section(&g, args, &mut r)?;
    let xs = parse_window(&g, window)?;
    r.input("window", xs.iter().map(label).collect::<Vec<_>>());
    let k = kernel_gram(&g, &xs, &s)?;
    let rows = k.entries.to_rows();
    for (x, row) in xs.iter().zip(&rows) {
        for (y, v) in xs.iter().zip(row) {
            r.row(x, format!("k({x},{y})"), *v);
        }
    }
    let min_eig = k.min_eigenvalue()?;
    r.row("all", "min_eigenvalue", min_eig);
    r.result("window", xs.iter().map(label).collect::<Vec<_>>())
        .result("matrix", rows)
        .result("min_eigenvalue", min_eig);
    Ok(r)
}

pub fn reconstruct(common: &Common, args: &SectionArgs, window: &str) -> Result<Report> {
    let mut r = Report::new(
        "reconstruct",
        "Dirac mass from dipoles: delta_x = c(x) v_x - sum_y c(xy) v_y",
    );
    let g = graph(common)?;
    echo_graph(&mut r, common, &g);
    let s = section(&g, args, &mut r)?;
    let xs = parse_window(&g, window)?;
    r.input("window", xs.iter().map(label).collect::<Vec<_>>());
    let tol = common.tol.unwrap_or(1e-9);
    r.tolerance("residual", tol);
    let mut out = Vec::new();
    for x in &xs {
        let rec = reconstruct_delta(&g, x, &s)?;
        r.row(x, "residual", rec.residual);
        out.push(json!({
            "vertex": label(x),
            "residual": rec.residual,
            "pass": rec.residual <= tol,
            "coefficients": rec.coefficients.iter().map(|(v, c)| json!({"vertex": label(v), "coefficient": c})).collect::<Vec<_>>(),
        }));
    }
    r.result("reconstructions", out);
    Ok(r)
}

pub fn monopole(common: &Common, vertex: Option<&str>, spec: &str) -> Result<Report> {
    let mut r = Report::new(
        "monopole",
        "monopole energies along an exhaustion; a finite limit means a monopole exists",
    );
    let g = graph(common)?;
    echo_graph(&mut r, common, &g);
    let f = filtration(&g, spec, &mut r)?;
    let x = match vertex {
        Some(v) => g.parse_vertex(v)?,
        None => g.base_point().clone(),
    };
    r.input("vertex", label(&x));
    r.tolerance("cauchy_gap", energy_space::dipole::MONOPOLE_CAUCHY_GAP)
        .tolerance(
            "divergent_slope",
            energy_space::dipole::MONOPOLE_DIVERGENT_SLOPE,
        );
    let trace = monopole_trace(&g, &x, &f)?;
    for l in &trace.levels {
        r.row(l.level, "size", l.size)
            .row(l.level, "energy", l.energy);
    }
    r.row(
        "all",
        "verdict",
        format!("{:?}", trace.verdict).to_lowercase(),
    );
    r.result("trace", serde_json::to_value(&trace)?);
    Ok(r)
}

pub fn dual(common: &Common, args: &SectionArgs, gram_file: Option<&Path>) -> Result<Report> {
    let mut r = Report::new(
        "dual",
        "graph/kernel duality: Dirac Gram matrix <delta_x, delta_y>_E with zero row sums",
    );
    let tol = common.tol.unwrap_or(1e-9);
    r.tolerance("roundtrip", tol).tolerance("row_sum", tol);
    let (g, s) = match gram_file {
        Some(path) => {
            r.input("gram_file", path.display().to_string());
            let gd = read_dirac_gram(path)?;
            r.input("window", gd.window.iter().map(label).collect::<Vec<_>>());
            r.result("input_row_sum", gd.max_row_sum());
            let g = kernel_to_graph(&gd)?;
            let s = FiniteSection::whole(&g, BoundaryMode::Free)?;
            (g, s)
        }
        None => {
            let g = graph(common)?;
            echo_graph(&mut r, common, &g);
            let s = section(&g, args, &mut r)?;
            (g, s)
        }
    };
    let mut edges = Vec::new();
    for x in s.vertices() {
        for (y, w) in g.neighbors(x)? {
            if *x < y && s.contains(&y) {
                r.row(format!("{x}-{y}"), "weight", w);
                edges.push(json!([label(x), label(&y), w]));
            }
        }
    }
    let rt = roundtrip_check(&g, &s)?;
    r.row("all", "roundtrip_error", rt.max_relative_error)
        .row("all", "row_sum", rt.max_row_sum);
    r.result("base", label(g.base_point()))
        .result("edges", edges)
        .result("roundtrip", serde_json::to_value(&rt)?)
        .result(
            "pass",
            rt.max_relative_error <= tol && rt.max_row_sum <= tol,
        );
    Ok(r)
}

pub fn harmonic(common: &Common, spec: &str) -> Result<Report> {
    let mut r = Report::new(
        "harmonic",
        "harmonic defect: nonconstant finite-energy harmonic functions, orthogonal to every Dirac mass",
    );
    let g = graph(common)?;
    echo_graph(&mut r, common, &g);
    let f = filtration(&g, spec, &mut r)?;
    r.tolerance("cauchy_gap", energy_space::duality::HARMONIC_CAUCHY_GAP)
        .tolerance("min_share", energy_space::duality::HARMONIC_MIN_SHARE);
    let cands = harmonic_defect(&g, &f)?;
    let last = f.levels().last().expect("nonempty filtration");
    let s = FiniteSection::new(&g, last.iter().cloned(), BoundaryMode::Free)?;
    let mut out = Vec::new();
    for (i, c) in cands.iter().enumerate() {
        let pair = duality_pair_check(&g, &c.function, &s)?;
        for (k, e) in c.level_energies.iter().enumerate() {
            r.row(k + 1, format!("candidate{i}_energy"), *e);
        }
        r.row(
            "all",
            format!("candidate{i}_max_laplacian"),
            c.max_laplacian,
        );
        out.push(json!({
            "energy": c.energy,
            "max_laplacian": c.max_laplacian,
            "dirac_pairing": pair,
            "level_energies": c.level_energies,
            "first_level_values": function_values(&c.function, &f.levels()[0]),
        }));
    }
    r.row("all", "candidates", cands.len());
    r.result("candidates", out).result("count", cands.len());
    Ok(r)
}

pub fn deficiency(common: &Common, spec: &str, lambda: f64, span: usize) -> Result<Report> {
    let mut r = Report::new(
        "deficiency",
        "deficiency equation Laplacian* psi = lambda psi at lambda < 0 (indicators only)",
    );
    let g = graph(common)?;
    echo_graph(&mut r, common, &g);
    r.input("lambda", lambda).input("span", span);
    let f = filtration(&g, spec, &mut r)?;
    let tol = common.tol.unwrap_or(1e-9);
    r.tolerance("psd_floor", tol).tolerance(
        "shoot_cauchy_gap",
        energy_space::deficiency::SHOOT_CAUCHY_GAP,
    );
    let scan = finite_section_scan(&g, &f, lambda)?;
    for l in &scan.levels {
        if let Some(v) = l.min_singular_value {
            r.row(l.level, "min_singular_value", v);
        }
    }
    let floor = -lambda - tol;
    let scan_pass = scan
        .levels
        .iter()
        .all(|l| l.min_singular_value.is_some_and(|v| v >= floor));
    let shoot = match defect_shoot_chain(&g, lambda, span) {
        Ok(d) => {
            for l in &d.levels {
                if let Some(v) = l.growth_ratio {
                    r.row(l.level, "growth_ratio", v);
                }
                if let Some(v) = l.energy_sum {
                    r.row(l.level, "energy_sum", v);
                }
            }
            r.row("all", "shoot_verdict", d.verdict.to_string());
            serde_json::to_value(&d)?
        }
        Err(Error::NotAChain(_)) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    let last = f.levels().last().expect("nonempty filtration");
    let s = FiniteSection::new(&g, last.iter().cloned(), BoundaryMode::Free)?;
    let min_eig = semibounded_check(&g, &s)?;
    r.row("all", "scan_verdict", scan.verdict.to_string()).row(
        "all",
        "semibounded_min_eigenvalue",
        min_eig,
    );
    r.result("scan", serde_json::to_value(&scan)?)
        .result("scan_pass", scan_pass)
        .result("shoot", shoot)
        .result("semibounded_min_eigenvalue", min_eig);
    Ok(r)
}

pub fn boundary(
    common: &Common,
    spec: &str,
    vertex: Option<&str>,
    function: FunctionArg,
    window: Option<&str>,
) -> Result<Report> {
    let mut r = Report::new(
        "boundary",
        "discrete Green identity: normal derivatives over F sum to -<chi_F, psi>_E",
    );
    let g = graph(common)?;
    echo_graph(&mut r, common, &g);
    let f = filtration(&g, spec, &mut r)?;
    let tol = common.tol.unwrap_or(1e-12);
    r.tolerance("identity_gap", tol)
        .tolerance("limit_tail_gap", energy_space::boundary::BOUNDARY_TAIL_GAP);
    let levels = f.levels();
    let last = levels.last().expect("nonempty filtration");
    let psi = match function {
        FunctionArg::Dipole => {
            let v = vertex.ok_or_else(|| {
                Error::InvalidArgument("--vertex is required for --function dipole".into())
            })?;
            let x = g.parse_vertex(v)?;
            r.input("function", "dipole").input("vertex", label(&x));
            let s = FiniteSection::new(&g, last.iter().cloned(), BoundaryMode::Free)?;
            energy_space::dipole::dipole(&g, &x, &s)?
        }
        FunctionArg::Harmonic => {
            r.input("function", "harmonic");
            let cands = harmonic_defect(&g, &f)?;
            let c = cands.into_iter().next().ok_or_else(|| {
                Error::InvalidArgument("no finite-energy harmonic function found".into())
            })?;
            c.function
        }
    };
    let mut out = Vec::new();
    for (k, level) in levels[..levels.len() - 1].iter().enumerate() {
        let id = boundary_sum_identity(&g, &psi, level)?;
        r.row(k + 1, "normal_derivative_sum", id.sum)
            .row(k + 1, "pairing", id.pairing)
            .row(k + 1, "gap", id.gap);
        out.push(json!({"level": k + 1, "sum": id.sum, "pairing": id.pairing, "gap": id.gap, "pass": id.gap <= tol}));
    }
    r.result("identity", out);
    if let Some(w) = window {
        let seq = parse_window(&g, w)?;
        r.input("sequence", seq.iter().map(label).collect::<Vec<_>>());
        let lim = boundary_point_limit(&g, &seq, &restrict(&psi, last))?;
        for (x, v) in seq.iter().zip(&lim.values) {
            r.row(x, "u(x)-u(o)", *v);
        }
        r.row("all", "limit", lim.limit)
            .row("all", "tail_gap", lim.tail_gap);
        r.result("boundary_point", serde_json::to_value(&lim)?);
    }
    Ok(r)
}

pub fn indicator(common: &Common, spec: &str, window: Option<&str>) -> Result<Report> {
    let mut r = Report::new(
        "indicator",
        "energies of level indicators chi_{F_k}: bounded but not a Cauchy sequence",
    );
    let g = graph(common)?;
    echo_graph(&mut r, common, &g);
    let f = filtration(&g, spec, &mut r)?;
    let levels = f.levels();
    let boxes = spec.starts_with("box:");
    let dim = match (g.lattice_dim(), g.chain_ratio()) {
        (Some(d), _) => Some(d as i32),
        (None, Some(1.0)) => Some(1),
        _ => None,
    };
    let mut out = Vec::new();
    for (i, level) in levels.iter().enumerate() {
        let k = i + 1;
        let exact = indicator_energy(&g, level)?;
        let brute = g.energy(&GraphFunction::<f64>::indicator(level))?;
        let step = if i == 0 {
            None
        } else {
            let prev: std::collections::BTreeSet<&VertexId> = levels[i - 1].iter().collect();
            let diff: Vec<VertexId> = level
                .iter()
                .filter(|v| !prev.contains(v))
                .cloned()
                .collect();
            Some(g.energy(&GraphFunction::<f64>::indicator(&diff))?)
        };
        let (count, leading) = match (boxes, dim) {
            (true, Some(d)) => {
                let kf = k as f64;
                (
                    Some(2.0 * d as f64 * (2.0 * kf + 1.0).powi(d - 1)),
                    Some(2.0 * d as f64 * (2.0 * kf).powi(d - 1)),
                )
            }
            _ => (None, None),
        };
        r.row(k, "energy", exact).row(k, "brute_force", brute);
        if let Some(s) = step {
            r.row(k, "step_energy", s);
        }
        if let Some(p) = leading {
            r.row(k, "leading_order", p);
        }
        out.push(json!({
            "level": k,
            "size": level.len(),
            "energy": exact,
            "brute_force": brute,
            "step_energy": step,
            "boundary_edge_count": count,
            "leading_order": leading,
        }));
    }
    r.result("levels", out);
    if let Some(w) = window {
        let xs = parse_window(&g, w)?;
        r.input("window", xs.iter().map(label).collect::<Vec<_>>());
        if levels.len() < 2 {
            return Err(Error::InsufficientDepth {
                needed: 2,
                got: levels.len(),
            }
            .into());
        }
        let last = levels.last().expect("nonempty");
        let s = FiniteSection::new(&g, last.iter().cloned(), BoundaryMode::Free)?;
        let tests = dipoles(&g, &xs, &s)?;
        let inner = Filtration::from_levels(&g, levels[..levels.len() - 1].to_vec())?;
        let scan = weak_null_scan(&g, &inner, &tests)?;
        for (k, row) in scan.pairings.iter().enumerate() {
            for (x, p) in xs.iter().zip(row) {
                r.row(k + 1, format!("pairing(v_{x})"), *p);
            }
        }
        r.result("weak_null", serde_json::to_value(&scan)?);
    }
    Ok(r)
}

pub fn lattice(common: &Common, window: &str, eps: Option<&str>) -> Result<Report> {
    let mut r = Report::new(
        "lattice",
        "Parseval form of the energy on the integer chain; the monopole symbol has infinite energy",
    );
    let xy: Vec<i64> = window
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("--window must be two integers x,y, got {window:?}")))?;
    let [x, y] = xy[..] else {
        return Err(Error::InvalidArgument("--window must be two integers x,y".into()).into());
    };
    let grid: Vec<f64> = match eps {
        Some(e) => e
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad --eps list {e:?}")))?,
        None => (0..8).map(|k| 0.5 / 2f64.powi(k)).collect(),
    };
    r.input("x", x).input("y", y).input("eps", grid.clone());
    let tol = common.tol.unwrap_or(1e-8);
    r.tolerance("parseval", tol)
        .tolerance("divergence_fit", 0.1);

    let delta = BTreeMap::from([(0i64, Complex64::new(1.0, 0.0))]);
    let ramp: BTreeMap<i64, Complex64> = (0..=10)
        .map(|n| (n, Complex64::new(n.clamp(0, x.max(0)) as f64, 0.0)))
        .collect();
    let mut parseval = Vec::new();
    for (name, u) in [("delta_0", &delta), ("truncated_ramp", &ramp)] {
        let q = fourier_energy(u);
        let d = direct_energy(u);
        r.row(name, "fourier", q).row(name, "direct", d);
        parseval
            .push(json!({"probe": name, "fourier": q, "direct": d, "pass": (q - d).abs() <= tol}));
    }
    r.result("parseval", parseval);

    let div = monopole_symbol_divergence(x, &grid)?;
    for (e, p) in div.epsilons.iter().zip(&div.partial_integrals) {
        r.row(e, "partial_integral", *p);
    }
    r.row("all", "fit_constant", div.fit_constant)
        .row("all", "fit_residual", div.fit_residual);
    let fit_pass = div.fit_residual < 0.1;
    r.result("divergence", serde_json::to_value(&div)?)
        .result("divergence_pass", fit_pass);

    let cf = chain_closed_forms(x, y)?;
    r.row(
        "printed",
        "reproducing_error",
        cf.printed_check.reproducing_error,
    )
    .row(
        "printed",
        "symmetric_error",
        cf.printed_check.symmetric_error,
    )
    .row(
        "corrected",
        "reproducing_error",
        cf.corrected_check.reproducing_error,
    );
    let z = WeightedGraph::zchain();
    let span: Vec<VertexId> = (-(x + 2)..=(x + 2)).map(VertexId::Int).collect();
    let corrected_energy = z.energy(&restrict(&cf.corrected, &span))?;
    r.result(
        "closed_forms",
        json!({
            "printed": serde_json::to_value(&cf.printed_check)?,
            "corrected": serde_json::to_value(&cf.corrected_check)?,
            "corrected_energy": corrected_energy,
        }),
    );
    Ok(r)
}

fn mc_json(name: &str, est: &MonteCarloEstimate, target: Complex64, k: f64) -> Value {
    json!({
        "check": name,
        "estimate": complex(est.estimate),
        "standard_error": est.standard_error,
        "target": complex(target),
        "z": est.z_score(target),
        "pass": est.within(target, k),
        "samples": est.samples,
    })
}

pub fn gaussian_check(
    common: &Common,
    args: &SectionArgs,
    window: &str,
    samples: usize,
) -> Result<Report> {
    let mut r = Report::new(
        "gaussian-check",
        "Gaussian field identities: E[exp(i u~)] = exp(-|u|^2/2) and Hermite moments against exp(i u~)",
    );
    let g = graph(common)?;
    echo_graph(&mut r, common, &g);
    let s = section(&g, args, &mut r)?;
    let xs = parse_window(&g, window)?;
    r.input("window", xs.iter().map(label).collect::<Vec<_>>())
        .input("samples", samples);
    let k_sigma = common.tol.unwrap_or(5.0);
    r.tolerance("standard_errors", k_sigma);
    let kernel = kernel_gram(&g, &xs, &s)?;
    let model = gaussian_field(&kernel, common.seed)?.with_base(g.base_point().clone());
    let n = xs.len();
    let unit = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let first = unit(0);
    let last = unit(n - 1);
    let o = g.base_point().clone();
    let mut checks = Vec::new();
    let mut push = |name: String, est: MonteCarloEstimate, target: Complex64, r: &mut Report| {
        r.row(&name, "estimate_re", est.estimate.re)
            .row(&name, "estimate_im", est.estimate.im)
            .row(&name, "standard_error", est.standard_error)
            .row(&name, "target_re", target.re)
            .row(&name, "target_im", target.im);
        checks.push(mc_json(&name, &est, target, k_sigma));
    };
    for (name, u) in [
        (format!("characteristic(v_{})", xs[0]), &first),
        (format!("characteristic(v_{})", xs[n - 1]), &last),
    ] {
        let est = mc_characteristic(&model, u, samples)?;
        push(name, est, characteristic_target(&model, u)?, &mut r);
    }
    for order in 1..=3 {
        let est = mc_moment(&model, &first, &first, order, samples)?;
        let target = moment_target(&model, &first, &first, order)?;
        push(
            format!("moment{order}(f=v_{0},u=v_{0})", xs[0]),
            est,
            target,
            &mut r,
        );
    }
    for order in 1..=2 {
        let est = mc_moment(&model, &last, &first, order, samples)?;
        let target = moment_target(&model, &last, &first, order)?;
        push(
            format!("moment{order}(f=v_{},u=v_{})", xs[n - 1], xs[0]),
            est,
            target,
            &mut r,
        );
    }
    let mut pairs = vec![(xs[n - 1].clone(), o.clone())];
    if n > 1 {
        pairs.push((xs[n - 1].clone(), xs[0].clone()));
    }
    for (a, b) in pairs {
        let est = mc_dipole_transform(&model, &a, &b, &first, samples)?;
        let target = dipole_transform_target(&model, &a, &b, &first)?;
        push(
            format!("dipole_transform(w_{a},{b};u=v_{})", xs[0]),
            est,
            target,
            &mut r,
        );
    }
    let cov = sampled_covariance(&model, samples)?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = (cov.covariance[i][j] - kernel.get(i, j)).abs();
            let z = if d == 0.0 {
                0.0
            } else {
                d / cov.covariance_standard_error[i][j]
            };
            worst = worst.max(z);
        }
    }
    r.row("covariance", "max_z", worst);
    let all_pass = checks.iter().all(|c| c["pass"] == json!(true));
    r.result("checks", checks)
        .result("covariance", serde_json::to_value(&cov)?)
        .result("covariance_max_z", worst)
        .result("gram", kernel.entries.to_rows())
        .result("pass", all_pass);
    Ok(r)
}
