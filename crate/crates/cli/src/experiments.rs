//! The experiment implementations behind each CLI subcommand.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use uptorus::budget::Budget;
use uptorus::frames::{
    self, parseval_cascade_check, phi_limit_target, psi_limit_target, reference_limits_check,
    uep_identity_check, window_points_estimate, FrameContext,
};
use uptorus::kernels;
use uptorus::lattice::{CoeffMap, Direction, LatticeIndex};
use uptorus::localization::{min_var_directional, min_var_gg_rect, thread_decompose, SupportSet};
use uptorus::numeric::SplitMix64;
use uptorus::uncertainty::{closed_form_up, up_directional, up_gg, ClosedForm, UpReport};

use crate::spec::{
    parse_dilation, parse_params, CompareGgParams, ExperimentName, ExperimentSpec, FrameParams,
    KernelId, KernelSweepParams, MinVarParams, ReferenceLimitsParams, UpParams,
};
use crate::table::{Cell, Table};
use crate::CliError;

pub fn run(spec: &ExperimentSpec) -> Result<Table, CliError> {
    let threads = effective_threads(spec.threads);
    match spec.name {
        ExperimentName::Up => run_up(spec),
        ExperimentName::KernelSweep => run_kernel_sweep(spec, threads),
        ExperimentName::CompareGg => run_compare_gg(spec, threads),
        ExperimentName::MinVar => run_min_var(spec),
        ExperimentName::FrameUep => run_frame_uep(spec, threads),
        ExperimentName::FrameCascade => run_frame_cascade(spec, threads),
        ExperimentName::FrameLimits => run_frame_limits(spec, threads),
        ExperimentName::ReferenceLimits => run_reference_limits(spec, threads),
    }
}

/// Thread count: explicit spec value, overridable by UPTORUS_THREADS.
fn effective_threads(spec_threads: usize) -> usize {
    std::env::var("UPTORUS_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(spec_threads)
        .max(1)
}

/// Index-ordered parallel map; the output is a pure function of the inputs,
/// independent of scheduling and thread count.
fn par_map<T, R, F>(items: Vec<T>, threads: usize, f: F) -> Result<Vec<R>, CliError>
where
    T: Send + Sync,
    R: Send,
    F: Fn(&T) -> Result<R, CliError> + Sync,
{
    let n = items.len();
    if threads <= 1 || n <= 1 {
        return items.iter().map(&f).collect();
    }
    let slots: Mutex<Vec<Option<Result<R, CliError>>>> =
        Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(n) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("poisoned")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("poisoned")
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect()
}

fn direction(l: &[i64]) -> Result<Direction, CliError> {
    Ok(Direction::new(l.to_vec())?)
}

fn up_cell(rep: &UpReport) -> Cell {
    match rep.up {
        Some(v) => Cell::Float(v),
        None => Cell::Empty,
    }
}

/// Support size of a kernel, used for budget pre-checks before anything is
/// materialized.
fn kernel_points(id: KernelId, n: u32, n_box: Option<&[i64]>, d: usize) -> u64 {
    match id {
        KernelId::Dirichlet => n_box
            .map(|b| b.iter().map(|&x| (2 * x.max(0) + 1) as u64).product())
            .unwrap_or(0),
        KernelId::Fejer => (2u64 * n as u64).saturating_sub(1).pow(d as u32),
        _ => 2 * n as u64 + 3,
    }
}

struct BuiltKernel {
    map: CoeffMap,
    param_echo: String,
    reference: Option<f64>,
}

fn build_kernel(
    id: KernelId,
    n: Option<u32>,
    n_box: Option<&[i64]>,
    d: Option<usize>,
    l: &Direction,
    k0: Option<&[i64]>,
) -> Result<BuiltKernel, CliError> {
    let need_n = || -> Result<u32, CliError> {
        n.ok_or_else(|| CliError::Validation(format!("kernel {} requires n", id.as_str())))
    };
    let k0_idx = k0.map(LatticeIndex::from);
    match id {
        KernelId::Dirichlet => {
            let b = n_box
                .map(|b| b.to_vec())
                .or_else(|| n.map(|n| vec![n as i64; l.dim()]))
                .ok_or_else(|| CliError::Validation("dirichlet requires N or n".into()))?;
            let nn = LatticeIndex::new(b.clone());
            let map = kernels::dirichlet_rect(&nn)?;
            let reference = closed_form_up(&ClosedForm::DirichletRect { n: nn, l: l.clone() })?;
            Ok(BuiltKernel {
                map,
                param_echo: format!("N={}", fmt_vec(&b)),
                reference: Some(reference),
            })
        }
        KernelId::Fejer => {
            let n = need_n()?;
            let d = d.unwrap_or(l.dim());
            if d != l.dim() {
                return Err(CliError::Validation(format!(
                    "fejer dimension {d} does not match L (dim {})",
                    l.dim()
                )));
            }
            Ok(BuiltKernel {
                map: kernels::fejer_inf(n, d)?,
                param_echo: format!("n={n}"),
                reference: Some(closed_form_up(&ClosedForm::FejerLimit { d })?),
            })
        }
        KernelId::PoweredCos => {
            let n = need_n()?;
            Ok(BuiltKernel {
                map: kernels::powered_cos(n, l)?,
                param_echo: format!("n={n}"),
                reference: Some(closed_form_up(&ClosedForm::PoweredCos { n })?),
            })
        }
        KernelId::PerturbedP => {
            let n = need_n()?;
            Ok(BuiltKernel {
                map: kernels::perturbed_p(n, l)?,
                param_echo: format!("n={n}"),
                reference: None,
            })
        }
        KernelId::PerturbedT => {
            let n = need_n()?;
            Ok(BuiltKernel {
                map: kernels::perturbed_t(n, l)?,
                param_echo: format!("n={n}"),
                reference: None,
            })
        }
        KernelId::DirichletAlong => {
            let n = need_n()?;
            Ok(BuiltKernel {
                map: kernels::dirichlet_along(n, l, k0_idx.as_ref())?,
                param_echo: format!("n={n}"),
                reference: None,
            })
        }
        KernelId::FejerAlong => {
            let n = need_n()?;
            Ok(BuiltKernel {
                map: kernels::fejer_along(n, l, k0_idx.as_ref())?,
                param_echo: format!("n={n}"),
                reference: Some(closed_form_up(&ClosedForm::DirectionalFejerLimit)?),
            })
        }
    }
}

fn run_up(spec: &ExperimentSpec) -> Result<Table, CliError> {
    let p: UpParams = parse_params(&spec.params)?;
    let l = direction(&p.l)?;
    let mut budget = Budget::with_cap(spec.budget);
    budget.charge(kernel_points(
        p.kernel,
        p.n.unwrap_or(1),
        p.n_box.as_deref(),
        p.d.unwrap_or(l.dim()),
    ))?;
    let built = build_kernel(p.kernel, p.n, p.n_box.as_deref(), p.d, &l, p.k0.as_deref())?;
    let rep = up_directional(&built.map, &l)?;
    let gg = up_gg(&built.map)?;
    let mut t = Table::new(&[
        "kernel",
        "params",
        "L",
        "up",
        "var_angular",
        "var_frequency",
        "up_gg",
        "closed_form",
        "status",
    ]);
    t.push(vec![
        Cell::Text(p.kernel.as_str().into()),
        Cell::Text(built.param_echo),
        Cell::Text(fmt_vec(&p.l)),
        up_cell(&rep),
        Cell::Float(rep.var_angular),
        Cell::Float(rep.var_frequency),
        up_cell(&gg),
        built.reference.map(Cell::Float).unwrap_or(Cell::Empty),
        Cell::Text(rep.status.as_str().into()),
    ]);
    t.note = format!(
        "up={} status={}",
        rep.up.map(|v| format!("{v:.12}")).unwrap_or_else(|| "undefined".into()),
        rep.status.as_str()
    );
    Ok(t)
}

fn run_kernel_sweep(spec: &ExperimentSpec, threads: usize) -> Result<Table, CliError> {
    let p: KernelSweepParams = parse_params(&spec.params)?;
    let l = direction(&p.l)?;
    let d = p.d.unwrap_or(l.dim());
    if p.n.is_empty() {
        return Err(CliError::Validation("sweep needs at least one n".into()));
    }
    let mut budget = Budget::with_cap(spec.budget);
    for &n in &p.n {
        budget.charge(kernel_points(p.kernel, n, None, d))?;
    }
    let rows = par_map(p.n.clone(), threads, |&n| {
        let built = build_kernel(p.kernel, Some(n), None, Some(d), &l, p.k0.as_deref())?;
        let rep = up_directional(&built.map, &l)?;
        let gg = up_gg(&built.map)?;
        let err = |u: &UpReport| match (u.up, built.reference) {
            (Some(v), Some(r)) if v.is_finite() && r.is_finite() => Cell::Float((v - r).abs()),
            _ => Cell::Empty,
        };
        Ok(vec![
            Cell::Int(n as i64),
            up_cell(&rep),
            up_cell(&gg),
            built.reference.map(Cell::Float).unwrap_or(Cell::Empty),
            err(&rep),
            err(&gg),
        ])
    })?;
    let mut t = Table::new(&[
        "n",
        "up_directional",
        "up_gg",
        "reference",
        "err_directional",
        "err_gg",
    ]);
    for row in rows {
        t.push(row);
    }
    t.note = format!("kernel={} d={d}", p.kernel.as_str());
    Ok(t)
}

fn run_compare_gg(spec: &ExperimentSpec, threads: usize) -> Result<Table, CliError> {
    let p: CompareGgParams = parse_params(&spec.params)?;
    let l = direction(&p.l)?;
    let d = l.dim() as f64;
    let lsq = l.norm_sq() as f64;
    let variant_p = match p.variant.as_str() {
        "p" => true,
        "t" => false,
        other => {
            return Err(CliError::Validation(format!(
                "variant must be \"p\" or \"t\", got {other:?}"
            )))
        }
    };
    let rows = par_map(p.n.clone(), threads, |&n| {
        let map = if variant_p {
            kernels::perturbed_p(n, &l)?
        } else {
            kernels::perturbed_t(n, &l)?
        };
        let upl = up_directional(&map, &l)?;
        let gg = up_gg(&map)?;
        let n4n = n as f64 * 4f64.powi(n as i32);
        let row = if variant_p {
            vec![
                Cell::Int(n as i64),
                up_cell(&upl),
                Cell::Float(0.25),
                Cell::Float(gg.up.unwrap_or(f64::NAN) / n4n),
                Cell::Float(d * lsq / 32.0),
            ]
        } else {
            let l1 = l.coords()[0] as f64;
            vec![
                Cell::Int(n as i64),
                Cell::Float(upl.up.unwrap_or(f64::NAN) / n4n),
                Cell::Float(l1 * l1 / (32.0 * lsq * lsq)),
                Cell::Float(gg.up.unwrap_or(f64::NAN) / n as f64),
                Cell::Float((d - 1.0) / 4.0),
            ]
        };
        Ok(row)
    })?;
    let columns: [&str; 5] = if variant_p {
        ["n", "up_l", "target_up_l", "up_gg_over_n4n", "target_up_gg"]
    } else {
        ["n", "up_l_over_n4n", "target_up_l", "up_gg_over_n", "target_up_gg"]
    };
    let mut t = Table::new(&columns);
    for row in rows {
        t.push(row);
    }
    t.note = format!("variant={}", p.variant);
    Ok(t)
}

fn build_support(p: &MinVarParams) -> Result<SupportSet, CliError> {
    match p.support.as_str() {
        "box" => {
            let n = p
                .n_box
                .as_ref()
                .ok_or_else(|| CliError::Validation("box support requires N".into()))?;
            Ok(SupportSet::cube(&LatticeIndex::new(n.clone()))?)
        }
        "cross" => {
            let n = p
                .n_box
                .as_ref()
                .ok_or_else(|| CliError::Validation("cross support requires N".into()))?;
            Ok(SupportSet::cross(&LatticeIndex::new(n.clone()))?)
        }
        "line" => {
            let l = p
                .l
                .as_ref()
                .ok_or_else(|| CliError::Validation("line support requires L".into()))?;
            let k0 = p.k0.clone().unwrap_or_else(|| vec![0; l.len()]);
            let m = p
                .m
                .ok_or_else(|| CliError::Validation("line support requires m".into()))?;
            Ok(SupportSet::line(
                &LatticeIndex::new(k0),
                &Direction::new(l.clone())?,
                m,
            )?)
        }
        "points" => {
            let pts = p
                .points
                .as_ref()
                .ok_or_else(|| CliError::Validation("points support requires points".into()))?;
            if pts.is_empty() {
                return Err(CliError::Validation("points support is empty".into()));
            }
            let dim = pts[0].len();
            Ok(SupportSet::new(
                dim,
                pts.iter().map(|v| LatticeIndex::new(v.clone())).collect(),
            )?)
        }
        other => Err(CliError::Validation(format!(
            "unknown support {other:?}; use box, cross, line or points"
        ))),
    }
}

fn run_min_var(spec: &ExperimentSpec) -> Result<Table, CliError> {
    let p: MinVarParams = parse_params(&spec.params)?;
    match p.mode.as_str() {
        "directional" => {
            let l_coords = p
                .l
                .clone()
                .ok_or_else(|| CliError::Validation("min-var requires L".into()))?;
            let l = direction(&l_coords)?;
            let s = build_support(&p)?;
            let threads_count = thread_decompose(&s, &l)?.len();
            let sol = min_var_directional(&s, &l, p.normalize)?;
            let check = up_directional(&sol.polynomial, &l)?;
            let formula = {
                let t = (std::f64::consts::PI / (sol.m0 as f64 + 2.0)).tan();
                t * t
            };
            let mut t = Table::new(&[
                "support",
                "L",
                "m0",
                "var_angular",
                "var_formula",
                "up",
                "up_check",
                "threads",
                "support_size",
            ]);
            t.push(vec![
                Cell::Text(p.support.clone()),
                Cell::Text(fmt_vec(&l_coords)),
                Cell::Int(sol.m0 as i64),
                Cell::Float(check.var_angular),
                Cell::Float(formula),
                Cell::Float(sol.up),
                up_cell(&check),
                Cell::Int(threads_count as i64),
                Cell::Int(s.len() as i64),
            ]);
            t.note = format!("m0={} var={:.12}", sol.m0, check.var_angular);
            Ok(t)
        }
        "gg-rect" => {
            let n = p
                .n_box
                .clone()
                .ok_or_else(|| CliError::Validation("gg-rect requires N".into()))?;
            let nn = LatticeIndex::new(n.clone());
            let (map, var_formula) = min_var_gg_rect(&nn)?;
            let measured = up_gg(&map)?;
            let mut t = Table::new(&[
                "axis",
                "N_axis",
                "corr",
                "corr_target",
                "var_angular",
                "var_target",
                "norm_sq",
            ]);
            let norm = map.squared_norm();
            for (axis, &nj) in n.iter().enumerate() {
                let e = Direction::new(LatticeIndex::unit(n.len(), axis).coords)?;
                let corr = map.modulate(&e)?.inner(&map)?.norm();
                let target = (std::f64::consts::PI / (2.0 * nj as f64 + 2.0)).cos();
                t.push(vec![
                    Cell::Int(axis as i64 + 1),
                    Cell::Int(nj),
                    Cell::Float(corr),
                    Cell::Float(target),
                    Cell::Float(measured.var_angular),
                    Cell::Float(var_formula),
                    Cell::Float(norm),
                ]);
            }
            t.note = format!("var={var_formula:.12} norm={norm:.12}");
            Ok(t)
        }
        other => Err(CliError::Validation(format!(
            "unknown min-var mode {other:?}; use directional or gg-rect"
        ))),
    }
}

fn frame_context(p: &FrameParams) -> Result<FrameContext, CliError> {
    let dil = parse_dilation(&p.a)?;
    let l = direction(&p.l)?;
    Ok(FrameContext::new(dil, l)?)
}

fn run_frame_uep(spec: &ExperimentSpec, threads: usize) -> Result<Table, CliError> {
    let p: FrameParams = parse_params(&spec.params)?;
    if p.levels.is_empty() {
        return Err(CliError::Validation("frame-uep needs levels".into()));
    }
    let ctx = frame_context(&p)?;
    let mut budget = Budget::with_cap(spec.budget);
    for &j in &p.levels {
        if j >= 63 {
            return Err(CliError::Validation("level too large for a full period".into()));
        }
        budget.charge(1u64 << j)?;
    }
    let rows = par_map(p.levels.clone(), threads, |&j| {
        let rep = uep_identity_check(&ctx, j, None)?;
        Ok((rep.residual_partition, rep.residual_orthogonality, rep.points_checked, j))
    })?;
    let mut t = Table::new(&["j", "residual_partition", "residual_orthogonality", "points"]);
    let mut max1 = 0.0f64;
    let mut max2 = 0.0f64;
    for (r1, r2, pts, j) in rows {
        max1 = max1.max(r1);
        max2 = max2.max(r2);
        t.push(vec![
            Cell::Int(j as i64),
            Cell::Float(r1),
            Cell::Float(r2),
            Cell::Int(pts as i64),
        ]);
    }
    t.note = format!("max residuals: partition {max1:.3e}, orthogonality {max2:.3e}");
    Ok(t)
}

fn run_frame_cascade(spec: &ExperimentSpec, threads: usize) -> Result<Table, CliError> {
    let p: FrameParams = parse_params(&spec.params)?;
    let ctx = frame_context(&p)?;
    let j_max = p.j_max.unwrap_or(12);
    let radius = p.radius.unwrap_or(4);
    let count = p.count.unwrap_or(1).max(1);
    let dim = ctx.dim();

    let support: u64 = ((2 * radius + 1) as u64).pow(dim as u32);
    let mut budget = Budget::with_cap(spec.budget);
    budget.charge(support * (j_max as u64 + 1) * count as u64)?;

    // all random polynomials drawn sequentially from the seed, then the
    // per-polynomial cascades run in parallel
    let mut rng = SplitMix64::new(spec.seed);
    let mut polys = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let mut entries = vec![];
        let mut k = vec![0i64; dim];
        fill_box(&mut entries, &mut k, 0, radius, &mut rng);
        polys.push(CoeffMap::from_entries(dim, entries)?);
    }

    let reports = par_map(polys, threads, |f| {
        Ok(parseval_cascade_check(&ctx, f, j_max, &mut Budget::unlimited())?)
    })?;

    let mut t = Table::new(&[
        "poly",
        "j",
        "energy_phi",
        "energy_psi",
        "cascade_residual",
        "final_gap",
    ]);
    let mut max_residual = 0.0f64;
    let mut max_gap = 0.0f64;
    for (pi, rep) in reports.iter().enumerate() {
        for (ri, row) in rep.rows.iter().enumerate() {
            let residual = rep.cascade_residuals.get(ri).copied();
            max_residual = max_residual.max(residual.map(f64::abs).unwrap_or(0.0));
            let last = ri + 1 == rep.rows.len();
            t.push(vec![
                Cell::Int(pi as i64),
                Cell::Int(row.j as i64),
                Cell::Float(row.energy_phi),
                Cell::Float(row.energy_psi),
                residual.map(Cell::Float).unwrap_or(Cell::Empty),
                if last { Cell::Float(rep.final_gap) } else { Cell::Empty },
            ]);
        }
        max_gap = max_gap.max(rep.final_gap);
    }
    t.note = format!("max cascade residual {max_residual:.3e}; max final gap {max_gap:.3e}");
    Ok(t)
}

fn fill_box(
    entries: &mut Vec<(LatticeIndex, Complex64)>,
    k: &mut Vec<i64>,
    axis: usize,
    radius: i64,
    rng: &mut SplitMix64,
) {
    if axis == k.len() {
        entries.push((
            LatticeIndex::new(k.clone()),
            Complex64::new(rng.next_normal(), 0.0),
        ));
        return;
    }
    for v in -radius..=radius {
        k[axis] = v;
        fill_box(entries, k, axis + 1, radius, rng);
    }
}

fn run_frame_limits(spec: &ExperimentSpec, threads: usize) -> Result<Table, CliError> {
    let p: FrameParams = parse_params(&spec.params)?;
    if p.levels.is_empty() {
        return Err(CliError::Validation("frame-limits needs levels".into()));
    }
    let ctx = frame_context(&p)?;
    let mut budget = Budget::with_cap(spec.budget);
    for &j in &p.levels {
        budget.charge(2 * window_points_estimate(&ctx, j, p.eps))?;
    }
    let rows = par_map(p.levels.clone(), threads, |&j| {
        Ok(frames::up_limit_row(&ctx, j, p.eps, &mut Budget::unlimited())?)
    })?;
    let mut t = Table::new(&[
        "j",
        "up_phi",
        "up_psi",
        "target_phi",
        "target_psi",
        "norm_phi",
        "norm_psi",
    ]);
    let mut dev = 0.0f64;
    for r in rows {
        dev = dev.max((r.up_phi - r.target_phi).abs() / r.target_phi);
        dev = dev.max((r.up_psi - r.target_psi).abs() / r.target_psi);
        t.push(vec![
            Cell::Int(r.j as i64),
            Cell::Float(r.up_phi),
            Cell::Float(r.up_psi),
            Cell::Float(r.target_phi),
            Cell::Float(r.target_psi),
            Cell::Float(r.norm_phi),
            Cell::Float(r.norm_psi),
        ]);
    }
    t.note = format!("max relative deviation from targets {dev:.3e}");
    Ok(t)
}

fn run_reference_limits(spec: &ExperimentSpec, threads: usize) -> Result<Table, CliError> {
    let p: ReferenceLimitsParams = parse_params(&spec.params)?;
    let l = direction(&p.l)?;
    let d = l.dim();
    if p.levels.is_empty() {
        return Err(CliError::Validation("reference-limits needs levels".into()));
    }
    let mut budget = Budget::with_cap(spec.budget);
    for &j in &p.levels {
        let radius = ((j as f64 + 1.0) * (1.0 / p.eps).ln() / l.norm_sq() as f64)
            .sqrt()
            .ceil() as u64
            + 1;
        budget.charge((2 * radius + 1).pow(d as u32) * 2)?;
    }
    let rows = par_map(p.levels.clone(), threads, |&j| {
        let (xi0, eta) = reference_limits_check(&l, j, p.eps)?;
        Ok(vec![
            Cell::Int(j as i64),
            up_cell(&xi0),
            up_cell(&eta),
            Cell::Float(phi_limit_target()),
            Cell::Float(psi_limit_target(d)),
        ])
    })?;
    let mut t = Table::new(&["j", "up_xi0", "up_eta", "target_xi0", "target_eta"]);
    for row in rows {
        t.push(row);
    }
    Ok(t)
}

/// Joined with ';' so vector values stay one CSV cell.
fn fmt_vec(v: &[i64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}
