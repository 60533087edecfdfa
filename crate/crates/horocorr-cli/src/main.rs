//! `horocorr` — build, analyze, flow, and verify hypersurfaces generated
//! from conformal factors on sphere domains.
//!
//! Subcommands: `build` (OBJ + JSON sidecar at one flow time), `analyze`
//! (curvature / convexity / flow-invariance / embeddedness / boundary-β /
//! realizability report), `flow` (flow-time lattice scan), `verify` (the
//! numbered acceptance suite), `catalog` (list the built-in metrics).
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 math-domain error (e.g. an eigenvalue at the immersion threshold).
//! Reports are byte-identical for the same config and tool version; pass
//! `--timings` to embed wall-clock timings at the cost of that guarantee.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use horocorr_core::acceptance::{run_all, run_filtered, CriterionResult};
use horocorr_core::catalog::{lookup_at, meridian_approach, registry, CatalogEntry};
use horocorr_core::conformal::{
    boundary_divergence_scan, default_divergence_threshold, p_eigenvalues_rescaled,
    realizability_scan, ConformalMetric, DivergenceVerdict, RealizabilityVerdict,
};
use horocorr_core::correspondence::{
    convexity_check, lambda_from_kappa, metric_to_hypersurface, min_flow_time,
    with_principal_curvatures, ConvexityVerdict, HypersurfaceMesh,
};
use horocorr_core::embed::embeddedness_check;
use horocorr_core::flow::{find_embedding_time, flow_invariance_check, measure_curvatures, normal_flow};
use horocorr_core::mesh_io::{write_obj_file, write_sidecar_file};
use horocorr_core::report::{parse_config, AnalysisFlags, Report, RunConfig};
use horocorr_core::sphere::{build_grid, DomainKind, ParameterGrid, SpherePoint};
use horocorr_core::tolerances::FLOW_SEARCH_MARGIN;
use horocorr_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "horocorr",
    version,
    about = "Hypersurfaces in hyperbolic space from conformal factors on sphere domains",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the mesh at one flow time and write an OBJ file plus a JSON
    /// sidecar with per-node curvature data
    Build(RunArgs),
    /// Run the selected analyses and emit a JSON report
    Analyze(RunArgs),
    /// Scan a flow-time lattice: embeddedness per time plus flow consistency
    Flow(RunArgs),
    /// Run the acceptance suite (all criteria, or a filtered subset)
    Verify(VerifyArgs),
    /// List the metric catalog, or show one entry
    Catalog(CatalogArgs),
}

/// Configuration shared by `build`, `analyze`, and `flow`: an optional JSON
/// config file (`config/v1`) plus flags; flags override file fields.
#[derive(Args)]
struct RunArgs {
    /// JSON config file (schema `config/v1`); flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog metric id: `constant:<c>`, `flat-punctured`, or `cylindric`
    #[arg(long)]
    metric: Option<String>,
    /// Sphere dimension n (the hypersurface lives in H^{n+1})
    #[arg(long)]
    n: Option<usize>,
    /// Grid sites per axis, e.g. `64x64` (n entries separated by `x`)
    #[arg(long)]
    resolution: Option<String>,
    /// Extra boundary margin (radians) on top of the domain's own
    #[arg(long)]
    margin: Option<f64>,
    /// Flow time for `build` and `analyze`
    #[arg(long)]
    t: Option<f64>,
    /// Ascending flow times for `flow`, comma-separated, e.g. `1,2,3`
    #[arg(long)]
    t_lattice: Option<String>,
    /// Comma-separated analyses for `analyze`: curvature, convexity,
    /// flow_invariance, embeddedness, beta_scan, realizability, or `all`
    /// (default: curvature,convexity)
    #[arg(long)]
    analyses: Option<String>,
    /// OBJ output path (`build`; per-time variants for `flow`)
    #[arg(long)]
    obj: Option<PathBuf>,
    /// JSON sidecar output path (`build`)
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// JSON report output path (default: stdout)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Worker thread cap (fallback: the HOROCORR_THREADS env var)
    #[arg(long)]
    threads: Option<usize>,
    /// Eigenvalue bound for the realizability analysis (default: 1/2)
    #[arg(long)]
    bound: Option<f64>,
    /// Embed wall-clock timings in the report (reports are then no longer
    /// byte-identical across runs)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only criteria whose name contains this tag (or one 1-based index)
    #[arg(long)]
    filter: Option<String>,
    /// Emit machine-readable JSON results instead of text lines
    #[arg(long)]
    json: bool,
    /// Worker thread cap (fallback: the HOROCORR_THREADS env var)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CatalogArgs {
    /// Show one entry by id instead of listing all
    id: Option<String>,
    /// Emit machine-readable JSON cards
    #[arg(long)]
    json: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    std::process::exit(code);
}

/// 2 for anything the user can fix in the invocation or config; 3 when the
/// mathematics itself refuses (dictionary pole, eigenvalues at 1/2, …).
fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::MathDomain(_) | Error::DegenerateLambda { .. } => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Build(args) => {
            let config = assemble_config(&args)?;
            init_threads(effective_threads(args.threads, config.threads)?)?;
            cmd_build(config, args.timings)?;
            Ok(0)
        }
        Command::Analyze(args) => {
            let config = assemble_config(&args)?;
            init_threads(effective_threads(args.threads, config.threads)?)?;
            cmd_analyze(config, args.timings)?;
            Ok(0)
        }
        Command::Flow(args) => {
            let config = assemble_config(&args)?;
            init_threads(effective_threads(args.threads, config.threads)?)?;
            cmd_flow(config, args.timings)?;
            Ok(0)
        }
        Command::Verify(args) => {
            init_threads(effective_threads(args.threads, None)?)?;
            cmd_verify(args)
        }
        Command::Catalog(args) => {
            cmd_catalog(args)?;
            Ok(0)
        }
    }
}

/// Thread-cap precedence: `--threads` flag, then HOROCORR_THREADS, then the
/// config file; `None` lets the pool size itself.
fn effective_threads(flag: Option<usize>, config: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("HOROCORR_THREADS") {
        Ok(s) => {
            let n: usize = s.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("HOROCORR_THREADS must be a positive integer, got '{s}'"))
            })?;
            if n == 0 {
                return Err(Error::InvalidInput(
                    "HOROCORR_THREADS must be at least 1".into(),
                ));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(config),
    }
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

/// Merge the config file (if any) with flag overrides and validate.
fn assemble_config(args: &RunArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => {
            if args.metric.is_none() {
                return Err(Error::InvalidInput(
                    "no metric given: pass --metric <id> or --config <file>".into(),
                ));
            }
            RunConfig::default()
        }
    };
    if let Some(metric) = &args.metric {
        config.metric = metric.clone();
    }
    if let Some(n) = args.n {
        config.n = n;
        // A bare dimension change keeps the default resolution usable.
        if args.resolution.is_none() && config.resolution == RunConfig::default().resolution {
            config.resolution = vec![16; n];
        }
    }
    if let Some(spec) = &args.resolution {
        config.resolution = parse_resolution(spec)?;
    }
    if let Some(margin) = args.margin {
        config.margin = margin;
    }
    if let Some(t) = args.t {
        config.t = Some(t);
    }
    if let Some(spec) = &args.t_lattice {
        config.t_lattice = Some(parse_lattice(spec)?);
    }
    if let Some(spec) = &args.analyses {
        config.analyses = parse_analyses(spec)?;
    }
    if let Some(p) = &args.obj {
        config.output.obj = Some(p.clone());
    }
    if let Some(p) = &args.sidecar {
        config.output.sidecar = Some(p.clone());
    }
    if let Some(p) = &args.report {
        config.output.report = Some(p.clone());
    }
    if let Some(threads) = args.threads {
        config.threads = Some(threads);
    }
    if let Some(bound) = args.bound {
        config.realizability_bound = Some(bound);
    }
    config.validate()?;
    Ok(config)
}

fn parse_resolution(spec: &str) -> Result<Vec<usize>> {
    spec.split(['x', 'X'])
        .map(|part| {
            part.trim().parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "cannot parse resolution '{spec}' (expected e.g. 64x64)"
                ))
            })
        })
        .collect()
}

fn parse_lattice(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|part| {
            part.trim().parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "cannot parse flow-time lattice '{spec}' (expected e.g. 1,2,3)"
                ))
            })
        })
        .collect()
}

fn parse_analyses(spec: &str) -> Result<AnalysisFlags> {
    let mut flags = AnalysisFlags::default();
    for name in spec.split(',') {
        match name.trim().replace('-', "_").as_str() {
            "curvature" => flags.curvature = true,
            "convexity" => flags.convexity = true,
            "flow_invariance" => flags.flow_invariance = true,
            "embeddedness" => flags.embeddedness = true,
            "beta_scan" => flags.beta_scan = true,
            "realizability" => flags.realizability = true,
            "all" => {
                flags = AnalysisFlags {
                    curvature: true,
                    convexity: true,
                    flow_invariance: true,
                    embeddedness: true,
                    beta_scan: true,
                    realizability: true,
                }
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown analysis '{other}' (available: curvature, convexity, \
                     flow_invariance, embeddedness, beta_scan, realizability, all)"
                )))
            }
        }
    }
    Ok(flags)
}

fn resolve_entry(config: &RunConfig) -> Result<CatalogEntry> {
    lookup_at(&config.metric, config.n)
}

fn build_config_grid(entry: &CatalogEntry, config: &RunConfig) -> Result<ParameterGrid> {
    build_grid(entry.metric.domain(), &config.resolution, config.margin)
}

/// The immersion degenerates where a rescaled eigenvalue reaches 1/2; refuse
/// to build such a mesh, naming the witness node.
fn assert_immersion_admissible(
    metric: &ConformalMetric,
    grid: &ParameterGrid,
    t: f64,
) -> Result<()> {
    let mut worst = f64::NEG_INFINITY;
    let mut witness = 0usize;
    for (idx, node) in grid.nodes.iter().enumerate() {
        let lambdas = p_eigenvalues_rescaled(metric, &node.point, t)?;
        let hi = *lambdas.last().expect("n >= 1 eigenvalues");
        if hi > worst {
            worst = hi;
            witness = idx;
        }
    }
    if worst >= 0.5 - 1e-9 {
        return Err(Error::MathDomain(format!(
            "eigenvalues reach 1/2: max rescaled eigenvalue {:.9} at flow time {t}, \
             grid node {:?}; choose t past the minimal flow time",
            worst,
            grid.nodes[witness].point.coords()
        )));
    }
    Ok(())
}

fn sanitized_stem(config: &RunConfig, t: f64) -> String {
    format!("{}_t{t}", config.metric.replace(':', "-"))
}

/// Emit the report: to its configured file (with a stderr note), or stdout.
fn deliver_report(report: &Report) -> Result<()> {
    let json = report.to_json_string()?;
    match &report.config.output.report {
        Some(path) => {
            std::fs::write(path, &json)?;
            eprintln!("report written to {}", path.display());
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn cmd_build(mut config: RunConfig, timings: bool) -> Result<()> {
    if config.t_lattice.is_some() {
        return Err(Error::InvalidInput(
            "build takes a single --t; --t-lattice belongs to the flow command".into(),
        ));
    }
    let t = config.t.unwrap_or(0.0);
    config.t = Some(t);
    let entry = resolve_entry(&config)?;
    let grid = build_config_grid(&entry, &config)?;
    let started = Instant::now();
    assert_immersion_admissible(&entry.metric, &grid, t)?;
    let mesh = with_principal_curvatures(&metric_to_hypersurface(&entry.metric, t, &grid)?)?;

    let stem = sanitized_stem(&config, t);
    let obj_path = match (&config.output.obj, config.n) {
        (Some(path), 2) => Some(path.clone()),
        (Some(_), _) => {
            return Err(Error::InvalidInput(format!(
                "OBJ export is defined for n = 2 surfaces only (n = {})",
                config.n
            )))
        }
        (None, 2) => Some(PathBuf::from(format!("{stem}.obj"))),
        (None, _) => None,
    };
    let sidecar_path = config
        .output
        .sidecar
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{stem}.sidecar.json")));

    if let Some(path) = &obj_path {
        write_obj_file(&mesh, path)?;
        eprintln!("wrote {}", path.display());
    }
    write_sidecar_file(&mesh, &sidecar_path)?;
    eprintln!("wrote {}", sidecar_path.display());

    if config.output.report.is_some() {
        let elapsed = started.elapsed().as_millis() as u64;
        let mut report = Report::new(config);
        report.push(
            "build",
            Some(true),
            format!(
                "mesh '{}' at flow time {t}: {} nodes{}",
                mesh.label,
                mesh.node_count(),
                obj_path
                    .as_ref()
                    .map(|p| format!(", OBJ {}", p.display()))
                    .unwrap_or_default()
            ),
        );
        if timings {
            report.record_timing("build", elapsed);
        }
        deliver_report(&report)?;
    }
    Ok(())
}

/// Worst node-wise gap between the analytic rescaled eigenvalues and the
/// images of the measured principal curvatures, both ascending.
fn dictionary_discrepancy(metric: &ConformalMetric, mesh: &HypersurfaceMesh) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (idx, ks) in mesh.kappas.iter().enumerate() {
        let Some(ks) = ks else { continue };
        let analytic = p_eigenvalues_rescaled(metric, &mesh.grid.nodes[idx].point, mesh.flow_time)?;
        let mut measured: Vec<f64> = ks
            .iter()
            .map(|&k| lambda_from_kappa(k))
            .collect::<Result<_>>()?;
        measured.sort_by(f64::total_cmp);
        for (a, m) in analytic.iter().zip(&measured) {
            worst = worst.max((a - m).abs());
        }
    }
    Ok(worst)
}

fn describe_convexity(verdict: &ConvexityVerdict) -> String {
    match verdict {
        ConvexityVerdict::UniformlyWeaklyHC { kappa0 } => format!(
            "uniformly weakly horospherically convex: all principal curvatures ≥ {kappa0:.6}"
        ),
        ConvexityVerdict::WeaklyHCOnly => {
            "weakly horospherically convex only: some node sits entirely below the pole".into()
        }
        ConvexityVerdict::NotWeaklyHC { witness } => {
            format!("not weakly horospherically convex: node {witness} mixes sides of the pole")
        }
    }
}

fn domain_boundary_points(entry: &CatalogEntry) -> Vec<SpherePoint> {
    match &entry.metric.domain().kind {
        DomainKind::PuncturedAtPoints(points) => points.clone(),
        _ => Vec::new(),
    }
}

fn cmd_analyze(mut config: RunConfig, timings: bool) -> Result<()> {
    let entry = resolve_entry(&config)?;
    let grid = build_config_grid(&entry, &config)?;

    // Default to the cheapest informative pair when nothing is selected.
    let mut flags = config.analyses;
    if !(flags.curvature
        || flags.convexity
        || flags.flow_invariance
        || flags.embeddedness
        || flags.beta_scan
        || flags.realizability)
    {
        flags.curvature = true;
        flags.convexity = true;
        config.analyses = flags;
    }

    // Analyses that need a mesh share one flow time: the requested t, or the
    // smallest admissible lattice time.
    let needs_mesh =
        flags.curvature || flags.convexity || flags.flow_invariance || flags.embeddedness;
    let t = match config.t {
        Some(t) => t,
        None => min_flow_time(&entry.metric, &grid, FLOW_SEARCH_MARGIN)?,
    };
    config.t = Some(t);

    let mut report = Report::new(config.clone());
    let clock = Instant::now();
    let mut last_mark = 0u64;
    let mut mark = |report: &mut Report, name: &str| {
        if timings {
            let now = clock.elapsed().as_millis() as u64;
            report.record_timing(name, now - last_mark);
            last_mark = now;
        }
    };

    let mesh = if needs_mesh {
        assert_immersion_admissible(&entry.metric, &grid, t)?;
        Some(with_principal_curvatures(&metric_to_hypersurface(
            &entry.metric,
            t,
            &grid,
        )?)?)
    } else {
        None
    };

    if flags.curvature {
        let mesh = mesh.as_ref().expect("mesh built for curvature");
        let discrepancy = dictionary_discrepancy(&entry.metric, mesh)?;
        let passed = discrepancy < config.tolerances.curvature;
        #[derive(serde::Serialize)]
        struct CurvatureSummary {
            flow_time: f64,
            max_dictionary_discrepancy: f64,
            tolerance: f64,
        }
        report.push_with_data(
            "curvature",
            Some(passed),
            format!(
                "max eigenvalue dictionary discrepancy {discrepancy:.3e} at flow time {t} \
                 (tolerance {:.1e})",
                config.tolerances.curvature
            ),
            &CurvatureSummary {
                flow_time: t,
                max_dictionary_discrepancy: discrepancy,
                tolerance: config.tolerances.curvature,
            },
        )?;
        mark(&mut report, "curvature");
    }

    if flags.convexity {
        let mesh = mesh.as_ref().expect("mesh built for convexity");
        let verdict = convexity_check(mesh)?;
        report.push_with_data("convexity", None, describe_convexity(&verdict), &verdict)?;
        mark(&mut report, "convexity");
    }

    if flags.flow_invariance {
        let mesh = mesh.as_ref().expect("mesh built for flow invariance");
        let mut flowed = normal_flow(mesh, 1.0)?;
        measure_curvatures(&mut flowed)?;
        let inv = flow_invariance_check(mesh, &flowed);
        let passed = inv.passed();
        report.push_with_data(
            "flow_invariance",
            Some(passed),
            format!(
                "flow by 1: gauss deviation {:.3e}, edge-scale error {:.3e}, \
                 curvature evolution gap {}",
                inv.max_gauss_distance,
                inv.max_edge_scale_error,
                inv.max_curvature_discrepancy
                    .map(|d| format!("{d:.3e}"))
                    .unwrap_or_else(|| "n/a".into()),
            ),
            &inv,
        )?;
        mark(&mut report, "flow_invariance");
    }

    if flags.embeddedness {
        let mesh = mesh.as_ref().expect("mesh built for embeddedness");
        let verdict = embeddedness_check(mesh)?;
        let details = if verdict.is_embedded() {
            format!(
                "embedded at flow time {t} ({} candidate pairs examined)",
                verdict.candidate_pairs
            )
        } else {
            format!("self-intersecting at flow time {t}")
        };
        report.push_with_data("embeddedness", None, details, &verdict)?;
        mark(&mut report, "embeddedness");
    }

    if flags.beta_scan {
        let boundaries = domain_boundary_points(&entry);
        if boundaries.is_empty() {
            report.push(
                "beta_scan",
                None,
                "domain has no boundary points; scan skipped".into(),
            );
        } else {
            let mut scans = Vec::new();
            let mut all_diverging = true;
            let mut lines = Vec::new();
            for boundary in &boundaries {
                let approach = meridian_approach(boundary, 13);
                let scan = boundary_divergence_scan(
                    &entry.metric,
                    boundary,
                    &approach,
                    default_divergence_threshold(),
                )?;
                match &scan.verdict {
                    DivergenceVerdict::Diverging { final_beta } => lines.push(format!(
                        "β → {final_beta:.3e} toward {:?}: Diverging",
                        boundary.coords()
                    )),
                    DivergenceVerdict::Inconclusive { note } => {
                        all_diverging = false;
                        lines.push(format!(
                            "toward {:?}: Inconclusive ({note})",
                            boundary.coords()
                        ));
                    }
                }
                scans.push(scan);
            }
            report.push_with_data(
                "beta_scan",
                Some(all_diverging),
                lines.join("; "),
                &scans,
            )?;
        }
        mark(&mut report, "beta_scan");
    }

    if flags.realizability {
        let bound = config.realizability_bound.unwrap_or(0.5);
        let points: Vec<SpherePoint> = grid.nodes.iter().map(|n| n.point.clone()).collect();
        let scan = realizability_scan(&entry.metric, &points, bound)?;
        let mut details = format!(
            "sup |λ| = {:.9} over {} grid nodes against bound {bound}",
            scan.sup_abs_lambda, scan.sample_count
        );
        if (scan.sup_abs_lambda - bound).abs() < 1e-9 {
            details.push_str(" — boundary of bound");
        }
        let passed = matches!(scan.verdict, RealizabilityVerdict::WithinBound);
        report.push_with_data("realizability", Some(passed), details, &scan)?;
        mark(&mut report, "realizability");
    }

    deliver_report(&report)?;
    Ok(())
}

fn per_time_obj_path(base: &Path, t: f64) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mesh".into());
    base.with_file_name(format!("{stem}_t{t}.obj"))
}

fn cmd_flow(mut config: RunConfig, timings: bool) -> Result<()> {
    let lattice = config.t_lattice.clone().ok_or_else(|| {
        Error::InvalidInput("flow needs a lattice: pass --t-lattice <t1,t2,...>".into())
    })?;
    if config.n != 2 && config.output.obj.is_some() {
        return Err(Error::InvalidInput(format!(
            "OBJ export is defined for n = 2 surfaces only (n = {})",
            config.n
        )));
    }
    let entry = resolve_entry(&config)?;
    let grid = build_config_grid(&entry, &config)?;
    config.t = None;
    let mut report = Report::new(config.clone());
    let clock = Instant::now();

    // Embeddedness along the lattice, stopping at the first embedded time.
    let scan = find_embedding_time(&entry.metric, &grid, &lattice)?;
    let table: Vec<String> = scan
        .scanned
        .iter()
        .map(|(t, v)| {
            format!(
                "t={t}: {}",
                if v.is_embedded() {
                    "Embedded"
                } else {
                    "SelfIntersecting"
                }
            )
        })
        .collect();
    let details = match scan.first_embedded {
        Some(t) => format!("first embedded t = {t} ({})", table.join(", ")),
        None => format!("no embedded time in the lattice ({})", table.join(", ")),
    };
    report.push_with_data(
        "embedding_scan",
        Some(scan.first_embedded.is_some()),
        details,
        &scan,
    )?;
    if timings {
        report.record_timing("embedding_scan", clock.elapsed().as_millis() as u64);
    }

    // Flow consistency: evolve the first-lattice-time mesh to each later
    // time and compare measured curvatures against the evolution law.
    let t0 = lattice[0];
    assert_immersion_admissible(&entry.metric, &grid, t0)?;
    let base = with_principal_curvatures(&metric_to_hypersurface(&entry.metric, t0, &grid)?)?;
    for &t in &lattice {
        let mut flowed = normal_flow(&base, t - t0)?;
        measure_curvatures(&mut flowed)?;
        let inv = flow_invariance_check(&base, &flowed);
        let passed = inv.passed();
        report.push_with_data(
            &format!("flow_consistency_t{t}"),
            Some(passed),
            format!(
                "from t = {t0} to t = {t}: gauss deviation {:.3e}, edge-scale error {:.3e}, \
                 curvature evolution gap {}",
                inv.max_gauss_distance,
                inv.max_edge_scale_error,
                inv.max_curvature_discrepancy
                    .map(|d| format!("{d:.3e}"))
                    .unwrap_or_else(|| "n/a".into()),
            ),
            &inv,
        )?;
        if let Some(base_path) = &config.output.obj {
            let path = per_time_obj_path(base_path, t);
            write_obj_file(&flowed.mesh, &path)?;
            eprintln!("wrote {}", path.display());
        }
    }
    if timings {
        report.record_timing("flow_consistency", clock.elapsed().as_millis() as u64);
    }

    deliver_report(&report)?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let results: Vec<CriterionResult> = match &args.filter {
        Some(filter) => {
            let subset = run_filtered(filter);
            if subset.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "--filter '{filter}' matches no criterion"
                )));
            }
            subset
        }
        None => run_all(),
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&results).map_err(Error::from)?
        );
    } else {
        for r in &results {
            println!(
                "criterion {:2} {:<18} {} — {}",
                r.index,
                r.name,
                if r.passed { "PASS" } else { "FAIL" },
                r.details
            );
        }
    }
    if let Some(first) = results.iter().find(|r| !r.passed) {
        eprintln!(
            "verification failed: criterion {} ({}) — {}",
            first.index, first.name, first.details
        );
        return Ok(1);
    }
    Ok(0)
}

fn cmd_catalog(args: CatalogArgs) -> Result<()> {
    let entries: Vec<CatalogEntry> = match &args.id {
        Some(id) => vec![lookup_at(id, 2)?],
        None => registry(),
    };
    if args.json {
        let cards: Vec<_> = entries.iter().map(|e| e.card()).collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&cards).map_err(Error::from)?
        );
    } else {
        for entry in &entries {
            let card = entry.card();
            println!("{}", card.id);
            println!("  domain: {}", card.domain);
            for expectation in &card.expectations {
                let line = serde_json::to_string(expectation).map_err(Error::from)?;
                println!("  expects: {line}");
            }
        }
    }
    Ok(())
}
