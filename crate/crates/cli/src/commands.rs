use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context as _, Result};
use toposeg::diffusion::{anisotropic_filter, isotropic_filter};
use toposeg::image::{load_image, make_synthetic, save_image};
use toposeg::metrics::{boundary_f1, mse, psnr, psnr_from_mse};
use toposeg::pipeline::{run_pipeline, segment as run_segment, StageOutcome};
use toposeg::report::{format_float, rows_to_csv, rows_to_json, write_report};
use toposeg::topo::segmentation_from_levels;
use toposeg::{
    Conductance, DiffusionParams, Error, ImageBuffer, NoiseSpec, PipelineConfig, Prefilter,
    ReportFormat, ReportRow, SegMethod, SegmentParams, SegmentationMap, SyntheticKind,
    SyntheticSpec, TopoParams,
};

use crate::{
    DenoiseArgs, DiffusionArgs, EvaluateArgs, FilterArg, FormatArg, GTypeArg, KindArg, MethodArg,
    PipelineArgs, PrefilterArg, SegmentArgs, SynthArgs, TopoArgs,
};

pub struct Context {
    pub quiet: bool,
}

impl Context {
    fn progress(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// Argument problems detected by the library map to 2, everything else to 1.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidParameter(_)) => 2,
        _ => 1,
    }
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidParameter(msg.into()).into()
}

impl From<KindArg> for SyntheticKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Step => SyntheticKind::Step,
            KindArg::Disk => SyntheticKind::Disk,
            KindArg::Blob => SyntheticKind::Blob,
        }
    }
}

impl From<GTypeArg> for Conductance {
    fn from(g: GTypeArg) -> Self {
        match g {
            GTypeArg::Pm1 => Conductance::Pm1,
            GTypeArg::Pm2 => Conductance::Pm2,
        }
    }
}

impl From<MethodArg> for SegMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Discrete => SegMethod::Discrete,
            MethodArg::Continuum => SegMethod::Continuum,
        }
    }
}

impl From<PrefilterArg> for Prefilter {
    fn from(p: PrefilterArg) -> Self {
        match p {
            PrefilterArg::None => Prefilter::None,
            PrefilterArg::Isotropic => Prefilter::Isotropic,
            PrefilterArg::Anisotropic => Prefilter::Anisotropic,
        }
    }
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

impl DiffusionArgs {
    fn params(&self) -> Result<DiffusionParams> {
        let p = DiffusionParams {
            tau: self.tau,
            iters: self.iters,
            kappa: self.kappa.unwrap_or(DiffusionParams::default().kappa),
            g_type: self.g_type.into(),
        };
        p.validate()?;
        Ok(p)
    }
}

impl TopoArgs {
    fn params(&self, method: MethodArg) -> Result<SegmentParams> {
        let topo = TopoParams {
            crack_fraction: self.crack_fraction,
            crack_budget: self.crack_budget,
            min_derivative_magnitude: self.min_derivative,
            outer_iters: self.outer_iters,
            inner_diffusion_iters: self.inner_iters,
            tau: self.td_tau,
            min_region_size: self.min_region_size,
        };
        let method: SegMethod = method.into();
        match method {
            SegMethod::Discrete => topo.validate()?,
            SegMethod::Continuum => {
                if self.threshold.is_nan() || self.threshold >= 0.0 {
                    return Err(invalid(format!(
                        "--threshold must be negative, got {}",
                        self.threshold
                    )));
                }
                if self.min_region_size == 0 {
                    return Err(invalid("--min-region-size must be >= 1"));
                }
            }
        }
        Ok(SegmentParams {
            method,
            topo,
            threshold: self.threshold,
        })
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("{}: cannot write", path.display()))
}

fn emit_rows(rows: &[ReportRow], report: Option<&Path>, format: ReportFormat) -> Result<()> {
    match report {
        Some(path) => write_report(path, rows, format)?,
        None => match format {
            ReportFormat::Csv => print!("{}", rows_to_csv(rows)),
            ReportFormat::Json => print!("{}", rows_to_json(rows)),
        },
    }
    Ok(())
}

fn load_truth(path: &Path) -> Result<SegmentationMap> {
    if path.extension().is_some_and(|e| e == "txt") {
        let text =
            fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
        SegmentationMap::parse_text(&text)
            .with_context(|| format!("{}: bad label grid", path.display()))
    } else {
        Ok(segmentation_from_levels(&load_image(path)?))
    }
}

fn default_view_path(labels: &Path) -> PathBuf {
    if labels.extension().is_some_and(|e| e == "pgm") {
        labels.with_extension("view.pgm")
    } else {
        labels.with_extension("pgm")
    }
}

pub fn synth(ctx: &Context, args: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec::new(args.kind.into(), args.width, args.height)
        .with_levels(args.low, args.high);
    let img = make_synthetic(&spec)?;
    save_image(&img, &args.output)?;
    ctx.progress(format!(
        "wrote {} ({}x{})",
        args.output.display(),
        args.width,
        args.height
    ));
    Ok(())
}

pub fn denoise(ctx: &Context, args: DenoiseArgs) -> Result<()> {
    let params = args.diffusion.params()?;
    let input = load_image(&args.input)?;
    let reference = match &args.reference {
        Some(p) => Some(load_image(p)?),
        None => None,
    };
    ctx.progress(format!(
        "denoising {} ({}x{}), {} iterations",
        args.input.display(),
        input.width(),
        input.height(),
        params.iters
    ));
    let start = Instant::now();
    let (out, method) = match args.filter {
        FilterArg::Isotropic => (isotropic_filter(&input, &params)?, "isotropic".to_string()),
        FilterArg::Anisotropic => {
            let note = if args.diffusion.kappa.is_some() {
                ""
            } else {
                "(default)"
            };
            let method = format!(
                "anisotropic:{}:kappa={}{note}",
                params.g_type.as_str(),
                params.kappa
            );
            (anisotropic_filter(&input, &params)?, method)
        }
    };
    let elapsed = start.elapsed().as_millis() as u64;
    save_image(&out, &args.output)?;
    let target = reference.as_ref().unwrap_or(&input);
    let err = mse(&out, target)?;
    let row = ReportRow {
        stage: "denoise".to_string(),
        method,
        iteration: params.iters,
        mse: Some(err),
        psnr_db: Some(psnr_from_mse(err, 1.0)),
        cracks_total: 0,
        regions: None,
        boundary_f1: None,
        wall_time_ms: elapsed,
    };
    ctx.progress(format!(
        "wrote {}: psnr {} dB (8-bit peak 255)",
        args.output.display(),
        format_float(psnr_from_mse(err, 1.0))
    ));
    emit_rows(&[row], args.report.as_deref(), args.format.into())?;
    Ok(())
}

pub fn segment(ctx: &Context, args: SegmentArgs) -> Result<()> {
    let params = args.topo.params(args.method)?;
    let input = load_image(&args.input)?;
    let truth = match &args.truth {
        Some(p) => Some(load_truth(p)?),
        None => None,
    };
    let reference = match &args.reference {
        Some(p) => Some(load_image(p)?),
        None => None,
    };
    ctx.progress(format!(
        "segmenting {} ({}x{}) with the {} method",
        args.input.display(),
        input.width(),
        input.height(),
        params.method.as_str()
    ));
    let start = Instant::now();
    let outcome = run_segment(&input, &params)?;
    let f1 = match &truth {
        Some(t) => Some(boundary_f1(&outcome.segmentation, t, args.tol)?),
        None => None,
    };
    let err = match &reference {
        Some(r) => Some(mse(&outcome.image, r)?),
        None => None,
    };
    let elapsed = start.elapsed().as_millis() as u64;

    write_text(&args.labels, &outcome.segmentation.to_text())?;
    let view = args
        .view
        .clone()
        .unwrap_or_else(|| default_view_path(&args.labels));
    save_image(&outcome.segmentation.to_image(), &view)?;
    if let Some(path) = &args.cracks {
        let text = outcome
            .cracks
            .as_ref()
            .map(|c| c.to_text())
            .unwrap_or_default();
        write_text(path, &text)?;
    }
    if let Some(path) = &args.restored {
        save_image(&outcome.image, path)?;
    }
    if let Some(path) = &args.trace {
        let text = outcome
            .trace
            .as_ref()
            .map(|t| t.to_csv())
            .unwrap_or_default();
        write_text(path, &text)?;
    }

    let row = ReportRow {
        stage: "segment".to_string(),
        method: params.method.as_str().to_string(),
        iteration: outcome.iterations_run(),
        mse: err,
        psnr_db: err.map(|e| psnr_from_mse(e, 1.0)),
        cracks_total: outcome.cracks_total(),
        regions: Some(outcome.segmentation.region_count()),
        boundary_f1: f1,
        wall_time_ms: elapsed,
    };
    emit_rows(&[row], args.report.as_deref(), args.format.into())?;
    ctx.progress(format!(
        "{} regions, {} cracks",
        outcome.segmentation.region_count(),
        outcome.cracks_total()
    ));
    Ok(())
}

fn write_stage(dir: &Path, stage: &StageOutcome) -> Result<()> {
    let name = stage.stage;
    save_image(&stage.filtered, dir.join(format!("{name}_filtered.pgm")))?;
    save_image(
        &stage.outcome.image,
        dir.join(format!("{name}_restored.pgm")),
    )?;
    let seg = &stage.outcome.segmentation;
    write_text(&dir.join(format!("{name}_labels.txt")), &seg.to_text())?;
    save_image(&seg.to_image(), dir.join(format!("{name}_labels.pgm")))?;
    if let Some(cracks) = &stage.outcome.cracks {
        write_text(&dir.join(format!("{name}_cracks.txt")), &cracks.to_text())?;
    }
    if let Some(trace) = &stage.outcome.trace {
        write_text(&dir.join(format!("{name}_trace.csv")), &trace.to_csv())?;
    }
    Ok(())
}

pub fn pipeline(ctx: &Context, args: PipelineArgs) -> Result<()> {
    let cfg = PipelineConfig {
        noise: NoiseSpec::new(args.noise_sigma, args.seed)?,
        prefilter: args.prefilter.into(),
        diffusion: args.diffusion.params()?,
        segment: args.topo.params(args.method)?,
        compare: args.compare,
        f1_tolerance: args.tol,
    };
    let clean = match (&args.input, args.synth) {
        (Some(path), _) => load_image(path)?,
        (None, Some(kind)) => make_synthetic(
            &SyntheticSpec::new(kind.into(), args.width, args.height)
                .with_levels(args.low, args.high),
        )?,
        (None, None) => return Err(invalid("pipeline needs --input or --synth")),
    };
    let truth = segmentation_from_levels(&clean);

    let dir = &args.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("{}: cannot create", dir.display()))?;
    ctx.progress(format!(
        "pipeline on {}x{}: noise sigma {} seed {}, prefilter {}, method {}",
        clean.width(),
        clean.height(),
        cfg.noise.sigma,
        cfg.noise.seed,
        cfg.prefilter.as_str(),
        cfg.segment.method.as_str()
    ));
    let out = run_pipeline(&clean, &truth, &cfg)?;

    save_image(&clean, dir.join("clean.pgm"))?;
    save_image(&out.noisy, dir.join("noisy.pgm"))?;
    for stage in &out.stages {
        write_stage(dir, stage)?;
        let r = &stage.row;
        ctx.progress(format!(
            "{}: psnr {} dB, {} regions, boundary F1 {}",
            r.stage,
            format_float(r.psnr_db.unwrap_or(f64::NAN)),
            r.regions.unwrap_or(0),
            format_float(r.boundary_f1.unwrap_or(f64::NAN)),
        ));
    }

    let format: ReportFormat = args.format.into();
    let report = dir.join(match format {
        ReportFormat::Csv => "report.csv",
        ReportFormat::Json => "report.json",
    });
    let body = match format {
        ReportFormat::Csv => rows_to_csv(&out.rows()),
        ReportFormat::Json => rows_to_json(&out.rows()),
    };
    write_text(&report, &body)?;
    ctx.progress(format!("wrote {}", report.display()));
    Ok(())
}

pub fn evaluate(_ctx: &Context, args: EvaluateArgs) -> Result<()> {
    let wanted: Vec<&str> = args
        .metrics
        .split(',')
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .collect();
    if wanted.is_empty() {
        return Err(invalid("--metrics lists no metric"));
    }
    for m in &wanted {
        if !matches!(*m, "mse" | "psnr") {
            return Err(invalid(format!(
                "unknown metric {m:?} (expected mse or psnr)"
            )));
        }
    }
    if !(args.max_val > 0.0 && args.max_val.is_finite()) {
        return Err(invalid(format!(
            "--max-val must be positive, got {}",
            args.max_val
        )));
    }
    let a: ImageBuffer = load_image(&args.a)?;
    let b = load_image(&args.b)?;
    let mut header = Vec::new();
    let mut row = Vec::new();
    for m in wanted {
        match m {
            "mse" => {
                header.push("mse");
                row.push(format_float(mse(&a, &b)?));
            }
            _ => {
                header.push("psnr_db");
                row.push(format_float(psnr(&a, &b, args.max_val)?));
            }
        }
    }
    println!("{}", header.join(","));
    println!("{}", row.join(","));
    Ok(())
}
