use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use morphoseg::io::{save_color_png, save_gray_png, save_labels, save_pfm};
use morphoseg::metrics::{evaluate, MetricReport};
use morphoseg::{
    amr, amr_wt_detailed, build_hierarchy, group_regions, regional_minima, synthetic, Connectivity, LabelImage,
    SegmentInput, SpectralParams,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::inputs::{self, load_with_gradient};
use crate::{
    AmrArgs, Cli, CliError, Command, DemoArgs, EvalArgs, GradientSource, PipelineArgs, SegmentArgs, SpectralArgs,
};

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Reconstruct(a) => reconstruct(a),
        Command::Segment(a) => segment(a),
        Command::Hierarchy(a) => hierarchy(a),
        Command::Spectral(a) => spectral(a),
        Command::Eval(a) => eval(a),
        Command::Demo(a) => demo(a),
    }
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn amr_json(a: &AmrArgs) -> Value {
    let conn: Connectivity = a.connectivity.into();
    json!({
        "s": a.s,
        "m": a.m,
        "eta": a.eta,
        "connectivity": if conn == Connectivity::Four { 4 } else { 8 },
        "gradient": match &a.gradient {
            GradientSource::Sobel => "sobel".to_string(),
            GradientSource::File(p) => p.display().to_string(),
        },
    })
}

/// Checks paths and parameters shared by the image pipelines, then creates
/// the output directory.
fn prepare(inputs: &[PathBuf], amr: &AmrArgs, out: &Path) -> Result<(), CliError> {
    inputs::require_files(inputs)?;
    if let GradientSource::File(g) = &amr.gradient {
        inputs::require_files([g])?;
        if inputs.len() != 1 {
            return Err(CliError::Input(
                "--gradient <path> needs exactly one input image".into(),
            ));
        }
    }
    amr.params()?;
    inputs::create_out_dir(out)
}

/// Runs `f` over the inputs on the worker pool, preserving input order.
fn for_each_input<T: Send>(
    inputs: &[PathBuf],
    f: impl Fn(&Path) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    let pool = inputs::thread_pool()?;
    pool.install(|| inputs.par_iter().map(|p| f(p)).collect())
}

fn reconstruct(a: &PipelineArgs) -> Result<(), CliError> {
    prepare(&a.inputs, &a.amr, &a.out)?;
    let params = a.amr.params()?;
    let lines = for_each_input(&a.inputs, |path| {
        let (_, gradient) = load_with_gradient(path, &a.amr.gradient)?;
        let r = amr(&gradient, &params)?;
        let stem = inputs::stem(path);
        let pfm = a.out.join(format!("{stem}_psi.pfm"));
        save_pfm(r.psi.as_gray(), &pfm)?;
        write_json(
            &a.out.join(format!("{stem}_psi.json")),
            &json!({
                "command": "reconstruct",
                "input": path.display().to_string(),
                "output": pfm.display().to_string(),
                "params": amr_json(&a.amr),
                "iterations_used": r.iterations_used,
                "gap_history": r.gap_history,
            }),
        )?;
        Ok(format!("{}: iterations_used={}", path.display(), r.iterations_used))
    })?;
    lines.iter().for_each(|l| println!("{l}"));
    Ok(())
}

fn segment(a: &SegmentArgs) -> Result<(), CliError> {
    let p = &a.pipeline;
    prepare(&p.inputs, &p.amr, &p.out)?;
    let params = p.amr.params()?;
    let conn: Connectivity = p.amr.connectivity.into();
    let lines = for_each_input(&p.inputs, |path| {
        let (input, gradient) = load_with_gradient(path, &p.amr.gradient)?;
        let seeds_before = regional_minima(&gradient, conn).num_labels();
        let out = amr_wt_detailed(&SegmentInput::Gradient(gradient), &params, conn)?;
        let stem = inputs::stem(path);
        let png = p.out.join(format!("{stem}_labels.png"));
        save_labels(&out.labels, &png)?;
        if a.overlay {
            save_color_png(
                &inputs::overlay(&input, &out.labels),
                p.out.join(format!("{stem}_overlay.png")),
            )?;
        }
        write_json(
            &p.out.join(format!("{stem}_labels.json")),
            &json!({
                "command": "segment",
                "input": path.display().to_string(),
                "output": png.display().to_string(),
                "params": amr_json(&p.amr),
                "iterations_used": out.reconstruction.iterations_used,
                "gap_history": out.reconstruction.gap_history,
                "seeds_before_amr": seeds_before,
                "seeds_after_amr": out.seeds.num_labels(),
                "region_count": out.labels.num_labels(),
            }),
        )?;
        Ok(format!("{}: {} regions", path.display(), out.labels.num_labels()))
    })?;
    lines.iter().for_each(|l| println!("{l}"));
    Ok(())
}

fn hierarchy(a: &PipelineArgs) -> Result<(), CliError> {
    prepare(&a.inputs, &a.amr, &a.out)?;
    let conn: Connectivity = a.amr.connectivity.into();
    let lines = for_each_input(&a.inputs, |path| {
        let (_, gradient) = load_with_gradient(path, &a.amr.gradient)?;
        let h = build_hierarchy(&SegmentInput::Gradient(gradient), a.amr.s, a.amr.m, conn)?;
        let checks = h.refinement_checks()?;
        let stem = inputs::stem(path);
        let mut levels = Vec::with_capacity(h.levels.len());
        for (z, level) in h.levels.iter().enumerate() {
            let file = a.out.join(format!("{stem}_level_{z:03}.png"));
            save_labels(&level.labels, &file)?;
            // a level nests if the level below it refines it
            let (ok, violations) = if z == 0 { (true, 0) } else { checks[z - 1] };
            levels.push(json!({
                "level": z,
                "scale_cap": level.scale_cap,
                "region_count": level.region_count,
                "refinement_ok": ok,
                "violations": violations,
                "file": file.display().to_string(),
            }));
        }
        let mut params = amr_json(&a.amr);
        // levels are the exact cap family, so early stopping is off
        params["eta"] = json!(0.0);
        let rate = h.nesting_rate()?;
        write_json(
            &a.out.join(format!("{stem}_hierarchy.json")),
            &json!({
                "command": "hierarchy",
                "input": path.display().to_string(),
                "params": params,
                "nesting_rate": rate,
                "levels": levels,
            }),
        )?;
        Ok(format!(
            "{}: region counts {:?}, nesting rate {rate:.3}",
            path.display(),
            h.region_counts()
        ))
    })?;
    lines.iter().for_each(|l| println!("{l}"));
    Ok(())
}

fn spectral(a: &SpectralArgs) -> Result<(), CliError> {
    let p = &a.pipeline;
    prepare(&p.inputs, &p.amr, &p.out)?;
    let params = p.amr.params()?;
    let conn: Connectivity = p.amr.connectivity.into();
    let sp = SpectralParams {
        k: a.k,
        sigma: a.sigma,
        seed: a.seed,
    };
    if a.k == 0 {
        return Err(CliError::Input("--k must be at least 1".into()));
    }
    if !a.sigma.is_finite() || a.sigma <= 0.0 {
        return Err(CliError::Input(format!("--sigma must be > 0, got {}", a.sigma)));
    }
    let lines = for_each_input(&p.inputs, |path| {
        let (input, gradient) = load_with_gradient(path, &p.amr.gradient)?;
        if matches!(input, SegmentInput::Gradient(_)) {
            return Err(CliError::Input(format!(
                "{}: spectral grouping needs a colour or grey image, not a gradient",
                path.display()
            )));
        }
        let color = inputs::as_color(&input);
        let pre = amr_wt_detailed(&SegmentInput::Gradient(gradient), &params, conn)?;
        let (_, labels) = group_regions(&color, &pre.labels, &sp)?;
        let stem = inputs::stem(path);
        let png = p.out.join(format!("{stem}_spectral.png"));
        save_labels(&labels, &png)?;
        if a.overlay {
            save_color_png(
                &inputs::overlay(&input, &labels),
                p.out.join(format!("{stem}_spectral_overlay.png")),
            )?;
        }
        let mut params_json = amr_json(&p.amr);
        params_json["k"] = json!(a.k);
        params_json["sigma"] = json!(a.sigma);
        params_json["seed"] = json!(a.seed);
        write_json(
            &p.out.join(format!("{stem}_spectral.json")),
            &json!({
                "command": "spectral",
                "input": path.display().to_string(),
                "output": png.display().to_string(),
                "params": params_json,
                "presegmentation_regions": pre.labels.num_labels(),
                "region_count": labels.num_labels(),
            }),
        )?;
        Ok(format!(
            "{}: {} pre-segmentation regions grouped into {}",
            path.display(),
            pre.labels.num_labels(),
            labels.num_labels()
        ))
    })?;
    lines.iter().for_each(|l| println!("{l}"));
    Ok(())
}

struct EvalRow {
    name: String,
    report: MetricReport,
    regions: usize,
    ground_truths: usize,
}

fn eval(a: &EvalArgs) -> Result<(), CliError> {
    inputs::require_dir(&a.gt)?;
    prepare(&a.inputs, &a.amr, &a.out)?;
    // resolve every ground truth before any work starts
    let gt_paths: Vec<Vec<PathBuf>> = a
        .inputs
        .iter()
        .map(|p| {
            let stem = if a.segment {
                inputs::stem(p)
            } else {
                inputs::source_stem(p)
            };
            inputs::find_ground_truths(&a.gt, &stem)
        })
        .collect::<Result<_, _>>()?;
    let params = a.amr.params()?;
    let conn: Connectivity = a.amr.connectivity.into();
    let jobs: Vec<(PathBuf, Vec<PathBuf>)> = a.inputs.iter().cloned().zip(gt_paths).collect();
    let pool = inputs::thread_pool()?;
    let rows: Vec<EvalRow> = pool.install(|| {
        jobs.par_iter()
            .map(|(path, gts)| {
                let seg: LabelImage = if a.segment {
                    let (_, gradient) = load_with_gradient(path, &a.amr.gradient)?;
                    amr_wt_detailed(&SegmentInput::Gradient(gradient), &params, conn)?.labels
                } else {
                    inputs::load_labels(path)?
                };
                let gts = gts
                    .iter()
                    .map(|g| inputs::load_labels(g))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(EvalRow {
                    name: inputs::stem(path),
                    report: evaluate(&seg, &gts)?,
                    regions: seg.num_labels(),
                    ground_truths: gts.len(),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let mut csv = String::from("image,pri,cv,vi,regions,ground_truths\n");
    for r in &rows {
        let m = r.report;
        writeln!(
            csv,
            "{},{:.6},{:.6},{:.6},{},{}",
            r.name, m.pri, m.cv, m.vi, r.regions, r.ground_truths
        )
        .expect("writing to a String cannot fail");
    }
    let n = rows.len() as f64;
    let mean = |f: fn(&MetricReport) -> f64| rows.iter().map(|r| f(&r.report)).sum::<f64>() / n;
    let (pri, cv, vi) = (mean(|m| m.pri), mean(|m| m.cv), mean(|m| m.vi));
    writeln!(csv, "mean,{pri:.6},{cv:.6},{vi:.6},,").expect("writing to a String cannot fail");

    let csv_path = a.out.join("eval.csv");
    std::fs::write(&csv_path, &csv)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", csv_path.display())))?;
    let mut params_json = amr_json(&a.amr);
    params_json["segment"] = json!(a.segment);
    write_json(
        &a.out.join("eval.json"),
        &json!({
            "command": "eval",
            "ground_truth_dir": a.gt.display().to_string(),
            "params": params_json,
            "vi_units": "bits",
            "images": rows.len(),
            "mean": {"pri": pri, "cv": cv, "vi": vi},
        }),
    )?;
    print!("{csv}");
    Ok(())
}

fn demo(a: &DemoArgs) -> Result<(), CliError> {
    inputs::create_out_dir(&a.out)?;
    let mut entries = Vec::new();
    for sample in synthetic::corpus(a.seed) {
        let image = match &sample.input {
            SegmentInput::Gradient(g) => {
                let p = a.out.join(format!("{}.pfm", sample.name));
                save_pfm(g.as_gray(), &p)?;
                p
            }
            SegmentInput::Gray(g) => {
                let p = a.out.join(format!("{}.png", sample.name));
                save_gray_png(g, &p)?;
                p
            }
            SegmentInput::Color(c) => {
                let p = a.out.join(format!("{}.png", sample.name));
                save_color_png(c, &p)?;
                p
            }
        };
        let gt = a.out.join(format!("{}_gt.png", sample.name));
        save_labels(&sample.truth, &gt)?;
        println!("{}", image.display());
        entries.push(json!({
            "name": sample.name,
            "image": image.file_name().map(|n| n.to_string_lossy().into_owned()),
            "ground_truth": gt.file_name().map(|n| n.to_string_lossy().into_owned()),
            "ground_truth_regions": sample.truth.num_labels(),
        }));
    }
    write_json(
        &a.out.join("demo.json"),
        &json!({"command": "demo", "seed": a.seed, "images": entries}),
    )
}
