//! Implementations of the CLI subcommands.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use sixsoid::integrator::{only3_volume_of, volume_of_symmetric_profile};
use sixsoid::{
    area_sixsoid_slice, bottom_side_chord, density_table, enumerate_sensors, sample_coverage_cube,
    sample_slice_area, sensor_budget_formula, sixsoid_profile, sixsoid_volume, volume_table,
    ArrangementMode, ChordFormula, CoverageReport, DeploymentPlan, Error, FoiGrid,
    KProfileResolution, Only3Profile, QuadratureConfig, SamplePlan, SliceSampler,
    TransitionPoints,
};

use crate::{
    CliError, Fault, Format, PlanArgs, Quantity, SliceArgs, TableKind, TablesArgs, ValidateArgs,
    VolumeArgs,
};

fn check_radius(radius: f64) -> Result<(), CliError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(CliError::Input(format!(
            "radius must be positive, got {radius}"
        )));
    }
    Ok(())
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("valid JSON"));
}

// --- volume ---

pub fn volume(args: &VolumeArgs) -> Result<(), CliError> {
    check_radius(args.radius)?;
    if !(args.tolerance > 0.0) {
        return Err(CliError::Input(format!(
            "tolerance must be positive, got {}",
            args.tolerance
        )));
    }
    let r3 = args.radius.powi(3);
    let cfg = QuadratureConfig {
        abs_tolerance: args.tolerance * r3,
        max_subdivisions: 1 << 20,
    };

    match args.quantity {
        Quantity::Sixsoid => {
            let result = sixsoid_volume(args.radius, &cfg);
            let result = unwrap_volume(result, "sixsoid", args)?;
            match args.format {
                Format::Json => print_json(&json!({
                    "quantity": "sixsoid",
                    "radius": args.radius,
                    "value": result.value,
                    "estimated_error": result.estimated_error,
                    "per_unit_radius_cubed": result.value / r3,
                    "pieces": result.piece_contributions.iter().map(|c| json!({
                        "interval": [c.interval.0, c.interval.1],
                        "value": c.value,
                    })).collect::<Vec<_>>(),
                })),
                Format::Csv => {
                    println!("quantity,value,estimated_error");
                    println!("sixsoid,{},{}", result.value, result.estimated_error);
                }
            }
        }
        Quantity::Only3 => {
            let profile = Only3Profile::new(args.radius, SliceSampler::default())?;
            let result = only3_volume_of(&profile, &cfg);
            let result = unwrap_volume(result, "only3", args)?;
            let four_covered = r3 - result.value;
            match args.format {
                Format::Json => print_json(&json!({
                    "quantity": "only3",
                    "radius": args.radius,
                    "value": result.value,
                    "estimated_error": result.estimated_error,
                    "per_unit_radius_cubed": result.value / r3,
                    "four_covered": four_covered,
                    "four_covered_per_unit_radius_cubed": four_covered / r3,
                    "branch_validations": profile.validations().iter().map(|v| json!({
                        "branch": v.label,
                        "range": [v.range.0, v.range.1],
                        "accepted": v.accepted,
                        "max_discrepancy": v.max_discrepancy,
                        "probes": v.probes.iter().map(|p| json!({
                            "x": p.x,
                            "candidate": if p.candidate.is_finite() {
                                json!(p.candidate)
                            } else {
                                json!(null)
                            },
                            "sampled": p.sampled,
                            "tolerance": p.tolerance,
                        })).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                    "pieces": result.piece_contributions.iter().map(|c| json!({
                        "interval": [c.interval.0, c.interval.1],
                        "value": c.value,
                    })).collect::<Vec<_>>(),
                })),
                Format::Csv => {
                    println!("quantity,value,estimated_error");
                    println!("only3,{},{}", result.value, result.estimated_error);
                    println!("four_covered,{},{}", four_covered, result.estimated_error);
                }
            }
        }
        Quantity::Kprofile => {
            let profile = sixsoid::kcovered_volume_profile(
                args.radius,
                &cfg,
                KProfileResolution::default(),
            )?;
            match args.format {
                Format::Json => print_json(&json!({
                    "quantity": "kprofile",
                    "radius": args.radius,
                    "volumes": (1u32..=6).map(|k| json!({
                        "k": k,
                        "value": profile.volume(k).expect("k in range"),
                        "per_unit_radius_cubed": profile.volume(k).expect("k in range") / r3,
                    })).collect::<Vec<_>>(),
                    "estimated_error": profile.estimated_error,
                    "panels": profile.resolution.panels,
                    "grid": profile.resolution.grid,
                })),
                Format::Csv => {
                    println!("k,volume,estimated_error");
                    for k in 1u32..=6 {
                        println!(
                            "{k},{},{}",
                            profile.volume(k).expect("k in range"),
                            profile.estimated_error
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

/// Convergence failures still print the best estimate as the payload,
/// then exit with code 2.
fn unwrap_volume(
    result: Result<sixsoid::VolumeResult, Error>,
    quantity: &str,
    args: &VolumeArgs,
) -> Result<sixsoid::VolumeResult, CliError> {
    match result {
        Ok(v) => Ok(v),
        Err(Error::ToleranceNotReached {
            tolerance,
            max_subdivisions,
            best,
            estimated_error,
        }) => {
            print_json(&json!({
                "error": "tolerance not reached",
                "quantity": quantity,
                "radius": args.radius,
                "tolerance": tolerance,
                "max_subdivisions": max_subdivisions,
                "value": best,
                "estimated_error": estimated_error,
            }));
            Err(CliError::Science(format!(
                "quadrature for {quantity} did not converge; best estimate {best} ± {estimated_error}"
            )))
        }
        Err(e) => Err(e.into()),
    }
}

// --- slice ---

pub fn slice(args: &SliceArgs) -> Result<(), CliError> {
    check_radius(args.radius)?;

    if let Some(panels) = args.sweep {
        if panels == 0 {
            return Err(CliError::Input("sweep needs at least one panel".into()));
        }
        println!("x,area");
        for i in 0..=panels {
            let x = args.radius * i as f64 / panels as f64;
            println!("{x},{}", area_sixsoid_slice(x, args.radius)?);
        }
        return Ok(());
    }

    let x = args.x.expect("clap requires x without sweep");
    let k = args.k.unwrap_or(6);
    if !(1..=6).contains(&k) {
        return Err(CliError::Input(format!("k must be in 1..=6, got {k}")));
    }
    let analytic = if k == 6 {
        Some(area_sixsoid_slice(x, args.radius)?)
    } else {
        // Still validates the slice arguments.
        area_sixsoid_slice(x, args.radius)?;
        None
    };
    let plan = SamplePlan::new(args.samples, crate::DEFAULT_SEED);
    let report = sample_slice_area(x, args.radius, &plan)?;
    let sampled = report.at_least_area(k as usize);
    let std_error = report.at_least_std_error(k as usize);
    let z = analytic.map(|a| report.z_score(6, a));

    match args.format {
        Format::Json => print_json(&json!({
            "x": x,
            "radius": args.radius,
            "k": k,
            "analytic": analytic,
            "sampled": sampled,
            "std_error": std_error,
            "z_score": z,
            "n_samples": report.n_samples,
            "seed": report.seed,
        })),
        Format::Csv => {
            println!("x,k,analytic,sampled,std_error,z_score");
            println!(
                "{x},{k},{},{sampled},{std_error},{}",
                analytic.map_or(String::new(), |a| a.to_string()),
                z.map_or(String::new(), |z| z.to_string()),
            );
        }
    }
    Ok(())
}

// --- plan ---

fn coverage_json(report: &CoverageReport) -> serde_json::Value {
    let levels: Vec<_> = (0..=report.max_k())
        .map(|k| {
            json!({
                "k": k,
                "exact_fraction": report.exact_fraction(k),
                "exact_std_error": report.exact_std_error(k),
                "at_least_fraction": report.at_least_fraction(k),
                "at_least_std_error": report.at_least_std_error(k),
            })
        })
        .collect();
    json!({
        "arrangement": report.arrangement,
        "n_samples": report.n_samples,
        "seed": report.seed,
        "stream_count": report.stream_count,
        "min_observed_coverage": report.min_observed(),
        "levels": levels,
    })
}

pub fn plan(args: &PlanArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.foi)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.foi.display())))?;
    let foi = FoiGrid::from_json_str(&text)?;

    let plan = match &args.verify_plan {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            DeploymentPlan::from_json_str(&text)?
        }
        None => enumerate_sensors(&foi)?,
    };

    let formula = sensor_budget_formula(foi.volume(), plan.sensing_radius)?;
    let sample_plan = SamplePlan::new(args.samples, args.seed);
    let coverage = sixsoid::coverage_stats(&plan, &foi, &sample_plan)?;

    if let Some(out) = &args.out {
        std::fs::write(out, plan.to_json_string())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
    }

    print_json(&json!({
        "sensor_count": plan.sensor_count(),
        "formula_count": formula,
        "radius": plan.sensing_radius,
        "foi_cells": foi.cell_count(),
        "foi_volume": foi.volume(),
        "out": args.out.as_ref().map(|p| p.display().to_string()),
        "verified_plan": args.verify_plan.as_ref().map(|p| p.display().to_string()),
        "coverage": coverage_json(&coverage),
    }));
    Ok(())
}

// --- tables ---

pub fn tables(args: &TablesArgs) -> Result<(), CliError> {
    match args.which {
        TableKind::Volume => {
            let radii = parse_radii(args.radii.as_deref().expect("clap enforces --radii"))?;
            let rows = volume_table(&radii)?;
            let mut out = String::from("Volume,Reuleaux Tetrahedron,Sixsoid\n");
            for row in rows {
                writeln!(
                    out,
                    "r = {},{:.0},{:.0}",
                    row.r, row.reuleaux_volume, row.sixsoid_volume
                )
                .expect("write to string");
            }
            print!("{out}");
        }
        TableKind::Density => {
            let r = args.r.expect("clap enforces --r");
            let kmax = args.kmax.expect("clap enforces --kmax");
            let rows = density_table(r, kmax)?;
            let mut out = String::from("Spatial Density (x 10^-4),Reuleaux Tetrahedron,Sixsoid\n");
            for row in rows {
                writeln!(
                    out,
                    "k = {},{:.4},{:.4}",
                    row.k,
                    row.reuleaux_density * 1e4,
                    row.sixsoid_density * 1e4
                )
                .expect("write to string");
            }
            print!("{out}");
        }
    }
    Ok(())
}

fn parse_radii(spec: &str) -> Result<Vec<f64>, CliError> {
    let radii: Result<Vec<f64>, _> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    let radii = radii.map_err(|e| CliError::Input(format!("bad radii list {spec:?}: {e}")))?;
    if radii.is_empty() {
        return Err(CliError::Input("radii list is empty".into()));
    }
    Ok(radii)
}

// --- validate ---

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    check_radius(args.radius)?;
    let side = args.radius;
    let chord_formula = match args.inject_fault {
        Fault::None => ChordFormula::Intersection,
        Fault::Chord => ChordFormula::NonVanishing,
    };
    let mut checks: Vec<Check> = Vec::new();

    // Continuity of the piecewise 6-covered area at its breakpoints.
    let profile = sixsoid_profile(side)?;
    let max_gap = profile
        .breakpoint_gaps()
        .iter()
        .map(|g| g.relative_gap())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "profile-continuity",
        pass: max_gap < 1e-9,
        detail: format!("max relative gap {max_gap:.3e} across breakpoints"),
    });

    // The chord vanishes at the tangency depth.
    let t = TransitionPoints::for_side(side)?;
    let chord_at_l1 = bottom_side_chord(t.l1, side)?;
    checks.push(Check {
        name: "chord-tangency",
        pass: chord_at_l1.abs() < 1e-9 * side,
        detail: format!("chord at tangency depth = {chord_at_l1:.3e}"),
    });

    // Mirror symmetry of the slice area at random depths.
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(10);
    let mut max_asym: f64 = 0.0;
    for _ in 0..100 {
        let x = rng.gen::<f64>() * side;
        let a = area_sixsoid_slice(x, side)?;
        let b = area_sixsoid_slice(side - x, side)?;
        max_asym = max_asym.max((a - b).abs() / a.abs().max(1e-300));
    }
    checks.push(Check {
        name: "profile-symmetry",
        pass: max_asym < 1e-12,
        detail: format!("max relative asymmetry {max_asym:.3e} over 100 random depths"),
    });

    // Analytic slice area vs the seeded 2D sampler at 20 random depths plus
    // the midpoints of the two eight-arc ranges (where a faulty chord must
    // be caught for any seed).
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(11);
    let mut xs: Vec<f64> = (0..20).map(|_| rng.gen::<f64>() * side).collect();
    xs.push((t.l1 + t.l2) / 2.0);
    xs.push(side - (t.l1 + t.l2) / 2.0);
    let mut worst_z: f64 = 0.0;
    let mut worst_x = xs[0];
    let mut finite = true;
    for (i, &x) in xs.iter().enumerate() {
        let analytic =
            sixsoid::cross_section::area_sixsoid_slice_with_chord(x, side, chord_formula)?;
        let sub_seed = args
            .seed
            .wrapping_add((i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let rep = sample_slice_area(x, side, &SamplePlan::new(args.slice_samples, sub_seed))?;
        let z = rep.z_score(6, analytic);
        if !z.is_finite() {
            finite = false;
            worst_x = x;
        } else if z.abs() > worst_z {
            worst_z = z.abs();
            worst_x = x;
        }
    }
    checks.push(Check {
        name: "slice-oracle-equivalence",
        pass: finite && worst_z < 4.0,
        detail: if finite {
            format!("max |z| = {worst_z:.2} (at x = {worst_x:.4}) over {} slices", xs.len())
        } else {
            format!("slice-equivalence violation at x = {worst_x:.4}: non-finite analytic area")
        },
    });

    // 3D Monte Carlo against the analytic volume.
    let cfg = QuadratureConfig::for_side(side);
    let volume = volume_of_symmetric_profile(&profile, &cfg)?;
    let mc_plan = SamplePlan::new(args.samples, args.seed);
    let cube = sample_coverage_cube(side, &mc_plan, ArrangementMode::SingleCube)?;
    let r3 = side * side * side;
    let mc6 = cube.at_least_fraction(6) * r3;
    let se6 = cube.at_least_std_error(6) * r3;
    let z6 = (mc6 - volume.value) / se6;
    checks.push(Check {
        name: "volume-mc-agreement",
        pass: z6.is_finite() && z6.abs() < 4.0,
        detail: format!(
            "analytic {:.6}, MC {:.6} ± {:.6}, z = {:.2}",
            volume.value, mc6, se6, z6
        ),
    });

    // Exactly-3 volume route vs MC.
    let only3 = Only3Profile::new(side, SliceSampler::default())?;
    let only3_vol = only3_volume_of(&only3, &cfg)?;
    let mc3 = cube.exact_fraction(3) * r3;
    let se3 = cube.exact_std_error(3) * r3;
    let diff3 = (only3_vol.value - mc3).abs();
    let tol3 = 4.0 * se3 + only3_vol.estimated_error;
    checks.push(Check {
        name: "only3-mc-agreement",
        pass: diff3 <= tol3,
        detail: format!(
            "profile {:.6} ± {:.4}, MC {:.6} ± {:.6}, diff {:.2e}",
            only3_vol.value, only3_vol.estimated_error, mc3, se3, diff3
        ),
    });

    // Every sample of the cube is at least 3-covered.
    let below3 = cube.n_samples - cube.at_least_count(3);
    checks.push(Check {
        name: "full-3-coverage",
        pass: below3 == 0,
        detail: format!("{below3} of {} samples below 3-coverage", cube.n_samples),
    });

    // k-profile consistency: k = 6 matches the analytic volume, k = 3 is the
    // whole cube.
    let kprofile = sixsoid::kcovered_volume_profile(side, &cfg, KProfileResolution::default())?;
    let diff_k6 = (kprofile.volume(6)? - volume.value).abs();
    let k3 = kprofile.volume(3)?;
    let pass_k = diff_k6 < 0.002 * r3 && (k3 - r3).abs() < 1e-9 * r3;
    checks.push(Check {
        name: "kprofile-consistency",
        pass: pass_k,
        detail: format!("k=6 vs analytic diff {diff_k6:.2e}; k=3 volume {k3:.12}"),
    });

    let all_pass = checks.iter().all(|c| c.pass);
    print_json(&json!({
        "radius": side,
        "samples": args.samples,
        "slice_samples": args.slice_samples,
        "seed": args.seed,
        "fault": match args.inject_fault {
            Fault::None => "none",
            Fault::Chord => "non-vanishing-chord",
        },
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "pass": c.pass,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
        "pass": all_pass,
    }));

    if all_pass {
        Ok(())
    } else {
        let failed: Vec<_> = checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name)
            .collect();
        Err(CliError::Science(format!(
            "validation failed: {}",
            failed.join(", ")
        )))
    }
}
